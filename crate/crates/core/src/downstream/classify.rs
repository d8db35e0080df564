use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::embed::EmbeddingMatrix;
use crate::error::{Error, Result};

/// Per-class random split. Each class contributes
/// `round(fraction * size)` nodes to training, at least one, and keeps at
/// least one for testing when it has two or more members. Both index lists
/// come back sorted.
pub fn stratified_split<R: Rng + ?Sized>(labels: &[usize], train_fraction: f64, rng: &mut R) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction <= 1.0) {
        return Err(Error::validation("train fraction must lie in (0, 1]"));
    }
    let k = labels.iter().max().map_or(0, |&m| m + 1);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, &c) in labels.iter().enumerate() {
        by_class[c].push(i);
    }
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for mut members in by_class.into_iter().filter(|m| !m.is_empty()) {
        members.shuffle(rng);
        let size = members.len();
        let mut take = ((train_fraction * size as f64).round() as usize).max(1);
        if size > 1 {
            take = take.min(size - 1);
        }
        train.extend_from_slice(&members[..take]);
        test.extend_from_slice(&members[take..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogisticConfig {
    /// L2 penalty on the weights (biases are not penalized).
    pub lambda: f64,
    pub learning_rate: f64,
    pub iterations: usize,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        LogisticConfig {
            lambda: 1e-4,
            learning_rate: 0.5,
            iterations: 500,
        }
    }
}

/// Multinomial logistic regression over standardized features.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    classes: usize,
    dim: usize,
    /// Row `c` holds class `c`'s weights followed by its bias.
    params: Vec<f64>,
    mean: Vec<f64>,
    scale: Vec<f64>,
}

/// Mean cross-entropy plus `lambda / 2 * ||W||²` and its gradient.
///
/// `params` is `classes` rows of `dim` weights and one trailing bias.
pub fn loss_and_grad(params: &[f64], x: &[Vec<f64>], y: &[usize], classes: usize, lambda: f64) -> (f64, Vec<f64>) {
    let dim = x.first().map_or(0, Vec::len);
    let stride = dim + 1;
    assert_eq!(params.len(), classes * stride, "parameter length");
    let mut grad = vec![0.0; params.len()];
    let mut loss = 0.0;
    let mut logits = vec![0.0; classes];
    let inv_n = 1.0 / x.len().max(1) as f64;
    for (xi, &yi) in x.iter().zip(y) {
        for (c, l) in logits.iter_mut().enumerate() {
            let w = &params[c * stride..(c + 1) * stride];
            *l = w[dim] + w[..dim].iter().zip(xi).map(|(a, b)| a * b).sum::<f64>();
        }
        let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = logits.iter().map(|l| (l - top).exp()).sum();
        loss += (top + z.ln() - logits[yi]) * inv_n;
        for c in 0..classes {
            let p = (logits[c] - top).exp() / z;
            let d = (p - if c == yi { 1.0 } else { 0.0 }) * inv_n;
            let g = &mut grad[c * stride..(c + 1) * stride];
            for (gj, xj) in g[..dim].iter_mut().zip(xi) {
                *gj += d * xj;
            }
            g[dim] += d;
        }
    }
    for c in 0..classes {
        for j in 0..dim {
            let w = params[c * stride + j];
            loss += 0.5 * lambda * w * w;
            grad[c * stride + j] += lambda * w;
        }
    }
    (loss, grad)
}

/// Fits the classifier on the `train` rows by full-batch gradient descent.
/// Labels are dense class ids; every class in `labels` must appear in the
/// training rows.
pub fn train_logistic(r: &EmbeddingMatrix, labels: &[usize], train: &[usize], cfg: &LogisticConfig) -> Result<LogisticModel> {
    if labels.len() != r.rows() {
        return Err(Error::validation(format!("{} labels for {} rows", labels.len(), r.rows())));
    }
    if train.is_empty() {
        return Err(Error::validation("empty training set"));
    }
    let classes = labels.iter().max().map_or(0, |&m| m + 1);
    let mut seen = vec![false; classes];
    for &i in train {
        seen[labels[i]] = true;
    }
    for c in 0..classes {
        if !seen[c] && labels.contains(&c) {
            return Err(Error::Stratification { class: c });
        }
    }
    let dim = r.dim();
    let mut mean = vec![0.0; dim];
    for &i in train {
        for (m, v) in mean.iter_mut().zip(r.row(i)) {
            *m += v / train.len() as f64;
        }
    }
    let mut scale = vec![0.0; dim];
    for &i in train {
        for ((s, v), m) in scale.iter_mut().zip(r.row(i)).zip(&mean) {
            *s += (v - m) * (v - m) / train.len() as f64;
        }
    }
    for s in scale.iter_mut() {
        *s = if *s > 0.0 { s.sqrt() } else { 1.0 };
    }
    let mut model = LogisticModel {
        classes,
        dim,
        params: vec![0.0; classes * (dim + 1)],
        mean,
        scale,
    };
    let x: Vec<Vec<f64>> = train.iter().map(|&i| model.standardize(r.row(i))).collect();
    let y: Vec<usize> = train.iter().map(|&i| labels[i]).collect();
    for _ in 0..cfg.iterations {
        let (_, grad) = loss_and_grad(&model.params, &x, &y, classes, cfg.lambda);
        for (p, g) in model.params.iter_mut().zip(&grad) {
            *p -= cfg.learning_rate * g;
        }
    }
    Ok(model)
}

impl LogisticModel {
    fn standardize(&self, row: &[f64]) -> Vec<f64> {
        row.iter().zip(&self.mean).zip(&self.scale).map(|((v, m), s)| (v - m) / s).collect()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    /// Most probable class for one raw embedding row; ties go to the lower id.
    pub fn predict_row(&self, row: &[f64]) -> usize {
        let x = self.standardize(row);
        let stride = self.dim + 1;
        (0..self.classes)
            .map(|c| {
                let w = &self.params[c * stride..(c + 1) * stride];
                (c, w[self.dim] + w[..self.dim].iter().zip(&x).map(|(a, b)| a * b).sum::<f64>())
            })
            .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc })
            .0
    }

    pub fn predict(&self, r: &EmbeddingMatrix, rows: &[usize]) -> Vec<usize> {
        rows.iter().map(|&i| self.predict_row(r.row(i))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;

    #[test]
    fn separable_training_accuracy() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, (i % 3) as f64]).collect();
        let labels: Vec<usize> = (0..20).map(|i| usize::from(i >= 10)).collect();
        let r = EmbeddingMatrix::from_rows(&rows).unwrap();
        let all: Vec<usize> = (0..20).collect();
        let model = train_logistic(&r, &labels, &all, &LogisticConfig::default()).unwrap();
        assert_eq!(model.predict(&r, &all), labels);
    }

    #[test]
    fn missing_class_is_stratification_error() {
        let r = EmbeddingMatrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        let err = train_logistic(&r, &[0, 0, 1], &[0, 1], &LogisticConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Stratification { class: 1 }));
    }

    #[test]
    fn single_class_is_constant() {
        let r = EmbeddingMatrix::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        let model = train_logistic(&r, &[0, 0], &[0], &LogisticConfig::default()).unwrap();
        assert_eq!(model.predict(&r, &[0, 1]), vec![0, 0]);
    }

    #[test]
    fn split_keeps_every_class_in_both_sides() {
        let labels = [0, 0, 0, 0, 0, 1, 1, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2];
        let (train, test) = stratified_split(&labels, 0.8, &mut seed::rng(3)).unwrap();
        assert_eq!(train.len() + test.len(), labels.len());
        for c in 0..3 {
            assert!(train.iter().any(|&i| labels[i] == c));
            assert!(test.iter().any(|&i| labels[i] == c));
        }
        assert_eq!(train.iter().filter(|&&i| labels[i] == 0).count(), 4);
    }
}
