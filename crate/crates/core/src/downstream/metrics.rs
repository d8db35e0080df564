use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::Partition;

/// Normalized mutual information `MI / sqrt(H(P) H(T))` with natural logs.
///
/// Identical groupings score 1. Otherwise a single-block side has zero
/// entropy and the score is 0.
pub fn nmi(p: &Partition, t: &Partition) -> Result<f64> {
    if p.len() != t.len() {
        return Err(Error::validation(format!("partition sizes differ: {} vs {}", p.len(), t.len())));
    }
    if p.equivalent(t) {
        return Ok(1.0);
    }
    let n = p.len() as f64;
    let (kp, kt) = (p.num_blocks(), t.num_blocks());
    let mut joint = vec![0usize; kp * kt];
    let mut rows = vec![0usize; kp];
    let mut cols = vec![0usize; kt];
    for (&a, &b) in p.assignment().iter().zip(t.assignment()) {
        joint[a * kt + b] += 1;
        rows[a] += 1;
        cols[b] += 1;
    }
    let entropy = |counts: &[usize]| -> f64 {
        counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let q = c as f64 / n;
                -q * q.ln()
            })
            .sum()
    };
    let (hp, ht) = (entropy(&rows), entropy(&cols));
    if hp <= 0.0 || ht <= 0.0 {
        return Ok(0.0);
    }
    let mut mi = 0.0;
    for a in 0..kp {
        for b in 0..kt {
            let c = joint[a * kt + b];
            if c > 0 {
                let pab = c as f64 / n;
                mi += pab * (pab * n * n / (rows[a] as f64 * cols[b] as f64)).ln();
            }
        }
    }
    Ok((mi / (hp * ht).sqrt()).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassScore {
    pub class: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Occurrences of the class in the truth vector.
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub micro_f1: f64,
    pub macro_f1: f64,
    /// One entry per class seen in either vector, ordered by class id.
    pub per_class: Vec<ClassScore>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Per-class and averaged F1 for single-label predictions.
///
/// Macro-F1 averages over the classes present in `truth`; micro-F1 pools
/// true and false positives over every class.
pub fn f1_report(pred: &[usize], truth: &[usize]) -> Result<ClassificationReport> {
    if pred.len() != truth.len() {
        return Err(Error::validation(format!(
            "prediction and truth lengths differ: {} vs {}",
            pred.len(),
            truth.len()
        )));
    }
    let k = pred.iter().chain(truth).max().map_or(0, |&m| m + 1);
    let (mut tp, mut fp, mut fn_) = (vec![0usize; k], vec![0usize; k], vec![0usize; k]);
    let mut support = vec![0usize; k];
    let mut predicted = vec![0usize; k];
    for (&p, &t) in pred.iter().zip(truth) {
        support[t] += 1;
        predicted[p] += 1;
        if p == t {
            tp[p] += 1;
        } else {
            fp[p] += 1;
            fn_[t] += 1;
        }
    }
    let per_class: Vec<ClassScore> = (0..k)
        .filter(|&c| support[c] > 0 || predicted[c] > 0)
        .map(|c| {
            let precision = ratio(tp[c], tp[c] + fp[c]);
            let recall = ratio(tp[c], tp[c] + fn_[c]);
            ClassScore {
                class: c,
                precision,
                recall,
                f1: harmonic(precision, recall),
                support: support[c],
            }
        })
        .collect();
    let truth_classes: Vec<&ClassScore> = per_class.iter().filter(|s| s.support > 0).collect();
    let macro_f1 = if truth_classes.is_empty() {
        0.0
    } else {
        truth_classes.iter().map(|s| s.f1).sum::<f64>() / truth_classes.len() as f64
    };
    let (stp, sfp, sfn): (usize, usize, usize) = (tp.iter().sum(), fp.iter().sum(), fn_.iter().sum());
    let micro_f1 = harmonic(ratio(stp, stp + sfp), ratio(stp, stp + sfn));
    Ok(ClassificationReport {
        micro_f1,
        macro_f1,
        per_class,
    })
}
