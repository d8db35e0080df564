//! Node embeddings: DeepWalk (truncated random walks + skip-gram) and HOPE
//! (truncated SVD of the Katz proximity matrix).

mod deepwalk;
mod hope;

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

pub use deepwalk::{
    deepwalk, random_walks, sgns_loss_and_grad, softmax_loss_and_grad, DeepWalkConfig,
    SkipGramGradient, TrainingObjective,
};
pub use hope::{hope, spectral_norm, HopeConfig};

/// `rows x dim` matrix of node vectors, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingMatrix {
    rows: usize,
    dim: usize,
    values: Vec<f64>,
}

impl EmbeddingMatrix {
    pub fn zeros(rows: usize, dim: usize) -> Self {
        EmbeddingMatrix {
            rows,
            dim,
            values: vec![0.0; rows * dim],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::validation("ragged embedding rows"));
        }
        let values: Vec<f64> = rows.iter().flatten().copied().collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("non-finite embedding entry"));
        }
        Ok(EmbeddingMatrix {
            rows: rows.len(),
            dim,
            values,
        })
    }

    pub(crate) fn from_flat(rows: usize, dim: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), rows * dim);
        EmbeddingMatrix { rows, dim, values }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// One node per line: `node_id v1 ... vd [label]`, coordinates in
    /// scientific notation with ten significant digits.
    pub fn to_text(&self, labels: Option<&[String]>) -> String {
        let mut out = String::with_capacity(self.rows * (self.dim * 18 + 8));
        for i in 0..self.rows {
            let _ = write!(out, "{i}");
            for v in self.row(i) {
                let _ = write!(out, " {v:.9e}");
            }
            if let Some(labels) = labels {
                let _ = write!(out, " {}", labels[i]);
            }
            out.push('\n');
        }
        out
    }

    /// Inverse of [`to_text`](Self::to_text). Returns the matrix and the
    /// trailing label column when present.
    pub fn from_text(text: &str, dim: usize) -> Result<(Self, Option<Vec<String>>)> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut labels: Vec<String> = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |m: String| Error::Parse { line: idx + 1, message: m };
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() != dim + 1 && tokens.len() != dim + 2 {
                return Err(bad(format!("expected {} or {} fields, got {}", dim + 1, dim + 2, tokens.len())));
            }
            let id: usize = tokens[0].parse().map_err(|_| bad(format!("bad node id `{}`", tokens[0])))?;
            if id != rows.len() {
                return Err(bad(format!("node {id} out of order")));
            }
            let row = tokens[1..=dim]
                .iter()
                .map(|t| t.parse::<f64>().map_err(|_| bad(format!("bad coordinate `{t}`"))))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
            if tokens.len() == dim + 2 {
                labels.push(tokens[dim + 1].to_owned());
            }
        }
        let labels = match labels.len() {
            0 => None,
            k if k == rows.len() => Some(labels),
            _ => return Err(Error::validation("label column present on only some rows")),
        };
        Ok((EmbeddingMatrix::from_rows(&rows)?, labels))
    }

    pub fn write_to(&self, path: &Path, labels: Option<&[String]>) -> Result<()> {
        std::fs::write(path, self.to_text(labels)).map_err(|e| Error::io(path, e))
    }
}

/// Anything that maps a graph to node vectors. `seed` fixes every random
/// choice the embedder makes.
pub trait Embedder: Sync {
    fn embed(&self, g: &Graph, seed: u64) -> Result<EmbeddingMatrix>;
}

impl Embedder for DeepWalkConfig {
    fn embed(&self, g: &Graph, seed: u64) -> Result<EmbeddingMatrix> {
        deepwalk(g, self, seed)
    }
}

impl Embedder for HopeConfig {
    fn embed(&self, g: &Graph, _seed: u64) -> Result<EmbeddingMatrix> {
        hope(g, self.dim, self.beta)
    }
}

/// Downstream embedder selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EmbedderConfig {
    Deepwalk(DeepWalkConfig),
    Hope(HopeConfig),
}

impl Default for EmbedderConfig {
    fn default() -> Self {
        EmbedderConfig::Deepwalk(DeepWalkConfig::default())
    }
}

impl Embedder for EmbedderConfig {
    fn embed(&self, g: &Graph, seed: u64) -> Result<EmbeddingMatrix> {
        match self {
            EmbedderConfig::Deepwalk(c) => c.embed(g, seed),
            EmbedderConfig::Hope(c) => c.embed(g, seed),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip_with_labels() {
        let m = EmbeddingMatrix::from_rows(&[vec![0.125, -3.0e-7], vec![1.0 / 3.0, 2.5]]).unwrap();
        let labels = vec!["a".to_owned(), "b".to_owned()];
        let text = m.to_text(Some(&labels));
        assert!(text.starts_with("0 1.250000000e-1 -3.000000000e-7 a\n"));
        let (back, l) = EmbeddingMatrix::from_text(&text, 2).unwrap();
        assert_eq!(l, Some(labels));
        for (a, b) in back.as_slice().iter().zip(m.as_slice()) {
            assert!((a - b).abs() <= 1e-9 * b.abs());
        }
    }

    #[test]
    fn rejects_non_finite_rows() {
        assert!(EmbeddingMatrix::from_rows(&[vec![f64::NAN]]).is_err());
        assert!(EmbeddingMatrix::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }
}
