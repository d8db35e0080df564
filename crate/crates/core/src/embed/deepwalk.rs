use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::EmbeddingMatrix;
use crate::derive_seed;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::seed;

/// How the skip-gram softmax is approximated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainingObjective {
    /// `negative_samples` noise nodes per pair, drawn proportional to
    /// `degree^0.75`.
    #[default]
    NegativeSampling,
    /// Exact softmax over all nodes. Quadratic; for small graphs only.
    FullSoftmax,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeepWalkConfig {
    /// Walks started from every node.
    pub walks_per_node: usize,
    /// Maximum number of nodes in a walk.
    pub walk_length: usize,
    /// Context radius around the center node.
    pub window: usize,
    pub dim: usize,
    pub epochs: usize,
    pub negative_samples: usize,
    pub initial_lr: f64,
    pub final_lr: f64,
    pub objective: TrainingObjective,
}

impl Default for DeepWalkConfig {
    fn default() -> Self {
        DeepWalkConfig {
            walks_per_node: 10,
            walk_length: 40,
            window: 5,
            dim: 16,
            epochs: 1,
            negative_samples: 5,
            initial_lr: 0.025,
            final_lr: 0.0001,
            objective: TrainingObjective::NegativeSampling,
        }
    }
}

impl DeepWalkConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("walks_per_node", self.walks_per_node),
            ("walk_length", self.walk_length),
            ("window", self.window),
            ("epochs", self.epochs),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(Error::validation(format!("{name} must be positive")));
        }
        if self.objective == TrainingObjective::NegativeSampling && self.negative_samples == 0 {
            return Err(Error::validation("negative_samples must be positive"));
        }
        if self.window >= self.walk_length {
            return Err(Error::validation("window must be shorter than walk_length"));
        }
        if self.dim < 2 {
            return Err(Error::validation("dim must be at least 2"));
        }
        if !(self.final_lr > 0.0 && self.final_lr <= self.initial_lr && self.initial_lr.is_finite()) {
            return Err(Error::validation("need 0 < final_lr <= initial_lr"));
        }
        Ok(())
    }
}

/// Truncated uniform random walks, `walks_per_node` per start node.
///
/// Walk `r` from node `v` draws from its own stream
/// (`v * walks_per_node + r`) of `seed`, so individual walks do not depend on
/// the order in which they are generated. The corpus is ordered pass by pass:
/// all nodes' first walks, then all second walks, and so on.
pub fn random_walks(g: &Graph, cfg: &DeepWalkConfig, seed: u64) -> Vec<Vec<usize>> {
    let n = g.node_count();
    let mut corpus = Vec::with_capacity(n * cfg.walks_per_node);
    for r in 0..cfg.walks_per_node {
        for start in 0..n {
            let stream = (start * cfg.walks_per_node + r) as u64;
            let mut rng = seed::rng_stream(seed, stream);
            corpus.push(walk_from(g, start, cfg.walk_length, &mut rng));
        }
    }
    corpus
}

fn walk_from<R: Rng>(g: &Graph, start: usize, length: usize, rng: &mut R) -> Vec<usize> {
    let mut walk = Vec::with_capacity(length);
    walk.push(start);
    let mut cur = start;
    while walk.len() < length {
        let nbrs = g.neighbors(cur);
        if nbrs.is_empty() {
            break;
        }
        cur = nbrs[rng.gen_range(0..nbrs.len())];
        walk.push(cur);
    }
    walk
}

/// DeepWalk embedding: skip-gram over [`random_walks`], trained by SGD with
/// a linearly decaying learning rate. Returns the input (center) vectors.
///
/// Isolated nodes receive no training signal and keep their initialization.
pub fn deepwalk(g: &Graph, cfg: &DeepWalkConfig, seed: u64) -> Result<EmbeddingMatrix> {
    cfg.validate()?;
    let n = g.node_count();
    if n == 0 {
        return Err(Error::validation("cannot embed an empty graph"));
    }
    let corpus = random_walks(g, cfg, seed);
    let mut rng = seed::rng(derive_seed!(seed, "skipgram"));
    let dim = cfg.dim;

    let bound = 0.5 / dim as f64;
    let mut input: Vec<f64> = (0..n * dim).map(|_| rng.gen_range(-bound..bound)).collect();
    let mut output = vec![0.0; n * dim];

    let noise = noise_distribution(g);
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    let positions: usize = corpus.iter().map(Vec::len).sum();
    let total = (positions * cfg.epochs).max(1) as f64;
    let mut processed = 0usize;
    let mut scratch = Scratch::new(dim, n);

    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &w in &order {
            let walk = &corpus[w];
            for (pos, &center) in walk.iter().enumerate() {
                let lr = cfg.initial_lr - (cfg.initial_lr - cfg.final_lr) * (processed as f64 / total);
                processed += 1;
                let lo = pos.saturating_sub(cfg.window);
                let hi = (pos + cfg.window).min(walk.len() - 1);
                for (j, &context) in walk.iter().enumerate().take(hi + 1).skip(lo) {
                    if j == pos {
                        continue;
                    }
                    match (cfg.objective, &noise) {
                        (TrainingObjective::NegativeSampling, Some(noise)) => {
                            scratch.negatives.clear();
                            for _ in 0..cfg.negative_samples {
                                let neg = noise.sample(&mut rng);
                                if neg != context {
                                    scratch.negatives.push(neg);
                                }
                            }
                            sgns_step(&mut input, &mut output, dim, center, context, lr, &mut scratch);
                        }
                        (TrainingObjective::FullSoftmax, _) => {
                            softmax_step(&mut input, &mut output, dim, n, center, context, lr, &mut scratch);
                        }
                        // every node is isolated, so there are no pairs
                        (TrainingObjective::NegativeSampling, None) => {}
                    }
                }
            }
        }
    }

    let m = EmbeddingMatrix::from_flat(n, dim, input);
    debug_assert!(m.is_finite());
    Ok(m)
}

fn noise_distribution(g: &Graph) -> Option<WeightedIndex<f64>> {
    let weights: Vec<f64> = g.degrees().into_iter().map(|d| (d as f64).powf(0.75)).collect();
    WeightedIndex::new(weights).ok()
}

struct Scratch {
    negatives: Vec<usize>,
    grad_center: Vec<f64>,
    scores: Vec<f64>,
}

impl Scratch {
    fn new(dim: usize, n: usize) -> Self {
        Scratch {
            negatives: Vec::new(),
            grad_center: vec![0.0; dim],
            scores: vec![0.0; n],
        }
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// One SGD step on the negative-sampling loss of a (center, context) pair
/// with `scratch.negatives` as noise nodes.
fn sgns_step(
    input: &mut [f64],
    output: &mut [f64],
    dim: usize,
    center: usize,
    context: usize,
    lr: f64,
    scratch: &mut Scratch,
) {
    let v = &input[center * dim..(center + 1) * dim];
    let acc = &mut scratch.grad_center;
    acc.iter_mut().for_each(|x| *x = 0.0);
    let targets = std::iter::once((context, 1.0)).chain(scratch.negatives.iter().map(|&t| (t, 0.0)));
    for (target, label) in targets {
        let u = &mut output[target * dim..(target + 1) * dim];
        let g = (label - sigmoid(dot(v, u))) * lr;
        for k in 0..dim {
            acc[k] += g * u[k];
            u[k] += g * v[k];
        }
    }
    let v = &mut input[center * dim..(center + 1) * dim];
    for k in 0..dim {
        v[k] += acc[k];
    }
}

#[allow(clippy::too_many_arguments)]
fn softmax_step(
    input: &mut [f64],
    output: &mut [f64],
    dim: usize,
    n: usize,
    center: usize,
    context: usize,
    lr: f64,
    scratch: &mut Scratch,
) {
    let v = &input[center * dim..(center + 1) * dim];
    let scores = &mut scratch.scores;
    for (t, s) in scores.iter_mut().enumerate().take(n) {
        *s = dot(v, &output[t * dim..(t + 1) * dim]);
    }
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = scores.iter().map(|s| (s - max).exp()).sum();
    let acc = &mut scratch.grad_center;
    acc.iter_mut().for_each(|x| *x = 0.0);
    for t in 0..n {
        let p = (scores[t] - max).exp() / z;
        let g = (if t == context { 1.0 } else { 0.0 } - p) * lr;
        let u = &mut output[t * dim..(t + 1) * dim];
        for k in 0..dim {
            acc[k] += g * u[k];
            u[k] += g * v[k];
        }
    }
    let v = &mut input[center * dim..(center + 1) * dim];
    for k in 0..dim {
        v[k] += acc[k];
    }
}

/// Loss and gradients of one skip-gram training example.
#[derive(Debug, Clone, PartialEq)]
pub struct SkipGramGradient {
    pub loss: f64,
    pub center: Vec<f64>,
    pub context: Vec<f64>,
    /// One gradient per negative / per output row, in input order.
    pub others: Vec<Vec<f64>>,
}

/// Negative-sampling loss
/// `-log σ(u_o·v) - Σ_k log σ(-u_k·v)` and its gradient with respect to the
/// center vector `v`, the context vector `u_o` and each negative `u_k`.
pub fn sgns_loss_and_grad(center: &[f64], context: &[f64], negatives: &[&[f64]]) -> SkipGramGradient {
    let s = dot(center, context);
    let mut loss = -sigmoid(s).ln();
    let g_ctx = sigmoid(s) - 1.0;
    let mut d_center: Vec<f64> = context.iter().map(|u| g_ctx * u).collect();
    let d_context: Vec<f64> = center.iter().map(|v| g_ctx * v).collect();
    let mut others = Vec::with_capacity(negatives.len());
    for &neg in negatives {
        let s = dot(center, neg);
        loss -= sigmoid(-s).ln();
        let g = sigmoid(s);
        for (d, u) in d_center.iter_mut().zip(neg) {
            *d += g * u;
        }
        others.push(center.iter().map(|v| g * v).collect());
    }
    SkipGramGradient {
        loss,
        center: d_center,
        context: d_context,
        others,
    }
}

/// Full-softmax loss `-log softmax(U v)[context]` over all `outputs` and its
/// gradients. `context` field holds the gradient of `outputs[context]`,
/// `others` the gradients of every output row.
pub fn softmax_loss_and_grad(center: &[f64], outputs: &[&[f64]], context: usize) -> SkipGramGradient {
    let scores: Vec<f64> = outputs.iter().map(|u| dot(center, u)).collect();
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = scores.iter().map(|s| (s - max).exp()).sum();
    let loss = -(scores[context] - max - z.ln());
    let mut d_center = vec![0.0; center.len()];
    let mut others = Vec::with_capacity(outputs.len());
    for (t, u) in outputs.iter().enumerate() {
        let g = (scores[t] - max).exp() / z - if t == context { 1.0 } else { 0.0 };
        for (d, x) in d_center.iter_mut().zip(u.iter()) {
            *d += g * x;
        }
        others.push(center.iter().map(|v| g * v).collect::<Vec<_>>());
    }
    SkipGramGradient {
        loss,
        center: d_center,
        context: others[context].clone(),
        others,
    }
}
