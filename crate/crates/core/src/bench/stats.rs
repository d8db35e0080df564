use std::ops::AddAssign;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::embed::{Embedder, EmbeddingMatrix};
use crate::error::{Error, Result};
use crate::graph::{Graph, Pair, Perturbation};
use crate::partition::Partition;

/// Flips split by whether their endpoints share a ground-truth community.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlipStats {
    pub added_intra: usize,
    pub added_inter: usize,
    pub deleted_intra: usize,
    pub deleted_inter: usize,
}

impl FlipStats {
    /// Share of additions that join two communities, if any were added.
    pub fn added_inter_share(&self) -> Option<f64> {
        let total = self.added_intra + self.added_inter;
        (total > 0).then(|| self.added_inter as f64 / total as f64)
    }

    /// Share of deletions inside a community, if any were deleted.
    pub fn deleted_intra_share(&self) -> Option<f64> {
        let total = self.deleted_intra + self.deleted_inter;
        (total > 0).then(|| self.deleted_intra as f64 / total as f64)
    }
}

impl AddAssign for FlipStats {
    fn add_assign(&mut self, o: FlipStats) {
        self.added_intra += o.added_intra;
        self.added_inter += o.added_inter;
        self.deleted_intra += o.deleted_intra;
        self.deleted_inter += o.deleted_inter;
    }
}

pub fn flip_statistics(p: &Perturbation, labels: &Partition) -> Result<FlipStats> {
    let intra = |e: &Pair| -> Result<bool> {
        if e.hi() >= labels.len() {
            return Err(Error::validation(format!("flip {e} touches an unlabelled node")));
        }
        Ok(labels.same_block(e.lo(), e.hi()))
    };
    let mut s = FlipStats::default();
    for e in p.additions() {
        if intra(e)? {
            s.added_intra += 1;
        } else {
            s.added_inter += 1;
        }
    }
    for e in p.deletions() {
        if intra(e)? {
            s.deleted_intra += 1;
        } else {
            s.deleted_inter += 1;
        }
    }
    Ok(s)
}

/// Embeds `g` and writes the raw coordinates, one `id v1 .. vd [label]`
/// line per node, for plotting with external tools.
pub fn export_embedding_coordinates<E: Embedder + ?Sized>(
    g: &Graph,
    embedder: &E,
    seed: u64,
    labels: Option<&[String]>,
    path: &Path,
) -> Result<EmbeddingMatrix> {
    if let Some(l) = labels {
        if l.len() != g.node_count() {
            return Err(Error::validation(format!("{} labels for {} nodes", l.len(), g.node_count())));
        }
    }
    let r = embedder.embed(g, seed)?;
    r.write_to(path, labels)?;
    Ok(r)
}
