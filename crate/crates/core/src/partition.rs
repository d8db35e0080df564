//! Node-to-block assignments, used both for predicted communities and for
//! ground-truth labels.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-node block ids, always compacted to `0..k` in order of first
/// appearance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    assignment: Vec<usize>,
    blocks: usize,
}

/// Ground-truth labels share the representation of predicted partitions.
pub type LabelVector = Partition;

impl Partition {
    /// Build from arbitrary ids; ids are relabelled by first appearance.
    pub fn from_ids<I>(ids: I) -> Self
    where
        I: IntoIterator<Item = usize>,
    {
        let mut remap: HashMap<usize, usize> = HashMap::new();
        let assignment: Vec<usize> = ids
            .into_iter()
            .map(|id| {
                let next = remap.len();
                *remap.entry(id).or_insert(next)
            })
            .collect();
        Partition {
            blocks: remap.len(),
            assignment,
        }
    }

    pub fn singletons(n: usize) -> Self {
        Partition {
            assignment: (0..n).collect(),
            blocks: n,
        }
    }

    /// Parse a `node_id label` file. Labels are arbitrary tokens mapped to
    /// dense class ids in order of first appearance in the file. Every node
    /// in `0..n` must be labelled exactly once.
    pub fn from_label_text(text: &str, n: usize) -> Result<Self> {
        Self::from_label_text_named(text, n).map(|(p, _)| p)
    }

    /// Like [`Partition::from_label_text`], also returning the label token of
    /// every class id.
    pub fn from_label_text_named(text: &str, n: usize) -> Result<(Self, Vec<String>)> {
        let mut names: Vec<String> = Vec::new();
        let mut classes: HashMap<&str, usize> = HashMap::new();
        let mut slots: Vec<Option<usize>> = vec![None; n];
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut tokens = line.split_whitespace();
            let (Some(node), Some(label), None) = (tokens.next(), tokens.next(), tokens.next())
            else {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected `node_id label`, got `{line}`"),
                });
            };
            let node: usize = node.parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("invalid node id `{node}`"),
            })?;
            if node >= n {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("node {node} outside graph of {n} nodes"),
                });
            }
            let next = classes.len();
            let class = *classes.entry(label).or_insert_with(|| {
                names.push(label.to_owned());
                next
            });
            if slots[node].replace(class).is_some() {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("node {node} labelled twice"),
                });
            }
        }
        let assignment = slots
            .into_iter()
            .enumerate()
            .map(|(node, slot)| slot.ok_or_else(|| Error::validation(format!("node {node} has no label"))))
            .collect::<Result<Vec<_>>>()?;
        // class ids follow file order, which need not match node order
        let blocks = classes.len();
        Ok((Partition { assignment, blocks }, names))
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn block_of(&self, node: usize) -> usize {
        self.assignment[node]
    }

    pub fn same_block(&self, u: usize, v: usize) -> bool {
        self.assignment[u] == self.assignment[v]
    }

    /// Node lists per block.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.blocks];
        for (node, &b) in self.assignment.iter().enumerate() {
            out[b].push(node);
        }
        out
    }

    /// True when both partitions group nodes identically, whatever the ids.
    pub fn equivalent(&self, other: &Partition) -> bool {
        if self.len() != other.len() || self.blocks != other.blocks {
            return false;
        }
        let mut fwd = vec![usize::MAX; self.blocks];
        let mut bwd = vec![usize::MAX; other.blocks];
        for (&a, &b) in self.assignment.iter().zip(&other.assignment) {
            if fwd[a] == usize::MAX && bwd[b] == usize::MAX {
                fwd[a] = b;
                bwd[b] = a;
            } else if fwd[a] != b || bwd[b] != a {
                return false;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compacts_ids_by_first_appearance() {
        let p = Partition::from_ids([7, 7, 3, 9, 3]);
        assert_eq!(p.assignment(), &[0, 0, 1, 2, 1]);
        assert_eq!(p.num_blocks(), 3);
    }

    #[test]
    fn label_file_uses_file_order() {
        let p = Partition::from_label_text("# x\n2 b\n0 a\n1 b\n", 3).unwrap();
        assert_eq!(p.assignment(), &[1, 0, 0]);
        assert_eq!(p.num_blocks(), 2);
    }

    #[test]
    fn label_file_errors() {
        assert!(matches!(
            Partition::from_label_text("0 a\n", 2),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            Partition::from_label_text("0 a\n0 b\n", 1),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            Partition::from_label_text("x a\n", 1),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn equivalence_ignores_ids() {
        let a = Partition::from_ids([0, 0, 1, 1]);
        let b = Partition::from_ids([1, 1, 0, 0]);
        let c = Partition::from_ids([0, 1, 0, 1]);
        assert!(a.equivalent(&b));
        assert!(!a.equivalent(&c));
    }
}
