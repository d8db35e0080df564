use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::{load_named_edge_list, Graph, NodeNames};
use crate::partition::Partition;

const KARATE_EDGES: &str = include_str!("../../data/karate.edges");
const KARATE_LABELS: &str = include_str!("../../data/karate.labels");
const KARATE_FACTIONS: &str = include_str!("../../data/karate_faction.labels");

/// Names accepted by [`Dataset::builtin`].
pub const BUILTIN_DATASETS: [&str; 2] = ["karate", "karate_factions"];

/// A graph, optionally with ground-truth classes and node names.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub name: String,
    pub graph: Graph,
    pub labels: Option<Partition>,
    /// Label token of each class id in `labels`.
    pub class_names: Vec<String>,
    pub node_names: Option<NodeNames>,
}

impl Dataset {
    /// Zachary's karate club with a four-community ground truth.
    pub fn karate() -> Self {
        Self::bundled("karate", KARATE_LABELS)
    }

    /// Karate club labelled by the two factions of the split.
    pub fn karate_factions() -> Self {
        Self::bundled("karate_factions", KARATE_FACTIONS)
    }

    fn bundled(name: &str, labels: &str) -> Self {
        let graph = Graph::from_edge_list(KARATE_EDGES).expect("bundled edge list parses");
        let (labels, class_names) =
            Partition::from_label_text_named(labels, graph.node_count()).expect("bundled labels parse");
        Dataset {
            name: name.to_owned(),
            graph,
            labels: Some(labels),
            class_names,
            node_names: None,
        }
    }

    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "karate" => Some(Self::karate()),
            "karate_factions" => Some(Self::karate_factions()),
            _ => None,
        }
    }

    pub fn require_labels(&self) -> Result<&Partition> {
        self.labels
            .as_ref()
            .ok_or_else(|| Error::validation(format!("dataset `{}` has no ground-truth labels", self.name)))
    }

    /// Class token of every node, when labels are known.
    pub fn node_label_names(&self) -> Option<Vec<String>> {
        let labels = self.labels.as_ref()?;
        Some(labels.assignment().iter().map(|&c| self.class_names[c].clone()).collect())
    }
}

/// Where a dataset comes from: a bundled name, or files on disk.
///
/// Numeric edge lists hold 0-based `u v` lines. With `named = true` the
/// endpoints are arbitrary tokens (comma or whitespace separated, optional
/// `Source,Target` header) and the label file uses the same tokens.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<PathBuf>,
    /// Hex SHA-256 the edge file must match.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges_sha256: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels_sha256: Option<String>,
    #[serde(default)]
    pub named: bool,
}

impl DatasetSpec {
    pub fn builtin(name: &str) -> Self {
        DatasetSpec {
            name: name.to_owned(),
            ..Default::default()
        }
    }

    /// Rewrite relative file paths against `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        for p in [&mut self.edges, &mut self.labels].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }

    pub fn load(&self) -> Result<Dataset> {
        let Some(edges_path) = &self.edges else {
            return Dataset::builtin(&self.name).ok_or_else(|| {
                Error::validation(format!(
                    "`{}` is not bundled (have {}); give an edge file",
                    self.name,
                    BUILTIN_DATASETS.join(", ")
                ))
            });
        };
        let edges = read_checked(edges_path, self.edges_sha256.as_deref())?;
        let with_path = |e: Error| Error::Format {
            path: edges_path.clone(),
            message: e.to_string(),
        };
        let (graph, node_names) = if self.named {
            let (g, names) = load_named_edge_list(&edges).map_err(with_path)?;
            (g, Some(names))
        } else {
            (Graph::from_edge_list(&edges).map_err(with_path)?, None)
        };
        let (labels, class_names) = match &self.labels {
            None => (None, Vec::new()),
            Some(path) => {
                let text = read_checked(path, self.labels_sha256.as_deref())?;
                let text = match &node_names {
                    Some(names) => rename_label_nodes(&text, names),
                    None => Ok(text),
                };
                let (p, names) = text
                    .and_then(|t| Partition::from_label_text_named(&t, graph.node_count()))
                    .map_err(|e| Error::Format {
                        path: path.clone(),
                        message: e.to_string(),
                    })?;
                (Some(p), names)
            }
        };
        Ok(Dataset {
            name: self.name.clone(),
            graph,
            labels,
            class_names,
            node_names,
        })
    }
}

fn read_checked(path: &Path, sha256: Option<&str>) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if let Some(expected) = sha256 {
        let got = hex_digest(&bytes);
        if !got.eq_ignore_ascii_case(expected.trim()) {
            return Err(Error::Format {
                path: path.to_owned(),
                message: format!("sha256 {got} does not match expected {expected}"),
            });
        }
    }
    String::from_utf8(bytes).map_err(|e| Error::Format {
        path: path.to_owned(),
        message: e.to_string(),
    })
}

pub fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Map `name label` lines onto `id label` lines.
fn rename_label_nodes(text: &str, names: &NodeNames) -> Result<String> {
    let mut out = String::with_capacity(text.len());
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty());
        let (Some(node), Some(label)) = (fields.next(), fields.next()) else {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("expected `node label`, got `{line}`"),
            });
        };
        let Some(id) = names.id(node) else {
            if idx == 0 {
                // header row such as `Id,Label`
                continue;
            }
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("unknown node `{node}`"),
            });
        };
        out.push_str(&format!("{id} {label}\n"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn karate_shape() {
        let d = Dataset::karate();
        assert_eq!((d.graph.node_count(), d.graph.edge_count()), (34, 78));
        assert_eq!(d.labels.as_ref().unwrap().num_blocks(), 4);
        assert_eq!(Dataset::karate_factions().labels.unwrap().num_blocks(), 2);
        assert_eq!(d.node_label_names().unwrap()[0], "c0");
    }

    #[test]
    fn unknown_builtin_is_an_error() {
        assert!(DatasetSpec::builtin("dolphins").load().is_err());
    }

    #[test]
    fn named_files_with_checksum() {
        let dir = tempfile::tempdir().unwrap();
        let edges = dir.path().join("e.csv");
        let labels = dir.path().join("l.csv");
        fs::write(&edges, "Source,Target\nArya,Sansa\nSansa,Jon\n").unwrap();
        fs::write(&labels, "Id,Label\nArya,stark\nSansa,stark\nJon,watch\n").unwrap();
        let mut spec = DatasetSpec {
            name: "got".into(),
            edges: Some("e.csv".into()),
            labels: Some("l.csv".into()),
            named: true,
            ..Default::default()
        };
        spec.resolve_paths(dir.path());
        let d = spec.load().unwrap();
        assert_eq!(d.graph.edge_count(), 2);
        assert_eq!(d.node_label_names().unwrap(), vec!["stark", "stark", "watch"]);

        spec.edges_sha256 = Some(hex_digest(b"something else"));
        assert!(matches!(spec.load(), Err(Error::Format { .. })));
    }
}
