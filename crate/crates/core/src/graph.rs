//! Undirected, unweighted graphs and edge-flip perturbations.
//!
//! Node ids are dense integers `0..n`. Every unordered pair is stored in
//! canonical `(min, max)` order; all public entry points normalize their input.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use num_bigint::BigUint;
use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Canonical unordered node pair, `0 <= u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Pair(pub usize, pub usize);

impl Pair {
    /// Normalizes the order of the endpoints. Panics on a self-loop.
    pub fn new(u: usize, v: usize) -> Self {
        assert_ne!(u, v, "self-loop ({u}, {u})");
        if u < v {
            Pair(u, v)
        } else {
            Pair(v, u)
        }
    }

    pub fn try_new(u: usize, v: usize) -> Result<Self> {
        if u == v {
            Err(Error::validation(format!("self-loop ({u}, {v})")))
        } else {
            Ok(Pair::new(u, v))
        }
    }

    pub fn lo(self) -> usize {
        self.0
    }

    pub fn hi(self) -> usize {
        self.1
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.0, self.1)
    }
}

impl From<(usize, usize)> for Pair {
    fn from((u, v): (usize, usize)) -> Self {
        Pair::new(u, v)
    }
}

/// Number of unordered pairs over `n` nodes.
pub fn pair_count(n: usize) -> u64 {
    let n = n as u64;
    n * n.saturating_sub(1) / 2
}

/// Immutable undirected graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: BTreeSet<Pair>,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    /// Graph over `n` nodes. Duplicate pairs collapse; self-loops and ids
    /// outside `0..n` are rejected.
    pub fn new<I, P>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = P>,
        P: Into<(usize, usize)>,
    {
        let mut set = BTreeSet::new();
        for p in edges {
            let (u, v) = p.into();
            if u >= n || v >= n {
                return Err(Error::validation(format!(
                    "edge ({u}, {v}) out of range for {n} nodes"
                )));
            }
            set.insert(Pair::try_new(u, v)?);
        }
        Ok(Self::from_canonical(n, set))
    }

    pub fn empty(n: usize) -> Self {
        Self::from_canonical(n, BTreeSet::new())
    }

    fn from_canonical(n: usize, edges: BTreeSet<Pair>) -> Self {
        let mut adjacency = vec![Vec::new(); n];
        for &Pair(u, v) in &edges {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Graph {
            n,
            edges,
            adjacency,
        }
    }

    /// Parse a whitespace-separated edge list. Blank lines and `#` comments
    /// are skipped; the node count is one past the largest id seen.
    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        let mut max_id: Option<usize> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut tokens = line.split_whitespace();
            let (Some(a), Some(b), None) = (tokens.next(), tokens.next(), tokens.next()) else {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected two node ids, got `{line}`"),
                });
            };
            let parse = |tok: &str| {
                tok.parse::<usize>().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("invalid node id `{tok}`"),
                })
            };
            let (u, v) = (parse(a)?, parse(b)?);
            if u == v {
                return Err(Error::validation(format!(
                    "line {line_no}: self-loop on node {u}"
                )));
            }
            max_id = Some(max_id.map_or(u.max(v), |m| m.max(u).max(v)));
            pairs.push(Pair::new(u, v));
        }
        let n = max_id.map_or(0, |m| m + 1);
        Ok(Self::from_canonical(n, pairs.into_iter().collect()))
    }

    /// Edge list in the same format `from_edge_list` reads.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for Pair(u, v) in &self.edges {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// `|Ē|`, the number of unordered non-adjacent pairs.
    pub fn non_edge_count(&self) -> u64 {
        pair_count(self.n) - self.edges.len() as u64
    }

    pub fn edges(&self) -> impl ExactSizeIterator<Item = Pair> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u != v && self.edges.contains(&Pair::new(u, v))
    }

    pub fn contains(&self, p: Pair) -> bool {
        self.edges.contains(&p)
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adjacency[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adjacency[u].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    /// Confirms the adjacency lists describe exactly the edge set.
    pub fn check_consistency(&self) -> Result<()> {
        let mut seen = 0usize;
        for (u, list) in self.adjacency.iter().enumerate() {
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::validation(format!("adjacency of {u} not strictly sorted")));
            }
            for &v in list {
                if u == v || !self.edges.contains(&Pair::new(u, v)) {
                    return Err(Error::validation(format!("({u}, {v}) in adjacency but not in edges")));
                }
                if self.adjacency[v].binary_search(&u).is_err() {
                    return Err(Error::validation(format!("asymmetric adjacency ({u}, {v})")));
                }
                seen += 1;
            }
        }
        if seen != 2 * self.edges.len() {
            return Err(Error::validation("edge set larger than adjacency"));
        }
        Ok(())
    }

    fn check_pair(&self, p: Pair) -> Result<()> {
        if p.1 >= self.n {
            return Err(Error::validation(format!(
                "pair {p} out of range for {} nodes",
                self.n
            )));
        }
        Ok(())
    }

    /// Edge set `(E ∪ additions) \ deletions`. The perturbation must be valid
    /// for this graph.
    pub fn apply(&self, p: &Perturbation) -> Result<Graph> {
        p.validate(self)?;
        let mut edges = self.edges.clone();
        edges.extend(p.additions.iter().copied());
        for d in &p.deletions {
            edges.remove(d);
        }
        Ok(Self::from_canonical(self.n, edges))
    }

    /// All non-edges in canonical order.
    pub fn non_edges(&self) -> Vec<Pair> {
        let mut out = Vec::with_capacity(self.non_edge_count() as usize);
        for u in 0..self.n {
            let mut nbrs = self.adjacency[u].iter().peekable();
            for v in u + 1..self.n {
                while nbrs.next_if(|&&w| w < v).is_some() {}
                if nbrs.peek() == Some(&&v) {
                    continue;
                }
                out.push(Pair(u, v));
            }
        }
        out
    }

    /// `count` distinct non-edges, uniformly without replacement.
    pub fn sample_non_edges<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Result<Vec<Pair>> {
        let available = self.non_edge_count();
        if count as u64 > available {
            return Err(Error::Capacity {
                requested: count as u64,
                available,
            });
        }
        if pair_count(self.n) <= ENUMERATION_LIMIT || 2 * count as u64 > available {
            let pool = self.non_edges();
            Ok(index::sample(rng, pool.len(), count)
                .into_iter()
                .map(|i| pool[i])
                .collect())
        } else {
            let mut chosen = Vec::with_capacity(count);
            let mut seen = HashSet::with_capacity(count);
            while chosen.len() < count {
                let p = random_pair(self.n, rng);
                if !self.contains(p) && seen.insert(p) {
                    chosen.push(p);
                }
            }
            Ok(chosen)
        }
    }

    /// `count` distinct edges, uniformly without replacement.
    pub fn sample_edges<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Result<Vec<Pair>> {
        if count > self.edges.len() {
            return Err(Error::Capacity {
                requested: count as u64,
                available: self.edges.len() as u64,
            });
        }
        let pool: Vec<Pair> = self.edges().collect();
        Ok(index::sample(rng, pool.len(), count)
            .into_iter()
            .map(|i| pool[i])
            .collect())
    }

    /// Number of rewiring perturbations with `u` additions and `u` deletions:
    /// `C(|E|, u) * C(|Ē|, u)`.
    pub fn search_space_size(&self, u: u64) -> Result<BigUint> {
        let e = self.edges.len() as u64;
        let ne = self.non_edge_count();
        if u > e || u > ne {
            return Err(Error::Domain(format!(
                "u = {u} exceeds min(|E| = {e}, |Ē| = {ne})"
            )));
        }
        Ok(binomial(e, u) * binomial(ne, u))
    }
}

/// Complements up to this many pairs are materialized when sampling.
pub(crate) const ENUMERATION_LIMIT: u64 = 1_000_000;

pub(crate) fn random_pair<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Pair {
    loop {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v {
            return Pair::new(u, v);
        }
    }
}

fn binomial(n: u64, k: u64) -> BigUint {
    let k = k.min(n - k);
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// A set of links to add and a set of links to delete.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Perturbation {
    additions: BTreeSet<Pair>,
    deletions: BTreeSet<Pair>,
}

impl Perturbation {
    pub fn new<A, D>(additions: A, deletions: D) -> Result<Self>
    where
        A: IntoIterator,
        A::Item: Into<(usize, usize)>,
        D: IntoIterator,
        D::Item: Into<(usize, usize)>,
    {
        let collect = |it: Vec<(usize, usize)>| -> Result<BTreeSet<Pair>> {
            it.into_iter().map(|(u, v)| Pair::try_new(u, v)).collect()
        };
        let additions = collect(additions.into_iter().map(Into::into).collect())?;
        let deletions = collect(deletions.into_iter().map(Into::into).collect())?;
        if let Some(p) = additions.intersection(&deletions).next() {
            return Err(Error::validation(format!("{p} both added and deleted")));
        }
        Ok(Perturbation {
            additions,
            deletions,
        })
    }

    pub(crate) fn from_sets(additions: BTreeSet<Pair>, deletions: BTreeSet<Pair>) -> Self {
        debug_assert!(additions.is_disjoint(&deletions));
        Perturbation {
            additions,
            deletions,
        }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn additions(&self) -> &BTreeSet<Pair> {
        &self.additions
    }

    pub fn deletions(&self) -> &BTreeSet<Pair> {
        &self.deletions
    }

    pub fn is_empty(&self) -> bool {
        self.additions.is_empty() && self.deletions.is_empty()
    }

    /// Total number of flipped links.
    pub fn len(&self) -> usize {
        self.additions.len() + self.deletions.len()
    }

    /// The perturbation that undoes this one.
    pub fn inverse(&self) -> Self {
        Perturbation {
            additions: self.deletions.clone(),
            deletions: self.additions.clone(),
        }
    }

    /// Additions must be non-edges of `g`, deletions edges of `g`.
    pub fn validate(&self, g: &Graph) -> Result<()> {
        for &p in &self.additions {
            g.check_pair(p)?;
            if g.contains(p) {
                return Err(Error::validation(format!("addition {p} is already an edge")));
            }
        }
        for &p in &self.deletions {
            g.check_pair(p)?;
            if !g.contains(p) {
                return Err(Error::validation(format!("deletion {p} is not an edge")));
            }
        }
        Ok(())
    }

    /// Line format: `add u v` / `del u v`, additions first, each block sorted.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for Pair(u, v) in &self.additions {
            out.push_str(&format!("add {u} {v}\n"));
        }
        for Pair(u, v) in &self.deletions {
            out.push_str(&format!("del {u} {v}\n"));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut adds = Vec::new();
        let mut dels = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = || Error::Parse {
                line: idx + 1,
                message: format!("expected `add|del u v`, got `{line}`"),
            };
            let tokens: Vec<&str> = line.split_whitespace().collect();
            let [kind, u, v] = tokens[..] else {
                return Err(bad());
            };
            let u: usize = u.parse().map_err(|_| bad())?;
            let v: usize = v.parse().map_err(|_| bad())?;
            match kind {
                "add" => adds.push((u, v)),
                "del" => dels.push((u, v)),
                _ => return Err(bad()),
            }
        }
        Perturbation::new(adds, dels)
    }
}

/// Remaps arbitrary string node names to dense ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NodeNames {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl NodeNames {
    pub fn id_or_insert(&mut self, name: &str) -> usize {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = self.names.len();
        self.names.push(name.to_owned());
        self.index.insert(name.to_owned(), id);
        id
    }

    pub fn id(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: usize) -> &str {
        &self.names[id]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// `id name` per line, in id order.
    pub fn to_text(&self) -> String {
        self.names
            .iter()
            .enumerate()
            .map(|(i, n)| format!("{i} {n}\n"))
            .collect()
    }
}

/// Edge list whose endpoints are arbitrary tokens (e.g. character names).
/// Ids are assigned in order of first appearance. Comma-separated files with
/// extra columns (weights) are accepted; only the first two fields are used.
pub fn load_named_edge_list(text: &str) -> Result<(Graph, NodeNames)> {
    let mut names = NodeNames::default();
    let mut pairs = BTreeSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty());
        let (Some(a), Some(b)) = (fields.next(), fields.next()) else {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("expected two endpoints, got `{line}`"),
            });
        };
        if pairs.is_empty()
            && names.is_empty()
            && a.eq_ignore_ascii_case("source")
            && b.eq_ignore_ascii_case("target")
        {
            continue;
        }
        let (u, v) = (names.id_or_insert(a), names.id_or_insert(b));
        if u == v {
            return Err(Error::validation(format!("line {}: self-loop on `{a}`", idx + 1)));
        }
        pairs.insert(Pair::new(u, v));
    }
    Ok((Graph::from_canonical(names.len(), pairs), names))
}

/// Sampling pool over non-edges that avoids materializing huge complements.
#[derive(Debug, Clone)]
pub(crate) enum NonEdgePool {
    Enumerated(Vec<Pair>),
    Rejection { n: usize, available: u64 },
}

impl NonEdgePool {
    pub(crate) fn new(g: &Graph) -> Self {
        if pair_count(g.node_count()) <= ENUMERATION_LIMIT {
            NonEdgePool::Enumerated(g.non_edges())
        } else {
            NonEdgePool::Rejection {
                n: g.node_count(),
                available: g.non_edge_count(),
            }
        }
    }

    pub(crate) fn len(&self) -> u64 {
        match self {
            NonEdgePool::Enumerated(v) => v.len() as u64,
            NonEdgePool::Rejection { available, .. } => *available,
        }
    }

    pub(crate) fn draw<R: Rng + ?Sized>(&self, g: &Graph, rng: &mut R) -> Pair {
        match self {
            NonEdgePool::Enumerated(v) => v[rng.gen_range(0..v.len())],
            NonEdgePool::Rejection { n, .. } => loop {
                let p = random_pair(*n, rng);
                if !g.contains(p) {
                    return p;
                }
            },
        }
    }
}
