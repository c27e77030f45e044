//! Simple undirected graphs, partial spin assignments and the text format
//! used to load them.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::Params;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: self-loop at vertex {vertex}")]
    SelfLoop { line: usize, vertex: usize },
    #[error("line {line}: duplicate edge ({u}, {v})")]
    DuplicateEdge { line: usize, u: usize, v: usize },
    #[error("line {line}: vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { line: usize, vertex: usize, n: usize },
    #[error("line {line}: vertex {vertex} pinned twice")]
    DuplicatePin { line: usize, vertex: usize },
    #[error("missing `n <count>` directive")]
    MissingVertexCount,
}

/// Spin of a single vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Spin {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Spin {
    pub fn flip(self) -> Spin {
        match self {
            Spin::Plus => Spin::Minus,
            Spin::Minus => Spin::Plus,
        }
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Spin::Plus => "+",
            Spin::Minus => "-",
        })
    }
}

impl FromStr for Spin {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "+" => Ok(Spin::Plus),
            "-" => Ok(Spin::Minus),
            other => Err(format!("expected `+` or `-`, found `{other}`")),
        }
    }
}

/// A simple undirected graph on vertices `0..n`.
///
/// Adjacency lists are kept sorted, so every traversal is deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            edges: Vec::new(),
            adjacency: vec![Vec::new(); n],
        }
    }

    /// Builds a graph from an edge list, rejecting self-loops, duplicates and
    /// out-of-range endpoints. Errors carry line 0.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut g = Graph::empty(n);
        for &(u, v) in edges {
            g.try_add_edge(u, v, 0)?;
        }
        Ok(g)
    }

    fn try_add_edge(&mut self, u: usize, v: usize, line: usize) -> Result<(), GraphError> {
        for w in [u, v] {
            if w >= self.n {
                return Err(GraphError::VertexOutOfRange { line, vertex: w, n: self.n });
            }
        }
        if u == v {
            return Err(GraphError::SelfLoop { line, vertex: u });
        }
        if self.has_edge(u, v) {
            return Err(GraphError::DuplicateEdge { line, u, v });
        }
        self.edges.push((u.min(v), u.max(v)));
        for (a, b) in [(u, v), (v, u)] {
            let list = &mut self.adjacency[a];
            let pos = list.partition_point(|&x| x < b);
            list.insert(pos, b);
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && self.adjacency[u].binary_search(&v).is_ok()
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let dist = self.bfs(&[0]);
        dist.iter().all(Option::is_some)
    }

    /// Multi-source BFS distances.
    pub(crate) fn bfs(&self, sources: &[usize]) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        let mut queue = VecDeque::new();
        for &s in sources {
            if s < self.n && dist[s].is_none() {
                dist[s] = Some(0);
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            for &w in &self.adjacency[u] {
                if dist[w].is_none() {
                    dist[w] = Some(du + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Bitmask of neighbours; only valid for graphs with at most 64 vertices.
    pub(crate) fn neighbor_masks(&self) -> Vec<u64> {
        assert!(self.n <= 64, "bitmask enumeration limited to 64 vertices");
        self.adjacency
            .iter()
            .map(|ns| ns.iter().fold(0u64, |m, &w| m | (1u64 << w)))
            .collect()
    }

    /// Renders the graph (and optional pins) in the text format read by
    /// [`parse_graph`].
    pub fn to_text(&self, pins: &PinnedConfig) -> String {
        let mut out = format!("n {}\n", self.n);
        for &(u, v) in &self.edges {
            out.push_str(&format!("e {u} {v}\n"));
        }
        for (v, s) in pins.iter() {
            out.push_str(&format!("pin {v} {s}\n"));
        }
        out
    }
}

/// Partial spin assignment `σ_Λ`. Iteration is in vertex order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PinnedConfig {
    pins: BTreeMap<usize, Spin>,
}

impl PinnedConfig {
    pub fn new() -> Self {
        Self::default()
    }

    /// Pins `v`, returning the previous spin if it was already pinned.
    pub fn pin(&mut self, v: usize, spin: Spin) -> Option<Spin> {
        self.pins.insert(v, spin)
    }

    pub fn with(mut self, v: usize, spin: Spin) -> Self {
        self.pins.insert(v, spin);
        self
    }

    pub fn unpin(&mut self, v: usize) -> Option<Spin> {
        self.pins.remove(&v)
    }

    pub fn get(&self, v: usize) -> Option<Spin> {
        self.pins.get(&v).copied()
    }

    pub fn is_pinned(&self, v: usize) -> bool {
        self.pins.contains_key(&v)
    }

    pub fn len(&self) -> usize {
        self.pins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pins.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Spin)> + '_ {
        self.pins.iter().map(|(&v, &s)| (v, s))
    }

    /// Largest pinned vertex index, if any.
    pub fn max_vertex(&self) -> Option<usize> {
        self.pins.keys().next_back().copied()
    }

    /// Vertices on which the two configurations differ, counting a vertex
    /// pinned in one and free in the other as a difference.
    pub fn differing_set(&self, other: &PinnedConfig) -> BTreeSet<usize> {
        let keys: BTreeSet<usize> = self.pins.keys().chain(other.pins.keys()).copied().collect();
        keys.into_iter().filter(|&v| self.get(v) != other.get(v)).collect()
    }

    /// Parses a comma separated list like `"3:+,4:-"`. Empty input is the
    /// empty configuration.
    pub fn parse_list(text: &str) -> Result<Self, String> {
        let mut cfg = PinnedConfig::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (v, s) = item
                .split_once(':')
                .ok_or_else(|| format!("expected `vertex:spin`, found `{item}`"))?;
            let v: usize = v.trim().parse().map_err(|e| format!("bad vertex `{v}`: {e}"))?;
            let s: Spin = s.trim().parse()?;
            if cfg.pin(v, s).is_some() {
                return Err(format!("vertex {v} pinned twice"));
            }
        }
        Ok(cfg)
    }
}

impl FromIterator<(usize, Spin)> for PinnedConfig {
    fn from_iter<T: IntoIterator<Item = (usize, Spin)>>(iter: T) -> Self {
        PinnedConfig {
            pins: iter.into_iter().collect(),
        }
    }
}

/// Reads the line-oriented graph format:
///
/// ```text
/// # comment
/// n 3
/// e 0 1
/// e 1 2
/// pin 2 -
/// ```
pub fn parse_graph(text: &str) -> Result<(Graph, PinnedConfig), GraphError> {
    let mut graph: Option<Graph> = None;
    let mut pins = PinnedConfig::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let syntax = |msg: &str| GraphError::Syntax { line, msg: msg.to_string() };
        let int = |tok: &str| -> Result<usize, GraphError> {
            tok.parse::<usize>()
                .map_err(|_| GraphError::Syntax { line, msg: format!("expected a nonnegative integer, found `{tok}`") })
        };

        match tokens[0] {
            "n" => {
                if graph.is_some() {
                    return Err(syntax("`n` directive repeated"));
                }
                if tokens.len() != 2 {
                    return Err(syntax("expected `n <count>`"));
                }
                graph = Some(Graph::empty(int(tokens[1])?));
            }
            "e" => {
                let g = graph.as_mut().ok_or_else(|| syntax("`n` must appear before edges"))?;
                if tokens.len() != 3 {
                    return Err(syntax("expected `e <u> <v>`"));
                }
                let (u, v) = (int(tokens[1])?, int(tokens[2])?);
                g.try_add_edge(u, v, line)?;
            }
            "pin" => {
                let g = graph.as_ref().ok_or_else(|| syntax("`n` must appear before pins"))?;
                if tokens.len() != 3 {
                    return Err(syntax("expected `pin <v> <+|->`"));
                }
                let v = int(tokens[1])?;
                if v >= g.n() {
                    return Err(GraphError::VertexOutOfRange { line, vertex: v, n: g.n() });
                }
                let spin: Spin = tokens[2].parse().map_err(|m: String| syntax(&m))?;
                if pins.pin(v, spin).is_some() {
                    return Err(GraphError::DuplicatePin { line, vertex: v });
                }
            }
            other => return Err(syntax(&format!("unknown directive `{other}`"))),
        }
    }

    let graph = graph.ok_or(GraphError::MissingVertexCount)?;
    Ok((graph, pins))
}

/// Whether `cfg` is a feasible configuration for `p`: no `+` pin when
/// `λ = 0`, and no two adjacent `+` pins when `β = 0`.
pub fn is_feasible(g: &Graph, cfg: &PinnedConfig, p: &Params) -> bool {
    let plus = |v: usize| cfg.get(v) == Some(Spin::Plus);
    if p.lambda == num_complex::Complex64::new(0.0, 0.0) && cfg.iter().any(|(_, s)| s == Spin::Plus) {
        return false;
    }
    if p.beta == num_complex::Complex64::new(0.0, 0.0) && g.edges().iter().any(|&(u, v)| plus(u) && plus(v)) {
        return false;
    }
    true
}

/// Shortest-path distance from `v` to the set `targets`; `None` means
/// unreachable (or an empty target set).
pub fn dist_to_set(g: &Graph, v: usize, targets: &BTreeSet<usize>) -> Option<usize> {
    if targets.contains(&v) {
        return Some(0);
    }
    let dist = g.bfs(&[v]);
    targets.iter().filter_map(|&s| dist.get(s).copied().flatten()).min()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_single_edge() {
        let (g, pins) = parse_graph("n 2\ne 0 1").unwrap();
        assert_eq!(g.n(), 2);
        assert_eq!(g.edges(), &[(0, 1)]);
        assert!(pins.is_empty());
    }

    #[test]
    fn parses_pins_and_comments() {
        let (g, pins) = parse_graph("# path\nn 3\ne 0 1 # first\ne 1 2\npin 2 -\n").unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.max_degree(), 2);
        assert_eq!(pins.get(2), Some(Spin::Minus));
        assert_eq!(pins.len(), 1);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(parse_graph("n 2\ne 0 0"), Err(GraphError::SelfLoop { line: 2, vertex: 0 })));
        assert!(matches!(parse_graph("n 2\ne 0 1\ne 1 0"), Err(GraphError::DuplicateEdge { line: 3, .. })));
        assert!(matches!(parse_graph("n 2\ne 0 2"), Err(GraphError::VertexOutOfRange { vertex: 2, .. })));
        assert!(matches!(parse_graph("n 2\npin 0 +\npin 0 -"), Err(GraphError::DuplicatePin { line: 3, .. })));
        assert!(matches!(parse_graph("e 0 1"), Err(GraphError::Syntax { line: 1, .. })));
        assert!(matches!(parse_graph("n 2\nx 1"), Err(GraphError::Syntax { line: 2, .. })));
        assert!(matches!(parse_graph("n 2\npin 0 *"), Err(GraphError::Syntax { line: 2, .. })));
        assert!(matches!(parse_graph("# nothing"), Err(GraphError::MissingVertexCount)));
    }

    #[test]
    fn text_round_trip() {
        let text = "n 4\ne 0 1\ne 2 3\ne 1 2\npin 3 +\n";
        let (g, pins) = parse_graph(text).unwrap();
        let (g2, pins2) = parse_graph(&g.to_text(&pins)).unwrap();
        assert_eq!(g, g2);
        assert_eq!(pins, pins2);
    }

    #[test]
    fn feasibility() {
        let k2 = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let pin0 = PinnedConfig::new().with(0, Spin::Plus);
        assert!(!is_feasible(&k2, &pin0, &Params::real(1.0, 1.0, 0.0)));
        let both = pin0.clone().with(1, Spin::Plus);
        assert!(!is_feasible(&k2, &both, &Params::real(0.0, 1.0, 1.0)));
        assert!(is_feasible(&k2, &both, &Params::real(0.5, 1.0, 1.0)));
        assert!(is_feasible(&k2, &PinnedConfig::new(), &Params::real(0.0, 1.0, 0.0)));
        assert!(is_feasible(&k2, &PinnedConfig::new().with(0, Spin::Minus), &Params::real(0.0, 1.0, 0.0)));
    }

    #[test]
    fn distances() {
        let p3 = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(dist_to_set(&p3, 0, &BTreeSet::from([2])), Some(2));
        assert_eq!(dist_to_set(&p3, 1, &BTreeSet::from([1, 2])), Some(0));
        assert_eq!(dist_to_set(&p3, 0, &BTreeSet::new()), None);
        let two_edges = Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        assert_eq!(dist_to_set(&two_edges, 0, &BTreeSet::from([2])), None);
    }

    #[test]
    fn differing_set_counts_free_versus_pinned() {
        let a = PinnedConfig::new().with(1, Spin::Plus).with(2, Spin::Minus);
        let b = PinnedConfig::new().with(1, Spin::Plus).with(2, Spin::Plus).with(4, Spin::Minus);
        assert_eq!(a.differing_set(&b), BTreeSet::from([2, 4]));
        assert!(a.differing_set(&a).is_empty());
    }

    #[test]
    fn pin_list_parsing() {
        let cfg = PinnedConfig::parse_list("3:+, 4:-").unwrap();
        assert_eq!(cfg.get(3), Some(Spin::Plus));
        assert_eq!(cfg.get(4), Some(Spin::Minus));
        assert!(PinnedConfig::parse_list("").unwrap().is_empty());
        assert!(PinnedConfig::parse_list("3:+,3:-").is_err());
        assert!(PinnedConfig::parse_list("3").is_err());
    }
}
