//! Named families of test graphs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;

/// Largest order accepted by `all-connected`.
pub const ALL_CONNECTED_MAX_N: usize = 10;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CorpusError {
    #[error("unknown corpus selector: {0}")]
    Unknown(String),
    #[error("bad arguments for {name}: {detail}")]
    BadArgs { name: String, detail: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum CorpusSelector {
    /// `P_1 … P_n`.
    Paths(usize),
    /// `C_3 … C_n`.
    Cycles(usize),
    /// `K_{1,1} … K_{1,n}`.
    Stars(usize),
    /// One tree: root of degree `Δ`, other internal nodes with `Δ − 1` children.
    RegularTree { degree: usize, depth: usize },
    Random { max_degree: usize, n: usize, count: usize, seed: u64 },
    /// Connected graphs with `1..=n` vertices and maximum degree at most `Δ`,
    /// one per isomorphism class.
    AllConnected { n: usize, max_degree: usize },
}

impl fmt::Display for CorpusSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            CorpusSelector::Paths(n) => write!(f, "paths({n})"),
            CorpusSelector::Cycles(n) => write!(f, "cycles({n})"),
            CorpusSelector::Stars(n) => write!(f, "stars({n})"),
            CorpusSelector::RegularTree { degree, depth } => write!(f, "regular-trees({degree},{depth})"),
            CorpusSelector::Random { max_degree, n, count, seed } => write!(f, "random({max_degree},{n},{count},{seed})"),
            CorpusSelector::AllConnected { n, max_degree } => write!(f, "all-connected({n},{max_degree})"),
        }
    }
}

impl FromStr for CorpusSelector {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, CorpusError> {
        let s = s.trim();
        let (name, rest) = s.split_once('(').ok_or_else(|| CorpusError::Unknown(s.to_string()))?;
        let inner = rest.strip_suffix(')').ok_or_else(|| CorpusError::Unknown(s.to_string()))?;
        let name = name.trim();
        let bad = |detail: String| CorpusError::BadArgs { name: name.to_string(), detail };
        let args: Vec<u64> = inner
            .split(',')
            .map(|a| a.trim().parse::<u64>().map_err(|e| bad(format!("{a:?}: {e}"))))
            .collect::<Result<_, _>>()?;
        let want = |k: usize| if args.len() == k { Ok(()) } else { Err(bad(format!("expected {k} arguments, got {}", args.len()))) };
        let u = |i: usize| args[i] as usize;
        match name {
            "paths" => want(1).map(|_| CorpusSelector::Paths(u(0))),
            "cycles" => want(1).map(|_| CorpusSelector::Cycles(u(0))),
            "stars" => want(1).map(|_| CorpusSelector::Stars(u(0))),
            "regular-trees" => want(2).map(|_| CorpusSelector::RegularTree { degree: u(0), depth: u(1) }),
            "random" => want(4).map(|_| CorpusSelector::Random { max_degree: u(0), n: u(1), count: u(2), seed: args[3] }),
            "all-connected" => {
                want(2)?;
                if u(0) > ALL_CONNECTED_MAX_N {
                    return Err(bad(format!("n = {} exceeds {ALL_CONNECTED_MAX_N}", u(0))));
                }
                Ok(CorpusSelector::AllConnected { n: u(0), max_degree: u(1) })
            }
            _ => Err(CorpusError::Unknown(s.to_string())),
        }
    }
}

impl TryFrom<String> for CorpusSelector {
    type Error = CorpusError;
    fn try_from(s: String) -> Result<Self, CorpusError> {
        s.parse()
    }
}

impl From<CorpusSelector> for String {
    fn from(c: CorpusSelector) -> String {
        c.to_string()
    }
}

pub fn path(n: usize) -> Graph {
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    Graph::from_edges(n, &edges).expect("path edges are valid")
}

pub fn cycle(n: usize) -> Graph {
    assert!(n >= 3, "cycles need at least 3 vertices");
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    Graph::from_edges(n, &edges).expect("cycle edges are valid")
}

/// `K_{1,k}` with the centre at vertex 0.
pub fn star(k: usize) -> Graph {
    let edges: Vec<_> = (1..=k).map(|i| (0, i)).collect();
    Graph::from_edges(k + 1, &edges).expect("star edges are valid")
}

/// Breadth-first numbered tree, root 0. The leaves are the last
/// `Δ(Δ−1)^{depth−1}` vertices when `depth ≥ 1`.
pub fn regular_tree(degree: usize, depth: usize) -> Graph {
    let mut edges = Vec::new();
    let mut level = vec![0usize];
    let mut n = 1;
    for d in 0..depth {
        let kids = if d == 0 { degree } else { degree.saturating_sub(1) };
        let mut next = Vec::new();
        for &u in &level {
            for _ in 0..kids {
                edges.push((u, n));
                next.push(n);
                n += 1;
            }
        }
        level = next;
    }
    Graph::from_edges(n, &edges).expect("tree edges are valid")
}

/// Random graph on `n` vertices with maximum degree at most `max_degree`:
/// visits all pairs in random order and keeps each with a per-graph
/// probability when both endpoints still have room.
pub fn random_graph(max_degree: usize, n: usize, rng: &mut ChaCha8Rng) -> Graph {
    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    pairs.shuffle(rng);
    let keep: f64 = rng.random_range(0.3..1.0);
    let mut deg = vec![0usize; n];
    let mut edges = Vec::new();
    for (u, v) in pairs {
        if deg[u] < max_degree && deg[v] < max_degree && rng.random_bool(keep) {
            deg[u] += 1;
            deg[v] += 1;
            edges.push((u.min(v), u.max(v)));
        }
    }
    edges.sort_unstable();
    Graph::from_edges(n, &edges).expect("random edges are valid")
}

/// Colour refinement from degrees; colours are ranks of sorted signatures,
/// so they are invariant under relabelling.
fn refined_colours(n: usize, adj: &[Vec<usize>]) -> Vec<usize> {
    let mut colour: Vec<usize> = adj.iter().map(|a| a.len()).collect();
    loop {
        let sigs: Vec<(usize, Vec<usize>)> = (0..n)
            .map(|v| {
                let mut ns: Vec<usize> = adj[v].iter().map(|&w| colour[w]).collect();
                ns.sort_unstable();
                (colour[v], ns)
            })
            .collect();
        let ranks: BTreeMap<&(usize, Vec<usize>), usize> = sigs.iter().collect::<BTreeSet<_>>().into_iter().enumerate().map(|(i, s)| (s, i)).collect();
        let next: Vec<usize> = sigs.iter().map(|s| ranks[s]).collect();
        let classes = |c: &[usize]| c.iter().collect::<BTreeSet<_>>().len();
        if classes(&next) == classes(&colour) {
            return next;
        }
        colour = next;
    }
}

/// Canonical edge list: the lexicographically smallest sorted edge list over
/// relabellings that order vertices by refined colour.
pub fn canonical_form(g: &Graph) -> Vec<(usize, usize)> {
    let n = g.n();
    let adj: Vec<Vec<usize>> = (0..n).map(|v| g.neighbors(v).to_vec()).collect();
    let colour = refined_colours(n, &adj);
    let mut cells: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in 0..n {
        cells.entry(colour[v]).or_default().push(v);
    }
    let cells: Vec<Vec<usize>> = cells.into_values().collect();
    let mut best: Option<Vec<(usize, usize)>> = None;
    let mut order = Vec::with_capacity(n);
    search(&cells, 0, &mut order, g, &mut best);
    best.unwrap_or_default()
}

fn search(cells: &[Vec<usize>], i: usize, order: &mut Vec<usize>, g: &Graph, best: &mut Option<Vec<(usize, usize)>>) {
    if i == cells.len() {
        let mut label = vec![0; order.len()];
        for (pos, &v) in order.iter().enumerate() {
            label[v] = pos;
        }
        let mut e: Vec<(usize, usize)> = g.edges().iter().map(|&(u, v)| (label[u].min(label[v]), label[u].max(label[v]))).collect();
        e.sort_unstable();
        if best.as_ref().is_none_or(|b| e < *b) {
            *best = Some(e);
        }
        return;
    }
    permute(&cells[i], &mut Vec::new(), &mut vec![false; cells[i].len()], &mut |perm| {
        let len = order.len();
        order.extend_from_slice(perm);
        search(cells, i + 1, order, g, best);
        order.truncate(len);
    });
}

fn permute(items: &[usize], cur: &mut Vec<usize>, used: &mut Vec<bool>, f: &mut dyn FnMut(&[usize])) {
    if cur.len() == items.len() {
        f(cur);
        return;
    }
    for j in 0..items.len() {
        if !used[j] {
            used[j] = true;
            cur.push(items[j]);
            permute(items, cur, used, f);
            cur.pop();
            used[j] = false;
        }
    }
}

/// Connected graphs up to isomorphism with `1..=n` vertices and maximum
/// degree at most `max_degree`. Every connected graph has a vertex whose
/// removal leaves it connected, so each order grows from the previous one.
pub fn all_connected(n: usize, max_degree: usize) -> Vec<Graph> {
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut layer: BTreeSet<Vec<(usize, usize)>> = BTreeSet::from([Vec::new()]);
    out.push(Graph::empty(1));
    for k in 1..n {
        let mut next = BTreeSet::new();
        for edges in &layer {
            let mut deg = vec![0usize; k];
            for &(u, v) in edges {
                deg[u] += 1;
                deg[v] += 1;
            }
            let open: Vec<usize> = (0..k).filter(|&v| deg[v] < max_degree).collect();
            for mask in 1u32..(1 << open.len()) {
                if mask.count_ones() as usize > max_degree {
                    continue;
                }
                let mut e = edges.clone();
                e.extend(open.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &v)| (v, k)));
                let g = Graph::from_edges(k + 1, &e).expect("valid edges");
                next.insert(canonical_form(&g));
            }
        }
        out.extend(next.iter().map(|e| Graph::from_edges(k + 1, e).expect("valid edges")));
        layer = next;
    }
    out
}

pub fn corpus(sel: &CorpusSelector) -> Vec<Graph> {
    match *sel {
        CorpusSelector::Paths(n) => (1..=n).map(path).collect(),
        CorpusSelector::Cycles(n) => (3..=n).map(cycle).collect(),
        CorpusSelector::Stars(n) => (1..=n).map(star).collect(),
        CorpusSelector::RegularTree { degree, depth } => vec![regular_tree(degree, depth)],
        CorpusSelector::Random { max_degree, n, count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count).map(|_| random_graph(max_degree, n, &mut rng)).collect()
        }
        CorpusSelector::AllConnected { n, max_degree } => all_connected(n, max_degree),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selectors_round_trip() {
        for s in ["paths(6)", "cycles(5)", "stars(3)", "regular-trees(3,2)", "random(3,8,5,7)", "all-connected(6,3)"] {
            assert_eq!(s.parse::<CorpusSelector>().unwrap().to_string(), s);
        }
        assert!("trees(3)".parse::<CorpusSelector>().is_err());
        assert!("paths(3,4)".parse::<CorpusSelector>().is_err());
        assert!("all-connected(12,3)".parse::<CorpusSelector>().is_err());
    }

    #[test]
    fn family_sizes() {
        let ps = corpus(&"paths(6)".parse().unwrap());
        assert_eq!(ps.iter().map(|g| g.n()).collect::<Vec<_>>(), vec![1, 2, 3, 4, 5, 6]);
        let t = regular_tree(3, 2);
        assert_eq!(t.n(), 10);
        assert_eq!(t.max_degree(), 3);
        let r1 = corpus(&"random(3,8,5,7)".parse().unwrap());
        let r2 = corpus(&"random(3,8,5,7)".parse().unwrap());
        assert_eq!(r1, r2);
        assert_eq!(r1.len(), 5);
        assert!(r1.iter().all(|g| g.n() == 8 && g.max_degree() <= 3));
    }

    #[test]
    fn connected_graph_counts() {
        let count = |n, d| {
            let gs = all_connected(n, d);
            assert!(gs.iter().all(|g| g.is_connected() && g.max_degree() <= d));
            let mut by_n = vec![0; n + 1];
            for g in gs {
                by_n[g.n()] += 1;
            }
            by_n
        };
        // Connected graphs on 1..=6 vertices, and the subcubic ones.
        assert_eq!(count(6, 5), vec![0, 1, 1, 2, 6, 21, 112]);
        assert_eq!(count(7, 3), vec![0, 1, 1, 2, 6, 10, 29, 64]);
    }

    #[test]
    fn canonical_form_is_label_invariant() {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (1, 4)]).unwrap();
        let h = Graph::from_edges(5, &[(4, 3), (3, 2), (2, 0), (3, 1)]).unwrap();
        assert_eq!(canonical_form(&g), canonical_form(&h));
        assert_ne!(canonical_form(&g), canonical_form(&path(5)));
    }
}
