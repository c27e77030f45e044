//! Self-avoiding-walk trees.
//!
//! The tree rooted at `v` has one node per self-avoiding walk starting at `v`.
//! When a walk `v = w_0, .., w_k` could step back onto an earlier vertex
//! `w_i` (`i < k - 1`), a pinned leaf copy of `w_i` closes the cycle. Its spin
//! depends on the orientation of the cycle at `w_i`: with the default
//! convention it is `+` when the walk left `w_i` towards a lower-indexed
//! vertex than the one it returns from (`w_{i+1} < w_k`), and `-` otherwise.
//! Pinned graph vertices end walks and appear as pinned leaves.
//!
//! [`SawWalker`] exposes the child structure lazily so the recursion never
//! needs a materialised tree; [`build_saw_tree`] materialises it for
//! inspection and small-graph checks.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, PinnedConfig, Spin};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SawError {
    #[error("root vertex {0} is pinned")]
    RootPinned(usize),
    #[error("root vertex {root} out of range for n = {n}")]
    RootOutOfRange { root: usize, n: usize },
}

/// Orientation rule for cycle-closing leaves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CycleConvention {
    /// `+` when `w_{i+1} < w_k`.
    #[default]
    LowToHighPlus,
    /// The mirror rule: `+` when `w_{i+1} > w_k`.
    LowToHighMinus,
}

impl CycleConvention {
    pub fn flipped(self) -> Self {
        match self {
            CycleConvention::LowToHighPlus => CycleConvention::LowToHighMinus,
            CycleConvention::LowToHighMinus => CycleConvention::LowToHighPlus,
        }
    }

    fn closing_spin(self, left_by: usize, returned_from: usize) -> Spin {
        let low_to_high = left_by < returned_from;
        match (self, low_to_high) {
            (CycleConvention::LowToHighPlus, true) | (CycleConvention::LowToHighMinus, false) => Spin::Plus,
            _ => Spin::Minus,
        }
    }
}

/// How far to expand the tree. Depth counts edges from the root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Depth {
    Full,
    Limit(usize),
}

impl Depth {
    pub fn allows_children_at(self, depth: usize) -> bool {
        match self {
            Depth::Full => true,
            Depth::Limit(l) => depth < l,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeStatus {
    Free,
    Pinned(Spin),
}

/// A child of a walk's endpoint, as seen by the recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SawChild {
    /// Extends the walk to a free vertex.
    Free(usize),
    /// A pinned graph vertex, or a cycle-closing copy.
    Pinned { vertex: usize, spin: Spin, closes_cycle: bool },
}

/// Depth-first walker over the self-avoiding walks of a graph.
pub struct SawWalker<'a> {
    graph: &'a Graph,
    pins: &'a PinnedConfig,
    convention: CycleConvention,
    path: Vec<usize>,
    position: Vec<Option<usize>>,
}

impl<'a> SawWalker<'a> {
    pub fn new(graph: &'a Graph, root: usize, pins: &'a PinnedConfig, convention: CycleConvention) -> Result<Self, SawError> {
        if root >= graph.n() {
            return Err(SawError::RootOutOfRange { root, n: graph.n() });
        }
        if pins.is_pinned(root) {
            return Err(SawError::RootPinned(root));
        }
        let mut position = vec![None; graph.n()];
        position[root] = Some(0);
        Ok(SawWalker { graph, pins, convention, path: vec![root], position })
    }

    pub fn graph(&self) -> &Graph {
        self.graph
    }

    /// Current endpoint of the walk.
    pub fn head(&self) -> usize {
        *self.path.last().unwrap()
    }

    /// Number of edges in the current walk.
    pub fn depth(&self) -> usize {
        self.path.len() - 1
    }

    /// Children of the current endpoint, in adjacency order.
    pub fn children(&self, out: &mut Vec<SawChild>) {
        out.clear();
        let head = self.head();
        let parent = self.path.len().checked_sub(2).map(|i| self.path[i]);
        for &w in self.graph.neighbors(head) {
            if Some(w) == parent {
                continue;
            }
            if let Some(i) = self.position[w] {
                let spin = self.convention.closing_spin(self.path[i + 1], head);
                out.push(SawChild::Pinned { vertex: w, spin, closes_cycle: true });
            } else if let Some(spin) = self.pins.get(w) {
                out.push(SawChild::Pinned { vertex: w, spin, closes_cycle: false });
            } else {
                out.push(SawChild::Free(w));
            }
        }
    }

    /// Whether the current endpoint has any child in the full tree.
    pub fn has_children(&self) -> bool {
        let limit = if self.path.len() >= 2 { 1 } else { 0 };
        self.graph.degree(self.head()) > limit
    }

    /// Extends the walk by a free vertex.
    pub fn push(&mut self, v: usize) {
        debug_assert!(self.position[v].is_none());
        self.position[v] = Some(self.path.len());
        self.path.push(v);
    }

    pub fn pop(&mut self) {
        let v = self.path.pop().expect("walk is never empty");
        self.position[v] = None;
        debug_assert!(!self.path.is_empty(), "popped the root");
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SawNode {
    pub vertex: usize,
    pub depth: usize,
    pub status: NodeStatus,
    /// Free node cut off by the depth limit; it takes the boundary value.
    pub truncated: bool,
    /// Pinned leaf that closes a cycle of the graph.
    pub closes_cycle: bool,
    pub children: Vec<usize>,
    pub parent: Option<usize>,
}

/// A materialised self-avoiding-walk tree. Node 0 is the root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SawTree {
    pub nodes: Vec<SawNode>,
}

impl SawTree {
    pub fn root(&self) -> usize {
        0
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn height(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    pub fn max_children(&self) -> usize {
        self.nodes.iter().map(|n| n.children.len()).max().unwrap_or(0)
    }

    /// Depth of the shallowest copy of any vertex in `targets`.
    pub fn dist_to_vertices(&self, targets: &BTreeSet<usize>) -> Option<usize> {
        self.nodes.iter().filter(|n| targets.contains(&n.vertex)).map(|n| n.depth).min()
    }
}

/// Materialises the self-avoiding-walk tree of `g` at `root`.
pub fn build_saw_tree(
    g: &Graph,
    root: usize,
    cfg: &PinnedConfig,
    depth: Depth,
    convention: CycleConvention,
) -> Result<SawTree, SawError> {
    let mut walker = SawWalker::new(g, root, cfg, convention)?;
    let mut nodes = vec![SawNode {
        vertex: root,
        depth: 0,
        status: NodeStatus::Free,
        truncated: false,
        closes_cycle: false,
        children: Vec::new(),
        parent: None,
    }];
    expand(&mut walker, 0, depth, &mut nodes);
    Ok(SawTree { nodes })
}

fn expand(walker: &mut SawWalker<'_>, node: usize, depth: Depth, nodes: &mut Vec<SawNode>) {
    let d = walker.depth();
    if !depth.allows_children_at(d) {
        nodes[node].truncated = walker.has_children();
        return;
    }
    let mut kids = Vec::new();
    walker.children(&mut kids);
    for child in kids {
        let id = nodes.len();
        let (vertex, status, closes_cycle) = match child {
            SawChild::Free(w) => (w, NodeStatus::Free, false),
            SawChild::Pinned { vertex, spin, closes_cycle } => (vertex, NodeStatus::Pinned(spin), closes_cycle),
        };
        nodes.push(SawNode {
            vertex,
            depth: d + 1,
            status,
            truncated: false,
            closes_cycle,
            children: Vec::new(),
            parent: Some(node),
        });
        nodes[node].children.push(id);
        if let SawChild::Free(w) = child {
            walker.push(w);
            expand(walker, id, depth, nodes);
            walker.pop();
        }
    }
}
