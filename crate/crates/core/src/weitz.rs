//! Weitz's algorithm: ratios on the self-avoiding-walk tree, telescoping
//! for the partition function, and strong-spatial-mixing measurements.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{dist_to_set, is_feasible, Graph, PinnedConfig, Spin};
use crate::params::{cx, Params};
use crate::recursion::{recursion_f, RecursionError, Signature};
use crate::saw::{CycleConvention, Depth, SawChild, SawError, SawWalker};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeitzError {
    #[error(transparent)]
    Saw(#[from] SawError),
    #[error(transparent)]
    Recursion(#[from] RecursionError),
    #[error("gamma is zero")]
    GammaZero,
    #[error("pinned configuration is infeasible for these parameters")]
    Infeasible,
    #[error("ratio at vertex {vertex} is -1")]
    RatioMinusOne { vertex: usize },
    #[error("decay fit needs at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("decay fit needs positive gaps, got {0}")]
    NonPositiveGap(f64),
    #[error("eta must lie in (0, 1], got {0}")]
    BadEta(f64),
}

/// How a ratio is evaluated on the tree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SawOptions {
    pub depth: Depth,
    /// Value taken by free nodes cut off by the depth limit; `None` means `λ`.
    pub boundary: Option<Complex64>,
    pub convention: CycleConvention,
}

impl Default for SawOptions {
    fn default() -> Self {
        SawOptions { depth: Depth::Full, boundary: None, convention: CycleConvention::default() }
    }
}

impl SawOptions {
    pub fn full() -> Self {
        Self::default()
    }

    pub fn limited(depth: usize) -> Self {
        SawOptions { depth: Depth::Limit(depth), ..Self::default() }
    }
}

fn value_at(w: &mut SawWalker, p: &Params, opts: &SawOptions, boundary: Complex64) -> Result<Complex64, WeitzError> {
    if !w.has_children() {
        return Ok(p.lambda);
    }
    if !opts.depth.allows_children_at(w.depth()) {
        return Ok(boundary);
    }
    let mut kids = Vec::new();
    w.children(&mut kids);
    let (mut s1, mut s2) = (0, 0);
    let mut free = Vec::new();
    for c in &kids {
        match *c {
            SawChild::Free(v) => free.push(v),
            SawChild::Pinned { spin: Spin::Plus, .. } => s1 += 1,
            SawChild::Pinned { spin: Spin::Minus, .. } => s2 += 1,
        }
    }
    // A + neighbour forces this node to − in the hard-core-like case.
    if s1 > 0 && p.beta == Complex64::new(0.0, 0.0) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut xs = Vec::with_capacity(free.len());
    for v in free {
        w.push(v);
        let x = value_at(w, p, opts, boundary);
        w.pop();
        xs.push(x?);
    }
    Ok(recursion_f(p, Signature::new(s1, s2, xs.len()), &xs)?)
}

/// `R_{G,v}` under `cfg`, computed by the tree recursion on the
/// self-avoiding-walk tree rooted at `v`.
pub fn saw_ratio(g: &Graph, v: usize, cfg: &PinnedConfig, p: &Params, opts: &SawOptions) -> Result<Complex64, WeitzError> {
    let mut w = SawWalker::new(g, v, cfg, opts.convention)?;
    if p.gamma == Complex64::new(0.0, 0.0) {
        return Err(WeitzError::GammaZero);
    }
    if !is_feasible(g, cfg, p) {
        return Err(WeitzError::Infeasible);
    }
    if p.lambda == Complex64::new(0.0, 0.0) {
        return Ok(p.lambda);
    }
    value_at(&mut w, p, opts, opts.boundary.unwrap_or(p.lambda))
}

/// `p_v = R/(1 + R)`.
pub fn saw_probability(g: &Graph, v: usize, cfg: &PinnedConfig, p: &Params, opts: &SawOptions) -> Result<Complex64, WeitzError> {
    let r = saw_ratio(g, v, cfg, p, opts)?;
    if r == Complex64::new(-1.0, 0.0) {
        return Err(WeitzError::RatioMinusOne { vertex: v });
    }
    Ok(r / (1.0 + r))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeitzResult {
    #[serde(with = "cx")]
    pub estimate: Complex64,
    /// `R_i` for vertex `i` with vertices `0..i` pinned to `−`.
    #[serde(with = "cx::vec")]
    pub ratios: Vec<Complex64>,
    /// `None` for the full tree.
    pub depth: Option<usize>,
    #[serde(with = "cx")]
    pub boundary: Complex64,
}

/// `Z_G = γ^{|E|} Π_i (1 + R_i)`, pinning vertices to `−` in index order.
pub fn weitz_partition(g: &Graph, p: &Params, opts: &SawOptions) -> Result<WeitzResult, WeitzError> {
    if p.gamma == Complex64::new(0.0, 0.0) {
        return Err(WeitzError::GammaZero);
    }
    let depth = match opts.depth {
        Depth::Full => None,
        Depth::Limit(d) => Some(d),
    };
    let boundary = opts.boundary.unwrap_or(p.lambda);
    let base = p.gamma.powu(g.edge_count() as u32);
    let ratios: Vec<Complex64> = (0..g.n())
        .into_par_iter()
        .map(|i| {
            let cfg: PinnedConfig = (0..i).map(|u| (u, Spin::Minus)).collect();
            saw_ratio(g, i, &cfg, p, opts)
        })
        .collect::<Result<_, _>>()?;
    let mut estimate = base;
    for (i, r) in ratios.iter().enumerate() {
        if *r == Complex64::new(-1.0, 0.0) {
            return Err(WeitzError::RatioMinusOne { vertex: i });
        }
        estimate *= 1.0 + r;
    }
    Ok(WeitzResult { estimate, ratios, depth, boundary })
}

/// Truncation depth `⌈log(n/ε) / −log(1 − η)⌉` for a `(1 ± ε)` estimate,
/// at least 1.
pub fn fptas_depth(n: usize, eps: f64, eta: f64) -> Result<usize, WeitzError> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(WeitzError::BadEta(eta));
    }
    let num = (n.max(1) as f64 / eps).ln().max(0.0);
    let den = -(1.0 - eta).ln();
    Ok(((num / den).ceil() as usize).max(1))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SsmSample {
    /// Distance from `v` to the set where the configurations differ;
    /// `None` when they agree.
    pub distance: Option<usize>,
    pub gap: f64,
    #[serde(with = "cx")]
    pub p_sigma: Complex64,
    #[serde(with = "cx")]
    pub p_tau: Complex64,
}

/// `|p_v^σ − p_v^τ|` from full-depth tree recursions, with the distance from
/// `v` to the vertices where `σ` and `τ` differ.
pub fn ssm_probe(g: &Graph, v: usize, sigma: &PinnedConfig, tau: &PinnedConfig, p: &Params, convention: CycleConvention) -> Result<SsmSample, WeitzError> {
    let opts = SawOptions { convention, ..SawOptions::full() };
    let p_sigma = saw_probability(g, v, sigma, p, &opts)?;
    let p_tau = saw_probability(g, v, tau, p, &opts)?;
    let differ = sigma.differing_set(tau);
    Ok(SsmSample { distance: dist_to_set(g, v, &differ), gap: (p_sigma - p_tau).norm(), p_sigma, p_tau })
}

/// [`ssm_probe`] with the sphere at each distance `d ≥ 1` from `v` pinned all
/// `+` against all `−`.
pub fn sphere_gaps(g: &Graph, v: usize, p: &Params, convention: CycleConvention) -> Result<Vec<(usize, SsmSample)>, WeitzError> {
    let dist = g.bfs(&[v]);
    let ecc = dist.iter().flatten().copied().max().unwrap_or(0);
    (1..=ecc)
        .map(|d| {
            let sphere: Vec<usize> = (0..g.n()).filter(|&u| dist[u] == Some(d)).collect();
            let sigma: PinnedConfig = sphere.iter().map(|&u| (u, Spin::Plus)).collect();
            let tau: PinnedConfig = sphere.iter().map(|&u| (u, Spin::Minus)).collect();
            ssm_probe(g, v, &sigma, &tau, p, convention).map(|s| (d, s))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub rate: f64,
    pub r2: f64,
}

/// Least-squares fit of `log gap` against distance; `rate` is minus the slope.
pub fn decay_fit(points: &[(f64, f64)]) -> Result<DecayFit, WeitzError> {
    if points.len() < 3 {
        return Err(WeitzError::TooFewPoints(points.len()));
    }
    if let Some(&(_, g)) = points.iter().find(|(_, g)| !(*g > 0.0)) {
        return Err(WeitzError::NonPositiveGap(g));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1.ln() - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let ss_tot: f64 = points.iter().map(|p| (p.1.ln() - my).powi(2)).sum();
    let ss_res: f64 = points.iter().map(|p| (p.1.ln() - my - slope * (p.0 - mx)).powi(2)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(DecayFit { rate: -slope, r2 })
}
