//! Brute-force ground truth on small graphs.
//!
//! Every completion of a pinned configuration is visited once in Gray-code
//! order. Each visit records the integer triple `(m₊, m₋, n₊)` in a histogram,
//! so a single enumeration serves the partition function at any parameters as
//! well as the coefficients of `Z` as a polynomial in `λ`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, PinnedConfig, Spin};
use crate::params::{cx, Params};

pub const DEFAULT_MAX_FREE: usize = 22;

/// Environment variable read by the command line to override the free-vertex cap.
pub const MAX_FREE_ENV: &str = "SPIN2_MAX_FREE";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExactError {
    #[error("instance too large: {free} free vertices exceeds the cap of {cap}")]
    TooLarge { free: usize, cap: usize },
    #[error("vertex {0} is pinned")]
    VertexPinned(usize),
    #[error("vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("conditional partition function with v pinned to - is zero")]
    DenominatorZero,
    #[error("marginal ratio equals -1, so the marginal probability is undefined")]
    RatioMinusOne,
}

/// Counts of completions by `(n₊, m₊, m₋)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightHistogram {
    n: usize,
    edges: usize,
    counts: Vec<u64>,
}

impl WeightHistogram {
    fn index(&self, n_plus: usize, m_plus: usize, m_minus: usize) -> usize {
        let e = self.edges + 1;
        (n_plus * e + m_plus) * e + m_minus
    }

    pub fn count(&self, n_plus: usize, m_plus: usize, m_minus: usize) -> u64 {
        self.counts[self.index(n_plus, m_plus, m_minus)]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Coefficients `a_0..a_n` of `Z` as a polynomial in `λ`.
    pub fn lambda_coeffs(&self, beta: Complex64, gamma: Complex64) -> PolyCoeffs {
        let bp = powers(beta, self.edges);
        let gp = powers(gamma, self.edges);
        let coeffs = (0..=self.n)
            .map(|j| {
                let mut acc = Complex64::new(0.0, 0.0);
                for mp in 0..=self.edges {
                    for mm in 0..=self.edges - mp {
                        let c = self.count(j, mp, mm);
                        if c != 0 {
                            acc += bp[mp] * gp[mm] * c as f64;
                        }
                    }
                }
                acc
            })
            .collect();
        PolyCoeffs { coeffs }
    }

    pub fn partition(&self, p: &Params) -> Complex64 {
        self.lambda_coeffs(p.beta, p.gamma).eval(p.lambda)
    }
}

fn powers(z: Complex64, k: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(k + 1);
    let mut acc = Complex64::new(1.0, 0.0);
    for _ in 0..=k {
        out.push(acc);
        acc *= z;
    }
    out
}

/// Coefficients `a_0..a_n`, index `j` multiplying `λ^j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyCoeffs {
    #[serde(with = "cx::vec")]
    pub coeffs: Vec<Complex64>,
}

impl PolyCoeffs {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        PolyCoeffs { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        PolyCoeffs::new(coeffs.iter().map(|&c| c.into()).collect())
    }

    /// Horner evaluation.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn degree_bound(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }
}

/// Marginal ratio kept as the pair `(Z⁺, Z⁻)` until a caller divides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginalRatio {
    #[serde(with = "cx")]
    pub plus: Complex64,
    #[serde(with = "cx")]
    pub minus: Complex64,
}

impl MarginalRatio {
    pub fn ratio(&self) -> Result<Complex64, ExactError> {
        if self.minus == Complex64::new(0.0, 0.0) {
            return Err(ExactError::DenominatorZero);
        }
        Ok(self.plus / self.minus)
    }

    /// `p_v = R / (1 + R) = Z⁺ / (Z⁺ + Z⁻)`.
    pub fn probability(&self) -> Result<Complex64, ExactError> {
        self.ratio()?;
        let total = self.plus + self.minus;
        if total == Complex64::new(0.0, 0.0) {
            return Err(ExactError::RatioMinusOne);
        }
        Ok(self.plus / total)
    }
}

/// Brute-force evaluator with a cap on the number of free vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactOracle {
    pub max_free: usize,
}

impl Default for ExactOracle {
    fn default() -> Self {
        ExactOracle { max_free: DEFAULT_MAX_FREE }
    }
}

impl ExactOracle {
    pub fn new(max_free: usize) -> Self {
        ExactOracle { max_free }
    }

    /// Reads the cap from `SPIN2_MAX_FREE`, falling back to the default.
    pub fn from_env() -> Self {
        let max_free = std::env::var(MAX_FREE_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(DEFAULT_MAX_FREE);
        ExactOracle { max_free }
    }

    pub fn histogram(&self, g: &Graph, cfg: &PinnedConfig) -> Result<WeightHistogram, ExactError> {
        if let Some(v) = cfg.max_vertex().filter(|&v| v >= g.n()) {
            return Err(ExactError::VertexOutOfRange { vertex: v, n: g.n() });
        }
        let free: Vec<usize> = (0..g.n()).filter(|&v| !cfg.is_pinned(v)).collect();
        if free.len() > self.max_free || g.n() > 64 {
            return Err(ExactError::TooLarge { free: free.len(), cap: self.max_free.min(64) });
        }

        let nbr = g.neighbor_masks();
        let mut plus: u64 = cfg.iter().filter(|&(_, s)| s == Spin::Plus).fold(0, |m, (v, _)| m | (1 << v));
        let all: u64 = if g.n() == 64 { u64::MAX } else { (1u64 << g.n()) - 1 };

        let mut m_plus = 0usize;
        let mut m_minus = 0usize;
        for &(u, v) in g.edges() {
            match ((plus >> u) & 1, (plus >> v) & 1) {
                (1, 1) => m_plus += 1,
                (0, 0) => m_minus += 1,
                _ => {}
            }
        }
        let mut n_plus = plus.count_ones() as usize;

        let mut hist = WeightHistogram {
            n: g.n(),
            edges: g.edge_count(),
            counts: vec![0; (g.n() + 1) * (g.edge_count() + 1).pow(2)],
        };
        let idx = hist.index(n_plus, m_plus, m_minus);
        hist.counts[idx] += 1;

        for step in 1u64..(1u64 << free.len()) {
            let v = free[step.trailing_zeros() as usize];
            let bit = 1u64 << v;
            let plus_nbrs = (nbr[v] & plus).count_ones() as usize;
            let minus_nbrs = (nbr[v] & !plus & all).count_ones() as usize;
            if plus & bit == 0 {
                m_plus += plus_nbrs;
                m_minus -= minus_nbrs;
                n_plus += 1;
            } else {
                m_plus -= plus_nbrs;
                m_minus += minus_nbrs;
                n_plus -= 1;
            }
            plus ^= bit;
            let idx = hist.index(n_plus, m_plus, m_minus);
            hist.counts[idx] += 1;
        }
        Ok(hist)
    }

    pub fn partition(&self, g: &Graph, p: &Params, cfg: &PinnedConfig) -> Result<Complex64, ExactError> {
        Ok(self.histogram(g, cfg)?.partition(p))
    }

    pub fn marginal_ratio(&self, g: &Graph, v: usize, cfg: &PinnedConfig, p: &Params) -> Result<MarginalRatio, ExactError> {
        if v >= g.n() {
            return Err(ExactError::VertexOutOfRange { vertex: v, n: g.n() });
        }
        if cfg.is_pinned(v) {
            return Err(ExactError::VertexPinned(v));
        }
        let plus = self.partition(g, p, &cfg.clone().with(v, Spin::Plus))?;
        let minus = self.partition(g, p, &cfg.clone().with(v, Spin::Minus))?;
        Ok(MarginalRatio { plus, minus })
    }

    pub fn lambda_coeffs(&self, g: &Graph, beta: Complex64, gamma: Complex64, cfg: &PinnedConfig) -> Result<PolyCoeffs, ExactError> {
        Ok(self.histogram(g, cfg)?.lambda_coeffs(beta, gamma))
    }
}

/// `Z_G^{σ_Λ}(β, γ, λ)` by enumeration with the default cap.
pub fn partition_exact(g: &Graph, p: &Params, cfg: &PinnedConfig) -> Result<Complex64, ExactError> {
    ExactOracle::default().partition(g, p, cfg)
}

/// `R = Z⁺ / Z⁻` at a free vertex `v`.
pub fn marginal_ratio_exact(g: &Graph, v: usize, cfg: &PinnedConfig, p: &Params) -> Result<Complex64, ExactError> {
    ExactOracle::default().marginal_ratio(g, v, cfg, p)?.ratio()
}

pub fn lambda_coeffs(g: &Graph, beta: Complex64, gamma: Complex64, cfg: &PinnedConfig) -> Result<PolyCoeffs, ExactError> {
    ExactOracle::default().lambda_coeffs(g, beta, gamma, cfg)
}
