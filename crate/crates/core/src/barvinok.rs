//! Taylor interpolation of `log Z` in `λ` from its low-order coefficients.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{ExactError, ExactOracle};
use crate::graph::{Graph, PinnedConfig};
use crate::params::{cx, Params};
use crate::roots::{poly_roots, RootError};

/// Default cap on the number of subsets visited by [`low_order_coeffs`].
pub const DEFAULT_BUDGET: u64 = 1 << 26;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BarvinokError {
    #[error("coefficients up to order {m} need {needed} subsets, budget is {budget}")]
    Budget { m: usize, needed: u64, budget: u64 },
    #[error("graph has {0} vertices; subset enumeration supports at most 64")]
    TooManyVertices(usize),
    #[error("constant coefficient a0 is zero")]
    A0Zero,
    #[error("ratio |lambda|/R must lie in [0, 1), got {0}")]
    RatioOutOfRange(f64),
    #[error("no zero-free radius supplied and the graph is too large to scan: {0}")]
    RadiusRequired(ExactError),
    #[error("lambda = 0 cannot be inverted")]
    LambdaZero,
    #[error(transparent)]
    Roots(#[from] RootError),
}

/// Where the zero-free radius came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RadiusSource {
    Supplied,
    Scanned,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaylorEstimate {
    pub order: usize,
    #[serde(with = "cx")]
    pub log_z_truncated: Complex64,
    #[serde(with = "cx")]
    pub z_estimate: Complex64,
    /// `+∞` when the polynomial has no roots.
    pub zero_free_radius: f64,
    pub radius_source: RadiusSource,
    /// `+∞` unless `|λ| < R`.
    pub error_bound: f64,
    /// Set when the estimate came from the swapped problem `(γ, β, 1/λ)`.
    pub swapped: bool,
    pub warning: Option<String>,
}

fn binomial(n: usize, k: usize) -> u64 {
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc.saturating_mul((n - i) as u64) / (i as u64 + 1))
}

fn internal_edges(masks: &[u64], s: u64) -> u32 {
    let mut twice = 0;
    let mut rest = s;
    while rest != 0 {
        let v = rest.trailing_zeros() as usize;
        twice += (masks[v] & s).count_ones();
        rest &= rest - 1;
    }
    twice / 2
}

/// `a_j = Σ_{|S| = j} β^{e(S)} γ^{e(V∖S)}` for `j = 0..=m` (capped at `n`).
pub fn low_order_coeffs(g: &Graph, beta: Complex64, gamma: Complex64, m: usize, budget: u64) -> Result<Vec<Complex64>, BarvinokError> {
    let n = g.n();
    if n > 64 {
        return Err(BarvinokError::TooManyVertices(n));
    }
    let top = m.min(n);
    let needed = (0..=top).fold(0u64, |acc, j| acc.saturating_add(binomial(n, j)));
    if needed > budget {
        return Err(BarvinokError::Budget { m, needed, budget });
    }
    let masks = g.neighbor_masks();
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut out: Vec<Complex64> = (0..=top)
        .into_par_iter()
        .map(|j| {
            let mut a = Complex64::new(0.0, 0.0);
            if j == 0 {
                return gamma.powu(g.edge_count() as u32);
            }
            let mut s: u64 = if j == 64 { u64::MAX } else { (1u64 << j) - 1 };
            loop {
                a += beta.powu(internal_edges(&masks, s)) * gamma.powu(internal_edges(&masks, all & !s));
                // Gosper's hack: next subset with the same popcount.
                let c = s & s.wrapping_neg();
                let r = s.wrapping_add(c);
                if r == 0 || r > all {
                    break;
                }
                s = (((r ^ s) >> 2) / c) | r;
                if s > all {
                    break;
                }
            }
            a
        })
        .collect();
    out.resize(m + 1, Complex64::new(0.0, 0.0));
    Ok(out)
}

/// Power sums `s_k = Σ_i ζ_i^{−k}` of the inverse roots, `k = 1..=m` where
/// `m = a.len() − 1`, from the recurrence `k a_k = −Σ_{j=1}^{k} s_j a_{k−j}`.
pub fn inverse_power_sums(a: &[Complex64]) -> Result<Vec<Complex64>, BarvinokError> {
    let a0 = *a.first().ok_or(BarvinokError::A0Zero)?;
    if a0 == Complex64::new(0.0, 0.0) {
        return Err(BarvinokError::A0Zero);
    }
    let mut s: Vec<Complex64> = Vec::with_capacity(a.len().saturating_sub(1));
    for k in 1..a.len() {
        let mut acc = a[k] * k as f64;
        for j in 1..k {
            acc += s[j - 1] * a[k - j];
        }
        s.push(-acc / a0);
    }
    Ok(s)
}

/// `n ρ^{m+1} / ((m+1)(1−ρ))`, or `+∞` when `ρ ≥ 1`.
pub fn error_bound(n: usize, m: usize, ratio: f64) -> f64 {
    if !(ratio < 1.0) {
        return f64::INFINITY;
    }
    n as f64 * ratio.powi(m as i32 + 1) / ((m as f64 + 1.0) * (1.0 - ratio))
}

/// Smallest `m` whose error bound is at most `eps`.
pub fn choose_order(n: usize, eps: f64, ratio: f64) -> Result<usize, BarvinokError> {
    if !(0.0..1.0).contains(&ratio) {
        return Err(BarvinokError::RatioOutOfRange(ratio));
    }
    let mut m = 0;
    while error_bound(n, m, ratio) > eps {
        m += 1;
    }
    Ok(m)
}

/// Smallest root modulus of `Z(λ)` at the given `β, γ`; `+∞` for a constant.
pub fn scanned_radius(g: &Graph, beta: Complex64, gamma: Complex64, oracle: &ExactOracle) -> Result<f64, BarvinokError> {
    let c = oracle.lambda_coeffs(g, beta, gamma, &PinnedConfig::new()).map_err(BarvinokError::RadiusRequired)?;
    if c.coeffs.iter().skip(1).all(|a| *a == Complex64::new(0.0, 0.0)) {
        return Ok(f64::INFINITY);
    }
    Ok(poly_roots(&c)?.roots.iter().map(|r| r.norm()).fold(f64::INFINITY, f64::min))
}

/// `log Z ≈ log a₀ − Σ_{k=1}^{m} s_k λ^k / k`. Without a supplied radius the
/// zero-free radius is the smallest root modulus from the exact oracle.
pub fn taylor_log_z(g: &Graph, p: &Params, m: usize, radius: Option<f64>) -> Result<TaylorEstimate, BarvinokError> {
    let (r, source) = match radius {
        Some(r) => (r, RadiusSource::Supplied),
        None => (scanned_radius(g, p.beta, p.gamma, &ExactOracle::from_env())?, RadiusSource::Scanned),
    };
    let a = low_order_coeffs(g, p.beta, p.gamma, m, DEFAULT_BUDGET)?;
    let s = inverse_power_sums(&a)?;
    let mut log_z = a[0].ln();
    let mut lk = Complex64::new(1.0, 0.0);
    for (k, sk) in s.iter().enumerate() {
        lk *= p.lambda;
        log_z -= sk * lk / (k as f64 + 1.0);
    }
    let ratio = p.lambda.norm() / r;
    let bound = error_bound(g.n(), m, ratio);
    let warning = (!(ratio < 1.0)).then(|| format!("|lambda| = {} is not below the zero-free radius {r}; no error bound", p.lambda.norm()));
    Ok(TaylorEstimate {
        order: m,
        log_z_truncated: log_z,
        z_estimate: log_z.exp(),
        zero_free_radius: r,
        radius_source: source,
        error_bound: bound,
        swapped: false,
        warning,
    })
}

/// Estimate through `Z_{β,γ}(λ) = λ^n Z_{γ,β}(1/λ)`. The radius, if given,
/// refers to the swapped problem.
pub fn taylor_log_z_swapped(g: &Graph, p: &Params, m: usize, radius: Option<f64>) -> Result<TaylorEstimate, BarvinokError> {
    if p.lambda == Complex64::new(0.0, 0.0) {
        return Err(BarvinokError::LambdaZero);
    }
    let q = Params::new(p.gamma, p.beta, p.lambda.inv());
    let mut est = taylor_log_z(g, &q, m, radius)?;
    est.log_z_truncated += p.lambda.ln() * g.n() as f64;
    est.z_estimate = est.log_z_truncated.exp();
    est.swapped = true;
    Ok(est)
}
