//! Potential functions `φ` used to conjugate the recursion.
//!
//! The integral potential `φ(x) = ∫_1^x dy / √(y(βy+1)(y+γ))` has no closed
//! form. Substituting `y = t²` turns it into
//! `Φ(u) = ∫_1^u 2 dt / (√(βt²+1) √(t²+γ))` with `φ(x) = Φ(√x)`. Taking the
//! principal root of each factor makes the integrand analytic on the right
//! half-plane, so `φ` continues analytically to `ℂ \ (−∞, 0]` and is evaluated
//! there by quadrature along a straight segment from a cached real node.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature::integrate;

const QUAD_TOL: f64 = 1e-12;
/// Table nodes `u_k = 2^{k/STEPS}` for `|k| ≤ SPAN`.
const STEPS: i32 = 4;
const SPAN: i32 = 40;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PotentialError {
    #[error("argument {0} is outside the domain of the potential")]
    OutsideDomain(Complex64),
    #[error("value {0} is outside the image of the potential")]
    OutsideImage(Complex64),
    #[error("inverse of the potential did not converge at {0}")]
    InverseFailed(Complex64),
    #[error("integral potential needs beta >= 0 and gamma > 0 (got beta = {beta}, gamma = {gamma})")]
    BadParameters { beta: f64, gamma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum PotentialKind {
    Identity,
    Log,
    IntegralSqrt { beta: f64, gamma: f64 },
}

impl std::fmt::Display for PotentialKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PotentialKind::Identity => write!(f, "identity"),
            PotentialKind::Log => write!(f, "log"),
            PotentialKind::IntegralSqrt { beta, gamma } => write!(f, "integral-sqrt(beta={beta}, gamma={gamma})"),
        }
    }
}

fn integrand(beta: f64, gamma: f64, t: Complex64) -> Complex64 {
    let a = (t * t * beta + 1.0).sqrt();
    let b = (t * t + gamma).sqrt();
    Complex64::new(2.0, 0.0) / (a * b)
}

#[derive(Debug)]
struct SqrtTable {
    beta: f64,
    gamma: f64,
    /// `Φ(0)`.
    at_zero: f64,
    /// `Φ(u_k)` for `k = -SPAN..=SPAN`.
    values: Vec<f64>,
    /// `lim_{u→∞} Φ(u)`, infinite when `β = 0`.
    at_infinity: f64,
}

impl SqrtTable {
    fn node(k: i32) -> f64 {
        (k as f64 / STEPS as f64).exp2()
    }

    fn integrand(&self, t: Complex64) -> Complex64 {
        integrand(self.beta, self.gamma, t)
    }

    fn build(beta: f64, gamma: f64) -> Self {
        let f = |t: Complex64| integrand(beta, gamma, t);
        let mut values = vec![0.0; (2 * SPAN + 1) as usize];
        for k in 1..=SPAN {
            let prev = values[(SPAN + k - 1) as usize];
            let seg = integrate(f, Self::node(k - 1).into(), Self::node(k).into(), QUAD_TOL).re;
            values[(SPAN + k) as usize] = prev + seg;
            let prev = values[(SPAN - k + 1) as usize];
            let seg = integrate(f, Self::node(-k + 1).into(), Self::node(-k).into(), QUAD_TOL).re;
            values[(SPAN - k) as usize] = prev + seg;
        }
        let at_zero = values[0] - integrate(f, 0.0.into(), Self::node(-SPAN).into(), QUAD_TOL).re;
        let at_infinity = if beta > 0.0 {
            // t = 1/s maps the tail to a proper integral over [0, 1/u_max].
            let tail = |s: Complex64| Complex64::new(2.0, 0.0) / ((s * s + beta).sqrt() * (s * s * gamma + 1.0).sqrt());
            values[(2 * SPAN) as usize] + integrate(tail, 0.0.into(), (1.0 / Self::node(SPAN)).into(), QUAD_TOL).re
        } else {
            f64::INFINITY
        };
        SqrtTable { beta, gamma, at_zero, values, at_infinity }
    }

    /// `Φ(u)` for `Re u > 0` (or `u = 0`).
    fn phi(&self, u: Complex64) -> Complex64 {
        let r = u.norm();
        let (base, value) = if r < Self::node(-SPAN) {
            (Complex64::new(0.0, 0.0), self.at_zero)
        } else {
            let k = ((r.log2() * STEPS as f64).round() as i32).clamp(-SPAN, SPAN);
            (Complex64::new(Self::node(k), 0.0), self.values[(SPAN + k) as usize])
        };
        value + integrate(|t| self.integrand(t), base, u, QUAD_TOL)
    }

    fn dphi(&self, u: Complex64) -> Complex64 {
        self.integrand(u)
    }

    /// Real solution of `Φ(u) = y`, `u > 0`.
    fn inverse_real(&self, y: f64) -> Option<f64> {
        if !(y > self.at_zero && y < self.at_infinity) {
            return None;
        }
        let phi_re = |u: f64| self.phi(u.into()).re;
        // Bracket from the table, extending past the last node when β = 0.
        let k = self.values.partition_point(|&v| v < y);
        let (mut lo, mut hi) = if k == 0 {
            (0.0, Self::node(-SPAN))
        } else if k < self.values.len() {
            (Self::node(k as i32 - 1 - SPAN), Self::node(k as i32 - SPAN))
        } else {
            let mut lo = Self::node(SPAN);
            let mut hi = 2.0 * lo;
            while phi_re(hi) < y {
                lo = hi;
                hi *= 2.0;
                if !hi.is_finite() {
                    return None;
                }
            }
            (lo, hi)
        };
        let mut u = 0.5 * (lo + hi);
        for _ in 0..200 {
            let v = phi_re(u) - y;
            if v == 0.0 {
                return Some(u);
            }
            if v < 0.0 {
                lo = u;
            } else {
                hi = u;
            }
            let newton = u - v / self.dphi(u.into()).re;
            u = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if (hi - lo) <= 1e-15 * hi || v.abs() <= 1e-15 * (1.0 + y.abs()) {
                return Some(u);
            }
        }
        Some(u)
    }

    fn inverse(&self, y: Complex64) -> Option<Complex64> {
        let span = self.at_infinity.min(self.at_zero.abs() + 1e3) - self.at_zero;
        let start_re = y.re.clamp(self.at_zero + 1e-9 * span, self.at_infinity - 1e-9 * span.min(1.0));
        let mut u = Complex64::new(self.inverse_real(start_re)?, 0.0);
        if y.im == 0.0 && start_re == y.re {
            return Some(u);
        }
        let mut res = self.phi(u) - y;
        for _ in 0..100 {
            if res.norm() <= 1e-14 * (1.0 + y.norm()) {
                return Some(u);
            }
            let step = res / self.dphi(u);
            let mut t = 1.0;
            loop {
                let cand = u - step * t;
                if cand.re > 0.0 {
                    let cand_res = self.phi(cand) - y;
                    if cand_res.norm() < res.norm() || t < 1e-3 {
                        u = cand;
                        res = cand_res;
                        break;
                    }
                }
                t *= 0.5;
                if t < 1e-6 {
                    return None;
                }
            }
        }
        (res.norm() <= 1e-10 * (1.0 + y.norm())).then_some(u)
    }
}

/// An invertible change of variables with its derivative.
#[derive(Debug, Clone)]
pub struct Potential {
    kind: PotentialKind,
    table: Option<Arc<SqrtTable>>,
}

impl PartialEq for Potential {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Potential {
    pub fn identity() -> Self {
        Potential { kind: PotentialKind::Identity, table: None }
    }

    pub fn log() -> Self {
        Potential { kind: PotentialKind::Log, table: None }
    }

    /// Builds the quadrature table for the integral potential.
    pub fn integral_sqrt(beta: f64, gamma: f64) -> Result<Self, PotentialError> {
        if !(beta >= 0.0 && gamma > 0.0 && beta.is_finite() && gamma.is_finite()) {
            return Err(PotentialError::BadParameters { beta, gamma });
        }
        Ok(Potential { kind: PotentialKind::IntegralSqrt { beta, gamma }, table: Some(Arc::new(SqrtTable::build(beta, gamma))) })
    }

    pub fn new(kind: PotentialKind) -> Result<Self, PotentialError> {
        match kind {
            PotentialKind::Identity => Ok(Self::identity()),
            PotentialKind::Log => Ok(Self::log()),
            PotentialKind::IntegralSqrt { beta, gamma } => Self::integral_sqrt(beta, gamma),
        }
    }

    pub fn kind(&self) -> PotentialKind {
        self.kind
    }

    fn on_cut(x: Complex64) -> bool {
        !x.is_finite() || (x.im == 0.0 && x.re <= 0.0)
    }

    pub fn forward(&self, x: Complex64) -> Result<Complex64, PotentialError> {
        match self.kind {
            PotentialKind::Identity => Ok(x),
            PotentialKind::Log => {
                if Self::on_cut(x) {
                    return Err(PotentialError::OutsideDomain(x));
                }
                Ok(x.ln())
            }
            PotentialKind::IntegralSqrt { .. } => {
                if Self::on_cut(x) {
                    return Err(PotentialError::OutsideDomain(x));
                }
                Ok(self.table.as_ref().unwrap().phi(x.sqrt()))
            }
        }
    }

    pub fn inverse(&self, y: Complex64) -> Result<Complex64, PotentialError> {
        if !y.is_finite() {
            return Err(PotentialError::OutsideImage(y));
        }
        match self.kind {
            PotentialKind::Identity => Ok(y),
            PotentialKind::Log => {
                if y.im.abs() >= std::f64::consts::PI {
                    return Err(PotentialError::OutsideImage(y));
                }
                Ok(y.exp())
            }
            PotentialKind::IntegralSqrt { .. } => {
                let table = self.table.as_ref().unwrap();
                let u = table.inverse(y).ok_or(PotentialError::InverseFailed(y))?;
                Ok(u * u)
            }
        }
    }

    pub fn derivative(&self, x: Complex64) -> Result<Complex64, PotentialError> {
        match self.kind {
            PotentialKind::Identity => Ok(Complex64::new(1.0, 0.0)),
            PotentialKind::Log => {
                if Self::on_cut(x) {
                    return Err(PotentialError::OutsideDomain(x));
                }
                Ok(x.inv())
            }
            PotentialKind::IntegralSqrt { .. } => {
                if Self::on_cut(x) {
                    return Err(PotentialError::OutsideDomain(x));
                }
                let u = x.sqrt();
                Ok(self.table.as_ref().unwrap().dphi(u) / (u * 2.0))
            }
        }
    }

    /// Real image `φ([lo, hi])` of a positive interval, or of `[0, 1]` for the identity.
    pub fn image_of(&self, lo: f64, hi: f64) -> Result<(f64, f64), PotentialError> {
        Ok((self.forward(lo.into())?.re, self.forward(hi.into())?.re))
    }
}
