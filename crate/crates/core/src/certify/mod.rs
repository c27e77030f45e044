//! Membership in the correlation-decay sets S1–S4, the uniqueness condition,
//! real contraction margins and sampled estimates of how far a real point can
//! be perturbed into the complex domain.

mod delta;
mod probe;
mod sampling;

pub use delta::{estimate_delta, DeltaCaps, DeltaOptions};
pub use probe::{complex_contraction_probe, ProbeReport, ProbeWitness};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::Params;
use crate::potential::{Potential, PotentialError, PotentialKind};
use crate::recursion::{RecursionError, Signature};

/// Slack below 1 required of the uniqueness constant.
pub const UNIQUENESS_SLACK: f64 = 1e-9;

/// Allowed excess of a sampled gradient sup over its analytic bound.
pub const SAMPLED_EXCESS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SetId {
    S1,
    S2,
    S3,
    S4,
    #[serde(rename = "none")]
    None,
}

impl std::fmt::Display for SetId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SetId::S1 => "S1",
            SetId::S2 => "S2",
            SetId::S3 => "S3",
            SetId::S4 => "S4",
            SetId::None => "none",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CertifyError {
    #[error("no set matched: ({beta}, {gamma}, {lambda}) is not in S1-S4 for max degree {max_degree}")]
    NoSetMatched { beta: f64, gamma: f64, lambda: f64, max_degree: usize },
    #[error("point is not in {requested} (matches: {matches:?})")]
    SetMismatch { requested: SetId, matches: Vec<SetId> },
    #[error("max degree must be at least 3, got {0}")]
    DegreeTooSmall(usize),
    #[error("internal inconsistency: {0}")]
    Internal(String),
    #[error("epsilon search collapsed: {0}")]
    EpsilonCollapse(String),
    #[error("delta search collapsed: {0}")]
    DeltaCollapse(String),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Recursion(#[from] RecursionError),
}

/// Every set among S1–S4 containing the real point, in index order.
pub fn membership_all(beta: f64, gamma: f64, lambda: f64, max_degree: usize) -> Vec<SetId> {
    let d = max_degree as f64;
    let mut out = Vec::new();
    if max_degree < 3 || !(beta.is_finite() && gamma.is_finite() && lambda.is_finite()) {
        return out;
    }
    let bg = beta * gamma;
    let lo = (d - 2.0) / d;
    let hi = d / (d - 2.0);
    if beta > 0.0 && gamma > 0.0 && lambda >= 0.0 && bg.sqrt() > lo && bg.sqrt() < hi {
        out.push(SetId::S1);
    }
    if bg < 1.0 && beta >= 0.0 && gamma > 0.0 && lambda >= 0.0 && uniqueness_check(beta, gamma, lambda, max_degree).holds {
        out.push(SetId::S2);
    }
    if bg > hi && beta > 0.0 && gamma > 0.0 {
        let excess = (d - 2.0) * bg - d;
        let t = beta.max(1.0);
        if lambda >= 0.0 && lambda < gamma / (t.powf(d - 1.0) * excess) {
            out.push(SetId::S3);
        }
        let r = (1.0 / gamma).min(1.0);
        if lambda > excess / (beta * r.powf(d - 1.0)) {
            out.push(SetId::S4);
        }
    }
    out
}

/// The set reported for the point. S1 overlaps S3 and S4 when
/// `Δ/(Δ−2) < βγ < (Δ/(Δ−2))²`; there S3 or S4 is reported. Otherwise the
/// lowest index wins.
pub fn membership(beta: f64, gamma: f64, lambda: f64, max_degree: usize) -> SetId {
    let all = membership_all(beta, gamma, lambda, max_degree);
    [SetId::S3, SetId::S4, SetId::S1, SetId::S2].into_iter().find(|s| all.contains(s)).unwrap_or(SetId::None)
}

fn f_d(beta: f64, gamma: f64, lambda: f64, d: usize, x: f64) -> f64 {
    lambda * ((beta * x + 1.0) / (x + gamma)).powi(d as i32)
}

/// Positive fixed point of `f_d(x) = λ((βx+1)/(x+γ))^d` for `βγ < 1`.
pub fn fixed_point(beta: f64, gamma: f64, lambda: f64, d: usize) -> f64 {
    if lambda == 0.0 {
        return 0.0;
    }
    let g = |x: f64| f_d(beta, gamma, lambda, d, x) - x;
    let mut lo = 0.0;
    let mut hi = lambda * beta.max(1.0 / gamma).powi(d as i32) + 1.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    let mut x = 0.5 * (lo + hi);
    // Newton polish on g, whose derivative is f_d'(x) - 1 < 0.
    for _ in 0..3 {
        let fx = f_d(beta, gamma, lambda, d, x);
        let dg = d as f64 * (beta * gamma - 1.0) * fx / ((beta * x + 1.0) * (x + gamma)) - 1.0;
        let next = x - (fx - x) / dg;
        if next > 0.0 && next.is_finite() {
            x = next;
        }
    }
    x
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Uniqueness {
    pub holds: bool,
    /// `max_{1≤d≤Δ−1} |f_d'(x̂_d)|`.
    pub c: f64,
}

/// Up-to-Δ uniqueness: `|f_d'(x̂_d)| < 1` for every `1 ≤ d ≤ Δ − 1`.
/// Points outside the antiferromagnetic regime report `holds = false`, `c = ∞`.
pub fn uniqueness_check(beta: f64, gamma: f64, lambda: f64, max_degree: usize) -> Uniqueness {
    if !(beta * gamma < 1.0 && beta >= 0.0 && gamma > 0.0 && lambda >= 0.0) {
        return Uniqueness { holds: false, c: f64::INFINITY };
    }
    if lambda == 0.0 {
        return Uniqueness { holds: true, c: 0.0 };
    }
    let c = (1..max_degree)
        .map(|d| {
            let x = fixed_point(beta, gamma, lambda, d);
            d as f64 * (1.0 - beta * gamma) * x / ((beta * x + 1.0) * (x + gamma))
        })
        .fold(0.0, f64::max);
    Uniqueness { holds: c < 1.0 - UNIQUENESS_SLACK, c }
}

/// The real interval `J` and its image `I = φ(J)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionInterval {
    pub lo: f64,
    pub hi: f64,
    pub image_lo: f64,
    pub image_hi: f64,
}

impl RegionInterval {
    fn new(lo: f64, hi: f64, phi: &Potential) -> Result<Self, CertifyError> {
        let (image_lo, image_hi) = phi.image_of(lo, hi)?;
        Ok(RegionInterval { lo, hi, image_lo, image_hi })
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        x >= self.lo - tol && x <= self.hi + tol
    }

    /// Distance from a complex point to the image interval `I`.
    pub fn image_dist(&self, z: num_complex::Complex64) -> f64 {
        let re = z.re.clamp(self.image_lo, self.image_hi);
        (z - re).norm()
    }
}

fn check_degree(max_degree: usize) -> Result<(), CertifyError> {
    if max_degree < 3 {
        Err(CertifyError::DegreeTooSmall(max_degree))
    } else {
        Ok(())
    }
}

/// The interval and potential witnessing real contraction for `set_id`.
pub fn contraction_interval(beta: f64, gamma: f64, lambda: f64, max_degree: usize, set_id: SetId) -> Result<(RegionInterval, Potential), CertifyError> {
    check_degree(max_degree)?;
    let matches = membership_all(beta, gamma, lambda, max_degree);
    if set_id == SetId::None || !matches.contains(&set_id) {
        return Err(CertifyError::SetMismatch { requested: set_id, matches });
    }
    let e = max_degree as i32 - 1;
    if lambda == 0.0 {
        let phi = Potential::identity();
        return Ok((RegionInterval::new(0.0, 1.0, &phi)?, phi));
    }
    let (lo, hi, phi) = match set_id {
        SetId::S1 => {
            let r = 1f64.min(beta).min(1.0 / gamma);
            let t = 1f64.max(beta).max(1.0 / gamma);
            (lambda * r.powi(e), lambda * t.powi(e), Potential::log())
        }
        SetId::S3 | SetId::S4 => {
            let r = 1f64.min(1.0 / gamma);
            let t = 1f64.max(beta);
            (lambda * r.powi(e), lambda * t.powi(e), Potential::log())
        }
        SetId::S2 if beta > 0.0 => {
            let r = 1f64.min(beta).min(1.0 / gamma);
            let t = 1f64.max(beta).max(1.0 / gamma);
            (lambda * r.powi(e), lambda * t.powi(e), Potential::integral_sqrt(beta, gamma)?)
        }
        SetId::S2 => {
            let m = lambda.max(lambda / gamma.powi(e));
            let l = lambda.min(lambda / (m + gamma).powi(e));
            (l, m, Potential::integral_sqrt(beta, gamma)?)
        }
        SetId::None => unreachable!(),
    };
    Ok((RegionInterval::new(lo, hi, &phi)?, phi))
}

/// Signatures the recursion can produce at a node with at most `d` children.
/// With `β = 0` a `+` child forces the node to `−`, so only `s1 = 0` occurs.
pub(crate) fn signatures(d: usize, exact_norm: bool, beta_zero: bool) -> Vec<Signature> {
    let all: Vec<Signature> = if exact_norm { Signature::with_norm(d).collect() } else { Signature::up_to(d).collect() };
    all.into_iter().filter(|s| !(beta_zero && s.s1 > 0)).collect()
}

/// The value of `h_d` at its maximiser `x_d` (integral-potential case).
fn h_max(beta: f64, gamma: f64, lambda: f64, d: usize) -> f64 {
    let dd = d as f64;
    let a = 1.0 - beta * gamma;
    let f = |x: f64| f_d(beta, gamma, lambda, d, x);
    // Left side of the stationarity equation decreases, the right side increases.
    let diff = |x: f64| {
        let fx = f(x);
        (gamma - beta * x * x) / (dd * a * x) - (gamma - beta * fx * fx) / ((beta * fx + 1.0) * (fx + gamma))
    };
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if diff(mid.exp()) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = (0.5 * (lo + hi)).exp();
    let fx = f(x);
    dd * a * (x / ((beta * x + 1.0) * (x + gamma))).sqrt() * (fx / ((beta * fx + 1.0) * (fx + gamma))).sqrt()
}

/// Real contraction margin `η` for the matched set, with the sampled
/// gradient sup over `I^k` as a consistency check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginReport {
    pub set_id: SetId,
    pub eta: f64,
    /// Analytic bound `1 − η` on `‖∇F^φ_s‖₁` over `I^k`, `‖s‖₁ ≤ Δ − 1`.
    pub analytic_sup: f64,
    pub sampled_sup: f64,
    /// `max_d h_d(x_d)` for the integral potential, otherwise absent.
    pub h_max: Option<f64>,
    pub interval: RegionInterval,
    pub potential: PotentialKind,
}

pub fn real_contraction_margin(beta: f64, gamma: f64, lambda: f64, max_degree: usize) -> Result<MarginReport, CertifyError> {
    real_contraction_margin_with(beta, gamma, lambda, max_degree, 64)
}

/// As [`real_contraction_margin`] with `grid` sample points per dimension of `I`.
pub fn real_contraction_margin_with(beta: f64, gamma: f64, lambda: f64, max_degree: usize, grid: usize) -> Result<MarginReport, CertifyError> {
    check_degree(max_degree)?;
    let set_id = membership(beta, gamma, lambda, max_degree);
    if set_id == SetId::None {
        return Err(CertifyError::NoSetMatched { beta, gamma, lambda, max_degree });
    }
    let (interval, phi) = contraction_interval(beta, gamma, lambda, max_degree, set_id)?;
    let dm1 = (max_degree - 1) as f64;
    let e = max_degree as i32 - 1;
    let bg = beta * gamma;
    let mut h = None;
    let eta = if lambda == 0.0 {
        1.0
    } else {
        match set_id {
            SetId::S1 => 1.0 - dm1 * (1.0 - bg.sqrt()).abs() / (1.0 + bg.sqrt()),
            SetId::S3 => {
                let t = 1f64.max(beta);
                1.0 - dm1 * (bg - 1.0) / (gamma / (lambda * t.powi(e)) + 1.0 + bg)
            }
            SetId::S4 => {
                let r = 1f64.min(1.0 / gamma);
                1.0 - dm1 * (bg - 1.0) / (beta * lambda * r.powi(e) + 1.0 + bg)
            }
            SetId::S2 => {
                let u = uniqueness_check(beta, gamma, lambda, max_degree);
                let hm = (1..max_degree).map(|d| h_max(beta, gamma, lambda, d)).fold(0.0, f64::max);
                if hm > u.c.sqrt() + SAMPLED_EXCESS_TOL {
                    return Err(CertifyError::Internal(format!("max h_d = {hm} exceeds sqrt(c) = {}", u.c.sqrt())));
                }
                h = Some(hm);
                1.0 - u.c.sqrt()
            }
            SetId::None => unreachable!(),
        }
    };
    let p = Params::real(beta, gamma, lambda);
    let sampled = sampling::real_gradient_sup(&p, max_degree, &phi, &interval, grid)?;
    let analytic = 1.0 - eta;
    if sampled > analytic + SAMPLED_EXCESS_TOL {
        return Err(CertifyError::Internal(format!("sampled gradient sup {sampled} exceeds analytic bound {analytic}")));
    }
    Ok(MarginReport { set_id, eta, analytic_sup: analytic, sampled_sup: sampled, h_max: h, interval, potential: phi.kind() })
}

/// Output of [`estimate_delta`]. Every quantity comes from sampling, so the
/// certificate is empirical rather than a proof.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionCert {
    /// Real anchor `(β₀, γ₀, λ₀)`.
    pub anchor: [f64; 3],
    pub max_degree: usize,
    pub set_id: SetId,
    pub matches: Vec<SetId>,
    pub interval: RegionInterval,
    pub potential: PotentialKind,
    /// Real margin at the anchor.
    pub eta_real: f64,
    /// Margin guaranteed (on samples) over the whole ball; `eta_real / 2`.
    pub eta: f64,
    /// Sampled sup of `‖∇_ζ F^φ_s‖₁` over ball × strip.
    #[serde(rename = "M")]
    pub m: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub caps: DeltaCaps,
    pub empirical: bool,
    pub seed: u64,
}

impl ContractionCert {
    pub fn anchor_params(&self) -> Params {
        Params::real(self.anchor[0], self.anchor[1], self.anchor[2])
    }

    pub fn potential(&self) -> Result<Potential, CertifyError> {
        Ok(Potential::new(self.potential)?)
    }

    /// Diameter of the closed strip `P = I_ε`.
    pub fn strip_diameter(&self) -> f64 {
        self.interval.image_hi - self.interval.image_lo + 2.0 * self.epsilon
    }
}
