//! Sampled check of complex contraction at a complex parameter point.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sampling::{strip_images, tuples, with_preimages, StripShape};
use super::{signatures, CertifyError, ContractionCert};
use crate::params::{cx, Params};
use crate::recursion::{grad_at_preimages, recursion_f, Signature};

/// A sample violating one of the two conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeWitness {
    /// 1 for containment / avoidance of −1, 2 for the gradient bound.
    pub condition: u8,
    pub signature: Signature,
    /// Children in the transformed coordinates.
    #[serde(with = "cx::vec")]
    pub xs: Vec<Complex64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    #[serde(with = "cx")]
    pub beta: Complex64,
    #[serde(with = "cx")]
    pub gamma: Complex64,
    #[serde(with = "cx")]
    pub lambda: Complex64,
    /// `‖ζ − ζ₀‖_∞` to the certificate's anchor.
    pub distance: f64,
    pub within_ball: bool,
    pub lambda_in_q: bool,
    pub minus_gamma_outside_q: bool,
    pub minus_one_outside_q: bool,
    /// Smallest `ε − dist(φ(F_s), I)` over `‖s‖₁ ≤ Δ − 1`; negative means escape.
    pub containment_margin: f64,
    pub max_gradient: f64,
    pub gradient_bound: f64,
    /// Smallest `|F_s + 1|` over `‖s‖₁ = Δ`.
    pub min_abs_f_plus_one: f64,
    pub condition1_violations: usize,
    pub condition2_violations: usize,
    pub samples: usize,
    pub witness: Option<ProbeWitness>,
    pub passed: bool,
}

/// Threshold below which `|F_s + 1|` counts as hitting `−1`.
const MINUS_ONE_TOL: f64 = 1e-9;

#[derive(Default)]
struct Tally {
    margin: f64,
    grad: f64,
    top: f64,
    c1: usize,
    c2: usize,
    samples: usize,
    witness: Option<ProbeWitness>,
}

impl Tally {
    fn new() -> Self {
        Tally { margin: f64::INFINITY, top: f64::INFINITY, ..Default::default() }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.margin = self.margin.min(other.margin);
        self.grad = self.grad.max(other.grad);
        self.top = self.top.min(other.top);
        self.c1 += other.c1;
        self.c2 += other.c2;
        self.samples += other.samples;
        if self.witness.is_none() {
            self.witness = other.witness;
        }
        self
    }

    fn flag(&mut self, condition: u8, s: Signature, xs: Vec<Complex64>, detail: String) {
        if condition == 1 {
            self.c1 += 1;
        } else {
            self.c2 += 1;
        }
        if self.witness.is_none() {
            self.witness = Some(ProbeWitness { condition, signature: s, xs, detail });
        }
    }
}

/// Samples child tuples from the strip `P` of `cert` and checks the two
/// conditions of complex contraction at `p`. Violations are reported, not
/// returned as errors.
pub fn complex_contraction_probe(p: &Params, cert: &ContractionCert, n_samples: usize, seed: u64) -> Result<ProbeReport, CertifyError> {
    let phi = cert.potential()?;
    let iv = cert.interval;
    let eps = cert.epsilon;
    let anchor = cert.anchor_params();
    let distance = p.dist_inf(&anchor);
    let in_q = |z: Complex64| phi.forward(z).is_ok_and(|w| iv.image_dist(w) <= eps);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shape = StripShape { boundary: 64, axis: 16, interior: n_samples.clamp(16, 256) };
    let pts = with_preimages(&phi, &strip_images(&iv, eps, shape, &mut rng))?;
    let beta_zero = cert.anchor[0] == 0.0;

    let mut jobs: Vec<(Signature, bool, Vec<usize>)> = Vec::new();
    for s in signatures(cert.max_degree - 1, false, beta_zero) {
        jobs.extend(tuples(pts.len(), s.k, n_samples, &mut rng).into_iter().map(|t| (s, false, t)));
    }
    for s in signatures(cert.max_degree, true, beta_zero) {
        jobs.extend(tuples(pts.len(), s.k, n_samples, &mut rng).into_iter().map(|t| (s, true, t)));
    }

    let bound = 1.0 - cert.eta;
    let tally = jobs
        .par_iter()
        .map(|(s, top, t)| {
            let mut tally = Tally::new();
            tally.samples = 1;
            let ys: Vec<Complex64> = t.iter().map(|&i| pts[i].pre).collect();
            let xs = || t.iter().map(|&i| pts[i].img).collect::<Vec<_>>();
            let f = match recursion_f(p, *s, &ys) {
                Ok(f) => f,
                Err(e) => {
                    tally.flag(1, *s, xs(), e.to_string());
                    return tally;
                }
            };
            if *top {
                let d = (f + 1.0).norm();
                tally.top = d;
                if d <= MINUS_ONE_TOL {
                    tally.flag(1, *s, xs(), format!("|F + 1| = {d:e}"));
                }
                return tally;
            }
            let margin = phi.forward(f).map_or(f64::NEG_INFINITY, |w| eps - iv.image_dist(w));
            tally.margin = margin;
            if margin < 0.0 {
                tally.flag(1, *s, xs(), format!("F = {f} escapes the strip by {:e}", -margin));
            }
            match grad_at_preimages(p, *s, &phi, &ys) {
                Ok(g) => {
                    let norm: f64 = g.iter().map(|d| d.norm()).sum();
                    tally.grad = norm;
                    if norm > bound {
                        tally.flag(2, *s, xs(), format!("gradient norm {norm} > {bound}"));
                    }
                }
                Err(e) => tally.flag(2, *s, xs(), e.to_string()),
            }
            tally
        })
        .reduce(Tally::new, Tally::merge);

    let lambda_in_q = in_q(p.lambda);
    let minus_gamma_outside_q = !in_q(-p.gamma);
    let minus_one_outside_q = !in_q(Complex64::new(-1.0, 0.0));
    let passed = lambda_in_q && minus_gamma_outside_q && minus_one_outside_q && tally.c1 == 0 && tally.c2 == 0;
    Ok(ProbeReport {
        beta: p.beta,
        gamma: p.gamma,
        lambda: p.lambda,
        distance,
        within_ball: distance < cert.delta,
        lambda_in_q,
        minus_gamma_outside_q,
        minus_one_outside_q,
        containment_margin: tally.margin,
        max_gradient: tally.grad,
        gradient_bound: bound,
        min_abs_f_plus_one: tally.top,
        condition1_violations: tally.c1,
        condition2_violations: tally.c2,
        samples: tally.samples,
        witness: tally.witness,
        passed,
    })
}
