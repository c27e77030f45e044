//! Sampled realisation of the perturbation radius `δ = min{δ₂, δ₃, δ₄, εη/M}`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sampling::{ball_points, strip_images, tuples, with_preimages, StripPoint, StripShape};
use super::{contraction_interval, real_contraction_margin, signatures, CertifyError, ContractionCert, RegionInterval, membership_all};
use crate::params::Params;
use crate::potential::Potential;
use crate::recursion::{grad_at_preimages, grad_params_at_preimages, recursion_f, Signature};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaOptions {
    pub seed: u64,
    /// Strip samples on the boundary of `P_ε`.
    pub boundary: usize,
    /// Strip samples on `I` itself.
    pub axis: usize,
    /// Random strip samples in the interior.
    pub interior: usize,
    /// Child tuples per signature at the anchor.
    pub max_tuples: usize,
    /// Child tuples per signature and parameter sample in the ball.
    pub ball_tuples: usize,
    /// Parameter samples on the distinguished boundary of the ball.
    pub ball_torus: usize,
    pub ball_interior: usize,
    pub max_halvings: usize,
}

impl Default for DeltaOptions {
    fn default() -> Self {
        DeltaOptions {
            seed: 0,
            boundary: 64,
            axis: 16,
            interior: 64,
            max_tuples: 4096,
            ball_tuples: 512,
            ball_torus: 32,
            ball_interior: 8,
            max_halvings: 40,
        }
    }
}

/// The individual caps whose minimum is `δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaCaps {
    /// Gradient sup over ball × strip stays at most `1 − η`.
    pub delta2: f64,
    /// `−1` stays away from `F_s(ζ, Q^k)` for `‖s‖₁ = Δ`.
    pub delta3: f64,
    /// `λ ∈ Q` and `−γ ∉ Q` throughout the ball.
    pub delta4: f64,
    /// `ε η / (2M)`.
    pub ratio: f64,
}

struct Context<'a> {
    phi: &'a Potential,
    interval: RegionInterval,
    inner: Vec<Signature>,
    top: Vec<Signature>,
}

fn children(pts: &[StripPoint], t: &[usize]) -> Vec<Complex64> {
    t.iter().map(|&i| pts[i].pre).collect()
}

type Tuples = Vec<(Signature, Vec<Vec<usize>>)>;

fn tuple_sets(sigs: &[Signature], n: usize, max: usize, rng: &mut ChaCha8Rng) -> Tuples {
    sigs.iter().map(|&s| (s, tuples(n, s.k, max, rng))).collect()
}

/// Sup of `‖∇_x F^φ_s‖₁` over the given parameters and child tuples.
fn grad_sup(ctx: &Context, ps: &[Params], pts: &[StripPoint], sets: &Tuples) -> Result<f64, CertifyError> {
    let vals = ps
        .par_iter()
        .map(|p| {
            let mut sup: f64 = 0.0;
            for (s, ts) in sets {
                for t in ts {
                    let g = grad_at_preimages(p, *s, ctx.phi, &children(pts, t))?;
                    sup = sup.max(g.iter().map(|d| d.norm()).sum());
                }
            }
            Ok(sup)
        })
        .collect::<Result<Vec<f64>, CertifyError>>()?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

/// Sup of `‖∇_ζ F^φ_s‖₁`.
fn param_grad_sup(ctx: &Context, ps: &[Params], pts: &[StripPoint], sets: &Tuples) -> Result<f64, CertifyError> {
    let vals = ps
        .par_iter()
        .map(|p| {
            let mut sup: f64 = 0.0;
            for (s, ts) in sets {
                for t in ts {
                    let g = grad_params_at_preimages(p, *s, ctx.phi, &children(pts, t))?;
                    sup = sup.max(g.iter().map(|d| d.norm()).sum());
                }
            }
            Ok(sup)
        })
        .collect::<Result<Vec<f64>, CertifyError>>()?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

/// Inf of `|F_s + 1|` over top-level signatures.
fn top_min(ps: &[Params], pts: &[StripPoint], sets: &Tuples) -> Result<f64, CertifyError> {
    let vals = ps
        .par_iter()
        .map(|p| {
            let mut inf = f64::INFINITY;
            for (s, ts) in sets {
                for t in ts {
                    let f = recursion_f(p, *s, &children(pts, t))?;
                    inf = inf.min((f + 1.0).norm());
                }
            }
            Ok(inf)
        })
        .collect::<Result<Vec<f64>, CertifyError>>()?;
    Ok(vals.into_iter().fold(f64::INFINITY, f64::min))
}

/// Largest `dist(φ(F_s), I)` over inner signatures at one parameter point;
/// infinite if some value leaves the domain of `φ`.
fn containment_excess(ctx: &Context, p: &Params, pts: &[StripPoint], sets: &Tuples) -> f64 {
    sets.par_iter()
        .map(|(s, ts)| {
            let mut worst: f64 = 0.0;
            for t in ts {
                let d = recursion_f(p, *s, &children(pts, t))
                    .ok()
                    .and_then(|f| ctx.phi.forward(f).ok())
                    .map_or(f64::INFINITY, |w| ctx.interval.image_dist(w));
                worst = worst.max(d);
            }
            worst
        })
        .reduce(|| 0.0, f64::max)
}

/// Halves `start` until `ok` accepts a sample of the ball of that radius.
fn shrink(
    anchor: &Params,
    opts: &DeltaOptions,
    rng: &mut ChaCha8Rng,
    start: f64,
    what: &str,
    ok: impl Fn(&[Params]) -> Result<bool, CertifyError>,
) -> Result<f64, CertifyError> {
    let mut d = start;
    for _ in 0..opts.max_halvings {
        let ball = ball_points(anchor, d, opts.ball_torus, opts.ball_interior, rng);
        if ok(&ball)? {
            return Ok(d);
        }
        d /= 2.0;
    }
    Err(CertifyError::DeltaCollapse(format!("{what} cap fell below {d:e}")))
}

fn in_q(phi: &Potential, interval: &RegionInterval, eps: f64, z: Complex64) -> bool {
    phi.forward(z).is_ok_and(|w| interval.image_dist(w) <= eps)
}

/// Estimates a radius `δ` such that every `ζ` with `‖ζ − ζ₀‖_∞ < δ` satisfies
/// complex contraction on samples, following the construction
/// `δ = min{δ₂, δ₃, δ₄, εη/M}` with a safety factor 1/2 on the last term.
pub fn estimate_delta(beta: f64, gamma: f64, lambda: f64, max_degree: usize, opts: &DeltaOptions) -> Result<ContractionCert, CertifyError> {
    let margin = real_contraction_margin(beta, gamma, lambda, max_degree)?;
    let (interval, phi) = contraction_interval(beta, gamma, lambda, max_degree, margin.set_id)?;
    let beta_zero = beta == 0.0;
    let ctx = Context {
        phi: &phi,
        interval,
        inner: signatures(max_degree - 1, false, beta_zero),
        top: signatures(max_degree, true, beta_zero),
    };
    let anchor = Params::real(beta, gamma, lambda);
    let eta0 = margin.eta;
    let eta = eta0 / 2.0;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let shape = StripShape { boundary: opts.boundary, axis: opts.axis, interior: opts.interior };

    // Strip half-width ε.
    let mut eps = 1.0;
    let mut found = None;
    let mut last_reason = String::new();
    for _ in 0..opts.max_halvings {
        let imgs = strip_images(&interval, eps, shape, &mut rng);
        let pts = match with_preimages(&phi, &imgs) {
            Ok(p) => p,
            Err(e) => {
                last_reason = format!("preimage failed at eps = {eps}: {e}");
                eps /= 2.0;
                continue;
            }
        };
        if in_q(&phi, &interval, eps, Complex64::new(-1.0, 0.0)) || in_q(&phi, &interval, eps, Complex64::new(-gamma, 0.0)) {
            last_reason = format!("-1 or -gamma inside Q at eps = {eps}");
            eps /= 2.0;
            continue;
        }
        let inner = tuple_sets(&ctx.inner, pts.len(), opts.max_tuples, &mut rng);
        let top = tuple_sets(&ctx.top, pts.len(), opts.max_tuples, &mut rng);
        let grad = grad_sup(&ctx, &[anchor], &pts, &inner)?;
        let excess = containment_excess(&ctx, &anchor, &pts, &inner);
        let kmin = top_min(&[anchor], &pts, &top)?;
        if grad <= 1.0 - 0.75 * eta0 && excess <= eps * (1.0 - 0.5 * eta0) && kmin > 1e-6 {
            found = Some((pts, kmin));
            break;
        }
        last_reason = format!("eps = {eps}: gradient sup {grad}, containment excess {excess}, min |F+1| {kmin}");
        eps /= 2.0;
    }
    let (pts, kmin) = found.ok_or(CertifyError::EpsilonCollapse(last_reason))?;

    // δ₄ from the boundary of Q: λ₀ stays inside, −γ₀ stays outside.
    let boundary = &pts[..opts.boundary];
    let d_lambda = boundary.iter().map(|q| (q.pre - lambda).norm()).fold(f64::INFINITY, f64::min);
    let d_gamma = boundary.iter().map(|q| (q.pre + gamma).norm()).fold(f64::INFINITY, f64::min);
    let delta4 = 0.9 * d_lambda.min(d_gamma);

    let inner = tuple_sets(&ctx.inner, pts.len(), opts.ball_tuples, &mut rng);
    let top = tuple_sets(&ctx.top, pts.len(), opts.ball_tuples, &mut rng);

    let delta2 = shrink(&anchor, opts, &mut rng, delta4.min(eps), "gradient", |ball| Ok(grad_sup(&ctx, ball, &pts, &inner)? <= 1.0 - eta))?;
    let mut ball_for_m = ball_points(&anchor, delta2, opts.ball_torus, opts.ball_interior, &mut rng);
    ball_for_m.push(anchor);
    let m = param_grad_sup(&ctx, &ball_for_m, &pts, &inner)?;
    let delta3 = shrink(&anchor, opts, &mut rng, delta2, "top-level", |ball| Ok(top_min(ball, &pts, &top)? >= 0.5 * kmin))?;
    let ratio = if m > 0.0 { eps * eta / (2.0 * m) } else { f64::INFINITY };
    let delta = delta2.min(delta3).min(delta4).min(ratio);
    if !(delta > 1e-12) {
        return Err(CertifyError::DeltaCollapse(format!("delta = {delta:e}")));
    }
    Ok(ContractionCert {
        anchor: [beta, gamma, lambda],
        max_degree,
        set_id: margin.set_id,
        matches: membership_all(beta, gamma, lambda, max_degree),
        interval,
        potential: phi.kind(),
        eta_real: eta0,
        eta,
        m,
        epsilon: eps,
        delta,
        caps: DeltaCaps { delta2, delta3, delta4, ratio },
        empirical: true,
        seed: opts.seed,
    })
}
