//! Sample sets over the strip `P_ε`, its preimage and the parameter ball.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{signatures, CertifyError, RegionInterval};
use crate::params::Params;
use crate::potential::Potential;
use crate::recursion::grad_at_preimages;

/// A point of the strip together with its preimage under the potential.
#[derive(Debug, Clone, Copy)]
pub(crate) struct StripPoint {
    pub img: Complex64,
    pub pre: Complex64,
}

/// Counts of strip samples by kind.
#[derive(Debug, Clone, Copy)]
pub(crate) struct StripShape {
    pub boundary: usize,
    pub axis: usize,
    pub interior: usize,
}

/// Points on the boundary of the stadium `{z : dist(z, [a, b]) = ε}`,
/// spaced by arc length.
pub(crate) fn stadium_boundary(a: f64, b: f64, eps: f64, n: usize) -> Vec<Complex64> {
    let flat = b - a;
    let arc = PI * eps;
    let perimeter = 2.0 * flat + 2.0 * arc;
    (0..n)
        .map(|i| {
            let mut s = perimeter * i as f64 / n as f64;
            if s < flat {
                return Complex64::new(a + s, eps);
            }
            s -= flat;
            if s < arc {
                let t = PI / 2.0 + s / eps;
                return Complex64::new(a, 0.0) + Complex64::from_polar(eps, t);
            }
            s -= arc;
            if s < flat {
                return Complex64::new(b - s, -eps);
            }
            s -= flat;
            let t = -PI / 2.0 + s / eps;
            Complex64::new(b, 0.0) + Complex64::from_polar(eps, t)
        })
        .collect()
}

/// Uniform point of the closed stadium.
fn stadium_random(a: f64, b: f64, eps: f64, rng: &mut ChaCha8Rng) -> Complex64 {
    loop {
        let z = Complex64::new(rng.random_range(a - eps..=b + eps), rng.random_range(-eps..=eps));
        let re = z.re.clamp(a, b);
        if (z - re).norm() <= eps {
            return z;
        }
    }
}

pub(crate) fn strip_images(interval: &RegionInterval, eps: f64, shape: StripShape, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let (a, b) = (interval.image_lo, interval.image_hi);
    let mut pts = stadium_boundary(a, b, eps, shape.boundary);
    let m = shape.axis.max(2);
    pts.extend((0..m).map(|i| Complex64::new(a + (b - a) * i as f64 / (m - 1) as f64, 0.0)));
    pts.extend((0..shape.interior).map(|_| stadium_random(a, b, eps, rng)));
    pts
}

pub(crate) fn with_preimages(phi: &Potential, imgs: &[Complex64]) -> Result<Vec<StripPoint>, CertifyError> {
    imgs.par_iter().map(|&img| Ok(StripPoint { img, pre: phi.inverse(img)? })).collect()
}

/// Index tuples into `n` points: the full product when it has at most `max`
/// entries, otherwise all diagonal tuples plus `max` random ones.
pub(crate) fn tuples(n: usize, k: usize, max: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let full = (n as f64).powi(k as i32);
    if full <= max as f64 {
        let mut out = Vec::with_capacity(full as usize);
        let mut idx = vec![0usize; k];
        loop {
            out.push(idx.clone());
            let mut pos = 0;
            loop {
                if pos == k {
                    return out;
                }
                idx[pos] += 1;
                if idx[pos] < n {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
        }
    }
    let mut out: Vec<Vec<usize>> = (0..n).map(|i| vec![i; k]).collect();
    out.extend((0..max).map(|_| (0..k).map(|_| rng.random_range(0..n)).collect()));
    out
}

/// Parameter points in the polydisk of radius `delta` around a real anchor:
/// the anchor, points of the distinguished boundary (where plurisubharmonic
/// sups are attained) and random interior points.
pub(crate) fn ball_points(anchor: &Params, delta: f64, n_torus: usize, n_interior: usize, rng: &mut ChaCha8Rng) -> Vec<Params> {
    let mut out = vec![*anchor];
    let base = anchor.as_array();
    for _ in 0..n_torus {
        let mut z = base;
        for c in z.iter_mut() {
            *c += Complex64::from_polar(delta, rng.random_range(0.0..2.0 * PI));
        }
        out.push(Params::from_array(z));
    }
    for _ in 0..n_interior {
        let mut z = base;
        for c in z.iter_mut() {
            let r = delta * rng.random_range(0.0f64..1.0).sqrt();
            *c += Complex64::from_polar(r, rng.random_range(0.0..2.0 * PI));
        }
        out.push(Params::from_array(z));
    }
    out
}

/// Sup of `‖∇F^φ_s‖₁` over a real grid of `I^k`, `‖s‖₁ ≤ Δ − 1`.
pub(crate) fn real_gradient_sup(p: &Params, max_degree: usize, phi: &Potential, interval: &RegionInterval, grid: usize) -> Result<f64, CertifyError> {
    let (a, b) = (interval.image_lo, interval.image_hi);
    let n = if b > a { grid.max(2) } else { 1 };
    let imgs: Vec<Complex64> = (0..n).map(|i| Complex64::new(if n == 1 { a } else { a + (b - a) * i as f64 / (n - 1) as f64 }, 0.0)).collect();
    let pts = with_preimages(phi, &imgs)?;
    let mut rng = <ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0);
    let mut sup: f64 = 0.0;
    for s in signatures(max_degree - 1, false, p.beta.re == 0.0) {
        let ts = tuples(pts.len(), s.k, 8192, &mut rng);
        let local = ts
            .par_iter()
            .map(|t| {
                let ys: Vec<Complex64> = t.iter().map(|&i| pts[i].pre).collect();
                Ok(grad_at_preimages(p, s, phi, &ys)?.iter().map(|d| d.norm()).sum::<f64>())
            })
            .collect::<Result<Vec<f64>, CertifyError>>()?;
        sup = local.into_iter().fold(sup, f64::max);
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn boundary_lies_on_stadium() {
        let iv = RegionInterval { lo: 1.0, hi: 2.0, image_lo: -0.5, image_hi: 0.7 };
        for z in stadium_boundary(iv.image_lo, iv.image_hi, 0.3, 64) {
            assert!((iv.image_dist(z) - 0.3).abs() < 1e-12, "{z}");
        }
        for z in stadium_boundary(0.0, 0.0, 0.5, 16) {
            assert!((z.norm() - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn tuple_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(tuples(5, 2, 100, &mut rng).len(), 25);
        assert_eq!(tuples(5, 0, 100, &mut rng), vec![Vec::<usize>::new()]);
        assert_eq!(tuples(50, 3, 100, &mut rng).len(), 150);
    }

    #[test]
    fn ball_stays_in_polydisk() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = Params::real(1.0, 2.0, 0.5);
        for p in ball_points(&a, 0.1, 20, 20, &mut rng) {
            assert!(p.dist_inf(&a) <= 0.1 + 1e-15);
        }
    }
}
