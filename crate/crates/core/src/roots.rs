//! Polynomial roots by simultaneous iteration.
//!
//! Durand–Kerner runs first. If it stalls (typically on clustered or multiple
//! roots) the current iterates are handed to the Aberth–Ehrlich correction.
//! Every root is finally polished by a guarded Newton step.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::PolyCoeffs;
use crate::params::cx;

pub const ROOT_TOL: f64 = 1e-12;
pub const MAX_ITER: usize = 2000;

/// Accepted backward error of a returned root, relative to `Σ|a_j||z|^j`.
pub const RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RootError {
    #[error("all coefficients are zero")]
    ZeroPolynomial,
    #[error("root finder did not converge after {iterations} iterations (worst backward error {worst:e})")]
    NoConvergence { iterations: usize, worst: f64 },
    #[error("coefficient is not finite")]
    NonFinite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Roots {
    #[serde(with = "cx::vec")]
    pub roots: Vec<Complex64>,
    /// `|P(root)|` for each root.
    pub residuals: Vec<f64>,
}

fn horner(c: &[Complex64], z: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a)
}

/// `P(z)` and `P'(z)` together.
fn horner_d(c: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

/// `Σ |a_j| |z|^j`, the scale against which a residual is judged.
fn magnitude(c: &[Complex64], z: Complex64) -> f64 {
    let r = z.norm();
    c.iter().rev().fold(0.0, |acc, a| acc * r + a.norm())
}

fn backward_error(c: &[Complex64], z: Complex64) -> f64 {
    let scale = magnitude(c, z);
    if scale == 0.0 {
        0.0
    } else {
        horner(c, z).norm() / scale
    }
}

/// Starting points on circles read off the Newton polygon of `ln|a_j|`, one
/// circle per hull edge with as many points as the edge is long.
fn initial_guesses(c: &[Complex64]) -> Vec<Complex64> {
    let n = c.len() - 1;
    let pts: Vec<(usize, f64)> = c.iter().enumerate().filter(|(_, a)| a.norm() > 0.0).map(|(j, a)| (j, a.norm().ln())).collect();
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for &p in &pts {
        while hull.len() >= 2 {
            let (o, a) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (a.0 as f64 - o.0 as f64) * (p.1 - o.1) - (a.1 - o.1) * (p.0 as f64 - o.0 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    // Fixed pseudo-random phase offsets keep the start away from symmetric
    // configurations that trap simultaneous iteration.
    let mut state: u64 = 0x9e37_79b9_7f4a_7c15;
    let mut out = Vec::with_capacity(n);
    for w in hull.windows(2) {
        let ((i, li), (k, lk)) = (w[0], w[1]);
        let m = k - i;
        let radius = ((li - lk) / m as f64).exp();
        let radius = if radius.is_finite() && radius > 0.0 { radius } else { 1.0 };
        for t in 0..m {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            let jitter = (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
            let theta = 2.0 * std::f64::consts::PI * t as f64 / m as f64 + 0.4 + 0.25 * jitter + i as f64;
            out.push(Complex64::from_polar(radius * (1.0 + 0.05 * jitter), theta));
        }
    }
    out
}

fn converged(c: &[Complex64], zs: &[Complex64], step: f64) -> bool {
    step <= ROOT_TOL || zs.iter().all(|&z| backward_error(c, z) <= 4.0 * f64::EPSILON * c.len() as f64)
}

fn durand_kerner(c: &[Complex64], zs: &mut [Complex64]) -> bool {
    let lead = c[c.len() - 1];
    for _ in 0..MAX_ITER {
        let mut step: f64 = 0.0;
        for i in 0..zs.len() {
            let zi = zs[i];
            let mut denom = lead;
            for (j, &zj) in zs.iter().enumerate() {
                if j != i {
                    denom *= zi - zj;
                }
            }
            if denom.norm() == 0.0 {
                return false;
            }
            let delta = horner(c, zi) / denom;
            if !delta.is_finite() {
                return false;
            }
            zs[i] = zi - delta;
            step = step.max(delta.norm() / (1.0 + zi.norm()));
        }
        if converged(c, zs, step) {
            return true;
        }
    }
    false
}

fn aberth(c: &[Complex64], zs: &mut [Complex64]) -> bool {
    for _ in 0..MAX_ITER {
        let mut step: f64 = 0.0;
        for i in 0..zs.len() {
            let zi = zs[i];
            let (p, dp) = horner_d(c, zi);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let sum: Complex64 = zs
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &zj)| (zi - zj).inv())
                .sum();
            let delta = ratio / (Complex64::new(1.0, 0.0) - ratio * sum);
            if !delta.is_finite() {
                continue;
            }
            zs[i] = zi - delta;
            step = step.max(delta.norm() / (1.0 + zi.norm()));
        }
        if converged(c, zs, step) {
            return true;
        }
    }
    false
}

/// Newton steps that are kept only while they reduce `|P|`.
fn polish(c: &[Complex64], z: Complex64) -> Complex64 {
    let mut best = z;
    let mut best_res = horner(c, z).norm();
    for _ in 0..5 {
        let (p, dp) = horner_d(c, best);
        if dp.norm() == 0.0 || best_res == 0.0 {
            break;
        }
        let cand = best - p / dp;
        let res = horner(c, cand).norm();
        if !(res < best_res) {
            break;
        }
        best = cand;
        best_res = res;
    }
    best
}

fn derivative(c: &[Complex64]) -> Vec<Complex64> {
    c.iter().enumerate().skip(1).map(|(j, &a)| a * j as f64).collect()
}

/// Replaces each cluster of `k` nearly equal roots by a single `k`-fold root
/// found by Newton's method on `P^{(k−1)}`, when that is no worse a root of
/// `P`. Isolated multiple roots are only found to about `ε^{1/k}` otherwise.
fn refine_clusters(c: &[Complex64], zs: &mut [Complex64]) {
    let n = zs.len();
    let mut group: Vec<usize> = (0..n).collect();
    fn find(g: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while g[r] != r {
            r = g[r];
        }
        g[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (zs[i] - zs[j]).norm() <= 1e-3 * zs[i].norm().max(1.0) {
                let (a, b) = (find(&mut group, i), find(&mut group, j));
                group[a] = b;
            }
        }
    }
    let mut members: std::collections::BTreeMap<usize, Vec<usize>> = std::collections::BTreeMap::new();
    for i in 0..n {
        let root = find(&mut group, i);
        members.entry(root).or_default().push(i);
    }
    for idx in members.values().filter(|m| m.len() > 1) {
        let k = idx.len();
        let mut q = c.to_vec();
        for _ in 1..k {
            q = derivative(&q);
        }
        let mut z = idx.iter().map(|&i| zs[i]).sum::<Complex64>() / k as f64;
        for _ in 0..50 {
            let (p, dp) = horner_d(&q, z);
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            z -= step;
            if step.norm() <= 4.0 * f64::EPSILON * z.norm().max(1e-300) {
                break;
            }
        }
        let before = idx.iter().map(|&i| backward_error(c, zs[i])).fold(0.0, f64::max);
        if z.is_finite() && backward_error(c, z) <= before.max(8.0 * f64::EPSILON * c.len() as f64) {
            for &i in idx {
                zs[i] = z;
            }
        }
    }
}

/// All roots of `Σ a_j z^j` after stripping trailing zero coefficients.
pub fn poly_roots(c: &PolyCoeffs) -> Result<Roots, RootError> {
    if c.coeffs.iter().any(|a| !a.is_finite()) {
        return Err(RootError::NonFinite);
    }
    let top = c.coeffs.iter().rposition(|a| a.norm() != 0.0).ok_or(RootError::ZeroPolynomial)?;
    let full = &c.coeffs[..=top];
    let low = full.iter().position(|a| a.norm() != 0.0).unwrap();

    let mut roots = vec![Complex64::new(0.0, 0.0); low];
    let reduced = &full[low..];
    match reduced.len() - 1 {
        0 => {}
        1 => roots.push(-reduced[0] / reduced[1]),
        _ => {
            let mut zs = initial_guesses(reduced);
            if !durand_kerner(reduced, &mut zs) {
                let mut ok = aberth(reduced, &mut zs);
                if !ok {
                    zs = initial_guesses(reduced);
                    ok = aberth(reduced, &mut zs);
                }
                let worst = zs.iter().map(|&z| backward_error(reduced, z)).fold(0.0, f64::max);
                if !ok && worst > RESIDUAL_TOL {
                    return Err(RootError::NoConvergence { iterations: MAX_ITER, worst });
                }
            }
            let mut zs: Vec<Complex64> = zs.into_iter().map(|z| polish(reduced, z)).collect();
            refine_clusters(reduced, &mut zs);
            roots.extend(zs);
        }
    }
    let worst = roots.iter().map(|&z| backward_error(full, z)).fold(0.0, f64::max);
    if worst > RESIDUAL_TOL {
        return Err(RootError::NoConvergence { iterations: MAX_ITER, worst });
    }
    let residuals = roots.iter().map(|&z| horner(full, z).norm()).collect();
    Ok(Roots { roots, residuals })
}

/// Smallest distance between a target and a root; infinite for constants.
pub fn min_root_distance(c: &PolyCoeffs, targets: &[Complex64]) -> Result<f64, RootError> {
    Ok(nearest_root(c, targets)?.map_or(f64::INFINITY, |(d, _)| d))
}

/// The distance and the root attaining [`min_root_distance`].
pub fn nearest_root(c: &PolyCoeffs, targets: &[Complex64]) -> Result<Option<(f64, Complex64)>, RootError> {
    let roots = poly_roots(c)?;
    let mut best: Option<(f64, Complex64)> = None;
    for &t in targets {
        for &r in &roots.roots {
            let d = (t - r).norm();
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, r));
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sorted_re(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
        v
    }

    #[test]
    fn linear_and_quadratic() {
        let r = poly_roots(&PolyCoeffs::from_real(&[1.0, 2.0])).unwrap();
        assert_eq!(r.roots, vec![c(-0.5, 0.0)]);
        let r = sorted_re(poly_roots(&PolyCoeffs::from_real(&[1.0, 3.0, 1.0])).unwrap().roots);
        let s5 = 5f64.sqrt();
        assert!((r[0] - c((-3.0 - s5) / 2.0, 0.0)).norm() < 1e-12);
        assert!((r[1] - c((-3.0 + s5) / 2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn double_root() {
        let r = poly_roots(&PolyCoeffs::from_real(&[1.0, 2.0, 1.0])).unwrap();
        for z in r.roots {
            assert!((z + 1.0).norm() < 1e-12, "{z}");
        }
        // (z + 1)^3 (z - 2)
        let r = poly_roots(&PolyCoeffs::from_real(&[-2.0, -5.0, -3.0, 1.0, 1.0])).unwrap();
        let near = |t: f64| r.roots.iter().filter(|z| (**z - t).norm() < 1e-10).count();
        assert_eq!((near(-1.0), near(2.0)), (3, 1));
    }

    #[test]
    fn trailing_and_leading_zeros() {
        // z (z - 2) with padding: 0 - 2z + z^2 + 0 z^3
        let r = sorted_re(poly_roots(&PolyCoeffs::from_real(&[0.0, -2.0, 1.0, 0.0])).unwrap().roots);
        assert_eq!(r.len(), 2);
        assert!(r[0].norm() < 1e-15);
        assert!((r[1] - 2.0).norm() < 1e-12);
        assert!(poly_roots(&PolyCoeffs::from_real(&[3.0, 0.0])).unwrap().roots.is_empty());
        assert_eq!(poly_roots(&PolyCoeffs::from_real(&[0.0, 0.0])), Err(RootError::ZeroPolynomial));
    }

    #[test]
    fn distances() {
        assert_eq!(min_root_distance(&PolyCoeffs::from_real(&[1.0, 2.0]), &[c(0.0, 0.0)]).unwrap(), 0.5);
        let d = min_root_distance(&PolyCoeffs::from_real(&[1.0, 3.0, 1.0]), &[c(0.2, 0.0)]).unwrap();
        assert!((d - (0.2 + (3.0 - 5f64.sqrt()) / 2.0)).abs() < 1e-12);
        assert_eq!(min_root_distance(&PolyCoeffs::from_real(&[2.0]), &[c(0.0, 0.0)]).unwrap(), f64::INFINITY);
    }

    #[test]
    fn roots_of_unity_degree_twenty() {
        let mut a = vec![0.0; 21];
        a[0] = -1.0;
        a[20] = 1.0;
        let r = poly_roots(&PolyCoeffs::from_real(&a)).unwrap();
        assert_eq!(r.roots.len(), 20);
        for z in r.roots {
            assert!((z.norm() - 1.0).abs() < 1e-12);
            assert!((z.powu(20) - 1.0).norm() < 1e-10);
        }
    }

    proptest! {
        #[test]
        fn vieta(coeffs in proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 2..12)) {
            let mut a: Vec<Complex64> = coeffs.into_iter().map(|(re, im)| c(re, im)).collect();
            let n = a.len() - 1;
            if a[0].norm() < 0.05 { a[0] = c(1.0, 0.0); }
            if a[n].norm() < 0.05 { a[n] = c(1.0, 0.0); }
            let roots = poly_roots(&PolyCoeffs::new(a.clone())).unwrap().roots;
            prop_assert_eq!(roots.len(), n);
            let prod: Complex64 = roots.iter().product();
            let sum: Complex64 = roots.iter().sum();
            let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
            let want_prod = a[0] / a[n] * sign;
            let want_sum = -a[n - 1] / a[n];
            prop_assert!((prod - want_prod).norm() <= 1e-8 * (1.0 + want_prod.norm()));
            prop_assert!((sum - want_sum).norm() <= 1e-8 * (1.0 + want_sum.norm()));
        }
    }
}
