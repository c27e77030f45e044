mod common;

use common::*;
use num_complex::Complex64;
use rand::Rng;
use spin2_core::barvinok::error_bound;
use spin2_core::corpus::{corpus, CorpusSelector};
use spin2_core::{
    inverse_power_sums, lambda_coeffs, low_order_coeffs, partition_exact, poly_roots, taylor_log_z, taylor_log_z_swapped, Graph, Params, PinnedConfig,
};

/// `a − b` with the imaginary part reduced to `(−π, π]`.
fn log_diff(a: Complex64, b: Complex64) -> f64 {
    let d = a - b;
    let tau = 2.0 * std::f64::consts::PI;
    Complex64::new(d.re, d.im - tau * (d.im / tau).round()).norm()
}

fn small_graphs() -> Vec<Graph> {
    let mut gs = corpus(&"all-connected(6,3)".parse::<CorpusSelector>().unwrap());
    gs.extend(random_graphs(30, 10, 4, 41));
    gs
}

#[test]
fn power_sums_match_roots() {
    let mut r = rng(40);
    for g in random_graphs(60, 10, 4, 40) {
        let p = complex_params(&mut r);
        let c = lambda_coeffs(&g, p.beta, p.gamma, &PinnedConfig::new()).unwrap();
        let mut a = c.coeffs.clone();
        a.resize(11, Complex64::new(0.0, 0.0));
        let s = inverse_power_sums(&a).unwrap();
        if g.n() == 0 || c.coeffs[1..].iter().all(|x| x.norm() == 0.0) {
            continue;
        }
        let roots = poly_roots(&c).unwrap().roots;
        for k in 1..=10 {
            let direct: Complex64 = roots.iter().map(|z| z.powi(-(k as i32))).sum();
            assert!((s[k - 1] - direct).norm() <= 1e-6 * direct.norm().max(1.0), "k={k}: {} vs {direct}", s[k - 1]);
        }
    }
}

#[test]
fn low_order_coefficients_agree_with_oracle() {
    let mut r = rng(42);
    for g in random_graphs(40, 10, 4, 42) {
        let p = complex_params(&mut r);
        let m = r.random_range(0..=g.n());
        let a = low_order_coeffs(&g, p.beta, p.gamma, m, 1 << 20).unwrap();
        let c = lambda_coeffs(&g, p.beta, p.gamma, &PinnedConfig::new()).unwrap();
        assert!(rel(a[0], p.gamma.powu(g.edge_count() as u32)) < 1e-14);
        for j in 0..=m {
            assert!((a[j] - c.coeffs[j]).norm() <= 1e-12 * c.coeffs[j].norm().max(1.0));
        }
    }
}

#[test]
fn measured_error_within_bound() {
    let mut r = rng(43);
    for g in small_graphs() {
        let (beta, gamma) = (r.random_range(0.0..2.0), r.random_range(0.3..2.0));
        let c = lambda_coeffs(&g, beta.into(), gamma.into(), &PinnedConfig::new()).unwrap();
        let radius = poly_roots(&c).unwrap().roots.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
        let lambda = Complex64::from_polar(0.8 * radius * r.random_range(0.1..1.0), r.random_range(-3.0..3.0));
        let p = Params::new(beta.into(), gamma.into(), lambda);
        let exact = partition_exact(&g, &p, &PinnedConfig::new()).unwrap().ln();
        for m in [1, 3, 6, 10, 20] {
            let est = taylor_log_z(&g, &p, m, Some(radius)).unwrap();
            let err = log_diff(est.log_z_truncated, exact);
            assert!(err <= est.error_bound * (1.0 + 1e-9) + 1e-12, "{g:?} m={m}: {err} > {}", est.error_bound);
        }
    }
}

#[test]
fn error_decays_geometrically() {
    let mut r = rng(44);
    for g in small_graphs().into_iter().filter(|g| g.n() >= 3) {
        let (beta, gamma) = (r.random_range(0.0..2.0), r.random_range(0.3..2.0));
        let c = lambda_coeffs(&g, beta.into(), gamma.into(), &PinnedConfig::new()).unwrap();
        let radius = poly_roots(&c).unwrap().roots.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
        let rho = 0.8;
        let p = Params::new(beta.into(), gamma.into(), Complex64::from_polar(rho * radius, 0.7));
        let exact = partition_exact(&g, &p, &PinnedConfig::new()).unwrap().ln();
        let pts: Vec<(f64, f64)> = (1..=40)
            .map(|m| (m as f64, log_diff(taylor_log_z(&g, &p, m, Some(radius)).unwrap().log_z_truncated, exact)))
            .filter(|&(_, e)| e > 1e-12)
            .collect();
        if pts.len() < 5 {
            continue;
        }
        let fit = spin2_core::decay_fit(&pts).unwrap();
        assert!((-fit.rate).exp() <= rho + 0.05, "{g:?}: ratio {}", (-fit.rate).exp());
    }
}

#[test]
fn bound_formula() {
    assert_eq!(error_bound(10, 3, 0.0), 0.0);
    assert!((error_bound(4, 1, 0.5) - 4.0 * 0.25 / (2.0 * 0.5)).abs() < 1e-15);
    assert!(error_bound(4, 1, 1.0).is_infinite());
}

#[test]
fn swap_reproduces_direct_values() {
    let mut r = rng(45);
    for g in random_graphs(20, 7, 3, 45) {
        let p = Params::real(r.random_range(1.5..3.0), r.random_range(1.5..3.0), r.random_range(2.0..5.0));
        let est = taylor_log_z_swapped(&g, &p, 60, None).unwrap();
        let exact = partition_exact(&g, &p, &PinnedConfig::new()).unwrap();
        if est.error_bound < 1e-10 {
            assert!(rel(est.z_estimate, exact) < 1e-8);
        }
    }
}
