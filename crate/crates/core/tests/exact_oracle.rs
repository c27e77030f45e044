mod common;

use common::*;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use spin2_core::{lambda_coeffs, partition_exact, poly_roots, ExactOracle, Graph, Params, PinnedConfig, PolyCoeffs, Spin};

#[test]
fn partition_matches_definition_on_random_graphs() {
    let mut r = rng(11);
    for g in random_graphs(60, 9, 4, 1) {
        let p = complex_params(&mut r);
        let mut cfg = PinnedConfig::new();
        for v in 0..g.n() {
            if r.random_bool(0.2) {
                cfg.pin(v, if r.random_bool(0.5) { Spin::Plus } else { Spin::Minus });
            }
        }
        let z = partition_exact(&g, &p, &cfg).unwrap();
        let want = naive_z(&g, &p, &cfg);
        assert!(rel(z, want) < 1e-12, "{g:?} {p:?}");
    }
}

#[test]
fn horner_matches_partition_up_to_ten_vertices() {
    let mut r = rng(5);
    for g in random_graphs(40, 10, 4, 2) {
        let p = complex_params(&mut r);
        let c = lambda_coeffs(&g, p.beta, p.gamma, &PinnedConfig::new()).unwrap();
        let z = partition_exact(&g, &p, &PinnedConfig::new()).unwrap();
        assert!(rel(c.eval(p.lambda), z) < 1e-10);
    }
}

#[test]
fn pinning_decomposition() {
    let mut r = rng(9);
    for g in random_graphs(40, 8, 4, 3) {
        let p = complex_params(&mut r);
        let cfg = PinnedConfig::new().with(0, Spin::Minus);
        for v in 1..g.n() {
            let plus = partition_exact(&g, &p, &cfg.clone().with(v, Spin::Plus)).unwrap();
            let minus = partition_exact(&g, &p, &cfg.clone().with(v, Spin::Minus)).unwrap();
            assert!(rel(plus + minus, partition_exact(&g, &p, &cfg).unwrap()) < 1e-12);
        }
    }
}

#[test]
fn zero_field_with_minus_pins() {
    for g in random_graphs(20, 8, 3, 4) {
        let p = Params::new(Complex64::new(0.4, 1.0), Complex64::new(1.3, -0.2), Complex64::new(0.0, 0.0));
        let cfg: PinnedConfig = (0..g.n()).step_by(2).map(|v| (v, Spin::Minus)).collect();
        let z = partition_exact(&g, &p, &cfg).unwrap();
        assert!(rel(z, p.gamma.powu(g.edge_count() as u32)) < 1e-12);
    }
}

#[test]
fn documented_examples() {
    let k2 = Graph::from_edges(2, &[(0, 1)]).unwrap();
    let none = PinnedConfig::new();
    let z = partition_exact(&k2, &Params::real(1.0, 2.0, 1.5), &none).unwrap();
    assert!((z - 7.25).norm() < 1e-14);
    let c3 = spin2_core::corpus::cycle(3);
    assert_eq!(partition_exact(&c3, &Params::real(1.0, 1.0, 1.0), &none).unwrap(), Complex64::new(8.0, 0.0));
    let c = lambda_coeffs(&path(3), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), &none).unwrap();
    assert_eq!(c, PolyCoeffs::from_real(&[1.0, 3.0, 1.0, 0.0]));
}

#[test]
fn cap_from_environment_style_override() {
    let g = path(12);
    assert!(ExactOracle::new(10).partition(&g, &Params::real(1.0, 1.0, 1.0), &PinnedConfig::new()).is_err());
    assert!(ExactOracle::new(12).partition(&g, &Params::real(1.0, 1.0, 1.0), &PinnedConfig::new()).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn vieta_on_graph_polynomials(seed in 0u64..10_000) {
        let mut r = rng(seed);
        let g = random_graphs(1, 9, 4, seed).pop().unwrap();
        let p = complex_params(&mut r);
        let c = lambda_coeffs(&g, p.beta, p.gamma, &PinnedConfig::new()).unwrap();
        let a = &c.coeffs;
        let deg = a.iter().rposition(|x| x.norm() > 0.0).unwrap();
        prop_assume!(deg >= 1);
        let roots = poly_roots(&c).unwrap().roots;
        prop_assert_eq!(roots.len(), deg);
        let sum: Complex64 = roots.iter().sum();
        let prod: Complex64 = roots.iter().product();
        let sign = if deg % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!(rel(sum, -a[deg - 1] / a[deg]) < 1e-8 || (sum + a[deg - 1] / a[deg]).norm() < 1e-8);
        prop_assert!(rel(prod, a[0] / a[deg] * sign) < 1e-8);
    }
}

