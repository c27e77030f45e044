#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spin2_core::corpus::random_graph;
use spin2_core::{Graph, Params, PinnedConfig, Spin};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

/// Sum of weights over all 2^n assignments consistent with `cfg`, written
/// straight from the definition.
pub fn naive_z(g: &Graph, p: &Params, cfg: &PinnedConfig) -> Complex64 {
    let n = g.n();
    let mut z = Complex64::new(0.0, 0.0);
    'outer: for mask in 0u32..(1 << n) {
        let plus = |v: usize| mask >> v & 1 == 1;
        for (v, s) in cfg.iter() {
            if plus(v) != (s == Spin::Plus) {
                continue 'outer;
            }
        }
        let mut w = Complex64::new(1.0, 0.0);
        for v in 0..n {
            if plus(v) {
                w *= p.lambda;
            }
        }
        for &(u, v) in g.edges() {
            match (plus(u), plus(v)) {
                (true, true) => w *= p.beta,
                (false, false) => w *= p.gamma,
                _ => {}
            }
        }
        z += w;
    }
    z
}

pub fn naive_ratio(g: &Graph, v: usize, p: &Params, cfg: &PinnedConfig) -> Complex64 {
    naive_z(g, p, &cfg.clone().with(v, Spin::Plus)) / naive_z(g, p, &cfg.clone().with(v, Spin::Minus))
}

pub fn random_graphs(count: usize, max_n: usize, max_degree: usize, seed: u64) -> Vec<Graph> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let n = r.random_range(1..=max_n);
            random_graph(max_degree, n, &mut r)
        })
        .collect()
}

pub fn positive_params(r: &mut ChaCha8Rng) -> Params {
    Params::real(r.random_range(0.0..3.0), r.random_range(0.2..3.0), r.random_range(0.05..3.0))
}

pub fn complex_params(r: &mut ChaCha8Rng) -> Params {
    let mut c = |lo: f64, hi: f64| Complex64::new(r.random_range(lo..hi), r.random_range(-0.5..0.5));
    Params::new(c(0.0, 2.0), c(0.3, 2.0), c(0.1, 2.0))
}

pub fn path(n: usize) -> Graph {
    spin2_core::corpus::path(n)
}
