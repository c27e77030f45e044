//! WebAssembly bindings behind `www/index.html`. The plain functions are what
//! the page calls through the `#[wasm_bindgen]` wrappers at the bottom.

use num_complex::Complex64;
use spin2_core::corpus::{cycle, path, regular_tree, star};
use spin2_core::{
    lambda_coeffs, membership, parse_complex, parse_graph, poly_roots, sphere_gaps, CycleConvention, Graph, Params, PinnedConfig, SetId,
};
use wasm_bindgen::prelude::*;

/// Builds a graph from `path N`, `cycle N`, `star K`, `tree D DEPTH` or the
/// line format accepted by the CLI.
pub fn graph_from_text(text: &str) -> Result<(Graph, PinnedConfig), String> {
    let words: Vec<&str> = text.split_whitespace().collect();
    let num = |s: &str| s.parse::<usize>().map_err(|e| format!("{s}: {e}"));
    match words.as_slice() {
        ["path", n] => Ok((path(num(n)?.max(1)), PinnedConfig::new())),
        ["cycle", n] if num(n)? >= 3 => Ok((cycle(num(n)?), PinnedConfig::new())),
        ["cycle", _] => Err("a cycle needs at least 3 vertices".into()),
        ["star", k] => Ok((star(num(k)?), PinnedConfig::new())),
        ["tree", d, depth] if num(d)? >= 2 => Ok((regular_tree(num(d)?, num(depth)?), PinnedConfig::new())),
        ["tree", ..] => Err("a tree needs degree at least 2".into()),
        _ => parse_graph(text).map_err(|e| e.to_string()),
    }
}

fn cx(s: &str) -> Result<Complex64, String> {
    parse_complex(s).map_err(|e| e.to_string())
}

/// Zeros of `Z_G` in the λ plane, flattened as `[re0, im0, re1, im1, ...]`.
pub fn lambda_zeros(graph: &str, beta: &str, gamma: &str) -> Result<Vec<f64>, String> {
    let (g, cfg) = graph_from_text(graph)?;
    let c = lambda_coeffs(&g, cx(beta)?, cx(gamma)?, &cfg).map_err(|e| e.to_string())?;
    let roots = poly_roots(&c).map_err(|e| e.to_string())?;
    Ok(roots.roots.iter().flat_map(|z| [z.re, z.im]).collect())
}

fn set_code(s: SetId) -> u8 {
    match s {
        SetId::None => 0,
        SetId::S1 => 1,
        SetId::S2 => 2,
        SetId::S3 => 3,
        SetId::S4 => 4,
    }
}

/// Set index (0 for none, 1 to 4 for S1 to S4) on a `steps x steps` grid over
/// `[0, beta_max] x [0, gamma_max]`, row-major with γ increasing down the rows.
pub fn membership_map(lambda: f64, max_degree: usize, beta_max: f64, gamma_max: f64, steps: usize) -> Result<Vec<u8>, String> {
    if steps < 2 || max_degree < 3 {
        return Err("need at least 2 steps and max degree at least 3".into());
    }
    let at = |max: f64, i: usize| max * i as f64 / (steps - 1) as f64;
    Ok((0..steps)
        .flat_map(|j| (0..steps).map(move |i| (at(beta_max, i), at(gamma_max, j))))
        .map(|(b, g)| set_code(membership(b, g, lambda, max_degree)))
        .collect())
}

/// Marginal gap at vertex 0 with the sphere at each distance pinned all `+`
/// versus all `−`, as `[d1, gap1, d2, gap2, ...]`.
pub fn ssm_decay(graph: &str, beta: &str, gamma: &str, lambda: &str) -> Result<Vec<f64>, String> {
    let (g, cfg) = graph_from_text(graph)?;
    if !cfg.is_empty() {
        return Err("pinned vertices are not used here".into());
    }
    if g.n() > 400 {
        return Err(format!("{} vertices is too many for the browser", g.n()));
    }
    let p = Params::new(cx(beta)?, cx(gamma)?, cx(lambda)?);
    let rows = sphere_gaps(&g, 0, &p, CycleConvention::default()).map_err(|e| e.to_string())?;
    Ok(rows.iter().flat_map(|(d, s)| [*d as f64, s.gap]).collect())
}

#[wasm_bindgen(js_name = lambdaZeros)]
pub fn lambda_zeros_js(graph: &str, beta: &str, gamma: &str) -> Result<Vec<f64>, JsError> {
    lambda_zeros(graph, beta, gamma).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = membershipMap)]
pub fn membership_map_js(lambda: f64, max_degree: usize, beta_max: f64, gamma_max: f64, steps: usize) -> Result<Vec<u8>, JsError> {
    membership_map(lambda, max_degree, beta_max, gamma_max, steps).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = ssmDecay)]
pub fn ssm_decay_js(graph: &str, beta: &str, gamma: &str, lambda: &str) -> Result<Vec<f64>, JsError> {
    ssm_decay(graph, beta, gamma, lambda).map_err(|e| JsError::new(&e))
}
