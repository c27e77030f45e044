//! The tree recursion `F_s`, its conjugates `F^φ_s = φ ∘ F_s ∘ φ⁻¹` and
//! their gradients in the children and in the parameters.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::Params;
use crate::potential::{Potential, PotentialError, PotentialKind};

/// Child profile of a tree node: `s1` children pinned `+`, `s2` pinned `−`,
/// `k` free.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Signature {
    pub s1: usize,
    pub s2: usize,
    pub k: usize,
}

impl Signature {
    pub fn new(s1: usize, s2: usize, k: usize) -> Self {
        Signature { s1, s2, k }
    }

    pub fn norm(&self) -> usize {
        self.s1 + self.s2 + self.k
    }

    /// All signatures with `‖s‖₁ = d`.
    pub fn with_norm(d: usize) -> impl Iterator<Item = Signature> {
        (0..=d).flat_map(move |s1| (0..=d - s1).map(move |s2| Signature::new(s1, s2, d - s1 - s2)))
    }

    /// All signatures with `‖s‖₁ ≤ d`.
    pub fn up_to(d: usize) -> impl Iterator<Item = Signature> {
        (0..=d).flat_map(Signature::with_norm)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RecursionError {
    #[error("gamma is zero")]
    GammaZero,
    #[error("pole: child value {0} equals -gamma")]
    Pole(Complex64),
    #[error("beta = 0 with a child pinned to +")]
    BetaZeroPlusChild,
    #[error("signature expects {expected} free children, got {got}")]
    Arity { expected: usize, got: usize },
    #[error(transparent)]
    Potential(#[from] PotentialError),
}

fn check(p: &Params, s: Signature, k: usize) -> Result<(), RecursionError> {
    if s.k != k {
        return Err(RecursionError::Arity { expected: s.k, got: k });
    }
    if p.gamma == Complex64::new(0.0, 0.0) {
        return Err(RecursionError::GammaZero);
    }
    if p.beta == Complex64::new(0.0, 0.0) && s.s1 > 0 {
        return Err(RecursionError::BetaZeroPlusChild);
    }
    Ok(())
}

/// `β^{s1} γ^{−s2} Π (βx_i + 1)/(x_i + γ)`, so that `F_s = λ · G`.
fn without_lambda(p: &Params, s: Signature, xs: &[Complex64]) -> Result<Complex64, RecursionError> {
    let mut g = p.beta.powu(s.s1 as u32) / p.gamma.powu(s.s2 as u32);
    for &x in xs {
        let den = x + p.gamma;
        if den == Complex64::new(0.0, 0.0) {
            return Err(RecursionError::Pole(x));
        }
        g *= (p.beta * x + 1.0) / den;
    }
    Ok(g)
}

/// `F_s(x) = λ β^{s1} γ^{−s2} Π_i (βx_i + 1)/(x_i + γ)`.
pub fn recursion_f(p: &Params, s: Signature, xs: &[Complex64]) -> Result<Complex64, RecursionError> {
    if s.k != xs.len() {
        return Err(RecursionError::Arity { expected: s.k, got: xs.len() });
    }
    if p.lambda == Complex64::new(0.0, 0.0) {
        return Ok(p.lambda);
    }
    check(p, s, xs.len())?;
    Ok(p.lambda * without_lambda(p, s, xs)?)
}

fn preimages(phi: &Potential, xs_img: &[Complex64]) -> Result<Vec<Complex64>, RecursionError> {
    xs_img.iter().map(|&x| phi.inverse(x).map_err(Into::into)).collect()
}

/// `F^φ_s(x) = φ(F_s(φ⁻¹(x_1), …, φ⁻¹(x_k)))`.
pub fn transformed_f(p: &Params, s: Signature, phi: &Potential, xs_img: &[Complex64]) -> Result<Complex64, RecursionError> {
    let ys = preimages(phi, xs_img)?;
    Ok(phi.forward(recursion_f(p, s, &ys)?)?)
}

/// `∂F^φ_s/∂x_i` for each free child.
pub fn grad_transformed_f(p: &Params, s: Signature, phi: &Potential, xs_img: &[Complex64]) -> Result<Vec<Complex64>, RecursionError> {
    check(p, s, xs_img.len())?;
    grad_at_preimages(p, s, phi, &preimages(phi, xs_img)?)
}

/// [`grad_transformed_f`] with the children given by their preimages `y_i = φ⁻¹(x_i)`.
pub fn grad_at_preimages(p: &Params, s: Signature, phi: &Potential, ys: &[Complex64]) -> Result<Vec<Complex64>, RecursionError> {
    check(p, s, ys.len())?;
    let shift = p.beta * p.gamma - 1.0;
    if phi.kind() == PotentialKind::Log {
        // Closed form (βγ − 1)/(βe^x + γe^{−x} + 1 + βγ), with e^x = y.
        return Ok(ys.iter().map(|&y| shift / (p.beta * y + p.gamma / y + 1.0 + p.beta * p.gamma)).collect());
    }
    let f = recursion_f(p, s, ys)?;
    let outer = phi.derivative(f)? * f * shift;
    ys.iter()
        .map(|&y| {
            let den = (p.beta * y + 1.0) * (y + p.gamma);
            if den == Complex64::new(0.0, 0.0) {
                return Err(RecursionError::Pole(y));
            }
            Ok(outer / den / phi.derivative(y)?)
        })
        .collect()
}

/// `‖∇_x F^φ_s‖₁`.
pub fn grad_norm(p: &Params, s: Signature, phi: &Potential, xs_img: &[Complex64]) -> Result<f64, RecursionError> {
    Ok(grad_transformed_f(p, s, phi, xs_img)?.iter().map(|d| d.norm()).sum())
}

/// Partials `(∂β, ∂γ, ∂λ)` of `F^φ_s` at fixed transformed children.
pub fn grad_params_f(p: &Params, s: Signature, phi: &Potential, xs_img: &[Complex64]) -> Result<[Complex64; 3], RecursionError> {
    check(p, s, xs_img.len())?;
    grad_params_at_preimages(p, s, phi, &preimages(phi, xs_img)?)
}

/// [`grad_params_f`] with the children given by their preimages.
pub fn grad_params_at_preimages(p: &Params, s: Signature, phi: &Potential, ys: &[Complex64]) -> Result<[Complex64; 3], RecursionError> {
    check(p, s, ys.len())?;
    let g = without_lambda(p, s, ys)?;
    let f = p.lambda * g;
    let d_lambda = g;
    let mut d_beta: Complex64 = ys.iter().map(|&y| y / (p.beta * y + 1.0)).sum::<Complex64>() * f;
    if s.s1 > 0 {
        // λ s1 β^{s1−1} γ^{−s2} Π(...), written without dividing by β.
        let mut rest = p.beta.powu(s.s1 as u32 - 1) / p.gamma.powu(s.s2 as u32);
        for &y in ys {
            rest *= (p.beta * y + 1.0) / (y + p.gamma);
        }
        d_beta += p.lambda * rest * s.s1 as f64;
    }
    let d_gamma = f * (-(s.s2 as f64) / p.gamma - ys.iter().map(|&y| (y + p.gamma).inv()).sum::<Complex64>());
    let outer = phi.derivative(f)?;
    Ok([outer * d_beta, outer * d_gamma, outer * d_lambda])
}
