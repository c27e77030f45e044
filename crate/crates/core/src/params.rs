//! The parameter triple `(β, γ, λ)` and complex-number plumbing shared by the
//! command line, JSON output and the browser demo.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Edge interactions `β` (for `++` edges), `γ` (for `--` edges) and the
/// external field `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    #[serde(with = "cx")]
    pub beta: Complex64,
    #[serde(with = "cx")]
    pub gamma: Complex64,
    #[serde(with = "cx")]
    pub lambda: Complex64,
}

impl Params {
    pub fn new(beta: Complex64, gamma: Complex64, lambda: Complex64) -> Self {
        Params { beta, gamma, lambda }
    }

    pub fn real(beta: f64, gamma: f64, lambda: f64) -> Self {
        Params::new(beta.into(), gamma.into(), lambda.into())
    }

    /// The parameters of the spin-flipped system, `(γ, β, 1/λ)`. Together
    /// with the factor `λ^n` it reproduces the original partition function.
    pub fn swapped(&self) -> Self {
        Params::new(self.gamma, self.beta, self.lambda.inv())
    }

    pub fn as_array(&self) -> [Complex64; 3] {
        [self.beta, self.gamma, self.lambda]
    }

    pub fn from_array(a: [Complex64; 3]) -> Self {
        Params::new(a[0], a[1], a[2])
    }

    /// Real parts, for membership tests of real anchors.
    pub fn re(&self) -> (f64, f64, f64) {
        (self.beta.re, self.gamma.re, self.lambda.re)
    }

    pub fn is_real(&self) -> bool {
        self.beta.im == 0.0 && self.gamma.im == 0.0 && self.lambda.im == 0.0
    }

    /// `‖ζ − other‖_∞` over the three complex coordinates.
    pub fn dist_inf(&self, other: &Params) -> f64 {
        self.as_array()
            .iter()
            .zip(other.as_array())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid complex literal `{0}` (expected FLOAT, FLOATi or FLOAT(+|-)FLOATi)")]
pub struct ComplexSyntaxError(pub String);

/// Parses `FLOAT`, `FLOATi` or `FLOAT(+|-)FLOATi`, e.g. `"1.5-0.25i"`.
pub fn parse_complex(text: &str) -> Result<Complex64, ComplexSyntaxError> {
    let err = || ComplexSyntaxError(text.to_string());
    let s = text.trim();
    if s.is_empty() {
        return Err(err());
    }
    let float = |t: &str| -> Result<f64, ComplexSyntaxError> {
        // Rust accepts "inf"/"nan" spellings; the grammar does not.
        if t.is_empty() || t.chars().any(|c| c.is_ascii_alphabetic() && c != 'e' && c != 'E') {
            return Err(err());
        }
        t.parse::<f64>().map_err(|_| err())
    };

    let Some(body) = s.strip_suffix('i') else {
        return Ok(Complex64::new(float(s)?, 0.0));
    };
    // Split at the last sign that is neither leading nor part of an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => Ok(Complex64::new(float(&body[..k])?, float(&body[k..])?)),
        None => Ok(Complex64::new(0.0, float(body)?)),
    }
}

/// Formats a complex number so that [`parse_complex`] reads it back exactly.
pub fn format_complex(z: Complex64) -> String {
    if z.im == 0.0 && !z.im.is_sign_negative() {
        format!("{:?}", z.re)
    } else if z.im.is_sign_negative() {
        format!("{:?}{:?}i", z.re, z.im)
    } else {
        format!("{:?}+{:?}i", z.re, z.im)
    }
}

/// Serde adapter writing a complex number as `{"re": .., "im": ..}`.
pub mod cx {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq)]
    pub struct ReIm {
        pub re: f64,
        pub im: f64,
    }

    impl From<Complex64> for ReIm {
        fn from(z: Complex64) -> Self {
            ReIm { re: z.re, im: z.im }
        }
    }

    impl From<ReIm> for Complex64 {
        fn from(z: ReIm) -> Self {
            Complex64::new(z.re, z.im)
        }
    }

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        ReIm::from(*z).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        ReIm::deserialize(d).map(Into::into)
    }

    pub mod vec {
        use super::ReIm;
        use num_complex::Complex64;
        use serde::{Deserialize, Deserializer, Serialize, Serializer};

        pub fn serialize<S: Serializer>(zs: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
            zs.iter().map(|&z| ReIm::from(z)).collect::<Vec<_>>().serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
            Ok(Vec::<ReIm>::deserialize(d)?.into_iter().map(Into::into).collect())
        }
    }
}
