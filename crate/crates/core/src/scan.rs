//! Grid sweeps over two parameter coordinates.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certify::{estimate_delta, membership, real_contraction_margin, DeltaOptions};
use crate::corpus::{corpus, CorpusSelector};
use crate::exact::ExactOracle;
use crate::graph::{Graph, PinnedConfig};
use crate::params::{format_complex, parse_complex, Params};
use crate::roots::nearest_root;
use crate::saw::CycleConvention;
use crate::weitz::{decay_fit, sphere_gaps};

#[derive(Debug, Error)]
pub enum ScanError {
    #[error("invalid scan spec: {0}")]
    Invalid(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// A real coordinate of `(β, γ, λ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coord {
    #[serde(alias = "beta")]
    ReBeta,
    ImBeta,
    #[serde(alias = "gamma")]
    ReGamma,
    ImGamma,
    #[serde(alias = "lambda")]
    ReLambda,
    ImLambda,
}

impl Coord {
    fn set(self, p: &mut Params, x: f64) {
        let (z, re) = match self {
            Coord::ReBeta => (&mut p.beta, true),
            Coord::ImBeta => (&mut p.beta, false),
            Coord::ReGamma => (&mut p.gamma, true),
            Coord::ImGamma => (&mut p.gamma, false),
            Coord::ReLambda => (&mut p.lambda, true),
            Coord::ImLambda => (&mut p.lambda, false),
        };
        if re {
            z.re = x;
        } else {
            z.im = x;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub param: Coord,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Axis {
    /// `min + (max − min)·i/(steps − 1)`.
    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.steps {
            return self.max;
        }
        self.min + (self.max - self.min) * i as f64 / (self.steps - 1) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measurement {
    /// Smallest distance from the cell's `λ` to a root of `Z_G(·)` over the corpus.
    MinRootDistance,
    /// Parameter-set membership (`S1`..`S4`, `none`).
    #[serde(alias = "membership")]
    SetId,
    /// Real contraction margin.
    Eta,
    /// Certified perturbation radius.
    Delta,
    /// Smallest fitted SSM decay rate over the corpus, measured at vertex 0
    /// with the sphere at each distance pinned all `+` versus all `−`.
    DecayRate,
    /// Smallest `|Z_G|` over the corpus.
    AbsZ,
}

/// Fixed values of the parameters not swept, as complex literals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fixed {
    pub beta: String,
    pub gamma: String,
    pub lambda: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub axis1: Axis,
    pub axis2: Axis,
    pub fixed: Fixed,
    pub measurement: Measurement,
    #[serde(default)]
    pub corpus: Option<CorpusSelector>,
    #[serde(default)]
    pub max_degree: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub axis1: f64,
    pub axis2: f64,
    /// Empty when the cell failed.
    pub value: String,
    /// Graph or sample attaining the value, or the cell's error message.
    pub witness: String,
    pub error: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub tool: String,
    pub version: String,
    pub spec: ScanSpec,
    pub rows: usize,
    pub errors: usize,
}

impl ScanSpec {
    /// Parses and validates a JSON spec.
    pub fn from_json(text: &str) -> Result<Self, ScanError> {
        let spec: ScanSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(Params, Vec<Graph>), ScanError> {
        let bad = |s: String| Err(ScanError::Invalid(s));
        for (name, a) in [("axis1", &self.axis1), ("axis2", &self.axis2)] {
            if a.steps < 2 {
                return bad(format!("{name}: steps must be at least 2"));
            }
            if !a.min.is_finite() || !a.max.is_finite() {
                return bad(format!("{name}: range must be finite"));
            }
        }
        if self.axis1.param == self.axis2.param {
            return bad("axes sweep the same coordinate".into());
        }
        let parse = |s: &str| parse_complex(s).map_err(|e| ScanError::Invalid(e.to_string()));
        let base = Params::new(parse(&self.fixed.beta)?, parse(&self.fixed.gamma)?, parse(&self.fixed.lambda)?);
        let needs_graphs = matches!(self.measurement, Measurement::MinRootDistance | Measurement::DecayRate | Measurement::AbsZ);
        let graphs = match (&self.corpus, needs_graphs) {
            (Some(c), _) => corpus(c),
            (None, true) => return bad(format!("{:?} needs a corpus", self.measurement)),
            (None, false) => Vec::new(),
        };
        if needs_graphs && graphs.is_empty() {
            return bad("corpus is empty".into());
        }
        if matches!(self.measurement, Measurement::MinRootDistance | Measurement::AbsZ) {
            let cap = ExactOracle::from_env().max_free;
            if let Some(g) = graphs.iter().find(|g| g.n() > cap) {
                return bad(format!("corpus graph with {} vertices exceeds the oracle cap {cap}", g.n()));
            }
        }
        if matches!(self.measurement, Measurement::SetId | Measurement::Eta | Measurement::Delta) && self.max_degree.is_none() {
            return bad(format!("{:?} needs max_degree", self.measurement));
        }
        Ok((base, graphs))
    }
}

fn describe(i: usize, g: &Graph) -> String {
    format!("graph {i} (n={}, m={})", g.n(), g.edge_count())
}

fn real_point(p: &Params) -> Result<(f64, f64, f64), String> {
    if p.is_real() {
        Ok(p.re())
    } else {
        Err("measurement needs real parameters".into())
    }
}

fn fmt_f(x: f64) -> String {
    format!("{x}")
}

fn decay_points(g: &Graph, p: &Params) -> Result<Vec<(f64, f64)>, String> {
    let samples = sphere_gaps(g, 0, p, CycleConvention::default()).map_err(|e| e.to_string())?;
    Ok(samples.into_iter().filter(|(_, s)| s.gap > 0.0).map(|(d, s)| (d as f64, s.gap)).collect())
}

fn measure(spec: &ScanSpec, graphs: &[Graph], p: &Params) -> Result<(String, String), String> {
    let oracle = ExactOracle::from_env();
    match spec.measurement {
        Measurement::MinRootDistance => {
            let mut best = (f64::INFINITY, String::new());
            for (i, g) in graphs.iter().enumerate() {
                let c = oracle.lambda_coeffs(g, p.beta, p.gamma, &PinnedConfig::new()).map_err(|e| e.to_string())?;
                if let Some((d, r)) = nearest_root(&c, &[p.lambda]).map_err(|e| e.to_string())? {
                    if d < best.0 {
                        best = (d, format!("{} root {}", describe(i, g), format_complex(r)));
                    }
                }
            }
            Ok((fmt_f(best.0), best.1))
        }
        Measurement::SetId => {
            let (b, g, l) = real_point(p)?;
            Ok((membership(b, g, l, spec.max_degree.unwrap()).to_string(), String::new()))
        }
        Measurement::Eta => {
            let (b, g, l) = real_point(p)?;
            let m = real_contraction_margin(b, g, l, spec.max_degree.unwrap()).map_err(|e| e.to_string())?;
            Ok((fmt_f(m.eta), m.set_id.to_string()))
        }
        Measurement::Delta => {
            let (b, g, l) = real_point(p)?;
            let opts = DeltaOptions { seed: spec.seed, ..DeltaOptions::default() };
            let c = estimate_delta(b, g, l, spec.max_degree.unwrap(), &opts).map_err(|e| e.to_string())?;
            Ok((fmt_f(c.delta), c.set_id.to_string()))
        }
        Measurement::DecayRate => {
            let mut best: Option<(f64, String)> = None;
            for (i, g) in graphs.iter().enumerate() {
                let pts = decay_points(g, p)?;
                if pts.len() < 3 {
                    continue;
                }
                let fit = decay_fit(&pts).map_err(|e| e.to_string())?;
                if best.as_ref().is_none_or(|b| fit.rate < b.0) {
                    best = Some((fit.rate, format!("{} r2={}", describe(i, g), fit.r2)));
                }
            }
            let (rate, w) = best.ok_or("no corpus graph has three positive gaps")?;
            Ok((fmt_f(rate), w))
        }
        Measurement::AbsZ => {
            let mut best = (f64::INFINITY, String::new());
            for (i, g) in graphs.iter().enumerate() {
                let z = oracle.partition(g, p, &PinnedConfig::new()).map_err(|e| e.to_string())?.norm();
                if z < best.0 {
                    best = (z, describe(i, g));
                }
            }
            Ok((fmt_f(best.0), best.1))
        }
    }
}

/// One row per grid cell, `axis1` major. Cell failures become error rows.
pub fn run_scan(spec: &ScanSpec) -> Result<Vec<ScanRow>, ScanError> {
    let (base, graphs) = spec.validate()?;
    let (a1, a2) = (spec.axis1, spec.axis2);
    let cells: Vec<(usize, usize)> = (0..a1.steps).flat_map(|i| (0..a2.steps).map(move |j| (i, j))).collect();
    Ok(cells
        .par_iter()
        .map(|&(i, j)| {
            let (x, y) = (a1.value(i), a2.value(j));
            let mut p = base;
            a1.param.set(&mut p, x);
            a2.param.set(&mut p, y);
            match measure(spec, &graphs, &p) {
                Ok((value, witness)) => ScanRow { axis1: x, axis2: y, value, witness, error: false },
                Err(e) => ScanRow { axis1: x, axis2: y, value: String::new(), witness: format!("error: {e}"), error: true },
            }
        })
        .collect())
}

pub fn write_csv<W: Write>(rows: &[ScanRow], out: W) -> Result<(), ScanError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["axis1", "axis2", "value", "witness"])?;
    for r in rows {
        w.write_record([fmt_f(r.axis1), fmt_f(r.axis2), r.value.clone(), r.witness.clone()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn sidecar(spec: &ScanSpec, rows: &[ScanRow]) -> Sidecar {
    Sidecar {
        tool: "spin2".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        spec: spec.clone(),
        rows: rows.len(),
        errors: rows.iter().filter(|r| r.error).count(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(json: &str) -> ScanSpec {
        serde_json::from_str(json).unwrap()
    }

    #[test]
    fn membership_grid() {
        let s = spec(
            r#"{"axis1": {"param": "beta", "min": 0.0, "max": 2.0, "steps": 3},
                "axis2": {"param": "gamma", "min": 0.0, "max": 2.0, "steps": 3},
                "fixed": {"beta": "0", "gamma": "0", "lambda": "1"},
                "measurement": "membership", "max_degree": 3}"#,
        );
        let rows = run_scan(&s).unwrap();
        assert_eq!(rows.len(), 9);
        let cell = rows.iter().find(|r| r.axis1 == 1.0 && r.axis2 == 1.0).unwrap();
        assert_eq!(cell.value, "S1");
    }

    #[test]
    fn root_distance_near_p3_root() {
        let r = (5f64.sqrt() - 3.0) / 2.0;
        let s = ScanSpec {
            axis1: Axis { param: Coord::ReLambda, min: r, max: r + 1.0, steps: 2 },
            axis2: Axis { param: Coord::ImLambda, min: 0.0, max: 1.0, steps: 2 },
            fixed: Fixed { beta: "0".into(), gamma: "1".into(), lambda: "0".into() },
            measurement: Measurement::MinRootDistance,
            corpus: Some(CorpusSelector::Paths(3)),
            max_degree: None,
            seed: 0,
        };
        let rows = run_scan(&s).unwrap();
        assert!(rows[0].value.parse::<f64>().unwrap() < 1e-9);
        assert!(rows[0].witness.starts_with("graph 2"));
    }

    #[test]
    fn errors_stay_in_row() {
        let s = spec(
            r#"{"axis1": {"param": "gamma", "min": 0.0, "max": 1.0, "steps": 2},
                "axis2": {"param": "im_beta", "min": 0.0, "max": 1.0, "steps": 2},
                "fixed": {"beta": "1", "gamma": "1", "lambda": "1"},
                "measurement": "eta", "max_degree": 3}"#,
        );
        let rows = run_scan(&s).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows[1].error && rows[3].error);
        assert!(!rows[2].error);
    }

    #[test]
    fn constant_cells_and_csv() {
        let s = spec(
            r#"{"axis1": {"param": "im_lambda", "min": 0.0, "max": 1.0, "steps": 2},
                "axis2": {"param": "im_gamma", "min": 0.0, "max": 1.0, "steps": 2},
                "fixed": {"beta": "1", "gamma": "1", "lambda": "1"},
                "measurement": "abs_z", "corpus": "paths(1)"}"#,
        );
        let rows = run_scan(&s).unwrap();
        assert_eq!(rows.len(), 4);
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("axis1,axis2,value,witness\n"));
        assert_eq!(text.lines().count(), 5);
    }

    #[test]
    fn nested_grids() {
        let a = Axis { param: Coord::ReLambda, min: -3.0, max: 0.5, steps: 5 };
        let b = Axis { steps: 9, ..a };
        let fine: Vec<f64> = (0..9).map(|i| b.value(i)).collect();
        for i in 0..5 {
            assert!(fine.contains(&a.value(i)));
        }
    }

    #[test]
    fn rejects_bad_specs() {
        let mut s = spec(
            r#"{"axis1": {"param": "beta", "min": 0.0, "max": 2.0, "steps": 1},
                "axis2": {"param": "gamma", "min": 0.0, "max": 2.0, "steps": 3},
                "fixed": {"beta": "0", "gamma": "0", "lambda": "1"},
                "measurement": "set_id", "max_degree": 3}"#,
        );
        assert!(run_scan(&s).is_err());
        s.axis1.steps = 2;
        s.max_degree = None;
        assert!(run_scan(&s).is_err());
    }
}
