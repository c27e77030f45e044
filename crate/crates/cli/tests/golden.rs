//! End-to-end runs of the `spin2` binary. Each output is parsed into a strict
//! schema, checked against an independent computation and compared with the
//! stored file under `tests/golden/`. Set `SPIN2_BLESS=1` to rewrite those.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde::Deserialize;

fn dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn spin2(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_spin2")).current_dir(dir()).arg("--threads").arg("1").args(args).output().unwrap();
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn check_golden(name: &str, text: &str) {
    let path = dir().join(name);
    if std::env::var_os("SPIN2_BLESS").is_some() {
        std::fs::write(&path, text).unwrap();
        return;
    }
    let want = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden file {name}; rerun with SPIN2_BLESS=1"));
    assert_eq!(text, want, "output differs from {name}");
}

fn ok(args: &[&str], golden: &str) -> String {
    let r = spin2(args);
    assert_eq!(r.code, 0, "{args:?} failed: {}", r.stderr);
    check_golden(golden, &r.stdout);
    r.stdout
}

#[derive(Deserialize, Debug, Clone, Copy)]
#[serde(deny_unknown_fields)]
struct ReIm {
    re: f64,
    im: f64,
}

impl ReIm {
    fn c(self) -> C {
        C(self.re, self.im)
    }
}

/// Minimal complex arithmetic so the checks do not lean on the library.
#[derive(Debug, Clone, Copy, PartialEq)]
struct C(f64, f64);

impl C {
    fn mul(self, o: C) -> C {
        C(self.0 * o.0 - self.1 * o.1, self.0 * o.1 + self.1 * o.0)
    }
    fn add(self, o: C) -> C {
        C(self.0 + o.0, self.1 + o.1)
    }
    fn abs(self) -> f64 {
        self.0.hypot(self.1)
    }
    fn dist(self, o: C) -> f64 {
        C(self.0 - o.0, self.1 - o.1).abs()
    }
}

/// Sum over all spin assignments of the graph file's edges, honouring pins.
fn brute_z(file: &str, beta: C, gamma: C, lambda: C) -> C {
    let text = std::fs::read_to_string(dir().join(file)).unwrap();
    let mut n = 0;
    let mut edges = Vec::new();
    let mut pins = BTreeMap::new();
    for line in text.lines().filter(|l| !l.starts_with('#')) {
        let f: Vec<&str> = line.split_whitespace().collect();
        match f.as_slice() {
            ["n", k] => n = k.parse().unwrap(),
            ["e", u, v] => edges.push((u.parse::<usize>().unwrap(), v.parse::<usize>().unwrap())),
            ["pin", v, s] => {
                pins.insert(v.parse::<usize>().unwrap(), *s == "+");
            }
            _ => {}
        }
    }
    let mut z = C(0.0, 0.0);
    for mask in 0u32..1 << n {
        let plus = |v: usize| mask >> v & 1 == 1;
        if pins.iter().any(|(&v, &s)| plus(v) != s) {
            continue;
        }
        let mut w = C(1.0, 0.0);
        for &(u, v) in &edges {
            match (plus(u), plus(v)) {
                (true, true) => w = w.mul(beta),
                (false, false) => w = w.mul(gamma),
                _ => {}
            }
        }
        for _ in (0..n).filter(|&v| plus(v) && !pins.contains_key(&v)) {
            w = w.mul(lambda);
        }
        z = z.add(w);
    }
    z
}

fn rel(a: C, b: C) -> f64 {
    a.dist(b) / b.abs().max(1e-300)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ZOut {
    #[serde(rename = "Z")]
    z: ReIm,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CoeffsOut {
    coeffs: Vec<ReIm>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RootsOut {
    roots: Vec<ReIm>,
    residuals: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WeitzOut {
    estimate: ReIm,
    ratios: Vec<ReIm>,
    depth: Option<usize>,
    boundary: ReIm,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TaylorOut {
    order: usize,
    log_z_truncated: ReIm,
    z_estimate: ReIm,
    zero_free_radius: f64,
    radius_source: String,
    error_bound: f64,
    swapped: bool,
    warning: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Interval {
    lo: f64,
    hi: f64,
    image_lo: f64,
    image_hi: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CertOut {
    anchor: [f64; 3],
    max_degree: usize,
    set_id: String,
    matches: Vec<String>,
    interval: Interval,
    potential: serde_json::Value,
    eta_real: f64,
    eta: f64,
    #[serde(rename = "M")]
    m: f64,
    epsilon: f64,
    delta: f64,
    caps: BTreeMap<String, f64>,
    empirical: bool,
    seed: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SidecarOut {
    tool: String,
    version: String,
    spec: serde_json::Value,
    rows: usize,
    errors: usize,
}

fn parse<'a, T: Deserialize<'a>>(s: &'a str) -> T {
    serde_json::from_str(s).unwrap_or_else(|e| panic!("schema violation: {e}\n{s}"))
}

#[test]
fn no_arguments_prints_usage_and_exits_2() {
    let out = Command::new(env!("CARGO_BIN_EXE_spin2")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn malformed_input_is_a_usage_error() {
    let r = spin2(&["exact", "--graph", "k2.g", "--beta", "1+", "--gamma", "2", "--lambda", "1"]);
    assert_eq!(r.code, 2);
    let r = spin2(&["exact", "--graph", "missing.g", "--beta", "1", "--gamma", "2", "--lambda", "1"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("missing.g"));
}

#[test]
fn exact_edge() {
    let out: ZOut = parse(&ok(&["exact", "--graph", "k2.g", "--beta", "1", "--gamma", "2", "--lambda", "1.5"], "exact_k2.json"));
    // λ²β + 2λ + γ
    assert!(out.z.c().dist(C(7.25, 0.0)) < 1e-12);
}

#[test]
fn exact_pinned_complex() {
    let (b, g, l) = (C(0.5, 0.25), C(1.5, -0.5), C(0.75, 1.0));
    let out: ZOut = parse(&ok(&["exact", "--graph", "c4_pinned.g", "--beta", "0.5+0.25i", "--gamma", "1.5-0.5i", "--lambda", "0.75+1i"], "exact_c4_pinned.json"));
    assert!(rel(out.z.c(), brute_z("c4_pinned.g", b, g, l)) < 1e-12);
}

#[test]
fn coeffs_hard_core_path() {
    let out: CoeffsOut = parse(&ok(&["coeffs", "--graph", "p3.g", "--beta", "0", "--gamma", "1"], "coeffs_p3.json"));
    // independent sets of P3 by size: 1, 3, 1, 0
    let want = [1.0, 3.0, 1.0, 0.0];
    assert_eq!(out.coeffs.len(), want.len());
    for (a, w) in out.coeffs.iter().zip(want) {
        assert_eq!((a.re, a.im), (w, 0.0));
    }
}

#[test]
fn roots_hard_core_path() {
    let out: RootsOut = parse(&ok(&["roots", "--graph", "p3.g", "--beta", "0", "--gamma", "1"], "roots_p3.json"));
    assert_eq!(out.roots.len(), 2);
    assert_eq!(out.residuals.len(), 2);
    let s5 = 5f64.sqrt();
    for want in [(-3.0 + s5) / 2.0, (-3.0 - s5) / 2.0] {
        assert!(out.roots.iter().any(|r| r.c().dist(C(want, 0.0)) < 1e-12));
    }
    assert!(out.residuals.iter().all(|&r| r < 1e-12));
}

#[test]
fn weitz_full_tree_on_cycle() {
    let args = ["weitz", "--graph", "c5.g", "--beta", "0.5+0.1i", "--gamma", "1.2", "--lambda", "0.8-0.3i"];
    let out: WeitzOut = parse(&ok(&args, "weitz_c5.json"));
    assert_eq!(out.depth, None);
    assert_eq!(out.ratios.len(), 5);
    assert_eq!((out.boundary.re, out.boundary.im), (0.8, -0.3));
    let want = brute_z("c5.g", C(0.5, 0.1), C(1.2, 0.0), C(0.8, -0.3));
    assert!(rel(out.estimate.c(), want) < 1e-12);
    let flipped: WeitzOut = parse(&spin2(&[&args[..], &["--flip-convention"]].concat()).stdout);
    assert!(rel(flipped.estimate.c(), want) < 1e-12);
}

#[test]
fn weitz_depth_from_certificate() {
    let cert = spin2(&["certify", "--beta", "1.5", "--gamma", "1.5", "--lambda", "1", "--delta-max-degree", "3"]);
    assert_eq!(cert.code, 0);
    let path = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cert_15.json");
    std::fs::write(&path, &cert.stdout).unwrap();
    let c: CertOut = parse(&cert.stdout);
    let eps = 0.05;
    let r = spin2(&["weitz", "--graph", "p6.g", "--beta", "1.5", "--gamma", "1.5", "--lambda", "1", "--eps", "0.05", "--cert", path.to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let out: WeitzOut = parse(&r.stdout);
    let depth = ((6.0f64 / eps).ln() / -(1.0 - c.eta).ln()).ceil() as usize;
    assert_eq!(out.depth, Some(depth.max(1)));
    let want = brute_z("p6.g", C(1.5, 0.0), C(1.5, 0.0), C(1.0, 0.0));
    assert!(rel(out.estimate.c(), want) < eps);
}

#[test]
fn weitz_truncated() {
    let out: WeitzOut = parse(&ok(&["weitz", "--graph", "p6.g", "--beta", "1.5", "--gamma", "1.5", "--lambda", "1", "--depth", "2"], "weitz_p6_depth2.json"));
    assert_eq!(out.depth, Some(2));
    let want = brute_z("p6.g", C(1.5, 0.0), C(1.5, 0.0), C(1.0, 0.0));
    // depth 2 on a path still loses information, but only a little at this point
    assert!(rel(out.estimate.c(), want) < 0.05);
    let r = spin2(&["weitz", "--graph", "c4_pinned.g", "--beta", "1", "--gamma", "1", "--lambda", "1"]);
    assert_eq!(r.code, 2);
}

#[test]
fn barvinok_hard_core_path() {
    let out: TaylorOut = parse(&ok(
        &["barvinok", "--graph", "p3.g", "--beta", "0", "--gamma", "1", "--lambda", "0.2", "--order", "20", "--radius", "0.38"],
        "barvinok_p3.json",
    ));
    assert_eq!(out.order, 20);
    assert_eq!(out.radius_source, "supplied");
    assert!(!out.swapped && out.warning.is_none());
    assert_eq!(out.zero_free_radius, 0.38);
    // 1 + 3λ + λ² at λ = 0.2
    assert!(out.z_estimate.c().dist(C(1.64, 0.0)) < 1e-6);
    assert!((out.log_z_truncated.re - 1.64f64.ln()).abs() <= out.error_bound);
}

#[test]
fn barvinok_swapped_with_scanned_radius() {
    let out: TaylorOut = parse(&ok(
        &["barvinok", "--graph", "c5.g", "--beta", "2", "--gamma", "2", "--lambda", "3", "--eps", "1e-10", "--swap-bg-inv-lambda"],
        "barvinok_c5_swapped.json",
    ));
    assert!(out.swapped);
    assert_eq!(out.radius_source, "scanned");
    let want = brute_z("c5.g", C(2.0, 0.0), C(2.0, 0.0), C(3.0, 0.0));
    assert!(rel(out.z_estimate.c(), want) < 1e-8);
}

#[test]
fn certify_anchor() {
    let out: CertOut = parse(&ok(&["certify", "--beta", "1", "--gamma", "1", "--lambda", "1", "--delta-max-degree", "3"], "certify_111.json"));
    assert_eq!(out.anchor, [1.0, 1.0, 1.0]);
    assert_eq!(out.max_degree, 3);
    assert_eq!(out.set_id, "S1");
    assert!(out.matches.contains(&out.set_id));
    // F is constant when β = γ = 1, so the real margin is total.
    assert_eq!(out.eta_real, 1.0);
    assert!(out.eta > 0.0 && out.eta <= out.eta_real);
    assert!(out.delta > 0.0 && out.m > 0.0 && out.epsilon > 0.0);
    assert!(out.caps.values().all(|&c| c >= out.delta));
    assert!(out.interval.lo <= out.interval.hi && out.interval.image_lo <= out.interval.image_hi);
    assert!(out.potential.is_object());
    assert!(out.empirical);
    assert_eq!(out.seed, 0);
}

#[test]
fn certify_outside_all_sets() {
    let r = spin2(&["certify", "--beta", "5", "--gamma", "5", "--lambda", "1", "--delta-max-degree", "3"]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("no set matched"));
    assert!(r.stdout.is_empty());
}

#[test]
fn ssm_probe_path() {
    let text = ok(&["ssm-probe", "--graph", "p6.g", "--beta", "2", "--gamma", "1.5", "--lambda", "1", "--vertex", "0"], "ssm_p6.csv");
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("distance,gap"));
    let rows: Vec<(usize, f64)> = lines
        .map(|l| {
            let (d, g) = l.split_once(',').unwrap();
            (d.parse().unwrap(), g.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.iter().map(|r| r.0).collect::<Vec<_>>(), vec![1, 2, 3, 4, 5]);
    // On a path the gap with the sphere at distance d pinned is the gap of a
    // single pinned vertex, computable as a 2x2 transfer matrix product.
    let (b, g, l) = (2.0f64, 1.5f64, 1.0f64);
    for &(d, gap) in &rows {
        let prob = |plus: bool| {
            let (mut zp, mut zm) = if plus { (1.0, 0.0) } else { (0.0, 1.0) };
            for _ in 0..d {
                (zp, zm) = (l * (b * zp + zm), zp + g * zm);
            }
            // vertices past the pin contribute the same factor to both spins
            zp / (zp + zm)
        };
        assert!((gap - (prob(true) - prob(false)).abs()).abs() < 1e-12, "distance {d}");
    }
    assert!(rows.windows(2).all(|w| w[1].1 < w[0].1));
}

#[test]
fn scan_membership_grid() {
    let out = Path::new(env!("CARGO_TARGET_TMPDIR")).join("membership.csv");
    let r = spin2(&["scan", "--spec", "membership_scan.json", "--out", out.to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let csv = std::fs::read_to_string(&out).unwrap();
    check_golden("membership_scan.csv", &csv);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("axis1,axis2,value,witness"));
    let cells: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(cells.len(), 25);
    let at = |b: &str, g: &str| cells.iter().find(|c| c[0] == b && c[1] == g).unwrap()[2];
    assert_eq!(at("1", "1"), "S1");
    // every cell has √(βγ) in (1/3, 3), so some set always matches
    assert!(cells.iter().all(|c| ["S1", "S3", "S4"].contains(&c[2])));
    let side: SidecarOut = parse(&std::fs::read_to_string(out.with_file_name("membership.csv.json")).unwrap());
    assert_eq!(side.tool, "spin2");
    assert_eq!(side.version, env!("CARGO_PKG_VERSION"));
    assert_eq!((side.rows, side.errors), (25, 0));
    assert_eq!(side.spec["measurement"], "set_id");
}

#[test]
fn scan_refuses_to_overwrite_its_spec() {
    let tmp = Path::new(env!("CARGO_TARGET_TMPDIR"));
    let spec = tmp.join("self.json");
    std::fs::copy(dir().join("membership_scan.json"), &spec).unwrap();
    let before = std::fs::read_to_string(&spec).unwrap();
    let r = spin2(&["scan", "--spec", spec.to_str().unwrap(), "--out", spec.to_str().unwrap()]);
    assert_eq!(r.code, 2);
    assert_eq!(std::fs::read_to_string(&spec).unwrap(), before);
}

#[test]
fn thread_count_does_not_change_output() {
    let args = ["weitz", "--graph", "c5.g", "--beta", "0.5+0.1i", "--gamma", "1.2", "--lambda", "0.8-0.3i"];
    let one = spin2(&args).stdout;
    let out = Command::new(env!("CARGO_BIN_EXE_spin2")).current_dir(dir()).args(["--threads", "4"]).args(args).output().unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), one);
}
