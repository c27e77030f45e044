use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;
use spin2_core::barvinok::{scanned_radius, RadiusSource};
use spin2_core::certify::DeltaOptions;
use spin2_core::params::cx;
use spin2_core::scan::{sidecar, write_csv};
use spin2_core::{
    choose_order, estimate_delta, fptas_depth, parse_complex, parse_graph, poly_roots, run_scan, sphere_gaps, taylor_log_z, taylor_log_z_swapped,
    weitz_partition, ContractionCert, CycleConvention, Depth, ExactOracle, Graph, Params, PinnedConfig, SawOptions, ScanSpec,
};

/// Partition functions of 2-spin systems with complex parameters.
#[derive(Parser)]
#[command(name = "spin2", version, arg_required_else_help = true)]
struct Cli {
    /// Worker threads; 1 gives the reference deterministic mode.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct GraphArg {
    /// Graph file (`n`, `e u v` and `pin v +|-` lines).
    #[arg(long)]
    graph: PathBuf,
}

#[derive(Args)]
struct EdgeParams {
    #[arg(long, value_parser = complex_arg, allow_hyphen_values = true)]
    beta: Complex64,
    #[arg(long, value_parser = complex_arg, allow_hyphen_values = true)]
    gamma: Complex64,
}

#[derive(Args)]
struct AllParams {
    #[command(flatten)]
    edge: EdgeParams,
    #[arg(long, value_parser = complex_arg, allow_hyphen_values = true)]
    lambda: Complex64,
}

impl AllParams {
    fn params(&self) -> Params {
        Params::new(self.edge.beta, self.edge.gamma, self.lambda)
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact partition function by enumeration.
    Exact {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        params: AllParams,
    },
    /// Coefficients of Z as a polynomial in lambda.
    Coeffs {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        params: EdgeParams,
    },
    /// Zeros of Z in the lambda plane.
    Roots {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        params: EdgeParams,
    },
    /// Weitz's self-avoiding-walk tree algorithm.
    Weitz {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        params: AllParams,
        /// Truncation depth; full tree when neither this nor --eps is given.
        #[arg(long, conflicts_with_all = ["eps", "cert"])]
        depth: Option<usize>,
        /// Target relative error; the depth comes from the certificate's eta.
        #[arg(long, requires = "cert")]
        eps: Option<f64>,
        /// Certificate JSON as written by `certify`.
        #[arg(long, requires = "eps")]
        cert: Option<PathBuf>,
        /// Value of free nodes cut off by the depth limit (default lambda).
        #[arg(long, value_parser = complex_arg, allow_hyphen_values = true)]
        boundary: Option<Complex64>,
        #[arg(long)]
        flip_convention: bool,
    },
    /// Taylor interpolation of log Z around lambda = 0.
    Barvinok {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        params: AllParams,
        #[arg(long, required_unless_present = "eps", conflicts_with = "eps")]
        order: Option<usize>,
        /// Target error; picks the order from |lambda|/radius.
        #[arg(long)]
        eps: Option<f64>,
        /// Zero-free radius; scanned from the exact zeros when omitted.
        #[arg(long)]
        radius: Option<f64>,
        /// Expand Z_{gamma,beta}(1/lambda) instead and multiply by lambda^n.
        #[arg(long)]
        swap_bg_inv_lambda: bool,
    },
    /// Real contraction margin and complex neighbourhood radius at a point.
    Certify {
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
        #[arg(long, allow_hyphen_values = true)]
        gamma: f64,
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long)]
        delta_max_degree: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Marginal gap at a vertex with each sphere around it pinned + versus -.
    SsmProbe {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        params: AllParams,
        #[arg(long, default_value_t = 0)]
        vertex: usize,
        #[arg(long)]
        flip_convention: bool,
    },
    /// Grid sweep described by a JSON spec; writes CSV plus a `<out>.json` sidecar.
    Scan {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn complex_arg(s: &str) -> Result<Complex64, String> {
    parse_complex(s).map_err(|e| e.to_string())
}

enum Failure {
    Usage(String),
    Domain(String),
}

fn domain<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Domain(e.to_string())
}

fn read_input(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn load_graph(arg: &GraphArg) -> Result<(Graph, PinnedConfig), Failure> {
    parse_graph(&read_input(&arg.graph)?).map_err(|e| Failure::Usage(format!("{}: {e}", arg.graph.display())))
}

fn unpinned(arg: &GraphArg, what: &str) -> Result<Graph, Failure> {
    let (g, cfg) = load_graph(arg)?;
    if !cfg.is_empty() {
        return Err(Failure::Usage(format!("{what} does not take pinned vertices")));
    }
    Ok(g)
}

/// `data.csv` gets `data.csv.json`.
fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

fn same_file(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(a), Ok(b)) => a == b,
        _ => a == b,
    }
}

fn convention(flip: bool) -> CycleConvention {
    if flip {
        CycleConvention::default().flipped()
    } else {
        CycleConvention::default()
    }
}

fn emit_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(domain)?;
    println!("{text}");
    Ok(())
}

#[derive(Serialize)]
struct ZOut {
    #[serde(rename = "Z", with = "cx")]
    z: Complex64,
}

fn run(cmd: Cmd) -> Result<(), Failure> {
    let oracle = ExactOracle::from_env();
    match cmd {
        Cmd::Exact { graph, params } => {
            let (g, cfg) = load_graph(&graph)?;
            let z = oracle.partition(&g, &params.params(), &cfg).map_err(domain)?;
            emit_json(&ZOut { z })
        }
        Cmd::Coeffs { graph, params } => {
            let (g, cfg) = load_graph(&graph)?;
            emit_json(&oracle.lambda_coeffs(&g, params.beta, params.gamma, &cfg).map_err(domain)?)
        }
        Cmd::Roots { graph, params } => {
            let (g, cfg) = load_graph(&graph)?;
            let c = oracle.lambda_coeffs(&g, params.beta, params.gamma, &cfg).map_err(domain)?;
            emit_json(&poly_roots(&c).map_err(domain)?)
        }
        Cmd::Weitz { graph, params, depth, eps, cert, boundary, flip_convention } => {
            let g = unpinned(&graph, "weitz")?;
            let depth = match (depth, eps, cert) {
                (Some(d), _, _) => Depth::Limit(d),
                (None, Some(eps), Some(path)) => {
                    let cert: ContractionCert = serde_json::from_str(&read_input(&path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
                    Depth::Limit(fptas_depth(g.n(), eps, cert.eta).map_err(domain)?)
                }
                _ => Depth::Full,
            };
            let opts = SawOptions { depth, boundary, convention: convention(flip_convention) };
            emit_json(&weitz_partition(&g, &params.params(), &opts).map_err(domain)?)
        }
        Cmd::Barvinok { graph, params, order, eps, radius, swap_bg_inv_lambda } => {
            let g = unpinned(&graph, "barvinok")?;
            let p = params.params();
            let (b, c, l) = if swap_bg_inv_lambda { (p.gamma, p.beta, p.lambda.inv()) } else { (p.beta, p.gamma, p.lambda) };
            let scanned = radius.is_none() && eps.is_some();
            let radius = match (radius, eps) {
                (Some(r), _) => Some(r),
                (None, Some(_)) => Some(scanned_radius(&g, b, c, &oracle).map_err(domain)?),
                (None, None) => None,
            };
            let m = match (order, eps) {
                (Some(m), _) => m,
                (None, Some(eps)) => choose_order(g.n(), eps, l.norm() / radius.unwrap_or(f64::INFINITY)).map_err(domain)?,
                (None, None) => unreachable!("clap requires --order or --eps"),
            };
            let est = if swap_bg_inv_lambda { taylor_log_z_swapped(&g, &p, m, radius) } else { taylor_log_z(&g, &p, m, radius) };
            let mut est = est.map_err(domain)?;
            if scanned {
                est.radius_source = RadiusSource::Scanned;
            }
            emit_json(&est)
        }
        Cmd::Certify { beta, gamma, lambda, delta_max_degree, seed } => {
            let opts = DeltaOptions { seed, ..DeltaOptions::default() };
            emit_json(&estimate_delta(beta, gamma, lambda, delta_max_degree, &opts).map_err(domain)?)
        }
        Cmd::SsmProbe { graph, params, vertex, flip_convention } => {
            let g = unpinned(&graph, "ssm-probe")?;
            if vertex >= g.n() {
                return Err(Failure::Usage(format!("vertex {vertex} out of range for {} vertices", g.n())));
            }
            let rows = sphere_gaps(&g, vertex, &params.params(), convention(flip_convention)).map_err(domain)?;
            let mut out = std::io::stdout().lock();
            let mut w = || -> std::io::Result<()> {
                writeln!(out, "distance,gap")?;
                for (d, s) in &rows {
                    writeln!(out, "{d},{}", s.gap)?;
                }
                Ok(())
            };
            w().map_err(domain)
        }
        Cmd::Scan { spec, out } => {
            let side = sidecar_path(&out);
            if [&out, &side].iter().any(|p| same_file(p, &spec)) {
                return Err(Failure::Usage(format!("output would overwrite the scan spec {}", spec.display())));
            }
            let text = read_input(&spec)?;
            let spec = ScanSpec::from_json(&text).map_err(|e| Failure::Usage(format!("{}: {e}", spec.display())))?;
            let rows = run_scan(&spec).map_err(domain)?;
            let file = fs::File::create(&out).map_err(|e| Failure::Usage(format!("cannot create {}: {e}", out.display())))?;
            write_csv(&rows, std::io::BufWriter::new(file)).map_err(domain)?;
            let meta = serde_json::to_string_pretty(&sidecar(&spec, &rows)).map_err(domain)?;
            fs::write(&side, meta + "\n").map_err(|e| Failure::Usage(format!("cannot create {}: {e}", side.display())))?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Domain(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
