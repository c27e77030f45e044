//! Partition functions of 2-spin systems on bounded-degree graphs with
//! complex parameters: brute-force ground truth, Weitz's self-avoiding-walk
//! recursion, Barvinok's Taylor interpolation and the contraction
//! certificates that tie them together.

pub mod barvinok;
pub mod certify;
pub mod corpus;
pub mod exact;
pub mod graph;
pub mod params;
pub mod potential;
pub mod quadrature;
pub mod recursion;
pub mod roots;
pub mod saw;
pub mod scan;
pub mod weitz;

pub use exact::{lambda_coeffs, marginal_ratio_exact, partition_exact, ExactError, ExactOracle, MarginalRatio, PolyCoeffs};
pub use graph::{dist_to_set, is_feasible, parse_graph, Graph, GraphError, PinnedConfig, Spin};
pub use params::{format_complex, parse_complex, Params};
pub use roots::{min_root_distance, poly_roots, RootError, Roots};
pub use saw::{build_saw_tree, CycleConvention, Depth, SawError, SawTree};
pub use certify::{
    complex_contraction_probe, contraction_interval, estimate_delta, fixed_point, membership, real_contraction_margin, uniqueness_check,
    CertifyError, ContractionCert, RegionInterval, SetId,
};
pub use potential::{Potential, PotentialError, PotentialKind};
pub use recursion::{grad_params_f, grad_transformed_f, recursion_f, transformed_f, RecursionError, Signature};
pub use weitz::{decay_fit, fptas_depth, saw_ratio, sphere_gaps, ssm_probe, weitz_partition, SawOptions, WeitzError, WeitzResult};
pub use barvinok::{choose_order, inverse_power_sums, low_order_coeffs, taylor_log_z, taylor_log_z_swapped, BarvinokError, TaylorEstimate};
pub use corpus::{corpus, CorpusSelector};
pub use scan::{run_scan, ScanSpec};
