//! Static analysis of convolutional network graphs: nominal and effective
//! depth, exact path-length distributions, and parameter/MAC/FLOP budgets.
//!
//! Graphs are built programmatically ([`arch`]), parsed from `.archspec`
//! text ([`archspec`]), validated into an immutable [`Network`], and then
//! analyzed by pure functions in [`depth`], [`grad`] and [`cost`].
//!
//! Path counting is generic over the coefficient type ([`PathCount`]) and
//! gradient weighting over the float type; the aliases below fix the
//! defaults used by the command-line tool.

pub mod arch;
pub mod archspec;
pub mod cost;
pub mod depth;
pub mod grad;
pub mod graph;
pub mod scalar;
pub mod synth;

pub use arch::{build_googlenet, build_resnet, build_vgg, Arch, ArchError, ShortcutPolicy};
pub use archspec::{parse, serialize, ParseError};
pub use cost::{count_macs, count_params, CostReport, NodeCost};
pub use depth::{
    depth_report, effective_depth_family, effective_depth_general, enumerate_paths, nominal_depth,
    path_polynomial, DepthConvention, DepthError, DepthOptions, DepthReport, EffectiveDepth,
    Family, FamilyDepth, PathPolynomial,
};
pub use grad::{
    gradient_weighted_depth, gradient_weighted_depth_custom, AttenuationModel, GradError,
    WeightedDepthReport,
};
pub use graph::{
    infer_shapes, longest_weighted_path, topo_order, validate, Graph, GraphError, ImageShape,
    Network, NodeKind, Shape, ShapeMap, ValidationReport,
};
pub use scalar::PathCount;

/// Exact path polynomial with 128-bit counts and overflow detection.
pub type ExactPolynomial = PathPolynomial<u128>;
/// Path polynomial with unbounded exact counts.
pub type BigPolynomial = PathPolynomial<num_bigint::BigUint>;
/// Approximate floating-point path polynomial.
pub type ApproxPolynomial = PathPolynomial<f64>;
/// Depth report with exact 128-bit path counts.
pub type ExactDepthReport = DepthReport<u128>;
/// Depth report in approximate mode.
pub type ApproxDepthReport = DepthReport<f64>;
/// Gradient-weighted report in double precision.
pub type GradReport = WeightedDepthReport<f64>;
/// Attenuation model in double precision.
pub type Attenuation = AttenuationModel<f64>;
