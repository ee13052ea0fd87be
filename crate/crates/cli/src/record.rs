//! One analysis record per network, and the multi-network commands built on
//! top of it.

use std::collections::BTreeMap;
use std::path::PathBuf;

use pathdepth::arch::{Arch, ShortcutPolicy, DEFAULT_CLASSES, DEFAULT_INPUT};
use pathdepth::depth::{depth_report, enumerate_paths, DepthError, DepthOptions, DepthReport};
use pathdepth::grad::{gradient_weighted_depth, gradient_weighted_depth_custom, AttenuationModel};
use pathdepth::scalar::format_f64_half_even;
use pathdepth::{archspec, CostReport, Graph, ImageShape, Network, PathCount};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::CliError;
use crate::tables::ReferenceAccuracyTable;

pub const DEFAULT_GAMMAS: [f64; 4] = [1.0, 0.9, 0.7, 0.5];
pub const DEFAULT_ORACLE_CAP: u64 = 4096;

/// A network to analyze: a built-in architecture or an archspec file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    Builtin(Arch),
    File(PathBuf),
}

impl Source {
    /// Built-in names win; anything else is taken as a file path.
    pub fn parse(s: &str) -> Self {
        match s.parse::<Arch>() {
            Ok(a) => Source::Builtin(a),
            Err(_) => Source::File(PathBuf::from(s)),
        }
    }

    pub fn all_builtins() -> Vec<Source> {
        Arch::ALL.into_iter().map(Source::Builtin).collect()
    }

    /// Resolves to `(architecture name, graph)`.
    pub fn load(&self, opts: &AnalyzeOptions) -> Result<(String, Graph), CliError> {
        match self {
            Source::Builtin(a) => {
                let g = a
                    .build(opts.input_shape, opts.classes, opts.shortcut)
                    .map_err(CliError::input)?;
                Ok((a.name().to_string(), g))
            }
            Source::File(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
                let g = archspec::parse(&text)
                    .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
                Ok((g.name().to_string(), g))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConventionChoice {
    Layer,
    Module,
    Both,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzeOptions {
    pub input_shape: ImageShape,
    pub classes: u64,
    pub gammas: Vec<f64>,
    pub convention: ConventionChoice,
    pub shortcut: ShortcutPolicy,
    pub depth: DepthOptions,
    /// Cross-check the path polynomial by explicit enumeration up to this
    /// many paths.
    pub oracle_cap: Option<u64>,
    /// Floating-point path counts instead of exact integers.
    pub approximate: bool,
    pub custom_weights: Option<BTreeMap<u64, f64>>,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        Self {
            input_shape: DEFAULT_INPUT,
            classes: DEFAULT_CLASSES,
            gammas: DEFAULT_GAMMAS.to_vec(),
            convention: ConventionChoice::Both,
            shortcut: ShortcutPolicy::Projection,
            depth: DepthOptions::default(),
            oracle_cap: None,
            approximate: false,
            custom_weights: None,
        }
    }
}

/// Column label for a gamma value, e.g. `d_eff_grad_g0.9`.
pub fn gamma_label(gamma: f64) -> String {
    format!("d_eff_grad_g{gamma:?}")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradEntry {
    pub gamma: f64,
    pub d_eff_grad: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisRecord {
    pub architecture: String,
    pub nominal_layer: u64,
    pub nominal_module: u64,
    pub d_eff_general: String,
    pub d_eff_general_exact: String,
    pub d_eff_family: String,
    pub family: String,
    pub model: String,
    pub d_eff_grad: Vec<GradEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_eff_grad_custom: Option<String>,
    pub params: u128,
    pub macs: u128,
    pub flops: u128,
    #[serde(rename = "params_M")]
    pub params_m: String,
    #[serde(rename = "macs_G")]
    pub macs_g: String,
    #[serde(rename = "flops_G")]
    pub flops_g: String,
    pub path_count: String,
    pub l_min: u64,
    pub l_max: u64,
    pub warnings: Vec<String>,
}

fn depth_error(e: DepthError) -> CliError {
    match e {
        DepthError::Overflow { .. } => {
            CliError::analysis(format!("{e} (rerun with --approx for float path counts)"))
        }
        other => CliError::analysis(other),
    }
}

fn run<C: PathCount>(
    name: String,
    net: &Network,
    opts: &AnalyzeOptions,
) -> Result<AnalysisRecord, CliError> {
    let report: DepthReport<C> = depth_report(net, opts.depth).map_err(depth_error)?;

    if let Some(cap) = opts.oracle_cap {
        let enumerated = enumerate_paths(net, cap, opts.depth).map_err(depth_error)?;
        let expanded = report.polynomial.expand(cap);
        if expanded.as_deref() != Some(enumerated.as_slice()) {
            return Err(CliError::analysis(format!(
                "oracle mismatch: enumeration disagrees with path polynomial {}",
                report.polynomial
            )));
        }
    }

    let mut warnings = Vec::new();
    if let Some(reason) = &report.nominal_module.fallback {
        warnings.push(format!("nominal_module: {reason}"));
    }
    let d_eff_general = report.d_eff_general.to_decimal(2);
    let (d_eff_family, family) = match &report.d_eff_family {
        Ok(f) => (
            format_f64_half_even(f.value, 2),
            f.family.as_str().to_string(),
        ),
        Err(e) => {
            warnings.push(format!("d_eff_family: {e}; using d_eff_general"));
            (d_eff_general.clone(), "general".to_string())
        }
    };

    let mut d_eff_grad = Vec::new();
    for &g in &opts.gammas {
        let model = AttenuationModel::new(g).map_err(CliError::input)?;
        let r = gradient_weighted_depth(&report.polynomial, &model).map_err(CliError::analysis)?;
        d_eff_grad.push(GradEntry {
            gamma: g,
            d_eff_grad: format_f64_half_even(r.depth, 2),
        });
    }
    let d_eff_grad_custom = match &opts.custom_weights {
        Some(w) => Some(format_f64_half_even(
            gradient_weighted_depth_custom(&report.polynomial, w)
                .map_err(CliError::input)?
                .depth,
            2,
        )),
        None => None,
    };

    let cost = CostReport::of(net);
    Ok(AnalysisRecord {
        architecture: name,
        nominal_layer: report.nominal_layer,
        nominal_module: report.nominal_module.value,
        d_eff_general,
        d_eff_general_exact: report.d_eff_general.to_string(),
        d_eff_family,
        family,
        model: "attenuation".to_string(),
        d_eff_grad,
        d_eff_grad_custom,
        params: cost.params,
        macs: cost.macs,
        flops: cost.flops,
        params_m: cost.params_m(),
        macs_g: cost.macs_g(),
        flops_g: cost.flops_g(),
        path_count: if C::EXACT {
            report.path_count.to_string()
        } else {
            format!("{:e}", report.path_count.to_f64())
        },
        l_min: report.l_min,
        l_max: report.l_max,
        warnings,
    })
}

/// Validates and analyzes one graph.
pub fn analyze_graph(
    name: String,
    graph: Graph,
    opts: &AnalyzeOptions,
) -> Result<AnalysisRecord, CliError> {
    let net = Network::new(graph).map_err(CliError::input)?;
    if opts.approximate {
        run::<f64>(name, &net, opts)
    } else {
        run::<u128>(name, &net, opts)
    }
}

pub fn analyze(source: &Source, opts: &AnalyzeOptions) -> Result<AnalysisRecord, CliError> {
    let (name, graph) = source.load(opts)?;
    analyze_graph(name, graph, opts)
}

/// One record per source, in input order. The first failing source (in
/// input order) aborts the whole batch.
pub fn analyze_all(
    sources: &[Source],
    opts: &AnalyzeOptions,
    parallel: bool,
) -> Result<Vec<AnalysisRecord>, CliError> {
    if sources.is_empty() {
        return Err(CliError::input("no sources given"));
    }
    let results: Vec<Result<AnalysisRecord, CliError>> = if parallel {
        sources.par_iter().map(|s| analyze(s, opts)).collect()
    } else {
        sources.iter().map(|s| analyze(s, opts)).collect()
    };
    results.into_iter().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TradeoffRow {
    pub architecture: String,
    #[serde(rename = "macs_G")]
    pub macs_g: String,
    #[serde(rename = "params_M")]
    pub params_m: String,
    pub top1: String,
    #[serde(skip)]
    pub macs: u128,
}

/// Joins records with reference accuracy, sorted by MACs ascending
/// (stable, so ties keep input order).
pub fn tradeoff(
    records: &[AnalysisRecord],
    accuracy: &ReferenceAccuracyTable,
) -> Result<Vec<TradeoffRow>, CliError> {
    let mut rows = Vec::with_capacity(records.len());
    for r in records {
        let acc = accuracy
            .get(&r.architecture)
            .ok_or_else(|| CliError::input(format!("no accuracy for {}", r.architecture)))?;
        rows.push(TradeoffRow {
            architecture: r.architecture.clone(),
            macs_g: r.macs_g.clone(),
            params_m: r.params_m.clone(),
            top1: acc.text.clone(),
            macs: r.macs,
        });
    }
    rows.sort_by_key(|r| r.macs);
    Ok(rows)
}
