//! Nominal depth, exact path-length distributions and path-uniform
//! effective depth.
//!
//! Every input-output path picks exactly one predecessor at each Add or
//! Concat node. Its length is the number of weighted layers (Conv, and Fc
//! unless disabled) it traverses. The [`PathPolynomial`] of a network holds
//! the number of paths of each length; it is computed by a forward pass in
//! topological order and is a sufficient statistic for every effective-depth
//! measure in this crate.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::graph::{Network, NodeKind};
use crate::scalar::{format_f64_half_even, format_half_even, PathCount};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DepthError {
    #[error("path count exceeds exact-integer capacity at node {node}")]
    Overflow { node: String },
    #[error("path explosion: > {cap} paths")]
    PathExplosion { cap: u64 },
    #[error("empty path polynomial")]
    EmptyPolynomial,
    #[error("family ambiguous: graph mixes add and concat merges")]
    FamilyAmbiguous,
    #[error("concat node {node} is not a fork-branches-concat module: {reason}")]
    NotModular { node: String, reason: String },
}

/// Which layers count toward path length and nominal depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DepthOptions {
    pub count_fc: bool,
}

impl Default for DepthOptions {
    fn default() -> Self {
        Self { count_fc: true }
    }
}

impl DepthOptions {
    pub const CONV_ONLY: Self = Self { count_fc: false };

    pub fn layer_weight(&self, kind: &NodeKind) -> u64 {
        match kind {
            NodeKind::Conv(_) => 1,
            NodeKind::Fc { .. } => u64::from(self.count_fc),
            _ => 0,
        }
    }
}

/// Number of input-output paths of each length, `coeffs[len]`.
/// Trailing zero coefficients are trimmed.
#[derive(Debug, Clone, PartialEq)]
pub struct PathPolynomial<C> {
    coeffs: Vec<C>,
}

impl<C: PathCount> PathPolynomial<C> {
    pub fn from_coeffs(mut coeffs: Vec<C>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    /// Builds from `(length, count)` pairs; repeated lengths are summed.
    pub fn from_terms(terms: impl IntoIterator<Item = (u64, C)>) -> Option<Self> {
        let mut coeffs: Vec<C> = Vec::new();
        for (len, c) in terms {
            let len = len as usize;
            if coeffs.len() <= len {
                coeffs.resize(len + 1, C::zero());
            }
            coeffs[len] = coeffs[len].checked_sum(&c)?;
        }
        Some(Self::from_coeffs(coeffs))
    }

    /// A single path of length `len`.
    pub fn monomial(len: u64) -> Self {
        let mut coeffs = vec![C::zero(); len as usize + 1];
        coeffs[len as usize] = C::one();
        Self { coeffs }
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, len: u64) -> C {
        self.coeffs
            .get(len as usize)
            .cloned()
            .unwrap_or_else(C::zero)
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    /// Non-zero `(length, count)` terms in increasing length.
    pub fn terms(&self) -> impl Iterator<Item = (u64, &C)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(l, c)| (l as u64, c))
    }

    pub fn min_len(&self) -> Option<u64> {
        self.terms().next().map(|(l, _)| l)
    }

    pub fn max_len(&self) -> Option<u64> {
        self.coeffs.len().checked_sub(1).map(|l| l as u64)
    }

    /// Total number of paths, `None` on overflow.
    pub fn total(&self) -> Option<C> {
        self.coeffs
            .iter()
            .try_fold(C::zero(), |acc, c| acc.checked_sum(c))
    }

    /// Multiplies by `x^by`: every path gets `by` layers longer.
    pub fn shift(&self, by: u64) -> Self {
        if by == 0 || self.is_empty() {
            return self.clone();
        }
        let mut coeffs = vec![C::zero(); by as usize];
        coeffs.extend(self.coeffs.iter().cloned());
        Self { coeffs }
    }

    /// Coefficient-wise sum, `None` on overflow.
    pub fn checked_add(&self, other: &Self) -> Option<Self> {
        let (long, short) = if self.coeffs.len() >= other.coeffs.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut coeffs = long.coeffs.clone();
        for (a, b) in coeffs.iter_mut().zip(&short.coeffs) {
            *a = a.checked_sum(b)?;
        }
        Some(Self { coeffs })
    }

    /// The path-length multiset, sorted. Only sensible for small exact
    /// polynomials; `None` if a coefficient is not an exact integer or the
    /// expansion would exceed `limit` entries.
    pub fn expand(&self, limit: u64) -> Option<Vec<u64>> {
        let mut out = Vec::new();
        for (len, c) in self.terms() {
            let n = c.to_bigint()?.to_u64()?;
            if out.len() as u64 + n > limit {
                return None;
            }
            out.extend(std::iter::repeat_n(len, n as usize));
        }
        Some(out)
    }
}

impl<C: PathCount> fmt::Display for PathPolynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (l, c)) in self.terms().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{l}:{c}")?;
        }
        f.write_str("}")
    }
}

/// Forward pass computing the path polynomial at the output node.
pub fn path_polynomial<C: PathCount>(
    net: &Network,
    opts: DepthOptions,
) -> Result<PathPolynomial<C>, DepthError> {
    let mut polys: Vec<Option<PathPolynomial<C>>> = vec![None; net.len()];
    let overflow = |i: usize| DepthError::Overflow {
        node: net.id(i).to_string(),
    };
    for &i in net.order() {
        let kind = net.kind(i);
        let poly = if *kind == NodeKind::Input {
            PathPolynomial::monomial(0)
        } else {
            let mut preds = net
                .preds(i)
                .iter()
                .map(|&p| polys[p].as_ref().expect("topological order"));
            let first = preds
                .next()
                .expect("non-input nodes have predecessors")
                .clone();
            let merged = preds
                .try_fold(first, |acc, p| acc.checked_add(p))
                .ok_or_else(|| overflow(i))?;
            merged.shift(opts.layer_weight(kind))
        };
        polys[i] = Some(poly);
    }
    let out = polys[net.output()].take().expect("output reached");
    if out.total().is_none() {
        return Err(overflow(net.output()));
    }
    Ok(out)
}

/// Path-uniform effective depth: mean path length.
#[derive(Debug, Clone, PartialEq)]
pub enum EffectiveDepth {
    Exact(BigRational),
    Approximate(f64),
}

impl EffectiveDepth {
    pub fn to_f64(&self) -> f64 {
        match self {
            EffectiveDepth::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            EffectiveDepth::Approximate(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<&BigRational> {
        match self {
            EffectiveDepth::Exact(r) => Some(r),
            EffectiveDepth::Approximate(_) => None,
        }
    }

    /// Half-even decimal rendering.
    pub fn to_decimal(&self, places: u32) -> String {
        match self {
            EffectiveDepth::Exact(r) => format_half_even(r, places),
            EffectiveDepth::Approximate(x) => format_f64_half_even(*x, places),
        }
    }
}

impl fmt::Display for EffectiveDepth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EffectiveDepth::Exact(r) if r.is_integer() => write!(f, "{}", r.numer()),
            EffectiveDepth::Exact(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            EffectiveDepth::Approximate(x) => write!(f, "{x}"),
        }
    }
}

/// Mean path length, `Σ ℓ·c_ℓ / Σ c_ℓ`, exact whenever the coefficients are.
pub fn effective_depth_general<C: PathCount>(
    poly: &PathPolynomial<C>,
) -> Result<EffectiveDepth, DepthError> {
    if poly.is_empty() {
        return Err(DepthError::EmptyPolynomial);
    }
    if C::EXACT {
        let mut weighted = BigInt::zero();
        let mut total = BigInt::zero();
        for (len, c) in poly.terms() {
            let c = c.to_bigint().expect("exact coefficient");
            weighted += &c * BigInt::from(len);
            total += c;
        }
        Ok(EffectiveDepth::Exact(BigRational::new(weighted, total)))
    } else {
        // normalise by the largest coefficient so huge counts stay finite
        let peak = poly
            .terms()
            .map(|(_, c)| c.ln())
            .fold(f64::NEG_INFINITY, f64::max);
        let (mut weighted, mut total) = (0.0, 0.0);
        for (len, c) in poly.terms() {
            let w = (c.ln() - peak).exp();
            weighted += w * len as f64;
            total += w;
        }
        Ok(EffectiveDepth::Approximate(weighted / total))
    }
}

/// Explicit depth-first enumeration of every input-output path, returning
/// the sorted multiset of path lengths. Independent of [`path_polynomial`];
/// intended as an oracle for small graphs.
pub fn enumerate_paths(
    net: &Network,
    cap: u64,
    opts: DepthOptions,
) -> Result<Vec<u64>, DepthError> {
    let mut lengths = Vec::new();
    let start = net.input();
    let mut stack = vec![(start, opts.layer_weight(net.kind(start)))];
    while let Some((node, len)) = stack.pop() {
        if node == net.output() {
            if lengths.len() as u64 >= cap {
                return Err(DepthError::PathExplosion { cap });
            }
            lengths.push(len);
            continue;
        }
        for &next in net.succs(node).iter().rev() {
            stack.push((next, len + opts.layer_weight(net.kind(next))));
        }
    }
    lengths.sort_unstable();
    Ok(lengths)
}

/// Shortest and longest weighted path, by dynamic programming.
pub fn path_length_bounds(net: &Network, opts: DepthOptions) -> (u64, u64) {
    let mut lo = vec![0u64; net.len()];
    let mut hi = vec![0u64; net.len()];
    for &i in net.order() {
        let w = opts.layer_weight(net.kind(i));
        let preds = net.preds(i);
        let (a, b) = if preds.is_empty() {
            (0, 0)
        } else {
            (
                preds.iter().map(|&p| lo[p]).min().expect("non-empty"),
                preds.iter().map(|&p| hi[p]).max().expect("non-empty"),
            )
        };
        lo[i] = a + w;
        hi[i] = b + w;
    }
    (lo[net.output()], hi[net.output()])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DepthConvention {
    /// Weighted layers along the longest path.
    LayerCount,
    /// Each fork-branches-concat module counts once, plus the weighted
    /// layers outside modules along the longest path.
    ModuleBased,
}

/// Fork-branches-concat structure: every predecessor of `concat` is reached
/// from `fork` by a private chain of single-input, single-output nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchModule {
    pub fork: usize,
    pub concat: usize,
    /// Branch nodes in fork-to-concat order, one list per concat predecessor.
    pub branches: Vec<Vec<usize>>,
}

impl BranchModule {
    pub fn branch_depths(&self, net: &Network, opts: DepthOptions) -> Vec<u64> {
        self.branches
            .iter()
            .map(|b| b.iter().map(|&i| opts.layer_weight(net.kind(i))).sum())
            .collect()
    }
}

fn module_at(net: &Network, concat: usize) -> Result<BranchModule, DepthError> {
    let not_modular = |reason: String| DepthError::NotModular {
        node: net.id(concat).to_string(),
        reason,
    };
    let mut fork = None;
    let mut branches = Vec::new();
    for &pred in net.preds(concat) {
        let mut branch = Vec::new();
        let mut cur = pred;
        let found = loop {
            if net.succs(cur).len() >= 2 {
                break cur;
            }
            let kind = net.kind(cur);
            if kind.is_merge() || net.preds(cur).len() != 1 {
                return Err(not_modular(format!(
                    "branch through {} has no single fork",
                    net.id(cur)
                )));
            }
            branch.push(cur);
            cur = net.preds(cur)[0];
        };
        match fork {
            None => fork = Some(found),
            Some(f) if f != found => {
                return Err(not_modular(format!(
                    "branches fork at both {} and {}",
                    net.id(f),
                    net.id(found)
                )))
            }
            Some(_) => {}
        }
        branch.reverse();
        branches.push(branch);
    }
    let fork = fork.expect("concat has predecessors");
    if net.succs(fork).len() != branches.len() {
        return Err(not_modular(format!(
            "fork {} also feeds nodes outside the module",
            net.id(fork)
        )));
    }
    Ok(BranchModule {
        fork,
        concat,
        branches,
    })
}

/// All fork-branches-concat modules, in topological order of their concat.
/// Fails if any Concat node is not such a module (including nesting).
pub fn find_modules(net: &Network) -> Result<Vec<BranchModule>, DepthError> {
    net.order()
        .iter()
        .filter(|&&i| *net.kind(i) == NodeKind::Concat)
        .map(|&i| module_at(net, i))
        .collect()
}

/// Nominal depth under a convention. `fallback` is set when the module
/// convention does not apply and the layer count was used instead.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NominalDepth {
    pub value: u64,
    pub fallback: Option<String>,
}

pub fn nominal_depth(
    net: &Network,
    convention: DepthConvention,
    opts: DepthOptions,
) -> NominalDepth {
    let layer = net.longest_weighted_path(|k| opts.layer_weight(k));
    let fallback = |reason: String| NominalDepth {
        value: layer,
        fallback: Some(reason),
    };
    match convention {
        DepthConvention::LayerCount => NominalDepth {
            value: layer,
            fallback: None,
        },
        DepthConvention::ModuleBased => {
            let modules = match find_modules(net) {
                Ok(m) if m.is_empty() => {
                    return fallback("no concat modules; using layer count".into())
                }
                Ok(m) => m,
                Err(e) => return fallback(format!("{e}; using layer count")),
            };
            let mut weight = vec![None; net.len()];
            for m in &modules {
                for &n in m.branches.iter().flatten() {
                    weight[n] = Some(0);
                }
                weight[m.concat] = Some(1);
            }
            let mut best = vec![0u64; net.len()];
            for &i in net.order() {
                let incoming = net.preds(i).iter().map(|&p| best[p]).max().unwrap_or(0);
                best[i] = incoming + weight[i].unwrap_or_else(|| opts.layer_weight(net.kind(i)));
            }
            NominalDepth {
                value: best[net.output()],
                fallback: None,
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Vgg,
    ResNet,
    GoogLeNet,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Vgg => "VGG",
            Family::ResNet => "ResNet",
            Family::GoogLeNet => "GoogLeNet",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyDepth {
    pub family: Family,
    pub value: f64,
}

/// Family-specific closed forms. The family is read off the merge kinds:
/// none gives the plain-chain rule (nominal depth), Add gives the midpoint
/// of the shortest and longest path, Concat gives the sum over modules of
/// the mean branch depth plus the weighted layers outside modules.
pub fn effective_depth_family(
    net: &Network,
    opts: DepthOptions,
) -> Result<FamilyDepth, DepthError> {
    let has = |k: NodeKind| net.order().iter().any(|&i| *net.kind(i) == k);
    let (adds, concats) = (has(NodeKind::Add), has(NodeKind::Concat));
    match (adds, concats) {
        (true, true) => Err(DepthError::FamilyAmbiguous),
        (false, false) => Ok(FamilyDepth {
            family: Family::Vgg,
            value: net.longest_weighted_path(|k| opts.layer_weight(k)) as f64,
        }),
        (true, false) => {
            let (lo, hi) = path_length_bounds(net, opts);
            Ok(FamilyDepth {
                family: Family::ResNet,
                value: (lo + hi) as f64 / 2.0,
            })
        }
        (false, true) => {
            let modules = find_modules(net)?;
            let mut weight: Vec<Option<f64>> = vec![None; net.len()];
            for m in &modules {
                for &n in m.branches.iter().flatten() {
                    weight[n] = Some(0.0);
                }
                let depths = m.branch_depths(net, opts);
                let mean = depths.iter().sum::<u64>() as f64 / depths.len() as f64;
                weight[m.concat] = Some(mean);
            }
            let mut best = vec![0f64; net.len()];
            for &i in net.order() {
                let incoming = net.preds(i).iter().map(|&p| best[p]).fold(0.0, f64::max);
                best[i] =
                    incoming + weight[i].unwrap_or_else(|| opts.layer_weight(net.kind(i)) as f64);
            }
            Ok(FamilyDepth {
                family: Family::GoogLeNet,
                value: best[net.output()],
            })
        }
    }
}

/// Every depth figure for one network.
#[derive(Debug, Clone)]
pub struct DepthReport<C> {
    pub nominal_layer: u64,
    pub nominal_module: NominalDepth,
    pub d_eff_general: EffectiveDepth,
    pub d_eff_family: Result<FamilyDepth, DepthError>,
    pub path_count: C,
    pub l_min: u64,
    pub l_max: u64,
    pub polynomial: PathPolynomial<C>,
}

pub fn depth_report<C: PathCount>(
    net: &Network,
    opts: DepthOptions,
) -> Result<DepthReport<C>, DepthError> {
    let polynomial = path_polynomial::<C>(net, opts)?;
    let d_eff_general = effective_depth_general(&polynomial)?;
    let path_count = polynomial.total().ok_or_else(|| DepthError::Overflow {
        node: net.id(net.output()).to_string(),
    })?;
    Ok(DepthReport {
        nominal_layer: nominal_depth(net, DepthConvention::LayerCount, opts).value,
        nominal_module: nominal_depth(net, DepthConvention::ModuleBased, opts),
        d_eff_general,
        d_eff_family: effective_depth_family(net, opts),
        path_count,
        l_min: polynomial.min_len().ok_or(DepthError::EmptyPolynomial)?,
        l_max: polynomial.max_len().ok_or(DepthError::EmptyPolynomial)?,
        polynomial,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{ConvSpec, Graph, ImageShape, PoolSpec};

    fn conv(out: u64) -> NodeKind {
        NodeKind::Conv(ConvSpec::square(3, 1, 1, out))
    }

    fn fc() -> NodeKind {
        NodeKind::Fc {
            out_features: 10,
            bias: true,
        }
    }

    /// stem conv, `blocks` identity residual blocks with 2-conv bodies, Fc.
    fn residual_toy(blocks: usize) -> Network {
        let mut g = Graph::new("toy", ImageShape::new(3, 8, 8));
        g.add("stem", conv(4), &["input"]).unwrap();
        let mut prev = "stem".to_string();
        for b in 0..blocks {
            let (c1, c2, add) = (format!("b{b}c1"), format!("b{b}c2"), format!("b{b}add"));
            g.add(c1.clone(), conv(4), &[prev.as_str()]).unwrap();
            g.add(c2.clone(), conv(4), &[c1.as_str()]).unwrap();
            g.add(add.clone(), NodeKind::Add, &[c2.as_str(), prev.as_str()])
                .unwrap();
            prev = add;
        }
        g.add("gap", NodeKind::GlobalAvgPool, &[prev.as_str()])
            .unwrap();
        g.add("fc", fc(), &["gap"]).unwrap();
        g.add("output", NodeKind::Output, &["fc"]).unwrap();
        Network::new(g).unwrap()
    }

    fn inception_toy() -> Network {
        let mut g = Graph::new("inc", ImageShape::new(3, 8, 8));
        g.add("stem", conv(4), &["input"]).unwrap();
        g.add("b1", conv(4), &["stem"]).unwrap();
        g.add("b2r", conv(4), &["stem"]).unwrap();
        g.add("b2", conv(4), &["b2r"]).unwrap();
        g.add("b3r", conv(4), &["stem"]).unwrap();
        g.add("b3", conv(4), &["b3r"]).unwrap();
        g.add("b4p", NodeKind::MaxPool(PoolSpec::new(3, 1, 1)), &["stem"])
            .unwrap();
        g.add("b4", conv(4), &["b4p"]).unwrap();
        g.add("cat", NodeKind::Concat, &["b1", "b2", "b3", "b4"])
            .unwrap();
        g.add("gap", NodeKind::GlobalAvgPool, &["cat"]).unwrap();
        g.add("fc", fc(), &["gap"]).unwrap();
        g.add("output", NodeKind::Output, &["fc"]).unwrap();
        Network::new(g).unwrap()
    }

    fn poly(terms: &[(u64, u128)]) -> PathPolynomial<u128> {
        PathPolynomial::from_terms(terms.iter().copied()).unwrap()
    }

    #[test]
    fn chain_polynomial() {
        let mut g = Graph::new("c", ImageShape::new(3, 8, 8));
        g.add("a", conv(3), &["input"]).unwrap();
        g.add("b", conv(3), &["a"]).unwrap();
        g.add("output", NodeKind::Output, &["b"]).unwrap();
        let net = Network::new(g).unwrap();
        assert_eq!(
            path_polynomial::<u128>(&net, DepthOptions::default()).unwrap(),
            poly(&[(2, 1)])
        );
    }

    #[test]
    fn residual_polynomials() {
        let p1 = path_polynomial::<u128>(&residual_toy(1), DepthOptions::default()).unwrap();
        assert_eq!(p1, poly(&[(2, 1), (4, 1)]));
        let p3 = path_polynomial::<u128>(&residual_toy(3), DepthOptions::default()).unwrap();
        assert_eq!(p3, poly(&[(2, 1), (4, 3), (6, 3), (8, 1)]));
        assert_eq!(p3.total(), Some(8));
        assert_eq!(p3.to_string(), "{2:1, 4:3, 6:3, 8:1}");
    }

    #[test]
    fn general_depth_examples() {
        let three = EffectiveDepth::Exact(BigRational::from_integer(3.into()));
        assert_eq!(
            effective_depth_general(&poly(&[(2, 1), (4, 1)])).unwrap(),
            three
        );
        let d = effective_depth_general(&poly(&[(2, 1), (4, 3), (6, 3), (8, 1)])).unwrap();
        assert_eq!(d.to_string(), "5");
        assert_eq!(
            effective_depth_general(&poly(&[(16, 1)]))
                .unwrap()
                .to_decimal(2),
            "16.00"
        );
        let d = effective_depth_general(&poly(&[(1, 1), (2, 2)])).unwrap();
        assert_eq!(d.to_string(), "5/3");
        assert_eq!(d.to_decimal(2), "1.67");
        assert_eq!(
            effective_depth_general(&PathPolynomial::<u128>::from_coeffs(vec![])),
            Err(DepthError::EmptyPolynomial)
        );
    }

    #[test]
    fn approximate_mode_agrees() {
        let net = residual_toy(5);
        let exact = path_polynomial::<u128>(&net, DepthOptions::default()).unwrap();
        let approx = path_polynomial::<f64>(&net, DepthOptions::default()).unwrap();
        let a = effective_depth_general(&approx).unwrap();
        assert!(matches!(a, EffectiveDepth::Approximate(_)));
        assert!((a.to_f64() - effective_depth_general(&exact).unwrap().to_f64()).abs() < 1e-12);
    }

    #[test]
    fn overflow_is_reported() {
        // 2^8 paths do not fit a u8 total
        let net = residual_toy(8);
        let err = path_polynomial::<u8>(&net, DepthOptions::default()).unwrap_err();
        assert!(matches!(err, DepthError::Overflow { .. }), "{err}");
        assert!(err
            .to_string()
            .starts_with("path count exceeds exact-integer capacity"));
        assert!(path_polynomial::<u16>(&net, DepthOptions::default()).is_ok());
    }

    #[test]
    fn enumeration_examples() {
        let lens = enumerate_paths(&residual_toy(3), 4096, DepthOptions::default()).unwrap();
        assert_eq!(lens, [2, 4, 4, 4, 6, 6, 6, 8]);
        assert_eq!(
            enumerate_paths(&residual_toy(3), 7, DepthOptions::default()),
            Err(DepthError::PathExplosion { cap: 7 })
        );
        assert_eq!(
            DepthError::PathExplosion { cap: 4096 }.to_string(),
            "path explosion: > 4096 paths"
        );
    }

    #[test]
    fn fc_toggle() {
        let net = residual_toy(1);
        let p = path_polynomial::<u128>(&net, DepthOptions::CONV_ONLY).unwrap();
        assert_eq!(p, poly(&[(1, 1), (3, 1)]));
        assert_eq!(
            nominal_depth(&net, DepthConvention::LayerCount, DepthOptions::CONV_ONLY).value,
            3
        );
    }

    #[test]
    fn module_detection_and_conventions() {
        let net = inception_toy();
        let modules = find_modules(&net).unwrap();
        assert_eq!(modules.len(), 1);
        assert_eq!(
            modules[0].branch_depths(&net, DepthOptions::default()),
            [1, 2, 2, 1]
        );
        let opts = DepthOptions::default();
        assert_eq!(
            nominal_depth(&net, DepthConvention::LayerCount, opts).value,
            4
        );
        assert_eq!(
            nominal_depth(&net, DepthConvention::ModuleBased, opts).value,
            3
        );
        let fam = effective_depth_family(&net, opts).unwrap();
        assert_eq!(fam.family, Family::GoogLeNet);
        assert_eq!(fam.value, 3.5);
        let general =
            effective_depth_general(&path_polynomial::<u128>(&net, opts).unwrap()).unwrap();
        assert_eq!(general.to_f64(), 3.5);
    }

    #[test]
    fn module_convention_falls_back() {
        let net = residual_toy(2);
        let n = nominal_depth(&net, DepthConvention::ModuleBased, DepthOptions::default());
        assert_eq!(n.value, 6);
        assert!(n.fallback.is_some());
    }

    #[test]
    fn family_rules() {
        let fam = effective_depth_family(&residual_toy(3), DepthOptions::default()).unwrap();
        assert_eq!((fam.family, fam.value), (Family::ResNet, 5.0));

        let mut g = Graph::new("mix", ImageShape::new(4, 8, 8));
        g.add("a", conv(4), &["input"]).unwrap();
        g.add("b", conv(4), &["input"]).unwrap();
        g.add("sum", NodeKind::Add, &["a", "b"]).unwrap();
        g.add("c", conv(4), &["sum"]).unwrap();
        g.add("d", conv(4), &["sum"]).unwrap();
        g.add("cat", NodeKind::Concat, &["c", "d"]).unwrap();
        g.add("output", NodeKind::Output, &["cat"]).unwrap();
        let net = Network::new(g).unwrap();
        assert_eq!(
            effective_depth_family(&net, DepthOptions::default()),
            Err(DepthError::FamilyAmbiguous)
        );
    }

    #[test]
    fn nested_concat_is_not_modular() {
        let mut g = Graph::new("nest", ImageShape::new(4, 8, 8));
        g.add("a", conv(4), &["input"]).unwrap();
        g.add("b", conv(4), &["input"]).unwrap();
        g.add("inner", NodeKind::Concat, &["a", "b"]).unwrap();
        g.add("c", conv(4), &["inner"]).unwrap();
        g.add("x", conv(4), &["input"]).unwrap();
        g.add("outer", NodeKind::Concat, &["c", "x"]).unwrap();
        g.add("output", NodeKind::Output, &["outer"]).unwrap();
        let net = Network::new(g).unwrap();
        assert!(matches!(
            find_modules(&net),
            Err(DepthError::NotModular { .. })
        ));
        assert!(
            nominal_depth(&net, DepthConvention::ModuleBased, DepthOptions::default())
                .fallback
                .is_some()
        );
    }

    #[test]
    fn report_bounds() {
        let r = depth_report::<u128>(&residual_toy(3), DepthOptions::default()).unwrap();
        assert_eq!((r.l_min, r.l_max), (2, 8));
        assert_eq!(
            path_length_bounds(&residual_toy(3), DepthOptions::default()),
            (2, 8)
        );
        assert_eq!(r.path_count, 8);
        assert_eq!(r.nominal_layer, 8);
    }
}
