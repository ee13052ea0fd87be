//! Computation-graph model: node kinds, structural validation, deterministic
//! topological ordering, shape inference and longest weighted paths.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

/// Reserved id of the single Input node.
pub const INPUT_ID: &str = "input";
/// Reserved id of the single Output node.
pub const OUTPUT_ID: &str = "output";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ImageShape {
    pub channels: u64,
    pub height: u64,
    pub width: u64,
}

impl ImageShape {
    pub const fn new(channels: u64, height: u64, width: u64) -> Self {
        Self {
            channels,
            height,
            width,
        }
    }
}

impl fmt::Display for ImageShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.channels, self.height, self.width)
    }
}

/// Activation shape at a node: a feature map, or a flat feature vector
/// once the graph has passed into the fully connected domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Shape {
    Spatial(ImageShape),
    Flat(u64),
}

impl Shape {
    /// Number of features a fully connected layer sees when fed this shape.
    pub fn flat_features(&self) -> u64 {
        match *self {
            Shape::Spatial(s) => s.channels * s.height * s.width,
            Shape::Flat(f) => f,
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Spatial(s) => write!(f, "({}, {}, {})", s.channels, s.height, s.width),
            Shape::Flat(n) => write!(f, "({n})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ConvSpec {
    pub kernel_h: u64,
    pub kernel_w: u64,
    pub stride: u64,
    pub padding: u64,
    pub out_channels: u64,
    pub bias: bool,
}

impl ConvSpec {
    /// Square kernel with bias.
    pub const fn square(kernel: u64, stride: u64, padding: u64, out_channels: u64) -> Self {
        Self {
            kernel_h: kernel,
            kernel_w: kernel,
            stride,
            padding,
            out_channels,
            bias: true,
        }
    }

    pub const fn with_bias(mut self, bias: bool) -> Self {
        self.bias = bias;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PoolSpec {
    pub kernel: u64,
    pub stride: u64,
    pub padding: u64,
}

impl PoolSpec {
    pub const fn new(kernel: u64, stride: u64, padding: u64) -> Self {
        Self {
            kernel,
            stride,
            padding,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Input,
    Conv(ConvSpec),
    Fc {
        out_features: u64,
        bias: bool,
    },
    MaxPool(PoolSpec),
    AvgPool(PoolSpec),
    GlobalAvgPool,
    /// Parameter-free residual shortcut: strided subsampling followed by
    /// zero-padding of the channel dimension up to `out_channels`.
    PadShortcut {
        stride: u64,
        out_channels: u64,
    },
    Add,
    Concat,
    Output,
}

impl NodeKind {
    /// Conv and Fc are the only kinds that carry weights.
    pub fn is_weighted(&self) -> bool {
        matches!(self, NodeKind::Conv(_) | NodeKind::Fc { .. })
    }

    pub fn is_merge(&self) -> bool {
        matches!(self, NodeKind::Add | NodeKind::Concat)
    }

    /// Keyword used by the archspec text format.
    pub fn keyword(&self) -> &'static str {
        match self {
            NodeKind::Input => "input",
            NodeKind::Conv(_) => "conv",
            NodeKind::Fc { .. } => "fc",
            NodeKind::MaxPool(_) => "maxpool",
            NodeKind::AvgPool(_) => "avgpool",
            NodeKind::GlobalAvgPool => "gap",
            NodeKind::PadShortcut { .. } => "pad",
            NodeKind::Add => "add",
            NodeKind::Concat => "concat",
            NodeKind::Output => "output",
        }
    }
}

/// Rule broken by a graph, as reported by [`validate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    InvalidName,
    InvalidId,
    ReservedId,
    DanglingEdge,
    DuplicateEdge,
    InputCount,
    OutputCount,
    Arity,
    InvalidParameter,
    Acyclicity,
    NotOnPath,
    ShapeUnderflow,
    FlatInput,
    AddShapeMismatch,
    ConcatShapeMismatch,
    PadShrinksChannels,
}

impl Rule {
    pub fn as_str(&self) -> &'static str {
        match self {
            Rule::InvalidName => "invalid name",
            Rule::InvalidId => "invalid id",
            Rule::ReservedId => "reserved id",
            Rule::DanglingEdge => "dangling edge",
            Rule::DuplicateEdge => "duplicate edge",
            Rule::InputCount => "input count",
            Rule::OutputCount => "output count",
            Rule::Arity => "arity",
            Rule::InvalidParameter => "invalid parameter",
            Rule::Acyclicity => "acyclicity",
            Rule::NotOnPath => "not on input-output path",
            Rule::ShapeUnderflow => "shape underflow",
            Rule::FlatInput => "spatial op on flat input",
            Rule::AddShapeMismatch => "add shape mismatch",
            Rule::ConcatShapeMismatch => "concat shape mismatch",
            Rule::PadShrinksChannels => "pad shrinks channels",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub node: Option<String>,
    pub rule: Rule,
    pub detail: String,
}

impl Violation {
    fn at(node: &str, rule: Rule, detail: impl Into<String>) -> Self {
        Self {
            node: Some(node.to_string()),
            rule,
            detail: detail.into(),
        }
    }

    fn global(rule: Rule, detail: impl Into<String>) -> Self {
        Self {
            node: None,
            rule,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.node {
            Some(n) => write!(f, "{} at node {}: {}", self.rule, n, self.detail),
            None => write!(f, "{}: {}", self.rule, self.detail),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, rule: Rule) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("duplicate node id {0}")]
    DuplicateId(String),
    #[error("invalid graph: {0}")]
    Invalid(ValidationReport),
}

/// A computation graph under construction. Nothing is checked on insertion
/// beyond id uniqueness; [`validate`] or [`Network::new`] decide whether the
/// result is analyzable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    name: String,
    input_shape: ImageShape,
    nodes: BTreeMap<String, NodeKind>,
    edges: Vec<(String, String)>,
}

impl Graph {
    /// Creates a graph holding only its Input node.
    pub fn new(name: impl Into<String>, input_shape: ImageShape) -> Self {
        let mut nodes = BTreeMap::new();
        nodes.insert(INPUT_ID.to_string(), NodeKind::Input);
        Self {
            name: name.into(),
            input_shape,
            nodes,
            edges: Vec::new(),
        }
    }

    /// Creates a graph with no nodes at all.
    pub fn empty(name: impl Into<String>, input_shape: ImageShape) -> Self {
        Self {
            name: name.into(),
            input_shape,
            nodes: BTreeMap::new(),
            edges: Vec::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn input_shape(&self) -> ImageShape {
        self.input_shape
    }

    pub fn nodes(&self) -> &BTreeMap<String, NodeKind> {
        &self.nodes
    }

    pub fn edges(&self) -> &[(String, String)] {
        &self.edges
    }

    pub fn kind(&self, id: &str) -> Option<&NodeKind> {
        self.nodes.get(id)
    }

    /// Inserts a node and an edge from each of `from` (in order).
    pub fn add(
        &mut self,
        id: impl Into<String>,
        kind: NodeKind,
        from: &[&str],
    ) -> Result<(), GraphError> {
        let id = id.into();
        self.add_node(id.clone(), kind)?;
        for f in from {
            self.add_edge(*f, id.as_str());
        }
        Ok(())
    }

    pub fn add_node(&mut self, id: impl Into<String>, kind: NodeKind) -> Result<(), GraphError> {
        let id = id.into();
        if self.nodes.contains_key(&id) {
            return Err(GraphError::DuplicateId(id));
        }
        self.nodes.insert(id, kind);
        Ok(())
    }

    pub fn add_edge(&mut self, from: impl Into<String>, to: impl Into<String>) {
        self.edges.push((from.into(), to.into()));
    }

    /// Predecessor ids of `id` in edge-insertion order.
    pub fn predecessors(&self, id: &str) -> Vec<&str> {
        self.edges
            .iter()
            .filter(|(_, t)| t == id)
            .map(|(f, _)| f.as_str())
            .collect()
    }
}

pub fn is_valid_id(id: &str) -> bool {
    !id.is_empty()
        && id
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || matches!(b, b'_' | b'.' | b'-'))
}

pub fn is_valid_name(name: &str) -> bool {
    name.bytes().all(|b| (0x20..0x7f).contains(&b) && b != b'"')
}

/// Index-based adjacency over the nodes of a graph, ids sorted
/// lexicographically. Edges with unknown endpoints are dropped.
#[derive(Debug, Clone)]
struct Topology {
    ids: Vec<String>,
    kinds: Vec<NodeKind>,
    preds: Vec<Vec<usize>>,
    succs: Vec<Vec<usize>>,
}

impl Topology {
    fn build(graph: &Graph) -> Self {
        let ids: Vec<String> = graph.nodes.keys().cloned().collect();
        let kinds: Vec<NodeKind> = graph.nodes.values().copied().collect();
        let index: HashMap<&str, usize> = ids
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let mut preds = vec![Vec::new(); ids.len()];
        let mut succs = vec![Vec::new(); ids.len()];
        for (f, t) in &graph.edges {
            if let (Some(&a), Some(&b)) = (index.get(f.as_str()), index.get(t.as_str())) {
                preds[b].push(a);
                succs[a].push(b);
            }
        }
        Self {
            ids,
            kinds,
            preds,
            succs,
        }
    }

    /// Kahn's algorithm taking the lexicographically smallest ready id
    /// first. Returns the order and the nodes left over (non-empty iff cyclic).
    fn kahn(&self) -> (Vec<usize>, Vec<usize>) {
        let n = self.ids.len();
        let mut indeg: Vec<usize> = self.preds.iter().map(Vec::len).collect();
        // ids are sorted, so index order is lexicographic order
        let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = ready.pop_first() {
            order.push(i);
            for &s in &self.succs[i] {
                indeg[s] -= 1;
                if indeg[s] == 0 {
                    ready.insert(s);
                }
            }
        }
        let rest = (0..n).filter(|&i| indeg[i] > 0).collect();
        (order, rest)
    }
}

fn check_parameters(id: &str, kind: &NodeKind, out: &mut Vec<Violation>) {
    let bad = match kind {
        NodeKind::Conv(c) => {
            if c.kernel_h == 0 || c.kernel_w == 0 {
                Some("kernel must be positive")
            } else if c.stride == 0 {
                Some("stride must be positive")
            } else if c.out_channels == 0 {
                Some("out channels must be positive")
            } else {
                None
            }
        }
        NodeKind::Fc { out_features, .. } if *out_features == 0 => {
            Some("out features must be positive")
        }
        NodeKind::MaxPool(p) | NodeKind::AvgPool(p) => {
            if p.kernel == 0 {
                Some("kernel must be positive")
            } else if p.stride == 0 {
                Some("stride must be positive")
            } else {
                None
            }
        }
        NodeKind::PadShortcut {
            stride,
            out_channels,
        } => {
            if *stride == 0 {
                Some("stride must be positive")
            } else if *out_channels == 0 {
                Some("out channels must be positive")
            } else {
                None
            }
        }
        _ => None,
    };
    if let Some(msg) = bad {
        out.push(Violation::at(id, Rule::InvalidParameter, msg));
    }
}

fn window_out(input: u64, kernel: u64, stride: u64, padding: u64) -> Option<u64> {
    let padded = input + 2 * padding;
    if padded < kernel {
        None
    } else {
        Some((padded - kernel) / stride + 1)
    }
}

/// Shape of a node given its predecessors' shapes.
fn node_shape(
    id: &str,
    kind: &NodeKind,
    inputs: &[Shape],
    input_shape: ImageShape,
) -> Result<Shape, Violation> {
    let spatial = |s: &Shape| match *s {
        Shape::Spatial(img) => Ok(img),
        Shape::Flat(_) => Err(Violation::at(
            id,
            Rule::FlatInput,
            format!("{} needs a spatial input, got {}", kind.keyword(), s),
        )),
    };
    let underflow = |img: ImageShape| {
        Violation::at(
            id,
            Rule::ShapeUnderflow,
            format!("shape underflow at node {id}: window larger than padded input {img}"),
        )
    };
    match kind {
        NodeKind::Input => Ok(Shape::Spatial(input_shape)),
        NodeKind::Output => Ok(inputs[0]),
        NodeKind::Conv(c) => {
            let img = spatial(&inputs[0])?;
            let h = window_out(img.height, c.kernel_h, c.stride, c.padding)
                .ok_or_else(|| underflow(img))?;
            let w = window_out(img.width, c.kernel_w, c.stride, c.padding)
                .ok_or_else(|| underflow(img))?;
            Ok(Shape::Spatial(ImageShape::new(c.out_channels, h, w)))
        }
        NodeKind::MaxPool(p) | NodeKind::AvgPool(p) => {
            let img = spatial(&inputs[0])?;
            let h = window_out(img.height, p.kernel, p.stride, p.padding)
                .ok_or_else(|| underflow(img))?;
            let w = window_out(img.width, p.kernel, p.stride, p.padding)
                .ok_or_else(|| underflow(img))?;
            Ok(Shape::Spatial(ImageShape::new(img.channels, h, w)))
        }
        NodeKind::GlobalAvgPool => Ok(Shape::Flat(spatial(&inputs[0])?.channels)),
        NodeKind::PadShortcut {
            stride,
            out_channels,
        } => {
            let img = spatial(&inputs[0])?;
            if *out_channels < img.channels {
                return Err(Violation::at(
                    id,
                    Rule::PadShrinksChannels,
                    format!(
                        "{} channels cannot be padded to {}",
                        img.channels, out_channels
                    ),
                ));
            }
            let h = window_out(img.height, 1, *stride, 0).ok_or_else(|| underflow(img))?;
            let w = window_out(img.width, 1, *stride, 0).ok_or_else(|| underflow(img))?;
            Ok(Shape::Spatial(ImageShape::new(*out_channels, h, w)))
        }
        NodeKind::Fc { out_features, .. } => {
            if inputs[0].flat_features() == 0 {
                return Err(underflow(input_shape));
            }
            Ok(Shape::Flat(*out_features))
        }
        NodeKind::Add => {
            let first = inputs[0];
            if let Some(other) = inputs.iter().find(|s| **s != first) {
                return Err(Violation::at(
                    id,
                    Rule::AddShapeMismatch,
                    format!("add shape mismatch: {first} vs {other}"),
                ));
            }
            Ok(first)
        }
        NodeKind::Concat => match inputs[0] {
            Shape::Spatial(first) => {
                let mut channels = 0;
                for s in inputs {
                    match *s {
                        Shape::Spatial(img)
                            if img.height == first.height && img.width == first.width =>
                        {
                            channels += img.channels
                        }
                        other => {
                            return Err(Violation::at(
                                id,
                                Rule::ConcatShapeMismatch,
                                format!("concat shape mismatch: {} vs {}", inputs[0], other),
                            ))
                        }
                    }
                }
                Ok(Shape::Spatial(ImageShape::new(
                    channels,
                    first.height,
                    first.width,
                )))
            }
            Shape::Flat(_) => {
                let mut total = 0;
                for s in inputs {
                    match *s {
                        Shape::Flat(f) => total += f,
                        other => {
                            return Err(Violation::at(
                                id,
                                Rule::ConcatShapeMismatch,
                                format!("concat shape mismatch: {} vs {}", inputs[0], other),
                            ))
                        }
                    }
                }
                Ok(Shape::Flat(total))
            }
        },
    }
}

/// Runs shape inference along `order`, stopping at the first failure.
fn shape_pass(graph: &Graph, topo: &Topology, order: &[usize]) -> Result<Vec<Shape>, Violation> {
    let mut shapes: Vec<Option<Shape>> = vec![None; topo.ids.len()];
    for &i in order {
        let inputs: Vec<Shape> = topo.preds[i]
            .iter()
            .map(|&p| shapes[p].expect("predecessor shaped before successor"))
            .collect();
        shapes[i] = Some(node_shape(
            &topo.ids[i],
            &topo.kinds[i],
            &inputs,
            graph.input_shape,
        )?);
    }
    Ok(shapes
        .into_iter()
        .map(|s| s.expect("every node shaped"))
        .collect())
}

/// Checks every graph invariant. Violations are returned as data; an empty
/// report means the graph can be turned into a [`Network`].
pub fn validate(graph: &Graph) -> ValidationReport {
    let mut v = Vec::new();
    if !is_valid_name(&graph.name) {
        v.push(Violation::global(
            Rule::InvalidName,
            "name must be printable ASCII without double quotes",
        ));
    }
    let img = graph.input_shape;
    if img.channels == 0 || img.height == 0 || img.width == 0 {
        v.push(Violation::global(
            Rule::InvalidParameter,
            format!("input shape {img} has a zero dimension"),
        ));
    }
    for (id, kind) in &graph.nodes {
        if !is_valid_id(id) {
            v.push(Violation::at(id, Rule::InvalidId, "ids use [A-Za-z0-9_.-]"));
        }
        let reserved = match kind {
            NodeKind::Input => id != INPUT_ID,
            NodeKind::Output => id != OUTPUT_ID,
            _ => id == INPUT_ID || id == OUTPUT_ID,
        };
        if reserved {
            v.push(Violation::at(
                id,
                Rule::ReservedId,
                format!("input must be named '{INPUT_ID}', output '{OUTPUT_ID}', and no other node may use these"),
            ));
        }
        check_parameters(id, kind, &mut v);
    }

    let mut seen = BTreeSet::new();
    for (f, t) in &graph.edges {
        for end in [f, t] {
            if !graph.nodes.contains_key(end) {
                v.push(Violation::at(
                    end,
                    Rule::DanglingEdge,
                    format!("edge {f} -> {t} names an unknown node"),
                ));
            }
        }
        if !seen.insert((f, t)) {
            v.push(Violation::at(
                t,
                Rule::DuplicateEdge,
                format!("edge {f} -> {t} appears twice"),
            ));
        }
    }

    let inputs = graph
        .nodes
        .values()
        .filter(|k| **k == NodeKind::Input)
        .count();
    let outputs = graph
        .nodes
        .values()
        .filter(|k| **k == NodeKind::Output)
        .count();
    if inputs != 1 {
        v.push(Violation::global(
            Rule::InputCount,
            format!("expected exactly one input node, found {inputs}"),
        ));
    }
    if outputs != 1 {
        v.push(Violation::global(
            Rule::OutputCount,
            format!("expected exactly one output node, found {outputs}"),
        ));
    }

    let topo = Topology::build(graph);
    for i in 0..topo.ids.len() {
        let indeg = topo.preds[i].len();
        let outdeg = topo.succs[i].len();
        let problem = match topo.kinds[i] {
            NodeKind::Input if indeg != 0 => Some(format!("input has {indeg} predecessors")),
            NodeKind::Output if outdeg != 0 => Some(format!("output has {outdeg} successors")),
            NodeKind::Add | NodeKind::Concat if indeg < 2 => Some(format!(
                "{} needs at least 2 predecessors, has {indeg}",
                topo.kinds[i].keyword()
            )),
            NodeKind::Input | NodeKind::Add | NodeKind::Concat => None,
            k if indeg != 1 => Some(format!(
                "{} needs exactly 1 predecessor, has {indeg}",
                k.keyword()
            )),
            _ => None,
        };
        if let Some(p) = problem {
            v.push(Violation::at(&topo.ids[i], Rule::Arity, p));
        }
    }

    let (order, rest) = topo.kahn();
    if !rest.is_empty() {
        let names: Vec<&str> = rest.iter().map(|&i| topo.ids[i].as_str()).collect();
        v.push(Violation::at(
            names[0],
            Rule::Acyclicity,
            format!("cycle among {}", names.join(", ")),
        ));
        return ValidationReport { violations: v };
    }

    if inputs == 1 && outputs == 1 {
        let n = topo.ids.len();
        let src = topo
            .kinds
            .iter()
            .position(|k| *k == NodeKind::Input)
            .expect("one input");
        let dst = topo
            .kinds
            .iter()
            .position(|k| *k == NodeKind::Output)
            .expect("one output");
        let fwd = reach(src, &topo.succs, n);
        let bwd = reach(dst, &topo.preds, n);
        for i in 0..n {
            if !(fwd[i] && bwd[i]) {
                v.push(Violation::at(
                    &topo.ids[i],
                    Rule::NotOnPath,
                    "node does not lie on any input-output path",
                ));
            }
        }
    }

    if v.is_empty() {
        if let Err(e) = shape_pass(graph, &topo, &order) {
            v.push(e);
        }
    }
    ValidationReport { violations: v }
}

fn reach(start: usize, adj: &[Vec<usize>], n: usize) -> Vec<bool> {
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(i) = queue.pop_front() {
        for &j in &adj[i] {
            if !seen[j] {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    seen
}

/// Deterministic topological order (ties broken by lexicographic id).
/// Rejects graphs that do not validate.
pub fn topo_order(graph: &Graph) -> Result<Vec<String>, GraphError> {
    let net = Network::new(graph.clone())?;
    Ok(net.order().iter().map(|&i| net.id(i).to_string()).collect())
}

/// Shape at every node, keyed by id.
pub type ShapeMap = BTreeMap<String, Shape>;

pub fn infer_shapes(graph: &Graph) -> Result<ShapeMap, GraphError> {
    Ok(Network::new(graph.clone())?.shape_map())
}

/// A validated, immutable graph with its topological order, adjacency and
/// inferred shapes precomputed. Every analysis runs on this type.
#[derive(Debug, Clone)]
pub struct Network {
    graph: Graph,
    topo: Topology,
    order: Vec<usize>,
    shapes: Vec<Shape>,
    input: usize,
    output: usize,
}

impl Network {
    pub fn new(graph: Graph) -> Result<Self, GraphError> {
        let report = validate(&graph);
        if !report.is_ok() {
            return Err(GraphError::Invalid(report));
        }
        let topo = Topology::build(&graph);
        let (order, _) = topo.kahn();
        let shapes = shape_pass(&graph, &topo, &order).expect("validated graph has shapes");
        let input = order[0];
        let output = *order.last().expect("non-empty");
        debug_assert_eq!(topo.kinds[input], NodeKind::Input);
        debug_assert_eq!(topo.kinds[output], NodeKind::Output);
        Ok(Self {
            graph,
            topo,
            order,
            shapes,
            input,
            output,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn name(&self) -> &str {
        &self.graph.name
    }

    pub fn len(&self) -> usize {
        self.topo.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.topo.ids.is_empty()
    }

    /// Node indices in topological order.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn id(&self, i: usize) -> &str {
        &self.topo.ids[i]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.topo.ids.binary_search_by(|s| s.as_str().cmp(id)).ok()
    }

    pub fn kind(&self, i: usize) -> &NodeKind {
        &self.topo.kinds[i]
    }

    pub fn preds(&self, i: usize) -> &[usize] {
        &self.topo.preds[i]
    }

    pub fn succs(&self, i: usize) -> &[usize] {
        &self.topo.succs[i]
    }

    pub fn shape(&self, i: usize) -> Shape {
        self.shapes[i]
    }

    pub fn input(&self) -> usize {
        self.input
    }

    pub fn output(&self) -> usize {
        self.output
    }

    pub fn shape_map(&self) -> ShapeMap {
        self.topo
            .ids
            .iter()
            .cloned()
            .zip(self.shapes.iter().copied())
            .collect()
    }

    /// Maximum, over all input-output paths, of the summed node weights.
    pub fn longest_weighted_path(&self, weight: impl Fn(&NodeKind) -> u64) -> u64 {
        let mut best = vec![0u64; self.len()];
        for &i in &self.order {
            let incoming = self.preds(i).iter().map(|&p| best[p]).max().unwrap_or(0);
            best[i] = incoming + weight(self.kind(i));
        }
        best[self.output]
    }
}

/// Free-function form of [`Network::longest_weighted_path`].
pub fn longest_weighted_path(net: &Network, weight: impl Fn(&NodeKind) -> u64) -> u64 {
    net.longest_weighted_path(weight)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn conv3(out: u64) -> NodeKind {
        NodeKind::Conv(ConvSpec::square(3, 1, 1, out))
    }

    fn chain() -> Graph {
        let mut g = Graph::new("t", ImageShape::new(3, 32, 32));
        g.add("c1", conv3(8), &["input"]).unwrap();
        g.add("output", NodeKind::Output, &["c1"]).unwrap();
        g
    }

    fn diamond() -> Graph {
        let mut g = Graph::new("d", ImageShape::new(8, 16, 16));
        g.add("b", conv3(8), &["input"]).unwrap();
        g.add("a", conv3(8), &["input"]).unwrap();
        g.add("m", NodeKind::Add, &["a", "b"]).unwrap();
        g.add("output", NodeKind::Output, &["m"]).unwrap();
        g
    }

    #[test]
    fn minimal_chain_is_valid() {
        assert!(validate(&chain()).is_ok());
    }

    #[test]
    fn two_node_cycle_is_rejected() {
        let mut g = chain();
        g.add("x", conv3(8), &["c1"]).unwrap();
        g.add("y", conv3(8), &["x"]).unwrap();
        g.add_edge("y", "x");
        let r = validate(&g);
        assert!(r.has(Rule::Acyclicity), "{r}");
        assert!(topo_order(&g).is_err());
    }

    #[test]
    fn add_shape_mismatch() {
        let mut g = Graph::new("m", ImageShape::new(3, 56, 56));
        g.add("a", conv3(64), &["input"]).unwrap();
        g.add(
            "b",
            NodeKind::Conv(ConvSpec::square(3, 2, 1, 64)),
            &["input"],
        )
        .unwrap();
        g.add("sum", NodeKind::Add, &["a", "b"]).unwrap();
        g.add("output", NodeKind::Output, &["sum"]).unwrap();
        let r = validate(&g);
        assert!(r.has(Rule::AddShapeMismatch), "{r}");
        assert!(r.to_string().contains("(64, 56, 56)"));
        assert!(r.to_string().contains("(64, 28, 28)"));
    }

    #[test]
    fn structural_violations_name_nodes() {
        let mut g = chain();
        g.add("orphan", conv3(8), &["input"]).unwrap();
        g.add_edge("c1", "ghost");
        let r = validate(&g);
        assert!(r.has(Rule::NotOnPath));
        assert!(r.has(Rule::DanglingEdge));
        let orphan = r
            .violations
            .iter()
            .find(|v| v.rule == Rule::NotOnPath)
            .unwrap();
        assert_eq!(orphan.node.as_deref(), Some("orphan"));

        let mut g = Graph::empty("e", ImageShape::new(1, 1, 1));
        g.add_node("output", NodeKind::Output).unwrap();
        assert!(validate(&g).has(Rule::InputCount));

        let mut g = chain();
        g.add("m", NodeKind::Add, &["c1"]).unwrap();
        assert!(validate(&g).has(Rule::Arity));

        let mut g = Graph::new("t", ImageShape::new(3, 8, 8));
        g.add("c", conv3(4), &["input"]).unwrap();
        g.add("output", NodeKind::Output, &["c"]).unwrap();
        g.add_edge("input", "c");
        assert!(validate(&g).has(Rule::DuplicateEdge));
    }

    #[test]
    fn reserved_and_malformed_ids() {
        let mut g = Graph::new("bad \"name\"", ImageShape::new(3, 8, 8));
        g.add("has space", conv3(4), &["input"]).unwrap();
        g.add("output", NodeKind::Output, &["has space"]).unwrap();
        let r = validate(&g);
        assert!(r.has(Rule::InvalidName));
        assert!(r.has(Rule::InvalidId));

        let mut g = Graph::new("t", ImageShape::new(3, 8, 8));
        g.add("output2", NodeKind::Output, &["input"]).unwrap();
        assert!(validate(&g).has(Rule::ReservedId));
    }

    #[test]
    fn topo_order_chain_and_diamond() {
        assert_eq!(topo_order(&chain()).unwrap(), ["input", "c1", "output"]);
        let order = topo_order(&diamond()).unwrap();
        assert_eq!(order, ["input", "a", "b", "m", "output"]);
    }

    #[test]
    fn topo_order_breaks_ties_lexicographically() {
        let mut g = Graph::new("t", ImageShape::new(4, 8, 8));
        g.add("z", conv3(4), &["input"]).unwrap();
        g.add("y", conv3(4), &["z"]).unwrap();
        g.add("b", conv3(4), &["input"]).unwrap();
        g.add("m", NodeKind::Concat, &["y", "b"]).unwrap();
        g.add("output", NodeKind::Output, &["m"]).unwrap();
        assert_eq!(
            topo_order(&g).unwrap(),
            ["input", "b", "z", "y", "m", "output"]
        );
    }

    #[test]
    fn conv_and_pool_shapes() {
        let mut g = Graph::new("s", ImageShape::new(3, 224, 224));
        g.add(
            "c7",
            NodeKind::Conv(ConvSpec::square(7, 2, 3, 64)),
            &["input"],
        )
        .unwrap();
        g.add(
            "c3",
            NodeKind::Conv(ConvSpec::square(3, 1, 1, 16)),
            &["input"],
        )
        .unwrap();
        g.add("pool", NodeKind::MaxPool(PoolSpec::new(3, 2, 0)), &["c7"])
            .unwrap();
        g.add("gap1", NodeKind::GlobalAvgPool, &["pool"]).unwrap();
        g.add("gap2", NodeKind::GlobalAvgPool, &["c3"]).unwrap();
        g.add("cat", NodeKind::Concat, &["gap1", "gap2"]).unwrap();
        g.add(
            "fc",
            NodeKind::Fc {
                out_features: 10,
                bias: true,
            },
            &["cat"],
        )
        .unwrap();
        g.add("output", NodeKind::Output, &["fc"]).unwrap();
        let shapes = infer_shapes(&g).unwrap();
        assert_eq!(shapes["c7"], Shape::Spatial(ImageShape::new(64, 112, 112)));
        assert_eq!(shapes["c3"], Shape::Spatial(ImageShape::new(16, 224, 224)));
        assert_eq!(shapes["pool"], Shape::Spatial(ImageShape::new(64, 55, 55)));
        assert_eq!(shapes["cat"], Shape::Flat(80));
        assert_eq!(shapes["output"], Shape::Flat(10));
    }

    #[test]
    fn shape_underflow_is_reported() {
        let mut g = Graph::new("u", ImageShape::new(3, 4, 4));
        g.add(
            "c",
            NodeKind::Conv(ConvSpec::square(7, 1, 0, 8)),
            &["input"],
        )
        .unwrap();
        g.add("output", NodeKind::Output, &["c"]).unwrap();
        let r = validate(&g);
        assert!(r.has(Rule::ShapeUnderflow));
        assert!(r.to_string().contains("shape underflow at node c"));
        assert!(infer_shapes(&g).is_err());
    }

    #[test]
    fn flatten_is_implicit_at_first_fc() {
        let mut g = Graph::new("f", ImageShape::new(2, 3, 5));
        g.add(
            "fc",
            NodeKind::Fc {
                out_features: 4,
                bias: false,
            },
            &["input"],
        )
        .unwrap();
        g.add("output", NodeKind::Output, &["fc"]).unwrap();
        let net = Network::new(g).unwrap();
        let fc = net.index_of("fc").unwrap();
        assert_eq!(net.shape(net.preds(fc)[0]).flat_features(), 30);

        let mut g = Graph::new("f", ImageShape::new(2, 3, 5));
        g.add(
            "fc",
            NodeKind::Fc {
                out_features: 4,
                bias: false,
            },
            &["input"],
        )
        .unwrap();
        g.add("c", conv3(2), &["fc"]).unwrap();
        g.add("output", NodeKind::Output, &["c"]).unwrap();
        assert!(validate(&g).has(Rule::FlatInput));
    }

    #[test]
    fn longest_path_examples() {
        let mut g = Graph::new("c", ImageShape::new(3, 16, 16));
        let mut prev = "input".to_string();
        for i in 0..5 {
            let id = format!("c{i}");
            g.add(id.clone(), conv3(3), &[prev.as_str()]).unwrap();
            prev = id;
        }
        g.add("output", NodeKind::Output, &[prev.as_str()]).unwrap();
        let w = |k: &NodeKind| u64::from(k.is_weighted());
        assert_eq!(longest_weighted_path(&Network::new(g).unwrap(), w), 5);

        let mut g = Graph::new("r", ImageShape::new(8, 16, 16));
        g.add("b1", conv3(8), &["input"]).unwrap();
        g.add("b2", conv3(8), &["b1"]).unwrap();
        g.add("sum", NodeKind::Add, &["b2", "input"]).unwrap();
        g.add("output", NodeKind::Output, &["sum"]).unwrap();
        assert_eq!(Network::new(g).unwrap().longest_weighted_path(w), 2);
    }

    #[test]
    fn pad_shortcut_shape() {
        let mut g = Graph::new("p", ImageShape::new(64, 56, 56));
        g.add(
            "pad",
            NodeKind::PadShortcut {
                stride: 2,
                out_channels: 128,
            },
            &["input"],
        )
        .unwrap();
        g.add("output", NodeKind::Output, &["pad"]).unwrap();
        let shapes = infer_shapes(&g).unwrap();
        assert_eq!(shapes["pad"], Shape::Spatial(ImageShape::new(128, 28, 28)));

        let mut g = Graph::new("p", ImageShape::new(64, 56, 56));
        g.add(
            "pad",
            NodeKind::PadShortcut {
                stride: 1,
                out_channels: 32,
            },
            &["input"],
        )
        .unwrap();
        g.add("output", NodeKind::Output, &["pad"]).unwrap();
        assert!(validate(&g).has(Rule::PadShrinksChannels));
    }
}
