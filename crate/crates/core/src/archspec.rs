//! The `.archspec` text format.
//!
//! ```text
//! # archspec v1
//! network "toy"
//! input 3 32 32
//! conv c1 k=3 s=1 p=1 out=8 bias=true from=input
//! maxpool p1 k=2 s=2 p=0 from=c1
//! output from=p1
//! ```
//!
//! One declaration per line, `#` starts a comment, tokens are separated by
//! whitespace. Node lines are `<kind> <id> [key=value ...] from=<id>[,<id>...]`
//! with kind one of `conv fc maxpool avgpool gap pad add concat output`
//! (`output` takes no id). Kernels are `k=<n>` or `k=<h>x<w>`; `s` defaults
//! to 1, `p` to 0 and `bias` to true. References may point forward; the
//! resulting graph must validate.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::graph::{
    is_valid_id, is_valid_name, validate, ConvSpec, Graph, ImageShape, Network, NodeKind, PoolSpec,
    Violation, INPUT_ID, OUTPUT_ID,
};

/// Version header emitted by [`serialize`].
pub const HEADER: &str = "# archspec v1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("lexical error: {0}")]
    Lexical(String),
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unknown node kind '{0}'")]
    UnknownKind(String),
    #[error("unknown parameter '{key}' for {kind}")]
    UnknownParameter { kind: &'static str, key: String },
    #[error("invalid value '{value}' for parameter '{key}'")]
    InvalidValue { key: String, value: String },
    #[error("missing parameter '{key}' for {kind}")]
    MissingParameter {
        kind: &'static str,
        key: &'static str,
    },
    #[error("duplicate parameter '{0}'")]
    DuplicateParameter(String),
    #[error("dangling reference {0}")]
    DanglingReference(String),
    #[error("duplicate id {0}")]
    DuplicateId(String),
    #[error("duplicate input")]
    DuplicateInput,
    #[error("duplicate network declaration")]
    DuplicateNetwork,
    #[error("duplicate output")]
    DuplicateOutput,
    #[error("missing network declaration")]
    MissingNetwork,
    #[error("missing input declaration")]
    MissingInput,
    #[error("validation failed: {0}")]
    Validation(Violation),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at line {line}, column {column}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum TokenText {
    Word(String),
    Quoted(String),
}

#[derive(Debug, Clone)]
struct Token {
    text: TokenText,
    column: usize,
}

impl Token {
    fn word(&self) -> Option<&str> {
        match &self.text {
            TokenText::Word(w) => Some(w),
            TokenText::Quoted(_) => None,
        }
    }
}

fn tokenize(line: &str, lineno: usize) -> Result<Vec<Token>, ParseError> {
    let err = |column: usize, msg: String| ParseError {
        kind: ParseErrorKind::Lexical(msg),
        line: lineno,
        column,
    };
    let bytes = line.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if !b.is_ascii() {
            return Err(err(i + 1, "non-ASCII character".into()));
        }
        match b {
            b' ' | b'\t' | b'\r' => i += 1,
            b'#' => break,
            b'"' => {
                let start = i;
                let close = bytes[i + 1..]
                    .iter()
                    .position(|&c| c == b'"')
                    .ok_or_else(|| err(start + 1, "unterminated string".into()))?;
                let text = &line[i + 1..i + 1 + close];
                if let Some(p) = text.bytes().position(|c| !(0x20..0x7f).contains(&c)) {
                    return Err(err(start + 2 + p, "control character in string".into()));
                }
                tokens.push(Token {
                    text: TokenText::Quoted(text.to_string()),
                    column: start + 1,
                });
                i += close + 2;
            }
            c if c.is_ascii_control() => {
                return Err(err(i + 1, format!("control character 0x{c:02x}")))
            }
            _ => {
                let start = i;
                while i < bytes.len() && !matches!(bytes[i], b' ' | b'\t' | b'\r' | b'#' | b'"') {
                    if !bytes[i].is_ascii() || bytes[i].is_ascii_control() {
                        return Err(err(i + 1, "invalid character".into()));
                    }
                    i += 1;
                }
                tokens.push(Token {
                    text: TokenText::Word(line[start..i].to_string()),
                    column: start + 1,
                });
            }
        }
    }
    Ok(tokens)
}

/// A `from=` reference with its location.
#[derive(Debug, Clone)]
struct Reference {
    id: String,
    column: usize,
}

#[derive(Debug, Clone)]
struct NodeDecl {
    id: String,
    kind: NodeKind,
    from: Vec<Reference>,
    line: usize,
    column: usize,
}

struct Params {
    values: BTreeMap<String, (String, usize)>,
    line: usize,
    kind: &'static str,
}

impl Params {
    fn error(&self, kind: ParseErrorKind, column: usize) -> ParseError {
        ParseError {
            kind,
            line: self.line,
            column,
        }
    }

    fn uint(&self, key: &'static str) -> Result<Option<u64>, ParseError> {
        match self.values.get(key) {
            None => Ok(None),
            Some((v, col)) => v.parse::<u64>().map(Some).map_err(|_| {
                self.error(
                    ParseErrorKind::InvalidValue {
                        key: key.into(),
                        value: v.clone(),
                    },
                    *col,
                )
            }),
        }
    }

    fn required(&self, key: &'static str, column: usize) -> Result<u64, ParseError> {
        self.uint(key)?.ok_or_else(|| {
            self.error(
                ParseErrorKind::MissingParameter {
                    kind: self.kind,
                    key,
                },
                column,
            )
        })
    }

    fn bias(&self) -> Result<bool, ParseError> {
        match self.values.get("bias") {
            None => Ok(true),
            Some((v, col)) => match v.as_str() {
                "true" => Ok(true),
                "false" => Ok(false),
                _ => Err(self.error(
                    ParseErrorKind::InvalidValue {
                        key: "bias".into(),
                        value: v.clone(),
                    },
                    *col,
                )),
            },
        }
    }

    /// `k=<n>` or `k=<h>x<w>`.
    fn kernel(&self, column: usize, allow_rect: bool) -> Result<(u64, u64), ParseError> {
        let (v, col) = self.values.get("k").ok_or_else(|| {
            self.error(
                ParseErrorKind::MissingParameter {
                    kind: self.kind,
                    key: "k",
                },
                column,
            )
        })?;
        let invalid = || {
            self.error(
                ParseErrorKind::InvalidValue {
                    key: "k".into(),
                    value: v.clone(),
                },
                *col,
            )
        };
        match v.split_once('x') {
            None => {
                let k = v.parse::<u64>().map_err(|_| invalid())?;
                Ok((k, k))
            }
            Some((h, w)) if allow_rect => Ok((
                h.parse().map_err(|_| invalid())?,
                w.parse().map_err(|_| invalid())?,
            )),
            Some(_) => Err(invalid()),
        }
    }
}

fn allowed_keys(kind: &str) -> Option<&'static [&'static str]> {
    Some(match kind {
        "conv" => &["k", "s", "p", "out", "bias"],
        "fc" => &["out", "bias"],
        "maxpool" | "avgpool" => &["k", "s", "p"],
        "pad" => &["s", "out"],
        "gap" | "add" | "concat" | "output" => &[],
        _ => return None,
    })
}

fn static_kind(kind: &str) -> &'static str {
    match kind {
        "conv" => "conv",
        "fc" => "fc",
        "maxpool" => "maxpool",
        "avgpool" => "avgpool",
        "pad" => "pad",
        "gap" => "gap",
        "add" => "add",
        "concat" => "concat",
        _ => "output",
    }
}

fn parse_node(tokens: &[Token], line: usize) -> Result<NodeDecl, ParseError> {
    let at = |kind: ParseErrorKind, column: usize| ParseError { kind, line, column };
    let head = &tokens[0];
    let kw = head.word().expect("caller checked");
    let keys = allowed_keys(kw)
        .ok_or_else(|| at(ParseErrorKind::UnknownKind(kw.to_string()), head.column))?;
    let kind_name = static_kind(kw);

    let (id, rest) = if kw == "output" {
        (OUTPUT_ID.to_string(), &tokens[1..])
    } else {
        let tok = tokens.get(1).ok_or_else(|| {
            at(
                ParseErrorKind::Syntax(format!("{kw} needs an id")),
                head.column,
            )
        })?;
        let id = tok.word().filter(|w| !w.contains('=')).ok_or_else(|| {
            at(
                ParseErrorKind::Syntax(format!("{kw} needs an id before its parameters")),
                tok.column,
            )
        })?;
        if !is_valid_id(id) {
            return Err(at(
                ParseErrorKind::Syntax(format!("invalid id '{id}'")),
                tok.column,
            ));
        }
        (id.to_string(), &tokens[2..])
    };

    let mut values = BTreeMap::new();
    let mut from = None;
    for tok in rest {
        let word = tok.word().ok_or_else(|| {
            at(
                ParseErrorKind::Syntax("unexpected string".into()),
                tok.column,
            )
        })?;
        let (key, value) = word.split_once('=').ok_or_else(|| {
            at(
                ParseErrorKind::Syntax(format!("expected key=value, got '{word}'")),
                tok.column,
            )
        })?;
        if key == "from" {
            if from.is_some() {
                return Err(at(
                    ParseErrorKind::DuplicateParameter("from".into()),
                    tok.column,
                ));
            }
            let mut refs = Vec::new();
            let mut col = tok.column + 5;
            for r in value.split(',') {
                if !is_valid_id(r) {
                    return Err(at(
                        ParseErrorKind::Syntax(format!("invalid reference '{r}'")),
                        col,
                    ));
                }
                refs.push(Reference {
                    id: r.to_string(),
                    column: col,
                });
                col += r.len() + 1;
            }
            from = Some(refs);
            continue;
        }
        if !keys.contains(&key) {
            return Err(at(
                ParseErrorKind::UnknownParameter {
                    kind: kind_name,
                    key: key.to_string(),
                },
                tok.column,
            ));
        }
        if values
            .insert(
                key.to_string(),
                (value.to_string(), tok.column + key.len() + 1),
            )
            .is_some()
        {
            return Err(at(
                ParseErrorKind::DuplicateParameter(key.to_string()),
                tok.column,
            ));
        }
    }
    let from = from.ok_or_else(|| {
        at(
            ParseErrorKind::MissingParameter {
                kind: kind_name,
                key: "from",
            },
            head.column,
        )
    })?;

    let p = Params {
        values,
        line,
        kind: kind_name,
    };
    let col = head.column;
    let stride = p.uint("s")?.unwrap_or(1);
    let padding = p.uint("p")?.unwrap_or(0);
    let kind = match kw {
        "conv" => {
            let (kernel_h, kernel_w) = p.kernel(col, true)?;
            NodeKind::Conv(ConvSpec {
                kernel_h,
                kernel_w,
                stride,
                padding,
                out_channels: p.required("out", col)?,
                bias: p.bias()?,
            })
        }
        "fc" => NodeKind::Fc {
            out_features: p.required("out", col)?,
            bias: p.bias()?,
        },
        "maxpool" | "avgpool" => {
            let (kernel, _) = p.kernel(col, false)?;
            let spec = PoolSpec::new(kernel, stride, padding);
            if kw == "maxpool" {
                NodeKind::MaxPool(spec)
            } else {
                NodeKind::AvgPool(spec)
            }
        }
        "pad" => NodeKind::PadShortcut {
            stride,
            out_channels: p.required("out", col)?,
        },
        "gap" => NodeKind::GlobalAvgPool,
        "add" => NodeKind::Add,
        "concat" => NodeKind::Concat,
        _ => NodeKind::Output,
    };
    Ok(NodeDecl {
        id,
        kind,
        from,
        line,
        column: col,
    })
}

fn parse_uint(
    tok: Option<&Token>,
    line: usize,
    fallback_col: usize,
    what: &str,
) -> Result<u64, ParseError> {
    let tok = tok.ok_or_else(|| ParseError {
        kind: ParseErrorKind::Syntax(format!("input needs {what}")),
        line,
        column: fallback_col,
    })?;
    tok.word()
        .and_then(|w| w.parse().ok())
        .ok_or_else(|| ParseError {
            kind: ParseErrorKind::Syntax(format!("input {what} must be a non-negative integer")),
            line,
            column: tok.column,
        })
}

/// Parses a document into a graph that is guaranteed to validate.
pub fn parse(text: &str) -> Result<Graph, ParseError> {
    let mut name: Option<(String, usize)> = None;
    let mut input: Option<(ImageShape, usize)> = None;
    let mut decls: Vec<NodeDecl> = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();

    for (idx, raw) in text.split('\n').enumerate() {
        let line = idx + 1;
        let tokens = tokenize(raw, line)?;
        let Some(head) = tokens.first() else { continue };
        let at = |kind: ParseErrorKind, column: usize| ParseError { kind, line, column };
        let kw = head.word().ok_or_else(|| {
            at(
                ParseErrorKind::Syntax("line must start with a keyword".into()),
                head.column,
            )
        })?;
        match kw {
            "network" => {
                if name.is_some() {
                    return Err(at(ParseErrorKind::DuplicateNetwork, head.column));
                }
                match tokens.get(1).map(|t| (&t.text, t.column)) {
                    Some((TokenText::Quoted(n), _)) if tokens.len() == 2 => {
                        name = Some((n.clone(), line))
                    }
                    Some((_, c)) => {
                        return Err(at(
                            ParseErrorKind::Syntax("expected network \"<name>\"".into()),
                            c,
                        ));
                    }
                    None => {
                        return Err(at(
                            ParseErrorKind::Syntax("expected network \"<name>\"".into()),
                            head.column,
                        ));
                    }
                }
            }
            "input" => {
                if input.is_some() {
                    return Err(at(ParseErrorKind::DuplicateInput, head.column));
                }
                if tokens.len() > 4 {
                    return Err(at(
                        ParseErrorKind::Syntax("input takes exactly C H W".into()),
                        tokens[4].column,
                    ));
                }
                let c = parse_uint(tokens.get(1), line, head.column, "channels")?;
                let h = parse_uint(tokens.get(2), line, head.column, "height")?;
                let w = parse_uint(tokens.get(3), line, head.column, "width")?;
                input = Some((ImageShape::new(c, h, w), line));
                seen.insert(INPUT_ID.to_string(), line);
            }
            _ => {
                let decl = parse_node(&tokens, line)?;
                if decl.id == OUTPUT_ID
                    && seen.contains_key(OUTPUT_ID)
                    && decl.kind == NodeKind::Output
                {
                    return Err(at(ParseErrorKind::DuplicateOutput, decl.column));
                }
                if seen.contains_key(&decl.id) || (decl.id == INPUT_ID) {
                    let col = if decl.kind == NodeKind::Output {
                        decl.column
                    } else {
                        tokens[1].column
                    };
                    return Err(at(ParseErrorKind::DuplicateId(decl.id.clone()), col));
                }
                seen.insert(decl.id.clone(), line);
                decls.push(decl);
            }
        }
    }

    let (name, _) = name.ok_or(ParseError {
        kind: ParseErrorKind::MissingNetwork,
        line: 1,
        column: 1,
    })?;
    let (shape, input_line) = input.ok_or(ParseError {
        kind: ParseErrorKind::MissingInput,
        line: 1,
        column: 1,
    })?;

    for d in &decls {
        for r in &d.from {
            if r.id != INPUT_ID && !seen.contains_key(&r.id) {
                return Err(ParseError {
                    kind: ParseErrorKind::DanglingReference(r.id.clone()),
                    line: d.line,
                    column: r.column,
                });
            }
        }
    }

    let mut graph = Graph::new(name, shape);
    let mut locations: HashMap<String, (usize, usize)> = HashMap::new();
    locations.insert(INPUT_ID.to_string(), (input_line, 1));
    for d in decls {
        graph
            .add_node(d.id.clone(), d.kind)
            .expect("ids checked unique");
        for r in &d.from {
            graph.add_edge(r.id.clone(), d.id.clone());
        }
        locations.insert(d.id, (d.line, d.column));
    }

    let report = validate(&graph);
    if let Some(v) = report.violations.into_iter().next() {
        let (line, column) = v
            .node
            .as_ref()
            .and_then(|n| locations.get(n).copied())
            .unwrap_or((input_line, 1));
        return Err(ParseError {
            kind: ParseErrorKind::Validation(v),
            line,
            column,
        });
    }
    debug_assert!(is_valid_name(graph.name()));
    Ok(graph)
}

/// Canonical text: header, network and input lines, then one declaration
/// per node in topological order with keys in the order k, s, p, out, bias.
/// LF line endings throughout.
pub fn serialize(net: &Network) -> String {
    let mut out = String::new();
    let img = net.graph().input_shape();
    writeln!(out, "{HEADER}").unwrap();
    writeln!(out, "network \"{}\"", net.name()).unwrap();
    writeln!(out, "input {} {} {}", img.channels, img.height, img.width).unwrap();
    for &i in net.order() {
        let kind = net.kind(i);
        if *kind == NodeKind::Input {
            continue;
        }
        out.push_str(kind.keyword());
        if *kind != NodeKind::Output {
            write!(out, " {}", net.id(i)).unwrap();
        }
        match kind {
            NodeKind::Conv(c) => {
                if c.kernel_h == c.kernel_w {
                    write!(out, " k={}", c.kernel_h).unwrap();
                } else {
                    write!(out, " k={}x{}", c.kernel_h, c.kernel_w).unwrap();
                }
                write!(
                    out,
                    " s={} p={} out={} bias={}",
                    c.stride, c.padding, c.out_channels, c.bias
                )
                .unwrap();
            }
            NodeKind::Fc { out_features, bias } => {
                write!(out, " out={out_features} bias={bias}").unwrap()
            }
            NodeKind::MaxPool(p) | NodeKind::AvgPool(p) => {
                write!(out, " k={} s={} p={}", p.kernel, p.stride, p.padding).unwrap()
            }
            NodeKind::PadShortcut {
                stride,
                out_channels,
            } => write!(out, " s={stride} out={out_channels}").unwrap(),
            _ => {}
        }
        let preds: Vec<&str> = net.preds(i).iter().map(|&p| net.id(p)).collect();
        writeln!(out, " from={}", preds.join(",")).unwrap();
    }
    out
}

impl fmt::Display for Network {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize(self))
    }
}

/// Same name, input shape, node ids and kinds, and per-node ordered
/// predecessor lists. Edge insertion order is otherwise irrelevant.
pub fn isomorphic(a: &Graph, b: &Graph) -> bool {
    a.name() == b.name()
        && a.input_shape() == b.input_shape()
        && a.nodes() == b.nodes()
        && a.edges().len() == b.edges().len()
        && a.nodes()
            .keys()
            .all(|id| a.predecessors(id) == b.predecessors(id))
}
