//! Builders for the reference architectures: VGG-11/16/19, ResNet-18/34/50
//! and GoogLeNet (inference graph, no auxiliary classifiers).

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::graph::{ConvSpec, Graph, ImageShape, NodeKind, PoolSpec, INPUT_ID, OUTPUT_ID};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArchError {
    #[error("unknown {family} variant {variant}")]
    UnknownVariant { family: &'static str, variant: u32 },
    #[error("unknown architecture '{0}'")]
    UnknownArch(String),
    #[error("input spatial dims must be at least 32x32, got {0}")]
    InputTooSmall(ImageShape),
    #[error("class count must be positive")]
    NoClasses,
}

/// Shortcut used where a residual block changes resolution or width.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum ShortcutPolicy {
    /// Strided 1x1 convolution on the skip edge.
    #[default]
    Projection,
    /// Parameter-free subsample plus zero channel padding.
    IdentityPad,
}

impl FromStr for ShortcutPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "projection" => Ok(Self::Projection),
            "identity" => Ok(Self::IdentityPad),
            other => Err(format!("unknown shortcut policy '{other}'")),
        }
    }
}

pub const DEFAULT_INPUT: ImageShape = ImageShape::new(3, 224, 224);
pub const DEFAULT_CLASSES: u64 = 1000;

fn check(input: ImageShape, classes: u64) -> Result<(), ArchError> {
    if input.height < 32 || input.width < 32 || input.channels == 0 {
        return Err(ArchError::InputTooSmall(input));
    }
    if classes == 0 {
        return Err(ArchError::NoClasses);
    }
    Ok(())
}

/// Appends nodes to a chain, remembering the tail.
struct Chain {
    graph: Graph,
    tail: String,
}

impl Chain {
    fn new(name: &str, input: ImageShape) -> Self {
        Self {
            graph: Graph::new(name, input),
            tail: INPUT_ID.to_string(),
        }
    }

    fn node(&mut self, id: String, kind: NodeKind, from: &[&str]) -> String {
        self.graph
            .add(id.clone(), kind, from)
            .expect("builder ids are unique");
        id
    }

    fn push(&mut self, id: impl Into<String>, kind: NodeKind) {
        let tail = std::mem::take(&mut self.tail);
        self.tail = self.node(id.into(), kind, &[tail.as_str()]);
    }

    fn finish(mut self) -> Graph {
        self.push(OUTPUT_ID, NodeKind::Output);
        self.graph
    }
}

fn conv(k: u64, s: u64, p: u64, out: u64) -> NodeKind {
    NodeKind::Conv(ConvSpec::square(k, s, p, out))
}

fn fc(out: u64) -> NodeKind {
    NodeKind::Fc {
        out_features: out,
        bias: true,
    }
}

/// Standard VGG: 3x3 convolutions in five stages separated by 2x2 max
/// pools, then Fc 4096-4096-classes on the flattened feature map.
pub fn build_vgg(variant: u32, input: ImageShape, classes: u64) -> Result<Graph, ArchError> {
    let per_stage: [usize; 5] = match variant {
        11 => [1, 1, 2, 2, 2],
        16 => [2, 2, 3, 3, 3],
        19 => [2, 2, 4, 4, 4],
        _ => {
            return Err(ArchError::UnknownVariant {
                family: "vgg",
                variant,
            })
        }
    };
    check(input, classes)?;
    let mut chain = Chain::new(&format!("vgg{variant}"), input);
    for (stage, (&n, width)) in per_stage.iter().zip([64, 128, 256, 512, 512]).enumerate() {
        for i in 0..n {
            chain.push(format!("conv{}_{}", stage + 1, i + 1), conv(3, 1, 1, width));
        }
        chain.push(
            format!("pool{}", stage + 1),
            NodeKind::MaxPool(PoolSpec::new(2, 2, 0)),
        );
    }
    chain.push("fc6", fc(4096));
    chain.push("fc7", fc(4096));
    chain.push("fc8", fc(classes));
    Ok(chain.finish())
}

/// Standard ResNet with a 7x7/2 stem and 3x3/2 max pool, four stages, global
/// average pooling and one Fc layer. Convolutions carry no bias. Identity
/// shortcuts everywhere except where a block changes shape, which follows
/// `policy`.
pub fn build_resnet(
    variant: u32,
    input: ImageShape,
    classes: u64,
    policy: ShortcutPolicy,
) -> Result<Graph, ArchError> {
    let (blocks, bottleneck): ([usize; 4], bool) = match variant {
        18 => ([2, 2, 2, 2], false),
        34 => ([3, 4, 6, 3], false),
        50 => ([3, 4, 6, 3], true),
        _ => {
            return Err(ArchError::UnknownVariant {
                family: "resnet",
                variant,
            })
        }
    };
    check(input, classes)?;
    let nobias = |k, s, p, out| NodeKind::Conv(ConvSpec::square(k, s, p, out).with_bias(false));
    let expansion = if bottleneck { 4 } else { 1 };

    let mut chain = Chain::new(&format!("resnet{variant}"), input);
    chain.push("conv1", nobias(7, 2, 3, 64));
    chain.push("pool1", NodeKind::MaxPool(PoolSpec::new(3, 2, 1)));
    let mut channels = 64;
    for (stage, (&n, width)) in blocks.iter().zip([64u64, 128, 256, 512]).enumerate() {
        for b in 0..n {
            let stride = if stage > 0 && b == 0 { 2 } else { 1 };
            let out = width * expansion;
            let prefix = format!("s{}b{}", stage + 1, b);
            let entry = chain.tail.clone();
            let mut body = entry.clone();
            let layers: Vec<(u64, u64, u64, u64)> = if bottleneck {
                vec![(1, 1, 0, width), (3, stride, 1, width), (1, 1, 0, out)]
            } else {
                vec![(3, stride, 1, width), (3, 1, 1, width)]
            };
            for (j, (k, s, p, w)) in layers.into_iter().enumerate() {
                body = chain.node(
                    format!("{prefix}_conv{}", j + 1),
                    nobias(k, s, p, w),
                    &[body.as_str()],
                );
            }
            let skip = if stride != 1 || channels != out {
                let kind = match policy {
                    ShortcutPolicy::Projection => nobias(1, stride, 0, out),
                    ShortcutPolicy::IdentityPad => NodeKind::PadShortcut {
                        stride,
                        out_channels: out,
                    },
                };
                chain.node(format!("{prefix}_short"), kind, &[entry.as_str()])
            } else {
                entry
            };
            chain.tail = chain.node(
                format!("{prefix}_add"),
                NodeKind::Add,
                &[body.as_str(), skip.as_str()],
            );
            channels = out;
        }
    }
    chain.push("gap", NodeKind::GlobalAvgPool);
    chain.push("fc", fc(classes));
    Ok(chain.finish())
}

/// Channel allocation of one Inception module: 1x1, 3x3 reduce, 3x3,
/// 5x5 reduce, 5x5, pool projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InceptionConfig {
    pub name: &'static str,
    pub c1: u64,
    pub c3_reduce: u64,
    pub c3: u64,
    pub c5_reduce: u64,
    pub c5: u64,
    pub pool_proj: u64,
}

impl InceptionConfig {
    pub fn out_channels(&self) -> u64 {
        self.c1 + self.c3 + self.c5 + self.pool_proj
    }
}

const fn inc(name: &'static str, c: [u64; 6]) -> InceptionConfig {
    InceptionConfig {
        name,
        c1: c[0],
        c3_reduce: c[1],
        c3: c[2],
        c5_reduce: c[3],
        c5: c[4],
        pool_proj: c[5],
    }
}

/// The nine modules of the original GoogLeNet, in order.
pub const GOOGLENET_MODULES: [InceptionConfig; 9] = [
    inc("3a", [64, 96, 128, 16, 32, 32]),
    inc("3b", [128, 128, 192, 32, 96, 64]),
    inc("4a", [192, 96, 208, 16, 48, 64]),
    inc("4b", [160, 112, 224, 24, 64, 64]),
    inc("4c", [128, 128, 256, 24, 64, 64]),
    inc("4d", [112, 144, 288, 32, 64, 64]),
    inc("4e", [256, 160, 320, 32, 128, 128]),
    inc("5a", [256, 160, 320, 32, 128, 128]),
    inc("5b", [384, 192, 384, 48, 128, 128]),
];

/// GoogLeNet inference graph: 7x7/2 conv, pool, 1x1 and 3x3 convs, pool,
/// nine Inception modules with pools after 3b and 4e, global average
/// pooling and one Fc layer.
pub fn build_googlenet(input: ImageShape, classes: u64) -> Result<Graph, ArchError> {
    check(input, classes)?;
    let pool = |id: &str| (id.to_string(), NodeKind::MaxPool(PoolSpec::new(3, 2, 1)));
    let mut chain = Chain::new("googlenet", input);
    chain.push("conv1", conv(7, 2, 3, 64));
    let (id, k) = pool("pool1");
    chain.push(id, k);
    chain.push("conv2_reduce", conv(1, 1, 0, 64));
    chain.push("conv2", conv(3, 1, 1, 192));
    let (id, k) = pool("pool2");
    chain.push(id, k);
    for m in &GOOGLENET_MODULES {
        let fork = chain.tail.clone();
        let f = fork.as_str();
        let p = format!("inc{}", m.name);
        let b1 = chain.node(format!("{p}_1x1"), conv(1, 1, 0, m.c1), &[f]);
        let r3 = chain.node(format!("{p}_3x3_reduce"), conv(1, 1, 0, m.c3_reduce), &[f]);
        let b3 = chain.node(format!("{p}_3x3"), conv(3, 1, 1, m.c3), &[r3.as_str()]);
        let r5 = chain.node(format!("{p}_5x5_reduce"), conv(1, 1, 0, m.c5_reduce), &[f]);
        let b5 = chain.node(format!("{p}_5x5"), conv(5, 1, 2, m.c5), &[r5.as_str()]);
        let mp = chain.node(
            format!("{p}_pool"),
            NodeKind::MaxPool(PoolSpec::new(3, 1, 1)),
            &[f],
        );
        let bp = chain.node(
            format!("{p}_pool_proj"),
            conv(1, 1, 0, m.pool_proj),
            &[mp.as_str()],
        );
        chain.tail = chain.node(
            format!("{p}_concat"),
            NodeKind::Concat,
            &[b1.as_str(), b3.as_str(), b5.as_str(), bp.as_str()],
        );
        if m.name == "3b" || m.name == "4e" {
            let (id, k) = pool(if m.name == "3b" { "pool3" } else { "pool4" });
            chain.push(id, k);
        }
    }
    chain.push("gap", NodeKind::GlobalAvgPool);
    chain.push("fc", fc(classes));
    Ok(chain.finish())
}

/// The seven built-in architectures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Arch {
    Vgg11,
    Vgg16,
    Vgg19,
    ResNet18,
    ResNet34,
    ResNet50,
    GoogLeNet,
}

impl Arch {
    pub const ALL: [Arch; 7] = [
        Arch::Vgg11,
        Arch::Vgg16,
        Arch::Vgg19,
        Arch::ResNet18,
        Arch::ResNet34,
        Arch::ResNet50,
        Arch::GoogLeNet,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Arch::Vgg11 => "vgg11",
            Arch::Vgg16 => "vgg16",
            Arch::Vgg19 => "vgg19",
            Arch::ResNet18 => "resnet18",
            Arch::ResNet34 => "resnet34",
            Arch::ResNet50 => "resnet50",
            Arch::GoogLeNet => "googlenet",
        }
    }

    pub fn build(
        &self,
        input: ImageShape,
        classes: u64,
        policy: ShortcutPolicy,
    ) -> Result<Graph, ArchError> {
        match self {
            Arch::Vgg11 => build_vgg(11, input, classes),
            Arch::Vgg16 => build_vgg(16, input, classes),
            Arch::Vgg19 => build_vgg(19, input, classes),
            Arch::ResNet18 => build_resnet(18, input, classes, policy),
            Arch::ResNet34 => build_resnet(34, input, classes, policy),
            Arch::ResNet50 => build_resnet(50, input, classes, policy),
            Arch::GoogLeNet => build_googlenet(input, classes),
        }
    }

    /// Built with the default 3x224x224 input, 1000 classes and projection
    /// shortcuts.
    pub fn build_default(&self) -> Graph {
        self.build(DEFAULT_INPUT, DEFAULT_CLASSES, ShortcutPolicy::Projection)
            .expect("default configuration is valid")
    }
}

impl fmt::Display for Arch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Arch {
    type Err = ArchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Arch::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| ArchError::UnknownArch(s.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::depth::{find_modules, DepthOptions};
    use crate::graph::{validate, Network};

    #[test]
    fn all_builtins_validate() {
        for arch in Arch::ALL {
            for policy in [ShortcutPolicy::Projection, ShortcutPolicy::IdentityPad] {
                for input in [DEFAULT_INPUT, ImageShape::new(3, 32, 32)] {
                    let g = arch.build(input, 10, policy).unwrap();
                    assert!(validate(&g).is_ok(), "{arch} {input}: {}", validate(&g));
                }
            }
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert_eq!(
            build_vgg(13, DEFAULT_INPUT, 1000),
            Err(ArchError::UnknownVariant {
                family: "vgg",
                variant: 13
            })
        );
        assert!(build_resnet(101, DEFAULT_INPUT, 1000, ShortcutPolicy::Projection).is_err());
        assert!(build_googlenet(ImageShape::new(3, 16, 16), 1000).is_err());
        assert!("vgg13".parse::<Arch>().is_err());
        assert_eq!("resnet50".parse::<Arch>(), Ok(Arch::ResNet50));
    }

    #[test]
    fn layer_depths_match_variant() {
        let expected = [11, 16, 19, 18, 34, 50, 22];
        for (arch, want) in Arch::ALL.into_iter().zip(expected) {
            let net = Network::new(arch.build_default()).unwrap();
            let opts = DepthOptions::default();
            assert_eq!(
                net.longest_weighted_path(|k| opts.layer_weight(k)),
                want,
                "{arch}"
            );
        }
    }

    #[test]
    fn googlenet_modules() {
        let net = Network::new(Arch::GoogLeNet.build_default()).unwrap();
        let modules = find_modules(&net).unwrap();
        assert_eq!(modules.len(), 9);
        for m in &modules {
            assert_eq!(m.branch_depths(&net, DepthOptions::default()), [1, 2, 2, 1]);
        }
        let out = net.shape(net.index_of("inc5b_concat").unwrap());
        assert_eq!(out.flat_features(), 1024 * 7 * 7);
    }

    #[test]
    fn resnet_shortcuts_follow_policy() {
        let g = build_resnet(18, DEFAULT_INPUT, 1000, ShortcutPolicy::Projection).unwrap();
        let shorts: Vec<_> = g
            .nodes()
            .keys()
            .filter(|k| k.ends_with("_short"))
            .cloned()
            .collect();
        assert_eq!(shorts, ["s2b0_short", "s3b0_short", "s4b0_short"]);
        let g = build_resnet(50, DEFAULT_INPUT, 1000, ShortcutPolicy::IdentityPad).unwrap();
        let pads = g
            .nodes()
            .values()
            .filter(|k| matches!(k, NodeKind::PadShortcut { .. }))
            .count();
        assert_eq!(pads, 4);
    }
}
