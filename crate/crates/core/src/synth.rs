//! Synthetic graph generators for property tests, oracles and benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::{ConvSpec, Graph, ImageShape, NodeKind, PoolSpec, INPUT_ID, OUTPUT_ID};

const SIDE: u64 = 8;
const WIDTH: u64 = 4;

fn conv() -> NodeKind {
    NodeKind::Conv(ConvSpec::square(3, 1, 1, WIDTH))
}

fn head(g: &mut Graph, from: &str) {
    g.add("gap", NodeKind::GlobalAvgPool, &[from]).unwrap();
    g.add(
        "fc",
        NodeKind::Fc {
            out_features: 10,
            bias: true,
        },
        &["gap"],
    )
    .unwrap();
    g.add(OUTPUT_ID, NodeKind::Output, &["fc"]).unwrap();
}

/// Merge-free chain of `len` layers, each a conv, a same-size pool, or (at
/// the end) fully connected layers.
pub fn random_chain<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Graph {
    let mut g = Graph::new("chain", ImageShape::new(WIDTH, SIDE, SIDE));
    let mut prev = INPUT_ID.to_string();
    let mut flat = false;
    for i in 0..len {
        let id = format!("n{i:03}");
        let kind = if flat || rng.gen_bool(0.1) {
            flat = true;
            NodeKind::Fc {
                out_features: rng.gen_range(1..=16),
                bias: rng.gen(),
            }
        } else if rng.gen_bool(0.25) {
            NodeKind::MaxPool(PoolSpec::new(3, 1, 1))
        } else {
            let k = [1u64, 3, 5][rng.gen_range(0..3)];
            NodeKind::Conv(ConvSpec::square(k, 1, k / 2, rng.gen_range(1..=8)).with_bias(rng.gen()))
        };
        g.add(id.clone(), kind, &[prev.as_str()]).unwrap();
        prev = id;
    }
    g.add(OUTPUT_ID, NodeKind::Output, &[prev.as_str()])
        .unwrap();
    g
}

/// Stem conv, `blocks` residual blocks each with a `body`-conv body and an
/// identity shortcut, then global pooling and an Fc head.
pub fn residual_chain(blocks: usize, body: usize) -> Graph {
    let mut g = Graph::new("residual", ImageShape::new(3, SIDE, SIDE));
    g.add("stem", conv(), &[INPUT_ID]).unwrap();
    let mut prev = "stem".to_string();
    for b in 0..blocks {
        let mut tail = prev.clone();
        for j in 0..body {
            let id = format!("b{b:02}_c{j}");
            g.add(id.clone(), conv(), &[tail.as_str()]).unwrap();
            tail = id;
        }
        let add = format!("b{b:02}_add");
        g.add(add.clone(), NodeKind::Add, &[tail.as_str(), prev.as_str()])
            .unwrap();
        prev = add;
    }
    head(&mut g, &prev);
    g
}

/// Stem convs, then `modules` fork-branches-concat modules with 2-4
/// branches of 0-3 convs (optionally behind a pool), then a pooled Fc head.
pub fn random_module_chain<R: Rng + ?Sized>(rng: &mut R, modules: usize) -> Graph {
    let mut g = Graph::new("modules", ImageShape::new(3, SIDE, SIDE));
    let mut prev = INPUT_ID.to_string();
    for s in 0..rng.gen_range(1..=3) {
        let id = format!("stem{s}");
        g.add(id.clone(), conv(), &[prev.as_str()]).unwrap();
        prev = id;
    }
    for m in 0..modules {
        let branches = rng.gen_range(2..=4);
        let mut ends = Vec::new();
        let mut used_direct = false;
        for b in 0..branches {
            let mut tail = prev.clone();
            if rng.gen_bool(0.2) {
                let id = format!("m{m:02}_b{b}_pool");
                g.add(
                    id.clone(),
                    NodeKind::MaxPool(PoolSpec::new(3, 1, 1)),
                    &[tail.as_str()],
                )
                .unwrap();
                tail = id;
            }
            let min = if tail == prev && used_direct { 1 } else { 0 };
            for j in 0..rng.gen_range(min..=3) {
                let id = format!("m{m:02}_b{b}_c{j}");
                g.add(id.clone(), conv(), &[tail.as_str()]).unwrap();
                tail = id;
            }
            used_direct |= tail == prev;
            ends.push(tail);
        }
        let cat = format!("m{m:02}_cat");
        let refs: Vec<&str> = ends.iter().map(String::as_str).collect();
        g.add(cat.clone(), NodeKind::Concat, &refs).unwrap();
        prev = cat;
    }
    head(&mut g, &prev);
    g
}

/// Random DAG over same-size feature maps mixing convs, pools, Add and
/// Concat merges. Dangling nodes are concatenated before the head so every
/// node lies on an input-output path.
pub fn random_dag<R: Rng + ?Sized>(rng: &mut R, nodes: usize) -> Graph {
    let mut g = Graph::new("dag", ImageShape::new(WIDTH, SIDE, SIDE));
    // (id, channels)
    let mut pool: Vec<(String, u64)> = vec![(INPUT_ID.to_string(), WIDTH)];
    let pick = |rng: &mut R, pool: &[(String, u64)]| {
        let lo = pool.len().saturating_sub(6);
        rng.gen_range(lo..pool.len())
    };
    for i in 0..nodes {
        let id = format!("v{i:03}");
        let roll = rng.gen_range(0..10);
        let (kind, preds, channels) = if roll < 5 || pool.len() < 2 {
            let p = pick(rng, &pool);
            let out = if rng.gen_bool(0.7) {
                WIDTH
            } else {
                rng.gen_range(1..=8)
            };
            let k = [1u64, 3, 5][rng.gen_range(0..3)];
            let kind = NodeKind::Conv(ConvSpec::square(k, 1, k / 2, out).with_bias(rng.gen()));
            (kind, vec![p], out)
        } else if roll < 6 {
            let p = pick(rng, &pool);
            let kind = if rng.gen() {
                NodeKind::MaxPool(PoolSpec::new(3, 1, 1))
            } else {
                NodeKind::AvgPool(PoolSpec::new(1, 1, 0))
            };
            (kind, vec![p], pool[p].1)
        } else if roll < 8 {
            let candidates: Vec<usize> = (0..pool.len())
                .filter(|&j| pool[j].1 == WIDTH)
                .rev()
                .take(6)
                .collect();
            if candidates.len() < 2 {
                continue;
            }
            let n = rng.gen_range(2..=candidates.len().min(3));
            let preds: Vec<usize> = candidates.choose_multiple(rng, n).copied().collect();
            (NodeKind::Add, preds, WIDTH)
        } else {
            let lo = pool.len().saturating_sub(6);
            let candidates: Vec<usize> = (lo..pool.len()).collect();
            let n = rng.gen_range(2..=candidates.len().min(3));
            let preds: Vec<usize> = candidates.choose_multiple(rng, n).copied().collect();
            let channels = preds.iter().map(|&p| pool[p].1).sum();
            (NodeKind::Concat, preds, channels)
        };
        let refs: Vec<&str> = preds.iter().map(|&p| pool[p].0.as_str()).collect();
        g.add(id.clone(), kind, &refs).unwrap();
        pool.push((id, channels));
    }
    let sinks: Vec<String> = pool
        .iter()
        .map(|(id, _)| id.clone())
        .filter(|id| !g.edges().iter().any(|(f, _)| f == id))
        .collect();
    let last = if sinks.len() == 1 {
        sinks[0].clone()
    } else {
        let refs: Vec<&str> = sinks.iter().map(String::as_str).collect();
        g.add("sink_cat", NodeKind::Concat, &refs).unwrap();
        "sink_cat".to_string()
    };
    if rng.gen() {
        head(&mut g, &last);
    } else {
        g.add(OUTPUT_ID, NodeKind::Output, &[last.as_str()])
            .unwrap();
    }
    g
}
