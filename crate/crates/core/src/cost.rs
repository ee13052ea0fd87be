//! Parameter, MAC and FLOP accounting.
//!
//! A MAC is one multiplication (bias additions are free), one MAC is two
//! FLOPs, and only Conv and Fc layers are costed. Pooling, merges and the
//! parameter-free shortcut contribute nothing.

use std::collections::BTreeMap;

use crate::graph::{Network, NodeKind, Shape};
use crate::scalar::{format_half_even, scaled_ratio};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NodeCost {
    pub params: u128,
    pub macs: u128,
}

impl NodeCost {
    pub fn flops(&self) -> u128 {
        2 * self.macs
    }
}

/// Cost of one node given its input and output shapes.
pub fn node_cost(kind: &NodeKind, input: Shape, output: Shape) -> NodeCost {
    match kind {
        NodeKind::Conv(c) => {
            let c_in = match input {
                Shape::Spatial(s) => u128::from(s.channels),
                Shape::Flat(_) => unreachable!("validated conv has spatial input"),
            };
            let Shape::Spatial(out) = output else {
                unreachable!("conv output is spatial")
            };
            let c_out = u128::from(c.out_channels);
            let weights = u128::from(c.kernel_h) * u128::from(c.kernel_w) * c_in * c_out;
            NodeCost {
                params: weights + if c.bias { c_out } else { 0 },
                macs: weights * u128::from(out.height) * u128::from(out.width),
            }
        }
        NodeKind::Fc { out_features, bias } => {
            let f_in = u128::from(input.flat_features());
            let f_out = u128::from(*out_features);
            NodeCost {
                params: f_in * f_out + if *bias { f_out } else { 0 },
                macs: f_in * f_out,
            }
        }
        _ => NodeCost::default(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostReport {
    pub per_node: BTreeMap<String, NodeCost>,
    pub params: u128,
    pub macs: u128,
    pub flops: u128,
}

impl CostReport {
    pub fn of(net: &Network) -> Self {
        let mut per_node = BTreeMap::new();
        let (mut params, mut macs) = (0u128, 0u128);
        for &i in net.order() {
            let input = net.preds(i).first().map_or(net.shape(i), |&p| net.shape(p));
            let cost = node_cost(net.kind(i), input, net.shape(i));
            params += cost.params;
            macs += cost.macs;
            per_node.insert(net.id(i).to_string(), cost);
        }
        Self {
            per_node,
            params,
            macs,
            flops: 2 * macs,
        }
    }

    /// Millions of parameters, one decimal, ties to even.
    pub fn params_m(&self) -> String {
        format_half_even(&scaled_ratio(self.params, 6), 1)
    }

    /// Billions of MACs, one decimal, ties to even.
    pub fn macs_g(&self) -> String {
        format_half_even(&scaled_ratio(self.macs, 9), 1)
    }

    pub fn flops_g(&self) -> String {
        format_half_even(&scaled_ratio(self.flops, 9), 1)
    }
}

pub fn count_params(net: &Network) -> u128 {
    CostReport::of(net).params
}

pub fn count_macs(net: &Network) -> u128 {
    CostReport::of(net).macs
}
