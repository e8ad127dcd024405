//! Flow primitives: single-pair max flow, multicommodity feasibility and
//! maximum concurrent flow.

mod concurrent;
mod maxflow;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netgraph::{Network, NodeId};

pub use concurrent::{max_concurrent_time, multicomm, ConcurrentFlow};
pub use maxflow::{max_flow, max_flow_residual, max_flow_value, max_flow_with, MaxFlow};

/// Relative tolerance for flow-assignment invariants.
pub const FLOW_TOLERANCE: f64 = 1e-6;

/// Rates below this many bits/second are reported as zero.
pub const RATE_FLOOR: f64 = 1e-12;

/// A transfer demand between two nodes. `demand` is in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Commodity {
    pub source: NodeId,
    pub sink: NodeId,
    pub demand: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("commodity {index}: {reason}")]
    InvalidCommodity { index: usize, reason: String },
    #[error("duration must be positive and finite, got {0}")]
    InvalidDuration(f64),
    #[error("no commodities given")]
    NoCommodities,
    #[error("commodity {index} has no path from {from} to {to}")]
    Disconnected {
        index: usize,
        from: String,
        to: String,
    },
    #[error("LP solver failed: {0}")]
    Solver(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowViolation {
    #[error("channel {channel} carries {used} > capacity {capacity}")]
    Capacity {
        channel: usize,
        used: f64,
        capacity: f64,
    },
    #[error("commodity {commodity} violates conservation at node {node} by {imbalance}")]
    Conservation {
        commodity: usize,
        node: usize,
        imbalance: f64,
    },
    #[error("commodity {commodity} delivers {delivered} of {demand} bits")]
    Demand {
        commodity: usize,
        delivered: f64,
        demand: f64,
    },
    #[error("negative rate on arc {arc}")]
    NegativeRate { arc: usize },
}

/// Net rate leaving `node` under per-arc `rates`.
pub fn net_outflow(net: &Network, rates: &[f64], node: NodeId) -> f64 {
    let out: f64 = net.out_arcs(node).iter().map(|a| rates[a.0]).sum();
    let inn: f64 = net.in_arcs(node).iter().map(|a| rates[a.0]).sum();
    out - inn
}

/// Per-commodity, per-arc rates held for `duration` seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowAssignment {
    pub duration: f64,
    pub commodities: Vec<Commodity>,
    /// `rates[commodity][arc]` in bits/second.
    pub rates: Vec<Vec<f64>>,
}

impl FlowAssignment {
    pub fn empty() -> Self {
        FlowAssignment {
            duration: 0.0,
            commodities: Vec::new(),
            rates: Vec::new(),
        }
    }

    /// Sum of all commodities' rates per arc.
    pub fn total_arc_rates(&self, arc_count: usize) -> Vec<f64> {
        let mut total = vec![0.0; arc_count];
        for r in &self.rates {
            for (t, x) in total.iter_mut().zip(r) {
                *t += x;
            }
        }
        total
    }

    pub fn net_rate(&self, net: &Network, commodity: usize) -> f64 {
        net_outflow(
            net,
            &self.rates[commodity],
            self.commodities[commodity].source,
        )
    }

    /// Checks capacity, conservation and demand satisfaction, each at
    /// relative tolerance [`FLOW_TOLERANCE`].
    pub fn validate(&self, net: &Network) -> Result<(), FlowViolation> {
        for r in &self.rates {
            if let Some(arc) = r.iter().position(|x| *x < 0.0) {
                return Err(FlowViolation::NegativeRate { arc });
            }
        }
        let usage = net.channel_usage(&self.total_arc_rates(net.arc_count()));
        for (channel, (used, cap)) in usage.iter().zip(net.channels()).enumerate() {
            if *used > cap * (1.0 + FLOW_TOLERANCE) {
                return Err(FlowViolation::Capacity {
                    channel,
                    used: *used,
                    capacity: *cap,
                });
            }
        }
        for (k, c) in self.commodities.iter().enumerate() {
            let target = c.demand / self.duration;
            for node in net.nodes() {
                if node == c.source || node == c.sink {
                    continue;
                }
                let imbalance = net_outflow(net, &self.rates[k], node);
                if imbalance.abs() > target * FLOW_TOLERANCE {
                    return Err(FlowViolation::Conservation {
                        commodity: k,
                        node: node.0,
                        imbalance,
                    });
                }
            }
            let delivered = self.net_rate(net, k) * self.duration;
            if delivered < c.demand * (1.0 - FLOW_TOLERANCE) {
                return Err(FlowViolation::Demand {
                    commodity: k,
                    delivered,
                    demand: c.demand,
                });
            }
        }
        Ok(())
    }
}

pub(crate) fn check_commodities(net: &Network, commodities: &[Commodity]) -> Result<(), FlowError> {
    let n = net.node_count();
    for (index, c) in commodities.iter().enumerate() {
        let bad = |reason: &str| FlowError::InvalidCommodity {
            index,
            reason: reason.to_string(),
        };
        if c.source.0 >= n || c.sink.0 >= n {
            return Err(bad("unknown node"));
        }
        if c.source == c.sink {
            return Err(bad("source equals sink"));
        }
        if !(c.demand.is_finite() && c.demand > 0.0) {
            return Err(bad("demand must be positive and finite"));
        }
    }
    Ok(())
}
