//! Approximating a flow by a small number of paths.
//!
//! A single-commodity flow of value `F` on a digraph with `|E|` arcs always
//! contains a path whose bottleneck is at least `F/|E|`. Repeatedly taking
//! the widest path and subtracting its bottleneck therefore leaves at most
//! `(1 - 1/|E|)^k ≤ e^{-k/|E|}` of the flow after `k` extractions.

use serde::Serialize;
use thiserror::Error;

use crate::flowsolve::{net_outflow, Commodity, FlowAssignment};
use crate::netgraph::{ArcId, Network, NodeId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DispersionError {
    #[error("path budget must be at least 1")]
    ZeroBudget,
    #[error("widest path bottleneck {bottleneck} below remaining flow {remaining} / {arcs} arcs")]
    WidthBoundViolated {
        bottleneck: f64,
        remaining: f64,
        arcs: usize,
    },
    #[error("commodity {0} decomposed to zero rate")]
    ZeroRate(usize),
}

/// One `s → d` path with a reserved rate in bits/second.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowPath {
    pub nodes: Vec<NodeId>,
    #[serde(skip)]
    pub arcs: Vec<ArcId>,
    pub rate: f64,
}

/// Paths approximating one commodity's flow.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    pub source: NodeId,
    pub sink: NodeId,
    pub paths: Vec<FlowPath>,
    /// Sum of path rates.
    pub achieved: f64,
    /// Value of the flow that was decomposed.
    pub flow_value: f64,
}

impl PathSet {
    /// Per-arc rates of the path set.
    pub fn arc_rates(&self, arc_count: usize) -> Vec<f64> {
        let mut rates = vec![0.0; arc_count];
        for p in &self.paths {
            for a in &p.arcs {
                rates[a.0] += p.rate;
            }
        }
        rates
    }

    /// Multiplies every path rate by `factor`.
    pub fn scaled(&self, factor: f64) -> PathSet {
        PathSet {
            paths: self
                .paths
                .iter()
                .map(|p| FlowPath {
                    rate: p.rate * factor,
                    ..p.clone()
                })
                .collect(),
            achieved: self.achieved * factor,
            flow_value: self.flow_value * factor,
            ..self.clone()
        }
    }

    /// One line per path: node names joined by `->`, then the rate.
    pub fn render(&self, net: &Network) -> String {
        let mut out = String::new();
        for p in &self.paths {
            let names: Vec<&str> = p.nodes.iter().map(|n| net.name(*n)).collect();
            out.push_str(&format!("{} {}\n", names.join("->"), p.rate));
        }
        out
    }
}

/// The `s → d` path maximizing its minimum arc rate.
#[derive(Debug, Clone, PartialEq)]
pub struct WidestPath {
    pub nodes: Vec<NodeId>,
    pub arcs: Vec<ArcId>,
    pub bottleneck: f64,
}

#[derive(Clone)]
struct Label {
    width: f64,
    nodes: Vec<NodeId>,
    arcs: Vec<ArcId>,
}

impl Label {
    /// Wider first, then fewer hops, then lexicographically smaller nodes.
    fn beats(&self, other: &Label) -> bool {
        if self.width != other.width {
            return self.width > other.width;
        }
        if self.nodes.len() != other.nodes.len() {
            return self.nodes.len() < other.nodes.len();
        }
        self.nodes < other.nodes
    }
}

/// Widest path over arcs with rate above `floor`.
fn widest_path_above(
    net: &Network,
    rates: &[f64],
    s: NodeId,
    d: NodeId,
    floor: f64,
) -> Option<WidestPath> {
    let n = net.node_count();
    let mut best: Vec<Option<Label>> = vec![None; n];
    let mut done = vec![false; n];
    best[s.0] = Some(Label {
        width: f64::INFINITY,
        nodes: vec![s],
        arcs: Vec::new(),
    });
    loop {
        let mut pick: Option<usize> = None;
        for v in 0..n {
            if done[v] {
                continue;
            }
            if let Some(l) = &best[v] {
                let better = match pick {
                    None => true,
                    Some(p) => l.beats(best[p].as_ref().unwrap()),
                };
                if better {
                    pick = Some(v);
                }
            }
        }
        let u = pick?;
        done[u] = true;
        if u == d.0 {
            break;
        }
        let base = best[u].clone().unwrap();
        for &a in net.out_arcs(NodeId(u)) {
            let r = rates[a.0];
            if r <= floor {
                continue;
            }
            let to = net.arc(a).to;
            if done[to.0] {
                continue;
            }
            let mut nodes = base.nodes.clone();
            nodes.push(to);
            let mut arcs = base.arcs.clone();
            arcs.push(a);
            let cand = Label {
                width: base.width.min(r),
                nodes,
                arcs,
            };
            if best[to.0].as_ref().is_none_or(|cur| cand.beats(cur)) {
                best[to.0] = Some(cand);
            }
        }
    }
    best[d.0].take().map(|l| WidestPath {
        nodes: l.nodes,
        arcs: l.arcs,
        bottleneck: l.width,
    })
}

/// Max-bottleneck `s → d` path over arcs carrying positive rate. Ties go to
/// fewer hops, then to the lexicographically smaller node sequence.
pub fn widest_path(net: &Network, rates: &[f64], s: NodeId, d: NodeId) -> Option<WidestPath> {
    if s == d {
        return None;
    }
    widest_path_above(net, rates, s, d, 0.0)
}

fn zero_floor(rates: &[f64]) -> f64 {
    let peak = rates.iter().copied().fold(0.0, f64::max);
    (peak * 1e-12).max(1e-12)
}

fn extract(
    net: &Network,
    rates: &[f64],
    s: NodeId,
    d: NodeId,
    budget: usize,
    check_width: bool,
) -> Result<PathSet, DispersionError> {
    let flow_value = net_outflow(net, rates, s);
    let floor = zero_floor(rates);
    let arcs = net.arc_count();
    let mut remaining = rates.to_vec();
    let mut paths = Vec::new();
    while paths.len() < budget {
        let left = net_outflow(net, &remaining, s);
        if left <= flow_value * 1e-9 {
            break;
        }
        let Some(wp) = widest_path_above(net, &remaining, s, d, floor) else {
            break;
        };
        if check_width && wp.bottleneck < left / arcs as f64 - flow_value * 1e-9 {
            return Err(DispersionError::WidthBoundViolated {
                bottleneck: wp.bottleneck,
                remaining: left,
                arcs,
            });
        }
        for a in &wp.arcs {
            let r = &mut remaining[a.0];
            *r -= wp.bottleneck;
            if *r <= floor {
                *r = 0.0;
            }
        }
        paths.push(FlowPath {
            nodes: wp.nodes,
            arcs: wp.arcs,
            rate: wp.bottleneck,
        });
    }
    let achieved = paths.iter().map(|p| p.rate).sum();
    Ok(PathSet {
        source: s,
        sink: d,
        paths,
        achieved,
        flow_value,
    })
}

/// Extracts at most `k` widest paths from a single-commodity flow.
///
/// Each extracted path is checked against the `remaining / |E|` width bound
/// (|E| = arc count of `net`); a violation is reported as an error.
pub fn decompose(
    net: &Network,
    rates: &[f64],
    s: NodeId,
    d: NodeId,
    k: usize,
) -> Result<PathSet, DispersionError> {
    if k == 0 {
        return Err(DispersionError::ZeroBudget);
    }
    extract(net, rates, s, d, k, true)
}

/// Full decomposition into paths, dropping circulations and noise.
pub fn decompose_exact(net: &Network, rates: &[f64], s: NodeId, d: NodeId) -> PathSet {
    extract(net, rates, s, d, usize::MAX, false).expect("no width check")
}

/// Rebuilds `rates` from its path decomposition, removing cycles.
pub fn strip_circulations(net: &Network, rates: &[f64], s: NodeId, d: NodeId) -> Vec<f64> {
    decompose_exact(net, rates, s, d).arc_rates(net.arc_count())
}

/// Guaranteed fraction `1 - e^{-k/|E|}` of the flow kept by `k` paths.
pub fn dispersion_bound(k: usize, arc_count: usize) -> f64 {
    1.0 - (-(k as f64) / arc_count as f64).exp()
}

/// Path budget `⌈α|E|⌉` for a dispersion factor `α`.
pub fn budget_for_alpha(alpha: f64, arc_count: usize) -> usize {
    ((alpha * arc_count as f64).ceil() as usize).max(1)
}

/// A flow assignment whose commodities each use a bounded path set.
#[derive(Debug, Clone)]
pub struct DispersedAssignment {
    pub assignment: FlowAssignment,
    pub path_sets: Vec<PathSet>,
    /// `new duration / original duration`, at least 1.
    pub stretch: f64,
}

/// Replaces each commodity's flow with its `k`-path decomposition and
/// stretches the duration so every demand still completes.
///
/// Path rates are scaled down to `demand / stretched duration`, so per-arc
/// usage never exceeds the original assignment's.
pub fn limit_dispersion(
    net: &Network,
    assignment: &FlowAssignment,
    k: usize,
) -> Result<DispersedAssignment, DispersionError> {
    let mut sets = Vec::with_capacity(assignment.commodities.len());
    let mut stretch: f64 = 1.0;
    for (i, (c, rates)) in assignment
        .commodities
        .iter()
        .zip(&assignment.rates)
        .enumerate()
    {
        let set = decompose(net, rates, c.source, c.sink, k)?;
        if set.achieved <= 0.0 {
            return Err(DispersionError::ZeroRate(i));
        }
        let need = c.demand / assignment.duration;
        stretch = stretch.max(need / set.achieved);
        sets.push(set);
    }
    let duration = assignment.duration * stretch;
    let path_sets: Vec<PathSet> = assignment
        .commodities
        .iter()
        .zip(sets)
        .map(|(c, set)| {
            let target = c.demand / duration;
            let factor = target / set.achieved;
            set.scaled(factor)
        })
        .collect();
    let rates = path_sets
        .iter()
        .map(|p| p.arc_rates(net.arc_count()))
        .collect();
    Ok(DispersedAssignment {
        assignment: FlowAssignment {
            duration,
            commodities: assignment.commodities.clone(),
            rates,
        },
        path_sets,
        stretch,
    })
}

/// Number of paths in an exact decomposition of each commodity.
pub fn path_counts(net: &Network, commodities: &[Commodity], rates: &[Vec<f64>]) -> Vec<usize> {
    commodities
        .iter()
        .zip(rates)
        .map(|(c, r)| decompose_exact(net, r, c.source, c.sink).paths.len())
        .collect()
}
