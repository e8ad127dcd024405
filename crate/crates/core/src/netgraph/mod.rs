//! Capacitated network topologies.
//!
//! A [`Network`] is built from declared links ([`Edge`]). Each link expands
//! to one or two directed [`Arc`]s, and each arc draws from a capacity
//! *channel*. The edge mode decides how arcs map to channels:
//!
//! * `directed`: one arc, one channel per link.
//! * `full-duplex`: two arcs, each with its own channel of the link capacity.
//! * `undirected-shared`: two arcs drawing from a single shared channel, so
//!   `flow(u→v) + flow(v→u) ≤ C`.

mod generators;
mod parse;
mod paths;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use generators::{clique, from_generator, lambda_rail, ring, star_construction};
pub use parse::parse_topology;
pub use paths::{
    count_simple_paths, hop_distances_from, hop_distances_to, is_reachable, shortest_path_arcs,
    shortest_path_subgraph, PathCount,
};

/// Relative tolerance for capacity comparisons on a network.
pub const CAPACITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ArcId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl ArcId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeMode {
    Directed,
    UndirectedShared,
    FullDuplex,
}

impl EdgeMode {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeMode::Directed => "directed",
            EdgeMode::UndirectedShared => "undirected-shared",
            EdgeMode::FullDuplex => "full-duplex",
        }
    }
}

impl fmt::Display for EdgeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EdgeMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "directed" => Ok(EdgeMode::Directed),
            "undirected-shared" => Ok(EdgeMode::UndirectedShared),
            "full-duplex" => Ok(EdgeMode::FullDuplex),
            other => Err(format!("unknown edge mode `{other}`")),
        }
    }
}

/// A declared link. Capacity is in bits/second.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub from: NodeId,
    pub to: NodeId,
    pub capacity: f64,
}

/// A directed arc derived from an [`Edge`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub from: NodeId,
    pub to: NodeId,
    pub edge: usize,
    pub channel: usize,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TopologyError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: unknown node `{name}`")]
    UnknownNode { line: usize, name: String },
    #[error("line {line}: node `{name}` declared twice")]
    DuplicateNode { line: usize, name: String },
    #[error("line {line}: capacity must be positive and finite")]
    BadCapacity { line: usize },
    #[error("line {line}: duplicate edge {from} -> {to}")]
    DuplicateEdge {
        line: usize,
        from: String,
        to: String,
    },
    #[error("line {line}: self-loop on `{node}`")]
    SelfLoop { line: usize, node: String },
    #[error("missing `mode` header")]
    MissingMode,
    #[error("graph with no edges")]
    NoEdges,
    #[error("unknown topology generator `{0}`")]
    UnknownGenerator(String),
    #[error("disconnected pair {from} -> {to}")]
    Disconnected { from: String, to: String },
    #[error("invalid node pair: {0}")]
    BadPair(String),
}

/// Incremental [`Network`] construction with the same validation the parser
/// applies. `line` numbers in errors are whatever the caller passed in.
#[derive(Debug)]
pub struct NetworkBuilder {
    mode: EdgeMode,
    nodes: Vec<String>,
    index: BTreeMap<String, NodeId>,
    edges: Vec<Edge>,
}

impl NetworkBuilder {
    pub fn new(mode: EdgeMode) -> Self {
        NetworkBuilder {
            mode,
            nodes: Vec::new(),
            index: BTreeMap::new(),
            edges: Vec::new(),
        }
    }

    pub fn add_node(&mut self, name: &str, line: usize) -> Result<NodeId, TopologyError> {
        if self.index.contains_key(name) {
            return Err(TopologyError::DuplicateNode {
                line,
                name: name.to_string(),
            });
        }
        let id = NodeId(self.nodes.len());
        self.nodes.push(name.to_string());
        self.index.insert(name.to_string(), id);
        Ok(id)
    }

    /// Declares nodes `0..n` named by their decimal index.
    pub fn with_numbered_nodes(mut self, n: usize) -> Self {
        for i in 0..n {
            self.add_node(&i.to_string(), 0).expect("fresh names");
        }
        self
    }

    pub fn add_edge(
        &mut self,
        from: &str,
        to: &str,
        capacity: f64,
        line: usize,
    ) -> Result<(), TopologyError> {
        let lookup = |name: &str| {
            self.index
                .get(name)
                .copied()
                .ok_or_else(|| TopologyError::UnknownNode {
                    line,
                    name: name.to_string(),
                })
        };
        let u = lookup(from)?;
        let v = lookup(to)?;
        if u == v {
            return Err(TopologyError::SelfLoop {
                line,
                node: from.to_string(),
            });
        }
        if !(capacity.is_finite() && capacity > 0.0) {
            return Err(TopologyError::BadCapacity { line });
        }
        let duplicate = self.edges.iter().any(|e| {
            (e.from == u && e.to == v)
                || (self.mode != EdgeMode::Directed && e.from == v && e.to == u)
        });
        if duplicate {
            return Err(TopologyError::DuplicateEdge {
                line,
                from: from.to_string(),
                to: to.to_string(),
            });
        }
        self.edges.push(Edge {
            from: u,
            to: v,
            capacity,
        });
        Ok(())
    }

    pub fn build(self) -> Result<Network, TopologyError> {
        if self.edges.is_empty() {
            return Err(TopologyError::NoEdges);
        }
        Ok(Network::assemble(
            self.mode, self.nodes, self.index, self.edges,
        ))
    }
}

/// Immutable capacitated topology.
#[derive(Debug, Clone)]
pub struct Network {
    mode: EdgeMode,
    nodes: Vec<String>,
    index: BTreeMap<String, NodeId>,
    edges: Vec<Edge>,
    arcs: Vec<Arc>,
    channels: Vec<f64>,
    out_arcs: Vec<Vec<ArcId>>,
    in_arcs: Vec<Vec<ArcId>>,
    reverse: Vec<Option<ArcId>>,
}

impl Network {
    fn assemble(
        mode: EdgeMode,
        nodes: Vec<String>,
        index: BTreeMap<String, NodeId>,
        edges: Vec<Edge>,
    ) -> Network {
        let mut arcs = Vec::new();
        let mut channels = Vec::new();
        for (i, e) in edges.iter().enumerate() {
            match mode {
                EdgeMode::Directed => {
                    arcs.push(Arc {
                        from: e.from,
                        to: e.to,
                        edge: i,
                        channel: channels.len(),
                    });
                    channels.push(e.capacity);
                }
                EdgeMode::FullDuplex => {
                    for (a, b) in [(e.from, e.to), (e.to, e.from)] {
                        arcs.push(Arc {
                            from: a,
                            to: b,
                            edge: i,
                            channel: channels.len(),
                        });
                        channels.push(e.capacity);
                    }
                }
                EdgeMode::UndirectedShared => {
                    let ch = channels.len();
                    channels.push(e.capacity);
                    for (a, b) in [(e.from, e.to), (e.to, e.from)] {
                        arcs.push(Arc {
                            from: a,
                            to: b,
                            edge: i,
                            channel: ch,
                        });
                    }
                }
            }
        }
        let n = nodes.len();
        let mut out_arcs = vec![Vec::new(); n];
        let mut in_arcs = vec![Vec::new(); n];
        let mut by_pair = BTreeMap::new();
        for (i, a) in arcs.iter().enumerate() {
            out_arcs[a.from.0].push(ArcId(i));
            in_arcs[a.to.0].push(ArcId(i));
            by_pair.insert((a.from, a.to), ArcId(i));
        }
        let reverse = arcs
            .iter()
            .map(|a| by_pair.get(&(a.to, a.from)).copied())
            .collect();
        Network {
            mode,
            nodes,
            index,
            edges,
            arcs,
            channels,
            out_arcs,
            in_arcs,
            reverse,
        }
    }

    pub fn mode(&self) -> EdgeMode {
        self.mode
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).map(NodeId)
    }

    pub fn node(&self, name: &str) -> Option<NodeId> {
        self.index.get(name).copied()
    }

    /// Looks up a node, mapping absence to a [`TopologyError::BadPair`].
    pub fn require_node(&self, name: &str) -> Result<NodeId, TopologyError> {
        self.node(name)
            .ok_or_else(|| TopologyError::BadPair(format!("unknown node `{name}`")))
    }

    pub fn name(&self, node: NodeId) -> &str {
        &self.nodes[node.0]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc(&self, id: ArcId) -> &Arc {
        &self.arcs[id.0]
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn out_arcs(&self, node: NodeId) -> &[ArcId] {
        &self.out_arcs[node.0]
    }

    pub fn in_arcs(&self, node: NodeId) -> &[ArcId] {
        &self.in_arcs[node.0]
    }

    /// The arc running the opposite way between the same endpoints, if any.
    pub fn reverse_arc(&self, id: ArcId) -> Option<ArcId> {
        self.reverse[id.0]
    }

    /// Capacity pools, in bits/second. Indexed by [`Arc::channel`].
    pub fn channels(&self) -> &[f64] {
        &self.channels
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    pub fn arc_capacity(&self, id: ArcId) -> f64 {
        self.channels[self.arcs[id.0].channel]
    }

    pub fn max_capacity(&self) -> f64 {
        self.channels.iter().copied().fold(0.0, f64::max)
    }

    /// Sums per-arc rates into per-channel usage.
    pub fn channel_usage(&self, arc_rates: &[f64]) -> Vec<f64> {
        let mut usage = vec![0.0; self.channels.len()];
        for (a, r) in self.arcs.iter().zip(arc_rates) {
            usage[a.channel] += r;
        }
        usage
    }

    /// Same topology with every capacity multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Network {
        assert!(factor.is_finite() && factor > 0.0);
        let edges = self
            .edges
            .iter()
            .map(|e| Edge {
                capacity: e.capacity * factor,
                ..e.clone()
            })
            .collect();
        Network::assemble(self.mode, self.nodes.clone(), self.index.clone(), edges)
    }

    /// Network restricted to the links of `arcs`. Node set is unchanged.
    pub fn restricted_to(&self, arcs: &[ArcId]) -> Result<Network, TopologyError> {
        let mut keep = vec![false; self.edges.len()];
        for a in arcs {
            keep[self.arcs[a.0].edge] = true;
        }
        let edges: Vec<Edge> = self
            .edges
            .iter()
            .zip(&keep)
            .filter(|(_, k)| **k)
            .map(|(e, _)| e.clone())
            .collect();
        if edges.is_empty() {
            return Err(TopologyError::NoEdges);
        }
        Ok(Network::assemble(
            self.mode,
            self.nodes.clone(),
            self.index.clone(),
            edges,
        ))
    }

    /// Canonical topology document: `mode`, one `node` line per node, then
    /// one `edge` line per link with capacity in bits/second.
    pub fn to_topology_string(&self) -> String {
        let mut out = format!("mode {}\n", self.mode);
        for name in &self.nodes {
            out.push_str(&format!("node {name}\n"));
        }
        for e in &self.edges {
            out.push_str(&format!(
                "edge {} {} {} bps\n",
                self.name(e.from),
                self.name(e.to),
                e.capacity
            ));
        }
        out
    }
}

/// Per-channel available bandwidth on top of a base network.
#[derive(Debug, Clone)]
pub struct ResidualNetwork<'a> {
    base: &'a Network,
    available: Vec<f64>,
}

impl<'a> ResidualNetwork<'a> {
    pub fn full(base: &'a Network) -> Self {
        ResidualNetwork {
            base,
            available: base.channels.clone(),
        }
    }

    /// `C(e) - b(e)` per channel, clamped at zero.
    pub fn from_reserved(base: &'a Network, reserved: &[f64]) -> Self {
        let available = base
            .channels
            .iter()
            .zip(reserved)
            .map(|(c, b)| (c - b).max(0.0))
            .collect();
        ResidualNetwork { base, available }
    }

    pub fn base(&self) -> &'a Network {
        self.base
    }

    pub fn available(&self) -> &[f64] {
        &self.available
    }

    /// Removes `arc_rates` from the available bandwidth.
    pub fn consume(&mut self, arc_rates: &[f64]) {
        for (a, r) in self.base.arcs.iter().zip(arc_rates) {
            let slot = &mut self.available[a.channel];
            *slot = (*slot - r).max(0.0);
        }
    }
}
