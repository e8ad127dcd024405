use std::collections::VecDeque;

use super::{ArcId, Network, NodeId, TopologyError};

fn bfs(net: &Network, start: NodeId, mask: Option<&[bool]>, forward: bool) -> Vec<Option<usize>> {
    let mut dist = vec![None; net.node_count()];
    dist[start.0] = Some(0);
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u.0].unwrap();
        let arcs = if forward {
            net.out_arcs(u)
        } else {
            net.in_arcs(u)
        };
        for &a in arcs {
            if mask.is_some_and(|m| !m[a.0]) {
                continue;
            }
            let arc = net.arc(a);
            let w = if forward { arc.to } else { arc.from };
            if dist[w.0].is_none() {
                dist[w.0] = Some(du + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Hop counts from `s` to every node, `None` when unreachable.
pub fn hop_distances_from(net: &Network, s: NodeId, mask: Option<&[bool]>) -> Vec<Option<usize>> {
    bfs(net, s, mask, true)
}

/// Hop counts from every node to `d`.
pub fn hop_distances_to(net: &Network, d: NodeId, mask: Option<&[bool]>) -> Vec<Option<usize>> {
    bfs(net, d, mask, false)
}

pub fn is_reachable(net: &Network, s: NodeId, d: NodeId, mask: Option<&[bool]>) -> bool {
    hop_distances_from(net, s, mask)[d.0].is_some()
}

fn disconnected(net: &Network, s: NodeId, d: NodeId) -> TopologyError {
    TopologyError::Disconnected {
        from: net.name(s).to_string(),
        to: net.name(d).to_string(),
    }
}

/// Arcs lying on at least one hop-shortest `s → d` path: exactly those
/// `(u, v)` with `dist(s, u) + 1 + dist(v, d) = dist(s, d)`.
pub fn shortest_path_arcs(
    net: &Network,
    s: NodeId,
    d: NodeId,
) -> Result<Vec<ArcId>, TopologyError> {
    if s == d {
        return Err(TopologyError::BadPair("source equals destination".into()));
    }
    let from_s = hop_distances_from(net, s, None);
    let to_d = hop_distances_to(net, d, None);
    let total = from_s[d.0].ok_or_else(|| disconnected(net, s, d))?;
    Ok(net
        .arcs()
        .iter()
        .enumerate()
        .filter(|(_, a)| match (from_s[a.from.0], to_d[a.to.0]) {
            (Some(x), Some(y)) => x + 1 + y == total,
            _ => false,
        })
        .map(|(i, _)| ArcId(i))
        .collect())
}

/// Subgraph formed by the union of all hop-shortest `s → d` paths.
pub fn shortest_path_subgraph(
    net: &Network,
    s: NodeId,
    d: NodeId,
) -> Result<Network, TopologyError> {
    net.restricted_to(&shortest_path_arcs(net, s, d)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathCount {
    Exact(u64),
    LimitExceeded,
}

/// Counts simple directed `s → d` paths by depth-first enumeration.
///
/// Gives up with [`PathCount::LimitExceeded`] once more than `limit` paths
/// are found or the search takes more than `limit × |V|` steps.
pub fn count_simple_paths(net: &Network, s: NodeId, d: NodeId, limit: u64) -> PathCount {
    if s == d {
        return PathCount::Exact(0);
    }
    let n = net.node_count();
    let mut adj: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    for a in net.arcs() {
        if !adj[a.from.0].contains(&a.to) {
            adj[a.from.0].push(a.to);
        }
    }
    struct Search<'a> {
        adj: &'a [Vec<NodeId>],
        target: NodeId,
        on_path: Vec<bool>,
        count: u64,
        steps: u64,
        count_limit: u64,
        step_limit: u64,
    }
    impl Search<'_> {
        fn visit(&mut self, u: NodeId) -> bool {
            self.steps += 1;
            if self.steps > self.step_limit {
                return false;
            }
            if u == self.target {
                self.count += 1;
                return self.count <= self.count_limit;
            }
            self.on_path[u.0] = true;
            for i in 0..self.adj[u.0].len() {
                let w = self.adj[u.0][i];
                if !self.on_path[w.0] && !self.visit(w) {
                    return false;
                }
            }
            self.on_path[u.0] = false;
            true
        }
    }
    let mut search = Search {
        adj: &adj,
        target: d,
        on_path: vec![false; n],
        count: 0,
        steps: 0,
        count_limit: limit,
        step_limit: limit.saturating_mul(n as u64 + 1),
    };
    if search.visit(s) {
        PathCount::Exact(search.count)
    } else {
        PathCount::LimitExceeded
    }
}
