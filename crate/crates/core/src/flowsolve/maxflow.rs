//! Single-commodity maximum flow (Dinic, floating point).

use std::collections::VecDeque;

use crate::netgraph::{ArcId, Network, NodeId, ResidualNetwork};

/// A maximum `s → d` flow. `arc_flow` is indexed by arc, carries no flow on
/// both directions of an arc pair and contains no circulations.
#[derive(Debug, Clone)]
pub struct MaxFlow {
    pub value: f64,
    pub arc_flow: Vec<f64>,
}

struct DinicEdge {
    to: usize,
    cap: f64,
    rev: usize,
    arc: Option<usize>,
}

struct Dinic {
    graph: Vec<Vec<DinicEdge>>,
    level: Vec<i64>,
    iter: Vec<usize>,
    eps: f64,
}

impl Dinic {
    fn new(n: usize, eps: f64) -> Self {
        Dinic {
            graph: (0..n).map(|_| Vec::new()).collect(),
            level: vec![-1; n],
            iter: vec![0; n],
            eps,
        }
    }

    fn add_edge(&mut self, u: usize, v: usize, cap: f64, arc: usize) {
        let ru = self.graph[v].len();
        let rv = self.graph[u].len();
        self.graph[u].push(DinicEdge {
            to: v,
            cap,
            rev: ru,
            arc: Some(arc),
        });
        self.graph[v].push(DinicEdge {
            to: u,
            cap: 0.0,
            rev: rv,
            arc: None,
        });
    }

    fn bfs(&mut self, s: usize) {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for e in &self.graph[u] {
                if e.cap > self.eps && self.level[e.to] < 0 {
                    self.level[e.to] = self.level[u] + 1;
                    queue.push_back(e.to);
                }
            }
        }
    }

    fn dfs(&mut self, u: usize, t: usize, pushed: f64) -> f64 {
        if u == t {
            return pushed;
        }
        while self.iter[u] < self.graph[u].len() {
            let i = self.iter[u];
            let (to, cap) = (self.graph[u][i].to, self.graph[u][i].cap);
            if cap > self.eps && self.level[u] < self.level[to] {
                let d = self.dfs(to, t, pushed.min(cap));
                if d > 0.0 {
                    self.graph[u][i].cap -= d;
                    let rev = self.graph[u][i].rev;
                    self.graph[to][rev].cap += d;
                    return d;
                }
            }
            self.iter[u] += 1;
        }
        0.0
    }

    fn run(&mut self, s: usize, t: usize) -> f64 {
        let mut flow = 0.0;
        loop {
            self.bfs(s);
            if self.level[t] < 0 {
                return flow;
            }
            self.iter.iter_mut().for_each(|i| *i = 0);
            loop {
                let f = self.dfs(s, t, f64::INFINITY);
                if f <= 0.0 {
                    break;
                }
                flow += f;
            }
        }
    }
}

/// Max flow over per-channel `available` bandwidth, optionally restricted
/// to arcs whose `mask` entry is set.
pub fn max_flow_with(
    net: &Network,
    available: &[f64],
    s: NodeId,
    d: NodeId,
    mask: Option<&[bool]>,
) -> MaxFlow {
    let m = net.arc_count();
    let zero = || MaxFlow {
        value: 0.0,
        arc_flow: vec![0.0; m],
    };
    if s == d {
        return zero();
    }
    let scale = available.iter().copied().fold(0.0, f64::max);
    if scale <= 0.0 {
        return zero();
    }
    let eps = scale * 1e-12;
    let mut dinic = Dinic::new(net.node_count(), eps);
    for (i, a) in net.arcs().iter().enumerate() {
        if mask.is_some_and(|m| !m[i]) {
            continue;
        }
        let cap = available[a.channel];
        if cap > eps {
            dinic.add_edge(a.from.0, a.to.0, cap, i);
        }
    }
    dinic.run(s.0, d.0);
    let mut arc_flow = vec![0.0; m];
    for u in 0..net.node_count() {
        for e in &dinic.graph[u] {
            if let Some(arc) = e.arc {
                let rev = &dinic.graph[e.to][e.rev];
                arc_flow[arc] = rev.cap;
            }
        }
    }
    // Cancel opposing flow on antiparallel arcs so shared channels carry
    // flow in one direction only.
    for i in 0..m {
        if let Some(r) = net.reverse_arc(ArcId(i)) {
            let c = arc_flow[i].min(arc_flow[r.0]);
            if c > 0.0 {
                arc_flow[i] -= c;
                arc_flow[r.0] -= c;
            }
        }
    }
    let arc_flow = crate::pathdisp::strip_circulations(net, &arc_flow, s, d);
    let value = crate::flowsolve::net_outflow(net, &arc_flow, s);
    MaxFlow { value, arc_flow }
}

/// Value and flow of a maximum `s → d` flow on the full network.
pub fn max_flow(net: &Network, s: NodeId, d: NodeId) -> MaxFlow {
    max_flow_with(net, net.channels(), s, d, None)
}

/// Value of a maximum `s → d` flow in bits/second. Disconnected pairs give 0.
pub fn max_flow_value(net: &Network, s: NodeId, d: NodeId) -> f64 {
    max_flow(net, s, d).value
}

/// Maximum flow on a residual network.
pub fn max_flow_residual(res: &ResidualNetwork<'_>, s: NodeId, d: NodeId) -> MaxFlow {
    max_flow_with(res.base(), res.available(), s, d, None)
}
