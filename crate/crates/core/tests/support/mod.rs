//! Helpers shared by the integration tests and the acceptance suite.
#![allow(dead_code)]

use advres::netgraph::{ArcId, EdgeMode, Network, NetworkBuilder, NodeId};
use advres::schedulers::Job;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

type Q = BigRational;

fn q(x: f64) -> Q {
    Q::from_float(x).expect("finite")
}

/// Maximizes `c·x` subject to `A x ≤ b`, `x ≥ 0`, with `b ≥ 0`, by a dense
/// tableau simplex over exact rationals. Bland's rule prevents cycling.
/// Returns `None` when the objective is unbounded.
pub fn simplex_max(a: &[Vec<Q>], b: &[Q], c: &[Q]) -> Option<Q> {
    let m = a.len();
    let n = c.len();
    let width = n + m + 1;
    let mut t: Vec<Vec<Q>> = Vec::with_capacity(m + 1);
    for (i, row) in a.iter().enumerate() {
        assert!(!b[i].is_negative());
        let mut r = vec![Q::zero(); width];
        r[..n].clone_from_slice(row);
        r[n + i] = Q::one();
        r[width - 1] = b[i].clone();
        t.push(r);
    }
    let mut obj = vec![Q::zero(); width];
    for j in 0..n {
        obj[j] = -c[j].clone();
    }
    t.push(obj);
    let mut basis: Vec<usize> = (n..n + m).collect();
    loop {
        let Some(enter) = (0..width - 1).find(|&j| t[m][j].is_negative()) else {
            return Some(t[m][width - 1].clone());
        };
        let mut leave: Option<(usize, Q)> = None;
        for i in 0..m {
            if t[i][enter].is_positive() {
                let ratio = &t[i][width - 1] / &t[i][enter];
                let better = match &leave {
                    None => true,
                    Some((l, r)) => ratio < *r || (ratio == *r && basis[i] < basis[*l]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let (row, _) = leave?;
        let pivot = t[row][enter].clone();
        for x in t[row].iter_mut() {
            *x /= &pivot;
        }
        let pivot_row = t[row].clone();
        for (i, r) in t.iter_mut().enumerate() {
            if i != row && !r[enter].is_zero() {
                let f = r[enter].clone();
                for (x, p) in r.iter_mut().zip(&pivot_row) {
                    *x -= &f * p;
                }
            }
        }
        basis[row] = enter;
    }
}

/// Every simple `s → d` path as a list of arcs.
pub fn simple_paths(net: &Network, s: NodeId, d: NodeId) -> Vec<Vec<ArcId>> {
    fn walk(
        net: &Network,
        v: NodeId,
        d: NodeId,
        seen: &mut Vec<bool>,
        path: &mut Vec<ArcId>,
        out: &mut Vec<Vec<ArcId>>,
    ) {
        if v == d {
            out.push(path.clone());
            return;
        }
        for &a in net.out_arcs(v) {
            let w = net.arc(a).to;
            if !seen[w.0] {
                seen[w.0] = true;
                path.push(a);
                walk(net, w, d, seen, path, out);
                path.pop();
                seen[w.0] = false;
            }
        }
    }
    let mut seen = vec![false; net.node_count()];
    seen[s.0] = true;
    let mut out = Vec::new();
    walk(net, s, d, &mut seen, &mut Vec::new(), &mut out);
    out
}

/// Exact minimal common duration for routing `demands` (source, sink,
/// bits) concurrently, from the path formulation: maximize `λ` subject to
/// each commodity's path flows summing to `λ·demand` and channel
/// capacities. `T = 1/λ`; `None` if some commodity cannot be routed.
pub fn exact_concurrent_time(net: &Network, demands: &[(NodeId, NodeId, f64)]) -> Option<Q> {
    let paths: Vec<Vec<Vec<ArcId>>> = demands
        .iter()
        .map(|&(s, d, _)| simple_paths(net, s, d))
        .collect();
    if paths.iter().any(Vec::is_empty) {
        return None;
    }
    let vars = 1 + paths.iter().map(Vec::len).sum::<usize>();
    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut col = 1;
    let mut columns: Vec<&Vec<ArcId>> = Vec::new();
    for (k, ps) in paths.iter().enumerate() {
        let mut row = vec![Q::zero(); vars];
        row[0] = q(demands[k].2);
        for p in ps {
            row[col] = -Q::one();
            columns.push(p);
            col += 1;
        }
        a.push(row);
        b.push(Q::zero());
    }
    for (h, cap) in net.channels().iter().enumerate() {
        let mut row = vec![Q::zero(); vars];
        for (j, p) in columns.iter().enumerate() {
            let uses = p.iter().filter(|x| net.arc(**x).channel == h).count();
            row[1 + j] = Q::from_integer(BigInt::from(uses));
        }
        a.push(row);
        b.push(q(*cap));
    }
    let mut c = vec![Q::zero(); vars];
    c[0] = Q::one();
    let lambda = simplex_max(&a, &b, &c).expect("capacities bound λ");
    if lambda.is_zero() {
        None
    } else {
        Some(lambda.recip())
    }
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().expect("representable")
}

/// Network on nodes `0..n` from `(u, v, capacity)` triples.
pub fn build(mode: EdgeMode, n: usize, edges: &[(usize, usize, f64)]) -> Option<Network> {
    let mut b = NetworkBuilder::new(mode).with_numbered_nodes(n);
    for &(u, v, c) in edges {
        b.add_edge(&u.to_string(), &v.to_string(), c, 0).ok()?;
    }
    b.build().ok()
}

/// Random directed graph on `2..=max_nodes` nodes with edge probability in
/// `[0.2, 0.7]` and capacities drawn from `capacity`.
pub fn random_digraph<R: Rng>(
    rng: &mut R,
    max_nodes: usize,
    mut capacity: impl FnMut(&mut R) -> f64,
) -> Option<Network> {
    let n = rng.gen_range(2..=max_nodes);
    let p = rng.gen_range(0.2..0.7);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.gen_bool(p) {
                let c = capacity(rng);
                edges.push((u, v, c));
            }
        }
    }
    build(EdgeMode::Directed, n, &edges)
}

/// Directed line `A → B → C → D`, 1 Gb/s per link.
pub fn six_job_network() -> Network {
    let mut b = NetworkBuilder::new(EdgeMode::Directed);
    for (i, name) in ["A", "B", "C", "D"].iter().enumerate() {
        b.add_node(name, i + 1).unwrap();
    }
    for (u, v) in [("A", "B"), ("B", "C"), ("C", "D")] {
        b.add_edge(u, v, 1e9, 0).unwrap();
    }
    b.build().unwrap()
}

pub const HOUR: f64 = 3600.0;

/// Six one-hour full-bandwidth jobs on [`six_job_network`]: job 1 starts an
/// idle network; jobs 2 to 5 arrive while it runs, job 6 an hour later.
pub fn six_job_trace(net: &Network) -> Vec<Job> {
    let n = |s: &str| net.node(s).unwrap();
    let hour_of_bits = 1e9 * HOUR;
    [
        (1, "A", "B", 0.0),
        (2, "B", "C", 0.25),
        (3, "C", "D", 0.5),
        (4, "A", "B", 0.75),
        (5, "B", "C", 0.9),
        (6, "C", "D", 1.5),
    ]
    .into_iter()
    .map(|(id, s, d, h)| Job {
        id,
        source: n(s),
        destination: n(d),
        size: hour_of_bits,
        arrival: h * HOUR,
    })
    .collect()
}

/// Eight unit jobs around an 8-ring, each to its clockwise neighbour,
/// arriving within the first second.
pub fn ring_trace() -> Vec<Job> {
    (0..8)
        .map(|k| Job {
            id: k as u64 + 1,
            source: NodeId(k),
            destination: NodeId((k + 1) % 8),
            size: 1e9,
            arrival: k as f64 / 8.0,
        })
        .collect()
}
