//! Maximum concurrent flow by linear programming.
//!
//! Commodities sharing a `(source, sink)` pair are merged before solving and
//! split back proportionally to their demand. The LP maximizes a common
//! throughput multiplier `z` with
//!
//! ```text
//! out(v) - in(v) = z·δ_g       at v = source(g)
//! out(v) - in(v) = 0           at v ∉ {source(g), sink(g)}
//! Σ_g Σ_{arcs a in channel} x_{g,a} ≤ ĉ(channel)
//! ```
//!
//! where demands and capacities are normalized by their maxima, so that
//! `T_min = (max demand / max capacity) / z`.

use std::collections::BTreeMap;

use microlp::{ComparisonOp, OptimizationDirection, Problem, Variable};

use super::{check_commodities, max_flow, Commodity, FlowAssignment, FlowError, RATE_FLOOR};
use crate::netgraph::{hop_distances_from, hop_distances_to, Network, NodeId};
use crate::pathdisp::strip_circulations;

/// Minimal common duration and a flow assignment achieving it.
#[derive(Debug, Clone)]
pub struct ConcurrentFlow {
    pub t_min: f64,
    pub assignment: FlowAssignment,
}

struct Group {
    source: NodeId,
    sink: NodeId,
    demand: f64,
    members: Vec<usize>,
}

fn group_by_pair(commodities: &[Commodity]) -> Vec<Group> {
    let mut map: BTreeMap<(NodeId, NodeId), Group> = BTreeMap::new();
    for (i, c) in commodities.iter().enumerate() {
        let g = map.entry((c.source, c.sink)).or_insert_with(|| Group {
            source: c.source,
            sink: c.sink,
            demand: 0.0,
            members: Vec::new(),
        });
        g.demand += c.demand;
        g.members.push(i);
    }
    map.into_values().collect()
}

/// Solves for `T_min` and per-group arc rates (rates deliver each group's
/// demand in `T_min`).
fn solve_groups(net: &Network, groups: &[Group]) -> Result<(f64, Vec<Vec<f64>>), FlowError> {
    if let [g] = groups {
        let f = max_flow(net, g.source, g.sink);
        return Ok((g.demand / f.value, vec![f.arc_flow]));
    }
    let cap_scale = net.max_capacity();
    let demand_scale = groups.iter().map(|g| g.demand).fold(0.0, f64::max);
    let m = net.arc_count();

    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let z = lp.add_var(1.0, (0.0, f64::INFINITY));
    let mut vars: Vec<Vec<Option<Variable>>> = Vec::with_capacity(groups.len());
    let mut channel_terms: Vec<Vec<(Variable, f64)>> = vec![Vec::new(); net.channel_count()];

    for g in groups {
        let from_s = hop_distances_from(net, g.source, None);
        let to_d = hop_distances_to(net, g.sink, None);
        let useful = |v: NodeId| from_s[v.0].is_some() && to_d[v.0].is_some();
        let mut gv = vec![None; m];
        for (i, a) in net.arcs().iter().enumerate() {
            if a.to == g.source || a.from == g.sink || !useful(a.from) || !useful(a.to) {
                continue;
            }
            let cap = net.channels()[a.channel] / cap_scale;
            let v = lp.add_var(0.0, (0.0, cap));
            gv[i] = Some(v);
            channel_terms[a.channel].push((v, 1.0));
        }
        for node in net.nodes() {
            if node == g.sink || !useful(node) {
                continue;
            }
            let mut row: Vec<(Variable, f64)> = Vec::new();
            for a in net.out_arcs(node) {
                if let Some(v) = gv[a.0] {
                    row.push((v, 1.0));
                }
            }
            for a in net.in_arcs(node) {
                if let Some(v) = gv[a.0] {
                    row.push((v, -1.0));
                }
            }
            if node == g.source {
                row.push((z, -g.demand / demand_scale));
            }
            lp.add_constraint(row, ComparisonOp::Eq, 0.0);
        }
        vars.push(gv);
    }
    for (ch, terms) in channel_terms.into_iter().enumerate() {
        if terms.len() > 1 {
            lp.add_constraint(terms, ComparisonOp::Le, net.channels()[ch] / cap_scale);
        }
    }
    let solution = lp
        .solve()
        .map_err(|e| FlowError::Solver(e.to_string()))?
        .into_solution()
        .map_err(|_| FlowError::Solver("solve interrupted".into()))?;
    let zv = solution.var_value(z);
    if !(zv > 0.0 && zv.is_finite()) {
        return Err(FlowError::Solver(format!("degenerate throughput {zv}")));
    }
    let t_min = demand_scale / (zv * cap_scale);
    let rates = groups
        .iter()
        .zip(&vars)
        .map(|(g, gv)| {
            let raw: Vec<f64> = gv
                .iter()
                .map(|v| match v {
                    Some(v) => {
                        let r = solution.var_value(*v) * cap_scale;
                        if r < RATE_FLOOR {
                            0.0
                        } else {
                            r
                        }
                    }
                    None => 0.0,
                })
                .collect();
            strip_circulations(net, &raw, g.source, g.sink)
        })
        .collect();
    Ok((t_min, rates))
}

fn prepare(net: &Network, commodities: &[Commodity]) -> Result<Vec<Group>, FlowError> {
    check_commodities(net, commodities)?;
    let groups = group_by_pair(commodities);
    for g in &groups {
        if hop_distances_from(net, g.source, None)[g.sink.0].is_none() {
            return Err(FlowError::Disconnected {
                index: g.members[0],
                from: net.name(g.source).to_string(),
                to: net.name(g.sink).to_string(),
            });
        }
    }
    Ok(groups)
}

fn expand(
    commodities: &[Commodity],
    groups: &[Group],
    group_rates: Vec<Vec<f64>>,
    rate_factor: f64,
    duration: f64,
) -> FlowAssignment {
    let mut rates = vec![Vec::new(); commodities.len()];
    for (g, gr) in groups.iter().zip(group_rates) {
        for &k in &g.members {
            let share = commodities[k].demand / g.demand * rate_factor;
            rates[k] = gr.iter().map(|r| r * share).collect();
        }
    }
    FlowAssignment {
        duration,
        commodities: commodities.to_vec(),
        rates,
    }
}

/// Minimum `T` for which every commodity can be routed concurrently at rate
/// `demand / T`, with an assignment achieving it.
///
/// An empty commodity list yields `T_min = 0`.
pub fn max_concurrent_time(
    net: &Network,
    commodities: &[Commodity],
) -> Result<ConcurrentFlow, FlowError> {
    if commodities.is_empty() {
        return Ok(ConcurrentFlow {
            t_min: 0.0,
            assignment: FlowAssignment::empty(),
        });
    }
    let groups = prepare(net, commodities)?;
    let (t_min, group_rates) = solve_groups(net, &groups)?;
    Ok(ConcurrentFlow {
        t_min,
        assignment: expand(commodities, &groups, group_rates, 1.0, t_min),
    })
}

/// Cheap necessary conditions for routing every commodity within
/// `duration`: per-pair max flow and per-node egress/ingress capacity.
fn obviously_infeasible(net: &Network, groups: &[Group], duration: f64) -> bool {
    let slack = 1.0 + 1e-9;
    let n = net.node_count();
    let mut egress = vec![0.0; n];
    let mut ingress = vec![0.0; n];
    for g in groups {
        egress[g.source.0] += g.demand / duration;
        ingress[g.sink.0] += g.demand / duration;
    }
    for v in net.nodes() {
        let out_cap: f64 = net.out_arcs(v).iter().map(|a| net.arc_capacity(*a)).sum();
        let in_cap: f64 = net.in_arcs(v).iter().map(|a| net.arc_capacity(*a)).sum();
        if egress[v.0] > out_cap * slack || ingress[v.0] > in_cap * slack {
            return true;
        }
    }
    groups
        .iter()
        .any(|g| g.demand / duration > max_flow(net, g.source, g.sink).value * slack)
}

/// Whether every commodity's demand fits in `duration` seconds; when it
/// does, returns an assignment with that duration.
pub fn multicomm(
    net: &Network,
    commodities: &[Commodity],
    duration: f64,
) -> Result<Option<FlowAssignment>, FlowError> {
    if !(duration.is_finite() && duration > 0.0) {
        return Err(FlowError::InvalidDuration(duration));
    }
    if commodities.is_empty() {
        return Err(FlowError::NoCommodities);
    }
    let groups = prepare(net, commodities)?;
    if obviously_infeasible(net, &groups, duration) {
        return Ok(None);
    }
    let (t_min, group_rates) = solve_groups(net, &groups)?;
    if t_min > duration * (1.0 + 1e-9) {
        return Ok(None);
    }
    Ok(Some(expand(
        commodities,
        &groups,
        group_rates,
        t_min / duration,
        duration,
    )))
}
