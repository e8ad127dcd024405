//! Load bounds and delay-versus-load tables.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flowsolve::{max_concurrent_time, Commodity, FlowError};
use crate::netgraph::{Network, TopologyError};
use crate::simcore::{PairPolicy, Summary};
use crate::units::SECONDS_PER_HOUR;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("no runs to aggregate")]
    Empty,
    #[error("runs mix topologies `{0}` and `{1}`")]
    MixedTopologies(String, String),
    #[error("mean size must be positive")]
    BadMeanSize,
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Largest arrival rate (requests/hour) whose long-run average demand,
/// spread evenly over the pairs of `policy`, is a feasible multicommodity
/// flow. No scheduler can sustain a higher load.
pub fn fluid_bound(
    net: &Network,
    mean_size: f64,
    policy: &PairPolicy,
) -> Result<f64, MetricsError> {
    if !(mean_size.is_finite() && mean_size > 0.0) {
        return Err(MetricsError::BadMeanSize);
    }
    let commodities: Vec<Commodity> = match policy {
        PairPolicy::UniformDistinct => net
            .nodes()
            .flat_map(|s| net.nodes().filter(move |d| *d != s).map(move |d| (s, d)))
            .map(|(source, sink)| Commodity {
                source,
                sink,
                demand: 1.0,
            })
            .collect(),
        PairPolicy::Fixed {
            source,
            destination,
        } => vec![Commodity {
            source: net.require_node(source)?,
            sink: net.require_node(destination)?,
            demand: 1.0,
        }],
    };
    let pairs = commodities.len() as f64;
    // One bit per pair takes `t_unit` seconds, i.e. a sustainable per-pair
    // rate of 1/t_unit bits/s.
    let t_unit = max_concurrent_time(net, &commodities)?.t_min;
    Ok(pairs / (t_unit * mean_size) * SECONDS_PER_HOUR)
}

/// One simulation run tagged with what was swept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRun {
    pub topology: String,
    pub load_req_per_hour: f64,
    pub summary: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadPoint {
    pub scheduler: String,
    pub load_req_per_hour: f64,
    pub mean_delay_s: f64,
    pub p99_delay_s: f64,
    pub max_delay_s: f64,
    pub saturated: bool,
}

/// One row per (scheduler, load), sorted by scheduler then load. Repeated
/// runs of the same point are averaged; the point is saturated if any run
/// was.
pub fn sweep_aggregate(runs: &[SweepRun]) -> Result<Vec<LoadPoint>, MetricsError> {
    let first = runs.first().ok_or(MetricsError::Empty)?;
    if let Some(other) = runs.iter().find(|r| r.topology != first.topology) {
        return Err(MetricsError::MixedTopologies(
            first.topology.clone(),
            other.topology.clone(),
        ));
    }
    let mut groups: BTreeMap<(String, u64), Vec<&SweepRun>> = BTreeMap::new();
    for r in runs {
        groups
            .entry((r.summary.scheduler.clone(), r.load_req_per_hour.to_bits()))
            .or_default()
            .push(r);
    }
    let mut out: Vec<LoadPoint> = groups
        .into_iter()
        .map(|((scheduler, _), rs)| {
            let n = rs.len() as f64;
            LoadPoint {
                scheduler,
                load_req_per_hour: rs[0].load_req_per_hour,
                mean_delay_s: rs.iter().map(|r| r.summary.mean_delay_s).sum::<f64>() / n,
                p99_delay_s: rs.iter().map(|r| r.summary.p99_delay_s).sum::<f64>() / n,
                max_delay_s: rs.iter().map(|r| r.summary.max_delay_s).fold(0.0, f64::max),
                saturated: rs.iter().any(|r| r.summary.saturated),
            }
        })
        .collect();
    out.sort_by(|a, b| {
        a.scheduler
            .cmp(&b.scheduler)
            .then(a.load_req_per_hour.total_cmp(&b.load_req_per_hour))
    });
    Ok(out)
}

/// CSV with header `scheduler,load_req_per_hour,mean_delay_s,p99_delay_s,max_delay_s,saturated`.
pub fn write_sweep_csv<W: Write>(points: &[LoadPoint], out: W) -> Result<(), MetricsError> {
    let mut w = csv::Writer::from_writer(out);
    if points.is_empty() {
        w.write_record([
            "scheduler",
            "load_req_per_hour",
            "mean_delay_s",
            "p99_delay_s",
            "max_delay_s",
            "saturated",
        ])?;
    }
    for p in points {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

/// Lowest load flagged saturated for `scheduler`, if any.
pub fn saturation_load(points: &[LoadPoint], scheduler: &str) -> Option<f64> {
    points
        .iter()
        .filter(|p| p.scheduler == scheduler && p.saturated)
        .map(|p| p.load_req_per_hour)
        .reduce(f64::min)
}
