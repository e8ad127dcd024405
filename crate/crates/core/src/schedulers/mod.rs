//! Online reservation algorithms.
//!
//! Every scheduler consumes jobs in arrival order through [`Scheduler::submit`]
//! and may hold internal events (batch closes, slot starts) that the caller
//! fires through [`Scheduler::advance`] in time order.

mod batchall;
mod batchlim;
mod competitive;
mod greedy;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flowsolve::{net_outflow, FlowAssignment, FlowError};
use crate::netgraph::{is_reachable, Network, NodeId};
use crate::pathdisp::{DispersionError, FlowPath};

pub use batchall::BatchAll;
pub use batchlim::{BatchLim, SlotCreation};
pub use competitive::{optimal_delay_lower_bound, verify_competitive, CompetitiveReport};
pub use greedy::{Greedy, GreedySlot};

/// A transfer request. `size` in bits, `arrival` in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Job {
    pub id: u64,
    pub source: NodeId,
    pub destination: NodeId,
    pub size: f64,
    pub arrival: f64,
}

impl Job {
    pub fn commodity(&self) -> crate::flowsolve::Commodity {
        crate::flowsolve::Commodity {
            source: self.source,
            sink: self.destination,
            demand: self.size,
        }
    }
}

/// Constant per-arc rates over `[start, end]`. Only nonzero arcs are kept.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanSegment {
    pub start: f64,
    pub end: f64,
    pub arc_rates: Vec<(usize, f64)>,
}

impl PlanSegment {
    pub fn new(start: f64, end: f64, rates: &[f64]) -> Self {
        PlanSegment {
            start,
            end,
            arc_rates: rates
                .iter()
                .enumerate()
                .filter(|(_, r)| **r > 0.0)
                .map(|(i, r)| (i, *r))
                .collect(),
        }
    }

    pub fn dense(&self, arc_count: usize) -> Vec<f64> {
        let mut v = vec![0.0; arc_count];
        for (a, r) in &self.arc_rates {
            v[*a] = *r;
        }
        v
    }
}

/// A committed reservation.
#[derive(Debug, Clone, PartialEq)]
pub struct Reservation {
    pub job: Job,
    pub start: f64,
    pub completion: f64,
    /// Batch (BatchAll) or slot (BatchLim) identifier; Greedy has none.
    pub group: Option<u64>,
    /// Largest number of simultaneous paths the job uses.
    pub num_paths: usize,
    pub plan: Vec<PlanSegment>,
    /// Paths of the final segment, for path dumps.
    pub paths: Vec<FlowPath>,
}

impl Reservation {
    pub fn delay(&self) -> f64 {
        self.completion - self.job.arrival
    }

    /// Bits delivered by the plan: net source outflow integrated over time.
    pub fn delivered_bits(&self, net: &Network) -> f64 {
        self.plan
            .iter()
            .map(|seg| {
                net_outflow(net, &seg.dense(net.arc_count()), self.job.source)
                    * (seg.end - seg.start)
            })
            .sum()
    }

    pub(crate) fn from_assignment(
        job: Job,
        start: f64,
        group: Option<u64>,
        assignment: &FlowAssignment,
        index: usize,
        paths: Vec<FlowPath>,
    ) -> Reservation {
        let completion = start + assignment.duration;
        Reservation {
            job,
            start,
            completion,
            group,
            num_paths: paths.len(),
            plan: vec![PlanSegment::new(
                start,
                completion,
                &assignment.rates[index],
            )],
            paths,
        }
    }
}

/// Result of submitting a job.
#[derive(Debug, Clone, PartialEq)]
pub enum Admission {
    /// Fully committed at submission.
    Scheduled(Reservation),
    /// Start time promised; completion known once the job's batch starts.
    Deferred { start: f64 },
    /// Start and completion promised; the flow plan is fixed at `start`.
    Promised {
        start: f64,
        completion: f64,
        slot: u64,
    },
}

/// Scheduler-internal event kinds. Ordering at equal timestamps is by
/// [`EventKind::priority`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EventKind {
    BatchClose,
    Completion,
    Arrival,
    SlotStart,
}

impl EventKind {
    /// Batch closes fire before same-time arrivals; slot starts fire after
    /// them, so a slot starting at `t` still admits a job arriving at `t`.
    pub fn priority(self) -> u8 {
        match self {
            EventKind::BatchClose => 0,
            EventKind::Completion => 1,
            EventKind::Arrival => 2,
            EventKind::SlotStart => 3,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScheduleError {
    #[error("job {job}: no path from {from} to {to}")]
    Disconnected { job: u64, from: String, to: String },
    #[error("job {job}: {reason}")]
    InvalidJob { job: u64, reason: String },
    #[error("job {job} arrives at {arrival} but pending events precede it (next at {pending})")]
    OutOfOrder {
        job: u64,
        arrival: f64,
        pending: f64,
    },
    #[error("path budget must be at least 1")]
    ZeroPathBudget,
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Dispersion(#[from] DispersionError),
}

pub trait Scheduler {
    fn kind(&self) -> SchedulerKind;

    fn submit(&mut self, job: &Job) -> Result<Admission, ScheduleError>;

    /// Next internal event, if any.
    fn next_event(&self) -> Option<(f64, EventKind)>;

    /// Fires internal events at `now`, returning reservations that became
    /// final.
    fn advance(&mut self, now: f64) -> Result<Vec<Reservation>, ScheduleError>;

    /// Jobs per batch or slot so far; empty for schedulers without batches.
    fn batch_sizes(&self) -> Vec<usize> {
        Vec::new()
    }
}

/// Outcome of feeding a whole trace through a scheduler.
#[derive(Debug, Clone)]
pub struct TraceRun {
    /// Reservations in the order they became final.
    pub reservations: Vec<Reservation>,
    /// Jobs whose final reservation differs from what was promised.
    pub broken_promises: Vec<u64>,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Submits `jobs` (sorted by arrival) and fires internal events in time
/// order, honoring [`EventKind::priority`] against arrivals.
pub fn run_trace(sched: &mut dyn Scheduler, jobs: &[Job]) -> Result<TraceRun, ScheduleError> {
    use std::collections::HashMap;
    let mut promised: HashMap<u64, (f64, Option<f64>)> = HashMap::new();
    let mut out = Vec::with_capacity(jobs.len());
    for job in jobs {
        while let Some((t, kind)) = sched.next_event() {
            let before = t < job.arrival
                || (t == job.arrival && kind.priority() < EventKind::Arrival.priority());
            if !before {
                break;
            }
            out.extend(sched.advance(t)?);
        }
        match sched.submit(job)? {
            Admission::Scheduled(r) => out.push(r),
            Admission::Deferred { start } => {
                promised.insert(job.id, (start, None));
            }
            Admission::Promised {
                start, completion, ..
            } => {
                promised.insert(job.id, (start, Some(completion)));
            }
        }
    }
    while let Some((t, _)) = sched.next_event() {
        out.extend(sched.advance(t)?);
    }
    let broken_promises = out
        .iter()
        .filter(|r| match promised.get(&r.job.id) {
            Some((s, c)) => !close(*s, r.start) || c.is_some_and(|c| !close(c, r.completion)),
            None => false,
        })
        .map(|r| r.job.id)
        .collect();
    Ok(TraceRun {
        reservations: out,
        broken_promises,
    })
}

/// Which algorithm to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SchedulerKind {
    Greedy,
    GreedyShortest,
    BatchAll,
    BatchLim,
    BatchAllDisp(usize),
    BatchLimDisp(usize),
}

impl SchedulerKind {
    pub fn build<'a>(&self, net: &'a Network) -> Result<Box<dyn Scheduler + 'a>, ScheduleError> {
        Ok(match *self {
            SchedulerKind::Greedy => Box::new(Greedy::new(net)),
            SchedulerKind::GreedyShortest => Box::new(Greedy::shortest(net)),
            SchedulerKind::BatchAll => Box::new(BatchAll::new(net)),
            SchedulerKind::BatchLim => Box::new(BatchLim::new(net)),
            SchedulerKind::BatchAllDisp(k) => Box::new(BatchAll::with_dispersion(net, k)?),
            SchedulerKind::BatchLimDisp(k) => Box::new(BatchLim::with_dispersion(net, k)?),
        })
    }

    pub fn path_budget(&self) -> Option<usize> {
        match *self {
            SchedulerKind::BatchAllDisp(k) | SchedulerKind::BatchLimDisp(k) => Some(k),
            _ => None,
        }
    }
}

impl fmt::Display for SchedulerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchedulerKind::Greedy => f.write_str("greedy"),
            SchedulerKind::GreedyShortest => f.write_str("greedy-shortest"),
            SchedulerKind::BatchAll => f.write_str("batchall"),
            SchedulerKind::BatchLim => f.write_str("batchlim"),
            SchedulerKind::BatchAllDisp(k) => write!(f, "batchall-disp({k})"),
            SchedulerKind::BatchLimDisp(k) => write!(f, "batchlim-disp({k})"),
        }
    }
}

impl FromStr for SchedulerKind {
    type Err = String;

    /// Accepts `batchall-disp(5)`, `batchall-disp:5` and `batchall-disp=5`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (name, arg) = match s.find(['(', ':', '=']) {
            Some(i) => {
                let arg = s[i + 1..].trim_end_matches(')');
                (&s[..i], Some(arg))
            }
            None => (s, None),
        };
        let budget = |arg: Option<&str>| -> Result<usize, String> {
            let arg = arg.ok_or_else(|| format!("`{name}` needs a path budget, e.g. {name}(5)"))?;
            let k: usize = arg
                .parse()
                .map_err(|_| format!("invalid path budget `{arg}`"))?;
            if k == 0 {
                return Err("path budget must be at least 1".into());
            }
            Ok(k)
        };
        match (name, arg) {
            ("greedy", None) => Ok(SchedulerKind::Greedy),
            ("greedy-shortest" | "greedy_shortest", None) => Ok(SchedulerKind::GreedyShortest),
            ("batchall", None) => Ok(SchedulerKind::BatchAll),
            ("batchlim", None) => Ok(SchedulerKind::BatchLim),
            ("batchall-disp", a) => Ok(SchedulerKind::BatchAllDisp(budget(a)?)),
            ("batchlim-disp", a) => Ok(SchedulerKind::BatchLimDisp(budget(a)?)),
            _ => Err(format!("unknown scheduler `{s}`")),
        }
    }
}

impl TryFrom<String> for SchedulerKind {
    type Error = String;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<SchedulerKind> for String {
    fn from(k: SchedulerKind) -> String {
        k.to_string()
    }
}

/// All-pairs reachability, computed once per scheduler.
#[derive(Debug, Clone)]
pub(crate) struct Reachability {
    n: usize,
    ok: Vec<bool>,
}

impl Reachability {
    pub(crate) fn new(net: &Network) -> Self {
        let n = net.node_count();
        let mut ok = vec![false; n * n];
        for s in net.nodes() {
            for d in net.nodes() {
                ok[s.0 * n + d.0] = s != d && is_reachable(net, s, d, None);
            }
        }
        Reachability { n, ok }
    }

    pub(crate) fn check(&self, net: &Network, job: &Job) -> Result<(), ScheduleError> {
        let invalid = |reason: &str| ScheduleError::InvalidJob {
            job: job.id,
            reason: reason.to_string(),
        };
        if job.source.0 >= self.n || job.destination.0 >= self.n {
            return Err(invalid("unknown node"));
        }
        if job.source == job.destination {
            return Err(invalid("source equals destination"));
        }
        if !(job.size.is_finite() && job.size > 0.0) {
            return Err(invalid("size must be positive and finite"));
        }
        if !job.arrival.is_finite() {
            return Err(invalid("arrival must be finite"));
        }
        if !self.ok[job.source.0 * self.n + job.destination.0] {
            return Err(ScheduleError::Disconnected {
                job: job.id,
                from: net.name(job.source).to_string(),
                to: net.name(job.destination).to_string(),
            });
        }
        Ok(())
    }
}
