//! Discrete-event simulation: workload generation, event-ordered execution
//! of a scheduler, invariant checks and summary statistics.

mod events;
mod trace;
mod workload;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netgraph::{Network, TopologyError};
use crate::schedulers::{Admission, Job, Reservation, ScheduleError, Scheduler, SchedulerKind};

pub use events::{Event, EventQueue};
pub use trace::{
    parse_trace, parse_trace_records, render_paths, write_log, write_paths, write_trace,
    TraceRecord,
};
pub use workload::{generate_trace, PairPolicy, SizeDist, WorkloadSpec};

/// Relative tolerance for capacity, conservation and promise checks.
pub const INVARIANT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid workload: {0}")]
    InvalidWorkload(String),
    #[error("trace line {line}: {msg}")]
    Trace { line: u64, msg: String },
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunOptions {
    /// Fraction of completions, in completion order, left out of statistics.
    pub warmup_fraction: f64,
    /// Keep per-segment flow plans in the output.
    pub keep_plans: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            warmup_fraction: 0.1,
            keep_plans: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub job_id: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub scheduler: String,
    pub jobs: usize,
    pub completed: usize,
    pub rejected: usize,
    pub warmup_fraction: f64,
    /// Completions counted in the statistics below.
    pub measured: usize,
    pub mean_delay_s: f64,
    pub max_delay_s: f64,
    pub p50_delay_s: f64,
    pub p90_delay_s: f64,
    pub p99_delay_s: f64,
    pub mean_batch_size: Option<f64>,
    pub mean_path_count: f64,
    pub last_completion_s: f64,
    /// Mean delay per successive window of 10% of completions, after warm-up.
    pub window_mean_delays: Vec<f64>,
    pub saturated: bool,
    pub violations: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    /// Reservations sorted by job id.
    pub reservations: Vec<Reservation>,
    pub rejections: Vec<Rejection>,
    pub summary: Summary,
}

/// Growth rule for [`Summary::saturated`]: the running mean over windows
/// rises at every window and the average step exceeds 20% of the first
/// window.
///
/// The running mean rather than each window mean must rise because a batch
/// completes all at once with its latest arrivals waiting least, so raw
/// window means dip inside large batches even when the queue diverges.
pub fn is_saturated(window_means: &[f64]) -> bool {
    if window_means.len() < 3 {
        return false;
    }
    let mut sum = 0.0;
    let running: Vec<f64> = window_means
        .iter()
        .enumerate()
        .map(|(i, w)| {
            sum += w;
            sum / (i + 1) as f64
        })
        .collect();
    let increasing = running.windows(2).all(|w| w[1] > w[0]);
    let first = window_means[0];
    let step = (window_means[window_means.len() - 1] - first) / (window_means.len() - 1) as f64;
    increasing && step > 0.2 * first
}

/// Nearest-rank percentile of sorted data.
fn percentile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let rank = ((p / 100.0) * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// Checks that at no instant the reserved rate on any channel exceeds its
/// capacity.
fn capacity_violations(net: &Network, reservations: &[Reservation]) -> Vec<String> {
    // (time, is_start, reservation, segment)
    let mut marks: Vec<(f64, bool, usize, usize)> = Vec::new();
    for (i, r) in reservations.iter().enumerate() {
        for (j, s) in r.plan.iter().enumerate() {
            if s.end > s.start {
                marks.push((s.start, true, i, j));
                marks.push((s.end, false, i, j));
            }
        }
    }
    // Ends before starts at equal times.
    marks.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let caps = net.channels();
    let mut usage = vec![0.0; caps.len()];
    let mut out = Vec::new();
    let mut k = 0;
    while k < marks.len() {
        let t = marks[k].0;
        while k < marks.len() && marks[k].0 == t {
            let (_, start, i, j) = marks[k];
            let sign = if start { 1.0 } else { -1.0 };
            for &(a, rate) in &reservations[i].plan[j].arc_rates {
                usage[net.arcs()[a].channel] += sign * rate;
            }
            k += 1;
        }
        for (c, (u, cap)) in usage.iter().zip(caps).enumerate() {
            if *u > cap * (1.0 + INVARIANT_TOLERANCE) {
                out.push(format!("channel {c} carries {u} > {cap} at t={t}"));
                if out.len() >= 10 {
                    return out;
                }
            }
        }
    }
    out
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= INVARIANT_TOLERANCE * a.abs().max(b.abs()).max(1.0)
}

/// Runs `kind` over `trace` (sorted by arrival) on `net`.
pub fn run(
    net: &Network,
    kind: SchedulerKind,
    trace: &[Job],
    options: &RunOptions,
) -> Result<RunOutput, SimError> {
    let mut sched = kind.build(net)?;
    run_with(net, sched.as_mut(), trace, options)
}

pub fn run_with(
    net: &Network,
    sched: &mut dyn Scheduler,
    trace: &[Job],
    options: &RunOptions,
) -> Result<RunOutput, SimError> {
    if !(0.0..1.0).contains(&options.warmup_fraction) {
        return Err(SimError::InvalidWorkload(
            "warm-up fraction must lie in [0, 1)".into(),
        ));
    }
    if trace.windows(2).any(|w| w[1].arrival < w[0].arrival) {
        return Err(SimError::InvalidWorkload(
            "trace must be sorted by arrival".into(),
        ));
    }
    let mut queue = EventQueue::new();
    for (i, j) in trace.iter().enumerate() {
        queue.push(j.arrival, Event::Arrival(i));
    }
    let mut violations = Vec::new();
    let mut promises: HashMap<u64, (f64, Option<f64>)> = HashMap::new();
    let mut reservations: Vec<Reservation> = Vec::with_capacity(trace.len());
    let mut rejections = Vec::new();
    let mut completion_order: Vec<usize> = Vec::with_capacity(trace.len());
    let mut wakeup: Option<(f64, crate::schedulers::EventKind)> = None;

    let finalize = |r: Reservation,
                    now: f64,
                    queue: &mut EventQueue,
                    violations: &mut Vec<String>,
                    promises: &HashMap<u64, (f64, Option<f64>)>,
                    reservations: &mut Vec<Reservation>| {
        let id = r.job.id;
        if r.start < r.job.arrival * (1.0 - INVARIANT_TOLERANCE) - INVARIANT_TOLERANCE
            || r.completion < r.start
            || !r.completion.is_finite()
        {
            violations.push(format!(
                "job {id}: bad interval [{}, {}]",
                r.start, r.completion
            ));
        }
        let delivered = r.delivered_bits(net);
        if (delivered - r.job.size).abs() > INVARIANT_TOLERANCE * r.job.size {
            violations.push(format!(
                "job {id}: delivers {delivered} of {} bits",
                r.job.size
            ));
        }
        if let Some((s, c)) = promises.get(&id) {
            if !close(*s, r.start) || c.is_some_and(|c| !close(c, r.completion)) {
                violations.push(format!("job {id}: promise ({s}, {c:?}) not kept"));
            }
        }
        let at = if r.completion < now {
            violations.push(format!(
                "job {id}: completes at {} before now {now}",
                r.completion
            ));
            now
        } else {
            r.completion
        };
        queue.push(at, Event::Completion(reservations.len() as u64));
        reservations.push(r);
    };

    while let Some((now, event)) = queue.pop() {
        match event {
            Event::Arrival(i) => match sched.submit(&trace[i]) {
                Ok(Admission::Scheduled(r)) => finalize(
                    r,
                    now,
                    &mut queue,
                    &mut violations,
                    &promises,
                    &mut reservations,
                ),
                Ok(Admission::Deferred { start }) => {
                    promises.insert(trace[i].id, (start, None));
                }
                Ok(Admission::Promised {
                    start, completion, ..
                }) => {
                    promises.insert(trace[i].id, (start, Some(completion)));
                }
                Err(
                    e @ (ScheduleError::Disconnected { .. } | ScheduleError::InvalidJob { .. }),
                ) => rejections.push(Rejection {
                    job_id: trace[i].id,
                    reason: e.to_string(),
                }),
                Err(e) => return Err(e.into()),
            },
            Event::Wakeup(kind) => {
                if sched.next_event() == Some((now, kind)) {
                    wakeup = None;
                    for r in sched.advance(now)? {
                        finalize(
                            r,
                            now,
                            &mut queue,
                            &mut violations,
                            &promises,
                            &mut reservations,
                        );
                    }
                }
            }
            Event::Completion(idx) => completion_order.push(idx as usize),
        }
        let next = sched.next_event();
        if next != wakeup {
            if let Some((t, k)) = next {
                queue.push(t, Event::Wakeup(k));
            }
            wakeup = next;
        }
    }

    violations.extend(capacity_violations(net, &reservations));
    if reservations.len() + rejections.len() != trace.len() {
        violations.push(format!(
            "{} of {} jobs never finalized",
            trace.len() - reservations.len() - rejections.len(),
            trace.len()
        ));
    }

    // Statistics in completion order, ties by job id.
    completion_order.sort_by(|a, b| {
        let (x, y) = (&reservations[*a], &reservations[*b]);
        x.completion
            .total_cmp(&y.completion)
            .then(x.job.id.cmp(&y.job.id))
    });
    let delays: Vec<f64> = completion_order
        .iter()
        .map(|i| reservations[*i].delay())
        .collect();
    let n = delays.len();
    let skip = (options.warmup_fraction * n as f64).floor() as usize;
    let measured = &delays[skip..];
    let mut sorted = measured.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mean = |xs: &[f64]| {
        if xs.is_empty() {
            0.0
        } else {
            xs.iter().sum::<f64>() / xs.len() as f64
        }
    };
    let window = n / 10;
    let window_mean_delays: Vec<f64> = if window == 0 {
        Vec::new()
    } else {
        measured.chunks_exact(window).map(mean).collect()
    };
    let sizes = sched.batch_sizes();
    let summary = Summary {
        scheduler: sched.kind().to_string(),
        jobs: trace.len(),
        completed: reservations.len(),
        rejected: rejections.len(),
        warmup_fraction: options.warmup_fraction,
        measured: measured.len(),
        mean_delay_s: mean(measured),
        max_delay_s: sorted.last().copied().unwrap_or(0.0),
        p50_delay_s: percentile(&sorted, 50.0),
        p90_delay_s: percentile(&sorted, 90.0),
        p99_delay_s: percentile(&sorted, 99.0),
        mean_batch_size: (!sizes.is_empty())
            .then(|| sizes.iter().sum::<usize>() as f64 / sizes.len() as f64),
        mean_path_count: mean(
            &reservations
                .iter()
                .map(|r| r.num_paths as f64)
                .collect::<Vec<_>>(),
        ),
        last_completion_s: reservations
            .iter()
            .map(|r| r.completion)
            .fold(0.0, f64::max),
        saturated: is_saturated(&window_mean_delays),
        window_mean_delays,
        violations,
    };

    reservations.sort_by_key(|r| r.job.id);
    if !options.keep_plans {
        for r in &mut reservations {
            r.plan = Vec::new();
        }
    }
    Ok(RunOutput {
        reservations,
        rejections,
        summary,
    })
}
