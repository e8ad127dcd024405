use serde::Serialize;

use super::{run_trace, BatchAll, BatchLim, Job, ScheduleError, SchedulerKind};
use crate::flowsolve::{max_concurrent_time, max_flow_value};
use crate::netgraph::Network;

/// Result of running a batching scheduler on an augmented network against
/// the optimal-delay lower bound of the original one.
#[derive(Debug, Clone, Serialize)]
pub struct CompetitiveReport {
    pub scheduler: SchedulerKind,
    pub eps: f64,
    pub jobs: usize,
    pub max_delay: f64,
    pub optimal_lower_bound: f64,
    pub ratio: f64,
    /// `2/ε` for BatchAll, `4/ε` for BatchLim.
    pub allowed_ratio: f64,
    pub broken_promises: usize,
    /// Slot creations violating the half-coverage or growth limits.
    pub interval_violations: usize,
}

impl CompetitiveReport {
    pub fn holds(&self) -> bool {
        self.ratio <= self.allowed_ratio * (1.0 + 1e-9)
            && self.broken_promises == 0
            && self.interval_violations == 0
    }
}

/// Lower bound on the best achievable max delay for `jobs` (sorted by
/// arrival) on `net`.
///
/// Jobs arriving in `[a, b]` cannot all finish before
/// `a + T_min(window)`, so some job in the window waits at least
/// `T_min(window) - (b - a)`. Every job also waits at least its own
/// single-job time. Windows are enumerated by their first job, and the LP
/// is skipped whenever a cheap upper bound shows it cannot improve the best
/// value found so far. `hints` are index ranges tried first.
pub fn optimal_delay_lower_bound(
    net: &Network,
    jobs: &[Job],
    hints: &[(usize, usize)],
) -> Result<f64, ScheduleError> {
    if jobs.is_empty() {
        return Ok(0.0);
    }
    let solo: Vec<f64> = jobs
        .iter()
        .map(|j| j.size / max_flow_value(net, j.source, j.destination))
        .collect();
    let mut best = solo.iter().copied().fold(0.0, f64::max);
    let window_time = |a: usize, b: usize| -> Result<f64, ScheduleError> {
        let commodities: Vec<_> = jobs[a..=b].iter().map(Job::commodity).collect();
        Ok(max_concurrent_time(net, &commodities)?.t_min)
    };
    for &(a, b) in hints {
        if a < b && b < jobs.len() {
            best = best.max(window_time(a, b)? - (jobs[b].arrival - jobs[a].arrival));
        }
    }
    for a in 0..jobs.len() {
        // Exact T_min of the last solved window and the solo times since.
        let mut known = solo[a];
        let mut extra = 0.0;
        for b in a + 1..jobs.len() {
            extra += solo[b];
            let span = jobs[b].arrival - jobs[a].arrival;
            if known + extra - span <= best {
                continue;
            }
            known = window_time(a, b)?;
            extra = 0.0;
            best = best.max(known - span);
        }
    }
    Ok(best)
}

/// Runs `kind` (BatchAll or BatchLim) on `net` scaled by `1 + eps` and
/// compares its max delay with the optimal lower bound on `net`.
pub fn verify_competitive(
    net: &Network,
    kind: SchedulerKind,
    jobs: &[Job],
    eps: f64,
) -> Result<CompetitiveReport, ScheduleError> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(ScheduleError::InvalidJob {
            job: 0,
            reason: format!("augmentation must be positive, got {eps}"),
        });
    }
    let augmented = net.scaled(1.0 + eps);
    let (run, allowed, interval_violations) = match kind {
        SchedulerKind::BatchAll => {
            let mut s = BatchAll::new(&augmented);
            (run_trace(&mut s, jobs)?, 2.0 / eps, 0)
        }
        SchedulerKind::BatchLim => {
            let mut s = BatchLim::new(&augmented);
            let run = run_trace(&mut s, jobs)?;
            let bad = s
                .slot_history()
                .iter()
                .filter(|h| !(h.covers_half() && h.bounded_growth()))
                .count();
            (run, 4.0 / eps, bad)
        }
        other => {
            return Err(ScheduleError::InvalidJob {
                job: 0,
                reason: format!("no competitive guarantee for {other}"),
            })
        }
    };
    let max_delay = run
        .reservations
        .iter()
        .map(|r| r.delay())
        .fold(0.0, f64::max);

    // Jobs sharing a batch or slot make good first guesses for windows.
    let index_of = |id: u64| jobs.iter().position(|j| j.id == id);
    let mut groups: std::collections::BTreeMap<u64, (usize, usize)> = Default::default();
    for r in &run.reservations {
        if let (Some(g), Some(i)) = (r.group, index_of(r.job.id)) {
            let e = groups.entry(g).or_insert((i, i));
            e.0 = e.0.min(i);
            e.1 = e.1.max(i);
        }
    }
    let hints: Vec<_> = groups.into_values().collect();
    let optimal_lower_bound = optimal_delay_lower_bound(net, jobs, &hints)?;
    Ok(CompetitiveReport {
        scheduler: kind,
        eps,
        jobs: jobs.len(),
        max_delay,
        optimal_lower_bound,
        ratio: if optimal_lower_bound > 0.0 {
            max_delay / optimal_lower_bound
        } else {
            0.0
        },
        allowed_ratio: allowed,
        broken_promises: run.broken_promises.len(),
        interval_violations,
    })
}
