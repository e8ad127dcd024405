use std::collections::VecDeque;

use super::{
    Admission, EventKind, Job, Reachability, Reservation, ScheduleError, Scheduler, SchedulerKind,
};
use crate::flowsolve::{max_concurrent_time, max_flow, multicomm, FlowAssignment};
use crate::netgraph::Network;
use crate::pathdisp::{decompose, decompose_exact, limit_dispersion, FlowPath};

/// A window routing plus per-job path sets under a budget.
type Fit = (FlowAssignment, Option<Vec<Vec<FlowPath>>>);
/// Lone-job completion time, arc flow and budgeted paths.
type Solo = (f64, Vec<f64>, Option<Vec<FlowPath>>);

/// Record of one slot creation, for checking interval growth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotCreation {
    pub slot: u64,
    pub arrival: f64,
    pub start: f64,
    pub end: f64,
    /// Minimum completion time of the job that opened the slot.
    pub min_time: f64,
    /// Length of the slot ending exactly at `start`, if contiguous.
    pub previous_len: Option<f64>,
}

impl SlotCreation {
    pub fn len(&self) -> f64 {
        self.end - self.start
    }

    /// The slot covers at least half the span from the arrival to its end.
    pub fn covers_half(&self) -> bool {
        self.len() >= (self.end - self.arrival) / 2.0 * (1.0 - 1e-9)
    }

    /// The slot is at most twice its predecessor or the opener's minimum
    /// completion time.
    pub fn bounded_growth(&self) -> bool {
        match self.previous_len {
            Some(prev) => self.len() <= (2.0 * prev).max(self.min_time) * (1.0 + 1e-9),
            None => true,
        }
    }
}

struct Slot {
    id: u64,
    start: f64,
    end: f64,
    jobs: Vec<Job>,
    assignment: FlowAssignment,
    paths: Option<Vec<Vec<FlowPath>>>,
}

/// Packs each job into the first future slot that can still carry it,
/// otherwise opens a new slot after the last one. Start and completion are
/// promised on arrival.
pub struct BatchLim<'a> {
    net: &'a Network,
    budget: Option<usize>,
    reach: Reachability,
    slots: VecDeque<Slot>,
    last_end: f64,
    next_slot: u64,
    sizes: Vec<usize>,
    history: Vec<SlotCreation>,
}

impl<'a> BatchLim<'a> {
    pub fn new(net: &'a Network) -> Self {
        BatchLim {
            net,
            budget: None,
            reach: Reachability::new(net),
            slots: VecDeque::new(),
            last_end: f64::NEG_INFINITY,
            next_slot: 0,
            sizes: Vec::new(),
            history: Vec::new(),
        }
    }

    /// Each job uses at most `k` paths; admission accounts for the
    /// resulting slowdown so promises still hold.
    pub fn with_dispersion(net: &'a Network, k: usize) -> Result<Self, ScheduleError> {
        if k == 0 {
            return Err(ScheduleError::ZeroPathBudget);
        }
        Ok(BatchLim {
            budget: Some(k),
            ..Self::new(net)
        })
    }

    pub fn slot_history(&self) -> &[SlotCreation] {
        &self.history
    }

    /// Routing of `jobs` that finishes in exactly `len` seconds, if any.
    fn fit(&self, jobs: &[Job], len: f64) -> Result<Option<Fit>, ScheduleError> {
        let commodities: Vec<_> = jobs.iter().map(Job::commodity).collect();
        let slack = 1.0 + 1e-9;
        match self.budget {
            None => Ok(multicomm(self.net, &commodities, len)?.map(|a| (a, None))),
            Some(k) => {
                let flow = max_concurrent_time(self.net, &commodities)?;
                if flow.t_min > len * slack {
                    return Ok(None);
                }
                let d = limit_dispersion(self.net, &flow.assignment, k)?;
                if d.assignment.duration > len * slack {
                    return Ok(None);
                }
                let factor = d.assignment.duration / len;
                let rates = d
                    .assignment
                    .rates
                    .iter()
                    .map(|r| r.iter().map(|x| x * factor).collect())
                    .collect();
                let paths = d.path_sets.iter().map(|p| p.scaled(factor).paths).collect();
                Ok(Some((
                    FlowAssignment {
                        duration: len,
                        commodities,
                        rates,
                    },
                    Some(paths),
                )))
            }
        }
    }

    /// Minimum completion time of a lone job and its routing at that pace.
    fn solo(&self, job: &Job) -> Result<Solo, ScheduleError> {
        let flow = max_flow(self.net, job.source, job.destination);
        match self.budget {
            None => Ok((job.size / flow.value, flow.arc_flow, None)),
            Some(k) => {
                let set = decompose(self.net, &flow.arc_flow, job.source, job.destination, k)?;
                Ok((
                    job.size / set.achieved,
                    set.arc_rates(self.net.arc_count()),
                    Some(set.paths),
                ))
            }
        }
    }

    fn emit(&mut self, slot: Slot) -> Vec<Reservation> {
        let net = self.net;
        let paths = slot.paths.unwrap_or_else(|| {
            slot.assignment
                .commodities
                .iter()
                .zip(&slot.assignment.rates)
                .map(|(c, r)| decompose_exact(net, r, c.source, c.sink).paths)
                .collect()
        });
        slot.jobs
            .into_iter()
            .zip(paths)
            .enumerate()
            .map(|(i, (job, p))| {
                Reservation::from_assignment(job, slot.start, Some(slot.id), &slot.assignment, i, p)
            })
            .collect()
    }
}

impl Scheduler for BatchLim<'_> {
    fn kind(&self) -> SchedulerKind {
        match self.budget {
            Some(k) => SchedulerKind::BatchLimDisp(k),
            None => SchedulerKind::BatchLim,
        }
    }

    fn submit(&mut self, job: &Job) -> Result<Admission, ScheduleError> {
        self.reach.check(self.net, job)?;
        let now = job.arrival;
        let (min_time, solo_rates, solo_paths) = self.solo(job)?;
        for i in 0..self.slots.len() {
            if self.slots[i].start < now {
                continue;
            }
            let len = self.slots[i].end - self.slots[i].start;
            if min_time > len * (1.0 + 1e-9) {
                continue;
            }
            let mut jobs = self.slots[i].jobs.clone();
            jobs.push(job.clone());
            if let Some((assignment, paths)) = self.fit(&jobs, len)? {
                let slot = &mut self.slots[i];
                slot.jobs = jobs;
                slot.assignment = assignment;
                slot.paths = paths;
                *self.sizes.get_mut(slot.id as usize).expect("slot recorded") += 1;
                return Ok(Admission::Promised {
                    start: slot.start,
                    completion: slot.end,
                    slot: slot.id,
                });
            }
        }

        let start = self.last_end.max(now);
        let len = min_time.max(start - now);
        let end = start + len;
        let previous_len = self
            .history
            .last()
            .filter(|h| h.end == start)
            .map(|h| h.len());
        let id = self.next_slot;
        self.next_slot += 1;
        self.history.push(SlotCreation {
            slot: id,
            arrival: now,
            start,
            end,
            min_time,
            previous_len,
        });
        self.sizes.push(1);
        self.last_end = end;
        let factor = min_time / len;
        let assignment = FlowAssignment {
            duration: len,
            commodities: vec![job.commodity()],
            rates: vec![solo_rates.iter().map(|x| x * factor).collect()],
        };
        let paths = solo_paths.map(|p| {
            vec![p
                .into_iter()
                .map(|mut f| {
                    f.rate *= factor;
                    f
                })
                .collect()]
        });
        self.slots.push_back(Slot {
            id,
            start,
            end,
            jobs: vec![job.clone()],
            assignment,
            paths,
        });
        Ok(Admission::Promised {
            start,
            completion: end,
            slot: id,
        })
    }

    fn next_event(&self) -> Option<(f64, EventKind)> {
        self.slots.front().map(|s| (s.start, EventKind::SlotStart))
    }

    fn advance(&mut self, now: f64) -> Result<Vec<Reservation>, ScheduleError> {
        let mut out = Vec::new();
        while self.slots.front().is_some_and(|s| s.start <= now) {
            let slot = self.slots.pop_front().expect("front exists");
            out.extend(self.emit(slot));
        }
        Ok(out)
    }

    fn batch_sizes(&self) -> Vec<usize> {
        self.sizes.clone()
    }
}
