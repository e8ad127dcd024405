use super::{
    Admission, EventKind, Job, Reachability, Reservation, ScheduleError, Scheduler, SchedulerKind,
};
use crate::flowsolve::{max_concurrent_time, FlowAssignment};
use crate::netgraph::Network;
use crate::pathdisp::{decompose_exact, limit_dispersion, FlowPath};

/// Batches every job that arrives while a batch runs and schedules the
/// whole batch by maximum concurrent flow once the running batch ends.
pub struct BatchAll<'a> {
    net: &'a Network,
    budget: Option<usize>,
    reach: Reachability,
    /// End of the running batch.
    running_until: Option<f64>,
    pending: Vec<Job>,
    next_batch: u64,
    sizes: Vec<usize>,
}

impl<'a> BatchAll<'a> {
    pub fn new(net: &'a Network) -> Self {
        BatchAll {
            net,
            budget: None,
            reach: Reachability::new(net),
            running_until: None,
            pending: Vec::new(),
            next_batch: 0,
            sizes: Vec::new(),
        }
    }

    /// Each job of a batch uses at most `k` paths; batches stretch to fit.
    pub fn with_dispersion(net: &'a Network, k: usize) -> Result<Self, ScheduleError> {
        if k == 0 {
            return Err(ScheduleError::ZeroPathBudget);
        }
        Ok(BatchAll {
            budget: Some(k),
            ..Self::new(net)
        })
    }

    /// Schedules `jobs` as one batch starting at `start`.
    fn run_batch(&mut self, jobs: Vec<Job>, start: f64) -> Result<Vec<Reservation>, ScheduleError> {
        let commodities: Vec<_> = jobs.iter().map(Job::commodity).collect();
        let flow = max_concurrent_time(self.net, &commodities)?;
        let (assignment, path_sets): (FlowAssignment, Vec<Vec<FlowPath>>) = match self.budget {
            Some(k) => {
                let d = limit_dispersion(self.net, &flow.assignment, k)?;
                let sets = d.path_sets.into_iter().map(|p| p.paths).collect();
                (d.assignment, sets)
            }
            None => {
                let sets = commodities
                    .iter()
                    .zip(&flow.assignment.rates)
                    .map(|(c, r)| decompose_exact(self.net, r, c.source, c.sink).paths)
                    .collect();
                (flow.assignment, sets)
            }
        };
        let id = self.next_batch;
        self.next_batch += 1;
        self.sizes.push(jobs.len());
        self.running_until = Some(start + assignment.duration);
        Ok(jobs
            .into_iter()
            .zip(path_sets)
            .enumerate()
            .map(|(i, (job, paths))| {
                Reservation::from_assignment(job, start, Some(id), &assignment, i, paths)
            })
            .collect())
    }
}

impl Scheduler for BatchAll<'_> {
    fn kind(&self) -> SchedulerKind {
        match self.budget {
            Some(k) => SchedulerKind::BatchAllDisp(k),
            None => SchedulerKind::BatchAll,
        }
    }

    fn submit(&mut self, job: &Job) -> Result<Admission, ScheduleError> {
        self.reach.check(self.net, job)?;
        let now = job.arrival;
        match self.running_until {
            Some(end) if now < end => {
                self.pending.push(job.clone());
                Ok(Admission::Deferred { start: end })
            }
            Some(end) if !self.pending.is_empty() => Err(ScheduleError::OutOfOrder {
                job: job.id,
                arrival: now,
                pending: end,
            }),
            _ => {
                let mut r = self.run_batch(vec![job.clone()], now)?;
                Ok(Admission::Scheduled(r.pop().expect("one job")))
            }
        }
    }

    fn next_event(&self) -> Option<(f64, EventKind)> {
        match self.running_until {
            Some(end) if !self.pending.is_empty() => Some((end, EventKind::BatchClose)),
            _ => None,
        }
    }

    fn advance(&mut self, now: f64) -> Result<Vec<Reservation>, ScheduleError> {
        match self.running_until {
            Some(end) if end <= now && !self.pending.is_empty() => {
                let jobs = std::mem::take(&mut self.pending);
                self.run_batch(jobs, end)
            }
            _ => Ok(Vec::new()),
        }
    }

    fn batch_sizes(&self) -> Vec<usize> {
        self.sizes.clone()
    }
}
