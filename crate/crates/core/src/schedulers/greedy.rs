use std::collections::{HashMap, VecDeque};

use super::{
    Admission, EventKind, Job, PlanSegment, Reachability, Reservation, ScheduleError, Scheduler,
    SchedulerKind,
};
use crate::flowsolve::{max_flow_with, RATE_FLOOR};
use crate::netgraph::{shortest_path_arcs, Network, NodeId};
use crate::pathdisp::decompose_exact;

/// A piece of the reservation timeline: channel bandwidth already reserved
/// from `start` until the next slot's start.
#[derive(Debug, Clone, PartialEq)]
pub struct GreedySlot {
    pub start: f64,
    pub reserved: Vec<f64>,
}

/// Reserves each job immediately, taking the max flow of the residual
/// network slot by slot until the job's bits are covered.
pub struct Greedy<'a> {
    net: &'a Network,
    shortest_only: bool,
    reach: Reachability,
    masks: HashMap<(NodeId, NodeId), Vec<bool>>,
    slots: VecDeque<GreedySlot>,
}

impl<'a> Greedy<'a> {
    pub fn new(net: &'a Network) -> Self {
        Self::build(net, false)
    }

    /// Variant restricted to arcs on hop-shortest paths of each pair.
    pub fn shortest(net: &'a Network) -> Self {
        Self::build(net, true)
    }

    fn build(net: &'a Network, shortest_only: bool) -> Self {
        Greedy {
            net,
            shortest_only,
            reach: Reachability::new(net),
            masks: HashMap::new(),
            slots: VecDeque::from([GreedySlot {
                start: f64::NEG_INFINITY,
                reserved: vec![0.0; net.channel_count()],
            }]),
        }
    }

    /// Current timeline; the last slot extends to infinity.
    pub fn timeline(&self) -> impl Iterator<Item = &GreedySlot> {
        self.slots.iter()
    }

    fn mask(&mut self, s: NodeId, d: NodeId) -> Option<Vec<bool>> {
        if !self.shortest_only {
            return None;
        }
        let net = self.net;
        Some(
            self.masks
                .entry((s, d))
                .or_insert_with(|| {
                    let mut m = vec![false; net.arc_count()];
                    for a in shortest_path_arcs(net, s, d).expect("pair checked reachable") {
                        m[a.0] = true;
                    }
                    m
                })
                .clone(),
        )
    }

    fn prune(&mut self, now: f64) {
        while self.slots.len() > 1 && self.slots[1].start <= now {
            self.slots.pop_front();
        }
    }
}

impl Scheduler for Greedy<'_> {
    fn kind(&self) -> SchedulerKind {
        if self.shortest_only {
            SchedulerKind::GreedyShortest
        } else {
            SchedulerKind::Greedy
        }
    }

    fn submit(&mut self, job: &Job) -> Result<Admission, ScheduleError> {
        self.reach.check(self.net, job)?;
        let now = job.arrival;
        self.prune(now);
        let mask = self.mask(job.source, job.destination);
        let net = self.net;
        let channels = net.channels();
        let floor = RATE_FLOOR.max(net.max_capacity() * 1e-12);

        let mut remaining = job.size;
        let mut plan = Vec::new();
        let mut num_paths = 0;
        let mut paths;
        let mut i = 0;
        loop {
            let start = self.slots[i].start.max(now);
            let end = self.slots.get(i + 1).map_or(f64::INFINITY, |s| s.start);
            if end <= start {
                i += 1;
                continue;
            }
            let available: Vec<f64> = channels
                .iter()
                .zip(&self.slots[i].reserved)
                .map(|(c, r)| (c - r).max(0.0))
                .collect();
            if available.iter().all(|a| *a <= floor) {
                i += 1;
                continue;
            }
            let flow = max_flow_with(
                net,
                &available,
                job.source,
                job.destination,
                mask.as_deref(),
            );
            if flow.value <= floor {
                i += 1;
                continue;
            }
            let needed = remaining / flow.value;
            let finishes = start + needed <= end * (1.0 + 1e-12) || end.is_infinite();
            let seg_end = if finishes {
                (start + needed).min(end)
            } else {
                end
            };
            let split = finishes && end.is_finite() && end - seg_end > 1e-9 * end.abs().max(1.0);
            let split = split || (finishes && end.is_infinite());
            if split {
                let copy = self.slots[i].reserved.clone();
                self.slots.insert(
                    i + 1,
                    GreedySlot {
                        start: seg_end,
                        reserved: copy,
                    },
                );
            }
            let usage = net.channel_usage(&flow.arc_flow);
            for (r, u) in self.slots[i].reserved.iter_mut().zip(&usage) {
                *r += u;
            }
            let set = decompose_exact(net, &flow.arc_flow, job.source, job.destination);
            num_paths = num_paths.max(set.paths.len());
            paths = set.paths;
            plan.push(PlanSegment::new(start, seg_end, &flow.arc_flow));
            if finishes {
                break;
            }
            remaining -= flow.value * (end - start);
            i += 1;
        }
        let start = plan.first().map_or(now, |s| s.start);
        let completion = plan.last().map_or(now, |s| s.end);
        Ok(Admission::Scheduled(Reservation {
            job: job.clone(),
            start,
            completion,
            group: None,
            num_paths,
            plan,
            paths,
        }))
    }

    fn next_event(&self) -> Option<(f64, EventKind)> {
        None
    }

    fn advance(&mut self, _now: f64) -> Result<Vec<Reservation>, ScheduleError> {
        Ok(Vec::new())
    }
}
