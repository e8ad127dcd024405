use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use crate::schedulers::EventKind;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Event {
    /// Index into the trace.
    Arrival(usize),
    /// A scheduler-internal event.
    Wakeup(EventKind),
    Completion(u64),
}

impl Event {
    pub fn kind(&self) -> EventKind {
        match self {
            Event::Arrival(_) => EventKind::Arrival,
            Event::Wakeup(k) => *k,
            Event::Completion(_) => EventKind::Completion,
        }
    }
}

#[derive(Debug)]
struct Entry {
    time: f64,
    priority: u8,
    seq: u64,
    event: Event,
}

impl Entry {
    fn key(&self) -> (f64, u8, u64) {
        (self.time, self.priority, self.seq)
    }
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (self.key(), other.key());
        a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2))
    }
}

/// Events ordered by time, then [`EventKind::priority`], then insertion.
#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<Reverse<Entry>>,
    seq: u64,
    last: Option<f64>,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, time: f64, event: Event) {
        self.heap.push(Reverse(Entry {
            time,
            priority: event.kind().priority(),
            seq: self.seq,
            event,
        }));
        self.seq += 1;
    }

    /// Next event. Panics if it would run earlier than one already popped,
    /// which means an event was scheduled in the past.
    pub fn pop(&mut self) -> Option<(f64, Event)> {
        let Reverse(e) = self.heap.pop()?;
        if let Some(last) = self.last {
            assert!(e.time >= last, "event at {} after time {}", e.time, last);
        }
        self.last = Some(e.time);
        Some((e.time, e.event))
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}
