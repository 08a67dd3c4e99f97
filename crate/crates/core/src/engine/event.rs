// Copyright The fslnet Authors.
// SPDX-License-Identifier: Apache-2.0

//! Time-ordered event queue with a global sequence tie-break.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;

pub type Cycle = u64;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum EventKind {
    /// A word written by `link`'s source core lands in the link FIFO.
    WordArrival { link: usize },
    /// FIFO space opened on `link`; its source core may be waiting for it.
    LinkFree { link: usize },
    /// A compute segment on `core` ends. Stale if `generation` no longer
    /// matches, which happens when a handler preempted the segment.
    CoreResume { core: usize, generation: u64 },
    /// The receive handler on `core` finished with its current frame.
    HandlerComplete { core: usize },
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::WordArrival { .. } => "word-arrival",
            EventKind::LinkFree { .. } => "link-free",
            EventKind::CoreResume { .. } => "core-resume",
            EventKind::HandlerComplete { .. } => "handler-complete",
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Event {
    pub time: Cycle,
    pub seq: u64,
    pub kind: EventKind,
}

// BinaryHeap is a max-heap; reverse so the earliest (time, seq) pops first.
impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        (other.time, other.seq).cmp(&(self.time, self.seq))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<Event>,
    next_seq: u64,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn schedule(&mut self, time: Cycle, kind: EventKind) -> u64 {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Event { time, seq, kind });
        seq
    }

    pub fn pop(&mut self) -> Option<Event> {
        self.heap.pop()
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}

/// One line of the optional event trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRecord {
    pub time: Cycle,
    pub seq: u64,
    pub kind: &'static str,
    pub subject: String,
    pub detail: String,
}

impl fmt::Display for TraceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} {} {}",
            self.time, self.seq, self.kind, self.subject, self.detail
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pops_in_time_then_sequence_order() {
        let mut q = EventQueue::new();
        q.schedule(5, EventKind::HandlerComplete { core: 0 });
        q.schedule(3, EventKind::LinkFree { link: 1 });
        q.schedule(5, EventKind::HandlerComplete { core: 1 });
        q.schedule(3, EventKind::LinkFree { link: 0 });
        let order: Vec<(Cycle, u64)> = std::iter::from_fn(|| q.pop())
            .map(|e| (e.time, e.seq))
            .collect();
        assert_eq!(order, vec![(3, 1), (3, 3), (5, 0), (5, 2)]);
    }

    #[test]
    fn sequence_numbers_are_unique() {
        let mut q = EventQueue::new();
        let a = q.schedule(0, EventKind::LinkFree { link: 0 });
        let b = q.schedule(0, EventKind::LinkFree { link: 0 });
        assert_ne!(a, b);
        assert_eq!(q.len(), 2);
    }
}
