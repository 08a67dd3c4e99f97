// Copyright The fslnet Authors.
// SPDX-License-Identifier: Apache-2.0

use crate::engine::Cycle;
use crate::topology::{CoreId, DirectedLink};

/// Per-core cycle accounting. Categories are disjoint.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CoreMetrics {
    pub compute_cycles: Cycle,
    /// Cycles spent writing words of the core's own messages.
    pub send_cycles: Cycle,
    /// Fixed interrupt handler cycles, one charge per received frame.
    pub handler_cycles: Cycle,
    /// Cycles spent writing words of frames relayed for other cores.
    pub relay_cycles: Cycle,
    /// Idle while a send or relay waited for link space.
    pub blocked_send_cycles: Cycle,
    /// Idle while a receive waited for a message.
    pub blocked_recv_cycles: Cycle,
    pub messages_sent: u64,
    pub messages_delivered: u64,
    pub frames_relayed: u64,
    pub halted_at: Option<Cycle>,
}

impl CoreMetrics {
    pub fn comm_cycles(&self) -> Cycle {
        self.send_cycles + self.handler_cycles + self.relay_cycles
    }

    pub fn accounted_cycles(&self) -> Cycle {
        self.compute_cycles
            + self.comm_cycles()
            + self.blocked_send_cycles
            + self.blocked_recv_cycles
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkMetrics {
    pub link: DirectedLink,
    pub words: u64,
    pub frames: u64,
    pub max_occupancy: usize,
}

/// Lifetime of one delivered message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeliveryRecord {
    pub src: CoreId,
    pub dst: CoreId,
    /// Cycle at which the source started writing the first word.
    pub send_started: Cycle,
    /// Cycle at which the last word entered the first link.
    pub send_completed: Cycle,
    /// Cycle at which the destination handler finished and buffered it.
    pub delivered_at: Cycle,
    pub hops: u32,
    pub wire_words: u32,
}

impl DeliveryRecord {
    pub fn latency(&self) -> Cycle {
        self.delivered_at - self.send_started
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub total_cycles: Cycle,
    pub clock_hz: u64,
    pub cores: Vec<CoreMetrics>,
    pub links: Vec<LinkMetrics>,
    pub messages_sent: u64,
    pub messages_delivered: u64,
    /// Payload words of messages originated by workloads (headers excluded).
    pub payload_words_sent: u64,
    /// `hop_histogram[h]` counts delivered messages that took `h` hops.
    pub hop_histogram: Vec<u64>,
    pub deliveries: Vec<DeliveryRecord>,
    pub events_processed: u64,
    /// Per-link word sequence was never observed out of order.
    pub fifo_order_preserved: bool,
    pub max_fifo_occupancy: usize,
}

impl Metrics {
    pub fn total_seconds(&self) -> f64 {
        self.total_cycles as f64 / self.clock_hz as f64
    }

    pub fn compute_cycles(&self) -> Cycle {
        self.cores.iter().map(|c| c.compute_cycles).sum()
    }

    pub fn comm_cycles(&self) -> Cycle {
        self.cores.iter().map(CoreMetrics::comm_cycles).sum()
    }

    pub fn max_hop(&self) -> usize {
        self.hop_histogram
            .iter()
            .rposition(|&count| count > 0)
            .unwrap_or(0)
    }

    pub fn link_words(&self) -> u64 {
        self.links.iter().map(|l| l.words).sum()
    }
}
