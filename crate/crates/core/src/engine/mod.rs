// Copyright The fslnet Authors.
// SPDX-License-Identifier: Apache-2.0

//! Deterministic discrete-event engine.
//!
//! Cores are connected by bounded word FIFOs. Each core owns a single CPU
//! that is always doing exactly one of:
//!
//! 1. writing one word of a relayed frame (`cycles_per_word`), when the
//!    outbound link has room,
//! 2. running the receive handler for a complete inbound frame
//!    (`interrupt_overhead_cycles`, not preemptible),
//! 3. writing one word of its own outbound message (`cycles_per_word`),
//! 4. computing (preemptible by 2),
//! 5. nothing.
//!
//! Candidates are chosen in that priority order whenever the CPU frees up.
//! Forwarding first means a relay core passes traffic through as it arrives
//! instead of buffering it behind its own backlog of interrupts.
//! Relay is store-and-forward: a frame is only handled once its last word
//! has arrived, and the handler queues it for the next hop in a software
//! buffer so that it never blocks. A word occupies the link FIFO from the end
//! of its write slot until the receiver pulls it into the per-link assembly
//! buffer, which holds at most one complete, unhandled frame. The last word
//! of a frame travels with the FSL control bit set, which is how the
//! receiver finds frame boundaries.

mod config;
mod event;
mod program;

use std::collections::VecDeque;

use thiserror::Error;

pub use config::{ConfigError, Framing, SimConfig, MAX_LINK_BYTES_PER_SEC, WORD_BYTES};
pub use event::{Cycle, Event, EventKind, EventQueue, TraceRecord};
pub use program::{Action, CoreProgram, ProgramError, Script};

use crate::codec::{frame_message, parse_message, Message, Word};
use crate::report::{CoreMetrics, DeliveryRecord, LinkMetrics, Metrics};
use crate::routing::{hop_count, RoutingError};
use crate::topology::{CoreId, Topology, Violation};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("topology failed validation: {0:?}")]
    InvalidTopology(Vec<Violation>),
    #[error("expected {expected} core programs, got {got}")]
    ProgramCount { expected: usize, got: usize },
    #[error(transparent)]
    Routing(#[from] RoutingError),
    #[error(transparent)]
    Program(#[from] ProgramError),
    #[error("core {core} cannot send: {detail}")]
    BadSend { core: CoreId, detail: String },
    #[error("malformed frame on link {link} at cycle {time}: {detail}")]
    MalformedFrame {
        link: String,
        time: Cycle,
        detail: String,
    },
    #[error("deadlock at cycle {time}: {}", blocked.join("; "))]
    Deadlock { time: Cycle, blocked: Vec<String> },
    #[error("event queue exceeded {cap} pending events at cycle {time}")]
    QueueOverflow { time: Cycle, cap: usize },
    #[error("fifo on link {link} exceeded {depth} words at cycle {time}")]
    FifoOverflow {
        link: String,
        depth: usize,
        time: Cycle,
    },
    #[error("words left link {link} out of order at cycle {time}")]
    FifoOrder { link: String, time: Cycle },
}

/// Store-and-forward latency of a single frame through an idle network.
///
/// Every hop costs the full frame transfer plus one handler entry at the
/// receiving core; the last handler is the delivery.
pub fn unloaded_latency(
    cfg: &SimConfig,
    t: &Topology,
    src: CoreId,
    dest: CoreId,
    frame_words: usize,
) -> Result<Cycle, RoutingError> {
    let hops = hop_count(t, src, dest)? as Cycle;
    Ok(hops * frame_words as Cycle * cfg.cycles_per_word + hops * cfg.interrupt_overhead_cycles)
}

/// Run `programs` (one per core) to completion on `topo`.
pub fn run<P: CoreProgram>(
    cfg: &SimConfig,
    topo: &Topology,
    programs: Vec<P>,
) -> Result<(Metrics, Vec<P>), SimError> {
    let mut sim = Simulation::new(cfg, topo, programs)?;
    let metrics = sim.run()?;
    Ok((metrics, sim.into_programs()))
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
enum Writer {
    Relay,
    Workload,
}

#[derive(Copy, Clone, Debug)]
struct FslWord {
    data: Word,
    end_of_frame: bool,
    seq: u64,
}

#[derive(Copy, Clone, Debug)]
struct FrameMeta {
    send_started: Cycle,
    send_completed: Cycle,
    hops: u32,
}

#[derive(Debug)]
struct OutFrame {
    words: Vec<Word>,
    link: usize,
    next: usize,
    meta: FrameMeta,
}

#[derive(Debug)]
struct LinkState {
    from: usize,
    to: usize,
    fifo: VecDeque<FslWord>,
    owner: Option<Writer>,
    sender_waiting: bool,
    next_write_seq: u64,
    next_read_seq: u64,
    assembly: Vec<Word>,
    complete: Option<(Vec<Word>, FrameMeta)>,
    // metadata of frames whose first word has been written but which have
    // not yet been assembled at the receiver, in link order
    in_flight: VecDeque<FrameMeta>,
    words: u64,
    frames: u64,
    max_occupancy: usize,
}

impl LinkState {
    fn name(&self) -> String {
        format!("{}->{}", self.from, self.to)
    }
}

#[derive(Debug)]
enum Cpu {
    Idle,
    Compute {
        ends_at: Cycle,
    },
    Write {
        link: usize,
        word: FslWord,
        by: Writer,
    },
    Handler {
        link: usize,
        words: Vec<Word>,
        meta: FrameMeta,
    },
}

#[derive(Debug)]
enum Work {
    Ready(Option<Message>),
    Compute { remaining: Cycle },
    Sending(OutFrame),
    Receiving(Option<CoreId>),
    Halted,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
enum IdleReason {
    Send,
    Recv,
    Other,
}

#[derive(Debug)]
struct CoreState {
    cpu: Cpu,
    generation: u64,
    pending: VecDeque<usize>,
    relay_queue: VecDeque<OutFrame>,
    work: Work,
    delivered: VecDeque<Message>,
    idle_since: Option<(Cycle, IdleReason)>,
    stats: CoreMetrics,
}

pub struct Simulation<'t, P> {
    cfg: SimConfig,
    topo: &'t Topology,
    programs: Vec<P>,
    cores: Vec<CoreState>,
    links: Vec<LinkState>,
    queue: EventQueue,
    now: Cycle,
    trace: Option<Vec<TraceRecord>>,
    deliveries: Vec<DeliveryRecord>,
    hop_histogram: Vec<u64>,
    payload_words_sent: u64,
    events_processed: u64,
}

impl<'t, P: CoreProgram> Simulation<'t, P> {
    pub fn new(cfg: &SimConfig, topo: &'t Topology, programs: Vec<P>) -> Result<Self, SimError> {
        cfg.validate()?;
        let report = topo.validate();
        if !report.is_pass() {
            return Err(SimError::InvalidTopology(report.violations));
        }
        if programs.len() != topo.n() {
            return Err(SimError::ProgramCount {
                expected: topo.n(),
                got: programs.len(),
            });
        }
        let links = topo
            .links()
            .iter()
            .map(|l| LinkState {
                from: l.from.index(),
                to: l.to.index(),
                fifo: VecDeque::with_capacity(cfg.fifo_depth_words),
                owner: None,
                sender_waiting: false,
                next_write_seq: 0,
                next_read_seq: 0,
                assembly: Vec::new(),
                complete: None,
                in_flight: VecDeque::new(),
                words: 0,
                frames: 0,
                max_occupancy: 0,
            })
            .collect();
        let cores = (0..topo.n())
            .map(|_| CoreState {
                cpu: Cpu::Idle,
                generation: 0,
                pending: VecDeque::new(),
                relay_queue: VecDeque::new(),
                work: Work::Ready(None),
                delivered: VecDeque::new(),
                idle_since: None,
                stats: CoreMetrics::default(),
            })
            .collect();
        Ok(Simulation {
            cfg: cfg.clone(),
            topo,
            programs,
            cores,
            links,
            queue: EventQueue::new(),
            now: 0,
            trace: None,
            deliveries: Vec::new(),
            hop_histogram: vec![0; topo.n().max(1)],
            payload_words_sent: 0,
            events_processed: 0,
        })
    }

    /// Record every processed event.
    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    pub fn trace(&self) -> &[TraceRecord] {
        self.trace.as_deref().unwrap_or(&[])
    }

    pub fn into_programs(self) -> Vec<P> {
        self.programs
    }

    pub fn run(&mut self) -> Result<Metrics, SimError> {
        for core in 0..self.cores.len() {
            self.dispatch(core)?;
        }
        while let Some(ev) = self.queue.pop() {
            debug_assert!(ev.time >= self.now, "clock went backwards");
            self.now = ev.time;
            self.events_processed += 1;
            self.process(ev)?;
            if self.queue.len() > self.cfg.max_pending_events {
                return Err(SimError::QueueOverflow {
                    time: self.now,
                    cap: self.cfg.max_pending_events,
                });
            }
        }
        self.finish()
    }

    fn log(&mut self, ev: &Event, subject: String, detail: String) {
        if let Some(trace) = self.trace.as_mut() {
            trace.push(TraceRecord {
                time: ev.time,
                seq: ev.seq,
                kind: ev.kind.name(),
                subject,
                detail,
            });
        }
    }

    fn process(&mut self, ev: Event) -> Result<(), SimError> {
        match ev.kind {
            EventKind::WordArrival { link } => self.on_word_arrival(&ev, link),
            EventKind::LinkFree { link } => {
                let l = &mut self.links[link];
                let waiting = std::mem::take(&mut l.sender_waiting);
                let (name, occupancy, from) = (l.name(), l.fifo.len(), l.from);
                self.log(&ev, format!("link:{name}"), format!("fifo={occupancy}"));
                if waiting {
                    self.dispatch(from)?;
                }
                Ok(())
            }
            EventKind::CoreResume { core, generation } => {
                let c = &mut self.cores[core];
                let live = generation == c.generation && matches!(c.cpu, Cpu::Compute { .. });
                if live {
                    c.cpu = Cpu::Idle;
                    c.work = Work::Ready(None);
                }
                let detail = if live { "compute-done" } else { "stale" };
                self.log(&ev, format!("core:{core}"), detail.to_string());
                if live {
                    self.dispatch(core)?;
                }
                Ok(())
            }
            EventKind::HandlerComplete { core } => self.on_handler_complete(&ev, core),
        }
    }

    fn on_word_arrival(&mut self, ev: &Event, link: usize) -> Result<(), SimError> {
        let depth = self.cfg.fifo_depth_words;
        let writer = self.links[link].from;
        let Cpu::Write { link: wl, word, by } =
            std::mem::replace(&mut self.cores[writer].cpu, Cpu::Idle)
        else {
            unreachable!("word arrival without a pending write");
        };
        debug_assert_eq!(wl, link);
        let l = &mut self.links[link];
        l.fifo.push_back(word);
        l.words += 1;
        l.max_occupancy = l.max_occupancy.max(l.fifo.len());
        if l.fifo.len() > depth {
            return Err(SimError::FifoOverflow {
                link: l.name(),
                depth,
                time: self.now,
            });
        }
        if word.end_of_frame {
            l.owner = None;
            l.frames += 1;
        }
        let (name, occupancy, receiver) = (l.name(), l.fifo.len(), l.to);
        self.log(
            ev,
            format!("link:{name}"),
            format!(
                "word={} eof={} fifo={occupancy}",
                word.data, word.end_of_frame as u8
            ),
        );

        let c = &mut self.cores[writer];
        match by {
            Writer::Relay => {
                c.stats.relay_cycles += self.cfg.cycles_per_word;
                if word.end_of_frame {
                    c.relay_queue.pop_front();
                    c.stats.frames_relayed += 1;
                }
            }
            Writer::Workload => {
                c.stats.send_cycles += self.cfg.cycles_per_word;
                if word.end_of_frame {
                    let Work::Sending(frame) = std::mem::replace(&mut c.work, Work::Ready(None))
                    else {
                        unreachable!("workload word without a send in progress");
                    };
                    c.stats.messages_sent += 1;
                    self.payload_words_sent +=
                        (frame.words.len() - crate::codec::HEADER_WORDS) as u64;
                    self.links[link]
                        .in_flight
                        .iter_mut()
                        .last()
                        .expect("frame metadata registered at first word")
                        .send_completed = self.now;
                }
            }
        }

        self.drain(link)?;
        self.dispatch(receiver)?;
        self.dispatch(writer)
    }

    // Move words from the FIFO into the receive assembly until a frame is
    // complete. Frees FIFO space and wakes a blocked sender.
    fn drain(&mut self, link: usize) -> Result<(), SimError> {
        let l = &mut self.links[link];
        let mut freed = false;
        while l.complete.is_none() {
            let Some(w) = l.fifo.pop_front() else { break };
            freed = true;
            if w.seq != l.next_read_seq {
                return Err(SimError::FifoOrder {
                    link: l.name(),
                    time: self.now,
                });
            }
            l.next_read_seq += 1;
            l.assembly.push(w.data);
            if w.end_of_frame {
                let mut meta = l.in_flight.pop_front().expect("metadata for every frame");
                meta.hops += 1;
                let words = std::mem::take(&mut l.assembly);
                l.complete = Some((words, meta));
                self.cores[l.to].pending.push_back(link);
            }
        }
        if freed && l.sender_waiting {
            self.queue.schedule(self.now, EventKind::LinkFree { link });
        }
        Ok(())
    }

    fn on_handler_complete(&mut self, ev: &Event, core: usize) -> Result<(), SimError> {
        let Cpu::Handler { link, words, meta } =
            std::mem::replace(&mut self.cores[core].cpu, Cpu::Idle)
        else {
            unreachable!("handler completion without a running handler");
        };
        self.cores[core].stats.handler_cycles += self.cfg.interrupt_overhead_cycles;
        let malformed = |detail: String, links: &[LinkState]| SimError::MalformedFrame {
            link: links[link].name(),
            time: self.now,
            detail,
        };
        let msg = parse_message(&words).map_err(|e| malformed(e.to_string(), &self.links))?;
        if msg.dst.index() >= self.topo.n() || msg.src.index() >= self.topo.n() {
            return Err(malformed(
                format!("header names core outside 0..{}", self.topo.n()),
                &self.links,
            ));
        }
        let me = CoreId::from(core);
        if msg.dst == me {
            self.log(
                ev,
                format!("core:{core}"),
                format!("deliver {}->{} hops={}", msg.src, msg.dst, meta.hops),
            );
            let hops = meta.hops as usize;
            if self.hop_histogram.len() <= hops {
                self.hop_histogram.resize(hops + 1, 0);
            }
            self.hop_histogram[hops] += 1;
            self.deliveries.push(DeliveryRecord {
                src: msg.src,
                dst: msg.dst,
                send_started: meta.send_started,
                send_completed: meta.send_completed,
                delivered_at: self.now,
                hops: meta.hops,
                wire_words: words.len() as u32,
            });
            let c = &mut self.cores[core];
            c.stats.messages_delivered += 1;
            c.delivered.push_back(msg);
        } else {
            let next = self.topo.next_hop(me, msg.dst)?;
            let out = self
                .topo
                .link_id(me, next)
                .expect("next_hop only returns linked neighbours");
            self.log(
                ev,
                format!("core:{core}"),
                format!("forward {}->{} via {}", msg.src, msg.dst, next),
            );
            self.cores[core].relay_queue.push_back(OutFrame {
                words,
                link: out,
                next: 0,
                meta,
            });
        }
        self.dispatch(core)
    }

    fn can_write(&self, link: usize, by: Writer) -> bool {
        let l = &self.links[link];
        l.owner.is_none_or(|o| o == by) && l.fifo.len() < self.cfg.fifo_depth_words
    }

    fn start_write(&mut self, core: usize, by: Writer) {
        let now = self.now;
        let c = &mut self.cores[core];
        let frame = match by {
            Writer::Relay => c.relay_queue.front_mut().expect("relay frame queued"),
            Writer::Workload => match &mut c.work {
                Work::Sending(f) => f,
                _ => unreachable!("workload write without a send"),
            },
        };
        let link = frame.link;
        let first = frame.next == 0;
        let data = frame.words[frame.next];
        frame.next += 1;
        let end_of_frame = frame.next == frame.words.len();
        let meta = frame.meta;
        let l = &mut self.links[link];
        if first {
            let mut meta = meta;
            if by == Writer::Workload {
                meta.send_started = now;
            }
            l.in_flight.push_back(meta);
            l.owner = Some(by);
        }
        let word = FslWord {
            data,
            end_of_frame,
            seq: l.next_write_seq,
        };
        l.next_write_seq += 1;
        c.cpu = Cpu::Write { link, word, by };
        self.queue.schedule(
            now + self.cfg.cycles_per_word,
            EventKind::WordArrival { link },
        );
    }

    fn mark_busy(&mut self, core: usize) {
        let now = self.now;
        let c = &mut self.cores[core];
        if let Some((since, reason)) = c.idle_since.take() {
            let idle = now - since;
            match reason {
                IdleReason::Send => c.stats.blocked_send_cycles += idle,
                IdleReason::Recv => c.stats.blocked_recv_cycles += idle,
                IdleReason::Other => {}
            }
        }
    }

    fn mark_idle(&mut self, core: usize, reason: IdleReason) {
        let now = self.now;
        let c = &mut self.cores[core];
        if c.idle_since.is_none() {
            c.idle_since = Some((now, reason));
        }
    }

    /// Give the CPU of `core` its next activity, if it is free to take one.
    fn dispatch(&mut self, core: usize) -> Result<(), SimError> {
        let now = self.now;
        {
            let c = &mut self.cores[core];
            match c.cpu {
                Cpu::Idle => {}
                Cpu::Compute { ends_at } if !c.pending.is_empty() => {
                    // interrupt: bank the unfinished compute
                    let remaining = ends_at - now;
                    c.stats.compute_cycles -= remaining;
                    c.work = Work::Compute { remaining };
                    c.generation += 1;
                    c.cpu = Cpu::Idle;
                }
                _ => return Ok(()),
            }
        }

        loop {
            if let Some(link) = self.cores[core].relay_queue.front().map(|f| f.link) {
                if self.can_write(link, Writer::Relay) {
                    self.mark_busy(core);
                    self.start_write(core, Writer::Relay);
                    return Ok(());
                }
                self.links[link].sender_waiting = true;
            }

            if let Some(link) = self.cores[core].pending.pop_front() {
                let (words, meta) = self.links[link].complete.take().expect("pending frame");
                self.drain(link)?;
                self.mark_busy(core);
                self.cores[core].cpu = Cpu::Handler { link, words, meta };
                self.queue.schedule(
                    now + self.cfg.interrupt_overhead_cycles,
                    EventKind::HandlerComplete { core },
                );
                return Ok(());
            }

            let c = &mut self.cores[core];
            match &mut c.work {
                Work::Ready(received) => {
                    let received = received.take();
                    let action = self.programs[core].step(CoreId::from(core), received)?;
                    let next = self.begin(core, action)?;
                    self.cores[core].work = next;
                }
                Work::Compute { remaining } => {
                    let remaining = *remaining;
                    if remaining == 0 {
                        c.work = Work::Ready(None);
                        continue;
                    }
                    c.generation += 1;
                    c.stats.compute_cycles += remaining;
                    c.cpu = Cpu::Compute {
                        ends_at: now + remaining,
                    };
                    let generation = c.generation;
                    self.mark_busy(core);
                    self.queue
                        .schedule(now + remaining, EventKind::CoreResume { core, generation });
                    return Ok(());
                }
                Work::Sending(frame) => {
                    let link = frame.link;
                    if self.can_write(link, Writer::Workload) {
                        self.mark_busy(core);
                        self.start_write(core, Writer::Workload);
                    } else {
                        self.links[link].sender_waiting = true;
                        self.mark_idle(core, IdleReason::Send);
                    }
                    return Ok(());
                }
                Work::Receiving(from) => {
                    let from = *from;
                    let pos = c
                        .delivered
                        .iter()
                        .position(|m| from.is_none_or(|f| m.src == f));
                    match pos {
                        Some(i) => {
                            let m = c.delivered.remove(i);
                            c.work = Work::Ready(m);
                        }
                        None => {
                            let reason = if c.relay_queue.is_empty() {
                                IdleReason::Recv
                            } else {
                                IdleReason::Send
                            };
                            self.mark_idle(core, reason);
                            return Ok(());
                        }
                    }
                }
                Work::Halted => {
                    let reason = if c.relay_queue.is_empty() {
                        IdleReason::Other
                    } else {
                        IdleReason::Send
                    };
                    self.mark_idle(core, reason);
                    return Ok(());
                }
            }
        }
    }

    fn begin(&mut self, core: usize, action: Action) -> Result<Work, SimError> {
        let me = CoreId::from(core);
        Ok(match action {
            Action::Compute(cycles) => Work::Compute { remaining: cycles },
            Action::Recv(from) => {
                if let Some(f) = from {
                    self.topo.check_core(f).map_err(RoutingError::from)?;
                }
                Work::Receiving(from)
            }
            Action::Halt => {
                self.cores[core].stats.halted_at = Some(self.now);
                Work::Halted
            }
            Action::Send(m) => {
                let bad = |detail: String| SimError::BadSend { core: me, detail };
                if m.src != me {
                    return Err(bad(format!("message claims source {}", m.src)));
                }
                self.topo.check_core(m.dst).map_err(RoutingError::from)?;
                if m.dst == me {
                    return Err(RoutingError::RouteToSelf(me).into());
                }
                let next = self.topo.next_hop(me, m.dst)?;
                let link = self.topo.link_id(me, next).expect("linked neighbour");
                Work::Sending(OutFrame {
                    words: frame_message(&m),
                    link,
                    next: 0,
                    meta: FrameMeta {
                        send_started: self.now,
                        send_completed: self.now,
                        hops: 0,
                    },
                })
            }
        })
    }

    fn finish(&mut self) -> Result<Metrics, SimError> {
        let mut blocked = Vec::new();
        for (i, c) in self.cores.iter().enumerate() {
            let state = match &c.work {
                Work::Halted => None,
                Work::Sending(f) => Some(format!(
                    "core {i} blocked sending on link {}",
                    self.links[f.link].name()
                )),
                Work::Receiving(Some(f)) => Some(format!("core {i} waiting to receive from {f}")),
                Work::Receiving(None) => Some(format!("core {i} waiting to receive")),
                other => Some(format!("core {i} stuck in {other:?}")),
            };
            blocked.extend(state);
            if !c.relay_queue.is_empty() {
                blocked.push(format!(
                    "core {i} holds {} unrelayed frame(s)",
                    c.relay_queue.len()
                ));
            }
        }
        if !blocked.is_empty() {
            return Err(SimError::Deadlock {
                time: self.now,
                blocked,
            });
        }
        let now = self.now;
        for c in &mut self.cores {
            c.idle_since = None;
        }
        let messages_sent = self.cores.iter().map(|c| c.stats.messages_sent).sum();
        let messages_delivered = self.cores.iter().map(|c| c.stats.messages_delivered).sum();
        let links: Vec<LinkMetrics> = self
            .topo
            .links()
            .iter()
            .zip(&self.links)
            .map(|(l, s)| LinkMetrics {
                link: *l,
                words: s.words,
                frames: s.frames,
                max_occupancy: s.max_occupancy,
            })
            .collect();
        let max_fifo_occupancy = links.iter().map(|l| l.max_occupancy).max().unwrap_or(0);
        let fifo_order_preserved = self
            .links
            .iter()
            .all(|l| l.next_read_seq == l.next_write_seq);
        Ok(Metrics {
            total_cycles: now,
            clock_hz: self.cfg.clock_hz,
            cores: self.cores.iter().map(|c| c.stats.clone()).collect(),
            links,
            messages_sent,
            messages_delivered,
            payload_words_sent: self.payload_words_sent,
            hop_histogram: std::mem::take(&mut self.hop_histogram),
            deliveries: std::mem::take(&mut self.deliveries),
            events_processed: self.events_processed,
            fifo_order_preserved,
            max_fifo_occupancy,
        })
    }
}
