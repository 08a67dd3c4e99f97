// Copyright The fslnet Authors.
// SPDX-License-Identifier: Apache-2.0

//! The per-core program interface the engine interprets.

use std::collections::VecDeque;

use thiserror::Error;

use crate::codec::Message;
use crate::topology::CoreId;

/// What a core program asks the engine to do next.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action {
    /// Occupy the CPU for this many cycles. Receive handlers may preempt.
    Compute(u64),
    /// Blocking send: returns once the last frame word is on the first link.
    Send(Message),
    /// Blocking receive from the delivered buffer, optionally from one source.
    Recv(Option<CoreId>),
    Halt,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("core {core}: {detail}")]
pub struct ProgramError {
    pub core: CoreId,
    pub detail: String,
}

/// Behaviour of one core.
///
/// The engine calls `step` once at start, again each time the previous
/// action completes, and passes the message when that action was a `Recv`.
pub trait CoreProgram {
    fn step(&mut self, core: CoreId, received: Option<Message>) -> Result<Action, ProgramError>;
}

impl<P: CoreProgram + ?Sized> CoreProgram for Box<P> {
    fn step(&mut self, core: CoreId, received: Option<Message>) -> Result<Action, ProgramError> {
        (**self).step(core, received)
    }
}

/// A fixed list of actions. Received messages are kept in order.
#[derive(Debug, Clone, Default)]
pub struct Script {
    actions: VecDeque<Action>,
    pub received: Vec<Message>,
}

impl Script {
    pub fn new(actions: impl IntoIterator<Item = Action>) -> Self {
        Script {
            actions: actions.into_iter().collect(),
            received: Vec::new(),
        }
    }

    pub fn idle() -> Self {
        Script::new([])
    }
}

impl CoreProgram for Script {
    fn step(&mut self, _core: CoreId, received: Option<Message>) -> Result<Action, ProgramError> {
        if let Some(m) = received {
            self.received.push(m);
        }
        Ok(self.actions.pop_front().unwrap_or(Action::Halt))
    }
}
