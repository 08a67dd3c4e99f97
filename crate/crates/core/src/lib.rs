// Copyright The fslnet Authors.
// SPDX-License-Identifier: Apache-2.0

//! Deterministic simulation of message-passing soft-core multiprocessors.
//!
//! Cores with static ids are wired by unidirectional 32-bit word links into a
//! ring, star or hypercube. Messages are routed in software, store-and-forward,
//! by interrupt handlers on each intermediate core. A master/worker matrix
//! product exercises the network so topologies can be compared.
//!
//! ```
//! use fslnet::{build_star, workload, SimConfig};
//!
//! let cfg = SimConfig::default();
//! let star = build_star(8).unwrap();
//! let (a, b) = workload::seeded_operands(8, 1);
//! let run = workload::build_matmul_program(&a, &b, &star, &cfg)
//!     .unwrap()
//!     .run(&cfg, &star)
//!     .unwrap();
//! assert_eq!(run.metrics.messages_sent, run.metrics.messages_delivered);
//! ```

pub mod codec;
pub mod engine;
pub mod report;
pub mod routing;
pub mod topology;
pub mod workload;

pub use codec::{CodecMode, Message, Word};
pub use engine::{unloaded_latency, Action, CoreProgram, Cycle, Framing, SimConfig, SimError};
pub use report::Metrics;
pub use routing::{hop_count, route, Route};
pub use topology::{
    build_hypercube, build_ring, build_star, CoreId, DirectedLink, Topology, TopologyKind,
};
pub use workload::{Matrix, WorkloadProgram};
