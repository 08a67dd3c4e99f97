// Copyright The fslnet Authors.
// SPDX-License-Identifier: Apache-2.0

//! Fixtures shared by the criterion benches.

use fslnet::topology::{build, TopologyKind};
use fslnet::Topology;

pub const KINDS: [TopologyKind; 3] = [
    TopologyKind::Ring,
    TopologyKind::Star,
    TopologyKind::Hypercube,
];

pub fn eight_core(kind: TopologyKind) -> Topology {
    build(kind, 8).expect("8-core topologies are valid for every kind")
}
