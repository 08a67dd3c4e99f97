// Copyright The fslnet Authors.
// SPDX-License-Identifier: Apache-2.0

//! Run metrics, topology sweeps and the reference power/area tables.

mod metrics;
mod power;
mod sweep;
mod tables;

pub use metrics::{CoreMetrics, DeliveryRecord, LinkMetrics, Metrics};
pub use power::{dynamic_power, PowerError};
pub use sweep::{emit_csv, sweep, SweepError, SweepRow, SweepSpec, CSV_HEADER};
pub use tables::{
    reference_tables, PowerRow, ReferenceTables, Utilization, UtilizationRow, TOPOLOGY_ORDER,
};
