// Copyright The fslnet Authors.
// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write;

use rayon::prelude::*;
use thiserror::Error;

use crate::engine::{Cycle, SimConfig};
use crate::topology::{self, TopologyError, TopologyKind};
use crate::workload::{self, build_matmul_program, matmul_reference, WorkloadError};

use super::Metrics;

pub const CSV_HEADER: &str =
    "size,topology,total_cycles,comm_cycles,compute_cycles,total_seconds,max_hop";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error("sweep needs at least one matrix size")]
    NoSizes,
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error("size {size} on {topology}: {source}")]
    Run {
        size: usize,
        topology: TopologyKind,
        source: WorkloadError,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub sizes: Vec<usize>,
    pub topologies: Vec<TopologyKind>,
    pub cores: usize,
    pub seed: u64,
}

impl SweepSpec {
    pub fn new(sizes: Vec<usize>, topologies: Vec<TopologyKind>) -> Self {
        SweepSpec {
            sizes,
            topologies,
            cores: 8,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub size: usize,
    pub topology: TopologyKind,
    pub total_cycles: Cycle,
    /// Handler, relay and send cycles summed over cores.
    pub comm_cycles: Cycle,
    /// Workload multiply-accumulate cycles summed over cores.
    pub compute_cycles: Cycle,
    pub total_seconds: f64,
    pub max_hop: usize,
    /// Largest element error against the sequential product.
    pub max_abs_err: f64,
}

impl SweepRow {
    pub fn from_metrics(
        size: usize,
        topology: TopologyKind,
        m: &Metrics,
        max_abs_err: f64,
    ) -> Self {
        SweepRow {
            size,
            topology,
            total_cycles: m.total_cycles,
            comm_cycles: m.comm_cycles(),
            compute_cycles: m.compute_cycles(),
            total_seconds: m.total_seconds(),
            max_hop: m.max_hop(),
            max_abs_err,
        }
    }
}

/// Run the matrix workload for every (size, topology) pair. Points run in
/// parallel; rows come back ordered by size, then by the order of
/// `topologies`.
pub fn sweep(cfg: &SimConfig, spec: &SweepSpec) -> Result<Vec<SweepRow>, SweepError> {
    if spec.sizes.is_empty() {
        return Err(SweepError::NoSizes);
    }
    let topologies = spec
        .topologies
        .iter()
        .map(|&k| topology::build(k, spec.cores))
        .collect::<Result<Vec<_>, _>>()?;
    let points: Vec<(usize, usize)> = spec
        .sizes
        .iter()
        .flat_map(|&s| (0..topologies.len()).map(move |t| (s, t)))
        .collect();
    points
        .par_iter()
        .map(|&(size, ti)| {
            let t = &topologies[ti];
            let wrap = |source| SweepError::Run {
                size,
                topology: t.kind(),
                source,
            };
            let (a, b) = workload::seeded_operands(size, spec.seed);
            let reference = matmul_reference(&a, &b).map_err(wrap)?;
            let run = build_matmul_program(&a, &b, t, cfg)
                .and_then(|p| p.run(cfg, t))
                .map_err(wrap)?;
            let err = run
                .result
                .values()
                .iter()
                .zip(reference.values())
                .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            Ok(SweepRow::from_metrics(size, t.kind(), &run.metrics, err))
        })
        .collect()
}

/// CSV with a fixed header and one line per row, newline-terminated.
pub fn emit_csv(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.size,
            r.topology.name(),
            r.total_cycles,
            r.comm_cycles,
            r.compute_cycles,
            r.total_seconds,
            r.max_hop
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all() -> Vec<TopologyKind> {
        vec![
            TopologyKind::Ring,
            TopologyKind::Star,
            TopologyKind::Hypercube,
        ]
    }

    #[test]
    fn small_sweep_shape() {
        let cfg = SimConfig::default();
        let rows = sweep(&cfg, &SweepSpec::new(vec![4], all())).unwrap();
        assert_eq!(rows.len(), 3);
        let kinds: Vec<TopologyKind> = rows.iter().map(|r| r.topology).collect();
        assert_eq!(kinds, all());
        assert!(rows
            .iter()
            .all(|r| r.compute_cycles == rows[0].compute_cycles));
        assert_eq!(rows[0].compute_cycles, 4 * 4 * 4 * cfg.mac_cycles);
        assert_eq!(rows[1].max_hop, 1);
    }

    #[test]
    fn empty_inputs() {
        let cfg = SimConfig::default();
        let rows = sweep(&cfg, &SweepSpec::new(vec![4], vec![])).unwrap();
        assert!(rows.is_empty());
        assert_eq!(emit_csv(&rows), format!("{CSV_HEADER}\n"));
        assert_eq!(
            sweep(&cfg, &SweepSpec::new(vec![], all())),
            Err(SweepError::NoSizes)
        );
    }

    #[test]
    fn csv_lines() {
        let row = SweepRow {
            size: 8,
            topology: TopologyKind::Hypercube,
            total_cycles: 1500,
            comm_cycles: 900,
            compute_cycles: 5120,
            total_seconds: 1.5e-5,
            max_hop: 3,
            max_abs_err: 0.0,
        };
        let text = emit_csv(&[row]);
        assert_eq!(
            text,
            format!("{CSV_HEADER}\n8,cube,1500,900,5120,0.000015,3\n")
        );
        assert_eq!(text.lines().count(), 2);
    }

    #[test]
    fn repeated_sweeps_are_byte_identical() {
        let cfg = SimConfig::default();
        let spec = SweepSpec::new(vec![4, 8], all());
        let a = emit_csv(&sweep(&cfg, &spec).unwrap());
        let b = emit_csv(&sweep(&cfg, &spec).unwrap());
        assert_eq!(a, b);
    }
}
