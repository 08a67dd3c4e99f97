// Copyright The fslnet Authors.
// SPDX-License-Identifier: Apache-2.0

//! Measured power and device utilization of the 8-core FPGA builds
//! (XC5VLX110T, 100 MHz, 54 C junction). Kept verbatim for annotation;
//! nothing here is derived from the simulator.

use std::fmt::Write;

use crate::topology::TopologyKind;

/// Column order of every table: ring, star, cube.
pub const TOPOLOGY_ORDER: [TopologyKind; 3] = [
    TopologyKind::Ring,
    TopologyKind::Star,
    TopologyKind::Hypercube,
];

/// Watts per topology.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerRow {
    pub topology: TopologyKind,
    pub dynamic: f64,
    pub quiescent: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Utilization {
    pub count: u32,
    pub percent: Option<u32>,
}

impl std::fmt::Display for Utilization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.percent {
            Some(p) => write!(f, "{}({}%)", self.count, p),
            None => write!(f, "{}", self.count),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UtilizationRow {
    pub resource: &'static str,
    /// Ring, star, cube.
    pub values: [Utilization; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceTables {
    pub power: [PowerRow; 3],
    pub utilization: Vec<UtilizationRow>,
}

const fn u(count: u32, percent: u32) -> Utilization {
    Utilization {
        count,
        percent: Some(percent),
    }
}

const fn bare(count: u32) -> Utilization {
    Utilization {
        count,
        percent: None,
    }
}

pub fn reference_tables() -> ReferenceTables {
    ReferenceTables {
        power: [
            PowerRow {
                topology: TopologyKind::Ring,
                dynamic: 1.77018,
                quiescent: 1.26711,
                total: 3.03729,
            },
            PowerRow {
                topology: TopologyKind::Star,
                dynamic: 1.76922,
                quiescent: 1.26356,
                total: 3.03278,
            },
            PowerRow {
                topology: TopologyKind::Hypercube,
                dynamic: 1.69235,
                quiescent: 1.2633,
                total: 2.95565,
            },
        ],
        utilization: vec![
            UtilizationRow {
                resource: "Number of BUFs",
                values: [u(2, 6), u(2, 6), u(2, 6)],
            },
            UtilizationRow {
                resource: "Number of DSP48Es",
                values: [u(28, 43), u(28, 43), u(28, 43)],
            },
            UtilizationRow {
                resource: "Number of External IOBs",
                values: [u(4, 1), u(4, 1), u(4, 1)],
            },
            UtilizationRow {
                resource: "Number of RAM36",
                values: [u(128, 86), u(128, 86), u(128, 86)],
            },
            UtilizationRow {
                resource: "Number of slice Registers",
                values: [u(13630, 19), u(14589, 21), u(13900, 20)],
            },
            UtilizationRow {
                resource: "Number used as Flip-flops",
                values: [bare(13611), bare(14572), bare(13870)],
            },
            UtilizationRow {
                resource: "Number of Slice LUTs",
                values: [u(31727, 45), u(30410, 43), u(30572, 43)],
            },
            UtilizationRow {
                resource: "Number of Slice LUT-Flip flop",
                values: [u(38014, 54), u(37445, 54), u(37690, 54)],
            },
        ],
    }
}

impl ReferenceTables {
    pub fn power_for(&self, kind: TopologyKind) -> &PowerRow {
        self.power
            .iter()
            .find(|r| r.topology == kind)
            .expect("every topology has a power row")
    }

    pub fn utilization_for(&self, resource: &str, kind: TopologyKind) -> Option<Utilization> {
        let col = TOPOLOGY_ORDER.iter().position(|k| *k == kind)?;
        self.utilization
            .iter()
            .find(|r| r.resource == resource)
            .map(|r| r.values[col])
    }

    /// Tab-separated rendering of both tables.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str("Power consumption (W)\n");
        out.push_str("\tRing\tStar\tCube\n");
        type Column = fn(&PowerRow) -> f64;
        let rows: [(&str, Column); 3] = [
            ("Dynamic Power", |r| r.dynamic),
            ("Quiescent Power", |r| r.quiescent),
            ("Total Power", |r| r.total),
        ];
        for (label, get) in rows {
            let _ = writeln!(
                out,
                "{label}\t{}\t{}\t{}",
                get(&self.power[0]),
                get(&self.power[1]),
                get(&self.power[2])
            );
        }
        out.push_str("\nDevice utilization (XC5VLX110T)\n");
        out.push_str("\tRing\tStar\tCube\n");
        for r in &self.utilization {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}",
                r.resource, r.values[0], r.values[1], r.values[2]
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_values() {
        let t = reference_tables();
        assert_eq!(t.power_for(TopologyKind::Ring).total, 3.03729);
        assert_eq!(t.power_for(TopologyKind::Hypercube).dynamic, 1.69235);
        for r in &t.power {
            // totals are the column sums to the printed precision
            assert!((r.dynamic + r.quiescent - r.total).abs() < 1e-9, "{r:?}");
        }
    }

    #[test]
    fn utilization_values() {
        let t = reference_tables();
        assert_eq!(
            t.utilization_for("Number of slice Registers", TopologyKind::Star),
            Some(Utilization {
                count: 14589,
                percent: Some(21)
            })
        );
        assert_eq!(t.utilization.len(), 8);
    }

    #[test]
    fn rendering_keeps_digits() {
        let text = reference_tables().render();
        assert!(text.contains("Total Power\t3.03729\t3.03278\t2.95565"));
        assert!(text.contains("Quiescent Power\t1.26711\t1.26356\t1.2633"));
        assert!(text.contains("Number of slice Registers\t13630(19%)\t14589(21%)\t13900(20%)"));
        assert!(text.contains("Number used as Flip-flops\t13611\t14572\t13870"));
    }
}
