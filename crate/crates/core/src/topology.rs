// Copyright The fslnet Authors.
// SPDX-License-Identifier: Apache-2.0

//! Interconnect topologies as directed-link graphs.
//!
//! Every core carries a static id in `[0, n)`. Each undirected adjacency is
//! realized by two unidirectional links, one per direction, the same way an
//! FSL pair connects two soft cores.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

/// Maximum number of inbound (and, separately, outbound) links per core.
pub const MAX_LINKS_PER_CORE: usize = 16;

/// Largest star: a hub with one link pair per spoke.
pub const MAX_STAR_CORES: usize = MAX_LINKS_PER_CORE + 1;

/// Default upper bound on hypercube dimension.
pub const DEFAULT_MAX_HYPERCUBE_DIM: u32 = 4;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CoreId(pub u32);

impl CoreId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for CoreId {
    fn from(v: usize) -> Self {
        CoreId(v as u32)
    }
}

impl fmt::Display for CoreId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DirectedLink {
    pub from: CoreId,
    pub to: CoreId,
}

impl DirectedLink {
    pub fn new(from: impl Into<CoreId>, to: impl Into<CoreId>) -> Self {
        DirectedLink {
            from: from.into(),
            to: to.into(),
        }
    }

    pub fn reversed(self) -> Self {
        DirectedLink {
            from: self.to,
            to: self.from,
        }
    }
}

impl fmt::Display for DirectedLink {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.from, self.to)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum TopologyKind {
    Ring,
    Star,
    Hypercube,
}

impl TopologyKind {
    pub fn name(self) -> &'static str {
        match self {
            TopologyKind::Ring => "ring",
            TopologyKind::Star => "star",
            TopologyKind::Hypercube => "cube",
        }
    }
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for TopologyKind {
    type Err = TopologyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ring" => Ok(TopologyKind::Ring),
            "star" => Ok(TopologyKind::Star),
            "cube" | "hypercube" => Ok(TopologyKind::Hypercube),
            other => Err(TopologyError::UnknownKind(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TopologyError {
    #[error("invalid size for {kind}: {detail}")]
    InvalidSize { kind: TopologyKind, detail: String },
    #[error("star with {n} cores exceeds the hub fan-out limit of {MAX_STAR_CORES} cores")]
    FanOutLimit { n: usize },
    #[error("hypercube dimension {dim} exceeds the configured cap {cap}")]
    DimensionCap { dim: u32, cap: u32 },
    #[error("core {core} out of range for a {n}-core topology")]
    CoreOutOfRange { core: CoreId, n: usize },
    #[error("unknown topology kind {0:?}")]
    UnknownKind(String),
}

/// A single failed structural check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    SelfLink(CoreId),
    DuplicateLink(DirectedLink),
    EndpointOutOfRange(DirectedLink),
    MissingReverseLink(DirectedLink),
    OutDegree { core: CoreId, degree: usize },
    InDegree { core: CoreId, degree: usize },
    Disconnected { unreachable: Vec<CoreId> },
    BadHub { hub: Option<CoreId> },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SelfLink(c) => write!(f, "self-link at core {c}"),
            Violation::DuplicateLink(l) => write!(f, "duplicate link {l}"),
            Violation::EndpointOutOfRange(l) => {
                write!(f, "link {l} names a core outside the topology")
            }
            Violation::MissingReverseLink(l) => write!(f, "link {l} has no reverse link"),
            Violation::OutDegree { core, degree } => write!(
                f,
                "core {core} has {degree} outbound links (limit {MAX_LINKS_PER_CORE})"
            ),
            Violation::InDegree { core, degree } => write!(
                f,
                "core {core} has {degree} inbound links (limit {MAX_LINKS_PER_CORE})"
            ),
            Violation::Disconnected { unreachable } => {
                write!(f, "{} core(s) unreachable from core 0", unreachable.len())
            }
            Violation::BadHub { hub } => write!(f, "star hub must be core 0, found {hub:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_pass(&self) -> bool {
        self.violations.is_empty()
    }
}

/// An immutable interconnect over `n` cores.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    kind: TopologyKind,
    n: usize,
    links: Vec<DirectedLink>,
    hub: Option<CoreId>,
    link_index: HashMap<DirectedLink, usize>,
    out_adj: Vec<Vec<CoreId>>,
}

impl Topology {
    /// Assemble a topology from an explicit link list without checking it.
    ///
    /// Links are kept sorted by `(from, to)`, which fixes the link ids used by
    /// the engine and metrics. Use [`Topology::validate`] to audit the result.
    pub fn from_links(
        kind: TopologyKind,
        n: usize,
        links: impl IntoIterator<Item = DirectedLink>,
        hub: Option<CoreId>,
    ) -> Self {
        let mut links: Vec<DirectedLink> = links.into_iter().collect();
        links.sort();
        let mut link_index = HashMap::with_capacity(links.len());
        let mut out_adj = vec![Vec::new(); n];
        for (i, l) in links.iter().enumerate() {
            link_index.entry(*l).or_insert(i);
            if l.from.index() < n {
                out_adj[l.from.index()].push(l.to);
            }
        }
        for adj in &mut out_adj {
            adj.dedup();
        }
        Topology {
            kind,
            n,
            links,
            hub,
            link_index,
            out_adj,
        }
    }

    pub fn kind(&self) -> TopologyKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn hub(&self) -> Option<CoreId> {
        self.hub
    }

    pub fn links(&self) -> &[DirectedLink] {
        &self.links
    }

    /// Hypercube dimension, `log2(n)`.
    pub fn dim(&self) -> Option<u32> {
        match self.kind {
            TopologyKind::Hypercube => Some(self.n.trailing_zeros()),
            _ => None,
        }
    }

    pub fn link_id(&self, from: CoreId, to: CoreId) -> Option<usize> {
        self.link_index.get(&DirectedLink { from, to }).copied()
    }

    pub fn check_core(&self, c: CoreId) -> Result<(), TopologyError> {
        if c.index() < self.n {
            Ok(())
        } else {
            Err(TopologyError::CoreOutOfRange { core: c, n: self.n })
        }
    }

    /// Cores reachable over one outbound link from `c`.
    pub fn neighbors(&self, c: CoreId) -> Result<BTreeSet<CoreId>, TopologyError> {
        self.check_core(c)?;
        Ok(self.out_adj[c.index()].iter().copied().collect())
    }

    pub fn out_degree(&self, c: CoreId) -> usize {
        self.links.iter().filter(|l| l.from == c).count()
    }

    pub fn in_degree(&self, c: CoreId) -> usize {
        self.links.iter().filter(|l| l.to == c).count()
    }

    /// Audit the structural invariants. Violations are returned as data.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let mut seen = BTreeSet::new();
        for l in &self.links {
            if l.from == l.to {
                violations.push(Violation::SelfLink(l.from));
            }
            if l.from.index() >= self.n || l.to.index() >= self.n {
                violations.push(Violation::EndpointOutOfRange(*l));
            }
            if !seen.insert(*l) {
                violations.push(Violation::DuplicateLink(*l));
            }
        }
        for l in &self.links {
            if l.from != l.to && !self.link_index.contains_key(&l.reversed()) {
                violations.push(Violation::MissingReverseLink(*l));
            }
        }
        for i in 0..self.n {
            let c = CoreId::from(i);
            let out = self.out_degree(c);
            if out > MAX_LINKS_PER_CORE {
                violations.push(Violation::OutDegree {
                    core: c,
                    degree: out,
                });
            }
            let inn = self.in_degree(c);
            if inn > MAX_LINKS_PER_CORE {
                violations.push(Violation::InDegree {
                    core: c,
                    degree: inn,
                });
            }
        }
        if self.kind == TopologyKind::Star && self.hub != Some(CoreId(0)) {
            violations.push(Violation::BadHub { hub: self.hub });
        }
        if self.n > 0 {
            let mut reached = vec![false; self.n];
            let mut queue = VecDeque::from([0usize]);
            reached[0] = true;
            while let Some(u) = queue.pop_front() {
                for v in &self.out_adj[u] {
                    let v = v.index();
                    if v < self.n && !reached[v] {
                        reached[v] = true;
                        queue.push_back(v);
                    }
                }
            }
            let unreachable: Vec<CoreId> = reached
                .iter()
                .enumerate()
                .filter(|(_, r)| !**r)
                .map(|(i, _)| CoreId::from(i))
                .collect();
            if !unreachable.is_empty() {
                violations.push(Violation::Disconnected { unreachable });
            }
        }
        ValidationReport { violations }
    }
}

fn both_ways(a: usize, b: usize) -> [DirectedLink; 2] {
    [DirectedLink::new(a, b), DirectedLink::new(b, a)]
}

/// Ring of `n >= 3` cores; the clockwise successor of `i` is `(i + 1) mod n`.
pub fn build_ring(n: usize) -> Result<Topology, TopologyError> {
    if n < 3 {
        return Err(TopologyError::InvalidSize {
            kind: TopologyKind::Ring,
            detail: format!("need at least 3 cores, got {n}"),
        });
    }
    let links = (0..n).flat_map(|i| both_ways(i, (i + 1) % n));
    Ok(Topology::from_links(TopologyKind::Ring, n, links, None))
}

/// Star of `2 <= n <= 17` cores with core 0 as the hub.
pub fn build_star(n: usize) -> Result<Topology, TopologyError> {
    if n < 2 {
        return Err(TopologyError::InvalidSize {
            kind: TopologyKind::Star,
            detail: format!("need at least 2 cores, got {n}"),
        });
    }
    if n > MAX_STAR_CORES {
        return Err(TopologyError::FanOutLimit { n });
    }
    let links = (1..n).flat_map(|k| both_ways(0, k));
    Ok(Topology::from_links(
        TopologyKind::Star,
        n,
        links,
        Some(CoreId(0)),
    ))
}

/// Hypercube of `2^dim` cores, `1 <= dim <= 4`.
pub fn build_hypercube(dim: u32) -> Result<Topology, TopologyError> {
    build_hypercube_capped(dim, DEFAULT_MAX_HYPERCUBE_DIM)
}

/// Hypercube with an explicit dimension cap.
pub fn build_hypercube_capped(dim: u32, cap: u32) -> Result<Topology, TopologyError> {
    if dim < 1 {
        return Err(TopologyError::InvalidSize {
            kind: TopologyKind::Hypercube,
            detail: "dimension must be at least 1".to_string(),
        });
    }
    if dim > cap {
        return Err(TopologyError::DimensionCap { dim, cap });
    }
    if dim as usize > MAX_LINKS_PER_CORE {
        return Err(TopologyError::InvalidSize {
            kind: TopologyKind::Hypercube,
            detail: format!("degree {dim} exceeds the per-core link limit"),
        });
    }
    let n = 1usize << dim;
    let links = (0..n).flat_map(|i| (0..dim).map(move |b| DirectedLink::new(i, i ^ (1 << b))));
    Ok(Topology::from_links(
        TopologyKind::Hypercube,
        n,
        links,
        None,
    ))
}

/// A lone core with no links. Useful as the sequential baseline.
pub fn single_core() -> Topology {
    Topology::from_links(TopologyKind::Star, 1, [], Some(CoreId(0)))
}

/// Build a topology from a kind and a core count. For hypercubes `n` must be
/// a power of two.
pub fn build(kind: TopologyKind, n: usize) -> Result<Topology, TopologyError> {
    match kind {
        TopologyKind::Ring => build_ring(n),
        TopologyKind::Star => build_star(n),
        TopologyKind::Hypercube => {
            if n < 2 || !n.is_power_of_two() {
                return Err(TopologyError::InvalidSize {
                    kind,
                    detail: format!("core count {n} is not a power of two >= 2"),
                });
            }
            build_hypercube(n.trailing_zeros())
        }
    }
}
