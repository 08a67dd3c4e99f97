// Copyright The fslnet Authors.
// SPDX-License-Identifier: Apache-2.0

//! Static next-hop routing for each topology kind.
//!
//! Routing is evaluated hop by hop at every intermediate core. [`route`] is a
//! derived view that iterates the next-hop function from source to
//! destination.

use thiserror::Error;

use crate::topology::{CoreId, Topology, TopologyError, TopologyKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RoutingError {
    #[error("core {0} asked to route a message to itself")]
    RouteToSelf(CoreId),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error("next hop {from}->{to} is not a link in the topology")]
    NoLink { from: CoreId, to: CoreId },
}

fn check(n: usize, c: CoreId) -> Result<(), RoutingError> {
    if c.index() < n {
        Ok(())
    } else {
        Err(TopologyError::CoreOutOfRange { core: c, n }.into())
    }
}

/// Shortest-arc step on an `n`-core ring. Ties go clockwise (increasing id).
pub fn next_hop_ring(n: usize, current: CoreId, dest: CoreId) -> Result<CoreId, RoutingError> {
    check(n, current)?;
    check(n, dest)?;
    if current == dest {
        return Err(RoutingError::RouteToSelf(current));
    }
    let cur = current.index();
    let clockwise = (dest.index() + n - cur) % n;
    let next = if clockwise <= n / 2 {
        (cur + 1) % n
    } else {
        (cur + n - 1) % n
    };
    Ok(CoreId::from(next))
}

/// Hub relay: spokes send to the hub, the hub sends straight to the target.
pub fn next_hop_star(
    n: usize,
    hub: CoreId,
    current: CoreId,
    dest: CoreId,
) -> Result<CoreId, RoutingError> {
    check(n, current)?;
    check(n, dest)?;
    if current == dest {
        return Err(RoutingError::RouteToSelf(current));
    }
    Ok(if current == hub { dest } else { hub })
}

/// Dimension-order (e-cube) step: flip the lowest bit in which `current`
/// and `dest` differ.
pub fn next_hop_hypercube(dim: u32, current: CoreId, dest: CoreId) -> Result<CoreId, RoutingError> {
    let n = 1usize << dim;
    check(n, current)?;
    check(n, dest)?;
    let diff = current.0 ^ dest.0;
    if diff == 0 {
        return Err(RoutingError::RouteToSelf(current));
    }
    Ok(CoreId(current.0 ^ (1 << diff.trailing_zeros())))
}

impl Topology {
    /// Next core on the way from `current` to `dest`.
    pub fn next_hop(&self, current: CoreId, dest: CoreId) -> Result<CoreId, RoutingError> {
        let next = match self.kind() {
            TopologyKind::Ring => next_hop_ring(self.n(), current, dest)?,
            TopologyKind::Star => {
                next_hop_star(self.n(), self.hub().unwrap_or(CoreId(0)), current, dest)?
            }
            TopologyKind::Hypercube => {
                let dim = self.dim().unwrap_or(0);
                next_hop_hypercube(dim, current, dest)?
            }
        };
        if self.link_id(current, next).is_none() {
            return Err(RoutingError::NoLink {
                from: current,
                to: next,
            });
        }
        Ok(next)
    }
}

/// Ordered core sequence from source to destination, both inclusive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Route {
    pub path: Vec<CoreId>,
}

impl Route {
    pub fn hops(&self) -> usize {
        self.path.len() - 1
    }
}

pub fn route(t: &Topology, src: CoreId, dest: CoreId) -> Result<Route, RoutingError> {
    t.check_core(src)?;
    t.check_core(dest)?;
    let mut path = vec![src];
    let mut cur = src;
    while cur != dest {
        cur = t.next_hop(cur, dest)?;
        path.push(cur);
        // a static router on n cores never needs more than n-1 hops
        debug_assert!(path.len() <= t.n());
    }
    Ok(Route { path })
}

pub fn hop_count(t: &Topology, src: CoreId, dest: CoreId) -> Result<usize, RoutingError> {
    route(t, src, dest).map(|r| r.hops())
}
