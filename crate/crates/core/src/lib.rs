//! Time-slotted content cache scheduling.
//!
//! A base station holds a size-limited cache in front of a backhaul link.
//! Per slot, each content is either cached (serving its requests at the
//! cheap rate, at some staleness age) or not (serving at the expensive
//! rate); entering the cache or refreshing in place costs a fetch. The
//! planning problem trades traffic cost against an age penalty over a
//! finite horizon, subject to the per-slot capacity.
//!
//! `rounding::solve` is the main entry point: column generation over
//! per-content plan columns with shortest-path pricing, then iterative
//! rounding to a feasible binary plan, returning the plan together with a
//! certified lower bound on the optimum. `baselines` holds two greedy
//! reference policies, `oracle` an exhaustive solver for small cases,
//! `instgen` a seeded workload generator, and `sweep` the grid runner that
//! compares all of the above.

// Index arithmetic over (slot, content) grids reads better than iterator
// chains in most of this crate.
#![allow(clippy::needless_range_loop)]

pub mod baselines;
pub mod colgen;
pub mod error;
pub mod instgen;
pub mod lp;
pub mod model;
pub mod oracle;
pub mod rounding;
pub mod sweep;

pub use error::{Error, Result};
pub use model::{
    AoiPenalty, Column, Content, CostBreakdown, Instance, Request, Schedule,
};
