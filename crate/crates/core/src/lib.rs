//! Broadcast storm modelling, detection and control for a switched LAN.
//!
//! - [`model`]: the broadcast growth curve and its fit to measured traces.
//! - [`metrics`]: channel statistics and the storm verdict.
//! - [`agents`]: per-node agents that detect, suppress and ticket storms.
//! - [`sim`]: a deterministic broadcast-domain simulator.
//! - [`io`] and [`datasets`]: file formats and the bundled tables and scenarios.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agents;
pub mod datasets;
pub mod io;
pub mod metrics;
pub mod model;
pub mod sim;

/// Index of a node in the broadcast domain.
pub type NodeId = u32;
