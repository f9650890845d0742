//! Deterministic simulator for edge-assisted collaborative object detection
//! across connected vehicles.
//!
//! CAVs sense a 2D scene through a pinhole camera model, localize their
//! detections and publish them over a simulated pub/sub bus to an edge node.
//! The edge either fuses them into a global map ([`pace`]) or runs a
//! reputation- and visibility-weighted label vote ([`vote`]). [`sim`] drives
//! everything on an integer-millisecond clock.

// validation uses `!(x > 0.0)` on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bus;
pub mod cli;
pub mod error;
pub mod pace;
pub mod projection;
pub mod scenario;
pub mod scene;
pub mod sensor;
pub mod sim;
pub mod vote;
pub mod wire;

pub use error::{Error, Result};
