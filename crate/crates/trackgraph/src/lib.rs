//! Multi-object tracking by label propagation on complementary graphs.
//!
//! Detections become graph nodes; a spatio-temporal graph, one appearance
//! graph per cue, and an exclusion graph encode which pairs should share or
//! must not share an identity. Tracking is the minimization of the signed
//! labeling energy over row-stochastic label matrices, solved jointly, node
//! by node, in interference-free parallel batches, or incrementally as
//! detections stream in.

pub mod config;
pub mod energy;
pub mod error;
pub mod graphs;
pub mod incremental;
pub mod joint;
pub mod model;
pub mod nodewise;
pub mod pipeline;
pub mod simplex;
pub mod synth;

pub use error::{Error, Result};
