//! Scheduling and verification toolkit for qudit control with two-level rotations.
//!
//! - [`coupling_graph`]: allowed level couplings, spanning trees, edge colorings.
//! - [`scheduler`]: parallel rotation schedules for state synthesis and QR.
//! - [`givens_synthesis`]: numerical rotations, decompositions and diagonal gates.
//! - [`nonlocal_protocol`]: e-bit assisted two-qudit gates with resource accounting.

pub mod coupling_graph;
pub mod error;
pub mod givens_synthesis;
pub mod linalg;
pub mod nonlocal_protocol;
pub mod scheduler;

pub use error::{Error, Result};
