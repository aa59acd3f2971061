//! Artifact kinds generated from diagrams: programs, formal specifications
//! and prose descriptions.

pub mod program;
pub mod prose;
pub mod spec;
pub mod trace;

pub use trace::{Outcome, Trace};
