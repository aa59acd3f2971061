//! Code generation from typed wiring diagrams of idioms.

pub mod cli;
pub mod coherence;
pub mod diagram;
pub mod dsl;
pub mod instantiate;
pub mod patterns;
pub mod rng;
pub mod targets;
pub mod transform;
pub mod variants;
