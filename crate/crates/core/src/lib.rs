//! Compositional text-image matching on simulated quantum circuits.
//!
//! Sentences are parsed with a pregroup grammar, drawn as string diagrams
//! under one of five compositional models, compiled to parameterised
//! circuits with a Sim14 ansatz and simulated exactly. Word parameters are
//! trained with SPSA against a binary cross-entropy loss.

pub mod ansatz;
pub mod data;
pub mod diagram;
pub mod experiment;
pub mod grammar;
pub mod simulator;
pub mod training;
