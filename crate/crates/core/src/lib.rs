//! Weighted multi-step loss for learning one-step dynamics models.
//!
//! The crate bundles a small reverse-mode autodiff engine, ground-truth
//! systems with a trajectory file format, the closed-form analysis of the
//! linear two-step loss, a model zoo, the multi-step trainer and the R2-based
//! evaluation harness. Each capability has a runnable example under
//! `examples/`.

pub mod autodiff;
pub mod cli;
pub mod closed_form;
pub mod config;
pub mod error;
pub mod eval;
pub mod model;
pub mod multistep;
pub mod rng;
pub mod stats;
pub mod systems;

pub use error::{Error, Result};
