//! Seedable, reproducible simulation of virus spread over
//! capacity-constrained scale-free contact networks.
//!
//! The library covers the full pipeline: the three network generators
//! ([`netgen`]), the weekly infection dynamics ([`epidemic`]), mid-run
//! interventions ([`scenario`]), and the series analysis behind peaks,
//! second waves, and release-impact metrics ([`analysis`]).

pub mod analysis;
pub mod epidemic;
pub mod error;
pub mod graph;
pub mod io;
pub mod netgen;
pub mod rng;
pub mod scenario;

pub use error::{Error, Result};
pub use graph::{GenKind, GenParams, Graph, Group, NodeId};
