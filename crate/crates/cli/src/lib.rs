//! Configuration, sweep orchestration, and output emission for the
//! clusterwave simulator. The binary in `main.rs` is a thin layer over this.

pub mod config;
pub mod outputs;
pub mod presets;
pub mod sweep;

pub use config::{expand_sweep, CellFilter, SweepConfig};
pub use sweep::{analyze_tree, run_sweep};
