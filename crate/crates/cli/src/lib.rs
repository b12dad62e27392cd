//! Experiment harness for the speclab numerical laboratory: seeded sweep
//! driver with resumable cells, aggregate summaries, and plot-ready CSVs.

pub mod plot;
pub mod seed;
pub mod sweep;

pub use sweep::{run_sweep, CellRow, SummaryRow, SweepConfig, SweepResults};
