//! Forecasting toolkit for daily epidemic case counts driven by lagged
//! environmental, mobility, calendar, and demographic variables.
//!
//! The crate is organized as a pipeline:
//!
//! - [`table`] — parse, validate, clean, and enrich daily records
//! - [`synth`] — deterministic synthetic benchmark data with known lag structure
//! - [`analysis`] — Pearson correlation and lag scans against the target
//! - [`windowing`] — supervised samples (sequence or flat) plus normalization
//! - [`model_tree`] — M5-style regression trees with linear models at leaves
//! - [`neural`] — small CNN/LSTM forecasters with explicit backpropagation
//! - [`eval`] — metrics, persistence baselines, chronological cross-validation

pub mod analysis;
pub mod synth;
pub mod table;
pub mod windowing;

pub use analysis::{lag_scan, pearson, summarize, LagCorrelationReport};
pub use synth::{synth_generate, SynthConfig};
pub use table::{RestrictionStage, TimeSeriesTable, VariableMeta, VariableRole};
pub use windowing::{
    apply_normalizer, build_windows, fit_normalizer, Layout, NormMethod, Normalizer,
    SupervisedDataset,
};
