//! Seeded Monte Carlo runs of the full link.
//!
//! A [`SimConfig`] describes one operating point. [`Simulation`] holds the
//! seed-independent parts (frame layout, filter bank) and runs single
//! frames; [`run_point`] and [`run_sweep`] aggregate frames in parallel
//! with results independent of the worker count.

mod config;
mod frame;
mod output;
mod snr_serde;
mod sweep;

pub use config::{apply_override, ChannelConfig, ChannelNormalization, EstimatorKind, OscillatorConfig, ProfileName, SimConfig};
pub use frame::{run_frame, FrameOutcome, Simulation};
pub use output::{emit_results, read_csv, read_jsonl, write_csv, write_jsonl, OutputFormat};
pub use sweep::{run_frames, run_point, run_sweep, MetricsRecord, RunOptions, SweepAxes};
