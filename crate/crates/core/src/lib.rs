//! Link-level simulation of RIS-aided OTFS and OFDM transmission under
//! oscillator phase noise.
//!
//! The crate is organised bottom-up:
//!
//! - [`numerics`]: unitary DFTs, Doppler-axis block transforms, Bessel J0.
//! - [`waveform`]: OTFS/OFDM modulation, cyclic prefixes, impulse-pilot layouts.
//! - [`channel`]: TDL-C/Jakes per-element channels, RIS cascade, AWGN.
//! - [`phase_noise`]: free-running (Wiener) and PLL (Ornstein-Uhlenbeck) oscillators.
//! - [`estimation`]: pilot snapshot estimation, Wiener interpolation, BEM and spline baselines.
//! - [`detection`]: QAM, LSMR with interference cancellation, convolutional coding.
//! - [`harness`]: seeded Monte Carlo runs, sweeps and CSV/JSONL output.
//!
//! Runnable walkthroughs of each capability live in the crate's `examples/`.

pub mod channel;
pub mod detection;
pub mod error;
pub mod estimation;
pub mod harness;
pub mod numerics;
pub mod phase_noise;
pub mod waveform;

pub use error::{Error, Result};
pub use num_complex::Complex64;
