//! QAM mapping, LSMR interference-cancellation equalisation and
//! convolutional coding.

mod coding;
mod equalizer;
mod lsmr;
mod qam;

pub use coding::{ber, conv_encode, viterbi_decode, CodecConfig, DecoderInput, DecoderKind, Interleaver};
pub(crate) use coding::bit_errors;
pub use equalizer::{decision_noise_variance, lsmr_ic_equalize, EqualizerConfig, EqualizerOutput, LinkOperator};
pub use lsmr::{dot_test, lsmr_solve, FnOperator, LinearOperator, LsmrSolution, ADJOINT_TOLERANCE, LSMR_TOLERANCE};
pub use qam::QamConstellation;
