//! Channel and phase-noise estimation.
//!
//! Stage 1 reads the effective channel directly off the received impulse
//! pilots ([`stage1_estimate`]). Stage 2 interpolates those snapshots over
//! the whole frame with a Wiener filter built from the joint Doppler and
//! phase-noise correlation ([`build_wiener`], [`apply_wiener`]). The BEM and
//! spline interpolators are baselines operating on the same snapshots.
//!
//! Tap `l` of a pilot at frame sample `m_p` is observed at `m_p + l`; every
//! interpolator accounts for that lag.

mod baselines;
mod snapshot;
mod wiener;

pub use baselines::{bem_basis_size, bem_estimate, spline_estimate, NaturalCubicSpline};
pub use snapshot::{stage1_estimate, stage1_estimate_with_threshold, SnapshotEstimate, DEFAULT_THRESHOLD};
pub use wiener::{
    apply_wiener, build_k_d, build_k_psi, build_wiener, hermitian_pinv, CorrelationModel, WienerCache,
    WienerFilterBank,
};

use crate::channel::TapGainMatrix;
use crate::error::{check_len, Error, Result};

/// `‖Ĝ - G‖²_F / ‖G‖²_F`.
pub fn nmse(estimate: &TapGainMatrix, truth: &TapGainMatrix) -> Result<f64> {
    check_len(truth.n_samples(), estimate.n_samples())?;
    check_len(truth.taps(), estimate.taps())?;
    let reference = truth.frobenius_sqr();
    if reference == 0.0 {
        return Err(Error::invalid("NMSE reference has zero norm"));
    }
    let err: f64 = estimate
        .as_slice()
        .iter()
        .zip(truth.as_slice())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    Ok(err / reference)
}
