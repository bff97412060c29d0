use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::waveform::PilotPattern;

/// Amplitude threshold in units of the per-snapshot noise standard deviation.
pub const DEFAULT_THRESHOLD: f64 = 3.0;

/// Per-tap channel samples read off the impulse pilots.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotEstimate {
    /// `L × N_p`; row `l` holds tap `l` at the instants `pilot_indices[p] + l`.
    pub gains: DMatrix<Complex64>,
    /// Frame sample index of each pilot impulse.
    pub pilot_indices: Vec<usize>,
    pub active_taps: Vec<bool>,
}

impl SnapshotEstimate {
    /// Builds a snapshot with every tap active.
    pub fn new(gains: DMatrix<Complex64>, pilot_indices: Vec<usize>) -> Result<Self> {
        if gains.ncols() != pilot_indices.len() {
            return Err(Error::LengthMismatch {
                expected: pilot_indices.len(),
                got: gains.ncols(),
            });
        }
        let active_taps = vec![true; gains.nrows()];
        Ok(Self {
            gains,
            pilot_indices,
            active_taps,
        })
    }

    pub fn taps(&self) -> usize {
        self.gains.nrows()
    }

    pub fn n_pilots(&self) -> usize {
        self.pilot_indices.len()
    }

    /// Sample instant at which tap `l` of pilot `p` was observed.
    pub fn instant(&self, p: usize, l: usize) -> usize {
        self.pilot_indices[p] + l
    }

    pub fn tap_row(&self, l: usize) -> Vec<Complex64> {
        self.gains.row(l).iter().copied().collect()
    }
}

/// Stage-1 estimate with the default 3σ threshold.
pub fn stage1_estimate(
    r: &[Complex64],
    pattern: &PilotPattern,
    taps: usize,
    noise_var: f64,
) -> Result<SnapshotEstimate> {
    stage1_estimate_with_threshold(r, pattern, taps, noise_var, DEFAULT_THRESHOLD)
}

/// `ĝ_l[p] = r[m_p + l] / A`; a tap is kept iff its mean snapshot power
/// exceeds `(threshold σ_η / A)²`.
pub fn stage1_estimate_with_threshold(
    r: &[Complex64],
    pattern: &PilotPattern,
    taps: usize,
    noise_var: f64,
    threshold: f64,
) -> Result<SnapshotEstimate> {
    let idx = pattern.frame_indices();
    if let Some(last) = idx.last() {
        if last + taps > r.len() {
            return Err(Error::invalid(format!(
                "pilot window ends at {} beyond {} received samples",
                last + taps,
                r.len()
            )));
        }
    }
    let a = pattern.pilot_amplitude;
    let mut gains = DMatrix::from_fn(taps, idx.len(), |l, p| r[idx[p] + l] / a);
    let floor = threshold * threshold * noise_var / (a * a);
    let n_p = idx.len().max(1) as f64;
    let active_taps: Vec<bool> = (0..taps)
        .map(|l| gains.row(l).iter().map(|g| g.norm_sqr()).sum::<f64>() / n_p > floor)
        .collect();
    for (l, active) in active_taps.iter().enumerate() {
        if !active {
            gains.row_mut(l).fill(Complex64::default());
        }
    }
    Ok(SnapshotEstimate {
        gains,
        pilot_indices: idx,
        active_taps,
    })
}
