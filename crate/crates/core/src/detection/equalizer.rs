use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::lsmr::{lsmr_solve, LinearOperator};
use super::qam::QamConstellation;
use crate::channel::{apply_channel, apply_channel_adjoint, TapGainMatrix};
use crate::error::{check_len, Error, Result};
use crate::waveform::{FrameLayout, SymbolGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EqualizerConfig {
    /// Interference-cancellation passes.
    pub ic_iterations: usize,
    /// LSMR iterations per pass.
    pub lsmr_iterations: usize,
    #[serde(default)]
    pub damping: f64,
}

impl Default for EqualizerConfig {
    fn default() -> Self {
        Self {
            ic_iterations: 5,
            lsmr_iterations: 10,
            damping: 0.0,
        }
    }
}

impl EqualizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ic_iterations == 0 || self.lsmr_iterations == 0 {
            return Err(Error::invalid("equaliser iteration counts must be at least 1"));
        }
        if !(self.damping >= 0.0 && self.damping.is_finite()) {
            return Err(Error::invalid("damping must be finite and nonnegative"));
        }
        Ok(())
    }
}

/// Data symbols to received delay-time samples: grid embedding, waveform
/// modulation, then the time-varying channel.
pub struct LinkOperator<'a> {
    layout: &'a FrameLayout,
    channel: &'a TapGainMatrix,
    data_indices: Vec<usize>,
    grid_len: usize,
}

impl<'a> LinkOperator<'a> {
    pub fn new(layout: &'a FrameLayout, channel: &'a TapGainMatrix) -> Result<Self> {
        check_len(layout.frame_len(), channel.n_samples())?;
        let grid = layout.empty_grid();
        Ok(Self {
            layout,
            channel,
            data_indices: grid.data_indices(),
            grid_len: grid.symbols.len(),
        })
    }
}

impl LinearOperator for LinkOperator<'_> {
    fn nrows(&self) -> usize {
        self.channel.n_samples()
    }

    fn ncols(&self) -> usize {
        self.data_indices.len()
    }

    fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(self.data_indices.len(), x.len())?;
        let mut full = vec![Complex64::default(); self.grid_len];
        for (i, v) in self.data_indices.iter().zip(x) {
            full[*i] = *v;
        }
        apply_channel(&self.layout.modulate_symbols(&full)?, self.channel)
    }

    fn apply_adjoint(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        let full = self.layout.modulate_adjoint(&apply_channel_adjoint(y, self.channel)?)?;
        Ok(self.data_indices.iter().map(|i| full[*i]).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EqualizerOutput {
    /// Symbol grid with soft data estimates and the known pilot cells.
    pub grid: SymbolGrid,
    /// Final soft estimates of the data cells, in data-cell order.
    pub soft: Vec<Complex64>,
    /// Hard decisions on `soft`.
    pub hard: Vec<Complex64>,
    /// Soft estimates after every pass.
    pub passes: Vec<Vec<Complex64>>,
}

/// Delay-time LSMR equalisation with hard-decision interference
/// cancellation.
///
/// The pilot contribution is removed first. Pass 1 solves for all data
/// cells; each later pass cancels the current decisions from the received
/// samples, solves for the correction and adds it back.
pub fn lsmr_ic_equalize(
    y: &[Complex64],
    channel: &TapGainMatrix,
    layout: &FrameLayout,
    cfg: &EqualizerConfig,
    constellation: &QamConstellation,
) -> Result<EqualizerOutput> {
    cfg.validate()?;
    let op = LinkOperator::new(layout, channel)?;
    check_len(op.nrows(), y.len())?;
    let pilot_rx = apply_channel(&layout.pilot_samples()?, channel)?;
    let y_data: Vec<Complex64> = y.iter().zip(&pilot_rx).map(|(a, b)| a - b).collect();

    let mut passes = Vec::with_capacity(cfg.ic_iterations);
    let mut soft = lsmr_solve(&op, &y_data, cfg.lsmr_iterations, cfg.damping)?.x;
    let mut hard: Vec<Complex64> = soft.iter().map(|s| constellation.decide(*s)).collect();
    passes.push(soft.clone());
    for _ in 1..cfg.ic_iterations {
        let reconstructed = op.apply(&hard)?;
        let residual: Vec<Complex64> = y_data.iter().zip(&reconstructed).map(|(a, b)| a - b).collect();
        let delta = lsmr_solve(&op, &residual, cfg.lsmr_iterations, cfg.damping)?.x;
        soft = hard.iter().zip(&delta).map(|(h, d)| h + d).collect();
        hard = soft.iter().map(|s| constellation.decide(*s)).collect();
        passes.push(soft.clone());
    }

    let mut grid = layout.empty_grid();
    grid.fill_data(&soft)?;
    Ok(EqualizerOutput {
        grid,
        soft,
        hard,
        passes,
    })
}

/// Decision-directed post-equalisation noise variance, `mean |x̂ - Q(x̂)|²`.
pub fn decision_noise_variance(soft: &[Complex64], constellation: &QamConstellation) -> f64 {
    if soft.is_empty() {
        return 0.0;
    }
    soft.iter()
        .map(|s| (s - constellation.decide(*s)).norm_sqr())
        .sum::<f64>()
        / soft.len() as f64
}
