//! OTFS and OFDM frame construction.
//!
//! Both waveforms carry a delay-time impulse pilot. OTFS places a single
//! pilot at delay-Doppler cell `(0, 0)`, which turns into an identical
//! impulse at the start of every M-sample time block, surrounded by
//! `L - 1` guard rows on each side (circularly). OFDM appends a
//! `2L - 1` sample segment after each symbol holding an impulse flanked by
//! zeros. The OFDM symbol count is chosen so both frames occupy roughly the
//! same number of samples.
//!
//! Grids are stored column-major (`index = col * rows + row`), i.e. the
//! `vec(X)` ordering: for OTFS the column is the Doppler bin and the row is
//! the delay bin, for OFDM the column is the symbol and the row the subcarrier.

use std::ops::{Deref, DerefMut};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::numerics::{dft_in_place, doppler_block_transform_in_place};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WaveformKind {
    Otfs,
    Ofdm,
}

impl std::fmt::Display for WaveformKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            WaveformKind::Otfs => "otfs",
            WaveformKind::Ofdm => "ofdm",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellKind {
    Data,
    Pilot,
    Guard,
}

/// Frame dimensions shared by both waveforms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameConfig {
    /// Delay bins (OTFS) / subcarriers (OFDM).
    pub m: usize,
    /// Doppler bins of the OTFS frame.
    pub n: usize,
    pub n_cp: usize,
    /// Subcarrier spacing in Hz.
    pub subcarrier_spacing: f64,
    /// Cascade channel length in taps used for pilot guards and estimation.
    pub channel_len: usize,
}

impl FrameConfig {
    pub fn new(m: usize, n: usize, n_cp: usize, subcarrier_spacing: f64, channel_len: usize) -> Self {
        Self {
            m,
            n,
            n_cp,
            subcarrier_spacing,
            channel_len,
        }
    }

    /// `T_s = 1 / (M Δf)`; also the delay resolution.
    pub fn sample_period(&self) -> f64 {
        1.0 / (self.m as f64 * self.subcarrier_spacing)
    }

    pub fn bandwidth(&self) -> f64 {
        self.m as f64 * self.subcarrier_spacing
    }

    /// Doppler resolution `1 / (N M T_s)`.
    pub fn doppler_resolution(&self) -> f64 {
        1.0 / (self.n as f64 * self.m as f64 * self.sample_period())
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 || self.channel_len == 0 {
            return Err(Error::invalid("M, N and L must be positive"));
        }
        if !(self.subcarrier_spacing > 0.0 && self.subcarrier_spacing.is_finite()) {
            return Err(Error::invalid("subcarrier spacing must be positive"));
        }
        if self.n_cp + 1 < self.channel_len {
            return Err(Error::invalid(format!(
                "cyclic prefix {} shorter than channel memory {}",
                self.n_cp,
                self.channel_len - 1
            )));
        }
        Ok(())
    }

    /// Samples in one OFDM symbol including CP and pilot segment.
    pub fn ofdm_block_len(&self) -> usize {
        self.m + self.n_cp + 2 * self.channel_len - 1
    }

    pub fn ofdm_symbols(&self) -> usize {
        ofdm_symbol_count(self.m, self.n, self.n_cp, self.channel_len)
    }

    pub fn frame_len(&self, kind: WaveformKind) -> usize {
        match kind {
            WaveformKind::Otfs => self.m * self.n + self.n_cp,
            WaveformKind::Ofdm => self.ofdm_symbols() * self.ofdm_block_len(),
        }
    }
}

/// OFDM symbol count that keeps the OFDM frame about as long as the OTFS
/// frame once CPs and pilot segments are counted:
/// `⌈(MN + N_cp) / (M + N_cp + 2L - 1)⌉`.
pub fn ofdm_symbol_count(m: usize, n: usize, n_cp: usize, l: usize) -> usize {
    (m * n + n_cp).div_ceil(m + n_cp + 2 * l - 1)
}

/// Symbols plus per-cell roles.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolGrid {
    pub rows: usize,
    pub cols: usize,
    pub symbols: Vec<Complex64>,
    pub layout: Vec<CellKind>,
}

impl SymbolGrid {
    pub fn zeros(rows: usize, cols: usize, layout: Vec<CellKind>) -> Self {
        Self {
            rows,
            cols,
            symbols: vec![Complex64::default(); rows * cols],
            layout,
        }
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.symbols[col * self.rows + row]
    }

    pub fn set(&mut self, row: usize, col: usize, v: Complex64) {
        self.symbols[col * self.rows + row] = v;
    }

    pub fn data_indices(&self) -> Vec<usize> {
        self.layout
            .iter()
            .enumerate()
            .filter(|(_, k)| **k == CellKind::Data)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn data_symbols(&self) -> Vec<Complex64> {
        self.data_indices().into_iter().map(|i| self.symbols[i]).collect()
    }

    /// Writes `data` into the data cells in storage order.
    pub fn fill_data(&mut self, data: &[Complex64]) -> Result<()> {
        let idx = self.data_indices();
        check_len(idx.len(), data.len())?;
        for (i, v) in idx.into_iter().zip(data) {
            self.symbols[i] = *v;
        }
        Ok(())
    }
}

/// OTFS payload: rows are delay bins, columns Doppler bins.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayDopplerGrid(pub SymbolGrid);

/// OFDM payload: rows are subcarriers, columns OFDM symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeFrequencyGrid(pub SymbolGrid);

impl Deref for DelayDopplerGrid {
    type Target = SymbolGrid;
    fn deref(&self) -> &SymbolGrid {
        &self.0
    }
}

impl DerefMut for DelayDopplerGrid {
    fn deref_mut(&mut self) -> &mut SymbolGrid {
        &mut self.0
    }
}

impl Deref for TimeFrequencyGrid {
    type Target = SymbolGrid;
    fn deref(&self) -> &SymbolGrid {
        &self.0
    }
}

impl DerefMut for TimeFrequencyGrid {
    fn deref_mut(&mut self) -> &mut SymbolGrid {
        &mut self.0
    }
}

/// Delay-time impulse pilot geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotPattern {
    pub kind: WaveformKind,
    /// Pilot positions in the CP-free delay-time stream (OTFS) or in the
    /// frame (OFDM, which has no frame-level CP).
    pub pilot_indices: Vec<usize>,
    /// Offset converting stream indices into frame sample indices.
    pub frame_offset: usize,
    /// Zero samples on each side of the impulse.
    pub guard_len: usize,
    /// Delay-time impulse amplitude, `sqrt(σ_p²)`.
    pub pilot_amplitude: f64,
    pub channel_len: usize,
}

impl PilotPattern {
    pub fn n_pilots(&self) -> usize {
        self.pilot_indices.len()
    }

    pub fn pilot_power(&self) -> f64 {
        self.pilot_amplitude * self.pilot_amplitude
    }

    /// Pilot positions as sample indices of the transmitted frame.
    pub fn frame_indices(&self) -> Vec<usize> {
        self.pilot_indices.iter().map(|p| p + self.frame_offset).collect()
    }
}

/// Default pilot power: ten times the data power, scaled by the pilot
/// segment length `2L - 1`.
pub fn default_pilot_power(channel_len: usize) -> f64 {
    10.0 * (2 * channel_len - 1) as f64
}

pub fn build_pilot_pattern(kind: WaveformKind, cfg: &FrameConfig, pilot_power: f64) -> Result<PilotPattern> {
    cfg.validate()?;
    let l = cfg.channel_len;
    if cfg.m < 2 * (2 * l - 1) {
        return Err(Error::invalid(format!(
            "M = {} leaves no room for pilot and guards with L = {}",
            cfg.m, l
        )));
    }
    if !(pilot_power > 0.0 && pilot_power.is_finite()) {
        return Err(Error::invalid("pilot power must be positive"));
    }
    let (pilot_indices, frame_offset) = match kind {
        WaveformKind::Otfs => ((0..cfg.n).map(|p| p * cfg.m).collect(), cfg.n_cp),
        WaveformKind::Ofdm => {
            let block = cfg.ofdm_block_len();
            let idx = (0..cfg.ofdm_symbols())
                .map(|k| k * block + cfg.n_cp + cfg.m + l - 1)
                .collect();
            (idx, 0)
        }
    };
    Ok(PilotPattern {
        kind,
        pilot_indices,
        frame_offset,
        guard_len: l - 1,
        pilot_amplitude: pilot_power.sqrt(),
        channel_len: l,
    })
}

/// OTFS cell roles: pilot at (0, 0), the rest of delay row 0 and delay rows
/// `1..L` and `M-L+1..M` are guards.
pub fn otfs_layout(cfg: &FrameConfig) -> Vec<CellKind> {
    let (m, l) = (cfg.m, cfg.channel_len);
    let mut layout = vec![CellKind::Data; m * cfg.n];
    for col in 0..cfg.n {
        for row in 0..m {
            let guard = row == 0 || row < l || row + l > m;
            if guard {
                layout[col * m + row] = CellKind::Guard;
            }
        }
    }
    layout[0] = CellKind::Pilot;
    layout
}

impl DelayDopplerGrid {
    /// Empty OTFS grid with the pilot already placed.
    pub fn with_pilot(cfg: &FrameConfig, pattern: &PilotPattern) -> Self {
        let mut g = SymbolGrid::zeros(cfg.m, cfg.n, otfs_layout(cfg));
        g.symbols[0] = Complex64::new((cfg.n as f64).sqrt() * pattern.pilot_amplitude, 0.0);
        DelayDopplerGrid(g)
    }

    pub fn data_capacity(cfg: &FrameConfig) -> usize {
        otfs_layout(cfg).iter().filter(|k| **k == CellKind::Data).count()
    }
}

impl TimeFrequencyGrid {
    pub fn new(cfg: &FrameConfig) -> Self {
        let cols = cfg.ofdm_symbols();
        TimeFrequencyGrid(SymbolGrid::zeros(cfg.m, cols, vec![CellKind::Data; cfg.m * cols]))
    }

    pub fn data_capacity(cfg: &FrameConfig) -> usize {
        cfg.m * cfg.ofdm_symbols()
    }
}

fn check_dims(grid: &SymbolGrid, rows: usize, cols: usize) -> Result<()> {
    if grid.rows != rows || grid.cols != cols || grid.symbols.len() != rows * cols {
        return Err(Error::invalid(format!(
            "grid is {}x{}, expected {}x{}",
            grid.rows, grid.cols, rows, cols
        )));
    }
    Ok(())
}

/// `A_cp (F_N^H ⊗ I_M) vec(X)`: Doppler-axis IDFT then a single frame CP.
pub fn otfs_modulate(grid: &DelayDopplerGrid, cfg: &FrameConfig) -> Result<Vec<Complex64>> {
    check_dims(grid, cfg.m, cfg.n)?;
    otfs_linear_modulate(&grid.symbols, cfg)
}

fn otfs_linear_modulate(symbols: &[Complex64], cfg: &FrameConfig) -> Result<Vec<Complex64>> {
    let mn = cfg.m * cfg.n;
    check_len(mn, symbols.len())?;
    let mut body = symbols.to_vec();
    doppler_block_transform_in_place(&mut body, cfg.m, cfg.n, true)?;
    let mut out = Vec::with_capacity(mn + cfg.n_cp);
    out.extend_from_slice(&body[mn - cfg.n_cp..]);
    out.extend_from_slice(&body);
    Ok(out)
}

fn otfs_linear_adjoint(samples: &[Complex64], cfg: &FrameConfig) -> Result<Vec<Complex64>> {
    let mn = cfg.m * cfg.n;
    check_len(mn + cfg.n_cp, samples.len())?;
    let mut body = samples[cfg.n_cp..].to_vec();
    for (k, v) in samples[..cfg.n_cp].iter().enumerate() {
        body[mn - cfg.n_cp + k] += v;
    }
    doppler_block_transform_in_place(&mut body, cfg.m, cfg.n, false)?;
    Ok(body)
}

/// Strips the CP and applies `F_N ⊗ I_M`.
pub fn otfs_demodulate(samples: &[Complex64], cfg: &FrameConfig) -> Result<DelayDopplerGrid> {
    let mn = cfg.m * cfg.n;
    check_len(mn + cfg.n_cp, samples.len())?;
    let mut body = samples[cfg.n_cp..].to_vec();
    doppler_block_transform_in_place(&mut body, cfg.m, cfg.n, false)?;
    Ok(DelayDopplerGrid(SymbolGrid {
        rows: cfg.m,
        cols: cfg.n,
        symbols: body,
        layout: otfs_layout(cfg),
    }))
}

fn ofdm_linear_modulate(symbols: &[Complex64], cfg: &FrameConfig) -> Result<Vec<Complex64>> {
    let (m, cp) = (cfg.m, cfg.n_cp);
    let count = cfg.ofdm_symbols();
    check_len(m * count, symbols.len())?;
    let block = cfg.ofdm_block_len();
    let mut out = vec![Complex64::default(); count * block];
    let mut col = vec![Complex64::default(); m];
    for k in 0..count {
        col.copy_from_slice(&symbols[k * m..(k + 1) * m]);
        dft_in_place(&mut col, true)?;
        let start = k * block;
        out[start..start + cp].copy_from_slice(&col[m - cp..]);
        out[start + cp..start + cp + m].copy_from_slice(&col);
    }
    Ok(out)
}

fn ofdm_linear_adjoint(samples: &[Complex64], cfg: &FrameConfig) -> Result<Vec<Complex64>> {
    let (m, cp) = (cfg.m, cfg.n_cp);
    let count = cfg.ofdm_symbols();
    let block = cfg.ofdm_block_len();
    check_len(count * block, samples.len())?;
    let mut out = vec![Complex64::default(); m * count];
    for k in 0..count {
        let start = k * block;
        let col = &mut out[k * m..(k + 1) * m];
        col.copy_from_slice(&samples[start + cp..start + cp + m]);
        for i in 0..cp {
            col[m - cp + i] += samples[start + i];
        }
        dft_in_place(col, false)?;
    }
    Ok(out)
}

fn ofdm_pilot_samples(cfg: &FrameConfig, pattern: &PilotPattern) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); cfg.frame_len(WaveformKind::Ofdm)];
    for idx in pattern.frame_indices() {
        out[idx] = Complex64::new(pattern.pilot_amplitude, 0.0);
    }
    out
}

/// Per symbol: M-point IDFT, CP, then the `2L - 1` sample pilot segment.
pub fn ofdm_modulate(
    grid: &TimeFrequencyGrid,
    cfg: &FrameConfig,
    pattern: &PilotPattern,
) -> Result<Vec<Complex64>> {
    check_dims(grid, cfg.m, cfg.ofdm_symbols())?;
    let mut out = ofdm_linear_modulate(&grid.symbols, cfg)?;
    for (o, p) in out.iter_mut().zip(ofdm_pilot_samples(cfg, pattern)) {
        *o += p;
    }
    Ok(out)
}

/// Skips pilot segments, strips each CP and applies the M-point DFT.
pub fn ofdm_demodulate(
    samples: &[Complex64],
    cfg: &FrameConfig,
    _pattern: &PilotPattern,
) -> Result<TimeFrequencyGrid> {
    let (m, cp) = (cfg.m, cfg.n_cp);
    let count = cfg.ofdm_symbols();
    let block = cfg.ofdm_block_len();
    check_len(count * block, samples.len())?;
    let mut grid = TimeFrequencyGrid::new(cfg);
    for k in 0..count {
        let start = k * block + cp;
        let col = &mut grid.symbols[k * m..(k + 1) * m];
        col.copy_from_slice(&samples[start..start + m]);
        dft_in_place(col, false)?;
    }
    Ok(grid)
}

/// The linear symbol-to-sample map of one waveform (pilots excluded) and
/// its adjoint, as used by the equaliser.
#[derive(Debug, Clone)]
pub struct FrameLayout {
    pub kind: WaveformKind,
    pub cfg: FrameConfig,
    pub pattern: PilotPattern,
}

impl FrameLayout {
    pub fn new(kind: WaveformKind, cfg: FrameConfig, pilot_power: f64) -> Result<Self> {
        let pattern = build_pilot_pattern(kind, &cfg, pilot_power)?;
        Ok(Self { kind, cfg, pattern })
    }

    pub fn frame_len(&self) -> usize {
        self.cfg.frame_len(self.kind)
    }

    pub fn grid_shape(&self) -> (usize, usize) {
        match self.kind {
            WaveformKind::Otfs => (self.cfg.m, self.cfg.n),
            WaveformKind::Ofdm => (self.cfg.m, self.cfg.ofdm_symbols()),
        }
    }

    /// Empty grid with pilots (if any live in the symbol domain) in place.
    pub fn empty_grid(&self) -> SymbolGrid {
        match self.kind {
            WaveformKind::Otfs => DelayDopplerGrid::with_pilot(&self.cfg, &self.pattern).0,
            WaveformKind::Ofdm => TimeFrequencyGrid::new(&self.cfg).0,
        }
    }

    pub fn data_capacity(&self) -> usize {
        match self.kind {
            WaveformKind::Otfs => DelayDopplerGrid::data_capacity(&self.cfg),
            WaveformKind::Ofdm => TimeFrequencyGrid::data_capacity(&self.cfg),
        }
    }

    /// Linear map from the full symbol grid vector to frame samples,
    /// ignoring any time-domain pilot segment.
    pub fn modulate_symbols(&self, symbols: &[Complex64]) -> Result<Vec<Complex64>> {
        match self.kind {
            WaveformKind::Otfs => otfs_linear_modulate(symbols, &self.cfg),
            WaveformKind::Ofdm => ofdm_linear_modulate(symbols, &self.cfg),
        }
    }

    /// Hermitian adjoint of [`Self::modulate_symbols`].
    pub fn modulate_adjoint(&self, samples: &[Complex64]) -> Result<Vec<Complex64>> {
        match self.kind {
            WaveformKind::Otfs => otfs_linear_adjoint(samples, &self.cfg),
            WaveformKind::Ofdm => ofdm_linear_adjoint(samples, &self.cfg),
        }
    }

    /// Full transmit frame for a grid.
    pub fn modulate(&self, grid: &SymbolGrid) -> Result<Vec<Complex64>> {
        match self.kind {
            WaveformKind::Otfs => otfs_modulate(&DelayDopplerGrid(grid.clone()), &self.cfg),
            WaveformKind::Ofdm => ofdm_modulate(&TimeFrequencyGrid(grid.clone()), &self.cfg, &self.pattern),
        }
    }

    /// Frame samples contributed by the pilots alone.
    pub fn pilot_samples(&self) -> Result<Vec<Complex64>> {
        match self.kind {
            WaveformKind::Otfs => self.modulate(&self.empty_grid()),
            WaveformKind::Ofdm => Ok(ofdm_pilot_samples(&self.cfg, &self.pattern)),
        }
    }

    pub fn demodulate(&self, samples: &[Complex64]) -> Result<SymbolGrid> {
        match self.kind {
            WaveformKind::Otfs => Ok(otfs_demodulate(samples, &self.cfg)?.0),
            WaveformKind::Ofdm => Ok(ofdm_demodulate(samples, &self.cfg, &self.pattern)?.0),
        }
    }
}
