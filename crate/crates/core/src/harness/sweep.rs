use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{ChannelNormalization, EstimatorKind, OscillatorConfig, SimConfig};
use super::frame::{FrameOutcome, Simulation};
use crate::channel::RisStrategy;
use crate::error::{Error, Result};
use crate::estimation::WienerCache;
use crate::phase_noise::OscillatorKind;
use crate::waveform::WaveformKind;

/// Execution options that do not affect the simulated numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    /// Worker threads; `0` uses the global rayon default.
    pub workers: usize,
    /// Record `wall_time_s` (which makes output non-reproducible).
    pub timing: bool,
}

/// Aggregated result of one operating point, flattened for CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub waveform: WaveformKind,
    pub estimator: EstimatorKind,
    pub m: usize,
    pub n: usize,
    pub n_cp: usize,
    pub subcarrier_spacing: f64,
    pub channel_len: usize,
    pub delay_spread: f64,
    pub doppler_hz: f64,
    pub q: usize,
    pub ris_strategy: RisStrategy,
    pub sinusoids_per_path: usize,
    pub normalization: ChannelNormalization,
    /// `none`, `fro` or `cpll`.
    pub osc_kind: String,
    pub beta_pn: f64,
    pub f_pll: f64,
    pub qam_order: usize,
    pub coded: bool,
    #[serde(with = "super::snr_serde")]
    pub snr_db: f64,
    pub pilot_power: f64,
    pub k_over: f64,
    pub threshold: f64,
    pub ic_iterations: usize,
    pub lsmr_iterations: usize,
    pub damping: f64,
    pub frames: usize,
    pub base_seed: u64,
    pub nmse_mean: f64,
    pub ber: f64,
    pub coded_ber: Option<f64>,
    pub bit_errors: u64,
    pub bit_count: u64,
    pub coded_bit_errors: u64,
    pub coded_bit_count: u64,
    pub frames_run: usize,
    pub wall_time_s: Option<f64>,
    /// SHA-256 (first 16 bytes, hex) over every frame's seed and metrics.
    pub digest: String,
}

fn frame_seed(cfg: &SimConfig, index: usize) -> u64 {
    cfg.base_seed.wrapping_add(index as u64)
}

/// Runs every frame of one operating point and returns the per-frame
/// outcomes in frame order.
pub fn run_frames(cfg: &SimConfig, options: RunOptions, cache: &WienerCache) -> Result<Vec<FrameOutcome>> {
    let sim = Simulation::with_cache(cfg, cache)?;
    let job = || {
        (0..cfg.frames)
            .into_par_iter()
            .map(|i| sim.run_frame(frame_seed(cfg, i)))
            .collect::<Result<Vec<_>>>()
    };
    if options.workers == 0 {
        return job();
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(options.workers)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?
        .install(job)
}

/// Aggregates one operating point: BER as total errors over total bits,
/// NMSE as the per-frame mean.
pub fn run_point(cfg: &SimConfig, options: RunOptions, cache: &WienerCache) -> Result<MetricsRecord> {
    let start = Instant::now();
    let outcomes = run_frames(cfg, options, cache)?;
    let elapsed = start.elapsed().as_secs_f64();

    let mut hasher = Sha256::new();
    let (mut be, mut bc, mut ce, mut cc, mut nmse_sum) = (0u64, 0u64, 0u64, 0u64, 0.0);
    for (i, o) in outcomes.iter().enumerate() {
        hasher.update(frame_seed(cfg, i).to_le_bytes());
        hasher.update(o.nmse.to_bits().to_le_bytes());
        for v in [o.bit_errors, o.bit_count, o.coded_bit_errors, o.coded_bit_count] {
            hasher.update((v as u64).to_le_bytes());
        }
        be += o.bit_errors as u64;
        bc += o.bit_count as u64;
        ce += o.coded_bit_errors as u64;
        cc += o.coded_bit_count as u64;
        nmse_sum += o.nmse;
    }
    let digest: String = hasher.finalize()[..16].iter().map(|b| format!("{b:02x}")).collect();
    let osc = cfg.oscillator();
    Ok(MetricsRecord {
        waveform: cfg.waveform,
        estimator: cfg.estimator,
        m: cfg.frame.m,
        n: cfg.frame.n,
        n_cp: cfg.frame.n_cp,
        subcarrier_spacing: cfg.frame.subcarrier_spacing,
        channel_len: cfg.frame.channel_len,
        delay_spread: cfg.channel.delay_spread,
        doppler_hz: cfg.max_doppler()?,
        q: cfg.channel.q,
        ris_strategy: cfg.channel.ris_strategy,
        sinusoids_per_path: cfg.channel.sinusoids_per_path,
        normalization: cfg.channel.normalization,
        osc_kind: cfg.osc.as_ref().map_or("none".into(), |o| o.kind.to_string()),
        beta_pn: osc.beta_pn,
        f_pll: osc.f_pll,
        qam_order: cfg.qam_order,
        coded: cfg.coding.is_some(),
        snr_db: cfg.snr_db,
        pilot_power: cfg.pilot_power(),
        k_over: cfg.k_over,
        threshold: cfg.threshold,
        ic_iterations: cfg.equalizer.ic_iterations,
        lsmr_iterations: cfg.equalizer.lsmr_iterations,
        damping: cfg.equalizer.damping,
        frames: cfg.frames,
        base_seed: cfg.base_seed,
        nmse_mean: nmse_sum / outcomes.len() as f64,
        ber: be as f64 / bc as f64,
        coded_ber: (cc > 0).then(|| ce as f64 / cc as f64),
        bit_errors: be,
        bit_count: bc,
        coded_bit_errors: ce,
        coded_bit_count: cc,
        frames_run: outcomes.len(),
        wall_time_s: options.timing.then_some(elapsed),
        digest,
    })
}

/// Values swept over; an empty list keeps the template's value.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepAxes {
    pub waveform: Vec<WaveformKind>,
    pub estimator: Vec<EstimatorKind>,
    pub q: Vec<usize>,
    pub beta_pn: Vec<f64>,
    pub snr_db: Vec<f64>,
}

impl SweepAxes {
    pub fn is_empty(&self) -> bool {
        self.waveform.is_empty()
            && self.estimator.is_empty()
            && self.q.is_empty()
            && self.beta_pn.is_empty()
            && self.snr_db.is_empty()
    }

    /// Parses `name=values` where values is `start:step:stop` (inclusive)
    /// or a comma-separated list.
    pub fn add(&mut self, spec: &str) -> Result<()> {
        let (name, values) = spec
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("axis `{spec}` is not name=values")))?;
        let values = values.trim();
        match name.trim() {
            "snr" | "snr_db" => self.snr_db.extend(parse_numbers(values)?),
            "beta" | "beta_pn" => self.beta_pn.extend(parse_numbers(values)?),
            "q" => {
                for v in parse_numbers(values)? {
                    if v < 1.0 || v.fract() != 0.0 {
                        return Err(Error::Config(format!("Q value {v} is not a positive integer")));
                    }
                    self.q.push(v as usize);
                }
            }
            "estimator" => {
                for v in values.split(',') {
                    self.estimator.push(v.trim().parse()?);
                }
            }
            "waveform" => {
                for v in values.split(',') {
                    self.waveform.push(match v.trim() {
                        "otfs" => WaveformKind::Otfs,
                        "ofdm" => WaveformKind::Ofdm,
                        other => return Err(Error::Config(format!("unknown waveform `{other}`"))),
                    });
                }
            }
            other => return Err(Error::Config(format!("unknown sweep axis `{other}`"))),
        }
        Ok(())
    }

    /// Cartesian product over the template, waveform outermost and SNR
    /// innermost.
    pub fn expand(&self, template: &SimConfig) -> Vec<SimConfig> {
        fn or<T: Clone>(v: &[T], d: T) -> Vec<T> {
            if v.is_empty() {
                vec![d]
            } else {
                v.to_vec()
            }
        }
        let beta_default = template.osc.as_ref().map(|o| o.beta_pn);
        let mut out = Vec::new();
        for w in or(&self.waveform, template.waveform) {
            for e in or(&self.estimator, template.estimator) {
                for q in or(&self.q, template.channel.q) {
                    for beta in or(&self.beta_pn.iter().map(|b| Some(*b)).collect::<Vec<_>>(), beta_default) {
                        for snr in or(&self.snr_db, template.snr_db) {
                            let mut cfg = template.clone();
                            cfg.waveform = w;
                            cfg.estimator = e;
                            cfg.channel.q = q;
                            cfg.snr_db = snr;
                            if let Some(b) = beta {
                                let osc = cfg.osc.get_or_insert(OscillatorConfig {
                                    kind: OscillatorKind::Fro,
                                    beta_pn: b,
                                    f_pll: 0.0,
                                });
                                osc.beta_pn = b;
                            }
                            out.push(cfg);
                        }
                    }
                }
            }
        }
        out
    }
}

fn parse_numbers(values: &str) -> Result<Vec<f64>> {
    let num = |s: &str| -> Result<f64> {
        match s.trim() {
            "inf" => Ok(f64::INFINITY),
            t => t.parse().map_err(|_| Error::Config(format!("`{t}` is not a number"))),
        }
    };
    let parts: Vec<&str> = values.split(':').collect();
    match parts.as_slice() {
        [start, step, stop] => {
            let (start, step, stop) = (num(start)?, num(step)?, num(stop)?);
            if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
                return Err(Error::Config(format!("bad range `{values}`")));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|i| start + step * i as f64).collect())
        }
        [_] => values.split(',').map(num).collect(),
        _ => Err(Error::Config(format!("bad axis values `{values}`"))),
    }
}

/// Runs every point of the sweep, sharing filter banks between points.
pub fn run_sweep(template: &SimConfig, axes: &SweepAxes, options: RunOptions) -> Result<Vec<MetricsRecord>> {
    if axes.is_empty() {
        return Err(Error::Config("sweep needs at least one axis".into()));
    }
    let cache = WienerCache::new();
    axes.expand(template)
        .iter()
        .map(|cfg| run_point(cfg, options, &cache))
        .collect()
}
