//! Doubly-selective RIS cascade channels.
//!
//! Every RIS element sees two independent links (transmitter to element and
//! element to receiver). Each link is a sparse set of paths with integer
//! sample delays drawn from the TDL-C power-delay profile and fractional
//! Jakes Doppler shifts. The per-element cascade is the delay convolution of
//! the two links evaluated at the same time index; the receiver sees the
//! reflection-weighted sum over elements, reduced to a per-sample tap-gain
//! matrix `g[n, l]`.

use std::f64::consts::PI;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// TDL-C normalised delays and powers (dB), 24 taps.
pub const TDL_C: [(f64, f64); 24] = [
    (0.0, -4.4),
    (0.2099, -1.2),
    (0.2219, -3.5),
    (0.2329, -5.2),
    (0.2176, -2.5),
    (0.6366, 0.0),
    (0.6448, -2.2),
    (0.6560, -3.9),
    (0.6584, -7.4),
    (0.7935, -7.1),
    (0.8213, -10.7),
    (0.9336, -11.1),
    (1.2285, -5.1),
    (1.3083, -6.8),
    (2.1704, -8.7),
    (2.7105, -13.2),
    (4.2589, -13.9),
    (4.6003, -13.9),
    (5.4902, -15.8),
    (5.6077, -17.1),
    (6.3065, -16.0),
    (6.6374, -15.7),
    (7.0427, -21.6),
    (8.6523, -22.8),
];

/// A tapped-delay-line power-delay profile with normalised delays.
#[derive(Debug, Clone, PartialEq)]
pub struct TdlProfile {
    pub taps: Vec<(f64, f64)>,
}

impl TdlProfile {
    pub fn tdl_c() -> Self {
        Self { taps: TDL_C.to_vec() }
    }

    pub fn max_normalized_delay(&self) -> f64 {
        self.taps.iter().map(|t| t.0).fold(0.0, f64::max)
    }

    /// Largest integer tap index after scaling and rounding.
    pub fn max_tap(&self, delay_spread: f64, sample_period: f64) -> usize {
        (self.max_normalized_delay() * delay_spread / sample_period).round() as usize
    }

    /// Per-tap linear powers normalised to unit sum.
    pub fn linear_powers(&self) -> Vec<f64> {
        let p: Vec<f64> = self.taps.iter().map(|t| 10f64.powf(t.1 / 10.0)).collect();
        let total: f64 = p.iter().sum();
        p.into_iter().map(|v| v / total).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Path {
    pub gain: Complex64,
    pub delay_tap: usize,
    /// Doppler shift in Hz.
    pub doppler: f64,
}

/// Paths of one link.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PathSet {
    pub paths: Vec<Path>,
}

impl PathSet {
    /// Number of delay taps spanned, `max delay + 1`.
    pub fn tap_count(&self) -> usize {
        self.paths.iter().map(|p| p.delay_tap + 1).max().unwrap_or(0)
    }

    pub fn total_power(&self) -> f64 {
        self.paths.iter().map(|p| p.gain.norm_sqr()).sum()
    }

    /// Per-tap time series `x[n, l] = Σ_{p: delay = l} gain_p e^{j2πν_p n T_s}`,
    /// row-major with `tap_count()` columns.
    pub fn tap_series(&self, n_samples: usize, sample_period: f64) -> Vec<Complex64> {
        let taps = self.tap_count();
        let mut out = vec![Complex64::default(); n_samples * taps];
        for p in &self.paths {
            let omega = 2.0 * PI * p.doppler * sample_period;
            let step = Complex64::from_polar(1.0, omega);
            let mut z = p.gain;
            for n in 0..n_samples {
                // resynchronise the rotating phasor to keep round-off bounded
                if n % 32 == 0 {
                    z = p.gain * Complex64::from_polar(1.0, omega * n as f64);
                }
                out[n * taps + p.delay_tap] += z;
                z *= step;
            }
        }
        out
    }
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(s * re, s * im)
}

/// Draws TDL path gains with zero Doppler. Delays are the profile delays
/// scaled by `delay_spread` and rounded to whole samples; gains are
/// circularly-symmetric Gaussian with the profile powers (unit total).
pub fn sample_tdl_paths<R: Rng + ?Sized>(
    profile: &TdlProfile,
    delay_spread: f64,
    sample_period: f64,
    rng: &mut R,
) -> PathSet {
    let powers = profile.linear_powers();
    let paths = profile
        .taps
        .iter()
        .zip(powers)
        .map(|(&(delay, _), power)| Path {
            gain: complex_gaussian(rng, power),
            delay_tap: (delay * delay_spread / sample_period).round() as usize,
            doppler: 0.0,
        })
        .collect();
    PathSet { paths }
}

/// Jakes Dopplers `f_D cos(α)`, `α ~ U[0, 2π)`.
pub fn sample_jakes_doppler<R: Rng + ?Sized>(path_count: usize, max_doppler: f64, rng: &mut R) -> Vec<f64> {
    (0..path_count)
        .map(|_| max_doppler * (2.0 * PI * rng.random::<f64>()).cos())
        .collect()
}

/// Parameters of one hop's statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkModel {
    pub profile: TdlProfile,
    pub delay_spread: f64,
    pub max_doppler: f64,
    /// Independent Jakes sinusoids per TDL path (each carries `1/S` of the power).
    pub sinusoids_per_path: usize,
}

impl LinkModel {
    pub fn tap_count(&self, sample_period: f64) -> usize {
        self.profile.max_tap(self.delay_spread, sample_period) + 1
    }

    pub fn sample<R: Rng + ?Sized>(&self, sample_period: f64, rng: &mut R) -> PathSet {
        let base = sample_tdl_paths(&self.profile, self.delay_spread, sample_period, rng);
        let s = self.sinusoids_per_path.max(1);
        let mut paths = Vec::with_capacity(base.paths.len() * s);
        for p in base.paths {
            if s == 1 {
                let doppler = sample_jakes_doppler(1, self.max_doppler, rng)[0];
                paths.push(Path { doppler, ..p });
                continue;
            }
            let power = p.gain.norm_sqr();
            for doppler in sample_jakes_doppler(s, self.max_doppler, rng) {
                paths.push(Path {
                    gain: complex_gaussian(rng, power / s as f64),
                    delay_tap: p.delay_tap,
                    doppler,
                });
            }
        }
        PathSet { paths }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RisElement {
    pub uplink: PathSet,
    pub downlink: PathSet,
    /// Unit-modulus reflection coefficient.
    pub reflection: Complex64,
}

impl RisElement {
    /// Cascade taps of this element at sample 0 (no reflection applied).
    pub fn cascade_at_origin(&self) -> Vec<Complex64> {
        let u = self.uplink.tap_series(1, 1.0);
        let v = self.downlink.tap_series(1, 1.0);
        convolve(&u, &v)
    }
}

fn convolve(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Complex64::default(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct RisChannel {
    pub elements: Vec<RisElement>,
}

impl RisChannel {
    /// Draws `q` elements with independent uplink and downlink realisations
    /// and all reflection coefficients set to one.
    pub fn sample<R: Rng + ?Sized>(
        q: usize,
        uplink: &LinkModel,
        downlink: &LinkModel,
        sample_period: f64,
        rng: &mut R,
    ) -> Self {
        let elements = (0..q)
            .map(|_| RisElement {
                uplink: uplink.sample(sample_period, rng),
                downlink: downlink.sample(sample_period, rng),
                reflection: Complex64::new(1.0, 0.0),
            })
            .collect();
        Self { elements }
    }

    pub fn q(&self) -> usize {
        self.elements.len()
    }

    /// Cascade length `L_u + L_v - 1` over all elements.
    pub fn cascade_len(&self) -> usize {
        self.elements
            .iter()
            .map(|e| (e.uplink.tap_count() + e.downlink.tap_count()).saturating_sub(1))
            .max()
            .unwrap_or(0)
    }

    /// Dominant tap of the combined channel: the one with the largest
    /// summed element power at sample 0.
    pub fn dominant_tap(&self) -> usize {
        let mut power = vec![0.0; self.cascade_len()];
        for e in &self.elements {
            for (p, h) in power.iter_mut().zip(e.cascade_at_origin()) {
                *p += h.norm_sqr();
            }
        }
        power
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |best, (i, p)| if *p > best.1 { (i, *p) } else { best })
            .0
    }

    /// Reflection-weighted combined gain on `tap` at sample 0.
    pub fn combined_gain_at_origin(&self, tap: usize) -> Complex64 {
        self.elements
            .iter()
            .map(|e| e.reflection * e.cascade_at_origin().get(tap).copied().unwrap_or_default())
            .sum()
    }
}

/// Per-sample, per-tap effective channel gains, row-major (`n * taps + l`).
#[derive(Debug, Clone, PartialEq)]
pub struct TapGainMatrix {
    n_samples: usize,
    taps: usize,
    gains: Vec<Complex64>,
    pub includes_phase_noise: bool,
    pub includes_ris_phases: bool,
}

impl TapGainMatrix {
    pub fn zeros(n_samples: usize, taps: usize) -> Self {
        Self {
            n_samples,
            taps,
            gains: vec![Complex64::default(); n_samples * taps],
            includes_phase_noise: false,
            includes_ris_phases: false,
        }
    }

    pub fn from_rows(n_samples: usize, taps: usize, gains: Vec<Complex64>) -> Result<Self> {
        check_len(n_samples * taps, gains.len())?;
        if gains.iter().any(|g| !g.re.is_finite() || !g.im.is_finite()) {
            return Err(Error::invalid("tap gains must be finite"));
        }
        Ok(Self {
            n_samples,
            taps,
            gains,
            includes_phase_noise: false,
            includes_ris_phases: false,
        })
    }

    /// Time-invariant channel from a single impulse response.
    pub fn static_taps(n_samples: usize, taps: &[Complex64]) -> Self {
        let mut g = Self::zeros(n_samples, taps.len());
        for n in 0..n_samples {
            g.gains[n * taps.len()..(n + 1) * taps.len()].copy_from_slice(taps);
        }
        g
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn taps(&self) -> usize {
        self.taps
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.gains
    }

    pub fn get(&self, n: usize, l: usize) -> Complex64 {
        self.gains[n * self.taps + l]
    }

    pub fn set(&mut self, n: usize, l: usize, v: Complex64) {
        self.gains[n * self.taps + l] = v;
    }

    pub fn row(&self, n: usize) -> &[Complex64] {
        &self.gains[n * self.taps..(n + 1) * self.taps]
    }

    pub fn column(&self, l: usize) -> Vec<Complex64> {
        (0..self.n_samples).map(|n| self.get(n, l)).collect()
    }

    pub fn set_column(&mut self, l: usize, col: &[Complex64]) -> Result<()> {
        check_len(self.n_samples, col.len())?;
        for (n, v) in col.iter().enumerate() {
            self.gains[n * self.taps + l] = *v;
        }
        Ok(())
    }

    pub fn frobenius_sqr(&self) -> f64 {
        self.gains.iter().map(|g| g.norm_sqr()).sum()
    }

    /// Zero-pads to `taps` columns; fails if that would drop nonzero taps.
    pub fn with_taps(&self, taps: usize) -> Result<Self> {
        if taps < self.taps
            && (0..self.n_samples).any(|n| self.row(n)[taps..].iter().any(|g| g.norm_sqr() > 0.0))
        {
            return Err(Error::invalid(format!(
                "channel spans {} taps, cannot truncate to {}",
                self.taps, taps
            )));
        }
        let mut out = Self::zeros(self.n_samples, taps);
        for n in 0..self.n_samples {
            let k = taps.min(self.taps);
            out.gains[n * taps..n * taps + k].copy_from_slice(&self.row(n)[..k]);
        }
        out.includes_phase_noise = self.includes_phase_noise;
        out.includes_ris_phases = self.includes_ris_phases;
        Ok(out)
    }

    /// Multiplies every row by `e^{jθ[n]}`.
    pub fn with_phase_noise(&self, trace: &crate::phase_noise::PhaseNoiseTrace) -> Result<Self> {
        check_len(self.n_samples, trace.len())?;
        let mut out = self.clone();
        for (n, t) in trace.as_slice().iter().enumerate() {
            let psi = Complex64::from_polar(1.0, *t);
            out.gains[n * self.taps..(n + 1) * self.taps]
                .iter_mut()
                .for_each(|g| *g *= psi);
        }
        out.includes_phase_noise = true;
        Ok(out)
    }
}

/// Combined, reflection-weighted channel without power normalisation.
pub fn cascade_ris_channel_raw(ris: &RisChannel, n_samples: usize, sample_period: f64) -> TapGainMatrix {
    let taps = ris.cascade_len();
    let mut g = TapGainMatrix::zeros(n_samples, taps);
    for e in &ris.elements {
        let (lu, lv) = (e.uplink.tap_count(), e.downlink.tap_count());
        if lu == 0 || lv == 0 {
            continue;
        }
        let u = e.uplink.tap_series(n_samples, sample_period);
        let v = e.downlink.tap_series(n_samples, sample_period);
        for n in 0..n_samples {
            let row = &mut g.gains[n * taps..(n + 1) * taps];
            let un = &u[n * lu..(n + 1) * lu];
            let vn = &v[n * lv..(n + 1) * lv];
            for (lv_i, vv) in vn.iter().enumerate() {
                let w = e.reflection * vv;
                for (lu_i, uu) in un.iter().enumerate() {
                    row[lu_i + lv_i] += w * uu;
                }
            }
        }
    }
    g.includes_ris_phases = true;
    g
}

/// Effective RIS channel normalised to unit average power over the frame,
/// `(1/n) Σ_n Σ_l |g[n, l]|² = 1`.
pub fn cascade_ris_channel(ris: &RisChannel, n_samples: usize, sample_period: f64) -> TapGainMatrix {
    let mut g = cascade_ris_channel_raw(ris, n_samples, sample_period);
    let power = g.frobenius_sqr() / n_samples.max(1) as f64;
    if power > 0.0 {
        let scale = 1.0 / power.sqrt();
        g.gains.iter_mut().for_each(|v| *v *= scale);
    }
    g
}

/// `r[n] = Σ_l g[n, l] s[n - l]` with `s[n < 0] = 0`.
pub fn apply_channel(s: &[Complex64], g: &TapGainMatrix) -> Result<Vec<Complex64>> {
    check_len(g.n_samples, s.len())?;
    let taps = g.taps;
    Ok((0..s.len())
        .map(|n| {
            let row = &g.gains[n * taps..(n + 1) * taps];
            row.iter()
                .enumerate()
                .take(n + 1)
                .map(|(l, gl)| gl * s[n - l])
                .sum()
        })
        .collect())
}

/// Adjoint of [`apply_channel`] for a fixed tap-gain matrix.
pub fn apply_channel_adjoint(r: &[Complex64], g: &TapGainMatrix) -> Result<Vec<Complex64>> {
    check_len(g.n_samples, r.len())?;
    let taps = g.taps;
    let mut out = vec![Complex64::default(); r.len()];
    for (n, rn) in r.iter().enumerate() {
        let row = &g.gains[n * taps..(n + 1) * taps];
        for (l, gl) in row.iter().enumerate().take(n + 1) {
            out[n - l] += gl.conj() * rn;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RisStrategy {
    StatisticalAlign,
    Random,
    AllOnes,
}

impl FromStr for RisStrategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "statistical_align" => Ok(Self::StatisticalAlign),
            "random" => Ok(Self::Random),
            "all_ones" => Ok(Self::AllOnes),
            other => Err(Error::invalid(format!("unknown RIS strategy `{other}`"))),
        }
    }
}

impl std::fmt::Display for RisStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RisStrategy::StatisticalAlign => "statistical_align",
            RisStrategy::Random => "random",
            RisStrategy::AllOnes => "all_ones",
        })
    }
}

/// Sets the reflection coefficients.
///
/// `StatisticalAlign` rotates each element so that its cascade gain on the
/// dominant tap at sample 0 becomes real and non-negative, which makes the
/// elements add coherently on that tap.
pub fn design_ris_phases<R: Rng + ?Sized>(ris: &RisChannel, strategy: RisStrategy, rng: &mut R) -> RisChannel {
    let mut out = ris.clone();
    match strategy {
        RisStrategy::AllOnes => out
            .elements
            .iter_mut()
            .for_each(|e| e.reflection = Complex64::new(1.0, 0.0)),
        RisStrategy::Random => out
            .elements
            .iter_mut()
            .for_each(|e| e.reflection = Complex64::from_polar(1.0, 2.0 * PI * rng.random::<f64>())),
        RisStrategy::StatisticalAlign => {
            let tap = ris.dominant_tap();
            for e in &mut out.elements {
                let h = e.cascade_at_origin().get(tap).copied().unwrap_or_default();
                e.reflection = if h.norm() > 0.0 {
                    Complex64::from_polar(1.0, -h.arg())
                } else {
                    Complex64::new(1.0, 0.0)
                };
            }
        }
    }
    out
}

/// Adds circularly-symmetric complex Gaussian noise of variance `noise_var`.
pub fn add_awgn<R: Rng + ?Sized>(s: &[Complex64], noise_var: f64, rng: &mut R) -> Vec<Complex64> {
    if noise_var <= 0.0 {
        return s.to_vec();
    }
    s.iter().map(|v| v + complex_gaussian(rng, noise_var)).collect()
}
