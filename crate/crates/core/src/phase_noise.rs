//! Receiver oscillator phase noise.
//!
//! Two oscillator families are modelled. A free-running oscillator (FRO)
//! accumulates independent Gaussian increments, so its phase is a Wiener
//! process whose variogram grows linearly with the lag. A first-order PLL
//! (CPLL) tracks a noiseless reference; its output phase is an
//! Ornstein-Uhlenbeck process whose variogram saturates at `2π β / F_PLL`.
//!
//! Traces are normalised so that `θ[0] = 0`: the absolute carrier phase is
//! unobservable and every quantity used downstream depends only on phase
//! increments.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OscillatorKind {
    Fro,
    Cpll,
}

impl std::fmt::Display for OscillatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OscillatorKind::Fro => "fro",
            OscillatorKind::Cpll => "cpll",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorModel {
    pub kind: OscillatorKind,
    /// One-sided 3 dB linewidth in Hz.
    pub beta_pn: f64,
    /// Loop filter coefficient in 1/s; ignored for [`OscillatorKind::Fro`].
    #[serde(default)]
    pub f_pll: f64,
    pub sample_period: f64,
}

impl OscillatorModel {
    pub fn free_running(beta_pn: f64, sample_period: f64) -> Self {
        Self {
            kind: OscillatorKind::Fro,
            beta_pn,
            f_pll: 0.0,
            sample_period,
        }
    }

    pub fn pll(beta_pn: f64, f_pll: f64, sample_period: f64) -> Self {
        Self {
            kind: OscillatorKind::Cpll,
            beta_pn,
            f_pll,
            sample_period,
        }
    }

    /// An oscillator with zero linewidth.
    pub fn ideal(sample_period: f64) -> Self {
        Self::free_running(0.0, sample_period)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta_pn >= 0.0 && self.beta_pn.is_finite()) {
            return Err(Error::invalid("beta_pn must be finite and non-negative"));
        }
        if !(self.sample_period > 0.0 && self.sample_period.is_finite()) {
            return Err(Error::invalid("sample period must be positive"));
        }
        if self.kind == OscillatorKind::Cpll && !(self.f_pll > 0.0 && self.f_pll.is_finite()) {
            return Err(Error::invalid("CPLL requires a positive loop coefficient"));
        }
        Ok(())
    }

    /// Per-sample increment variance of the free-running oscillator, `4π β T_s`.
    pub fn increment_variance(&self) -> f64 {
        4.0 * PI * self.beta_pn * self.sample_period
    }

    /// Variance of `θ[n + δ] - θ[n]` in rad².
    pub fn variogram(&self, lag: u64) -> f64 {
        let lag = lag as f64;
        match self.kind {
            OscillatorKind::Fro => 4.0 * PI * self.beta_pn * self.sample_period * lag,
            OscillatorKind::Cpll => {
                (2.0 * PI * self.beta_pn / self.f_pll)
                    * (1.0 - (-lag * self.f_pll * self.sample_period).exp())
            }
        }
    }

    /// `E[ψ[m] ψ*[n]]` for `ψ = e^{jθ}`, real-valued for Gaussian increments.
    pub fn psi_autocorr(&self, m: u64, n: u64) -> f64 {
        let lag = m.abs_diff(n) as f64;
        match self.kind {
            OscillatorKind::Fro => (-2.0 * PI * self.beta_pn * self.sample_period * lag).exp(),
            OscillatorKind::Cpll => (-(PI * self.beta_pn / self.f_pll)
                * (1.0 - (-lag * self.f_pll * self.sample_period).exp()))
            .exp(),
        }
    }

    /// Stationary variance of the CPLL phase, `π β / F_PLL` (half the
    /// saturated variogram).
    pub fn stationary_variance(&self) -> Option<f64> {
        match self.kind {
            OscillatorKind::Fro => None,
            OscillatorKind::Cpll => Some(PI * self.beta_pn / self.f_pll),
        }
    }

    /// Draws one phase trace of `len` samples.
    pub fn gen_trace<R: Rng + ?Sized>(&self, len: usize, rng: &mut R) -> PhaseNoiseTrace {
        let mut theta = vec![0.0; len];
        if len == 0 || self.beta_pn == 0.0 {
            return PhaseNoiseTrace(theta);
        }
        match self.kind {
            OscillatorKind::Fro => {
                let sd = self.increment_variance().sqrt();
                for n in 1..len {
                    let eps: f64 = StandardNormal.sample(rng);
                    theta[n] = theta[n - 1] + sd * eps;
                }
            }
            OscillatorKind::Cpll => {
                // exact OU transition, started from the stationary law
                let var = PI * self.beta_pn / self.f_pll;
                let a = (-self.f_pll * self.sample_period).exp();
                let drive_sd = (var * (1.0 - a * a)).sqrt();
                let z: f64 = StandardNormal.sample(rng);
                let mut state = var.sqrt() * z;
                let origin = state;
                for t in theta.iter_mut().skip(1) {
                    let w: f64 = StandardNormal.sample(rng);
                    state = a * state + drive_sd * w;
                    *t = state - origin;
                }
            }
        }
        PhaseNoiseTrace(theta)
    }
}

/// Phase `θ[n]` in radians per sample, with `θ[0] = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseNoiseTrace(Vec<f64>);

impl PhaseNoiseTrace {
    /// Wraps raw phases, re-referencing them so the first sample is zero.
    pub fn from_phases(mut theta: Vec<f64>) -> Result<Self> {
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::invalid("phase trace must be finite"));
        }
        if let Some(&origin) = theta.first() {
            theta.iter_mut().for_each(|t| *t -= origin);
        }
        Ok(Self(theta))
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The unit-modulus process `ψ[n] = e^{jθ[n]}`.
    pub fn phasors(&self) -> Vec<Complex64> {
        self.0.iter().map(|t| Complex64::from_polar(1.0, *t)).collect()
    }
}

/// `r[n] = e^{jθ[n]} s[n]`.
pub fn apply_phase_noise(s: &[Complex64], trace: &PhaseNoiseTrace) -> Result<Vec<Complex64>> {
    check_len(s.len(), trace.len())?;
    Ok(s
        .iter()
        .zip(trace.as_slice())
        .map(|(v, t)| v * Complex64::from_polar(1.0, *t))
        .collect())
}
