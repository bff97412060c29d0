use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::SnapshotEstimate;
use crate::channel::TapGainMatrix;
use crate::error::{Error, Result};

/// Number of complex-exponential basis functions,
/// `⌈2 k_over n_samples (f_D + β_pn) T_s⌉ + 1`.
pub fn bem_basis_size(doppler: f64, beta_pn: f64, sample_period: f64, k_over: f64, n_samples: usize) -> usize {
    let x = 2.0 * k_over * n_samples as f64 * (doppler + beta_pn) * sample_period;
    // absorb round-off so that exact integers are not bumped up
    let nearest = x.round();
    let c = if (x - nearest).abs() < 1e-9 { nearest } else { x.ceil() };
    c.max(0.0) as usize + 1
}

/// Least-squares complex-exponential basis fit through the snapshots.
pub fn bem_estimate(
    snap: &SnapshotEstimate,
    doppler: f64,
    beta_pn: f64,
    sample_period: f64,
    k_over: f64,
    n_samples: usize,
) -> Result<TapGainMatrix> {
    if !(k_over > 0.0) {
        return Err(Error::invalid("BEM oversampling factor must be positive"));
    }
    let q = bem_basis_size(doppler, beta_pn, sample_period, k_over, n_samples);
    let n_p = snap.n_pilots();
    if q > n_p {
        return Err(Error::Underdetermined {
            basis: q,
            observations: n_p,
        });
    }
    let period = k_over * n_samples as f64;
    let centre = (q as f64 - 1.0) / 2.0;
    let basis = |t: usize, k: usize| Complex64::from_polar(1.0, 2.0 * PI * (k as f64 - centre) * t as f64 / period);

    let mut out = TapGainMatrix::zeros(n_samples, snap.taps());
    for l in (0..snap.taps()).filter(|&l| snap.active_taps[l]) {
        let a = DMatrix::from_fn(n_p, q, |p, k| basis(snap.instant(p, l), k));
        let y = DVector::from_iterator(n_p, snap.gains.row(l).iter().copied());
        let coeffs = a
            .svd(true, true)
            .solve(&y, 1e-12)
            .map_err(|e| Error::invalid(format!("BEM solve failed: {e}")))?;
        let col: Vec<Complex64> = (0..n_samples)
            .map(|t| (0..q).map(|k| coeffs[k] * basis(t, k)).sum())
            .collect();
        out.set_column(l, &col)?;
    }
    out.includes_phase_noise = true;
    out.includes_ris_phases = true;
    Ok(out)
}

/// Natural cubic spline with constant extrapolation beyond the end knots.
#[derive(Debug, Clone, PartialEq)]
pub struct NaturalCubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

impl NaturalCubicSpline {
    pub fn new(x: &[f64], y: &[f64]) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch {
                expected: x.len(),
                got: y.len(),
            });
        }
        if x.len() < 2 {
            return Err(Error::invalid("spline needs at least two knots"));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("spline knots must be strictly increasing"));
        }
        let n = x.len();
        let mut m = vec![0.0; n];
        if n > 2 {
            // Thomas algorithm on the interior second derivatives
            let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
            let k = n - 2;
            let mut diag = vec![0.0; k];
            let mut rhs = vec![0.0; k];
            for i in 0..k {
                diag[i] = 2.0 * (h[i] + h[i + 1]);
                rhs[i] = 6.0 * ((y[i + 2] - y[i + 1]) / h[i + 1] - (y[i + 1] - y[i]) / h[i]);
            }
            for i in 1..k {
                let f = h[i] / diag[i - 1];
                diag[i] -= f * h[i];
                rhs[i] -= f * rhs[i - 1];
            }
            m[k] = rhs[k - 1] / diag[k - 1];
            for i in (0..k - 1).rev() {
                m[i + 1] = (rhs[i] - h[i + 1] * m[i + 2]) / diag[i];
            }
        }
        Ok(Self {
            x: x.to_vec(),
            y: y.to_vec(),
            m,
        })
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t <= self.x[0] {
            return self.y[0];
        }
        if t >= self.x[n - 1] {
            return self.y[n - 1];
        }
        let i = self.x.partition_point(|v| *v <= t) - 1;
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }
}

/// Per-tap natural cubic spline through the snapshots, real and imaginary
/// parts separately.
pub fn spline_estimate(snap: &SnapshotEstimate, n_samples: usize) -> Result<TapGainMatrix> {
    if snap.n_pilots() < 4 {
        return Err(Error::invalid(format!(
            "spline interpolation needs at least 4 pilots, got {}",
            snap.n_pilots()
        )));
    }
    let mut out = TapGainMatrix::zeros(n_samples, snap.taps());
    for l in (0..snap.taps()).filter(|&l| snap.active_taps[l]) {
        let x: Vec<f64> = (0..snap.n_pilots()).map(|p| snap.instant(p, l) as f64).collect();
        let re: Vec<f64> = snap.gains.row(l).iter().map(|v| v.re).collect();
        let im: Vec<f64> = snap.gains.row(l).iter().map(|v| v.im).collect();
        let (sr, si) = (NaturalCubicSpline::new(&x, &re)?, NaturalCubicSpline::new(&x, &im)?);
        let col: Vec<Complex64> = (0..n_samples)
            .map(|t| Complex64::new(sr.eval(t as f64), si.eval(t as f64)))
            .collect();
        out.set_column(l, &col)?;
    }
    out.includes_phase_noise = true;
    out.includes_ris_phases = true;
    Ok(out)
}
