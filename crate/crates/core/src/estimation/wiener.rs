use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::{Arc, Mutex};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::SnapshotEstimate;
use crate::channel::TapGainMatrix;
use crate::error::{Error, Result};
use crate::numerics::{bessel_j0, ComplexMatrix};
use crate::phase_noise::{OscillatorKind, OscillatorModel};

/// Second-order statistics of the effective channel `g[n] = ψ[n] h[n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationModel {
    /// Maximum Doppler in Hz.
    pub doppler: f64,
    pub osc: OscillatorModel,
    pub sample_period: f64,
}

impl CorrelationModel {
    pub fn new(doppler: f64, osc: OscillatorModel, sample_period: f64) -> Result<Self> {
        let model = Self {
            doppler,
            osc,
            sample_period,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.doppler.is_finite() && self.doppler >= 0.0) {
            return Err(Error::invalid("Doppler must be finite and nonnegative"));
        }
        if !(self.sample_period.is_finite() && self.sample_period > 0.0) {
            return Err(Error::invalid("sample period must be positive"));
        }
        self.osc.validate()
    }

    /// `J0(2π f_D T_s |Δ|)`.
    pub fn doppler_autocorr(&self, lag: u64) -> f64 {
        bessel_j0(2.0 * PI * self.doppler * self.sample_period * lag as f64).unwrap_or(f64::NAN)
    }

    pub fn psi_autocorr(&self, lag: u64) -> f64 {
        self.osc.psi_autocorr(lag, 0)
    }

    /// Autocorrelation of the product process, `K_ψ · K_D` at one lag.
    pub fn g_autocorr(&self, lag: u64) -> f64 {
        self.psi_autocorr(lag) * self.doppler_autocorr(lag)
    }
}

fn lag_matrix(rows: &[usize], cols: &[usize], f: impl Fn(u64) -> f64) -> ComplexMatrix {
    // the entries depend only on |Δ|, so evaluate each distinct lag once
    let max_lag = rows
        .iter()
        .flat_map(|r| cols.iter().map(move |c| r.abs_diff(*c)))
        .max()
        .unwrap_or(0);
    let table: Vec<f64> = (0..=max_lag as u64).map(&f).collect();
    DMatrix::from_fn(rows.len(), cols.len(), |a, b| {
        Complex64::new(table[rows[a].abs_diff(cols[b])], 0.0)
    })
}

/// Jakes Doppler correlation between two index sets.
pub fn build_k_d(model: &CorrelationModel, rows: &[usize], cols: &[usize]) -> ComplexMatrix {
    lag_matrix(rows, cols, |lag| model.doppler_autocorr(lag))
}

/// Phase-noise correlation `E[ψ[a] ψ*[b]]` between two index sets.
pub fn build_k_psi(model: &CorrelationModel, rows: &[usize], cols: &[usize]) -> ComplexMatrix {
    lag_matrix(rows, cols, |lag| model.psi_autocorr(lag))
}

/// Moore-Penrose inverse of a Hermitian matrix, discarding eigenvalues
/// below `rel_cutoff · λ_max`.
pub fn hermitian_pinv(k: &ComplexMatrix, rel_cutoff: f64) -> ComplexMatrix {
    let n = k.nrows();
    if n == 0 {
        return k.clone();
    }
    let eig = SymmetricEigen::new(k.clone());
    let lambda_max = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cutoff = rel_cutoff * lambda_max;
    let mut out = DMatrix::zeros(n, n);
    for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda.abs() <= cutoff || lambda_max == 0.0 {
            continue;
        }
        let v = eig.eigenvectors.column(i);
        out += (&v * v.adjoint()) * Complex64::new(1.0 / lambda, 0.0);
    }
    out
}

/// Stage-2 interpolation matrix and the parameters that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct WienerFilterBank {
    /// `n_samples × N_p`.
    pub w: ComplexMatrix,
    pub pilot_indices: Vec<usize>,
    pub noise_var: f64,
    pub pilot_power: f64,
    pub model: CorrelationModel,
}

impl WienerFilterBank {
    pub fn n_samples(&self) -> usize {
        self.w.nrows()
    }

    pub fn n_pilots(&self) -> usize {
        self.w.ncols()
    }

    /// Serialises to the versioned little-endian `WFBK` format.
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(BANK_MAGIC)?;
        out.write_all(&BANK_VERSION.to_le_bytes())?;
        out.write_all(&(self.n_samples() as u64).to_le_bytes())?;
        out.write_all(&(self.n_pilots() as u64).to_le_bytes())?;
        let kind: u8 = match self.model.osc.kind {
            OscillatorKind::Fro => 0,
            OscillatorKind::Cpll => 1,
        };
        out.write_all(&[kind])?;
        for v in [
            self.model.doppler,
            self.model.osc.beta_pn,
            self.model.osc.f_pll,
            self.model.sample_period,
            self.noise_var,
            self.pilot_power,
        ] {
            out.write_all(&v.to_le_bytes())?;
        }
        for p in &self.pilot_indices {
            out.write_all(&(*p as u64).to_le_bytes())?;
        }
        for r in 0..self.n_samples() {
            for c in 0..self.n_pilots() {
                let v = self.w[(r, c)];
                out.write_all(&v.re.to_le_bytes())?;
                out.write_all(&v.im.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut input: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        input.read_exact(&mut magic)?;
        if &magic != BANK_MAGIC {
            return Err(Error::BankFormat("bad magic".into()));
        }
        let version = u32::from_le_bytes(read_array(&mut input)?);
        if version != BANK_VERSION {
            return Err(Error::BankFormat(format!("unsupported version {version}")));
        }
        let rows = read_u64(&mut input)? as usize;
        let cols = read_u64(&mut input)? as usize;
        let [kind] = read_array::<1, _>(&mut input)?;
        let kind = match kind {
            0 => OscillatorKind::Fro,
            1 => OscillatorKind::Cpll,
            k => return Err(Error::BankFormat(format!("unknown oscillator kind {k}"))),
        };
        let mut params = [0.0; 6];
        for p in &mut params {
            *p = read_f64(&mut input)?;
        }
        let [doppler, beta_pn, f_pll, sample_period, noise_var, pilot_power] = params;
        let pilot_indices = (0..cols)
            .map(|_| read_u64(&mut input).map(|v| v as usize))
            .collect::<Result<Vec<_>>>()?;
        let mut w = DMatrix::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                let re = read_f64(&mut input)?;
                let im = read_f64(&mut input)?;
                w[(r, c)] = Complex64::new(re, im);
            }
        }
        let mut rest = [0u8; 1];
        if input.read(&mut rest)? != 0 {
            return Err(Error::BankFormat("trailing bytes".into()));
        }
        let osc = OscillatorModel {
            kind,
            beta_pn,
            f_pll,
            sample_period,
        };
        Ok(Self {
            w,
            pilot_indices,
            noise_var,
            pilot_power,
            model: CorrelationModel {
                doppler,
                osc,
                sample_period,
            },
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(file);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

const BANK_MAGIC: &[u8; 4] = b"WFBK";
const BANK_VERSION: u32 = 1;

fn read_array<const K: usize, R: Read>(input: &mut R) -> Result<[u8; K]> {
    let mut buf = [0u8; K];
    input.read_exact(&mut buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::BankFormat("truncated".into()),
        _ => Error::Io(e),
    })?;
    Ok(buf)
}

fn read_u64<R: Read>(input: &mut R) -> Result<u64> {
    read_array(input).map(u64::from_le_bytes)
}

fn read_f64<R: Read>(input: &mut R) -> Result<f64> {
    read_array(input).map(f64::from_le_bytes)
}

/// Solves the Wiener-Hopf equations for interpolating `n_samples` channel
/// values from noisy observations at `pilots`.
pub fn build_wiener(
    model: &CorrelationModel,
    pilots: &[usize],
    n_samples: usize,
    noise_var: f64,
    pilot_power: f64,
) -> Result<WienerFilterBank> {
    model.validate()?;
    if pilots.is_empty() {
        return Err(Error::EmptyInput);
    }
    if pilots.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("pilot indices must be strictly increasing"));
    }
    if !(pilot_power > 0.0) || !(noise_var >= 0.0) {
        return Err(Error::invalid("pilot power must be positive and noise variance nonnegative"));
    }
    let all: Vec<usize> = (0..n_samples).collect();
    let k_gp = build_k_psi(model, &all, pilots).component_mul(&build_k_d(model, &all, pilots));
    let mut k_pp = build_k_psi(model, pilots, pilots).component_mul(&build_k_d(model, pilots, pilots));
    let ratio = Complex64::new(noise_var / pilot_power, 0.0);
    for i in 0..pilots.len() {
        k_pp[(i, i)] += ratio;
    }
    let w = k_gp * hermitian_pinv(&k_pp, 1e-12);
    if w.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::NotANumber);
    }
    Ok(WienerFilterBank {
        w,
        pilot_indices: pilots.to_vec(),
        noise_var,
        pilot_power,
        model: model.clone(),
    })
}

/// Interpolates every active tap with the shared filter.
///
/// Tap `l` is observed `l` samples after each pilot, so its estimate at
/// sample `n` uses filter row `n - l` (row 0 for `n < l`).
pub fn apply_wiener(bank: &WienerFilterBank, snap: &SnapshotEstimate) -> Result<TapGainMatrix> {
    if bank.pilot_indices != snap.pilot_indices {
        return Err(Error::invalid("snapshot pilots differ from the filter bank's"));
    }
    let n = bank.n_samples();
    let mut out = TapGainMatrix::zeros(n, snap.taps());
    for l in (0..snap.taps()).filter(|&l| snap.active_taps[l]) {
        let obs = snap.gains.row(l).transpose();
        let interp = &bank.w * obs;
        let col: Vec<Complex64> = (0..n).map(|t| interp[t.saturating_sub(l)]).collect();
        out.set_column(l, &col)?;
    }
    out.includes_phase_noise = true;
    out.includes_ris_phases = true;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct CacheKey {
    bits: [u64; 6],
    kind: u8,
    pilots: Vec<usize>,
    n_samples: usize,
}

/// Thread-safe memo of filter banks keyed by every input of [`build_wiener`].
#[derive(Debug, Default)]
pub struct WienerCache {
    banks: Mutex<HashMap<CacheKey, Arc<WienerFilterBank>>>,
}

impl WienerCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get_or_build(
        &self,
        model: &CorrelationModel,
        pilots: &[usize],
        n_samples: usize,
        noise_var: f64,
        pilot_power: f64,
    ) -> Result<Arc<WienerFilterBank>> {
        let key = CacheKey {
            bits: [
                model.doppler.to_bits(),
                model.osc.beta_pn.to_bits(),
                model.osc.f_pll.to_bits(),
                model.sample_period.to_bits(),
                noise_var.to_bits(),
                pilot_power.to_bits(),
            ],
            kind: model.osc.kind as u8,
            pilots: pilots.to_vec(),
            n_samples,
        };
        if let Some(bank) = self.banks.lock().expect("cache poisoned").get(&key) {
            return Ok(bank.clone());
        }
        let bank = Arc::new(build_wiener(model, pilots, n_samples, noise_var, pilot_power)?);
        self.banks
            .lock()
            .expect("cache poisoned")
            .entry(key)
            .or_insert_with(|| bank.clone());
        Ok(bank)
    }

    pub fn len(&self) -> usize {
        self.banks.lock().expect("cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::norm_sqr;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    const TS: f64 = 1.0 / 1.92e6;

    fn model(doppler: f64, beta_ts: f64) -> CorrelationModel {
        CorrelationModel::new(doppler, OscillatorModel::free_running(beta_ts / TS, TS), TS).unwrap()
    }

    fn cgauss(rng: &mut ChaCha8Rng) -> Complex64 {
        let a: f64 = StandardNormal.sample(rng);
        let b: f64 = StandardNormal.sample(rng);
        Complex64::new(a, b) * std::f64::consts::FRAC_1_SQRT_2
    }

    #[test]
    fn k_d_special_values() {
        let m = model(0.0, 0.0);
        let idx: Vec<usize> = (0..10).map(|i| i * 7).collect();
        assert!(build_k_d(&m, &idx, &idx).iter().all(|v| *v == Complex64::new(1.0, 0.0)));

        let m = model(1500.0, 0.0);
        let k = build_k_d(&m, &idx, &idx);
        assert!((0..10).all(|i| k[(i, i)] == Complex64::new(1.0, 0.0)));

        // first J0 root at lag 1000 samples
        let root = 2.404_825_557_695_773;
        let doppler = root / (2.0 * PI * TS * 1000.0);
        let m = model(doppler, 0.0);
        let k = build_k_d(&m, &[0], &[1000]);
        assert!(k[(0, 0)].norm() < 1e-6);
    }

    #[test]
    fn k_psi_matches_scalar_autocorrelation() {
        let m = model(0.0, 1e-4);
        let rows = [0, 3, 50];
        let cols = [10, 3];
        let k = build_k_psi(&m, &rows, &cols);
        for (a, r) in rows.iter().enumerate() {
            for (b, c) in cols.iter().enumerate() {
                assert_eq!(k[(a, b)].re, m.osc.psi_autocorr(*r as u64, *c as u64));
            }
        }
        assert_eq!(k[(1, 1)].re, 1.0);
        let ideal = model(0.0, 0.0);
        assert!(build_k_psi(&ideal, &rows, &cols).iter().all(|v| v.re == 1.0));
    }

    #[test]
    fn pinv_of_all_ones() {
        let k = DMatrix::from_element(5, 5, Complex64::new(1.0, 0.0));
        let p = hermitian_pinv(&k, 1e-12);
        assert!(p.iter().all(|v| (v - Complex64::new(1.0 / 25.0, 0.0)).norm() < 1e-14));
    }

    #[test]
    fn full_observation_gives_identity() {
        let n = 40;
        let all: Vec<usize> = (0..n).collect();
        let bank = build_wiener(&model(2000.0, 1e-4), &all, n, 0.0, 1.0).unwrap();
        let eye = DMatrix::<Complex64>::identity(n, n);
        assert!((bank.w.clone() - eye).iter().all(|v| v.norm() < 1e-8));

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let gains = DMatrix::from_fn(1, n, |_, _| cgauss(&mut rng));
        let snap = SnapshotEstimate::new(gains.clone(), all).unwrap();
        let out = apply_wiener(&bank, &snap).unwrap();
        assert!((0..n).all(|t| (out.get(t, 0) - gains[(0, t)]).norm() < 1e-8));
    }

    #[test]
    fn constant_model_gives_mean_interpolator() {
        let pilots: Vec<usize> = (0..8).map(|p| 5 + 33 * p).collect();
        let bank = build_wiener(&model(0.0, 0.0), &pilots, 264, 0.0, 70.0).unwrap();
        for r in 0..264 {
            let sum: Complex64 = bank.w.row(r).iter().sum();
            assert!((sum - Complex64::new(1.0, 0.0)).norm() < 1e-10);
        }
        let sv = bank.w.clone().singular_values();
        assert!(sv[0] > 1.0 && sv.iter().skip(1).all(|s| *s < 1e-10));

        let snap = SnapshotEstimate::new(
            DMatrix::from_fn(2, 8, |l, p| Complex64::new(1.0 + p as f64, l as f64)),
            pilots,
        )
        .unwrap();
        let out = apply_wiener(&bank, &snap).unwrap();
        for t in 0..264 {
            assert!((out.get(t, 0) - Complex64::new(4.5, 0.0)).norm() < 1e-10);
            assert!((out.get(t, 1) - Complex64::new(4.5, 1.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn static_channel_is_recovered() {
        let pilots: Vec<usize> = (0..6).map(|p| 40 + 47 * p).collect();
        let bank = build_wiener(&model(0.0, 0.0), &pilots, 282, 0.0, 70.0).unwrap();
        let taps = [Complex64::new(0.3, -0.2), Complex64::new(-1.0, 0.5), Complex64::default()];
        let mut snap =
            SnapshotEstimate::new(DMatrix::from_fn(3, 6, |l, _| taps[l]), pilots).unwrap();
        snap.active_taps[2] = false;
        let out = apply_wiener(&bank, &snap).unwrap();
        let truth = TapGainMatrix::static_taps(282, &taps);
        assert!(out.as_slice().iter().zip(truth.as_slice()).all(|(a, b)| (a - b).norm() < 1e-8));
        assert!(out.column(2).iter().all(|v| *v == Complex64::default()));
        assert!(out.includes_phase_noise);
    }

    #[test]
    fn matches_dense_wiener_hopf_solve() {
        let pilots: Vec<usize> = (0..8).map(|p| 3 + 8 * p).collect();
        let m = CorrelationModel::new(5000.0, OscillatorModel::pll(2000.0, 1e5, TS), TS).unwrap();
        let (noise_var, pilot_power) = (0.5, 7.0);
        let bank = build_wiener(&m, &pilots, 64, noise_var, pilot_power).unwrap();

        // independent oracle: scalar correlations, explicit LU solve of
        // W K_pp = K_gp  <=>  K_pp^H W^H = K_gp^H
        let corr = |a: usize, b: usize| {
            let lag = a.abs_diff(b) as f64;
            let x = 2.0 * PI * 5000.0 * TS * lag;
            let psi = m.osc.psi_autocorr(a as u64, b as u64);
            psi * bessel_j0(x).unwrap()
        };
        let k_pp = DMatrix::from_fn(8, 8, |i, j| {
            Complex64::new(corr(pilots[i], pilots[j]) + if i == j { noise_var / pilot_power } else { 0.0 }, 0.0)
        });
        let k_gp = DMatrix::from_fn(64, 8, |t, j| Complex64::new(corr(t, pilots[j]), 0.0));
        let w_h = k_pp.adjoint().lu().solve(&k_gp.adjoint()).unwrap();
        let oracle = w_h.adjoint();
        let diff = (&bank.w - &oracle).iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-8, "{diff}");
    }

    #[test]
    fn hadamard_product_is_the_product_autocorrelation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = CorrelationModel::new(3000.0, OscillatorModel::free_running(1e-3 / TS, TS), TS).unwrap();
        let (len, realizations, sinusoids) = (60, 20_000, 32);
        let mut acc = DMatrix::<Complex64>::zeros(len, len);
        for _ in 0..realizations {
            let theta = m.osc.gen_trace(len, &mut rng);
            let dopplers = crate::channel::sample_jakes_doppler(sinusoids, m.doppler, &mut rng);
            let phases: Vec<f64> = (0..sinusoids).map(|_| 2.0 * PI * rng.random::<f64>()).collect();
            let g: Vec<Complex64> = (0..len)
                .map(|t| {
                    let h: Complex64 = dopplers
                        .iter()
                        .zip(&phases)
                        .map(|(d, p)| Complex64::from_polar(1.0, p + 2.0 * PI * d * TS * t as f64))
                        .sum::<Complex64>()
                        / (sinusoids as f64).sqrt();
                    h * Complex64::from_polar(1.0, theta.as_slice()[t])
                })
                .collect();
            for a in 0..len {
                for b in 0..len {
                    acc[(a, b)] += g[a] * g[b].conj();
                }
            }
        }
        let idx: Vec<usize> = (0..len).collect();
        let model = build_k_psi(&m, &idx, &idx).component_mul(&build_k_d(&m, &idx, &idx));
        let worst = (acc / Complex64::new(realizations as f64, 0.0) - model)
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        assert!(worst < 0.03, "{worst}");
    }

    #[test]
    fn shared_filter_is_optimal_per_tap() {
        // tap l is observed at pilot + l; its own brute-force Wiener solution
        // must coincide with the shared filter shifted by l rows
        let pilots: Vec<usize> = (0..8).map(|p| 3 + 8 * p).collect();
        let m = model(4000.0, 1e-4);
        let (noise_var, pilot_power) = (0.3, 7.0);
        let n = 64;
        let bank = build_wiener(&m, &pilots, n, noise_var, pilot_power).unwrap();
        let all: Vec<usize> = (0..n).collect();
        for l in 0..2 {
            let obs: Vec<usize> = pilots.iter().map(|p| p + l).collect();
            let corr = |a: usize, b: usize| {
                let lag = a.abs_diff(b) as u64;
                Complex64::new(m.g_autocorr(lag), 0.0)
            };
            let k_gp = DMatrix::from_fn(n, 8, |t, j| corr(all[t], obs[j]));
            let k_pp = DMatrix::from_fn(8, 8, |i, j| {
                corr(obs[i], obs[j]) + if i == j { Complex64::new(noise_var / pilot_power, 0.0) } else { 0.0.into() }
            });
            let own = k_pp.adjoint().lu().solve(&k_gp.adjoint()).unwrap().adjoint();
            for t in l..n {
                for j in 0..8 {
                    assert!((own[(t, j)] - bank.w[(t - l, j)]).norm() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn perturbations_do_not_reduce_mse() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 64;
        let pilots: Vec<usize> = (0..8).map(|p| 3 + 8 * p).collect();
        let m = CorrelationModel::new(6000.0, OscillatorModel::free_running(2e-3 / TS, TS), TS).unwrap();
        let (noise_var, pilot_power) = (1.0, 10.0);
        let bank = build_wiener(&m, &pilots, n, noise_var, pilot_power).unwrap();

        // exact-model realisations via a Cholesky factor of the full covariance
        let all: Vec<usize> = (0..n).collect();
        let k = build_k_psi(&m, &all, &all).component_mul(&build_k_d(&m, &all, &all));
        let mut k_reg = k.clone();
        for i in 0..n {
            k_reg[(i, i)] += Complex64::new(1e-10, 0.0);
        }
        let chol = k_reg.cholesky().unwrap().l();
        let realizations = 10_000;
        let sd = (noise_var / pilot_power).sqrt();
        let mut truth = DMatrix::<Complex64>::zeros(n, realizations);
        let mut obs = DMatrix::<Complex64>::zeros(8, realizations);
        for r in 0..realizations {
            let z = nalgebra::DVector::from_fn(n, |_, _| cgauss(&mut rng));
            let g = &chol * z;
            for (i, p) in pilots.iter().enumerate() {
                obs[(i, r)] = g[*p] + cgauss(&mut rng) * sd;
            }
            truth.set_column(r, &g);
        }
        let mse = |w: &ComplexMatrix| {
            let e = w * &obs - &truth;
            e.iter().map(|v| v.norm_sqr()).sum::<f64>()
        };
        let base = mse(&bank.w);
        let w_norm = norm_sqr(bank.w.as_slice()).sqrt();
        for _ in 0..100 {
            let mut dw = DMatrix::from_fn(n, 8, |_, _| cgauss(&mut rng));
            let scale = 0.01 * w_norm / norm_sqr(dw.as_slice()).sqrt();
            dw *= Complex64::new(scale, 0.0);
            assert!(mse(&(&bank.w + dw)) >= base);
        }
    }

    #[test]
    fn errors() {
        let m = model(100.0, 1e-4);
        assert!(matches!(build_wiener(&m, &[], 10, 0.1, 1.0), Err(Error::EmptyInput)));
        assert!(build_wiener(&m, &[3, 1], 10, 0.1, 1.0).is_err());
        let bank = build_wiener(&m, &[1, 3], 10, 0.1, 1.0).unwrap();
        let snap = SnapshotEstimate::new(DMatrix::zeros(2, 3), vec![1, 3, 5]).unwrap();
        assert!(apply_wiener(&bank, &snap).is_err());
    }

    #[test]
    fn bank_round_trips_through_bytes() {
        let m = CorrelationModel::new(800.0, OscillatorModel::pll(300.0, 2e4, TS), TS).unwrap();
        let bank = build_wiener(&m, &[2, 9, 30], 40, 0.2, 5.0).unwrap();
        let mut bytes = Vec::new();
        bank.write_to(&mut bytes).unwrap();
        assert_eq!(&bytes[..4], b"WFBK");
        assert_eq!(bytes.len(), 4 + 4 + 16 + 1 + 48 + 3 * 8 + 40 * 3 * 16);
        assert_eq!(WienerFilterBank::read_from(&bytes[..]).unwrap(), bank);
        assert!(matches!(
            WienerFilterBank::read_from(&bytes[..bytes.len() - 1]),
            Err(Error::BankFormat(_))
        ));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(WienerFilterBank::read_from(&bad[..]).is_err());
        bytes.push(0);
        assert!(WienerFilterBank::read_from(&bytes[..]).is_err());
    }

    #[test]
    fn cache_reuses_banks() {
        let cache = WienerCache::new();
        let m = model(100.0, 1e-4);
        let a = cache.get_or_build(&m, &[1, 5], 10, 0.1, 1.0).unwrap();
        let b = cache.get_or_build(&m, &[1, 5], 10, 0.1, 1.0).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        cache.get_or_build(&m, &[1, 5], 10, 0.2, 1.0).unwrap();
        cache.get_or_build(&model(100.0, 2e-4), &[1, 5], 10, 0.1, 1.0).unwrap();
        assert_eq!(cache.len(), 3);
    }
}
