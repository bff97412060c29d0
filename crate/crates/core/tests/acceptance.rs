//! Exit criteria for the simulator. Prints one `[PASS]` / `[FAIL]` line per
//! criterion and exits non-zero if any criterion fails.
//!
//! Run with `cargo test --test acceptance` (add `--release` for speed).

use std::f64::consts::PI;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use ris_otfs::channel::{sample_jakes_doppler, Path, PathSet};
use ris_otfs::detection::CodecConfig;
use ris_otfs::estimation::{build_k_d, build_k_psi, build_wiener, CorrelationModel, WienerCache};
use ris_otfs::harness::{
    run_frames, run_point, run_sweep, write_csv, ChannelNormalization, EstimatorKind, FrameOutcome, OscillatorConfig,
    RunOptions, SimConfig, SweepAxes,
};
use ris_otfs::numerics::{apply_dd_phase, bessel_j0, dense_dd_phase_matrix};
use ris_otfs::phase_noise::{OscillatorKind, OscillatorModel};
use ris_otfs::waveform::WaveformKind;
use ris_otfs::Complex64;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn cgauss(rng: &mut ChaCha8Rng) -> Complex64 {
    let a: f64 = StandardNormal.sample(rng);
    let b: f64 = StandardNormal.sample(rng);
    Complex64::new(a, b) * std::f64::consts::FRAC_1_SQRT_2
}

fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

fn options() -> RunOptions {
    RunOptions::default()
}

/// Unitary DFT matrix with `e^{-j2πkn/N}` kernel.
fn dft_matrix(n: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(n, n, |k, i| {
        Complex64::from_polar(1.0 / (n as f64).sqrt(), -2.0 * PI * (k * i) as f64 / n as f64)
    })
}

fn kron_identity(a: &DMatrix<Complex64>, m: usize) -> DMatrix<Complex64> {
    let n = a.nrows();
    DMatrix::from_fn(n * m, n * m, |r, c| if r % m == c % m { a[(r / m, c / m)] } else { Complex64::default() })
}

fn transform_oracles() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xacc1);
    let mut worst: f64 = 0.0;
    for m in [2usize, 4, 8] {
        for n in [2usize, 4, 8] {
            let f = kron_identity(&dft_matrix(n), m);
            let f_h = f.adjoint();
            for _ in 0..20 {
                let theta: Vec<f64> = (0..m * n).map(|_| rng.random_range(-PI..PI)).collect();
                let diag = DMatrix::from_diagonal(&DVector::from_iterator(
                    m * n,
                    theta.iter().map(|t| Complex64::from_polar(1.0, *t)),
                ));
                let oracle = &f * diag * &f_h;
                let blocks = dense_dd_phase_matrix(&theta, m, n).unwrap();
                worst = worst.max((&blocks - &oracle).iter().map(|v| v.norm()).fold(0.0, f64::max));
                for col in 0..m * n {
                    let mut e = vec![Complex64::default(); m * n];
                    e[col] = Complex64::new(1.0, 0.0);
                    let fast = apply_dd_phase(&theta, &e, m, n).unwrap();
                    for (row, v) in fast.iter().enumerate() {
                        worst = worst.max((v - oracle[(row, col)]).norm());
                    }
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst <= 1e-12 && secs < 1.0,
        format!("max abs error {worst:.2e} (tol 1e-12), {secs:.2} s (limit 1 s)"),
    )
}

fn statistical_fidelity() -> Verdict {
    let start = Instant::now();
    let ts = 1.0 / 1.92e6;

    // (a) free-running oscillator characteristic function
    let fro = OscillatorModel::free_running(1e-4 / ts, ts);
    let max_lag = 4096;
    let traces = 100_000;
    let mut acc = vec![Complex64::default(); max_lag + 1];
    let mut rng = ChaCha8Rng::seed_from_u64(0xacc2);
    for _ in 0..traces {
        let t = fro.gen_trace(max_lag + 1, &mut rng);
        for (a, th) in acc.iter_mut().zip(t.as_slice()) {
            *a += Complex64::from_polar(1.0, *th);
        }
    }
    let fro_err = acc
        .iter()
        .enumerate()
        .map(|(lag, a)| (a / traces as f64 - (-2.0 * PI * fro.beta_pn * ts * lag as f64).exp()).norm())
        .fold(0.0, f64::max);

    // (b) PLL variogram at saturation
    let cpll = OscillatorModel::pll(2000.0, 1e5, ts);
    let lags = [800usize, 1000, 1200];
    let mut sumsq = [0.0; 3];
    let pll_traces = 20_000;
    for _ in 0..pll_traces {
        let t = cpll.gen_trace(1201, &mut rng);
        for (s, lag) in sumsq.iter_mut().zip(lags) {
            *s += t.as_slice()[lag].powi(2);
        }
    }
    let saturation = 2.0 * PI * cpll.beta_pn / cpll.f_pll;
    let pll_err = sumsq
        .iter()
        .map(|s| (s / pll_traces as f64 / saturation - 1.0).abs())
        .fold(0.0, f64::max);

    // (c) sum-of-sinusoids Jakes autocorrelation
    let (fd, jts, paths, realizations, lag_count) = (500.0, 1e-5, 64, 10_000, 101);
    let mut corr = vec![Complex64::default(); lag_count];
    for _ in 0..realizations {
        let set = PathSet {
            paths: sample_jakes_doppler(paths, fd, &mut rng)
                .into_iter()
                .map(|d| Path {
                    gain: Complex64::from_polar(1.0 / (paths as f64).sqrt(), 2.0 * PI * rng.random::<f64>()),
                    delay_tap: 0,
                    doppler: d,
                })
                .collect(),
        };
        let x = set.tap_series(lag_count, jts);
        for (c, v) in corr.iter_mut().zip(&x) {
            *c += v * x[0].conj();
        }
    }
    let jakes_err = corr
        .iter()
        .enumerate()
        .map(|(lag, c)| (c.re / realizations as f64 - bessel_j0(2.0 * PI * fd * jts * lag as f64).unwrap()).abs())
        .fold(0.0, f64::max);

    let secs = start.elapsed().as_secs_f64();
    verdict(
        fro_err <= 0.02 && pll_err <= 0.05 && jakes_err <= 0.05 && secs < 120.0,
        format!(
            "FRO max dev {fro_err:.4} (tol 0.02), CPLL saturation rel err {pll_err:.4} (tol 0.05), \
             Jakes max dev {jakes_err:.4} (tol 0.05), {secs:.1} s (limit 120 s)"
        ),
    )
}

fn wiener_correctness() -> Verdict {
    let ts = 1.0 / 1.92e6;
    let n = 64;
    let pilots: Vec<usize> = (0..8).map(|p| 3 + 8 * p).collect();

    // dense Wiener-Hopf solve from scalar correlations
    let model = CorrelationModel::new(5000.0, OscillatorModel::pll(2000.0, 1e5, ts), ts).unwrap();
    let (noise_var, pilot_power) = (0.5, 7.0);
    let bank = build_wiener(&model, &pilots, n, noise_var, pilot_power).unwrap();
    let corr = |a: usize, b: usize| {
        let lag = a.abs_diff(b) as f64;
        let psi = (-(PI * 2000.0 / 1e5) * (1.0 - (-lag * 1e5 * ts).exp())).exp();
        psi * bessel_j0(2.0 * PI * 5000.0 * ts * lag).unwrap()
    };
    let k_pp = DMatrix::from_fn(8, 8, |i, j| {
        Complex64::new(corr(pilots[i], pilots[j]) + if i == j { noise_var / pilot_power } else { 0.0 }, 0.0)
    });
    let k_gp = DMatrix::from_fn(n, 8, |t, j| Complex64::new(corr(t, pilots[j]), 0.0));
    let oracle = k_pp.adjoint().lu().solve(&k_gp.adjoint()).unwrap().adjoint();
    let dense_err = (&bank.w - &oracle).iter().map(|v| v.norm()).fold(0.0, f64::max);

    // perturbation optimality over exact-model realisations
    let mut rng = ChaCha8Rng::seed_from_u64(0xacc3);
    let model = CorrelationModel::new(6000.0, OscillatorModel::free_running(2e-3 / ts, ts), ts).unwrap();
    let (noise_var, pilot_power) = (1.0, 10.0);
    let bank = build_wiener(&model, &pilots, n, noise_var, pilot_power).unwrap();
    let all: Vec<usize> = (0..n).collect();
    let mut k = build_k_psi(&model, &all, &all).component_mul(&build_k_d(&model, &all, &all));
    for i in 0..n {
        k[(i, i)] += Complex64::new(1e-10, 0.0);
    }
    let chol = k.cholesky().unwrap().l();
    let realizations = 10_000;
    let sd = (noise_var / pilot_power).sqrt();
    let mut truth = DMatrix::<Complex64>::zeros(n, realizations);
    let mut obs = DMatrix::<Complex64>::zeros(8, realizations);
    for r in 0..realizations {
        let g = &chol * DVector::from_fn(n, |_, _| cgauss(&mut rng));
        for (i, p) in pilots.iter().enumerate() {
            obs[(i, r)] = g[*p] + cgauss(&mut rng) * sd;
        }
        truth.set_column(r, &g);
    }
    let mse = |w: &DMatrix<Complex64>| (w * &obs - &truth).iter().map(|v| v.norm_sqr()).sum::<f64>();
    let base = mse(&bank.w);
    let w_norm = bank.w.norm();
    let trials = 200;
    let mut improved = 0;
    for _ in 0..trials {
        let dw = DMatrix::from_fn(n, 8, |_, _| cgauss(&mut rng));
        let dw = &dw * Complex64::new(0.01 * w_norm / dw.norm(), 0.0);
        if mse(&(&bank.w + dw)) < base {
            improved += 1;
        }
    }
    verdict(
        dense_err <= 1e-8 && improved == 0,
        format!(
            "dense solve max diff {dense_err:.2e} (tol 1e-8); {improved}/{trials} random 1% perturbations \
             reduced the empirical MSE over {realizations} realisations"
        ),
    )
}

fn noiseless_end_to_end() -> Verdict {
    let mut failures = Vec::new();
    let mut total_bits = 0;
    for waveform in [WaveformKind::Otfs, WaveformKind::Ofdm] {
        for qam in [4, 16] {
            let mut cfg = SimConfig::desk();
            cfg.waveform = waveform;
            cfg.qam_order = qam;
            cfg.estimator = EstimatorKind::PerfectCsi;
            cfg.snr_db = f64::INFINITY;
            cfg.osc = None;
            cfg.channel.velocity_kmh = None;
            cfg.channel.carrier_hz = None;
            cfg.frames = 100;
            let r = run_point(&cfg, options(), &WienerCache::new()).unwrap();
            total_bits += r.bit_count;
            if r.bit_errors != 0 {
                failures.push(format!("{waveform}/{qam}-QAM: {} errors", r.bit_errors));
            }
        }
    }
    verdict(
        failures.is_empty(),
        if failures.is_empty() {
            format!("0 bit errors over {total_bits} bits (both waveforms, 4/16-QAM, 100 frames each)")
        } else {
            failures.join("; ")
        },
    )
}

fn estimator_ordering() -> Verdict {
    let start = Instant::now();
    let mut base = SimConfig::desk();
    base.snr_db = 0.0;
    base.channel.velocity_kmh = None;
    base.channel.carrier_hz = None;
    base.channel.doppler_hz = Some(0.0);
    base.k_over = 2.0;
    base.frames = 2000;
    let ts = base.sample_period();
    let levels = [4e-5, 4e-4, 4e-3];
    let cache = WienerCache::new();
    let mut rows = Vec::new();
    for x in levels {
        let mut nmse = [0.0; 3];
        for (slot, est) in [EstimatorKind::Proposed, EstimatorKind::Bem, EstimatorKind::Spline].iter().enumerate() {
            let mut cfg = base.clone();
            cfg.estimator = *est;
            cfg.osc = Some(OscillatorConfig {
                kind: OscillatorKind::Fro,
                beta_pn: x / ts,
                f_pll: 0.0,
            });
            nmse[slot] = run_point(&cfg, options(), &cache).unwrap().nmse_mean;
        }
        rows.push(nmse);
    }
    let secs = start.elapsed().as_secs_f64();
    let below_spline = rows.iter().all(|r| r[0] < r[2]);
    let (lo, hi) = (rows[0], rows[2]);
    let gap_hi = db(hi[1]) - db(hi[0]);
    let ok = below_spline && gap_hi >= 3.0 && lo[0] <= 1.1 * lo[1] && secs < 900.0;
    let table: Vec<String> = levels
        .iter()
        .zip(&rows)
        .map(|(x, r)| format!("βT_s={x:.0e}: {:.2}/{:.2}/{:.2} dB", db(r[0]), db(r[1]), db(r[2])))
        .collect();
    verdict(
        ok,
        format!(
            "proposed/BEM/spline NMSE {}; gap at highest {gap_hi:.2} dB (need >= 3); {secs:.0} s",
            table.join(", ")
        ),
    )
}

/// One-sided 95% upper confidence bound of the mean per-frame difference in
/// bit errors `a - b` over paired seeds.
fn paired_upper_bound(a: &[FrameOutcome], b: &[FrameOutcome]) -> (f64, f64) {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x.bit_errors as f64 - y.bit_errors as f64).collect();
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, mean + 1.645 * (var / n).sqrt())
}

fn ber_of(frames: &[FrameOutcome]) -> f64 {
    let e: usize = frames.iter().map(|f| f.bit_errors).sum();
    let c: usize = frames.iter().map(|f| f.bit_count).sum();
    e as f64 / c as f64
}

fn waveform_ordering() -> Verdict {
    let mut base = SimConfig::desk();
    base.osc = Some(OscillatorConfig {
        kind: OscillatorKind::Fro,
        beta_pn: 500.0,
        f_pll: 0.0,
    });
    let cache = WienerCache::new();
    let mut ok = true;
    let mut notes = Vec::new();

    base.frames = 5000;
    for snr in [10.0, 20.0] {
        let run = |w| {
            let mut cfg = base.clone();
            cfg.waveform = w;
            cfg.snr_db = snr;
            run_frames(&cfg, options(), &cache).unwrap()
        };
        let (otfs, ofdm) = (run(WaveformKind::Otfs), run(WaveformKind::Ofdm));
        let (_, upper) = paired_upper_bound(&otfs, &ofdm);
        ok &= upper < 0.0;
        notes.push(format!(
            "SNR {snr} dB: OTFS {:.2e} vs OFDM {:.2e} (95% bound on error diff/frame {upper:.3})",
            ber_of(&otfs),
            ber_of(&ofdm)
        ));
    }

    base.frames = 2000;
    base.snr_db = 0.0;
    base.channel.normalization = ChannelNormalization::Element;
    for w in [WaveformKind::Otfs, WaveformKind::Ofdm] {
        let bers: Vec<f64> = [4, 8, 16]
            .iter()
            .map(|q| {
                let mut cfg = base.clone();
                cfg.waveform = w;
                cfg.channel.q = *q;
                run_point(&cfg, options(), &cache).unwrap().ber
            })
            .collect();
        ok &= bers.windows(2).all(|p| p[1] < p[0]);
        notes.push(format!("{w} BER at Q=4/8/16: {:.2e}/{:.2e}/{:.2e}", bers[0], bers[1], bers[2]));
    }
    verdict(ok, notes.join("; "))
}

fn coded_ordering() -> Verdict {
    let mut base = SimConfig::desk();
    base.qam_order = 16;
    base.coding = Some(CodecConfig::default());
    base.k_over = 2.5;
    base.frames = 2000;
    base.osc = Some(OscillatorConfig {
        kind: OscillatorKind::Fro,
        beta_pn: 750.0,
        f_pll: 0.0,
    });
    let cache = WienerCache::new();
    let mut found = false;
    let mut notes = Vec::new();
    for snr in [15.0, 20.0, 25.0] {
        let coded = |w, e| {
            let mut cfg = base.clone();
            cfg.waveform = w;
            cfg.estimator = e;
            cfg.snr_db = snr;
            run_point(&cfg, options(), &cache).unwrap().coded_ber.unwrap()
        };
        let best = coded(WaveformKind::Otfs, EstimatorKind::Proposed);
        let bem = coded(WaveformKind::Otfs, EstimatorKind::Bem);
        let ofdm = coded(WaveformKind::Ofdm, EstimatorKind::Proposed);
        let holds = best <= 1e-2 && best < bem && bem < ofdm;
        found |= holds;
        notes.push(format!(
            "SNR {snr} dB: OTFS-proposed {best:.2e}, OTFS-BEM {bem:.2e}, OFDM-proposed {ofdm:.2e}{}",
            if holds { " (ordered)" } else { "" }
        ));
    }
    verdict(found, notes.join("; "))
}

fn determinism() -> Verdict {
    let mut cfg = SimConfig::desk();
    cfg.frames = 24;
    cfg.coding = Some(CodecConfig::default());
    let mut axes = SweepAxes::default();
    axes.add("snr=0,15").unwrap();
    axes.add("estimator=proposed,bem,spline").unwrap();
    axes.add("waveform=otfs,ofdm").unwrap();
    let csv = |workers| {
        let records = run_sweep(&cfg, &axes, RunOptions { workers, timing: false }).unwrap();
        let mut out = Vec::new();
        write_csv(&records, &mut out).unwrap();
        out
    };
    let reference = csv(1);
    let mismatched: Vec<usize> = [1, 2, 3, 8].into_iter().filter(|w| csv(*w) != reference).collect();
    verdict(
        mismatched.is_empty(),
        format!(
            "{} CSV bytes over 12 points; worker counts 1, 2, 3, 8 {}",
            reference.len(),
            if mismatched.is_empty() {
                "byte-identical".to_string()
            } else {
                format!("differ for {mismatched:?}")
            }
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 8] = [
        ("transform oracles", transform_oracles),
        ("statistical model fidelity", statistical_fidelity),
        ("Wiener correctness", wiener_correctness),
        ("noiseless end-to-end", noiseless_end_to_end),
        ("estimator NMSE ordering", estimator_ordering),
        ("waveform BER ordering", waveform_ordering),
        ("coded BER ordering", coded_ordering),
        ("determinism", determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let id = (i + 1).to_string();
        if !filter.is_empty() && !filter.iter().any(|f| *f == id || name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let v = check();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {id}. {name}: {} [{:.1} s]", v.detail, start.elapsed().as_secs_f64());
        failed += usize::from(!v.pass);
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
