//! Free-running and PLL oscillators: empirical variograms against the
//! closed forms.
//!
//! cargo run --release --example phase_noise

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ris_otfs::phase_noise::OscillatorModel;

fn main() {
    let ts = 1.0 / 1.92e6;
    let models = [
        ("free-running", OscillatorModel::free_running(500.0, ts)),
        ("PLL", OscillatorModel::pll(500.0, 2e4, ts)),
    ];
    let lags = [1usize, 16, 64, 256, 1024, 4096];
    let traces = 4000;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (name, osc) in models {
        let mut sumsq = vec![0.0; lags.len()];
        for _ in 0..traces {
            let t = osc.gen_trace(lags[lags.len() - 1] + 1, &mut rng);
            for (s, lag) in sumsq.iter_mut().zip(lags) {
                *s += t.as_slice()[lag].powi(2);
            }
        }
        println!("{name} oscillator, beta = {} Hz", osc.beta_pn);
        println!("  {:>6} {:>12} {:>12} {:>10}", "lag", "empirical", "model", "E[psi]");
        for (s, lag) in sumsq.iter().zip(lags) {
            println!(
                "  {lag:>6} {:>12.4e} {:>12.4e} {:>10.4}",
                s / traces as f64,
                osc.variogram(lag as u64),
                osc.psi_autocorr(lag as u64, 0)
            );
        }
        if let Some(v) = osc.stationary_variance() {
            println!("  stationary variance {v:.4e} rad^2");
        }
    }
}
