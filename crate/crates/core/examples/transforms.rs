//! OTFS and OFDM frames through an ideal link, and the delay-Doppler view
//! of oscillator phase noise.
//!
//! cargo run --example transforms

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ris_otfs::numerics::{apply_dd_phase, dense_dd_phase_matrix, ComplexVector};
use ris_otfs::phase_noise::OscillatorModel;
use ris_otfs::waveform::{default_pilot_power, FrameConfig, FrameLayout, WaveformKind};
use ris_otfs::Complex64;

fn main() -> ris_otfs::Result<()> {
    let cfg = FrameConfig::new(32, 8, 8, 60e3, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for kind in [WaveformKind::Otfs, WaveformKind::Ofdm] {
        let layout = FrameLayout::new(kind, cfg, default_pilot_power(cfg.channel_len))?;
        let data: Vec<Complex64> = (0..layout.data_capacity())
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let mut grid = layout.empty_grid();
        grid.fill_data(&data)?;
        let frame = layout.modulate(&grid)?;
        let back = layout.demodulate(&frame)?.data_symbols();
        let err = back.iter().zip(&data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        let (rows, cols) = layout.grid_shape();
        println!(
            "{kind}: {rows}x{cols} grid, {} data cells, {} pilots, {} samples, round-trip error {err:.1e}",
            layout.data_capacity(),
            layout.pattern.n_pilots(),
            layout.frame_len(),
        );
    }

    // phase noise in the delay-Doppler domain
    let (m, n) = (8, 8);
    let osc = OscillatorModel::free_running(5e3, cfg.sample_period());
    let theta = osc.gen_trace(m * n, &mut rng);
    let dense = dense_dd_phase_matrix(theta.as_slice(), m, n)?;
    let x: ComplexVector = (0..m * n).map(|_| Complex64::new(rng.random(), rng.random())).collect();
    let fast = apply_dd_phase(theta.as_slice(), &x, m, n)?;
    let slow = &dense * nalgebra::DVector::from_vec(x);
    let err = fast.iter().zip(slow.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    println!("delay-Doppler phase-noise matrix {m}x{n}: fast vs dense max difference {err:.1e}");
    let leak: f64 = (0..m).map(|d| dense[(m + d, d)].norm_sqr()).sum::<f64>() / m as f64;
    println!("mean power leaked into the first Doppler neighbour: {leak:.3e}");
    Ok(())
}
