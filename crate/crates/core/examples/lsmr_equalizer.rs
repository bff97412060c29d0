//! Delay-time LSMR equalisation with interference cancellation: symbol
//! errors after each pass, known channel, both waveforms.
//!
//! cargo run --release --example lsmr_equalizer

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ris_otfs::channel::{add_awgn, apply_channel};
use ris_otfs::detection::{lsmr_ic_equalize, QamConstellation};
use ris_otfs::harness::{SimConfig, Simulation};
use ris_otfs::phase_noise::apply_phase_noise;
use ris_otfs::waveform::WaveformKind;

fn main() -> ris_otfs::Result<()> {
    let frames = 50;
    let qam = QamConstellation::new(16)?;
    for kind in [WaveformKind::Otfs, WaveformKind::Ofdm] {
        let mut cfg = SimConfig::desk();
        cfg.waveform = kind;
        cfg.snr_db = 20.0;
        cfg.qam_order = 16;
        let sim = Simulation::new(&cfg)?;
        let layout = sim.layout();
        let osc = cfg.oscillator();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut errors = vec![0usize; cfg.equalizer.ic_iterations];
        let mut symbols = 0;
        for seed in 0..frames {
            let bits: Vec<u8> = (0..layout.data_capacity() * 4).map(|_| rng.random_range(0..2)).collect();
            let tx = qam.map(&bits)?;
            let mut grid = layout.empty_grid();
            grid.fill_data(&tx)?;
            let s = layout.modulate(&grid)?;
            let h = sim.draw_channel(seed)?;
            let trace = osc.gen_trace(s.len(), &mut rng);
            let y = add_awgn(&apply_phase_noise(&apply_channel(&s, &h)?, &trace)?, cfg.noise_var(), &mut rng);
            let eq = lsmr_ic_equalize(&y, &h.with_phase_noise(&trace)?, layout, &cfg.equalizer, &qam)?;
            for (count, pass) in errors.iter_mut().zip(&eq.passes) {
                *count += pass.iter().zip(&tx).filter(|(x, t)| qam.decide(**x) != **t).count();
            }
            symbols += tx.len();
        }
        println!("{kind}, 16-QAM, {} dB, {frames} frames", cfg.snr_db);
        for (i, e) in errors.iter().enumerate() {
            println!("  pass {}: SER {:.4}", i + 1, *e as f64 / symbols as f64);
        }
    }
    Ok(())
}
