//! One received frame, four channel estimates: impulse-pilot snapshots
//! interpolated by the Wiener filter bank, the exponential basis fit and
//! the cubic spline, against the true effective channel.
//!
//! cargo run --release --example channel_estimation

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ris_otfs::channel::{add_awgn, apply_channel, cascade_ris_channel, design_ris_phases, RisChannel};
use ris_otfs::detection::QamConstellation;
use ris_otfs::estimation::{
    apply_wiener, bem_estimate, build_wiener, nmse, spline_estimate, stage1_estimate, CorrelationModel,
    WienerFilterBank,
};
use ris_otfs::harness::SimConfig;
use ris_otfs::phase_noise::apply_phase_noise;
use ris_otfs::waveform::{FrameLayout, WaveformKind};

fn main() -> ris_otfs::Result<()> {
    let mut cfg = SimConfig::desk();
    cfg.snr_db = 15.0;
    cfg.osc.as_mut().expect("desk profile has an oscillator").beta_pn = 750.0;
    let ts = cfg.sample_period();
    let doppler = cfg.max_doppler()?;
    let osc = cfg.oscillator();
    let noise_var = cfg.noise_var();
    let qam = QamConstellation::new(4)?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);

    for kind in [WaveformKind::Otfs, WaveformKind::Ofdm] {
        let layout = FrameLayout::new(kind, cfg.frame, cfg.pilot_power())?;
        let n = layout.frame_len();
        let bits: Vec<u8> = (0..layout.data_capacity() * 2).map(|_| rng.random_range(0..2)).collect();
        let mut grid = layout.empty_grid();
        grid.fill_data(&qam.map(&bits)?)?;
        let s = layout.modulate(&grid)?;

        let ris = RisChannel::sample(cfg.channel.q, &cfg.channel.link_model()?, &cfg.channel.link_model()?, ts, &mut rng);
        let ris = design_ris_phases(&ris, cfg.channel.ris_strategy, &mut rng);
        let h = cascade_ris_channel(&ris, n, ts).with_taps(cfg.frame.channel_len)?;
        let trace = osc.gen_trace(n, &mut rng);
        let truth = h.with_phase_noise(&trace)?;
        let y = add_awgn(&apply_phase_noise(&apply_channel(&s, &h)?, &trace)?, noise_var, &mut rng);

        let snap = stage1_estimate(&y, &layout.pattern, cfg.frame.channel_len, noise_var)?;
        let model = CorrelationModel::new(doppler, osc, ts)?;
        let bank = build_wiener(&model, &snap.pilot_indices, n, noise_var, layout.pattern.pilot_power())?;

        // banks are computed offline and can be stored
        let path = std::env::temp_dir().join(format!("wiener-{kind}.wfbk"));
        bank.save(&path)?;
        let bank = WienerFilterBank::load(&path)?;
        std::fs::remove_file(&path)?;

        println!("{kind}: {} pilots, active taps {:?}", snap.n_pilots(), snap.active_taps);
        let estimates = [
            ("wiener", apply_wiener(&bank, &snap)?),
            ("bem", bem_estimate(&snap, doppler, osc.beta_pn, ts, 2.5, n)?),
            ("spline", spline_estimate(&snap, n)?),
        ];
        for (name, g) in &estimates {
            println!("  {name:>7}: NMSE {:6.2} dB", 10.0 * nmse(g, &truth)?.log10());
        }
    }
    Ok(())
}
