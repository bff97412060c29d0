//! Cascaded RIS channels: received power against surface size for the
//! three phase-configuration strategies.
//!
//! cargo run --release --example ris_channel

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ris_otfs::channel::{cascade_ris_channel_raw, design_ris_phases, LinkModel, RisChannel, RisStrategy, TdlProfile};

fn main() {
    let ts = 1.0 / 1.92e6;
    let link = LinkModel {
        profile: TdlProfile::tdl_c(),
        delay_spread: 60e-9,
        max_doppler: 2733.0,
        sinusoids_per_path: 1,
    };
    println!("per-hop taps: {}, frame of 264 samples", link.tap_count(ts));
    println!("{:>4} {:>18} {:>10} {:>10}", "Q", "statistical_align", "random", "all_ones");
    let draws = 400;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for q in [1usize, 4, 16, 64] {
        let mut row = format!("{q:>4}");
        for (i, strategy) in [RisStrategy::StatisticalAlign, RisStrategy::Random, RisStrategy::AllOnes]
            .into_iter()
            .enumerate()
        {
            let mut power = 0.0;
            for _ in 0..draws {
                let ris = RisChannel::sample(q, &link, &link, ts, &mut rng);
                let ris = design_ris_phases(&ris, strategy, &mut rng);
                let g = cascade_ris_channel_raw(&ris, 264, ts);
                power += g.frobenius_sqr() / g.n_samples() as f64;
            }
            let width = if i == 0 { 18 } else { 10 };
            row += &format!(" {:>width$.2}", power / draws as f64);
        }
        println!("{row}");
    }
}
