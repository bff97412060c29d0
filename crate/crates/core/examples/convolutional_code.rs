//! K = 7 rate-1/2 convolutional code over BPSK in AWGN: hard against
//! soft-decision Viterbi decoding.
//!
//! cargo run --release --example convolutional_code

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use ris_otfs::detection::{ber, conv_encode, viterbi_decode, CodecConfig, DecoderInput};

fn main() -> ris_otfs::Result<()> {
    let codec = CodecConfig::default();
    let blocks = 200;
    let block = 500;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    println!("{:>8} {:>10} {:>10} {:>10}", "Eb/N0 dB", "uncoded", "hard", "soft");
    for ebn0_db in [0.0f64, 1.0, 2.0, 3.0, 4.0, 5.0] {
        // rate 1/2: Es = Eb / 2
        let sigma = (1.0 / (2.0 * 0.5 * 10f64.powf(ebn0_db / 10.0))).sqrt();
        let (mut raw, mut hard, mut soft) = (0.0, 0.0, 0.0);
        for _ in 0..blocks {
            let info: Vec<u8> = (0..block).map(|_| rng.random_range(0..2)).collect();
            let code = conv_encode(&info, &codec)?;
            let rx: Vec<f64> = code
                .iter()
                .map(|b| 1.0 - 2.0 * *b as f64 + sigma * Distribution::<f64>::sample(&StandardNormal, &mut rng))
                .collect();
            let bits: Vec<u8> = rx.iter().map(|r| u8::from(*r < 0.0)).collect();
            let llr: Vec<f64> = rx.iter().map(|r| 2.0 * r / (sigma * sigma)).collect();
            raw += ber(&code, &bits)?;
            hard += ber(&info, &viterbi_decode(DecoderInput::Hard(&bits), &codec)?)?;
            soft += ber(&info, &viterbi_decode(DecoderInput::Soft(&llr), &codec)?)?;
        }
        let b = blocks as f64;
        println!("{ebn0_db:>8.1} {:>10.2e} {:>10.2e} {:>10.2e}", raw / b, hard / b, soft / b);
    }
    Ok(())
}
