//! Uncoded BER against the number of RIS elements for OTFS and OFDM with
//! the Wiener estimator.
//!
//! cargo run --release --example ber_vs_ris_elements [frames]

use ris_otfs::harness::{run_sweep, RunOptions, SimConfig, SweepAxes};

fn main() -> ris_otfs::Result<()> {
    let frames = std::env::args().nth(1).map_or(Ok(300), |s| s.parse()).expect("frame count");
    let cfg = SimConfig::load(
        concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/ber_ris_elements.toml"),
        &[format!("frames={frames}")],
    )?;
    let mut axes = SweepAxes::default();
    axes.add("q=4,8,16")?;
    axes.add("waveform=otfs,ofdm")?;
    for r in run_sweep(&cfg, &axes, RunOptions::default())? {
        println!("Q={:>3} {:>5}: BER {:.3e}", r.q, r.waveform.to_string(), r.ber);
    }
    Ok(())
}
