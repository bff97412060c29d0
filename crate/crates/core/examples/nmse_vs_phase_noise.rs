//! Channel-estimation NMSE against oscillator linewidth for the Wiener,
//! basis-expansion and spline estimators (OTFS, 0 dB).
//!
//! cargo run --release --example nmse_vs_phase_noise [frames]

use ris_otfs::harness::{run_sweep, RunOptions, SimConfig, SweepAxes};

fn main() -> ris_otfs::Result<()> {
    let frames = std::env::args().nth(1).map_or(Ok(300), |s| s.parse()).expect("frame count");
    let cfg = SimConfig::load(
        concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/nmse_phase_noise.toml"),
        &[format!("frames={frames}")],
    )?;
    let mut axes = SweepAxes::default();
    axes.add("beta=76.8,768,7680")?;
    axes.add("estimator=proposed,bem,spline")?;
    let records = run_sweep(&cfg, &axes, RunOptions::default())?;
    println!("{:>8} {:>10} {:>10}", "beta Hz", "estimator", "NMSE dB");
    for r in &records {
        println!("{:>8} {:>10} {:>10.2}", r.beta_pn, r.estimator.to_string(), 10.0 * r.nmse_mean.log10());
    }
    Ok(())
}
