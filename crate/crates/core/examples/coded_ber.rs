//! Coded 16-QAM BER against SNR at 500 km/h with phase noise, for the
//! Wiener and basis-expansion estimators on both waveforms. Results are
//! written as CSV to standard output.
//!
//! cargo run --release --example coded_ber [frames]

use ris_otfs::harness::{run_sweep, write_csv, RunOptions, SimConfig, SweepAxes};

fn main() -> ris_otfs::Result<()> {
    let frames = std::env::args().nth(1).map_or(Ok(200), |s| s.parse()).expect("frame count");
    let cfg = SimConfig::load(
        concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/coded_ber.toml"),
        &[format!("frames={frames}")],
    )?;
    let mut axes = SweepAxes::default();
    axes.add("snr=15:5:25")?;
    axes.add("estimator=proposed,bem")?;
    axes.add("waveform=otfs,ofdm")?;
    let records = run_sweep(&cfg, &axes, RunOptions::default())?;
    for r in &records {
        eprintln!(
            "{:>4} dB {:>5} {:>9}: coded BER {:.3e}",
            r.snr_db,
            r.waveform.to_string(),
            r.estimator.to_string(),
            r.coded_ber.unwrap_or(f64::NAN)
        );
    }
    write_csv(&records, std::io::stdout().lock())
}
