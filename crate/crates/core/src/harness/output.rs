use std::io::{BufRead, Write};
use std::path::Path;

use super::sweep::MetricsRecord;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Jsonl,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "jsonl" => Ok(Self::Jsonl),
            other => Err(Error::Config(format!("unknown output format `{other}`"))),
        }
    }
}

const CSV_HEADER: &[&str] = &[
    "waveform", "estimator", "m", "n", "n_cp", "subcarrier_spacing", "channel_len", "delay_spread", "doppler_hz",
    "q", "ris_strategy", "sinusoids_per_path", "normalization", "osc_kind", "beta_pn", "f_pll", "qam_order", "coded", "snr_db",
    "pilot_power", "k_over", "threshold", "ic_iterations", "lsmr_iterations", "damping", "frames", "base_seed",
    "nmse_mean", "ber", "coded_ber", "bit_errors", "bit_count", "coded_bit_errors", "coded_bit_count",
    "frames_run", "wall_time_s", "digest",
];

/// Writes a header row followed by one row per record.
pub fn write_csv<W: Write>(records: &[MetricsRecord], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<MetricsRecord>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(Error::invalid("unexpected CSV header"));
    }
    r.deserialize().map(|rec| rec.map_err(Error::from)).collect()
}

pub fn write_jsonl<W: Write>(records: &[MetricsRecord], mut out: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_jsonl<R: BufRead>(input: R) -> Result<Vec<MetricsRecord>> {
    input
        .lines()
        .filter(|l| !matches!(l, Ok(s) if s.trim().is_empty()))
        .map(|l| Ok(serde_json::from_str(&l?)?))
        .collect()
}

/// Writes records to `path` in the given format.
pub fn emit_results(records: &[MetricsRecord], format: OutputFormat, path: impl AsRef<Path>) -> Result<()> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    match format {
        OutputFormat::Csv => write_csv(records, file),
        OutputFormat::Jsonl => write_jsonl(records, file),
    }
}
