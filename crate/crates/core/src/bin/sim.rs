//! Batch front end: `sim run`, `sim sweep` and `sim validate-config`.
//!
//! Exit codes: 0 success, 2 configuration error, 3 runtime error.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ris_otfs::estimation::WienerCache;
use ris_otfs::harness::{
    emit_results, run_point, run_sweep, write_csv, write_jsonl, MetricsRecord, OutputFormat, RunOptions, SimConfig,
    SweepAxes,
};
use ris_otfs::Error;

#[derive(Parser)]
#[command(name = "sim", version, about = "RIS-aided OTFS/OFDM link simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one operating point.
    Run(RunArgs),
    /// Simulate the Cartesian product of one or more axes.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// `name=start:step:stop` or `name=a,b,c`; names: snr, beta, q, estimator, waveform.
        #[arg(long = "axis", required = true)]
        axes: Vec<String>,
    },
    /// Parse and validate a configuration, then print it back as TOML.
    ValidateConfig(ConfigArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Desk,
    Full,
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML or JSON configuration file.
    #[arg(long, required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Built-in configuration used instead of a file.
    #[arg(long, value_enum, conflicts_with = "config")]
    preset: Option<Preset>,
    /// Dotted `key=value` assignment applied on top of the file, e.g. `channel.q=16`.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// `csv` or `jsonl`.
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
    /// Worker threads (0 = one per core).
    #[arg(long, env = "SIM_WORKERS", default_value_t = 0)]
    workers: usize,
    /// Overrides `base_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `frames`.
    #[arg(long)]
    frames: Option<usize>,
    /// Record wall-clock time per point (output is then not reproducible).
    #[arg(long)]
    timing: bool,
}

impl ConfigArgs {
    fn load(&self) -> ris_otfs::Result<SimConfig> {
        match (&self.config, self.preset) {
            (Some(path), _) => SimConfig::load(path, &self.overrides),
            (None, Some(Preset::Desk)) => SimConfig::desk().with_overrides(&self.overrides),
            (None, Some(Preset::Full)) => SimConfig::full_scale().with_overrides(&self.overrides),
            (None, None) => Err(Error::Config("no configuration given".into())),
        }
    }
}

impl RunArgs {
    fn load(&self) -> ris_otfs::Result<SimConfig> {
        let mut overrides = self.config.overrides.clone();
        if let Some(seed) = self.seed {
            overrides.push(format!("base_seed={seed}"));
        }
        if let Some(frames) = self.frames {
            overrides.push(format!("frames={frames}"));
        }
        ConfigArgs {
            config: self.config.config.clone(),
            preset: self.config.preset,
            overrides,
        }
        .load()
    }

    fn options(&self) -> RunOptions {
        RunOptions {
            workers: self.workers,
            timing: self.timing,
        }
    }

    fn emit(&self, records: &[MetricsRecord]) -> ris_otfs::Result<()> {
        match &self.out {
            Some(path) => emit_results(records, self.format, path),
            None => {
                let stdout = std::io::stdout().lock();
                match self.format {
                    OutputFormat::Csv => write_csv(records, stdout),
                    OutputFormat::Jsonl => write_jsonl(records, stdout),
                }
            }
        }
    }
}

fn execute(command: Command) -> ris_otfs::Result<()> {
    match command {
        Command::Run(args) => {
            let cfg = args.load()?;
            let record = run_point(&cfg, args.options(), &WienerCache::new())?;
            args.emit(&[record])
        }
        Command::Sweep { run, axes } => {
            let cfg = run.load()?;
            let mut sweep = SweepAxes::default();
            for a in &axes {
                sweep.add(a)?;
            }
            let records = run_sweep(&cfg, &sweep, run.options())?;
            run.emit(&records)
        }
        Command::ValidateConfig(args) => {
            let cfg = args.load()?;
            let text = cfg.to_toml_string()?;
            std::io::stdout().lock().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 2 } else { 3 })
        }
    }
}
