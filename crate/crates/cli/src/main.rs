use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use apthru_cli::config::{FidelityArg, PolicyArg};
use apthru_cli::report::{beta_dump, render, replication_log};
use apthru_cli::{read_config, resolve_output, run_tables, Format, Mode, Settings, Source};
use apthru_core::tables::Preset;
use clap::{Parser, ValueEnum};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PresetArg {
    Table1,
    Table2,
    Table3,
}

impl From<PresetArg> for Preset {
    fn from(p: PresetArg) -> Self {
        match p {
            PresetArg::Table1 => Preset::Table1,
            PresetArg::Table2 => Preset::Table2,
            PresetArg::Table3 => Preset::Table3,
        }
    }
}

/// Aggregate TCP throughput of an 802.11 access point: analytic model and DCF simulation.
///
/// Exit status: 0 when every compared row is within tolerance, 1 when some
/// row is not, 2 on errors.
#[derive(Debug, Parser)]
#[command(name = "apthru", version)]
struct Cli {
    /// TOML scenario file.
    #[arg(long, value_name = "PATH", conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Built-in table scenarios.
    #[arg(long)]
    preset: Option<PresetArg>,
    #[arg(long)]
    mode: Option<Mode>,
    #[arg(long, value_name = "N")]
    replications: Option<usize>,
    /// Virtual time per replication, warm-up included.
    #[arg(long, value_name = "SECONDS")]
    horizon: Option<f64>,
    #[arg(long, value_name = "SECONDS")]
    warmup: Option<f64>,
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    #[arg(long)]
    collision_policy: Option<PolicyArg>,
    #[arg(long)]
    fidelity: Option<FidelityArg>,
    #[arg(long, value_name = "N")]
    n_max: Option<usize>,
    #[arg(long)]
    format: Option<Format>,
    /// Allowed analysis/simulation relative error, in percent.
    #[arg(long, value_name = "PCT")]
    tolerance: Option<f64>,
    /// Write the attempt-probability table of every profile used.
    #[arg(long, value_name = "PATH")]
    beta_dump: Option<PathBuf>,
    /// Write the document here instead of stdout.
    #[arg(long, short, value_name = "PATH")]
    output: Option<PathBuf>,
    /// Write one JSON line per simulation replication.
    #[arg(long, value_name = "PATH")]
    replication_log: Option<PathBuf>,
}

impl Cli {
    fn apply(&self, s: &mut Settings) {
        macro_rules! set {
            ($($flag:ident => $field:ident),*) => {$(
                if let Some(v) = self.$flag {
                    s.$field = v;
                }
            )*};
        }
        set!(mode => mode, replications => replications, horizon => horizon_s, warmup => warmup_s,
             seed => seed, collision_policy => collision_policy, fidelity => fidelity,
             n_max => n_max, format => format, tolerance => tolerance_pct);
    }
}

fn write(path: &std::path::Path, text: &str) -> Result<()> {
    let path = resolve_output(path);
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

fn run(cli: &Cli) -> Result<i32> {
    let (source, mut settings) = match (&cli.config, cli.preset) {
        (Some(path), _) => {
            let cfg = read_config(path)?;
            let scenario = cfg.scenario()?;
            (Source::Scenario { profile: cfg.profile, scenario }, cfg.settings)
        }
        (None, Some(p)) => (Source::Preset(p.into()), Settings::default()),
        (None, None) => unreachable!("clap requires --config or --preset"),
    };
    cli.apply(&mut settings);
    settings.validate()?;

    if let Some(path) = &cli.beta_dump {
        write(path, &beta_dump(&source.standards(), settings.n_max + 1)?)?;
    }
    let outcome = run_tables(&source, &settings);
    let doc = render(&outcome, settings.format);
    match &cli.output {
        Some(path) => write(path, &doc)?,
        None => print!("{doc}"),
    }
    if let Some(path) = &cli.replication_log {
        write(path, &replication_log(&outcome))?;
    }
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
