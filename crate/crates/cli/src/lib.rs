//! Command-line front end for the AP throughput model and simulator.

pub mod config;
pub mod report;

use std::path::{Path, PathBuf};

pub use config::{parse_config, read_config, render as render_config, ConfigError, Format, Mode, RunConfig, Settings};
pub use report::{run_tables, RunOutcome, Source, Status};

/// Environment variable naming the directory that relative output paths resolve against.
pub const OUTPUT_DIR_ENV: &str = "APTHRU_OUTPUT_DIR";

pub fn resolve_output(path: &Path) -> PathBuf {
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}
