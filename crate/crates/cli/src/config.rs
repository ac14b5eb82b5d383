//! TOML run configuration.
//!
//! ```toml
//! profile = "802.11b@11"
//! downloads = [24, 20, 20, 16, 16, 16]
//! uploads = [24, 24, 24, 24, 20, 20, 16, 16, 16]
//! mode = "both"
//! replications = 30
//! ```
//!
//! Every key except `profile` and the connection lists has a default.
//! Windows are in packets.

use std::fmt;
use std::str::FromStr;

use anyhow::{anyhow, Result};
use apthru_core::{CollisionPolicy, ModelOptions, Scenario, SimOptions, Standard, TimingFidelity};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Analyze,
    Simulate,
    Both,
}

impl Mode {
    pub fn analyzes(self) -> bool {
        self != Mode::Simulate
    }

    pub fn simulates(self) -> bool {
        self != Mode::Analyze
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Markdown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PolicyArg {
    /// Every collision lasts as long as a TCP-ACK collision.
    #[serde(alias = "paper")]
    #[value(alias = "paper")]
    Simple,
    /// Expected longest initial frame over the colliders.
    Mixture,
}

impl From<PolicyArg> for CollisionPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Simple => CollisionPolicy::TcpAckLength,
            PolicyArg::Mixture => CollisionPolicy::Mixture,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FidelityArg {
    /// MAC-ACK after a TCP-ACK sent at the data rate.
    #[serde(rename = "data-rate-ack", alias = "paper")]
    #[value(alias = "paper")]
    DataRateAck,
    /// MAC-ACK at the control rate.
    Standards,
}

impl From<FidelityArg> for TimingFidelity {
    fn from(f: FidelityArg) -> Self {
        match f {
            FidelityArg::DataRateAck => TimingFidelity::DataRateAck,
            FidelityArg::Standards => TimingFidelity::Standards,
        }
    }
}

/// Run-control knobs shared by config files and presets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Settings {
    pub mode: Mode,
    pub replications: usize,
    pub horizon_s: f64,
    pub warmup_s: f64,
    pub seed: u64,
    pub collision_policy: PolicyArg,
    pub fidelity: FidelityArg,
    pub n_max: usize,
    pub format: Format,
    /// Allowed |analysis - simulation| / analysis, in percent.
    pub tolerance_pct: f64,
}

mod defaults {
    use super::*;

    pub fn mode() -> Mode {
        Mode::Both
    }
    pub fn replications() -> usize {
        30
    }
    pub fn horizon_s() -> f64 {
        20.0
    }
    pub fn warmup_s() -> f64 {
        2.0
    }
    pub fn seed() -> u64 {
        1
    }
    pub fn collision_policy() -> PolicyArg {
        PolicyArg::Simple
    }
    pub fn fidelity() -> FidelityArg {
        FidelityArg::Standards
    }
    pub fn n_max() -> usize {
        apthru_core::analytic::DEFAULT_N_MAX
    }
    pub fn format() -> Format {
        Format::Markdown
    }
    pub fn tolerance_pct() -> f64 {
        2.0
    }
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            mode: defaults::mode(),
            replications: defaults::replications(),
            horizon_s: defaults::horizon_s(),
            warmup_s: defaults::warmup_s(),
            seed: defaults::seed(),
            collision_policy: defaults::collision_policy(),
            fidelity: defaults::fidelity(),
            n_max: defaults::n_max(),
            format: defaults::format(),
            tolerance_pct: defaults::tolerance_pct(),
        }
    }
}

impl Settings {
    pub fn validate(&self) -> Result<()> {
        match self.problem() {
            Some((_, msg)) => Err(anyhow!(msg)),
            None => Ok(()),
        }
    }

    /// The first invalid setting, as (config key, message).
    fn problem(&self) -> Option<(&'static str, String)> {
        if self.mode.simulates() && self.replications == 0 {
            return Some(("replications", "replications must be at least 1 when simulating".into()));
        }
        if self.n_max < 10 {
            return Some(("n_max", format!("n_max must be at least 10, got {}", self.n_max)));
        }
        if !(self.tolerance_pct.is_finite() && self.tolerance_pct >= 0.0) {
            return Some(("tolerance_pct", format!("tolerance must be a non-negative percentage, got {}", self.tolerance_pct)));
        }
        if !(self.horizon_s.is_finite() && self.horizon_s > 0.0) {
            return Some(("horizon_s", format!("horizon_s must be positive, got {}", self.horizon_s)));
        }
        if !(self.warmup_s >= 0.0 && self.warmup_s < self.horizon_s) {
            return Some(("warmup_s", format!("warmup_s must lie in [0, horizon_s), got {}", self.warmup_s)));
        }
        None
    }

    pub fn model_options(&self) -> ModelOptions {
        ModelOptions {
            n_max: self.n_max,
            collision_policy: self.collision_policy.into(),
            fidelity: self.fidelity.into(),
        }
    }

    pub fn sim_options(&self) -> SimOptions {
        SimOptions {
            horizon_s: self.horizon_s,
            warmup_s: self.warmup_s,
            fidelity: self.fidelity.into(),
            ..Default::default()
        }
    }
}

/// A single-profile scenario plus its run settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub profile: Standard,
    pub downloads: Vec<u32>,
    pub uploads: Vec<u32>,
    pub settings: Settings,
}

impl RunConfig {
    pub fn scenario(&self) -> Result<Scenario> {
        Ok(Scenario::from_windows(&self.downloads, &self.uploads)?)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    profile: Option<String>,
    #[serde(default)]
    downloads: Vec<i64>,
    #[serde(default)]
    uploads: Vec<i64>,
    #[serde(default = "defaults::mode")]
    mode: Mode,
    #[serde(default = "defaults::replications")]
    replications: usize,
    #[serde(default = "defaults::horizon_s")]
    horizon_s: f64,
    #[serde(default = "defaults::warmup_s")]
    warmup_s: f64,
    #[serde(default = "defaults::seed")]
    seed: u64,
    #[serde(default = "defaults::collision_policy")]
    collision_policy: PolicyArg,
    #[serde(default = "defaults::fidelity")]
    fidelity: FidelityArg,
    #[serde(default = "defaults::n_max")]
    n_max: usize,
    #[serde(default = "defaults::format")]
    format: Format,
    #[serde(default = "defaults::tolerance_pct")]
    tolerance_pct: f64,
}

/// A config error pointing at the offending line when one can be found.
#[derive(Debug)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "config line {line}: {}", self.message),
            None => write!(f, "config: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn line_of(text: &str, key: &str) -> Option<usize> {
    text.lines().position(|l| {
        let l = l.trim_start();
        l.strip_prefix(key).is_some_and(|rest| rest.trim_start().starts_with('='))
    })
    .map(|i| i + 1)
}

fn at(text: &str, key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError { line: line_of(text, key), message: message.into() }
}

fn windows(text: &str, key: &str, raw: &[i64]) -> std::result::Result<Vec<u32>, ConfigError> {
    raw.iter()
        .enumerate()
        .map(|(i, &w)| {
            u32::try_from(w)
                .ok()
                .filter(|&w| w > 0)
                .ok_or_else(|| at(text, key, format!("{key}[{i}] = {w}: windows must be positive packet counts")))
        })
        .collect()
}

pub fn parse_config(text: &str) -> std::result::Result<RunConfig, ConfigError> {
    let doc: Document = toml::from_str(text).map_err(|e| ConfigError {
        line: e.span().map(|s| text[..s.start].matches('\n').count() + 1),
        message: e.message().to_string(),
    })?;
    let profile = doc
        .profile
        .as_deref()
        .ok_or_else(|| ConfigError { line: None, message: "missing `profile` (e.g. \"802.11b@11\")".into() })?;
    let profile = Standard::from_str(profile).map_err(|e| at(text, "profile", e.to_string()))?;
    let downloads = windows(text, "downloads", &doc.downloads)?;
    let uploads = windows(text, "uploads", &doc.uploads)?;
    if downloads.is_empty() && uploads.is_empty() {
        return Err(ConfigError {
            line: line_of(text, "downloads").or_else(|| line_of(text, "uploads")),
            message: "scenario has no connections; list windows under `downloads` and/or `uploads`".into(),
        });
    }
    let settings = Settings {
        mode: doc.mode,
        replications: doc.replications,
        horizon_s: doc.horizon_s,
        warmup_s: doc.warmup_s,
        seed: doc.seed,
        collision_policy: doc.collision_policy,
        fidelity: doc.fidelity,
        n_max: doc.n_max,
        format: doc.format,
        tolerance_pct: doc.tolerance_pct,
    };
    if let Some((key, message)) = settings.problem() {
        return Err(at(text, key, message));
    }
    Ok(RunConfig { profile, downloads, uploads, settings })
}

pub fn render(config: &RunConfig) -> String {
    let s = &config.settings;
    let doc = Document {
        profile: Some(config.profile.to_string()),
        downloads: config.downloads.iter().map(|&w| i64::from(w)).collect(),
        uploads: config.uploads.iter().map(|&w| i64::from(w)).collect(),
        mode: s.mode,
        replications: s.replications,
        horizon_s: s.horizon_s,
        warmup_s: s.warmup_s,
        seed: s.seed,
        collision_policy: s.collision_policy,
        fidelity: s.fidelity,
        n_max: s.n_max,
        format: s.format,
        tolerance_pct: s.tolerance_pct,
    };
    toml::to_string(&doc).expect("config document always serializes")
}

pub fn read_config(path: &std::path::Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| anyhow!("{}: {e}", path.display()))?;
    parse_config(&text).map_err(|e| anyhow!("{}: {e}", path.display()))
}
