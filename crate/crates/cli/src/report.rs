//! Runs scenarios or table presets and renders the comparison document.

use std::fmt::Write as _;

use apthru_core::sim::{self, replication_seed};
use apthru_core::tables::{Preset, TableRow};
use apthru_core::{throughput, Scenario, SimStats, Standard, ThroughputReport};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Format, Settings};

/// What to run.
#[derive(Debug, Clone)]
pub enum Source {
    Scenario { profile: Standard, scenario: Scenario },
    Preset(Preset),
}

impl Source {
    pub fn name(&self) -> &'static str {
        match self {
            Source::Scenario { .. } => "config",
            Source::Preset(p) => p.name(),
        }
    }

    pub fn standards(&self) -> Vec<Standard> {
        let mut out: Vec<Standard> = match self {
            Source::Scenario { profile, .. } => vec![*profile],
            Source::Preset(p) => p.rows().iter().map(|r| r.standard).collect(),
        };
        out.dedup();
        out
    }

    fn jobs(&self) -> Vec<Job> {
        match self {
            Source::Scenario { profile, scenario } => {
                vec![Job { row: 1, profile: *profile, scenario: scenario.clone(), golden: None }]
            }
            Source::Preset(p) => p
                .rows()
                .iter()
                .enumerate()
                .map(|(i, r)| Job {
                    row: i + 1,
                    profile: r.standard,
                    scenario: r.scenario().expect("built-in rows are valid"),
                    golden: Some(*r),
                })
                .collect(),
        }
    }

    fn quantities(&self) -> &'static [Quantity] {
        match self {
            Source::Scenario { .. } => &[Quantity::Aggregate, Quantity::Download, Quantity::Upload],
            Source::Preset(p) if p.is_split() => &[Quantity::Download, Quantity::Upload],
            Source::Preset(_) => &[Quantity::Aggregate],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    Aggregate,
    Download,
    Upload,
}

impl Quantity {
    fn name(self) -> &'static str {
        match self {
            Quantity::Aggregate => "aggregate",
            Quantity::Download => "download",
            Quantity::Upload => "upload",
        }
    }

    fn of_report(self, r: &ThroughputReport) -> f64 {
        match self {
            Quantity::Aggregate => r.phi_aggregate_bps,
            Quantity::Download => r.phi_download_bps,
            Quantity::Upload => r.phi_upload_bps,
        }
    }

    fn of_stats(self, s: &SimStats) -> f64 {
        match self {
            Quantity::Aggregate => s.aggregate_bps(),
            Quantity::Download => s.download_bps(),
            Quantity::Upload => s.upload_bps(),
        }
    }

    fn golden(self, row: &TableRow) -> Option<f64> {
        match self {
            Quantity::Aggregate => Some(row.aggregate.analysis_mbps),
            Quantity::Download => row.split.map(|s| s.download.analysis_mbps),
            Quantity::Upload => row.split.map(|s| s.upload.analysis_mbps),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    OutOfTolerance,
    NotCompared,
    Error,
}

impl Status {
    fn name(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::OutOfTolerance => "out_of_tolerance",
            Status::NotCompared => "not_compared",
            Status::Error => "error",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean_mbps: f64,
    pub ci95_half_width_mbps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowResult {
    pub table: &'static str,
    pub row: usize,
    pub profile: String,
    pub downloaders: usize,
    pub uploaders: usize,
    pub w_down: u64,
    pub w_up: u64,
    pub quantity: Quantity,
    pub analysis_mbps: Option<f64>,
    pub simulation: Option<Estimate>,
    pub rel_error: Option<f64>,
    pub golden_mbps: Option<f64>,
    pub golden_rel_error: Option<f64>,
    pub status: Status,
    pub error: Option<String>,
}

/// Replications of one scenario, kept for the per-replication log.
#[derive(Debug, Clone, Serialize)]
pub struct Replications {
    pub table: &'static str,
    pub row: usize,
    pub profile: String,
    pub stats: Vec<SimStats>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub source: &'static str,
    pub settings: Settings,
    pub rows: Vec<RowResult>,
    pub replications: Vec<Replications>,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| matches!(r.status, Status::Ok | Status::NotCompared))
    }

    /// 0 when every compared row is within tolerance, 1 when some row is not,
    /// 2 when some row could not be computed.
    pub fn exit_code(&self) -> i32 {
        if self.rows.iter().any(|r| r.status == Status::Error) {
            2
        } else if self.passed() {
            0
        } else {
            1
        }
    }
}

struct Job {
    row: usize,
    profile: Standard,
    scenario: Scenario,
    golden: Option<TableRow>,
}

struct Computed {
    analysis: Option<Result<ThroughputReport, String>>,
    sims: Option<Result<Vec<SimStats>, String>>,
}

fn compute(job: &Job, settings: &Settings) -> Computed {
    let profile = job.profile.profile();
    let analysis = settings
        .mode
        .analyzes()
        .then(|| throughput(&job.scenario, &profile, settings.model_options()).map_err(|e| e.to_string()));
    let sims = settings.mode.simulates().then(|| {
        (0..settings.replications)
            .into_par_iter()
            .map(|r| sim::run(&job.scenario, &profile, settings.sim_options(), replication_seed(settings.seed, r)))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())
    });
    Computed { analysis, sims }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

pub fn run_tables(source: &Source, settings: &Settings) -> RunOutcome {
    let jobs = source.jobs();
    let computed: Vec<Computed> = jobs.par_iter().map(|j| compute(j, settings)).collect();
    let tolerance = settings.tolerance_pct / 100.0;

    let mut rows = Vec::new();
    let mut replications = Vec::new();
    for (job, c) in jobs.iter().zip(computed) {
        let s = &job.scenario;
        let report = c.analysis.as_ref().and_then(|a| a.as_ref().ok());
        let stats = c.sims.as_ref().and_then(|s| s.as_ref().ok());
        let error = match (&c.analysis, &c.sims) {
            (Some(Err(e)), _) | (_, Some(Err(e))) => Some(e.clone()),
            _ => None,
        };
        if let Some(stats) = stats {
            replications.push(Replications {
                table: source.name(),
                row: job.row,
                profile: job.profile.to_string(),
                stats: stats.clone(),
            });
        }
        for &q in source.quantities() {
            let analysis_mbps = report.map(|r| q.of_report(r) / 1e6);
            let simulation = stats.map(|st| {
                let samples: Vec<f64> = st.iter().map(|x| q.of_stats(x) / 1e6).collect();
                let ci = estimate_quantity(&samples);
                Estimate { mean_mbps: ci.0, ci95_half_width_mbps: ci.1 }
            });
            let rel_error = match (analysis_mbps, simulation) {
                (Some(a), Some(e)) if a > 0.0 => Some(rel(e.mean_mbps, a)),
                (Some(a), Some(e)) => Some(if e.mean_mbps == a { 0.0 } else { f64::INFINITY }),
                _ => None,
            };
            let golden_mbps = job.golden.as_ref().and_then(|g| q.golden(g));
            let golden_rel_error = analysis_mbps.zip(golden_mbps).map(|(a, g)| rel(a, g));
            let status = match (&error, rel_error) {
                (Some(_), _) => Status::Error,
                (None, Some(e)) if e <= tolerance => Status::Ok,
                (None, Some(_)) => Status::OutOfTolerance,
                (None, None) => Status::NotCompared,
            };
            rows.push(RowResult {
                table: source.name(),
                row: job.row,
                profile: job.profile.to_string(),
                downloaders: s.downloaders(),
                uploaders: s.uploaders(),
                w_down: s.download_window(),
                w_up: s.upload_window(),
                quantity: q,
                analysis_mbps,
                simulation,
                rel_error,
                golden_mbps,
                golden_rel_error,
                status,
                error: error.clone(),
            });
        }
    }
    RunOutcome { source: source.name(), settings: *settings, rows, replications }
}

/// Mean and 95% half-width; a single replication has no interval.
fn estimate_quantity(samples: &[f64]) -> (f64, f64) {
    match apthru_core::MeanCi::from_samples(samples) {
        Ok(ci) => (ci.mean, ci.half_width),
        Err(_) => (samples.iter().sum::<f64>() / samples.len() as f64, f64::NAN),
    }
}

#[derive(Serialize)]
struct Provenance<'a> {
    tool: &'static str,
    version: &'static str,
    source: &'a str,
    seed: u64,
    replication_seeds: &'static str,
    mode: crate::config::Mode,
    replications: usize,
    horizon_s: f64,
    warmup_s: f64,
    collision_policy: crate::config::PolicyArg,
    fidelity: crate::config::FidelityArg,
    n_max: usize,
    tolerance_pct: f64,
    ap_scheduling: apthru_core::ApScheduling,
    busy_slot_rule: apthru_core::BusySlotRule,
}

#[derive(Serialize)]
struct JsonDocument<'a> {
    provenance: Provenance<'a>,
    passed: bool,
    rows: &'a [RowResult],
}

pub const CSV_HEADER: &str = "table,row,profile,downloaders,uploaders,w_down,w_up,quantity,analysis_mbps,sim_mean_mbps,sim_ci95_mbps,rel_error,golden_mbps,golden_rel_error,status";

fn opt(v: Option<f64>, digits: usize) -> String {
    v.filter(|x| x.is_finite()).map_or(String::new(), |x| format!("{x:.digits$}"))
}

pub fn render(outcome: &RunOutcome, format: Format) -> String {
    match format {
        Format::Csv => render_csv(outcome),
        Format::Json => render_json(outcome),
        Format::Markdown => render_markdown(outcome),
    }
}

fn render_csv(outcome: &RunOutcome) -> String {
    let mut out = String::new();
    writeln!(out, "{CSV_HEADER}").unwrap();
    for r in &outcome.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.table,
            r.row,
            r.profile,
            r.downloaders,
            r.uploaders,
            r.w_down,
            r.w_up,
            r.quantity.name(),
            opt(r.analysis_mbps, 6),
            opt(r.simulation.map(|e| e.mean_mbps), 6),
            opt(r.simulation.map(|e| e.ci95_half_width_mbps), 6),
            opt(r.rel_error, 6),
            opt(r.golden_mbps, 3),
            opt(r.golden_rel_error, 6),
            r.status.name(),
        )
        .unwrap();
    }
    out
}

fn render_json(outcome: &RunOutcome) -> String {
    let s = &outcome.settings;
    let sim = s.sim_options();
    let doc = JsonDocument {
        provenance: Provenance {
            tool: "apthru",
            version: env!("CARGO_PKG_VERSION"),
            source: outcome.source,
            seed: s.seed,
            replication_seeds: "seed + replication index",
            mode: s.mode,
            replications: s.replications,
            horizon_s: s.horizon_s,
            warmup_s: s.warmup_s,
            collision_policy: s.collision_policy,
            fidelity: s.fidelity,
            n_max: s.n_max,
            tolerance_pct: s.tolerance_pct,
            ap_scheduling: sim.ap_scheduling,
            busy_slot_rule: sim.busy_slot_rule,
        },
        passed: outcome.passed(),
        rows: &outcome.rows,
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("report serializes");
    text.push('\n');
    text
}

fn cell(v: Option<f64>, digits: usize) -> String {
    v.filter(|x| x.is_finite()).map_or("n/a".into(), |x| format!("{x:.digits$}"))
}

fn pct(v: Option<f64>) -> String {
    v.filter(|x| x.is_finite()).map_or("n/a".into(), |x| format!("{:.2}%", x * 100.0))
}

fn render_markdown(outcome: &RunOutcome) -> String {
    let s = &outcome.settings;
    let mut out = String::new();
    writeln!(
        out,
        "# apthru {}: {} ({:?}, {} reps x {} s, seed {}, {:?} collisions, {:?} timing)\n",
        env!("CARGO_PKG_VERSION"),
        outcome.source,
        s.mode,
        s.replications,
        s.horizon_s,
        s.seed,
        s.collision_policy,
        s.fidelity
    )
    .unwrap();
    writeln!(out, "| Row | Profile | STAs down/up | W_d/W_u | Quantity | Analysis (Mbps) | Simulation (Mbps) | Rel. error | Published (Mbps) | vs published | Status |").unwrap();
    writeln!(out, "|---|---|---|---|---|---|---|---|---|---|---|").unwrap();
    for r in &outcome.rows {
        let sim = r.simulation.map_or("n/a".into(), |e| {
            if e.ci95_half_width_mbps.is_finite() {
                format!("{:.3} ± {:.3}", e.mean_mbps, e.ci95_half_width_mbps)
            } else {
                format!("{:.3}", e.mean_mbps)
            }
        });
        let status = match &r.error {
            Some(e) => format!("error: {e}"),
            None => r.status.name().to_string(),
        };
        writeln!(
            out,
            "| {} | {} | {}/{} | {}/{} | {} | {} | {} | {} | {} | {} | {} |",
            r.row,
            r.profile,
            r.downloaders,
            r.uploaders,
            r.w_down,
            r.w_up,
            r.quantity.name(),
            cell(r.analysis_mbps, 3),
            sim,
            pct(r.rel_error),
            cell(r.golden_mbps, 3),
            pct(r.golden_rel_error),
            status
        )
        .unwrap();
    }
    writeln!(
        out,
        "\n{} (tolerance {}%)",
        if outcome.passed() { "PASS" } else { "FAIL" },
        s.tolerance_pct
    )
    .unwrap();
    out
}

/// One JSON object per replication.
pub fn replication_log(outcome: &RunOutcome) -> String {
    let mut out = String::new();
    for rep in &outcome.replications {
        for st in &rep.stats {
            let line = serde_json::json!({
                "table": rep.table,
                "row": rep.row,
                "profile": rep.profile,
                "stats": st,
            });
            writeln!(out, "{line}").unwrap();
        }
    }
    out
}

/// `profile,k,beta,residual` for k = 1..=k_max of each profile.
pub fn beta_dump(standards: &[Standard], k_max: usize) -> apthru_core::Result<String> {
    let mut out = String::from("profile,k,beta,residual\n");
    for std in standards {
        let table = apthru_core::build_table(k_max, &std.profile())?;
        for (k, beta) in table.iter() {
            writeln!(out, "{std},{k},{beta:.17e},{:.3e}", table.residual(k)).unwrap();
        }
    }
    Ok(out)
}
