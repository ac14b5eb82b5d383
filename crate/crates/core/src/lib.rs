//! Throughput of an 802.11 access point carrying long-lived TCP uploads and
//! downloads with arbitrary receive windows.
//!
//! [`analytic`] evaluates the embedded-chain renewal-reward model;
//! [`sim`] is an independent slot-level DCF simulator used to validate it.

pub mod analytic;
pub mod error;
pub mod phy;
pub mod saturation;
pub mod scenario;
pub mod sim;
pub mod tables;

pub use analytic::{
    per_sta_rates, stationary_distribution, throughput, AnalyticModel, CollisionPolicy, ModelOptions,
    StateMetrics, ThroughputReport,
};
pub use error::{Error, Result};
pub use phy::{builtin_profile, ExchangeDurations, PhyProfile, Standard, TimingFidelity};
pub use saturation::{build_table, solve_beta, AccessProbTable};
pub use scenario::{Connection, Direction, Scenario};
pub use sim::{estimate, ApScheduling, BusySlotRule, MeanCi, SimOptions, SimReport, SimStats};
