//! Shared fixtures for the criterion benchmarks.

use apthru_core::tables::TABLE_1;
use apthru_core::{Scenario, SimOptions};

pub fn table_one_scenario() -> Scenario {
    TABLE_1[0].scenario().expect("table fixture is valid")
}

/// A shortened replication for timing the simulator hot loop.
pub fn short_replication() -> SimOptions {
    SimOptions { horizon_s: 1.0, warmup_s: 0.1, ..SimOptions::default() }
}
