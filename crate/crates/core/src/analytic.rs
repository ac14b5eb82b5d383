//! Embedded-chain renewal-reward model of AP throughput.
//!
//! The chain is observed at the end of every successful transmission; its
//! state `n` is the number of STAs holding a frame (a TCP-ACK for a
//! downloader, a data segment for an uploader). With the AP always
//! backlogged, `n + 1` nodes contend and each attempts with `β_{n+1}`. The AP
//! wins a success with probability `1/(n+1)`, which is the reward per cycle;
//! the long-run AP success rate is mean reward over mean cycle length.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phy::{ExchangeDurations, PhyProfile, TimingFidelity};
use crate::saturation::{build_table, AccessProbTable};
use crate::scenario::{Direction, Scenario};

/// Largest stationary tail mass [`throughput`] accepts.
pub const MAX_TAIL_MASS: f64 = 1e-12;
pub const DEFAULT_N_MAX: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum CollisionPolicy {
    /// Every collision lasts as long as a TCP-ACK collision.
    #[default]
    TcpAckLength,
    /// Expected longest initial frame over the random set of colliders.
    Mixture,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelOptions {
    pub n_max: usize,
    pub collision_policy: CollisionPolicy,
    pub fidelity: TimingFidelity,
}

impl Default for ModelOptions {
    fn default() -> Self {
        ModelOptions {
            n_max: DEFAULT_N_MAX,
            collision_policy: CollisionPolicy::default(),
            fidelity: TimingFidelity::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution {
    pub probs: Vec<f64>,
    /// Exact mass beyond `n_max`, summed from the series rather than `1 − Σ`.
    pub tail_mass: f64,
}

fn pi_term(n: usize) -> f64 {
    let mut factorial = 1.0_f64;
    for i in 2..=n {
        factorial *= i as f64;
    }
    (n as f64 + 1.0) / (factorial * 2.0 * std::f64::consts::E)
}

/// `π_n = (n+1) / (n! · 2e)` for `n = 0..=n_max`.
pub fn stationary_distribution(n_max: usize) -> StationaryDistribution {
    assert!(n_max >= 1, "n_max must be at least 1");
    let probs: Vec<f64> = (0..=n_max).map(pi_term).collect();
    let mut tail_mass = 0.0;
    for n in n_max + 1.. {
        let term = pi_term(n);
        tail_mass += term;
        if term <= tail_mass * f64::EPSILON || term == 0.0 {
            break;
        }
    }
    StationaryDistribution { probs, tail_mass }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EventProbs {
    pub p_idle: f64,
    pub p_s_ap: f64,
    pub p_s_sta: f64,
    pub p_c: f64,
}

/// Slot outcome probabilities with `n` backlogged STAs plus the AP, each attempting with `beta`.
pub fn state_event_probs(n: usize, beta: f64) -> EventProbs {
    let others_silent = (1.0 - beta).powi(n as i32);
    let p_idle = (1.0 - beta) * others_silent;
    let p_s_ap = beta * others_silent;
    let p_s_sta = n as f64 * p_s_ap;
    EventProbs { p_idle, p_s_ap, p_s_sta, p_c: 1.0 - p_idle - p_s_ap - p_s_sta }
}

/// Collision probability `β(1 − (1−β)^n)` seen from the AP alone.
///
/// This only counts collisions the AP takes part in and does not complete the
/// slot partition; it is not used by the model.
pub fn unpartitioned_collision_prob(n: usize, beta: f64) -> f64 {
    beta * (1.0 - (1.0 - beta).powi(n as i32))
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Mean collision length in state `n`.
///
/// Under [`CollisionPolicy::Mixture`] a data sender opens with an RTS and an
/// ACK sender with the TCP-ACK itself. The AP carries data with probability
/// `p_download`, an STA with probability `1 − p_download`, and the collision
/// lasts as long as the longest initial frame.
pub fn collision_duration(
    n: usize,
    beta: f64,
    p_download: f64,
    durations: &ExchangeDurations,
    policy: CollisionPolicy,
) -> f64 {
    let simple = durations.t_colli_tcpack_s;
    if policy == CollisionPolicy::TcpAckLength || n == 0 {
        return simple;
    }
    let p_upload = 1.0 - p_download;
    let (rts, ack) = (durations.t_colli_rts_s, durations.t_colli_tcpack_s);
    let longest = rts.max(ack);
    let mut weighted = 0.0;
    let mut mass = 0.0;
    for ap_attempts in [false, true] {
        let p_ap = if ap_attempts { beta } else { 1.0 - beta };
        for k in 0..=n {
            if usize::from(ap_attempts) + k < 2 {
                continue;
            }
            let p = p_ap * binomial(n, k) * beta.powi(k as i32) * (1.0 - beta).powi((n - k) as i32);
            let all_rts = if ap_attempts { p_download } else { 1.0 } * p_upload.powi(k as i32);
            let all_ack = if ap_attempts { p_upload } else { 1.0 } * p_download.powi(k as i32);
            let mixed = (1.0 - all_rts - all_ack).max(0.0);
            weighted += p * (all_rts * rts + all_ack * ack + mixed * longest);
            mass += p;
        }
    }
    if mass > 0.0 {
        weighted / mass
    } else {
        simple
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateMetrics {
    pub n: usize,
    pub pi_n: f64,
    pub p_idle: f64,
    pub p_s_ap: f64,
    pub p_s_sta: f64,
    pub p_c: f64,
    pub t_s_ap_s: f64,
    pub t_s_sta_s: f64,
    pub t_c_s: f64,
    pub e_n_x_s: f64,
}

/// Mean time from one success to the next when `n` STAs are backlogged.
pub fn mean_cycle_length(
    n: usize,
    scenario: &Scenario,
    durations: &ExchangeDurations,
    slot_time_s: f64,
    beta: f64,
    policy: CollisionPolicy,
) -> f64 {
    state_metrics(n, 0.0, scenario, durations, slot_time_s, beta, policy).e_n_x_s
}

fn state_metrics(
    n: usize,
    pi_n: f64,
    scenario: &Scenario,
    durations: &ExchangeDurations,
    slot_time_s: f64,
    beta: f64,
    policy: CollisionPolicy,
) -> StateMetrics {
    let (p_d, p_u) = (scenario.p_download(), scenario.p_upload());
    let ev = state_event_probs(n, beta);
    let t_s_ap_s = p_d * durations.t_data_s + p_u * durations.t_ack_s;
    let t_s_sta_s = p_u * durations.t_data_s + p_d * durations.t_ack_s;
    let t_c_s = collision_duration(n, beta, p_d, durations, policy);
    let e_n_x_s = (ev.p_idle * slot_time_s + ev.p_s_ap * t_s_ap_s + ev.p_c * t_c_s + ev.p_s_sta * t_s_sta_s)
        / (ev.p_s_ap + ev.p_s_sta);
    StateMetrics {
        n,
        pi_n,
        p_idle: ev.p_idle,
        p_s_ap: ev.p_s_ap,
        p_s_sta: ev.p_s_sta,
        p_c: ev.p_c,
        t_s_ap_s,
        t_s_sta_s,
        t_c_s,
        e_n_x_s,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThroughputReport {
    pub phi_aggregate_bps: f64,
    pub phi_download_bps: f64,
    pub phi_upload_bps: f64,
    /// AP successes per second.
    pub ap_success_rate_per_s: f64,
    pub truncation_n_max: usize,
    pub truncation_tail_mass: f64,
    pub states: Vec<StateMetrics>,
}

/// A profile with its attempt-probability table, reusable across scenarios.
#[derive(Debug, Clone)]
pub struct AnalyticModel {
    profile: PhyProfile,
    durations: ExchangeDurations,
    betas: AccessProbTable,
    options: ModelOptions,
    stationary: StationaryDistribution,
}

impl AnalyticModel {
    pub fn new(profile: &PhyProfile, options: ModelOptions) -> Result<Self> {
        profile.validate()?;
        let stationary = stationary_distribution(options.n_max);
        if stationary.tail_mass >= MAX_TAIL_MASS {
            return Err(Error::Truncation { n_max: options.n_max, tail_mass: stationary.tail_mass });
        }
        Ok(AnalyticModel {
            profile: profile.clone(),
            durations: ExchangeDurations::new(profile, options.fidelity),
            betas: build_table(options.n_max + 1, profile)?,
            options,
            stationary,
        })
    }

    pub fn durations(&self) -> &ExchangeDurations {
        &self.durations
    }

    pub fn betas(&self) -> &AccessProbTable {
        &self.betas
    }

    pub fn options(&self) -> &ModelOptions {
        &self.options
    }

    pub fn state(&self, n: usize, scenario: &Scenario) -> StateMetrics {
        state_metrics(
            n,
            self.stationary.probs[n],
            scenario,
            &self.durations,
            self.profile.slot_time_s,
            self.betas.beta(n + 1),
            self.options.collision_policy,
        )
    }

    pub fn throughput(&self, scenario: &Scenario) -> ThroughputReport {
        let states: Vec<StateMetrics> = (0..=self.options.n_max).map(|n| self.state(n, scenario)).collect();
        let reward: f64 = states.iter().map(|s| s.pi_n / (s.n as f64 + 1.0)).sum();
        let cycle: f64 = states.iter().map(|s| s.pi_n * s.e_n_x_s).sum();
        let rate = reward / cycle;
        let aggregate = rate * self.profile.segment_bits();
        ThroughputReport {
            phi_aggregate_bps: aggregate,
            phi_download_bps: scenario.p_download() * aggregate,
            phi_upload_bps: scenario.p_upload() * aggregate,
            ap_success_rate_per_s: rate,
            truncation_n_max: self.options.n_max,
            truncation_tail_mass: self.stationary.tail_mass,
            states,
        }
    }
}

/// Aggregate, download and upload AP throughput for `scenario`.
pub fn throughput(scenario: &Scenario, profile: &PhyProfile, options: ModelOptions) -> Result<ThroughputReport> {
    Ok(AnalyticModel::new(profile, options)?.throughput(scenario))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConnectionRate {
    pub index: usize,
    pub direction: Direction,
    pub max_window_pkts: u32,
    pub bps: f64,
}

/// Splits each direction's throughput across its connections in proportion to window.
pub fn per_sta_rates(report: &ThroughputReport, scenario: &Scenario) -> Vec<ConnectionRate> {
    let (w_d, w_u) = (scenario.download_window() as f64, scenario.upload_window() as f64);
    scenario
        .connections()
        .iter()
        .enumerate()
        .map(|(index, c)| {
            let (phi, total) = match c.direction {
                Direction::Download => (report.phi_download_bps, w_d),
                Direction::Upload => (report.phi_upload_bps, w_u),
            };
            ConnectionRate {
                index,
                direction: c.direction,
                max_window_pkts: c.max_window_pkts,
                bps: phi * f64::from(c.max_window_pkts) / total,
            }
        })
        .collect()
}
