//! Slot-synchronised 802.11 DCF simulator with window-limited TCP.
//!
//! Node 0 is the AP; STA `i + 1` terminates connection `i`. Every TCP segment
//! of a connection is always somewhere in the WLAN: a data frame or TCP-ACK
//! queued at the AP, or the matching TCP-ACK or data frame queued at the
//! STA. The wired server answers instantly, so the frames of connection `i`
//! at the AP and at its STA always add up to its window.
//!
//! Contending nodes draw a backoff from `[0, CW]`; idle slots count every
//! counter down, a node whose counter is zero transmits. A lone transmitter
//! completes an RTS/CTS data exchange or a basic-access TCP-ACK exchange; two
//! or more collide for the longest of their initial frames plus EIFS, double
//! their window (capped at `cw_max`) and redraw.

mod saturated;
mod stats;

pub use saturated::{run_saturated, SaturationStats};
pub use stats::{estimate, MeanCi, SimReport, SimStats};

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phy::{ExchangeDurations, PhyProfile, TimingFidelity};
use crate::scenario::{Direction, Scenario};

/// How the AP picks the next frame to send.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum ApScheduling {
    /// Pick a connection with probability proportional to its window among
    /// those with a frame waiting, so download data goes out with probability
    /// `W_d / W` whenever every connection has a frame queued.
    #[default]
    WindowProportional,
    /// Serve frames in arrival order.
    Fifo,
}

/// What a contending node that did not transmit does with its counter when the slot is busy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum BusySlotRule {
    /// Counts the busy period as one slot (every contender decrements once per slot).
    #[default]
    Decrement,
    /// Holds the counter until the channel is idle again.
    Freeze,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    /// Total virtual time per replication, warm-up included.
    pub horizon_s: f64,
    pub warmup_s: f64,
    pub fidelity: TimingFidelity,
    pub ap_scheduling: ApScheduling,
    pub busy_slot_rule: BusySlotRule,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            horizon_s: 20.0,
            warmup_s: 2.0,
            fidelity: TimingFidelity::default(),
            ap_scheduling: ApScheduling::default(),
            busy_slot_rule: BusySlotRule::default(),
        }
    }
}

impl SimOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.horizon_s.is_finite() && self.horizon_s > 0.0) {
            return Err(Error::InvalidSimOptions(format!("horizon must be > 0, got {}", self.horizon_s)));
        }
        if !(self.warmup_s >= 0.0 && self.warmup_s < self.horizon_s) {
            return Err(Error::InvalidSimOptions(format!(
                "warm-up {} must lie in [0, horizon {})",
                self.warmup_s, self.horizon_s
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FrameKind {
    Data,
    TcpAck,
}

#[derive(Debug, Clone)]
struct Node {
    backoff: u32,
    cw: u32,
}

/// What happened in one busy slot.
#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    ApSuccess { connection: usize, data: bool },
    StaSuccess { connection: usize, data: bool },
    Collision { nodes: Vec<usize> },
}

#[derive(Debug, Clone, Default)]
struct Counters {
    delivered: Vec<u64>,
    acks_sent: Vec<u64>,
    ap_successes: u64,
    ap_successes_to_empty_sta: u64,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    scenario: Scenario,
    profile: PhyProfile,
    durations: ExchangeDurations,
    options: SimOptions,
    seed: u64,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
    /// Frames at the AP, per connection.
    ap_frames: Vec<u32>,
    ap_fifo: VecDeque<usize>,
    ap_hol: Option<usize>,
    /// Frames at each STA, per connection.
    sta_frames: Vec<u32>,
    now: f64,
    idle_slots: u64,
    data_successes: u64,
    ack_successes: u64,
    collisions_by_len: [u64; 2],
    idle_time: f64,
    success_time: f64,
    collision_time: f64,
    attempts: Vec<u64>,
    contention_slots: Vec<u64>,
    counters: Counters,
    warm: Option<(f64, Counters)>,
}

impl Simulation {
    pub fn new(scenario: &Scenario, profile: &PhyProfile, options: SimOptions, seed: u64) -> Result<Self> {
        profile.validate()?;
        options.validate()?;
        let conns = scenario.connections();
        let m = conns.len();
        let mut sim = Simulation {
            scenario: scenario.clone(),
            profile: profile.clone(),
            durations: ExchangeDurations::new(profile, options.fidelity),
            options,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            nodes: vec![Node { backoff: 0, cw: profile.cw_min }; m + 1],
            ap_frames: vec![0; m],
            ap_fifo: VecDeque::new(),
            ap_hol: None,
            sta_frames: vec![0; m],
            now: 0.0,
            idle_slots: 0,
            data_successes: 0,
            ack_successes: 0,
            collisions_by_len: [0; 2],
            idle_time: 0.0,
            success_time: 0.0,
            collision_time: 0.0,
            attempts: vec![0; m + 1],
            contention_slots: vec![0; m + 1],
            counters: Counters {
                delivered: vec![0; m],
                acks_sent: vec![0; m],
                ..Counters::default()
            },
            warm: None,
        };
        // downloads start with the whole window at the AP, uploads at the STA
        for (c, conn) in conns.iter().enumerate() {
            for _ in 0..conn.max_window_pkts {
                match conn.direction {
                    Direction::Download => sim.push_ap(c),
                    Direction::Upload => sim.sta_frames[c] += 1,
                }
            }
        }
        for node in 0..=m {
            if sim.has_frame(node) {
                sim.nodes[node].backoff = sim.draw_backoff(node);
            }
        }
        if options.warmup_s == 0.0 {
            sim.warm = Some((0.0, sim.counters.clone()));
        }
        Ok(sim)
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn durations(&self) -> &ExchangeDurations {
        &self.durations
    }

    fn ap_total(&self) -> u32 {
        self.ap_frames.iter().sum()
    }

    fn has_frame(&self, node: usize) -> bool {
        if node == 0 {
            self.ap_total() > 0
        } else {
            self.sta_frames[node - 1] > 0
        }
    }

    fn draw_backoff(&mut self, node: usize) -> u32 {
        let cw = self.nodes[node].cw;
        self.rng.gen_range(0..=cw)
    }

    fn push_ap(&mut self, connection: usize) {
        self.ap_frames[connection] += 1;
        if self.options.ap_scheduling == ApScheduling::Fifo {
            self.ap_fifo.push_back(connection);
        }
    }

    fn choose_ap_frame(&mut self) -> usize {
        match self.options.ap_scheduling {
            ApScheduling::Fifo => *self.ap_fifo.front().expect("AP contends only when backlogged"),
            ApScheduling::WindowProportional => {
                let conns = self.scenario.connections();
                let total: u64 = conns
                    .iter()
                    .zip(&self.ap_frames)
                    .filter(|(_, &f)| f > 0)
                    .map(|(c, _)| u64::from(c.max_window_pkts))
                    .sum();
                let mut pick = self.rng.gen_range(0..total);
                for (i, (c, &f)) in conns.iter().zip(&self.ap_frames).enumerate() {
                    if f == 0 {
                        continue;
                    }
                    let w = u64::from(c.max_window_pkts);
                    if pick < w {
                        return i;
                    }
                    pick -= w;
                }
                unreachable!("weighted pick ran past the eligible connections")
            }
        }
    }

    fn frame_kind(&self, node: usize) -> FrameKind {
        let (conn, at_ap) = if node == 0 {
            (self.ap_hol.expect("AP head-of-line frame chosen before transmission"), true)
        } else {
            (node - 1, false)
        };
        match (self.scenario.connections()[conn].direction, at_ap) {
            (Direction::Download, true) | (Direction::Upload, false) => FrameKind::Data,
            _ => FrameKind::TcpAck,
        }
    }

    /// Advances over the idle slots before the next transmission and the busy slot itself.
    pub fn step(&mut self) -> Event {
        let contenders: Vec<usize> = (0..self.nodes.len()).filter(|&n| self.has_frame(n)).collect();
        assert!(!contenders.is_empty(), "every segment is queued somewhere, so someone contends");
        let idle = contenders.iter().map(|&n| self.nodes[n].backoff).min().unwrap();
        if idle > 0 {
            for &n in &contenders {
                self.nodes[n].backoff -= idle;
                self.contention_slots[n] += u64::from(idle);
            }
            self.idle_slots += u64::from(idle);
            let t = f64::from(idle) * self.profile.slot_time_s;
            self.idle_time += t;
            self.now += t;
        }
        self.maybe_snapshot();

        let transmitters: Vec<usize> = contenders.iter().copied().filter(|&n| self.nodes[n].backoff == 0).collect();
        for &n in &contenders {
            self.contention_slots[n] += 1;
        }
        for &n in &transmitters {
            self.attempts[n] += 1;
        }
        if transmitters[0] == 0 && self.ap_hol.is_none() {
            self.ap_hol = Some(self.choose_ap_frame());
        }
        if self.options.busy_slot_rule == BusySlotRule::Decrement {
            for &n in &contenders {
                if self.nodes[n].backoff > 0 {
                    self.nodes[n].backoff -= 1;
                }
            }
        }

        let event = if transmitters.len() == 1 {
            self.success(transmitters[0])
        } else {
            self.collision(&transmitters)
        };
        self.maybe_snapshot();
        event
    }

    fn success(&mut self, node: usize) -> Event {
        let kind = self.frame_kind(node);
        let duration = match kind {
            FrameKind::Data => {
                self.data_successes += 1;
                self.durations.t_data_s
            }
            FrameKind::TcpAck => {
                self.ack_successes += 1;
                self.durations.t_ack_s
            }
        };
        self.now += duration;
        self.success_time += duration;
        let data = kind == FrameKind::Data;

        let event = if node == 0 {
            let conn = self.ap_hol.take().unwrap();
            if self.options.ap_scheduling == ApScheduling::Fifo {
                self.ap_fifo.pop_front();
            }
            self.ap_frames[conn] -= 1;
            self.counters.ap_successes += 1;
            if self.sta_frames[conn] == 0 {
                self.counters.ap_successes_to_empty_sta += 1;
            }
            if data {
                self.counters.delivered[conn] += 1;
            }
            // a delivered segment queues a TCP-ACK, a delivered TCP-ACK opens the window for one more segment
            self.enqueue_sta(conn);
            Event::ApSuccess { connection: conn, data }
        } else {
            let conn = node - 1;
            self.sta_frames[conn] -= 1;
            if data {
                self.counters.delivered[conn] += 1;
            } else {
                self.counters.acks_sent[conn] += 1;
            }
            let ap_was_idle = self.ap_total() == 0;
            self.push_ap(conn);
            if ap_was_idle {
                self.nodes[0].backoff = self.draw_backoff(0);
            }
            Event::StaSuccess { connection: conn, data }
        };

        self.nodes[node].cw = self.profile.cw_min;
        if self.has_frame(node) {
            self.nodes[node].backoff = self.draw_backoff(node);
        }
        event
    }

    fn enqueue_sta(&mut self, conn: usize) {
        self.sta_frames[conn] += 1;
        if self.sta_frames[conn] == 1 {
            let node = conn + 1;
            self.nodes[node].backoff = self.draw_backoff(node);
        }
    }

    fn collision(&mut self, transmitters: &[usize]) -> Event {
        let mut duration: f64 = 0.0;
        let mut rts_longest = false;
        for &n in transmitters {
            let len = match self.frame_kind(n) {
                FrameKind::Data => self.durations.t_colli_rts_s,
                FrameKind::TcpAck => self.durations.t_colli_tcpack_s,
            };
            if len > duration {
                duration = len;
                rts_longest = self.frame_kind(n) == FrameKind::Data;
            }
        }
        self.collisions_by_len[usize::from(rts_longest)] += 1;
        self.now += duration;
        self.collision_time += duration;
        for &n in transmitters {
            let cw = self.nodes[n].cw;
            self.nodes[n].cw = (2 * (cw + 1) - 1).min(self.profile.cw_max);
            self.nodes[n].backoff = self.draw_backoff(n);
        }
        Event::Collision { nodes: transmitters.to_vec() }
    }

    fn maybe_snapshot(&mut self) {
        if self.warm.is_none() && self.now >= self.options.warmup_s {
            self.warm = Some((self.now, self.counters.clone()));
        }
    }

    /// Runs until the horizon and returns the measurements taken after warm-up.
    pub fn run(mut self) -> SimStats {
        while self.now < self.options.horizon_s {
            self.step();
        }
        self.into_stats()
    }

    fn into_stats(self) -> SimStats {
        let (start, base) = self.warm.clone().unwrap_or((self.now, self.counters.clone()));
        let delivered: Vec<u64> =
            self.counters.delivered.iter().zip(&base.delivered).map(|(a, b)| a - b).collect();
        let directions: Vec<Direction> = self.scenario.connections().iter().map(|c| c.direction).collect();
        let sum_dir = |d: Direction| -> u64 {
            delivered.iter().zip(&directions).filter(|(_, &dir)| dir == d).map(|(n, _)| n).sum()
        };
        SimStats {
            seed: self.seed,
            horizon_s: self.options.horizon_s,
            warmup_s: self.options.warmup_s,
            measured_time_s: self.now - start,
            elapsed_time_s: self.now,
            segment_bits: self.profile.segment_bits(),
            download_segments: sum_dir(Direction::Download),
            upload_segments: sum_dir(Direction::Upload),
            delivered_segments: delivered,
            directions,
            ap_successes: self.counters.ap_successes - base.ap_successes,
            ap_successes_to_empty_sta: self.counters.ap_successes_to_empty_sta - base.ap_successes_to_empty_sta,
            idle_slots: self.idle_slots,
            data_successes: self.data_successes,
            ack_successes: self.ack_successes,
            collisions_rts_length: self.collisions_by_len[1],
            collisions_tcpack_length: self.collisions_by_len[0],
            idle_time_s: self.idle_time,
            success_time_s: self.success_time,
            collision_time_s: self.collision_time,
            attempts: self.attempts,
            contention_slots: self.contention_slots,
        }
    }

    /// Whole-run counters so far, without consuming the simulation.
    pub fn snapshot(&self) -> SimStats {
        self.clone().into_stats()
    }

    /// Checks window conservation and backoff ranges; returns the first violation.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        for (c, conn) in self.scenario.connections().iter().enumerate() {
            let in_flight = self.ap_frames[c] + self.sta_frames[c];
            if in_flight != conn.max_window_pkts {
                return Err(format!(
                    "connection {c}: {in_flight} segments in flight, window {}",
                    conn.max_window_pkts
                ));
            }
            let generated = self.counters.delivered[c];
            if conn.direction == Direction::Download && generated < self.counters.acks_sent[c] {
                return Err(format!("connection {c}: more TCP-ACKs sent than segments received"));
            }
        }
        let valid_cw = |cw: u32| {
            let mut w = self.profile.cw_min;
            loop {
                if w == cw {
                    return true;
                }
                if w >= self.profile.cw_max {
                    return false;
                }
                w = (2 * (w + 1) - 1).min(self.profile.cw_max);
            }
        };
        for (i, node) in self.nodes.iter().enumerate() {
            if !valid_cw(node.cw) {
                return Err(format!("node {i}: contention window {} not on the doubling ladder", node.cw));
            }
            if node.backoff > node.cw {
                return Err(format!("node {i}: backoff {} above window {}", node.backoff, node.cw));
            }
        }
        if self.options.ap_scheduling == ApScheduling::Fifo && self.ap_fifo.len() as u32 != self.ap_total() {
            return Err("AP FIFO out of sync with per-connection counts".into());
        }
        Ok(())
    }

    /// Frames queued at the STA of `connection`.
    pub fn sta_backlog(&self, connection: usize) -> u32 {
        self.sta_frames[connection]
    }

    /// Frames queued at the AP for `connection`.
    pub fn ap_backlog(&self, connection: usize) -> u32 {
        self.ap_frames[connection]
    }
}

/// One replication: deterministic in `(scenario, profile, options, seed)`.
pub fn run(scenario: &Scenario, profile: &PhyProfile, options: SimOptions, seed: u64) -> Result<SimStats> {
    Ok(Simulation::new(scenario, profile, options, seed)?.run())
}

/// Seed of replication `index` derived from a base seed.
pub fn replication_seed(base: u64, index: usize) -> u64 {
    base.wrapping_add(index as u64)
}
