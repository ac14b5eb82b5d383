use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::BusySlotRule;
use crate::phy::PhyProfile;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaturationStats {
    pub nodes: usize,
    pub slots: u64,
    pub attempts: Vec<u64>,
    /// Per node: idle slots spent counting down plus own attempts.
    pub backoff_slots: Vec<u64>,
}

impl SaturationStats {
    /// Mean attempts per node per slot.
    pub fn attempt_frequency(&self) -> f64 {
        self.attempts.iter().sum::<u64>() as f64 / (self.nodes as f64 * self.slots as f64)
    }

    /// Mean attempts per slot of a node's own backoff clock.
    pub fn attempt_frequency_per_backoff_slot(&self) -> f64 {
        self.attempts.iter().sum::<u64>() as f64 / self.backoff_slots.iter().sum::<u64>() as f64
    }
}

/// `nodes` permanently backlogged DCF nodes observed for `slots` slots.
pub fn run_saturated(
    nodes: usize,
    profile: &PhyProfile,
    slots: u64,
    seed: u64,
    rule: BusySlotRule,
) -> SaturationStats {
    assert!(nodes >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cw = vec![profile.cw_min; nodes];
    let mut backoff: Vec<u32> = cw.iter().map(|&w| rng.gen_range(0..=w)).collect();
    let mut attempts = vec![0_u64; nodes];
    let mut backoff_slots = vec![0_u64; nodes];
    let mut transmitters = Vec::with_capacity(nodes);
    for _ in 0..slots {
        transmitters.clear();
        transmitters.extend((0..nodes).filter(|&i| backoff[i] == 0));
        if transmitters.is_empty() {
            for (b, s) in backoff.iter_mut().zip(backoff_slots.iter_mut()) {
                *b -= 1;
                *s += 1;
            }
            continue;
        }
        let collided = transmitters.len() > 1;
        for i in 0..nodes {
            if backoff[i] == 0 {
                attempts[i] += 1;
                backoff_slots[i] += 1;
                cw[i] = if collided { (2 * (cw[i] + 1) - 1).min(profile.cw_max) } else { profile.cw_min };
                backoff[i] = rng.gen_range(0..=cw[i]);
            } else if rule == BusySlotRule::Decrement {
                backoff[i] -= 1;
                backoff_slots[i] += 1;
            }
        }
    }
    SaturationStats { nodes, slots, attempts, backoff_slots }
}
