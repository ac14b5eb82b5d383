//! Per-slot attempt probability of a saturated DCF node.
//!
//! With `k` nodes always backlogged, a tagged node attempts with probability
//! `β` in a slot and collides with probability `p = 1 − (1 − β)^(k−1)`.
//! Uniform backoff over `[0, CW]`, window doubling capped at `cw_max` and
//! unlimited retries give the attempt-rate map
//!
//! ```text
//! G(p) = 2 / ( (W + 1) + p·W·Σ_{i<m} (2p)^i ),   W = cw_min + 1
//! ```
//!
//! and `β_k` is the unique root of `β = G(1 − (1 − β)^(k−1))` on `(0, 1)`.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::phy::PhyProfile;

pub const RESIDUAL_TOL: f64 = 1e-12;
const MAX_BISECTIONS: usize = 200;

/// Attempt probability as a function of the conditional collision probability.
pub fn attempt_rate(collision_prob: f64, cw_min: u32, cw_max: u32) -> f64 {
    let w = f64::from(cw_min + 1);
    let stages = ((cw_max + 1) / (cw_min + 1)).trailing_zeros();
    let two_p = 2.0 * collision_prob;
    let mut geometric = 0.0;
    let mut term = 1.0;
    for _ in 0..stages {
        geometric += term;
        term *= two_p;
    }
    2.0 / ((w + 1.0) + collision_prob * w * geometric)
}

fn check_windows(cw_min: u32, cw_max: u32) -> Result<()> {
    if cw_min >= cw_max || !(cw_min + 1).is_power_of_two() || !(cw_max + 1).is_power_of_two() {
        return Err(Error::InvalidProfile(format!(
            "contention windows ({cw_min}, {cw_max}) must satisfy cw_min < cw_max with cw+1 powers of two"
        )));
    }
    Ok(())
}

pub fn fixed_point_residual(beta: f64, contenders: usize, cw_min: u32, cw_max: u32) -> f64 {
    let p = 1.0 - (1.0 - beta).powi(contenders as i32 - 1);
    beta - attempt_rate(p, cw_min, cw_max)
}

/// Solves for `β_k` by bisection.
pub fn solve_beta(contenders: usize, cw_min: u32, cw_max: u32) -> Result<f64> {
    assert!(contenders >= 1, "at least one contender");
    check_windows(cw_min, cw_max)?;
    if contenders == 1 {
        return Ok(attempt_rate(0.0, cw_min, cw_max));
    }
    // residual is strictly increasing in β: negative at 0, positive at 1
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if fixed_point_residual(mid, contenders, cw_min, cw_max) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let beta = 0.5 * (lo + hi);
    let residual = fixed_point_residual(beta, contenders, cw_min, cw_max);
    if residual.abs() < RESIDUAL_TOL && beta > 0.0 && beta < 1.0 {
        Ok(beta)
    } else {
        Err(Error::NoConvergence { contenders, residual })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccessProbTable {
    betas: Vec<f64>,
    pub cw_min: u32,
    pub cw_max: u32,
    pub retry_stages: u32,
}

impl AccessProbTable {
    pub fn build(k_max: usize, cw_min: u32, cw_max: u32) -> Result<Self> {
        assert!(k_max >= 1, "table needs at least one entry");
        check_windows(cw_min, cw_max)?;
        let betas = (1..=k_max)
            .map(|k| solve_beta(k, cw_min, cw_max))
            .collect::<Result<Vec<_>>>()?;
        Ok(AccessProbTable {
            betas,
            cw_min,
            cw_max,
            retry_stages: ((cw_max + 1) / (cw_min + 1)).trailing_zeros(),
        })
    }

    /// `β_k` for `k` contenders, `1 <= k <= k_max`.
    pub fn beta(&self, contenders: usize) -> f64 {
        assert!(
            (1..=self.betas.len()).contains(&contenders),
            "β_{contenders} outside table range 1..={}",
            self.betas.len()
        );
        self.betas[contenders - 1]
    }

    pub fn k_max(&self) -> usize {
        self.betas.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.betas.iter().enumerate().map(|(i, &b)| (i + 1, b))
    }

    pub fn residual(&self, contenders: usize) -> f64 {
        fixed_point_residual(self.beta(contenders), contenders, self.cw_min, self.cw_max)
    }

    /// CSV dump with header `k,beta,residual`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "k,beta,residual")?;
        for (k, beta) in self.iter() {
            writeln!(out, "{k},{beta:.17e},{:.3e}", self.residual(k))?;
        }
        Ok(())
    }
}

pub fn build_table(k_max: usize, profile: &PhyProfile) -> Result<AccessProbTable> {
    AccessProbTable::build(k_max, profile.cw_min, profile.cw_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phy::Standard;
    use approx::assert_relative_eq;

    /// Damped iteration of the two-equation map, independent of the bisection path.
    fn iterate_map(k: usize, cw_min: u32, cw_max: u32) -> f64 {
        let w = f64::from(cw_min + 1);
        let m = ((cw_max + 1) as f64 / w).log2().round() as i32;
        let map = |p: f64| {
            2.0 * (1.0 - 2.0 * p) / ((1.0 - 2.0 * p) * (w + 1.0) + p * w * (1.0 - (2.0 * p).powi(m)))
        };
        let mut beta: f64 = 0.01;
        for _ in 0..100_000 {
            let p = 1.0 - (1.0 - beta).powi(k as i32 - 1);
            let next = map(p);
            let damped = 0.5 * beta + 0.5 * next;
            if (damped - beta).abs() < 1e-16 {
                return damped;
            }
            beta = damped;
        }
        beta
    }

    #[test]
    fn single_contender_is_closed_form() {
        assert_relative_eq!(solve_beta(1, 31, 1023).unwrap(), 2.0 / 33.0, max_relative = 1e-15);
        assert_relative_eq!(solve_beta(1, 15, 1023).unwrap(), 2.0 / 17.0, max_relative = 1e-15);
    }

    #[test]
    fn two_contenders_match_iteration_oracle() {
        let oracle = iterate_map(2, 31, 1023);
        // frozen from the oracle
        assert_relative_eq!(oracle, 0.057_044_320_719_8, max_relative = 1e-9);
        let beta = solve_beta(2, 31, 1023).unwrap();
        assert_relative_eq!(beta, oracle, max_relative = 1e-10);
        for k in [3, 5, 10, 20] {
            assert_relative_eq!(solve_beta(k, 31, 1023).unwrap(), iterate_map(k, 31, 1023), max_relative = 1e-9);
        }
    }

    #[test]
    fn table_is_strictly_decreasing_with_small_residuals() {
        for std in [Standard::B11, Standard::G54] {
            let table = build_table(64, &std.profile()).unwrap();
            assert_eq!(table.k_max(), 64);
            assert_eq!(table.retry_stages, if std.is_ofdm() { 6 } else { 5 });
            for k in 1..=64 {
                assert!(table.residual(k).abs() < RESIDUAL_TOL);
                let b = table.beta(k);
                assert!(b > 0.0 && b < 1.0);
                if k > 1 {
                    assert!(b < table.beta(k - 1), "{std} k={k}");
                }
                // aggregate attempt rate stays bounded
                assert!((k as f64) * b < 1.0, "{std} k={k}");
            }
        }
    }

    #[test]
    fn smaller_cw_min_attempts_more() {
        let b = build_table(64, &Standard::B11.profile()).unwrap();
        let g = build_table(64, &Standard::G54.profile()).unwrap();
        for k in 1..=64 {
            assert!(g.beta(k) > b.beta(k));
        }
    }

    #[test]
    fn single_entry_table() {
        let t = build_table(1, &Standard::B11.profile()).unwrap();
        assert_eq!(t.k_max(), 1);
        assert_relative_eq!(t.beta(1), 2.0 / 33.0, max_relative = 1e-15);
    }

    #[test]
    fn bad_windows_rejected() {
        assert!(solve_beta(3, 30, 1023).is_err());
        assert!(solve_beta(3, 31, 31).is_err());
    }

    #[test]
    fn csv_dump_shape() {
        let t = build_table(3, &Standard::B11.profile()).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "k,beta,residual");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("1,"));
    }
}
