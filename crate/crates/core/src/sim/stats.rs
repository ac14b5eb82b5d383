use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::scenario::Direction;

/// Measurements of one replication. Segment counts cover the post-warm-up
/// window; slot and attempt counters cover the whole run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimStats {
    pub seed: u64,
    pub horizon_s: f64,
    pub warmup_s: f64,
    pub measured_time_s: f64,
    pub elapsed_time_s: f64,
    pub segment_bits: f64,
    pub download_segments: u64,
    pub upload_segments: u64,
    /// Segments delivered per connection, in scenario order.
    pub delivered_segments: Vec<u64>,
    pub directions: Vec<Direction>,
    pub ap_successes: u64,
    /// AP successes whose destination STA had an empty queue.
    pub ap_successes_to_empty_sta: u64,
    pub idle_slots: u64,
    pub data_successes: u64,
    pub ack_successes: u64,
    pub collisions_rts_length: u64,
    pub collisions_tcpack_length: u64,
    pub idle_time_s: f64,
    pub success_time_s: f64,
    pub collision_time_s: f64,
    /// Transmission attempts per node, AP first.
    pub attempts: Vec<u64>,
    /// Slots in which each node had a frame to send.
    pub contention_slots: Vec<u64>,
}

impl SimStats {
    fn bps(&self, segments: u64) -> f64 {
        segments as f64 * self.segment_bits / self.measured_time_s
    }

    pub fn download_bps(&self) -> f64 {
        self.bps(self.download_segments)
    }

    pub fn upload_bps(&self) -> f64 {
        self.bps(self.upload_segments)
    }

    pub fn aggregate_bps(&self) -> f64 {
        self.bps(self.download_segments + self.upload_segments)
    }

    pub fn per_connection_bps(&self) -> Vec<f64> {
        self.delivered_segments.iter().map(|&n| self.bps(n)).collect()
    }

    pub fn empty_target_fraction(&self) -> f64 {
        self.ap_successes_to_empty_sta as f64 / self.ap_successes.max(1) as f64
    }
}

/// Sample mean with a two-sided 95% Student-t half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanCi {
    pub mean: f64,
    pub half_width: f64,
    pub samples: usize,
}

impl MeanCi {
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        let n = samples.len();
        if n < 2 {
            return Err(Error::TooFewReplications(n));
        }
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
            .expect("degrees of freedom >= 1")
            .inverse_cdf(0.975);
        Ok(MeanCi { mean, half_width: t * (var / n as f64).sqrt(), samples: n })
    }

    pub fn lower(&self) -> f64 {
        self.mean - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.mean + self.half_width
    }

    pub fn overlaps(&self, other: &MeanCi) -> bool {
        self.lower() <= other.upper() && other.lower() <= self.upper()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub aggregate_bps: MeanCi,
    pub download_bps: MeanCi,
    pub upload_bps: MeanCi,
    pub per_connection_bps: Vec<MeanCi>,
    /// Pooled fraction of AP successes that reached an STA with an empty queue.
    pub empty_target_fraction: f64,
    pub replications: usize,
}

/// Merges replications into means and 95% confidence intervals.
pub fn estimate(stats: &[SimStats]) -> Result<SimReport> {
    if stats.len() < 2 {
        return Err(Error::TooFewReplications(stats.len()));
    }
    let column = |f: &dyn Fn(&SimStats) -> f64| -> Result<MeanCi> {
        MeanCi::from_samples(&stats.iter().map(f).collect::<Vec<_>>())
    };
    let connections = stats[0].delivered_segments.len();
    let per_connection_bps = (0..connections)
        .map(|c| column(&|s| s.per_connection_bps()[c]))
        .collect::<Result<Vec<_>>>()?;
    let ap: u64 = stats.iter().map(|s| s.ap_successes).sum();
    let empty: u64 = stats.iter().map(|s| s.ap_successes_to_empty_sta).sum();
    Ok(SimReport {
        aggregate_bps: column(&SimStats::aggregate_bps)?,
        download_bps: column(&SimStats::download_bps)?,
        upload_bps: column(&SimStats::upload_bps)?,
        per_connection_bps,
        empty_target_fraction: empty as f64 / ap.max(1) as f64,
        replications: stats.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn identical_samples_have_zero_width() {
        let ci = MeanCi::from_samples(&[3.0, 3.0, 3.0]).unwrap();
        assert_eq!(ci.mean, 3.0);
        assert_eq!(ci.half_width, 0.0);
    }

    #[test]
    fn known_t_interval() {
        // n = 4, mean 2.5, s = sqrt(5/3), t_{0.975,3} = 3.182446305
        let ci = MeanCi::from_samples(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_relative_eq!(ci.mean, 2.5);
        let expected = 3.182_446_305_284_263 * (5.0_f64 / 3.0 / 4.0).sqrt();
        assert_relative_eq!(ci.half_width, expected, max_relative = 1e-8);
    }

    #[test]
    fn single_sample_is_rejected() {
        assert_eq!(MeanCi::from_samples(&[1.0]), Err(Error::TooFewReplications(1)));
        assert!(matches!(estimate(&[]), Err(Error::TooFewReplications(0))));
    }

    #[test]
    fn overlap() {
        let a = MeanCi { mean: 1.0, half_width: 0.1, samples: 2 };
        let b = MeanCi { mean: 1.15, half_width: 0.1, samples: 2 };
        let c = MeanCi { mean: 1.5, half_width: 0.1, samples: 2 };
        assert!(a.overlaps(&b));
        assert!(!a.overlaps(&c));
    }
}
