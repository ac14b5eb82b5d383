use apthru_core::analytic::{state_event_probs, stationary_distribution};
use apthru_core::*;
use proptest::prelude::*;

fn standard() -> impl Strategy<Value = Standard> {
    prop::sample::select(Standard::ALL.to_vec())
}

fn windows() -> impl Strategy<Value = (Vec<u32>, Vec<u32>)> {
    (prop::collection::vec(1u32..64, 0..4), prop::collection::vec(1u32..64, 0..4))
        .prop_filter("at least one connection", |(d, u)| !d.is_empty() || !u.is_empty())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scaling_windows_changes_nothing((d, u) in windows(), std in standard(), f in 2u32..6) {
        let s = Scenario::from_windows(&d, &u).unwrap();
        let p = std.profile();
        let a = throughput(&s, &p, ModelOptions::default()).unwrap();
        let b = throughput(&s.scaled(f).unwrap(), &p, ModelOptions::default()).unwrap();
        prop_assert_eq!(a.phi_aggregate_bps, b.phi_aggregate_bps);
        prop_assert_eq!(a.phi_download_bps, b.phi_download_bps);
    }

    #[test]
    fn split_follows_window_shares((d, u) in windows(), std in standard(), mixture in any::<bool>()) {
        let s = Scenario::from_windows(&d, &u).unwrap();
        let opts = ModelOptions {
            collision_policy: if mixture { CollisionPolicy::Mixture } else { CollisionPolicy::TcpAckLength },
            ..Default::default()
        };
        let r = throughput(&s, &std.profile(), opts).unwrap();
        let sum = r.phi_download_bps + r.phi_upload_bps;
        prop_assert!((sum / r.phi_aggregate_bps - 1.0).abs() < 1e-12);
        prop_assert!((r.phi_download_bps / r.phi_aggregate_bps - s.p_download()).abs() < 1e-12);
        let rates = per_sta_rates(&r, &s);
        let total: f64 = rates.iter().map(|c| c.bps).sum();
        prop_assert!((total / r.phi_aggregate_bps - 1.0).abs() < 1e-12);
    }

    #[test]
    fn slot_events_partition(n in 0usize..200, beta in 0.0f64..1.0) {
        let e = state_event_probs(n, beta);
        prop_assert!((e.p_idle + e.p_s_ap + e.p_s_sta + e.p_c - 1.0).abs() < 1e-12);
        prop_assert!(e.p_c >= -1e-15);
    }

    #[test]
    fn beta_decreases_with_contenders(cw_exp in 3u32..7, stages in 1u32..7, k in 1usize..64) {
        let cw_min = (1u32 << cw_exp) - 1;
        let cw_max = ((cw_min + 1) << stages) - 1;
        let a = solve_beta(k, cw_min, cw_max).unwrap();
        let b = solve_beta(k + 1, cw_min, cw_max).unwrap();
        prop_assert!(b < a);
        prop_assert!(a > 0.0 && a <= 2.0 / (f64::from(cw_min) + 2.0) + 1e-12);
    }
}

#[test]
fn detailed_balance_holds() {
    let d = stationary_distribution(60);
    for n in 0..60 {
        let lhs = d.probs[n] / (n as f64 + 1.0);
        let rhs = d.probs[n + 1] * (n as f64 + 1.0) / (n as f64 + 2.0);
        assert!((lhs - rhs).abs() <= 1e-13 * lhs);
    }
}
