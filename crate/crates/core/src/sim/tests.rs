use super::*;
use crate::model::{exact_rho, naive_rho};

fn cfg(trials: u64, seed: u64) -> SimConfig {
    SimConfig {
        trials,
        seed,
        time_resolution: 41,
    }
}

#[test]
fn full_allocation_is_deterministic() {
    let est = simulate_acquisition(10, 10, 0.3, 0.4, &cfg(500, 1)).unwrap();
    assert_eq!(est.rho, 0.3);
    assert_eq!(est.std_error, 0.0);
}

#[test]
fn no_disadvantaged_acquire_nothing() {
    let est = simulate_acquisition(7, 20, 0.0, 0.4, &cfg(500, 1)).unwrap();
    assert_eq!(est.rho, 0.0);
}

#[test]
fn small_case_brackets_enumerated_value() {
    let est = simulate_acquisition(3, 4, 0.5, 0.5, &cfg(1_000_000, 7)).unwrap();
    let target = 34.0 / 81.0;
    assert!(
        (est.rho - target).abs() <= 3.0 * est.std_error,
        "{} +/- {}",
        est.rho,
        est.std_error
    );
}

#[test]
fn same_seed_same_estimate() {
    let a = simulate_acquisition(30, 50, 0.4, 0.3, &cfg(2000, 99)).unwrap();
    let b = simulate_acquisition(30, 50, 0.4, 0.3, &cfg(2000, 99)).unwrap();
    assert_eq!(a.rho.to_bits(), b.rho.to_bits());
    let c = simulate_acquisition(30, 50, 0.4, 0.3, &cfg(2000, 100)).unwrap();
    assert_ne!(a.rho.to_bits(), c.rho.to_bits());
}

#[test]
fn simulation_rejects_waste() {
    assert!(simulate_acquisition(5, 4, 0.5, 0.5, &cfg(10, 0)).is_err());
    assert!(simulate_acquisition(2, 4, 0.5, 0.5, &cfg(0, 0)).is_err());
}

#[test]
fn dp_hand_checked_tree() {
    // Paths of length 3 with p(dis) = 1/3 until a group of size 2 fills up.
    let r = dp_exact_rho(3, 4, 0.5, 0.5).unwrap();
    assert!((r - 34.0 / 81.0).abs() < 1e-15);
}

#[test]
fn dp_trivial_cases() {
    assert!((dp_exact_rho(12, 12, 0.25, 0.3).unwrap() - 0.25).abs() < 1e-15);
    for &(p, beta, eta) in &[(2u64, 0.5, 0.5), (10, 0.3, 0.7), (40, 0.9, 0.1)] {
        let want = naive_rho(beta, eta).unwrap();
        assert!((dp_exact_rho(1, p, beta, eta).unwrap() - want).abs() < 1e-15);
    }
}

#[test]
fn dp_rejects_large_population() {
    assert!(matches!(
        dp_exact_rho(10, 5001, 0.5, 0.5),
        Err(Error::ScaleLimit { .. })
    ));
}

#[test]
fn dp_agrees_with_closed_form_on_a_sample() {
    for p in [5u64, 17, 40] {
        for n in 1..=p {
            for m in 0..=p {
                let beta = m as f64 / p as f64;
                for eta in [0.1, 0.55, 1.0] {
                    let dp = dp_exact_rho(n, p, beta, eta).unwrap();
                    let cf = exact_rho(n, p, beta, eta).unwrap();
                    assert!((dp - cf).abs() < 1e-10, "n={n} p={p} beta={beta} eta={eta}");
                }
            }
        }
    }
}

#[test]
fn trajectory_means_hit_saturation_times() {
    let config = SimConfig {
        trials: 100,
        seed: 3,
        time_resolution: 101,
    };
    let (p, beta, eta) = (10_000u64, 0.5, 0.5);
    let stats = trajectories(p, beta, eta, &config).unwrap();
    // horizon 2, so t = 1 sits at index 50 and t = 1/eta at the end
    assert!((stats.times[50] - 1.0).abs() < 1e-12);
    let adv = (1.0 - beta) * p as f64;
    assert!((stats.mean_advantaged[50] - adv).abs() / adv < 0.02);
    assert!((stats.mean_total[100] - p as f64).abs() / (p as f64) < 0.02);
    for w in stats.mean_total.windows(2) {
        assert!(w[1] >= w[0]);
    }
    for w in stats.mean_advantaged.windows(2) {
        assert!(w[1] >= w[0]);
    }
    assert!(stats.mean_total.iter().all(|&m| m <= p as f64));
    assert!(stats.mean_advantaged.iter().all(|&m| m <= adv));
}

#[test]
fn no_gap_curves_coincide() {
    let config = SimConfig {
        trials: 400,
        seed: 11,
        time_resolution: 21,
    };
    let stats = trajectories(200, 0.5, 1.0, &config).unwrap();
    let dis = stats.mean_disadvantaged();
    for (d, a) in dis.iter().zip(&stats.mean_advantaged) {
        // each mean is within a few units of the other; sd of a count is at most 10
        assert!((d - a).abs() < 2.0, "{d} vs {a}");
    }
}

#[test]
fn envelopes_narrow_with_population() {
    let config = SimConfig {
        trials: 200,
        seed: 5,
        time_resolution: 5,
    };
    let mut last = f64::INFINITY;
    for p in [10u64, 100, 1000, 10_000] {
        let stats = trajectories(p, 0.5, 0.5, &config).unwrap();
        // horizon 2, index 1 is t = 0.5
        assert!((stats.times[1] - 0.5).abs() < 1e-12);
        let width = (stats.p95_total[1] - stats.p5_total[1]) / p as f64;
        assert!(width < last, "p={p}: {width} !< {last}");
        last = width;
    }
}

#[test]
fn nearest_rank_percentiles() {
    let v: Vec<u32> = (1..=20).collect();
    assert_eq!(nearest_rank(&v, 5.0), 1);
    assert_eq!(nearest_rank(&v, 95.0), 19);
    assert_eq!(nearest_rank(&[4u32], 95.0), 4);
}
