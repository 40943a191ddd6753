use jps_core::efficiency::{optimal_h, re_vs_brss, re_vs_srs};
use jps_core::strata::tw_bound;
use jps_core::tables::{table3, DEFAULT_H_MAX};
use jps_core::{coefficient_set, stratum_moments, DistributionSpec, GFunction, WeightScheme};

fn d(s: &str) -> DistributionSpec {
    s.parse().unwrap()
}

#[test]
fn equal_class_sizes_reduce_to_the_srs_ratio_times_within_share() {
    for dist in jps_core::distcat::catalog().into_iter().filter(|d| d.moment_exists(2.0)) {
        for h in 2..=6usize {
            let sm = stratum_moments(&dist, &GFunction::Identity, h).unwrap();
            for m in [1u64, 3, 10] {
                let n = m * h as u64;
                let c = coefficient_set(WeightScheme::StandardJps, n, h as u64).unwrap();
                let direct = re_vs_brss(&c, &sm, &sm, n).unwrap();
                let via_srs = (1.0 - sm.delta_g) * re_vs_srs(&c, sm.delta_g).unwrap();
                assert!((direct - via_srs).abs() <= 1e-10 * direct, "{dist} H={h} n={n}");
            }
        }
    }
}

#[test]
fn between_strata_share_respects_the_ordering_bound() {
    for dist in jps_core::distcat::catalog().into_iter().filter(|d| d.moment_exists(2.0)) {
        for h in 1..=14usize {
            let sm = stratum_moments(&dist, &GFunction::Identity, h).unwrap();
            assert!(sm.delta_g <= tw_bound(h) + 1e-9, "{dist} H={h}: {}", sm.delta_g);
        }
    }
    let u = d("uniform");
    for h in 1..=14usize {
        let sm = stratum_moments(&u, &GFunction::Identity, h).unwrap();
        assert!((sm.delta_g - tw_bound(h)).abs() <= 1e-9, "H={h}: {}", sm.delta_g);
    }
}

#[test]
fn optimal_class_size_examples() {
    let t = table3(&[d("uniform")], &[50], DEFAULT_H_MAX).unwrap();
    assert_eq!((t[0].h_opt, t[0].mre), (11, 3.93));
    let w = optimal_h(5, &d("weibull(0.5)"), WeightScheme::StandardJps, DEFAULT_H_MAX).unwrap();
    assert_eq!((w.h_opt, w.mre), (14, 1.03));
}

#[test]
fn single_stratum_matches_srs() {
    for s in [WeightScheme::StandardJps, WeightScheme::FreyFeeman] {
        for n in [1u64, 4, 30] {
            let c = coefficient_set(s, n, 1).unwrap();
            assert!((re_vs_srs(&c, 0.0).unwrap() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn second_coefficient_stays_below_one() {
    for s in [WeightScheme::StandardJps, WeightScheme::FreyFeeman] {
        for n in 3..=60u64 {
            for h in 2..=5u64 {
                let c = coefficient_set(s, n, h).unwrap();
                assert!(c.m2 < 1.0, "{s} n={n} H={h}: {}", c.m2);
            }
        }
    }
}
