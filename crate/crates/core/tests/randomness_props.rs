mod common;

use common::{distribution, linspace};
use concentrate_core::asymptotics::{profile_from_spectrum, zeta_curve, RenyiProfile};
use concentrate_core::randomness::{
    b_kl, bucket_masses, duality_check, greedy_partition, hellinger_epsilon, PartitionMap,
};
use concentrate_core::info_spectrum::{Quantity, RateCurve};
use concentrate_core::{Extended, WeightedSpectrum};
use proptest::prelude::*;

/// Merges the two lightest buckets of `pm` into one.
fn merge_lightest(p: &WeightedSpectrum, pm: &PartitionMap) -> PartitionMap {
    let masses = bucket_masses(p, pm).unwrap();
    let mut order: Vec<usize> = (0..masses.len()).collect();
    order.sort_by(|&i, &j| masses[i].total_cmp(&masses[j]));
    let (keep, gone) = (order[0].min(order[1]) as u64, order[0].max(order[1]) as u64);
    let assignment = pm
        .assignment()
        .iter()
        .map(|&b| match b {
            b if b == gone => keep,
            b if b > gone => b - 1,
            b => b,
        })
        .collect();
    PartitionMap::new(pm.buckets() - 1, assignment).unwrap()
}

fn partition() -> impl Strategy<Value = (Vec<f64>, u64, Vec<u64>)> {
    distribution(1, 10).prop_flat_map(|p| {
        let d = p.len() as u64;
        (Just(p), 1..=d).prop_flat_map(move |(p, m)| {
            let rest = prop::collection::vec(0..m, (d - m) as usize);
            (Just(p), Just(m), rest)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn sandwich_and_identities((p, m, rest) in partition()) {
        let sp = WeightedSpectrum::from_values(&p).unwrap();
        let mut assignment: Vec<u64> = (0..m).collect();
        assignment.extend(rest);
        let r = duality_check(&sp, &PartitionMap::new(m, assignment).unwrap()).unwrap();
        prop_assert!(r.sandwich_holds);
        prop_assert!(r.fidelity_identity_residual.abs() <= 1e-12);
        prop_assert!(r.failure_identity_residual.abs() <= 1e-12);
    }

    #[test]
    fn greedy_spread_is_at_most_largest_atom(p in distribution(2, 12), m in 1u64..6) {
        let sp = WeightedSpectrum::from_values(&p).unwrap();
        prop_assume!(m <= sp.dimension_u64().unwrap());
        let masses = bucket_masses(&sp, &greedy_partition(&sp, m).unwrap()).unwrap();
        let spread = masses.iter().cloned().fold(f64::MIN, f64::max) - masses.iter().cloned().fold(f64::MAX, f64::min);
        prop_assert!(spread <= sp.max_value() + 1e-12);
    }

    #[test]
    fn b_kl_nondecreasing(base in distribution(2, 3), e1 in 0.001f64..0.5, e2 in 0.001f64..0.5) {
        let p = profile_from_spectrum(&WeightedSpectrum::from_values(&base).unwrap());
        let curve = zeta_curve(&p, &linspace(-p.dpsi(1.0), -p.dpsi(0.0), 400)).unwrap();
        let (lo, hi) = (e1.min(e2), e1.max(e2));
        prop_assert!(b_kl(&curve, lo).unwrap() <= b_kl(&curve, hi).unwrap() + 1e-12);
    }
}

/// Merging the two lightest greedy buckets can raise ε: the uniform
/// distribution on four points is exactly uniform on four buckets but not
/// on three.
#[test]
fn merging_lightest_buckets_can_increase_epsilon() {
    let u = WeightedSpectrum::uniform(4).unwrap();
    let four = greedy_partition(&u, 4).unwrap();
    let three = merge_lightest(&u, &four);
    let (e4, e3) = (hellinger_epsilon(&u, &four).unwrap(), hellinger_epsilon(&u, &three).unwrap());
    assert!(e4 < 1e-15);
    assert!((e3 - (1.0 - (2.0 * (0.25f64 / 3.0).sqrt() + (0.5f64 / 3.0).sqrt()))).abs() < 1e-15);
    assert!(e3 > e4);
}

#[test]
fn b_kl_for_uniform_source_is_log_d() {
    let ln3 = 3f64.ln();
    let curve = RateCurve::from_fn(Quantity::Zeta, &linspace(0.0, 2.0, 201), |a| {
        if a <= ln3 {
            Extended::Finite(0.0)
        } else {
            Extended::Infinite
        }
    })
    .unwrap();
    assert!((b_kl(&curve, 0.05).unwrap() - ln3).abs() < 0.01);
    assert!(b_kl(&curve, 0.0).unwrap_err().is_domain());
}
