mod common;

use common::{distribution, spectrum};
use concentrate_core::majorization::{locc_transformable, majorization_check, majorizes};
use concentrate_core::WeightedSpectrum;
use proptest::prelude::*;

/// Plain prefix-sum comparison on expanded atoms.
fn naive(p: &WeightedSpectrum, q: &WeightedSpectrum) -> bool {
    let a = p.atoms(1 << 16).unwrap();
    let b = q.atoms(1 << 16).unwrap();
    let (mut sa, mut sb) = (0.0, 0.0);
    for k in 0..a.len().max(b.len()) {
        sa += a.get(k).copied().unwrap_or(0.0);
        sb += b.get(k).copied().unwrap_or(0.0);
        if sa < sb - 1e-12 {
            return false;
        }
    }
    true
}

/// Moves a fraction `t` of the gap from the `j`-th atom onto the larger
/// `i`-th one, which can only sharpen the distribution.
fn sharpen(p: &[f64], i: usize, j: usize, t: f64) -> Vec<f64> {
    let mut q = p.to_vec();
    q.sort_by(|x, y| y.partial_cmp(x).unwrap());
    let (i, j) = (i.min(j), i.max(j));
    if i != j {
        let moved = t * q[j];
        q[i] += moved;
        q[j] -= moved;
    }
    q.retain(|&v| v > 1e-12);
    let total: f64 = q.iter().sum();
    q.iter().map(|v| v / total).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn agrees_with_naive_prefix_sums(p in spectrum(5, 3), q in spectrum(5, 3)) {
        prop_assert_eq!(majorizes(&p, &q), naive(&p, &q));
        prop_assert_eq!(locc_transformable(&q, &p), majorizes(&p, &q));
    }

    #[test]
    fn reflexive_and_transitive(
        p in spectrum(5, 2),
        q in spectrum(5, 2),
        r in spectrum(5, 2),
        base in distribution(2, 6),
        i in 0usize..6, j in 0usize..6, k in 0usize..6, l in 0usize..6,
        s in 0.0f64..1.0, t in 0.0f64..1.0,
    ) {
        prop_assert!(majorizes(&p, &p));
        if majorizes(&p, &q) && majorizes(&q, &r) {
            prop_assert!(majorizes(&p, &r));
        }
        let n = base.len();
        let q1 = sharpen(&base, i % n, j % n, s);
        let q2 = sharpen(&q1, k % q1.len(), l % q1.len(), t);
        let (b0, b1, b2) = (
            WeightedSpectrum::from_values(&base).unwrap(),
            WeightedSpectrum::from_values(&q1).unwrap(),
            WeightedSpectrum::from_values(&q2).unwrap(),
        );
        prop_assert!(majorizes(&b1, &b0));
        prop_assert!(majorizes(&b2, &b1));
        prop_assert!(majorizes(&b2, &b0));
    }

    #[test]
    fn uniform_is_majorized(p in spectrum(6, 3), extra in 0u64..5) {
        let d = p.dimension_u64().unwrap() + extra;
        prop_assert!(majorizes(&p, &WeightedSpectrum::uniform(d).unwrap()));
    }

    #[test]
    fn invariant_under_splitting_equal_entries(raw in prop::collection::vec((0.05f64..1.0, 1u64..4), 1..5), q in spectrum(5, 3)) {
        let merged = common::normalize(&raw);
        let split_values: Vec<f64> = merged.atoms(1 << 10).unwrap();
        let split = WeightedSpectrum::from_values(&split_values).unwrap();
        prop_assert_eq!(majorizes(&merged, &q), majorizes(&split, &q));
        prop_assert_eq!(majorizes(&q, &merged), majorizes(&q, &split));
    }
}

#[test]
fn verdict_reports_first_violation() {
    let p = WeightedSpectrum::from_values(&[0.4, 0.3, 0.3]).unwrap();
    let q = WeightedSpectrum::from_values(&[0.7, 0.2, 0.1]).unwrap();
    let v = majorization_check(&p, &q);
    assert!(!v.holds);
    assert_eq!(v.first_violation, Some(1u32.into()));
    assert!((v.worst_margin + 0.3).abs() < 1e-12);
    assert!(majorization_check(&q, &p).holds);
}
