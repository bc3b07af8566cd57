mod common;

use common::spectrum;
use concentrate_core::majorization::majorizes;
use concentrate_core::protocols::{
    dflec_fidelity_oracle, dflec_max_fidelity, dflec_optimizer, failure_function, lemma3_bound, mes_overlap,
    min_failure_for_size, optimal_pflec, pflec_failure_oracle,
};
use concentrate_core::WeightedSpectrum;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn failure_matches_convex_program(sp in spectrum(8, 2), u in 0.0f64..1.2) {
        let x = u * sp.max_value();
        let oracle = pflec_failure_oracle(&sp, x).unwrap();
        prop_assert!((failure_function(&sp, x) - oracle).abs() <= 1e-12);
    }

    #[test]
    fn failure_is_convex_and_nonincreasing(sp in spectrum(6, 3), a in 0.0f64..1.0, b in 0.0f64..1.0, c in 0.0f64..1.0) {
        let mut xs = [a, b, c].map(|t| t * sp.max_value() * 1.1);
        xs.sort_by(|p, q| p.partial_cmp(q).unwrap());
        let [x1, x2, x3] = xs;
        let h = |x| failure_function(&sp, x);
        prop_assert!(h(x1) + 1e-12 >= h(x2) && h(x2) + 1e-12 >= h(x3));
        if x3 > x1 {
            let w = (x2 - x1) / (x3 - x1);
            prop_assert!(h(x2) <= (1.0 - w) * h(x1) + w * h(x3) + 1e-12);
        }
    }

    #[test]
    fn pflec_size_and_failure_fall_with_x(sp in spectrum(6, 3), a in 0.01f64..1.0, b in 0.01f64..1.0) {
        let (x1, x2) = (a.min(b), a.max(b));
        let (r1, r2) = (optimal_pflec(&sp, x1).unwrap(), optimal_pflec(&sp, x2).unwrap());
        prop_assert!(r1.size >= r2.size);
        prop_assert!(r1.failure + 1e-12 >= r2.failure);
    }

    #[test]
    fn dflec_properties(sp in spectrum(5, 3)) {
        let d = sp.dimension_u64().unwrap();
        let mut prev: Option<(f64, f64)> = None;
        for size in 1..=d {
            let opt = dflec_optimizer(&sp, size).unwrap();
            let fid = opt.report.fidelity;
            let pflec = min_failure_for_size(&sp, size).unwrap();
            prop_assert!(fid + 1e-12 >= 1.0 - pflec.failure, "L={size}: {fid} < 1 - {}", pflec.failure);
            prop_assert!(majorizes(&opt.optimizer, &sp));
            let q = opt.optimizer.atoms(1 << 12).unwrap();
            prop_assert!((mes_overlap(&q, size as usize) - fid).abs() <= 1e-12);
            if let Some((f0, fl0)) = prev {
                prop_assert!(fid <= f0 + 1e-12);
                prop_assert!(fid * size as f64 + 1e-12 >= fl0);
            }
            prev = Some((fid, fid * size as f64));
        }
    }

    #[test]
    fn lemma3_dominates_sampled_majorizers(sp in spectrum(4, 2), moves in prop::collection::vec((0usize..8, 0usize..8, 0.0f64..1.0), 0..6)) {
        let mut q = sp.atoms(64).unwrap();
        for (i, j, t) in moves {
            let (i, j) = ((i % q.len()).min(j % q.len()), (i % q.len()).max(j % q.len()));
            let moved = t * q[j];
            q[i] += moved;
            q[j] -= moved;
            q.sort_by(|a, b| b.partial_cmp(a).unwrap());
        }
        let d = q.len() as u64;
        for m in 1..=d {
            for trace_t in m..=d {
                let lhs: f64 = q.iter().take(trace_t as usize).map(|v| v.sqrt()).sum();
                let bound = lemma3_bound(&sp, trace_t, m).unwrap();
                prop_assert!(lhs <= bound + 1e-12, "trT={trace_t} M={m}: {lhs} > {bound}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn dflec_beats_random_search(sp in spectrum(4, 2), seed in any::<u64>()) {
        let d = sp.dimension_u64().unwrap();
        for size in 1..=d {
            let oracle = dflec_fidelity_oracle(&sp, size, 400, seed).unwrap();
            prop_assert!(dflec_max_fidelity(&sp, size).unwrap().fidelity >= oracle - 1e-9);
        }
    }
}

#[test]
fn protocol_examples() {
    let sp = WeightedSpectrum::from_values(&[0.7, 0.3]).unwrap();
    assert!((dflec_max_fidelity(&sp, 2).unwrap().fidelity - 0.958_257_569_495_584).abs() < 1e-12);
    let sp = WeightedSpectrum::from_values(&[0.6, 0.2, 0.2]).unwrap();
    assert!((dflec_max_fidelity(&sp, 2).unwrap().fidelity - 0.989_897_948_556_635_6).abs() < 1e-12);
    assert!((lemma3_bound(&WeightedSpectrum::from_values(&[0.7, 0.3]).unwrap(), 2, 2).unwrap()
        - 1.384_382_584_039_241_7)
        .abs()
        < 1e-12);
    let u = WeightedSpectrum::uniform(4).unwrap();
    let r = optimal_pflec(&u, 0.25).unwrap();
    assert_eq!((r.size, r.failure), (4, 0.0));
}
