mod common;

use common::{distribution, spectrum};
use concentrate_core::info_spectrum::{finite_quantities, k_n, quantity_n, PairedSpectrum, Quantity};
use concentrate_core::spectra::iid_product;
use concentrate_core::{Extended, WeightedSpectrum};
use proptest::prelude::*;

fn ln_choose(n: u32, k: u32) -> f64 {
    (1..=k).map(|i| ((n - k + i) as f64).ln() - (i as f64).ln()).sum()
}

/// All six quantities of the two-letter source summed over binomial
/// classes directly.
fn binomial(p: f64, n: u32, a: f64) -> [Extended; 6] {
    let cut = -(n as f64) * a;
    let (mut above, mut below, mut count, mut root_above, mut root_below) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for k in 0..=n {
        let ln_v = k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln();
        let c = ln_choose(n, k);
        if ln_v >= cut {
            above += (c + ln_v).exp();
            count += c.exp();
            root_above += (c + 0.5 * ln_v).exp();
        } else {
            below += (c + ln_v).exp();
            root_below += (c + 0.5 * ln_v).exp();
        }
    }
    let rate = |x: f64| {
        if x > 0.0 {
            Extended::Finite(-x.ln() / n as f64)
        } else {
            Extended::Infinite
        }
    };
    [Extended::Finite(above), rate(below), rate(above), rate(count), rate(root_below), rate(root_above)]
}

fn close(x: Extended, y: Extended, tol: f64) -> bool {
    match (x, y) {
        (Extended::Infinite, Extended::Infinite) => true,
        (Extended::Finite(u), Extended::Finite(v)) => (u - v).abs() <= tol,
        _ => false,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn monotone_in_a(base in spectrum(3, 2), n in 1u32..20, a in -0.5f64..3.0, da in 0.0f64..1.0) {
        let sp = iid_product(&base, n).unwrap();
        let (lo, hi) = (finite_quantities(&sp, n, a), finite_quantities(&sp, n, a + da));
        prop_assert!(k_n(&sp, n, a) <= k_n(&sp, n, a + da) + 1e-15);
        prop_assert!(hi.zeta_c_n <= lo.zeta_c_n);
        prop_assert!(lo.zeta_n <= hi.zeta_n);
    }

    #[test]
    fn complement_identity(base in spectrum(3, 2), n in 1u32..40, a in 0.0f64..3.0) {
        let sp = iid_product(&base, n).unwrap();
        let lhs = 1.0 - k_n(&sp, n, a);
        let rhs = (-(n as f64) * finite_quantities(&sp, n, a).zeta_n.to_f64()).exp();
        prop_assert!((lhs - rhs).abs() <= 1e-12, "{lhs} vs {rhs}");
    }

    #[test]
    fn sqrt_variants_are_doubled_thresholds(base in distribution(2, 3), n in 1u32..25, a in 0.001f64..2.0) {
        let sp = iid_product(&WeightedSpectrum::from_values(&base).unwrap(), n).unwrap();
        let pair = PairedSpectrum::with_sqrt_sigma(&sp);
        let q = pair.quantities(n, a);
        let f = finite_quantities(&sp, n, 2.0 * a);
        let on_tie = sp.levels().iter().any(|l| l.ln_value() == -2.0 * n as f64 * a);
        if !on_tie {
            prop_assert_eq!(q.eta, f.zeta_c_half_n);
            prop_assert_eq!(q.zeta, f.zeta_n);
        }
    }

    #[test]
    fn two_letter_source_matches_binomial_sums(p in 0.55f64..0.95, n in 1u32..60, a in 0.0f64..3.0) {
        let sp = iid_product(&WeightedSpectrum::from_values(&[p, 1.0 - p]).unwrap(), n).unwrap();
        let expected = binomial(p, n, a);
        for (q, want) in Quantity::ALL.iter().zip(expected) {
            let got = quantity_n(&sp, n, a, *q);
            prop_assert!(close(got, want, 1e-10), "{q} at n={n}, a={a}: {got} vs {want}");
        }
    }
}
