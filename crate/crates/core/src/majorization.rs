//! Majorization order on spectra and the LOCC convertibility predicate.

use crate::numeric::CompensatedSum;
use crate::spectra::{ln_biguint, WeightedSpectrum};
use num_bigint::BigUint;
use num_traits::{FromPrimitive, ToPrimitive, Zero};
use serde::Serialize;

/// Absolute tolerance applied to each prefix-sum comparison.
pub const PREFIX_TOLERANCE: f64 = 1e-12;

/// Outcome of a prefix-sum comparison `p ⪰ q`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MajorizationVerdict {
    pub holds: bool,
    /// 1-based length of the first prefix where `Σ p↓ < Σ q↓ - tol`.
    #[serde(serialize_with = "serialize_position")]
    pub first_violation: Option<BigUint>,
    /// Smallest value of `Σ_{j≤k} p↓_j - Σ_{j≤k} q↓_j` over all `k`.
    pub worst_margin: f64,
}

fn serialize_position<S: serde::Serializer>(pos: &Option<BigUint>, s: S) -> Result<S::Ok, S::Error> {
    match pos {
        None => s.serialize_none(),
        Some(k) => match k.to_u64() {
            Some(v) => s.serialize_u64(v),
            None => s.serialize_str(&k.to_string()),
        },
    }
}

/// Cursor over the descending atoms of a spectrum, padded with zeros.
struct Cursor<'a> {
    sp: &'a WeightedSpectrum,
    level: usize,
    remaining: BigUint,
}

impl<'a> Cursor<'a> {
    fn new(sp: &'a WeightedSpectrum) -> Self {
        Cursor {
            sp,
            level: 0,
            remaining: sp.levels()[0].multiplicity().clone(),
        }
    }

    fn exhausted(&self) -> bool {
        self.level >= self.sp.levels().len()
    }

    fn value(&self) -> f64 {
        if self.exhausted() {
            0.0
        } else {
            self.sp.levels()[self.level].value()
        }
    }

    /// Mass of the next `step` atoms.
    fn mass_of(&self, step: &BigUint) -> f64 {
        if self.exhausted() {
            return 0.0;
        }
        let level = &self.sp.levels()[self.level];
        if step == level.multiplicity() {
            level.mass()
        } else {
            (ln_biguint(step) + level.ln_value()).exp()
        }
    }

    fn advance(&mut self, step: &BigUint) {
        if self.exhausted() {
            return;
        }
        self.remaining -= step;
        if self.remaining.is_zero() {
            self.level += 1;
            if let Some(next) = self.sp.levels().get(self.level) {
                self.remaining = next.multiplicity().clone();
            }
        }
    }
}

/// Checks `p ⪰ q` by comparing descending prefix sums at every position.
///
/// Between consecutive level boundaries of either spectrum the prefix-sum
/// difference is linear, so it is enough to evaluate it at the union of
/// the boundaries. The shorter spectrum is padded with zeros.
pub fn majorization_check(p: &WeightedSpectrum, q: &WeightedSpectrum) -> MajorizationVerdict {
    let mut cp = Cursor::new(p);
    let mut cq = Cursor::new(q);
    let mut sum_p = CompensatedSum::new();
    let mut sum_q = CompensatedSum::new();
    let mut position = BigUint::zero();
    let mut worst = 0.0f64;
    let mut first_violation = None;

    while !(cp.exhausted() && cq.exhausted()) {
        let step = match (cp.exhausted(), cq.exhausted()) {
            (false, false) => cp.remaining.clone().min(cq.remaining.clone()),
            (false, true) => cp.remaining.clone(),
            (true, false) => cq.remaining.clone(),
            (true, true) => unreachable!(),
        };
        let before = sum_p.value() - sum_q.value();
        let slope = cp.value() - cq.value();
        sum_p.add(cp.mass_of(&step));
        sum_q.add(cq.mass_of(&step));
        let after = sum_p.value() - sum_q.value();
        worst = worst.min(after);
        if first_violation.is_none() && after < -PREFIX_TOLERANCE {
            // smallest t ≥ 1 with before + t·slope < -tol
            let t = if slope < 0.0 {
                ((-PREFIX_TOLERANCE - before) / slope).floor().max(0.0) + 1.0
            } else {
                1.0
            };
            let t = BigUint::from_f64(t).unwrap_or_else(|| step.clone()).min(step.clone());
            first_violation = Some(&position + t);
        }
        position += &step;
        cp.advance(&step);
        cq.advance(&step);
    }

    MajorizationVerdict {
        holds: first_violation.is_none(),
        first_violation,
        worst_margin: worst,
    }
}

/// `p ⪰ q`: every descending prefix sum of `p` dominates that of `q`.
pub fn majorizes(p: &WeightedSpectrum, q: &WeightedSpectrum) -> bool {
    majorization_check(p, q).holds
}

/// Whether a pure state with Schmidt spectrum `source` can be converted
/// deterministically by LOCC into one with spectrum `target`, which holds
/// exactly when the target majorizes the source.
pub fn locc_transformable(source: &WeightedSpectrum, target: &WeightedSpectrum) -> bool {
    majorizes(target, source)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(values: &[f64]) -> WeightedSpectrum {
        WeightedSpectrum::from_values(values).unwrap()
    }

    #[test]
    fn majorizes_examples() {
        let point = WeightedSpectrum::point_mass();
        assert!(majorizes(&point, &sp(&[0.2, 0.3, 0.5])));
        assert!(!majorizes(&sp(&[0.5, 0.5]), &sp(&[0.7, 0.3])));
        assert!(majorizes(&sp(&[0.7, 0.3]), &sp(&[0.6, 0.4])));
    }

    #[test]
    fn locc_examples() {
        let point = WeightedSpectrum::point_mass();
        assert!(locc_transformable(&sp(&[0.5, 0.5]), &point));
        assert!(!locc_transformable(&sp(&[0.7, 0.3]), &sp(&[0.5, 0.5])));
        let source = WeightedSpectrum::from_entries(&[(0.4, 2), (0.2, 1)]).unwrap();
        assert!(locc_transformable(&source, &sp(&[0.5, 0.5])));
    }

    #[test]
    fn reports_first_violated_prefix() {
        let v = majorization_check(&sp(&[0.5, 0.5]), &sp(&[0.7, 0.3]));
        assert!(!v.holds);
        assert_eq!(v.first_violation, Some(BigUint::from(1u32)));
        assert!((v.worst_margin + 0.2).abs() < 1e-15);

        // violation inside a long block: uniform(10) vs (0.3, 0.7/9 × 9)
        let q = WeightedSpectrum::from_entries(&[(0.3, 1), (0.7 / 9.0, 9)]).unwrap();
        let v = majorization_check(&WeightedSpectrum::uniform(10).unwrap(), &q);
        assert_eq!(v.first_violation, Some(BigUint::from(1u32)));
        let p = WeightedSpectrum::from_entries(&[(0.3, 1), (0.1, 7)]).unwrap();
        let q = WeightedSpectrum::from_entries(&[(0.3, 1), (0.14, 5)]).unwrap();
        let v = majorization_check(&p, &q);
        assert_eq!(v.first_violation, Some(BigUint::from(2u32)));
    }

    #[test]
    fn padding_handles_dimension_mismatch() {
        // (0.5, 0.5) vs uniform over 4: 0.5 ≥ 0.25, 1 ≥ 0.5, 1 ≥ 0.75, 1 ≥ 1
        assert!(majorizes(&sp(&[0.5, 0.5]), &WeightedSpectrum::uniform(4).unwrap()));
        assert!(!majorizes(&WeightedSpectrum::uniform(4).unwrap(), &sp(&[0.5, 0.5])));
    }

    #[test]
    fn merged_and_split_levels_agree() {
        let merged = WeightedSpectrum::from_entries(&[(0.3, 2), (0.1, 4)]).unwrap();
        let split = sp(&[0.3, 0.3, 0.1, 0.1, 0.1, 0.1]);
        let other = sp(&[0.35, 0.25, 0.2, 0.2]);
        assert_eq!(majorizes(&merged, &other), majorizes(&split, &other));
        assert_eq!(majorizes(&other, &merged), majorizes(&other, &split));
        assert!(majorizes(&merged, &split) && majorizes(&split, &merged));
    }
}
