//! Exact non-asymptotic performance of fixed-length concentration.
//!
//! * `h(x) = Tr(ρ - x){ρ - x ≥ 0}` is the failure probability of the optimal
//!   probabilistic protocol run at level `x`, whose output size is
//!   `⌊(1 - h(x))/x⌋`.
//! * The optimal deterministic fidelity to a maximally entangled state of
//!   size `L` is `max_{q ⪰ p} (Σ_{i≤L} √q↓_i)² / L`, attained by keeping the
//!   largest eigenvalues and flattening the rest over the remaining slots.

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::spectra::{ln_biguint, WeightedSpectrum};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Largest dimension the brute-force oracles will expand into atoms.
pub const ORACLE_DIMENSION_LIMIT: u64 = 10_000_000;

/// Size, failure probability and fidelity of one protocol evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProtocolReport {
    pub size: u64,
    pub failure: f64,
    pub fidelity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold_x: Option<f64>,
}

/// `h(x) = Σ_k m_k · max(v_k - x, 0)`.
pub fn failure_function(sp: &WeightedSpectrum, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let mut acc = CompensatedSum::new();
    for level in sp.levels() {
        if level.value() <= x {
            break;
        }
        // count·x ≤ mass here, so the count is finite
        acc.add(level.mass() - level.ln_multiplicity().exp() * x);
    }
    acc.value().clamp(0.0, 1.0)
}

/// `(1 - h(x)) / x = Σ_k m_k · min(v_k, x) / x`, evaluated without the
/// cancellation in `1 - h(x)`.
pub fn pflec_ratio(sp: &WeightedSpectrum, x: f64) -> f64 {
    let mut acc = CompensatedSum::new();
    for level in sp.levels() {
        if level.value() >= x {
            acc.add(level.ln_multiplicity().exp());
        } else {
            acc.add(level.mass() / x);
        }
    }
    acc.value()
}

/// Floors a size ratio, snapping values within `1e-9` (relative) of an
/// integer onto that integer first.
fn floor_size(ratio: f64) -> Result<u64> {
    let nearest = ratio.round();
    let snapped = if (ratio - nearest).abs() <= 1e-9 * nearest.abs().max(1.0) {
        nearest
    } else {
        ratio.floor()
    };
    if snapped >= u64::MAX as f64 {
        return Err(Error::SizeOverflow(snapped));
    }
    Ok(snapped.max(0.0) as u64)
}

/// Optimal probabilistic protocol at level `x`: size `⌊(1-h(x))/x⌋`,
/// failure `h(x)`.
pub fn optimal_pflec(sp: &WeightedSpectrum, x: f64) -> Result<ProtocolReport> {
    if !(x > 0.0) || x > 1.0 {
        return Err(Error::InvalidParameter {
            name: "x",
            value: x,
            reason: "threshold must lie in (0, 1]",
        });
    }
    let failure = failure_function(sp, x);
    let size = floor_size(pflec_ratio(sp, x))?;
    Ok(ProtocolReport {
        size,
        failure,
        fidelity: 1.0 - failure,
        threshold_x: Some(x),
    })
}

/// Independent brute-force evaluation of the diagonal convex program
/// `min { 1 - Tr σ | σ ≤ x, σ ≤ ρ }`, whose optimum clips every eigenvalue
/// at `x`.
pub fn pflec_failure_oracle(sp: &WeightedSpectrum, x: f64) -> Result<f64> {
    let atoms = sp
        .atoms(ORACLE_DIMENSION_LIMIT)
        .ok_or_else(|| Error::InvalidInput("dimension too large for the oracle".into()))?;
    let kept: f64 = atoms.iter().map(|&s| s.min(x.max(0.0))).collect::<CompensatedSum>().value();
    let total: f64 = atoms.iter().copied().collect::<CompensatedSum>().value();
    Ok((total - kept).max(0.0))
}

fn check_size(sp: &WeightedSpectrum, size: u64) -> Result<()> {
    let dim = sp.dimension();
    if size == 0 || BigUint::from(size) > dim {
        return Err(Error::InvalidSize {
            size,
            dimension: dim.to_string(),
        });
    }
    Ok(())
}

/// Smallest failure probability of a probabilistic protocol whose output
/// size is at least `size`.
///
/// The map `x ↦ (1 - h(x))/x` is nonincreasing and `h` is decreasing, so
/// the optimum is the largest `x` with ratio `≥ size`. It is found by
/// locating the segment between consecutive eigenvalues where the ratio
/// crosses `size` and solving the linear equation on it.
pub fn min_failure_for_size(sp: &WeightedSpectrum, size: u64) -> Result<ProtocolReport> {
    check_size(sp, size)?;
    let levels = sp.levels();
    let target = size as f64;
    let tol = 1e-9 * target;

    // tail[k] = mass of levels k.. (strictly below level k-1)
    let mut tail = vec![0.0; levels.len() + 1];
    for k in (0..levels.len()).rev() {
        tail[k] = tail[k + 1] + levels[k].mass();
    }

    let x = if target * sp.max_value() <= 1.0 + 1e-12 {
        // a uniform target of size L is reachable deterministically
        1.0 / target
    } else {
        let mut count_above = 0.0; // levels strictly above the current segment
        let mut found = None;
        for (k, level) in levels.iter().enumerate() {
            let count_through = count_above + level.ln_multiplicity().exp();
            let ratio_at_level = count_through + tail[k + 1] / level.value();
            if ratio_at_level >= target - tol {
                // x in [v_k, v_{k-1}): ratio = count_above + tail[k] / x
                let upper = if k == 0 { 1.0 } else { levels[k - 1].value() };
                let x = (tail[k] / (target - count_above)).clamp(level.value(), upper);
                found = Some(x);
                break;
            }
            count_above = count_through;
        }
        found.ok_or_else(|| Error::Domain(format!("no threshold reaches size {size}")))?
    };

    let failure = failure_function(sp, x);
    Ok(ProtocolReport {
        size: floor_size(pflec_ratio(sp, x))?.max(size),
        failure,
        fidelity: 1.0 - failure,
        threshold_x: Some(x),
    })
}

/// The maximizing spectrum of the deterministic fidelity together with
/// the resulting report.
#[derive(Debug, Clone, PartialEq)]
pub struct DflecOptimum {
    pub report: ProtocolReport,
    /// Number of leading eigenvalues kept unchanged.
    pub kept: u64,
    /// Common value of the `size - kept` flattened slots.
    pub flat_level: f64,
    /// The flattened spectrum `q`, which majorizes the input.
    pub optimizer: WeightedSpectrum,
}

/// Maximizes `(Σ_{i≤L} √q↓_i)² / L` over `q ⪰ p`.
///
/// Candidates keep the first `l` eigenvalues and spread the remaining mass
/// evenly as `c_l = (1 - P_l)/(L - l)`. A candidate majorizes `p` iff the
/// next eigenvalue fits under the flat level, `p↓_{l+1} ≤ c_l`; within a
/// block of equal eigenvalues this test does not depend on `l`, so only
/// block starts need to be visited.
pub fn dflec_optimizer(sp: &WeightedSpectrum, size: u64) -> Result<DflecOptimum> {
    check_size(sp, size)?;
    let target = size as f64;
    let mut kept: u64 = 0;
    let mut kept_mass = CompensatedSum::new();
    let mut kept_sqrt = CompensatedSum::new();
    let mut best: Option<(f64, u64, f64, usize)> = None; // (fidelity, l, c, level index)

    for (j, level) in sp.levels().iter().enumerate() {
        if kept >= size {
            break;
        }
        let slots = (size - kept) as f64;
        let rest = (1.0 - kept_mass.value()).max(0.0);
        let flat = rest / slots;
        if level.value() * slots <= rest * (1.0 + 1e-12) {
            let overlap = kept_sqrt.value() + slots * flat.sqrt();
            let fidelity = overlap * overlap / target;
            if best.map_or(true, |b| fidelity > b.0) {
                best = Some((fidelity, kept, flat, j));
            }
        }
        let m = level.multiplicity().to_u64().unwrap_or(u64::MAX);
        kept = kept.saturating_add(m);
        kept_mass.add(level.mass());
        kept_sqrt.add((0.5 * level.ln_value() + level.ln_multiplicity()).exp());
    }

    let (fidelity, l, flat, upto) =
        best.ok_or_else(|| Error::Domain(format!("no feasible flattening for size {size}")))?;
    let mut raw: Vec<(f64, BigUint)> = sp.levels()[..upto]
        .iter()
        .map(|lv| (lv.ln_value(), lv.multiplicity().clone()))
        .collect();
    if size > l {
        raw.push((flat.ln(), BigUint::from(size - l)));
    }
    let optimizer = WeightedSpectrum::from_log_levels(raw);
    let fidelity = fidelity.clamp(0.0, 1.0);
    Ok(DflecOptimum {
        report: ProtocolReport {
            size,
            failure: 1.0 - fidelity,
            fidelity,
            threshold_x: None,
        },
        kept: l,
        flat_level: flat,
        optimizer,
    })
}

/// Optimal fidelity of a deterministic protocol targeting a maximally
/// entangled state of the given size.
pub fn dflec_max_fidelity(sp: &WeightedSpectrum, size: u64) -> Result<ProtocolReport> {
    Ok(dflec_optimizer(sp, size)?.report)
}

/// `(Σ_{i≤L} √q↓_i)² / L` for a descending vector `q`.
pub fn mes_overlap(q: &[f64], size: usize) -> f64 {
    let s: f64 = q.iter().take(size).map(|v| v.max(0.0).sqrt()).sum();
    s * s / size as f64
}

/// Prefix-sum test on plain descending vectors, kept separate from the
/// majorization module so the oracle does not share its code path.
fn dominates(q: &[f64], p: &[f64]) -> bool {
    let n = q.len().max(p.len());
    let (mut sq, mut sp) = (0.0, 0.0);
    for k in 0..n {
        sq += q.get(k).copied().unwrap_or(0.0);
        sp += p.get(k).copied().unwrap_or(0.0);
        if sq < sp - 1e-12 {
            return false;
        }
    }
    true
}

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
    v
}

/// Randomized lower bound on `max_{q ⪰ p} (Σ_{i≤L} √q↓_i)² / L`.
///
/// Searches the keep-and-flatten family (each candidate re-checked for
/// feasibility) and then hill-climbs with random mass transfers between
/// pairs of entries, accepting only moves that stay in the majorization
/// cone and improve the objective. Every point it scores is feasible, so
/// the result never exceeds the true maximum.
pub fn dflec_fidelity_oracle(sp: &WeightedSpectrum, size: u64, samples: usize, seed: u64) -> Result<f64> {
    check_size(sp, size)?;
    if sp.distinct() > 8 {
        return Err(Error::InvalidInput("oracle supports at most 8 distinct values".into()));
    }
    let p = sp
        .atoms(4096)
        .ok_or_else(|| Error::InvalidInput("dimension too large for the oracle".into()))?;
    let l = size as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut best_q: Vec<f64> = {
        // p truncated to L slots, tail mass moved onto the top entry
        let mut q: Vec<f64> = p.iter().take(l).copied().collect();
        q.resize(l, 0.0);
        let tail: f64 = p.iter().skip(l).sum();
        q[0] += tail;
        q
    };
    let mut best = mes_overlap(&best_q, l);

    let mut prefix = 0.0;
    for kept in 0..l {
        let flat = (1.0 - prefix) / (l - kept) as f64;
        let mut q: Vec<f64> = p[..kept.min(p.len())].to_vec();
        q.resize(l, flat);
        let q = sorted_desc(q);
        if dominates(&q, &p) {
            let f = mes_overlap(&q, l);
            if f > best {
                best = f;
                best_q = q;
            }
        }
        prefix += p.get(kept).copied().unwrap_or(0.0);
    }

    if l > 1 {
        for step in 0..samples {
            let mut q = best_q.clone();
            let i = rng.gen_range(0..l);
            let mut j = rng.gen_range(0..l - 1);
            if j >= i {
                j += 1;
            }
            let scale = if step % 2 == 0 { 1.0 } else { 1e-3 };
            let t: f64 = rng.gen::<f64>() * 0.5 * scale;
            let moved = t * (q[i] - q[j]);
            q[i] -= moved;
            q[j] += moved;
            let q = sorted_desc(q);
            if dominates(&q, &p) {
                let f = mes_overlap(&q, l);
                if f > best {
                    best = f;
                    best_q = q;
                }
            }
        }
    }
    Ok(best.min(1.0))
}

/// Upper bound on `Tr √ρ' T` for every `ρ' ⪰ ρ` and every projection `T`
/// of rank `trace_t ≥ m`:
/// `√#{ρ ≥ 1/M}·√Tr ρ{ρ ≥ 1/M} + √(Tr T - #{ρ ≥ 1/M})·√Tr ρ{ρ < 1/M}`.
pub fn lemma3_bound(sp: &WeightedSpectrum, trace_t: u64, m: u64) -> Result<f64> {
    if m == 0 || trace_t < m {
        return Err(Error::InvalidParameter {
            name: "trT",
            value: trace_t as f64,
            reason: "projection rank must satisfy trT ≥ M ≥ 1",
        });
    }
    let ln_threshold = -(m as f64).ln();
    let mut count_ge = BigUint::from(0u32);
    let mut mass_ge = CompensatedSum::new();
    let mut mass_lt = CompensatedSum::new();
    for level in sp.levels() {
        if level.ln_value() >= ln_threshold - 1e-12 {
            count_ge += level.multiplicity();
            mass_ge.add(level.mass());
        } else {
            mass_lt.add(level.mass());
        }
    }
    let count = ln_biguint(&count_ge).exp();
    let count = if count_ge == BigUint::from(0u32) { 0.0 } else { count };
    let rest = (trace_t as f64 - count).max(0.0);
    Ok(count.sqrt() * mass_ge.value().max(0.0).sqrt() + rest.sqrt() * mass_lt.value().max(0.0).sqrt())
}
