//! Consistency suite for the general information-spectrum relations between
//! `ζ`, `ζᶜ` and `η` of a commuting sequence `(ρ_n, σ_n)`.
//!
//! `ζᶜ_n(a) ≤ η_n(a) + a` follows from an operator inequality and is
//! checked at every `n` with no slack. The remaining relations concern
//! limits; they are checked on regression estimates of the limits with a
//! user slack.

use super::paired::{PairedQuantities, PairedSpectrum};
use super::fit_rate;
use crate::error::{Error, Result};
use crate::numeric::Extended;
use crate::spectra::WeightedSpectrum;
use serde::Serialize;
use std::fmt;
use std::sync::Arc;

type PairGenerator = dyn Fn(u32) -> Result<PairedSpectrum> + Send + Sync;

/// A family `n ↦ (ρ_n, σ_n)` evaluated on a fixed list of `n`.
#[derive(Clone)]
pub struct PairedSequence {
    generator: Arc<PairGenerator>,
    n_range: Vec<u32>,
}

impl fmt::Debug for PairedSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PairedSequence").field("n_range", &self.n_range).finish()
    }
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

fn enumerate(remaining: u32, index: usize, parts: &mut Vec<u32>, visit: &mut dyn FnMut(&[u32])) {
    if index == parts.len() - 1 {
        parts[index] = remaining;
        visit(parts);
        return;
    }
    for c in 0..=remaining {
        parts[index] = c;
        enumerate(remaining - c, index + 1, parts, visit);
    }
}

/// `(ρ^{⊗n}, σ^{⊗n})` for diagonal `ρ, σ` given atom by atom.
pub fn iid_pair(rho: &[f64], sigma: &[f64], n: u32) -> Result<PairedSpectrum> {
    if rho.is_empty() || rho.len() != sigma.len() {
        return Err(Error::InvalidInput("ρ and σ need the same positive length".into()));
    }
    if rho.iter().chain(sigma).any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidInput("ρ and σ entries must be positive".into()));
    }
    let ln_rho: Vec<f64> = rho.iter().map(|v| v.ln()).collect();
    let ln_sigma: Vec<f64> = sigma.iter().map(|v| v.ln()).collect();
    let ln_n_fact = ln_factorial(n);
    let mut raw = Vec::new();
    let mut parts = vec![0u32; rho.len()];
    enumerate(n, 0, &mut parts, &mut |parts| {
        let mut lr = 0.0;
        let mut ls = 0.0;
        let mut lm = ln_n_fact;
        for (j, &c) in parts.iter().enumerate() {
            lr += c as f64 * ln_rho[j];
            ls += c as f64 * ln_sigma[j];
            lm -= ln_factorial(c);
        }
        raw.push((lr, ls, lm));
    });
    PairedSpectrum::from_ln_mult_entries(raw)
}

impl PairedSequence {
    pub fn from_fn<F>(n_range: Vec<u32>, f: F) -> Result<Self>
    where
        F: Fn(u32) -> Result<PairedSpectrum> + Send + Sync + 'static,
    {
        if n_range.is_empty() || n_range.iter().any(|&n| n == 0) {
            return Err(Error::InvalidInput("n range must be nonempty with n ≥ 1".into()));
        }
        Ok(PairedSequence {
            generator: Arc::new(f),
            n_range,
        })
    }

    /// `(ρ^{⊗n}, σ^{⊗n})` for atomwise diagonal `ρ` and `σ`.
    pub fn iid(rho: Vec<f64>, sigma: Vec<f64>, n_range: Vec<u32>) -> Result<Self> {
        iid_pair(&rho, &sigma, 1)?;
        PairedSequence::from_fn(n_range, move |n| iid_pair(&rho, &sigma, n))
    }

    /// `(ρ^{⊗n}, f(ρ^{⊗n}))` where the pairing acts levelwise on log values.
    pub fn iid_levelwise<F>(base: WeightedSpectrum, n_range: Vec<u32>, pairing: F) -> Result<Self>
    where
        F: Fn(&WeightedSpectrum) -> PairedSpectrum + Send + Sync + 'static,
    {
        PairedSequence::from_fn(n_range, move |n| Ok(pairing(&crate::spectra::iid_product(&base, n)?)))
    }

    pub fn n_range(&self) -> &[u32] {
        &self.n_range
    }

    pub fn pair(&self, n: u32) -> Result<PairedSpectrum> {
        (self.generator)(n)
    }
}

/// Regression estimates of `ζ̲`, `ζ̲ᶜ`, `η̲` at one `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitEstimates {
    pub a: f64,
    pub zeta: Extended,
    pub zeta_c: Extended,
    pub eta: Extended,
}

/// Infinite when the largest `n` gives `∞`; otherwise the slope fitted over
/// the finite values, or the last finite value when fewer than three exist.
fn limit_of(values: &[(u32, Extended)]) -> Extended {
    match values.last() {
        None | Some((_, Extended::Infinite)) => Extended::Infinite,
        Some(&(_, last)) => {
            let finite: Vec<(u32, Extended)> = values.iter().copied().filter(|(_, v)| v.is_finite()).collect();
            match fit_rate(&finite) {
                Ok(est) => Extended::Finite(est.slope),
                Err(_) => last,
            }
        }
    }
}

/// One inequality instance and how far inside (positive) or outside
/// (negative) it landed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AppendixCheck {
    pub name: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    pub a: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    pub margin: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AppendixReport {
    pub checks: Vec<AppendixCheck>,
    pub estimates: Vec<LimitEstimates>,
    pub passed: bool,
}

impl AppendixReport {
    pub fn failures(&self) -> impl Iterator<Item = &AppendixCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn count(&self, name: &str) -> usize {
        self.checks.iter().filter(|c| c.name == name).count()
    }
}

/// `x - y` on extended reals, with `∞ - ∞` read as `+∞` (both sides vacuous).
fn diff(x: Extended, y: Extended) -> f64 {
    match (x, y) {
        (Extended::Infinite, _) => f64::INFINITY,
        (Extended::Finite(_), Extended::Infinite) => f64::NEG_INFINITY,
        (Extended::Finite(u), Extended::Finite(v)) => u - v,
    }
}

fn check(name: &'static str, n: Option<u32>, a: f64, b: Option<f64>, margin: f64, slack: f64) -> AppendixCheck {
    AppendixCheck {
        name,
        n,
        a,
        b,
        margin,
        passed: margin >= -slack,
    }
}

/// Runs every relation on the given grids.
///
/// * `le31`: `ζᶜ_n(a) ≤ η_n(a) + a` at each `n` and `a`, zero slack.
/// * `le17`: `min{ζ(a), a+η(a)} ≥ min{ζ(b), a+η(b)}` for `a` in `a_grid`,
///   `b` in `b_grid`.
/// * `l9`: when some grid `a₀` has `ζ(a₀) ≤ ζᶜ(a₀)`,
///   `η(a) ≥ inf{ζ(a') - a' | a' ≤ a}`.
/// * `l61`: `sup{a - ζ(a) | ζ(a) ≤ r} ≥ sup{-η(a) | a + η(a) ≤ r}` for each
///   `r` in `b_grid`.
/// * `l10`: `η(a) ≤ inf{ζ(a') - a' | a' ∈ I, a' ≤ a}` with `I` the grid
///   points where `ζ` strictly increases from the previous point.
///
/// Sups and infs range over the grid points only.
pub fn appendix_a_suite(seq: &PairedSequence, a_grid: &[f64], b_grid: &[f64], slack: f64) -> Result<AppendixReport> {
    if a_grid.is_empty() {
        return Err(Error::InvalidInput("a grid must not be empty".into()));
    }
    let mut points: Vec<f64> = a_grid.iter().chain(b_grid).copied().collect();
    points.sort_by(|x, y| x.partial_cmp(y).unwrap());
    points.dedup();

    let mut per_n: Vec<(u32, Vec<PairedQuantities>)> = Vec::with_capacity(seq.n_range().len());
    for &n in seq.n_range() {
        let pair = seq.pair(n)?;
        per_n.push((n, points.iter().map(|&a| pair.quantities(n, a)).collect()));
    }

    let mut checks = Vec::new();
    for (n, qs) in &per_n {
        for (&a, q) in points.iter().zip(qs) {
            if a_grid.contains(&a) {
                checks.push(check("le31", Some(*n), a, None, q.le31_margin.to_f64(), 0.0));
            }
        }
    }

    let estimates: Vec<LimitEstimates> = points
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            let series = |f: fn(&PairedQuantities) -> Extended| -> Vec<(u32, Extended)> {
                per_n.iter().map(|(n, qs)| (*n, f(&qs[i]))).collect()
            };
            LimitEstimates {
                a,
                zeta: limit_of(&series(|q| q.zeta)),
                zeta_c: limit_of(&series(|q| q.zeta_c)),
                eta: limit_of(&series(|q| q.eta)),
            }
        })
        .collect();
    let at = |a: f64| estimates.iter().find(|e| e.a == a).copied().unwrap();
    let on_a: Vec<LimitEstimates> = a_grid.iter().map(|&a| at(a)).collect();

    for &a in a_grid {
        let ea = at(a);
        let lhs = ea.zeta.min(ea.eta.add(a));
        for &b in b_grid {
            let eb = at(b);
            let rhs = eb.zeta.min(eb.eta.add(a));
            checks.push(check("le17", None, a, Some(b), diff(lhs, rhs), slack));
        }
    }

    if on_a.iter().any(|e| e.zeta <= e.zeta_c) {
        for e in &on_a {
            let bound = on_a
                .iter()
                .filter(|p| p.a <= e.a)
                .map(|p| p.zeta.add(-p.a))
                .fold(Extended::Infinite, Extended::min);
            checks.push(check("l9", None, e.a, None, diff(e.eta, bound), slack));
        }
    }

    for &r in b_grid {
        let lhs = on_a
            .iter()
            .filter(|e| e.zeta <= Extended::Finite(r))
            .filter_map(|e| e.zeta.finite().map(|z| e.a - z))
            .fold(f64::NEG_INFINITY, f64::max);
        let rhs = on_a
            .iter()
            .filter(|e| e.eta.add(e.a) <= Extended::Finite(r))
            .filter_map(|e| e.eta.finite().map(|h| -h))
            .fold(f64::NEG_INFINITY, f64::max);
        if rhs > f64::NEG_INFINITY {
            checks.push(check("l61", None, r, None, lhs - rhs, slack));
        }
    }

    let increasing: Vec<&LimitEstimates> = on_a
        .windows(2)
        .filter(|w| w[1].zeta > w[0].zeta)
        .map(|w| &w[1])
        .collect();
    for e in &on_a {
        let bound = increasing
            .iter()
            .filter(|p| p.a <= e.a)
            .map(|p| p.zeta.add(-p.a))
            .fold(Extended::Infinite, Extended::min);
        if bound.is_finite() {
            checks.push(check("l10", None, e.a, None, diff(bound, e.eta), slack));
        }
    }

    let passed = checks.iter().all(|c| c.passed);
    Ok(AppendixReport {
        checks,
        estimates: on_a,
        passed,
    })
}
