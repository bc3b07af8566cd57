//! Asymptotic rates and exponents from a Rényi profile
//! `ψ̄(s) = lim (1/n) ln Tr ρ_n^s`, plus the grid versions of the general
//! sup/inf formulas that take sampled information-spectrum curves.
//!
//! Every one-dimensional optimization here reduces to the numerator
//! `N(s) = ψ̄'(s)(1 - s) + r + ψ̄(s)`, which is monotone on each side of
//! `s = 1` because `ψ̄` is convex, so plain bisection finds the optimum.

use crate::error::{Error, Result};
use crate::info_spectrum::{Quantity, RateCurve};
use crate::numeric::{bisect, central_difference, log_sum_exp, Extended};
use crate::spectra::WeightedSpectrum;
use serde::Serialize;

/// Offset used for one-sided derivatives at `s = 1`.
pub const ONE_SIDED_STEP: f64 = 1e-6;
/// Bisection tolerance in `s`.
const S_TOL: f64 = 1e-13;
/// Largest `s` searched before a supremum is taken as its limit.
const S_CAP: f64 = 1e6;

/// A limiting Rényi profile `s ↦ ψ̄(s)` on `s ≥ 0`.
pub trait RenyiProfile: Send + Sync {
    fn psi(&self, s: f64) -> f64;

    fn dpsi(&self, s: f64) -> f64 {
        central_difference(|x| self.psi(x), s, 1e-5)
    }

    fn d2psi(&self, s: f64) -> f64 {
        let h = 1e-5;
        (self.psi(s + h) - 2.0 * self.psi(s) + self.psi(s - h)) / (h * h)
    }

    /// Largest `s` at which the profile may be evaluated.
    fn s_max(&self) -> f64 {
        f64::INFINITY
    }

    /// `H̄_∞ = lim_{s→∞} -ψ̄(s)/s` when known in closed form.
    fn h_inf(&self) -> Option<f64> {
        None
    }
}

impl<P: RenyiProfile + ?Sized> RenyiProfile for &P {
    fn psi(&self, s: f64) -> f64 {
        (**self).psi(s)
    }
    fn dpsi(&self, s: f64) -> f64 {
        (**self).dpsi(s)
    }
    fn d2psi(&self, s: f64) -> f64 {
        (**self).d2psi(s)
    }
    fn s_max(&self) -> f64 {
        (**self).s_max()
    }
    fn h_inf(&self) -> Option<f64> {
        (**self).h_inf()
    }
}

/// `ψ̄(s) = ln Σ m v^s` of a single-copy spectrum, with analytic
/// derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumProfile {
    /// `(ln m, ln v)` per level
    terms: Vec<(f64, f64)>,
    ln_max: f64,
}

impl SpectrumProfile {
    pub fn new(base: &WeightedSpectrum) -> Self {
        SpectrumProfile {
            terms: base
                .levels()
                .iter()
                .map(|l| (l.ln_multiplicity(), l.ln_value()))
                .collect(),
            ln_max: base.levels()[0].ln_value(),
        }
    }

    /// Softmax weights of `ln m + s ln v`.
    fn weights(&self, s: f64) -> Vec<f64> {
        let ln_z = log_sum_exp(self.terms.iter().map(|(lm, lv)| lm + s * lv));
        self.terms.iter().map(|(lm, lv)| (lm + s * lv - ln_z).exp()).collect()
    }
}

pub fn profile_from_spectrum(base: &WeightedSpectrum) -> SpectrumProfile {
    SpectrumProfile::new(base)
}

impl RenyiProfile for SpectrumProfile {
    fn psi(&self, s: f64) -> f64 {
        if s == 1.0 {
            return 0.0;
        }
        log_sum_exp(self.terms.iter().map(|(lm, lv)| lm + s * lv))
    }

    fn dpsi(&self, s: f64) -> f64 {
        self.weights(s).iter().zip(&self.terms).map(|(w, (_, lv))| w * lv).sum()
    }

    fn d2psi(&self, s: f64) -> f64 {
        let w = self.weights(s);
        let mean: f64 = w.iter().zip(&self.terms).map(|(w, (_, lv))| w * lv).sum();
        w.iter()
            .zip(&self.terms)
            .map(|(w, (_, lv))| w * (lv - mean) * (lv - mean))
            .sum::<f64>()
            .max(0.0)
    }

    fn h_inf(&self) -> Option<f64> {
        Some(-self.ln_max)
    }
}

/// `H̄_∞`, from the closed form when available, else `-ψ̄'` at the largest
/// admissible `s`.
pub fn h_infinity<P: RenyiProfile + ?Sized>(p: &P) -> f64 {
    p.h_inf().unwrap_or_else(|| -p.dpsi(p.s_max().min(S_CAP)))
}

/// `(H̄₋, H̄₊) = (-ψ̄'(1+δ), -ψ̄'(1-δ))`.
pub fn rate_constant<P: RenyiProfile + ?Sized>(p: &P) -> (f64, f64) {
    (-p.dpsi(1.0 + ONE_SIDED_STEP), -p.dpsi(1.0 - ONE_SIDED_STEP))
}

/// `-ψ̄'(0) - ψ̄(0)`, the value of `ζ` at the right end of its domain.
pub fn zeta_boundary<P: RenyiProfile + ?Sized>(p: &P) -> f64 {
    -p.dpsi(0.0) - p.psi(0.0)
}

/// A value of `ζ(a)` together with whether `a` lay beyond `-ψ̄'(0)`, where
/// the constant boundary value is reported.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZetaValue {
    pub value: f64,
    pub clamped: bool,
}

/// Solves `-ψ̄'(s) = a` on `[lo, hi]`, where `-ψ̄'` is nonincreasing.
fn stationary_point<P: RenyiProfile + ?Sized>(p: &P, a: f64, lo: f64, hi: f64) -> f64 {
    bisect(|s| -p.dpsi(s) - a, lo, hi, S_TOL)
}

/// `ζ(a) = sup_{0≤s≤1} (1-s)a - ψ̄(s)`: zero for `a ≤ H̄₊`, clamped to
/// `-ψ̄'(0) - ψ̄(0)` for `a ≥ -ψ̄'(0)`.
pub fn zeta_asymptotic<P: RenyiProfile + ?Sized>(p: &P, a: f64) -> ZetaValue {
    let h_plus = -p.dpsi(1.0);
    let edge = -p.dpsi(0.0);
    if a <= h_plus {
        return ZetaValue {
            value: 0.0,
            clamped: false,
        };
    }
    if a >= edge {
        return ZetaValue {
            value: edge - p.psi(0.0),
            clamped: a > edge,
        };
    }
    let s = stationary_point(p, a, 0.0, 1.0);
    let value = ((1.0 - s) * a - p.psi(s)).max(0.0);
    ZetaValue { value, clamped: false }
}

/// `ζᶜ(a) = sup_{s≥1} (1-s)a - ψ̄(s)`: zero for `a ≥ H̄₋`, `+∞` for
/// `a < H̄_∞`.
pub fn zeta_c_asymptotic<P: RenyiProfile + ?Sized>(p: &P, a: f64) -> Extended {
    let h_minus = -p.dpsi(1.0);
    if a >= h_minus {
        return Extended::Finite(0.0);
    }
    if a < h_infinity(p) {
        return Extended::Infinite;
    }
    let cap = p.s_max().min(S_CAP);
    let mut hi = 2.0f64.min(cap);
    while -p.dpsi(hi) > a && hi < cap {
        hi = (hi * 2.0).min(cap);
    }
    let s = if -p.dpsi(hi) > a {
        hi
    } else {
        stationary_point(p, a, 1.0, hi)
    };
    Extended::Finite(((1.0 - s) * a - p.psi(s)).max(0.0))
}

fn nonnegative_rate(r: f64) -> Result<()> {
    if !(r >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "r",
            value: r,
            reason: "must be nonnegative",
        });
    }
    Ok(())
}

/// `N(s) = ψ̄'(s)(1 - s) + r + ψ̄(s)`.
fn numerator<P: RenyiProfile + ?Sized>(p: &P, r: f64, s: f64) -> f64 {
    p.dpsi(s) * (1.0 - s) + r + p.psi(s)
}

/// `B_e(r) = sup_{s>1} (r + ψ̄(s))/(1 - s)`, equal to `H̄_∞` once `r ≥ H̄_∞`.
pub fn rate_failure_exponent<P: RenyiProfile + ?Sized>(p: &P, r: f64) -> Result<f64> {
    nonnegative_rate(r)?;
    let h_inf = h_infinity(p);
    if r >= h_inf {
        return Ok(h_inf);
    }
    if r == 0.0 {
        return Ok(-p.dpsi(1.0 + ONE_SIDED_STEP));
    }
    // N decreases on s > 1 from N(1) = r > 0; f₁ peaks where N = 0
    let cap = p.s_max().min(S_CAP);
    let mut hi = 2.0f64.min(cap);
    while numerator(p, r, hi) > 0.0 && hi < cap {
        hi = (hi * 2.0).min(cap);
    }
    if numerator(p, r, hi) > 0.0 {
        return Ok(h_inf);
    }
    let s = bisect(|s| numerator(p, r, s), 1.0, hi, S_TOL);
    if (s - 1.0).abs() < 1e-7 {
        return Ok(-p.dpsi(1.0 + ONE_SIDED_STEP));
    }
    Ok(-p.dpsi(s))
}

/// `B*_{e,P}(r) = min_{0≤s≤1} (sr + ψ̄(s))/(1 - s)`, equal to `ψ̄(0)` once
/// `r ≥ -ψ̄'(0) - ψ̄(0)`.
pub fn rate_success_exponent_pflec<P: RenyiProfile + ?Sized>(p: &P, r: f64) -> Result<f64> {
    nonnegative_rate(r)?;
    if r >= zeta_boundary(p) {
        return Ok(p.psi(0.0));
    }
    // N increases on (0, 1) from N(0) < 0 to N(1) = r; at its root
    // f₂ = -ψ̄'(s) - r
    let s = bisect(|s| numerator(p, r, s), 0.0, 1.0, S_TOL);
    if (1.0 - s).abs() < 1e-7 {
        return Ok(-p.dpsi(1.0 - ONE_SIDED_STEP) - r);
    }
    Ok(-p.dpsi(s) - r)
}

/// `r* = -ψ̄'(1/2)/2 - ψ̄(1/2)`.
pub fn dflec_regime_boundary<P: RenyiProfile + ?Sized>(p: &P) -> f64 {
    -0.5 * p.dpsi(0.5) - p.psi(0.5)
}

/// `B*_{e,D}(r)`: the probabilistic exponent up to `r*`, `2ψ̄(1/2) + r`
/// beyond.
pub fn rate_success_exponent_dflec<P: RenyiProfile + ?Sized>(p: &P, r: f64) -> Result<f64> {
    nonnegative_rate(r)?;
    if r <= dflec_regime_boundary(p) {
        rate_success_exponent_pflec(p, r)
    } else {
        Ok(2.0 * p.psi(0.5) + r)
    }
}

/// The four rates and the relevant thresholds of one profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateSummary {
    pub h_minus: f64,
    pub h_plus: f64,
    pub h_infinity: f64,
    pub zeta_boundary: f64,
    pub r_star: f64,
}

pub fn rate_summary<P: RenyiProfile + ?Sized>(p: &P) -> RateSummary {
    let (h_minus, h_plus) = rate_constant(p);
    RateSummary {
        h_minus,
        h_plus,
        h_infinity: h_infinity(p),
        zeta_boundary: zeta_boundary(p),
        r_star: dflec_regime_boundary(p),
    }
}

/// `ζ` sampled on the part of `grid` inside `a ≤ -ψ̄'(0)`.
pub fn zeta_curve<P: RenyiProfile + ?Sized>(p: &P, grid: &[f64]) -> Result<RateCurve> {
    let edge = -p.dpsi(0.0);
    let inside: Vec<f64> = grid.iter().copied().filter(|&a| a <= edge).collect();
    RateCurve::from_fn(Quantity::Zeta, &inside, |a| Extended::Finite(zeta_asymptotic(p, a).value))
}

/// `ζᶜ` sampled on `grid`.
pub fn zeta_c_curve<P: RenyiProfile + ?Sized>(p: &P, grid: &[f64]) -> Result<RateCurve> {
    RateCurve::from_fn(Quantity::ZetaC, grid, |a| zeta_c_asymptotic(p, a))
}

/// Which general formula [`theorem1_rates`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Theorem1Formula {
    /// `sup{R | K(R) ≤ ε}`
    Constant,
    /// `sup{R | ζᶜ(R) ≥ r}`
    FailureExponent,
    /// `sup{a - ζ(a) | ζ(a) ≤ r}`
    SuccessPflec,
    /// `sup{a - r | inf_{a'≤a}(ζ(a') - a'/2) + a/2 ≤ r}`
    SuccessDflec,
}

fn empty(what: &str) -> Error {
    Error::EmptyFeasibleSet(format!("no grid point satisfies the {what} constraint"))
}

/// Linear interpolation of the abscissa where the segment from
/// `(x0, y0)` to `(x1, y1)` reaches `level`.
fn crossing(x0: f64, y0: f64, x1: f64, y1: f64, level: f64) -> f64 {
    if y1 == y0 {
        x0
    } else {
        x0 + (level - y0) * (x1 - x0) / (y1 - y0)
    }
}

/// `sup{R | K(R) ≤ ε}` on a sampled nondecreasing `K`.
pub fn constant_rate_from_curve(k: &RateCurve, eps: f64) -> Result<f64> {
    let pts = &k.points;
    let first_bad = pts.iter().position(|(_, v)| v.to_f64() > eps);
    match first_bad {
        _ if pts.is_empty() => Err(empty("K ≤ ε")),
        Some(0) => Err(empty("K ≤ ε")),
        None => Ok(pts[pts.len() - 1].0),
        Some(i) => {
            let (x0, y0) = (pts[i - 1].0, pts[i - 1].1.to_f64());
            let (x1, y1) = (pts[i].0, pts[i].1.to_f64());
            Ok(crossing(x0, y0, x1, y1, eps))
        }
    }
}

/// `sup{R | ζᶜ(R) ≥ r}` on a sampled nonincreasing `ζᶜ`.
pub fn failure_exponent_from_curve(zeta_c: &RateCurve, r: f64) -> Result<f64> {
    let pts = &zeta_c.points;
    let first_bad = pts.iter().position(|(_, v)| *v < Extended::Finite(r));
    match first_bad {
        _ if pts.is_empty() => Err(empty("ζᶜ ≥ r")),
        Some(0) => Err(empty("ζᶜ ≥ r")),
        None => Ok(pts[pts.len() - 1].0),
        Some(i) => {
            let (x1, y1) = (pts[i].0, pts[i].1.to_f64());
            match pts[i - 1].1 {
                Extended::Infinite => Ok(x1),
                Extended::Finite(y0) => Ok(crossing(pts[i - 1].0, y0, x1, y1, r)),
            }
        }
    }
}

/// `sup{a - ζ(a) | ζ(a) ≤ r}` (or `< r` when `strict`) on a sampled `ζ`.
///
/// Grid points in the feasible set are scored directly. Each step from a
/// feasible point to an infeasible finite one adds the interpolated point
/// where `ζ` reaches `r`; with a strict constraint that point is the
/// supremum of the open set, not a member of it.
pub fn success_exponent_from_curve(zeta: &RateCurve, r: f64, strict: bool) -> Result<f64> {
    let pts = &zeta.points;
    let feasible = |v: Extended| match v {
        Extended::Infinite => false,
        Extended::Finite(z) => {
            if strict {
                z < r
            } else {
                z <= r
            }
        }
    };
    let mut best = f64::NEG_INFINITY;
    for (i, &(a, v)) in pts.iter().enumerate() {
        if !feasible(v) {
            continue;
        }
        best = best.max(a - v.to_f64());
        if let Some(&(a1, Extended::Finite(z1))) = pts.get(i + 1) {
            if !feasible(Extended::Finite(z1)) {
                let ac = crossing(a, v.to_f64(), a1, z1, r);
                best = best.max(ac - r);
            }
        }
    }
    if best == f64::NEG_INFINITY {
        return Err(empty(if strict { "ζ < r" } else { "ζ ≤ r" }));
    }
    Ok(best)
}

/// `B*_{e,D}(r)` from a sampled `ζ`: the running infimum
/// `m(a) = inf_{a'≤a} ζ(a') - a'/2` makes `g(a) = m(a) + a/2`
/// nondecreasing, and the answer is `a* - r` at the last `a` with
/// `g(a) ≤ r`. Past the grid `m` is held at its last value.
pub fn dflec_success_exponent_from_curve(zeta: &RateCurve, r: f64) -> Result<f64> {
    let pts = &zeta.points;
    let mut m = f64::INFINITY;
    let mut prev: Option<(f64, f64)> = None;
    for &(a, v) in pts {
        if let Extended::Finite(z) = v {
            m = m.min(z - a / 2.0);
        }
        let g = m + a / 2.0;
        if g > r {
            return match prev {
                None => Err(empty("inf(ζ - a/2) + a/2 ≤ r")),
                Some((a0, g0)) => {
                    let a_star = if g.is_finite() { crossing(a0, g0, a, g, r) } else { a0 };
                    Ok(a_star - r)
                }
            };
        }
        prev = Some((a, g));
    }
    if !m.is_finite() {
        return Err(empty("inf(ζ - a/2) + a/2 ≤ r"));
    }
    Ok(2.0 * (r - m) - r)
}

/// Evaluates one of the general formulas on sampled curves. `x` is `ε` for
/// [`Theorem1Formula::Constant`] and `r` otherwise.
pub fn theorem1_rates(
    curve_k: Option<&RateCurve>,
    curve_zeta: Option<&RateCurve>,
    curve_zeta_c: Option<&RateCurve>,
    x: f64,
    which: Theorem1Formula,
) -> Result<f64> {
    let need = |c: Option<&RateCurve>, name: &str| -> Result<RateCurve> {
        c.cloned().ok_or_else(|| Error::InvalidInput(format!("the {name} curve is required")))
    };
    match which {
        Theorem1Formula::Constant => constant_rate_from_curve(&need(curve_k, "K")?, x),
        Theorem1Formula::FailureExponent => failure_exponent_from_curve(&need(curve_zeta_c, "zeta_c")?, x),
        Theorem1Formula::SuccessPflec => success_exponent_from_curve(&need(curve_zeta, "zeta")?, x, false),
        Theorem1Formula::SuccessDflec => dflec_success_exponent_from_curve(&need(curve_zeta, "zeta")?, x),
    }
}
