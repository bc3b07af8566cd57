//! Finite-n information-spectrum quantities on the threshold projections
//! `S_n(a) = {ρ_n < e^{-na}}`, their evaluation along a sequence of
//! spectra, and least-squares estimates of the limiting exponents.
//!
//! Thresholds are compared in log domain (`ln v` against `-n a`) so that
//! nothing underflows for large `n`.

mod appendix;
mod paired;

pub use appendix::{appendix_a_suite, iid_pair, AppendixCheck, AppendixReport, LimitEstimates, PairedSequence};
pub use paired::{PairedQuantities, PairedSpectrum};

use crate::error::{Error, Result};
use crate::numeric::{log_sum_exp, Extended};
use crate::spectra::{iid_product, WeightedSpectrum};
use serde::Serialize;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

/// Which finite-n quantity a curve or estimate refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Quantity {
    #[serde(rename = "K")]
    K,
    #[serde(rename = "zeta")]
    Zeta,
    #[serde(rename = "zeta_c")]
    ZetaC,
    #[serde(rename = "eta")]
    Eta,
    #[serde(rename = "zeta_half")]
    ZetaHalf,
    #[serde(rename = "zeta_c_half")]
    ZetaCHalf,
}

impl Quantity {
    pub const ALL: [Quantity; 6] = [
        Quantity::K,
        Quantity::Zeta,
        Quantity::ZetaC,
        Quantity::Eta,
        Quantity::ZetaHalf,
        Quantity::ZetaCHalf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::K => "K",
            Quantity::Zeta => "zeta",
            Quantity::ZetaC => "zeta_c",
            Quantity::Eta => "eta",
            Quantity::ZetaHalf => "zeta_half",
            Quantity::ZetaCHalf => "zeta_c_half",
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Quantity::ALL
            .into_iter()
            .find(|q| q.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidInput(format!("unknown quantity '{s}'")))
    }
}

/// `K_n(a) = Tr ρ_n {ρ_n ≥ e^{-na}}`.
pub fn k_n(sp: &WeightedSpectrum, n: u32, a: f64) -> f64 {
    let cut = -(n as f64) * a;
    let ln_k = log_sum_exp(sp.levels().iter().filter(|l| l.ln_value() >= cut).map(|l| l.ln_mass()));
    ln_k.exp().min(1.0)
}

/// The five exponents on `S_n(a)` with `σ_n = ρ_n` and `σ_n = √ρ_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiniteQuantities {
    /// `-(1/n) ln Tr ρ_n S_n(a)`
    pub zeta_n: Extended,
    /// `-(1/n) ln Tr ρ_n (I - S_n(a))`
    pub zeta_c_n: Extended,
    /// `-(1/n) ln Tr (I - S_n(a))`
    pub eta_n: Extended,
    /// `-(1/n) ln Tr √ρ_n S_n(a)`
    pub zeta_half_n: Extended,
    /// `-(1/n) ln Tr √ρ_n (I - S_n(a))`
    pub zeta_c_half_n: Extended,
}

pub fn finite_quantities(sp: &WeightedSpectrum, n: u32, a: f64) -> FiniteQuantities {
    let nf = n as f64;
    let cut = -nf * a;
    let (above, below): (Vec<_>, Vec<_>) = sp.levels().iter().partition(|l| l.ln_value() >= cut);
    let mass = |ls: &[&crate::spectra::Level]| log_sum_exp(ls.iter().map(|l| l.ln_mass()));
    let root = |ls: &[&crate::spectra::Level]| log_sum_exp(ls.iter().map(|l| l.ln_multiplicity() + 0.5 * l.ln_value()));
    let count = |ls: &[&crate::spectra::Level]| log_sum_exp(ls.iter().map(|l| l.ln_multiplicity()));
    FiniteQuantities {
        zeta_n: Extended::neg_log_rate(mass(&below), nf),
        zeta_c_n: Extended::neg_log_rate(mass(&above), nf),
        eta_n: Extended::neg_log_rate(count(&above), nf),
        zeta_half_n: Extended::neg_log_rate(root(&below), nf),
        zeta_c_half_n: Extended::neg_log_rate(root(&above), nf),
    }
}

/// One labelled quantity at `(n, a)`; `K` is reported as a finite value.
pub fn quantity_n(sp: &WeightedSpectrum, n: u32, a: f64, q: Quantity) -> Extended {
    if q == Quantity::K {
        return Extended::Finite(k_n(sp, n, a));
    }
    let f = finite_quantities(sp, n, a);
    match q {
        Quantity::Zeta => f.zeta_n,
        Quantity::ZetaC => f.zeta_c_n,
        Quantity::Eta => f.eta_n,
        Quantity::ZetaHalf => f.zeta_half_n,
        Quantity::ZetaCHalf => f.zeta_c_half_n,
        Quantity::K => unreachable!(),
    }
}

/// A sampled curve `a ↦ value` with strictly increasing `a`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateCurve {
    pub label: Quantity,
    pub points: Vec<(f64, Extended)>,
}

impl RateCurve {
    pub fn new(label: Quantity, points: Vec<(f64, Extended)>) -> Result<Self> {
        if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::InvalidInput("curve abscissae must be strictly increasing".into()));
        }
        Ok(RateCurve { label, points })
    }

    pub fn from_fn<F: Fn(f64) -> Extended>(label: Quantity, grid: &[f64], f: F) -> Result<Self> {
        RateCurve::new(label, grid.iter().map(|&a| (a, f(a))).collect())
    }
}

/// The finite-n curve of one quantity over a grid of `a`.
pub fn rate_curve(sp: &WeightedSpectrum, n: u32, grid: &[f64], q: Quantity) -> Result<RateCurve> {
    RateCurve::from_fn(q, grid, |a| quantity_n(sp, n, a, q))
}

type Generator = dyn Fn(u32) -> Result<WeightedSpectrum> + Send + Sync;

/// A family `n ↦ ρ_n` evaluated on a fixed list of `n`.
#[derive(Clone)]
pub struct SpectrumSequence {
    generator: Arc<Generator>,
    n_range: Vec<u32>,
}

impl fmt::Debug for SpectrumSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectrumSequence").field("n_range", &self.n_range).finish()
    }
}

impl SpectrumSequence {
    pub fn from_fn<F>(n_range: Vec<u32>, f: F) -> Result<Self>
    where
        F: Fn(u32) -> Result<WeightedSpectrum> + Send + Sync + 'static,
    {
        if n_range.iter().any(|&n| n == 0) {
            return Err(Error::InvalidInput("n must be at least 1".into()));
        }
        Ok(SpectrumSequence {
            generator: Arc::new(f),
            n_range,
        })
    }

    /// `ρ_n = base^{⊗n}`.
    pub fn iid(base: WeightedSpectrum, n_range: Vec<u32>) -> Result<Self> {
        SpectrumSequence::from_fn(n_range, move |n| iid_product(&base, n))
    }

    /// A user-supplied list of `(n, ρ_n)`.
    pub fn from_list(items: Vec<(u32, WeightedSpectrum)>) -> Result<Self> {
        let n_range = items.iter().map(|(n, _)| *n).collect();
        SpectrumSequence::from_fn(n_range, move |n| {
            items
                .iter()
                .find(|(m, _)| *m == n)
                .map(|(_, sp)| sp.clone())
                .ok_or_else(|| Error::InvalidInput(format!("no spectrum for n = {n}")))
        })
    }

    pub fn n_range(&self) -> &[u32] {
        &self.n_range
    }

    pub fn spectrum(&self, n: u32) -> Result<WeightedSpectrum> {
        (self.generator)(n)
    }

    /// Evaluates `f(n, ρ_n)` for every `n` in order.
    pub fn map<T, F: Fn(u32, &WeightedSpectrum) -> T>(&self, f: F) -> Result<Vec<(u32, T)>> {
        self.n_range
            .iter()
            .map(|&n| Ok((n, f(n, &self.spectrum(n)?))))
            .collect()
    }
}

/// Least-squares estimate of `lim q_n` from the slope of `n·q_n` against `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateEstimate {
    pub slope: f64,
    pub intercept: f64,
    /// `max_n |n·q_n - fit(n)| / n`
    pub residual: f64,
}

/// Fits `n·q_n ≈ intercept + slope·n` over the given points.
pub fn fit_rate(points: &[(u32, Extended)]) -> Result<RateEstimate> {
    if points.len() < 3 {
        return Err(Error::InvalidInput("at least 3 values of n are needed".into()));
    }
    let mut xy = Vec::with_capacity(points.len());
    for &(n, q) in points {
        match q {
            Extended::Finite(v) => xy.push((n as f64, n as f64 * v)),
            Extended::Infinite => return Err(Error::InfiniteQuantity { n }),
        }
    }
    let len = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / len;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / len;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("n values must not all coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = xy
        .iter()
        .map(|&(x, y)| (y - intercept - slope * x).abs() / x)
        .fold(0.0, f64::max);
    Ok(RateEstimate {
        slope,
        intercept,
        residual,
    })
}

/// Estimates the limit of a labelled quantity at fixed `a` along `seq`.
pub fn empirical_rate(seq: &SpectrumSequence, quantity: Quantity, a: f64) -> Result<RateEstimate> {
    let values = seq.map(|n, sp| quantity_n(sp, n, a, quantity))?;
    fit_rate(&values)
}

/// Smallest `R = -(1/n) ln v` at which the mass of `{ρ_n ≥ e^{-nR}}` first
/// exceeds `ln_bound` (given in log form); `None` when it never does.
fn first_crossing(sp: &WeightedSpectrum, n: u32, ln_bound: f64) -> Option<f64> {
    let mut ln_cum = f64::NEG_INFINITY;
    for level in sp.levels() {
        ln_cum = log_sum_exp([ln_cum, level.ln_mass()]);
        if ln_cum > ln_bound {
            return Some(-level.ln_value() / n as f64);
        }
    }
    None
}

/// Finite-n optimal rate `sup { R | K_n(R) ≤ ε }`.
pub fn finite_constant_rate(sp: &WeightedSpectrum, n: u32, eps: f64) -> Result<Extended> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidParameter {
            name: "eps",
            value: eps,
            reason: "must lie in [0, 1)",
        });
    }
    Ok(first_crossing(sp, n, eps.ln()).map_or(Extended::Infinite, Extended::Finite))
}

/// Finite-n failure-exponent rate `sup { R | ζᶜ_n(R) ≥ r }`.
pub fn finite_failure_rate(sp: &WeightedSpectrum, n: u32, r: f64) -> Result<Extended> {
    if !(r >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "r",
            value: r,
            reason: "must be nonnegative",
        });
    }
    if r == 0.0 {
        return Ok(Extended::Infinite);
    }
    Ok(first_crossing(sp, n, -(n as f64) * r).map_or(Extended::Infinite, Extended::Finite))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> WeightedSpectrum {
        WeightedSpectrum::from_values(&[0.75, 0.25]).unwrap()
    }

    #[test]
    fn k_n_examples() {
        let u = WeightedSpectrum::uniform(5).unwrap();
        let ln5 = 5f64.ln();
        assert!((k_n(&u, 1, ln5 + 0.01) - 1.0).abs() < 1e-15);
        assert_eq!(k_n(&u, 1, ln5 - 0.01), 0.0);
        let sp2 = iid_product(&base(), 2).unwrap();
        assert!((k_n(&sp2, 2, 0.5) - 0.5625).abs() < 1e-15);
    }

    #[test]
    fn finite_quantity_examples() {
        let d = 6u64;
        let u = WeightedSpectrum::uniform(d).unwrap();
        let f = finite_quantities(&u, 1, (d as f64).ln() + 0.1);
        assert_eq!(f.zeta_c_n, Extended::Finite(0.0));
        assert!((f.eta_n.to_f64() + (d as f64).ln()).abs() < 1e-14);
        assert_eq!(f.zeta_n, Extended::Infinite);

        let point = WeightedSpectrum::point_mass();
        let f = finite_quantities(&point, 3, 0.4);
        assert_eq!(f.zeta_c_n, Extended::Finite(0.0));
        assert_eq!(f.zeta_n, Extended::Infinite);

        let sp2 = iid_product(&base(), 2).unwrap();
        let f = finite_quantities(&sp2, 2, 0.5);
        assert!((f.zeta_c_n.to_f64() - 0.287_682_072_451_780_9).abs() < 1e-14);
    }

    #[test]
    fn complement_identity() {
        let sp = iid_product(&base(), 30).unwrap();
        for i in 0..40 {
            let a = 0.05 * i as f64;
            let f = finite_quantities(&sp, 30, a);
            let lhs = 1.0 - k_n(&sp, 30, a);
            let rhs = (-30.0 * f.zeta_n.to_f64()).exp();
            assert!((lhs - rhs).abs() < 1e-12, "a={a}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn empirical_rate_examples() {
        let u = WeightedSpectrum::uniform(3).unwrap();
        let seq = SpectrumSequence::iid(u, vec![10, 20, 30, 40]).unwrap();
        let est = empirical_rate(&seq, Quantity::ZetaC, 1.2).unwrap();
        assert!(est.slope.abs() < 1e-12);

        let seq = SpectrumSequence::iid(WeightedSpectrum::point_mass(), vec![1, 2, 3]).unwrap();
        assert!(matches!(
            empirical_rate(&seq, Quantity::Zeta, 0.3),
            Err(Error::InfiniteQuantity { n: 1 })
        ));
    }

    #[test]
    fn finite_rates() {
        let sp = iid_product(&base(), 2).unwrap();
        // levels 0.5625, 0.375 (x1), 0.0625; cumulative exceeds 0.1 at the first level
        let r = finite_constant_rate(&sp, 2, 0.1).unwrap().to_f64();
        assert!((r + 0.5625f64.ln() / 2.0).abs() < 1e-15);
        assert_eq!(finite_failure_rate(&sp, 2, 0.0).unwrap(), Extended::Infinite);
    }

    #[test]
    fn quantity_names_round_trip() {
        for q in Quantity::ALL {
            assert_eq!(q.name().parse::<Quantity>().unwrap(), q);
        }
        assert!("nope".parse::<Quantity>().is_err());
    }
}
