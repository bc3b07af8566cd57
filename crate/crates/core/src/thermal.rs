//! Rényi profiles of thermal reduced states from a per-site partition
//! function `Ξ(β) = ln Tr e^{βH}` (sign as written, so ordinary Gibbs
//! states correspond to negated energies).
//!
//! `ψ̄(s) = Ξ(sβ₀) - sΞ(β₀)` and `ψ̄'(s) = β₀Ξ'(sβ₀) - Ξ(β₀)`.

use crate::asymptotics::{
    rate_constant, rate_failure_exponent, rate_success_exponent_dflec, rate_success_exponent_pflec, RenyiProfile,
};
use crate::error::{Error, Result};
use crate::numeric::log_sum_exp;
use crate::spectra::WeightedSpectrum;
use serde::{Deserialize, Serialize};

/// Largest allowed negative second difference of a tabulated `Ξ`.
pub const CONVEXITY_TOLERANCE: f64 = 1e-8;

/// `Ξ` either in closed form from per-site levels or interpolated from a
/// table.
#[derive(Debug, Clone, PartialEq)]
pub enum PartitionFunction {
    /// `(energy, degeneracy)` pairs: `Ξ(β) = ln Σ g e^{βE}`.
    Levels(Vec<(f64, f64)>),
    Tabulated(Table),
}

/// Samples `(β, Ξ(β))` with a monotone piecewise-cubic interpolant.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    beta: Vec<f64>,
    xi: Vec<f64>,
    slope: Vec<f64>,
}

impl Table {
    pub fn new(mut samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 3 {
            return Err(Error::InvalidInput("a Ξ table needs at least 3 samples".into()));
        }
        if samples.iter().any(|(b, x)| !b.is_finite() || !x.is_finite()) {
            return Err(Error::InvalidInput("Ξ table entries must be finite".into()));
        }
        samples.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidInput("Ξ table has repeated β values".into()));
        }
        let beta: Vec<f64> = samples.iter().map(|s| s.0).collect();
        let xi: Vec<f64> = samples.iter().map(|s| s.1).collect();
        let secant: Vec<f64> = (0..beta.len() - 1)
            .map(|i| (xi[i + 1] - xi[i]) / (beta[i + 1] - beta[i]))
            .collect();
        for (i, w) in secant.windows(2).enumerate() {
            if w[1] - w[0] < -CONVEXITY_TOLERANCE {
                return Err(Error::InvalidInput(format!(
                    "Ξ table is not convex near β = {} (slope drops by {:e})",
                    beta[i + 1],
                    w[0] - w[1]
                )));
            }
        }
        let slope = pchip_slopes(&beta, &secant);
        Ok(Table { beta, xi, slope })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.beta[0], self.beta[self.beta.len() - 1])
    }

    fn locate(&self, b: f64) -> usize {
        let i = self.beta.partition_point(|&x| x <= b);
        i.clamp(1, self.beta.len() - 1) - 1
    }

    /// Value and derivative of the interpolant at `b` inside the range.
    fn eval(&self, b: f64) -> (f64, f64) {
        let i = self.locate(b);
        let h = self.beta[i + 1] - self.beta[i];
        let t = (b - self.beta[i]) / h;
        let (y0, y1) = (self.xi[i], self.xi[i + 1]);
        let (m0, m1) = (self.slope[i], self.slope[i + 1]);
        let t2 = t * t;
        let t3 = t2 * t;
        let value = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * h * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * h * m1;
        let deriv = ((6.0 * t2 - 6.0 * t) * y0 + (-6.0 * t2 + 6.0 * t) * y1) / h
            + (3.0 * t2 - 4.0 * t + 1.0) * m0
            + (3.0 * t2 - 2.0 * t) * m1;
        (value, deriv)
    }
}

/// Fritsch–Carlson derivative estimates (weighted harmonic means of the
/// neighbouring secants, zero at local extrema).
fn pchip_slopes(x: &[f64], secant: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = (0..n - 1).map(|i| x[i + 1] - x[i]).collect();
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        let (s0, s1) = (secant[i - 1], secant[i]);
        if s0 * s1 > 0.0 {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / s0 + w2 / s1);
        }
    }
    d[0] = end_slope(h[0], h[1], secant[0], secant[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], secant[n - 2], secant[n - 3]);
    d
}

fn end_slope(h0: f64, h1: f64, s0: f64, s1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
    if d.signum() != s0.signum() {
        0.0
    } else if s0.signum() != s1.signum() && d.abs() > 3.0 * s0.abs() {
        3.0 * s0
    } else {
        d
    }
}

impl PartitionFunction {
    pub fn levels(levels: Vec<(f64, f64)>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidInput("at least one energy level is required".into()));
        }
        if levels.iter().any(|&(e, g)| !e.is_finite() || !(g > 0.0) || !g.is_finite()) {
            return Err(Error::InvalidInput(
                "energies must be finite and degeneracies positive".into(),
            ));
        }
        Ok(PartitionFunction::Levels(levels))
    }

    pub fn tabulated(samples: Vec<(f64, f64)>) -> Result<Self> {
        Ok(PartitionFunction::Tabulated(Table::new(samples)?))
    }

    /// Range of `β` on which `Ξ` may be evaluated.
    pub fn range(&self) -> (f64, f64) {
        match self {
            PartitionFunction::Levels(_) => (f64::NEG_INFINITY, f64::INFINITY),
            PartitionFunction::Tabulated(t) => t.range(),
        }
    }

    fn check(&self, beta: f64) -> Result<()> {
        let (lo, hi) = self.range();
        if beta.is_nan() || beta < lo || beta > hi {
            return Err(Error::Domain(format!("β = {beta} is outside the tabulated range [{lo}, {hi}]")));
        }
        Ok(())
    }

    fn eval_unchecked(&self, beta: f64) -> (f64, f64) {
        match self {
            PartitionFunction::Levels(levels) => {
                let xi = log_sum_exp(levels.iter().map(|(e, g)| g.ln() + beta * e));
                let mean = levels.iter().map(|(e, g)| (g.ln() + beta * e - xi).exp() * e).sum();
                (xi, mean)
            }
            PartitionFunction::Tabulated(t) => {
                let (lo, hi) = t.range();
                t.eval(beta.clamp(lo, hi))
            }
        }
    }

    pub fn xi(&self, beta: f64) -> Result<f64> {
        self.check(beta)?;
        Ok(self.eval_unchecked(beta).0)
    }

    pub fn dxi(&self, beta: f64) -> Result<f64> {
        self.check(beta)?;
        Ok(self.eval_unchecked(beta).1)
    }
}

/// `ψ̄(s) = Ξ(sβ₀) - sΞ(β₀)`, valid for `s` with `sβ₀` inside the range of `Ξ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalProfile {
    pf: PartitionFunction,
    beta0: f64,
    xi0: f64,
    s_max: f64,
}

pub fn profile_from_partition(pf: &PartitionFunction, beta0: f64) -> Result<ThermalProfile> {
    if !beta0.is_finite() {
        return Err(Error::InvalidParameter {
            name: "beta0",
            value: beta0,
            reason: "must be finite",
        });
    }
    pf.xi(0.0)?;
    let xi0 = pf.xi(beta0)?;
    let (lo, hi) = pf.range();
    let s_max = if beta0 > 0.0 {
        hi / beta0
    } else if beta0 < 0.0 {
        lo / beta0
    } else {
        f64::INFINITY
    };
    Ok(ThermalProfile {
        pf: pf.clone(),
        beta0,
        xi0,
        s_max,
    })
}

impl ThermalProfile {
    pub fn beta0(&self) -> f64 {
        self.beta0
    }

    pub fn partition_function(&self) -> &PartitionFunction {
        &self.pf
    }
}

impl RenyiProfile for ThermalProfile {
    fn psi(&self, s: f64) -> f64 {
        if s == 1.0 {
            return 0.0;
        }
        self.pf.eval_unchecked(s * self.beta0).0 - s * self.xi0
    }

    fn dpsi(&self, s: f64) -> f64 {
        self.beta0 * self.pf.eval_unchecked(s * self.beta0).1 - self.xi0
    }

    fn s_max(&self) -> f64 {
        self.s_max
    }

    fn h_inf(&self) -> Option<f64> {
        match &self.pf {
            PartitionFunction::Levels(levels) => {
                let top = levels.iter().map(|(e, _)| self.beta0 * e).fold(f64::NEG_INFINITY, f64::max);
                Some(self.xi0 - top)
            }
            PartitionFunction::Tabulated(_) => None,
        }
    }
}

/// Per-site state `g e^{β₀E} / Σ g e^{β₀E}` as a spectrum; degeneracies
/// must be integers.
pub fn gibbs_spectrum(levels: &[(f64, f64)], beta0: f64) -> Result<WeightedSpectrum> {
    let xi = log_sum_exp(levels.iter().map(|(e, g)| g.ln() + beta0 * e));
    let mut entries = Vec::with_capacity(levels.len());
    for &(e, g) in levels {
        if g.fract() != 0.0 || g < 1.0 {
            return Err(Error::InvalidInput(format!("degeneracy {g} is not a positive integer")));
        }
        entries.push(((beta0 * e - xi).exp(), g as u64));
    }
    WeightedSpectrum::from_entries(&entries)
}

/// All rates of a thermal profile at one `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThermalRates {
    pub beta0: f64,
    pub r: f64,
    /// `-β₀Ξ'(β₀) + Ξ(β₀)`
    pub b_const: f64,
    pub h_minus: f64,
    pub h_plus: f64,
    pub failure_exponent: f64,
    pub success_exponent_pflec: f64,
    pub success_exponent_dflec: f64,
    /// `-(β₀/2)Ξ'(β₀/2) + Ξ(β₀) - Ξ(β₀/2)`
    pub r_half: f64,
}

pub fn thermal_rates(pf: &PartitionFunction, beta0: f64, r: f64) -> Result<ThermalRates> {
    let profile = profile_from_partition(pf, beta0)?;
    let xi0 = pf.xi(beta0)?;
    let b_const = -beta0 * pf.dxi(beta0)? + xi0;
    let half = beta0 / 2.0;
    let r_half = -half * pf.dxi(half)? + xi0 - pf.xi(half)?;
    let (h_minus, h_plus) = rate_constant(&profile);
    Ok(ThermalRates {
        beta0,
        r,
        b_const,
        h_minus,
        h_plus,
        failure_exponent: rate_failure_exponent(&profile, r)?,
        success_exponent_pflec: rate_success_exponent_pflec(&profile, r)?,
        success_exponent_dflec: rate_success_exponent_dflec(&profile, r)?,
        r_half,
    })
}

/// JSON forms: `[[energy, degeneracy], ...]` or `{"table": [[beta, xi], ...]}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PartitionInput {
    Levels(Vec<(f64, f64)>),
    Table { table: Vec<(f64, f64)> },
}

impl PartitionInput {
    pub fn build(&self) -> Result<PartitionFunction> {
        match self {
            PartitionInput::Levels(levels) => PartitionFunction::levels(levels.clone()),
            PartitionInput::Table { table } => PartitionFunction::tabulated(table.clone()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::{dflec_regime_boundary, profile_from_spectrum};

    fn two_level(e: f64) -> PartitionFunction {
        PartitionFunction::levels(vec![(0.0, 1.0), (e, 1.0)]).unwrap()
    }

    fn tabulated_two_level(e: f64) -> PartitionFunction {
        let samples = (0..=4000)
            .map(|i| {
                let b = i as f64 * 1e-3;
                (b, (1.0 + (b * e).exp()).ln())
            })
            .collect();
        PartitionFunction::tabulated(samples).unwrap()
    }

    #[test]
    fn two_level_matches_spectrum_profile() {
        let beta0 = 1.3;
        let thermal = profile_from_partition(&two_level(1.0), beta0).unwrap();
        let q = (beta0 as f64).exp() / (1.0 + beta0.exp());
        let direct = profile_from_spectrum(&WeightedSpectrum::from_values(&[1.0 - q, q]).unwrap());
        for i in 0..50 {
            let s = 0.1 * i as f64;
            assert!((thermal.psi(s) - direct.psi(s)).abs() < 1e-12, "s={s}");
            assert!((thermal.dpsi(s) - direct.dpsi(s)).abs() < 1e-12, "s={s}");
        }
    }

    #[test]
    fn single_level_and_zero_temperature() {
        let p = profile_from_partition(&PartitionFunction::levels(vec![(2.0, 1.0)]).unwrap(), 0.7).unwrap();
        assert!(p.psi(0.3).abs() < 1e-15 && p.psi(3.0).abs() < 1e-14);
        let pf = PartitionFunction::levels(vec![(0.0, 2.0), (1.0, 1.0)]).unwrap();
        let p = profile_from_partition(&pf, 0.0).unwrap();
        for s in [0.0, 0.5, 2.0] {
            assert!((p.psi(s) - (1.0 - s) * 3f64.ln()).abs() < 1e-14);
        }
    }

    #[test]
    fn rate_examples() {
        let rates = thermal_rates(&two_level(1.0), 0.0, 0.0).unwrap();
        assert!((rates.b_const - 2f64.ln()).abs() < 1e-15);
        assert!((rates.failure_exponent - 2f64.ln()).abs() < 1e-12);

        let rates = thermal_rates(&two_level(1.0), 1.0, 0.0).unwrap();
        assert!((rates.b_const - 0.582_203_108_888_218).abs() < 1e-12);

        let tab = thermal_rates(&tabulated_two_level(1.0), 1.0, 0.0).unwrap();
        for (x, y) in [
            (tab.b_const, rates.b_const),
            (tab.failure_exponent, rates.failure_exponent),
            (tab.success_exponent_pflec, rates.success_exponent_pflec),
            (tab.success_exponent_dflec, rates.success_exponent_dflec),
            (tab.r_half, rates.r_half),
        ] {
            assert!((x - y).abs() < 1e-6, "{x} vs {y}");
        }
    }

    #[test]
    fn r_half_matches_profile_boundary() {
        let pf = PartitionFunction::levels(vec![(0.0, 1.0), (0.5, 2.0), (1.5, 1.0)]).unwrap();
        let rates = thermal_rates(&pf, 0.8, 0.1).unwrap();
        let p = profile_from_partition(&pf, 0.8).unwrap();
        assert!((rates.r_half - dflec_regime_boundary(&p)).abs() < 1e-9);
    }

    #[test]
    fn table_validation() {
        assert!(PartitionFunction::tabulated(vec![(0.0, 0.0), (1.0, 1.0)]).is_err());
        let concave = vec![(0.0, 0.0), (1.0, 1.0), (2.0, 1.5)];
        assert!(PartitionFunction::tabulated(concave).is_err());
        let tab = tabulated_two_level(1.0);
        assert!(matches!(tab.xi(4.5), Err(Error::Domain(_))));
        assert!((tab.xi(0.5).unwrap() - (1.0 + 0.5f64.exp()).ln()).abs() < 1e-10);
    }
}
