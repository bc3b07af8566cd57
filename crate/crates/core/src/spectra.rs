//! Schmidt spectra stored as descending `(value, multiplicity)` levels.
//!
//! Values are kept in log domain so that product spectra of many copies
//! (whose eigenvalues underflow `f64`) stay exact enough to threshold, and
//! multiplicities are arbitrary-precision integers because multinomial
//! coefficients overflow every fixed-width type long before the
//! enumeration itself becomes expensive.

use crate::error::{Error, Result};
use crate::numeric::{log_sum_exp, CompensatedSum};
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize, Serializer};
use std::cmp::Ordering;

/// Default cap on the number of type classes enumerated by [`iid_product`].
pub const DEFAULT_COMPOSITION_CAP: u64 = 10_000_000;

/// Largest deviation of the input sum from 1 that is silently rescaled.
const RESCALE_TOLERANCE: f64 = 1e-9;

/// Natural log of an arbitrary-precision integer.
pub fn ln_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// One distinct eigenvalue and how many times it occurs.
#[derive(Debug, Clone, PartialEq)]
pub struct Level {
    ln_value: f64,
    multiplicity: BigUint,
    ln_multiplicity: f64,
}

impl Level {
    fn new(ln_value: f64, multiplicity: BigUint) -> Self {
        let ln_multiplicity = ln_biguint(&multiplicity);
        Level {
            ln_value,
            multiplicity,
            ln_multiplicity,
        }
    }

    /// The eigenvalue; underflows to 0 for very long product spectra.
    pub fn value(&self) -> f64 {
        self.ln_value.exp()
    }

    pub fn ln_value(&self) -> f64 {
        self.ln_value
    }

    pub fn multiplicity(&self) -> &BigUint {
        &self.multiplicity
    }

    /// Multiplicity as a float; `+∞` when it exceeds the `f64` range.
    pub fn multiplicity_f64(&self) -> f64 {
        self.multiplicity.to_f64().unwrap_or(f64::INFINITY)
    }

    pub fn ln_multiplicity(&self) -> f64 {
        self.ln_multiplicity
    }

    /// `ln(value · multiplicity)`.
    pub fn ln_mass(&self) -> f64 {
        self.ln_value + self.ln_multiplicity
    }

    /// Total probability carried by this level.
    pub fn mass(&self) -> f64 {
        self.ln_mass().exp()
    }
}

/// Descending Schmidt-coefficient distribution with merged equal values.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSpectrum {
    levels: Vec<Level>,
}

impl WeightedSpectrum {
    /// Builds a spectrum from raw eigenvalues.
    ///
    /// The values are rescaled when their sum is within 1e-9 of one, sorted
    /// descending, and equal values are merged into multiplicities.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        let entries: Vec<(f64, u64)> = values.iter().map(|&v| (v, 1)).collect();
        Self::from_entries(&entries)
    }

    /// Builds a spectrum from `(value, multiplicity)` pairs.
    pub fn from_entries(entries: &[(f64, u64)]) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptySpectrum);
        }
        for (index, &(value, mult)) in entries.iter().enumerate() {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::NonPositiveValue { index, value });
            }
            if mult == 0 {
                return Err(Error::InvalidInput(format!(
                    "multiplicity at index {index} must be at least 1"
                )));
            }
        }
        let sum: f64 = entries
            .iter()
            .map(|&(v, m)| v * m as f64)
            .collect::<CompensatedSum>()
            .value();
        if (sum - 1.0).abs() > RESCALE_TOLERANCE {
            return Err(Error::NotNormalized { sum });
        }
        let ln_sum = sum.ln();
        let levels = entries
            .iter()
            .map(|&(v, m)| (v.ln() - ln_sum, BigUint::from(m)))
            .collect();
        Ok(Self::from_log_levels(levels))
    }

    /// Builds a spectrum from `(ln value, multiplicity)` pairs that are
    /// already normalized. Collisions are merged as in [`iid_product`].
    pub fn from_log_entries(entries: Vec<(f64, BigUint)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptySpectrum);
        }
        for (index, (ln_v, m)) in entries.iter().enumerate() {
            if ln_v.is_nan() || *ln_v > 1e-12 || m.is_zero() {
                return Err(Error::NonPositiveValue {
                    index,
                    value: ln_v.exp(),
                });
            }
        }
        let sp = Self::from_log_levels(entries);
        let ln_total = log_sum_exp(sp.levels.iter().map(Level::ln_mass));
        if ln_total.abs() > 1e-10 {
            return Err(Error::NotNormalized {
                sum: ln_total.exp(),
            });
        }
        Ok(sp)
    }

    /// Sorts descending and merges values whose logs agree to within
    /// `1e-12 · max(1, |ln v|)`. No normalization check.
    pub(crate) fn from_log_levels(mut raw: Vec<(f64, BigUint)>) -> Self {
        raw.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal));
        let mut levels: Vec<Level> = Vec::with_capacity(raw.len());
        let mut group: Option<(f64, BigUint)> = None;
        for (ln_v, m) in raw {
            group = match group.take() {
                Some((anchor, mult)) if merge_tolerance(anchor, ln_v) => Some((anchor, mult + m)),
                Some((anchor, mult)) => {
                    levels.push(Level::new(anchor, mult));
                    Some((ln_v, m))
                }
                None => Some((ln_v, m)),
            };
        }
        if let Some((anchor, mult)) = group {
            levels.push(Level::new(anchor, mult));
        }
        WeightedSpectrum { levels }
    }

    /// The product state `{(1, 1)}`.
    pub fn point_mass() -> Self {
        WeightedSpectrum {
            levels: vec![Level::new(0.0, BigUint::one())],
        }
    }

    /// The maximally mixed spectrum of dimension `d`.
    pub fn uniform(d: u64) -> Result<Self> {
        if d == 0 {
            return Err(Error::EmptySpectrum);
        }
        Ok(WeightedSpectrum {
            levels: vec![Level::new(-(d as f64).ln(), BigUint::from(d))],
        })
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    /// Number of distinct values.
    pub fn distinct(&self) -> usize {
        self.levels.len()
    }

    /// Total dimension `Σ multiplicity`.
    pub fn dimension(&self) -> BigUint {
        self.levels.iter().map(|l| l.multiplicity.clone()).sum()
    }

    pub fn dimension_f64(&self) -> f64 {
        self.dimension().to_f64().unwrap_or(f64::INFINITY)
    }

    /// Dimension if it fits in a `u64`.
    pub fn dimension_u64(&self) -> Option<u64> {
        self.dimension().to_u64()
    }

    pub fn max_value(&self) -> f64 {
        self.levels[0].value()
    }

    pub fn min_value(&self) -> f64 {
        self.levels[self.levels.len() - 1].value()
    }

    /// Eigenvalues with multiplicity, descending. Returns `None` when the
    /// dimension exceeds `limit`.
    pub fn atoms(&self, limit: u64) -> Option<Vec<f64>> {
        let dim = self.dimension_u64()?;
        if dim > limit {
            return None;
        }
        let mut out = Vec::with_capacity(dim as usize);
        for level in &self.levels {
            let m = level.multiplicity.to_u64()?;
            out.extend(std::iter::repeat(level.value()).take(m as usize));
        }
        Some(out)
    }

    /// `(value, multiplicity)` pairs for levels whose multiplicity fits in a `u64`.
    pub fn entries(&self) -> Option<Vec<(f64, u64)>> {
        self.levels
            .iter()
            .map(|l| l.multiplicity.to_u64().map(|m| (l.value(), m)))
            .collect()
    }

    /// Tensor product: all pairwise products with multiplied multiplicities.
    pub fn tensor(&self, other: &WeightedSpectrum) -> WeightedSpectrum {
        let mut raw = Vec::with_capacity(self.levels.len() * other.levels.len());
        for a in &self.levels {
            for b in &other.levels {
                raw.push((a.ln_value + b.ln_value, &a.multiplicity * &b.multiplicity));
            }
        }
        Self::from_log_levels(raw)
    }

    /// Von Neumann entropy in nats.
    pub fn entropy(&self) -> f64 {
        let h = self
            .levels
            .iter()
            .map(|l| -l.ln_value * l.mass())
            .collect::<CompensatedSum>()
            .value();
        h.max(0.0)
    }

    /// `ψ(s) = ln Σ m v^s`.
    pub fn renyi_psi(&self, s: f64) -> f64 {
        if s == 1.0 {
            return 0.0;
        }
        log_sum_exp(
            self.levels
                .iter()
                .map(|l| l.ln_multiplicity + s * l.ln_value),
        )
    }

    /// Serializable `{"entries": [[value, multiplicity], ...]}` form.
    pub fn to_output(&self) -> SpectrumOutput {
        SpectrumOutput {
            entries: self
                .levels
                .iter()
                .map(|l| (l.value(), Multiplicity(l.multiplicity.clone())))
                .collect(),
        }
    }
}

fn merge_tolerance(anchor: f64, ln_v: f64) -> bool {
    (anchor - ln_v).abs() <= 1e-12 * anchor.abs().max(1.0)
}

/// Spectrum of `ρ^{⊗n}` built by enumerating type classes.
#[derive(Debug, Clone, PartialEq)]
pub struct IidSource {
    pub base: WeightedSpectrum,
    pub copies: u32,
}

impl IidSource {
    pub fn new(base: WeightedSpectrum, copies: u32) -> Result<Self> {
        if copies == 0 {
            return Err(Error::InvalidParameter {
                name: "n",
                value: 0.0,
                reason: "number of copies must be at least 1",
            });
        }
        Ok(IidSource { base, copies })
    }

    pub fn spectrum(&self) -> Result<WeightedSpectrum> {
        iid_product(&self.base, self.copies)
    }
}

/// Number of compositions of `n` into `k` nonnegative parts, as a float.
pub fn composition_count(n: u32, k: usize) -> f64 {
    // C(n + k - 1, k - 1) via log-factorials
    let ln_c = ln_factorial(n as u64 + k as u64 - 1) - ln_factorial(n as u64) - ln_factorial(k as u64 - 1);
    ln_c.exp().round()
}

fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Exact spectrum of the `n`-fold tensor power of `base`, with the default
/// enumeration cap.
pub fn iid_product(base: &WeightedSpectrum, n: u32) -> Result<WeightedSpectrum> {
    iid_product_with_cap(base, n, DEFAULT_COMPOSITION_CAP)
}

/// Exact spectrum of `base^{⊗n}`: one level per type class
/// `(n_1, …, n_k)` with value `Π v_j^{n_j}` and multiplicity
/// `n!/Π n_j! · Π m_j^{n_j}`.
pub fn iid_product_with_cap(base: &WeightedSpectrum, n: u32, cap: u64) -> Result<WeightedSpectrum> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            value: 0.0,
            reason: "number of copies must be at least 1",
        });
    }
    if n == 1 {
        return Ok(base.clone());
    }
    let k = base.levels.len();
    let count = composition_count(n, k);
    if count > cap as f64 {
        return Err(Error::EnumerationCap { count, cap });
    }

    let n_us = n as usize;
    let mut factorials: Vec<BigUint> = Vec::with_capacity(n_us + 1);
    factorials.push(BigUint::one());
    for i in 1..=n_us {
        let next = &factorials[i - 1] * BigUint::from(i as u64);
        factorials.push(next);
    }
    // powers[j][c] = m_j^c
    let powers: Vec<Vec<BigUint>> = base
        .levels
        .iter()
        .map(|l| {
            let mut row = Vec::with_capacity(n_us + 1);
            row.push(BigUint::one());
            for c in 1..=n_us {
                let next = &row[c - 1] * &l.multiplicity;
                row.push(next);
            }
            row
        })
        .collect();
    let ln_values: Vec<f64> = base.levels.iter().map(|l| l.ln_value).collect();

    let mut raw = Vec::with_capacity(count as usize);
    let mut parts = vec![0u32; k];
    enumerate_compositions(n, 0, &mut parts, &mut |parts| {
        let mut denom = BigUint::one();
        let mut weight = BigUint::one();
        let mut ln_v = 0.0;
        for (j, &c) in parts.iter().enumerate() {
            denom *= &factorials[c as usize];
            weight *= &powers[j][c as usize];
            ln_v += c as f64 * ln_values[j];
        }
        let mult = (&factorials[n_us] / denom) * weight;
        raw.push((ln_v, mult));
    });
    Ok(WeightedSpectrum::from_log_levels(raw))
}

fn enumerate_compositions(remaining: u32, index: usize, parts: &mut Vec<u32>, visit: &mut dyn FnMut(&[u32])) {
    let k = parts.len();
    if index == k - 1 {
        parts[index] = remaining;
        visit(parts);
        return;
    }
    for c in (0..=remaining).rev() {
        parts[index] = c;
        enumerate_compositions(remaining - c, index + 1, parts, visit);
    }
}

/// JSON input forms accepted for a spectrum.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SpectrumInput {
    Values { values: Vec<f64> },
    Entries { entries: Vec<(f64, u64)> },
    Iid { iid: IidInput },
}

#[derive(Debug, Clone, Deserialize)]
pub struct IidInput {
    pub base: Vec<f64>,
    pub n: u32,
}

impl SpectrumInput {
    pub fn build(&self) -> Result<WeightedSpectrum> {
        match self {
            SpectrumInput::Values { values } => WeightedSpectrum::from_values(values),
            SpectrumInput::Entries { entries } => WeightedSpectrum::from_entries(entries),
            SpectrumInput::Iid { iid } => {
                let base = WeightedSpectrum::from_values(&iid.base)?;
                IidSource::new(base, iid.n)?.spectrum()
            }
        }
    }
}

/// Multiplicity serialized as a JSON number when it fits in `u64`,
/// otherwise as a decimal string.
#[derive(Debug, Clone, PartialEq)]
pub struct Multiplicity(pub BigUint);

impl Serialize for Multiplicity {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.0.to_u64() {
            Some(m) => s.serialize_u64(m),
            None => s.serialize_str(&self.0.to_string()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumOutput {
    pub entries: Vec<(f64, Multiplicity)>,
}
