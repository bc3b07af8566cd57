//! Logarithmic moment generating functions, their Legendre transforms, the
//! slope constants `R₁..R₄`, and the resulting tail exponents of
//! `P{X_n/n ≥ a}` and `P{X_n/n ≤ a}`.

use crate::asymptotics::{RenyiProfile, SpectrumProfile};
use crate::error::{Error, Result};
use crate::numeric::{bisect, central_difference, log_sum_exp, Extended};
use crate::spectra::WeightedSpectrum;
use serde::{Deserialize, Serialize, Serializer};
use std::fmt;

/// Largest `|t|` searched before a supremum is declared divergent.
pub const T_CAP: f64 = 1e6;
/// Offset used for the one-sided slopes at `t = 0`.
const SLOPE_STEP: f64 = 1e-6;
const T_TOL: f64 = 1e-14;

/// A convex `Λ(t)` with `Λ(0) = 0`, defined on `[t_min, t_max]`.
pub trait LogMgf: Send + Sync {
    fn lambda(&self, t: f64) -> f64;

    fn dlambda(&self, t: f64) -> f64 {
        central_difference(|x| self.lambda(x), t, 1e-6)
    }

    fn t_range(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }
}

/// `Λ(t) = μt + σ²t²/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaussian {
    pub mean: f64,
    pub variance: f64,
}

impl LogMgf for Gaussian {
    fn lambda(&self, t: f64) -> f64 {
        self.mean * t + 0.5 * self.variance * t * t
    }
    fn dlambda(&self, t: f64) -> f64 {
        self.mean + self.variance * t
    }
}

/// `Λ(t) = ct`, a deterministic variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Linear {
    pub c: f64,
}

impl LogMgf for Linear {
    fn lambda(&self, t: f64) -> f64 {
        self.c * t
    }
    fn dlambda(&self, _t: f64) -> f64 {
        self.c
    }
}

/// `Λ(t) = ln Σ p_i e^{t x_i}` of a finitely supported variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Discrete {
    /// `(x_i, ln p_i)`
    atoms: Vec<(f64, f64)>,
}

impl Discrete {
    pub fn new(values: &[f64], probs: &[f64]) -> Result<Self> {
        if values.is_empty() || values.len() != probs.len() {
            return Err(Error::InvalidInput("values and probabilities must have the same nonzero length".into()));
        }
        if values.iter().any(|v| !v.is_finite()) || probs.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
            return Err(Error::InvalidInput("values must be finite and probabilities positive".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized { sum: total });
        }
        Ok(Discrete {
            atoms: values.iter().zip(probs).map(|(&x, &p)| (x, (p / total).ln())).collect(),
        })
    }

    /// Indicator of success of a `q`-coin.
    pub fn bernoulli(q: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidParameter {
                name: "q",
                value: q,
                reason: "must lie in (0, 1)",
            });
        }
        Discrete::new(&[1.0, 0.0], &[q, 1.0 - q])
    }
}

impl LogMgf for Discrete {
    fn lambda(&self, t: f64) -> f64 {
        log_sum_exp(self.atoms.iter().map(|(x, lp)| lp + t * x))
    }

    fn dlambda(&self, t: f64) -> f64 {
        let z = self.lambda(t);
        self.atoms.iter().map(|(x, lp)| (lp + t * x - z).exp() * x).sum()
    }
}

/// `Λ(t) = ψ̄(1 - t)`, the limiting moment function of `-ln p_{n,i}` under
/// `p_n`; defined for `1 - s_max ≤ t ≤ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FromProfile<P> {
    pub profile: P,
}

impl<P: RenyiProfile> LogMgf for FromProfile<P> {
    fn lambda(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        self.profile.psi(1.0 - t)
    }

    fn dlambda(&self, t: f64) -> f64 {
        -self.profile.dpsi(1.0 - t)
    }

    fn t_range(&self) -> (f64, f64) {
        (1.0 - self.profile.s_max(), 1.0)
    }
}

/// An extended real for slopes that may diverge in either direction.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum Slope {
    MinusInfinity,
    Finite(f64),
    PlusInfinity,
}

impl Slope {
    pub fn to_f64(self) -> f64 {
        match self {
            Slope::MinusInfinity => f64::NEG_INFINITY,
            Slope::Finite(v) => v,
            Slope::PlusInfinity => f64::INFINITY,
        }
    }
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slope::MinusInfinity => f.write_str("-inf"),
            Slope::Finite(v) => write!(f, "{v}"),
            Slope::PlusInfinity => f.write_str("inf"),
        }
    }
}

impl Serialize for Slope {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Slope::Finite(v) => s.serialize_f64(*v),
            other => s.serialize_str(&other.to_string()),
        }
    }
}

/// `R₁ = lim_{t→∞} Λ(t)/t`, `R₂ = Λ'(+0)`, `R₃ = Λ'(-0)`,
/// `R₄ = lim_{t→-∞} Λ(t)/t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeConstants {
    pub r1: Slope,
    pub r2: f64,
    pub r3: f64,
    pub r4: Slope,
}

/// Limit of `Λ'` toward one end of the domain. A finite end gives the
/// slope there; an infinite one compares `Λ'(±T)` with `Λ'(±T/2)`.
fn end_slope<M: LogMgf + ?Sized>(mgf: &M, sign: f64) -> Slope {
    let (lo, hi) = mgf.t_range();
    let end = if sign > 0.0 { hi } else { lo };
    if end.is_finite() {
        return Slope::Finite(mgf.dlambda(end));
    }
    let far = mgf.dlambda(sign * T_CAP);
    let half = mgf.dlambda(sign * T_CAP / 2.0);
    if (far - half).abs() <= 1e-6 * far.abs().max(1.0) {
        Slope::Finite(far)
    } else if sign > 0.0 {
        Slope::PlusInfinity
    } else {
        Slope::MinusInfinity
    }
}

pub fn slope_constants<M: LogMgf + ?Sized>(mgf: &M) -> Result<SlopeConstants> {
    let c = SlopeConstants {
        r1: end_slope(mgf, 1.0),
        r2: mgf.dlambda(SLOPE_STEP),
        r3: mgf.dlambda(-SLOPE_STEP),
        r4: end_slope(mgf, -1.0),
    };
    let tol = 1e-9;
    let ordered = c.r4.to_f64() <= c.r3 + tol && c.r3 <= c.r2 + tol && c.r2 <= c.r1.to_f64() + tol;
    if !ordered {
        return Err(Error::InvalidInput(format!(
            "slope constants out of order (R4={}, R3={}, R2={}, R1={}); Λ is not convex",
            c.r4, c.r3, c.r2, c.r1
        )));
    }
    Ok(c)
}

/// `sup_{t ∈ [lo, hi]} tR - Λ(t)` on one side of zero, with infinite ends
/// searched geometrically up to [`T_CAP`].
fn one_sided_sup<M: LogMgf + ?Sized>(mgf: &M, r: f64, sign: f64) -> Extended {
    let (lo, hi) = mgf.t_range();
    let end = if sign > 0.0 { hi } else { lo };
    let limit = if end.is_finite() { end.abs() } else { T_CAP };
    let objective = |t: f64| t * r - mgf.lambda(t);
    // gain(t) = d/dt objective along the search direction, nonincreasing
    let gain = |u: f64| sign * (r - mgf.dlambda(sign * u));
    if gain(0.0) <= 0.0 {
        return Extended::Finite(0.0);
    }
    let mut far = 1.0f64.min(limit);
    while gain(far) > 0.0 && far < limit {
        far = (far * 2.0).min(limit);
    }
    if gain(far) > 0.0 {
        if !end.is_finite() && gain(far) > 1e-9 * r.abs().max(1.0) {
            return Extended::Infinite;
        }
        return Extended::Finite(objective(sign * far).max(0.0));
    }
    let u = bisect(gain, 0.0, far, T_TOL);
    Extended::Finite(objective(sign * u).max(0.0))
}

/// `Λ*(R) = sup_t tR - Λ(t)`.
pub fn rate_function<M: LogMgf + ?Sized>(mgf: &M, r: f64) -> Extended {
    let slope0 = mgf.dlambda(0.0);
    if r > slope0 {
        one_sided_sup(mgf, r, 1.0)
    } else if r < slope0 {
        one_sided_sup(mgf, r, -1.0)
    } else {
        Extended::Finite(0.0)
    }
}

/// Exponents of the four tail probabilities at level `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailExponents {
    pub a: f64,
    /// `lim -(1/n) ln P{X_n/n ≥ a}`
    pub upper_ge: Extended,
    /// `lim -(1/n) ln P{X_n/n > a}`
    pub upper_gt: Extended,
    /// `lim -(1/n) ln P{X_n/n ≤ a}`
    pub lower_le: Extended,
    /// `lim -(1/n) ln P{X_n/n < a}`
    pub lower_lt: Extended,
    /// Set when `a` lies beyond the slope at a finite end of the domain of
    /// `Λ`, where the value at that slope is reported.
    pub domain_limited: bool,
}

/// Three-branch tail exponents. Between `R₂` and `R₁` the upper exponent is
/// `sup_{t>0} ta - Λ(t)`; between `R₄` and `R₃` the lower one is
/// `sup_{t<0} ta - Λ(t)`. At `a = R₁` the `≥` tail keeps the limiting
/// supremum while the `>` tail is infinite, and symmetrically at `R₄`.
pub fn tail_exponents<M: LogMgf + ?Sized>(mgf: &M, a: f64) -> Result<TailExponents> {
    let c = slope_constants(mgf)?;
    let (t_lo, t_hi) = mgf.t_range();
    let mut domain_limited = false;

    let (upper_ge, upper_gt) = if a <= c.r2 {
        (Extended::Finite(0.0), Extended::Finite(0.0))
    } else if t_hi.is_finite() && a >= c.r1.to_f64() {
        domain_limited = a > c.r1.to_f64();
        let v = one_sided_sup(mgf, c.r1.to_f64(), 1.0);
        (v, v)
    } else if a > c.r1.to_f64() {
        (Extended::Infinite, Extended::Infinite)
    } else if a == c.r1.to_f64() {
        (one_sided_sup(mgf, a, 1.0), Extended::Infinite)
    } else {
        let v = one_sided_sup(mgf, a, 1.0);
        (v, v)
    };

    let (lower_le, lower_lt) = if a >= c.r3 {
        (Extended::Finite(0.0), Extended::Finite(0.0))
    } else if t_lo.is_finite() && a <= c.r4.to_f64() {
        domain_limited = a < c.r4.to_f64();
        let v = one_sided_sup(mgf, c.r4.to_f64(), -1.0);
        (v, v)
    } else if a < c.r4.to_f64() {
        (Extended::Infinite, Extended::Infinite)
    } else if a == c.r4.to_f64() {
        (one_sided_sup(mgf, a, -1.0), Extended::Infinite)
    } else {
        let v = one_sided_sup(mgf, a, -1.0);
        (v, v)
    };

    Ok(TailExponents {
        a,
        upper_ge,
        upper_gt,
        lower_le,
        lower_lt,
        domain_limited,
    })
}

/// JSON description of a built-in family.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MgfSpec {
    Bernoulli { q: f64 },
    Discrete { values: Vec<f64>, probs: Vec<f64> },
    Gaussian { mean: f64, variance: f64 },
    Linear { c: f64 },
    FromSpectrum { values: Vec<f64> },
}

impl MgfSpec {
    pub fn build(&self) -> Result<Box<dyn LogMgf>> {
        Ok(match self {
            MgfSpec::Bernoulli { q } => Box::new(Discrete::bernoulli(*q)?),
            MgfSpec::Discrete { values, probs } => Box::new(Discrete::new(values, probs)?),
            MgfSpec::Gaussian { mean, variance } => {
                if !(*variance >= 0.0) {
                    return Err(Error::InvalidParameter {
                        name: "variance",
                        value: *variance,
                        reason: "must be nonnegative",
                    });
                }
                Box::new(Gaussian {
                    mean: *mean,
                    variance: *variance,
                })
            }
            MgfSpec::Linear { c } => Box::new(Linear { c: *c }),
            MgfSpec::FromSpectrum { values } => Box::new(FromProfile {
                profile: SpectrumProfile::new(&WeightedSpectrum::from_values(values)?),
            }),
        })
    }
}

/// `D(Bern(x) ‖ Bern(q))` in nats.
pub fn bernoulli_kl(x: f64, q: f64) -> f64 {
    let term = |u: f64, v: f64| if u == 0.0 { 0.0 } else { u * (u / v).ln() };
    term(x, q) + term(1.0 - x, 1.0 - q)
}
