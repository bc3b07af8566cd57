//! Commuting pairs `(ρ_n, σ_n)` and the exponents on the projections
//! `{ρ_n - e^{-na} σ_n > 0}` and its complement.

use crate::error::{Error, Result};
use crate::numeric::{log_sum_exp, Extended};
use crate::spectra::{ln_biguint, WeightedSpectrum};
use num_bigint::BigUint;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    ln_rho: f64,
    ln_sigma: f64,
    ln_mult: f64,
}

/// Simultaneously diagonal `ρ` and `σ`, stored as log-eigenvalue pairs with
/// multiplicities. `σ` is any positive operator, not necessarily normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSpectrum {
    entries: Vec<Entry>,
}

impl PairedSpectrum {
    /// Entries `(ln ρ_i, ln σ_i, multiplicity)`; `σ_i` must be positive.
    pub fn from_log_entries(entries: Vec<(f64, f64, BigUint)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptySpectrum);
        }
        let mut out = Vec::with_capacity(entries.len());
        for (i, (ln_rho, ln_sigma, m)) in entries.into_iter().enumerate() {
            if ln_rho.is_nan() || !ln_sigma.is_finite() || ln_rho == f64::INFINITY {
                return Err(Error::NonPositiveValue {
                    index: i,
                    value: ln_sigma.exp(),
                });
            }
            out.push(Entry {
                ln_rho,
                ln_sigma,
                ln_mult: ln_biguint(&m),
            });
        }
        Ok(PairedSpectrum { entries: out })
    }

    pub(crate) fn from_ln_mult_entries(entries: Vec<(f64, f64, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptySpectrum);
        }
        Ok(PairedSpectrum {
            entries: entries
                .into_iter()
                .map(|(ln_rho, ln_sigma, ln_mult)| Entry {
                    ln_rho,
                    ln_sigma,
                    ln_mult,
                })
                .collect(),
        })
    }

    /// Pairs every level of `rho` with `ln σ = f(ln ρ)`.
    pub fn with_sigma_fn<F: Fn(f64) -> f64>(rho: &WeightedSpectrum, f: F) -> Self {
        PairedSpectrum {
            entries: rho
                .levels()
                .iter()
                .map(|l| Entry {
                    ln_rho: l.ln_value(),
                    ln_sigma: f(l.ln_value()),
                    ln_mult: l.ln_multiplicity(),
                })
                .collect(),
        }
    }

    /// `σ = √ρ`.
    pub fn with_sqrt_sigma(rho: &WeightedSpectrum) -> Self {
        PairedSpectrum::with_sigma_fn(rho, |ln_v| 0.5 * ln_v)
    }

    /// `σ = ρ`.
    pub fn with_equal_sigma(rho: &WeightedSpectrum) -> Self {
        PairedSpectrum::with_sigma_fn(rho, |ln_v| ln_v)
    }

    /// `σ = I / dim`, the normalized identity.
    pub fn with_uniform_sigma(rho: &WeightedSpectrum) -> Self {
        let ln_dim = ln_biguint(&rho.dimension());
        PairedSpectrum::with_sigma_fn(rho, |_| -ln_dim)
    }

    /// Exponents at `(n, a)`:
    /// `ζ = -(1/n) ln Tr ρ{ρ ≤ e^{-na}σ}`,
    /// `ζᶜ = -(1/n) ln Tr ρ{ρ > e^{-na}σ}`,
    /// `η = -(1/n) ln Tr σ{ρ > e^{-na}σ}`.
    pub fn quantities(&self, n: u32, a: f64) -> PairedQuantities {
        let nf = n as f64;
        let cut = -nf * a;
        let inside = |e: &&Entry| e.ln_rho - e.ln_sigma > cut;
        let ln_rho_in = log_sum_exp(self.entries.iter().filter(inside).map(|e| e.ln_rho + e.ln_mult));
        let ln_sigma_in = log_sum_exp(self.entries.iter().filter(inside).map(|e| e.ln_sigma + e.ln_mult));
        let ln_rho_out = log_sum_exp(
            self.entries
                .iter()
                .filter(|e| !inside(e))
                .map(|e| e.ln_rho + e.ln_mult),
        );
        // ln(e^{-na} Tr σT / Tr ρT), summed termwise
        let le31_margin = if ln_rho_in == f64::NEG_INFINITY {
            Extended::Infinite
        } else {
            let ln_ratio = log_sum_exp(
                self.entries
                    .iter()
                    .filter(inside)
                    .map(|e| e.ln_rho + e.ln_mult - ln_rho_in - (e.ln_rho - e.ln_sigma - cut)),
            );
            Extended::Finite(-ln_ratio / nf)
        };
        PairedQuantities {
            zeta: Extended::neg_log_rate(ln_rho_out, nf),
            zeta_c: Extended::neg_log_rate(ln_rho_in, nf),
            eta: Extended::neg_log_rate(ln_sigma_in, nf),
            le31_margin,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairedQuantities {
    pub zeta: Extended,
    pub zeta_c: Extended,
    pub eta: Extended,
    /// `η + a - ζᶜ`, infinite when the projection is empty.
    pub le31_margin: Extended,
}
