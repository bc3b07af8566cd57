//! Exact finite-size and asymptotic performance of fixed-length
//! entanglement concentration, computed from Schmidt spectra.
//!
//! The crate is organised bottom-up:
//!
//! * [`spectra`] builds descending weighted spectra, including exact
//!   product spectra of `n` copies by type-class enumeration.
//! * [`majorization`] implements the prefix-sum order and the LOCC
//!   convertibility predicate for pure states.
//! * [`protocols`] gives the optimal probabilistic and deterministic
//!   concentration performance for a single spectrum.
//! * [`info_spectrum`] evaluates threshold-set quantities at finite `n`
//!   and fits their exponents across `n`.
//! * [`asymptotics`], [`thermal`] and [`large_deviations`] evaluate the
//!   rate and exponent formulas from a Rényi profile.
//! * [`randomness`] covers uniform random number extraction and its
//!   duality with concentration.
//!
//! All logarithms are natural.

pub mod asymptotics;
pub mod error;
pub mod info_spectrum;
pub mod large_deviations;
pub mod majorization;
pub mod numeric;
pub mod protocols;
pub mod randomness;
pub mod selftest;
pub mod spectra;
pub mod thermal;

pub use error::{Error, Result};
pub use numeric::Extended;
pub use spectra::{IidSource, WeightedSpectrum};
