//! Uniform random-number generation from a distribution by merging its
//! atoms into `M` buckets, judged by the Hellinger and KL criteria, and the
//! algebraic bridge to the fidelity of entanglement concentration.

use crate::asymptotics::success_exponent_from_curve;
use crate::error::{Error, Result};
use crate::info_spectrum::RateCurve;
use crate::numeric::CompensatedSum;
use crate::spectra::WeightedSpectrum;
use serde::{Deserialize, Serialize};
use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

/// Largest number of atoms a partition may cover.
pub const ATOM_LIMIT: u64 = 10_000_000;

/// Assignment of every atom of the descending expansion of a spectrum to
/// one of `M` buckets (0-based internally).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionMap {
    buckets: u64,
    assignment: Vec<u64>,
}

impl PartitionMap {
    /// Builds a map from 0-based bucket labels; every bucket must be used.
    pub fn new(buckets: u64, assignment: Vec<u64>) -> Result<Self> {
        if buckets == 0 {
            return Err(Error::InvalidPartition("M must be at least 1".into()));
        }
        let mut used = vec![false; buckets as usize];
        for (i, &b) in assignment.iter().enumerate() {
            if b >= buckets {
                return Err(Error::InvalidPartition(format!(
                    "atom {} is mapped to bucket {} but M = {buckets}",
                    i + 1,
                    b + 1
                )));
            }
            used[b as usize] = true;
        }
        if let Some(empty) = used.iter().position(|u| !u) {
            return Err(Error::InvalidPartition(format!("bucket {} is empty", empty + 1)));
        }
        Ok(PartitionMap { buckets, assignment })
    }

    /// Each of `d` atoms in its own bucket.
    pub fn singletons(d: u64) -> Result<Self> {
        PartitionMap::new(d, (0..d).collect())
    }

    pub fn buckets(&self) -> u64 {
        self.buckets
    }

    /// 0-based bucket of each atom.
    pub fn assignment(&self) -> &[u64] {
        &self.assignment
    }

    pub fn to_input(&self) -> PartitionInput {
        PartitionInput {
            m: self.buckets,
            assignment: self.assignment.iter().map(|b| b + 1).collect(),
        }
    }
}

/// JSON form with 1-based bucket labels, one per atom in descending order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionInput {
    #[serde(rename = "M")]
    pub m: u64,
    pub assignment: Vec<u64>,
}

impl PartitionInput {
    pub fn build(&self) -> Result<PartitionMap> {
        let mut zero_based = Vec::with_capacity(self.assignment.len());
        for (i, &b) in self.assignment.iter().enumerate() {
            if b == 0 {
                return Err(Error::InvalidPartition(format!("atom {} has bucket 0; labels start at 1", i + 1)));
            }
            zero_based.push(b - 1);
        }
        PartitionMap::new(self.m, zero_based)
    }
}

fn atoms(p: &WeightedSpectrum) -> Result<Vec<f64>> {
    p.atoms(ATOM_LIMIT)
        .ok_or_else(|| Error::InvalidInput(format!("spectrum has more than {ATOM_LIMIT} atoms")))
}

/// Total mass `P_i` of each bucket.
pub fn bucket_masses(p: &WeightedSpectrum, pm: &PartitionMap) -> Result<Vec<f64>> {
    let atoms = atoms(p)?;
    if atoms.len() != pm.assignment.len() {
        return Err(Error::InvalidPartition(format!(
            "partition covers {} atoms but the spectrum has {}",
            pm.assignment.len(),
            atoms.len()
        )));
    }
    let mut sums = vec![CompensatedSum::new(); pm.buckets as usize];
    for (&v, &b) in atoms.iter().zip(&pm.assignment) {
        sums[b as usize].add(v);
    }
    Ok(sums.iter().map(|s| s.value()).collect())
}

/// `Σ √(P_i / M)`.
fn overlap(masses: &[f64]) -> f64 {
    let m = masses.len() as f64;
    masses.iter().map(|&pi| (pi / m).sqrt()).collect::<CompensatedSum>().value()
}

/// `ε = 1 - Σ √(P_i/M)`, half the squared Hellinger distance to uniform.
pub fn hellinger_epsilon(p: &WeightedSpectrum, pm: &PartitionMap) -> Result<f64> {
    let masses = bucket_masses(p, pm)?;
    Ok((1.0 - overlap(&masses)).clamp(0.0, 1.0))
}

/// `D(p_M ‖ P) = -ln M - (1/M) Σ ln P_i`, the divergence of the uniform
/// distribution on `M` points from the bucket distribution.
pub fn kl_deficit(p: &WeightedSpectrum, pm: &PartitionMap) -> Result<f64> {
    let masses = bucket_masses(p, pm)?;
    let m = masses.len() as f64;
    let ln_sum: f64 = masses.iter().map(|pi| pi.ln()).collect::<CompensatedSum>().value();
    Ok((-m.ln() - ln_sum / m).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Load(f64, u64);

impl Eq for Load {}

impl PartialOrd for Load {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Load {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

/// Longest-processing-time assignment: atoms in descending order, each to
/// the currently lightest bucket, lowest index on ties.
pub fn greedy_partition(p: &WeightedSpectrum, m: u64) -> Result<PartitionMap> {
    let atoms = atoms(p)?;
    if m == 0 || (atoms.len() as u64) < m {
        return Err(Error::InvalidPartition(format!(
            "cannot fill {m} buckets from {} atoms",
            atoms.len()
        )));
    }
    let mut heap: BinaryHeap<Reverse<Load>> = (0..m).map(|b| Reverse(Load(0.0, b))).collect();
    let mut assignment = Vec::with_capacity(atoms.len());
    for v in atoms {
        let Reverse(Load(load, b)) = heap.pop().expect("m ≥ 1");
        assignment.push(b);
        heap.push(Reverse(Load(load + v, b)));
    }
    PartitionMap::new(m, assignment)
}

/// The identities `(1-ε)² = F` and `2ε - ε² = 1 - F` with
/// `F = (Σ √(P_i/M))²`, and the sandwich `ε ≤ 1 - F ≤ 2ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualityReport {
    pub epsilon: f64,
    pub fidelity: f64,
    /// `(1-ε)² - F`
    pub fidelity_identity_residual: f64,
    /// `(2ε - ε²) - (1 - F)`
    pub failure_identity_residual: f64,
    pub sandwich_holds: bool,
}

pub fn duality_check(p: &WeightedSpectrum, pm: &PartitionMap) -> Result<DualityReport> {
    let masses = bucket_masses(p, pm)?;
    let ov = overlap(&masses);
    let epsilon = 1.0 - ov;
    let fidelity = ov * ov;
    let tol = 1e-12;
    Ok(DualityReport {
        epsilon,
        fidelity,
        fidelity_identity_residual: (1.0 - epsilon).powi(2) - fidelity,
        failure_identity_residual: (2.0 * epsilon - epsilon * epsilon) - (1.0 - fidelity),
        sandwich_holds: epsilon <= 1.0 - fidelity + tol && 1.0 - fidelity <= 2.0 * epsilon + tol,
    })
}

/// `B_KL(ε) = sup{a - ζ(a) | ζ(a) < ε}` on a sampled `ζ`.
pub fn b_kl(curve_zeta: &RateCurve, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::EmptyFeasibleSet(format!(
            "ζ(a) < {eps} has no solutions since ζ ≥ 0"
        )));
    }
    success_exponent_from_curve(curve_zeta, eps, true)
}
