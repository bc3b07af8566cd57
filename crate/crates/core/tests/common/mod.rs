#![allow(dead_code)]

use concentrate_core::WeightedSpectrum;
use proptest::prelude::*;

pub fn normalize(raw: &[(f64, u64)]) -> WeightedSpectrum {
    let total: f64 = raw.iter().map(|(v, m)| v * *m as f64).sum();
    let entries: Vec<(f64, u64)> = raw.iter().map(|(v, m)| (v / total, *m)).collect();
    WeightedSpectrum::from_entries(&entries).unwrap()
}

/// Normalized spectra with up to `distinct` levels of multiplicity up to `mult`.
pub fn spectrum(distinct: usize, mult: u64) -> impl Strategy<Value = WeightedSpectrum> {
    prop::collection::vec((0.05f64..1.0, 1..=mult), 1..=distinct).prop_map(|raw| normalize(&raw))
}

/// Probability vectors of length `lo..=hi`.
pub fn distribution(lo: usize, hi: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..1.0, lo..=hi).prop_map(|raw| {
        let total: f64 = raw.iter().sum();
        raw.iter().map(|v| v / total).collect()
    })
}

pub fn linspace(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    (0..k).map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64).collect()
}
