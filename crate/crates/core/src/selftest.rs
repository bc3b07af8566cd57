//! A seeded run of the library's main invariants, used by the command-line
//! `selftest` subcommand.

use crate::asymptotics::{
    dflec_regime_boundary, h_infinity, profile_from_spectrum, rate_constant, rate_success_exponent_dflec,
    rate_success_exponent_pflec, zeta_asymptotic, zeta_c_asymptotic, RenyiProfile,
};
use crate::info_spectrum::{finite_quantities, iid_pair, k_n, PairedSpectrum};
use crate::large_deviations::{bernoulli_kl, rate_function, tail_exponents, Discrete, FromProfile};
use crate::majorization::majorizes;
use crate::numeric::Extended;
use crate::protocols::{dflec_fidelity_oracle, dflec_optimizer, failure_function, pflec_failure_oracle};
use crate::randomness::{duality_check, PartitionMap};
use crate::spectra::{iid_product, WeightedSpectrum};
use crate::thermal::{profile_from_partition, PartitionFunction};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Outcome of one invariant family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfCheck {
    pub name: &'static str,
    pub cases: usize,
    pub passed: bool,
    pub worst: f64,
}

/// A random normalized spectrum with between 1 and `max_distinct` distinct
/// values, each with multiplicity up to `max_mult`.
pub fn random_spectrum<R: Rng>(rng: &mut R, max_distinct: usize, max_mult: u64) -> WeightedSpectrum {
    let k = rng.gen_range(1..=max_distinct);
    let raw: Vec<(f64, u64)> = (0..k)
        .map(|_| (rng.gen_range(0.05..1.0), rng.gen_range(1..=max_mult)))
        .collect();
    let total: f64 = raw.iter().map(|(v, m)| v * *m as f64).sum();
    let entries: Vec<(f64, u64)> = raw.iter().map(|(v, m)| (v / total, *m)).collect();
    WeightedSpectrum::from_entries(&entries).expect("normalized by construction")
}

/// A random probability vector of length `d` with entries bounded away
/// from zero.
pub fn random_distribution<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..d).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|v| v / total).collect()
}

struct Tally {
    name: &'static str,
    cases: usize,
    worst: f64,
    passed: bool,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Tally {
            name,
            cases: 0,
            worst: 0.0,
            passed: true,
        }
    }

    /// Records an error magnitude against its tolerance.
    fn error(&mut self, err: f64, tol: f64) {
        self.cases += 1;
        self.worst = self.worst.max(err);
        if !(err <= tol) {
            self.passed = false;
        }
    }

    fn truth(&mut self, ok: bool) {
        self.error(if ok { 0.0 } else { 1.0 }, 0.5);
    }

    fn finish(self) -> SelfCheck {
        SelfCheck {
            name: self.name,
            cases: self.cases,
            passed: self.passed,
            worst: self.worst,
        }
    }
}

/// Runs every check; deterministic for a given seed.
pub fn run(seed: u64) -> Vec<SelfCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    let mut t = Tally::new("failure_function_matches_oracle");
    for _ in 0..200 {
        let sp = random_spectrum(&mut rng, 6, 3);
        let x = rng.gen_range(0.0..sp.max_value() * 1.2);
        let oracle = pflec_failure_oracle(&sp, x).unwrap_or(f64::NAN);
        t.error((failure_function(&sp, x) - oracle).abs(), 1e-12);
    }
    out.push(t.finish());

    let mut t = Tally::new("dflec_dominates_oracle_and_majorizes");
    for _ in 0..40 {
        let sp = random_spectrum(&mut rng, 4, 2);
        let dim = sp.dimension_u64().unwrap_or(1);
        let size = rng.gen_range(1..=dim);
        match (dflec_optimizer(&sp, size), dflec_fidelity_oracle(&sp, size, 300, rng.gen())) {
            (Ok(opt), Ok(oracle)) => {
                t.error((oracle - opt.report.fidelity).max(0.0), 1e-9);
                t.truth(majorizes(&opt.optimizer, &sp));
            }
            _ => t.truth(false),
        }
    }
    out.push(t.finish());

    let mut t = Tally::new("complement_identity");
    for _ in 0..20 {
        let base = WeightedSpectrum::from_values(&random_distribution(&mut rng, 3)).unwrap();
        let n = rng.gen_range(2..30);
        let sp = iid_product(&base, n).unwrap();
        let a = rng.gen_range(0.0..2.0);
        let lhs = 1.0 - k_n(&sp, n, a);
        let rhs = (-(n as f64) * finite_quantities(&sp, n, a).zeta_n.to_f64()).exp();
        t.error((lhs - rhs).abs(), 1e-12);
    }
    out.push(t.finish());

    let mut t = Tally::new("profile_convexity_and_ordering");
    for _ in 0..20 {
        let p = profile_from_spectrum(&random_spectrum(&mut rng, 5, 3));
        for i in 0..40 {
            t.error((-p.d2psi(0.1 * i as f64)).max(0.0), 1e-8);
        }
        let (h_minus, h_plus) = rate_constant(&p);
        let tol = 1e-9;
        t.truth(h_infinity(&p) <= h_minus + tol && h_minus <= h_plus + tol && h_plus <= -p.dpsi(0.0) + tol);
    }
    out.push(t.finish());

    let mut t = Tally::new("zeta_matches_tail_exponents");
    for _ in 0..10 {
        let p = profile_from_spectrum(&WeightedSpectrum::from_values(&random_distribution(&mut rng, 3)).unwrap());
        let mgf = FromProfile { profile: p.clone() };
        let (lo, hi) = (h_infinity(&p), -p.dpsi(0.0));
        for i in 0..20 {
            let a = lo + (hi - lo) * (i as f64 + 0.5) / 20.0;
            let Ok(tails) = tail_exponents(&mgf, a) else {
                t.truth(false);
                continue;
            };
            t.error((tails.upper_ge.to_f64() - zeta_asymptotic(&p, a).value).abs(), 1e-8);
            let zc = zeta_c_asymptotic(&p, a);
            t.error(
                match (zc, tails.lower_le) {
                    (Extended::Infinite, Extended::Infinite) => 0.0,
                    (Extended::Finite(x), Extended::Finite(y)) => (x - y).abs(),
                    _ => f64::INFINITY,
                },
                1e-8,
            );
        }
    }
    out.push(t.finish());

    let mut t = Tally::new("dflec_exponent_regimes");
    for _ in 0..20 {
        let p = profile_from_spectrum(&WeightedSpectrum::from_values(&random_distribution(&mut rng, 3)).unwrap());
        let rs = dflec_regime_boundary(&p);
        if rs < 0.0 {
            continue;
        }
        let left = rate_success_exponent_pflec(&p, rs).unwrap_or(f64::NAN);
        t.error((left - (2.0 * p.psi(0.5) + rs)).abs(), 1e-9);
        let r = rs + 0.05;
        let d = rate_success_exponent_dflec(&p, r).unwrap_or(f64::NAN);
        let q = rate_success_exponent_pflec(&p, r).unwrap_or(f64::NAN);
        t.truth(d > q);
    }
    out.push(t.finish());

    let mut t = Tally::new("thermal_matches_direct_profile");
    for _ in 0..10 {
        let e = rng.gen_range(-2.0..2.0);
        let beta0 = rng.gen_range(0.1..2.0);
        let pf = PartitionFunction::levels(vec![(0.0, 1.0), (e, 1.0)]).unwrap();
        let thermal = profile_from_partition(&pf, beta0).unwrap();
        let q = 1.0 / (1.0 + (-beta0 * e).exp());
        let direct = profile_from_spectrum(&WeightedSpectrum::from_values(&[1.0 - q, q]).unwrap());
        for i in 0..50 {
            let s = 0.08 * i as f64;
            t.error((thermal.psi(s) - direct.psi(s)).abs(), 1e-12);
        }
    }
    out.push(t.finish());

    let mut t = Tally::new("randomness_duality");
    for _ in 0..200 {
        let d = rng.gen_range(1..=8usize);
        let p = WeightedSpectrum::from_values(&random_distribution(&mut rng, d)).unwrap();
        let dim = p.dimension_u64().unwrap() as usize;
        let m = rng.gen_range(1..=dim as u64);
        let mut assignment: Vec<u64> = (0..m).collect();
        assignment.extend((m as usize..dim).map(|_| rng.gen_range(0..m)));
        let pm = PartitionMap::new(m, assignment).unwrap();
        match duality_check(&p, &pm) {
            Ok(r) => {
                t.error(r.fidelity_identity_residual.abs(), 1e-12);
                t.error(r.failure_identity_residual.abs(), 1e-12);
                t.truth(r.sandwich_holds);
            }
            Err(_) => t.truth(false),
        }
    }
    out.push(t.finish());

    let mut t = Tally::new("le31_every_n");
    for _ in 0..20 {
        let rho = random_distribution(&mut rng, 3);
        let sigma: Vec<f64> = (0..3).map(|_| rng.gen_range(0.05..2.0)).collect();
        for n in [1, 5, 10, 20] {
            let pair = iid_pair(&rho, &sigma, n).unwrap();
            for i in 0..10 {
                let a = -1.0 + 0.25 * i as f64;
                let margin = pair.quantities(n, a).le31_margin.to_f64();
                t.error((-margin).max(0.0), 0.0);
            }
        }
    }
    let base = WeightedSpectrum::from_values(&[0.75, 0.25]).unwrap();
    let sp = iid_product(&base, 16).unwrap();
    let pair = PairedSpectrum::with_sqrt_sigma(&sp);
    for i in 1..40 {
        let a = 0.03 * i as f64;
        let (x, y) = (pair.quantities(16, a).eta, finite_quantities(&sp, 16, 2.0 * a).zeta_c_half_n);
        t.truth(x == y);
    }
    out.push(t.finish());

    let mut t = Tally::new("bernoulli_rate_function_is_kl");
    for _ in 0..50 {
        let q = rng.gen_range(0.05..0.95);
        let x = rng.gen_range(0.01..0.99);
        let b = Discrete::bernoulli(q).unwrap();
        t.error((rate_function(&b, x).to_f64() - bernoulli_kl(x, q)).abs(), 1e-8);
    }
    out.push(t.finish());

    out
}
