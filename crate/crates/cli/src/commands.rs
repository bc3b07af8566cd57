use crate::error::CliError;
use crate::grid::Grid;
use crate::io::{emit, print_json, read_json};
use crate::{
    Cli, Command, Formula, LdpArgs, MajorizeArgs, ProtocolArgs, RandomnessArgs, RatesArgs, SpectrumRatesArgs,
    ThermalArgs,
};
use concentrate_core::asymptotics::{
    profile_from_spectrum, rate_constant, rate_failure_exponent, rate_success_exponent_dflec,
    rate_success_exponent_pflec, zeta_asymptotic, zeta_c_asymptotic,
};
use concentrate_core::info_spectrum::{fit_rate, quantity_n, Quantity};
use concentrate_core::large_deviations::{rate_function, slope_constants, tail_exponents, MgfSpec, SlopeConstants};
use concentrate_core::majorization::majorization_check;
use concentrate_core::protocols::{
    dflec_fidelity_oracle, dflec_optimizer, min_failure_for_size, optimal_pflec, ProtocolReport,
};
use concentrate_core::randomness::{
    duality_check, greedy_partition, hellinger_epsilon, kl_deficit, PartitionInput, PartitionMap,
};
use concentrate_core::spectra::{iid_product, SpectrumInput};
use concentrate_core::thermal::{self, thermal_rates, ThermalRates};
use concentrate_core::{selftest, Error, Extended, WeightedSpectrum};
use rayon::prelude::*;
use serde::Serialize;
use std::path::Path;

/// Output unit for rates and exponents.
#[derive(Debug, Clone, Copy)]
struct Units {
    bits: bool,
}

impl Units {
    fn rate(self, x: f64) -> f64 {
        if self.bits {
            x / std::f64::consts::LN_2
        } else {
            x
        }
    }

    fn ext(self, x: Extended) -> Extended {
        x.scale(self.rate(1.0))
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let units = Units { bits: cli.bits };
    match &cli.command {
        Command::Protocol(args) => protocol(args, cli.seed),
        Command::Majorize(args) => majorize(args),
        Command::SpectrumRates(args) => spectrum_rates(args, units),
        Command::Rates(args) => rates(args, units),
        Command::Thermal(args) => thermal_cmd(args, units),
        Command::Ldp(args) => ldp(args, units),
        Command::Randomness(args) => randomness(args, units),
        Command::Selftest => run_selftest(cli.seed),
    }
}

fn load_spectrum(path: &Path) -> Result<WeightedSpectrum, CliError> {
    Ok(read_json::<SpectrumInput>(path)?.build()?)
}

fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    Ok(Grid::parse(text)?.values())
}

#[derive(Debug, Serialize)]
struct SweepRow {
    x: f64,
    size: u64,
    failure: f64,
    fidelity: f64,
}

#[derive(Debug, Serialize)]
struct SizeReport {
    size: u64,
    pflec: ProtocolReport,
    dflec: ProtocolReport,
    dflec_kept: u64,
    dflec_flat_level: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    dflec_oracle_fidelity: Option<f64>,
}

fn protocol(args: &ProtocolArgs, seed: u64) -> Result<(), CliError> {
    let sp = load_spectrum(&args.spectrum)?;
    if let Some(x) = args.x {
        let r = optimal_pflec(&sp, x)?;
        return match &args.csv {
            Some(path) => crate::io::write_csv(
                path,
                &[SweepRow {
                    x,
                    size: r.size,
                    failure: r.failure,
                    fidelity: r.fidelity,
                }],
            ),
            None => print_json(&r),
        };
    }
    if let Some(size) = args.size {
        let opt = dflec_optimizer(&sp, size)?;
        let oracle = if args.oracle {
            Some(dflec_fidelity_oracle(&sp, size, 2000, seed)?)
        } else {
            None
        };
        return print_json(&SizeReport {
            size,
            pflec: min_failure_for_size(&sp, size)?,
            dflec: opt.report,
            dflec_kept: opt.kept,
            dflec_flat_level: opt.flat_level,
            dflec_oracle_fidelity: oracle,
        });
    }
    let xs = parse_grid(args.sweep.as_deref().expect("clap enforces one mode"))?;
    let rows = xs
        .par_iter()
        .map(|&x| {
            optimal_pflec(&sp, x).map(|r| SweepRow {
                x,
                size: r.size,
                failure: r.failure,
                fidelity: r.fidelity,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    emit(&args.csv, &rows)
}

fn majorize(args: &MajorizeArgs) -> Result<(), CliError> {
    let source = load_spectrum(&args.source)?;
    let target = load_spectrum(&args.target)?;
    let v = majorization_check(&target, &source);
    if v.holds {
        println!("convertible: target majorizes source (min prefix margin {:e})", v.worst_margin);
    } else {
        let k = v.first_violation.map(|k| k.to_string()).unwrap_or_else(|| "?".into());
        println!(
            "not convertible: target prefix sum falls short at k = {k} (min prefix margin {:e})",
            v.worst_margin
        );
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct QuantityRow {
    n: u32,
    a: f64,
    quantity: &'static str,
    value: Extended,
}

#[derive(Debug, Serialize)]
struct FitRow {
    a: f64,
    quantity: &'static str,
    slope: Extended,
    intercept: Option<f64>,
    residual: Option<f64>,
}

fn spectrum_rates(args: &SpectrumRatesArgs, units: Units) -> Result<(), CliError> {
    let base = load_spectrum(&args.iid)?;
    let ns = Grid::parse(&args.n)?.integers()?;
    let a_grid = parse_grid(&args.a)?;
    let q: Quantity = args.quantity.parse()?;
    let scale = |v: Extended| if q == Quantity::K { v } else { units.ext(v) };

    let per_n = ns
        .par_iter()
        .map(|&n| {
            let sp = iid_product(&base, n)?;
            Ok((n, a_grid.iter().map(|&a| quantity_n(&sp, n, a, q)).collect::<Vec<_>>()))
        })
        .collect::<Result<Vec<_>, Error>>()?;

    if !args.fit {
        let rows: Vec<QuantityRow> = per_n
            .iter()
            .flat_map(|(n, values)| {
                a_grid.iter().zip(values).map(move |(&a, &v)| QuantityRow {
                    n: *n,
                    a,
                    quantity: q.name(),
                    value: scale(v),
                })
            })
            .collect();
        return emit(&args.csv, &rows);
    }

    let mut rows = Vec::with_capacity(a_grid.len());
    for (i, &a) in a_grid.iter().enumerate() {
        let series: Vec<(u32, Extended)> = per_n.iter().map(|(n, v)| (*n, v[i])).collect();
        rows.push(match fit_rate(&series) {
            Ok(est) => FitRow {
                a,
                quantity: q.name(),
                slope: scale(Extended::Finite(est.slope)),
                intercept: Some(est.intercept),
                residual: Some(est.residual),
            },
            Err(Error::InfiniteQuantity { .. }) => FitRow {
                a,
                quantity: q.name(),
                slope: Extended::Infinite,
                intercept: None,
                residual: None,
            },
            Err(e) => return Err(e.into()),
        });
    }
    emit(&args.csv, &rows)
}

#[derive(Debug, Serialize)]
struct FormulaRow {
    formula: &'static str,
    x: f64,
    value: Extended,
}

fn formula_name(f: Formula) -> &'static str {
    match f {
        Formula::Const => "const",
        Formula::Fail => "fail",
        Formula::SuccP => "succ-p",
        Formula::SuccD => "succ-d",
        Formula::Zeta => "zeta",
        Formula::ZetaC => "zeta-c",
    }
}

fn rates(args: &RatesArgs, units: Units) -> Result<(), CliError> {
    let base = load_spectrum(&args.iid)?;
    let p = profile_from_spectrum(&base);
    let xs = match (&args.sweep, args.r.or(args.eps).or(args.a)) {
        (Some(s), _) => parse_grid(s)?,
        (None, Some(x)) => vec![x],
        (None, None) => unreachable!("clap enforces one argument"),
    };
    let eval = |x: f64| -> Result<Extended, Error> {
        Ok(match args.formula {
            Formula::Const => {
                if !(0.0..1.0).contains(&x) {
                    return Err(Error::InvalidParameter {
                        name: "eps",
                        value: x,
                        reason: "must lie in [0, 1)",
                    });
                }
                Extended::Finite(rate_constant(&p).0)
            }
            Formula::Fail => Extended::Finite(rate_failure_exponent(&p, x)?),
            Formula::SuccP => Extended::Finite(rate_success_exponent_pflec(&p, x)?),
            Formula::SuccD => Extended::Finite(rate_success_exponent_dflec(&p, x)?),
            Formula::Zeta => Extended::Finite(zeta_asymptotic(&p, x).value),
            Formula::ZetaC => zeta_c_asymptotic(&p, x),
        })
    };
    let rows = xs
        .par_iter()
        .map(|&x| {
            eval(x).map(|v| FormulaRow {
                formula: formula_name(args.formula),
                x,
                value: units.ext(v),
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    if args.sweep.is_none() && args.csv.is_none() {
        return print_json(&rows[0]);
    }
    emit(&args.csv, &rows)
}

fn scaled_thermal(r: ThermalRates, units: Units) -> ThermalRates {
    ThermalRates {
        b_const: units.rate(r.b_const),
        h_minus: units.rate(r.h_minus),
        h_plus: units.rate(r.h_plus),
        failure_exponent: units.rate(r.failure_exponent),
        success_exponent_pflec: units.rate(r.success_exponent_pflec),
        success_exponent_dflec: units.rate(r.success_exponent_dflec),
        r_half: units.rate(r.r_half),
        ..r
    }
}

fn thermal_cmd(args: &ThermalArgs, units: Units) -> Result<(), CliError> {
    let pf = read_json::<thermal::PartitionInput>(&args.levels)?.build()?;
    let rs = match (&args.sweep, args.r) {
        (Some(s), _) => parse_grid(s)?,
        (None, Some(r)) => vec![r],
        (None, None) => unreachable!("clap enforces one argument"),
    };
    let rows = rs
        .par_iter()
        .map(|&r| thermal_rates(&pf, args.beta0, r).map(|t| scaled_thermal(t, units)))
        .collect::<Result<Vec<_>, Error>>()?;
    if args.sweep.is_none() && args.csv.is_none() {
        return print_json(&rows[0]);
    }
    emit(&args.csv, &rows)
}

#[derive(Debug, Serialize)]
struct LdpRow {
    a: f64,
    rate: Extended,
    upper_ge: Extended,
    upper_gt: Extended,
    lower_le: Extended,
    lower_lt: Extended,
    domain_limited: bool,
}

#[derive(Debug, Serialize)]
struct LdpReport {
    slopes: SlopeConstants,
    #[serde(flatten)]
    row: LdpRow,
}

fn ldp(args: &LdpArgs, units: Units) -> Result<(), CliError> {
    let mgf = read_json::<MgfSpec>(&args.mgf)?.build()?;
    let slopes = slope_constants(mgf.as_ref())?;
    let xs = match (&args.sweep, args.a) {
        (Some(s), _) => parse_grid(s)?,
        (None, Some(a)) => vec![a],
        (None, None) => unreachable!("clap enforces one argument"),
    };
    let rows = xs
        .par_iter()
        .map(|&a| {
            let t = tail_exponents(mgf.as_ref(), a)?;
            Ok(LdpRow {
                a,
                rate: units.ext(rate_function(mgf.as_ref(), a)),
                upper_ge: units.ext(t.upper_ge),
                upper_gt: units.ext(t.upper_gt),
                lower_le: units.ext(t.lower_le),
                lower_lt: units.ext(t.lower_lt),
                domain_limited: t.domain_limited,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    if args.sweep.is_none() && args.csv.is_none() {
        let row = rows.into_iter().next().expect("one point");
        return print_json(&LdpReport { slopes, row });
    }
    emit(&args.csv, &rows)
}

#[derive(Debug, Serialize)]
struct RandomnessReport {
    #[serde(rename = "M")]
    m: u64,
    epsilon: f64,
    kl_deficit: f64,
    fidelity: f64,
    dflec_fidelity: f64,
    fidelity_identity_residual: f64,
    failure_identity_residual: f64,
    sandwich_holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    map: Option<PartitionInput>,
}

fn randomness(args: &RandomnessArgs, units: Units) -> Result<(), CliError> {
    let sp = load_spectrum(&args.spectrum)?;
    let (pm, show) = if args.greedy {
        (greedy_partition(&sp, args.m)?, true)
    } else if let Some(path) = &args.map {
        (read_json::<PartitionInput>(path)?.build()?, false)
    } else if sp.dimension_u64() == Some(args.m) {
        (PartitionMap::singletons(args.m)?, false)
    } else {
        return Err(CliError::Input(
            "give --greedy or --map unless M equals the dimension of the spectrum".into(),
        ));
    };
    if pm.buckets() != args.m {
        return Err(CliError::Input(format!("map has {} buckets but --M is {}", pm.buckets(), args.m)));
    }
    let duality = duality_check(&sp, &pm)?;
    let report = RandomnessReport {
        m: args.m,
        epsilon: hellinger_epsilon(&sp, &pm)?,
        kl_deficit: units.rate(kl_deficit(&sp, &pm)?),
        fidelity: duality.fidelity,
        dflec_fidelity: dflec_optimizer(&sp, args.m)?.report.fidelity,
        fidelity_identity_residual: duality.fidelity_identity_residual,
        failure_identity_residual: duality.failure_identity_residual,
        sandwich_holds: duality.sandwich_holds,
        map: show.then(|| pm.to_input()),
    };
    print_json(&report)
}

fn run_selftest(seed: u64) -> Result<(), CliError> {
    let checks = selftest::run(seed);
    for c in &checks {
        println!(
            "{} {:<40} cases={:<5} worst={:.3e}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.cases,
            c.worst
        );
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        return Err(CliError::Failed(format!("{failed} of {} checks failed", checks.len())));
    }
    println!("all {} checks passed (seed {seed})", checks.len());
    Ok(())
}
