//! The six subcommands. Each returns an exit code and a JSON report;
//! nothing here prints.

use rayon::prelude::*;
use serde_json::{json, Map, Value};
use so3bethe::action::{action_rhs, action_verify, specialized_action, Specialized};
use so3bethe::bethe::{bethe_via_recursion, Method};
use so3bethe::chain::{
    central_z, central_z_closed, crossing_residuals, monodromy, rtt_residual, vacuum_eigenvalues,
    vacuum_eigenvalues_direct, zero_mode_suite,
};
use so3bethe::gauss::{commutator_suite, identity_suite};
use so3bethe::gl2ref::sp_corr_test;
use so3bethe::rmat::{algebra_suite, r_trans_residual};
use so3bethe::spectrum::{
    disc_seeds, merge_solutions, onshell_verify, solve_from_seed, tau_eigenvalue, transfer_matrix,
    BetheSystem, NewtonOptions, RootSet,
};
use so3bethe::{BetheContext, ChainSpec, Error, Report, C64};

use crate::config::{from_c64, from_slice, to_c64, ChainConfig, ConfigError, RunConfig, SCHEMA};
use crate::sample::{self, random_params, random_point, random_point_avoiding, random_probe};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Default residual tolerance of the identity suites.
pub const DEFAULT_TOL: f64 = 1e-8;
/// Relative spread below which the scalar-product ratio counts as constant.
pub const SCALAR_SPREAD_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Check,
    Bethe,
    Act,
    Solve,
    Spectrum,
    Scalar,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Bethe => "bethe",
            Command::Act => "act",
            Command::Solve => "solve",
            Command::Spectrum => "spectrum",
            Command::Scalar => "scalar",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub report: Value,
}

enum Failure {
    Config(ConfigError),
    Chain(Error),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Chain(e)
    }
}

/// Errors caused by the input rather than by a failed identity.
fn is_usage_error(e: &Error) -> bool {
    matches!(
        e,
        Error::InvalidChain(_)
            | Error::Reality
            | Error::Degenerate { .. }
            | Error::Cardinality { .. }
            | Error::Index { .. }
            | Error::Pole { .. }
    )
}

pub fn run(command: Command, config: &RunConfig) -> Outcome {
    let mut header = Map::new();
    header.insert("schema".into(), json!(SCHEMA));
    header.insert("command".into(), json!(command.name()));
    header.insert("seed".into(), json!(config.seed()));
    let result = config.validate().map_err(Failure::from).and_then(|()| {
        let mut rng = sample::rng(config.seed());
        let spec = config.chain(&mut rng)?;
        header.insert("chain".into(), json!(ChainConfig::describe(&spec)));
        let tol = config.tol.unwrap_or(match command {
            Command::Scalar => SCALAR_SPREAD_TOL,
            _ => DEFAULT_TOL,
        });
        header.insert("tol".into(), json!(tol));
        match command {
            Command::Check => check(config, &spec, tol, &mut rng),
            Command::Bethe => bethe(config, &spec, tol, &mut rng),
            Command::Act => act(config, &spec, tol, &mut rng),
            Command::Solve => solve(config, &spec, tol, &mut rng),
            Command::Spectrum => spectrum(config, &spec, tol, &mut rng),
            Command::Scalar => scalar(config, &spec, tol, &mut rng),
        }
    });
    let (code, body) = match result {
        Ok((pass, body)) => (if pass { EXIT_PASS } else { EXIT_FAIL }, body),
        Err(Failure::Config(e)) => (EXIT_USAGE, json!({ "error": e.to_string() })),
        Err(Failure::Chain(e)) => {
            let code = if is_usage_error(&e) {
                EXIT_USAGE
            } else {
                EXIT_FAIL
            };
            (code, json!({ "error": e.to_string() }))
        }
    };
    if let Value::Object(fields) = body {
        header.extend(fields);
    }
    header.insert("pass".into(), json!(code == EXIT_PASS));
    Outcome {
        code,
        report: Value::Object(header),
    }
}

type Run = Result<(bool, Value), Failure>;

fn report_json(report: &Report, tol: f64) -> Value {
    Value::Array(
        report
            .entries()
            .iter()
            .map(|(name, residual)| json!({ "name": name, "residual": residual, "pass": *residual < tol }))
            .collect(),
    )
}

/// Entry-wise maximum over reports with the same names in the same order.
pub fn merge_max(reports: Vec<Report>) -> Report {
    let mut out = Report::new();
    let mut iter = reports.into_iter();
    let Some(first) = iter.next() else { return out };
    let mut worst: Vec<(String, f64)> = first.entries().to_vec();
    for r in iter {
        for (slot, (_, v)) in worst.iter_mut().zip(r.entries()) {
            slot.1 = slot.1.max(if v.is_nan() { f64::INFINITY } else { *v });
        }
    }
    for (name, v) in worst {
        out.push(name, v);
    }
    out
}

/// The identity catalogue at one pair of points.
pub fn point_suite(spec: &ChainSpec, u: C64, v: C64) -> Result<Report, Error> {
    let mut report = Report::new();
    report.push("R_transposition", r_trans_residual(u, v, &spec.rparams())?);
    report.push("RTT", rtt_residual(spec, u, v)?);
    let (left, right) = crossing_residuals(spec, u)?;
    report.push("crossing_left", left);
    report.push("crossing_right", right);
    let closed = central_z_closed(spec, u);
    report.push(
        "central_element",
        (central_z(spec, u)? - closed).norm() / closed.norm().max(1.0),
    );
    let t = monodromy(spec, u)?;
    let (direct, lower) = vacuum_eigenvalues_direct(&t);
    let lambdas = vacuum_eigenvalues(spec, u)?;
    let vac = (0..3)
        .map(|k| (direct[k] - lambdas[k]).norm() / lambdas[k].norm().max(1.0))
        .fold(lower, f64::max);
    report.push("vacuum_eigenvalues", vac);
    report.extend(zero_mode_suite(spec, u)?);
    report.extend(identity_suite(spec, u)?);
    report.extend(commutator_suite(spec, u, v)?);
    let mut ctx = BetheContext::new(spec.clone());
    let ladder = so3bethe::action::ladder_residuals(&mut ctx, u)?;
    report.extend(ladder);
    Ok(report)
}

/// All named identities, worst case over `samples` random point pairs.
pub fn identity_catalogue(
    spec: &ChainSpec,
    samples: usize,
    rng: &mut impl rand::Rng,
) -> Result<Report, Error> {
    let pairs: Vec<(C64, C64)> = (0..samples.max(1))
        .map(|_| {
            let u = random_point(rng, spec);
            let v = random_point_avoiding(rng, spec, &[u]);
            (u, v)
        })
        .collect();
    let reports: Result<Vec<Report>, Error> = pairs
        .par_iter()
        .map(|&(u, v)| point_suite(spec, u, v))
        .collect();
    let mut out = algebra_suite();
    out.extend(merge_max(reports?));
    Ok(out)
}

fn check(config: &RunConfig, spec: &ChainSpec, tol: f64, rng: &mut impl rand::Rng) -> Run {
    let report = identity_catalogue(spec, config.samples.unwrap_or(3), rng)?;
    let pass = report.passes(tol);
    Ok((
        pass,
        json!({
            "count": report.len(),
            "max_residual": report.max_residual(),
            "failures": report.failures(tol).map(|(n, _)| n.clone()).collect::<Vec<_>>(),
            "identities": report_json(&report, tol),
        }),
    ))
}

fn params_or_draw(
    config: &RunConfig,
    spec: &ChainSpec,
    default_r: usize,
    rng: &mut impl rand::Rng,
) -> Vec<C64> {
    match &config.params {
        Some(p) => p.iter().map(|z| to_c64(*z)).collect(),
        None => random_params(rng, spec, config.r.unwrap_or(default_r)),
    }
}

fn bethe(config: &RunConfig, spec: &ChainSpec, tol: f64, rng: &mut impl rand::Rng) -> Run {
    let params = params_or_draw(config, spec, 2, rng);
    let mut ctx = BetheContext::new(spec.clone());
    let closed = ctx.bethe(&params)?;
    let via12 = bethe_via_recursion(&mut ctx, &params, Method::Recursion12)?.vector;
    let via23 = bethe_via_recursion(&mut ctx, &params, Method::Recursion23)?.vector;
    let reversed: Vec<C64> = params.iter().rev().copied().collect();
    let mut ctx2 = BetheContext::new(spec.clone());
    let permuted = ctx2.bethe(&reversed)?;
    let mut report = Report::new();
    report.push("recursion12_vs_closed", via12.distance(&closed));
    report.push("recursion23_vs_closed", via23.distance(&closed));
    report.push("permutation_symmetry", permuted.distance(&closed));
    let pass = report.passes(tol);
    let vector: Vec<[f64; 2]> = closed.entries().map(|z| from_c64(*z)).collect();
    Ok((
        pass,
        json!({
            "r": params.len(),
            "params": from_slice(&params),
            "norm": closed.norm(),
            "checks": report_json(&report, tol),
            "vector": vector,
        }),
    ))
}

fn act(config: &RunConfig, spec: &ChainSpec, tol: f64, rng: &mut impl rand::Rng) -> Run {
    let (i, j) = (config.i.unwrap_or(1), config.j.unwrap_or(3));
    let params = params_or_draw(config, spec, 1, rng);
    let z = match config.z {
        Some(z) => to_c64(z),
        None => random_probe(rng, spec, &params),
    };
    let mut ctx = BetheContext::new(spec.clone());
    let check = action_verify(&mut ctx, i, j, z, &params)?;
    let mut body = json!({
        "i": i,
        "j": j,
        "z": from_c64(z),
        "params": from_slice(&params),
        "residual": check.residual,
        "n_partitions": check.n_partitions,
        "pruned": check.pruned,
    });
    let mut pass = check.residual < tol;
    if let Some(which) = Specialized::ALL
        .iter()
        .find(|s| s.indices() == (i, j) && **s != Specialized::T12Partition)
    {
        let rhs = action_rhs(&mut ctx, i, j, z, &params)?.vector;
        let closed = specialized_action(&mut ctx, *which, z, &params)?;
        let residual = closed.distance(&rhs);
        pass &= residual < tol;
        body["specialized"] = json!({ "form": which.name(), "residual": residual });
    }
    Ok((pass, body))
}

fn solve_roots(spec: &ChainSpec, r: usize, count: usize) -> Result<Vec<RootSet>, Error> {
    if r == 0 {
        return Ok(vec![RootSet {
            roots: Vec::new(),
            residual: 0.0,
            iterations: 0,
        }]);
    }
    let system = BetheSystem::new(spec.clone(), r);
    let options = NewtonOptions::default();
    let outcomes: Vec<_> = disc_seeds(spec, r, count)
        .par_iter()
        .map(|seed| solve_from_seed(&system, seed, &options))
        .collect();
    merge_solutions(outcomes)
}

fn solve(config: &RunConfig, spec: &ChainSpec, tol: f64, rng: &mut impl rand::Rng) -> Run {
    let r = config.r.unwrap_or(1);
    let count = config.seeds.unwrap_or(24);
    let sets = solve_roots(spec, r, count)?;
    let all: Vec<C64> = sets.iter().flat_map(|s| s.roots.iter().copied()).collect();
    let z = match config.z {
        Some(z) => to_c64(z),
        None => random_probe(rng, spec, &all),
    };
    let spectrum = transfer_matrix(spec, z)?.eigenvalues()?;
    let mut pass = true;
    let mut out = Vec::with_capacity(sets.len());
    for set in &sets {
        let tau = tau_eigenvalue(spec, z, &set.roots)?;
        let (nearest, distance) = spectrum
            .iter()
            .map(|e| (*e, (e - tau).norm() / tau.norm().max(1.0)))
            .fold(
                (tau, f64::INFINITY),
                |best, x| if x.1 < best.1 { x } else { best },
            );
        pass &= distance < tol;
        out.push(json!({
            "roots": from_slice(&set.roots),
            "residual": set.residual,
            "iterations": set.iterations,
            "tau": from_c64(tau),
            "matched_eigenvalue": from_c64(nearest),
            "eigenvalue_distance": distance,
        }));
    }
    Ok((
        pass,
        json!({ "r": r, "seeds": count, "z": from_c64(z), "root_sets": out, "found": sets.len() }),
    ))
}

/// Largest BE residual an input may carry and still count as on shell.
pub const ONSHELL_BE_TOL: f64 = 1e-9;

fn spectrum(config: &RunConfig, spec: &ChainSpec, tol: f64, rng: &mut impl rand::Rng) -> Run {
    let sets: Vec<Vec<C64>> = match &config.params {
        Some(p) => vec![p.iter().map(|z| to_c64(*z)).collect()],
        None => solve_roots(spec, config.r.unwrap_or(1), config.seeds.unwrap_or(24))?
            .into_iter()
            .map(|s| s.roots)
            .collect(),
    };
    let mut ctx = BetheContext::new(spec.clone());
    let mut pass = true;
    let mut out = Vec::with_capacity(sets.len());
    for params in &sets {
        let points: Vec<C64> = match &config.points {
            Some(p) => p.iter().map(|z| to_c64(*z)).collect(),
            None => (0..config.samples.unwrap_or(5))
                .map(|_| random_probe(rng, spec, params))
                .collect(),
        };
        let report = onshell_verify(&mut ctx, params, &points)?;
        let failures = report.failures(tol);
        let on_shell = report.be_residual < ONSHELL_BE_TOL;
        pass &= on_shell && failures.is_empty();
        out.push(json!({
            "params": from_slice(params),
            "be_residual": report.be_residual,
            "on_shell": on_shell,
            "points": from_slice(&points),
            "tau": from_slice(&report.tau),
            "eigen_residuals": report.eigen_residuals,
            "spectrum_distances": report.spectrum_distances,
            "zero_mode": report.zero_mode,
            "pole_residues": report.pole_residues,
            "failures": failures,
        }));
    }
    Ok((pass, json!({ "states": out })))
}

/// Independent `(ū, v̄)` draws for the ratio test.
pub fn scalar_samples(
    spec: &ChainSpec,
    r: usize,
    count: usize,
    rng: &mut impl rand::Rng,
) -> Vec<(Vec<C64>, Vec<C64>)> {
    (0..count)
        .map(|_| (random_params(rng, spec, r), random_params(rng, spec, r)))
        .collect()
}

fn scalar(config: &RunConfig, spec: &ChainSpec, tol: f64, rng: &mut impl rand::Rng) -> Run {
    if !spec.is_real() {
        return Err(Error::Reality.into());
    }
    let r = config.r.unwrap_or(1);
    let samples = scalar_samples(spec, r, config.samples.unwrap_or(20), rng);
    let report = sp_corr_test(spec, r, &samples)?;
    let pass = report.rho_spread < tol;
    let ratio = report.two_pow_minus_r_ratio;
    Ok((
        pass,
        json!({
            "r": r,
            "samples": report.samples,
            "rho_mean": from_c64(report.rho_mean),
            "rho_spread": report.rho_spread,
            "two_pow_minus_r_ratio": from_c64(ratio),
            "value_check": { "expected": 1.0, "deviation": (ratio - 1.0).norm(), "gated": false },
        }),
    ))
}
