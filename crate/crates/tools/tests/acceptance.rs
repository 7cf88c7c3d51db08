//! Acceptance suite: one PASS/FAIL line per criterion at the pinned
//! tolerances, with wall-clock runtimes. Exits nonzero on any FAIL.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use so3bethe::action::{
    action_rhs, action_verify, ladder_residuals, specialized_action, zero_mode_action, Specialized,
};
use so3bethe::bethe::{bethe_vector, bethe_vector_ordered, bethe_via_recursion, Method};
use so3bethe::chain::{
    central_z, central_z_closed, crossing_residuals, monodromy, rtt_residual, zero_mode_suite,
};
use so3bethe::gauss::{commutator_suite, identity_suite};
use so3bethe::gl2ref::{sp_corr_test, vacuum_ratio_residual};
use so3bethe::hilbert::{cplx, real, vacuum};
use so3bethe::rmat::{algebra_suite, r_trans_residual};
use so3bethe::spectrum::{be_residual, disc_seeds, onshell_verify, solve_be, NewtonOptions};
use so3bethe::{BetheContext, ChainSpec, Result, C64};
use so3bethe_tools::commands::scalar_samples;
use so3bethe_tools::sample::{
    random_chain, random_params, random_point, random_point_avoiding, random_probe, rng,
};

const SEED: u64 = 20261015;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn worst(values: impl IntoIterator<Item = f64>) -> f64 {
    values
        .into_iter()
        .map(|x| if x.is_nan() { f64::INFINITY } else { x })
        .fold(0.0, f64::max)
}

fn norm2(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn r_matrix_identities() -> Result<Outcome> {
    let exact = algebra_suite().max_residual();
    let mut g = rng(SEED);
    let spec = random_chain(&mut g, 1, true);
    let mut trans: f64 = 0.0;
    for _ in 0..100 {
        let u = random_point(&mut g, &spec);
        let v = random_point_avoiding(&mut g, &spec, &[u]);
        trans = trans.max(r_trans_residual(u, v, &spec.rparams())?);
    }
    Ok(outcome(
        exact == 0.0 && trans < 1e-12,
        format!("P/Q algebra {exact:.1e}, R^(t1t2) over 100 pairs {trans:.1e}"),
    ))
}

fn rtt_exactness() -> Result<Outcome> {
    let mut g = rng(SEED + 1);
    let mut res: f64 = 0.0;
    for sites in 1..=3 {
        let spec = random_chain(&mut g, sites, true);
        for _ in 0..20 {
            let u = random_point(&mut g, &spec);
            let v = random_point_avoiding(&mut g, &spec, &[u]);
            res = res.max(rtt_residual(&spec, u, v)?);
        }
    }
    Ok(outcome(
        res < 1e-10,
        format!("max RTT residual {res:.1e} over L = 1, 2, 3"),
    ))
}

fn central_element() -> Result<Outcome> {
    let mut g = rng(SEED + 2);
    let (mut crossing, mut oracle): (f64, f64) = (0.0, 0.0);
    for sites in 1..=3 {
        let spec = random_chain(&mut g, sites, true);
        for _ in 0..5 {
            let u = random_point(&mut g, &spec);
            let (l, r) = crossing_residuals(&spec, u)?;
            crossing = crossing.max(l).max(r);
            // product of single-site crossing scalars, each from a 3×3 brute force
            let mut single = real(1.0);
            for x in spec.xi() {
                single *= central_z(&ChainSpec::new(spec.c(), vec![*x])?, u)?;
            }
            let z = central_z(&spec, u)?;
            let closed = central_z_closed(&spec, u);
            let scale = closed.norm().max(1.0);
            oracle = oracle
                .max((z - closed).norm() / scale)
                .max((single - closed).norm() / scale);
        }
    }
    Ok(outcome(
        crossing < 1e-9 && oracle < 1e-10,
        format!("off-scalar part {crossing:.1e}, z(u) vs closed form and single-site oracle {oracle:.1e}"),
    ))
}

fn gauss_catalogue() -> Result<Outcome> {
    let mut g = rng(SEED + 3);
    let mut res: f64 = 0.0;
    let mut names = 0;
    for _ in 0..10 {
        let spec = random_chain(&mut g, 2, true);
        for _ in 0..10 {
            let u = random_point(&mut g, &spec);
            let v = random_point_avoiding(&mut g, &spec, &[u]);
            let mut report = identity_suite(&spec, u)?;
            report.extend(commutator_suite(&spec, u, v)?);
            names = report.len();
            res = res.max(report.max_residual());
        }
    }
    Ok(outcome(
        res < 1e-8,
        format!("{names} identities on 10 chains x 10 points, max residual {res:.1e}"),
    ))
}

fn zero_modes() -> Result<Outcome> {
    let mut g = rng(SEED + 4);
    let (mut vanishing, mut commutators, mut ladder): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for sites in 1..=3 {
        let spec = random_chain(&mut g, sites, true);
        let mut ctx = BetheContext::new(spec.clone());
        for _ in 0..5 {
            let u = random_point(&mut g, &spec);
            let suite = zero_mode_suite(&spec, u)?;
            vanishing = vanishing.max(suite.get("vanishing_zero_modes").unwrap_or(f64::INFINITY));
            commutators =
                commutators.max(suite.get("zero_mode_commutators").unwrap_or(f64::INFINITY));
            ladder = ladder.max(ladder_residuals(&mut ctx, u)?.max_residual());
        }
    }
    Ok(outcome(
        vanishing == 0.0 && commutators < 1e-10 && ladder < 1e-10,
        format!(
            "vanishing modes {vanishing:.1e}, commutators {commutators:.1e}, ladder {ladder:.1e}"
        ),
    ))
}

fn bethe_vectors() -> Result<Outcome> {
    let mut g = rng(SEED + 5);
    let (mut low, mut pair, mut perm, mut rec): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for sites in 1..=2 {
        let spec = random_chain(&mut g, sites, true);
        let c = spec.c();
        let mut ctx = BetheContext::new(spec.clone());
        for _ in 0..5 {
            let u = random_point(&mut g, &spec);
            let b1 = bethe_vector(&mut ctx, &[u])?.vector;
            let lambda3 = ctx.lambdas(u)?[2];
            let direct = monodromy(&spec, u)?
                .get(2, 3)
                .apply(&vacuum(sites))
                .scale(real(1.0) / lambda3);
            low = low.max(b1.distance(&direct));
            let z = random_point_avoiding(&mut g, &spec, &[]);
            if spec.guard_point(z + c * 0.5).is_ok() {
                let b2 = bethe_vector(&mut ctx, &[z, z + c * 0.5])?.vector;
                let f = ctx.f32(z)?.clone();
                pair = pair.max(b2.distance(&(&f * &f).apply(&vacuum(sites))));
            }
            for r in 0..=3 {
                let us = random_params(&mut g, &spec, r);
                let closed = bethe_vector(&mut ctx, &us)?.vector;
                let reversed: Vec<C64> = us.iter().rev().copied().collect();
                let mut rotated = us.clone();
                rotated.rotate_left(1.min(r));
                for p in [reversed, rotated] {
                    perm = perm.max(bethe_vector_ordered(&mut ctx, &p)?.distance(&closed));
                }
                for which in [Method::Recursion12, Method::Recursion23] {
                    rec = rec.max(
                        bethe_via_recursion(&mut ctx, &us, which)?
                            .vector
                            .distance(&closed),
                    );
                }
            }
        }
    }
    Ok(outcome(
        low < 1e-9 && pair < 1e-9 && perm < 1e-9 && rec < 1e-8,
        format!(
            "B1 {low:.1e}, B2(z,z+c/2) {pair:.1e}, permutations {perm:.1e}, recursions {rec:.1e}"
        ),
    ))
}

fn action_theorem() -> Result<Outcome> {
    let mut g = rng(SEED + 6);
    let (mut main, mut special): (f64, f64) = (0.0, 0.0);
    let mut cases = 0;
    for sites in 1..=2 {
        let spec = random_chain(&mut g, sites, true);
        let mut ctx = BetheContext::new(spec.clone());
        for r in 0..=3 {
            for _ in 0..5 {
                let us = random_params(&mut g, &spec, r);
                let z = random_probe(&mut g, &spec, &us);
                for i in 1..=3 {
                    for j in 1..=3 {
                        main = main.max(action_verify(&mut ctx, i, j, z, &us)?.residual);
                        cases += 1;
                    }
                }
                for which in Specialized::ALL {
                    let (i, j) = which.indices();
                    let rhs = action_rhs(&mut ctx, i, j, z, &us)?.vector;
                    special =
                        special.max(specialized_action(&mut ctx, which, z, &us)?.distance(&rhs));
                }
            }
        }
    }
    Ok(outcome(
        main < 1e-8 && special < 1e-10,
        format!("{cases} cases, partition sum {main:.1e}, specialized forms {special:.1e}"),
    ))
}

fn symmetric_chain() -> ChainSpec {
    ChainSpec::new(real(1.0), vec![real(-0.4), real(0.4)]).expect("valid chain")
}

/// `(c/2)(ω+1)/(ω−1)` for the two nontrivial cube roots of unity.
fn homogeneous_roots(c: C64) -> Vec<C64> {
    (1..=2)
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
            let w = cplx(angle.cos(), angle.sin());
            c * 0.5 * (w + 1.0) / (w - 1.0)
        })
        .collect()
}

/// Known and solved on-shell sets: the symmetric-chain root, the
/// homogeneous L = 3 roots, and the r = 2 solutions on a random chain.
fn onshell_sets() -> Result<Vec<(ChainSpec, Vec<C64>)>> {
    let mut sets = vec![(symmetric_chain(), vec![real(0.0)])];
    let homogeneous = ChainSpec::homogeneous(3, real(1.0), real(0.0))?;
    for u in homogeneous_roots(real(1.0)) {
        sets.push((homogeneous.clone(), vec![u]));
    }
    let spec = random_chain(&mut rng(SEED + 7), 2, false);
    for set in solve_be(
        &spec,
        2,
        &disc_seeds(&spec, 2, 24),
        &NewtonOptions::default(),
    )? {
        sets.push((spec.clone(), set.roots));
    }
    Ok(sets)
}

fn zero_mode_action_check() -> Result<Outcome> {
    let mut g = rng(SEED + 8);
    let mut offshell: f64 = 0.0;
    for sites in 1..=2 {
        let spec = random_chain(&mut g, sites, true);
        let mut ctx = BetheContext::new(spec.clone());
        for r in 0..=3 {
            for _ in 0..3 {
                let us = random_params(&mut g, &spec, r);
                offshell = offshell.max(zero_mode_action(&mut ctx, &us)?.residual);
            }
        }
    }
    let mut annihilation: f64 = 0.0;
    let sets = onshell_sets()?;
    for (spec, roots) in &sets {
        let mut ctx = BetheContext::new(spec.clone());
        let action = zero_mode_action(&mut ctx, roots)?;
        annihilation = annihilation.max(action.lhs.norm() / ctx.bethe(roots)?.norm());
    }
    Ok(outcome(
        offshell < 1e-8 && annihilation < 1e-8,
        format!(
            "off-shell formula {offshell:.1e}, annihilation on {} on-shell sets {annihilation:.1e}",
            sets.len()
        ),
    ))
}

fn onshell_spectrum() -> Result<Outcome> {
    let mut g = rng(SEED + 9);
    let sets = onshell_sets()?;
    let (mut be, mut eigen, mut ed, mut poles): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for (spec, roots) in &sets {
        be = be.max(norm2(&be_residual(spec, roots)?));
        let points: Vec<C64> = (0..5).map(|_| random_probe(&mut g, spec, roots)).collect();
        let mut ctx = BetheContext::new(spec.clone());
        let report = onshell_verify(&mut ctx, roots, &points)?;
        eigen = eigen.max(worst(report.eigen_residuals.iter().copied()));
        ed = ed.max(worst(report.spectrum_distances.iter().copied()));
        poles = poles.max(worst(report.pole_residues.iter().copied()));
    }
    // the two known closed-form sets must be among those checked
    let known = be_residual(&symmetric_chain(), &[real(0.0)])?;
    Ok(outcome(
        be < 1e-10 && eigen < 1e-8 && ed < 1e-8 && poles < 1e-8 && norm2(&known) < 1e-10,
        format!(
            "{} sets: BE {be:.1e}, eigenvector {eigen:.1e}, ED match {ed:.1e}, pole residues {poles:.1e}",
            sets.len()
        ),
    ))
}

fn scalar_products() -> Result<Outcome> {
    let mut g = rng(SEED + 10);
    let spec = random_chain(&mut g, 2, false);
    let vacuum_match = vacuum_ratio_residual(
        &spec,
        &(0..10)
            .map(|_| random_point(&mut g, &spec))
            .collect::<Vec<_>>(),
    )?;
    let mut pass = vacuum_match < 1e-12;
    let mut parts = vec![format!("vacuum ratio {vacuum_match:.1e}")];
    for r in 0..=2 {
        let samples = scalar_samples(&spec, r, 20, &mut g);
        let report = sp_corr_test(&spec, r, &samples)?;
        pass &= report.rho_spread < 1e-6;
        let ratio = report.two_pow_minus_r_ratio;
        parts.push(format!(
            "r={r}: spread {:.1e}, rho {:.6}, rho/2^-r {:.6} (value check, not gated)",
            report.rho_spread, report.rho_mean.re, ratio.re
        ));
    }
    Ok(outcome(pass, parts.join("; ")))
}

fn main() -> ExitCode {
    type Check = fn() -> Result<Outcome>;
    let criteria: [(&str, Check, Duration); 10] = [
        (
            "R-matrix identities",
            r_matrix_identities,
            Duration::from_secs(1),
        ),
        ("RTT exactness", rtt_exactness, Duration::from_secs(5)),
        ("central element", central_element, Duration::from_secs(60)),
        (
            "Gauss identity catalogue",
            gauss_catalogue,
            Duration::from_secs(60),
        ),
        ("zero modes", zero_modes, Duration::from_secs(60)),
        (
            "Bethe vector construction",
            bethe_vectors,
            Duration::from_secs(60),
        ),
        ("action theorem", action_theorem, Duration::from_secs(60)),
        (
            "zero-mode action",
            zero_mode_action_check,
            Duration::from_secs(60),
        ),
        (
            "on-shell spectrum",
            onshell_spectrum,
            Duration::from_secs(60),
        ),
        (
            "scalar-product correspondence",
            scalar_products,
            Duration::from_secs(60),
        ),
    ];
    let mut failed = 0;
    for (n, (name, check, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let (pass, detail) = match result {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let in_time = elapsed <= *budget;
        let verdict = if pass && in_time { "PASS" } else { "FAIL" };
        if verdict == "FAIL" {
            failed += 1;
        }
        println!(
            "criterion {:>2} {verdict}: {name}: {detail} [{:.2} s, budget {} s]",
            n + 1,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
