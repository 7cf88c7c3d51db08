//! Transfer matrix, Bethe equations and their Newton solver, the eigenvalue
//! formula, and on-shell checks against exact diagonalisation.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::action::zero_mode_action;
use crate::bethe::BetheContext;
use crate::chain::{monodromy, vacuum_eigenvalues, ChainSpec};
use crate::error::{Error, Result};
use crate::hilbert::{cplx, real, Operator, C64};
use crate::rmat::POLE_TOLERANCE;

/// Roots closer than this to `{ξ_k, ξ_k ± c/2}` or to each other (up to `±c/2`) are rejected.
pub const ROOT_SEPARATION: f64 = 1e-6;
/// Iterates leaving the disc of this many seed radii are abandoned.
pub const ESCAPE_FACTOR: f64 = 100.0;
/// Root sets closer than this (after matching) are the same solution.
pub const DEDUP_TOLERANCE: f64 = 1e-7;

/// `𝒯(z) = Σ_i T_{i,i}(z)`.
pub fn transfer_matrix(spec: &ChainSpec, z: C64) -> Result<Operator> {
    Ok(monodromy(spec, z)?.trace())
}

/// The Bethe equations of a chain at fixed excitation number.
#[derive(Clone, Debug)]
pub struct BetheSystem {
    spec: ChainSpec,
    r: usize,
}

fn log_derivative_f(c: C64, d: C64) -> C64 {
    // d/dd log 𝔣 at separation d
    real(1.0) / (d + c * 0.5) - real(1.0) / d
}

impl BetheSystem {
    pub fn new(spec: ChainSpec, r: usize) -> Self {
        BetheSystem { spec, r }
    }

    pub fn spec(&self) -> &ChainSpec {
        &self.spec
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// `λ₂/λ₃(u) = Π (u−ξ+c/2)/(u−ξ−c/2)`, finite at `u = ξ`.
    pub fn lambda_ratio(&self, u: C64) -> Result<C64> {
        let half = self.spec.c() * 0.5;
        let mut p = real(1.0);
        for x in self.spec.xi() {
            let den = u - x - half;
            if den.norm() < POLE_TOLERANCE {
                return Err(Error::Pole {
                    what: format!("lambda2/lambda3 at {u}"),
                    distance: den.norm(),
                });
            }
            p *= (u - x + half) / den;
        }
        Ok(p)
    }

    fn f(&self, a: C64, b: C64) -> Result<C64> {
        let d = a - b;
        if d.norm() < POLE_TOLERANCE {
            return Err(Error::Pole {
                what: format!("frak_f({a}, {b})"),
                distance: d.norm(),
            });
        }
        Ok((d + self.spec.c() * 0.5) / d)
    }

    /// `λ₂/λ₃(u_i) − 𝔣(u_i,ū_i)/𝔣(ū_i,u_i)` for each `i`.
    pub fn residual(&self, params: &[C64]) -> Result<Vec<C64>> {
        let mut out = Vec::with_capacity(params.len());
        for (i, &ui) in params.iter().enumerate() {
            let mut forward = real(1.0);
            let mut backward = real(1.0);
            for (s, &us) in params.iter().enumerate() {
                if s != i {
                    forward *= self.f(ui, us)?;
                    backward *= self.f(us, ui)?;
                }
            }
            if backward.norm() < POLE_TOLERANCE {
                return Err(Error::Pole {
                    what: format!("frak_f(u_i, u) at u_i = {ui}"),
                    distance: backward.norm(),
                });
            }
            out.push(self.lambda_ratio(ui)? - forward / backward);
        }
        Ok(out)
    }

    /// `Log ρ_i` with `ρ_i = λ₂/λ₃(u_i) 𝔣(ū_i,u_i)/𝔣(u_i,ū_i)`; zero on shell.
    pub fn log_residual(&self, params: &[C64]) -> Result<DVector<C64>> {
        let mut out = DVector::zeros(params.len());
        for (i, &ui) in params.iter().enumerate() {
            let mut rho = self.lambda_ratio(ui)?;
            for (s, &us) in params.iter().enumerate() {
                if s != i {
                    let den = self.f(ui, us)?;
                    if den.norm() < POLE_TOLERANCE {
                        return Err(Error::Pole {
                            what: format!("frak_f({ui}, {us})"),
                            distance: den.norm(),
                        });
                    }
                    rho *= self.f(us, ui)? / den;
                }
            }
            if rho.norm() < POLE_TOLERANCE {
                return Err(Error::ZeroDenominator {
                    what: format!("log of vanishing ratio at {ui}"),
                });
            }
            out[i] = rho.ln();
        }
        Ok(out)
    }

    /// Analytic Jacobian of [`BetheSystem::log_residual`].
    pub fn jacobian(&self, params: &[C64]) -> DMatrix<C64> {
        let c = self.spec.c();
        let half = c * 0.5;
        let r = params.len();
        let mut jac = DMatrix::zeros(r, r);
        for i in 0..r {
            let ui = params[i];
            let mut diag: C64 = self
                .spec
                .xi()
                .iter()
                .map(|x| real(1.0) / (ui - x + half) - real(1.0) / (ui - x - half))
                .sum();
            for s in 0..r {
                if s == i {
                    continue;
                }
                let pair =
                    log_derivative_f(c, params[s] - ui) + log_derivative_f(c, ui - params[s]);
                diag -= pair;
                jac[(i, s)] = pair;
            }
            jac[(i, i)] = diag;
        }
        jac
    }

    /// Cleared-denominator form `Φ_i = Π_k(u_i−ξ_k+c/2) Π_{s≠i}(u_i−u_s−c/2)
    /// − Π_k(u_i−ξ_k−c/2) Π_{s≠i}(u_i−u_s+c/2)` and its Jacobian. Entire in
    /// the roots, with no attractor at infinity.
    pub fn polynomial_form(&self, params: &[C64]) -> (DVector<C64>, DMatrix<C64>) {
        let half = self.spec.c() * 0.5;
        let r = params.len();
        let mut value = DVector::zeros(r);
        let mut jac = DMatrix::zeros(r, r);
        for i in 0..r {
            let ui = params[i];
            for (sign, shift) in [(1.0, half), (-1.0, -half)] {
                // factors (u_i − w) with w fixed (None) or w = u_s + shift (Some(s))
                let mut factors: Vec<(C64, Option<usize>)> = self
                    .spec
                    .xi()
                    .iter()
                    .map(|x| (ui - x + shift, None))
                    .collect();
                for s in (0..r).filter(|s| *s != i) {
                    factors.push((ui - params[s] - shift, Some(s)));
                }
                let product: C64 = factors.iter().map(|f| f.0).product();
                value[i] += product * sign;
                for (k, f) in factors.iter().enumerate() {
                    let rest: C64 = factors
                        .iter()
                        .enumerate()
                        .filter(|(g, _)| *g != k)
                        .map(|(_, g)| g.0)
                        .product();
                    jac[(i, i)] += rest * sign;
                    if let Some(s) = f.1 {
                        jac[(i, s)] -= rest * sign;
                    }
                }
            }
        }
        (value, jac)
    }

    /// True when a root sits on `{ξ_k, ξ_k ± c/2}` or two roots coincide up to `±c/2`.
    pub fn is_singular(&self, params: &[C64]) -> bool {
        let half = self.spec.c() * 0.5;
        let near = |a: C64, b: C64| (a - b).norm() < ROOT_SEPARATION;
        for (i, &u) in params.iter().enumerate() {
            for x in self.spec.xi() {
                if near(u, *x) || near(u, x + half) || near(u, x - half) {
                    return true;
                }
            }
            for &w in &params[i + 1..] {
                if near(u, w) || near(u, w + half) || near(u, w - half) {
                    return true;
                }
            }
        }
        false
    }
}

/// `λ₂/λ₃(u_i) − 𝔣(u_i,ū_i)/𝔣(ū_i,u_i)`, componentwise.
pub fn be_residual(spec: &ChainSpec, params: &[C64]) -> Result<Vec<C64>> {
    BetheSystem::new(spec.clone(), params.len()).residual(params)
}

fn norm2(v: &[C64]) -> f64 {
    libm::sqrt(v.iter().map(|x| x.norm_sqr()).sum())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonOptions {
    /// Target for the Euclidean norm of [`be_residual`].
    pub tol: f64,
    pub max_iterations: usize,
    /// Step reduction factor of the backtracking line search.
    pub damping: f64,
    pub max_halvings: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol: 1e-10,
            max_iterations: 200,
            damping: 0.5,
            max_halvings: 40,
        }
    }
}

/// A converged solution of the Bethe equations.
#[derive(Clone, Debug, PartialEq)]
pub struct RootSet {
    /// Sorted by `(Re, Im)`.
    pub roots: Vec<C64>,
    /// Euclidean norm of [`be_residual`] at the roots.
    pub residual: f64,
    pub iterations: usize,
}

fn sort_roots(roots: &mut [C64]) {
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

#[derive(Clone, Copy)]
enum Form {
    Log,
    Polynomial,
}

fn newton(
    system: &BetheSystem,
    seed: &[C64],
    options: &NewtonOptions,
    form: Form,
) -> Result<RootSet> {
    let mut u: Vec<C64> = seed.to_vec();
    let mut trace = Vec::new();
    let raw = |u: &[C64]| {
        system
            .residual(u)
            .map(|v| norm2(&v))
            .unwrap_or(f64::INFINITY)
    };
    let merit = |u: &[C64]| match form {
        Form::Log => system
            .log_residual(u)
            .map(|v| v.norm())
            .unwrap_or(f64::INFINITY),
        Form::Polynomial => system.polynomial_form(u).0.norm(),
    };
    let mut current = merit(&u);
    // ρ → 1 as |u| → ∞, so unbounded steps run off to spurious roots at infinity
    let scale = system.spec.max_xi() + 2.0 * system.spec.c().norm();
    for iteration in 0..=options.max_iterations {
        let res = raw(&u);
        trace.push(res);
        if res < options.tol {
            if system.is_singular(&u) {
                return Err(Error::Pole {
                    what: "root set hits the singular set".into(),
                    distance: 0.0,
                });
            }
            sort_roots(&mut u);
            return Ok(RootSet {
                roots: u,
                residual: res,
                iterations: iteration,
            });
        }
        let escaped = u.iter().any(|x| x.norm() > ESCAPE_FACTOR * scale);
        if iteration == options.max_iterations || !current.is_finite() || escaped {
            break;
        }
        let (f, jac) = match form {
            Form::Log => match system.log_residual(&u) {
                Ok(f) => (f, system.jacobian(&u)),
                Err(_) => break,
            },
            Form::Polynomial => system.polynomial_form(&u),
        };
        let mut step = match jac.lu().solve(&(-f)) {
            Some(s) if s.iter().all(|x| x.re.is_finite() && x.im.is_finite()) => s,
            _ => break,
        };
        let length = step.norm();
        if length > scale {
            step *= real(scale / length);
        }
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..=options.max_halvings {
            let trial: Vec<C64> = u.iter().zip(step.iter()).map(|(a, d)| a + d * t).collect();
            let value = merit(&trial);
            if value < current * (1.0 - 1e-4 * t) || (value <= current && raw(&trial) < options.tol)
            {
                u = trial;
                current = value;
                accepted = true;
                break;
            }
            t *= options.damping;
        }
        if !accepted {
            break;
        }
    }
    Err(Error::NoConvergence {
        iterations: trace.len().saturating_sub(1),
        residual: raw(&u),
        trace,
    })
}

/// Damped Newton iteration on `Log ρ` from one starting set; when that
/// stalls or escapes, the same seed is retried on the cleared-denominator
/// form. Convergence is always judged on [`be_residual`].
pub fn solve_from_seed(
    system: &BetheSystem,
    seed: &[C64],
    options: &NewtonOptions,
) -> Result<RootSet> {
    match newton(system, seed, options, Form::Log) {
        Ok(set) => Ok(set),
        Err(first) => match newton(system, seed, options, Form::Polynomial) {
            Ok(set) => Ok(set),
            Err(Error::NoConvergence {
                iterations,
                residual,
                trace,
            }) => {
                // keep the attempt that got closer
                match first {
                    Error::NoConvergence { residual: r0, .. } if r0 < residual => Err(first),
                    _ => Err(Error::NoConvergence {
                        iterations,
                        residual,
                        trace,
                    }),
                }
            }
            Err(e) => Err(e),
        },
    }
}

/// Whether two sorted root sets agree up to permutation.
pub fn same_root_set(a: &[C64], b: &[C64], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = alloc::vec![false; b.len()];
    for x in a {
        let best = (0..b.len())
            .filter(|k| !used[*k])
            .min_by(|&i, &j| (b[i] - x).norm().total_cmp(&(b[j] - x).norm()));
        match best {
            Some(k) if (b[k] - x).norm() < tol => used[k] = true,
            _ => return false,
        }
    }
    true
}

/// Solves from every seed and returns the distinct solutions in seed order.
/// Fails only when no seed converges, with the best attempt's trace.
pub fn solve_be(
    spec: &ChainSpec,
    r: usize,
    seeds: &[Vec<C64>],
    options: &NewtonOptions,
) -> Result<Vec<RootSet>> {
    if r == 0 {
        return Ok(alloc::vec![RootSet {
            roots: Vec::new(),
            residual: 0.0,
            iterations: 0
        }]);
    }
    let system = BetheSystem::new(spec.clone(), r);
    let outcomes: Vec<Result<RootSet>> = seeds
        .iter()
        .map(|seed| {
            if seed.len() != r {
                Err(Error::Cardinality {
                    needed: r,
                    available: seed.len(),
                })
            } else {
                solve_from_seed(&system, seed, options)
            }
        })
        .collect();
    merge_solutions(outcomes)
}

/// Serial dedup of per-seed outcomes, usable after a parallel map.
pub fn merge_solutions(outcomes: Vec<Result<RootSet>>) -> Result<Vec<RootSet>> {
    let mut found: Vec<RootSet> = Vec::new();
    let mut best_failure: Option<Error> = None;
    for outcome in outcomes {
        match outcome {
            Ok(set) => {
                if !found
                    .iter()
                    .any(|f| same_root_set(&f.roots, &set.roots, DEDUP_TOLERANCE))
                {
                    found.push(set);
                }
            }
            Err(Error::Cardinality { needed, available }) => {
                return Err(Error::Cardinality { needed, available })
            }
            Err(e @ Error::NoConvergence { .. }) => {
                let better = match (&best_failure, &e) {
                    (
                        Some(Error::NoConvergence { residual: old, .. }),
                        Error::NoConvergence { residual: new, .. },
                    ) => new < old,
                    _ => true,
                };
                if better {
                    best_failure = Some(e);
                }
            }
            Err(e) => {
                if best_failure.is_none() {
                    best_failure = Some(e);
                }
            }
        }
    }
    if found.is_empty() {
        return Err(best_failure.unwrap_or(Error::NoConvergence {
            iterations: 0,
            residual: f64::INFINITY,
            trace: Vec::new(),
        }));
    }
    Ok(found)
}

fn radical_inverse(mut n: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while n > 0 {
        out += (n % base) as f64 * inv;
        n /= base;
        inv /= base as f64;
    }
    out
}

/// Deterministic low-discrepancy seeds in the disc of radius
/// `max|ξ| + 2|c|`: `count` sets of `r` points from a Halton sequence.
pub fn disc_seeds(spec: &ChainSpec, r: usize, count: usize) -> Vec<Vec<C64>> {
    let radius = spec.max_xi() + 2.0 * spec.c().norm();
    let mut index = 1u64;
    (0..count)
        .map(|_| {
            (0..r)
                .map(|_| {
                    let rad = radius * libm::sqrt(radical_inverse(index, 2));
                    let angle = 2.0 * PI * radical_inverse(index, 3);
                    index += 1;
                    cplx(rad * libm::cos(angle), rad * libm::sin(angle))
                })
                .collect()
        })
        .collect()
}

/// `τ(z|ū) = λ₁𝔣(ū,z)𝔣(ū,z+c/2) + λ₂𝔣(ū,z)𝔣(z+c/2,ū) + λ₃𝔣(z,ū)𝔣(z+c/2,ū)`.
pub fn tau_eigenvalue(spec: &ChainSpec, z: C64, params: &[C64]) -> Result<C64> {
    let kit = crate::bethe::rational::RationalKit::new(spec.c());
    let zh = z + spec.c() * 0.5;
    let [l1, l2, l3] = vacuum_eigenvalues(spec, z)?;
    let a = kit.f_set(params, &[z])?;
    let b = kit.f_set(params, &[zh])?;
    let d = kit.f_set(&[z], params)?;
    let e = kit.f_set(&[zh], params)?;
    Ok(l1 * a * b + l2 * a * e + l3 * d * e)
}

/// Residue of `τ(·|ū)` at `pole` by the trapezoidal rule on a small circle,
/// divided by `radius · max|τ|` on the circle. Near zero when `τ` is
/// regular at `pole`, order one at a simple pole.
pub fn relative_residue(
    spec: &ChainSpec,
    params: &[C64],
    pole: C64,
    radius: f64,
    nodes: usize,
) -> Result<f64> {
    let mut acc = real(0.0);
    let mut peak: f64 = 0.0;
    for k in 0..nodes {
        let angle = 2.0 * PI * (k as f64 + 0.5) / nodes as f64;
        let e = cplx(libm::cos(angle), libm::sin(angle));
        let tau = tau_eigenvalue(spec, pole + e * radius, params)?;
        peak = peak.max(tau.norm());
        acc += tau * e;
    }
    let residue = acc * (radius / nodes as f64);
    Ok(if peak == 0.0 {
        0.0
    } else {
        residue.norm() / (radius * peak)
    })
}

/// Distance from `pole` to the nearest other singularity of `τ`.
fn isolation(spec: &ChainSpec, params: &[C64], pole: C64) -> f64 {
    let half = spec.c() * 0.5;
    let mut candidates: Vec<C64> = Vec::new();
    for x in spec.xi() {
        candidates.push(*x);
        candidates.push(x - half);
    }
    for u in params {
        candidates.push(*u);
        candidates.push(u - half);
    }
    candidates
        .iter()
        .map(|p| (p - pole).norm())
        .filter(|d| *d > 1e-9)
        .fold(f64::INFINITY, f64::min)
}

/// Relative residues of `τ` at `z = u_i` and `z = u_i − c/2` for every root.
pub fn pole_residues(spec: &ChainSpec, params: &[C64]) -> Result<Vec<f64>> {
    let half = spec.c() * 0.5;
    let mut out = Vec::with_capacity(2 * params.len());
    for &u in params {
        for pole in [u, u - half] {
            let radius = (1e-3 * spec.c().norm()).min(0.25 * isolation(spec, params, pole));
            out.push(relative_residue(spec, params, pole, radius, 64)?);
        }
    }
    Ok(out)
}

/// Outcome of the on-shell checks for one root set.
#[derive(Clone, Debug, PartialEq)]
pub struct OnShellReport {
    pub be_residual: f64,
    /// `‖𝒯(z)B − τ(z)B‖/‖B‖` per test point.
    pub eigen_residuals: Vec<f64>,
    /// Distance from `τ(z)` to the nearest eigenvalue of `𝒯(z)`, over `max(1, |τ|)`.
    pub spectrum_distances: Vec<f64>,
    pub tau: Vec<C64>,
    /// `‖E₂₃[0]B‖/‖B‖`.
    pub zero_mode: f64,
    pub pole_residues: Vec<f64>,
}

impl OnShellReport {
    fn worst(v: &[f64]) -> f64 {
        v.iter()
            .map(|x| if x.is_nan() { f64::INFINITY } else { *x })
            .fold(0.0, f64::max)
    }

    pub fn eigen_ok(&self, tol: f64) -> bool {
        Self::worst(&self.eigen_residuals) < tol
    }

    pub fn spectrum_ok(&self, tol: f64) -> bool {
        Self::worst(&self.spectrum_distances) < tol
    }

    pub fn zero_mode_ok(&self, tol: f64) -> bool {
        self.zero_mode < tol
    }

    pub fn poles_ok(&self, tol: f64) -> bool {
        Self::worst(&self.pole_residues) < tol
    }

    /// Names of failing clauses.
    pub fn failures(&self, tol: f64) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.eigen_ok(tol) {
            out.push("eigenvector");
        }
        if !self.spectrum_ok(tol) {
            out.push("spectrum");
        }
        if !self.zero_mode_ok(tol) {
            out.push("zero_mode");
        }
        if !self.poles_ok(tol) {
            out.push("pole_cancellation");
        }
        out
    }
}

/// Builds `B(ū)` and checks it against `𝒯(z)` at each of `points`, the
/// exact spectrum of `𝒯(z)`, the zero mode `E₂₃[0]`, and the pole
/// cancellation of `τ`. Nothing here assumes `ū` is on shell.
pub fn onshell_verify(
    ctx: &mut BetheContext,
    params: &[C64],
    points: &[C64],
) -> Result<OnShellReport> {
    let spec = ctx.spec().clone();
    let be = norm2(&be_residual(&spec, params)?);
    let b = ctx.bethe(params)?;
    let bn = b.norm();
    let mut eigen_residuals = Vec::with_capacity(points.len());
    let mut spectrum_distances = Vec::with_capacity(points.len());
    let mut taus = Vec::with_capacity(points.len());
    for &z in points {
        let t = transfer_matrix(&spec, z)?;
        let tau = tau_eigenvalue(&spec, z, params)?;
        let image = t.apply(&b);
        eigen_residuals.push((&image - &b.scale(tau)).norm() / bn);
        let spectrum = t.eigenvalues()?;
        let nearest = spectrum
            .iter()
            .map(|e| (e - tau).norm())
            .fold(f64::INFINITY, f64::min);
        spectrum_distances.push(nearest / tau.norm().max(1.0));
        taus.push(tau);
    }
    let zm = zero_mode_action(ctx, params)?;
    let pole_residues = pole_residues(&spec, params)?;
    Ok(OnShellReport {
        be_residual: be,
        eigen_residuals,
        spectrum_distances,
        tau: taus,
        zero_mode: zm.lhs.norm() / bn,
        pole_residues,
    })
}
