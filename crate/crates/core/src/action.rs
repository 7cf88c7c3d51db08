//! Action of the monodromy entries `T_{i,j}(z)` on off-shell Bethe vectors:
//! the general partition formula, its specialised closed forms, and the
//! zero-mode ladder.

use alloc::format;
use alloc::vec::Vec;

use crate::bethe::BetheContext;
use crate::chain::zero_modes;
use crate::error::{Error, Result};
use crate::hilbert::{real, relative_residual, HVector, Operator, C64};
use crate::report::Report;
use crate::rmat::POLE_TOLERANCE;

/// One partition `η̄ = η̄_I ∪ η̄_II ∪ η̄_III`, as indices into `η̄ = (ū, z, z + c/2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionTerm {
    pub eta_i: Vec<usize>,
    pub eta_ii: Vec<usize>,
    pub eta_iii: Vec<usize>,
    pub coefficient: C64,
}

fn combinations(pool: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return alloc::vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (pos, &first) in pool.iter().enumerate() {
        if pool.len() - pos < k {
            break;
        }
        for mut tail in combinations(&pool[pos + 1..], k - 1) {
            tail.insert(0, first);
            out.push(tail);
        }
    }
    out
}

/// All partitions of `n` indices with `#I = i − 1`, `#III = 3 − j`, in
/// lexicographic order of `(I, III)`. Coefficients are left at zero.
pub fn enumerate_partitions(n: usize, i: usize, j: usize) -> Result<Vec<PartitionTerm>> {
    if !(1..=3).contains(&i) || !(1..=3).contains(&j) {
        return Err(Error::Index {
            index: if (1..=3).contains(&i) { j } else { i },
            bound: 3,
        });
    }
    let needed = (i - 1) + (3 - j);
    if needed > n {
        return Err(Error::Cardinality {
            needed,
            available: n,
        });
    }
    let all: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    for eta_i in combinations(&all, i - 1) {
        let rest: Vec<usize> = all.iter().copied().filter(|k| !eta_i.contains(k)).collect();
        for eta_iii in combinations(&rest, 3 - j) {
            let eta_ii = rest
                .iter()
                .copied()
                .filter(|k| !eta_iii.contains(k))
                .collect();
            out.push(PartitionTerm {
                eta_i: eta_i.clone(),
                eta_ii,
                eta_iii,
                coefficient: real(0.0),
            });
        }
    }
    Ok(out)
}

/// `s(i,j) = 2^{i−j+1} (−1)^{δ_{i1}+δ_{j1}}`.
pub fn s_factor(i: usize, j: usize) -> f64 {
    let sign = if (i == 1) ^ (j == 1) { -1.0 } else { 1.0 };
    sign * libm::pow(2.0, i as f64 - j as f64 + 1.0)
}

/// True when `z` sits in an earlier group than `z + c/2`, so the term
/// carries the factor `𝔣(z, z + c/2) = 0`.
fn killed(term: &PartitionTerm, z_idx: usize, zh_idx: usize) -> bool {
    let group = |k: usize| {
        if term.eta_i.contains(&k) {
            0
        } else if term.eta_ii.contains(&k) {
            1
        } else {
            2
        }
    };
    group(z_idx) < group(zh_idx)
}

/// Right-hand side of the action formula with its bookkeeping.
#[derive(Clone, Debug)]
pub struct ActionRhs {
    pub vector: HVector,
    pub terms: Vec<PartitionTerm>,
    pub n_partitions: usize,
    pub pruned: usize,
}

fn pick(eta: &[C64], idx: &[usize]) -> Vec<C64> {
    idx.iter().map(|&k| eta[k]).collect()
}

/// `s(i,j) λ₃(z) Σ (λ₂/λ₃)(η̄_III) 𝔣(η̄_I,η̄_II) 𝔣(η̄_I,η̄_III) 𝔣(η̄_II,η̄_III)
/// / [𝔥(η̄_I,z) 𝔥(z+c/2,η̄_III)] B(η̄_II)`.
pub fn action_rhs(
    ctx: &mut BetheContext,
    i: usize,
    j: usize,
    z: C64,
    params: &[C64],
) -> Result<ActionRhs> {
    let c = ctx.spec().c();
    let zh = z + c * 0.5;
    let r = params.len();
    let mut eta = params.to_vec();
    eta.push(z);
    eta.push(zh);
    let kit = *ctx.kit();
    let lambda3 = ctx.lambdas(z)?[2];
    let prefactor = lambda3 * s_factor(i, j);
    // too few parameters for the cardinalities: the sum is empty
    let mut terms = match enumerate_partitions(r + 2, i, j) {
        Err(Error::Cardinality { .. }) => Vec::new(),
        other => other?,
    };
    let n_partitions = terms.len();
    let mut pruned = 0;
    let mut vector = HVector::zeros(ctx.spec().dim());
    let mut kept = Vec::with_capacity(terms.len());
    for mut term in terms.drain(..) {
        if killed(&term, r, r + 1) {
            pruned += 1;
            continue;
        }
        let (a, b, d) = (
            pick(&eta, &term.eta_i),
            pick(&eta, &term.eta_ii),
            pick(&eta, &term.eta_iii),
        );
        let den = kit.h_set(&a, &[z]) * kit.h_set(&[zh], &d);
        if den.norm() < POLE_TOLERANCE {
            return Err(Error::Pole {
                what: format!(
                    "frak_h denominator in partition {:?}/{:?}",
                    term.eta_i, term.eta_iii
                ),
                distance: den.norm(),
            });
        }
        let mut coef = kit.f_set(&a, &b)? * kit.f_set(&a, &d)? * kit.f_set(&b, &d)? / den;
        for w in &d {
            coef *= ctx.lambda_ratio(*w)?;
        }
        coef *= prefactor;
        term.coefficient = coef;
        if coef != real(0.0) {
            let bv = ctx.bethe(&b)?;
            vector.axpy(coef, &bv);
        }
        kept.push(term);
    }
    Ok(ActionRhs {
        vector,
        terms: kept,
        n_partitions,
        pruned,
    })
}

/// Residual of `T_{i,j}(z) B(ū)` against [`action_rhs`].
#[derive(Clone, Debug, PartialEq)]
pub struct ActionCheck {
    pub residual: f64,
    pub n_partitions: usize,
    pub pruned: usize,
}

pub fn action_verify(
    ctx: &mut BetheContext,
    i: usize,
    j: usize,
    z: C64,
    params: &[C64],
) -> Result<ActionCheck> {
    let rhs = action_rhs(ctx, i, j, z, params)?;
    let b = ctx.bethe(params)?;
    let lhs = ctx.monodromy(z)?.get(i, j).apply(&b);
    let diff = (&lhs - &rhs.vector).norm();
    Ok(ActionCheck {
        residual: relative_residual(diff, lhs.norm(), rhs.vector.norm()),
        n_partitions: rhs.n_partitions,
        pruned: rhs.pruned,
    })
}

/// Closed forms of the action for particular entries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Specialized {
    T11,
    T22,
    T33,
    T13,
    T12,
    T23,
    T12Partition,
}

impl Specialized {
    pub const ALL: [Specialized; 7] = [
        Specialized::T11,
        Specialized::T22,
        Specialized::T33,
        Specialized::T13,
        Specialized::T12,
        Specialized::T23,
        Specialized::T12Partition,
    ];

    /// Monodromy entry whose action the form describes.
    pub fn indices(self) -> (usize, usize) {
        match self {
            Specialized::T11 => (1, 1),
            Specialized::T22 => (2, 2),
            Specialized::T33 => (3, 3),
            Specialized::T13 => (1, 3),
            Specialized::T12 | Specialized::T12Partition => (1, 2),
            Specialized::T23 => (2, 3),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Specialized::T11 => "T11",
            Specialized::T22 => "T22",
            Specialized::T33 => "T33",
            Specialized::T13 => "T13",
            Specialized::T12 => "T12",
            Specialized::T23 => "T23",
            Specialized::T12Partition => "T12_partition",
        }
    }
}

fn without(us: &[C64], drop: &[usize]) -> Vec<C64> {
    us.iter()
        .enumerate()
        .filter(|(k, _)| !drop.contains(k))
        .map(|(_, u)| *u)
        .collect()
}

fn with(us: &[C64], extra: &[C64]) -> Vec<C64> {
    let mut v = us.to_vec();
    v.extend_from_slice(extra);
    v
}

/// Independent evaluation of a specialised action formula.
pub fn specialized_action(
    ctx: &mut BetheContext,
    which: Specialized,
    z: C64,
    params: &[C64],
) -> Result<HVector> {
    let kit = *ctx.kit();
    let c = ctx.spec().c();
    let zh = z + c * 0.5;
    let [l1, l2, l3] = ctx.lambdas(z)?;
    let us = params;
    let r = us.len();
    let mut out = HVector::zeros(ctx.spec().dim());
    let two = real(2.0);
    match which {
        Specialized::T11 => {
            let coef = l1 * kit.f_set(us, &[z])? * kit.f_set(us, &[zh])?;
            out.axpy(coef, &ctx.bethe(us)?);
            for i in 0..r {
                let (ui, o) = (us[i], without(us, &[i]));
                let coef = two
                    * l2
                    * kit.g_half(zh, ui)?
                    * ctx.lambda_ratio(ui)?
                    * kit.f_set(&o, &[z])?
                    * kit.f_set(&o, &[ui])?;
                out.axpy(coef, &ctx.bethe(&with(&o, &[zh]))?);
            }
            for i in 0..r {
                for j in (i + 1)..r {
                    let o = without(us, &[i, j]);
                    let coef = two
                        * l3
                        * kit.g_half(z, us[i])?
                        * kit.g_half(z, us[j])?
                        * ctx.lambda_ratio(us[i])?
                        * ctx.lambda_ratio(us[j])?
                        * kit.f_set(&o, &[us[i], us[j]])?;
                    out.axpy(coef, &ctx.bethe(&with(&o, &[z, zh]))?);
                }
            }
        }
        Specialized::T22 => {
            let coef = l2 * kit.f_set(us, &[z])? * kit.f_set(&[zh], us)?;
            out.axpy(coef, &ctx.bethe(us)?);
            for i in 0..r {
                let (ui, o) = (us[i], without(us, &[i]));
                let coef = two
                    * l3
                    * kit.g_half(z, ui)?
                    * ctx.lambda_ratio(ui)?
                    * kit.f_set(&[zh], &o)?
                    * kit.f_set(&o, &[ui])?;
                out.axpy(coef, &ctx.bethe(&with(&o, &[z]))?);
                let coef = -two
                    * l2
                    * kit.f_set(&o, &[z])?
                    * kit.h_half_inv(z, ui)?
                    * kit.f_set(&[ui], &o)?;
                out.axpy(coef, &ctx.bethe(&with(&o, &[zh]))?);
            }
            for i in 0..r {
                for j in 0..r {
                    if i == j {
                        continue;
                    }
                    let o = without(us, &[i, j]);
                    let coef = two
                        * l3
                        * ctx.lambda_ratio(us[j])?
                        * kit.f_set(&[us[i]], &o)?
                        * kit.f_set(&without(us, &[j]), &[us[j]])?
                        * kit.h_half_inv(z, us[i])?
                        * kit.h_half_inv(us[j], zh)?;
                    out.axpy(coef, &ctx.bethe(&with(&o, &[z, zh]))?);
                }
            }
        }
        Specialized::T33 => {
            let coef = l3 * kit.f_set(&[z], us)? * kit.f_set(&[zh], us)?;
            out.axpy(coef, &ctx.bethe(us)?);
            for i in 0..r {
                let (ui, o) = (us[i], without(us, &[i]));
                let coef =
                    two * l3 * kit.g_half(ui, z)? * kit.f_set(&[zh], &o)? * kit.f_set(&[ui], &o)?;
                out.axpy(coef, &ctx.bethe(&with(&o, &[z]))?);
            }
            for i in 0..r {
                for j in (i + 1)..r {
                    let o = without(us, &[i, j]);
                    let coef = two
                        * l3
                        * kit.f_set(&[us[i], us[j]], &o)?
                        * kit.h_half_inv(z, us[i])?
                        * kit.h_half_inv(z, us[j])?;
                    out.axpy(coef, &ctx.bethe(&with(&o, &[z, zh]))?);
                }
            }
        }
        Specialized::T13 => {
            out.axpy(-l3 * 0.5, &ctx.bethe(&with(us, &[z, zh]))?);
        }
        Specialized::T12 => {
            out.axpy(-l2 * kit.f_set(us, &[z])?, &ctx.bethe(&with(us, &[zh]))?);
            for i in 0..r {
                let (ui, o) = (us[i], without(us, &[i]));
                let coef =
                    -l3 * kit.g_half(z, ui)? * kit.f_set(&o, &[ui])? * ctx.lambda_ratio(ui)?;
                out.axpy(coef, &ctx.bethe(&with(&o, &[z, zh]))?);
            }
        }
        Specialized::T23 => {
            out.axpy(l3 * kit.f_set(&[zh], us)?, &ctx.bethe(&with(us, &[z]))?);
            for i in 0..r {
                let (ui, o) = (us[i], without(us, &[i]));
                let coef = -l3 * kit.f_set(&[ui], &o)? * kit.h_half_inv(z, ui)?;
                out.axpy(coef, &ctx.bethe(&with(&o, &[z, zh]))?);
            }
        }
        Specialized::T12Partition => {
            // η̄_III is a single element w of η̄; the w = z + c/2 term is zero
            // through 𝔣(z, z + c/2) and is kept to exercise that cancellation
            let eta = with(us, &[z, zh]);
            for k in 0..eta.len() {
                let w = eta[k];
                let rest = without(&eta, &[k]);
                let coef =
                    -l3 * ctx.lambda_ratio(w)? * kit.f_set(&rest, &[w])? * kit.h_half_inv(zh, w)?;
                if coef != real(0.0) {
                    out.axpy(coef, &ctx.bethe(&rest)?);
                }
            }
        }
    }
    Ok(out)
}

/// `E₂₃[0] B(ū)` and `c Σ_i 𝔣(u_i,ū_i)[𝔣(ū_i,u_i)/𝔣(u_i,ū_i) · λ₂/λ₃(u_i) − 1] B(ū_i)`.
#[derive(Clone, Debug)]
pub struct ZeroModeAction {
    pub lhs: HVector,
    pub rhs: HVector,
    pub residual: f64,
}

pub fn zero_mode_action(ctx: &mut BetheContext, params: &[C64]) -> Result<ZeroModeAction> {
    let kit = *ctx.kit();
    let c = ctx.spec().c();
    let zm = zero_modes(ctx.spec());
    let b = ctx.bethe(params)?;
    let lhs = zm.e23().apply(&b);
    let mut rhs = HVector::zeros(ctx.spec().dim());
    for i in 0..params.len() {
        let ui = params[i];
        let o = without(params, &[i]);
        let forward = kit.f_set(&[ui], &o)?;
        let backward = kit.f_set(&o, &[ui])?;
        let coef = c * (backward * ctx.lambda_ratio(ui)? - forward);
        rhs.axpy(coef, &ctx.bethe(&o)?);
    }
    let residual = relative_residual((&lhs - &rhs).norm(), lhs.norm(), rhs.norm());
    Ok(ZeroModeAction { lhs, rhs, residual })
}

/// Relations expressing every `T_{i,j}(z)` through `T₁₃`, `T₂₃`, `T₃₃` and
/// commutators with `E₂₃[0]`.
pub fn ladder_residuals(ctx: &mut BetheContext, z: C64) -> Result<Report> {
    let c = ctx.spec().c();
    let e = zero_modes(ctx.spec()).e23().clone();
    let t = ctx.monodromy(z)?;
    let ad = |x: &Operator| e.commutator(x).scale(real(1.0) / c);
    let mut report = Report::new();
    let mut push =
        |name: &str, lhs: &Operator, rhs: Operator| report.push(name, lhs.distance(&rhs));
    push("T12_ladder", t.get(1, 2), &ad(t.get(1, 3)) - t.get(2, 3));
    push("T22_ladder", t.get(2, 2), &ad(t.get(2, 3)) + t.get(3, 3));
    push("T11_ladder", t.get(1, 1), t.get(2, 2) - &ad(t.get(1, 2)));
    push("T32_ladder", t.get(3, 2), ad(t.get(3, 3)));
    push("T21_ladder", t.get(2, 1), ad(t.get(1, 1)));
    push("T31_ladder", t.get(3, 1), -&ad(t.get(3, 2)));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{monodromy, ChainSpec};
    use crate::hilbert::{cplx, vacuum};
    use alloc::vec;

    fn ctx(sites: usize) -> BetheContext {
        let xi = [cplx(0.3, 0.1), cplx(-0.4, 0.2)];
        BetheContext::new(ChainSpec::new(real(1.0), xi[..sites].to_vec()).unwrap())
    }

    fn params(r: usize) -> Vec<C64> {
        [cplx(0.71, 0.43), cplx(-0.52, 0.88), cplx(1.37, -0.29)][..r].to_vec()
    }

    const Z: C64 = C64 {
        re: 0.23,
        im: -0.61,
    };

    #[test]
    fn partition_counts() {
        assert_eq!(enumerate_partitions(2, 1, 3).unwrap().len(), 1);
        let p = enumerate_partitions(2, 1, 3).unwrap();
        assert!(p[0].eta_i.is_empty() && p[0].eta_iii.is_empty());
        assert_eq!(enumerate_partitions(3, 1, 2).unwrap().len(), 3);
        assert_eq!(enumerate_partitions(4, 1, 1).unwrap().len(), 6);
        assert_eq!(enumerate_partitions(4, 3, 1).unwrap().len(), 6);
        assert!(matches!(
            enumerate_partitions(2, 3, 1),
            Err(Error::Cardinality { .. })
        ));
        for term in enumerate_partitions(5, 2, 2).unwrap() {
            let mut all = [
                term.eta_i.clone(),
                term.eta_ii.clone(),
                term.eta_iii.clone(),
            ]
            .concat();
            all.sort();
            assert_eq!(all, vec![0, 1, 2, 3, 4]);
        }
    }

    #[test]
    fn s_values() {
        assert_eq!(s_factor(1, 3), -0.5);
        assert_eq!(s_factor(3, 3), 2.0);
        assert_eq!(s_factor(1, 1), 2.0);
        assert_eq!(s_factor(3, 1), -8.0);
        assert_eq!(s_factor(2, 2), 2.0);
    }

    #[test]
    fn t13_is_single_vector() {
        let mut ctx = ctx(2);
        let us = params(1);
        let rhs = action_rhs(&mut ctx, 1, 3, Z, &us).unwrap();
        assert_eq!(rhs.n_partitions, 1);
        let t13_form = specialized_action(&mut ctx, Specialized::T13, Z, &us).unwrap();
        assert!(rhs.vector.distance(&t13_form) < 1e-14);
    }

    #[test]
    fn t23_on_vacuum() {
        let mut ctx = ctx(2);
        let rhs = action_rhs(&mut ctx, 2, 3, Z, &[]).unwrap();
        let t = monodromy(ctx.spec(), Z).unwrap();
        assert!(rhs.vector.distance(&t.get(2, 3).apply(&vacuum(2))) < 1e-12);
    }

    #[test]
    fn t33_on_vacuum() {
        let mut ctx = ctx(2);
        let l3 = ctx.lambdas(Z).unwrap()[2];
        let rhs = action_rhs(&mut ctx, 3, 3, Z, &[]).unwrap();
        assert!(rhs.vector.distance(&vacuum(2).scale(l3)) < 1e-13);
    }

    #[test]
    fn all_entries_act_as_predicted() {
        for sites in [1, 2] {
            let mut ctx = ctx(sites);
            for r in 0..=3 {
                let us = params(r);
                for i in 1..=3 {
                    for j in 1..=3 {
                        let check = action_verify(&mut ctx, i, j, Z, &us).unwrap();
                        assert!(
                            check.residual < 1e-8,
                            "L={sites} r={r} ({i},{j}): {}",
                            check.residual
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn lowering_vacuum_gives_zero() {
        let mut ctx = ctx(2);
        let rhs = action_rhs(&mut ctx, 3, 1, Z, &[]).unwrap();
        assert_eq!(rhs.n_partitions, 0);
        assert_eq!(rhs.vector.norm(), 0.0);
    }

    #[test]
    fn pruning_counts() {
        let mut ctx = ctx(2);
        // (1,2): III is one element of (u, z, z+c/2); only III = {z+c/2} is killed
        let rhs = action_rhs(&mut ctx, 1, 2, Z, &params(1)).unwrap();
        assert_eq!((rhs.n_partitions, rhs.pruned), (3, 1));
    }

    #[test]
    fn specialized_forms_match() {
        let mut ctx = ctx(2);
        for r in 0..=3 {
            let us = params(r);
            for which in Specialized::ALL {
                let (i, j) = which.indices();
                let general = action_rhs(&mut ctx, i, j, Z, &us).unwrap().vector;
                let special = specialized_action(&mut ctx, which, Z, &us).unwrap();
                assert!(general.distance(&special) < 1e-10, "r={r} {which:?}");
            }
        }
    }

    #[test]
    fn t11_leading_coefficient_uses_lambda1() {
        let ctx = ctx(2);
        let spec = ctx.spec().clone();
        let c = spec.c();
        let l1 = ctx.lambdas(Z).unwrap()[0];
        let z_central = crate::chain::central_z(&spec, Z).unwrap();
        let l3m = ctx.lambdas(Z - c * 0.5).unwrap()[2];
        assert!((l1 - z_central / l3m).norm() < 1e-12 * l1.norm());
        let l2h = ctx.lambdas(Z + c * 0.5).unwrap();
        assert!((l1 - l2h[1] / l2h[2]).norm() < 1e-12 * l1.norm());
    }

    #[test]
    fn zero_mode_examples() {
        let mut ctx = ctx(2);
        let a = zero_mode_action(&mut ctx, &[]).unwrap();
        assert!(a.lhs.norm() < 1e-15);
        for r in 1..=3 {
            let a = zero_mode_action(&mut ctx, &params(r)).unwrap();
            assert!(a.residual < 1e-8, "r={r}: {}", a.residual);
        }
    }

    #[test]
    fn ladder() {
        let mut ctx = ctx(2);
        let report = ladder_residuals(&mut ctx, Z).unwrap();
        assert!(report.passes(1e-10), "{report:?}");
    }
}
