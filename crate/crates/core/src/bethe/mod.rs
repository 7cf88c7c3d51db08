//! Off-shell Bethe vectors built from the `F₃₂` Gauss coordinate, their
//! recursions through monodromy entries, and dual vectors.

pub mod rational;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::chain::{monodromy, vacuum_eigenvalues, ChainSpec, MonodromyEval};
use crate::error::{Error, Result};
use crate::gauss::gauss_at;
use crate::hilbert::{real, vacuum, HVector, Operator, C64};
use rational::RationalKit;

/// Parameters closer than this (relative to `|c|`) count as coincident.
pub const COINCIDENCE_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    ClosedFormula,
    Recursion12,
    Recursion23,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::ClosedFormula => "closed_formula",
            Method::Recursion12 => "recursion_12",
            Method::Recursion23 => "recursion_23",
        }
    }
}

/// An off-shell Bethe vector with the parameters it was built from.
#[derive(Clone, Debug)]
pub struct BetheState {
    pub params: Vec<C64>,
    pub vector: HVector,
    pub method: Method,
}

fn key(u: C64) -> (u64, u64) {
    (u.re.to_bits(), u.im.to_bits())
}

/// A chain together with caches of `F₃₂(w)` and `T(w)` keyed by the exact point.
#[derive(Clone, Debug)]
pub struct BetheContext {
    spec: ChainSpec,
    kit: RationalKit,
    f32_cache: BTreeMap<(u64, u64), Operator>,
    monodromy_cache: BTreeMap<(u64, u64), MonodromyEval>,
    vector_cache: BTreeMap<Vec<(u64, u64)>, HVector>,
}

impl BetheContext {
    pub fn new(spec: ChainSpec) -> Self {
        let kit = RationalKit::new(spec.c());
        BetheContext {
            spec,
            kit,
            f32_cache: BTreeMap::new(),
            monodromy_cache: BTreeMap::new(),
            vector_cache: BTreeMap::new(),
        }
    }

    pub fn spec(&self) -> &ChainSpec {
        &self.spec
    }

    pub fn kit(&self) -> &RationalKit {
        &self.kit
    }

    /// `F₃₂(w)`, computed once per point.
    pub fn f32(&mut self, w: C64) -> Result<&Operator> {
        if !self.f32_cache.contains_key(&key(w)) {
            let frame = gauss_at(&self.spec, w)?;
            self.f32_cache.insert(key(w), frame.f32);
        }
        Ok(&self.f32_cache[&key(w)])
    }

    /// `T(w)`, computed once per point.
    pub fn monodromy(&mut self, w: C64) -> Result<&MonodromyEval> {
        if !self.monodromy_cache.contains_key(&key(w)) {
            let t = monodromy(&self.spec, w)?;
            self.monodromy_cache.insert(key(w), t);
        }
        Ok(&self.monodromy_cache[&key(w)])
    }

    /// `λ₂(w)/λ₃(w)`.
    pub fn lambda_ratio(&self, w: C64) -> Result<C64> {
        let l = vacuum_eigenvalues(&self.spec, w)?;
        if l[2].norm() < crate::rmat::POLE_TOLERANCE {
            return Err(Error::ZeroDenominator {
                what: format!("lambda3({w})"),
            });
        }
        Ok(l[1] / l[2])
    }

    pub fn lambdas(&self, w: C64) -> Result<[C64; 3]> {
        vacuum_eigenvalues(&self.spec, w)
    }

    /// Closed-formula Bethe vector, memoised on the canonically ordered set.
    pub fn bethe(&mut self, params: &[C64]) -> Result<HVector> {
        let ordered = canonical_order(params, self.spec.c())?;
        let k: Vec<(u64, u64)> = ordered.iter().map(|u| key(*u)).collect();
        if let Some(v) = self.vector_cache.get(&k) {
            return Ok(v.clone());
        }
        let v = bethe_vector_ordered(self, &ordered)?;
        self.vector_cache.insert(k, v.clone());
        Ok(v)
    }
}

/// Sorts by `(Re, Im)` of `u/c`, which puts `u + c/2` after `u` for any
/// complex `c`. Fails on coincident parameters.
pub fn canonical_order(params: &[C64], c: C64) -> Result<Vec<C64>> {
    let tol = COINCIDENCE_TOLERANCE * c.norm().max(1.0);
    for i in 0..params.len() {
        for j in (i + 1)..params.len() {
            if (params[i] - params[j]).norm() < tol {
                return Err(Error::Degenerate {
                    first: i,
                    second: j,
                });
            }
        }
    }
    let mut out: Vec<C64> = params.to_vec();
    out.sort_by(|a, b| {
        let (x, y) = (a / c, b / c);
        x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im))
    });
    Ok(out)
}

/// Coefficients of `F₃₂(u_j)`, `j ≥ 2`, in the modified coordinate at `u₁`:
/// `−𝔥(u_j,u₁)⁻¹ Π_{s≠j} 𝔣(u_s,u_j)/𝔣(u_s,u₁)`.
fn modified_coefficients(kit: &RationalKit, u1: C64, rest: &[C64]) -> Result<Vec<C64>> {
    let mut out = Vec::with_capacity(rest.len());
    for (j, &uj) in rest.iter().enumerate() {
        let mut coef = -kit.h_half_inv(uj, u1)?;
        for (s, &us) in rest.iter().enumerate() {
            if s == j {
                continue;
            }
            let den = kit.f_half(us, u1)?;
            if den.norm() < crate::rmat::POLE_TOLERANCE {
                return Err(Error::Pole {
                    what: format!("frak_f({us}, {u1}) vanishes in the modified coordinate"),
                    distance: den.norm(),
                });
            }
            coef *= kit.f_half(us, uj)? / den;
        }
        out.push(coef);
    }
    Ok(out)
}

/// `F₃₂(u₁) − Σ_j 𝔥(u_j,u₁)⁻¹ Π_{s≠j} [𝔣(u_s,u_j)/𝔣(u_s,u₁)] F₃₂(u_j)` over `u_j ∈ rest`.
pub fn modified_gauss(ctx: &mut BetheContext, u1: C64, rest: &[C64]) -> Result<Operator> {
    let coefs = modified_coefficients(&ctx.kit, u1, rest)?;
    let mut acc = ctx.f32(u1)?.clone();
    for (w, coef) in rest.iter().zip(coefs) {
        acc += &ctx.f32(*w)?.scale(coef);
    }
    Ok(acc)
}

fn apply_modified(ctx: &mut BetheContext, u1: C64, rest: &[C64], v: &HVector) -> Result<HVector> {
    let coefs = modified_coefficients(&ctx.kit, u1, rest)?;
    let mut out = ctx.f32(u1)?.apply(v);
    for (w, coef) in rest.iter().zip(coefs) {
        let image = ctx.f32(*w)?.apply(v);
        out.axpy(coef, &image);
    }
    Ok(out)
}

/// `γ(ū) A(u_r; ∅) ⋯ A(u₁; u₂..u_r) |0⟩` for the parameters in the given order.
pub fn bethe_vector_ordered(ctx: &mut BetheContext, params: &[C64]) -> Result<HVector> {
    let mut v = vacuum(ctx.spec.sites());
    for j in 0..params.len() {
        v = apply_modified(ctx, params[j], &params[j + 1..], &v)?;
    }
    let gamma = ctx.kit.gamma(params)?;
    Ok(v.scale(gamma))
}

/// Closed-formula Bethe vector with the parameters in canonical order.
pub fn bethe_vector(ctx: &mut BetheContext, params: &[C64]) -> Result<BetheState> {
    let ordered = canonical_order(params, ctx.spec.c())?;
    let vector = bethe_vector_ordered(ctx, &ordered)?;
    Ok(BetheState {
        params: ordered,
        vector,
        method: Method::ClosedFormula,
    })
}

/// Conjugate of the Bethe vector at conjugated parameters; paired with
/// [`HVector::pair`] it is the †-dual functional. Requires real chain data.
pub fn dual_bethe_vector(ctx: &mut BetheContext, params: &[C64]) -> Result<HVector> {
    if !ctx.spec.is_real() {
        return Err(Error::Reality);
    }
    let conj: Vec<C64> = params.iter().map(|u| u.conj()).collect();
    Ok(bethe_vector(ctx, &conj)?.vector.conj())
}

/// `⟨dual(ū)| B(v̄)⟩`.
pub fn scalar_product(ctx: &mut BetheContext, left: &[C64], right: &[C64]) -> Result<C64> {
    let dual = dual_bethe_vector(ctx, left)?;
    let b = bethe_vector(ctx, right)?;
    Ok(dual.pair(&b.vector))
}

fn subset(params: &[C64], mask: u32) -> Vec<C64> {
    params
        .iter()
        .enumerate()
        .filter(|(k, _)| mask & (1 << k) != 0)
        .map(|(_, u)| *u)
        .collect()
}

struct Recursion<'a> {
    ctx: &'a mut BetheContext,
    params: Vec<C64>,
    which: Method,
    memo: BTreeMap<u32, HVector>,
}

impl Recursion<'_> {
    fn vector(&mut self, mask: u32) -> Result<HVector> {
        if let Some(v) = self.memo.get(&mask) {
            return Ok(v.clone());
        }
        let v = if mask == 0 {
            vacuum(self.ctx.spec.sites())
        } else {
            let mut last_err = None;
            let mut found = None;
            // later canonical elements are the safest peel candidates
            for k in (0..self.params.len())
                .rev()
                .filter(|k| mask & (1 << k) != 0)
            {
                match self.peel(mask, k) {
                    Ok(v) => {
                        found = Some(v);
                        break;
                    }
                    Err(
                        e @ (Error::ZeroDenominator { .. }
                        | Error::Pole { .. }
                        | Error::Singular { .. }),
                    ) => last_err = Some(e),
                    Err(e) => return Err(e),
                }
            }
            match found {
                Some(v) => v,
                None => {
                    return Err(last_err.unwrap_or(Error::ZeroDenominator {
                        what: "recursion".into(),
                    }))
                }
            }
        };
        self.memo.insert(mask, v.clone());
        Ok(v)
    }

    fn peel(&mut self, mask: u32, k: usize) -> Result<HVector> {
        let w = self.params[k];
        let rest_mask = mask & !(1 << k);
        let rest = subset(&self.params, rest_mask);
        let rest_idx: Vec<usize> = (0..self.params.len())
            .filter(|i| rest_mask & (1 << i) != 0)
            .collect();
        let kit = self.ctx.kit;
        let c = self.ctx.spec.c();
        let tiny = |x: C64| x.norm() < crate::rmat::POLE_TOLERANCE;
        match self.which {
            Method::Recursion23 => {
                // B(ū, z) from T₂₃(z) B(ū) and T₁₃(z) B(ū_i), z = w
                let z = w;
                let lambda3 = self.ctx.lambdas(z)?[2];
                let den = lambda3 * kit.f_set(&[z + c * 0.5], &rest)?;
                if tiny(den) {
                    return Err(Error::ZeroDenominator {
                        what: format!("lambda3 f(z+c/2, u) at z = {z}"),
                    });
                }
                let mut acc = HVector::zeros(self.ctx.spec.dim());
                for (pos, &i) in rest_idx.iter().enumerate() {
                    let ui = rest[pos];
                    let others: Vec<C64> = rest
                        .iter()
                        .enumerate()
                        .filter(|(p, _)| *p != pos)
                        .map(|(_, u)| *u)
                        .collect();
                    let coef = kit.f_set(&[ui], &others)? * kit.h_half_inv(z, ui)?;
                    let lower = self.vector(rest_mask & !(1 << i))?;
                    acc.axpy(coef, &lower);
                }
                let base = self.vector(rest_mask)?;
                let t = self.ctx.monodromy(z)?;
                let mut out = t.get(2, 3).apply(&base);
                out.axpy(real(-2.0), &t.get(1, 3).apply(&acc));
                Ok(out.scale(real(1.0) / den))
            }
            Method::Recursion12 => {
                // B(ū, z + c/2) from T₁₂(z) B(ū) and T₁₃(z) B(ū_i), z = w − c/2
                let z = w - c * 0.5;
                let lambda2 = self.ctx.lambdas(z)?[1];
                let den = lambda2 * kit.f_set(&rest, &[z])?;
                if tiny(den) {
                    return Err(Error::ZeroDenominator {
                        what: format!("lambda2 f(u, z) at z = {z}"),
                    });
                }
                let mut acc = HVector::zeros(self.ctx.spec.dim());
                for (pos, &i) in rest_idx.iter().enumerate() {
                    let ui = rest[pos];
                    let others: Vec<C64> = rest
                        .iter()
                        .enumerate()
                        .filter(|(p, _)| *p != pos)
                        .map(|(_, u)| *u)
                        .collect();
                    let coef = kit.f_set(&others, &[ui])?
                        * kit.h_half_inv(ui, w)?
                        * self.ctx.lambda_ratio(ui)?;
                    let lower = self.vector(rest_mask & !(1 << i))?;
                    acc.axpy(coef, &lower);
                }
                let base = self.vector(rest_mask)?;
                let t = self.ctx.monodromy(z)?;
                let mut out = t.get(1, 2).apply(&base).scale(real(-1.0));
                out.axpy(real(-2.0), &t.get(1, 3).apply(&acc));
                Ok(out.scale(real(1.0) / den))
            }
            Method::ClosedFormula => unreachable!("closed formula has no recursion"),
        }
    }
}

/// Bethe vector built by repeatedly applying `T₂₃` (or `T₁₂`) and `T₁₃` to
/// lower vectors. The peeled parameter is chosen per subset so that no
/// denominator vanishes.
pub fn bethe_via_recursion(
    ctx: &mut BetheContext,
    params: &[C64],
    which: Method,
) -> Result<BetheState> {
    if which == Method::ClosedFormula {
        return bethe_vector(ctx, params);
    }
    let ordered = canonical_order(params, ctx.spec.c())?;
    if ordered.len() > 31 {
        return Err(Error::Cardinality {
            needed: ordered.len(),
            available: 31,
        });
    }
    let full = if ordered.is_empty() {
        0
    } else {
        (1u32 << ordered.len()) - 1
    };
    let mut rec = Recursion {
        ctx,
        params: ordered.clone(),
        which,
        memo: BTreeMap::new(),
    };
    let vector = rec.vector(full)?;
    Ok(BetheState {
        params: ordered,
        vector,
        method: which,
    })
}
