//! Inhomogeneous fundamental chains: Lax operators, the monodromy matrix,
//! vacuum eigenvalues, the central element and zero modes.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hilbert::{real, relative_residual, vacuum, Operator, C64};
use crate::report::Report;
use crate::rmat::{aux_blocks, prime, r_matrix, unit, Mat3, RParams, POLE_TOLERANCE};

/// Default largest chain; every suite stays dense and `O(dim³)`.
pub const DEFAULT_SITE_CAP: usize = 5;
/// Largest chain accepted through [`ChainSpec::extended`].
pub const EXTENDED_SITE_CAP: usize = 7;
/// Minimal separation of inhomogeneities and their `±c/2` shifts.
pub const MIN_SEPARATION: f64 = 1e-8;
/// Distance to the singular set below which evaluation points are rejected.
pub const GUARD_DISTANCE: f64 = 1e-6;
/// Off-scalar tolerance for `T^t(u − c/2) T(u) = z(u) I`.
pub const SCALAR_TOLERANCE: f64 = 1e-9;

/// Immutable chain description: coupling `c` and one inhomogeneity per site.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainSpec {
    c: C64,
    xi: Vec<C64>,
}

impl ChainSpec {
    /// Chain with at most [`DEFAULT_SITE_CAP`] sites and a non-degenerate singular set.
    pub fn new(c: C64, xi: Vec<C64>) -> Result<Self> {
        Self::validated(c, xi, DEFAULT_SITE_CAP, false)
    }

    /// As [`ChainSpec::new`], allowing up to [`EXTENDED_SITE_CAP`] sites.
    pub fn extended(c: C64, xi: Vec<C64>) -> Result<Self> {
        Self::validated(c, xi, EXTENDED_SITE_CAP, false)
    }

    /// All inhomogeneities equal to `xi0`. Coincident sites are the one
    /// permitted exception to the separation invariant.
    pub fn homogeneous(sites: usize, c: C64, xi0: C64) -> Result<Self> {
        Self::validated(c, alloc::vec![xi0; sites], DEFAULT_SITE_CAP, true)
    }

    fn validated(c: C64, xi: Vec<C64>, cap: usize, allow_coincident: bool) -> Result<Self> {
        if xi.is_empty() {
            return Err(Error::InvalidChain("chain needs at least one site".into()));
        }
        if xi.len() > cap {
            return Err(Error::InvalidChain(format!(
                "{} sites exceed the cap of {cap}",
                xi.len()
            )));
        }
        if !(c.re.is_finite() && c.im.is_finite()) || c.norm() < MIN_SEPARATION {
            return Err(Error::InvalidChain(
                "coupling must be finite and nonzero".into(),
            ));
        }
        if xi.iter().any(|x| !(x.re.is_finite() && x.im.is_finite())) {
            return Err(Error::InvalidChain("inhomogeneities must be finite".into()));
        }
        for j in 0..xi.len() {
            for k in (j + 1)..xi.len() {
                let d = xi[j] - xi[k];
                if !allow_coincident && d.norm() < MIN_SEPARATION {
                    return Err(Error::InvalidChain(format!("xi[{j}] and xi[{k}] coincide")));
                }
                for shift in [c * 0.5, -c * 0.5] {
                    if (d + shift).norm() < MIN_SEPARATION {
                        return Err(Error::InvalidChain(format!(
                            "xi[{j}] and xi[{k}] differ by ±c/2"
                        )));
                    }
                }
            }
        }
        Ok(ChainSpec { c, xi })
    }

    pub fn sites(&self) -> usize {
        self.xi.len()
    }

    pub fn c(&self) -> C64 {
        self.c
    }

    pub fn xi(&self) -> &[C64] {
        &self.xi
    }

    pub fn dim(&self) -> usize {
        3usize.pow(self.xi.len() as u32)
    }

    pub fn rparams(&self) -> RParams {
        RParams::new(self.c)
    }

    /// Real coupling and real inhomogeneities.
    pub fn is_real(&self) -> bool {
        self.c.im == 0.0 && self.xi.iter().all(|x| x.im == 0.0)
    }

    /// Largest `|ξ_k|`.
    pub fn max_xi(&self) -> f64 {
        self.xi.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    /// Rejects `u` when any of `u, u ± c/2, u ± c` lies within
    /// [`GUARD_DISTANCE`] of `{ξ_k, ξ_k ± c/2, ξ_k ± c}`.
    pub fn guard_point(&self, u: C64) -> Result<()> {
        let half = self.c * 0.5;
        let shifts = [real(0.0), half, -half, self.c, -self.c];
        let mut closest = f64::INFINITY;
        for x in &self.xi {
            for s in &shifts {
                for t in &shifts {
                    closest = closest.min((u + s - (x + t)).norm());
                }
            }
        }
        if closest < GUARD_DISTANCE {
            return Err(Error::Pole {
                what: format!("evaluation point {u} near the chain singular set"),
                distance: closest,
            });
        }
        Ok(())
    }

    fn lax_pole_check(&self, u: C64, k: usize) -> Result<()> {
        let x = self.xi[k - 1];
        let d = u - x;
        let shifted = d + self.c * 0.5;
        if d.norm() < POLE_TOLERANCE || shifted.norm() < POLE_TOLERANCE {
            return Err(Error::Pole {
                what: format!("Lax operator of site {k} at u = {u}"),
                distance: d.norm().min(shifted.norm()),
            });
        }
        Ok(())
    }
}

/// `L_k(u) = R(u, ξ_k)` as a 3×3 auxiliary matrix of 3×3 local matrices.
pub fn lax(u: C64, k: usize, spec: &ChainSpec) -> Result<[[Mat3; 3]; 3]> {
    if k == 0 || k > spec.sites() {
        return Err(Error::Index {
            index: k,
            bound: spec.sites(),
        });
    }
    spec.lax_pole_check(u, k)?;
    Ok(aux_blocks(&r_matrix(u, spec.xi[k - 1], &spec.rparams())?))
}

pub(crate) fn to_dynamic(m: &Mat3) -> DMatrix<C64> {
    DMatrix::from_fn(3, 3, |i, j| m[(i, j)])
}

/// Auxiliary 3×3 matrix of chain operators.
pub type Blocks = [[Operator; 3]; 3];

/// `T_{i,j}(u)` at a fixed spectral point.
#[derive(Clone, Debug)]
pub struct MonodromyEval {
    pub u: C64,
    blocks: Blocks,
}

impl MonodromyEval {
    /// `T_{i,j}` with 1-based indices.
    pub fn get(&self, i: usize, j: usize) -> &Operator {
        &self.blocks[i - 1][j - 1]
    }

    pub fn blocks(&self) -> &Blocks {
        &self.blocks
    }

    pub fn sites(&self) -> usize {
        self.blocks[0][0].sites()
    }

    /// Frobenius norm of the full operator on `C³ ⊗ H`.
    pub fn norm(&self) -> f64 {
        libm::sqrt(
            self.blocks
                .iter()
                .flatten()
                .map(|b| b.norm() * b.norm())
                .sum::<f64>(),
        )
    }

    /// Auxiliary-space transposition `(T^t)_{i,j} = T_{j',i'}`.
    pub fn transposed_t(&self) -> Blocks {
        core::array::from_fn(|i| core::array::from_fn(|j| self.blocks[2 - j][2 - i].clone()))
    }

    /// Transfer matrix `Σ_i T_{i,i}`.
    pub fn trace(&self) -> Operator {
        let mut t = self.blocks[0][0].clone();
        t += &self.blocks[1][1];
        t += &self.blocks[2][2];
        t
    }

    /// Largest `‖T_{i,j}|0⟩‖` over `i > j`.
    pub fn lower_vacuum_residual(&self) -> f64 {
        let vac = vacuum(self.sites());
        let mut worst: f64 = 0.0;
        for i in 1..=3 {
            for j in 1..i {
                worst = worst.max(self.get(i, j).apply(&vac).norm());
            }
        }
        worst
    }
}

/// Product of two auxiliary block matrices.
pub fn block_product(a: &Blocks, b: &Blocks) -> Blocks {
    core::array::from_fn(|i| {
        core::array::from_fn(|j| {
            let mut acc = &a[i][0] * &b[0][j];
            acc += &(&a[i][1] * &b[1][j]);
            acc += &(&a[i][2] * &b[2][j]);
            acc
        })
    })
}

/// Relative Frobenius distance between block matrices.
pub fn block_distance(a: &Blocks, b: &Blocks) -> f64 {
    let mut diff = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            diff += (a[i][j].matrix() - b[i][j].matrix()).norm_squared();
            na += a[i][j].matrix().norm_squared();
            nb += b[i][j].matrix().norm_squared();
        }
    }
    relative_residual(libm::sqrt(diff), libm::sqrt(na), libm::sqrt(nb))
}

/// `T(u) = L_L(u) ⋯ L_1(u)` (auxiliary product, operator entries).
pub fn monodromy(spec: &ChainSpec, u: C64) -> Result<MonodromyEval> {
    let sites = spec.sites();
    let mut blocks: Blocks = core::array::from_fn(|i| {
        core::array::from_fn(|j| {
            if i == j {
                Operator::identity(3, sites)
            } else {
                Operator::zeros(3, sites)
            }
        })
    });
    for k in 1..=sites {
        let local = lax(u, k, spec)?;
        let local: [[DMatrix<C64>; 3]; 3] =
            core::array::from_fn(|i| core::array::from_fn(|a| to_dynamic(&local[i][a])));
        let mut next: Vec<Vec<Operator>> = Vec::with_capacity(3);
        for row in &local {
            let mut out_row = Vec::with_capacity(3);
            for j in 0..3 {
                let mut acc = blocks[0][j].left_mul_local(&row[0], k)?;
                acc += &blocks[1][j].left_mul_local(&row[1], k)?;
                acc += &blocks[2][j].left_mul_local(&row[2], k)?;
                out_row.push(acc);
            }
            next.push(out_row);
        }
        let mut rows = next.into_iter();
        blocks = core::array::from_fn(|_| {
            let mut r = rows.next().unwrap().into_iter();
            core::array::from_fn(|_| r.next().unwrap())
        });
    }
    Ok(MonodromyEval { u, blocks })
}

/// Closed forms `λ₁ = Π f(u,ξ_k)`, `λ₂ = 1`, `λ₃ = Π (u−ξ_k−c/2)/(u−ξ_k+c/2)`.
pub fn vacuum_eigenvalues(spec: &ChainSpec, u: C64) -> Result<[C64; 3]> {
    let c = spec.c();
    let mut l1 = real(1.0);
    let mut l3 = real(1.0);
    for k in 1..=spec.sites() {
        spec.lax_pole_check(u, k)?;
        let d = u - spec.xi[k - 1];
        l1 *= (d + c) / d;
        l3 *= (d - c * 0.5) / (d + c * 0.5);
    }
    Ok([l1, real(1.0), l3])
}

/// Diagonal of `T(u)` read off on the reference vector, together with the
/// worst deviation of `T_{i,i}|0⟩` from a multiple of `|0⟩`.
pub fn vacuum_eigenvalues_direct(t: &MonodromyEval) -> ([C64; 3], f64) {
    let vac = vacuum(t.sites());
    let mut lambdas = [real(0.0); 3];
    let mut dev: f64 = 0.0;
    for (i, lambda) in lambdas.iter_mut().enumerate() {
        let image = t.get(i + 1, i + 1).apply(&vac);
        *lambda = image.data()[0];
        dev = dev.max((&image - &vac.scale(*lambda)).norm());
    }
    (lambdas, dev)
}

/// `z(u) = Π_k (1 − c²/(u−ξ_k)²)`.
pub fn central_z_closed(spec: &ChainSpec, u: C64) -> C64 {
    let c2 = spec.c() * spec.c();
    spec.xi
        .iter()
        .map(|x| real(1.0) - c2 / ((u - x) * (u - x)))
        .product()
}

fn crossing_products(spec: &ChainSpec, u: C64) -> Result<(Blocks, Blocks)> {
    let t = monodromy(spec, u)?;
    let tm = monodromy(spec, u - spec.c() * 0.5)?;
    let tmt = tm.transposed_t();
    Ok((
        block_product(&tmt, t.blocks()),
        block_product(t.blocks(), &tmt),
    ))
}

fn block_scalar(blocks: &Blocks) -> (C64, f64) {
    let n = blocks[0][0].dim();
    let trace: C64 = (0..3).map(|i| blocks[i][i].matrix().trace()).sum();
    let z = trace / real((3 * n) as f64);
    let mut off = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let mut d = blocks[i][j].matrix().clone();
            if i == j {
                for k in 0..n {
                    d[(k, k)] -= z;
                }
            }
            off += d.norm_squared();
        }
    }
    let off = libm::sqrt(off / (3 * n) as f64);
    (z, relative_residual(off, z.norm(), 0.0))
}

/// The scalar `z(u)` with `T^t(u − c/2) T(u) = z(u) I`, read off as the
/// normalised trace. Fails with [`Error::NotScalar`] when the product is
/// not proportional to the identity within [`SCALAR_TOLERANCE`].
pub fn central_z(spec: &ChainSpec, u: C64) -> Result<C64> {
    let (prod, _) = crossing_products(spec, u)?;
    let (z, residual) = block_scalar(&prod);
    if residual > SCALAR_TOLERANCE {
        return Err(Error::NotScalar { residual });
    }
    Ok(z)
}

/// Off-scalar residuals of `T^t(u−c/2)T(u)` and `T(u)T^t(u−c/2)` against
/// `z(u) I` with `z` from the closed form.
pub fn crossing_residuals(spec: &ChainSpec, u: C64) -> Result<(f64, f64)> {
    let (left, right) = crossing_products(spec, u)?;
    let z = central_z_closed(spec, u);
    let check = |blocks: &Blocks| {
        let n = blocks[0][0].dim();
        let mut diff = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let mut d = blocks[i][j].matrix().clone();
                if i == j {
                    for k in 0..n {
                        d[(k, k)] -= z;
                    }
                }
                diff += d.norm_squared();
            }
        }
        relative_residual(libm::sqrt(diff / (3 * n) as f64), z.norm(), 0.0)
    };
    Ok((check(&left), check(&right)))
}

/// Coefficients `T_{i,j}[0]` of `u⁻¹` in `T(u)`.
#[derive(Clone, Debug)]
pub struct ZeroModes {
    blocks: Blocks,
}

impl ZeroModes {
    pub fn get(&self, i: usize, j: usize) -> &Operator {
        &self.blocks[i - 1][j - 1]
    }

    /// `E_{2,3}[0] = T_{3,2}[0] = −T_{2,1}[0]`.
    pub fn e23(&self) -> &Operator {
        self.get(3, 2)
    }
}

/// `T_{i,j}[0] = c Σ_k (E_{ji} − E_{i'j'})_k`, the exact local sum.
pub fn zero_modes(spec: &ChainSpec) -> ZeroModes {
    let sites = spec.sites();
    let c = spec.c();
    let blocks = core::array::from_fn(|i0| {
        core::array::from_fn(|j0| {
            let (i, j) = (i0 + 1, j0 + 1);
            let local = to_dynamic(&((unit(j, i) - unit(prime(i), prime(j))) * c));
            let mut acc = Operator::zeros(3, sites);
            for k in 1..=sites {
                acc += &crate::hilbert::embed(&local, k, sites).expect("site in range");
            }
            acc
        })
    });
    ZeroModes { blocks }
}

/// `‖R(T(u)⊗I)(I⊗T(v)) − (I⊗T(v))(T(u)⊗I)R‖ / (‖T(u)‖‖T(v)‖)` on `C³⊗C³⊗H`.
pub fn rtt_residual(spec: &ChainSpec, u: C64, v: C64) -> Result<f64> {
    let r = r_matrix(u, v, &spec.rparams())?;
    let tu = monodromy(spec, u)?;
    let tv = monodromy(spec, v)?;
    Ok(rtt_residual_evals(&r, &tu, &tv))
}

fn rtt_residual_evals(r: &crate::rmat::Mat9, tu: &MonodromyEval, tv: &MonodromyEval) -> f64 {
    let idx = |a: usize, b: usize| 3 * a + b;
    // forward[(e,c)][(f,d)] = T_ec(u) T_fd(v); backward[(b,d)][(a,c)] = T_bd(v) T_ac(u)
    let mut forward: Vec<Operator> = Vec::with_capacity(81);
    let mut backward: Vec<Operator> = Vec::with_capacity(81);
    for e in 0..3 {
        for c in 0..3 {
            for f in 0..3 {
                for d in 0..3 {
                    forward.push(&tu.blocks[e][c] * &tv.blocks[f][d]);
                    backward.push(&tv.blocks[e][c] * &tu.blocks[f][d]);
                }
            }
        }
    }
    let fw = |e: usize, c: usize, f: usize, d: usize| &forward[idx(e, c) * 9 + idx(f, d)];
    let bw = |b: usize, d: usize, a: usize, c: usize| &backward[idx(b, d) * 9 + idx(a, c)];
    let sites = tu.sites();
    let mut diff = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                for d in 0..3 {
                    let mut acc = Operator::zeros(3, sites);
                    for e in 0..3 {
                        for f in 0..3 {
                            let left = r[(idx(a, b), idx(e, f))];
                            if left != real(0.0) {
                                acc += &fw(e, c, f, d).scale(left);
                            }
                            let right = r[(idx(e, f), idx(c, d))];
                            if right != real(0.0) {
                                acc += &bw(b, f, a, e).scale(-right);
                            }
                        }
                    }
                    diff += acc.matrix().norm_squared();
                }
            }
        }
    }
    libm::sqrt(diff) / (tu.norm() * tv.norm())
}

fn delta(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

/// Residual of the entrywise commutation relation for `{i,j,k,l}` (1-based).
pub fn entry_commutation_residual(
    tu: &MonodromyEval,
    tv: &MonodromyEval,
    c: C64,
    idx: [usize; 4],
) -> Result<f64> {
    let [i, j, k, l] = idx;
    let d = tu.u - tv.u;
    let shifted = d + c * 0.5;
    if d.norm() < POLE_TOLERANCE || shifted.norm() < POLE_TOLERANCE {
        return Err(Error::Pole {
            what: "commutation relation denominators".into(),
            distance: d.norm(),
        });
    }
    let lhs = tu.get(i, j).commutator(tv.get(k, l));
    let mut rhs = &(tv.get(k, j) * tu.get(i, l)) - &(tu.get(k, j) * tv.get(i, l));
    rhs = rhs.scale(c / d);
    let s = c / shifted;
    if delta(k, prime(i)) != 0.0 {
        for p in 1..=3 {
            rhs += &(tu.get(p, j) * tv.get(prime(p), l)).scale(s);
        }
    }
    if delta(l, prime(j)) != 0.0 {
        for p in 1..=3 {
            rhs += &(tv.get(k, prime(p)) * tu.get(i, p)).scale(-s);
        }
    }
    Ok(lhs.distance(&rhs))
}

/// Residual of `[T_{i,j}(u), T_{k,l}[0]] = c(δ_{il}T_{kj} − δ_{kj}T_{il} − δ_{ik'}T_{l'j} + δ_{l'j}T_{ik'})`.
pub fn zero_mode_commutation_residual(
    tu: &MonodromyEval,
    zm: &ZeroModes,
    c: C64,
    idx: [usize; 4],
) -> f64 {
    let [i, j, k, l] = idx;
    let lhs = tu.get(i, j).commutator(zm.get(k, l));
    let mut rhs = Operator::zeros(3, tu.sites());
    let terms = [
        (delta(i, l), (k, j)),
        (-delta(k, j), (i, l)),
        (-delta(i, prime(k)), (prime(l), j)),
        (delta(prime(l), j), (i, prime(k))),
    ];
    for (w, (a, b)) in terms {
        if w != 0.0 {
            rhs += &tu.get(a, b).scale(c * w);
        }
    }
    lhs.distance(&rhs)
}

/// Zero-mode identities at the point `u`: the vanishing modes, the
/// `E₂₃[0]` identification, the commutators with `T(u)` over all 81 index
/// tuples.
pub fn zero_mode_suite(spec: &ChainSpec, u: C64) -> Result<Report> {
    let zm = zero_modes(spec);
    let mut report = Report::new();
    let vanishing = (1..=3)
        .map(|i| zm.get(i, prime(i)).norm())
        .fold(0.0, f64::max);
    report.push("vanishing_zero_modes", vanishing);
    report.push("E23_zero_mode", zm.get(2, 1).distance(&-zm.get(3, 2)));
    let t = monodromy(spec, u)?;
    let mut worst: f64 = 0.0;
    for i in 1..=3 {
        for j in 1..=3 {
            for k in 1..=3 {
                for l in 1..=3 {
                    worst = worst.max(zero_mode_commutation_residual(
                        &t,
                        &zm,
                        spec.c(),
                        [i, j, k, l],
                    ));
                }
            }
        }
    }
    report.push("zero_mode_commutators", worst);
    Ok(report)
}
