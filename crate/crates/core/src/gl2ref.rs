//! A rational gl₂ chain with coupling `c/2` and doubled inhomogeneities
//! `(ξ_k, ξ_k + c/2)`, whose vacuum ratio `λ₁/λ₂` equals `λ₂/λ₃` of the
//! parent chain. Used for the scalar-product ratio test.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::bethe::{scalar_product, BetheContext};
use crate::chain::ChainSpec;
use crate::error::{Error, Result};
use crate::hilbert::{real, relative_residual, vacuum_with_dim, HVector, Operator, C64};
use crate::rmat::POLE_TOLERANCE;
use crate::spectrum::BetheSystem;

#[derive(Clone, Debug, PartialEq)]
pub struct Gl2ChainSpec {
    c: C64,
    xi: Vec<C64>,
}

impl Gl2ChainSpec {
    /// Coupling `c/2`, sites `ξ₁, ξ₁ + c/2, ξ₂, ξ₂ + c/2, …`.
    pub fn from_parent(spec: &ChainSpec) -> Self {
        let half = spec.c() * 0.5;
        let xi = spec.xi().iter().flat_map(|x| [*x, x + half]).collect();
        Gl2ChainSpec { c: half, xi }
    }

    pub fn c(&self) -> C64 {
        self.c
    }

    pub fn xi(&self) -> &[C64] {
        &self.xi
    }

    pub fn sites(&self) -> usize {
        self.xi.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.xi.len()
    }

    pub fn is_real(&self) -> bool {
        self.c.im == 0.0 && self.xi.iter().all(|x| x.im == 0.0)
    }
}

/// `T(u)` of the gl₂ chain as a 2×2 matrix of operators.
#[derive(Clone, Debug)]
pub struct Gl2Monodromy {
    pub u: C64,
    blocks: [[Operator; 2]; 2],
}

impl Gl2Monodromy {
    pub fn get(&self, i: usize, j: usize) -> &Operator {
        &self.blocks[i - 1][j - 1]
    }
}

fn unit2(i: usize, j: usize) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(2, 2);
    m[(i - 1, j - 1)] = real(1.0);
    m
}

/// `T(u) = L_{2L}(u) ⋯ L_1(u)` with `L_k(u)_{ij} = δ_{ij} + (c/2)/(u − ξ'_k) E_{ji}`.
pub fn gl2_monodromy(spec: &Gl2ChainSpec, u: C64) -> Result<Gl2Monodromy> {
    let sites = spec.sites();
    let mut blocks: [[Operator; 2]; 2] = core::array::from_fn(|i| {
        core::array::from_fn(|j| {
            if i == j {
                Operator::identity(2, sites)
            } else {
                Operator::zeros(2, sites)
            }
        })
    });
    for k in 1..=sites {
        let d = u - spec.xi[k - 1];
        if d.norm() < POLE_TOLERANCE {
            return Err(Error::Pole {
                what: format!("gl2 Lax operator of site {k} at {u}"),
                distance: d.norm(),
            });
        }
        let w = spec.c / d;
        let local: [[DMatrix<C64>; 2]; 2] = core::array::from_fn(|i| {
            core::array::from_fn(|j| {
                let mut m = unit2(j + 1, i + 1) * w;
                if i == j {
                    m += DMatrix::identity(2, 2);
                }
                m
            })
        });
        let mut next: Vec<Operator> = Vec::with_capacity(4);
        for row in &local {
            for j in 0..2 {
                let mut acc = blocks[0][j].left_mul_local(&row[0], k)?;
                acc += &blocks[1][j].left_mul_local(&row[1], k)?;
                next.push(acc);
            }
        }
        let mut it = next.into_iter();
        blocks = core::array::from_fn(|_| core::array::from_fn(|_| it.next().unwrap()));
    }
    Ok(Gl2Monodromy { u, blocks })
}

/// Largest relative mismatch, over `points`, between `λ₁/λ₂` read off the
/// gl₂ chain and `λ₂/λ₃` of the parent.
pub fn vacuum_ratio_residual(parent: &ChainSpec, points: &[C64]) -> Result<f64> {
    let spec = Gl2ChainSpec::from_parent(parent);
    let system = BetheSystem::new(parent.clone(), 0);
    let vac = vacuum_with_dim(2, spec.sites());
    let mut worst: f64 = 0.0;
    for &u in points {
        let t = gl2_monodromy(&spec, u)?;
        let l1 = t.get(1, 1).apply(&vac).data()[0];
        let l2 = t.get(2, 2).apply(&vac).data()[0];
        let target = system.lambda_ratio(u)?;
        let ratio = l1 / l2;
        worst = worst.max(relative_residual(
            (ratio - target).norm(),
            ratio.norm(),
            target.norm(),
        ));
    }
    Ok(worst)
}

/// `Π T₁₂(v_i) |0⟩` (the factors commute).
pub fn gl2_bethe(spec: &Gl2ChainSpec, params: &[C64]) -> Result<HVector> {
    let mut v = vacuum_with_dim(2, spec.sites());
    for &p in params {
        v = gl2_monodromy(spec, p)?.get(1, 2).apply(&v);
    }
    Ok(v)
}

/// `⟨dual(ū)|B(v̄)⟩` with the dual built as for the so₃ chain: the
/// conjugate of `B(ū*)`, paired bilinearly.
pub fn gl2_scalar(spec: &Gl2ChainSpec, left: &[C64], right: &[C64]) -> Result<C64> {
    if !spec.is_real() {
        return Err(Error::Reality);
    }
    let conj: Vec<C64> = left.iter().map(|u| u.conj()).collect();
    let dual = gl2_bethe(spec, &conj)?.conj();
    Ok(dual.pair(&gl2_bethe(spec, right)?))
}

/// Ratio test outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct SpCorrReport {
    pub r: usize,
    pub samples: usize,
    pub rho: Vec<C64>,
    pub rho_mean: C64,
    /// `max_k |ρ_k − mean| / |mean|`.
    pub rho_spread: f64,
    /// `mean / 2^{−r}`.
    pub two_pow_minus_r_ratio: C64,
}

/// Magnitude below which `S^{gl2}` makes the ratio meaningless.
pub const DEGENERATE_SCALAR: f64 = 1e-12;

/// `ρ = S^{so3}(ū|v̄) / S^{gl2}(ū|v̄)` over the given `(ū, v̄)` samples.
pub fn sp_corr_test(
    spec: &ChainSpec,
    r: usize,
    samples: &[(Vec<C64>, Vec<C64>)],
) -> Result<SpCorrReport> {
    if !spec.is_real() {
        return Err(Error::Reality);
    }
    let gl2 = Gl2ChainSpec::from_parent(spec);
    let mut ctx = BetheContext::new(spec.clone());
    let mut rho = Vec::with_capacity(samples.len());
    for (index, (us, vs)) in samples.iter().enumerate() {
        if us.len() != r || vs.len() != r {
            return Err(Error::Cardinality {
                needed: r,
                available: us.len().min(vs.len()),
            });
        }
        let so3 = scalar_product(&mut ctx, us, vs)?;
        let reference = gl2_scalar(&gl2, us, vs)?;
        if reference.norm() < DEGENERATE_SCALAR {
            return Err(Error::DegenerateSample {
                index,
                magnitude: reference.norm(),
            });
        }
        rho.push(so3 / reference);
    }
    let n = rho.len().max(1) as f64;
    let mean: C64 = rho.iter().sum::<C64>() / n;
    let spread = rho.iter().map(|x| (x - mean).norm()).fold(0.0, f64::max) / mean.norm();
    Ok(SpCorrReport {
        r,
        samples: rho.len(),
        rho,
        rho_mean: mean,
        rho_spread: spread,
        two_pow_minus_r_ratio: mean * libm::pow(2.0, r as f64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::cplx;
    use alloc::vec;

    fn parent() -> ChainSpec {
        ChainSpec::new(real(1.0), vec![real(0.3), real(-0.45)]).unwrap()
    }

    fn pts(r: usize, shift: f64) -> Vec<C64> {
        (0..r)
            .map(|k| cplx(0.4 * k as f64 - 0.3 + shift, 0.5 + 0.3 * k as f64 - shift))
            .collect()
    }

    #[test]
    fn doubling_layout() {
        let g = Gl2ChainSpec::from_parent(&parent());
        assert_eq!(g.sites(), 4);
        assert_eq!(g.c(), real(0.5));
        let want = [0.3, 0.8, -0.45, 0.05];
        for (x, w) in g.xi().iter().zip(want) {
            assert!((x - w).norm() < 1e-15);
        }
    }

    #[test]
    fn vacuum_ratio_matches_parent() {
        let points: Vec<C64> = (0..10)
            .map(|k| cplx(0.37 * k as f64 - 1.4, 0.9 - 0.21 * k as f64))
            .collect();
        assert!(vacuum_ratio_residual(&parent(), &points).unwrap() < 1e-12);
    }

    #[test]
    fn gl2_structure() {
        let g = Gl2ChainSpec::from_parent(&parent());
        let u = cplx(0.7, 0.2);
        let t = gl2_monodromy(&g, u).unwrap();
        let vac = vacuum_with_dim(2, 4);
        assert!(t.get(2, 1).apply(&vac).norm() < 1e-15);
        let l1: C64 = g.xi().iter().map(|x| (u - x + 0.5) / (u - x)).product();
        assert!(t.get(1, 1).apply(&vac).distance(&vac.scale(l1)) < 1e-13);
        assert!(t.get(2, 2).apply(&vac).distance(&vac) < 1e-13);
        let far = gl2_monodromy(&g, real(1e8)).unwrap();
        assert!(far.get(1, 1).distance(&Operator::identity(2, 4)) < 1e-7);
        // RTT: [T12(u), T12(v)] = 0 and [T11(u), T22(v)] = g(u,v)(T21(v)T12(u) − T21(u)T12(v))
        let v = cplx(-0.4, 0.6);
        let tv = gl2_monodromy(&g, v).unwrap();
        assert!(t.get(1, 2).commutator(tv.get(1, 2)).norm() < 1e-12);
        let gg = g.c() / (u - v);
        let lhs = t.get(1, 1).commutator(tv.get(2, 2));
        let rhs = (&(tv.get(2, 1) * t.get(1, 2)) - &(t.get(2, 1) * tv.get(1, 2))).scale(gg);
        assert!(lhs.distance(&rhs) < 1e-12);
    }

    #[test]
    fn gl2_scalar_small() {
        let g = Gl2ChainSpec::from_parent(&ChainSpec::new(real(1.0), vec![real(0.0)]).unwrap());
        assert_eq!(gl2_scalar(&g, &[], &[]).unwrap(), real(1.0));
        // dim-4 brute force: B(v) = T12(v)|0⟩ has entries on the one-flip states
        let (u, v) = (cplx(0.8, 0.3), cplx(-0.6, 0.5));
        let bu = gl2_bethe(&g, &[u.conj()]).unwrap();
        let bv = gl2_bethe(&g, &[v]).unwrap();
        let direct: C64 = (0..4).map(|k| bu.data()[k].conj() * bv.data()[k]).sum();
        assert!((gl2_scalar(&g, &[u], &[v]).unwrap() - direct).norm() < 1e-14);
    }

    #[test]
    fn gl2_scalar_symmetric() {
        let g = Gl2ChainSpec::from_parent(&parent());
        let (us, vs) = (pts(2, 0.0), pts(2, 0.17));
        let a = gl2_scalar(&g, &us, &vs).unwrap();
        let b = gl2_scalar(&g, &[us[1], us[0]], &[vs[1], vs[0]]).unwrap();
        assert!((a - b).norm() < 1e-12 * a.norm());
    }

    #[test]
    fn ratio_constant() {
        for r in 0..=2 {
            let samples: Vec<(Vec<C64>, Vec<C64>)> = (0..6)
                .map(|k| (pts(r, 0.11 * k as f64), pts(r, -0.07 * k as f64 + 0.05)))
                .collect();
            let report = sp_corr_test(&parent(), r, &samples).unwrap();
            assert!(report.rho_spread < 1e-6, "r={r}: {report:?}");
            let expected = libm::pow(2.0, r as f64);
            assert!(
                (report.rho_mean - expected).norm() < 1e-8 * expected,
                "r={r}: {report:?}"
            );
        }
    }

    #[test]
    fn complex_parent_rejected() {
        let spec = ChainSpec::new(cplx(1.0, 0.2), vec![real(0.0)]).unwrap();
        assert!(matches!(sp_corr_test(&spec, 0, &[]), Err(Error::Reality)));
    }
}
