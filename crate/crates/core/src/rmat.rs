//! The so₃-invariant R-matrix on `C³ ⊗ C³` together with the permutation
//! `P`, the crossing operator `Q` and the anti-diagonal transposition.
//!
//! Indices in the public API are 1-based, matching `T_{i,j}` notation;
//! `i' = 4 − i`. Tensor index `(a, b)` maps to `3(a−1) + (b−1)`.

use nalgebra::SMatrix;

use crate::error::{Error, Result};
use crate::hilbert::{real, C64};
use crate::report::Report;

pub type Mat3 = SMatrix<C64, 3, 3>;
pub type Mat9 = SMatrix<C64, 9, 9>;

/// Absolute distance to the pole set below which `r_matrix` refuses to evaluate.
pub const POLE_TOLERANCE: f64 = 1e-12;

/// Coupling data of the R-matrix. `N = 3` and `κ = N/2 − 1 = 1/2` are fixed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RParams {
    pub c: C64,
}

impl RParams {
    pub const N: usize = 3;
    pub const KAPPA: f64 = 0.5;

    pub fn new(c: C64) -> Self {
        RParams { c }
    }
}

/// `i' = N + 1 − i`.
#[inline]
pub const fn prime(i: usize) -> usize {
    4 - i
}

/// Matrix unit `E_{ij}` (1-based).
pub fn unit(i: usize, j: usize) -> Mat3 {
    let mut m = Mat3::zeros();
    m[(i - 1, j - 1)] = real(1.0);
    m
}

#[inline]
fn pair(a: usize, b: usize) -> usize {
    3 * a + b
}

/// `P = Σ E_{ij} ⊗ E_{ji}`.
pub fn build_p() -> Mat9 {
    let mut p = Mat9::zeros();
    for a in 0..3 {
        for b in 0..3 {
            p[(pair(a, b), pair(b, a))] = real(1.0);
        }
    }
    p
}

/// `Q = Σ E_{ij} ⊗ E_{i'j'}`.
pub fn build_q() -> Mat9 {
    let mut q = Mat9::zeros();
    for i in 0..3 {
        for j in 0..3 {
            q[(pair(i, 2 - i), pair(j, 2 - j))] = real(1.0);
        }
    }
    q
}

/// `R(u,v) = I⊗I + cP/(u−v) − cQ/(u−v+cκ)`.
pub fn r_matrix(u: C64, v: C64, p: &RParams) -> Result<Mat9> {
    let d = u - v;
    let shifted = d + p.c * RParams::KAPPA;
    if d.norm() < POLE_TOLERANCE {
        return Err(Error::Pole {
            what: "R-matrix at u = v".into(),
            distance: d.norm(),
        });
    }
    if shifted.norm() < POLE_TOLERANCE {
        return Err(Error::Pole {
            what: "R-matrix at u − v = −cκ".into(),
            distance: shifted.norm(),
        });
    }
    Ok(Mat9::identity() + build_p() * (p.c / d) - build_q() * (p.c / shifted))
}

/// `(X^t)_{i,j} = X_{j',i'}`.
pub fn transpose_t(x: &Mat3) -> Mat3 {
    Mat3::from_fn(|i, j| x[(2 - j, 2 - i)])
}

/// `U = Σ E_{i i'}`; `X^t = U Xᵀ U`.
pub fn flip() -> Mat3 {
    Mat3::from_fn(|i, j| if i + j == 2 { real(1.0) } else { real(0.0) })
}

/// Tensor factor of `C³ ⊗ C³`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Factor {
    First,
    Second,
}

/// Anti-diagonal transposition applied in one tensor factor.
pub fn transpose_t_factor(x: &Mat9, factor: Factor) -> Mat9 {
    let mut out = Mat9::zeros();
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                for d in 0..3 {
                    out[(pair(a, b), pair(c, d))] = match factor {
                        Factor::First => x[(pair(2 - c, b), pair(2 - a, d))],
                        Factor::Second => x[(pair(a, 2 - d), pair(c, 2 - b))],
                    };
                }
            }
        }
    }
    out
}

/// Reads `x` as a 3×3 matrix in the first factor whose entries are 3×3
/// matrices on the second factor: `blocks[i][j][(b, d)] = x[(i,b),(j,d)]`.
pub fn aux_blocks(x: &Mat9) -> [[Mat3; 3]; 3] {
    core::array::from_fn(|i| {
        core::array::from_fn(|j| Mat3::from_fn(|b, d| x[(pair(i, b), pair(j, d))]))
    })
}

/// `P² = I`, `Q² = 3Q`, `PQ = Q`, `QP = Q` and the transposition exchange
/// `P^{t₁} = Q`, as absolute Frobenius residuals (all exactly zero).
pub fn algebra_suite() -> Report {
    let p = build_p();
    let q = build_q();
    let mut report = Report::new();
    report.push("P_squared", (p * p - Mat9::identity()).norm());
    report.push("Q_squared", (q * q - q * real(3.0)).norm());
    report.push("PQ", (p * q - q).norm());
    report.push("QP", (q * p - q).norm());
    report.push(
        "P_partial_transpose",
        (transpose_t_factor(&p, Factor::First) - q).norm(),
    );
    report
}

/// `‖R^{t₁t₂} − R‖ / ‖R‖`.
pub fn r_trans_residual(u: C64, v: C64, p: &RParams) -> Result<f64> {
    let r = r_matrix(u, v, p)?;
    let rt = transpose_t_factor(&transpose_t_factor(&r, Factor::First), Factor::Second);
    Ok((rt - r).norm() / r.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::cplx;
    use proptest::prelude::*;

    fn basis(a: usize) -> nalgebra::SVector<C64, 3> {
        let mut v = nalgebra::SVector::<C64, 3>::zeros();
        v[a] = real(1.0);
        v
    }

    fn kron(
        x: &nalgebra::SVector<C64, 3>,
        y: &nalgebra::SVector<C64, 3>,
    ) -> nalgebra::SVector<C64, 9> {
        nalgebra::SVector::<C64, 9>::from_fn(|k, _| x[k / 3] * y[k % 3])
    }

    #[test]
    fn p_swaps_factors() {
        let p = build_p();
        for a in 0..3 {
            for b in 0..3 {
                assert_eq!(p * kron(&basis(a), &basis(b)), kron(&basis(b), &basis(a)));
            }
        }
        assert_eq!(p * p, Mat9::identity());
        assert_eq!(p.trace(), real(3.0));
    }

    #[test]
    fn q_on_e1_e3() {
        let q = build_q();
        let expected: nalgebra::SVector<C64, 9> =
            (0..3).map(|i| kron(&basis(i), &basis(2 - i))).sum();
        assert_eq!(q * kron(&basis(0), &basis(2)), expected);
    }

    #[test]
    fn pq_algebra() {
        let p = build_p();
        let q = build_q();
        assert_eq!(q * q, q * real(3.0));
        assert_eq!(p * q, q);
        assert_eq!(q * p, q);
    }

    #[test]
    fn algebra_suite_exact() {
        let report = algebra_suite();
        assert_eq!(report.len(), 5);
        assert_eq!(report.max_residual(), 0.0);
    }

    #[test]
    fn partial_transposes_exchange_p_and_q() {
        let p = build_p();
        let q = build_q();
        assert_eq!(transpose_t_factor(&p, Factor::First), q);
        assert_eq!(transpose_t_factor(&q, Factor::First), p);
        assert_eq!(transpose_t_factor(&p, Factor::Second), q);
    }

    #[test]
    fn r_matrix_at_unit_separation() {
        // κ = 1/2, c = 1: R(1,0) = I + P − (2/3) Q.
        let r = r_matrix(real(1.0), real(0.0), &RParams::new(real(1.0))).unwrap();
        let expected = Mat9::identity() + build_p() - build_q() * real(2.0 / 3.0);
        assert!((r - expected).norm() < 1e-15);
    }

    #[test]
    fn r_matrix_large_separation() {
        let p = RParams::new(real(1.0));
        let r = r_matrix(real(1e9), real(0.0), &p).unwrap();
        assert!((r - Mat9::identity()).norm() < 1e-6 * (build_p() * p.c).norm());
    }

    #[test]
    fn r_matrix_poles() {
        let p = RParams::new(cplx(1.0, 0.5));
        assert!(matches!(
            r_matrix(real(0.3), real(0.3), &p),
            Err(Error::Pole { .. })
        ));
        let v = real(0.2);
        assert!(matches!(
            r_matrix(v - p.c * 0.5, v, &p),
            Err(Error::Pole { .. })
        ));
    }

    #[test]
    fn transpose_t_examples() {
        assert_eq!(transpose_t(&unit(1, 1)), unit(3, 3));
        let x = Mat3::from_fn(|i, j| cplx(i as f64 + 0.5, j as f64 - 0.25 * i as f64));
        assert_eq!(transpose_t(&transpose_t(&x)), x);
        let u = flip();
        assert_eq!(transpose_t(&x), u * x.transpose() * u);
    }

    #[test]
    fn aux_blocks_of_p() {
        let blocks = aux_blocks(&build_p());
        for i in 1..=3 {
            for j in 1..=3 {
                assert_eq!(blocks[i - 1][j - 1], unit(j, i));
            }
        }
    }

    proptest! {
        #[test]
        fn r_matrix_is_t1t2_symmetric(ur in -3.0..3.0f64, ui in -3.0..3.0f64,
                                     vr in -3.0..3.0f64, vi in -3.0..3.0f64,
                                     cr in 0.2..2.0f64, ci in -1.0..1.0f64) {
            let p = RParams::new(cplx(cr, ci));
            let (u, v) = (cplx(ur, ui), cplx(vr, vi));
            prop_assume!((u - v).norm() > 1e-3 && (u - v + p.c * 0.5).norm() > 1e-3);
            let r = r_matrix(u, v, &p).unwrap();
            let rt = transpose_t_factor(&transpose_t_factor(&r, Factor::First), Factor::Second);
            prop_assert!((rt - r).norm() <= 1e-12 * r.norm());
        }
    }
}
