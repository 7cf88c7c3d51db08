//! Gauss coordinates `T = F·D·E` of the monodromy matrix and the identities
//! relating them at shifted spectral points.

use alloc::format;

use crate::chain::{block_distance, central_z, monodromy, Blocks, ChainSpec, MonodromyEval};
use crate::error::{Error, Result};
use crate::hilbert::{real, vacuum, Operator, C64};
use crate::report::Report;
use crate::rmat::POLE_TOLERANCE;

/// The nine Gauss coordinates at a fixed spectral point, with the inverses
/// of `k₂` and `k₃` that the extraction needed anyway.
#[derive(Clone, Debug)]
pub struct GaussFrame {
    pub u: C64,
    pub k1: Operator,
    pub k2: Operator,
    pub k3: Operator,
    pub f21: Operator,
    pub f31: Operator,
    pub f32: Operator,
    pub e12: Operator,
    pub e13: Operator,
    pub e23: Operator,
    pub k2_inv: Operator,
    pub k3_inv: Operator,
}

/// Triangular factorisation of `T(u)`.
pub fn gauss_decompose(t: &MonodromyEval) -> Result<GaussFrame> {
    let k3 = t.get(3, 3).clone();
    let k3_inv = k3.inverse_named("k3")?;
    let e13 = &k3_inv * t.get(3, 1);
    let e23 = &k3_inv * t.get(3, 2);
    let f32 = t.get(2, 3) * &k3_inv;
    let f31 = t.get(1, 3) * &k3_inv;
    let f32k3 = &f32 * &k3;
    let f31k3 = &f31 * &k3;
    let k2 = t.get(2, 2) - &(&f32k3 * &e23);
    let k2_inv = k2.inverse_named("k2")?;
    let e12 = &k2_inv * &(t.get(2, 1) - &(&f32k3 * &e13));
    let f21 = &(t.get(1, 2) - &(&f31k3 * &e23)) * &k2_inv;
    let k1 = &(t.get(1, 1) - &(&(&f21 * &k2) * &e12)) - &(&f31k3 * &e13);
    Ok(GaussFrame {
        u: t.u,
        k1,
        k2,
        k3,
        f21,
        f31,
        f32,
        e12,
        e13,
        e23,
        k2_inv,
        k3_inv,
    })
}

/// Monodromy at `u` followed by [`gauss_decompose`].
pub fn gauss_at(spec: &ChainSpec, u: C64) -> Result<GaussFrame> {
    gauss_decompose(&monodromy(spec, u)?)
}

impl GaussFrame {
    pub fn k(&self, i: usize) -> &Operator {
        [&self.k1, &self.k2, &self.k3][i - 1]
    }

    /// `F_{j,i}` for `i < j`.
    pub fn f(&self, j: usize, i: usize) -> &Operator {
        match (j, i) {
            (2, 1) => &self.f21,
            (3, 1) => &self.f31,
            (3, 2) => &self.f32,
            _ => panic!("F_{{{j},{i}}} is not a Gauss coordinate"),
        }
    }

    /// `E_{i,j}` for `i < j`.
    pub fn e(&self, i: usize, j: usize) -> &Operator {
        match (i, j) {
            (1, 2) => &self.e12,
            (1, 3) => &self.e13,
            (2, 3) => &self.e23,
            _ => panic!("E_{{{i},{j}}} is not a Gauss coordinate"),
        }
    }

    fn sites(&self) -> usize {
        self.k3.sites()
    }

    /// Largest of `‖E_{i,j}|0⟩‖` and `‖k_i|0⟩ − λ_i|0⟩‖`, given `λ`.
    pub fn vacuum_residual(&self, lambdas: &[C64; 3]) -> f64 {
        let vac = vacuum(self.sites());
        let mut worst: f64 = 0.0;
        for e in [&self.e12, &self.e13, &self.e23] {
            worst = worst.max(e.apply(&vac).norm());
        }
        for (i, lambda) in lambdas.iter().enumerate() {
            let image = self.k(i + 1).apply(&vac);
            worst = worst.max((&image - &vac.scale(*lambda)).norm());
        }
        worst
    }
}

fn unit_or(i: usize, j: usize, sites: usize, other: impl FnOnce() -> Operator) -> Operator {
    if i == j {
        Operator::identity(3, sites)
    } else {
        other()
    }
}

/// `T_{i,j} = Σ_{ℓ ≥ max(i,j)} F_{ℓ,i} k_ℓ E_{j,ℓ}`.
pub fn reconstruct(frame: &GaussFrame) -> Blocks {
    let sites = frame.sites();
    let fe = |l: usize, i: usize| unit_or(l, i, sites, || frame.f(l, i).clone());
    let ee = |j: usize, l: usize| unit_or(j, l, sites, || frame.e(j, l).clone());
    core::array::from_fn(|i0| {
        core::array::from_fn(|j0| {
            let (i, j) = (i0 + 1, j0 + 1);
            let mut acc = Operator::zeros(3, sites);
            for l in i.max(j)..=3 {
                acc += &(&(&fe(l, i) * frame.k(l)) * &ee(j, l));
            }
            acc
        })
    })
}

/// Relative distance between `T(u)` and the product of its Gauss factors.
pub fn reconstruction_residual(frame: &GaussFrame, t: &MonodromyEval) -> f64 {
    block_distance(&reconstruct(frame), t.blocks())
}

/// Triangular factors as 3×3 operator-entry matrices.
pub fn factor_matrices(frame: &GaussFrame) -> (Blocks, Blocks, Blocks) {
    let sites = frame.sites();
    let zero = || Operator::zeros(3, sites);
    let f = core::array::from_fn(|a| {
        core::array::from_fn(|b| {
            // F has F_{j,i} in row i, column j
            if a == b {
                Operator::identity(3, sites)
            } else if a < b {
                frame.f(b + 1, a + 1).clone()
            } else {
                zero()
            }
        })
    });
    let d = core::array::from_fn(|a| {
        core::array::from_fn(|b| {
            if a == b {
                frame.k(a + 1).clone()
            } else {
                zero()
            }
        })
    });
    let e = core::array::from_fn(|a| {
        core::array::from_fn(|b| {
            if a == b {
                Operator::identity(3, sites)
            } else if a > b {
                frame.e(b + 1, a + 1).clone()
            } else {
                zero()
            }
        })
    });
    (f, d, e)
}

/// Coordinates of `F(u)⁻¹` and `E(u)⁻¹`, `k₁⁻¹`, and the assembled `T̂(u) = (T(u)⁻¹)^t`.
#[derive(Clone, Debug)]
pub struct InverseFrame {
    pub tf21: Operator,
    pub tf31: Operator,
    pub tf32: Operator,
    pub te12: Operator,
    pub te13: Operator,
    pub te23: Operator,
    pub k1_inv: Operator,
    pub t_hat: Blocks,
}

impl InverseFrame {
    fn tf(&self, j: usize, i: usize, sites: usize) -> Operator {
        match (j, i) {
            (2, 1) => self.tf21.clone(),
            (3, 1) => self.tf31.clone(),
            (3, 2) => self.tf32.clone(),
            _ if i == j => Operator::identity(3, sites),
            _ => Operator::zeros(3, sites),
        }
    }

    fn te(&self, i: usize, j: usize, sites: usize) -> Operator {
        match (i, j) {
            (1, 2) => self.te12.clone(),
            (1, 3) => self.te13.clone(),
            (2, 3) => self.te23.clone(),
            _ if i == j => Operator::identity(3, sites),
            _ => Operator::zeros(3, sites),
        }
    }

    /// `F(u)⁻¹` as an operator-entry matrix, `F̃_{j,i}` in row `i`, column `j`.
    pub fn f_inverse(&self) -> Blocks {
        let sites = self.tf21.sites();
        core::array::from_fn(|a| {
            core::array::from_fn(|b| {
                if a <= b {
                    self.tf(b + 1, a + 1, sites)
                } else {
                    Operator::zeros(3, sites)
                }
            })
        })
    }

    /// `E(u)⁻¹`, `Ẽ_{i,j}` in row `j`, column `i`.
    pub fn e_inverse(&self) -> Blocks {
        let sites = self.tf21.sites();
        core::array::from_fn(|a| {
            core::array::from_fn(|b| {
                if a >= b {
                    self.te(b + 1, a + 1, sites)
                } else {
                    Operator::zeros(3, sites)
                }
            })
        })
    }
}

/// Tilde coordinates and `T̂_{i,j} = Σ_{ℓ ≤ min(4−i,4−j)} Ẽ_{ℓ,4−j} k_ℓ⁻¹ F̃_{4−i,ℓ}`.
pub fn inverse_frame(frame: &GaussFrame) -> Result<InverseFrame> {
    let sites = frame.sites();
    let k1_inv = frame.k1.inverse_named("k1")?;
    let mut inv = InverseFrame {
        tf21: -&frame.f21,
        tf32: -&frame.f32,
        tf31: &(&frame.f21 * &frame.f32) - &frame.f31,
        te12: -&frame.e12,
        te23: -&frame.e23,
        te13: &(&frame.e23 * &frame.e12) - &frame.e13,
        k1_inv,
        t_hat: core::array::from_fn(|_| core::array::from_fn(|_| Operator::zeros(3, sites))),
    };
    let k_inv = [&inv.k1_inv, &frame.k2_inv, &frame.k3_inv];
    let t_hat: Blocks = core::array::from_fn(|i0| {
        core::array::from_fn(|j0| {
            let (i, j) = (i0 + 1, j0 + 1);
            let mut acc = Operator::zeros(3, sites);
            for l in 1..=(4 - i).min(4 - j) {
                let left = &inv.te(l, 4 - j, sites) * k_inv[l - 1];
                acc += &(&left * &inv.tf(4 - i, l, sites));
            }
            acc
        })
    });
    inv.t_hat = t_hat;
    Ok(inv)
}

/// Distance between `T̂(u)` assembled from tilde coordinates and `z(u)⁻¹T(u − c/2)`.
pub fn transpose_inverse_residual(spec: &ChainSpec, u: C64) -> Result<f64> {
    let frame = gauss_at(spec, u)?;
    let inv = inverse_frame(&frame)?;
    let z = central_z(spec, u)?;
    let shifted = monodromy(spec, u - spec.c() * 0.5)?;
    let scaled: Blocks = core::array::from_fn(|i| {
        core::array::from_fn(|j| shifted.blocks()[i][j].scale(real(1.0) / z))
    });
    Ok(block_distance(&inv.t_hat, &scaled))
}

/// Identities among frames at `u`, `u ± c/2`, in the form that carries the
/// central element `z(u)` of the fundamental chain.
pub fn identity_suite(spec: &ChainSpec, u: C64) -> Result<Report> {
    spec.guard_point(u)?;
    let half = spec.c() * 0.5;
    let t = monodromy(spec, u)?;
    let g = gauss_decompose(&t)?;
    let gp = gauss_at(spec, u + half)?;
    let gm = gauss_at(spec, u - half)?;
    let z = central_z(spec, u)?;
    let sites = spec.sites();
    let mut report = Report::new();
    report.push("reconstruction", reconstruction_residual(&g, &t));
    report.push("k1_from_shifted_k3", g.k1.distance(&gm.k3_inv.scale(z)));
    report.push("F21_from_shifted_F32", g.f21.distance(&-&gp.f32));
    report.push("E12_from_shifted_E23", g.e12.distance(&-&gp.e23));
    let center = &(&(&g.k2 * &gp.k2) * &gm.k3) * &gp.k3_inv;
    report.push(
        "center_from_k2_k3",
        center.distance(&Operator::identity(3, sites).scale(z)),
    );
    let half_sq = real(-0.5);
    report.push(
        "F31_from_F32_square",
        g.f31.distance(&(&g.f32 * &g.f32).scale(half_sq)),
    );
    report.push(
        "E13_from_E23_square",
        g.e13.distance(&(&g.e23 * &g.e23).scale(half_sq)),
    );
    report.push("transpose_inverse", transpose_inverse_residual(spec, u)?);
    Ok(report)
}

fn g_fun(c: C64, u: C64, v: C64) -> C64 {
    c / (u - v)
}

fn f_fun(c: C64, u: C64, v: C64) -> C64 {
    (u - v + c) / (u - v)
}

/// Exchange relations between Gauss coordinates at `u` and `v`.
pub fn commutator_suite(spec: &ChainSpec, u: C64, v: C64) -> Result<Report> {
    spec.guard_point(u)?;
    spec.guard_point(v)?;
    let c = spec.c();
    let half = c * 0.5;
    let d = u - v;
    for excluded in [real(0.0), c, -c, half, -half] {
        let distance = (d - excluded).norm();
        if distance < POLE_TOLERANCE.max(1e-8) {
            return Err(Error::Pole {
                what: format!("u − v = {d} is excluded"),
                distance,
            });
        }
    }
    let gu = gauss_at(spec, u)?;
    let gv = gauss_at(spec, v)?;
    let gh = gauss_at(spec, u + half)?;
    let gc = gauss_at(spec, u + c)?;
    let gmc = gauss_at(spec, u - c)?;
    let (f, g) = (f_fun(c, u, v), g_fun(c, u, v));
    let mut report = Report::new();

    let lhs = &(&gu.k3 * &gv.f32) * &gu.k3_inv;
    report.push(
        "k3_conj_F32",
        lhs.distance(&(&gv.f32.scale(f) - &gu.f32.scale(g))),
    );
    let lhs = &(&gu.k3_inv * &gv.e23) * &gu.k3;
    report.push(
        "k3_conj_E23",
        lhs.distance(&(&gv.e23.scale(f) - &gu.e23.scale(g))),
    );

    let rhs = (&(&gv.k2 * &gv.k3_inv) - &(&gu.k2 * &gu.k3_inv)).scale(g);
    report.push(
        "E23_F32_commutator",
        gu.e23.commutator(&gv.f32).distance(&rhs),
    );

    let ratio = f / f_fun(c, u, v + half);
    let g2 = g_fun(c, v, u + half);
    let lhs = &(&gu.k2 * &gv.f32) * &gu.k2_inv;
    let rhs = &(&gv.f32.scale(ratio) + &gu.f32.scale(g)) + &gh.f32.scale(g2);
    report.push("k2_conj_F32", lhs.distance(&rhs));
    let lhs = &(&gu.k2_inv * &gv.e23) * &gu.k2;
    let rhs = &(&gv.e23.scale(ratio) + &gu.e23.scale(g)) + &gh.e23.scale(g2);
    report.push("k2_conj_E23", lhs.distance(&rhs));

    report.push("F32_exchange", f32_exchange(&gu, &gv, c));
    let lhs = &(&gu.e23 * &gv.e23).scale(d - half) - &(&gv.e23 * &gu.e23).scale(d + half);
    let rhs = (&(&gu.e23 * &gu.e23) + &(&gv.e23 * &gv.e23)).scale(-half);
    report.push("E23_exchange", lhs.distance(&rhs));

    report.push(
        "k3_shift_F32",
        (&(&gu.k3_inv * &gu.f32) * &gu.k3).distance(&gc.f32),
    );
    report.push(
        "k3_shift_E23",
        (&(&gu.k3 * &gu.e23) * &gu.k3_inv).distance(&gc.e23),
    );
    let rhs = &(&gmc.k2 * &gmc.k3_inv) - &(&gu.k2 * &gu.k3_inv);
    report.push(
        "E23_F32_shift_commutator",
        gu.e23.commutator(&gmc.f32).distance(&rhs),
    );

    report.push("F32_exchange_half_shift", f32_exchange(&gu, &gh, c));
    Ok(report)
}

/// `(u−v+c/2)F(u)F(v) − (u−v−c/2)F(v)F(u)` against `c/2 (F(u)² + F(v)²)`.
fn f32_exchange(gu: &GaussFrame, gv: &GaussFrame, c: C64) -> f64 {
    let half = c * 0.5;
    let d = gu.u - gv.u;
    let lhs = &(&gu.f32 * &gv.f32).scale(d + half) - &(&gv.f32 * &gu.f32).scale(d - half);
    let rhs = (&(&gu.f32 * &gu.f32) + &(&gv.f32 * &gv.f32)).scale(half);
    lhs.distance(&rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{block_product, vacuum_eigenvalues};
    use crate::hilbert::cplx;
    use alloc::vec;

    fn spec2() -> ChainSpec {
        ChainSpec::new(real(1.0), vec![cplx(0.3, 0.1), cplx(-0.4, 0.2)]).unwrap()
    }

    #[test]
    fn roundtrip_and_vacuum() {
        let spec = spec2();
        let u = cplx(0.9, -0.7);
        let t = monodromy(&spec, u).unwrap();
        let g = gauss_decompose(&t).unwrap();
        assert!(reconstruction_residual(&g, &t) < 1e-12);
        assert!(g.vacuum_residual(&vacuum_eigenvalues(&spec, u).unwrap()) < 1e-12);
    }

    #[test]
    fn single_site_k3_on_vacuum() {
        let spec = ChainSpec::new(real(1.0), vec![real(0.0)]).unwrap();
        let g = gauss_at(&spec, real(2.0)).unwrap();
        let image = g.k3.apply(&vacuum(1));
        assert!((image.data()[0] - 0.6).norm() < 1e-14);
        assert!(image.data().iter().skip(1).all(|x| x.norm() < 1e-15));
    }

    #[test]
    fn extraction_is_deterministic() {
        let spec = spec2();
        let a = gauss_at(&spec, cplx(0.2, 1.4)).unwrap();
        let b = gauss_at(&spec, cplx(0.2, 1.4)).unwrap();
        assert_eq!(a.f32.matrix(), b.f32.matrix());
        assert_eq!(a.k1.matrix(), b.k1.matrix());
    }

    #[test]
    fn singular_k3_is_named() {
        // u = ξ − c/2 + ... makes λ₃ vanish and k3 singular on one site
        let spec = ChainSpec::new(real(1.0), vec![real(0.0)]).unwrap();
        match gauss_at(&spec, real(0.5)) {
            Err(Error::Singular { which, .. }) => assert_eq!(which, "k3"),
            other => panic!("expected singular k3, got {other:?}"),
        }
    }

    #[test]
    fn tilde_coordinates() {
        let spec = spec2();
        let g = gauss_at(&spec, cplx(1.3, 0.4)).unwrap();
        let inv = inverse_frame(&g).unwrap();
        assert_eq!(inv.tf21.matrix(), (-&g.f21).matrix());
        let (f, _, e) = factor_matrices(&g);
        let id: Blocks = core::array::from_fn(|a| {
            core::array::from_fn(|b| {
                if a == b {
                    Operator::identity(3, 2)
                } else {
                    Operator::zeros(3, 2)
                }
            })
        });
        assert!(block_distance(&block_product(&f, &inv.f_inverse()), &id) < 1e-13);
        assert!(block_distance(&block_product(&inv.f_inverse(), &f), &id) < 1e-13);
        assert!(block_distance(&block_product(&e, &inv.e_inverse()), &id) < 1e-13);
    }

    #[test]
    fn transpose_inverse_matches_shifted_monodromy() {
        let spec = spec2();
        assert!(transpose_inverse_residual(&spec, cplx(1.3, 0.4)).unwrap() < 1e-8);
    }

    #[test]
    fn identities_hold() {
        let spec = spec2();
        let report = identity_suite(&spec, cplx(0.7, 0.8)).unwrap();
        assert_eq!(report.len(), 8);
        for (name, r) in report.entries() {
            assert!(*r < 1e-8, "{name}: {r}");
        }
    }

    #[test]
    fn squares_on_single_site() {
        let spec = ChainSpec::new(real(1.0), vec![real(0.0)]).unwrap();
        let report = identity_suite(&spec, cplx(1.7, 0.3)).unwrap();
        assert!(report.get("F31_from_F32_square").unwrap() < 1e-12);
        assert!(report.get("E13_from_E23_square").unwrap() < 1e-12);
    }

    #[test]
    fn commutators_hold() {
        let spec = spec2();
        let report = commutator_suite(&spec, cplx(0.7, 0.8), cplx(-1.2, 0.35)).unwrap();
        assert_eq!(report.len(), 11);
        for (name, r) in report.entries() {
            assert!(*r < 1e-8, "{name}: {r}");
        }
    }

    #[test]
    fn excluded_differences() {
        let spec = spec2();
        let u = cplx(0.7, 0.8);
        for d in [0.0, 1.0, -1.0, 0.5, -0.5] {
            assert!(matches!(
                commutator_suite(&spec, u, u - real(d)),
                Err(Error::Pole { .. })
            ));
        }
    }
}
