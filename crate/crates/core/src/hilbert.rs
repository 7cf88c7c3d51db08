//! Dense complex operators on the chain Hilbert space `(C^d)^{⊗L}`.
//!
//! Basis ordering: site 1 is the most significant tensor factor, so the
//! product state `e_{a_1} ⊗ … ⊗ e_{a_L}` sits at index `Σ a_k d^{L-k}`
//! (zero-based digits).

use core::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Condition estimate above which an inversion is rejected.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Norm below which residuals are reported absolutely instead of relatively.
pub const ABSOLUTE_FLOOR: f64 = 1e-12;

#[inline]
pub fn cplx(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// `‖a − b‖ / max(‖a‖, ‖b‖)`, falling back to the absolute difference when
/// both sides are below [`ABSOLUTE_FLOOR`].
pub fn relative_residual(diff: f64, lhs: f64, rhs: f64) -> f64 {
    let scale = lhs.max(rhs);
    if scale < ABSOLUTE_FLOOR {
        diff
    } else {
        diff / scale
    }
}

fn pow(base: usize, exp: usize) -> usize {
    (0..exp).fold(1, |acc, _| acc * base)
}

/// Square operator on `(C^d)^{⊗L}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    mat: DMatrix<C64>,
    site_dim: usize,
    sites: usize,
}

impl Operator {
    pub fn identity(site_dim: usize, sites: usize) -> Self {
        let dim = pow(site_dim, sites);
        Operator {
            mat: DMatrix::identity(dim, dim),
            site_dim,
            sites,
        }
    }

    pub fn zeros(site_dim: usize, sites: usize) -> Self {
        let dim = pow(site_dim, sites);
        Operator {
            mat: DMatrix::zeros(dim, dim),
            site_dim,
            sites,
        }
    }

    pub fn from_matrix(mat: DMatrix<C64>, site_dim: usize, sites: usize) -> Result<Self> {
        let dim = pow(site_dim, sites);
        if mat.nrows() != dim || mat.ncols() != dim {
            return Err(Error::Index {
                index: mat.nrows().max(mat.ncols()),
                bound: dim,
            });
        }
        Ok(Operator {
            mat,
            site_dim,
            sites,
        })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn site_dim(&self) -> usize {
        self.site_dim
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.mat.norm()
    }

    pub fn scale(&self, s: C64) -> Operator {
        Operator {
            mat: &self.mat * s,
            site_dim: self.site_dim,
            sites: self.sites,
        }
    }

    pub fn apply(&self, v: &HVector) -> HVector {
        HVector {
            data: &self.mat * &v.data,
        }
    }

    pub fn commutator(&self, other: &Operator) -> Operator {
        &(self * other) - &(other * self)
    }

    /// Relative Frobenius distance to `other`, see [`relative_residual`].
    pub fn distance(&self, other: &Operator) -> f64 {
        relative_residual((&self.mat - &other.mat).norm(), self.norm(), other.norm())
    }

    /// Deviation from `s·I` relative to `|s|`, where `s` is the mean diagonal entry.
    pub fn scalar_part(&self) -> (C64, f64) {
        let n = self.dim();
        let s = self.mat.trace() / real(n as f64);
        let mut dev = self.mat.clone();
        for k in 0..n {
            dev[(k, k)] -= s;
        }
        let off = dev.norm() / libm::sqrt(n as f64);
        (s, relative_residual(off, s.norm(), 0.0))
    }

    /// Inverse with a norm-based condition estimate `‖X‖₁‖X⁻¹‖₁`.
    pub fn inverse(&self) -> Result<Operator> {
        self.inverse_named("operator")
    }

    /// All eigenvalues via complex Schur decomposition, sorted by `(Re, Im)`.
    pub fn eigenvalues(&self) -> Result<alloc::vec::Vec<C64>> {
        let schur = nalgebra::linalg::Schur::try_new(self.mat.clone(), f64::EPSILON, 100_000)
            .ok_or(Error::NoConvergence {
                iterations: 100_000,
                residual: f64::NAN,
                trace: alloc::vec::Vec::new(),
            })?;
        let values = schur.eigenvalues().ok_or(Error::NoConvergence {
            iterations: 0,
            residual: f64::NAN,
            trace: alloc::vec::Vec::new(),
        })?;
        let mut out: alloc::vec::Vec<C64> = values.iter().copied().collect();
        out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        Ok(out)
    }

    pub fn inverse_named(&self, which: &str) -> Result<Operator> {
        let inv = self
            .mat
            .clone()
            .lu()
            .try_inverse()
            .ok_or_else(|| Error::Singular {
                which: which.into(),
                condition: f64::INFINITY,
            })?;
        let condition = one_norm(&self.mat) * one_norm(&inv);
        if !condition.is_finite() || condition > CONDITION_LIMIT {
            return Err(Error::Singular {
                which: which.into(),
                condition,
            });
        }
        Ok(Operator {
            mat: inv,
            site_dim: self.site_dim,
            sites: self.sites,
        })
    }

    /// `embed(local, site) · self` without forming the embedded operator.
    pub fn left_mul_local(&self, local: &DMatrix<C64>, site: usize) -> Result<Operator> {
        check_site(site, self.sites)?;
        let d = self.site_dim;
        let stride = pow(d, self.sites - site);
        let dim = self.dim();
        let mut out = DMatrix::zeros(dim, dim);
        for row in 0..dim {
            let a = (row / stride) % d;
            let base = row - a * stride;
            for b in 0..d {
                let w = local[(a, b)];
                if w == C64::new(0.0, 0.0) {
                    continue;
                }
                let src = base + b * stride;
                for col in 0..dim {
                    out[(row, col)] += w * self.mat[(src, col)];
                }
            }
        }
        Ok(Operator {
            mat: out,
            site_dim: d,
            sites: self.sites,
        })
    }
}

fn one_norm(m: &DMatrix<C64>) -> f64 {
    m.column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn check_site(site: usize, sites: usize) -> Result<()> {
    if site == 0 || site > sites {
        Err(Error::Index {
            index: site,
            bound: sites,
        })
    } else {
        Ok(())
    }
}

/// `I^{⊗(k−1)} ⊗ local ⊗ I^{⊗(L−k)}` for the 1-based site `k`.
pub fn embed(local: &DMatrix<C64>, site: usize, sites: usize) -> Result<Operator> {
    check_site(site, sites)?;
    let d = local.nrows();
    let left: DMatrix<C64> = DMatrix::identity(pow(d, site - 1), pow(d, site - 1));
    let right: DMatrix<C64> = DMatrix::identity(pow(d, sites - site), pow(d, sites - site));
    let mat = left.kronecker(local).kronecker(&right);
    Ok(Operator {
        mat,
        site_dim: d,
        sites,
    })
}

/// Reference state `e_1^{⊗L}` for three-dimensional sites.
pub fn vacuum(sites: usize) -> HVector {
    vacuum_with_dim(3, sites)
}

pub fn vacuum_with_dim(site_dim: usize, sites: usize) -> HVector {
    let mut data = DVector::zeros(pow(site_dim, sites));
    data[0] = real(1.0);
    HVector { data }
}

/// Vector in the chain Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub struct HVector {
    data: DVector<C64>,
}

impl HVector {
    pub fn zeros(dim: usize) -> Self {
        HVector {
            data: DVector::zeros(dim),
        }
    }

    pub fn from_vec(entries: alloc::vec::Vec<C64>) -> Self {
        HVector {
            data: DVector::from_vec(entries),
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &DVector<C64> {
        &self.data
    }

    pub fn entries(&self) -> impl Iterator<Item = &C64> {
        self.data.iter()
    }

    pub fn norm(&self) -> f64 {
        self.data.norm()
    }

    pub fn scale(&self, s: C64) -> HVector {
        HVector {
            data: &self.data * s,
        }
    }

    pub fn conj(&self) -> HVector {
        HVector {
            data: self.data.map(|z| z.conj()),
        }
    }

    /// Bilinear pairing `Σ_k a_k b_k` (no conjugation).
    pub fn pair(&self, other: &HVector) -> C64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn distance(&self, other: &HVector) -> f64 {
        relative_residual((&self.data - &other.data).norm(), self.norm(), other.norm())
    }

    pub fn axpy(&mut self, a: C64, x: &HVector) {
        self.data.axpy(a, &x.data, real(1.0));
    }
}

impl<'a> Mul<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn mul(self, rhs: &'a Operator) -> Operator {
        Operator {
            mat: &self.mat * &rhs.mat,
            site_dim: self.site_dim,
            sites: self.sites,
        }
    }
}

impl<'a> Add<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn add(self, rhs: &'a Operator) -> Operator {
        Operator {
            mat: &self.mat + &rhs.mat,
            site_dim: self.site_dim,
            sites: self.sites,
        }
    }
}

impl<'a> Sub<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn sub(self, rhs: &'a Operator) -> Operator {
        Operator {
            mat: &self.mat - &rhs.mat,
            site_dim: self.site_dim,
            sites: self.sites,
        }
    }
}

impl AddAssign<&Operator> for Operator {
    fn add_assign(&mut self, rhs: &Operator) {
        self.mat += &rhs.mat;
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale(real(-1.0))
    }
}

impl<'a> Add<&'a HVector> for &'a HVector {
    type Output = HVector;
    fn add(self, rhs: &'a HVector) -> HVector {
        HVector {
            data: &self.data + &rhs.data,
        }
    }
}

impl<'a> Sub<&'a HVector> for &'a HVector {
    type Output = HVector;
    fn sub(self, rhs: &'a HVector) -> HVector {
        HVector {
            data: &self.data - &rhs.data,
        }
    }
}
