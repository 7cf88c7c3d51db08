//! Rational functions of the difference of spectral parameters.

use alloc::format;

use crate::error::{Error, Result};
use crate::hilbert::{real, C64};
use crate::rmat::POLE_TOLERANCE;

/// Which function [`RationalKit::eval`] evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RationalFn {
    /// `g(u,v) = c/(u−v)`
    G,
    /// `f(u,v) = (u−v+c)/(u−v)`
    F,
    /// `𝔤(u,v) = (c/2)/(u−v)`
    GHalf,
    /// `𝔣(u,v) = (u−v+c/2)/(u−v)`
    FHalf,
    /// `𝔥(u,v) = (u−v+c/2)/(c/2)`
    HHalf,
}

impl RationalFn {
    /// Accepts `g`, `f`, `frak_g`, `frak_f`, `frak_h`.
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "g" => RationalFn::G,
            "f" => RationalFn::F,
            "frak_g" => RationalFn::GHalf,
            "frak_f" => RationalFn::FHalf,
            "frak_h" => RationalFn::HHalf,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RationalKit {
    pub c: C64,
}

impl RationalKit {
    pub fn new(c: C64) -> Self {
        RationalKit { c }
    }

    fn diff(&self, u: C64, v: C64, what: &str) -> Result<C64> {
        let d = u - v;
        if d.norm() < POLE_TOLERANCE {
            return Err(Error::Pole {
                what: format!("{what}({u}, {v})"),
                distance: d.norm(),
            });
        }
        Ok(d)
    }

    pub fn g(&self, u: C64, v: C64) -> Result<C64> {
        Ok(self.c / self.diff(u, v, "g")?)
    }

    pub fn f(&self, u: C64, v: C64) -> Result<C64> {
        let d = self.diff(u, v, "f")?;
        Ok((d + self.c) / d)
    }

    pub fn g_half(&self, u: C64, v: C64) -> Result<C64> {
        Ok(self.c * 0.5 / self.diff(u, v, "frak_g")?)
    }

    pub fn f_half(&self, u: C64, v: C64) -> Result<C64> {
        let d = self.diff(u, v, "frak_f")?;
        Ok((d + self.c * 0.5) / d)
    }

    /// Entire in `u − v`; never fails.
    pub fn h_half(&self, u: C64, v: C64) -> C64 {
        (u - v + self.c * 0.5) / (self.c * 0.5)
    }

    /// `1/𝔥(u,v)`, failing at the zero of `𝔥`.
    pub fn h_half_inv(&self, u: C64, v: C64) -> Result<C64> {
        let h = self.h_half(u, v);
        if h.norm() < POLE_TOLERANCE {
            return Err(Error::ZeroDenominator {
                what: format!("frak_h({u}, {v})"),
            });
        }
        Ok(real(1.0) / h)
    }

    pub fn eval(&self, which: RationalFn, u: C64, v: C64) -> Result<C64> {
        match which {
            RationalFn::G => self.g(u, v),
            RationalFn::F => self.f(u, v),
            RationalFn::GHalf => self.g_half(u, v),
            RationalFn::FHalf => self.f_half(u, v),
            RationalFn::HHalf => Ok(self.h_half(u, v)),
        }
    }

    /// `𝔣(ā, b̄) = Π_{a∈ā, b∈b̄} 𝔣(a, b)`; the empty product is 1.
    pub fn f_set(&self, a: &[C64], b: &[C64]) -> Result<C64> {
        let mut p = real(1.0);
        for x in a {
            for y in b {
                p *= self.f_half(*x, *y)?;
            }
        }
        Ok(p)
    }

    /// `𝔥(ā, b̄)` as a product.
    pub fn h_set(&self, a: &[C64], b: &[C64]) -> C64 {
        a.iter()
            .flat_map(|x| b.iter().map(move |y| (*x, *y)))
            .map(|(x, y)| self.h_half(x, y))
            .product()
    }

    /// `γ(ū) = Π_{i<j} 𝔣(u_j, u_i)` for the list as given.
    pub fn gamma(&self, params: &[C64]) -> Result<C64> {
        let mut p = real(1.0);
        for i in 0..params.len() {
            for j in (i + 1)..params.len() {
                p *= self.f_half(params[j], params[i])?;
            }
        }
        Ok(p)
    }
}

/// One-shot evaluation by name, see [`RationalFn::from_name`].
pub fn rational(name: &str, u: C64, v: C64, c: C64) -> Result<C64> {
    let which = RationalFn::from_name(name)
        .ok_or_else(|| Error::InvalidChain(format!("unknown rational function {name}")))?;
    RationalKit::new(c).eval(which, u, v)
}
