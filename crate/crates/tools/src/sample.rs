//! Seeded random chains and evaluation points. Every draw keeps a margin
//! from the singular sets so residuals stay well conditioned.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use so3bethe::hilbert::{cplx, real};
use so3bethe::{ChainSpec, C64};

/// Distance kept from poles and from shifted coincidences.
pub const MARGIN: f64 = 0.08;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn shifts(c: C64) -> [C64; 5] {
    [real(0.0), c * 0.5, -c * 0.5, c, -c]
}

fn clear_of(a: C64, b: C64, c: C64) -> bool {
    shifts(c).iter().all(|s| (a - b - s).norm() > MARGIN)
}

/// Real coupling near 1 and real inhomogeneities in `[-1, 1]`, or complex
/// versions of both.
pub fn random_chain(rng: &mut impl Rng, sites: usize, complex: bool) -> ChainSpec {
    loop {
        let c = if complex {
            cplx(rng.random_range(0.7..1.3), rng.random_range(-0.4..0.4))
        } else {
            real(rng.random_range(0.7..1.3))
        };
        let xi: Vec<C64> = (0..sites)
            .map(|_| {
                let im = if complex {
                    rng.random_range(-0.5..0.5)
                } else {
                    0.0
                };
                cplx(rng.random_range(-1.0..1.0), im)
            })
            .collect();
        let separated = (0..sites).all(|j| (j + 1..sites).all(|k| clear_of(xi[j], xi[k], c)));
        if separated {
            if let Ok(spec) = ChainSpec::new(c, xi) {
                return spec;
            }
        }
    }
}

/// A point with `u + s` clear of `ξ + t` for all shifts `s, t ∈ {0, ±c/2, ±c}`.
pub fn random_point(rng: &mut impl Rng, spec: &ChainSpec) -> C64 {
    random_point_avoiding(rng, spec, &[])
}

/// As [`random_point`], also clear of every point in `others` up to shifts.
pub fn random_point_avoiding(rng: &mut impl Rng, spec: &ChainSpec, others: &[C64]) -> C64 {
    let c = spec.c();
    loop {
        let u = cplx(rng.random_range(-2.0..2.0), rng.random_range(-1.5..1.5));
        let off_chain = spec
            .xi()
            .iter()
            .all(|x| shifts(c).iter().all(|s| clear_of(u + s, *x, c)));
        if off_chain
            && others
                .iter()
                .all(|o| clear_of(u, *o, c) && clear_of(u, *o, c * 2.0))
        {
            return u;
        }
    }
}

/// `r` Bethe parameters pairwise clear of each other's shifts.
pub fn random_params(rng: &mut impl Rng, spec: &ChainSpec, r: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(r);
    for _ in 0..r {
        let u = random_point_avoiding(rng, spec, &out);
        out.push(u);
    }
    out
}

/// A point clear of the chain and of `params` (and their shifts).
pub fn random_probe(rng: &mut impl Rng, spec: &ChainSpec, params: &[C64]) -> C64 {
    random_point_avoiding(rng, spec, params)
}
