#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use so3bethe::hilbert::{cplx, real};
use so3bethe::{ChainSpec, C64};

pub const MARGIN: f64 = 0.08;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn clear(a: C64, b: C64, c: C64) -> bool {
    [real(0.0), c * 0.5, -c * 0.5, c, -c, c * 2.0, -c * 2.0]
        .iter()
        .all(|s| (a - b - s).norm() > MARGIN)
}

pub fn chain(rng: &mut ChaCha8Rng, sites: usize) -> ChainSpec {
    loop {
        let c = cplx(rng.random_range(0.7..1.3), rng.random_range(-0.3..0.3));
        let xi: Vec<C64> = (0..sites)
            .map(|_| cplx(rng.random_range(-1.0..1.0), rng.random_range(-0.4..0.4)))
            .collect();
        if (0..sites).all(|j| (j + 1..sites).all(|k| clear(xi[j], xi[k], c))) {
            if let Ok(spec) = ChainSpec::new(c, xi) {
                return spec;
            }
        }
    }
}

pub fn real_chain(rng: &mut ChaCha8Rng, sites: usize) -> ChainSpec {
    loop {
        let c = real(rng.random_range(0.7..1.3));
        let xi: Vec<C64> = (0..sites)
            .map(|_| real(rng.random_range(-1.0..1.0)))
            .collect();
        if (0..sites).all(|j| (j + 1..sites).all(|k| clear(xi[j], xi[k], c))) {
            if let Ok(spec) = ChainSpec::new(c, xi) {
                return spec;
            }
        }
    }
}

/// A point clear of the chain's singular set and of `others`, up to shifts.
pub fn point(rng: &mut ChaCha8Rng, spec: &ChainSpec, others: &[C64]) -> C64 {
    let c = spec.c();
    loop {
        let u = cplx(rng.random_range(-2.0..2.0), rng.random_range(-1.5..1.5));
        let shifts = [real(0.0), c * 0.5, -c * 0.5, c, -c];
        if spec
            .xi()
            .iter()
            .all(|x| shifts.iter().all(|s| clear(u + s, *x, c)))
            && others.iter().all(|o| clear(u, *o, c))
        {
            return u;
        }
    }
}

pub fn params(rng: &mut ChaCha8Rng, spec: &ChainSpec, r: usize) -> Vec<C64> {
    let mut out = Vec::new();
    for _ in 0..r {
        let u = point(rng, spec, &out);
        out.push(u);
    }
    out
}
