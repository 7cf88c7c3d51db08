//! JSON run configuration. Complex numbers are `[re, im]` pairs.
//!
//! ```json
//! { "chain": { "L": 2, "c": [1, 0], "xi": [[-0.4, 0], [0.4, 0]] },
//!   "seed": 7, "tol": 1e-8, "r": 1 }
//! ```
//! A chain with `L` but no `xi` is drawn at random from the seed; a missing
//! chain is a random real `L = 2` chain.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use so3bethe::hilbert::cplx;
use so3bethe::{ChainSpec, C64};

use crate::sample;

pub const SCHEMA: u32 = 1;
pub const DEFAULT_SEED: u64 = 1;

pub type Complex = [f64; 2];

pub fn to_c64(z: Complex) -> C64 {
    cplx(z[0], z[1])
}

pub fn from_c64(z: C64) -> Complex {
    [z.re, z.im]
}

pub fn from_slice(zs: &[C64]) -> Vec<Complex> {
    zs.iter().map(|z| from_c64(*z)).collect()
}

#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub sites: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Complex>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<Vec<Complex>>,
    /// Draw complex `c` and `ξ` when sampling.
    #[serde(default)]
    pub complex: bool,
}

impl ChainConfig {
    pub fn describe(spec: &ChainSpec) -> Self {
        ChainConfig {
            sites: Some(spec.sites()),
            c: Some(from_c64(spec.c())),
            xi: Some(from_slice(spec.xi())),
            complex: !spec.is_real(),
        }
    }
}

/// Every field is optional; commands pick what they need and fall back to
/// seeded draws.
#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: Option<u32>,
    #[serde(default)]
    pub chain: ChainConfig,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    /// Number of Bethe parameters.
    pub r: Option<usize>,
    pub params: Option<Vec<Complex>>,
    /// Action indices (1-based).
    pub i: Option<usize>,
    pub j: Option<usize>,
    pub z: Option<Complex>,
    /// Evaluation points for the spectrum checks.
    pub points: Option<Vec<Complex>>,
    /// Sample count for randomized suites (scalar-product samples, check points).
    pub samples: Option<usize>,
    /// Newton starting sets for `solve`.
    pub seeds: Option<usize>,
}

#[derive(Debug)]
pub enum ConfigError {
    Io(String),
    Parse(String),
    Invalid(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io(m) => write!(f, "cannot read config: {m}"),
            ConfigError::Parse(m) => write!(f, "malformed config: {m}"),
            ConfigError::Invalid(m) => write!(f, "invalid config: {m}"),
        }
    }
}

impl std::error::Error for ConfigError {}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let config: RunConfig =
            serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if let Some(s) = self.schema {
            if s != SCHEMA {
                return Err(ConfigError::Invalid(format!("unsupported schema {s}")));
            }
        }
        if let Some(t) = self.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(ConfigError::Invalid(format!(
                    "tolerance must be positive, got {t}"
                )));
            }
        }
        for (name, v) in [("i", self.i), ("j", self.j)] {
            if let Some(k) = v {
                if !(1..=3).contains(&k) {
                    return Err(ConfigError::Invalid(format!(
                        "{name} = {k} is not in 1..=3"
                    )));
                }
            }
        }
        if let (Some(r), Some(p)) = (self.r, &self.params) {
            if r != p.len() {
                return Err(ConfigError::Invalid(format!(
                    "r = {r} but {} params given",
                    p.len()
                )));
            }
        }
        let finite = |z: &Complex| z[0].is_finite() && z[1].is_finite();
        let all_points = self
            .params
            .iter()
            .flatten()
            .chain(self.points.iter().flatten())
            .chain(self.z.iter());
        if !all_points.clone().all(finite) {
            return Err(ConfigError::Invalid("non-finite evaluation point".into()));
        }
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    /// The chain described by the config, drawing whatever is missing.
    pub fn chain(&self, rng: &mut impl rand::Rng) -> Result<ChainSpec, ConfigError> {
        let cc = &self.chain;
        if let (Some(l), Some(xi)) = (cc.sites, &cc.xi) {
            if l != xi.len() {
                return Err(ConfigError::Invalid(format!(
                    "L = {l} but {} inhomogeneities given",
                    xi.len()
                )));
            }
        }
        match &cc.xi {
            Some(xi) => {
                let c = cc.c.map(to_c64).unwrap_or(cplx(1.0, 0.0));
                ChainSpec::new(c, xi.iter().map(|z| to_c64(*z)).collect())
                    .map_err(|e| ConfigError::Invalid(e.to_string()))
            }
            None => {
                if cc.c.is_some() {
                    return Err(ConfigError::Invalid("c given without xi".into()));
                }
                let l = cc.sites.unwrap_or(2);
                if l == 0 || l > so3bethe::chain::DEFAULT_SITE_CAP {
                    return Err(ConfigError::Invalid(format!(
                        "L = {l} outside 1..={}",
                        so3bethe::chain::DEFAULT_SITE_CAP
                    )));
                }
                Ok(sample::random_chain(rng, l, cc.complex))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_chain() {
        let cfg = RunConfig::parse(
            r#"{"schema":1,"chain":{"L":2,"c":[1,0],"xi":[[-0.4,0],[0.4,0]]},"seed":3}"#,
        )
        .unwrap();
        let spec = cfg.chain(&mut sample::rng(0)).unwrap();
        assert_eq!(spec.sites(), 2);
        assert_eq!(cfg.seed(), 3);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(RunConfig::parse("{"), Err(ConfigError::Parse(_))));
        assert!(matches!(
            RunConfig::parse(r#"{"bogus":1}"#),
            Err(ConfigError::Parse(_))
        ));
        assert!(matches!(
            RunConfig::parse(r#"{"tol":-1}"#),
            Err(ConfigError::Invalid(_))
        ));
        assert!(matches!(
            RunConfig::parse(r#"{"schema":2}"#),
            Err(ConfigError::Invalid(_))
        ));
        assert!(matches!(
            RunConfig::parse(r#"{"i":4}"#),
            Err(ConfigError::Invalid(_))
        ));
        let dup = RunConfig::parse(r#"{"chain":{"xi":[[0.1,0],[0.1,0]]}}"#).unwrap();
        assert!(dup.chain(&mut sample::rng(0)).is_err());
        let mismatch = RunConfig::parse(r#"{"chain":{"L":3,"xi":[[0.1,0]]}}"#).unwrap();
        assert!(mismatch.chain(&mut sample::rng(0)).is_err());
    }

    #[test]
    fn missing_chain_is_seeded() {
        let cfg = RunConfig::default();
        let a = cfg.chain(&mut sample::rng(4)).unwrap();
        let b = cfg.chain(&mut sample::rng(4)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.sites(), 2);
        assert!(a.is_real());
    }
}
