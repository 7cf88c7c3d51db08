use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Failures raised by the chain algebra.
///
/// Numerical identity checks never fail through this type: they report
/// residuals. Errors are reserved for inputs where a quantity is undefined
/// (poles, singular operators, degenerate parameter sets).
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A rational function or Lax operator was evaluated at (or too close to) a pole.
    Pole { what: String, distance: f64 },
    /// A site, matrix or monodromy index outside its range.
    Index { index: usize, bound: usize },
    /// An operator that had to be inverted is numerically singular.
    Singular { which: String, condition: f64 },
    /// `T^t(u - c/2) T(u)` was not proportional to the identity.
    NotScalar { residual: f64 },
    /// Two Bethe parameters coincide.
    Degenerate { first: usize, second: usize },
    /// Partition cardinalities cannot be met by the available set.
    Cardinality { needed: usize, available: usize },
    /// A recursion denominator vanished.
    ZeroDenominator { what: String },
    /// A dual vector was requested on a chain with non-real data.
    Reality,
    /// Chain description violates its invariants.
    InvalidChain(String),
    /// Newton iteration did not reach the residual target.
    NoConvergence {
        iterations: usize,
        residual: f64,
        trace: Vec<f64>,
    },
    /// A scalar-product sample where the reference value vanishes.
    DegenerateSample { index: usize, magnitude: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Pole { what, distance } => {
                write!(f, "pole: {what} (distance {distance:e})")
            }
            Error::Index { index, bound } => write!(f, "index {index} out of range 1..={bound}"),
            Error::Singular { which, condition } => {
                write!(
                    f,
                    "singular operator {which} (condition estimate {condition:e})"
                )
            }
            Error::NotScalar { residual } => {
                write!(
                    f,
                    "crossing product is not scalar (off-scalar residual {residual:e})"
                )
            }
            Error::Degenerate { first, second } => {
                write!(f, "Bethe parameters {first} and {second} coincide")
            }
            Error::Cardinality { needed, available } => {
                write!(
                    f,
                    "partition needs {needed} elements, only {available} available"
                )
            }
            Error::ZeroDenominator { what } => write!(f, "vanishing denominator: {what}"),
            Error::Reality => f.write_str("dual vectors require real coupling and inhomogeneities"),
            Error::InvalidChain(msg) => write!(f, "invalid chain: {msg}"),
            Error::NoConvergence {
                iterations,
                residual,
                ..
            } => {
                write!(
                    f,
                    "no convergence after {iterations} iterations (residual {residual:e})"
                )
            }
            Error::DegenerateSample { index, magnitude } => {
                write!(
                    f,
                    "sample {index} has vanishing reference scalar product ({magnitude:e})"
                )
            }
        }
    }
}

impl core::error::Error for Error {}
