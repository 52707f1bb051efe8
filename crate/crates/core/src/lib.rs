//! Canonical equation systems `x_i = 1`, `x_i + x_j = x_k`, `x_i * x_j = x_k`:
//! construction, compilation from polynomial systems, exact solving, bound
//! checks, exhaustive scans and randomized probes.

pub mod acceptance;
pub mod algebra;
pub mod bounds;
pub mod compiler;
pub mod config;
pub mod error;
pub mod gallery;
pub mod linear;
pub mod neighbourhoods;
pub mod nonlinear;
pub mod scalar;
pub mod system;
pub mod report;
pub mod retraction;
pub mod value;

pub use algebra::groebner::{buchberger, DimensionClass, GroebnerBasis};
pub use algebra::matrix::Matrix;
pub use algebra::poly::{MonomialOrder, MultiPoly};
pub use algebra::solve::{SolutionKind, SolutionPoint, SolutionSet};
pub use config::Config;
pub use error::{CanonError, Result};
pub use system::{CanonicalEquation, CanonicalSystem, Universe, VarIndex};
pub use value::QuadExt;

/// Exact rational scalar used throughout.
pub type Rational = num_rational::BigRational;
/// Arbitrary-precision integer.
pub type Integer = num_bigint::BigInt;
/// Matrix over the rationals.
pub type RatMatrix = Matrix<Rational>;
/// Matrix over machine integers, for fraction-free hot loops.
pub type IntMatrix = Matrix<i64>;
/// Polynomial over the rationals.
pub type QPoly = MultiPoly<Rational>;
