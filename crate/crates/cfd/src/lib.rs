#![allow(clippy::needless_range_loop)]

//! Exact arithmetic of split cyclotomic function fields over F_q(T).
//!
//! The library constructs the Carlitz-module torsion tower for a split
//! modulus M = prod (T - a_i)^{n_i}, builds the canonical basis of
//! holomorphic differentials anchored at a chosen ramified prime, computes
//! the matrix representation of the automorphism group (F_q[T]/(M))^* on
//! that basis, and derives order/gap sequences at totally ramified primes.
//! Every symbolic computation can be cross-checked against a brute-force
//! model of the function field (see [`oracle`]).
//!
//! Modules:
//! - [`field`]: arithmetic in F_q, q = p^r
//! - [`poly`]: F_q[T], split factorization, unit groups, P-adic digits
//! - [`carlitz`]: twisted operators, Carlitz polynomials, cyclotomic polynomials
//! - [`lambda`]: symbolic algebra of torsion-generator monomials
//! - [`differentials`]: valuations, holomorphy, basis/generator enumeration
//! - [`galois`]: the induced representation of (F_q[T]/(M))^*
//! - [`gaps`]: order and gap sequences at ramified primes
//! - [`oracle`]: independent brute-force verification ring

pub mod carlitz;
pub mod differentials;
pub mod field;
pub mod galois;
pub mod gaps;
pub mod lambda;
mod linalg;
pub mod oracle;
pub mod poly;

pub use differentials::{ExponentTuple, ValuationReport};
pub use field::{FieldCtx, FqElement};
pub use galois::{RepMatrix, RepresentationTable};
pub use lambda::{LambdaMonomial, LambdaSum, WindowPolicy};
pub use poly::{ModulusSpec, Poly};

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("polynomial {0} is not irreducible")]
    NotIrreducible(String),
    #[error("modulus does not split over F_q: factor {factor} has no root")]
    NonSplitModulus { factor: String },
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),
    #[error("internal invariant violated: {0}")]
    InternalInvariant(String),
    #[error("{0} is not a unit modulo M")]
    NotAUnit(String),
    #[error("product would carry dT twice")]
    DTSquared,
    #[error("exponent {exponent} at prime {prime}, level {level} is below q; nothing to rewrite")]
    NotReducible {
        prime: usize,
        level: usize,
        exponent: i64,
    },
    #[error("prime power would go negative during window normalization")]
    NegativePower,
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Size bounds for enumeration-heavy operations.
///
/// `CFD_MAX_GENUS` in the environment overrides `max_genus` for the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_genus: u64,
    pub max_units: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_genus: 512,
            max_units: 4096,
        }
    }
}
