//! Exact computations around generalized fusible numbers: generation of
//! values of monotone terms over linear maps, the recursive functions `M_n`,
//! closure membership through successor and predecessor procedures, and an
//! ordinal notation system up to the small Veblen ordinal together with an
//! embedding of its fixed-point-free term order into the rationals.

pub mod closure;
pub mod embedding;
pub mod error;
pub mod generator;
pub mod mrec;
pub mod numbers;
pub mod ordinal;
pub mod scalar;
pub mod sexpr;
pub mod star;

#[doc(hidden)]
pub mod cli;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Arbitrary-precision reduced fraction.
pub type ExactRational = num_rational::BigRational;
pub type ExtendedRational = numbers::Extended<ExactRational>;
pub type UnaryAffine = numbers::UnaryAffine<ExactRational>;
pub type LinearFunction = generator::LinearFunction<ExactRational>;
pub type GeneratorSystem = generator::GeneratorSystem<ExactRational>;
pub type MonotoneTerm = generator::MonotoneTerm<ExactRational>;
pub type MRecursion = mrec::MRecursion<ExactRational>;
pub type ClosureSystem = closure::ClosureSystem<ExactRational>;
pub type SuccessorEngine = closure::SuccessorEngine<ExactRational>;
