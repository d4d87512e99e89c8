//! Exact field arithmetic, the two-point extension by `±∞`, and unary affine
//! contractions with their fixed points.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub fn rat_add<S: Scalar>(a: &S, b: &S) -> S {
    a.clone() + b.clone()
}

pub fn rat_sub<S: Scalar>(a: &S, b: &S) -> S {
    a.clone() - b.clone()
}

pub fn rat_mul<S: Scalar>(a: &S, b: &S) -> S {
    a.clone() * b.clone()
}

pub fn rat_div<S: Scalar>(a: &S, b: &S) -> Result<S> {
    if b.is_zero() {
        return Err(Error::DivisionByZero);
    }
    Ok(a.clone() / b.clone())
}

/// A rational or one of the two infinities.
///
/// Arithmetic is partial: only the combinations the successor procedures
/// need are defined, everything else (`∞ − ∞`, scaling by a non-positive
/// factor, ...) is an [`Error::UndefinedInfinity`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Extended<S> {
    NegInfinity,
    Finite(S),
    PosInfinity,
}

impl<S: Scalar> Extended<S> {
    pub fn finite(&self) -> Option<&S> {
        match self {
            Extended::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        use Extended::*;
        match (self, other) {
            (Finite(a), Finite(b)) => Ok(Finite(a.clone() + b.clone())),
            (PosInfinity, NegInfinity) | (NegInfinity, PosInfinity) => {
                Err(Error::UndefinedInfinity("∞ − ∞".into()))
            }
            (PosInfinity, _) | (_, PosInfinity) => Ok(PosInfinity),
            (NegInfinity, _) | (_, NegInfinity) => Ok(NegInfinity),
        }
    }

    pub fn neg(&self) -> Self {
        match self {
            Extended::NegInfinity => Extended::PosInfinity,
            Extended::Finite(v) => Extended::Finite(-v.clone()),
            Extended::PosInfinity => Extended::NegInfinity,
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    /// Multiplication by a strictly positive finite factor.
    pub fn scale(&self, factor: &S) -> Result<Self> {
        if !factor.is_positive() {
            return match self {
                Extended::Finite(v) => Ok(Extended::Finite(v.clone() * factor.clone())),
                _ => Err(Error::UndefinedInfinity(format!(
                    "infinity scaled by non-positive {}",
                    factor.canonical()
                ))),
            };
        }
        Ok(match self {
            Extended::Finite(v) => Extended::Finite(v.clone() * factor.clone()),
            other => other.clone(),
        })
    }

    /// Division by a strictly positive finite divisor.
    pub fn div(&self, divisor: &S) -> Result<Self> {
        if divisor.is_zero() {
            return Err(Error::DivisionByZero);
        }
        self.scale(&(S::one() / divisor.clone()))
    }

    pub fn canonical(&self) -> String {
        match self {
            Extended::NegInfinity => "-inf".into(),
            Extended::Finite(v) => v.canonical(),
            Extended::PosInfinity => "inf".into(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text.trim() {
            "-inf" | "-∞" => Ok(Extended::NegInfinity),
            "inf" | "+inf" | "∞" => Ok(Extended::PosInfinity),
            other => S::parse_canonical(other).map(Extended::Finite),
        }
    }
}

impl<S: Scalar> From<S> for Extended<S> {
    fn from(v: S) -> Self {
        Extended::Finite(v)
    }
}

impl<S: Scalar> PartialOrd for Extended<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<S: Scalar> Ord for Extended<S> {
    fn cmp(&self, other: &Self) -> Ordering {
        use Extended::*;
        match (self, other) {
            (Finite(a), Finite(b)) => a.cmp(b),
            (NegInfinity, NegInfinity) | (PosInfinity, PosInfinity) => Ordering::Equal,
            (NegInfinity, _) | (_, PosInfinity) => Ordering::Less,
            (PosInfinity, _) | (_, NegInfinity) => Ordering::Greater,
        }
    }
}

impl<S: Scalar> fmt::Display for Extended<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

/// `h(x) = slope·x + offset` with `slope ≥ 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UnaryAffine<S> {
    slope: S,
    offset: S,
}

impl<S: Scalar> UnaryAffine<S> {
    pub fn new(slope: S, offset: S) -> Result<Self> {
        if slope.is_negative() {
            return Err(Error::Precondition(format!(
                "affine slope {} is negative",
                slope.canonical()
            )));
        }
        Ok(UnaryAffine { slope, offset })
    }

    pub fn slope(&self) -> &S {
        &self.slope
    }

    pub fn offset(&self) -> &S {
        &self.offset
    }

    pub fn apply(&self, x: &S) -> S {
        self.slope.clone() * x.clone() + self.offset.clone()
    }

    /// The unique solution of `h(x) = x`, i.e. `offset / (1 − slope)`.
    pub fn fixpoint(&self) -> Result<S> {
        if self.slope >= S::one() {
            return Err(Error::NoContractingFixedPoint {
                slope: self.slope.canonical(),
            });
        }
        Ok(self.offset.clone() / (S::one() - self.slope.clone()))
    }

    /// `[x0, h(x0), …, h^steps(x0)]`, which increases strictly towards the fixed
    /// point when the slope is positive. A constant map reaches it in one step.
    pub fn iterate_to_fix(&self, x0: &S, steps: usize) -> Result<Vec<S>> {
        let fix = self.fixpoint()?;
        if *x0 >= fix {
            return Err(Error::Precondition(format!(
                "start {} is not below the fixed point {}",
                x0.canonical(),
                fix.canonical()
            )));
        }
        let mut out = Vec::with_capacity(steps + 1);
        let mut x = x0.clone();
        out.push(x.clone());
        for _ in 0..steps {
            x = self.apply(&x);
            out.push(x.clone());
        }
        Ok(out)
    }
}
