//! The exact scalar abstraction every numeric module is generic over.
//!
//! All algorithms in this crate compare values for exact equality, key hash
//! maps by value and rely on a total order, so the scalar must be an exact
//! ordered field element. Binary floating point does not qualify. The
//! provided implementations are the `num-rational` ratio types; the
//! arbitrary-precision [`BigRational`] is the one used throughout the crate
//! root aliases and the command line, the fixed-width ratios are handy for
//! small fragments where overflow cannot happen.

use std::fmt::Debug;
use std::hash::Hash;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub trait Scalar:
    Clone + Ord + Hash + Debug + Send + Sync + 'static + Signed + FromPrimitive
{
    /// Builds the reduced fraction `numer/denom`, or `None` when it does not
    /// fit the representation or `denom` is zero.
    fn from_big_parts(numer: &BigInt, denom: &BigInt) -> Option<Self>;

    fn numer_big(&self) -> BigInt;

    /// Always positive.
    fn denom_big(&self) -> BigInt;

    fn int(v: i64) -> Self {
        Self::from_i64(v).expect("small integer fits every scalar")
    }

    /// `n/d` for small integers; panics on `d == 0`.
    fn ratio(n: i64, d: i64) -> Self {
        assert!(d != 0, "zero denominator");
        Self::int(n) / Self::int(d)
    }

    fn is_integral(&self) -> bool {
        self.denom_big().is_one()
    }

    /// Canonical `p/q` form, with `q > 0` always written.
    fn canonical(&self) -> String {
        format!("{}/{}", self.numer_big(), self.denom_big())
    }

    /// Like [`Scalar::canonical`] but integers are written without `/1`.
    fn short(&self) -> String {
        if self.is_integral() {
            self.numer_big().to_string()
        } else {
            self.canonical()
        }
    }

    /// Parses `p/q` (optional sign on `p`, `q` a positive decimal) or a bare
    /// integer `p`.
    fn parse_canonical(text: &str) -> Result<Self> {
        let text = text.trim();
        let (num_txt, den_txt) = match text.split_once('/') {
            Some((n, d)) => (n, Some(d)),
            None => (text, None),
        };
        let numer = parse_signed(num_txt)
            .ok_or_else(|| Error::Parse(format!("bad numerator in {text:?}")))?;
        let denom = match den_txt {
            None => BigInt::one(),
            Some(d) => {
                if d.is_empty() || !d.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(Error::Parse(format!("bad denominator in {text:?}")));
                }
                let d = BigInt::from_str(d).map_err(|e| Error::Parse(e.to_string()))?;
                if d.is_zero() {
                    return Err(Error::Parse(format!("zero denominator in {text:?}")));
                }
                d
            }
        };
        Self::from_big_parts(&numer, &denom)
            .ok_or_else(|| Error::Parse(format!("{text:?} does not fit the scalar type")))
    }
}

fn parse_signed(text: &str) -> Option<BigInt> {
    let digits = text.strip_prefix(['-', '+']).unwrap_or(text);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    BigInt::from_str(text).ok()
}

impl Scalar for BigRational {
    fn from_big_parts(numer: &BigInt, denom: &BigInt) -> Option<Self> {
        if denom.is_zero() {
            return None;
        }
        Some(Ratio::new(numer.clone(), denom.clone()))
    }

    fn numer_big(&self) -> BigInt {
        self.numer().clone()
    }

    fn denom_big(&self) -> BigInt {
        self.denom().clone()
    }
}

macro_rules! fixed_ratio_scalar {
    ($int:ty) => {
        impl Scalar for Ratio<$int> {
            fn from_big_parts(numer: &BigInt, denom: &BigInt) -> Option<Self> {
                if denom.is_zero() {
                    return None;
                }
                let g = numer.gcd(denom);
                let (mut n, mut d) = (numer / &g, denom / &g);
                if d.is_negative() {
                    n = -n;
                    d = -d;
                }
                Some(Ratio::new_raw(n.to_i128()?.try_into().ok()?, d.to_i128()?.try_into().ok()?))
            }

            fn numer_big(&self) -> BigInt {
                BigInt::from(*self.numer())
            }

            fn denom_big(&self) -> BigInt {
                BigInt::from(*self.denom())
            }
        }
    };
}

fixed_ratio_scalar!(i64);
fixed_ratio_scalar!(i128);
