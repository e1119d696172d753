//! Integer scalar abstraction shared by divisors, Laplacians and rationals.
//!
//! Everything in this crate is exact. The scalar only decides the width of the
//! integers: `BigInt` never overflows, `i64` is much faster for bounded search
//! (random sweeps, Weierstrass scans) where coefficients stay tiny.

use std::fmt::{Debug, Display};
use std::hash::Hash;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{FromPrimitive, Signed, ToPrimitive};

pub trait Scalar:
    Clone
    + Ord
    + Hash
    + Debug
    + Display
    + Send
    + Sync
    + Signed
    + Integer
    + FromPrimitive
    + ToPrimitive
    + 'static
{
    /// Lossless conversion from a machine count (edge multiplicities, degrees).
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count fits in scalar")
    }

    fn from_i64_exact(n: i64) -> Self {
        Self::from_i64(n).expect("value fits in scalar")
    }

    /// Parse a base-10 literal, optionally signed.
    fn parse_decimal(s: &str) -> Option<Self> {
        Self::from_str_radix(s.trim(), 10).ok()
    }
}

impl<T> Scalar for T where
    T: Clone
        + Ord
        + Hash
        + Debug
        + Display
        + Send
        + Sync
        + Signed
        + Integer
        + FromPrimitive
        + ToPrimitive
        + 'static
{
}

/// Parse `"p/q"` or `"p"` into an exact rational.
pub fn parse_ratio<T: Scalar>(s: &str) -> Option<Ratio<T>> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n = T::parse_decimal(n)?;
            let d = T::parse_decimal(d)?;
            if d.is_zero() {
                return None;
            }
            Some(Ratio::new(n, d))
        }
        None => Some(Ratio::from_integer(T::parse_decimal(s)?)),
    }
}

pub fn format_ratio<T: Scalar>(r: &Ratio<T>) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}
