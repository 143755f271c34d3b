//! Exact rational numbers over `i128` with checked arithmetic.
//!
//! Every operation that could leave the 128-bit range returns
//! [`Error::Overflow`](crate::Error::Overflow) instead of wrapping.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// A normalized fraction: `gcd(num, den) == 1` and `den > 0`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Ratio {
    num: i128,
    den: i128,
}

impl Ratio {
    pub const ZERO: Ratio = Ratio { num: 0, den: 1 };
    pub const ONE: Ratio = Ratio { num: 1, den: 1 };

    pub fn new(num: i128, den: i128) -> Result<Self> {
        if den == 0 {
            return Err(Error::ZeroDenominator);
        }
        let g = num.gcd(&den);
        let (mut num, mut den) = (num / g, den / g);
        if den < 0 {
            num = num.checked_neg().ok_or(Error::Overflow)?;
            den = den.checked_neg().ok_or(Error::Overflow)?;
        }
        Ok(Ratio { num, den })
    }

    pub fn from_integer(n: i128) -> Self {
        Ratio { num: n, den: 1 }
    }

    pub fn numer(&self) -> i128 {
        self.num
    }

    pub fn denom(&self) -> i128 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn is_positive(&self) -> bool {
        self.num > 0
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn checked_add(self, rhs: Ratio) -> Result<Ratio> {
        let g = self.den.gcd(&rhs.den);
        let (ld, rd) = (self.den / g, rhs.den / g);
        let num = self
            .num
            .checked_mul(rd)
            .and_then(|a| rhs.num.checked_mul(ld).and_then(|b| a.checked_add(b)))
            .ok_or(Error::Overflow)?;
        let den = ld.checked_mul(rhs.den).ok_or(Error::Overflow)?;
        Ratio::new(num, den)
    }

    pub fn checked_neg(self) -> Result<Ratio> {
        Ok(Ratio {
            num: self.num.checked_neg().ok_or(Error::Overflow)?,
            den: self.den,
        })
    }

    pub fn checked_sub(self, rhs: Ratio) -> Result<Ratio> {
        self.checked_add(rhs.checked_neg()?)
    }

    pub fn checked_mul(self, rhs: Ratio) -> Result<Ratio> {
        // cross-reduce first so the products stay as small as possible
        let g1 = self.num.gcd(&rhs.den).max(1);
        let g2 = rhs.num.gcd(&self.den).max(1);
        let num = (self.num / g1)
            .checked_mul(rhs.num / g2)
            .ok_or(Error::Overflow)?;
        let den = (self.den / g2)
            .checked_mul(rhs.den / g1)
            .ok_or(Error::Overflow)?;
        Ratio::new(num, den)
    }

    pub fn recip(self) -> Result<Ratio> {
        Ratio::new(self.den, self.num)
    }

    pub fn checked_div(self, rhs: Ratio) -> Result<Ratio> {
        self.checked_mul(rhs.recip()?)
    }

    pub fn checked_pow(self, exp: u32) -> Result<Ratio> {
        let num = self.num.checked_pow(exp).ok_or(Error::Overflow)?;
        let den = self.den.checked_pow(exp).ok_or(Error::Overflow)?;
        Ok(Ratio { num, den })
    }

    /// One minus `self`.
    pub fn complement(self) -> Result<Ratio> {
        Ratio::ONE.checked_sub(self)
    }

    /// Exact sum of an iterator of rationals.
    pub fn sum<I: IntoIterator<Item = Ratio>>(iter: I) -> Result<Ratio> {
        iter.into_iter()
            .try_fold(Ratio::ZERO, |acc, r| acc.checked_add(r))
    }
}

impl Default for Ratio {
    fn default() -> Self {
        Ratio::ZERO
    }
}

impl From<i128> for Ratio {
    fn from(n: i128) -> Self {
        Ratio::from_integer(n)
    }
}

impl PartialOrd for Ratio {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ratio {
    fn cmp(&self, other: &Self) -> Ordering {
        match (
            self.num.checked_mul(other.den),
            other.num.checked_mul(self.den),
        ) {
            (Some(l), Some(r)) => l.cmp(&r),
            // products out of range: difference sign is still exact
            _ => match self.checked_sub(*other) {
                Ok(d) => d.num.cmp(&0),
                Err(_) => self.to_f64().total_cmp(&other.to_f64()),
            },
        }
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl fmt::Debug for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Ratio {
    type Err = Error;

    /// Parses `"n"`, `"n/d"` or a finite decimal such as `"0.5"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidNumber(s.to_string());
        if let Some((n, d)) = s.split_once('/') {
            let n = n.trim().parse::<i128>().map_err(|_| bad())?;
            let d = d.trim().parse::<i128>().map_err(|_| bad())?;
            return Ratio::new(n, d);
        }
        if let Some((int, frac)) = s.split_once('.') {
            if frac.is_empty() || frac.len() > 30 || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let negative = int.starts_with('-');
            let int_part = if int.is_empty() || int == "-" {
                0
            } else {
                int.parse::<i128>().map_err(|_| bad())?.abs()
            };
            let scale = 10i128.checked_pow(frac.len() as u32).ok_or(Error::Overflow)?;
            let frac_part = frac.parse::<i128>().map_err(|_| bad())?;
            let mut num = int_part
                .checked_mul(scale)
                .and_then(|v| v.checked_add(frac_part))
                .ok_or(Error::Overflow)?;
            if negative {
                num = -num;
            }
            return Ratio::new(num, scale);
        }
        s.parse::<i128>().map(Ratio::from_integer).map_err(|_| bad())
    }
}

impl Serialize for Ratio {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("Ratio", 3)?;
        st.serialize_field("numerator", &self.num)?;
        st.serialize_field("denominator", &self.den)?;
        st.serialize_field("decimal", &self.to_f64())?;
        st.end()
    }
}
