//! Exact rational arithmetic on `i128`, always kept in reduced form.
//!
//! Threshold comparisons in this crate must be exact; no operation here ever
//! rounds through floating point. Overflow panics rather than silently
//! wrapping, which is acceptable at the magnitudes the toolkit works with
//! (numerators stay far below 2^96 even after squaring).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// A rational number `num/den` with `den > 0` and `gcd(|num|, den) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rational {
    num: i128,
    den: i128,
}

impl Rational {
    pub const ZERO: Rational = Rational { num: 0, den: 1 };
    pub const ONE: Rational = Rational { num: 1, den: 1 };

    /// Builds `num/den`, reducing and normalizing the sign into the numerator.
    pub fn new(num: i128, den: i128) -> Result<Rational, Error> {
        if den == 0 {
            return Err(Error::invalid("rational with zero denominator"));
        }
        let sign = if den < 0 { -1 } else { 1 };
        let g = gcd_i128(num, den).max(1);
        Ok(Rational {
            num: sign * (num / g),
            den: (den / g).abs(),
        })
    }

    pub fn from_int(v: i128) -> Rational {
        Rational { num: v, den: 1 }
    }

    pub fn num(&self) -> i128 {
        self.num
    }

    pub fn den(&self) -> i128 {
        self.den
    }

    pub fn is_integer(&self) -> bool {
        self.den == 1
    }

    pub fn is_positive(&self) -> bool {
        self.num > 0
    }

    pub fn is_negative(&self) -> bool {
        self.num < 0
    }

    /// Smallest integer `>= self`.
    pub fn ceil(&self) -> i128 {
        self.num.div_euclid(self.den) + i128::from(self.num.rem_euclid(self.den) != 0)
    }

    fn build(num: i128, den: i128) -> Rational {
        debug_assert!(den > 0);
        let g = gcd_i128(num, den).max(1);
        Rational {
            num: num / g,
            den: den / g,
        }
    }

    fn mul_checked(a: i128, b: i128) -> i128 {
        a.checked_mul(b).expect("rational overflow")
    }
}

impl Add for Rational {
    type Output = Rational;
    fn add(self, rhs: Rational) -> Rational {
        let num = Rational::mul_checked(self.num, rhs.den)
            .checked_add(Rational::mul_checked(rhs.num, self.den))
            .expect("rational overflow");
        Rational::build(num, Rational::mul_checked(self.den, rhs.den))
    }
}

impl Sub for Rational {
    type Output = Rational;
    fn sub(self, rhs: Rational) -> Rational {
        self + (-rhs)
    }
}

impl Mul for Rational {
    type Output = Rational;
    fn mul(self, rhs: Rational) -> Rational {
        // Cross-reduce first so intermediate products stay small.
        let g1 = gcd_i128(self.num, rhs.den).max(1);
        let g2 = gcd_i128(rhs.num, self.den).max(1);
        Rational::build(
            Rational::mul_checked(self.num / g1, rhs.num / g2),
            Rational::mul_checked(self.den / g2, rhs.den / g1),
        )
    }
}

impl Div for Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        assert!(rhs.num != 0, "division by zero rational");
        let sign = if rhs.num < 0 { -1 } else { 1 };
        self * Rational {
            num: sign * rhs.den,
            den: rhs.num.abs(),
        }
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational {
            num: -self.num,
            den: self.den,
        }
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        Rational::mul_checked(self.num, other.den).cmp(&Rational::mul_checked(other.num, self.den))
    }
}

impl PartialEq<i128> for Rational {
    fn eq(&self, other: &i128) -> bool {
        self.den == 1 && self.num == *other
    }
}

impl PartialOrd<i128> for Rational {
    fn partial_cmp(&self, other: &i128) -> Option<Ordering> {
        Some(self.num.cmp(&Rational::mul_checked(*other, self.den)))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Rational, Error> {
        let s = s.trim();
        match s.split_once('/') {
            Some((n, d)) => {
                let num: i128 = n
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(0, format!("bad numerator {n:?}")))?;
                let den: i128 = d
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(n.len() + 1, format!("bad denominator {d:?}")))?;
                Rational::new(num, den)
            }
            None => {
                let v: i128 = s
                    .parse()
                    .map_err(|_| Error::parse(0, format!("bad rational {s:?}")))?;
                Ok(Rational::from_int(v))
            }
        }
    }
}
