//! Exact rational values.
//!
//! Densities are probabilities and live in `[0, 1]`; other exact quantities
//! (the edit distance, equitability gaps) use the bare [`Rational`] type.

use std::fmt;
use std::ops::Mul;

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = Ratio<u128>;

/// An exact probability in `[0, 1]`, always stored in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Density(Rational);

impl Density {
    pub const ZERO: Density = Density(Ratio::new_raw(0, 1));
    pub const ONE: Density = Density(Ratio::new_raw(1, 1));

    pub fn new(numer: u128, denom: u128) -> Result<Self> {
        if denom == 0 {
            return Err(Error::domain("density with zero denominator"));
        }
        Self::from_ratio(Ratio::new(numer, denom))
    }

    pub fn from_ratio(value: Rational) -> Result<Self> {
        if value > Ratio::from_integer(1) {
            return Err(Error::domain(format!("density {value} exceeds 1")));
        }
        Ok(Density(value))
    }

    /// `count / total`, or zero when `total` is zero.
    pub(crate) fn fraction(count: u128, total: u128) -> Self {
        if total == 0 {
            Density::ZERO
        } else {
            Density(Ratio::new(count, total))
        }
    }

    pub fn ratio(self) -> Rational {
        self.0
    }

    pub fn numer(self) -> u128 {
        *self.0.numer()
    }

    pub fn denom(self) -> u128 {
        *self.0.denom()
    }

    pub fn is_zero(self) -> bool {
        self.0.is_zero()
    }

    pub fn to_f64(self) -> f64 {
        to_f64(self.0)
    }
}

impl Mul for Density {
    type Output = Density;

    fn mul(self, rhs: Density) -> Density {
        Density(self.0 * rhs.0)
    }
}

impl From<Density> for Rational {
    fn from(d: Density) -> Rational {
        d.0
    }
}

/// Always `num/den`, including `0/1` and `1/1`.
impl fmt::Display for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

pub fn to_f64(r: Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Formats a rational as `num/den` in lowest terms.
pub fn format_rational(r: Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}
