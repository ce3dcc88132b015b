use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use super::{Rational, SymbolicReal};

/// Element of ℝ/ℤ, stored as its representative in `[0, 1)`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct CircleValue(SymbolicReal);

impl fmt::Debug for CircleValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CircleValue({})", self.0)
    }
}

impl fmt::Display for CircleValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl CircleValue {
    pub fn new(x: SymbolicReal) -> Self {
        CircleValue(x.fract())
    }

    pub fn zero() -> Self {
        CircleValue(SymbolicReal::zero())
    }

    pub fn from_rational(q: Rational) -> Self {
        Self::new(SymbolicReal::from_rational(q))
    }

    /// The representative in `[0, 1)`.
    pub fn value(&self) -> &SymbolicReal {
        &self.0
    }

    pub fn into_value(self) -> SymbolicReal {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn scale_int(&self, n: i64) -> Self {
        Self::new(self.0.scale_int(n))
    }

    /// Distance to the nearest integer, in `[0, 1/2]`.
    pub fn norm(&self) -> SymbolicReal {
        let other = SymbolicReal::one() - &self.0;
        self.0.min(&other)
    }

    /// The lift lying in the open interval `(a, b)`, if any. Requires
    /// `b − a ≤ 1` so the lift is unique.
    pub fn lift_in(&self, a: &Rational, b: &Rational) -> Option<SymbolicReal> {
        debug_assert!(b - a <= Rational::one());
        let lo = SymbolicReal::from_rational(a.clone());
        let hi = SymbolicReal::from_rational(b.clone());
        // shift the representative so it lands in [a, a + 1)
        let shift = (&self.0 - &lo).floor();
        let x = self.0.add_rational(&-BigRational::from_integer(shift));
        (x.cmp_exact(&lo) == Ordering::Greater && x.cmp_exact(&hi) == Ordering::Less).then_some(x)
    }

    /// The lift in `[c − 1/2, c + 1/2)`.
    pub fn lift_near(&self, c: &SymbolicReal) -> SymbolicReal {
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let shift = (&self.0 - c).add_rational(&half).floor();
        self.0.add_rational(&-BigRational::from_integer(shift))
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }
}

impl serde::Serialize for CircleValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        serde::Serialize::serialize(&self.0, s)
    }
}

impl From<SymbolicReal> for CircleValue {
    fn from(x: SymbolicReal) -> Self {
        CircleValue::new(x)
    }
}

impl Add<&CircleValue> for &CircleValue {
    type Output = CircleValue;
    fn add(self, rhs: &CircleValue) -> CircleValue {
        CircleValue::new(&self.0 + &rhs.0)
    }
}

impl Sub<&CircleValue> for &CircleValue {
    type Output = CircleValue;
    fn sub(self, rhs: &CircleValue) -> CircleValue {
        CircleValue::new(&self.0 - &rhs.0)
    }
}

impl Add for CircleValue {
    type Output = CircleValue;
    fn add(self, rhs: CircleValue) -> CircleValue {
        &self + &rhs
    }
}

impl Sub for CircleValue {
    type Output = CircleValue;
    fn sub(self, rhs: CircleValue) -> CircleValue {
        &self - &rhs
    }
}

impl Neg for &CircleValue {
    type Output = CircleValue;
    fn neg(self) -> CircleValue {
        CircleValue::new(-&self.0)
    }
}

impl Neg for CircleValue {
    type Output = CircleValue;
    fn neg(self) -> CircleValue {
        -&self
    }
}
