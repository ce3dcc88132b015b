use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{ExactError, GenId, GeneratorTable, Interval, Rational, MAX_REFINEMENT};

/// `q₀ + Σ qᵢ·θᵢ` with rational `qᵢ` and declared generators `θᵢ`.
///
/// Equality is structural: under the independence declaration two values
/// are equal exactly when their coefficient vectors agree.
#[derive(Clone)]
pub struct SymbolicReal {
    rational: Rational,
    terms: BTreeMap<GenId, Rational>,
    table: Option<Arc<GeneratorTable>>,
}

impl PartialEq for SymbolicReal {
    fn eq(&self, other: &Self) -> bool {
        if self.rational != other.rational || self.terms != other.terms {
            return false;
        }
        match (&self.table, &other.table) {
            (Some(a), Some(b)) => Arc::ptr_eq(a, b),
            _ => self.terms.is_empty(),
        }
    }
}

impl Eq for SymbolicReal {}

impl Hash for SymbolicReal {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.rational.hash(state);
        self.terms.hash(state);
    }
}

impl fmt::Debug for SymbolicReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymbolicReal({self})")
    }
}

impl Default for SymbolicReal {
    fn default() -> Self {
        SymbolicReal::zero()
    }
}

fn merge_tables(
    a: &Option<Arc<GeneratorTable>>,
    b: &Option<Arc<GeneratorTable>>,
) -> Result<Option<Arc<GeneratorTable>>, ExactError> {
    match (a, b) {
        (Some(x), Some(y)) if !Arc::ptr_eq(x, y) => Err(ExactError::MismatchedTables),
        (Some(x), _) => Ok(Some(x.clone())),
        (None, y) => Ok(y.clone()),
    }
}

impl SymbolicReal {
    pub fn zero() -> Self {
        Self::from_rational(Rational::zero())
    }

    pub fn one() -> Self {
        Self::from_rational(Rational::one())
    }

    pub fn from_rational(q: Rational) -> Self {
        SymbolicReal {
            rational: q,
            terms: BTreeMap::new(),
            table: None,
        }
    }

    pub fn from_integer(n: i64) -> Self {
        Self::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub(crate) fn generator(table: Arc<GeneratorTable>, id: GenId) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(id, Rational::one());
        SymbolicReal {
            rational: Rational::zero(),
            terms,
            table: Some(table),
        }
    }

    /// Builds a value from raw coefficients. Zero coefficients are dropped.
    pub fn from_parts(
        rational: Rational,
        terms: impl IntoIterator<Item = (GenId, Rational)>,
        table: &Arc<GeneratorTable>,
    ) -> Self {
        let mut map = BTreeMap::new();
        for (id, c) in terms {
            assert!(id.0 < table.len(), "generator id out of range");
            if !c.is_zero() {
                let e: &mut Rational = map.entry(id).or_insert_with(Rational::zero);
                *e += c;
                if e.is_zero() {
                    map.remove(&id);
                }
            }
        }
        Self::normalized(rational, map, Some(table.clone()))
    }

    fn normalized(
        rational: Rational,
        terms: BTreeMap<GenId, Rational>,
        table: Option<Arc<GeneratorTable>>,
    ) -> Self {
        let table = if terms.is_empty() { None } else { table };
        SymbolicReal {
            rational,
            terms,
            table,
        }
    }

    pub fn rational_part(&self) -> &Rational {
        &self.rational
    }

    pub fn coefficient(&self, id: GenId) -> Rational {
        self.terms.get(&id).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (GenId, &Rational)> + '_ {
        self.terms.iter().map(|(k, v)| (*k, v))
    }

    pub fn table(&self) -> Option<&Arc<GeneratorTable>> {
        self.table.as_ref()
    }

    pub fn is_rational(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        self.is_rational().then_some(&self.rational)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.rational.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.terms.is_empty() && self.rational.is_integer()
    }

    /// Irrational part only (rational coordinate set to zero).
    pub fn irrational_part(&self) -> SymbolicReal {
        Self::normalized(Rational::zero(), self.terms.clone(), self.table.clone())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, ExactError> {
        let table = merge_tables(&self.table, &other.table)?;
        let mut terms = self.terms.clone();
        for (id, c) in &other.terms {
            let e = terms.entry(*id).or_insert_with(Rational::zero);
            *e += c;
            if e.is_zero() {
                terms.remove(id);
            }
        }
        Ok(Self::normalized(&self.rational + &other.rational, terms, table))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, ExactError> {
        self.try_add(&other.neg_ref())
    }

    fn neg_ref(&self) -> Self {
        SymbolicReal {
            rational: -&self.rational,
            terms: self.terms.iter().map(|(k, v)| (*k, -v)).collect(),
            table: self.table.clone(),
        }
    }

    pub fn scale(&self, q: &Rational) -> Self {
        if q.is_zero() {
            return Self::zero();
        }
        SymbolicReal {
            rational: &self.rational * q,
            terms: self.terms.iter().map(|(k, v)| (*k, v * q)).collect(),
            table: self.table.clone(),
        }
    }

    pub fn scale_int(&self, n: i64) -> Self {
        self.scale(&BigRational::from_integer(BigInt::from(n)))
    }

    pub fn add_rational(&self, q: &Rational) -> Self {
        let mut out = self.clone();
        out.rational += q;
        out
    }

    /// Interval containing the value, built from generator enclosures at
    /// refinement `level`.
    pub fn enclosure(&self, level: usize) -> Interval {
        let mut lo = self.rational.clone();
        let mut hi = self.rational.clone();
        if let Some(table) = &self.table {
            for (id, c) in &self.terms {
                let iv = table.enclosure(*id, level);
                if c.is_positive() {
                    lo += c * &iv.lo;
                    hi += c * &iv.hi;
                } else {
                    lo += c * &iv.hi;
                    hi += c * &iv.lo;
                }
            }
        }
        Interval { lo, hi }
    }

    /// Sign of the value, refining generator enclosures at most `budget`
    /// times.
    pub fn sign(&self, budget: u32) -> Result<Ordering, ExactError> {
        if budget == 0 {
            return Err(ExactError::ZeroBudget);
        }
        if self.is_rational() {
            return Ok(self.rational.cmp(&Rational::zero()));
        }
        let zero = Rational::zero();
        let mut last = self.enclosure(0);
        for level in 0..=budget as usize {
            last = self.enclosure(level);
            if last.lo > zero {
                return Ok(Ordering::Greater);
            }
            if last.hi < zero {
                return Ok(Ordering::Less);
            }
        }
        Err(ExactError::BudgetExhausted {
            budget,
            lo: last.lo,
            hi: last.hi,
        })
    }

    /// Sign without a caller budget. A non-zero irrational value always
    /// separates from zero, so running out of [`MAX_REFINEMENT`] levels
    /// means the independence declaration is false.
    pub fn signum_exact(&self) -> Ordering {
        match self.sign(MAX_REFINEMENT) {
            Ok(o) => o,
            Err(e) => panic!("{e}: declared generators appear to be rationally dependent"),
        }
    }

    pub fn cmp_exact(&self, other: &Self) -> Ordering {
        self.try_sub(other)
            .expect("comparison across generator tables")
            .signum_exact()
    }

    pub fn floor(&self) -> BigInt {
        if self.is_rational() {
            return self.rational.floor().to_integer();
        }
        for level in 0..=MAX_REFINEMENT as usize {
            let iv = self.enclosure(level);
            let a = iv.lo.floor();
            // an irrational value is never an integer, so the enclosure
            // eventually sits strictly between two integers
            if iv.hi < &a + Rational::one() && iv.lo > a {
                return a.to_integer();
            }
        }
        panic!("floor of {self} undecided: declared generators appear to be rationally dependent");
    }

    /// `⌊a + 1/2⌋`, refusing rational half-integers.
    pub fn nearest_integer(&self) -> Result<BigInt, ExactError> {
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        if self.is_rational() {
            let shifted = &self.rational + &half;
            if shifted.is_integer() {
                return Err(ExactError::TieAtHalf(self.rational.clone()));
            }
        }
        Ok(self.add_rational(&half).floor())
    }

    /// `a − ⌊a⌋ ∈ [0, 1)`.
    pub fn fract(&self) -> SymbolicReal {
        let fl = BigRational::from_integer(self.floor());
        self.add_rational(&-fl)
    }

    pub fn abs(&self) -> SymbolicReal {
        if self.signum_exact() == Ordering::Less {
            -self
        } else {
            self.clone()
        }
    }

    pub fn min(&self, other: &Self) -> SymbolicReal {
        if self.cmp_exact(other) == Ordering::Greater {
            other.clone()
        } else {
            self.clone()
        }
    }

    pub fn max(&self, other: &Self) -> SymbolicReal {
        if self.cmp_exact(other) == Ordering::Less {
            other.clone()
        } else {
            self.clone()
        }
    }

    /// Best `f64` guess; only for diagnostics and simulation.
    pub fn to_f64(&self) -> f64 {
        let iv = self.enclosure(60);
        rat_to_f64(&iv.midpoint())
    }
}

pub(crate) fn rat_to_f64(q: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().unwrap_or(f64::NAN)
}

impl fmt::Display for SymbolicReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        if !self.rational.is_zero() || self.terms.is_empty() {
            write!(f, "{}", self.rational)?;
            first = false;
        }
        let table = self.table.as_ref();
        for (id, c) in &self.terms {
            let name = table.map(|t| t.name(*id)).unwrap_or_else(|| format!("g{}", id.0));
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            first = false;
            if mag.is_one() {
                write!(f, "{name}")?;
            } else {
                write!(f, "{mag}*{name}")?;
            }
        }
        Ok(())
    }
}

impl Neg for SymbolicReal {
    type Output = SymbolicReal;
    fn neg(self) -> SymbolicReal {
        self.neg_ref()
    }
}

impl Neg for &SymbolicReal {
    type Output = SymbolicReal;
    fn neg(self) -> SymbolicReal {
        self.neg_ref()
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl $tr<&SymbolicReal> for &SymbolicReal {
            type Output = SymbolicReal;
            fn $m(self, rhs: &SymbolicReal) -> SymbolicReal {
                self.$f(rhs).expect("operands belong to different generator tables")
            }
        }
        impl $tr<SymbolicReal> for SymbolicReal {
            type Output = SymbolicReal;
            fn $m(self, rhs: SymbolicReal) -> SymbolicReal {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&SymbolicReal> for SymbolicReal {
            type Output = SymbolicReal;
            fn $m(self, rhs: &SymbolicReal) -> SymbolicReal {
                (&self).$m(rhs)
            }
        }
        impl $tr<SymbolicReal> for &SymbolicReal {
            type Output = SymbolicReal;
            fn $m(self, rhs: SymbolicReal) -> SymbolicReal {
                self.$m(&rhs)
            }
        }
    };
}

binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);

impl Mul<&Rational> for &SymbolicReal {
    type Output = SymbolicReal;
    fn mul(self, rhs: &Rational) -> SymbolicReal {
        self.scale(rhs)
    }
}

impl Mul<&Rational> for SymbolicReal {
    type Output = SymbolicReal;
    fn mul(self, rhs: &Rational) -> SymbolicReal {
        self.scale(rhs)
    }
}

impl serde::Serialize for SymbolicReal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl From<Rational> for SymbolicReal {
    fn from(q: Rational) -> Self {
        SymbolicReal::from_rational(q)
    }
}

impl From<i64> for SymbolicReal {
    fn from(n: i64) -> Self {
        SymbolicReal::from_integer(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat, DEFAULT_REFINE_BUDGET};
    use proptest::prelude::*;

    fn setup() -> (Arc<GeneratorTable>, SymbolicReal, SymbolicReal) {
        let t = GeneratorTable::new();
        let a = t.sqrt("s2", int(2)).unwrap();
        let b = t.golden("phi").unwrap();
        (t, a, b)
    }

    #[test]
    fn arithmetic_and_display() {
        let (_t, s2, phi) = setup();
        let x = s2.scale(&rat(1, 2)) + phi.clone() - SymbolicReal::from_rational(rat(3, 4));
        assert_eq!(x.to_string(), "-3/4 + 1/2*s2 + phi");
        let y = &x - &x;
        assert!(y.is_zero());
        assert!(y.table().is_none());
        assert_eq!((-phi).to_string(), "-phi");
    }

    #[test]
    fn sign_and_floor() {
        let (_t, s2, phi) = setup();
        // √2 − 1.4142 > 0, √2 − 1.4143 < 0
        let a = s2.add_rational(&rat(-14142, 10000));
        let b = s2.add_rational(&rat(-14143, 10000));
        assert_eq!(a.sign(DEFAULT_REFINE_BUDGET), Ok(Ordering::Greater));
        assert_eq!(b.sign(DEFAULT_REFINE_BUDGET), Ok(Ordering::Less));
        assert_eq!(s2.scale_int(10).floor(), BigInt::from(14));
        assert_eq!(phi.scale_int(-100).floor(), BigInt::from(-62));
        assert_eq!(SymbolicReal::zero().sign(1), Ok(Ordering::Equal));
        assert_eq!(SymbolicReal::zero().sign(0), Err(ExactError::ZeroBudget));
    }

    #[test]
    fn budget_exhaustion_reports_enclosure() {
        let (_t, s2, _) = setup();
        // √2 − 1.41421356 ≈ 2.4e-9, needs ~30 halvings
        let x = s2.add_rational(&rat(-141421356, 100000000));
        match x.sign(4) {
            Err(ExactError::BudgetExhausted { budget, lo, hi }) => {
                assert_eq!(budget, 4);
                assert!(lo < Rational::zero() && hi > Rational::zero());
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(x.sign(64), Ok(Ordering::Greater));
    }

    #[test]
    fn nearest_integer_tie() {
        assert_eq!(
            SymbolicReal::from_rational(rat(5, 2)).nearest_integer(),
            Err(ExactError::TieAtHalf(rat(5, 2)))
        );
        assert_eq!(
            SymbolicReal::from_rational(rat(-7, 3)).nearest_integer(),
            Ok(BigInt::from(-2))
        );
        let (_t, s2, _) = setup();
        assert_eq!(s2.nearest_integer(), Ok(BigInt::from(1)));
    }

    #[test]
    fn mismatched_tables_error() {
        let (_t, s2, _) = setup();
        let other = GeneratorTable::new();
        let r = other.sqrt("s2", int(2)).unwrap();
        assert_eq!(s2.try_add(&r), Err(ExactError::MismatchedTables));
        assert_ne!(s2, r);
        // rationals combine with anything
        assert!(s2.try_add(&SymbolicReal::one()).is_ok());
    }

    fn small_rat() -> impl Strategy<Value = Rational> {
        (-50i64..50, 1i64..20).prop_map(|(n, d)| rat(n, d))
    }

    proptest! {
        #[test]
        fn sign_matches_float_when_well_separated(q0 in small_rat(), q1 in small_rat(), q2 in small_rat()) {
            let (t, s2, phi) = setup();
            let _ = t;
            let x = SymbolicReal::from_rational(q0) + s2.scale(&q1) + phi.scale(&q2);
            let approx = x.to_f64();
            prop_assume!(approx.abs() > 1e-6 || x.is_zero());
            let s = x.sign(DEFAULT_REFINE_BUDGET).unwrap();
            let expect = if x.is_zero() { Ordering::Equal } else if approx > 0.0 { Ordering::Greater } else { Ordering::Less };
            prop_assert_eq!(s, expect);
        }

        #[test]
        fn fract_lies_in_unit_interval(q0 in small_rat(), q1 in small_rat()) {
            let (_t, s2, _) = setup();
            let x = SymbolicReal::from_rational(q0) + s2.scale(&q1);
            let f = x.fract();
            prop_assert_ne!(f.signum_exact(), Ordering::Less);
            prop_assert_eq!(f.add_rational(&int(-1)).signum_exact(), Ordering::Less);
            prop_assert!((&x - &f).is_integer());
        }

        #[test]
        fn addition_is_commutative_and_invertible(a0 in small_rat(), a1 in small_rat(), b0 in small_rat(), b2 in small_rat()) {
            let (_t, s2, phi) = setup();
            let a = SymbolicReal::from_rational(a0) + s2.scale(&a1);
            let b = SymbolicReal::from_rational(b0) + phi.scale(&b2);
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert_eq!(&(&a + &b) - &b, a);
        }
    }
}
