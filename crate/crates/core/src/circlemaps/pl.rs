//! Piecewise-linear circle homeomorphisms with rational slopes.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, ToPrimitive};
use serde::ser::SerializeStruct;
use serde::Serialize;

use crate::cantor::{OdometerSystem, SignCocycle};
use crate::exact::{CircleValue, Rational, SymbolicReal};
use crate::{Error, Result};

fn sym(q: Rational) -> SymbolicReal {
    SymbolicReal::from_rational(q)
}

fn floor_sym(x: &SymbolicReal) -> SymbolicReal {
    SymbolicReal::from_rational(Rational::from_integer(x.floor()))
}

/// Lift `F: ℝ → ℝ` of an orientation-preserving circle homeomorphism with
/// `F(t + 1) = F(t) + 1`, linear between consecutive knots. The knots lie
/// in `[k₀, k₀ + 1)` with `k₀ ∈ [0, 1)`.
#[derive(Clone, PartialEq, Eq)]
pub struct PlLift {
    knots: Vec<SymbolicReal>,
    values: Vec<SymbolicReal>,
    slopes: Vec<Rational>,
}

impl fmt::Debug for PlLift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = (0..self.knots.len())
            .map(|i| format!("{} -> {} (slope {})", self.knots[i], self.values[i], self.slopes[i]))
            .collect();
        write!(f, "PlLift[{}]", parts.join("; "))
    }
}

impl Serialize for PlLift {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("PlLift", 3)?;
        st.serialize_field("knots", &self.knots)?;
        st.serialize_field("values", &self.values)?;
        let slopes: Vec<String> = self.slopes.iter().map(|q| q.to_string()).collect();
        st.serialize_field("slopes", &slopes)?;
        st.end()
    }
}

impl PlLift {
    /// Lift with the given knots in `[k₀, k₀ + 1)`, value at the first
    /// knot and one slope per piece; the slopes must close up to degree 1.
    pub fn new(knots: Vec<SymbolicReal>, value0: SymbolicReal, slopes: Vec<Rational>) -> Result<Self> {
        if knots.is_empty() || knots.len() != slopes.len() {
            return Err(Error::Invalid("need one slope per knot and at least one knot".into()));
        }
        if slopes.iter().any(|s| !s.is_positive()) {
            return Err(Error::Invalid("slopes must be positive".into()));
        }
        let end = knots[0].add_rational(&Rational::one());
        for w in knots.windows(2) {
            if w[0].cmp_exact(&w[1]) != Ordering::Less {
                return Err(Error::Invalid("knots must be strictly increasing".into()));
            }
        }
        if knots[knots.len() - 1].cmp_exact(&end) != Ordering::Less {
            return Err(Error::Invalid("knots must span less than one period".into()));
        }
        let mut values = Vec::with_capacity(knots.len());
        let mut v = value0;
        for i in 0..knots.len() {
            values.push(v.clone());
            let next = if i + 1 < knots.len() { &knots[i + 1] } else { &end };
            v = &v + &(next - &knots[i]).scale(&slopes[i]);
        }
        if v != values[0].add_rational(&Rational::one()) {
            return Err(Error::Invalid(format!(
                "slopes do not close up: lift gains {} over a period",
                &v - &values[0]
            )));
        }
        let shift = floor_sym(&knots[0]);
        Ok(PlLift {
            knots: knots.iter().map(|k| k - &shift).collect(),
            values: values.iter().map(|k| k - &shift).collect(),
            slopes,
        })
    }

    pub fn from_rationals(knots: &[Rational], value0: Rational, slopes: &[Rational]) -> Result<Self> {
        Self::new(knots.iter().cloned().map(sym).collect(), sym(value0), slopes.to_vec())
    }

    /// `t ↦ t + v`.
    pub fn rotation(v: SymbolicReal) -> Self {
        PlLift {
            knots: vec![SymbolicReal::zero()],
            values: vec![v],
            slopes: vec![Rational::one()],
        }
    }

    pub fn identity() -> Self {
        Self::rotation(SymbolicReal::zero())
    }

    /// Builds from `(knot, value, slope to the right)` triples anywhere on
    /// the line, one per piece of a period.
    fn from_triples(mut triples: Vec<(SymbolicReal, SymbolicReal, Rational)>) -> Self {
        for tr in &mut triples {
            let n = floor_sym(&tr.0);
            tr.0 = &tr.0 - &n;
            tr.1 = &tr.1 - &n;
        }
        triples.sort_by(|a, b| a.0.cmp_exact(&b.0));
        triples.dedup_by(|b, a| a.0 == b.0);
        let mut merged: Vec<(SymbolicReal, SymbolicReal, Rational)> = Vec::with_capacity(triples.len());
        for tr in triples {
            match merged.last() {
                Some(last) if last.2 == tr.2 => {}
                _ => merged.push(tr),
            }
        }
        if merged.len() > 1 && merged[0].2 == merged[merged.len() - 1].2 {
            merged.remove(0);
        }
        PlLift {
            knots: merged.iter().map(|t| t.0.clone()).collect(),
            values: merged.iter().map(|t| t.1.clone()).collect(),
            slopes: merged.into_iter().map(|t| t.2).collect(),
        }
    }

    pub fn knots(&self) -> &[SymbolicReal] {
        &self.knots
    }

    pub fn values(&self) -> &[SymbolicReal] {
        &self.values
    }

    pub fn slopes(&self) -> &[Rational] {
        &self.slopes
    }

    /// `(n, i)` with `t − n` on piece `i` of the fundamental window.
    fn locate(&self, t: &SymbolicReal) -> (SymbolicReal, usize) {
        let n = floor_sym(&(t - &self.knots[0]));
        let tt = t - &n;
        let i = self.knots.partition_point(|k| k.cmp_exact(&tt) != Ordering::Greater);
        (n, i.max(1) - 1)
    }

    pub fn eval(&self, t: &SymbolicReal) -> SymbolicReal {
        let (n, i) = self.locate(t);
        let tt = t - &n;
        &(&self.values[i] + &(&tt - &self.knots[i]).scale(&self.slopes[i])) + &n
    }

    /// Slope of the piece to the right of `t`.
    pub fn slope_right(&self, t: &SymbolicReal) -> &Rational {
        &self.slopes[self.locate(t).1]
    }

    pub fn inverse(&self) -> PlLift {
        Self::from_triples(
            (0..self.knots.len())
                .map(|i| (self.values[i].clone(), self.knots[i].clone(), Rational::one() / &self.slopes[i]))
                .collect(),
        )
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &PlLift) -> PlLift {
        let inv = other.inverse();
        let mut points: Vec<SymbolicReal> = other.knots.clone();
        points.extend(self.knots.iter().map(|k| inv.eval(k)));
        let triples = points
            .into_iter()
            .map(|t| {
                let g = other.eval(&t);
                let slope = other.slope_right(&t) * self.slope_right(&g);
                (t, self.eval(&g), slope)
            })
            .collect();
        Self::from_triples(triples)
    }

    /// `t ↦ F(t) + v`.
    pub fn then_rotate(&self, v: &SymbolicReal) -> PlLift {
        PlLift {
            knots: self.knots.clone(),
            values: self.values.iter().map(|x| x + v).collect(),
            slopes: self.slopes.clone(),
        }
    }

    /// `t ↦ −F(−t)`.
    pub fn reflect(&self) -> PlLift {
        let k = self.knots.len();
        let triples = (0..k)
            .map(|i| {
                let (knot, value) = if i + 1 < k {
                    (self.knots[i + 1].clone(), self.values[i + 1].clone())
                } else {
                    (self.knots[0].add_rational(&Rational::one()), self.values[0].add_rational(&Rational::one()))
                };
                (-knot, -value, self.slopes[i].clone())
            })
            .collect();
        Self::from_triples(triples)
    }

    /// Minimum and maximum of `F(t) − t`, attained at knots.
    pub fn displacement_range(&self) -> (SymbolicReal, SymbolicReal) {
        let d: Vec<SymbolicReal> = self.values.iter().zip(&self.knots).map(|(v, k)| v - k).collect();
        let min = d.iter().skip(1).fold(d[0].clone(), |a, b| a.min(b));
        let max = d.iter().skip(1).fold(d[0].clone(), |a, b| a.max(b));
        (min, max)
    }

    /// `Some(v)` when `F(t) = t + v`.
    pub fn as_rotation(&self) -> Option<SymbolicReal> {
        if self.slopes.iter().all(|s| s.is_one()) {
            Some(&self.values[0] - &self.knots[0])
        } else {
            None
        }
    }

    /// Pieces `(u, v, F(u), slope)` covering one period from `k₀`.
    pub fn pieces(&self) -> Vec<(SymbolicReal, SymbolicReal, SymbolicReal, Rational)> {
        let k = self.knots.len();
        (0..k)
            .map(|i| {
                let v = if i + 1 < k {
                    self.knots[i + 1].clone()
                } else {
                    self.knots[0].add_rational(&Rational::one())
                };
                (self.knots[i].clone(), v, self.values[i].clone(), self.slopes[i].clone())
            })
            .collect()
    }

    pub fn to_f64(&self) -> PlLiftF64 {
        PlLiftF64 {
            knots: self.knots.iter().map(SymbolicReal::to_f64).collect(),
            values: self.values.iter().map(SymbolicReal::to_f64).collect(),
            slopes: self.slopes.iter().map(|s| s.to_f64().unwrap_or(f64::NAN)).collect(),
        }
    }
}

/// Floating-point copy of a [`PlLift`] for long dyadic orbits.
#[derive(Debug, Clone)]
pub struct PlLiftF64 {
    knots: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl PlLiftF64 {
    pub fn eval(&self, t: f64) -> f64 {
        let n = (t - self.knots[0]).floor();
        let tt = t - n;
        let i = self.knots.partition_point(|&k| k <= tt).max(1) - 1;
        self.values[i] + self.slopes[i] * (tt - self.knots[i]) + n
    }
}

/// Circle homeomorphism `λ^r ∘ F` with `λ(t) = −t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlHomeo {
    pub reversing: bool,
    pub lift: PlLift,
}

impl PlHomeo {
    pub fn new(reversing: bool, lift: PlLift) -> Self {
        PlHomeo { reversing, lift }
    }

    pub fn rotation(v: SymbolicReal) -> Self {
        Self::new(false, PlLift::rotation(v))
    }

    pub fn identity() -> Self {
        Self::rotation(SymbolicReal::zero())
    }

    /// `λ ∘ R_v`, `t ↦ −(t + v)`.
    pub fn reflected_rotation(v: SymbolicReal) -> Self {
        Self::new(true, PlLift::rotation(v))
    }

    pub fn degree(&self) -> i8 {
        if self.reversing {
            -1
        } else {
            1
        }
    }

    /// Value of the lift at `t`.
    pub fn eval(&self, t: &SymbolicReal) -> SymbolicReal {
        let v = self.lift.eval(t);
        if self.reversing {
            -v
        } else {
            v
        }
    }

    pub fn apply(&self, t: &CircleValue) -> CircleValue {
        CircleValue::new(self.eval(t.value()))
    }

    /// `self ∘ other`, using `F ∘ λ = λ ∘ F̂` with `F̂(t) = −F(−t)`.
    pub fn compose(&self, other: &PlHomeo) -> PlHomeo {
        let outer = if other.reversing { self.lift.reflect() } else { self.lift.clone() };
        PlHomeo {
            reversing: self.reversing ^ other.reversing,
            lift: outer.compose(&other.lift),
        }
    }

    /// `(λ^r F)⁻¹ = F⁻¹ λ^r = λ^r (F⁻¹)^`.
    pub fn inverse(&self) -> PlHomeo {
        let inv = self.lift.inverse();
        PlHomeo {
            reversing: self.reversing,
            lift: if self.reversing { inv.reflect() } else { inv },
        }
    }
}

/// Locally constant `φ: X → Homeo(𝕋)` with PL values.
#[derive(Clone, Serialize)]
pub struct PLCocycle {
    #[serde(skip)]
    pub system: Arc<OdometerSystem>,
    pub level: usize,
    pub maps: Vec<PlHomeo>,
}

impl fmt::Debug for PLCocycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PLCocycle").field("level", &self.level).field("maps", &self.maps).finish()
    }
}

impl PLCocycle {
    pub fn new(system: &Arc<OdometerSystem>, level: usize, maps: Vec<PlHomeo>) -> Result<Self> {
        let m = system.try_m(level)?;
        if maps.len() as u64 != m {
            return Err(Error::Invalid(format!("PL cocycle at level {level} needs {m} maps")));
        }
        Ok(PLCocycle {
            system: system.clone(),
            level,
            maps,
        })
    }

    pub fn constant(system: &Arc<OdometerSystem>, map: PlHomeo) -> Self {
        PLCocycle {
            system: system.clone(),
            level: 0,
            maps: vec![map],
        }
    }

    /// `φ_x = λ^{o(x)} R_{ξ(x)}`.
    pub fn isometric(o: &SignCocycle, xi: &crate::cocycle::CircleCocycle) -> Self {
        let sys = &xi.system;
        let level = o.level.max(xi.level);
        let maps = (0..sys.m(level))
            .map(|r| PlHomeo::new(o.at(r) == 1, PlLift::rotation(xi.at(r).value().clone())))
            .collect();
        PLCocycle {
            system: sys.clone(),
            level,
            maps,
        }
    }

    pub fn at(&self, residue: u64) -> &PlHomeo {
        &self.maps[(residue % self.maps.len() as u64) as usize]
    }

    pub fn lift_to(&self, level: usize) -> PLCocycle {
        PLCocycle {
            system: self.system.clone(),
            level,
            maps: self.system.lift_vector(&self.maps, self.level, level),
        }
    }

    /// `o(φ)`.
    pub fn orientation(&self) -> SignCocycle {
        SignCocycle {
            level: self.level,
            values: self.maps.iter().map(|m| m.reversing as u8).collect(),
        }
    }

    pub fn is_orientation_preserving(&self) -> bool {
        self.maps.iter().all(|m| !m.reversing)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat, GeneratorTable};
    use proptest::prelude::*;

    pub(crate) fn skewed() -> PlLift {
        PlLift::from_rationals(&[rat(0, 1), rat(1, 2)], rat(1, 4), &[rat(1, 2), rat(3, 2)]).unwrap()
    }

    #[test]
    fn construction_checks() {
        assert!(PlLift::from_rationals(&[rat(0, 1), rat(1, 2)], rat(0, 1), &[rat(1, 2), rat(1, 2)]).is_err());
        assert!(PlLift::from_rationals(&[rat(1, 2), rat(0, 1)], rat(0, 1), &[int(1), int(1)]).is_err());
        let f = skewed();
        assert_eq!(f.eval(&sym(rat(1, 2))), sym(rat(1, 2)));
        assert_eq!(f.eval(&sym(rat(1, 1))), sym(rat(5, 4)));
        assert_eq!(f.eval(&sym(rat(-1, 2))), sym(rat(-1, 2)));
        assert_eq!(f.eval(&sym(rat(3, 4))), sym(rat(7, 8)));
    }

    #[test]
    fn inverse_and_compose() {
        let f = skewed();
        let inv = f.inverse();
        for k in -4..8 {
            let t = sym(rat(k, 5));
            assert_eq!(inv.eval(&f.eval(&t)), t);
            assert_eq!(f.eval(&inv.eval(&t)), t);
        }
        let id = f.compose(&inv);
        assert_eq!(id.as_rotation(), Some(SymbolicReal::zero()));
        let t = GeneratorTable::new();
        let th = t.golden("theta").unwrap();
        let r = PlLift::rotation(th.clone());
        let fr = f.compose(&r);
        let rf = r.compose(&f);
        for k in 0..6 {
            let x = sym(rat(k, 6));
            assert_eq!(fr.eval(&x), f.eval(&(&x + &th)));
            assert_eq!(rf.eval(&x), &f.eval(&x) + &th);
        }
    }

    #[test]
    fn reflections() {
        let f = skewed();
        let fh = f.reflect();
        for k in -3..7 {
            let t = sym(rat(k, 7));
            assert_eq!(fh.eval(&t), -f.eval(&-t.clone()));
        }
        let h = PlHomeo::new(true, f.clone());
        let g = PlHomeo::new(false, PlLift::rotation(sym(rat(1, 3))));
        let hg = h.compose(&g);
        let gh = g.compose(&h);
        let hh = h.compose(&h);
        assert!(!hh.reversing);
        for k in 0..5 {
            let t = sym(rat(k, 5));
            assert_eq!(hg.eval(&t), h.eval(&g.eval(&t)));
            assert_eq!(gh.eval(&t), g.eval(&h.eval(&t)));
            assert_eq!(hh.eval(&t), h.eval(&h.eval(&t)));
            assert_eq!(h.inverse().eval(&h.eval(&t)), t);
        }
    }

    proptest! {
        #[test]
        fn composition_is_pointwise(a in 1i64..8, b in 1i64..8, off in -5i64..5, k in -10i64..10) {
            // two-piece lift with slopes a/b on [0, 1/2] and (2b − a)/b on [1/2, 1]
            prop_assume!(2 * b > a);
            let f = PlLift::from_rationals(&[rat(0, 1), rat(1, 2)], rat(off, 7), &[rat(a, b), rat(2 * b - a, b)]).unwrap();
            let g = skewed();
            let fg = f.compose(&g);
            let t = sym(rat(k, 9));
            prop_assert_eq!(fg.eval(&t), f.eval(&g.eval(&t)));
            prop_assert_eq!(f.inverse().eval(&f.eval(&t)), t);
        }
    }
}
