//! Rotation numbers of PL lifts and the rotation-targeting perturbation.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::pl::{PLCocycle, PlHomeo, PlLift};
use crate::cocycle::{perturb, CircleCocycle};
use crate::exact::{CircleValue, Rational, SymbolicReal};
use crate::{Error, Result};

/// Knot count beyond which the periodic-orbit search stops composing.
const MAX_KNOTS: usize = 4096;
const MAX_BISECTIONS: u32 = 256;

fn sym(q: Rational) -> SymbolicReal {
    SymbolicReal::from_rational(q)
}

/// Rotation number `ρ(F) = lim Fⁿ(t)/n` of a lift.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RotationNumber {
    /// `ρ = p/q`, certified by `F^q(witness) = witness + p`.
    Periodic {
        value: SymbolicReal,
        period: u64,
        witness: SymbolicReal,
    },
    /// The lift is `t ↦ t + v`.
    Rigid { value: SymbolicReal },
    /// `lo ≤ ρ ≤ hi`; irrationality is never asserted.
    Enclosure {
        lo: SymbolicReal,
        hi: SymbolicReal,
        steps: u64,
    },
}

impl RotationNumber {
    pub fn bounds(&self) -> (SymbolicReal, SymbolicReal) {
        match self {
            RotationNumber::Periodic { value, .. } | RotationNumber::Rigid { value } => (value.clone(), value.clone()),
            RotationNumber::Enclosure { lo, hi, .. } => (lo.clone(), hi.clone()),
        }
    }

    pub fn exact(&self) -> Option<&SymbolicReal> {
        match self {
            RotationNumber::Periodic { value, .. } | RotationNumber::Rigid { value } => Some(value),
            RotationNumber::Enclosure { .. } => None,
        }
    }

    pub fn width(&self) -> SymbolicReal {
        let (lo, hi) = self.bounds();
        &hi - &lo
    }
}

fn ceil_sym(x: &SymbolicReal) -> BigInt {
    -(-x.clone()).floor()
}

fn iterate(f: &PlLift, t: &SymbolicReal, n: u64) -> SymbolicReal {
    (0..n).fold(t.clone(), |x, _| f.eval(&x))
}

/// A point with `D(t) = F^q(t) − t = p`, if `D` takes the value `p`.
fn periodic_point(fq: &PlLift, p: &SymbolicReal) -> Option<SymbolicReal> {
    for (u, v, fu, slope) in fq.pieces() {
        let du = &fu - &u;
        if du == *p {
            return Some(u);
        }
        let dslope = &slope - Rational::one();
        if dslope.is_zero() {
            continue;
        }
        // D on this piece runs from du to du + dslope·(v − u)
        let t = &u + &(p - &du).scale(&(Rational::one() / &dslope));
        if t.cmp_exact(&u) == Ordering::Greater && t.cmp_exact(&v) == Ordering::Less {
            return Some(t);
        }
    }
    None
}

/// Orbit enclosure `((Fⁿ(0) − 1)/n, (Fⁿ(0) + 1)/n)`.
pub fn rotation_enclosure(f: &PlLift, steps: u64) -> RotationNumber {
    if let Some(v) = f.as_rotation() {
        return RotationNumber::Rigid { value: v };
    }
    let n = steps.max(1);
    let x = iterate(f, &SymbolicReal::zero(), n);
    let inv = Rational::new(BigInt::one(), BigInt::from(n));
    RotationNumber::Enclosure {
        lo: x.add_rational(&-Rational::one()).scale(&inv),
        hi: x.add_rational(&Rational::one()).scale(&inv),
        steps: n,
    }
}

/// Exact when a periodic orbit of period ≤ `budget` exists or the map is a
/// rotation; otherwise an enclosure of width at most `2/budget`.
pub fn rotation_number(phi: &PlHomeo, budget: u64) -> Result<RotationNumber> {
    if phi.reversing {
        return Err(Error::Precondition("rotation numbers need an orientation-preserving map".into()));
    }
    let f = &phi.lift;
    if let Some(v) = f.as_rotation() {
        if let Some(q) = v.as_rational() {
            let period = q.denom().to_u64().filter(|&d| d <= budget.max(1));
            if let Some(period) = period {
                let witness = SymbolicReal::zero();
                debug_assert_eq!(iterate(f, &witness, period), sym(q * Rational::from_integer(BigInt::from(period))));
                return Ok(RotationNumber::Periodic {
                    value: v,
                    period,
                    witness,
                });
            }
        }
        return Ok(RotationNumber::Rigid { value: v });
    }
    let budget = budget.max(1);
    let mut fq = f.clone();
    let mut last = (SymbolicReal::zero(), SymbolicReal::zero(), 0u64);
    for q in 1..=budget {
        if q > 1 {
            fq = f.compose(&fq);
        }
        let (min, max) = fq.displacement_range();
        let p = ceil_sym(&min);
        let ps = sym(Rational::from_integer(p.clone()));
        if ps.cmp_exact(&max) != Ordering::Greater {
            if let Some(t) = periodic_point(&fq, &ps) {
                if iterate(f, &t, q) == t.add_rational(&Rational::from_integer(p.clone())) {
                    return Ok(RotationNumber::Periodic {
                        value: sym(Rational::new(p, BigInt::from(q))),
                        period: q,
                        witness: t,
                    });
                }
            }
        }
        let inv = Rational::new(BigInt::one(), BigInt::from(q));
        last = (min.scale(&inv), max.scale(&inv), q);
        if fq.knots().len() > MAX_KNOTS {
            break;
        }
    }
    if last.2 == budget {
        return Ok(RotationNumber::Enclosure {
            lo: last.0,
            hi: last.1,
            steps: budget,
        });
    }
    Ok(rotation_enclosure(f, budget))
}

/// Open arc `(a, b)` of the circle, `0 < b − a ≤ 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CircleArc {
    pub a: Rational,
    pub b: Rational,
}

impl Serialize for CircleArc {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format!("({}, {})", self.a, self.b))
    }
}

impl CircleArc {
    pub fn new(a: Rational, b: Rational) -> Result<Self> {
        let len = &b - &a;
        if !len.is_positive() || len > Rational::one() {
            return Err(Error::Invalid(format!("({a}, {b}) is not an open arc of the circle")));
        }
        Ok(CircleArc { a, b })
    }

    pub fn length(&self) -> Rational {
        &self.b - &self.a
    }

    pub fn midpoint(&self) -> Rational {
        (&self.a + &self.b) / Rational::from_integer(BigInt::from(2))
    }

    /// Whether `[lo, hi] + k ⊂ (a, b)` for some integer `k`.
    pub fn contains_interval(&self, lo: &SymbolicReal, hi: &SymbolicReal) -> bool {
        let k = lo.add_rational(&-self.a.clone()).floor();
        let shift = Rational::from_integer(-k);
        let lo = lo.add_rational(&shift);
        let hi = hi.add_rational(&shift);
        lo.cmp_exact(&sym(self.a.clone())) == Ordering::Greater && hi.cmp_exact(&sym(self.b.clone())) == Ordering::Less
    }

    pub fn contains(&self, x: &CircleValue) -> bool {
        self.contains_interval(x.value(), x.value())
    }
}

fn steps_for(arc: &CircleArc) -> u64 {
    let n = (Rational::from_integer(BigInt::from(8)) / arc.length()).ceil().to_integer();
    n.to_u64().unwrap_or(u64::MAX).max(16)
}

fn rational_bounds(x: &SymbolicReal) -> (Rational, Rational) {
    if let Some(q) = x.as_rational() {
        return (q.clone(), q.clone());
    }
    let iv = x.enclosure(16);
    (iv.lo, iv.hi)
}

/// `t` with `r(R_t ∘ φ) ∈ I`, with its certifying rotation data.
#[derive(Debug, Clone, Serialize)]
pub struct RotationTarget {
    pub t: SymbolicReal,
    pub rotation: RotationNumber,
    pub certified: bool,
}

/// Bisection over the nondecreasing family `t ↦ ρ(R_t ∘ φ)`, aiming at
/// the midpoint of the arc with enclosures narrower than a quarter arc.
pub fn rotation_target(phi: &PlHomeo, arc: &CircleArc) -> Result<RotationTarget> {
    if phi.reversing {
        return Err(Error::Precondition("rotation targets need an orientation-preserving map".into()));
    }
    let steps = steps_for(arc);
    let c = arc.midpoint();
    let (m, big_m) = phi.lift.displacement_range();
    let mut lo_t = &c - rational_bounds(&big_m).1;
    let mut hi_t = &c - rational_bounds(&m).0;
    let two = Rational::from_integer(BigInt::from(2));
    for _ in 0..MAX_BISECTIONS {
        let t = (&lo_t + &hi_t) / &two;
        let g = phi.lift.then_rotate(&sym(t.clone()));
        let rot = rotation_enclosure(&g, steps);
        let (lo, hi) = rot.bounds();
        if arc.contains_interval(&lo, &hi) {
            return Ok(RotationTarget {
                t: sym(t),
                rotation: rot,
                certified: true,
            });
        }
        if hi.cmp_exact(&sym(c.clone())) == Ordering::Less {
            lo_t = t;
        } else if lo.cmp_exact(&sym(c.clone())) == Ordering::Greater {
            hi_t = t;
        } else {
            return Err(Error::Budget(format!(
                "rotation enclosure [{lo}, {hi}] straddles the arc midpoint without fitting the arc"
            )));
        }
    }
    Err(Error::Budget(format!("no certified target after {MAX_BISECTIONS} bisections")))
}

/// Per-cylinder certificate `r(R_{ηα(x) − η(x)} ∘ φ_x) ∈ I`.
#[derive(Debug, Clone, Serialize)]
pub struct RotationCertificate {
    pub residue: u64,
    pub rotation: RotationNumber,
    pub inside: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PerturbedRotation {
    pub eta: CircleCocycle,
    pub certificates: Vec<RotationCertificate>,
    pub certified: bool,
}

fn certify(phi: &PLCocycle, eta: &CircleCocycle, arc: &CircleArc, steps: u64) -> Vec<RotationCertificate> {
    let level = phi.level.max(eta.level);
    (0..phi.system.m(level))
        .map(|r| {
            let shift = eta.at(r + 1) - eta.at(r);
            let g = phi.at(r).lift.then_rotate(shift.value());
            let rotation = rotation_enclosure(&g, steps);
            let (lo, hi) = rotation.bounds();
            RotationCertificate {
                residue: r,
                inside: arc.contains_interval(&lo, &hi),
                rotation,
            }
        })
        .collect()
}

/// `η` with `r(R_{ηα(x)} ∘ φ_x ∘ R_{η(x)}⁻¹) ∈ I` for every `x`.
pub fn perturb_rotation(phi: &PLCocycle, arc: &CircleArc) -> Result<PerturbedRotation> {
    if !phi.is_orientation_preserving() {
        return Err(Error::Precondition("perturb_rotation needs an orientation-preserving cocycle".into()));
    }
    let sys = &phi.system;
    let steps = steps_for(arc);
    let zero = CircleCocycle::zero(sys);
    let direct = certify(phi, &zero, arc, steps);
    if direct.iter().all(|c| c.inside) {
        return Ok(PerturbedRotation {
            eta: zero.lift_to(phi.level),
            certificates: direct,
            certified: true,
        });
    }
    let mut targets = Vec::with_capacity(phi.maps.len());
    let mut eps = Rational::new(BigInt::one(), BigInt::from(4));
    for map in &phi.maps {
        let target = rotation_target(map, arc)?;
        let (lo, _) = target.rotation.bounds();
        let k = lo.add_rational(&-arc.a.clone()).floor();
        let lifted = CircleArc {
            a: &arc.a + Rational::from_integer(k.clone()),
            b: &arc.b + Rational::from_integer(k),
        };
        // monotonicity: enclosures at t ± ε inside the same lifted arc cover the gap
        loop {
            let below = rotation_enclosure(&map.lift.then_rotate(&(&target.t - &sym(eps.clone()))), steps).bounds().0;
            let above = rotation_enclosure(&map.lift.then_rotate(&(&target.t + &sym(eps.clone()))), steps).bounds().1;
            if below.cmp_exact(&sym(lifted.a.clone())) == Ordering::Greater
                && above.cmp_exact(&sym(lifted.b.clone())) == Ordering::Less
            {
                break;
            }
            eps /= Rational::from_integer(BigInt::from(2));
            if eps.denom().bits() > 64 {
                return Err(Error::Budget("no stable neighbourhood for the rotation target".into()));
            }
        }
        targets.push(CircleValue::new(target.t));
    }
    let xi = CircleCocycle::new(sys, phi.level, targets)?;
    let p = perturb(&xi, &eps)?;
    let certificates = certify(phi, &p.eta, arc, steps);
    let certified = certificates.iter().all(|c| c.inside);
    Ok(PerturbedRotation {
        eta: p.eta,
        certificates,
        certified,
    })
}
