//! Circle-valued cocycles over odometers.
//!
//! Coboundaries are written `ξ = η − η∘α⁻¹` throughout. Perturbations
//! and the Bott element are phrased with `η − η∘α`; those
//! functions say so explicitly.
//!
//! Decisions are exact for locally constant cocycles: everything reduces
//! to the cycle sum `Θ_n = Σ_{k ∈ ℤ_{m_n}} ξ(k)`. A locally constant `ξ`
//! is a coboundary iff `(m_j/m_n)·Θ_n = 0` in 𝕋 for some `j`, because
//! `(m_N/m_n)·Θ_n → 0` is forced by continuity and the ratios are ≥ 2.
//! Consequently the rotation extension is minimal iff `Θ_n` is
//! irrational iff the mean is irrational, and then it is rigid.

mod perturb;
mod twist;

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::Serialize;

pub use perturb::{bott, control, perturb, perturb_signed, Bott, Control, Perturbation, BOTT_XI_BAND, H_BAND};
pub use twist::{
    flip_cohomology_test, minimal_sets_isom, untwist, CylinderTranslation, IsomMinimalSets,
};

use crate::cantor::{self, CylinderSet, Induced, OdometerSystem};
use crate::exact::{CircleValue, Exponent, Rational, SupernaturalNumber, SymbolicReal};
use crate::{Error, Result};

pub const DEFAULT_MAX_LEVEL: usize = 12;

/// Locally constant `ξ: X → 𝕋` given on the level-`level` cylinders.
#[derive(Clone, PartialEq, Eq)]
pub struct CircleCocycle {
    pub system: Arc<OdometerSystem>,
    pub level: usize,
    pub values: Vec<CircleValue>,
}

impl fmt::Debug for CircleCocycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CircleCocycle")
            .field("level", &self.level)
            .field("values", &self.values)
            .finish()
    }
}

impl Serialize for CircleCocycle {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("CircleCocycle", 2)?;
        st.serialize_field("level", &self.level)?;
        st.serialize_field("values", &self.values)?;
        st.end()
    }
}

fn same_system(a: &Arc<OdometerSystem>, b: &Arc<OdometerSystem>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

impl CircleCocycle {
    pub fn new(system: &Arc<OdometerSystem>, level: usize, values: Vec<CircleValue>) -> Result<Self> {
        let m = system.try_m(level)?;
        if values.len() as u64 != m {
            return Err(Error::Invalid(format!(
                "cocycle at level {level} needs {m} values, got {}",
                values.len()
            )));
        }
        Ok(CircleCocycle {
            system: system.clone(),
            level,
            values,
        })
    }

    pub fn from_reals(system: &Arc<OdometerSystem>, level: usize, values: &[SymbolicReal]) -> Result<Self> {
        Self::new(system, level, values.iter().cloned().map(CircleValue::new).collect())
    }

    pub fn constant(system: &Arc<OdometerSystem>, v: CircleValue) -> Self {
        CircleCocycle {
            system: system.clone(),
            level: 0,
            values: vec![v],
        }
    }

    pub fn zero(system: &Arc<OdometerSystem>) -> Self {
        Self::constant(system, CircleValue::zero())
    }

    pub fn m(&self) -> u64 {
        self.values.len() as u64
    }

    /// Value on the cylinder with this residue at any level ≥ `self.level`.
    pub fn at(&self, residue: u64) -> &CircleValue {
        &self.values[(residue % self.m()) as usize]
    }

    pub fn lift_to(&self, level: usize) -> Self {
        CircleCocycle {
            system: self.system.clone(),
            level,
            values: self.system.lift_vector(&self.values, self.level, level),
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&CircleValue, &CircleValue) -> CircleValue) -> Result<Self> {
        if !same_system(&self.system, &other.system) {
            return Err(Error::MismatchedSystems);
        }
        let level = self.level.max(other.level);
        let m = self.system.m(level);
        Ok(CircleCocycle {
            system: self.system.clone(),
            level,
            values: (0..m).map(|r| f(self.at(r), other.at(r))).collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn neg(&self) -> Self {
        self.map(|v| -v)
    }

    pub fn scale_int(&self, n: i64) -> Self {
        self.map(|v| v.scale_int(n))
    }

    pub fn map(&self, f: impl Fn(&CircleValue) -> CircleValue) -> Self {
        CircleCocycle {
            system: self.system.clone(),
            level: self.level,
            values: self.values.iter().map(f).collect(),
        }
    }

    /// `ξ∘α⁻¹`.
    pub fn shift_back(&self) -> Self {
        let m = self.m();
        CircleCocycle {
            system: self.system.clone(),
            level: self.level,
            values: (0..m).map(|r| self.at(r + m - 1).clone()).collect(),
        }
    }

    /// `ξ∘α`.
    pub fn shift_forward(&self) -> Self {
        CircleCocycle {
            system: self.system.clone(),
            level: self.level,
            values: (0..self.m()).map(|r| self.at(r + 1).clone()).collect(),
        }
    }

    /// `η − η∘α⁻¹`.
    pub fn coboundary(&self) -> Self {
        self.sub(&self.shift_back()).expect("same system")
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(CircleValue::is_zero)
    }

    /// `Θ_n` for `n ≥ self.level`.
    pub fn cycle_sum(&self, n: usize) -> CircleValue {
        cantor::cycle_sum(&self.system, self.level, &self.values, n)
    }

    pub fn canonical_lift(&self) -> RealLift {
        RealLift {
            level: self.level,
            values: self.values.iter().map(|v| v.value().clone()).collect(),
        }
    }

    pub fn induce(&self, u: &CylinderSet) -> Result<Induced> {
        cantor::induce(&self.system, u, self.level, &self.values)
    }
}

/// Real lift `ξ̃` of a cocycle, on the level-`level` cylinders.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RealLift {
    pub level: usize,
    pub values: Vec<SymbolicReal>,
}

/// Whether `a < x < b`, decided exactly.
pub fn in_open_band(x: &SymbolicReal, a: &Rational, b: &Rational) -> bool {
    let lo = x.add_rational(&-a.clone());
    let hi = SymbolicReal::from_rational(b.clone()) - x;
    lo.signum_exact().is_gt() && hi.signum_exact().is_gt()
}

impl RealLift {
    pub fn new(sys: &OdometerSystem, level: usize, values: Vec<SymbolicReal>) -> Result<Self> {
        let m = sys.try_m(level)?;
        if values.len() as u64 != m {
            return Err(Error::Invalid(format!(
                "lift at level {level} needs {m} values, got {}",
                values.len()
            )));
        }
        Ok(RealLift { level, values })
    }

    pub fn constant(x: SymbolicReal) -> Self {
        RealLift {
            level: 0,
            values: vec![x],
        }
    }

    pub fn at(&self, residue: u64) -> &SymbolicReal {
        &self.values[(residue % self.values.len() as u64) as usize]
    }

    pub fn lift_to(&self, sys: &OdometerSystem, level: usize) -> RealLift {
        RealLift {
            level,
            values: sys.lift_vector(&self.values, self.level, level),
        }
    }

    pub fn reduce(&self, sys: &Arc<OdometerSystem>) -> Result<CircleCocycle> {
        CircleCocycle::from_reals(sys, self.level, &self.values)
    }

    pub fn mean(&self, sys: &OdometerSystem) -> SymbolicReal {
        let mut acc = SymbolicReal::zero();
        for v in &self.values {
            acc = &acc + v;
        }
        acc.scale(&sys.cylinder_mass(self.level))
    }

    pub fn in_band(&self, a: &Rational, b: &Rational) -> bool {
        self.values.iter().all(|v| in_open_band(v, a, b))
    }

    pub fn check_band(&self, a: &Rational, b: &Rational, what: &str) -> Result<()> {
        match self.values.iter().position(|v| !in_open_band(v, a, b)) {
            None => Ok(()),
            Some(r) => Err(Error::Band(format!(
                "{what} = {} on cylinder {r} is outside ({a}, {b})",
                self.values[r]
            ))),
        }
    }

    /// Whether this lifts `xi`.
    pub fn lifts(&self, xi: &CircleCocycle) -> bool {
        let level = self.level.max(xi.level);
        (0..xi.system.m(level)).all(|r| CircleValue::new(self.at(r).clone()) == *xi.at(r))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Yes,
    No,
    Unknown,
}

/// Verdict with its certificate. Any returned `eta` has been substituted
/// back into its defining identity; `reverified` records the outcome.
#[derive(Debug, Clone, Serialize)]
pub struct CocycleDecision {
    pub verdict: Verdict,
    pub reason: String,
    pub search_level: usize,
    pub cycle_sum: Option<CircleValue>,
    pub multiple: Option<u64>,
    pub eta: Option<CircleCocycle>,
    pub minimal_sets: Option<String>,
    pub reverified: Option<bool>,
}

impl CocycleDecision {
    fn bare(verdict: Verdict, reason: impl Into<String>, search_level: usize) -> Self {
        CocycleDecision {
            verdict,
            reason: reason.into(),
            search_level,
            cycle_sum: None,
            multiple: None,
            eta: None,
            minimal_sets: None,
            reverified: None,
        }
    }
}

/// Part of the reduced denominator of `q` that the supernatural number
/// does not absorb.
fn unadmitted_part(s: &SupernaturalNumber, q: &Rational) -> BigInt {
    let mut d = q.denom().clone();
    for (p, e) in s.primes() {
        let bp = BigInt::from(p);
        let mut used = 0u32;
        while (&d % &bp).is_zero() {
            if let Exponent::Finite(cap) = e {
                if used == cap {
                    break;
                }
            }
            d /= &bp;
            used += 1;
        }
    }
    d
}

/// Telescoping transfer function at level `j`: `η(0) = 0`,
/// `η(r) = Σ_{i=1}^{r} ξ(i)`. Solves `ξ = η − η∘α⁻¹` when `Θ_j = 0`.
fn telescope(xi: &CircleCocycle, j: usize) -> CircleCocycle {
    let lifted = xi.lift_to(j);
    let mut eta = Vec::with_capacity(lifted.values.len());
    let mut acc = CircleValue::zero();
    eta.push(acc.clone());
    for v in &lifted.values[1..] {
        acc = &acc + v;
        eta.push(acc.clone());
    }
    CircleCocycle {
        system: xi.system.clone(),
        level: j,
        values: eta,
    }
}

/// Decides `[ξ] = 0` in `K⁰_𝕋`.
pub fn coboundary_test(xi: &CircleCocycle, max_level: usize) -> Result<CocycleDecision> {
    let n = xi.level;
    if n > max_level {
        return Err(Error::Precondition(format!("cocycle level {n} exceeds max_level {max_level}")));
    }
    let sys = &xi.system;
    let theta = xi.cycle_sum(n);
    let Some(q) = theta.value().as_rational().cloned() else {
        let mut d = CocycleDecision::bare(
            Verdict::No,
            format!("cycle sum {theta} has an irrational coordinate"),
            n,
        );
        d.cycle_sum = Some(theta);
        return Ok(d);
    };
    let per_cylinder = &q / BigRational::from_integer(sys.m_big(n));
    if !sys.supernatural().admits(&per_cylinder) {
        let mut d = CocycleDecision::bare(
            Verdict::No,
            format!(
                "cycle sum {q}: denominator of {per_cylinder} is not admitted by {}",
                sys.supernatural()
            ),
            n,
        );
        d.cycle_sum = Some(theta);
        return Ok(d);
    }
    let mut j = n;
    loop {
        let scaled = &q * BigRational::from_integer(BigInt::from(sys.m(j) / sys.m(n)));
        if scaled.is_integer() {
            break;
        }
        if j >= max_level {
            let mut d = CocycleDecision::bare(
                Verdict::Unknown,
                format!("a transfer function exists but lives deeper than level {max_level}"),
                max_level,
            );
            d.cycle_sum = Some(theta);
            return Ok(d);
        }
        j += 1;
    }
    let eta = telescope(xi, j);
    let ok = eta.coboundary() == xi.lift_to(j);
    let mut d = CocycleDecision::bare(
        Verdict::Yes,
        format!("Θ_{j} = 0; transfer function found by telescoping at level {j}"),
        j,
    );
    d.cycle_sum = Some(theta);
    d.eta = Some(eta);
    d.reverified = Some(ok);
    Ok(d)
}

/// Minimality of `(x, t) ↦ (αx, t + ξ(x))`: minimal iff `n[ξ] ≠ 0` for
/// all `n ≥ 1`. When not minimal, returns the least such `n` with a
/// transfer function for `nξ`.
pub fn minimality_test(xi: &CircleCocycle, max_level: usize) -> Result<CocycleDecision> {
    let n = xi.level;
    if n > max_level {
        return Err(Error::Precondition(format!("cocycle level {n} exceeds max_level {max_level}")));
    }
    let sys = &xi.system;
    let theta = xi.cycle_sum(n);
    let Some(q) = theta.value().as_rational().cloned() else {
        let mut d = CocycleDecision::bare(
            Verdict::Yes,
            format!("cycle sum {theta} is irrational, so n[ξ] ≠ 0 for every n ≥ 1"),
            n,
        );
        d.cycle_sum = Some(theta);
        return Ok(d);
    };
    let per_cylinder = &q / BigRational::from_integer(sys.m_big(n));
    let mult = unadmitted_part(sys.supernatural(), &per_cylinder)
        .to_u64()
        .filter(|&k| k <= i64::MAX as u64)
        .ok_or_else(|| Error::Invalid("multiple does not fit in 64 bits".into()))?;
    let sub = coboundary_test(&xi.scale_int(mult as i64), max_level)?;
    let mut d = match sub.verdict {
        Verdict::Yes => {
            let eta = sub.eta.expect("yes carries a witness");
            let ok = eta.coboundary() == xi.scale_int(mult as i64).lift_to(eta.level);
            let mut d = CocycleDecision::bare(
                Verdict::No,
                format!("{mult}·ξ is a coboundary"),
                sub.search_level,
            );
            d.minimal_sets = Some(format!("E_s = {{(x,t) : {mult}t = η(α⁻¹x) + s}}, s ∈ T"));
            d.eta = Some(eta);
            d.reverified = Some(ok);
            d
        }
        Verdict::Unknown => CocycleDecision::bare(
            Verdict::Unknown,
            format!("{mult}·ξ is a coboundary but its transfer function lies beyond level {max_level}"),
            max_level,
        ),
        Verdict::No => unreachable!("the multiple clears every unadmitted denominator"),
    };
    d.multiple = Some(mult);
    d.cycle_sum = Some(theta);
    Ok(d)
}

/// Rigidity: yes when `n·μ(ξ̃) ∉ ℤ[1/s]` for all `n` (the mean has an
/// irrational coordinate); no when the extension is not minimal.
pub fn rigidity_test(xi: &CircleCocycle, max_level: usize) -> Result<CocycleDecision> {
    let mean = xi.canonical_lift().mean(&xi.system);
    if !mean.is_rational() {
        return Ok(CocycleDecision::bare(
            Verdict::Yes,
            format!("mean {mean} has an irrational coordinate, so n·mean avoids K0 for every n ≥ 1"),
            xi.level,
        ));
    }
    let m = minimality_test(xi, max_level)?;
    let mut d = match m.verdict {
        Verdict::No => CocycleDecision::bare(
            Verdict::No,
            "not minimal: the extension has uncountably many minimal sets",
            m.search_level,
        ),
        _ => CocycleDecision::bare(
            Verdict::Unknown,
            format!("mean {mean} is rational and non-minimality is not certified within level {max_level}"),
            m.search_level,
        ),
    };
    d.multiple = m.multiple;
    d.eta = m.eta;
    d.reverified = m.reverified;
    d.minimal_sets = m.minimal_sets;
    Ok(d)
}

#[derive(Debug, Clone, Serialize)]
pub struct CocycleMean {
    pub mean: SymbolicReal,
    /// The mean is determined by `ξ` only up to values of `K⁰`.
    pub delta_rep: String,
}

pub fn cocycle_mean(xi: &CircleCocycle, lift: &RealLift) -> Result<CocycleMean> {
    if !lift.lifts(xi) {
        return Err(Error::Invalid("lift does not reduce to the cocycle".into()));
    }
    let mean = lift.mean(&xi.system);
    Ok(CocycleMean {
        delta_rep: format!("{mean} mod Z[1/{}]", xi.system.supernatural()),
        mean,
    })
}

pub(crate) fn one_over(x: &Rational) -> Rational {
    Rational::one() / x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat, GeneratorTable};
    use proptest::prelude::*;

    fn s3() -> Arc<OdometerSystem> {
        Arc::new(OdometerSystem::uniform(3))
    }

    fn cv(n: i64, d: i64) -> CircleValue {
        CircleValue::from_rational(rat(n, d))
    }

    #[test]
    fn coboundary_examples() {
        let sys = s3();
        let third = CircleCocycle::constant(&sys, cv(1, 3));
        let d = coboundary_test(&third, 12).unwrap();
        assert_eq!(d.verdict, Verdict::Yes);
        assert_eq!(d.reverified, Some(true));
        assert_eq!(d.eta.as_ref().unwrap().level, 1);

        let half = CircleCocycle::constant(&sys, cv(1, 2));
        assert_eq!(coboundary_test(&half, 12).unwrap().verdict, Verdict::No);
        // orbit cross-check: partial sums k/2 never return to 0 at odd times 3^n
        for n in 0..8 {
            assert!(!half.cycle_sum(n).is_zero());
        }

        let zero = CircleCocycle::zero(&sys);
        let d = coboundary_test(&zero, 12).unwrap();
        assert_eq!(d.verdict, Verdict::Yes);
        assert!(d.eta.unwrap().is_zero());
    }

    #[test]
    fn coboundary_budget() {
        let sys = s3();
        let deep = CircleCocycle::constant(&sys, cv(1, 81));
        assert_eq!(coboundary_test(&deep, 3).unwrap().verdict, Verdict::Unknown);
        assert_eq!(coboundary_test(&deep, 4).unwrap().verdict, Verdict::Yes);
    }

    #[test]
    fn minimality_examples() {
        let sys = s3();
        let t = GeneratorTable::new();
        let th = t.golden("theta").unwrap();
        let xi = CircleCocycle::constant(&sys, CircleValue::new(th.clone()));
        assert_eq!(minimality_test(&xi, 12).unwrap().verdict, Verdict::Yes);
        for n in 1..=12 {
            assert_eq!(coboundary_test(&xi.scale_int(n), 12).unwrap().verdict, Verdict::No);
        }
        let third = CircleCocycle::constant(&sys, cv(1, 3));
        let d = minimality_test(&third, 12).unwrap();
        assert_eq!((d.verdict, d.multiple, d.reverified), (Verdict::No, Some(1), Some(true)));

        // (θ, −θ, 1/3): Θ₁ = 1/3 and Θ₂ = 1, so ξ itself is a coboundary
        let mixed = CircleCocycle::from_reals(
            &sys,
            1,
            &[th.clone(), -th.clone(), SymbolicReal::from_rational(rat(1, 3))],
        )
        .unwrap();
        let d = minimality_test(&mixed, 12).unwrap();
        assert_eq!((d.verdict, d.multiple, d.reverified), (Verdict::No, Some(1), Some(true)));
        assert_eq!(d.eta.unwrap().level, 2);

        let half = CircleCocycle::constant(&sys, cv(1, 2));
        let d = minimality_test(&half, 12).unwrap();
        assert_eq!((d.verdict, d.multiple), (Verdict::No, Some(2)));
    }

    #[test]
    fn rigidity_examples() {
        let sys = s3();
        let t = GeneratorTable::new();
        let th = t.golden("theta").unwrap();
        let xi = CircleCocycle::constant(&sys, CircleValue::new(th));
        assert_eq!(rigidity_test(&xi, 12).unwrap().verdict, Verdict::Yes);
        let third = CircleCocycle::constant(&sys, cv(1, 3));
        assert_eq!(rigidity_test(&third, 12).unwrap().verdict, Verdict::No);
        let deep = CircleCocycle::constant(&sys, cv(1, 3_i64.pow(8)));
        assert_eq!(rigidity_test(&deep, 4).unwrap().verdict, Verdict::Unknown);
    }

    #[test]
    fn mean_examples() {
        let sys = s3();
        let t = GeneratorTable::new();
        let th = t.golden("theta").unwrap();
        let half = SymbolicReal::from_rational(rat(1, 2));
        let lift = RealLift::new(&sys, 1, vec![half.clone(), half, th.clone()]).unwrap();
        let xi = lift.reduce(&sys).unwrap();
        let m = cocycle_mean(&xi, &lift).unwrap();
        assert_eq!(m.mean, SymbolicReal::from_rational(rat(1, 3)) + th.scale(&rat(1, 3)));
        let shifted = RealLift::new(&sys, 1, vec![lift.values[0].add_rational(&int(2)), lift.values[1].clone(), lift.values[2].clone()]).unwrap();
        let m2 = cocycle_mean(&xi, &shifted).unwrap();
        assert_eq!(&m2.mean - &m.mean, SymbolicReal::from_rational(rat(2, 3)));
        let wrong = RealLift::constant(SymbolicReal::from_rational(rat(1, 5)));
        assert!(cocycle_mean(&xi, &wrong).is_err());
    }

    fn arb_cocycle() -> impl Strategy<Value = (Vec<(i64, i64)>, Vec<i64>, usize)> {
        (
            proptest::collection::vec((-20i64..20, 1i64..28), 3),
            proptest::collection::vec(-2i64..3, 3),
            0usize..2,
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn minimality_agrees_with_multiples((qs, irr, pick) in arb_cocycle()) {
            let sys = [s3(), Arc::new(OdometerSystem::new(vec![3, 6, 18], None).unwrap())][pick].clone();
            let t = GeneratorTable::new();
            let th = t.sqrt("s2", int(2)).unwrap();
            let vals: Vec<SymbolicReal> = qs.iter().zip(&irr)
                .map(|(&(a, b), &k)| SymbolicReal::from_rational(rat(a, b)) + th.scale_int(k))
                .collect();
            let xi = CircleCocycle::from_reals(&sys, 1, &vals).unwrap();
            let m = minimality_test(&xi, 12).unwrap();
            let brute_minimal = (1..=12).all(|n| coboundary_test(&xi.scale_int(n), 12).unwrap().verdict == Verdict::No);
            match m.verdict {
                Verdict::Yes => prop_assert!(brute_minimal),
                Verdict::No => {
                    prop_assert_eq!(m.reverified, Some(true));
                    let n = m.multiple.unwrap();
                    if n <= 12 { prop_assert!(!brute_minimal); }
                }
                Verdict::Unknown => {}
            }
            // implication chain
            if coboundary_test(&xi, 12).unwrap().verdict == Verdict::Yes {
                prop_assert_eq!(m.verdict, Verdict::No);
            }
            if m.verdict == Verdict::No {
                prop_assert_eq!(rigidity_test(&xi, 12).unwrap().verdict, Verdict::No);
            }
        }

        #[test]
        fn coboundaries_are_detected(vals in proptest::collection::vec((-20i64..20, 1i64..10), 9)) {
            let sys = s3();
            let eta = CircleCocycle::new(&sys, 2, vals.iter().map(|&(a, b)| cv(a, b)).collect()).unwrap();
            let xi = eta.coboundary();
            let d = coboundary_test(&xi, 12).unwrap();
            prop_assert_eq!(d.verdict, Verdict::Yes);
            prop_assert_eq!(d.reverified, Some(true));
        }
    }
}
