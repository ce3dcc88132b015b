//! Ordered K⁰ groups.
//!
//! For an odometer, `K⁰ = C(X,ℤ)/{f − f∘α⁻¹}` is identified with
//! `ℤ[1/s]` through `[f] ↦ (Σ_k f(k))/m_n` for `f` at level `n`; this is
//! the fast path used throughout. Finite-level cokernels computed with
//! Smith normal form give an independent route used for cross-checks.

mod bratteli;
pub mod finite;
mod real;
pub mod smith;

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::ser::SerializeStruct;
use serde::Serialize;

pub use bratteli::{BratteliDiagram, Tri, DEFAULT_BRATTELI_BOUND};
pub use real::{order_iso_decision, IsoDecision, RealGroup};

use crate::cantor::{two_exponent, InvariantMeasure, OdometerSystem, SignCocycle, SkewOdometer, SkewProduct};
use crate::exact::{Exponent, Rational, SupernaturalNumber, SymbolicReal, DEFAULT_REFINE_BUDGET};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub enum K0Group {
    Odometer(Arc<OdometerSystem>),
    Bratteli(Arc<BratteliDiagram>),
    Real(RealGroup),
}

impl K0Group {
    pub fn unit(&self) -> K0Class {
        match self {
            K0Group::Odometer(sys) => k0_class(sys, 0, &[1]),
            K0Group::Bratteli(d) => K0Class {
                group: self.clone(),
                rep: Representative::Vector {
                    level: 0,
                    vector: vec![BigInt::from(1); d.vertices(0)],
                },
                value: None,
            },
            K0Group::Real(_) => K0Class {
                group: self.clone(),
                rep: Representative::Real(SymbolicReal::one()),
                value: Some(SymbolicReal::one()),
            },
        }
    }

    fn same(&self, other: &K0Group) -> bool {
        match (self, other) {
            (K0Group::Odometer(a), K0Group::Odometer(b)) => Arc::ptr_eq(a, b) || a == b,
            (K0Group::Bratteli(a), K0Group::Bratteli(b)) => Arc::ptr_eq(a, b) || a == b,
            (K0Group::Real(a), K0Group::Real(b)) => a.set_eq(b).unwrap_or(false),
            _ => false,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            K0Group::Odometer(sys) => format!("Z[1/{}]", sys.supernatural()),
            K0Group::Bratteli(_) => "dimension group of a Bratteli diagram".into(),
            K0Group::Real(g) => g.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Representative {
    /// Integer function on the level-`level` cylinders (or vertices).
    Vector { level: usize, vector: Vec<BigInt> },
    Real(SymbolicReal),
}

#[derive(Debug, Clone)]
pub struct K0Class {
    pub group: K0Group,
    pub rep: Representative,
    value: Option<SymbolicReal>,
}

impl K0Class {
    /// Image in ℝ under the canonical state, when the group has one.
    pub fn value(&self) -> Option<&SymbolicReal> {
        self.value.as_ref()
    }

    pub fn rational_value(&self) -> Option<Rational> {
        self.value.as_ref().and_then(|v| v.as_rational().cloned())
    }

    pub fn add(&self, other: &K0Class) -> Result<K0Class> {
        if !self.group.same(&other.group) {
            return Err(Error::MismatchedSystems);
        }
        match (&self.group, &self.rep, &other.rep) {
            (
                K0Group::Odometer(sys),
                Representative::Vector { level: la, vector: va },
                Representative::Vector { level: lb, vector: vb },
            ) => {
                let top = (*la).max(*lb);
                let a = sys.lift_vector(va, *la, top);
                let b = sys.lift_vector(vb, *lb, top);
                Ok(k0_class_big(sys, top, a.iter().zip(&b).map(|(x, y)| x + y).collect()))
            }
            (
                K0Group::Bratteli(d),
                Representative::Vector { level: la, vector: va },
                Representative::Vector { level: lb, vector: vb },
            ) => {
                let top = (*la).max(*lb);
                let a = d.push(va, *la, top);
                let b = d.push(vb, *lb, top);
                Ok(bratteli_class(d, top, a.iter().zip(&b).map(|(x, y)| x + y).collect()))
            }
            (K0Group::Real(_), Representative::Real(x), Representative::Real(y)) => {
                let s = x.try_add(y)?;
                Ok(K0Class {
                    group: self.group.clone(),
                    rep: Representative::Real(s.clone()),
                    value: Some(s),
                })
            }
            _ => Err(Error::MismatchedSystems),
        }
    }
}

impl fmt::Display for K0Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.value {
            Some(v) => write!(f, "[{v}] in {}", self.group.describe()),
            None => write!(f, "{:?} in {}", self.rep, self.group.describe()),
        }
    }
}

impl Serialize for K0Class {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("K0Class", 4)?;
        st.serialize_field("group", &self.group.describe())?;
        match &self.rep {
            Representative::Vector { level, vector } => {
                st.serialize_field("level", level)?;
                let v: Vec<String> = vector.iter().map(|x| x.to_string()).collect();
                st.serialize_field("vector", &v)?;
            }
            Representative::Real(_) => {
                st.serialize_field("level", &Option::<usize>::None)?;
                st.serialize_field("vector", &Option::<Vec<String>>::None)?;
            }
        }
        st.serialize_field("value", &self.value.as_ref().map(|v| v.to_string()))?;
        st.end()
    }
}

pub fn k0_class_big(sys: &Arc<OdometerSystem>, level: usize, f: Vec<BigInt>) -> K0Class {
    assert_eq!(f.len() as u64, sys.m(level), "vector length does not match level {level}");
    let sum: BigInt = f.iter().sum();
    let value = BigRational::new(sum, sys.m_big(level));
    K0Class {
        group: K0Group::Odometer(sys.clone()),
        rep: Representative::Vector { level, vector: f },
        value: Some(SymbolicReal::from_rational(value)),
    }
}

/// Class of a level-`n` integer function; value `(Σf)/m_n`.
pub fn k0_class(sys: &Arc<OdometerSystem>, level: usize, f: &[i64]) -> K0Class {
    k0_class_big(sys, level, f.iter().map(|&x| BigInt::from(x)).collect())
}

/// The value `(Σf)/m_n` alone, without building a class.
pub fn k0_value(sys: &OdometerSystem, level: usize, f: &[i64]) -> Rational {
    let sum: i64 = f.iter().sum();
    BigRational::new(BigInt::from(sum), sys.m_big(level))
}

pub fn bratteli_class(d: &Arc<BratteliDiagram>, level: usize, v: Vec<BigInt>) -> K0Class {
    assert_eq!(v.len(), d.vertices(level));
    K0Class {
        group: K0Group::Bratteli(d.clone()),
        rep: Representative::Vector { level, vector: v },
        value: None,
    }
}

pub fn real_class(g: &RealGroup, x: SymbolicReal) -> Result<K0Class> {
    if !g.contains(&x)? {
        return Err(Error::Invalid(format!("{x} is not in {g}")));
    }
    Ok(K0Class {
        group: K0Group::Real(g.clone()),
        rep: Representative::Real(x.clone()),
        value: Some(x),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Comparison {
    pub equal: bool,
    pub a_positive: bool,
    pub a_le_b: bool,
}

fn tri(t: Tri, what: &str) -> Result<bool> {
    match t {
        Tri::Yes => Ok(true),
        Tri::No => Ok(false),
        Tri::Unknown => Err(Error::Budget(format!("{what} undecided within {DEFAULT_BRATTELI_BOUND} levels"))),
    }
}

/// Equality and order in a simple dimension group. Zero counts as positive.
pub fn k0_compare(a: &K0Class, b: &K0Class) -> Result<Comparison> {
    if !a.group.same(&b.group) {
        return Err(Error::MismatchedSystems);
    }
    if let K0Group::Bratteli(d) = &a.group {
        let (Representative::Vector { level: la, vector: va }, Representative::Vector { level: lb, vector: vb }) =
            (&a.rep, &b.rep)
        else {
            return Err(Error::MismatchedSystems);
        };
        let top = (*la).max(*lb);
        let diff: Vec<BigInt> = d.push(vb, *lb, top).iter().zip(d.push(va, *la, top)).map(|(y, x)| y - x).collect();
        return Ok(Comparison {
            equal: tri(d.equal((*la, va), (*lb, vb), DEFAULT_BRATTELI_BOUND), "equality")?,
            a_positive: tri(d.positive((*la, va), DEFAULT_BRATTELI_BOUND), "positivity")?,
            a_le_b: tri(d.positive((top, &diff), DEFAULT_BRATTELI_BOUND), "order")?,
        });
    }
    let (x, y) = (a.value.as_ref().expect("state value"), b.value.as_ref().expect("state value"));
    let diff = y.try_sub(x)?;
    let a_pos = x.sign(DEFAULT_REFINE_BUDGET)?;
    let d_pos = diff.sign(DEFAULT_REFINE_BUDGET)?;
    Ok(Comparison {
        equal: diff.is_zero(),
        a_positive: a_pos.is_ge(),
        a_le_b: d_pos.is_ge(),
    })
}

/// `μ(f)` for any representative `f` of the class.
pub fn state_eval(a: &K0Class, mu: &InvariantMeasure) -> Result<SymbolicReal> {
    match &a.group {
        K0Group::Odometer(sys) if **sys == *mu.system => {
            let Representative::Vector { level, vector } = &a.rep else {
                unreachable!("odometer classes carry vectors")
            };
            Ok(SymbolicReal::from_rational(mu.measure_big(*level, vector)))
        }
        K0Group::Real(_) => Ok(a.value.clone().expect("real classes carry values")),
        _ => Err(Error::MismatchedSystems),
    }
}

/// Class of a sign cocycle in `K⁰/2K⁰`.
#[derive(Debug, Clone, Serialize)]
pub struct Mod2Class {
    /// `(Σc)/m_n`, the class of `c` read in `K⁰`.
    #[serde(serialize_with = "ser_rational")]
    pub value: Rational,
    pub is_zero: bool,
    /// When zero, `χ` with `c = χ − χ∘α⁻¹ (mod 2)`.
    pub witness: Option<SignCocycle>,
}

pub(crate) fn ser_rational<S: serde::Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

/// `[c] = 0` in `K⁰/2K⁰` iff `(Σc/m_n)/2 ∈ ℤ[1/s]`. The witness lives at
/// the first level `N` where the period sum `S_N` is even:
/// `χ(r) = Σ_{i=1}^{r} c(i) mod 2`.
pub fn mod2_class(sys: &Arc<OdometerSystem>, c: &SignCocycle) -> Result<Mod2Class> {
    let n0 = c.level;
    let s0 = c.period_sum(sys, n0);
    let value = BigRational::new(BigInt::from(s0), sys.m_big(n0));
    let half = &value / BigRational::from_integer(BigInt::from(2));
    let is_zero = sys.supernatural().admits(&half);
    let witness = if is_zero {
        let mut level = n0;
        while c.period_sum(sys, level) % 2 == 1 {
            level += 1;
            sys.try_m(level)?;
        }
        let lifted = c.lift_to(sys, level);
        let mut chi = Vec::with_capacity(lifted.values.len());
        let mut acc = 0u8;
        chi.push(0);
        for r in 1..lifted.values.len() {
            acc ^= lifted.values[r];
            chi.push(acc);
        }
        Some(SignCocycle { level, values: chi })
    } else {
        None
    };
    Ok(Mod2Class { value, is_zero, witness })
}

/// `K⁰(X×ℤ₂, α×c) / K⁰(X, α)` for a minimal skew product.
#[derive(Debug, Clone)]
pub struct QuotientTorsion {
    pub skew: SkewOdometer,
    /// `t` with `K⁰(X×ℤ₂) ≅ ℤ[1/t]`.
    pub group: SupernaturalNumber,
    /// `s` with `K⁰(X) ≅ ℤ[1/s]`, embedded by `[f] ↦ [f∘π]`.
    pub subgroup: SupernaturalNumber,
    pub torsion_order: u64,
    /// `f₀(x, k) = 1` iff `c(α⁻¹x) = 1` and `k = 0`.
    pub f0: K0Class,
    pub doubled_in_subgroup: bool,
}

impl QuotientTorsion {
    pub fn f0_value(&self) -> Rational {
        self.f0.rational_value().expect("odometer class")
    }

    pub fn describe(&self) -> String {
        let order = self.torsion_order;
        format!("Z[1/{}] / Z[1/{}] = Z{order}", self.group, self.subgroup)
    }
}

pub fn quotient_torsion(sys: &Arc<OdometerSystem>, c: &SignCocycle) -> Result<QuotientTorsion> {
    let skew = match crate::cantor::skew_z2(sys, c)? {
        SkewProduct::Minimal(sk) => sk,
        SkewProduct::Split(_) => {
            return Err(Error::Precondition(
                "[c] = 0 in K0/2K0: the skew product is not minimal".into(),
            ))
        }
    };
    let group = skew.system.supernatural().clone();
    let subgroup = sys.supernatural().clone();
    let mut torsion_order = 1u64;
    for (p, e) in group.primes() {
        let (Exponent::Finite(big), Exponent::Finite(small)) = (e, subgroup.exponent(p)) else {
            if e != subgroup.exponent(p) {
                return Err(Error::Invalid(format!("quotient at prime {p} is not finite")));
            }
            continue;
        };
        torsion_order *= p.pow(big - small);
    }
    debug_assert_eq!(two_exponent(sys).map(|e| e + 1), two_exponent(&skew.system));
    let level = skew.skew_level_over(c.level);
    let base_level = skew.base_level(level);
    let m = sys.m(base_level);
    let f0: Vec<BigInt> = (0..skew.system.m(level))
        .map(|j| {
            let (r, sheet) = skew.decode(level, j);
            let prev = (r + m - 1) % m;
            BigInt::from((sheet == 0 && c.at(prev) == 1) as i64)
        })
        .collect();
    let f0 = k0_class_big(&skew.system, level, f0);
    let doubled = f0.rational_value().expect("odometer class") * BigRational::from_integer(BigInt::from(2));
    let doubled_in_subgroup = subgroup.admits(&doubled);
    Ok(QuotientTorsion {
        skew,
        group,
        subgroup,
        torsion_order,
        f0,
        doubled_in_subgroup,
    })
}

/// Whether a class is zero; exact for odometers and real groups.
pub fn is_zero(a: &K0Class) -> Tri {
    match (&a.group, &a.value) {
        (K0Group::Bratteli(d), _) => match &a.rep {
            Representative::Vector { level, vector } => {
                let zero = vec![BigInt::zero(); vector.len()];
                d.equal((*level, vector), (*level, &zero), DEFAULT_BRATTELI_BOUND)
            }
            Representative::Real(_) => Tri::Unknown,
        },
        (_, Some(v)) => {
            if v.is_zero() {
                Tri::Yes
            } else {
                Tri::No
            }
        }
        _ => Tri::Unknown,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use proptest::prelude::*;

    fn s3() -> Arc<OdometerSystem> {
        Arc::new(OdometerSystem::uniform(3))
    }

    #[test]
    fn class_examples() {
        let sys = s3();
        assert_eq!(k0_class(&sys, 0, &[1]).rational_value(), Some(rat(1, 1)));
        let mut roof = vec![0; 9];
        roof[8] = 1;
        assert_eq!(k0_class(&sys, 2, &roof).rational_value(), Some(rat(1, 9)));
        let g = [3i64, -1, 4, 1, -5, 9, 2, -6, 5];
        let cob: Vec<i64> = (0..9).map(|r| g[r] - g[(r + 8) % 9]).collect();
        assert_eq!(k0_class(&sys, 2, &cob).rational_value(), Some(rat(0, 1)));
    }

    #[test]
    fn compare_examples() {
        let sys = s3();
        let unit = K0Group::Odometer(sys.clone()).unit();
        let zero = k0_class(&sys, 0, &[0]);
        assert!(k0_compare(&unit, &unit).unwrap().a_positive);
        let a = k0_class(&sys, 2, &[1, 0, 0, 0, 0, 0, 0, 0, 0]);
        let b = k0_class(&sys, 1, &[0, 1, 0]);
        let cmp = k0_compare(&a, &b).unwrap();
        assert!(cmp.a_le_b && !cmp.equal);
        assert!(k0_compare(&zero, &unit).unwrap().a_positive);
        let other = Arc::new(OdometerSystem::uniform(2));
        assert_eq!(k0_compare(&a, &k0_class(&other, 0, &[1])).unwrap_err(), Error::MismatchedSystems);
    }

    #[test]
    fn state_examples() {
        let sys = s3();
        let mu = InvariantMeasure::of(&sys);
        assert_eq!(state_eval(&K0Group::Odometer(sys.clone()).unit(), &mu).unwrap(), SymbolicReal::one());
        assert_eq!(
            state_eval(&k0_class(&sys, 1, &[0, 0, 1]), &mu).unwrap(),
            SymbolicReal::from_rational(rat(1, 3))
        );
    }

    #[test]
    fn mod2_examples() {
        let sys = s3();
        let c = mod2_class(&sys, &SignCocycle::constant(1)).unwrap();
        assert!(!c.is_zero && c.witness.is_none());
        let z = mod2_class(&sys, &SignCocycle::constant(0)).unwrap();
        assert!(z.is_zero);
        assert!(z.witness.unwrap().is_zero());
        let two = Arc::new(OdometerSystem::uniform(2));
        let w = mod2_class(&two, &SignCocycle::constant(1)).unwrap();
        assert!(w.is_zero);
        let chi = w.witness.unwrap();
        assert_eq!(chi.level, 1);
        check_witness(&two, &SignCocycle::constant(1), &chi);
    }

    fn check_witness(sys: &OdometerSystem, c: &SignCocycle, chi: &SignCocycle) {
        let m = sys.m(chi.level);
        for r in 0..m {
            let prev = (r + m - 1) % m;
            assert_eq!(c.at(r), (chi.at(r) + chi.at(prev)) % 2, "residue {r}");
        }
    }

    // Brute force over χ at levels ≤ 3 on the 2^∞ odometer.
    fn brute_force_zero(sys: &OdometerSystem, c: &SignCocycle) -> bool {
        (c.level..=3).any(|level| {
            let m = sys.m(level) as u32;
            (0u32..(1 << m)).any(|bits| {
                let chi = |r: u64| ((bits >> r) & 1) as u8;
                (0..m as u64).all(|r| c.at(r) == (chi(r) + chi((r + m as u64 - 1) % m as u64)) % 2)
            })
        })
    }

    #[test]
    fn torsion_examples() {
        let sys = s3();
        let q = quotient_torsion(&sys, &SignCocycle::constant(1)).unwrap();
        assert_eq!(q.torsion_order, 2);
        assert_eq!(q.f0_value(), rat(1, 2));
        assert!(q.doubled_in_subgroup);
        assert!(!q.subgroup.admits(&q.f0_value()));
        let five = Arc::new(OdometerSystem::uniform(5));
        assert_eq!(quotient_torsion(&five, &SignCocycle::constant(1)).unwrap().torsion_order, 2);
        assert!(quotient_torsion(&sys, &SignCocycle::constant(0)).is_err());
    }

    #[test]
    fn real_group_classes() {
        let t = crate::exact::GeneratorTable::new();
        let th = t.golden("theta").unwrap();
        let g = RealGroup::new("3^inf".parse().unwrap(), vec![th.clone()]).unwrap();
        let a = real_class(&g, th.add_rational(&rat(-1, 3))).unwrap();
        let unit = K0Group::Real(g.clone()).unit();
        let cmp = k0_compare(&a, &unit).unwrap();
        assert!(cmp.a_positive && cmp.a_le_b);
        assert!(real_class(&g, th.scale(&rat(1, 2))).is_err());
    }

    proptest! {
        #[test]
        fn class_is_shift_invariant(f in proptest::collection::vec(-5i64..6, 9), k in 0usize..9) {
            let sys = s3();
            let shifted: Vec<i64> = (0..9).map(|r| f[(r + 9 - k) % 9]).collect();
            prop_assert_eq!(k0_class(&sys, 2, &f).rational_value(), k0_class(&sys, 2, &shifted).rational_value());
        }

        #[test]
        fn class_is_additive_and_relevels(f in proptest::collection::vec(-5i64..6, 3), g in proptest::collection::vec(-5i64..6, 9)) {
            let sys = s3();
            let a = k0_class(&sys, 1, &f);
            let b = k0_class(&sys, 2, &g);
            let s = a.add(&b).unwrap();
            prop_assert_eq!(s.rational_value().unwrap(), a.rational_value().unwrap() + b.rational_value().unwrap());
            let deep = k0_class(&sys, 3, &sys.lift_vector(&f, 1, 3));
            prop_assert_eq!(deep.rational_value(), a.rational_value());
            let mu = InvariantMeasure::of(&sys);
            prop_assert_eq!(state_eval(&a, &mu).unwrap(), a.value().unwrap().clone());
        }

        #[test]
        fn positivity_respects_addition(f in proptest::collection::vec(0i64..4, 9), g in proptest::collection::vec(-3i64..4, 9), h in proptest::collection::vec(-3i64..4, 9)) {
            let sys = s3();
            let a = k0_class(&sys, 2, &f);
            prop_assert!(k0_compare(&a, &a).unwrap().a_positive);
            let b = k0_class(&sys, 2, &g);
            let c = k0_class(&sys, 2, &h);
            if k0_compare(&b, &b).unwrap().a_positive && k0_compare(&c, &c).unwrap().a_positive {
                prop_assert!(k0_compare(&b.add(&c).unwrap(), &a).unwrap().a_positive);
            }
            // translation invariance of ≤
            let ab = k0_compare(&a, &b).unwrap().a_le_b;
            prop_assert_eq!(ab, k0_compare(&a.add(&c).unwrap(), &b.add(&c).unwrap()).unwrap().a_le_b);
        }

        #[test]
        fn mod2_matches_brute_force(bits in proptest::collection::vec(0u8..2, 2), level in 0usize..2) {
            let two = Arc::new(OdometerSystem::uniform(2));
            let m = two.m(level) as usize;
            let c = SignCocycle::new(&two, level, bits[..m].to_vec()).unwrap();
            let class = mod2_class(&two, &c).unwrap();
            prop_assert_eq!(class.is_zero, brute_force_zero(&two, &c));
            if let Some(chi) = &class.witness {
                check_witness(&two, &c, chi);
            }
        }

        #[test]
        fn mod2_witnesses_on_mixed_bases(bits in proptest::collection::vec(0u8..2, 6), pick in 0usize..3) {
            let sys = Arc::new([OdometerSystem::uniform(3), OdometerSystem::new(vec![3, 6, 18], None).unwrap(), OdometerSystem::uniform(6)][pick].clone());
            let level = 1;
            let m = sys.m(level) as usize;
            let c = SignCocycle::new(&sys, level, bits[..m].to_vec()).unwrap();
            let class = mod2_class(&sys, &c).unwrap();
            let minimal = crate::cantor::skew_z2(&sys, &c).unwrap().is_minimal();
            prop_assert_eq!(minimal, !class.is_zero);
            if let Some(chi) = &class.witness {
                check_witness(&sys, &c, chi);
            }
        }
    }
}
