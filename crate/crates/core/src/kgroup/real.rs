//! Subgroups of ℝ of the form `ℤ[1/s] + ℤg₁ + … + ℤg_k`.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use super::smith::{solve_integer, Matrix};
use crate::exact::{GenId, GeneratorTable, Rational, SupernaturalNumber, SymbolicReal};
use crate::{Error, Result};

/// Finitely generated extension of `ℤ[1/s]` inside ℝ, ordered from ℝ.
/// Always contains the unit 1.
#[derive(Debug, Clone)]
pub struct RealGroup {
    pub rational: SupernaturalNumber,
    pub generators: Vec<SymbolicReal>,
}

fn common_table<'a>(vals: impl IntoIterator<Item = &'a SymbolicReal>) -> Result<Option<Arc<GeneratorTable>>> {
    let mut table: Option<Arc<GeneratorTable>> = None;
    for v in vals {
        if let Some(t) = v.table() {
            match &table {
                Some(cur) if !Arc::ptr_eq(cur, t) => return Err(Error::MismatchedSystems),
                Some(_) => {}
                None => table = Some(t.clone()),
            }
        }
    }
    Ok(table)
}

fn rational_gcd(a: &Rational, b: &Rational) -> Rational {
    if a.is_zero() {
        return b.abs_ref();
    }
    if b.is_zero() {
        return a.abs_ref();
    }
    let l = a.denom().lcm(b.denom());
    let na = a.numer() * (&l / a.denom());
    let nb = b.numer() * (&l / b.denom());
    BigRational::new(na.gcd(&nb), l)
}

trait AbsRef {
    fn abs_ref(&self) -> Self;
}

impl AbsRef for Rational {
    fn abs_ref(&self) -> Self {
        if self < &Rational::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }
}

fn supernatural_of_denominator(d: &BigInt) -> Result<SupernaturalNumber> {
    let d = d
        .to_u64()
        .ok_or_else(|| Error::Invalid(format!("denominator {d} exceeds the supported range")))?;
    Ok(SupernaturalNumber::from_u64(d))
}

impl RealGroup {
    pub fn new(rational: SupernaturalNumber, generators: Vec<SymbolicReal>) -> Result<Self> {
        common_table(&generators)?;
        Ok(RealGroup { rational, generators })
    }

    /// `ℤ + ℤg₁ + … + ℤg_k`.
    pub fn integers_plus(generators: Vec<SymbolicReal>) -> Result<Self> {
        Self::new(SupernaturalNumber::one(), generators)
    }

    pub fn table(&self) -> Option<Arc<GeneratorTable>> {
        common_table(&self.generators).expect("checked at construction")
    }

    fn ids(&self, extra: Option<&SymbolicReal>) -> Vec<GenId> {
        let mut ids = BTreeSet::new();
        for g in self.generators.iter().chain(extra) {
            for (id, _) in g.terms() {
                ids.insert(id);
            }
        }
        ids.into_iter().collect()
    }

    /// Integer matrix of irrational coordinates (one row per generator id,
    /// scaled to clear denominators) and the matching right-hand side.
    fn system(&self, x: &SymbolicReal) -> (Matrix, Vec<BigInt>) {
        let ids = self.ids(Some(x));
        let mut a = Vec::with_capacity(ids.len());
        let mut rhs = Vec::with_capacity(ids.len());
        for id in ids {
            let row: Vec<Rational> = self.generators.iter().map(|g| g.coefficient(id)).collect();
            let xr = x.coefficient(id);
            let l = row.iter().chain(std::iter::once(&xr)).fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
            let scale = BigRational::from_integer(l);
            a.push(row.iter().map(|q| (q * &scale).to_integer()).collect());
            rhs.push((&xr * &scale).to_integer());
        }
        (a, rhs)
    }

    fn solve(&self, x: &SymbolicReal) -> Option<(Vec<BigInt>, Vec<Vec<BigInt>>)> {
        let (a, rhs) = self.system(x);
        let k = self.generators.len();
        if a.is_empty() {
            let kernel = (0..k)
                .map(|j| (0..k).map(|i| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
                .collect();
            return Some((vec![BigInt::zero(); k], kernel));
        }
        if k == 0 {
            return rhs.iter().all(Zero::is_zero).then(|| (Vec::new(), Vec::new()));
        }
        solve_integer(&a, &rhs)
    }

    fn rational_combo(&self, n: &[BigInt]) -> Rational {
        self.generators
            .iter()
            .zip(n)
            .map(|(g, c)| g.rational_part() * BigRational::from_integer(c.clone()))
            .sum()
    }

    /// The supernatural `t` with `G ∩ ℚ = ℤ[1/t]`.
    pub fn rational_part(&self) -> Result<SupernaturalNumber> {
        let (_, kernel) = self.solve(&SymbolicReal::zero()).expect("zero is always solvable");
        let d = kernel
            .iter()
            .map(|k| self.rational_combo(k))
            .fold(Rational::zero(), |acc, q| rational_gcd(&acc, &q));
        if d.is_zero() {
            return Ok(self.rational.clone());
        }
        Ok(self.rational.lcm(&supernatural_of_denominator(d.denom())?))
    }

    pub fn contains(&self, x: &SymbolicReal) -> Result<bool> {
        common_table(self.generators.iter().chain(std::iter::once(x)))?;
        let Some((n0, _)) = self.solve(x) else {
            return Ok(false);
        };
        let residual = x.rational_part() - self.rational_combo(&n0);
        Ok(self.rational_part()?.admits(&residual))
    }

    pub fn subset_of(&self, other: &RealGroup) -> Result<bool> {
        if !self.rational_part()?.divides(&other.rational_part()?) {
            return Ok(false);
        }
        for g in &self.generators {
            if !other.contains(g)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn set_eq(&self, other: &RealGroup) -> Result<bool> {
        Ok(self.subset_of(other)? && other.subset_of(self)?)
    }

    /// The set of values as text, e.g. `Z[1/3^inf] + Z*theta`.
    pub fn describe(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for RealGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rational == SupernaturalNumber::one() {
            write!(f, "Z")?;
        } else {
            write!(f, "Z[1/{}]", self.rational)?;
        }
        for g in &self.generators {
            write!(f, " + Z*({g})")?;
        }
        Ok(())
    }
}

impl Serialize for RealGroup {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IsoDecision {
    pub exists: bool,
    pub reason: String,
}

/// Decides whether a unital order isomorphism `G → H` carrying `subG` onto
/// `subH` exists.
///
/// For subgroups of ℝ that contain 1 and carry the order of ℝ, a unital
/// order isomorphism is the identity: a positive homomorphism from a dense
/// subgroup is multiplication by a positive scalar, and fixing 1 forces the
/// scalar to be 1 (a cyclic group `(1/a)ℤ` has only the identity as well).
/// The question therefore reduces to equality of subsets of ℝ.
pub fn order_iso_decision(g: &RealGroup, h: &RealGroup, sub_g: &RealGroup, sub_h: &RealGroup) -> Result<IsoDecision> {
    common_table(
        g.generators
            .iter()
            .chain(&h.generators)
            .chain(&sub_g.generators)
            .chain(&sub_h.generators),
    )?;
    if !g.set_eq(h)? {
        return Ok(IsoDecision {
            exists: false,
            reason: format!("groups differ as subsets of R: {g} vs {h}"),
        });
    }
    if !sub_g.subset_of(g)? || !sub_h.subset_of(h)? {
        return Err(Error::Invalid("distinguished subgroup is not contained in its group".into()));
    }
    if !sub_g.set_eq(sub_h)? {
        return Ok(IsoDecision {
            exists: false,
            reason: format!("the only unital order isomorphism is the identity, and it does not carry {sub_g} onto {sub_h}"),
        });
    }
    Ok(IsoDecision {
        exists: true,
        reason: "groups and distinguished subgroups coincide; the identity works".into(),
    })
}
