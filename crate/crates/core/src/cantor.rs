//! Odometers as tower data.
//!
//! A point is a cylinder: a level `n` and a residue in `ℤ_{m_n}`. The
//! distinguished point `x₀` has residue 0 at every level and the
//! transformation adds one to the residue.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use crate::exact::{CircleValue, Exponent, Rational, SupernaturalNumber, SymbolicReal};
use crate::{Error, Result};

/// Odometer with multiplicities `1 = m₀ | m₁ | m₂ | …`. The listed prefix
/// is extended past its end by multiplying with a fixed factor per level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OdometerSystem {
    mults: Vec<u64>,
    growth: u64,
    supernatural: SupernaturalNumber,
}

/// Parses an extension rule such as `x3`, `×3` or `*3`.
pub fn parse_growth(rule: &str) -> Result<u64> {
    let r = rule.trim();
    let digits = r
        .strip_prefix('x')
        .or_else(|| r.strip_prefix('×'))
        .or_else(|| r.strip_prefix('*'))
        .ok_or_else(|| Error::Growth(rule.to_string()))?;
    let k: u64 = digits.trim().parse().map_err(|_| Error::Growth(rule.to_string()))?;
    if k < 2 {
        return Err(Error::Growth(rule.to_string()));
    }
    Ok(k)
}

impl OdometerSystem {
    /// Builds the odometer from `m₁, m₂, …`. Without an explicit growth
    /// factor the last ratio `m_k / m_{k−1}` is repeated.
    pub fn new(mults: Vec<u64>, growth: Option<u64>) -> Result<Self> {
        if mults.is_empty() {
            return Err(Error::Invalid("odometer needs at least one multiplicity".into()));
        }
        let mut prev = 1u64;
        for (i, &m) in mults.iter().enumerate() {
            let level = i + 1;
            if m <= prev {
                return Err(Error::NotIncreasing { level });
            }
            if m % prev != 0 {
                return Err(Error::Divisibility { level, prev, next: m });
            }
            prev = m;
        }
        let last_ratio = if mults.len() == 1 {
            mults[0]
        } else {
            mults[mults.len() - 1] / mults[mults.len() - 2]
        };
        let growth = growth.unwrap_or(last_ratio);
        if growth < 2 {
            return Err(Error::Growth(format!("x{growth}")));
        }
        let mut supernatural = SupernaturalNumber::from_u64(*mults.last().expect("non-empty"));
        for (p, _) in SupernaturalNumber::from_u64(growth).primes() {
            supernatural = supernatural.lcm(&SupernaturalNumber::prime_power_infinite(p));
        }
        Ok(OdometerSystem {
            mults,
            growth,
            supernatural,
        })
    }

    /// Odometer with `m_n = kⁿ`.
    pub fn uniform(k: u64) -> Self {
        OdometerSystem::new(vec![k], Some(k)).expect("k ≥ 2")
    }

    pub fn growth(&self) -> u64 {
        self.growth
    }

    pub fn prefix(&self) -> &[u64] {
        &self.mults
    }

    pub fn supernatural(&self) -> &SupernaturalNumber {
        &self.supernatural
    }

    pub fn try_m(&self, level: usize) -> Result<u64> {
        if level == 0 {
            return Ok(1);
        }
        if level <= self.mults.len() {
            return Ok(self.mults[level - 1]);
        }
        let mut m = *self.mults.last().expect("non-empty");
        for _ in self.mults.len()..level {
            m = m.checked_mul(self.growth).ok_or(Error::Overflow(level))?;
        }
        Ok(m)
    }

    /// `m_n`. Panics on `u64` overflow; use [`try_m`](Self::try_m) for
    /// user-controlled levels.
    pub fn m(&self, level: usize) -> u64 {
        self.try_m(level).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn m_big(&self, level: usize) -> BigInt {
        BigInt::from(self.m(level))
    }

    /// Mass of a level-`n` cylinder under the unique invariant measure.
    pub fn cylinder_mass(&self, level: usize) -> Rational {
        BigRational::new(BigInt::from(1), self.m_big(level))
    }

    /// Repeats a level-`from` vector to level `to ≥ from`.
    pub fn lift_vector<T: Clone>(&self, v: &[T], from: usize, to: usize) -> Vec<T> {
        assert!(to >= from, "cannot lift to a shallower level");
        let mf = self.m(from) as usize;
        assert_eq!(v.len(), mf, "vector length does not match level {from}");
        let mt = self.m(to) as usize;
        (0..mt).map(|r| v[r % mf].clone()).collect()
    }

    /// Smallest level `n` with `m_n ≥ bound`.
    pub fn level_at_least(&self, bound: u64) -> usize {
        let mut n = 0;
        while self.m(n) < bound {
            n += 1;
        }
        n
    }

    /// Odometer of the first-return map to a level-`n` cylinder.
    pub fn induced(&self, level: usize) -> Result<OdometerSystem> {
        let base = self.try_m(level)?;
        let top = self.mults.len().max(level + 1);
        let mults = ((level + 1)..=top)
            .map(|j| self.try_m(j).map(|m| m / base))
            .collect::<Result<Vec<_>>>()?;
        OdometerSystem::new(mults, Some(self.growth))
    }
}

impl fmt::Display for OdometerSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.mults.iter().map(|m| m.to_string()).collect();
        write!(f, "odometer[{}, … x{}] ({})", parts.join(", "), self.growth, self.supernatural)
    }
}

pub fn make_odometer(mults: &[u64], extend: Option<&str>) -> Result<Arc<OdometerSystem>> {
    let growth = extend.map(parse_growth).transpose()?;
    Ok(Arc::new(OdometerSystem::new(mults.to_vec(), growth)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct CantorPoint {
    pub level: usize,
    pub residue: u64,
}

impl CantorPoint {
    pub fn x0(level: usize) -> Self {
        CantorPoint { level, residue: 0 }
    }

    /// Refines the cylinder to a deeper level, keeping the residue.
    pub fn deepen(self, level: usize) -> Self {
        assert!(level >= self.level, "deepen to a shallower level");
        CantorPoint {
            level,
            residue: self.residue,
        }
    }

    /// Residue at a shallower level.
    pub fn project(self, sys: &OdometerSystem, level: usize) -> u64 {
        assert!(level <= self.level);
        self.residue % sys.m(level)
    }
}

pub fn apply_transform(sys: &OdometerSystem, p: CantorPoint, k: i64, level: usize) -> CantorPoint {
    let p = p.deepen(level);
    let m = sys.m(level) as i128;
    let r = (p.residue as i128 + k as i128).rem_euclid(m);
    CantorPoint {
        level,
        residue: r as u64,
    }
}

/// One Kakutani–Rohlin tower: floors are the residues `base, …, base + height − 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Tower {
    pub base: u64,
    pub height: u64,
}

impl Tower {
    pub fn roof(&self) -> u64 {
        self.base + self.height - 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TowerPartition {
    pub level: usize,
    pub towers: Vec<Tower>,
}

impl TowerPartition {
    pub fn roof_residues(&self) -> Vec<u64> {
        self.towers.iter().map(Tower::roof).collect()
    }

    /// `(tower index, floor index)` of a residue.
    pub fn floor_of(&self, residue: u64) -> Option<(usize, u64)> {
        self.towers
            .iter()
            .enumerate()
            .find(|(_, t)| residue >= t.base && residue < t.base + t.height)
            .map(|(i, t)| (i, residue - t.base))
    }
}

pub fn towers(sys: &OdometerSystem, level: usize) -> TowerPartition {
    TowerPartition {
        level,
        towers: vec![Tower {
            base: 0,
            height: sys.m(level),
        }],
    }
}

/// Locally constant `c: X → ℤ₂` at a fixed level.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct SignCocycle {
    pub level: usize,
    pub values: Vec<u8>,
}

impl SignCocycle {
    pub fn new(sys: &OdometerSystem, level: usize, values: Vec<u8>) -> Result<Self> {
        let m = sys.try_m(level)? as usize;
        if values.len() != m {
            return Err(Error::Invalid(format!(
                "sign cocycle at level {level} needs {m} entries, got {}",
                values.len()
            )));
        }
        if values.iter().any(|&v| v > 1) {
            return Err(Error::Invalid("sign cocycle entries must be 0 or 1".into()));
        }
        Ok(SignCocycle { level, values })
    }

    pub fn constant(bit: u8) -> Self {
        assert!(bit <= 1);
        SignCocycle {
            level: 0,
            values: vec![bit],
        }
    }

    /// Value on the cylinder with the given residue at any level ≥ `self.level`.
    pub fn at(&self, residue: u64) -> u8 {
        self.values[(residue % self.values.len() as u64) as usize]
    }

    pub fn lift_to(&self, sys: &OdometerSystem, level: usize) -> SignCocycle {
        SignCocycle {
            level,
            values: sys.lift_vector(&self.values, self.level, level),
        }
    }

    /// Number of ones over a full level-`level` period.
    pub fn period_sum(&self, sys: &OdometerSystem, level: usize) -> u64 {
        let ones = self.values.iter().filter(|&&v| v == 1).count() as u64;
        ones * (sys.m(level) / sys.m(self.level))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CylinderSet {
    pub level: usize,
    pub residues: Vec<u64>,
}

/// The unique invariant probability measure of an odometer.
#[derive(Debug, Clone)]
pub struct InvariantMeasure {
    pub system: Arc<OdometerSystem>,
}

impl InvariantMeasure {
    pub fn of(system: &Arc<OdometerSystem>) -> Self {
        InvariantMeasure {
            system: system.clone(),
        }
    }

    pub fn uniquely_ergodic(&self) -> bool {
        true
    }

    pub fn cylinder_mass(&self, level: usize) -> Rational {
        self.system.cylinder_mass(level)
    }

    /// `(1/m_n) Σ_k f(k)` for an integer function at level `n`.
    pub fn measure_int(&self, level: usize, f: &[i64]) -> Rational {
        let s: i64 = f.iter().sum();
        BigRational::new(BigInt::from(s), self.system.m_big(level))
    }

    pub fn measure_big(&self, level: usize, f: &[BigInt]) -> Rational {
        let s: BigInt = f.iter().sum();
        BigRational::new(s, self.system.m_big(level))
    }

    pub fn measure_real(&self, level: usize, f: &[SymbolicReal]) -> SymbolicReal {
        assert_eq!(f.len() as u64, self.system.m(level));
        let mut acc = SymbolicReal::zero();
        for v in f {
            acc = &acc + v;
        }
        acc.scale(&self.system.cylinder_mass(level))
    }
}

pub fn measure_of(mu: &InvariantMeasure, level: usize, f: &[SymbolicReal]) -> SymbolicReal {
    mu.measure_real(level, f)
}

/// First-return data for a cylinder.
#[derive(Debug, Clone)]
pub struct Induced {
    pub system: Arc<OdometerSystem>,
    pub return_time: u64,
    /// Constant value of the induced cocycle.
    pub cycle_sum: CircleValue,
}

/// Induces on a single level-`n` cylinder. The induced cocycle of a
/// cocycle locally constant at level ≤ n is the constant cycle sum
/// `Θ_n = Σ_{k ∈ ℤ_{m_n}} ξ(k)`.
pub fn induce(sys: &OdometerSystem, u: &CylinderSet, xi_level: usize, xi: &[CircleValue]) -> Result<Induced> {
    let n = u.level;
    let m = sys.try_m(n)?;
    if u.residues.len() != 1 || u.residues[0] >= m {
        return Err(Error::NotACylinder(format!("{:?} at level {n}", u.residues)));
    }
    if xi_level > n {
        return Err(Error::Precondition(format!(
            "cocycle lives at level {xi_level}, deeper than the cylinder level {n}"
        )));
    }
    Ok(Induced {
        system: Arc::new(sys.induced(n)?),
        return_time: m,
        cycle_sum: cycle_sum(sys, xi_level, xi, n),
    })
}

/// `Σ_{k ∈ ℤ_{m_n}} ξ(k)` for `ξ` at level `xi_level ≤ n`, as a real sum of
/// representatives.
pub fn cycle_sum_real(sys: &OdometerSystem, xi_level: usize, xi: &[SymbolicReal], n: usize) -> SymbolicReal {
    assert!(xi_level <= n);
    let mut acc = SymbolicReal::zero();
    for v in xi {
        acc = &acc + v;
    }
    acc.scale_int((sys.m(n) / sys.m(xi_level)) as i64)
}

pub fn cycle_sum(sys: &OdometerSystem, xi_level: usize, xi: &[CircleValue], n: usize) -> CircleValue {
    let reps: Vec<SymbolicReal> = xi.iter().map(|v| v.value().clone()).collect();
    CircleValue::new(cycle_sum_real(sys, xi_level, &reps, n))
}

/// Minimal ℤ₂ skew product, renormalized as an odometer: skew level
/// `i ≥ 1` sits over base level `n₀ + i − 1` and has `2·m_{n₀+i−1}`
/// cylinders, numbered along the orbit of `(x₀, 0)`.
#[derive(Debug, Clone)]
pub struct SkewOdometer {
    pub base: Arc<OdometerSystem>,
    pub cocycle: SignCocycle,
    pub system: Arc<OdometerSystem>,
}

impl SkewOdometer {
    pub fn base_level(&self, skew_level: usize) -> usize {
        assert!(skew_level >= 1, "skew level 0 has no base cylinder");
        self.cocycle.level + skew_level - 1
    }

    /// Smallest skew level whose base level is at least `base_level`.
    pub fn skew_level_over(&self, base_level: usize) -> usize {
        base_level.max(self.cocycle.level) - self.cocycle.level + 1
    }

    fn sheet_after(&self, steps: u64) -> u8 {
        let ones_per_cycle = self.cocycle.values.iter().filter(|&&v| v == 1).count() as u64;
        let period = self.cocycle.values.len() as u64;
        let full = (steps / period) * ones_per_cycle;
        let part = (0..steps % period).filter(|&r| self.cocycle.at(r) == 1).count() as u64;
        ((full + part) % 2) as u8
    }

    /// `(base residue, sheet)` of a skew residue.
    pub fn decode(&self, skew_level: usize, j: u64) -> (u64, u8) {
        let m = self.base.m(self.base_level(skew_level));
        (j % m, self.sheet_after(j))
    }

    pub fn encode(&self, skew_level: usize, base_residue: u64, sheet: u8) -> u64 {
        let m = self.base.m(self.base_level(skew_level));
        let r = base_residue % m;
        if self.sheet_after(r) == sheet % 2 {
            r
        } else {
            r + m
        }
    }
}

/// Non-minimal ℤ₂ skew product: two invariant copies of the base,
/// `{(x, k) : k = χ(α⁻¹x) + j}` for `j ∈ {0, 1}`, where `c = χ − χ∘α⁻¹`.
#[derive(Debug, Clone)]
pub struct SkewSplit {
    pub base: Arc<OdometerSystem>,
    pub cocycle: SignCocycle,
    pub chi: SignCocycle,
}

impl SkewSplit {
    /// Index `j` of the invariant copy containing `(x, sheet)`.
    pub fn component_of(&self, residue: u64, sheet: u8) -> u8 {
        let m = self.chi.values.len() as u64;
        let prev = (residue + m - 1) % m;
        (sheet + self.chi.at(prev)) % 2
    }
}

#[derive(Debug, Clone)]
pub enum SkewProduct {
    Minimal(SkewOdometer),
    Split(SkewSplit),
}

impl SkewProduct {
    pub fn is_minimal(&self) -> bool {
        matches!(self, SkewProduct::Minimal(_))
    }
}

/// `(X × ℤ₂, (x, k) ↦ (αx, k + c(x)))`.
pub fn skew_z2(sys: &Arc<OdometerSystem>, c: &SignCocycle) -> Result<SkewProduct> {
    let class = crate::kgroup::mod2_class(sys, c)?;
    match class.witness {
        Some(chi) => Ok(SkewProduct::Split(SkewSplit {
            base: sys.clone(),
            cocycle: c.clone(),
            chi,
        })),
        None => {
            let n0 = c.level;
            let top = sys.prefix().len().max(n0 + 1);
            let mults = (n0..=top).map(|l| sys.try_m(l).map(|m| 2 * m)).collect::<Result<Vec<_>>>()?;
            let system = Arc::new(OdometerSystem::new(mults, Some(sys.growth()))?);
            Ok(SkewProduct::Minimal(SkewOdometer {
                base: sys.clone(),
                cocycle: c.clone(),
                system,
            }))
        }
    }
}

/// 2-adic exponent of the supernatural number, `None` when infinite.
pub(crate) fn two_exponent(sys: &OdometerSystem) -> Option<u32> {
    match sys.supernatural().exponent(2) {
        Exponent::Finite(e) => Some(e),
        Exponent::Infinite => None,
    }
}
