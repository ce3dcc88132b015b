use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use super::{ExactError, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Exponent {
    Finite(u32),
    Infinite,
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Exponent::Finite(a), Exponent::Finite(b)) => a.cmp(b),
            (Exponent::Finite(_), Exponent::Infinite) => Ordering::Less,
            (Exponent::Infinite, Exponent::Finite(_)) => Ordering::Greater,
            (Exponent::Infinite, Exponent::Infinite) => Ordering::Equal,
        }
    }
}

/// Formal product `Π p^{e_p}` with `e_p ∈ {0, 1, …, ∞}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct SupernaturalNumber {
    exps: BTreeMap<u64, Exponent>,
}

/// Trial-division factorization.
pub fn factor_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

fn is_prime(n: u64) -> bool {
    n >= 2 && factor_u64(n) == vec![(n, 1)]
}

impl SupernaturalNumber {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn from_u64(n: u64) -> Self {
        assert!(n >= 1, "supernatural numbers are built from positive integers");
        let mut s = Self::one();
        for (p, e) in factor_u64(n) {
            s.exps.insert(p, Exponent::Finite(e));
        }
        s
    }

    /// `p^∞`.
    pub fn prime_power_infinite(p: u64) -> Self {
        assert!(is_prime(p), "{p} is not prime");
        let mut s = Self::one();
        s.exps.insert(p, Exponent::Infinite);
        s
    }

    pub fn exponent(&self, p: u64) -> Exponent {
        self.exps.get(&p).copied().unwrap_or(Exponent::Finite(0))
    }

    pub fn primes(&self) -> impl Iterator<Item = (u64, Exponent)> + '_ {
        self.exps.iter().map(|(p, e)| (*p, *e))
    }

    pub fn is_finite(&self) -> bool {
        self.exps.values().all(|e| *e != Exponent::Infinite)
    }

    /// `s | t` iff `e_p(s) ≤ e_p(t)` for every prime.
    pub fn divides(&self, other: &Self) -> bool {
        self.exps.iter().all(|(p, e)| *e <= other.exponent(*p))
    }

    pub fn lcm(&self, other: &Self) -> Self {
        let mut exps = self.exps.clone();
        for (p, e) in &other.exps {
            let cur = exps.entry(*p).or_insert(Exponent::Finite(0));
            if *e > *cur {
                *cur = *e;
            }
        }
        SupernaturalNumber { exps }
    }

    /// Product of two supernatural numbers (exponents add).
    pub fn mul(&self, other: &Self) -> Self {
        let mut exps = self.exps.clone();
        for (p, e) in &other.exps {
            let cur = exps.entry(*p).or_insert(Exponent::Finite(0));
            *cur = match (*cur, *e) {
                (Exponent::Finite(a), Exponent::Finite(b)) => Exponent::Finite(a + b),
                _ => Exponent::Infinite,
            };
        }
        SupernaturalNumber { exps }
    }

    /// Whether the integer `d ≥ 1` divides this supernatural number.
    pub fn admits_denominator(&self, d: &BigInt) -> bool {
        assert!(d > &BigInt::zero());
        let mut rest = d.clone();
        for (p, e) in &self.exps {
            let bp = BigInt::from(*p);
            let mut used = 0u32;
            loop {
                let (q, r) = rest.div_rem(&bp);
                if !r.is_zero() {
                    break;
                }
                if let Exponent::Finite(cap) = e {
                    if used == *cap {
                        break;
                    }
                }
                used += 1;
                rest = q;
            }
        }
        rest.is_one()
    }

    /// `q ∈ ℤ[1/s]`, i.e. the reduced denominator of `q` divides `s`.
    pub fn admits(&self, q: &Rational) -> bool {
        self.admits_denominator(q.denom())
    }
}

impl fmt::Display for SupernaturalNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exps.is_empty() {
            return write!(f, "1");
        }
        let mut first = true;
        for (p, e) in &self.exps {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            match e {
                Exponent::Finite(1) => write!(f, "{p}")?,
                Exponent::Finite(k) => write!(f, "{p}^{k}")?,
                Exponent::Infinite => write!(f, "{p}^inf")?,
            }
        }
        Ok(())
    }
}

impl Serialize for SupernaturalNumber {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl FromStr for SupernaturalNumber {
    type Err = ExactError;

    /// Parses products such as `2*3^inf`, `12`, `5^2*7` or `1`.
    fn from_str(s: &str) -> Result<Self, ExactError> {
        let err = |pos: usize, msg: &str| ExactError::Parse {
            pos,
            msg: msg.to_string(),
        };
        let mut out = SupernaturalNumber::one();
        let mut offset = 0usize;
        for part in s.split('*') {
            let trimmed = part.trim();
            let pos = offset + part.len() - part.trim_start().len();
            offset += part.len() + 1;
            if trimmed.is_empty() {
                return Err(err(pos, "empty factor"));
            }
            let (base, exp) = match trimmed.split_once('^') {
                Some((b, e)) => (b.trim(), Some(e.trim())),
                None => (trimmed, None),
            };
            let base: u64 = base.parse().map_err(|_| err(pos, "factor base is not a positive integer"))?;
            if base == 0 {
                return Err(err(pos, "zero factor"));
            }
            let factor = match exp {
                None => SupernaturalNumber::from_u64(base),
                Some(e) if e == "inf" || e == "∞" => {
                    if !is_prime(base) {
                        return Err(err(pos, "infinite exponent needs a prime base"));
                    }
                    SupernaturalNumber::prime_power_infinite(base)
                }
                Some(e) => {
                    let k: u32 = e.parse().map_err(|_| err(pos, "bad exponent"))?;
                    if k > 64 {
                        return Err(err(pos, "finite exponent too large"));
                    }
                    let mut acc = SupernaturalNumber::one();
                    let b = SupernaturalNumber::from_u64(base);
                    for _ in 0..k {
                        acc = acc.mul(&b);
                    }
                    acc
                }
            };
            out = out.mul(&factor);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SupernaturalRelations {
    pub s_divides_t: bool,
    pub t_divides_s: bool,
    pub equal: bool,
    /// Whether `q ∈ ℤ[1/s]`.
    pub admits: bool,
}

pub fn supernatural_ops(s: &SupernaturalNumber, t: &SupernaturalNumber, q: &Rational) -> SupernaturalRelations {
    SupernaturalRelations {
        s_divides_t: s.divides(t),
        t_divides_s: t.divides(s),
        equal: s == t,
        admits: s.admits(q),
    }
}
