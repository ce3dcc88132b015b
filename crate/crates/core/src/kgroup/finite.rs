//! Finite-level cokernels used to cross-check the odometer closed forms.

use num_bigint::BigInt;

use super::smith::{Cokernel, CokernelClass, Matrix};
use crate::cantor::{OdometerSystem, SkewOdometer};

fn int(x: i64) -> BigInt {
    BigInt::from(x)
}

/// `I − P` on `ℤ^m` with `P` the pullback by the inverse cyclic shift,
/// so `(I − P) g = g − g∘α⁻¹`.
pub fn shift_coboundary(m: usize) -> Matrix {
    (0..m)
        .map(|i| (0..m).map(|j| int((i == j) as i64 - (j == (i + m - 1) % m) as i64)).collect())
        .collect()
}

/// `ℤ^{m_n} / im(I − P)`, the level-`n` approximation of `K⁰`.
pub fn level_k0(sys: &OdometerSystem, level: usize) -> Cokernel {
    Cokernel::of(&shift_coboundary(sys.m(level) as usize))
}

/// `ℤ^{m_n} / (im(I − P) + 2ℤ^{m_n})`.
pub fn level_k0_mod2(sys: &OdometerSystem, level: usize) -> Cokernel {
    let m = sys.m(level) as usize;
    let mut a = shift_coboundary(m);
    for (i, row) in a.iter_mut().enumerate() {
        row.extend((0..m).map(|j| int(2 * (i == j) as i64)));
    }
    Cokernel::of(&a)
}

/// Level-`i` approximation of `K⁰(X×ℤ₂)/K⁰(X)`: skew functions modulo
/// skew coboundaries and pullbacks of base functions.
pub fn level_quotient(skew: &SkewOdometer, level: usize) -> Cokernel {
    let big = skew.system.m(level) as usize;
    let m = skew.base.m(skew.base_level(level)) as usize;
    let mut a = shift_coboundary(big);
    for (j, row) in a.iter_mut().enumerate() {
        row.extend((0..m).map(|r| int((j % m == r) as i64)));
    }
    Cokernel::of(&a)
}

pub fn class_of(c: &Cokernel, f: &[i64]) -> CokernelClass {
    let v: Vec<BigInt> = f.iter().map(|&x| int(x)).collect();
    c.class(&v)
}
