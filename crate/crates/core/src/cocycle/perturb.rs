//! Perturbations and the Bott element. These are phrased with
//! `η − η∘α` rather than the coboundary convention `η − η∘α⁻¹`.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use serde::Serialize;

use super::{in_open_band, one_over, CircleCocycle, RealLift};
use crate::cantor::{OdometerSystem, SignCocycle};
use crate::exact::{rat, CircleValue, Rational, SymbolicReal};
use crate::kgroup::{k0_class_big, K0Class};
use crate::{Error, Result};

/// Band for the `ξ` context of the Bott element and `control`.
pub const BOTT_XI_BAND: (i64, i64, i64) = (7, 8, 15);
/// Band defining `H(α, ξ)`: values of `ξ + η − η∘α`.
pub const H_BAND: (i64, i64, i64) = (1, 9, 10);

fn band(b: (i64, i64, i64)) -> (Rational, Rational) {
    (rat(b.0, b.2), rat(b.1, b.2))
}

#[derive(Debug, Clone, Serialize)]
pub struct Perturbation {
    pub eta: CircleCocycle,
    pub level: usize,
    /// Largest distance to `ℤ` of the residual over all cylinders.
    pub max_residual: SymbolicReal,
    pub verified: bool,
}

fn check_eps(eps: &Rational) -> Result<()> {
    if !eps.is_positive() {
        return Err(Error::Precondition(format!("epsilon must be positive, got {eps}")));
    }
    Ok(())
}

/// Smallest level `N ≥ floor` with `m_N > 1/ε`.
fn fine_level(sys: &OdometerSystem, eps: &Rational, floor: usize) -> Result<usize> {
    let bound = one_over(eps).floor().to_integer() + BigInt::from(1);
    let bound = bound
        .to_u64()
        .ok_or_else(|| Error::Precondition(format!("epsilon {eps} is too small")))?;
    let mut n = floor;
    while sys.try_m(n)? < bound {
        n += 1;
    }
    Ok(n)
}

fn max_norm(values: impl Iterator<Item = CircleValue>) -> SymbolicReal {
    values.fold(SymbolicReal::zero(), |acc, v| acc.max(&v.norm()))
}

/// Level-`n` function `η` with `η(0) = 0` and
/// `η(k) = Σ_{i<k} x_i − (k/h)·κ`, `κ = fract(Σ x_i)`, so that
/// `ξ + η − η∘α ≡ κ/h` on every cylinder including the roof.
fn averaged_telescope(xi: &CircleCocycle, n: usize) -> CircleCocycle {
    let lifted = xi.lift_to(n);
    let h = lifted.values.len();
    let reps: Vec<&SymbolicReal> = lifted.values.iter().map(CircleValue::value).collect();
    let total = reps.iter().fold(SymbolicReal::zero(), |acc, x| &acc + *x);
    let kappa = total.fract();
    let mut eta = Vec::with_capacity(h);
    let mut partial = SymbolicReal::zero();
    for (k, x) in reps.iter().enumerate() {
        let correction = kappa.scale(&rat(k as i64, h as i64));
        eta.push(CircleValue::new(&partial - &correction));
        partial = &partial + *x;
    }
    CircleCocycle {
        system: xi.system.clone(),
        level: n,
        values: eta,
    }
}

/// `η` with `|ξ + η − η∘α| < ε` everywhere.
pub fn perturb(xi: &CircleCocycle, eps: &Rational) -> Result<Perturbation> {
    check_eps(eps)?;
    let n = fine_level(&xi.system, eps, xi.level)?;
    let eta = averaged_telescope(xi, n);
    let next = eta.shift_forward();
    let max_residual = max_norm((0..eta.m()).map(|k| &(xi.at(k) + eta.at(k)) - next.at(k)));
    let verified = max_residual.cmp_exact(&SymbolicReal::from_rational(eps.clone())).is_lt();
    Ok(Perturbation {
        eta,
        level: n,
        max_residual,
        verified,
    })
}

/// `η` with `|ξ + η − (−1)^c·η∘α| < ε` everywhere. Conjugating by the
/// sign products `P_k = Π_{i<k} (−1)^{c(i)}` along the single tower
/// reduces this to [`perturb`].
pub fn perturb_signed(xi: &CircleCocycle, c: &SignCocycle, eps: &Rational) -> Result<Perturbation> {
    check_eps(eps)?;
    let sys = &xi.system;
    let n = fine_level(sys, eps, xi.level.max(c.level))?;
    let lifted = xi.lift_to(n);
    let signs: Vec<i64> = (0..lifted.m())
        .scan(1i64, |p, k| {
            let out = *p;
            if c.at(k) == 1 {
                *p = -*p;
            }
            Some(out)
        })
        .collect();
    let twisted = CircleCocycle {
        system: sys.clone(),
        level: n,
        values: lifted.values.iter().zip(&signs).map(|(v, &s)| v.scale_int(s)).collect(),
    };
    let zeta = averaged_telescope(&twisted, n);
    let eta = CircleCocycle {
        system: sys.clone(),
        level: n,
        values: zeta.values.iter().zip(&signs).map(|(v, &s)| v.scale_int(s)).collect(),
    };
    let residuals = (0..eta.m()).map(|k| {
        let sign = if c.at(k) == 1 { -1 } else { 1 };
        &(xi.at(k) + eta.at(k)) - &eta.at(k + 1).scale_int(sign)
    });
    let max_residual = max_norm(residuals);
    let verified = max_residual.cmp_exact(&SymbolicReal::from_rational(eps.clone())).is_lt();
    Ok(Perturbation {
        eta,
        level: n,
        max_residual,
        verified,
    })
}

/// `B_α(η) = [f]` with `f` the nearest-integer rounding of `η̃ − η̃∘α`.
#[derive(Debug, Clone, Serialize)]
pub struct Bott {
    pub level: usize,
    #[serde(serialize_with = "ser_integers")]
    pub f: Vec<BigInt>,
    pub class: K0Class,
}

fn ser_integers<S: serde::Serializer>(v: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

/// Bott element of `η ∈ H(α, ξ)`. `xi` is a lift with values in
/// `(7/15, 8/15)`; the band check on `ξ + η − η∘α` rules out ties.
pub fn bott(eta: &CircleCocycle, eta_lift: Option<&RealLift>, xi: &RealLift) -> Result<Bott> {
    let sys = &eta.system;
    let (a, b) = band(BOTT_XI_BAND);
    xi.check_band(&a, &b, "xi")?;
    let level = eta.level.max(xi.level).max(eta_lift.map_or(0, |l| l.level));
    let lift = match eta_lift {
        Some(l) => {
            if !l.lifts(eta) {
                return Err(Error::Invalid("lift does not reduce to eta".into()));
            }
            l.lift_to(sys, level)
        }
        None => eta.canonical_lift().lift_to(sys, level),
    };
    let xi = xi.lift_to(sys, level);
    let (ha, hb) = band(H_BAND);
    let m = sys.m(level);
    let mut f = Vec::with_capacity(m as usize);
    for k in 0..m {
        let diff = lift.at(k) - lift.at(k + 1);
        let h = CircleValue::new(xi.at(k) + &diff);
        if !in_open_band(h.value(), &ha, &hb) {
            return Err(Error::Band(format!(
                "xi + eta - eta∘alpha = {} on cylinder {k} is outside ({ha}, {hb})",
                h.value()
            )));
        }
        f.push(diff.nearest_integer()?);
    }
    let class = k0_class_big(sys, level, f.clone());
    Ok(Bott { level, f, class })
}

#[derive(Debug, Clone, Serialize)]
pub struct Control {
    pub eta: CircleCocycle,
    pub eta_lift: RealLift,
    pub max_residual: SymbolicReal,
    pub bott: Bott,
    pub residual_ok: bool,
    pub bott_ok: bool,
}

/// `η` with `|(ξ₁ − ξ₂) − (η − η∘α)| < ε` and `B_α(η) = [f]`, given
/// lifts in `(7/15, 8/15)` with `μ(ξ₂) = μ(ξ₁) + μ(f)`.
///
/// On an odometer one tower suffices: `η̃(k) = Σ_{i<k} (ξ₂ − ξ₁)(i)`
/// makes the residual vanish identically, and the roof jump of `η̃` is
/// `Σ f`, whose class is `[f]`. The Bott element is taken with `ξ₂` as
/// the context, for which `ξ₂ + η − η∘α ≡ ξ₁`.
pub fn control(
    sys: &Arc<OdometerSystem>,
    xi1: &RealLift,
    xi2: &RealLift,
    f_level: usize,
    f: &[i64],
    eps: &Rational,
) -> Result<Control> {
    check_eps(eps)?;
    if f.len() as u64 != sys.try_m(f_level)? {
        return Err(Error::Invalid(format!("f at level {f_level} has the wrong length")));
    }
    let (a, b) = band(BOTT_XI_BAND);
    xi1.check_band(&a, &b, "xi1")?;
    xi2.check_band(&a, &b, "xi2")?;
    let mu_f = crate::kgroup::k0_value(sys, f_level, f);
    let gap = &xi2.mean(sys) - &xi1.mean(sys);
    if gap != SymbolicReal::from_rational(mu_f.clone()) {
        return Err(Error::Precondition(format!(
            "mu(xi2) - mu(xi1) = {gap} differs from mu(f) = {mu_f}"
        )));
    }
    let level = xi1.level.max(xi2.level).max(f_level);
    let x1 = xi1.lift_to(sys, level);
    let x2 = xi2.lift_to(sys, level);
    let mut values = Vec::with_capacity(x1.values.len());
    let mut acc = SymbolicReal::zero();
    for (p, q) in x1.values.iter().zip(&x2.values) {
        values.push(acc.clone());
        acc = &acc + &(q - p);
    }
    let eta_lift = RealLift { level, values };
    let eta = eta_lift.reduce(sys)?;
    let max_residual = {
        let m = sys.m(level);
        let next = eta.shift_forward();
        max_norm((0..m).map(|k| {
            let d = CircleValue::new(x1.at(k) - x2.at(k));
            &d - &(eta.at(k) - next.at(k))
        }))
    };
    let residual_ok = max_residual.cmp_exact(&SymbolicReal::from_rational(eps.clone())).is_lt();
    let bott = bott(&eta, Some(&eta_lift), xi2)?;
    let bott_ok = bott.class.rational_value() == Some(mu_f);
    Ok(Control {
        eta,
        eta_lift,
        max_residual,
        bott,
        residual_ok,
        bott_ok,
    })
}
