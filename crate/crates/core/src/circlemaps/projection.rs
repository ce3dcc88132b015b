//! Generalized Rieffel projections `e = g u* + f + u g` in the crossed
//! product by `γ = α × φ`, with `u h u* = h ∘ γ⁻¹`.
//!
//! Expanding `e² = e` by powers of `u` gives, with `G = g²`:
//! degree 0: `f² + G + G∘γ⁻¹ = f`; degree ±1: `g (f + f∘γ) = g`;
//! degree ±2: `g · g∘γ = 0`. Since `g ≥ 0` vanishes exactly off its
//! support, the last two are checked as `G f + G f∘γ − G = 0` and
//! `G · G∘γ = 0`, so every identity is polynomial on each piece.

use std::cmp::Ordering;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use super::piecewise::{identity_violations, CircleFunction, Poly, Term};
use super::pl::{PLCocycle, PlLift};
use crate::cantor::OdometerSystem;
use crate::exact::{CircleValue, Rational, SymbolicReal};
use crate::{Error, Result};

fn sym(q: Rational) -> SymbolicReal {
    SymbolicReal::from_rational(q)
}

/// Per-cylinder data of a projection at level `level`.
#[derive(Debug, Clone, Serialize)]
pub struct ProjectionData {
    #[serde(skip)]
    pub system: Arc<OdometerSystem>,
    pub level: usize,
    #[serde(skip)]
    pub gamma: PLCocycle,
    /// Rise start `s(x)`, used as the comparison window.
    pub windows: Vec<SymbolicReal>,
    #[serde(serialize_with = "crate::kgroup::ser_rational")]
    pub width: Rational,
    pub f: Vec<CircleFunction>,
    pub g_sq: Vec<CircleFunction>,
    /// `s(x)`, `s(x) + c`, `φ_{α⁻¹x}(s(α⁻¹x))`, `φ_{α⁻¹x}(s(α⁻¹x) + c)`.
    pub breakpoints: Vec<[CircleValue; 4]>,
}

impl ProjectionData {
    pub fn m(&self) -> u64 {
        self.f.len() as u64
    }

    fn idx(&self, r: u64) -> usize {
        (r % self.m()) as usize
    }
}

/// Builds `f` and `G = g²` from rise starts `s(x)` and width `c`:
/// `f = (t − s)/c` on `[s, s + c]`, `1` up to `φ_{α⁻¹x}(s(α⁻¹x))`, then
/// `1 − (φ_{α⁻¹x}⁻¹(t) − s(α⁻¹x))/c`; `G = ((t − s)/c)(1 − (t − s)/c)`.
pub fn build_projection(gamma: &PLCocycle, starts: &[CircleValue], c: &Rational) -> Result<ProjectionData> {
    let sys = gamma.system.clone();
    let level = gamma.level;
    let m = sys.m(level);
    if starts.len() as u64 != m {
        return Err(Error::Invalid(format!("need {m} rise starts at level {level}")));
    }
    if !gamma.is_orientation_preserving() {
        return Err(Error::Precondition("projections need orientation-preserving fibre maps".into()));
    }
    let inv_c = Rational::one() / c;
    let csym = sym(c.clone());
    let mut f = Vec::with_capacity(m as usize);
    let mut g_sq = Vec::with_capacity(m as usize);
    let mut windows = Vec::with_capacity(m as usize);
    let mut breakpoints = Vec::with_capacity(m as usize);
    for r in 0..m {
        let prev = ((r + m - 1) % m) as usize;
        let s = starts[r as usize].value().clone();
        let sp = starts[prev].value().clone();
        let lift = &gamma.maps[prev].lift;
        // φ_{α⁻¹x}, shifted so that φ(s_prev) lands in [s + c, s + 1 − c]
        let raw = lift.eval(&sp);
        let k = Rational::from_integer((&raw - &s).floor());
        let shifted = lift.then_rotate(&sym(-k));
        let fall_start = shifted.eval(&sp);
        let fall_end = shifted.eval(&(&sp + &csym));
        let s_plus_c = &s + &csym;
        let gap = &fall_start - &s;
        if gap.cmp_exact(&csym) == Ordering::Less
            || gap.cmp_exact(&sym(Rational::one() - c)) == Ordering::Greater
            || fall_end.cmp_exact(&s.add_rational(&Rational::one())) == Ordering::Greater
        {
            return Err(Error::Band(format!(
                "cylinder {r}: fall starts at {fall_start}, outside [s + c, s + 1 - c] for s = {s}"
            )));
        }
        let mut fx = CircleFunction::single(s.clone(), s_plus_c.clone(), vec![Rational::zero(), inv_c.clone()]);
        fx.push(s_plus_c.clone(), fall_start.clone(), Poly::constant(Rational::one()));
        let fall = CircleFunction::single(sp.clone(), &sp + &csym, vec![Rational::one(), -inv_c.clone()]);
        fx.extend(fall.compose_lift(&shifted.inverse())?);
        f.push(fx);
        g_sq.push(CircleFunction::single(
            s.clone(),
            s_plus_c.clone(),
            vec![Rational::zero(), inv_c.clone(), -(&inv_c * &inv_c)],
        ));
        breakpoints.push([
            CircleValue::new(s.clone()),
            CircleValue::new(s_plus_c),
            CircleValue::new(fall_start),
            CircleValue::new(fall_end),
        ]);
        windows.push(s);
    }
    Ok(ProjectionData {
        system: sys,
        level,
        gamma: gamma.clone(),
        windows,
        width: c.clone(),
        f,
        g_sq,
        breakpoints,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityReport {
    pub holds: bool,
    /// `f² + G + G∘γ⁻¹ = f`.
    pub degree0: bool,
    /// `g (f + f∘γ) = g`.
    pub degree1: bool,
    /// `g · g∘γ = 0`.
    pub degree2: bool,
    pub failures: Vec<String>,
}

/// Checks the three identities on every cylinder by exact comparison of
/// polynomial pieces over a common partition.
pub fn verify_identities(p: &ProjectionData) -> Result<IdentityReport> {
    let m = p.m();
    let mut report = IdentityReport {
        holds: true,
        degree0: true,
        degree1: true,
        degree2: true,
        failures: Vec::new(),
    };
    for r in 0..m {
        let x = p.idx(r);
        let next = p.idx(r + 1);
        let prev = p.idx(r + m - 1);
        let phi = &p.gamma.maps[x].lift;
        let phi_prev_inv = p.gamma.maps[prev].lift.inverse();
        let f = &p.f[x];
        let g = &p.g_sq[x];
        let f_fwd = p.f[next].compose_lift(phi)?;
        let g_fwd = p.g_sq[next].compose_lift(phi)?;
        let g_back = p.g_sq[prev].compose_lift(&phi_prev_inv)?;
        let w = &p.windows[x];
        let checks: [(&str, Vec<Term<'_>>); 3] = [
            (
                "f^2 + g^2 + g^2∘γ^-1 = f",
                vec![
                    Term::new(1, vec![f, f]),
                    Term::new(1, vec![g]),
                    Term::new(1, vec![&g_back]),
                    Term::new(-1, vec![f]),
                ],
            ),
            (
                "g(f + f∘γ) = g",
                vec![Term::new(1, vec![g, f]), Term::new(1, vec![g, &f_fwd]), Term::new(-1, vec![g])],
            ),
            ("g·g∘γ = 0", vec![Term::new(1, vec![g, &g_fwd])]),
        ];
        for (i, (name, terms)) in checks.iter().enumerate() {
            let bad = identity_violations(w, terms)?;
            if !bad.is_empty() {
                match i {
                    0 => report.degree0 = false,
                    1 => report.degree1 = false,
                    _ => report.degree2 = false,
                }
                let (lo, hi) = &bad[0];
                report.failures.push(format!("cylinder {r}: {name} fails on [{lo}, {hi}]"));
            }
        }
    }
    report.holds = report.degree0 && report.degree1 && report.degree2;
    Ok(report)
}

/// `∫ f dμ dt` with `μ` the uniform measure on level cylinders.
pub fn trace_by_integration(p: &ProjectionData) -> Result<SymbolicReal> {
    let mut acc = SymbolicReal::zero();
    for fx in &p.f {
        acc = &acc + &fx.integral()?;
    }
    Ok(acc.scale(&Rational::new(BigInt::one(), BigInt::from(p.m()))))
}

#[derive(Debug, Clone, Serialize)]
pub struct GeneralRieffel {
    #[serde(serialize_with = "crate::kgroup::ser_rational")]
    pub c: Rational,
    pub data: ProjectionData,
    pub trace: SymbolicReal,
}

/// Width `c = inf |φ_x(t) − t|` over cylinders and `t`, which is positive
/// exactly when no `φ_x` has a fixed point.
fn displacement_gap(phi: &PLCocycle) -> Result<Rational> {
    let mut c: Option<SymbolicReal> = None;
    for (r, map) in phi.maps.iter().enumerate() {
        let (min, max) = map.lift.displacement_range();
        let n = min.floor();
        let nq = Rational::from_integer(n);
        let below = min.add_rational(&-nq.clone());
        let above = SymbolicReal::from_rational(&nq + Rational::one()) - &max;
        if below.is_zero() || !above.signum_exact().is_gt() {
            return Err(Error::Precondition(format!("fibre map on cylinder {r} has a fixed point")));
        }
        let local = below.min(&above);
        c = Some(match c {
            Some(cur) => cur.min(&local),
            None => local,
        });
    }
    let c = c.expect("at least one cylinder");
    // an irrational gap is replaced by a rational lower bound
    match c.as_rational() {
        Some(q) => Ok(q.clone()),
        None => {
            let lo = c.enclosure(32).lo;
            if lo > Rational::zero() {
                Ok(lo)
            } else {
                Err(Error::Budget(format!("no positive rational below the gap {c}")))
            }
        }
    }
}

/// `e(α, φ, s)` for fixed-point-free orientation-preserving `φ`.
pub fn rieffel_general(phi: &PLCocycle, s: &CircleValue) -> Result<GeneralRieffel> {
    if !phi.is_orientation_preserving() {
        return Err(Error::Precondition("the general projection needs Homeo+ values".into()));
    }
    let c = displacement_gap(phi)?;
    if c.is_zero() {
        return Err(Error::Precondition("displacement gap is zero".into()));
    }
    let starts = vec![s.clone(); phi.maps.len()];
    let data = build_projection(phi, &starts, &c)?;
    let trace = trace_by_integration(&data)?;
    Ok(GeneralRieffel { c, data, trace })
}

pub(crate) fn rotation_cocycle(sys: &Arc<OdometerSystem>, level: usize, values: &[CircleValue]) -> PLCocycle {
    PLCocycle {
        system: sys.clone(),
        level,
        maps: values
            .iter()
            .map(|v| super::pl::PlHomeo::new(false, PlLift::rotation(v.value().clone())))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circlemaps::pl::PlHomeo;
    use crate::exact::{rat, GeneratorTable};

    fn s3() -> Arc<OdometerSystem> {
        Arc::new(OdometerSystem::uniform(3))
    }

    fn skewed() -> PlHomeo {
        PlHomeo::new(
            false,
            PlLift::from_rationals(&[rat(0, 1), rat(1, 2)], rat(1, 4), &[rat(1, 2), rat(3, 2)]).unwrap(),
        )
    }

    #[test]
    fn rotation_specialization() {
        let sys = s3();
        let t = GeneratorTable::new();
        let th = t.golden("phi").unwrap().add_rational(&rat(-2, 15));
        let phi = PLCocycle::constant(&sys, PlHomeo::rotation(th.clone()));
        let r = rieffel_general(&phi, &CircleValue::zero()).unwrap();
        assert!(r.c > Rational::zero());
        assert!(verify_identities(&r.data).unwrap().holds);
        assert_eq!(r.trace, th);
        let [a, b, c, d] = &r.data.breakpoints[0];
        assert_eq!((a.value(), b.value()), (&SymbolicReal::zero(), &sym(r.c.clone())));
        assert_eq!(c.value(), &th);
        assert_eq!(d.value(), &th.add_rational(&r.c));
    }

    #[test]
    fn pl_fibres() {
        let sys = s3();
        let phi = PLCocycle::new(
            &sys,
            1,
            vec![
                PlHomeo::rotation(sym(rat(1, 3))).compose(&skewed()),
                PlHomeo::rotation(sym(rat(1, 3))),
                skewed().compose(&PlHomeo::rotation(sym(rat(1, 8)))),
            ],
        )
        .unwrap();
        for s in [rat(0, 1), rat(1, 7), rat(1, 7) + rat(1, 1000)] {
            let r = rieffel_general(&phi, &CircleValue::from_rational(s)).unwrap();
            let rep = verify_identities(&r.data).unwrap();
            assert!(rep.holds, "{:?}", rep.failures);
        }
        let fixed = PLCocycle::constant(&sys, PlHomeo::identity());
        assert!(rieffel_general(&fixed, &CircleValue::zero()).is_err());
        let touching = PlHomeo::new(
            false,
            PlLift::from_rationals(&[rat(0, 1), rat(1, 2)], rat(0, 1), &[rat(1, 2), rat(3, 2)]).unwrap(),
        );
        assert!(rieffel_general(&PLCocycle::constant(&sys, touching), &CircleValue::zero()).is_err());
    }

    #[test]
    fn corrupted_data_fails() {
        let sys = s3();
        let phi = PLCocycle::constant(&sys, PlHomeo::rotation(sym(rat(2, 5))));
        let r = rieffel_general(&phi, &CircleValue::zero()).unwrap();
        let mut half = r.data.clone();
        half.f = half.f.iter().map(|f| f.scale(&rat(1, 2))).collect();
        let rep = verify_identities(&half).unwrap();
        assert!(!rep.holds && !rep.degree0);
        let mut flat = r.data.clone();
        flat.g_sq = vec![CircleFunction::zero(); flat.g_sq.len()];
        assert!(!verify_identities(&flat).unwrap().degree0);
    }
}
