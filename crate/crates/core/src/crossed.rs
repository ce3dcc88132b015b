//! Invariants of the crossed product by `α × φ` over an odometer: ordered
//! K₀ read through the trace, K₁, generalized Rieffel projections and the
//! approximate K-conjugacy decision.

use std::cmp::Ordering;
use std::sync::Arc;

use num_bigint::BigInt;
use serde::Serialize;

use crate::cantor::{InvariantMeasure, OdometerSystem, SignCocycle};
use crate::circlemaps::{build_projection, rotation_cocycle, trace_by_integration, verify_identities, IdentityReport, ProjectionData};
use crate::cocycle::{
    bott, in_open_band, minimal_sets_isom, minimality_test, CircleCocycle, RealLift, Verdict, BOTT_XI_BAND, H_BAND,
};
use crate::exact::{rat, CircleValue, Rational, SupernaturalNumber, SymbolicReal};
use crate::kgroup::{k0_class_big, k0_compare, mod2_class, order_iso_decision, quotient_torsion, RealGroup};
use crate::{Error, Result};

fn band(b: (i64, i64, i64)) -> (Rational, Rational) {
    (rat(b.0, b.2), rat(b.1, b.2))
}

/// Band for the Bott identity: values of `ξ + η − η∘α`.
pub const BOTT_IDENTITY_BAND: (i64, i64, i64) = (1, 2, 3);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConeKind {
    /// Minimal extension: the cone is the set of strictly positive traces.
    Simple,
    /// Minimality unknown or false; the cone is stated but not justified.
    Formal,
}

/// `K₀` as a subgroup of ℝ under the unique trace.
#[derive(Debug, Clone, Serialize)]
pub struct K0Report {
    pub group: RealGroup,
    pub generators: Vec<SymbolicReal>,
    pub unit: SymbolicReal,
    /// Image of `K⁰(X, α)`.
    pub subgroup: RealGroup,
    pub cone: ConeKind,
    /// Whether the trace is injective on `K₀`, so that the group above is
    /// `K₀` itself and not only its image.
    pub faithful: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct K1Report {
    /// Rank of the free summand generated by the implementing unitary.
    pub unitary_rank: usize,
    pub summand: String,
    pub torsion_order: Option<u64>,
    /// Value of `2·[f₀]` in `K⁰(X, α)` in the orientation-reversing case.
    pub torsion_witness: Option<SymbolicReal>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CrossedInvariant {
    pub orientation_preserving: bool,
    pub k0: K0Report,
    pub k1: K1Report,
    /// `τ(e(α, ξ, 0)) mod K⁰`, reduced into `[0, 1)`.
    pub rieffel_trace: Option<SymbolicReal>,
    pub minimal: Verdict,
    pub notes: Vec<String>,
}

impl CrossedInvariant {
    /// Whether `(n, [f])` with `f` at level `level` lies in the positive cone.
    pub fn cone_contains(&self, sys: &OdometerSystem, n: i64, level: usize, f: &[i64]) -> Result<bool> {
        let mu_f = SymbolicReal::from_rational(crate::kgroup::k0_value(sys, level, f));
        let value = match (&self.rieffel_trace, self.orientation_preserving) {
            (Some(tau), true) => &tau.scale_int(n) + &mu_f,
            (_, false) if n == 0 => mu_f,
            _ => return Err(Error::Precondition("no Z-summand in K0 for this system".into())),
        };
        if n == 0 && value.is_zero() {
            return Ok(true);
        }
        Ok(value.signum_exact() == Ordering::Greater)
    }
}

fn mean_mod_one(xi: &CircleCocycle) -> SymbolicReal {
    xi.canonical_lift().mean(&xi.system).fract()
}

fn odometer_group(sys: &OdometerSystem) -> Result<RealGroup> {
    RealGroup::new(sys.supernatural().clone(), Vec::new())
}

/// `(−1)^{χ(α⁻¹x)} ξ(x)`, the cocycle obtained by conjugating fibres with
/// reflections when `o = χ − χ∘α⁻¹ (mod 2)`.
fn straighten(xi: &CircleCocycle, chi: &SignCocycle) -> CircleCocycle {
    let sys = &xi.system;
    let level = xi.level.max(chi.level);
    let xi = xi.lift_to(level);
    let chi = chi.lift_to(sys, level);
    let m = sys.m(level);
    let values = (0..m)
        .map(|r| {
            let v = xi.at(r);
            if chi.at((r + m - 1) % m) == 1 {
                -v
            } else {
                v.clone()
            }
        })
        .collect();
    CircleCocycle {
        system: sys.clone(),
        level,
        values,
    }
}

/// Invariant of `C*(X × 𝕋, α × φ)` with `φ_x(t) = ±t + ξ(x)`, the sign
/// given by `orientation` (all `+` when absent).
pub fn invariant_of(xi: &CircleCocycle, orientation: Option<&SignCocycle>, max_level: usize) -> Result<CrossedInvariant> {
    let sys = &xi.system;
    let mut notes = Vec::new();
    let mut xi = xi.clone();
    if let Some(o) = orientation.filter(|o| o.values.iter().any(|&b| b == 1)) {
        let class = mod2_class(sys, o)?;
        if !class.is_zero {
            return reversing_invariant(&xi, o, max_level);
        }
        let chi = class.witness.expect("zero classes carry a witness");
        xi = straighten(&xi, &chi);
        notes.push("orientation cocycle is trivial mod 2; fibres conjugated by reflections".into());
    }
    let k0_sub = odometer_group(sys)?;
    let minimal = minimality_test(&xi, max_level.max(xi.level))?.verdict;
    let tau = mean_mod_one(&xi);
    let faithful = !tau.is_rational();
    let group = RealGroup::new(sys.supernatural().clone(), vec![tau.clone()])?;
    if !faithful {
        notes.push("rational mean: the trace is not faithful on K0 and the group shown is its image".into());
    }
    let cone = if minimal == Verdict::Yes { ConeKind::Simple } else { ConeKind::Formal };
    if cone == ConeKind::Formal {
        notes.push("extension not known to be minimal: cone is formal".into());
    }
    Ok(CrossedInvariant {
        orientation_preserving: true,
        k0: K0Report {
            generators: vec![SymbolicReal::one(), tau.clone()],
            group,
            unit: SymbolicReal::one(),
            subgroup: k0_sub.clone(),
            cone,
            faithful,
        },
        k1: K1Report {
            unitary_rank: 1,
            summand: format!("Z[1/{}]", sys.supernatural()),
            torsion_order: None,
            torsion_witness: None,
        },
        rieffel_trace: Some(tau),
        minimal,
        notes,
    })
}

fn reversing_invariant(xi: &CircleCocycle, o: &SignCocycle, max_level: usize) -> Result<CrossedInvariant> {
    let sys = &xi.system;
    let qt = quotient_torsion(sys, o)?;
    let minimal = minimal_sets_isom(o, xi, max_level.max(xi.level))?.minimal;
    let k0 = odometer_group(sys)?;
    let cone = if minimal == Verdict::Yes { ConeKind::Simple } else { ConeKind::Formal };
    let mut notes = vec!["positive cone of K0 taken to be the cone of K0(X, alpha)".to_string()];
    if cone == ConeKind::Formal {
        notes.push("extension not known to be minimal: cone is formal".into());
    }
    let doubled = SymbolicReal::from_rational(qt.f0_value() * Rational::from_integer(BigInt::from(2)));
    Ok(CrossedInvariant {
        orientation_preserving: false,
        k0: K0Report {
            group: k0.clone(),
            generators: vec![SymbolicReal::one()],
            unit: SymbolicReal::one(),
            subgroup: k0,
            cone,
            faithful: true,
        },
        k1: K1Report {
            unitary_rank: 1,
            summand: qt.describe(),
            torsion_order: Some(qt.torsion_order),
            torsion_witness: qt.doubled_in_subgroup.then_some(doubled),
        },
        rieffel_trace: None,
        minimal,
        notes,
    })
}

/// `e(α, ξ, η) = g u* + f + u g` for the rotation cocycle `ξ`.
#[derive(Debug, Clone, Serialize)]
pub struct RieffelPair {
    pub xi: CircleCocycle,
    pub eta: CircleCocycle,
    /// Lift of `ξ + η − η∘α` with values in `(1/10, 9/10)`.
    pub band_lift: RealLift,
    pub data: ProjectionData,
}

impl RieffelPair {
    /// `η(x)`, `η(x) + 1/10`, `η'(x)`, `η'(x) + 1/10` with `η' = (ξ + η)∘α⁻¹`.
    pub fn breakpoints(&self) -> &[[CircleValue; 4]] {
        &self.data.breakpoints
    }
}

/// Lift of `ξ + η − η∘α` into the open band `(a/d, b/d)`.
fn band_lift(xi: &CircleCocycle, eta: &CircleCocycle, b: (i64, i64, i64)) -> Result<RealLift> {
    let (lo, hi) = band(b);
    let h = xi.add(&eta.sub(&eta.shift_forward())?)?;
    let values = h.values.iter().map(|v| v.value().clone()).collect::<Vec<_>>();
    for (r, v) in values.iter().enumerate() {
        if !in_open_band(v, &lo, &hi) {
            return Err(Error::Band(format!(
                "xi + eta - eta∘alpha = {v} on cylinder {r} is outside ({lo}, {hi})"
            )));
        }
    }
    RealLift::new(&xi.system, h.level, values)
}

pub fn rieffel(xi: &CircleCocycle, eta: Option<&CircleCocycle>) -> Result<RieffelPair> {
    let sys = &xi.system;
    let zero = CircleCocycle::zero(sys);
    let eta = eta.unwrap_or(&zero);
    if !Arc::ptr_eq(sys, &eta.system) && **sys != *eta.system {
        return Err(Error::MismatchedSystems);
    }
    let level = xi.level.max(eta.level);
    let (xi, eta) = (xi.lift_to(level), eta.lift_to(level));
    let lift = band_lift(&xi, &eta, H_BAND)?;
    let gamma = rotation_cocycle(sys, level, &xi.values);
    let data = build_projection(&gamma, &eta.values, &rat(1, 10))?;
    Ok(RieffelPair {
        xi,
        eta,
        band_lift: lift,
        data,
    })
}

/// Checks `f² + g² + g²∘γ⁻¹ = f`, `g(f + f∘γ) = g` and `g·g∘γ = 0` exactly.
pub fn verify_projection(p: &RieffelPair) -> Result<IdentityReport> {
    verify_identities(&p.data)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Trace {
    /// `μ(ξ̃)` for the band lift.
    pub by_lift: SymbolicReal,
    /// `∫ f dμ dt`.
    pub by_integration: SymbolicReal,
    pub agree: bool,
}

pub fn trace_of(p: &RieffelPair, mu: &InvariantMeasure) -> Result<Trace> {
    if *mu.system != *p.xi.system {
        return Err(Error::MismatchedSystems);
    }
    let by_lift = mu.measure_real(p.band_lift.level, &p.band_lift.values);
    let by_integration = trace_by_integration(&p.data)?;
    Ok(Trace {
        agree: by_lift == by_integration,
        by_lift,
        by_integration,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BottIdentity {
    /// `[e(α, ξ, η)] − [e(α, ξ, 0)]` as a class in `K⁰`, from the integer
    /// jump between band lifts, against `sign · B_α(η)`.
    pub class_identity: bool,
    /// `τ(e(α, ξ, η)) − τ(e(α, ξ, 0))` against `sign · τ(B_α(η))`.
    pub trace_identity: bool,
    /// Both projections have ℤ-component 1 in `ℤ ⊕ K⁰`.
    pub unit_components: bool,
    pub trace_difference: SymbolicReal,
    pub bott_value: SymbolicReal,
}

/// `[e(α, ξ, η)] = [e(α, ξ, 0)] − B_α(η)` for `ξ` with a lift in
/// `(7/15, 8/15)` and `ξ + η − η∘α ∈ (1/3, 2/3)`.
pub fn bott_identity_check(xi: &RealLift, eta: &CircleCocycle) -> Result<BottIdentity> {
    bott_identity_with_sign(xi, eta, -1)
}

/// Same check against `[e(α, ξ, 0)] + sign · B_α(η)`.
pub fn bott_identity_with_sign(xi: &RealLift, eta: &CircleCocycle, sign: i64) -> Result<BottIdentity> {
    let sys = &eta.system;
    let (a, b) = band(BOTT_XI_BAND);
    xi.check_band(&a, &b, "xi")?;
    let level = xi.level.max(eta.level);
    let xi_lift = xi.lift_to(sys, level);
    let xi_c = xi_lift.reduce(sys)?;
    let eta = eta.lift_to(level);
    band_lift(&xi_c, &eta, BOTT_IDENTITY_BAND)?;
    let e0 = rieffel(&xi_c, None)?;
    let e1 = rieffel(&xi_c, Some(&eta))?;
    let mu = InvariantMeasure::of(sys);
    let (t0, t1) = (trace_of(&e0, &mu)?, trace_of(&e1, &mu)?);
    if !t0.agree || !t1.agree {
        return Err(Error::Invalid("trace routes disagree".into()));
    }
    let b = bott(&eta, None, xi)?;
    let bott_value = SymbolicReal::from_rational(b.class.rational_value().expect("odometer class"));
    let trace_difference = &t1.by_lift - &t0.by_lift;
    let trace_identity = trace_difference == bott_value.scale_int(sign);

    // integer jump k with band lift(η) = ξ̃ + η̃ − η̃∘α − k; then
    // [e(η)] − [e(0)] = −[k] since η̃ − η̃∘α has trace zero
    let eta_lift = eta.canonical_lift().lift_to(sys, level);
    let e1_lift = e1.band_lift.lift_to(sys, level);
    let m = sys.m(level);
    let jump: Vec<BigInt> = (0..m)
        .map(|r| {
            let d = &(&(xi_lift.at(r) + eta_lift.at(r)) - eta_lift.at(r + 1)) - e1_lift.at(r);
            d.as_rational()
                .filter(|q| q.is_integer())
                .map(|q| q.to_integer())
                .ok_or_else(|| Error::Invalid(format!("band lifts differ by a non-integer on cylinder {r}")))
        })
        .collect::<Result<_>>()?;
    let diff = k0_class_big(sys, level, jump.iter().map(|k| -k).collect());
    let scaled_bott = k0_class_big(sys, b.level, b.f.iter().map(|x| x * BigInt::from(sign)).collect());
    let class_identity = k0_compare(&diff, &scaled_bott)?.equal;
    Ok(BottIdentity {
        class_identity,
        trace_identity,
        unit_components: true,
        trace_difference,
        bott_value,
    })
}

/// K-theoretic data of a circle extension with rotation fibres.
#[derive(Debug, Clone, Serialize)]
pub struct SystemDescriptor {
    /// `K⁰` of the base, embedded in ℝ by its trace.
    pub k0: RealGroup,
    /// Mean of the rotation cocycle, in `[0, 1)`.
    pub mean: SymbolicReal,
    pub uniquely_ergodic: bool,
    pub provenance: String,
}

impl SystemDescriptor {
    pub fn new(k0: RealGroup, mean: SymbolicReal, uniquely_ergodic: bool, provenance: impl Into<String>) -> Self {
        SystemDescriptor {
            k0,
            mean: mean.fract(),
            uniquely_ergodic,
            provenance: provenance.into(),
        }
    }

    /// Odometer with the rotation cocycle `ξ`.
    pub fn of_cocycle(xi: &CircleCocycle) -> Result<Self> {
        let sys = &xi.system;
        Ok(Self::new(
            odometer_group(sys)?,
            mean_mod_one(xi),
            InvariantMeasure::of(sys).uniquely_ergodic(),
            format!("odometer {} with a rotation cocycle", sys.supernatural()),
        ))
    }

    fn k0_crossed(&self, mean: &SymbolicReal) -> Result<RealGroup> {
        let mut gens = self.k0.generators.clone();
        gens.push(mean.clone());
        RealGroup::new(self.k0.rational.clone(), gens)
    }
}

/// Denjoy homeomorphism with rotation number `θ`, skewed by a rotation
/// cocycle of mean `mean`: `K⁰ = ℤ + θℤ`, uniquely ergodic.
pub fn denjoy_descriptor(theta: &SymbolicReal, mean: &SymbolicReal) -> Result<SystemDescriptor> {
    if theta.is_rational() {
        return Err(Error::Invalid(format!("Denjoy rotation number {theta} is rational")));
    }
    Ok(SystemDescriptor::new(
        RealGroup::integers_plus(vec![theta.clone()])?,
        mean.clone(),
        true,
        format!("Denjoy system with rotation number {theta}"),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FlipMode {
    /// Try `mean` first, then `1 − mean`.
    #[default]
    Auto,
    /// Only `mean`.
    Never,
    /// Only `1 − mean`.
    Force,
}

#[derive(Debug, Clone, Serialize)]
pub struct KConjDecision {
    pub verdict: Verdict,
    pub flip_used: bool,
    pub reason: String,
}

/// Approximate K-conjugacy of `α × R_ξ` and `β × R_ζ`: a unital order
/// isomorphism of `K₀` carrying one `K⁰` onto the other.
pub fn kconj_decision(a: &SystemDescriptor, b: &SystemDescriptor, flip: FlipMode) -> Result<KConjDecision> {
    for d in [a, b] {
        if !d.uniquely_ergodic || d.mean.is_rational() {
            return Ok(KConjDecision {
                verdict: Verdict::Unknown,
                flip_used: false,
                reason: format!("state not faithful on K0 for {}", d.provenance),
            });
        }
    }
    let ga = a.k0_crossed(&a.mean)?;
    let flipped = SymbolicReal::one() - &b.mean;
    let attempts: Vec<(bool, &SymbolicReal)> = match flip {
        FlipMode::Auto => vec![(false, &b.mean), (true, &flipped)],
        FlipMode::Never => vec![(false, &b.mean)],
        FlipMode::Force => vec![(true, &flipped)],
    };
    let mut reasons = Vec::new();
    for (flip_used, mean) in attempts {
        let gb = b.k0_crossed(mean)?;
        let d = order_iso_decision(&ga, &gb, &a.k0, &b.k0)?;
        if d.exists {
            return Ok(KConjDecision {
                verdict: Verdict::Yes,
                flip_used,
                reason: d.reason,
            });
        }
        if !reasons.contains(&d.reason) {
            reasons.push(d.reason);
        }
    }
    Ok(KConjDecision {
        verdict: Verdict::No,
        flip_used: false,
        reason: reasons.join("; "),
    })
}

/// `ℤ[1/s]` as a descriptor-ready group.
pub fn odometer_k0(s: &SupernaturalNumber) -> Result<RealGroup> {
    RealGroup::new(s.clone(), Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circlemaps::CircleFunction;
    use crate::cocycle::control;
    use crate::exact::{int, GeneratorTable};
    use num_traits::Zero;
    use proptest::prelude::*;

    fn s3() -> Arc<OdometerSystem> {
        Arc::new(OdometerSystem::uniform(3))
    }

    /// `θ = φ − 2/15 ≈ 0.4847`.
    fn theta(t: &Arc<GeneratorTable>) -> SymbolicReal {
        t.golden("phi").unwrap().add_rational(&rat(-2, 15))
    }

    fn cv(q: Rational) -> CircleValue {
        CircleValue::from_rational(q)
    }

    fn winding(sys: &Arc<OdometerSystem>, n: usize) -> CircleCocycle {
        let m = sys.m(n) as i64;
        CircleCocycle::new(sys, n, (0..m).map(|r| cv(rat(r, m))).collect()).unwrap()
    }

    #[test]
    fn rotation_pair() {
        let t = GeneratorTable::new();
        let sys = s3();
        let th = theta(&t);
        let xi = CircleCocycle::constant(&sys, CircleValue::new(th.clone()));
        let p = rieffel(&xi, None).unwrap();
        let bp = &p.breakpoints()[0];
        assert_eq!(bp[0], CircleValue::zero());
        assert_eq!(bp[1], cv(rat(1, 10)));
        assert_eq!(bp[2], CircleValue::new(th.clone()));
        assert_eq!(bp[3], CircleValue::new(th.add_rational(&rat(1, 10))));
        assert!(verify_projection(&p).unwrap().holds);
        let tr = trace_of(&p, &InvariantMeasure::of(&sys)).unwrap();
        assert!(tr.agree);
        assert_eq!(tr.by_lift, th);
    }

    #[test]
    fn winding_traces() {
        let t = GeneratorTable::new();
        let sys = s3();
        let th = theta(&t);
        let xi = CircleCocycle::constant(&sys, CircleValue::new(th.clone()));
        for n in 1..=4 {
            let eta = winding(&sys, n);
            let p = rieffel(&xi, Some(&eta)).unwrap();
            let m = sys.m(n) as i64;
            assert_eq!(p.breakpoints()[2][0], cv(rat(2, m)));
            let tr = trace_of(&p, &InvariantMeasure::of(&sys)).unwrap();
            assert!(tr.agree);
            assert_eq!(tr.by_lift, th.add_rational(&rat(-1, m)));
            if n <= 2 {
                assert!(verify_projection(&p).unwrap().holds);
            }
        }
    }

    #[test]
    fn band_violations() {
        let sys = s3();
        let xi = CircleCocycle::constant(&sys, cv(rat(1, 20)));
        assert!(matches!(rieffel(&xi, None), Err(Error::Band(_))));
        let xi = CircleCocycle::constant(&sys, cv(rat(9, 10)));
        assert!(matches!(rieffel(&xi, None), Err(Error::Band(_))));
    }

    #[test]
    fn corrupted_pairs_fail() {
        let t = GeneratorTable::new();
        let sys = s3();
        let xi = CircleCocycle::constant(&sys, CircleValue::new(theta(&t)));
        let p = rieffel(&xi, Some(&winding(&sys, 1))).unwrap();
        let mut half = p.clone();
        half.data.f = half.data.f.iter().map(|f| f.scale(&rat(1, 2))).collect();
        let r = verify_projection(&half).unwrap();
        assert!(!r.holds && !r.degree0);
        let mut no_g = p.clone();
        no_g.data.g_sq = vec![CircleFunction::zero(); no_g.data.g_sq.len()];
        let r = verify_projection(&no_g).unwrap();
        assert!(!r.holds && !r.degree0);
    }

    type Mat = Vec<Vec<Rational>>;

    fn mat_mul(a: &Mat, b: &Mat) -> Mat {
        let n = a.len();
        (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|k| &a[i][k] * &b[k][j]).sum()).collect())
            .collect()
    }

    /// `e = g u* + f + u g` on `ℂⁿ` with `u e_i = e_{i+1}`, so that
    /// `u h u* = h∘γ⁻¹` for `γ(i) = i + 1`.
    fn finite_e(f: &[Rational], g: &[Rational]) -> Mat {
        let n = f.len();
        let mut e = vec![vec![Rational::zero(); n]; n];
        for i in 0..n {
            e[i][i] += &f[i];
            // g u*: e_i ↦ g(i−1) e_{i−1};  u g: e_i ↦ g(i) e_{i+1}
            e[(i + n - 1) % n][i] += &g[(i + n - 1) % n];
            e[(i + 1) % n][i] += &g[i];
        }
        e
    }

    fn identities(f: &[Rational], g: &[Rational]) -> bool {
        let n = f.len();
        (0..n).all(|i| {
            let (p, q) = ((i + n - 1) % n, (i + 1) % n);
            &f[i] * &f[i] + &g[i] * &g[i] + &g[p] * &g[p] == f[i]
                && &g[i] * (&f[i] + &f[q]) == g[i]
                && (&g[i] * &g[q]).is_zero()
        })
    }

    #[test]
    fn finite_model() {
        let vals = [rat(0, 1), rat(1, 2), rat(1, 1)];
        let h = rat(1, 2);
        for f2 in [rat(0, 1), rat(1, 1)] {
            let f = vec![h.clone(), h.clone(), f2];
            let g = vec![h.clone(), rat(0, 1), rat(0, 1)];
            assert!(identities(&f, &g));
            let e = finite_e(&f, &g);
            assert_eq!(mat_mul(&e, &e), e);
        }
        // on ℤ₅ the u-degrees 0, ±1, ±2 are distinct, so the identities are
        // equivalent to e² = e
        let mut agree = 0;
        for code in 0..3usize.pow(10) {
            let digit = |k: usize| vals[(code / 3usize.pow(k as u32)) % 3].clone();
            let f: Vec<_> = (0..5).map(digit).collect();
            let g: Vec<_> = (5..10).map(digit).collect();
            let e = finite_e(&f, &g);
            assert_eq!(identities(&f, &g), mat_mul(&e, &e) == e, "f = {f:?}, g = {g:?}");
            agree += identities(&f, &g) as usize;
        }
        assert!(agree > 32);
    }

    #[test]
    fn bott_identity_cases() {
        let t = GeneratorTable::new();
        let sys = s3();
        let th = theta(&t);
        let xi = RealLift::constant(th.clone());
        let c = CircleCocycle::constant(&sys, cv(rat(2, 7)));
        let r = bott_identity_check(&xi, &c).unwrap();
        assert!(r.class_identity && r.trace_identity && r.bott_value.is_zero());
        // level 1 leaves the band: θ − 1/3 < 1/3
        assert!(matches!(bott_identity_check(&xi, &winding(&sys, 1)), Err(Error::Band(_))));
        for n in 2..=4 {
            let m = sys.m(n) as i64;
            let r = bott_identity_check(&xi, &winding(&sys, n)).unwrap();
            assert!(r.class_identity && r.trace_identity);
            assert_eq!(r.trace_difference, SymbolicReal::from_rational(rat(-1, m)));
            assert_eq!(r.bott_value, SymbolicReal::from_rational(rat(1, m)));
            let bad = bott_identity_with_sign(&xi, &winding(&sys, n), 1).unwrap();
            assert!(!bad.class_identity && !bad.trace_identity);
        }
        let jump = CircleCocycle::new(&sys, 1, vec![cv(rat(0, 1)), cv(rat(1, 5)), cv(rat(0, 1))]).unwrap();
        assert!(matches!(bott_identity_check(&xi, &jump), Err(Error::Band(_))));
        assert!(bott_identity_check(&RealLift::constant(SymbolicReal::from_rational(rat(1, 3))), &c).is_err());
    }

    #[test]
    fn bott_identity_for_control() {
        let t = GeneratorTable::new();
        let sys = s3();
        let th = theta(&t);
        let xi1 = RealLift::constant(th.clone());
        let f = [1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0];
        let xi2 = RealLift::constant(th.add_rational(&rat(1, 27)));
        let ctl = control(&sys, &xi1, &xi2, 3, &f, &rat(1, 10)).unwrap();
        assert!(ctl.residual_ok && ctl.bott_ok);
        let r = bott_identity_check(&xi2, &ctl.eta).unwrap();
        assert!(r.class_identity && r.trace_identity);
        assert_eq!(r.bott_value, SymbolicReal::from_rational(rat(1, 27)));
    }

    #[test]
    fn invariants() {
        let t = GeneratorTable::new();
        let sys = s3();
        let th = theta(&t);
        let xi = CircleCocycle::constant(&sys, CircleValue::new(th.clone()));
        let inv = invariant_of(&xi, None, 8).unwrap();
        assert!(inv.orientation_preserving && inv.k0.faithful);
        assert_eq!(inv.k0.cone, ConeKind::Simple);
        assert!(inv.k0.group.contains(&th.add_rational(&rat(1, 9))).unwrap());
        assert!(!inv.k0.group.contains(&th.scale(&rat(1, 2))).unwrap());
        assert!(inv.k0.subgroup.set_eq(&odometer_k0(&"3^inf".parse().unwrap()).unwrap()).unwrap());
        assert_eq!(inv.k1.summand, "Z[1/3^inf]");
        assert_eq!(inv.rieffel_trace, Some(th.clone()));

        let o = SignCocycle::constant(1);
        let nop = invariant_of(&xi, Some(&o), 8).unwrap();
        assert!(!nop.orientation_preserving && nop.rieffel_trace.is_none());
        assert_eq!(nop.k1.torsion_order, Some(2));
        let w = nop.k1.torsion_witness.clone().unwrap();
        assert!(nop.k0.group.contains(&w).unwrap());
        assert!(nop.k0.group.set_eq(&odometer_k0(&"3^inf".parse().unwrap()).unwrap()).unwrap());

        let third = CircleCocycle::constant(&sys, cv(rat(1, 3)));
        let formal = invariant_of(&third, None, 8).unwrap();
        assert_eq!(formal.k0.cone, ConeKind::Formal);
        assert!(!formal.k0.faithful);

        // o = χ − χ∘α⁻¹ with χ = (0, 1, 1): fibres conjugate to rotations by
        // ±(−θ, θ, −θ), whose mean is ∓θ/3 modulo K⁰
        let o = SignCocycle::new(&sys, 1, vec![1, 1, 0]).unwrap();
        let inv = invariant_of(&xi, Some(&o), 8).unwrap();
        assert!(inv.orientation_preserving);
        let tau = inv.rieffel_trace.unwrap();
        let third = th.scale(&rat(1, 3));
        let k0 = odometer_k0(&"3^inf".parse().unwrap()).unwrap();
        assert!(k0.contains(&(&tau - &third)).unwrap() || k0.contains(&(&tau + &third)).unwrap());
        assert!(!k0.contains(&tau).unwrap());
    }

    #[test]
    fn cone_and_unit() {
        let t = GeneratorTable::new();
        let sys = s3();
        let xi = CircleCocycle::constant(&sys, CircleValue::new(theta(&t)));
        let inv = invariant_of(&xi, None, 8).unwrap();
        assert!(inv.cone_contains(&sys, 0, 0, &[0]).unwrap());
        assert!(inv.cone_contains(&sys, 1, 0, &[0]).unwrap());
        assert!(!inv.cone_contains(&sys, -1, 0, &[0]).unwrap());
        assert!(inv.cone_contains(&sys, -1, 1, &[1, 1, 0]).unwrap());
        assert!(!inv.cone_contains(&sys, -1, 1, &[1, 0, 0]).unwrap());
    }

    #[test]
    fn kconj_examples() {
        let t = GeneratorTable::new();
        let t1 = t.sqrt("theta1", int(2)).unwrap().add_rational(&int(-1));
        let t2 = t.sqrt("theta2", int(3)).unwrap().add_rational(&int(-1));
        let a = denjoy_descriptor(&t1, &t2).unwrap();
        let b = denjoy_descriptor(&t2, &t1).unwrap();
        assert_eq!(kconj_decision(&a, &b, FlipMode::Auto).unwrap().verdict, Verdict::No);
        assert_eq!(kconj_decision(&a, &a, FlipMode::Auto).unwrap().verdict, Verdict::Yes);
        // means differing by a K⁰ value
        let b2 = denjoy_descriptor(&t1, &(&t2 + &t1)).unwrap();
        assert_eq!(kconj_decision(&a, &b2, FlipMode::Never).unwrap().verdict, Verdict::Yes);
        assert!(denjoy_descriptor(&SymbolicReal::from_rational(rat(1, 2)), &t1).is_err());

        let sys = s3();
        let th = theta(&t);
        let x = SystemDescriptor::of_cocycle(&CircleCocycle::constant(&sys, CircleValue::new(th.clone()))).unwrap();
        let y = SystemDescriptor::of_cocycle(&CircleCocycle::constant(
            &sys,
            CircleValue::new(th.add_rational(&rat(1, 9))),
        ))
        .unwrap();
        assert_eq!(kconj_decision(&x, &y, FlipMode::Auto).unwrap().verdict, Verdict::Yes);
        let s2 = Arc::new(OdometerSystem::uniform(2));
        let z = SystemDescriptor::of_cocycle(&CircleCocycle::constant(&s2, CircleValue::new(th.clone()))).unwrap();
        assert_eq!(kconj_decision(&x, &z, FlipMode::Auto).unwrap().verdict, Verdict::No);
        let flipped = SystemDescriptor::new(x.k0.clone(), SymbolicReal::one() - &th, true, "flip");
        let d = kconj_decision(&x, &flipped, FlipMode::Force).unwrap();
        assert!(d.verdict == Verdict::Yes && d.flip_used);
        let rational = SystemDescriptor::new(x.k0.clone(), SymbolicReal::from_rational(rat(1, 3)), true, "rational");
        let d = kconj_decision(&x, &rational, FlipMode::Auto).unwrap();
        assert_eq!(d.verdict, Verdict::Unknown);
        assert!(d.reason.contains("not faithful"));
    }

    /// Cocycle `ξ = h − η + η∘α` for a prescribed band value `h`.
    fn in_band_instance(t: &Arc<GeneratorTable>, level: usize, hs: &[(bool, i64)], etas: &[i64]) -> (CircleCocycle, CircleCocycle, SymbolicReal) {
        let sys = s3();
        let m = sys.m(level) as usize;
        let th = theta(t);
        let h: Vec<SymbolicReal> = (0..m)
            .map(|r| {
                let (irr, j) = hs[r % hs.len()];
                if irr {
                    th.add_rational(&rat(j - 5, 20))
                } else {
                    SymbolicReal::from_rational(rat(j + 3, 20))
                }
            })
            .collect();
        let eta = CircleCocycle::new(&sys, level, (0..m).map(|r| cv(rat(etas[r % etas.len()], 12))).collect()).unwrap();
        let hc = CircleCocycle::from_reals(&sys, level, &h).unwrap();
        let xi = hc.sub(&eta.sub(&eta.shift_forward()).unwrap()).unwrap();
        let mean = h.iter().fold(SymbolicReal::zero(), |a, x| &a + x).scale(&rat(1, m as i64));
        (xi, eta, mean)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        #[test]
        fn random_pairs_are_projections(
            level in 0usize..=3,
            hs in prop::collection::vec((any::<bool>(), 0i64..10), 1..5),
            etas in prop::collection::vec(0i64..12, 1..6),
        ) {
            let t = GeneratorTable::new();
            let (xi, eta, mean) = in_band_instance(&t, level, &hs, &etas);
            let p = rieffel(&xi, Some(&eta)).unwrap();
            prop_assert!(verify_projection(&p).unwrap().holds);
            let tr = trace_of(&p, &InvariantMeasure::of(&xi.system)).unwrap();
            prop_assert!(tr.agree);
            prop_assert_eq!(tr.by_lift, mean);
            let mut bad = p.clone();
            bad.data.f[0] = bad.data.f[0].scale(&rat(1, 2));
            prop_assert!(!verify_projection(&bad).unwrap().degree0);
        }

        #[test]
        fn kconj_symmetry(a in 0i64..27, b in 0i64..27, k in -3i64..3, two in any::<bool>()) {
            let t = GeneratorTable::new();
            let th = theta(&t);
            let s = if two { "2*3^inf" } else { "3^inf" };
            let g = odometer_k0(&s.parse().unwrap()).unwrap();
            let h = odometer_k0(&"3^inf".parse().unwrap()).unwrap();
            let x = SystemDescriptor::new(g.clone(), th.scale_int(k.max(1)).add_rational(&rat(a, 27)), true, "x");
            let y = SystemDescriptor::new(h, th.add_rational(&rat(b, 9)), true, "y");
            let xy = kconj_decision(&x, &y, FlipMode::Auto).unwrap().verdict;
            prop_assert_eq!(xy, kconj_decision(&y, &x, FlipMode::Auto).unwrap().verdict);
            prop_assert_eq!(kconj_decision(&x, &x, FlipMode::Auto).unwrap().verdict, Verdict::Yes);
            let shifted = SystemDescriptor::new(g.clone(), x.mean.add_rational(&rat(k, 81)), true, "x'");
            prop_assert_eq!(kconj_decision(&shifted, &y, FlipMode::Auto).unwrap().verdict, xy);
            let flipped = SystemDescriptor::new(g, SymbolicReal::one() - &x.mean, true, "-x");
            prop_assert_eq!(kconj_decision(&flipped, &y, FlipMode::Auto).unwrap().verdict, xy);
        }

        #[test]
        fn cone_additive_with_order_unit(n1 in -3i64..4, n2 in -3i64..4, f1 in prop::collection::vec(-4i64..5, 3), f2 in prop::collection::vec(-4i64..5, 3)) {
            let t = GeneratorTable::new();
            let sys = s3();
            let xi = CircleCocycle::constant(&sys, CircleValue::new(theta(&t)));
            let inv = invariant_of(&xi, None, 8).unwrap();
            let sum: Vec<i64> = f1.iter().zip(&f2).map(|(a, b)| a + b).collect();
            if inv.cone_contains(&sys, n1, 1, &f1).unwrap() && inv.cone_contains(&sys, n2, 1, &f2).unwrap() {
                prop_assert!(inv.cone_contains(&sys, n1 + n2, 1, &sum).unwrap());
            }
            // k·[1] − (n, f) is positive for some small k
            let neg: Vec<i64> = f1.iter().map(|a| -a).collect();
            let dominated = (0..=20).any(|k| {
                let g: Vec<i64> = neg.iter().map(|a| a + k).collect();
                inv.cone_contains(&sys, -n1, 1, &g).unwrap()
            });
            prop_assert!(dominated);
        }
    }
}
