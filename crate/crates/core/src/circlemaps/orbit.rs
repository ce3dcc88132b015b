//! Orbits of `(x, t) ↦ (αx, φ_x(t))` and the orientation-reversing
//! minimal example over the triadic odometer.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::One;
use serde::Serialize;

use super::pl::PLCocycle;
use crate::cantor::{OdometerSystem, SignCocycle};
use crate::cocycle::CircleCocycle;
use crate::exact::{CircleValue, Rational, SymbolicReal};
use crate::{Error, Result};

/// Cells of the fixed dyadic partition used by the discrepancy statistic.
pub const DISCREPANCY_CELLS: usize = 64;

/// Largest discrepancy accepted as "equidistributed" for 10⁴-step orbits.
/// Calibrated on rotations by `φ − 2/15`, `√2 − 1` and `√3/5` from three
/// starting points each, all of which stay below 0.002.
pub const DISCREPANCY_THRESHOLD: f64 = 0.005;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SimulationMode {
    Exact,
    Dyadic,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrbitPoint {
    pub step: u64,
    pub residue: u64,
    pub exact: Option<CircleValue>,
    pub approx: f64,
}

/// Coverage is the fraction of the 64 cells visited; discrepancy is
/// `max_cell |visits/N − 1/64|` over steps `1..=N`.
#[derive(Debug, Clone, Serialize)]
pub struct OrbitDiagnostics {
    pub cells: usize,
    pub coverage: f64,
    pub discrepancy: f64,
    pub equidistributed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrbitSample {
    pub level: usize,
    pub steps: u64,
    pub mode: SimulationMode,
    pub points: Vec<OrbitPoint>,
    pub diagnostics: OrbitDiagnostics,
}

impl OrbitSample {
    pub fn last(&self) -> &OrbitPoint {
        self.points.last().expect("orbit includes its start")
    }

    /// Tabular dump: step, residue, fibre value.
    pub fn to_table(&self) -> String {
        let mut out = String::from("step\tresidue\tvalue\n");
        for p in &self.points {
            let v = p.exact.as_ref().map_or_else(|| format!("{:.12}", p.approx), |e| e.to_string());
            out.push_str(&format!("{}\t{}\t{}\n", p.step, p.residue, v));
        }
        out
    }
}

fn diagnostics(values: impl Iterator<Item = f64>) -> OrbitDiagnostics {
    let mut counts = [0u64; DISCREPANCY_CELLS];
    let mut n = 0u64;
    for v in values {
        let cell = ((v.rem_euclid(1.0)) * DISCREPANCY_CELLS as f64) as usize;
        counts[cell.min(DISCREPANCY_CELLS - 1)] += 1;
        n += 1;
    }
    let uniform = 1.0 / DISCREPANCY_CELLS as f64;
    let n = n.max(1) as f64;
    let discrepancy = counts
        .iter()
        .map(|&c| (c as f64 / n - uniform).abs())
        .fold(0.0, f64::max);
    let coverage = counts.iter().filter(|&&c| c > 0).count() as f64 / DISCREPANCY_CELLS as f64;
    OrbitDiagnostics {
        cells: DISCREPANCY_CELLS,
        coverage,
        discrepancy,
        equidistributed: discrepancy < DISCREPANCY_THRESHOLD,
    }
}

fn isometric(phi: &PLCocycle) -> bool {
    phi.maps.iter().all(|m| m.lift.as_rotation().is_some())
}

/// Forward orbit of `(x, t)` with `x` the level-`phi.level` cylinder of
/// the given residue. Exact mode needs isometric fibre maps so values
/// stay in the field of the generators.
pub fn simulate(phi: &PLCocycle, residue: u64, start: &CircleValue, steps: u64, mode: SimulationMode) -> Result<OrbitSample> {
    let m = phi.system.m(phi.level);
    let mut points = Vec::with_capacity(steps as usize + 1);
    let mut r = residue % m;
    match mode {
        SimulationMode::Exact => {
            if !isometric(phi) {
                return Err(Error::Precondition("exact simulation needs rotation or reflection fibres".into()));
            }
            let mut t = start.clone();
            points.push(OrbitPoint { step: 0, residue: r, approx: t.to_f64(), exact: Some(t.clone()) });
            for step in 1..=steps {
                t = phi.at(r).apply(&t);
                r = (r + 1) % m;
                points.push(OrbitPoint { step, residue: r, approx: t.to_f64(), exact: Some(t.clone()) });
            }
        }
        SimulationMode::Dyadic => {
            let maps: Vec<_> = phi.maps.iter().map(|h| (h.reversing, h.lift.to_f64())).collect();
            let mut t = start.to_f64();
            points.push(OrbitPoint { step: 0, residue: r, approx: t, exact: None });
            for step in 1..=steps {
                let (rev, f) = &maps[(r % maps.len() as u64) as usize];
                let v = f.eval(t);
                t = (if *rev { -v } else { v }).rem_euclid(1.0);
                r = (r + 1) % m;
                points.push(OrbitPoint { step, residue: r, approx: t, exact: None });
            }
        }
    }
    let diagnostics = diagnostics(points.iter().skip(1).map(|p| p.approx));
    Ok(OrbitSample {
        level: phi.level,
        steps,
        mode,
        points,
        diagnostics,
    })
}

/// Runs `steps` inverse steps from `(x, t)`, exactly.
pub fn simulate_back(phi: &PLCocycle, residue: u64, value: &CircleValue, steps: u64) -> Result<(u64, CircleValue)> {
    if !isometric(phi) {
        return Err(Error::Precondition("exact simulation needs rotation or reflection fibres".into()));
    }
    let m = phi.system.m(phi.level);
    let inverses: Vec<_> = phi.maps.iter().map(|h| h.inverse()).collect();
    let mut r = residue % m;
    let mut t = value.clone();
    for _ in 0..steps {
        r = (r + m - 1) % m;
        t = inverses[(r % inverses.len() as u64) as usize].apply(&t);
    }
    Ok((r, t))
}

/// Truncation of the minimal orientation-reversing example at level `N`.
#[derive(Debug, Clone, Serialize)]
pub struct ReversingExample {
    pub level: usize,
    pub targets: Vec<CircleValue>,
    /// `s_n ∈ (−1/2, 1/2]` with `s_n ≡ t_n − t_{n−1}`.
    pub steps: Vec<SymbolicReal>,
    pub components: Vec<CircleCocycle>,
    pub xi: CircleCocycle,
    pub orientation: SignCocycle,
    /// `Σ_{k<3ⁿ} (−1)^k ξ_m(αᵏx₀)` equals `0` for `n < m` and `s_m` otherwise.
    pub component_sums_ok: bool,
    /// `Σ_{k<3ⁿ} (−1)^k ξ(αᵏx₀) = t_n` for `n ≤ N`.
    pub partial_sums_ok: bool,
    /// `|ξ_n| < 3⁻ⁿ` on every cylinder.
    pub bounds_ok: bool,
    /// `Σ_{n>N} 3⁻ⁿ`, the sup-distance to the untruncated cocycle.
    #[serde(serialize_with = "crate::kgroup::ser_rational")]
    pub truncation_error: Rational,
}

fn alternating_sum(xi: &CircleCocycle, steps: u64) -> CircleValue {
    (0..steps).fold(CircleValue::zero(), |acc, k| {
        let v = xi.at(k);
        if k % 2 == 0 {
            &acc + v
        } else {
            &acc - v
        }
    })
}

/// `ξ = Σ_{n ≤ N} ξ_n` over `3^∞` with `o ≡ 1`, where `ξ_n` vanishes on
/// the first `3ⁿ⁻¹` level-`n` cylinders and is `(−1)^k s_n/(2·3ⁿ⁻¹)` on
/// cylinder `k` otherwise.
pub fn reversing_example(targets: &[CircleValue]) -> Result<ReversingExample> {
    let n_max = targets.len();
    let sys: Arc<OdometerSystem> = Arc::new(OdometerSystem::uniform(3));
    sys.try_m(n_max)?;
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    let mut steps = Vec::with_capacity(n_max);
    let mut prev = CircleValue::zero();
    for t in targets {
        let d = t - &prev;
        let v = d.value().clone();
        let s = if v.cmp_exact(&SymbolicReal::from_rational(half.clone())).is_gt() {
            v.add_rational(&-Rational::one())
        } else {
            v
        };
        steps.push(s);
        prev = t.clone();
    }
    let mut components = Vec::with_capacity(n_max);
    let mut reals = Vec::with_capacity(n_max);
    for (i, s) in steps.iter().enumerate() {
        let n = i + 1;
        let m = sys.m(n);
        let lower = sys.m(n - 1);
        let scale = Rational::new(BigInt::one(), BigInt::from(2 * lower));
        let vals: Vec<SymbolicReal> = (0..m)
            .map(|k| {
                if k < lower {
                    SymbolicReal::zero()
                } else if k % 2 == 0 {
                    s.scale(&scale)
                } else {
                    -s.scale(&scale)
                }
            })
            .collect();
        components.push(CircleCocycle::from_reals(&sys, n, &vals)?);
        reals.push((n, vals));
    }
    let mut xi = CircleCocycle::zero(&sys).lift_to(n_max);
    for c in &components {
        xi = xi.add(c)?;
    }
    let mut component_sums_ok = true;
    for n in 1..=n_max {
        for (i, c) in components.iter().enumerate() {
            let m_idx = i + 1;
            let sum = alternating_sum(c, sys.m(n));
            let expect = if n < m_idx { CircleValue::zero() } else { CircleValue::new(steps[i].clone()) };
            component_sums_ok &= sum == expect;
        }
    }
    let partial_sums_ok = (1..=n_max).all(|n| alternating_sum(&xi, sys.m(n)) == targets[n - 1]);
    let bounds_ok = reals.iter().all(|(n, vals)| {
        let bound = SymbolicReal::from_rational(Rational::new(BigInt::one(), BigInt::from(sys.m(*n))));
        vals.iter().all(|v| v.abs().cmp_exact(&bound).is_lt())
    });
    let truncation_error = Rational::new(BigInt::one(), BigInt::from(2 * sys.m(n_max)));
    Ok(ReversingExample {
        level: n_max,
        targets: targets.to_vec(),
        steps,
        components,
        xi,
        orientation: SignCocycle::constant(1),
        component_sums_ok,
        partial_sums_ok,
        bounds_ok,
        truncation_error,
    })
}

impl ReversingExample {
    pub fn fibre_cocycle(&self) -> PLCocycle {
        PLCocycle::isometric(&self.orientation, &self.xi)
    }

    /// `(α × φ)^{3ⁿ}(x₀, 0) = (α^{3ⁿ}x₀, −t_n)` for `n ≤ N`, run exactly.
    pub fn orbit_identities(&self) -> Result<Vec<bool>> {
        let phi = self.fibre_cocycle();
        let sys = &self.xi.system;
        let run = simulate(&phi, 0, &CircleValue::zero(), sys.m(self.level), SimulationMode::Exact)?;
        Ok((1..=self.level)
            .map(|n| {
                let p = &run.points[sys.m(n) as usize];
                p.exact.as_ref() == Some(&-&self.targets[n - 1])
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circlemaps::pl::PlHomeo;
    use crate::cocycle::{minimal_sets_isom, Verdict};
    use crate::exact::{int, rat, GeneratorTable};

    fn cv(n: i64, d: i64) -> CircleValue {
        CircleValue::from_rational(rat(n, d))
    }

    #[test]
    fn reversing_example_small() {
        let e = reversing_example(&[cv(1, 4)]).unwrap();
        assert_eq!(e.steps, vec![SymbolicReal::from_rational(rat(1, 4))]);
        assert!(e.component_sums_ok && e.partial_sums_ok && e.bounds_ok);
        assert_eq!(alternating_sum(&e.xi, 3), cv(1, 4));
        let e = reversing_example(&[cv(1, 4), cv(1, 3)]).unwrap();
        assert_eq!(e.steps[1], SymbolicReal::from_rational(rat(1, 12)));
        assert!(e.component_sums_ok && e.partial_sums_ok && e.bounds_ok);
        let e = reversing_example(&vec![cv(0, 1); 3]).unwrap();
        assert!(e.xi.is_zero());
        let e = reversing_example(&[cv(3, 4), cv(1, 8)]).unwrap();
        assert_eq!(e.steps[0], SymbolicReal::from_rational(rat(-1, 4)));
    }

    #[test]
    fn reversing_example_orbit() {
        let t = GeneratorTable::new();
        let th = t.golden("theta").unwrap();
        let targets: Vec<CircleValue> = (1..=4).map(|k| CircleValue::new(th.scale_int(k))).collect();
        let e = reversing_example(&targets).unwrap();
        assert!(e.component_sums_ok && e.partial_sums_ok && e.bounds_ok);
        assert_eq!(e.orbit_identities().unwrap(), vec![true; 4]);
        let run = simulate(&e.fibre_cocycle(), 0, &CircleValue::zero(), 81, SimulationMode::Exact).unwrap();
        assert_eq!(run.last().exact.as_ref(), Some(&-&targets[3]));
        // the truncation is locally constant, hence not minimal
        let isom = minimal_sets_isom(&e.orientation, &e.xi, 12).unwrap();
        assert_eq!((isom.minimal, isom.multiple, isom.reverified), (Verdict::No, Some(1), Some(true)));
    }

    #[test]
    fn equidistribution_calibration() {
        let sys = Arc::new(OdometerSystem::uniform(3));
        let t = GeneratorTable::new();
        let angles = [
            t.golden("phi").unwrap().add_rational(&rat(-2, 15)),
            t.sqrt("s2", int(2)).unwrap().add_rational(&rat(-1, 1)),
            t.sqrt("s3", int(3)).unwrap().scale(&rat(1, 5)),
        ];
        for th in &angles {
            let phi = PLCocycle::constant(&sys, PlHomeo::rotation(th.clone()));
            for seed in [cv(0, 1), cv(1, 3), cv(5, 7)] {
                let run = simulate(&phi, 0, &seed, 10_000, SimulationMode::Dyadic).unwrap();
                assert!(run.diagnostics.discrepancy < 0.002, "{}", run.diagnostics.discrepancy);
                assert!(run.diagnostics.equidistributed);
                assert_eq!(run.diagnostics.coverage, 1.0);
            }
        }
        let third = PLCocycle::constant(&sys, PlHomeo::rotation(SymbolicReal::from_rational(rat(1, 3))));
        let run = simulate(&third, 0, &cv(0, 1), 10_000, SimulationMode::Exact).unwrap();
        assert_eq!(run.diagnostics.coverage, 3.0 / 64.0);
        assert!(!run.diagnostics.equidistributed);
    }

    #[test]
    fn exact_runs_reverse() {
        let sys = Arc::new(OdometerSystem::uniform(3));
        let t = GeneratorTable::new();
        let th = t.golden("theta").unwrap();
        let xi = CircleCocycle::from_reals(&sys, 1, &[th.clone(), SymbolicReal::from_rational(rat(1, 5)), -th]).unwrap();
        let o = SignCocycle::new(&sys, 1, vec![1, 0, 0]).unwrap();
        let phi = PLCocycle::isometric(&o, &xi);
        let start = cv(2, 7);
        let run = simulate(&phi, 1, &start, 50, SimulationMode::Exact).unwrap();
        let end = run.last();
        let (r, v) = simulate_back(&phi, end.residue, end.exact.as_ref().unwrap(), 50).unwrap();
        assert_eq!((r, v), (1, start));
        let dy = simulate(&phi, 1, &cv(2, 7), 50, SimulationMode::Dyadic).unwrap();
        assert!((dy.last().approx - end.approx).abs() < 1e-9);
    }
}
