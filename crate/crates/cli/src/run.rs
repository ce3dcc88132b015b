use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use cantor_k::cantor::{parse_growth, InvariantMeasure, OdometerSystem, SignCocycle};
use cantor_k::circlemaps::{
    reversing_example, rotation_number, rotation_target, simulate, CircleArc, PLCocycle, PlHomeo, PlLift,
    SimulationMode,
};
use cantor_k::cocycle::{
    bott, coboundary_test, control, minimal_sets_isom, minimality_test, perturb, perturb_signed, rigidity_test,
    CircleCocycle, CocycleDecision,
};
use cantor_k::crossed::{
    bott_identity_check, denjoy_descriptor, invariant_of, kconj_decision, rieffel, trace_of, verify_projection,
    FlipMode, SystemDescriptor,
};
use cantor_k::exact::{CircleValue, GeneratorTable, Rational, SymbolicReal};
use cantor_k::kgroup::k0_class;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::report::{CommandResult, Report};
use crate::scenario::{locate, Command, DescriptorDecl, Mode, Scenario, SCHEMA_VERSION};
use crate::CliError;

#[derive(Debug, Clone)]
pub struct Options {
    pub parallel: bool,
    /// Default search depth for commands without their own budget.
    pub budget_level: usize,
    pub flip: FlipMode,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            parallel: false,
            budget_level: cantor_k::cocycle::DEFAULT_MAX_LEVEL,
            flip: FlipMode::Auto,
        }
    }
}

struct Context {
    table: Arc<GeneratorTable>,
    systems: BTreeMap<String, Arc<OdometerSystem>>,
    cocycles: BTreeMap<String, CircleCocycle>,
    signs: BTreeMap<String, SignCocycle>,
    maps: BTreeMap<String, PlHomeo>,
}

type Outcome = cantor_k::Result<CommandResult>;

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("results serialize")
}

fn rational(s: &str) -> cantor_k::Result<Rational> {
    s.trim()
        .parse::<Rational>()
        .map_err(|_| cantor_k::Error::Invalid(format!("`{s}` is not a rational number")))
}

impl Context {
    fn build(sc: &Scenario, text: &str) -> Result<Self, CliError> {
        let fail = |name: &str, e: String| {
            let (line, column) = locate(text, &format!("\"{name}\"")).unwrap_or((0, 0));
            CliError::Validation { line, column, message: e }
        };
        let table = GeneratorTable::new();
        for g in &sc.generators {
            let r = match (g.kind.as_str(), &g.radicand) {
                ("golden", None) => table.golden(&g.name).map_err(|e| e.to_string()),
                ("sqrt", Some(r)) => rational(r)
                    .map_err(|e| e.to_string())
                    .and_then(|q| table.sqrt(&g.name, q).map_err(|e| e.to_string())),
                (k, _) => Err(format!("generator kind `{k}` needs `golden` without radicand or `sqrt` with one")),
            };
            r.map_err(|e| fail(&g.name, e))?;
        }
        let mut systems = BTreeMap::new();
        for s in &sc.systems {
            let growth = s.extend.as_deref().map(parse_growth).transpose().map_err(|e| fail(&s.name, e.to_string()))?;
            let sys = OdometerSystem::new(s.mults.clone(), growth).map_err(|e| fail(&s.name, e.to_string()))?;
            systems.insert(s.name.clone(), Arc::new(sys));
        }
        let mut cocycles = BTreeMap::new();
        for c in &sc.cocycles {
            let sys = &systems[&c.system];
            let values = c
                .values
                .iter()
                .map(|v| SymbolicReal::parse(v, Some(&table)).map(CircleValue::new))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| fail(&c.name, e.to_string()))?;
            let xi = CircleCocycle::new(sys, c.level, values).map_err(|e| fail(&c.name, e.to_string()))?;
            cocycles.insert(c.name.clone(), xi);
        }
        let mut signs = BTreeMap::new();
        for s in &sc.signs {
            let o = SignCocycle::new(&systems[&s.system], s.level, s.values.clone()).map_err(|e| fail(&s.name, e.to_string()))?;
            signs.insert(s.name.clone(), o);
        }
        let mut maps = BTreeMap::new();
        for m in &sc.maps {
            let build = || -> cantor_k::Result<PlHomeo> {
                let knots = m.knots.iter().map(|k| SymbolicReal::parse(k, Some(&table))).collect::<Result<Vec<_>, _>>()?;
                let value0 = SymbolicReal::parse(&m.value0, Some(&table))?;
                let slopes = m.slopes.iter().map(|s| rational(s)).collect::<cantor_k::Result<Vec<_>>>()?;
                Ok(PlHomeo::new(m.reversing, PlLift::new(knots, value0, slopes)?))
            };
            maps.insert(m.name.clone(), build().map_err(|e| fail(&m.name, e.to_string()))?);
        }
        Ok(Context {
            table,
            systems,
            cocycles,
            signs,
            maps,
        })
    }

    fn sym(&self, s: &str) -> cantor_k::Result<SymbolicReal> {
        Ok(SymbolicReal::parse(s, Some(&self.table))?)
    }

    fn descriptor(&self, d: &DescriptorDecl) -> cantor_k::Result<SystemDescriptor> {
        match (&d.cocycle, &d.denjoy, &d.mean) {
            (Some(c), None, None) => SystemDescriptor::of_cocycle(&self.cocycles[c]),
            (None, Some(theta), Some(mean)) => denjoy_descriptor(&self.sym(theta)?, &self.sym(mean)?),
            _ => Err(cantor_k::Error::Invalid(
                "descriptor needs either `cocycle` or both `denjoy` and `mean`".into(),
            )),
        }
    }
}

fn verdict_str<T: Serialize>(v: &T) -> String {
    to_value(v).as_str().unwrap_or_default().to_string()
}

fn decision(index: usize, op: &str, d: &CocycleDecision) -> CommandResult {
    CommandResult {
        index,
        op: op.into(),
        verdict: Some(verdict_str(&d.verdict)),
        reason: Some(d.reason.clone()),
        reverified: d.reverified,
        error: None,
        data: to_value(d),
    }
}

fn plain(index: usize, op: &str, reverified: Option<bool>, data: Value) -> CommandResult {
    CommandResult {
        index,
        op: op.into(),
        verdict: None,
        reason: None,
        reverified,
        error: None,
        data,
    }
}

fn execute(ctx: &Context, index: usize, cmd: &Command, opts: &Options) -> Outcome {
    let op = cmd.name();
    let depth = |b: &Option<usize>| b.unwrap_or(opts.budget_level);
    Ok(match cmd {
        Command::K0Class { system, level, f } => {
            let sys = &ctx.systems[system];
            let class = k0_class(sys, *level, f);
            plain(index, op, None, json!({ "value": class.rational_value().map(|q| q.to_string()) }))
        }
        Command::Coboundary { cocycle, budget } => decision(index, op, &coboundary_test(&ctx.cocycles[cocycle], depth(budget))?),
        Command::Minimality { cocycle, budget } => decision(index, op, &minimality_test(&ctx.cocycles[cocycle], depth(budget))?),
        Command::Rigidity { cocycle, budget } => decision(index, op, &rigidity_test(&ctx.cocycles[cocycle], depth(budget))?),
        Command::MinimalSets { cocycle, signs, budget } => {
            let r = minimal_sets_isom(&ctx.signs[signs], &ctx.cocycles[cocycle], depth(budget))?;
            CommandResult {
                index,
                op: op.into(),
                verdict: Some(verdict_str(&r.minimal)),
                reason: Some(r.skew.reason.clone()),
                reverified: r.reverified,
                error: None,
                data: to_value(&r),
            }
        }
        Command::Perturb { cocycle, eps, signs } => {
            let xi = &ctx.cocycles[cocycle];
            let eps = rational(eps)?;
            let p = match signs {
                Some(s) => perturb_signed(xi, &ctx.signs[s], &eps)?,
                None => perturb(xi, &eps)?,
            };
            plain(index, op, Some(p.verified), to_value(&p))
        }
        Command::Bott { eta, xi } => {
            let b = bott(&ctx.cocycles[eta], None, &ctx.cocycles[xi].canonical_lift())?;
            plain(index, op, None, to_value(&b))
        }
        Command::Control { xi1, xi2, f_level, f, eps } => {
            let (a, b) = (&ctx.cocycles[xi1], &ctx.cocycles[xi2]);
            let c = control(&a.system, &a.canonical_lift(), &b.canonical_lift(), *f_level, f, &rational(eps)?)?;
            plain(index, op, Some(c.residual_ok && c.bott_ok), to_value(&c))
        }
        Command::Invariant { cocycle, signs, budget } => {
            let inv = invariant_of(&ctx.cocycles[cocycle], signs.as_ref().map(|s| &ctx.signs[s]), depth(budget))?;
            let mut r = plain(index, op, None, to_value(&inv));
            if inv.k0.cone == cantor_k::crossed::ConeKind::Formal {
                r.reason = Some(inv.notes.join("; "));
            }
            r
        }
        Command::Rieffel { xi, eta } => {
            let x = &ctx.cocycles[xi];
            let p = rieffel(x, eta.as_ref().map(|e| &ctx.cocycles[e]))?;
            let ids = verify_projection(&p)?;
            let tr = trace_of(&p, &InvariantMeasure::of(&x.system))?;
            let holds = ids.holds && tr.agree;
            CommandResult {
                index,
                op: op.into(),
                verdict: Some(if holds { "yes" } else { "no" }.into()),
                reason: (!ids.failures.is_empty()).then(|| ids.failures.join("; ")),
                reverified: Some(holds),
                error: None,
                data: json!({
                    "breakpoints": to_value(&p.breakpoints()),
                    "identities": to_value(&ids),
                    "trace": to_value(&tr),
                }),
            }
        }
        Command::BottIdentity { xi, eta } => {
            let r = bott_identity_check(&ctx.cocycles[xi].canonical_lift(), &ctx.cocycles[eta])?;
            let ok = r.class_identity && r.trace_identity;
            CommandResult {
                index,
                op: op.into(),
                verdict: Some(if ok { "yes" } else { "no" }.into()),
                reason: None,
                reverified: Some(ok),
                error: None,
                data: to_value(&r),
            }
        }
        Command::Kconj { a, b } => {
            let d = kconj_decision(&ctx.descriptor(a)?, &ctx.descriptor(b)?, opts.flip)?;
            CommandResult {
                index,
                op: op.into(),
                verdict: Some(verdict_str(&d.verdict)),
                reason: Some(d.reason.clone()),
                reverified: None,
                error: None,
                data: to_value(&d),
            }
        }
        Command::Reversing { targets } => {
            let ts = targets.iter().map(|t| ctx.sym(t).map(CircleValue::new)).collect::<cantor_k::Result<Vec<_>>>()?;
            let e = reversing_example(&ts)?;
            let orbit = e.orbit_identities()?;
            let inv = invariant_of(&e.xi, Some(&e.orientation), opts.budget_level.max(e.level))?;
            let ok = e.component_sums_ok && e.partial_sums_ok && e.bounds_ok && orbit.iter().all(|&b| b);
            plain(
                index,
                op,
                Some(ok),
                json!({
                    "cocycle": to_value(&e),
                    "orbit_identities": orbit,
                    "invariant": to_value(&inv),
                }),
            )
        }
        Command::Rotation { map, budget } => {
            let r = rotation_number(&ctx.maps[map], budget.unwrap_or(128))?;
            plain(index, op, None, to_value(&r))
        }
        Command::RotationTarget { map, arc } => {
            let arc = CircleArc::new(rational(&arc[0])?, rational(&arc[1])?)?;
            let t = rotation_target(&ctx.maps[map], &arc)?;
            plain(index, op, Some(t.certified), to_value(&t))
        }
        Command::Orbit { cocycle, signs, start, steps, mode, residue } => {
            let xi = &ctx.cocycles[cocycle];
            let o = signs.as_ref().map_or_else(|| SignCocycle::constant(0), |s| ctx.signs[s].clone());
            let phi = PLCocycle::isometric(&o, xi);
            let mode = match mode {
                Mode::Exact => SimulationMode::Exact,
                Mode::Dyadic => SimulationMode::Dyadic,
            };
            let run = simulate(&phi, residue.unwrap_or(0), &CircleValue::new(ctx.sym(start)?), *steps, mode)?;
            plain(
                index,
                op,
                None,
                json!({
                    "level": run.level,
                    "steps": run.steps,
                    "last": to_value(run.last()),
                    "diagnostics": to_value(&run.diagnostics),
                }),
            )
        }
    })
}

fn run_one(ctx: &Context, index: usize, cmd: &Command, opts: &Options) -> CommandResult {
    execute(ctx, index, cmd, opts).unwrap_or_else(|e| CommandResult {
        index,
        op: cmd.name().into(),
        verdict: None,
        reason: None,
        reverified: None,
        error: Some(e.to_string()),
        data: Value::Null,
    })
}

/// Parses, validates and runs a scenario given as text.
pub fn run_text(text: &str, opts: &Options) -> Result<Report, CliError> {
    let sc = Scenario::parse(text)?;
    let ctx = Context::build(&sc, text)?;
    let results = if opts.parallel {
        sc.commands.par_iter().enumerate().map(|(i, c)| run_one(&ctx, i, c, opts)).collect()
    } else {
        sc.commands.iter().enumerate().map(|(i, c)| run_one(&ctx, i, c, opts)).collect()
    };
    Ok(Report {
        version: SCHEMA_VERSION,
        results,
    })
}

pub fn run_scenario(path: &Path, opts: &Options) -> Result<Report, CliError> {
    let text = std::fs::read_to_string(path)?;
    run_text(&text, opts)
}
