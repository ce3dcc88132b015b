//! Scenario documents: declarations plus a command list, as JSON.

use std::collections::{BTreeMap, BTreeSet};

use serde::Deserialize;

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub version: u32,
    #[serde(default)]
    pub generators: Vec<GeneratorDecl>,
    #[serde(default)]
    pub systems: Vec<SystemDecl>,
    #[serde(default)]
    pub cocycles: Vec<CocycleDecl>,
    #[serde(default)]
    pub signs: Vec<SignDecl>,
    #[serde(default)]
    pub maps: Vec<MapDecl>,
    #[serde(default)]
    pub commands: Vec<Command>,
}

/// `{"name": "phi", "kind": "golden"}` or
/// `{"name": "r2", "kind": "sqrt", "radicand": "2"}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorDecl {
    pub name: String,
    pub kind: String,
    pub radicand: Option<String>,
}

/// Odometer with multiplicities `m₁, m₂, …` and an optional rule such
/// as `"x3"` for levels past the list.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDecl {
    pub name: String,
    pub mults: Vec<u64>,
    pub extend: Option<String>,
}

/// Circle cocycle given by its values on level-`level` cylinders.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CocycleDecl {
    pub name: String,
    pub system: String,
    pub level: usize,
    pub values: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignDecl {
    pub name: String,
    pub system: String,
    pub level: usize,
    pub values: Vec<u8>,
}

/// PL circle homeomorphism: lift with the given knots in `[0, 1)`, value
/// at the first knot and slopes; `reversing` composes with `t ↦ −t`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapDecl {
    pub name: String,
    pub knots: Vec<String>,
    pub value0: String,
    pub slopes: Vec<String>,
    #[serde(default)]
    pub reversing: bool,
}

/// A crossed-product descriptor: either an odometer cocycle, or a Denjoy
/// system with rotation number `denjoy` skewed by a rotation of `mean`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DescriptorDecl {
    pub cocycle: Option<String>,
    pub denjoy: Option<String>,
    pub mean: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Dyadic,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Command {
    K0Class {
        system: String,
        level: usize,
        f: Vec<i64>,
    },
    Coboundary {
        cocycle: String,
        budget: Option<usize>,
    },
    Minimality {
        cocycle: String,
        budget: Option<usize>,
    },
    Rigidity {
        cocycle: String,
        budget: Option<usize>,
    },
    MinimalSets {
        cocycle: String,
        signs: String,
        budget: Option<usize>,
    },
    Perturb {
        cocycle: String,
        eps: String,
        signs: Option<String>,
    },
    Bott {
        eta: String,
        xi: String,
    },
    Control {
        xi1: String,
        xi2: String,
        f_level: usize,
        f: Vec<i64>,
        eps: String,
    },
    Invariant {
        cocycle: String,
        signs: Option<String>,
        budget: Option<usize>,
    },
    Rieffel {
        xi: String,
        eta: Option<String>,
    },
    BottIdentity {
        xi: String,
        eta: String,
    },
    Kconj {
        a: DescriptorDecl,
        b: DescriptorDecl,
    },
    Reversing {
        targets: Vec<String>,
    },
    Rotation {
        map: String,
        budget: Option<u64>,
    },
    RotationTarget {
        map: String,
        arc: [String; 2],
    },
    Orbit {
        cocycle: String,
        signs: Option<String>,
        start: String,
        steps: u64,
        mode: Mode,
        residue: Option<u64>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::K0Class { .. } => "k0_class",
            Command::Coboundary { .. } => "coboundary",
            Command::Minimality { .. } => "minimality",
            Command::Rigidity { .. } => "rigidity",
            Command::MinimalSets { .. } => "minimal_sets",
            Command::Perturb { .. } => "perturb",
            Command::Bott { .. } => "bott",
            Command::Control { .. } => "control",
            Command::Invariant { .. } => "invariant",
            Command::Rieffel { .. } => "rieffel",
            Command::BottIdentity { .. } => "bott_identity",
            Command::Kconj { .. } => "kconj",
            Command::Reversing { .. } => "reversing",
            Command::Rotation { .. } => "rotation",
            Command::RotationTarget { .. } => "rotation_target",
            Command::Orbit { .. } => "orbit",
        }
    }

    fn budget(&self) -> Option<u64> {
        match self {
            Command::Coboundary { budget, .. }
            | Command::Minimality { budget, .. }
            | Command::Rigidity { budget, .. }
            | Command::MinimalSets { budget, .. }
            | Command::Invariant { budget, .. } => budget.map(|b| b as u64),
            Command::Rotation { budget, .. } => *budget,
            _ => None,
        }
    }

    fn references(&self) -> Vec<(&'static str, &str)> {
        let mut v: Vec<(&'static str, &str)> = Vec::new();
        match self {
            Command::K0Class { system, .. } => v.push(("system", system)),
            Command::Coboundary { cocycle, .. }
            | Command::Minimality { cocycle, .. }
            | Command::Rigidity { cocycle, .. } => v.push(("cocycle", cocycle)),
            Command::MinimalSets { cocycle, signs, .. } => v.extend([("cocycle", cocycle.as_str()), ("signs", signs)]),
            Command::Perturb { cocycle, signs, .. }
            | Command::Invariant { cocycle, signs, .. }
            | Command::Orbit { cocycle, signs, .. } => {
                v.push(("cocycle", cocycle));
                v.extend(signs.as_deref().map(|n| ("signs", n)));
            }
            Command::Bott { eta, xi } | Command::BottIdentity { xi, eta } => {
                v.extend([("cocycle", eta.as_str()), ("cocycle", xi)])
            }
            Command::Control { xi1, xi2, .. } => v.extend([("cocycle", xi1.as_str()), ("cocycle", xi2)]),
            Command::Rieffel { xi, eta } => {
                v.push(("cocycle", xi));
                v.extend(eta.as_deref().map(|n| ("cocycle", n)));
            }
            Command::Kconj { a, b } => {
                v.extend([&a.cocycle, &b.cocycle].into_iter().filter_map(|c| c.as_deref()).map(|n| ("cocycle", n)))
            }
            Command::Reversing { .. } => {}
            Command::Rotation { map, .. } | Command::RotationTarget { map, .. } => v.push(("map", map)),
        }
        v
    }
}

/// 1-based line and column of the first occurrence of `needle`.
pub fn locate(text: &str, needle: &str) -> Option<(usize, usize)> {
    let offset = text.find(needle)?;
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = offset - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    Some((line, column))
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let sc: Scenario = serde_json::from_str(text).map_err(|e| CliError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        sc.validate(text)?;
        Ok(sc)
    }

    fn validate(&self, text: &str) -> Result<(), CliError> {
        let fail = |needle: &str, message: String| {
            let (line, column) = locate(text, needle).unwrap_or((0, 0));
            CliError::Validation { line, column, message }
        };
        if self.version != SCHEMA_VERSION {
            return Err(fail("\"version\"", format!("unsupported schema version {}", self.version)));
        }
        let mut names: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        let decls = self
            .generators
            .iter()
            .map(|g| ("generator", g.name.as_str()))
            .chain(self.systems.iter().map(|s| ("system", s.name.as_str())))
            .chain(self.cocycles.iter().map(|c| ("cocycle", c.name.as_str())))
            .chain(self.signs.iter().map(|s| ("signs", s.name.as_str())))
            .chain(self.maps.iter().map(|m| ("map", m.name.as_str())));
        for (kind, name) in decls {
            if !names.entry(kind).or_default().insert(name) {
                return Err(fail(&format!("\"{name}\""), format!("{kind} `{name}` declared twice")));
            }
        }
        let known = |kind: &str, name: &str| names.get(kind).is_some_and(|s| s.contains(name));
        for c in &self.cocycles {
            if !known("system", &c.system) {
                return Err(fail(&format!("\"{}\"", c.name), format!("cocycle `{}` refers to unknown system `{}`", c.name, c.system)));
            }
        }
        for s in &self.signs {
            if !known("system", &s.system) {
                return Err(fail(&format!("\"{}\"", s.name), format!("signs `{}` refer to unknown system `{}`", s.name, s.system)));
            }
        }
        for cmd in &self.commands {
            if cmd.budget() == Some(0) {
                return Err(fail("\"budget\"", format!("{}: budgets must be positive", cmd.name())));
            }
            for (kind, name) in cmd.references() {
                if !known(kind, name) {
                    return Err(fail(&format!("\"{name}\""), format!("{}: unknown {kind} `{name}`", cmd.name())));
                }
            }
        }
        Ok(())
    }
}
