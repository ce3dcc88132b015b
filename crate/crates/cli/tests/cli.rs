use std::io::Write;
use std::process::{Command, Output};

use cantor_k_cli::{bundled, emit_report, run_text, Format, Options, Report, BUNDLED};
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cantor-k"))
}

fn run_file(text: &str, args: &[&str], env: Option<(&str, &str)>) -> Output {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    let mut cmd = bin();
    cmd.arg("run").arg(f.path()).args(args).env_remove("CANTOR_K_BUDGET");
    if let Some((k, v)) = env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn report(name: &str) -> Report {
    run_text(bundled(name).unwrap(), &Options::default()).unwrap()
}

fn verdicts(r: &Report) -> Vec<Option<&str>> {
    r.results.iter().map(|c| c.verdict.as_deref()).collect()
}

/// Smallest non-trivial cocycle whose coboundary witness sits at level 8.
const DEEP: &str = r#"{
  "version": 1,
  "systems": [{"name": "t3", "mults": [3], "extend": "x3"}],
  "cocycles": [{"name": "tiny", "system": "t3", "level": 0, "values": ["1/6561"]}],
  "commands": [{"op": "rigidity", "cocycle": "tiny"}]
}"#;

#[test]
fn bundled_scenarios_succeed() {
    for (name, _) in BUNDLED {
        let out = bin().args(["run", name]).env_remove("CANTOR_K_BUDGET").output().unwrap();
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        let r: Report = serde_json::from_slice(&out.stdout).unwrap();
        assert!(r.results.iter().all(|c| c.error.is_none()), "{name}");
    }
}

#[test]
fn reversing_scenario() {
    let r = report("reversing_triadic");
    let data = &r.results[0].data;
    assert_eq!(r.results[0].reverified, Some(true));
    assert_eq!(data["orbit_identities"], Value::from(vec![true; 6]));
    assert_eq!(data["invariant"]["k1"]["torsion_order"], 2);
    assert_eq!(data["invariant"]["k0"]["group"], "Z[1/3^inf]");
    // t ↦ −(t + θ) is an involution: an odd number of steps from 0 ends at −θ
    assert_eq!(r.results[4].data["last"]["exact"], "17/15 - phi");
}

#[test]
fn denjoy_scenario() {
    let r = report("denjoy_pair");
    assert_eq!(verdicts(&r), vec![Some("no"), Some("yes"), Some("yes"), Some("no")]);
}

#[test]
fn rotation_scenario() {
    let r = report("triadic_rotation");
    assert_eq!(r.results[0].data["value"], "1/9");
    assert_eq!(verdicts(&r)[1..6].to_vec(), vec![Some("yes"), Some("yes"), Some("no"), Some("yes"), Some("no")]);
    assert!(r.results.iter().all(|c| c.reverified != Some(false)));
    let r = report("rotation_numbers");
    assert_eq!(r.results[0].data["value"], "5/6");
    assert_eq!(r.results[3].data["t"], "3/10");
}

#[test]
fn empty_scenario() {
    let out = bin().args(["run", "empty.scn"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let r: Report = serde_json::from_slice(&out.stdout).unwrap();
    assert!(r.results.is_empty());
}

#[test]
fn reports_round_trip_and_repeat() {
    for (name, text) in BUNDLED {
        let a = run_text(text, &Options::default()).unwrap();
        let json = emit_report(&a, Format::Json);
        let back: Report = serde_json::from_str(&json).unwrap();
        assert_eq!(back, a, "{name}");
        let b = run_text(text, &Options::default()).unwrap();
        assert_eq!(emit_report(&b, Format::Json), json, "{name}");
        let par = run_text(text, &Options { parallel: true, ..Options::default() }).unwrap();
        assert_eq!(emit_report(&par, Format::Json), json, "{name}");
        let table = emit_report(&a, Format::Table);
        assert_eq!(table.lines().count(), a.results.len() + 1);
    }
}

#[test]
fn strict_and_budgets() {
    let out = run_file(DEEP, &[], None);
    assert_eq!(out.status.code(), Some(0));
    let out = run_file(DEEP, &["--budget-level", "4"], None);
    assert_eq!(out.status.code(), Some(0));
    let r: Report = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r.results[0].verdict.as_deref(), Some("unknown"));
    assert!(r.results[0].reason.is_some());
    assert_eq!(run_file(DEEP, &["--budget-level", "4", "--strict"], None).status.code(), Some(2));
    assert_eq!(run_file(DEEP, &["--strict"], Some(("CANTOR_K_BUDGET", "4"))).status.code(), Some(2));
    assert_eq!(run_file(DEEP, &["--strict"], None).status.code(), Some(0));
}

#[test]
fn errors_carry_positions() {
    let out = run_file("{\n  \"version\": 1,\n  \"commands\": [\n    {\"op\": \"minimality\" \"cocycle\": \"x\"}\n  ]\n}", &[], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));

    let missing = "{\n  \"version\": 1,\n  \"commands\": [\n    {\"op\": \"minimality\", \"cocycle\": \"nowhere\"}\n  ]\n}";
    let out = run_file(missing, &[], None);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 4") && err.contains("nowhere"), "{err}");

    let zero = DEEP.replace("\"cocycle\": \"tiny\"}", "\"cocycle\": \"tiny\", \"budget\": 0}");
    assert_eq!(run_file(&zero, &[], None).status.code(), Some(1));
    assert_eq!(run_file(&DEEP.replace("\"version\": 1", "\"version\": 7"), &[], None).status.code(), Some(1));

    // runtime failures are reported per command and exit 1
    let band = DEEP.replace("{\"op\": \"rigidity\", \"cocycle\": \"tiny\"}", "{\"op\": \"rieffel\", \"xi\": \"tiny\"}");
    let out = run_file(&band, &[], None);
    assert_eq!(out.status.code(), Some(1));
    let r: Report = serde_json::from_slice(&out.stdout).unwrap();
    assert!(r.results[0].error.as_deref().unwrap().contains("band"));
}

#[test]
fn examples_listing() {
    let out = bin().arg("examples").output().unwrap();
    let listed = String::from_utf8(out.stdout).unwrap();
    assert_eq!(listed.lines().count(), BUNDLED.len());
    let out = bin().args(["examples", "denjoy_pair"]).output().unwrap();
    assert!(String::from_utf8(out.stdout).unwrap().contains("\"kconj\""));
    assert_eq!(bin().args(["examples", "nope"]).output().unwrap().status.code(), Some(1));
}

#[test]
fn flip_modes() {
    let r = run_text(
        bundled("denjoy_pair").unwrap(),
        &Options {
            flip: cantor_k::crossed::FlipMode::Force,
            ..Options::default()
        },
    )
    .unwrap();
    assert_eq!(verdicts(&r), vec![Some("no"), Some("yes"), Some("yes"), Some("no")]);
    assert!(r.results[1].data["flip_used"].as_bool().unwrap());
}
