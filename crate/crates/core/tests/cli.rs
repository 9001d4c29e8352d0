//! End-to-end tests of the `orderdual` binary: exit codes, determinism and
//! byte-stable outputs.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_orderdual"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("JSON on stdout")
}

#[test]
fn models_list_names_every_builtin() {
    let o = run(&["models-list"]);
    assert_eq!(code(&o), 0);
    for name in ["voter", "krone", "coop", "siegmund", "contact", "spin"] {
        assert!(stdout(&o).lines().any(|l| l.starts_with(name)), "{name}");
    }
}

#[test]
fn classify_voter_is_additive() {
    let o = run(&["classify", "--model", "voter", "--json"]);
    assert_eq!(code(&o), 0);
    let r = json(&o);
    assert_eq!(r["all_additive"], true);
    assert_eq!(r["maps"].as_array().unwrap().len(), 6);
}

#[test]
fn classify_coop_branching_is_monotone_not_additive() {
    let r = json(&run(&["classify", "--model", "coop", "--json"]));
    let maps = r["maps"].as_array().unwrap();
    let branching: Vec<&Value> = maps.iter().filter(|m| m["name"].as_str().unwrap().starts_with('b')).collect();
    assert_eq!(branching.len(), 6);
    for m in branching {
        assert_eq!(m["monotone"], true);
        assert_eq!(m["additive"], false);
        assert!(m["additive_witness"].is_string());
    }
    let table = stdout(&run(&["classify", "--model", "coop"]));
    assert!(table.lines().any(|l| l.starts_with("b012") && l.contains("yes") && l.contains("no")));
}

#[test]
fn malformed_json_is_a_parse_error() {
    let path = fixture("fixtures/malformed.json");
    let o = run(&["classify", "--model", path.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("parse error") && err.contains("line"), "{err}");
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(code(&run(&["verify"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
    assert_eq!(code(&run(&["verify", "--model", "voter", "--variant", "sharp"])), 2);
    assert_eq!(code(&run(&["verify", "--model", "voter", "--tol", "0"])), 2);
    assert_eq!(code(&run(&["verify", "--model", "voter", "--t", "-1"])), 2);
    assert_eq!(code(&run(&["classify", "--model", "nosuchmodel"])), 2);
    assert_eq!(code(&run(&["simulate", "--model", "voter:2", "--n", "0"])), 2);
}

#[test]
fn dualize_voter_gives_coalescing_walks() {
    let o = run(&["dualize", "--model", "voter:2"]);
    assert_eq!(code(&o), 0);
    let r = json(&o);
    assert_eq!(r["ok"], true);
    assert_eq!(r["variant"], "prime");
    // vot01 copies site 0 onto site 1; its dual moves a particle from 1 to 0 and coalesces
    let maps = r["dual"]["maps"].as_array().unwrap();
    let imgs: Vec<Vec<u64>> = maps.iter().map(|m| m["img"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect()).collect();
    assert!(imgs.contains(&vec![0, 1, 1, 1]));
    assert!(imgs.contains(&vec![0, 2, 2, 2]));
}

#[test]
fn dualize_krone_and_coop_star() {
    let r = json(&run(&["dualize", "--model", "krone:2"]));
    assert_eq!(r["ok"], true);
    assert_eq!(r["checks"].as_array().unwrap().len(), 10);
    let r = json(&run(&["dualize", "--model", "coop:3", "--variant", "star"]));
    assert_eq!(r["ok"], true);
    assert_eq!(r["variant"], "star");
    assert!(r["dual"]["space"]["labels"].as_array().unwrap().iter().any(|l| l == "{110,101}"));
}

#[test]
fn dualize_prime_on_coop_is_rejected() {
    let o = run(&["dualize", "--model", "coop:3", "--variant", "prime"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8(o.stderr).unwrap().contains("not additive"));
}

#[test]
fn emitted_dual_loads_and_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let report = json(&run(&["dualize", "--model", "siegmund:4"]));
    let path = dir.path().join("dual.json");
    std::fs::write(&path, serde_json::to_string(&report["dual"]).unwrap()).unwrap();
    let o = run(&["verify", "--model", path.to_str().unwrap(), "--logs", "10"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn builtins_verify() {
    for model in ["voter:3", "krone:2", "siegmund:4", "contact:2", "spin:2", "coop:3"] {
        let o = run(&["verify", "--model", model, "--logs", "20"]);
        assert_eq!(code(&o), 0, "{model}: {}", stdout(&o));
    }
    let o = run(&["verify", "--model", "krone:2", "--exact", "--logs", "5"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["checks"][1]["detail"]["residual"], "0");
}

#[test]
fn perturbed_rates_fail_verification() {
    let path = fixture("fixtures/perturbed.json");
    let o = run(&["verify", "--model", path.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let r = json(&o);
    assert_eq!(r["ok"], false);
    assert_eq!(r["first_failure"]["name"], "intertwining");
    let good = fixture("fixtures/siegmund_pair.json");
    assert_eq!(code(&run(&["verify", "--model", good.to_str().unwrap()])), 0);
}

#[test]
fn zero_horizon_passes() {
    let o = run(&["verify", "--model", "voter:2", "--t", "0"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["checks"][2]["detail"]["residual"], "0");
}

#[test]
fn simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let trace = |name: &str, jobs: &str| {
        let p = dir.path().join(name);
        let o = run(&["simulate", "--model", "voter:2", "--n", "1", "--seed", "5", "--jobs", jobs, "--out", p.to_str().unwrap()]);
        assert_eq!(code(&o), 0);
        (stdout(&o), std::fs::read_to_string(p).unwrap())
    };
    let a = trace("a.csv", "1");
    let b = trace("b.csv", "1");
    let c = trace("c.csv", "4");
    assert_eq!(a, b);
    assert_eq!(a, c);
    assert!(a.1.starts_with("replica,t,X,Y,psi\n"));
}

#[test]
fn simulate_summary_matches_exact_and_poisson() {
    let o = run(&["simulate", "--model", "voter:2", "--n", "20000", "--seed", "11", "--jobs", "2"]);
    assert_eq!(code(&o), 0);
    let r = json(&o);
    assert_eq!(r["lhs_within_3se"], true);
    assert_eq!(r["rhs_within_3se"], true);
    let mean = r["event_count_mean"].as_f64().unwrap();
    let expected = r["event_count_expected"].as_f64().unwrap();
    assert_eq!(expected, 2.0);
    assert!((mean - expected).abs() <= 4.0 * r["event_count_stderr"].as_f64().unwrap());
}

#[test]
fn render_empty_model_has_only_site_lines() {
    let path = fixture("fixtures/empty_voter.json");
    let svg = stdout(&run(&["render", "--model", path.to_str().unwrap()]));
    assert_eq!(svg.matches("class=\"site\"").count(), 6);
    assert!(!svg.contains("class=\"arrow\"") && !svg.contains("class=\"block\""));
}

#[test]
fn render_voter_matches_golden() {
    let o = run(&["render", "--model", "voter:3", "--seed", "1", "--t", "1"]);
    assert_eq!(code(&o), 0);
    let golden = std::fs::read_to_string(fixture("golden/voter3_seed1.svg")).unwrap();
    assert_eq!(stdout(&o), golden);
}

#[test]
fn render_krone_pairs_site_lines() {
    let svg = stdout(&run(&["render", "--model", "krone:2", "--seed", "3"]));
    // two lines per site in each panel
    assert_eq!(svg.matches("class=\"site\"").count(), 8);
}

#[test]
fn render_diagram_file() {
    let path = fixture("fixtures/diagram.json");
    let o = run(&["render", "--diagram", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let svg = stdout(&o);
    assert_eq!(svg.matches("class=\"arrow\"").count(), 4);
    assert_eq!(svg.matches("class=\"block\"").count(), 2);
    assert_eq!(code(&run(&["render", "--model", "coop:3"])), 2);
}

#[test]
fn closure_cache_is_transparent() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["verify", "--model", "coop:3", "--variant", "dagger", "--logs", "5"];
    let plain = run(&args);
    let first = bin().args(args).env("ORDERDUAL_CACHE", dir.path()).output().unwrap();
    let second = bin().args(args).env("ORDERDUAL_CACHE", dir.path()).output().unwrap();
    assert_eq!(code(&plain), 0);
    assert_eq!(plain.stdout, first.stdout);
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}
