//! End-to-end runs of the `squeezeflux` binary.

use std::path::Path;
use std::process::{Command, Output};

use squeezeflux::genfun::{make_identity, make_shock, ShockParams};
use squeezeflux::PI;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_squeezeflux")).args(args).output().expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn flux_of_identity_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("id.json");
    std::fs::write(&cfg, make_identity().to_json(None).unwrap()).unwrap();
    let out = dir.path().join("id.csv");
    let o = bin(&["flux", p(&cfg), "--grid", "-1:1:201", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let csv = std::fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,density"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 201);
    for r in rows {
        let (_, d) = r.split_once(',').unwrap();
        assert_eq!(d.parse::<f64>().unwrap(), 0.0);
    }
    let side = std::fs::read_to_string(dir.path().join("id.csv.deltas.json")).unwrap();
    assert_eq!(side.trim(), r#"{"deltas":[]}"#);
}

#[test]
fn flux_of_shock_reports_both_deltas() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("shock.json");
    let f = make_shock(&ShockParams::new(0.01, 0.0, 1.0, 1.0)).unwrap();
    std::fs::write(&cfg, f.to_json(Some(1.0)).unwrap()).unwrap();
    let deltas = dir.path().join("d.json");
    let o = bin(&["flux", p(&cfg), "--grid", "-2:3:11", "--deltas", p(&deltas)]);
    assert_eq!(o.status.code(), Some(0));
    let csv = stdout(&o);
    assert_eq!(csv.lines().count(), 12);
    for r in csv.lines().skip(1) {
        let (_, d) = r.split_once(',').unwrap();
        assert_eq!(d.parse::<f64>().unwrap(), 0.0);
    }
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&deltas).unwrap()).unwrap();
    let d = v["deltas"].as_array().unwrap();
    assert_eq!(d.len(), 2);
    assert_eq!(d[0][0].as_f64(), Some(0.0));
    assert!((d[0][1].as_f64().unwrap() + 0.01).abs() < 1e-15);
    assert_eq!(d[1][0].as_f64(), Some(1.0));
    let pos = d[1][1].as_f64().unwrap();
    assert!((pos - 0.01 / (1.0 - 12.0 * PI * 0.01)).abs() < 1e-15);
    assert!((pos - 0.016_051_1).abs() < 1e-7);
}

#[test]
fn flux_rejects_bad_configs_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.csv");
    for (name, text) in [
        ("bad.json", "{not json"),
        ("gap.json", r#"{"segments":[{"interval":[null,0.0],"form":"affine","coeffs":[0,1]},{"interval":[1.0,null],"form":"affine","coeffs":[0,1]}],"kinks":[]}"#),
        ("dec.json", r#"{"segments":[{"interval":[null,null],"form":"affine","coeffs":[0,-1]}],"kinks":[]}"#),
    ] {
        let cfg = dir.path().join(name);
        std::fs::write(&cfg, text).unwrap();
        let o = bin(&["flux", p(&cfg), "--out", p(&out)]);
        assert_eq!(o.status.code(), Some(2), "{name}");
        assert!(!out.exists(), "{name} left partial output");
        assert!(o.stdout.is_empty());
        assert!(!o.stderr.is_empty());
    }
    let o = bin(&["flux", p(&dir.path().join("missing.json"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn hbar_flag_overrides_the_document() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("shock.json");
    let f = make_shock(&ShockParams::new(0.01, 0.0, 1.0, 2.0)).unwrap();
    std::fs::write(&cfg, f.to_json(Some(2.0)).unwrap()).unwrap();
    let weight = |args: &[&str]| -> f64 {
        let o = bin(args);
        assert_eq!(o.status.code(), Some(0));
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        v["deltas"][0][1].as_f64().unwrap()
    };
    let doc = weight(&["flux", p(&cfg), "--format", "json"]);
    let flag = weight(&["flux", p(&cfg), "--format", "json", "--hbar", "4"]);
    assert!((flag / doc - 2.0).abs() < 1e-14);
}

#[test]
fn verify_exit_codes() {
    assert_eq!(bin(&["verify", "conformal", "--seed", "42"]).status.code(), Some(0));
    assert_eq!(bin(&["verify", "chain"]).status.code(), Some(0));
    let o = bin(&["verify", "no-such-suite"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    assert_eq!(bin(&["verify", "chain", "--hbar", "-1"]).status.code(), Some(2));
    assert_eq!(bin(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn verify_report_lists_every_check() {
    let o = bin(&["verify", "conformal", "--seed", "42"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["suite"], "conformal");
    assert_eq!(v["seed"], 42);
    assert_eq!(v["passed"], true);
    for c in v["checks"].as_array().unwrap() {
        assert!(c["name"].is_string() && c["tolerance"].is_number() && c["observed"].is_number());
        assert_eq!(c["passed"], true);
    }
}

#[test]
fn oracle_csv_columns() {
    let o = bin(&["verify", "oracle", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = stdout(&o);
    assert_eq!(csv.lines().next(), Some("x,analytic_flux,oracle_flux,rel_err,offsets_used"));
    for r in csv.lines().skip(1) {
        let cols: Vec<&str> = r.split(',').collect();
        assert_eq!(cols.len(), 5);
        assert!(cols[3].parse::<f64>().unwrap() < 1e-4);
        assert_eq!(cols[4], "3");
    }
}

#[test]
fn bound_reports_the_chain() {
    let o = bin(&["bound", "--t-s", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let total = v["bound_total"].as_f64().unwrap();
    assert!(((total - 1.0 / (6.0 * PI)) / total).abs() < 1e-12);
    assert!((total - 0.053_051_6).abs() < 1e-7);
    for key in ["t_s", "bound_per_pol", "witness", "steps"] {
        assert!(!v[key].is_null(), "{key}");
    }
    let one: serde_json::Value = serde_json::from_slice(&bin(&["bound", "--t-s", "1", "--pol", "1"]).stdout).unwrap();
    assert!((one["bound_total"].as_f64().unwrap() - 0.026_525_8).abs() < 1e-7);
    assert_eq!(bin(&["bound", "--t-s", "0"]).status.code(), Some(2));
    assert_eq!(bin(&["bound", "--t-s", "-2"]).status.code(), Some(2));
}

#[test]
fn minimize_reference_problem() {
    let o = bin(&["minimize", "--e-n", "0.01", "--l", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let closed = v["closed_form"].as_f64().unwrap();
    assert!((closed - 0.016_051_1).abs() < 1e-7);
    let e = v["oracle"]["energy"].as_f64().unwrap();
    assert!(e >= closed - 1e-6 && e <= 1.005 * closed);
    assert_eq!(v["passed"], true);
    assert_eq!(bin(&["minimize", "--e-n", "0.03", "--l", "1"]).status.code(), Some(2));
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(k).unwrap().parse().unwrap()).collect()
}

#[test]
fn sweep_bound_scales_inversely_with_t_s() {
    let o = bin(&["sweep", "--command", "bound", "--param", "t_s", "--values", "0.1,1,10"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = stdout(&o);
    let t = column(&csv, "t_s");
    let b = column(&csv, "bound_total");
    assert_eq!(t, vec![0.1, 1.0, 10.0]);
    for (t, b) in t.iter().zip(&b) {
        assert!(((b * t - 1.0 / (6.0 * PI)) / b / t).abs() < 1e-12);
    }
    let log = bin(&["sweep", "--command", "bound", "--param", "t_s", "--values", "0.1:10:3"]);
    assert_eq!(column(&stdout(&log), "t_s"), vec![0.1, 1.0, 10.0]);
}

#[test]
fn sweep_substituted_bound_is_flat_in_e_n() {
    let o = bin(&["sweep", "--command", "substituted", "--param", "E_n", "--values", "1e-4:2e-2:12"]);
    assert_eq!(o.status.code(), Some(0));
    for r in column(&stdout(&o), "ratio_to_bound") {
        assert!((r - 1.0).abs() < 1e-12, "{r}");
    }
}

#[test]
fn sweep_configuration_errors() {
    for values in ["", "1,,2", "1,nan", "0:1:3", "1:2:0"] {
        let o = bin(&["sweep", "--command", "bound", "--param", "t_s", "--values", values]);
        assert_eq!(o.status.code(), Some(2), "values `{values}`");
        assert!(o.stdout.is_empty());
    }
    // one inadmissible value stops the sweep before any row runs
    let o = bin(&["sweep", "--command", "compensation", "--param", "E_n", "--values", "0.01,0.05"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    let o = bin(&["sweep", "--command", "qi", "--param", "E_n", "--values", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_json_records_carry_inputs() {
    let o = bin(&["sweep", "--command", "compensation", "--param", "L", "--values", "0,0.5,1", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let recs = v["records"].as_array().unwrap();
    assert_eq!(recs.len(), 3);
    for (r, l) in recs.iter().zip([0.0, 0.5, 1.0]) {
        assert_eq!(r["inputs"]["L"].as_f64(), Some(l));
        assert_eq!(r["inputs"]["E_n"].as_f64(), Some(0.01));
        assert_eq!(r["status"], "ok");
        assert!(r.get("wall_time").is_none());
    }
    let timed = bin(&["sweep", "--command", "qi", "--param", "L", "--values", "1,2", "--timing"]);
    assert!(stdout(&timed).lines().next().unwrap().ends_with(",wall_time"));
}

#[test]
fn sweep_minimize_rows() {
    let o = bin(&["sweep", "--command", "minimize", "--param", "L", "--values", "0.5,1", "--e-n", "0.005"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = stdout(&o);
    for g in column(&csv, "rel_gap") {
        assert!((-1e-6..=0.005).contains(&g), "{g}");
    }
}

#[test]
fn seeded_runs_are_byte_identical() {
    let out = |args: &[&str]| bin(args).stdout;
    for args in [
        &["verify", "modes", "--seed", "5"][..],
        &["verify", "shock", "--seed", "5"][..],
        &["sweep", "--command", "minimize", "--param", "E_n", "--values", "0.002,0.01", "--seed", "5"][..],
    ] {
        assert_eq!(out(args), out(args), "{args:?}");
    }
}
