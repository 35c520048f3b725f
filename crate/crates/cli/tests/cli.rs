use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn ptimp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ptimp")).args(args).output().expect("binary runs")
}

fn run_in(dir: &Path, cmd: &str, extra: &[&str]) -> Output {
    let mut args = vec![cmd, "--out", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    ptimp(&args)
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn invariant(r: &Value, name: &str) -> f64 {
    r["invariants"]
        .as_array()
        .unwrap()
        .iter()
        .find(|i| i["name"] == name)
        .unwrap_or_else(|| panic!("no invariant {name}"))["value"]
        .as_f64()
        .unwrap()
}

#[test]
fn verify_algebra_defaults_pass() {
    let dir = TempDir::new().unwrap();
    let out = run_in(dir.path(), "verify-algebra", &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path());
    assert_eq!(r["passed"], true);
    for name in ["tl_relations", "ybe_ordinary", "ybe_braid", "unitarity", "rll", "rtt_n1"] {
        assert!(invariant(&r, name) <= 1e-11, "{name}");
    }
    assert!(dir.path().join("timing.json").exists());
}

#[test]
fn diagnostics_table_classifies_three_columns() {
    let dir = TempDir::new().unwrap();
    let out = run_in(dir.path(), "diagnostics-table", &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let t: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("diagnostics_table.json")).unwrap()).unwrap();
    let cols = t["cells"].as_array().unwrap();
    assert_eq!(cols.len(), 3);
    let verdict = |c: usize, row: &str| cols[c][row]["verdict"].as_str().unwrap().to_string();
    assert_eq!(verdict(0, "resolvent_pole_order"), "2");
    assert_eq!(verdict(1, "resolvent_pole_order"), "1");
    assert_eq!(verdict(2, "resolvent_pole_order"), "1");
    assert_eq!(verdict(0, "sigma_n_trend"), "-> 0");
    assert_eq!(verdict(2, "sigma_n_trend"), "O(1)");
    assert_eq!(verdict(0, "monodromy_group"), "Z2");
    assert_eq!(verdict(1, "monodromy_group"), "trivial");
    assert_eq!(verdict(2, "coalescence"), "string");
    for c in cols {
        for (k, cell) in c.as_object().unwrap() {
            if cell.get("verdict").is_some() {
                assert_eq!(cell["pass"], true, "{} {k}", c["label"]);
                assert!(cell.get("bound").is_some());
            }
        }
    }
    assert_eq!(t["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn unknown_key_exits_2_naming_it() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"sweep": {"delta_min": 1e-6, "pionts": 21}}"#).unwrap();
    let out = run_in(dir.path(), "sweep-ep", &["--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("pionts"));
}

#[test]
fn invalid_value_exits_2_naming_key() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"monodromy": {"radii": []}}"#).unwrap();
    let out = run_in(dir.path(), "monodromy", &["--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("monodromy.radii"));
    let out = run_in(dir.path(), "monodromy", &["--tol", "-1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_config_file_exits_2() {
    let dir = TempDir::new().unwrap();
    let out = run_in(dir.path(), "sweep-ep", &["--config", "/nonexistent/cfg.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failed_invariant_exits_1_and_is_named() {
    let dir = TempDir::new().unwrap();
    let out = run_in(dir.path(), "sweep-ep", &["--tol", "1e-30"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("max_residual"));
    assert_eq!(report(dir.path())["passed"], false);
}

#[test]
fn same_seed_gives_identical_report_bytes() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for d in [&a, &b] {
        assert_eq!(run_in(d.path(), "verify-algebra", &["--seed", "7"]).status.code(), Some(0));
    }
    let ra = fs::read(a.path().join("report.json")).unwrap();
    let rb = fs::read(b.path().join("report.json")).unwrap();
    assert_eq!(ra, rb);
    let c = TempDir::new().unwrap();
    assert_eq!(run_in(c.path(), "verify-algebra", &["--seed", "8"]).status.code(), Some(0));
    assert_ne!(report(a.path())["config_hash"], report(c.path())["config_hash"]);
}

#[test]
fn sweep_csv_schema_and_precision() {
    let dir = TempDir::new().unwrap();
    assert_eq!(run_in(dir.path(), "sweep-ep", &[]).status.code(), Some(0));
    let mut rdr = csv::Reader::from_path(dir.path().join("sweep_ep.csv")).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["delta", "separation", "sigma_min", "sigma_rest_min"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 21);
    for field in rows[0].iter() {
        let mantissa = field.split('e').next().unwrap().trim_start_matches('-').replace('.', "");
        assert_eq!(mantissa.len(), 17, "{field}");
    }
    let r = report(dir.path());
    let sep = r["results"]["separation_fit"]["exponent"].as_f64().unwrap();
    assert!((sep - 0.5).abs() <= 0.05);
}

#[test]
fn monodromy_and_schur_write_their_tables() {
    let dir = TempDir::new().unwrap();
    assert_eq!(run_in(dir.path(), "monodromy", &[]).status.code(), Some(0));
    let trace = fs::read_to_string(dir.path().join("monodromy_trace.csv")).unwrap();
    assert!(trace.starts_with("radius,steps,theta,root,re,im"));
    assert_eq!(report(dir.path())["invariants"].as_array().unwrap().len(), 16);
    assert_eq!(run_in(dir.path(), "schur-scan", &[]).status.code(), Some(0));
    assert!(dir.path().join("sweep_schur_phi.csv").exists());
    assert!(dir.path().join("sweep_schur_error.csv").exists());
}

#[test]
fn solve_bethe_reports_roots() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"scenario": "close", "bethe": {"delta": 1e-4}}"#).unwrap();
    let out = run_in(dir.path(), "solve-bethe", &["--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path());
    assert_eq!(r["scenario"], "close");
    assert_eq!(r["results"]["roots"].as_array().unwrap().len(), 8);
    assert!(invariant(&r, "quantum_number_lattice_defect") <= 1e-8);
}

#[test]
fn help_documents_flags() {
    let out = ptimp(&["--help"]);
    let text = String::from_utf8_lossy(&out.stdout);
    for flag in ["--config", "--seed", "--tol", "--out", "diagnostics-table"] {
        assert!(text.contains(flag), "{flag}");
    }
}
