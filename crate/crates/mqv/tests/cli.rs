//! End-to-end runs of the `mqv` binary plus the config and file helpers.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mqv::config::{parse_complex, parse_complex_list, parse_spec, parse_tol, RunConfig};
use mqv::io::{read_point, write_atomic};
use mqv::{CliError, Report};
use serde_json::Value;
use tempfile::TempDir;

fn mqv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mqv")).args(args).output().expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gen(dir: &TempDir, name: &str, spec: &str, seed: &str) -> std::path::PathBuf {
    let path = dir.path().join(name);
    let out = mqv(&["--spec", spec, "--seed", seed, "gen", "--out", path_str(&path)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

fn read_report(path: &Path) -> Report {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn gen_is_deterministic_and_records_its_residual() {
    let dir = TempDir::new().unwrap();
    let a = gen(&dir, "a.json", "2,2,3", "5");
    let b = gen(&dir, "b.json", "2,2,3", "5");
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let file: Value = serde_json::from_str(&fs::read_to_string(&a).unwrap()).unwrap();
    assert_eq!(file["format"], "mqv-point/1");
    assert!(file["moment_residual"].as_f64().unwrap() <= 1e-10);
    let other = gen(&dir, "c.json", "2,2,3", "6");
    assert_ne!(fs::read(&a).unwrap(), fs::read(&other).unwrap());
}

#[test]
fn zero_parameter_is_a_usage_error() {
    let out = mqv(&["--spec", "2,1,2", "--q", "0,0;1,0", "gen"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&out.stderr).trim().is_empty());
}

#[test]
fn malformed_arguments_exit_with_two() {
    assert_eq!(mqv(&["--spec", "2,2", "gen"]).status.code(), Some(2));
    assert_eq!(mqv(&["--spec", "2,0,2", "gen"]).status.code(), Some(2));
    assert_eq!(mqv(&["report", "--suite", "no-such-suite"]).status.code(), Some(2));
    assert_eq!(mqv(&["verify", "/nonexistent/point.json"]).status.code(), Some(2));
    assert_eq!(mqv(&["bogus"]).status.code(), Some(2));
}

#[test]
fn verify_passes_on_a_generated_point() {
    let dir = TempDir::new().unwrap();
    let p = gen(&dir, "p.json", "2,2,3", "1");
    let report_path = dir.path().join("r.json");
    let out = mqv(&["verify", path_str(&p), "--out", path_str(&report_path)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = read_report(&report_path);
    assert!(report.all_pass());
    assert!(report.summary.total > 10);
    assert!(report.records.iter().all(|r| !r.paper_ref.is_empty()));
}

#[test]
fn verify_fails_on_a_corrupted_block() {
    let dir = TempDir::new().unwrap();
    let p = gen(&dir, "p.json", "2,2,3", "1");
    let mut file: Value = serde_json::from_str(&fs::read_to_string(&p).unwrap()).unwrap();
    let entry = &mut file["x"][0]["entries"][0][0];
    *entry = Value::from(entry.as_f64().unwrap() + 0.5);
    fs::write(&p, serde_json::to_string(&file).unwrap()).unwrap();
    let report_path = dir.path().join("r.json");
    let out = mqv(&["verify", path_str(&p), "--out", path_str(&report_path)]);
    assert_eq!(out.status.code(), Some(1));
    let report = read_report(&report_path);
    assert!(report.failures().any(|r| r.name.contains("moment")));
}

#[test]
fn commute_family_four_on_a_small_point() {
    let dir = TempDir::new().unwrap();
    let p = gen(&dir, "p.json", "2,2,3", "0");
    let data = dir.path().join("d.json");
    let out = mqv(&["commute", path_str(&p), "--family", "4", "--data", path_str(&data), "--out", path_str(&dir.path().join("r.json"))]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let data: Value = serde_json::from_str(&fs::read_to_string(&data).unwrap()).unwrap();
    for table in data["tables"].as_array().unwrap() {
        for row in table["magnitudes"].as_array().unwrap() {
            for v in row.as_array().unwrap() {
                assert!(v.as_f64().unwrap() <= 1e-8);
            }
        }
    }
}

#[test]
fn rank_of_g_with_three_by_three_blocks_and_two_framings() {
    let dir = TempDir::new().unwrap();
    let p = gen(&dir, "p.json", "2,2,3", "0");
    let data = dir.path().join("d.json");
    let out = mqv(&["rank", path_str(&p), "--family", "G", "--data", path_str(&data), "--out", path_str(&dir.path().join("r.json"))]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let data: Value = serde_json::from_str(&fs::read_to_string(&data).unwrap()).unwrap();
    assert_eq!(data["expected"], 5);
    assert_eq!(data["observed"], 5);
    assert!(data["singular_values"].as_array().unwrap().len() >= 10);
}

#[test]
fn flow_of_trace_t_conserves_its_table() {
    let dir = TempDir::new().unwrap();
    let p = gen(&dir, "p.json", "2,2,3", "0");
    let data = dir.path().join("d.json");
    let out = mqv(&["flow", path_str(&p), "--ham", "trT", "--k", "1", "--time", "1.0", "--data", path_str(&data), "--out", path_str(&dir.path().join("r.json"))]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let data: Value = serde_json::from_str(&fs::read_to_string(&data).unwrap()).unwrap();
    let rows = data["rows"].as_array().unwrap();
    assert!(!rows.is_empty());
    for row in rows {
        assert!(row["max_rel_drift"].as_f64().unwrap() <= 1e-8, "{row}");
    }
}

#[test]
fn reduce_and_dual_pass_on_a_generated_point() {
    let dir = TempDir::new().unwrap();
    let p = gen(&dir, "p.json", "2,1,3", "3");
    let r = dir.path().join("r.json");
    assert_eq!(mqv(&["reduce", path_str(&p), "--out", path_str(&r)]).status.code(), Some(0));
    let dual = dir.path().join("dual.json");
    let out = mqv(&["dual", path_str(&p), "--pairs", "5", "--data", path_str(&dual), "--out", path_str(&r)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("note:"));
    let file: Value = serde_json::from_str(&fs::read_to_string(&dual).unwrap()).unwrap();
    assert_eq!(file["format"], "mqv-dual/1");
}

#[test]
fn report_is_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for path in [&a, &b] {
        let out = mqv(&["report", "--suite", "quasi-hamiltonian", "--suite", "degenerate", "--out", path_str(path)]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let report = read_report(&a);
    assert_eq!(report.summary.total, report.records.len());
    assert_eq!(report.summary.failed, 0);
}

#[test]
fn config_parsers() {
    let s = parse_spec("3, 2, 4").unwrap();
    assert_eq!((s.m, s.d, s.n), (3, 2, 4));
    assert!(parse_spec("0,1,1").is_err());
    assert!(parse_spec("a,b,c").is_err());
    let q = parse_complex_list("1,0; 0.5,-2").unwrap();
    assert_eq!(q.len(), 2);
    assert_eq!((q[1].re, q[1].im), (0.5, -2.0));
    assert_eq!(parse_complex("2").unwrap().re, 2.0);
    assert!(parse_complex("1,2,3").is_err());
    assert_eq!(parse_tol("drift=1e-6").unwrap(), ("drift".to_string(), 1e-6));
    assert!(parse_tol("drift=-1").is_err());
    assert!(parse_tol("drift").is_err());
}

#[test]
fn run_config_validates_parameters() {
    let spec = parse_spec("2,1,2").unwrap();
    assert!(matches!(RunConfig::new(spec, Some(parse_complex_list("1,0").unwrap()), 0), Err(CliError::Usage(_))));
    assert!(matches!(RunConfig::new(spec, Some(parse_complex_list("0,0;1,0").unwrap()), 0), Err(CliError::Usage(_))));
    let cfg = RunConfig::new(spec, None, 7).unwrap().with_tolerances([("drift".to_string(), 1e-3)]);
    assert_eq!(cfg.tol("drift", 1.0), 1e-3);
    assert_eq!(cfg.tol("other", 1.0), 1.0);
}

#[test]
fn atomic_write_replaces_and_leaves_no_temp_files() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("out.json");
    write_atomic(&path, "first").unwrap();
    write_atomic(&path, "second").unwrap();
    assert_eq!(fs::read_to_string(&path).unwrap(), "second");
    let names: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names.len(), 1);
    assert!(write_atomic(&dir.path().join("missing/out.json"), "x").is_err());
}

#[test]
fn read_point_rejects_wrong_shapes() {
    let dir = TempDir::new().unwrap();
    let p = gen(&dir, "p.json", "2,1,2", "0");
    assert!(read_point(&p).is_ok());
    let mut file: Value = serde_json::from_str(&fs::read_to_string(&p).unwrap()).unwrap();
    file["x"][0]["rows"] = Value::from(3);
    fs::write(&p, serde_json::to_string(&file).unwrap()).unwrap();
    assert!(read_point(&p).is_err());
}
