use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn vml(args: &[&str], threads: Option<&str>, cwd: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_vml"));
    cmd.args(args).current_dir(cwd).env_remove("VML_THREADS");
    if let Some(t) = threads {
        cmd.env("VML_THREADS", t);
    }
    cmd.output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn nogo_reports_abelian_group() {
    let dir = tempfile::tempdir().unwrap();
    let out = vml(&["pi1-nogo", "--g", "2", "--n", "2", "--d", "3"], None, dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["results"]["pi1_abelian"], true);
    assert_eq!(v["results"]["max_irreducible_rank"], 1);
    assert_eq!(v["results"]["rep_variety_dim"], 4);
    assert_eq!(v["status"], "ok");
    assert_eq!(v["config_echo"]["subcommand"], "pi1-nogo");
}

#[test]
fn nested_and_flat_spellings_agree() {
    let dir = tempfile::tempdir().unwrap();
    let flat = vml(&["pi1-moduli", "--g", "1", "--n", "3", "--d", "4"], None, dir.path());
    let nested = vml(&["pi1", "moduli", "--g", "1", "--n", "3", "--d", "4"], None, dir.path());
    assert_eq!(flat.status.code(), Some(0));
    assert_eq!(flat.stdout, nested.stdout);
}

#[test]
fn nogo_out_of_scope_is_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    let out = vml(&["pi1", "nogo", "--g", "1", "--n", "2", "--d", "1"], None, dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["status"], "infeasible");
}

#[test]
fn below_bradlow_exits_infeasible_with_margin() {
    let dir = tempfile::tempdir().unwrap();
    let out = vml(&["vortex", "solve", "--volume", "10", "--points", "1+1i,2+2i", "--grid", "32"], None, dir.path());
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out);
    let margin = v["diagnostics"]["bradlow_margin"]["value"].as_f64().unwrap();
    assert!((margin - (10.0 - 8.0 * std::f64::consts::PI)).abs() < 1e-9);
}

#[test]
fn vortex_solve_writes_fields() {
    let dir = tempfile::tempdir().unwrap();
    let out = vml(
        &["vortex-solve", "--torus", "6,7", "--points", "1+2i:2", "--grid", "64", "--dump-fields", "fields", "--out", "sol.json"],
        None,
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("sol.json")).unwrap()).unwrap();
    assert_eq!(v["status"], "ok");
    for name in ["h.csv", "v.csv", "modulus_sq.csv", "magnetic_field.csv"] {
        let text = std::fs::read_to_string(dir.path().join("fields").join(name)).unwrap();
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 64, "{name}");
    }
}

#[test]
fn strata_degree_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = vml(&["strata-enum", "--d", "1", "--n", "1", "--g", "1"], None, dir.path());
    assert_eq!(out.status.code(), Some(0));
    let strata = json(&out)["results"]["strata"].as_array().unwrap().clone();
    assert_eq!(strata.len(), 1);
    assert_eq!(strata[0]["total_dim"], 1);
}

#[test]
fn negative_degree_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = vml(&["strata-enum", "--d", "-2"], None, dir.path());
    assert_eq!(out.status.code(), Some(65));
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(vml(&["bogus"], None, dir.path()).status.code(), Some(64));
    assert_eq!(vml(&["pi1-nogo", "--g", "1"], None, dir.path()).status.code(), Some(64));
    assert_eq!(vml(&["pi1-nogo", "--g", "1", "--n", "1", "--d", "2"], Some("zero"), dir.path()).status.code(), Some(64));
}

#[test]
fn help_exits_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(vml(&["--help"], None, dir.path()).status.code(), Some(0));
}

#[test]
fn malformed_datum_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), "{\n  \"groups\": [\n    {\"point\": \"1\", \"hyperplanes\": [[1, 0],]}\n  ]\n}\n")
        .unwrap();
    let out = vml(&["hecke-build", "--n", "2", "--datum", "bad.json"], None, dir.path());
    assert_eq!(out.status.code(), Some(65));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn malformed_points_report_column() {
    let dir = tempfile::tempdir().unwrap();
    let out = vml(&["vortex-solve", "--volume", "50", "--points", "1+i,2+q"], None, dir.path());
    assert_eq!(out.status.code(), Some(65));
    assert!(String::from_utf8_lossy(&out.stderr).contains("column 5"));
}

#[test]
fn hecke_build_schema() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("datum.json"),
        r#"{"groups": [{"point": "1", "hyperplanes": [["1", "0"], ["0", "1"]]}, {"point": "1/2+i", "hyperplanes": [[1, 2]]}]}"#,
    )
    .unwrap();
    let out = vml(&["hecke", "build", "--n", "2", "--datum", "datum.json"], None, dir.path());
    assert_eq!(out.status.code(), Some(0));
    let r = &json(&out)["results"];
    assert_eq!(r["degree"], 3);
    assert_eq!(r["det"].as_array().unwrap().len(), 4);
    assert_eq!(r["det"][3], "1");
    assert_eq!(r["matrix"].as_array().unwrap().len(), 2);
    let local: Vec<(String, Vec<u64>)> = r["local_types"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| {
            let e = t["exponents"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect();
            (t["point"].as_str().unwrap().to_string(), e)
        })
        .collect();
    assert_eq!(local, [("1".to_string(), vec![1, 1]), ("1/2+i".to_string(), vec![0, 1])]);
}

#[test]
fn config_file_matches_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.json"),
        r#"{"subcommand": "pi1-nogo", "parameters": {"g": 2, "n": 2, "d": 3}, "output_path": "cfg.json", "seed": 5}"#,
    )
    .unwrap();
    let out = vml(&["--config", "run.json"], None, dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let direct = vml(&["pi1-nogo", "--g", "2", "--n", "2", "--d", "3", "--seed", "5", "--out", "cfg.json"], None, dir.path());
    assert_eq!(direct.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("cfg.json")).unwrap()).unwrap();
    assert_eq!(v["seed"], 5);
    assert_eq!(v["config_echo"]["output_path"], "cfg.json");

    std::fs::write(dir.path().join("bad.json"), r#"{"subcommand": "pi1-nogo", "colour": 1}"#).unwrap();
    assert_eq!(vml(&["--config", "bad.json"], None, dir.path()).status.code(), Some(65));
}

#[test]
fn report_all_is_byte_identical_and_signed() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["report-all", "--grid", "128", "--seed", "3", "--out", "report.json"];
    let first = vml(&args, Some("1"), dir.path());
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stderr));
    let a = std::fs::read(dir.path().join("report.json")).unwrap();
    let second = vml(&args, Some("4"), dir.path());
    assert_eq!(second.status.code(), Some(0));
    let b = std::fs::read(dir.path().join("report.json")).unwrap();
    assert_eq!(a, b);

    let v: Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(v["results"]["all_passed"], true);
    assert_eq!(v["results"]["criteria"].as_array().unwrap().len(), 9);
    let text = String::from_utf8(a).unwrap();
    let block_start = text.find("  \"signature\": {").unwrap();
    let block_end = block_start + text[block_start..].find("  },\n").unwrap() + "  },\n".len();
    let unsigned = format!("{}{}", &text[..block_start], &text[block_end..]);
    use sha2::Digest;
    assert_eq!(hex::encode(sha2::Sha256::digest(unsigned.as_bytes())), v["signature"]["digest"].as_str().unwrap());
}
