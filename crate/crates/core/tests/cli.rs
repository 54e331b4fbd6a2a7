use std::process::{Command, Output};

use qfi_dephase::cli::run;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qfi-dephase"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn in_process(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("qfi-dephase").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn qfi_at_zero_time_is_zero() {
    let (code, out, _) = in_process(&["qfi", "--param", "gamma", "--gamma", "0.4", "--ej", "0.1", "--em", "0.1", "--t", "0"]);
    assert_eq!(code, 0);
    let json: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(json["f_total"].as_f64().unwrap().abs() < 1e-6);
    assert!(json["cramer_rao_bound"].is_null());
    assert_eq!(json["estimand"], "gamma");
}

#[test]
fn figure_writes_three_curves_with_requested_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin(&["figure", "fig1a", "--points", "200", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut names: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["fig1a_e0.05.csv", "fig1a_e0.1.csv", "fig1a_e0.2.csv"]);
    for n in names {
        let text = std::fs::read_to_string(dir.path().join(n)).unwrap();
        assert!(!text.contains('\r'));
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "axis,f_total,f_c,f_p,f_m,crb");
        assert_eq!(lines.len(), 201);
    }
}

#[test]
fn audit_reports_a_verdict() {
    let (code, out, _) = in_process(&["audit", "--gamma", "0.4", "--e", "0.1", "--t-max", "10"]);
    assert_eq!(code, 0);
    let json: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(json["verdict"], "inconsistent");
    assert_eq!(json["grid"].as_array().unwrap().len(), 21);
}

#[test]
fn evolve_header_and_initial_row() {
    let (code, out, _) = in_process(&["evolve", "--t-max", "1", "--points", "3"]);
    assert_eq!(code, 0);
    let lines: Vec<_> = out.lines().collect();
    assert_eq!(lines.len(), 4);
    let header: Vec<_> = lines[0].split(',').collect();
    assert_eq!(header.len(), 33);
    assert_eq!(header[1], "rho_re_11");
    assert_eq!(header[32], "rho_im_44");
    let first: Vec<f64> = lines[1].split(',').map(|v| v.parse().unwrap()).collect();
    // rho_23 real part sits at column 1 + 2 * (1 * 4 + 2)
    assert_eq!(first[13], 0.5);
    assert_eq!(first[1], 0.0);
}

#[test]
fn sweep_flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"gamma": 0.3, "estimand": "ej", "points": 5, "axis_end": 2.0}"#).unwrap();
    let (code, out, err) = in_process(&["sweep", "--config", cfg.to_str().unwrap(), "--points", "3", "--format", "json", "--parallelism", "2"]);
    assert_eq!(code, 0, "{err}");
    let json: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(json["config"]["gamma"], 0.3);
    assert_eq!(json["config"]["estimand"], "ej");
    assert_eq!(json["rows"].as_array().unwrap().len(), 3);
    assert_eq!(json["rows"][2]["axis"], 2.0);
}

#[test]
fn unknown_config_field_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"gama": 0.3}"#).unwrap();
    let (code, _, err) = in_process(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("gama"));
}

#[test]
fn malformed_flags_exit_with_usage_error() {
    assert_eq!(in_process(&["qfi", "--param", "kappa"]).0, 1);
    assert_eq!(in_process(&["qfi", "--gamma", "abc"]).0, 1);
    assert_eq!(in_process(&["frobnicate"]).0, 1);
    assert_eq!(in_process(&["figure", "fig9z"]).0, 1);
    assert_eq!(in_process(&["qfi", "--gamma", "-1"]).0, 1);
    assert_eq!(in_process(&["sweep", "--points", "1"]).0, 1);
}

#[test]
fn help_and_version_succeed() {
    let (code, _, text) = in_process(&["--help"]);
    assert_eq!(code, 0);
    assert!(text.contains("audit"));
    assert_eq!(in_process(&["--version"]).0, 0);
}

#[test]
fn binary_exit_code_matches_library() {
    let out = bin(&["qfi", "--fd-step", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}
