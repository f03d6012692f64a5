use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_frac-talenti"));
    c.env_remove("FRAC_TALENTI_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn annulus_thm1_passes_with_expected_margin() {
    let out = run(&["verify", "thm1", "--N", "1", "--s", "0.5", "--profile", "0.5:0,1:1"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json_of(&out);
    assert_eq!(v["schema"], 1);
    let margin = v["reports"][0]["margin"].as_f64().unwrap();
    let expected = 2.0 / 3.0 * 2f64.powf(-0.5);
    assert!((margin - expected).abs() < 1e-9, "margin {margin}");
    assert_eq!(v["reports"][0]["normalization"], "DeltaLimit");
}

#[test]
fn calibrate_reports_sqrt_two() {
    let out = run(&["calibrate", "--N", "1", "--s", "0.5"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json_of(&out);
    let r = &v["reports"][0];
    let lhs = r["lhs"].as_f64().unwrap();
    assert!((lhs / 2f64.sqrt() - 1.0).abs() <= 1e-6);
    assert!(r["values"]["max_relative_error"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn oversized_bump_radius_exits_two() {
    let out = run(&[
        "verify", "thm2", "--N", "1", "--s", "0.5", "--xi", "0.5", "--rho", "0.1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("not satisfied"), "{err}");
    assert!(err.contains("0.0527864045"), "{err}");
}

#[test]
fn admissible_bump_passes() {
    let out = run(&[
        "verify", "thm2", "--N", "1", "--s", "0.5", "--xi", "0.5", "--rho", "0.04",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(json_of(&out)["reports"][0]["pass"], true);
}

#[test]
fn config_errors_are_aggregated() {
    let out = run(&[
        "verify",
        "thm1",
        "--N",
        "5",
        "--s",
        "-2",
        "--normalization",
        "weird",
        "--profile",
        "0.5:1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    for needle in ["N = 5", "s = -2", "weird", "last breakpoint"] {
        assert!(err.contains(needle), "missing `{needle}` in {err}");
    }
    assert!(out.stdout.is_empty());
}

#[test]
fn missing_source_is_a_config_error() {
    let out = run(&["verify", "thm1", "--N", "1", "--s", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("source is required"));
}

#[test]
fn wrong_range_of_s_is_a_domain_error() {
    let out = run(&["verify", "s-gt1", "--N", "3", "--s", "0.5", "--profile", "0.5:0,1:1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("must exceed 1"));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"N": 1, "s": 0.25, "source": {"kind": "radial", "breakpoints": [0.5, 1.0], "values": [0.0, 1.0]}}"#,
    )
    .unwrap();
    let out = run(&["verify", "thm1", "--config", cfg.to_str().unwrap(), "--s", "0.5"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json_of(&out);
    assert_eq!(v["config"]["s"], 0.5);
    assert_eq!(v["config"]["source"]["kind"], "radial");
    let margin = v["reports"][0]["margin"].as_f64().unwrap();
    assert!((margin - 2.0 / 3.0 * 2f64.powf(-0.5)).abs() < 1e-9);
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"N": 1, "s": 0.5, "typo": 3}"#).unwrap();
    let out = run(&["verify", "thm1", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("typo"));
}

#[test]
fn csv_has_fixed_header() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("out.csv");
    let out = run(&[
        "verify",
        "thm1",
        "--N",
        "3",
        "--s",
        "0.25",
        "--random",
        "4",
        "--seed",
        "9",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("claim,N,s,normalization,lhs,rhs,margin,tol,pass"));
    assert_eq!(lines.count(), 4);
    assert!(!text.contains('\r'));
}

#[test]
fn verify_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let out = run(&[
            "verify",
            "mass",
            "--N",
            "1",
            "--s",
            "0.5",
            "--random",
            "3",
            "--seed",
            "42",
            "--grid",
            "128",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn sweep_is_independent_of_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let one = dir.path().join("one.json");
    let four = dir.path().join("four.json");
    let args = |p: &Path| {
        vec![
            "sweep".to_string(),
            "thm1".into(),
            "--random".into(),
            "6".into(),
            "--seed".into(),
            "3".into(),
            "--out".into(),
            p.to_str().unwrap().to_string(),
        ]
    };
    let o1 = bin()
        .args(args(&one))
        .env("FRAC_TALENTI_THREADS", "1")
        .output()
        .unwrap();
    let o4 = bin()
        .args(args(&four))
        .env("FRAC_TALENTI_THREADS", "4")
        .output()
        .unwrap();
    assert_eq!(o1.status.code(), Some(0), "{}", stderr(&o1));
    assert_eq!(o4.status.code(), Some(0), "{}", stderr(&o4));
    let text = std::fs::read(&one).unwrap();
    assert_eq!(text, std::fs::read(&four).unwrap());
    let v: Value = serde_json::from_slice(&text).unwrap();
    assert_eq!(v["summary"]["total"], 36);
}

#[test]
fn exploratory_sweep_has_no_verdict() {
    let out = run(&[
        "sweep",
        "explore",
        "--N-values",
        "1",
        "--s-values",
        "1.5",
        "--random",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json_of(&out);
    assert_eq!(v["summary"]["passed"], 0);
    assert_eq!(v["reports"][0]["metadata"]["mode"], "exploratory");
}

#[test]
fn green_claim_matches_closed_form() {
    let out = run(&["verify", "green", "--N", "1", "--s", "0.5", "--xi", "0.5"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let lhs = json_of(&out)["reports"][0]["lhs"].as_f64().unwrap();
    assert!((lhs - 0.6f64.sqrt()).abs() < 1e-10);
}

#[test]
fn higher_order_bump_example_passes() {
    let out = run(&[
        "verify",
        "higher-order",
        "--N",
        "3",
        "--s",
        "1.5",
        "--xi",
        "0.5,0,0",
        "--rho",
        "0.01",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
}

#[test]
fn sharpness_and_crossing_run() {
    let out = run(&["verify", "sharpness", "--N", "1", "--s", "0.5"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(json_of(&out)["data"]["rows"].as_array().unwrap().len() >= 5);
    let out = run(&[
        "verify",
        "crossing",
        "--N",
        "1",
        "--s",
        "0.5",
        "--profile",
        "0.5:0,1:1",
        "--grid",
        "128",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
}

#[test]
fn kernel_commands_print_values() {
    let out = run(&[
        "kernel",
        "--kind",
        "martin-limit",
        "--N",
        "3",
        "--s",
        "0.25",
        "--y",
        "0.1,0.2,0",
        "--theta",
        "0,0,1",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let rel = json_of(&out)["data"]["relative_difference"].as_f64().unwrap();
    assert!(rel.abs() < 1e-3);
    let out = run(&[
        "kernel", "--kind", "poisson", "--N", "2", "--x", "0,0", "--theta", "1,0",
    ]);
    let p = json_of(&out)["data"]["value"].as_f64().unwrap();
    assert!((p - 1.0 / (2.0 * std::f64::consts::PI)).abs() < 1e-14);
    let out = run(&[
        "kernel", "--kind", "green", "--N", "1", "--s", "0.5", "--x", "0.1", "--y", "0.1",
    ]);
    assert_eq!(out.status.code(), Some(2), "coincident points are a domain error");
}

#[test]
fn solve_trace_and_symmetrize_emit_tables() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("u.csv");
    let out = run(&[
        "solve",
        "--N",
        "1",
        "--s",
        "0.5",
        "--profile",
        "1:1",
        "--grid",
        "16",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("r,u\n"));
    assert_eq!(text.lines().count(), 17);

    let out = run(&[
        "trace",
        "--N",
        "2",
        "--s",
        "0.5",
        "--profile",
        "1:1",
        "--order",
        "8",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("node,theta_1,theta_2,weight,value\n"));

    let out = run(&["symmetrize", "--N", "1", "--profile", "0.5:0,1:1"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(json_of(&out)["data"]["symmetrization"], "0.5:1,1:0");
}

#[test]
fn report_merges_runs_into_markdown() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("thm1.json");
    let b = dir.path().join("cal.json");
    let md = dir.path().join("summary.md");
    assert_eq!(
        run(&[
            "verify",
            "thm1",
            "--N",
            "1",
            "--s",
            "0.5",
            "--profile",
            "0.5:0,1:1",
            "--out",
            a.to_str().unwrap()
        ])
        .status
        .code(),
        Some(0)
    );
    assert_eq!(
        run(&["calibrate", "--N", "1", "--s", "0.5", "--out", b.to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );
    let out = run(&[
        "report",
        a.to_str().unwrap(),
        b.to_str().unwrap(),
        "--out",
        md.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = std::fs::read_to_string(&md).unwrap();
    assert!(text.contains("2 of 2 checks pass"));
    assert!(text.find("Calibration").unwrap() < text.find("Reverse boundary").unwrap());
}

#[test]
fn failing_verification_exits_one() {
    let out = run(&["verify", "calibrate-me", "--N", "1"]);
    assert_eq!(out.status.code(), Some(2), "unknown claim is a usage error");
    // A tolerance far below the quadrature error makes calibration fail.
    let out = run(&[
        "calibrate",
        "--N",
        "2",
        "--s",
        "0.5",
        "--order",
        "4",
        "--tol",
        "1e-18",
        "--quad-tol",
        "1e-4",
    ]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    assert_eq!(json_of(&out)["summary"]["failed"], 1);
}
