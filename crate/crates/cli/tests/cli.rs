use std::path::Path;
use std::process::{Command, Output};

use imhyp::{validate, CliError, EXIT_CONFIG, EXIT_HYPOTHESIS, EXIT_NUMERICAL, EXIT_OK};
use serde_json::{json, Value};

fn imhyp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_imhyp"))
        .args(args)
        .env_remove("IMHYP_THREADS")
        .output()
        .unwrap()
}

fn code(out: &Output) -> u8 {
    out.status.code().unwrap() as u8
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "{e}: stdout {:?}, stderr {:?}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn spectrum_writes_table_and_gap_report() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("spectrum.csv");
    let out = imhyp(&[
        "spectrum",
        "--dim",
        "3",
        "--bc",
        "neumann",
        "--cutoff",
        "100",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), EXIT_OK, "{}", stderr(&out));
    let r = report(&out);
    assert_eq!(r["command"], "spectrum");
    assert_eq!(r["result"]["gaps"]["max_gap"].as_f64(), Some(2.0));
    let table = std::fs::read_to_string(&csv).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("lambda,multiplicity"));
    assert_eq!(lines.next(), Some("0,1"));
    assert_eq!(lines.next(), Some("1,3"));
    // 7 is not a sum of three squares
    assert!(!table.lines().any(|l| l.starts_with("7,")));
}

#[test]
fn coupled_constant_checklist_is_all_true() {
    let out = imhyp(&["prop34"]);
    assert_eq!(code(&out), EXIT_OK, "{}", stderr(&out));
    let r = report(&out);
    let a = r["result"]["a_star"].as_f64().unwrap();
    assert!(a > 10.0 && a < 10.5);
    let checklist = r["result"]["checklist"].as_object().unwrap();
    assert!(checklist.values().all(|v| v == true), "{checklist:?}");
}

#[test]
fn common_cut_examples() {
    let out = imhyp(&["anhim", "--field", "cubic-scalar", "--nu", "0.5", "--cutoff", "1000"]);
    assert_eq!(code(&out), EXIT_OK, "{}", stderr(&out));
    let r = report(&out);
    assert_eq!(r["result"]["result"], "empty");
    assert_eq!(r["result"]["caveat"], "valid up to cutoff");

    let r = report(&imhyp(&["anhim", "--nu", "2", "--cutoff", "1000"]));
    let w = &r["result"]["result"];
    assert!(w["gamma_lo"].as_f64().unwrap() >= -225.0 && w["gamma_hi"].as_f64().unwrap() <= -222.0);
}

#[test]
fn reports_are_byte_identical_across_runs_and_thread_counts() {
    let root = tempfile::tempdir().unwrap();
    // identical configs, so the same relative output path in separate directories
    let run = |dir: &str, threads: &str| {
        let cwd = root.path().join(dir);
        std::fs::create_dir(&cwd).unwrap();
        let out = Command::new(env!("CARGO_BIN_EXE_imhyp"))
            .args([
                "sap-scan",
                "--lambda-max",
                "80",
                "--threads",
                threads,
                "--output",
                "report.json",
            ])
            .current_dir(&cwd)
            .output()
            .unwrap();
        assert_eq!(code(&out), EXIT_OK, "{}", stderr(&out));
        assert!(out.stdout.is_empty());
        std::fs::read(cwd.join("report.json")).unwrap()
    };
    let a = run("a", "1");
    assert_eq!(a, run("b", "1"));
    assert_eq!(a, run("c", "3"));
    assert!(!String::from_utf8(a).unwrap().contains("threads"));
}

#[test]
fn floats_are_printed_with_seventeen_digits() {
    let text = String::from_utf8(imhyp(&["lemma41"]).stdout).unwrap();
    assert!(text.contains("\"nu_star\": 1.0000000000000000e0"), "{text}");
}

#[test]
fn timing_is_opt_in() {
    assert!(report(&imhyp(&["lemma41"])).get("elapsed_seconds").is_none());
    assert!(report(&imhyp(&["lemma41", "--timing"]))["elapsed_seconds"].is_number());
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, json!({"dim": 3, "bc": "neumann", "cutoff": 50.0}).to_string()).unwrap();
    let r = report(&imhyp(&["gaps", "--config", cfg.to_str().unwrap()]));
    assert_eq!(r["config"]["cutoff"].as_f64(), Some(50.0));
    let r = report(&imhyp(&["gaps", "--config", cfg.to_str().unwrap(), "--cutoff", "200"]));
    assert_eq!(r["config"]["cutoff"].as_f64(), Some(200.0));
    assert_eq!(r["config"]["bc"], "neumann");
}

#[test]
fn config_errors_exit_one_with_named_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"bcc": "neumann", "cutoff": -1}"#).unwrap();
    let out = imhyp(&["gaps", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), EXIT_CONFIG);
    let err = stderr(&out);
    assert!(err.contains("did you mean `bc`"), "{err}");
    assert!(err.contains("cutoff must be positive"), "{err}");
    assert!(out.stdout.is_empty());

    let out = imhyp(&["gaps", "--cutoff", "-3"]);
    assert_eq!(code(&out), EXIT_CONFIG);
    assert!(stderr(&out).contains("cutoff must be positive"));

    assert_eq!(code(&imhyp(&["gaps", "--bc", "robin"])), EXIT_CONFIG);
    assert_eq!(code(&imhyp(&["no-such-command"])), EXIT_CONFIG);
    assert_eq!(code(&imhyp(&["index", "--e-minus", "true"])), EXIT_CONFIG);
    assert_eq!(
        code(&imhyp(&["fixed-points", "--field", "/nonexistent/field.json"])),
        EXIT_CONFIG
    );
    assert_eq!(code(&imhyp(&["--help"])), EXIT_OK);
}

#[test]
fn validate_examples() {
    assert_eq!(validate(&json!({"cutoff": -5.0}))[0].message, "cutoff must be positive");
    let d = validate(&json!({"bcc": "neumann"}));
    assert_eq!(d[0].key, "bcc");
    assert!(d[0].message.contains("`bc`"));
    assert!(validate(&json!({"dim": 3, "bc": "neumann", "cutoff": 100.0, "nu": 0.5})).is_empty());
}

#[test]
fn failed_hypotheses_exit_two_and_still_report() {
    let out = imhyp(&["region", "--c", "1"]);
    assert_eq!(code(&out), EXIT_HYPOTHESIS);
    assert_eq!(report(&out)["result"]["holds"], false);

    let out = imhyp(&["lemma41", "--slope0", "-2", "--slope1", "1"]);
    assert_eq!(code(&out), EXIT_HYPOTHESIS);

    // not a fixed point of the default field
    assert_eq!(code(&imhyp(&["delta", "--point", "0.3,0.3"])), EXIT_HYPOTHESIS);
}

#[test]
fn numerical_failures_map_to_three() {
    let e = CliError::Core(imhyp_core::Error::Numerical("no convergence".into()));
    assert_eq!(e.exit_code(), EXIT_NUMERICAL);
    let e = CliError::Core(imhyp_core::Error::HypothesisNotMet("x".into()));
    assert_eq!(e.exit_code(), EXIT_HYPOTHESIS);
}

#[test]
fn field_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("field.json");
    std::fs::write(
        &path,
        r#"{"kind":"cubic_uncoupled","a":2,"b":"sqrt(3)","c":"sqrt(6)","d":"sqrt(2)"}"#,
    )
    .unwrap();
    let field = path.to_str().unwrap();
    let out = imhyp(&["lemma33", "--field", field]);
    assert_eq!(code(&out), EXIT_OK, "{}", stderr(&out));
    assert_eq!(report(&out)["result"]["verdict"], true);

    let csv = dir.path().join("delta.csv");
    let out = imhyp(&["fixed-points", "--field", field, "--csv", csv.to_str().unwrap()]);
    assert_eq!(report(&out)["result"]["fixed_points"].as_array().unwrap().len(), 9);
    assert!(Path::new(&csv).exists());
}

#[test]
fn stationary_commands_on_planar_equilibria() {
    let r = report(&imhyp(&["index", "--field", "prop35", "--nu", "1", "--cutoff", "100"]));
    assert_eq!(r["result"].as_array().unwrap().len(), 9);
    let out = imhyp(&["parity", "--slopes=1,-2", "--cutoff", "100"]);
    assert_eq!(code(&out), EXIT_OK, "{}", stderr(&out));
}

#[test]
fn gauss_audit_lists_exclusions_in_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("excluded.csv");
    let r = report(&imhyp(&[
        "gauss-audit",
        "--limit",
        "100",
        "--csv",
        csv.to_str().unwrap(),
    ]));
    assert_eq!(r["result"]["excluded_count"], 15);
    let table = std::fs::read_to_string(csv).unwrap();
    assert!(table.starts_with("excluded\n7\n15\n23\n28\n31\n"));
}
