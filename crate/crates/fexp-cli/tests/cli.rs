//! End-to-end tests of the command-line interface: determinism of output
//! files, config-file merging, exit codes, and output formats.

use std::path::Path;
use std::process::{Command, Output};

fn fexp(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fexp"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).expect("output file exists")
}

#[test]
fn outputs_are_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut produced = Vec::new();
    for (name, threads) in [("a.csv", "1"), ("b.csv", "2"), ("c.csv", "1")] {
        let out = dir.path().join(name);
        let status = fexp(
            &[
                "simulate",
                "--scheme",
                "as-scheme",
                "--n",
                "9",
                "--delta",
                "0.3",
                "--trials",
                "100000",
                "--seed",
                "7",
                "--out",
                out.to_str().unwrap(),
            ],
            &[("FEXP_THREADS", threads)],
        );
        assert!(
            status.status.success(),
            "{}",
            String::from_utf8_lossy(&status.stderr)
        );
        produced.push(read(&out));
    }
    assert_eq!(produced[0], produced[1], "thread count changed the bytes");
    assert_eq!(produced[0], produced[2], "rerun changed the bytes");
}

#[test]
fn csv_header_and_embedded_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("row.csv");
    let run = fexp(
        &[
            "simulate",
            "--scheme",
            "no-feedback",
            "--n",
            "4",
            "--trials",
            "20000",
            "--seed",
            "1",
            "--out",
            out.to_str().unwrap(),
        ],
        &[],
    );
    assert!(run.status.success());
    let text = read(&out);
    let mut lines = text.lines();
    let first = lines.next().unwrap();
    assert!(first.starts_with("# fexp "), "{first}");
    assert!(first.contains("config={"), "{first}");
    assert_eq!(
        lines.next().unwrap(),
        "scheme,n,p_fwd,sigma2_fwd,p_fb,sigma2_fb,delta,trials,p_hat,ci_low,ci_high,log_pe_closed_form,seed"
    );
    let row = lines.next().unwrap();
    assert!(row.starts_with("no-feedback,4,"), "{row}");
    assert!(text.contains("# audit {"));
}

#[test]
fn config_file_supplies_fields_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.json");
    std::fs::write(
        &cfg_path,
        r#"{
            "command": "simulate",
            "scheme": "as-scheme",
            "n": 9,
            "delta": 0.3,
            "trials": 5000,
            "seed": 3,
            "p_fb": 2.0,
            "format": "json"
        }"#,
    )
    .unwrap();
    // Command taken from the config file.
    let out_a = dir.path().join("a.json");
    let run = fexp(
        &["--config", cfg_path.to_str().unwrap()],
        &[("FEXP_THREADS", "1")],
    );
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let doc: serde_json::Value = serde_json::from_slice(&run.stdout).unwrap();
    assert_eq!(doc["config"]["seed"], 3);
    assert_eq!(doc["config"]["params"]["p_fb"], 2.0);
    drop(out_a);

    // An explicit flag wins over the file.
    let run = fexp(
        &[
            "simulate",
            "--config",
            cfg_path.to_str().unwrap(),
            "--seed",
            "9",
        ],
        &[],
    );
    assert!(run.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&run.stdout).unwrap();
    assert_eq!(doc["config"]["seed"], 9);
    assert_eq!(doc["config"]["scheme"]["kind"], "as-scheme");
}

#[test]
fn sweep_oracle_mode_emits_rows_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.json");
    let run = fexp(
        &[
            "sweep",
            "--scheme",
            "building-block",
            "--delta",
            "0.2",
            "--delta-fb-power",
            "0.01",
            "--n-list",
            "1000,10000,100000",
            "--trials",
            "0",
            "--format",
            "json",
            "--out",
            out.to_str().unwrap(),
        ],
        &[],
    );
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let doc: serde_json::Value = serde_json::from_str(&read(&out)).unwrap();
    assert_eq!(doc["rows"].as_array().unwrap().len(), 3);
    let slope = doc["summary"]["slope"].as_f64().unwrap();
    assert!((slope - 1.62).abs() / 1.62 < 0.01, "slope={slope}");
    assert!(doc["summary"]["r2"].as_f64().unwrap() > 0.999999);
}

#[test]
fn exit_codes_for_bad_usage() {
    // Missing required pieces.
    assert_eq!(fexp(&["simulate", "--n", "4"], &[]).status.code(), Some(2));
    assert_eq!(
        fexp(
            &[
                "simulate",
                "--scheme",
                "as-scheme",
                "--n",
                "9",
                "--delta",
                "0.3"
            ],
            &[]
        )
        .status
        .code(),
        Some(2),
        "missing --trials"
    );
    // Out-of-domain crossover probability.
    assert_eq!(
        fexp(&["bsc", "--eps", "0.7", "--eps-fb", "0.1"], &[])
            .status
            .code(),
        Some(2)
    );
    // Non-increasing sweep blocklengths.
    assert_eq!(
        fexp(
            &[
                "sweep",
                "--scheme",
                "no-feedback",
                "--n-list",
                "30,20,10",
                "--trials",
                "0"
            ],
            &[]
        )
        .status
        .code(),
        Some(2)
    );
    // Even blocklength for the three-phase scheme.
    assert_eq!(
        fexp(
            &[
                "simulate",
                "--scheme",
                "three-phase",
                "--n",
                "16",
                "--delta",
                "0.4",
                "--delta-fb-power",
                "0.05",
                "--trials",
                "10"
            ],
            &[]
        )
        .status
        .code(),
        Some(2)
    );
    // Unknown field in the config file.
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"command": "exponents", "nonsense": 1}"#).unwrap();
    assert_eq!(
        fexp(&["--config", cfg.to_str().unwrap()], &[])
            .status
            .code(),
        Some(2)
    );
    // Malformed tilt.
    assert_eq!(
        fexp(
            &[
                "simulate",
                "--scheme",
                "no-feedback",
                "--n",
                "4",
                "--trials",
                "10",
                "--tilt",
                "zero:-1"
            ],
            &[]
        )
        .status
        .code(),
        Some(2)
    );
    // No command anywhere.
    assert_eq!(fexp(&[], &[]).status.code(), Some(2));
}

#[test]
fn verify_quick_passes_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let run = fexp(
        &[
            "verify",
            "--quick",
            "--seed",
            "5",
            "--out",
            out.to_str().unwrap(),
        ],
        &[],
    );
    assert!(
        run.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&run.stderr)
    );
    let doc: serde_json::Value = serde_json::from_str(&read(&out)).unwrap();
    assert_eq!(doc["report"]["passed"], true);
    assert!(doc["report"]["checks"].as_array().unwrap().len() >= 8);
    let stderr = String::from_utf8_lossy(&run.stderr);
    assert!(stderr.contains("PASS"));
}

#[test]
fn exponents_json_contains_the_analytic_table() {
    let run = fexp(
        &["exponents", "--format", "json", "--out", "/dev/stdout"],
        &[],
    );
    assert!(run.status.success());
    let text = String::from_utf8_lossy(&run.stdout);
    let json_start = text.find('{').unwrap();
    let doc: serde_json::Value = serde_json::from_str(&text[json_start..]).unwrap();
    let bounds = doc["bounds"].as_array().unwrap();
    assert!(bounds.len() >= 7);
    let find = |label: &str| {
        bounds
            .iter()
            .find(|b| b["label"].as_str().unwrap().contains(label))
            .unwrap_or_else(|| panic!("missing {label}"))["value"]
            .as_f64()
            .unwrap()
    };
    assert!((find("achievable, a.s.") - 2.5).abs() < 1e-12);
    assert!((find("passive feedback bound (loose)") - 1.0).abs() < 1e-12);
}

#[test]
fn tilted_simulate_runs() {
    let run = fexp(
        &[
            "simulate",
            "--scheme",
            "no-feedback",
            "--n",
            "4",
            "--trials",
            "50000",
            "--seed",
            "2",
            "--tilt",
            "0:-1.0,1:-1.0",
            "--format",
            "json",
        ],
        &[],
    );
    assert!(run.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&run.stdout).unwrap();
    let p_hat = doc["rows"][0]["p_hat"].as_f64().unwrap();
    // Q(2) is about 0.0228; the tilted estimate should land nearby.
    assert!((p_hat - 0.02275).abs() < 0.004, "p_hat={p_hat}");
}
