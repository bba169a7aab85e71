use std::path::PathBuf;
use std::process::{Command, Output};

use bihardy::classify::Verdict;
use bihardy::conditions::ConditionReport;
use bihardy::witness::RatioWitness;

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name)
}

fn bihardy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bihardy"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn with_config(cmd: &str, name: &str, extra: &[&str]) -> Output {
    let path = config(name);
    let mut args = vec![cmd, "--config", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    bihardy(&args)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn temp_config(text: &str) -> tempfile::NamedTempFile {
    let f = tempfile::NamedTempFile::new().unwrap();
    std::fs::write(f.path(), text).unwrap();
    f
}

#[test]
fn check_exit_codes() {
    let o = with_config("check", "balanced.toml", &[]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("0.70711") && s.contains("[0.70711, 23.324]"), "{s}");

    let o = with_config("check", "broken.toml", &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("B1            inf"));

    let o = with_config("check", "q_below_one.toml", &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("q = 0.8"));

    assert_eq!(with_config("check", "custom.toml", &[]).status.code(), Some(0));
}

#[test]
fn config_errors_exit_one_with_location() {
    let text = std::fs::read_to_string(config("balanced.toml")).unwrap();
    let f = temp_config(&text.replace("dim = 4", "dim = 4\ndimension = 4"));
    let o = bihardy(&["check", "--config", f.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(
        err.contains("unknown field `dimension`") && err.contains("line 5"),
        "{err}"
    );

    let f = temp_config(&text.replace("p1 = 2", "p1 = 0.5"));
    let o = bihardy(&["check", "--config", f.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("exponents"));

    assert_eq!(bihardy(&["check"]).status.code(), Some(1), "no datum configured");
    assert_eq!(
        with_config("check", "balanced.toml", &["--rel-tol", "-1"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(bihardy(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn report_json_round_trips_byte_for_byte() {
    for name in ["balanced.toml", "broken.toml", "q_below_one.toml", "custom.toml"] {
        let text = stdout(&with_config("check", name, &["--json"]));
        let r: ConditionReport = serde_json::from_str(&text).unwrap();
        assert_eq!(
            serde_json::to_string_pretty(&r).unwrap(),
            text.trim_end(),
            "{name}"
        );
    }
    let text = stdout(&with_config("check", "broken.toml", &["--json"]));
    assert!(text.contains("\"B1\": \"inf\""), "{text}");
}

#[test]
fn out_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let text = stdout(&with_config(
        "check",
        "custom.toml",
        &["--json", "--out", path.to_str().unwrap()],
    ));
    assert_eq!(std::fs::read_to_string(&path).unwrap(), text);
}

#[test]
fn classify_exit_codes_and_json() {
    let text = std::fs::read_to_string(config("hyperbolic.toml")).unwrap();
    let single = temp_config(text.split("[classify]").next().unwrap());
    let o = bihardy(&["classify", "--json", "--config", single.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let v: Verdict = serde_json::from_str(&s).unwrap();
    assert_eq!(v.label(), "holds (sufficient)");
    assert_eq!(serde_json::to_string_pretty(&v).unwrap(), s.trim_end());

    let cases = [
        ("exponent = -2 }", "exponent = 1 }", 2),
        ("q = 2", "q = 0.9", 3),
        ("dim = 2", "dim = 3", 4),
    ];
    for (from, to, code) in cases {
        let mut t = single_text(&text).replacen(from, to, 1);
        if code == 4 {
            // n = 3, α = -5, c_i = 0.5: S < 0 lies outside both sufficient rules
            t = t
                .replace("exponent = -2 }", "exponent = -5 }")
                .replace("exponent = 1 }", "exponent = 2.5 }");
        }
        let f = temp_config(&t);
        let o = bihardy(&["classify", "--config", f.path().to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(code), "{t}\n{}", stdout(&o));
    }

    // flat data must be given as powers
    let f = temp_config(&single_text(&text).replace("kind = \"hyperbolic\"", "kind = \"homogeneous\""));
    assert_eq!(
        bihardy(&["classify", "--config", f.path().to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
}

fn single_text(text: &str) -> String {
    text.split("[classify]").next().unwrap().to_owned()
}

#[test]
fn classify_sweep_covers_the_grid() {
    let o = with_config("classify", "hyperbolic.toml", &["--json"]);
    assert_eq!(o.status.code(), Some(0));
    let rows: Vec<serde_json::Value> = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rows.len(), 9);
    assert_eq!(rows[0]["alpha"], -4.0);
    assert_eq!(rows[4]["verdict"], "holds_sufficient");
    assert_eq!(rows[8]["verdict"], "fails");
}

#[test]
fn witness_is_deterministic_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("trace.csv");
    let run = |seed: &str| {
        let o = with_config(
            "witness",
            "balanced.toml",
            &[
                "--json",
                "--budget",
                "60",
                "--seed",
                seed,
                "--out",
                csv.to_str().unwrap(),
            ],
        );
        assert_eq!(o.status.code(), Some(0));
        (stdout(&o), std::fs::read_to_string(&csv).unwrap())
    };
    let (a, trace_a) = run("3");
    let (b, trace_b) = run("3");
    assert_eq!((&a, &trace_a), (&b, &trace_b));
    let w: RatioWitness = serde_json::from_str(&a).unwrap();
    assert_eq!(w.evaluations, 60, "--budget overrides the file");
    assert_eq!(serde_json::to_string_pretty(&w).unwrap(), a.trim_end());
    // the balanced datum has C ≤ 8·17^{1/2}·2^{-1/2}
    assert!(w.ratio > 0.0 && w.ratio <= 23.324);

    let mut lines = trace_a.lines();
    assert_eq!(lines.next(), Some("eval_index,a1,a2,log_tlo,log_thi,ratio"));
    assert_eq!(lines.count(), 60);
    // the balance-informed starts are seed independent, the random restarts are not
    let (_, trace_c) = run("4");
    assert_ne!(trace_a, trace_c);
}

#[test]
fn reduce_verify_default_suite_passes() {
    let o = bihardy(&["reduce-verify"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("60 of 60 identities hold"), "{s}");
    assert!(!s.contains("FAIL"));

    let o = with_config("reduce-verify", "balanced.toml", &["--json"]);
    assert_eq!(o.status.code(), Some(0));
    let rows: Vec<serde_json::Value> = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rows.len(), 15);
}

#[test]
fn calibrate_ladder_increases_below_the_sharp_constant() {
    let o = bihardy(&["calibrate", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let t: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(t["ceiling"], 4.0);
    let ratios: Vec<f64> = t["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["ratio"].as_f64().unwrap())
        .collect();
    assert_eq!(ratios.len(), 3);
    assert!(
        ratios.windows(2).all(|w| w[0] < w[1]) && ratios[2] < 4.0,
        "{ratios:?}"
    );
    // δ = 0.5 gives 2^2 (1.5)^{-1} exactly
    assert!((ratios[0] - 8.0 / 3.0).abs() < 1e-8);

    let o = with_config("calibrate", "calibrate.toml", &[]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("ceiling 27.000"));
}
