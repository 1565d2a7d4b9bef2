use std::process::Command;

fn endcalc() -> Command {
    Command::new(env!("CARGO_BIN_EXE_endcalc"))
}

#[test]
fn list_json_names_every_experiment() {
    let out = endcalc().args(["list", "--json"]).output().unwrap();
    assert!(out.status.success());
    let rows: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let names: Vec<&str> = rows.as_array().unwrap().iter().map(|r| r["name"].as_str().unwrap()).collect();
    assert_eq!(
        names,
        [
            "residual-scaling",
            "l2-bound",
            "block-decay",
            "scaling-identity",
            "chart-transfer",
            "selfadjoint",
            "expr-selftest"
        ]
    );
}

#[test]
fn run_writes_artifacts_and_respects_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# chart transfer at two steps\nhbar = 1/8, 1/16\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = endcalc()
        .args(["chart-transfer", "--config"])
        .arg(&cfg)
        .arg("--output")
        .arg(&out_dir)
        .env("ENDCALC_THREADS", "1")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["experiment"], "chart-transfer");
    assert_eq!(summary["pass"], true);
    assert_eq!(std::fs::read_to_string(out_dir.join("results.csv")).unwrap().lines().count(), 3);
    assert!(out_dir.join("plot.svg").exists());
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let o = dir.path().join(sub);
        let s = endcalc().args(["expr-selftest", "--seed", "3", "--output"]).arg(&o).output().unwrap();
        assert!(s.status.success());
        (std::fs::read(o.join("results.csv")).unwrap(), std::fs::read(o.join("summary.json")).unwrap())
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn errors_exit_nonzero_with_one_line() {
    for args in [
        vec!["no-such-experiment"],
        vec!["l2-bound", "--colour", "red"],
        vec!["l2-bound", "--hbar", "2"],
        vec!["l2-bound", "--config", "/nonexistent/file.cfg"],
    ] {
        let out = endcalc().args(&args).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert_eq!(err.trim_end().lines().count(), 1, "{args:?}: {err}");
        assert!(err.starts_with("endcalc: "));
    }
    let out = endcalc().arg("list").env("ENDCALC_THREADS", "zero").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
