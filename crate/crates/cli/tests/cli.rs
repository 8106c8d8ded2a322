use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stationarity"))
}

fn run(args: &[&str]) -> Output {
    bin()
        .args(args)
        .env_remove("STATIONARITY_WORKERS")
        .output()
        .unwrap()
}

fn simulate(model: &str, len: usize, seed: u64, out: &Path) -> Output {
    run(&[
        "simulate",
        model,
        "--T",
        &len.to_string(),
        "--seed",
        &seed.to_string(),
        "--out",
        out.to_str().unwrap(),
    ])
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    assert!(simulate("S1", 256, 7, &a).status.success());
    assert!(simulate("S1", 256, 7, &b).status.success());
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().next(), Some("x"));
    assert_eq!(text.lines().count(), 257);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn simulated_lsw_loads_back() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("n2.csv");
    assert!(simulate("N2", 1024, 1, &path).status.success());
    let x = stationarity::io::read_series(&path).unwrap();
    let var = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
    assert_eq!(x.len(), 1024);
    assert!(var.is_finite() && var > 0.0);
}

#[test]
fn unknown_model_lists_valid_tags() {
    let dir = tempfile::tempdir().unwrap();
    let out = simulate("S99", 256, 0, &dir.path().join("x.csv"));
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("S99") && err.contains("S1") && err.contains("N12"),
        "{err}"
    );
}

#[test]
fn short_series_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("short.csv");
    fs::write(
        &path,
        (0..10)
            .map(|i| format!("{}\n", i as f64 * 0.3))
            .collect::<String>(),
    )
    .unwrap();
    let out = run(&["test", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("series too short"));
}

#[test]
fn constant_and_unreadable_inputs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("flat.csv");
    fs::write(&path, "value\n# flat\n".to_string() + &"1.5\n".repeat(100)).unwrap();
    assert_eq!(
        run(&["test", path.to_str().unwrap()]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["test", "/nonexistent/file.csv"]).status.code(),
        Some(2)
    );
}

#[test]
fn test_writes_report_and_sets_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("n1.csv");
    let report = dir.path().join("report.json");
    assert!(simulate("N1", 512, 3, &data).status.success());
    let out = run(&[
        "test",
        data.to_str().unwrap(),
        "--alpha",
        "0.1",
        "--seed",
        "3",
        "--report",
        report.to_str().unwrap(),
    ]);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    let reject = json["reject"].as_bool().unwrap();
    assert_eq!(out.status.code(), Some(if reject { 1 } else { 0 }));
    for key in [
        "statistic",
        "critical_value",
        "alpha",
        "D",
        "J_star",
        "M",
        "m_T",
        "B",
        "seed",
        "argmax",
        "per_scale_max",
        "degenerate_cells",
        "runtime_ms",
    ] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
    for key in ["s_p", "e_p", "s_q", "e_q", "scale"] {
        assert!(json["argmax"].get(key).is_some(), "missing argmax.{key}");
    }
    assert_eq!(json["B"], 200);
    assert_eq!(json["m_T"], 64);
    let stdout: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(stdout["statistic"], json["statistic"]);
}

#[test]
fn exit_codes_track_size_and_power() {
    let dir = tempfile::tempdir().unwrap();
    let mut accepts = 0;
    let mut rejects = 0;
    for seed in 0..20u64 {
        let s1 = dir.path().join(format!("s1_{seed}.csv"));
        let n1 = dir.path().join(format!("n1_{seed}.csv"));
        simulate("S1", 512, seed, &s1);
        simulate("N1", 512, seed, &n1);
        let seed = seed.to_string();
        accepts += (run(&["test", s1.to_str().unwrap(), "--seed", &seed])
            .status
            .code()
            == Some(0)) as usize;
        rejects += (run(&[
            "test",
            n1.to_str().unwrap(),
            "--alpha",
            "0.1",
            "--seed",
            &seed,
        ])
        .status
        .code()
            == Some(1)) as usize;
    }
    assert!(accepts >= 17, "accepted {accepts}/20 white-noise series");
    assert!(rejects >= 18, "rejected {rejects}/20 time-varying series");
}

#[test]
fn experiment_is_independent_of_workers() {
    let dir = tempfile::tempdir().unwrap();
    let mut listings = Vec::new();
    for workers in ["1", "3"] {
        let out_dir = dir.path().join(workers);
        let out = bin()
            .args([
                "experiment",
                "--suite",
                "power",
                "--models",
                "N5,N11",
                "--T",
                "256",
                "--R",
                "8",
                "--B",
                "40",
            ])
            .args(["--seed", "5", "--out", out_dir.to_str().unwrap()])
            .env("STATIONARITY_WORKERS", workers)
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(&out_dir)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (
                    e.file_name().to_string_lossy().into_owned(),
                    fs::read(e.path()).unwrap(),
                )
            })
            .collect();
        files.sort();
        listings.push(files);
    }
    let names: Vec<&str> = listings[0].iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(
        names,
        [
            "power_normal.csv",
            "profile_N11_T256.csv",
            "profile_N5_T256.csv",
            "summary.json"
        ]
    );
    assert_eq!(listings[0], listings[1]);
}

#[test]
fn experiment_rejects_zero_replications() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "experiment",
        "--suite",
        "size",
        "--R",
        "0",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("invalid experiment plan"));
}
