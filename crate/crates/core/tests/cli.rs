use std::path::Path;
use std::process::{Command, Output};

fn specdis() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_specdis"));
    cmd.env_remove("SPECDIS_THREADS");
    cmd
}

fn run(args: &[&str]) -> Output {
    specdis().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

/// Header and data rows of a CSV with `#` comments.
fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines
        .next()
        .expect("header line")
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse().expect("number")).collect())
        .collect();
    (header, rows)
}

fn comments(text: &str) -> Vec<&str> {
    text.lines().filter(|l| l.starts_with('#')).collect()
}

#[test]
fn simulate_writes_decaying_occupation() {
    let out = run(&[
        "--no-timestamp",
        "simulate",
        "--B",
        "1",
        "--C",
        "1",
        "--mu",
        "0.7",
        "--sites",
        "200",
        "--t-max",
        "40",
        "--obs",
        "n0,parity,norm",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let (header, rows) = parse_csv(&text);
    assert_eq!(header, ["t", "n0", "parity", "norm"]);
    assert_eq!(rows.len(), 401);
    assert_eq!(rows[0][1], 1.0);
    assert!(rows.last().unwrap()[1] < 0.05);
    assert!(rows.iter().all(|r| (r[3] - 1.0).abs() < 1e-10));
    let notes = comments(&text);
    assert!(notes.iter().any(|c| c.contains("decays=1")));
    assert!(notes
        .iter()
        .any(|c| c.starts_with("# trapped_weight prediction=0")));
    assert!(notes.iter().any(|c| c.starts_with("# valid_horizon=100")));
    assert!(text.lines().all(|l| !l.ends_with('\r')));
}

#[test]
fn simulate_heatmap_shows_boundary_arrival() {
    let out = run(&[
        "--no-timestamp",
        "simulate",
        "--B",
        "1",
        "--C",
        "0.5",
        "--mu",
        "0.5",
        "--sites",
        "80",
        "--t-max",
        "60",
        "--heatmap",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let (header, rows) = parse_csv(&text);
    assert_eq!(header, ["t", "j", "n"]);
    assert_eq!(rows.len(), 601 * 80);
    let arrival: f64 = comments(&text)
        .iter()
        .find_map(|c| c.strip_prefix("# boundary_time="))
        .expect("boundary comment")
        .parse()
        .unwrap();
    assert!((35.0..=45.0).contains(&arrival), "{arrival}");
    // t_max = 60 is past 80/2/1.25 = 32
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn decoupled_impurity_keeps_its_population() {
    let out = run(&[
        "--no-timestamp",
        "simulate",
        "--C",
        "0",
        "--sites",
        "30",
        "--t-max",
        "10",
    ]);
    assert!(out.status.success());
    let (_, rows) = parse_csv(&stdout(&out));
    assert!(rows.iter().all(|r| r[1] == 1.0));
}

#[test]
fn invalid_configuration_exits_with_2() {
    assert_eq!(run(&["simulate", "--B", "-1"]).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--sites", "1"]).status.code(), Some(2));
    assert_eq!(
        run(&["simulate", "--obs", "n7", "--sites", "5"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["phase-diagram", "--mu-range", "1:0:0.1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["lindblad", "--init", "sideways"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("bundle");
    let out = run(&["example", "7", "--out-dir", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!target.exists());

    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"bogus": 1}"#).unwrap();
    let out = run(&["--config", cfg.to_str().unwrap(), "simulate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_with_3() {
    let out = run(&[
        "lindblad", "--E1", "1e9", "--init", "plus", "--t-max", "0.01", "--dt", "0.01",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn output_is_deterministic_without_timestamp() {
    let args = ["simulate", "--mu", "1.4", "--sites", "60", "--t-max", "10"];
    let mut quiet = vec!["--no-timestamp"];
    quiet.extend(args);
    let a = run(&quiet);
    let b = run(&quiet);
    assert_eq!(a.stdout, b.stdout);
    let stamped = stdout(&run(&args));
    assert!(stamped.lines().next().unwrap().starts_with("# generated "));
    assert!(!stdout(&a).contains("# generated"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"mu": 2.1, "sites": 50, "t-max": 5, "obs": ["n0", "n1"]}"#,
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();

    let from_file = stdout(&run(&["--no-timestamp", "--config", cfg, "simulate"]));
    assert!(from_file.contains("# simulate B=1 C=1 mu=2.1 sites=50"));
    assert_eq!(parse_csv(&from_file).0, ["t", "n0", "n1"]);

    let flagged = stdout(&run(&[
        "--no-timestamp",
        "--config",
        cfg,
        "simulate",
        "--mu",
        "0",
    ]));
    assert!(flagged.contains("# simulate B=1 C=1 mu=0 sites=50"));
}

#[test]
fn thread_count_from_environment() {
    let args = [
        "--no-timestamp",
        "phase-diagram",
        "--mu-range",
        "-2:2:0.1",
        "--c-range",
        "0.1:2:0.1",
    ];
    let serial = specdis()
        .args(args)
        .env("SPECDIS_THREADS", "1")
        .output()
        .unwrap();
    let wide = specdis()
        .args(args)
        .env("SPECDIS_THREADS", "3")
        .output()
        .unwrap();
    assert!(serial.status.success());
    assert_eq!(serial.stdout, wide.stdout);
    let zero = specdis()
        .args(args)
        .env("SPECDIS_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(zero.status.code(), Some(2));
}

#[test]
fn default_phase_diagram_matches_special_cases() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("phase.csv");
    let out = run(&[
        "--no-timestamp",
        "phase-diagram",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let (header, rows) = parse_csv(&text);
    assert_eq!(
        header,
        ["mu_B", "C_B", "decays", "n_bound", "trapped_weight"]
    );
    assert_eq!(rows.len(), 301 * 150);
    assert!(rows.iter().all(|r| r[2] == 0.0 || r[2] == 1.0));

    for r in &rows {
        let (mu, c, decays) = (r[0], r[1], r[2] == 1.0);
        if (c - 1.0).abs() < 1e-9 && (mu.abs() - 1.0).abs() > 1e-6 {
            assert_eq!(decays, mu.abs() < 1.0, "C_B=1 row at mu_B={mu}");
        }
        if mu.abs() < 1e-9 {
            assert_eq!(decays, c < 2f64.sqrt(), "mu_B=0 column at C_B={c}");
        }
    }

    // the decaying cells form one 4-connected region around (0, 1)
    let (nm, nc) = (301, 150);
    let decays = |row: usize, col: usize| rows[row * nm + col][2] == 1.0;
    let start = (49, 150);
    assert!(decays(start.0, start.1));
    let mut seen = vec![false; nm * nc];
    let mut stack = vec![start];
    seen[start.0 * nm + start.1] = true;
    while let Some((r, c)) = stack.pop() {
        let mut next = Vec::new();
        if r > 0 {
            next.push((r - 1, c));
        }
        if r + 1 < nc {
            next.push((r + 1, c));
        }
        if c > 0 {
            next.push((r, c - 1));
        }
        if c + 1 < nm {
            next.push((r, c + 1));
        }
        for (r2, c2) in next {
            if !seen[r2 * nm + c2] && decays(r2, c2) {
                seen[r2 * nm + c2] = true;
                stack.push((r2, c2));
            }
        }
    }
    let reached = seen.iter().filter(|s| **s).count();
    let total = rows.iter().filter(|r| r[2] == 1.0).count();
    assert_eq!(reached, total);
}

fn header_of(path: &Path) -> Vec<String> {
    parse_csv(&std::fs::read_to_string(path).unwrap()).0
}

#[test]
fn example_bundles() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let dir_arg = d.to_str().unwrap();
    for (n, extra) in [
        ("1", vec!["--sites", "100"]),
        ("2", vec!["--sites", "100"]),
        ("3", vec!["--sites", "100", "--t-max", "20"]),
        ("4", vec!["--sites", "100", "--t-max", "20"]),
    ] {
        let mut args = vec!["--no-timestamp", "example", n, "--out-dir", dir_arg];
        args.extend(extra);
        let out = run(&args);
        assert!(
            out.status.success(),
            "example {n}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    assert_eq!(
        header_of(&d.join("example1_reset.csv")),
        [
            "t",
            "n0",
            "rho_00",
            "rho_11",
            "purity",
            "trace_distance_to_ground"
        ]
    );
    assert_eq!(
        header_of(&d.join("example2_mixing.csv"))[..2],
        ["t", "parity"]
    );
    assert_eq!(
        header_of(&d.join("example3_microscopic.csv")),
        ["t", "n0_mu0", "n0_mu0.7", "n0_mu1.4", "n0_mu2.1"]
    );
    assert_eq!(
        header_of(&d.join("example3_lindblad.csv")),
        ["t", "rho_11", "exp_minus_gamma_t", "exp_minus_2gamma_t"]
    );
    assert_eq!(
        header_of(&d.join("example4_block.csv")),
        [
            "t",
            "E0_occupation_m0",
            "E0_occupation_m1",
            "E0_occupation_m2",
            "E0_occupation_m3"
        ]
    );
    for name in [
        "example1_final_rho.json",
        "example2_final_rho_orthogonal.json",
        "example2_final_rho_overlap.json",
    ] {
        let json: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(d.join(name)).unwrap()).unwrap();
        assert_eq!(json["dim"], 2);
        assert_eq!(json["re"].as_array().unwrap().len(), 2);
        assert_eq!(json["im"].as_array().unwrap().len(), 2);
    }
    let (_, rows) = parse_csv(&std::fs::read_to_string(d.join("example1_reset.csv")).unwrap());
    assert!((rows.last().unwrap()[2] - 1.0).abs() < 0.05);
}
