use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_qec-thermal");

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn kv(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("{key} missing"))
        .parse()
        .unwrap()
}

#[test]
fn derive_reports_both_alpha_variants() {
    let o = run(&["derive", "--format", "kv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!((kv(&text, "debye_A") / 3.14e-2 - 1.0).abs() < 0.02);
    assert!((kv(&text, "alpha_ln2_off") / 8.79e-15 - 1.0).abs() < 0.02);
    assert!((kv(&text, "alpha_ln2_on") / 6.10e-15 - 1.0).abs() < 0.01);
    assert!(text.contains("cfl_verdict=warn"));

    let human = stdout(&run(&["derive"]));
    assert!(human.contains("without ln2") && human.contains("note:"));
}

#[test]
fn config_errors_exit_1_and_name_the_key() {
    let o = run(&["derive", "--set", "qec.pth_typo=0.02"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("pth_typo"));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[physical]\nbase_temp = 0.01\n\n[qec]\np_th = \"high\"\n").unwrap();
    let o = run(&["derive", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("qec.p_th"), "{err}");
}

#[test]
fn usage_and_io_errors() {
    assert_eq!(run(&["simulate", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(run(&[]).status.code(), Some(2));
    let o = run(&["derive", "--config", "/nonexistent/x.toml"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn simulate_writes_trajectory_and_outcome() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&[
        "simulate",
        "--config",
        "configs/toy.toml",
        "--set",
        "coefficients.gamma=0",
        "--out",
        out,
    ]);
    assert_eq!(o.status.code(), Some(10), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("time_s,T_qubit_K,T_fridge_K,T_mean_K,p_err,f_rate"));
    let outcome: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("outcome.json")).unwrap()).unwrap();
    assert_eq!(outcome["outcome"]["phase"], "unbounded");
    assert!(outcome["outcome"]["tau"].as_f64().unwrap() > 0.0);

    let o = run(&["simulate", "--config", "configs/toy.toml", "--set", "coefficients.gamma=1e-5", "--out", out]);
    assert_eq!(o.status.code(), Some(0));

    let o = run(&[
        "simulate",
        "--config",
        "configs/toy.toml",
        "--set",
        "coefficients.gamma=1e-5",
        "--set",
        "numerics.max_steps=1000",
        "--out",
        out,
    ]);
    assert_eq!(o.status.code(), Some(11));
}

#[test]
fn zero_heating_trajectory_is_flat() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "simulate",
        "--set",
        "physical.n_ancilla=0",
        "--set",
        "numerics.plateau_window=50",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cols[1], 0.01);
        assert_eq!(cols[2], 0.01);
    }
}

fn read_all(dir: &Path, names: &[&str]) -> Vec<Vec<u8>> {
    names.iter().map(|n| std::fs::read(dir.join(n)).unwrap()).collect()
}

#[test]
fn sweep_outputs_are_byte_reproducible_and_resumable() {
    let spec = "configs/toy_gamma_scan.toml";
    let shrink = ["--set", "gamma_axis.count=6"];
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let files = ["grid.csv", "grid.mat", "grid.json", "grid_meta.json", "sweep.ndjson"];

    let o = run(&[&["sweep", "--config", spec, "--seedless-deterministic", "--out", a.path().to_str().unwrap()], &shrink[..]].concat());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let partial = run(&[
        &["sweep", "--config", spec, "--seedless-deterministic", "--stop-after", "2", "--out", b.path().to_str().unwrap()],
        &shrink[..],
    ]
    .concat());
    assert_eq!(partial.status.code(), Some(5));
    let resumed = run(&[
        &["sweep", "--config", spec, "--seedless-deterministic", "--resume", "--workers", "3", "--out", b.path().to_str().unwrap()],
        &shrink[..],
    ]
    .concat());
    assert_eq!(resumed.status.code(), Some(0), "{}", stderr(&resumed));

    let (fa, fb) = (read_all(a.path(), &files[..3]), read_all(b.path(), &files[..3]));
    assert_eq!(fa, fb);
    let header = String::from_utf8(fa[0].clone()).unwrap();
    assert!(header.starts_with("alpha,gamma,delta,phase,tau_s,steady_T_K\n"));
}

#[test]
fn critical_synthetic_and_bad_bracket() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&[
        "critical",
        "--synthetic-zeta",
        "0.5",
        "--synthetic-gamma-c",
        "0.3",
        "--bracket",
        "0,1",
        "--iters",
        "80",
        "--out",
        out,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("critical.json")).unwrap()).unwrap();
    assert!((report["fit"]["zeta"].as_f64().unwrap() - 0.5).abs() < 1e-6);
    assert!(report["fit"]["points"].as_array().unwrap().len() >= 5);

    let o = run(&["critical", "--synthetic-zeta", "0.5", "--synthetic-gamma-c", "0.3", "--bracket", "0.5,1", "--out", out]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("lower the bracket"));
    let o = run(&["critical", "--bracket", "oops", "--out", out]);
    assert_eq!(o.status.code(), Some(1));
}
