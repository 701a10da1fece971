use rmhd_sonic::cli::RunConfig;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rmhd-sonic"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, cfg: &RunConfig) -> String {
    let p = dir.join("run.toml");
    std::fs::write(&p, cfg.to_toml()).unwrap();
    p.to_str().unwrap().to_owned()
}

fn small(out: &Path) -> RunConfig {
    let mut c = RunConfig::canonical();
    c.output_dir = out.to_path_buf();
    c.solver.n_v = 33;
    c.solver.n_chi = 33;
    c.recovery.lattice = [9, 9];
    c
}

#[test]
fn all_on_canonical_writes_full_artifact_set() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(&["all", "--out-dir", out.to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{stdout}\n{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 7, "{stdout}");
    for f in [
        "table.csv",
        "sonic.csv",
        "characteristic.csv",
        "solution.csv",
        "field.csv",
        "history.csv",
        "physical.csv",
        "residuals.csv",
        "report.json",
        "manifest.json",
    ] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let header = |f: &str| std::fs::read_to_string(out.join(f)).unwrap().lines().next().unwrap().to_owned();
    assert_eq!(header("table.csv"), "t,varpi,rho,p,n,w,q,gamma,M,F1hat,F,I,Q");
    assert_eq!(header("sonic.csv"), "r,a0hat,a1hat");
    assert_eq!(header("characteristic.csv"), "t,b0bar");
    assert_eq!(header("solution.csv"), "upsilon,chi,U,V");
    assert_eq!(header("field.csv"), "t,r,W,Z");
    assert_eq!(header("history.csv"), "k,dU,dV,ratio");
    assert_eq!(header("physical.csv"), "x,y,theta,varpi,t,u,v,w,q,M");

    let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config_hash"], RunConfig { output_dir: out.clone(), ..RunConfig::canonical() }.hash());
    assert_eq!(manifest["status"], "ok");
    // Every listed artifact exists with the recorded digest.
    for a in manifest["artifacts"].as_array().unwrap() {
        use sha2::Digest;
        let data = std::fs::read(out.join(a["path"].as_str().unwrap())).unwrap();
        let hex: String = sha2::Sha256::digest(&data).iter().map(|b| format!("{b:02x}")).collect();
        assert_eq!(a["sha256"].as_str().unwrap(), hex);
    }
}

#[test]
fn identical_config_gives_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mut digests = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("run{k}"));
        let cfg = write_config(dir.path(), &small(&out));
        let o = run(&["recover", "--config", &cfg, "--emit-iterations"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let m: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
        let csv: Vec<(String, String)> = m["artifacts"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|a| a["path"].as_str().unwrap().ends_with(".csv"))
            .map(|a| (a["path"].as_str().unwrap().to_owned(), a["sha256"].as_str().unwrap().to_owned()))
            .collect();
        digests.push(csv);
    }
    assert!(!digests[0].is_empty());
    assert_eq!(digests[0], digests[1]);
}

#[test]
fn emit_iterations_writes_every_iterate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(dir.path(), &small(&out));
    let o = run(&["solve", "--config", &cfg, "--emit-iterations"]);
    assert!(o.status.success());
    let history = std::fs::read_to_string(out.join("history.csv")).unwrap();
    let iters = history.lines().count() - 1;
    let files = std::fs::read_dir(out.join("iterations")).unwrap().count();
    // Iterates 0..=k.
    assert_eq!(files, iters + 1);
}

#[test]
fn oversized_delta_fails_with_halving_log() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(&["solve", "--out-dir", out.to_str().unwrap(), "--delta", "5", "--grid", "17x17"]);
    assert!(!o.status.success());
    let log = std::fs::read_to_string(out.join("solve.log.partial")).unwrap();
    assert!(log.contains("halving"), "{log}");
    assert_eq!(log.matches("halving").count(), 5, "{log}");
    assert!(out.join("report.json.partial").exists());
    let m: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert!(m["status"].as_str().unwrap().starts_with("failed in solve"));
}

#[test]
fn newtonian_limit_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let mut c = small(&out);
    c.eos.kappa0 = 0.0;
    let cfg = write_config(dir.path(), &c);
    let o = run(&["tables", "--config", &cfg]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rdr = csv::Reader::from_path(out.join("table.csv")).unwrap();
    let (mut rows, law) = (0, c.eos.law);
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let f = |k: usize| rec[k].parse::<f64>().unwrap();
        let (rho, p, w) = (f(2), f(3), f(5));
        // Without the field the magneto-acoustic speed is the sound speed and the
        // total enthalpy is the gas enthalpy.
        assert!((w * w - law.dp(rho)).abs() <= 1e-13, "w^2 - p' at rho = {rho}");
        assert!((p - law.p(rho)).abs() <= 1e-15);
        rows += 1;
    }
    assert_eq!(rows, c.table.rows);
}

#[test]
fn validate_reports_forced_violations() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(&["validate", "--out-dir", out.to_str().unwrap()]);
    let s = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success());
    assert!(!s.contains("FAIL"), "{s}");
    assert!(s.contains("eps0-positive"));

    let mut c = small(&out);
    c.boundary.fit_corner = false;
    c.boundary.psi = vec![0.0, 0.0, 0.0, 0.1];
    let cfg = write_config(dir.path(), &c);
    let s = String::from_utf8_lossy(&run(&["validate", "--config", &cfg]).stdout).into_owned();
    assert!(s.lines().any(|l| l.starts_with("FAIL") && l.contains("psi-concavity")), "{s}");

    let mut c = small(&out);
    c.boundary.theta_hat = vec![0.0, 0.0];
    let cfg = write_config(dir.path(), &c);
    let s = String::from_utf8_lossy(&run(&["validate", "--config", &cfg]).stdout).into_owned();
    assert!(s.lines().any(|l| l.starts_with("FAIL") && l.contains("theta-hat-decreasing")), "{s}");
}

#[test]
fn bad_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.toml");
    std::fs::write(&p, "seed = 1\n").unwrap();
    let o = run(&["tables", "--config", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["tables", "--grid", "nope"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn canonical_subcommand_prints_loadable_config() {
    let o = run(&["canonical"]);
    assert!(o.status.success());
    let c = RunConfig::from_toml(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert_eq!(c, RunConfig::canonical());
}
