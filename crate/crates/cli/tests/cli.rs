use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn efm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_efm"))
        .args(args)
        .env_remove("EFM_KERNEL_CACHE")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, value: &Value) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, value.to_string()).unwrap();
    path.to_str().unwrap().to_string()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(i).unwrap().parse().unwrap()).collect()
}

fn read(path: impl AsRef<Path>) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn zero_end_time_gives_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &json!({ "problem": { "kind": "bkw2d" }, "modes": 16, "t_end": 0.0 }));
    let out = dir.path().join("out");
    let status = efm(&["run", "--config", &config, "--out", out.to_str().unwrap()]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    assert_eq!(read(out.join("diagnostics.csv")).lines().count(), 2);
    let summary: Value = serde_json::from_str(&read(out.join("summary.json"))).unwrap();
    assert_eq!(summary["steps"], json!(0));
}

#[test]
fn efm_entropy_decreases_and_fgm_goes_negative() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &json!({ "problem": { "kind": "bkw2d" }, "modes": 64, "t_end": 1.0 }));
    let efm_out = dir.path().join("efm");
    assert!(efm(&["run", "--config", &config, "--out", efm_out.to_str().unwrap()]).status.success());
    let entropy = column(&read(efm_out.join("diagnostics.csv")), "entropy");
    assert_eq!(entropy.len(), 101);
    assert!(entropy.windows(2).all(|w| w[1] <= w[0] + 1e-10));
    let positivity = column(&read(efm_out.join("diagnostics.csv")), "positivity_error");
    assert!(positivity.iter().all(|&p| p <= 1e-12));

    let fgm_out = dir.path().join("fgm");
    let fgm = efm(&["run", "--config", &config, "--out", fgm_out.to_str().unwrap(), "--override", "method=fgm"]);
    assert!(fgm.status.success());
    let positivity = column(&read(fgm_out.join("diagnostics.csv")), "positivity_error");
    assert!(positivity.iter().any(|&p| p > 0.0));
}

#[test]
fn single_threaded_runs_are_bitwise_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        &json!({ "problem": { "kind": "discontinuous2d", "rho1": 1.2 }, "modes": 32, "t_end": 0.2, "field_times": [0.1] }),
    );
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = efm(&["--threads", "1", "run", "--config", &config, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for file in ["diagnostics.csv", "slices.csv", "field_0.csv"] {
        assert_eq!(read(a.join(file)), read(b.join(file)), "{file}");
    }
}

#[test]
fn summary_echo_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &json!({ "problem": { "kind": "bigaussian2d", "u1": [-2.0, 0.0], "u2": [2.0, 0.0] }, "modes": 16, "t_end": 0.1 }));
    let first = dir.path().join("first");
    assert!(efm(&["--threads", "1", "run", "--config", &config, "--out", first.to_str().unwrap()]).status.success());
    let summary: Value = serde_json::from_str(&read(first.join("summary.json"))).unwrap();
    let echoed = dir.path().join("echo.json");
    std::fs::write(&echoed, summary["config"].to_string()).unwrap();
    let second = dir.path().join("second");
    let o = efm(&["--threads", "1", "run", "--config", echoed.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read(first.join("diagnostics.csv")), read(second.join("diagnostics.csv")));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), &json!({ "problem": { "kind": "bkw2d" }, "modes": 16, "colour": 1 }));
    assert_eq!(efm(&["run", "--config", &bad]).status.code(), Some(2));
    assert_eq!(efm(&["run", "--config", "/nonexistent/config.json"]).status.code(), Some(2));

    // a huge step overflows within a few steps
    let config = write_config(
        dir.path(),
        &json!({ "problem": { "kind": "bkw2d" }, "method": "fcm", "modes": 16, "dt": 1e6, "t_end": 1e8 }),
    );
    let out = dir.path().join("blowup");
    let o = efm(&["run", "--config", &config, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));

    assert_eq!(efm(&["verify"]).status.code(), Some(0));
    let tampered = efm(&["verify", "--tamper-kernel"]);
    assert_eq!(tampered.status.code(), Some(4));
    let text = String::from_utf8_lossy(&tampered.stdout);
    assert!(text.lines().any(|l| l.starts_with("FAIL kernel symmetry")));
    assert!(text.lines().any(|l| l.starts_with("FAIL jackson G minimum")));
}

#[test]
fn verify_report_lists_measured_values() {
    let dir = tempfile::tempdir().unwrap();
    let o = efm(&["verify", "--seed", "7", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let report: Value = serde_json::from_str(&read(dir.path().join("verify.json"))).unwrap();
    assert_eq!(report["seed"], json!(7));
    let checks = report["checks"].as_array().unwrap();
    let unfiltered = checks
        .iter()
        .find(|c| c["name"] == json!("unfiltered G minimum 2D N=9"))
        .unwrap();
    assert!(unfiltered["measured"].as_f64().unwrap() < 0.0);
}

#[test]
fn kernel_cache_is_idempotent_and_self_healing() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let run = || {
        let o = Command::new(env!("CARGO_BIN_EXE_efm"))
            .args(["kernel", "--modes", "16,32", "--nodes", "2,8"])
            .env("EFM_KERNEL_CACHE", &cache)
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        String::from_utf8(o.stdout).unwrap()
    };
    let first = run();
    assert_eq!(first.matches(" built ").count(), 4, "{first}");
    let second = run();
    assert_eq!(second.matches(" hit ").count(), 4, "{second}");

    let victim = std::fs::read_dir(&cache).unwrap().next().unwrap().unwrap().path();
    let mut bytes = std::fs::read(&victim).unwrap();
    let mid = bytes.len() / 2;
    bytes[mid] ^= 0xff;
    std::fs::write(&victim, bytes).unwrap();
    let third = run();
    assert_eq!(third.matches(" rebuilt ").count(), 1, "{third}");
    assert_eq!(third.matches(" hit ").count(), 3);
}

#[test]
fn convergence_writes_rates() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &json!({ "problem": { "kind": "bkw2d" }, "modes": 16 }));
    let out = dir.path().join("conv");
    let o = efm(&["convergence", "--config", &config, "--modes", "16,32", "--angular-nodes", "2,8", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(out.join("convergence.csv"));
    assert_eq!(csv.lines().count(), 5);
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert!(rows[0].split(',').nth(5).unwrap().is_empty());
    let rate: f64 = rows[1].split(',').nth(5).unwrap().parse().unwrap();
    assert!(rate > 1.0 && rate < 2.5, "{rate}");

    let smooth = write_config(dir.path(), &json!({ "problem": { "kind": "discontinuous2d", "rho1": 1.2 }, "modes": 16 }));
    assert_eq!(efm(&["convergence", "--config", &smooth, "--modes", "16"]).status.code(), Some(2));
}
