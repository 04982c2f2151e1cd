use std::path::Path;
use std::process::Command;

fn akpz(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_akpz")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const SIMULATE: &str = "kind = \"simulate\"\nn_trajectories = 24\nseed = 9\n[sim]\ncutoff_n = 2\nlambda = 1.0\ndt = 0.05\nt_final = 2.0\n";

#[test]
fn parallelism_and_replay_give_identical_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "sim.toml", SIMULATE);
    let out = |d: &str| tmp.path().join(d).to_string_lossy().into_owned();
    for (jobs, d) in [("1", "a"), ("4", "b")] {
        let o = akpz(&["simulate", "--config", &cfg, "--jobs", jobs, "--out", &out(d)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let manifest = tmp.path().join("a").join("manifest.json");
    let o = akpz(&["simulate", "--config", &manifest.to_string_lossy(), "--out", &out("c")]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let a = std::fs::read(tmp.path().join("a/stationarity.csv")).unwrap();
    assert!(String::from_utf8_lossy(&a).starts_with("# config_hash: "));
    for d in ["b", "c"] {
        assert_eq!(std::fs::read(tmp.path().join(d).join("stationarity.csv")).unwrap(), a, "{d}");
    }
    let m: serde_json::Value = serde_json::from_slice(&std::fs::read(&manifest).unwrap()).unwrap();
    assert_eq!(m["seeds"].as_array().unwrap().len(), 24);
    assert_eq!(m["master_seed"], 9);
}

#[test]
fn seed_flag_overrides_the_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "sim.toml", SIMULATE);
    let out = tmp.path().join("s").to_string_lossy().into_owned();
    assert!(akpz(&["simulate", "--config", &cfg, "--seed", "5", "--out", &out]).status.success());
    let m: serde_json::Value =
        serde_json::from_slice(&std::fs::read(tmp.path().join("s/manifest.json")).unwrap()).unwrap();
    assert_eq!(m["master_seed"], 5);
}

#[test]
fn config_errors_exit_nonzero() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "bad.toml", &SIMULATE.replace("dt = 0.05", "dtt = 0.05"));
    let o = akpz(&["simulate", "--config", &cfg, "--out", &tmp.path().join("x").to_string_lossy()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("dtt"));
    let o = akpz(&["diffusivity", "--config", &write(tmp.path(), "ok.toml", SIMULATE)]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("config is for `simulate`"));
}

#[test]
fn trajectory_failure_names_the_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "blow.toml",
        "kind = \"simulate\"\nn_trajectories = 4\n[sim]\ncutoff_n = 8\nlambda = 50.0\ndt = 0.5\nt_final = 200.0\nallow_large_dt = true\nbackend = \"direct\"\n",
    );
    let o = akpz(&["simulate", "--config", &cfg, "--out", &tmp.path().join("x").to_string_lossy()]);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(!o.status.success());
    assert!(err.contains("trajectory 0 (seed "), "{err}");
}

#[test]
fn report_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = tmp.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    let o = akpz(&["report", &empty.to_string_lossy()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("no results"));

    let out = tmp.path().join("check");
    let o = akpz(&["check", "--only", "6,8", "--out", &out.to_string_lossy()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = akpz(&["report", &out.to_string_lossy()]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("2/2 criteria passed"));

    let path = out.join("acceptance.json");
    let text = std::fs::read_to_string(&path).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["criteria"][1]["passed"] = serde_json::Value::Bool(false);
    std::fs::write(&path, v.to_string()).unwrap();
    let o = akpz(&["report", &out.to_string_lossy()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("8 (multiplier calculus)"));

    std::fs::remove_file(&path).unwrap();
    let o = akpz(&["report", &out.to_string_lossy()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("acceptance.json"));
}
