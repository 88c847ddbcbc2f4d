use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hydroblow(args: &[&str], out_root: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hydroblow"))
        .args(args)
        .env("HYDROBLOW_OUT", out_root)
        .output()
        .expect("binary runs")
}

#[test]
fn profile_beta_zero_is_exponential() {
    let tmp = tempfile::tempdir().unwrap();
    let out = hydroblow(&["profile", "--beta", "0", "--zmax", "5", "--points", "6"], tmp.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("z,phi,phi_prime,psi,residual"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 6);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r[0], i as f64);
        assert_eq!(r[1], (-r[0]).exp());
    }
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(hydroblow(&["frobnicate"], tmp.path()).status.code(), Some(1));
    assert_eq!(hydroblow(&["profile", "--beta"], tmp.path()).status.code(), Some(1));
    assert_eq!(hydroblow(&["--help"], tmp.path()).status.code(), Some(0));

    let cfg = tmp.path().join("bad.cfg");
    fs::write(&cfg, "kind = custom\nbeta = -1\n").unwrap();
    let out = hydroblow(&["scenario", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("beta ≥ 0"));

    fs::write(&cfg, "kind = smooth\nunknown.key = 3\n").unwrap();
    let out = hydroblow(&["simulate", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let missing = tmp.path().join("nowhere");
    let out = hydroblow(&["fit", "--input", missing.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn accept_exit_status() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(hydroblow(&["accept", "--only", "3,13"], tmp.path()).status.code(), Some(0));
    assert_eq!(hydroblow(&["accept", "--only", "2"], tmp.path()).status.code(), Some(4));
    assert_eq!(hydroblow(&["accept", "--only", "14"], tmp.path()).status.code(), Some(2));
}

const SMALL: &str = "kind = pressureless_exact\ngrid.n = 64\noutputs.dir = run\n";

#[test]
fn scenario_outputs_are_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("p.cfg");
    fs::write(&cfg, SMALL).unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for root in [&a, &b] {
        let out = hydroblow(&["scenario", "--config", cfg.to_str().unwrap()], root);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.join("run/manifest.json")).unwrap()).unwrap();
    let files: Vec<&str> = manifest["outputs"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(files.len(), 6);
    for f in files {
        assert!(a.join("run").join(f).exists(), "{f}");
        if f != "manifest.json" {
            assert_eq!(fs::read(a.join("run").join(f)).unwrap(), fs::read(b.join("run").join(f)).unwrap(), "{f}");
        }
    }
    let verdicts: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.join("run/verdicts.json")).unwrap()).unwrap();
    for v in verdicts.as_array().unwrap() {
        for key in ["claim", "pass", "measured", "target", "tolerance"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }
}

#[test]
fn fit_reads_a_run_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("p.cfg");
    fs::write(&cfg, SMALL).unwrap();
    assert!(hydroblow(&["modulate", "--config", cfg.to_str().unwrap()], tmp.path()).status.success());
    let run = tmp.path().join("run");
    let out = hydroblow(&["fit", "--input", run.to_str().unwrap(), "--beta", "1"], tmp.path());
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let t = v["blowup"]["T"].as_f64().unwrap();
    assert!((t - 1.0).abs() < 0.01, "T = {t}");
}

#[test]
fn sweep_writes_per_run_directories() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("s.cfg");
    fs::write(&cfg, "kind = smooth\ngrid.n = 128\nsweep.kappa = 0, 0.01\nsweep.lambda0 = 1e-3\noutputs.dir = sw\n").unwrap();
    let out = hydroblow(&["sweep", "--config", cfg.to_str().unwrap()], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("sw/sweep.json")).unwrap()).unwrap();
    let runs = summary["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 2);
    for r in runs {
        assert!(tmp.path().join("sw").join(r["dir"].as_str().unwrap()).join("manifest.json").exists());
    }
}
