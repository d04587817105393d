use std::path::Path;
use std::process::{Command, Output};

fn sqglab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sqglab")).args(args).output().unwrap()
}

fn write_config(dir: &Path) -> std::path::PathBuf {
    let p = dir.join("exp.cfg");
    std::fs::write(
        &p,
        "grid = 64\nkappa = 0.2\nalpha = 0.5\ndt = 0.01\nt_end = 0.1\nsnapshot_stride = 5\n\
         init.kmax = 3\nseed = 11\nchecks = energy_balance, cordoba\n",
    )
    .unwrap();
    p
}

#[test]
fn run_verify_diagnose() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(d.path());
    let out = d.path().join("bundle");
    let r = sqglab(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    assert!(String::from_utf8_lossy(&r.stdout).contains("3 records"));

    let v = sqglab(&["verify", out.to_str().unwrap()]);
    assert_eq!(v.status.code(), Some(0), "{}", String::from_utf8_lossy(&v.stdout));

    let snap = out.join("snapshots/snap_00002.bin");
    let g = sqglab(&["diagnose", "--snapshot", snap.to_str().unwrap(), "--check", "holder", "--param", "mu=0.5", "--param", "r0=1.6"]);
    assert!(g.status.success(), "{}", String::from_utf8_lossy(&g.stderr));
    let text = String::from_utf8_lossy(&g.stdout);
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().all(|l| l.starts_with("{\"check\":\"holder\"")));

    // Corrupt a snapshot: verify must now fail with a hash mismatch.
    let mut bytes = std::fs::read(&snap).unwrap();
    bytes[20] ^= 0x40;
    std::fs::write(&snap, bytes).unwrap();
    let v = sqglab(&["verify", out.to_str().unwrap()]);
    assert_eq!(v.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&v.stdout).contains("hash mismatch"));
}

#[test]
fn explicit_errors() {
    let d = tempfile::tempdir().unwrap();
    let v = sqglab(&["verify", d.path().to_str().unwrap()]);
    assert_eq!(v.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&v.stderr).contains("no bundle"));

    let bad = d.path().join("bad.cfg");
    std::fs::write(&bad, "checks = not_a_check\n").unwrap();
    let r = sqglab(&["run", "--config", bad.to_str().unwrap(), "--out", d.path().join("o").to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("unknown check"));

    let p = sqglab(&["diagnose", "--snapshot", "x", "--check", "holder", "--param", "nonsense"]);
    assert!(!p.status.success());
}
