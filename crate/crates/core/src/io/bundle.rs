//! Experiment bundles: run a config, write everything with a hashed manifest, verify.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::checks::{check_def, run_check, CheckContext};
use super::config::{CheckRequest, ExperimentSpec};
use super::record::{criterion_for, Record};
use super::snapshot::{snapshot_read, snapshot_write};
use super::text::fmt_f64;
use crate::error::{Error, Result};
use crate::extension::ExtensionConfig;
use crate::solver::{run, SimConfig};

pub const MANIFEST: &str = "manifest.json";
const FORMAT: &str = "sqglab-bundle-1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotEntry {
    /// Time with 17 significant digits.
    pub time: String,
    pub file: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub version: String,
    pub seed: u64,
    /// The only field that differs between runs of the same config.
    pub created_unix: u64,
    pub complete: bool,
    pub errors: Vec<String>,
    pub config: String,
    pub snapshots: Vec<SnapshotEntry>,
    pub files: Vec<FileEntry>,
}

#[derive(Clone, Debug)]
pub struct ReportBundle {
    pub dir: PathBuf,
    pub manifest: Manifest,
    pub records: Vec<Record>,
}

/// Writes through a temporary sibling and a rename, so readers never see half a file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn sha256_file(path: &Path) -> Result<String> {
    Ok(hex::encode(Sha256::digest(std::fs::read(path)?)))
}

fn rel(p: &str) -> Result<&str> {
    // Manifest paths are plain relative names; reject anything that climbs out.
    if p.is_empty() || p.starts_with('/') || p.split('/').any(|c| c == ".." || c.is_empty()) {
        return Err(Error::Format(format!("bad bundle path '{p}'")));
    }
    Ok(p)
}

/// Runs the simulation and every requested check, then writes the bundle to `out`
/// (or the config's `output_dir`). A failing check or simulation leaves an
/// incomplete bundle rather than an error.
pub fn cmd_run(spec: &ExperimentSpec, out: Option<&Path>) -> Result<ReportBundle> {
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| spec.output_dir.clone())
        .ok_or_else(|| Error::Config("no output directory".into()))?;
    std::fs::create_dir_all(dir.join("snapshots"))?;
    std::fs::create_dir_all(dir.join("records"))?;
    let config = spec.to_text();
    write_atomic(&dir.join("config.txt"), config.as_bytes())?;
    let mut files = vec!["config.txt".to_string()];
    let mut errors = Vec::new();
    let mut snapshots = Vec::new();
    let mut records = Vec::new();

    match spec.initial_field().and_then(|th| run(&spec.sim, &th)) {
        Err(e) => errors.push(format!("simulation: {e}")),
        Ok(traj) => {
            for (i, s) in traj.states().iter().enumerate() {
                let file = format!("snapshots/snap_{i:05}.bin");
                snapshot_write(&dir.join(&file), s, &spec.sim)?;
                snapshots.push(SnapshotEntry {
                    time: fmt_f64(s.time),
                    file: file.clone(),
                });
                files.push(file);
            }
            let ctx = CheckContext {
                cfg: &spec.sim,
                ext: &spec.extension,
                traj: Some(&traj),
                field: None,
                seed: spec.seed,
            };
            let results: Vec<(&CheckRequest, Result<Vec<Record>>)> =
                spec.checks.par_iter().map(|c| (c, run_check(c, &ctx))).collect();
            for (c, r) in results {
                let file = format!("records/{}.jsonl", c.name);
                let recs = match r {
                    Ok(v) => v,
                    Err(e) => {
                        errors.push(format!("{}: {e}", c.name));
                        Vec::new()
                    }
                };
                let body: String = recs.iter().map(|r| r.to_json_line() + "\n").collect();
                write_atomic(&dir.join(&file), body.as_bytes())?;
                files.push(file);
                records.extend(recs);
            }
        }
    }
    let files = files
        .into_iter()
        .map(|p| {
            Ok(FileEntry {
                sha256: sha256_file(&dir.join(&p))?,
                path: p,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = Manifest {
        format: FORMAT.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed: spec.seed,
        created_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        complete: errors.is_empty(),
        errors,
        config,
        snapshots,
        files,
    };
    write_atomic(&dir.join(MANIFEST), serde_json::to_string_pretty(&manifest)?.as_bytes())?;
    Ok(ReportBundle { dir, manifest, records })
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerifySummary {
    pub records: usize,
    pub passed: usize,
    /// Records failing their tolerance, or unknown to the table.
    pub violations: Vec<String>,
    pub hash_mismatches: Vec<String>,
    /// Errors the run itself recorded.
    pub run_errors: Vec<String>,
}

impl VerifySummary {
    pub fn ok(&self) -> bool {
        self.violations.is_empty() && self.hash_mismatches.is_empty() && self.run_errors.is_empty()
    }
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let p = dir.join(MANIFEST);
    if !p.is_file() {
        return Err(Error::NoBundle(dir.to_path_buf()));
    }
    let m: Manifest = serde_json::from_slice(&std::fs::read(p)?)?;
    if m.format != FORMAT {
        return Err(Error::Format(format!("unknown bundle format '{}'", m.format)));
    }
    Ok(m)
}

/// Re-hashes every file and re-judges every record against the tolerance table.
pub fn cmd_verify(dir: &Path) -> Result<VerifySummary> {
    let m = read_manifest(dir)?;
    let mut s = VerifySummary {
        run_errors: m.errors.clone(),
        ..Default::default()
    };
    if !m.complete && s.run_errors.is_empty() {
        s.run_errors.push("bundle marked incomplete".into());
    }
    for f in &m.files {
        let p = dir.join(rel(&f.path)?);
        match sha256_file(&p) {
            Ok(h) if h == f.sha256 => {}
            Ok(_) => s.hash_mismatches.push(format!("{}: hash mismatch", f.path)),
            Err(e) => s.hash_mismatches.push(format!("{}: {e}", f.path)),
        }
    }
    if let Ok(rd) = std::fs::read_dir(dir.join("records")) {
        for e in rd.flatten() {
            let name = format!("records/{}", e.file_name().to_string_lossy());
            if !m.files.iter().any(|f| f.path == name) {
                s.hash_mismatches.push(format!("{name}: not in the manifest"));
            }
        }
    }
    for f in m.files.iter().filter(|f| f.path.starts_with("records/")) {
        let Ok(text) = std::fs::read_to_string(dir.join(rel(&f.path)?)) else {
            continue;
        };
        for (no, line) in text.lines().enumerate() {
            let where_ = format!("{}:{}", f.path, no + 1);
            let r = match Record::parse_line(line) {
                Ok(r) => r,
                Err(e) => {
                    s.violations.push(format!("{where_}: {e}"));
                    continue;
                }
            };
            s.records += 1;
            match criterion_for(&r.check, &r.quantity) {
                None => s.violations.push(format!("{where_}: no tolerance for {}/{}", r.check, r.quantity)),
                Some(c) if c != r.criterion => {
                    s.violations.push(format!("{where_}: stored tolerance differs from the table"))
                }
                Some(c) if !c.holds(r.value) => s.violations.push(format!(
                    "{where_}: {}/{} = {} fails {:?} {}",
                    r.check, r.quantity, r.value, c.op, c.bound
                )),
                Some(_) => s.passed += 1,
            }
        }
    }
    Ok(s)
}

/// Runs one single-field check on a snapshot file.
pub fn diagnose(snapshot: &Path, check: &str, params: &[(String, f64)]) -> Result<Vec<Record>> {
    let def = check_def(check).ok_or_else(|| Error::Config(format!("unknown check '{check}'")))?;
    if def.trajectory {
        return Err(Error::Invalid(format!("check '{check}' needs a trajectory; use `run`")));
    }
    let (h, theta) = snapshot_read(snapshot)?;
    let grid = h.grid()?;
    let cfg = SimConfig::new(grid, h.kappa, h.alpha, 1.0, 0.0)?;
    let ext = ExtensionConfig::for_grid(h.alpha.min(0.999), &grid)?;
    let req = CheckRequest {
        name: check.to_string(),
        params: params.iter().cloned().collect(),
    };
    for k in req.params.keys() {
        if !def.params.contains(&k.as_str()) {
            return Err(Error::Config(format!("check '{check}' has no parameter '{k}'")));
        }
    }
    let ctx = CheckContext {
        cfg: &cfg,
        ext: &ext,
        traj: None,
        field: Some((h.time, theta.forward())),
        seed: 0,
    };
    run_check(&req, &ctx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;

    fn spec(checks: &[&str]) -> ExperimentSpec {
        let g = Grid::periodic(16).unwrap();
        let sim = SimConfig::new(g, 0.2, 0.5, 0.01, 0.1).unwrap().with_stride(2);
        let mut s = ExperimentSpec::new(sim, 5).unwrap();
        s.init.kmax = 3.0;
        for c in checks {
            s = s.with_check(c, &[]).unwrap();
        }
        s
    }

    fn strip_time(mut m: Manifest) -> Manifest {
        m.created_unix = 0;
        m
    }

    #[test]
    fn empty_check_list_writes_trajectory_only() {
        let d = tempfile::tempdir().unwrap();
        let b = cmd_run(&spec(&[]), Some(d.path())).unwrap();
        assert!(b.manifest.complete && b.records.is_empty());
        assert_eq!(b.manifest.snapshots.len(), 6);
        assert!(cmd_verify(d.path()).unwrap().ok());
    }

    #[test]
    fn same_spec_same_bundle_and_corruption_is_caught() {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let s = spec(&["energy_balance", "max_principle", "cordoba"]);
        let ra = cmd_run(&s, Some(a.path())).unwrap();
        let rb = cmd_run(&s, Some(b.path())).unwrap();
        assert_eq!(strip_time(ra.manifest.clone()), strip_time(rb.manifest));
        for c in ["energy_balance", "max_principle", "cordoba"] {
            let f = format!("records/{c}.jsonl");
            assert_eq!(std::fs::read(a.path().join(&f)).unwrap(), std::fs::read(b.path().join(&f)).unwrap());
        }
        let v = cmd_verify(a.path()).unwrap();
        assert!(v.ok(), "{v:?}");
        assert_eq!(v.records, 4);

        let snap = a.path().join(&ra.manifest.snapshots[2].file);
        let mut bytes = std::fs::read(&snap).unwrap();
        let last = bytes.len() - 1;
        bytes[last] ^= 1;
        std::fs::write(&snap, bytes).unwrap();
        let v = cmd_verify(a.path()).unwrap();
        assert!(!v.ok() && v.hash_mismatches.len() == 1, "{v:?}");
    }

    #[test]
    fn failing_record_and_missing_bundle() {
        let d = tempfile::tempdir().unwrap();
        assert!(matches!(cmd_verify(d.path()), Err(Error::NoBundle(_))));
        cmd_run(&spec(&["max_principle"]), Some(d.path())).unwrap();
        // Forge a failing value and re-hash so only the tolerance catches it.
        let f = d.path().join("records/max_principle.jsonl");
        let text = std::fs::read_to_string(&f).unwrap();
        let mut r = Record::parse_line(text.trim()).unwrap();
        r.value = 0.5;
        std::fs::write(&f, r.to_json_line() + "\n").unwrap();
        let mut m = read_manifest(d.path()).unwrap();
        for e in &mut m.files {
            e.sha256 = sha256_file(&d.path().join(&e.path)).unwrap();
        }
        std::fs::write(d.path().join(MANIFEST), serde_json::to_string(&m).unwrap()).unwrap();
        let v = cmd_verify(d.path()).unwrap();
        assert!(v.hash_mismatches.is_empty() && v.violations.len() == 1, "{v:?}");
    }

    #[test]
    fn failing_check_marks_bundle_incomplete() {
        let d = tempfile::tempdir().unwrap();
        // Half width L/2 is outside the zoom's admissible range.
        let s = spec(&[]).with_check("zoom", &[("r0", 3.0)]).unwrap();
        let b = cmd_run(&s, Some(d.path())).unwrap();
        assert!(!b.manifest.complete && b.manifest.errors[0].starts_with("zoom"));
        assert!(!cmd_verify(d.path()).unwrap().ok());
    }

    #[test]
    fn diagnose_on_a_snapshot() {
        let d = tempfile::tempdir().unwrap();
        let b = cmd_run(&spec(&[]), Some(d.path())).unwrap();
        let snap = d.path().join(&b.manifest.snapshots[5].file);
        let r = diagnose(&snap, "cordoba", &[]).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r.iter().all(Record::pass));
        assert!(diagnose(&snap, "energy_balance", &[]).is_err());
        assert!(diagnose(&snap, "cordoba", &[("bogus".into(), 1.0)]).is_err());
    }
}
