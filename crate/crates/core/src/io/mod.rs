//! Files, configs, records and the experiment driver.
mod bundle;
mod checks;
mod config;
mod record;
mod snapshot;
mod text;

pub use bundle::{
    cmd_run, cmd_verify, diagnose, read_manifest, write_atomic, FileEntry, Manifest, ReportBundle, SnapshotEntry,
    VerifySummary, MANIFEST,
};
pub use checks::{check_def, run_check, CheckContext, CheckDef, CHECKS};
pub use config::{CheckRequest, ExperimentSpec, InitSpec};
pub use record::{criterion_for, Criterion, Op, Record};
pub use snapshot::{
    decode_snapshot, encode_snapshot, snapshot_read, snapshot_write, ExtensionDump, SnapshotHeader, MAGIC,
};
pub use text::{fmt_f64, parse_param};
