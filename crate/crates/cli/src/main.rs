use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sqglab::io::{cmd_run, cmd_verify, diagnose, parse_param, ExperimentSpec};

#[derive(Parser)]
#[command(name = "sqglab", version, about = "Dissipative QG experiments and regularity diagnostics")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate a config, run its checks and write a bundle.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-check a bundle's hashes and tolerances; exits 1 on any violation.
    Verify { dir: PathBuf },
    /// Run one single-field check on a snapshot and print its records.
    Diagnose {
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long)]
        check: String,
        #[arg(long = "param", value_parser = parse_param_arg)]
        params: Vec<(String, f64)>,
    },
}

fn parse_param_arg(s: &str) -> Result<(String, f64), String> {
    parse_param(s).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    match real_main(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn real_main(cli: Cli) -> sqglab::Result<ExitCode> {
    match cli.cmd {
        Cmd::Run { config, out } => {
            let text = std::fs::read_to_string(&config)?;
            let base = config.parent().map(PathBuf::from).unwrap_or_default();
            let spec = ExperimentSpec::parse(&text, &base)?;
            let b = cmd_run(&spec, out.as_deref())?;
            println!(
                "wrote {} ({} snapshots, {} records{})",
                b.dir.display(),
                b.manifest.snapshots.len(),
                b.records.len(),
                if b.manifest.complete { "" } else { ", incomplete" }
            );
            for e in &b.manifest.errors {
                eprintln!("  {e}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Verify { dir } => {
            let s = cmd_verify(&dir)?;
            for line in s.run_errors.iter().chain(&s.hash_mismatches).chain(&s.violations) {
                println!("FAIL {line}");
            }
            println!(
                "{}: {}/{} records within tolerance",
                if s.ok() { "ok" } else { "FAILED" },
                s.passed,
                s.records
            );
            Ok(if s.ok() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Cmd::Diagnose { snapshot, check, params } => {
            for r in diagnose(&snapshot, &check, &params)? {
                println!("{}", r.to_json_line());
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
