//! `reebkit`: run scenario files (or directories of them) and write JSON
//! reports. Exit status 0 when every report is valid, 1 when a certificate
//! is invalid or a computation fails, 2 on unreadable or malformed input.

mod run;
mod scenario;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use run::{run, Overrides, Report, Status};
use scenario::{Command, ParseError, PlugSection, Scenario};

#[derive(Parser)]
#[command(name = "reebkit", version, about = "Reeb orbit spectra, rigidity certificates and the fast-orbit plug")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one scenario file, or every *.toml file in a directory.
    Run {
        path: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Parse scenarios without running them.
    Check { path: PathBuf },
    /// Build the plug from (ε, δ), or choose them for (c₁, c₂).
    Plug {
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        c1: Option<f64>,
        #[arg(long)]
        c2: Option<f64>,
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[command(flatten)]
        flags: Flags,
    },
}

#[derive(Args, Clone, Default)]
struct Flags {
    /// Integrator tolerance (local error per unit time).
    #[arg(long)]
    tol: Option<f64>,
    /// Grid resolution: factor enclosure grid, or plug (t, x) intervals.
    #[arg(long)]
    grid: Option<usize>,
    /// Period cap of analytic spectra.
    #[arg(long)]
    cap: Option<f64>,
    /// Report file, or directory for batch runs.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Use the bounds for exactly fillable manifolds.
    #[arg(long)]
    filled: bool,
    /// Seeds per coordinate of orbit scans.
    #[arg(long)]
    seed_grid: Option<usize>,
}

impl Flags {
    fn overrides(&self) -> Result<Overrides, String> {
        if let Some(t) = self.tol.filter(|t| !(*t > 0.0)) {
            return Err(format!("--tol must be positive, got {t}"));
        }
        if let Some(c) = self.cap.filter(|c| !(*c > 0.0)) {
            return Err(format!("--cap must be positive, got {c}"));
        }
        Ok(Overrides { tol: self.tol, grid: self.grid, cap: self.cap, filled: self.filled, seed_grid: self.seed_grid })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Cmd::Check { path } => match load(&path) {
            Ok((items, _)) => {
                for (label, _) in &items {
                    eprintln!("{label}: ok");
                }
                ExitCode::SUCCESS
            }
            Err(errors) => parse_failure(&errors),
        },
        Cmd::Run { path, flags } => {
            let overrides = match flags.overrides() {
                Ok(o) => o,
                Err(e) => return usage(&e),
            };
            let (items, batch) = match load(&path) {
                Ok(v) => v,
                Err(errors) => return parse_failure(&errors),
            };
            finish(execute(&items, &overrides), batch, flags.out.as_deref())
        }
        Cmd::Plug { epsilon, delta, c1, c2, dim, flags } => {
            let overrides = match flags.overrides() {
                Ok(o) => o,
                Err(e) => return usage(&e),
            };
            if !((epsilon.is_some() && delta.is_some()) || (c1.is_some() && c2.is_some())) {
                return usage("plug needs --epsilon and --delta, or --c1 and --c2");
            }
            let s = Scenario {
                plug: Some(PlugSection { epsilon, delta, c1, c2, dimension: dim, s_grid: None }),
                ..Scenario::empty(Command::Plug)
            };
            finish(execute(&[("plug".into(), s)], &overrides), false, flags.out.as_deref())
        }
    }
}

/// Scenario files under `path` in sorted order, with a flag for batch mode.
fn load(path: &Path) -> Result<(Vec<(String, Scenario)>, bool), Vec<ParseError>> {
    let files = if path.is_dir() {
        let mut files: Vec<PathBuf> = std::fs::read_dir(path)
            .map_err(|e| vec![ParseError { file: path.display().to_string(), message: e.to_string() }])?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "toml"))
            .collect();
        files.sort();
        files
    } else {
        vec![path.to_path_buf()]
    };
    let mut items = Vec::new();
    let mut errors = Vec::new();
    for f in &files {
        match Scenario::load(f) {
            Ok(s) => items.push((stem(f), s)),
            Err(e) => errors.push(e),
        }
    }
    if errors.is_empty() {
        Ok((items, path.is_dir()))
    } else {
        Err(errors)
    }
}

fn stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "scenario".into())
}

fn execute(items: &[(String, Scenario)], o: &Overrides) -> Vec<Report> {
    items.par_iter().map(|(label, s)| run(s, label, o)).collect()
}

fn finish(reports: Vec<Report>, batch: bool, out: Option<&Path>) -> ExitCode {
    for r in &reports {
        let status = match r.status {
            Status::Valid => "valid",
            Status::Invalid => "invalid",
            Status::Error => "error",
        };
        match &r.error {
            Some(e) => eprintln!("{}: {status}: {e}", r.scenario),
            None => eprintln!("{}: {status}", r.scenario),
        }
    }
    if let Err(e) = write_reports(&reports, batch, out) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    if reports.iter().all(|r| r.status == Status::Valid) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn pretty<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("reports serialize")
}

fn write_reports(reports: &[Report], batch: bool, out: Option<&Path>) -> std::io::Result<()> {
    match (out, batch) {
        (None, false) => println!("{}", pretty(&reports[0])),
        (None, true) => println!("{}", pretty(&reports)),
        (Some(dir), true) => {
            std::fs::create_dir_all(dir)?;
            for r in reports {
                std::fs::write(dir.join(format!("{}.json", r.scenario)), pretty(r) + "\n")?;
            }
        }
        (Some(p), false) => {
            let target = if p.is_dir() { p.join(format!("{}.json", reports[0].scenario)) } else { p.to_path_buf() };
            std::fs::write(target, pretty(&reports[0]) + "\n")?;
        }
    }
    Ok(())
}

fn parse_failure(errors: &[ParseError]) -> ExitCode {
    for e in errors {
        eprintln!("error: {e}");
    }
    ExitCode::from(2)
}

fn usage(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}
