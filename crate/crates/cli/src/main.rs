//! `ma2certify`: oracle checks, manufactured solves, certificates and sweeps.
//!
//! Exit status is 0 when the command ran and every invariant it checks
//! passed, 1 when it ran but some check failed, and 2 on bad input or I/O
//! errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use ma2certify_core::aux_certificate::{certify, AuxConfig};
use ma2certify_core::ma_solver::{solve, IterationRecord, SolutionField, SolveSummary};
use ma2certify_core::sweep::{
    emit_report, read_records, run_eigcheck, run_sweep, summarize, write_atomic, EigcheckConfig, RunSpec,
    SweepConfig,
};
use ma2certify_core::{ClassBounds, Error};

#[derive(Parser)]
#[command(name = "ma2certify", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compare closed-form eigen-derivatives with central differences on random diagonal matrices.
    Eigcheck {
        /// Matrix sizes (comma-separated or repeated).
        #[arg(long = "n", value_delimiter = ',', default_values_t = [2usize, 3, 4])]
        sizes: Vec<usize>,
        /// Matrices per size.
        #[arg(long, default_value_t = 100)]
        draws: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Solve a manufactured problem and write a run directory.
    Solve {
        problem: PathBuf,
        /// Run directory; defaults to `<stem>-run` next to the problem file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the auxiliary-function certificate on a run directory.
    Certify {
        run_dir: PathBuf,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        c0: Option<f64>,
        #[arg(long)]
        r: Option<f64>,
    },
    /// Run a sweep and write records.csv and summary.json.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
        /// Output directory; overrides `output_dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Refit and summarize an existing records.csv.
    Report { records: PathBuf },
}

/// Contents of `result.json` in a run directory.
#[derive(Serialize, Deserialize)]
struct RunResult {
    status: String,
    error_class: Option<String>,
    error: Option<String>,
    class_bounds: ClassBounds,
    summary: Option<SolveSummary>,
    history: Vec<IterationRecord>,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// A closed stdout (e.g. piped into `head`) is not an error.
fn print_json<T: Serialize>(v: &T) -> Result<()> {
    use std::io::Write;
    let text = serde_json::to_string_pretty(v)?;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(v)?;
    bytes.push(b'\n');
    write_atomic(path, |f| std::io::Write::write_all(f, &bytes))?;
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Eigcheck { sizes, draws, seed } => {
            let summary = run_eigcheck(&EigcheckConfig { sizes, draws, seed, ..Default::default() })?;
            print_json(&summary)?;
            Ok(summary.passed())
        }
        Command::Solve { problem, out } => solve_cmd(&problem, out),
        Command::Certify { run_dir, beta, c0, r } => certify_cmd(&run_dir, beta, c0, r),
        Command::Sweep { config, jobs, out } => sweep_cmd(&config, jobs, out),
        Command::Report { records } => {
            let recs = read_records(&records).with_context(|| format!("reading {}", records.display()))?;
            let summary = summarize(&recs);
            print_json(&summary)?;
            Ok(summary.invariants.all_pass)
        }
    }
}

fn solve_cmd(problem: &Path, out: Option<PathBuf>) -> Result<bool> {
    let spec = RunSpec::from_path(problem).with_context(|| format!("reading {}", problem.display()))?;
    let dir = out.unwrap_or_else(|| {
        let stem = problem.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        problem.with_file_name(format!("{stem}-run"))
    });
    let p = spec.problem()?;
    std::fs::create_dir_all(&dir)?;
    write_json(&dir.join("problem.json"), &spec)?;
    let class_bounds = p.bounds;
    let result = match solve(&p, &spec.solver) {
        Ok(sol) => {
            sol.write_csv(&dir.join("field.csv"))?;
            RunResult {
                status: "converged".into(),
                error_class: None,
                error: None,
                class_bounds,
                summary: Some(sol.summary()),
                history: sol.history.clone(),
            }
        }
        Err(e) => {
            let history = match &e {
                Error::NonConvergence { history } | Error::ConvexityLost { history, .. } => history.clone(),
                _ => Vec::new(),
            };
            RunResult {
                status: "failed".into(),
                error_class: Some(e.class().into()),
                error: Some(e.to_string()),
                class_bounds,
                summary: None,
                history,
            }
        }
    };
    write_json(&dir.join("result.json"), &result)?;
    print_json(&result)?;
    Ok(result.status == "converged")
}

fn certify_cmd(dir: &Path, beta: Option<f64>, c0: Option<f64>, r: Option<f64>) -> Result<bool> {
    let spec = RunSpec::from_path(&dir.join("problem.json")).context("reading problem.json")?;
    let result: RunResult = serde_json::from_slice(&std::fs::read(dir.join("result.json")).context("reading result.json")?)?;
    if result.status != "converged" {
        bail!("run in {} did not converge ({})", dir.display(), result.error_class.unwrap_or_default());
    }
    let problem = spec.problem()?;
    let sol = SolutionField::read_csv(problem, &dir.join("field.csv"), result.history)?;
    let mut cfg = AuxConfig::for_solution(&sol);
    if let Some(b) = beta {
        cfg = cfg.with_beta(b);
    }
    if let Some(c) = c0 {
        cfg = cfg.with_c0(c);
    }
    if let Some(r) = r {
        cfg = cfg.with_r(r);
    }
    let report = certify(&sol, &cfg)?;
    write_json(&dir.join("certificate.json"), &report)?;
    print_json(&report)?;
    Ok(report.invariants.all_pass())
}

fn sweep_cmd(config: &Path, jobs: Option<usize>, out: Option<PathBuf>) -> Result<bool> {
    let mut cfg = SweepConfig::from_path(config).with_context(|| format!("reading {}", config.display()))?;
    if jobs.is_some() {
        cfg.jobs = jobs;
    }
    let dir = match out {
        Some(d) => d,
        // Relative output paths are taken from the config file's directory.
        None if cfg.output_dir.is_relative() => {
            config.parent().unwrap_or(Path::new(".")).join(&cfg.output_dir)
        }
        None => cfg.output_dir.clone(),
    };
    let records = run_sweep(&cfg)?;
    let summary = summarize(&records);
    emit_report(&records, &summary, &dir)?;
    print_json(&summary)?;
    Ok(summary.invariants.all_pass)
}
