//! Command-line harness.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 usage or input error, 3 capacity
//! exceeded, 4 numerical failure (including failed `verify` checks).

mod commands;
mod config;
mod verify;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use commands::{
    cell_seed, decompose, solve, solve_csv, sweep, CellTiming, Decomposition, MinimalLayers, SolveRecord,
    SweepRecord, SweepRow, Timing,
};
pub use config::{AnsatzConfig, ExperimentConfig, OutputConfig, ProblemConfig, Provenance, SweepConfig};
pub use verify::{run_checks, Check};

use crate::error::Error;
use crate::vqa::Backend;

pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MatrixKind {
    #[value(name = "A")]
    A,
    #[value(name = "A2")]
    A2,
    #[value(name = "B")]
    B,
    #[value(name = "C")]
    C,
    #[value(name = "dD")]
    Dd,
    #[value(name = "tridiag")]
    Tridiag,
    #[value(name = "pentadiag")]
    Pentadiag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendKind {
    Exact,
    Shots,
}

#[derive(Debug, Parser)]
#[command(name = "poisson-vqa", version, about = "Variational Poisson solver workbench")]
pub struct Cli {
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the tensor-term decomposition of a matrix as JSON.
    Decompose {
        #[arg(long, value_enum)]
        matrix: MatrixKind,
        #[arg(long)]
        m: usize,
        /// Dimension for `--matrix dD`.
        #[arg(long, default_value_t = 2)]
        d: usize,
        /// Band values, lowest diagonal first: 3 for tridiag, 5 for pentadiag.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        bands: Vec<f64>,
        /// Compare against the directly built dense matrix.
        #[arg(long)]
        verify: bool,
        /// Write the JSON here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one variational solve.
    Solve {
        #[command(flatten)]
        run: RunArgs,
        /// Qubit count (overrides problem.m).
        #[arg(long)]
        m: Option<usize>,
        /// Ansatz depth (overrides ansatz.layers).
        #[arg(long)]
        layers: Option<usize>,
    },
    /// Increase the depth per qubit count until the fidelity target is met.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Qubit counts (overrides sweep.m).
        #[arg(long, value_delimiter = ',')]
        m: Vec<usize>,
        /// Depth cap (overrides sweep.p_max).
        #[arg(long)]
        p_max: Option<usize>,
    },
    /// Run the built-in reconstruction and property checks.
    Verify {
        /// Also write verify.json here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON experiment config; defaults apply to missing keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory; without it results go to standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub backend: Option<BackendKind>,
    /// Shots per measured observable (implies the shots backend).
    #[arg(long)]
    pub shots: Option<u64>,
}

const DEFAULT_SHOTS: u64 = 10_000;

impl RunArgs {
    fn resolve(&self) -> crate::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.output.dir = Some(out.clone());
        }
        let shot_seed = match cfg.backend {
            Backend::Shots { seed, .. } => seed,
            Backend::Exact => cfg.seed,
        };
        match (self.backend, self.shots) {
            (Some(BackendKind::Exact), Some(_)) => {
                return Err(Error::input("--shots conflicts with --backend exact"));
            }
            (Some(BackendKind::Exact), None) => cfg.backend = Backend::Exact,
            (Some(BackendKind::Shots), shots) | (None, shots @ Some(_)) => {
                let default = match cfg.backend {
                    Backend::Shots { shots, .. } => shots,
                    Backend::Exact => DEFAULT_SHOTS,
                };
                cfg.backend = Backend::Shots {
                    shots: shots.unwrap_or(default),
                    seed: shot_seed,
                };
            }
            (None, None) => {}
        }
        Ok(cfg)
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Input(_) | Error::Json(_) => EXIT_USAGE,
        Error::Capacity { .. } => EXIT_CAPACITY,
        Error::Numerical(_) => EXIT_NUMERICAL,
        Error::Io(_) => EXIT_IO,
    }
}

fn json<T: serde::Serialize>(v: &T) -> crate::Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn run_command(command: Command) -> crate::Result<i32> {
    match command {
        Command::Decompose {
            matrix,
            m,
            d,
            bands,
            verify,
            out,
        } => {
            let dec = decompose(matrix, m, d, &bands, verify)?;
            let text = format!("{}\n", dec.sum.to_json()?);
            match out {
                Some(path) => std::fs::write(path, text)?,
                None => print!("{text}"),
            }
            eprintln!("{} terms on {} qubits", dec.sum.len(), dec.sum.qubits);
            if verify {
                match dec.residual {
                    Some(r) => eprintln!("verification residual: {r}"),
                    None => eprintln!("verification skipped: matrix exceeds the dense cap"),
                }
            }
            Ok(0)
        }
        Command::Solve { run, m, layers } => {
            let mut cfg = run.resolve()?;
            if let Some(m) = m {
                cfg.problem.m = m;
            }
            if let Some(p) = layers {
                cfg.ansatz.layers = p;
            }
            let (record, timing) = solve(&cfg)?;
            match &cfg.output.dir {
                Some(dir) => {
                    commands::write_file(dir, "run.json", &json(&record)?)?;
                    commands::write_file(dir, "trace.csv", &solve_csv(&record))?;
                    commands::write_file(dir, "timing.json", &json(&timing)?)?;
                    let r = &record.run;
                    println!(
                        "m={} p={} fidelity={:.6} cost={:.3e} iterations={}",
                        cfg.problem.m,
                        r.ansatz.layers,
                        r.fidelity.unwrap_or(0.0),
                        r.cost_opt,
                        r.iterations
                    );
                }
                None => print!("{}", json(&record)?),
            }
            Ok(0)
        }
        Command::Sweep { run, m, p_max } => {
            let mut cfg = run.resolve()?;
            if !m.is_empty() {
                cfg.sweep.m = m;
            }
            if let Some(p) = p_max {
                cfg.sweep.p_max = p;
            }
            let (record, timing) = sweep(&cfg)?;
            match &cfg.output.dir {
                Some(dir) => {
                    commands::write_file(dir, "sweep.csv", &record.to_csv())?;
                    commands::write_file(dir, "sweep.json", &json(&record)?)?;
                    commands::write_file(dir, "timing.json", &json(&timing)?)?;
                    for ml in &record.minimal_layers {
                        match ml.p {
                            Some(p) => println!("m={} minimal p={} fidelity={:.6} cost={:.3e}", ml.m, p, ml.fidelity, ml.cost),
                            None => println!("m={} target not reached; best fidelity={:.6}", ml.m, ml.fidelity),
                        }
                    }
                }
                None => print!("{}", record.to_csv()),
            }
            Ok(0)
        }
        Command::Verify { out } => {
            let checks = run_checks();
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if let Some(dir) = out {
                commands::write_file(&dir, "verify.json", &json(&checks)?)?;
            }
            Ok(if checks.iter().all(|c| c.passed) { 0 } else { EXIT_NUMERICAL })
        }
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return EXIT_IO;
        }
    };
    match pool.install(|| run_command(cli.command)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("poisson-vqa").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn parses_bands_with_negative_values() {
        let cli = parse(&["decompose", "--matrix", "tridiag", "--bands", "-1,2,-1", "--m", "2"]);
        match cli.command {
            Command::Decompose { bands, matrix, .. } => {
                assert_eq!(bands, vec![-1.0, 2.0, -1.0]);
                assert_eq!(matrix, MatrixKind::Tridiag);
            }
            _ => panic!("wrong command"),
        }
    }

    #[test]
    fn backend_flags_resolve() {
        let run = |args: &[&str]| match parse(args).command {
            Command::Solve { run, .. } => run.resolve(),
            _ => unreachable!(),
        };
        assert_eq!(run(&["solve", "--seed", "3"]).unwrap().backend, Backend::Exact);
        assert_eq!(
            run(&["solve", "--seed", "3", "--shots", "500"]).unwrap().backend,
            Backend::Shots { shots: 500, seed: 3 }
        );
        assert_eq!(
            run(&["solve", "--backend", "shots"]).unwrap().backend,
            Backend::Shots {
                shots: DEFAULT_SHOTS,
                seed: 0
            }
        );
        assert!(run(&["solve", "--backend", "exact", "--shots", "5"]).is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Input("x".into())), EXIT_USAGE);
        assert_eq!(
            exit_code(&Error::Capacity {
                what: "x",
                qubits: 20,
                cap: 12
            }),
            EXIT_CAPACITY
        );
        assert_eq!(exit_code(&Error::Numerical("x".into())), EXIT_NUMERICAL);
        assert_eq!(main_with_args(["poisson-vqa", "frobnicate"]), EXIT_USAGE);
        assert_eq!(main_with_args(["poisson-vqa", "decompose", "--matrix", "A", "--m", "0"]), EXIT_USAGE);
        assert_eq!(main_with_args(["poisson-vqa", "decompose", "--matrix", "dD", "--m", "5", "--d", "3", "--verify"]), 0);
    }
}
