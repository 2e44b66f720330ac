use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decomp::{
    decompose_a, decompose_a_squared, decompose_b, decompose_c, decompose_pentadiagonal, decompose_poisson_dd,
    decompose_tridiagonal,
};
use crate::error::{Error, Result};
use crate::lattice::{
    build_dense_poisson_matrix, build_kron_sum_matrix, dense_banded_toeplitz, PoissonSystem, SystemRecord,
    DEFAULT_DENSE_CAP,
};
use crate::opalg::OperatorSum;
use crate::rng::derive_seed;
use crate::vqa::{optimize, optimize_from, random_starts, real_state, CostModel, Start, VqaRun};

use super::config::{ExperimentConfig, Provenance};
use super::MatrixKind;

/// A decomposition and, when requested, its dense residual.
pub struct Decomposition {
    pub sum: OperatorSum,
    pub residual: Option<f64>,
}

fn bands_or(bands: &[f64], want: usize, default: &[f64]) -> Result<Vec<f64>> {
    if bands.is_empty() {
        return Ok(default.to_vec());
    }
    if bands.len() != want {
        return Err(Error::input(format!("expected {want} band values, got {}", bands.len())));
    }
    Ok(bands.to_vec())
}

pub fn decompose(kind: MatrixKind, m: usize, d: usize, bands: &[f64], verify: bool) -> Result<Decomposition> {
    if !bands.is_empty() && !matches!(kind, MatrixKind::Tridiag | MatrixKind::Pentadiag) {
        return Err(Error::input("--bands applies to tridiag and pentadiag only"));
    }
    let (sum, direct): (OperatorSum, Box<dyn Fn() -> Result<DMatrix<f64>>>) = match kind {
        MatrixKind::A => (decompose_a(m)?, Box::new(move || build_dense_poisson_matrix(m))),
        MatrixKind::A2 => (
            decompose_a_squared(m)?,
            Box::new(move || build_dense_poisson_matrix(m).map(|a| &a * &a)),
        ),
        MatrixKind::B => (
            decompose_b(m)?,
            Box::new(move || Ok(dense_banded_toeplitz(m, &[(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)]))),
        ),
        MatrixKind::C => (
            decompose_c(m)?,
            Box::new(move || {
                let n = 1usize << m;
                let mut c = DMatrix::zeros(n, n);
                c[(0, 0)] += 1.0;
                c[(n - 1, n - 1)] += 1.0;
                Ok(c)
            }),
        ),
        MatrixKind::Dd => (decompose_poisson_dd(d, m)?, Box::new(move || build_kron_sum_matrix(d, m))),
        MatrixKind::Tridiag => {
            let t = bands_or(bands, 3, &[-1.0, 2.0, -1.0])?;
            let sum = decompose_tridiagonal(t[0], t[1], t[2], m)?;
            (
                sum,
                Box::new(move || Ok(dense_banded_toeplitz(m, &[(-1, t[0]), (0, t[1]), (1, t[2])]))),
            )
        }
        MatrixKind::Pentadiag => {
            let t = bands_or(bands, 5, &[1.0, -4.0, 6.0, -4.0, 1.0])?;
            let sum = decompose_pentadiagonal(t[0], t[1], t[2], t[3], t[4], m)?;
            (
                sum,
                Box::new(move || {
                    Ok(dense_banded_toeplitz(
                        m,
                        &[(-2, t[0]), (-1, t[1]), (0, t[2]), (1, t[3]), (2, t[4])],
                    ))
                }),
            )
        }
    };
    let residual = if verify && sum.qubits <= DEFAULT_DENSE_CAP {
        let diff = sum.to_dense()? - direct()?;
        Some(diff.iter().fold(0.0f64, |acc, x| acc.max(x.abs())))
    } else {
        None
    };
    Ok(Decomposition { sum, residual })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveRecord {
    pub provenance: Provenance,
    pub config: ExperimentConfig,
    pub system: SystemRecord,
    pub run: VqaRun,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub command: String,
    pub wall_clock_seconds: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub cells: Vec<CellTiming>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CellTiming {
    pub m: usize,
    pub p: usize,
    pub wall_clock_seconds: f64,
}

fn stripped(cfg: &ExperimentConfig) -> ExperimentConfig {
    let mut c = cfg.clone();
    c.output = Default::default();
    c
}

fn model_for(cfg: &ExperimentConfig, system: &PoissonSystem) -> Result<CostModel> {
    let mut model = CostModel::from_system(system, cfg.backend)?;
    model.debias_overlap = cfg.debias_overlap;
    Ok(model)
}

/// One optimization of the configured problem.
pub fn solve(cfg: &ExperimentConfig) -> Result<(SolveRecord, Timing)> {
    let clock = Instant::now();
    cfg.validate()?;
    let p = &cfg.problem;
    let system = PoissonSystem::new(p.d, p.m, &p.rhs)?;
    let model = model_for(cfg, &system)?;
    let x = real_state(&system.x_reference)?;
    let spec = cfg.ansatz.spec(system.qubits(), cfg.ansatz.layers)?;
    let run = optimize(&model, &spec, &cfg.optimizer, cfg.seed, Some(&x))?;
    let mut seeds = vec![cfg.seed];
    seeds.extend(&run.seeds);
    let record = SolveRecord {
        provenance: Provenance::new(cfg.hash(), seeds),
        config: stripped(cfg),
        system: system.record(),
        run,
    };
    let timing = Timing {
        command: "solve".into(),
        wall_clock_seconds: clock.elapsed().as_secs_f64(),
        cells: Vec::new(),
    };
    Ok((record, timing))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub m: usize,
    pub p: usize,
    pub fidelity: f64,
    pub cost: f64,
    pub iterations: usize,
    pub met_target: bool,
    pub theta_opt: Vec<f64>,
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimalLayers {
    pub m: usize,
    /// First depth meeting the targets; `None` if the range was exhausted.
    pub p: Option<usize>,
    pub fidelity: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub provenance: Provenance,
    pub config: ExperimentConfig,
    pub minimal_layers: Vec<MinimalLayers>,
    pub rows: Vec<SweepRow>,
}

impl SweepRecord {
    pub fn to_csv(&self) -> String {
        let mut out = self.provenance.csv_comment();
        out.push_str("m,p,best_fidelity,cost,iterations,met_target\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{},{},{}", r.m, r.p, r.fidelity, r.cost, r.iterations, r.met_target);
        }
        out
    }
}

/// Seed of sweep cell `(m, p)`.
pub fn cell_seed(master: u64, m: usize, p: usize) -> u64 {
    derive_seed(derive_seed(master, m as u64), p as u64)
}

fn sweep_one_m(cfg: &ExperimentConfig, m: usize) -> Result<Vec<(SweepRow, f64)>> {
    let system = PoissonSystem::new(cfg.problem.d, m, &cfg.problem.rhs)?;
    let model = model_for(cfg, &system)?;
    let x = real_state(&system.x_reference)?;
    let s = &cfg.sweep;
    let mut rows = Vec::new();
    let mut previous: Option<Vec<f64>> = None;
    for p in s.p_min..=s.p_max {
        let clock = Instant::now();
        let spec = cfg.ansatz.spec(system.qubits(), p)?;
        let seed = cell_seed(cfg.seed, m, p);
        let mut starts = random_starts(&spec, &cfg.optimizer, seed);
        if let (true, Some(prev)) = (s.warm_start, &previous) {
            // layer parameters are contiguous, so zeros append an identity layer
            let mut theta = prev.clone();
            theta.resize(spec.parameter_count(), 0.0);
            starts.push(Start {
                seed: derive_seed(seed, cfg.optimizer.restarts as u64),
                theta,
            });
        }
        let run = optimize_from(&model, &spec, &cfg.optimizer, &starts, Some(&x))?;
        let fidelity = run.fidelity.unwrap_or(0.0);
        let met = fidelity >= s.fidelity_target && s.cost_target.is_none_or(|c| run.exact_cost_opt <= c);
        previous = Some(run.theta_opt.clone());
        rows.push((
            SweepRow {
                m,
                p,
                fidelity,
                cost: run.exact_cost_opt,
                iterations: run.iterations,
                met_target: met,
                theta_opt: run.theta_opt,
                seeds: run.seeds,
            },
            clock.elapsed().as_secs_f64(),
        ));
        if met {
            break;
        }
    }
    Ok(rows)
}

/// Increases `p` per `m` until the targets are met or the range runs out.
///
/// Qubit counts run in parallel; rows come back sorted by `(m, p)`.
pub fn sweep(cfg: &ExperimentConfig) -> Result<(SweepRecord, Timing)> {
    let clock = Instant::now();
    cfg.validate()?;
    let mut ms = cfg.sweep.m.clone();
    ms.sort_unstable();
    ms.dedup();
    let per_m: Vec<Vec<(SweepRow, f64)>> = ms.par_iter().map(|&m| sweep_one_m(cfg, m)).collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut cells = Vec::new();
    let mut minimal_layers = Vec::new();
    for group in per_m {
        let best = group
            .iter()
            .map(|(r, _)| r)
            .find(|r| r.met_target)
            .or_else(|| group.iter().map(|(r, _)| r).max_by(|a, b| a.fidelity.total_cmp(&b.fidelity)));
        if let Some(b) = best {
            minimal_layers.push(MinimalLayers {
                m: b.m,
                p: b.met_target.then_some(b.p),
                fidelity: b.fidelity,
                cost: b.cost,
            });
        }
        for (r, t) in group {
            cells.push(CellTiming {
                m: r.m,
                p: r.p,
                wall_clock_seconds: t,
            });
            rows.push(r);
        }
    }
    let mut seeds = vec![cfg.seed];
    seeds.extend(rows.iter().flat_map(|r| r.seeds.iter().copied()));
    let record = SweepRecord {
        provenance: Provenance::new(cfg.hash(), seeds),
        config: stripped(cfg),
        minimal_layers,
        rows,
    };
    let timing = Timing {
        command: "sweep".into(),
        wall_clock_seconds: clock.elapsed().as_secs_f64(),
        cells,
    };
    Ok((record, timing))
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), contents)?;
    Ok(())
}

pub fn solve_csv(record: &SolveRecord) -> String {
    let mut out = record.provenance.csv_comment();
    out.push_str(&record.run.to_csv());
    out
}
