//! Variational cost and optimization loop.
//!
//! The cost `E(θ) = <ψ(θ)|A²|ψ(θ)> - |<b|A|ψ(θ)>|²` is the expectation of
//! `H = A (I - |b><b|) A`, which is positive semidefinite and vanishes only
//! on the normalized solution of `A x = b`.

mod cost;
mod optimize;
mod sampled;

use std::fmt::Write as _;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use cost::{cost_dense, cost_exact, dense_hamiltonian, real_state, Backend, CostModel};
pub use optimize::{minimize, Method, MinimizeError, Minimization, OptimizerOptions, Step, StopReason};
pub use sampled::{cost_sampled, cost_sampled_state, planned_observables_exact, SampledCost};

use crate::ansatz::{init_parameters, prepare_state, AnsatzSpec};
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::simulator::{ShotPlan, StateVector};

/// `(|0>|b> + |1>|ψ>)/√2` with the ancilla as the most significant qubit.
pub fn prepare_b_psi(b_state: &StateVector, psi: &StateVector) -> Result<StateVector> {
    if b_state.qubits() != psi.qubits() {
        return Err(Error::input(format!(
            "|b> has {} qubits, |ψ> has {}",
            b_state.qubits(),
            psi.qubits()
        )));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let amps = b_state
        .amplitudes()
        .iter()
        .chain(psi.amplitudes())
        .map(|a| a * s)
        .collect();
    StateVector::from_amplitudes_unnormalized(amps)
}

/// `|<x|ψ>|`
pub fn fidelity(psi: &StateVector, x_reference: &StateVector) -> Result<f64> {
    Ok(x_reference.inner(psi)?.norm().min(1.0))
}

/// Cost of the ansatz state at `theta` on the model's backend.
///
/// `eval_seed` picks the shot seed for sampled backends and is ignored by
/// the exact one.
pub fn evaluate(model: &CostModel, spec: &AnsatzSpec, theta: &[f64], eval_seed: u64) -> Result<f64> {
    let psi = prepare_state(spec, theta)?;
    match model.backend {
        Backend::Exact => cost_exact(model, &psi),
        Backend::Shots { shots, .. } => Ok(cost_sampled_state(model, &psi, &ShotPlan::new(shots, eval_seed))?.value),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    pub cost: f64,
    /// Lowest cost seen so far.
    pub best_cost: f64,
    pub grad_norm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<f64>,
    pub theta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub seed: u64,
    pub iterations: usize,
    pub final_cost: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<f64>,
    pub stop: StopReason,
}

/// Outcome of [`optimize`]: the best restart's full trace plus a summary of
/// every restart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqaRun {
    pub qubits: usize,
    pub ansatz: AnsatzSpec,
    pub backend: Backend,
    pub optimizer: OptimizerOptions,
    pub seeds: Vec<u64>,
    pub best_restart: usize,
    pub restarts: Vec<RestartSummary>,
    pub trace: Vec<TraceEntry>,
    pub iterations: usize,
    pub stop: StopReason,
    pub theta_opt: Vec<f64>,
    /// Backend cost at `theta_opt`.
    pub cost_opt: f64,
    /// Noise-free cost at `theta_opt`.
    pub exact_cost_opt: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<f64>,
    pub state: Vec<Complex64>,
    /// Kept out of the serialized record so outputs stay reproducible.
    #[serde(skip)]
    pub wall_clock_seconds: f64,
}

impl VqaRun {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// `iteration,cost,best_cost,grad_norm,fidelity` rows of the best restart.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,cost,best_cost,grad_norm,fidelity\n");
        for t in &self.trace {
            let fid = t.fidelity.map(|f| f.to_string()).unwrap_or_default();
            let _ = writeln!(out, "{},{},{},{},{}", t.iteration, t.cost, t.best_cost, t.grad_norm, fid);
        }
        out
    }
}

/// One optimization start: its seed and initial parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Start {
    pub seed: u64,
    pub theta: Vec<f64>,
}

/// `opts.restarts` random starts with seeds derived from `seed`.
pub fn random_starts(spec: &AnsatzSpec, opts: &OptimizerOptions, seed: u64) -> Vec<Start> {
    (0..opts.restarts as u64)
        .map(|r| {
            let s = derive_seed(seed, r);
            Start {
                seed: s,
                theta: init_parameters(spec, s),
            }
        })
        .collect()
}

/// Best of `opts.restarts` random restarts.
pub fn optimize(
    model: &CostModel,
    spec: &AnsatzSpec,
    opts: &OptimizerOptions,
    seed: u64,
    x_reference: Option<&StateVector>,
) -> Result<VqaRun> {
    optimize_from(model, spec, opts, &random_starts(spec, opts, seed), x_reference)
}

/// Runs the optimizer from each start in parallel and keeps the lowest final
/// cost (earliest start on ties).
pub fn optimize_from(
    model: &CostModel,
    spec: &AnsatzSpec,
    opts: &OptimizerOptions,
    starts: &[Start],
    x_reference: Option<&StateVector>,
) -> Result<VqaRun> {
    let clock = Instant::now();
    opts.validate()?;
    spec.validate()?;
    if spec.qubits != model.qubits() {
        return Err(Error::input(format!(
            "ansatz has {} qubits, cost model {}",
            spec.qubits,
            model.qubits()
        )));
    }
    if let Some(x) = x_reference {
        if x.qubits() != model.qubits() {
            return Err(Error::input("reference state size does not match the cost model"));
        }
    }
    if starts.is_empty() {
        return Err(Error::input("no optimization starts"));
    }
    if let Some(s) = starts.iter().find(|s| s.theta.len() != spec.parameter_count()) {
        return Err(Error::input(format!(
            "start with seed {} has {} parameters, ansatz takes {}",
            s.seed,
            s.theta.len(),
            spec.parameter_count()
        )));
    }

    let results: Vec<Minimization> = starts
        .par_iter()
        .map(|start| {
            let objective = |theta: &[f64], eval: u64| evaluate(model, spec, theta, derive_seed(start.seed, eval));
            minimize(&objective, start.theta.clone(), opts).map_err(Error::from)
        })
        .collect::<Result<_>>()?;

    let fid_of = |theta: &[f64]| -> Result<Option<f64>> {
        x_reference
            .map(|x| fidelity(&prepare_state(spec, theta)?, x))
            .transpose()
    };
    let mut restarts = Vec::with_capacity(results.len());
    for (start, r) in starts.iter().zip(&results) {
        let last = r.last();
        restarts.push(RestartSummary {
            seed: start.seed,
            iterations: last.iteration,
            final_cost: last.cost,
            fidelity: fid_of(&last.theta)?,
            stop: r.stop,
        });
    }
    let best = (0..results.len())
        .min_by(|&a, &b| restarts[a].final_cost.total_cmp(&restarts[b].final_cost))
        .expect("non-empty");
    let run = &results[best];

    let mut trace = Vec::with_capacity(run.steps.len());
    let mut best_cost = f64::INFINITY;
    for s in &run.steps {
        best_cost = best_cost.min(s.cost);
        trace.push(TraceEntry {
            iteration: s.iteration,
            cost: s.cost,
            best_cost,
            grad_norm: s.grad_norm,
            fidelity: fid_of(&s.theta)?,
            theta: s.theta.clone(),
        });
    }
    let last = run.last();
    let psi = prepare_state(spec, &last.theta)?;
    Ok(VqaRun {
        qubits: model.qubits(),
        ansatz: spec.clone(),
        backend: model.backend,
        optimizer: opts.clone(),
        seeds: starts.iter().map(|s| s.seed).collect(),
        best_restart: best,
        iterations: last.iteration,
        stop: run.stop,
        theta_opt: last.theta.clone(),
        cost_opt: last.cost,
        exact_cost_opt: cost_exact(model, &psi)?,
        fidelity: restarts[best].fidelity,
        state: psi.into_amplitudes(),
        restarts,
        trace,
        wall_clock_seconds: clock.elapsed().as_secs_f64(),
    })
}
