//! Shot-based cost estimation.
//!
//! `<ψ|A²|ψ>` is split into measurement jobs: every `σ±` string is paired with
//! its adjoint and read out as one two-level observable, and every diagonal
//! term (`I`, `P0`, `P1` factors) is a computational-basis projector. The
//! overlap `z = <b|A|ψ>` comes from `X⊗A` (real part) and `Y⊗A` (imaginary
//! part) on `(|0>|b> + |1>|ψ>)/√2`, decomposed the same way with the ancilla
//! as an extra support qubit.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::opalg::{OperatorSum, SimpleOp, TensorTerm};
use crate::rng::derive_seed;
use crate::simulator::{estimate_projector, estimate_transition, Gate, ShotPlan, StateVector, Transition};

use super::{prepare_b_psi, CostModel};

/// A term written as `|u><v|` on `support`, identity elsewhere.
struct TwoLevel {
    support: Vec<usize>,
    u: Vec<bool>,
    v: Vec<bool>,
}

fn two_level(term: &TensorTerm) -> Result<TwoLevel> {
    let mut t = TwoLevel {
        support: Vec::new(),
        u: Vec::new(),
        v: Vec::new(),
    };
    for (i, f) in term.factors.iter().enumerate() {
        let (u, v) = match f {
            SimpleOp::Id => continue,
            SimpleOp::SigmaPlus => (false, true),
            SimpleOp::SigmaMinus => (true, false),
            SimpleOp::Proj0 => (false, false),
            SimpleOp::Proj1 => (true, true),
            SimpleOp::PauliX | SimpleOp::PauliY => {
                return Err(Error::input(format!(
                    "sampled estimator supports I, S+, S-, P0, P1 factors only; got {term}"
                )))
            }
        };
        t.support.push(i);
        t.u.push(u);
        t.v.push(v);
    }
    Ok(t)
}

/// Splits a Hermitian-closed sum into diagonal terms and adjoint pairs, in
/// term order. Pairs are represented by their first member.
fn pair_terms(sum: &OperatorSum) -> Result<Vec<(f64, TwoLevel, bool)>> {
    let mut used = vec![false; sum.terms.len()];
    let mut out = Vec::new();
    for (i, t) in sum.terms.iter().enumerate() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let tl = two_level(t)?;
        if tl.u == tl.v {
            out.push((t.coeff, tl, false));
            continue;
        }
        let adj = t.adjoint();
        let j = (i + 1..sum.terms.len())
            .find(|&j| !used[j] && sum.terms[j] == adj)
            .ok_or_else(|| Error::input(format!("term {t} has no adjoint partner")))?;
        used[j] = true;
        out.push((t.coeff, tl, true));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
enum Observable {
    Constant,
    Projector { support: Vec<usize>, bits: Vec<bool> },
    Transition(Transition),
}

/// One weighted observable to be sampled.
#[derive(Debug, Clone, PartialEq)]
struct Job {
    coeff: f64,
    observable: Observable,
}

impl Job {
    fn estimate(&self, state: &StateVector, plan: &ShotPlan) -> Result<(f64, f64)> {
        let (v, se) = match &self.observable {
            Observable::Constant => (1.0, 0.0),
            Observable::Projector { support, bits } => {
                let e = estimate_projector(state, support, bits, plan)?;
                (e.value, e.stderr_estimate)
            }
            Observable::Transition(t) => {
                let e = estimate_transition(state, t, plan)?;
                (e.value, e.stderr_estimate)
            }
        };
        Ok((self.coeff * v, self.coeff.abs() * se))
    }

    fn exact(&self, state: &StateVector) -> Result<f64> {
        let v = match &self.observable {
            Observable::Constant => 1.0,
            Observable::Projector { support, bits } => state
                .probabilities()
                .iter()
                .enumerate()
                .filter(|(idx, _)| support.iter().zip(bits).all(|(&q, &b)| state.bit(*idx, q) == b))
                .map(|(_, p)| p)
                .sum(),
            Observable::Transition(t) => t.exact_expectation(state)?,
        };
        Ok(self.coeff * v)
    }
}

/// Jobs whose weighted sum is `<A²>`.
fn square_jobs(a2: &OperatorSum) -> Result<Vec<Job>> {
    pair_terms(a2).map(|terms| {
        terms
            .into_iter()
            .map(|(coeff, t, paired)| {
                let observable = if paired {
                    Observable::Transition(Transition::real(t.support, t.u, t.v))
                } else if t.support.is_empty() {
                    Observable::Constant
                } else {
                    Observable::Projector {
                        support: t.support,
                        bits: t.u,
                    }
                };
                Job { coeff, observable }
            })
            .collect()
    })
}

fn with_ancilla(anc: bool, bits: &[bool]) -> Vec<bool> {
    std::iter::once(anc).chain(bits.iter().copied()).collect()
}

/// Jobs for `<X⊗A>` and `<Y⊗A>` with the ancilla as qubit 0.
fn overlap_jobs(a: &OperatorSum) -> Result<(Vec<Job>, Vec<Job>)> {
    let mut re = Vec::new();
    let mut im = Vec::new();
    for (coeff, t, paired) in pair_terms(a)? {
        let support: Vec<usize> = std::iter::once(0).chain(t.support.iter().map(|q| q + 1)).collect();
        let job = |tr: Transition| Job {
            coeff,
            observable: Observable::Transition(tr),
        };
        let (u, v) = (&t.u, &t.v);
        if paired {
            re.push(job(Transition::real(support.clone(), with_ancilla(false, u), with_ancilla(true, v))));
            re.push(job(Transition::real(support.clone(), with_ancilla(true, u), with_ancilla(false, v))));
            im.push(job(Transition::imag(support.clone(), with_ancilla(false, u), with_ancilla(true, v))));
            im.push(job(Transition::imag(support, with_ancilla(false, v), with_ancilla(true, u))));
        } else {
            re.push(job(Transition::real(support.clone(), with_ancilla(false, u), with_ancilla(true, u))));
            im.push(job(Transition::imag(support, with_ancilla(false, u), with_ancilla(true, u))));
        }
    }
    Ok((re, im))
}

/// Sampled cost with its error budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampledCost {
    pub value: f64,
    pub stderr: f64,
    pub a2: f64,
    pub a2_stderr: f64,
    pub overlap_re: f64,
    pub overlap_re_stderr: f64,
    pub overlap_im: f64,
    pub overlap_im_stderr: f64,
    /// Number of separately sampled observables.
    pub jobs: usize,
    pub shots_per_job: u64,
    pub seed: u64,
}

/// The measurement jobs of a model, grouped as `(<A²>, Re z, Im z)`.
struct Plan {
    square: Vec<Job>,
    re: Vec<Job>,
    im: Vec<Job>,
}

impl Plan {
    fn new(model: &CostModel) -> Result<Self> {
        let square = square_jobs(&model.a2_sum)?;
        let (re, im) = overlap_jobs(&model.a_sum)?;
        Ok(Self { square, re, im })
    }
}

fn sum_group(results: &[(f64, f64)]) -> (f64, f64) {
    let value = results.iter().map(|r| r.0).sum();
    let var: f64 = results.iter().map(|r| r.1 * r.1).sum();
    (value, var.sqrt())
}

/// Shot estimate of the cost at `psi`.
///
/// Each job draws `plan.shots` samples with its own seed derived from
/// `plan.seed` and the job index; jobs run in parallel and are reduced in
/// index order.
pub fn cost_sampled_state(model: &CostModel, psi: &StateVector, plan: &ShotPlan) -> Result<SampledCost> {
    if plan.shots == 0 {
        return Err(Error::input("shot count must be positive"));
    }
    if psi.qubits() != model.qubits() {
        return Err(Error::input("state size does not match the cost model"));
    }
    let jobs = Plan::new(model)?;
    let extended = prepare_b_psi(&model.b_state, psi)?;
    let tagged: Vec<(&Job, &StateVector)> = jobs
        .square
        .iter()
        .map(|j| (j, psi))
        .chain(jobs.re.iter().chain(&jobs.im).map(|j| (j, &extended)))
        .collect();
    let results = tagged
        .par_iter()
        .enumerate()
        .map(|(k, (job, state))| job.estimate(state, &ShotPlan::new(plan.shots, derive_seed(plan.seed, k as u64))))
        .collect::<Result<Vec<_>>>()?;
    let (ns, nr) = (jobs.square.len(), jobs.re.len());
    let (a2, a2_se) = sum_group(&results[..ns]);
    let (re, re_se) = sum_group(&results[ns..ns + nr]);
    let (im, im_se) = sum_group(&results[ns + nr..]);
    let mut overlap_sq = re * re + im * im;
    if model.debias_overlap {
        overlap_sq -= re_se * re_se + im_se * im_se;
    }
    let stderr = (a2_se * a2_se + (2.0 * re.abs() * re_se).powi(2) + (2.0 * im.abs() * im_se).powi(2)).sqrt();
    Ok(SampledCost {
        value: a2 - overlap_sq,
        stderr,
        a2,
        a2_stderr: a2_se,
        overlap_re: re,
        overlap_re_stderr: re_se,
        overlap_im: im,
        overlap_im_stderr: im_se,
        jobs: tagged.len(),
        shots_per_job: plan.shots,
        seed: plan.seed,
    })
}

/// Shot estimate of the cost for the state prepared by `circuit` from `|0…0>`.
pub fn cost_sampled(model: &CostModel, circuit: &[Gate], plan: &ShotPlan) -> Result<SampledCost> {
    let mut psi = StateVector::zero(model.qubits())?;
    psi.apply_all(circuit)?;
    cost_sampled_state(model, &psi, plan)
}

/// Noise-free values of the sampled observables: `(<A²>, Re z, Im z)`.
pub fn planned_observables_exact(model: &CostModel, psi: &StateVector) -> Result<(f64, f64, f64)> {
    let jobs = Plan::new(model)?;
    let extended = prepare_b_psi(&model.b_state, psi)?;
    let total = |js: &[Job], s: &StateVector| js.iter().map(|j| j.exact(s)).sum::<Result<f64>>();
    Ok((total(&jobs.square, psi)?, total(&jobs.re, &extended)?, total(&jobs.im, &extended)?))
}
