//! Shot-based estimators.
//!
//! Each estimator copies the state, applies a basis-change circuit, draws
//! `shots` computational-basis outcomes from the exact output distribution
//! and averages a per-outcome value in `{-1, 0, +1}`. Because the values are
//! bounded by one, the standard error of every estimate is at most
//! `1/√shots`.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

use super::gate::Gate;
use super::state::StateVector;

/// Number of samples and the seed that drives them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShotPlan {
    pub shots: u64,
    pub seed: u64,
}

impl ShotPlan {
    pub fn new(shots: u64, seed: u64) -> Self {
        Self { shots, seed }
    }

    fn check(&self) -> Result<()> {
        if self.shots == 0 {
            return Err(Error::input("shot count must be positive"));
        }
        Ok(())
    }
}

/// A sampled mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub shots: u64,
    pub seed: u64,
    pub stderr_estimate: f64,
}

/// Outcome counts per basis index.
pub fn sample_counts(state: &StateVector, plan: &ShotPlan) -> Result<Vec<u64>> {
    plan.check()?;
    let mut cumulative = Vec::with_capacity(state.dim());
    let mut acc = 0.0;
    for p in state.probabilities() {
        acc += p;
        cumulative.push(acc);
    }
    let total = acc;
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::Numerical("state has no probability mass".into()));
    }
    let mut rng = rng_from_seed(plan.seed);
    let mut counts = vec![0u64; state.dim()];
    let last = state.dim() - 1;
    for _ in 0..plan.shots {
        let u: f64 = rng.gen::<f64>() * total;
        let idx = cumulative.partition_point(|&c| c <= u).min(last);
        counts[idx] += 1;
    }
    Ok(counts)
}

fn rotated_counts(state: &StateVector, basis_change: &[Gate], plan: &ShotPlan) -> Result<(StateVector, Vec<u64>)> {
    let mut rotated = state.clone();
    rotated.apply_all(basis_change)?;
    let counts = sample_counts(&rotated, plan)?;
    Ok((rotated, counts))
}

/// Mean and standard error of `value(outcome)` under the observed counts.
fn estimate_from_counts<F: Fn(usize) -> f64>(counts: &[u64], plan: &ShotPlan, value: F) -> Estimate {
    let shots = plan.shots as f64;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for (idx, &c) in counts.iter().enumerate() {
        if c > 0 {
            let v = value(idx);
            sum += c as f64 * v;
            sum_sq += c as f64 * v * v;
        }
    }
    let mean = sum / shots;
    let var = if plan.shots > 1 {
        ((sum_sq - shots * mean * mean) / (shots - 1.0)).max(0.0)
    } else {
        0.0
    };
    Estimate {
        value: mean,
        shots: plan.shots,
        seed: plan.seed,
        stderr_estimate: (var / shots).sqrt(),
    }
}

/// Estimates of the two Bell observables on a qubit pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellEstimate {
    /// `P+ = |φ+><φ+| - |φ-><φ-|`
    pub p_plus: Estimate,
    /// `P- = |ψ+><ψ+| - |ψ-><ψ-|`
    pub p_minus: Estimate,
}

/// Bell measurement of `(qubit_a, qubit_b)`: `CNOT(a→b)`, `H(a)`, readout.
///
/// Outcomes `ab = 00, 10, 01, 11` identify `φ+, φ-, ψ+, ψ-`, so
/// `<P+> ≈ p(φ+) - p(φ-)` and `<P-> ≈ p(ψ+) - p(ψ-)`. With `qubit_a` in
/// `|+>` this gives `Re<φ|σ±|φ>` of the state on `qubit_b`.
pub fn bell_measure_pair(
    state: &StateVector,
    qubit_a: usize,
    qubit_b: usize,
    plan: &ShotPlan,
) -> Result<BellEstimate> {
    plan.check()?;
    state.check_qubit(qubit_a)?;
    state.check_qubit(qubit_b)?;
    if qubit_a == qubit_b {
        return Err(Error::input("Bell measurement needs two distinct qubits"));
    }
    let circuit = [
        Gate::Cnot {
            control: qubit_a,
            target: qubit_b,
        },
        Gate::H(qubit_a),
    ];
    let (rotated, counts) = rotated_counts(state, &circuit, plan)?;
    let outcome = |idx: usize| (rotated.bit(idx, qubit_a), rotated.bit(idx, qubit_b));
    let p_plus = estimate_from_counts(&counts, plan, |idx| match outcome(idx) {
        (false, false) => 1.0,
        (true, false) => -1.0,
        _ => 0.0,
    });
    let p_minus = estimate_from_counts(&counts, plan, |idx| match outcome(idx) {
        (false, true) => 1.0,
        (true, true) => -1.0,
        _ => 0.0,
    });
    Ok(BellEstimate { p_plus, p_minus })
}

/// Which Hermitian combination of `|u><v|` a [`Transition`] measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransitionPart {
    /// `|u><v| + |v><u|`
    Real,
    /// `-i|u><v| + i|v><u|`
    Imag,
}

/// Two-level observable on a subset of qubits, identity elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub support: Vec<usize>,
    pub u: Vec<bool>,
    pub v: Vec<bool>,
    pub part: TransitionPart,
}

impl Transition {
    pub fn real(support: Vec<usize>, u: Vec<bool>, v: Vec<bool>) -> Self {
        Self {
            support,
            u,
            v,
            part: TransitionPart::Real,
        }
    }

    pub fn imag(support: Vec<usize>, u: Vec<bool>, v: Vec<bool>) -> Self {
        Self {
            support,
            u,
            v,
            part: TransitionPart::Imag,
        }
    }

    fn validate(&self, qubits: usize) -> Result<()> {
        if self.u.len() != self.support.len() || self.v.len() != self.support.len() {
            return Err(Error::input("transition bitstrings must match the support length"));
        }
        check_support(&self.support, qubits)?;
        if self.u == self.v {
            return Err(Error::input("transition needs distinct bitstrings u != v"));
        }
        Ok(())
    }

    /// Basis change mapping `span{|u>, |v>}` onto one pivot qubit, plus the
    /// pivot, the pattern the other support qubits must show, and the sign
    /// of the pivot's `Z` readout.
    fn measurement_circuit(&self) -> (Vec<Gate>, usize, Vec<(usize, bool)>, f64) {
        let differing: Vec<usize> = (0..self.support.len()).filter(|&j| self.u[j] != self.v[j]).collect();
        let pj = differing[0];
        let pivot = self.support[pj];
        let mut gates: Vec<Gate> = differing[1..]
            .iter()
            .map(|&j| Gate::Cnot {
                control: pivot,
                target: self.support[j],
            })
            .collect();
        // after the CNOT ladder both strings agree with whichever one had the
        // pivot at 0
        let low = if self.u[pj] { &self.v } else { &self.u };
        let rest: Vec<(usize, bool)> = (0..self.support.len())
            .filter(|&j| j != pj)
            .map(|j| (self.support[j], low[j]))
            .collect();
        let sign = match self.part {
            TransitionPart::Real => 1.0,
            TransitionPart::Imag => {
                // S† maps the pivot's Y onto X
                gates.push(Gate::Rz(pivot, -FRAC_PI_2));
                if self.u[pj] { -1.0 } else { 1.0 }
            }
        };
        gates.push(Gate::H(pivot));
        (gates, pivot, rest, sign)
    }

    /// Exact expectation, straight from the amplitudes.
    pub fn exact_expectation(&self, state: &StateVector) -> Result<f64> {
        self.validate(state.qubits())?;
        let amps = state.amplitudes();
        let mut support_mask = 0usize;
        let mut u_bits = 0usize;
        let mut v_bits = 0usize;
        for (j, &q) in self.support.iter().enumerate() {
            let m = state.mask(q);
            support_mask |= m;
            if self.u[j] {
                u_bits |= m;
            }
            if self.v[j] {
                v_bits |= m;
            }
        }
        // z = Σ conj(ψ_u) ψ_v over the free qubits
        let mut z = num_complex::Complex64::new(0.0, 0.0);
        for free in 0..amps.len() {
            if free & support_mask == 0 {
                z += amps[free | u_bits].conj() * amps[free | v_bits];
            }
        }
        Ok(match self.part {
            TransitionPart::Real => 2.0 * z.re,
            TransitionPart::Imag => 2.0 * z.im,
        })
    }
}

fn check_support(support: &[usize], qubits: usize) -> Result<()> {
    for (i, &q) in support.iter().enumerate() {
        if q >= qubits {
            return Err(Error::input(format!("qubit {q} out of range for {qubits} qubits")));
        }
        if support[..i].contains(&q) {
            return Err(Error::input(format!("qubit {q} repeated in support")));
        }
    }
    Ok(())
}

/// Shot estimate of a [`Transition`] observable.
pub fn estimate_transition(state: &StateVector, transition: &Transition, plan: &ShotPlan) -> Result<Estimate> {
    plan.check()?;
    transition.validate(state.qubits())?;
    let (circuit, pivot, rest, sign) = transition.measurement_circuit();
    let (rotated, counts) = rotated_counts(state, &circuit, plan)?;
    Ok(estimate_from_counts(&counts, plan, |idx| {
        if rest.iter().all(|&(q, b)| rotated.bit(idx, q) == b) {
            if rotated.bit(idx, pivot) { -sign } else { sign }
        } else {
            0.0
        }
    }))
}

/// Shot estimate of `<|u><v| + |v><u|>` for full-register bitstrings.
pub fn estimate_two_level(state: &StateVector, u: &[bool], v: &[bool], plan: &ShotPlan) -> Result<Estimate> {
    if u.len() != state.qubits() || v.len() != state.qubits() {
        return Err(Error::input("bitstrings must cover every qubit"));
    }
    let t = Transition::real((0..state.qubits()).collect(), u.to_vec(), v.to_vec());
    estimate_transition(state, &t, plan)
}

/// Shot estimate of the projector `|bits><bits|` on `support`, identity
/// elsewhere.
pub fn estimate_projector(
    state: &StateVector,
    support: &[usize],
    bits: &[bool],
    plan: &ShotPlan,
) -> Result<Estimate> {
    plan.check()?;
    if support.len() != bits.len() {
        return Err(Error::input("projector bits must match the support length"));
    }
    check_support(support, state.qubits())?;
    let counts = sample_counts(state, plan)?;
    Ok(estimate_from_counts(&counts, plan, |idx| {
        let hit = support.iter().zip(bits).all(|(&q, &b)| state.bit(idx, q) == b);
        if hit { 1.0 } else { 0.0 }
    }))
}

/// Frequency of reading exactly `bits` on the whole register.
pub fn estimate_projector_string(state: &StateVector, bits: &[bool], plan: &ShotPlan) -> Result<Estimate> {
    if bits.len() != state.qubits() {
        return Err(Error::input("bitstring must cover every qubit"));
    }
    let support: Vec<usize> = (0..state.qubits()).collect();
    estimate_projector(state, &support, bits, plan)
}

/// Parses `"0110"` into bits, qubit 0 first.
pub fn parse_bits(s: &str) -> Result<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(Error::input(format!("invalid bit {other:?} in {s:?}"))),
        })
        .collect()
}
