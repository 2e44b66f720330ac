//! Tensor products of single-qubit operators and sums of them.
//!
//! Qubit `i` is the `i`-th tensor factor from the left and the
//! `(q - 1 - i)`-th bit of a basis index, so the leftmost factor acts on the
//! most significant bit.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::DEFAULT_DENSE_CAP;
use crate::simulator::StateVector;

/// Single-qubit operator alphabet.
///
/// Every member maps a basis state to at most one basis state, which is what
/// makes [`apply_term`] linear in the state size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SimpleOp {
    #[serde(rename = "I")]
    Id,
    /// `|0><1|`
    #[serde(rename = "S+")]
    SigmaPlus,
    /// `|1><0|`
    #[serde(rename = "S-")]
    SigmaMinus,
    /// `|0><0| = σ+σ-`
    #[serde(rename = "P0")]
    Proj0,
    /// `|1><1| = σ-σ+`
    #[serde(rename = "P1")]
    Proj1,
    #[serde(rename = "X")]
    PauliX,
    #[serde(rename = "Y")]
    PauliY,
}

impl SimpleOp {
    pub fn adjoint(self) -> SimpleOp {
        match self {
            SimpleOp::SigmaPlus => SimpleOp::SigmaMinus,
            SimpleOp::SigmaMinus => SimpleOp::SigmaPlus,
            other => other,
        }
    }

    pub fn is_real(self) -> bool {
        self != SimpleOp::PauliY
    }

    /// Dense 2×2 form, row-major.
    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            SimpleOp::Id => [[l, o], [o, l]],
            SimpleOp::SigmaPlus => [[o, l], [o, o]],
            SimpleOp::SigmaMinus => [[o, o], [l, o]],
            SimpleOp::Proj0 => [[l, o], [o, o]],
            SimpleOp::Proj1 => [[o, o], [o, l]],
            SimpleOp::PauliX => [[o, l], [l, o]],
            SimpleOp::PauliY => [[o, -i], [i, o]],
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            SimpleOp::Id => "I",
            SimpleOp::SigmaPlus => "S+",
            SimpleOp::SigmaMinus => "S-",
            SimpleOp::Proj0 => "P0",
            SimpleOp::Proj1 => "P1",
            SimpleOp::PauliX => "X",
            SimpleOp::PauliY => "Y",
        }
    }
}

impl fmt::Display for SimpleOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// `coeff · factors[0] ⊗ factors[1] ⊗ …`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorTerm {
    pub coeff: f64,
    pub factors: Vec<SimpleOp>,
}

/// Bit-mask form of a term's action on basis states.
///
/// Basis index `j` survives iff `j & care_mask == care_value`; it is then
/// sent to `j ^ flip_mask` with phase `i^(#Y on 0-bits - #Y on 1-bits)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TermAction {
    pub care_mask: usize,
    pub care_value: usize,
    pub flip_mask: usize,
    pub y_mask: usize,
}

impl TermAction {
    #[inline]
    pub fn maps(&self, j: usize) -> Option<(usize, Complex64)> {
        if j & self.care_mask != self.care_value {
            return None;
        }
        let phase = if self.y_mask == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            let ones = (self.y_mask & j).count_ones();
            let zeros = self.y_mask.count_ones() - ones;
            // Y|0> = i|1>, Y|1> = -i|0>
            match (zeros + 3 * ones) % 4 {
                0 => Complex64::new(1.0, 0.0),
                1 => Complex64::new(0.0, 1.0),
                2 => Complex64::new(-1.0, 0.0),
                _ => Complex64::new(0.0, -1.0),
            }
        };
        Some((j ^ self.flip_mask, phase))
    }
}

impl TensorTerm {
    pub fn new(coeff: f64, factors: Vec<SimpleOp>) -> Self {
        Self { coeff, factors }
    }

    pub fn qubits(&self) -> usize {
        self.factors.len()
    }

    pub fn adjoint(&self) -> TensorTerm {
        TensorTerm {
            coeff: self.coeff,
            factors: self.factors.iter().map(|f| f.adjoint()).collect(),
        }
    }

    pub fn is_self_adjoint(&self) -> bool {
        self.factors.iter().all(|f| f.adjoint() == *f)
    }

    /// True when every factor is diagonal (`I`, `P0`, `P1`).
    pub fn is_diagonal(&self) -> bool {
        self.factors
            .iter()
            .all(|f| matches!(f, SimpleOp::Id | SimpleOp::Proj0 | SimpleOp::Proj1))
    }

    pub fn action(&self) -> TermAction {
        let q = self.factors.len();
        let mut act = TermAction {
            care_mask: 0,
            care_value: 0,
            flip_mask: 0,
            y_mask: 0,
        };
        for (i, f) in self.factors.iter().enumerate() {
            let bit = 1usize << (q - 1 - i);
            match f {
                SimpleOp::Id => {}
                SimpleOp::SigmaPlus => {
                    act.care_mask |= bit;
                    act.care_value |= bit;
                    act.flip_mask |= bit;
                }
                SimpleOp::SigmaMinus => {
                    act.care_mask |= bit;
                    act.flip_mask |= bit;
                }
                SimpleOp::Proj0 => act.care_mask |= bit,
                SimpleOp::Proj1 => {
                    act.care_mask |= bit;
                    act.care_value |= bit;
                }
                SimpleOp::PauliX => act.flip_mask |= bit,
                SimpleOp::PauliY => {
                    act.flip_mask |= bit;
                    act.y_mask |= bit;
                }
            }
        }
        act
    }

    /// Complex dense form; `cap` bounds the qubit count.
    pub fn to_dense_complex_capped(&self, cap: usize) -> Result<DMatrix<Complex64>> {
        let q = self.qubits();
        if q > cap {
            return Err(Error::Capacity {
                what: "dense tensor term",
                qubits: q,
                cap,
            });
        }
        let n = 1usize << q;
        let act = self.action();
        let mut out = DMatrix::<Complex64>::zeros(n, n);
        for col in 0..n {
            if let Some((row, phase)) = act.maps(col) {
                out[(row, col)] = phase * self.coeff;
            }
        }
        Ok(out)
    }

    /// Real dense form. Fails on terms containing `Y`.
    pub fn to_dense_capped(&self, cap: usize) -> Result<DMatrix<f64>> {
        if !self.factors.iter().all(|f| f.is_real()) {
            return Err(Error::input("term with a Y factor has no real dense form"));
        }
        Ok(self.to_dense_complex_capped(cap)?.map(|z| z.re))
    }
}

impl fmt::Display for TensorTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}·", self.coeff)?;
        for (i, op) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str("⊗")?;
            }
            write!(f, "{op}")?;
        }
        Ok(())
    }
}

/// Coefficient × Kronecker product of the factor matrices.
pub fn term_to_dense(term: &TensorTerm) -> Result<DMatrix<f64>> {
    term.to_dense_capped(DEFAULT_DENSE_CAP)
}

pub fn adjoint(term: &TensorTerm) -> TensorTerm {
    term.adjoint()
}

/// `term · state`, computed in one pass over the amplitudes.
pub fn apply_term(term: &TensorTerm, state: &StateVector) -> Result<StateVector> {
    if term.qubits() != state.qubits() {
        return Err(Error::input(format!(
            "term acts on {} qubits, state has {}",
            term.qubits(),
            state.qubits()
        )));
    }
    let act = term.action();
    let amps = state.amplitudes();
    let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
    for (j, a) in amps.iter().enumerate() {
        if let Some((k, phase)) = act.maps(j) {
            out[k] = phase * *a * term.coeff;
        }
    }
    StateVector::from_amplitudes_unnormalized(out)
}

/// `<state| term |state>` without materializing the output vector.
fn term_expectation(term: &TensorTerm, act: &TermAction, amps: &[Complex64]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, a) in amps.iter().enumerate() {
        if let Some((k, phase)) = act.maps(j) {
            acc += amps[k].conj() * phase * *a;
        }
    }
    acc * term.coeff
}

/// Weighted sum of tensor terms on a fixed register.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSum {
    pub qubits: usize,
    pub terms: Vec<TensorTerm>,
}

impl OperatorSum {
    pub fn new(qubits: usize, terms: Vec<TensorTerm>) -> Result<Self> {
        let sum = Self { qubits, terms };
        sum.validate()?;
        Ok(sum)
    }

    pub fn empty(qubits: usize) -> Self {
        Self {
            qubits,
            terms: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.qubits == 0 {
            return Err(Error::input("operator sum needs at least one qubit"));
        }
        if let Some(t) = self.terms.iter().find(|t| t.qubits() != self.qubits) {
            return Err(Error::input(format!(
                "term {t} has {} factors, expected {}",
                t.qubits(),
                self.qubits
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Every term's adjoint is also present with the same coefficient.
    pub fn hermitian_closed(&self) -> bool {
        self.terms.iter().all(|t| {
            let adj = t.adjoint();
            self.terms.contains(&adj)
        })
    }

    pub fn to_dense_capped(&self, cap: usize) -> Result<DMatrix<f64>> {
        if self.qubits > cap {
            return Err(Error::Capacity {
                what: "dense operator sum",
                qubits: self.qubits,
                cap,
            });
        }
        let n = 1usize << self.qubits;
        let mut out = DMatrix::<f64>::zeros(n, n);
        for t in &self.terms {
            if !t.factors.iter().all(|f| f.is_real()) {
                return Err(Error::input("operator sum with Y factors has no real dense form"));
            }
            let act = t.action();
            for col in 0..n {
                if let Some((row, phase)) = act.maps(col) {
                    out[(row, col)] += phase.re * t.coeff;
                }
            }
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        self.to_dense_capped(DEFAULT_DENSE_CAP)
    }

    pub fn to_dense_complex(&self) -> Result<DMatrix<Complex64>> {
        let cap = DEFAULT_DENSE_CAP;
        if self.qubits > cap {
            return Err(Error::Capacity {
                what: "dense operator sum",
                qubits: self.qubits,
                cap,
            });
        }
        let n = 1usize << self.qubits;
        let mut out = DMatrix::<Complex64>::zeros(n, n);
        for t in &self.terms {
            out += t.to_dense_complex_capped(cap)?;
        }
        Ok(out)
    }

    /// `sum · state`.
    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        self.check_state(state)?;
        let amps = state.amplitudes();
        let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
        for t in &self.terms {
            let act = t.action();
            for (j, a) in amps.iter().enumerate() {
                if let Some((k, phase)) = act.maps(j) {
                    out[k] += phase * *a * t.coeff;
                }
            }
        }
        StateVector::from_amplitudes_unnormalized(out)
    }

    /// `Σ_k <state| term_k |state>`, reduced in term order.
    pub fn expectation(&self, state: &StateVector) -> Result<Complex64> {
        self.check_state(state)?;
        let amps = state.amplitudes();
        Ok(self
            .terms
            .iter()
            .map(|t| term_expectation(t, &t.action(), amps))
            .fold(Complex64::new(0.0, 0.0), |acc, z| acc + z))
    }

    fn check_state(&self, state: &StateVector) -> Result<()> {
        if state.qubits() != self.qubits {
            return Err(Error::input(format!(
                "operator acts on {} qubits, state has {}",
                self.qubits,
                state.qubits()
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let sum: OperatorSum = serde_json::from_str(s)?;
        sum.validate()?;
        Ok(sum)
    }
}

/// Exact expectation value `Σ_k <ψ| term_k |ψ>`.
pub fn expectation_exact(sum: &OperatorSum, state: &StateVector) -> Result<Complex64> {
    sum.expectation(state)
}
