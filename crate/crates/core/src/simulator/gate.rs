use std::f64::consts::FRAC_PI_2;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::state::StateVector;

/// Gate set of the simulator.
///
/// Rotations follow `R_P(θ) = exp(-i θ P / 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GateRecord", into = "GateRecord")]
pub enum Gate {
    H(usize),
    X(usize),
    Cnot { control: usize, target: usize },
    Rx(usize, f64),
    Rz(usize, f64),
    Rzz(usize, usize, f64),
    Ryy(usize, usize, f64),
}

/// Wire form: `{"gate": "RZZ", "qubits": [0, 1], "angle": 0.5}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateRecord {
    pub gate: String,
    pub qubits: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle: Option<f64>,
}

impl From<Gate> for GateRecord {
    fn from(g: Gate) -> Self {
        GateRecord {
            gate: g.name().to_string(),
            qubits: g.qubits(),
            angle: g.angle(),
        }
    }
}

impl TryFrom<GateRecord> for Gate {
    type Error = Error;

    fn try_from(r: GateRecord) -> Result<Gate> {
        let name = r.gate.to_ascii_uppercase();
        let q = &r.qubits;
        let arity = match name.as_str() {
            "H" | "X" | "RX" | "RZ" => 1,
            "CNOT" | "RZZ" | "RYY" => 2,
            _ => return Err(Error::input(format!("unknown gate {:?}", r.gate))),
        };
        if q.len() != arity {
            return Err(Error::input(format!(
                "gate {name} takes {arity} qubit(s), got {}",
                q.len()
            )));
        }
        let needs_angle = name.starts_with('R');
        let angle = match (needs_angle, r.angle) {
            (true, Some(a)) if a.is_finite() => a,
            (true, _) => return Err(Error::input(format!("gate {name} needs a finite angle"))),
            (false, Some(_)) => return Err(Error::input(format!("gate {name} takes no angle"))),
            (false, None) => 0.0,
        };
        Ok(match name.as_str() {
            "H" => Gate::H(q[0]),
            "X" => Gate::X(q[0]),
            "RX" => Gate::Rx(q[0], angle),
            "RZ" => Gate::Rz(q[0], angle),
            "CNOT" => Gate::Cnot {
                control: q[0],
                target: q[1],
            },
            "RZZ" => Gate::Rzz(q[0], q[1], angle),
            _ => Gate::Ryy(q[0], q[1], angle),
        })
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

impl Gate {
    pub fn name(&self) -> &'static str {
        match self {
            Gate::H(_) => "H",
            Gate::X(_) => "X",
            Gate::Cnot { .. } => "CNOT",
            Gate::Rx(..) => "RX",
            Gate::Rz(..) => "RZ",
            Gate::Rzz(..) => "RZZ",
            Gate::Ryy(..) => "RYY",
        }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H(q) | Gate::X(q) | Gate::Rx(q, _) | Gate::Rz(q, _) => vec![q],
            Gate::Cnot { control, target } => vec![control, target],
            Gate::Rzz(a, b, _) | Gate::Ryy(a, b, _) => vec![a, b],
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            Gate::Rx(_, t) | Gate::Rz(_, t) | Gate::Rzz(_, _, t) | Gate::Ryy(_, _, t) => Some(t),
            _ => None,
        }
    }

    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::Rx(q, t) => Gate::Rx(q, -t),
            Gate::Rz(q, t) => Gate::Rz(q, -t),
            Gate::Rzz(a, b, t) => Gate::Rzz(a, b, -t),
            Gate::Ryy(a, b, t) => Gate::Ryy(a, b, -t),
            g => g,
        }
    }

    pub fn validate(&self, qubits: usize) -> Result<()> {
        let qs = self.qubits();
        if let Some(&q) = qs.iter().find(|&&q| q >= qubits) {
            return Err(Error::input(format!(
                "{self}: qubit {q} out of range for {qubits} qubits"
            )));
        }
        if qs.len() == 2 && qs[0] == qs[1] {
            return Err(Error::input(format!("{self}: qubits must be distinct")));
        }
        if let Some(t) = self.angle() {
            if !t.is_finite() {
                return Err(Error::input(format!("{self}: non-finite angle")));
            }
        }
        Ok(())
    }

    fn matrix_1q(&self) -> Option<[[Complex64; 2]; 2]> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Some(match *self {
            Gate::H(_) => [[c(s, 0.0), c(s, 0.0)], [c(s, 0.0), c(-s, 0.0)]],
            Gate::X(_) => [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]],
            Gate::Rx(_, t) => {
                let (sn, cs) = (t / 2.0).sin_cos();
                [[c(cs, 0.0), c(0.0, -sn)], [c(0.0, -sn), c(cs, 0.0)]]
            }
            Gate::Rz(_, t) => {
                let (sn, cs) = (t / 2.0).sin_cos();
                [[c(cs, -sn), c(0.0, 0.0)], [c(0.0, 0.0), c(cs, sn)]]
            }
            _ => return None,
        })
    }

    /// 4×4 matrix in the local basis `|q0 q1>` of [`Gate::qubits`].
    fn matrix_2q(&self) -> Option<[[Complex64; 4]; 4]> {
        let z = c(0.0, 0.0);
        let one = c(1.0, 0.0);
        Some(match *self {
            Gate::Cnot { .. } => [
                [one, z, z, z],
                [z, one, z, z],
                [z, z, z, one],
                [z, z, one, z],
            ],
            Gate::Rzz(_, _, t) => {
                let (sn, cs) = (t / 2.0).sin_cos();
                let m = c(cs, -sn);
                let p = c(cs, sn);
                [[m, z, z, z], [z, p, z, z], [z, z, p, z], [z, z, z, m]]
            }
            Gate::Ryy(_, _, t) => {
                // cos(t/2) I - i sin(t/2) Y⊗Y
                let (sn, cs) = (t / 2.0).sin_cos();
                let d = c(cs, 0.0);
                let pi = c(0.0, sn);
                let mi = c(0.0, -sn);
                [[d, z, z, pi], [z, d, mi, z], [z, mi, d, z], [pi, z, z, d]]
            }
            _ => return None,
        })
    }

    pub(crate) fn apply_unchecked(&self, state: &mut StateVector) {
        match *self {
            Gate::Cnot { control, target } => {
                let (mc, mt) = (state.mask(control), state.mask(target));
                let amps = state.amplitudes_mut();
                for i in 0..amps.len() {
                    if i & mc != 0 && i & mt == 0 {
                        amps.swap(i, i | mt);
                    }
                }
            }
            Gate::Rzz(a, b, t) => {
                let (ma, mb) = (state.mask(a), state.mask(b));
                let (sn, cs) = (t / 2.0).sin_cos();
                let same = c(cs, -sn);
                let diff = c(cs, sn);
                for (i, amp) in state.amplitudes_mut().iter_mut().enumerate() {
                    let parity = ((i & ma) != 0) != ((i & mb) != 0);
                    *amp *= if parity { diff } else { same };
                }
            }
            Gate::Ryy(a, b, _) => {
                let m = self.matrix_2q().expect("two-qubit gate");
                state.apply_2q(a, b, &m);
            }
            g => {
                let q = g.qubits()[0];
                state.apply_1q(q, g.matrix_1q().expect("single-qubit gate"));
            }
        }
    }

    /// Full `2^q × 2^q` unitary, built column by column from basis states.
    pub fn to_dense(&self, qubits: usize) -> Result<DMatrix<Complex64>> {
        self.validate(qubits)?;
        if qubits > crate::lattice::DEFAULT_DENSE_CAP {
            return Err(Error::Capacity {
                what: "dense gate unitary",
                qubits,
                cap: crate::lattice::DEFAULT_DENSE_CAP,
            });
        }
        let n = 1usize << qubits;
        let mut out = DMatrix::<Complex64>::zeros(n, n);
        for col in 0..n {
            let mut s = StateVector::basis(qubits, col)?;
            self.apply_unchecked(&mut s);
            for (row, a) in s.amplitudes().iter().enumerate() {
                out[(row, col)] = *a;
            }
        }
        Ok(out)
    }

    /// Small local matrix, for unitarity checks.
    pub fn local_matrix(&self) -> DMatrix<Complex64> {
        if let Some(m) = self.matrix_1q() {
            DMatrix::from_fn(2, 2, |r, c| m[r][c])
        } else {
            let m = self.matrix_2q().expect("two-qubit gate");
            DMatrix::from_fn(4, 4, |r, c| m[r][c])
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:?}", self.name(), self.qubits())?;
        if let Some(t) = self.angle() {
            write!(f, "({t})")?;
        }
        Ok(())
    }
}

/// `RZZ(θ)` as `CNOT · RZ(θ) · CNOT`.
pub fn compile_rzz(a: usize, b: usize, angle: f64) -> Vec<Gate> {
    vec![
        Gate::Cnot { control: a, target: b },
        Gate::Rz(b, angle),
        Gate::Cnot { control: a, target: b },
    ]
}

/// `RYY(θ)`: rotate both qubits so `Z` becomes `Y`, then the `RZZ` ladder.
pub fn compile_ryy(a: usize, b: usize, angle: f64) -> Vec<Gate> {
    let mut gates = vec![Gate::Rx(a, FRAC_PI_2), Gate::Rx(b, FRAC_PI_2)];
    gates.extend(compile_rzz(a, b, angle));
    gates.extend([Gate::Rx(a, -FRAC_PI_2), Gate::Rx(b, -FRAC_PI_2)]);
    gates
}

/// Replaces every `RZZ`/`RYY` with its CNOT-based compilation.
pub fn compile_to_basic(circuit: &[Gate]) -> Vec<Gate> {
    circuit
        .iter()
        .flat_map(|g| match *g {
            Gate::Rzz(a, b, t) => compile_rzz(a, b, t),
            Gate::Ryy(a, b, t) => compile_ryy(a, b, t),
            other => vec![other],
        })
        .collect()
}

/// Inverse circuit: reversed order, negated angles.
pub fn inverse_circuit(circuit: &[Gate]) -> Vec<Gate> {
    circuit.iter().rev().map(Gate::inverse).collect()
}
