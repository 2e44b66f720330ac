//! Alternating-operator ansatz `U(θ)`.
//!
//! The register starts in `|+>^m`; each of the `p` layers applies the driver
//! exponentials and then the mixer exponentials. A Pauli-string term `P` with
//! layer angle `θ` becomes the gate `exp(-i θ P)`, i.e. a rotation by `2θ`.
//!
//! Driver order inside a layer is fixed: ZZ couplings in ring order, then the
//! YY coupling, then single-qubit Z fields, then the X mixers.

use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::simulator::{Gate, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParamMode {
    /// One driver angle and one mixer angle per layer.
    #[default]
    TwoPerLayer,
    /// An independent angle for every gate of every layer.
    PerTerm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DriverKind {
    #[serde(rename = "ZZ")]
    Zz,
    #[serde(rename = "YY")]
    Yy,
    /// Single-qubit longitudinal field.
    #[serde(rename = "Z")]
    Z,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriverTerm {
    pub kind: DriverKind,
    pub qubits: Vec<usize>,
}

impl DriverTerm {
    pub fn zz(a: usize, b: usize) -> Self {
        Self {
            kind: DriverKind::Zz,
            qubits: vec![a, b],
        }
    }

    pub fn yy(a: usize, b: usize) -> Self {
        Self {
            kind: DriverKind::Yy,
            qubits: vec![a, b],
        }
    }

    pub fn z(q: usize) -> Self {
        Self {
            kind: DriverKind::Z,
            qubits: vec![q],
        }
    }

    fn gate(&self, angle: f64) -> Gate {
        match self.kind {
            DriverKind::Zz => Gate::Rzz(self.qubits[0], self.qubits[1], 2.0 * angle),
            DriverKind::Yy => Gate::Ryy(self.qubits[0], self.qubits[1], 2.0 * angle),
            DriverKind::Z => Gate::Rz(self.qubits[0], 2.0 * angle),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzSpec {
    pub qubits: usize,
    pub layers: usize,
    #[serde(default)]
    pub mode: ParamMode,
    pub driver: Vec<DriverTerm>,
    /// Qubits carrying an X mixer term.
    pub mixer: Vec<usize>,
}

/// ZZ ring over the register plus one YY coupling on `(0, 1)`.
///
/// A single qubit has neither, so it gets a Z field instead.
pub fn default_driver(m: usize) -> Vec<DriverTerm> {
    if m == 1 {
        return vec![DriverTerm::z(0)];
    }
    let mut d: Vec<DriverTerm> = (0..m).map(|i| DriverTerm::zz(i, (i + 1) % m)).collect();
    d.push(DriverTerm::yy(0, 1));
    d
}

/// [`default_driver`] followed by a Z field on every qubit.
pub fn driver_with_field(m: usize) -> Vec<DriverTerm> {
    let mut d = default_driver(m);
    if m > 1 {
        d.extend((0..m).map(DriverTerm::z));
    }
    d
}

impl AnsatzSpec {
    /// Default QAOA layout: [`default_driver`] and an X mixer on every qubit.
    pub fn qaoa(qubits: usize, layers: usize) -> Self {
        Self {
            qubits,
            layers,
            mode: ParamMode::TwoPerLayer,
            driver: default_driver(qubits),
            mixer: (0..qubits).collect(),
        }
    }

    /// QAOA layout with single-qubit Z fields added to the driver.
    pub fn qaoa_with_field(qubits: usize, layers: usize) -> Self {
        Self {
            driver: driver_with_field(qubits),
            ..Self::qaoa(qubits, layers)
        }
    }

    pub fn with_mode(mut self, mode: ParamMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_layers(mut self, layers: usize) -> Self {
        self.layers = layers;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.qubits == 0 {
            return Err(Error::input("ansatz needs at least one qubit"));
        }
        for t in &self.driver {
            let arity = if t.kind == DriverKind::Z { 1 } else { 2 };
            if t.qubits.len() != arity {
                return Err(Error::input(format!("{:?} driver term needs {arity} qubit(s)", t.kind)));
            }
            if t.qubits.iter().any(|&q| q >= self.qubits) {
                return Err(Error::input(format!("driver term {:?} out of range", t.qubits)));
            }
            if arity == 2 && t.qubits[0] == t.qubits[1] {
                return Err(Error::input(format!("driver coupling {:?} repeats a qubit", t.qubits)));
            }
        }
        if let Some(q) = self.mixer.iter().find(|&&q| q >= self.qubits) {
            return Err(Error::input(format!("mixer qubit {q} out of range")));
        }
        Ok(())
    }

    pub fn gates_per_layer(&self) -> usize {
        self.driver.len() + self.mixer.len()
    }

    pub fn parameter_count(&self) -> usize {
        match self.mode {
            ParamMode::TwoPerLayer => 2 * self.layers,
            ParamMode::PerTerm => self.layers * self.gates_per_layer(),
        }
    }

    pub fn gate_count(&self) -> usize {
        self.qubits + self.layers * self.gates_per_layer()
    }
}

/// Hadamards on every qubit, then `p` driver/mixer layers.
pub fn build_circuit(spec: &AnsatzSpec, theta: &[f64]) -> Result<Vec<Gate>> {
    spec.validate()?;
    if theta.len() != spec.parameter_count() {
        return Err(Error::input(format!(
            "ansatz takes {} parameters, got {}",
            spec.parameter_count(),
            theta.len()
        )));
    }
    let mut gates = Vec::with_capacity(spec.gate_count());
    gates.extend((0..spec.qubits).map(Gate::H));
    let per_layer = spec.gates_per_layer();
    for layer in 0..spec.layers {
        let angle = |k: usize, is_mixer: bool| match spec.mode {
            ParamMode::TwoPerLayer => theta[2 * layer + usize::from(is_mixer)],
            ParamMode::PerTerm => theta[layer * per_layer + k],
        };
        for (k, term) in spec.driver.iter().enumerate() {
            gates.push(term.gate(angle(k, false)));
        }
        for (k, &q) in spec.mixer.iter().enumerate() {
            gates.push(Gate::Rx(q, 2.0 * angle(spec.driver.len() + k, true)));
        }
    }
    Ok(gates)
}

/// `U(θ)|0…0>`
pub fn prepare_state(spec: &AnsatzSpec, theta: &[f64]) -> Result<StateVector> {
    let circuit = build_circuit(spec, theta)?;
    let mut s = StateVector::zero(spec.qubits)?;
    s.apply_all(&circuit)?;
    Ok(s)
}

/// Uniform angles in `[0, 2π)`.
pub fn init_parameters(spec: &AnsatzSpec, seed: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    (0..spec.parameter_count()).map(|_| rng.gen_range(0.0..TAU)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn plus_state(m: usize) -> StateVector {
        let amp = FRAC_1_SQRT_2.powi(m as i32);
        StateVector::from_real(&vec![amp; 1 << m]).unwrap()
    }

    #[test]
    fn zero_layers_is_hadamards() {
        let spec = AnsatzSpec::qaoa(3, 0);
        let c = build_circuit(&spec, &[]).unwrap();
        assert_eq!(c, vec![Gate::H(0), Gate::H(1), Gate::H(2)]);
        let s = prepare_state(&spec, &[]).unwrap();
        assert!(s.inner(&plus_state(3)).unwrap().norm() > 1.0 - 1e-12);
    }

    #[test]
    fn zero_angles_leave_plus_state() {
        for mode in [ParamMode::TwoPerLayer, ParamMode::PerTerm] {
            for p in [1, 3] {
                let spec = AnsatzSpec::qaoa_with_field(3, p).with_mode(mode);
                let s = prepare_state(&spec, &vec![0.0; spec.parameter_count()]).unwrap();
                assert!(s.inner(&plus_state(3)).unwrap().norm() > 1.0 - 1e-12);
            }
        }
    }

    #[test]
    fn default_ring_gate_count() {
        let spec = AnsatzSpec::qaoa(3, 1);
        let c = build_circuit(&spec, &[0.1, 0.2]).unwrap();
        assert_eq!(c.len(), 10);
        assert_eq!(c.iter().filter(|g| matches!(g, Gate::H(_))).count(), 3);
        assert_eq!(c.iter().filter(|g| matches!(g, Gate::Rzz(..))).count(), 3);
        assert_eq!(c.iter().filter(|g| matches!(g, Gate::Ryy(..))).count(), 1);
        assert_eq!(c.iter().filter(|g| matches!(g, Gate::Rx(..))).count(), 3);
        // ring order, then YY, then mixers
        assert_eq!(c[3], Gate::Rzz(0, 1, 0.2));
        assert_eq!(c[5], Gate::Rzz(2, 0, 0.2));
        assert_eq!(c[6], Gate::Ryy(0, 1, 0.2));
        assert_eq!(c[7], Gate::Rx(0, 0.4));
    }

    #[test]
    fn per_term_mode_matches_seven_parameters_per_layer_for_three_qubits() {
        let spec = AnsatzSpec::qaoa(3, 8).with_mode(ParamMode::PerTerm);
        assert_eq!(spec.parameter_count(), 56);
        let theta: Vec<f64> = (0..56).map(|k| k as f64).collect();
        let c = build_circuit(&spec, &theta).unwrap();
        assert_eq!(c[3], Gate::Rzz(0, 1, 0.0));
        assert_eq!(c[9], Gate::Rx(2, 12.0));
        assert_eq!(c[10], Gate::Rzz(0, 1, 14.0));
    }

    #[test]
    fn gate_count_formula() {
        for m in 1..=5 {
            for p in 0..=4 {
                for spec in [AnsatzSpec::qaoa(m, p), AnsatzSpec::qaoa_with_field(m, p)] {
                    let c = build_circuit(&spec, &vec![0.3; spec.parameter_count()]).unwrap();
                    assert_eq!(c.len(), spec.gate_count());
                    assert_eq!(c.len(), m + p * (spec.driver.len() + spec.mixer.len()));
                }
            }
        }
    }

    #[test]
    fn parameter_length_is_checked() {
        let spec = AnsatzSpec::qaoa(2, 2);
        assert!(build_circuit(&spec, &[0.0; 3]).is_err());
        let bad = AnsatzSpec {
            driver: vec![DriverTerm::zz(0, 5)],
            ..AnsatzSpec::qaoa(2, 1)
        };
        assert!(build_circuit(&bad, &[0.0; 2]).is_err());
    }

    #[test]
    fn init_parameters_contract() {
        let spec = AnsatzSpec::qaoa(3, 4);
        let a = init_parameters(&spec, 17);
        assert_eq!(a.len(), 8);
        assert_eq!(a, init_parameters(&spec, 17));
        assert_ne!(a, init_parameters(&spec, 18));
        let spec = AnsatzSpec::qaoa_with_field(4, 30).with_mode(ParamMode::PerTerm);
        let a = init_parameters(&spec, 3);
        assert!(a.iter().all(|&t| (0.0..TAU).contains(&t)));
    }

    #[test]
    fn default_drivers() {
        assert_eq!(default_driver(1), vec![DriverTerm::z(0)]);
        assert_eq!(driver_with_field(1), vec![DriverTerm::z(0)]);
        let d = default_driver(4);
        assert_eq!(d.len(), 5);
        assert_eq!(d[3], DriverTerm::zz(3, 0));
        assert_eq!(d[4], DriverTerm::yy(0, 1));
        assert_eq!(driver_with_field(4).len(), 9);
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = AnsatzSpec::qaoa_with_field(3, 2).with_mode(ParamMode::PerTerm);
        let json = serde_json::to_string(&spec).unwrap();
        assert!(json.contains("\"per-term\""));
        let back: AnsatzSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
    }
}
