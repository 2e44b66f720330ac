//! Statevector simulation and measurement.

mod gate;
mod measure;
mod state;

pub use gate::{compile_rzz, compile_ryy, compile_to_basic, inverse_circuit, Gate, GateRecord};
pub use measure::{
    bell_measure_pair, estimate_projector, estimate_projector_string, estimate_transition,
    estimate_two_level, parse_bits, sample_counts, BellEstimate, Estimate, ShotPlan, Transition,
    TransitionPart,
};
pub use state::StateVector;

use crate::error::Result;

/// Copy of `state` with `gate` applied.
pub fn apply_gate(state: &StateVector, gate: &Gate) -> Result<StateVector> {
    let mut out = state.clone();
    out.apply(gate)?;
    Ok(out)
}

/// Applies `circuit` left to right to a copy of `initial`.
pub fn run_circuit(circuit: &[Gate], initial: &StateVector) -> Result<StateVector> {
    let mut out = initial.clone();
    out.apply_all(circuit)?;
    Ok(out)
}

/// `|<a|b>|²`
pub fn overlap_sqr(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use num_complex::Complex64;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    fn assert_state(s: &StateVector, want: &[Complex64]) {
        assert_eq!(s.dim(), want.len());
        for (i, (a, b)) in s.amplitudes().iter().zip(want).enumerate() {
            assert!(close(*a, *b), "amp {i}: {a} vs {b}");
        }
    }

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn gate_examples() {
        let s = apply_gate(&StateVector::zero(1).unwrap(), &Gate::H(0)).unwrap();
        assert_state(&s, &[re(FRAC_1_SQRT_2), re(FRAC_1_SQRT_2)]);

        let s = apply_gate(
            &StateVector::basis(2, 0b10).unwrap(),
            &Gate::Cnot { control: 0, target: 1 },
        )
        .unwrap();
        assert_state(&s, &StateVector::basis(2, 0b11).unwrap().into_amplitudes());

        let s = apply_gate(&StateVector::zero(1).unwrap(), &Gate::Rx(0, PI)).unwrap();
        assert_state(&s, &[re(0.0), Complex64::new(0.0, -1.0)]);
    }

    #[test]
    fn gate_errors() {
        let s = StateVector::zero(2).unwrap();
        assert!(apply_gate(&s, &Gate::H(2)).is_err());
        assert!(apply_gate(&s, &Gate::Cnot { control: 1, target: 1 }).is_err());
        assert!(apply_gate(&s, &Gate::Rzz(0, 0, 0.1)).is_err());
        assert!(apply_gate(&s, &Gate::Rx(0, f64::NAN)).is_err());
    }

    fn sample_gates(q: usize) -> Vec<Gate> {
        vec![
            Gate::H(0),
            Gate::X(q - 1),
            Gate::Cnot { control: 0, target: q - 1 },
            Gate::Rx(1, 0.37),
            Gate::Rz(0, -1.1),
            Gate::Rzz(0, 1, 0.9),
            Gate::Ryy(1, q - 1, 2.3),
            Gate::Ryy(q - 1, 0, -0.4),
            Gate::Rzz(q - 1, 1, 5.0),
        ]
    }

    #[test]
    fn gates_are_unitary() {
        for g in sample_gates(3) {
            let u = g.local_matrix();
            let n = u.nrows();
            let err = (&u.adjoint() * &u - DMatrix::<Complex64>::identity(n, n)).norm();
            assert!(err < 1e-12, "{g}: {err}");
            let full = g.to_dense(3).unwrap();
            let err = (&full.adjoint() * &full - DMatrix::<Complex64>::identity(8, 8)).norm();
            assert!(err < 1e-12, "{g}: {err}");
        }
    }

    #[test]
    fn two_qubit_rotations_match_pauli_exponentials() {
        // exp(-iθ/2 P⊗P) = cos(θ/2) I - i sin(θ/2) P⊗P
        let y = DMatrix::from_row_slice(2, 2, &[re(0.0), Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0), re(0.0)]);
        let z = DMatrix::from_row_slice(2, 2, &[re(1.0), re(0.0), re(0.0), re(-1.0)]);
        let t = 0.73;
        for (gate, p) in [(Gate::Ryy(0, 1, t), &y), (Gate::Rzz(0, 1, t), &z)] {
            let pp = p.kronecker(p);
            let want = DMatrix::<Complex64>::identity(4, 4) * re((t / 2.0).cos())
                - pp * Complex64::new(0.0, (t / 2.0).sin());
            let got = gate.to_dense(2).unwrap();
            assert!((got - want).norm() < 1e-12, "{gate}");
        }
    }

    #[test]
    fn compiled_rotations_are_equivalent() {
        for (a, b) in [(0, 1), (1, 0), (0, 2), (2, 1)] {
            for t in [0.0, 0.4, -1.3, 3.0] {
                for g in [Gate::Rzz(a, b, t), Gate::Ryy(a, b, t)] {
                    let direct = g.to_dense(3).unwrap();
                    let mut compiled = DMatrix::<Complex64>::identity(8, 8);
                    for c in compile_to_basic(&[g]) {
                        compiled = c.to_dense(3).unwrap() * compiled;
                    }
                    assert!((direct - compiled).norm() < 1e-12, "{g}");
                }
            }
        }
    }

    #[test]
    fn run_circuit_examples() {
        let zero = StateVector::zero(2).unwrap();
        assert_eq!(run_circuit(&[], &zero).unwrap(), zero);
        let bell = run_circuit(&[Gate::H(0), Gate::Cnot { control: 0, target: 1 }], &zero).unwrap();
        assert_state(&bell, &[re(FRAC_1_SQRT_2), re(0.0), re(0.0), re(FRAC_1_SQRT_2)]);

        let start = run_circuit(&[Gate::H(0), Gate::H(2), Gate::Rx(1, 0.2)], &StateVector::zero(3).unwrap()).unwrap();
        let c = sample_gates(3);
        let there = run_circuit(&c, &start).unwrap();
        assert!((there.norm_sqr() - 1.0).abs() < 1e-10);
        let back = run_circuit(&inverse_circuit(&c), &there).unwrap();
        assert!(overlap_sqr(&back, &start).unwrap() > 1.0 - 1e-10);
    }

    #[test]
    fn gate_json_round_trip() {
        let c = sample_gates(3);
        let json = serde_json::to_string(&c).unwrap();
        let back: Vec<Gate> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);
        let v: serde_json::Value = serde_json::to_value(Gate::Rzz(0, 1, 0.5)).unwrap();
        assert_eq!(v, serde_json::json!({"gate": "RZZ", "qubits": [0, 1], "angle": 0.5}));
        let v: serde_json::Value = serde_json::to_value(Gate::H(2)).unwrap();
        assert_eq!(v, serde_json::json!({"gate": "H", "qubits": [2]}));
        assert!(serde_json::from_str::<Gate>(r#"{"gate":"RX","qubits":[0]}"#).is_err());
        assert!(serde_json::from_str::<Gate>(r#"{"gate":"H","qubits":[0,1]}"#).is_err());
        assert!(serde_json::from_str::<Gate>(r#"{"gate":"T","qubits":[0]}"#).is_err());
        assert!(serde_json::from_str::<Gate>(r#"{"gate":"cnot","qubits":[0,1]}"#).is_ok());
    }

    fn plan(shots: u64, seed: u64) -> ShotPlan {
        ShotPlan::new(shots, seed)
    }

    fn bell_state(which: usize) -> StateVector {
        let s = FRAC_1_SQRT_2;
        let amps = match which {
            0 => [s, 0.0, 0.0, s],  // φ+
            1 => [s, 0.0, 0.0, -s], // φ-
            2 => [0.0, s, s, 0.0],  // ψ+
            _ => [0.0, s, -s, 0.0], // ψ-
        };
        StateVector::from_real(&amps).unwrap()
    }

    #[test]
    fn bell_eigenstates_give_exact_values() {
        // Bell eigenstates map to a single outcome, so even finite shots are exact.
        let expected = [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)];
        for (k, (pp, pm)) in expected.into_iter().enumerate() {
            let e = bell_measure_pair(&bell_state(k), 0, 1, &plan(1000, k as u64)).unwrap();
            assert_eq!(e.p_plus.value, pp, "state {k}");
            assert_eq!(e.p_minus.value, pm, "state {k}");
            assert_eq!(e.p_plus.stderr_estimate, 0.0);
        }
        // pair embedded in a larger register, on non-adjacent qubits
        let rest = StateVector::normalized(vec![re(0.3), Complex64::new(0.1, 0.9)]).unwrap();
        let big = bell_state(0).kron(&rest);
        let e = bell_measure_pair(&big, 0, 1, &plan(500, 3)).unwrap();
        assert_eq!(e.p_plus.value, 1.0);
        assert_eq!(e.p_minus.value, 0.0);
    }

    #[test]
    fn bell_plus_state_gives_sigma_expectations() {
        // |+>|+>: <+|σ+|+> = <+|σ-|+> = 1/2, so P+ and P- each approach 1/2
        let s = FRAC_1_SQRT_2;
        let plus = StateVector::from_real(&[s, s]).unwrap();
        let st = plus.kron(&plus);
        let e = bell_measure_pair(&st, 0, 1, &plan(200_000, 11)).unwrap();
        assert!((e.p_plus.value - 0.5).abs() < 5.0 * e.p_plus.stderr_estimate.max(1e-3));
        assert!((e.p_minus.value - 0.5).abs() < 5.0 * e.p_minus.stderr_estimate.max(1e-3));
        assert!((e.p_plus.value + e.p_minus.value - 1.0).abs() < 0.02);
    }

    #[test]
    fn bell_errors() {
        let st = StateVector::zero(2).unwrap();
        assert!(bell_measure_pair(&st, 0, 0, &plan(10, 0)).is_err());
        assert!(bell_measure_pair(&st, 0, 2, &plan(10, 0)).is_err());
        assert!(bell_measure_pair(&st, 0, 1, &plan(0, 0)).is_err());
    }

    #[test]
    fn sampling_is_reproducible() {
        let st = run_circuit(&sample_gates(3), &StateVector::zero(3).unwrap()).unwrap();
        let a = sample_counts(&st, &plan(5000, 99)).unwrap();
        let b = sample_counts(&st, &plan(5000, 99)).unwrap();
        let c = sample_counts(&st, &plan(5000, 100)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.iter().sum::<u64>(), 5000);
    }

    #[test]
    fn two_level_examples() {
        let q = 4;
        let u = vec![false; q];
        let v = vec![true; q];
        let mut ghz = vec![0.0; 1 << q];
        ghz[0] = FRAC_1_SQRT_2;
        ghz[(1 << q) - 1] = FRAC_1_SQRT_2;
        let ghz = StateVector::from_real(&ghz).unwrap();
        let e = estimate_two_level(&ghz, &u, &v, &plan(1000, 5)).unwrap();
        assert_eq!(e.value, 1.0);

        let basis_u = StateVector::basis(q, 0).unwrap();
        let e = estimate_two_level(&basis_u, &u, &v, &plan(20_000, 6)).unwrap();
        assert!(e.value.abs() < 5.0 / (20_000f64).sqrt());

        assert!(estimate_two_level(&ghz, &u, &u, &plan(10, 0)).is_err());
        assert!(estimate_two_level(&ghz, &u[..3], &v, &plan(10, 0)).is_err());
    }

    #[test]
    fn projector_examples() {
        let zero = StateVector::zero(2).unwrap();
        let e = estimate_projector_string(&zero, &parse_bits("00").unwrap(), &plan(100, 1)).unwrap();
        assert_eq!(e.value, 1.0);
        let plus2 = run_circuit(&[Gate::H(0), Gate::H(1)], &zero).unwrap();
        let e = estimate_projector_string(&plus2, &parse_bits("11").unwrap(), &plan(100_000, 2)).unwrap();
        assert!((e.value - 0.25).abs() < 5.0 * e.stderr_estimate);
        assert!(e.stderr_estimate <= 1.0 / (100_000f64).sqrt());
        assert!(parse_bits("01a").is_err());
    }

    #[test]
    fn transition_exact_matches_definition() {
        // |+>|+>: <|0><1| + h.c.> on qubit 0 is 1, imaginary part 0
        let zero = StateVector::zero(2).unwrap();
        let plus2 = run_circuit(&[Gate::H(0), Gate::H(1)], &zero).unwrap();
        let t = Transition::real(vec![0], vec![false], vec![true]);
        assert!((t.exact_expectation(&plus2).unwrap() - 1.0).abs() < 1e-12);
        let t = Transition::imag(vec![0], vec![false], vec![true]);
        assert!(t.exact_expectation(&plus2).unwrap().abs() < 1e-12);
        // |0> + i|1>: <Y> = 1 = <-i|0><1| + i|1><0|>
        let yplus = StateVector::normalized(vec![re(1.0), Complex64::new(0.0, 1.0)]).unwrap();
        let t = Transition::imag(vec![0], vec![false], vec![true]);
        assert!((t.exact_expectation(&yplus).unwrap() - 1.0).abs() < 1e-12);
        let e = estimate_transition(&yplus, &t, &plan(1000, 0)).unwrap();
        assert_eq!(e.value, 1.0);
        let flipped = Transition::imag(vec![0], vec![true], vec![false]);
        let e = estimate_transition(&yplus, &flipped, &plan(1000, 0)).unwrap();
        assert_eq!(e.value, -1.0);
    }
}
