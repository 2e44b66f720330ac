use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;

use poisson_vqa::ansatz::{build_circuit, prepare_state, AnsatzSpec, ParamMode};
use poisson_vqa::decomp::{decompose_pentadiagonal, decompose_tridiagonal};
use poisson_vqa::lattice::dense_banded_toeplitz;
use poisson_vqa::opalg::{apply_term, expectation_exact, OperatorSum, SimpleOp, TensorTerm};
use poisson_vqa::simulator::{inverse_circuit, StateVector, Transition};
use poisson_vqa::vqa::{cost_exact, Backend, CostModel};

fn op() -> impl Strategy<Value = SimpleOp> {
    prop_oneof![
        Just(SimpleOp::Id),
        Just(SimpleOp::SigmaPlus),
        Just(SimpleOp::SigmaMinus),
        Just(SimpleOp::Proj0),
        Just(SimpleOp::Proj1),
        Just(SimpleOp::PauliX),
        Just(SimpleOp::PauliY),
    ]
}

fn term(q: usize) -> impl Strategy<Value = TensorTerm> {
    (-3.0..3.0f64, prop::collection::vec(op(), q)).prop_map(|(c, f)| TensorTerm::new(c, f))
}

fn state(q: usize) -> impl Strategy<Value = StateVector> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1usize << q)
        .prop_filter("non-zero", |v| v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3))
        .prop_map(|v| StateVector::normalized(v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()).unwrap())
}

fn dense_apply(m: &DMatrix<Complex64>, s: &StateVector) -> DVector<Complex64> {
    m * DVector::from_column_slice(s.amplitudes())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn apply_term_matches_dense_product((t, s) in (1usize..=5).prop_flat_map(|q| (term(q), state(q)))) {
        let got = apply_term(&t, &s).unwrap();
        let want = dense_apply(&t.to_dense_complex_capped(8).unwrap(), &s);
        for (a, b) in got.amplitudes().iter().zip(want.iter()) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn expectation_matches_dense(
        (terms, s) in (1usize..=4).prop_flat_map(|q| (prop::collection::vec(term(q), 1..6), state(q)))
    ) {
        let q = s.qubits();
        let sum = OperatorSum::new(q, terms).unwrap();
        let got = expectation_exact(&sum, &s).unwrap();
        let v = DVector::from_column_slice(s.amplitudes());
        let want = (v.adjoint() * sum.to_dense_complex().unwrap() * &v)[(0, 0)];
        prop_assert!((got - want).norm() < 1e-10);
    }

    #[test]
    fn adjoint_is_conjugate_transpose(t in (1usize..=4).prop_flat_map(term)) {
        let a = t.adjoint().to_dense_complex_capped(8).unwrap();
        let b = t.to_dense_complex_capped(8).unwrap().adjoint();
        prop_assert!((a - b).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn tridiagonal_decomposition_is_exact(
        m in 1usize..=6, lo in -5i32..=5, mid in -5i32..=5, hi in -5i32..=5
    ) {
        let (lo, mid, hi) = (lo as f64, mid as f64, hi as f64);
        let sum = decompose_tridiagonal(lo, mid, hi, m).unwrap();
        prop_assert_eq!(sum.to_dense().unwrap(), dense_banded_toeplitz(m, &[(-1, lo), (0, mid), (1, hi)]));
        let nonzero = [lo, hi].iter().filter(|x| **x != 0.0).count();
        prop_assert!(sum.len() <= 2 * m + 1);
        prop_assert_eq!(sum.len(), usize::from(mid != 0.0) + nonzero * m);
    }

    #[test]
    fn pentadiagonal_decomposition_is_exact(m in 2usize..=6, bands in prop::array::uniform5(-5i32..=5)) {
        let t = bands.map(|x| x as f64);
        let sum = decompose_pentadiagonal(t[0], t[1], t[2], t[3], t[4], m).unwrap();
        let want = dense_banded_toeplitz(m, &[(-2, t[0]), (-1, t[1]), (0, t[2]), (1, t[3]), (2, t[4])]);
        prop_assert_eq!(sum.to_dense().unwrap(), want);
        prop_assert!(sum.len() <= 4 * m - 1);
    }

    #[test]
    fn ansatz_states_have_unit_norm(
        (m, p, theta) in (1usize..=4, 0usize..=3).prop_flat_map(|(m, p)| {
            let n = AnsatzSpec::qaoa_with_field(m, p).with_mode(ParamMode::PerTerm).parameter_count();
            (Just(m), Just(p), prop::collection::vec(-10.0..10.0f64, n))
        })
    ) {
        let spec = AnsatzSpec::qaoa_with_field(m, p).with_mode(ParamMode::PerTerm);
        let s = prepare_state(&spec, &theta).unwrap();
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        // U† U = I
        let mut back = s.clone();
        back.apply_all(&inverse_circuit(&build_circuit(&spec, &theta).unwrap())).unwrap();
        prop_assert!((back.amplitudes()[0] - Complex64::new(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn transition_expectation_matches_dense_observable(
        (s, u, v) in (2usize..=4).prop_flat_map(|q| (state(q), 0usize..(1 << q), 0usize..(1 << q)))
            .prop_filter("distinct", |(_, u, v)| u != v)
    ) {
        let q = s.qubits();
        let bits = |x: usize| (0..q).map(|i| (x >> (q - 1 - i)) & 1 == 1).collect::<Vec<_>>();
        let n = 1usize << q;
        let i = Complex64::new(0.0, 1.0);
        let mut re_obs = DMatrix::<Complex64>::zeros(n, n);
        re_obs[(u, v)] = Complex64::new(1.0, 0.0);
        re_obs[(v, u)] = Complex64::new(1.0, 0.0);
        let mut im_obs = DMatrix::<Complex64>::zeros(n, n);
        im_obs[(u, v)] = -i;
        im_obs[(v, u)] = i;
        let psi = DVector::from_column_slice(s.amplitudes());
        let expect = |o: &DMatrix<Complex64>| (psi.adjoint() * o * &psi)[(0, 0)].re;
        let real = Transition::real((0..q).collect(), bits(u), bits(v)).exact_expectation(&s).unwrap();
        let imag = Transition::imag((0..q).collect(), bits(u), bits(v)).exact_expectation(&s).unwrap();
        prop_assert!((real - expect(&re_obs)).abs() < 1e-12);
        prop_assert!((imag - expect(&im_obs)).abs() < 1e-12);
    }

    #[test]
    fn cost_is_nonnegative(
        (psi, b) in (1usize..=4).prop_flat_map(|m| (state(m), prop::collection::vec(0.01..1.0f64, 1 << m)))
    ) {
        let model = CostModel::poisson(psi.qubits(), &b, Backend::Exact).unwrap();
        prop_assert!(cost_exact(&model, &psi).unwrap() >= -1e-10);
    }
}
