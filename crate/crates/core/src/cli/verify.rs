//! Self-check suite behind the `verify` command.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::decomp::{
    decompose_a, decompose_a_squared, decompose_b, decompose_c, decompose_pentadiagonal, decompose_poisson_dd,
    decompose_tridiagonal,
};
use crate::error::Result;
use crate::lattice::{build_dense_poisson_matrix, build_kron_sum_matrix, dense_banded_toeplitz, solve_reference};
use crate::rng::rng_from_seed;
use crate::simulator::{bell_measure_pair, ShotPlan, StateVector};
use crate::vqa::{cost_dense, cost_exact, dense_hamiltonian, planned_observables_exact, real_state, Backend, CostModel};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check {
        name: name.to_string(),
        passed,
        detail,
    }
}

fn max_abs(a: &nalgebra::DMatrix<f64>, b: &nalgebra::DMatrix<f64>) -> f64 {
    (a - b).iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

fn random_state(q: usize, rng: &mut impl Rng) -> Result<StateVector> {
    let amps = (0..1usize << q)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    StateVector::normalized(amps)
}

fn decomposition_exactness() -> Result<Check> {
    let mut worst = 0.0f64;
    for m in 1..=6 {
        let a = build_dense_poisson_matrix(m)?;
        let b = dense_banded_toeplitz(m, &[(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)]);
        let n = a.nrows();
        let mut c = nalgebra::DMatrix::zeros(n, n);
        c[(0, 0)] += 1.0;
        c[(n - 1, n - 1)] += 1.0;
        worst = worst
            .max(max_abs(&decompose_a(m)?.to_dense()?, &a))
            .max(max_abs(&decompose_b(m)?.to_dense()?, &b))
            .max(max_abs(&decompose_c(m)?.to_dense()?, &c))
            .max(max_abs(&decompose_a_squared(m)?.to_dense()?, &(&a * &a)));
    }
    for (d, m) in [(2, 1), (2, 2), (2, 3), (3, 2)] {
        worst = worst.max(max_abs(&decompose_poisson_dd(d, m)?.to_dense()?, &build_kron_sum_matrix(d, m)?));
    }
    Ok(check(
        "decomposition exactness",
        worst == 0.0,
        format!("max entry difference {worst:e} for A, B, C, A², A^(d)"),
    ))
}

fn term_counts() -> Result<Check> {
    let mut bad = Vec::new();
    for m in 1..=10 {
        let counts = [
            ("A", decompose_a(m)?.len(), 2 * m + 1),
            ("B", decompose_b(m)?.len(), 4 * m - 1),
            ("C", decompose_c(m)?.len(), 2),
            ("A2", decompose_a_squared(m)?.len(), 4 * m + 1),
            ("A(3)", decompose_poisson_dd(3, m)?.len(), 3 * (2 * m + 1)),
            ("W", decompose_tridiagonal(3.0, 1.0, 7.0, m)?.len(), 2 * m + 1),
        ];
        bad.extend(counts.iter().filter(|c| c.1 != c.2).map(|c| format!("{}@m={m}", c.0)));
        if m >= 2 && decompose_pentadiagonal(2.0, 3.0, 1.0, 5.0, 7.0, m)?.len() != 4 * m - 1 {
            bad.push(format!("V@m={m}"));
        }
    }
    Ok(check("term counts", bad.is_empty(), format!("m = 1..10, mismatches: {bad:?}")))
}

fn banded_generalization() -> Result<Check> {
    let mut worst = 0.0f64;
    for m in 1..=6 {
        worst = worst.max(max_abs(
            &decompose_tridiagonal(-1.0, 2.0, -1.0, m)?.to_dense()?,
            &decompose_a(m)?.to_dense()?,
        ));
        if m >= 2 {
            worst = worst.max(max_abs(
                &decompose_pentadiagonal(1.0, -4.0, 6.0, -4.0, 1.0, m)?.to_dense()?,
                &decompose_b(m)?.to_dense()?,
            ));
            let bands = [(-2, 2.0), (-1, 3.0), (0, 1.0), (1, 5.0), (2, 7.0)];
            worst = worst.max(max_abs(
                &decompose_pentadiagonal(2.0, 3.0, 1.0, 5.0, 7.0, m)?.to_dense()?,
                &dense_banded_toeplitz(m, &bands),
            ));
        }
    }
    Ok(check("banded generalization", worst == 0.0, format!("max entry difference {worst:e}")))
}

fn cost_against_dense() -> Result<Check> {
    let mut rng = rng_from_seed(0xC057);
    let (mut diff, mut min_cost, mut at_solution, mut plan_err) = (0.0f64, f64::INFINITY, 0.0f64, 0.0f64);
    for m in 1..=5 {
        let b: Vec<f64> = (0..1usize << m).map(|_| rng.gen_range(0.1..1.0)).collect();
        let model = CostModel::poisson(m, &b, Backend::Exact)?;
        let h = dense_hamiltonian(&build_dense_poisson_matrix(m)?, &model.b_state)?;
        for _ in 0..50 {
            let psi = random_state(m, &mut rng)?;
            let e = cost_exact(&model, &psi)?;
            diff = diff.max((e - cost_dense(&h, &psi)?).abs());
            min_cost = min_cost.min(e);
            let (a2, re, im) = planned_observables_exact(&model, &psi)?;
            let z = model.b_state.inner(&model.a_sum.apply(&psi)?)?;
            plan_err = plan_err.max((a2 - re * re - im * im - e).abs()).max((re - z.re).abs());
        }
        let x = real_state(&solve_reference(m, &b)?)?;
        at_solution = at_solution.max(cost_exact(&model, &x)?.abs());
    }
    let passed = diff < 1e-10 && min_cost >= -1e-10 && at_solution < 1e-10 && plan_err < 1e-10;
    Ok(check(
        "cost function",
        passed,
        format!(
            "dense diff {diff:.1e}, min cost {min_cost:.1e}, cost at solution {at_solution:.1e}, measurement plan error {plan_err:.1e}"
        ),
    ))
}

fn bell_eigenstates() -> Result<Check> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let cases = [
        ([h, 0.0, 0.0, h], 1.0, 0.0),
        ([h, 0.0, 0.0, -h], -1.0, 0.0),
        ([0.0, h, h, 0.0], 0.0, 1.0),
        ([0.0, h, -h, 0.0], 0.0, -1.0),
    ];
    let mut worst = 0.0f64;
    for (k, (amps, plus, minus)) in cases.iter().enumerate() {
        let s = StateVector::from_real(amps)?;
        let e = bell_measure_pair(&s, 0, 1, &ShotPlan::new(1000, k as u64))?;
        worst = worst.max((e.p_plus.value - plus).abs()).max((e.p_minus.value - minus).abs());
    }
    Ok(check("Bell eigenstates", worst < 1e-12, format!("max deviation {worst:e}")))
}

/// Runs every check; errors inside a check count as failures.
pub fn run_checks() -> Vec<Check> {
    let suite: [(&str, fn() -> Result<Check>); 5] = [
        ("decomposition exactness", decomposition_exactness),
        ("term counts", term_counts),
        ("banded generalization", banded_generalization),
        ("cost function", cost_against_dense),
        ("Bell eigenstates", bell_eigenstates),
    ];
    suite
        .iter()
        .map(|(name, f)| f().unwrap_or_else(|e| check(name, false, format!("error: {e}"))))
        .collect()
}
