//! Finite-difference discretization of the Dirichlet Poisson problem on the
//! unit hypercube and classical reference solutions.
//!
//! The 1-D grid has `n = 2^m` interior points `x_i = i / (n + 1)`. The
//! coefficient matrix is kept unscaled (the `1/h²` factor is dropped): scaling
//! `A` and `b` together leaves the normalized solution direction unchanged.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap, in qubits, on dense `2^q × 2^q` materialization.
pub const DEFAULT_DENSE_CAP: usize = 12;

fn check_cap(what: &'static str, qubits: usize, cap: usize) -> Result<()> {
    if qubits > cap {
        return Err(Error::Capacity { what, qubits, cap });
    }
    Ok(())
}

/// Dense 1-D Poisson matrix `tridiag(-1, 2, -1)` of size `2^m`.
pub fn build_dense_poisson_matrix(m: usize) -> Result<DMatrix<f64>> {
    build_dense_poisson_matrix_capped(m, DEFAULT_DENSE_CAP)
}

pub fn build_dense_poisson_matrix_capped(m: usize, cap: usize) -> Result<DMatrix<f64>> {
    if m == 0 {
        return Err(Error::input("qubit count m must be at least 1"));
    }
    check_cap("dense Poisson matrix", m, cap)?;
    Ok(dense_banded_toeplitz(m, &[(-1, -1.0), (0, 2.0), (1, -1.0)]))
}

/// Dense Toeplitz matrix of size `2^m` with the given `(offset, value)` bands.
///
/// Offset `k > 0` is the k-th superdiagonal, `k < 0` the subdiagonal.
/// No cap check; callers bound `m`.
pub fn dense_banded_toeplitz(m: usize, bands: &[(isize, f64)]) -> DMatrix<f64> {
    let n = 1usize << m;
    DMatrix::from_fn(n, n, |r, c| {
        let offset = c as isize - r as isize;
        bands
            .iter()
            .filter(|(k, _)| *k == offset)
            .map(|(_, v)| *v)
            .sum()
    })
}

/// Dense d-dimensional Kronecker sum `Σ_k I ⊗ … ⊗ A ⊗ … ⊗ I`.
pub fn build_kron_sum_matrix(d: usize, m: usize) -> Result<DMatrix<f64>> {
    build_kron_sum_matrix_capped(d, m, DEFAULT_DENSE_CAP)
}

pub fn build_kron_sum_matrix_capped(d: usize, m: usize, cap: usize) -> Result<DMatrix<f64>> {
    if d == 0 {
        return Err(Error::input("dimension d must be at least 1"));
    }
    if m == 0 {
        return Err(Error::input("qubit count m must be at least 1"));
    }
    check_cap("dense Kronecker-sum matrix", d * m, cap)?;
    let a = build_dense_poisson_matrix_capped(m, cap)?;
    let n = a.nrows();
    let eye = DMatrix::<f64>::identity(n, n);
    let total = n.pow(d as u32);
    let mut out = DMatrix::<f64>::zeros(total, total);
    for slot in 0..d {
        let mut term = DMatrix::<f64>::identity(1, 1);
        for k in 0..d {
            term = term.kronecker(if k == slot { &a } else { &eye });
        }
        out += term;
    }
    Ok(out)
}

/// Built-in right-hand-side functions on `(0, 1)`.
///
/// In `d > 1` dimensions the source is the separable product
/// `f(x_1) · … · f(x_d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BuiltinRhs {
    #[serde(rename = "x")]
    X,
    #[serde(rename = "one")]
    One,
    #[serde(rename = "sin_pi_x")]
    SinPiX,
}

impl BuiltinRhs {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            BuiltinRhs::X => x,
            BuiltinRhs::One => 1.0,
            BuiltinRhs::SinPiX => (std::f64::consts::PI * x).sin(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BuiltinRhs::X => "x",
            BuiltinRhs::One => "one",
            BuiltinRhs::SinPiX => "sin_pi_x",
        }
    }
}

impl fmt::Display for BuiltinRhs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BuiltinRhs {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" => Ok(BuiltinRhs::X),
            "one" => Ok(BuiltinRhs::One),
            "sin_pi_x" => Ok(BuiltinRhs::SinPiX),
            other => Err(Error::input(format!(
                "unknown right-hand side {other:?} (expected x, one or sin_pi_x)"
            ))),
        }
    }
}

/// Where the right-hand side comes from: a named function or tabulated values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RhsSource {
    Named(BuiltinRhs),
    Values(Vec<f64>),
}

/// Sampled right-hand side and its unit-norm copy.
#[derive(Debug, Clone, PartialEq)]
pub struct Rhs {
    pub values: Vec<f64>,
    pub normalized: Vec<f64>,
}

/// Interior grid points `i / (n + 1)`, `i = 1..=n`, `n = 2^m`.
pub fn grid_points(m: usize) -> Vec<f64> {
    let n = 1usize << m;
    (1..=n).map(|i| i as f64 / (n + 1) as f64).collect()
}

/// Samples `f` on the interior grid.
pub fn build_rhs<F: Fn(f64) -> f64>(f: F, m: usize) -> Result<Rhs> {
    if m == 0 {
        return Err(Error::input("qubit count m must be at least 1"));
    }
    let values: Vec<f64> = grid_points(m).into_iter().map(f).collect();
    rhs_from_values(values)
}

fn rhs_from_values(values: Vec<f64>) -> Result<Rhs> {
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::input(format!("right-hand side entry {i} is not finite")));
    }
    let normalized = normalize(&values)?;
    Ok(Rhs { values, normalized })
}

/// Right-hand side of length `n^d` for a d-dimensional problem.
pub fn build_rhs_dd(source: &RhsSource, d: usize, m: usize) -> Result<Rhs> {
    if d == 0 || m == 0 {
        return Err(Error::input("d and m must be at least 1"));
    }
    let len = 1usize
        .checked_shl((d * m) as u32)
        .ok_or_else(|| Error::input("problem size overflows"))?;
    match source {
        RhsSource::Values(v) => {
            if v.len() != len {
                return Err(Error::input(format!(
                    "tabulated right-hand side has {} entries, expected {len}",
                    v.len()
                )));
            }
            rhs_from_values(v.clone())
        }
        RhsSource::Named(f) => {
            let grid: Vec<f64> = grid_points(m).into_iter().map(|x| f.eval(x)).collect();
            let n = grid.len();
            let values = (0..len)
                .map(|idx| {
                    // slot 0 is the most significant digit
                    (0..d)
                        .map(|slot| grid[(idx / n.pow((d - 1 - slot) as u32)) % n])
                        .product()
                })
                .collect();
            rhs_from_values(values)
        }
    }
}

pub(crate) fn normalize(v: &[f64]) -> Result<Vec<f64>> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::input("vector has zero or non-finite norm"));
    }
    Ok(v.iter().map(|x| x / norm).collect())
}

/// Solves a tridiagonal system with the Thomas algorithm.
///
/// `sub[i]` couples row `i + 1` to column `i`, `sup[i]` couples row `i` to
/// column `i + 1`.
pub fn thomas_solve(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if rhs.len() != n || sub.len() + 1 != n.max(1) || sup.len() + 1 != n.max(1) {
        return Err(Error::input("inconsistent tridiagonal system sizes"));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut pivot = diag[0];
    if pivot == 0.0 {
        return Err(Error::Numerical("zero pivot in tridiagonal elimination".into()));
    }
    if n > 1 {
        c[0] = sup[0] / pivot;
    }
    d[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - sub[i - 1] * c[i - 1];
        if pivot == 0.0 {
            return Err(Error::Numerical("zero pivot in tridiagonal elimination".into()));
        }
        if i + 1 < n {
            c[i] = sup[i] / pivot;
        }
        d[i] = (rhs[i] - sub[i - 1] * d[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

/// Unnormalized solution of the 1-D system `A x = b`.
pub fn solve_poisson_1d(m: usize, b: &[f64]) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(Error::input("qubit count m must be at least 1"));
    }
    let n = 1usize << m;
    if b.len() != n {
        return Err(Error::input(format!("b has length {}, expected {n}", b.len())));
    }
    thomas_solve(&vec![-1.0; n - 1], &vec![2.0; n], &vec![-1.0; n - 1], b)
}

/// Unit vector along `A⁻¹ b` for the 1-D system.
pub fn solve_reference(m: usize, b: &[f64]) -> Result<Vec<f64>> {
    if b.iter().all(|&x| x == 0.0) {
        return Err(Error::input("zero right-hand side has no solution direction"));
    }
    normalize(&solve_poisson_1d(m, b)?)
}

/// Unit vector along `(A^(d))⁻¹ b`; dense LU for `d > 1`, Thomas for `d = 1`.
pub fn solve_reference_dd(d: usize, m: usize, b: &[f64], cap: usize) -> Result<Vec<f64>> {
    if d == 1 {
        return solve_reference(m, b);
    }
    if b.iter().all(|&x| x == 0.0) {
        return Err(Error::input("zero right-hand side has no solution direction"));
    }
    let a = build_kron_sum_matrix_capped(d, m, cap)?;
    if b.len() != a.nrows() {
        return Err(Error::input(format!(
            "b has length {}, expected {}",
            b.len(),
            a.nrows()
        )));
    }
    let x = a
        .lu()
        .solve(&DVector::from_column_slice(b))
        .ok_or_else(|| Error::Numerical("singular Kronecker-sum matrix".into()))?;
    normalize(x.as_slice())
}

/// A discretized Poisson problem together with its classical solution.
#[derive(Debug, Clone)]
pub struct PoissonSystem {
    pub d: usize,
    pub m: usize,
    /// Present only when `d·m` is within the dense cap.
    pub a_dense: Option<DMatrix<f64>>,
    pub b: Vec<f64>,
    pub b_normalized: Vec<f64>,
    pub x_reference: Vec<f64>,
}

/// JSON form of a [`PoissonSystem`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemRecord {
    pub d: usize,
    pub m: usize,
    pub b: Vec<f64>,
    pub x_reference: Vec<f64>,
}

impl PoissonSystem {
    pub fn new(d: usize, m: usize, source: &RhsSource) -> Result<Self> {
        Self::with_cap(d, m, source, DEFAULT_DENSE_CAP)
    }

    pub fn with_cap(d: usize, m: usize, source: &RhsSource, cap: usize) -> Result<Self> {
        let rhs = build_rhs_dd(source, d, m)?;
        let a_dense = if d * m <= cap {
            Some(build_kron_sum_matrix_capped(d, m, cap)?)
        } else {
            None
        };
        let x_reference = solve_reference_dd(d, m, &rhs.values, cap)?;
        Ok(Self {
            d,
            m,
            a_dense,
            b: rhs.values,
            b_normalized: rhs.normalized,
            x_reference,
        })
    }

    pub fn qubits(&self) -> usize {
        self.d * self.m
    }

    pub fn record(&self) -> SystemRecord {
        SystemRecord {
            d: self.d,
            m: self.m,
            b: self.b.clone(),
            x_reference: self.x_reference.clone(),
        }
    }
}
