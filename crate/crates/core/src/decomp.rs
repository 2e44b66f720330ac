//! Logarithmic-size tensor-product decompositions of the Poisson matrix,
//! its square and banded Toeplitz matrices.
//!
//! Every `2^m × 2^m` Toeplitz matrix with bandwidth at most two splits into
//! its upper-left block repeated on the diagonal (`I ⊗ W_{m-1}`) plus one
//! corner coupling per off-diagonal block. Unrolling that recursion gives a
//! flat list of `O(m)` terms over `{I, σ+, σ-}`:
//!
//! ```text
//! W_m = I^{m-1} ⊗ (t0 I + t1 σ+ + t-1 σ-)
//!     + Σ_{k=2..m} I^{m-k} ⊗ σ- ⊗ σ+^{k-1} · t-1
//!     + Σ_{k=2..m} I^{m-k} ⊗ σ+ ⊗ σ-^{k-1} · t1
//! ```
//!
//! Terms are emitted in recursion order: the innermost diagonal block first,
//! then for each level `k = 2..m` the lower (σ-) coupling before the upper
//! (σ+) one. Composite trailing factors such as `(I - 4σ+)` are expanded into
//! two terms, which is the counting that gives `4m - 1` terms for the
//! pentadiagonal case. Terms whose coefficient is exactly zero are dropped.

use crate::error::{Error, Result};
use crate::opalg::{OperatorSum, SimpleOp, TensorTerm};

use SimpleOp::{Id, Proj0, Proj1, SigmaMinus, SigmaPlus};

fn check_m(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::input("qubit count m must be at least 1"));
    }
    Ok(())
}

/// `I^{m-k} ⊗ lead ⊗ body^{k-1-tail.len()} ⊗ tail`
fn level_term(m: usize, k: usize, lead: SimpleOp, body: SimpleOp, tail: &[SimpleOp]) -> Vec<SimpleOp> {
    let mut f = vec![Id; m - k];
    f.push(lead);
    f.extend(std::iter::repeat_n(body, k - 1 - tail.len()));
    f.extend_from_slice(tail);
    f
}

fn push(terms: &mut Vec<TensorTerm>, coeff: f64, factors: Vec<SimpleOp>) {
    if coeff != 0.0 {
        terms.push(TensorTerm::new(coeff, factors));
    }
}

fn diagonal_block(m: usize, t_minus1: f64, t0: f64, t_plus1: f64) -> Vec<TensorTerm> {
    let tail = |op| {
        let mut f = vec![Id; m - 1];
        f.push(op);
        f
    };
    let mut terms = Vec::with_capacity(3);
    push(&mut terms, t0, tail(Id));
    push(&mut terms, t_plus1, tail(SigmaPlus));
    push(&mut terms, t_minus1, tail(SigmaMinus));
    terms
}

/// Tridiagonal Toeplitz matrix with `t0` on the diagonal, `t_plus1` above and
/// `t_minus1` below it: `2m + 1` terms for nonzero bands.
pub fn decompose_tridiagonal(t_minus1: f64, t0: f64, t_plus1: f64, m: usize) -> Result<OperatorSum> {
    check_m(m)?;
    let mut terms = diagonal_block(m, t_minus1, t0, t_plus1);
    for k in 2..=m {
        push(&mut terms, t_minus1, level_term(m, k, SigmaMinus, SigmaPlus, &[]));
        push(&mut terms, t_plus1, level_term(m, k, SigmaPlus, SigmaMinus, &[]));
    }
    OperatorSum::new(m, terms)
}

fn pentadiagonal_terms(bands: [f64; 5], m: usize) -> Vec<TensorTerm> {
    let [t_minus2, t_minus1, t0, t_plus1, t_plus2] = bands;
    let mut terms = diagonal_block(m, t_minus1, t0, t_plus1);
    for k in 2..=m {
        // σ- ⊗ σ+^{k-2} ⊗ (t-2 I + t-1 σ+)
        push(&mut terms, t_minus2, level_term(m, k, SigmaMinus, SigmaPlus, &[Id]));
        push(&mut terms, t_minus1, level_term(m, k, SigmaMinus, SigmaPlus, &[SigmaPlus]));
        // σ+ ⊗ σ-^{k-2} ⊗ (t2 I + t1 σ-)
        push(&mut terms, t_plus2, level_term(m, k, SigmaPlus, SigmaMinus, &[Id]));
        push(&mut terms, t_plus1, level_term(m, k, SigmaPlus, SigmaMinus, &[SigmaMinus]));
    }
    terms
}

/// Pentadiagonal Toeplitz matrix with bands `t_{-2} … t_{+2}`: `4m - 1`
/// terms for nonzero bands. Needs `m ≥ 2` so the `±2` bands exist.
pub fn decompose_pentadiagonal(
    t_minus2: f64,
    t_minus1: f64,
    t0: f64,
    t_plus1: f64,
    t_plus2: f64,
    m: usize,
) -> Result<OperatorSum> {
    check_m(m)?;
    if m < 2 {
        return Err(Error::input(
            "pentadiagonal decomposition needs m >= 2 (matrix size at least 4)",
        ));
    }
    OperatorSum::new(m, pentadiagonal_terms([t_minus2, t_minus1, t0, t_plus1, t_plus2], m))
}

/// The 1-D Poisson matrix `tridiag(-1, 2, -1)`: `2m + 1` terms.
pub fn decompose_a(m: usize) -> Result<OperatorSum> {
    decompose_tridiagonal(-1.0, 2.0, -1.0, m)
}

/// `B_m`, the pentadiagonal `(1, -4, 6, -4, 1)` Toeplitz matrix: `4m - 1` terms.
///
/// For `m = 1` only the diagonal block `6I - 4σ+ - 4σ-` exists.
pub fn decompose_b(m: usize) -> Result<OperatorSum> {
    check_m(m)?;
    OperatorSum::new(m, pentadiagonal_terms([1.0, -4.0, 6.0, -4.0, 1.0], m))
}

/// `C_m = |0…0><0…0| + |1…1><1…1|`, the corner correction.
pub fn decompose_c(m: usize) -> Result<OperatorSum> {
    check_m(m)?;
    OperatorSum::new(
        m,
        vec![
            TensorTerm::new(1.0, vec![Proj0; m]),
            TensorTerm::new(1.0, vec![Proj1; m]),
        ],
    )
}

/// `A² = B - C`: `4m + 1` terms.
pub fn decompose_a_squared(m: usize) -> Result<OperatorSum> {
    let mut sum = decompose_b(m)?;
    sum.terms.extend(
        decompose_c(m)?
            .terms
            .into_iter()
            .map(|t| TensorTerm::new(-t.coeff, t.factors)),
    );
    Ok(sum)
}

/// d-dimensional Kronecker sum on `d·m` qubits: `d(2m + 1)` terms.
///
/// Slot 0 occupies the leftmost (most significant) `m` qubits.
pub fn decompose_poisson_dd(d: usize, m: usize) -> Result<OperatorSum> {
    if d == 0 {
        return Err(Error::input("dimension d must be at least 1"));
    }
    let a = decompose_a(m)?;
    let mut terms = Vec::with_capacity(d * a.len());
    for slot in 0..d {
        for t in &a.terms {
            let mut f = vec![Id; slot * m];
            f.extend_from_slice(&t.factors);
            f.extend(std::iter::repeat_n(Id, (d - 1 - slot) * m));
            terms.push(TensorTerm::new(t.coeff, f));
        }
    }
    OperatorSum::new(d * m, terms)
}
