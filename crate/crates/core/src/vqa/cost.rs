use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::decomp::{decompose_a, decompose_a_squared};
use crate::error::{Error, Result};
use crate::lattice::PoissonSystem;
use crate::opalg::OperatorSum;
use crate::simulator::{ShotPlan, StateVector};

/// Largest register for which [`CostModel::new`] checks `A² = A·A` densely.
const SQUARE_CHECK_QUBITS: usize = 8;

/// How the cost is evaluated.
///
/// JSON: `{"kind": "exact"}` or `{"kind": "shots", "shots": N, "seed": S}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "BackendRecord", into = "BackendRecord")]
pub enum Backend {
    #[default]
    Exact,
    Shots { shots: u64, seed: u64 },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BackendRecord {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    shots: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

impl From<Backend> for BackendRecord {
    fn from(b: Backend) -> Self {
        match b {
            Backend::Exact => BackendRecord {
                kind: "exact".into(),
                shots: None,
                seed: None,
            },
            Backend::Shots { shots, seed } => BackendRecord {
                kind: "shots".into(),
                shots: Some(shots),
                seed: Some(seed),
            },
        }
    }
}

impl TryFrom<BackendRecord> for Backend {
    type Error = Error;

    fn try_from(r: BackendRecord) -> Result<Self> {
        match (r.kind.as_str(), r.shots, r.seed) {
            ("exact", None, None) => Ok(Backend::Exact),
            ("exact", ..) => Err(Error::input("exact backend takes no shots or seed")),
            ("shots", Some(shots), seed) => Ok(Backend::Shots {
                shots,
                seed: seed.unwrap_or(0),
            }),
            ("shots", None, _) => Err(Error::input("shots backend needs a shot count")),
            (other, ..) => Err(Error::input(format!("unknown backend {other:?} (expected exact or shots)"))),
        }
    }
}

impl Backend {
    pub fn plan(&self) -> Option<ShotPlan> {
        match *self {
            Backend::Exact => None,
            Backend::Shots { shots, seed } => Some(ShotPlan::new(shots, seed)),
        }
    }
}

/// `E(ψ) = <ψ|A²|ψ> - |<b|A|ψ>|²` from the decomposed `A` and `A²`.
#[derive(Debug, Clone)]
pub struct CostModel {
    pub a_sum: OperatorSum,
    pub a2_sum: OperatorSum,
    pub b_state: StateVector,
    pub backend: Backend,
    /// Subtract the sampling variance from the squared overlap estimate.
    pub debias_overlap: bool,
}

impl CostModel {
    pub fn new(a_sum: OperatorSum, a2_sum: OperatorSum, b_state: StateVector, backend: Backend) -> Result<Self> {
        a_sum.validate()?;
        a2_sum.validate()?;
        let q = b_state.qubits();
        if a_sum.qubits != q || a2_sum.qubits != q {
            return Err(Error::input(format!(
                "operators act on {}/{} qubits but |b> has {q}",
                a_sum.qubits, a2_sum.qubits
            )));
        }
        if !a_sum.hermitian_closed() || !a2_sum.hermitian_closed() {
            return Err(Error::input("cost operators must be closed under adjoint"));
        }
        if q <= SQUARE_CHECK_QUBITS {
            let a = a_sum.to_dense_complex()?;
            let a2 = a2_sum.to_dense_complex()?;
            let resid = (&a * &a - a2).iter().map(|z| z.norm()).fold(0.0, f64::max);
            if resid > 1e-9 {
                return Err(Error::input(format!("A² operator differs from A·A by {resid:e}")));
            }
        }
        if let Some(plan) = backend.plan() {
            if plan.shots == 0 {
                return Err(Error::input("shot count must be positive"));
            }
        }
        Ok(Self {
            a_sum,
            a2_sum,
            b_state,
            backend,
            debias_overlap: false,
        })
    }

    /// The 1-D Poisson model on `m` qubits for the (unnormalized) `b`.
    pub fn poisson(m: usize, b: &[f64], backend: Backend) -> Result<Self> {
        let b_state = real_state(b)?;
        if b_state.qubits() != m {
            return Err(Error::input(format!("b has {} entries, expected {}", b.len(), 1usize << m)));
        }
        Self::new(decompose_a(m)?, decompose_a_squared(m)?, b_state, backend)
    }

    /// Only `d = 1` systems have an `A²` decomposition.
    pub fn from_system(system: &PoissonSystem, backend: Backend) -> Result<Self> {
        if system.d != 1 {
            return Err(Error::input(format!(
                "the variational cost needs an A² decomposition, available for d = 1 only (got d = {})",
                system.d
            )));
        }
        Self::poisson(system.m, &system.b, backend)
    }

    pub fn qubits(&self) -> usize {
        self.b_state.qubits()
    }
}

/// Unit-norm real state from unnormalized values.
pub fn real_state(values: &[f64]) -> Result<StateVector> {
    StateVector::normalized(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
}

/// Exact cost from the operator sums.
pub fn cost_exact(model: &CostModel, psi: &StateVector) -> Result<f64> {
    let e2 = model.a2_sum.expectation(psi)?;
    if e2.im.abs() > 1e-10 * e2.re.abs().max(1.0) {
        return Err(Error::Numerical(format!(
            "<ψ|A²|ψ> has imaginary residue {:e}",
            e2.im
        )));
    }
    let a_psi = model.a_sum.apply(psi)?;
    let z = model.b_state.inner(&a_psi)?;
    Ok(e2.re - z.norm_sqr())
}

/// `H = A (I - |b><b|) A` for a dense real `A`.
pub fn dense_hamiltonian(a: &DMatrix<f64>, b: &StateVector) -> Result<DMatrix<Complex64>> {
    let n = a.nrows();
    if a.ncols() != n || b.dim() != n {
        return Err(Error::input("dense Hamiltonian: size mismatch"));
    }
    let a = a.map(|x| Complex64::new(x, 0.0));
    let bv = DVector::from_column_slice(b.amplitudes());
    let proj = DMatrix::<Complex64>::identity(n, n) - &bv * bv.adjoint();
    Ok(&a * proj * &a)
}

/// `ψ† H ψ` for a dense Hamiltonian.
pub fn cost_dense(h: &DMatrix<Complex64>, psi: &StateVector) -> Result<f64> {
    if h.nrows() != psi.dim() {
        return Err(Error::input("dense cost: size mismatch"));
    }
    let v = DVector::from_column_slice(psi.amplitudes());
    Ok((v.adjoint() * h * &v)[(0, 0)].re)
}
