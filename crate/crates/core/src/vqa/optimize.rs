//! Finite-difference BFGS and gradient descent.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[default]
    QuasiNewtonBfgs,
    GradientDescent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerOptions {
    pub method: Method,
    /// Stop once `|δE|` between accepted iterates is at most this.
    pub epsilon: f64,
    pub max_iterations: usize,
    /// Central-difference step.
    pub fd_step: f64,
    pub restarts: usize,
    /// Stop once the gradient norm drops below this.
    pub grad_tol: f64,
    /// Initial line-search step for gradient descent.
    pub learning_rate: f64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            method: Method::QuasiNewtonBfgs,
            epsilon: 1e-8,
            max_iterations: 1000,
            fd_step: 1e-6,
            restarts: 5,
            grad_tol: 1e-10,
            learning_rate: 0.5,
        }
    }
}

impl OptimizerOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0) || !(self.grad_tol >= 0.0) {
            return Err(Error::input("tolerances must be non-negative"));
        }
        if !(self.fd_step > 0.0 && self.fd_step.is_finite()) {
            return Err(Error::input("finite-difference step must be positive"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::input("learning rate must be positive"));
        }
        if self.restarts == 0 {
            return Err(Error::input("at least one restart is required"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    CostTolerance,
    GradientFloor,
    LineSearch,
    MaxIterations,
}

/// One accepted iterate. Iteration 0 is the starting point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub iteration: usize,
    pub theta: Vec<f64>,
    pub cost: f64,
    pub grad_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimization {
    pub steps: Vec<Step>,
    pub stop: StopReason,
    pub evaluations: u64,
}

impl Minimization {
    pub fn last(&self) -> &Step {
        self.steps.last().expect("at least the starting point")
    }
}

/// A failed run together with the iterates accepted before the failure.
#[derive(Debug)]
pub struct MinimizeError {
    pub error: Error,
    pub partial: Vec<Step>,
}

impl From<MinimizeError> for Error {
    fn from(e: MinimizeError) -> Self {
        match e.error {
            Error::Numerical(msg) => Error::Numerical(format!("{msg} (after {} accepted iterates)", e.partial.len())),
            other => other,
        }
    }
}

const ARMIJO_C1: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;

/// Counts objective calls so every evaluation gets a stable id.
struct Evaluator<'a, F> {
    f: &'a F,
    next: u64,
}

impl<F> Evaluator<'_, F>
where
    F: Fn(&[f64], u64) -> Result<f64> + Sync,
{
    fn value(&mut self, x: &[f64]) -> Result<f64> {
        let id = self.next;
        self.next += 1;
        let v = (self.f)(x, id)?;
        if !v.is_finite() {
            return Err(Error::Numerical(format!("objective returned {v}")));
        }
        Ok(v)
    }

    /// Central differences; components run in parallel with ids fixed up front.
    fn gradient(&mut self, x: &[f64], h: f64) -> Result<Vec<f64>> {
        let base = self.next;
        self.next += 2 * x.len() as u64;
        let f = self.f;
        (0..x.len())
            .into_par_iter()
            .map(|i| {
                let mut xp = x.to_vec();
                xp[i] += h;
                let fp = f(&xp, base + 2 * i as u64)?;
                xp[i] = x[i] - h;
                let fm = f(&xp, base + 2 * i as u64 + 1)?;
                let g = (fp - fm) / (2.0 * h);
                if !g.is_finite() {
                    return Err(Error::Numerical(format!("non-finite gradient component {i}")));
                }
                Ok(g)
            })
            .collect()
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Minimizes `f(θ, evaluation_id)` from `x0`.
///
/// The evaluation id lets stochastic objectives pick a reproducible seed per
/// call. The returned trace is non-increasing in cost.
pub fn minimize<F>(f: &F, x0: Vec<f64>, opts: &OptimizerOptions) -> std::result::Result<Minimization, MinimizeError>
where
    F: Fn(&[f64], u64) -> Result<f64> + Sync,
{
    let mut steps = Vec::new();
    let fail = |error: Error, steps: Vec<Step>| MinimizeError { error, partial: steps };
    if let Err(e) = opts.validate() {
        return Err(fail(e, steps));
    }
    let mut ev = Evaluator { f, next: 0 };
    let n = x0.len();
    let mut x = x0;
    let mut fx = match ev.value(&x) {
        Ok(v) => v,
        Err(e) => return Err(fail(e, steps)),
    };
    let mut g = match ev.gradient(&x, opts.fd_step) {
        Ok(g) => g,
        Err(e) => return Err(fail(e, steps)),
    };
    steps.push(Step {
        iteration: 0,
        theta: x.clone(),
        cost: fx,
        grad_norm: norm(&g),
    });

    let mut h_inv = DMatrix::<f64>::identity(n, n);
    let mut h_is_identity = true;
    let mut stop = StopReason::MaxIterations;
    let mut iteration = 1;
    while iteration <= opts.max_iterations {
        let gnorm = norm(&g);
        if gnorm < opts.grad_tol {
            steps.push(Step {
                iteration,
                theta: x.clone(),
                cost: fx,
                grad_norm: gnorm,
            });
            stop = StopReason::GradientFloor;
            break;
        }
        let gv = DVector::from_column_slice(&g);
        let (mut d, alpha0) = match opts.method {
            Method::QuasiNewtonBfgs => (-(&h_inv * &gv), 1.0),
            Method::GradientDescent => (-gv.clone(), opts.learning_rate),
        };
        let mut slope = gv.dot(&d);
        if !(slope < 0.0) {
            h_inv = DMatrix::identity(n, n);
            h_is_identity = true;
            d = -gv.clone();
            slope = -gnorm * gnorm;
        }

        // Armijo backtracking
        let mut alpha = alpha0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let xt: Vec<f64> = x.iter().zip(d.iter()).map(|(xi, di)| xi + alpha * di).collect();
            let ft = match ev.value(&xt) {
                Ok(v) => v,
                Err(e) => return Err(fail(e, steps)),
            };
            if ft <= fx + ARMIJO_C1 * alpha * slope {
                accepted = Some((xt, ft));
                break;
            }
            alpha *= 0.5;
        }
        let Some((x_new, f_new)) = accepted else {
            if opts.method == Method::QuasiNewtonBfgs && !h_is_identity {
                h_inv = DMatrix::identity(n, n);
                h_is_identity = true;
                continue;
            }
            stop = StopReason::LineSearch;
            break;
        };

        let g_new = match ev.gradient(&x_new, opts.fd_step) {
            Ok(g) => g,
            Err(e) => return Err(fail(e, steps)),
        };
        if opts.method == Method::QuasiNewtonBfgs {
            let s = DVector::from_iterator(n, x_new.iter().zip(&x).map(|(a, b)| a - b));
            let y = DVector::from_iterator(n, g_new.iter().zip(&g).map(|(a, b)| a - b));
            let sy = s.dot(&y);
            // skip the update when the curvature condition fails
            if sy > 1e-14 * s.norm() * y.norm() && sy > 0.0 {
                if h_is_identity {
                    // scale the first approximation to the observed curvature
                    h_inv *= sy / y.dot(&y);
                }
                let rho = 1.0 / sy;
                let eye = DMatrix::<f64>::identity(n, n);
                let left = &eye - rho * &s * y.transpose();
                let right = &eye - rho * &y * s.transpose();
                h_inv = left * &h_inv * right + rho * &s * s.transpose();
                h_is_identity = false;
            }
        }

        let delta = (f_new - fx).abs();
        x = x_new;
        fx = f_new;
        g = g_new;
        steps.push(Step {
            iteration,
            theta: x.clone(),
            cost: fx,
            grad_norm: norm(&g),
        });
        if delta <= opts.epsilon {
            stop = StopReason::CostTolerance;
            break;
        }
        iteration += 1;
    }
    Ok(Minimization {
        steps,
        stop,
        evaluations: ev.next,
    })
}
