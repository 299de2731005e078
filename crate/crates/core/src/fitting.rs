//! Weighted nonlinear least-squares engine: damped Gauss-Newton with a
//! Levenberg-Marquardt damping schedule, finite-difference Jacobians, bound
//! projection and fixed-parameter masks. Deterministic: identical inputs
//! produce bitwise-identical results.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const LAMBDA_INIT: f64 = 1e-3;
const LAMBDA_UP: f64 = 10.0;
const LAMBDA_DOWN: f64 = 0.1;
const FTOL: f64 = 1e-10;
const GTOL: f64 = 1e-8;
const MAX_ITER: usize = 500;
const JAC_REL_STEP: f64 = 1e-6;
const JAC_ABS_FLOOR: f64 = 1e-12;

/// A weighted least-squares problem: `model(params, x) -> y` against data
/// triples, with optional per-point uncertainties, per-parameter bounds and a
/// fixed mask.
pub struct FitProblem<F>
where
    F: Fn(&[f64], f64) -> f64,
{
    pub model: F,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub sigma: Option<Vec<f64>>,
    pub initial: Vec<f64>,
    pub bounds: Option<Vec<(f64, f64)>>,
    pub fixed: Vec<bool>,
}

impl<F> FitProblem<F>
where
    F: Fn(&[f64], f64) -> f64,
{
    pub fn new(model: F, x: Vec<f64>, y: Vec<f64>, initial: Vec<f64>) -> Self {
        let n = initial.len();
        FitProblem {
            model,
            x,
            y,
            sigma: None,
            initial,
            bounds: None,
            fixed: vec![false; n],
        }
    }

    pub fn with_sigma(mut self, sigma: Vec<f64>) -> Self {
        self.sigma = Some(sigma);
        self
    }

    pub fn with_bounds(mut self, bounds: Vec<(f64, f64)>) -> Self {
        self.bounds = Some(bounds);
        self
    }

    pub fn with_fixed(mut self, fixed: Vec<bool>) -> Self {
        self.fixed = fixed;
        self
    }

    fn validate(&self) -> Result<()> {
        let n_par = self.initial.len();
        if self.x.len() != self.y.len() {
            return Err(Error::FitSetup("x and y lengths differ".into()));
        }
        if self.fixed.len() != n_par {
            return Err(Error::FitSetup("fixed mask length mismatch".into()));
        }
        if let Some(s) = &self.sigma {
            if s.len() != self.x.len() {
                return Err(Error::FitSetup("sigma length mismatch".into()));
            }
            if s.iter().any(|&v| !(v > 0.0)) {
                return Err(Error::FitSetup("sigma values must be > 0".into()));
            }
        }
        if let Some(b) = &self.bounds {
            if b.len() != n_par {
                return Err(Error::FitSetup("bounds length mismatch".into()));
            }
        }
        let n_free = self.fixed.iter().filter(|f| !**f).count();
        if n_free == 0 {
            return Err(Error::FitSetup("no free parameters".into()));
        }
        if self.x.len() <= n_free {
            return Err(Error::FitSetup(format!(
                "need more data points ({}) than free parameters ({n_free})",
                self.x.len()
            )));
        }
        Ok(())
    }
}

/// Fit outcome: parameter vector, covariance over the free parameters,
/// chi-square and convergence diagnostics.
#[derive(Clone, Debug)]
pub struct FitResult {
    pub params: Vec<f64>,
    /// Covariance of the free parameters: `(J^T W J)^-1` in free-parameter
    /// order.
    pub covariance: DMatrix<f64>,
    pub chi2: f64,
    pub reduced_chi2: f64,
    pub iterations: usize,
    pub converged: bool,
    pub message: String,
    /// Indices (into `params`) of the free parameters, matching the
    /// covariance ordering.
    pub free_indices: Vec<usize>,
}

impl FitResult {
    /// One-sigma uncertainties for every parameter (zero for fixed ones):
    /// `sqrt(diag cov) * sqrt(reduced chi2)`.
    pub fn uncertainties(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.params.len()];
        let scale = self.reduced_chi2.max(0.0).sqrt();
        for (k, &i) in self.free_indices.iter().enumerate() {
            out[i] = self.covariance[(k, k)].max(0.0).sqrt() * scale;
        }
        out
    }
}

fn project<F: Fn(&[f64], f64) -> f64>(problem: &FitProblem<F>, params: &mut [f64]) {
    if let Some(bounds) = &problem.bounds {
        for (p, (lo, hi)) in params.iter_mut().zip(bounds) {
            *p = p.clamp(*lo, *hi);
        }
    }
}

fn residuals<F: Fn(&[f64], f64) -> f64>(problem: &FitProblem<F>, params: &[f64]) -> DVector<f64> {
    DVector::from_iterator(
        problem.x.len(),
        problem.x.iter().zip(&problem.y).enumerate().map(|(i, (&x, &y))| {
            let s = problem.sigma.as_ref().map_or(1.0, |s| s[i]);
            (y - (problem.model)(params, x)) / s
        }),
    )
}

fn jacobian<F: Fn(&[f64], f64) -> f64>(
    problem: &FitProblem<F>,
    params: &[f64],
    free: &[usize],
) -> DMatrix<f64> {
    let m = problem.x.len();
    let mut jac = DMatrix::zeros(m, free.len());
    let mut p_hi = params.to_vec();
    let mut p_lo = params.to_vec();
    for (col, &k) in free.iter().enumerate() {
        let step = (params[k].abs() * JAC_REL_STEP).max(JAC_ABS_FLOOR);
        p_hi[k] = params[k] + step;
        p_lo[k] = params[k] - step;
        let r_hi = residuals(problem, &p_hi);
        let r_lo = residuals(problem, &p_lo);
        // d(residual)/d(param); residual = (y - model)/sigma
        for i in 0..m {
            jac[(i, col)] = (r_hi[i] - r_lo[i]) / (2.0 * step);
        }
        p_hi[k] = params[k];
        p_lo[k] = params[k];
    }
    jac
}

/// Minimize `sum(((y - model)/sigma)^2)` from `problem.initial`.
pub fn fit<F: Fn(&[f64], f64) -> f64>(problem: &FitProblem<F>) -> Result<FitResult> {
    problem.validate()?;
    let free: Vec<usize> = problem
        .fixed
        .iter()
        .enumerate()
        .filter_map(|(i, f)| (!f).then_some(i))
        .collect();
    let dof = problem.x.len() - free.len();

    let mut params = problem.initial.clone();
    project(problem, &mut params);
    let mut r = residuals(problem, &params);
    let mut chi2 = r.norm_squared();
    let mut lambda = LAMBDA_INIT;

    let mut converged = false;
    let mut message = format!("no convergence in {MAX_ITER} iterations");
    let mut iterations = 0;

    for iter in 1..=MAX_ITER {
        iterations = iter;
        let jac = jacobian(problem, &params, &free);
        let jtj = jac.transpose() * &jac;
        // gradient of chi2 wrt free params is -2 J^T r with our residual sign
        let jtr = jac.transpose() * &r;
        let grad_max = jtr.amax();
        if grad_max < GTOL {
            converged = true;
            message = format!("gradient max-norm {grad_max:.3e} below {GTOL:.0e}");
            break;
        }

        // damped normal equations; retry with larger lambda on rejection
        let mut accepted = false;
        for _ in 0..30 {
            let mut lhs = jtj.clone();
            for i in 0..free.len() {
                lhs[(i, i)] += lambda * jtj[(i, i)].max(1e-300);
            }
            let delta = match lhs.clone().lu().solve(&(-&jtr)) {
                Some(d) => d,
                None => {
                    return Ok(FitResult {
                        params,
                        covariance: DMatrix::zeros(free.len(), free.len()),
                        chi2,
                        reduced_chi2: chi2 / dof as f64,
                        iterations,
                        converged: false,
                        message: "singular normal equations".into(),
                        free_indices: free,
                    });
                }
            };
            let mut trial = params.clone();
            for (col, &k) in free.iter().enumerate() {
                trial[k] += delta[col];
            }
            project(problem, &mut trial);
            let r_trial = residuals(problem, &trial);
            let chi2_trial = r_trial.norm_squared();
            if chi2_trial <= chi2 {
                let rel_decrease = (chi2 - chi2_trial) / chi2.max(1e-300);
                params = trial;
                r = r_trial;
                let prev = chi2;
                chi2 = chi2_trial;
                lambda = (lambda * LAMBDA_DOWN).max(1e-15);
                accepted = true;
                if rel_decrease < FTOL || prev == 0.0 {
                    converged = true;
                    message = format!("relative chi2 decrease {rel_decrease:.3e} below {FTOL:.0e}");
                }
                break;
            }
            lambda *= LAMBDA_UP;
        }
        if !accepted {
            converged = true;
            message = "step rejected at maximum damping; local minimum".into();
        }
        if converged {
            break;
        }
    }

    // covariance from the undamped normal equations at the solution
    let jac = jacobian(problem, &params, &free);
    let jtj = jac.transpose() * &jac;
    let covariance = jtj
        .clone()
        .try_inverse()
        .unwrap_or_else(|| DMatrix::zeros(free.len(), free.len()));

    Ok(FitResult {
        params,
        covariance,
        chi2,
        reduced_chi2: chi2 / dof as f64,
        iterations,
        converged,
        message,
        free_indices: free,
    })
}
