//! Damped (Levenberg-Marquardt) least squares with finite-difference
//! Jacobians.
//!
//! Schedule: λ starts at 1e-3, is multiplied by 0.3 after an accepted step and
//! by 10 after a rejected one. The normal equations are solved in the basis
//! where JᵀJ has unit diagonal, so parameters of very different magnitude do
//! not spoil the conditioning. A parameter whose bounds coincide is held
//! fixed.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};

const INITIAL_LAMBDA: f64 = 1e-3;
const ACCEPT_FACTOR: f64 = 0.3;
const REJECT_FACTOR: f64 = 10.0;
const MAX_LAMBDA: f64 = 1e16;
pub const MAX_ITERATIONS: usize = 200;
pub const COST_TOLERANCE: f64 = 1e-10;
/// Reciprocal condition number of the scaled normal matrix below which the
/// problem is reported as rank deficient.
const RCOND_LIMIT: f64 = 1e-13;

/// A model y = f(x; p) evaluated on a batch of abscissae.
pub trait Model: Sync {
    fn param_names(&self) -> Vec<String>;

    /// Writes f(x[i]; params) into `out[i]`.
    fn eval(&self, params: &[f64], x: &[f64], out: &mut [f64]);

    fn n_params(&self) -> usize {
        self.param_names().len()
    }
}

pub struct FitProblem<'m> {
    pub model: &'m dyn Model,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// One-σ uncertainties; unit weights when absent.
    pub sigma: Option<Vec<f64>>,
    pub initial: Vec<f64>,
    /// Inclusive (lower, upper) per parameter; equal ends fix the parameter.
    pub bounds: Vec<(f64, f64)>,
}

impl<'m> FitProblem<'m> {
    /// Problem with unbounded parameters and unit weights.
    pub fn new(model: &'m dyn Model, x: Vec<f64>, y: Vec<f64>, initial: Vec<f64>) -> Self {
        let n = initial.len();
        FitProblem {
            model,
            x,
            y,
            sigma: None,
            initial,
            bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); n],
        }
    }

    pub fn with_sigma(mut self, sigma: Vec<f64>) -> Self {
        self.sigma = Some(sigma);
        self
    }

    /// Counting-statistics weights: σᵢ² = max(yᵢ, 1).
    pub fn with_poisson_weights(mut self) -> Self {
        self.sigma = Some(self.y.iter().map(|&c| c.max(1.0).sqrt()).collect());
        self
    }

    pub fn with_bounds(mut self, bounds: Vec<(f64, f64)>) -> Self {
        self.bounds = bounds;
        self
    }

    pub fn bound(mut self, index: usize, lo: f64, hi: f64) -> Self {
        self.bounds[index] = (lo, hi);
        self
    }

    pub fn fix(mut self, index: usize) -> Self {
        let v = self.initial[index];
        self.bounds[index] = (v, v);
        self
    }

    fn validate(&self) -> Result<()> {
        let n = self.x.len();
        if self.y.len() != n {
            return Err(Error::Validation(format!("{} x values but {} y values", n, self.y.len())));
        }
        if let Some(s) = &self.sigma {
            if s.len() != n {
                return Err(Error::Validation(format!("{} uncertainties for {} points", s.len(), n)));
            }
            if s.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(Error::Validation("uncertainties must be finite and positive".into()));
            }
        }
        let p = self.model.n_params();
        if self.initial.len() != p || self.bounds.len() != p {
            return Err(Error::Validation(format!(
                "model has {p} parameters; got {} initial values and {} bounds",
                self.initial.len(),
                self.bounds.len()
            )));
        }
        for (i, (&v, &(lo, hi))) in self.initial.iter().zip(&self.bounds).enumerate() {
            if !(lo <= v && v <= hi) || !v.is_finite() {
                return Err(Error::Validation(format!(
                    "initial value {v} of parameter {} outside bounds [{lo}, {hi}]",
                    self.model.param_names()[i]
                )));
            }
        }
        let free = self.bounds.iter().filter(|(lo, hi)| lo < hi).count();
        if n < free {
            return Err(Error::Validation(format!("{n} data points for {free} free parameters")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    pub param_names: Vec<String>,
    pub parameters: Vec<f64>,
    /// Covariance of all parameters (zero rows/columns for fixed ones).
    pub covariance: Vec<Vec<f64>>,
    pub chi2_reduced: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Cost Σ rᵢ² after the initial guess and after each accepted step.
    #[serde(skip)]
    pub cost_history: Vec<f64>,
}

#[derive(Serialize)]
struct ParamReport<'a> {
    name: &'a str,
    value: f64,
    error: f64,
}

#[derive(Serialize)]
struct FitReport<'a> {
    parameters: Vec<ParamReport<'a>>,
    chi2_reduced: f64,
    converged: bool,
    iterations: usize,
}

impl FitResult {
    /// 1σ parameter errors from the covariance diagonal.
    pub fn errors(&self) -> Vec<f64> {
        (0..self.parameters.len())
            .map(|i| self.covariance[i][i].max(0.0).sqrt())
            .collect()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.param_names.iter().position(|n| n == name).map(|i| self.parameters[i])
    }

    pub fn error_of(&self, name: &str) -> Option<f64> {
        self.param_names
            .iter()
            .position(|n| n == name)
            .map(|i| self.covariance[i][i].max(0.0).sqrt())
    }

    /// JSON report: parameter names, values and 1σ errors, reduced χ², convergence.
    pub fn to_json(&self) -> String {
        let errors = self.errors();
        let report = FitReport {
            parameters: self
                .param_names
                .iter()
                .zip(&self.parameters)
                .zip(&errors)
                .map(|((name, &value), &error)| ParamReport { name, value, error })
                .collect(),
            chi2_reduced: self.chi2_reduced,
            converged: self.converged,
            iterations: self.iterations,
        };
        serde_json::to_string_pretty(&report).expect("fit report serializes")
    }
}

/// Finite-difference step for a parameter value.
#[inline]
pub fn fd_step(p: f64) -> f64 {
    (1e-6 * p.abs()).max(1e-8)
}

struct Weighted<'a, 'm> {
    problem: &'a FitProblem<'m>,
    inv_sigma: Vec<f64>,
    free: Vec<usize>,
}

impl Weighted<'_, '_> {
    fn residuals(&self, params: &[f64], out: &mut [f64]) -> f64 {
        self.problem.model.eval(params, &self.problem.x, out);
        let mut cost = 0.0;
        for (i, r) in out.iter_mut().enumerate() {
            *r = (self.problem.y[i] - *r) * self.inv_sigma[i];
            cost += *r * *r;
        }
        if cost.is_finite() {
            cost
        } else {
            f64::INFINITY
        }
    }

    /// Jacobian of the weighted model (not the residual) over free parameters.
    fn jacobian(&self, params: &[f64], step_scale: f64) -> DMatrix<f64> {
        let n = self.problem.x.len();
        let mut jac = DMatrix::zeros(n, self.free.len());
        let mut plus = vec![0.0; n];
        let mut minus = vec![0.0; n];
        let mut p = params.to_vec();
        for (col, &k) in self.free.iter().enumerate() {
            let (lo, hi) = self.problem.bounds[k];
            let h = step_scale * fd_step(params[k]);
            let up = (params[k] + h).min(hi);
            let down = (params[k] - h).max(lo);
            p[k] = up;
            self.problem.model.eval(&p, &self.problem.x, &mut plus);
            p[k] = down;
            self.problem.model.eval(&p, &self.problem.x, &mut minus);
            p[k] = params[k];
            let span = up - down;
            for i in 0..n {
                jac[(i, col)] = (plus[i] - minus[i]) / span * self.inv_sigma[i];
            }
        }
        jac
    }
}

/// Central-difference Jacobian ∂f(xᵢ)/∂pⱼ over all parameters, with the
/// standard step multiplied by `step_scale`.
pub fn finite_difference_jacobian(model: &dyn Model, params: &[f64], x: &[f64], step_scale: f64) -> DMatrix<f64> {
    let n = x.len();
    let mut jac = DMatrix::zeros(n, params.len());
    let mut plus = vec![0.0; n];
    let mut minus = vec![0.0; n];
    let mut p = params.to_vec();
    for k in 0..params.len() {
        let h = step_scale * fd_step(params[k]);
        p[k] = params[k] + h;
        model.eval(&p, x, &mut plus);
        p[k] = params[k] - h;
        model.eval(&p, x, &mut minus);
        p[k] = params[k];
        for i in 0..n {
            jac[(i, k)] = (plus[i] - minus[i]) / (2.0 * h);
        }
    }
    jac
}

/// Unit-diagonal scaling of JᵀJ. Fails when a free parameter has no effect.
fn scaled_normal(jac: &DMatrix<f64>, resid: &[f64]) -> Result<(DMatrix<f64>, DVector<f64>, DVector<f64>)> {
    let a = jac.transpose() * jac;
    let g = jac.transpose() * DVector::from_column_slice(resid);
    let d = DVector::from_iterator(a.nrows(), (0..a.nrows()).map(|i| a[(i, i)].sqrt()));
    if d.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::RankDeficient);
    }
    let mut a_hat = a;
    for i in 0..a_hat.nrows() {
        for j in 0..a_hat.ncols() {
            a_hat[(i, j)] /= d[i] * d[j];
        }
    }
    let g_hat = g.component_div(&d);
    Ok((a_hat, g_hat, d))
}

fn check_rank(a_hat: &DMatrix<f64>) -> Result<()> {
    let eig = SymmetricEigen::new(a_hat.clone());
    let max = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(max > 0.0) || min / max < RCOND_LIMIT {
        return Err(Error::RankDeficient);
    }
    Ok(())
}

/// Minimizes Σ((yᵢ − f(xᵢ; p))/σᵢ)² within the parameter bounds.
pub fn least_squares(problem: &FitProblem) -> Result<FitResult> {
    problem.validate()?;
    let n = problem.x.len();
    let inv_sigma = match &problem.sigma {
        Some(s) => s.iter().map(|v| 1.0 / v).collect(),
        None => vec![1.0; n],
    };
    let free: Vec<usize> = (0..problem.initial.len())
        .filter(|&k| problem.bounds[k].0 < problem.bounds[k].1)
        .collect();
    let w = Weighted {
        problem,
        inv_sigma,
        free,
    };

    let mut params = problem.initial.clone();
    let mut resid = vec![0.0; n];
    let mut trial_resid = vec![0.0; n];
    let mut cost = w.residuals(&params, &mut resid);
    if !cost.is_finite() {
        return Err(Error::Numerical("model is not finite at the initial guess".into()));
    }
    let mut history = vec![cost];
    let mut lambda = INITIAL_LAMBDA;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < MAX_ITERATIONS && !converged && !w.free.is_empty() {
        iterations += 1;
        let jac = w.jacobian(&params, 1.0);
        let (a_full, g_full, d_full) = scaled_normal(&jac, &resid)?;
        // parameters on a bound whose descent direction points outward sit
        // this iteration out, otherwise clamping stalls the whole step
        let moving: Vec<usize> = (0..w.free.len())
            .filter(|&c| {
                let (lo, hi) = problem.bounds[w.free[c]];
                let v = params[w.free[c]];
                !((v >= hi && g_full[c] > 0.0) || (v <= lo && g_full[c] < 0.0))
            })
            .collect();
        if moving.is_empty() {
            converged = true;
            break;
        }
        let a_hat = a_full.select_rows(&moving).select_columns(&moving);
        let g_hat = g_full.select_rows(&moving);
        let d = d_full.select_rows(&moving);
        loop {
            let mut m = a_hat.clone();
            for i in 0..m.nrows() {
                m[(i, i)] += lambda;
            }
            let step = match m.cholesky() {
                Some(c) => c.solve(&g_hat).component_div(&d),
                None => {
                    lambda *= REJECT_FACTOR;
                    if lambda > MAX_LAMBDA {
                        converged = true;
                        break;
                    }
                    continue;
                }
            };
            let mut trial = params.clone();
            for (col, k) in moving.iter().map(|&c| w.free[c]).enumerate() {
                let (lo, hi) = problem.bounds[k];
                trial[k] = (params[k] + step[col]).clamp(lo, hi);
            }
            let trial_cost = w.residuals(&trial, &mut trial_resid);
            if trial_cost <= cost {
                let rel = if cost > 0.0 { (cost - trial_cost) / cost } else { 0.0 };
                params = trial;
                std::mem::swap(&mut resid, &mut trial_resid);
                cost = trial_cost;
                history.push(cost);
                lambda = (lambda * ACCEPT_FACTOR).max(1e-15);
                if rel < COST_TOLERANCE || cost == 0.0 {
                    converged = true;
                }
                break;
            }
            lambda *= REJECT_FACTOR;
            if lambda > MAX_LAMBDA {
                // no descent direction left at working precision
                converged = true;
                break;
            }
        }
    }
    if w.free.is_empty() {
        converged = true;
    }

    let dof = (n - w.free.len()).max(1) as f64;
    let chi2_reduced = cost / dof;
    let p = params.len();
    let mut covariance = vec![vec![0.0; p]; p];
    if !w.free.is_empty() {
        let jac = w.jacobian(&params, 1.0);
        let (a_hat, _, d) = scaled_normal(&jac, &resid)?;
        check_rank(&a_hat)?;
        let inv = a_hat.try_inverse().ok_or(Error::RankDeficient)?;
        let scale = if problem.sigma.is_some() { 1.0 } else { chi2_reduced };
        for (r, &kr) in w.free.iter().enumerate() {
            for (c, &kc) in w.free.iter().enumerate() {
                covariance[kr][kc] = inv[(r, c)] / (d[r] * d[c]) * scale;
            }
        }
    }

    Ok(FitResult {
        param_names: problem.model.param_names(),
        parameters: params,
        covariance,
        chi2_reduced,
        iterations,
        converged,
        cost_history: history,
    })
}
