//! Scaled conjugate gradient minimization (Møller, 1993).
//!
//! Each iteration estimates the curvature along the search direction with a
//! one-sided finite difference of the gradient, regularizes it with a
//! Levenberg-Marquardt term `λ‖p‖²`, and takes the resulting step without a
//! line search. `λ` grows when the quadratic model predicts the loss poorly
//! and shrinks when it predicts it well.

use crate::error::{Error, Result};

/// A differentiable scalar function of a parameter vector.
pub trait Objective {
    fn dimension(&self) -> usize;

    fn value(&self, params: &[f64]) -> f64;

    fn value_and_gradient(&self, params: &[f64]) -> (f64, Vec<f64>);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScgSettings {
    pub max_iterations: usize,
    /// Stop once the gradient's Euclidean norm falls below this.
    pub gradient_tolerance: f64,
    /// Base finite-difference step for the curvature estimate.
    pub sigma0: f64,
    /// Initial Levenberg-Marquardt scale.
    pub lambda0: f64,
}

impl Default for ScgSettings {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            gradient_tolerance: 1e-6,
            sigma0: 1e-4,
            lambda0: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScgOutcome {
    pub params: Vec<f64>,
    pub iterations: usize,
    /// Loss at the start and after every accepted step.
    pub loss_history: Vec<f64>,
    pub converged: bool,
    pub gradient_norm: f64,
}

impl ScgOutcome {
    pub fn initial_loss(&self) -> f64 {
        self.loss_history[0]
    }

    pub fn final_loss(&self) -> f64 {
        *self
            .loss_history
            .last()
            .expect("history starts with the initial loss")
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &[f64]) -> Vec<f64> {
    y.iter().zip(x).map(|(yi, xi)| yi + alpha * xi).collect()
}

fn ensure_finite(iteration: usize, loss: f64, grad: Option<&[f64]>) -> Result<()> {
    if !loss.is_finite() {
        return Err(Error::Training {
            iteration,
            message: format!("loss became {loss}"),
        });
    }
    if grad.is_some_and(|g| g.iter().any(|v| !v.is_finite())) {
        return Err(Error::Training {
            iteration,
            message: "gradient became non-finite".into(),
        });
    }
    Ok(())
}

pub fn minimize<O: Objective + ?Sized>(
    objective: &O,
    initial: Vec<f64>,
    settings: &ScgSettings,
) -> Result<ScgOutcome> {
    let n = objective.dimension();
    if initial.len() != n {
        return Err(Error::Dimension(format!(
            "initial point has {} parameters, objective expects {n}",
            initial.len()
        )));
    }

    let mut w = initial;
    let (mut loss, grad) = objective.value_and_gradient(&w);
    ensure_finite(0, loss, Some(&grad))?;
    let mut r: Vec<f64> = grad.iter().map(|g| -g).collect();
    let mut p = r.clone();

    let mut lambda = settings.lambda0;
    let mut lambda_bar = 0.0;
    let mut success = true;
    let mut delta = 0.0;
    let mut history = vec![loss];
    let mut iterations = 0;
    let mut converged = false;

    for k in 1..=settings.max_iterations {
        if dot(&r, &r).sqrt() < settings.gradient_tolerance {
            converged = true;
            break;
        }
        iterations = k;

        if success && dot(&p, &r) <= 0.0 {
            // lost conjugacy; restart along steepest descent
            p = r.clone();
        }
        let p_sq = dot(&p, &p);

        if success {
            let sigma = settings.sigma0 / p_sq.sqrt();
            let (_, grad_plus) = objective.value_and_gradient(&axpy(sigma, &p, &w));
            ensure_finite(k, loss, Some(&grad_plus))?;
            // s = (E'(w + σp) − E'(w)) / σ, with E'(w) = −r
            delta = grad_plus
                .iter()
                .zip(&r)
                .zip(&p)
                .map(|((gp, ri), pi)| (gp + ri) / sigma * pi)
                .sum();
        }

        delta += (lambda - lambda_bar) * p_sq;
        if delta <= 0.0 {
            // make the curvature estimate positive definite
            lambda_bar = 2.0 * (lambda - delta / p_sq);
            delta = -delta + lambda * p_sq;
            lambda = lambda_bar;
        }

        let mu = dot(&p, &r);
        let alpha = mu / delta;
        let w_new = axpy(alpha, &p, &w);
        let loss_new = objective.value(&w_new);
        ensure_finite(k, loss_new, None)?;
        let comparison = 2.0 * delta * (loss - loss_new) / (mu * mu);

        if comparison >= 0.0 {
            let (loss_checked, grad_new) = objective.value_and_gradient(&w_new);
            ensure_finite(k, loss_checked, Some(&grad_new))?;
            let r_new: Vec<f64> = grad_new.iter().map(|g| -g).collect();
            w = w_new;
            loss = loss_new;
            history.push(loss);
            lambda_bar = 0.0;
            success = true;
            if k % n == 0 {
                p = r_new.clone();
            } else {
                let beta = (dot(&r_new, &r_new) - dot(&r_new, &r)) / mu;
                p = axpy(beta, &p, &r_new);
            }
            r = r_new;
            if comparison >= 0.75 {
                lambda *= 0.25;
            }
        } else {
            lambda_bar = lambda;
            success = false;
        }

        if comparison < 0.25 {
            lambda += delta * (1.0 - comparison) / p_sq;
        }
    }

    if !converged && dot(&r, &r).sqrt() < settings.gradient_tolerance {
        converged = true;
    }
    Ok(ScgOutcome {
        gradient_norm: dot(&r, &r).sqrt(),
        params: w,
        iterations,
        loss_history: history,
        converged,
    })
}
