//! Linear classifier `d_θ(a) = aᵀθ` and its logistic losses.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::data::{DataPoint, Dataset};
use crate::error::{Error, Result};
use crate::optim::{lbfgs_minimize, ConvergenceRecord, InnerSolveConfig, SolveStatus};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub theta: Vec<f64>,
}

impl ModelParams {
    pub fn new(theta: Vec<f64>) -> Self {
        Self { theta }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            theta: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    pub fn is_finite(&self) -> bool {
        self.theta.iter().all(|v| v.is_finite())
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            theta: self.theta.iter().map(|v| v * c).collect(),
        }
    }

    /// Label of a dataset point; `aᵀθ = 0` maps to `+1`.
    #[inline]
    pub fn predict_point(&self, p: &DataPoint) -> i8 {
        sign(p.score(&self.theta))
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if self.theta.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: self.theta.len(),
            });
        }
        Ok(())
    }
}

#[inline]
fn sign(z: f64) -> i8 {
    if z >= 0.0 {
        1
    } else {
        -1
    }
}

/// `sign(aᵀθ)` with `sign(0) = +1`.
pub fn predict(theta: &ModelParams, a: &[f64]) -> Result<i8> {
    theta.check_dim(a.len())?;
    Ok(sign(a.iter().zip(&theta.theta).map(|(x, w)| x * w).sum()))
}

/// `log(1 + e^t)` without overflow.
#[inline]
pub fn softplus(t: f64) -> f64 {
    if t > 35.0 {
        t
    } else if t < -35.0 {
        t.exp()
    } else {
        t.exp().ln_1p()
    }
}

#[inline]
pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Mean logistic loss `(1/N) Σ log(1 + exp(-y_i a_iᵀθ))`.
pub fn logistic_loss(ds: &Dataset, theta: &ModelParams) -> Result<f64> {
    theta.check_dim(ds.dim())?;
    Ok(mean_logistic_loss(ds.points(), &theta.theta))
}

pub(crate) fn mean_logistic_loss(points: &[DataPoint], theta: &[f64]) -> f64 {
    let total: f64 = points
        .iter()
        .map(|p| softplus(-p.label() * p.score(theta)))
        .sum();
    total / points.len() as f64
}

/// Adds `scale · ∇_θ ℓ` to `grad`.
pub(crate) fn add_logistic_gradient(points: &[DataPoint], theta: &[f64], scale: f64, grad: &mut [f64]) {
    let inv = scale / points.len() as f64;
    for p in points {
        let y = p.label();
        let c = -y * sigmoid(-y * p.score(theta)) * inv;
        let (gx, gs) = grad.split_at_mut(p.x.len());
        for (g, x) in gx.iter_mut().zip(&p.x) {
            *g += c * x;
        }
        gs[0] += c * f64::from(p.s);
    }
}

/// `ℓ_r(θ) = ℓ(θ) + (λ_θ / 2n²)‖θ‖²` over a fixed set of points.
///
/// This is both the inner problem of stage 1 and the server's training problem.
#[derive(Debug, Clone, Copy)]
pub struct RegularizedLoss<'a> {
    points: &'a [DataPoint],
    lambda_theta: f64,
    dim: usize,
}

impl<'a> RegularizedLoss<'a> {
    pub fn new(ds: &'a Dataset, lambda_theta: f64) -> Result<Self> {
        Self::from_points(ds.points(), lambda_theta)
    }

    pub fn from_points(points: &'a [DataPoint], lambda_theta: f64) -> Result<Self> {
        if !(lambda_theta > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "lambda_theta must be positive, got {lambda_theta}"
            )));
        }
        let first = points.first().ok_or(Error::EmptyDataset)?;
        Ok(Self {
            points,
            lambda_theta,
            dim: first.dim(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Coefficient `λ_θ / n²` of the ridge term in the gradient and Hessian.
    pub fn ridge(&self) -> f64 {
        self.lambda_theta / (self.dim * self.dim) as f64
    }

    pub fn value(&self, theta: &[f64]) -> f64 {
        let sq: f64 = theta.iter().map(|v| v * v).sum();
        mean_logistic_loss(self.points, theta) + 0.5 * self.ridge() * sq
    }

    /// Value and gradient in one pass; the gradient is written into `grad`.
    pub fn value_and_gradient(&self, theta: &[f64], grad: &mut [f64]) -> f64 {
        let ridge = self.ridge();
        let inv = 1.0 / self.points.len() as f64;
        for (g, t) in grad.iter_mut().zip(theta) {
            *g = ridge * t;
        }
        let mut loss = 0.0;
        let (gx, gs) = grad.split_at_mut(self.dim - 1);
        for p in self.points {
            let y = p.label();
            let margin = -y * p.score(theta);
            loss += softplus(margin);
            let c = -y * sigmoid(margin) * inv;
            for (g, x) in gx.iter_mut().zip(&p.x) {
                *g += c * x;
            }
            gs[0] += c * f64::from(p.s);
        }
        let sq: f64 = theta.iter().map(|v| v * v).sum();
        loss * inv + 0.5 * ridge * sq
    }

    pub fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim];
        self.value_and_gradient(theta, &mut g);
        g
    }

    /// `(1/N) Σ σ_i(1-σ_i) a_i a_iᵀ + (λ_θ/n²) I`.
    pub fn hessian(&self, theta: &[f64]) -> DMatrix<f64> {
        let n = self.dim;
        let inv = 1.0 / self.points.len() as f64;
        let mut h = DMatrix::<f64>::zeros(n, n);
        let mut a = vec![0.0; n];
        for p in self.points {
            let sg = sigmoid(p.score(theta));
            let w = sg * (1.0 - sg) * inv;
            a[..n - 1].copy_from_slice(&p.x);
            a[n - 1] = f64::from(p.s);
            for j in 0..n {
                let wa = w * a[j];
                if wa == 0.0 {
                    continue;
                }
                for i in j..n {
                    h[(i, j)] += wa * a[i];
                }
            }
        }
        for j in 0..n {
            h[(j, j)] += self.ridge();
            for i in j + 1..n {
                h[(j, i)] = h[(i, j)];
            }
        }
        h
    }

    /// Minimizes the loss with L-BFGS from `start`, then polishes with a few
    /// Newton steps.
    pub fn minimize(&self, start: &[f64], cfg: &InnerSolveConfig) -> (ModelParams, ConvergenceRecord) {
        let (mut theta, mut record) = lbfgs_minimize(|t, g| self.value_and_gradient(t, g), start, cfg);
        self.newton_polish(&mut theta, &mut record, cfg);
        (ModelParams::new(theta), record)
    }

    // L-BFGS stops on a tolerance, so its leftover error moves smoothly with
    // the data and biases anything differentiated through θ*. Near the
    // minimizer Newton converges quadratically; a step is kept only if it
    // lowers the gradient norm.
    fn newton_polish(&self, theta: &mut Vec<f64>, record: &mut ConvergenceRecord, cfg: &InnerSolveConfig) {
        const MAX_STEPS: usize = 3;
        if !record.final_gradient_norm.is_finite() || theta.iter().any(|v| !v.is_finite()) {
            return;
        }
        let mut grad = vec![0.0; self.dim];
        let mut value = self.value_and_gradient(theta, &mut grad);
        let mut norm = norm2(&grad);
        for _ in 0..MAX_STEPS {
            if norm == 0.0 {
                break;
            }
            let Some(chol) = self.hessian(theta).cholesky() else {
                break;
            };
            let step = chol.solve(&nalgebra::DVector::from_column_slice(&grad));
            let trial: Vec<f64> = theta.iter().zip(step.iter()).map(|(t, d)| t - d).collect();
            let mut trial_grad = vec![0.0; self.dim];
            let trial_value = self.value_and_gradient(&trial, &mut trial_grad);
            record.evaluations += 1;
            let trial_norm = norm2(&trial_grad);
            if !(trial_norm < norm) || !trial_value.is_finite() {
                break;
            }
            *theta = trial;
            grad = trial_grad;
            value = trial_value;
            norm = trial_norm;
        }
        record.final_value = value;
        record.final_gradient_norm = norm;
        if norm <= cfg.gradient_tolerance {
            record.status = SolveStatus::Converged;
        }
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Trains `argmin_θ ℓ_r(ds, θ)` from θ = 0.
pub fn train_regularized(
    ds: &Dataset,
    lambda_theta: f64,
    cfg: &InnerSolveConfig,
) -> Result<(ModelParams, ConvergenceRecord)> {
    let loss = RegularizedLoss::new(ds, lambda_theta)?;
    Ok(loss.minimize(&vec![0.0; ds.dim()], cfg))
}
