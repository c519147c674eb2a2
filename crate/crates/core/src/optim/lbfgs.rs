//! Limited-memory BFGS with a strong Wolfe line search (bracketing + zoom with
//! safeguarded cubic interpolation).

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

/// Settings for the inner (and server) training problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InnerSolveConfig {
    /// Ridge weight λ_θ of `ℓ_r = ℓ + (λ_θ/2n²)‖θ‖²`.
    pub lambda_theta: f64,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub lbfgs_memory: usize,
    pub wolfe_c1: f64,
    pub wolfe_c2: f64,
}

impl Default for InnerSolveConfig {
    fn default() -> Self {
        Self {
            lambda_theta: 1e-4,
            max_iterations: 100,
            gradient_tolerance: 1e-8,
            lbfgs_memory: 10,
            wolfe_c1: 1e-4,
            wolfe_c2: 0.9,
        }
    }
}

impl InnerSolveConfig {
    pub fn validate(&self) -> crate::Result<()> {
        let ok = self.lambda_theta > 0.0
            && self.max_iterations > 0
            && self.gradient_tolerance > 0.0
            && self.lbfgs_memory > 0
            && 0.0 < self.wolfe_c1
            && self.wolfe_c1 < self.wolfe_c2
            && self.wolfe_c2 < 1.0;
        if ok {
            Ok(())
        } else {
            Err(crate::Error::Config(format!("invalid inner solver settings: {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    LineSearchFailed,
}

/// What happened inside one [`lbfgs_minimize`] call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub status: SolveStatus,
    pub iterations: usize,
    pub evaluations: usize,
    pub final_value: f64,
    pub final_gradient_norm: f64,
    pub wolfe_failures: usize,
}

impl ConvergenceRecord {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}

const MAX_BRACKET: usize = 25;
const MAX_ZOOM: usize = 40;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

struct Trial {
    alpha: f64,
    value: f64,
    slope: f64,
    x: Vec<f64>,
    grad: Vec<f64>,
}

struct LineSearch<'f, F> {
    objective: &'f mut F,
    x0: &'f [f64],
    dir: &'f [f64],
    f0: f64,
    d0: f64,
    c1: f64,
    c2: f64,
    evaluations: usize,
}

impl<F: FnMut(&[f64], &mut [f64]) -> f64> LineSearch<'_, F> {
    fn eval(&mut self, alpha: f64) -> Trial {
        let x: Vec<f64> = self.x0.iter().zip(self.dir).map(|(x, d)| x + alpha * d).collect();
        let mut grad = vec![0.0; x.len()];
        let value = (self.objective)(&x, &mut grad);
        self.evaluations += 1;
        let slope = dot(&grad, self.dir);
        Trial {
            alpha,
            value,
            slope,
            x,
            grad,
        }
    }

    // Near a minimizer the decrease c1·α·d0 drops below the rounding error of
    // f itself, so a few ulps of f0 are tolerated; the curvature test is
    // unaffected and still has to hold.
    fn armijo_fails(&self, t: &Trial) -> bool {
        let slack = 4.0 * f64::EPSILON * self.f0.abs();
        !(t.value.is_finite() && t.value <= self.f0 + self.c1 * t.alpha * self.d0 + slack)
    }

    fn curvature_holds(&self, t: &Trial) -> bool {
        t.slope.abs() <= -self.c2 * self.d0
    }

    /// Bracketing phase; returns an accepted trial or `None` on failure.
    fn search(&mut self, alpha_init: f64) -> Option<Trial> {
        let mut prev = Trial {
            alpha: 0.0,
            value: self.f0,
            slope: self.d0,
            x: self.x0.to_vec(),
            grad: Vec::new(),
        };
        let mut alpha = alpha_init;
        for i in 0..MAX_BRACKET {
            let t = self.eval(alpha);
            if self.armijo_fails(&t) || (i > 0 && t.value >= prev.value) {
                return self.zoom(prev, t);
            }
            if self.curvature_holds(&t) {
                return Some(t);
            }
            if t.slope >= 0.0 {
                return self.zoom(t, prev);
            }
            alpha = 2.0 * t.alpha;
            prev = t;
        }
        None
    }

    /// Zoom phase on the bracket `(lo, hi)`; `lo` always satisfies Armijo
    /// and has the lower value of the two.
    fn zoom(&mut self, mut lo: Trial, mut hi: Trial) -> Option<Trial> {
        for _ in 0..MAX_ZOOM {
            let (a, b) = (lo.alpha, hi.alpha);
            let width = (b - a).abs();
            if width <= f64::EPSILON * a.abs().max(b.abs()).max(1e-300) {
                return None;
            }
            let (left, right) = (a.min(b), a.max(b));
            let guess = if hi.value.is_finite() {
                cubic_minimizer(a, lo.value, lo.slope, b, hi.value, hi.slope)
            } else {
                None
            };
            let alpha = match guess {
                Some(c) if c > left + 0.1 * width && c < right - 0.1 * width => c,
                _ => 0.5 * (a + b),
            };
            let t = self.eval(alpha);
            if self.armijo_fails(&t) || t.value >= lo.value {
                hi = t;
            } else {
                if self.curvature_holds(&t) {
                    return Some(t);
                }
                if t.slope * (hi.alpha - lo.alpha) >= 0.0 {
                    hi = lo;
                }
                lo = t;
            }
        }
        None
    }
}

/// Minimizer of the cubic matching values and slopes at `a` and `b`.
fn cubic_minimizer(a: f64, fa: f64, da: f64, b: f64, fb: f64, db: f64) -> Option<f64> {
    let d1 = da + db - 3.0 * (fa - fb) / (a - b);
    let disc = d1 * d1 - da * db;
    if !(disc >= 0.0) {
        return None;
    }
    let d2 = (b - a).signum() * disc.sqrt();
    let denom = db - da + 2.0 * d2;
    if denom == 0.0 {
        return None;
    }
    let c = b - (b - a) * (db + d2 - d1) / denom;
    c.is_finite().then_some(c)
}

/// Minimizes a smooth function with L-BFGS.
///
/// `objective(x, grad)` returns `f(x)` and writes `∇f(x)` into `grad`. The
/// solve stops when `‖∇f‖₂ ≤ gradient_tolerance`, after `max_iterations`
/// accepted steps, or when the line search cannot find a strong Wolfe point
/// even along steepest descent. It always returns the best iterate.
pub fn lbfgs_minimize<F>(mut objective: F, start: &[f64], cfg: &InnerSolveConfig) -> (Vec<f64>, ConvergenceRecord)
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let mut x = start.to_vec();
    let mut g = vec![0.0; x.len()];
    let mut f = objective(&x, &mut g);
    let mut evaluations = 1;
    let mut wolfe_failures = 0;
    let mut memory: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(cfg.lbfgs_memory);
    let mut iterations = 0;

    let status = loop {
        let gnorm = norm(&g);
        if gnorm <= cfg.gradient_tolerance {
            break SolveStatus::Converged;
        }
        if iterations >= cfg.max_iterations {
            break SolveStatus::MaxIterations;
        }
        if !f.is_finite() {
            break SolveStatus::LineSearchFailed;
        }

        let mut accepted = None;
        // A failed search along the quasi-Newton direction is retried once
        // along steepest descent with the memory cleared.
        for attempt in 0..2 {
            let steepest = attempt == 1 || memory.is_empty();
            let dir = if steepest {
                g.iter().map(|v| -v).collect()
            } else {
                two_loop_direction(&g, &memory)
            };
            let mut d0 = dot(&g, &dir);
            let dir = if d0 < 0.0 {
                dir
            } else {
                d0 = -gnorm * gnorm;
                g.iter().map(|v| -v).collect()
            };
            let alpha_init = if steepest { (1.0 / gnorm).min(1.0) } else { 1.0 };
            let mut ls = LineSearch {
                objective: &mut objective,
                x0: &x,
                dir: &dir,
                f0: f,
                d0,
                c1: cfg.wolfe_c1,
                c2: cfg.wolfe_c2,
                evaluations: 0,
            };
            let trial = ls.search(alpha_init);
            evaluations += ls.evaluations;
            match trial {
                Some(t) => {
                    accepted = Some(t);
                    break;
                }
                None => {
                    wolfe_failures += 1;
                    memory.clear();
                    if steepest {
                        break;
                    }
                }
            }
        }
        let Some(t) = accepted else {
            break SolveStatus::LineSearchFailed;
        };

        let s: Vec<f64> = t.x.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = t.grad.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > f64::EPSILON * norm(&s) * norm(&y) {
            if memory.len() == cfg.lbfgs_memory {
                memory.pop_front();
            }
            memory.push_back((s, y, 1.0 / sy));
        }
        x = t.x;
        g = t.grad;
        f = t.value;
        iterations += 1;
    };

    let record = ConvergenceRecord {
        status,
        iterations,
        evaluations,
        final_value: f,
        final_gradient_norm: norm(&g),
        wolfe_failures,
    };
    (x, record)
}

fn two_loop_direction(g: &[f64], memory: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(memory.len());
    for (s, y, rho) in memory.iter().rev() {
        let a = rho * dot(s, &q);
        q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
        alphas.push(a);
    }
    let (s, y, _) = memory.back().expect("nonempty memory");
    let gamma = dot(s, y) / dot(y, y);
    q.iter_mut().for_each(|v| *v *= gamma);
    for ((s, y, rho), a) in memory.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &q);
        q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}
