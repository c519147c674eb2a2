use serde::{Deserialize, Serialize};

/// Adam settings for the outer (synthetic feature) loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdamConfig {
    pub step_size: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon_hat: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            step_size: 1e-2,
            beta1: 0.9,
            beta2: 0.999,
            epsilon_hat: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> crate::Result<()> {
        let ok = self.step_size > 0.0
            && (0.0..1.0).contains(&self.beta1)
            && self.beta1 > 0.0
            && (0.0..1.0).contains(&self.beta2)
            && self.beta2 > 0.0
            && self.epsilon_hat > 0.0;
        if ok {
            Ok(())
        } else {
            Err(crate::Error::Config(format!("invalid Adam settings: {self:?}")))
        }
    }
}

/// First and second moment estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl AdamState {
    pub fn new(dim: usize) -> Self {
        Self {
            m: vec![0.0; dim],
            v: vec![0.0; dim],
        }
    }
}

/// One bias-corrected Adam update at `iteration` (1-based).
///
/// Returns the new state and the parameter delta
/// `-step_size · m̂ / (√v̂ + epsilon_hat)`.
pub fn adam_step(state: &AdamState, gradient: &[f64], cfg: &AdamConfig, iteration: usize) -> (AdamState, Vec<f64>) {
    assert!(iteration >= 1, "Adam iterations are 1-based");
    let t = iteration as i32;
    let bc1 = 1.0 - cfg.beta1.powi(t);
    let bc2 = 1.0 - cfg.beta2.powi(t);
    let mut next = AdamState {
        m: Vec::with_capacity(gradient.len()),
        v: Vec::with_capacity(gradient.len()),
    };
    let mut delta = Vec::with_capacity(gradient.len());
    for ((&g, &m), &v) in gradient.iter().zip(&state.m).zip(&state.v) {
        let m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
        let v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
        let m_hat = m / bc1;
        let v_hat = v / bc2;
        delta.push(-cfg.step_size * m_hat / (v_hat.sqrt() + cfg.epsilon_hat));
        next.m.push(m);
        next.v.push(v);
    }
    (next, delta)
}
