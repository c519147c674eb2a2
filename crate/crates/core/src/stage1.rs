//! Stage 1: learn fairness-mitigated synthetic features by bilevel penalty
//! optimization.
//!
//! The outer variables are the synthetic nonsensitive features `x̂`; the
//! `(ŝ, ŷ)` pairs stay fixed. For a given `x̂` the inner model is
//! `θ*(x̂) = argmin ℓ_r(syn, θ)` and the outer objective is
//!
//! ```text
//! P(x̂) = ℓ(real, θ*) + ρ_o/2 · cov(real, θ*)² + λ_x̂ / (2 (N_s n)²) · Σ ‖x̂_i‖²
//! ```
//!
//! where `cov` is the SP covariance, the EO covariance, or both. Its gradient
//! follows from the implicit function theorem on `∇_θ ℓ_r(syn, θ*) = 0`:
//! `dθ*/dx̂ = -H⁻¹ C` with `H = ∇²_θ ℓ_r` and `C = ∂(∇_θ ℓ_r)/∂x̂`. One adjoint
//! solve `H v = ∇_θ P` then gives `∇_x̂ P = -Cᵀ v + λ_x̂/(N_s n)² · x̂`.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{assign_synthetic_pairs, DataPoint, Dataset, Stratum};
use crate::error::{Error, Result};
use crate::model::{add_logistic_gradient, mean_logistic_loss, sigmoid, ModelParams, RegularizedLoss};
use crate::optim::{adam_step, AdamConfig, AdamState, ConvergenceRecord, InnerSolveConfig, SolveStatus};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FairnessMode {
    Sp,
    Eo,
    SpPlusEo,
}

impl FairnessMode {
    fn uses_sp(self) -> bool {
        matches!(self, FairnessMode::Sp | FairnessMode::SpPlusEo)
    }

    fn uses_eo(self) -> bool {
        matches!(self, FairnessMode::Eo | FairnessMode::SpPlusEo)
    }
}

impl std::str::FromStr for FairnessMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '+'], "_").as_str() {
            "sp" => Ok(FairnessMode::Sp),
            "eo" => Ok(FairnessMode::Eo),
            "sp_eo" | "sp_plus_eo" | "sp__eo" => Ok(FairnessMode::SpPlusEo),
            other => Err(Error::Config(format!("unknown fairness mode {other:?}"))),
        }
    }
}

/// How `SpPlusEo` combines the two objectives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Combination {
    /// Loss and `x̂` regularizer once, both penalties added.
    #[default]
    Shared,
    /// Literal `P_SP + P_EO`: loss and regularizer counted twice.
    StrictSum,
}

/// Starting point for `x̂`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SyntheticInit {
    /// Real features when `ns1 == N`, stratum means with jitter 0.01 otherwise.
    #[default]
    Auto,
    /// Mean of the real points in the same `(s, y)` stratum plus seeded
    /// Gaussian jitter of the given scale.
    StratumMeans { jitter: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PenaltyConfig {
    pub rho_o: f64,
    pub lambda_xhat: f64,
    pub mode: FairnessMode,
    pub combination: Combination,
    /// Outer iterations.
    pub k_max: usize,
    /// Synthetic size; `None` means the real dataset size.
    pub ns1: Option<usize>,
    pub init: SyntheticInit,
    /// Start each inner solve from the previous inner solution.
    pub warm_start: bool,
    pub seed: u64,
    pub inner: InnerSolveConfig,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        Self {
            rho_o: 0.0,
            lambda_xhat: 1e-4,
            mode: FairnessMode::Sp,
            combination: Combination::Shared,
            k_max: 1000,
            ns1: None,
            init: SyntheticInit::Auto,
            warm_start: true,
            seed: 0,
            inner: InnerSolveConfig::default(),
        }
    }
}

impl PenaltyConfig {
    pub fn lambda_theta(&self) -> f64 {
        self.inner.lambda_theta
    }

    pub fn validate(&self, real_len: usize) -> Result<()> {
        self.inner.validate()?;
        if !(self.rho_o >= 0.0 && self.rho_o.is_finite()) {
            return Err(Error::Config(format!("rho_o must be >= 0, got {}", self.rho_o)));
        }
        if !(self.lambda_xhat > 0.0) {
            return Err(Error::Config(format!("lambda_xhat must be > 0, got {}", self.lambda_xhat)));
        }
        if self.k_max == 0 {
            return Err(Error::Config("k_max must be positive".into()));
        }
        if let Some(ns1) = self.ns1 {
            if ns1 == 0 || ns1 > real_len {
                return Err(Error::Config(format!("ns1 = {ns1} outside [1, {real_len}]")));
            }
        }
        if let SyntheticInit::StratumMeans { jitter } = self.init {
            if !(jitter >= 0.0) {
                return Err(Error::Config(format!("jitter must be >= 0, got {jitter}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Stage1,
    Stage2,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub stage: Stage,
    pub config_digest: String,
    /// Client that produced the data, when known.
    pub client: Option<usize>,
}

/// Synthetic points `(x̂, ŝ, ŷ)` plus where they came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticDataset {
    data: Dataset,
    pub provenance: Provenance,
}

impl SyntheticDataset {
    pub fn new(data: Dataset, provenance: Provenance) -> Self {
        Self { data, provenance }
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn into_data(self) -> Dataset {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn xhat(&self) -> impl Iterator<Item = &[f64]> {
        self.data.points().iter().map(|p| p.x.as_slice())
    }

    pub fn pairs(&self) -> Vec<(u8, i8)> {
        self.data.points().iter().map(|p| (p.s, p.y)).collect()
    }

    pub fn with_client(mut self, client: usize) -> Self {
        self.provenance.client = Some(client);
        self
    }
}

/// Terms of the outer objective at one `x̂`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PenaltyComponents {
    pub loss: f64,
    pub penalty_sp: f64,
    pub penalty_eo: f64,
    pub regularizer: f64,
    pub total: f64,
}

/// Real-data quantities reused across outer iterations.
///
/// Both covariances are linear in θ: `cov(θ) = dᵀθ` with
/// `d_sp = (1/N) Σ (s_i - s̄) a_i` and `d_eo` the same with weight `(1+y_i)/2`.
pub struct PenaltyProblem<'a> {
    real: &'a Dataset,
    cfg: &'a PenaltyConfig,
    dir_sp: Vec<f64>,
    dir_eo: Vec<f64>,
}

impl<'a> PenaltyProblem<'a> {
    pub fn new(real: &'a Dataset, cfg: &'a PenaltyConfig) -> Result<Self> {
        cfg.validate(real.len())?;
        let n = real.dim();
        let count = real.len() as f64;
        let s_bar = real.points().iter().map(|p| f64::from(p.s)).sum::<f64>() / count;
        let mut dir_sp = vec![0.0; n];
        let mut dir_eo = vec![0.0; n];
        for p in real.points() {
            let centered = (f64::from(p.s) - s_bar) / count;
            let weight = 0.5 * (1.0 + p.label());
            for (j, x) in p.x.iter().enumerate() {
                dir_sp[j] += centered * x;
                dir_eo[j] += centered * weight * x;
            }
            dir_sp[n - 1] += centered * f64::from(p.s);
            dir_eo[n - 1] += centered * weight * f64::from(p.s);
        }
        Ok(Self {
            real,
            cfg,
            dir_sp,
            dir_eo,
        })
    }

    fn multiplicity(&self) -> f64 {
        match (self.cfg.mode, self.cfg.combination) {
            (FairnessMode::SpPlusEo, Combination::StrictSum) => 2.0,
            _ => 1.0,
        }
    }

    fn check_syn(&self, syn: &[DataPoint]) -> Result<()> {
        if syn.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if let Some(bad) = syn.iter().find(|p| p.dim() != self.real.dim()) {
            return Err(Error::DimensionMismatch {
                expected: self.real.dim(),
                found: bad.dim(),
            });
        }
        Ok(())
    }

    /// Solves the inner problem on `syn` from `start`.
    pub fn solve_inner(&self, syn: &[DataPoint], start: &[f64]) -> Result<(ModelParams, ConvergenceRecord)> {
        self.check_syn(syn)?;
        let loss = RegularizedLoss::from_points(syn, self.cfg.lambda_theta())?;
        Ok(loss.minimize(start, &self.cfg.inner))
    }

    fn regularizer_coefficient(&self, syn: &[DataPoint]) -> f64 {
        let scale = (syn.len() * self.real.dim()) as f64;
        self.cfg.lambda_xhat / (scale * scale)
    }

    /// Outer objective at `syn` for a given inner solution `theta`.
    pub fn components(&self, syn: &[DataPoint], theta: &ModelParams) -> PenaltyComponents {
        let t = &theta.theta;
        let loss = mean_logistic_loss(self.real.points(), t);
        let half_rho = 0.5 * self.cfg.rho_o;
        let penalty_sp = if self.cfg.mode.uses_sp() {
            half_rho * dot(&self.dir_sp, t).powi(2)
        } else {
            0.0
        };
        let penalty_eo = if self.cfg.mode.uses_eo() {
            half_rho * dot(&self.dir_eo, t).powi(2)
        } else {
            0.0
        };
        let sq: f64 = syn.iter().flat_map(|p| p.x.iter()).map(|v| v * v).sum();
        let regularizer = 0.5 * self.regularizer_coefficient(syn) * sq;
        let k = self.multiplicity();
        PenaltyComponents {
            loss,
            penalty_sp,
            penalty_eo,
            regularizer,
            total: k * loss + penalty_sp + penalty_eo + k * regularizer,
        }
    }

    /// `∂P/∂θ` at fixed `x̂`.
    fn outer_theta_gradient(&self, theta: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; theta.len()];
        add_logistic_gradient(self.real.points(), theta, self.multiplicity(), &mut g);
        let rho = self.cfg.rho_o;
        if self.cfg.mode.uses_sp() {
            let c = rho * dot(&self.dir_sp, theta);
            g.iter_mut().zip(&self.dir_sp).for_each(|(gi, d)| *gi += c * d);
        }
        if self.cfg.mode.uses_eo() {
            let c = rho * dot(&self.dir_eo, theta);
            g.iter_mut().zip(&self.dir_eo).for_each(|(gi, d)| *gi += c * d);
        }
        g
    }

    /// Hypergradient over all `x̂` entries (row-major, one row per synthetic
    /// point) at the inner solution `theta` of `syn`.
    pub fn hypergradient_at(&self, syn: &[DataPoint], theta: &ModelParams) -> Result<Vec<f64>> {
        self.check_syn(syn)?;
        let t = &theta.theta;
        let n = t.len();
        let inner = RegularizedLoss::from_points(syn, self.cfg.lambda_theta())?;
        let hessian: DMatrix<f64> = inner.hessian(t);
        let chol = hessian.cholesky().ok_or(Error::HessianFactorization {
            floor: inner.ridge(),
        })?;
        let adjoint = chol.solve(&DVector::from_vec(self.outer_theta_gradient(t)));

        let inv = 1.0 / syn.len() as f64;
        let reg = self.multiplicity() * self.regularizer_coefficient(syn);
        let mut grad = Vec::with_capacity(syn.len() * (n - 1));
        for p in syn {
            let y = p.label();
            let z = p.score(t);
            // ∂(∇_θ ℓ_r)/∂a_j = (1/N_s)(c_j I + w_j a_j θᵀ)
            let c = -y * sigmoid(-y * z) * inv;
            let sg = sigmoid(z);
            let w = sg * (1.0 - sg) * inv;
            let a_dot_v = p.score(adjoint.as_slice());
            for k in 0..n - 1 {
                let cross = c * adjoint[k] + w * t[k] * a_dot_v;
                grad.push(-cross + reg * p.x[k]);
            }
        }
        Ok(grad)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves the inner problem at `syn` and evaluates the outer objective.
pub fn penalty_objective(
    real: &Dataset,
    syn: &SyntheticDataset,
    cfg: &PenaltyConfig,
) -> Result<(PenaltyComponents, ModelParams, ConvergenceRecord)> {
    let problem = PenaltyProblem::new(real, cfg)?;
    let points = syn.data().points();
    let (theta, record) = problem.solve_inner(points, &vec![0.0; real.dim()])?;
    Ok((problem.components(points, &theta), theta, record))
}

/// Solves the inner problem at `syn` and returns `∇_x̂ P` (row-major).
pub fn hypergradient(real: &Dataset, syn: &SyntheticDataset, cfg: &PenaltyConfig) -> Result<Vec<f64>> {
    let problem = PenaltyProblem::new(real, cfg)?;
    let points = syn.data().points();
    let (theta, _) = problem.solve_inner(points, &vec![0.0; real.dim()])?;
    problem.hypergradient_at(points, &theta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage1Iteration {
    pub iteration: usize,
    pub objective: f64,
    pub loss: f64,
    pub penalty_sp: f64,
    pub penalty_eo: f64,
    pub regularizer: f64,
    pub gradient_norm: f64,
    pub inner_iterations: usize,
    pub inner_gradient_norm: f64,
    pub inner_status: SolveStatus,
}

/// Per-iteration record of [`learn_stage1`].
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Stage1Trace {
    pub iterations: Vec<Stage1Iteration>,
    /// Inner solve at the returned `x̂`.
    pub final_inner: Option<ConvergenceRecord>,
    pub final_objective: Option<PenaltyComponents>,
    pub inner_failures: usize,
    pub warnings: Vec<String>,
}

impl Stage1Trace {
    pub fn write_csv(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path)?;
        for row in &self.iterations {
            w.serialize(row)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

fn initial_points(real: &Dataset, cfg: &PenaltyConfig, ns1: usize, pairs: &[(u8, i8)]) -> Vec<DataPoint> {
    let jitter = match cfg.init {
        SyntheticInit::Auto if ns1 == real.len() => {
            return real.points().to_vec();
        }
        SyntheticInit::Auto => 0.01,
        SyntheticInit::StratumMeans { jitter } => jitter,
    };
    let width = real.dim() - 1;
    let mut sums = vec![vec![0.0; width]; 4];
    let mut counts = [0usize; 4];
    for p in real.points() {
        let k = p.stratum().index();
        counts[k] += 1;
        sums[k].iter_mut().zip(&p.x).for_each(|(a, b)| *a += b);
    }
    let mut rng = rng_from_seed(cfg.seed);
    pairs
        .iter()
        .map(|&(s, y)| {
            let k = Stratum::of(s, y).index();
            let count = counts[k].max(1) as f64;
            let x = sums[k]
                .iter()
                .map(|v| {
                    let noise: f64 = StandardNormal.sample(&mut rng);
                    v / count + jitter * noise
                })
                .collect();
            DataPoint { x, s, y }
        })
        .collect()
}

/// Runs the stage-1 outer loop: `k_max` Adam steps on `x̂` driven by the
/// hypergradient.
///
/// With `rho_o == 0`, `ns1 == N` and the real-feature start, the real data
/// is already the fixed point and is returned as is with an empty trace.
pub fn learn_stage1(real: &Dataset, cfg: &PenaltyConfig, adam: &AdamConfig) -> Result<(SyntheticDataset, Stage1Trace)> {
    adam.validate()?;
    let problem = PenaltyProblem::new(real, cfg)?;
    let ns1 = cfg.ns1.unwrap_or(real.len());
    let assignment = assign_synthetic_pairs(real, ns1)?;
    let mut trace = Stage1Trace::default();
    trace.warnings.extend(assignment.warning());

    let provenance = Provenance {
        stage: Stage::Stage1,
        config_digest: crate::config_digest(cfg),
        client: None,
    };
    let from_real = ns1 == real.len() && cfg.init == SyntheticInit::Auto;
    let mut points = initial_points(real, cfg, ns1, &assignment.pairs);
    if cfg.rho_o == 0.0 && from_real {
        return Ok((SyntheticDataset::new(real.clone(), provenance), trace));
    }

    let width = real.dim() - 1;
    let mut state = AdamState::new(points.len() * width);
    let mut theta = vec![0.0; real.dim()];
    for k in 1..=cfg.k_max {
        let start = if cfg.warm_start { theta.clone() } else { vec![0.0; real.dim()] };
        let (model, record) = problem.solve_inner(&points, &start)?;
        if !record.converged() {
            trace.inner_failures += 1;
        }
        let parts = problem.components(&points, &model);
        if !parts.total.is_finite() {
            return Err(Error::NonFiniteObjective { iteration: k });
        }
        let grad = problem.hypergradient_at(&points, &model)?;
        let gradient_norm = dot(&grad, &grad).sqrt();
        if !gradient_norm.is_finite() {
            return Err(Error::NonFiniteObjective { iteration: k });
        }
        trace.iterations.push(Stage1Iteration {
            iteration: k,
            objective: parts.total,
            loss: parts.loss,
            penalty_sp: parts.penalty_sp,
            penalty_eo: parts.penalty_eo,
            regularizer: parts.regularizer,
            gradient_norm,
            inner_iterations: record.iterations,
            inner_gradient_norm: record.final_gradient_norm,
            inner_status: record.status,
        });
        let (next, delta) = adam_step(&state, &grad, adam, k);
        state = next;
        for (p, d) in points.iter_mut().zip(delta.chunks(width)) {
            p.x.iter_mut().zip(d).for_each(|(x, step)| *x += step);
        }
        theta = model.theta;
    }

    let start = if cfg.warm_start { theta } else { vec![0.0; real.dim()] };
    let (model, record) = problem.solve_inner(&points, &start)?;
    if !record.converged() {
        trace.inner_failures += 1;
    }
    trace.final_objective = Some(problem.components(&points, &model));
    trace.final_inner = Some(record);
    Ok((SyntheticDataset::new(real.with_points(points)?, provenance), trace))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: &[f64], s: u8, y: i8) -> DataPoint {
        DataPoint::new(x.to_vec(), s, y).unwrap()
    }

    fn tiny_real() -> Dataset {
        Dataset::from_points(vec![
            pt(&[0.5], 0, 1),
            pt(&[-1.0], 0, -1),
            pt(&[1.5], 1, 1),
            pt(&[0.2], 1, -1),
            pt(&[2.0], 1, 1),
        ])
        .unwrap()
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("SP".parse::<FairnessMode>().unwrap(), FairnessMode::Sp);
        assert_eq!("sp+eo".parse::<FairnessMode>().unwrap(), FairnessMode::SpPlusEo);
        assert!("dp".parse::<FairnessMode>().is_err());
    }

    #[test]
    fn baseline_returns_real_data_without_iterating() {
        let real = tiny_real();
        let cfg = PenaltyConfig::default();
        let (syn, trace) = learn_stage1(&real, &cfg, &AdamConfig::default()).unwrap();
        assert_eq!(syn.data(), &real);
        assert!(trace.iterations.is_empty());
        assert_eq!(syn.provenance.stage, Stage::Stage1);
    }

    #[test]
    fn penalty_vanishes_when_sensitive_is_constant() {
        let real = Dataset::from_points(vec![pt(&[0.5], 1, 1), pt(&[-1.0], 1, -1), pt(&[2.0], 1, 1)]).unwrap();
        let cfg = PenaltyConfig {
            rho_o: 1e4,
            mode: FairnessMode::SpPlusEo,
            ..Default::default()
        };
        let syn = SyntheticDataset::new(
            real.clone(),
            Provenance {
                stage: Stage::Stage1,
                config_digest: String::new(),
                client: None,
            },
        );
        let (parts, _, _) = penalty_objective(&real, &syn, &cfg).unwrap();
        assert_eq!(parts.penalty_sp, 0.0);
        assert_eq!(parts.penalty_eo, 0.0);
    }

    #[test]
    fn single_synthetic_point_matches_hand_computation() {
        // One synthetic point a = (x̂, s) with label y, n = 2. Everything is
        // a scalar equation except the 2x2 solve, done here by Cramer's rule.
        let real = tiny_real();
        let cfg = PenaltyConfig {
            rho_o: 10.0,
            ns1: Some(1),
            inner: InnerSolveConfig {
                gradient_tolerance: 1e-12,
                max_iterations: 500,
                ..Default::default()
            },
            ..Default::default()
        };
        let syn_pts = vec![pt(&[0.8], 1, 1)];
        let problem = PenaltyProblem::new(&real, &cfg).unwrap();
        let (theta, rec) = problem.solve_inner(&syn_pts, &[0.0, 0.0]).unwrap();
        assert!(rec.converged());
        let t = &theta.theta;
        let (xh, s, y) = (0.8, 1.0, 1.0);
        let ridge = 1e-4 / 4.0;
        let z = xh * t[0] + s * t[1];
        let sg = 1.0 / (1.0 + (-z).exp());
        let w = sg * (1.0 - sg);
        let c = -y * (1.0 / (1.0 + (y * z).exp()));
        let h = [[w * xh * xh + ridge, w * xh * s], [w * xh * s, w * s * s + ridge]];
        // ∂P/∂θ by hand: real logistic gradient plus ρ·cov·d_sp.
        let n_real = 5.0;
        let s_bar = 3.0 / 5.0;
        let mut gp = [0.0; 2];
        let mut d_sp = [0.0; 2];
        for p in real.points() {
            let a = [p.x[0], f64::from(p.s)];
            let yi = p.label();
            let zi = a[0] * t[0] + a[1] * t[1];
            let ci = -yi / (1.0 + (yi * zi).exp());
            gp[0] += ci * a[0] / n_real;
            gp[1] += ci * a[1] / n_real;
            d_sp[0] += (a[1] - s_bar) * a[0] / n_real;
            d_sp[1] += (a[1] - s_bar) * a[1] / n_real;
        }
        let cov = d_sp[0] * t[0] + d_sp[1] * t[1];
        gp[0] += 10.0 * cov * d_sp[0];
        gp[1] += 10.0 * cov * d_sp[1];
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        let v = [(gp[0] * h[1][1] - gp[1] * h[0][1]) / det, (h[0][0] * gp[1] - h[1][0] * gp[0]) / det];
        let a_dot_v = xh * v[0] + s * v[1];
        let expected = -(c * v[0] + w * t[0] * a_dot_v) + (1e-4 / 4.0) * xh;
        let got = problem.hypergradient_at(&syn_pts, &theta).unwrap();
        assert_eq!(got.len(), 1);
        assert!((got[0] - expected).abs() <= 1e-10 * expected.abs().max(1.0), "{got:?} vs {expected}");
    }

    #[test]
    fn invalid_config_rejected() {
        let real = tiny_real();
        let bad = PenaltyConfig {
            ns1: Some(6),
            ..Default::default()
        };
        assert!(learn_stage1(&real, &bad, &AdamConfig::default()).is_err());
        let neg = PenaltyConfig {
            rho_o: -1.0,
            ..Default::default()
        };
        assert!(PenaltyProblem::new(&real, &neg).is_err());
    }
}
