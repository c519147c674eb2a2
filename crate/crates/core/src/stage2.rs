//! Stage 2: (ε, δ)-differentially private re-synthesis of stage-1 data.
//!
//! Generators are pluggable through [`DpGenerator`]. The default,
//! [`StratifiedGaussian`], releases per-`(ŝ, ŷ)` stratum counts, means and
//! second moments through the classical Gaussian mechanism and samples new
//! points from the released moments.
//!
//! Privacy model: replace-one adjacency on the stage-1 dataset with stratum
//! membership fixed, so a stratum's size `m` enters the mean and moment
//! sensitivities. Mechanisms compose by basic composition.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{DataPoint, Stratum};
use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, Rng};
use crate::stage1::{Provenance, Stage, SyntheticDataset};

/// Smallest eigenvalue kept when projecting a released covariance.
pub const EIGEN_FLOOR: f64 = 1e-6;

/// Fractions of the budget spent on counts, means and second moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BudgetSplit {
    pub counts: f64,
    pub means: f64,
    pub covariances: f64,
}

impl Default for BudgetSplit {
    fn default() -> Self {
        Self {
            counts: 1.0 / 3.0,
            means: 1.0 / 3.0,
            covariances: 1.0 / 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DpConfig {
    pub epsilon: f64,
    pub delta: f64,
    /// Output size.
    pub ns2: usize,
    /// Per-feature clipping bound `B`: features are clipped to `[-B, B]`.
    pub clip_bound: f64,
    pub budget_split: BudgetSplit,
    pub seed: u64,
}

impl DpConfig {
    /// `ε = 3`, `δ = 1e-5`, `B = 3`, even split, seed 0.
    pub fn with_size(ns2: usize) -> Self {
        Self {
            epsilon: 3.0,
            delta: 1e-5,
            ns2,
            clip_bound: 3.0,
            budget_split: BudgetSplit::default(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let w = self.budget_split;
        let err = |msg: String| Err(Error::Config(msg));
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return err(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return err(format!("delta must lie in (0,1), got {}", self.delta));
        }
        if self.ns2 == 0 {
            return err("ns2 must be positive".into());
        }
        if !(self.clip_bound > 0.0 && self.clip_bound.is_finite()) {
            return err(format!("clip bound must be positive, got {}", self.clip_bound));
        }
        if !(w.counts > 0.0 && w.means > 0.0 && w.covariances > 0.0)
            || (w.counts + w.means + w.covariances - 1.0).abs() > 1e-12
        {
            return err(format!("budget split must be positive and sum to 1, got {w:?}"));
        }
        Ok(())
    }
}

/// Classical Gaussian mechanism scale `σ = Δ·√(2 ln(1.25/δ))/ε`, valid for `ε ≤ 1`.
pub fn gaussian_noise_scale(sensitivity: f64, eps_share: f64, delta_share: f64) -> Result<f64> {
    if !(sensitivity >= 0.0 && sensitivity.is_finite()) {
        return Err(Error::InvalidArgument(format!("sensitivity must be >= 0, got {sensitivity}")));
    }
    if !(delta_share > 0.0 && delta_share < 1.0) {
        return Err(Error::InvalidArgument(format!("delta share must lie in (0,1), got {delta_share}")));
    }
    if !(eps_share > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon share must be positive, got {eps_share}")));
    }
    if eps_share > 1.0 {
        return Err(Error::BudgetInfeasible {
            mechanism: "gaussian".into(),
            eps_share,
        });
    }
    Ok(sensitivity * (2.0 * (1.25 / delta_share).ln()).sqrt() / eps_share)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub mechanism: String,
    pub sensitivity: f64,
    pub sigma: f64,
    pub epsilon: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PrivacyLedger {
    pub entries: Vec<LedgerEntry>,
    pub total_epsilon: f64,
    pub total_delta: f64,
    pub adjacency: String,
    pub composition: String,
    /// Set when noise was switched off; such a ledger never verifies.
    #[serde(default)]
    pub noise_disabled: bool,
}

impl PrivacyLedger {
    fn new() -> Self {
        Self {
            adjacency: "replace-one, stratum sizes taken as fixed".into(),
            composition: "basic".into(),
            ..Default::default()
        }
    }

    fn record(&mut self, mechanism: String, sensitivity: f64, eps: f64, delta: f64) -> Result<f64> {
        let sigma = gaussian_noise_scale(sensitivity, eps, delta)?;
        self.entries.push(LedgerEntry {
            mechanism,
            sensitivity,
            sigma,
            epsilon: eps,
            delta,
        });
        self.total_epsilon += eps;
        self.total_delta += delta;
        Ok(sigma)
    }

    pub fn write_json(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Recomputes every `σ` and the composed totals and checks them against the
/// budget in `cfg`.
pub fn ledger_verify(ledger: &PrivacyLedger, cfg: &DpConfig) -> bool {
    if ledger.noise_disabled {
        return false;
    }
    let sigmas_ok = ledger.entries.iter().all(|e| {
        gaussian_noise_scale(e.sensitivity, e.epsilon, e.delta).is_ok_and(|s| close(s, e.sigma))
    });
    let eps: f64 = ledger.entries.iter().map(|e| e.epsilon).sum();
    let delta: f64 = ledger.entries.iter().map(|e| e.delta).sum();
    let slack = 1e-9;
    sigmas_ok
        && close(eps, ledger.total_epsilon)
        && (delta - ledger.total_delta).abs() <= 1e-9 * delta.max(ledger.total_delta).max(f64::MIN_POSITIVE)
        && ledger.total_epsilon <= cfg.epsilon * (1.0 + slack)
        && ledger.total_delta <= cfg.delta * (1.0 + slack)
}

/// A differentially private synthesizer.
pub trait DpGenerator {
    fn name(&self) -> &str;

    /// Returns a dataset of `cfg.ns2` points and the ledger of everything
    /// released. Ledger totals must stay within `(cfg.epsilon, cfg.delta)`.
    fn generate(&self, syn1: &SyntheticDataset, cfg: &DpConfig) -> Result<(SyntheticDataset, PrivacyLedger)>;
}

/// Noisy statistics of one stratum.
#[derive(Debug, Clone, PartialEq)]
pub struct StratumRelease {
    pub stratum: Stratum,
    pub noisy_count: f64,
    /// Absent for strata with no input points.
    pub mean: Option<DVector<f64>>,
    pub second_moment: Option<DMatrix<f64>>,
    /// `second_moment - mean·meanᵀ`, projected to eigenvalues `>= EIGEN_FLOOR`.
    pub covariance: Option<DMatrix<f64>>,
}

/// Default generator: stratified Gaussian release of clipped moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StratifiedGaussian {
    add_noise: bool,
}

impl Default for StratifiedGaussian {
    fn default() -> Self {
        Self { add_noise: true }
    }
}

/// Nearest symmetric matrix with every eigenvalue at least `floor`.
pub fn project_psd(m: &DMatrix<f64>, floor: f64) -> DMatrix<f64> {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let clamped = eig.eigenvalues.map(|v| v.max(floor));
    let v = &eig.eigenvectors;
    let out = v * DMatrix::from_diagonal(&clamped) * v.transpose();
    (&out + out.transpose()) * 0.5
}

fn clip(v: f64, bound: f64) -> f64 {
    v.clamp(-bound, bound)
}

/// Largest-remainder apportionment over real weights, ties to the lower index.
fn apportion(weights: &[f64; 4], target: usize) -> [usize; 4] {
    let total: f64 = weights.iter().sum();
    let mut out = [0usize; 4];
    let mut rems = [0.0f64; 4];
    for i in 0..4 {
        let quota = weights[i] / total * target as f64;
        out[i] = quota.floor() as usize;
        rems[i] = quota - quota.floor();
    }
    let assigned: usize = out.iter().sum();
    let mut order: Vec<usize> = (0..4).filter(|&i| weights[i] > 0.0).collect();
    order.sort_by(|&a, &b| rems[b].total_cmp(&rems[a]));
    let mut missing = target.saturating_sub(assigned);
    for &i in order.iter().cycle() {
        if missing == 0 {
            break;
        }
        out[i] += 1;
        missing -= 1;
    }
    out
}

impl StratifiedGaussian {
    /// A generator that releases exact clipped statistics. For checking the
    /// mechanism arithmetic only; its ledger is marked and never verifies.
    pub fn without_noise() -> Self {
        Self { add_noise: false }
    }

    fn noise(&self, rng: &mut Rng, sigma: f64) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        if self.add_noise {
            sigma * z
        } else {
            0.0
        }
    }

    /// Clips the input and releases per-stratum statistics. Checks the
    /// budget before touching the data.
    pub fn release(&self, syn1: &SyntheticDataset, cfg: &DpConfig, rng: &mut Rng) -> Result<(Vec<StratumRelease>, PrivacyLedger)> {
        cfg.validate()?;
        if syn1.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let strata = Stratum::ALL.len() as f64;
        let shares = [
            ("count", cfg.budget_split.counts),
            ("mean", cfg.budget_split.means),
            ("second_moment", cfg.budget_split.covariances),
        ]
        .map(|(name, w)| (name, cfg.epsilon * w / strata, cfg.delta * w / strata));
        if let Some((name, eps, _)) = shares.iter().find(|(_, eps, _)| *eps > 1.0) {
            return Err(Error::BudgetInfeasible {
                mechanism: (*name).to_string(),
                eps_share: *eps,
            });
        }

        let bound = cfg.clip_bound;
        let dim = syn1.data().dim() - 1;
        let mut groups: [Vec<Vec<f64>>; 4] = Default::default();
        for p in syn1.data().points() {
            groups[p.stratum().index()].push(p.x.iter().map(|&v| clip(v, bound)).collect());
        }

        let mut ledger = PrivacyLedger::new();
        ledger.noise_disabled = !self.add_noise;
        let mut releases = Vec::with_capacity(4);
        for stratum in Stratum::ALL {
            let rows = &groups[stratum.index()];
            let m = rows.len();
            let (_, eps, delta) = shares[0];
            let sigma = ledger.record(format!("count[{stratum}]"), 1.0, eps, delta)?;
            let noisy_count = m as f64 + self.noise(rng, sigma);
            let mut release = StratumRelease {
                stratum,
                noisy_count,
                mean: None,
                second_moment: None,
                covariance: None,
            };
            if m > 0 && dim > 0 {
                let mf = m as f64;
                let d = dim as f64;

                let (_, eps, delta) = shares[1];
                let sens = 2.0 * bound * d.sqrt() / mf;
                let sigma = ledger.record(format!("mean[{stratum}]"), sens, eps, delta)?;
                let mut mean = DVector::<f64>::zeros(dim);
                for row in rows {
                    for (j, v) in row.iter().enumerate() {
                        mean[j] += v;
                    }
                }
                mean /= mf;
                for j in 0..dim {
                    mean[j] += self.noise(rng, sigma);
                }

                let (_, eps, delta) = shares[2];
                let sens = 2.0 * bound * bound * d / mf;
                let sigma = ledger.record(format!("second_moment[{stratum}]"), sens, eps, delta)?;
                let mut moment = DMatrix::<f64>::zeros(dim, dim);
                for row in rows {
                    for i in 0..dim {
                        for j in i..dim {
                            moment[(i, j)] += row[i] * row[j];
                        }
                    }
                }
                for i in 0..dim {
                    for j in i..dim {
                        let v = moment[(i, j)] / mf + self.noise(rng, sigma);
                        moment[(i, j)] = v;
                        moment[(j, i)] = v;
                    }
                }
                let cov = &moment - &mean * mean.transpose();
                release.covariance = Some(project_psd(&cov, EIGEN_FLOOR));
                release.mean = Some(mean);
                release.second_moment = Some(moment);
            }
            releases.push(release);
        }
        Ok((releases, ledger))
    }
}

impl DpGenerator for StratifiedGaussian {
    fn name(&self) -> &str {
        "stratified-gaussian"
    }

    fn generate(&self, syn1: &SyntheticDataset, cfg: &DpConfig) -> Result<(SyntheticDataset, PrivacyLedger)> {
        let mut rng = rng_from_seed(cfg.seed);
        let (releases, ledger) = self.release(syn1, cfg, &mut rng)?;

        let usable = |r: &StratumRelease| r.mean.is_some() || syn1.data().dim() == 1;
        let mut weights = [0.0f64; 4];
        for r in &releases {
            if usable(r) {
                weights[r.stratum.index()] = r.noisy_count.max(0.0);
            }
        }
        if weights.iter().all(|&w| w == 0.0) {
            for r in &releases {
                if usable(r) {
                    weights[r.stratum.index()] = 1.0;
                }
            }
        }
        let counts = apportion(&weights, cfg.ns2);

        let bound = cfg.clip_bound;
        let dim = syn1.data().dim() - 1;
        let mut points = Vec::with_capacity(cfg.ns2);
        for r in &releases {
            let count = counts[r.stratum.index()];
            if count == 0 {
                continue;
            }
            let (mean, factor) = match (&r.mean, &r.covariance) {
                (Some(mean), Some(cov)) => {
                    let chol = cov.clone().cholesky().ok_or(Error::HessianFactorization { floor: EIGEN_FLOOR })?;
                    (mean.clone(), chol.l())
                }
                _ => (DVector::zeros(dim), DMatrix::zeros(dim, dim)),
            };
            for _ in 0..count {
                let z = DVector::from_fn(dim, |_, _| StandardNormal.sample(&mut rng));
                let x = &mean + &factor * z;
                points.push(DataPoint {
                    x: x.iter().map(|&v| clip(v, bound)).collect(),
                    s: r.stratum.s(),
                    y: r.stratum.y(),
                });
            }
        }
        let data = syn1.data().with_points(points)?;
        let provenance = Provenance {
            stage: Stage::Stage2,
            config_digest: crate::config_digest(&(self.name(), cfg)),
            client: syn1.provenance.client,
        };
        debug_assert!(ledger.total_epsilon <= cfg.epsilon * (1.0 + 1e-12));
        Ok((SyntheticDataset::new(data, provenance), ledger))
    }
}

/// Runs the default [`StratifiedGaussian`] generator.
pub fn generate_dp(syn1: &SyntheticDataset, cfg: &DpConfig) -> Result<(SyntheticDataset, PrivacyLedger)> {
    StratifiedGaussian::default().generate(syn1, cfg)
}
