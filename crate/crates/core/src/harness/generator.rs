//! Seeded stand-in for a real tabular dataset with a built-in group gap.

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{standardize, DataPoint, Dataset};
use crate::error::{Error, Result};
use crate::fairness;
use crate::model::train_regularized;
use crate::optim::InnerSolveConfig;
use crate::rng::rng_from_seed;

/// Parameters of [`make_biased_dataset`].
///
/// Features are Gaussian. Group `s=1` has unit variance and its mean moved
/// by `group_shift` along the first half of the features; group `s=0` has
/// standard deviation `group0_spread`. Labels come from a fixed linear rule,
/// scaled by `group0_signal` inside group `s=0` and lowered by
/// `label_offset`, plus logistic noise. Each label is then overwritten in
/// favour of `s=1` (`+1` for `s=1`, `-1` for `s=0`) with probability
/// `label_bias`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BiasSpec {
    pub size: usize,
    /// Total feature count `n`, the sensitive attribute included.
    pub features: usize,
    /// Probability that a point belongs to group `s=1`.
    pub group_fraction: f64,
    pub group_shift: f64,
    pub label_bias: f64,
    /// Weight of the labelling rule; larger is less noisy.
    pub signal: f64,
    /// Multiplier on `signal` for group `s=0`.
    pub group0_signal: f64,
    /// Subtracted from the rule before thresholding; lowers the base rate.
    pub label_offset: f64,
    /// Feature standard deviation for group `s=0`.
    pub group0_spread: f64,
    /// Reject the draw if a plain logistic fit shows `|SPD|` below this;
    /// `0` disables the check.
    pub min_abs_spd: f64,
}

impl Default for BiasSpec {
    fn default() -> Self {
        Self {
            size: 2000,
            features: 6,
            group_fraction: 0.5,
            group_shift: 0.0,
            label_bias: 0.4,
            signal: 2.0,
            group0_signal: 0.25,
            label_offset: -1.0,
            group0_spread: 2.0,
            min_abs_spd: 0.3,
        }
    }
}

impl BiasSpec {
    /// Both groups drawn alike with no label bias; the floor is dropped.
    pub fn parity() -> Self {
        Self {
            group_shift: 0.0,
            label_bias: 0.0,
            group0_signal: 1.0,
            label_offset: 0.0,
            group0_spread: 1.0,
            min_abs_spd: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let err = |msg: String| Err(Error::Config(msg));
        if self.size < 4 {
            return err(format!("generator size must be at least 4, got {}", self.size));
        }
        if self.features < 2 {
            return err(format!("generator needs at least 2 features (one sensitive), got {}", self.features));
        }
        if !(self.group_fraction > 0.0 && self.group_fraction < 1.0) {
            return err(format!("group fraction must lie in (0,1), got {}", self.group_fraction));
        }
        if !(0.0..=1.0).contains(&self.label_bias) {
            return err(format!("label bias must lie in [0,1], got {}", self.label_bias));
        }
        if ![self.group_shift, self.signal, self.group0_signal, self.label_offset].iter().all(|v| v.is_finite()) {
            return err("generator parameters must be finite".into());
        }
        if !(0.0..=1.0).contains(&self.min_abs_spd) {
            return err(format!("SPD floor must lie in [0,1], got {}", self.min_abs_spd));
        }
        if !(self.group0_spread > 0.0 && self.group0_spread.is_finite()) {
            return err(format!("group-0 spread must be positive, got {}", self.group0_spread));
        }
        if self.min_abs_spd > 0.0 && self.group_shift == 0.0 && self.label_bias == 0.0 {
            return err("zero group shift with zero label bias cannot reach an SPD floor".into());
        }
        Ok(())
    }

    fn rule(&self) -> Vec<f64> {
        // Alternating signs with slowly decaying magnitude, so every feature
        // carries some signal and the shifted block is not all one sign.
        (0..self.features - 1)
            .map(|j| {
                let sign = if j % 3 == 1 { -1.0 } else { 1.0 };
                sign * self.signal / (1.0 + 0.25 * j as f64)
            })
            .collect()
    }
}

/// Draws a dataset from `spec`; identical `(spec, seed)` give identical data.
pub fn make_biased_dataset(spec: &BiasSpec, seed: u64) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = rng_from_seed(seed);
    let width = spec.features - 1;
    let shifted = width.div_ceil(2);
    let rule = spec.rule();
    // Population mean of the shifted block; the rule is centred on it so the
    // shift alone does not move the base rate.
    let centre = spec.group_shift * spec.group_fraction;
    let points = (0..spec.size)
        .map(|_| {
            let s = u8::from(rng.random_bool(spec.group_fraction));
            let x: Vec<f64> = (0..width)
                .map(|j| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    if s == 0 {
                        return spec.group0_spread * z;
                    }
                    if j < shifted { z + spec.group_shift } else { z }
                })
                .collect();
            let score: f64 = x
                .iter()
                .enumerate()
                .zip(&rule)
                .map(|((j, v), w)| if j < shifted { (v - centre) * w } else { v * w })
                .sum();
            let gain = if s == 1 { 1.0 } else { spec.group0_signal };
            let score = gain * score - spec.label_offset;
            let u: f64 = rng.random_range(f64::EPSILON..1.0);
            let noise = (u / (1.0 - u)).ln();
            let mut y = if score + noise >= 0.0 { 1 } else { -1 };
            if rng.random_bool(spec.label_bias) {
                y = if s == 1 { 1 } else { -1 };
            }
            DataPoint::new(x, s, y)
        })
        .collect::<Result<Vec<_>>>()?;
    let ds = Dataset::from_points(points)?;

    let floor = spec.min_abs_spd;
    if floor > 0.0 {
        let gap = baseline_abs_spd(&ds)?;
        if gap < floor {
            return Err(Error::Config(format!(
                "generated data shows baseline |SPD| {gap:.4}, below the floor {floor}"
            )));
        }
    }
    Ok(ds)
}

/// `|SPD|` of a plain regularized logistic fit on standardized `ds`,
/// measured in-sample. Undefined gaps count as 0.
pub fn baseline_abs_spd(ds: &Dataset) -> Result<f64> {
    let (scaled, _) = standardize(ds);
    let cfg = InnerSolveConfig::default();
    let (theta, _) = train_regularized(&scaled, cfg.lambda_theta, &cfg)?;
    Ok(fairness::spd(&scaled, &theta)?.abs().unwrap_or(0.0))
}
