//! Accuracy, decision-boundary covariances and the SPD/EOD group gaps.
//!
//! Gaps are signed (group `s=1` minus group `s=0`). A gap whose conditioning
//! group is empty is [`Disparity::Undefined`], never 0.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::data::{DataPoint, Dataset};
use crate::error::{Error, Result};
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Disparity {
    Defined(f64),
    Undefined,
}

impl Disparity {
    pub fn value(self) -> Option<f64> {
        match self {
            Disparity::Defined(v) => Some(v),
            Disparity::Undefined => None,
        }
    }

    pub fn abs(self) -> Option<f64> {
        self.value().map(f64::abs)
    }

    pub fn is_defined(self) -> bool {
        matches!(self, Disparity::Defined(_))
    }
}

impl fmt::Display for Disparity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Disparity::Defined(v) => write!(f, "{v}"),
            Disparity::Undefined => f.write_str("undefined"),
        }
    }
}

/// Occupancy of the prediction cells. Index `[s][pred]`, with `pred` 0 for
/// `-1` and 1 for `+1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GroupCounts {
    pub all: [[usize; 2]; 2],
    /// Same cells restricted to `y = +1`.
    pub positives: [[usize; 2]; 2],
}

impl GroupCounts {
    pub fn tally(points: &[DataPoint], theta: &ModelParams) -> Self {
        let mut counts = Self::default();
        for p in points {
            let pred = usize::from(theta.predict_point(p) > 0);
            let s = usize::from(p.s);
            counts.all[s][pred] += 1;
            if p.y > 0 {
                counts.positives[s][pred] += 1;
            }
        }
        counts
    }

    fn rate_gap(cells: &[[usize; 2]; 2]) -> Disparity {
        let rate = |row: &[usize; 2]| {
            let total = row[0] + row[1];
            (total > 0).then(|| row[1] as f64 / total as f64)
        };
        match (rate(&cells[1]), rate(&cells[0])) {
            (Some(r1), Some(r0)) => Disparity::Defined(r1 - r0),
            _ => Disparity::Undefined,
        }
    }

    pub fn spd(&self) -> Disparity {
        Self::rate_gap(&self.all)
    }

    pub fn eod(&self) -> Disparity {
        Self::rate_gap(&self.positives)
    }
}

fn check(ds: &Dataset, theta: &ModelParams) -> Result<()> {
    if theta.dim() != ds.dim() {
        return Err(Error::DimensionMismatch {
            expected: ds.dim(),
            found: theta.dim(),
        });
    }
    Ok(())
}

fn mean_sensitive(points: &[DataPoint]) -> f64 {
    points.iter().map(|p| f64::from(p.s)).sum::<f64>() / points.len() as f64
}

/// `(1/N) Σ (s_i - s̄) a_iᵀθ`.
pub fn covariance_sp(ds: &Dataset, theta: &ModelParams) -> Result<f64> {
    check(ds, theta)?;
    let s_bar = mean_sensitive(ds.points());
    let total: f64 = ds
        .points()
        .iter()
        .map(|p| (f64::from(p.s) - s_bar) * p.score(&theta.theta))
        .sum();
    Ok(total / ds.len() as f64)
}

/// `(1/N) Σ (s_i - s̄)((1+y_i)/2) a_iᵀθ`; `s̄` and `N` range over all points.
pub fn covariance_eo(ds: &Dataset, theta: &ModelParams) -> Result<f64> {
    check(ds, theta)?;
    let s_bar = mean_sensitive(ds.points());
    let total: f64 = ds
        .points()
        .iter()
        .map(|p| (f64::from(p.s) - s_bar) * 0.5 * (1.0 + p.label()) * p.score(&theta.theta))
        .sum();
    Ok(total / ds.len() as f64)
}

/// Positive-prediction rate of `s=1` minus that of `s=0`.
pub fn spd(ds: &Dataset, theta: &ModelParams) -> Result<Disparity> {
    check(ds, theta)?;
    Ok(GroupCounts::tally(ds.points(), theta).spd())
}

/// True-positive rate of `s=1` minus that of `s=0`.
pub fn eod(ds: &Dataset, theta: &ModelParams) -> Result<Disparity> {
    check(ds, theta)?;
    Ok(GroupCounts::tally(ds.points(), theta).eod())
}

pub fn accuracy(ds: &Dataset, theta: &ModelParams) -> Result<f64> {
    check(ds, theta)?;
    let hits = ds
        .points()
        .iter()
        .filter(|p| theta.predict_point(p) == p.y)
        .count();
    Ok(hits as f64 / ds.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessReport {
    pub accuracy: f64,
    pub covariance_sp: f64,
    pub covariance_eo: f64,
    pub spd: Disparity,
    pub eod: Disparity,
    pub group_counts: GroupCounts,
}

pub fn evaluate(ds: &Dataset, theta: &ModelParams) -> Result<FairnessReport> {
    let group_counts = GroupCounts::tally(ds.points(), theta);
    Ok(FairnessReport {
        accuracy: accuracy(ds, theta)?,
        covariance_sp: covariance_sp(ds, theta)?,
        covariance_eo: covariance_eo(ds, theta)?,
        spd: group_counts.spd(),
        eod: group_counts.eod(),
        group_counts,
    })
}
