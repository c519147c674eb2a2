//! Test-side oracles and fixtures. Nothing here calls the library's
//! gradient code; the finite-difference helpers only evaluate objectives.
#![allow(dead_code)]

use fairsyn::data::{DataPoint, Dataset};
use fairsyn::optim::InnerSolveConfig;
use fairsyn::stage1::{penalty_objective, FairnessMode, PenaltyConfig, Provenance, Stage, SyntheticDataset};
use fairsyn::Stratum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random dataset with `len` points, `n` total features, every stratum hit
/// at least once when `len >= 4`.
pub fn random_dataset(rng: &mut ChaCha8Rng, len: usize, n: usize) -> Dataset {
    let points = (0..len)
        .map(|i| {
            let (s, y) = if i < 4 {
                ((i / 2) as u8, if i % 2 == 0 { -1 } else { 1 })
            } else {
                (rng.random_range(0..2u8), if rng.random_bool(0.5) { 1 } else { -1 })
            };
            let x = (0..n - 1)
                .map(|_| rng.random_range(-1.5..1.5) + 0.4 * f64::from(y) + 0.3 * f64::from(s))
                .collect();
            DataPoint::new(x, s, y).unwrap()
        })
        .collect();
    Dataset::from_points(points).unwrap()
}

fn features(p: &DataPoint) -> Vec<f64> {
    let mut a = p.x.clone();
    a.push(f64::from(p.s));
    a
}

fn sigmoid(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

/// Regularized logistic loss written out term by term.
pub fn reference_regularized_loss(points: &[DataPoint], theta: &[f64], lambda: f64) -> f64 {
    let n = theta.len() as f64;
    let mut total = 0.0;
    for p in points {
        let z: f64 = features(p).iter().zip(theta).map(|(a, t)| a * t).sum();
        total += (1.0 + (-f64::from(p.y) * z).exp()).ln();
    }
    total / points.len() as f64 + lambda / (2.0 * n * n) * theta.iter().map(|t| t * t).sum::<f64>()
}

/// Damped Newton on the regularized logistic loss with a backtracking
/// Armijo search and a dense Gaussian-elimination solve.
pub fn newton_oracle(points: &[DataPoint], lambda: f64, dim: usize) -> Vec<f64> {
    let ridge = lambda / (dim * dim) as f64;
    let mut theta = vec![0.0; dim];
    for _ in 0..200 {
        let mut g = vec![0.0; dim];
        let mut h = vec![vec![0.0; dim]; dim];
        for p in points {
            let a = features(p);
            let y = f64::from(p.y);
            let z: f64 = a.iter().zip(&theta).map(|(x, t)| x * t).sum();
            let c = -y * sigmoid(-y * z);
            let w = sigmoid(z) * (1.0 - sigmoid(z));
            for i in 0..dim {
                g[i] += c * a[i] / points.len() as f64;
                for j in 0..dim {
                    h[i][j] += w * a[i] * a[j] / points.len() as f64;
                }
            }
        }
        for i in 0..dim {
            g[i] += ridge * theta[i];
            h[i][i] += ridge;
        }
        if g.iter().map(|v| v * v).sum::<f64>().sqrt() < 1e-14 {
            break;
        }
        let step = solve_dense(h, g.iter().map(|v| -v).collect());
        let f0 = reference_regularized_loss(points, &theta, lambda);
        let slope: f64 = g.iter().zip(&step).map(|(a, b)| a * b).sum();
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = theta.iter().zip(&step).map(|(a, b)| a + t * b).collect();
            if reference_regularized_loss(points, &trial, lambda) <= f0 + 1e-4 * t * slope || t < 1e-12 {
                theta = trial;
                break;
            }
            t *= 0.5;
        }
    }
    theta
}

/// Gaussian elimination with partial pivoting.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Outer objective composed directly from its printed form, with explicit
/// sums `Σ (s_i - s̄) a_iᵀθ` over the real data.
pub fn reference_penalty(
    real: &Dataset,
    syn: &[DataPoint],
    theta: &[f64],
    rho: f64,
    lambda_xhat: f64,
    use_sp: bool,
    use_eo: bool,
) -> f64 {
    let big_n = real.len() as f64;
    let n = theta.len() as f64;
    let s_bar = real.points().iter().map(|p| f64::from(p.s)).sum::<f64>() / big_n;
    let mut loss = 0.0;
    let mut sum_sp = 0.0;
    let mut sum_eo = 0.0;
    for p in real.points() {
        let z: f64 = features(p).iter().zip(theta).map(|(a, t)| a * t).sum();
        loss += (1.0 + (-f64::from(p.y) * z).exp()).ln();
        sum_sp += (f64::from(p.s) - s_bar) * z;
        sum_eo += (f64::from(p.s) - s_bar) * ((1.0 + f64::from(p.y)) / 2.0) * z;
    }
    loss /= big_n;
    let ns = syn.len() as f64;
    let reg = lambda_xhat / (2.0 * (ns * n).powi(2)) * syn.iter().flat_map(|p| &p.x).map(|v| v * v).sum::<f64>();
    let mut total = loss + reg;
    if use_sp {
        total += rho / (2.0 * big_n * big_n) * sum_sp * sum_sp;
    }
    if use_eo {
        total += rho / (2.0 * big_n * big_n) * sum_eo * sum_eo;
    }
    total
}

/// Central differences of `f` over every coordinate of `x`.
pub fn central_differences(x: &[f64], h: f64, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|k| {
            probe[k] = x[k] + h;
            let up = f(&probe);
            probe[k] = x[k] - h;
            let down = f(&probe);
            probe[k] = x[k];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Partial derivatives by Ridders' extrapolation of central differences:
/// steps shrink from `h` by a factor of 2 and each coordinate keeps the
/// tableau entry with the smallest error estimate.
pub fn ridders_differences(x: &[f64], h: f64, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    const STEPS: usize = 8;
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|k| {
            let mut central = |step: f64| {
                probe[k] = x[k] + step;
                let up = f(&probe);
                probe[k] = x[k] - step;
                let down = f(&probe);
                probe[k] = x[k];
                (up - down) / (2.0 * step)
            };
            let mut table = vec![vec![0.0; STEPS]; STEPS];
            let mut step = h;
            table[0][0] = central(step);
            let (mut best, mut err) = (table[0][0], f64::INFINITY);
            for i in 1..STEPS {
                step /= 2.0;
                table[0][i] = central(step);
                let mut factor = 4.0;
                for j in 1..=i {
                    table[j][i] = (table[j - 1][i] * factor - table[j - 1][i - 1]) / (factor - 1.0);
                    factor *= 4.0;
                    let e = (table[j][i] - table[j - 1][i]).abs().max((table[j][i] - table[j - 1][i - 1]).abs());
                    if e <= err {
                        err = e;
                        best = table[j][i];
                    }
                }
            }
            best
        })
        .collect()
}

/// Worst coordinatewise relative error `|a - b| / max(|b|, floor)`.
pub fn max_relative_error(a: &[f64], b: &[f64], floor: f64) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / y.abs().max(floor))
        .fold(0.0, f64::max)
}

/// Denominator floor for comparing against central differences `fd` of an
/// objective of size `value`. Round-off in `f(x±h)` is about `ε|f|/h`, and
/// last-ulp error in an inner solution shows up scaled by the gradient, so
/// coordinates under 1e-6 of either scale are compared in absolute terms.
pub fn fd_floor(value: f64, fd: &[f64]) -> f64 {
    let scale = fd.iter().fold(value.abs().max(1.0), |m, v| m.max(v.abs()));
    1e-6 * scale
}

pub fn syn1(seed: u64, len: usize, width: usize, spread: f64) -> SyntheticDataset {
    let mut r = rng(seed);
    let points = (0..len)
        .map(|i| {
            let st = if i < 4 { Stratum::ALL[i] } else { Stratum::ALL[r.random_range(0..4)] };
            let x = (0..width).map(|_| r.random_range(-spread..spread)).collect();
            DataPoint::new(x, st.s(), st.y()).unwrap()
        })
        .collect();
    SyntheticDataset::new(
        Dataset::from_points(points).unwrap(),
        Provenance {
            stage: Stage::Stage1,
            config_digest: "fixture".into(),
            client: Some(0),
        },
    )
}

/// Clipped per-stratum mean and second moment, summed in plain loops.
pub fn clipped_moments(data: &SyntheticDataset, st: Stratum, bound: f64) -> (Vec<f64>, Vec<Vec<f64>>) {
    let rows: Vec<Vec<f64>> = data
        .data()
        .points()
        .iter()
        .filter(|p| p.stratum() == st)
        .map(|p| p.x.iter().map(|v| v.clamp(-bound, bound)).collect())
        .collect();
    let d = rows[0].len();
    let m = rows.len() as f64;
    let mut mean = vec![0.0; d];
    let mut second = vec![vec![0.0; d]; d];
    for row in &rows {
        for i in 0..d {
            mean[i] += row[i] / m;
            for j in 0..d {
                second[i][j] += row[i] * row[j] / m;
            }
        }
    }
    (mean, second)
}

pub fn wrap(points: Vec<DataPoint>) -> SyntheticDataset {
    SyntheticDataset::new(
        Dataset::from_points(points).unwrap(),
        Provenance {
            stage: Stage::Stage1,
            config_digest: String::new(),
            client: None,
        },
    )
}

// Inner tolerance for FD probes. Near-separable instances leave only the
// ridge λ_θ/n² in the Hessian, so θ* is off by about tol/(λ_θ/n²); 1e-13
// keeps that below the FD resolution.
pub fn tight(mode: FairnessMode, rho: f64, ns1: usize) -> PenaltyConfig {
    PenaltyConfig {
        rho_o: rho,
        mode,
        ns1: Some(ns1),
        inner: InnerSolveConfig {
            gradient_tolerance: 1e-13,
            max_iterations: 1000,
            ..Default::default()
        },
        ..Default::default()
    }
}

pub fn perturbed_syn(rng: &mut rand_chacha::ChaCha8Rng, real: &Dataset, ns1: usize) -> Vec<DataPoint> {
    real.points()[..ns1]
        .iter()
        .map(|p| DataPoint {
            x: p.x.iter().map(|v| v + rng.random_range(-0.5..0.5)).collect(),
            ..p.clone()
        })
        .collect()
}

/// FD gradient of `penalty_objective` over the flattened `x̂`.
pub fn fd_hypergradient(real: &Dataset, syn: &[DataPoint], cfg: &PenaltyConfig) -> Vec<f64> {
    let width = real.dim() - 1;
    let flat: Vec<f64> = syn.iter().flat_map(|p| p.x.clone()).collect();
    ridders_differences(&flat, 1e-2, |x| {
        let pts = syn
            .iter()
            .zip(x.chunks(width))
            .map(|(p, xs)| DataPoint {
                x: xs.to_vec(),
                ..p.clone()
            })
            .collect();
        penalty_objective(real, &wrap(pts), cfg).unwrap().0.total
    })
}
