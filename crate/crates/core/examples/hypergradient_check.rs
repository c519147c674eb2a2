// Implicit-differentiation hypergradient against central differences.

use fairsyn::data::{standardize, DataPoint};
use fairsyn::harness::{make_biased_dataset, BiasSpec};
use fairsyn::stage1::{hypergradient, penalty_objective, FairnessMode, PenaltyConfig, Provenance, Stage};
use fairsyn::{InnerSolveConfig, SyntheticDataset};

pub fn run_example() -> fairsyn::Result<()> {
    let raw = make_biased_dataset(&BiasSpec { size: 60, features: 4, min_abs_spd: 0.0, ..BiasSpec::default() }, 5)?;
    let (real, _) = standardize(&raw);
    let syn_points: Vec<DataPoint> = real.points()[..12]
        .iter()
        .enumerate()
        .map(|(i, p)| DataPoint {
            x: p.x.iter().map(|v| v + 0.1 * ((i % 3) as f64 - 1.0)).collect(),
            ..p.clone()
        })
        .collect();
    let wrap = |points: Vec<DataPoint>| -> fairsyn::Result<SyntheticDataset> {
        let provenance = Provenance { stage: Stage::Stage1, config_digest: "example".into(), client: None };
        Ok(SyntheticDataset::new(real.with_points(points)?, provenance))
    };
    let cfg = PenaltyConfig {
        rho_o: 100.0,
        mode: FairnessMode::SpPlusEo,
        ns1: Some(12),
        inner: InnerSolveConfig { gradient_tolerance: 1e-13, ..InnerSolveConfig::default() },
        ..PenaltyConfig::default()
    };

    let syn = wrap(syn_points.clone())?;
    let analytic = hypergradient(&real, &syn, &cfg)?;
    let (parts, _, _) = penalty_objective(&real, &syn, &cfg)?;
    println!("P = {:.6} (loss {:.4}, SP {:.4}, EO {:.4})", parts.total, parts.loss, parts.penalty_sp, parts.penalty_eo);

    let width = real.dim() - 1;
    let h = 1e-5;
    println!("coord   analytic        central diff");
    for k in 0..6 {
        let (i, j) = (k / width, k % width);
        let probe = |step: f64| -> fairsyn::Result<f64> {
            let mut pts = syn_points.clone();
            pts[i].x[j] += step;
            Ok(penalty_objective(&real, &wrap(pts)?, &cfg)?.0.total)
        };
        let fd = (probe(h)? - probe(-h)?) / (2.0 * h);
        println!("x̂[{i}][{j}]  {:+.8e}  {:+.8e}", analytic[k], fd);
    }
    Ok(())
}

fn main() -> fairsyn::Result<()> {
    run_example()
}
