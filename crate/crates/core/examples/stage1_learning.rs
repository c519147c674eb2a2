// One client learns fairness-penalized synthetic features; a server model
// trained on them is compared with one trained on the real data.

use fairsyn::data::standardize;
use fairsyn::harness::{make_biased_dataset, BiasSpec};
use fairsyn::model::train_regularized;
use fairsyn::stage1::{learn_stage1, FairnessMode, PenaltyConfig};
use fairsyn::{fairness, AdamConfig};

pub fn run_example() -> fairsyn::Result<()> {
    let raw = make_biased_dataset(&BiasSpec { size: 300, ..BiasSpec::default() }, 2)?;
    let (real, _) = standardize(&raw);
    let adam = AdamConfig::default();

    for rho in [0.0, 1000.0] {
        let cfg = PenaltyConfig { rho_o: rho, mode: FairnessMode::Sp, k_max: 150, ..PenaltyConfig::default() };
        let (syn, trace) = learn_stage1(&real, &cfg, &adam)?;
        let (theta, _) = train_regularized(syn.data(), cfg.lambda_theta(), &cfg.inner)?;
        let report = fairness::evaluate(&real, &theta)?;
        println!(
            "ρ = {rho:>6}: {} outer steps, final P {}, accuracy {:.3}, SPD {}",
            trace.iterations.len(),
            trace.final_objective.as_ref().map_or("not evaluated".into(), |p| format!("{:.4}", p.total)),
            report.accuracy,
            report.spd
        );
    }
    Ok(())
}

fn main() -> fairsyn::Result<()> {
    run_example()
}
