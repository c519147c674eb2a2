// Differentially private re-synthesis of a stage-1 dataset.

use fairsyn::data::standardize;
use fairsyn::harness::{make_biased_dataset, BiasSpec};
use fairsyn::stage1::{Provenance, Stage};
use fairsyn::stage2::{gaussian_noise_scale, generate_dp, ledger_verify, DpConfig};
use fairsyn::SyntheticDataset;

pub fn run_example() -> fairsyn::Result<()> {
    let raw = make_biased_dataset(&BiasSpec { size: 500, ..BiasSpec::default() }, 3)?;
    let (real, _) = standardize(&raw);
    let provenance = Provenance { stage: Stage::Stage1, config_digest: "example".into(), client: Some(0) };
    let syn1 = SyntheticDataset::new(real, provenance);

    println!("σ for Δ=1, ε=1, δ=1e-5: {:.4}", gaussian_noise_scale(1.0, 1.0, 1e-5)?);

    let cfg = DpConfig::with_size(50);
    let (syn2, ledger) = generate_dp(&syn1, &cfg)?;
    println!("released {} points, strata {:?}", syn2.len(), syn2.data().stratum_counts().counts);
    for entry in &ledger.entries {
        println!("  {:<28} Δ={:.4} σ={:9.4} ε={:.4} δ={:.2e}", entry.mechanism, entry.sensitivity, entry.sigma, entry.epsilon, entry.delta);
    }
    println!("total (ε, δ) = ({}, {:e}), verified {}", ledger.total_epsilon, ledger.total_delta, ledger_verify(&ledger, &cfg));
    Ok(())
}

fn main() -> fairsyn::Result<()> {
    run_example()
}
