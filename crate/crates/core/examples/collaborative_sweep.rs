// Two clients, a ρ sweep and the resulting report table.

use fairsyn::harness::{run_pipeline, table, BiasSpec, DataSource, ExperimentConfig, Ns2Setting};

pub fn run_example() -> fairsyn::Result<()> {
    let mut cfg = ExperimentConfig {
        data: DataSource::Synthetic { spec: BiasSpec { size: 600, ..BiasSpec::default() }, seed: 7 },
        rho: vec![0.0, 100.0, 1000.0],
        ..ExperimentConfig::default()
    };
    cfg.penalty.k_max = 100;
    cfg.dp.ns2 = vec![Ns2Setting::Fraction(0.5)];

    let report = run_pipeline(&cfg)?;
    let (header, rows) = table(&report);
    println!("{}", header.join(", "));
    for row in rows {
        println!("{}", row.join(", "));
    }
    println!("train sizes {:?}, config digest {}", report.provenance.train_sizes, report.provenance.config_digest);
    Ok(())
}

fn main() -> fairsyn::Result<()> {
    run_example()
}
