// Regularized logistic regression solved with L-BFGS.

use fairsyn::harness::{make_biased_dataset, BiasSpec};
use fairsyn::model::{train_regularized, RegularizedLoss};
use fairsyn::optim::lbfgs_minimize;
use fairsyn::{data::standardize, fairness, InnerSolveConfig};

pub fn run_example() -> fairsyn::Result<()> {
    let raw = make_biased_dataset(&BiasSpec { size: 400, ..BiasSpec::default() }, 1)?;
    let (ds, _) = standardize(&raw);
    let cfg = InnerSolveConfig::default();

    let (theta, record) = train_regularized(&ds, cfg.lambda_theta, &cfg)?;
    println!("status {:?} after {} iterations, ‖∇‖ = {:.2e}", record.status, record.iterations, record.final_gradient_norm);
    println!("θ = {:?}", theta.theta.iter().map(|v| format!("{v:+.3}")).collect::<Vec<_>>());
    println!("train accuracy {:.3}", fairness::accuracy(&ds, &theta)?);

    // The same solver on any smooth objective: a shifted quadratic.
    let (x, rec) = lbfgs_minimize(
        |x: &[f64], g: &mut [f64]| {
            g[0] = 2.0 * (x[0] - 3.0);
            g[1] = 20.0 * (x[1] + 1.0);
            (x[0] - 3.0).powi(2) + 10.0 * (x[1] + 1.0).powi(2)
        },
        &[0.0, 0.0],
        &cfg,
    );
    println!("quadratic minimizer {:?} ({:?})", x, rec.status);

    let loss = RegularizedLoss::new(&ds, cfg.lambda_theta)?;
    println!("loss at θ* {:.5}, at 0 {:.5}", loss.value(&theta.theta), loss.value(&vec![0.0; ds.dim()]));
    Ok(())
}

fn main() -> fairsyn::Result<()> {
    run_example()
}
