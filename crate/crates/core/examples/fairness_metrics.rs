// Group gaps and decision-boundary covariances for a hand-written model.

use fairsyn::data::{DataPoint, Dataset};
use fairsyn::{fairness, ModelParams};

pub fn run_example() -> fairsyn::Result<()> {
    // Features are (x, s); the model leans on the sensitive column.
    let rows = [
        (1.0, 1, 1),
        (0.5, 1, 1),
        (-0.5, 1, -1),
        (2.0, 0, 1),
        (0.2, 0, -1),
        (-1.0, 0, -1),
    ];
    let points = rows
        .iter()
        .map(|&(x, s, y)| DataPoint::new(vec![x], s, y))
        .collect::<fairsyn::Result<Vec<_>>>()?;
    let ds = Dataset::from_points(points)?;
    let theta = ModelParams::new(vec![1.0, 0.8]);

    let report = fairness::evaluate(&ds, &theta)?;
    println!("accuracy       {:.3}", report.accuracy);
    println!("SPD            {}", report.spd);
    println!("EOD            {}", report.eod);
    println!("cov (SP)       {:+.4}", report.covariance_sp);
    println!("cov (EO)       {:+.4}", report.covariance_eo);

    let blind = ModelParams::new(vec![1.0, 0.0]);
    println!("without s: SPD {}, EOD {}", fairness::spd(&ds, &blind)?, fairness::eod(&ds, &blind)?);
    Ok(())
}

fn main() -> fairsyn::Result<()> {
    run_example()
}
