// Loading a CSV with custom value maps, scaling, splitting and partitioning.

use fairsyn::data::{
    assign_synthetic_pairs, load_dataset, partition_clients, standardize, train_test_split, Schema,
};

const CSV: &str = "\
gpa,lsat,race,pass
3.1,150,white,yes
2.8,141,other,no
3.6,160,white,yes
3.3,152,other,yes
2.5,139,white,no
3.9,165,other,yes
3.0,148,white,no
2.9,145,other,no
";

pub fn run_example() -> fairsyn::Result<()> {
    let dir = std::env::temp_dir().join(format!("fairsyn-data-prep-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| fairsyn::Error::io(&dir, e))?;
    let path = dir.join("students.csv");
    std::fs::write(&path, CSV).map_err(|e| fairsyn::Error::io(&path, e))?;

    let schema = Schema::canonical("race", "pass")
        .with_sensitive_values(&[("other", 0), ("white", 1)])
        .with_label_values(&[("no", -1), ("yes", 1)]);
    let ds = load_dataset(&path, &schema)?;
    std::fs::remove_dir_all(&dir).ok();
    println!("{} rows, features {:?}, strata {:?}", ds.len(), ds.feature_names(), ds.stratum_counts().counts);

    let (train, test) = train_test_split(&ds, 0.75, 1)?;
    let (scaled, scaler) = standardize(&train);
    let test = scaler.apply(&test)?;
    println!("train {} / test {}; first scaled row {:?}", scaled.len(), test.len(), scaled.points()[0].x);

    for (k, client) in partition_clients(&ds, 2, 4)?.iter().enumerate() {
        println!("client {k}: {} rows", client.len());
    }

    let plan = assign_synthetic_pairs(&ds, 3)?;
    println!("3 synthetic points as {:?}", plan.counts.counts);
    if let Some(w) = plan.warning() {
        println!("warning: {w}");
    }
    Ok(())
}

fn main() -> fairsyn::Result<()> {
    run_example()
}
