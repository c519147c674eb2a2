// Scalars sent in one-shot synthetic-data sharing versus iterative rounds.

use fairsyn::harness::{CommunicationCost, Ns2Setting};

pub fn run_example() -> fairsyn::Result<()> {
    let train_per_client = 8319;
    let model_size = 11;
    for setting in [Ns2Setting::Fraction(1.0), Ns2Setting::Fraction(0.1)] {
        let ns2 = setting.resolve(train_per_client);
        let cost = CommunicationCost::new(&[ns2, ns2], model_size, 100);
        println!(
            "ns2 = {:>4} ({}): uplink {:>7}, downlink {}, one-shot total {:>7}, 100 iterative rounds {}",
            ns2,
            setting.label(),
            cost.uplink,
            cost.downlink,
            cost.one_shot(),
            cost.iterative
        );
    }
    Ok(())
}

fn main() -> fairsyn::Result<()> {
    run_example()
}
