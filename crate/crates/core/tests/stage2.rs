mod common;

use common::{clipped_moments, rng, syn1};
use fairsyn::rng::rng_from_seed;
use fairsyn::stage2::{
    generate_dp, ledger_verify, project_psd, DpConfig, DpGenerator, PrivacyLedger, StratifiedGaussian, EIGEN_FLOOR,
};
use fairsyn::stage1::Stage;
use fairsyn::SyntheticDataset;
use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn releases_are_clipped_sized_and_within_budget(
        seed in 0u64..5_000,
        len in 8usize..120,
        width in 1usize..5,
        ns2 in 1usize..200,
        epsilon in 0.5f64..4.0,
        bound in 0.5f64..3.0,
    ) {
        let input = syn1(seed, len, width, 5.0);
        let cfg = DpConfig { epsilon, clip_bound: bound, seed, ..DpConfig::with_size(ns2) };
        let (out, ledger) = generate_dp(&input, &cfg).unwrap();
        prop_assert_eq!(out.len(), ns2);
        for p in out.data().points() {
            prop_assert!(p.x.iter().all(|v| v.abs() <= bound));
            prop_assert!(p.s <= 1 && (p.y == 1 || p.y == -1));
        }
        prop_assert!(ledger.total_epsilon <= epsilon * (1.0 + 1e-12));
        prop_assert!(ledger.total_delta <= cfg.delta * (1.0 + 1e-12));
        prop_assert!(ledger_verify(&ledger, &cfg));
        prop_assert_eq!(out.provenance.stage, Stage::Stage2);
        prop_assert_eq!(out.provenance.client, Some(0));
    }

    #[test]
    fn zero_noise_release_equals_clipped_statistics(seed in 0u64..5_000, len in 8usize..80, width in 1usize..5) {
        let input = syn1(seed, len, width, 4.0);
        let cfg = DpConfig::with_size(10);
        let (releases, ledger) = StratifiedGaussian::without_noise()
            .release(&input, &cfg, &mut rng_from_seed(seed))
            .unwrap();
        prop_assert!(!ledger_verify(&ledger, &cfg));
        let counts = input.data().stratum_counts();
        for r in &releases {
            prop_assert_eq!(r.noisy_count, counts.get(r.stratum) as f64);
            let (mean, second) = clipped_moments(&input, r.stratum, cfg.clip_bound);
            let released_mean = r.mean.as_ref().unwrap();
            let released_second = r.second_moment.as_ref().unwrap();
            for i in 0..width {
                prop_assert!((released_mean[i] - mean[i]).abs() <= 1e-12);
                for j in 0..width {
                    prop_assert!((released_second[(i, j)] - second[i][j]).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn projection_is_symmetric_with_floored_spectrum(seed in 0u64..5_000, d in 1usize..6, scale in 1e-8f64..10.0) {
        let mut r = rng(seed);
        let raw = DMatrix::from_fn(d, d, |_, _| r.random_range(-scale..scale));
        let sym = (&raw + raw.transpose()) * 0.5;
        let p = project_psd(&sym, EIGEN_FLOOR);
        prop_assert!((&p - p.transpose()).amax() == 0.0);
        let min = SymmetricEigen::new(p).eigenvalues.min();
        prop_assert!(min >= EIGEN_FLOOR - 1e-12);
    }
}

#[test]
fn default_split_spends_the_budget_exactly() {
    let input = syn1(1, 60, 3, 2.0);
    let cfg = DpConfig::with_size(30);
    let (_, ledger) = generate_dp(&input, &cfg).unwrap();
    assert_eq!(ledger.entries.len(), 12);
    for e in &ledger.entries {
        assert!((e.epsilon - 0.25).abs() < 1e-15);
        assert!((e.delta - 1e-5 / 12.0).abs() < 1e-20);
    }
    assert!((ledger.total_epsilon - 3.0).abs() < 1e-12);
    assert!((ledger.total_delta - 1e-5).abs() < 1e-18);
}

#[test]
fn same_seed_same_bytes() {
    let input = syn1(2, 50, 2, 2.0);
    let cfg = DpConfig { seed: 9, ..DpConfig::with_size(40) };
    let (a, la) = generate_dp(&input, &cfg).unwrap();
    let (b, lb) = generate_dp(&input, &cfg).unwrap();
    assert_eq!(serde_json::to_string(&a.data()).unwrap(), serde_json::to_string(&b.data()).unwrap());
    assert_eq!(serde_json::to_string(&la).unwrap(), serde_json::to_string(&lb).unwrap());
    let (c, _) = generate_dp(&input, &DpConfig { seed: 10, ..cfg }).unwrap();
    assert_ne!(a.data(), c.data());
}

#[test]
fn tampered_ledgers_fail_and_empty_ledgers_pass() {
    let input = syn1(3, 40, 2, 2.0);
    let cfg = DpConfig::with_size(20);
    let (_, ledger) = generate_dp(&input, &cfg).unwrap();
    let mut halved = ledger.clone();
    halved.entries[2].sigma *= 0.5;
    assert!(!ledger_verify(&halved, &cfg));
    let mut inflated = ledger.clone();
    inflated.total_epsilon *= 2.0;
    assert!(!ledger_verify(&inflated, &cfg));
    assert!(ledger_verify(&PrivacyLedger::default(), &cfg));
}

/// Echoes its input; spends nothing.
struct Echo;

impl DpGenerator for Echo {
    fn name(&self) -> &str {
        "echo"
    }

    fn generate(&self, syn1: &SyntheticDataset, cfg: &DpConfig) -> fairsyn::Result<(SyntheticDataset, PrivacyLedger)> {
        let points = syn1.data().points().iter().cycle().take(cfg.ns2).cloned().collect();
        let data = syn1.data().with_points(points)?;
        Ok((SyntheticDataset::new(data, syn1.provenance.clone()), PrivacyLedger::default()))
    }
}

#[test]
fn generators_are_interchangeable() {
    let input = syn1(4, 30, 2, 1.0);
    let cfg = DpConfig::with_size(45);
    let generators: [&dyn DpGenerator; 2] = [&Echo, &StratifiedGaussian::default()];
    for g in generators {
        let (out, ledger) = g.generate(&input, &cfg).unwrap();
        assert_eq!(out.len(), 45, "{}", g.name());
        assert!(ledger_verify(&ledger, &cfg), "{}", g.name());
    }
}
