use fairsyn::harness::{
    baseline_abs_spd, emit_report, load_report, make_biased_dataset, run_pipeline, table, BiasSpec,
    CommunicationCost, DataSource, ExperimentConfig, Ns2Setting, RunReport, StageKind, MANIFEST_FILE, TABLE_FILE,
};
use fairsyn::{Error, FairnessMode};

fn small_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.data = DataSource::Synthetic {
        spec: BiasSpec {
            size: 160,
            min_abs_spd: 0.0,
            ..BiasSpec::default()
        },
        seed: 3,
    };
    cfg.penalty.k_max = 4;
    cfg
}

#[test]
fn generator_is_deterministic() {
    let spec = BiasSpec::default();
    let a = make_biased_dataset(&spec, 7).unwrap();
    let b = make_biased_dataset(&spec, 7).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, make_biased_dataset(&spec, 8).unwrap());
    assert_eq!((a.len(), a.dim()), (2000, 6));
}

#[test]
fn default_generator_clears_the_gap_floor() {
    let ds = make_biased_dataset(&BiasSpec::default(), 7).unwrap();
    let gap = baseline_abs_spd(&ds).unwrap();
    assert!(gap >= 0.3, "baseline |SPD| {gap}");
}

#[test]
fn parity_generator_shows_no_gap() {
    let ds = make_biased_dataset(&BiasSpec::parity(), 7).unwrap();
    let gap = baseline_abs_spd(&ds).unwrap();
    assert!(gap <= 0.05, "baseline |SPD| {gap}");
}

#[test]
fn unreachable_floor_is_rejected() {
    let degenerate = BiasSpec {
        min_abs_spd: 0.3,
        ..BiasSpec::parity()
    };
    assert!(matches!(make_biased_dataset(&degenerate, 7), Err(Error::Config(_))));
    let weak = BiasSpec {
        label_bias: 0.01,
        min_abs_spd: 0.9,
        ..BiasSpec::default()
    };
    assert!(matches!(make_biased_dataset(&weak, 7), Err(Error::Config(_))));
}

#[test]
fn communication_counts_follow_the_formulas() {
    let cost = CommunicationCost::new(&[832, 832], 11, 100);
    assert_eq!(cost.uplink, 2 * 832 * 12);
    assert_eq!(cost.uplink, 19_968);
    assert_eq!(cost.downlink, 22);
    assert_eq!(cost.iterative, 2 * 100 * 11);
    assert_eq!(cost.iterative, 2_200);
    assert_eq!(cost.one_shot(), 19_990);
    let uneven = CommunicationCost::new(&[3, 5], 4, 7);
    assert_eq!(uneven.uplink, 8 * 5);
}

#[test]
fn ns2_settings_resolve_by_floor() {
    assert_eq!(Ns2Setting::Fraction(0.1).resolve(8319), 831);
    assert_eq!(Ns2Setting::Fraction(1.0).resolve(8319), 8319);
    assert_eq!(Ns2Setting::Fraction(0.01).resolve(50), 1);
    assert_eq!(Ns2Setting::Absolute(832).resolve(10), 832);
    assert_eq!(Ns2Setting::Fraction(0.1).label(), "10%");
    assert_eq!(Ns2Setting::Fraction(0.1).key(), "10pct");
    assert_eq!(Ns2Setting::Absolute(832).key(), "n832");
}

#[test]
fn config_roundtrips_through_toml() {
    let mut cfg = small_config();
    cfg.rho = vec![0.0, 100.0];
    cfg.penalty.mode = FairnessMode::Eo;
    cfg.dp.ns2 = vec![Ns2Setting::Fraction(0.1), Ns2Setting::Absolute(50)];
    let text = cfg.to_toml_string().unwrap();
    assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), cfg);

    let file = "clients = 3\nrho = [0, 10]\n[penalty]\nmode = \"sp_plus_eo\"\nk_max = 7\n[data]\nkind = \"file\"\npath = \"law.csv\"\nsensitive = \"race\"\nlabel = \"pass\"\n";
    let parsed = ExperimentConfig::from_toml_str(file).unwrap();
    assert_eq!(parsed.clients, 3);
    assert_eq!(parsed.penalty.k_max, 7);
    assert_eq!(parsed.penalty.mode, FairnessMode::SpPlusEo);
    assert!(matches!(parsed.data, DataSource::File { .. }));
    assert!(ExperimentConfig::from_toml_str("clients = 2\nbogus = 1\n").is_err());
}

#[test]
fn invalid_configs_are_rejected() {
    let bad = [
        ExperimentConfig { clients: 0, ..small_config() },
        ExperimentConfig { rho: vec![], ..small_config() },
        ExperimentConfig { rho: vec![-1.0], ..small_config() },
        ExperimentConfig { train_fraction: 1.0, ..small_config() },
    ];
    for cfg in bad {
        assert!(cfg.validate().is_err(), "{cfg:?}");
        assert!(run_pipeline(&cfg).is_err());
    }
}

fn assert_shape(report: &RunReport) {
    let per_rho = 1 + report.ns2.len();
    assert_eq!(report.rows.len(), 1 + report.rho.len() * per_rho);
    assert_eq!(report.rows[0].stage, StageKind::Baseline);
    for (r, chunk) in report.rows[1..].chunks(per_rho).enumerate() {
        assert_eq!(chunk[0].stage, StageKind::Syn1);
        assert!(chunk.iter().all(|row| row.rho == report.rho[r]));
        assert!(chunk[1..].iter().all(|row| row.stage == StageKind::Syn2));
    }
}

#[test]
fn sweep_report_has_one_row_per_cell() {
    let cfg = small_config();
    let report = run_pipeline(&cfg).unwrap();
    assert_shape(&report);
    assert_eq!(report.provenance.train_sizes.len(), 2);
    assert_eq!(
        report.provenance.train_sizes.iter().sum::<usize>() + report.provenance.test_sizes.iter().sum::<usize>(),
        160
    );
    for row in &report.rows {
        assert!(row.error.is_none(), "{row:?}");
        let m = row.metrics.as_ref().unwrap();
        assert!((0.0..=100.0).contains(&m.accuracy_pct));
        assert_eq!(row.communication.downlink, 2 * report.provenance.model_size as u64);
        if let Some(audit) = &row.stage2 {
            assert!(audit.verified);
        }
    }
    let syn2 = report.row(10.0, StageKind::Syn2, Some(Ns2Setting::Fraction(0.1))).unwrap();
    let expected: Vec<usize> = report.provenance.train_sizes.iter().map(|&n| n / 10).collect();
    assert_eq!(syn2.communication.records, expected);

    let (header, rows) = table(&report);
    assert_eq!(rows.len(), 5);
    assert_eq!(header.len(), 1 + 3 * 2);
    assert!(header.contains(&"syn2_10pct_abs_spd".to_string()));
}

#[test]
fn emitted_files_are_reproducible() {
    let cfg = ExperimentConfig {
        rho: vec![0.0, 100.0],
        ..small_config()
    };
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut written = Vec::new();
    for dir in &dirs {
        let report = run_pipeline(&cfg).unwrap();
        written.push(emit_report(&report, dir.path()).unwrap());
    }
    assert_eq!(written[0].len(), written[1].len());
    for (a, b) in written[0].iter().zip(&written[1]) {
        assert_eq!(a.file_name(), b.file_name());
        assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap(), "{a:?}");
    }
    let names: Vec<String> = written[0].iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
    assert!(names.contains(&TABLE_FILE.to_string()));
    assert!(names.contains(&"trend_baseline.csv".to_string()));
    assert!(names.contains(&"trend_syn2_100pct.csv".to_string()));

    let back = load_report(dirs[0].path().join(MANIFEST_FILE)).unwrap();
    assert_eq!(back, run_pipeline(&cfg).unwrap());
}

#[test]
fn empty_report_is_an_error() {
    let mut report = run_pipeline(&ExperimentConfig {
        rho: vec![0.0],
        ..small_config()
    })
    .unwrap();
    report.rows.clear();
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(emit_report(&report, dir.path()), Err(Error::EmptyReport)));
}

#[test]
fn eo_mode_reports_eod_columns() {
    let cfg = ExperimentConfig {
        rho: vec![0.0, 10.0],
        penalty: fairsyn::PenaltyConfig {
            mode: FairnessMode::Eo,
            ..small_config().penalty
        },
        ..small_config()
    };
    let report = run_pipeline(&cfg).unwrap();
    let (header, _) = table(&report);
    assert!(header.iter().any(|h| h.ends_with("abs_eod")));
    assert!(!header.iter().any(|h| h.ends_with("abs_spd")));
}
