use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use fairsyn::data::{load_dataset, standardize, write_dataset, Schema, Standardizer};
use fairsyn::harness::{
    emit_report, load_report, make_biased_dataset, run_pipeline, BiasSpec, ExperimentConfig, Ns2Setting, MANIFEST_FILE,
};
use fairsyn::model::train_regularized;
use fairsyn::stage1::{learn_stage1, Provenance, Stage, SyntheticDataset};
use fairsyn::stage2::{generate_dp, ledger_verify};
use fairsyn::{config_digest, fairness, Error, FairnessMode, Result};

#[derive(Parser)]
#[command(name = "fairsyn", version, about = "Fair, differentially private synthetic data for one-shot collaborative learning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full pipeline and ρ sweep from a config file.
    Run(RunArgs),
    /// Learn a fairness-mitigated synthetic dataset from one CSV.
    Stage1(Stage1Args),
    /// Differentially private re-synthesis of a stage-1 CSV.
    Stage2(Stage2Args),
    /// Train on one CSV, report accuracy and fairness on another.
    Evaluate(EvaluateArgs),
    /// Write a seeded biased dataset.
    GenData(GenDataArgs),
    /// Rewrite report tables from a run manifest.
    Report(ReportArgs),
}

#[derive(Args)]
struct Columns {
    /// Sensitive-attribute column (values 0/1).
    #[arg(long, default_value = "s")]
    sensitive: String,
    /// Label column (values -1/1).
    #[arg(long, default_value = "y")]
    label: String,
}

impl Columns {
    fn schema(&self) -> Schema {
        Schema::canonical(&self.sensitive, &self.label)
    }
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment config; defaults apply when omitted.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long, short)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    clients: Option<usize>,
    /// Comma-separated penalty weights.
    #[arg(long, value_delimiter = ',')]
    rho: Option<Vec<f64>>,
    #[arg(long)]
    mode: Option<FairnessMode>,
    #[arg(long)]
    k_max: Option<usize>,
    /// Comma-separated stage-2 size fractions of each client's training size.
    #[arg(long, value_delimiter = ',')]
    ns2_fraction: Option<Vec<f64>>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Read records from this CSV instead of the configured source.
    #[arg(long)]
    data: Option<PathBuf>,
    #[command(flatten)]
    columns: Columns,
}

#[derive(Args)]
struct Stage1Args {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, short)]
    out_dir: PathBuf,
    /// Config whose `penalty` and `adam` tables are used.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    mode: Option<FairnessMode>,
    #[arg(long)]
    ns1: Option<usize>,
    #[arg(long)]
    k_max: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Standardize features first and save the fitted map as `scaler.json`.
    #[arg(long)]
    standardize: bool,
    #[command(flatten)]
    columns: Columns,
}

#[derive(Args)]
struct Stage2Args {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, short)]
    out_dir: PathBuf,
    /// Config whose `dp` table is used.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Output size; defaults to the input size.
    #[arg(long, conflicts_with = "ns2_fraction")]
    ns2: Option<usize>,
    /// Output size as `floor(f · N)`.
    #[arg(long)]
    ns2_fraction: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    clip_bound: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    columns: Columns,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Training CSV for the regularized logistic model.
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
    /// Standardizer saved by `stage1 --standardize`, applied to the test set.
    #[arg(long)]
    scaler: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-4)]
    lambda_theta: f64,
    #[command(flatten)]
    columns: Columns,
}

#[derive(Args)]
struct GenDataArgs {
    #[arg(long, short)]
    output: PathBuf,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long)]
    size: Option<usize>,
    #[arg(long)]
    features: Option<usize>,
    #[arg(long)]
    group_shift: Option<f64>,
    #[arg(long)]
    label_bias: Option<f64>,
    /// Skip the baseline |SPD| floor check.
    #[arg(long)]
    no_floor: bool,
}

#[derive(Args)]
struct ReportArgs {
    /// Run directory or its manifest.
    #[arg(long, short)]
    manifest: PathBuf,
    #[arg(long, short)]
    out_dir: PathBuf,
}

#[derive(Serialize)]
struct StepManifest<'a, C: Serialize> {
    command: &'a str,
    input: &'a Path,
    input_digest: String,
    config: &'a C,
    config_digest: String,
    files: Vec<String>,
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    std::fs::write(path, text).map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", path.display())))
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::InvalidArgument(format!("cannot create {}: {e}", dir.display())))
}

fn load_config(path: Option<&Path>) -> Result<ExperimentConfig> {
    path.map_or_else(|| Ok(ExperimentConfig::default()), ExperimentConfig::load)
}

fn run(args: RunArgs) -> Result<()> {
    let mut cfg = load_config(args.config.as_deref())?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(k) = args.clients {
        cfg.clients = k;
    }
    if let Some(rho) = args.rho {
        cfg.rho = rho;
    }
    if let Some(mode) = args.mode {
        cfg.penalty.mode = mode;
    }
    if let Some(k_max) = args.k_max {
        cfg.penalty.k_max = k_max;
    }
    if let Some(fractions) = args.ns2_fraction {
        cfg.dp.ns2 = fractions.into_iter().map(Ns2Setting::Fraction).collect();
    }
    if let Some(eps) = args.epsilon {
        cfg.dp.epsilon = eps;
    }
    if let Some(path) = args.data {
        cfg.data = fairsyn::harness::DataSource::File {
            path,
            schema: args.columns.schema(),
        };
    }
    if let Some(dir) = args.out_dir {
        cfg.output_dir = Some(dir);
    }
    let dir = cfg
        .output_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("runs").join(config_digest(&cfg)));

    let report = run_pipeline(&cfg)?;
    let files = emit_report(&report, &dir)?;
    std::fs::write(dir.join("config.toml"), cfg.to_toml_string()?)
        .map_err(|e| Error::InvalidArgument(format!("cannot write config: {e}")))?;

    for row in &report.rows {
        let cell = row.ns2.map(|s| format!(" ns2={}", s.label())).unwrap_or_default();
        match (&row.metrics, &row.error) {
            (Some(m), _) => println!(
                "rho={:<8} {:<8}{cell:<10} acc={:6.2}% spd={} eod={}",
                row.rho, row.stage, m.accuracy_pct, m.spd, m.eod
            ),
            (None, err) => println!("rho={:<8} {:<8}{cell:<10} failed: {}", row.rho, row.stage, err.as_deref().unwrap_or("?")),
        }
    }
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn stage1(args: Stage1Args) -> Result<()> {
    let base = load_config(args.config.as_deref())?;
    let mut penalty = base.penalty;
    if let Some(rho) = args.rho {
        penalty.rho_o = rho;
    }
    if let Some(mode) = args.mode {
        penalty.mode = mode;
    }
    if args.ns1.is_some() {
        penalty.ns1 = args.ns1;
    }
    if let Some(k) = args.k_max {
        penalty.k_max = k;
    }
    if let Some(seed) = args.seed {
        penalty.seed = seed;
    }

    let mut real = load_dataset(&args.input, &args.columns.schema())?;
    create_dir(&args.out_dir)?;
    let mut files = Vec::new();
    if args.standardize {
        let (scaled, scaler) = standardize(&real);
        real = scaled;
        write_json(&args.out_dir.join("scaler.json"), &scaler)?;
        files.push("scaler.json".to_string());
    }
    penalty.validate(real.len())?;
    let (syn, trace) = learn_stage1(&real, &penalty, &base.adam)?;
    write_dataset(syn.data(), args.out_dir.join("syn1.csv"))?;
    trace.write_csv(args.out_dir.join("trace.csv"))?;
    files.extend(["syn1.csv".to_string(), "trace.csv".to_string(), MANIFEST_FILE.to_string()]);
    for w in &trace.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(obj) = &trace.final_objective {
        println!(
            "{} points, objective {:.6} (loss {:.6}, penalty {:.6}), {} outer iterations, {} inner failures",
            syn.len(),
            obj.total,
            obj.loss,
            obj.penalty_sp + obj.penalty_eo,
            trace.iterations.len(),
            trace.inner_failures
        );
    } else {
        println!("{} points, returned unchanged (no penalty)", syn.len());
    }
    let config = (&penalty, &base.adam);
    write_json(
        &args.out_dir.join(MANIFEST_FILE),
        &StepManifest {
            command: "stage1",
            input: &args.input,
            input_digest: config_digest(real.points()),
            config: &config,
            config_digest: config_digest(&config),
            files,
        },
    )
}

fn stage2(args: Stage2Args) -> Result<()> {
    let base = load_config(args.config.as_deref())?;
    let data = load_dataset(&args.input, &args.columns.schema())?;
    let ns2 = match (args.ns2, args.ns2_fraction) {
        (Some(n), _) => n,
        (None, Some(f)) => Ns2Setting::Fraction(f).resolve(data.len()),
        (None, None) => data.len(),
    };
    let mut dp = base.dp.config(ns2, args.seed);
    if let Some(eps) = args.epsilon {
        dp.epsilon = eps;
    }
    if let Some(delta) = args.delta {
        dp.delta = delta;
    }
    if let Some(b) = args.clip_bound {
        dp.clip_bound = b;
    }
    dp.validate()?;
    let input_digest = config_digest(data.points());
    let syn1 = SyntheticDataset::new(
        data,
        Provenance {
            stage: Stage::Stage1,
            config_digest: input_digest.clone(),
            client: None,
        },
    );
    let (syn2, ledger) = generate_dp(&syn1, &dp)?;
    create_dir(&args.out_dir)?;
    write_dataset(syn2.data(), args.out_dir.join("syn2.csv"))?;
    ledger.write_json(args.out_dir.join("ledger.json"))?;
    println!(
        "{} points, epsilon {} delta {} over {} mechanisms, ledger {}",
        syn2.len(),
        ledger.total_epsilon,
        ledger.total_delta,
        ledger.entries.len(),
        if ledger_verify(&ledger, &dp) { "verified" } else { "NOT verified" }
    );
    write_json(
        &args.out_dir.join(MANIFEST_FILE),
        &StepManifest {
            command: "stage2",
            input: &args.input,
            input_digest,
            config: &dp,
            config_digest: config_digest(&dp),
            files: vec!["syn2.csv".into(), "ledger.json".into(), MANIFEST_FILE.into()],
        },
    )
}

fn evaluate(args: EvaluateArgs) -> Result<()> {
    let schema = args.columns.schema();
    let train = load_dataset(&args.train, &schema)?;
    let mut test = load_dataset(&args.test, &schema)?;
    if let Some(path) = &args.scaler {
        let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
        let scaler: Standardizer = serde_json::from_str(&text)?;
        test = scaler.apply(&test)?;
    }
    let inner = fairsyn::InnerSolveConfig {
        lambda_theta: args.lambda_theta,
        ..Default::default()
    };
    let (theta, record) = train_regularized(&train, inner.lambda_theta, &inner)?;
    let report = fairness::evaluate(&test, &theta)?;
    #[derive(Serialize)]
    struct Out {
        theta: Vec<f64>,
        solver: fairsyn::optim::ConvergenceRecord,
        metrics: fairness::FairnessReport,
    }
    let out = Out {
        theta: theta.theta,
        solver: record,
        metrics: report,
    };
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn gen_data(args: GenDataArgs) -> Result<()> {
    let mut spec = BiasSpec::default();
    if let Some(n) = args.size {
        spec.size = n;
    }
    if let Some(n) = args.features {
        spec.features = n;
    }
    if let Some(v) = args.group_shift {
        spec.group_shift = v;
    }
    if let Some(v) = args.label_bias {
        spec.label_bias = v;
    }
    if args.no_floor {
        spec.min_abs_spd = 0.0;
    }
    let ds = make_biased_dataset(&spec, args.seed)?;
    write_dataset(&ds, &args.output)?;
    let counts = ds.stratum_counts();
    println!("{} points, {} features, stratum counts {:?}", ds.len(), ds.dim(), counts.counts);
    Ok(())
}

fn report(args: ReportArgs) -> Result<()> {
    let path = if args.manifest.is_dir() {
        args.manifest.join(MANIFEST_FILE)
    } else {
        args.manifest
    };
    let report = load_report(&path)?;
    for f in emit_report(&report, &args.out_dir)? {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Stage1(a) => stage1(a),
        Command::Stage2(a) => stage2(a),
        Command::Evaluate(a) => evaluate(a),
        Command::GenData(a) => gen_data(a),
        Command::Report(a) => report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
