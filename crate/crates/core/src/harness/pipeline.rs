//! Clients, server and the ρ sweep.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::data::{load_dataset, partition_clients, train_test_split, DataPoint, Dataset, Standardizer};
use crate::error::{Error, Result};
use crate::fairness::{self, Disparity};
use crate::harness::config::{DataSource, ExperimentConfig, Ns2Setting};
use crate::harness::generator::make_biased_dataset;
use crate::model::{train_regularized, ModelParams};
use crate::optim::SolveStatus;
use crate::rng::derive_seed;
use crate::stage1::{learn_stage1, FairnessMode, PenaltyConfig, Stage, Stage1Trace, SyntheticDataset};
use crate::stage2::{generate_dp, ledger_verify, PrivacyLedger};

// Tags mixed into the base seed; each stream gets its own.
const PARTITION: u64 = 0;
const SPLIT: u64 = 1;
const STAGE1: u64 = 2;
const STAGE2: u64 = 3;

/// Scalar counts moved between clients and server.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommunicationCost {
    pub clients: usize,
    /// `|θ| = n`.
    pub model_size: usize,
    /// Records sent by each client.
    pub records: Vec<usize>,
    /// `Σ_k records_k · (n+1)`: each record is `n-1` features, `s` and `y`.
    pub uplink: u64,
    /// `K · n`.
    pub downlink: u64,
    pub rounds: usize,
    /// `K · t · n` for an iterative scheme that ships θ every round.
    pub iterative: u64,
}

impl CommunicationCost {
    pub fn new(records: &[usize], model_size: usize, rounds: usize) -> Self {
        let k = records.len() as u64;
        let n = model_size as u64;
        Self {
            clients: records.len(),
            model_size,
            records: records.to_vec(),
            uplink: records.iter().map(|&r| r as u64 * (n + 1)).sum(),
            downlink: k * n,
            rounds,
            iterative: k * rounds as u64 * n,
        }
    }

    /// One-shot total, uplink plus downlink.
    pub fn one_shot(&self) -> u64 {
        self.uplink + self.downlink
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageKind {
    /// Server trained on the clients' real training data.
    Baseline,
    Syn1,
    Syn2,
}

impl fmt::Display for StageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StageKind::Baseline => "baseline",
            StageKind::Syn1 => "syn1",
            StageKind::Syn2 => "syn2",
        })
    }
}

/// Server-model quality on the pooled client test data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellMetrics {
    pub accuracy_pct: f64,
    pub spd: Disparity,
    pub eod: Disparity,
    pub covariance_sp: f64,
    pub covariance_eo: f64,
    /// Pearson correlation of `s` with the score `aᵀθ`.
    pub correlation_sp: Option<f64>,
    /// Same, over the `y = +1` points only.
    pub correlation_eo: Option<f64>,
}

impl CellMetrics {
    pub fn measure(test: &Dataset, theta: &ModelParams) -> Result<Self> {
        let report = fairness::evaluate(test, theta)?;
        let positives: Vec<&DataPoint> = test.points().iter().filter(|p| p.y > 0).collect();
        Ok(Self {
            accuracy_pct: 100.0 * report.accuracy,
            spd: report.spd,
            eod: report.eod,
            covariance_sp: report.covariance_sp,
            covariance_eo: report.covariance_eo,
            correlation_sp: correlation(test.points().iter(), theta),
            correlation_eo: correlation(positives.into_iter(), theta),
        })
    }

    pub fn abs_spd(&self) -> Option<f64> {
        self.spd.abs()
    }

    pub fn abs_eod(&self) -> Option<f64> {
        self.eod.abs()
    }
}

fn correlation<'a>(points: impl Iterator<Item = &'a DataPoint>, theta: &ModelParams) -> Option<f64> {
    let pairs: Vec<(f64, f64)> = points.map(|p| (f64::from(p.s), p.score(&theta.theta))).collect();
    let m = pairs.len() as f64;
    if pairs.len() < 2 {
        return None;
    }
    let (ms, mz) = pairs.iter().fold((0.0, 0.0), |(a, b), (s, z)| (a + s / m, b + z / m));
    let (mut css, mut czz, mut csz) = (0.0, 0.0, 0.0);
    for (s, z) in &pairs {
        css += (s - ms) * (s - ms);
        czz += (z - mz) * (z - mz);
        csz += (s - ms) * (z - mz);
    }
    (css > 0.0 && czz > 0.0).then(|| csz / (css * czz).sqrt())
}

/// How the server solve ended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServerFit {
    pub theta: Vec<f64>,
    pub status: SolveStatus,
    pub iterations: usize,
    pub gradient_norm: f64,
}

/// Stage-1 diagnostics summed over clients.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Stage1Summary {
    pub outer_iterations: usize,
    pub inner_failures: usize,
    /// Final penalty objective per client.
    pub final_objective: Vec<Option<f64>>,
    pub warnings: Vec<String>,
}

/// Stage-2 audit per client.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage2Audit {
    pub ledgers: Vec<PrivacyLedger>,
    pub verified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub rho: f64,
    pub stage: StageKind,
    pub ns2: Option<Ns2Setting>,
    pub communication: CommunicationCost,
    pub metrics: Option<CellMetrics>,
    pub server: Option<ServerFit>,
    pub stage1: Option<Stage1Summary>,
    pub stage2: Option<Stage2Audit>,
    /// Set when the cell could not be computed; the sweep carries on.
    pub error: Option<String>,
}

impl ReportRow {
    /// Column-group name, e.g. `syn1` or `syn2_10pct`.
    pub fn series(&self) -> String {
        match self.ns2 {
            Some(setting) => format!("{}_{}", self.stage, setting.key()),
            None => self.stage.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClientSeeds {
    pub split: u64,
    pub stage1: Vec<u64>,
    pub stage2: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunProvenance {
    pub seed: u64,
    pub partition_seed: u64,
    pub clients: Vec<ClientSeeds>,
    pub config_digest: String,
    pub data_digest: String,
    pub train_sizes: Vec<usize>,
    pub test_sizes: Vec<usize>,
    /// `n`, intercept included when enabled.
    pub model_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub mode: FairnessMode,
    pub rho: Vec<f64>,
    pub ns2: Vec<Ns2Setting>,
    pub rows: Vec<ReportRow>,
    pub provenance: RunProvenance,
}

impl RunReport {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, rho: f64, stage: StageKind, ns2: Option<Ns2Setting>) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.stage == stage && r.ns2 == ns2 && (stage == StageKind::Baseline || r.rho == rho))
    }

    pub fn baseline(&self) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.stage == StageKind::Baseline)
    }
}

/// Loads or generates the full dataset named by `source`.
pub fn load_source(source: &DataSource) -> Result<Dataset> {
    match source {
        DataSource::File { path, schema } => load_dataset(path, schema),
        DataSource::Synthetic { spec, seed } => make_biased_dataset(spec, *seed),
    }
}

type CellResult<T> = std::result::Result<T, String>;

/// Everything one client hands over. Nothing here is shared between clients.
struct ClientOutput {
    train: Dataset,
    test: Dataset,
    syn1: Vec<CellResult<(SyntheticDataset, Stage1Trace)>>,
    syn2: Vec<Vec<CellResult<(SyntheticDataset, PrivacyLedger)>>>,
}

fn client_seeds(cfg: &ExperimentConfig, k: usize) -> ClientSeeds {
    let k = k as u64;
    ClientSeeds {
        split: derive_seed(cfg.seed, &[SPLIT, k]),
        stage1: (0..cfg.rho.len() as u64).map(|r| derive_seed(cfg.seed, &[STAGE1, k, r])).collect(),
        stage2: (0..cfg.rho.len() as u64)
            .map(|r| {
                (0..cfg.dp.ns2.len() as u64)
                    .map(|j| derive_seed(cfg.seed, &[STAGE2, k, r, j]))
                    .collect()
            })
            .collect(),
    }
}

fn run_client(cfg: &ExperimentConfig, k: usize, seeds: &ClientSeeds, data: Dataset) -> Result<ClientOutput> {
    let (train, test) = train_test_split(&data, cfg.train_fraction, seeds.split)?;
    let scaler = Standardizer::fit(&train);
    let (mut train, mut test) = (scaler.apply(&train)?, scaler.apply(&test)?);
    if cfg.intercept {
        train = train.with_intercept();
        test = test.with_intercept();
    }

    let mut syn1 = Vec::with_capacity(cfg.rho.len());
    let mut syn2 = Vec::with_capacity(cfg.rho.len());
    for (r, &rho) in cfg.rho.iter().enumerate() {
        let penalty = PenaltyConfig {
            rho_o: rho,
            seed: seeds.stage1[r],
            ..cfg.penalty.clone()
        };
        let stage1 = penalty
            .validate(train.len())
            .and_then(|()| learn_stage1(&train, &penalty, &cfg.adam))
            .map(|(syn, trace)| (syn.with_client(k), trace))
            .map_err(|e| e.to_string());
        let row: Vec<_> = cfg
            .dp
            .ns2
            .iter()
            .enumerate()
            .map(|(j, setting)| match &stage1 {
                Ok((syn, _)) => {
                    let dp = cfg.dp.config(setting.resolve(train.len()), seeds.stage2[r][j]);
                    generate_dp(syn, &dp).map_err(|e| e.to_string())
                }
                Err(e) => Err(format!("stage 1 failed: {e}")),
            })
            .collect();
        syn1.push(stage1);
        syn2.push(row);
    }
    Ok(ClientOutput { train, test, syn1, syn2 })
}

/// Checks that every dataset reaching the server came from the client it is
/// filed under and from the expected stage.
fn check_provenance(parts: &[&SyntheticDataset], stage: Stage) -> Result<()> {
    for (k, syn) in parts.iter().enumerate() {
        if syn.provenance.client != Some(k) || syn.provenance.stage != stage {
            return Err(Error::InvalidArgument(format!(
                "dataset filed under client {k} carries provenance {:?}",
                syn.provenance
            )));
        }
    }
    Ok(())
}

struct Server<'a> {
    cfg: &'a ExperimentConfig,
    test: Dataset,
    model_size: usize,
}

impl Server<'_> {
    fn row(&self, rho: f64, stage: StageKind, ns2: Option<Ns2Setting>, parts: CellResult<Vec<&Dataset>>) -> ReportRow {
        let records: Vec<usize> = parts.as_ref().map(|p| p.iter().map(|d| d.len()).collect()).unwrap_or_default();
        let mut row = ReportRow {
            rho,
            stage,
            ns2,
            communication: CommunicationCost::new(&records, self.model_size, self.cfg.communication_rounds),
            metrics: None,
            server: None,
            stage1: None,
            stage2: None,
            error: None,
        };
        match parts.and_then(|p| self.fit(&p).map_err(|e| e.to_string())) {
            Ok((fit, metrics)) => {
                row.server = Some(fit);
                row.metrics = Some(metrics);
            }
            Err(e) => row.error = Some(e),
        }
        row
    }

    /// Trains the server model on the union of `parts` from θ = 0 with the
    /// inner-problem loss and solver, then scores it on the pooled test data.
    fn fit(&self, parts: &[&Dataset]) -> Result<(ServerFit, CellMetrics)> {
        let union = Dataset::concat(parts.iter().copied())?;
        let inner = &self.cfg.penalty.inner;
        let (theta, record) = train_regularized(&union, inner.lambda_theta, inner)?;
        if !theta.is_finite() {
            return Err(Error::NonFiniteObjective { iteration: record.iterations });
        }
        let metrics = CellMetrics::measure(&self.test, &theta)?;
        let fit = ServerFit {
            theta: theta.theta,
            status: record.status,
            iterations: record.iterations,
            gradient_norm: record.final_gradient_norm,
        };
        Ok((fit, metrics))
    }
}

fn collect<'a, T: 'a>(
    items: impl Iterator<Item = &'a CellResult<T>>,
    stage: Stage,
    pick: impl Fn(&'a T) -> &'a SyntheticDataset,
) -> CellResult<Vec<&'a SyntheticDataset>> {
    let parts = items
        .enumerate()
        .map(|(k, r)| r.as_ref().map(&pick).map_err(|e| format!("client {k}: {e}")))
        .collect::<CellResult<Vec<_>>>()?;
    check_provenance(&parts, stage).map_err(|e| e.to_string())?;
    Ok(parts)
}

/// Runs both stages on every client in parallel, then trains and scores the
/// server model for each cell of the sweep.
///
/// Rows come out as the baseline, then for each ρ the stage-1 row followed
/// by one stage-2 row per `ns2` setting. A failing cell keeps its row with
/// `error` set.
pub fn run_pipeline(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let data = load_source(&cfg.data)?;
    run_pipeline_on(cfg, data)
}

/// [`run_pipeline`] on an already loaded dataset; `cfg.data` is ignored.
pub fn run_pipeline_on(cfg: &ExperimentConfig, data: Dataset) -> Result<RunReport> {
    cfg.validate()?;
    let data_digest = crate::config_digest(&data.points());
    let partition_seed = derive_seed(cfg.seed, &[PARTITION]);
    let partitions = partition_clients(&data, cfg.clients, partition_seed)?;
    drop(data);
    let seeds: Vec<ClientSeeds> = (0..cfg.clients).map(|k| client_seeds(cfg, k)).collect();

    let outputs: Vec<ClientOutput> = std::thread::scope(|scope| {
        let handles: Vec<_> = partitions
            .into_iter()
            .zip(&seeds)
            .enumerate()
            .map(|(k, (part, seeds))| scope.spawn(move || run_client(cfg, k, seeds, part)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("client worker panicked"))
            .collect::<Result<Vec<_>>>()
    })?;

    let test = Dataset::concat(outputs.iter().map(|o| &o.test))?;
    let model_size = test.dim();
    let server = Server { cfg, test, model_size };

    let mut rows = Vec::new();
    rows.push(server.row(0.0, StageKind::Baseline, None, Ok(outputs.iter().map(|o| &o.train).collect())));
    for (r, &rho) in cfg.rho.iter().enumerate() {
        let syn1 = collect(outputs.iter().map(|o| &o.syn1[r]), Stage::Stage1, |(s, _)| s);
        let mut row = server.row(rho, StageKind::Syn1, None, syn1.map(|p| p.into_iter().map(|s| s.data()).collect()));
        row.stage1 = Some(summarize_stage1(outputs.iter().map(|o| &o.syn1[r])));
        rows.push(row);

        for (j, &setting) in cfg.dp.ns2.iter().enumerate() {
            let syn2 = collect(outputs.iter().map(|o| &o.syn2[r][j]), Stage::Stage2, |(s, _)| s);
            let mut row = server.row(rho, StageKind::Syn2, Some(setting), syn2.map(|p| p.into_iter().map(|s| s.data()).collect()));
            let ledgers: Vec<PrivacyLedger> = outputs
                .iter()
                .filter_map(|o| o.syn2[r][j].as_ref().ok().map(|(_, l)| l.clone()))
                .collect();
            if ledgers.len() == outputs.len() {
                let verified = ledgers.iter().zip(&outputs).enumerate().all(|(k, (l, o))| {
                    ledger_verify(l, &cfg.dp.config(setting.resolve(o.train.len()), seeds[k].stage2[r][j]))
                });
                row.stage2 = Some(Stage2Audit { ledgers, verified });
            }
            rows.push(row);
        }
    }

    Ok(RunReport {
        mode: cfg.penalty.mode,
        rho: cfg.rho.clone(),
        ns2: cfg.dp.ns2.clone(),
        rows,
        provenance: RunProvenance {
            seed: cfg.seed,
            partition_seed,
            clients: seeds,
            config_digest: crate::config_digest(cfg),
            data_digest,
            train_sizes: outputs.iter().map(|o| o.train.len()).collect(),
            test_sizes: outputs.iter().map(|o| o.test.len()).collect(),
            model_size,
        },
    })
}

fn summarize_stage1<'a>(results: impl Iterator<Item = &'a CellResult<(SyntheticDataset, Stage1Trace)>>) -> Stage1Summary {
    let mut summary = Stage1Summary::default();
    for (k, r) in results.enumerate() {
        match r {
            Ok((_, trace)) => {
                summary.outer_iterations += trace.iterations.len();
                summary.inner_failures += trace.inner_failures;
                summary.final_objective.push(trace.final_objective.as_ref().map(|c| c.total));
                summary.warnings.extend(trace.warnings.iter().map(|w| format!("client {k}: {w}")));
            }
            Err(_) => summary.final_objective.push(None),
        }
    }
    summary
}
