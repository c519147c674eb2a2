//! End-to-end runs: clients, server, ρ sweeps and report files.

mod config;
mod generator;
mod pipeline;
mod report;

pub use config::{DataSource, DpSettings, ExperimentConfig, Ns2Setting};
pub use generator::{baseline_abs_spd, make_biased_dataset, BiasSpec};
pub use pipeline::{
    load_source, run_pipeline, run_pipeline_on, CellMetrics, ClientSeeds, CommunicationCost, ReportRow, RunProvenance,
    RunReport, ServerFit, Stage1Summary, Stage2Audit, StageKind,
};
pub use report::{emit_report, load_report, table, MANIFEST_FILE, TABLE_FILE};
