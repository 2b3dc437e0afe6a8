//! Temporal splits, evaluation sets, metrics, baselines and the experiment
//! grid runner.

mod eval;
mod experiment;
mod metrics;
mod split;

pub use eval::{
    build_eval_set, community_baseline, random_baseline, subset_label, BaselineMetrics, LinkDataset, PairUniverse,
    Provenance,
};
pub use experiment::{
    run_baselines_on, run_experiment, run_experiment_on, BaselineConfig, BaselineReport, BootstrapConfig, CellReport,
    Experiment, ExperimentConfig, ExperimentReport, FeatureConfig, ModelConfig, ReportRow, SplitConfig, SubsetResult,
    ThresholdConfig,
};
pub use metrics::{
    bootstrap_ci, evaluate, BootstrapCi, Confusion, MetricKind, Metrics, DEFAULT_LEVEL, DEFAULT_RESAMPLES,
};
pub use split::{date, make_split, month_end, month_start, month_window, Regime, Split, SplitSpec};
