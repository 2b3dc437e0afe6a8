use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::eval::{build_eval_set, community_baseline, random_baseline, subset_label, LinkDataset, PairUniverse};
use super::metrics::{bootstrap_ci, evaluate, BootstrapCi, MetricKind, Metrics, DEFAULT_LEVEL, DEFAULT_RESAMPLES};
use super::split::{date, make_split, Regime, Split, SplitSpec};
use crate::analytics::{leiden, DEFAULT_RESOLUTION};
use crate::embeddings::{derive_seed, node2vec, EmbeddingTable, SkipGramConfig, WalkConfig};
use crate::graph::{load_graph, MediaGraph};
use crate::linkpred::{
    train_supervised_ctx, train_unsupervised_ctx, NegativeMode, NodeFeatureTable, SageConfig, SearchSpace, TrainContext,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Experiment {
    /// Supervised, embeddings only.
    #[serde(rename = "1A")]
    E1A,
    /// Unsupervised, embeddings only.
    #[serde(rename = "1B")]
    E1B,
    /// Supervised with structural pair scalars.
    #[serde(rename = "2A")]
    E2A,
    /// Unsupervised with structural pair scalars.
    #[serde(rename = "2B")]
    E2B,
}

impl Experiment {
    pub const ALL: [Experiment; 4] = [Experiment::E1A, Experiment::E1B, Experiment::E2A, Experiment::E2B];

    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::E1A => "1A",
            Experiment::E1B => "1B",
            Experiment::E2A => "2A",
            Experiment::E2B => "2B",
        }
    }

    pub fn supervised(self) -> bool {
        matches!(self, Experiment::E1A | Experiment::E2A)
    }

    pub fn structural(self) -> bool {
        matches!(self, Experiment::E2A | Experiment::E2B)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub regimes: Vec<Regime>,
    pub train_end: NaiveDate,
    pub val_end: NaiveDate,
    pub test_end: NaiveDate,
    /// Rolling cutoff months for INCREMENTAL.
    pub cutoffs: Vec<NaiveDate>,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            regimes: vec![Regime::OneTime],
            train_end: date(2021, 5, 31),
            val_end: date(2021, 7, 31),
            test_end: date(2021, 12, 31),
            cutoffs: Vec::new(),
        }
    }
}

impl SplitConfig {
    pub fn spec(&self, regime: Regime) -> Result<SplitSpec> {
        match regime {
            Regime::OneTime => SplitSpec::one_time(self.train_end, self.val_end, self.test_end),
            Regime::Incremental => SplitSpec::incremental(self.cutoffs.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub experiments: Vec<Experiment>,
    pub sage: SageConfig,
    pub search: SearchSpace,
    /// Negatives for the evaluation sets.
    pub eval_negatives: NegativeMode,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            experiments: Experiment::ALL.to_vec(),
            sage: SageConfig::default(),
            search: SearchSpace::default(),
            eval_negatives: NegativeMode::Random,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    /// Precomputed node embeddings; Node2Vec runs on each training graph
    /// when absent.
    pub embeddings: Option<PathBuf>,
    pub walk: WalkConfig,
    pub skipgram: SkipGramConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdConfig {
    pub min_weights: Vec<u32>,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        ThresholdConfig {
            min_weights: vec![1, 2],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineConfig {
    pub random: bool,
    pub community: bool,
    /// Score every non-edge pair of training nodes instead of the balanced
    /// evaluation set.
    pub all_pairs: bool,
    pub iterations: usize,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            random: false,
            community: false,
            all_pairs: false,
            iterations: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BootstrapConfig {
    pub enabled: bool,
    pub metric: MetricKind,
    pub resamples: usize,
    pub level: f64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            enabled: true,
            metric: MetricKind::F1,
            resamples: DEFAULT_RESAMPLES,
            level: DEFAULT_LEVEL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub outlet: String,
    /// Graph file; may be omitted when the graph is passed in directly.
    pub graph: Option<PathBuf>,
    pub seed: u64,
    pub split: SplitConfig,
    pub model: ModelConfig,
    pub features: FeatureConfig,
    pub thresholds: ThresholdConfig,
    pub baselines: BaselineConfig,
    pub bootstrap: BootstrapConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            outlet: "outlet".into(),
            graph: None,
            seed: 7,
            split: SplitConfig::default(),
            model: ModelConfig::default(),
            features: FeatureConfig::default(),
            thresholds: ThresholdConfig::default(),
            baselines: BaselineConfig::default(),
            bootstrap: BootstrapConfig::default(),
        }
    }
}

impl ExperimentConfig {
    /// TOML for `.toml` files, JSON otherwise.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: ExperimentConfig = if path.extension().is_some_and(|e| e == "toml") {
            toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?
        } else {
            serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?
        };
        // relative artifact paths are read from the config's directory
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.graph, &mut cfg.features.embeddings].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.split.regimes.is_empty() || self.model.experiments.is_empty() || self.thresholds.min_weights.is_empty()
        {
            return Err(Error::Config(
                "regimes, experiments and min_weights must be non-empty".into(),
            ));
        }
        if self.thresholds.min_weights.contains(&0) {
            return Err(Error::Config("min_weight must be at least 1".into()));
        }
        for &r in &self.split.regimes {
            self.split.spec(r)?;
        }
        self.model.sage.validate()?;
        self.features.walk.validate()
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub outlet: String,
    pub experiment: String,
    pub regime: String,
    pub subset: String,
    pub accuracy: f64,
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetResult {
    pub subset: String,
    pub min_weight: u32,
    pub positives: usize,
    pub negatives: usize,
    pub metrics: Metrics,
    pub ci: Option<BootstrapCi>,
}

/// Everything about one trained (experiment, split) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub experiment: Experiment,
    pub regime: Regime,
    pub split: String,
    pub train_nodes: usize,
    pub train_edges: usize,
    pub val_edges: usize,
    pub test_edges: usize,
    pub pair_feature_dim: usize,
    pub validation_loss: f64,
    pub selected: SageConfig,
    pub model_seed: u64,
    pub results: Vec<SubsetResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub kind: String,
    pub regime: Regime,
    pub split: String,
    pub subset: String,
    pub universe_size: usize,
    pub positive_rate: f64,
    pub accuracy: f64,
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub rows: Vec<ReportRow>,
    pub cells: Vec<CellReport>,
    pub baselines: Vec<BaselineReport>,
}

impl ExperimentReport {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Invalid(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Writes the CSV and a `.json` sidecar next to it.
    pub fn write(&self, csv_path: impl AsRef<Path>) -> Result<PathBuf> {
        let csv_path = csv_path.as_ref();
        fs::write(csv_path, self.to_csv()?).map_err(|e| Error::io(csv_path, e))?;
        let sidecar = csv_path.with_extension("json");
        fs::write(&sidecar, serde_json::to_string_pretty(self)?).map_err(|e| Error::io(&sidecar, e))?;
        Ok(sidecar)
    }
}

/// Row label for a subset; rolling splits carry their test month.
fn subset_name(split: &Split, regime: Regime, min_weight: u32) -> String {
    match regime {
        Regime::OneTime => subset_label(min_weight),
        Regime::Incremental => format!("{} / {}", split.label, subset_label(min_weight)),
    }
}

struct PreparedSplit {
    regime: Regime,
    split: Split,
    /// Absent when only baselines run.
    features: Option<NodeFeatureTable>,
    /// One entry per configured threshold.
    eval_sets: Vec<(u32, LinkDataset)>,
}

fn cell_name(regime: Regime, split: &str, what: &str) -> String {
    format!("{} {} {}", what, regime.as_str(), split)
}

fn prepare(
    g: &MediaGraph,
    cfg: &ExperimentConfig,
    base: Option<&EmbeddingTable>,
    with_features: bool,
) -> Result<Vec<PreparedSplit>> {
    let mut splits = Vec::new();
    for &regime in &cfg.split.regimes {
        let spec = cfg.split.spec(regime)?;
        for s in make_split(g, &spec).map_err(|e| e.in_cell(regime.as_str()))? {
            splits.push((regime, s));
        }
    }
    splits
        .into_par_iter()
        .enumerate()
        .map(|(i, (regime, split))| {
            let ctx = |e: Error| e.in_cell(cell_name(regime, &split.label, "split"));
            let table = match base {
                _ if !with_features => None,
                Some(t) => Some(t.clone()),
                None => {
                    let walk = WalkConfig {
                        seed: derive_seed(cfg.seed, 1000 + i as u64),
                        ..cfg.features.walk.clone()
                    };
                    Some(node2vec(&split.train_g, &walk, &cfg.features.skipgram).map_err(ctx)?.0)
                }
            };
            let eval_sets = cfg
                .thresholds
                .min_weights
                .iter()
                .map(|&mw| {
                    let seed = derive_seed(cfg.seed, 2000 + 100 * i as u64 + mw as u64);
                    build_eval_set(&split.train_g, &split.test_edges, mw, cfg.model.eval_negatives, seed)
                        .map(|d| (mw, d))
                })
                .collect::<Result<Vec<_>>>()
                .map_err(ctx)?;
            Ok(PreparedSplit {
                regime,
                split,
                features: table.map(NodeFeatureTable::new),
                eval_sets,
            })
        })
        .collect()
}

fn run_cell(p: &PreparedSplit, exp: Experiment, cfg: &ExperimentConfig, seed: u64) -> Result<CellReport> {
    let sage = SageConfig {
        seed,
        ..cfg.model.sage.clone()
    };
    let feats = p.features.as_ref().expect("model cells prepare features");
    let ctx = TrainContext::new(&p.split.train_g, feats, exp.structural(), seed)?;
    let val_edges: Vec<(String, String)> = p
        .split
        .val_edges
        .iter()
        .map(|(k, _)| (k.u.clone(), k.v.clone()))
        .collect();
    let val = ctx.labelled_pairs(&val_edges, derive_seed(seed, 1))?;
    let model = if exp.supervised() {
        train_supervised_ctx(&ctx, &val, &sage, &cfg.model.search)?
    } else {
        train_unsupervised_ctx(&ctx, &val, &sage, &cfg.model.search)?
    };
    let mut results = Vec::new();
    for (mw, ds) in &p.eval_sets {
        let preds = model.predict_pairs(&ds.pairs())?;
        let labels = ds.labels();
        let metrics = evaluate(&preds, &labels)?;
        let ci = if cfg.bootstrap.enabled {
            let b = &cfg.bootstrap;
            Some(bootstrap_ci(
                &preds,
                &labels,
                b.metric,
                b.resamples,
                b.level,
                derive_seed(seed, 10 + *mw as u64),
            )?)
        } else {
            None
        };
        results.push(SubsetResult {
            subset: subset_name(&p.split, p.regime, *mw),
            min_weight: *mw,
            positives: ds.positives.len(),
            negatives: ds.negatives.len(),
            metrics,
            ci,
        });
    }
    Ok(CellReport {
        experiment: exp,
        regime: p.regime,
        split: p.split.label.clone(),
        train_nodes: p.split.train_g.node_count(),
        train_edges: p.split.train_g.edge_count(),
        val_edges: p.split.val_edges.len(),
        test_edges: p.split.test_edges.len(),
        pair_feature_dim: model.pair_feature_dim(),
        validation_loss: model.validation_loss,
        selected: model.config.clone(),
        model_seed: seed,
        results,
    })
}

fn run_baselines(p: &PreparedSplit, idx: usize, cfg: &ExperimentConfig) -> Result<Vec<BaselineReport>> {
    let b = &cfg.baselines;
    let part = if b.community {
        Some(leiden(
            &p.split.train_g,
            DEFAULT_RESOLUTION,
            derive_seed(cfg.seed, 3000 + idx as u64),
        )?)
    } else {
        None
    };
    let mut out = Vec::new();
    for (mw, ds) in &p.eval_sets {
        let universe = if b.all_pairs {
            PairUniverse::all_pairs(&p.split.train_g, &ds.positives)
        } else {
            PairUniverse::from_dataset(ds)
        };
        let mut push = |kind: &str, accuracy, f1, precision, recall| {
            out.push(BaselineReport {
                kind: kind.to_string(),
                regime: p.regime,
                split: p.split.label.clone(),
                subset: subset_name(&p.split, p.regime, *mw),
                universe_size: universe.len(),
                positive_rate: universe.positive_rate(),
                accuracy,
                f1,
                precision,
                recall,
            })
        };
        if b.random {
            let seed = derive_seed(cfg.seed, 4000 + 100 * idx as u64 + *mw as u64);
            let m = random_baseline(&universe, b.iterations, seed)?;
            push("RANDOM", m.accuracy, m.f1, m.precision, m.recall);
        }
        if let Some(part) = &part {
            let m = community_baseline(part, &universe)?;
            push("COMMUNITY_ID", m.accuracy, m.f1, m.precision, m.recall);
        }
    }
    Ok(out)
}

/// Runs only the configured baselines over every split and threshold,
/// skipping embeddings and model training.
pub fn run_baselines_on(g: &MediaGraph, cfg: &ExperimentConfig) -> Result<Vec<BaselineReport>> {
    cfg.validate()?;
    let prepared = prepare(g, cfg, None, false)?;
    let mut out = Vec::new();
    for (i, p) in prepared.iter().enumerate() {
        out.extend(run_baselines(p, i, cfg).map_err(|e| e.in_cell(cell_name(p.regime, &p.split.label, "baseline")))?);
    }
    Ok(out)
}

/// Loads the configured graph and runs the experiment grid.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let path = cfg
        .graph
        .as_ref()
        .ok_or_else(|| Error::Config("experiment config has no graph path".into()))?;
    let g = load_graph(path)?;
    run_experiment_on(&g, cfg)
}

/// Trains one model per (experiment, split) and evaluates it on every
/// threshold subset. Rows follow experiment, regime, split and threshold
/// order; baseline rows come last.
pub fn run_experiment_on(g: &MediaGraph, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let base = cfg.features.embeddings.as_ref().map(EmbeddingTable::load).transpose()?;
    let prepared = prepare(g, cfg, base.as_ref(), true)?;

    let jobs: Vec<(usize, Experiment, usize)> = cfg
        .model
        .experiments
        .iter()
        .enumerate()
        .flat_map(|(e, &exp)| (0..prepared.len()).map(move |s| (e, exp, s)))
        .collect();
    let cells: Vec<CellReport> = jobs
        .par_iter()
        .map(|&(e, exp, s)| {
            let p = &prepared[s];
            let seed = derive_seed(cfg.seed, 10_000 + 100 * e as u64 + s as u64);
            run_cell(p, exp, cfg, seed).map_err(|err| err.in_cell(cell_name(p.regime, &p.split.label, exp.as_str())))
        })
        .collect::<Result<_>>()?;

    let baselines: Vec<BaselineReport> = prepared
        .par_iter()
        .enumerate()
        .map(|(i, p)| run_baselines(p, i, cfg).map_err(|e| e.in_cell(cell_name(p.regime, &p.split.label, "baseline"))))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    let mut rows = Vec::new();
    for cell in &cells {
        for r in &cell.results {
            rows.push(ReportRow {
                outlet: cfg.outlet.clone(),
                experiment: cell.experiment.as_str().to_string(),
                regime: cell.regime.as_str().to_string(),
                subset: r.subset.clone(),
                accuracy: r.metrics.accuracy,
                f1: r.metrics.f1,
                precision: r.metrics.precision,
                recall: r.metrics.recall,
                ci_low: r.ci.as_ref().map(|c| c.lower),
                ci_high: r.ci.as_ref().map(|c| c.upper),
            });
        }
    }
    for b in &baselines {
        rows.push(ReportRow {
            outlet: cfg.outlet.clone(),
            experiment: b.kind.clone(),
            regime: b.regime.as_str().to_string(),
            subset: b.subset.clone(),
            accuracy: b.accuracy,
            f1: b.f1,
            precision: b.precision,
            recall: b.recall,
            ci_low: None,
            ci_high: None,
        });
    }
    Ok(ExperimentReport {
        config: cfg.clone(),
        rows,
        cells,
        baselines,
    })
}
