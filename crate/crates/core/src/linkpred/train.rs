//! Supervised and unsupervised training pipelines and the trained model.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::features::{pair_matrix, scatter_pair_grad, NodeFeatureTable, StructuralFeatures};
use super::loss::{unsupervised_loss, DEFAULT_Q};
use super::nn::{Adam, Matrix, Mlp, Param};
use super::sage::{Encoder, MeanAdjacency};
use super::sampling::{ordered, sample_negative_indices, uniform_pairs, NegativeMode};
use crate::embeddings::{derive_seed, log_sigmoid, sigmoid};
use crate::graph::{GraphView, MediaGraph};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SageConfig {
    pub layers: usize,
    pub hidden_dim: usize,
    pub dropout: f64,
    pub lr: f64,
    pub weight_decay: f64,
    pub final_dropout: f64,
    pub decoder_hidden: usize,
    pub epochs: usize,
    pub patience: usize,
    /// Epochs without improvement before the unsupervised scheduler halves
    /// the learning rate.
    pub plateau_patience: usize,
    /// Negatives per positive in the unsupervised loss.
    pub q: f64,
    pub seed: u64,
}

impl Default for SageConfig {
    fn default() -> Self {
        SageConfig {
            layers: 2,
            hidden_dim: 64,
            dropout: 0.0,
            lr: 3e-3,
            weight_decay: 0.0,
            final_dropout: 0.3,
            decoder_hidden: 64,
            epochs: 200,
            patience: 20,
            plateau_patience: 10,
            q: DEFAULT_Q,
            seed: 7,
        }
    }
}

impl SageConfig {
    pub fn validate(&self) -> Result<()> {
        if self.layers == 0 || self.hidden_dim == 0 || self.decoder_hidden == 0 {
            return Err(Error::Config(
                "layers, hidden_dim and decoder_hidden must be positive".into(),
            ));
        }
        if !(0.0..=0.5).contains(&self.dropout) {
            return Err(Error::Config(format!("dropout {} outside [0, 0.5]", self.dropout)));
        }
        if !(0.0..1.0).contains(&self.final_dropout) {
            return Err(Error::Config(format!(
                "final_dropout {} outside [0, 1)",
                self.final_dropout
            )));
        }
        if self.lr.is_nan() || self.lr <= 0.0 || self.weight_decay < 0.0 || self.q.is_nan() || self.q < 0.0 {
            return Err(Error::Config(
                "lr must be positive; weight_decay and q nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// Grid for hyperparameter search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSpace {
    pub hidden_dim: Vec<usize>,
    pub layers: Vec<usize>,
    pub dropout: Vec<f64>,
    pub lr: Vec<f64>,
    pub weight_decay: Vec<f64>,
    pub decoder_hidden: Vec<usize>,
    /// Maximum supervised trials; a seeded subset is drawn when the grid
    /// is larger.
    pub budget: usize,
}

impl Default for SearchSpace {
    fn default() -> Self {
        SearchSpace {
            hidden_dim: vec![64],
            layers: vec![1, 2],
            dropout: vec![0.0, 0.25, 0.5],
            lr: vec![3e-3, 1e-2],
            weight_decay: vec![0.0, 5e-4],
            decoder_hidden: vec![64, 96, 128, 192],
            budget: 12,
        }
    }
}

impl SearchSpace {
    /// A single point: the base config itself.
    pub fn fixed() -> Self {
        SearchSpace {
            hidden_dim: Vec::new(),
            layers: Vec::new(),
            dropout: Vec::new(),
            lr: Vec::new(),
            weight_decay: Vec::new(),
            decoder_hidden: Vec::new(),
            budget: 1,
        }
    }

    /// Encoder grid crossed with `base`; empty axes keep the base value.
    pub fn supervised_trials(&self, base: &SageConfig) -> Vec<SageConfig> {
        fn or<T: Clone>(axis: &[T], fallback: T) -> Vec<T> {
            if axis.is_empty() {
                vec![fallback]
            } else {
                axis.to_vec()
            }
        }
        let mut out = Vec::new();
        for &hidden_dim in &or(&self.hidden_dim, base.hidden_dim) {
            for &layers in &or(&self.layers, base.layers) {
                for &dropout in &or(&self.dropout, base.dropout) {
                    for &lr in &or(&self.lr, base.lr) {
                        for &weight_decay in &or(&self.weight_decay, base.weight_decay) {
                            out.push(SageConfig {
                                hidden_dim,
                                layers,
                                dropout,
                                lr,
                                weight_decay,
                                ..base.clone()
                            });
                        }
                    }
                }
            }
        }
        let budget = self.budget.max(1);
        if out.len() > budget {
            out.shuffle(&mut ChaCha8Rng::seed_from_u64(base.seed));
            out.truncate(budget);
        }
        out
    }

    pub fn decoder_trials(&self, base: &SageConfig) -> Vec<usize> {
        if self.decoder_hidden.is_empty() {
            vec![base.decoder_hidden]
        } else {
            self.decoder_hidden.clone()
        }
    }
}

/// Labelled index pairs into the training graph.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LinkData {
    pub pairs: Vec<(usize, usize)>,
    pub labels: Vec<f64>,
}

impl LinkData {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn push(&mut self, pair: (usize, usize), label: bool) {
        self.pairs.push(pair);
        self.labels.push(if label { 1.0 } else { 0.0 });
    }
}

/// Everything fixed about a training graph.
pub struct TrainContext {
    pub view: GraphView,
    pub adj: MeanAdjacency,
    pub x: Matrix,
    pub structural: Option<StructuralFeatures>,
    positives: Vec<(usize, usize)>,
}

impl TrainContext {
    pub fn new(train_g: &MediaGraph, feats: &NodeFeatureTable, use_structural: bool, seed: u64) -> Result<Self> {
        let view = train_g.view();
        if view.edge_count() == 0 {
            return Err(Error::Invalid("training graph has no edges".into()));
        }
        let x = feats.matrix_for(&view)?;
        let structural = if use_structural {
            Some(StructuralFeatures::compute(&view, seed))
        } else {
            None
        };
        let positives = view.edge_list().into_iter().map(|(u, v, _)| (u, v)).collect();
        Ok(TrainContext {
            adj: MeanAdjacency::new(&view),
            view,
            x,
            structural,
            positives,
        })
    }

    pub fn pair_dim(&self, d: usize) -> usize {
        2 * d + self.structural.as_ref().map_or(0, |_| super::features::STRUCTURAL_DIM)
    }

    /// Training edges plus as many fresh uniform non-edges.
    fn training_batch(&self, rng: &mut ChaCha8Rng) -> Result<LinkData> {
        let negs = uniform_pairs(
            self.view.len(),
            self.positives.len(),
            |u, v| self.view.has_edge(u, v),
            rng,
        )?;
        let mut data = LinkData::default();
        for &p in &self.positives {
            data.push(p, true);
        }
        for p in negs {
            data.push(p, false);
        }
        Ok(data)
    }

    /// Positives from `edges` restricted to trained nodes, plus 1:1 uniform
    /// negatives avoiding both training edges and `edges`.
    pub fn labelled_pairs(&self, edges: &[(String, String)], seed: u64) -> Result<LinkData> {
        let mut pos = BTreeSet::new();
        for (a, b) in edges {
            if let (Some(&u), Some(&v)) = (self.view.index.get(a), self.view.index.get(b)) {
                if u != v {
                    pos.insert(ordered(u, v));
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let negs = uniform_pairs(
            self.view.len(),
            pos.len(),
            |u, v| self.view.has_edge(u, v) || pos.contains(&ordered(u, v)),
            &mut rng,
        )?;
        let mut data = LinkData::default();
        for &p in &pos {
            data.push(p, true);
        }
        for p in negs {
            data.push(p, false);
        }
        Ok(data)
    }
}

fn edges_of(g: &MediaGraph) -> Vec<(String, String)> {
    g.edges().map(|(k, _)| (k.u.clone(), k.v.clone())).collect()
}

/// Mean binary cross-entropy on logits and its gradient.
pub fn bce_with_logits(logits: &Matrix, labels: &[f64]) -> (f64, Matrix) {
    let m = labels.len() as f64;
    let mut grad = Matrix::zeros(logits.rows, 1);
    let mut loss = 0.0;
    for (i, (&l, &y)) in logits.data.iter().zip(labels).enumerate() {
        loss -= y * log_sigmoid(l) + (1.0 - y) * log_sigmoid(-l);
        grad.data[i] = (sigmoid(l) - y) / m;
    }
    (loss / m, grad)
}

/// Mean two-class softmax cross-entropy and its gradient.
pub fn softmax_cross_entropy(logits: &Matrix, labels: &[f64]) -> (f64, Matrix) {
    let m = labels.len() as f64;
    let mut grad = Matrix::zeros(logits.rows, 2);
    let mut loss = 0.0;
    for (i, &y) in labels.iter().enumerate() {
        let (a, b) = (logits.data[2 * i], logits.data[2 * i + 1]);
        let p1 = sigmoid(b - a);
        // log p1 = log σ(b - a), log p0 = log σ(a - b)
        loss -= if y == 1.0 {
            log_sigmoid(b - a)
        } else {
            log_sigmoid(a - b)
        };
        grad.data[2 * i] = ((1.0 - p1) - (1.0 - y)) / m;
        grad.data[2 * i + 1] = (p1 - y) / m;
    }
    (loss / m, grad)
}

/// Encoder plus sigmoid decoder, trained end to end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupervisedNet {
    pub encoder: Encoder,
    pub decoder: Mlp,
}

impl SupervisedNet {
    pub fn new(input_dim: usize, pair_dim_extra: usize, cfg: &SageConfig, rng: &mut ChaCha8Rng) -> Self {
        let encoder = Encoder::new(input_dim, cfg.hidden_dim, cfg.layers, cfg.dropout, rng);
        let decoder = Mlp::new(
            2 * cfg.hidden_dim + pair_dim_extra,
            cfg.decoder_hidden,
            1,
            cfg.final_dropout,
            rng,
        );
        SupervisedNet { encoder, decoder }
    }

    pub fn params(&mut self) -> Vec<&mut Param> {
        let mut p = self.encoder.params();
        p.extend(self.decoder.params());
        p
    }

    fn logits(&self, ctx: &TrainContext, data: &LinkData) -> Matrix {
        let (z, _) = self.encoder.forward(&ctx.adj, &ctx.x, None);
        let p = pair_matrix(&z, &data.pairs, ctx.structural.as_ref());
        self.decoder.forward(&p, None).0
    }

    /// Eval-mode loss.
    pub fn loss(&self, ctx: &TrainContext, data: &LinkData) -> f64 {
        bce_with_logits(&self.logits(ctx, data), &data.labels).0
    }

    /// Zeroes gradients, then runs forward and backward. Dropout is active
    /// only when `rng` is given.
    pub fn loss_and_grad(&mut self, ctx: &TrainContext, data: &LinkData, mut rng: Option<&mut ChaCha8Rng>) -> f64 {
        for p in self.params() {
            p.zero_grad();
        }
        let (z, ec) = self.encoder.forward(
            &ctx.adj,
            &ctx.x,
            rng.as_deref_mut().map(|r| r as &mut dyn rand::RngCore),
        );
        let p = pair_matrix(&z, &data.pairs, ctx.structural.as_ref());
        let (logits, dc) = self.decoder.forward(&p, rng.map(|r| r as &mut dyn rand::RngCore));
        let (loss, dlogits) = bce_with_logits(&logits, &data.labels);
        let dp = self.decoder.backward(&dc, &dlogits);
        let dz = scatter_pair_grad(&dp, &data.pairs, z.rows, z.cols);
        self.encoder.backward(&ctx.adj, &ec, &dz);
        loss
    }

    pub fn probabilities(&self, ctx: &TrainContext, data: &LinkData) -> Vec<f64> {
        self.logits(ctx, data).data.iter().map(|&l| sigmoid(l)).collect()
    }
}

/// Summary of one hyperparameter trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub config: SageConfig,
    pub validation_loss: f64,
    pub epochs_run: usize,
}

struct Trained<N> {
    net: N,
    record: TrialRecord,
}

fn check_finite(loss: f64, epoch: usize, context: &str) -> Result<()> {
    if loss.is_finite() {
        Ok(())
    } else {
        Err(Error::Diverged {
            epoch,
            context: context.to_string(),
        })
    }
}

fn supervised_trial(ctx: &TrainContext, val: &LinkData, cfg: &SageConfig, seed: u64) -> Result<Trained<SupervisedNet>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let extra = ctx.pair_dim(0);
    let mut net = SupervisedNet::new(ctx.x.cols, extra, cfg, &mut rng);
    let mut opt = Adam::new(cfg.lr, cfg.weight_decay);
    let mut best = (f64::INFINITY, net.clone(), 0);
    let mut epochs_run = 0;
    for epoch in 0..cfg.epochs {
        let batch = ctx.training_batch(&mut rng)?;
        let loss = net.loss_and_grad(ctx, &batch, Some(&mut rng));
        check_finite(loss, epoch, "supervised training loss")?;
        opt.step(&mut net.params());
        let val_loss = net.loss(ctx, val);
        check_finite(val_loss, epoch, "supervised validation loss")?;
        epochs_run = epoch + 1;
        if val_loss < best.0 {
            best = (val_loss, net.clone(), epoch);
        } else if epoch - best.2 >= cfg.patience {
            break;
        }
    }
    Ok(Trained {
        net: best.1,
        record: TrialRecord {
            config: cfg.clone(),
            validation_loss: best.0,
            epochs_run,
        },
    })
}

fn pick_best<N>(trials: Vec<Result<Trained<N>>>) -> Result<(Trained<N>, Vec<TrialRecord>)> {
    let trials: Vec<Trained<N>> = trials.into_iter().collect::<Result<_>>()?;
    let records: Vec<TrialRecord> = trials.iter().map(|t| t.record.clone()).collect();
    let best_idx = (0..trials.len())
        .min_by(|&a, &b| records[a].validation_loss.total_cmp(&records[b].validation_loss))
        .ok_or_else(|| Error::Config("empty search space".into()))?;
    let best = trials.into_iter().nth(best_idx).unwrap();
    Ok((best, records))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrainMode {
    Supervised,
    Unsupervised,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Decoder {
    /// One logit through a sigmoid.
    Sigmoid(Mlp),
    /// Two logits through a softmax; class 1 is "link".
    Softmax(Mlp),
}

/// A trained encoder and decoder with frozen node representations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkModel {
    pub mode: TrainMode,
    pub config: SageConfig,
    pub names: Vec<String>,
    pub encoder: Encoder,
    pub decoder: Decoder,
    /// Eval-mode encoder output on the training graph.
    pub embeddings: Matrix,
    pub structural: Option<StructuralFeatures>,
    pub validation_loss: f64,
    pub trials: Vec<TrialRecord>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl LinkModel {
    fn build(
        mode: TrainMode,
        config: SageConfig,
        ctx: &TrainContext,
        encoder: Encoder,
        decoder: Decoder,
        validation_loss: f64,
        trials: Vec<TrialRecord>,
    ) -> Self {
        let (embeddings, _) = encoder.forward(&ctx.adj, &ctx.x, None);
        let mut m = LinkModel {
            mode,
            config,
            names: ctx.view.names.clone(),
            encoder,
            decoder,
            embeddings,
            structural: ctx.structural.clone(),
            validation_loss,
            trials,
            index: HashMap::new(),
        };
        m.reindex();
        m
    }

    fn reindex(&mut self) {
        self.index = self.names.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
    }

    /// Width of the decoder input.
    pub fn pair_feature_dim(&self) -> usize {
        match &self.decoder {
            Decoder::Sigmoid(m) | Decoder::Softmax(m) => m.input_dim(),
        }
    }

    pub fn node_index(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    /// Link probabilities for index pairs.
    pub fn predict_indices(&self, pairs: &[(usize, usize)]) -> Vec<f64> {
        let p = pair_matrix(&self.embeddings, pairs, self.structural.as_ref());
        match &self.decoder {
            Decoder::Sigmoid(m) => m.forward(&p, None).0.data.iter().map(|&l| sigmoid(l)).collect(),
            Decoder::Softmax(m) => {
                let out = m.forward(&p, None).0;
                (0..pairs.len())
                    .map(|i| sigmoid(out.data[2 * i + 1] - out.data[2 * i]))
                    .collect()
            }
        }
    }

    pub fn predict_pairs(&self, pairs: &[(String, String)]) -> Result<Vec<f64>> {
        let idx = pairs
            .iter()
            .map(|(u, v)| {
                let (a, b) = (self.node_index(u)?, self.node_index(v)?);
                if a == b {
                    return Err(Error::Invalid(format!("self pair `{u}`")));
                }
                Ok((a, b))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.predict_indices(&idx))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, serde_json::to_vec(self)?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let mut m: LinkModel = serde_json::from_slice(&bytes).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        m.reindex();
        Ok(m)
    }
}

/// Probability that `u` and `v` link; symmetric in its arguments.
pub fn predict_link(model: &LinkModel, u: &str, v: &str) -> Result<f64> {
    Ok(model.predict_pairs(&[(u.to_string(), v.to_string())])?[0])
}

/// Joint encoder-decoder training on BCE with grid search; the trial with
/// the lowest validation loss wins.
pub fn train_supervised(
    train_g: &MediaGraph,
    val_g: &MediaGraph,
    feats: &NodeFeatureTable,
    cfg: &SageConfig,
    space: &SearchSpace,
    use_structural: bool,
) -> Result<LinkModel> {
    cfg.validate()?;
    let ctx = TrainContext::new(train_g, feats, use_structural, cfg.seed)?;
    let val = ctx.labelled_pairs(&edges_of(val_g), derive_seed(cfg.seed, 1))?;
    train_supervised_ctx(&ctx, &val, cfg, space)
}

pub fn train_supervised_ctx(
    ctx: &TrainContext,
    val: &LinkData,
    cfg: &SageConfig,
    space: &SearchSpace,
) -> Result<LinkModel> {
    if val.is_empty() {
        return Err(Error::EmptyValidation);
    }
    let trials = space.supervised_trials(cfg);
    for t in &trials {
        t.validate()?;
    }
    let results: Vec<Result<Trained<SupervisedNet>>> = trials
        .par_iter()
        .enumerate()
        .map(|(i, t)| supervised_trial(ctx, val, t, derive_seed(cfg.seed, 100 + i as u64)))
        .collect();
    let (best, records) = pick_best(results)?;
    Ok(LinkModel::build(
        TrainMode::Supervised,
        best.record.config.clone(),
        ctx,
        best.net.encoder,
        Decoder::Sigmoid(best.net.decoder),
        best.record.validation_loss,
        records,
    ))
}

/// Loss history of unsupervised encoder training.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EncoderHistory {
    pub loss: Vec<f64>,
    /// Unsupervised loss on the validation pairs, before each step.
    pub val_loss: Vec<f64>,
    pub lr: Vec<f64>,
}

/// Encoder-only loss and gradients for the unsupervised objective.
pub fn unsupervised_loss_and_grad(
    encoder: &mut Encoder,
    ctx: &TrainContext,
    positives: &[(usize, usize, f64)],
    negatives: &[(usize, usize)],
    q: f64,
    rng: Option<&mut ChaCha8Rng>,
) -> Result<f64> {
    for p in encoder.params() {
        p.zero_grad();
    }
    let (z, cache) = encoder.forward(&ctx.adj, &ctx.x, rng.map(|r| r as &mut dyn rand::RngCore));
    let (loss, dz) = unsupervised_loss(&z, positives, negatives, q)?;
    encoder.backward(&ctx.adj, &cache, &dz);
    Ok(loss)
}

/// Validation positives and negatives weigh the same during early stopping.
const VALIDATION_Q: f64 = 1.0;

/// The unsupervised objective on labelled validation pairs, eval mode.
fn validation_unsupervised_loss(encoder: &Encoder, ctx: &TrainContext, val: &LinkData, q: f64) -> Result<f64> {
    let (z, _) = encoder.forward(&ctx.adj, &ctx.x, None);
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (&(u, v), &y) in val.pairs.iter().zip(&val.labels) {
        if y == 1.0 {
            pos.push((u, v, 1.0));
        } else {
            neg.push((u, v));
        }
    }
    Ok(unsupervised_loss(&z, &pos, &neg, q)?.0)
}

/// Trains the encoder on the unsupervised loss with MIXED_50_50 negatives
/// drawn once, halving the learning rate when the training loss plateaus.
/// Early stopping watches the same objective on the validation pairs, and
/// the encoder with the lowest validation value is returned.
pub fn train_encoder_unsupervised(
    ctx: &TrainContext,
    val: &LinkData,
    cfg: &SageConfig,
) -> Result<(Encoder, EncoderHistory)> {
    cfg.validate()?;
    if !val.labels.contains(&1.0) {
        return Err(Error::EmptyValidation);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 2));
    let mut encoder = Encoder::new(ctx.x.cols, cfg.hidden_dim, cfg.layers, cfg.dropout, &mut rng);
    let positives: Vec<(usize, usize, f64)> = ctx.view.edge_list();
    let n_neg = ((positives.len() as f64) * cfg.q).round() as usize;
    let negatives = if n_neg > 0 {
        sample_negative_indices(&ctx.view, n_neg, NegativeMode::Mixed5050, derive_seed(cfg.seed, 3))?
    } else {
        Vec::new()
    };
    let mut opt = Adam::new(cfg.lr, cfg.weight_decay);
    let mut history = EncoderHistory::default();
    let mut best = (f64::INFINITY, encoder.clone(), 0usize);
    let mut plateau_best = f64::INFINITY;
    let mut since_plateau_best = 0;
    for epoch in 0..cfg.epochs {
        let val_loss = validation_unsupervised_loss(&encoder, ctx, val, VALIDATION_Q)?;
        check_finite(val_loss, epoch, "unsupervised validation loss")?;
        if val_loss < best.0 {
            best = (val_loss, encoder.clone(), epoch);
        } else if epoch - best.2 >= cfg.patience {
            break;
        }
        let loss = unsupervised_loss_and_grad(&mut encoder, ctx, &positives, &negatives, cfg.q, Some(&mut rng))?;
        check_finite(loss, epoch, "unsupervised encoder loss")?;
        history.loss.push(loss);
        history.val_loss.push(val_loss);
        history.lr.push(opt.lr);
        if loss < plateau_best * (1.0 - 1e-4) {
            plateau_best = loss;
            since_plateau_best = 0;
        } else {
            since_plateau_best += 1;
            if since_plateau_best > cfg.plateau_patience {
                opt.lr *= 0.5;
                since_plateau_best = 0;
            }
        }
        opt.step(&mut encoder.params());
    }
    Ok((best.1, history))
}

fn decoder_trial(
    z: &Matrix,
    ctx: &TrainContext,
    val: &LinkData,
    cfg: &SageConfig,
    hidden: usize,
    seed: u64,
) -> Result<Trained<Mlp>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pair_dim = ctx.pair_dim(z.cols);
    let mut mlp = Mlp::new(pair_dim, hidden, 2, cfg.final_dropout, &mut rng);
    let mut opt = Adam::new(cfg.lr, cfg.weight_decay);
    let val_p = pair_matrix(z, &val.pairs, ctx.structural.as_ref());
    let mut best = (f64::INFINITY, mlp.clone(), 0);
    let mut epochs_run = 0;
    for epoch in 0..cfg.epochs {
        let batch = ctx.training_batch(&mut rng)?;
        let p = pair_matrix(z, &batch.pairs, ctx.structural.as_ref());
        for prm in mlp.params() {
            prm.zero_grad();
        }
        let (logits, cache) = mlp.forward(&p, Some(&mut rng as &mut dyn rand::RngCore));
        let (loss, dl) = softmax_cross_entropy(&logits, &batch.labels);
        check_finite(loss, epoch, "decoder training loss")?;
        mlp.backward(&cache, &dl);
        opt.step(&mut mlp.params());
        let val_loss = softmax_cross_entropy(&mlp.forward(&val_p, None).0, &val.labels).0;
        check_finite(val_loss, epoch, "decoder validation loss")?;
        epochs_run = epoch + 1;
        if val_loss < best.0 {
            best = (val_loss, mlp.clone(), epoch);
        } else if epoch - best.2 >= cfg.patience {
            break;
        }
    }
    Ok(Trained {
        net: best.1,
        record: TrialRecord {
            config: SageConfig {
                decoder_hidden: hidden,
                ..cfg.clone()
            },
            validation_loss: best.0,
            epochs_run,
        },
    })
}

/// Trains a softmax decoder on frozen encoder outputs, grid-searching the
/// hidden width.
pub fn train_decoder(
    ctx: &TrainContext,
    encoder: Encoder,
    val: &LinkData,
    cfg: &SageConfig,
    space: &SearchSpace,
) -> Result<LinkModel> {
    if val.is_empty() {
        return Err(Error::EmptyValidation);
    }
    let (z, _) = encoder.forward(&ctx.adj, &ctx.x, None);
    let widths = space.decoder_trials(cfg);
    let results: Vec<Result<Trained<Mlp>>> = widths
        .par_iter()
        .enumerate()
        .map(|(i, &h)| decoder_trial(&z, ctx, val, cfg, h, derive_seed(cfg.seed, 200 + i as u64)))
        .collect();
    let (best, records) = pick_best(results)?;
    Ok(LinkModel::build(
        TrainMode::Unsupervised,
        best.record.config.clone(),
        ctx,
        encoder,
        Decoder::Softmax(best.net),
        best.record.validation_loss,
        records,
    ))
}

/// Unsupervised encoder, then a decoder on its frozen outputs.
pub fn train_unsupervised(
    train_g: &MediaGraph,
    val_g: &MediaGraph,
    feats: &NodeFeatureTable,
    cfg: &SageConfig,
    space: &SearchSpace,
    use_structural: bool,
) -> Result<LinkModel> {
    cfg.validate()?;
    let ctx = TrainContext::new(train_g, feats, use_structural, cfg.seed)?;
    let val = ctx.labelled_pairs(&edges_of(val_g), derive_seed(cfg.seed, 1))?;
    train_unsupervised_ctx(&ctx, &val, cfg, space)
}

pub fn train_unsupervised_ctx(
    ctx: &TrainContext,
    val: &LinkData,
    cfg: &SageConfig,
    space: &SearchSpace,
) -> Result<LinkModel> {
    if val.is_empty() {
        return Err(Error::EmptyValidation);
    }
    let (encoder, _) = train_encoder_unsupervised(ctx, val, cfg)?;
    train_decoder(ctx, encoder, val, cfg, space)
}
