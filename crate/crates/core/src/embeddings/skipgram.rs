use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::walks::derive_seed;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SkipGramConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub lr: f64,
    pub seed: u64,
    /// Lock-free multi-threaded updates. Faster, but results then depend on
    /// thread interleaving.
    pub parallel: bool,
}

impl Default for SkipGramConfig {
    fn default() -> Self {
        SkipGramConfig {
            dim: 64,
            window: 15,
            negatives: 5,
            epochs: 5,
            lr: 0.025,
            seed: 7,
            parallel: false,
        }
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `log σ(x)` without overflow.
pub(crate) fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Negative-sampling loss of one (center, context) pair,
/// `-log σ(w·c) - Σ_k log σ(-w·n_k)`.
pub fn sgns_loss(center: &[f64], context: &[f64], negatives: &[&[f64]]) -> f64 {
    -log_sigmoid(dot(center, context)) - negatives.iter().map(|n| log_sigmoid(-dot(center, n))).sum::<f64>()
}

/// Gradients of [`sgns_loss`] with respect to the center vector, the
/// context vector and each negative vector.
pub fn sgns_gradients(center: &[f64], context: &[f64], negatives: &[&[f64]]) -> (Vec<f64>, Vec<f64>, Vec<Vec<f64>>) {
    let g_pos = sigmoid(dot(center, context)) - 1.0;
    let mut d_center: Vec<f64> = context.iter().map(|c| g_pos * c).collect();
    let d_context: Vec<f64> = center.iter().map(|w| g_pos * w).collect();
    let mut d_negs = Vec::with_capacity(negatives.len());
    for n in negatives {
        let g_neg = sigmoid(dot(center, n));
        for (d, x) in d_center.iter_mut().zip(n.iter()) {
            *d += g_neg * x;
        }
        d_negs.push(center.iter().map(|w| g_neg * w).collect());
    }
    (d_center, d_context, d_negs)
}

/// Parameter storage that the SGD step reads and writes.
trait Params {
    fn get(&self, i: usize) -> f64;
    fn add(&mut self, i: usize, delta: f64);
}

impl Params for Vec<f64> {
    fn get(&self, i: usize) -> f64 {
        self[i]
    }
    fn add(&mut self, i: usize, delta: f64) {
        self[i] += delta;
    }
}

/// Shared, unsynchronized view for the lock-free mode. Reads and writes are
/// individually atomic; read-modify-write sequences may interleave.
struct Shared<'a>(&'a [AtomicU64]);

impl Params for Shared<'_> {
    fn get(&self, i: usize) -> f64 {
        f64::from_bits(self.0[i].load(Ordering::Relaxed))
    }
    fn add(&mut self, i: usize, delta: f64) {
        let v = self.get(i) + delta;
        self.0[i].store(v.to_bits(), Ordering::Relaxed);
    }
}

/// Unigram^0.75 sampler over node ids.
struct NoiseTable {
    cumulative: Vec<f64>,
}

impl NoiseTable {
    fn new(counts: &[usize]) -> Self {
        let mut acc = 0.0;
        let cumulative = counts
            .iter()
            .map(|&c| {
                acc += (c as f64).powf(0.75);
                acc
            })
            .collect();
        NoiseTable { cumulative }
    }

    fn sample(&self, rng: &mut impl Rng) -> usize {
        let total = self.cumulative[self.cumulative.len() - 1];
        let draw = rng.gen::<f64>() * total;
        self.cumulative
            .partition_point(|&c| c <= draw)
            .min(self.cumulative.len() - 1)
    }
}

#[allow(clippy::too_many_arguments)]
fn sgd_pair<P: Params>(
    input: &mut P,
    output: &mut P,
    dim: usize,
    center: usize,
    context: usize,
    negs: &[usize],
    lr: f64,
    grad: &mut [f64],
) -> f64 {
    grad.iter_mut().for_each(|g| *g = 0.0);
    let mut loss = 0.0;
    let c0 = center * dim;
    for (target, label) in std::iter::once((context, 1.0)).chain(negs.iter().map(|&n| (n, 0.0))) {
        let t0 = target * dim;
        let score: f64 = (0..dim).map(|k| input.get(c0 + k) * output.get(t0 + k)).sum();
        loss -= if label == 1.0 {
            log_sigmoid(score)
        } else {
            log_sigmoid(-score)
        };
        let g = (sigmoid(score) - label) * lr;
        for (k, gk) in grad.iter_mut().enumerate() {
            *gk += g * output.get(t0 + k);
            output.add(t0 + k, -g * input.get(c0 + k));
        }
    }
    for (k, g) in grad.iter().enumerate() {
        input.add(c0 + k, -g);
    }
    loss
}

/// Trained skip-gram vectors plus per-epoch mean pair loss.
#[derive(Debug, Clone)]
pub struct SkipGramResult {
    /// Row-major `n x dim` center-role vectors.
    pub vectors: Vec<f64>,
    pub epoch_loss: Vec<f64>,
}

fn pairs_in(walk: &[u32], window: usize) -> usize {
    let l = walk.len();
    (0..l).map(|i| i.min(window) + (l - 1 - i).min(window)).sum()
}

/// Skip-gram with negative sampling over `n` node ids, SGD with linearly
/// decaying learning rate. Context vectors start at zero.
pub fn train_skipgram(walks: &[Vec<u32>], n: usize, cfg: &SkipGramConfig) -> Result<SkipGramResult> {
    if cfg.dim == 0 || cfg.window == 0 {
        return Err(Error::Config("dim and window must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let bound = 0.5 / cfg.dim as f64;
    let mut input: Vec<f64> = (0..n * cfg.dim).map(|_| rng.gen_range(-bound..bound)).collect();
    if cfg.epochs == 0 {
        return Ok(SkipGramResult {
            vectors: input,
            epoch_loss: Vec::new(),
        });
    }
    let per_epoch: usize = walks.iter().map(|w| pairs_in(w, cfg.window)).sum();
    if per_epoch == 0 {
        return Err(Error::DegenerateTraining);
    }
    let mut counts = vec![0usize; n];
    for w in walks {
        for &v in w {
            counts[v as usize] += 1;
        }
    }
    let noise = NoiseTable::new(&counts);
    let mut output = vec![0.0f64; n * cfg.dim];
    let total = (per_epoch * cfg.epochs) as f64;
    let min_lr = cfg.lr * 1e-4;
    let mut epoch_loss = Vec::with_capacity(cfg.epochs);

    if cfg.parallel {
        let inp: Vec<AtomicU64> = input.iter().map(|x| AtomicU64::new(x.to_bits())).collect();
        let out: Vec<AtomicU64> = output.iter().map(|x| AtomicU64::new(x.to_bits())).collect();
        let offsets: Vec<usize> = walks
            .iter()
            .scan(0, |acc, w| {
                let start = *acc;
                *acc += pairs_in(w, cfg.window);
                Some(start)
            })
            .collect();
        for epoch in 0..cfg.epochs {
            let loss: f64 = walks
                .par_iter()
                .enumerate()
                .map(|(wi, walk)| {
                    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed ^ epoch as u64, wi as u64));
                    let (mut i_p, mut o_p) = (Shared(&inp), Shared(&out));
                    let mut grad = vec![0.0; cfg.dim];
                    let mut done = epoch * per_epoch + offsets[wi];
                    let mut loss = 0.0;
                    walk_pairs(walk, cfg.window, |c, o| {
                        let lr = (cfg.lr * (1.0 - done as f64 / total)).max(min_lr);
                        let negs = draw_negatives(&noise, o, cfg.negatives, &mut rng);
                        loss += sgd_pair(&mut i_p, &mut o_p, cfg.dim, c, o, &negs, lr, &mut grad);
                        done += 1;
                    });
                    loss
                })
                .sum();
            epoch_loss.push(loss / per_epoch as f64);
        }
        input = inp.into_iter().map(|a| f64::from_bits(a.into_inner())).collect();
    } else {
        let mut grad = vec![0.0; cfg.dim];
        let mut done = 0usize;
        for _ in 0..cfg.epochs {
            let mut loss = 0.0;
            for walk in walks {
                walk_pairs(walk, cfg.window, |c, o| {
                    let lr = (cfg.lr * (1.0 - done as f64 / total)).max(min_lr);
                    let negs = draw_negatives(&noise, o, cfg.negatives, &mut rng);
                    loss += sgd_pair(&mut input, &mut output, cfg.dim, c, o, &negs, lr, &mut grad);
                    done += 1;
                });
            }
            epoch_loss.push(loss / per_epoch as f64);
        }
    }
    if input.iter().any(|x| !x.is_finite()) {
        return Err(Error::Diverged {
            epoch: cfg.epochs,
            context: "skip-gram".into(),
        });
    }
    Ok(SkipGramResult {
        vectors: input,
        epoch_loss,
    })
}

fn walk_pairs(walk: &[u32], window: usize, mut f: impl FnMut(usize, usize)) {
    for (i, &c) in walk.iter().enumerate() {
        let lo = i.saturating_sub(window);
        let hi = (i + window).min(walk.len() - 1);
        for (j, &o) in walk.iter().enumerate().take(hi + 1).skip(lo) {
            if j != i {
                f(c as usize, o as usize);
            }
        }
    }
}

/// Draws `k` noise ids, redrawing any that equal the true context.
fn draw_negatives(noise: &NoiseTable, context: usize, k: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut out = Vec::with_capacity(k);
    let mut tries = 0;
    while out.len() < k && tries < 10 * k + 10 {
        let s = noise.sample(rng);
        tries += 1;
        if s != context {
            out.push(s);
        }
    }
    out
}
