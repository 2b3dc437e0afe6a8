use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const DEFAULT_RESAMPLES: usize = 1000;
pub const DEFAULT_LEVEL: f64 = 0.95;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl Confusion {
    /// Counts at threshold 0.5 (a score of exactly 0.5 is positive).
    pub fn from_scores(preds: &[f64], labels: &[bool]) -> Self {
        let mut c = Confusion::default();
        for (&p, &y) in preds.iter().zip(labels) {
            c.add(p >= 0.5, y);
        }
        c
    }

    pub fn add(&mut self, predicted: bool, actual: bool) {
        match (predicted, actual) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, false) => self.tn += 1,
            (false, true) => self.fn_ += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Accuracy,
    F1,
    Precision,
    Recall,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    pub confusion: Confusion,
    /// No positive predictions; precision reported as 0.
    pub precision_zero_division: bool,
    /// No positive labels; recall reported as 0.
    pub recall_zero_division: bool,
}

impl Metrics {
    pub fn from_confusion(c: Confusion) -> Self {
        let ratio = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision = ratio(c.tp, c.tp + c.fp);
        let recall = ratio(c.tp, c.tp + c.fn_);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Metrics {
            accuracy: ratio(c.tp + c.tn, c.total()),
            f1,
            precision,
            recall,
            confusion: c,
            precision_zero_division: c.tp + c.fp == 0,
            recall_zero_division: c.tp + c.fn_ == 0,
        }
    }

    pub fn get(&self, kind: MetricKind) -> f64 {
        match kind {
            MetricKind::Accuracy => self.accuracy,
            MetricKind::F1 => self.f1,
            MetricKind::Precision => self.precision,
            MetricKind::Recall => self.recall,
        }
    }

    /// Support as `(positives, negatives)`.
    pub fn support(&self) -> (u64, u64) {
        let c = &self.confusion;
        (c.tp + c.fn_, c.tn + c.fp)
    }
}

fn check_inputs(preds: &[f64], labels: &[bool]) -> Result<()> {
    if preds.is_empty() {
        return Err(Error::Invalid("no predictions to evaluate".into()));
    }
    if preds.len() != labels.len() {
        return Err(Error::Invalid(format!(
            "{} predictions for {} labels",
            preds.len(),
            labels.len()
        )));
    }
    Ok(())
}

pub fn evaluate(preds: &[f64], labels: &[bool]) -> Result<Metrics> {
    check_inputs(preds, labels)?;
    Ok(Metrics::from_confusion(Confusion::from_scores(preds, labels)))
}

/// `None` when the metric's denominator is zero.
fn defined_value(c: &Confusion, kind: MetricKind) -> Option<f64> {
    let m = Metrics::from_confusion(*c);
    let defined = match kind {
        MetricKind::Accuracy => true,
        MetricKind::Precision => !m.precision_zero_division,
        MetricKind::Recall => !m.recall_zero_division,
        MetricKind::F1 => c.tp + c.fp + c.fn_ > 0,
    };
    defined.then(|| m.get(kind))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapCi {
    pub level: f64,
    pub lower: f64,
    pub upper: f64,
    pub point: f64,
    pub resamples: usize,
    /// Resamples on which the metric was undefined and skipped.
    pub undefined: usize,
}

impl BootstrapCi {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// Linear interpolation between order statistics of sorted `xs`.
fn quantile(xs: &[f64], q: f64) -> f64 {
    let pos = q * (xs.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    xs[lo] + (xs[hi] - xs[lo]) * (pos - lo as f64)
}

/// Percentile bootstrap over (prediction, label) pairs.
pub fn bootstrap_ci(
    preds: &[f64],
    labels: &[bool],
    kind: MetricKind,
    resamples: usize,
    level: f64,
    seed: u64,
) -> Result<BootstrapCi> {
    check_inputs(preds, labels)?;
    if preds.len() < 2 {
        return Err(Error::Invalid("bootstrap needs at least two test items".into()));
    }
    if resamples == 0 || !(level > 0.0 && level < 1.0) {
        return Err(Error::Config(
            "bootstrap needs resamples > 0 and level in (0, 1)".into(),
        ));
    }
    let point = evaluate(preds, labels)?.get(kind);
    let hits: Vec<bool> = preds.iter().map(|&p| p >= 0.5).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = preds.len();
    let mut values = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let mut c = Confusion::default();
        for _ in 0..n {
            let i = rng.gen_range(0..n);
            c.add(hits[i], labels[i]);
        }
        if let Some(v) = defined_value(&c, kind) {
            values.push(v);
        }
    }
    let undefined = resamples - values.len();
    if 2 * undefined > resamples {
        return Err(Error::UndefinedMetric { undefined, resamples });
    }
    values.sort_by(f64::total_cmp);
    let alpha = (1.0 - level) / 2.0;
    Ok(BootstrapCi {
        level,
        lower: quantile(&values, alpha),
        upper: quantile(&values, 1.0 - alpha),
        point,
        resamples,
        undefined,
    })
}
