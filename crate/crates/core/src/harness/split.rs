use chrono::{Datelike, Months, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::graph::{slice_by_time, EdgeAttr, EdgeKey, MediaGraph, TimeWindow};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Regime {
    OneTime,
    Incremental,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::OneTime => "ONE_TIME",
            Regime::Incremental => "INCREMENTAL",
        }
    }
}

/// Chronological split boundaries. ONE_TIME uses the three end dates;
/// INCREMENTAL uses one cutoff month per rolling split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub regime: Regime,
    pub train_end: NaiveDate,
    pub val_end: NaiveDate,
    pub test_end: NaiveDate,
    pub cutoffs: Vec<NaiveDate>,
}

pub fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).expect("valid calendar date")
}

pub fn month_start(d: NaiveDate) -> NaiveDate {
    date(d.year(), d.month(), 1)
}

pub fn month_end(d: NaiveDate) -> NaiveDate {
    month_start(d)
        .checked_add_months(Months::new(1))
        .unwrap()
        .pred_opt()
        .unwrap()
}

/// The calendar month `k` months after the month of `d`.
pub fn month_window(d: NaiveDate, k: u32) -> TimeWindow {
    let start = month_start(d).checked_add_months(Months::new(k)).unwrap();
    TimeWindow::new(start, month_end(start)).unwrap()
}

impl SplitSpec {
    pub fn one_time(train_end: NaiveDate, val_end: NaiveDate, test_end: NaiveDate) -> Result<Self> {
        let s = SplitSpec {
            regime: Regime::OneTime,
            train_end,
            val_end,
            test_end,
            cutoffs: Vec::new(),
        };
        s.validate()?;
        Ok(s)
    }

    /// Rolling splits; each cutoff is read as the last day of its month.
    pub fn incremental(cutoffs: Vec<NaiveDate>) -> Result<Self> {
        let cutoffs: Vec<NaiveDate> = cutoffs.into_iter().map(month_end).collect();
        let last = *cutoffs
            .last()
            .ok_or_else(|| Error::Config("INCREMENTAL needs at least one cutoff".into()))?;
        let s = SplitSpec {
            regime: Regime::Incremental,
            train_end: cutoffs[0],
            val_end: month_window(last, 1).end,
            test_end: month_window(last, 2).end,
            cutoffs,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.train_end < self.val_end && self.val_end < self.test_end) {
            return Err(Error::Config(format!(
                "split dates must satisfy train_end < val_end < test_end, got {} / {} / {}",
                self.train_end, self.val_end, self.test_end
            )));
        }
        if self.regime == Regime::Incremental {
            if self.cutoffs.is_empty() {
                return Err(Error::Config("INCREMENTAL needs at least one cutoff".into()));
            }
            if self.cutoffs.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Config(
                    "rolling cutoffs must be strictly increasing months".into(),
                ));
            }
        }
        Ok(())
    }
}

/// One train/validate/test triple.
#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    /// `one-time` or the test month, e.g. `2021-08`.
    pub label: String,
    pub train_window: TimeWindow,
    pub val_window: TimeWindow,
    pub test_window: TimeWindow,
    pub train_g: MediaGraph,
    pub val_edges: Vec<(EdgeKey, EdgeAttr)>,
    pub test_edges: Vec<(EdgeKey, EdgeAttr)>,
}

fn first_formed_in(g: &MediaGraph, train_g: &MediaGraph, w: &TimeWindow) -> Vec<(EdgeKey, EdgeAttr)> {
    g.edges()
        .filter(|(k, a)| w.contains(a.first) && train_g.contains_node(&k.u) && train_g.contains_node(&k.v))
        .map(|(k, a)| (k.clone(), *a))
        .collect()
}

fn split_once(g: &MediaGraph, label: String, train_end: NaiveDate, val: TimeWindow, test: TimeWindow) -> Result<Split> {
    let (first, _) = g
        .date_range()
        .ok_or_else(|| Error::Invalid("graph has no edges".into()))?;
    if train_end < first {
        return Err(Error::Invalid(format!(
            "train_end {train_end} precedes the first edge ({first})"
        )));
    }
    let train_window = TimeWindow::new(first, train_end)?;
    let train_g = slice_by_time(g, &train_window);
    let val_edges = first_formed_in(g, &train_g, &val);
    let test_edges = first_formed_in(g, &train_g, &test);
    if test_edges.is_empty() {
        return Err(Error::EmptySplit {
            window: test.to_string(),
        });
    }
    Ok(Split {
        label,
        train_window,
        val_window: val,
        test_window: test,
        train_g,
        val_edges,
        test_edges,
    })
}

/// Train on edges first formed up to the train end; validation and test
/// positives are later edges whose endpoints both appear in training.
pub fn make_split(g: &MediaGraph, spec: &SplitSpec) -> Result<Vec<Split>> {
    spec.validate()?;
    match spec.regime {
        Regime::OneTime => {
            let val = TimeWindow::new(spec.train_end.succ_opt().unwrap(), spec.val_end)?;
            let test = TimeWindow::new(spec.val_end.succ_opt().unwrap(), spec.test_end)?;
            Ok(vec![split_once(g, "one-time".into(), spec.train_end, val, test)?])
        }
        Regime::Incremental => spec
            .cutoffs
            .iter()
            .map(|&t| {
                let test = month_window(t, 2);
                let label = test.start.format("%Y-%m").to_string();
                split_once(g, label, month_end(t), month_window(t, 1), test)
            })
            .collect(),
    }
}
