//! Offline evaluation: screen and predict every held-out edge, score the
//! predictions by percent error, and export the aggregates.

use std::cmp::Ordering;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{BipartiteGraph, RatingEdge};
use crate::ingest::{seeded_permutation, SplitConfig};
use crate::recommender::{RecommendError, Recommender, RecommenderConfig};
use crate::scalar::{fmt_sig6, round_sig6, Scalar};

/// Default histogram bin width, in percentage points.
pub const DEFAULT_BIN_WIDTH: f64 = 6.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("actual rating must be positive to compute a percent error")]
    ZeroActual,
    #[error("histogram bin width must be positive and finite, got {0}")]
    BadBinWidth(f64),
    #[error(transparent)]
    Recommend(#[from] RecommendError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Predicted,
    InsufficientData,
    NoConfidence,
    ColdStart,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Predicted => "predicted",
            Outcome::InsufficientData => "insufficient_data",
            Outcome::NoConfidence => "no_confidence",
            Outcome::ColdStart => "cold_start",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalRecord<T> {
    pub bottom: String,
    pub top: String,
    pub actual: T,
    pub predicted: Option<T>,
    pub percent_error: Option<T>,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub bin_low: f64,
    pub bin_high: f64,
    pub count: usize,
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub recommender: RecommenderConfig,
    pub split: Option<SplitConfig>,
    pub max_test_edges: Option<usize>,
    pub bin_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub n_test: usize,
    pub n_predicted: usize,
    /// `n_predicted / n_test`; 0 when there are no test edges.
    pub coverage: f64,
    /// False when `n_test == 0` and `coverage` is a placeholder.
    pub coverage_defined: bool,
    pub mean_error: Option<f64>,
    pub median_error: Option<f64>,
    pub histogram: Vec<HistogramBin>,
    pub config_echo: ConfigEcho,
}

impl EvalSummary {
    /// Pretty JSON with every float rounded to six significant digits.
    pub fn to_json(&self) -> String {
        let mut rounded = self.clone();
        rounded.coverage = round_sig6(rounded.coverage);
        rounded.mean_error = rounded.mean_error.map(round_sig6);
        rounded.median_error = rounded.median_error.map(round_sig6);
        for bin in &mut rounded.histogram {
            bin.bin_low = round_sig6(bin.bin_low);
            bin.bin_high = round_sig6(bin.bin_high);
        }
        let mut s = serde_json::to_string_pretty(&rounded).expect("summary serializes");
        s.push('\n');
        s
    }
}

/// `100 * |predicted - actual| / actual`.
pub fn percent_error<T: Scalar>(predicted: &T, actual: &T) -> Result<T, EvalError> {
    if *actual <= T::zero() {
        return Err(EvalError::ZeroActual);
    }
    Ok(T::from_count(100) * (predicted.clone() - actual.clone()).abs() / actual.clone())
}

/// Fixed-width bins `[0, w), [w, 2w), ...` reaching the largest error.
/// Empty interior bins are kept so the bins tile the range.
pub fn histogram(errors: &[f64], bin_width: f64) -> Result<Vec<HistogramBin>, EvalError> {
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(EvalError::BadBinWidth(bin_width));
    }
    let Some(max) = errors.iter().copied().reduce(f64::max) else {
        return Ok(Vec::new());
    };
    let bin_of = |e: f64| (e.max(0.0) / bin_width).floor() as usize;
    let mut counts = vec![0usize; bin_of(max) + 1];
    for &e in errors {
        counts[bin_of(e)] += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| HistogramBin {
            bin_low: i as f64 * bin_width,
            bin_high: (i + 1) as f64 * bin_width,
            count,
        })
        .collect())
}

pub fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let mid = v.len() / 2;
    Some(if v.len().is_multiple_of(2) { (v[mid - 1] + v[mid]) / 2.0 } else { v[mid] })
}

/// Seeded uniform sample of `max` test edges, kept in their original order.
/// Uses the same generator as the train/test split.
pub fn subsample_test<T: Clone>(test: &[RatingEdge<T>], max: usize, seed: u64) -> Vec<RatingEdge<T>> {
    if test.len() <= max {
        return test.to_vec();
    }
    let mut picked = seeded_permutation(test.len(), seed);
    picked.truncate(max);
    picked.sort_unstable();
    picked.into_iter().map(|i| test[i].clone()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalOptions {
    pub bin_width: f64,
    /// Recorded in the summary only; sampling is the caller's job.
    pub split: Option<SplitConfig>,
    pub max_test_edges: Option<usize>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { bin_width: DEFAULT_BIN_WIDTH, split: None, max_test_edges: None }
    }
}

fn evaluate_edge<T: Scalar>(rec: &Recommender<'_, T>, edge: &RatingEdge<T>) -> Result<EvalRecord<T>, EvalError> {
    let graph = rec.graph();
    let mut record = EvalRecord {
        bottom: edge.bottom.clone(),
        top: edge.top.clone(),
        actual: edge.weight.clone(),
        predicted: None,
        percent_error: None,
        outcome: Outcome::ColdStart,
    };
    if !graph.has_bottom(&edge.bottom) || !graph.has_top(&edge.top) {
        return Ok(record);
    }
    record.outcome = match rec.assess_and_predict(&edge.bottom, &edge.top) {
        Ok((_, None)) => Outcome::InsufficientData,
        Ok((_, Some(Ok(prediction)))) => {
            record.percent_error = Some(percent_error(&prediction.p, &edge.weight)?);
            record.predicted = Some(prediction.p);
            Outcome::Predicted
        }
        Ok((_, Some(Err(RecommendError::NoConfidence { .. })))) => Outcome::NoConfidence,
        // a test pair already present in the training graph has nothing to predict
        Err(RecommendError::EdgeAlreadyExists { .. }) => Outcome::InsufficientData,
        Ok((_, Some(Err(e)))) | Err(e) => return Err(e.into()),
    };
    Ok(record)
}

/// Screens and predicts every test edge against `train`.
///
/// Records come back in test-edge order regardless of how the work was
/// scheduled. Averages come from `train` only.
pub fn evaluate<T: Scalar>(
    train: &BipartiteGraph<T>,
    test: &[RatingEdge<T>],
    cfg: &RecommenderConfig,
    opts: &EvalOptions,
) -> Result<(Vec<EvalRecord<T>>, EvalSummary), EvalError> {
    if !(opts.bin_width > 0.0 && opts.bin_width.is_finite()) {
        return Err(EvalError::BadBinWidth(opts.bin_width));
    }
    let rec = Recommender::new(train, cfg.clone())?;
    let records = test
        .par_iter()
        .map(|edge| evaluate_edge(&rec, edge))
        .collect::<Result<Vec<_>, _>>()?;
    let summary = summarize(&records, cfg, opts)?;
    Ok((records, summary))
}

pub fn summarize<T: Scalar>(
    records: &[EvalRecord<T>],
    cfg: &RecommenderConfig,
    opts: &EvalOptions,
) -> Result<EvalSummary, EvalError> {
    let errors: Vec<f64> = records.iter().filter_map(|r| r.percent_error.as_ref().map(T::to_report)).collect();
    let n_test = records.len();
    let n_predicted = errors.len();
    Ok(EvalSummary {
        n_test,
        n_predicted,
        coverage: if n_test == 0 { 0.0 } else { n_predicted as f64 / n_test as f64 },
        coverage_defined: n_test > 0,
        mean_error: mean(&errors),
        median_error: median(&errors),
        histogram: histogram(&errors, opts.bin_width)?,
        config_echo: ConfigEcho {
            recommender: cfg.clone(),
            split: opts.split,
            max_test_edges: opts.max_test_edges,
            bin_width: opts.bin_width,
        },
    })
}

/// Runs `f` on a rayon pool limited to `threads` workers (0 = rayon's default).
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

pub fn write_histogram_csv<W: Write>(bins: &[HistogramBin], mut out: W) -> io::Result<()> {
    writeln!(out, "bin_low,bin_high,count")?;
    for b in bins {
        writeln!(out, "{},{},{}", fmt_sig6(b.bin_low), fmt_sig6(b.bin_high), b.count)?;
    }
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

pub fn write_records_csv<T: Scalar, W: Write>(records: &[EvalRecord<T>], mut out: W) -> io::Result<()> {
    writeln!(out, "bottom,top,actual,predicted,percent_error,outcome")?;
    let opt = |v: &Option<T>| v.as_ref().map(|x| fmt_sig6(x.to_report())).unwrap_or_default();
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            csv_field(&r.bottom),
            csv_field(&r.top),
            fmt_sig6(r.actual.to_report()),
            opt(&r.predicted),
            opt(&r.percent_error),
            r.outcome.as_str()
        )?;
    }
    Ok(())
}
