//! Dataset parsing and the seeded train/test split.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{RatingEdge, RatingRange};
use crate::scalar::Scalar;

/// Supported line grammars.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetFormat {
    /// `user\titem\trating\ttimestamp`, all integers (MovieLens `u.data`).
    MovieLensTab,
    /// `user item rating [ignored...]`, any run of spaces/tabs, `#` comments.
    EpinionsWhitespace,
    /// `bottom\ttop\trating[\ttimestamp]`, the tool's own interchange format.
    CanonicalTsv,
}

impl FromStr for DatasetFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "movielens" => Ok(DatasetFormat::MovieLensTab),
            "epinions" => Ok(DatasetFormat::EpinionsWhitespace),
            "tsv" => Ok(DatasetFormat::CanonicalTsv),
            other => Err(format!("unknown format `{other}` (expected movielens, epinions or tsv)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("line {line}: rating outside the declared range")]
    WeightOutOfRange { line: usize },
    #[error("need at least 2 edges to split, got {0}")]
    TooFewEdges(usize),
    #[error("train fraction must lie strictly between 0 and 1, got {0}")]
    BadFraction(f64),
}

fn parse_err(line: usize, reason: impl Into<String>) -> IngestError {
    IngestError::Parse { line, reason: reason.into() }
}

fn parse_rating(field: &str, line: usize, integral: bool) -> Result<f64, IngestError> {
    if integral {
        return field
            .parse::<i64>()
            .map(|v| v as f64)
            .map_err(|_| parse_err(line, format!("non-integer rating `{field}`")));
    }
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(parse_err(line, format!("non-numeric rating `{field}`"))),
    }
}

fn parse_timestamp(field: &str, line: usize) -> Result<i64, IngestError> {
    field
        .parse::<i64>()
        .map_err(|_| parse_err(line, format!("non-integer timestamp `{field}`")))
}

/// bottom, top, weight, timestamp
type RawRow = (String, String, f64, Option<i64>);

fn parse_line(
    text: &str,
    line: usize,
    format: DatasetFormat,
) -> Result<Option<RawRow>, IngestError> {
    let text = text.strip_suffix('\r').unwrap_or(text);
    if text.trim().is_empty() {
        return Ok(None);
    }
    match format {
        DatasetFormat::MovieLensTab => {
            let fields: Vec<&str> = text.split('\t').collect();
            if fields.len() != 4 {
                return Err(parse_err(line, format!("expected 4 tab-separated fields, got {}", fields.len())));
            }
            for (name, f) in [("user", fields[0]), ("item", fields[1])] {
                if f.parse::<u64>().is_err() {
                    return Err(parse_err(line, format!("non-integer {name} id `{f}`")));
                }
            }
            let rating = parse_rating(fields[2], line, true)?;
            let ts = parse_timestamp(fields[3], line)?;
            Ok(Some((fields[0].to_owned(), fields[1].to_owned(), rating, Some(ts))))
        }
        DatasetFormat::EpinionsWhitespace => {
            if text.trim_start().starts_with('#') {
                return Ok(None);
            }
            let fields: Vec<&str> = text.split_whitespace().collect();
            if fields.len() < 3 {
                return Err(parse_err(line, format!("expected at least 3 fields, got {}", fields.len())));
            }
            let rating = parse_rating(fields[2], line, false)?;
            Ok(Some((fields[0].to_owned(), fields[1].to_owned(), rating, None)))
        }
        DatasetFormat::CanonicalTsv => {
            let fields: Vec<&str> = text.split('\t').collect();
            if !(3..=4).contains(&fields.len()) {
                return Err(parse_err(line, format!("expected 3 or 4 tab-separated fields, got {}", fields.len())));
            }
            if fields[0].is_empty() || fields[1].is_empty() {
                return Err(parse_err(line, "empty node key"));
            }
            let rating = parse_rating(fields[2], line, false)?;
            let ts = fields.get(3).map(|f| parse_timestamp(f, line)).transpose()?;
            Ok(Some((fields[0].to_owned(), fields[1].to_owned(), rating, ts)))
        }
    }
}

/// Parses a dataset from any reader. Lines are numbered from 1.
///
/// Repeated `(bottom, top)` pairs keep only the last occurrence, which stays
/// at its own position in file order.
pub fn parse_reader<T: Scalar, R: BufRead>(
    reader: R,
    format: DatasetFormat,
    range: &RatingRange<T>,
) -> Result<Vec<RatingEdge<T>>, IngestError> {
    let mut edges = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let Some((bottom, top, rating, ts)) = parse_line(&line, line_no, format)? else {
            continue;
        };
        let weight = T::from_f64(rating).ok_or_else(|| parse_err(line_no, "rating not representable"))?;
        if !range.contains(&weight) {
            return Err(IngestError::WeightOutOfRange { line: line_no });
        }
        edges.push(RatingEdge { bottom, top, weight, timestamp: ts });
    }
    Ok(keep_last_occurrence(edges))
}

fn keep_last_occurrence<T>(edges: Vec<RatingEdge<T>>) -> Vec<RatingEdge<T>> {
    let mut last: HashMap<(&str, &str), usize> = HashMap::with_capacity(edges.len());
    for (i, e) in edges.iter().enumerate() {
        last.insert((e.bottom.as_str(), e.top.as_str()), i);
    }
    if last.len() == edges.len() {
        return edges;
    }
    let keep: Vec<bool> = edges
        .iter()
        .enumerate()
        .map(|(i, e)| last[&(e.bottom.as_str(), e.top.as_str())] == i)
        .collect();
    edges.into_iter().zip(keep).filter_map(|(e, k)| k.then_some(e)).collect()
}

/// Parses the dataset at `path`.
pub fn parse_dataset<T: Scalar>(
    path: impl AsRef<Path>,
    format: DatasetFormat,
    range: &RatingRange<T>,
) -> Result<Vec<RatingEdge<T>>, IngestError> {
    let file = File::open(path)?;
    parse_reader(BufReader::new(file), format, range)
}

/// Writes edges in the canonical TSV grammar. Ratings use the shortest
/// decimal form that reparses to the same `f64`.
pub fn write_canonical_tsv<T: Scalar, W: Write>(edges: &[RatingEdge<T>], mut out: W) -> io::Result<()> {
    for e in edges {
        write!(out, "{}\t{}\t{}", e.bottom, e.top, e.weight.to_report())?;
        if let Some(ts) = e.timestamp {
            write!(out, "\t{ts}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Train/test split parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig { train_fraction: 0.8, seed: 42 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitResult<T> {
    pub train: Vec<RatingEdge<T>>,
    pub test: Vec<RatingEdge<T>>,
}

/// Seeded permutation of `0..n`.
///
/// Generator: ChaCha8 (`rand_chacha`), seeded with `SeedableRng::seed_from_u64`.
/// Shuffle: Fisher–Yates from the last index down; the swap partner for
/// position `i` is drawn uniformly from `0..=i` by rejection sampling on
/// `next_u64` (reject draws at or above the largest multiple of `i + 1`).
/// Both pieces are pinned here so a split is reproducible from the seed alone.
pub fn seeded_permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let bound = (i + 1) as u64;
        let zone = u64::MAX - (u64::MAX % bound);
        let j = loop {
            let r = rng.next_u64();
            if r < zone {
                break (r % bound) as usize;
            }
        };
        perm.swap(i, j);
    }
    perm
}

/// Shuffles the edges and takes the first `round(f * N)` as training data.
/// Both halves keep the shuffled order.
pub fn split_edges<T: Clone>(edges: &[RatingEdge<T>], config: &SplitConfig) -> Result<SplitResult<T>, IngestError> {
    let f = config.train_fraction;
    if !(f > 0.0 && f < 1.0) {
        return Err(IngestError::BadFraction(f));
    }
    if edges.len() < 2 {
        return Err(IngestError::TooFewEdges(edges.len()));
    }
    let n_train = (f * edges.len() as f64).round() as usize;
    let perm = seeded_permutation(edges.len(), config.seed);
    let (train_idx, test_idx) = perm.split_at(n_train);
    Ok(SplitResult {
        train: train_idx.iter().map(|&i| edges[i].clone()).collect(),
        test: test_idx.iter().map(|&i| edges[i].clone()).collect(),
    })
}
