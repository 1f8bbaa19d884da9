//! Two-step link recommendation.
//!
//! Step one screens a candidate `(bottom, top)` pair: among the bottoms
//! already attached to `top`, count how many share common tops with the
//! candidate bottom and compare that fraction to a density-adaptive
//! threshold, then require enough total common-neighbor evidence. Step two
//! predicts the missing weight as a similarity-weighted mean of the ratings
//! those bottoms gave `top`.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{BipartiteGraph, DegreeStats, GraphError};
use crate::scalar::Scalar;

/// How the low-sample guard aggregates common-neighbor counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuardMode {
    /// Sum of common-top counts over all top-adjacent bottoms must reach `y`.
    #[default]
    Total,
    /// Every bottom counted in `n` must individually share at least `y`
    /// common tops with the candidate.
    PerPair,
}

/// Tuning knobs. Stored as `f64` and converted to the scalar type on use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommenderConfig {
    /// Upper limit the threshold approaches on dense graphs.
    pub threshold_cap: f64,
    /// Numerator of the small-graph correction `constant / (x + y)`.
    pub threshold_constant: f64,
    /// Common tops a neighbor must share with the candidate to count in `n`.
    pub min_common_tops: usize,
    /// Neighbors with similarity at or below this value do not contribute.
    pub similarity_floor: f64,
    pub guard: GuardMode,
}

impl Default for RecommenderConfig {
    fn default() -> Self {
        RecommenderConfig {
            threshold_cap: 0.9,
            threshold_constant: 4.0,
            min_common_tops: 1,
            similarity_floor: 0.0,
            guard: GuardMode::Total,
        }
    }
}

impl RecommenderConfig {
    pub fn validate(&self) -> Result<(), RecommendError> {
        if !(self.threshold_cap > 0.0 && self.threshold_cap <= 1.0) {
            return Err(RecommendError::BadConfig(format!(
                "threshold_cap must lie in (0, 1], got {}",
                self.threshold_cap
            )));
        }
        if !(self.threshold_constant > 0.0 && self.threshold_constant.is_finite()) {
            return Err(RecommendError::BadConfig(format!(
                "threshold_constant must be positive, got {}",
                self.threshold_constant
            )));
        }
        if self.min_common_tops < 1 {
            return Err(RecommendError::BadConfig("min_common_tops must be at least 1".into()));
        }
        if !self.similarity_floor.is_finite() {
            return Err(RecommendError::BadConfig("similarity_floor must be finite".into()));
        }
        Ok(())
    }
}

/// Tallies behind an accept/reject decision.
#[derive(Debug, Clone, PartialEq)]
pub struct SufficiencyReport<T> {
    /// Bottoms adjacent to the candidate top, excluding the candidate bottom.
    pub t: usize,
    /// Those sharing at least `min_common_tops` tops with the candidate bottom.
    pub n: usize,
    /// `n / t`, absent when `t == 0`.
    pub ratio: Option<T>,
    pub threshold: T,
    /// Sum over the `t` bottoms of their common-top counts with the candidate.
    pub total_common: usize,
    /// Mean top degree `y`; the guard's cutoff.
    pub guard_required: T,
    pub sufficient: bool,
    /// False when the candidate bottom has no edges in the graph.
    pub bottom_known: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityScore<T> {
    pub other_bottom: String,
    /// Mean temporary similarity, in `[0, 1]`.
    pub value: T,
    pub common_count: usize,
}

/// One term of the weighted mean.
#[derive(Debug, Clone, PartialEq)]
pub struct Contributor<T> {
    pub similarity: SimilarityScore<T>,
    /// The contributor's rating of the candidate top.
    pub rating: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction<T> {
    pub bottom: String,
    pub top: String,
    /// Predicted weight.
    pub p: T,
    pub k: usize,
    /// Ordered by contributor key.
    pub contributors: Vec<Contributor<T>>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RecommendError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("edge ({bottom}, {top}) already exists")]
    EdgeAlreadyExists { bottom: String, top: String },
    #[error("item average must be positive")]
    NonPositiveAverage,
    #[error("{0} and {1} have no common top neighbors")]
    NoCommonNeighbors(String, String),
    #[error("insufficient data to predict ({bottom}, {top})")]
    InsufficientData { bottom: String, top: String },
    #[error("no contributor has similarity above the floor for ({bottom}, {top})")]
    NoConfidence { bottom: String, top: String },
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error("top_k must be at least 1")]
    BadTopK,
}

/// `cap - constant / (x + y)`. Negative on very sparse graphs, in which case
/// every ratio passes.
pub fn threshold<T: Scalar>(stats: &DegreeStats<T>, cfg: &RecommenderConfig) -> T {
    let cap = T::from_knob(cfg.threshold_cap);
    let constant = T::from_knob(cfg.threshold_constant);
    cap - constant / (stats.x.clone() + stats.y.clone())
}

/// Per-common-top agreement between two rating deviations `r1`, `r2` from
/// the top's average `a`.
///
/// Same sign (zero matches either): `max(0, 1 - |r1 - r2| / a)`.
/// Opposite signs: half of that.
pub fn temp_similarity<T: Scalar>(r1: &T, r2: &T, a: &T) -> Result<T, RecommendError> {
    if *a <= T::zero() {
        return Err(RecommendError::NonPositiveAverage);
    }
    let base = T::max_of(T::zero(), T::one() - (r1.clone() - r2.clone()).abs() / a.clone());
    // Signed::is_positive treats +0.0 as positive, so compare explicitly
    let zero = T::zero();
    let opposite = (*r1 > zero && *r2 < zero) || (*r1 < zero && *r2 > zero);
    let value = if opposite { base / T::from_count(2) } else { base };
    Ok(value.clamp_to(&T::zero(), &T::one()))
}

/// A top-adjacent bottom and its evidence against the candidate.
struct Neighbor<'g, T> {
    bottom: usize,
    rating: &'g T,
    common: usize,
}

/// Screening and prediction over a fixed graph and configuration.
///
/// Degree statistics and the threshold are computed once at construction.
#[derive(Debug, Clone)]
pub struct Recommender<'g, T> {
    graph: &'g BipartiteGraph<T>,
    config: RecommenderConfig,
    stats: DegreeStats<T>,
    threshold: T,
    floor: T,
}

impl<'g, T: Scalar> Recommender<'g, T> {
    pub fn new(graph: &'g BipartiteGraph<T>, config: RecommenderConfig) -> Result<Self, RecommendError> {
        config.validate()?;
        let stats = graph.degree_stats()?;
        let threshold = threshold(&stats, &config);
        let floor = T::from_knob(config.similarity_floor);
        Ok(Recommender { graph, config, stats, threshold, floor })
    }

    pub fn graph(&self) -> &'g BipartiteGraph<T> {
        self.graph
    }

    pub fn config(&self) -> &RecommenderConfig {
        &self.config
    }

    pub fn degree_stats(&self) -> &DegreeStats<T> {
        &self.stats
    }

    pub fn threshold(&self) -> &T {
        &self.threshold
    }

    /// Step one: decide whether `(bottom, top)` has enough supporting data.
    ///
    /// An unknown `top` is an error; an unknown `bottom` yields a rejecting
    /// report with `bottom_known == false`.
    pub fn assess_sufficiency(&self, bottom: &str, top: &str) -> Result<SufficiencyReport<T>, RecommendError> {
        let t = self.graph.top_idx(top)?;
        let b = self.resolve_candidate(bottom, t)?;
        Ok(self.screen(b, t).0)
    }

    /// Similarity between the candidate and another bottom over their
    /// common tops.
    pub fn pair_similarity(&self, candidate: &str, other: &str) -> Result<SimilarityScore<T>, RecommendError> {
        let i = self.graph.bottom_idx(candidate)?;
        let j = self.graph.bottom_idx(other)?;
        if i == j {
            return Err(GraphError::SameNode.into());
        }
        let mut sum = T::zero();
        let mut count = 0usize;
        for (t, wi, wj) in self.graph.common_tops_idx(i, j) {
            sum = sum + self.temp_at(t, wi, wj)?;
            count += 1;
        }
        if count == 0 {
            return Err(RecommendError::NoCommonNeighbors(candidate.to_owned(), other.to_owned()));
        }
        Ok(SimilarityScore { other_bottom: other.to_owned(), value: sum / T::from_count(count), common_count: count })
    }

    /// Step two: the similarity-weighted rating for a sufficient pair.
    pub fn predict_weight(&self, bottom: &str, top: &str) -> Result<Prediction<T>, RecommendError> {
        let (report, prediction) = self.assess_and_predict(bottom, top)?;
        if !report.sufficient {
            return Err(RecommendError::InsufficientData { bottom: bottom.to_owned(), top: top.to_owned() });
        }
        prediction.expect("sufficient pairs carry a prediction outcome")
    }

    /// Runs both steps, returning the report and, when the pair passed the
    /// screen, the prediction outcome.
    #[allow(clippy::type_complexity)]
    pub fn assess_and_predict(
        &self,
        bottom: &str,
        top: &str,
    ) -> Result<(SufficiencyReport<T>, Option<Result<Prediction<T>, RecommendError>>), RecommendError> {
        let t = self.graph.top_idx(top)?;
        let b = self.resolve_candidate(bottom, t)?;
        let (report, neighbors) = self.screen(b, t);
        if !report.sufficient {
            return Ok((report, None));
        }
        let b = b.expect("sufficient implies known bottom");
        let prediction = self.predict_from(b, t, &neighbors);
        Ok((report, Some(prediction)))
    }

    /// Ranks every top not yet adjacent to `bottom` by predicted weight.
    /// Ties go to the smaller top key.
    pub fn recommend_for(&self, bottom: &str, top_k: usize) -> Result<Vec<Prediction<T>>, RecommendError> {
        if top_k == 0 {
            return Err(RecommendError::BadTopK);
        }
        let b = self.graph.bottom_idx(bottom)?;
        let mut out = Vec::new();
        for t in 0..self.graph.top_count() {
            if self.graph.weight_at(b, t).is_some() {
                continue;
            }
            let (report, neighbors) = self.screen(Some(b), t);
            if !report.sufficient {
                continue;
            }
            match self.predict_from(b, t, &neighbors) {
                Ok(p) => out.push(p),
                Err(RecommendError::NoConfidence { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        // tops are visited in key order, so a stable sort keeps ties ascending
        out.sort_by(|a, b| b.p.partial_cmp(&a.p).unwrap_or(Ordering::Equal));
        out.truncate(top_k);
        Ok(out)
    }

    fn resolve_candidate(&self, bottom: &str, t: usize) -> Result<Option<usize>, RecommendError> {
        match self.graph.bottom_idx(bottom) {
            Ok(b) => {
                if self.graph.weight_at(b, t).is_some() {
                    return Err(RecommendError::EdgeAlreadyExists {
                        bottom: bottom.to_owned(),
                        top: self.graph.top_key(t).to_owned(),
                    });
                }
                Ok(Some(b))
            }
            Err(_) => Ok(None),
        }
    }

    fn screen(&self, b: Option<usize>, t: usize) -> (SufficiencyReport<T>, Vec<Neighbor<'g, T>>) {
        let graph = self.graph;
        let mut marked = vec![false; if b.is_some() { graph.top_count() } else { 0 }];
        if let Some(b) = b {
            for (top, _) in graph.tops_of(b) {
                marked[*top] = true;
            }
        }

        let neighbors: Vec<Neighbor<'g, T>> = graph
            .bottoms_of(t)
            .iter()
            .filter(|(other, _)| Some(*other) != b)
            .map(|(other, rating)| {
                let common = if b.is_some() {
                    graph.tops_of(*other).iter().filter(|(top, _)| marked[*top]).count()
                } else {
                    0
                };
                Neighbor { bottom: *other, rating, common }
            })
            .collect();

        let min_common = self.config.min_common_tops;
        let t_count = neighbors.len();
        let n = neighbors.iter().filter(|nb| nb.common >= min_common).count();
        let total_common: usize = neighbors.iter().map(|nb| nb.common).sum();
        let ratio = (t_count > 0).then(|| T::from_count(n) / T::from_count(t_count));
        let guard_required = self.stats.y.clone();

        let guard_ok = match self.config.guard {
            GuardMode::Total => T::from_count(total_common) >= guard_required,
            GuardMode::PerPair => {
                n > 0
                    && neighbors
                        .iter()
                        .filter(|nb| nb.common >= min_common)
                        .all(|nb| T::from_count(nb.common) >= guard_required)
            }
        };
        let sufficient = b.is_some()
            && guard_ok
            && ratio.as_ref().is_some_and(|r| *r >= self.threshold);

        let report = SufficiencyReport {
            t: t_count,
            n,
            ratio,
            threshold: self.threshold.clone(),
            total_common,
            guard_required,
            sufficient,
            bottom_known: b.is_some(),
        };
        (report, neighbors)
    }

    fn temp_at(&self, t: usize, w_candidate: &T, w_other: &T) -> Result<T, RecommendError> {
        let a = self.graph.item_avg_at(t);
        let r1 = w_candidate.clone() - a.clone();
        let r2 = w_other.clone() - a.clone();
        temp_similarity(&r1, &r2, a)
    }

    fn similarity_idx(&self, b: usize, other: usize) -> Result<(T, usize), RecommendError> {
        let mut sum = T::zero();
        let mut count = 0usize;
        for (t, wb, wo) in self.graph.common_tops_idx(b, other) {
            sum = sum + self.temp_at(t, wb, wo)?;
            count += 1;
        }
        debug_assert!(count > 0);
        Ok((sum / T::from_count(count), count))
    }

    fn predict_from(&self, b: usize, t: usize, neighbors: &[Neighbor<'g, T>]) -> Result<Prediction<T>, RecommendError> {
        let mut contributors = Vec::new();
        for nb in neighbors.iter().filter(|nb| nb.common >= self.config.min_common_tops) {
            let (value, common_count) = self.similarity_idx(b, nb.bottom)?;
            if value <= self.floor {
                continue;
            }
            contributors.push(Contributor {
                similarity: SimilarityScore {
                    other_bottom: self.graph.bottom_key(nb.bottom).to_owned(),
                    value,
                    common_count,
                },
                rating: nb.rating.clone(),
            });
        }
        let bottom = self.graph.bottom_key(b).to_owned();
        let top = self.graph.top_key(t).to_owned();
        let terms: Vec<(T, T)> =
            contributors.iter().map(|c| (c.similarity.value.clone(), c.rating.clone())).collect();
        let Some(p) = weighted_rating(&terms) else {
            return Err(RecommendError::NoConfidence { bottom, top });
        };
        let range = self.graph.rating_range();
        let p = p.clamp_to(range.min(), range.max());
        Ok(Prediction { bottom, top, p, k: contributors.len(), contributors })
    }
}

/// Weighted mean `sum(s_i * r_i) / sum(s_i)` over `(similarity, rating)`
/// pairs. `None` when the weights sum to zero or less.
///
/// With positive weights the exact result lies in `[min r_i, max r_i]`;
/// the float quotient can round an ulp past that, so it is clamped back.
/// This also makes a single term return its rating bit-for-bit.
pub fn weighted_rating<T: Scalar>(terms: &[(T, T)]) -> Option<T> {
    let (first_s, first_r) = terms.first()?;
    let mut num = first_s.clone() * first_r.clone();
    let mut den = first_s.clone();
    let (mut lo, mut hi) = (first_r.clone(), first_r.clone());
    for (s, r) in &terms[1..] {
        num = num + s.clone() * r.clone();
        den = den + s.clone();
        lo = T::min_of(lo, r.clone());
        hi = T::max_of(hi, r.clone());
    }
    if den <= T::zero() {
        return None;
    }
    let p = num / den;
    if terms.iter().all(|(s, _)| *s > T::zero()) {
        Some(p.clamp_to(&lo, &hi))
    } else {
        Some(p)
    }
}
