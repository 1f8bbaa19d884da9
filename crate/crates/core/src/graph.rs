//! Immutable weighted bipartite graph.
//!
//! Nodes are addressed by their dataset-native string keys. Internally each
//! side is remapped to dense indices assigned in key order, so iterating an
//! adjacency list by index is the same as iterating it by key.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

/// Which half of the bipartition a node lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// Customers / users.
    Bottom,
    /// Products / items.
    Top,
}

/// A node key qualified by its side. The same key on different sides names
/// two distinct nodes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId {
    pub side: Side,
    pub key: String,
}

impl NodeId {
    pub fn bottom(key: impl Into<String>) -> Self {
        NodeId { side: Side::Bottom, key: key.into() }
    }

    pub fn top(key: impl Into<String>) -> Self {
        NodeId { side: Side::Top, key: key.into() }
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = match self.side {
            Side::Bottom => "bottom",
            Side::Top => "top",
        };
        write!(f, "{side}:{}", self.key)
    }
}

/// One observed rating.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingEdge<T> {
    pub bottom: String,
    pub top: String,
    pub weight: T,
    /// Carried through from the source file, never read by the algorithm.
    pub timestamp: Option<i64>,
}

impl<T> RatingEdge<T> {
    pub fn new(bottom: impl Into<String>, top: impl Into<String>, weight: T) -> Self {
        RatingEdge { bottom: bottom.into(), top: top.into(), weight, timestamp: None }
    }

    pub fn with_timestamp(mut self, ts: i64) -> Self {
        self.timestamp = Some(ts);
        self
    }
}

/// Inclusive rating scale.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingRange<T> {
    min: T,
    max: T,
}

impl<T: Scalar> RatingRange<T> {
    pub fn new(min: T, max: T) -> Result<Self, GraphError> {
        if min > max {
            return Err(GraphError::BadRange);
        }
        Ok(RatingRange { min, max })
    }

    /// The 1–5 star scale.
    pub fn five_star() -> Self {
        RatingRange { min: T::one(), max: T::from_count(5) }
    }

    pub fn min(&self) -> &T {
        &self.min
    }

    pub fn max(&self) -> &T {
        &self.max
    }

    pub fn contains(&self, w: &T) -> bool {
        *w >= self.min && *w <= self.max
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("duplicate edge ({bottom}, {top})")]
    DuplicateEdge { bottom: String, top: String },
    #[error("weight {weight} of edge ({bottom}, {top}) is outside the rating range")]
    WeightOutOfRange { bottom: String, top: String, weight: f64 },
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("the two bottom nodes must differ")]
    SameNode,
    #[error("graph has no edges")]
    EmptyGraph,
    #[error("empty node key")]
    EmptyKey,
    #[error("rating range minimum exceeds maximum")]
    BadRange,
}

/// Mean degree on each side.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeStats<T> {
    /// Mean edges per bottom node.
    pub x: T,
    /// Mean edges per top node.
    pub y: T,
}

/// Weighted bipartite graph with both adjacency directions materialized.
#[derive(Debug, Clone)]
pub struct BipartiteGraph<T> {
    bottom_keys: Vec<String>,
    top_keys: Vec<String>,
    bottom_index: HashMap<String, usize>,
    top_index: HashMap<String, usize>,
    bottom_adj: Vec<Vec<(usize, T)>>,
    top_adj: Vec<Vec<(usize, T)>>,
    item_avg: Vec<T>,
    edge_count: usize,
    range: RatingRange<T>,
}

fn dense_index<'a>(keys: impl Iterator<Item = &'a str>) -> (Vec<String>, HashMap<String, usize>) {
    let mut sorted: Vec<String> = keys.map(str::to_owned).collect();
    sorted.sort_unstable();
    sorted.dedup();
    let index = sorted.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect();
    (sorted, index)
}

impl<T: Scalar> BipartiteGraph<T> {
    /// Builds the graph, rejecting duplicate pairs and out-of-range weights.
    pub fn build(edges: &[RatingEdge<T>], range: RatingRange<T>) -> Result<Self, GraphError> {
        for e in edges {
            if e.bottom.is_empty() || e.top.is_empty() {
                return Err(GraphError::EmptyKey);
            }
            if !range.contains(&e.weight) {
                return Err(GraphError::WeightOutOfRange {
                    bottom: e.bottom.clone(),
                    top: e.top.clone(),
                    weight: e.weight.to_report(),
                });
            }
        }

        let (bottom_keys, bottom_index) = dense_index(edges.iter().map(|e| e.bottom.as_str()));
        let (top_keys, top_index) = dense_index(edges.iter().map(|e| e.top.as_str()));

        let mut bottom_adj: Vec<Vec<(usize, T)>> = vec![Vec::new(); bottom_keys.len()];
        let mut top_adj: Vec<Vec<(usize, T)>> = vec![Vec::new(); top_keys.len()];
        for e in edges {
            let b = bottom_index[&e.bottom];
            let t = top_index[&e.top];
            bottom_adj[b].push((t, e.weight.clone()));
            top_adj[t].push((b, e.weight.clone()));
        }
        for (b, list) in bottom_adj.iter_mut().enumerate() {
            list.sort_unstable_by_key(|(t, _)| *t);
            if let Some(w) = list.windows(2).find(|w| w[0].0 == w[1].0) {
                return Err(GraphError::DuplicateEdge {
                    bottom: bottom_keys[b].clone(),
                    top: top_keys[w[0].0].clone(),
                });
            }
        }
        for list in top_adj.iter_mut() {
            list.sort_unstable_by_key(|(b, _)| *b);
        }

        let item_avg = top_adj
            .iter()
            .map(|list| {
                let sum = list.iter().fold(T::zero(), |acc, (_, w)| acc + w.clone());
                sum / T::from_count(list.len())
            })
            .collect();

        Ok(BipartiteGraph {
            bottom_keys,
            top_keys,
            bottom_index,
            top_index,
            bottom_adj,
            top_adj,
            item_avg,
            edge_count: edges.len(),
            range,
        })
    }

    pub fn rating_range(&self) -> &RatingRange<T> {
        &self.range
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn bottom_count(&self) -> usize {
        self.bottom_keys.len()
    }

    pub fn top_count(&self) -> usize {
        self.top_keys.len()
    }

    pub fn has_bottom(&self, key: &str) -> bool {
        self.bottom_index.contains_key(key)
    }

    pub fn has_top(&self, key: &str) -> bool {
        self.top_index.contains_key(key)
    }

    /// Bottom keys in ascending order.
    pub fn bottoms(&self) -> impl Iterator<Item = &str> {
        self.bottom_keys.iter().map(String::as_str)
    }

    /// Top keys in ascending order.
    pub fn tops(&self) -> impl Iterator<Item = &str> {
        self.top_keys.iter().map(String::as_str)
    }

    /// All edges, ordered by bottom key then top key.
    pub fn edges(&self) -> impl Iterator<Item = (&str, &str, &T)> {
        self.bottom_adj.iter().enumerate().flat_map(move |(b, list)| {
            list.iter()
                .map(move |(t, w)| (self.bottom_keys[b].as_str(), self.top_keys[*t].as_str(), w))
        })
    }

    /// Weight of the edge `(bottom, top)` if present.
    pub fn rating(&self, bottom: &str, top: &str) -> Option<&T> {
        let b = *self.bottom_index.get(bottom)?;
        let t = *self.top_index.get(top)?;
        self.weight_at(b, t)
    }

    pub fn top_neighbors(&self, bottom: &str) -> Result<Vec<(&str, T)>, GraphError> {
        let b = self.bottom_idx(bottom)?;
        Ok(self.bottom_adj[b]
            .iter()
            .map(|(t, w)| (self.top_keys[*t].as_str(), w.clone()))
            .collect())
    }

    pub fn bottom_neighbors(&self, top: &str) -> Result<Vec<(&str, T)>, GraphError> {
        let t = self.top_idx(top)?;
        Ok(self.top_adj[t]
            .iter()
            .map(|(b, w)| (self.bottom_keys[*b].as_str(), w.clone()))
            .collect())
    }

    /// Tops rated by both bottoms, in key order.
    pub fn common_top_neighbors(&self, b1: &str, b2: &str) -> Result<Vec<&str>, GraphError> {
        let i = self.bottom_idx(b1)?;
        let j = self.bottom_idx(b2)?;
        if i == j {
            return Err(GraphError::SameNode);
        }
        Ok(self
            .common_tops_idx(i, j)
            .map(|(t, _, _)| self.top_keys[t].as_str())
            .collect())
    }

    pub fn degree_stats(&self) -> Result<DegreeStats<T>, GraphError> {
        if self.edge_count == 0 {
            return Err(GraphError::EmptyGraph);
        }
        let e = T::from_count(self.edge_count);
        Ok(DegreeStats {
            x: e.clone() / T::from_count(self.bottom_count()),
            y: e / T::from_count(self.top_count()),
        })
    }

    /// Mean rating received by `top`.
    pub fn item_average(&self, top: &str) -> Result<T, GraphError> {
        let t = self.top_idx(top)?;
        Ok(self.item_avg[t].clone())
    }

    // Dense-index accessors for the recommender hot path.

    pub(crate) fn bottom_idx(&self, key: &str) -> Result<usize, GraphError> {
        self.bottom_index
            .get(key)
            .copied()
            .ok_or_else(|| GraphError::UnknownNode(NodeId::bottom(key)))
    }

    pub(crate) fn top_idx(&self, key: &str) -> Result<usize, GraphError> {
        self.top_index
            .get(key)
            .copied()
            .ok_or_else(|| GraphError::UnknownNode(NodeId::top(key)))
    }

    pub(crate) fn bottom_key(&self, b: usize) -> &str {
        &self.bottom_keys[b]
    }

    pub(crate) fn top_key(&self, t: usize) -> &str {
        &self.top_keys[t]
    }

    pub(crate) fn tops_of(&self, b: usize) -> &[(usize, T)] {
        &self.bottom_adj[b]
    }

    pub(crate) fn bottoms_of(&self, t: usize) -> &[(usize, T)] {
        &self.top_adj[t]
    }

    pub(crate) fn item_avg_at(&self, t: usize) -> &T {
        &self.item_avg[t]
    }

    pub(crate) fn weight_at(&self, b: usize, t: usize) -> Option<&T> {
        let list = &self.bottom_adj[b];
        list.binary_search_by_key(&t, |(k, _)| *k).ok().map(|i| &list[i].1)
    }

    /// Sorted-merge intersection yielding `(top, weight_from_i, weight_from_j)`.
    pub(crate) fn common_tops_idx(
        &self,
        i: usize,
        j: usize,
    ) -> impl Iterator<Item = (usize, &T, &T)> + '_ {
        let (a, b) = (&self.bottom_adj[i], &self.bottom_adj[j]);
        let (mut p, mut q) = (0, 0);
        std::iter::from_fn(move || {
            while p < a.len() && q < b.len() {
                match a[p].0.cmp(&b[q].0) {
                    std::cmp::Ordering::Less => p += 1,
                    std::cmp::Ordering::Greater => q += 1,
                    std::cmp::Ordering::Equal => {
                        let out = (a[p].0, &a[p].1, &b[q].1);
                        p += 1;
                        q += 1;
                        return Some(out);
                    }
                }
            }
            None
        })
    }
}
