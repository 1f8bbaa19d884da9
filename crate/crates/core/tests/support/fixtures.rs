//! Graph generators shared by the integration suites.

#![allow(dead_code)]

use std::collections::BTreeSet;

use biprec::{Edge, Exact, ExactEdge};
use num_traits::FromPrimitive;
use rand::Rng;

/// Random graph with at most `nb` bottoms and `nt` tops, each pair present
/// with probability `density`, integer ratings 1..=5.
pub fn random_small_graph(rng: &mut impl Rng, nb: usize, nt: usize, density: f64) -> Vec<(String, String, u8)> {
    let mut out = Vec::new();
    for b in 0..nb {
        for t in 0..nt {
            if rng.gen_bool(density) {
                out.push((format!("b{b}"), format!("t{t}"), rng.gen_range(1..=5u8)));
            }
        }
    }
    out
}

pub fn as_exact(edges: &[(String, String, u8)]) -> Vec<ExactEdge> {
    edges
        .iter()
        .map(|(b, t, w)| ExactEdge::new(b.clone(), t.clone(), Exact::from_u8(*w).unwrap()))
        .collect()
}

pub fn as_f64(edges: &[(String, String, u8)]) -> Vec<Edge> {
    edges.iter().map(|(b, t, w)| Edge::new(b.clone(), t.clone(), f64::from(*w))).collect()
}

pub fn as_oracle(edges: &[(String, String, u8)]) -> Vec<(String, String, Exact)> {
    edges
        .iter()
        .map(|(b, t, w)| (b.clone(), t.clone(), Exact::from_u8(*w).unwrap()))
        .collect()
}

/// 500 distinct edges over 60 bottoms and 40 tops. Ratings follow a bottom
/// bias plus a top bias plus noise, so neighbors carry signal.
pub fn synthetic_500(rng: &mut impl Rng) -> Vec<Edge> {
    let bottom_bias: Vec<f64> = (0..60).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let top_bias: Vec<f64> = (0..40).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut seen = BTreeSet::new();
    let mut edges = Vec::new();
    while edges.len() < 500 {
        let b = rng.gen_range(0..60usize);
        let t = rng.gen_range(0..40usize);
        if !seen.insert((b, t)) {
            continue;
        }
        let raw = 3.0 + bottom_bias[b] + top_bias[t] + rng.gen_range(-0.7..0.7);
        let w = raw.round().clamp(1.0, 5.0);
        edges.push(Edge::new(format!("u{b:02}"), format!("i{t:02}"), w));
    }
    edges
}

/// Six-node graph used for the hand-walked trace. Candidate pair is
/// (u1, i3), held-out rating 3.
pub fn six_node_train() -> Vec<Edge> {
    vec![
        Edge::new("u1", "i1", 4.0),
        Edge::new("u1", "i2", 2.0),
        Edge::new("u2", "i1", 5.0),
        Edge::new("u2", "i2", 2.0),
        Edge::new("u2", "i3", 4.0),
        Edge::new("u3", "i1", 3.0),
        Edge::new("u3", "i3", 2.0),
    ]
}
