//! Brute-force reference for screening and prediction.
//!
//! Works directly on a flat edge list with nested loops and no indexes, so
//! it shares no code path with the library beyond the scalar type.

#![allow(dead_code)]

use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, Zero};

pub type Q = BigRational;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub t: usize,
    pub n: usize,
    pub ratio: Option<Q>,
    pub threshold: Q,
    pub total_common: usize,
    pub guard_required: Q,
    pub sufficient: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OraclePrediction {
    Predicted { p: Q, contributors: Vec<(String, Q, usize, Q)> },
    NoConfidence,
}

pub struct Oracle<'a> {
    pub edges: &'a [(String, String, Q)],
    pub cap: f64,
    pub constant: f64,
    pub min_common: usize,
    pub range: (Q, Q),
}

fn q(x: usize) -> Q {
    Q::from_usize(x).unwrap()
}

impl<'a> Oracle<'a> {
    pub fn new(edges: &'a [(String, String, Q)]) -> Self {
        Oracle { edges, cap: 0.9, constant: 4.0, min_common: 1, range: (q(1), q(5)) }
    }

    fn distinct(&self, pick: impl Fn(&(String, String, Q)) -> &String) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for e in self.edges {
            if !out.contains(pick(e)) {
                out.push(pick(e).clone());
            }
        }
        out.sort();
        out
    }

    pub fn bottoms(&self) -> Vec<String> {
        self.distinct(|e| &e.0)
    }

    pub fn tops(&self) -> Vec<String> {
        self.distinct(|e| &e.1)
    }

    pub fn rating(&self, b: &str, t: &str) -> Option<Q> {
        self.edges.iter().find(|e| e.0 == b && e.1 == t).map(|e| e.2.clone())
    }

    pub fn item_average(&self, t: &str) -> Q {
        let mut sum = Q::zero();
        let mut count = 0;
        for e in self.edges {
            if e.1 == t {
                sum += e.2.clone();
                count += 1;
            }
        }
        sum / q(count)
    }

    pub fn common(&self, b1: &str, b2: &str) -> Vec<String> {
        let mut out = Vec::new();
        for e1 in self.edges {
            for e2 in self.edges {
                if e1.0 == b1 && e2.0 == b2 && e1.1 == e2.1 {
                    out.push(e1.1.clone());
                }
            }
        }
        out.sort();
        out
    }

    pub fn xy(&self) -> (Q, Q) {
        let e = q(self.edges.len());
        (e.clone() / q(self.bottoms().len()), e / q(self.tops().len()))
    }

    pub fn threshold(&self) -> Q {
        let (x, y) = self.xy();
        Q::from_f64(self.cap).unwrap() - Q::from_f64(self.constant).unwrap() / (x + y)
    }

    /// Others attached to `top`, in key order.
    fn others(&self, bottom: &str, top: &str) -> Vec<(String, Q)> {
        let mut v: Vec<(String, Q)> = self
            .edges
            .iter()
            .filter(|e| e.1 == top && e.0 != bottom)
            .map(|e| (e.0.clone(), e.2.clone()))
            .collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }

    pub fn assess(&self, bottom: &str, top: &str) -> OracleReport {
        let others = self.others(bottom, top);
        let t = others.len();
        let mut n = 0;
        let mut total = 0;
        for (o, _) in &others {
            let c = self.common(bottom, o).len();
            total += c;
            if c >= self.min_common {
                n += 1;
            }
        }
        let ratio = if t > 0 { Some(q(n) / q(t)) } else { None };
        let threshold = self.threshold();
        let (_, y) = self.xy();
        let known = self.edges.iter().any(|e| e.0 == bottom);
        let sufficient = known
            && match &ratio {
                Some(r) => *r >= threshold && q(total) >= y,
                None => false,
            };
        OracleReport { t, n, ratio, threshold, total_common: total, guard_required: y, sufficient }
    }

    pub fn temp(r1: &Q, r2: &Q, a: &Q) -> Q {
        let diff = (r1.clone() - r2.clone()).abs();
        let mut base = Q::one() - diff / a.clone();
        if base < Q::zero() {
            base = Q::zero();
        }
        let z = Q::zero();
        let opposite = (*r1 > z && *r2 < z) || (*r1 < z && *r2 > z);
        if opposite {
            base / q(2)
        } else {
            base
        }
    }

    pub fn similarity(&self, b1: &str, b2: &str) -> (Q, usize) {
        let tops = self.common(b1, b2);
        let mut sum = Q::zero();
        for t in &tops {
            let a = self.item_average(t);
            let r1 = self.rating(b1, t).unwrap() - a.clone();
            let r2 = self.rating(b2, t).unwrap() - a.clone();
            sum += Self::temp(&r1, &r2, &a);
        }
        (sum / q(tops.len()), tops.len())
    }

    pub fn predict(&self, bottom: &str, top: &str) -> OraclePrediction {
        let mut num = Q::zero();
        let mut den = Q::zero();
        let mut contributors = Vec::new();
        for (o, r) in self.others(bottom, top) {
            if self.common(bottom, &o).len() < self.min_common {
                continue;
            }
            let (s, c) = self.similarity(bottom, &o);
            if s <= Q::zero() {
                continue;
            }
            num += s.clone() * r.clone();
            den += s.clone();
            contributors.push((o, s, c, r));
        }
        if contributors.is_empty() {
            return OraclePrediction::NoConfidence;
        }
        let mut p = num / den;
        if p < self.range.0 {
            p = self.range.0.clone();
        }
        if p > self.range.1 {
            p = self.range.1.clone();
        }
        OraclePrediction::Predicted { p, contributors }
    }
}
