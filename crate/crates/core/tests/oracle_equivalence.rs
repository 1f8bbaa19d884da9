mod support;

use biprec::{Exact, ExactGraph, Graph, RatingRange, RecommendError, Recommender, RecommenderConfig};
use num_traits::FromPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::fixtures::{as_exact, as_f64, as_oracle, random_small_graph};
use support::oracle::{Oracle, OraclePrediction};

fn exact_range() -> RatingRange<Exact> {
    RatingRange::new(Exact::from_u8(1).unwrap(), Exact::from_u8(5).unwrap()).unwrap()
}

/// Returns (candidate pairs checked, predictions checked).
fn check_against_oracle(seed: u64, n_graphs: usize, cfg: &RecommenderConfig) -> (usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut graphs = 0;
    let mut pairs = 0;
    let mut predicted = 0;
    while graphs < n_graphs {
        let nb = rng.gen_range(2..=5);
        let nt = rng.gen_range(2..=5);
        let density = rng.gen_range(0.3..0.9);
        let raw = random_small_graph(&mut rng, nb, nt, density);
        if raw.is_empty() {
            continue;
        }
        graphs += 1;
        let graph = ExactGraph::build(&as_exact(&raw), exact_range()).unwrap();
        let rec = Recommender::new(&graph, cfg.clone()).unwrap();
        let oracle_edges = as_oracle(&raw);
        let mut oracle = Oracle::new(&oracle_edges);
        oracle.cap = cfg.threshold_cap;
        oracle.constant = cfg.threshold_constant;
        oracle.min_common = cfg.min_common_tops;

        let mut bottoms = oracle.bottoms();
        bottoms.push("cold".to_string());
        for top in oracle.tops() {
            for bottom in &bottoms {
                if oracle.rating(bottom, &top).is_some() {
                    assert!(matches!(
                        rec.assess_sufficiency(bottom, &top),
                        Err(RecommendError::EdgeAlreadyExists { .. })
                    ));
                    continue;
                }
                pairs += 1;
                let report = rec.assess_sufficiency(bottom, &top).unwrap();
                let expected = oracle.assess(bottom, &top);
                assert_eq!(report.t, expected.t, "t for ({bottom},{top}) in {raw:?}");
                assert_eq!(report.n, expected.n);
                assert_eq!(report.total_common, expected.total_common);
                assert_eq!(report.ratio, expected.ratio);
                assert_eq!(report.threshold, expected.threshold);
                assert_eq!(report.guard_required, expected.guard_required);
                assert_eq!(report.sufficient, expected.sufficient, "({bottom},{top}) in {raw:?}");

                let got = rec.predict_weight(bottom, &top);
                if !expected.sufficient {
                    assert!(matches!(got, Err(RecommendError::InsufficientData { .. })));
                    continue;
                }
                match (got, oracle.predict(bottom, &top)) {
                    (Ok(p), OraclePrediction::Predicted { p: want, contributors }) => {
                        predicted += 1;
                        assert_eq!(p.p, want, "p for ({bottom},{top}) in {raw:?}");
                        assert_eq!(p.k, contributors.len());
                        for (c, (key, s, common, r)) in p.contributors.iter().zip(&contributors) {
                            assert_eq!(&c.similarity.other_bottom, key);
                            assert_eq!(&c.similarity.value, s);
                            assert_eq!(c.similarity.common_count, *common);
                            assert_eq!(&c.rating, r);
                        }
                    }
                    (Err(RecommendError::NoConfidence { .. }), OraclePrediction::NoConfidence) => {}
                    (got, want) => panic!("mismatch for ({bottom},{top}): {got:?} vs {want:?}"),
                }
            }
        }
    }
    (pairs, predicted)
}

#[test]
fn screening_and_prediction_match_brute_force_exactly() {
    let (pairs, predicted) = check_against_oracle(0xB1B0, 1200, &RecommenderConfig::default());
    assert!(pairs > 5000, "only {pairs} candidate pairs exercised");
    assert!(predicted > 1000, "only {predicted} predictions exercised");
}

#[test]
fn tuned_knobs_match_brute_force_exactly() {
    let cfg = RecommenderConfig { threshold_cap: 0.7, threshold_constant: 2.0, min_common_tops: 2, ..Default::default() };
    let (_, predicted) = check_against_oracle(0x5EED, 400, &cfg);
    assert!(predicted > 50, "only {predicted} predictions exercised");
}

#[test]
fn float_path_tracks_exact_path() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..300 {
        let raw = random_small_graph(&mut rng, 5, 5, 0.6);
        if raw.is_empty() {
            continue;
        }
        let exact = ExactGraph::build(&as_exact(&raw), exact_range()).unwrap();
        let float = Graph::build(&as_f64(&raw), RatingRange::five_star()).unwrap();
        let er = Recommender::new(&exact, RecommenderConfig::default()).unwrap();
        let fr = Recommender::new(&float, RecommenderConfig::default()).unwrap();
        for b in float.bottoms() {
            for t in float.tops() {
                if float.rating(b, t).is_some() {
                    continue;
                }
                let fs = fr.assess_sufficiency(b, t).unwrap();
                let es = er.assess_sufficiency(b, t).unwrap();
                assert_eq!(fs.sufficient, es.sufficient);
                if let (Ok(fp), Ok(ep)) = (fr.predict_weight(b, t), er.predict_weight(b, t)) {
                    let ep = num_traits::ToPrimitive::to_f64(&ep.p).unwrap();
                    assert!((fp.p - ep).abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn common_neighbors_and_averages_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    for _ in 0..200 {
        let raw = random_small_graph(&mut rng, 8, 8, 0.4);
        if raw.is_empty() {
            continue;
        }
        let graph = ExactGraph::build(&as_exact(&raw), exact_range()).unwrap();
        let oracle_edges = as_oracle(&raw);
        let oracle = Oracle::new(&oracle_edges);
        let rec = Recommender::new(&graph, RecommenderConfig::default()).unwrap();
        for t in oracle.tops() {
            assert_eq!(graph.item_average(&t).unwrap(), oracle.item_average(&t));
        }
        for b1 in oracle.bottoms() {
            for b2 in oracle.bottoms() {
                if b1 == b2 {
                    continue;
                }
                let got: Vec<String> = graph.common_top_neighbors(&b1, &b2).unwrap().into_iter().map(String::from).collect();
                let want = oracle.common(&b1, &b2);
                assert_eq!(got, want);
                match rec.pair_similarity(&b1, &b2) {
                    Ok(s) => {
                        let (value, count) = oracle.similarity(&b1, &b2);
                        assert_eq!((s.value, s.common_count), (value, count));
                    }
                    Err(RecommendError::NoCommonNeighbors(..)) => assert!(want.is_empty()),
                    Err(e) => panic!("{e}"),
                }
            }
        }
    }
}

#[test]
fn recommend_for_matches_exhaustive_pair_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..200 {
        let raw = random_small_graph(&mut rng, 6, 6, 0.5);
        if raw.is_empty() {
            continue;
        }
        let graph = ExactGraph::build(&as_exact(&raw), exact_range()).unwrap();
        let rec = Recommender::new(&graph, RecommenderConfig::default()).unwrap();
        let oracle_edges = as_oracle(&raw);
        let oracle = Oracle::new(&oracle_edges);
        for b in oracle.bottoms() {
            let mut want: Vec<(String, Exact)> = Vec::new();
            for t in oracle.tops() {
                if oracle.rating(&b, &t).is_some() || !oracle.assess(&b, &t).sufficient {
                    continue;
                }
                if let OraclePrediction::Predicted { p, .. } = oracle.predict(&b, &t) {
                    want.push((t, p));
                }
            }
            want.sort_by(|x, y| y.1.cmp(&x.1).then_with(|| x.0.cmp(&y.0)));
            let got: Vec<(String, Exact)> =
                rec.recommend_for(&b, 100).unwrap().into_iter().map(|p| (p.top, p.p)).collect();
            assert_eq!(got, want);
            if !want.is_empty() {
                let first = rec.recommend_for(&b, 1).unwrap();
                assert_eq!(first.len(), 1);
                assert_eq!(first[0].top, want[0].0);
            }
        }
    }
}
