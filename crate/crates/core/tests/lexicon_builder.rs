use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use isocrf::corpus::{Discussion, TextUnit, Turn};
use isocrf::lexicon::{Lexicon, UnitType};
use isocrf::lexicon_builder::{
    build_graph, build_lexicon, extract_text_units, induce_lexicon, pmi, propagate, BuilderConfig, SeedSet, UnitGraph,
    UnitNode,
};
use isocrf::synthetic::{to_corpus, PlantedModel, SyntheticConfig};

fn node(s: &str) -> UnitNode {
    UnitNode {
        unit_type: UnitType::Unigram,
        surface: s.into(),
        discussion_count: 10,
    }
}

fn graph_strategy() -> impl Strategy<Value = (UnitGraph, SeedSet)> {
    (2usize..40).prop_flat_map(|n| {
        let pairs: Vec<(u32, u32)> = (0..n as u32)
            .flat_map(|a| (a + 1..n as u32).map(move |b| (a, b)))
            .collect();
        (
            proptest::collection::vec(proptest::option::weighted(0.3, 0.0f64..=1.0), pairs.len()),
            proptest::collection::vec(0u8..6, n),
        )
            .prop_map(move |(weights, roles)| {
                let edges: Vec<(u32, u32, f64)> = pairs
                    .iter()
                    .zip(&weights)
                    .filter_map(|(&(a, b), w)| w.map(|w| (a, b, w)))
                    .collect();
                let graph = UnitGraph::from_edges((0..n).map(|i| node(&format!("u{i}"))).collect(), &edges);
                let mut seeds = SeedSet::default();
                for (i, r) in roles.iter().enumerate() {
                    match r {
                        0 => {
                            seeds.positive.insert(format!("u{i}"));
                        }
                        1 => {
                            seeds.negative.insert(format!("u{i}"));
                        }
                        _ => {}
                    }
                }
                (graph, seeds)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scores_stay_bounded_and_seeds_clamped((graph, seeds) in graph_strategy(), t in 1usize..15) {
        let r = propagate(&graph, &seeds, t).unwrap();
        prop_assert_eq!(r.max_delta.len(), t);
        for (i, y) in r.scores.iter().enumerate() {
            prop_assert!((-1.0..=1.0).contains(y));
            let name = &graph.nodes[i].surface;
            if seeds.positive.contains(name) {
                prop_assert_eq!(*y, 1.0);
            }
            if seeds.negative.contains(name) {
                prop_assert_eq!(*y, -1.0);
            }
        }
    }

    #[test]
    fn swapping_seeds_negates_scores((graph, seeds) in graph_strategy(), t in 1usize..15) {
        let a = propagate(&graph, &seeds, t).unwrap().scores;
        let b = propagate(&graph, &seeds.swapped(), t).unwrap().scores;
        for (x, y) in a.iter().zip(&b) {
            prop_assert_eq!(*x, -*y);
        }
    }

    #[test]
    fn pmi_is_never_negative(n in 1u64..1000, c_ab in 0u64..100, c_a in 1u64..100, c_b in 1u64..100) {
        prop_assert!(pmi(n, c_ab, c_a, c_b) >= 0.0);
    }
}

#[test]
fn chain_under_synchronous_updates() {
    let g = UnitGraph::from_edges(vec![node("p"), node("a"), node("b")], &[(0, 1, 1.0), (1, 2, 1.0)]);
    let seeds = SeedSet {
        positive: ["p".to_string()].into(),
        negative: Default::default(),
    };
    let at = |t| propagate(&g, &seeds, t).unwrap().scores;
    assert_eq!(at(1), vec![1.0, 0.5, 0.0]);
    assert_eq!(at(2), vec![1.0, 0.5, 0.5]);
    assert_eq!(at(3), vec![1.0, 0.75, 0.5]);
    let long = propagate(&g, &seeds, 60).unwrap();
    assert!(*long.max_delta.last().unwrap() < 1e-6);
    assert!((long.scores[2] - 1.0).abs() < 1e-6);
}

#[test]
fn propagation_needs_an_iteration() {
    let g = UnitGraph::from_edges(vec![node("a")], &[]);
    assert!(propagate(&g, &SeedSet::default(), 0).is_err());
}

#[test]
fn isolated_nodes_keep_their_score() {
    let g = UnitGraph::from_edges(vec![node("p"), node("lonely")], &[]);
    let seeds = SeedSet {
        positive: ["p".to_string()].into(),
        negative: Default::default(),
    };
    assert_eq!(propagate(&g, &seeds, 5).unwrap().scores, vec![1.0, 0.0]);
}

#[test]
fn induction_thresholds_and_orders() {
    let g = UnitGraph::from_edges(vec![node("a"), node("b"), node("c"), node("d")], &[]);
    let lex = induce_lexicon(&g, &[0.1, -0.9, 0.2, 0.5], 0.2).unwrap();
    let got: Vec<(&str, f64)> = lex.entries().iter().map(|e| (e.surface.as_str(), e.score)).collect();
    assert_eq!(got, vec![("b", -0.9), ("d", 0.5), ("c", 0.2)]);
    assert!(induce_lexicon(&g, &[0.0; 4], 0.0).is_err());
}

fn unit(s: &str) -> TextUnit {
    TextUnit::from_tagged(s)
}

fn discussion(id: usize, speakers: usize, sentences: &[&str]) -> Discussion {
    Discussion {
        id: format!("d{id}"),
        turns: sentences
            .iter()
            .enumerate()
            .map(|(i, s)| Turn {
                id: format!("t{i}"),
                speaker: format!("s{}", i % speakers),
                reply_to: None,
                units: vec![unit(s)],
            })
            .collect(),
        source_line: None,
    }
}

#[test]
fn graph_weights_are_symmetric_and_bounded() {
    let sentences = [
        "great/JJ point/NN indeed/RB",
        "bad/JJ point/NN sadly/RB",
        "great/JJ idea/NN",
        "bad/JJ idea/NN indeed/RB",
        "point/NN idea/NN",
    ];
    let corpus: Vec<Discussion> = (0..12).map(|i| discussion(i, 5, &sentences)).collect();
    let counts = extract_text_units(&corpus, &Default::default(), 10);
    assert!(counts.nodes.iter().all(|n| n.discussion_count >= 10));
    let g = build_graph(&counts, 50);
    for (a, row) in g.adjacency.iter().enumerate() {
        for &(b, w) in row {
            assert!((0.0..=1.0).contains(&w));
            assert_eq!(g.weight(b, a as u32), Some(w));
            assert_ne!(a as u32, b);
        }
    }
    for v in &g.pmi_vectors {
        assert!(v.entries.len() <= 50);
        assert!(v.entries.windows(2).all(|p| p[0].1 >= p[1].1));
        assert!(v.entries.iter().all(|e| e.1 >= 0.0));
    }
    let small = build_graph(&counts, 1);
    assert!(small.pmi_vectors.iter().all(|v| v.entries.len() <= 1));
}

#[test]
fn units_below_the_discussion_threshold_are_dropped() {
    let mut corpus: Vec<Discussion> = (0..10).map(|i| discussion(i, 5, &["common/NN word/NN"])).collect();
    corpus.push(discussion(10, 5, &["rare/JJ word/NN"]));
    let counts = extract_text_units(&corpus, &Default::default(), 10);
    let surfaces: Vec<&str> = counts.nodes.iter().map(|n| n.surface.as_str()).collect();
    assert!(surfaces.contains(&"common"));
    assert!(surfaces.contains(&"word"));
    assert!(!surfaces.contains(&"rare"));
}

#[test]
fn sentiment_relations_use_placeholders() {
    let mut u = unit("you/PRP are/VBP wrong/JJ");
    u.arcs.push(isocrf::corpus::DependencyArc::new("nsubj", 2, 0));
    let senti = [("wrong".to_string(), isocrf::lexicon::Sentiment::Negative)].into();
    let keys = isocrf::lexicon_builder::units_of(&u, &senti);
    let find = |t: UnitType| {
        keys.iter()
            .filter(|k| k.unit_type == t)
            .map(|k| k.surface.clone())
            .collect::<Vec<_>>()
    };
    assert_eq!(find(UnitType::DepRelation), vec!["Rel(wrong, you)"]);
    assert_eq!(find(UnitType::SentimentDepRelation), vec!["Rel(SentiWord_neg, you)"]);
    assert!(find(UnitType::Bigram).contains(&"you are".to_string()));
}

#[test]
fn end_to_end_on_synthetic_discussions() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let planted = PlantedModel::generate(&SyntheticConfig::default(), &mut rng).unwrap();
    let corpus = to_corpus(&planted.sample(200, &mut rng), 8, 5);
    let seeds = SeedSet {
        positive: planted.positive[..5].iter().cloned().collect(),
        negative: planted.negative[..5].iter().cloned().collect(),
    };
    let config = BuilderConfig {
        min_discussions: 3,
        ..BuilderConfig::default()
    };
    let out = build_lexicon(&corpus, &seeds, &config).unwrap();
    assert_eq!(out.discussions_used, corpus.len());
    assert!(out.lexicon.entries().iter().all(|e| e.score.abs() >= 0.2));
    assert_eq!(out.lexicon.header.get("iterations").map(String::as_str), Some("10"));
    assert_eq!(out.lexicon.header.get("theta").map(String::as_str), Some("0.2"));

    let mut buf = Vec::new();
    out.lexicon.write(&mut buf).unwrap();
    let back = Lexicon::read(buf.as_slice()).unwrap();
    assert_eq!(back.entries(), out.lexicon.entries());
    assert_eq!(back.header, out.lexicon.header);

    // too few participants everywhere
    let strict = BuilderConfig {
        min_participants: 6,
        ..config
    };
    assert_eq!(build_lexicon(&corpus, &seeds, &strict).unwrap().lexicon.len(), 0);
}
