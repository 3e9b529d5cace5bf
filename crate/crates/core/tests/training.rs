mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use isocrf::crf::{train, CrfModel, FeatureIndex, Objective, ParamLayout, TrainConfig};
use isocrf::isotonic::{verify_monotonicity, ConstraintGroup, Direction};
use isocrf::lexicon::{Lexicon, LexiconEntry, UnitType};
use isocrf::synthetic::{PlantedModel, SyntheticConfig};
use isocrf::LabeledSequence;

fn planted_data(seed: u64, n: usize) -> (Vec<LabeledSequence>, Lexicon) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = SyntheticConfig {
        positive_words: 15,
        negative_words: 15,
        filler_words: 30,
        ..SyntheticConfig::default()
    };
    let planted = PlantedModel::generate(&cfg, &mut rng).unwrap();
    let data = planted.sample(n, &mut rng).iter().map(|s| s.to_labeled()).collect();
    (data, planted.lexicon)
}

#[test]
fn different_initializations_reach_the_same_objective() {
    let (data, lexicon) = planted_data(1, 80);
    for lex in [None, Some(&lexicon)] {
        let run = |seed| {
            train(
                &data,
                lex,
                &TrainConfig {
                    seed,
                    ..TrainConfig::default()
                },
            )
            .unwrap()
            .1
            .objective
        };
        let (a, b) = (run(1), run(2));
        assert!(
            (a - b).abs() <= 1e-5 * a.abs().max(1.0),
            "isotonic={}: {a} vs {b}",
            lex.is_some()
        );
    }
}

#[test]
fn training_is_independent_of_thread_count() {
    let (data, lexicon) = planted_data(2, 100);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| train(&data, Some(&lexicon), &TrainConfig::default()).unwrap().0)
    };
    let (a, b) = (run(1), run(3));
    let bits = |m: &CrfModel| m.emissions().iter().map(|w| w.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a), bits(&b));
    assert_eq!(a.transitions().map(f64::to_bits), b.transitions().map(f64::to_bits));
}

#[test]
fn isotonic_training_respects_every_constraint() {
    let (data, lexicon) = planted_data(3, 120);
    let (m, report) = train(&data, Some(&lexicon), &TrainConfig::default()).unwrap();
    assert!(report.constrained_features > 0);
    assert!(verify_monotonicity(&m, &lexicon).is_empty());
    assert!(report.objective_history.windows(2).all(|w| w[1] >= w[0] - 1e-9));
}

#[test]
fn lexicon_relation_entries_bind_relation_features() {
    let lexicon = Lexicon::new(vec![LexiconEntry::new(UnitType::DepRelation, "Rel(agree, i)", 0.8)]).unwrap();
    let index = FeatureIndex::from_names(["syn:nsubj(agree,i)", "syn:rel(VB,i)", "lex:uni=agree"]);
    let groups = isocrf::isotonic::build_constraints(&lexicon, &index);
    assert_eq!(groups.len(), 1);
    assert_eq!(groups[0].feature, "syn:nsubj(agree,i)");
    assert_eq!(groups[0].direction, Direction::Ascending);
}

#[test]
fn rejects_bad_configuration_and_data() {
    let (data, _) = planted_data(4, 5);
    assert!(train(&[], None, &TrainConfig::default()).is_err());
    let bad = TrainConfig {
        l2_variance: 0.0,
        ..TrainConfig::default()
    };
    assert!(train(&data, None, &bad).is_err());
    let mut ragged = data.clone();
    ragged[0].labels.pop();
    assert!(train(&ragged, None, &TrainConfig::default()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn free_parameter_count(n_features in 1usize..30, picks in proptest::collection::vec(any::<bool>(), 30)) {
        let constraints: Vec<ConstraintGroup> = (0..n_features)
            .filter(|&f| picks[f])
            .map(|f| ConstraintGroup {
                feature: format!("f{f}"),
                feature_id: f as u32,
                direction: if f % 2 == 0 { Direction::Ascending } else { Direction::Descending },
            })
            .collect();
        let layout = ParamLayout::new(n_features, &constraints);
        let unconstrained = (n_features - constraints.len()) * L;
        prop_assert_eq!(layout.len(), unconstrained + 5 * constraints.len() + 25);
        prop_assert_eq!(layout.n_constrained(), constraints.len());
    }

    #[test]
    fn gradient_matches_finite_differences(seed in any::<u64>(), bound in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let names = feature_names(3);
        let raw: Vec<(Vec<Vec<usize>>, Vec<usize>)> = (0..2)
            .map(|_| {
                let n = rng.random_range(1..=3);
                (random_observation(&mut rng, n, 3), (0..n).map(|_| rng.random_range(0..L)).collect())
            })
            .collect();
        let constraints = if bound {
            vec![ConstraintGroup { feature: names[1].clone(), feature_id: 1, direction: Direction::Descending }]
        } else {
            Vec::new()
        };
        let obj = Objective::new(&FeatureIndex::from_names(names.clone()), &constraints, &labeled(&names, &raw), 10.0).unwrap();
        let x: Vec<f64> = (0..obj.dimension()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (_, g) = obj.evaluate(&x);
        let h = 1e-5;
        for k in 0..x.len() {
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp[k] += h;
            xm[k] -= h;
            let fd = (obj.evaluate(&xp).0 - obj.evaluate(&xm).0) / (2.0 * h);
            let scale = fd.abs().max(g[k].abs());
            prop_assert!(scale < 1e-6 || (fd - g[k]).abs() / scale < 1e-4, "slot {}: fd {} analytic {}", k, fd, g[k]);
        }
    }
}
