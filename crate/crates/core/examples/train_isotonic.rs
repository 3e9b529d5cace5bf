//! Plain vs. isotonic CRF on data from a planted model, scored against the
//! lexicon polarity baseline.
//!
//! cargo run --release --example train_isotonic -- [seed]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use isocrf::crf::{train, TrainConfig};
use isocrf::eval::{collapse_labels, polarity_baseline, score, GoldUnit, ScoreMode, ThreeWay};
use isocrf::isotonic::verify_monotonicity;
use isocrf::synthetic::{PlantedModel, SyntheticConfig};
use isocrf::{CrfModel, LabeledSequence};

fn predict(model: &CrfModel, test: &[LabeledSequence]) -> Vec<ThreeWay> {
    test.iter()
        .flat_map(|s| model.viterbi(&s.features).expect("non-empty sequence"))
        .map(collapse_labels)
        .collect()
}

fn main() -> isocrf::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let planted = PlantedModel::generate(&SyntheticConfig::default(), &mut rng)?;
    let sample = planted.sample(500, &mut rng);
    println!("label histogram NN..PP: {:?}", PlantedModel::label_histogram(&sample));

    let data: Vec<LabeledSequence> = sample.iter().map(|s| s.to_labeled()).collect();
    let (train_set, test_set) = data.split_at(400);
    let gold: Vec<GoldUnit> = test_set
        .iter()
        .flat_map(|s| s.labels.iter().map(|&l| GoldUnit::new(l)))
        .collect();

    let config = TrainConfig {
        seed,
        ..TrainConfig::default()
    };
    let (plain, plain_report) = train(train_set, None, &config)?;
    let (iso, iso_report) = train(train_set, Some(&planted.lexicon), &config)?;
    println!(
        "plain: {} iterations, isotonic: {} iterations over {} constrained features",
        plain_report.iterations, iso_report.iterations, iso_report.constrained_features
    );
    println!(
        "monotonicity violations: {}",
        verify_monotonicity(&iso, &planted.lexicon).len()
    );

    let baseline: Vec<ThreeWay> = sample[400..]
        .iter()
        .flat_map(|s| s.units.iter().map(|u| polarity_baseline(u, &planted.lexicon)))
        .collect();
    for (name, pred) in [
        ("plain CRF", predict(&plain, test_set)),
        ("isotonic CRF", predict(&iso, test_set)),
        ("polarity baseline", baseline),
    ] {
        let report = score(&gold, &pred, ScoreMode::Strict)?;
        println!("{name}: macro F1 {:.4}", report.macro_f1());
        print!("{}", report.table());
    }
    Ok(())
}
