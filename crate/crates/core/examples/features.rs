//! Feature vectors for a short exchange, followed by a χ² ranking of the
//! features against the 3-way labels.
//!
//! cargo run --example features

use isocrf::corpus::{DependencyArc, Discussion, TextUnit, Turn};
use isocrf::eval::{chi2_rank, collapse_labels};
use isocrf::features::{FeatureExtractor, FeatureFamily, FeatureGroupConfig, FeatureResources};
use isocrf::lexicon::Sentiment;
use isocrf::pipeline::{fit_extractor, turn_features};
use isocrf::OrdinalLabel;

fn unit(tagged: &str, label: OrdinalLabel) -> TextUnit {
    let mut u = TextUnit::from_tagged(tagged).with_label(label);
    if u.tokens.len() > 2 {
        u.arcs.push(DependencyArc::new("nsubj", 2, 0));
    }
    u
}

fn main() -> isocrf::Result<()> {
    let rows = [
        ("you/PRP are/VBP right/JJ", OrdinalLabel::PP),
        ("I/PRP think/VBP that/DT is/VBZ wrong/JJ", OrdinalLabel::N),
        ("but/CC you/PRP are/VBP NOT/RB right/JJ", OrdinalLabel::NN),
        ("the/DT bill/NN passed/VBD", OrdinalLabel::O),
        ("exactly/RB right/JJ", OrdinalLabel::P),
        ("what/WP time/NN is/VBZ it/PRP", OrdinalLabel::O),
    ];
    let discussion = Discussion {
        id: "demo".into(),
        turns: rows
            .iter()
            .enumerate()
            .map(|(i, (text, label))| Turn {
                id: format!("t{i}"),
                speaker: format!("user{}", i % 2),
                reply_to: (i > 0).then(|| format!("t{}", i - 1)),
                units: vec![unit(text, *label)],
            })
            .collect(),
        source_line: None,
    };
    let corpus = [discussion];

    let mut resources = FeatureResources::default();
    resources.sentiment.insert("right".into(), Sentiment::Positive);
    resources.sentiment.insert("wrong".into(), Sentiment::Negative);
    resources.hedges.insert(vec!["i".into(), "think".into()]);
    resources.connectives.insert(vec!["but".into()]);
    resources.negators.insert("not".into());
    let config = FeatureGroupConfig::with_families(FeatureFamily::ALL);
    let mut extractor = FeatureExtractor::with_resources(&config, resources);
    fit_extractor(&mut extractor, &corpus);

    let mut dataset = Vec::new();
    for (t, turn) in corpus[0].turns.iter().enumerate() {
        let fv = turn_features(&extractor, &corpus[0], t)?.remove(0);
        println!("{}: {}", turn.id, fv.names().collect::<Vec<_>>().join(" "));
        dataset.push((fv, collapse_labels(turn.units[0].gold_label.unwrap())));
    }

    println!("\ntop features by χ²:");
    for e in chi2_rank(&dataset, false)?.iter().take(8) {
        println!("  {:<28} {:>6.3}  {}", e.feature, e.chi2, e.class);
    }
    Ok(())
}
