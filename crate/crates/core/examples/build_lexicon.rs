//! Label propagation from a few seed words over discussions whose units each
//! lean one way, so polar words co-occur with their own kind.
//!
//! cargo run --release --example build_lexicon -- [seed]

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use isocrf::corpus::{Discussion, TextUnit, Token, Turn};
use isocrf::lexicon_builder::{build_lexicon, BuilderConfig, SeedSet};

fn main() -> isocrf::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let positive: Vec<String> = (0..30).map(|i| format!("good{i:02}")).collect();
    let negative: Vec<String> = (0..30).map(|i| format!("bad{i:02}")).collect();
    let filler: Vec<String> = (0..40).map(|i| format!("w{i:03}")).collect();

    let unit = |rng: &mut ChaCha8Rng| {
        let pool = if rng.random_bool(0.5) { &positive } else { &negative };
        let mut words: Vec<&String> = (0..4).map(|_| pool.choose(rng).unwrap()).collect();
        words.extend((0..2).map(|_| filler.choose(rng).unwrap()));
        TextUnit::from_tokens(words.into_iter().map(|w| Token::new(w.clone(), "X")).collect())
    };
    let corpus: Vec<Discussion> = (0..60)
        .map(|d| Discussion {
            id: format!("d{d}"),
            turns: (0..10)
                .map(|t| Turn {
                    id: format!("t{t}"),
                    speaker: format!("user{}", t % 5),
                    reply_to: None,
                    units: (0..3).map(|_| unit(&mut rng)).collect(),
                })
                .collect(),
            source_line: None,
        })
        .collect();

    let seeds = SeedSet {
        positive: positive.iter().take(5).cloned().collect(),
        negative: negative.iter().take(5).cloned().collect(),
    };
    let built = build_lexicon(&corpus, &seeds, &BuilderConfig::default())?;
    println!(
        "{} discussions, {} nodes, {} edges",
        built.discussions_used,
        built.graph.node_count(),
        built.graph.edge_count()
    );
    for (t, d) in built.propagation.max_delta.iter().enumerate() {
        println!("iteration {:>2}: max change {d:.5}", t + 1);
    }

    let (mut right, mut wrong, mut other) = (0, 0, 0);
    for e in built.lexicon.entries() {
        let sign = if positive.contains(&e.surface) {
            1.0
        } else if negative.contains(&e.surface) {
            -1.0
        } else {
            other += 1;
            continue;
        };
        if sign * e.score > 0.0 {
            right += 1;
        } else {
            wrong += 1;
        }
    }
    println!(
        "{} entries from 10 seeds: polar words with the right sign {right}, wrong sign {wrong}, other units {other}",
        built.lexicon.len()
    );
    for e in built
        .lexicon
        .entries()
        .iter()
        .filter(|e| !seeds.positive.contains(&e.surface) && !seeds.negative.contains(&e.surface))
        .take(12)
    {
        println!("  {}\t{}\t{:+.3}", e.unit_type, e.surface, e.score);
    }
    Ok(())
}
