//! Writes a synthetic discussion corpus and an MPQA-style seed list, ready
//! for the `isocrf` command line.
//!
//! cargo run --example demo_corpus -- OUT_DIR [seed]
//! isocrf lexicon-build --corpus OUT_DIR/corpus.jsonl --seeds-mpqa OUT_DIR/seeds.tsv --out OUT_DIR/lexicon.tsv

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use isocrf::corpus::write_corpus;
use isocrf::synthetic::{to_corpus, PlantedModel, SyntheticConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().ok_or("usage: demo_corpus OUT_DIR [seed]")?);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0);
    std::fs::create_dir_all(&dir)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let planted = PlantedModel::generate(&SyntheticConfig::default(), &mut rng)?;
    let corpus = to_corpus(&planted.sample(500, &mut rng), 8, 5);
    write_corpus(BufWriter::new(File::create(dir.join("corpus.jsonl"))?), &corpus)?;

    // a handful of the planted words; propagation has to find the rest
    let mut seeds = BufWriter::new(File::create(dir.join("seeds.tsv"))?);
    for w in planted.positive.iter().take(10) {
        writeln!(seeds, "{w}\tpositive")?;
    }
    for w in planted.negative.iter().take(10) {
        writeln!(seeds, "{w}\tnegative")?;
    }
    seeds.flush()?;
    println!("{} discussions written to {}", corpus.len(), dir.display());
    Ok(())
}
