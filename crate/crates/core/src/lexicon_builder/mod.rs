//! Domain lexicon induction: text units from a discussion corpus become nodes
//! of a sparse PMI/cosine graph, and seed polarities are propagated over it.

mod graph;
mod propagate;
mod seeds;
mod units;

use std::collections::HashMap;

pub use graph::{build_graph, cosine, pmi, PmiVector, UnitGraph};
pub use propagate::{induce_lexicon, propagate, Propagation};
pub use seeds::{load_seeds, parse_gi, parse_mpqa, parse_swn, SeedSet, SWN_THRESHOLD};
pub use units::{extract_text_units, unit_occurrences, units_of, UnitCounts, UnitKey, UnitNode, GENERAL_RELATION};

use crate::corpus::{filter_discussions, Discussion};
use crate::error::Result;
use crate::lexicon::{Lexicon, Sentiment};

#[derive(Clone, Debug, PartialEq)]
pub struct BuilderConfig {
    pub min_participants: usize,
    pub min_discussions: usize,
    pub top_k: usize,
    pub iterations: usize,
    pub theta: f64,
}

impl Default for BuilderConfig {
    fn default() -> Self {
        Self {
            min_participants: 5,
            min_discussions: 10,
            top_k: 50,
            iterations: 10,
            theta: 0.2,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BuildOutput {
    pub lexicon: Lexicon,
    pub graph: UnitGraph,
    pub propagation: Propagation,
    pub discussions_used: usize,
}

/// Runs the whole pipeline: filter, extract units, build graph, propagate, induce.
pub fn build_lexicon(corpus: &[Discussion], seeds: &SeedSet, config: &BuilderConfig) -> Result<BuildOutput> {
    let kept = filter_discussions(corpus, config.min_participants);
    let seed_words: HashMap<String, Sentiment> = seeds
        .positive
        .iter()
        .map(|w| (w.clone(), Sentiment::Positive))
        .chain(seeds.negative.iter().map(|w| (w.clone(), Sentiment::Negative)))
        .collect();
    let counts = extract_text_units(&kept, &seed_words, config.min_discussions);
    let graph = build_graph(&counts, config.top_k);
    let propagation = propagate(&graph, seeds, config.iterations)?;
    let mut lexicon = induce_lexicon(&graph, &propagation.scores, config.theta)?;
    lexicon
        .header
        .insert("iterations".into(), config.iterations.to_string());
    lexicon.header.insert("theta".into(), config.theta.to_string());
    lexicon
        .header
        .insert("min_participants".into(), config.min_participants.to_string());
    lexicon
        .header
        .insert("min_discussions".into(), config.min_discussions.to_string());
    lexicon.header.insert("top_k".into(), config.top_k.to_string());
    lexicon.header.insert(
        "seeds".into(),
        (seeds.positive.len() + seeds.negative.len()).to_string(),
    );
    lexicon.header.insert("nodes".into(), graph.node_count().to_string());
    lexicon.header.insert("edges".into(), graph.edge_count().to_string());
    Ok(BuildOutput {
        lexicon,
        graph,
        propagation,
        discussions_used: kept.len(),
    })
}
