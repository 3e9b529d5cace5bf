use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::corpus::{Discussion, TextUnit};
use crate::lexicon::{Sentiment, UnitType};

/// A candidate lexicon entry: n-gram or (sentiment) dependency relation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UnitKey {
    pub unit_type: UnitType,
    pub surface: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnitNode {
    pub unit_type: UnitType,
    pub surface: String,
    pub discussion_count: usize,
}

/// General label that replaces every dependency relation name.
pub const GENERAL_RELATION: &str = "Rel";

/// Text units of one sentence in occurrence order, with repeats. Word forms
/// are lowercased; relation names are replaced by [`GENERAL_RELATION`];
/// sentiment words inside a relation are replaced by their polarity placeholder.
pub fn unit_occurrences(unit: &TextUnit, sentiment_words: &HashMap<String, Sentiment>) -> Vec<UnitKey> {
    let lower: Vec<String> = unit.tokens.iter().map(|t| t.form.to_lowercase()).collect();
    let mut out = Vec::new();
    for w in &lower {
        out.push(UnitKey {
            unit_type: UnitType::Unigram,
            surface: w.clone(),
        });
    }
    for pair in lower.windows(2) {
        out.push(UnitKey {
            unit_type: UnitType::Bigram,
            surface: format!("{} {}", pair[0], pair[1]),
        });
    }
    for arc in &unit.arcs {
        let (h, d) = (&lower[arc.head_index], &lower[arc.dependent_index]);
        out.push(UnitKey {
            unit_type: UnitType::DepRelation,
            surface: format!("{GENERAL_RELATION}({h}, {d})"),
        });
        let (hs, ds) = (sentiment_words.get(h), sentiment_words.get(d));
        if hs.is_some() || ds.is_some() {
            let h = hs.map_or(h.as_str(), |s| s.placeholder());
            let d = ds.map_or(d.as_str(), |s| s.placeholder());
            out.push(UnitKey {
                unit_type: UnitType::SentimentDepRelation,
                surface: format!("{GENERAL_RELATION}({h}, {d})"),
            });
        }
    }
    out
}

/// Distinct text units of one sentence.
pub fn units_of(unit: &TextUnit, sentiment_words: &HashMap<String, Sentiment>) -> BTreeSet<UnitKey> {
    unit_occurrences(unit, sentiment_words).into_iter().collect()
}

/// Surviving nodes with sentence-level occurrence and co-occurrence counts.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct UnitCounts {
    pub nodes: Vec<UnitNode>,
    /// Number of sentences in the corpus.
    pub sentences: u64,
    /// Sentences containing each node.
    pub occurrences: Vec<u64>,
    /// Sentences containing both nodes, keyed `(i, j)` with `i < j`.
    pub cooccurrences: BTreeMap<(u32, u32), u64>,
}

/// Collects text units, keeps those seen in at least `min_discussions`
/// distinct discussions, and counts same-sentence co-occurrence among them.
pub fn extract_text_units(
    corpus: &[Discussion],
    sentiment_words: &HashMap<String, Sentiment>,
    min_discussions: usize,
) -> UnitCounts {
    let sentences: Vec<Vec<BTreeSet<UnitKey>>> = corpus
        .iter()
        .map(|d| {
            d.turns
                .iter()
                .flat_map(|t| t.units.iter())
                .map(|u| units_of(u, sentiment_words))
                .collect()
        })
        .collect();

    let mut discussion_counts: BTreeMap<&UnitKey, usize> = BTreeMap::new();
    for disc in &sentences {
        let seen: BTreeSet<&UnitKey> = disc.iter().flatten().collect();
        for k in seen {
            *discussion_counts.entry(k).or_insert(0) += 1;
        }
    }

    let mut ids: HashMap<&UnitKey, u32> = HashMap::new();
    let mut nodes = Vec::new();
    for (k, c) in &discussion_counts {
        if *c >= min_discussions {
            ids.insert(k, nodes.len() as u32);
            nodes.push(UnitNode {
                unit_type: k.unit_type,
                surface: k.surface.clone(),
                discussion_count: *c,
            });
        }
    }

    let mut occurrences = vec![0u64; nodes.len()];
    let mut cooccurrences = BTreeMap::new();
    let mut n_sentences = 0u64;
    for sent in sentences.iter().flatten() {
        n_sentences += 1;
        let mut present: Vec<u32> = sent.iter().filter_map(|k| ids.get(k).copied()).collect();
        present.sort_unstable();
        for (a, &i) in present.iter().enumerate() {
            occurrences[i as usize] += 1;
            for &j in &present[a + 1..] {
                *cooccurrences.entry((i, j)).or_insert(0) += 1;
            }
        }
    }

    UnitCounts {
        nodes,
        sentences: n_sentences,
        occurrences,
        cooccurrences,
    }
}
