//! Seed sentiment words from three general-purpose lexicon styles.
//!
//! - MPQA-style: `word<TAB>polarity`, or the original clue lines
//!   `... word1=abandon ... priorpolarity=negative`.
//! - GI-style: `word<TAB>category...`; `Positiv` / `Negativ` categories mark
//!   polarity and `#n` sense suffixes are dropped.
//! - SentiWordNet-style: `word<TAB>pos_score<TAB>neg_score`.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};
use crate::lexicon::Sentiment;

/// SentiWordNet-style entries need a score above this to become seeds.
pub const SWN_THRESHOLD: f64 = 0.7;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SeedSet {
    pub positive: BTreeSet<String>,
    pub negative: BTreeSet<String>,
}

impl SeedSet {
    /// Merges polarity votes, dropping any word voted both ways.
    pub fn from_votes(votes: impl IntoIterator<Item = (String, Sentiment)>) -> Self {
        let mut seen: BTreeMap<String, (bool, bool)> = BTreeMap::new();
        for (w, s) in votes {
            let e = seen.entry(w.to_lowercase()).or_default();
            match s {
                Sentiment::Positive => e.0 = true,
                Sentiment::Negative => e.1 = true,
            }
        }
        let mut set = SeedSet::default();
        for (w, flags) in seen {
            match flags {
                (true, false) => {
                    set.positive.insert(w);
                }
                (false, true) => {
                    set.negative.insert(w);
                }
                _ => {}
            }
        }
        set
    }

    pub fn len(&self) -> usize {
        self.positive.len() + self.negative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The set with P and N exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            positive: self.negative.clone(),
            negative: self.positive.clone(),
        }
    }
}

fn polarity_word(s: &str) -> Option<Sentiment> {
    match s.trim().to_ascii_lowercase().as_str() {
        "positive" | "pos" | "positiv" | "+" | "1" => Some(Sentiment::Positive),
        "negative" | "neg" | "negativ" | "-" | "-1" => Some(Sentiment::Negative),
        _ => None,
    }
}

fn content_lines<R: BufRead>(r: R) -> impl Iterator<Item = std::io::Result<String>> {
    r.lines().filter(|l| match l {
        Ok(l) => {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#') && !t.starts_with(';')
        }
        Err(_) => true,
    })
}

pub fn parse_mpqa<R: BufRead>(r: R) -> Result<Vec<(String, Sentiment)>> {
    let mut out = Vec::new();
    for line in content_lines(r) {
        let line = line.map_err(|e| Error::Config(e.to_string()))?;
        if line.contains("word1=") {
            let kv: BTreeMap<&str, &str> = line.split_whitespace().filter_map(|p| p.split_once('=')).collect();
            if let (Some(w), Some(p)) = (kv.get("word1"), kv.get("priorpolarity")) {
                if let Some(s) = polarity_word(p) {
                    out.push((w.to_lowercase(), s));
                }
            }
            continue;
        }
        let mut fields = line.split('\t');
        if let (Some(w), Some(p)) = (fields.next(), fields.next()) {
            if let Some(s) = polarity_word(p) {
                out.push((w.trim().to_lowercase(), s));
            }
        }
    }
    Ok(out)
}

pub fn parse_gi<R: BufRead>(r: R) -> Result<Vec<(String, Sentiment)>> {
    let mut out = Vec::new();
    for line in content_lines(r) {
        let line = line.map_err(|e| Error::Config(e.to_string()))?;
        let mut fields = line.split(|c: char| c == '\t' || c.is_whitespace());
        let Some(entry) = fields.next() else { continue };
        let word = entry.split('#').next().unwrap_or(entry).to_lowercase();
        if word.is_empty() {
            continue;
        }
        for cat in fields {
            if let Some(s) = polarity_word(cat) {
                out.push((word.clone(), s));
            }
        }
    }
    Ok(out)
}

pub fn parse_swn<R: BufRead>(r: R) -> Result<Vec<(String, Sentiment)>> {
    let mut out = Vec::new();
    for (i, line) in content_lines(r).enumerate() {
        let line = line.map_err(|e| Error::Config(e.to_string()))?;
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 3 {
            return Err(Error::Config(format!(
                "SentiWordNet entry {}: expected word, pos_score, neg_score",
                i + 1
            )));
        }
        let score = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("SentiWordNet score {s:?}: {e}")))
        };
        let (pos, neg) = (score(fields[1])?, score(fields[2])?);
        let word = fields[0].trim().to_lowercase();
        if pos > SWN_THRESHOLD {
            out.push((word.clone(), Sentiment::Positive));
        }
        if neg > SWN_THRESHOLD {
            out.push((word, Sentiment::Negative));
        }
    }
    Ok(out)
}

fn open(path: &Path) -> Result<BufReader<std::fs::File>> {
    std::fs::File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// Union of the given seed sources minus conflicting words.
pub fn load_seeds(mpqa: Option<&Path>, gi: Option<&Path>, swn: Option<&Path>) -> Result<SeedSet> {
    let mut votes = Vec::new();
    if let Some(p) = mpqa {
        votes.extend(parse_mpqa(open(p)?)?);
    }
    if let Some(p) = gi {
        votes.extend(parse_gi(open(p)?)?);
    }
    if let Some(p) = swn {
        votes.extend(parse_swn(open(p)?)?);
    }
    Ok(SeedSet::from_votes(votes))
}
