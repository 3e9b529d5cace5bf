//! Polarity lexicon over text units and its TSV file format.
//!
//! ```text
//! # iterations=10	theta=0.2	nodes=1234	edges=5678
//! uni	agree	0.93
//! bi	totally agree	0.71
//! dep	Rel(crap, your)	-0.44
//! sentdep	Rel(SentiWord_neg, you)	-0.38
//! ```
//!
//! The sign of the score decides membership in the positive or negative set.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum UnitType {
    Unigram,
    Bigram,
    DepRelation,
    SentimentDepRelation,
}

impl UnitType {
    pub fn as_str(self) -> &'static str {
        match self {
            UnitType::Unigram => "uni",
            UnitType::Bigram => "bi",
            UnitType::DepRelation => "dep",
            UnitType::SentimentDepRelation => "sentdep",
        }
    }
}

impl fmt::Display for UnitType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for UnitType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uni" => Ok(UnitType::Unigram),
            "bi" => Ok(UnitType::Bigram),
            "dep" => Ok(UnitType::DepRelation),
            "sentdep" => Ok(UnitType::SentimentDepRelation),
            other => Err(Error::Data(format!("unknown unit type {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sentiment {
    Positive,
    Negative,
}

impl Sentiment {
    pub fn placeholder(self) -> &'static str {
        match self {
            Sentiment::Positive => "SentiWord_pos",
            Sentiment::Negative => "SentiWord_neg",
        }
    }

    pub fn of_score(score: f64) -> Option<Self> {
        if score > 0.0 {
            Some(Sentiment::Positive)
        } else if score < 0.0 {
            Some(Sentiment::Negative)
        } else {
            None
        }
    }
}

/// Matching key for a surface string: case-folded, with whitespace joined by
/// `_` for n-grams and dropped entirely inside relations.
pub fn surface_key(unit_type: UnitType, surface: &str) -> String {
    let lower = surface.to_lowercase();
    match unit_type {
        UnitType::Unigram | UnitType::Bigram => lower.split_whitespace().collect::<Vec<_>>().join("_"),
        UnitType::DepRelation | UnitType::SentimentDepRelation => {
            lower.chars().filter(|c| !c.is_whitespace()).collect()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LexiconEntry {
    pub unit_type: UnitType,
    pub surface: String,
    pub score: f64,
}

impl LexiconEntry {
    pub fn new(unit_type: UnitType, surface: impl Into<String>, score: f64) -> Self {
        Self {
            unit_type,
            surface: surface.into(),
            score,
        }
    }

    pub fn sentiment(&self) -> Sentiment {
        Sentiment::of_score(self.score).expect("lexicon scores are non-zero")
    }
}

/// Disjoint positive (`score > 0`) and negative (`score < 0`) unit sets.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Lexicon {
    entries: Vec<LexiconEntry>,
    index: HashMap<(UnitType, String), usize>,
    /// `key=value` pairs written to / read from the header line.
    pub header: BTreeMap<String, String>,
}

impl Lexicon {
    pub fn new(entries: Vec<LexiconEntry>) -> Result<Self> {
        let mut lex = Lexicon::default();
        for e in entries {
            lex.insert(e)?;
        }
        Ok(lex)
    }

    fn insert(&mut self, e: LexiconEntry) -> Result<()> {
        if !e.score.is_finite() || !(-1.0..=1.0).contains(&e.score) || e.score == 0.0 {
            return Err(Error::Data(format!(
                "lexicon score {} for {:?} must be non-zero and in [-1, 1]",
                e.score, e.surface
            )));
        }
        let key = (e.unit_type, surface_key(e.unit_type, &e.surface));
        if let Some(&i) = self.index.get(&key) {
            let prev = &self.entries[i];
            if prev.sentiment() != e.sentiment() {
                return Err(Error::Data(format!(
                    "{} {:?} is both positive and negative",
                    e.unit_type, e.surface
                )));
            }
            return Ok(());
        }
        self.index.insert(key, self.entries.len());
        self.entries.push(e);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[LexiconEntry] {
        &self.entries
    }

    pub fn positive(&self) -> impl Iterator<Item = &LexiconEntry> {
        self.entries.iter().filter(|e| e.score > 0.0)
    }

    pub fn negative(&self) -> impl Iterator<Item = &LexiconEntry> {
        self.entries.iter().filter(|e| e.score < 0.0)
    }

    /// Looks up an already-normalized key.
    pub fn get_key(&self, unit_type: UnitType, key: &str) -> Option<&LexiconEntry> {
        self.index.get(&(unit_type, key.to_string())).map(|&i| &self.entries[i])
    }

    pub fn get(&self, unit_type: UnitType, surface: &str) -> Option<&LexiconEntry> {
        self.get_key(unit_type, &surface_key(unit_type, surface))
    }

    /// Unigram polarities keyed by lowercased word.
    pub fn sentiment_words(&self) -> HashMap<String, Sentiment> {
        self.entries
            .iter()
            .filter(|e| e.unit_type == UnitType::Unigram)
            .map(|e| (surface_key(UnitType::Unigram, &e.surface), e.sentiment()))
            .collect()
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut lex = Lexicon::default();
        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(|e| Error::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
            if let Some(comment) = line.strip_prefix('#') {
                for kv in comment.split('\t') {
                    if let Some((k, v)) = kv.trim().split_once('=') {
                        lex.header.insert(k.to_string(), v.to_string());
                    }
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected 3 tab-separated fields, got {}", fields.len()),
                });
            }
            let parse_err = |message: String| Error::Parse { line: line_no, message };
            let unit_type: UnitType = fields[0].parse().map_err(|e: Error| parse_err(e.to_string()))?;
            let score: f64 = fields[2]
                .trim()
                .parse()
                .map_err(|e| parse_err(format!("score {:?}: {e}", fields[2])))?;
            if score == 0.0 {
                continue;
            }
            lex.insert(LexiconEntry::new(unit_type, fields[1], score))
                .map_err(|e| parse_err(e.to_string()))?;
        }
        Ok(lex)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(std::io::BufReader::new(f))
    }

    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        if !self.header.is_empty() {
            let kv: Vec<String> = self.header.iter().map(|(k, v)| format!("{k}={v}")).collect();
            writeln!(w, "# {}", kv.join("\t"))?;
        }
        for e in &self.entries {
            writeln!(w, "{}\t{}\t{}", e.unit_type, e.surface, e.score)?;
        }
        Ok(())
    }
}
