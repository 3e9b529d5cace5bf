//! Sparse indicator features for a text unit, grouped into five families.
//!
//! Every feature name is namespaced by its family prefix (`lex:`, `disc:`,
//! `syn:`, `conv:`, `sent:`) and carries weight 1.0. Numeric quantities are
//! standardized with statistics frozen from training data and emitted one-hot
//! as `name=bin{1..5}`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{Discussion, TextUnit, Turn};
use crate::error::{Error, Result};
use crate::lexicon::{Lexicon, Sentiment};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FeatureFamily {
    Lexical,
    Discourse,
    Syntactic,
    Conversation,
    Sentiment,
}

impl FeatureFamily {
    pub const ALL: [FeatureFamily; 5] = [
        FeatureFamily::Lexical,
        FeatureFamily::Discourse,
        FeatureFamily::Syntactic,
        FeatureFamily::Conversation,
        FeatureFamily::Sentiment,
    ];

    pub fn prefix(self) -> &'static str {
        match self {
            FeatureFamily::Lexical => "lex:",
            FeatureFamily::Discourse => "disc:",
            FeatureFamily::Syntactic => "syn:",
            FeatureFamily::Conversation => "conv:",
            FeatureFamily::Sentiment => "sent:",
        }
    }

    pub fn of_feature(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| name.starts_with(f.prefix()))
    }
}

impl fmt::Display for FeatureFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureFamily::Lexical => "lexical",
            FeatureFamily::Discourse => "discourse",
            FeatureFamily::Syntactic => "syntactic",
            FeatureFamily::Conversation => "conversation",
            FeatureFamily::Sentiment => "sentiment",
        })
    }
}

impl FromStr for FeatureFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lex" | "lexical" => Ok(FeatureFamily::Lexical),
            "disc" | "discourse" => Ok(FeatureFamily::Discourse),
            "syn" | "syntactic" | "semantic" => Ok(FeatureFamily::Syntactic),
            "conv" | "conversation" => Ok(FeatureFamily::Conversation),
            "sent" | "sentiment" => Ok(FeatureFamily::Sentiment),
            other => Err(Error::Config(format!("unknown feature family {other:?}"))),
        }
    }
}

/// Sorted set of active features, each with weight 1.0.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureVector {
    names: BTreeSet<String>,
}

impl FeatureVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_names<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            names: names.into_iter().map(Into::into).collect(),
        }
    }

    pub fn insert(&mut self, name: impl Into<String>) {
        self.names.insert(name.into());
    }

    pub fn contains(&self, name: &str) -> bool {
        self.names.contains(name)
    }

    pub fn weight(&self, name: &str) -> f64 {
        if self.contains(name) {
            1.0
        } else {
            0.0
        }
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.names.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// Which families are active and where their word lists live.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeatureGroupConfig {
    pub families: BTreeSet<FeatureFamily>,
    pub hedges: Option<PathBuf>,
    pub negators: Option<PathBuf>,
    pub connectives: Option<PathBuf>,
    pub sentiment_lexicon: Option<PathBuf>,
    /// Max token distance between a connective and a sentiment word.
    pub connective_window: usize,
}

impl Default for FeatureGroupConfig {
    fn default() -> Self {
        Self {
            families: FeatureFamily::ALL.into_iter().collect(),
            hedges: None,
            negators: None,
            connectives: None,
            sentiment_lexicon: None,
            connective_window: 3,
        }
    }
}

impl FeatureGroupConfig {
    pub fn with_families(families: impl IntoIterator<Item = FeatureFamily>) -> Self {
        Self {
            families: families.into_iter().collect(),
            ..Self::default()
        }
    }

    pub fn enabled(&self, family: FeatureFamily) -> bool {
        self.families.contains(&family)
    }

    pub fn validate(&self) -> Result<()> {
        if self.enabled(FeatureFamily::Sentiment) && self.sentiment_lexicon.is_none() {
            return Err(Error::Config("sentiment features need a sentiment lexicon".into()));
        }
        Ok(())
    }

    /// Reads every configured resource. Lists left unset load as empty.
    pub fn load_resources(&self) -> Result<FeatureResources> {
        self.validate()?;
        let phrases = |p: &Option<PathBuf>| -> Result<BTreeSet<Vec<String>>> {
            Ok(match p {
                Some(p) => read_wordlist(p)?
                    .into_iter()
                    .map(|w| w.split_whitespace().map(str::to_lowercase).collect())
                    .collect(),
                None => BTreeSet::new(),
            })
        };
        let negators = match &self.negators {
            Some(p) => read_wordlist(p)?.into_iter().map(|w| w.to_lowercase()).collect(),
            None => BTreeSet::new(),
        };
        let sentiment = match &self.sentiment_lexicon {
            Some(p) if self.enabled(FeatureFamily::Sentiment) => {
                Lexicon::load(p)?.sentiment_words().into_iter().collect()
            }
            _ => BTreeMap::new(),
        };
        Ok(FeatureResources {
            hedges: phrases(&self.hedges)?,
            negators,
            connectives: phrases(&self.connectives)?,
            sentiment,
        })
    }
}

/// Reads a one-entry-per-line UTF-8 list; `#` starts a comment.
pub fn read_wordlist(path: &Path) -> Result<Vec<String>> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for line in BufReader::new(f).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let entry = line.split('#').next().unwrap_or("").trim();
        if !entry.is_empty() {
            out.push(entry.to_string());
        }
    }
    Ok(out)
}

/// Loaded word lists; phrases are stored as lowercased token sequences.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureResources {
    pub hedges: BTreeSet<Vec<String>>,
    pub negators: BTreeSet<String>,
    pub connectives: BTreeSet<Vec<String>>,
    pub sentiment: BTreeMap<String, Sentiment>,
}

impl FeatureResources {
    pub fn with_sentiment(mut self, lexicon: &Lexicon) -> Self {
        self.sentiment = lexicon.sentiment_words().into_iter().collect();
        self
    }
}

/// Training-split statistics of one numeric feature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinSpec {
    pub mean: f64,
    pub stdev: f64,
}

impl BinSpec {
    /// Population statistics; `None` when the values are constant or empty.
    pub fn estimate(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let stdev = var.sqrt();
        (stdev > 0.0 && stdev.is_finite()).then_some(Self { mean, stdev })
    }
}

/// Standardizes `value` and cuts z at -1.5, -0.5, 0.5, 1.5 (upper edges closed).
pub fn standardize_and_bin(value: f64, spec: &BinSpec) -> Result<u8> {
    if !value.is_finite() {
        return Err(Error::Input(format!("non-finite feature value {value}")));
    }
    if !(spec.stdev > 0.0) {
        return Err(Error::Input(format!("bin spec stdev {} not positive", spec.stdev)));
    }
    let z = (value - spec.mean) / spec.stdev;
    Ok(if z <= -1.5 {
        1
    } else if z <= -0.5 {
        2
    } else if z <= 0.5 {
        3
    } else if z <= 1.5 {
        4
    } else {
        5
    })
}

/// Lowercased alphanumeric runs.
pub fn words(text: &str) -> Vec<String> {
    text.split(|c: char| !(c.is_alphanumeric() || c == '\''))
        .filter(|w| w.chars().any(char::is_alphanumeric))
        .map(str::to_lowercase)
        .collect()
}

/// Raw-count TF with smoothed IDF `ln((N+1)/(df+1)) + 1`, compared by cosine.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TfIdf {
    pub documents: u64,
    pub document_frequency: BTreeMap<String, u64>,
}

impl TfIdf {
    pub fn fit<'a>(documents: impl IntoIterator<Item = &'a str>) -> Self {
        let mut model = TfIdf::default();
        for doc in documents {
            model.documents += 1;
            let terms: BTreeSet<String> = words(doc).into_iter().collect();
            for t in terms {
                *model.document_frequency.entry(t).or_insert(0) += 1;
            }
        }
        model
    }

    pub fn idf(&self, term: &str) -> f64 {
        let df = self.document_frequency.get(term).copied().unwrap_or(0);
        ((self.documents as f64 + 1.0) / (df as f64 + 1.0)).ln() + 1.0
    }

    pub fn vector(&self, text: &str) -> BTreeMap<String, f64> {
        let mut tf: BTreeMap<String, f64> = BTreeMap::new();
        for w in words(text) {
            *tf.entry(w).or_insert(0.0) += 1.0;
        }
        for (t, v) in tf.iter_mut() {
            *v *= self.idf(t);
        }
        tf
    }

    pub fn similarity(&self, a: &str, b: &str) -> f64 {
        sparse_cosine(&self.vector(a), &self.vector(b))
    }
}

/// Cosine of two sparse non-negative vectors, clamped to [0, 1]; 0 if either is zero.
pub fn sparse_cosine(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>) -> f64 {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let dot: f64 = small.iter().filter_map(|(k, v)| large.get(k).map(|w| v * w)).sum();
    let na: f64 = a.values().map(|v| v * v).sum();
    let nb: f64 = b.values().map(|v| v * v).sum();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na * nb).sqrt()).clamp(0.0, 1.0)
}

/// What a unit can see of the conversation around it.
#[derive(Clone, Copy, Debug, Default)]
pub struct UnitContext<'a> {
    /// The turn being replied to.
    pub target: Option<&'a Turn>,
}

impl<'a> UnitContext<'a> {
    pub fn none() -> Self {
        Self { target: None }
    }

    pub fn for_turn(discussion: &'a Discussion, turn: &Turn) -> Self {
        Self {
            target: discussion.target_of(turn),
        }
    }

    pub fn target_text(&self) -> Option<String> {
        self.target
            .map(|t| t.units.iter().map(|u| u.text.as_str()).collect::<Vec<_>>().join(" "))
    }
}

const N_UPPER: &str = "lex:n_upper";
const N_WORDS: &str = "lex:n_words";
const N_NEGATORS: &str = "disc:n_negators";
const QUOTE_OVERLAP: &str = "conv:quote_overlap";
const TFIDF_SIM: &str = "conv:tfidf";

/// Stateful extractor: families, loaded resources, and frozen training statistics.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureExtractor {
    pub families: BTreeSet<FeatureFamily>,
    pub connective_window: usize,
    pub resources: FeatureResources,
    pub bins: BTreeMap<String, BinSpec>,
    pub tfidf: TfIdf,
}

impl FeatureExtractor {
    pub fn new(config: &FeatureGroupConfig) -> Result<Self> {
        let resources = config.load_resources()?;
        Ok(Self::with_resources(config, resources))
    }

    pub fn with_resources(config: &FeatureGroupConfig, resources: FeatureResources) -> Self {
        Self {
            families: config.families.clone(),
            connective_window: config.connective_window,
            resources,
            bins: BTreeMap::new(),
            tfidf: TfIdf::default(),
        }
    }

    fn enabled(&self, family: FeatureFamily) -> bool {
        self.families.contains(&family)
    }

    /// Estimates IDF and numeric-feature statistics on training units only.
    pub fn fit(&mut self, training: &[(&TextUnit, UnitContext<'_>)]) {
        let texts: Vec<String> = training.iter().map(|(u, _)| u.text_without_quotes()).collect();
        self.tfidf = TfIdf::fit(texts.iter().map(String::as_str));
        let mut values: BTreeMap<&'static str, Vec<f64>> = BTreeMap::new();
        for (unit, ctx) in training {
            for (name, v) in self.numeric_values(unit, ctx) {
                values.entry(name).or_default().push(v);
            }
        }
        self.bins = values
            .into_iter()
            .filter_map(|(name, vs)| BinSpec::estimate(&vs).map(|s| (name.to_string(), s)))
            .collect();
    }

    /// Raw numeric quantities of the enabled families.
    pub fn numeric_values(&self, unit: &TextUnit, ctx: &UnitContext<'_>) -> Vec<(&'static str, f64)> {
        let mut out = Vec::new();
        if self.enabled(FeatureFamily::Lexical) {
            let upper = unit.tokens.iter().filter(|t| is_all_upper(&t.form)).count();
            let n_words = unit
                .tokens
                .iter()
                .filter(|t| t.form.chars().any(char::is_alphanumeric))
                .count();
            out.push((N_UPPER, upper as f64));
            out.push((N_WORDS, n_words as f64));
        }
        if self.enabled(FeatureFamily::Discourse) {
            let neg = unit
                .tokens
                .iter()
                .filter(|t| self.resources.negators.contains(&t.form.to_lowercase()))
                .count();
            out.push((N_NEGATORS, neg as f64));
        }
        if self.enabled(FeatureFamily::Conversation) {
            if let Some(target) = ctx.target_text() {
                let target_words: BTreeSet<String> = words(&target).into_iter().collect();
                let overlap = unit
                    .quoted_texts()
                    .iter()
                    .flat_map(|q| words(q))
                    .filter(|w| target_words.contains(w))
                    .count();
                out.push((QUOTE_OVERLAP, overlap as f64));
                out.push((TFIDF_SIM, self.tfidf.similarity(&unit.text_without_quotes(), &target)));
            }
        }
        out
    }

    pub fn extract(&self, unit: &TextUnit, ctx: &UnitContext<'_>) -> Result<FeatureVector> {
        let mut fv = FeatureVector::new();
        let lower: Vec<String> = unit.tokens.iter().map(|t| t.form.to_lowercase()).collect();

        for (name, value) in self.numeric_values(unit, ctx) {
            if let Some(spec) = self.bins.get(name) {
                let bin = standardize_and_bin(value, spec)?;
                fv.insert(format!("{name}=bin{bin}"));
            }
        }

        if self.enabled(FeatureFamily::Lexical) {
            for w in &lower {
                fv.insert(format!("lex:uni={w}"));
            }
            for pair in lower.windows(2) {
                fv.insert(format!("lex:bi={}_{}", pair[0], pair[1]));
            }
        }

        if self.enabled(FeatureFamily::Discourse) {
            let names = ["disc:init_uni", "disc:init_bi", "disc:init_tri"];
            for (k, name) in names.iter().enumerate() {
                if lower.len() > k {
                    fv.insert(format!("{name}={}", lower[..=k].join("_")));
                }
            }
            for c in repeated_punctuation(&unit.text) {
                fv.insert(format!("disc:rep_punct={c}"));
            }
            if self.resources.hedges.iter().any(|h| !find_phrase(&lower, h).is_empty()) {
                fv.insert("disc:hedge");
            }
        }

        if self.enabled(FeatureFamily::Syntactic) {
            for (t, w) in unit.tokens.iter().zip(&lower) {
                fv.insert(format!("syn:pos={w}/{}", t.pos));
            }
            for arc in &unit.arcs {
                let (h, d) = (&unit.tokens[arc.head_index], &unit.tokens[arc.dependent_index]);
                let (hw, dw) = (&lower[arc.head_index], &lower[arc.dependent_index]);
                let rel = &arc.relation;
                fv.insert(format!("syn:{rel}({hw},{dw})"));
                fv.insert(format!("syn:{rel}({},{dw})", h.pos));
                fv.insert(format!("syn:{rel}({hw},{})", d.pos));
            }
        }

        if self.enabled(FeatureFamily::Sentiment) {
            let senti = &self.resources.sentiment;
            for w in &lower {
                if senti.contains_key(w) {
                    fv.insert(format!("sent:word={w}"));
                }
            }
            for arc in &unit.arcs {
                let (hw, dw) = (&lower[arc.head_index], &lower[arc.dependent_index]);
                let (hs, ds) = (senti.get(hw), senti.get(dw));
                if hs.is_none() && ds.is_none() {
                    continue;
                }
                let h = hs.map_or(hw.as_str(), |s| s.placeholder());
                let d = ds.map_or(dw.as_str(), |s| s.placeholder());
                fv.insert(format!("sent:{}({h},{d})", arc.relation));
            }
            let window = self.connective_window;
            for conn in &self.resources.connectives {
                let joined = conn.join("_");
                for start in find_phrase(&lower, conn) {
                    let end = start + conn.len();
                    let before = start.saturating_sub(window)..start;
                    let after = end..(end + window).min(lower.len());
                    for i in before {
                        if senti.contains_key(&lower[i]) {
                            fv.insert(format!("sent:conn={}+{joined}", lower[i]));
                        }
                    }
                    for i in after {
                        if senti.contains_key(&lower[i]) {
                            fv.insert(format!("sent:conn={joined}+{}", lower[i]));
                        }
                    }
                }
            }
        }
        Ok(fv)
    }
}

fn is_all_upper(form: &str) -> bool {
    let letters: Vec<char> = form.chars().filter(|c| c.is_alphabetic()).collect();
    letters.len() >= 2 && letters.iter().all(|c| c.is_uppercase())
}

/// Characters occurring in runs of two or more identical punctuation marks.
fn repeated_punctuation(text: &str) -> BTreeSet<char> {
    let mut out = BTreeSet::new();
    let mut prev: Option<char> = None;
    for c in text.chars() {
        if prev == Some(c) && (c.is_ascii_punctuation() || (!c.is_alphanumeric() && !c.is_whitespace())) {
            out.insert(c);
        }
        prev = Some(c);
    }
    out
}

/// Start positions of `phrase` in `tokens`.
fn find_phrase(tokens: &[String], phrase: &[String]) -> Vec<usize> {
    if phrase.is_empty() || phrase.len() > tokens.len() {
        return Vec::new();
    }
    tokens
        .windows(phrase.len())
        .enumerate()
        .filter(|(_, w)| *w == phrase)
        .map(|(i, _)| i)
        .collect()
}

/// Writes `unit-id<TAB>feature` rows.
pub fn write_feature_dump<W: Write>(
    mut w: W,
    rows: impl IntoIterator<Item = (String, FeatureVector)>,
) -> std::io::Result<()> {
    for (id, fv) in rows {
        for name in fv.names() {
            writeln!(w, "{id}\t{name}")?;
        }
    }
    Ok(())
}
