//! Conversation data model and the line-delimited JSON corpus format.
//!
//! One discussion per line:
//!
//! ```text
//! {"id": "d1", "turns": [{"id": "t1", "speaker": "alice", "reply_to": null,
//!   "units": [{"text": "I agree.", "tokens": [{"form": "I", "pos": "PRP"}, ...],
//!              "deps": [{"rel": "nsubj", "head": 1, "dep": 0}],
//!              "quotes": [[0, 4]], "label": "P",
//!              "ann": {"spans": [...], "turn_labels": [...], "iac_scores": [...]}}]}]}
//! ```
//!
//! Token indices in `deps` are 0-based positions in `tokens`; quote spans are
//! character offsets into `text`.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};

/// Five-point ordinal (dis)agreement scale, `NN < N < O < P < PP`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum OrdinalLabel {
    NN,
    N,
    O,
    P,
    PP,
}

impl OrdinalLabel {
    pub const COUNT: usize = 5;
    pub const ALL: [OrdinalLabel; 5] = [
        OrdinalLabel::NN,
        OrdinalLabel::N,
        OrdinalLabel::O,
        OrdinalLabel::P,
        OrdinalLabel::PP,
    ];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            OrdinalLabel::NN => "NN",
            OrdinalLabel::N => "N",
            OrdinalLabel::O => "O",
            OrdinalLabel::P => "P",
            OrdinalLabel::PP => "PP",
        }
    }
}

impl fmt::Display for OrdinalLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OrdinalLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "NN" => Ok(OrdinalLabel::NN),
            "N" => Ok(OrdinalLabel::N),
            "O" => Ok(OrdinalLabel::O),
            "P" => Ok(OrdinalLabel::P),
            "PP" => Ok(OrdinalLabel::PP),
            other => Err(Error::Data(format!("unknown label {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub form: String,
    pub pos: String,
}

impl Token {
    pub fn new(form: impl Into<String>, pos: impl Into<String>) -> Self {
        Self {
            form: form.into(),
            pos: pos.into(),
        }
    }
}

/// `relation(head, dependent)` over token indices of the owning unit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependencyArc {
    #[serde(rename = "rel")]
    pub relation: String,
    #[serde(rename = "head")]
    pub head_index: usize,
    #[serde(rename = "dep")]
    pub dependent_index: usize,
}

impl DependencyArc {
    pub fn new(relation: impl Into<String>, head_index: usize, dependent_index: usize) -> Self {
        Self {
            relation: relation.into(),
            head_index,
            dependent_index,
        }
    }
}

/// Annotation polarity as written by an annotator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    #[serde(alias = "agree", alias = "positive", alias = "pos")]
    Agreement,
    #[serde(alias = "disagree", alias = "negative", alias = "neg")]
    Disagreement,
    #[serde(alias = "none")]
    Neutral,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpanAnnotation {
    pub annotator: String,
    pub polarity: Polarity,
    pub start: usize,
    pub end: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TurnLabel {
    pub annotator: String,
    pub polarity: Polarity,
}

/// Raw per-annotator detail kept alongside a unit.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AnnotationDetail {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub spans: Vec<SpanAnnotation>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub turn_labels: Vec<TurnLabel>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub iac_scores: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TextUnit {
    pub text: String,
    #[serde(default)]
    pub tokens: Vec<Token>,
    #[serde(rename = "deps", default, skip_serializing_if = "Vec::is_empty")]
    pub arcs: Vec<DependencyArc>,
    #[serde(rename = "quotes", default, skip_serializing_if = "Vec::is_empty")]
    pub quote_spans: Vec<(usize, usize)>,
    #[serde(rename = "label", default, skip_serializing_if = "Option::is_none")]
    pub gold_label: Option<OrdinalLabel>,
    #[serde(rename = "ann", default, skip_serializing_if = "Option::is_none")]
    pub annotation_detail: Option<AnnotationDetail>,
}

impl TextUnit {
    /// Builds a unit from whitespace-separated `form/POS` pairs.
    pub fn from_tagged(tagged: &str) -> Self {
        let tokens: Vec<Token> = tagged
            .split_whitespace()
            .map(|t| match t.rsplit_once('/') {
                Some((form, pos)) if !form.is_empty() => Token::new(form, pos),
                _ => Token::new(t, "X"),
            })
            .collect();
        Self::from_tokens(tokens)
    }

    /// A unit whose text is its token forms joined by single spaces.
    pub fn from_tokens(tokens: Vec<Token>) -> Self {
        let text = tokens.iter().map(|t| t.form.as_str()).collect::<Vec<_>>().join(" ");
        Self {
            text,
            tokens,
            ..Default::default()
        }
    }

    pub fn with_label(mut self, label: OrdinalLabel) -> Self {
        self.gold_label = Some(label);
        self
    }

    /// True when no annotator marked this unit at sentence level and its
    /// agreement/disagreement label comes from a turn-level annotation.
    pub fn label_from_turn_level(&self) -> bool {
        match &self.annotation_detail {
            Some(ann) => ann.spans.is_empty() && ann.turn_labels.iter().any(|t| t.polarity != Polarity::Neutral),
            None => false,
        }
    }

    /// The text with every quoted span removed.
    pub fn text_without_quotes(&self) -> String {
        if self.quote_spans.is_empty() {
            return self.text.clone();
        }
        self.text
            .chars()
            .enumerate()
            .filter(|(i, _)| !self.quote_spans.iter().any(|&(s, e)| *i >= s && *i < e))
            .map(|(_, c)| c)
            .collect()
    }

    pub fn quoted_texts(&self) -> Vec<String> {
        self.quote_spans
            .iter()
            .map(|&(s, e)| self.text.chars().skip(s).take(e.saturating_sub(s)).collect())
            .collect()
    }

    fn validate(&self) -> std::result::Result<(), String> {
        if let Some(t) = self.tokens.iter().find(|t| t.form.is_empty()) {
            return Err(format!("empty token form (pos {:?})", t.pos));
        }
        let n = self.tokens.len();
        for arc in &self.arcs {
            if arc.head_index >= n || arc.dependent_index >= n {
                return Err(format!(
                    "arc {}({}, {}) outside {} tokens",
                    arc.relation, arc.head_index, arc.dependent_index, n
                ));
            }
            if arc.head_index == arc.dependent_index {
                return Err(format!("arc {} is a self-loop", arc.relation));
            }
        }
        let len = self.text.chars().count();
        for &(s, e) in &self.quote_spans {
            if s > e || e > len {
                return Err(format!("quote span [{s}, {e}) outside text of {len} chars"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Turn {
    #[serde(deserialize_with = "string_or_number")]
    pub id: String,
    pub speaker: String,
    #[serde(
        default,
        deserialize_with = "opt_string_or_number",
        skip_serializing_if = "Option::is_none"
    )]
    pub reply_to: Option<String>,
    pub units: Vec<TextUnit>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discussion {
    #[serde(deserialize_with = "string_or_number")]
    pub id: String,
    pub turns: Vec<Turn>,
    /// 1-based line of the record in its source stream, when parsed.
    #[serde(skip)]
    pub source_line: Option<usize>,
}

impl Discussion {
    pub fn participant_count(&self) -> usize {
        self.turns
            .iter()
            .map(|t| t.speaker.as_str())
            .collect::<HashSet<_>>()
            .len()
    }

    pub fn turn(&self, id: &str) -> Option<&Turn> {
        self.turns.iter().find(|t| t.id == id)
    }

    /// The turn this turn replies to, if any.
    pub fn target_of(&self, turn: &Turn) -> Option<&Turn> {
        turn.reply_to.as_deref().and_then(|id| self.turn(id))
    }

    fn validate(&self) -> std::result::Result<(), String> {
        let mut seen = BTreeSet::new();
        for turn in &self.turns {
            if turn.units.is_empty() {
                return Err(format!("turn {} has no units", turn.id));
            }
            if let Some(target) = &turn.reply_to {
                if !seen.contains(target.as_str()) {
                    return Err(format!(
                        "turn {} replies to {target}, which is not an earlier turn",
                        turn.id
                    ));
                }
            }
            if !seen.insert(turn.id.as_str()) {
                return Err(format!("duplicate turn id {}", turn.id));
            }
        }
        Ok(())
    }
}

fn string_or_number<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<String, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Id {
        S(String),
        I(i64),
    }
    Ok(match Id::deserialize(d)? {
        Id::S(s) => s,
        Id::I(i) => i.to_string(),
    })
}

fn opt_string_or_number<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<String>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Id {
        S(String),
        I(i64),
    }
    Ok(Option::<Id>::deserialize(d)?.map(|id| match id {
        Id::S(s) => s,
        Id::I(i) => i.to_string(),
    }))
}

/// Parses a JSONL corpus stream. Blank lines are skipped.
pub fn parse_corpus<R: BufRead>(reader: R) -> Result<Vec<Discussion>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let mut d: Discussion = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        d.source_line = Some(line_no);
        d.validate().map_err(|message| Error::Structure {
            discussion: format!("{} (line {line_no})", d.id),
            message,
        })?;
        for turn in &d.turns {
            for (k, unit) in turn.units.iter().enumerate() {
                unit.validate().map_err(|message| Error::Structure {
                    discussion: format!("{} (line {line_no})", d.id),
                    message: format!("turn {} unit {k}: {message}", turn.id),
                })?;
            }
        }
        out.push(d);
    }
    Ok(out)
}

pub fn parse_corpus_str(s: &str) -> Result<Vec<Discussion>> {
    parse_corpus(s.as_bytes())
}

pub fn write_corpus<W: Write>(mut writer: W, corpus: &[Discussion]) -> std::io::Result<()> {
    for d in corpus {
        serde_json::to_writer(&mut writer, d)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

/// Maps per-annotator AAWD detail onto the 5-point scale.
///
/// Span selections by two or more annotators give the strong label, a single
/// annotator or a turn-level label gives the weak one. A unit carrying both
/// positive and negative marks is neutral.
pub fn map_aawd_labels(unit: &TextUnit) -> OrdinalLabel {
    let Some(ann) = &unit.annotation_detail else {
        return OrdinalLabel::O;
    };
    let len = unit.text.chars().count();
    let mut agree_span = BTreeSet::new();
    let mut disagree_span = BTreeSet::new();
    for s in &ann.spans {
        // spans are unit-relative; one starting past the end selects nothing here
        if s.start >= len.max(1) {
            continue;
        }
        match s.polarity {
            Polarity::Agreement => {
                agree_span.insert(s.annotator.as_str());
            }
            Polarity::Disagreement => {
                disagree_span.insert(s.annotator.as_str());
            }
            Polarity::Neutral => {}
        }
    }
    let agree_turn = ann.turn_labels.iter().any(|t| t.polarity == Polarity::Agreement);
    let disagree_turn = ann.turn_labels.iter().any(|t| t.polarity == Polarity::Disagreement);

    let positive = !agree_span.is_empty() || agree_turn;
    let negative = !disagree_span.is_empty() || disagree_turn;
    match (positive, negative) {
        (true, true) | (false, false) => OrdinalLabel::O,
        (true, false) if agree_span.len() >= 2 => OrdinalLabel::PP,
        (true, false) => OrdinalLabel::P,
        (false, true) if disagree_span.len() >= 2 => OrdinalLabel::NN,
        (false, true) => OrdinalLabel::N,
    }
}

/// Bins a mean IAC score: `[-5,-3]` NN, `(-3,-1]` N, `[1,3)` P, `[3,5]` PP,
/// everything else O.
pub fn map_iac_score(mean_score: f64) -> Result<OrdinalLabel> {
    if !(-5.0..=5.0).contains(&mean_score) {
        return Err(Error::Range {
            value: mean_score,
            min: -5.0,
            max: 5.0,
        });
    }
    Ok(if mean_score <= -3.0 {
        OrdinalLabel::NN
    } else if mean_score <= -1.0 {
        OrdinalLabel::N
    } else if mean_score >= 3.0 {
        OrdinalLabel::PP
    } else if mean_score >= 1.0 {
        OrdinalLabel::P
    } else {
        OrdinalLabel::O
    })
}

/// Keeps discussions with at least `min_participants` distinct speakers.
pub fn filter_discussions(corpus: &[Discussion], min_participants: usize) -> Vec<Discussion> {
    corpus
        .iter()
        .filter(|d| d.participant_count() >= min_participants)
        .cloned()
        .collect()
}

/// Where a unit's training/evaluation label comes from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum LabelSource {
    /// The `label` field.
    #[default]
    Gold,
    /// Per-annotator AAWD spans and turn labels.
    Aawd,
    /// Mean of the IAC segment scores.
    Iac,
}

impl LabelSource {
    pub fn resolve(self, unit: &TextUnit) -> Result<Option<OrdinalLabel>> {
        match self {
            LabelSource::Gold => Ok(unit.gold_label),
            LabelSource::Aawd => Ok(unit.annotation_detail.as_ref().map(|_| map_aawd_labels(unit))),
            LabelSource::Iac => match &unit.annotation_detail {
                Some(ann) if !ann.iac_scores.is_empty() => {
                    let mean = ann.iac_scores.iter().sum::<f64>() / ann.iac_scores.len() as f64;
                    map_iac_score(mean).map(Some)
                }
                _ => Ok(None),
            },
        }
    }
}
