//! Scoring, label collapsing, downsampling, the lexicon polarity baseline and
//! χ² feature ranking.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{OrdinalLabel, TextUnit};
use crate::crf::LabeledSequence;
use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::lexicon::{Lexicon, Sentiment};
use crate::lexicon_builder::unit_occurrences;

/// The coarse label space used for scoring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThreeWay {
    Agreement,
    Disagreement,
    Neutral,
}

impl ThreeWay {
    pub const ALL: [ThreeWay; 3] = [ThreeWay::Agreement, ThreeWay::Disagreement, ThreeWay::Neutral];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ThreeWay::Agreement => "agreement",
            ThreeWay::Disagreement => "disagreement",
            ThreeWay::Neutral => "neutral",
        }
    }
}

impl fmt::Display for ThreeWay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ThreeWay {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "agreement" | "agree" => Ok(ThreeWay::Agreement),
            "disagreement" | "disagree" => Ok(ThreeWay::Disagreement),
            "neutral" => Ok(ThreeWay::Neutral),
            other => other
                .to_ascii_uppercase()
                .parse::<OrdinalLabel>()
                .map(collapse_labels)
                .map_err(|_| Error::Input(format!("unknown 3-way label {s:?}"))),
        }
    }
}

impl From<OrdinalLabel> for ThreeWay {
    fn from(l: OrdinalLabel) -> Self {
        collapse_labels(l)
    }
}

pub fn collapse_labels(label: OrdinalLabel) -> ThreeWay {
    match label {
        OrdinalLabel::NN | OrdinalLabel::N => ThreeWay::Disagreement,
        OrdinalLabel::O => ThreeWay::Neutral,
        OrdinalLabel::P | OrdinalLabel::PP => ThreeWay::Agreement,
    }
}

#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, clap::ValueEnum, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum ScoreMode {
    #[default]
    Strict,
    Soft,
}

impl fmt::Display for ScoreMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScoreMode::Strict => "strict",
            ScoreMode::Soft => "soft",
        })
    }
}

/// A gold label plus whether it was inherited from a turn-level annotation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GoldUnit {
    pub label: ThreeWay,
    pub turn_inherited: bool,
}

impl GoldUnit {
    pub fn new(label: impl Into<ThreeWay>) -> Self {
        Self {
            label: label.into(),
            turn_inherited: false,
        }
    }

    pub fn inherited(label: impl Into<ThreeWay>) -> Self {
        Self {
            label: label.into(),
            turn_inherited: true,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

/// Per-class TP/FP/FN, indexed by [`ThreeWay::index`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub classes: [ClassCounts; 3],
}

impl ConfusionCounts {
    pub fn get(&self, class: ThreeWay) -> ClassCounts {
        self.classes[class.index()]
    }

    pub fn tally(gold: &[GoldUnit], pred: &[ThreeWay], mode: ScoreMode) -> Result<Self> {
        if gold.len() != pred.len() {
            return Err(Error::Input(format!(
                "{} gold units but {} predictions",
                gold.len(),
                pred.len()
            )));
        }
        let mut c = Self::default();
        for (g, &p) in gold.iter().zip(pred) {
            let soft_credit =
                mode == ScoreMode::Soft && g.turn_inherited && g.label != ThreeWay::Neutral && p == ThreeWay::Neutral;
            if soft_credit || g.label == p {
                c.classes[p.index()].tp += 1;
            } else {
                c.classes[p.index()].fp += 1;
                c.classes[g.label.index()].fn_ += 1;
            }
        }
        Ok(c)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl ClassScore {
    pub fn from_counts(c: ClassCounts) -> Self {
        let ratio = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(c.tp, c.tp + c.fp);
        let recall = ratio(c.tp, c.tp + c.fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Self { precision, recall, f1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct F1Report {
    pub mode: ScoreMode,
    pub counts: ConfusionCounts,
    pub scores: [ClassScore; 3],
}

impl F1Report {
    pub fn get(&self, class: ThreeWay) -> ClassScore {
        self.scores[class.index()]
    }

    pub fn macro_f1(&self) -> f64 {
        self.scores.iter().map(|s| s.f1).sum::<f64>() / 3.0
    }

    pub fn write_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "class\tprecision\trecall\tf1\tmode")?;
        for class in ThreeWay::ALL {
            let s = self.get(class);
            writeln!(w, "{class}\t{}\t{}\t{}\t{}", s.precision, s.recall, s.f1, self.mode)?;
        }
        Ok(())
    }

    pub fn table(&self) -> String {
        let mut out = format!("{:<13} {:>9} {:>9} {:>9}  ({})\n", "class", "P", "R", "F1", self.mode);
        for class in ThreeWay::ALL {
            let s = self.get(class);
            out.push_str(&format!(
                "{:<13} {:>9.2} {:>9.2} {:>9.2}\n",
                class.as_str(),
                100.0 * s.precision,
                100.0 * s.recall,
                100.0 * s.f1
            ));
        }
        out.push_str(&format!("{:<13} {:>29.2}\n", "macro", 100.0 * self.macro_f1()));
        out
    }
}

/// Per-class precision, recall and F1.
///
/// In soft mode a unit whose label came from a turn-level annotation and that
/// is predicted neutral counts as a neutral true positive, and is not a false
/// negative of its gold class. Everything else is scored strictly.
pub fn score(gold: &[GoldUnit], pred: &[ThreeWay], mode: ScoreMode) -> Result<F1Report> {
    let counts = ConfusionCounts::tally(gold, pred, mode)?;
    let scores = [0, 1, 2].map(|i| ClassScore::from_counts(counts.classes[i]));
    Ok(F1Report { mode, counts, scores })
}

/// Drops training turns whose units are all O.
pub fn downsample(turns: Vec<LabeledSequence>) -> Vec<LabeledSequence> {
    turns
        .into_iter()
        .filter(|t| t.labels.iter().any(|&l| l != OrdinalLabel::O))
        .collect()
}

/// Positive and negative lexicon matches among the unit's text units, counting
/// repeated occurrences.
pub fn polarity_counts(unit: &TextUnit, lexicon: &Lexicon) -> (usize, usize) {
    let senti = lexicon.sentiment_words();
    let (mut pos, mut neg) = (0, 0);
    for key in unit_occurrences(unit, &senti) {
        match lexicon.get(key.unit_type, &key.surface).map(|e| e.sentiment()) {
            Some(Sentiment::Positive) => pos += 1,
            Some(Sentiment::Negative) => neg += 1,
            None => {}
        }
    }
    (pos, neg)
}

/// More positive matches → agreement, more negative → disagreement, else neutral.
pub fn polarity_baseline(unit: &TextUnit, lexicon: &Lexicon) -> ThreeWay {
    let (pos, neg) = polarity_counts(unit, lexicon);
    match pos.cmp(&neg) {
        std::cmp::Ordering::Greater => ThreeWay::Agreement,
        std::cmp::Ordering::Less => ThreeWay::Disagreement,
        std::cmp::Ordering::Equal => ThreeWay::Neutral,
    }
}

/// χ² of the 2×2 table `[[a, b], [c, d]]` without continuity correction.
/// Zero when any margin is empty.
pub fn chi2_2x2(a: u64, b: u64, c: u64, d: u64) -> f64 {
    let (a, b, c, d) = (a as f64, b as f64, c as f64, d as f64);
    let n = a + b + c + d;
    let denom = (a + b) * (c + d) * (a + c) * (b + d);
    if denom == 0.0 {
        return 0.0;
    }
    n * (a * d - b * c).powi(2) / denom
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chi2Entry {
    pub feature: String,
    pub class: ThreeWay,
    pub chi2: f64,
}

/// Ranks features by one-vs-rest χ².
///
/// With `per_class` every (feature, class) pair is an entry; otherwise each
/// feature appears once with the class giving its largest statistic. Order is
/// χ² descending, then feature name, then class.
pub fn chi2_rank(dataset: &[(FeatureVector, ThreeWay)], per_class: bool) -> Result<Vec<Chi2Entry>> {
    let mut class_sizes = [0u64; 3];
    for (_, y) in dataset {
        class_sizes[y.index()] += 1;
    }
    if let Some(c) = ThreeWay::ALL.iter().find(|c| class_sizes[c.index()] == 0) {
        return Err(Error::Statistics(format!("class {c} has no examples")));
    }
    let n = dataset.len() as u64;

    let mut present: BTreeMap<&str, [u64; 3]> = BTreeMap::new();
    for (fv, y) in dataset {
        let names: BTreeSet<&str> = fv.names().collect();
        for name in names {
            present.entry(name).or_default()[y.index()] += 1;
        }
    }

    let mut out = Vec::new();
    for (feature, with) in present {
        let total_with: u64 = with.iter().sum();
        let stats = ThreeWay::ALL.map(|class| {
            let k = class.index();
            let a = with[k];
            let b = total_with - a;
            let c = class_sizes[k] - a;
            let d = n - a - b - c;
            (class, chi2_2x2(a, b, c, d))
        });
        if per_class {
            out.extend(stats.iter().map(|&(class, chi2)| Chi2Entry {
                feature: feature.to_string(),
                class,
                chi2,
            }));
        } else {
            let &(class, chi2) = stats
                .iter()
                .fold(&stats[0], |best, s| if s.1 > best.1 { s } else { best });
            out.push(Chi2Entry {
                feature: feature.to_string(),
                class,
                chi2,
            });
        }
    }
    out.sort_by(|x, y| {
        y.chi2
            .total_cmp(&x.chi2)
            .then_with(|| x.feature.cmp(&y.feature))
            .then(x.class.cmp(&y.class))
    });
    Ok(out)
}

pub fn write_chi2_tsv<W: Write>(mut w: W, ranking: &[Chi2Entry]) -> std::io::Result<()> {
    writeln!(w, "rank\tfeature\tchi2\tclass")?;
    for (i, e) in ranking.iter().enumerate() {
        writeln!(w, "{}\t{}\t{}\t{}", i + 1, e.feature, e.chi2, e.class)?;
    }
    Ok(())
}
