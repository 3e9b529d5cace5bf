//! Data drawn from a planted CRF whose extreme labels are driven by a known
//! sentiment lexicon. Used for end-to-end checks and the examples.

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::corpus::{Discussion, OrdinalLabel, TextUnit, Token, Turn};
use crate::crf::{sample_labels, CrfModel, FeatureIndex, LabeledSequence, NUM_LABELS};
use crate::error::Result;
use crate::features::FeatureVector;
use crate::lexicon::{Lexicon, LexiconEntry, UnitType};

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticConfig {
    pub positive_words: usize,
    pub negative_words: usize,
    pub filler_words: usize,
    /// Probability that a token is drawn from the lexicon words.
    pub lexicon_rate: f64,
    /// Inclusive range of units per sequence.
    pub units_per_sequence: (usize, usize),
    /// Inclusive range of tokens per unit.
    pub tokens_per_unit: (usize, usize),
    /// Range of the per-word slope of lexicon emission rows.
    pub strength: (f64, f64),
    /// Standard deviation of filler emission weights.
    pub filler_noise: f64,
    /// Per-filler pull towards O.
    pub neutral_pull: f64,
    /// Bonus on repeating the previous label.
    pub stickiness: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            positive_words: 80,
            negative_words: 80,
            filler_words: 300,
            lexicon_rate: 0.15,
            units_per_sequence: (1, 5),
            tokens_per_unit: (4, 10),
            strength: (0.3, 1.0),
            filler_noise: 0.8,
            neutral_pull: 0.25,
            stickiness: 1.0,
        }
    }
}

/// A ground-truth model plus the lexicon whose rows it keeps monotone.
#[derive(Clone, Debug)]
pub struct PlantedModel {
    pub model: CrfModel,
    pub lexicon: Lexicon,
    pub positive: Vec<String>,
    pub negative: Vec<String>,
    pub filler: Vec<String>,
    lexicon_rate: f64,
    units_per_sequence: (usize, usize),
    tokens_per_unit: (usize, usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSequence {
    pub units: Vec<TextUnit>,
    pub labels: Vec<OrdinalLabel>,
}

impl SyntheticSequence {
    pub fn to_labeled(&self) -> LabeledSequence {
        LabeledSequence::new(self.units.iter().map(unigram_features).collect(), self.labels.clone())
    }
}

/// `lex:uni=` features of the unit's lowercased tokens.
pub fn unigram_features(unit: &TextUnit) -> FeatureVector {
    FeatureVector::from_names(unit.tokens.iter().map(|t| format!("lex:uni={}", t.form.to_lowercase())))
}

fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller; one draw is enough here
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

impl PlantedModel {
    pub fn generate<R: Rng>(config: &SyntheticConfig, rng: &mut R) -> Result<Self> {
        let positive: Vec<String> = (0..config.positive_words).map(|i| format!("good{i:03}")).collect();
        let negative: Vec<String> = (0..config.negative_words).map(|i| format!("bad{i:03}")).collect();
        let filler: Vec<String> = (0..config.filler_words).map(|i| format!("w{i:03}")).collect();

        let mut index = FeatureIndex::default();
        for w in positive.iter().chain(&negative).chain(&filler) {
            index.insert(format!("lex:uni={w}"));
        }
        let mut model = CrfModel::new(index);
        for prev in OrdinalLabel::ALL {
            for cur in OrdinalLabel::ALL {
                let w = if prev == cur { config.stickiness } else { 0.0 };
                model.set_transition(prev, cur, w);
            }
        }

        let (lo, hi) = config.strength;
        let mut entries = Vec::new();
        let mut feature = 0u32;
        for (words, sign) in [(&positive, 1.0), (&negative, -1.0)] {
            for w in words {
                let slope = rng.random_range(lo..=hi);
                for y in OrdinalLabel::ALL {
                    model.set_emission(feature, y, sign * slope * (y.index() as f64 - 2.0));
                }
                entries.push(LexiconEntry::new(UnitType::Unigram, w.clone(), sign * slope / hi));
                feature += 1;
            }
        }
        for _ in &filler {
            for y in OrdinalLabel::ALL {
                let pull = -config.neutral_pull * (y.index() as f64 - 2.0).abs();
                model.set_emission(feature, y, pull + config.filler_noise * gaussian(rng));
            }
            feature += 1;
        }

        Ok(Self {
            model,
            lexicon: Lexicon::new(entries)?,
            positive,
            negative,
            filler,
            lexicon_rate: config.lexicon_rate,
            units_per_sequence: config.units_per_sequence,
            tokens_per_unit: config.tokens_per_unit,
        })
    }

    fn sample_unit<R: Rng>(&self, rng: &mut R) -> TextUnit {
        let (lo, hi) = self.tokens_per_unit;
        let n = rng.random_range(lo..=hi);
        let tokens = (0..n)
            .map(|_| {
                let pool = if rng.random_bool(self.lexicon_rate) {
                    if rng.random_bool(0.5) {
                        &self.positive
                    } else {
                        &self.negative
                    }
                } else {
                    &self.filler
                };
                Token::new(pool.choose(rng).expect("non-empty word pool").clone(), "X")
            })
            .collect();
        TextUnit::from_tokens(tokens)
    }

    /// Draws observations uniformly, then labels from the planted conditional.
    pub fn sample<R: Rng>(&self, n_sequences: usize, rng: &mut R) -> Vec<SyntheticSequence> {
        let (lo, hi) = self.units_per_sequence;
        (0..n_sequences)
            .map(|_| {
                let len = rng.random_range(lo..=hi);
                let mut units: Vec<TextUnit> = (0..len).map(|_| self.sample_unit(rng)).collect();
                let xs: Vec<FeatureVector> = units.iter().map(unigram_features).collect();
                let labels = sample_labels(&self.model, &xs, rng);
                for (u, &l) in units.iter_mut().zip(&labels) {
                    u.gold_label = Some(l);
                }
                SyntheticSequence { units, labels }
            })
            .collect()
    }

    /// Label counts of a sample, indexed by label.
    pub fn label_histogram(sample: &[SyntheticSequence]) -> [usize; NUM_LABELS] {
        let mut h = [0; NUM_LABELS];
        for l in sample.iter().flat_map(|s| &s.labels) {
            h[l.index()] += 1;
        }
        h
    }
}

/// Packs sequences into discussions of `turns_per_discussion` turns, each
/// replying to the previous one, with speakers cycling over `participants`.
pub fn to_corpus(sequences: &[SyntheticSequence], turns_per_discussion: usize, participants: usize) -> Vec<Discussion> {
    sequences
        .chunks(turns_per_discussion.max(1))
        .enumerate()
        .map(|(d, chunk)| Discussion {
            id: format!("d{d}"),
            turns: chunk
                .iter()
                .enumerate()
                .map(|(t, s)| Turn {
                    id: format!("t{t}"),
                    speaker: format!("user{}", t % participants.max(1)),
                    reply_to: (t > 0).then(|| format!("t{}", t - 1)),
                    units: s.units.clone(),
                })
                .collect(),
            source_line: None,
        })
        .collect()
}
