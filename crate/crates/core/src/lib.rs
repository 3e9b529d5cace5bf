//! Ordinal agreement/disagreement tagging for online discussions.
//!
//! Text units (sentences or quote-delimited segments) are tagged on the
//! five-point scale NN < N < O < P < PP with a linear-chain CRF. Emission
//! weights of features that match a sentiment lexicon can be trained under
//! isotonic constraints, so that positive evidence never lowers the score of
//! a more agreeing label. The lexicon itself can be induced from an unlabeled
//! discussion corpus by label propagation over a PMI co-occurrence graph.

pub mod cli;
pub mod corpus;
pub mod crf;
pub mod error;
pub mod eval;
pub mod features;
pub mod isotonic;
pub mod lexicon;
pub mod lexicon_builder;
pub mod pipeline;
pub mod synthetic;

pub use corpus::{Discussion, OrdinalLabel, TextUnit, Turn};
pub use crf::{CrfModel, LabeledSequence, TrainConfig};
pub use error::{Error, Result};
pub use eval::{F1Report, ScoreMode, ThreeWay};
pub use features::{FeatureExtractor, FeatureVector};
pub use lexicon::Lexicon;
