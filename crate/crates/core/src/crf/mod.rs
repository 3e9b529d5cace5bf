//! Linear-chain CRF over the ordinal label set: exact inference, penalized
//! likelihood, and training with optional isotonic constraints.

mod inference;
pub mod lbfgs;
mod model;
mod objective;
mod sample;
mod train;

pub use inference::{log_sum_exp, viterbi_decode, Lattice};
pub use model::{CrfModel, FeatureIndex, NUM_LABELS, NUM_TRANSITIONS};
pub use objective::{objective_and_gradient, LabeledSequence, Objective, ParamLayout};
pub use sample::sample_labels;
pub use train::{index_features, train, TrainConfig, TrainReport};
