use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::isotonic::build_constraints;
use crate::lexicon::Lexicon;

use super::lbfgs::{minimize, LbfgsConfig, Termination};
use super::model::{CrfModel, FeatureIndex};
use super::objective::{LabeledSequence, Objective};

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    /// Gaussian prior variance on every natural weight.
    pub l2_variance: f64,
    pub max_iterations: usize,
    /// Relative objective change over five iterations that counts as converged.
    pub relative_tolerance: f64,
    /// Seeds the initial weights.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            l2_variance: 10.0,
            max_iterations: 300,
            relative_tolerance: 1e-6,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.l2_variance > 0.0) {
            return Err(Error::Config("l2 variance must be positive".into()));
        }
        if !(self.relative_tolerance > 0.0) {
            return Err(Error::Config("relative tolerance must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct TrainReport {
    pub iterations: usize,
    /// Penalized log-likelihood after each accepted step (starting point first).
    pub objective_history: Vec<f64>,
    pub objective: f64,
    pub converged: bool,
    pub free_parameters: usize,
    pub constrained_features: usize,
}

/// Feature index over every feature seen in `data`, in sorted name order.
pub fn index_features(data: &[LabeledSequence]) -> FeatureIndex {
    let names: BTreeSet<&str> = data
        .iter()
        .flat_map(|s| s.features.iter())
        .flat_map(|fv| fv.names())
        .collect();
    FeatureIndex::from_names(names)
}

/// Maximum penalized likelihood training. With a lexicon, every emission row
/// matching a lexicon entry is trained through the monotone re-parameterization.
pub fn train(
    data: &[LabeledSequence],
    lexicon: Option<&Lexicon>,
    config: &TrainConfig,
) -> Result<(CrfModel, TrainReport)> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::Data("no training sequences".into()));
    }
    let index = index_features(data);
    let constraints = lexicon.map(|lex| build_constraints(lex, &index)).unwrap_or_default();
    let objective = Objective::new(&index, &constraints, data, config.l2_variance)?;
    let layout = objective.layout().clone();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let x0: Vec<f64> = (0..objective.dimension())
        .map(|_| rng.random_range(-0.05..0.05))
        .collect();

    let lbfgs = LbfgsConfig {
        max_iterations: config.max_iterations,
        relative_tolerance: config.relative_tolerance,
        ..LbfgsConfig::default()
    };
    let result = minimize(
        |x| {
            let (v, g) = objective.evaluate(x);
            (-v, g.into_iter().map(|gi| -gi).collect())
        },
        x0,
        &lbfgs,
    );
    if result.termination == Termination::NonFinite || !result.value.is_finite() {
        return Err(Error::Training {
            iteration: result.iterations,
            message: format!(
                "non-finite objective (last finite values: {:?})",
                result.history.iter().rev().take(3).collect::<Vec<_>>()
            ),
        });
    }
    log::info!(
        "trained in {} iterations ({:?}), objective {:.6}",
        result.iterations,
        result.termination,
        -result.value
    );

    let (transitions, emissions) = layout.to_natural(&result.x);
    let model = CrfModel::from_parts(index, transitions, emissions, constraints)?;
    let report = TrainReport {
        iterations: result.iterations,
        objective_history: result.history.iter().map(|v| -v).collect(),
        objective: -result.value,
        converged: result.termination == Termination::Converged,
        free_parameters: layout.len(),
        constrained_features: layout.n_constrained(),
    };
    Ok((model, report))
}
