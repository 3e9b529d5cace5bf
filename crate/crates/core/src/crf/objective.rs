//! Penalized conditional log-likelihood and its gradient over free parameters.

use rayon::prelude::*;

use crate::corpus::OrdinalLabel;
use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::isotonic::{pullback, reparameterize, AuxParams, ConstraintGroup, Direction};

use super::inference::Lattice;
use super::model::{node_scores, sequence_score, CrfModel, FeatureIndex, NUM_LABELS, NUM_TRANSITIONS};

/// Sequences per parallel work item. Partial sums are reduced in chunk order
/// so the result does not depend on the thread count.
const CHUNK: usize = 16;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LabeledSequence {
    pub features: Vec<FeatureVector>,
    pub labels: Vec<OrdinalLabel>,
}

impl LabeledSequence {
    pub fn new(features: Vec<FeatureVector>, labels: Vec<OrdinalLabel>) -> Self {
        Self { features, labels }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

#[derive(Clone, Debug)]
pub(crate) struct EncodedSequence {
    pub features: Vec<Vec<u32>>,
    pub labels: Vec<usize>,
}

/// Free-vector layout: 25 transitions, then five slots per feature. A plain
/// feature's slots are its natural weights; a constrained feature's slots are
/// `(b, rho_2..rho_5)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamLayout {
    directions: Vec<Option<Direction>>,
}

impl ParamLayout {
    pub fn new(n_features: usize, constraints: &[ConstraintGroup]) -> Self {
        let mut directions = vec![None; n_features];
        for g in constraints {
            directions[g.feature_id as usize] = Some(g.direction);
        }
        Self { directions }
    }

    pub fn len(&self) -> usize {
        NUM_TRANSITIONS + NUM_LABELS * self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn n_features(&self) -> usize {
        self.directions.len()
    }

    pub fn n_constrained(&self) -> usize {
        self.directions.iter().filter(|d| d.is_some()).count()
    }

    pub fn direction(&self, feature: usize) -> Option<Direction> {
        self.directions[feature]
    }

    /// Natural (transition, emission) weights for a free vector.
    pub fn to_natural(&self, free: &[f64]) -> ([f64; NUM_TRANSITIONS], Vec<f64>) {
        debug_assert_eq!(free.len(), self.len());
        let mut trans = [0.0; NUM_TRANSITIONS];
        trans.copy_from_slice(&free[..NUM_TRANSITIONS]);
        let mut emissions = free[NUM_TRANSITIONS..].to_vec();
        for (f, dir) in self.directions.iter().enumerate() {
            if let Some(dir) = dir {
                let slot = &mut emissions[f * NUM_LABELS..(f + 1) * NUM_LABELS];
                let mu = reparameterize(&AuxParams::from_slice(slot), *dir);
                slot.copy_from_slice(&mu);
            }
        }
        (trans, emissions)
    }

    /// Chains a natural-space gradient (same shape as the free vector) through
    /// the re-parameterization, in place.
    pub fn chain(&self, free: &[f64], grad: &mut [f64]) {
        for (f, dir) in self.directions.iter().enumerate() {
            if let Some(dir) = dir {
                let r = NUM_TRANSITIONS + f * NUM_LABELS..NUM_TRANSITIONS + (f + 1) * NUM_LABELS;
                let aux = AuxParams::from_slice(&free[r.clone()]);
                let g: [f64; NUM_LABELS] = std::array::from_fn(|j| grad[r.start + j]);
                grad[r].copy_from_slice(&pullback(&aux, *dir, &g));
            }
        }
    }

    /// Free vector reproducing a model's weights. Fails if a constrained row
    /// is not monotone.
    pub fn from_model(&self, model: &CrfModel) -> Result<Vec<f64>> {
        let mut free = Vec::with_capacity(self.len());
        free.extend_from_slice(model.transitions());
        free.extend_from_slice(model.emissions());
        for (f, dir) in self.directions.iter().enumerate() {
            if let Some(dir) = dir {
                let row = model.emission_row(f as u32);
                let aux = AuxParams::from_natural(&row, *dir).ok_or_else(|| {
                    Error::Input(format!(
                        "feature {} violates its {dir} constraint",
                        model.feature_index().name(f as u32)
                    ))
                })?;
                let b = NUM_TRANSITIONS + f * NUM_LABELS;
                free[b..b + NUM_LABELS].copy_from_slice(&aux.to_array());
            }
        }
        Ok(free)
    }
}

/// Training objective over a fixed dataset.
pub struct Objective {
    layout: ParamLayout,
    data: Vec<EncodedSequence>,
    /// Gold feature counts in natural-parameter space.
    empirical: Vec<f64>,
    l2_variance: f64,
}

impl Objective {
    /// `l2_variance = f64::INFINITY` disables the penalty.
    pub fn new(
        index: &FeatureIndex,
        constraints: &[ConstraintGroup],
        data: &[LabeledSequence],
        l2_variance: f64,
    ) -> Result<Self> {
        if !(l2_variance > 0.0) {
            return Err(Error::Config(format!("l2 variance {l2_variance} must be positive")));
        }
        let layout = ParamLayout::new(index.len(), constraints);
        let mut encoded = Vec::with_capacity(data.len());
        let mut empirical = vec![0.0; layout.len()];
        for (i, seq) in data.iter().enumerate() {
            if seq.features.len() != seq.labels.len() {
                return Err(Error::Data(format!(
                    "sequence {i}: {} feature vectors for {} labels",
                    seq.features.len(),
                    seq.labels.len()
                )));
            }
            if seq.is_empty() {
                return Err(Error::Data(format!("sequence {i} is empty")));
            }
            let features: Vec<Vec<u32>> = seq.features.iter().map(|x| index.encode(x)).collect();
            let labels: Vec<usize> = seq.labels.iter().map(|l| l.index()).collect();
            for (t, &y) in labels.iter().enumerate() {
                if t > 0 {
                    empirical[labels[t - 1] * NUM_LABELS + y] += 1.0;
                }
                for &f in &features[t] {
                    empirical[NUM_TRANSITIONS + f as usize * NUM_LABELS + y] += 1.0;
                }
            }
            encoded.push(EncodedSequence { features, labels });
        }
        Ok(Self {
            layout,
            data: encoded,
            empirical,
            l2_variance,
        })
    }

    pub fn layout(&self) -> &ParamLayout {
        &self.layout
    }

    pub fn dimension(&self) -> usize {
        self.layout.len()
    }

    /// Penalized log-likelihood and its gradient with respect to `free`.
    pub fn evaluate(&self, free: &[f64]) -> (f64, Vec<f64>) {
        assert_eq!(free.len(), self.layout.len(), "free vector length");
        let (trans, emissions) = self.layout.to_natural(free);
        let dim = self.layout.len();

        let partials: Vec<(f64, Vec<f64>)> = self
            .data
            .par_chunks(CHUNK)
            .map(|chunk| {
                let mut ll = 0.0;
                let mut expected = vec![0.0; dim];
                for seq in chunk {
                    let nodes = node_scores(&emissions, &seq.features);
                    let gold = sequence_score(&nodes, &trans, seq.labels.iter().copied());
                    let lattice = Lattice::new(nodes, &trans);
                    ll += gold - lattice.log_partition();
                    for t in 0..lattice.len() {
                        let m = lattice.unary_marginals(t);
                        for &f in &seq.features[t] {
                            let b = NUM_TRANSITIONS + f as usize * NUM_LABELS;
                            for y in 0..NUM_LABELS {
                                expected[b + y] += m[y];
                            }
                        }
                        if t > 0 {
                            let pm = lattice.pairwise_marginals(t);
                            for p in 0..NUM_LABELS {
                                for c in 0..NUM_LABELS {
                                    expected[p * NUM_LABELS + c] += pm[p][c];
                                }
                            }
                        }
                    }
                }
                (ll, expected)
            })
            .collect();

        let mut ll = 0.0;
        let mut grad = self.empirical.clone();
        for (part_ll, expected) in &partials {
            ll += part_ll;
            for (g, e) in grad.iter_mut().zip(expected) {
                *g -= e;
            }
        }

        if self.l2_variance.is_finite() {
            let natural = trans.iter().chain(emissions.iter());
            let mut penalty = 0.0;
            for (g, w) in grad.iter_mut().zip(natural) {
                penalty += w * w;
                *g -= w / self.l2_variance;
            }
            ll -= penalty / (2.0 * self.l2_variance);
        }

        self.layout.chain(free, &mut grad);
        (ll, grad)
    }
}

/// Objective and gradient at a model's current weights, over its own
/// constraint binding.
pub fn objective_and_gradient(model: &CrfModel, data: &[LabeledSequence], l2_variance: f64) -> Result<(f64, Vec<f64>)> {
    let obj = Objective::new(model.feature_index(), model.constraints(), data, l2_variance)?;
    let free = obj.layout().from_model(model)?;
    Ok(obj.evaluate(&free))
}
