//! Forward-filtering backward-sampling of label sequences from a model.

use rand::Rng;

use crate::corpus::OrdinalLabel;
use crate::features::FeatureVector;

use super::inference::Lattice;
use super::model::{CrfModel, NUM_LABELS};

fn draw<R: Rng>(rng: &mut R, log_weights: &[f64; NUM_LABELS]) -> usize {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = log_weights.iter().map(|v| (v - max).exp()).collect();
    let total: f64 = w.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (y, wy) in w.iter().enumerate() {
        if u < *wy {
            return y;
        }
        u -= wy;
    }
    NUM_LABELS - 1
}

/// Draws `y ~ p(y | x)` exactly.
pub fn sample_labels<R: Rng>(model: &CrfModel, xs: &[FeatureVector], rng: &mut R) -> Vec<OrdinalLabel> {
    if xs.is_empty() {
        return Vec::new();
    }
    let lattice = Lattice::new(model.node_scores(&model.encode(xs)), model.transitions());
    let alpha = lattice.alpha();
    let n = xs.len();
    let mut path = vec![0usize; n];
    path[n - 1] = draw(rng, &alpha[n - 1]);
    for t in (0..n - 1).rev() {
        let next = path[t + 1];
        let w: [f64; NUM_LABELS] = std::array::from_fn(|y| alpha[t][y] + model.transitions()[y * NUM_LABELS + next]);
        path[t] = draw(rng, &w);
    }
    path.into_iter().map(|y| OrdinalLabel::ALL[y]).collect()
}
