//! Independent oracles shared by the integration tests. Nothing here calls
//! the crate's inference code.

#![allow(dead_code)]

use rand::Rng;

use isocrf::crf::{CrfModel, FeatureIndex, LabeledSequence};
use isocrf::features::FeatureVector;
use isocrf::OrdinalLabel;

pub const L: usize = 5;

/// Every label sequence of length `n`, in lexicographic order.
pub fn all_sequences(n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..L).map(move |y| {
                    let mut q = p.clone();
                    q.push(y);
                    q
                })
            })
            .collect();
    }
    out
}

/// Unnormalized log score from raw weight arrays.
pub fn raw_score(trans: &[f64], emissions: &[f64], xs: &[Vec<usize>], ys: &[usize]) -> f64 {
    let mut s = 0.0;
    for (t, &y) in ys.iter().enumerate() {
        if t > 0 {
            s += trans[ys[t - 1] * L + y];
        }
        for &f in &xs[t] {
            s += emissions[f * L + y];
        }
    }
    s
}

pub struct Enumeration {
    pub log_z: f64,
    pub unary: Vec<[f64; L]>,
    /// `pairwise[t][p][c]` for t >= 1; index 0 is unused.
    pub pairwise: Vec<[[f64; L]; L]>,
    pub best_score: f64,
    /// Lexicographically smallest argmax.
    pub best: Vec<usize>,
}

pub fn enumerate(trans: &[f64], emissions: &[f64], xs: &[Vec<usize>]) -> Enumeration {
    let n = xs.len();
    let seqs = all_sequences(n);
    let scores: Vec<f64> = seqs.iter().map(|ys| raw_score(trans, emissions, xs, ys)).collect();
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = scores.iter().map(|s| (s - max).exp()).sum();
    let log_z = max + z.ln();
    let mut unary = vec![[0.0; L]; n];
    let mut pairwise = vec![[[0.0; L]; L]; n];
    let mut best = seqs[0].clone();
    let mut best_score = f64::NEG_INFINITY;
    for (ys, &s) in seqs.iter().zip(&scores) {
        let p = (s - log_z).exp();
        for t in 0..n {
            unary[t][ys[t]] += p;
            if t > 0 {
                pairwise[t][ys[t - 1]][ys[t]] += p;
            }
        }
        if s > best_score {
            best_score = s;
            best = ys.clone();
        }
    }
    Enumeration {
        log_z,
        unary,
        pairwise,
        best_score,
        best,
    }
}

pub fn feature_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("lex:uni=f{i}")).collect()
}

/// Random weights in `[-scale, scale]` over `n_features` features.
pub fn random_weights<R: Rng>(rng: &mut R, n_features: usize, scale: f64) -> ([f64; 25], Vec<f64>) {
    let mut trans = [0.0; 25];
    for t in trans.iter_mut() {
        *t = rng.random_range(-scale..=scale);
    }
    let emissions = (0..n_features * L).map(|_| rng.random_range(-scale..=scale)).collect();
    (trans, emissions)
}

/// Random observation: each position fires a random non-empty subset of features.
pub fn random_observation<R: Rng>(rng: &mut R, n: usize, n_features: usize) -> Vec<Vec<usize>> {
    (0..n)
        .map(|_| {
            let mut fs: Vec<usize> = (0..n_features).filter(|_| rng.random_bool(0.4)).collect();
            if fs.is_empty() {
                fs.push(rng.random_range(0..n_features));
            }
            fs
        })
        .collect()
}

pub fn to_vectors(xs: &[Vec<usize>], names: &[String]) -> Vec<FeatureVector> {
    xs.iter()
        .map(|fs| FeatureVector::from_names(fs.iter().map(|&f| names[f].clone())))
        .collect()
}

pub fn model(names: &[String], trans: [f64; 25], emissions: Vec<f64>) -> CrfModel {
    CrfModel::from_parts(
        FeatureIndex::from_names(names.iter().cloned()),
        trans,
        emissions,
        Vec::new(),
    )
    .unwrap()
}

pub fn random_labels<R: Rng>(rng: &mut R, n: usize) -> Vec<OrdinalLabel> {
    (0..n)
        .map(|_| OrdinalLabel::from_index(rng.random_range(0..L)).unwrap())
        .collect()
}

/// Penalized log-likelihood by enumeration, from natural weights.
pub fn brute_objective(
    trans: &[f64],
    emissions: &[f64],
    data: &[(Vec<Vec<usize>>, Vec<usize>)],
    l2_variance: f64,
) -> f64 {
    let mut ll = 0.0;
    for (xs, ys) in data {
        ll += raw_score(trans, emissions, xs, ys) - enumerate(trans, emissions, xs).log_z;
    }
    let sq: f64 = trans.iter().chain(emissions).map(|w| w * w).sum();
    ll - sq / (2.0 * l2_variance)
}

/// `b + cumulative sum of signed squared roots`, written out longhand.
pub fn monotone_row(base: f64, roots: [f64; 4], ascending: bool) -> [f64; 5] {
    let s = if ascending { 1.0 } else { -1.0 };
    [
        base,
        base + s * roots[0] * roots[0],
        base + s * (roots[0] * roots[0] + roots[1] * roots[1]),
        base + s * (roots[0] * roots[0] + roots[1] * roots[1] + roots[2] * roots[2]),
        base + s * (roots[0] * roots[0] + roots[1] * roots[1] + roots[2] * roots[2] + roots[3] * roots[3]),
    ]
}

pub fn labeled(names: &[String], data: &[(Vec<Vec<usize>>, Vec<usize>)]) -> Vec<LabeledSequence> {
    data.iter()
        .map(|(xs, ys)| {
            LabeledSequence::new(
                to_vectors(xs, names),
                ys.iter().map(|&y| OrdinalLabel::from_index(y).unwrap()).collect(),
            )
        })
        .collect()
}
