//! Monotonicity constraints on lexicon-tied emission weights.
//!
//! For a feature `w` in the positive lexicon the five emission weights
//! `mu(NN,w) <= mu(N,w) <= ... <= mu(PP,w)` must be non-decreasing along the
//! label order; negative-lexicon features must be non-increasing. Training
//! never sees the constraint directly: each constrained row is written as a
//! base value plus cumulative squared increments,
//!
//! ```text
//! ascending:  mu_j = b + sum_{i=2..j} rho_i^2
//! descending: mu_j = b - sum_{i=2..j} rho_i^2
//! ```
//!
//! which is unconstrained in `(b, rho)` and admits exact ties (`rho = 0`).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::OrdinalLabel;
use crate::crf::{CrfModel, FeatureIndex};
use crate::lexicon::{surface_key, Lexicon, UnitType};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Ascending,
    Descending,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Ascending => 1.0,
            Direction::Descending => -1.0,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Ascending => "ascending",
            Direction::Descending => "descending",
        })
    }
}

/// One lexicon-constrained emission row.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintGroup {
    pub feature: String,
    pub feature_id: u32,
    pub direction: Direction,
}

impl ConstraintGroup {
    /// Emission slots in label order.
    pub fn slots(&self) -> [usize; 5] {
        let base = self.feature_id as usize * OrdinalLabel::COUNT;
        [base, base + 1, base + 2, base + 3, base + 4]
    }
}

/// Free variables of one constrained row: a base value and four increment roots.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AuxParams {
    pub base: f64,
    pub roots: [f64; 4],
}

impl AuxParams {
    pub fn from_slice(free: &[f64]) -> Self {
        Self {
            base: free[0],
            roots: [free[1], free[2], free[3], free[4]],
        }
    }

    pub fn to_array(self) -> [f64; 5] {
        [self.base, self.roots[0], self.roots[1], self.roots[2], self.roots[3]]
    }

    /// Inverse of [`reparameterize`] for a vector already monotone in `direction`.
    /// Roots are the non-negative square roots of the gaps.
    pub fn from_natural(weights: &[f64; 5], direction: Direction) -> Option<Self> {
        let s = direction.sign();
        let mut roots = [0.0; 4];
        for i in 0..4 {
            let gap = s * (weights[i + 1] - weights[i]);
            if !(gap >= 0.0) {
                return None;
            }
            roots[i] = gap.sqrt();
        }
        Some(Self {
            base: weights[0],
            roots,
        })
    }
}

/// Maps free variables to five natural weights, monotone in `direction` by construction.
pub fn reparameterize(aux: &AuxParams, direction: Direction) -> [f64; 5] {
    let s = direction.sign();
    let mut out = [aux.base; 5];
    let mut acc = aux.base;
    for (i, r) in aux.roots.iter().enumerate() {
        acc += s * r * r;
        out[i + 1] = acc;
    }
    out
}

/// Pulls a gradient over the five natural weights back to `(b, rho_2..rho_5)`.
///
/// `d/db = sum_j g_j`, `d/d rho_i = 2 s rho_i sum_{j >= i} g_j`.
pub fn pullback(aux: &AuxParams, direction: Direction, natural_grad: &[f64; 5]) -> [f64; 5] {
    let s = direction.sign();
    let mut out = [0.0; 5];
    let mut tail = 0.0;
    for j in (1..5).rev() {
        tail += natural_grad[j];
        out[j] = 2.0 * s * aux.roots[j - 1] * tail;
    }
    out[0] = tail + natural_grad[0];
    out
}

/// Lexicon keys an emission feature's observation can match, most specific first.
///
/// `lex:uni=`/`sent:word=` match unigram entries, `lex:bi=` bigram entries,
/// `syn:rel(h,d)` dependency entries and `sent:rel(h,d)` sentiment-dependency
/// entries; relation features also match the generalized `Rel(h,d)` form.
pub fn observation_keys(feature: &str) -> Vec<(UnitType, String)> {
    if let Some(w) = feature
        .strip_prefix("lex:uni=")
        .or_else(|| feature.strip_prefix("sent:word="))
    {
        return vec![(UnitType::Unigram, surface_key(UnitType::Unigram, w))];
    }
    if let Some(b) = feature.strip_prefix("lex:bi=") {
        return vec![(UnitType::Bigram, surface_key(UnitType::Bigram, b))];
    }
    let (unit_type, rest) = if let Some(r) = feature.strip_prefix("syn:") {
        (UnitType::DepRelation, r)
    } else if let Some(r) = feature.strip_prefix("sent:") {
        (UnitType::SentimentDepRelation, r)
    } else {
        return Vec::new();
    };
    let Some(open) = rest.find('(') else {
        return Vec::new();
    };
    let rel = &rest[..open];
    if rel.is_empty() || rel.contains('=') || !rest.ends_with(')') {
        return Vec::new();
    }
    let exact = surface_key(unit_type, rest);
    let general = surface_key(unit_type, &format!("Rel{}", &rest[open..]));
    if exact == general {
        vec![(unit_type, exact)]
    } else {
        vec![(unit_type, exact), (unit_type, general)]
    }
}

fn lexicon_direction(lexicon: &Lexicon, feature: &str) -> Option<Direction> {
    observation_keys(feature).into_iter().find_map(|(t, k)| {
        lexicon.get_key(t, &k).map(|e| {
            if e.score > 0.0 {
                Direction::Ascending
            } else {
                Direction::Descending
            }
        })
    })
}

/// One group per indexed feature whose observation matches a lexicon entry.
pub fn build_constraints(lexicon: &Lexicon, feature_index: &FeatureIndex) -> Vec<ConstraintGroup> {
    feature_index
        .iter()
        .filter_map(|(id, name)| {
            lexicon_direction(lexicon, name).map(|direction| ConstraintGroup {
                feature: name.to_string(),
                feature_id: id,
                direction,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub feature: String,
    pub direction: Direction,
    pub lower: OrdinalLabel,
    pub upper: OrdinalLabel,
    /// How far the adjacent pair is out of order (> 0).
    pub gap: f64,
}

/// Adjacent label pairs whose lexicon-tied weights break the required order.
pub fn verify_monotonicity(model: &CrfModel, lexicon: &Lexicon) -> Vec<Violation> {
    let mut out = Vec::new();
    for (id, name) in model.feature_index().iter() {
        let Some(direction) = lexicon_direction(lexicon, name) else {
            continue;
        };
        let row = model.emission_row(id);
        let s = direction.sign();
        for j in 0..4 {
            let diff = s * (row[j + 1] - row[j]);
            if diff < 0.0 || diff.is_nan() {
                out.push(Violation {
                    feature: name.to_string(),
                    direction,
                    lower: OrdinalLabel::ALL[j],
                    upper: OrdinalLabel::ALL[j + 1],
                    gap: -diff,
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::LexiconEntry;

    #[test]
    fn tight_constraint() {
        let aux = AuxParams {
            base: 0.7,
            roots: [0.0; 4],
        };
        assert_eq!(reparameterize(&aux, Direction::Ascending), [0.7; 5]);
        assert_eq!(reparameterize(&aux, Direction::Descending), [0.7; 5]);
    }

    #[test]
    fn cumulative_sum() {
        let aux = AuxParams {
            base: 0.0,
            roots: [1.0; 4],
        };
        assert_eq!(reparameterize(&aux, Direction::Ascending), [0.0, 1.0, 2.0, 3.0, 4.0]);
        assert_eq!(
            reparameterize(&aux, Direction::Descending),
            [0.0, -1.0, -2.0, -3.0, -4.0]
        );
    }

    #[test]
    fn pullback_matches_finite_differences() {
        // composite objective f(mu) = sum_j c_j mu_j + 0.5 mu_j^2
        let c = [0.3, -1.2, 0.5, 2.0, -0.7];
        let f = |free: &[f64; 5], dir| {
            let mu = reparameterize(&AuxParams::from_slice(free), dir);
            mu.iter().zip(&c).map(|(m, c)| c * m + 0.5 * m * m).sum::<f64>()
        };
        for dir in [Direction::Ascending, Direction::Descending] {
            let free = [0.4, -0.8, 1.1, 0.2, -1.5];
            let aux = AuxParams::from_slice(&free);
            let mu = reparameterize(&aux, dir);
            let g: [f64; 5] = std::array::from_fn(|j| c[j] + mu[j]);
            let analytic = pullback(&aux, dir, &g);
            for k in 0..5 {
                let h = 1e-5;
                let mut p = free;
                let mut m = free;
                p[k] += h;
                m[k] -= h;
                let fd = (f(&p, dir) - f(&m, dir)) / (2.0 * h);
                let rel = (fd - analytic[k]).abs() / fd.abs().max(1e-8);
                assert!(rel < 1e-4, "{dir} slot {k}: fd {fd} analytic {}", analytic[k]);
            }
        }
    }

    #[test]
    fn inverse_round_trip() {
        let w = [-1.0, -0.5, -0.5, 0.25, 3.0];
        let aux = AuxParams::from_natural(&w, Direction::Ascending).unwrap();
        let back = reparameterize(&aux, Direction::Ascending);
        for (a, b) in back.iter().zip(&w) {
            assert!((a - b).abs() <= 1e-12, "{back:?}");
        }
        assert!(AuxParams::from_natural(&w, Direction::Descending).is_none());
    }

    #[test]
    fn keys_for_feature_names() {
        assert_eq!(
            observation_keys("lex:bi=totally_agree"),
            vec![(UnitType::Bigram, "totally_agree".to_string())]
        );
        assert_eq!(
            observation_keys("sent:nsubj(SentiWord_neg,you)"),
            vec![
                (UnitType::SentimentDepRelation, "nsubj(sentiword_neg,you)".to_string()),
                (UnitType::SentimentDepRelation, "rel(sentiword_neg,you)".to_string()),
            ]
        );
        assert!(observation_keys("syn:pos=wrong/ADJ").is_empty());
        assert!(observation_keys("lex:n_words=bin3").is_empty());
        assert!(observation_keys("sent:conn=but+wrong").is_empty());
    }

    #[test]
    fn constraints_from_lexicon() {
        let lex = Lexicon::new(vec![
            LexiconEntry::new(UnitType::Bigram, "totally agree", 0.8),
            LexiconEntry::new(UnitType::SentimentDepRelation, "nsubj(SentiWord_neg, you)", -0.6),
            LexiconEntry::new(UnitType::DepRelation, "Rel(crap, your)", -0.4),
            LexiconEntry::new(UnitType::Unigram, "absent", 0.5),
        ])
        .unwrap();
        let index = FeatureIndex::from_names([
            "lex:bi=totally_agree",
            "sent:nsubj(SentiWord_neg,you)",
            "syn:amod(crap,your)",
            "lex:uni=hello",
        ]);
        let groups = build_constraints(&lex, &index);
        assert_eq!(groups.len(), 3);
        assert_eq!(groups[0].feature, "lex:bi=totally_agree");
        assert_eq!(groups[0].direction, Direction::Ascending);
        assert_eq!(groups[1].direction, Direction::Descending);
        assert_eq!(groups[2].feature, "syn:amod(crap,your)");
        assert_eq!(groups[2].direction, Direction::Descending);
        assert_eq!(groups[1].slots(), [5, 6, 7, 8, 9]);
    }

    #[test]
    fn detects_violation() {
        let lex = Lexicon::new(vec![LexiconEntry::new(UnitType::Unigram, "agree", 0.9)]).unwrap();
        let mut model = CrfModel::new(FeatureIndex::from_names(["lex:uni=agree", "lex:uni=x"]));
        assert!(verify_monotonicity(&model, &lex).is_empty());
        model.set_emission(0, OrdinalLabel::PP, -1.0);
        let v = verify_monotonicity(&model, &lex);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].feature, "lex:uni=agree");
        assert_eq!((v[0].lower, v[0].upper), (OrdinalLabel::P, OrdinalLabel::PP));
        assert_eq!(v[0].gap, 1.0);
        assert!(verify_monotonicity(&model, &Lexicon::default()).is_empty());
    }
}
