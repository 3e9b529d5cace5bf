use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lexicon::{Lexicon, LexiconEntry, UnitType};

use super::graph::UnitGraph;
use super::seeds::SeedSet;

#[derive(Clone, Debug, PartialEq)]
pub struct Propagation {
    /// Final score per node, in [-1, 1].
    pub scores: Vec<f64>,
    /// `max_i |y_i(t) - y_i(t-1)|` for each iteration t.
    pub max_delta: Vec<f64>,
    /// Seed node ids (positive, negative).
    pub positive_nodes: Vec<u32>,
    pub negative_nodes: Vec<u32>,
}

/// Label propagation with clamped seeds.
///
/// Scores start at +1 on positive seeds, -1 on negative seeds and 0 elsewhere.
/// Each iteration replaces every score by the weight-normalized average of its
/// neighbors' previous scores, then re-clamps the seeds. Updates are
/// synchronous: iteration t reads only iteration t-1. Nodes whose incident
/// weights sum to zero keep their score.
pub fn propagate(graph: &UnitGraph, seeds: &SeedSet, iterations: usize) -> Result<Propagation> {
    if iterations < 1 {
        return Err(Error::Config("propagation needs at least one iteration".into()));
    }
    let mut positive_nodes = Vec::new();
    let mut negative_nodes = Vec::new();
    for (i, node) in graph.nodes.iter().enumerate() {
        if node.unit_type != UnitType::Unigram {
            continue;
        }
        let w = node.surface.to_lowercase();
        if seeds.positive.contains(&w) {
            positive_nodes.push(i as u32);
        } else if seeds.negative.contains(&w) {
            negative_nodes.push(i as u32);
        }
    }
    let missing = seeds.len() - positive_nodes.len() - negative_nodes.len();
    if missing > 0 {
        log::warn!("{missing} of {} seed words have no unigram node", seeds.len());
    }

    let clamp = |y: &mut [f64]| {
        for &i in &positive_nodes {
            y[i as usize] = 1.0;
        }
        for &i in &negative_nodes {
            y[i as usize] = -1.0;
        }
    };

    let mut scores = vec![0.0; graph.node_count()];
    clamp(&mut scores);
    let mut max_delta = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let prev = &scores;
        let mut next: Vec<f64> = graph
            .adjacency
            .par_iter()
            .enumerate()
            .map(|(i, row)| {
                let (mut num, mut den) = (0.0, 0.0);
                for &(j, w) in row {
                    num += w * prev[j as usize];
                    den += w;
                }
                if den > 0.0 {
                    num / den
                } else {
                    prev[i]
                }
            })
            .collect();
        clamp(&mut next);
        let delta = next.iter().zip(prev).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        max_delta.push(delta);
        log::debug!("propagation iteration {}: max delta {delta:e}", max_delta.len());
        scores = next;
    }
    Ok(Propagation {
        scores,
        max_delta,
        positive_nodes,
        negative_nodes,
    })
}

/// Nodes scoring at least `theta` in magnitude, ordered by |score| descending.
pub fn induce_lexicon(graph: &UnitGraph, scores: &[f64], theta: f64) -> Result<Lexicon> {
    if !(theta > 0.0) {
        return Err(Error::Config(format!("threshold {theta} must be positive")));
    }
    let mut picked: Vec<(usize, f64)> = scores
        .iter()
        .copied()
        .enumerate()
        .filter(|(_, y)| *y >= theta || *y <= -theta)
        .collect();
    picked.sort_by(|a, b| {
        b.1.abs().total_cmp(&a.1.abs()).then_with(|| {
            let (na, nb) = (&graph.nodes[a.0], &graph.nodes[b.0]);
            (na.unit_type, &na.surface).cmp(&(nb.unit_type, &nb.surface))
        })
    });
    Lexicon::new(
        picked
            .into_iter()
            .map(|(i, y)| {
                let n = &graph.nodes[i];
                LexiconEntry::new(n.unit_type, n.surface.clone(), y)
            })
            .collect(),
    )
}
