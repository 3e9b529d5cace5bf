use std::cmp::Ordering;

use rayon::prelude::*;

use super::units::{UnitCounts, UnitNode};

/// A node's association profile: its strongest co-occurring units by PMI.
#[derive(Clone, Debug, PartialEq)]
pub struct PmiVector {
    pub owner: u32,
    /// `(neighbor, pmi)` sorted by PMI descending, then neighbor id.
    pub entries: Vec<(u32, f64)>,
}

impl PmiVector {
    fn sorted_by_id(&self) -> Vec<(u32, f64)> {
        let mut v = self.entries.clone();
        v.sort_unstable_by_key(|e| e.0);
        v
    }
}

/// `ln(N c(a,b) / (c(a) c(b)))`, clipped below at 0.
pub fn pmi(n: u64, c_ab: u64, c_a: u64, c_b: u64) -> f64 {
    if c_ab == 0 || c_a == 0 || c_b == 0 {
        return 0.0;
    }
    let v = ((n as f64) * (c_ab as f64) / ((c_a as f64) * (c_b as f64))).ln();
    v.max(0.0)
}

/// Cosine of two id-sorted sparse non-negative vectors, in [0, 1].
pub fn cosine(a: &[(u32, f64)], b: &[(u32, f64)]) -> f64 {
    let (mut i, mut j, mut dot) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                dot += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    let na: f64 = a.iter().map(|e| e.1 * e.1).sum();
    let nb: f64 = b.iter().map(|e| e.1 * e.1).sum();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na * nb).sqrt()).clamp(0.0, 1.0)
}

/// Sparse symmetric weighted graph over text units.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitGraph {
    pub nodes: Vec<UnitNode>,
    /// `adjacency[i]` lists `(j, w_ij)` sorted by `j`; never contains `i`.
    pub adjacency: Vec<Vec<(u32, f64)>>,
    pub pmi_vectors: Vec<PmiVector>,
}

impl UnitGraph {
    /// Builds a graph directly from a symmetric edge list (no PMI vectors).
    pub fn from_edges(nodes: Vec<UnitNode>, edges: &[(u32, u32, f64)]) -> Self {
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for &(a, b, w) in edges {
            assert!(a != b, "self-edge on node {a}");
            adjacency[a as usize].push((b, w));
            adjacency[b as usize].push((a, w));
        }
        for row in adjacency.iter_mut() {
            row.sort_unstable_by_key(|e| e.0);
        }
        let pmi_vectors = (0..nodes.len() as u32)
            .map(|owner| PmiVector {
                owner,
                entries: Vec::new(),
            })
            .collect();
        Self {
            nodes,
            adjacency,
            pmi_vectors,
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Undirected edge count.
    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn weight(&self, a: u32, b: u32) -> Option<f64> {
        let row = &self.adjacency[a as usize];
        row.binary_search_by_key(&b, |e| e.0).ok().map(|i| row[i].1)
    }
}

/// PMI vectors over the top `top_k` co-occurring units, and a cosine-weighted
/// edge for every co-occurring pair.
pub fn build_graph(counts: &UnitCounts, top_k: usize) -> UnitGraph {
    let n_nodes = counts.nodes.len();
    let mut neighbors: Vec<Vec<(u32, u64)>> = vec![Vec::new(); n_nodes];
    for (&(a, b), &c) in &counts.cooccurrences {
        neighbors[a as usize].push((b, c));
        neighbors[b as usize].push((a, c));
    }

    let pmi_vectors: Vec<PmiVector> = neighbors
        .par_iter()
        .enumerate()
        .map(|(a, row)| {
            let mut entries: Vec<(u32, f64)> = row
                .iter()
                .map(|&(b, c_ab)| {
                    let v = pmi(
                        counts.sentences,
                        c_ab,
                        counts.occurrences[a],
                        counts.occurrences[b as usize],
                    );
                    (b, v)
                })
                .collect();
            entries.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
            entries.truncate(top_k);
            PmiVector {
                owner: a as u32,
                entries,
            }
        })
        .collect();

    let by_id: Vec<Vec<(u32, f64)>> = pmi_vectors.par_iter().map(PmiVector::sorted_by_id).collect();
    let pairs: Vec<(u32, u32)> = counts.cooccurrences.keys().copied().collect();
    let weights: Vec<f64> = pairs
        .par_iter()
        .map(|&(a, b)| cosine(&by_id[a as usize], &by_id[b as usize]))
        .collect();

    let mut adjacency = vec![Vec::new(); n_nodes];
    for (&(a, b), &w) in pairs.iter().zip(&weights) {
        adjacency[a as usize].push((b, w));
        adjacency[b as usize].push((a, w));
    }
    for row in adjacency.iter_mut() {
        row.sort_unstable_by_key(|e| e.0);
    }
    UnitGraph {
        nodes: counts.nodes.clone(),
        adjacency,
        pmi_vectors,
    }
}
