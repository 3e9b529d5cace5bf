//! Exact chain inference in log space.

use super::model::{NUM_LABELS, NUM_TRANSITIONS};

type Row = [f64; NUM_LABELS];

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Forward/backward tables over one sequence.
#[derive(Clone, Debug)]
pub struct Lattice {
    node_scores: Vec<Row>,
    transitions: [f64; NUM_TRANSITIONS],
    alpha: Vec<Row>,
    beta: Vec<Row>,
    log_partition: f64,
    log_partition_backward: f64,
}

impl Lattice {
    pub fn new(node_scores: Vec<Row>, transitions: &[f64; NUM_TRANSITIONS]) -> Self {
        let n = node_scores.len();
        assert!(n > 0, "lattice over an empty sequence");
        let mut alpha = vec![[0.0; NUM_LABELS]; n];
        let mut beta = vec![[0.0; NUM_LABELS]; n];
        alpha[0] = node_scores[0];
        let mut buf = [0.0; NUM_LABELS];
        for t in 1..n {
            for y in 0..NUM_LABELS {
                for p in 0..NUM_LABELS {
                    buf[p] = alpha[t - 1][p] + transitions[p * NUM_LABELS + y];
                }
                alpha[t][y] = log_sum_exp(&buf) + node_scores[t][y];
            }
        }
        for t in (0..n - 1).rev() {
            for y in 0..NUM_LABELS {
                for c in 0..NUM_LABELS {
                    buf[c] = transitions[y * NUM_LABELS + c] + node_scores[t + 1][c] + beta[t + 1][c];
                }
                beta[t][y] = log_sum_exp(&buf);
            }
        }
        let log_partition = log_sum_exp(&alpha[n - 1]);
        let first: Row = std::array::from_fn(|y| node_scores[0][y] + beta[0][y]);
        let log_partition_backward = log_sum_exp(&first);
        Self {
            node_scores,
            transitions: *transitions,
            alpha,
            beta,
            log_partition,
            log_partition_backward,
        }
    }

    pub fn len(&self) -> usize {
        self.node_scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_scores.is_empty()
    }

    /// log Z(x) from the forward pass.
    pub fn log_partition(&self) -> f64 {
        self.log_partition
    }

    /// log Z(x) from the backward pass.
    pub fn log_partition_backward(&self) -> f64 {
        self.log_partition_backward
    }

    pub fn node_scores(&self) -> &[Row] {
        &self.node_scores
    }

    pub fn alpha(&self) -> &[Row] {
        &self.alpha
    }

    pub fn beta(&self) -> &[Row] {
        &self.beta
    }

    /// p(y_t = y | x).
    pub fn unary_marginals(&self, t: usize) -> Row {
        std::array::from_fn(|y| (self.alpha[t][y] + self.beta[t][y] - self.log_partition).exp())
    }

    /// `m[p][c] = p(y_{t-1} = p, y_t = c | x)` for `t >= 1`.
    pub fn pairwise_marginals(&self, t: usize) -> [Row; NUM_LABELS] {
        assert!(t >= 1 && t < self.len());
        std::array::from_fn(|p| {
            std::array::from_fn(|c| {
                (self.alpha[t - 1][p] + self.transitions[p * NUM_LABELS + c] + self.node_scores[t][c] + self.beta[t][c]
                    - self.log_partition)
                    .exp()
            })
        })
    }
}

/// Best label path and its score. Ties go to the lowest label index.
pub fn viterbi_decode(nodes: &[Row], transitions: &[f64; NUM_TRANSITIONS]) -> (Vec<usize>, f64) {
    let n = nodes.len();
    if n == 0 {
        return (Vec::new(), 0.0);
    }
    let mut delta = nodes[0];
    let mut back = vec![[0usize; NUM_LABELS]; n];
    for t in 1..n {
        let mut next = [0.0; NUM_LABELS];
        for y in 0..NUM_LABELS {
            let mut best = f64::NEG_INFINITY;
            let mut arg = 0;
            for p in 0..NUM_LABELS {
                let s = delta[p] + transitions[p * NUM_LABELS + y];
                if s > best {
                    best = s;
                    arg = p;
                }
            }
            next[y] = best + nodes[t][y];
            back[t][y] = arg;
        }
        delta = next;
    }
    let mut last = 0;
    for y in 1..NUM_LABELS {
        if delta[y] > delta[last] {
            last = y;
        }
    }
    let best = delta[last];
    let mut path = vec![0; n];
    path[n - 1] = last;
    for t in (1..n).rev() {
        path[t - 1] = back[t][path[t]];
    }
    (path, best)
}
