//! Limited-memory BFGS with a backtracking Armijo line search, used to
//! minimize a smooth function given value and gradient.

use std::collections::VecDeque;

#[derive(Clone, Debug)]
pub struct LbfgsConfig {
    pub memory: usize,
    pub max_iterations: usize,
    /// Stop when the relative change of the value over `period` iterations
    /// falls below this.
    pub relative_tolerance: f64,
    pub period: usize,
    pub armijo: f64,
    pub max_line_search: usize,
}

impl Default for LbfgsConfig {
    fn default() -> Self {
        Self {
            memory: 10,
            max_iterations: 300,
            relative_tolerance: 1e-6,
            period: 5,
            armijo: 1e-4,
            max_line_search: 50,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIterations,
    /// No step along the search direction decreased the value.
    LineSearchStalled,
    NonFinite,
}

#[derive(Clone, Debug)]
pub struct LbfgsResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    /// Value at the start point followed by the value after each accepted step.
    pub history: Vec<f64>,
    pub termination: Termination,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

struct Pair {
    s: Vec<f64>,
    y: Vec<f64>,
    rho: f64,
}

fn two_loop(g: &[f64], pairs: &VecDeque<Pair>) -> Vec<f64> {
    let mut q: Vec<f64> = g.to_vec();
    let mut alphas = Vec::with_capacity(pairs.len());
    for p in pairs.iter().rev() {
        let a = p.rho * dot(&p.s, &q);
        for (qi, yi) in q.iter_mut().zip(&p.y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some(last) = pairs.back() {
        let gamma = dot(&last.s, &last.y) / dot(&last.y, &last.y);
        for qi in q.iter_mut() {
            *qi *= gamma;
        }
    }
    for (p, a) in pairs.iter().zip(alphas.iter().rev()) {
        let b = p.rho * dot(&p.y, &q);
        for (qi, si) in q.iter_mut().zip(&p.s) {
            *qi += (a - b) * si;
        }
    }
    for qi in q.iter_mut() {
        *qi = -*qi;
    }
    q
}

/// Minimizes `f`, which returns `(value, gradient)`.
pub fn minimize<F>(mut f: F, x0: Vec<f64>, cfg: &LbfgsConfig) -> LbfgsResult
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let mut x = x0;
    let (mut fx, mut g) = f(&x);
    let mut history = vec![fx];
    if !fx.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return LbfgsResult {
            x,
            value: fx,
            iterations: 0,
            history,
            termination: Termination::NonFinite,
        };
    }
    let mut pairs: VecDeque<Pair> = VecDeque::with_capacity(cfg.memory);
    let mut termination = Termination::MaxIterations;
    let mut iterations = 0;

    while iterations < cfg.max_iterations {
        let gnorm = norm(&g);
        if gnorm == 0.0 {
            termination = Termination::Converged;
            break;
        }
        let mut d = two_loop(&g, &pairs);
        let mut slope = dot(&g, &d);
        if pairs.is_empty() || !(slope < 0.0) {
            pairs.clear();
            d = g.iter().map(|v| -v).collect();
            slope = -gnorm * gnorm;
        }
        let mut step = if pairs.is_empty() { (1.0 / gnorm).min(1.0) } else { 1.0 };

        let mut accepted = None;
        for _ in 0..cfg.max_line_search {
            let xn: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + step * di).collect();
            let (fn_, gn) = f(&xn);
            if fn_.is_finite() && fn_ <= fx + cfg.armijo * step * slope {
                accepted = Some((xn, fn_, gn));
                break;
            }
            step *= 0.5;
        }
        let Some((xn, fn_, gn)) = accepted else {
            if !pairs.is_empty() {
                // retry from steepest descent before giving up
                pairs.clear();
                continue;
            }
            termination = Termination::LineSearchStalled;
            break;
        };
        if gn.iter().any(|v| !v.is_finite()) {
            termination = Termination::NonFinite;
            break;
        }

        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * norm(&s) * norm(&y) && sy > 0.0 {
            if pairs.len() == cfg.memory {
                pairs.pop_front();
            }
            pairs.push_back(Pair { s, y, rho: 1.0 / sy });
        }
        x = xn;
        fx = fn_;
        g = gn;
        iterations += 1;
        history.push(fx);

        if history.len() > cfg.period {
            let past = history[history.len() - 1 - cfg.period];
            if (past - fx).abs() / fx.abs().max(1.0) < cfg.relative_tolerance {
                termination = Termination::Converged;
                break;
            }
        }
    }

    LbfgsResult {
        x,
        value: fx,
        iterations,
        history,
        termination,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| {
            let (a, b) = (x[0], x[1]);
            let v = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
            let g = vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)];
            (v, g)
        };
        let cfg = LbfgsConfig {
            relative_tolerance: 1e-14,
            max_iterations: 1000,
            ..Default::default()
        };
        let r = minimize(f, vec![-1.2, 1.0], &cfg);
        assert!((r.x[0] - 1.0).abs() < 1e-4, "{:?}", r);
        assert!((r.x[1] - 1.0).abs() < 1e-4);
        assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn quadratic_exact() {
        let f = |x: &[f64]| {
            let v = x
                .iter()
                .enumerate()
                .map(|(i, xi)| (i as f64 + 1.0) * (xi - 2.0).powi(2))
                .sum();
            let g = x
                .iter()
                .enumerate()
                .map(|(i, xi)| 2.0 * (i as f64 + 1.0) * (xi - 2.0))
                .collect();
            (v, g)
        };
        let r = minimize(f, vec![0.0; 6], &LbfgsConfig::default());
        for xi in &r.x {
            assert!((xi - 2.0).abs() < 1e-3);
        }
    }

    #[test]
    fn non_finite_start() {
        let r = minimize(|_| (f64::NAN, vec![0.0]), vec![0.0], &LbfgsConfig::default());
        assert_eq!(r.termination, Termination::NonFinite);
    }
}
