/*
Copyright 2026 The motiongen Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/
//! Limited-memory BFGS with per-seed best-iterate tracking.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::line_search::{noisy_line_search, LineSearchConfig};
use super::{dot, BatchObjective};

/// Curvature pairs with `y·s` at or below this are discarded.
pub const CURVATURE_EPS: f64 = 1e-12;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LbfgsState {
    pub history: usize,
    pub s: VecDeque<Vec<f64>>,
    pub y: VecDeque<Vec<f64>>,
    pub rho: VecDeque<f64>,
    prev_x: Option<Vec<f64>>,
    prev_g: Option<Vec<f64>>,
}

impl LbfgsState {
    pub fn new(history: usize) -> Self {
        Self {
            history,
            ..Default::default()
        }
    }

    pub fn reset(&mut self) {
        *self = Self::new(self.history);
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    fn push(&mut self, x: &[f64], g: &[f64]) {
        if let (Some(px), Some(pg)) = (&self.prev_x, &self.prev_g) {
            let s: Vec<f64> = x.iter().zip(px).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = g.iter().zip(pg).map(|(a, b)| a - b).collect();
            let ys = dot(&y, &s);
            if ys > CURVATURE_EPS && self.history > 0 {
                if self.s.len() == self.history {
                    self.s.pop_front();
                    self.y.pop_front();
                    self.rho.pop_front();
                }
                self.s.push_back(s);
                self.y.push_back(y);
                self.rho.push_back(1.0 / ys);
            }
        }
        self.prev_x = Some(x.to_vec());
        self.prev_g = Some(g.to_vec());
    }

    /// Two-loop recursion on the stored pairs.
    pub fn apply_inverse_hessian(&self, g: &[f64]) -> Vec<f64> {
        let m = self.s.len();
        let mut q = g.to_vec();
        let mut a = vec![0.0; m];
        for i in (0..m).rev() {
            a[i] = self.rho[i] * dot(&self.s[i], &q);
            for (qj, yj) in q.iter_mut().zip(&self.y[i]) {
                *qj -= a[i] * yj;
            }
        }
        if m > 0 {
            let (s, y) = (&self.s[m - 1], &self.y[m - 1]);
            let h0 = dot(s, y) / dot(y, y);
            q.iter_mut().for_each(|v| *v *= h0);
        }
        for i in 0..m {
            let b = self.rho[i] * dot(&self.y[i], &q);
            for (qj, sj) in q.iter_mut().zip(&self.s[i]) {
                *qj += sj * (a[i] - b);
            }
        }
        q
    }
}

/// Records `(x, g)` and returns the quasi-Newton descent direction.
/// Returns `None` for a non-finite gradient.
pub fn lbfgs_direction(state: &mut LbfgsState, x: &[f64], g: &[f64]) -> Option<Vec<f64>> {
    if g.iter().any(|v| !v.is_finite()) {
        return None;
    }
    state.push(x, g);
    let mut r = state.apply_inverse_hessian(g);
    r.iter_mut().for_each(|v| *v = -*v);
    Some(r)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LbfgsConfig {
    pub history: usize,
    pub iterations: usize,
    pub line_search: LineSearchConfig,
    /// Per-seed early exit: stop a seed when its best cost improves by less
    /// than `tolerance` over `window` iterations.
    pub early_exit: Option<EarlyExit>,
    /// Clip each step component to `gamma` times the bound range.
    pub step_clip: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EarlyExit {
    pub window: usize,
    pub tolerance: f64,
}

impl Default for LbfgsConfig {
    fn default() -> Self {
        Self {
            history: 4,
            iterations: 100,
            line_search: LineSearchConfig::default(),
            early_exit: None,
            step_clip: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LbfgsResult {
    pub best_cost: Vec<f64>,
    pub best_x: Vec<f64>,
    /// `trace[i][s]` is seed `s`'s best cost after iteration `i`.
    pub trace: Vec<Vec<f64>>,
    /// Iterations actually run per seed.
    pub iterations: Vec<usize>,
}

pub fn lbfgs_solve(obj: &dyn BatchObjective, x_init: &[f64], config: &LbfgsConfig) -> LbfgsResult {
    let n = obj.dim();
    let b = x_init.len() / n;
    let mut x = x_init.to_vec();
    let mut cost = vec![0.0; b];
    let mut grad = vec![0.0; b * n];
    obj.evaluate(&x, &mut cost, Some(&mut grad));

    let mut best_cost: Vec<f64> = cost.iter().map(|&c| if c.is_finite() { c } else { f64::INFINITY }).collect();
    let mut best_x = x.clone();
    let mut states = vec![LbfgsState::new(config.history); b];
    let mut active = vec![true; b];
    let mut iterations = vec![0; b];
    let mut trace = Vec::with_capacity(config.iterations);
    let bounds = obj.bounds();

    for it in 0..config.iterations {
        let idx: Vec<usize> = (0..b).filter(|&s| active[s]).collect();
        if idx.is_empty() {
            break;
        }
        let m = idx.len();
        let mut sx = Vec::with_capacity(m * n);
        let mut sc = Vec::with_capacity(m);
        let mut sg = Vec::with_capacity(m * n);
        let mut sd = Vec::with_capacity(m * n);
        for &s in &idx {
            let r = s * n..(s + 1) * n;
            let dir = lbfgs_direction(&mut states[s], &x[r.clone()], &grad[r.clone()])
                .unwrap_or_else(|| vec![0.0; n]);
            let dir = match (config.step_clip, bounds) {
                (Some(gamma), Some((lo, hi))) => dir
                    .iter()
                    .enumerate()
                    .map(|(i, v)| {
                        let lim = gamma * (hi[i] - lo[i]);
                        v.clamp(-lim, lim)
                    })
                    .collect(),
                _ => dir,
            };
            sx.extend_from_slice(&x[r.clone()]);
            sc.push(cost[s]);
            sg.extend_from_slice(&grad[r]);
            sd.extend(dir);
        }
        let ls = noisy_line_search(obj, &sx, &sc, &sg, &sd, &config.line_search);
        for (k, &s) in idx.iter().enumerate() {
            let r = s * n..(s + 1) * n;
            let kr = k * n..(k + 1) * n;
            iterations[s] = it + 1;
            if !ls.cost[k].is_finite() || ls.grad[kr.clone()].iter().any(|v| !v.is_finite()) {
                // Restart from the best iterate with a fresh history.
                x[r.clone()].copy_from_slice(&best_x[r.clone()]);
                states[s].reset();
                let mut c = [0.0];
                let mut g = vec![0.0; n];
                obj.evaluate(&x[r.clone()], &mut c, Some(&mut g));
                cost[s] = c[0];
                grad[r].copy_from_slice(&g);
                continue;
            }
            x[r.clone()].copy_from_slice(&ls.x[kr.clone()]);
            grad[r.clone()].copy_from_slice(&ls.grad[kr]);
            cost[s] = ls.cost[k];
            if cost[s] < best_cost[s] {
                best_cost[s] = cost[s];
                best_x[r].copy_from_slice(&x[s * n..(s + 1) * n]);
            }
        }
        trace.push(best_cost.clone());
        if let Some(EarlyExit { window, tolerance }) = config.early_exit {
            if trace.len() > window {
                let old = &trace[trace.len() - 1 - window];
                for s in 0..b {
                    if active[s] && old[s] - best_cost[s] < tolerance {
                        active[s] = false;
                    }
                }
            }
        }
    }

    LbfgsResult {
        best_cost,
        best_x,
        trace,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::test_functions::{rosenbrock, scaled_quadratic};
    use crate::solvers::FnObjective;

    // Textbook two-loop recursion written independently from the state type.
    fn reference_direction(pairs: &[(Vec<f64>, Vec<f64>)], g: &[f64]) -> Vec<f64> {
        let mut q = g.to_vec();
        let mut alphas = Vec::new();
        for (s, y) in pairs.iter().rev() {
            let rho = 1.0 / dot(y, s);
            let a = rho * dot(s, &q);
            for i in 0..q.len() {
                q[i] -= a * y[i];
            }
            alphas.push(a);
        }
        alphas.reverse();
        if let Some((s, y)) = pairs.last() {
            let gamma = dot(s, y) / dot(y, y);
            for v in &mut q {
                *v *= gamma;
            }
        }
        for ((s, y), a) in pairs.iter().zip(&alphas) {
            let rho = 1.0 / dot(y, s);
            let beta = rho * dot(y, &q);
            for i in 0..q.len() {
                q[i] += s[i] * (a - beta);
            }
        }
        q.iter().map(|v| -v).collect()
    }

    #[test]
    fn empty_history_is_steepest_descent() {
        let mut st = LbfgsState::new(4);
        let d = lbfgs_direction(&mut st, &[1.0, 2.0], &[0.5, -3.0]).unwrap();
        assert_eq!(d, vec![-0.5, 3.0]);
    }

    #[test]
    fn matches_reference_two_loop_on_quadratic() {
        let grad = |x: &[f64]| vec![2.0 * x[0], 10.0 * x[1]];
        let xs = [vec![1.0, 1.0], vec![0.7, 0.2], vec![0.3, -0.1], vec![0.1, 0.05]];
        let mut st = LbfgsState::new(4);
        let mut pairs = Vec::new();
        for (i, x) in xs.iter().enumerate() {
            let g = grad(x);
            let d = lbfgs_direction(&mut st, x, &g).unwrap();
            if i > 0 {
                let s: Vec<f64> = x.iter().zip(&xs[i - 1]).map(|(a, b)| a - b).collect();
                let y: Vec<f64> = g.iter().zip(grad(&xs[i - 1])).map(|(a, b)| a - b).collect();
                pairs.push((s, y));
            }
            let r = reference_direction(&pairs, &g);
            for (a, b) in d.iter().zip(&r) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn keeps_only_most_recent_pairs() {
        let mut st = LbfgsState::new(4);
        for i in 0..10 {
            let x = [i as f64, (i * i) as f64];
            let g = [2.0 * x[0], 4.0 * x[1]];
            lbfgs_direction(&mut st, &x, &g).unwrap();
        }
        assert_eq!(st.len(), 4);
        assert_eq!(st.s.back().unwrap(), &vec![1.0, 17.0]);
    }

    #[test]
    fn degenerate_curvature_is_skipped() {
        let mut st = LbfgsState::new(4);
        lbfgs_direction(&mut st, &[0.0], &[1.0]).unwrap();
        lbfgs_direction(&mut st, &[1.0], &[1.0]).unwrap();
        assert!(st.is_empty());
        assert!(lbfgs_direction(&mut st, &[1.0], &[f64::NAN]).is_none());
    }

    #[test]
    fn solves_convex_quadratic() {
        let obj = FnObjective::new(10, scaled_quadratic);
        let cfg = LbfgsConfig { iterations: 50, ..Default::default() };
        let r = lbfgs_solve(&obj, &[0.0; 10], &cfg);
        assert!(r.best_cost[0] < 1e-8, "{}", r.best_cost[0]);
    }

    #[test]
    fn solves_rosenbrock() {
        let obj = FnObjective::new(2, rosenbrock);
        let cfg = LbfgsConfig { iterations: 200, history: 8, ..Default::default() };
        let r = lbfgs_solve(&obj, &[-1.2, 1.0], &cfg);
        assert!(r.best_cost[0] < 1e-6, "{}", r.best_cost[0]);
    }

    #[test]
    fn best_trace_is_monotone_and_seeds_independent() {
        let obj = FnObjective::new(2, rosenbrock);
        let cfg = LbfgsConfig { iterations: 40, ..Default::default() };
        let r = lbfgs_solve(&obj, &[1.0, 1.0, -1.2, 1.0], &cfg);
        assert_eq!(r.best_cost[0], 0.0);
        for s in 0..2 {
            for w in r.trace.windows(2) {
                assert!(w[1][s] <= w[0][s]);
            }
        }
        let single = lbfgs_solve(&obj, &[-1.2, 1.0], &cfg);
        assert_eq!(single.best_x, r.best_x[2..].to_vec());
    }

    #[test]
    fn early_exit_stops_converged_seeds() {
        let obj = FnObjective::new(10, scaled_quadratic);
        let cfg = LbfgsConfig {
            iterations: 300,
            early_exit: Some(EarlyExit { window: 10, tolerance: 1e-8 }),
            ..Default::default()
        };
        let r = lbfgs_solve(&obj, &[0.0; 10], &cfg);
        assert!(r.iterations[0] < 300);
        assert!(r.best_cost[0] < 1e-8);
    }
}
