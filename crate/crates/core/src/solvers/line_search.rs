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
//! Parallel line search over a fixed set of step magnitudes.

use serde::{Deserialize, Serialize};

use super::{dot, BatchObjective};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineCondition {
    Armijo,
    Wolfe,
    StrongWolfe,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LineSearchConfig {
    /// Ascending magnitudes; the first one is the fallback step.
    pub alphas: Vec<f64>,
    pub condition: LineCondition,
    pub c1: f64,
    pub c2: f64,
}

impl Default for LineSearchConfig {
    fn default() -> Self {
        Self {
            alphas: vec![0.01, 0.3, 0.7, 1.0],
            condition: LineCondition::StrongWolfe,
            c1: 1e-4,
            c2: 0.9,
        }
    }
}

impl LineSearchConfig {
    pub fn validate(&self) -> crate::Result<()> {
        let ascending = self.alphas.windows(2).all(|w| w[0] < w[1]);
        let in_range = self.alphas.iter().all(|&a| a > 0.0 && a <= 1.0);
        if self.alphas.is_empty() || !ascending || !in_range {
            return Err(crate::Error::Invalid(
                "line search magnitudes must be ascending within (0, 1]".into(),
            ));
        }
        if !(0.0 < self.c1 && self.c1 < self.c2 && self.c2 < 1.0) {
            return Err(crate::Error::Invalid("need 0 < c1 < c2 < 1".into()));
        }
        Ok(())
    }

    fn accepts(&self, f0: f64, slope0: f64, alpha: f64, f: f64, slope: f64) -> bool {
        if !f.is_finite() {
            return false;
        }
        let armijo = f <= f0 + self.c1 * alpha * slope0;
        match self.condition {
            LineCondition::Armijo => armijo,
            LineCondition::Wolfe => armijo && slope >= self.c2 * slope0,
            LineCondition::StrongWolfe => armijo && slope.abs() <= self.c2 * slope0.abs(),
        }
    }
}

/// Outcome for the whole batch: new iterates and the chosen magnitude index
/// per seed.
#[derive(Clone, Debug, PartialEq)]
pub struct LineSearchResult {
    pub x: Vec<f64>,
    pub cost: Vec<f64>,
    pub grad: Vec<f64>,
    pub chosen: Vec<usize>,
}

/// Evaluates every magnitude for every seed in one batched call and keeps,
/// per seed, the largest magnitude meeting the condition (index 0 if none).
pub fn noisy_line_search(
    obj: &dyn BatchObjective,
    x: &[f64],
    cost0: &[f64],
    grad0: &[f64],
    dir: &[f64],
    config: &LineSearchConfig,
) -> LineSearchResult {
    let n = obj.dim();
    let b = cost0.len();
    let k = config.alphas.len();
    let bounds = obj.bounds();

    let mut cand = vec![0.0; k * b * n];
    for (a, block) in config.alphas.iter().zip(cand.chunks_mut(b * n)) {
        for (i, v) in block.iter_mut().enumerate() {
            let mut c = x[i] + a * dir[i];
            if let Some((lo, hi)) = bounds {
                c = c.clamp(lo[i % n], hi[i % n]);
            }
            *v = c;
        }
    }
    let mut cost = vec![0.0; k * b];
    let mut grad = vec![0.0; k * b * n];
    obj.evaluate(&cand, &mut cost, Some(&mut grad));

    let mut out = LineSearchResult {
        x: vec![0.0; b * n],
        cost: vec![0.0; b],
        grad: vec![0.0; b * n],
        chosen: vec![0; b],
    };
    for s in 0..b {
        let r = s * n..(s + 1) * n;
        let d = &dir[r.clone()];
        let slope0 = dot(&grad0[r.clone()], d);
        let mut pick = 0;
        for j in (0..k).rev() {
            let idx = j * b + s;
            let slope = dot(&grad[idx * n..(idx + 1) * n], d);
            if config.accepts(cost0[s], slope0, config.alphas[j], cost[idx], slope) {
                pick = j;
                break;
            }
        }
        let idx = pick * b + s;
        out.x[r.clone()].copy_from_slice(&cand[idx * n..(idx + 1) * n]);
        out.grad[r].copy_from_slice(&grad[idx * n..(idx + 1) * n]);
        out.cost[s] = cost[idx];
        out.chosen[s] = pick;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::FnObjective;

    fn square() -> FnObjective<impl Fn(&[f64], &mut [f64]) -> f64 + Sync> {
        FnObjective::new(1, |x: &[f64], g: &mut [f64]| {
            g[0] = 2.0 * x[0];
            x[0] * x[0]
        })
    }

    #[test]
    fn newton_step_on_parabola_takes_unit_step() {
        let obj = square();
        let cfg = LineSearchConfig::default();
        let r = noisy_line_search(&obj, &[1.0], &[1.0], &[2.0], &[-1.0], &cfg);
        assert_eq!(r.chosen, vec![3]);
        assert_eq!(r.x, vec![0.0]);
    }

    #[test]
    fn overshooting_direction_picks_largest_valid_alpha() {
        // Doubling the Newton step lands at x = -1 for alpha = 1, which
        // fails Armijo; 0.7 is the largest accepted magnitude.
        let obj = square();
        let cfg = LineSearchConfig { condition: LineCondition::Armijo, ..Default::default() };
        let r = noisy_line_search(&obj, &[1.0], &[1.0], &[2.0], &[-2.0], &cfg);
        assert_eq!(r.chosen, vec![2]);
        assert!((r.x[0] + 0.4).abs() < 1e-15);
    }

    #[test]
    fn uphill_direction_falls_back_to_noisy_step() {
        let obj = square();
        let cfg = LineSearchConfig::default();
        let r = noisy_line_search(&obj, &[1.0], &[1.0], &[2.0], &[1.0], &cfg);
        assert_eq!(r.chosen, vec![0]);
        assert!((r.x[0] - 1.01).abs() < 1e-15);
    }

    #[test]
    fn candidates_are_clipped_to_bounds() {
        let obj = square().with_bounds(vec![-0.5], vec![2.0]);
        let cfg = LineSearchConfig::default();
        let r = noisy_line_search(&obj, &[1.0], &[1.0], &[2.0], &[-3.0], &cfg);
        assert!(r.x[0] >= -0.5 && r.x[0] <= 2.0);
    }

    #[test]
    fn batched_evaluation_matches_single() {
        let obj = FnObjective::new(2, crate::solvers::test_functions::rosenbrock);
        let cfg = LineSearchConfig::default();
        let x = [-1.2, 1.0, 0.5, 0.3];
        let mut c = [0.0; 2];
        let mut g = [0.0; 4];
        obj.evaluate(&x, &mut c, Some(&mut g));
        let dir: Vec<f64> = g.iter().map(|v| -v * 1e-3).collect();
        let both = noisy_line_search(&obj, &x, &c, &g, &dir, &cfg);
        for s in 0..2 {
            let r = 2 * s..2 * s + 2;
            let one = noisy_line_search(&obj, &x[r.clone()], &c[s..s + 1], &g[r.clone()], &dir[r.clone()], &cfg);
            assert_eq!(one.x, both.x[r.clone()].to_vec());
            assert_eq!(one.cost[0].to_bits(), both.cost[s].to_bits());
        }
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(LineSearchConfig::default().validate().is_ok());
        let bad = LineSearchConfig { c1: 0.95, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = LineSearchConfig { alphas: vec![0.3, 0.01], ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
