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
//! Batched optimizers over flat decision vectors.

pub mod lbfgs;
pub mod line_search;
pub mod particle;

pub use lbfgs::{lbfgs_direction, lbfgs_solve, EarlyExit, LbfgsConfig, LbfgsResult, LbfgsState};
pub use line_search::{noisy_line_search, LineCondition, LineSearchConfig};
pub use particle::{initial_variance, particle_solve, ParticleConfig};

/// A cost evaluated on a batch of `B` decision vectors of length `dim`.
///
/// Implementations must be pure: identical inputs give bitwise identical
/// outputs regardless of how the batch is split.
pub trait BatchObjective: Sync {
    fn dim(&self) -> usize;

    /// Writes `B` costs and, when requested, `B×dim` gradients.
    fn evaluate(&self, x: &[f64], cost: &mut [f64], grad: Option<&mut [f64]>);

    /// Box bounds applied by the line search, if any.
    fn bounds(&self) -> Option<(&[f64], &[f64])> {
        None
    }
}

/// Adapts a closure over a single decision vector.
pub struct FnObjective<F> {
    pub dim: usize,
    pub f: F,
    pub lower: Option<Vec<f64>>,
    pub upper: Option<Vec<f64>>,
}

impl<F> FnObjective<F>
where
    F: Fn(&[f64], &mut [f64]) -> f64 + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self {
            dim,
            f,
            lower: None,
            upper: None,
        }
    }

    pub fn with_bounds(mut self, lower: Vec<f64>, upper: Vec<f64>) -> Self {
        self.lower = Some(lower);
        self.upper = Some(upper);
        self
    }
}

impl<F> BatchObjective for FnObjective<F>
where
    F: Fn(&[f64], &mut [f64]) -> f64 + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn evaluate(&self, x: &[f64], cost: &mut [f64], grad: Option<&mut [f64]>) {
        let n = self.dim;
        match grad {
            Some(g) => {
                for ((xb, c), gb) in x.chunks(n).zip(cost.iter_mut()).zip(g.chunks_mut(n)) {
                    *c = (self.f)(xb, gb);
                }
            }
            None => {
                let mut scratch = vec![0.0; n];
                for (xb, c) in x.chunks(n).zip(cost.iter_mut()) {
                    *c = (self.f)(xb, &mut scratch);
                }
            }
        }
    }

    fn bounds(&self) -> Option<(&[f64], &[f64])> {
        match (&self.lower, &self.upper) {
            (Some(l), Some(u)) => Some((l, u)),
            _ => None,
        }
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
pub(crate) mod test_functions {
    pub fn rosenbrock(x: &[f64], g: &mut [f64]) -> f64 {
        let (a, b) = (x[0], x[1]);
        g[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
        g[1] = 200.0 * (b - a * a);
        (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
    }

    pub fn scaled_quadratic(x: &[f64], g: &mut [f64]) -> f64 {
        let mut f = 0.0;
        for (i, (xi, gi)) in x.iter().zip(g.iter_mut()).enumerate() {
            let a = 1.0 + i as f64;
            let c = 0.3 * i as f64 - 1.0;
            f += 0.5 * a * (xi - c) * (xi - c);
            *gi = a * (xi - c);
        }
        f
    }
}
