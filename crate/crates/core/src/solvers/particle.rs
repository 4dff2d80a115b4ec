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
//! Exponential-utility particle optimizer used to warm-start L-BFGS.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::BatchObjective;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParticleConfig {
    pub n_particles: usize,
    pub n_iterations: usize,
    /// Initial variance as a fraction of each variable's bound range.
    pub init_variance_fraction: f64,
    pub temperature: f64,
    pub k_mean: f64,
    pub k_cov: f64,
    /// Replace the first particle by the current mean.
    pub include_mean: bool,
    pub seed: u64,
}

impl Default for ParticleConfig {
    fn default() -> Self {
        Self {
            n_particles: 64,
            n_iterations: 2,
            init_variance_fraction: 0.1,
            temperature: 1.0,
            k_mean: 0.9,
            k_cov: 0.5,
            include_mean: true,
            seed: 0,
        }
    }
}

const MIN_VARIANCE: f64 = 1e-12;

/// Noise stream for a seed, derived from its contents (FNV-1a over the
/// bit patterns) so that a seed's result does not depend on its position in
/// the batch and identical seeds stay identical.
pub fn stream_for(seed: &[f64]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in seed {
        for byte in v.to_bits().to_le_bytes() {
            h ^= u64::from(byte);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

/// Per-variable starting variance: `(fraction · range)²` when the objective
/// is bounded, `fraction²` otherwise.
pub fn initial_variance(obj: &dyn BatchObjective, config: &ParticleConfig) -> Vec<f64> {
    let f = config.init_variance_fraction;
    match obj.bounds() {
        Some((lo, hi)) => lo.iter().zip(hi).map(|(l, h)| (f * (h - l)).powi(2)).collect(),
        None => vec![f * f; obj.dim()],
    }
}

/// Runs the particle update from each seed's mean. `variance` holds the
/// initial per-variable variance (length `dim`).
pub fn particle_solve(
    obj: &dyn BatchObjective,
    mean0: &[f64],
    variance: &[f64],
    config: &ParticleConfig,
) -> Vec<f64> {
    let n = obj.dim();
    let b = mean0.len() / n;
    let p = config.n_particles.max(1);
    let bounds = obj.bounds();
    let mut mean = mean0.to_vec();
    let mut var: Vec<f64> = (0..b).flat_map(|_| variance.iter().map(|v| v.max(MIN_VARIANCE))).collect();
    let mut rngs: Vec<ChaCha8Rng> = mean0
        .chunks(n)
        .map(|row| {
            let mut r = ChaCha8Rng::seed_from_u64(config.seed);
            r.set_stream(stream_for(row));
            r
        })
        .collect();

    let mut particles = vec![0.0; b * p * n];
    let mut cost = vec![0.0; b * p];
    let mut weights = vec![0.0; p];
    for _ in 0..config.n_iterations {
        for s in 0..b {
            for k in 0..p {
                let row = &mut particles[(s * p + k) * n..(s * p + k + 1) * n];
                for i in 0..n {
                    let mu = mean[s * n + i];
                    let v = if config.include_mean && k == 0 {
                        mu
                    } else {
                        let e: f64 = StandardNormal.sample(&mut rngs[s]);
                        mu + var[s * n + i].sqrt() * e
                    };
                    row[i] = match bounds {
                        Some((lo, hi)) => v.clamp(lo[i], hi[i]),
                        None => v,
                    };
                }
            }
        }
        obj.evaluate(&particles, &mut cost, None);
        for s in 0..b {
            let c = &cost[s * p..(s + 1) * p];
            let cmin = c.iter().copied().filter(|v| v.is_finite()).fold(f64::INFINITY, f64::min);
            if !cmin.is_finite() {
                continue;
            }
            let mut total = 0.0;
            for (w, &ci) in weights.iter_mut().zip(c) {
                *w = if ci.is_finite() {
                    (-(ci - cmin) / config.temperature).exp()
                } else {
                    0.0
                };
                total += *w;
            }
            weights.iter_mut().for_each(|w| *w /= total);
            for i in 0..n {
                let old = mean[s * n + i];
                let mut m = 0.0;
                let mut v = 0.0;
                for k in 0..p {
                    let x = particles[(s * p + k) * n + i];
                    m += weights[k] * x;
                    v += weights[k] * (x - old) * (x - old);
                }
                mean[s * n + i] = (1.0 - config.k_mean) * old + config.k_mean * m;
                let sv = &mut var[s * n + i];
                *sv = ((1.0 - config.k_cov) * *sv + config.k_cov * v).max(MIN_VARIANCE);
            }
        }
    }
    mean
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::FnObjective;

    fn bowl() -> FnObjective<impl Fn(&[f64], &mut [f64]) -> f64 + Sync> {
        FnObjective::new(2, |x: &[f64], _g: &mut [f64]| 10.0 * ((x[0] - 0.3).powi(2) + 2.0 * (x[1] + 0.2).powi(2)))
    }

    #[test]
    fn dominant_particle_becomes_mean() {
        // One particle sees a far lower cost; with k_mean = 1 it is adopted.
        let obj = FnObjective::new(1, |x: &[f64], _g: &mut [f64]| if x[0] > 0.5 { -1e6 } else { 0.0 });
        let cfg = ParticleConfig { n_particles: 32, n_iterations: 1, k_mean: 1.0, include_mean: false, seed: 3, ..Default::default() };
        let m = particle_solve(&obj, &[0.0], &[0.25], &cfg);
        // Recreate the draws to find the winning particle.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        rng.set_stream(stream_for(&[0.0]));
        let draws: Vec<f64> = (0..32).map(|_| 0.5 * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)).collect();
        let winners: Vec<f64> = draws.iter().copied().filter(|&x| x > 0.5).collect();
        assert!(!winners.is_empty());
        let avg = winners.iter().sum::<f64>() / winners.len() as f64;
        assert!((m[0] - avg).abs() < 1e-12);
    }

    #[test]
    fn constant_cost_gives_uniform_weights() {
        let obj = FnObjective::new(1, |_x: &[f64], _g: &mut [f64]| 1.0);
        let cfg = ParticleConfig { n_particles: 16, n_iterations: 1, k_mean: 1.0, include_mean: false, seed: 9, ..Default::default() };
        let m = particle_solve(&obj, &[0.0], &[1.0], &cfg);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        rng.set_stream(stream_for(&[0.0]));
        let avg = (0..16).map(|_| <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)).sum::<f64>() / 16.0;
        assert!((m[0] - avg).abs() < 1e-12);
    }

    #[test]
    fn converges_near_quadratic_optimum() {
        let cfg = ParticleConfig { n_iterations: 20, seed: 42, ..Default::default() };
        let m = particle_solve(&bowl(), &[1.0, 1.0], &[0.1, 0.1], &cfg);
        assert!((m[0] - 0.3).abs() < 0.05 && (m[1] + 0.2).abs() < 0.05, "{m:?}");
        assert_eq!(particle_solve(&bowl(), &[1.0, 1.0], &[0.1, 0.1], &cfg), m);
    }

    #[test]
    fn seeds_are_independent_of_batch_position() {
        let cfg = ParticleConfig { seed: 5, ..Default::default() };
        let both = particle_solve(&bowl(), &[1.0, 1.0, -1.0, 0.5], &[0.1, 0.1], &cfg);
        let second = particle_solve(&bowl(), &[-1.0, 0.5], &[0.1, 0.1], &cfg);
        let first = particle_solve(&bowl(), &[1.0, 1.0], &[0.1, 0.1], &cfg);
        assert_eq!(first, both[..2].to_vec());
        assert_eq!(second, both[2..].to_vec());
        let twins = particle_solve(&bowl(), &[1.0, 1.0, 1.0, 1.0], &[0.1, 0.1], &cfg);
        assert_eq!(twins[..2], twins[2..]);
        let other = ParticleConfig { seed: 6, ..cfg };
        assert_ne!(particle_solve(&bowl(), &[1.0, 1.0], &[0.1, 0.1], &other), first);
    }
}
