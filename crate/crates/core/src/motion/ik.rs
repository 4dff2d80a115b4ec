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
//! Collision-free inverse kinematics over many seeds.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cost::CostWeights;
use crate::geometry::{quaternion_error, Pose};
use crate::halton::Halton;
use crate::kinematics::ee_pose;
use crate::planner::ValidityChecker;
use crate::robot::RobotModel;
use crate::rollout::{Goal, IkObjective, RolloutProblem};
use crate::solvers::{initial_variance, lbfgs_solve, particle_solve, LbfgsConfig, ParticleConfig};
use crate::world::WorldModel;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IkConfig {
    pub n_seeds: usize,
    pub particle: ParticleConfig,
    pub lbfgs: LbfgsConfig,
    /// Largest accepted position error in meters.
    pub position_threshold: f64,
    /// Largest accepted orientation error `1 - |<q_goal, q>|`.
    pub rotation_threshold: f64,
    /// Weight of the joint-space distance to the current configuration
    /// when ranking solutions.
    pub rank_weight: f64,
    pub seed: u64,
}

impl Default for IkConfig {
    fn default() -> Self {
        Self {
            n_seeds: 30,
            particle: ParticleConfig { n_particles: 32, init_variance_fraction: 0.05, ..ParticleConfig::default() },
            lbfgs: LbfgsConfig { history: 6, iterations: 200, ..LbfgsConfig::default() },
            position_threshold: 0.005,
            rotation_threshold: 0.05,
            rank_weight: 0.1,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IkSolution {
    pub q: Vec<f64>,
    pub position_error: f64,
    pub rotation_error: f64,
    /// Ranking score; lower is better.
    pub score: f64,
}

pub fn pose_errors(robot: &RobotModel, q: &[f64], goal: &Pose) -> (f64, f64) {
    let ee = ee_pose(robot, q);
    ((ee.pos() - goal.pos()).norm(), quaternion_error(&ee.quaternion, &goal.quaternion))
}

/// Halton seeds over the joint limits, after the current and retract
/// configurations, refined by the particle optimizer
/// and L-BFGS. Returns every collision-free solution within the thresholds,
/// best first; an empty list means no solution was found.
pub fn solve_ik(
    robot: &RobotModel,
    world: &WorldModel,
    goal: &Pose,
    weights: &CostWeights,
    current: Option<&[f64]>,
    config: &IkConfig,
) -> Vec<IkSolution> {
    if !goal.is_finite() || config.n_seeds == 0 {
        return Vec::new();
    }
    let d = robot.dof;
    let start = current.map_or_else(|| robot.retract_config.clone(), <[f64]>::to_vec);
    let mut problem = RolloutProblem::new(robot, world, start.clone(), Goal::Pose(goal.clone()));
    problem.weights = weights.clone();
    let obj = IkObjective::new(problem);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut halton = Halton::shifted(d, &mut rng);
    let (lo, hi) = (robot.lower_limits(), robot.upper_limits());
    // The current and retract configurations lead the seed set so a goal
    // near either is found without depending on sample coverage.
    let mut seeds: Vec<f64> = Vec::with_capacity(config.n_seeds * d);
    for q in current.into_iter().chain([robot.retract_config.as_slice()]) {
        if seeds.len() < config.n_seeds * d && robot.within_position_limits(q) {
            seeds.extend_from_slice(q);
        }
    }
    while seeds.len() < config.n_seeds * d {
        seeds.extend(halton.next_in_box(&lo, &hi));
    }

    let particle = ParticleConfig { seed: config.seed, ..config.particle.clone() };
    let warm = if particle.n_iterations > 0 {
        particle_solve(&obj, &seeds, &initial_variance(&obj, &particle), &particle)
    } else {
        seeds
    };
    let result = lbfgs_solve(&obj, &warm, &config.lbfgs);

    let checker = ValidityChecker::new(robot, world, 0.0);
    let mut out: Vec<IkSolution> = result
        .best_x
        .chunks(d)
        .filter_map(|q| {
            let (position_error, rotation_error) = pose_errors(robot, q, goal);
            let ok = position_error < config.position_threshold
                && rotation_error <= config.rotation_threshold
                && checker.is_valid(q);
            let dist = q.iter().zip(&start).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            ok.then(|| IkSolution {
                q: q.to_vec(),
                position_error,
                rotation_error,
                score: position_error + rotation_error + config.rank_weight * dist,
            })
        })
        .collect();
    // Stable sort keeps seed order among exact ties.
    out.sort_by(|a, b| a.score.total_cmp(&b.score));
    out
}
