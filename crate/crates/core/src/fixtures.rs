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
//! Randomized problem builders shared by tests, benchmarks and the
//! acceptance suite.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{axis_angle_quaternion, Pose};
use crate::kinematics::ee_pose;
use crate::robot::RobotModel;
use crate::world::{Obb, WorldModel};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform configuration strictly inside the limits, shrunk by `margin`
/// on each side as a fraction of the range.
pub fn random_config(robot: &RobotModel, rng: &mut ChaCha8Rng, margin: f64) -> Vec<f64> {
    robot
        .position_limits
        .iter()
        .map(|&[lo, hi]| {
            let m = margin * (hi - lo);
            rng.gen_range(lo + m..hi - m)
        })
        .collect()
}

/// One to three boxes scattered around the arm's workspace.
pub fn random_world(rng: &mut ChaCha8Rng) -> WorldModel {
    let n = rng.gen_range(1..=3);
    let boxes = (0..n)
        .map(|i| {
            let center = Vector3::new(
                rng.gen_range(0.2..0.7),
                rng.gen_range(-0.5..0.5),
                rng.gen_range(0.0..0.8),
            );
            let axis = Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), 1.0);
            let q = axis_angle_quaternion(axis, rng.gen_range(-1.0..1.0));
            let half = Vector3::new(
                rng.gen_range(0.03..0.2),
                rng.gen_range(0.03..0.2),
                rng.gen_range(0.03..0.2),
            );
            Obb::new(format!("box{i}"), Pose::new(center, q), half).expect("positive extents")
        })
        .collect();
    WorldModel::new(boxes)
}

pub fn random_goal(robot: &RobotModel, rng: &mut ChaCha8Rng) -> Pose {
    ee_pose(robot, &random_config(robot, rng, 0.05))
}

/// Straight line from `a` to `b` over `rows` rows with Gaussian-free jitter
/// on the interior rows.
pub fn jittered_line(a: &[f64], b: &[f64], rows: usize, jitter: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut out = Vec::with_capacity(rows * a.len());
    for r in 0..rows {
        let s = r as f64 / (rows - 1) as f64;
        for (x, y) in a.iter().zip(b) {
            out.push(x + s * (y - x) + jitter * rng.gen_range(-1.0..1.0));
        }
    }
    out
}
