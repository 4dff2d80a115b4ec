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
//! Trajectory metrics and an independent validity checker.
//!
//! Everything here starts from raw joint positions, the time step and the
//! robot and scene models. Derivatives are recomputed with a separate
//! implementation of the five-point formulas so that the checks do not
//! share code with the optimizer's cost terms.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::geometry::{quaternion_error, Pose};
use crate::kinematics::ee_pose;
use crate::robot::RobotModel;
use crate::world::WorldModel;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    /// Meters.
    pub position: f64,
    /// `1 - |<q_goal, q>|`.
    pub orientation: f64,
    /// Largest terminal |velocity|, |acceleration| and |jerk|.
    pub rest: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { position: 0.005, orientation: 0.05, rest: 1e-6 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Empty,
    NonFinite { step: usize },
    PositionLimit { step: usize, joint: usize, value: f64 },
    VelocityLimit { step: usize, joint: usize, value: f64 },
    AccelerationLimit { step: usize, joint: usize, value: f64 },
    JerkLimit { step: usize, joint: usize, value: f64 },
    WorldCollision { step: usize, sphere: usize, obstacle: String, depth: f64 },
    SelfCollision { step: usize, spheres: (usize, usize), depth: f64 },
    NotAtRest { value: f64 },
    PositionError { value: f64 },
    OrientationError { value: f64 },
}

impl Violation {
    pub fn step(&self) -> Option<usize> {
        match self {
            Violation::NonFinite { step }
            | Violation::PositionLimit { step, .. }
            | Violation::VelocityLimit { step, .. }
            | Violation::AccelerationLimit { step, .. }
            | Violation::JerkLimit { step, .. }
            | Violation::WorldCollision { step, .. }
            | Violation::SelfCollision { step, .. } => Some(*step),
            _ => None,
        }
    }
}

/// Five-point central differences with the sample index clamped at both
/// ends, as velocity, acceleration and jerk arrays of `rows×dof`.
fn finite_differences(q: &[Vec<f64>], dt: f64) -> [Vec<Vec<f64>>; 3] {
    let n = q.len();
    let d = q.first().map_or(0, Vec::len);
    let at = |i: isize, j: usize| q[i.clamp(0, n as isize - 1) as usize][j];
    let mut vel = vec![vec![0.0; d]; n];
    let mut acc = vec![vec![0.0; d]; n];
    let mut jerk = vec![vec![0.0; d]; n];
    for t in 0..n {
        let i = t as isize;
        for j in 0..d {
            let (m2, m1, c, p1, p2) = (at(i - 2, j), at(i - 1, j), at(i, j), at(i + 1, j), at(i + 2, j));
            vel[t][j] = ((m2 - c) - 8.0 * (m1 - c) + 8.0 * (p1 - c) - (p2 - c)) / (12.0 * dt);
            acc[t][j] = (-(m2 - c) + 16.0 * (m1 - c) + 16.0 * (p1 - c) - (p2 - c)) / (12.0 * dt * dt);
            jerk[t][j] = (-(m2 - c) + 2.0 * (m1 - c) - 2.0 * (p1 - c) + (p2 - c)) / (2.0 * dt * dt * dt);
        }
    }
    [vel, acc, jerk]
}

/// Every violated check, in a fixed order: finiteness, limits, collisions,
/// terminal rest, goal error.
pub fn validate_trajectory(
    robot: &RobotModel,
    world: &WorldModel,
    goal: &Pose,
    q: &[Vec<f64>],
    dt: f64,
    thresholds: &Thresholds,
) -> Vec<Violation> {
    let mut out = Vec::new();
    if q.is_empty() || !(dt > 0.0) {
        return vec![Violation::Empty];
    }
    for (step, row) in q.iter().enumerate() {
        if row.len() != robot.dof || row.iter().any(|v| !v.is_finite()) {
            return vec![Violation::NonFinite { step }];
        }
    }
    for (step, row) in q.iter().enumerate() {
        for (joint, (&v, [lo, hi])) in row.iter().zip(&robot.position_limits).enumerate() {
            if v < *lo || v > *hi {
                out.push(Violation::PositionLimit { step, joint, value: v });
            }
        }
    }
    let [vel, acc, jerk] = finite_differences(q, dt);
    for step in 0..q.len() {
        for joint in 0..robot.dof {
            let (v, a, j) = (vel[step][joint], acc[step][joint], jerk[step][joint]);
            if v.abs() > robot.velocity_limits[joint] {
                out.push(Violation::VelocityLimit { step, joint, value: v });
            }
            if a.abs() > robot.acceleration_limits[joint] {
                out.push(Violation::AccelerationLimit { step, joint, value: a });
            }
            if j.abs() > robot.jerk_limits[joint] {
                out.push(Violation::JerkLimit { step, joint, value: j });
            }
        }
    }
    for (step, row) in q.iter().enumerate() {
        let centers = sphere_centers(robot, row);
        for (k, (c, s)) in centers.iter().zip(&robot.spheres).enumerate() {
            if s.radius <= 0.0 {
                continue;
            }
            for o in world.enabled() {
                let depth = s.radius - o.signed_distance(c).distance;
                if depth > 0.0 {
                    out.push(Violation::WorldCollision { step, sphere: k, obstacle: o.name.clone(), depth });
                }
            }
        }
        for &(i, j) in &robot.self_pairs {
            let (ri, rj) = (robot.spheres[i].radius, robot.spheres[j].radius);
            if ri <= 0.0 || rj <= 0.0 {
                continue;
            }
            let depth = ri + rj - (centers[i] - centers[j]).norm();
            if depth > 0.0 {
                out.push(Violation::SelfCollision { step, spheres: (i, j), depth });
            }
        }
    }
    let last = q.len() - 1;
    let rest = (0..robot.dof)
        .map(|j| vel[last][j].abs().max(acc[last][j].abs()).max(jerk[last][j].abs()))
        .fold(0.0, f64::max);
    if rest > thresholds.rest {
        out.push(Violation::NotAtRest { value: rest });
    }
    let (pe, oe) = goal_errors(robot, &q[last], goal);
    if !(pe < thresholds.position) {
        out.push(Violation::PositionError { value: pe });
    }
    if !(oe <= thresholds.orientation) {
        out.push(Violation::OrientationError { value: oe });
    }
    out
}

fn sphere_centers(robot: &RobotModel, q: &[f64]) -> Vec<Vector3<f64>> {
    let mut links = vec![crate::geometry::Frame::identity(); robot.num_links()];
    crate::kinematics::link_frames_into(robot, q, &mut links);
    robot
        .spheres
        .iter()
        .map(|s| links[s.link_index].transform_point(&s.center))
        .collect()
}

fn goal_errors(robot: &RobotModel, q: &[f64], goal: &Pose) -> (f64, f64) {
    let ee = ee_pose(robot, q);
    ((ee.pos() - goal.pos()).norm(), quaternion_error(&ee.quaternion, &goal.quaternion))
}

/// Per-trajectory quality metrics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub success: bool,
    /// Sum over steps of the L1 norm of the joint step, in radians.
    pub c_space_path_length: f64,
    pub motion_time: f64,
    pub max_jerk: f64,
    pub max_accel: f64,
    /// Mean over steps of `‖v_t‖₁ / D`.
    pub mean_velocity: f64,
    pub position_error: f64,
    pub orientation_error: f64,
}

pub fn evaluate_trajectory(
    robot: &RobotModel,
    world: &WorldModel,
    goal: &Pose,
    q: &[Vec<f64>],
    dt: f64,
    thresholds: &Thresholds,
) -> MetricRow {
    let success = validate_trajectory(robot, world, goal, q, dt, thresholds).is_empty();
    if q.is_empty() {
        return MetricRow {
            success,
            c_space_path_length: 0.0,
            motion_time: 0.0,
            max_jerk: 0.0,
            max_accel: 0.0,
            mean_velocity: 0.0,
            position_error: f64::INFINITY,
            orientation_error: f64::INFINITY,
        };
    }
    let [vel, acc, jerk] = finite_differences(q, dt);
    let max_abs = |x: &[Vec<f64>]| x.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()));
    let d = robot.dof as f64;
    let (position_error, orientation_error) = goal_errors(robot, q.last().unwrap(), goal);
    MetricRow {
        success,
        c_space_path_length: q
            .windows(2)
            .map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| (b - a).abs()).sum::<f64>())
            .sum(),
        motion_time: (q.len() - 1) as f64 * dt,
        max_jerk: max_abs(&jerk),
        max_accel: max_abs(&acc),
        mean_velocity: vel.iter().map(|v| v.iter().map(|x| x.abs()).sum::<f64>() / d).sum::<f64>() / q.len() as f64,
        position_error,
        orientation_error,
    }
}
