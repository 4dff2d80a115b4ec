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
//! Rollouts: decision variables to scalar cost and gradient.
//!
//! A trajectory has `T` rows. Rows `0..=3` hold the start and rows
//! `T-4..=T-1` hold the terminal state, so the stencils see the robot at
//! rest at both ends. The free variables are rows `4..=T-5` followed by
//! the terminal row, `(T-7)·D` values in all.

use std::collections::BTreeMap;

use nalgebra::Vector3;
use rayon::prelude::*;

use crate::collision::{
    self_collision_into, sphere_collision_cost, swept_collision_cost, SweepParams,
};
use crate::cost::{
    bound_cost, cspace_cost, pose_cost, smoothness_cost, stencil_adjoint_into,
    stencil_derivatives_into, CostWeights, Derivatives,
};
use crate::error::{Error, Result};
use crate::geometry::{Frame, Pose, Quat};
use crate::kinematics::{forward_single, gradient_single, GradScratch};
use crate::robot::RobotModel;
use crate::solvers::BatchObjective;
use crate::world::WorldModel;

/// Rows pinned to the start, including the start itself.
pub const START_ROWS: usize = 4;
/// Rows equal to the terminal state, including the terminal itself.
pub const END_ROWS: usize = 4;
pub const MIN_HORIZON: usize = START_ROWS + END_ROWS;

#[derive(Clone, Debug, PartialEq)]
pub enum Goal {
    Pose(Pose),
    Cspace(Vec<f64>),
}

#[derive(Clone, Debug)]
pub struct RolloutProblem<'a> {
    pub robot: &'a RobotModel,
    pub world: &'a WorldModel,
    pub start: Vec<f64>,
    pub goal: Goal,
    pub weights: CostWeights,
    pub dt: f64,
    pub horizon: usize,
    pub jerk_enabled: bool,
    pub sweep_steps: usize,
}

impl<'a> RolloutProblem<'a> {
    pub fn new(robot: &'a RobotModel, world: &'a WorldModel, start: Vec<f64>, goal: Goal) -> Self {
        Self {
            robot,
            world,
            start,
            goal,
            weights: CostWeights::default(),
            dt: 0.25,
            horizon: 32,
            jerk_enabled: true,
            sweep_steps: 4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.robot.dof;
        if self.start.len() != d {
            return Err(Error::ShapeMismatch { expected: d, actual: self.start.len() });
        }
        if let Goal::Cspace(g) = &self.goal {
            if g.len() != d {
                return Err(Error::ShapeMismatch { expected: d, actual: g.len() });
            }
        }
        if self.horizon < MIN_HORIZON {
            return Err(Error::Invalid(format!("horizon must be at least {MIN_HORIZON}")));
        }
        if !(self.dt > 0.0) {
            return Err(Error::Invalid("dt must be positive".into()));
        }
        if !self.robot.within_position_limits(&self.start) {
            return Err(Error::Invalid("start lies outside the position limits".into()));
        }
        self.weights.validate()
    }

    pub fn free_rows(&self) -> usize {
        self.horizon - START_ROWS - END_ROWS + 1
    }

    pub fn free_dim(&self) -> usize {
        self.free_rows() * self.robot.dof
    }

    /// Expands free variables into the full `T×D` trajectory.
    pub fn expand_into(&self, free: &[f64], full: &mut [f64]) {
        let d = self.robot.dof;
        let t = self.horizon;
        for r in 0..START_ROWS {
            full[r * d..(r + 1) * d].copy_from_slice(&self.start);
        }
        let inner = (t - START_ROWS - END_ROWS) * d;
        full[START_ROWS * d..START_ROWS * d + inner].copy_from_slice(&free[..inner]);
        let term = &free[inner..inner + d];
        for r in t - END_ROWS..t {
            full[r * d..(r + 1) * d].copy_from_slice(term);
        }
    }

    pub fn expand(&self, free: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.horizon * self.robot.dof];
        self.expand_into(free, &mut full);
        full
    }

    /// Extracts free variables from a full trajectory; the last row is the terminal state.
    pub fn contract(&self, full: &[f64]) -> Vec<f64> {
        let d = self.robot.dof;
        let t = self.horizon;
        let inner = (t - START_ROWS - END_ROWS) * d;
        let mut out = Vec::with_capacity(self.free_dim());
        out.extend_from_slice(&full[START_ROWS * d..START_ROWS * d + inner]);
        out.extend_from_slice(&full[(t - 1) * d..t * d]);
        out
    }

    /// Routes a full-trajectory gradient to the free variables.
    pub fn fold_gradient(&self, full_grad: &[f64], free_grad: &mut [f64]) {
        let d = self.robot.dof;
        let t = self.horizon;
        let inner = (t - START_ROWS - END_ROWS) * d;
        free_grad[..inner].copy_from_slice(&full_grad[START_ROWS * d..START_ROWS * d + inner]);
        let term = &mut free_grad[inner..inner + d];
        term.iter_mut().for_each(|v| *v = 0.0);
        for r in t - END_ROWS..t {
            for (g, v) in term.iter_mut().zip(&full_grad[r * d..(r + 1) * d]) {
                *g += v;
            }
        }
    }

    /// Position bounds on the free variables, for the line-search clip.
    pub fn free_bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let rows = self.free_rows();
        let lo = self.robot.lower_limits();
        let hi = self.robot.upper_limits();
        (lo.repeat(rows), hi.repeat(rows))
    }
}

/// Named cost terms for diagnostics.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CostBreakdown {
    pub terms: BTreeMap<&'static str, f64>,
}

impl CostBreakdown {
    fn add(&mut self, name: &'static str, v: f64) {
        *self.terms.entry(name).or_insert(0.0) += v;
    }

    pub fn total(&self) -> f64 {
        self.terms.values().sum()
    }

    pub fn get(&self, name: &str) -> f64 {
        self.terms.get(name).copied().unwrap_or(0.0)
    }
}

/// Per-worker buffers for trajectory rollouts.
#[derive(Clone, Default)]
pub struct TrajScratch {
    full: Vec<f64>,
    der: Derivatives,
    cot: Derivatives,
    links: Vec<Frame>,
    spheres: Vec<Vector3<f64>>,
    d_spheres: Vec<Vector3<f64>>,
    self_grad: Vec<Vector3<f64>>,
    full_grad: Vec<f64>,
    row_grad: Vec<f64>,
    kin: GradScratch,
    d_ee_pos: Vec<Vector3<f64>>,
    d_ee_quat: Vec<Quat>,
}

fn add_bounds(
    values: &[f64],
    limits: &[[f64; 2]],
    dof: usize,
    eta: f64,
    weight: f64,
    grad: &mut [f64],
) -> f64 {
    let mut c = 0.0;
    for (i, &v) in values.iter().enumerate() {
        let [lo, hi] = limits[i % dof];
        let (b, g) = bound_cost(v, lo, hi, eta);
        if b != 0.0 || g != 0.0 {
            c += weight * b;
            grad[i] += weight * g;
        }
    }
    c
}

fn symmetric(limits: &[f64]) -> Vec<[f64; 2]> {
    limits.iter().map(|&l| [-l, l]).collect()
}

/// Cost and (optionally) free-variable gradient of one trajectory.
pub fn trajectory_cost(
    p: &RolloutProblem,
    free: &[f64],
    s: &mut TrajScratch,
    grad: Option<&mut [f64]>,
    mut breakdown: Option<&mut CostBreakdown>,
) -> f64 {
    let robot = p.robot;
    let w = &p.weights;
    let (d, t) = (robot.dof, p.horizon);
    let (nl, m) = (robot.num_links(), robot.num_spheres());
    let mut total = 0.0;
    let record = |name: &'static str, v: f64, b: &mut Option<&mut CostBreakdown>| {
        if let Some(b) = b.as_deref_mut() {
            b.add(name, v);
        }
        v
    };

    s.full.resize(t * d, 0.0);
    p.expand_into(free, &mut s.full);
    stencil_derivatives_into(&s.full, d, p.dt, &mut s.der);
    s.full_grad.clear();
    s.full_grad.resize(t * d, 0.0);

    let boundary: Vec<usize> = (0..START_ROWS).chain(t - END_ROWS..t).collect();
    let sm = smoothness_cost(&s.der, w, p.jerk_enabled, &boundary, d, &mut s.cot);
    total += record("accel", sm.accel, &mut breakdown);
    total += record("jerk", sm.jerk, &mut breakdown);
    total += record("velocity_boundary", sm.velocity, &mut breakdown);

    let (eta2, bw) = (w.bound_activation, w.bound_weight);
    let c = add_bounds(&s.full, &robot.position_limits, d, eta2, bw, &mut s.full_grad);
    total += record("bound_position", c, &mut breakdown);
    let c = add_bounds(&s.der.vel, &symmetric(&robot.velocity_limits), d, eta2, bw, &mut s.cot.vel);
    total += record("bound_velocity", c, &mut breakdown);
    let c = add_bounds(&s.der.acc, &symmetric(&robot.acceleration_limits), d, eta2, bw, &mut s.cot.acc);
    total += record("bound_accel", c, &mut breakdown);
    let c = add_bounds(&s.der.jerk, &symmetric(&robot.jerk_limits), d, eta2, bw, &mut s.cot.jerk);
    total += record("bound_jerk", c, &mut breakdown);

    // Kinematics on the distinct rows START_ROWS-1 ..= T-END_ROWS.
    let first = START_ROWS - 1;
    let last = t - END_ROWS;
    let unique = last - first + 1;
    let uniq = |row: usize| row.clamp(first, last) - first;
    s.links.resize(unique * nl, Frame::identity());
    s.spheres.resize(unique * m, Vector3::zeros());
    s.d_spheres.clear();
    s.d_spheres.resize(unique * m, Vector3::zeros());
    s.d_ee_pos.clear();
    s.d_ee_pos.resize(unique, Vector3::zeros());
    s.d_ee_quat.clear();
    s.d_ee_quat.resize(unique, [0.0; 4]);
    s.self_grad.resize(m, Vector3::zeros());
    let mut ee_terminal = None;
    for u in 0..unique {
        let row = &s.full[(first + u) * d..(first + u + 1) * d];
        let pose = forward_single(
            robot,
            row,
            &mut s.links[u * nl..(u + 1) * nl],
            &mut s.spheres[u * m..(u + 1) * m],
        );
        if u == unique - 1 {
            ee_terminal = Some(pose);
        }
    }

    match &p.goal {
        Goal::Pose(goal) => {
            let pc = pose_cost(ee_terminal.as_ref().unwrap(), goal, w);
            total += record("pose_position", pc.position_cost, &mut breakdown);
            total += record("pose_rotation", pc.rotation_cost, &mut breakdown);
            s.d_ee_pos[unique - 1] = pc.d_pos;
            s.d_ee_quat[unique - 1] = pc.d_quat;
        }
        Goal::Cspace(goal) => {
            s.row_grad.resize(d, 0.0);
            let c = cspace_cost(&s.full[(t - 1) * d..t * d], goal, w, &mut s.row_grad);
            total += record("cspace", c, &mut breakdown);
            for k in 0..d {
                s.full_grad[(t - 1) * d + k] += s.row_grad[k];
            }
        }
    }

    let radii = robot.sphere_radii();
    let mut self_total = 0.0;
    for row in 0..t {
        let u = uniq(row);
        let sp = &s.spheres[u * m..(u + 1) * m];
        let (c, arg) = self_collision_into(sp, &radii, &robot.self_pairs, w.self_collision, &mut s.self_grad);
        if arg.is_some() {
            self_total += c;
            let (i, j) = robot.self_pairs[arg.unwrap()];
            s.d_spheres[u * m + i] += s.self_grad[i];
            s.d_spheres[u * m + j] += s.self_grad[j];
        }
    }
    total += record("self_collision", self_total, &mut breakdown);

    let params = SweepParams {
        eta: w.activation,
        weight: w.world_collision,
        speed_dt: p.dt,
        steps: p.sweep_steps,
    };
    let mut world_total = 0.0;
    if !p.world.obstacles.is_empty() {
        for row in 0..t {
            let (up, u, un) = (uniq(row.saturating_sub(1)), uniq(row), uniq((row + 1).min(t - 1)));
            if up == u && un == u {
                continue;
            }
            for k in 0..m {
                let r = radii[k];
                let res = swept_collision_cost(
                    p.world,
                    &s.spheres[up * m + k],
                    &s.spheres[u * m + k],
                    &s.spheres[un * m + k],
                    r,
                    &params,
                );
                if res.cost != 0.0 {
                    world_total += res.cost;
                    s.d_spheres[up * m + k] += res.grad_prev;
                    s.d_spheres[u * m + k] += res.grad_cur;
                    s.d_spheres[un * m + k] += res.grad_next;
                }
            }
        }
    }
    total += record("world_collision", world_total, &mut breakdown);

    if let Some(g) = grad {
        s.row_grad.resize(d, 0.0);
        for u in 0..unique {
            let row = first + u;
            // The first distinct row is the pinned start; its gradient is dropped.
            if row < START_ROWS {
                continue;
            }
            gradient_single(
                robot,
                &s.links[u * nl..(u + 1) * nl],
                &s.spheres[u * m..(u + 1) * m],
                &s.d_spheres[u * m..(u + 1) * m],
                &s.d_ee_pos[u],
                &s.d_ee_quat[u],
                &mut s.kin,
                &mut s.row_grad,
            );
            for k in 0..d {
                s.full_grad[row * d + k] += s.row_grad[k];
            }
        }
        stencil_adjoint_into(&s.cot, d, p.dt, &mut s.full_grad);
        p.fold_gradient(&s.full_grad, g);
    }
    total
}

/// Trajectory rollout over free variables, usable by the solvers.
pub struct TrajectoryObjective<'a> {
    pub problem: RolloutProblem<'a>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl<'a> TrajectoryObjective<'a> {
    pub fn new(problem: RolloutProblem<'a>) -> Self {
        let (lower, upper) = problem.free_bounds();
        Self { problem, lower, upper }
    }
}

impl BatchObjective for TrajectoryObjective<'_> {
    fn dim(&self) -> usize {
        self.problem.free_dim()
    }

    fn evaluate(&self, x: &[f64], cost: &mut [f64], grad: Option<&mut [f64]>) {
        let n = self.dim();
        let p = &self.problem;
        match grad {
            Some(g) => x
                .par_chunks(n)
                .zip(cost.par_iter_mut())
                .zip(g.par_chunks_mut(n))
                .for_each_init(TrajScratch::default, |s, ((xb, c), gb)| {
                    *c = trajectory_cost(p, xb, s, Some(gb), None);
                }),
            None => x
                .par_chunks(n)
                .zip(cost.par_iter_mut())
                .for_each_init(TrajScratch::default, |s, (xb, c)| {
                    *c = trajectory_cost(p, xb, s, None, None);
                }),
        }
    }

    fn bounds(&self) -> Option<(&[f64], &[f64])> {
        Some((&self.lower, &self.upper))
    }
}

/// Full-trajectory rollout: `theta` is `B×T×D`. Rows aliasing the start or the
/// terminal state are overwritten before evaluation and their gradients are
/// routed to the row they alias (the start receives none).
pub fn rollout_trajectory(p: &RolloutProblem, theta: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let (t, d) = (p.horizon, p.robot.dof);
    if theta.is_empty() || theta.len() % (t * d) != 0 {
        return Err(Error::ShapeMismatch { expected: t * d, actual: theta.len() });
    }
    if theta.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let b = theta.len() / (t * d);
    let free: Vec<f64> = theta.chunks(t * d).flat_map(|row| p.contract(row)).collect();
    let obj = TrajectoryObjective::new(p.clone());
    let n = obj.dim();
    let mut cost = vec![0.0; b];
    let mut g = vec![0.0; b * n];
    obj.evaluate(&free, &mut cost, Some(&mut g));
    let mut full = vec![0.0; b * t * d];
    let inner = (t - START_ROWS - END_ROWS) * d;
    for (fb, gb) in full.chunks_mut(t * d).zip(g.chunks(n)) {
        fb[START_ROWS * d..START_ROWS * d + inner].copy_from_slice(&gb[..inner]);
        fb[(t - 1) * d..].copy_from_slice(&gb[inner..]);
    }
    Ok((cost, full))
}

/// Term-wise cost of one full trajectory.
pub fn trajectory_breakdown(p: &RolloutProblem, full: &[f64]) -> CostBreakdown {
    let mut b = CostBreakdown::default();
    let mut s = TrajScratch::default();
    trajectory_cost(p, &p.contract(full), &mut s, None, Some(&mut b));
    b
}

// ---------------------------------------------------------------------------
// Inverse kinematics

#[derive(Clone, Default)]
pub struct IkScratch {
    links: Vec<Frame>,
    spheres: Vec<Vector3<f64>>,
    d_spheres: Vec<Vector3<f64>>,
    self_grad: Vec<Vector3<f64>>,
    kin: GradScratch,
}

pub fn ik_cost(
    p: &RolloutProblem,
    q: &[f64],
    s: &mut IkScratch,
    grad: Option<&mut [f64]>,
    mut breakdown: Option<&mut CostBreakdown>,
) -> f64 {
    let robot = p.robot;
    let w = &p.weights;
    let (d, nl, m) = (robot.dof, robot.num_links(), robot.num_spheres());
    s.links.resize(nl, Frame::identity());
    s.spheres.resize(m, Vector3::zeros());
    s.d_spheres.clear();
    s.d_spheres.resize(m, Vector3::zeros());
    s.self_grad.resize(m, Vector3::zeros());
    let mut record = |name: &'static str, v: f64| {
        if let Some(b) = breakdown.as_deref_mut() {
            b.add(name, v);
        }
        v
    };
    let pose = forward_single(robot, q, &mut s.links, &mut s.spheres);
    let mut total = 0.0;
    let mut d_pos = Vector3::zeros();
    let mut d_quat = [0.0; 4];
    let mut joint_grad = vec![0.0; d];
    match &p.goal {
        Goal::Pose(goal) => {
            let pc = pose_cost(&pose, goal, w);
            total += record("pose_position", pc.position_cost);
            total += record("pose_rotation", pc.rotation_cost);
            d_pos = pc.d_pos;
            d_quat = pc.d_quat;
        }
        Goal::Cspace(goal) => {
            total += record("cspace", cspace_cost(q, goal, w, &mut joint_grad));
        }
    }
    let radii = robot.sphere_radii();
    let (c, arg) = self_collision_into(&s.spheres, &radii, &robot.self_pairs, w.self_collision, &mut s.self_grad);
    total += record("self_collision", c);
    if let Some(k) = arg {
        let (i, j) = robot.self_pairs[k];
        s.d_spheres[i] += s.self_grad[i];
        s.d_spheres[j] += s.self_grad[j];
    }
    let mut world = 0.0;
    for k in 0..m {
        let r = sphere_collision_cost(p.world, &s.spheres[k], radii[k], w.activation, w.world_collision);
        world += r.cost;
        s.d_spheres[k] += r.gradient;
    }
    total += record("world_collision", world);
    let c = add_bounds(q, &robot.position_limits, d, w.bound_activation, w.bound_weight, &mut joint_grad);
    total += record("bound_position", c);

    if let Some(g) = grad {
        gradient_single(robot, &s.links, &s.spheres, &s.d_spheres, &d_pos, &d_quat, &mut s.kin, g);
        for (a, b) in g.iter_mut().zip(&joint_grad) {
            *a += b;
        }
    }
    total
}

pub struct IkObjective<'a> {
    pub problem: RolloutProblem<'a>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl<'a> IkObjective<'a> {
    pub fn new(problem: RolloutProblem<'a>) -> Self {
        let lower = problem.robot.lower_limits();
        let upper = problem.robot.upper_limits();
        Self { problem, lower, upper }
    }
}

impl BatchObjective for IkObjective<'_> {
    fn dim(&self) -> usize {
        self.problem.robot.dof
    }

    fn evaluate(&self, x: &[f64], cost: &mut [f64], grad: Option<&mut [f64]>) {
        let n = self.dim();
        let p = &self.problem;
        match grad {
            Some(g) => x
                .par_chunks(n)
                .zip(cost.par_iter_mut())
                .zip(g.par_chunks_mut(n))
                .for_each_init(IkScratch::default, |s, ((xb, c), gb)| {
                    *c = ik_cost(p, xb, s, Some(gb), None);
                }),
            None => x
                .par_chunks(n)
                .zip(cost.par_iter_mut())
                .for_each_init(IkScratch::default, |s, (xb, c)| {
                    *c = ik_cost(p, xb, s, None, None);
                }),
        }
    }

    fn bounds(&self) -> Option<(&[f64], &[f64])> {
        Some((&self.lower, &self.upper))
    }
}

/// Batched IK rollout: `q` is `B×D`.
pub fn rollout_ik(p: &RolloutProblem, q: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let d = p.robot.dof;
    if q.is_empty() || q.len() % d != 0 {
        return Err(Error::ShapeMismatch { expected: d, actual: q.len() });
    }
    let obj = IkObjective::new(p.clone());
    let b = q.len() / d;
    let mut cost = vec![0.0; b];
    let mut g = vec![0.0; b * d];
    obj.evaluate(q, &mut cost, Some(&mut g));
    Ok((cost, g))
}

pub fn ik_breakdown(p: &RolloutProblem, q: &[f64]) -> CostBreakdown {
    let mut b = CostBreakdown::default();
    ik_cost(p, q, &mut IkScratch::default(), None, Some(&mut b));
    b
}
