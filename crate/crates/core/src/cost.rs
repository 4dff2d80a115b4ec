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
//! Cost terms and the five-point finite-difference stencils.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{quat_dot, Pose, Quat};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostWeights {
    pub pose_pos: f64,
    pub pose_rot: f64,
    pub pose_pos_scale: f64,
    pub pose_rot_scale: f64,
    pub cspace: f64,
    pub cspace_scale: f64,
    pub vel_boundary: f64,
    pub vel_scale: f64,
    /// The boundary velocity term stays off unless this is set.
    pub vel_boundary_enabled: bool,
    pub accel: f64,
    pub jerk: f64,
    pub bound_weight: f64,
    pub self_collision: f64,
    pub world_collision: f64,
    pub activation: f64,
    pub bound_activation: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        Self {
            pose_pos: 2000.0,
            pose_rot: 350.0,
            pose_pos_scale: 100.0,
            pose_rot_scale: 100.0,
            cspace: 5000.0,
            cspace_scale: 50.0,
            vel_boundary: 5000.0,
            vel_scale: 50.0,
            vel_boundary_enabled: false,
            accel: 100.0,
            jerk: 5000.0,
            bound_weight: 5000.0,
            self_collision: 5000.0,
            world_collision: 50000.0,
            activation: 0.025,
            bound_activation: 0.1,
        }
    }
}

impl CostWeights {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.pose_pos,
            self.pose_rot,
            self.pose_pos_scale,
            self.pose_rot_scale,
            self.cspace,
            self.cspace_scale,
            self.vel_boundary,
            self.vel_scale,
            self.accel,
            self.jerk,
            self.bound_weight,
            self.self_collision,
            self.world_collision,
        ];
        if all.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::Invalid("cost weights must be nonnegative".into()));
        }
        if !(self.activation > 0.0 && self.bound_activation > 0.0) {
            return Err(Error::Invalid("activation distances must be positive".into()));
        }
        Ok(())
    }

    /// Rescales the time-derivative weights for a solve at `dt`.
    pub fn scaled_for_dt(&self, dt: f64, scaling: &DtScaling) -> CostWeights {
        let r = scaling.dt_ref / dt;
        CostWeights {
            vel_boundary: self.vel_boundary * r.powf(scaling.velocity_exponent),
            accel: self.accel * r.powf(scaling.accel_exponent),
            jerk: self.jerk * r.powf(scaling.jerk_exponent),
            ..*self
        }
    }
}

/// Weight multiplier `(dt_ref / dt)^exponent` per derivative order.
///
/// A stencil of order `k` grows like `dt^-k`, so its squared cost grows
/// like `dt^-2k`. The default exponents cancel that, which keeps a weight
/// meaning the same thing at any step and equal to its value at `dt_ref`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DtScaling {
    pub dt_ref: f64,
    pub velocity_exponent: f64,
    pub accel_exponent: f64,
    pub jerk_exponent: f64,
}

impl Default for DtScaling {
    fn default() -> Self {
        Self {
            dt_ref: 0.25,
            velocity_exponent: -2.0,
            accel_exponent: -4.0,
            jerk_exponent: -6.0,
        }
    }
}

/// `log(cosh(x))` without overflow.
#[inline]
pub fn logcosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PoseCost {
    pub position_cost: f64,
    pub rotation_cost: f64,
    pub d_pos: Vector3<f64>,
    pub d_quat: Quat,
}

impl PoseCost {
    pub fn total(&self) -> f64 {
        self.position_cost + self.rotation_cost
    }
}

pub fn pose_cost(ee: &Pose, goal: &Pose, w: &CostWeights) -> PoseCost {
    let diff = ee.pos() - goal.pos();
    let e_p = diff.norm();
    let x = w.pose_pos_scale * e_p;
    let position_cost = w.pose_pos * logcosh(x);
    let d_pos = if e_p > 0.0 {
        diff * (w.pose_pos * w.pose_pos_scale * x.tanh() / e_p)
    } else {
        Vector3::zeros()
    };

    let dot = quat_dot(&goal.quaternion, &ee.quaternion);
    let e_r = 1.0 - dot.abs();
    let y = w.pose_rot_scale * e_r;
    let rotation_cost = w.pose_rot * logcosh(y);
    let s = -w.pose_rot * w.pose_rot_scale * y.tanh() * dot.signum();
    let g = goal.quaternion;
    PoseCost {
        position_cost,
        rotation_cost,
        d_pos,
        d_quat: [s * g[0], s * g[1], s * g[2], s * g[3]],
    }
}

/// Joint-space attraction; writes the gradient with respect to `q`.
pub fn cspace_cost(q: &[f64], goal: &[f64], w: &CostWeights, grad: &mut [f64]) -> f64 {
    let sq: f64 = q.iter().zip(goal).map(|(a, b)| (a - b) * (a - b)).sum();
    let x = w.cspace_scale * sq;
    let k = w.cspace * w.cspace_scale * x.tanh() * 2.0;
    for ((g, a), b) in grad.iter_mut().zip(q).zip(goal) {
        *g = k * (a - b);
    }
    w.cspace * logcosh(x)
}

/// Limit penalty before weighting, with its derivative.
#[inline]
pub fn bound_cost(v: f64, lower: f64, upper: f64, eta: f64) -> (f64, f64) {
    if v < lower {
        (lower - v + 0.5 * eta, -1.0)
    } else if v < lower + eta {
        let t = lower - v + eta;
        (0.5 / eta * t * t, -t / eta)
    } else if v > upper {
        (v - upper + 0.5 * eta, 1.0)
    } else if v > upper - eta {
        let t = v - upper + eta;
        (0.5 / eta * t * t, t / eta)
    } else {
        (0.0, 0.0)
    }
}

pub fn checked_bound_cost(v: f64, lower: f64, upper: f64, eta: f64) -> Result<(f64, f64)> {
    if !(lower < upper) || eta >= 0.5 * (upper - lower) {
        return Err(Error::Invalid(format!(
            "bound activation {eta} must be below half the range [{lower}, {upper}]"
        )));
    }
    Ok(bound_cost(v, lower, upper, eta))
}

pub const VEL_STENCIL: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];
pub const ACC_STENCIL: [f64; 5] = [-1.0, 16.0, -30.0, 16.0, -1.0];
pub const JERK_STENCIL: [f64; 5] = [-1.0, 2.0, 0.0, -2.0, 1.0];

/// Velocity, acceleration and jerk, each `T×D` row-major.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Derivatives {
    pub vel: Vec<f64>,
    pub acc: Vec<f64>,
    pub jerk: Vec<f64>,
}

#[inline]
fn stencil_scales(dt: f64) -> [f64; 3] {
    [1.0 / (12.0 * dt), 1.0 / (12.0 * dt * dt), 1.0 / (2.0 * dt * dt * dt)]
}

#[inline]
fn clamp_row(t: usize, k: usize, rows: usize) -> usize {
    (t + k).saturating_sub(2).min(rows - 1)
}

/// Five-point stencils over `rows×dof` positions with indices clamped at
/// the ends.
pub fn stencil_derivatives_into(positions: &[f64], dof: usize, dt: f64, out: &mut Derivatives) {
    let rows = positions.len() / dof;
    let n = rows * dof;
    for v in [&mut out.vel, &mut out.acc, &mut out.jerk] {
        v.clear();
        v.resize(n, 0.0);
    }
    let [sv, sa, sj] = stencil_scales(dt);
    for t in 0..rows {
        // Differences against the center row keep constant segments exactly at rest.
        for k in 0..5 {
            let src = clamp_row(t, k, rows) * dof;
            let (cv, ca, cj) = (VEL_STENCIL[k] * sv, ACC_STENCIL[k] * sa, JERK_STENCIL[k] * sj);
            for d in 0..dof {
                let p = positions[src + d] - positions[t * dof + d];
                out.vel[t * dof + d] += cv * p;
                out.acc[t * dof + d] += ca * p;
                out.jerk[t * dof + d] += cj * p;
            }
        }
    }
}

pub fn stencil_derivatives(positions: &[f64], dof: usize, dt: f64) -> Result<Derivatives> {
    if dof == 0 || positions.len() % dof != 0 || positions.len() / dof < 5 {
        return Err(Error::Invalid("stencil needs at least 5 rows".into()));
    }
    if !(dt > 0.0) {
        return Err(Error::Invalid("dt must be positive".into()));
    }
    let mut out = Derivatives::default();
    stencil_derivatives_into(positions, dof, dt, &mut out);
    Ok(out)
}

/// Adjoint of [`stencil_derivatives_into`]: accumulates position gradients
/// from derivative cotangents into `grad`.
pub fn stencil_adjoint_into(cot: &Derivatives, dof: usize, dt: f64, grad: &mut [f64]) {
    let rows = grad.len() / dof;
    let [sv, sa, sj] = stencil_scales(dt);
    for t in 0..rows {
        for k in 0..5 {
            let dst = clamp_row(t, k, rows) * dof;
            let (cv, ca, cj) = (VEL_STENCIL[k] * sv, ACC_STENCIL[k] * sa, JERK_STENCIL[k] * sj);
            for d in 0..dof {
                let i = t * dof + d;
                grad[dst + d] += cv * cot.vel[i] + ca * cot.acc[i] + cj * cot.jerk[i];
            }
        }
    }
}

/// Smoothness cost; writes derivative cotangents into `cot`.
pub fn smoothness_cost(
    der: &Derivatives,
    w: &CostWeights,
    jerk_enabled: bool,
    boundary_rows: &[usize],
    dof: usize,
    cot: &mut Derivatives,
) -> SmoothnessBreakdown {
    let n = der.acc.len();
    for v in [&mut cot.vel, &mut cot.acc, &mut cot.jerk] {
        v.clear();
        v.resize(n, 0.0);
    }
    let mut out = SmoothnessBreakdown::default();
    for i in 0..n {
        let a = der.acc[i];
        out.accel += w.accel * a * a;
        cot.acc[i] = 2.0 * w.accel * a;
        if jerk_enabled {
            let j = der.jerk[i];
            out.jerk += w.jerk * j * j;
            cot.jerk[i] = 2.0 * w.jerk * j;
        }
    }
    if w.vel_boundary_enabled {
        for &t in boundary_rows {
            for d in 0..dof {
                let i = t * dof + d;
                let x = w.vel_scale * der.vel[i];
                out.velocity += w.vel_boundary * logcosh(x);
                cot.vel[i] += w.vel_boundary * w.vel_scale * x.tanh();
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SmoothnessBreakdown {
    pub velocity: f64,
    pub accel: f64,
    pub jerk: f64,
}

impl SmoothnessBreakdown {
    pub fn total(&self) -> f64 {
        self.velocity + self.accel + self.jerk
    }
}
