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
//! Trajectories on a uniform time grid, retiming against derivative
//! limits, and B-spline resampling.

use serde::{Deserialize, Serialize};

use crate::cost::{stencil_derivatives, Derivatives};
use crate::error::{Error, Result};
use crate::robot::RobotModel;

/// Smallest time scale retiming will apply.
pub const MIN_SCALE: f64 = 1e-3;
/// Relative slack added to a retiming scale so rounding never leaves a
/// derivative a hair above its limit.
const SCALE_SLACK: f64 = 1e-9;

/// `rows×dof` joint positions sampled every `dt` seconds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub dof: usize,
    pub dt: f64,
    pub positions: Vec<f64>,
}

impl Trajectory {
    pub fn new(dof: usize, dt: f64, positions: Vec<f64>) -> Result<Self> {
        if dof == 0 || positions.len() % dof != 0 {
            return Err(Error::ShapeMismatch { expected: dof, actual: positions.len() });
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Invalid(format!("time step {dt} must be positive")));
        }
        Ok(Self { dof, dt, positions })
    }

    pub fn rows(&self) -> usize {
        self.positions.len() / self.dof
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.positions[t * self.dof..(t + 1) * self.dof]
    }

    pub fn duration(&self) -> f64 {
        self.rows().saturating_sub(1) as f64 * self.dt
    }

    pub fn derivatives(&self) -> Result<Derivatives> {
        stencil_derivatives(&self.positions, self.dof, self.dt)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.positions.chunks(self.dof).map(<[f64]>::to_vec).collect()
    }
}

/// Largest ratio of each derivative to its limit. Acceleration and jerk
/// ratios are reported raw, before any root is taken.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LimitRatios {
    pub velocity: f64,
    pub acceleration: f64,
    pub jerk: f64,
}

impl LimitRatios {
    pub fn max(&self) -> f64 {
        self.velocity.max(self.acceleration).max(self.jerk)
    }
}

pub fn limit_ratios(der: &Derivatives, robot: &RobotModel) -> LimitRatios {
    let d = robot.dof;
    let worst = |v: &[f64], lim: &[f64]| {
        v.iter().enumerate().map(|(i, x)| x.abs() / lim[i % d]).fold(0.0, f64::max)
    };
    LimitRatios {
        velocity: worst(&der.vel, &robot.velocity_limits),
        acceleration: worst(&der.acc, &robot.acceleration_limits),
        jerk: worst(&der.jerk, &robot.jerk_limits),
    }
}

/// Time scale `s` such that stretching the trajectory's time by `s` puts
/// its most constrained derivative exactly at its limit.
pub fn retime_scale(traj: &Trajectory, robot: &RobotModel) -> Result<f64> {
    if traj.rows() == 0 {
        return Err(Error::Invalid("cannot retime an empty trajectory".into()));
    }
    if traj.dof != robot.dof {
        return Err(Error::ShapeMismatch { expected: robot.dof, actual: traj.dof });
    }
    let r = limit_ratios(&traj.derivatives()?, robot);
    let s = r.velocity.max(r.acceleration.sqrt()).max(r.jerk.cbrt());
    Ok((s * (1.0 + SCALE_SLACK)).max(MIN_SCALE))
}

/// New time step after retiming.
pub fn retime(traj: &Trajectory, robot: &RobotModel) -> Result<f64> {
    Ok(traj.dt * retime_scale(traj, robot)?)
}

/// Uniform cubic B-spline through the knot rows used as control points,
/// sampled on `intervals` equal steps. Each spline segment lasts one knot
/// step, so the curve spans `rows - 3` steps.
///
/// The spline's jerk on a segment is a third difference of its control
/// points, and the five-point jerk stencil is the mean of two adjacent
/// third differences. Fine-step jerk therefore stays at the level the
/// optimizer saw. A run of at least three identical rows at either end is
/// reproduced exactly, at rest.
pub fn resample(traj: &Trajectory, intervals: usize) -> Result<Trajectory> {
    let rows = traj.rows();
    if rows < 2 || intervals == 0 {
        return Err(Error::Invalid("resampling needs two knots and one interval".into()));
    }
    let d = traj.dof;
    // Too short for a cubic segment: fall back to linear pieces.
    let linear = rows < 4;
    let segments = if linear { rows - 1 } else { rows - 3 };
    let mut out = Vec::with_capacity((intervals + 1) * d);
    for k in 0..=intervals {
        if k == 0 || k == intervals {
            out.extend_from_slice(traj.row(if k == 0 { 0 } else { rows - 1 }));
            continue;
        }
        let u = k as f64 * segments as f64 / intervals as f64;
        let i = (u.floor() as usize).min(segments - 1);
        let s = u - i as f64;
        if linear {
            let (a, b) = (traj.row(i), traj.row(i + 1));
            out.extend(a.iter().zip(b).map(|(x, y)| x + s * (y - x)));
            continue;
        }
        let (s2, s3) = (s * s, s * s * s);
        let w = [
            (1.0 - s).powi(3) / 6.0,
            (3.0 * s3 - 6.0 * s2 + 4.0) / 6.0,
            (-3.0 * s3 + 3.0 * s2 + 3.0 * s + 1.0) / 6.0,
            s3 / 6.0,
        ];
        // Offsets from one control point keep identical rows exactly equal.
        for j in 0..d {
            let p = |m: usize| traj.positions[(i + m) * d + j];
            let base = p(1);
            out.push(base + (0..4).map(|m| w[m] * (p(m) - base)).sum::<f64>());
        }
    }
    Trajectory::new(d, segments as f64 * traj.dt / intervals as f64, out)
}

/// Resamples to the coarsest uniform grid whose step does not exceed
/// `dt_out`. The step is shortened so the grid spans the duration exactly.
pub fn interpolate(traj: &Trajectory, dt_out: f64) -> Result<Trajectory> {
    if !(dt_out > 0.0) {
        return Err(Error::Invalid(format!("interpolation step {dt_out} must be positive")));
    }
    let span = if traj.rows() < 4 { traj.duration() } else { (traj.rows() - 3) as f64 * traj.dt };
    let steps = ((span / dt_out) - 1e-9).ceil().max(1.0) as usize;
    resample(traj, steps)
}

/// Retimes a knot trajectory and resamples it so that the fine trajectory
/// has a step no larger than `dt_out`, respects every derivative limit and
/// ends at rest under the five-point stencils.
///
/// The fine positions depend only on the number of intervals, so the
/// limits fix the fine step directly.
pub fn finalize_timing(traj: &Trajectory, robot: &RobotModel, dt_out: f64) -> Result<Trajectory> {
    let knots = traj.rows();
    if knots < 5 {
        return Err(Error::Invalid("finalizing needs at least five knots".into()));
    }
    let coarse_dt = retime(traj, robot)?;
    let duration = (knots - 1) as f64 * coarse_dt;
    // At least two fine steps inside the last (stationary) spline segment
    // keep the terminal stencils exactly zero.
    let mut n = ((duration / dt_out).ceil() as usize).max(2 * (knots - 1));
    for _ in 0..16 {
        let mut fine = resample(&Trajectory::new(traj.dof, coarse_dt, traj.positions.clone())?, n)?;
        let s = retime_scale(&fine, robot)?;
        fine.dt *= s;
        if fine.dt <= dt_out * (1.0 + 1e-12) {
            return Ok(fine);
        }
        n = ((n as f64) * fine.dt / dt_out).ceil() as usize;
    }
    Err(Error::Invalid("fine retiming did not converge".into()))
}
