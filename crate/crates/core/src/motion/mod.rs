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
//! End-to-end motion generation: collision-free IK, seeding, two rounds of
//! batched trajectory optimization with retiming in between, and selection
//! of the best interpolated trajectory.

pub mod ik;
pub mod seeds;
pub mod timing;

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cost::{CostWeights, DtScaling};
use crate::error::{Error, Result};
use crate::geometry::Pose;
use crate::planner::{PlanOutcome, Planner, PlannerConfig, ValidityChecker};
use crate::robot::RobotModel;
use crate::rollout::{Goal, RolloutProblem, TrajectoryObjective};
use crate::solvers::{initial_variance, lbfgs_solve, particle_solve, EarlyExit, LbfgsConfig, ParticleConfig};
use crate::world::WorldModel;

pub use ik::{pose_errors, solve_ik, IkConfig, IkSolution};
pub use seeds::{linear_seed, resample_polyline, retract_seed, SeedMode};
pub use timing::{finalize_timing, interpolate, limit_ratios, retime, retime_scale, LimitRatios, Trajectory};

/// Solver settings for one optimization round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseConfig {
    pub particle: ParticleConfig,
    pub lbfgs: LbfgsConfig,
    pub jerk: bool,
    /// Multiplies both pose weights for this round.
    pub pose_weight_scale: f64,
}

impl Default for PhaseConfig {
    fn default() -> Self {
        Self {
            particle: ParticleConfig { n_particles: 24, init_variance_fraction: 0.01, ..ParticleConfig::default() },
            lbfgs: LbfgsConfig { history: 6, iterations: 100, ..LbfgsConfig::default() },
            jerk: true,
            pose_weight_scale: 1.0,
        }
    }
}

/// Weights of the blended score used to pick the final trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectWeights {
    pub pose_error: f64,
    pub max_jerk: f64,
    pub motion_time: f64,
}

impl Default for SelectWeights {
    fn default() -> Self {
        Self { pose_error: 100.0, max_jerk: 0.01, motion_time: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MotionGenConfig {
    pub ik: IkConfig,
    pub to_seeds: usize,
    pub horizon: usize,
    pub interpolation_dt: f64,
    pub dt_init: f64,
    /// Failed attempts with linear or retract seeds before planner seeds are used.
    pub retries: usize,
    pub first_pass: PhaseConfig,
    pub second_pass: PhaseConfig,
    /// Multiplier on the retimed step for the second round. Room below the
    /// limits lets the smoother second-round profile fit; the final retime
    /// pushes the result back to the limits.
    pub second_pass_dt_scale: f64,
    pub weights: CostWeights,
    pub dt_scaling: DtScaling,
    pub sweep_steps: usize,
    pub planner: PlannerConfig,
    pub use_planner: bool,
    pub select: SelectWeights,
    pub position_threshold: f64,
    pub rotation_threshold: f64,
    pub seed: u64,
}

impl Default for MotionGenConfig {
    fn default() -> Self {
        Self {
            ik: IkConfig::default(),
            to_seeds: 12,
            horizon: 32,
            interpolation_dt: 0.025,
            dt_init: 0.25,
            retries: 3,
            first_pass: PhaseConfig { jerk: false, ..PhaseConfig::default() },
            second_pass: PhaseConfig {
                lbfgs: LbfgsConfig {
                    history: 6,
                    iterations: 300,
                    early_exit: Some(EarlyExit { window: 10, tolerance: 1e-8 }),
                    ..LbfgsConfig::default()
                },
                pose_weight_scale: 30.0,
                ..PhaseConfig::default()
            },
            second_pass_dt_scale: 1.25,
            weights: CostWeights::default(),
            dt_scaling: DtScaling::default(),
            sweep_steps: 4,
            planner: PlannerConfig::default(),
            use_planner: true,
            select: SelectWeights::default(),
            position_threshold: 0.005,
            rotation_threshold: 0.05,
            seed: 0,
        }
    }
}

impl MotionGenConfig {
    pub fn validate(&self, robot: &RobotModel) -> Result<()> {
        if self.to_seeds == 0 || self.ik.n_seeds == 0 {
            return Err(Error::Invalid("seed counts must be at least 1".into()));
        }
        if self.horizon < crate::rollout::MIN_HORIZON {
            return Err(Error::Invalid(format!("horizon must be at least {}", crate::rollout::MIN_HORIZON)));
        }
        for (name, v) in [
            ("interpolation_dt", self.interpolation_dt),
            ("dt_init", self.dt_init),
            ("second_pass_dt_scale", self.second_pass_dt_scale),
            ("first_pass.pose_weight_scale", self.first_pass.pose_weight_scale),
            ("second_pass.pose_weight_scale", self.second_pass.pose_weight_scale),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Invalid(format!("{name} must be positive")));
            }
        }
        self.weights.validate()?;
        self.first_pass.lbfgs.line_search.validate()?;
        self.second_pass.lbfgs.line_search.validate()?;
        self.planner.validate(robot.dof)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    InvalidStart,
    NoIk,
    OptimizationFailed,
    PlannerFailed,
}

impl FailureReason {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureReason::InvalidStart => "invalid_start",
            FailureReason::NoIk => "no_ik",
            FailureReason::OptimizationFailed => "optimization_failed",
            FailureReason::PlannerFailed => "planner_failed",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MotionMetrics {
    pub position_error: f64,
    pub orientation_error: f64,
    pub motion_time: f64,
    pub max_jerk: f64,
    pub max_accel: f64,
    pub mean_velocity: f64,
    pub path_length: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub ik_solutions: usize,
    pub attempts: usize,
    pub seeds_attempted: usize,
    pub used_planner: bool,
    /// Planner seeds that fell back to straight lines.
    pub planner_fallbacks: usize,
    /// Seeds that passed the coarse check after the first round.
    pub first_pass_feasible: usize,
    /// Seeds that passed every check after the second round.
    pub second_pass_feasible: usize,
    /// Second-round trajectories rejected, by the first check they failed.
    pub rejections: BTreeMap<String, usize>,
    /// Step of the optimized knot trajectory after the first retime.
    pub dt_optimized: Option<f64>,
    /// Knot trajectory of the selected solution, before interpolation.
    pub knots: Option<Trajectory>,
    /// Seconds per pipeline phase.
    pub phase_timings: BTreeMap<String, f64>,
    pub message: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotionResult {
    pub success: bool,
    pub failure_reason: Option<FailureReason>,
    /// Final trajectory at interpolation resolution.
    pub trajectory: Option<Trajectory>,
    pub dt_final: f64,
    pub metrics: Option<MotionMetrics>,
    pub diagnostics: Diagnostics,
}

impl MotionResult {
    fn failure(reason: FailureReason, message: impl Into<String>, diagnostics: Diagnostics) -> Self {
        Self {
            success: false,
            failure_reason: Some(reason),
            trajectory: None,
            dt_final: 0.0,
            metrics: None,
            diagnostics: Diagnostics { message: Some(message.into()), ..diagnostics },
        }
    }
}

/// Optimizer output for one seed as a full `T×D` trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimizedSeed {
    pub positions: Vec<f64>,
    pub cost: f64,
}

/// Particle warm-up followed by L-BFGS on every seed of a `K×T×D` batch.
pub fn optimize_trajectory(problem: &RolloutProblem, seeds: &[f64], phase: &PhaseConfig, seed: u64) -> Vec<OptimizedSeed> {
    let (t, d) = (problem.horizon, problem.robot.dof);
    let free: Vec<f64> = seeds.chunks(t * d).flat_map(|s| problem.contract(s)).collect();
    let obj = TrajectoryObjective::new(problem.clone());
    let particle = ParticleConfig { seed, ..phase.particle.clone() };
    let warm = if particle.n_iterations > 0 {
        particle_solve(&obj, &free, &initial_variance(&obj, &particle), &particle)
    } else {
        free
    };
    let res = lbfgs_solve(&obj, &warm, &phase.lbfgs);
    res.best_x
        .chunks(problem.free_dim())
        .zip(&res.best_cost)
        .map(|(x, &cost)| OptimizedSeed { positions: problem.expand(x), cost })
        .collect()
}

/// One candidate for [`select_best`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Candidate {
    pub pose_error: f64,
    pub max_jerk: f64,
    pub motion_time: f64,
}

/// Index of the lowest blended score; the earliest index wins ties.
pub fn select_best(candidates: &[Candidate], w: &SelectWeights) -> Result<usize> {
    let score = |c: &Candidate| w.pose_error * c.pose_error + w.max_jerk * c.max_jerk + w.motion_time * c.motion_time;
    candidates
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, f64)>, (i, c)| {
            let s = score(c);
            match best {
                Some((_, b)) if b <= s => best,
                _ => Some((i, s)),
            }
        })
        .map(|(i, _)| i)
        .ok_or_else(|| Error::Invalid("no candidates to select from".into()))
}

/// Feasibility of a knot trajectory at the first-round step: goal reached,
/// within position limits, and collision-free when interpolated.
fn coarse_feasible(
    checker: &ValidityChecker,
    goal: &Pose,
    traj: &Trajectory,
    config: &MotionGenConfig,
) -> bool {
    let robot = checker.robot;
    let (pe, re) = pose_errors(robot, traj.row(traj.rows() - 1), goal);
    if !(pe < config.position_threshold && re <= config.rotation_threshold) {
        return false;
    }
    match interpolate(traj, config.interpolation_dt) {
        Ok(fine) => fine.positions.chunks(robot.dof).all(|q| checker.is_valid(q)),
        Err(_) => false,
    }
}

struct Finished {
    fine: Trajectory,
    knots: Trajectory,
    metrics: MotionMetrics,
}

/// Retimes, interpolates and checks a knot trajectory. The error names the
/// first failed check.
fn finish(
    checker: &ValidityChecker,
    goal: &Pose,
    knots: Trajectory,
    config: &MotionGenConfig,
) -> std::result::Result<Finished, &'static str> {
    let robot = checker.robot;
    let fine = finalize_timing(&knots, robot, config.interpolation_dt).map_err(|_| "retiming")?;
    let der = fine.derivatives().map_err(|_| "retiming")?;
    if limit_ratios(&der, robot).max() > 1.0 {
        return Err("limits");
    }
    let last = (fine.rows() - 1) * robot.dof;
    let rest = (0..robot.dof)
        .map(|k| der.vel[last + k].abs().max(der.acc[last + k].abs()).max(der.jerk[last + k].abs()))
        .fold(0.0, f64::max);
    if rest > 1e-6 {
        return Err("rest");
    }
    let (pe, re) = pose_errors(robot, fine.row(fine.rows() - 1), goal);
    if !(pe < config.position_threshold && re <= config.rotation_threshold) {
        return Err("pose");
    }
    if !fine.positions.chunks(robot.dof).all(|q| checker.is_valid(q)) {
        return Err("collision");
    }
    let max_abs = |v: &[f64]| v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let rows = fine.rows();
    let d = robot.dof as f64;
    let metrics = MotionMetrics {
        position_error: pe,
        orientation_error: re,
        motion_time: fine.duration(),
        max_jerk: max_abs(&der.jerk),
        max_accel: max_abs(&der.acc),
        mean_velocity: der.vel.chunks(robot.dof).map(|v| v.iter().map(|x| x.abs()).sum::<f64>() / d).sum::<f64>()
            / rows as f64,
        path_length: fine
            .positions
            .chunks(robot.dof)
            .collect::<Vec<_>>()
            .windows(2)
            .map(|w| w[0].iter().zip(w[1]).map(|(a, b)| (b - a).abs()).sum::<f64>())
            .sum(),
    };
    Ok(Finished { fine, knots, metrics })
}

fn attempt_seed(config: &MotionGenConfig, attempt: usize) -> u64 {
    config.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(attempt as u64 + 1)
}

/// Plans a trajectory from `start` to an end-effector `goal`.
pub fn plan_motion(
    robot: &RobotModel,
    world: &WorldModel,
    start: &[f64],
    goal: &Pose,
    config: &MotionGenConfig,
) -> Result<MotionResult> {
    config.validate(robot)?;
    if start.len() != robot.dof {
        return Err(Error::ShapeMismatch { expected: robot.dof, actual: start.len() });
    }
    let mut diag = Diagnostics::default();
    let mut clock = Instant::now();
    let mut lap = |name: &str, diag: &mut Diagnostics| {
        *diag.phase_timings.entry(name.to_string()).or_insert(0.0) += clock.elapsed().as_secs_f64();
        clock = Instant::now();
    };
    let checker = ValidityChecker::new(robot, world, 0.0);
    if !checker.is_valid(start) {
        let why = if robot.within_position_limits(start) {
            "start configuration is in collision"
        } else {
            "start configuration is outside the position limits"
        };
        return Ok(MotionResult::failure(FailureReason::InvalidStart, why, diag));
    }
    if !goal.is_finite() {
        return Err(Error::NonFinite);
    }

    let ik_cfg = IkConfig { seed: config.seed ^ config.ik.seed, ..config.ik.clone() };
    let ik = solve_ik(robot, world, goal, &config.weights, Some(start), &ik_cfg);
    lap("ik", &mut diag);
    diag.ik_solutions = ik.len();
    if ik.is_empty() {
        return Ok(MotionResult::failure(FailureReason::NoIk, "no collision-free IK solution", diag));
    }

    let (t, d) = (config.horizon, robot.dof);
    let k = config.to_seeds;
    let attempts = if config.use_planner { config.retries + 1 } else { config.retries.max(1) };
    let mut planner_failed = false;
    for attempt in 0..attempts {
        diag.attempts = attempt + 1;
        let mode = if config.use_planner && attempt == config.retries {
            SeedMode::GraphPlan
        } else if attempt % 2 == 0 {
            SeedMode::Linear
        } else {
            SeedMode::Retract
        };
        let targets: Vec<&IkSolution> = (0..k).map(|i| &ik[(i + attempt) % ik.len()]).collect();
        let mut seeds = Vec::with_capacity(k * t * d);
        match mode {
            SeedMode::Linear => targets.iter().for_each(|s| seeds.extend(linear_seed(start, &s.q, t))),
            SeedMode::Retract => targets
                .iter()
                .for_each(|s| seeds.extend(retract_seed(start, &robot.retract_config, &s.q, t))),
            SeedMode::GraphPlan => {
                diag.used_planner = true;
                let distinct: Vec<&IkSolution> = ik.iter().take(k).collect();
                let mut pc = config.planner.clone();
                pc.seed ^= attempt_seed(config, attempt);
                // The best goal gets a query of its own so that extra seeds
                // never dilute its budget; the rest share a second one.
                let mut outcomes = Planner::new(robot, world, pc.clone())?.plan(start, &distinct[0].q)?;
                if distinct.len() > 1 {
                    let goals: Vec<f64> = distinct[1..].iter().flat_map(|s| s.q.clone()).collect();
                    let starts: Vec<f64> = start.repeat(distinct.len() - 1);
                    outcomes.extend(Planner::new(robot, world, pc)?.plan(&starts, &goals)?);
                }
                lap("planner", &mut diag);
                let found: Vec<&PlanOutcome> = outcomes.iter().filter(|o| o.found).collect();
                planner_failed = found.is_empty();
                for i in 0..k {
                    let o = &outcomes[i % outcomes.len()];
                    if o.found {
                        seeds.extend(resample_polyline(&o.path, t));
                    } else if !found.is_empty() {
                        seeds.extend(resample_polyline(&found[i % found.len()].path, t));
                    } else {
                        diag.planner_fallbacks += 1;
                        seeds.extend(linear_seed(start, &distinct[i % distinct.len()].q, t));
                    }
                }
            }
        }
        diag.seeds_attempted += k;
        if let Some((best, dt_opt)) = run_passes(robot, world, &checker, start, goal, &seeds, config, attempt, &mut diag) {
            lap("optimization_total", &mut diag);
            diag.dt_optimized = Some(dt_opt);
            let Finished { fine, knots, metrics } = best;
            diag.knots = Some(knots);
            return Ok(MotionResult {
                success: true,
                failure_reason: None,
                dt_final: fine.dt,
                trajectory: Some(fine),
                metrics: Some(metrics),
                diagnostics: diag,
            });
        }
        lap("optimization_total", &mut diag);
    }
    let reason = if planner_failed { FailureReason::PlannerFailed } else { FailureReason::OptimizationFailed };
    let msg = match reason {
        FailureReason::PlannerFailed => "optimization failed and the geometric planner found no path",
        _ => "no seed produced a feasible trajectory",
    };
    Ok(MotionResult::failure(reason, msg, diag))
}

#[allow(clippy::too_many_arguments)]
fn run_passes(
    robot: &RobotModel,
    world: &WorldModel,
    checker: &ValidityChecker,
    start: &[f64],
    goal: &Pose,
    seeds: &[f64],
    config: &MotionGenConfig,
    attempt: usize,
    diag: &mut Diagnostics,
) -> Option<(Finished, f64)> {
    let (t, d) = (config.horizon, robot.dof);
    let problem = |dt: f64, phase: &PhaseConfig| {
        let mut weights = config.weights.scaled_for_dt(dt, &config.dt_scaling);
        weights.pose_pos *= phase.pose_weight_scale;
        weights.pose_rot *= phase.pose_weight_scale;
        RolloutProblem {
            robot,
            world,
            start: start.to_vec(),
            goal: Goal::Pose(goal.clone()),
            weights,
            dt,
            horizon: t,
            jerk_enabled: phase.jerk,
            sweep_steps: config.sweep_steps,
        }
    };
    let seed = attempt_seed(config, attempt);

    let clock = Instant::now();
    let p1 = problem(config.dt_init, &config.first_pass);
    let first = optimize_trajectory(&p1, seeds, &config.first_pass, seed);
    let mut feasible: Vec<(Trajectory, f64)> = first
        .into_iter()
        .filter_map(|s| {
            let traj = Trajectory::new(d, config.dt_init, s.positions).ok()?;
            coarse_feasible(checker, goal, &traj, config).then_some((traj, s.cost))
        })
        .collect();
    *diag.phase_timings.entry("first_pass".into()).or_insert(0.0) += clock.elapsed().as_secs_f64();
    if feasible.is_empty() {
        return None;
    }
    diag.first_pass_feasible += feasible.len();
    feasible.sort_by(|a, b| a.1.total_cmp(&b.1));
    // A nearly stationary best seed retimes to almost nothing; knots finer
    // than the output grid only amplify rounding in the stencils.
    let dt_opt = (retime(&feasible[0].0, robot).ok()? * config.second_pass_dt_scale).max(config.interpolation_dt);

    let clock = Instant::now();
    let p2 = problem(dt_opt, &config.second_pass);
    let seeds2: Vec<f64> = feasible.iter().flat_map(|(tr, _)| tr.positions.clone()).collect();
    let second = optimize_trajectory(&p2, &seeds2, &config.second_pass, seed ^ 0x5eed);
    *diag.phase_timings.entry("second_pass".into()).or_insert(0.0) += clock.elapsed().as_secs_f64();

    let mut finished = Vec::new();
    for s in second {
        let knots = Trajectory::new(d, dt_opt, s.positions).ok()?;
        match finish(checker, goal, knots, config) {
            Ok(f) => finished.push(f),
            Err(why) => *diag.rejections.entry(why.to_string()).or_insert(0) += 1,
        }
    }
    diag.second_pass_feasible += finished.len();
    if finished.is_empty() {
        // Fall back to the first-round trajectories.
        finished = feasible.into_iter().filter_map(|(tr, _)| finish(checker, goal, tr, config).ok()).collect();
    }
    let cands: Vec<Candidate> = finished
        .iter()
        .map(|f| Candidate {
            pose_error: f.metrics.position_error + f.metrics.orientation_error,
            max_jerk: f.metrics.max_jerk,
            motion_time: f.metrics.motion_time,
        })
        .collect();
    let i = select_best(&cands, &config.select).ok()?;
    Some((finished.swap_remove(i), dt_opt))
}
