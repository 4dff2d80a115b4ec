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
//! Problem and result documents, and the benchmark runner behind the
//! `bench` subcommand.
//!
//! A benchmark writes three files: `metrics.csv` with one row per problem,
//! `summary.json` with aggregates over the successful rows, and
//! `timing.csv` with wall-clock compute times. The first two are
//! byte-identical across runs with the same seed.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::assets;
use crate::error::{Error, Result};
use crate::geometry::Pose;
use crate::metrics::{evaluate_trajectory, MetricRow, Thresholds};
use crate::motion::{plan_motion, solve_ik, FailureReason, IkConfig, MotionGenConfig, MotionMetrics, MotionResult};
use crate::planner::Planner;
use crate::robot::RobotModel;
use crate::world::WorldModel;

pub const SCHEMA_VERSION: u32 = 1;

fn check_schema(found: u32) -> Result<()> {
    if found != SCHEMA_VERSION {
        return Err(Error::Invalid(format!("unsupported schema_version {found}, expected {SCHEMA_VERSION}")));
    }
    Ok(())
}

fn current_schema() -> u32 {
    SCHEMA_VERSION
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemEntry {
    pub id: String,
    pub scene: String,
    pub start_q: Vec<f64>,
    /// `[x, y, z, qw, qx, qy, qz]`.
    pub goal_pose: [f64; 7],
    /// A collision-free configuration reaching the goal, when one is known.
    /// The pipeline never reads it; only feasibility checks do.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness_q: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSet {
    #[serde(default = "current_schema")]
    pub schema_version: u32,
    pub robot: String,
    pub problems: Vec<ProblemEntry>,
}

impl ProblemSet {
    pub fn from_json(text: &str) -> Result<Self> {
        let set: ProblemSet = serde_json::from_str(text)?;
        check_schema(set.schema_version)?;
        let mut ids = HashSet::new();
        for p in &set.problems {
            if !ids.insert(p.id.as_str()) {
                return Err(Error::Invalid(format!("duplicate problem id `{}`", p.id)));
            }
        }
        Ok(set)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem sets serialize")
    }

    /// Loads robot and scenes through `load`, which maps a reference to a
    /// document's text. Each scene is parsed once.
    pub fn resolve(&self, load: &dyn Fn(&str) -> Result<String>) -> Result<ResolvedSet> {
        let robot = RobotModel::from_json(&load(&self.robot)?)?;
        let mut scenes: HashMap<&str, Arc<WorldModel>> = HashMap::new();
        let mut problems = Vec::with_capacity(self.problems.len());
        for p in &self.problems {
            let world = match scenes.get(p.scene.as_str()) {
                Some(w) => w.clone(),
                None => {
                    let w = Arc::new(WorldModel::from_json(&load(&p.scene)?)?);
                    scenes.insert(&p.scene, w.clone());
                    w
                }
            };
            if p.start_q.len() != robot.dof {
                return Err(Error::ShapeMismatch { expected: robot.dof, actual: p.start_q.len() });
            }
            problems.push(ResolvedProblem {
                id: p.id.clone(),
                world,
                start: p.start_q.clone(),
                goal: pose_from_array(p.goal_pose)?,
                witness: p.witness_q.clone(),
            });
        }
        problems.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(ResolvedSet { robot, problems })
    }

    /// Resolves references as paths relative to `base`.
    pub fn resolve_files(&self, base: &Path) -> Result<ResolvedSet> {
        self.resolve(&|r| read_ref(base, r))
    }
}

fn read_ref(base: &Path, reference: &str) -> Result<String> {
    let path = base.join(reference);
    std::fs::read_to_string(&path)
        .map_err(|e| Error::Invalid(format!("cannot read `{}`: {e}", path.display())))
}

fn pose_from_array(v: [f64; 7]) -> Result<Pose> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let n = v[3..].iter().map(|x| x * x).sum::<f64>().sqrt();
    if (n - 1.0).abs() > 1e-6 {
        return Err(Error::Invalid("goal quaternion is not unit length".into()));
    }
    Ok(Pose::from_array(v))
}

/// Reads a problem set and resolves it against its own directory.
pub fn load_problem_set(path: &Path) -> Result<ResolvedSet> {
    let set = ProblemSet::from_json(&std::fs::read_to_string(path)?)?;
    set.resolve_files(path.parent().unwrap_or(Path::new(".")))
}

pub const SUITE_JSON: &str = include_str!("../assets/problems/suite.json");

/// The bundled 20-problem suite over the tabletop, shelf and wall-gap scenes.
pub fn bundled_suite() -> ResolvedSet {
    ProblemSet::from_json(SUITE_JSON)
        .and_then(|s| s.resolve(&bundled_ref))
        .expect("bundled suite is valid")
}

/// Maps a relative document path onto the bundled asset with the same stem.
pub fn bundled_ref(reference: &str) -> Result<String> {
    let stem = Path::new(reference).file_stem().and_then(|s| s.to_str()).unwrap_or_default();
    if stem == "franka" {
        return Ok(assets::FRANKA_JSON.to_string());
    }
    assets::scene(stem)
        .map(|w| serde_json::to_string(&w.to_document()).expect("scenes serialize"))
        .ok_or_else(|| Error::Invalid(format!("no bundled document for `{reference}`")))
}

#[derive(Clone, Debug)]
pub struct ResolvedProblem {
    pub id: String,
    pub world: Arc<WorldModel>,
    pub start: Vec<f64>,
    pub goal: Pose,
    pub witness: Option<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct ResolvedSet {
    pub robot: RobotModel,
    /// Sorted by id.
    pub problems: Vec<ResolvedProblem>,
}

/// A single planning request.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDocument {
    #[serde(default = "current_schema")]
    pub schema_version: u32,
    pub robot_config: String,
    pub scene: String,
    pub start_q: Vec<f64>,
    pub goal_pose: [f64; 7],
    /// Partial configuration merged over the defaults.
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub overrides: Value,
}

impl ProblemDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ProblemDocument = serde_json::from_str(text)?;
        check_schema(doc.schema_version)?;
        Ok(doc)
    }

    /// Robot, scene, start and goal, with references relative to `base`.
    pub fn resolve(&self, base: &Path) -> Result<(RobotModel, WorldModel, Vec<f64>, Pose)> {
        let robot = RobotModel::from_json(&read_ref(base, &self.robot_config)?)?;
        let world = WorldModel::from_json(&read_ref(base, &self.scene)?)?;
        if self.start_q.len() != robot.dof {
            return Err(Error::ShapeMismatch { expected: robot.dof, actual: self.start_q.len() });
        }
        Ok((robot, world, self.start_q.clone(), pose_from_array(self.goal_pose)?))
    }
}

/// Recursively merges `patch` into `base`; objects merge key by key and
/// every other value replaces.
pub fn merge_json(base: &mut Value, patch: &Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                merge_json(b.entry(k.clone()).or_insert(Value::Null), v);
            }
        }
        (b, p) => *b = p.clone(),
    }
}

/// `config` with a partial JSON configuration merged over it.
pub fn apply_overrides(config: &MotionGenConfig, patch: &Value) -> Result<MotionGenConfig> {
    if patch.is_null() {
        return Ok(config.clone());
    }
    let mut v = serde_json::to_value(config)?;
    merge_json(&mut v, patch);
    Ok(serde_json::from_value(v)?)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultDiagnostics {
    pub ik_solutions: usize,
    pub attempts: usize,
    pub seeds_attempted: usize,
    pub used_planner: bool,
    pub planner_fallbacks: usize,
    pub dt_optimized: Option<f64>,
    pub phase_timings: BTreeMap<String, f64>,
    pub message: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultDocument {
    pub schema_version: u32,
    pub success: bool,
    pub failure_reason: Option<FailureReason>,
    pub dt_final: f64,
    pub positions: Vec<Vec<f64>>,
    pub metrics: Option<MotionMetrics>,
    pub diagnostics: ResultDiagnostics,
}

impl ResultDocument {
    pub fn from_result(r: &MotionResult) -> Self {
        let d = &r.diagnostics;
        Self {
            schema_version: SCHEMA_VERSION,
            success: r.success,
            failure_reason: r.failure_reason,
            dt_final: r.dt_final,
            positions: r.trajectory.as_ref().map(|t| t.to_rows()).unwrap_or_default(),
            metrics: r.metrics.clone(),
            diagnostics: ResultDiagnostics {
                ik_solutions: d.ik_solutions,
                attempts: d.attempts,
                seeds_attempted: d.seeds_attempted,
                used_planner: d.used_planner,
                planner_fallbacks: d.planner_fallbacks,
                dt_optimized: d.dt_optimized,
                phase_timings: d.phase_timings.clone(),
                message: d.message.clone(),
            },
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ResultDocument = serde_json::from_str(text)?;
        check_schema(doc.schema_version)?;
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result documents serialize")
    }
}

/// Which part of the pipeline a benchmark exercises.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    #[default]
    Full,
    /// Collision-free IK only.
    Ik,
    /// IK followed by the geometric planner, without optimization.
    Plan,
    /// The full pipeline with the geometric-planner fallback disabled.
    Opt,
}

impl Stage {
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            Stage::Ik => &["id", "success", "position_error", "orientation_error", "error"],
            Stage::Plan => &["id", "success", "c_space_path_length", "error"],
            Stage::Full | Stage::Opt => &[
                "id",
                "success",
                "c_space_path_length",
                "motion_time",
                "max_jerk",
                "max_accel",
                "mean_velocity",
                "position_error",
                "orientation_error",
                "error",
            ],
        }
    }

    fn metric_columns(self) -> impl Iterator<Item = &'static str> {
        self.columns().iter().copied().filter(|c| !matches!(*c, "id" | "success" | "error"))
    }
}

impl std::str::FromStr for Stage {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Stage::Full),
            "ik" => Ok(Stage::Ik),
            "plan" => Ok(Stage::Plan),
            "opt" => Ok(Stage::Opt),
            _ => Err(Error::Invalid(format!("unknown stage `{s}`"))),
        }
    }
}

/// One problem's outcome. `values` holds the stage's metric columns for a
/// successful row and is empty otherwise.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub id: String,
    pub success: bool,
    pub values: BTreeMap<&'static str, f64>,
    /// Failure reason or error text.
    pub error: Option<String>,
    pub compute_time: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: f64,
    pub p75: f64,
    pub p98: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema_version: u32,
    pub stage: Stage,
    pub problems: usize,
    pub successes: usize,
    /// Percentage, or the string "n/a" for an empty set.
    pub success_percent: Value,
    pub metrics: BTreeMap<String, Aggregate>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport {
    pub stage: Stage,
    /// Ordered by problem id.
    pub rows: Vec<BenchRow>,
    pub summary: Summary,
}

/// Nearest-rank percentile of ascending `sorted`; `None` when empty.
pub fn nearest_rank(sorted: &[f64], percent: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let rank = ((percent / 100.0) * sorted.len() as f64).ceil() as usize;
    Some(sorted[rank.clamp(1, sorted.len()) - 1])
}

/// Aggregates over the successful rows.
pub fn summarize(stage: Stage, rows: &[BenchRow]) -> Summary {
    let successes = rows.iter().filter(|r| r.success).count();
    let success_percent = if rows.is_empty() {
        Value::String("n/a".into())
    } else {
        serde_json::json!(100.0 * successes as f64 / rows.len() as f64)
    };
    let mut metrics = BTreeMap::new();
    for col in stage.metric_columns() {
        let mut v: Vec<f64> = rows.iter().filter(|r| r.success).filter_map(|r| r.values.get(col).copied()).collect();
        if v.is_empty() {
            continue;
        }
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        v.sort_by(f64::total_cmp);
        metrics.insert(
            col.to_string(),
            Aggregate { mean, p75: nearest_rank(&v, 75.0).unwrap(), p98: nearest_rank(&v, 98.0).unwrap() },
        );
    }
    Summary { schema_version: SCHEMA_VERSION, stage, problems: rows.len(), successes, success_percent, metrics }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn metrics_csv(stage: Stage, rows: &[BenchRow]) -> String {
    let mut out = stage.columns().join(",");
    out.push('\n');
    for r in rows {
        let cells: Vec<String> = stage
            .columns()
            .iter()
            .map(|c| match *c {
                "id" => csv_field(&r.id),
                "success" => r.success.to_string(),
                "error" => r.error.as_deref().map(csv_field).unwrap_or_default(),
                col => r.values.get(col).map(|v| v.to_string()).unwrap_or_default(),
            })
            .collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

pub fn timing_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("id,compute_time\n");
    for r in rows {
        let _ = writeln!(out, "{},{}", csv_field(&r.id), r.compute_time);
    }
    out
}

fn metric_values(m: &MetricRow) -> BTreeMap<&'static str, f64> {
    BTreeMap::from([
        ("c_space_path_length", m.c_space_path_length),
        ("motion_time", m.motion_time),
        ("max_jerk", m.max_jerk),
        ("max_accel", m.max_accel),
        ("mean_velocity", m.mean_velocity),
        ("position_error", m.position_error),
        ("orientation_error", m.orientation_error),
    ])
}

/// Runs one problem at the given stage. Compute time covers the solve only.
pub fn run_problem(robot: &RobotModel, p: &ResolvedProblem, config: &MotionGenConfig, stage: Stage) -> BenchRow {
    let thresholds = Thresholds {
        position: config.position_threshold,
        orientation: config.rotation_threshold,
        ..Thresholds::default()
    };
    let mut row = BenchRow { id: p.id.clone(), success: false, values: BTreeMap::new(), error: None, compute_time: 0.0 };
    let clock = Instant::now();
    match stage {
        Stage::Ik => {
            let ik_cfg = IkConfig { seed: config.seed ^ config.ik.seed, ..config.ik.clone() };
            let sols = solve_ik(robot, &p.world, &p.goal, &config.weights, Some(&p.start), &ik_cfg);
            row.compute_time = clock.elapsed().as_secs_f64();
            match sols.first() {
                Some(s) => {
                    row.success = true;
                    row.values = BTreeMap::from([
                        ("position_error", s.position_error),
                        ("orientation_error", s.rotation_error),
                    ]);
                }
                None => row.error = Some(FailureReason::NoIk.as_str().into()),
            }
        }
        Stage::Plan => {
            let ik_cfg = IkConfig { seed: config.seed ^ config.ik.seed, ..config.ik.clone() };
            let sols = solve_ik(robot, &p.world, &p.goal, &config.weights, Some(&p.start), &ik_cfg);
            if sols.is_empty() {
                row.compute_time = clock.elapsed().as_secs_f64();
                row.error = Some(FailureReason::NoIk.as_str().into());
                return row;
            }
            let goals: Vec<f64> = sols.iter().take(config.to_seeds).flat_map(|s| s.q.clone()).collect();
            let starts = p.start.repeat(goals.len() / robot.dof);
            let mut pc = config.planner.clone();
            pc.seed ^= config.seed;
            let outcome = Planner::new(robot, &p.world, pc).and_then(|mut pl| pl.plan(&starts, &goals));
            row.compute_time = clock.elapsed().as_secs_f64();
            match outcome {
                Ok(o) => match o.iter().filter(|o| o.found).min_by(|a, b| a.length.total_cmp(&b.length)) {
                    Some(best) => {
                        row.success = true;
                        let l1: f64 = best
                            .path
                            .windows(2)
                            .map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| (b - a).abs()).sum::<f64>())
                            .sum();
                        row.values = BTreeMap::from([("c_space_path_length", l1)]);
                    }
                    None => row.error = Some(FailureReason::PlannerFailed.as_str().into()),
                },
                Err(e) => row.error = Some(e.to_string()),
            }
        }
        Stage::Full | Stage::Opt => {
            let cfg = if stage == Stage::Opt {
                MotionGenConfig { use_planner: false, ..config.clone() }
            } else {
                config.clone()
            };
            let res = plan_motion(robot, &p.world, &p.start, &p.goal, &cfg);
            row.compute_time = clock.elapsed().as_secs_f64();
            match res {
                Ok(r) => match (&r.trajectory, r.failure_reason) {
                    (Some(traj), _) if r.success => {
                        let m = evaluate_trajectory(robot, &p.world, &p.goal, &traj.to_rows(), traj.dt, &thresholds);
                        row.success = m.success;
                        if m.success {
                            row.values = metric_values(&m);
                        } else {
                            row.error = Some("rejected by the independent validator".into());
                        }
                    }
                    (_, reason) => {
                        row.error = Some(reason.map_or("optimization_failed", FailureReason::as_str).into())
                    }
                },
                Err(e) => row.error = Some(e.to_string()),
            }
        }
    }
    row
}

/// Runs every problem with at most `jobs` running at once and writes the
/// report files into `out_dir` when one is given.
pub fn run_benchmark(
    set: &ResolvedSet,
    config: &MotionGenConfig,
    stage: Stage,
    jobs: usize,
    out_dir: Option<&Path>,
) -> Result<MetricsReport> {
    config.validate(&set.robot)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Invalid(e.to_string()))?;
    let rows: Vec<BenchRow> =
        pool.install(|| set.problems.par_iter().map(|p| run_problem(&set.robot, p, config, stage)).collect());
    let summary = summarize(stage, &rows);
    let report = MetricsReport { stage, rows, summary };
    if let Some(dir) = out_dir {
        write_report(&report, dir)?;
    }
    Ok(report)
}

pub fn write_report(report: &MetricsReport, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let files = [
        ("metrics.csv", metrics_csv(report.stage, &report.rows)),
        ("summary.json", serde_json::to_string_pretty(&report.summary)? + "\n"),
        ("timing.csv", timing_csv(&report.rows)),
    ];
    let mut out = Vec::new();
    for (name, text) in files {
        let path = dir.join(name);
        std::fs::write(&path, text)?;
        out.push(path);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(id: &str, success: bool, jerk: f64) -> BenchRow {
        BenchRow {
            id: id.into(),
            success,
            values: if success { BTreeMap::from([("max_jerk", jerk)]) } else { BTreeMap::new() },
            error: None,
            compute_time: 0.0,
        }
    }

    #[test]
    fn nearest_rank_percentiles() {
        let v: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(nearest_rank(&v, 75.0), Some(8.0));
        assert_eq!(nearest_rank(&v, 98.0), Some(10.0));
        assert_eq!(nearest_rank(&v, 0.0), Some(1.0));
        assert_eq!(nearest_rank(&[3.0], 50.0), Some(3.0));
        assert_eq!(nearest_rank(&[], 50.0), None);
    }

    #[test]
    fn empty_set_reports_na() {
        let s = summarize(Stage::Full, &[]);
        assert_eq!(s.success_percent, Value::String("n/a".into()));
        assert!(s.metrics.is_empty());
        assert_eq!(metrics_csv(Stage::Full, &[]).lines().count(), 1);
    }

    #[test]
    fn aggregates_cover_only_successes() {
        let rows = [row("a", true, 1.0), row("b", false, 0.0), row("c", true, 3.0)];
        let s = summarize(Stage::Full, &rows);
        assert_eq!(s.successes, 2);
        assert_eq!(s.success_percent, serde_json::json!(200.0 / 3.0));
        let j = s.metrics["max_jerk"];
        assert_eq!((j.mean, j.p75, j.p98), (2.0, 3.0, 3.0));
    }

    #[test]
    fn csv_quotes_awkward_fields() {
        let mut r = row("x", false, 0.0);
        r.error = Some("bad, \"really\"".into());
        let text = metrics_csv(Stage::Ik, &[r]);
        assert_eq!(text.lines().nth(1), Some("x,false,,,\"bad, \"\"really\"\"\""));
    }

    #[test]
    fn overrides_merge_nested_fields() {
        let base = MotionGenConfig::default();
        let patch = serde_json::json!({"to_seeds": 3, "ik": {"n_seeds": 5}});
        let c = apply_overrides(&base, &patch).unwrap();
        assert_eq!((c.to_seeds, c.ik.n_seeds), (3, 5));
        assert_eq!(c.ik.lbfgs, base.ik.lbfgs);
        assert!(apply_overrides(&base, &serde_json::json!({"nope": 1})).is_err());
    }

    #[test]
    fn problem_sets_reject_duplicates_and_bad_versions() {
        let entry = r#"{"id": "a", "scene": "s.json", "start_q": [0], "goal_pose": [0,0,0,1,0,0,0]}"#;
        let dup = format!(r#"{{"robot": "r.json", "problems": [{entry}, {entry}]}}"#);
        assert!(ProblemSet::from_json(&dup).is_err());
        let old = format!(r#"{{"schema_version": 0, "robot": "r.json", "problems": [{entry}]}}"#);
        assert!(ProblemSet::from_json(&old).is_err());
        let ok = format!(r#"{{"robot": "r.json", "problems": [{entry}]}}"#);
        assert_eq!(ProblemSet::from_json(&ok).unwrap().problems.len(), 1);
    }

    #[test]
    fn bundled_suite_resolves() {
        let set = bundled_suite();
        assert_eq!(set.problems.len(), 20);
        assert!(set.problems.windows(2).all(|w| w[0].id < w[1].id));
    }

    #[test]
    fn result_documents_round_trip() {
        let doc = ResultDocument {
            schema_version: SCHEMA_VERSION,
            success: false,
            failure_reason: Some(FailureReason::NoIk),
            dt_final: 0.0123456789,
            positions: vec![vec![0.1, -0.2], vec![1.0 / 3.0, 2.0]],
            metrics: None,
            diagnostics: ResultDiagnostics {
                message: Some("m".into()),
                phase_timings: BTreeMap::from([("ik".into(), 0.1)]),
                ..Default::default()
            },
        };
        assert_eq!(ResultDocument::from_json(&doc.to_json()).unwrap(), doc);
    }
}
