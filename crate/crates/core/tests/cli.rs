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
//! Drives the `motiongen` binary end to end on small problem files.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use motiongen::assets::franka;
use motiongen::bench::{ProblemEntry, ProblemSet, ResultDocument, SUITE_JSON};
use motiongen::kinematics::ee_pose;
use serde_json::{json, Value};

fn asset(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("assets").join(rel)
}

fn motiongen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_motiongen")).args(args).output().expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

/// Ten tabletop problems: the suite's seven plus three whose goals are the
/// end-effector poses of other problems' (collision-free) starts.
fn tabletop_set() -> ProblemSet {
    let suite = ProblemSet::from_json(SUITE_JSON).unwrap();
    let scene = asset("scenes/tabletop_with_box.json").to_string_lossy().into_owned();
    let mut problems: Vec<ProblemEntry> = suite
        .problems
        .into_iter()
        .filter(|p| p.scene.contains("tabletop"))
        .map(|p| ProblemEntry { scene: scene.clone(), witness_q: None, ..p })
        .collect();
    assert_eq!(problems.len(), 7);
    let robot = franka();
    for i in 0..3 {
        let goal = ee_pose(&robot, &problems[(i + 1) % 7].start_q).to_array();
        problems.push(ProblemEntry {
            id: format!("tabletop_extra_{i}"),
            scene: scene.clone(),
            start_q: problems[i].start_q.clone(),
            goal_pose: goal,
            witness_q: None,
        });
    }
    ProblemSet { schema_version: 1, robot: asset("franka.json").to_string_lossy().into_owned(), problems }
}

fn problem_doc(dir: &Path, goal: [f64; 7]) -> PathBuf {
    let base: Value = serde_json::from_str(&std::fs::read_to_string(asset("problems/tabletop_plan.json")).unwrap()).unwrap();
    let doc = json!({
        "schema_version": 1,
        "robot_config": asset("franka.json"),
        "scene": asset("scenes/tabletop_with_box.json"),
        "start_q": base["start_q"],
        "goal_pose": goal,
    });
    let path = dir.join("problem.json");
    std::fs::write(&path, doc.to_string()).unwrap();
    path
}

#[test]
fn bench_writes_identical_reports_for_the_same_seed() {
    let dir = tempfile::tempdir().unwrap();
    let set = dir.path().join("problems.json");
    std::fs::write(&set, tabletop_set().to_json()).unwrap();
    let mut reports = Vec::new();
    for run in ["a", "b"] {
        let out_dir = dir.path().join(run);
        let out = motiongen(&["bench", "--set", path_str(&set), "--seed", "7", "--out", path_str(&out_dir)]);
        assert!(out.status.success(), "bench failed: {}", stderr(&out));
        for name in ["metrics.csv", "summary.json", "timing.csv"] {
            assert!(out_dir.join(name).is_file(), "missing {name}");
        }
        let metrics = std::fs::read(out_dir.join("metrics.csv")).unwrap();
        let summary = std::fs::read(out_dir.join("summary.json")).unwrap();
        reports.push((metrics, summary));
    }
    assert_eq!(reports[0].0, reports[1].0, "metrics.csv differs between runs");
    assert_eq!(reports[0].1, reports[1].1, "summary.json differs between runs");

    let csv = String::from_utf8(reports[0].0.clone()).unwrap();
    assert_eq!(csv.lines().count(), 11);
    let summary: Value = serde_json::from_slice(&reports[0].1).unwrap();
    assert_eq!(summary["problems"], 10);
}

#[test]
fn plan_then_validate_and_catch_a_corrupted_waypoint() {
    let dir = tempfile::tempdir().unwrap();
    let problem = asset("problems/tabletop_plan.json");
    let result = dir.path().join("result.json");
    let out = motiongen(&["plan", path_str(&problem), "--seed", "3", "--out", path_str(&result)]);
    assert!(out.status.success(), "plan failed: {}", stderr(&out));

    let text = std::fs::read_to_string(&result).unwrap();
    let doc = ResultDocument::from_json(&text).unwrap();
    assert!(doc.success);
    assert_eq!(ResultDocument::from_json(&doc.to_json()).unwrap(), doc);

    let out = motiongen(&["validate", path_str(&problem), path_str(&result)]);
    assert!(out.status.success(), "clean result rejected: {}", stderr(&out));

    let mut bad = doc.clone();
    let k = bad.positions.len() / 2;
    let upper = franka().position_limits[3][1];
    bad.positions[k][3] = upper + 0.5;
    let corrupted = dir.path().join("corrupted.json");
    std::fs::write(&corrupted, bad.to_json()).unwrap();
    let out = motiongen(&["validate", path_str(&problem), path_str(&corrupted)]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(
        err.lines().any(|l| l.starts_with(&format!("violation at step {k}:")) && l.contains("PositionLimit")),
        "stderr did not name step {k}: {err}"
    );
}

#[test]
fn goal_inside_an_obstacle_reports_no_ik() {
    let dir = tempfile::tempdir().unwrap();
    // Center of the box on the table, tool pointing down.
    let problem = problem_doc(dir.path(), [0.5, 0.0, 0.15, 0.0, 1.0, 0.0, 0.0]);
    let out = motiongen(&["plan", path_str(&problem)]);
    assert_eq!(out.status.code(), Some(1));
    let doc = ResultDocument::from_json(&String::from_utf8_lossy(&out.stdout)).unwrap();
    assert!(!doc.success);
    assert_eq!(serde_json::to_value(doc.failure_reason).unwrap(), json!("no_ik"));
    assert!(stderr(&out).contains("no_ik"));

    let out = motiongen(&["ik", path_str(&problem)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("no_ik"));
}

#[test]
fn unknown_flags_are_usage_errors() {
    let out = motiongen(&["bench", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).to_lowercase().contains("usage"));
    let out = motiongen(&["bench", "--set", "x.json", "--stage", "sideways"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_files_fail_without_panicking() {
    let out = motiongen(&["plan", "/nonexistent/problem.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).starts_with("error:"));
}
