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
//! Regenerates `assets/problems/suite.json`.
//!
//! For each scene, start and goal configurations are rejection-sampled so
//! the end effector lands in a scene-specific region and the whole arm has
//! 2 cm of clearance. A problem is kept only when the straight joint-space
//! line between them collides and the geometric planner, with a generous
//! budget, connects them. The goal configuration is stored as a witness.
//!
//! Run with `cargo run --release --example generate_suite`.

use motiongen::assets::{franka, scene};
use motiongen::bench::{ProblemEntry, ProblemSet, SCHEMA_VERSION};
use motiongen::fixtures::{random_config, rng};
use motiongen::kinematics::ee_pose;
use motiongen::planner::{Planner, PlannerConfig, ValidityChecker};
use motiongen::robot::RobotModel;

type Region = [[f64; 2]; 3];

struct SceneSpec {
    name: &'static str,
    count: usize,
    start: Region,
    goal: Region,
}

const SCENES: [SceneSpec; 3] = [
    SceneSpec {
        name: "tabletop_with_box",
        count: 7,
        start: [[0.3, 0.7], [0.2, 0.5], [0.05, 0.45]],
        goal: [[0.3, 0.7], [-0.5, -0.2], [0.05, 0.45]],
    },
    SceneSpec {
        name: "shelf_slot",
        count: 7,
        start: [[0.25, 0.55], [-0.4, 0.4], [0.55, 0.85]],
        goal: [[0.6, 0.72], [-0.12, 0.12], [0.34, 0.46]],
    },
    SceneSpec {
        name: "wall_gap",
        count: 6,
        start: [[0.35, 0.7], [0.15, 0.5], [0.05, 0.6]],
        goal: [[0.35, 0.7], [-0.5, -0.15], [0.05, 0.6]],
    },
];

fn inside(p: &[f64; 3], r: &Region) -> bool {
    p.iter().zip(r).all(|(v, [lo, hi])| lo <= v && v <= hi)
}

fn sample(robot: &RobotModel, checker: &ValidityChecker, region: &Region, r: &mut rand_chacha::ChaCha8Rng) -> Vec<f64> {
    loop {
        let q = random_config(robot, r, 0.02);
        if inside(&ee_pose(robot, &q).position, region) && checker.is_valid(&q) {
            return q;
        }
    }
}

fn main() -> anyhow::Result<()> {
    let robot = franka();
    let mut problems = Vec::new();
    for (si, spec) in SCENES.iter().enumerate() {
        let world = scene(spec.name).expect("bundled scene");
        let checker = ValidityChecker::new(&robot, &world, 0.02);
        let strict = ValidityChecker::new(&robot, &world, 0.0);
        let mut r = rng(1000 + si as u64);
        let mut kept = 0;
        let mut tries = 0;
        while kept < spec.count {
            tries += 1;
            let start = sample(&robot, &checker, &spec.start, &mut r);
            let goal_q = sample(&robot, &checker, &spec.goal, &mut r);
            if strict.segment_valid(&start, &goal_q, &[1.0; 7], 0.01) {
                continue;
            }
            let config = PlannerConfig { seed: tries, g_max: 40, ..PlannerConfig::default() };
            let out = Planner::new(&robot, &world, config)?.plan(&start, &goal_q)?;
            if !out[0].found {
                eprintln!("{} try {tries}: planner found no path, skipping", spec.name);
                continue;
            }
            let goal = ee_pose(&robot, &goal_q);
            problems.push(ProblemEntry {
                id: format!("{}_{kept:02}", spec.name),
                scene: format!("../scenes/{}.json", spec.name),
                start_q: start,
                goal_pose: goal.to_array(),
                witness_q: Some(goal_q),
            });
            kept += 1;
            eprintln!("{} {kept}/{} after {tries} tries", spec.name, spec.count);
        }
    }
    let set = ProblemSet { schema_version: SCHEMA_VERSION, robot: "../franka.json".into(), problems };
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/assets/problems/suite.json");
    std::fs::write(path, set.to_json() + "\n")?;
    eprintln!("wrote {path}");
    Ok(())
}
