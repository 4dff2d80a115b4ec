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
//! `motiongen` command-line entry point.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use motiongen::bench::{
    apply_overrides, load_problem_set, run_benchmark, ProblemDocument, ResultDocument, Stage,
};
use motiongen::metrics::{evaluate_trajectory, validate_trajectory, Thresholds};
use motiongen::motion::{plan_motion, solve_ik, IkConfig, MotionGenConfig};
use motiongen::planner::Planner;

#[derive(Parser)]
#[command(name = "motiongen", version, about = "Collision-free motion generation for serial arms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Overrides the configuration's RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Partial configuration document merged over the defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (or directory for `bench`). Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Plan one problem document and print the result document.
    Plan {
        problem: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Solve collision-free IK for a problem's goal pose.
    Ik {
        problem: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run IK and the geometric planner only.
    Graph {
        problem: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run a problem set and write metrics.csv, summary.json and timing.csv.
    Bench {
        #[arg(long)]
        set: PathBuf,
        /// full, ik, plan or opt.
        #[arg(long, default_value = "full")]
        stage: Stage,
        /// Problems solved concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Re-check a result document against its problem's robot and scene.
    Validate {
        problem: PathBuf,
        result: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn base_dir(path: &Path) -> &Path {
    path.parent().unwrap_or(Path::new("."))
}

fn load_config(common: &Common, overrides: &Value) -> Result<MotionGenConfig> {
    let mut config = MotionGenConfig::default();
    if let Some(path) = &common.config {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        config = apply_overrides(&config, &serde_json::from_str(&text)?)?;
    }
    config = apply_overrides(&config, overrides)?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn emit(common: &Common, text: &str) -> Result<()> {
    match &common.out {
        Some(path) => std::fs::write(path, format!("{text}\n")).with_context(|| format!("writing {}", path.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn read_problem(path: &Path) -> Result<ProblemDocument> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(ProblemDocument::from_json(&text)?)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Plan { problem, common } => {
            let doc = read_problem(&problem)?;
            let config = load_config(&common, &doc.overrides)?;
            let (robot, world, start, goal) = doc.resolve(base_dir(&problem))?;
            let result = plan_motion(&robot, &world, &start, &goal, &config)?;
            let out = ResultDocument::from_result(&result);
            emit(&common, &out.to_json())?;
            if let Some(reason) = result.failure_reason {
                eprintln!("planning failed: {}", reason.as_str());
            }
            Ok(result.success)
        }
        Command::Ik { problem, common } => {
            let doc = read_problem(&problem)?;
            let config = load_config(&common, &doc.overrides)?;
            let (robot, world, start, goal) = doc.resolve(base_dir(&problem))?;
            let ik = IkConfig { seed: config.seed ^ config.ik.seed, ..config.ik.clone() };
            let sols = solve_ik(&robot, &world, &goal, &config.weights, Some(&start), &ik);
            let body: Vec<Value> = sols
                .iter()
                .map(|s| json!({"q": s.q, "position_error": s.position_error, "orientation_error": s.rotation_error}))
                .collect();
            emit(&common, &serde_json::to_string_pretty(&json!({ "solutions": body }))?)?;
            if sols.is_empty() {
                eprintln!("no_ik");
            }
            Ok(!sols.is_empty())
        }
        Command::Graph { problem, common } => {
            let doc = read_problem(&problem)?;
            let config = load_config(&common, &doc.overrides)?;
            let (robot, world, start, goal) = doc.resolve(base_dir(&problem))?;
            let ik = IkConfig { seed: config.seed ^ config.ik.seed, ..config.ik.clone() };
            let sols = solve_ik(&robot, &world, &goal, &config.weights, Some(&start), &ik);
            let Some(best) = sols.first() else {
                emit(&common, &serde_json::to_string_pretty(&json!({"found": false, "failure_reason": "no_ik"}))?)?;
                eprintln!("no_ik");
                return Ok(false);
            };
            let mut pc = config.planner.clone();
            pc.seed ^= config.seed;
            let out = Planner::new(&robot, &world, pc)?.plan(&start, &best.q)?.remove(0);
            let body = json!({"found": out.found, "length": out.length, "path": out.path, "diagnostic": out.diagnostic});
            emit(&common, &serde_json::to_string_pretty(&body)?)?;
            Ok(out.found)
        }
        Command::Bench { set, stage, jobs, common } => {
            let config = load_config(&common, &Value::Null)?;
            let resolved = load_problem_set(&set).with_context(|| format!("loading {}", set.display()))?;
            let out = common.out.clone().unwrap_or_else(|| PathBuf::from("bench_out"));
            let report = run_benchmark(&resolved, &config, stage, jobs, Some(&out))?;
            eprintln!(
                "{} of {} problems succeeded; reports in {}",
                report.summary.successes,
                report.summary.problems,
                out.display()
            );
            Ok(true)
        }
        Command::Validate { problem, result, common } => {
            let doc = read_problem(&problem)?;
            let config = load_config(&common, &doc.overrides)?;
            let (robot, world, _, goal) = doc.resolve(base_dir(&problem))?;
            let text = std::fs::read_to_string(&result).with_context(|| format!("reading {}", result.display()))?;
            let res = ResultDocument::from_json(&text)?;
            let thresholds = Thresholds {
                position: config.position_threshold,
                orientation: config.rotation_threshold,
                ..Thresholds::default()
            };
            let violations = validate_trajectory(&robot, &world, &goal, &res.positions, res.dt_final, &thresholds);
            let metrics = violations
                .is_empty()
                .then(|| evaluate_trajectory(&robot, &world, &goal, &res.positions, res.dt_final, &thresholds));
            emit(&common, &serde_json::to_string_pretty(&json!({"valid": violations.is_empty(), "violations": violations, "metrics": metrics}))?)?;
            for v in &violations {
                match v.step() {
                    Some(step) => eprintln!("violation at step {step}: {v:?}"),
                    None => eprintln!("violation: {v:?}"),
                }
            }
            Ok(violations.is_empty())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
