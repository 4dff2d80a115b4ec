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
//! Initial trajectories for the optimizer.

use serde::{Deserialize, Serialize};

/// How a seed trajectory is laid out between the start and an IK solution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedMode {
    Linear,
    Retract,
    GraphPlan,
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Samples the polyline through `waypoints` at `rows` points evenly spaced
/// by arc length. The first and last rows equal the end waypoints exactly.
pub fn resample_polyline(waypoints: &[Vec<f64>], rows: usize) -> Vec<f64> {
    let d = waypoints[0].len();
    let lengths: Vec<f64> = waypoints.windows(2).map(|w| distance(&w[0], &w[1])).collect();
    let total: f64 = lengths.iter().sum();
    let mut out = Vec::with_capacity(rows * d);
    let mut seg = 0;
    let mut before = 0.0;
    for r in 0..rows {
        if r == rows - 1 || total == 0.0 {
            let src = if r == rows - 1 { waypoints.last().unwrap() } else { &waypoints[0] };
            out.extend_from_slice(src);
            continue;
        }
        let target = total * r as f64 / (rows - 1) as f64;
        while seg + 1 < lengths.len() && before + lengths[seg] < target {
            before += lengths[seg];
            seg += 1;
        }
        let u = if lengths[seg] > 0.0 { ((target - before) / lengths[seg]).clamp(0.0, 1.0) } else { 0.0 };
        let (a, b) = (&waypoints[seg], &waypoints[seg + 1]);
        out.extend(a.iter().zip(b).map(|(x, y)| x + u * (y - x)));
    }
    out
}

/// Straight line from `start` to `goal` over `rows` evenly spaced rows.
pub fn linear_seed(start: &[f64], goal: &[f64], rows: usize) -> Vec<f64> {
    resample_polyline(&[start.to_vec(), goal.to_vec()], rows)
}

/// Start to retract configuration to goal, with rows split in proportion
/// to the two segment lengths.
pub fn retract_seed(start: &[f64], retract: &[f64], goal: &[f64], rows: usize) -> Vec<f64> {
    resample_polyline(&[start.to_vec(), retract.to_vec(), goal.to_vec()], rows)
}
