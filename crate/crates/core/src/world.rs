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
//! Oriented bounding box world and point signed distance.

use std::path::Path;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Frame, Pose};

/// Distance reported by an empty world.
pub const FAR_DISTANCE: f64 = 1e8;

#[derive(Clone, Debug, PartialEq)]
pub struct Obb {
    pub name: String,
    pub pose: Pose,
    pub half_extents: Vector3<f64>,
    pub enabled: bool,
    frame: Frame,
    bound_radius: f64,
}

/// Signed distance from a point to one box, with the closest surface point
/// and the gradient of the distance with respect to the query point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointDistance {
    pub distance: f64,
    pub closest: Vector3<f64>,
    pub normal: Vector3<f64>,
}

impl Obb {
    pub fn new(name: impl Into<String>, pose: Pose, half_extents: Vector3<f64>) -> Result<Obb> {
        if !half_extents.iter().all(|&h| h > 0.0 && h.is_finite()) {
            return Err(Error::Invalid("box half extents must be positive".into()));
        }
        if !pose.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(Obb {
            name: name.into(),
            pose,
            half_extents,
            enabled: true,
            frame: pose.to_frame(),
            bound_radius: half_extents.norm(),
        })
    }

    pub fn axis_aligned(name: impl Into<String>, center: [f64; 3], half_extents: [f64; 3]) -> Obb {
        Obb::new(
            name,
            Pose::new(Vector3::from(center), [1.0, 0.0, 0.0, 0.0]),
            Vector3::from(half_extents),
        )
        .expect("positive half extents")
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    /// Cheap lower bound on the distance from `p` to the box.
    #[inline]
    pub fn distance_lower_bound(&self, p: &Vector3<f64>) -> f64 {
        (p - self.frame.pos).norm() - self.bound_radius
    }

    pub fn signed_distance(&self, p: &Vector3<f64>) -> PointDistance {
        let local = self.frame.inverse_transform_point(p);
        let h = &self.half_extents;
        let q = local.abs() - h;
        let sign = |v: f64| if v < 0.0 { -1.0 } else { 1.0 };
        let (distance, closest_local, normal_local) = if q.iter().all(|&v| v <= 0.0) {
            let mut a = 0;
            for i in 1..3 {
                if q[i] > q[a] {
                    a = i;
                }
            }
            let mut c = local;
            c[a] = sign(local[a]) * h[a];
            let mut n = Vector3::zeros();
            n[a] = sign(local[a]);
            (q[a], c, n)
        } else {
            let c = Vector3::new(
                local.x.clamp(-h.x, h.x),
                local.y.clamp(-h.y, h.y),
                local.z.clamp(-h.z, h.z),
            );
            let diff = local - c;
            let d = diff.norm();
            (d, c, diff / d)
        };
        PointDistance {
            distance,
            closest: self.frame.transform_point(&closest_local),
            normal: self.frame.rot * normal_local,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct WorldModel {
    pub obstacles: Vec<Obb>,
}

impl WorldModel {
    pub fn new(obstacles: Vec<Obb>) -> Self {
        Self { obstacles }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn enabled(&self) -> impl Iterator<Item = &Obb> {
        self.obstacles.iter().filter(|o| o.enabled)
    }

    /// Minimum signed distance over enabled boxes.
    pub fn signed_distance_point(&self, p: &Vector3<f64>) -> PointDistance {
        let mut best = PointDistance {
            distance: FAR_DISTANCE,
            closest: *p,
            normal: Vector3::zeros(),
        };
        for o in self.enabled() {
            let r = o.signed_distance(p);
            if r.distance < best.distance {
                best = r;
            }
        }
        best
    }

    /// Rigidly moves every box by `t` (applied on the left).
    pub fn transformed(&self, t: &Frame) -> WorldModel {
        let obstacles = self
            .obstacles
            .iter()
            .map(|o| {
                let f = t.compose(o.frame());
                let mut moved = Obb::new(o.name.clone(), Pose::from_frame(&f), o.half_extents)
                    .expect("existing box is valid");
                moved.enabled = o.enabled;
                moved
            })
            .collect();
        WorldModel { obstacles }
    }

    pub fn from_json(text: &str) -> Result<WorldModel> {
        let doc: SceneDocument = serde_json::from_str(text)?;
        doc.to_world()
    }

    pub fn to_document(&self) -> SceneDocument {
        SceneDocument::Object {
            obstacles: self
                .obstacles
                .iter()
                .map(|o| ObstacleDoc {
                    name: o.name.clone(),
                    pose: o.pose.to_array(),
                    dims: [
                        2.0 * o.half_extents.x,
                        2.0 * o.half_extents.y,
                        2.0 * o.half_extents.z,
                    ],
                    enabled: o.enabled,
                })
                .collect(),
        }
    }
}

pub fn load_scene(path: impl AsRef<Path>) -> Result<WorldModel> {
    WorldModel::from_json(&std::fs::read_to_string(path)?)
}

fn default_enabled() -> bool {
    true
}

/// One cuboid: pose `[x, y, z, qw, qx, qy, qz]` and full side lengths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleDoc {
    pub name: String,
    pub pose: [f64; 7],
    pub dims: [f64; 3],
    #[serde(default = "default_enabled")]
    pub enabled: bool,
}

/// A scene is either a bare list of obstacles or `{"obstacles": [...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SceneDocument {
    Object { obstacles: Vec<ObstacleDoc> },
    List(Vec<ObstacleDoc>),
}

impl SceneDocument {
    pub fn obstacles(&self) -> &[ObstacleDoc] {
        match self {
            SceneDocument::Object { obstacles } | SceneDocument::List(obstacles) => obstacles,
        }
    }

    pub fn to_world(&self) -> Result<WorldModel> {
        let mut out = Vec::new();
        for o in self.obstacles() {
            let q = &o.pose[3..];
            let norm = q.iter().map(|v| v * v).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-6 {
                return Err(Error::Invalid(format!(
                    "obstacle `{}` quaternion is not unit length",
                    o.name
                )));
            }
            let mut obb = Obb::new(
                o.name.clone(),
                Pose::from_array(o.pose),
                Vector3::from(o.dims) * 0.5,
            )?;
            obb.enabled = o.enabled;
            out.push(obb);
        }
        Ok(WorldModel::new(out))
    }
}
