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
//! Robot description: kinematic chain, limits and collision spheres.
//!
//! A robot is loaded from a JSON document:
//!
//! ```json
//! {
//!   "joints": [
//!     {"name": "j1", "parent": null, "child": "link1", "kind": "revolute_z",
//!      "origin": {"xyz": [0, 0, 0], "rpy": [0, 0, 0]}}
//!   ],
//!   "limits": {"position": [[-3.1, 3.1]], "velocity": [2.0],
//!              "acceleration": [10.0], "jerk": [500.0]},
//!   "spheres": [{"link": "link1", "center": [0.5, 0, 0], "radius": 0.05}],
//!   "self_collision_pairs": [],
//!   "retract_config": [0.0],
//!   "ee_link": "link1"
//! }
//! ```
//!
//! `origin` may be given either as `xyz`/`rpy` or as a row-major 4×4
//! `matrix`. Instead of explicit `self_collision_pairs` a document may list
//! `self_collision_ignore` link pairs; every sphere pair on distinct,
//! non-ignored links is then checked.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use nalgebra::{Matrix3, Matrix4, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Frame;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JointKind {
    Fixed,
    PrismaticX,
    PrismaticY,
    PrismaticZ,
    RevoluteX,
    RevoluteY,
    RevoluteZ,
}

impl JointKind {
    pub fn is_actuated(self) -> bool {
        self != JointKind::Fixed
    }

    pub fn is_revolute(self) -> bool {
        matches!(
            self,
            JointKind::RevoluteX | JointKind::RevoluteY | JointKind::RevoluteZ
        )
    }

    /// Local axis index (0 = x, 1 = y, 2 = z) for actuated joints.
    pub fn axis(self) -> Option<usize> {
        match self {
            JointKind::Fixed => None,
            JointKind::PrismaticX | JointKind::RevoluteX => Some(0),
            JointKind::PrismaticY | JointKind::RevoluteY => Some(1),
            JointKind::PrismaticZ | JointKind::RevoluteZ => Some(2),
        }
    }

    pub const ALL: [JointKind; 7] = [
        JointKind::Fixed,
        JointKind::PrismaticX,
        JointKind::PrismaticY,
        JointKind::PrismaticZ,
        JointKind::RevoluteX,
        JointKind::RevoluteY,
        JointKind::RevoluteZ,
    ];
}

#[derive(Clone, Debug, PartialEq)]
pub struct JointSpec {
    pub name: String,
    /// Name of the link this joint moves.
    pub link_name: String,
    pub kind: JointKind,
    pub fixed_transform: Frame,
    /// `None` for joints attached to the world base.
    pub parent_link_index: Option<usize>,
    pub actuated_index: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CollisionSphere {
    pub link_index: usize,
    pub center: Vector3<f64>,
    pub radius: f64,
}

/// Immutable robot description. Link `i` is the child of joint `i`; joints
/// are stored parent-before-child.
#[derive(Clone, Debug, PartialEq)]
pub struct RobotModel {
    pub joints: Vec<JointSpec>,
    pub dof: usize,
    pub position_limits: Vec<[f64; 2]>,
    pub velocity_limits: Vec<f64>,
    pub acceleration_limits: Vec<f64>,
    pub jerk_limits: Vec<f64>,
    pub spheres: Vec<CollisionSphere>,
    pub self_pairs: Vec<(usize, usize)>,
    pub ee_link_index: usize,
    pub retract_config: Vec<f64>,
}

// ---------------------------------------------------------------------------
// Document schema

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OriginDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xyz: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rpy: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<[[f64; 4]; 4]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointDoc {
    pub name: String,
    #[serde(default)]
    pub parent: Option<String>,
    pub child: String,
    pub kind: JointKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<OriginDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitsDoc {
    pub position: Vec<[f64; 2]>,
    pub velocity: Vec<f64>,
    pub acceleration: Vec<f64>,
    pub jerk: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SphereDoc {
    pub link: String,
    pub center: [f64; 3],
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub joints: Vec<JointDoc>,
    pub limits: LimitsDoc,
    #[serde(default)]
    pub spheres: Vec<SphereDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub self_collision_pairs: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub self_collision_ignore: Option<Vec<[String; 2]>>,
    pub retract_config: Vec<f64>,
    pub ee_link: String,
}

impl OriginDoc {
    fn to_frame(&self, joint: &str) -> Result<Frame> {
        if let Some(m) = self.matrix {
            if self.xyz.is_some() || self.rpy.is_some() {
                return Err(Error::Invalid(format!(
                    "joint `{joint}` mixes matrix and xyz/rpy origins"
                )));
            }
            if m[3] != [0.0, 0.0, 0.0, 1.0] {
                return Err(Error::Invalid(format!(
                    "joint `{joint}` origin matrix is not homogeneous"
                )));
            }
            let mat = Matrix4::from_fn(|r, c| m[r][c]);
            Ok(Frame::from_homogeneous(&mat))
        } else {
            Ok(Frame::from_xyz_rpy(
                self.xyz.unwrap_or([0.0; 3]),
                self.rpy.unwrap_or([0.0; 3]),
            ))
        }
    }
}

/// Loads and validates a robot from a JSON file.
pub fn load_robot(path: impl AsRef<Path>) -> Result<RobotModel> {
    let text = std::fs::read_to_string(path)?;
    RobotModel::from_json(&text)
}

impl RobotModel {
    pub fn from_json(text: &str) -> Result<RobotModel> {
        let doc: RobotDocument = serde_json::from_str(text)?;
        RobotModel::from_document(&doc)
    }

    pub fn from_document(doc: &RobotDocument) -> Result<RobotModel> {
        let order = topological_order(&doc.joints)?;

        let mut link_index: HashMap<&str, usize> = HashMap::new();
        let mut joints = Vec::with_capacity(order.len());
        let mut dof = 0;
        for &j in &order {
            let jd = &doc.joints[j];
            let parent_link_index = match &jd.parent {
                None => None,
                Some(p) => Some(
                    *link_index
                        .get(p.as_str())
                        .ok_or_else(|| Error::UnknownLink(p.clone()))?,
                ),
            };
            let fixed_transform = match &jd.origin {
                Some(o) => o.to_frame(&jd.name)?,
                None => Frame::identity(),
            };
            if fixed_transform.orthonormality_error() > 1e-6
                || fixed_transform.rot.determinant() < 0.0
            {
                return Err(Error::NonOrthonormal(jd.name.clone()));
            }
            let actuated_index = if jd.kind.is_actuated() {
                dof += 1;
                Some(dof - 1)
            } else {
                None
            };
            link_index.insert(jd.child.as_str(), joints.len());
            joints.push(JointSpec {
                name: jd.name.clone(),
                link_name: jd.child.clone(),
                kind: jd.kind,
                fixed_transform,
                parent_link_index,
                actuated_index,
            });
        }

        let lim = &doc.limits;
        for (len, what) in [
            (lim.position.len(), "position"),
            (lim.velocity.len(), "velocity"),
            (lim.acceleration.len(), "acceleration"),
            (lim.jerk.len(), "jerk"),
            (doc.retract_config.len(), "retract_config"),
        ] {
            if len != dof {
                return Err(Error::Invalid(format!(
                    "{what} has {len} entries but the chain has {dof} actuated joints"
                )));
            }
        }
        for (i, &[lo, hi]) in lim.position.iter().enumerate() {
            if !(lo < hi) {
                return Err(Error::InvalidLimit {
                    index: i,
                    lower: lo,
                    upper: hi,
                });
            }
        }
        for (kind, values) in [
            ("velocity", &lim.velocity),
            ("acceleration", &lim.acceleration),
            ("jerk", &lim.jerk),
        ] {
            for (i, &v) in values.iter().enumerate() {
                if !(v > 0.0) {
                    return Err(Error::NonpositiveLimit {
                        kind,
                        index: i,
                        value: v,
                    });
                }
            }
        }
        for (i, (&q, &[lo, hi])) in doc.retract_config.iter().zip(&lim.position).enumerate() {
            if !(q > lo && q < hi) {
                return Err(Error::RetractOutOfLimits(i));
            }
        }

        let mut spheres = Vec::with_capacity(doc.spheres.len());
        for s in &doc.spheres {
            let li = *link_index
                .get(s.link.as_str())
                .ok_or_else(|| Error::UnknownLink(s.link.clone()))?;
            spheres.push(CollisionSphere {
                link_index: li,
                center: Vector3::from(s.center),
                radius: s.radius,
            });
        }

        let self_pairs = match (&doc.self_collision_pairs, &doc.self_collision_ignore) {
            (Some(pairs), _) => {
                let mut out = Vec::with_capacity(pairs.len());
                for &[i, j] in pairs {
                    if !(i < j && j < spheres.len()) {
                        return Err(Error::InvalidPair(i, j));
                    }
                    out.push((i, j));
                }
                out
            }
            (None, Some(ignore)) => {
                let mut ignored = BTreeSet::new();
                for [a, b] in ignore {
                    let ia = *link_index
                        .get(a.as_str())
                        .ok_or_else(|| Error::UnknownLink(a.clone()))?;
                    let ib = *link_index
                        .get(b.as_str())
                        .ok_or_else(|| Error::UnknownLink(b.clone()))?;
                    ignored.insert((ia.min(ib), ia.max(ib)));
                }
                let mut out = Vec::new();
                for i in 0..spheres.len() {
                    for j in (i + 1)..spheres.len() {
                        let (a, b) = (spheres[i].link_index, spheres[j].link_index);
                        if a != b && !ignored.contains(&(a.min(b), a.max(b))) {
                            out.push((i, j));
                        }
                    }
                }
                out
            }
            (None, None) => Vec::new(),
        };

        let ee_link_index = *link_index
            .get(doc.ee_link.as_str())
            .ok_or_else(|| Error::UnknownLink(doc.ee_link.clone()))?;

        Ok(RobotModel {
            joints,
            dof,
            position_limits: lim.position.clone(),
            velocity_limits: lim.velocity.clone(),
            acceleration_limits: lim.acceleration.clone(),
            jerk_limits: lim.jerk.clone(),
            spheres,
            self_pairs,
            ee_link_index,
            retract_config: doc.retract_config.clone(),
        })
    }

    /// Writes the model back out with explicit matrices and sphere pairs.
    pub fn to_document(&self) -> RobotDocument {
        let joints = self
            .joints
            .iter()
            .map(|j| {
                let m = j.fixed_transform.to_homogeneous();
                let mut rows = [[0.0; 4]; 4];
                for (r, row) in rows.iter_mut().enumerate() {
                    for (c, v) in row.iter_mut().enumerate() {
                        *v = m[(r, c)];
                    }
                }
                JointDoc {
                    name: j.name.clone(),
                    parent: j.parent_link_index.map(|p| self.joints[p].link_name.clone()),
                    child: j.link_name.clone(),
                    kind: j.kind,
                    origin: Some(OriginDoc {
                        xyz: None,
                        rpy: None,
                        matrix: Some(rows),
                    }),
                }
            })
            .collect();
        RobotDocument {
            name: None,
            joints,
            limits: LimitsDoc {
                position: self.position_limits.clone(),
                velocity: self.velocity_limits.clone(),
                acceleration: self.acceleration_limits.clone(),
                jerk: self.jerk_limits.clone(),
            },
            spheres: self
                .spheres
                .iter()
                .map(|s| SphereDoc {
                    link: self.joints[s.link_index].link_name.clone(),
                    center: [s.center.x, s.center.y, s.center.z],
                    radius: s.radius,
                })
                .collect(),
            self_collision_pairs: Some(self.self_pairs.iter().map(|&(i, j)| [i, j]).collect()),
            self_collision_ignore: None,
            retract_config: self.retract_config.clone(),
            ee_link: self.joints[self.ee_link_index].link_name.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("robot document serializes")
    }

    pub fn num_links(&self) -> usize {
        self.joints.len()
    }

    pub fn num_spheres(&self) -> usize {
        self.spheres.len()
    }

    pub fn link_index(&self, name: &str) -> Option<usize> {
        self.joints.iter().position(|j| j.link_name == name)
    }

    pub fn sphere_radii(&self) -> Vec<f64> {
        self.spheres.iter().map(|s| s.radius).collect()
    }

    pub fn within_position_limits(&self, q: &[f64]) -> bool {
        q.iter()
            .zip(&self.position_limits)
            .all(|(&v, &[lo, hi])| v >= lo && v <= hi)
    }

    pub fn clamp_to_limits(&self, q: &mut [f64]) {
        for (v, &[lo, hi]) in q.iter_mut().zip(&self.position_limits) {
            *v = v.clamp(lo, hi);
        }
    }

    pub fn lower_limits(&self) -> Vec<f64> {
        self.position_limits.iter().map(|l| l[0]).collect()
    }

    pub fn upper_limits(&self) -> Vec<f64> {
        self.position_limits.iter().map(|l| l[1]).collect()
    }

    /// Rotation blocks are assumed orthonormal; used by fixture builders.
    pub fn set_fixed_rotation(&mut self, joint: usize, rot: Matrix3<f64>) {
        self.joints[joint].fixed_transform.rot = rot;
    }
}

// Kahn's algorithm keyed on link names; ties keep document order.
fn topological_order(joints: &[JointDoc]) -> Result<Vec<usize>> {
    let mut by_child: HashMap<&str, usize> = HashMap::new();
    for (i, j) in joints.iter().enumerate() {
        if by_child.insert(j.child.as_str(), i).is_some() {
            return Err(Error::DuplicateLink(j.child.clone()));
        }
    }
    let mut parent_of = vec![None; joints.len()];
    for (i, j) in joints.iter().enumerate() {
        if let Some(p) = &j.parent {
            let pi = *by_child
                .get(p.as_str())
                .ok_or_else(|| Error::UnknownLink(p.clone()))?;
            parent_of[i] = Some(pi);
        }
    }
    let mut placed = vec![false; joints.len()];
    let mut order = Vec::with_capacity(joints.len());
    loop {
        let before = order.len();
        for i in 0..joints.len() {
            if placed[i] {
                continue;
            }
            if parent_of[i].map_or(true, |p| placed[p]) {
                placed[i] = true;
                order.push(i);
            }
        }
        if order.len() == joints.len() {
            return Ok(order);
        }
        if order.len() == before {
            let stuck = placed.iter().position(|&p| !p).unwrap();
            return Err(Error::Cycle(joints[stuck].child.clone()));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn planar_doc() -> RobotDocument {
        serde_json::from_str(
            r#"{
            "joints": [
                {"name": "j1", "parent": null, "child": "l1", "kind": "revolute_z"},
                {"name": "j2", "parent": "l1", "child": "l2", "kind": "revolute_z",
                 "origin": {"xyz": [1, 0, 0]}},
                {"name": "tip", "parent": "l2", "child": "ee", "kind": "fixed",
                 "origin": {"xyz": [1, 0, 0]}}
            ],
            "limits": {"position": [[-3, 3], [-3, 3]], "velocity": [1, 1],
                       "acceleration": [5, 5], "jerk": [50, 50]},
            "spheres": [{"link": "l1", "center": [0.5, 0, 0], "radius": 0.1},
                        {"link": "ee", "center": [0, 0, 0], "radius": 0.1}],
            "self_collision_pairs": [[0, 1]],
            "retract_config": [0.1, 0.2],
            "ee_link": "ee"
        }"#,
        )
        .unwrap()
    }

    #[test]
    fn loads_minimal_planar_arm() {
        let model = RobotModel::from_document(&planar_doc()).unwrap();
        assert_eq!(model.dof, 2);
        assert_eq!(model.num_links(), 3);
        assert_eq!(model.ee_link_index, 2);
        assert_eq!(model.joints[2].actuated_index, None);
    }

    #[test]
    fn rejects_nonpositive_velocity_limit() {
        let mut doc = planar_doc();
        doc.limits.velocity[1] = 0.0;
        let err = RobotModel::from_document(&doc).unwrap_err();
        assert!(err.to_string().contains("nonpositive limit"), "{err}");
    }

    #[test]
    fn rejects_inverted_position_limit() {
        let mut doc = planar_doc();
        doc.limits.position[0] = [1.0, 1.0];
        assert!(matches!(
            RobotModel::from_document(&doc),
            Err(Error::InvalidLimit { index: 0, .. })
        ));
    }

    #[test]
    fn rejects_cycles_and_unknown_links() {
        let mut doc = planar_doc();
        doc.joints[0].parent = Some("ee".into());
        assert!(matches!(RobotModel::from_document(&doc), Err(Error::Cycle(_))));

        let mut doc = planar_doc();
        doc.spheres[0].link = "nowhere".into();
        assert!(matches!(
            RobotModel::from_document(&doc),
            Err(Error::UnknownLink(_))
        ));
    }

    #[test]
    fn rejects_malformed_documents_and_mimic_joints() {
        assert!(matches!(RobotModel::from_json("{"), Err(Error::Parse(_))));
        let text = serde_json::to_string(&planar_doc())
            .unwrap()
            .replacen("\"kind\":\"revolute_z\"", "\"kind\":\"revolute_z\",\"mimic\":\"j2\"", 1);
        assert!(matches!(RobotModel::from_json(&text), Err(Error::Parse(_))));
        let text = serde_json::to_string(&planar_doc())
            .unwrap()
            .replacen("revolute_z", "planar", 1);
        assert!(matches!(RobotModel::from_json(&text), Err(Error::Parse(_))));
    }

    #[test]
    fn sorts_joints_parent_first() {
        let mut doc = planar_doc();
        doc.joints.reverse();
        let model = RobotModel::from_document(&doc).unwrap();
        let names: Vec<_> = model.joints.iter().map(|j| j.name.as_str()).collect();
        assert_eq!(names, ["j1", "j2", "tip"]);
        for (i, j) in model.joints.iter().enumerate() {
            assert!(j.parent_link_index.map_or(true, |p| p < i));
        }
    }

    #[test]
    fn ignore_list_expands_to_pairs() {
        let mut doc = planar_doc();
        doc.self_collision_pairs = None;
        doc.self_collision_ignore = Some(vec![]);
        let model = RobotModel::from_document(&doc).unwrap();
        assert_eq!(model.self_pairs, vec![(0, 1)]);
        doc.self_collision_ignore = Some(vec![["l1".into(), "ee".into()]]);
        let model = RobotModel::from_document(&doc).unwrap();
        assert!(model.self_pairs.is_empty());
    }

    #[test]
    fn rejects_bad_pairs_and_retract() {
        let mut doc = planar_doc();
        doc.self_collision_pairs = Some(vec![[1, 0]]);
        assert!(matches!(
            RobotModel::from_document(&doc),
            Err(Error::InvalidPair(1, 0))
        ));
        let mut doc = planar_doc();
        doc.retract_config[0] = 3.0;
        assert!(matches!(
            RobotModel::from_document(&doc),
            Err(Error::RetractOutOfLimits(0))
        ));
    }
}
