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
//! Batched forward kinematics and the adjoint pass back to joint space.
//!
//! Batches are flat row-major slices: `q` is `B×D`, sphere positions are
//! `B×M`, link transforms are `B×L`.

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{rotation_to_quaternion, rotation_to_quaternion_vjp, Frame, Pose, Quat};
use crate::robot::{JointKind, RobotModel};

/// Local motion of a single joint for joint value `v`.
#[inline]
pub fn joint_motion(kind: JointKind, v: f64) -> Frame {
    let mut f = Frame::identity();
    match kind {
        JointKind::Fixed => {}
        JointKind::PrismaticX => f.pos.x = v,
        JointKind::PrismaticY => f.pos.y = v,
        JointKind::PrismaticZ => f.pos.z = v,
        JointKind::RevoluteX => {
            let (s, c) = v.sin_cos();
            f.rot = Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c);
        }
        JointKind::RevoluteY => {
            let (s, c) = v.sin_cos();
            f.rot = Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c);
        }
        JointKind::RevoluteZ => {
            let (s, c) = v.sin_cos();
            f.rot = Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0);
        }
    }
    f
}

/// Computes every link frame for one configuration.
pub fn link_frames_into(model: &RobotModel, q: &[f64], links: &mut [Frame]) {
    debug_assert_eq!(links.len(), model.joints.len());
    for (i, j) in model.joints.iter().enumerate() {
        let v = j.actuated_index.map_or(0.0, |a| q[a]);
        let local = j.fixed_transform.compose(&joint_motion(j.kind, v));
        links[i] = match j.parent_link_index {
            Some(p) => links[p].compose(&local),
            None => local,
        };
    }
}

/// Applies link frames to the sphere centers.
pub fn sphere_positions_into(model: &RobotModel, links: &[Frame], out: &mut [Vector3<f64>]) {
    for (o, s) in out.iter_mut().zip(&model.spheres) {
        *o = links[s.link_index].transform_point(&s.center);
    }
}

/// Single-configuration forward kinematics, returning the end-effector pose.
pub fn forward_single(
    model: &RobotModel,
    q: &[f64],
    links: &mut [Frame],
    spheres: &mut [Vector3<f64>],
) -> Pose {
    link_frames_into(model, q, links);
    sphere_positions_into(model, links, spheres);
    Pose::from_frame(&links[model.ee_link_index])
}

pub fn ee_pose(model: &RobotModel, q: &[f64]) -> Pose {
    let mut links = vec![Frame::identity(); model.num_links()];
    link_frames_into(model, q, &mut links);
    Pose::from_frame(&links[model.ee_link_index])
}

#[derive(Clone, Copy, Default)]
struct Accum {
    force: Vector3<f64>,
    moment: Vector3<f64>,
}

/// Reusable scratch for the adjoint pass.
#[derive(Clone, Default)]
pub struct GradScratch {
    acc: Vec<Accum>,
}

/// Projects Cartesian cotangents of one configuration back to joint space.
///
/// `d_spheres` may be empty when only end-effector terms are present.
pub fn gradient_single(
    model: &RobotModel,
    links: &[Frame],
    spheres: &[Vector3<f64>],
    d_spheres: &[Vector3<f64>],
    d_ee_pos: &Vector3<f64>,
    d_ee_quat: &Quat,
    scratch: &mut GradScratch,
    out: &mut [f64],
) {
    let nl = model.num_links();
    scratch.acc.clear();
    scratch.acc.resize(nl, Accum::default());
    let acc = &mut scratch.acc;

    for ((s, x), g) in model.spheres.iter().zip(spheres).zip(d_spheres) {
        let a = &mut acc[s.link_index];
        a.force += g;
        a.moment += x.cross(g);
    }

    let ee = model.ee_link_index;
    let ee_frame = &links[ee];
    {
        let a = &mut acc[ee];
        a.force += d_ee_pos;
        a.moment += ee_frame.pos.cross(d_ee_pos);
        if d_ee_quat.iter().any(|&v| v != 0.0) {
            let g_rot = rotation_to_quaternion_vjp(&ee_frame.rot, d_ee_quat);
            // dR/dq = [k]x R, so <g_R, [k]x R> = k . sum_b R[:,b] x g_R[:,b].
            for b in 0..3 {
                let r = ee_frame.rot.column(b).into_owned();
                let g = g_rot.column(b).into_owned();
                a.moment += r.cross(&g);
            }
        }
    }

    for i in (0..nl).rev() {
        if let Some(p) = model.joints[i].parent_link_index {
            let a = acc[i];
            acc[p].force += a.force;
            acc[p].moment += a.moment;
        }
    }

    out.iter_mut().for_each(|v| *v = 0.0);
    for (i, j) in model.joints.iter().enumerate() {
        let (Some(ai), Some(axis)) = (j.actuated_index, j.kind.axis()) else {
            continue;
        };
        let k = links[i].rot.column(axis).into_owned();
        let a = &acc[i];
        out[ai] = if j.kind.is_revolute() {
            k.dot(&(a.moment - links[i].pos.cross(&a.force)))
        } else {
            k.dot(&a.force)
        };
    }
}

/// Batched forward kinematics output.
#[derive(Clone, Debug)]
pub struct KinematicsResult {
    pub batch: usize,
    /// `B×M` sphere centers in the world frame.
    pub sphere_positions: Vec<Vector3<f64>>,
    pub sphere_radii: Vec<f64>,
    pub ee_pose: Vec<Pose>,
    /// `B×L` link frames, kept for [`kinematics_gradient`].
    pub link_transforms: Vec<Frame>,
}

impl KinematicsResult {
    pub fn spheres(&self, b: usize) -> &[Vector3<f64>] {
        let m = self.sphere_radii.len();
        &self.sphere_positions[b * m..(b + 1) * m]
    }

    pub fn links(&self, b: usize) -> &[Frame] {
        let l = self.link_transforms.len() / self.batch.max(1);
        &self.link_transforms[b * l..(b + 1) * l]
    }
}

pub fn forward_kinematics(model: &RobotModel, q: &[f64]) -> Result<KinematicsResult> {
    let d = model.dof;
    if d == 0 || q.len() % d != 0 || q.is_empty() {
        return Err(Error::ShapeMismatch {
            expected: d,
            actual: q.len(),
        });
    }
    let batch = q.len() / d;
    let (nl, m) = (model.num_links(), model.num_spheres());
    let rows: Vec<(Vec<Frame>, Vec<Vector3<f64>>, Pose)> = q
        .par_chunks(d)
        .map(|qb| {
            let mut links = vec![Frame::identity(); nl];
            let mut spheres = vec![Vector3::zeros(); m];
            let pose = forward_single(model, qb, &mut links, &mut spheres);
            (links, spheres, pose)
        })
        .collect();
    let mut link_transforms = Vec::with_capacity(batch * nl);
    let mut sphere_positions = Vec::with_capacity(batch * m);
    let mut ee = Vec::with_capacity(batch);
    for (links, spheres, pose) in rows {
        link_transforms.extend(links);
        sphere_positions.extend(spheres);
        ee.push(pose);
    }
    Ok(KinematicsResult {
        batch,
        sphere_positions,
        sphere_radii: model.sphere_radii(),
        ee_pose: ee,
        link_transforms,
    })
}

/// Batched adjoint. Cotangent slices are `B×M`, `B`, `B` long.
pub fn kinematics_gradient(
    model: &RobotModel,
    fk: &KinematicsResult,
    d_spheres: &[Vector3<f64>],
    d_ee_pos: &[Vector3<f64>],
    d_ee_quat: &[Quat],
) -> Result<Vec<f64>> {
    let (b, m, d) = (fk.batch, model.num_spheres(), model.dof);
    for (expected, actual) in [
        (b * m, d_spheres.len()),
        (b, d_ee_pos.len()),
        (b, d_ee_quat.len()),
    ] {
        if expected != actual {
            return Err(Error::ShapeMismatch { expected, actual });
        }
    }
    let mut out = vec![0.0; b * d];
    out.par_chunks_mut(d)
        .enumerate()
        .for_each_init(GradScratch::default, |scratch, (i, o)| {
            gradient_single(
                model,
                fk.links(i),
                fk.spheres(i),
                &d_spheres[i * m..(i + 1) * m],
                &d_ee_pos[i],
                &d_ee_quat[i],
                scratch,
                o,
            );
        });
    Ok(out)
}

/// Canonical quaternion of the end-effector frame, exposed for oracles.
pub fn ee_quaternion(links: &[Frame], model: &RobotModel) -> Quat {
    rotation_to_quaternion(&links[model.ee_link_index].rot)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::geometry::normalize;
    use crate::robot::{JointSpec, CollisionSphere};
    use nalgebra::Matrix4;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub fn planar_arm() -> RobotModel {
        RobotModel::from_json(
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

    /// Random tree-shaped chain covering every joint kind.
    pub fn random_model(rng: &mut ChaCha8Rng, n_joints: usize) -> RobotModel {
        let mut joints = Vec::new();
        let mut dof = 0;
        for i in 0..n_joints {
            let kind = JointKind::ALL[(i + rng.gen_range(0..7)) % 7];
            let kind = if i == 0 && kind == JointKind::Fixed {
                JointKind::RevoluteZ
            } else {
                kind
            };
            let parent = if i == 0 { None } else { Some(rng.gen_range(0..i).max(i.saturating_sub(2))) };
            let xyz = [rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3)];
            let rpy = [rng.gen_range(-3.0..3.0), rng.gen_range(-1.5..1.5), rng.gen_range(-3.0..3.0)];
            let actuated_index = kind.is_actuated().then(|| {
                dof += 1;
                dof - 1
            });
            joints.push(JointSpec {
                name: format!("j{i}"),
                link_name: format!("l{i}"),
                kind,
                fixed_transform: Frame::from_xyz_rpy(xyz, rpy),
                parent_link_index: parent,
                actuated_index,
            });
        }
        let spheres = (0..n_joints * 2)
            .map(|k| CollisionSphere {
                link_index: k % n_joints,
                center: Vector3::new(rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2)),
                radius: 0.05,
            })
            .collect();
        RobotModel {
            joints,
            dof,
            position_limits: vec![[-3.0, 3.0]; dof],
            velocity_limits: vec![1.0; dof],
            acceleration_limits: vec![1.0; dof],
            jerk_limits: vec![1.0; dof],
            spheres,
            self_pairs: vec![],
            ee_link_index: n_joints - 1,
            retract_config: vec![0.0; dof],
        }
    }

    // Independent oracle: explicit 4x4 products per joint.
    fn oracle_links(model: &RobotModel, q: &[f64]) -> Vec<Matrix4<f64>> {
        let mut out: Vec<Matrix4<f64>> = Vec::new();
        for j in &model.joints {
            let v = j.actuated_index.map_or(0.0, |a| q[a]);
            let (s, c) = v.sin_cos();
            let motion = match j.kind {
                JointKind::Fixed => Matrix4::identity(),
                JointKind::PrismaticX => Matrix4::new_translation(&Vector3::new(v, 0.0, 0.0)),
                JointKind::PrismaticY => Matrix4::new_translation(&Vector3::new(0.0, v, 0.0)),
                JointKind::PrismaticZ => Matrix4::new_translation(&Vector3::new(0.0, 0.0, v)),
                JointKind::RevoluteX => Matrix4::new(
                    1.0, 0.0, 0.0, 0.0, 0.0, c, -s, 0.0, 0.0, s, c, 0.0, 0.0, 0.0, 0.0, 1.0,
                ),
                JointKind::RevoluteY => Matrix4::new(
                    c, 0.0, s, 0.0, 0.0, 1.0, 0.0, 0.0, -s, 0.0, c, 0.0, 0.0, 0.0, 0.0, 1.0,
                ),
                JointKind::RevoluteZ => Matrix4::new(
                    c, -s, 0.0, 0.0, s, c, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0,
                ),
            };
            let local = j.fixed_transform.to_homogeneous() * motion;
            let world = match j.parent_link_index {
                Some(p) => out[p] * local,
                None => local,
            };
            out.push(world);
        }
        out
    }

    #[test]
    fn planar_arm_examples() {
        let model = planar_arm();
        let fk = forward_kinematics(&model, &[0.0, 0.0]).unwrap();
        let p = fk.ee_pose[0];
        assert!((p.pos() - Vector3::new(2.0, 0.0, 0.0)).norm() < 1e-12);
        assert_eq!(p.quaternion, [1.0, 0.0, 0.0, 0.0]);

        let fk = forward_kinematics(&model, &[std::f64::consts::FRAC_PI_2, 0.0]).unwrap();
        assert!((fk.ee_pose[0].pos() - Vector3::new(0.0, 2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn prismatic_z_translates_child() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut model = random_model(&mut rng, 1);
        model.joints[0].kind = JointKind::PrismaticZ;
        model.joints[0].fixed_transform = Frame::identity();
        let mut links = vec![Frame::identity(); 1];
        link_frames_into(&model, &[0.3], &mut links);
        assert_eq!(links[0].pos, Vector3::new(0.0, 0.0, 0.3));
    }

    #[test]
    fn matches_matrix_chain_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [2, 3, 7, 9] {
            let model = random_model(&mut rng, n);
            for _ in 0..50 {
                let q: Vec<f64> = (0..model.dof).map(|_| rng.gen_range(-3.0..3.0)).collect();
                let mut links = vec![Frame::identity(); n];
                link_frames_into(&model, &q, &mut links);
                for (a, b) in links.iter().zip(oracle_links(&model, &q)) {
                    assert!((a.to_homogeneous() - b).abs().max() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn zero_cotangent_gives_zero_gradient() {
        let model = planar_arm();
        let fk = forward_kinematics(&model, &[0.3, -0.2]).unwrap();
        let g = kinematics_gradient(
            &model,
            &fk,
            &[Vector3::zeros(); 2],
            &[Vector3::zeros()],
            &[[0.0; 4]],
        )
        .unwrap();
        assert_eq!(g, vec![0.0, 0.0]);
    }

    #[test]
    fn tangential_sphere_gradient_is_one() {
        let model = RobotModel::from_json(
            r#"{"joints": [{"name": "j", "parent": null, "child": "l", "kind": "revolute_z"}],
            "limits": {"position": [[-3, 3]], "velocity": [1], "acceleration": [1], "jerk": [1]},
            "spheres": [{"link": "l", "center": [1, 0, 0], "radius": 0.1}],
            "retract_config": [0], "ee_link": "l"}"#,
        )
        .unwrap();
        let fk = forward_kinematics(&model, &[0.0]).unwrap();
        let g = kinematics_gradient(
            &model,
            &fk,
            &[Vector3::new(0.0, 1.0, 0.0)],
            &[Vector3::zeros()],
            &[[0.0; 4]],
        )
        .unwrap();
        assert!((g[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let model = planar_arm();
        let fk = forward_kinematics(&model, &[0.0, 0.0]).unwrap();
        let err = kinematics_gradient(&model, &fk, &[Vector3::zeros(); 3], &[Vector3::zeros()], &[[0.0; 4]]);
        assert!(matches!(err, Err(Error::ShapeMismatch { .. })));
    }

    // Scalar test function: linear in sphere positions, ee position and quaternion.
    fn probe(model: &RobotModel, q: &[f64], gs: &[Vector3<f64>], gp: &Vector3<f64>, gq: &Quat) -> f64 {
        let mut links = vec![Frame::identity(); model.num_links()];
        let mut sp = vec![Vector3::zeros(); model.num_spheres()];
        let pose = forward_single(model, q, &mut links, &mut sp);
        let mut f: f64 = sp.iter().zip(gs).map(|(x, g)| x.dot(g)).sum();
        f += pose.pos().dot(gp);
        f += (0..4).map(|i| pose.quaternion[i] * gq[i]).sum::<f64>();
        f
    }

    fn check_gradient(model: &RobotModel, rng: &mut ChaCha8Rng) {
        let q: Vec<f64> = (0..model.dof).map(|_| rng.gen_range(-2.5..2.5)).collect();
        let gs: Vec<_> = (0..model.num_spheres())
            .map(|_| Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let gp = Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let gq = normalize([rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
        let fk = forward_kinematics(model, &q).unwrap();
        // Skip configurations where the canonical hemisphere flips nearby.
        if fk.ee_pose[0].quaternion[0] < 1e-3 {
            return;
        }
        let g = kinematics_gradient(model, &fk, &gs, &[gp], &[gq]).unwrap();
        let h = 1e-6;
        for i in 0..model.dof {
            let mut qp = q.clone();
            let mut qm = q.clone();
            qp[i] += h;
            qm[i] -= h;
            let fd = (probe(model, &qp, &gs, &gp, &gq) - probe(model, &qm, &gs, &gp, &gq)) / (2.0 * h);
            let tol = 1e-5f64.max(1e-4 * fd.abs());
            assert!((g[i] - fd).abs() < tol, "joint {i}: {} vs {fd}", g[i]);
        }
    }

    #[test]
    fn planar_gradient_matches_finite_difference() {
        let model = planar_arm();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            check_gradient(&model, &mut rng);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn gradient_matches_finite_difference(seed in any::<u64>(), n in 1usize..8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let model = random_model(&mut rng, n);
            check_gradient(&model, &mut rng);
        }

        #[test]
        fn batch_rows_are_independent(seed in any::<u64>(), b in 1usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let model = random_model(&mut rng, 5);
            let q: Vec<f64> = (0..b * model.dof).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let all = forward_kinematics(&model, &q).unwrap();
            for i in 0..b {
                let one = forward_kinematics(&model, &q[i * model.dof..(i + 1) * model.dof]).unwrap();
                prop_assert_eq!(one.spheres(0), all.spheres(i));
                prop_assert_eq!(one.ee_pose[0], all.ee_pose[i]);
            }
        }

        #[test]
        fn ee_quaternion_is_canonical(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let model = random_model(&mut rng, 6);
            let q: Vec<f64> = (0..model.dof).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let p = forward_kinematics(&model, &q).unwrap().ee_pose[0];
            let n: f64 = p.quaternion.iter().map(|v| v * v).sum::<f64>().sqrt();
            prop_assert!(p.quaternion[0] >= 0.0);
            prop_assert!((n - 1.0).abs() < 1e-9);
        }
    }
}
