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
//! Rigid transforms, poses and quaternion conversion.
//!
//! Quaternions are stored as `[w, x, y, z]` and always returned in the
//! canonical hemisphere (`w >= 0`).

use nalgebra::{Matrix3, Matrix4, Vector3};
use serde::{Deserialize, Serialize};

pub type Quat = [f64; 4];

/// Rigid transform stored as a rotation block and a translation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame {
    pub rot: Matrix3<f64>,
    pub pos: Vector3<f64>,
}

impl Default for Frame {
    fn default() -> Self {
        Self::identity()
    }
}

impl Frame {
    pub fn identity() -> Self {
        Self {
            rot: Matrix3::identity(),
            pos: Vector3::zeros(),
        }
    }

    pub fn new(rot: Matrix3<f64>, pos: Vector3<f64>) -> Self {
        Self { rot, pos }
    }

    pub fn from_translation(x: f64, y: f64, z: f64) -> Self {
        Self::new(Matrix3::identity(), Vector3::new(x, y, z))
    }

    /// Roll-pitch-yaw (fixed axes x, y, z) plus translation, as used by URDF origins.
    pub fn from_xyz_rpy(xyz: [f64; 3], rpy: [f64; 3]) -> Self {
        let (sr, cr) = rpy[0].sin_cos();
        let (sp, cp) = rpy[1].sin_cos();
        let (sy, cy) = rpy[2].sin_cos();
        let rot = Matrix3::new(
            cy * cp,
            cy * sp * sr - sy * cr,
            cy * sp * cr + sy * sr,
            sy * cp,
            sy * sp * sr + cy * cr,
            sy * sp * cr - cy * sr,
            -sp,
            cp * sr,
            cp * cr,
        );
        Self::new(rot, Vector3::from(xyz))
    }

    pub fn from_homogeneous(m: &Matrix4<f64>) -> Self {
        Self::new(
            m.fixed_view::<3, 3>(0, 0).into_owned(),
            m.fixed_view::<3, 1>(0, 3).into_owned(),
        )
    }

    pub fn to_homogeneous(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rot);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.pos);
        m
    }

    #[inline]
    pub fn compose(&self, other: &Frame) -> Frame {
        Frame {
            rot: self.rot * other.rot,
            pos: self.rot * other.pos + self.pos,
        }
    }

    #[inline]
    pub fn transform_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rot * p + self.pos
    }

    #[inline]
    pub fn inverse_transform_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rot.tr_mul(&(p - self.pos))
    }

    pub fn inverse(&self) -> Frame {
        let rt = self.rot.transpose();
        Frame {
            rot: rt,
            pos: -(rt * self.pos),
        }
    }

    /// Largest deviation of `RᵀR` from identity.
    pub fn orthonormality_error(&self) -> f64 {
        (self.rot.transpose() * self.rot - Matrix3::identity()).amax()
    }
}

/// Position plus unit quaternion `[w, x, y, z]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: [f64; 3],
    pub quaternion: Quat,
}

impl Pose {
    pub fn new(position: Vector3<f64>, quaternion: Quat) -> Self {
        Self {
            position: [position.x, position.y, position.z],
            quaternion: canonicalize(normalize(quaternion)),
        }
    }

    /// Parses `[x, y, z, qw, qx, qy, qz]`.
    pub fn from_array(v: [f64; 7]) -> Self {
        Self::new(Vector3::new(v[0], v[1], v[2]), [v[3], v[4], v[5], v[6]])
    }

    pub fn to_array(&self) -> [f64; 7] {
        let p = self.position;
        let q = self.quaternion;
        [p[0], p[1], p[2], q[0], q[1], q[2], q[3]]
    }

    pub fn from_frame(frame: &Frame) -> Self {
        Self {
            position: [frame.pos.x, frame.pos.y, frame.pos.z],
            quaternion: rotation_to_quaternion(&frame.rot),
        }
    }

    pub fn to_frame(&self) -> Frame {
        Frame::new(quaternion_to_rotation(&self.quaternion), self.pos())
    }

    #[inline]
    pub fn pos(&self) -> Vector3<f64> {
        Vector3::from(self.position)
    }

    pub fn is_finite(&self) -> bool {
        self.position.iter().chain(self.quaternion.iter()).all(|v| v.is_finite())
    }
}

pub fn normalize(q: Quat) -> Quat {
    let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n == 0.0 {
        return [1.0, 0.0, 0.0, 0.0];
    }
    [q[0] / n, q[1] / n, q[2] / n, q[3] / n]
}

#[inline]
pub fn canonicalize(q: Quat) -> Quat {
    if q[0] < 0.0 {
        [-q[0], -q[1], -q[2], -q[3]]
    } else {
        q
    }
}

#[inline]
pub fn quat_dot(a: &Quat, b: &Quat) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

pub fn quaternion_to_rotation(q: &Quat) -> Matrix3<f64> {
    let [w, x, y, z] = *q;
    Matrix3::new(
        1.0 - 2.0 * (y * y + z * z),
        2.0 * (x * y - w * z),
        2.0 * (x * z + w * y),
        2.0 * (x * y + w * z),
        1.0 - 2.0 * (x * x + z * z),
        2.0 * (y * z - w * x),
        2.0 * (x * z - w * y),
        2.0 * (y * z + w * x),
        1.0 - 2.0 * (x * x + y * y),
    )
}

/// Rotation about a unit axis.
pub fn axis_angle_quaternion(axis: Vector3<f64>, angle: f64) -> Quat {
    let a = axis.normalize();
    let (s, c) = (0.5 * angle).sin_cos();
    canonicalize([c, a.x * s, a.y * s, a.z * s])
}

// One Shepperd branch: the quaternion component computed from the square root
// (`main`), the diagonal signs entering the radicand, and for each remaining
// component the pair of off-diagonal entries and the sign joining them.
struct Branch {
    main: usize,
    diag_sign: [f64; 3],
    others: [(usize, (usize, usize), (usize, usize), f64); 3],
}

const BRANCHES: [Branch; 4] = [
    Branch {
        main: 0,
        diag_sign: [1.0, 1.0, 1.0],
        others: [
            (1, (2, 1), (1, 2), -1.0),
            (2, (0, 2), (2, 0), -1.0),
            (3, (1, 0), (0, 1), -1.0),
        ],
    },
    Branch {
        main: 1,
        diag_sign: [1.0, -1.0, -1.0],
        others: [
            (0, (2, 1), (1, 2), -1.0),
            (2, (0, 1), (1, 0), 1.0),
            (3, (0, 2), (2, 0), 1.0),
        ],
    },
    Branch {
        main: 2,
        diag_sign: [-1.0, 1.0, -1.0],
        others: [
            (0, (0, 2), (2, 0), -1.0),
            (1, (0, 1), (1, 0), 1.0),
            (3, (1, 2), (2, 1), 1.0),
        ],
    },
    Branch {
        main: 3,
        diag_sign: [-1.0, -1.0, 1.0],
        others: [
            (0, (1, 0), (0, 1), -1.0),
            (1, (0, 2), (2, 0), 1.0),
            (2, (1, 2), (2, 1), 1.0),
        ],
    },
];

fn select_branch(m: &Matrix3<f64>) -> &'static Branch {
    let tr = m[(0, 0)] + m[(1, 1)] + m[(2, 2)];
    let candidates = [tr, m[(0, 0)], m[(1, 1)], m[(2, 2)]];
    let mut best = 0;
    for i in 1..4 {
        if candidates[i] > candidates[best] {
            best = i;
        }
    }
    &BRANCHES[best]
}

fn raw_quaternion(m: &Matrix3<f64>, b: &Branch) -> (Quat, f64) {
    let a = 1.0
        + b.diag_sign[0] * m[(0, 0)]
        + b.diag_sign[1] * m[(1, 1)]
        + b.diag_sign[2] * m[(2, 2)];
    let s = 2.0 * a.max(0.0).sqrt();
    let mut q = [0.0; 4];
    q[b.main] = 0.25 * s;
    for &(k, p, r, sign) in &b.others {
        q[k] = (m[p] + sign * m[r]) / s;
    }
    (q, s)
}

/// Shepperd's method: branch on the largest of the trace and the diagonal.
pub fn rotation_to_quaternion(m: &Matrix3<f64>) -> Quat {
    let b = select_branch(m);
    canonicalize(raw_quaternion(m, b).0)
}

/// Pulls a quaternion cotangent back through [`rotation_to_quaternion`],
/// returning the cotangent with respect to the entries of the rotation block.
pub fn rotation_to_quaternion_vjp(m: &Matrix3<f64>, g_quat: &Quat) -> Matrix3<f64> {
    let b = select_branch(m);
    let (q, s) = raw_quaternion(m, b);
    let sign = if q[0] < 0.0 { -1.0 } else { 1.0 };
    let g: Quat = [
        sign * g_quat[0],
        sign * g_quat[1],
        sign * g_quat[2],
        sign * g_quat[3],
    ];
    let root = 0.5 * s;
    let mut out = Matrix3::zeros();
    if root <= 0.0 {
        return out;
    }
    // d s / d m_ii = sign_i / sqrt(a)
    let mut ds = g[b.main] * 0.25;
    for &(k, p, r, sgn) in &b.others {
        out[p] += g[k] / s;
        out[r] += sgn * g[k] / s;
        ds -= g[k] * q[k] / s;
    }
    for i in 0..3 {
        out[(i, i)] += ds * b.diag_sign[i] / root;
    }
    out
}

/// Geodesic-free orientation error used across the crate: `1 - |<a, b>|`.
#[inline]
pub fn quaternion_error(a: &Quat, b: &Quat) -> f64 {
    (1.0 - quat_dot(a, b).abs()).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn random_rotation(seed: u64) -> Matrix3<f64> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let q = normalize([
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ]);
        quaternion_to_rotation(&q)
    }

    #[test]
    fn quaternion_round_trip() {
        for seed in 0..200 {
            let m = random_rotation(seed);
            let q = rotation_to_quaternion(&m);
            assert!(q[0] >= 0.0);
            let n: f64 = q.iter().map(|v| v * v).sum();
            assert_relative_eq!(n, 1.0, epsilon = 1e-12);
            assert_relative_eq!(quaternion_to_rotation(&q), m, epsilon = 1e-12);
        }
    }

    #[test]
    fn half_turns_hit_every_branch() {
        for axis in [Vector3::x(), Vector3::y(), Vector3::z()] {
            let q = axis_angle_quaternion(axis, std::f64::consts::PI);
            let m = quaternion_to_rotation(&q);
            let back = rotation_to_quaternion(&m);
            assert!(quaternion_error(&q, &back) < 1e-12);
        }
    }

    #[test]
    fn conversion_vjp_matches_finite_differences() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for seed in 0..50 {
            let m = random_rotation(100 + seed);
            let g: Quat = [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ];
            let analytic = rotation_to_quaternion_vjp(&m, &g);
            let h = 1e-7;
            for r in 0..3 {
                for c in 0..3 {
                    let mut mp = m;
                    let mut mm = m;
                    mp[(r, c)] += h;
                    mm[(r, c)] -= h;
                    // keep the same branch as the unperturbed matrix
                    let b = select_branch(&m);
                    let (qp, _) = raw_quaternion(&mp, b);
                    let (qm, _) = raw_quaternion(&mm, b);
                    let (q0, _) = raw_quaternion(&m, b);
                    let sign = if q0[0] < 0.0 { -1.0 } else { 1.0 };
                    let fd = sign * (quat_dot(&g, &qp) - quat_dot(&g, &qm)) / (2.0 * h);
                    assert_relative_eq!(analytic[(r, c)], fd, epsilon = 1e-6);
                }
            }
        }
    }

    #[test]
    fn rpy_matches_axis_products() {
        let f = Frame::from_xyz_rpy([0.0; 3], [0.3, -0.2, 1.1]);
        let rz = quaternion_to_rotation(&axis_angle_quaternion(Vector3::z(), 1.1));
        let ry = quaternion_to_rotation(&axis_angle_quaternion(Vector3::y(), -0.2));
        let rx = quaternion_to_rotation(&axis_angle_quaternion(Vector3::x(), 0.3));
        assert_relative_eq!(f.rot, rz * ry * rx, epsilon = 1e-12);
    }
}
