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
//! Sphere collision costs against the box world and between robot spheres.
//!
//! Penetration is positive inside an obstacle. A sphere starts paying cost
//! once its clearance drops below the activation distance `eta`.

use nalgebra::{Matrix3, Vector3};

use crate::world::{Obb, WorldModel};

/// Activation-smoothed penetration and its derivative.
#[inline]
pub fn smooth_distance_with_grad(d: f64, eta: f64) -> (f64, f64) {
    if d > 0.0 {
        (d + 0.5 * eta, 1.0)
    } else if d > -eta {
        let t = d + eta;
        (0.5 / eta * t * t, t / eta)
    } else {
        (0.0, 0.0)
    }
}

#[inline]
pub fn smooth_collision_distance(d: f64, eta: f64) -> f64 {
    smooth_distance_with_grad(d, eta).0
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CollisionQueryResult {
    pub cost: f64,
    pub gradient: Vector3<f64>,
}

fn box_sphere_cost(o: &Obb, center: &Vector3<f64>, radius: f64, eta: f64) -> (f64, Vector3<f64>) {
    if o.distance_lower_bound(center) - radius >= eta {
        return (0.0, Vector3::zeros());
    }
    let pd = o.signed_distance(center);
    let (c, dc) = smooth_distance_with_grad(radius - pd.distance, eta);
    (c, -dc * pd.normal)
}

/// Discrete world cost of one sphere, summed over boxes.
pub fn sphere_collision_cost(
    world: &WorldModel,
    center: &Vector3<f64>,
    radius: f64,
    eta: f64,
    weight: f64,
) -> CollisionQueryResult {
    let mut out = CollisionQueryResult::default();
    if radius < 0.0 {
        return out;
    }
    for o in world.enabled() {
        let (c, g) = box_sphere_cost(o, center, radius, eta);
        out.cost += c;
        out.gradient += g;
    }
    out.cost *= weight;
    out.gradient *= weight;
    out
}

/// Minimum clearance of a sphere over enabled boxes (negative when
/// penetrating). Returns `None` for an empty world.
pub fn sphere_clearance(world: &WorldModel, center: &Vector3<f64>, radius: f64) -> Option<f64> {
    let mut best: Option<f64> = None;
    for o in world.enabled() {
        let lb = o.distance_lower_bound(center) - radius;
        if best.map_or(false, |b| lb >= b) {
            continue;
        }
        let d = o.signed_distance(center).distance - radius;
        best = Some(best.map_or(d, |b: f64| b.min(d)));
    }
    best
}

/// Swept cost for the sphere at `cur` with gradients for all three samples.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SweptQueryResult {
    pub cost: f64,
    pub grad_prev: Vector3<f64>,
    pub grad_cur: Vector3<f64>,
    pub grad_next: Vector3<f64>,
}

#[derive(Clone, Copy)]
pub struct SweepParams {
    pub eta: f64,
    pub weight: f64,
    pub speed_dt: f64,
    pub steps: usize,
}

// Jump-marches from `cur` toward `other` up to the segment midpoint,
// accumulating cost at every sample inside the activation band.
#[allow(clippy::too_many_arguments)]
fn march(
    o: &Obb,
    cur: &Vector3<f64>,
    other: &Vector3<f64>,
    radius: f64,
    eta: f64,
    steps: usize,
    jump: f64,
    d_jump_cur: Vector3<f64>,
    acc: &mut SweptQueryResult,
    g_other: &mut Vector3<f64>,
) {
    let seg = other - cur;
    let len = seg.norm();
    if len <= 0.0 {
        return;
    }
    let u = seg / len;
    let half = 0.5 * len;
    let proj = (Matrix3::identity() - u * u.transpose()) / len;
    let mut j = jump;
    let mut dj_cur = d_jump_cur;
    let mut dj_other = Vector3::zeros();
    for _ in 0..steps {
        if j >= half {
            break;
        }
        let p = cur + j * u;
        let jac_cur = Matrix3::identity() + u * dj_cur.transpose() - j * proj;
        let jac_other = u * dj_other.transpose() + j * proj;
        let pd = o.signed_distance(&p);
        let pen = radius - pd.distance;
        if pen > -eta {
            let (c, dc) = smooth_distance_with_grad(pen, eta);
            let gp = -dc * pd.normal;
            acc.cost += c;
            acc.grad_cur += jac_cur.transpose() * gp;
            *g_other += jac_other.transpose() * gp;
            j += radius + eta;
        } else {
            j += pd.distance - radius;
            dj_cur += jac_cur.transpose() * pd.normal;
            dj_other += jac_other.transpose() * pd.normal;
        }
    }
}

/// Continuous collision cost of the sphere at `cur`, scaled by its speed.
///
/// Pass `prev == cur` (or `next == cur`) at trajectory ends to disable that
/// sweep direction.
pub fn swept_collision_cost(
    world: &WorldModel,
    prev: &Vector3<f64>,
    cur: &Vector3<f64>,
    next: &Vector3<f64>,
    radius: f64,
    params: &SweepParams,
) -> SweptQueryResult {
    let mut raw = SweptQueryResult::default();
    if radius < 0.0 {
        return raw;
    }
    let SweepParams { eta, weight, speed_dt, steps } = *params;
    let reach = 0.5 * (prev - cur).norm().max((next - cur).norm());
    let mut g_prev = Vector3::zeros();
    let mut g_next = Vector3::zeros();
    for o in world.enabled() {
        if o.distance_lower_bound(cur) - radius >= eta + reach {
            continue;
        }
        let pd = o.signed_distance(cur);
        let pen = radius - pd.distance;
        let (jump, dj) = if pen > -eta {
            let (c, dc) = smooth_distance_with_grad(pen, eta);
            raw.cost += c;
            raw.grad_cur -= dc * pd.normal;
            (radius + eta, Vector3::zeros())
        } else {
            (pd.distance - radius, pd.normal)
        };
        march(o, cur, prev, radius, eta, steps, jump, dj, &mut raw, &mut g_prev);
        march(o, cur, next, radius, eta, steps, jump, dj, &mut raw, &mut g_next);
    }
    raw.grad_prev = g_prev;
    raw.grad_next = g_next;
    if raw.cost == 0.0 {
        return SweptQueryResult::default();
    }

    let vel = (next - prev) / (2.0 * speed_dt);
    let speed = vel.norm();
    let d_speed = if speed > 0.0 {
        vel / (speed * 2.0 * speed_dt)
    } else {
        Vector3::zeros()
    };
    SweptQueryResult {
        cost: weight * speed * raw.cost,
        grad_prev: weight * (speed * raw.grad_prev - raw.cost * d_speed),
        grad_cur: weight * speed * raw.grad_cur,
        grad_next: weight * (speed * raw.grad_next + raw.cost * d_speed),
    }
}

/// Largest pairwise penetration between robot spheres, with its gradient
/// written into `grad` (which is overwritten). Returns the cost and the
/// index of the active pair.
pub fn self_collision_into(
    positions: &[Vector3<f64>],
    radii: &[f64],
    pairs: &[(usize, usize)],
    weight: f64,
    grad: &mut [Vector3<f64>],
) -> (f64, Option<usize>) {
    grad.iter_mut().for_each(|g| *g = Vector3::zeros());
    let mut best = 0.0;
    let mut arg = None;
    for (k, &(i, j)) in pairs.iter().enumerate() {
        let (ri, rj) = (radii[i], radii[j]);
        if ri <= 0.0 || rj <= 0.0 {
            continue;
        }
        let pen = ri + rj - (positions[i] - positions[j]).norm();
        if pen > best {
            best = pen;
            arg = Some(k);
        }
    }
    if let Some(k) = arg {
        let (i, j) = pairs[k];
        let diff = positions[i] - positions[j];
        let n = diff.norm();
        if n > 0.0 {
            let dir = diff / n;
            grad[i] -= weight * dir;
            grad[j] += weight * dir;
        }
    }
    (weight * best, arg)
}

pub fn self_collision_cost(
    positions: &[Vector3<f64>],
    radii: &[f64],
    pairs: &[(usize, usize)],
    weight: f64,
) -> (f64, Vec<Vector3<f64>>) {
    let mut grad = vec![Vector3::zeros(); positions.len()];
    let (c, _) = self_collision_into(positions, radii, pairs, weight, &mut grad);
    (c, grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{axis_angle_quaternion, Frame, Pose};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const ETA: f64 = 0.025;

    fn cube() -> WorldModel {
        WorldModel::new(vec![Obb::axis_aligned("c", [0.0; 3], [0.5; 3])])
    }

    fn thin_wall() -> WorldModel {
        WorldModel::new(vec![Obb::axis_aligned("w", [0.5, 0.0, 0.0], [0.005, 1.0, 1.0])])
    }

    fn params(speed_dt: f64) -> SweepParams {
        SweepParams { eta: ETA, weight: 1.0, speed_dt, steps: 4 }
    }

    #[test]
    fn smooth_distance_examples() {
        assert_eq!(smooth_collision_distance(-0.03, 0.03), 0.0);
        assert!((smooth_collision_distance(0.0, 0.03) - 0.015).abs() < 1e-15);
        assert!((smooth_collision_distance(0.1, 0.03) - 0.115).abs() < 1e-15);
    }

    #[test]
    fn smooth_distance_is_c1_at_branch_points() {
        let eta = 0.03;
        let h = 1e-8;
        for x in [0.0, -eta] {
            let left = (smooth_collision_distance(x, eta) - smooth_collision_distance(x - h, eta)) / h;
            let right = (smooth_collision_distance(x + h, eta) - smooth_collision_distance(x, eta)) / h;
            assert!((left - right).abs() < 1e-6, "{x}: {left} {right}");
        }
    }

    #[test]
    fn sphere_cost_examples() {
        let w = cube();
        let far = sphere_collision_cost(&w, &Vector3::new(2.0, 0.0, 0.0), 0.1, ETA, 5000.0);
        assert_eq!(far, CollisionQueryResult::default());
        let off = sphere_collision_cost(&w, &Vector3::zeros(), -1.0, ETA, 5000.0);
        assert_eq!(off.cost, 0.0);
        let inside = sphere_collision_cost(&w, &Vector3::new(0.2, 0.1, -0.05), 0.1, ETA, 5000.0);
        assert!(inside.cost > 0.0);
    }

    fn fd_sphere(w: &WorldModel, c: Vector3<f64>, r: f64) -> Vector3<f64> {
        let h = 1e-6;
        Vector3::from_fn(|i, _| {
            let mut cp = c;
            let mut cm = c;
            cp[i] += h;
            cm[i] -= h;
            (sphere_collision_cost(w, &cp, r, ETA, 1.0).cost - sphere_collision_cost(w, &cm, r, ETA, 1.0).cost) / (2.0 * h)
        })
    }

    fn assert_close(a: &Vector3<f64>, b: &Vector3<f64>) {
        for i in 0..3 {
            let tol = 1e-6f64.max(1e-4 * b[i].abs());
            assert!((a[i] - b[i]).abs() < tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn sphere_gradient_matches_finite_difference() {
        let w = cube();
        let c = Vector3::new(0.2, 0.1, -0.05);
        let g = sphere_collision_cost(&w, &c, 0.1, ETA, 1.0).gradient;
        assert_close(&g, &fd_sphere(&w, c, 0.1));
    }

    #[test]
    fn static_far_sphere_has_no_swept_cost() {
        let p = Vector3::new(3.0, 0.0, 0.0);
        assert_eq!(swept_collision_cost(&cube(), &p, &p, &p, 0.1, &params(0.1)).cost, 0.0);
    }

    #[test]
    fn sweep_detects_thin_wall_that_discrete_misses() {
        let w = thin_wall();
        let prev = Vector3::new(0.0, 0.0, 0.0);
        let next = Vector3::new(1.0, 0.0, 0.0);
        assert_eq!(sphere_collision_cost(&w, &prev, 0.05, ETA, 1.0).cost, 0.0);
        assert_eq!(sphere_collision_cost(&w, &next, 0.05, ETA, 1.0).cost, 0.0);
        // The trajectory sample at the start sweeps forward over the wall.
        let r = swept_collision_cost(&w, &prev, &prev, &next, 0.05, &params(0.1));
        assert!(r.cost > 0.0);
    }

    #[test]
    fn doubling_speed_dt_halves_cost() {
        let w = thin_wall();
        let (a, b, c) = (Vector3::new(0.3, 0.0, 0.0), Vector3::new(0.45, 0.0, 0.0), Vector3::new(0.7, 0.1, 0.0));
        let one = swept_collision_cost(&w, &a, &b, &c, 0.05, &params(0.1)).cost;
        let two = swept_collision_cost(&w, &a, &b, &c, 0.05, &params(0.2)).cost;
        assert!(one > 0.0);
        assert!((one - 2.0 * two).abs() <= 1e-12 * one);
    }

    fn swept_scalar(w: &WorldModel, x: &[Vector3<f64>; 3], r: f64) -> f64 {
        swept_collision_cost(w, &x[0], &x[1], &x[2], r, &params(0.1)).cost
    }

    fn check_swept_gradient(w: &WorldModel, x: [Vector3<f64>; 3], r: f64) {
        let res = swept_collision_cost(w, &x[0], &x[1], &x[2], r, &params(0.1));
        let grads = [res.grad_prev, res.grad_cur, res.grad_next];
        let h = 1e-6;
        for k in 0..3 {
            let fd = Vector3::from_fn(|i, _| {
                let mut xp = x;
                let mut xm = x;
                xp[k][i] += h;
                xm[k][i] -= h;
                (swept_scalar(w, &xp, r) - swept_scalar(w, &xm, r)) / (2.0 * h)
            });
            for i in 0..3 {
                let tol = 1e-6f64.max(1e-4 * fd[i].abs());
                assert!((grads[k][i] - fd[i]).abs() < tol, "sample {k} axis {i}: {} vs {}", grads[k][i], fd[i]);
            }
        }
    }

    #[test]
    fn swept_gradient_matches_finite_difference() {
        let w = WorldModel::new(vec![
            Obb::axis_aligned("a", [0.5, 0.0, 0.0], [0.05, 0.3, 0.3]),
            Obb::axis_aligned("b", [0.5, 0.5, 0.2], [0.1, 0.1, 0.1]),
        ]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut checked = 0;
        while checked < 100 {
            let jitter = |rng: &mut ChaCha8Rng| Vector3::new(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3));
            let cur = Vector3::new(0.5, 0.2, 0.1) + jitter(&mut rng);
            let x = [cur + jitter(&mut rng), cur, cur + jitter(&mut rng)];
            if swept_scalar(&w, &x, 0.05) == 0.0 {
                continue;
            }
            if near_branch(&w, &x, 0.05) {
                continue;
            }
            check_swept_gradient(&w, x, 0.05);
            checked += 1;
        }
    }

    // Finite differences are meaningless across a discrete switch in the
    // march; detect one by comparing one-sided slopes along a random line.
    fn near_branch(w: &WorldModel, x: &[Vector3<f64>; 3], r: f64) -> bool {
        let h = 1e-5;
        for k in 0..3 {
            for i in 0..3 {
                let mut xp = *x;
                let mut xm = *x;
                xp[k][i] += h;
                xm[k][i] -= h;
                let f0 = swept_scalar(w, x, r);
                let right = (swept_scalar(w, &xp, r) - f0) / h;
                let left = (f0 - swept_scalar(w, &xm, r)) / h;
                if (right - left).abs() > 1e-2 * (1.0 + right.abs()) {
                    return true;
                }
            }
        }
        false
    }

    #[test]
    fn self_collision_examples() {
        let r = [0.1, 0.1];
        let (c, _) = self_collision_cost(&[Vector3::zeros(), Vector3::new(0.3, 0.0, 0.0)], &r, &[(0, 1)], 1.0);
        assert_eq!(c, 0.0);
        let (c, g) = self_collision_cost(&[Vector3::zeros(), Vector3::new(0.15, 0.0, 0.0)], &r, &[(0, 1)], 1.0);
        assert!((c - 0.05).abs() < 1e-15);
        assert_eq!(g[0], Vector3::new(1.0, 0.0, 0.0));
        assert_eq!(g[1], Vector3::new(-1.0, 0.0, 0.0));
    }

    #[test]
    fn self_collision_ties_pick_lowest_pair() {
        // Pair penetrations 0.02, 0.05, 0.05.
        let x = [
            Vector3::new(0.0, 0.0, 0.0),
            Vector3::new(0.18, 0.0, 0.0),
            Vector3::new(0.0, 5.0, 0.0),
            Vector3::new(0.0, 5.15, 0.0),
            Vector3::new(0.0, 9.0, 0.0),
            Vector3::new(0.0, 9.15, 0.0),
        ];
        let radii = [0.1; 6];
        let pairs = [(0, 1), (2, 3), (4, 5)];
        let mut g = vec![Vector3::zeros(); 6];
        let (c, arg) = self_collision_into(&x, &radii, &pairs, 2.0, &mut g);
        assert!((c - 0.1).abs() < 1e-12);
        assert_eq!(arg, Some(1));
        assert!(g[2] != Vector3::zeros() && g[4] == Vector3::zeros());
    }

    #[test]
    fn self_collision_skips_disabled_spheres() {
        let (c, _) = self_collision_cost(&[Vector3::zeros(), Vector3::zeros()], &[0.0, 0.1], &[(0, 1)], 1.0);
        assert_eq!(c, 0.0);
    }

    proptest! {
        #[test]
        fn smooth_distance_is_monotone(a in -0.2f64..0.2, b in -0.2f64..0.2) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(smooth_collision_distance(lo, ETA) <= smooth_collision_distance(hi, ETA));
        }

        #[test]
        fn sphere_cost_gradient_matches_fd(x in -0.7f64..0.7, y in -0.7f64..0.7, z in -0.7f64..0.7) {
            let w = WorldModel::new(vec![Obb::new("r", Pose::new(Vector3::new(0.1, 0.0, 0.0),
                axis_angle_quaternion(Vector3::new(1.0, 2.0, 0.5), 0.7)), Vector3::new(0.3, 0.2, 0.4)).unwrap()]);
            let c = Vector3::new(x, y, z);
            let res = sphere_collision_cost(&w, &c, 0.08, ETA, 1.0);
            prop_assert!(res.cost >= 0.0);
            if res.cost == 0.0 {
                prop_assert_eq!(res.gradient, Vector3::zeros());
            } else {
                // Skip the medial planes of the box where the nearest face switches.
                let local = w.obstacles[0].frame().inverse_transform_point(&c);
                let q = local.abs() - w.obstacles[0].half_extents;
                let mut s = [q.x, q.y, q.z];
                s.sort_by(|a, b| b.partial_cmp(a).unwrap());
                prop_assume!(s[0] > 0.0 || s[0] - s[1] > 1e-4);
                let fd = fd_sphere(&w, c, 0.08);
                for i in 0..3 {
                    let tol = 1e-6f64.max(1e-4 * fd[i].abs());
                    prop_assert!((res.gradient[i] - fd[i]).abs() < tol);
                }
            }
        }

        #[test]
        fn sweep_never_misses_discrete_collision(x in -0.7f64..0.7, y in -0.7f64..0.7, dx in 0.001f64..0.2) {
            let w = cube();
            let cur = Vector3::new(x, y, 0.0);
            let prev = cur - Vector3::new(dx, 0.0, 0.0);
            let next = cur + Vector3::new(dx, 0.0, 0.0);
            let discrete = sphere_collision_cost(&w, &cur, 0.05, ETA, 1.0).cost;
            let swept = swept_collision_cost(&w, &prev, &cur, &next, 0.05, &params(0.1)).cost;
            if swept == 0.0 {
                prop_assert_eq!(discrete, 0.0);
            }
        }

        #[test]
        fn costs_are_frame_invariant(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let w = WorldModel::new(vec![
                Obb::axis_aligned("a", [0.4, 0.0, 0.0], [0.05, 0.3, 0.3]),
                Obb::axis_aligned("b", [0.0, 0.4, 0.0], [0.2, 0.1, 0.2]),
            ]);
            let t = Frame::new(
                crate::geometry::quaternion_to_rotation(&axis_angle_quaternion(
                    Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), 1.0), rng.gen_range(-3.0..3.0))),
                Vector3::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
            );
            let wt = w.transformed(&t);
            let pts: Vec<Vector3<f64>> = (0..3).map(|_| Vector3::new(rng.gen_range(-0.1..0.6), rng.gen_range(-0.1..0.6), rng.gen_range(-0.2..0.2))).collect();
            let moved: Vec<_> = pts.iter().map(|p| t.transform_point(p)).collect();
            let a = sphere_collision_cost(&w, &pts[1], 0.06, ETA, 1.0).cost;
            let b = sphere_collision_cost(&wt, &moved[1], 0.06, ETA, 1.0).cost;
            prop_assert!((a - b).abs() < 1e-9);
            let a = swept_collision_cost(&w, &pts[0], &pts[1], &pts[2], 0.06, &params(0.1)).cost;
            let b = swept_collision_cost(&wt, &moved[0], &moved[1], &moved[2], 0.06, &params(0.1)).cost;
            prop_assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()));
            let r = [0.2; 3];
            let pairs = [(0, 1), (0, 2), (1, 2)];
            let a = self_collision_cost(&pts, &r, &pairs, 1.0).0;
            let b = self_collision_cost(&moved, &r, &pairs, 1.0).0;
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}
