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
//! Batched sampling-based geometric planner.
//!
//! The planner grows one undirected graph for a batch of start/goal
//! queries. It first tries direct and retract-assisted connections, then
//! repeatedly samples new nodes inside the informed ellipsoid of an
//! unsolved query and steers its nearest graph vertices toward them.
//! Steering truncates each edge at the first invalid waypoint, so every
//! vertex in the graph is valid.

use std::collections::{HashMap, HashSet};
use std::time::Instant;

use nalgebra::Vector3;
use petgraph::graph::{NodeIndex, UnGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collision::sphere_clearance;
use crate::error::{Error, Result};
use crate::geometry::Frame;
use crate::halton::Halton;
use crate::kinematics::forward_single;
use crate::robot::RobotModel;
use crate::world::WorldModel;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    /// Steering resolution in weighted joint-space distance.
    pub resolution: f64,
    /// Per-joint distance weights; empty means all ones.
    pub joint_weights: Vec<f64>,
    pub k_explore: usize,
    pub p_explore: usize,
    pub k_refine: usize,
    pub p_refine: usize,
    pub eta_explore: f64,
    /// Initial informed-region size as a multiple of the start-goal distance.
    pub c_default: f64,
    /// Iteration budget for the sampling loop.
    pub g_max: usize,
    /// Sampling iterations to keep refining after every query is solved.
    pub g_refine: usize,
    /// Required world clearance in meters for a configuration to be valid.
    pub safety_margin: f64,
    pub seed: u64,
    /// Wall-clock budget in seconds. Runs that hit it are not reproducible.
    pub time_budget: Option<f64>,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            resolution: 0.1,
            joint_weights: Vec::new(),
            k_explore: 16,
            p_explore: 512,
            k_refine: 8,
            p_refine: 256,
            eta_explore: 0.1,
            c_default: 1.5,
            g_max: 10,
            g_refine: 0,
            safety_margin: 0.005,
            seed: 0,
            time_budget: None,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self, dof: usize) -> Result<()> {
        if !(self.resolution > 0.0) {
            return Err(Error::Invalid("planner resolution must be positive".into()));
        }
        if !(self.eta_explore > 0.0) {
            return Err(Error::Invalid("planner growth factor must be positive".into()));
        }
        if !(self.c_default >= 1.0) {
            return Err(Error::Invalid("c_default must be at least 1".into()));
        }
        if self.k_explore == 0 || self.p_explore == 0 || self.k_refine == 0 || self.p_refine == 0 {
            return Err(Error::Invalid("planner batch sizes must be positive".into()));
        }
        if !self.joint_weights.is_empty()
            && (self.joint_weights.len() != dof || self.joint_weights.iter().any(|w| !(*w > 0.0)))
        {
            return Err(Error::Invalid(format!(
                "joint_weights must hold {dof} positive values"
            )));
        }
        if self.safety_margin < 0.0 || !self.safety_margin.is_finite() {
            return Err(Error::Invalid("safety_margin must be nonnegative".into()));
        }
        Ok(())
    }

    pub fn weights(&self, dof: usize) -> Vec<f64> {
        if self.joint_weights.is_empty() {
            vec![1.0; dof]
        } else {
            self.joint_weights.clone()
        }
    }
}

pub fn weighted_distance(a: &[f64], b: &[f64], w: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .zip(w)
        .map(|((x, y), w)| (w * (x - y)).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Discrete validity test for single configurations.
pub struct ValidityChecker<'a> {
    pub robot: &'a RobotModel,
    pub world: &'a WorldModel,
    /// World clearance a configuration must exceed.
    pub margin: f64,
}

struct CheckScratch {
    links: Vec<Frame>,
    spheres: Vec<Vector3<f64>>,
}

impl<'a> ValidityChecker<'a> {
    pub fn new(robot: &'a RobotModel, world: &'a WorldModel, margin: f64) -> Self {
        Self { robot, world, margin }
    }

    fn scratch(&self) -> CheckScratch {
        CheckScratch {
            links: vec![Frame::identity(); self.robot.num_links()],
            spheres: vec![Vector3::zeros(); self.robot.num_spheres()],
        }
    }

    fn check(&self, q: &[f64], s: &mut CheckScratch) -> bool {
        if !q.iter().all(|v| v.is_finite()) || !self.robot.within_position_limits(q) {
            return false;
        }
        forward_single(self.robot, q, &mut s.links, &mut s.spheres);
        let spheres = &self.robot.spheres;
        for (p, sp) in s.spheres.iter().zip(spheres) {
            if sp.radius <= 0.0 {
                continue;
            }
            if let Some(c) = sphere_clearance(self.world, p, sp.radius) {
                if c <= self.margin {
                    return false;
                }
            }
        }
        self.robot.self_pairs.iter().all(|&(i, j)| {
            let (ri, rj) = (spheres[i].radius, spheres[j].radius);
            ri <= 0.0 || rj <= 0.0 || (s.spheres[i] - s.spheres[j]).norm() >= ri + rj
        })
    }

    pub fn is_valid(&self, q: &[f64]) -> bool {
        self.check(q, &mut self.scratch())
    }

    /// Validity of every row of a `K×D` array.
    pub fn mask(&self, configs: &[f64]) -> Vec<bool> {
        let d = self.robot.dof;
        configs
            .par_chunks(d)
            .map_init(|| self.scratch(), |s, q| self.check(q, s))
            .collect()
    }

    /// Index of the first invalid waypoint among `n + 1` evenly spaced
    /// points from `a` to `b` (inclusive), or `None` if all are valid.
    pub fn first_invalid(&self, a: &[f64], b: &[f64], n: usize) -> Option<usize> {
        let mut s = self.scratch();
        let mut q = vec![0.0; a.len()];
        for k in 0..=n {
            let t = k as f64 / n.max(1) as f64;
            for ((x, lo), hi) in q.iter_mut().zip(a).zip(b) {
                *x = lo + t * (hi - lo);
            }
            if !self.check(&q, &mut s) {
                return Some(k);
            }
        }
        None
    }

    /// Checks the straight segment at spacing no larger than `step`.
    pub fn segment_valid(&self, a: &[f64], b: &[f64], w: &[f64], step: f64) -> bool {
        let n = (weighted_distance(a, b, w) / step).ceil() as usize;
        self.first_invalid(a, b, n.max(1)).is_none()
    }
}

/// Validity of each row of `configs` (`K×D`): within position limits, free
/// of self-collision, and with world clearance above `margin`.
pub fn mask_samples(robot: &RobotModel, world: &WorldModel, configs: &[f64], margin: f64) -> Vec<bool> {
    ValidityChecker::new(robot, world, margin).mask(configs)
}

/// Undirected roadmap with joint-space distance edge weights.
#[derive(Clone, Debug, Default)]
pub struct PlanGraph {
    pub vertices: Vec<Vec<f64>>,
    graph: UnGraph<(), f64>,
}

impl PlanGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, q: Vec<f64>) -> usize {
        self.vertices.push(q);
        self.graph.add_node(()).index()
    }

    pub fn add_edge(&mut self, a: usize, b: usize, weight: f64) {
        debug_assert!(weight > 0.0);
        self.graph.update_edge(NodeIndex::new(a), NodeIndex::new(b), weight);
    }

    pub fn remove_edge(&mut self, a: usize, b: usize) {
        if let Some(e) = self.graph.find_edge(NodeIndex::new(a), NodeIndex::new(b)) {
            self.graph.remove_edge(e);
        }
    }

    pub fn edge_weight(&self, a: usize, b: usize) -> Option<f64> {
        self.graph
            .find_edge(NodeIndex::new(a), NodeIndex::new(b))
            .map(|e| self.graph[e])
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    /// Indices of the `k` vertices nearest to `q`, nearest first, with
    /// ties broken by index.
    pub fn nearest(&self, q: &[f64], k: usize, w: &[f64]) -> Vec<usize> {
        let mut d: Vec<(f64, usize)> = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (weighted_distance(q, v, w), i))
            .collect();
        let k = k.min(d.len());
        if k == 0 {
            return Vec::new();
        }
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < d.len() {
            d.select_nth_unstable_by(k - 1, cmp);
            d.truncate(k);
        }
        d.sort_by(cmp);
        d.into_iter().map(|(_, i)| i).collect()
    }
}

/// Dijkstra over edge weights. Returns `None` if `b` is unreachable.
pub fn shortest_path(graph: &PlanGraph, a: usize, b: usize) -> Option<(Vec<usize>, f64)> {
    let (len, path) = petgraph::algo::astar(
        &graph.graph,
        NodeIndex::new(a),
        |n| n.index() == b,
        |e| *e.weight(),
        |_| 0.0,
    )?;
    Some((path.into_iter().map(|n| n.index()).collect(), len))
}

/// One steering request: from graph vertex `src` toward `dst`.
#[derive(Clone, Debug)]
pub struct SteerEdge {
    pub src: usize,
    pub dst: Vec<f64>,
    /// Set when `dst` is already a graph vertex, so a full connection
    /// reuses it instead of adding a duplicate.
    pub dst_vertex: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SteerOutcome {
    /// Vertex at the end of the added edge, if any edge was added.
    pub vertex: Option<usize>,
    pub reached: bool,
}

/// Shared step count for a batch: enough intervals that the longest edge
/// is discretized at `resolution`.
pub fn shared_steps(graph: &PlanGraph, edges: &[SteerEdge], w: &[f64], resolution: f64) -> usize {
    edges
        .iter()
        .map(|e| (weighted_distance(&graph.vertices[e.src], &e.dst, w) / resolution).ceil() as usize + 1)
        .max()
        .unwrap_or(1)
}

/// Steers a batch of edges with a common discretization.
///
/// Waypoints are scanned per edge up to the first invalid one; this gives
/// the same result as masking the whole batch at once and taking the
/// first false entry.
pub fn parallel_steer(
    graph: &mut PlanGraph,
    checker: &ValidityChecker,
    edges: &[SteerEdge],
    w: &[f64],
    resolution: f64,
) -> Vec<SteerOutcome> {
    let n = shared_steps(graph, edges, w, resolution);
    steer_with_steps(graph, checker, edges, w, n)
}

/// [`parallel_steer`] with an explicit step count.
pub fn steer_with_steps(
    graph: &mut PlanGraph,
    checker: &ValidityChecker,
    edges: &[SteerEdge],
    w: &[f64],
    n: usize,
) -> Vec<SteerOutcome> {
    let ends: Vec<usize> = edges
        .par_iter()
        .map(|e| match checker.first_invalid(&graph.vertices[e.src], &e.dst, n) {
            None => n,
            Some(k) => k.saturating_sub(1),
        })
        .collect();
    let mut reached_targets: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut out = Vec::with_capacity(edges.len());
    for (e, &h) in edges.iter().zip(&ends) {
        if h == 0 {
            out.push(SteerOutcome { vertex: None, reached: false });
            continue;
        }
        let src = graph.vertices[e.src].clone();
        let reached = h == n;
        let q: Vec<f64> = if reached {
            e.dst.clone()
        } else {
            let t = h as f64 / n as f64;
            src.iter().zip(&e.dst).map(|(a, b)| a + t * (b - a)).collect()
        };
        let d = weighted_distance(&src, &q, w);
        if d <= 0.0 {
            out.push(SteerOutcome { vertex: None, reached });
            continue;
        }
        let v = if reached {
            // Edges that reach the same target share its vertex.
            let key: Vec<u64> = e.dst.iter().map(|x| x.to_bits()).collect();
            match e.dst_vertex.or_else(|| reached_targets.get(&key).copied()) {
                Some(v) => v,
                None => {
                    let v = graph.add_vertex(q);
                    reached_targets.insert(key, v);
                    v
                }
            }
        } else {
            graph.add_vertex(q)
        };
        if v != e.src {
            graph.add_edge(e.src, v, d);
        }
        out.push(SteerOutcome { vertex: Some(v), reached });
    }
    out
}

pub fn path_length(path: &[Vec<f64>], w: &[f64]) -> f64 {
    path.windows(2).map(|p| weighted_distance(&p[0], &p[1], w)).sum()
}

/// Greedily replaces runs of waypoints with direct segments that pass the
/// dense check, until no further shortcut exists.
pub fn shortcut_path(checker: &ValidityChecker, path: &[Vec<f64>], w: &[f64], step: f64) -> Vec<Vec<f64>> {
    let mut path = path.to_vec();
    loop {
        let mut changed = false;
        let mut i = 0;
        while i + 2 < path.len() {
            let hit = (i + 2..path.len())
                .rev()
                .find(|&j| checker.segment_valid(&path[i], &path[j], w, step));
            if let Some(j) = hit {
                path.drain(i + 1..j);
                changed = true;
            }
            i += 1;
        }
        if !changed {
            return path;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanOutcome {
    pub found: bool,
    pub path: Vec<Vec<f64>>,
    pub length: f64,
    pub diagnostic: Option<String>,
}

impl PlanOutcome {
    fn failed(msg: impl Into<String>) -> Self {
        Self { found: false, path: Vec::new(), length: f64::INFINITY, diagnostic: Some(msg.into()) }
    }
}

struct Query {
    start: usize,
    goal: usize,
    c_min: f64,
    c_max: f64,
    best: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, Default)]
pub struct PlanStats {
    pub iterations: usize,
    pub vertices: usize,
    pub edges: usize,
}

pub struct Planner<'a> {
    pub checker: ValidityChecker<'a>,
    pub config: PlannerConfig,
    pub graph: PlanGraph,
    weights: Vec<f64>,
    verified: HashSet<(usize, usize)>,
    pub stats: PlanStats,
}

impl<'a> Planner<'a> {
    pub fn new(robot: &'a RobotModel, world: &'a WorldModel, config: PlannerConfig) -> Result<Self> {
        config.validate(robot.dof)?;
        Ok(Self {
            checker: ValidityChecker::new(robot, world, config.safety_margin),
            weights: config.weights(robot.dof),
            config,
            graph: PlanGraph::new(),
            verified: HashSet::new(),
            stats: PlanStats::default(),
        })
    }

    fn dense_step(&self) -> f64 {
        self.config.resolution / 10.0
    }

    /// Shortest path that also passes the dense segment check. Edges that
    /// fail it are removed from the graph and the query is repeated.
    fn verified_path(&mut self, a: usize, b: usize) -> Option<Vec<Vec<f64>>> {
        loop {
            let (ids, _) = shortest_path(&self.graph, a, b)?;
            let mut ok = true;
            for p in ids.windows(2) {
                let key = (p[0].min(p[1]), p[0].max(p[1]));
                if self.verified.contains(&key) {
                    continue;
                }
                let (u, v) = (&self.graph.vertices[p[0]], &self.graph.vertices[p[1]]);
                if self.checker.segment_valid(u, v, &self.weights, self.dense_step()) {
                    self.verified.insert(key);
                } else {
                    self.graph.remove_edge(p[0], p[1]);
                    ok = false;
                    break;
                }
            }
            if ok {
                return Some(ids.iter().map(|&i| self.graph.vertices[i].clone()).collect());
            }
        }
    }

    fn update_query(&mut self, q: usize, queries: &mut [Query]) {
        let (s, g) = (queries[q].start, queries[q].goal);
        if let Some(path) = self.verified_path(s, g) {
            let short = shortcut_path(&self.checker, &path, &self.weights, self.dense_step());
            let len = path_length(&short, &self.weights);
            let better = queries[q]
                .best
                .as_ref()
                .map_or(true, |b| len < path_length(b, &self.weights));
            if better {
                queries[q].c_max = len.max(queries[q].c_min);
                queries[q].best = Some(short);
            }
        }
    }

    /// Informed samples for one query: Halton points in the bounding box of
    /// the ellipsoid with foci at start and goal, kept if inside it.
    fn sample_informed(&self, halton: &mut Halton, q: &Query, count: usize) -> Vec<Vec<f64>> {
        let robot = self.checker.robot;
        let w = &self.weights;
        let a = &self.graph.vertices[q.start];
        let b = &self.graph.vertices[q.goal];
        let d = robot.dof;
        let major = 0.5 * q.c_max;
        let minor = 0.5 * (q.c_max * q.c_max - q.c_min * q.c_min).max(0.0).sqrt();
        let mut lo = robot.lower_limits();
        let mut hi = robot.upper_limits();
        for k in 0..d {
            // Extent of the ellipsoid along axis k, in weighted units.
            let u = if q.c_min > 0.0 { w[k] * (b[k] - a[k]) / q.c_min } else { 0.0 };
            let half = (major * major * u * u + minor * minor * (1.0 - u * u)).max(0.0).sqrt() / w[k];
            let mid = 0.5 * (a[k] + b[k]);
            lo[k] = lo[k].max(mid - half);
            hi[k] = hi[k].min(mid + half);
        }
        let mut out = Vec::with_capacity(count);
        for _ in 0..count.saturating_mul(64) {
            if out.len() == count {
                break;
            }
            let p = halton.next_in_box(&lo, &hi);
            if weighted_distance(&p, a, w) + weighted_distance(&p, b, w) <= q.c_max {
                out.push(p);
            }
        }
        out
    }

    /// Plans for each start/goal row pair. Both arrays are `B×D`.
    pub fn plan(&mut self, starts: &[f64], goals: &[f64]) -> Result<Vec<PlanOutcome>> {
        let robot = self.checker.robot;
        let d = robot.dof;
        if starts.len() != goals.len() || starts.len() % d != 0 {
            return Err(Error::Invalid(format!(
                "starts and goals must both be B×{d}, got {} and {} values",
                starts.len(),
                goals.len()
            )));
        }
        let clock = Instant::now();
        let w = self.weights.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        let mut halton = Halton::shifted(d, &mut rng);

        let mut outcomes: Vec<Option<PlanOutcome>> = vec![None; starts.len() / d];
        let mut queries: Vec<Option<Query>> = Vec::new();
        for (b, (s, g)) in starts.chunks(d).zip(goals.chunks(d)).enumerate() {
            if !self.checker.is_valid(s) {
                outcomes[b] = Some(PlanOutcome::failed("invalid start configuration"));
                queries.push(None);
                continue;
            }
            if !self.checker.is_valid(g) {
                outcomes[b] = Some(PlanOutcome::failed("invalid goal configuration"));
                queries.push(None);
                continue;
            }
            let start = self.graph.add_vertex(s.to_vec());
            let goal = self.graph.add_vertex(g.to_vec());
            let c_min = weighted_distance(s, g, &w);
            queries.push(Some(Query { start, goal, c_min, c_max: self.config.c_default * c_min, best: None }));
        }

        // Heuristic phase: direct and retract-assisted connections.
        let retract = robot.retract_config.clone();
        let retract_vertex = if self.checker.is_valid(&retract) {
            Some(self.graph.add_vertex(retract.clone()))
        } else {
            None
        };
        let mut edges = Vec::new();
        for q in queries.iter().flatten() {
            let (s, g) = (q.start, q.goal);
            let sv = self.graph.vertices[s].clone();
            let gv = self.graph.vertices[g].clone();
            edges.push(SteerEdge { src: s, dst: gv.clone(), dst_vertex: Some(g) });
            edges.push(SteerEdge { src: g, dst: sv.clone(), dst_vertex: Some(s) });
            if let Some(r) = retract_vertex {
                edges.push(SteerEdge { src: s, dst: retract.clone(), dst_vertex: Some(r) });
                edges.push(SteerEdge { src: r, dst: sv, dst_vertex: Some(s) });
                edges.push(SteerEdge { src: g, dst: retract.clone(), dst_vertex: Some(r) });
                edges.push(SteerEdge { src: r, dst: gv, dst_vertex: Some(g) });
            }
        }
        parallel_steer(&mut self.graph, &self.checker, &edges, &w, self.config.resolution);
        let mut solved_queries: Vec<Query> = Vec::new();
        let mut slot = Vec::new();
        for (b, q) in queries.into_iter().enumerate() {
            if let Some(q) = q {
                slot.push(b);
                solved_queries.push(q);
            }
        }
        let mut queries = solved_queries;
        for i in 0..queries.len() {
            self.update_query(i, &mut queries);
        }
        let direct = |q: &Query| q.best.as_ref().map_or(false, |p| p.len() <= 2);

        let mut p_n = self.config.p_explore as f64;
        let mut k_n = self.config.k_explore as f64;
        let mut iter = 0;
        while iter < self.config.g_max {
            let unsolved: Vec<usize> = (0..queries.len()).filter(|&i| queries[i].best.is_none()).collect();
            let refine: Vec<usize> = (0..queries.len()).filter(|&i| !direct(&queries[i])).collect();
            let pool = if !unsolved.is_empty() {
                unsolved
            } else if iter < self.config.g_refine && !refine.is_empty() {
                refine
            } else {
                break;
            };
            if let Some(limit) = self.config.time_budget {
                if clock.elapsed().as_secs_f64() > limit {
                    break;
                }
            }
            let id = pool[rng.gen_range(0..pool.len())];
            let exploring = queries[id].best.is_none();
            let (count, k) = if exploring {
                (p_n.round() as usize, k_n.round() as usize)
            } else {
                (self.config.p_refine, self.config.k_refine)
            };
            let samples = self.sample_informed(&mut halton, &queries[id], count);
            let flat: Vec<f64> = samples.concat();
            let mask = self.checker.mask(&flat);
            let valid: Vec<Vec<f64>> = samples.into_iter().zip(mask).filter(|(_, m)| *m).map(|(s, _)| s).collect();
            let near: Vec<Vec<usize>> = valid.par_iter().map(|s| self.graph.nearest(s, k, &w)).collect();
            let edges: Vec<SteerEdge> = valid
                .iter()
                .zip(&near)
                .flat_map(|(s, nn)| nn.iter().map(move |&src| SteerEdge { src, dst: s.clone(), dst_vertex: None }))
                .collect();
            if !edges.is_empty() {
                parallel_steer(&mut self.graph, &self.checker, &edges, &w, self.config.resolution);
            }
            iter += 1;
            for i in 0..queries.len() {
                self.update_query(i, &mut queries);
            }
            if queries[id].best.is_none() {
                let q = &mut queries[id];
                q.c_max += q.c_min * self.config.eta_explore;
                p_n += self.config.eta_explore * p_n;
                k_n += self.config.eta_explore * k_n;
            }
        }
        self.stats = PlanStats { iterations: iter, vertices: self.graph.vertex_count(), edges: self.graph.edge_count() };

        for (q, b) in queries.into_iter().zip(slot) {
            outcomes[b] = Some(match q.best {
                Some(path) => PlanOutcome { length: path_length(&path, &w), found: true, path, diagnostic: None },
                None => PlanOutcome::failed("no path found within the planner budget"),
            });
        }
        Ok(outcomes.into_iter().map(|o| o.expect("every query has an outcome")).collect())
    }
}

/// Plans each start/goal row pair on a fresh graph.
pub fn plan(
    robot: &RobotModel,
    world: &WorldModel,
    starts: &[f64],
    goals: &[f64],
    config: &PlannerConfig,
) -> Result<Vec<PlanOutcome>> {
    Planner::new(robot, world, config.clone())?.plan(starts, goals)
}
