//! Obstacle fields, distance queries, simulated lidar and a grid A* planner.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("invalid obstacle {index}: {reason}")]
    InvalidObstacle { index: usize, reason: String },
    #[error("invalid world: {0}")]
    Invalid(String),
    #[error("{0} lies within the required clearance of an obstacle")]
    Blocked(&'static str),
    #[error("no collision-free path between start and goal")]
    Unreachable,
    #[error("path needs at least one waypoint")]
    EmptyPath,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Obstacle {
    /// Axis-aligned box.
    Box { min: Vector3<f64>, max: Vector3<f64> },
    Sphere { center: Vector3<f64>, radius: f64 },
    /// Occupies `{p : normal . p >= offset}`; `normal` need not be unit length.
    HalfSpace { normal: Vector3<f64>, offset: f64 },
}

impl Obstacle {
    pub fn aabb(min: [f64; 3], max: [f64; 3]) -> Self {
        Obstacle::Box { min: Vector3::from(min), max: Vector3::from(max) }
    }

    /// Unit-normal form of a half-space.
    fn plane(&self) -> Option<(Vector3<f64>, f64)> {
        match self {
            Obstacle::HalfSpace { normal, offset } => {
                let n = normal.norm();
                Some((normal / n, offset / n))
            }
            _ => None,
        }
    }

    fn validate(&self, index: usize) -> Result<(), WorldError> {
        let bad = |reason: &str| Err(WorldError::InvalidObstacle { index, reason: reason.into() });
        match self {
            Obstacle::Box { min, max } => {
                if !(min.iter().chain(max.iter()).all(|v| v.is_finite())) {
                    return bad("non-finite corner");
                }
                if (0..3).any(|i| min[i] > max[i]) {
                    return bad("min exceeds max");
                }
            }
            Obstacle::Sphere { center, radius } => {
                if !center.iter().all(|v| v.is_finite()) || !radius.is_finite() {
                    return bad("non-finite sphere");
                }
                if *radius < 0.0 {
                    return bad("negative radius");
                }
            }
            Obstacle::HalfSpace { normal, offset } => {
                if !normal.iter().all(|v| v.is_finite()) || !offset.is_finite() {
                    return bad("non-finite half-space");
                }
                if normal.norm() < 1e-12 {
                    return bad("zero normal");
                }
            }
        }
        Ok(())
    }

    /// Euclidean distance from `p` to the obstacle, zero inside.
    pub fn distance(&self, p: &Vector3<f64>) -> f64 {
        match self {
            Obstacle::Box { min, max } => {
                let mut s = 0.0;
                for i in 0..3 {
                    let d = (min[i] - p[i]).max(p[i] - max[i]).max(0.0);
                    s += d * d;
                }
                s.sqrt()
            }
            Obstacle::Sphere { center, radius } => ((p - center).norm() - radius).max(0.0),
            Obstacle::HalfSpace { .. } => {
                let (n, b) = self.plane().unwrap();
                (b - n.dot(p)).max(0.0)
            }
        }
    }

    /// First intersection parameter `t >= 0` of the ray `o + t d` (unit `d`).
    pub fn ray_hit(&self, o: &Vector3<f64>, d: &Vector3<f64>) -> Option<f64> {
        match self {
            Obstacle::Box { min, max } => {
                let (mut t0, mut t1) = (0.0f64, f64::INFINITY);
                for i in 0..3 {
                    if d[i].abs() < 1e-300 {
                        if o[i] < min[i] || o[i] > max[i] {
                            return None;
                        }
                        continue;
                    }
                    let inv = 1.0 / d[i];
                    let (mut a, mut b) = ((min[i] - o[i]) * inv, (max[i] - o[i]) * inv);
                    if a > b {
                        std::mem::swap(&mut a, &mut b);
                    }
                    t0 = t0.max(a);
                    t1 = t1.min(b);
                    if t0 > t1 {
                        return None;
                    }
                }
                Some(t0)
            }
            Obstacle::Sphere { center, radius } => {
                let oc = o - center;
                let b = oc.dot(d);
                let c = oc.norm_squared() - radius * radius;
                if c <= 0.0 {
                    return Some(0.0);
                }
                let disc = b * b - c;
                if disc < 0.0 || b > 0.0 {
                    return None;
                }
                Some(-b - disc.sqrt())
            }
            Obstacle::HalfSpace { .. } => {
                let (n, off) = self.plane().unwrap();
                let s = off - n.dot(o);
                if s <= 0.0 {
                    return Some(0.0);
                }
                let nd = n.dot(d);
                if nd <= 0.0 {
                    return None;
                }
                Some(s / nd)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min: Vector3<f64>,
    pub max: Vector3<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct World {
    pub obstacles: Vec<Obstacle>,
    /// Region searched by the planner.
    pub bounds: Bounds,
    /// Sensing range; distances are saturated here.
    pub d_max: f64,
}

impl World {
    pub fn new(obstacles: Vec<Obstacle>, bounds: Bounds, d_max: f64) -> Result<Self, WorldError> {
        let w = Self { obstacles, bounds, d_max };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<(), WorldError> {
        for (i, o) in self.obstacles.iter().enumerate() {
            o.validate(i)?;
        }
        if !(self.d_max > 0.0 && self.d_max.is_finite()) {
            return Err(WorldError::Invalid("d_max must be positive".into()));
        }
        if (0..3).any(|i| self.bounds.min[i] >= self.bounds.max[i]) {
            return Err(WorldError::Invalid("empty bounds".into()));
        }
        Ok(())
    }

    /// Distance to the nearest obstacle, saturated at `d_max`.
    pub fn sensed_distance(&self, p: &Vector3<f64>) -> f64 {
        self.obstacles.iter().map(|o| o.distance(p)).fold(self.d_max, f64::min)
    }

    pub fn raycast(&self, o: &Vector3<f64>, d: &Vector3<f64>) -> Option<f64> {
        let mut best: Option<f64> = None;
        for ob in &self.obstacles {
            if let Some(t) = ob.ray_hit(o, d) {
                if t <= self.d_max && best.map_or(true, |b| t < b) {
                    best = Some(t);
                }
            }
        }
        best
    }
}

/// Simulated lidar with a fixed body-frame ray pattern.
#[derive(Clone, Debug)]
pub struct Lidar {
    directions: Vec<Vector3<f64>>,
}

impl Lidar {
    /// Rays spread over the sphere with a Fibonacci lattice.
    pub fn fibonacci(n: usize) -> Self {
        let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
        let directions = (0..n)
            .map(|i| {
                let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
                let r = (1.0 - z * z).max(0.0).sqrt();
                let a = golden * i as f64;
                Vector3::new(r * a.cos(), r * a.sin(), z)
            })
            .collect();
        Self { directions }
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// World-frame hit points seen from `position` with attitude `rotation`.
    pub fn scan(&self, world: &World, position: &Vector3<f64>, rotation: &Matrix3<f64>) -> Vec<Vector3<f64>> {
        self.directions
            .iter()
            .filter_map(|b| {
                let d = rotation * b;
                world.raycast(position, &d).map(|t| position + d * t)
            })
            .collect()
    }
}

/// Distance from `g` to the closest scan point, saturated at `d_max`.
pub fn scan_distance(points: &[Vector3<f64>], g: &Vector3<f64>, d_max: f64) -> f64 {
    points.iter().map(|y| (g - y).norm()).fold(d_max, f64::min)
}

/// Piecewise-linear path parameterized by normalized arc length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferencePath {
    waypoints: Vec<Vector3<f64>>,
    /// Cumulative normalized arc length at each waypoint.
    knots: Vec<f64>,
    length: f64,
}

impl ReferencePath {
    pub fn new(mut waypoints: Vec<Vector3<f64>>) -> Result<Self, WorldError> {
        if waypoints.is_empty() {
            return Err(WorldError::EmptyPath);
        }
        if waypoints.iter().any(|w| !w.iter().all(|v| v.is_finite())) {
            return Err(WorldError::Invalid("non-finite waypoint".into()));
        }
        if waypoints.len() == 1 {
            waypoints.push(waypoints[0]);
        }
        let mut cum = vec![0.0];
        for w in waypoints.windows(2) {
            cum.push(cum.last().unwrap() + (w[1] - w[0]).norm());
        }
        let length = *cum.last().unwrap();
        let knots = if length > 0.0 {
            cum.iter().map(|c| c / length).collect()
        } else {
            (0..waypoints.len()).map(|i| if i + 1 == waypoints.len() { 1.0 } else { 0.0 }).collect()
        };
        Ok(Self { waypoints, knots, length })
    }

    pub fn waypoints(&self) -> &[Vector3<f64>] {
        &self.waypoints
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn start(&self) -> Vector3<f64> {
        self.waypoints[0]
    }

    pub fn end(&self) -> Vector3<f64> {
        *self.waypoints.last().unwrap()
    }

    pub fn eval(&self, sigma: f64) -> Vector3<f64> {
        let s = sigma.clamp(0.0, 1.0);
        if self.length == 0.0 {
            return self.waypoints[0];
        }
        let i = match self.knots.iter().position(|&k| k >= s) {
            Some(0) => return self.waypoints[0],
            Some(i) => i,
            None => return self.end(),
        };
        let (k0, k1) = (self.knots[i - 1], self.knots[i]);
        if k1 <= k0 {
            return self.waypoints[i];
        }
        let t = (s - k0) / (k1 - k0);
        self.waypoints[i - 1] + (self.waypoints[i] - self.waypoints[i - 1]) * t
    }

    /// Smallest sensed distance along the path, sampled every `step` metres.
    pub fn min_clearance(&self, world: &World, step: f64) -> f64 {
        let mut best = world.sensed_distance(&self.waypoints[0]);
        for w in self.waypoints.windows(2) {
            best = best.min(segment_clearance(world, &w[0], &w[1], step));
        }
        best
    }
}

fn segment_clearance(world: &World, a: &Vector3<f64>, b: &Vector3<f64>, step: f64) -> f64 {
    let n = (((b - a).norm() / step).ceil() as usize).max(1);
    (0..=n)
        .map(|i| world.sensed_distance(&(a + (b - a) * (i as f64 / n as f64))))
        .fold(f64::INFINITY, f64::min)
}

#[derive(Copy, Clone, PartialEq)]
struct Open {
    f: f64,
    idx: usize,
}

impl Eq for Open {}

impl Ord for Open {
    fn cmp(&self, other: &Self) -> Ordering {
        other.f.partial_cmp(&self.f).unwrap_or(Ordering::Equal).then_with(|| other.idx.cmp(&self.idx))
    }
}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// 26-connected A* over a regular grid of the world bounds. Cells closer than
/// `clearance` to an obstacle are blocked; the result is shortcut greedily
/// while keeping the clearance along every segment.
pub fn grid_astar(
    world: &World,
    start: &Vector3<f64>,
    goal: &Vector3<f64>,
    clearance: f64,
    cell: f64,
) -> Result<ReferencePath, WorldError> {
    if !(cell > 0.0) {
        return Err(WorldError::Invalid("cell size must be positive".into()));
    }
    if world.sensed_distance(start) < clearance {
        return Err(WorldError::Blocked("start"));
    }
    if world.sensed_distance(goal) < clearance {
        return Err(WorldError::Blocked("goal"));
    }
    if (start - goal).norm() == 0.0 {
        return ReferencePath::new(vec![*start]);
    }
    let check = cell / 4.0;
    if segment_clearance(world, start, goal, check) >= clearance {
        return ReferencePath::new(vec![*start, *goal]);
    }

    let lo = world.bounds.min;
    let dims: Vec<usize> = (0..3).map(|i| (((world.bounds.max[i] - lo[i]) / cell).floor() as usize) + 1).collect();
    let n = dims[0] * dims[1] * dims[2];
    let center = |idx: usize| {
        let (i, j, k) = (idx % dims[0], (idx / dims[0]) % dims[1], idx / (dims[0] * dims[1]));
        lo + Vector3::new(i as f64, j as f64, k as f64) * cell
    };
    let nearest = |p: &Vector3<f64>| -> Option<usize> {
        let mut c = [0usize; 3];
        for a in 0..3 {
            let f = ((p[a] - lo[a]) / cell).round();
            if f < 0.0 || f >= dims[a] as f64 {
                return None;
            }
            c[a] = f as usize;
        }
        Some(c[0] + dims[0] * (c[1] + dims[1] * c[2]))
    };
    let free: Vec<bool> = (0..n).map(|i| world.sensed_distance(&center(i)) >= clearance).collect();
    let s = nearest(start).filter(|&i| free[i]).ok_or(WorldError::Unreachable)?;
    let t = nearest(goal).filter(|&i| free[i]).ok_or(WorldError::Unreachable)?;

    let mut g = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut heap = BinaryHeap::new();
    let goal_c = center(t);
    g[s] = 0.0;
    heap.push(Open { f: (center(s) - goal_c).norm(), idx: s });
    let mut found = false;
    while let Some(Open { idx, .. }) = heap.pop() {
        if closed[idx] {
            continue;
        }
        if idx == t {
            found = true;
            break;
        }
        closed[idx] = true;
        let (i, j, k) = (idx % dims[0], (idx / dims[0]) % dims[1], idx / (dims[0] * dims[1]));
        for dk in -1i64..=1 {
            for dj in -1i64..=1 {
                for di in -1i64..=1 {
                    if di == 0 && dj == 0 && dk == 0 {
                        continue;
                    }
                    let (ni, nj, nk) = (i as i64 + di, j as i64 + dj, k as i64 + dk);
                    if ni < 0 || nj < 0 || nk < 0 || ni >= dims[0] as i64 || nj >= dims[1] as i64 || nk >= dims[2] as i64 {
                        continue;
                    }
                    let nb = ni as usize + dims[0] * (nj as usize + dims[1] * nk as usize);
                    if !free[nb] || closed[nb] {
                        continue;
                    }
                    let step = cell * ((di * di + dj * dj + dk * dk) as f64).sqrt();
                    let cand = g[idx] + step;
                    if cand < g[nb] {
                        g[nb] = cand;
                        parent[nb] = idx;
                        heap.push(Open { f: cand + (center(nb) - goal_c).norm(), idx: nb });
                    }
                }
            }
        }
    }
    if !found {
        return Err(WorldError::Unreachable);
    }
    let mut cells = vec![t];
    while *cells.last().unwrap() != s {
        cells.push(parent[*cells.last().unwrap()]);
    }
    cells.reverse();
    let mut raw = vec![*start];
    raw.extend(cells.iter().map(|&c| center(c)));
    raw.push(*goal);

    // greedy line-of-sight shortcut
    let mut out = vec![raw[0]];
    let mut i = 0;
    while i + 1 < raw.len() {
        let mut j = raw.len() - 1;
        while j > i + 1 && segment_clearance(world, &raw[i], &raw[j], check) < clearance {
            j -= 1;
        }
        out.push(raw[j]);
        i = j;
    }
    ReferencePath::new(out)
}

/// Layout parameters for a procedurally generated warehouse.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WarehouseSpec {
    pub length: f64,
    pub width: f64,
    pub height: f64,
    /// Number of shelf rows along x.
    pub rows: usize,
    pub shelf_depth: f64,
    pub shelf_height: f64,
    /// Gap left open at alternating ends of each shelf row.
    pub aisle_gap: f64,
    /// Extra pillars as `(x, y, radius)` spheres stacked to the ceiling.
    pub pillars: Vec<[f64; 3]>,
    pub d_max: f64,
}

impl Default for WarehouseSpec {
    fn default() -> Self {
        Self {
            length: 24.0,
            width: 14.0,
            height: 5.0,
            rows: 3,
            shelf_depth: 1.0,
            shelf_height: 4.0,
            aisle_gap: 3.5,
            pillars: vec![],
            d_max: 30.0,
        }
    }
}

/// Floor, ceiling, walls and rows of shelves that force a serpentine route.
pub fn warehouse(spec: &WarehouseSpec) -> Result<World, WorldError> {
    let (l, w, h) = (spec.length, spec.width, spec.height);
    let t = 0.3;
    let mut obs = vec![
        Obstacle::HalfSpace { normal: Vector3::new(0.0, 0.0, -1.0), offset: 0.0 },
        Obstacle::HalfSpace { normal: Vector3::new(0.0, 0.0, 1.0), offset: h },
        Obstacle::aabb([-t, -t, 0.0], [0.0, w + t, h]),
        Obstacle::aabb([l, -t, 0.0], [l + t, w + t, h]),
        Obstacle::aabb([-t, -t, 0.0], [l + t, 0.0, h]),
        Obstacle::aabb([-t, w, 0.0], [l + t, w + t, h]),
    ];
    let spacing = l / (spec.rows + 1) as f64;
    for r in 0..spec.rows {
        let x = spacing * (r + 1) as f64;
        let (y0, y1) = if r % 2 == 0 { (0.0, w - spec.aisle_gap) } else { (spec.aisle_gap, w) };
        obs.push(Obstacle::aabb(
            [x - spec.shelf_depth / 2.0, y0, 0.0],
            [x + spec.shelf_depth / 2.0, y1, spec.shelf_height],
        ));
    }
    for p in &spec.pillars {
        let n = ((h / p[2]).ceil() as usize).max(1);
        for k in 0..=n {
            obs.push(Obstacle::Sphere { center: Vector3::new(p[0], p[1], h * k as f64 / n as f64), radius: p[2] });
        }
    }
    let bounds = Bounds { min: Vector3::new(0.0, 0.0, 0.0), max: Vector3::new(l, w, h) };
    World::new(obs, bounds, spec.d_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_box_world() -> World {
        World::new(
            vec![Obstacle::aabb([0.0; 3], [1.0; 3])],
            Bounds { min: Vector3::new(-5.0, -5.0, -5.0), max: Vector3::new(5.0, 5.0, 5.0) },
            30.0,
        )
        .unwrap()
    }

    #[test]
    fn box_distance_example() {
        let w = unit_box_world();
        assert!((w.sensed_distance(&Vector3::new(2.0, 0.5, 0.5)) - 1.0).abs() < 1e-12);
        assert_eq!(w.sensed_distance(&Vector3::new(0.5, 0.5, 0.5)), 0.0);
    }

    #[test]
    fn empty_world_saturates() {
        let w = World::new(vec![], unit_box_world().bounds, 7.0).unwrap();
        assert_eq!(w.sensed_distance(&Vector3::zeros()), 7.0);
        assert!(Lidar::fibonacci(64).scan(&w, &Vector3::zeros(), &Matrix3::identity()).is_empty());
    }

    #[test]
    fn rejects_bad_obstacles() {
        let b = unit_box_world().bounds;
        let s = Obstacle::Sphere { center: Vector3::zeros(), radius: -1.0 };
        assert!(World::new(vec![s], b, 10.0).is_err());
        let h = Obstacle::HalfSpace { normal: Vector3::zeros(), offset: 1.0 };
        assert!(World::new(vec![h], b, 10.0).is_err());
    }

    #[test]
    fn halfspace_distance_uses_unit_normal() {
        let h = Obstacle::HalfSpace { normal: Vector3::new(-1.0, 0.0, 1.0), offset: 1.1 };
        let p = Vector3::new(0.0, 0.0, 0.0);
        assert!((h.distance(&p) - 1.1 / 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(h.distance(&Vector3::new(0.0, 0.0, 2.0)), 0.0);
    }

    #[test]
    fn ray_hits_box_face() {
        let w = unit_box_world();
        let t = w.raycast(&Vector3::new(3.0, 0.5, 0.5), &Vector3::new(-1.0, 0.0, 0.0)).unwrap();
        assert!((t - 2.0).abs() < 1e-12);
        assert!(w.raycast(&Vector3::new(3.0, 0.5, 0.5), &Vector3::new(1.0, 0.0, 0.0)).is_none());
    }

    #[test]
    fn lidar_points_lie_on_surfaces() {
        let w = unit_box_world();
        let p = Vector3::new(3.0, 0.4, 0.3);
        let pts = Lidar::fibonacci(512).scan(&w, &p, &Matrix3::identity());
        assert!(!pts.is_empty());
        for y in &pts {
            assert!(w.sensed_distance(y) < 1e-9);
        }
        let d = scan_distance(&pts, &p, w.d_max);
        assert!(d >= w.sensed_distance(&p) - 1e-9);
    }

    #[test]
    fn path_eval_example() {
        let path = ReferencePath::new(vec![Vector3::zeros(), Vector3::new(10.0, 0.0, 0.0)]).unwrap();
        assert!((path.eval(0.2) - Vector3::new(2.0, 0.0, 0.0)).norm() < 1e-12);
        assert_eq!(path.eval(1.5), path.end());
    }

    #[test]
    fn astar_start_equals_goal() {
        let w = unit_box_world();
        let p = Vector3::new(3.0, 3.0, 3.0);
        let path = grid_astar(&w, &p, &p, 0.5, 0.5).unwrap();
        assert_eq!(path.length(), 0.0);
        assert_eq!(path.eval(0.7), p);
    }

    #[test]
    fn astar_goes_around_box() {
        let w = World::new(
            vec![Obstacle::aabb([-0.5, -3.0, -3.0], [0.5, 3.0, 3.0])],
            Bounds { min: Vector3::new(-5.0, -5.0, -5.0), max: Vector3::new(5.0, 5.0, 5.0) },
            30.0,
        )
        .unwrap();
        let (a, b) = (Vector3::new(-3.0, 0.0, 0.0), Vector3::new(3.0, 0.0, 0.0));
        let path = grid_astar(&w, &a, &b, 0.8, 0.25).unwrap();
        for v in path.waypoints() {
            assert!(w.sensed_distance(v) >= 0.8);
        }
        assert!(path.min_clearance(&w, 0.05) >= 0.8 - 1e-9);
        assert!(path.length() > 6.0);
    }

    #[test]
    fn astar_reports_blocked_and_unreachable() {
        let w = unit_box_world();
        assert!(matches!(
            grid_astar(&w, &Vector3::new(0.5, 0.5, 0.5), &Vector3::new(3.0, 3.0, 3.0), 0.5, 0.5),
            Err(WorldError::Blocked("start"))
        ));
        let wall = World::new(
            vec![Obstacle::aabb([-0.5, -9.0, -9.0], [0.5, 9.0, 9.0])],
            Bounds { min: Vector3::new(-5.0, -5.0, -5.0), max: Vector3::new(5.0, 5.0, 5.0) },
            30.0,
        )
        .unwrap();
        assert!(matches!(
            grid_astar(&wall, &Vector3::new(-3.0, 0.0, 0.0), &Vector3::new(3.0, 0.0, 0.0), 0.5, 0.5),
            Err(WorldError::Unreachable)
        ));
    }

    #[test]
    fn warehouse_is_valid() {
        let w = warehouse(&WarehouseSpec::default()).unwrap();
        assert!(w.sensed_distance(&Vector3::new(1.5, 1.5, 1.5)) > 1.0);
    }

    proptest! {
        #[test]
        fn box_distance_is_one_lipschitz(a in proptest::array::uniform3(-4.0f64..4.0), b in proptest::array::uniform3(-4.0f64..4.0)) {
            let w = unit_box_world();
            let (a, b) = (Vector3::from(a), Vector3::from(b));
            prop_assert!((w.sensed_distance(&a) - w.sensed_distance(&b)).abs() <= (a - b).norm() + 1e-12);
        }

        #[test]
        fn sphere_distance_matches_closed_form(c in proptest::array::uniform3(-2.0f64..2.0), r in 0.0f64..2.0, p in proptest::array::uniform3(-5.0f64..5.0)) {
            let o = Obstacle::Sphere { center: Vector3::from(c), radius: r };
            let p = Vector3::from(p);
            prop_assert!((o.distance(&p) - ((p - Vector3::from(c)).norm() - r).max(0.0)).abs() < 1e-12);
        }
    }
}
