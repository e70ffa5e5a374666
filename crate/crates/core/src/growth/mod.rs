//! Disk growing: vertices are placed one at a time at distance exactly `d`
//! from two existing vertices, on some splat, while keeping every other
//! vertex at least `d` away.

pub mod graph;
pub mod queue;

use serde::Serialize;

pub use graph::{Border, BorderChange, Corner, GrowthGraph, GrowthVertex, UNBOUNDED_WINDOW};
pub use queue::{CandidateQueue, Priority, VertexCandidate};

use crate::boxgrid::BoxGrid;
use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::geometry::{candidate_circle, circle_splat_intersection, segments_cross_2d, Plane, UnitVec3, Vec3, REL_EPS};

pub const DEFAULT_WINDOW: usize = 8;

/// A stale candidate is re-queued at most this many times.
pub const MAX_DEMOTIONS: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthParams {
    pub d: f64,
    pub window: usize,
}

impl GrowthParams {
    pub fn new(d: f64) -> Self {
        GrowthParams {
            d,
            window: DEFAULT_WINDOW,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rejection {
    TooClose,
    Crossing,
    NoBoxNormal,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct GrowthStats {
    pub spawned: u64,
    pub popped: u64,
    pub inserted: u64,
    pub rejected_too_close: u64,
    pub rejected_crossing: u64,
    pub rejected_no_normal: u64,
    pub requeued: u64,
}

/// Closest point on any splat disk to `q`, with the splat index. Ties go to
/// the lower index.
pub fn project_to_closest_splat(q: Vec3, cloud: &PointCloud) -> (Vec3, usize) {
    let mut best = (f64::INFINITY, q, 0);
    for i in 0..cloud.len() {
        let p = cloud.splat(i).closest_point(q);
        let dist = p.distance_squared(q);
        if dist < best.0 {
            best = (dist, p, i);
        }
    }
    (best.1, best.2)
}

/// The growth loop's full state.
#[derive(Debug, Clone)]
pub struct GrowthState<'a> {
    cloud: &'a PointCloud,
    grid: BoxGrid,
    params: GrowthParams,
    graph: GrowthGraph,
    queue: CandidateQueue,
    /// Per splat, the vertices within `d` of its disk, ascending.
    splat_vertices: Vec<Vec<u32>>,
    stats: GrowthStats,
}

#[derive(Debug, Clone)]
pub struct GrowthResult {
    pub graph: GrowthGraph,
    pub grid: BoxGrid,
    pub stats: GrowthStats,
}

/// Projects both starting positions onto their closest splats, adds them as
/// edge-less vertices and queues the first candidates. Fails when the
/// projections are not between `d` and `2d` apart.
pub fn initialize<'a>(q: Vec3, q2: Vec3, cloud: &'a PointCloud, grid: BoxGrid, params: GrowthParams) -> Result<GrowthState<'a>> {
    let mut state = GrowthState::new(cloud, grid, params)?;
    let (p, _) = project_to_closest_splat(q, cloud);
    let (p2, _) = project_to_closest_splat(q2, cloud);
    let d = params.d;
    let dist = p.distance(p2);
    if dist < d * (1.0 - REL_EPS) || dist > 2.0 * d * (1.0 + REL_EPS) {
        return Err(Error::Initialization(format!(
            "projected starting vertices are {dist} apart; they need to be between d = {d} and 2d apart, pick other starting points"
        )));
    }
    state.add_start_vertex(p);
    let v2 = state.add_start_vertex(p2);
    // Splats too small to reach from the start pair leave nothing to grow;
    // the run still completes, with just the two vertices.
    if state.spawn_candidates(v2) == 0 {
        log::warn!("no vertex can be placed next to the starting vertices; splats may be too small");
    }
    Ok(state)
}

impl<'a> GrowthState<'a> {
    /// Empty state; vertices are added with [`GrowthState::add_start_vertex`].
    pub fn new(cloud: &'a PointCloud, grid: BoxGrid, params: GrowthParams) -> Result<Self> {
        if cloud.splat_radii().is_none() {
            return Err(Error::Contract("growth needs splat radii".into()));
        }
        if (grid.edge_length() - params.d).abs() > REL_EPS * params.d {
            return Err(Error::Contract("box size differs from the edge length".into()));
        }
        Ok(GrowthState {
            cloud,
            grid,
            params,
            graph: GrowthGraph::new(),
            queue: CandidateQueue::new(),
            splat_vertices: vec![Vec::new(); cloud.len()],
            stats: GrowthStats::default(),
        })
    }

    pub fn graph(&self) -> &GrowthGraph {
        &self.graph
    }

    pub fn grid(&self) -> &BoxGrid {
        &self.grid
    }

    pub fn stats(&self) -> &GrowthStats {
        &self.stats
    }

    pub fn queue_len(&self) -> usize {
        self.queue.len()
    }

    /// Adds an edge-less vertex at `p` without spawning candidates. Its
    /// normal is the box normal, or the closest splat's normal when the box
    /// has none.
    pub fn add_start_vertex(&mut self, p: Vec3) -> u32 {
        let normal = self
            .grid
            .box_normal_at(p)
            .unwrap_or_else(|| self.cloud.normal(project_to_closest_splat(p, self.cloud).1));
        let v = self.graph.add_isolated_vertex(p, normal);
        self.grid.insert_vertex(v, p);
        self.attach(v, false);
        v
    }

    pub fn pop_candidate(&mut self) -> Option<VertexCandidate> {
        self.queue.pop()
    }

    pub fn push_candidate(&mut self, c: VertexCandidate) {
        self.queue.push(c);
    }

    pub fn classify_priority(&self, position: Vec3, a: u32, b: u32) -> Priority {
        let (da, db) = (self.graph.vertex(a).degree(), self.graph.vertex(b).degree());
        if da == 0 || db == 0 {
            return Priority::IsolatedParent;
        }
        if da == 1 || db == 1 {
            return Priority::LeafParent;
        }
        let ca = self.graph.corner(a, position);
        let cb = self.graph.corner(b, position);
        match self.graph.split_distance(&ca, &cb, self.params.window) {
            Some(k) => Priority::Split(k),
            None => Priority::Join,
        }
    }

    fn too_close(&self, p: Vec3) -> bool {
        let limit = self.params.d * (1.0 - REL_EPS);
        let mut hit = false;
        self.grid
            .for_each_vertex_near(p, self.params.d, |_, q| hit |= q.distance_squared(p) < limit * limit)
            .expect("radius d is always in range");
        hit
    }

    /// Distance rule first, then the projection check along the box normal.
    pub fn check_candidate(&self, c: &VertexCandidate) -> Result<(), Rejection> {
        if self.too_close(c.position) {
            return Err(Rejection::TooClose);
        }
        let Some(normal) = self.grid.box_normal_at(c.position) else {
            return Err(Rejection::NoBoxNormal);
        };
        if self.crosses_existing_edge(c, normal) {
            return Err(Rejection::Crossing);
        }
        Ok(())
    }

    pub fn candidate_is_valid(&self, c: &VertexCandidate) -> bool {
        self.check_candidate(c).is_ok()
    }

    /// Projects the prospective edges and all edges near the candidate onto
    /// the plane through it with the box normal. "Near" means an endpoint no
    /// farther than `2d` from the candidate and no farther than `d` from the
    /// plane.
    fn crosses_existing_edge(&self, c: &VertexCandidate, normal: UnitVec3) -> bool {
        let d = self.params.d;
        let plane = Plane::new(c.position, normal);
        let mut near = Vec::new();
        self.grid
            .for_each_vertex_near(c.position, 2.0 * d, |v, q| {
                if plane.signed_distance(q).abs() <= d {
                    near.push(v);
                }
            })
            .expect("radius 2d is always in range");
        let mut edges: Vec<(u32, u32)> = Vec::new();
        for &u in &near {
            for h in self.graph.vertex(u).outgoing() {
                let x = self.graph.target(h);
                edges.push((u.min(x), u.max(x)));
            }
        }
        edges.sort_unstable();
        edges.dedup();

        let pc = plane.project(c.position);
        let proj = |v: u32| plane.project(self.graph.vertex(v).position);
        let parents = [(c.parent_a, proj(c.parent_a)), (c.parent_b, proj(c.parent_b))];
        edges.iter().any(|&(u, x)| {
            let (pu, px) = (proj(u), proj(x));
            parents
                .iter()
                .any(|&(p, pp)| u != p && x != p && segments_cross_2d(pc, pp, pu, px))
        })
    }

    /// Adds the candidate and its two parent edges. The candidate must be
    /// valid.
    pub fn insert_vertex(&mut self, c: &VertexCandidate) -> u32 {
        let normal = self
            .grid
            .box_normal_at(c.position)
            .expect("valid candidates lie in boxes with a normal");
        let (v, _) = self.graph.insert_vertex(c.position, normal, c.parent_a, c.parent_b);
        self.grid.insert_vertex(v, c.position);
        self.stats.inserted += 1;
        v
    }

    /// Queues every circle/splat intersection between `v` and the vertices
    /// sharing a nearby splat with it. Returns the number queued.
    pub fn spawn_candidates(&mut self, v: u32) -> usize {
        self.attach(v, true)
    }

    /// Records `v` in the lists of all splats within `d`, spawning candidates
    /// with the vertices already listed there when `spawn` is set.
    fn attach(&mut self, v: u32, spawn: bool) -> usize {
        let d = self.params.d;
        let pos = self.graph.vertex(v).position;
        let mut found = Vec::new();
        for &s in self.grid.splats_near(pos) {
            let splat = self.cloud.splat(s as usize);
            if splat.distance_to(pos) > d * (1.0 + REL_EPS) {
                continue;
            }
            if spawn {
                for &u in &self.splat_vertices[s as usize] {
                    let other = self.graph.vertex(u).position;
                    let Ok(Some(circle)) = candidate_circle(other, pos, d) else {
                        continue;
                    };
                    for p in circle_splat_intersection(&circle, &splat) {
                        found.push((p, u, s));
                    }
                }
            }
            self.splat_vertices[s as usize].push(v);
        }
        let mut queued = 0;
        for (p, u, s) in found {
            // Vertices are never removed, so a candidate that is already too
            // close, or has no box normal, can be dropped right away.
            if self.too_close(p) || self.grid.box_normal_at(p).is_none() {
                continue;
            }
            let priority = self.classify_priority(p, u, v);
            self.queue.push(VertexCandidate {
                position: p,
                parent_a: u,
                parent_b: v,
                splat: s,
                priority,
                demotions: 0,
            });
            queued += 1;
        }
        self.stats.spawned += queued as u64;
        queued
    }

    /// Handles one queued candidate. Returns false once the queue is empty.
    pub fn step(&mut self) -> bool {
        let Some(mut c) = self.queue.pop() else {
            return false;
        };
        self.stats.popped += 1;
        match self.check_candidate(&c) {
            Err(Rejection::TooClose) => self.stats.rejected_too_close += 1,
            Err(Rejection::Crossing) => self.stats.rejected_crossing += 1,
            Err(Rejection::NoBoxNormal) => self.stats.rejected_no_normal += 1,
            Ok(()) => {
                let now = self.classify_priority(c.position, c.parent_a, c.parent_b);
                if now.is_worse_than(c.priority) && c.demotions < MAX_DEMOTIONS {
                    c.priority = now;
                    c.demotions += 1;
                    self.stats.requeued += 1;
                    self.queue.push(c);
                } else {
                    let v = self.insert_vertex(&c);
                    self.spawn_candidates(v);
                }
            }
        }
        true
    }

    pub fn grow(mut self) -> GrowthResult {
        while self.step() {}
        log::debug!("growth finished: {:?}", self.stats);
        GrowthResult {
            graph: self.graph,
            grid: self.grid,
            stats: self.stats,
        }
    }
}
