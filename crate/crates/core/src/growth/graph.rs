//! The growth graph: placed vertices, their edges as half-edge pairs, and the
//! oriented border cycles of the regions between them.
//!
//! Half-edge `h` and its twin `h ^ 1` are stored next to each other. Regions
//! lie to the left of their border half-edges, and each vertex keeps its
//! outgoing half-edges sorted counterclockwise around the vertex normal. With
//! that convention `next(u -> v)` is the outgoing half-edge of `v` that
//! directly precedes `v -> u` in clockwise order.

use std::f64::consts::TAU;

use crate::geometry::{UnitVec3, Vec3};

/// `window` value that disables the tracing limit.
pub const UNBOUNDED_WINDOW: usize = usize::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthVertex {
    pub position: Vec3,
    pub normal: UnitVec3,
    frame: (Vec3, Vec3),
    /// Outgoing half-edges with their angle around `normal`, ascending.
    rotation: Vec<(f64, u32)>,
    /// Border of an edge-less vertex.
    isolated_border: Option<u32>,
}

impl GrowthVertex {
    fn new(position: Vec3, normal: UnitVec3) -> Self {
        GrowthVertex {
            position,
            normal,
            frame: normal.tangent_frame(),
            rotation: Vec::new(),
            isolated_border: None,
        }
    }

    pub fn degree(&self) -> usize {
        self.rotation.len()
    }

    /// Outgoing half-edges in counterclockwise order.
    pub fn outgoing(&self) -> impl Iterator<Item = u32> + '_ {
        self.rotation.iter().map(|&(_, h)| h)
    }

    /// Angle of `p` around the vertex, measured in its normal plane.
    pub fn angle_to(&self, p: Vec3) -> f64 {
        let t = p - self.position;
        let a = t.dot(self.frame.1).atan2(t.dot(self.frame.0));
        if a < 0.0 {
            a + TAU
        } else {
            a
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Border {
    /// Number of half-edges in the cycle; 0 for an isolated vertex.
    pub length: usize,
    /// Some half-edge of the cycle, `None` for an isolated vertex.
    pub representative: Option<u32>,
    pub alive: bool,
}

/// The slot a new edge at a vertex falls into: the border half-edges that
/// currently enter and leave the vertex around that direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Corner {
    pub incoming: Option<u32>,
    pub outgoing: Option<u32>,
    pub border: u32,
}

/// Border change caused by an insertion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BorderChange {
    Join { kept: u32, removed: u32 },
    Split { kept: u32, created: u32 },
}

#[derive(Debug, Clone, Default)]
pub struct GrowthGraph {
    vertices: Vec<GrowthVertex>,
    origin: Vec<u32>,
    next: Vec<u32>,
    prev: Vec<u32>,
    border_of: Vec<u32>,
    borders: Vec<Border>,
}

impl GrowthGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertex(&self, v: u32) -> &GrowthVertex {
        &self.vertices[v as usize]
    }

    pub fn vertices(&self) -> &[GrowthVertex] {
        &self.vertices
    }

    pub fn positions(&self) -> Vec<Vec3> {
        self.vertices.iter().map(|v| v.position).collect()
    }

    pub fn half_edge_count(&self) -> usize {
        self.origin.len()
    }

    pub fn edge_count(&self) -> usize {
        self.origin.len() / 2
    }

    pub fn origin(&self, h: u32) -> u32 {
        self.origin[h as usize]
    }

    pub fn target(&self, h: u32) -> u32 {
        self.origin[(h ^ 1) as usize]
    }

    pub fn next(&self, h: u32) -> u32 {
        self.next[h as usize]
    }

    pub fn prev(&self, h: u32) -> u32 {
        self.prev[h as usize]
    }

    pub fn border_of(&self, h: u32) -> u32 {
        self.border_of[h as usize]
    }

    pub fn border(&self, id: u32) -> &Border {
        &self.borders[id as usize]
    }

    /// Ids of the borders that still exist, ascending.
    pub fn live_borders(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.borders.len() as u32).filter(|&b| self.borders[b as usize].alive)
    }

    pub fn max_border_length(&self) -> usize {
        self.live_borders()
            .map(|b| self.borders[b as usize].length)
            .max()
            .unwrap_or(0)
    }

    /// Every edge once as `(min, max)` vertex pair, sorted.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut e: Vec<(u32, u32)> = (0..self.origin.len() / 2)
            .map(|i| {
                let (a, b) = (self.origin[2 * i], self.origin[2 * i + 1]);
                (a.min(b), a.max(b))
            })
            .collect();
        e.sort_unstable();
        e
    }

    /// Vertices of a border cycle in half-edge order; empty for an isolated
    /// vertex border.
    pub fn border_vertices(&self, id: u32) -> Vec<u32> {
        let Some(start) = self.borders[id as usize].representative else {
            return Vec::new();
        };
        let mut out = Vec::with_capacity(self.borders[id as usize].length);
        let mut h = start;
        loop {
            out.push(self.origin[h as usize]);
            h = self.next[h as usize];
            if h == start {
                break;
            }
        }
        out
    }

    pub fn add_isolated_vertex(&mut self, position: Vec3, normal: UnitVec3) -> u32 {
        let id = self.vertices.len() as u32;
        let mut v = GrowthVertex::new(position, normal);
        v.isolated_border = Some(self.borders.len() as u32);
        self.borders.push(Border {
            length: 0,
            representative: None,
            alive: true,
        });
        self.vertices.push(v);
        id
    }

    /// The corner at `v` that an edge towards `p` would split.
    pub fn corner(&self, v: u32, p: Vec3) -> Corner {
        let vert = &self.vertices[v as usize];
        if vert.rotation.is_empty() {
            return Corner {
                incoming: None,
                outgoing: None,
                border: vert.isolated_border.expect("edge-less vertex keeps its own border"),
            };
        }
        let (cw, ccw) = rotation_neighbors(&vert.rotation, vert.angle_to(p));
        Corner {
            incoming: Some(ccw ^ 1),
            outgoing: Some(cw),
            border: self.border_of[cw as usize],
        }
    }

    /// Combinatorial distance from `a` to `b` along their common border, in
    /// both directions, looking at most `window` steps each way. Returns the
    /// smaller distance found, or `None` when neither direction meets `b`.
    pub fn split_distance(&self, ca: &Corner, cb: &Corner, window: usize) -> Option<usize> {
        let (Some(out_a), Some(in_a), Some(out_b), Some(in_b)) = (ca.outgoing, ca.incoming, cb.outgoing, cb.incoming)
        else {
            return None;
        };
        let limit = if window == UNBOUNDED_WINDOW {
            if ca.border != cb.border {
                return None;
            }
            self.borders[ca.border as usize].length
        } else {
            window
        };
        let mut forward = None;
        let mut h = out_a;
        for k in 0..limit {
            if h == in_b {
                forward = Some(k + 1);
                break;
            }
            h = self.next[h as usize];
        }
        let mut backward = None;
        let mut h = in_a;
        for k in 0..limit {
            if h == out_b {
                backward = Some(k + 1);
                break;
            }
            h = self.prev[h as usize];
        }
        match (forward, backward) {
            (Some(f), Some(b)) => Some(f.min(b)),
            (f, b) => f.or(b),
        }
    }

    /// Adds vertex `c` with edges to `a` and `b`, relinking and relabeling
    /// the affected borders.
    pub fn insert_vertex(&mut self, position: Vec3, normal: UnitVec3, a: u32, b: u32) -> (u32, BorderChange) {
        debug_assert_ne!(a, b);
        let ca = self.corner(a, position);
        let cb = self.corner(b, position);
        let c = self.vertices.len() as u32;
        self.vertices.push(GrowthVertex::new(position, normal));

        let base = self.origin.len() as u32;
        let (ac, ca_h, bc, cb_h) = (base, base + 1, base + 2, base + 3);
        self.origin.extend([a, c, b, c]);
        self.next.extend([0; 4]);
        self.prev.extend([0; 4]);
        self.border_of.extend([u32::MAX; 4]);

        self.link(ac, cb_h);
        self.link(bc, ca_h);
        self.link(cb_h, cb.outgoing.unwrap_or(bc));
        self.link(ca_h, ca.outgoing.unwrap_or(ac));
        if let Some(h) = ca.incoming {
            self.link(h, ac);
        }
        if let Some(h) = cb.incoming {
            self.link(h, bc);
        }

        let pos_a = self.vertices[a as usize].position;
        let pos_b = self.vertices[b as usize].position;
        self.add_to_rotation(a, ac, position);
        self.add_to_rotation(b, bc, position);
        self.add_to_rotation(c, ca_h, pos_a);
        self.add_to_rotation(c, cb_h, pos_b);

        let change = if ca.border == cb.border {
            self.split(ca.border, ac, bc)
        } else {
            self.join(&ca, &cb, ac, bc)
        };
        for v in [a, b] {
            self.vertices[v as usize].isolated_border = None;
        }
        (c, change)
    }

    fn link(&mut self, h: u32, n: u32) {
        self.next[h as usize] = n;
        self.prev[n as usize] = h;
    }

    fn add_to_rotation(&mut self, v: u32, h: u32, towards: Vec3) {
        let vert = &mut self.vertices[v as usize];
        let angle = vert.angle_to(towards);
        let slot = vert.rotation.partition_point(|&(t, _)| t <= angle);
        vert.rotation.insert(slot, (angle, h));
    }

    fn relabel_cycle(&mut self, start: u32, id: u32) {
        let mut h = start;
        loop {
            self.border_of[h as usize] = id;
            h = self.next[h as usize];
            if h == start {
                break;
            }
        }
    }

    fn split(&mut self, old: u32, ac: u32, bc: u32) -> BorderChange {
        let total = self.borders[old as usize].length + 4;
        // Walk both new cycles in lockstep so the cost is set by the shorter.
        let (mut h1, mut h2) = (ac, bc);
        let mut steps = 0;
        let shorter_start = loop {
            h1 = self.next[h1 as usize];
            h2 = self.next[h2 as usize];
            steps += 1;
            if h1 == ac {
                break ac;
            }
            if h2 == bc {
                break bc;
            }
        };
        let (kept_start, shorter_len) = if shorter_start == ac { (bc, steps) } else { (ac, steps) };
        let created = self.borders.len() as u32;
        self.borders.push(Border {
            length: shorter_len,
            representative: Some(shorter_start),
            alive: true,
        });
        self.relabel_cycle(shorter_start, created);
        for h in [ac, ac + 1, bc, bc + 1] {
            if self.border_of[h as usize] == u32::MAX {
                self.border_of[h as usize] = old;
            }
        }
        self.borders[old as usize] = Border {
            length: total - shorter_len,
            representative: Some(kept_start),
            alive: true,
        };
        BorderChange::Split { kept: old, created }
    }

    fn join(&mut self, ca: &Corner, cb: &Corner, ac: u32, bc: u32) -> BorderChange {
        let la = self.borders[ca.border as usize].length;
        let lb = self.borders[cb.border as usize].length;
        let (kept, removed, removed_out) = if la < lb {
            (cb.border, ca.border, ca.outgoing)
        } else {
            (ca.border, cb.border, cb.outgoing)
        };
        if let Some(start) = removed_out {
            // The old cycle is now the arc from its corner up to the new edges.
            let mut h = start;
            while h < ac {
                // New half-edges start at `ac`.
                self.border_of[h as usize] = kept;
                h = self.next[h as usize];
            }
        }
        for h in [ac, ac + 1, bc, bc + 1] {
            self.border_of[h as usize] = kept;
        }
        self.borders[kept as usize] = Border {
            length: la + lb + 4,
            representative: Some(ac),
            alive: true,
        };
        self.borders[removed as usize] = Border {
            length: 0,
            representative: None,
            alive: false,
        };
        BorderChange::Join { kept, removed }
    }

    /// Full consistency check of the half-edge structure. Used by tests.
    pub fn check_invariants(&self) -> Result<(), String> {
        let n = self.origin.len();
        if n % 2 != 0 {
            return Err("odd half-edge count".into());
        }
        for h in 0..n as u32 {
            if self.prev[self.next[h as usize] as usize] != h {
                return Err(format!("prev/next mismatch at {h}"));
            }
            if self.origin[self.next[h as usize] as usize] != self.target(h) {
                return Err(format!("next of {h} does not leave its target"));
            }
            if self.border_of[self.next[h as usize] as usize] != self.border_of[h as usize] {
                return Err(format!("border label changes after {h}"));
            }
            let b = &self.borders[self.border_of[h as usize] as usize];
            if !b.alive {
                return Err(format!("half-edge {h} labeled with a dead border"));
            }
        }
        let mut total = 0;
        for id in self.live_borders() {
            let b = &self.borders[id as usize];
            total += b.length;
            match b.representative {
                None if b.length != 0 => return Err(format!("border {id} has no half-edge")),
                None => {}
                Some(start) => {
                    let mut count = 0;
                    let mut h = start;
                    loop {
                        count += 1;
                        if self.border_of[h as usize] != id {
                            return Err(format!("border {id} contains foreign half-edge {h}"));
                        }
                        h = self.next[h as usize];
                        if h == start || count > n {
                            break;
                        }
                    }
                    if count != b.length {
                        return Err(format!("border {id}: cached length {} but cycle has {count}", b.length));
                    }
                }
            }
        }
        if total != n {
            return Err(format!("border lengths sum to {total}, expected {n}"));
        }
        for (i, v) in self.vertices.iter().enumerate() {
            for w in v.rotation.windows(2) {
                if w[0].0 > w[1].0 {
                    return Err(format!("rotation of vertex {i} is not sorted"));
                }
            }
            for &(_, h) in &v.rotation {
                if self.origin[h as usize] != i as u32 {
                    return Err(format!("rotation of vertex {i} holds foreign half-edge {h}"));
                }
            }
        }
        // Rebuild every successor from the rotations alone.
        for h in 0..n as u32 {
            let rot = &self.vertices[self.target(h) as usize].rotation;
            let slot = rot.iter().position(|&(_, o)| o == h ^ 1).ok_or("twin missing from rotation")?;
            let expect = rot[(slot + rot.len() - 1) % rot.len()].1;
            if self.next[h as usize] != expect {
                return Err(format!("next of {h} disagrees with the rotation at its target"));
            }
        }
        Ok(())
    }
}

/// Half-edges directly clockwise and counterclockwise of `angle`.
fn rotation_neighbors(rotation: &[(f64, u32)], angle: f64) -> (u32, u32) {
    let slot = rotation.partition_point(|&(t, _)| t <= angle);
    let cw = if slot == 0 { rotation[rotation.len() - 1].1 } else { rotation[slot - 1].1 };
    let ccw = if slot == rotation.len() { rotation[0].1 } else { rotation[slot].1 };
    (cw, ccw)
}
