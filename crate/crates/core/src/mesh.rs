use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// Triangle connectivity plus the borders that were left open.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TriangleMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[u32; 3]>,
    /// Untriangulated region borders as vertex cycles.
    pub holes: Vec<Vec<u32>>,
}

impl TriangleMesh {
    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    /// Checks index ranges, repeated corners and rotated duplicates.
    pub fn validate(&self) -> Result<()> {
        let n = self.vertices.len() as u32;
        let mut seen = HashSet::with_capacity(self.triangles.len());
        for (i, t) in self.triangles.iter().enumerate() {
            if t.iter().any(|&v| v >= n) {
                return Err(Error::Contract(format!("triangle {i} indexes past the vertex list")));
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(Error::Contract(format!("triangle {i} repeats a vertex")));
            }
            if !seen.insert(canonical_rotation(*t)) {
                return Err(Error::Contract(format!("triangle {i} is a duplicate")));
            }
        }
        for (i, h) in self.holes.iter().enumerate() {
            if h.iter().any(|&v| v >= n) {
                return Err(Error::Contract(format!("hole {i} indexes past the vertex list")));
            }
        }
        Ok(())
    }

    /// Each undirected edge once, as `(min, max)`, in sorted order.
    pub fn unique_edges(&self) -> Vec<(u32, u32)> {
        let mut edges: Vec<(u32, u32)> = self
            .triangles
            .iter()
            .flat_map(|t| {
                [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])]
                    .map(|(a, b)| if a < b { (a, b) } else { (b, a) })
            })
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges
    }
}

/// Rotates a triangle so its smallest index comes first, preserving
/// orientation.
pub(crate) fn canonical_rotation(t: [u32; 3]) -> [u32; 3] {
    let m = (0..3).min_by_key(|&i| t[i]).unwrap();
    [t[m], t[(m + 1) % 3], t[(m + 2) % 3]]
}
