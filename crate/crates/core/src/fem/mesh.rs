//! Triangulated subdomains of the unit sphere.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::geometry::{cross, dot, norm, sub, V3};
use crate::error::{Error, Result};

/// Which part of the domain boundary an edge approximates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryTag {
    Rim,
    Hole(u8),
    Strip,
    Other,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryEdge {
    pub a: usize,
    pub b: usize,
    pub tag: BoundaryTag,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SurfaceMesh {
    pub vertices: Vec<V3>,
    /// Counterclockwise seen from outside the sphere.
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    /// Target edge length away from refined zones.
    pub h: f64,
}

pub const MIN_TRIANGLE_AREA: f64 = 1e-16;

pub fn triangle_area(p: [V3; 3]) -> f64 {
    0.5 * norm(cross(sub(p[1], p[0]), sub(p[2], p[0])))
}

impl SurfaceMesh {
    pub fn corners(&self, t: usize) -> [V3; 3] {
        self.triangles[t].map(|i| self.vertices[i])
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| triangle_area(self.corners(t))).sum()
    }

    pub fn boundary_length(&self) -> f64 {
        self.boundary_edges.iter().map(|e| norm(sub(self.vertices[e.a], self.vertices[e.b]))).sum()
    }

    pub fn boundary_length_tagged(&self, tag: BoundaryTag) -> f64 {
        self.boundary_edges
            .iter()
            .filter(|e| e.tag == tag)
            .map(|e| norm(sub(self.vertices[e.a], self.vertices[e.b])))
            .sum()
    }

    /// Longest edge.
    pub fn max_edge(&self) -> f64 {
        self.triangles
            .iter()
            .flat_map(|t| (0..3).map(move |k| (t[k], t[(k + 1) % 3])))
            .map(|(a, b)| norm(sub(self.vertices[a], self.vertices[b])))
            .fold(0.0, f64::max)
    }

    /// Edge → number of incident triangles.
    fn edge_counts(&self) -> HashMap<(usize, usize), usize> {
        let mut counts = HashMap::with_capacity(3 * self.triangles.len());
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *counts.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        counts
    }

    /// Edges bordering exactly one triangle, oriented as in that triangle.
    pub fn open_edges(&self) -> Vec<(usize, usize)> {
        let counts = self.edge_counts();
        let mut out = Vec::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                if counts[&(a.min(b), a.max(b))] == 1 {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// Checks unit vertices, orientation, non-degeneracy and edge-manifoldness.
    pub fn validate(&self) -> Result<()> {
        for (i, v) in self.vertices.iter().enumerate() {
            if (norm(*v) - 1.0).abs() > 1e-12 {
                return Err(Error::Geometry(format!("vertex {i} is off the unit sphere (|v| = {})", norm(*v))));
            }
        }
        for (k, t) in self.triangles.iter().enumerate() {
            if t.iter().any(|&i| i >= self.vertices.len()) || t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(Error::Geometry(format!("triangle {k} has invalid indices {t:?}")));
            }
            let p = self.corners(k);
            if triangle_area(p) <= MIN_TRIANGLE_AREA {
                return Err(Error::Geometry(format!("triangle {k} is degenerate")));
            }
            let n = cross(sub(p[1], p[0]), sub(p[2], p[0]));
            if dot(n, p[0]) <= 0.0 {
                return Err(Error::Geometry(format!("triangle {k} is not counterclockwise from outside")));
            }
        }
        let counts = self.edge_counts();
        if let Some(((a, b), c)) = counts.iter().find(|(_, &c)| c > 2) {
            return Err(Error::Geometry(format!("edge ({a}, {b}) borders {c} triangles")));
        }
        let mut open: Vec<(usize, usize)> = counts.iter().filter(|(_, &c)| c == 1).map(|(&e, _)| e).collect();
        let mut tagged: Vec<(usize, usize)> =
            self.boundary_edges.iter().map(|e| (e.a.min(e.b), e.a.max(e.b))).collect();
        open.sort_unstable();
        tagged.sort_unstable();
        if open != tagged {
            return Err(Error::Geometry(format!(
                "boundary edge list ({}) differs from the one-triangle edges ({})",
                tagged.len(),
                open.len()
            )));
        }
        Ok(())
    }

    /// ASCII OFF export.
    pub fn to_off(&self) -> String {
        let mut out = format!("OFF\n{} {} 0\n", self.vertices.len(), self.triangles.len());
        for v in &self.vertices {
            let _ = writeln!(out, "{:.17e} {:.17e} {:.17e}", v[0], v[1], v[2]);
        }
        for t in &self.triangles {
            let _ = writeln!(out, "3 {} {} {}", t[0], t[1], t[2]);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn octant() -> SurfaceMesh {
        let vertices = vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let boundary_edges = vec![
            BoundaryEdge { a: 0, b: 1, tag: BoundaryTag::Other },
            BoundaryEdge { a: 1, b: 2, tag: BoundaryTag::Other },
            BoundaryEdge { a: 2, b: 0, tag: BoundaryTag::Other },
        ];
        SurfaceMesh { vertices, triangles: vec![[0, 1, 2]], boundary_edges, h: 1.0 }
    }

    #[test]
    fn single_triangle_is_valid() {
        let m = octant();
        m.validate().unwrap();
        assert!((m.area() - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(m.open_edges().len(), 3);
    }

    #[test]
    fn wrong_orientation_rejected() {
        let mut m = octant();
        m.triangles[0] = [0, 2, 1];
        assert!(m.validate().is_err());
    }

    #[test]
    fn off_header() {
        let off = octant().to_off();
        assert!(off.starts_with("OFF\n3 1 0\n"));
        assert!(off.ends_with("3 0 1 2\n"));
    }
}
