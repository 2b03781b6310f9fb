//! Point-cloud mesher for spherical domains.
//!
//! Vertices are drawn from staggered latitude-ring lattices whose spacing
//! follows a size function, thinned against each other and against the
//! boundary polylines, then triangulated in a stereographic plane. Since
//! stereographic projection maps circles to circles, the planar Delaunay
//! triangulation is the spherical one; constrained edges keep the boundary
//! and a final Ruppert pass bounds the smallest angle.

use std::collections::{HashMap, HashSet};
use std::f64::consts::PI;
use std::hash::{BuildHasherDefault, Hasher};

use spade::handles::{FixedFaceHandle, InnerTag};
use spade::{
    AngleLimit, ConstrainedDelaunayTriangulation, DelaunayTriangulation, Point2, RefinementParameters, Triangulation,
};

use super::geometry::{cross, dot, norm, normalize, spherical, sub, Stereo, V3};
use super::mesh::{BoundaryEdge, BoundaryTag, SurfaceMesh};
use crate::error::{Error, Result};

/// Vertex budget beyond which meshing is refused.
pub const MAX_VERTICES: usize = 5_000_000;

const REFINE_ANGLE_DEG: f64 = 22.0;
const POINT_SPACING: f64 = 0.75;
const BOUNDARY_CLEARANCE: f64 = 0.55;

/// Closed polyline on the sphere approximating one boundary component.
#[derive(Clone, Debug)]
pub struct Loop {
    pub points: Vec<V3>,
    pub tag: BoundaryTag,
}

/// Everything the mesher needs to know about a domain.
pub struct DomainSpec<'a> {
    /// Projection point, outside the closed domain. `None` meshes the whole sphere.
    pub pole: Option<V3>,
    pub loops: Vec<Loop>,
    pub contains: &'a dyn Fn(V3) -> bool,
    /// Target edge length at a point.
    pub size: &'a dyn Fn(V3) -> f64,
    pub h: f64,
    pub h_min: f64,
    /// Rough area, used for the vertex budget.
    pub area: f64,
}

#[derive(Default)]
struct CellHasher(u64);

impl Hasher for CellHasher {
    fn finish(&self) -> u64 {
        self.0
    }
    fn write(&mut self, _: &[u8]) {
        unreachable!("only u64 keys are hashed")
    }
    fn write_u64(&mut self, v: u64) {
        self.0 = (self.0 ^ v).wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(29);
    }
}

type CellMap<T> = HashMap<u64, Vec<T>, BuildHasherDefault<CellHasher>>;

/// Uniform grid over R³ storing items near the unit sphere.
struct Grid<T> {
    cell: f64,
    cells: CellMap<T>,
}

impl<T: Copy> Grid<T> {
    fn new(cell: f64) -> Self {
        Grid { cell, cells: CellMap::default() }
    }

    fn coords(&self, x: V3) -> [i64; 3] {
        x.map(|c| (c / self.cell).floor() as i64)
    }

    fn key(c: [i64; 3]) -> u64 {
        let m = |v: i64| (v + (1 << 20)) as u64 & 0x1F_FFFF;
        m(c[0]) | m(c[1]) << 21 | m(c[2]) << 42
    }

    fn insert(&mut self, x: V3, item: T) {
        let k = Self::key(self.coords(x));
        self.cells.entry(k).or_default().push(item);
    }

    fn any_within(&self, x: V3, r: f64, mut pred: impl FnMut(T) -> bool) -> bool {
        let c = self.coords(x);
        let reach = (r / self.cell).ceil() as i64;
        for i in -reach..=reach {
            for j in -reach..=reach {
                for k in -reach..=reach {
                    if let Some(items) = self.cells.get(&Self::key([c[0] + i, c[1] + j, c[2] + k])) {
                        if items.iter().any(|&it| pred(it)) {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }
}

fn dist(a: V3, b: V3) -> f64 {
    norm(sub(a, b))
}

fn segment_distance(x: V3, a: V3, b: V3) -> f64 {
    let ab = sub(b, a);
    let s = (dot(sub(x, a), ab) / dot(ab, ab)).clamp(0.0, 1.0);
    dist(x, [a[0] + s * ab[0], a[1] + s * ab[1], a[2] + s * ab[2]])
}

/// Staggered ring lattice of spacing `h` over the sphere.
pub fn ring_lattice(h: f64, mut visit: impl FnMut(V3)) {
    let dt = h * 3f64.sqrt() / 2.0;
    let rings = (PI / dt).round().max(1.0) as usize;
    for k in 0..rings {
        let t = (k as f64 + 0.5) * PI / rings as f64;
        let n = ((2.0 * PI * t.sin() / h).round() as usize).max(3);
        let shift = if k % 2 == 0 { 0.0 } else { 0.5 };
        for j in 0..n {
            visit(spherical(t, 2.0 * PI * (j as f64 + shift) / n as f64));
        }
    }
}

/// Interior and boundary points of the domain.
fn point_cloud(spec: &DomainSpec) -> Result<(Vec<V3>, usize)> {
    let coarse_estimate = 2.0 * spec.area / (3f64.sqrt() / 2.0 * spec.h * spec.h);
    if !(spec.h > 0.0 && spec.h_min > 0.0) || coarse_estimate > MAX_VERTICES as f64 {
        return Err(Error::Resource(format!(
            "mesh size h = {} would need about {coarse_estimate:.0} vertices (limit {MAX_VERTICES})",
            spec.h
        )));
    }

    let mut pts: Vec<V3> = Vec::new();
    let mut grid: Grid<(usize, f64)> = Grid::new(spec.h_min.max(spec.h / 8.0));
    let mut seg_grid: Grid<(usize, usize)> = Grid::new(spec.h_min.max(spec.h / 8.0));
    let mut max_seg: f64 = 0.0;
    for (li, lp) in spec.loops.iter().enumerate() {
        let n = lp.points.len();
        for (i, &p) in lp.points.iter().enumerate() {
            grid.insert(p, (pts.len(), (spec.size)(p)));
            pts.push(p);
            let q = lp.points[(i + 1) % n];
            max_seg = max_seg.max(dist(p, q));
            seg_grid.insert(normalize([(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0, (p[2] + q[2]) / 2.0]), (li, i));
        }
    }
    let n_boundary = pts.len();

    // Levels h, h/2, h/4, … down to about h_min.
    let mut levels = vec![spec.h];
    while *levels.last().unwrap() > spec.h_min * 2f64.sqrt() {
        levels.push(levels.last().unwrap() / 2.0);
    }
    let top = 0;
    let bottom = levels.len() - 1;
    for li in (0..levels.len()).rev() {
        let hl = levels[li];
        let mut candidates = Vec::new();
        ring_lattice(hl, |x| {
            let s = (spec.size)(x).min(spec.h);
            let above = li == top || s <= hl * 2f64.sqrt();
            let below = li == bottom || s > hl / 2f64.sqrt();
            if above && below && (spec.contains)(x) {
                candidates.push((x, s));
            }
        });
        if pts.len() + candidates.len() > MAX_VERTICES {
            return Err(Error::Resource(format!("point cloud exceeds {MAX_VERTICES} vertices")));
        }
        for (x, s) in candidates {
            let r = POINT_SPACING * s;
            if grid.any_within(x, r, |(i, si)| dist(pts[i], x) < POINT_SPACING * s.max(si)) {
                continue;
            }
            let clearance = BOUNDARY_CLEARANCE * s;
            let near_boundary = seg_grid.any_within(x, clearance + max_seg, |(l, i)| {
                let lp = &spec.loops[l].points;
                segment_distance(x, lp[i], lp[(i + 1) % lp.len()]) < clearance
            });
            if near_boundary {
                continue;
            }
            grid.insert(x, (pts.len(), s));
            pts.push(x);
        }
    }
    Ok((pts, n_boundary))
}

fn orient(vertices: &[V3], t: [usize; 3]) -> [usize; 3] {
    let [a, b, c] = t.map(|i| vertices[i]);
    if dot(cross(sub(b, a), sub(c, a)), a) >= 0.0 {
        t
    } else {
        [t[0], t[2], t[1]]
    }
}

/// Triangulates the domain.
pub fn build(spec: &DomainSpec) -> Result<SurfaceMesh> {
    match spec.pole {
        None => build_closed(spec),
        Some(pole) => build_bounded(spec, pole),
    }
}

fn build_bounded(spec: &DomainSpec, pole: V3) -> Result<SurfaceMesh> {
    if (spec.contains)(pole) {
        return Err(Error::Geometry("projection point lies inside the domain".into()));
    }
    let (pts, _) = point_cloud(spec)?;
    let stereo = Stereo::from_pole(pole);
    let planar: Vec<Point2<f64>> = pts
        .iter()
        .map(|&x| {
            let w = stereo.project(x);
            Point2::new(w[0], w[1])
        })
        .collect();

    let mut tags: HashMap<(u64, u64), BoundaryTag> = HashMap::new();
    let mut edges = Vec::new();
    let mut offset = 0;
    for lp in &spec.loops {
        let n = lp.points.len();
        for i in 0..n {
            edges.push([offset + i, offset + (i + 1) % n]);
            let p = planar[offset + i];
            tags.insert((p.x.to_bits(), p.y.to_bits()), lp.tag);
        }
        offset += n;
    }
    let mut cdt = ConstrainedDelaunayTriangulation::<Point2<f64>>::bulk_load_cdt(planar, edges)
        .map_err(|e| Error::Geometry(format!("triangulation failed: {e:?}")))?;
    let params = RefinementParameters::<f64>::new()
        .exclude_outer_faces(true)
        .with_angle_limit(AngleLimit::from_deg(REFINE_ANGLE_DEG))
        .with_max_additional_vertices(pts.len());
    let result = cdt.refine(params);
    let excluded: HashSet<FixedFaceHandle<InnerTag>> = result.excluded_faces.into_iter().collect();

    let mut index = vec![usize::MAX; cdt.num_vertices()];
    let mut vertices = Vec::new();
    let mut planar_of = Vec::new();
    let mut triangles = Vec::new();
    for face in cdt.inner_faces() {
        if excluded.contains(&face.fix()) {
            continue;
        }
        let vs = face.vertices();
        let mut tri = [0usize; 3];
        for (k, v) in vs.iter().enumerate() {
            let i = v.fix().index();
            if index[i] == usize::MAX {
                index[i] = vertices.len();
                let p = v.position();
                vertices.push(stereo.lift([p.x, p.y]));
                planar_of.push(p);
            }
            tri[k] = index[i];
        }
        triangles.push(orient(&vertices, tri));
    }
    if triangles.is_empty() {
        return Err(Error::Geometry("domain produced no triangles".into()));
    }
    let mut mesh = SurfaceMesh { vertices, triangles, boundary_edges: Vec::new(), h: spec.h };
    let open = mesh.open_edges();
    let tag_of = |i: usize| tags.get(&(planar_of[i].x.to_bits(), planar_of[i].y.to_bits())).copied();
    mesh.boundary_edges = open
        .into_iter()
        .map(|(a, b)| {
            let tag = tag_of(a).or_else(|| tag_of(b)).unwrap_or_else(|| nearest_tag(spec, mesh.vertices[a]));
            BoundaryEdge { a, b, tag }
        })
        .collect();
    mesh.validate()?;
    Ok(mesh)
}

fn nearest_tag(spec: &DomainSpec, x: V3) -> BoundaryTag {
    spec.loops
        .iter()
        .flat_map(|l| l.points.iter().map(move |&p| (dist(p, x), l.tag)))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, t)| t)
        .unwrap_or(BoundaryTag::Other)
}

/// Whole sphere: Delaunay in the plane from the south pole, closed by the fan
/// from the pole to the planar hull.
fn build_closed(spec: &DomainSpec) -> Result<SurfaceMesh> {
    let south = [0.0, 0.0, -1.0];
    let (mut pts, _) = point_cloud(spec)?;
    let guard = 0.5 * (spec.size)(south);
    pts.retain(|&x| dist(x, south) > guard);
    let stereo = Stereo::from_pole(south);
    let planar: Vec<Point2<f64>> = pts
        .iter()
        .map(|&x| {
            let w = stereo.project(x);
            Point2::new(w[0], w[1])
        })
        .collect();
    let dt = DelaunayTriangulation::<Point2<f64>>::bulk_load(planar)
        .map_err(|e| Error::Geometry(format!("triangulation failed: {e:?}")))?;
    let mut vertices: Vec<V3> = dt.vertices().map(|v| stereo.lift([v.position().x, v.position().y])).collect();
    let mut triangles: Vec<[usize; 3]> = Vec::new();
    for face in dt.inner_faces() {
        let t = face.vertices().map(|v| v.fix().index());
        triangles.push(orient(&vertices, t));
    }
    let pole = vertices.len();
    vertices.push(south);
    for e in dt.convex_hull() {
        let t = [e.from().fix().index(), e.to().fix().index(), pole];
        triangles.push(orient(&vertices, t));
    }
    let mesh = SurfaceMesh { vertices, triangles, boundary_edges: Vec::new(), h: spec.h };
    mesh.validate()?;
    Ok(mesh)
}
