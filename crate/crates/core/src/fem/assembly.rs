//! Linear-element stiffness and mass matrices on flat triangles.

use rayon::prelude::*;

use super::geometry::{dot, sub};
use super::mesh::{triangle_area, SurfaceMesh, MIN_TRIANGLE_AREA};
use super::sparse::SparseSpd;
use crate::error::{Error, Result};

type Local = ([[f64; 3]; 3], [[f64; 3]; 3]);

fn local_matrices(mesh: &SurfaceMesh, t: usize) -> Result<Local> {
    let p = mesh.corners(t);
    let area = triangle_area(p);
    if !(area > MIN_TRIANGLE_AREA) {
        return Err(Error::Geometry(format!("triangle {t} {:?} is degenerate (area {area:e})", mesh.triangles[t])));
    }
    // Edge opposite each corner.
    let e = [sub(p[2], p[1]), sub(p[0], p[2]), sub(p[1], p[0])];
    let mut k = [[0.0; 3]; 3];
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = dot(e[i], e[j]) / (4.0 * area);
            m[i][j] = area / 12.0 * if i == j { 2.0 } else { 1.0 };
        }
    }
    Ok((k, m))
}

/// Stiffness `K` and consistent mass `M`. Neumann conditions are natural, so
/// no boundary terms appear.
pub fn assemble_p1(mesh: &SurfaceMesh) -> Result<(SparseSpd, SparseSpd)> {
    let locals: Vec<Local> =
        (0..mesh.triangles.len()).into_par_iter().map(|t| local_matrices(mesh, t)).collect::<Result<_>>()?;
    let mut kt = Vec::with_capacity(9 * locals.len());
    let mut mt = Vec::with_capacity(9 * locals.len());
    for (tri, (k, m)) in mesh.triangles.iter().zip(&locals) {
        for i in 0..3 {
            for j in 0..3 {
                kt.push((tri[i], tri[j], k[i][j]));
                mt.push((tri[i], tri[j], m[i][j]));
            }
        }
    }
    let n = mesh.vertices.len();
    Ok((SparseSpd::from_triplets(n, kt)?, SparseSpd::from_triplets(n, mt)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::domains::mesh_cap;
    use std::f64::consts::PI;

    #[test]
    fn nullspace_and_mass() {
        let mesh = mesh_cap(0.6 * PI, 0.15).unwrap();
        let (k, m) = assemble_p1(&mesh).unwrap();
        let ones = vec![1.0; mesh.vertices.len()];
        let r = k.apply(&ones);
        assert!(r.iter().all(|v| v.abs() < 1e-12));
        assert!((m.dot_form(&ones, &ones) - mesh.area()).abs() < 1e-12);
        assert!(k.asymmetry() < 1e-15 && m.asymmetry() < 1e-15);
    }

    #[test]
    fn degenerate_triangle_named() {
        let mut mesh = mesh_cap(0.5 * PI, 0.2).unwrap();
        let t = mesh.triangles[3];
        mesh.triangles[3] = [t[0], t[1], t[1]];
        let err = assemble_p1(&mesh).unwrap_err().to_string();
        assert!(err.contains("triangle 3"), "{err}");
    }
}
