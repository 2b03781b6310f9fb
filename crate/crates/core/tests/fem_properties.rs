use std::collections::HashMap;
use std::f64::consts::PI;

use capspec::cap_eigen;
use capspec::fem::eigen::SolverOptions;
use capspec::fem::{assemble_p1, domains, experiments, SurfaceMesh};
use proptest::prelude::*;

fn cap_area(theta: f64) -> f64 {
    2.0 * PI * (1.0 - theta.cos())
}

fn flat_area(m: &SurfaceMesh, t: [usize; 3]) -> f64 {
    let [a, b, c] = t.map(|i| m.vertices[i]);
    let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
    let n = [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
    0.5 * (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt()
}

/// Checks the mesh invariants without going through `SurfaceMesh::validate`.
fn check_mesh(m: &SurfaceMesh) -> Result<f64, TestCaseError> {
    for v in &m.vertices {
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        prop_assert!((r - 1.0).abs() < 1e-12);
    }
    let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
    let mut area = 0.0;
    for &t in &m.triangles {
        let a = flat_area(m, t);
        prop_assert!(a > 1e-16);
        area += a;
        for k in 0..3 {
            let (i, j) = (t[k], t[(k + 1) % 3]);
            *edges.entry((i.min(j), i.max(j))).or_default() += 1;
        }
    }
    prop_assert!(edges.values().all(|&c| c == 1 || c == 2));
    let mut open: Vec<_> = edges.iter().filter(|(_, &c)| c == 1).map(|(&e, _)| e).collect();
    let mut tagged: Vec<_> = m.boundary_edges.iter().map(|e| (e.a.min(e.b), e.a.max(e.b))).collect();
    open.sort_unstable();
    tagged.sort_unstable();
    prop_assert_eq!(open, tagged);
    Ok(area)
}

fn rotate_z(m: &SurfaceMesh, alpha: f64) -> SurfaceMesh {
    let (s, c) = alpha.sin_cos();
    let mut r = m.clone();
    for v in &mut r.vertices {
        *v = [c * v[0] - s * v[1], s * v[0] + c * v[1], v[2]];
    }
    r
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 6, ..ProptestConfig::default() })]

    #[test]
    fn cap_meshes_are_valid(theta in 0.3 * PI..0.95 * PI, h in 0.06f64..0.15) {
        let m = domains::mesh_cap(theta, h).unwrap();
        let area = check_mesh(&m)?;
        prop_assert!(m.validate().is_ok());
        let exact = cap_area(theta);
        prop_assert!((area - exact).abs() < 0.5 * h * h * exact, "{area} vs {exact}");
    }

    #[test]
    fn matrices_annihilate_constants(theta in 0.3 * PI..0.95 * PI, h in 0.08f64..0.15) {
        let m = domains::mesh_cap(theta, h).unwrap();
        let (k, mass) = assemble_p1(&m).unwrap();
        let ones = vec![1.0; m.vertices.len()];
        let k1 = k.apply(&ones);
        let scale = k.diagonal().iter().fold(0.0f64, |a, &b| a.max(b));
        prop_assert!(k1.iter().all(|x| x.abs() < 1e-12 * scale));
        prop_assert!(k.asymmetry() < 1e-14 * scale);
        prop_assert!(mass.asymmetry() < 1e-16);
        let total = mass.dot_form(&ones, &ones);
        prop_assert!((total - m.area()).abs() < 1e-12 * total);
        prop_assert!(mass.diagonal().iter().all(|&d| d > 0.0));
    }
}

#[test]
fn spectrum_has_constant_mode_and_small_residuals() {
    let opts = SolverOptions::default();
    for (theta, h) in [(0.5 * PI, 0.1), (0.8 * PI, 0.08), (PI, 0.12)] {
        let mesh = domains::mesh_cap(theta, h).unwrap();
        let s = experiments::spectrum_of(&mesh, 3, opts).unwrap();
        assert!(s.eigenvalues[0].abs() < 1e-8 * s.eigenvalues[1]);
        for (lam, r) in s.eigenvalues.iter().zip(&s.residuals) {
            assert!(*r <= opts.tol * lam.max(1.0), "residual {r} at {lam}");
        }
        assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn spectrum_is_rotation_invariant() {
    let opts = SolverOptions::default();
    let theta = 0.8 * PI;
    let t = cap_eigen::find_tmax(theta).unwrap();
    let mesh = domains::mesh_punctured_cap(theta, t, 2.0, 0.1, 0.08, 0.1 / 6.0).unwrap();
    let base = experiments::spectrum_of(&mesh, 3, opts).unwrap();
    for alpha in [PI / 2.0, 0.37] {
        let turned = experiments::spectrum_of(&rotate_z(&mesh, alpha), 3, opts).unwrap();
        for (a, b) in base.eigenvalues.iter().zip(&turned.eigenvalues).skip(1) {
            assert!((a - b).abs() < 1e-7 * a, "{a} vs {b}");
        }
    }
    // four holes on a symmetric layout: the first pair stays degenerate
    let (mu1, mu2) = (base.eigenvalues[1], base.eigenvalues[2]);
    assert!((mu1 - mu2).abs() < 1e-3 * mu1, "{mu1} vs {mu2}");
}

#[test]
fn punctured_and_helmet_meshes_are_valid() {
    let theta = 0.8 * PI;
    let t = cap_eigen::find_tmax(theta).unwrap();
    let holes = domains::mesh_punctured_cap(theta, t, 1.5, 0.1, 0.1, 0.1 / 6.0).unwrap();
    holes.validate().unwrap();
    // area is matched to the unperturbed cap
    assert!((holes.area() / cap_area(theta) - 1.0).abs() < 2e-3);

    let helmet = domains::mesh_helmet(0.75 * PI, 0.05, 0.08).unwrap();
    helmet.validate().unwrap();
    assert!((helmet.area() / cap_area(0.75 * PI) - 1.0).abs() < 2e-3);
    let s = experiments::spectrum_of(&helmet, 3, SolverOptions::default()).unwrap();
    assert!((s.eigenvalues[1] - s.eigenvalues[2]).abs() < 1e-3 * s.eigenvalues[1]);
}

#[test]
fn meshing_is_deterministic() {
    let a = domains::mesh_cap(0.7 * PI, 0.1).unwrap().to_off();
    let b = domains::mesh_cap(0.7 * PI, 0.1).unwrap().to_off();
    assert_eq!(a, b);
    let h1 = domains::mesh_helmet(0.8 * PI, 0.1, 0.1).unwrap().to_off();
    let h2 = domains::mesh_helmet(0.8 * PI, 0.1, 0.1).unwrap().to_off();
    assert_eq!(h1, h2);
}
