//! Sphere minus one small disk (the `λ → ∞` ellipse): closed form, matrix route and FEM.

use capspec::fem::{domains, eigen::SolverOptions, experiments};
use capspec::{hole_models, perturbation};

fn main() -> capspec::Result<()> {
    let hole = hole_models::ellipse_from_lambda(1e6)?;
    let eps = 0.15;
    let closed = perturbation::sphere_single_hole(&hole, eps)?;
    let (matrix, a) = perturbation::sphere_single_hole_matrix(&hole, eps)?;
    println!("closed form : mu1 + mu2 = {:.12}, mu3 = {:.12}", closed.sum12, closed.mu3);
    println!("matrix route: mu1 + mu2 = {:.12}, mu3 = {:.12}, kappa = {:?}", matrix.sum12, matrix.mu3, a.kappa);

    let mesh = domains::mesh_sphere_with_hole(&hole, eps, 0.05, eps / 8.0)?;
    let s = experiments::spectrum_of(&mesh, 3, SolverOptions::default())?;
    let sum = s.eigenvalues[1] + s.eigenvalues[2];
    println!(
        "FEM ({} vertices): mu1 + mu2 = {sum:.6}, deficit {:.5} vs 3 eps^2 = {:.5}, mu3 = {:.6}",
        mesh.vertices.len(),
        4.0 - sum,
        3.0 * eps * eps,
        s.eigenvalues[3]
    );
    Ok(())
}
