//! P1 surface FEM on caps: hemisphere anchor, full sphere triplet and the
//! O(h²) convergence against the shooting value on `B_{0.8π}`.

use std::f64::consts::PI;

use capspec::cap_eigen;
use capspec::fem::{domains, eigen::SolverOptions, experiments};

fn main() -> capspec::Result<()> {
    let opts = SolverOptions::default();
    let sphere = experiments::spectrum_of(&domains::mesh_cap(PI, 0.08)?, 3, opts)?;
    println!("sphere h=0.08: {:?}", sphere.eigenvalues);

    let theta = 0.8 * PI;
    let exact = cap_eigen::mu1_of_cap(theta)?;
    println!("B_0.8pi shooting mu1 = {exact:.10}");
    let mut prev: Option<(f64, f64)> = None;
    for h in [0.08, 0.04, 0.02] {
        let mesh = domains::mesh_cap(theta, h)?;
        let s = experiments::spectrum_of(&mesh, 2, opts)?;
        let err = (s.eigenvalues[1] - exact).abs();
        let order = prev.map(|(h0, e0)| (e0 / err).ln() / (h0 / h).ln());
        println!(
            "h = {h:<5} vertices {:>6}  mu1 = {:.8}  error {err:.3e}  order {}",
            mesh.vertices.len(),
            s.eigenvalues[1],
            order.map_or("-".into(), |o| format!("{o:.2}"))
        );
        prev = Some((h, err));
    }
    Ok(())
}
