//! Virtual mass of the ellipses `ω_λ`: closed form against the exterior
//! boundary-integral oracle and the energy route.

use std::f64::consts::PI;

use capspec::hole_models::{self, BoundaryCurve};

fn main() -> capspec::Result<()> {
    println!("lambda  M11 closed      M11 oracle      M22 closed      M22 oracle      trace - 4pi cap^2");
    for lambda in [1.1, 1.5, 2.0, 4.0] {
        let hole = hole_models::ellipse_from_lambda(lambda)?;
        let sol = hole_models::exterior_neumann_oracle(
            &hole.boundary(hole_models::DEFAULT_COLLOC),
            hole_models::DEFAULT_MODES,
            hole_models::DEFAULT_COLLOC,
        )?;
        println!(
            "{lambda:<6}  {:.12}  {:.12}  {:.12}  {:.12}  {:+.1e}",
            hole.m[0][0],
            sol.m_est[0][0],
            hole.m[1][1],
            sol.m_est[1][1],
            hole.trace() - 4.0 * PI * hole.cap * hole.cap
        );
    }

    // Energy identity on a rotated ellipse: the matrix rotates with the hole.
    let hole = hole_models::ellipse_from_lambda(2.0)?;
    let curve: BoundaryCurve = hole.boundary(256).rotated(0.3);
    let sol = hole_models::exterior_neumann_oracle(&curve, 32, 256)?;
    let energy = hole_models::energy_virtual_mass(&sol, hole.area)?;
    println!("rotated by 0.3: oracle {:?}", sol.m_est);
    println!("                energy {:?}", energy);
    Ok(())
}
