//! Locates Θ (hot spot leaves the rim), Θ′ (strip mode overtakes the cap mode)
//! and Θ″ (end of the first-order helmet window), and checks the degeneracy
//! of the profile at Θ.

use std::f64::consts::PI;

use capspec::{cap_eigen, helmet};

fn main() -> capspec::Result<()> {
    let theta = cap_eigen::find_critical_aperture()?;
    let mu = cap_eigen::mu1_of_cap(theta)?;
    println!("Theta       = {:.12}pi   mu1 sin^2 - 1 = {:.2e}", theta / PI, mu * theta.sin().powi(2) - 1.0);
    println!("Theta'      = {:.12}pi", cap_eigen::find_strip_aperture()? / PI);
    match helmet::find_theta_doubleprime()? {
        Some(t) => println!("Theta''     = {:.12}pi", t / PI),
        None => println!("Theta''     = none below pi - 1e-3 (the helmet gap stays positive)"),
    }
    let d = cap_eigen::critical_profile_derivatives()?;
    println!("g''(Theta)  = {:.3e}", d.g2);
    println!("g'''(Theta) = {:.9}  (predicted {:.9})", d.g3, d.g3_predicted);
    Ok(())
}
