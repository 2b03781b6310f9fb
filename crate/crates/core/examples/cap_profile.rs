//! First Neumann eigenvalue of caps by radial shooting, the sign of the
//! hot-spot indicator and the interior maximum of the profile.
//!
//! `cargo run --example cap_profile -- 0.8` prints the profile of `B_{0.8π}` as CSV.

use std::f64::consts::PI;

use capspec::cap_eigen;

fn main() -> capspec::Result<()> {
    if let Some(arg) = std::env::args().nth(1) {
        let theta = capspec::units::parse_angle(&arg, false)?;
        print!("{}", cap_eigen::normalized_profile(theta)?.to_csv());
        return Ok(());
    }
    println!("theta/pi   mu1            mu1 sin^2 - 1   t_max/pi");
    for k in [3, 4, 5, 6, 7, 8, 9] {
        let theta = 0.1 * k as f64 * PI;
        let cap = cap_eigen::normalized_profile(theta)?;
        let ind = cap.mu1 * theta.sin().powi(2) - 1.0;
        let tmax = if ind < 0.0 { format!("{:.6}", cap_eigen::find_tmax_in(&cap)? / PI) } else { "-".into() };
        println!("{:.1}        {:.10}   {:+.6e}   {tmax}", theta / PI, cap.mu1, ind);
    }
    Ok(())
}
