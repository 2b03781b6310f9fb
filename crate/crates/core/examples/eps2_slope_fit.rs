//! Four holes on `B_{0.8π}` at the hot spot: FEM eigenvalue shifts against the
//! asymptotic `ε²` slope. Pass `--fine` for the Richardson-extrapolated run.

use std::f64::consts::PI;

use capspec::cap_eigen;
use capspec::fem::eigen::SolverOptions;
use capspec::fem::experiments::{fit_eps2_slope, HPolicy};

fn main() -> capspec::Result<()> {
    let fine = std::env::args().any(|a| a == "--fine");
    let policy = if fine {
        HPolicy { h_far: 0.014, near_divisor: 16.0, richardson: true }
    } else {
        HPolicy { h_far: 0.04, near_divisor: 6.0, richardson: false }
    };
    let theta = 0.8 * PI;
    let t = cap_eigen::find_tmax(theta)?;
    let fit = fit_eps2_slope(theta, t, 2.0, &[0.06, 0.1, 0.15], policy, SolverOptions::default())?;
    for s in &fit.samples {
        println!("eps = {:<5} delta/eps^2 = {:.5}", s.eps, s.delta / (s.eps * s.eps));
    }
    println!("fitted {:.5}, asymptotic {:.5}, relative error {:.3}", fit.slope, fit.analytic, fit.relative_error);
    Ok(())
}
