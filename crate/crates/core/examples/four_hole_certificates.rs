//! Positive four-hole certificates on caps wider than Θ, and the scan that
//! pushes them left of Θ.

use std::f64::consts::PI;

use capspec::perturbation::{self, PerturbationCertificate};

fn main() -> capspec::Result<()> {
    println!("{}", PerturbationCertificate::CSV_HEADER);
    for k in [0.72, 0.75, 0.8, 0.85, 0.9, 0.95] {
        let cert = perturbation::certify_counterexample(k * PI)?;
        println!("{}", cert.csv_row(PI));
    }
    let scan = perturbation::delta_scan(0.001 * PI)?;
    println!("delta_max = {:.3}pi over {} certified apertures", scan.delta_max / PI, scan.certificates.len());
    if let Some(c) = scan.failing {
        println!("first failure at {:.4}pi (slope {:.3e})", c.theta / PI, c.slope);
    }
    Ok(())
}
