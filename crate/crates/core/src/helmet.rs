//! First-order asymptotics for helmets: a cap `B_{θ^ε}` joined with the two
//! great-circle strips `{|x₁| < ε}` and `{|x₂| < ε}`, area-matched to `B_θ`.
//!
//! As `ε → 0` the strips collapse to four meridian arcs of length `π − θ`
//! hanging from the rim, whose first Dirichlet mode is `ν₁ = π²/(4(π−θ)²)`.
//! While `ν₁ > μ₁(B_θ)` the cap branch stays first and
//!
//! ```text
//! μ₁(H_{θ,ε}) ≈ μ₁(B_θ) + 4ε g(θ)² √μ₁ cot(√μ₁ (π−θ)),
//! μ₁(B_{θ^ε}) ≈ μ₁(B_θ) + 4ε (π−θ)(1/sin²θ − μ₁) g(θ)².
//! ```
//!
//! These are heuristic; every record carries `heuristic = true`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cap_eigen::{self, CapEigen};
use crate::error::{Error, Result};
use crate::roots;

pub use crate::cap_eigen::find_strip_aperture;

/// Distance to a cotangent pole below which slopes are not reported.
pub const POLE_GUARD: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HelmetReport {
    pub theta: f64,
    pub nu1: f64,
    pub mu1: f64,
    /// `d μ₁(B_{θ^ε}) / dε` at `ε = 0`.
    pub cap_slope: f64,
    /// `d μ₁(H_{θ,ε}) / dε` at `ε = 0`; NaN next to a cotangent pole.
    pub helmet_slope: f64,
    pub counterexample: bool,
    /// `θ > Θ′` and away from cotangent poles.
    pub valid: bool,
    pub heuristic: bool,
}

pub fn graph_nu1(theta: f64) -> Result<f64> {
    check(theta)?;
    Ok(PI * PI / (4.0 * (PI - theta).powi(2)))
}

fn check(theta: f64) -> Result<()> {
    if theta > 0.0 && theta < PI {
        Ok(())
    } else {
        Err(Error::Domain(format!("aperture {theta} outside (0, π)")))
    }
}

/// `√μ cot(√μ(π−θ)) − (π−θ)(1/sin²θ − μ)`: the slope gap divided by `4g(θ)²`.
pub fn reduced_gap(theta: f64, mu1: f64) -> f64 {
    let r = mu1.sqrt();
    let x = r * (PI - theta);
    r * x.cos() / x.sin() - (PI - theta) * (1.0 / theta.sin().powi(2) - mu1)
}

fn near_pole(theta: f64, mu1: f64) -> bool {
    let x = mu1.sqrt() * (PI - theta);
    let k = (x / PI).round();
    k >= 1.0 && (x - k * PI).abs() < POLE_GUARD
}

pub fn helmet_slopes(theta: f64) -> Result<HelmetReport> {
    check(theta)?;
    let cap = cap_eigen::normalized_profile(theta)?;
    report_for(&cap)
}

pub fn report_for(cap: &CapEigen) -> Result<HelmetReport> {
    let theta = cap.theta;
    let mu = cap.mu1;
    let g2 = cap.g_boundary().powi(2);
    let prime = find_strip_aperture()?;
    let cap_slope = 4.0 * (PI - theta) * (1.0 / theta.sin().powi(2) - mu) * g2;
    let pole = near_pole(theta, mu);
    let r = mu.sqrt();
    let x = r * (PI - theta);
    let helmet_slope = if pole { f64::NAN } else { 4.0 * g2 * r * x.cos() / x.sin() };
    Ok(HelmetReport {
        theta,
        nu1: graph_nu1(theta)?,
        mu1: mu,
        cap_slope,
        helmet_slope,
        counterexample: !pole && reduced_gap(theta, mu) > 0.0,
        valid: !pole && theta > prime,
        heuristic: true,
    })
}

/// First sign change of the slope gap above Θ, or `None` up to `π − 1e-3`.
pub fn find_theta_doubleprime() -> Result<Option<f64>> {
    let crit = cap_eigen::find_critical_aperture()?;
    let hi = PI - 1e-3;
    let gap = |th: f64| -> Result<f64> { Ok(reduced_gap(th, cap_eigen::mu1_of_cap(th)?)) };
    match roots::scan_sign_change(gap, crit, hi, 400)? {
        Some((a, b)) => Ok(Some(roots::brent(gap, a, b, 1e-10, 200)?)),
        None => Ok(None),
    }
}

/// `(μ₁(B_θ) + ε·helmet_slope, μ₁(B_θ) + ε·cap_slope)`.
pub fn helmet_mu1_asymptote(theta: f64, eps: f64) -> Result<(f64, f64)> {
    if !(eps >= 0.0) {
        return Err(Error::Domain(format!("ε = {eps} must be non-negative")));
    }
    let r = helmet_slopes(theta)?;
    Ok((r.mu1 + eps * r.helmet_slope, r.mu1 + eps * r.cap_slope))
}

/// Reports on a grid of apertures, in grid order.
pub fn helmet_table(thetas: &[f64]) -> Result<Vec<HelmetReport>> {
    thetas.par_iter().map(|&t| helmet_slopes(t)).collect()
}

pub const CSV_HEADER: &str = "theta,nu1,cap_slope,helmet_slope,counterexample,valid";

/// CSV table with angles divided by `angle_unit`.
pub fn to_csv(reports: &[HelmetReport], angle_unit: f64) -> String {
    let mut out = format!("{CSV_HEADER}\n");
    for r in reports {
        let _ = writeln!(
            out,
            "{:e},{:e},{:e},{:e},{},{}",
            r.theta / angle_unit,
            r.nu1,
            r.cap_slope,
            r.helmet_slope,
            r.counterexample,
            r.valid
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nu1_values() {
        assert!((graph_nu1(PI / 2.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((graph_nu1(0.75 * PI).unwrap() - 4.0).abs() < 1e-12);
        assert!(graph_nu1(PI).is_err());
    }

    #[test]
    fn gap_is_scale_free() {
        let cap = cap_eigen::normalized_profile(0.75 * PI).unwrap();
        let r = report_for(&cap).unwrap();
        let g2 = cap.g_boundary().powi(2);
        let gap = (r.helmet_slope - r.cap_slope) / (4.0 * g2);
        assert!((gap - reduced_gap(cap.theta, cap.mu1)).abs() < 1e-12);
    }

    #[test]
    fn record_flags() {
        let r = helmet_slopes(0.75 * PI).unwrap();
        assert!(r.heuristic && r.valid && r.counterexample);
        assert!(r.nu1 > r.mu1);
    }

    #[test]
    fn csv_header() {
        let r = helmet_slopes(0.8 * PI).unwrap();
        let csv = to_csv(&[r], PI);
        assert!(csv.starts_with(CSV_HEADER));
        assert_eq!(csv.lines().count(), 2);
    }
}
