//! Second-order eigenvalue shifts under small holes.
//!
//! A cluster of eigenfunctions `u_i` with eigenvalue `μ` splits, after
//! piercing holes `ψ_n(εω_n)` and moving the outer boundary by `ε²φ`, as
//! `μ_i(ε) = μ + ε² κ_i + o(ε²)` where `κ_i` are the ascending eigenvalues of
//!
//! ```text
//! A_ij = ∫_{∂Ω} (⟨∇u_i,∇u_j⟩ − μ u_i u_j)⟨φ,ν⟩
//!      + Σ_n ( ρ_n(0) μ |ω_n| u_i(O_n) u_j(O_n) − ⟨M_n ∇(u_i∘ψ_n)(0), ∇(u_j∘ψ_n)(0)⟩ ).
//! ```

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cap_eigen::{self, CapEigen};
use crate::error::{Error, Result};
use crate::hole_models::{self, EllipseHole, Mat2};
use crate::roots;

/// One hole as seen by the eigenfunction cluster.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoleDatum {
    /// Conformal factor of the chart at the hole centre.
    pub rho0: f64,
    /// Area of the unscaled hole in chart coordinates.
    pub area: f64,
    pub m: Mat2,
    /// `u_i` at the hole centre, one per cluster member.
    pub values: Vec<f64>,
    /// Chart gradients of `u_i` at the hole centre.
    pub gradients: Vec<[f64; 2]>,
}

/// Precomputed boundary integrals `∫(⟨∇u_i,∇u_j⟩ − μ u_i u_j)⟨φ,ν⟩`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTermDatum {
    pub entries: Vec<Vec<f64>>,
}

impl BoundaryTermDatum {
    pub fn zero(n: usize) -> Self {
        BoundaryTermDatum { entries: vec![vec![0.0; n]; n] }
    }
}

/// Assembled matrix with its ascending eigenvalues.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationMatrix {
    pub entries: Vec<Vec<f64>>,
    pub kappa: Vec<f64>,
}

impl PerturbationMatrix {
    pub fn trace(&self) -> f64 {
        (0..self.entries.len()).map(|i| self.entries[i][i]).sum()
    }
}

pub fn perturbation_matrix(holes: &[HoleDatum], boundary: &BoundaryTermDatum, mu: f64) -> Result<PerturbationMatrix> {
    if !(mu > 0.0) {
        return Err(Error::Domain(format!("eigenvalue μ = {mu} must be positive")));
    }
    let n = boundary.entries.len();
    if boundary.entries.iter().any(|row| row.len() != n) {
        return Err(Error::Dimension("boundary term is not square".into()));
    }
    for (i, row) in boundary.entries.iter().enumerate() {
        for j in 0..i {
            if (row[j] - boundary.entries[j][i]).abs() > 1e-12 * (1.0 + row[j].abs()) {
                return Err(Error::Dimension(format!("boundary term not symmetric at ({i}, {j})")));
            }
        }
    }
    let mut a = boundary.entries.clone();
    for (k, hole) in holes.iter().enumerate() {
        if hole.values.len() != n || hole.gradients.len() != n {
            return Err(Error::Dimension(format!(
                "hole {k}: {} values and {} gradients for a cluster of size {n}",
                hole.values.len(),
                hole.gradients.len()
            )));
        }
        for i in 0..n {
            for j in 0..n {
                let gi = hole.gradients[i];
                let gj = hole.gradients[j];
                let mg = [hole.m[0][0] * gi[0] + hole.m[0][1] * gi[1], hole.m[1][0] * gi[0] + hole.m[1][1] * gi[1]];
                a[i][j] +=
                    hole.rho0 * mu * hole.area * hole.values[i] * hole.values[j] - (mg[0] * gj[0] + mg[1] * gj[1]);
            }
        }
    }
    let kappa = ascending_eigenvalues(&a);
    Ok(PerturbationMatrix { entries: a, kappa })
}

fn ascending_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    match n {
        0 => vec![],
        1 => vec![a[0][0]],
        2 => hole_models::eig2([[a[0][0], a[0][1]], [a[1][0], a[1][1]]]).to_vec(),
        _ => {
            let m = DMatrix::from_fn(n, n, |i, j| 0.5 * (a[i][j] + a[j][i]));
            let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
            ev.sort_by(f64::total_cmp);
            ev
        }
    }
}

/// Result of the four-hole construction on a cap.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationCertificate {
    pub theta: f64,
    pub t: f64,
    pub lambda: f64,
    /// Coefficient of `ε²` in `μ₁(Ω^ε) − μ₁(B_θ)`.
    pub slope: f64,
    pub positive: bool,
    pub kappa: Vec<f64>,
}

impl PerturbationCertificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("certificate serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub const CSV_HEADER: &'static str = "theta,t,lambda,slope,positive,kappa1,kappa2";

    /// CSV line with angles divided by `angle_unit`.
    pub fn csv_row(&self, angle_unit: f64) -> String {
        let mut row = format!(
            "{:e},{:e},{:e},{:e},{}",
            self.theta / angle_unit,
            self.t / angle_unit,
            self.lambda,
            self.slope,
            self.positive
        );
        for k in &self.kappa {
            let _ = write!(row, ",{k:e}");
        }
        row
    }
}

/// Increase of cap area per unit `ε²` compensating four holes of area `π`.
pub const AREA_PER_EPS2: f64 = 4.0 * PI;

/// Boundary term for the pair `g(t)cos φ, g(t)sin φ` when the rim moves
/// outward uniformly by `area_per_eps2 / |∂B_θ|` per unit `ε²`.
pub fn cap_boundary_term(cap: &CapEigen, area_per_eps2: f64) -> BoundaryTermDatum {
    let theta = cap.theta;
    let s = theta.sin();
    let normal_speed = area_per_eps2 / (2.0 * PI * s);
    // ∫₀^{2π} (g² sin²φ / sin²θ − μ g² cos²φ) sin θ dφ, with g'(θ) = 0.
    let g = cap.g_boundary();
    let d = normal_speed * s * PI * g * g * (1.0 / (s * s) - cap.mu1);
    BoundaryTermDatum { entries: vec![vec![d, 0.0], vec![0.0, d]] }
}

/// Hole data for four copies of `ω` at latitude `t`, longitudes `jπ/2`, long
/// axis along the parallel.
pub fn four_hole_data(cap: &CapEigen, t: f64, m: Mat2, area: f64) -> Vec<HoleDatum> {
    let (g, gp) = cap.eval(t);
    let st = t.sin();
    (0..4)
        .map(|j| {
            let phi = j as f64 * FRAC_PI_2;
            let (sp, cp) = phi.sin_cos();
            HoleDatum {
                rho0: 1.0,
                area,
                m,
                values: vec![g * cp, g * sp],
                // e₁ along the parallel (increasing φ), e₂ towards the pole.
                gradients: vec![[-g * sp / st, -gp * cp], [g * cp / st, -gp * sp]],
            }
        })
        .collect()
}

fn check_configuration(theta: f64, t: f64) -> Result<()> {
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::Domain(format!("aperture {theta} outside (0, π)")));
    }
    if !(t > 0.0 && t < theta) {
        return Err(Error::Domain(format!("hole latitude {t} outside (0, θ = {theta})")));
    }
    Ok(())
}

/// Direct slope formula for a profile and an arbitrary hole matrix.
pub fn four_hole_slope_direct(cap: &CapEigen, t: f64, m: Mat2) -> f64 {
    let (g, gp) = cap.eval(t);
    let mu = cap.mu1;
    let gb = cap.g_boundary();
    let st2 = t.sin().powi(2);
    let sth2 = cap.theta.sin().powi(2);
    2.0 * PI * (mu * g * g - m[0][0] / PI * g * g / st2 - m[1][1] / PI * gp * gp + (1.0 / sth2 - mu) * gb * gb)
}

/// Slope through the assembled matrix; `(κ₁ + κ₂)/2`.
pub fn four_hole_matrix(cap: &CapEigen, t: f64, m: Mat2) -> Result<PerturbationMatrix> {
    check_configuration(cap.theta, t)?;
    let holes = four_hole_data(cap, t, m, PI);
    perturbation_matrix(&holes, &cap_boundary_term(cap, AREA_PER_EPS2), cap.mu1)
}

pub fn certificate_for(cap: &CapEigen, t: f64, lambda: f64) -> Result<PerturbationCertificate> {
    check_configuration(cap.theta, t)?;
    let hole = hole_models::ellipse_from_lambda(lambda)?;
    let slope = four_hole_slope_direct(cap, t, hole.m);
    let matrix = four_hole_matrix(cap, t, hole.m)?;
    Ok(PerturbationCertificate { theta: cap.theta, t, lambda, slope, positive: slope > 0.0, kappa: matrix.kappa })
}

pub fn four_hole_slope(theta: f64, t: f64, lambda: f64) -> Result<PerturbationCertificate> {
    check_configuration(theta, t)?;
    hole_models::ellipse_from_lambda(lambda)?;
    let cap = cap_eigen::normalized_profile(theta)?;
    certificate_for(&cap, t, lambda)
}

/// `{1 + 2⁻ᵏ : k = 1..14} ∪ {2, 4}`, ascending.
pub fn lambda_grid() -> Vec<f64> {
    let mut v: Vec<f64> = (1..=14).rev().map(|k| 1.0 + 0.5f64.powi(k)).collect();
    v.extend([2.0, 4.0]);
    v
}

/// Largest grid `λ` with `μ₁ sin²t > 2/(1 + λ⁻²)`.
pub fn select_lambda(mu1: f64, t: f64) -> Option<f64> {
    let lhs = mu1 * t.sin().powi(2);
    lambda_grid().into_iter().rfind(|&l| lhs > 2.0 / (1.0 + l.powi(-2)))
}

const TAU_MIN: f64 = 1e-4;
const TAU_MAX: f64 = 0.2;
const TAU_POINTS: usize = 41;
const POLISH_TOL: f64 = 1e-6;
const LOG_ETA_RANGE: (f64, f64) = (-12.0, 2.0);

/// Best four-hole certificate for the cap `B_θ`.
pub fn certify_counterexample(theta: f64) -> Result<PerturbationCertificate> {
    let cap = cap_eigen::normalized_profile(theta)?;
    certify_with(&cap)
}

pub fn certify_with(cap: &CapEigen) -> Result<PerturbationCertificate> {
    let theta = cap.theta;
    let crit = cap_eigen::find_critical_aperture()?;
    if theta > crit && cap.mu1 * theta.sin().powi(2) < 1.0 {
        let t = cap_eigen::find_tmax_in(cap)?;
        let lambda = select_lambda(cap.mu1, t).unwrap_or(1.0 + 0.5f64.powi(14));
        return certificate_for(cap, t, lambda);
    }

    let slope_at = |t: f64, log_eta: f64| -> f64 {
        let lambda = 1.0 + log_eta.exp();
        match hole_models::ellipse_from_lambda(lambda) {
            Ok(h) if t > 0.0 && t < theta => four_hole_slope_direct(cap, t, h.m),
            _ => f64::NEG_INFINITY,
        }
    };
    let cot = crit.cos() / crit.sin();
    let mut best: Option<(f64, f64, f64)> = None;
    for k in 0..TAU_POINTS {
        let tau = TAU_MIN * (TAU_MAX / TAU_MIN).powf(k as f64 / (TAU_POINTS - 1) as f64);
        let t = crit - tau;
        if t >= theta {
            continue;
        }
        let eta = -tau * cot;
        let s = slope_at(t, eta.ln());
        if best.is_none_or(|b| s > b.2) {
            best = Some((t, eta.ln(), s));
        }
    }
    let (mut t, mut le, mut s) = best.unwrap_or_else(|| {
        let t = 0.9 * theta;
        (t, 0.0, slope_at(t, 0.0))
    });

    // Coordinate ascent with golden-section line searches.
    let t_lo = 1e-3 * theta;
    let t_hi = theta * (1.0 - 1e-9);
    for _ in 0..50 {
        let before = (t, le);
        let (nt, _) = roots::golden_max(|x| slope_at(x, le), t_lo, t_hi, POLISH_TOL);
        if slope_at(nt, le) > s {
            t = nt;
            s = slope_at(t, le);
        }
        let (nl, _) = roots::golden_max(|x| slope_at(t, x), LOG_ETA_RANGE.0, LOG_ETA_RANGE.1, POLISH_TOL);
        if slope_at(t, nl) > s {
            le = nl;
            s = slope_at(t, le);
        }
        if (t - before.0).abs() < POLISH_TOL && (le - before.1).abs() < POLISH_TOL {
            break;
        }
    }
    certificate_for(cap, t, 1.0 + le.exp())
}

/// Outcome of the left-of-Θ scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaScan {
    pub step: f64,
    pub delta_max: f64,
    /// First grid aperture whose best certificate is not positive.
    pub failing: Option<PerturbationCertificate>,
    pub certificates: Vec<PerturbationCertificate>,
}

const DELTA_CHUNK: usize = 16;

/// Largest `δ = k·step` with a positive certificate at every `Θ − j·step`, `j < k`.
pub fn delta_scan(step: f64) -> Result<DeltaScan> {
    if !(step > 0.0) {
        return Err(Error::Domain(format!("step {step} must be positive")));
    }
    let crit = cap_eigen::find_critical_aperture()?;
    let max_k = (crit / step).floor() as usize;
    let mut certificates = Vec::new();
    let mut k0 = 0;
    while k0 < max_k {
        let ks: Vec<usize> = (k0..(k0 + DELTA_CHUNK).min(max_k)).collect();
        let chunk: Vec<Result<PerturbationCertificate>> =
            ks.par_iter().map(|&k| certify_counterexample(crit - k as f64 * step)).collect();
        for (k, cert) in ks.iter().zip(chunk) {
            let cert = cert?;
            if !cert.positive {
                return Ok(DeltaScan { step, delta_max: *k as f64 * step, failing: Some(cert), certificates });
            }
            certificates.push(cert);
        }
        k0 += DELTA_CHUNK;
    }
    Ok(DeltaScan { step, delta_max: max_k as f64 * step, failing: None, certificates })
}

/// Leading term `η g(Θ)²/sin²Θ` against the exact bracket at `t = Θ − τ`, `λ = 1 + η`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NearCriticalExpansion {
    pub tau: f64,
    pub eta: f64,
    pub predicted: f64,
    pub exact: f64,
    pub ratio: f64,
}

pub fn near_critical_expansion(tau: f64) -> Result<NearCriticalExpansion> {
    if !(tau > 0.0 && tau < 0.1) {
        return Err(Error::Domain(format!("τ = {tau} outside (0, 0.1)")));
    }
    let crit = cap_eigen::find_critical_aperture()?;
    let cap = cap_eigen::normalized_profile(crit)?;
    let eta = -tau * crit.cos() / crit.sin();
    let g = cap.g_boundary();
    let predicted = eta * g * g / crit.sin().powi(2);
    let hole = hole_models::ellipse_from_lambda(1.0 + eta)?;
    let exact = four_hole_slope_direct(&cap, crit - tau, hole.m) / (2.0 * PI);
    Ok(NearCriticalExpansion { tau, eta, predicted, exact, ratio: exact / predicted })
}

/// Spectral data of the sphere with one small hole.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereHole {
    pub sum12: f64,
    pub mu3: f64,
}

/// Closed form: `μ₁ + μ₂ = 4 − 3 cap² ε²`, `μ₃ = 2 + (3|ω|/2π) ε²`.
pub fn sphere_single_hole(hole: &EllipseHole, eps: f64) -> Result<SphereHole> {
    if !(eps >= 0.0) {
        return Err(Error::Domain(format!("ε = {eps} must be non-negative")));
    }
    let e2 = eps * eps;
    Ok(SphereHole { sum12: 4.0 - 3.0 * hole.cap * hole.cap * e2, mu3: 2.0 + 3.0 * hole.area / (2.0 * PI) * e2 })
}

/// Hole datum for one hole at the south pole with the coordinate eigenfunctions.
pub fn sphere_hole_datum(hole: &EllipseHole) -> HoleDatum {
    let c = (3.0 / (4.0 * PI)).sqrt();
    HoleDatum {
        rho0: 1.0,
        area: hole.area,
        m: hole.m,
        values: vec![0.0, 0.0, -c],
        gradients: vec![[c, 0.0], [0.0, c], [0.0, 0.0]],
    }
}

/// Same quantities through the assembled 3×3 matrix.
pub fn sphere_single_hole_matrix(hole: &EllipseHole, eps: f64) -> Result<(SphereHole, PerturbationMatrix)> {
    if !(eps >= 0.0) {
        return Err(Error::Domain(format!("ε = {eps} must be non-negative")));
    }
    let a = perturbation_matrix(&[sphere_hole_datum(hole)], &BoundaryTermDatum::zero(3), 2.0)?;
    let e2 = eps * eps;
    // Ordering of κ: the two negative hole-gradient modes, then the positive value mode.
    let sum12 = 4.0 + e2 * (a.entries[0][0] + a.entries[1][1]);
    let mu3 = 2.0 + e2 * a.entries[2][2];
    Ok((SphereHole { sum12, mu3 }, a))
}
