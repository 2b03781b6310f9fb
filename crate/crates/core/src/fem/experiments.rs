//! FEM experiments: spectra of single domains, the ε² slope fit for four
//! holes and the helmet sweep.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::assembly::assemble_p1;
use super::domains::{self, Helmet, HoleLayout};
use super::eigen::{neumann_spectrum_with, SolverOptions, SpectrumResult};
use super::mesh::SurfaceMesh;
use crate::error::{Error, Result};
use crate::perturbation;

pub fn spectrum_of(mesh: &SurfaceMesh, count: usize, opts: SolverOptions) -> Result<SpectrumResult> {
    let (k, m) = assemble_p1(mesh)?;
    neumann_spectrum_with(&k, &m, count, opts, mesh.h)
}

/// One line of the spectra table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub theta: f64,
    pub eps: f64,
    pub h: f64,
    pub mu: [f64; 4],
    pub residual: f64,
}

pub const SPECTRA_HEADER: &str = "theta,eps,h,mu0,mu1,mu2,mu3,residual";

impl SpectrumRow {
    pub fn new(theta: f64, eps: f64, s: &SpectrumResult) -> Result<Self> {
        if s.eigenvalues.len() < 4 {
            return Err(Error::Dimension(format!("need 4 eigenvalues, have {}", s.eigenvalues.len())));
        }
        Ok(SpectrumRow {
            theta,
            eps,
            h: s.h,
            mu: [s.eigenvalues[0], s.eigenvalues[1], s.eigenvalues[2], s.eigenvalues[3]],
            residual: s.max_residual(),
        })
    }

    /// CSV line with `theta` divided by `angle_unit`.
    pub fn csv(&self, angle_unit: f64) -> String {
        format!(
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            self.theta / angle_unit,
            self.eps,
            self.h,
            self.mu[0],
            self.mu[1],
            self.mu[2],
            self.mu[3],
            self.residual
        )
    }
}

/// Mesh resolution for the hole experiments: `h_far` away from the holes,
/// `ε / near_divisor` on them. With `richardson`, a second pass at √2 coarser
/// resolution is used to extrapolate each difference to `h → 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HPolicy {
    pub h_far: f64,
    pub near_divisor: f64,
    pub richardson: bool,
}

impl Default for HPolicy {
    fn default() -> Self {
        HPolicy { h_far: 0.03, near_divisor: 8.0, richardson: false }
    }
}

impl HPolicy {
    fn coarser(&self) -> Self {
        HPolicy { h_far: self.h_far * 2f64.sqrt(), near_divisor: self.near_divisor / 2f64.sqrt(), richardson: false }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HoleRun {
    pub h_far: f64,
    pub h_near: f64,
    pub theta_eps: f64,
    pub dofs: usize,
    /// `μ₀..μ₃` with the holes.
    pub holes: [f64; 4],
    /// `μ₀..μ₃` of the same-resolution cap `B_θ`.
    pub reference: [f64; 4],
    /// Mean of the `(μ₁, μ₂)` pair shift.
    pub delta: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EpsSample {
    pub eps: f64,
    pub runs: Vec<HoleRun>,
    /// Shift used in the fit (extrapolated when two runs are present).
    pub delta: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SlopeFit {
    pub theta: f64,
    pub t: f64,
    pub lambda: f64,
    pub policy: HPolicy,
    pub slope: f64,
    pub analytic: f64,
    pub relative_error: f64,
    pub samples: Vec<EpsSample>,
}

fn four(s: &SpectrumResult) -> [f64; 4] {
    [0, 1, 2, 3].map(|i| s.eigenvalues[i])
}

fn hole_run(theta: f64, t: f64, lambda: f64, eps: f64, policy: HPolicy, opts: SolverOptions) -> Result<HoleRun> {
    let layout = HoleLayout::new(theta, t, lambda, eps)?;
    let h_near = eps / policy.near_divisor;
    let reference = domains::mesh_layout_reference(&layout, policy.h_far, h_near)?;
    let (mesh, matched) = domains::mesh_layout_matched(&layout, policy.h_far, h_near, reference.area())?;
    let s_ref = spectrum_of(&reference, 3, opts)?;
    let s_holes = spectrum_of(&mesh, 3, opts)?;
    let (a, b) = (four(&s_holes), four(&s_ref));
    Ok(HoleRun {
        h_far: policy.h_far,
        h_near,
        theta_eps: matched.theta_eps,
        dofs: mesh.vertices.len(),
        holes: a,
        reference: b,
        delta: 0.5 * (a[1] + a[2]) - 0.5 * (b[1] + b[2]),
        residual: s_holes.max_residual().max(s_ref.max_residual()),
    })
}

/// Zero-intercept least-squares coefficient of `μ₁(Ω^ε) − μ₁(B_θ)` against `ε²`,
/// both sides meshed at the same resolution, compared with the asymptotic slope.
pub fn fit_eps2_slope(
    theta: f64,
    t: f64,
    lambda: f64,
    eps_list: &[f64],
    policy: HPolicy,
    opts: SolverOptions,
) -> Result<SlopeFit> {
    if eps_list.len() < 3 || eps_list.iter().any(|&e| !(0.04..=0.2).contains(&e)) {
        return Err(Error::Domain(format!("need at least three ε values in [0.04, 0.2], got {eps_list:?}")));
    }
    if !(policy.h_far > 0.0 && policy.near_divisor >= 6.0) {
        return Err(Error::Domain(format!("mesh policy {policy:?} needs h_far > 0 and ε/h_near ≥ 6")));
    }
    let analytic = perturbation::four_hole_slope(theta, t, lambda)?.slope;
    let mut jobs = vec![];
    for &eps in eps_list {
        jobs.push((eps, policy));
        if policy.richardson {
            jobs.push((eps, policy.coarser()));
        }
    }
    let runs: Vec<HoleRun> =
        jobs.par_iter().map(|&(eps, p)| hole_run(theta, t, lambda, eps, p, opts)).collect::<Result<_>>()?;
    let per = if policy.richardson { 2 } else { 1 };
    let samples: Vec<EpsSample> = eps_list
        .iter()
        .zip(runs.chunks(per))
        .map(|(&eps, r)| {
            // h-ratio √2 between the runs, O(h²) error.
            let delta = if r.len() == 2 { 2.0 * r[0].delta - r[1].delta } else { r[0].delta };
            EpsSample { eps, runs: r.to_vec(), delta }
        })
        .collect();
    let num: f64 = samples.iter().map(|s| s.eps.powi(2) * s.delta).sum();
    let den: f64 = samples.iter().map(|s| s.eps.powi(4)).sum();
    let slope = num / den;
    Ok(SlopeFit {
        theta,
        t,
        lambda,
        policy,
        slope,
        analytic,
        relative_error: (slope - analytic).abs() / analytic.abs(),
        samples,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HelmetPoint {
    pub theta: f64,
    pub theta_eps: f64,
    pub mu_helmet: f64,
    pub mu_cap: f64,
    pub dofs: usize,
}

impl HelmetPoint {
    pub fn gap(&self) -> f64 {
        self.mu_helmet - self.mu_cap
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HelmetSweep {
    pub eps: f64,
    pub h: f64,
    pub points: Vec<HelmetPoint>,
    /// Apertures where the helmet beats the cap, endpoints interpolated.
    pub interval: Option<(f64, f64)>,
    /// Most negative second difference of the helmet curve.
    pub corner: Option<f64>,
}

/// The replication grid `0.55π, 0.56π, …, 0.95π`.
pub fn default_helmet_grid() -> Vec<f64> {
    (55..=95).map(|k| k as f64 * 0.01 * PI).collect()
}

fn helmet_point(theta: f64, eps: f64, h: f64, opts: SolverOptions) -> Result<HelmetPoint> {
    let h_strip = domains::default_strip_size(eps, h);
    let helmet = Helmet::new(theta, eps)?;
    let mesh = domains::mesh_helmet_with(theta, eps, h, h_strip)?;
    let reference = domains::mesh_helmet_reference(theta, eps, h, h_strip)?;
    let a = spectrum_of(&mesh, 1, opts)?;
    let b = spectrum_of(&reference, 1, opts)?;
    Ok(HelmetPoint {
        theta,
        theta_eps: helmet.theta_eps,
        mu_helmet: a.eigenvalues[1],
        mu_cap: b.eigenvalues[1],
        dofs: mesh.vertices.len(),
    })
}

/// `μ₁` of area-matched helmets against same-resolution caps along `thetas`.
pub fn helmet_sweep(eps: f64, thetas: &[f64], h: f64, opts: SolverOptions) -> Result<HelmetSweep> {
    if thetas.is_empty() || thetas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("aperture grid must be non-empty and increasing".into()));
    }
    let points: Vec<HelmetPoint> =
        thetas.par_iter().map(|&th| helmet_point(th, eps, h, opts)).collect::<Result<_>>()?;
    let interval = positive_interval(&points);
    let corner = corner(&points);
    Ok(HelmetSweep { eps, h, points, interval, corner })
}

fn crossing(a: &HelmetPoint, b: &HelmetPoint) -> f64 {
    let (ga, gb) = (a.gap(), b.gap());
    a.theta + (b.theta - a.theta) * ga / (ga - gb)
}

/// Longest run of positive gaps, with interpolated endpoints.
fn positive_interval(points: &[HelmetPoint]) -> Option<(f64, f64)> {
    let mut best: Option<(usize, usize)> = None;
    let mut i = 0;
    while i < points.len() {
        if points[i].gap() > 0.0 {
            let mut j = i;
            while j + 1 < points.len() && points[j + 1].gap() > 0.0 {
                j += 1;
            }
            if best.is_none_or(|(a, b)| j - i > b - a) {
                best = Some((i, j));
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    let (i, j) = best?;
    let lo = if i > 0 { crossing(&points[i - 1], &points[i]) } else { points[i].theta };
    let hi = if j + 1 < points.len() { crossing(&points[j], &points[j + 1]) } else { points[j].theta };
    Some((lo, hi))
}

fn corner(points: &[HelmetPoint]) -> Option<f64> {
    points
        .windows(3)
        .map(|w| {
            let (h1, h2) = (w[1].theta - w[0].theta, w[2].theta - w[1].theta);
            let d2 =
                2.0 * (w[0].mu_helmet * h2 - w[1].mu_helmet * (h1 + h2) + w[2].mu_helmet * h1) / (h1 * h2 * (h1 + h2));
            (w[1].theta, d2)
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(t, _)| t)
}

pub const HELMET_SWEEP_HEADER: &str = "theta,theta_eps,mu_helmet,mu_cap,gap";

impl HelmetSweep {
    pub fn to_csv(&self, angle_unit: f64) -> String {
        let mut out = format!("{HELMET_SWEEP_HEADER}\n");
        for p in &self.points {
            let _ = writeln!(
                out,
                "{:e},{:e},{:e},{:e},{:e}",
                p.theta / angle_unit,
                p.theta_eps / angle_unit,
                p.mu_helmet,
                p.mu_cap,
                p.gap()
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(theta: f64, mu_helmet: f64, mu_cap: f64) -> HelmetPoint {
        HelmetPoint { theta, theta_eps: theta, mu_helmet, mu_cap, dofs: 0 }
    }

    #[test]
    fn interval_interpolation() {
        let pts: Vec<_> = [(0.0, -1.0), (1.0, 1.0), (2.0, 3.0), (3.0, -3.0), (4.0, 1.0)]
            .iter()
            .map(|&(t, g)| pt(t, g, 0.0))
            .collect();
        let (lo, hi) = positive_interval(&pts).unwrap();
        assert!((lo - 0.5).abs() < 1e-15);
        assert!((hi - 2.5).abs() < 1e-15);
    }

    #[test]
    fn corner_of_a_tent() {
        let pts: Vec<_> = (0..11).map(|k| pt(k as f64, -((k as f64) - 6.0).abs(), 0.0)).collect();
        assert_eq!(corner(&pts), Some(6.0));
    }

    #[test]
    fn fit_rejects_short_lists() {
        let r = fit_eps2_slope(0.8 * PI, 1.9, 2.0, &[0.1, 0.15], HPolicy::default(), SolverOptions::default());
        assert!(matches!(r, Err(Error::Domain(_))));
    }
}
