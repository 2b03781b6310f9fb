//! First Neumann eigenvalue of spherical caps via radial shooting.
//!
//! On the cap `B_θ = {t < θ}` the first positive Neumann eigenspace is spanned
//! by `g(t) cos φ` and `g(t) sin φ`, where the radial profile solves
//!
//! ```text
//! -(1/sin t) (sin t · g')' + g / sin²t = μ g,   g(0) = 0,   g'(θ) = 0.
//! ```
//!
//! The equation has a regular singular point at `t = 0`; integration starts at
//! a small offset `t₀` from the series `g = t + a₃ t³` with `a₃ = (2 − 3μ)/24`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{self, Tolerance};
use crate::roots;

/// Default integration start offset.
pub const START_OFFSET: f64 = 1e-4;

/// Step in μ used while bracketing the first shooting root.
const MU_SCAN_STEP: f64 = 0.25;

/// First zero of `J₁'`, used for the flat-disk estimate of μ₁ on tiny caps.
const BESSEL_J1_PRIME_ZERO: f64 = 1.841_183_781_340_659_3;

/// Shooting parameters.
#[derive(Clone, Copy, Debug)]
pub struct ShootConfig {
    pub start: f64,
    pub tol: Tolerance,
}

impl Default for ShootConfig {
    fn default() -> Self {
        ShootConfig { start: START_OFFSET, tol: Tolerance::default() }
    }
}

/// One point of a radial profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub g: f64,
    pub gp: f64,
}

/// Result of a single shot at fixed μ; `g` is scaled so that `g'(0) = 1`.
#[derive(Clone, Debug)]
pub struct Shot {
    pub g_end: f64,
    pub gprime_end: f64,
    pub profile: Vec<Sample>,
}

fn check_aperture(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::Domain(format!("aperture {theta} outside (0, π)")));
    }
    Ok(())
}

/// Right-hand side of the radial equation as a first-order system.
fn radial_rhs(mu: f64) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] {
    move |t, y| {
        let (s, c) = t.sin_cos();
        [y[1], -c / s * y[1] + (1.0 / (s * s) - mu) * y[0]]
    }
}

/// Second derivative of `g` implied by the equation.
fn second_derivative(mu: f64, t: f64, g: f64, gp: f64) -> f64 {
    let (s, c) = t.sin_cos();
    -c / s * gp + (1.0 / (s * s) - mu) * g
}

/// Regular solution near the pole: `g ≈ t + a₃ t³`.
pub fn series_start(mu: f64, t0: f64) -> [f64; 2] {
    let a3 = (2.0 - 3.0 * mu) / 24.0;
    [t0 + a3 * t0.powi(3), 1.0 + 3.0 * a3 * t0 * t0]
}

/// Integrates the regular radial solution from the pole to `theta`.
pub fn shoot_radial(mu: f64, theta: f64) -> Result<Shot> {
    shoot_radial_with(mu, theta, &ShootConfig::default())
}

pub fn shoot_radial_with(mu: f64, theta: f64, cfg: &ShootConfig) -> Result<Shot> {
    check_aperture(theta)?;
    if !(mu > 0.0) {
        return Err(Error::Domain(format!("μ = {mu} must be positive")));
    }
    if theta <= cfg.start {
        return Err(Error::Domain(format!("aperture {theta} below the start offset {}", cfg.start)));
    }
    let mut profile = Vec::new();
    let end = ode::integrate(radial_rhs(mu), cfg.start, series_start(mu, cfg.start), theta, cfg.tol, |t, y, _| {
        profile.push(Sample { t, g: y[0], gp: y[1] })
    })?;
    Ok(Shot { g_end: end[0], gprime_end: end[1], profile })
}

fn gprime_end(mu: f64, theta: f64, cfg: &ShootConfig) -> Result<f64> {
    let end = ode::integrate(radial_rhs(mu), cfg.start, series_start(mu, cfg.start), theta, cfg.tol, |_, _, _| {})?;
    Ok(end[1])
}

/// First positive Neumann eigenvalue μ₁(B_θ), relative accuracy about 1e-10.
pub fn mu1_of_cap(theta: f64) -> Result<f64> {
    mu1_of_cap_with(theta, &ShootConfig::default())
}

pub fn mu1_of_cap_with(theta: f64, cfg: &ShootConfig) -> Result<f64> {
    check_aperture(theta)?;
    // Flat-disk estimate sets the scan range for small caps.
    let flat = (BESSEL_J1_PRIME_ZERO / theta).powi(2);
    let mu_hi = if theta >= 0.1 * PI { 40.0 } else { 2.0 * flat + 40.0 };
    let step = MU_SCAN_STEP.max(mu_hi / 160.0);
    let n = (mu_hi / step).ceil() as usize;
    let coarse = ShootConfig { tol: Tolerance { rtol: 1e-8, atol: 1e-10 }, ..*cfg };
    let bracket = roots::scan_sign_change(|mu| gprime_end(mu, theta, &coarse), step, mu_hi, n - 1)?
        .ok_or_else(|| Error::Bracketing { lo: step, hi: mu_hi, what: format!("g'(θ) for θ = {theta}") })?;
    // The coarse bracket may sit a hair off under the tight tolerance; widen if needed.
    let (mut lo, mut hi) = bracket;
    let f = |mu: f64| gprime_end(mu, theta, cfg);
    while f(lo)? < 0.0 {
        lo = (lo - step).max(0.5 * lo);
    }
    while f(hi)? > 0.0 {
        hi += step;
    }
    let mu = roots::brent(f, lo, hi, 1e-12 * hi, 200)?;
    // First eigenvalue: the profile must stay positive on (0, θ].
    let shot = shoot_radial_with(mu, theta, cfg)?;
    if shot.profile.iter().any(|s| s.g <= 0.0) {
        return Err(Error::Convergence(format!("root μ = {mu} has a sign-changing profile")));
    }
    Ok(mu)
}

/// Normalized first eigenfunction profile on a cap.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CapEigen {
    pub theta: f64,
    pub mu1: f64,
    /// Normalized samples on the adaptive grid, increasing in `t`.
    pub grid: Vec<Sample>,
    /// Factor applied to the `g'(0) = 1` solution.
    pub norm: f64,
}

impl CapEigen {
    fn locate(&self, t: f64) -> usize {
        let i = self.grid.partition_point(|s| s.t <= t);
        i.clamp(1, self.grid.len() - 1) - 1
    }

    /// `(g(t), g'(t))` by cubic Hermite interpolation on the solver grid.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let first = self.grid[0];
        if t <= first.t {
            let s = series_start(self.mu1, t);
            return (self.norm * s[0], self.norm * s[1]);
        }
        let i = self.locate(t.min(self.theta));
        let (a, b) = (self.grid[i], self.grid[i + 1]);
        let h = b.t - a.t;
        let x = (t - a.t) / h;
        let (h00, h10, h01, h11) = hermite_basis(x);
        let g = h00 * a.g + h10 * h * a.gp + h01 * b.g + h11 * h * b.gp;
        let gpp_a = second_derivative(self.mu1, a.t, a.g, a.gp);
        let gpp_b = second_derivative(self.mu1, b.t, b.g, b.gp);
        let gp = h00 * a.gp + h10 * h * gpp_a + h01 * b.gp + h11 * h * gpp_b;
        (g, gp)
    }

    pub fn g(&self, t: f64) -> f64 {
        self.eval(t).0
    }

    pub fn gprime(&self, t: f64) -> f64 {
        self.eval(t).1
    }

    /// Boundary value `g(θ)`.
    pub fn g_boundary(&self) -> f64 {
        self.grid.last().map(|s| s.g).unwrap_or(0.0)
    }

    /// Number of sign changes of `g'` over the grid interior.
    pub fn gprime_sign_changes(&self) -> usize {
        let n = self.grid.len();
        let interior = &self.grid[..n.saturating_sub(1)];
        interior.windows(2).filter(|w| (w[0].gp > 0.0) != (w[1].gp > 0.0)).count()
    }

    /// Writes the profile as CSV with header `t,g,gprime`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,g,gprime\n");
        for s in &self.grid {
            let _ = writeln!(out, "{},{},{}", sig15(s.t), sig15(s.g), sig15(s.gp));
        }
        out
    }
}

fn hermite_basis(x: f64) -> (f64, f64, f64, f64) {
    let x2 = x * x;
    let x3 = x2 * x;
    (2.0 * x3 - 3.0 * x2 + 1.0, x3 - 2.0 * x2 + x, -2.0 * x3 + 3.0 * x2, x3 - x2)
}

/// Decimal rendering with 15 significant digits.
pub fn sig15(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (14 - mag).clamp(0, 40) as usize;
    format!("{x:.decimals$}")
}

/// Normalized profile with `π ∫₀^θ g² sin t dt = 1`.
pub fn normalized_profile(theta: f64) -> Result<CapEigen> {
    normalized_profile_with(theta, &ShootConfig::default())
}

pub fn normalized_profile_with(theta: f64, cfg: &ShootConfig) -> Result<CapEigen> {
    let mu1 = mu1_of_cap_with(theta, cfg)?;
    profile_for(mu1, theta, cfg)
}

/// Normalized profile for a known eigenvalue.
pub(crate) fn profile_for(mu1: f64, theta: f64, cfg: &ShootConfig) -> Result<CapEigen> {
    let rhs = radial_rhs(mu1);
    let aug = |t: f64, y: &[f64; 3]| {
        let d = rhs(t, &[y[0], y[1]]);
        [d[0], d[1], y[0] * y[0] * t.sin()]
    };
    let s0 = series_start(mu1, cfg.start);
    // ∫₀^{t₀} t² sin t dt ≈ t₀⁴/4.
    let y0 = [s0[0], s0[1], cfg.start.powi(4) / 4.0];
    let mut grid = Vec::new();
    let end = ode::integrate(aug, cfg.start, y0, theta, cfg.tol, |t, y, _| grid.push(Sample { t, g: y[0], gp: y[1] }))?;
    let norm = 1.0 / (PI * end[2]).sqrt();
    for s in &mut grid {
        s.g *= norm;
        s.gp *= norm;
    }
    Ok(CapEigen { theta, mu1, grid, norm })
}

/// Θ together with the root-finding tolerance it was located to.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CriticalAngles {
    pub theta_crit: f64,
    pub theta_prime: Option<f64>,
    pub bracket_tolerance: f64,
}

/// `μ₁(B_θ) sin²θ − 1`; positive below Θ, negative above.
pub fn hot_spot_indicator(theta: f64) -> Result<f64> {
    Ok(mu1_of_cap(theta)? * theta.sin().powi(2) - 1.0)
}

const THETA_CRIT_XTOL: f64 = 1e-10;

/// The aperture Θ where `μ₁(B_Θ) sin²Θ = 1`; cached after the first call.
pub fn find_critical_aperture() -> Result<f64> {
    static CACHE: OnceLock<f64> = OnceLock::new();
    if let Some(v) = CACHE.get() {
        return Ok(*v);
    }
    let v = roots::brent(hot_spot_indicator, 0.6 * PI, 0.8 * PI, THETA_CRIT_XTOL, 200)?;
    Ok(*CACHE.get_or_init(|| v))
}

/// `(π − θ)√μ₁(B_θ) − π/2`; negative exactly where the strip mode lies above μ₁.
pub fn strip_indicator(theta: f64) -> Result<f64> {
    Ok((PI - theta) * mu1_of_cap(theta)?.sqrt() - FRAC_PI_2)
}

/// The aperture Θ′ above which `ν₁ = π²/(4(π−θ)²)` exceeds `μ₁(B_θ)`; cached.
pub fn find_strip_aperture() -> Result<f64> {
    static CACHE: OnceLock<f64> = OnceLock::new();
    if let Some(v) = CACHE.get() {
        return Ok(*v);
    }
    let v = roots::brent(strip_indicator, 0.5 * PI, 0.7 * PI, THETA_CRIT_XTOL, 200)?;
    Ok(*CACHE.get_or_init(|| v))
}

pub fn critical_angles() -> Result<CriticalAngles> {
    Ok(CriticalAngles {
        theta_crit: find_critical_aperture()?,
        theta_prime: Some(find_strip_aperture()?),
        bracket_tolerance: THETA_CRIT_XTOL,
    })
}

/// Latitude of the interior maximum of `g` on a cap wider than Θ.
pub fn find_tmax(theta: f64) -> Result<f64> {
    find_tmax_in(&normalized_profile(theta)?)
}

pub fn find_tmax_in(cap: &CapEigen) -> Result<f64> {
    if cap.mu1 * cap.theta.sin().powi(2) >= 1.0 {
        return Err(Error::Domain(format!("aperture {:.6}π does not exceed Θ: profile is monotone", cap.theta / PI)));
    }
    let grid = &cap.grid;
    let start = grid.partition_point(|s| s.t <= FRAC_PI_2).max(1);
    let k = (start..grid.len()).find(|&i| grid[i].gp <= 0.0).ok_or_else(|| Error::Bracketing {
        lo: FRAC_PI_2,
        hi: cap.theta,
        what: "g' has no sign change".into(),
    })?;
    let lo = grid[k - 1].t.max(FRAC_PI_2);
    let hi = grid[k].t;
    if hi >= cap.theta {
        // g' vanishes only at the boundary to solver precision: degenerate, Θ⁺ limit.
        return Ok(cap.theta);
    }
    roots::brent(|t| Ok(cap.gprime(t)), lo, hi, 1e-14, 200)
}

/// Finite-difference `g''(Θ)` and `g'''(Θ)` for the normalized profile at Θ.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CriticalDerivatives {
    pub theta_crit: f64,
    pub g: f64,
    pub g2: f64,
    pub g3: f64,
    /// `-2 cos Θ / sin³Θ · g(Θ)`.
    pub g3_predicted: f64,
}

/// Stencil half-width used for the derivative estimates at Θ.
pub const FD_STEP: f64 = 1e-3;

pub fn critical_profile_derivatives() -> Result<CriticalDerivatives> {
    let theta = find_critical_aperture()?;
    let cap = normalized_profile(theta)?;
    let h = FD_STEP;
    // Values at Θ + k h for k = -4..=4, continued past Θ with fine RK4 steps.
    let rhs = radial_rhs(cap.mu1);
    let base = cap.grid[cap.grid.partition_point(|s| s.t <= theta - 4.0 * h) - 1];
    let mut y = [base.g, base.gp];
    let mut t = base.t;
    let mut vals = [0.0; 9];
    for (k, v) in vals.iter_mut().enumerate() {
        let target = theta + (k as f64 - 4.0) * h;
        let n = (((target - t) / (h / 64.0)).ceil() as usize).max(1);
        y = ode::rk4_fixed(&rhs, t, y, target, n);
        t = target;
        *v = y[0];
    }
    let at = |k: i32| vals[(k + 4) as usize];
    let d2 = |s: i32| (at(s) - 2.0 * at(0) + at(-s)) / (s as f64 * h).powi(2);
    let d3 = |s: i32| (at(2 * s) - 2.0 * at(s) + 2.0 * at(-s) - at(-2 * s)) / (2.0 * (s as f64 * h).powi(3));
    let g2 = (4.0 * d2(1) - d2(2)) / 3.0;
    let g3 = (4.0 * d3(1) - d3(2)) / 3.0;
    let g = at(0);
    let g3_predicted = -2.0 * theta.cos() / theta.sin().powi(3) * g;
    Ok(CriticalDerivatives { theta_crit: theta, g, g2, g3, g3_predicted })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mu_two_gives_sine_profile() {
        for &theta in &[PI / 4.0, PI / 2.0, 0.8 * PI] {
            let shot = shoot_radial(2.0, theta).unwrap();
            for s in &shot.profile {
                assert!((s.g - s.t.sin()).abs() < 1e-9, "t = {}", s.t);
            }
            assert!((shot.gprime_end - theta.cos()).abs() < 1e-9);
        }
    }

    #[test]
    fn hemisphere_neumann_endpoint() {
        let shot = shoot_radial(2.0, PI / 2.0).unwrap();
        assert!(shot.gprime_end.abs() < 1e-10);
        let quarter = shoot_radial(2.0, PI / 4.0).unwrap();
        assert!(quarter.gprime_end > 0.0);
    }

    #[test]
    fn series_coefficient_matches_sine() {
        let s = series_start(2.0, 1e-2);
        assert!((s[0] - (1e-2f64).sin()).abs() < 1e-11);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(matches!(shoot_radial(2.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(shoot_radial(2.0, PI), Err(Error::Domain(_))));
        assert!(matches!(shoot_radial(-1.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(mu1_of_cap(4.0), Err(Error::Domain(_))));
    }

    #[test]
    fn hemisphere_eigenvalue() {
        assert!((mu1_of_cap(PI / 2.0).unwrap() - 2.0).abs() < 1e-8);
    }

    #[test]
    fn small_cap_close_to_flat_disk() {
        let theta = 0.05 * PI;
        let mu = mu1_of_cap(theta).unwrap();
        let flat = (BESSEL_J1_PRIME_ZERO / theta).powi(2);
        assert!((mu / flat - 1.0).abs() < 0.02, "{mu} vs {flat}");
    }

    #[test]
    fn hemisphere_profile_normalization() {
        let cap = normalized_profile(PI / 2.0).unwrap();
        let c = (3.0 / (2.0 * PI)).sqrt();
        for &t in &[0.1, 0.5, 1.0, 1.5] {
            assert!((cap.g(t) - c * t.sin()).abs() < 1e-8);
        }
    }

    #[test]
    fn csv_header_and_digits() {
        let cap = normalized_profile(PI / 2.0).unwrap();
        let csv = cap.to_csv();
        assert!(csv.starts_with("t,g,gprime\n"));
        assert_eq!(sig15(0.123_456_789_012_345_68), "0.123456789012346");
        assert_eq!(sig15(12.5), "12.5000000000000");
    }

    #[test]
    fn monotone_below_critical_and_one_bump_above() {
        let small = normalized_profile(0.6 * PI).unwrap();
        assert_eq!(small.gprime_sign_changes(), 0);
        let big = normalized_profile(0.8 * PI).unwrap();
        assert_eq!(big.gprime_sign_changes(), 1);
    }

    #[test]
    fn tmax_rejects_small_caps() {
        assert!(matches!(find_tmax(0.6 * PI), Err(Error::Domain(_))));
    }

    #[test]
    fn critical_aperture_and_derivatives() {
        let c = critical_angles().unwrap();
        eprintln!("Θ/π = {:.12}", c.theta_crit / PI);
        assert!(c.theta_crit > 0.70 * PI && c.theta_crit < 0.71 * PI);
        let d = critical_profile_derivatives().unwrap();
        eprintln!("{d:?}");
        assert!(d.g2.abs() < 1e-6 * d.g.abs());
        assert!((d.g3 - d.g3_predicted).abs() < 1e-4 * d.g3_predicted.abs());
    }
}
