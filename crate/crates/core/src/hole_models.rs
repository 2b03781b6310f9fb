//! Virtual-mass matrices of planar holes.
//!
//! Closed forms for the Joukowski ellipse family `ω_λ` (area π) sit next to an
//! independent exterior Neumann solver: the field `W` with `ΔW = 0` outside
//! `ω`, `∂_ν W = -ν` on `∂ω` and `W → 0` at infinity is represented as a
//! single-layer potential and solved by Nyström discretisation. Its multipole
//! coefficients give `M` through `W(x) ≈ M x / (2π|x|²)`, and its Dirichlet
//! energy gives `M` through `M = |ω| I + ∫ ∇W_p · ∇W_q`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 2×2 symmetric matrix stored row-major.
pub type Mat2 = [[f64; 2]; 2];

/// An ellipse of area π obtained from `T(z) = (λz + λ⁻¹z⁻¹)/√(λ² − λ⁻²)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipseHole {
    pub lambda: f64,
    pub semi_major: f64,
    pub semi_minor: f64,
    pub area: f64,
    /// Logarithmic capacity.
    pub cap: f64,
    /// First coefficient of the normalized exterior map.
    pub c1: f64,
    pub m: Mat2,
}

pub fn ellipse_from_lambda(lambda: f64) -> Result<EllipseHole> {
    if !(lambda > 1.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!("Joukowski parameter λ = {lambda} must exceed 1")));
    }
    let inv = 1.0 / lambda;
    let cap = lambda / (lambda * lambda - inv * inv).sqrt();
    let c1 = inv * inv;
    let c1z = Complex::new(c1, 0.0);
    let m11 = virtual_mass_form(cap, c1z, 0.0);
    let m22 = virtual_mass_form(cap, c1z, 0.5 * PI);
    let m12 = virtual_mass_form(cap, c1z, 0.25 * PI) - 0.5 * (m11 + m22);
    Ok(EllipseHole {
        lambda,
        semi_major: ((lambda + inv) / (lambda - inv)).sqrt(),
        semi_minor: ((lambda - inv) / (lambda + inv)).sqrt(),
        area: PI,
        cap,
        c1,
        m: [[m11, m12], [m12, m22]],
    })
}

impl EllipseHole {
    /// Boundary point `T(e^{iφ})`.
    pub fn boundary_point(&self, phi: f64) -> [f64; 2] {
        [self.semi_major * phi.cos(), self.semi_minor * phi.sin()]
    }

    /// `n` boundary samples, equispaced in the conformal angle.
    pub fn boundary(&self, n: usize) -> BoundaryCurve {
        BoundaryCurve::from_fn(n, |phi| self.boundary_point(phi))
    }

    pub fn trace(&self) -> f64 {
        self.m[0][0] + self.m[1][1]
    }
}

/// `⟨M e_α, e_α⟩ = 2π cap² (1 − Re(c₁ e^{−2iα}))`.
pub fn virtual_mass_form(cap: f64, c1: Complex<f64>, angle: f64) -> f64 {
    let rot = Complex::new((2.0 * angle).cos(), -(2.0 * angle).sin());
    2.0 * PI * cap * cap * (1.0 - (c1 * rot).re)
}

/// JSON shape for exported matrices.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixRecord {
    pub m11: f64,
    pub m12: f64,
    pub m22: f64,
}

impl From<Mat2> for MatrixRecord {
    fn from(m: Mat2) -> Self {
        MatrixRecord { m11: m[0][0], m12: 0.5 * (m[0][1] + m[1][0]), m22: m[1][1] }
    }
}

impl MatrixRecord {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain struct serializes")
    }
}

/// Closed curve sampled at equispaced parameter values `φ_j = 2πj/n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCurve {
    pub phi: Vec<f64>,
    pub points: Vec<[f64; 2]>,
}

impl BoundaryCurve {
    pub fn from_fn(n: usize, f: impl Fn(f64) -> [f64; 2]) -> Self {
        let phi: Vec<f64> = (0..n).map(|j| 2.0 * PI * j as f64 / n as f64).collect();
        let points = phi.iter().map(|&p| f(p)).collect();
        BoundaryCurve { phi, points }
    }

    pub fn circle(radius: f64, n: usize) -> Self {
        Self::from_fn(n, |p| [radius * p.cos(), radius * p.sin()])
    }

    pub fn rotated(&self, alpha: f64) -> Self {
        let (s, c) = alpha.sin_cos();
        let points = self.points.iter().map(|p| [c * p[0] - s * p[1], s * p[0] + c * p[1]]).collect();
        BoundaryCurve { phi: self.phi.clone(), points }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let points = self.points.iter().map(|p| [factor * p[0], factor * p[1]]).collect();
        BoundaryCurve { phi: self.phi.clone(), points }
    }

    /// Parses CSV with header `phi,x,y`.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty boundary CSV".into()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols != ["phi", "x", "y"] {
            return Err(Error::Parse(format!("expected header `phi,x,y`, found `{header}`")));
        }
        let mut phi = Vec::new();
        let mut points = Vec::new();
        for (row, line) in lines.enumerate() {
            let vals: Vec<f64> = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("row {}: {e}", row + 1)))?;
            if vals.len() != 3 {
                return Err(Error::Parse(format!("row {}: expected 3 columns", row + 1)));
            }
            phi.push(vals[0]);
            points.push([vals[1], vals[2]]);
        }
        let curve = BoundaryCurve { phi, points };
        curve.check_equispaced()?;
        Ok(curve)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("phi,x,y\n");
        for (p, x) in self.phi.iter().zip(&self.points) {
            let _ = writeln!(out, "{p:.17e},{:.17e},{:.17e}", x[0], x[1]);
        }
        out
    }

    fn check_equispaced(&self) -> Result<()> {
        let n = self.phi.len();
        if n < 8 {
            return Err(Error::Domain(format!("boundary needs at least 8 samples, got {n}")));
        }
        let step = 2.0 * PI / n as f64;
        for (j, &p) in self.phi.iter().enumerate() {
            if (p - self.phi[0] - j as f64 * step).abs() > 1e-9 {
                return Err(Error::Domain("boundary samples must be equispaced in φ over one period".into()));
            }
        }
        Ok(())
    }

    fn interpolants(&self) -> (Trig, Trig) {
        let xs: Vec<f64> = self.points.iter().map(|p| p[0]).collect();
        let ys: Vec<f64> = self.points.iter().map(|p| p[1]).collect();
        (Trig::new(&xs), Trig::new(&ys))
    }

    /// Enclosed area (positive for counterclockwise curves).
    pub fn signed_area(&self) -> f64 {
        let (x, y) = self.interpolants();
        let n = 4 * self.points.len();
        let h = 2.0 * PI / n as f64;
        (0..n)
            .map(|j| {
                let s = j as f64 * h;
                0.5 * (x.eval(s) * y.deriv(s) - y.eval(s) * x.deriv(s))
            })
            .sum::<f64>()
            * h
    }
}

/// Real trigonometric interpolant of equispaced periodic samples (even `n`).
#[derive(Clone, Debug)]
struct Trig {
    n: usize,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl Trig {
    fn new(x: &[f64]) -> Self {
        let n = x.len();
        assert!(n.is_multiple_of(2), "trigonometric interpolation needs an even sample count");
        let half = n / 2;
        let mut a = vec![0.0; half + 1];
        let mut b = vec![0.0; half + 1];
        for (j, &v) in x.iter().enumerate() {
            let s = 2.0 * PI * j as f64 / n as f64;
            for k in 0..=half {
                let (sk, ck) = (k as f64 * s).sin_cos();
                a[k] += v * ck;
                b[k] += v * sk;
            }
        }
        for k in 0..=half {
            let w = if k == 0 || k == half { 1.0 } else { 2.0 } / n as f64;
            a[k] *= w;
            b[k] *= w;
        }
        b[half] = 0.0;
        Trig { n, a, b }
    }

    fn sum(&self, s: f64, order: u32) -> f64 {
        let mut out = 0.0;
        for k in 0..=self.n / 2 {
            let kf = k as f64;
            let (sk, ck) = (kf * s).sin_cos();
            let (c, d) = (self.a[k], self.b[k]);
            out += match order {
                0 => c * ck + d * sk,
                1 => kf * (-c * sk + d * ck),
                _ => -kf * kf * (c * ck + d * sk),
            };
        }
        out
    }

    fn eval(&self, s: f64) -> f64 {
        self.sum(s, 0)
    }

    fn deriv(&self, s: f64) -> f64 {
        self.sum(s, 1)
    }

    fn deriv2(&self, s: f64) -> f64 {
        self.sum(s, 2)
    }
}

/// Discretised boundary: nodes, outward normals of `ω`, speeds and curvature.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Nodes {
    pub x: Vec<[f64; 2]>,
    pub normal: Vec<[f64; 2]>,
    pub speed: Vec<f64>,
    pub curvature: Vec<f64>,
}

impl Nodes {
    fn from_curve(curve: &BoundaryCurve, n: usize) -> Self {
        let (tx, ty) = curve.interpolants();
        let mut nodes = Nodes { x: vec![], normal: vec![], speed: vec![], curvature: vec![] };
        for j in 0..n {
            let s = 2.0 * PI * j as f64 / n as f64;
            let (dx, dy) = (tx.deriv(s), ty.deriv(s));
            let (ddx, ddy) = (tx.deriv2(s), ty.deriv2(s));
            let v = (dx * dx + dy * dy).sqrt();
            nodes.x.push([tx.eval(s), ty.eval(s)]);
            nodes.normal.push([dy / v, -dx / v]);
            nodes.speed.push(v);
            nodes.curvature.push((dx * ddy - dy * ddx) / v.powi(3));
        }
        nodes
    }

    fn len(&self) -> usize {
        self.x.len()
    }

    fn weight(&self, j: usize) -> f64 {
        self.speed[j] * 2.0 * PI / self.len() as f64
    }
}

/// Degree-k multipole coefficients: `W ≈ Σ r^{-k}(a cos kφ + b sin kφ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Multipole {
    pub k: usize,
    pub a: f64,
    pub b: f64,
}

/// Decaying exterior field `W` with `∂_ν W = −ν` on the boundary.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExteriorSolution {
    pub nodes: Nodes,
    /// Single-layer densities for the two Cartesian components of `W`.
    pub density: [Vec<f64>; 2],
    /// Multipole coefficients per component, `k = 1..=n_modes`.
    pub coeffs: [Vec<Multipole>; 2],
    pub m_est: Mat2,
    /// Max boundary-condition residual on a twice finer node set.
    pub residual: f64,
    pub condition: f64,
    pub converged: bool,
}

/// Default multipole truncation.
pub const DEFAULT_MODES: usize = 32;
/// Default number of boundary nodes.
pub const DEFAULT_COLLOC: usize = 256;

const MAX_CONDITION: f64 = 1e12;
const RESIDUAL_TOL: f64 = 1e-4;

fn layer_matrix(nodes: &Nodes) -> DMatrix<f64> {
    let n = nodes.len();
    DMatrix::from_fn(n, n, |i, j| {
        let k = if i == j {
            -nodes.curvature[i] / (4.0 * PI)
        } else {
            let d = [nodes.x[i][0] - nodes.x[j][0], nodes.x[i][1] - nodes.x[j][1]];
            let r2 = d[0] * d[0] + d[1] * d[1];
            -(d[0] * nodes.normal[i][0] + d[1] * nodes.normal[i][1]) / (2.0 * PI * r2)
        };
        k * nodes.weight(j) - if i == j { 0.5 } else { 0.0 }
    })
}

/// Solves the exterior Neumann problem for `W` around the curve.
pub fn exterior_neumann_oracle(curve: &BoundaryCurve, n_modes: usize, n_colloc: usize) -> Result<ExteriorSolution> {
    if n_modes == 0 || n_colloc < 2 * n_modes + 8 {
        return Err(Error::Domain(format!(
            "need n_colloc ≥ 2·n_modes + 8 (got n_modes = {n_modes}, n_colloc = {n_colloc})"
        )));
    }
    if !n_colloc.is_multiple_of(2) || !curve.points.len().is_multiple_of(2) {
        return Err(Error::Domain("sample counts must be even".into()));
    }
    curve.check_equispaced()?;
    let curve = if curve.signed_area() < 0.0 {
        let mut pts = curve.points.clone();
        pts.reverse();
        pts.rotate_right(1);
        BoundaryCurve { phi: curve.phi.clone(), points: pts }
    } else {
        curve.clone()
    };
    if !star_shaped_about_origin(&curve) {
        return Err(Error::Domain("boundary must be star-shaped about the origin".into()));
    }

    let nodes = Nodes::from_curve(&curve, n_colloc);
    let a = layer_matrix(&nodes);
    let sv = a.clone().svd(false, false).singular_values;
    let condition = sv.max() / sv.min();
    if !(condition <= MAX_CONDITION) {
        return Err(Error::IllConditioned { condition, hint: "use more collocation points or fewer modes".into() });
    }
    let lu = a.lu();
    let mut density: [Vec<f64>; 2] = [vec![], vec![]];
    for (p, dens) in density.iter_mut().enumerate() {
        let rhs = DVector::from_iterator(nodes.len(), nodes.normal.iter().map(|nu| -nu[p]));
        let sol = lu.solve(&rhs).ok_or_else(|| Error::Convergence("singular Nyström matrix".into()))?;
        *dens = sol.iter().copied().collect();
    }

    let coeffs = [0, 1].map(|p| multipoles(&nodes, &density[p], n_modes));
    let m_est = [0, 1].map(|p| [2.0 * PI * coeffs[p][0].a, 2.0 * PI * coeffs[p][0].b]);
    let residual = refined_residual(&curve, &density, 2 * n_colloc);
    Ok(ExteriorSolution { nodes, density, coeffs, m_est, residual, condition, converged: residual < RESIDUAL_TOL })
}

fn star_shaped_about_origin(curve: &BoundaryCurve) -> bool {
    let n = curve.points.len();
    let mut total = 0.0;
    for j in 0..n {
        let p = curve.points[j];
        let q = curve.points[(j + 1) % n];
        let cross = p[0] * q[1] - p[1] * q[0];
        if cross <= 0.0 {
            return false;
        }
        total += cross.atan2(p[0] * q[0] + p[1] * q[1]);
    }
    (total - 2.0 * PI).abs() < 1e-6
}

fn multipoles(nodes: &Nodes, sigma: &[f64], n_modes: usize) -> Vec<Multipole> {
    (1..=n_modes)
        .map(|k| {
            let mut c = Complex::new(0.0, 0.0);
            for j in 0..nodes.len() {
                let w = Complex::new(nodes.x[j][0], nodes.x[j][1]);
                c += w.powu(k as u32) * (sigma[j] * nodes.weight(j));
            }
            c /= 2.0 * PI * k as f64;
            Multipole { k, a: c.re, b: c.im }
        })
        .collect()
}

/// Re-evaluates the boundary condition on a finer node set using the
/// trigonometric interpolant of the density.
fn refined_residual(curve: &BoundaryCurve, density: &[Vec<f64>; 2], n_fine: usize) -> f64 {
    let fine = Nodes::from_curve(curve, n_fine);
    let a = layer_matrix(&fine);
    let mut worst: f64 = 0.0;
    for (p, dens) in density.iter().enumerate() {
        let t = Trig::new(dens);
        let s_fine = DVector::from_iterator(n_fine, (0..n_fine).map(|j| t.eval(2.0 * PI * j as f64 / n_fine as f64)));
        let r = &a * s_fine;
        for j in 0..n_fine {
            worst = worst.max((r[j] + fine.normal[j][p]).abs());
        }
    }
    worst
}

impl ExteriorSolution {
    /// Field and gradient at an exterior point away from the boundary.
    pub fn field(&self, x: [f64; 2]) -> ([f64; 2], [[f64; 2]; 2]) {
        let mut w = [0.0; 2];
        let mut grad = [[0.0; 2]; 2];
        for j in 0..self.nodes.len() {
            let d = [x[0] - self.nodes.x[j][0], x[1] - self.nodes.x[j][1]];
            let r2 = d[0] * d[0] + d[1] * d[1];
            let wj = self.nodes.weight(j);
            for p in 0..2 {
                let s = self.density[p][j] * wj;
                w[p] += -0.5 / PI * 0.5 * r2.ln() * s;
                grad[p][0] += -s * d[0] / (2.0 * PI * r2);
                grad[p][1] += -s * d[1] / (2.0 * PI * r2);
            }
        }
        (w, grad)
    }

    /// Field from the multipole series (valid outside the convergence radius).
    pub fn multipole_field(&self, x: [f64; 2]) -> ([f64; 2], [[f64; 2]; 2]) {
        let z = Complex::new(x[0], x[1]);
        let mut w = [0.0; 2];
        let mut grad = [[0.0; 2]; 2];
        for p in 0..2 {
            for m in &self.coeffs[p] {
                let c = Complex::new(m.a, m.b);
                let zk = z.powi(-(m.k as i32));
                w[p] += (c * zk).re;
                // ∇ Re F = (Re F', −Im F').
                let d = c * zk * (-(m.k as f64)) / z;
                grad[p][0] += d.re;
                grad[p][1] -= d.im;
            }
        }
        (w, grad)
    }

    /// `W` on the boundary nodes (log-singular product quadrature).
    pub fn boundary_values(&self) -> [Vec<f64>; 2] {
        let n = self.nodes.len();
        let half = n / 2;
        let t = |j: usize| 2.0 * PI * j as f64 / n as f64;
        let mut out = [vec![0.0; n], vec![0.0; n]];
        for i in 0..n {
            for j in 0..n {
                let dt = t(i) - t(j);
                let mut r = 0.0;
                for m in 1..half {
                    r += (m as f64 * dt).cos() / m as f64;
                }
                let rw = -2.0 * PI / half as f64 * r - PI / (half * half) as f64 * (half as f64 * dt).cos();
                let smooth = if i == j {
                    -(self.nodes.speed[i].powi(2)).ln() / (4.0 * PI)
                } else {
                    let d = [self.nodes.x[i][0] - self.nodes.x[j][0], self.nodes.x[i][1] - self.nodes.x[j][1]];
                    let r2 = d[0] * d[0] + d[1] * d[1];
                    -(r2 / (4.0 * (0.5 * dt).sin().powi(2))).ln() / (4.0 * PI)
                };
                let f = self.nodes.speed[j];
                for p in 0..2 {
                    let sj = self.density[p][j] * f;
                    out[p][i] += (-rw / (4.0 * PI) + smooth * 2.0 * PI / n as f64) * sj;
                }
            }
        }
        out
    }

    pub fn max_radius(&self) -> f64 {
        self.nodes.x.iter().map(|p| p[0].hypot(p[1])).fold(0.0, f64::max)
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pn1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Outer radius of the annulus quadrature.
pub const ENERGY_OUTER_RADIUS: f64 = 10.0;
const ENERGY_RADIAL_NODES: usize = 64;
const ENERGY_ANGULAR_NODES: usize = 512;

/// `M` from the energy definition `|ω| δ_pq + ∫_{ℝ²∖ω} ∇W_p · ∇W_q`.
///
/// The exterior is split at `R₀ = 1.5 · max|x|`: Green's identity on
/// `{|x| < R₀} ∖ ω`, a Gauss–Legendre × trapezoid rule on `R₀ < |x| < 10`,
/// and the multipole tail beyond radius 10.
pub fn energy_virtual_mass(solution: &ExteriorSolution, area: f64) -> Result<Mat2> {
    if !solution.converged {
        return Err(Error::Convergence(format!(
            "exterior solution not converged (residual {:.3e})",
            solution.residual
        )));
    }
    let r0 = 1.5 * solution.max_radius();
    if r0 >= ENERGY_OUTER_RADIUS {
        return Err(Error::Domain(format!("boundary too large for the annulus quadrature (R₀ = {r0})")));
    }
    let mut e = [[0.0; 2]; 2];

    // Inner region: ∮_{R₀} W_p ∂_r W_q + ∮_{∂ω} W_p ν_q.
    let wb = solution.boundary_values();
    let nodes = &solution.nodes;
    let na = ENERGY_ANGULAR_NODES;
    for i in 0..na {
        let a = 2.0 * PI * i as f64 / na as f64;
        let x = [r0 * a.cos(), r0 * a.sin()];
        let (w, g) = solution.field(x);
        let ds = r0 * 2.0 * PI / na as f64;
        for p in 0..2 {
            for q in 0..2 {
                e[p][q] += w[p] * (g[q][0] * a.cos() + g[q][1] * a.sin()) * ds;
            }
        }
    }
    for j in 0..nodes.len() {
        for p in 0..2 {
            for q in 0..2 {
                e[p][q] += wb[p][j] * nodes.normal[j][q] * nodes.weight(j);
            }
        }
    }

    // Annulus R₀ < r < 10.
    let (gx, gw) = gauss_legendre(ENERGY_RADIAL_NODES);
    let half = 0.5 * (ENERGY_OUTER_RADIUS - r0);
    for (xi, wi) in gx.iter().zip(&gw) {
        let r = r0 + half * (xi + 1.0);
        for i in 0..na {
            let a = 2.0 * PI * i as f64 / na as f64;
            let (_, g) = solution.field([r * a.cos(), r * a.sin()]);
            let dw = wi * half * r * 2.0 * PI / na as f64;
            for p in 0..2 {
                for q in 0..2 {
                    e[p][q] += (g[p][0] * g[q][0] + g[p][1] * g[q][1]) * dw;
                }
            }
        }
    }

    // Tail: Σ_k π k R^{-2k} (a_k^p a_k^q + b_k^p b_k^q).
    let rr = ENERGY_OUTER_RADIUS;
    for (mp, mq) in solution.coeffs[0].iter().zip(&solution.coeffs[1]) {
        let f = PI * mp.k as f64 * rr.powi(-2 * mp.k as i32);
        e[0][0] += f * (mp.a * mp.a + mp.b * mp.b);
        e[1][1] += f * (mq.a * mq.a + mq.b * mq.b);
        e[0][1] += f * (mp.a * mq.a + mp.b * mq.b);
    }
    e[1][0] = e[0][1];
    let sym = 0.5 * (e[0][1] + e[1][0]);
    Ok([[area + e[0][0], sym], [sym, area + e[1][1]]])
}

/// Eigenvalues of a symmetric 2×2 matrix, ascending.
pub fn eig2(m: Mat2) -> [f64; 2] {
    let tr = m[0][0] + m[1][1];
    let diff = 0.5 * (m[0][0] - m[1][1]);
    let off = 0.5 * (m[0][1] + m[1][0]);
    let rad = diff.hypot(off);
    [0.5 * tr - rad, 0.5 * tr + rad]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Mat2, b: Mat2, tol: f64) -> bool {
        (0..2).all(|i| (0..2).all(|j| (a[i][j] - b[i][j]).abs() < tol))
    }

    #[test]
    fn lambda_must_exceed_one() {
        assert!(matches!(ellipse_from_lambda(1.0), Err(Error::Domain(_))));
        assert!(matches!(ellipse_from_lambda(0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn sqrt_two_mass_entry() {
        let e = ellipse_from_lambda(2f64.sqrt()).unwrap();
        assert!((e.m[0][0] - 4.0 * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn closed_forms_agree() {
        for &l in &[1.05, 1.3, 2.0, 7.0] {
            let e = ellipse_from_lambda(l).unwrap();
            let li2 = l.powi(-2);
            assert!((e.m[0][0] - 2.0 * PI / (1.0 + li2)).abs() < 1e-12);
            assert!((e.m[1][1] - 2.0 * PI / (1.0 - li2)).abs() < 1e-10);
            assert!(e.m[0][1].abs() < 1e-12);
            assert!((e.semi_major * e.semi_minor - 1.0).abs() < 1e-12);
            assert!((e.trace() - 4.0 * PI * e.cap * e.cap).abs() < 1e-12 * e.trace());
            assert!(e.m[0][0] < 2.0 * PI && 2.0 * PI < e.m[1][1]);
        }
    }

    #[test]
    fn disk_form() {
        for &a in &[0.0, 0.4, 2.0] {
            assert!((virtual_mass_form(1.0, Complex::new(0.0, 0.0), a) - 2.0 * PI).abs() < 1e-14);
        }
    }

    #[test]
    fn form_trace_identity() {
        let c1 = Complex::new(0.3, -0.2);
        for &a in &[0.1, 1.0, 2.5] {
            let s = virtual_mass_form(1.3, c1, a) + virtual_mass_form(1.3, c1, a + 0.5 * PI);
            assert!((s - 4.0 * PI * 1.69).abs() < 1e-12);
        }
    }

    #[test]
    fn disk_oracle_is_exact() {
        let sol = exterior_neumann_oracle(&BoundaryCurve::circle(1.0, 64), 8, 64).unwrap();
        assert!(close(sol.m_est, [[2.0 * PI, 0.0], [0.0, 2.0 * PI]], 1e-10));
        assert!(sol.converged);
    }

    #[test]
    fn disk_energy() {
        let sol = exterior_neumann_oracle(&BoundaryCurve::circle(1.0, 128), 16, 128).unwrap();
        let m = energy_virtual_mass(&sol, PI).unwrap();
        assert!(close(m, [[2.0 * PI, 0.0], [0.0, 2.0 * PI]], 1e-6), "{m:?}");
    }

    #[test]
    fn ellipse_oracle_matches_closed_form() {
        for &l in &[1.1, 1.5, 2.0] {
            let e = ellipse_from_lambda(l).unwrap();
            let sol = exterior_neumann_oracle(&e.boundary(DEFAULT_COLLOC), DEFAULT_MODES, DEFAULT_COLLOC).unwrap();
            eprintln!("λ={l} m_est={:?} exact={:?} res={:e} cond={:e}", sol.m_est, e.m, sol.residual, sol.condition);
            assert!(close(sol.m_est, e.m, 1e-6));
        }
    }

    #[test]
    fn ellipse_energy_matches_multipole() {
        let e = ellipse_from_lambda(2.0).unwrap();
        let sol = exterior_neumann_oracle(&e.boundary(DEFAULT_COLLOC), DEFAULT_MODES, DEFAULT_COLLOC).unwrap();
        let m = energy_virtual_mass(&sol, PI).unwrap();
        eprintln!("energy {m:?} vs {:?}", sol.m_est);
        assert!(close(m, sol.m_est, 1e-4));
    }

    #[test]
    fn oracle_preconditions() {
        let c = BoundaryCurve::circle(1.0, 64);
        assert!(matches!(exterior_neumann_oracle(&c, 32, 64), Err(Error::Domain(_))));
    }

    #[test]
    fn boundary_csv_roundtrip() {
        let e = ellipse_from_lambda(1.5).unwrap().boundary(32);
        let back = BoundaryCurve::from_csv(&e.to_csv()).unwrap();
        assert_eq!(back, e);
        assert!(BoundaryCurve::from_csv("a,b,c\n1,2,3\n").is_err());
    }

    #[test]
    fn matrix_json_shape() {
        let rec = MatrixRecord::from([[1.0, 0.5], [0.5, 2.0]]);
        let v: serde_json::Value = serde_json::from_str(&rec.to_json()).unwrap();
        assert_eq!(v["m12"], 0.5);
        assert_eq!(v.as_object().unwrap().len(), 3);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(6)).sum();
        assert!((s - 2.0 / 7.0).abs() < 1e-14);
    }
}
