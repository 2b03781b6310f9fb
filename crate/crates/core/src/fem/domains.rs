//! Concrete spherical domains: caps, caps with four elliptical holes,
//! helmets (cap plus two crossing strips) and the sphere with one hole.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use super::geometry::{cap_area, chart_ellipse_area, colatitude, dot, geodesic, spherical, Frame, HoleChart, V3};
use super::mesh::{BoundaryTag, SurfaceMesh};
use super::mesher::{self, DomainSpec, Loop};
use crate::error::{Error, Result};
use crate::hole_models::{self, EllipseHole};
use crate::roots;

/// Growth rate of the element size away from refined features.
pub const GRADING: f64 = 0.25;
/// Minimum number of segments on a hole boundary.
pub const HOLE_SEGMENTS: usize = 64;

fn check_h(h: f64) -> Result<()> {
    if h > 0.0 && h < 0.5 {
        Ok(())
    } else {
        Err(Error::Domain(format!("mesh size h = {h} outside (0, 0.5)")))
    }
}

fn rim_loop(theta: f64, size: &dyn Fn(V3) -> f64) -> Loop {
    let s = (0..64).map(|k| size(spherical(theta, 2.0 * PI * k as f64 / 64.0))).fold(f64::INFINITY, f64::min);
    let n = ((2.0 * PI * theta.sin() / s).ceil() as usize).max(12);
    Loop { points: (0..n).map(|k| spherical(theta, 2.0 * PI * k as f64 / n as f64)).collect(), tag: BoundaryTag::Rim }
}

/// Quasi-uniform cap `B_θ` centred at the north pole; `θ = π` gives the sphere.
pub fn mesh_cap(theta: f64, h: f64) -> Result<SurfaceMesh> {
    mesh_cap_sized(theta, h, h, &|_| h)
}

/// Cap with a caller-supplied size function (values clamped to `[h_min, h]`).
pub fn mesh_cap_sized(theta: f64, h: f64, h_min: f64, size: &dyn Fn(V3) -> f64) -> Result<SurfaceMesh> {
    if !(theta > 0.0 && theta <= PI) {
        return Err(Error::Domain(format!("aperture {theta} outside (0, π]")));
    }
    check_h(h)?;
    let clamped = |x: V3| size(x).clamp(h_min, h);
    if theta >= PI {
        let spec =
            DomainSpec { pole: None, loops: vec![], contains: &|_| true, size: &clamped, h, h_min, area: 4.0 * PI };
        return mesher::build(&spec);
    }
    let contains = |x: V3| colatitude(x) < theta;
    let spec = DomainSpec {
        pole: Some([0.0, 0.0, -1.0]),
        loops: vec![rim_loop(theta, &clamped)],
        contains: &contains,
        size: &clamped,
        h,
        h_min,
        area: cap_area(theta),
    };
    mesher::build(&spec)
}

/// Four congruent holes `ψ_j(εω_λ)` at colatitude `t`, longitudes `jπ/2`, and
/// the enlarged aperture restoring the area of `B_θ`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HoleLayout {
    pub theta: f64,
    pub t: f64,
    pub lambda: f64,
    pub eps: f64,
    pub theta_eps: f64,
    /// Spherical area of one hole.
    pub hole_area: f64,
    pub semi_major: f64,
    pub semi_minor: f64,
}

impl HoleLayout {
    pub fn new(theta: f64, t: f64, lambda: f64, eps: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < PI && t > 0.0 && t < theta) {
            return Err(Error::Domain(format!("need 0 < t < θ < π (t = {t}, θ = {theta})")));
        }
        if !(eps >= 0.0) {
            return Err(Error::Domain(format!("ε = {eps} must be non-negative")));
        }
        let e = hole_models::ellipse_from_lambda(lambda)?;
        let (a, b) = (eps * e.semi_major, eps * e.semi_minor);
        let hole_area = if eps > 0.0 { chart_ellipse_area(a, b) } else { 0.0 };
        let target = cap_area(theta) + 4.0 * hole_area;
        if target >= 4.0 * PI {
            return Err(Error::Geometry("holes too large to compensate within the sphere".into()));
        }
        let theta_eps = (1.0 - target / (2.0 * PI)).acos();
        let layout = HoleLayout { theta, t, lambda, eps, theta_eps, hole_area, semi_major: a, semi_minor: b };
        layout.check_fit()?;
        Ok(layout)
    }

    /// Same holes with a different outer aperture.
    pub fn with_aperture(&self, theta_eps: f64) -> Result<Self> {
        let layout = HoleLayout { theta_eps, ..self.clone() };
        if !(theta_eps > 0.0 && theta_eps < PI) {
            return Err(Error::Domain(format!("aperture {theta_eps} outside (0, π)")));
        }
        layout.check_fit()?;
        Ok(layout)
    }

    /// Geodesic radius of the circle circumscribing one hole.
    pub fn hole_radius(&self) -> f64 {
        2.0 * (self.semi_major / 2.0).atan()
    }

    fn check_fit(&self) -> Result<()> {
        let r = self.hole_radius();
        if self.t - r <= 0.0 || self.t + r >= self.theta_eps {
            return Err(Error::Geometry(format!(
                "holes of radius {r:.4} at colatitude {:.4} leave the cap of aperture {:.4}",
                self.t, self.theta_eps
            )));
        }
        let sep = geodesic(self.chart(0).frame.n, self.chart(1).frame.n);
        if sep <= 2.0 * r {
            return Err(Error::Geometry(format!("neighbouring holes overlap (separation {sep:.4}, radius {r:.4})")));
        }
        Ok(())
    }

    pub fn chart(&self, j: usize) -> HoleChart {
        HoleChart { frame: Frame::at_latitude(self.t, j as f64 * FRAC_PI_2) }
    }

    pub fn in_hole(&self, x: V3) -> bool {
        if self.eps == 0.0 {
            return false;
        }
        (0..4).any(|j| {
            let c = self.chart(j);
            if dot(x, c.frame.n) < 0.0 {
                return false;
            }
            let y = c.to_chart(x);
            (y[0] / self.semi_major).powi(2) + (y[1] / self.semi_minor).powi(2) < 1.0
        })
    }

    /// Geodesic distance from the nearest hole's circumscribed circle.
    pub fn hole_distance(&self, x: V3) -> f64 {
        let r = self.hole_radius();
        (0..4).map(|j| (geodesic(x, self.chart(j).frame.n) - r).max(0.0)).fold(f64::INFINITY, f64::min)
    }

    pub fn hole_loop(&self, j: usize, h_near: f64) -> Loop {
        let c = self.chart(j);
        let perimeter = 2.0 * PI * ((self.semi_major.powi(2) + self.semi_minor.powi(2)) / 2.0).sqrt();
        let n = HOLE_SEGMENTS.max(((perimeter / h_near).ceil() as usize).div_ceil(4) * 4);
        let points = (0..n)
            .map(|k| {
                let s = 2.0 * PI * k as f64 / n as f64;
                c.to_sphere([self.semi_major * s.cos(), self.semi_minor * s.sin()])
            })
            .collect();
        Loop { points, tag: BoundaryTag::Hole(j as u8) }
    }

    /// Exact area of the continuous domain.
    pub fn domain_area(&self) -> f64 {
        cap_area(self.theta_eps) - 4.0 * self.hole_area
    }

    /// Graded size: `h_near` at the holes, growing by [`GRADING`] up to `h_far`.
    pub fn size(&self, h_far: f64, h_near: f64) -> impl Fn(V3) -> f64 + '_ {
        move |x| (h_near + GRADING * self.hole_distance(x)).min(h_far)
    }
}

pub fn mesh_punctured_cap(theta: f64, t: f64, lambda: f64, eps: f64, h_far: f64, h_near: f64) -> Result<SurfaceMesh> {
    check_h(h_far)?;
    let layout = HoleLayout::new(theta, t, lambda, eps)?;
    if eps == 0.0 {
        return mesh_cap(theta, h_far);
    }
    if !(h_near > 0.0 && h_near <= eps / 6.0 + 1e-15) {
        return Err(Error::Domain(format!("h_near = {h_near} must lie in (0, ε/6] for ε = {eps}")));
    }
    mesh_layout(&layout, h_far, h_near)
}

pub fn mesh_layout(layout: &HoleLayout, h_far: f64, h_near: f64) -> Result<SurfaceMesh> {
    let size = layout.size(h_far, h_near);
    let mut loops = vec![rim_loop(layout.theta_eps, &size)];
    loops.extend((0..4).map(|j| layout.hole_loop(j, h_near)));
    let contains = |x: V3| colatitude(x) < layout.theta_eps && !layout.in_hole(x);
    let spec = DomainSpec {
        pole: Some([0.0, 0.0, -1.0]),
        loops,
        contains: &contains,
        size: &size,
        h: h_far,
        h_min: h_near,
        area: layout.domain_area(),
    };
    mesher::build(&spec)
}

/// Relative tolerance of the discrete area match.
pub const AREA_MATCH_TOL: f64 = 1e-10;

/// Punctured cap whose discrete area equals `target`, found by secant
/// iteration on the outer aperture. Returns the best mesh and its layout.
pub fn mesh_layout_matched(
    layout: &HoleLayout,
    h_far: f64,
    h_near: f64,
    target: f64,
) -> Result<(SurfaceMesh, HoleLayout)> {
    let mut cur = layout.clone();
    let mut mesh = mesh_layout(&cur, h_far, h_near)?;
    let mut err = mesh.area() - target;
    let mut prev: Option<(f64, f64)> = None;
    let mut best = (err.abs(), mesh.clone(), cur.clone());
    for _ in 0..8 {
        if err.abs() <= AREA_MATCH_TOL * target {
            break;
        }
        let rate = match prev {
            Some((t0, e0)) if (cur.theta_eps - t0).abs() > 0.0 && (err - e0).abs() > 0.0 => {
                (err - e0) / (cur.theta_eps - t0)
            }
            _ => 2.0 * PI * cur.theta_eps.sin(),
        };
        prev = Some((cur.theta_eps, err));
        cur = cur.with_aperture(cur.theta_eps - err / rate)?;
        mesh = mesh_layout(&cur, h_far, h_near)?;
        err = mesh.area() - target;
        if err.abs() < best.0 {
            best = (err.abs(), mesh.clone(), cur.clone());
        }
    }
    Ok((best.1, best.2))
}

/// Same-resolution reference: the cap `B_θ` meshed with the layout's size
/// function but without holes.
pub fn mesh_layout_reference(layout: &HoleLayout, h_far: f64, h_near: f64) -> Result<SurfaceMesh> {
    let size = layout.size(h_far, h_near);
    mesh_cap_sized(layout.theta, h_far, h_near, &size)
}

/// Angular measure of `{|x₁| < ε} ∪ {|x₂| < ε}` on the parallel at colatitude `t`.
pub fn strip_measure(t: f64, eps: f64) -> f64 {
    let s = t.sin();
    let half = if s <= eps { FRAC_PI_2 } else { (eps / s).asin() };
    4.0 * (2.0 * half).min(FRAC_PI_2)
}

/// Area of `B_{θ'} ∪ {|x₁| < ε} ∪ {|x₂| < ε}`.
pub fn helmet_area(theta_eps: f64, eps: f64) -> f64 {
    let kink = PI - (2f64.sqrt() * eps).min(1.0).asin();
    let (gx, gw) = hole_models::gauss_legendre(32);
    let mut strips = 0.0;
    let upper = kink.max(theta_eps);
    if upper > theta_eps {
        let panels = 16;
        let w = (upper - theta_eps) / panels as f64;
        for p in 0..panels {
            let a = theta_eps + p as f64 * w;
            for (xi, wi) in gx.iter().zip(&gw) {
                let t = a + 0.5 * w * (xi + 1.0);
                strips += 0.5 * w * wi * t.sin() * strip_measure(t, eps);
            }
        }
    }
    // Beyond the kink the strips cover whole parallels.
    strips += 2.0 * PI * (1.0 + upper.cos());
    cap_area(theta_eps) + strips
}

/// Aperture `θ^ε` with `|Ω_ε(θ)| = |B_θ|`.
pub fn helmet_aperture(theta: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 0.3) {
        return Err(Error::Domain(format!("strip half-width ε = {eps} outside (0, 0.3)")));
    }
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::Domain(format!("aperture {theta} outside (0, π)")));
    }
    let target = cap_area(theta);
    let f = |te: f64| Ok(helmet_area(te, eps) - target);
    let lo = 1e-3;
    if f(lo)? >= 0.0 {
        return Err(Error::Geometry(format!("strips alone exceed the area of B_θ for θ = {theta}")));
    }
    roots::brent(f, lo, theta, 1e-13, 200)
}

/// Helmet geometry with its compensated aperture.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Helmet {
    pub theta: f64,
    pub eps: f64,
    pub theta_eps: f64,
}

impl Helmet {
    pub fn new(theta: f64, eps: f64) -> Result<Self> {
        let theta_eps = helmet_aperture(theta, eps)?;
        if theta_eps >= PI - (2f64.sqrt() * eps).asin() {
            return Err(Error::Geometry(format!(
                "aperture {theta_eps:.4} leaves no complement between the strips (ε = {eps})"
            )));
        }
        Ok(Helmet { theta, eps, theta_eps })
    }

    pub fn contains(&self, x: V3) -> bool {
        colatitude(x) < self.theta_eps || x[0].abs() < self.eps || x[1].abs() < self.eps
    }

    /// Element size: `h_strip` in the strips and a band above the rim, graded to `h`.
    pub fn size(&self, h: f64, h_strip: f64) -> impl Fn(V3) -> f64 + '_ {
        move |x| {
            let d = (self.theta_eps - 2.0 * self.eps - colatitude(x)).max(0.0);
            (h_strip + GRADING * d).min(h)
        }
    }

    /// Boundary loop of the complement component in the quadrant `(sx, sy)`.
    pub fn quadrant_loop(&self, sx: f64, sy: f64, spacing: f64) -> Loop {
        let eps = self.eps;
        let te = self.theta_eps;
        let phi_a = (eps / te.sin()).asin();
        let phi_b = FRAC_PI_2 - phi_a;
        let mut pts: Vec<V3> = Vec::new();
        let n_rim = (((phi_b - phi_a) * te.sin() / spacing).ceil() as usize).max(2);
        for k in 0..n_rim {
            pts.push(spherical(te, phi_a + (phi_b - phi_a) * k as f64 / n_rim as f64));
        }
        let r = (1.0 - eps * eps).sqrt();
        let beta_top = (te.cos() / r).acos();
        let beta_corner = PI - (eps / r).asin();
        let n_edge = (((beta_corner - beta_top) * r / spacing).ceil() as usize).max(2);
        // Down along x₁ = ε, then back up along x₂ = ε.
        for k in 0..n_edge {
            let b = beta_top + (beta_corner - beta_top) * k as f64 / n_edge as f64;
            pts.push([eps, r * b.sin(), r * b.cos()]);
        }
        for k in 0..n_edge {
            let b = beta_corner - (beta_corner - beta_top) * k as f64 / n_edge as f64;
            pts.push([r * b.sin(), eps, r * b.cos()]);
        }
        let points = pts.into_iter().map(|p| [sx * p[0], sy * p[1], p[2]]).collect();
        Loop { points, tag: BoundaryTag::Strip }
    }

    /// Projection point inside the first-quadrant complement component.
    pub fn pole(&self) -> V3 {
        let t_corner = PI - (2f64.sqrt() * self.eps).asin();
        spherical(0.5 * (self.theta_eps + t_corner), FRAC_PI_4)
    }
}

pub fn mesh_helmet(theta: f64, eps: f64, h: f64) -> Result<SurfaceMesh> {
    mesh_helmet_with(theta, eps, h, default_strip_size(eps, h))
}

/// Default element size inside the strips.
pub fn default_strip_size(eps: f64, h: f64) -> f64 {
    (eps / 3.0).min(h)
}

pub fn mesh_helmet_with(theta: f64, eps: f64, h: f64, h_strip: f64) -> Result<SurfaceMesh> {
    check_h(h)?;
    let helmet = Helmet::new(theta, eps)?;
    let size = helmet.size(h, h_strip);
    let loops =
        [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)].map(|(sx, sy)| helmet.quadrant_loop(sx, sy, h_strip));
    let contains = |x: V3| helmet.contains(x);
    let spec = DomainSpec {
        pole: Some(helmet.pole()),
        loops: loops.to_vec(),
        contains: &contains,
        size: &size,
        h,
        h_min: h_strip,
        area: cap_area(theta),
    };
    mesher::build(&spec)
}

/// Cap `B_θ` meshed with the helmet's size function (rim band refined).
pub fn mesh_helmet_reference(theta: f64, eps: f64, h: f64, h_strip: f64) -> Result<SurfaceMesh> {
    Helmet::new(theta, eps)?;
    let size = move |x: V3| {
        let d = (theta - 2.0 * eps - colatitude(x)).max(0.0);
        (h_strip + GRADING * d).min(h)
    };
    mesh_cap_sized(theta, h, h_strip, &size)
}

/// Sphere minus `ψ(εω)` centred at the south pole.
pub fn mesh_sphere_with_hole(hole: &EllipseHole, eps: f64, h: f64, h_near: f64) -> Result<SurfaceMesh> {
    check_h(h)?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("ε = {eps} outside (0, 1)")));
    }
    let chart = HoleChart { frame: Frame::at_latitude(PI, 0.0) };
    let (a, b) = (eps * hole.semi_major, eps * hole.semi_minor);
    let radius = 2.0 * (a / 2.0).atan();
    let in_hole = move |x: V3| {
        dot(x, chart.frame.n) > 0.0 && {
            let y = chart.to_chart(x);
            (y[0] / a).powi(2) + (y[1] / b).powi(2) < 1.0
        }
    };
    let size = move |x: V3| (h_near + GRADING * (geodesic(x, chart.frame.n) - radius).max(0.0)).min(h);
    let perimeter = 2.0 * PI * ((a * a + b * b) / 2.0).sqrt();
    let n = HOLE_SEGMENTS.max((perimeter / h_near).ceil() as usize);
    let points = (0..n)
        .map(|k| {
            let s = 2.0 * PI * k as f64 / n as f64;
            chart.to_sphere([a * s.cos(), b * s.sin()])
        })
        .collect();
    let contains = |x: V3| !in_hole(x);
    let spec = DomainSpec {
        pole: Some(chart.frame.n),
        loops: vec![Loop { points, tag: BoundaryTag::Hole(0) }],
        contains: &contains,
        size: &size,
        h,
        h_min: h_near,
        area: 4.0 * PI,
    };
    mesher::build(&spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strip_measure_limits() {
        assert!((strip_measure(PI - 1e-9, 0.1) - 2.0 * PI).abs() < 1e-12);
        assert!((strip_measure(FRAC_PI_2, 0.1) - 8.0 * 0.1f64.asin()).abs() < 1e-12);
    }

    #[test]
    fn helmet_area_against_sampling() {
        // Monte-Carlo-free check: thin strips add about 8ε per unit length of meridian arc.
        let (te, eps) = (0.7 * PI, 1e-4);
        let extra = helmet_area(te, eps) - cap_area(te);
        let approx = 8.0 * eps * (PI - te);
        assert!((extra - approx).abs() < 1e-3 * approx, "{extra} vs {approx}");
    }

    #[test]
    fn helmet_aperture_shrinks() {
        let te = helmet_aperture(0.75 * PI, 0.05).unwrap();
        assert!(te < 0.75 * PI);
        assert!((helmet_area(te, 0.05) - cap_area(0.75 * PI)).abs() < 1e-11);
        let small = helmet_aperture(0.75 * PI, 1e-4).unwrap();
        assert!((small - 0.75 * PI).abs() < 1e-3);
    }

    #[test]
    fn layout_area_compensation() {
        let l = HoleLayout::new(0.8 * PI, 1.93, 2.0, 0.1).unwrap();
        assert!((l.domain_area() - cap_area(0.8 * PI)).abs() < 1e-12);
        assert!(l.theta_eps > 0.8 * PI);
        assert!((l.hole_area - PI * 0.01).abs() < 0.05 * PI * 0.01);
    }

    #[test]
    fn overlapping_holes_rejected() {
        assert!(matches!(HoleLayout::new(0.8 * PI, 0.3, 2.0, 0.3), Err(Error::Geometry(_))));
        assert!(matches!(HoleLayout::new(0.8 * PI, 2.45, 2.0, 0.1), Err(Error::Geometry(_))));
    }
}
