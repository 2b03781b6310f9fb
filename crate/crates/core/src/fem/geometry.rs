//! Small vector helpers, stereographic charts and hole charts on the unit sphere.

use std::f64::consts::PI;

pub type V3 = [f64; 3];

pub fn add(a: V3, b: V3) -> V3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub(a: V3, b: V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn scale(a: V3, s: f64) -> V3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: V3, b: V3) -> V3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn norm(a: V3) -> f64 {
    dot(a, a).sqrt()
}

pub fn normalize(a: V3) -> V3 {
    scale(a, 1.0 / norm(a))
}

/// Point at colatitude `t` and longitude `phi`.
pub fn spherical(t: f64, phi: f64) -> V3 {
    let (st, ct) = t.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [st * cp, st * sp, ct]
}

pub fn colatitude(x: V3) -> f64 {
    x[2].clamp(-1.0, 1.0).acos()
}

/// Great-circle distance.
pub fn geodesic(a: V3, b: V3) -> f64 {
    norm(cross(a, b)).atan2(dot(a, b))
}

/// Orthonormal frame `(e1, e2, n)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame {
    pub e1: V3,
    pub e2: V3,
    pub n: V3,
}

impl Frame {
    /// Any frame with the given normal.
    pub fn around(n: V3) -> Self {
        let n = normalize(n);
        let helper = if n[2].abs() < 0.9 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
        let e1 = normalize(cross(helper, n));
        let e2 = cross(n, e1);
        Frame { e1, e2, n }
    }

    /// Frame at a point of colatitude `t`, longitude `phi`: `e1` along the
    /// parallel (increasing φ), `e2` towards the north pole.
    pub fn at_latitude(t: f64, phi: f64) -> Self {
        let (st, ct) = t.sin_cos();
        let (sp, cp) = phi.sin_cos();
        let n = [st * cp, st * sp, ct];
        let e1 = [-sp, cp, 0.0];
        let e2 = [-ct * cp, -ct * sp, st];
        Frame { e1, e2, n }
    }
}

/// Stereographic projection from the point `frame.n` onto the plane through
/// the origin spanned by `e1, e2`.
#[derive(Clone, Copy, Debug)]
pub struct Stereo {
    pub frame: Frame,
}

impl Stereo {
    pub fn from_pole(pole: V3) -> Self {
        Stereo { frame: Frame::around(pole) }
    }

    pub fn project(&self, x: V3) -> [f64; 2] {
        let d = 1.0 - dot(x, self.frame.n);
        [dot(x, self.frame.e1) / d, dot(x, self.frame.e2) / d]
    }

    pub fn lift(&self, w: [f64; 2]) -> V3 {
        let r2 = w[0] * w[0] + w[1] * w[1];
        let f = &self.frame;
        let v = add(add(scale(f.e1, 2.0 * w[0]), scale(f.e2, 2.0 * w[1])), scale(f.n, r2 - 1.0));
        normalize(scale(v, 1.0 / (r2 + 1.0)))
    }
}

/// Conformal chart centred at `frame.n` with unit Jacobian at the centre:
/// `X = (x + (1 − |x|²/4) c) / (1 + |x|²/4)`.
#[derive(Clone, Copy, Debug)]
pub struct HoleChart {
    pub frame: Frame,
}

impl HoleChart {
    pub fn to_sphere(&self, x: [f64; 2]) -> V3 {
        let q = 0.25 * (x[0] * x[0] + x[1] * x[1]);
        let f = &self.frame;
        let v = add(add(scale(f.e1, x[0]), scale(f.e2, x[1])), scale(f.n, 1.0 - q));
        normalize(scale(v, 1.0 / (1.0 + q)))
    }

    /// Inverse chart; undefined at the antipode of the centre.
    pub fn to_chart(&self, x: V3) -> [f64; 2] {
        let d = 1.0 + dot(x, self.frame.n);
        [2.0 * dot(x, self.frame.e1) / d, 2.0 * dot(x, self.frame.e2) / d]
    }

    /// Area density `(1 + |x|²/4)⁻²`.
    pub fn density(x: [f64; 2]) -> f64 {
        (1.0 + 0.25 * (x[0] * x[0] + x[1] * x[1])).powi(-2)
    }
}

/// Spherical area of the chart image of the ellipse with semi-axes `(a, b)`.
pub fn chart_ellipse_area(a: f64, b: f64) -> f64 {
    // Polar coordinates in the scaled disk: x = (a r cos s, b r sin s).
    let (gx, gw) = crate::hole_models::gauss_legendre(32);
    let n_ang = 128;
    let mut total = 0.0;
    for k in 0..n_ang {
        let s = 2.0 * PI * (k as f64 + 0.5) / n_ang as f64;
        let (ss, cs) = s.sin_cos();
        for (xi, wi) in gx.iter().zip(&gw) {
            let r = 0.5 * (xi + 1.0);
            total += 0.5 * wi * r * HoleChart::density([a * r * cs, b * r * ss]);
        }
    }
    total * a * b * 2.0 * PI / n_ang as f64
}

/// Cap area `2π(1 − cos θ)`.
pub fn cap_area(theta: f64) -> f64 {
    2.0 * PI * (1.0 - theta.cos())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stereo_roundtrip() {
        let s = Stereo::from_pole([0.3, -0.2, -0.9]);
        let x = normalize([0.1, 0.7, 0.2]);
        let back = s.lift(s.project(x));
        assert!(norm(sub(back, x)) < 1e-14);
    }

    #[test]
    fn hole_chart_roundtrip_and_unit_jacobian() {
        let c = HoleChart { frame: Frame::at_latitude(1.9, 0.4) };
        let x = [0.03, -0.02];
        let back = c.to_chart(c.to_sphere(x));
        assert!((back[0] - x[0]).abs() < 1e-14 && (back[1] - x[1]).abs() < 1e-14);
        let h = 1e-6;
        let p0 = c.to_sphere([0.0, 0.0]);
        let d1 = norm(sub(c.to_sphere([h, 0.0]), p0)) / h;
        let d2 = norm(sub(c.to_sphere([0.0, h]), p0)) / h;
        assert!((d1 - 1.0).abs() < 1e-6 && (d2 - 1.0).abs() < 1e-6);
        assert!(norm(sub(p0, c.frame.n)) < 1e-15);
    }

    #[test]
    fn latitude_frame_orientation() {
        let f = Frame::at_latitude(2.0, 0.0);
        // e2 points towards the north pole: moving along it decreases colatitude.
        let p = normalize(add(f.n, scale(f.e2, 1e-3)));
        assert!(colatitude(p) < 2.0);
        assert!(dot(f.e1, f.n).abs() < 1e-15 && dot(f.e2, f.n).abs() < 1e-15);
    }

    #[test]
    fn chart_disk_area() {
        // Chart disk of radius ε is the cap of geodesic radius 2 atan(ε/2).
        let eps = 0.3;
        let exact = cap_area(2.0 * (eps / 2.0f64).atan());
        assert!((chart_ellipse_area(eps, eps) - exact).abs() < 1e-13);
    }
}
