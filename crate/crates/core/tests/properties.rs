use std::f64::consts::{FRAC_PI_2, PI};

use capspec::cap_eigen::{self, CapEigen, ShootConfig};
use capspec::hole_models::{self, gauss_legendre, Mat2};
use capspec::{helmet, perturbation};
use proptest::prelude::*;

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig { cases: n, ..ProptestConfig::default() }
}

fn rotate(m: Mat2, a: f64) -> Mat2 {
    let (s, c) = a.sin_cos();
    let r = [[c, -s], [s, c]];
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[i][j] += r[i][k] * m[k][l] * r[j][l];
                }
            }
        }
    }
    out
}

fn max_diff(a: Mat2, b: Mat2) -> f64 {
    (0..4).map(|k| (a[k / 2][k % 2] - b[k / 2][k % 2]).abs()).fold(0.0, f64::max)
}

/// Flux form `[sin t g']_a^b = ∫_a^b sin t (1/sin²t − μ) g dt` on every grid cell.
fn flux_residual(cap: &CapEigen, t_min: f64) -> f64 {
    let (x, w) = gauss_legendre(8);
    let mut worst: f64 = 0.0;
    for pair in cap.grid.windows(2).filter(|p| p[0].t >= t_min) {
        let (a, b) = (pair[0].t, pair[1].t);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let integral: f64 = x
            .iter()
            .zip(&w)
            .map(|(xi, wi)| {
                let t = mid + half * xi;
                let s = t.sin();
                wi * half * s * (1.0 / (s * s) - cap.mu1) * cap.g(t)
            })
            .sum();
        let flux = b.sin() * pair[1].gp - a.sin() * pair[0].gp;
        worst = worst.max((flux - integral).abs());
    }
    worst
}

proptest! {
    #![proptest_config(cases(12))]

    #[test]
    fn halving_start_offset_keeps_mu1(theta in 0.2 * PI..0.97 * PI) {
        let coarse = cap_eigen::mu1_of_cap_with(theta, &ShootConfig::default()).unwrap();
        let cfg = ShootConfig { start: 0.5 * cap_eigen::START_OFFSET, ..ShootConfig::default() };
        let fine = cap_eigen::mu1_of_cap_with(theta, &cfg).unwrap();
        prop_assert!((fine / coarse - 1.0).abs() < 1e-9, "{coarse} vs {fine}");
    }

    #[test]
    fn profile_satisfies_radial_equation(theta in 0.2 * PI..0.97 * PI) {
        let cap = cap_eigen::normalized_profile(theta).unwrap();
        let r = flux_residual(&cap, 0.05);
        prop_assert!(r < 1e-6, "flux residual {r:e}");
    }

    #[test]
    fn profile_invariants(theta in 0.15 * PI..0.97 * PI) {
        let cap = cap_eigen::normalized_profile(theta).unwrap();
        prop_assert!(cap.grid.iter().all(|s| s.g > 0.0));
        prop_assert!(cap.grid.last().unwrap().gp.abs() < 1e-7);
        // π ∫ g² sin t by Gauss–Legendre on the interpolant
        let (x, w) = gauss_legendre(16);
        let cells = 200;
        let mut norm = 0.0;
        for k in 0..cells {
            let a = theta * k as f64 / cells as f64;
            let half = 0.5 * theta / cells as f64;
            for (xi, wi) in x.iter().zip(&w) {
                let t = a + half * (1.0 + xi);
                norm += wi * half * cap.g(t).powi(2) * t.sin();
            }
        }
        prop_assert!((PI * norm - 1.0).abs() < 1e-8, "norm {}", PI * norm);
        let crit = cap_eigen::find_critical_aperture().unwrap();
        let expected = if theta <= crit - 1e-6 { 0 } else if theta > crit + 1e-6 { 1 } else { cap.gprime_sign_changes() };
        prop_assert_eq!(cap.gprime_sign_changes(), expected);
    }

    #[test]
    fn mu1_is_continuous(theta in 0.2 * PI..0.95 * PI, h in 1e-5f64..1e-2) {
        let f = |x: f64| cap_eigen::mu1_of_cap(x).unwrap();
        let d = 1e-3;
        let slope = ((f(theta + d) - f(theta - d)) / (2.0 * d)).abs();
        let jump = (f(theta + h) - f(theta)).abs();
        prop_assert!(jump <= 10.0 * h * slope.max(0.1), "jump {jump} for h {h}, slope {slope}");
    }

    #[test]
    fn sine_is_the_mu_two_solution(theta in 0.05..PI - 0.05) {
        let shot = cap_eigen::shoot_radial(2.0, theta).unwrap();
        for s in &shot.profile {
            prop_assert!((s.g - s.t.sin()).abs() < 1e-8);
        }
    }
}

proptest! {
    #![proptest_config(cases(64))]

    #[test]
    fn virtual_mass_monotone_in_lambda(a in 1.001f64..50.0, b in 1.001f64..50.0) {
        prop_assume!((a - b).abs() > 1e-6);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (p, q) = (hole_models::ellipse_from_lambda(lo).unwrap(), hole_models::ellipse_from_lambda(hi).unwrap());
        // 2π/(1+λ⁻²) rises and 2π/(1−λ⁻²) falls towards 2π
        prop_assert!(p.m[0][0] < q.m[0][0]);
        prop_assert!(p.m[1][1] > q.m[1][1]);
        prop_assert!(q.m[0][0] < 2.0 * PI && 2.0 * PI < q.m[1][1]);
        prop_assert!((q.semi_major * q.semi_minor - 1.0).abs() < 1e-12);
        prop_assert!((q.trace() - 4.0 * PI * q.cap * q.cap).abs() < 1e-10 * q.trace());
        let ratio = 2.0 / (1.0 + hi.powi(-2));
        prop_assert!(ratio > 1.0 && ratio < 2.0);
    }
}

#[test]
fn virtual_mass_ratio_limits() {
    let ratio = |l: f64| 2.0 / (1.0 + l.powi(-2));
    assert!(ratio(1.0 + 1e-9) - 1.0 < 1e-8);
    assert!(2.0 - ratio(1e6) < 1e-11);
    let disk = hole_models::ellipse_from_lambda(1e6).unwrap();
    assert!(max_diff(disk.m, [[2.0 * PI, 0.0], [0.0, 2.0 * PI]]) < 1e-5);
}

proptest! {
    #![proptest_config(cases(10))]

    #[test]
    fn oracle_rotates_with_the_hole(lambda in 1.2f64..4.0, alpha in 0.0..PI) {
        let hole = hole_models::ellipse_from_lambda(lambda).unwrap();
        let n = hole_models::DEFAULT_COLLOC;
        let curve = hole.boundary(n).rotated(alpha);
        let sol = hole_models::exterior_neumann_oracle(&curve, hole_models::DEFAULT_MODES, n).unwrap();
        let d = max_diff(sol.m_est, rotate(hole.m, alpha));
        prop_assert!(d < 1e-6, "rotation mismatch {d:e}");
        prop_assert!((sol.m_est[0][1] - sol.m_est[1][0]).abs() < 1e-6);
    }

    #[test]
    fn oracle_scales_quadratically(lambda in 1.2f64..4.0, s in 0.3f64..3.0) {
        let hole = hole_models::ellipse_from_lambda(lambda).unwrap();
        let n = hole_models::DEFAULT_COLLOC;
        let base = hole_models::exterior_neumann_oracle(&hole.boundary(n), hole_models::DEFAULT_MODES, n).unwrap();
        let scaled = hole_models::exterior_neumann_oracle(&hole.boundary(n).scaled(s), hole_models::DEFAULT_MODES, n).unwrap();
        let expected = [[s * s * base.m_est[0][0], s * s * base.m_est[0][1]], [s * s * base.m_est[1][0], s * s * base.m_est[1][1]]];
        prop_assert!(max_diff(scaled.m_est, expected) < 1e-6 * s * s);
    }

    #[test]
    fn trace_route_matches_direct_slope(theta in 0.3 * PI..0.97 * PI, frac in 0.1f64..0.97, lambda in 1.01f64..6.0) {
        let cap = cap_eigen::normalized_profile(theta).unwrap();
        let t = frac * theta;
        let hole = hole_models::ellipse_from_lambda(lambda).unwrap();
        let direct = perturbation::four_hole_slope_direct(&cap, t, hole.m);
        let matrix = perturbation::four_hole_matrix(&cap, t, hole.m).unwrap();
        prop_assert!((matrix.trace() / 2.0 - direct).abs() < 1e-12 * direct.abs().max(1.0));
        prop_assert!((matrix.kappa[0] - matrix.kappa[1]).abs() < 1e-10 * direct.abs().max(1.0));
        let cert = perturbation::certificate_for(&cap, t, lambda).unwrap();
        prop_assert_eq!(cert.positive, cert.slope > 0.0);
    }

    #[test]
    fn slope_is_continuous(theta in 0.3 * PI..0.95 * PI, frac in 0.2f64..0.9, lambda in 1.05f64..4.0) {
        let t = frac * theta;
        let d = 1e-4;
        let base = perturbation::four_hole_slope(theta, t, lambda).unwrap().slope;
        for (dth, dt, dl) in [(d, 0.0, 0.0), (0.0, d, 0.0), (0.0, 0.0, d)] {
            let moved = perturbation::four_hole_slope(theta + dth, t + dt, lambda + dl).unwrap().slope;
            let coarse = perturbation::four_hole_slope(theta + 10.0 * dth, t + 10.0 * dt, lambda + 10.0 * dl).unwrap().slope;
            // Lipschitz bound from the ten-times-wider step
            prop_assert!((moved - base).abs() <= 0.2 * (coarse - base).abs() + 1e-9, "{base} {moved} {coarse}");
        }
    }

    #[test]
    fn helmet_condition_ignores_normalization(theta in 0.62 * PI..0.98 * PI, c in 0.1f64..10.0) {
        let cap = cap_eigen::normalized_profile(theta).unwrap();
        let mut scaled = cap.clone();
        for s in &mut scaled.grid {
            s.g *= c;
            s.gp *= c;
        }
        scaled.norm *= c;
        let a = helmet::report_for(&cap).unwrap();
        let b = helmet::report_for(&scaled).unwrap();
        prop_assert_eq!(a.counterexample, b.counterexample);
        if a.helmet_slope.is_finite() {
            prop_assert!((b.helmet_slope - c * c * a.helmet_slope).abs() < 1e-9 * (1.0 + b.helmet_slope.abs()));
        }
    }
}

#[test]
fn helmet_branch_and_slope_signs() {
    let crit = cap_eigen::find_critical_aperture().unwrap();
    let prime = cap_eigen::find_strip_aperture().unwrap();
    for k in 0..60 {
        let theta = 0.55 * PI + k as f64 * 0.0073 * PI;
        let r = helmet::helmet_slopes(theta).unwrap();
        assert_eq!(r.nu1, PI * PI / (4.0 * (PI - theta).powi(2)));
        if theta > prime + 0.01 * PI && theta < 0.99 * PI {
            assert!(r.nu1 > r.mu1, "branch at {}", theta / PI);
        }
        if (theta - crit).abs() > 1e-6 {
            assert_eq!(r.cap_slope > 0.0, theta > crit, "cap slope at {}", theta / PI);
        }
        if r.mu1.sqrt() * (PI - theta) < FRAC_PI_2 && r.helmet_slope.is_finite() {
            assert!(r.helmet_slope > 0.0, "helmet slope at {}", theta / PI);
        }
    }
    let at = helmet::helmet_slopes(crit).unwrap();
    assert!(at.cap_slope.abs() < 1e-6);
}

#[test]
fn sphere_routes_agree() {
    for lambda in [1.1, 1.5, 2.0, 1e6] {
        let hole = hole_models::ellipse_from_lambda(lambda).unwrap();
        for eps in [0.0, 0.05, 0.1, 0.2] {
            let closed = perturbation::sphere_single_hole(&hole, eps).unwrap();
            let (matrix, _) = perturbation::sphere_single_hole_matrix(&hole, eps).unwrap();
            assert!((closed.sum12 - matrix.sum12).abs() < 1e-12);
            assert!((closed.mu3 - matrix.mu3).abs() < 1e-12);
        }
    }
    let disk = hole_models::ellipse_from_lambda(1e6).unwrap();
    let ellipse = hole_models::ellipse_from_lambda(1.5).unwrap();
    let a = perturbation::sphere_single_hole(&disk, 0.1).unwrap();
    let b = perturbation::sphere_single_hole(&ellipse, 0.1).unwrap();
    assert!(b.sum12 < a.sum12);
}
