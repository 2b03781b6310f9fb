//! Adaptive Dormand–Prince 5(4) integration for small fixed-size systems.

use crate::error::{Error, Result};

/// Tolerances for [`integrate`].
#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rtol: 1e-11, atol: 1e-13 }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const N: usize>(y: &[f64; N], terms: &[(f64, &[f64; N])], h: f64) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Integrates `y' = f(t, y)` from `t0` to `t1` (either direction).
///
/// `observe(t, y, f(t, y))` is called at the start point and after every
/// accepted step, the last call landing exactly on `t1`.
pub fn integrate<const N: usize, F, O>(
    f: F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    tol: Tolerance,
    mut observe: O,
) -> Result<[f64; N]>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    O: FnMut(f64, &[f64; N], &[f64; N]),
{
    let span = t1 - t0;
    if span == 0.0 {
        observe(t0, &y0, &f(t0, &y0));
        return Ok(y0);
    }
    let dir = span.signum();
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    observe(t, &y, &k1);

    // Initial step from the derivative scale.
    let scale: f64 =
        (0..N).map(|i| (k1[i] / (tol.atol + tol.rtol * y[i].abs())).powi(2)).sum::<f64>().sqrt() / (N as f64).sqrt();
    let mut h = if scale > 0.0 { (0.01 / scale).min(span.abs() * 0.1) } else { span.abs() * 0.01 }
        .max(1e-14 * (1.0 + t0.abs()));

    let h_min = 1e-15 * (1.0 + t0.abs().max(t1.abs()));
    let mut steps = 0usize;
    loop {
        let remaining = (t1 - t).abs();
        if remaining <= 1e-15 * (1.0 + t1.abs()) {
            break;
        }
        let last = h >= remaining;
        let hs = dir * if last { remaining } else { h };

        let k2 = f(t + C2 * hs, &axpy(&y, &[(A21, &k1)], hs));
        let k3 = f(t + C3 * hs, &axpy(&y, &[(A31, &k1), (A32, &k2)], hs));
        let k4 = f(t + C4 * hs, &axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], hs));
        let k5 = f(t + C5 * hs, &axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], hs));
        let k6 = f(t + hs, &axpy(&y, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], hs));
        let y_new = axpy(&y, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], hs);
        let t_new = if last { t1 } else { t + hs };
        let k7 = f(t_new, &y_new);

        let mut err = 0.0;
        for i in 0..N {
            let e = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
            err += (e / sc).powi(2);
        }
        let err = (err / N as f64).sqrt();
        if !err.is_finite() {
            return Err(Error::Integration { t, reason: "non-finite error estimate".into() });
        }
        if err <= 1.0 {
            t = t_new;
            y = y_new;
            k1 = k7;
            observe(t, &y, &k1);
            if last {
                break;
            }
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h = hs.abs() * factor;
        if h < h_min {
            return Err(Error::Integration { t, reason: "step size underflow".into() });
        }
        steps += 1;
        if steps > 2_000_000 {
            return Err(Error::Integration { t, reason: "too many steps".into() });
        }
    }
    Ok(y)
}

/// Classical fixed-step RK4, `n` steps from `t0` to `t1`.
pub fn rk4_fixed<const N: usize, F>(f: F, t0: f64, y0: [f64; N], t1: f64, n: usize) -> [f64; N]
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let h = (t1 - t0) / n as f64;
    let mut y = y0;
    for s in 0..n {
        let t = t0 + s as f64 * h;
        let k1 = f(t, &y);
        let k2 = f(t + 0.5 * h, &axpy(&y, &[(0.5, &k1)], h));
        let k3 = f(t + 0.5 * h, &axpy(&y, &[(0.5, &k2)], h));
        let k4 = f(t + h, &axpy(&y, &[(1.0, &k3)], h));
        y = axpy(&y, &[(1.0 / 6.0, &k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)], h);
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_quarter_period() {
        let y = integrate(
            |_, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            [0.0, 1.0],
            std::f64::consts::FRAC_PI_2,
            Tolerance::default(),
            |_, _, _| {},
        )
        .unwrap();
        assert!((y[0] - 1.0).abs() < 1e-10);
        assert!(y[1].abs() < 1e-10);
    }

    #[test]
    fn backward_integration_matches_exponential() {
        let y = integrate(|_, y: &[f64; 1]| [y[0]], 1.0, [1.0], 0.0, Tolerance::default(), |_, _, _| {}).unwrap();
        assert!((y[0] - (-1.0f64).exp()).abs() < 1e-11);
    }

    #[test]
    fn observer_ends_on_target() {
        let mut last = f64::NAN;
        integrate(|t, _: &[f64; 1]| [t.cos()], 0.0, [0.0], 2.5, Tolerance::default(), |t, _, _| last = t).unwrap();
        assert_eq!(last, 2.5);
    }

    #[test]
    fn rk4_is_fourth_order() {
        let exact = 1.0f64.exp();
        let e1 = (rk4_fixed(|_, y: &[f64; 1]| [y[0]], 0.0, [1.0], 1.0, 10)[0] - exact).abs();
        let e2 = (rk4_fixed(|_, y: &[f64; 1]| [y[0]], 0.0, [1.0], 1.0, 20)[0] - exact).abs();
        assert!((e1 / e2 - 16.0).abs() < 1.5);
    }
}
