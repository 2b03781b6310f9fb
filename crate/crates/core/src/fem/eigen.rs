//! Smallest eigenpairs of `K u = λ M u` by shifted block inverse iteration
//! with Rayleigh–Ritz projection.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::sparse::{conjugate_gradient, EnvelopeCholesky, SparseSpd};
use crate::error::{Error, Result};

/// Positive shift making `K + σM` definite despite the constant mode.
pub const SHIFT: f64 = 0.1;
pub const MAX_ITERATIONS: usize = 500;
pub const DEFAULT_SEED: u64 = 20_220_613;
/// Relative tolerance of the inner mass solves used for residual norms.
const MASS_CG_TOL: f64 = 1e-12;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumResult {
    /// Ascending, starting at the constant mode.
    pub eigenvalues: Vec<f64>,
    /// `‖K u − λ M u‖_{M⁻¹}` for `M`-normalised `u`.
    pub residuals: Vec<f64>,
    pub h: f64,
    pub iterations: usize,
    pub dofs: usize,
    /// `M`-orthonormal eigenvectors, one per eigenvalue.
    #[serde(skip)]
    pub vectors: Vec<Vec<f64>>,
}

impl SpectrumResult {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub seed: u64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-8, seed: DEFAULT_SEED, max_iterations: MAX_ITERATIONS }
    }
}

/// `k + 1` smallest eigenpairs with residual tolerance `tol` (relative to `max(1, λ)`).
pub fn neumann_spectrum(k: &SparseSpd, m: &SparseSpd, count: usize, tol: f64) -> Result<SpectrumResult> {
    neumann_spectrum_with(k, m, count, SolverOptions { tol, ..SolverOptions::default() }, 0.0)
}

pub fn neumann_spectrum_with(
    k: &SparseSpd,
    m: &SparseSpd,
    count: usize,
    opts: SolverOptions,
    h: f64,
) -> Result<SpectrumResult> {
    let n = k.dim;
    if count < 1 {
        return Err(Error::Domain("need at least one nonzero eigenvalue (k ≥ 1)".into()));
    }
    if m.dim != n {
        return Err(Error::Dimension(format!("stiffness {n} vs mass {}", m.dim)));
    }
    let wanted = count + 1;
    let p = (count + 3).min(n);
    if wanted > p {
        return Err(Error::Domain(format!("{wanted} eigenpairs requested from {n} unknowns")));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::Domain(format!("tolerance {} must be positive", opts.tol)));
    }
    let shifted = k.combine(1.0, m, SHIFT)?;
    let chol = EnvelopeCholesky::factor(&shifted)?;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x: Vec<Vec<f64>> = (0..p)
        .map(|c| if c == 0 { vec![1.0; n] } else { (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect() })
        .collect();
    let mut last_res = Vec::new();
    for it in 1..=opts.max_iterations {
        let y: Vec<Vec<f64>> = x.iter().map(|v| chol.solve(&m.apply(v))).collect();
        let ky: Vec<Vec<f64>> = y.iter().map(|v| k.apply(v)).collect();
        let my: Vec<Vec<f64>> = y.iter().map(|v| m.apply(v)).collect();
        let (values, q) = rayleigh_ritz(&y, &ky, &my)?;
        let combine = |src: &[Vec<f64>]| -> Vec<Vec<f64>> {
            (0..p)
                .map(|c| {
                    let mut out = vec![0.0; n];
                    for (r, s) in src.iter().enumerate() {
                        let w = q[(r, c)];
                        for (o, v) in out.iter_mut().zip(s) {
                            *o += w * v;
                        }
                    }
                    out
                })
                .collect()
        };
        x = combine(&y);
        let kx = combine(&ky);
        let mx = combine(&my);
        let mut residuals = Vec::with_capacity(wanted);
        for c in 0..wanted {
            let r: Vec<f64> = kx[c].iter().zip(&mx[c]).map(|(a, b)| a - values[c] * b).collect();
            residuals.push(dual_norm(m, &r)?);
        }
        let done = residuals.iter().zip(&values).all(|(r, v)| *r <= opts.tol * v.abs().max(1.0));
        if done {
            return Ok(SpectrumResult {
                eigenvalues: values[..wanted].to_vec(),
                residuals,
                h,
                iterations: it,
                dofs: n,
                vectors: x.into_iter().take(wanted).collect(),
            });
        }
        last_res = residuals;
    }
    Err(Error::Convergence(format!(
        "block inverse iteration stopped after {} iterations; residuals {:?}",
        opts.max_iterations, last_res
    )))
}

/// Ritz values (ascending) and coefficient matrix making the combined block `M`-orthonormal.
fn rayleigh_ritz(y: &[Vec<f64>], ky: &[Vec<f64>], my: &[Vec<f64>]) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let p = y.len();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let kr = DMatrix::from_fn(p, p, |i, j| 0.5 * (dot(&y[i], &ky[j]) + dot(&y[j], &ky[i])));
    let mr = DMatrix::from_fn(p, p, |i, j| 0.5 * (dot(&y[i], &my[j]) + dot(&y[j], &my[i])));
    let l = mr
        .cholesky()
        .ok_or_else(|| Error::IllConditioned { condition: f64::INFINITY, hint: "search block lost rank".into() })?
        .l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::IllConditioned { condition: f64::INFINITY, hint: "singular Gram factor".into() })?;
    let c = &linv * kr * linv.transpose();
    let c = 0.5 * (&c + c.transpose());
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let v = DMatrix::from_fn(p, p, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, linv.transpose() * v))
}

/// `‖r‖_{M⁻¹} = √(rᵀ M⁻¹ r)`.
pub fn dual_norm(m: &SparseSpd, r: &[f64]) -> Result<f64> {
    let (z, _) = conjugate_gradient(m, r, MASS_CG_TOL, 10 * m.dim.max(100))?;
    Ok(z.iter().zip(r).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::assembly::assemble_p1;
    use crate::fem::domains::mesh_cap;
    use std::f64::consts::PI;

    #[test]
    fn sphere_triplet() {
        let mesh = mesh_cap(PI, 0.12).unwrap();
        let (k, m) = assemble_p1(&mesh).unwrap();
        let s = neumann_spectrum(&k, &m, 3, 1e-8).unwrap();
        assert!(s.eigenvalues[0].abs() < 1e-8 * s.eigenvalues[1]);
        for mu in &s.eigenvalues[1..] {
            assert!((mu - 2.0).abs() < 0.02, "{:?}", s.eigenvalues);
        }
    }

    #[test]
    fn deterministic() {
        let mesh = mesh_cap(0.5 * PI, 0.15).unwrap();
        let (k, m) = assemble_p1(&mesh).unwrap();
        let a = neumann_spectrum(&k, &m, 2, 1e-8).unwrap();
        let b = neumann_spectrum(&k, &m, 2, 1e-8).unwrap();
        assert_eq!(a.eigenvalues, b.eigenvalues);
        assert!(a.max_residual() < 1e-8 * 3.0);
    }
}
