//! JSON job files: `{domain, params, h, k, tol, seed}`.
//!
//! | domain          | params                                                          |
//! |-----------------|-----------------------------------------------------------------|
//! | `cap`           | `theta`                                                         |
//! | `punctured_cap` | `theta`, `t` (angle or `"auto"`), `lambda`, `eps`, `near_divisor`? |
//! | `helmet`        | `theta`, `eps`, `h_strip`?                                      |
//! | `sphere_hole`   | `lambda`, `eps`, `near_divisor`?                                |
//! | `eps2_fit`      | `theta`, `t`, `lambda`, `eps` (list), `near_divisor`?, `richardson`? |
//! | `helmet_sweep`  | `eps`, `thetas`? (defaults to 0.55π..0.95π by 0.01π)           |
//!
//! Mesh domains also accept `off`, a path receiving the mesh. Angles are
//! radians when given as numbers and multiples of π when given as strings
//! such as `"0.8pi"`. Unknown keys are rejected.

use std::f64::consts::PI;
use std::path::PathBuf;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::domains;
use super::eigen::{SolverOptions, SpectrumResult, DEFAULT_SEED, MAX_ITERATIONS};
use super::experiments::{self, HPolicy, HelmetSweep, SlopeFit, SpectrumRow};
use super::mesh::SurfaceMesh;
use crate::cap_eigen;
use crate::error::{Error, Result};
use crate::hole_models;
use crate::units::AngleSpec;

pub const DEFAULT_K: usize = 3;
pub const DEFAULT_TOL: f64 = 1e-8;
/// Hole resolution `ε / h_near` when a job does not set it.
pub const DEFAULT_NEAR_DIVISOR: f64 = 8.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FemJob {
    pub domain: String,
    #[serde(default)]
    pub params: serde_json::Value,
    pub h: f64,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_k() -> usize {
    DEFAULT_K
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CapParams {
    theta: AngleSpec,
    off: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PuncturedParams {
    theta: AngleSpec,
    t: AngleSpec,
    lambda: f64,
    eps: f64,
    near_divisor: Option<f64>,
    off: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HelmetParams {
    theta: AngleSpec,
    eps: f64,
    h_strip: Option<f64>,
    off: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SphereHoleParams {
    lambda: f64,
    eps: f64,
    near_divisor: Option<f64>,
    off: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FitParams {
    theta: AngleSpec,
    t: AngleSpec,
    lambda: f64,
    eps: Vec<f64>,
    near_divisor: Option<f64>,
    #[serde(default)]
    richardson: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepParams {
    eps: f64,
    thetas: Option<Vec<AngleSpec>>,
}

/// What a job produced.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JobOutput {
    Spectrum { row: SpectrumRow, spectrum: SpectrumResult },
    Fit(SlopeFit),
    Sweep(HelmetSweep),
}

impl FemJob {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions { tol: self.tol, seed: self.seed.unwrap_or(DEFAULT_SEED), max_iterations: MAX_ITERATIONS }
    }

    fn params<T: DeserializeOwned>(&self) -> Result<T> {
        let v = if self.params.is_null() { serde_json::json!({}) } else { self.params.clone() };
        serde_json::from_value(v).map_err(|e| Error::Parse(format!("params for domain '{}': {e}", self.domain)))
    }

    pub fn run(&self) -> Result<JobOutput> {
        if !(self.tol > 0.0) || self.k < 1 {
            return Err(Error::Domain(format!("need k ≥ 1 and tol > 0 (k = {}, tol = {})", self.k, self.tol)));
        }
        let opts = self.solver_options();
        let count = self.k.max(3);
        let spectrum = |mesh: SurfaceMesh, theta: f64, eps: f64, off: Option<PathBuf>| -> Result<JobOutput> {
            if let Some(path) = off {
                std::fs::write(path, mesh.to_off())?;
            }
            let spectrum = experiments::spectrum_of(&mesh, count, opts)?;
            Ok(JobOutput::Spectrum { row: SpectrumRow::new(theta, eps, &spectrum)?, spectrum })
        };
        match self.domain.as_str() {
            "cap" => {
                let p: CapParams = self.params()?;
                let theta = p.theta.resolve()?;
                spectrum(domains::mesh_cap(theta, self.h)?, theta, 0.0, p.off)
            }
            "punctured_cap" => {
                let p: PuncturedParams = self.params()?;
                let theta = p.theta.resolve()?;
                let t = resolve_t(&p.t, theta)?;
                let h_near = p.eps / p.near_divisor.unwrap_or(DEFAULT_NEAR_DIVISOR);
                let mesh = domains::mesh_punctured_cap(theta, t, p.lambda, p.eps, self.h, h_near)?;
                spectrum(mesh, theta, p.eps, p.off)
            }
            "helmet" => {
                let p: HelmetParams = self.params()?;
                let theta = p.theta.resolve()?;
                let h_strip = p.h_strip.unwrap_or_else(|| domains::default_strip_size(p.eps, self.h));
                spectrum(domains::mesh_helmet_with(theta, p.eps, self.h, h_strip)?, theta, p.eps, p.off)
            }
            "sphere_hole" => {
                let p: SphereHoleParams = self.params()?;
                let hole = hole_models::ellipse_from_lambda(p.lambda)?;
                let h_near = p.eps / p.near_divisor.unwrap_or(DEFAULT_NEAR_DIVISOR);
                spectrum(domains::mesh_sphere_with_hole(&hole, p.eps, self.h, h_near)?, PI, p.eps, p.off)
            }
            "eps2_fit" => {
                let p: FitParams = self.params()?;
                let theta = p.theta.resolve()?;
                let t = resolve_t(&p.t, theta)?;
                let policy = HPolicy {
                    h_far: self.h,
                    near_divisor: p.near_divisor.unwrap_or(DEFAULT_NEAR_DIVISOR),
                    richardson: p.richardson,
                };
                Ok(JobOutput::Fit(experiments::fit_eps2_slope(theta, t, p.lambda, &p.eps, policy, opts)?))
            }
            "helmet_sweep" => {
                let p: SweepParams = self.params()?;
                let thetas = match p.thetas {
                    Some(list) => list.iter().map(AngleSpec::resolve).collect::<Result<Vec<_>>>()?,
                    None => experiments::default_helmet_grid(),
                };
                Ok(JobOutput::Sweep(experiments::helmet_sweep(p.eps, &thetas, self.h, opts)?))
            }
            other => Err(Error::Parse(format!(
                "unknown domain '{other}' (cap, punctured_cap, helmet, sphere_hole, eps2_fit, helmet_sweep)"
            ))),
        }
    }
}

fn resolve_t(t: &AngleSpec, theta: f64) -> Result<f64> {
    match t.resolve_or_auto()? {
        Some(t) => Ok(t),
        None => cap_eigen::find_tmax(theta),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_rejected() {
        assert!(FemJob::from_json(r#"{"domain":"cap","params":{"theta":"0.5pi"},"h":0.1,"colour":1}"#).is_err());
        let job = FemJob::from_json(r#"{"domain":"cap","params":{"theta":"0.5pi","x":1},"h":0.1}"#).unwrap();
        assert!(matches!(job.run(), Err(Error::Parse(_))));
    }

    #[test]
    fn hemisphere_job() {
        let job = FemJob::from_json(r#"{"domain":"cap","params":{"theta":"0.5pi"},"h":0.1,"seed":7}"#).unwrap();
        match job.run().unwrap() {
            JobOutput::Spectrum { row, .. } => {
                assert!((row.mu[1] - 2.0).abs() < 0.05);
                assert_eq!(row.theta, 0.5 * PI);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
