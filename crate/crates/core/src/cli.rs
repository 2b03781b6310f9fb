//! Command-line front end. Exit codes: 0 success, 1 usage, 2 domain, 3 convergence.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::cap_eigen::{self, sig15};
use crate::error::{Error, Result};
use crate::fem::experiments::{self, SPECTRA_HEADER};
use crate::fem::job::{FemJob, JobOutput};
use crate::fem::{self, eigen::SolverOptions};
use crate::helmet;
use crate::hole_models::{self, MatrixRecord};
use crate::perturbation::{self, PerturbationCertificate};
use crate::plot::{Plot, Series};
use crate::units::{angle_unit, format_angle, parse_angle};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_CONVERGENCE: i32 = 3;

pub const THREADS_ENV: &str = "CAPSPEC_THREADS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "capspec", version, about = "Neumann eigenvalues of spherical caps, holes and helmets")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Read and print angles in radians instead of multiples of π.
    #[arg(long, global = true)]
    pub radians: bool,
    /// Write the result to a file instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Write an SVG plot (cap, delta-scan, helmet).
    #[arg(long, global = true)]
    pub plot: Option<PathBuf>,
    /// Seed for FEM starting blocks.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Critical apertures Θ, Θ′ and Θ″.
    Theta,
    /// First Neumann eigenvalue and radial profile of a cap.
    Cap {
        /// Aperture, e.g. `0.8pi`, `3pi/4` or `0.8` (multiples of π).
        #[arg(long, allow_hyphen_values = true)]
        theta: String,
        /// Print the normalized profile `t,g,gprime` instead of the summary.
        #[arg(long)]
        profile: bool,
    },
    /// Four-hole slope at a given latitude and ellipse parameter.
    Slope {
        /// Cap aperture.
        #[arg(long, allow_hyphen_values = true, required_unless_present = "from")]
        theta: Option<String>,
        /// Hole latitude or `auto` for the hot spot.
        #[arg(long, default_value = "auto")]
        t: String,
        /// Ellipse parameter λ > 1 or `auto` for grid selection.
        #[arg(long, default_value = "auto")]
        lambda: String,
        /// Take θ, t and λ from a certificate written by `certify --format json`.
        #[arg(long, conflicts_with = "theta")]
        from: Option<PathBuf>,
    },
    /// Best positive four-hole certificate for a cap.
    Certify {
        /// Cap aperture.
        #[arg(long, allow_hyphen_values = true)]
        theta: String,
    },
    /// Scan left of Θ for the largest δ with positive certificates.
    DeltaScan {
        /// Grid spacing, e.g. `0.001pi`.
        #[arg(long)]
        step: String,
    },
    /// Helmet asymptotics at one aperture, or a sweep of apertures.
    Helmet {
        /// Single aperture for the first-order report.
        #[arg(long, allow_hyphen_values = true, conflicts_with = "sweep", required_unless_present = "sweep")]
        theta: Option<String>,
        /// Sweep apertures `--from..=--to` by `--step`.
        #[arg(long)]
        sweep: bool,
        /// Strip half-width for sweeps.
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
        /// Sweep the first-order formulas instead of running FEM.
        #[arg(long)]
        asymptotic: bool,
        /// FEM mesh size for sweeps.
        #[arg(long, default_value_t = 0.03)]
        h: f64,
        /// First sweep aperture.
        #[arg(long, default_value = "0.55pi")]
        from: String,
        /// Last sweep aperture.
        #[arg(long, default_value = "0.95pi")]
        to: String,
        /// Sweep spacing.
        #[arg(long, default_value = "0.01pi")]
        step: String,
    },
    /// Sphere with one elliptical hole: closed forms, matrix route and optional FEM.
    SphereHole {
        /// Ellipse parameter λ > 1; large values approach the disk.
        #[arg(long)]
        lambda: f64,
        /// Hole scale ε.
        #[arg(long)]
        eps: f64,
        /// Also compute μ₁..μ₃ by FEM.
        #[arg(long)]
        fem: bool,
        /// FEM mesh size away from the hole.
        #[arg(long, default_value_t = 0.05)]
        h: f64,
        /// FEM hole resolution `ε / h_near`.
        #[arg(long, default_value_t = 8.0)]
        near_divisor: f64,
    },
    /// Run a FEM job file `{domain, params, h, k, tol, seed}`.
    Fem {
        /// Path of the JSON job file.
        #[arg(long)]
        job: PathBuf,
    },
    /// Exterior Neumann oracle for the ellipse `ω_λ` against the closed form.
    Oracle {
        /// Ellipse parameter λ > 1.
        #[arg(long)]
        lambda: f64,
        /// Multipole coefficients kept per component.
        #[arg(long, default_value_t = hole_models::DEFAULT_MODES)]
        modes: usize,
        /// Boundary nodes.
        #[arg(long, default_value_t = hole_models::DEFAULT_COLLOC)]
        colloc: usize,
    },
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Convergence(_) | Error::Integration { .. } | Error::IllConditioned { .. } | Error::Bracketing { .. } => {
            EXIT_CONVERGENCE
        }
        Error::Domain(_) | Error::Geometry(_) | Error::Dimension(_) | Error::Resource(_) => EXIT_DOMAIN,
        Error::Parse(_) | Error::Io(_) | Error::Json(_) => EXIT_USAGE,
    }
}

/// Parses `argv` (program name first) and runs it against the process stdout.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(argv: I, out: &mut dyn std::io::Write, err: &mut dyn std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    if let Err(msg) = configure_threads() {
        let _ = writeln!(err, "error: {msg}");
        return EXIT_USAGE;
    }
    match execute(&cli) {
        Ok(Rendered { body, svg }) => {
            if let (Some(path), Some(svg)) = (&cli.plot, svg) {
                if let Err(e) = std::fs::write(path, svg) {
                    let _ = writeln!(err, "error: cannot write plot: {e}");
                    return EXIT_USAGE;
                }
            } else if cli.plot.is_some() {
                let _ = writeln!(err, "error: --plot is not available for this command");
                return EXIT_USAGE;
            }
            let written = match &cli.output {
                Some(path) => std::fs::write(path, &body),
                None => out.write_all(body.as_bytes()),
            };
            match written {
                Ok(()) => EXIT_OK,
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    EXIT_USAGE
                }
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Applies `CAPSPEC_THREADS` to the global pool (first call wins).
pub fn configure_threads() -> std::result::Result<(), String> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value.trim().parse().map_err(|_| format!("{THREADS_ENV}='{value}' is not a thread count"))?;
    if n == 0 {
        return Err(format!("{THREADS_ENV} must be at least 1"));
    }
    // A pool built earlier in the same process keeps its size.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

struct Rendered {
    body: String,
    svg: Option<String>,
}

impl Rendered {
    fn text(body: String) -> Self {
        Rendered { body, svg: None }
    }
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("plain data serializes");
    s.push('\n');
    s
}

fn kv(out: &mut String, key: &str, value: impl std::fmt::Display) {
    let _ = writeln!(out, "{key}={value}");
}

fn execute(cli: &Cli) -> Result<Rendered> {
    let rad = cli.radians;
    let angle = |s: &str| parse_angle(s, rad);
    let unit = angle_unit(rad);
    match &cli.command {
        Command::Theta => {
            let crit = cap_eigen::find_critical_aperture()?;
            let prime = cap_eigen::find_strip_aperture()?;
            let dprime = helmet::find_theta_doubleprime()?;
            Ok(Rendered::text(match cli.format {
                Format::Text => {
                    let mut o = String::new();
                    kv(&mut o, "Theta", format_angle(crit, rad));
                    kv(&mut o, "Theta_prime", format_angle(prime, rad));
                    kv(&mut o, "Theta_doubleprime", dprime.map_or("none".into(), |v| format_angle(v, rad)));
                    o
                }
                Format::Csv => format!(
                    "quantity,value\nTheta,{}\nTheta_prime,{}\nTheta_doubleprime,{}\n",
                    sig15(crit / unit),
                    sig15(prime / unit),
                    dprime.map_or(String::new(), |v| sig15(v / unit))
                ),
                Format::Json => json(&serde_json::json!({
                    "theta_crit": crit,
                    "theta_prime": prime,
                    "theta_doubleprime": dprime,
                })),
            }))
        }
        Command::Cap { theta, profile } => {
            let theta = angle(theta)?;
            let cap = cap_eigen::normalized_profile(theta)?;
            let crit = cap_eigen::find_critical_aperture()?;
            let t_max = if theta > crit { Some(cap_eigen::find_tmax_in(&cap)?) } else { None };
            let indicator = cap.mu1 * theta.sin().powi(2) - 1.0;
            let svg = cli.plot.as_ref().map(|_| {
                Plot {
                    title: format!("radial profile, theta = {}", format_angle(theta, rad)),
                    x_label: if rad { "t".into() } else { "t / pi".into() },
                    y_label: "g(t)".into(),
                    series: vec![Series::new("g", cap.grid.iter().map(|s| (s.t / unit, s.g)).collect())],
                    guides: t_max.map(|t| vec![(t / unit, "t_max".to_string())]).unwrap_or_default(),
                }
                .to_svg()
            });
            let body = if *profile {
                match cli.format {
                    Format::Json => json(&cap),
                    _ => cap.to_csv(),
                }
            } else {
                match cli.format {
                    Format::Text => {
                        let mut o = String::new();
                        kv(&mut o, "theta", format_angle(theta, rad));
                        kv(&mut o, "mu1", sig15(cap.mu1));
                        kv(&mut o, "g_boundary", sig15(cap.g_boundary()));
                        kv(&mut o, "indicator", sig15(indicator));
                        kv(&mut o, "t_max", t_max.map_or("none".into(), |t| format_angle(t, rad)));
                        o
                    }
                    Format::Csv => format!(
                        "theta,mu1,g_boundary,indicator,t_max\n{},{},{},{},{}\n",
                        sig15(theta / unit),
                        sig15(cap.mu1),
                        sig15(cap.g_boundary()),
                        sig15(indicator),
                        t_max.map_or(String::new(), |t| sig15(t / unit))
                    ),
                    Format::Json => json(&serde_json::json!({
                        "theta": theta,
                        "mu1": cap.mu1,
                        "g_boundary": cap.g_boundary(),
                        "indicator": indicator,
                        "t_max": t_max,
                    })),
                }
            };
            Ok(Rendered { body, svg })
        }
        Command::Slope { theta, t, lambda, from } => {
            let cert = match from {
                Some(path) => {
                    let c = PerturbationCertificate::from_json(&std::fs::read_to_string(path)?)?;
                    perturbation::four_hole_slope(c.theta, c.t, c.lambda)?
                }
                None => {
                    let theta = angle(theta.as_deref().unwrap_or_default())?;
                    let cap = cap_eigen::normalized_profile(theta)?;
                    let t =
                        if t.trim().eq_ignore_ascii_case("auto") { cap_eigen::find_tmax_in(&cap)? } else { angle(t)? };
                    let lambda = if lambda.trim().eq_ignore_ascii_case("auto") {
                        perturbation::select_lambda(cap.mu1, t).ok_or_else(|| {
                            Error::Domain(format!("no grid λ makes the slope positive at t = {}", format_angle(t, rad)))
                        })?
                    } else {
                        lambda.trim().parse().map_err(|_| Error::Parse(format!("cannot read λ '{lambda}'")))?
                    };
                    perturbation::certificate_for(&cap, t, lambda)?
                }
            };
            Ok(Rendered::text(render_certificates(&[cert], cli.format, rad)))
        }
        Command::Certify { theta } => {
            let cert = perturbation::certify_counterexample(angle(theta)?)?;
            Ok(Rendered::text(render_certificates(&[cert], cli.format, rad)))
        }
        Command::DeltaScan { step } => {
            let scan = perturbation::delta_scan(angle(step)?)?;
            let svg = cli.plot.as_ref().map(|_| {
                Plot {
                    title: "best four-hole slope left of Theta".into(),
                    x_label: if rad { "theta".into() } else { "theta / pi".into() },
                    y_label: "slope".into(),
                    series: vec![Series::new(
                        "slope",
                        scan.certificates.iter().chain(&scan.failing).map(|c| (c.theta / unit, c.slope)).collect(),
                    )
                    .with_markers()],
                    guides: vec![],
                }
                .to_svg()
            });
            let body = match cli.format {
                Format::Text => {
                    let mut o = String::new();
                    kv(&mut o, "delta_max", format_angle(scan.delta_max, rad));
                    kv(&mut o, "certified", scan.certificates.len());
                    kv(
                        &mut o,
                        "first_failure",
                        scan.failing.as_ref().map_or("none".into(), |c| format_angle(c.theta, rad)),
                    );
                    o
                }
                Format::Csv => render_certificates(
                    &scan.certificates.iter().chain(&scan.failing).cloned().collect::<Vec<_>>(),
                    Format::Csv,
                    rad,
                ),
                Format::Json => json(&scan),
            };
            Ok(Rendered { body, svg })
        }
        Command::Helmet { theta: Some(theta), .. } => {
            let r = helmet::helmet_slopes(angle(theta)?)?;
            Ok(Rendered::text(match cli.format {
                Format::Text => {
                    let mut o = String::new();
                    kv(&mut o, "theta", format_angle(r.theta, rad));
                    kv(&mut o, "nu1", sig15(r.nu1));
                    kv(&mut o, "mu1", sig15(r.mu1));
                    kv(&mut o, "cap_slope", sig15(r.cap_slope));
                    kv(&mut o, "helmet_slope", sig15(r.helmet_slope));
                    kv(&mut o, "counterexample", r.counterexample);
                    kv(&mut o, "valid", r.valid);
                    kv(&mut o, "heuristic", r.heuristic);
                    o
                }
                Format::Csv => helmet::to_csv(&[r], unit),
                Format::Json => json(&r),
            }))
        }
        Command::Helmet { theta: None, eps, asymptotic, h, from, to, step, .. } => {
            let (a, b, s) = (angle(from)?, angle(to)?, angle(step)?);
            if !(s > 0.0 && b >= a) {
                return Err(Error::Domain("sweep needs from ≤ to and a positive step".into()));
            }
            let n = ((b - a) / s + 1e-9).floor() as usize;
            let grid: Vec<f64> = (0..=n).map(|k| a + k as f64 * s).collect();
            helmet_sweep(cli, &grid, *eps, *asymptotic, *h)
        }
        Command::SphereHole { lambda, eps, fem, h, near_divisor } => {
            let hole = hole_models::ellipse_from_lambda(*lambda)?;
            let closed = perturbation::sphere_single_hole(&hole, *eps)?;
            let (matrix, _) = perturbation::sphere_single_hole_matrix(&hole, *eps)?;
            let fem_mu = if *fem {
                let mesh = fem::domains::mesh_sphere_with_hole(&hole, *eps, *h, eps / near_divisor)?;
                let s = experiments::spectrum_of(&mesh, 3, solver(cli))?;
                Some([s.eigenvalues[1], s.eigenvalues[2], s.eigenvalues[3]])
            } else {
                None
            };
            let fem_sum = fem_mu.map(|m| m[0] + m[1]);
            Ok(Rendered::text(match cli.format {
                Format::Text => {
                    let mut o = String::new();
                    kv(&mut o, "cap", sig15(hole.cap));
                    kv(&mut o, "sum12", sig15(closed.sum12));
                    kv(&mut o, "mu3", sig15(closed.mu3));
                    kv(&mut o, "sum12_matrix", sig15(matrix.sum12));
                    kv(&mut o, "mu3_matrix", sig15(matrix.mu3));
                    if let Some(m) = fem_mu {
                        kv(&mut o, "fem_mu1", sig15(m[0]));
                        kv(&mut o, "fem_mu2", sig15(m[1]));
                        kv(&mut o, "fem_mu3", sig15(m[2]));
                    }
                    o
                }
                Format::Csv => format!(
                    "lambda,eps,cap,sum12,mu3,sum12_matrix,mu3_matrix,fem_sum12,fem_mu3\n{},{},{},{},{},{},{},{},{}\n",
                    sig15(*lambda),
                    sig15(*eps),
                    sig15(hole.cap),
                    sig15(closed.sum12),
                    sig15(closed.mu3),
                    sig15(matrix.sum12),
                    sig15(matrix.mu3),
                    fem_sum.map_or(String::new(), sig15),
                    fem_mu.map_or(String::new(), |m| sig15(m[2]))
                ),
                Format::Json => json(&serde_json::json!({
                    "lambda": lambda,
                    "eps": eps,
                    "cap": hole.cap,
                    "closed_form": closed,
                    "matrix_route": matrix,
                    "fem": fem_mu,
                })),
            }))
        }
        Command::Fem { job } => {
            let mut job = FemJob::from_json(&std::fs::read_to_string(job)?)?;
            if cli.seed.is_some() {
                job.seed = cli.seed;
            }
            let output = job.run()?;
            let svg = match (&output, &cli.plot) {
                (JobOutput::Sweep(s), Some(_)) => Some(sweep_plot(
                    s.eps,
                    &s.points.iter().map(|p| (p.theta, p.mu_cap, p.mu_helmet)).collect::<Vec<_>>(),
                    rad,
                )),
                _ => None,
            };
            let body = match cli.format {
                Format::Json => json(&output),
                Format::Text | Format::Csv => match &output {
                    JobOutput::Spectrum { row, .. } => format!("{SPECTRA_HEADER}\n{}\n", row.csv(unit)),
                    JobOutput::Fit(f) => {
                        let mut o = String::from("eps,delta,delta_over_eps2\n");
                        for s in &f.samples {
                            let _ = writeln!(o, "{:e},{:e},{:e}", s.eps, s.delta, s.delta / (s.eps * s.eps));
                        }
                        let _ = writeln!(
                            o,
                            "# slope={:e} analytic={:e} relative_error={:e}",
                            f.slope, f.analytic, f.relative_error
                        );
                        o
                    }
                    JobOutput::Sweep(s) => s.to_csv(unit),
                },
            };
            Ok(Rendered { body, svg })
        }
        Command::Oracle { lambda, modes, colloc } => {
            let hole = hole_models::ellipse_from_lambda(*lambda)?;
            let sol = hole_models::exterior_neumann_oracle(&hole.boundary(*colloc), *modes, *colloc)?;
            let est = MatrixRecord::from(sol.m_est);
            let closed = MatrixRecord::from(hole.m);
            let trace = est.m11 + est.m22;
            let target = 4.0 * PI * hole.cap * hole.cap;
            Ok(Rendered::text(match cli.format {
                Format::Text => {
                    let mut o = String::new();
                    kv(&mut o, "m11", sig15(est.m11));
                    kv(&mut o, "m12", sig15(est.m12));
                    kv(&mut o, "m22", sig15(est.m22));
                    kv(&mut o, "closed_m11", sig15(closed.m11));
                    kv(&mut o, "closed_m22", sig15(closed.m22));
                    kv(&mut o, "trace", sig15(trace));
                    kv(&mut o, "four_pi_cap2", sig15(target));
                    kv(&mut o, "residual", sig15(sol.residual));
                    kv(&mut o, "condition", sig15(sol.condition));
                    kv(&mut o, "converged", sol.converged);
                    o
                }
                Format::Csv => format!(
                    "lambda,m11,m12,m22,closed_m11,closed_m22,trace,four_pi_cap2,residual,condition\n{},{},{},{},{},{},{},{},{},{}\n",
                    sig15(*lambda),
                    sig15(est.m11),
                    sig15(est.m12),
                    sig15(est.m22),
                    sig15(closed.m11),
                    sig15(closed.m22),
                    sig15(trace),
                    sig15(target),
                    sig15(sol.residual),
                    sig15(sol.condition)
                ),
                Format::Json => json(&serde_json::json!({
                    "lambda": lambda,
                    "oracle": est,
                    "closed_form": closed,
                    "trace": trace,
                    "four_pi_cap2": target,
                    "residual": sol.residual,
                    "condition": sol.condition,
                    "converged": sol.converged,
                })),
            }))
        }
    }
}

fn solver(cli: &Cli) -> SolverOptions {
    let mut o = SolverOptions::default();
    if let Some(s) = cli.seed {
        o.seed = s;
    }
    o
}

fn render_certificates(certs: &[PerturbationCertificate], format: Format, rad: bool) -> String {
    match format {
        Format::Json if certs.len() == 1 => json(&certs[0]),
        Format::Json => json(&certs),
        Format::Csv => {
            let mut o = format!("{}\n", PerturbationCertificate::CSV_HEADER);
            for c in certs {
                let _ = writeln!(o, "{}", c.csv_row(angle_unit(rad)));
            }
            o
        }
        Format::Text => {
            let mut o = String::new();
            for c in certs {
                kv(&mut o, "theta", format_angle(c.theta, rad));
                kv(&mut o, "t", format_angle(c.t, rad));
                kv(&mut o, "lambda", sig15(c.lambda));
                kv(&mut o, "slope", sig15(c.slope));
                kv(&mut o, "positive", c.positive);
            }
            o
        }
    }
}

fn sweep_plot(eps: f64, rows: &[(f64, f64, f64)], rad: bool) -> String {
    let unit = angle_unit(rad);
    let mut guides = vec![];
    if let Ok(c) = cap_eigen::find_critical_aperture() {
        guides.push((c / unit, "Theta".to_string()));
    }
    if let Ok(p) = cap_eigen::find_strip_aperture() {
        guides.push((p / unit, "Theta'".to_string()));
    }
    Plot {
        title: format!("first Neumann eigenvalue, eps = {eps}"),
        x_label: if rad { "theta".into() } else { "theta / pi".into() },
        y_label: "mu_1".into(),
        series: vec![
            Series::new("cap (eps = 0)", rows.iter().map(|r| (r.0 / unit, r.1)).collect()),
            Series::new(format!("helmet eps = {eps}"), rows.iter().map(|r| (r.0 / unit, r.2)).collect()).with_markers(),
        ],
        guides,
    }
    .to_svg()
}

fn helmet_sweep(cli: &Cli, grid: &[f64], eps: f64, asymptotic: bool, h: f64) -> Result<Rendered> {
    let rad = cli.radians;
    let unit = angle_unit(rad);
    if asymptotic {
        let reports = helmet::helmet_table(grid)?;
        let rows: Vec<(f64, f64, f64)> =
            reports.iter().map(|r| (r.theta, r.mu1, r.mu1 + eps * (r.helmet_slope - r.cap_slope))).collect();
        let svg = cli.plot.as_ref().map(|_| sweep_plot(eps, &rows, rad));
        let body = match cli.format {
            Format::Json => json(&reports),
            _ => helmet::to_csv(&reports, unit),
        };
        return Ok(Rendered { body, svg });
    }
    let sweep = experiments::helmet_sweep(eps, grid, h, solver(cli))?;
    let rows: Vec<(f64, f64, f64)> = sweep.points.iter().map(|p| (p.theta, p.mu_cap, p.mu_helmet)).collect();
    let svg = cli.plot.as_ref().map(|_| sweep_plot(eps, &rows, rad));
    let body = match cli.format {
        Format::Json => json(&sweep),
        Format::Csv => sweep.to_csv(unit),
        Format::Text => {
            let mut o = String::new();
            match sweep.interval {
                Some((a, b)) => kv(&mut o, "interval", format!("{},{}", format_angle(a, rad), format_angle(b, rad))),
                None => kv(&mut o, "interval", "none"),
            }
            kv(&mut o, "corner", sweep.corner.map_or("none".into(), |c| format_angle(c, rad)));
            o.push_str(&sweep.to_csv(unit));
            o
        }
    };
    Ok(Rendered { body, svg })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_text(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let argv = std::iter::once("capspec").chain(args.iter().copied());
        let code = run_with(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn error_classes_map_to_exit_codes() {
        assert_eq!(exit_code(&Error::Domain("x".into())), EXIT_DOMAIN);
        assert_eq!(exit_code(&Error::Parse("x".into())), EXIT_USAGE);
        assert_eq!(exit_code(&Error::Convergence("x".into())), EXIT_CONVERGENCE);
    }

    #[test]
    fn cap_summary_in_pi_units() {
        let (code, out, _) = run_text(&["cap", "--theta", "pi/2"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("theta=0.500000000000000pi"));
        assert!(out.contains("mu1=2.0000000"));
    }

    #[test]
    fn domain_errors_go_to_stderr() {
        let (code, out, err) = run_text(&["certify", "--theta", "1.2pi"]);
        assert_eq!(code, EXIT_DOMAIN);
        assert!(out.is_empty() && err.starts_with("error:"));
    }
}
