use std::process::{Command, Output};

use capspec::perturbation::PerturbationCertificate;

fn capspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_capspec")).args(args).env_remove("CAPSPEC_THREADS").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn field(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
        .to_string()
}

#[test]
fn theta_line_is_in_units_of_pi() {
    let o = capspec(&["theta"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let v: f64 = field(&text, "Theta").strip_suffix("pi").unwrap().parse().unwrap();
    assert!(v > 0.70 && v < 0.71);
    let r = capspec(&["--radians", "theta"]);
    let rad: f64 = field(&stdout(&r), "Theta").parse().unwrap();
    assert!((rad / std::f64::consts::PI - v).abs() < 1e-12);
}

#[test]
fn certificate_round_trips_through_slope() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cert.json");
    let o = capspec(&["--format", "json", "--output", path.to_str().unwrap(), "certify", "--theta", "0.85pi"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let cert = PerturbationCertificate::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(cert.positive);
    let again = capspec(&["--format", "json", "slope", "--from", path.to_str().unwrap()]);
    assert!(again.status.success());
    let back = PerturbationCertificate::from_json(&stdout(&again)).unwrap();
    assert!((back.slope - cert.slope).abs() < 1e-12);
    assert_eq!((back.theta, back.t, back.lambda), (cert.theta, cert.t, cert.lambda));
}

#[test]
fn slope_accepts_auto_and_trailing_format() {
    let o = capspec(&["slope", "--theta", "0.8pi", "--t", "auto", "--lambda", "2", "--format", "json"]);
    assert!(o.status.success());
    let cert = PerturbationCertificate::from_json(&stdout(&o)).unwrap();
    assert!(cert.positive && cert.lambda == 2.0);
}

#[test]
fn outputs_are_deterministic() {
    for args in [
        &["--format", "csv", "helmet", "--sweep", "--asymptotic", "--from", "0.62", "--to", "0.9", "--step", "0.02"][..],
        &["--format", "json", "certify", "--theta", "0.9pi"][..],
        &["--format", "csv", "cap", "--theta", "3pi/4", "--profile"][..],
    ] {
        let a = capspec(args);
        let b = capspec(args);
        assert!(a.status.success(), "{args:?}: {}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn fem_job_is_deterministic_and_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let job = dir.path().join("job.json");
    std::fs::write(&job, r#"{"domain":"cap","params":{"theta":"0.5pi"},"h":0.1,"k":3,"seed":11}"#).unwrap();
    let a = capspec(&["--format", "json", "fem", "--job", job.to_str().unwrap()]);
    let b = capspec(&["--format", "json", "fem", "--job", job.to_str().unwrap()]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let csv = capspec(&["--format", "csv", "fem", "--job", job.to_str().unwrap()]);
    assert!(stdout(&csv).starts_with("theta,eps,h,mu0,mu1,mu2,mu3,residual\n"));

    std::fs::write(&job, r#"{"domain":"cap","params":{"theta":"0.5pi"},"h":0.1,"mesh":"fine"}"#).unwrap();
    assert_eq!(capspec(&["fem", "--job", job.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn exit_codes() {
    assert_eq!(capspec(&[]).status.code(), Some(1));
    assert_eq!(capspec(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(capspec(&["cap", "--theta", "zero"]).status.code(), Some(1));
    assert_eq!(capspec(&["cap", "--theta", "1.5"]).status.code(), Some(2));
    assert_eq!(capspec(&["slope", "--theta", "0.8", "--t", "0.9", "--lambda", "2"]).status.code(), Some(2));
    assert_eq!(capspec(&["sphere-hole", "--lambda", "0.5", "--eps", "0.1"]).status.code(), Some(2));
    assert_eq!(capspec(&["--plot", "x.svg", "theta"]).status.code(), Some(1));
    assert_eq!(capspec(&["fem", "--job", "/nonexistent/job.json"]).status.code(), Some(1));
    let help = capspec(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
}

#[test]
fn thread_cap_is_validated() {
    let run =
        |v: &str| Command::new(env!("CARGO_BIN_EXE_capspec")).arg("theta").env("CAPSPEC_THREADS", v).output().unwrap();
    assert!(run("1").status.success());
    assert_eq!(run("0").status.code(), Some(1));
    assert_eq!(run("many").status.code(), Some(1));
    assert_eq!(stdout(&run("1")), stdout(&capspec(&["theta"])));
}

#[test]
fn helmet_plot_is_svg() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("h.svg");
    let o = capspec(&["--plot", svg.to_str().unwrap(), "helmet", "--sweep", "--asymptotic"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg") && text.contains("width=\"800\" height=\"500\""));
}
