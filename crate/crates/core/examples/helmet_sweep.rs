//! FEM sweep of helmets against caps of equal area, written as CSV and SVG.
//!
//! `cargo run --release --example helmet_sweep -- 0.05 0.03 fig.svg`

use std::f64::consts::PI;

use capspec::fem::eigen::SolverOptions;
use capspec::fem::experiments::{default_helmet_grid, helmet_sweep};
use capspec::plot::{Plot, Series};

fn main() -> capspec::Result<()> {
    let mut args = std::env::args().skip(1);
    let eps: f64 = args.next().map_or(Ok(0.1), |a| a.parse()).expect("eps");
    let h: f64 = args.next().map_or(Ok(0.05), |a| a.parse()).expect("h");
    let svg = args.next();
    let grid: Vec<f64> = default_helmet_grid().into_iter().step_by(2).collect();
    let sweep = helmet_sweep(eps, &grid, h, SolverOptions::default())?;
    print!("{}", sweep.to_csv(PI));
    if let Some((a, b)) = sweep.interval {
        println!("# helmet wins on ({:.4}pi, {:.4}pi)", a / PI, b / PI);
    }
    if let Some(c) = sweep.corner {
        println!("# corner near {:.3}pi", c / PI);
    }
    if let Some(path) = svg {
        let plot = Plot {
            title: format!("mu_1 of helmets, eps = {eps}"),
            x_label: "theta / pi".into(),
            y_label: "mu_1".into(),
            series: vec![
                Series::new("cap", sweep.points.iter().map(|p| (p.theta / PI, p.mu_cap)).collect()),
                Series::new("helmet", sweep.points.iter().map(|p| (p.theta / PI, p.mu_helmet)).collect())
                    .with_markers(),
            ],
            guides: vec![],
        };
        std::fs::write(path, plot.to_svg())?;
    }
    Ok(())
}
