//! First-order helmet formulas: strip mode `ν₁`, cap and helmet slopes, and
//! where the helmet beats the area-matched cap.

use std::f64::consts::PI;

use capspec::helmet;

fn main() -> capspec::Result<()> {
    let grid: Vec<f64> = (55..=99).step_by(4).map(|k| k as f64 * 0.01 * PI).collect();
    print!("{}", helmet::to_csv(&helmet::helmet_table(&grid)?, PI));
    let (h, c) = helmet::helmet_mu1_asymptote(0.75 * PI, 0.05)?;
    println!("theta = 0.75pi, eps = 0.05: helmet {h:.6}, enlarged cap {c:.6}");
    Ok(())
}
