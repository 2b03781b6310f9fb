//! Leading-order behaviour of the four-hole slope just left of Θ with nearly
//! needle-shaped holes: `slope ≈ η g(Θ)² / sin²Θ` at `t = Θ − τ`, `λ = 1 + η`.

use capspec::perturbation;

fn main() -> capspec::Result<()> {
    println!("tau      eta          predicted      exact          ratio");
    for tau in [8e-3, 4e-3, 2e-3, 1e-3] {
        let e = perturbation::near_critical_expansion(tau)?;
        println!("{:.0e}   {:.6e}   {:.6e}   {:.6e}   {:.6}", e.tau, e.eta, e.predicted, e.exact, e.ratio);
    }
    Ok(())
}
