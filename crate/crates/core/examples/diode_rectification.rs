//! Rectification of the two-qubit heat diode versus coupling, with and
//! without the bath filters that block the L bath at `ω_a - Ω`.

use qheat::analysis::rectification;
use qheat::cli::figures::{linspace, qubit_diode};
use qheat::lindblad::SolverKind;
use qheat::models::FilterPreset;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (t_hot, t_cold) = (2.0, 0.2);
    println!("{:>8} {:>12} {:>12}", "g", "R filtered", "R bare");
    for g in linspace(0.05, 0.5, 10) {
        let f = rectification(&qubit_diode(g, t_hot, t_cold, FilterPreset::Fig2c, SolverKind::Full), t_hot, t_cold)?;
        let u = rectification(&qubit_diode(g, t_hot, t_cold, FilterPreset::Unfiltered, SolverKind::Full), t_hot, t_cold)?;
        println!("{g:>8.4} {:>12.6} {:>12.6}", f.r, u.r);
    }
    Ok(())
}
