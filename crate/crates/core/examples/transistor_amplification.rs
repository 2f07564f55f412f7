//! Amplification factors of the heat transistor as the base temperature is
//! swept, plus the differential resistances behind the NDTR flag.

use qheat::analysis::{amplification_sweep, DEFAULT_REL_STEP};
use qheat::cli::figures::{linspace, qubit_transistor};
use qheat::lindblad::SolverKind;
use qheat::models::FilterPreset;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let hm = qubit_transistor(1.0, 0.01, 0.02, FilterPreset::Fig4c, SolverKind::Full);
    let grid = linspace(0.02, 0.5, 8);
    println!("{:>6} {:>12} {:>12} {:>12} {:>12} {:>5}", "T_B", "J_B", "alpha_E", "alpha_C", "R_E", "ndtr");
    for p in amplification_sweep(&hm, &grid, DEFAULT_REL_STEP)? {
        let a = |x: Option<f64>| x.map_or("undefined".into(), |v| format!("{v:.6}"));
        println!("{:>6.3} {:>12.4e} {:>12} {:>12} {:>12.4e} {:>5}", p.t_b, p.j_b, a(p.alpha_e), a(p.alpha_c), p.r_e, p.ndtr);
    }
    Ok(())
}
