//! Optomechanical diode against its two-qubit counterpart at low bath
//! occupation. The oscillator coupling is twice the qubit one.

use qheat::baths::BathLabel;
use qheat::cli::figures::{oms_diode, qubit_diode};
use qheat::lindblad::SolverKind;
use qheat::models::FilterPreset;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (g, t_r) = (0.002, 0.02);
    for t_l in [0.15, 0.2, 0.25] {
        for filter in [FilterPreset::Unfiltered, FilterPreset::Fig2c] {
            let q = qubit_diode(g, t_l, t_r, filter, SolverKind::Full).solve()?;
            let o = oms_diode(g, t_l, t_r, 6, filter, SolverKind::Full).solve()?;
            let (jq, jo) = (q.current(BathLabel::R), o.current(BathLabel::R));
            println!("T_L={t_l:<5} {filter:<10} J_R qubits {jq:+.6e}  oscillator {jo:+.6e}  rel {:.3}", (jo / jq - 1.0).abs());
        }
    }
    Ok(())
}
