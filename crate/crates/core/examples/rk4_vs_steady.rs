//! Time evolution from the maximally mixed state converging to the
//! direct steady-state solve.

use qheat::cli::figures::qubit_diode;
use qheat::lindblad::{build_liouvillian, default_t_final, evolve_rk4, max_step, SolverKind};
use qheat::matrixcore::CMatrix;
use qheat::models::FilterPreset;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let hm = qubit_diode(0.2, 2.0, 0.5, FilterPreset::Fig2c, SolverKind::Full);
    let l = build_liouvillian(&hm.model()?, &hm.effective_baths()?)?;
    let target = hm.solve()?.rho;
    let rho0 = CMatrix::identity(4).scale_real(0.25);
    let t_end = default_t_final(&l);
    for frac in [0.01, 0.1, 0.3, 1.0] {
        let rho = evolve_rk4(&l, &rho0, frac * t_end, max_step(&l))?;
        println!("t = {:>10.1}  max |rho(t) - rho_ss| = {:.3e}", frac * t_end, (&rho - &target).max_abs());
    }
    Ok(())
}
