//! Rate-equation currents next to the analytic expressions for the
//! filtered diode and the hot-emitter transistor.

use qheat::baths::BathLabel;
use qheat::cli::figures::KAPPA;
use qheat::lindblad::closed_form::{hd_gamma, ht_gamma_t, HtLimitInputs};
use qheat::lindblad::{hd_rate_equations, ht_rate_equations, HtVariant};
use qheat::models::{preset_baths, FilterPreset, SystemParams, TwoQubitParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // the diode form holds at ω_a = Ω
    let p = TwoQubitParams::new(1.0, 0.1, 0.99f64.sqrt() / 2.0)?;
    let sys = SystemParams::Qubits(p);
    let s2 = p.sin_theta().powi(2);
    for (tl, tr) in [(2.0, 0.2), (1.0, 0.5), (0.5, 0.4)] {
        let baths = preset_baths(&sys, FilterPreset::Fig2c, KAPPA, &[(BathLabel::L, tl), (BathLabel::R, tr)])?;
        let num = hd_rate_equations(&p, &baths)?.gamma;
        println!("diode T=({tl}, {tr}): Gamma {num:.10e} closed form {:.10e}", hd_gamma(KAPPA, p.big_omega(), s2, tl, tr));
    }

    let p = TwoQubitParams::new(1.0, 0.01, 0.005)?;
    let sys = SystemParams::Qubits(p);
    for t_b in [0.05, 0.2, 0.5] {
        let baths = preset_baths(&sys, FilterPreset::Fig4c, KAPPA, &[(BathLabel::E, 1e6), (BathLabel::C, 0.01), (BathLabel::B, t_b)])?;
        let num = ht_rate_equations(&p, &baths, HtVariant::Fig4c)?.gamma_t();
        let limit = ht_gamma_t(&HtLimitInputs::new(&p, KAPPA, 1e6, 0.01, t_b)?);
        println!("transistor T_B={t_b}: Gamma_T {num:.10e} hot-emitter limit {limit:.10e}");
    }
    Ok(())
}
