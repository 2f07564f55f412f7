//! Side-by-side filtered and unfiltered figures of merit over a sweep.

use qheat::analysis::{filter_boost_report, BoostMetric, DEFAULT_REL_STEP};
use qheat::cli::figures::{linspace, qubit_diode, qubit_transistor};
use qheat::lindblad::SolverKind;
use qheat::models::FilterPreset;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let filtered = qubit_diode(0.1, 2.0, 0.2, FilterPreset::Fig2c, SolverKind::Full);
    let bare = filtered.with_filter(FilterPreset::Unfiltered);
    let r = filter_boost_report(&filtered, &bare, &linspace(0.05, 0.5, 6), BoostMetric::Rectification { t_hot: 2.0, t_cold: 0.2 })?;
    println!("diode R over g");
    for row in &r.rows {
        println!("  g={:.3} filtered={:.5} bare={:.5} diff={:+.5}", row.x, row.filtered, row.unfiltered, row.difference);
    }
    println!("  max difference {:.5}", r.max_difference);

    let filtered = qubit_transistor(1.0, 0.01, 0.05, FilterPreset::Fig6c, SolverKind::Full);
    let bare = filtered.with_filter(FilterPreset::Unfiltered);
    let a = filter_boost_report(&filtered, &bare, &linspace(0.05, 0.5, 6), BoostMetric::Amplification { rel_step: DEFAULT_REL_STEP })?;
    println!("transistor alpha_E over T_B");
    for row in &a.rows {
        println!("  T_B={:.3} filtered={:.4} bare={:.4} ratio={:.3}", row.x, row.filtered, row.unfiltered, row.ratio);
    }
    Ok(())
}
