//! Lists the heat-carrying transition cycles of the diode and shows which
//! ones the filters make one-way.

use qheat::cli::figures::qubit_diode;
use qheat::lindblad::SolverKind;
use qheat::models::FilterPreset;
use qheat::models::raman_cycle_audit;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for filter in [FilterPreset::Unfiltered, FilterPreset::Fig2c] {
        let hm = qubit_diode(0.1, 2.0, 0.2, filter, SolverKind::Full);
        let model = hm.model()?;
        let report = raman_cycle_audit(&model, &hm.effective_baths()?)?;
        println!("{filter}: {} cycles", report.cycles.len());
        for c in &report.cycles {
            let heat: Vec<String> = c.heat.iter().map(|(l, q)| format!("Q_{l}={q:+.4}")).collect();
            let kind = if c.unidirectional() { "one-way" } else { "two-way" };
            println!("  {:<8} {kind:<8} {}", c.label(&model), heat.join(" "));
        }
    }
    Ok(())
}
