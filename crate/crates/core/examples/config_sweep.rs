//! Builds a run configuration from TOML text and prints the sweep as CSV.

use qheat::cli::config::{RunConfig, SolverChoice};
use qheat::cli::sweep::run_sweep;

const CONFIG: &str = r#"
model = "hd-qubits"
filter = "fig2c"
solver = "both"

[params]
omega_L = 1.0
omega_R = 0.1
g = 0.35

[baths.L]
temperature = 2.0
kappa = 0.001

[baths.R]
temperature = 0.5
kappa = 0.001

[sweep]
parameter = "T_L"
start = 0.1
stop = 4.0
points = 6
scale = "log"
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg: RunConfig = CONFIG.parse()?;
    print!("{}", run_sweep(&cfg, SolverChoice::Both)?.render());
    Ok(())
}
