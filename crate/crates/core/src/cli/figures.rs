//! Built-in figure recipes.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use super::config::SolverChoice;
use super::sweep::{evaluate, failure_marker};
use super::table::{gnuplot, num, write_file, Table};
use super::CliError;
use crate::analysis::{amplification_point, HeatManager, DEFAULT_REL_STEP};
use crate::baths::{BathLabel, BathSpec, SpectralDensity};
use crate::lindblad::SolverKind;
use crate::models::{Device, FilterPreset, OmsParams, SystemParams, TwoQubitParams};

pub const KAPPA: f64 = 0.001;

/// Fock cutoff for oscillator series.
pub const OMS_N_MAX: usize = 6;

/// `Ω / ω_L` at or below this is flagged as the `ω_L ≫ Ω` regime.
pub const WEAK_GAP_RATIO: f64 = 0.2;

const UNITS: &str = "units: all system parameters are scaled with omega_L/2pi = 10 GHz (hbar = k_B = 1)";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Fig3a,
    Fig3b,
    Fig5,
    Fig8a,
    Fig8b,
    Fig9,
}

impl Figure {
    pub const ALL: [Figure; 6] = [Figure::Fig3a, Figure::Fig3b, Figure::Fig5, Figure::Fig8a, Figure::Fig8b, Figure::Fig9];

    pub fn id(self) -> &'static str {
        match self {
            Figure::Fig3a => "fig3a",
            Figure::Fig3b => "fig3b",
            Figure::Fig5 => "fig5",
            Figure::Fig8a => "fig8a",
            Figure::Fig8b => "fig8b",
            Figure::Fig9 => "fig9",
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Figure {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Figure::ALL
            .into_iter()
            .find(|f| f.id().eq_ignore_ascii_case(s))
            .ok_or_else(|| CliError::UnknownFigure(s.to_string()))
    }
}

/// A CSV and the plot scripts that read it.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub name: String,
    pub table: Table,
    pub scripts: Vec<(String, String)>,
}

impl Artifact {
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        let csv = dir.join(format!("{}.csv", self.name));
        self.table.write(&csv)?;
        let mut out = vec![csv];
        for (name, text) in &self.scripts {
            let p = dir.join(name);
            write_file(&p, text)?;
            out.push(p);
        }
        Ok(out)
    }
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn ohmic_baths(temps: &[(BathLabel, f64)]) -> Vec<BathSpec> {
    temps
        .iter()
        .map(|&(l, t)| BathSpec::new(l, t, SpectralDensity::ohmic(KAPPA)).expect("recipe temperatures are valid"))
        .collect()
}

/// Diode with `ω_L = 1`, `ω_R = 0.1`, `κ = 0.001`.
pub fn qubit_diode(g: f64, t_l: f64, t_r: f64, filter: FilterPreset, solver: SolverKind) -> HeatManager {
    let p = TwoQubitParams {
        omega_a: 1.0,
        omega_b: 0.1,
        g,
    };
    HeatManager::new(SystemParams::Qubits(p), Device::Diode, ohmic_baths(&[(BathLabel::L, t_l), (BathLabel::R, t_r)]), filter, solver)
}

/// Oscillator diode matched to [`qubit_diode`] at qubit coupling `g`.
pub fn oms_diode(g: f64, t_l: f64, t_r: f64, n_max: usize, filter: FilterPreset, solver: SolverKind) -> HeatManager {
    let p = OmsParams {
        omega_a: 1.0,
        omega_b: 0.1,
        g: 2.0 * g,
        n_max,
    };
    HeatManager::new(SystemParams::Oms(p), Device::Diode, ohmic_baths(&[(BathLabel::L, t_l), (BathLabel::R, t_r)]), filter, solver)
}

/// Transistor with `ω_a = 1`, `ω_b = 0.01`, `g = 0.005`, `κ = 0.001`.
pub fn qubit_transistor(t_e: f64, t_c: f64, t_b: f64, filter: FilterPreset, solver: SolverKind) -> HeatManager {
    let p = TwoQubitParams {
        omega_a: 1.0,
        omega_b: 0.01,
        g: 0.005,
    };
    let baths = ohmic_baths(&[(BathLabel::E, t_e), (BathLabel::C, t_c), (BathLabel::B, t_b)]);
    HeatManager::new(SystemParams::Qubits(p), Device::Transistor, baths, filter, solver)
}

fn r_cell(hm: &HeatManager, solver: SolverChoice) -> (String, String) {
    let e = evaluate(hm, solver);
    (num(e.values[3]), e.status)
}

fn diode_sweep(xname: &str, grid: &[f64], series: &[(&str, &(dyn Fn(f64) -> HeatManager + Sync))], solver: SolverChoice) -> Table {
    let mut header = vec![xname.to_string()];
    header.extend(series.iter().map(|(n, _)| format!("R_{n}")));
    header.extend(series.iter().map(|(n, _)| format!("status_{n}")));
    let mut t = Table::new(header);
    let rows: Vec<Vec<String>> = grid
        .par_iter()
        .map(|&x| {
            let cells: Vec<(String, String)> = series.iter().map(|(_, f)| r_cell(&f(x), solver)).collect();
            let mut r = vec![num(x)];
            r.extend(cells.iter().map(|c| c.0.clone()));
            r.extend(cells.iter().map(|c| c.1.clone()));
            r
        })
        .collect();
    for r in rows {
        t.push(r);
    }
    t
}

fn fig3a(solver: SolverChoice) -> Artifact {
    let s = solver.primary();
    let grid = linspace(0.01, 0.5, 30);
    let filtered = move |g| qubit_diode(g, 2.0, 0.2, FilterPreset::Fig2c, s);
    let unfiltered = move |g| qubit_diode(g, 2.0, 0.2, FilterPreset::Unfiltered, s);
    let mut t = diode_sweep("g", &grid, &[("filtered", &filtered), ("unfiltered", &unfiltered)], solver);
    t.header.push("weak_gap".into());
    for (row, &g) in t.rows.iter_mut().zip(&grid) {
        let p = TwoQubitParams {
            omega_a: 1.0,
            omega_b: 0.1,
            g,
        };
        row.push(u8::from(p.big_omega() <= WEAK_GAP_RATIO * p.omega_a).to_string());
    }
    t.comment("Rectification R vs coupling g, diode of coupled qubits");
    t.comment("omega_L=1, omega_R=0.1, kappa_L=kappa_R=0.001, T_L=2, T_R=0.2");
    t.comment("filtered: L bath hard-masked to omega_L and omega_L+Omega; R bath flat");
    t.comment(format!("weak_gap=1 marks Omega <= {WEAK_GAP_RATIO} omega_L"));
    t.comment(UNITS);
    let script = gnuplot("Rectification vs g", "fig3a.csv", "g", "R", &t.header, &["R_filtered", "R_unfiltered"], false);
    Artifact {
        name: "fig3a".into(),
        table: t,
        scripts: vec![("fig3a.gp".into(), script)],
    }
}

fn fig3b(solver: SolverChoice) -> Artifact {
    let s = solver.primary();
    let grid = linspace(0.1, 4.0, 40);
    let filtered = move |t| qubit_diode(0.35, t, 0.5, FilterPreset::Fig2c, s);
    let unfiltered = move |t| qubit_diode(0.35, t, 0.5, FilterPreset::Unfiltered, s);
    let mut t = diode_sweep("T_L", &grid, &[("filtered", &filtered), ("unfiltered", &unfiltered)], solver);
    t.comment("Rectification R vs left bath temperature, diode of coupled qubits");
    t.comment("omega_L=1, omega_R=0.1, kappa_L=kappa_R=0.001, g=0.35, T_R=0.5");
    t.comment(UNITS);
    let script = gnuplot("Rectification vs T_L", "fig3b.csv", "T_L", "R", &t.header, &["R_filtered", "R_unfiltered"], false);
    Artifact {
        name: "fig3b".into(),
        table: t,
        scripts: vec![("fig3b.gp".into(), script)],
    }
}

fn fig8(solver: SolverChoice, panel_a: bool) -> Artifact {
    let s = solver.primary();
    let (name, xname, grid) = if panel_a { ("fig8a", "g", linspace(0.01, 0.5, 30)) } else { ("fig8b", "T_L", linspace(0.1, 4.0, 40)) };
    let at = move |x: f64| if panel_a { (x, 2.0, 0.02) } else { (0.01, x, 1.0) };
    let tls = move |x| {
        let (g, tl, tr) = at(x);
        qubit_diode(g, tl, tr, FilterPreset::Fig2c, s)
    };
    let oms = move |x| {
        let (g, tl, tr) = at(x);
        oms_diode(g, tl, tr, OMS_N_MAX, FilterPreset::Fig2c, s)
    };
    let mut t = diode_sweep(xname, &grid, &[("tls", &tls), ("oms", &oms)], solver);
    t.comment(if panel_a { "Rectification R vs g, qubits and optomechanical analog" } else { "Rectification R vs T_L, qubits and optomechanical analog" });
    t.comment(if panel_a {
        "omega_L=1, omega_R=0.1, kappa_L=kappa_R=0.001, T_L=2, T_R=0.02"
    } else {
        "omega_L=1, omega_R=0.1, kappa_L=kappa_R=0.001, g=0.01, T_R=1"
    });
    t.comment(format!("oscillator coupling is 2g, Fock cutoff n_max={OMS_N_MAX}; status=cutoff marks points the cutoff cannot hold"));
    t.comment("L bath hard-masked; R bath flat");
    t.comment(UNITS);
    let script = gnuplot(&format!("Rectification vs {xname}"), &format!("{name}.csv"), xname, "R", &t.header, &["R_tls", "R_oms"], false);
    Artifact {
        name: name.into(),
        scripts: vec![(format!("{name}.gp"), script)],
        table: t,
    }
}

fn fig5(solver: SolverChoice) -> Artifact {
    let s = solver.primary();
    let grid = linspace(0.02, 0.5, 25);
    let series = [FilterPreset::Fig4c, FilterPreset::Fig6c, FilterPreset::Unfiltered];
    let mut header = vec!["T_B".to_string()];
    header.extend(series.iter().map(|f| format!("alpha_E_{f}")));
    header.extend(series.iter().map(|f| format!("status_{f}")));
    let mut t = Table::new(header);
    let rows: Vec<Vec<String>> = grid
        .par_iter()
        .map(|&tb| {
            let cells: Vec<(String, String)> = series
                .iter()
                .map(|&f| match amplification_point(&qubit_transistor(1.0, 0.01, tb, f, s), tb, DEFAULT_REL_STEP) {
                    Ok(p) => (p.alpha_e.map(num).unwrap_or_else(|| "nan".into()), "ok".to_string()),
                    Err(e) => ("nan".into(), failure_marker(&e).to_string()),
                })
                .collect();
            let mut r = vec![num(tb)];
            r.extend(cells.iter().map(|c| c.0.clone()));
            r.extend(cells.iter().map(|c| c.1.clone()));
            r
        })
        .collect();
    for r in rows {
        t.push(r);
    }
    t.comment("Amplification alpha_E vs base temperature, transistor of coupled qubits");
    t.comment("omega_a=1, omega_b=0.01, g=0.005, kappa_E=kappa_C=kappa_B=0.001, T_E=1, T_C=0.01");
    t.comment("fig4c: E sees omega_a-Omega, C sees omega_a; fig6c: E also sees omega_a; B flat");
    t.comment(format!("derivatives: central differences, step {DEFAULT_REL_STEP} T_B"));
    t.comment(UNITS);
    let cols: Vec<String> = series.iter().map(|f| format!("alpha_E_{f}")).collect();
    let cols: Vec<&str> = cols.iter().map(String::as_str).collect();
    let script = gnuplot("Amplification vs T_B", "fig5.csv", "T_B", "alpha_E", &t.header, &cols, false);
    Artifact {
        name: "fig5".into(),
        table: t,
        scripts: vec![("fig5.gp".into(), script)],
    }
}

fn fig9(solver: SolverChoice) -> Artifact {
    let s = solver.primary();
    let grid = linspace(0.02, 0.5, 25);
    let header = ["T_B", "J_E", "J_C", "J_B", "alpha_E", "alpha_C", "J_E_over_J_B", "J_C_over_J_B", "status"];
    let mut t = Table::new(header);
    let rows: Vec<Vec<String>> = grid
        .par_iter()
        .map(|&tb| match amplification_point(&qubit_transistor(1.1, 0.1, tb, FilterPreset::Fig4c, s), tb, DEFAULT_REL_STEP) {
            Ok(p) => vec![
                num(tb),
                num(p.j_e),
                num(p.j_c),
                num(p.j_b),
                num(p.alpha_e.unwrap_or(f64::NAN)),
                num(p.alpha_c.unwrap_or(f64::NAN)),
                num(p.j_e / p.j_b),
                num(p.j_c / p.j_b),
                "ok".into(),
            ],
            Err(e) => {
                let mut r = vec![num(tb)];
                r.extend(std::iter::repeat_n("nan".to_string(), 7));
                r.push(failure_marker(&e).into());
                r
            }
        })
        .collect();
    for r in rows {
        t.push(r);
    }
    t.comment("Transistor currents and amplification factors vs base temperature, coupled qubits");
    t.comment("omega_a=1, omega_b=0.01, g=0.005, kappa_C=kappa_E=kappa_B=0.001, T_E=1.1, T_C=0.1");
    t.comment("E and C hard-masked (fig4c); B flat");
    t.comment("sign: J > 0 is energy flowing from the bath into the device");
    t.comment(UNITS);
    let currents = gnuplot("Heat currents vs T_B", "fig9.csv", "T_B", "J", &t.header, &["J_E", "J_C", "J_B"], false);
    let alphas = gnuplot("Amplification vs T_B", "fig9.csv", "T_B", "alpha", &t.header, &["alpha_E", "alpha_C"], false);
    Artifact {
        name: "fig9".into(),
        table: t,
        scripts: vec![("fig9_currents.gp".into(), currents), ("fig9_alpha.gp".into(), alphas)],
    }
}

pub fn reproduce(figure: Figure, solver: SolverChoice) -> Artifact {
    match figure {
        Figure::Fig3a => fig3a(solver),
        Figure::Fig3b => fig3b(solver),
        Figure::Fig5 => fig5(solver),
        Figure::Fig8a => fig8(solver, true),
        Figure::Fig8b => fig8(solver, false),
        Figure::Fig9 => fig9(solver),
    }
}
