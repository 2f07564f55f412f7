//! Point evaluation shared by `solve` and `sweep`.

use rayon::prelude::*;

use super::config::{RunConfig, SolverChoice};
use super::table::{num, opt, Table};
use super::CliError;
use crate::analysis::{amplification_point, rectification_ratio, AnalysisError, HeatManager, DEFAULT_REL_STEP};
use crate::baths::BathLabel;
use crate::lindblad::{LindbladError, SolverKind};
use crate::matrixcore::MatrixError;
use crate::models::{Device, ModelError};

/// Values at one configuration, in [`columns`] order.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub values: Vec<f64>,
    pub residual: f64,
    pub solver: SolverChoice,
    /// `ok` or a failure marker.
    pub status: String,
    /// Largest full/rate current gap relative to the largest current (`both` only).
    pub rate_gap: Option<f64>,
}

pub fn columns(device: Device) -> &'static [&'static str] {
    match device {
        Device::Diode => &["J_L", "J_R", "J_R_swapped", "R"],
        Device::Transistor => &["J_E", "J_C", "J_B", "alpha_E", "alpha_C", "R_E", "R_C", "ndtr"],
    }
}

/// Short marker for a failed point.
pub fn failure_marker(e: &AnalysisError) -> &'static str {
    match e {
        AnalysisError::Model(ModelError::CutoffInsufficient { .. }) | AnalysisError::Solver(LindbladError::Model(ModelError::CutoffInsufficient { .. })) => "cutoff",
        AnalysisError::Solver(LindbladError::CoherenceGenerating { .. }) => "coherent-channel",
        AnalysisError::Solver(LindbladError::Precondition(_)) => "precondition",
        AnalysisError::Solver(LindbladError::Matrix(MatrixError::DegenerateKernel { .. })) => "degenerate-kernel",
        AnalysisError::Solver(LindbladError::Residual { .. }) | AnalysisError::Solver(LindbladError::Matrix(_)) => "solver",
        _ => "error",
    }
}

fn swapped(hm: &HeatManager) -> HeatManager {
    let (l, r) = (hm.temperature(BathLabel::L).unwrap_or(0.0), hm.temperature(BathLabel::R).unwrap_or(0.0));
    hm.with_temperature(BathLabel::L, r).with_temperature(BathLabel::R, l)
}

fn evaluate_with(hm: &HeatManager) -> Result<(Vec<f64>, f64), AnalysisError> {
    match hm.device {
        Device::Diode => {
            let f = hm.solve()?;
            let r = swapped(hm).solve()?;
            let (jl, jr, jr_sw) = (f.current(BathLabel::L), f.current(BathLabel::R), r.current(BathLabel::R));
            Ok((vec![jl, jr, jr_sw, rectification_ratio(jr, jr_sw)], f.residual.max(r.residual)))
        }
        Device::Transistor => {
            let residual = hm.solve()?.residual;
            let t_b = hm.temperature(BathLabel::B).unwrap_or(0.0);
            let p = amplification_point(hm, t_b, DEFAULT_REL_STEP)?;
            let ndtr = if p.ndtr { 1.0 } else { 0.0 };
            Ok((vec![p.j_e, p.j_c, p.j_b, p.alpha_e.unwrap_or(f64::NAN), p.alpha_c.unwrap_or(f64::NAN), p.r_e, p.r_c, ndtr], residual))
        }
    }
}

pub fn evaluate(hm: &HeatManager, solver: SolverChoice) -> Evaluation {
    let n = columns(hm.device).len();
    let primary = evaluate_with(&hm.with_solver(solver.primary()));
    let (values, residual, mut status) = match primary {
        Ok((v, r)) => (v, r, "ok".to_string()),
        Err(e) => (vec![f64::NAN; n], f64::NAN, failure_marker(&e).to_string()),
    };
    let mut rate_gap = None;
    if solver == SolverChoice::Both && status == "ok" {
        match hm.with_solver(SolverKind::Rate).solve() {
            Ok(rate) => {
                let full = hm.with_solver(SolverKind::Full).solve();
                if let Ok(full) = full {
                    let scale = full.max_current().max(f64::MIN_POSITIVE);
                    let gap = full.currents.iter().map(|(l, j)| (j - rate.current(*l)).abs()).fold(0.0, f64::max);
                    rate_gap = Some(gap / scale);
                }
            }
            Err(e) => status = format!("rate-{}", failure_marker(&e)),
        }
    }
    Evaluation {
        values,
        residual,
        solver,
        status,
        rate_gap,
    }
}

pub fn header(device: Device, x: Option<&str>, both: bool) -> Vec<String> {
    let mut h: Vec<String> = x.into_iter().map(String::from).collect();
    h.extend(columns(device).iter().map(|c| c.to_string()));
    h.extend(["residual".to_string(), "solver".into(), "status".into()]);
    if both {
        h.push("rate_gap".into());
    }
    h
}

pub fn row(x: Option<f64>, e: &Evaluation) -> Vec<String> {
    let mut r: Vec<String> = x.into_iter().map(num).collect();
    r.extend(e.values.iter().map(|&v| num(v)));
    r.extend([num(e.residual), e.solver.to_string(), e.status.clone()]);
    if e.solver == SolverChoice::Both {
        r.push(opt(e.rate_gap));
    }
    r
}

/// Sweep over the configured axis; rows come back in grid order.
pub fn run_sweep(cfg: &RunConfig, solver: SolverChoice) -> Result<Table, CliError> {
    let axis = cfg.sweep.as_ref().ok_or_else(|| CliError::Config("missing section `sweep`".into()))?;
    let hm = cfg.manager(solver.primary())?;
    let grid = axis.grid();
    let points: Vec<HeatManager> = grid.iter().map(|&x| hm.with_parameter(&axis.parameter, x)).collect::<Result<_, _>>()?;
    let evals: Vec<Evaluation> = points.par_iter().map(|p| evaluate(p, solver)).collect();
    let mut t = Table::new(header(cfg.device(), Some(&axis.parameter), solver == SolverChoice::Both));
    t.comment("sign: J > 0 is energy flowing from the bath into the device");
    t.comment("config:");
    t.comment(toml::to_string(cfg).unwrap_or_default());
    for (x, e) in grid.iter().zip(&evals) {
        t.push(row(Some(*x), e));
    }
    Ok(t)
}
