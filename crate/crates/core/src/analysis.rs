//! Figures of merit: rectification, amplification and their filter boost.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baths::{BathLabel, BathSpec};
use crate::lindblad::{build_liouvillian, solve, LindbladError, SolverKind, SteadyStateResult};
use crate::models::{dress, Device, DressedModel, FilterPreset, ModelError, SystemParams};

/// Both currents below this magnitude count as no flow.
pub const ZERO_CURRENT: f64 = 1e-14;

/// Default finite-difference step relative to `T_B`.
pub const DEFAULT_REL_STEP: f64 = 1e-4;

/// Relative disagreement between `h` and `h/2` estimates that triggers Richardson extrapolation.
pub const RICHARDSON_TRIGGER: f64 = 1e-3;

/// Below this `|∂J_B/∂T_B|` the amplification factor is left undefined.
pub const MIN_BASE_SLOPE: f64 = 1e-16;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("unknown parameter {name:?} for this device (expected one of {allowed})")]
    UnknownParameter { name: String, allowed: String },
    #[error("invalid value {value} for {name}")]
    InvalidValue { name: String, value: f64 },
    #[error("grid must be strictly increasing")]
    Grid,
    #[error("rectification needs T_hot ≥ T_cold ≥ 0, got {hot} and {cold}")]
    Temperatures { hot: f64, cold: f64 },
    #[error("{0} requires a {1}")]
    WrongDevice(&'static str, &'static str),
    #[error(transparent)]
    Solver(#[from] LindbladError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A device, its bath spectra and the solver used for it.
///
/// `baths` hold the unfiltered spectra; `filter` masks the side-a baths at
/// solve time so that the windows follow parameter changes.
#[derive(Debug, Clone)]
pub struct HeatManager {
    pub system: SystemParams,
    pub device: Device,
    pub baths: Vec<BathSpec>,
    pub filter: FilterPreset,
    pub solver: SolverKind,
}

impl HeatManager {
    pub fn new(system: SystemParams, device: Device, baths: Vec<BathSpec>, filter: FilterPreset, solver: SolverKind) -> Self {
        Self {
            system,
            device,
            baths,
            filter,
            solver,
        }
    }

    pub fn model(&self) -> Result<DressedModel, AnalysisError> {
        Ok(dress(&self.system, self.device)?)
    }

    /// Bath specs with the filter masks applied.
    pub fn effective_baths(&self) -> Result<Vec<BathSpec>, AnalysisError> {
        self.baths
            .iter()
            .map(|b| {
                let density = self.filter.apply(&self.system, b.label, b.density.clone())?;
                Ok(BathSpec {
                    density,
                    ..b.clone()
                })
            })
            .collect()
    }

    pub fn temperature(&self, label: BathLabel) -> Option<f64> {
        self.baths.iter().find(|b| b.label == label).map(|b| b.temperature)
    }

    pub fn with_temperature(&self, label: BathLabel, t: f64) -> Self {
        let mut hm = self.clone();
        for b in &mut hm.baths {
            if b.label == label {
                b.temperature = t;
            }
        }
        hm
    }

    pub fn with_filter(&self, filter: FilterPreset) -> Self {
        Self { filter, ..self.clone() }
    }

    pub fn with_solver(&self, solver: SolverKind) -> Self {
        Self { solver, ..self.clone() }
    }

    /// Names accepted by [`HeatManager::set_parameter`].
    pub fn parameter_names(&self) -> Vec<String> {
        let mut v: Vec<String> = vec!["omega_a".into(), "omega_b".into(), "g".into()];
        v.extend(self.device.labels().iter().map(|l| format!("T_{l}")));
        v
    }

    /// Sets a model parameter (`omega_a`, `omega_b`, `g`) or a temperature (`T_L`, ...).
    pub fn set_parameter(&mut self, name: &str, value: f64) -> Result<(), AnalysisError> {
        if !value.is_finite() {
            return Err(AnalysisError::InvalidValue {
                name: name.into(),
                value,
            });
        }
        let key = match name {
            "omega_L" => "omega_a",
            "omega_R" => "omega_b",
            other => other,
        };
        match (&mut self.system, key) {
            (SystemParams::Qubits(p), "omega_a") => p.omega_a = value,
            (SystemParams::Qubits(p), "omega_b") => p.omega_b = value,
            (SystemParams::Qubits(p), "g") => p.g = value,
            (SystemParams::Oms(p), "omega_a") => p.omega_a = value,
            (SystemParams::Oms(p), "omega_b") => p.omega_b = value,
            (SystemParams::Oms(p), "g") => p.g = value,
            _ => {
                let label = key
                    .strip_prefix("T_")
                    .and_then(|l| l.parse::<BathLabel>().ok())
                    .filter(|l| self.device.labels().contains(l));
                match label {
                    Some(l) => {
                        if value < 0.0 {
                            return Err(AnalysisError::InvalidValue {
                                name: name.into(),
                                value,
                            });
                        }
                        *self = self.with_temperature(l, value);
                    }
                    None => {
                        return Err(AnalysisError::UnknownParameter {
                            name: name.into(),
                            allowed: self.parameter_names().join(", "),
                        })
                    }
                }
            }
        }
        Ok(())
    }

    pub fn with_parameter(&self, name: &str, value: f64) -> Result<Self, AnalysisError> {
        let mut hm = self.clone();
        hm.set_parameter(name, value)?;
        Ok(hm)
    }

    /// Steady state, rejecting oscillator states that reach the Fock cutoff.
    pub fn solve(&self) -> Result<SteadyStateResult, AnalysisError> {
        let model = self.model()?;
        let baths = self.effective_baths()?;
        let l = build_liouvillian(&model, &baths)?;
        let r = solve(&l, self.solver)?;
        model.check_cutoff(&r.rho)?;
        Ok(r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RectificationPoint {
    /// `J_R` with the left bath hot.
    pub forward: f64,
    /// `J_R` with the temperatures swapped.
    pub reverse: f64,
    pub r: f64,
    /// Same ratio from the `J_L` currents.
    pub r_left: f64,
}

impl RectificationPoint {
    /// Both assignments push heat the same way, so `R > 1`.
    pub fn anomalous(&self) -> bool {
        self.r > 1.0 + 1e-12
    }
}

/// `|J_f + J_r| / max(|J_f|, |J_r|)`, zero when both vanish.
pub fn rectification_ratio(forward: f64, reverse: f64) -> f64 {
    let den = forward.abs().max(reverse.abs());
    if den < ZERO_CURRENT {
        return 0.0;
    }
    (forward + reverse).abs() / den
}

/// Solves the diode with `(T_L, T_R) = (hot, cold)` and swapped.
pub fn rectification(hm: &HeatManager, t_hot: f64, t_cold: f64) -> Result<RectificationPoint, AnalysisError> {
    if hm.device != Device::Diode {
        return Err(AnalysisError::WrongDevice("rectification", "diode"));
    }
    if !(t_hot >= t_cold && t_cold >= 0.0) {
        return Err(AnalysisError::Temperatures { hot: t_hot, cold: t_cold });
    }
    let fwd = hm.with_temperature(BathLabel::L, t_hot).with_temperature(BathLabel::R, t_cold).solve()?;
    let rev = hm.with_temperature(BathLabel::L, t_cold).with_temperature(BathLabel::R, t_hot).solve()?;
    let (f, r) = (fwd.current(BathLabel::R), rev.current(BathLabel::R));
    Ok(RectificationPoint {
        forward: f,
        reverse: r,
        r: rectification_ratio(f, r),
        r_left: rectification_ratio(fwd.current(BathLabel::L), rev.current(BathLabel::L)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplificationPoint {
    pub t_b: f64,
    pub j_e: f64,
    pub j_c: f64,
    pub j_b: f64,
    /// `∂J_E/∂J_B`, `None` when `J_B` does not respond to `T_B`.
    pub alpha_e: Option<f64>,
    pub alpha_c: Option<f64>,
    /// `(∂J_E/∂T_B)⁻¹`.
    pub r_e: f64,
    /// `(∂J_C/∂T_B)⁻¹`.
    pub r_c: f64,
    pub ndtr: bool,
    /// Whether the derivative came from Richardson extrapolation.
    pub extrapolated: bool,
}

fn currents_ecb(hm: &HeatManager) -> Result<[f64; 3], AnalysisError> {
    let r = hm.solve()?;
    Ok([r.current(BathLabel::E), r.current(BathLabel::C), r.current(BathLabel::B)])
}

fn central(hm: &HeatManager, t_b: f64, h: f64) -> Result<[f64; 3], AnalysisError> {
    let up = currents_ecb(&hm.with_temperature(BathLabel::B, t_b + h))?;
    let dn = currents_ecb(&hm.with_temperature(BathLabel::B, t_b - h))?;
    Ok([0, 1, 2].map(|k| (up[k] - dn[k]) / (2.0 * h)))
}

/// `∂(J_E, J_C, J_B)/∂T_B` by central differences, extrapolated when the
/// step and half-step estimates disagree.
pub fn temperature_slopes(hm: &HeatManager, t_b: f64, rel_step: f64) -> Result<([f64; 3], bool), AnalysisError> {
    let h = rel_step * t_b;
    let d1 = central(hm, t_b, h)?;
    let d2 = central(hm, t_b, 0.5 * h)?;
    let disagree = (0..3).any(|k| {
        let scale = d2[k].abs().max(f64::MIN_POSITIVE);
        (d1[k] - d2[k]).abs() / scale > RICHARDSON_TRIGGER
    });
    if disagree {
        Ok(([0, 1, 2].map(|k| (4.0 * d2[k] - d1[k]) / 3.0), true))
    } else {
        Ok((d2, false))
    }
}

/// Currents, amplification factors and resistances at one base temperature.
pub fn amplification_point(hm: &HeatManager, t_b: f64, rel_step: f64) -> Result<AmplificationPoint, AnalysisError> {
    let hm = hm.with_temperature(BathLabel::B, t_b);
    let [j_e, j_c, j_b] = currents_ecb(&hm)?;
    let ([de, dc, db], extrapolated) = temperature_slopes(&hm, t_b, rel_step)?;
    let (alpha_e, alpha_c) = if db.abs() < MIN_BASE_SLOPE {
        (None, None)
    } else {
        (Some(de / db), Some(dc / db))
    };
    let (r_e, r_c) = (1.0 / de, 1.0 / dc);
    Ok(AmplificationPoint {
        t_b,
        j_e,
        j_c,
        j_b,
        alpha_e,
        alpha_c,
        r_e,
        r_c,
        ndtr: r_e * r_c < 0.0,
        extrapolated,
    })
}

/// Amplification factors and differential resistances over a `T_B` grid.
pub fn amplification_sweep(hm: &HeatManager, grid: &[f64], rel_step: f64) -> Result<Vec<AmplificationPoint>, AnalysisError> {
    if hm.device != Device::Transistor {
        return Err(AnalysisError::WrongDevice("amplification", "transistor"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) || grid.iter().any(|&t| !(t > 0.0)) {
        return Err(AnalysisError::Grid);
    }
    grid.par_iter().map(|&t| amplification_point(hm, t, rel_step)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoostMetric {
    /// Sweep `g`, compare `R` at the given temperatures.
    Rectification { t_hot: f64, t_cold: f64 },
    /// Sweep `T_B`, compare `α_E`.
    Amplification { rel_step: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoostRow {
    pub x: f64,
    pub filtered: f64,
    pub unfiltered: f64,
    pub ratio: f64,
    pub difference: f64,
}

#[derive(Debug, Clone)]
pub struct BoostReport {
    pub rows: Vec<BoostRow>,
    pub max_ratio: f64,
    pub max_difference: f64,
}

/// Point-by-point comparison of a filtered and an unfiltered device.
pub fn filter_boost_report(filtered: &HeatManager, unfiltered: &HeatManager, grid: &[f64], metric: BoostMetric) -> Result<BoostReport, AnalysisError> {
    let value = |hm: &HeatManager, x: f64| -> Result<f64, AnalysisError> {
        match metric {
            BoostMetric::Rectification { t_hot, t_cold } => Ok(rectification(&hm.with_parameter("g", x)?, t_hot, t_cold)?.r),
            BoostMetric::Amplification { rel_step } => {
                if hm.device != Device::Transistor {
                    return Err(AnalysisError::WrongDevice("amplification", "transistor"));
                }
                Ok(amplification_point(hm, x, rel_step)?.alpha_e.unwrap_or(f64::NAN))
            }
        }
    };
    let rows: Vec<BoostRow> = grid
        .par_iter()
        .map(|&x| {
            let f = value(filtered, x)?;
            let u = value(unfiltered, x)?;
            Ok(BoostRow {
                x,
                filtered: f,
                unfiltered: u,
                ratio: if f == u { 1.0 } else { f / u },
                difference: f - u,
            })
        })
        .collect::<Result<_, AnalysisError>>()?;
    let max_ratio = rows.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
    let max_difference = rows.iter().map(|r| r.difference).fold(f64::NEG_INFINITY, f64::max);
    Ok(BoostReport {
        rows,
        max_ratio,
        max_difference,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cancellation {
    /// `1 - |J_E + J_C| / max(|J_E|, |J_C|)`.
    pub value: f64,
    /// Set when both currents vanish; `value` is then 0.
    pub degenerate: bool,
}

/// How nearly the emitter and collector currents cancel.
pub fn cancellation_diagnostic(result: &SteadyStateResult) -> Cancellation {
    let (e, c) = (result.current(BathLabel::E), result.current(BathLabel::C));
    let den = e.abs().max(c.abs());
    if den < ZERO_CURRENT {
        return Cancellation {
            value: 0.0,
            degenerate: true,
        };
    }
    Cancellation {
        value: 1.0 - (e + c).abs() / den,
        degenerate: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baths::SpectralDensity;
    use crate::models::TwoQubitParams;
    use approx::assert_relative_eq;

    pub(crate) fn transistor(filter: FilterPreset, t_e: f64, t_c: f64, t_b: f64) -> HeatManager {
        let p = TwoQubitParams::new(1.0, 0.01, 0.005).unwrap();
        let baths = [(BathLabel::E, t_e), (BathLabel::C, t_c), (BathLabel::B, t_b)]
            .iter()
            .map(|&(l, t)| BathSpec::new(l, t, SpectralDensity::ohmic(0.001)).unwrap())
            .collect();
        HeatManager::new(SystemParams::Qubits(p), Device::Transistor, baths, filter, SolverKind::Full)
    }

    #[test]
    fn ratio_conventions() {
        assert_eq!(rectification_ratio(0.0, 0.0), 0.0);
        assert_eq!(rectification_ratio(1e-3, 0.0), 1.0);
        assert_eq!(rectification_ratio(1e-3, -1e-3), 0.0);
        assert!(rectification_ratio(1e-3, 1e-3) > 1.0);
    }

    #[test]
    fn ideal_mask_amplification() {
        let hm = transistor(FilterPreset::Fig4c, 1.0, 0.01, 0.1);
        let pts = amplification_sweep(&hm, &[0.05, 0.2], DEFAULT_REL_STEP).unwrap();
        let p = TwoQubitParams::new(1.0, 0.01, 0.005).unwrap();
        for pt in pts {
            assert_relative_eq!(pt.alpha_e.unwrap(), p.omega_minus() / p.big_omega(), max_relative = 1e-3);
            assert_relative_eq!(pt.alpha_c.unwrap(), -p.omega_a / p.big_omega(), max_relative = 1e-3);
            assert!((pt.alpha_e.unwrap() + pt.alpha_c.unwrap() + 1.0).abs() < 1e-6);
            assert!(pt.ndtr);
        }
    }

    #[test]
    fn cancellation_matches_gap_ratio() {
        let hm = transistor(FilterPreset::Fig4c, 1.0, 0.01, 0.1);
        let r = hm.solve().unwrap();
        let p = TwoQubitParams::new(1.0, 0.01, 0.005).unwrap();
        let d = cancellation_diagnostic(&r);
        assert_relative_eq!(d.value, 1.0 - p.big_omega() / p.omega_a, max_relative = 1e-9);
    }

    #[test]
    fn unknown_parameter_named() {
        let hm = transistor(FilterPreset::Fig4c, 1.0, 0.01, 0.1);
        assert!(matches!(hm.with_parameter("T_L", 1.0), Err(AnalysisError::UnknownParameter { .. })));
        assert_eq!(hm.with_parameter("T_B", 0.3).unwrap().temperature(BathLabel::B), Some(0.3));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn diode(kappa: f64, g: f64, filter: FilterPreset) -> HeatManager {
            let p = TwoQubitParams::new(1.0, 0.1, g).unwrap();
            let baths = [BathLabel::L, BathLabel::R]
                .iter()
                .map(|&l| BathSpec::new(l, 1.0, SpectralDensity::ohmic(kappa)).unwrap())
                .collect();
            HeatManager::new(SystemParams::Qubits(p), Device::Diode, baths, filter, SolverKind::Full)
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]
            #[test]
            fn rectification_ignores_overall_coupling(
                g in 0.01..0.5f64,
                t_hot in 0.5..4.0f64,
                t_cold in 0.05..0.5f64,
                scale in 0.1..10.0f64,
                masked in any::<bool>(),
            ) {
                let filter = if masked { FilterPreset::Fig2c } else { FilterPreset::Unfiltered };
                let a = rectification(&diode(1e-3, g, filter), t_hot, t_cold).unwrap();
                let b = rectification(&diode(1e-3 * scale, g, filter), t_hot, t_cold).unwrap();
                prop_assert!((a.r - b.r).abs() <= 1e-9 * a.r.abs().max(1e-3));
                prop_assert!((b.forward / a.forward / scale - 1.0).abs() <= 1e-8);
            }
        }
    }
}
