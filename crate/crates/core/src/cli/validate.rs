//! Named invariant and oracle checks.

use std::fmt;

use super::figures::{linspace, oms_diode, qubit_diode, qubit_transistor, KAPPA};
use super::CliError;
use crate::analysis::HeatManager;
use crate::baths::{kms_rate, BathError, BathLabel, BathSpec, SpectralDensity, Window};
use crate::lindblad::closed_form::{hd_gamma, ht_gamma_t, HtLimitInputs};
use crate::lindblad::{build_liouvillian, gibbs_populations, hd_rate_equations, ht_rate_equations, HtVariant, SolverKind};
use crate::matrixcore::{eigh, CMatrix};
use crate::models::{preset_baths, FilterPreset, SystemParams, TwoQubitParams};

/// Signature of the bath rate under test.
pub type RateFn = fn(&BathSpec, f64) -> Result<f64, BathError>;

pub const CHECKS: [&str; 9] = ["kms", "trace", "positivity", "energy", "gibbs", "closed-form-c", "closed-form-d", "rate-vs-full", "oms-isomorphism"];

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub measured: f64,
    pub allowed: f64,
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<16} measured {:.3e} allowed {:.3e}  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.allowed,
            self.detail
        )
    }
}

fn check(name: &'static str, measured: f64, allowed: f64, detail: impl Into<String>) -> CheckResult {
    CheckResult {
        name,
        passed: measured <= allowed,
        measured,
        allowed,
        detail: detail.into(),
    }
}

fn failed(name: &'static str, allowed: f64, e: impl fmt::Display) -> CheckResult {
    CheckResult {
        name,
        passed: false,
        measured: f64::NAN,
        allowed,
        detail: e.to_string(),
    }
}

/// Deterministic spread of devices used by the structural checks.
pub fn sample_devices() -> Vec<HeatManager> {
    let mut v = Vec::new();
    for &(g, tl, tr) in &[(0.05, 2.0, 0.2), (0.35, 2.0, 0.5), (0.2, 0.3, 1.5), (0.01, 0.1, 0.05)] {
        for f in [FilterPreset::Unfiltered, FilterPreset::Fig2c] {
            v.push(qubit_diode(g, tl, tr, f, SolverKind::Full));
        }
    }
    for &(te, tc, tb) in &[(1.0, 0.01, 0.1), (1.1, 0.1, 0.4), (0.5, 0.2, 0.03)] {
        for f in [FilterPreset::Unfiltered, FilterPreset::Fig4c, FilterPreset::Fig6c] {
            v.push(qubit_transistor(te, tc, tb, f, SolverKind::Full));
        }
    }
    v.push(oms_diode(0.002, 0.2, 0.02, 5, FilterPreset::Unfiltered, SolverKind::Full));
    v
}

fn kms_check(rate: RateFn) -> CheckResult {
    const ALLOWED: f64 = 1e-12;
    let densities = [
        SpectralDensity::ohmic(KAPPA),
        SpectralDensity::power_law(KAPPA, 3.0),
        SpectralDensity::ohmic(KAPPA).masked(vec![Window::around(1.0, 0.05)]).expect("disjoint window"),
    ];
    let mut worst: (f64, String) = (0.0, String::new());
    for d in &densities {
        for &t in &[0.1, 0.5, 2.0] {
            let b = match BathSpec::new(BathLabel::L, t, d.clone()) {
                Ok(b) => b,
                Err(e) => return failed("kms", ALLOWED, e),
            };
            for &w in &[0.01, 0.1, 1.0, 1.02] {
                let (up, down) = match (rate(&b, -w), rate(&b, w)) {
                    (Ok(u), Ok(d)) => (u, d),
                    (Err(e), _) | (_, Err(e)) => return failed("kms", ALLOWED, e),
                };
                if down == 0.0 && up == 0.0 {
                    continue;
                }
                let expected = (w / t).exp();
                let dev = (down / up / expected - 1.0).abs();
                if !(dev <= worst.0) {
                    worst = (dev, format!("G(w)/G(-w) = {:.6e}, expected {expected:.6e} at w={w}, T={t}", down / up));
                }
            }
        }
    }
    let mut gen_dev: f64 = 0.0;
    for hm in sample_devices() {
        let l = hm.model().and_then(|m| Ok(build_liouvillian(&m, &hm.effective_baths()?)?));
        match l {
            Ok(l) => gen_dev = gen_dev.max(l.kms_deviation()),
            Err(e) => return failed("kms", ALLOWED, e),
        }
    }
    if gen_dev > worst.0 {
        worst = (gen_dev, "channel up/down rates of a sample device".into());
    }
    check("kms", worst.0, ALLOWED, worst.1)
}

fn structural(name: &'static str, allowed: f64, measure: impl Fn(&crate::lindblad::SteadyStateResult) -> f64) -> CheckResult {
    let mut worst = 0.0f64;
    for hm in sample_devices() {
        match hm.solve() {
            Ok(r) => {
                let m = measure(&r);
                if !(m <= worst) {
                    worst = m;
                }
            }
            Err(e) => return failed(name, allowed, e),
        }
    }
    check(name, worst, allowed, format!("{} sample devices", sample_devices().len()))
}

fn gibbs_check() -> CheckResult {
    const ALLOWED: f64 = 1e-10;
    let mut worst = 0.0f64;
    let mut devices = Vec::new();
    for &t in &[0.1, 0.5, 2.0] {
        devices.push(qubit_diode(0.35, t, t, FilterPreset::Unfiltered, SolverKind::Full));
        devices.push(qubit_diode(0.05, t, t, FilterPreset::Fig2c, SolverKind::Full));
        devices.push(qubit_transistor(t, t, t, FilterPreset::Fig6c, SolverKind::Full));
    }
    for hm in devices {
        let t = hm.baths[0].temperature;
        let (r, m) = match (hm.solve(), hm.model()) {
            (Ok(r), Ok(m)) => (r, m),
            (Err(e), _) | (_, Err(e)) => return failed("gibbs", ALLOWED, e),
        };
        let p = gibbs_populations(&m.energies, t);
        let gibbs = CMatrix::from_diagonal(&p);
        worst = worst.max((&r.rho - &gibbs).max_abs());
    }
    check("gibbs", worst, ALLOWED, "equal-temperature baths")
}

fn closed_form_c() -> CheckResult {
    const ALLOWED: f64 = 1e-10;
    let g = (1.0f64 - 0.01).sqrt() / 2.0;
    let p = TwoQubitParams {
        omega_a: 1.0,
        omega_b: 0.1,
        g,
    };
    let sys = SystemParams::Qubits(p);
    let mut worst = (0.0f64, String::new());
    for &(tl, tr) in &[(2.0, 0.2), (1.0, 0.5), (0.5, 0.4)] {
        let res = preset_baths(&sys, FilterPreset::Fig2c, KAPPA, &[(BathLabel::L, tl), (BathLabel::R, tr)])
            .map_err(crate::lindblad::LindbladError::from)
            .and_then(|b| hd_rate_equations(&p, &b));
        let r = match res {
            Ok(r) => r,
            Err(e) => return failed("closed-form-c", ALLOWED, e),
        };
        let expected = hd_gamma(KAPPA, p.big_omega(), p.sin_theta().powi(2), tl, tr);
        let dev = (r.gamma / expected - 1.0).abs();
        if !(dev <= worst.0) {
            worst = (dev, format!("Gamma = {:.12e} vs {expected:.12e} at T_L={tl}, T_R={tr}", r.gamma));
        }
    }
    check("closed-form-c", worst.0, ALLOWED, worst.1)
}

fn closed_form_d() -> CheckResult {
    const ALLOWED: f64 = 1e-6;
    let p = TwoQubitParams {
        omega_a: 1.0,
        omega_b: 0.01,
        g: 0.005,
    };
    let sys = SystemParams::Qubits(p);
    let (te, tc) = (1e6, 0.01);
    let mut worst = (0.0f64, String::new());
    for tb in linspace(0.02, 0.5, 20) {
        let res = preset_baths(&sys, FilterPreset::Fig4c, KAPPA, &[(BathLabel::E, te), (BathLabel::C, tc), (BathLabel::B, tb)])
            .map_err(crate::lindblad::LindbladError::from)
            .and_then(|b| ht_rate_equations(&p, &b, HtVariant::Fig4c));
        let inputs = HtLimitInputs::new(&p, KAPPA, te, tc, tb);
        let (r, inputs) = match (res, inputs) {
            (Ok(r), Ok(i)) => (r, i),
            (Err(e), _) => return failed("closed-form-d", ALLOWED, e),
            (_, Err(e)) => return failed("closed-form-d", ALLOWED, e),
        };
        let expected = ht_gamma_t(&inputs);
        let dev = (r.gamma_t() / expected - 1.0).abs();
        if !(dev <= worst.0) {
            worst = (dev, format!("Gamma_T = {:.12e} vs {expected:.12e} at T_B={tb:.4}, T_E=1e6", r.gamma_t()));
        }
    }
    check("closed-form-d", worst.0, ALLOWED, worst.1)
}

fn rate_vs_full() -> CheckResult {
    const ALLOWED: f64 = 1e-8;
    let mut devices = Vec::new();
    for &(g, tl, tr) in &[(0.05, 2.0, 0.2), (0.35, 2.0, 0.5), (0.2, 0.3, 1.5)] {
        devices.push(qubit_diode(g, tl, tr, FilterPreset::Fig2c, SolverKind::Full));
    }
    for &(te, tc, tb) in &[(1.0, 0.01, 0.1), (1.1, 0.1, 0.4)] {
        devices.push(qubit_transistor(te, tc, tb, FilterPreset::Fig4c, SolverKind::Full));
        devices.push(qubit_transistor(te, tc, tb, FilterPreset::Fig6c, SolverKind::Full));
    }
    let mut worst = 0.0f64;
    for hm in &devices {
        let (full, rate) = match (hm.solve(), hm.with_solver(SolverKind::Rate).solve()) {
            (Ok(f), Ok(r)) => (f, r),
            (Err(e), _) | (_, Err(e)) => return failed("rate-vs-full", ALLOWED, e),
        };
        let scale = full.max_current();
        for (l, j) in &full.currents {
            worst = worst.max((j - rate.current(*l)).abs() / scale);
        }
    }
    check("rate-vs-full", worst, ALLOWED, "relative to the largest current, hard-masked devices")
}

fn oms_isomorphism() -> CheckResult {
    const ALLOWED: f64 = 0.05;
    let mut worst = (0.0f64, String::new());
    for f in [FilterPreset::Unfiltered, FilterPreset::Fig2c] {
        let q = qubit_diode(0.002, 0.2, 0.02, f, SolverKind::Full).solve();
        let o = oms_diode(0.002, 0.2, 0.02, 6, f, SolverKind::Full).solve();
        let (q, o) = match (q, o) {
            (Ok(q), Ok(o)) => (q, o),
            (Err(e), _) | (_, Err(e)) => return failed("oms-isomorphism", ALLOWED, e),
        };
        let dev = (o.current(BathLabel::R) / q.current(BathLabel::R) - 1.0).abs();
        if !(dev <= worst.0) {
            worst = (dev, format!("J_R oscillator {:.6e} vs qubits {:.6e} ({f})", o.current(BathLabel::R), q.current(BathLabel::R)));
        }
    }
    check("oms-isomorphism", worst.0, ALLOWED, worst.1)
}

fn min_eigenvalue(rho: &CMatrix) -> f64 {
    eigh(&rho.hermitian_part())
        .map(|e| e.eigenvalues.first().copied().unwrap_or(0.0))
        .unwrap_or(f64::NEG_INFINITY)
}

pub fn run_one(name: &str, rate: RateFn) -> Result<CheckResult, CliError> {
    Ok(match name {
        "kms" => kms_check(rate),
        "trace" => structural("trace", 1e-12, |r| (r.rho.trace().re - 1.0).abs()),
        "positivity" => structural("positivity", 1e-10, |r| (-min_eigenvalue(&r.rho)).max(0.0)),
        "energy" => structural("energy", 1e-10, |r| {
            if r.max_current() == 0.0 {
                0.0
            } else {
                r.current_sum().abs() / r.max_current()
            }
        }),
        "gibbs" => gibbs_check(),
        "closed-form-c" => closed_form_c(),
        "closed-form-d" => closed_form_d(),
        "rate-vs-full" => rate_vs_full(),
        "oms-isomorphism" => oms_isomorphism(),
        other => return Err(CliError::UnknownCheck(other.to_string(), CHECKS.join(", "))),
    })
}

/// Runs `only` or every check, using `rate` wherever a bath rate is probed directly.
pub fn run_checks(only: Option<&str>, rate: RateFn) -> Result<Vec<CheckResult>, CliError> {
    match only {
        Some(n) => Ok(vec![run_one(n, rate)?]),
        None => CHECKS.iter().map(|n| run_one(n, rate)).collect(),
    }
}

pub fn run_default(only: Option<&str>) -> Result<Vec<CheckResult>, CliError> {
    run_checks(only, kms_rate)
}
