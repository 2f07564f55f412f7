//! Thermal baths: occupations, KMS rates and filtered coupling spectra.
//!
//! A bath is a temperature plus a [`SpectralDensity`] `κ(ω)` defined for
//! `ω > 0`. The rate for a transition of Bohr frequency `ω` follows detailed
//! balance:
//!
//! ```text
//! G(ω)  = κ(ω) (1 + n̄(ω))   ω > 0
//! G(-ω) = κ(ω) n̄(ω)
//! G(0)  = 0
//! ```

use std::cell::Cell;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute convergence target of the principal-value window shrinking.
pub const PV_WINDOW_TOL: f64 = 1e-8;

const QUAD_TOL: f64 = 1e-12;
const QUAD_MAX_DEPTH: u32 = 48;
const PV_MAX_HALVINGS: usize = 80;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BathError {
    #[error("frequency must be positive, got {0}")]
    NonPositiveFrequency(f64),
    #[error("temperature must be finite and non-negative, got {0}")]
    InvalidTemperature(f64),
    #[error("invalid spectral density: {0}")]
    InvalidDensity(String),
    #[error("principal-value integral diverges: {0}")]
    Divergent(String),
    #[error("quadrature did not converge: achieved {achieved:.3e}, requested {requested:.1e}")]
    Quadrature { achieved: f64, requested: f64 },
}

/// Bath identity. `L`/`R` for the diode, `E`/`C`/`B` for the transistor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BathLabel {
    L,
    R,
    E,
    C,
    B,
}

impl BathLabel {
    pub const ALL: [BathLabel; 5] = [BathLabel::L, BathLabel::R, BathLabel::E, BathLabel::C, BathLabel::B];

    pub fn as_str(self) -> &'static str {
        match self {
            BathLabel::L => "L",
            BathLabel::R => "R",
            BathLabel::E => "E",
            BathLabel::C => "C",
            BathLabel::B => "B",
        }
    }
}

impl fmt::Display for BathLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BathLabel {
    type Err = BathError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "L" | "l" => Ok(BathLabel::L),
            "R" | "r" => Ok(BathLabel::R),
            "E" | "e" => Ok(BathLabel::E),
            "C" | "c" => Ok(BathLabel::C),
            "B" | "b" => Ok(BathLabel::B),
            other => Err(BathError::InvalidDensity(format!("unknown bath label {other:?}"))),
        }
    }
}

/// `κ ω^p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerLaw {
    pub kappa: f64,
    #[serde(default = "default_exponent")]
    pub exponent: f64,
}

fn default_exponent() -> f64 {
    1.0
}

/// Regular Lorentzian filter response centred at `center` with width `πκ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LorentzianFilter {
    pub eta: f64,
    pub center: f64,
    pub kappa: f64,
}

/// Filter mode of frequency `center` in front of an `underlying` spectrum,
/// including the bath-induced shift. Zero outside `[cutoff_low, cutoff_high]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SkewFilter {
    pub eta: f64,
    pub center: f64,
    pub underlying: Box<SpectralDensity>,
    #[serde(default)]
    pub cutoff_low: f64,
    #[serde(default = "infinite")]
    pub cutoff_high: f64,
    /// When false the shift `Δ(ω)` is forced to zero.
    #[serde(default = "yes")]
    pub lamb_shift: bool,
}

fn infinite() -> f64 {
    f64::INFINITY
}

fn yes() -> bool {
    true
}

/// Closed frequency interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    /// `[center - half_width, center + half_width]`.
    pub fn around(center: f64, half_width: f64) -> Self {
        Self::new(center - half_width, center + half_width)
    }

    pub fn contains(&self, w: f64) -> bool {
        w >= self.lo && w <= self.hi
    }
}

/// Idealized filter: the base spectrum inside the windows, exactly zero elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HardMask {
    pub base: Box<SpectralDensity>,
    pub windows: Vec<Window>,
}

impl HardMask {
    pub fn new(base: SpectralDensity, mut windows: Vec<Window>) -> Result<Self, BathError> {
        windows.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let m = Self {
            base: Box::new(base),
            windows,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn allows(&self, w: f64) -> bool {
        self.windows.iter().any(|win| win.contains(w))
    }

    fn validate(&self) -> Result<(), BathError> {
        self.base.validate()?;
        for w in &self.windows {
            if w.lo.is_nan() || w.hi.is_nan() || w.lo > w.hi || w.lo < 0.0 {
                return Err(BathError::InvalidDensity(format!("bad window [{}, {}]", w.lo, w.hi)));
            }
        }
        let mut sorted = self.windows.clone();
        sorted.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        for pair in sorted.windows(2) {
            if pair[1].lo <= pair[0].hi {
                return Err(BathError::InvalidDensity(format!(
                    "windows [{}, {}] and [{}, {}] overlap",
                    pair[0].lo, pair[0].hi, pair[1].lo, pair[1].hi
                )));
            }
        }
        Ok(())
    }
}

/// Coupling spectrum `κ(ω)` of one bath, defined for `ω > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SpectralDensity {
    PowerLaw(PowerLaw),
    Lorentzian(LorentzianFilter),
    Skew(SkewFilter),
    HardMask(HardMask),
}

impl SpectralDensity {
    pub fn power_law(kappa: f64, exponent: f64) -> Self {
        SpectralDensity::PowerLaw(PowerLaw { kappa, exponent })
    }

    /// `κ ω`, the default ohmic-like density.
    pub fn ohmic(kappa: f64) -> Self {
        Self::power_law(kappa, 1.0)
    }

    pub fn flat(kappa: f64) -> Self {
        Self::power_law(kappa, 0.0)
    }

    pub fn masked(self, windows: Vec<Window>) -> Result<Self, BathError> {
        Ok(SpectralDensity::HardMask(HardMask::new(self, windows)?))
    }

    pub fn validate(&self) -> Result<(), BathError> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(BathError::InvalidDensity(format!("{name} must be positive and finite, got {v}")))
            }
        };
        match self {
            SpectralDensity::PowerLaw(p) => {
                positive("kappa", p.kappa)?;
                if !p.exponent.is_finite() {
                    return Err(BathError::InvalidDensity("exponent must be finite".into()));
                }
                Ok(())
            }
            SpectralDensity::Lorentzian(l) => {
                positive("eta", l.eta)?;
                positive("kappa", l.kappa)?;
                positive("center", l.center)
            }
            SpectralDensity::Skew(s) => {
                positive("eta", s.eta)?;
                positive("center", s.center)?;
                if s.cutoff_low.is_nan() || s.cutoff_high.is_nan() || s.cutoff_low >= s.cutoff_high {
                    return Err(BathError::InvalidDensity(format!(
                        "cutoff_low {} must be below cutoff_high {}",
                        s.cutoff_low, s.cutoff_high
                    )));
                }
                s.underlying.validate()
            }
            SpectralDensity::HardMask(m) => m.validate(),
        }
    }

    /// `κ(ω)` for `ω > 0`; zero for `ω ≤ 0`.
    pub fn coupling(&self, w: f64) -> Result<f64, BathError> {
        if !(w > 0.0) {
            return Ok(0.0);
        }
        let v = match self {
            SpectralDensity::PowerLaw(p) => p.kappa * w.powf(p.exponent),
            SpectralDensity::Lorentzian(l) => lorentzian_filtered(l.eta, l.kappa, l.center, w),
            SpectralDensity::Skew(s) => skew_filtered(s, w)?,
            SpectralDensity::HardMask(m) => {
                if m.allows(w) {
                    m.base.coupling(w)?
                } else {
                    0.0
                }
            }
        };
        Ok(v.max(0.0))
    }

    /// Interval outside which `κ` vanishes identically.
    fn support(&self) -> (f64, f64) {
        match self {
            SpectralDensity::PowerLaw(_) | SpectralDensity::Lorentzian(_) => (0.0, f64::INFINITY),
            SpectralDensity::Skew(s) => (s.cutoff_low.max(0.0), s.cutoff_high),
            SpectralDensity::HardMask(m) => {
                let (blo, bhi) = m.base.support();
                let lo = m.windows.iter().map(|w| w.lo).fold(f64::INFINITY, f64::min).max(blo);
                let hi = m.windows.iter().map(|w| w.hi).fold(0.0, f64::max).min(bhi);
                (lo, hi)
            }
        }
    }

    /// Frequencies where the integrand changes character (peaks, edges).
    fn breakpoints(&self) -> Vec<f64> {
        match self {
            SpectralDensity::PowerLaw(_) => vec![],
            SpectralDensity::Lorentzian(l) => {
                let w = PI * l.kappa;
                let mut v = vec![l.center];
                for k in [1.0, 10.0, 100.0] {
                    v.push(l.center - k * w);
                    v.push(l.center + k * w);
                }
                v
            }
            SpectralDensity::Skew(s) => {
                let mut v = vec![s.center, s.cutoff_low, s.cutoff_high];
                v.extend(s.underlying.breakpoints());
                v
            }
            SpectralDensity::HardMask(m) => {
                let mut v: Vec<f64> = m.windows.iter().flat_map(|w| [w.lo, w.hi]).collect();
                v.extend(m.base.breakpoints());
                v
            }
        }
    }

    fn is_zero(&self) -> bool {
        match self {
            SpectralDensity::HardMask(m) => m.windows.is_empty() || m.base.is_zero(),
            SpectralDensity::Skew(s) => s.underlying.is_zero(),
            _ => false,
        }
    }

    /// Whether `∫ κ(ω')/(ω - ω') dω'` converges on the support.
    fn integrable(&self) -> Result<(), BathError> {
        let (_, hi) = self.support();
        if hi.is_finite() || self.is_zero() {
            return Ok(());
        }
        match self {
            SpectralDensity::PowerLaw(p) => Err(BathError::Divergent(format!(
                "power law with exponent {} on an unbounded support; a finite cutoff is required",
                p.exponent
            ))),
            SpectralDensity::Lorentzian(_) => Ok(()),
            SpectralDensity::Skew(s) => s.underlying.integrable(),
            SpectralDensity::HardMask(m) => m.base.integrable(),
        }
    }
}

/// Temperature, coupling spectrum and identity of one reservoir.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathSpec {
    pub label: BathLabel,
    pub temperature: f64,
    pub density: SpectralDensity,
}

impl BathSpec {
    pub fn new(label: BathLabel, temperature: f64, density: SpectralDensity) -> Result<Self, BathError> {
        let b = Self {
            label,
            temperature,
            density,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<(), BathError> {
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(BathError::InvalidTemperature(self.temperature));
        }
        self.density.validate()
    }

    pub fn with_temperature(&self, temperature: f64) -> Self {
        Self {
            temperature,
            ..self.clone()
        }
    }
}

/// Bose occupation `1/(e^{ω/T} - 1)`.
pub fn occupation(temperature: f64, w: f64) -> Result<f64, BathError> {
    if !(w > 0.0) {
        return Err(BathError::NonPositiveFrequency(w));
    }
    if !(temperature >= 0.0 && temperature.is_finite()) {
        return Err(BathError::InvalidTemperature(temperature));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / (w / temperature).exp_m1())
}

/// Detailed-balance transition rate `G(ω)` of a bath.
pub fn kms_rate(b: &BathSpec, w: f64) -> Result<f64, BathError> {
    if w == 0.0 {
        return Ok(0.0);
    }
    let k = b.density.coupling(w.abs())?;
    if k == 0.0 {
        return Ok(0.0);
    }
    let n = occupation(b.temperature, w.abs())?;
    Ok(if w > 0.0 { k * (1.0 + n) } else { k * n })
}

/// `(η/π) κ² / ((ω - ω_c)² + (πκ)²)`.
pub fn lorentzian_filtered(eta: f64, kappa: f64, center: f64, w: f64) -> f64 {
    let d = w - center;
    eta / PI * kappa * kappa / (d * d + (PI * kappa).powi(2))
}

/// Filtered response `(η/π) πG / ((ω - ω̃ - Δ(ω))² + (πG)²)` with `G` the
/// underlying spectrum restricted to the cutoffs.
pub fn skew_filtered(f: &SkewFilter, w: f64) -> Result<f64, BathError> {
    if w < f.cutoff_low || w > f.cutoff_high || !(w > 0.0) {
        return Ok(0.0);
    }
    let g = f.underlying.coupling(w)?;
    if g == 0.0 {
        return Ok(0.0);
    }
    let shift = if f.lamb_shift {
        let lo = f.cutoff_low.max(0.0);
        pv_integral(|x| f.underlying.coupling(x), lo, f.cutoff_high, &f.underlying.breakpoints(), w)?
    } else {
        0.0
    };
    let d = w - (f.center + shift);
    let pg = PI * g;
    Ok(f.eta / PI * pg / (d * d + pg * pg))
}

/// Bath-induced shift `Δ(ω) = P ∫ κ(ω')/(ω - ω') dω'` over the support of `κ`.
pub fn lamb_shift(underlying: &SpectralDensity, w: f64) -> Result<f64, BathError> {
    if underlying.is_zero() {
        return Ok(0.0);
    }
    underlying.integrable()?;
    let (lo, hi) = underlying.support();
    if lo >= hi {
        return Ok(0.0);
    }
    pv_integral(|x| underlying.coupling(x), lo, hi, &underlying.breakpoints(), w)
}

/// Rate of a hard-masked bath at temperature `t`.
pub fn hard_mask_rate(m: &HardMask, t: f64, w: f64) -> Result<f64, BathError> {
    if !m.allows(w.abs()) {
        return Ok(0.0);
    }
    let base = BathSpec {
        label: BathLabel::L,
        temperature: t,
        density: (*m.base).clone(),
    };
    kms_rate(&base, w)
}

struct Quad {
    value: f64,
    error: f64,
}

fn simpson_step(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Quad {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let h = b - a;
    let left = h / 12.0 * (fa + 4.0 * flm + fm);
    let right = h / 12.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol || h < 1e-15 * a.abs().max(1.0) {
        return Quad {
            value: left + right + diff / 15.0,
            error: if depth == 0 { diff.abs() } else { 0.0 },
        };
    }
    let l = simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1);
    let r = simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
    Quad {
        value: l.value + r.value,
        error: l.error + r.error,
    }
}

/// Adaptive Simpson on a finite interval.
fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64, BathError> {
    if a >= b {
        return Ok(0.0);
    }
    // seed on a coarse grid so narrow features are not skipped
    let n = 8;
    let h = (b - a) / n as f64;
    let mut total = 0.0;
    let mut err = 0.0;
    for k in 0..n {
        let x0 = a + h * k as f64;
        let x1 = if k + 1 == n { b } else { x0 + h };
        let (f0, fm, f1) = (f(x0), f(0.5 * (x0 + x1)), f(x1));
        let whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
        let q = simpson_step(f, x0, x1, f0, fm, f1, whole, tol / n as f64, QUAD_MAX_DEPTH);
        total += q.value;
        err += q.error;
    }
    if !total.is_finite() || err > 1e3 * tol.max(PV_WINDOW_TOL * 1e-2) {
        return Err(BathError::Quadrature {
            achieved: if total.is_finite() { err } else { f64::INFINITY },
            requested: tol,
        });
    }
    Ok(total)
}

/// `∫_a^b f`, with `b` allowed to be infinite.
fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64, BathError> {
    if b.is_finite() {
        return adaptive_simpson(f, a, b, tol);
    }
    // ω' = a + t/(1-t)
    let g = |t: f64| {
        if t >= 1.0 {
            return 0.0;
        }
        let u = 1.0 - t;
        f(a + t / u) / (u * u)
    };
    adaptive_simpson(&g, 0.0, 1.0, tol)
}

fn split_points(lo: f64, hi: f64, breaks: &[f64]) -> Vec<f64> {
    let mut pts = vec![lo];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&b| b > lo && b < hi && b.is_finite()).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    pts.extend(inner);
    pts.push(hi);
    pts
}

fn integrate_pieces(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, breaks: &[f64]) -> Result<f64, BathError> {
    let pts = split_points(lo, hi, breaks);
    let mut total = 0.0;
    for pair in pts.windows(2) {
        total += integrate(f, pair[0], pair[1], QUAD_TOL)?;
    }
    Ok(total)
}

/// Principal value of `∫_lo^hi κ(x)/(w - x) dx`.
///
/// Away from the pole the integral is regular. The symmetric window
/// `[w - r, w + r]` is folded into `∫_0^r (κ(w-u) - κ(w+u))/u du` and
/// evaluated annulus by annulus while the window is halved, until an annulus
/// contributes less than [`PV_WINDOW_TOL`].
fn pv_integral(
    kappa: impl Fn(f64) -> Result<f64, BathError>,
    lo: f64,
    hi: f64,
    breaks: &[f64],
    w: f64,
) -> Result<f64, BathError> {
    let failure: Cell<Option<BathError>> = Cell::new(None);
    let k = |x: f64| match kappa(x) {
        Ok(v) => v,
        Err(e) => {
            failure.set(Some(e));
            0.0
        }
    };
    let check = |v: Result<f64, BathError>| -> Result<f64, BathError> {
        if let Some(e) = failure.take() {
            return Err(e);
        }
        v
    };

    if w <= lo || w >= hi {
        for edge in [lo, hi] {
            if edge == w && k(w) != 0.0 {
                return Err(BathError::Divergent(format!("pole at the support edge {w} with nonzero density")));
            }
        }
        let f = |x: f64| if x == w { 0.0 } else { k(x) / (w - x) };
        return check(integrate_pieces(&f, lo, hi, breaks));
    }

    let r = (w - lo).min(hi - w);
    let f = |x: f64| k(x) / (w - x);
    let mut total = 0.0;
    if w - r > lo {
        total += check(integrate_pieces(&f, lo, w - r, breaks))?;
    }
    if w + r < hi {
        total += check(integrate_pieces(&f, w + r, hi, breaks))?;
    }

    let h = |u: f64| if u == 0.0 { 0.0 } else { (k(w - u) - k(w + u)) / u };
    let folded: Vec<f64> = breaks.iter().map(|b| (b - w).abs()).collect();
    total += check(integrate_pieces(&h, 0.5 * r, r, &folded))?;
    let mut eps = 0.5 * r;
    for _ in 0..PV_MAX_HALVINGS {
        let piece = check(integrate_pieces(&h, 0.5 * eps, eps, &folded))?;
        total += piece;
        if piece.abs() < PV_WINDOW_TOL {
            return Ok(total);
        }
        eps *= 0.5;
    }
    Err(BathError::Quadrature {
        achieved: eps,
        requested: PV_WINDOW_TOL,
    })
}
