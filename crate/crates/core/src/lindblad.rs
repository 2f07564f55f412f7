//! Global master equation, steady states and heat currents.
//!
//! The generator is written in the interaction picture, so it contains only
//! the dissipators
//!
//! ```text
//! L(ρ) = Σ_ω G(ω) D[A_ω]ρ + G(-ω) D[A_ω†]ρ,   D[A]ρ = AρA† - ½{A†A, ρ}
//! ```
//!
//! The heat current of bath `α` is `J_α = Tr(L_α(ρ) H)`; `J_α > 0` means
//! energy flows from the bath into the system.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baths::{kms_rate, occupation, BathError, BathLabel, BathSpec};
use crate::matrixcore::{kron, solve_kernel_normalized, solve_nullspace_with_trace, CMatrix, MatrixError};
use crate::models::{dress_two_qubit, Device, DressedModel, ModelError, TwoQubitParams};

/// Largest dimension for which the full `d² x d²` generator is materialized.
pub const DENSE_LIMIT: usize = 16;

/// Relative residual accepted for a steady state.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Upper bound on explicit RK4 steps when no dense generator is available.
pub const MAX_EXPLICIT_STEPS: u64 = 5_000_000;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Error)]
pub enum LindbladError {
    #[error("no bath spec for label {0}")]
    MissingBath(BathLabel),
    #[error("time step {dt:.3e} exceeds 0.1 / max rate = {max:.3e}")]
    StepTooLarge { dt: f64, max: f64 },
    #[error("{steps} explicit steps requested, limit is {limit}")]
    TooManySteps { steps: u64, limit: u64 },
    #[error("invalid time span t_final = {0}")]
    InvalidTime(f64),
    #[error("channel of bath {bath} at ω = {frequency:.6} couples populations to coherences; use the full solver")]
    CoherenceGenerating { bath: BathLabel, frequency: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("steady state residual {residual:.3e} above {allowed:.3e}")]
    Residual { residual: f64, allowed: f64 },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Bath(#[from] BathError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Dissipation channel with its rates already evaluated.
#[derive(Debug, Clone)]
pub struct Channel {
    pub bath: BathLabel,
    pub frequency: f64,
    pub weight: f64,
    pub operator: CMatrix,
    /// `G(ω) · weight`, multiplies `D[A]`.
    pub down_rate: f64,
    /// `G(-ω) · weight`, multiplies `D[A†]`.
    pub up_rate: f64,
    pub temperature: f64,
    pairs: Vec<(usize, usize, f64)>,
}

impl Channel {
    /// `(upper, lower, amplitude)` entries of the jump operator.
    pub fn pairs(&self) -> &[(usize, usize, f64)] {
        &self.pairs
    }
}

/// Assembled master equation.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    pub dimension: usize,
    pub energies: Vec<f64>,
    pub channels: Vec<Channel>,
    generator: Option<CMatrix>,
    grouping_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Full,
    Rate,
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverKind::Full => "full",
            SolverKind::Rate => "rate",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SteadyStateResult {
    pub rho: CMatrix,
    pub currents: BTreeMap<BathLabel, f64>,
    /// `max |L(ρ)|`.
    pub residual: f64,
    pub solver: SolverKind,
}

impl SteadyStateResult {
    pub fn current(&self, label: BathLabel) -> f64 {
        self.currents.get(&label).copied().unwrap_or(0.0)
    }

    pub fn current_sum(&self) -> f64 {
        self.currents.values().sum()
    }

    pub fn max_current(&self) -> f64 {
        self.currents.values().map(|j| j.abs()).fold(0.0, f64::max)
    }

    pub fn populations(&self) -> Vec<f64> {
        self.rho.diagonal().iter().map(|z| z.re).collect()
    }
}

fn dissipator_superop(a: &CMatrix) -> CMatrix {
    let d = a.rows();
    let id = CMatrix::identity(d);
    let ada = &a.adjoint() * a;
    let mut s = kron(a, &a.conj());
    s.add_scaled(Complex64::new(-0.5, 0.0), &kron(&ada, &id));
    s.add_scaled(Complex64::new(-0.5, 0.0), &kron(&id, &ada.transpose()));
    s
}

fn dissipate(a: &CMatrix, rho: &CMatrix) -> CMatrix {
    let ad = a.adjoint();
    let ada = &ad * a;
    let mut out = &(a * rho) * &ad;
    let anti = &(&ada * rho) + &(rho * &ada);
    out.add_scaled(Complex64::new(-0.5, 0.0), &anti);
    out
}

impl Liouvillian {
    pub fn generator(&self) -> Option<&CMatrix> {
        self.generator.as_ref()
    }

    /// Vectorized generator, built on demand for any dimension.
    pub fn dense_generator(&self) -> CMatrix {
        if let Some(g) = &self.generator {
            return g.clone();
        }
        self.assemble_dense()
    }

    fn assemble_dense(&self) -> CMatrix {
        let d = self.dimension;
        let mut l = CMatrix::zeros(d * d, d * d);
        for ch in &self.channels {
            if ch.down_rate > 0.0 {
                l.add_scaled(Complex64::new(ch.down_rate, 0.0), &dissipator_superop(&ch.operator));
            }
            if ch.up_rate > 0.0 {
                l.add_scaled(Complex64::new(ch.up_rate, 0.0), &dissipator_superop(&ch.operator.adjoint()));
            }
        }
        l
    }

    /// `L_α(ρ)` for one bath.
    pub fn apply_bath(&self, label: BathLabel, rho: &CMatrix) -> CMatrix {
        let d = self.dimension;
        let mut out = CMatrix::zeros(d, d);
        for ch in self.channels.iter().filter(|c| c.bath == label) {
            if ch.down_rate > 0.0 {
                out.add_scaled(Complex64::new(ch.down_rate, 0.0), &dissipate(&ch.operator, rho));
            }
            if ch.up_rate > 0.0 {
                out.add_scaled(Complex64::new(ch.up_rate, 0.0), &dissipate(&ch.operator.adjoint(), rho));
            }
        }
        out
    }

    /// `L(ρ)`.
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let d = self.dimension;
        let mut out = CMatrix::zeros(d, d);
        for label in self.labels() {
            out.add_scaled(Complex64::new(1.0, 0.0), &self.apply_bath(label, rho));
        }
        out
    }

    pub fn labels(&self) -> Vec<BathLabel> {
        let mut v: Vec<BathLabel> = self.channels.iter().map(|c| c.bath).collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn max_rate(&self) -> f64 {
        self.channels.iter().map(|c| c.down_rate.max(c.up_rate)).fold(0.0, f64::max)
    }

    /// Smallest nonzero channel rate.
    pub fn min_rate(&self) -> f64 {
        self.channels
            .iter()
            .flat_map(|c| [c.down_rate, c.up_rate])
            .filter(|&r| r > 0.0)
            .fold(f64::INFINITY, f64::min)
    }

    /// Scale of the generator entries.
    pub fn scale(&self) -> f64 {
        match &self.generator {
            Some(g) => g.max_abs(),
            None => self
                .channels
                .iter()
                .map(|c| (c.down_rate + c.up_rate) * c.operator.max_abs().powi(2))
                .fold(0.0, f64::max),
        }
    }

    /// `max |1ᵀ L|` over columns of the vectorized generator.
    pub fn trace_defect(&self) -> f64 {
        let g = self.dense_generator();
        let d = self.dimension;
        (0..d * d)
            .map(|col| (0..d).map(|i| g[(i * d + i, col)]).sum::<Complex64>().norm())
            .fold(0.0, f64::max)
    }

    /// Largest relative deviation of `up/down` from `e^{-ω/T}` among channels.
    pub fn kms_deviation(&self) -> f64 {
        self.channels
            .iter()
            .filter(|c| c.down_rate > 0.0)
            .map(|c| {
                let expected = if c.temperature == 0.0 {
                    0.0
                } else {
                    (-c.frequency / c.temperature).exp()
                };
                let ratio = c.up_rate / c.down_rate;
                if expected == 0.0 {
                    ratio.abs()
                } else {
                    (ratio - expected).abs() / expected
                }
            })
            .fold(0.0, f64::max)
    }

    /// Coordinates `(i, j)` of the secular subspace `E_i ≈ E_j`.
    fn secular_pairs(&self) -> Vec<(usize, usize)> {
        let d = self.dimension;
        let mut v = Vec::new();
        for i in 0..d {
            for j in 0..d {
                if (self.energies[i] - self.energies[j]).abs() <= self.grouping_tol {
                    v.push((i, j));
                }
            }
        }
        v
    }

    /// Generator restricted to the secular subspace, which it leaves invariant.
    fn secular_block(&self, pairs: &[(usize, usize)]) -> CMatrix {
        let d = self.dimension;
        let mut pos = vec![usize::MAX; d * d];
        for (k, &(i, j)) in pairs.iter().enumerate() {
            pos[i * d + j] = k;
        }
        let n = pairs.len();
        let mut m = CMatrix::zeros(n, n);
        let nz = |a: &CMatrix| -> Vec<(usize, usize, Complex64)> {
            let mut v = Vec::new();
            for r in 0..d {
                for c in 0..d {
                    let z = a[(r, c)];
                    if z != ZERO {
                        v.push((r, c, z));
                    }
                }
            }
            v
        };
        for ch in &self.channels {
            for (rate, op) in [(ch.down_rate, ch.operator.clone()), (ch.up_rate, ch.operator.adjoint())] {
                if rate == 0.0 {
                    continue;
                }
                let entries = nz(&op);
                let k_entries = nz(&(&op.adjoint() * &op));
                // A ρ A†: [(k,l),(i,j)] += r A_ki conj(A_lj)
                for &(k, i, a) in &entries {
                    for &(l, j, b) in &entries {
                        let (row, col) = (pos[k * d + l], pos[i * d + j]);
                        if row != usize::MAX && col != usize::MAX {
                            m[(row, col)] += a * b.conj() * rate;
                        }
                    }
                }
                // -½ A†A ρ and -½ ρ A†A
                for &(k, i, kv) in &k_entries {
                    for l in 0..d {
                        let (row, col) = (pos[k * d + l], pos[i * d + l]);
                        if row != usize::MAX && col != usize::MAX {
                            m[(row, col)] -= kv * (0.5 * rate);
                        }
                    }
                    // here (k, i) plays (j, l) of ρ A†A
                    let (j, l) = (k, i);
                    for r in 0..d {
                        let (row, col) = (pos[r * d + l], pos[r * d + j]);
                        if row != usize::MAX && col != usize::MAX {
                            m[(row, col)] -= kv * (0.5 * rate);
                        }
                    }
                }
            }
        }
        m
    }
}

/// Assembles the master equation of `model` coupled to `baths`.
pub fn build_liouvillian(model: &DressedModel, baths: &[BathSpec]) -> Result<Liouvillian, LindbladError> {
    let mut channels = Vec::with_capacity(model.transitions.len());
    for t in &model.transitions {
        let bath = baths.iter().find(|b| b.label == t.bath).ok_or(LindbladError::MissingBath(t.bath))?;
        bath.validate()?;
        let down = kms_rate(bath, t.frequency)? * t.weight;
        let up = kms_rate(bath, -t.frequency)? * t.weight;
        channels.push(Channel {
            bath: t.bath,
            frequency: t.frequency,
            weight: t.weight,
            operator: t.operator.clone(),
            down_rate: down,
            up_rate: up,
            temperature: bath.temperature,
            pairs: t.pairs.clone(),
        });
    }
    let mut l = Liouvillian {
        dimension: model.dimension(),
        energies: model.energies.clone(),
        channels,
        generator: None,
        grouping_tol: model.grouping_tolerance(),
    };
    if l.dimension <= DENSE_LIMIT {
        l.generator = Some(l.assemble_dense());
    }
    Ok(l)
}

/// Bath-resolved `Tr(L_α(ρ) H)`.
pub fn currents(l: &Liouvillian, rho: &CMatrix) -> BTreeMap<BathLabel, f64> {
    l.labels()
        .into_iter()
        .map(|label| {
            let lr = l.apply_bath(label, rho);
            let j = (0..l.dimension).map(|k| lr[(k, k)].re * l.energies[k]).sum();
            (label, j)
        })
        .collect()
}

fn finish(l: &Liouvillian, rho: CMatrix, solver: SolverKind) -> Result<SteadyStateResult, LindbladError> {
    let rho = rho.hermitian_part();
    let tr = rho.trace().re;
    let rho = rho.scale_real(1.0 / tr);
    let residual = l.apply(&rho).max_abs();
    let allowed = RESIDUAL_TOL * l.scale();
    if residual > allowed {
        return Err(LindbladError::Residual { residual, allowed });
    }
    let currents = currents(l, &rho);
    Ok(SteadyStateResult {
        rho,
        currents,
        residual,
        solver,
    })
}

/// Stationary state of the full master equation.
///
/// Small systems use the vectorized generator directly. Larger ones use the
/// block of coherences between degenerate levels (populations included),
/// which holds the whole kernel because every jump operator has a definite
/// Bohr frequency.
pub fn steady_state(l: &Liouvillian) -> Result<SteadyStateResult, LindbladError> {
    let d = l.dimension;
    let rho = match &l.generator {
        Some(g) => solve_nullspace_with_trace(g)?,
        None => {
            let pairs = l.secular_pairs();
            let block = l.secular_block(&pairs);
            let trace_row: Vec<Complex64> = pairs
                .iter()
                .map(|&(i, j)| if i == j { Complex64::new(1.0, 0.0) } else { ZERO })
                .collect();
            let x = solve_kernel_normalized(&block, &trace_row)?;
            let mut rho = CMatrix::zeros(d, d);
            for (&(i, j), v) in pairs.iter().zip(x) {
                rho[(i, j)] = v;
            }
            rho
        }
    };
    finish(l, rho, SolverKind::Full)
}

/// Population master equation on the dressed basis.
///
/// Valid whenever no channel maps one level onto two degenerate ones, which
/// is checked.
pub fn rate_steady_state(l: &Liouvillian) -> Result<SteadyStateResult, LindbladError> {
    let d = l.dimension;
    let tol = l.grouping_tol;
    let mut w = vec![0.0f64; d * d];
    for ch in &l.channels {
        if ch.down_rate == 0.0 && ch.up_rate == 0.0 {
            continue;
        }
        let pairs = ch.pairs();
        for (x, &(u1, l1, _)) in pairs.iter().enumerate() {
            for &(u2, l2, _) in &pairs[x + 1..] {
                let same_source = u1 == u2 || (l.energies[u1] - l.energies[u2]).abs() <= tol;
                let same_target = l1 == l2 || (l.energies[l1] - l.energies[l2]).abs() <= tol;
                if same_source || same_target {
                    return Err(LindbladError::CoherenceGenerating {
                        bath: ch.bath,
                        frequency: ch.frequency,
                    });
                }
            }
        }
        for &(u, lo, a) in pairs {
            let a2 = a * a;
            w[lo * d + u] += ch.down_rate * a2;
            w[u * d + lo] += ch.up_rate * a2;
        }
    }
    for col in 0..d {
        let out: f64 = (0..d).filter(|&r| r != col).map(|r| w[r * d + col]).sum();
        w[col * d + col] = -out;
    }
    // column equilibration by exit rates keeps the rank test scale-free
    let scale: Vec<f64> = (0..d)
        .map(|c| {
            let v = w[c * d + c].abs();
            if v > 0.0 {
                v
            } else {
                1.0
            }
        })
        .collect();
    let m = CMatrix::from_fn(d, d, |r, c| Complex64::new(w[r * d + c] / scale[c], 0.0));
    let norm: Vec<Complex64> = scale.iter().map(|&s| Complex64::new(1.0 / s, 0.0)).collect();
    let q = solve_kernel_normalized(&m, &norm)?;
    let p: Vec<f64> = q.iter().zip(&scale).map(|(z, s)| z.re / s).collect();
    let total: f64 = p.iter().sum();
    let pops: Vec<f64> = p.iter().map(|v| v / total).collect();

    let mut currents: BTreeMap<BathLabel, f64> = l.labels().into_iter().map(|b| (b, 0.0)).collect();
    for ch in &l.channels {
        let j: f64 = ch
            .pairs()
            .iter()
            .map(|&(u, lo, a)| ch.frequency * a * a * (ch.up_rate * pops[lo] - ch.down_rate * pops[u]))
            .sum();
        *currents.entry(ch.bath).or_insert(0.0) += j;
    }
    let rho = CMatrix::from_diagonal(&pops);
    let residual = l.apply(&rho).max_abs();
    let allowed = RESIDUAL_TOL * l.scale();
    if residual > allowed {
        return Err(LindbladError::Residual { residual, allowed });
    }
    Ok(SteadyStateResult {
        rho,
        currents,
        residual,
        solver: SolverKind::Rate,
    })
}

pub fn solve(l: &Liouvillian, kind: SolverKind) -> Result<SteadyStateResult, LindbladError> {
    match kind {
        SolverKind::Full => steady_state(l),
        SolverKind::Rate => rate_steady_state(l),
    }
}

/// Default horizon of the time-propagation oracle: `50 / min rate`.
pub fn default_t_final(l: &Liouvillian) -> f64 {
    50.0 / l.min_rate()
}

/// Largest step accepted by [`evolve_rk4`].
pub fn max_step(l: &Liouvillian) -> f64 {
    0.1 / l.max_rate()
}

/// Classical fourth-order Runge–Kutta propagation of `ρ̇ = L(ρ)`.
///
/// With a dense generator one step is the matrix polynomial
/// `P = Σ_{k≤4} (hL)^k/k!`, and `P^n` is formed by repeated squaring.
pub fn evolve_rk4(l: &Liouvillian, rho0: &CMatrix, t_final: f64, dt: f64) -> Result<CMatrix, LindbladError> {
    if !(t_final >= 0.0 && t_final.is_finite()) || !(dt > 0.0) {
        return Err(LindbladError::InvalidTime(t_final));
    }
    let max_rate = l.max_rate();
    if max_rate == 0.0 || t_final == 0.0 {
        return Ok(rho0.clone());
    }
    let limit = 0.1 / max_rate;
    if dt > limit * (1.0 + 1e-12) {
        return Err(LindbladError::StepTooLarge { dt, max: limit });
    }
    let steps_f = (t_final / dt).ceil().max(1.0);
    let h = t_final / steps_f;
    match &l.generator {
        Some(g) => {
            let n = g.rows();
            let hl = g.scale_real(h);
            // Horner: I + hL(I + hL/2 (I + hL/3 (I + hL/4)))
            let id = CMatrix::identity(n);
            let mut p = id.clone();
            for k in (1..=4).rev() {
                p = &id + &(&hl * &p).scale_real(1.0 / k as f64);
            }
            let mut v = rho0.vectorize();
            let mut base = p;
            let mut remaining = steps_f;
            while remaining >= 1.0 {
                if remaining % 2.0 == 1.0 {
                    v = base.apply(&v)?;
                }
                remaining = (remaining / 2.0).floor();
                if remaining >= 1.0 {
                    base = &base * &base;
                }
            }
            Ok(CMatrix::unvectorize(&v)?)
        }
        None => {
            let steps = steps_f as u64;
            if steps > MAX_EXPLICIT_STEPS {
                return Err(LindbladError::TooManySteps {
                    steps,
                    limit: MAX_EXPLICIT_STEPS,
                });
            }
            let mut rho = rho0.clone();
            let c = |s: f64| Complex64::new(s, 0.0);
            for _ in 0..steps {
                let k1 = l.apply(&rho);
                let mut y = rho.clone();
                y.add_scaled(c(0.5 * h), &k1);
                let k2 = l.apply(&y);
                let mut y = rho.clone();
                y.add_scaled(c(0.5 * h), &k2);
                let k3 = l.apply(&y);
                let mut y = rho.clone();
                y.add_scaled(c(h), &k3);
                let k4 = l.apply(&y);
                rho.add_scaled(c(h / 6.0), &k1);
                rho.add_scaled(c(h / 3.0), &k2);
                rho.add_scaled(c(h / 3.0), &k3);
                rho.add_scaled(c(h / 6.0), &k4);
            }
            Ok(rho)
        }
    }
}

/// Boltzmann state `e^{-E/T}/Z` on the given levels.
pub fn gibbs_populations(energies: &[f64], temperature: f64) -> Vec<f64> {
    let e0 = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = energies
        .iter()
        .map(|&e| {
            if temperature == 0.0 {
                if e - e0 == 0.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                (-(e - e0) / temperature).exp()
            }
        })
        .collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|v| v / z).collect()
}

/// Net downward flow `G(ω)ρ_uu - G(-ω)ρ_ll` of one bath on one level pair.
pub fn pair_flux(bath: &BathSpec, energies: &[f64], populations: &[f64], upper: usize, lower: usize) -> Result<f64, LindbladError> {
    let w = energies[upper] - energies[lower];
    Ok(kms_rate(bath, w)? * populations[upper] - kms_rate(bath, -w)? * populations[lower])
}

fn bath(baths: &[BathSpec], label: BathLabel) -> Result<&BathSpec, LindbladError> {
    baths.iter().find(|b| b.label == label).ok_or(LindbladError::MissingBath(label))
}

fn require_blocked(b: &BathSpec, w: f64, what: &str) -> Result<(), LindbladError> {
    if w > 0.0 && kms_rate(b, w)? != 0.0 {
        return Err(LindbladError::Precondition(format!("bath {} must be masked away from {what} = {w:.6}", b.label)));
    }
    Ok(())
}

fn require_open(b: &BathSpec, w: f64, what: &str) -> Result<(), LindbladError> {
    if kms_rate(b, w)? == 0.0 {
        return Err(LindbladError::Precondition(format!("bath {} must couple at {what} = {w:.6}", b.label)));
    }
    Ok(())
}

/// Diode rate-equation solution with `Γ = J_R / (Ω c²)`.
#[derive(Debug, Clone)]
pub struct HdRateResult {
    pub result: SteadyStateResult,
    pub gamma: f64,
}

/// Population dynamics of the filtered qubit diode: `L` sees `ω_a` and
/// `ω_a + Ω` only, `R` sees `Ω`.
pub fn hd_rate_equations(p: &TwoQubitParams, baths: &[BathSpec]) -> Result<HdRateResult, LindbladError> {
    let l_bath = bath(baths, BathLabel::L)?;
    let r_bath = bath(baths, BathLabel::R)?;
    require_blocked(l_bath, p.omega_minus().abs(), "|ω_a - Ω|")?;
    require_open(l_bath, p.omega_a, "ω_a")?;
    require_open(l_bath, p.omega_plus(), "ω_a + Ω")?;
    require_open(r_bath, p.big_omega(), "Ω")?;
    let model = dress_two_qubit(p, Device::Diode)?;
    let l = build_liouvillian(&model, baths)?;
    let result = rate_steady_state(&l)?;
    let gamma = result.current(BathLabel::R) / (p.big_omega() * p.cos_theta().powi(2));
    Ok(HdRateResult { result, gamma })
}

/// Transistor filter choices handled by [`ht_rate_equations`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HtVariant {
    /// `E` at `ω_-` only, `C` at `ω_a` only.
    Fig4c,
    /// `E` at `ω_-` and `ω_a`, `C` at `ω_a`.
    #[serde(alias = "figDc")]
    Fig6c,
}

#[derive(Debug, Clone)]
pub struct HtRateResult {
    pub result: SteadyStateResult,
    /// `Γ_1 = Γ^E_32`; equals `Γ_T` for [`HtVariant::Fig4c`].
    pub gamma_1: f64,
    /// `Γ_2 = Γ^E_13 + Γ^E_24`; zero for [`HtVariant::Fig4c`].
    pub gamma_2: f64,
}

impl HtRateResult {
    pub fn gamma_t(&self) -> f64 {
        self.gamma_1
    }
}

/// Population dynamics of the filtered qubit transistor.
pub fn ht_rate_equations(p: &TwoQubitParams, baths: &[BathSpec], variant: HtVariant) -> Result<HtRateResult, LindbladError> {
    if p.omega_minus() <= 0.0 {
        return Err(LindbladError::Precondition("transistor requires ω_a > Ω".into()));
    }
    let e = bath(baths, BathLabel::E)?;
    let c = bath(baths, BathLabel::C)?;
    let b = bath(baths, BathLabel::B)?;
    require_open(e, p.omega_minus(), "ω_a - Ω")?;
    require_blocked(e, p.omega_plus(), "ω_a + Ω")?;
    require_open(c, p.omega_a, "ω_a")?;
    require_blocked(c, p.omega_minus(), "ω_a - Ω")?;
    require_blocked(c, p.omega_plus(), "ω_a + Ω")?;
    require_open(b, p.big_omega(), "Ω")?;
    match variant {
        HtVariant::Fig4c => require_blocked(e, p.omega_a, "ω_a")?,
        HtVariant::Fig6c => require_open(e, p.omega_a, "ω_a")?,
    }
    let model = dress_two_qubit(p, Device::Transistor)?;
    let l = build_liouvillian(&model, baths)?;
    let result = rate_steady_state(&l)?;
    let pops = result.populations();
    let en = &model.energies;
    // Γ^E_32 = -Γ^E_23, state 2 above state 3
    let gamma_1 = -pair_flux(e, en, &pops, 1, 2)?;
    let gamma_2 = match variant {
        HtVariant::Fig4c => 0.0,
        HtVariant::Fig6c => pair_flux(e, en, &pops, 0, 2)? + pair_flux(e, en, &pops, 1, 3)?,
    };
    Ok(HtRateResult {
        result,
        gamma_1,
        gamma_2,
    })
}

/// Closed-form anchors for the filtered devices.
pub mod closed_form {
    use super::*;

    /// Diode `Γ` for `κ_L = κ_R = κ` and `ω_a = Ω`, as printed, with
    /// `x = Ω/T_L`, `y = Ω/T_R`.
    pub fn hd_gamma_printed(kappa: f64, big_omega: f64, c2: f64, s2: f64, t_l: f64, t_r: f64) -> f64 {
        let (x, y) = (big_omega / t_l, big_omega / t_r);
        let e = f64::exp;
        let num = 2.0 * kappa * big_omega * big_omega * c2 * c2 * (e(x) - e(y));
        let den = -c2 * (1.0 + e(-x) - 2.0 * e(x) - e(2.0 * x) + 3.0 * e(-x + y))
            - 2.0 * s2 * (-1.0 + e(-x) + e(x) - e(-2.0 * x) - e(y) + e(-x + y));
        num / den
    }

    /// Diode `Γ = J_R/(Ωc²)` for `κ(ω) = κω`, `ω_a = Ω`, solved exactly:
    ///
    /// ```text
    /// Γ = 2κΩ s² X (Y - X) / [(1 + X)(1 + Y)(1 - X²) + 4 s² X (X - Y)],  X = e^{Ω/T_L}, Y = e^{Ω/T_R}
    /// ```
    pub fn hd_gamma(kappa: f64, big_omega: f64, s2: f64, t_l: f64, t_r: f64) -> f64 {
        let x = (big_omega / t_l).exp();
        let y = (big_omega / t_r).exp();
        2.0 * kappa * big_omega * s2 * x * (y - x) / ((1.0 + x) * (1.0 + y) * (1.0 - x * x) + 4.0 * s2 * x * (x - y))
    }

    /// Inputs of the transistor limit formulas.
    #[derive(Debug, Clone, Copy)]
    pub struct HtLimitInputs {
        pub c2: f64,
        pub s2: f64,
        pub gamma_e: f64,
        pub gamma_c: f64,
        pub gamma_b: f64,
        pub e_b: f64,
        pub e_c: f64,
    }

    impl HtLimitInputs {
        /// `γ_α = ω κ n̄(ω, T_α)` at `ω_-`, `ω_a`, `Ω`.
        pub fn new(p: &TwoQubitParams, kappa: f64, t_e: f64, t_c: f64, t_b: f64) -> Result<Self, BathError> {
            let w = p.big_omega();
            Ok(Self {
                c2: p.cos_theta().powi(2),
                s2: p.sin_theta().powi(2),
                gamma_e: p.omega_minus() * kappa * occupation(t_e, p.omega_minus())?,
                gamma_c: p.omega_a * kappa * occupation(t_c, p.omega_a)?,
                gamma_b: w * kappa * occupation(t_b, w)?,
                e_b: (w / t_b).exp(),
                e_c: (p.omega_a / t_c).exp(),
            })
        }
    }

    /// Transistor `Γ_T` in the hot-emitter limit, as printed.
    pub fn ht_gamma_t_printed(i: &HtLimitInputs) -> f64 {
        let num = i.c2 * i.gamma_e * i.gamma_c * i.gamma_b * (i.e_b - i.e_c);
        let den = i.c2 * i.gamma_e * i.gamma_b * (1.0 + i.e_b) * (1.0 + i.e_c)
            + i.s2 * i.gamma_e * (i.e_c * i.gamma_b + i.e_b * (i.gamma_e + i.e_c * (i.gamma_e + i.gamma_b)));
        num / den
    }

    /// Transistor `Γ_T = Γ^E_32` of the `E:ω_-`, `C:ω_a`, `B:Ω` filter in the
    /// limit `e^{ω_-/T_E} → 1` at fixed `γ_E`:
    ///
    /// ```text
    /// Γ_T = c² γ_B γ_C γ_E (e_C - e_B) / [c² γ_B γ_C (1+e_B)(1+e_C) + s² γ_E (γ_B (1+e_B) + γ_C (1+e_C))]
    /// ```
    pub fn ht_gamma_t(i: &HtLimitInputs) -> f64 {
        let num = i.c2 * i.gamma_b * i.gamma_c * i.gamma_e * (i.e_c - i.e_b);
        let den = i.c2 * i.gamma_b * i.gamma_c * (1.0 + i.e_b) * (1.0 + i.e_c)
            + i.s2 * i.gamma_e * (i.gamma_b * (1.0 + i.e_b) + i.gamma_c * (1.0 + i.e_c));
        num / den
    }
}
