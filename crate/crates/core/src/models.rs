//! Dressed-basis descriptions of the two heat-manager families.
//!
//! Both systems are compiled once into a [`DressedModel`]: diagonal energies
//! plus, for every bath, a list of jump operators of definite Bohr frequency.
//!
//! Two coupled qubits, `H = ω_a/2 σ_a^z + ω_b/2 σ_b^z + g σ_a^z σ_b^x`, are
//! diagonalized by `U = exp(-iθ/2 σ_a^z σ_b^y)` with `tan θ = 2g/ω_b`. The
//! dressed states are ordered
//!
//! ```text
//! |1⟩ = (ω_a + Ω)/2   |2⟩ = (ω_a - Ω)/2   |3⟩ = (-ω_a + Ω)/2   |4⟩ = (-ω_a - Ω)/2
//! ```
//!
//! and stored at indices 0..4 (`a * 2 + b`, excited = 0).
//!
//! The optomechanical system `ω_a a†a + ω_b b†b - g a†a (b + b†)` becomes,
//! after the polaron transform, `ω_a ñ + ω_b m̃ - χ ñ²` with `χ = g²/ω_b` and
//! photon coupling `ã + β ã b̃ - β ã b̃†` to first order in `β = g/ω_b`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baths::{kms_rate, BathError, BathLabel, BathSpec, SpectralDensity, Window};
use crate::matrixcore::{CMatrix, MAX_DIMENSION};

/// Relative tolerance (in units of `ω_a`) for grouping Bohr frequencies.
pub const FREQUENCY_GROUPING_TOL: f64 = 1e-9;

/// Half-width of hard-mask windows, in units of the line spacing.
pub const MASK_HALF_WIDTH: f64 = 0.45;

/// Largest truncated-edge population accepted for an oscillator model.
pub const CUTOFF_POPULATION_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("Fock cutoff n_max = {n_max} gives dimension {dim} above the limit {max}")]
    TooLarge { n_max: usize, dim: usize, max: usize },
    #[error("Fock cutoff insufficient: population {population:.3e} on truncation edge exceeds {allowed:.1e}")]
    CutoffInsufficient { population: f64, allowed: f64 },
    #[error("bath {0} is not attached to this device")]
    UnknownBath(BathLabel),
    #[error(transparent)]
    Bath(#[from] BathError),
}

/// Two-terminal diode (`L` on side a, `R` on side b) or three-terminal
/// transistor (`E`, `C` on side a, `B` on side b).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Device {
    Diode,
    Transistor,
}

impl Device {
    pub fn labels(self) -> &'static [BathLabel] {
        match self {
            Device::Diode => &[BathLabel::L, BathLabel::R],
            Device::Transistor => &[BathLabel::E, BathLabel::C, BathLabel::B],
        }
    }

    pub fn side_a(self) -> &'static [BathLabel] {
        match self {
            Device::Diode => &[BathLabel::L],
            Device::Transistor => &[BathLabel::E, BathLabel::C],
        }
    }

    pub fn side_b(self) -> &'static [BathLabel] {
        match self {
            Device::Diode => &[BathLabel::R],
            Device::Transistor => &[BathLabel::B],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoQubitParams {
    #[serde(alias = "omega_L")]
    pub omega_a: f64,
    #[serde(alias = "omega_R")]
    pub omega_b: f64,
    pub g: f64,
}

impl TwoQubitParams {
    pub fn new(omega_a: f64, omega_b: f64, g: f64) -> Result<Self, ModelError> {
        let p = Self { omega_a, omega_b, g };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        positive("omega_a", self.omega_a)?;
        positive("omega_b", self.omega_b)?;
        if !self.g.is_finite() {
            return Err(ModelError::InvalidParameter {
                name: "g",
                value: self.g,
                reason: "must be finite",
            });
        }
        Ok(())
    }

    /// `Ω = √(ω_b² + 4g²)`.
    pub fn big_omega(&self) -> f64 {
        self.omega_b.hypot(2.0 * self.g)
    }

    pub fn theta(&self) -> f64 {
        (2.0 * self.g).atan2(self.omega_b)
    }

    pub fn cos_theta(&self) -> f64 {
        self.omega_b / self.big_omega()
    }

    pub fn sin_theta(&self) -> f64 {
        2.0 * self.g / self.big_omega()
    }

    /// `ω_- = ω_a - Ω`.
    pub fn omega_minus(&self) -> f64 {
        self.omega_a - self.big_omega()
    }

    pub fn omega_plus(&self) -> f64 {
        self.omega_a + self.big_omega()
    }

    /// Dressed energies in state order 1..4.
    pub fn energies(&self) -> [f64; 4] {
        let (a, w) = (self.omega_a, self.big_omega());
        [0.5 * (a + w), 0.5 * (a - w), 0.5 * (-a + w), 0.5 * (-a - w)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OmsParams {
    #[serde(alias = "omega_L")]
    pub omega_a: f64,
    #[serde(alias = "omega_R")]
    pub omega_b: f64,
    pub g: f64,
    pub n_max: usize,
}

impl OmsParams {
    pub fn new(omega_a: f64, omega_b: f64, g: f64, n_max: usize) -> Result<Self, ModelError> {
        let p = Self {
            omega_a,
            omega_b,
            g,
            n_max,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        positive("omega_a", self.omega_a)?;
        positive("omega_b", self.omega_b)?;
        if !self.g.is_finite() {
            return Err(ModelError::InvalidParameter {
                name: "g",
                value: self.g,
                reason: "must be finite",
            });
        }
        if self.n_max < 2 {
            return Err(ModelError::InvalidParameter {
                name: "n_max",
                value: self.n_max as f64,
                reason: "at least 2 levels above vacuum are required",
            });
        }
        let dim = self.dimension();
        if dim > MAX_DIMENSION {
            return Err(ModelError::TooLarge {
                n_max: self.n_max,
                dim,
                max: MAX_DIMENSION,
            });
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        (self.n_max + 1) * (self.n_max + 1)
    }

    /// `β = g/ω_b`.
    pub fn beta(&self) -> f64 {
        self.g / self.omega_b
    }

    /// Kerr coefficient `χ = g²/ω_b`.
    pub fn chi(&self) -> f64 {
        self.g * self.g / self.omega_b
    }

    pub fn index(&self, n: usize, m: usize) -> usize {
        n * (self.n_max + 1) + m
    }

    pub fn energy(&self, n: usize, m: usize) -> f64 {
        let n = n as f64;
        n * self.omega_a + m as f64 * self.omega_b - self.chi() * n * n
    }
}

fn positive(name: &'static str, value: f64) -> Result<(), ModelError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter {
            name,
            value,
            reason: "must be positive and finite",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum SystemParams {
    Qubits(TwoQubitParams),
    Oms(OmsParams),
}

impl SystemParams {
    pub fn omega_a(&self) -> f64 {
        match self {
            SystemParams::Qubits(p) => p.omega_a,
            SystemParams::Oms(p) => p.omega_a,
        }
    }

    /// Splitting that plays the role of `Ω`: the dressed qubit gap or the phonon frequency.
    pub fn line_spacing(&self) -> f64 {
        match self {
            SystemParams::Qubits(p) => p.big_omega(),
            SystemParams::Oms(p) => p.omega_b,
        }
    }
}

/// One dissipation channel: bath, Bohr frequency and jump operator.
///
/// `operator` lowers the energy by `frequency`; its squared expansion
/// coefficient is `weight`. `pairs` lists `(upper, lower, amplitude)` of the
/// nonzero entries `operator[lower][upper]`.
#[derive(Debug, Clone)]
pub struct Transition {
    pub bath: BathLabel,
    pub frequency: f64,
    pub operator: CMatrix,
    pub weight: f64,
    pub pairs: Vec<(usize, usize, f64)>,
}

/// One expansion term `coefficient · Σ amplitude |lower⟩⟨upper|` of a coupling
/// operator in the interaction picture.
#[derive(Debug, Clone)]
struct CouplingTerm {
    coefficient: f64,
    entries: Vec<(usize, usize, f64)>,
}

#[derive(Debug, Clone)]
pub struct DressedModel {
    pub system: SystemParams,
    pub device: Device,
    pub energies: Vec<f64>,
    pub hamiltonian: CMatrix,
    pub transitions: Vec<Transition>,
    /// Basis states on the Fock truncation edge (empty for qubits).
    pub truncation_edge: Vec<usize>,
    /// Coupling terms dropped because their Bohr frequency vanishes.
    pub omitted: Vec<String>,
}

impl DressedModel {
    pub fn dimension(&self) -> usize {
        self.energies.len()
    }

    pub fn transitions_for(&self, label: BathLabel) -> impl Iterator<Item = &Transition> {
        self.transitions.iter().filter(move |t| t.bath == label)
    }

    pub fn grouping_tolerance(&self) -> f64 {
        FREQUENCY_GROUPING_TOL * self.system.omega_a()
    }

    /// Human-readable state name: `1..4` for qubits, `n,m` for oscillators.
    pub fn state_name(&self, i: usize) -> String {
        match &self.system {
            SystemParams::Qubits(_) => format!("{}", i + 1),
            SystemParams::Oms(p) => format!("{},{}", i / (p.n_max + 1), i % (p.n_max + 1)),
        }
    }

    /// Energies and transition table as CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("# dressed energies\nstate,energy\n");
        for (i, e) in self.energies.iter().enumerate() {
            out.push_str(&format!("{},{:.14e}\n", self.state_name(i), e));
        }
        out.push_str("# transitions\nbath,frequency,weight,upper,lower,amplitude\n");
        for t in &self.transitions {
            for &(u, l, a) in &t.pairs {
                out.push_str(&format!(
                    "{},{:.14e},{:.14e},{},{},{:.14e}\n",
                    t.bath,
                    t.frequency,
                    t.weight,
                    self.state_name(u),
                    self.state_name(l),
                    a
                ));
            }
        }
        out
    }

    /// Largest population on the Fock truncation edge.
    pub fn edge_population(&self, rho: &CMatrix) -> f64 {
        self.truncation_edge.iter().map(|&i| rho[(i, i)].re).fold(0.0, f64::max)
    }

    /// Rejects a steady state that leaks onto the truncation edge.
    pub fn check_cutoff(&self, rho: &CMatrix) -> Result<(), ModelError> {
        let population = self.edge_population(rho);
        if population > CUTOFF_POPULATION_TOL {
            return Err(ModelError::CutoffInsufficient {
                population,
                allowed: CUTOFF_POPULATION_TOL,
            });
        }
        Ok(())
    }
}

/// Groups coupling terms by Bohr frequency and emits one transition per
/// (bath, frequency). A single term keeps its operator and carries the squared
/// coefficient as weight; coinciding terms are summed into one operator of weight 1.
fn compile_transitions(
    energies: &[f64],
    terms: &[CouplingTerm],
    baths: &[BathLabel],
    tol: f64,
    omitted: &mut Vec<String>,
    side: &str,
) -> Vec<Transition> {
    let d = energies.len();
    // frequency -> list of (term index, entries)
    let mut groups: Vec<(f64, Vec<(usize, Vec<(usize, usize, f64)>)>)> = Vec::new();
    let mut dropped = false;
    for (k, term) in terms.iter().enumerate() {
        if term.coefficient == 0.0 {
            continue;
        }
        let mut by_freq: Vec<(f64, Vec<(usize, usize, f64)>)> = Vec::new();
        for &(from, to, amp) in &term.entries {
            if amp == 0.0 {
                continue;
            }
            let mut w = energies[from] - energies[to];
            let (upper, lower) = if w >= 0.0 { (from, to) } else { (to, from) };
            w = w.abs();
            if w <= tol {
                dropped = true;
                continue;
            }
            match by_freq.iter_mut().find(|(f, _)| (f - w).abs() <= tol) {
                Some((_, v)) => v.push((upper, lower, amp)),
                None => by_freq.push((w, vec![(upper, lower, amp)])),
            }
        }
        for (w, entries) in by_freq {
            match groups.iter_mut().find(|(f, _)| (f - w).abs() <= tol) {
                Some((_, v)) => v.push((k, entries)),
                None => groups.push((w, vec![(k, entries)])),
            }
        }
    }
    if dropped {
        omitted.push(format!("{side}-side coupling: zero-frequency terms (pure dephasing) dropped"));
    }
    groups.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut out = Vec::new();
    for (w, members) in groups {
        let single = members.len() == 1;
        let weight = if single {
            terms[members[0].0].coefficient.powi(2)
        } else {
            1.0
        };
        let mut op = CMatrix::zeros(d, d);
        let mut pairs: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (k, entries) in &members {
            let c = if single { 1.0 } else { terms[*k].coefficient };
            for &(u, l, a) in entries {
                op[(l, u)] += Complex64::new(c * a, 0.0);
                *pairs.entry((u, l)).or_insert(0.0) += c * a;
            }
        }
        let pairs: Vec<(usize, usize, f64)> = pairs.into_iter().filter(|(_, a)| *a != 0.0).map(|((u, l), a)| (u, l, a)).collect();
        if pairs.is_empty() {
            continue;
        }
        for &bath in baths {
            out.push(Transition {
                bath,
                frequency: w,
                operator: op.clone(),
                weight,
                pairs: pairs.clone(),
            });
        }
    }
    out
}

/// Compiles the coupled-qubit device.
pub fn dress_two_qubit(p: &TwoQubitParams, device: Device) -> Result<DressedModel, ModelError> {
    p.validate()?;
    let energies = p.energies().to_vec();
    let (c, s) = (p.cos_theta(), p.sin_theta());
    // index: a*2 + b, excited = 0
    let st = |a: usize, b: usize| a * 2 + b;
    let side_a = vec![
        // σ̃_a^-
        CouplingTerm {
            coefficient: c,
            entries: vec![(st(0, 0), st(1, 0), 1.0), (st(0, 1), st(1, 1), 1.0)],
        },
        // σ̃_a^- σ̃_b^-
        CouplingTerm {
            coefficient: s,
            entries: vec![(st(0, 0), st(1, 1), 1.0)],
        },
        // σ̃_a^- σ̃_b^+
        CouplingTerm {
            coefficient: -s,
            entries: vec![(st(0, 1), st(1, 0), 1.0)],
        },
    ];
    let side_b = vec![
        // σ̃_b^-
        CouplingTerm {
            coefficient: c,
            entries: vec![(st(0, 0), st(0, 1), 1.0), (st(1, 0), st(1, 1), 1.0)],
        },
        // s σ̃_a^z σ̃_b^z / 2 has no Bohr frequency
        CouplingTerm {
            coefficient: s,
            entries: (0..4).map(|i| (i, i, 1.0)).collect(),
        },
    ];
    let tol = FREQUENCY_GROUPING_TOL * p.omega_a;
    let mut omitted = Vec::new();
    let mut transitions = compile_transitions(&energies, &side_a, device.side_a(), tol, &mut omitted, "a");
    transitions.extend(compile_transitions(&energies, &side_b, device.side_b(), tol, &mut omitted, "b"));
    Ok(DressedModel {
        system: SystemParams::Qubits(*p),
        device,
        hamiltonian: CMatrix::from_diagonal(&energies),
        energies,
        transitions,
        truncation_edge: vec![],
        omitted,
    })
}

/// Compiles the optomechanical device on an `(n_max+1)²` Fock lattice.
pub fn dress_oms(p: &OmsParams, device: Device) -> Result<DressedModel, ModelError> {
    p.validate()?;
    let nm = p.n_max;
    let mut energies = Vec::with_capacity(p.dimension());
    for n in 0..=nm {
        for m in 0..=nm {
            energies.push(p.energy(n, m));
        }
    }
    let beta = p.beta();
    let sq = |k: usize| (k as f64).sqrt();
    let mut carrier = Vec::new();
    let mut blue = Vec::new();
    let mut red = Vec::new();
    let mut phonon = Vec::new();
    for n in 0..=nm {
        for m in 0..=nm {
            let from = p.index(n, m);
            if n >= 1 {
                carrier.push((from, p.index(n - 1, m), sq(n)));
                if m >= 1 {
                    blue.push((from, p.index(n - 1, m - 1), sq(n) * sq(m)));
                }
                if m < nm {
                    red.push((from, p.index(n - 1, m + 1), sq(n) * sq(m + 1)));
                }
            }
            if m >= 1 {
                phonon.push((from, p.index(n, m - 1), sq(m)));
            }
        }
    }
    let side_a = vec![
        CouplingTerm {
            coefficient: 1.0,
            entries: carrier,
        },
        CouplingTerm {
            coefficient: beta,
            entries: blue,
        },
        CouplingTerm {
            coefficient: -beta,
            entries: red,
        },
    ];
    let side_b = vec![
        CouplingTerm {
            coefficient: 1.0,
            entries: phonon,
        },
        // β ñ has no Bohr frequency
        CouplingTerm {
            coefficient: beta,
            entries: (0..=nm)
                .flat_map(|n| (0..=nm).map(move |m| (n, m)))
                .filter(|&(n, _)| n > 0)
                .map(|(n, m)| (p.index(n, m), p.index(n, m), n as f64))
                .collect(),
        },
    ];
    // grouping must resolve Kerr-split lines, whose spacing is 2χ
    let tol = FREQUENCY_GROUPING_TOL * p.omega_a;
    let mut omitted = Vec::new();
    let mut transitions = compile_transitions(&energies, &side_a, device.side_a(), tol, &mut omitted, "a");
    transitions.extend(compile_transitions(&energies, &side_b, device.side_b(), tol, &mut omitted, "b"));
    let truncation_edge = (0..=nm)
        .flat_map(|n| (0..=nm).map(move |m| (n, m)))
        .filter(|&(n, m)| n == nm || m == nm)
        .map(|(n, m)| p.index(n, m))
        .collect();
    Ok(DressedModel {
        system: SystemParams::Oms(*p),
        device,
        hamiltonian: CMatrix::from_diagonal(&energies),
        energies,
        transitions,
        truncation_edge,
        omitted,
    })
}

pub fn dress(system: &SystemParams, device: Device) -> Result<DressedModel, ModelError> {
    match system {
        SystemParams::Qubits(p) => dress_two_qubit(p, device),
        SystemParams::Oms(p) => dress_oms(p, device),
    }
}

/// Hard-mask filter choices for the side-a baths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FilterPreset {
    /// No filtering.
    #[serde(alias = "none")]
    Unfiltered,
    /// Diode: `L` sees `ω_a` and `ω_a + Ω` only.
    Fig2c,
    /// Transistor: `E` sees `ω_a - Ω`, `C` sees `ω_a`.
    Fig4c,
    /// Transistor: `E` sees `ω_a - Ω` and `ω_a`, `C` sees `ω_a`.
    #[serde(alias = "figDc")]
    Fig6c,
}

impl FilterPreset {
    pub fn name(self) -> &'static str {
        match self {
            FilterPreset::Unfiltered => "unfiltered",
            FilterPreset::Fig2c => "fig2c",
            FilterPreset::Fig4c => "fig4c",
            FilterPreset::Fig6c => "fig6c",
        }
    }

    /// Line centres admitted for `label`, or `None` if the bath stays unmasked.
    pub fn lines(self, system: &SystemParams, label: BathLabel) -> Option<Vec<f64>> {
        let a = system.omega_a();
        let w = system.line_spacing();
        match (self, label) {
            (FilterPreset::Fig2c, BathLabel::L) => Some(vec![a, a + w]),
            (FilterPreset::Fig4c, BathLabel::E) => Some(vec![a - w]),
            (FilterPreset::Fig4c, BathLabel::C) => Some(vec![a]),
            (FilterPreset::Fig6c, BathLabel::E) => Some(vec![a - w, a]),
            (FilterPreset::Fig6c, BathLabel::C) => Some(vec![a]),
            _ => None,
        }
    }

    /// Wraps `density` in the hard mask this preset assigns to `label`.
    pub fn apply(self, system: &SystemParams, label: BathLabel, density: SpectralDensity) -> Result<SpectralDensity, ModelError> {
        match self.lines(system, label) {
            None => Ok(density),
            Some(lines) => {
                let hw = MASK_HALF_WIDTH * system.line_spacing();
                let windows = lines.into_iter().map(|c| Window::around(c, hw)).collect();
                Ok(density.masked(windows)?)
            }
        }
    }
}

impl fmt::Display for FilterPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Baths with a common density `κ ω` and the preset's masks.
pub fn preset_baths(system: &SystemParams, preset: FilterPreset, kappa: f64, temperatures: &[(BathLabel, f64)]) -> Result<Vec<BathSpec>, ModelError> {
    temperatures
        .iter()
        .map(|&(label, t)| {
            let density = preset.apply(system, label, SpectralDensity::ohmic(kappa))?;
            Ok(BathSpec::new(label, t, density)?)
        })
        .collect()
}

/// One closed loop of bath-induced transitions.
#[derive(Debug, Clone, PartialEq)]
pub struct RamanCycle {
    /// States visited, closing back on the first (0-based indices).
    pub states: Vec<usize>,
    pub baths: Vec<BathLabel>,
    /// Product of the rates along the listed orientation.
    pub forward_rate: f64,
    /// Product of the rates around the inverse cycle.
    pub reverse_rate: f64,
    /// Net energy received by each bath per traversal.
    pub heat: BTreeMap<BathLabel, f64>,
}

impl RamanCycle {
    pub fn unidirectional(&self) -> bool {
        (self.forward_rate > 0.0) != (self.reverse_rate > 0.0)
    }

    /// `(4124)`-style label in 1-based state numbers.
    pub fn label(&self, model: &DressedModel) -> String {
        let mut s = String::from("(");
        for (k, &i) in self.states.iter().enumerate() {
            if k > 0 && matches!(model.system, SystemParams::Oms(_)) {
                s.push(' ');
            }
            s.push_str(&model.state_name(i));
        }
        s.push_str(&model.state_name(self.states[0]));
        s.push(')');
        s
    }
}

/// Cycles sharing the same multiset of (bath, Bohr frequency) steps.
#[derive(Debug, Clone)]
pub struct CycleFamily {
    pub steps: Vec<(BathLabel, f64)>,
    pub cycles: Vec<RamanCycle>,
}

impl CycleFamily {
    pub fn unidirectional(&self) -> bool {
        self.cycles.iter().all(RamanCycle::unidirectional)
    }
}

#[derive(Debug, Clone)]
pub struct CycleReport {
    pub cycles: Vec<RamanCycle>,
    pub families: Vec<CycleFamily>,
}

#[derive(Debug, Clone, Copy)]
struct Edge {
    bath: BathLabel,
    frequency: f64,
    /// rate for upper -> lower and lower -> upper
    down: f64,
    up: f64,
    upper: usize,
}

/// Enumerates the heat-carrying 3- and 4-cycles allowed by the bath rates.
pub fn raman_cycle_audit(model: &DressedModel, baths: &[BathSpec]) -> Result<CycleReport, ModelError> {
    let d = model.dimension();
    let mut edges: BTreeMap<(usize, usize), Vec<Edge>> = BTreeMap::new();
    for t in &model.transitions {
        let bath = baths.iter().find(|b| b.label == t.bath).ok_or(ModelError::UnknownBath(t.bath))?;
        let down = kms_rate(bath, t.frequency)? * t.weight;
        let up = kms_rate(bath, -t.frequency)? * t.weight;
        if down == 0.0 && up == 0.0 {
            continue;
        }
        for &(u, l, a) in &t.pairs {
            let key = (u.min(l), u.max(l));
            edges.entry(key).or_default().push(Edge {
                bath: t.bath,
                frequency: t.frequency,
                down: down * a * a,
                up: up * a * a,
                upper: u,
            });
        }
    }
    let neighbours: Vec<BTreeSet<usize>> = (0..d)
        .map(|i| {
            edges
                .keys()
                .filter_map(|&(a, b)| if a == i { Some(b) } else if b == i { Some(a) } else { None })
                .collect()
        })
        .collect();

    // simple cycles of length 3 and 4, each state set visited once per orientation class
    let mut loops: Vec<Vec<usize>> = Vec::new();
    for start in 0..d {
        let mut path = vec![start];
        extend_paths(start, &neighbours, &mut path, &mut loops);
    }

    let tol = model.grouping_tolerance();
    let mut cycles = Vec::new();
    for states in loops {
        let n = states.len();
        let step_edges: Vec<&Vec<Edge>> = (0..n)
            .map(|k| {
                let (a, b) = (states[k], states[(k + 1) % n]);
                &edges[&(a.min(b), a.max(b))]
            })
            .collect();
        // every choice of bath per step
        let mut choice = vec![0usize; n];
        loop {
            let chosen: Vec<Edge> = (0..n).map(|k| step_edges[k][choice[k]]).collect();
            let mut forward = 1.0;
            let mut reverse = 1.0;
            let mut heat: BTreeMap<BathLabel, f64> = BTreeMap::new();
            for k in 0..n {
                let e = chosen[k];
                let from = states[k];
                let going_down = from == e.upper;
                forward *= if going_down { e.down } else { e.up };
                reverse *= if going_down { e.up } else { e.down };
                let dq = if going_down { e.frequency } else { -e.frequency };
                *heat.entry(e.bath).or_insert(0.0) += dq;
            }
            let carries = heat.values().any(|q| q.abs() > tol);
            if carries && (forward > 0.0 || reverse > 0.0) {
                let baths: Vec<BathLabel> = chosen.iter().map(|e| e.bath).collect();
                let cycle = orient(states.clone(), baths, forward, reverse, heat);
                if !cycles.contains(&cycle) {
                    cycles.push(cycle);
                }
            }
            // odometer
            let mut k = 0;
            while k < n {
                choice[k] += 1;
                if choice[k] < step_edges[k].len() {
                    break;
                }
                choice[k] = 0;
                k += 1;
            }
            if k == n {
                break;
            }
        }
    }

    let mut families: Vec<CycleFamily> = Vec::new();
    for cycle in &cycles {
        let n = cycle.states.len();
        let mut steps: Vec<(BathLabel, f64)> = (0..n)
            .map(|k| {
                let (a, b) = (cycle.states[k], cycle.states[(k + 1) % n]);
                (cycle.baths[k], (model.energies[a] - model.energies[b]).abs())
            })
            .collect();
        steps.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)));
        let same = |f: &CycleFamily| {
            f.steps.len() == steps.len() && f.steps.iter().zip(&steps).all(|(p, q)| p.0 == q.0 && (p.1 - q.1).abs() <= tol)
        };
        match families.iter_mut().find(|f| same(f)) {
            Some(f) => f.cycles.push(cycle.clone()),
            None => families.push(CycleFamily {
                steps,
                cycles: vec![cycle.clone()],
            }),
        }
    }
    Ok(CycleReport { cycles, families })
}

fn extend_paths(start: usize, nb: &[BTreeSet<usize>], path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    let last = *path.last().unwrap();
    for &next in &nb[last] {
        if next == start && path.len() >= 3 {
            // keep one orientation: second element below the last
            if path[1] < path[path.len() - 1] {
                out.push(path.clone());
            }
            continue;
        }
        // start is the smallest index of the cycle
        if next <= start || path.contains(&next) || path.len() >= 4 {
            continue;
        }
        path.push(next);
        extend_paths(start, nb, path, out);
        path.pop();
    }
}

/// Orients a loop along its dominant direction and starts it at the lowest-energy state.
fn orient(mut states: Vec<usize>, mut baths: Vec<BathLabel>, mut forward: f64, mut reverse: f64, mut heat: BTreeMap<BathLabel, f64>) -> RamanCycle {
    let n = states.len();
    if reverse > forward {
        // reverse traversal: states s0 s_{n-1} ... s1, steps reversed
        let rs: Vec<usize> = std::iter::once(states[0]).chain(states[1..].iter().rev().copied()).collect();
        let rb: Vec<BathLabel> = (0..n).map(|k| baths[(n - 1 + n - k) % n]).collect();
        states = rs;
        baths = rb;
        std::mem::swap(&mut forward, &mut reverse);
        for q in heat.values_mut() {
            *q = -*q;
        }
    }
    let start = (0..n).max_by_key(|&k| states[k]).unwrap();
    states.rotate_left(start);
    baths.rotate_left(start);
    RamanCycle {
        states,
        baths,
        forward_rate: forward,
        reverse_rate: reverse,
        heat,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrixcore::{eigh, kron, pauli};
    use approx::assert_abs_diff_eq;

    #[test]
    fn two_qubit_derived_quantities() {
        let p = TwoQubitParams::new(1.0, 0.1, 0.35).unwrap();
        assert_abs_diff_eq!(p.big_omega(), 0.5f64.sqrt(), epsilon = 1e-7);
        assert_abs_diff_eq!(p.theta(), 7.0f64.atan(), epsilon = 1e-12);
        assert_abs_diff_eq!(p.theta(), 1.4288993, epsilon = 1e-7);
        assert_abs_diff_eq!(p.cos_theta().powi(2) + p.sin_theta().powi(2), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn figure_five_energies() {
        let p = TwoQubitParams::new(1.0, 0.01, 0.005).unwrap();
        assert_abs_diff_eq!(p.big_omega(), 0.0141421, epsilon = 1e-7);
        let e = p.energies();
        for (got, want) in e.iter().zip([0.5070711, 0.4929289, -0.4929289, -0.5070711]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-7);
        }
    }

    /// `exp(-iθ/2 σ_a^z σ_b^y)`.
    fn dressing_unitary(p: &TwoQubitParams) -> CMatrix {
        let zy = kron(&pauli::z(), &pauli::y());
        let half = 0.5 * p.theta();
        let mut u = CMatrix::identity(4).scale_real(half.cos());
        u.add_scaled(Complex64::new(0.0, -half.sin()), &zy);
        u
    }

    fn bare_hamiltonian(p: &TwoQubitParams) -> CMatrix {
        let i2 = CMatrix::identity(2);
        let mut h = kron(&pauli::z(), &i2).scale_real(0.5 * p.omega_a);
        h.add_scaled(Complex64::new(0.5 * p.omega_b, 0.0), &kron(&i2, &pauli::z()));
        h.add_scaled(Complex64::new(p.g, 0.0), &kron(&pauli::z(), &pauli::x()));
        h
    }

    #[test]
    fn unitary_diagonalizes_hamiltonian() {
        for g in [0.0, 0.05, 0.35, -0.2] {
            let p = TwoQubitParams::new(1.0, 0.1, g).unwrap();
            let u = dressing_unitary(&p);
            let d = &(&u.adjoint() * &bare_hamiltonian(&p)) * &u;
            let want = CMatrix::from_diagonal(&p.energies());
            assert!((&d - &want).max_abs() < 1e-12, "g={g}: {d:?}");
            let ev = eigh(&bare_hamiltonian(&p)).unwrap().eigenvalues;
            let mut sorted = p.energies();
            sorted.sort_by(f64::total_cmp);
            for (a, b) in ev.iter().zip(sorted) {
                assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn coupling_table_matches_transformed_operators() {
        // ⟨lower| U† X U |upper⟩ must equal the tabulated amplitude × coefficient
        let p = TwoQubitParams::new(1.0, 0.3, 0.2).unwrap();
        let u = dressing_unitary(&p);
        let m = dress_two_qubit(&p, Device::Diode).unwrap();
        let i2 = CMatrix::identity(2);
        for (label, bare) in [(BathLabel::L, kron(&pauli::x(), &i2)), (BathLabel::R, kron(&i2, &pauli::x()))] {
            let x = &(&u.adjoint() * &bare) * &u;
            let mut table = CMatrix::zeros(4, 4);
            for t in m.transitions_for(label) {
                let c = t.weight.sqrt();
                for &(up, lo, a) in &t.pairs {
                    table[(lo, up)] += Complex64::new(c * a, 0.0);
                }
            }
            for up in 0..4 {
                for lo in 0..4 {
                    if m.energies[up] - m.energies[lo] > 1e-9 {
                        assert_abs_diff_eq!(x[(lo, up)].norm(), table[(lo, up)].norm(), epsilon = 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn decoupled_qubits_have_bare_channels() {
        let p = TwoQubitParams::new(1.0, 0.1, 0.0).unwrap();
        let m = dress_two_qubit(&p, Device::Diode).unwrap();
        let l: Vec<_> = m.transitions_for(BathLabel::L).collect();
        assert_eq!(l.len(), 1);
        assert_eq!(l[0].weight, 1.0);
        assert_abs_diff_eq!(l[0].frequency, 1.0, epsilon = 1e-15);
        let r: Vec<_> = m.transitions_for(BathLabel::R).collect();
        assert_eq!(r.len(), 1);
        assert_abs_diff_eq!(r[0].frequency, 0.1, epsilon = 1e-15);
    }

    #[test]
    fn a_side_weights_sum_to_one() {
        let p = TwoQubitParams::new(1.0, 0.1, 0.35).unwrap();
        let m = dress_two_qubit(&p, Device::Diode).unwrap();
        let ws: Vec<(f64, f64)> = m.transitions_for(BathLabel::L).map(|t| (t.frequency, t.weight)).collect();
        assert_eq!(ws.len(), 3);
        let c2 = p.cos_theta().powi(2);
        let s2 = p.sin_theta().powi(2);
        assert_abs_diff_eq!(ws[0].0, p.omega_minus(), epsilon = 1e-12);
        assert_abs_diff_eq!(ws[1].0, p.omega_a, epsilon = 1e-12);
        assert_abs_diff_eq!(ws[2].0, p.omega_plus(), epsilon = 1e-12);
        assert_abs_diff_eq!(ws[0].1, s2, epsilon = 1e-14);
        assert_abs_diff_eq!(ws[1].1, c2, epsilon = 1e-14);
        assert_abs_diff_eq!(ws[2].1, s2, epsilon = 1e-14);
        assert_abs_diff_eq!(c2 + s2, 1.0, epsilon = 1e-12);
        assert!(!m.omitted.is_empty());
    }

    #[test]
    fn oms_energies_and_weights() {
        let p = OmsParams::new(1.0, 0.01, 0.005, 4).unwrap();
        assert_abs_diff_eq!(p.beta(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p.energy(2, 0) - 2.0, -0.01, epsilon = 1e-15);
        let m = dress_oms(&p, Device::Diode).unwrap();
        assert!(m.transitions_for(BathLabel::R).all(|t| t.weight == 1.0 && (t.frequency - 0.01).abs() < 1e-12));
        let free = dress_oms(&OmsParams::new(1.0, 0.01, 0.0, 4).unwrap(), Device::Diode).unwrap();
        for n in 0..=4 {
            for mm in 0..=4 {
                assert_eq!(free.energies[p.index(n, mm)], n as f64 + 0.01 * mm as f64);
            }
        }
        assert_eq!(free.transitions_for(BathLabel::L).count(), 1);
    }

    #[test]
    fn diode_filter_leaves_one_family() {
        let p = TwoQubitParams::new(1.0, 0.1, 0.35).unwrap();
        let sys = SystemParams::Qubits(p);
        let m = dress_two_qubit(&p, Device::Diode).unwrap();
        let baths = preset_baths(&sys, FilterPreset::Fig2c, 0.001, &[(BathLabel::L, 2.0), (BathLabel::R, 0.2)]).unwrap();
        let report = raman_cycle_audit(&m, &baths).unwrap();
        assert_eq!(report.families.len(), 1);
        let labels: Vec<String> = report.cycles.iter().map(|c| c.label(&m)).collect();
        assert!(labels.contains(&"(4124)".to_string()), "{labels:?}");
    }

    #[test]
    fn unfiltered_cycles_all_bidirectional() {
        let p = TwoQubitParams::new(1.0, 0.1, 0.35).unwrap();
        let sys = SystemParams::Qubits(p);
        let m = dress_two_qubit(&p, Device::Diode).unwrap();
        let baths = preset_baths(&sys, FilterPreset::Unfiltered, 0.001, &[(BathLabel::L, 2.0), (BathLabel::R, 0.2)]).unwrap();
        let report = raman_cycle_audit(&m, &baths).unwrap();
        assert!(report.families.len() >= 2);
        assert!(report.cycles.iter().all(|c| !c.unidirectional()));
    }

    #[test]
    fn transistor_filter_cycles() {
        let p = TwoQubitParams::new(1.0, 0.01, 0.005).unwrap();
        let sys = SystemParams::Qubits(p);
        let m = dress_two_qubit(&p, Device::Transistor).unwrap();
        let baths = preset_baths(
            &sys,
            FilterPreset::Fig4c,
            0.001,
            &[(BathLabel::E, 1.0), (BathLabel::C, 0.01), (BathLabel::B, 0.1)],
        )
        .unwrap();
        let report = raman_cycle_audit(&m, &baths).unwrap();
        let mut labels: Vec<String> = report.cycles.iter().map(|c| c.label(&m)).collect();
        labels.sort();
        assert_eq!(report.cycles.len(), 2);
        assert!(report.cycles.iter().all(|c| c.states.len() == 3));
        let sets: Vec<BTreeSet<usize>> = report.cycles.iter().map(|c| c.states.iter().copied().collect()).collect();
        assert!(sets.contains(&[1, 2, 3].into_iter().collect()), "{labels:?}");
        assert!(sets.contains(&[0, 1, 2].into_iter().collect()), "{labels:?}");
    }
}
