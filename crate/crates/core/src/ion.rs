//! Trapped-ion parameters ↔ simulated Dirac parameters, the ion-side
//! Hamiltonians as coefficient tables, and experimental validity checks.
//!
//! Ion quantities carry ħ explicitly; the simulation side uses whatever
//! energy unit the numbers are given in.

use std::fmt;

use nalgebra::{Matrix3, Matrix4};

use crate::bag::BagParams;
use crate::dirac::{dirac_hamiltonian_3p1, SimParams};
use crate::error::{Error, Result};
use crate::expm::Mat4;
use crate::klein::KleinParams;
use crate::pauli::{sigma_x, sigma_y, sigma_z, Mat2};
use crate::C64;

/// Lamb–Dicke parameters above this make the sideband expansion unreliable.
pub const LAMB_DICKE_MAX: f64 = 0.1;
/// `Δ₃ / (ηΩ₃⟨a†+a⟩)` must reach this for the dispersive potential.
pub const DISPERSIVE_MIN_RATIO: f64 = 10.0;

/// Coupling of the internal levels to one motional mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeCoupling {
    pub eta: f64,
    /// Ground-state spread of the mode.
    pub delta: f64,
    /// Sideband Rabi frequency on this mode.
    pub omega_tilde: f64,
    pub nu: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IonParams {
    pub hbar: f64,
    pub eta: f64,
    pub delta: f64,
    pub omega_tilde: f64,
    /// Carrier Rabi frequency.
    pub omega: f64,
    /// Trap frequency.
    pub nu: f64,
    /// Centre-of-mass mode; falls back to the base coupling when absent.
    pub cm: Option<ModeCoupling>,
    /// Stretch mode of a two-ion crystal.
    pub st: Option<ModeCoupling>,
    /// Relative mode of a three-ion crystal.
    pub r: Option<ModeCoupling>,
    /// Third mode of a three-ion crystal.
    pub three: Option<ModeCoupling>,
    /// Drive producing the linear Klein potential.
    pub omega_0: Option<f64>,
    /// Dispersive drive on the mediating ion.
    pub omega_3: Option<f64>,
    pub delta_3: Option<f64>,
}

impl IonParams {
    pub fn new(hbar: f64, eta: f64, delta: f64, omega_tilde: f64, omega: f64, nu: f64) -> Result<Self> {
        let ip = Self {
            hbar,
            eta,
            delta,
            omega_tilde,
            omega,
            nu,
            cm: None,
            st: None,
            r: None,
            three: None,
            omega_0: None,
            omega_3: None,
            delta_3: None,
        };
        ip.validate()?;
        Ok(ip)
    }

    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        let positive = [("hbar", self.hbar), ("eta", self.eta), ("Delta", self.delta)];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                bad.push(format!("{name} = {v} must be positive"));
            }
        }
        let mut non_negative = vec![("Omega_tilde", self.omega_tilde), ("Omega", self.omega), ("nu", self.nu)];
        for (name, v) in [("Omega_0", self.omega_0), ("Omega_3", self.omega_3), ("Delta_3", self.delta_3)] {
            if let Some(v) = v {
                non_negative.push((name, v));
            }
        }
        for (name, m) in [("cm", self.cm), ("st", self.st), ("r", self.r), ("3", self.three)] {
            if let Some(m) = m {
                if !(m.eta.is_finite() && m.eta > 0.0 && m.delta.is_finite() && m.delta > 0.0) {
                    bad.push(format!("mode {name}: eta and Delta must be positive"));
                }
                if !(m.omega_tilde.is_finite() && m.omega_tilde >= 0.0 && m.nu.is_finite() && m.nu >= 0.0) {
                    bad.push(format!("mode {name}: couplings must be non-negative"));
                }
            }
        }
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                bad.push(format!("{name} = {v} must be non-negative"));
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(bad.join("; ")))
        }
    }

    /// The base coupling viewed as a mode.
    pub fn base_mode(&self) -> ModeCoupling {
        ModeCoupling { eta: self.eta, delta: self.delta, omega_tilde: self.omega_tilde, nu: self.nu }
    }

    pub fn cm_mode(&self) -> ModeCoupling {
        self.cm.unwrap_or_else(|| self.base_mode())
    }

    /// Two-ion stretch mode; defaults to the base coupling at `√3 ν`.
    pub fn st_mode(&self) -> ModeCoupling {
        self.st.unwrap_or(ModeCoupling { nu: 3f64.sqrt() * self.nu, ..self.base_mode() })
    }

    pub fn r_mode(&self) -> ModeCoupling {
        self.r.unwrap_or_else(|| self.base_mode())
    }

    pub fn with_klein_drive(mut self, omega_0: f64) -> Self {
        self.omega_0 = Some(omega_0);
        self
    }

    pub fn with_dispersive_drive(mut self, omega_3: f64, delta_3: f64) -> Self {
        self.omega_3 = Some(omega_3);
        self.delta_3 = Some(delta_3);
        self
    }
}

/// `2ηΔΩ̃`, the speed of light a sideband pair produces on one mode.
pub fn mode_speed(m: &ModeCoupling) -> f64 {
    2.0 * m.eta * m.delta * m.omega_tilde
}

/// `c = 2ηΔΩ̃`, `mc² = ħΩ`.
pub fn sim_from_ion(ip: &IonParams) -> Result<SimParams> {
    ip.validate()?;
    let c = mode_speed(&ip.base_mode());
    if c <= 0.0 {
        return Err(Error::Domain("zero sideband coupling gives c = 0".into()));
    }
    SimParams::new(c, ip.hbar * ip.omega / (c * c))
}

/// `α = ħ η_cm Ω̃₀ / Δ_cm`.
pub fn alpha_from_ion(ip: &IonParams) -> Result<f64> {
    let o0 = ip.omega_0.ok_or_else(|| Error::MissingParameter("Omega_0".into()))?;
    let cm = ip.cm_mode();
    Ok(ip.hbar * cm.eta * o0 / cm.delta)
}

/// `V₀ = (ħ η_cm Ω₃ / Δ_cm)² / (ħ Δ₃)`.
pub fn v0_from_ion(ip: &IonParams) -> Result<f64> {
    let o3 = ip.omega_3.ok_or_else(|| Error::MissingParameter("Omega_3".into()))?;
    let d3 = ip.delta_3.ok_or_else(|| Error::MissingParameter("Delta_3".into()))?;
    if d3 <= 0.0 {
        return Err(Error::Domain("Delta_3 must be positive for a dispersive potential".into()));
    }
    let cm = ip.cm_mode();
    Ok((ip.hbar * cm.eta * o3 / cm.delta).powi(2) / (ip.hbar * d3))
}

/// What a simulation asks of the ions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimTarget {
    pub params: SimParams,
    pub alpha: Option<f64>,
    pub v0: Option<f64>,
}

/// Everything an ion configuration produces on the simulation side.
pub fn simulation_target(ip: &IonParams) -> Result<SimTarget> {
    Ok(SimTarget {
        params: sim_from_ion(ip)?,
        alpha: if ip.omega_0.is_some() { Some(alpha_from_ion(ip)?) } else { None },
        v0: if ip.omega_3.is_some() { Some(v0_from_ion(ip)?) } else { None },
    })
}

/// Hardware quantities held fixed when inverting the mapping; drive
/// strengths are solved for.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FixedHardware {
    pub hbar: f64,
    pub eta: f64,
    pub delta: f64,
    pub nu: f64,
    pub delta_3: Option<f64>,
    pub max_omega_tilde: Option<f64>,
    pub max_omega_3: Option<f64>,
}

impl FixedHardware {
    pub fn new(eta: f64, delta: f64) -> Self {
        Self { hbar: 1.0, eta, delta, nu: 1.0, delta_3: None, max_omega_tilde: None, max_omega_3: None }
    }
}

pub fn ion_from_sim(target: &SimTarget, fixed: &FixedHardware) -> Result<IonParams> {
    let c = target.params.c;
    let omega_tilde = c / (2.0 * fixed.eta * fixed.delta);
    if let Some(max) = fixed.max_omega_tilde {
        if omega_tilde > max {
            return Err(Error::Infeasible(format!(
                "c = {c} needs Omega_tilde = {omega_tilde:.6e} above the available {max:.6e}"
            )));
        }
    }
    let omega = target.params.rest_energy() / fixed.hbar;
    let mut ip = IonParams::new(fixed.hbar, fixed.eta, fixed.delta, omega_tilde, omega, fixed.nu)?;
    if let Some(alpha) = target.alpha {
        ip.omega_0 = Some(alpha * fixed.delta / (fixed.hbar * fixed.eta));
    }
    if let Some(v0) = target.v0 {
        let d3 = fixed.delta_3.ok_or_else(|| Error::MissingParameter("Delta_3".into()))?;
        let o3 = (v0 * fixed.hbar * d3).sqrt() * fixed.delta / (fixed.hbar * fixed.eta);
        if let Some(max) = fixed.max_omega_3 {
            if o3 > max {
                return Err(Error::Infeasible(format!("V0 = {v0} needs Omega_3 = {o3:.6e} above the available {max:.6e}")));
            }
        }
        ip.omega_3 = Some(o3);
        ip.delta_3 = Some(d3);
    }
    ip.validate()?;
    Ok(ip)
}

/// `2√(N η² Ω̃² + Ω²)`, the ZB frequency in terms of the phonon number.
pub fn zb_ion_frequency(n_phonons: f64, ip: &IonParams) -> f64 {
    2.0 * (n_phonons.max(0.0) * (ip.eta * ip.omega_tilde).powi(2) + ip.omega * ip.omega).sqrt()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidityReport {
    pub eta: f64,
    pub lamb_dicke_ok: bool,
    /// `Δ₃ / (η Ω₃ · 2√n)`; absent without a dispersive drive.
    pub dispersive_ratio: Option<f64>,
    pub dispersive_ok: Option<bool>,
    pub notes: Vec<String>,
}

impl ValidityReport {
    pub fn all_ok(&self) -> bool {
        self.lamb_dicke_ok && self.dispersive_ok.unwrap_or(true)
    }
}

impl fmt::Display for ValidityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "lamb_dicke: eta={} ok={}", self.eta, self.lamb_dicke_ok)?;
        match (self.dispersive_ratio, self.dispersive_ok) {
            (Some(r), Some(ok)) => writeln!(f, "dispersive: ratio={r:.6} ok={ok}")?,
            _ => writeln!(f, "dispersive: not configured")?,
        }
        for n in &self.notes {
            writeln!(f, "note: {n}")?;
        }
        Ok(())
    }
}

/// Lamb–Dicke and dispersive-limit checks at a phonon budget of
/// `n_max_phonons` (bounding `⟨a† + a⟩` by `2√n`).
pub fn validity_check(ip: &IonParams, n_max_phonons: u32) -> Result<ValidityReport> {
    if n_max_phonons < 1 {
        return Err(Error::Config("n_max_phonons must be at least 1".into()));
    }
    let mut notes = Vec::new();
    let eta = ip.cm.map_or(ip.eta, |m| m.eta.max(ip.eta));
    let lamb_dicke_ok = eta <= LAMB_DICKE_MAX;
    if !lamb_dicke_ok {
        notes.push(format!("eta = {eta} exceeds {LAMB_DICKE_MAX}; sideband Hamiltonians are unreliable"));
    }
    let (dispersive_ratio, dispersive_ok) = match (ip.omega_3, ip.delta_3) {
        (Some(o3), Some(d3)) => {
            let cm = ip.cm_mode();
            let bound = cm.eta * o3 * 2.0 * (n_max_phonons as f64).sqrt();
            let ratio = if bound > 0.0 { d3 / bound } else { f64::INFINITY };
            let ok = ratio >= DISPERSIVE_MIN_RATIO;
            if !ok {
                notes.push(format!(
                    "dispersive ratio {ratio:.3} is below {DISPERSIVE_MIN_RATIO}; raise Delta_3 to at least {:.6e}",
                    DISPERSIVE_MIN_RATIO * bound
                ));
            }
            (Some(ratio), Some(ok))
        }
        _ => (None, None),
    };
    Ok(ValidityReport { eta, lamb_dicke_ok, dispersive_ratio, dispersive_ok, notes })
}

/// Normal-mode coordinates of a three-ion crystal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalModes {
    pub q_cm: f64,
    pub p_cm: f64,
    pub q_r: f64,
    pub p_r: f64,
    pub q_3: f64,
    pub p_3: f64,
}

/// Rows give `Q_cm`, `Q_r`, `Q_3` in terms of `x₁, x₂, x₃`.
pub fn normal_mode_matrix() -> Matrix3<f64> {
    let (s2, s3, s6) = (2f64.sqrt(), 3f64.sqrt(), 6f64.sqrt());
    Matrix3::new(
        1.0 / s3, 1.0 / s3, 1.0 / s3,
        -1.0 / s2, 0.0, 1.0 / s2,
        1.0 / s6, -2.0 / s6, 1.0 / s6,
    )
}

pub fn normal_modes_3ions(x: [f64; 3], p: [f64; 3]) -> NormalModes {
    let m = normal_mode_matrix();
    let q = m * nalgebra::Vector3::from(x);
    let k = m * nalgebra::Vector3::from(p);
    NormalModes { q_cm: q[0], p_cm: k[0], q_r: q[1], p_r: k[1], q_3: q[2], p_3: k[2] }
}

// ---------------------------------------------------------------------------
// Coefficient tables

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Internal levels of the four-level ion encoding a 3+1 spinor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    A,
    B,
    C,
    D,
}

impl Level {
    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Spin {
    Identity,
    /// `σ^{ij}_x = |i⟩⟨j| + |j⟩⟨i|`, `σ^{ij}_y = −i|i⟩⟨j| + i|j⟩⟨i|`.
    Transition(Level, Level, Axis),
    /// Pauli matrix on ion `k` (1-based, as in a chain).
    Ion(u8, Axis),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    X,
    Y,
    Z,
    Cm,
    St,
    R,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModeOp {
    Identity,
    Momentum(Mode),
    Position(Mode),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IonTerm {
    pub spin: Spin,
    pub mode: ModeOp,
    pub coefficient: f64,
    /// The coupling the coefficient was built from, e.g. `2ηΔΩ̃`.
    pub label: &'static str,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HamiltonianKind {
    Dirac3p1,
    Klein2p1,
    Bag,
}

impl std::str::FromStr for HamiltonianKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dirac3p1" => Ok(Self::Dirac3p1),
            "klein2p1" => Ok(Self::Klein2p1),
            "bag" => Ok(Self::Bag),
            _ => Err(Error::Config(format!("unknown Hamiltonian kind `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IonHamiltonian {
    pub kind: HamiltonianKind,
    pub terms: Vec<IonTerm>,
}

fn term(spin: Spin, mode: ModeOp, coefficient: f64, label: &'static str) -> IonTerm {
    IonTerm { spin, mode, coefficient, label }
}

pub fn build_ion_hamiltonian(kind: HamiltonianKind, ip: &IonParams) -> Result<IonHamiltonian> {
    use Axis::*;
    use Level::*;
    ip.validate()?;
    let e_carrier = ip.hbar * ip.omega;
    let terms = match kind {
        HamiltonianKind::Dirac3p1 => {
            let s = mode_speed(&ip.base_mode());
            let l = "2ηΔΩ̃";
            let (px, py, pz) = (ModeOp::Momentum(Mode::X), ModeOp::Momentum(Mode::Y), ModeOp::Momentum(Mode::Z));
            vec![
                term(Spin::Transition(A, D, X), px, s, l),
                term(Spin::Transition(B, C, X), px, s, l),
                term(Spin::Transition(A, D, Y), py, s, l),
                term(Spin::Transition(B, C, Y), py, -s, l),
                term(Spin::Transition(A, C, X), pz, s, l),
                term(Spin::Transition(B, D, X), pz, -s, l),
                term(Spin::Transition(A, C, Y), ModeOp::Identity, e_carrier, "ħΩ"),
                term(Spin::Transition(B, D, Y), ModeOp::Identity, e_carrier, "ħΩ"),
            ]
        }
        HamiltonianKind::Klein2p1 => {
            let o0 = ip.omega_0.ok_or_else(|| Error::MissingParameter("Omega_0".into()))?;
            let (cm, st) = (ip.cm_mode(), ip.st_mode());
            vec![
                term(Spin::Ion(1, X), ModeOp::Momentum(Mode::Cm), mode_speed(&cm), "2η_cmΔ_cmΩ̃_cm"),
                term(Spin::Ion(1, Y), ModeOp::Momentum(Mode::St), mode_speed(&st), "2η_stΔ_stΩ̃_st"),
                term(Spin::Ion(1, Z), ModeOp::Identity, e_carrier, "ħΩ"),
                term(Spin::Ion(2, X), ModeOp::Position(Mode::Cm), ip.hbar * cm.eta * o0 / cm.delta, "ħη_cmΩ̃₀/Δ_cm"),
            ]
        }
        HamiltonianKind::Bag => {
            let o3 = ip.omega_3.ok_or_else(|| Error::MissingParameter("Omega_3".into()))?;
            let d3 = ip.delta_3.ok_or_else(|| Error::MissingParameter("Delta_3".into()))?;
            let (cm, r) = (ip.cm_mode(), ip.r_mode());
            let (sc, sr) = (mode_speed(&cm), mode_speed(&r));
            vec![
                term(Spin::Ion(1, X), ModeOp::Momentum(Mode::Cm), sc, "2η_cmΔ_cmΩ̃_cm"),
                term(Spin::Ion(3, X), ModeOp::Momentum(Mode::Cm), -sc, "2η_cmΔ_cmΩ̃_cm"),
                term(Spin::Ion(1, X), ModeOp::Momentum(Mode::R), sr, "2η_rΔ_rΩ̃_r"),
                term(Spin::Ion(3, X), ModeOp::Momentum(Mode::R), sr, "2η_rΔ_rΩ̃_r"),
                term(Spin::Ion(1, Y), ModeOp::Identity, e_carrier, "ħΩ"),
                term(Spin::Ion(3, Y), ModeOp::Identity, e_carrier, "ħΩ"),
                term(Spin::Ion(2, X), ModeOp::Position(Mode::Cm), ip.hbar * cm.eta * o3 / cm.delta, "ħη_cmΩ₃/Δ_cm"),
                term(Spin::Ion(2, Z), ModeOp::Identity, ip.hbar * d3, "ħΔ₃"),
            ]
        }
    };
    Ok(IonHamiltonian { kind, terms })
}

/// Operators of the simulated model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SimOp {
    Identity,
    Px,
    Py,
    Pz,
    X,
    /// Relative momentum `p̃_r = (p₁ − p₃)/2`.
    PRel,
    /// `P̃_cm / 2`, a c-number.
    HalfPCm,
    /// `x̃_r²`.
    XRelSq,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimTerm {
    pub spin: Spin,
    pub op: SimOp,
    pub coefficient: f64,
}

fn same_speed(a: f64, b: f64, what: &str) -> Result<()> {
    if (a - b).abs() > 1e-12 * a.abs().max(b.abs()) {
        return Err(Error::Validation(format!("{what}: mode speeds differ ({a} vs {b}), no single c")));
    }
    Ok(())
}

/// Applies the mode ↔ coordinate identifications of each protocol and the
/// auxiliary-ion reductions, returning the simulated Hamiltonian's terms.
///
/// * `Klein2p1`: ion 2 prepared in σ_x = +1, so `σ_{x,2}` → 1; cm → x, st → y.
/// * `Bag`: `P_cm → p̃_r`, `p_r → P̃_cm/2`, `Q_cm → x̃_r`; ion 2 in σ_z = +1 and
///   eliminated in the dispersive limit, giving `g²/(ħΔ₃) x̃_r²` and dropping
///   the constant `ħΔ₃`.
pub fn reduce_to_simulation(h: &IonHamiltonian) -> Result<Vec<SimTerm>> {
    let mut out = Vec::new();
    let find = |spin: Spin, mode: ModeOp| {
        h.terms
            .iter()
            .find(|t| t.spin == spin && t.mode == mode)
            .map(|t| t.coefficient)
            .ok_or_else(|| Error::Validation(format!("table lacks the {spin:?} {mode:?} term")))
    };
    match h.kind {
        HamiltonianKind::Dirac3p1 => {
            for t in &h.terms {
                let op = match t.mode {
                    ModeOp::Identity => SimOp::Identity,
                    ModeOp::Momentum(Mode::X) => SimOp::Px,
                    ModeOp::Momentum(Mode::Y) => SimOp::Py,
                    ModeOp::Momentum(Mode::Z) => SimOp::Pz,
                    other => return Err(Error::Validation(format!("unexpected mode {other:?} in 3+1 table"))),
                };
                out.push(SimTerm { spin: t.spin, op, coefficient: t.coefficient });
            }
        }
        HamiltonianKind::Klein2p1 => {
            same_speed(
                find(Spin::Ion(1, Axis::X), ModeOp::Momentum(Mode::Cm))?,
                find(Spin::Ion(1, Axis::Y), ModeOp::Momentum(Mode::St))?,
                "klein2p1",
            )?;
            for t in &h.terms {
                let (spin, op) = match (t.spin, t.mode) {
                    (Spin::Ion(2, Axis::X), ModeOp::Position(Mode::Cm)) => (Spin::Identity, SimOp::X),
                    (s, ModeOp::Momentum(Mode::Cm)) => (s, SimOp::Px),
                    (s, ModeOp::Momentum(Mode::St)) => (s, SimOp::Py),
                    (s, ModeOp::Identity) => (s, SimOp::Identity),
                    (s, m) => return Err(Error::Validation(format!("unexpected term {s:?} {m:?} in Klein table"))),
                };
                out.push(SimTerm { spin, op, coefficient: t.coefficient });
            }
        }
        HamiltonianKind::Bag => {
            same_speed(
                find(Spin::Ion(1, Axis::X), ModeOp::Momentum(Mode::Cm))?,
                find(Spin::Ion(1, Axis::X), ModeOp::Momentum(Mode::R))?,
                "bag",
            )?;
            let g = find(Spin::Ion(2, Axis::X), ModeOp::Position(Mode::Cm))?;
            let e3 = find(Spin::Ion(2, Axis::Z), ModeOp::Identity)?;
            if e3 <= 0.0 {
                return Err(Error::Domain("dispersive elimination needs ħΔ₃ > 0".into()));
            }
            for t in &h.terms {
                let op = match (t.spin, t.mode) {
                    (Spin::Ion(2, _), _) => continue,
                    (_, ModeOp::Momentum(Mode::Cm)) => SimOp::PRel,
                    (_, ModeOp::Momentum(Mode::R)) => SimOp::HalfPCm,
                    (_, ModeOp::Identity) => SimOp::Identity,
                    (s, m) => return Err(Error::Validation(format!("unexpected term {s:?} {m:?} in bag table"))),
                };
                out.push(SimTerm { spin: t.spin, op, coefficient: t.coefficient });
            }
            out.push(SimTerm { spin: Spin::Identity, op: SimOp::XRelSq, coefficient: g * g / e3 });
        }
    }
    Ok(out)
}

/// Target 3+1 terms, read off the supersymmetric Dirac matrix by probing
/// `p = 0` and unit momenta and expanding each off-diagonal entry in
/// `σ^{ij}_x`, `σ^{ij}_y`.
pub fn dirac3p1_target_terms(sim: &SimParams) -> Vec<SimTerm> {
    let probes = [(SimOp::Identity, [0.0; 3]), (SimOp::Px, [1.0, 0.0, 0.0]), (SimOp::Py, [0.0, 1.0, 0.0]), (SimOp::Pz, [0.0, 0.0, 1.0])];
    let h0 = dirac_hamiltonian_3p1([0.0; 3], sim);
    let levels = [Level::A, Level::B, Level::C, Level::D];
    let mut out = Vec::new();
    for (op, p) in probes {
        let h = dirac_hamiltonian_3p1(p, sim);
        let part = if op == SimOp::Identity { h0 } else { h - h0 };
        for i in 0..4 {
            for j in i + 1..4 {
                let z = part[(i, j)];
                for (axis, v) in [(Axis::X, z.re), (Axis::Y, -z.im)] {
                    if v != 0.0 {
                        out.push(SimTerm { spin: Spin::Transition(levels[i], levels[j], axis), op, coefficient: v });
                    }
                }
            }
        }
    }
    out
}

/// `cσ_x p_x + cσ_y p_y + mc²σ_z + αx`, spinor carried by ion 1.
pub fn klein2p1_target_terms(kp: &KleinParams) -> Vec<SimTerm> {
    let c = kp.base.c;
    vec![
        SimTerm { spin: Spin::Ion(1, Axis::X), op: SimOp::Px, coefficient: c },
        SimTerm { spin: Spin::Ion(1, Axis::Y), op: SimOp::Py, coefficient: c },
        SimTerm { spin: Spin::Ion(1, Axis::Z), op: SimOp::Identity, coefficient: kp.base.rest_energy() },
        SimTerm { spin: Spin::Identity, op: SimOp::X, coefficient: kp.alpha },
    ]
}

/// The relative-coordinate bag Hamiltonian, particles as ions 1 and 3.
pub fn bag_target_terms(bp: &BagParams) -> Vec<SimTerm> {
    let (c, mc2) = (bp.base.c, bp.base.rest_energy());
    vec![
        SimTerm { spin: Spin::Ion(1, Axis::X), op: SimOp::PRel, coefficient: c },
        SimTerm { spin: Spin::Ion(3, Axis::X), op: SimOp::PRel, coefficient: -c },
        SimTerm { spin: Spin::Ion(1, Axis::X), op: SimOp::HalfPCm, coefficient: c },
        SimTerm { spin: Spin::Ion(3, Axis::X), op: SimOp::HalfPCm, coefficient: c },
        SimTerm { spin: Spin::Ion(1, Axis::Y), op: SimOp::Identity, coefficient: mc2 },
        SimTerm { spin: Spin::Ion(3, Axis::Y), op: SimOp::Identity, coefficient: mc2 },
        SimTerm { spin: Spin::Identity, op: SimOp::XRelSq, coefficient: bp.v0 },
    ]
}

/// Largest coefficient mismatch after merging duplicate `(spin, op)` keys.
/// Terms present on only one side count with their full size.
pub fn term_table_mismatch(a: &[SimTerm], b: &[SimTerm]) -> f64 {
    use std::collections::BTreeMap;
    let mut acc: BTreeMap<(Spin, SimOp), f64> = BTreeMap::new();
    for t in a {
        *acc.entry((t.spin, t.op)).or_default() += t.coefficient;
    }
    for t in b {
        *acc.entry((t.spin, t.op)).or_default() -= t.coefficient;
    }
    acc.values().fold(0.0, |m, v| m.max(v.abs()))
}

fn transition_matrix(i: Level, j: Level, axis: Axis) -> Matrix4<C64> {
    let mut m = Matrix4::zeros();
    let (i, j) = (i.index(), j.index());
    match axis {
        Axis::X => {
            m[(i, j)] = C64::new(1.0, 0.0);
            m[(j, i)] = C64::new(1.0, 0.0);
        }
        Axis::Y => {
            m[(i, j)] = C64::new(0.0, -1.0);
            m[(j, i)] = C64::new(0.0, 1.0);
        }
        Axis::Z => {
            m[(i, i)] = C64::new(1.0, 0.0);
            m[(j, j)] = C64::new(-1.0, 0.0);
        }
    }
    m
}

/// Matrix of 3+1 terms at momentum `p`, in the `a, b, c, d` basis.
pub fn dirac3p1_matrix(terms: &[SimTerm], p: [f64; 3]) -> Result<Matrix4<C64>> {
    let mut h = Matrix4::zeros();
    for t in terms {
        let Spin::Transition(i, j, axis) = t.spin else {
            return Err(Error::Validation(format!("{:?} is not a four-level transition", t.spin)));
        };
        let f = match t.op {
            SimOp::Identity => 1.0,
            SimOp::Px => p[0],
            SimOp::Py => p[1],
            SimOp::Pz => p[2],
            other => return Err(Error::Validation(format!("{other:?} does not appear in the 3+1 model"))),
        };
        h += transition_matrix(i, j, axis) * C64::from(t.coefficient * f);
    }
    Ok(h)
}

fn pauli(axis: Axis) -> Mat2 {
    match axis {
        Axis::X => sigma_x(),
        Axis::Y => sigma_y(),
        Axis::Z => sigma_z(),
    }
}

/// Spin block of bag terms (everything but `x̃_r²`) at relative momentum
/// `p_r` and total momentum `p_cm`, in the `spin₁ ⊗ spin₃` basis.
pub fn bag_block_from_terms(terms: &[SimTerm], p_r: f64, p_cm: f64) -> Result<Mat4> {
    let id = Mat2::identity();
    let mut h = Mat4::zeros();
    for t in terms {
        let f = match t.op {
            SimOp::Identity => 1.0,
            SimOp::PRel => p_r,
            SimOp::HalfPCm => 0.5 * p_cm,
            SimOp::XRelSq => continue,
            other => return Err(Error::Validation(format!("{other:?} does not appear in the bag model"))),
        };
        let (a, b) = match t.spin {
            Spin::Ion(1, ax) => (pauli(ax), id),
            Spin::Ion(3, ax) => (id, pauli(ax)),
            Spin::Identity => (id, id),
            s => return Err(Error::Validation(format!("{s:?} does not act on particles 1 and 3"))),
        };
        let k = Mat4::from_fn(|r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)]);
        h += k * C64::from(t.coefficient * f);
    }
    Ok(h)
}
