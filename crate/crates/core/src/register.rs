//! The three-qubit teleportation register and its time-parameterized dynamics.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmath::{
    c, identity, kron, partial_trace_mat, superop_from_action, CMat, CVec, DensityMatrix, RegisterLayout,
    Superoperator, UnitaryOp, UnitarySpectrum,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Wire {
    S,
    E1,
    E2,
}

impl Wire {
    pub const ALL: [Wire; 3] = [Wire::S, Wire::E1, Wire::E2];

    pub fn index(self) -> usize {
        match self {
            Wire::S => 0,
            Wire::E1 => 1,
            Wire::E2 => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateKind {
    Cnot { control: Wire, target: Wire },
    Hadamard(Wire),
    Swap(Wire, Wire),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GateSpec {
    pub kind: GateKind,
    /// 1-based position in the circuit.
    pub index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CircuitVariant {
    /// Teleportation back onto `S` through a final `SWAP(S,E1)`; 8 gates.
    SwapTerminated,
    /// Teleportation onto `E2`; 6 gates.
    OriginalBbc,
}

impl CircuitVariant {
    pub fn n_gates(self) -> usize {
        match self {
            CircuitVariant::SwapTerminated => 8,
            CircuitVariant::OriginalBbc => 6,
        }
    }

    /// Wire carrying the teleported state at the end of the circuit.
    pub fn output_wire(self) -> Wire {
        match self {
            CircuitVariant::SwapTerminated => Wire::S,
            CircuitVariant::OriginalBbc => Wire::E2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    /// `U(t) = 𝒰^t` on `[0, 1]` with the principal logarithm of the whole circuit.
    BlockLog,
    /// Gates switched on one at a time, gate `i` acting during `(i-1, i)`.
    GateByGate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DynamicsScheme {
    pub interpolation: Interpolation,
    pub variant: CircuitVariant,
}

impl DynamicsScheme {
    pub const BLOCK: DynamicsScheme =
        DynamicsScheme { interpolation: Interpolation::BlockLog, variant: CircuitVariant::SwapTerminated };
    pub const GATES: DynamicsScheme =
        DynamicsScheme { interpolation: Interpolation::GateByGate, variant: CircuitVariant::SwapTerminated };
    pub const BBC_GATES: DynamicsScheme =
        DynamicsScheme { interpolation: Interpolation::GateByGate, variant: CircuitVariant::OriginalBbc };

    pub fn new(interpolation: Interpolation, variant: CircuitVariant) -> Self {
        Self { interpolation, variant }
    }

    pub fn time_domain(&self) -> (f64, f64) {
        match self.interpolation {
            Interpolation::BlockLog => (0.0, 1.0),
            Interpolation::GateByGate => (0.0, self.variant.n_gates() as f64),
        }
    }

    pub fn contains(&self, t: f64) -> bool {
        let (a, b) = self.time_domain();
        t >= a && t <= b
    }
}

/// Werner mixing parameter `p ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct WernerParam(f64);

impl WernerParam {
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(format!("Werner parameter {p} outside [0, 1]")));
        }
        Ok(Self(p))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Pure input state of `S`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InputState {
    /// `α|0⟩ + √(1−α²)|1⟩`.
    Alpha { alpha: f64 },
    /// `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩`.
    Bloch { theta: f64, phi: f64 },
}

impl InputState {
    pub fn alpha(alpha: f64) -> Self {
        InputState::Alpha { alpha }
    }

    pub fn bloch(theta: f64, phi: f64) -> Self {
        InputState::Bloch { theta, phi: phi.rem_euclid(2.0 * PI) }
    }

    pub fn zero() -> Self {
        Self::alpha(1.0)
    }

    pub fn one() -> Self {
        Self::alpha(0.0)
    }

    pub fn plus() -> Self {
        Self::alpha(FRAC_1_SQRT_2)
    }

    /// Bloch angles `(θ, φ)`.
    pub fn angles(&self) -> (f64, f64) {
        match *self {
            InputState::Alpha { alpha } => (2.0 * alpha.clamp(0.0, 1.0).acos(), 0.0),
            InputState::Bloch { theta, phi } => (theta, phi),
        }
    }

    /// The orthogonal pure state (opposite point on the Bloch sphere).
    pub fn antipode(&self) -> Self {
        let (theta, phi) = self.angles();
        Self::bloch(PI - theta, phi + PI)
    }

    pub fn ket(&self) -> Result<CVec> {
        match *self {
            InputState::Alpha { alpha } => {
                if !(0.0..=1.0).contains(&alpha) {
                    return Err(Error::invalid(format!("alpha {alpha} outside [0, 1]")));
                }
                Ok(CVec::from_column_slice(&[c(alpha, 0.0), c((1.0 - alpha * alpha).max(0.0).sqrt(), 0.0)]))
            }
            InputState::Bloch { theta, phi } => {
                if !(0.0..=PI).contains(&theta) || !phi.is_finite() {
                    return Err(Error::invalid(format!("Bloch angles ({theta}, {phi}) out of range")));
                }
                let (s, co) = (theta / 2.0).sin_cos();
                Ok(CVec::from_column_slice(&[c(co, 0.0), num_complex::Complex64::from_polar(s, phi)]))
            }
        }
    }

    pub fn density(&self) -> Result<DensityMatrix> {
        DensityMatrix::from_ket(&self.ket()?)
    }
}

fn hadamard() -> CMat {
    CMat::from_row_slice(2, 2, &[c(1., 0.), c(1., 0.), c(1., 0.), c(-1., 0.)]).scale(FRAC_1_SQRT_2)
}

/// Permutation unitary sending basis state `b` to `f(digits(b))`.
fn permutation_gate(layout: &RegisterLayout, f: impl Fn(&mut [usize])) -> CMat {
    let n = layout.total_dim();
    let mut m = CMat::zeros(n, n);
    for b in 0..n {
        let mut d = layout.digits(b);
        f(&mut d);
        m[(layout.compose(&d), b)] = c(1.0, 0.0);
    }
    m
}

/// Embeds the gate on an arbitrary qubit layout.
pub fn gate_unitary(g: &GateSpec, layout: &RegisterLayout) -> Result<UnitaryOp> {
    let n = layout.n_wires();
    let check = |w: Wire| {
        if w.index() >= n || layout.dims()[w.index()] != 2 {
            Err(Error::invalid(format!("wire {w:?} is not a qubit of the layout")))
        } else {
            Ok(w.index())
        }
    };
    let m = match g.kind {
        GateKind::Hadamard(w) => {
            let w = check(w)?;
            (0..n).fold(identity(1), |acc, k| {
                let f = if k == w { hadamard() } else { identity(layout.dims()[k]) };
                kron(&acc, &f)
            })
        }
        GateKind::Cnot { control, target } => {
            let (cw, tw) = (check(control)?, check(target)?);
            if cw == tw {
                return Err(Error::invalid("CNOT control and target coincide"));
            }
            permutation_gate(layout, |d| {
                if d[cw] == 1 {
                    d[tw] ^= 1;
                }
            })
        }
        GateKind::Swap(a, b) => {
            let (a, b) = (check(a)?, check(b)?);
            if a == b {
                return Err(Error::invalid("SWAP wires coincide"));
            }
            permutation_gate(layout, |d| d.swap(a, b))
        }
    };
    Ok(UnitaryOp::from_trusted(m))
}

pub fn gate_sequence(variant: CircuitVariant) -> Vec<GateSpec> {
    use GateKind::*;
    use Wire::*;
    let head = [Cnot { control: S, target: E1 }, Hadamard(S), Cnot { control: E1, target: E2 }, Hadamard(E2)];
    let tail: &[GateKind] = match variant {
        CircuitVariant::SwapTerminated => &[Swap(E1, E2), Cnot { control: S, target: E1 }, Hadamard(E1), Swap(S, E1)],
        CircuitVariant::OriginalBbc => &[Cnot { control: S, target: E2 }, Hadamard(E2)],
    };
    head.iter().chain(tail).enumerate().map(|(i, &kind)| GateSpec { kind, index: i + 1 }).collect()
}

fn gate_unitaries(variant: CircuitVariant) -> Vec<UnitaryOp> {
    let layout = RegisterLayout::register();
    gate_sequence(variant).iter().map(|g| gate_unitary(g, &layout).expect("canonical gates are valid")).collect()
}

/// Ordered product of a slice of gates (first gate acts first).
fn product(gates: &[UnitaryOp]) -> UnitaryOp {
    gates.iter().fold(UnitaryOp::identity(8), |acc, g| g.compose(&acc))
}

/// `G_n ··· G_1`.
pub fn circuit_unitary(variant: CircuitVariant) -> UnitaryOp {
    product(&gate_unitaries(variant))
}

/// Blocks `[U₁, U₂, U₃]` of the SWAP-terminated circuit: gates 1–2, 3–5, 6–8.
pub fn block_unitaries() -> [UnitaryOp; 3] {
    let g = gate_unitaries(CircuitVariant::SwapTerminated);
    [product(&g[0..2]), product(&g[2..5]), product(&g[5..8])]
}

/// `p|φ⁺⟩⟨φ⁺| + (1−p)I/4`.
pub fn werner(p: WernerParam) -> DensityMatrix {
    let phi = &bell_basis()[0];
    let p = p.value();
    DensityMatrix::from_trusted((phi * phi.adjoint()).scale(p) + identity(4).scale((1.0 - p) / 4.0))
}

/// `[|φ⁺⟩, |φ⁻⟩, |ψ⁺⟩, |ψ⁻⟩]` with `|φ^±⟩ = (|00⟩ ± |11⟩)/√2`, `|ψ^±⟩ = (|01⟩ ± |10⟩)/√2`.
pub fn bell_basis() -> [CVec; 4] {
    let s = FRAC_1_SQRT_2;
    let k = |a: f64, b: f64, cc: f64, d: f64| CVec::from_column_slice(&[c(a, 0.), c(b, 0.), c(cc, 0.), c(d, 0.)]);
    [k(s, 0., 0., s), k(s, 0., 0., -s), k(0., s, s, 0.), k(0., s, -s, 0.)]
}

/// Time-evolution operator of a dynamics scheme, with the spectral data
/// needed for repeated evaluation cached.
#[derive(Debug, Clone)]
pub struct Propagator {
    scheme: DynamicsScheme,
    /// Per-gate spectra (gate-by-gate) or the single whole-circuit spectrum.
    spectra: Vec<UnitarySpectrum>,
    /// `prefix[i] = G_i ··· G_1`, `prefix[0] = I`.
    prefix: Vec<UnitaryOp>,
}

impl Propagator {
    pub fn new(scheme: DynamicsScheme) -> Self {
        let gates = gate_unitaries(scheme.variant);
        let mut prefix = vec![UnitaryOp::identity(8)];
        for g in &gates {
            let next = g.compose(prefix.last().expect("non-empty"));
            prefix.push(next);
        }
        let spectra = match scheme.interpolation {
            Interpolation::BlockLog => vec![prefix.last().expect("non-empty").clone()],
            Interpolation::GateByGate => gates,
        }
        .iter()
        .map(|u| UnitarySpectrum::new(u).expect("circuit operators are unitary"))
        .collect();
        Self { scheme, spectra, prefix }
    }

    pub fn scheme(&self) -> DynamicsScheme {
        self.scheme
    }

    pub fn total(&self) -> &UnitaryOp {
        self.prefix.last().expect("non-empty")
    }

    pub fn at(&self, t: f64) -> Result<UnitaryOp> {
        if !self.scheme.contains(t) {
            let (a, b) = self.scheme.time_domain();
            return Err(Error::invalid(format!("time {t} outside [{a}, {b}]")));
        }
        if t == 0.0 {
            return Ok(UnitaryOp::identity(8));
        }
        Ok(match self.scheme.interpolation {
            Interpolation::BlockLog => self.spectra[0].power(t),
            Interpolation::GateByGate => {
                let i = t.ceil() as usize;
                self.spectra[i - 1].power(t - (i - 1) as f64).compose(&self.prefix[i - 1])
            }
        })
    }

    pub fn joint_state(&self, psi: &InputState, p: WernerParam, t: f64) -> Result<DensityMatrix> {
        let u = self.at(t)?;
        let initial = psi.density()?.tensor(&werner(p));
        Ok(DensityMatrix::from_trusted(u.conjugate(initial.mat())))
    }

    /// Map from the input of `S` to the reduced state of `observed` at time `t`.
    pub fn reduced_map(&self, p: WernerParam, t: f64, observed: Wire) -> Result<Superoperator> {
        Ok(reduced_map(&self.at(t)?, p, observed))
    }
}

pub fn propagator(scheme: DynamicsScheme, t: f64) -> Result<UnitaryOp> {
    Propagator::new(scheme).at(t)
}

pub fn joint_state(psi: &InputState, p: WernerParam, scheme: DynamicsScheme, t: f64) -> Result<DensityMatrix> {
    Propagator::new(scheme).joint_state(psi, p, t)
}

/// `ρ_S ↦ Tr_{¬observed}[U(ρ_S ⊗ W(p))U†]`.
pub fn reduced_map(u: &UnitaryOp, p: WernerParam, observed: Wire) -> Superoperator {
    let layout = RegisterLayout::register();
    let w = werner(p);
    let keep = [observed.index()];
    superop_from_action(|rho_s| partial_trace_mat(&u.conjugate(&kron(rho_s, w.mat())), &layout, &keep), 2)
}

/// Dynamical map of `S` at time `t`.
pub fn system_map(scheme: DynamicsScheme, p: WernerParam, t: f64) -> Result<Superoperator> {
    Ok(reduced_map(&propagator(scheme, t)?, p, Wire::S))
}

/// Reduced state of `E2` along the gate-by-gate original circuit.
pub fn e2_reduced_state(psi: &InputState, p: WernerParam, t: f64) -> Result<DensityMatrix> {
    let rho = joint_state(psi, p, DynamicsScheme::BBC_GATES, t)?;
    Ok(DensityMatrix::from_trusted(partial_trace_mat(rho.mat(), &RegisterLayout::register(), &[2])))
}
