//! Effective one-qubit channel of the SWAP-terminated circuit.
//!
//! With a Werner resource the whole circuit acts on `S` as a depolarizing
//! channel `ρ ↦ pρ + (1−p)I/2`. This module exposes both routes to it: the
//! Bell-sandwich operators `⟨jk|𝒰|B⟩` and the resulting Kraus set.

use crate::qmath::UnitaryOp;
use crate::qmath::{c, identity, pauli_x, pauli_y, pauli_z, CMat, DensityMatrix};
use crate::register::{bell_basis, WernerParam};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BellLabel {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellLabel {
    pub const ALL: [BellLabel; 4] = [BellLabel::PhiPlus, BellLabel::PhiMinus, BellLabel::PsiPlus, BellLabel::PsiMinus];

    fn index(self) -> usize {
        self as usize
    }
}

/// `𝒱^{B}_{jk} = ⟨jk|_{E1E2} 𝒰 |B⟩_{E1E2}`, each a 2×2 operator on `S`.
#[derive(Debug, Clone)]
pub struct BellSandwichTable {
    entries: Vec<CMat>,
}

impl BellSandwichTable {
    pub fn get(&self, label: BellLabel, j: usize, k: usize) -> &CMat {
        assert!(j < 2 && k < 2, "output bits must be 0 or 1");
        &self.entries[label.index() * 4 + 2 * j + k]
    }

    pub fn iter(&self) -> impl Iterator<Item = (BellLabel, usize, usize, &CMat)> {
        BellLabel::ALL
            .into_iter()
            .flat_map(|l| (0..2).flat_map(move |j| (0..2).map(move |k| (l, j, k))))
            .map(|(l, j, k)| (l, j, k, self.get(l, j, k)))
    }

    /// Channel reassembled from the table with weight `(1+3p)/4` on `φ⁺`
    /// and `(1−p)/4` on the other three Bell labels.
    pub fn apply(&self, rho: &CMat, p: WernerParam) -> CMat {
        let p = p.value();
        let mut out = CMat::zeros(2, 2);
        for (label, _, _, v) in self.iter() {
            let w = if label == BellLabel::PhiPlus { (1.0 + 3.0 * p) / 4.0 } else { (1.0 - p) / 4.0 };
            out += (v * rho * v.adjoint()).scale(w);
        }
        out
    }
}

/// Computes the sandwich operators of an 8×8 register unitary.
pub fn bell_sandwich_table(u: &UnitaryOp) -> BellSandwichTable {
    let bells = bell_basis();
    let m = u.mat();
    let mut entries = Vec::with_capacity(16);
    for bell in &bells {
        for jk in 0..4 {
            // Row index of ⟨s, jk| is 4s + jk, column of |s', e⟩ is 4s' + e.
            entries.push(CMat::from_fn(2, 2, |s, s2| (0..4).map(|e| m[(4 * s + jk, 4 * s2 + e)] * bell[e]).sum()));
        }
    }
    BellSandwichTable { entries }
}

/// Closed-form sandwich table (sign-exact) used as the comparison target.
pub fn reference_sandwich_table() -> BellSandwichTable {
    let half = |m: CMat| m.scale(0.5);
    let i = half(identity(2));
    let z = half(pauli_z());
    let x = half(pauli_x());
    let iy = half(pauli_y() * c(0.0, 1.0));
    let neg = |m: &CMat| -m.clone();
    let entries = vec![
        i.clone(),
        i.clone(),
        i.clone(),
        i,
        z.clone(),
        neg(&z),
        z.clone(),
        neg(&z),
        x.clone(),
        x.clone(),
        neg(&x),
        neg(&x),
        neg(&iy),
        iy.clone(),
        iy.clone(),
        neg(&iy),
    ];
    BellSandwichTable { entries }
}

#[derive(Debug, Clone)]
pub struct KrausSet {
    pub ops: [CMat; 4],
    pub p: WernerParam,
}

impl KrausSet {
    pub fn apply(&self, rho: &CMat) -> CMat {
        self.ops.iter().fold(CMat::zeros(2, 2), |acc, k| acc + k * rho * k.adjoint())
    }

    /// `Σ K†K`.
    pub fn completeness(&self) -> CMat {
        self.ops.iter().fold(CMat::zeros(2, 2), |acc, k| acc + k.adjoint() * k)
    }
}

/// `{√((1+3p)/4) I, √((1−p)/4) Z, √((1−p)/4) X, √((1−p)/4) Y}`.
pub fn kraus_set(p: WernerParam) -> KrausSet {
    let pv = p.value();
    let a = ((1.0 + 3.0 * pv) / 4.0).sqrt();
    let b = ((1.0 - pv) / 4.0).sqrt();
    KrausSet { ops: [identity(2).scale(a), pauli_z().scale(b), pauli_x().scale(b), pauli_y().scale(b)], p }
}

pub fn apply_effective_channel(rho: &DensityMatrix, p: WernerParam) -> DensityMatrix {
    DensityMatrix::from_trusted(kraus_set(p).apply(rho.mat()))
}

/// `⟨ψ(α)|Φ_p(|ψ(α)⟩⟨ψ(α)|)|ψ(α)⟩`.
pub fn output_fidelity(alpha: f64, p: WernerParam) -> f64 {
    let a = alpha.clamp(0.0, 1.0);
    let ket = nalgebra::DVector::from_column_slice(&[c(a, 0.0), c((1.0 - a * a).sqrt(), 0.0)]);
    let out = kraus_set(p).apply(&(&ket * ket.adjoint()));
    (ket.adjoint() * out * &ket)[(0, 0)].re
}

/// Trace distance of two inputs after the first block: `|α₁² − α₂²|`.
pub fn distance_after_block1(a1: f64, a2: f64) -> f64 {
    (a1 * a1 - a2 * a2).abs()
}

/// Trace distance of two outputs of the full circuit:
/// `p·|α₁√(1−α₂²) − α₂√(1−α₁²)|`.
pub fn final_distance(a1: f64, a2: f64, p: WernerParam) -> f64 {
    p.value() * (a1 * (1.0 - a2 * a2).sqrt() - a2 * (1.0 - a1 * a1).sqrt()).abs()
}
