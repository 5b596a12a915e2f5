//! Entanglement, classical correlations and discord across `S | E1E2`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonmarkov::{bloch_search, OptConfig, TimeGrid};
use crate::qmath::{
    c, hermitian_eigh, partial_trace_mat, partial_transpose, trace_norm, vn_entropy_mat, CMat, CVec, DensityMatrix,
    RegisterLayout, C64,
};
use crate::register::{DynamicsScheme, InputState, Propagator, WernerParam, Wire};

/// Outcome probabilities below this are dropped from the conditional entropy.
const MIN_OUTCOME_PROB: f64 = 1e-12;

/// `log₂ ‖ρ^{T_side}‖₁`, clamped at zero.
pub fn log_negativity(rho: &DensityMatrix, layout: &RegisterLayout, side: &[usize]) -> Result<f64> {
    let pt = partial_transpose(rho, layout, side)?;
    let e = trace_norm(&pt).log2();
    Ok(if e < 1e-12 { 0.0 } else { e })
}

/// Rank-one projective measurement `{|v_i⟩⟨v_i|}`.
#[derive(Debug, Clone)]
pub struct ProjectiveMeasurement {
    kets: Vec<CVec>,
}

impl ProjectiveMeasurement {
    /// Qubit basis `{|n⟩, |−n⟩}` with `n` at Bloch angles `(θ, φ)`.
    pub fn qubit(theta: f64, phi: f64) -> Self {
        let (s, co) = (theta / 2.0).sin_cos();
        let up = CVec::from_column_slice(&[c(co, 0.0), C64::from_polar(s, phi)]);
        let down = CVec::from_column_slice(&[-C64::from_polar(s, -phi), c(co, 0.0)]);
        Self { kets: vec![up, down] }
    }

    /// Columns of a unitary as the measurement basis.
    pub fn from_unitary(u: &CMat) -> Self {
        Self { kets: (0..u.ncols()).map(|k| u.column(k).into_owned()).collect() }
    }

    pub fn kets(&self) -> &[CVec] {
        &self.kets
    }

    pub fn projectors(&self) -> Vec<CMat> {
        self.kets.iter().map(|k| k * k.adjoint()).collect()
    }
}

/// Blocks `R_{mm'} = ⟨m|ρ|m'⟩` over the measured factor, each acting on the
/// unmeasured wires. Conditional states are then `Σ v̄_m v_{m'} R_{mm'}`.
struct MeasuredBlocks {
    dm: usize,
    blocks: Vec<CMat>,
}

impl MeasuredBlocks {
    fn new(rho: &CMat, layout: &RegisterLayout, measured: &[usize]) -> Self {
        let rest = layout.complement(measured);
        let dm = layout.subset_dim(measured);
        let dr = layout.subset_dim(&rest);
        let ml = RegisterLayout::new(measured.iter().map(|&w| layout.dims()[w]).collect()).expect("non-empty");
        let rl = RegisterLayout::new(rest.iter().map(|&w| layout.dims()[w]).collect()).expect("non-empty");
        let index = |m: usize, a: usize| {
            let mut digits = vec![0; layout.n_wires()];
            for (&w, x) in measured.iter().zip(ml.digits(m)) {
                digits[w] = x;
            }
            for (&w, x) in rest.iter().zip(rl.digits(a)) {
                digits[w] = x;
            }
            layout.compose(&digits)
        };
        let idx: Vec<Vec<usize>> = (0..dm).map(|m| (0..dr).map(|a| index(m, a)).collect()).collect();
        let mut blocks = Vec::with_capacity(dm * dm);
        for m in 0..dm {
            for m2 in 0..dm {
                blocks.push(CMat::from_fn(dr, dr, |a, b| rho[(idx[m][a], idx[m2][b])]));
            }
        }
        Self { dm, blocks }
    }

    /// Unnormalized conditional state `⟨v|ρ|v⟩` of the unmeasured wires.
    fn conditional(&self, v: &CVec) -> CMat {
        let dr = self.blocks[0].nrows();
        let mut out = CMat::zeros(dr, dr);
        for m in 0..self.dm {
            for m2 in 0..self.dm {
                let w = v[m].conj() * v[m2];
                if w.norm() > 0.0 {
                    out += &self.blocks[m * self.dm + m2] * w;
                }
            }
        }
        out
    }

    /// `Σ_i p_i S(ρ_A^i)` for the given basis.
    fn conditional_entropy(&self, basis: &ProjectiveMeasurement) -> f64 {
        basis
            .kets
            .iter()
            .map(|v| {
                let cond = self.conditional(v);
                let prob = cond.trace().re;
                if prob < MIN_OUTCOME_PROB {
                    0.0
                } else {
                    prob * vn_entropy_mat(&cond.unscale(prob))
                }
            })
            .sum()
    }
}

/// Which side of `S | E1E2` is measured in the classical-correlation search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasuredSide {
    /// The qubit `S` (two-angle search).
    #[default]
    System,
    /// The pair `E1E2` (search over 4-dimensional orthonormal bases).
    Environment,
}

impl MeasuredSide {
    pub fn wires(self) -> Vec<usize> {
        match self {
            MeasuredSide::System => vec![Wire::S.index()],
            MeasuredSide::Environment => vec![Wire::E1.index(), Wire::E2.index()],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalCorrelations {
    /// `S(ρ_A) − min Σ p_i S(ρ_A^i)` over the searched bases.
    pub value: f64,
    /// Value after the coarse stage only; never exceeds `value`.
    pub coarse_value: f64,
    pub basis: Vec<CVec>,
}

/// `J(A|B)` maximized over rank-one projective measurements on `measured`.
pub fn classical_correlations_search(
    rho: &DensityMatrix,
    layout: &RegisterLayout,
    measured: &[usize],
    opt: &OptConfig,
) -> Result<ClassicalCorrelations> {
    let measured = layout.normalize_subset(measured)?;
    let rest = layout.complement(&measured);
    if measured.is_empty() || rest.is_empty() {
        return Err(Error::invalid("classical correlations need a proper bipartition"));
    }
    if rho.dim() != layout.total_dim() {
        return Err(Error::invalid("state does not match layout"));
    }
    let s_a = vn_entropy_mat(&partial_trace_mat(rho.mat(), layout, &rest));
    let blocks = MeasuredBlocks::new(rho.mat(), layout, &measured);
    let dm = layout.subset_dim(&measured);
    if dm == 2 {
        let found =
            bloch_search(opt, PI / 2.0, |t, p| s_a - blocks.conditional_entropy(&ProjectiveMeasurement::qubit(t, p)));
        Ok(ClassicalCorrelations {
            value: found.value,
            coarse_value: found.coarse_value,
            basis: ProjectiveMeasurement::qubit(found.theta, found.phi).kets,
        })
    } else {
        let (value, coarse_value, u) = unitary_basis_search(dm, opt, |basis| s_a - blocks.conditional_entropy(basis));
        Ok(ClassicalCorrelations { value, coarse_value, basis: ProjectiveMeasurement::from_unitary(&u).kets })
    }
}

pub fn classical_correlations(
    rho: &DensityMatrix,
    layout: &RegisterLayout,
    measured: &[usize],
    opt: &OptConfig,
) -> Result<f64> {
    Ok(classical_correlations_search(rho, layout, measured, opt)?.value)
}

/// Mutual information minus classical correlations.
pub fn discord(rho: &DensityMatrix, layout: &RegisterLayout, measured: &[usize], opt: &OptConfig) -> Result<f64> {
    let j = classical_correlations(rho, layout, measured, opt)?;
    Ok(crate::qmath::mutual_information(rho, layout, measured)? - j)
}

/// Generalized Gell-Mann basis of traceless Hermitian `d×d` matrices.
fn hermitian_generators(d: usize) -> Vec<CMat> {
    let mut out = Vec::new();
    for j in 0..d {
        for k in (j + 1)..d {
            let mut s = CMat::zeros(d, d);
            s[(j, k)] = c(1.0, 0.0);
            s[(k, j)] = c(1.0, 0.0);
            out.push(s);
            let mut a = CMat::zeros(d, d);
            a[(j, k)] = c(0.0, -1.0);
            a[(k, j)] = c(0.0, 1.0);
            out.push(a);
        }
    }
    for l in 1..d {
        let norm = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut m = CMat::zeros(d, d);
        for i in 0..l {
            m[(i, i)] = c(norm, 0.0);
        }
        m[(l, l)] = c(-norm * l as f64, 0.0);
        out.push(m);
    }
    out
}

fn exp_i_hermitian(h: &CMat) -> CMat {
    let (vals, vecs) = hermitian_eigh(h);
    let d = CMat::from_diagonal(&CVec::from_iterator(vals.len(), vals.iter().map(|&e| C64::from_polar(1.0, e))));
    &vecs * d * vecs.adjoint()
}

/// Deterministic coordinate search over `U = exp(i Σ c_k G_k)·U₀` for a few
/// starting bases `U₀`. Returns (best, best-of-starts, basis unitary).
fn unitary_basis_search<F>(d: usize, opt: &OptConfig, f: F) -> (f64, f64, CMat)
where
    F: Fn(&ProjectiveMeasurement) -> f64 + Sync,
{
    let gens = hermitian_generators(d);
    let mut starts = vec![CMat::identity(d, d)];
    let fourier =
        CMat::from_fn(d, d, |j, k| C64::from_polar(1.0 / (d as f64).sqrt(), 2.0 * PI * (j * k) as f64 / d as f64));
    starts.push(fourier);
    if d == 4 {
        let bells = crate::register::bell_basis();
        starts.push(CMat::from_columns(&bells));
    }
    let eval = |u0: &CMat, coeffs: &[f64]| {
        let h = gens.iter().zip(coeffs).fold(CMat::zeros(d, d), |acc, (g, &x)| acc + g.scale(x));
        let u = exp_i_hermitian(&h) * u0;
        (f(&ProjectiveMeasurement::from_unitary(&u)), u)
    };
    let results: Vec<(f64, f64, CMat)> = starts
        .par_iter()
        .map(|u0| {
            let mut coeffs = vec![0.0; gens.len()];
            let (mut best, mut best_u) = eval(u0, &coeffs);
            let start_value = best;
            let mut step = 0.5;
            let min_step = 0.5 / 2f64.powi((opt.refine_rounds + 5) as i32);
            while step >= min_step {
                let mut improved = false;
                for k in 0..coeffs.len() {
                    for dir in [1.0, -1.0] {
                        let mut trial = coeffs.clone();
                        trial[k] += dir * step;
                        let (v, u) = eval(u0, &trial);
                        if v > best {
                            best = v;
                            best_u = u;
                            coeffs = trial;
                            improved = true;
                            break;
                        }
                    }
                }
                if !improved {
                    step *= 0.5;
                }
            }
            (best, start_value, best_u)
        })
        .collect();
    let coarse = results.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    let best = results.into_iter().reduce(|a, b| if b.0 > a.0 { b } else { a }).expect("at least one start");
    (best.0, coarse, best.2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationSample {
    pub t: f64,
    pub p: f64,
    pub neg: f64,
    pub discord: f64,
    pub classical: f64,
    pub mutual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct CorrelationConfig {
    pub measured: MeasuredSide,
    pub opt: OptConfig,
}

/// Correlations of a register state across `S | E1E2`.
pub fn correlation_sample(rho: &DensityMatrix, t: f64, p: f64, cfg: &CorrelationConfig) -> Result<CorrelationSample> {
    let layout = RegisterLayout::register();
    let measured = cfg.measured.wires();
    let neg = log_negativity(rho, &layout, &[Wire::S.index()])?;
    let mutual = crate::qmath::mutual_information(rho, &layout, &[Wire::S.index()])?;
    let classical = classical_correlations(rho, &layout, &measured, &cfg.opt)?;
    Ok(CorrelationSample { t, p, neg, discord: mutual - classical, classical, mutual })
}

pub fn correlation_trajectory_on(
    prop: &Propagator,
    psi: &InputState,
    p: WernerParam,
    grid: TimeGrid,
    cfg: &CorrelationConfig,
) -> Result<Vec<CorrelationSample>> {
    TimeGrid::new(grid.t0, grid.t1, grid.n)?;
    grid.points().par_iter().map(|&t| correlation_sample(&prop.joint_state(psi, p, t)?, t, p.value(), cfg)).collect()
}

pub fn correlation_trajectory(
    scheme: DynamicsScheme,
    psi: &InputState,
    p: WernerParam,
    grid: TimeGrid,
    cfg: &CorrelationConfig,
) -> Result<Vec<CorrelationSample>> {
    correlation_trajectory_on(&Propagator::new(scheme), psi, p, grid, cfg)
}
