//! Non-Markovianity measures of the reduced dynamics.
//!
//! * BLP: summed increases of the trace distance between two evolving inputs,
//!   maximized over antipodal pure pairs.
//! * RHP: integral of the rate `g(t)` at which the intermediate map
//!   `Φ(t+ε)Φ(t)⁻¹` fails to be completely positive.
//! * LFS: summed increases of the system–ancilla mutual information starting
//!   from a maximally entangled state.
//!
//! All integrals run over the finite time domain of the dynamics scheme.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmath::{
    choi_state, hermitian_eigenvalues, mutual_information, pauli_x, pauli_y, pauli_z, regularized_inverse, trace_norm,
    CMat, DensityMatrix, RegisterLayout, Superoperator, PINV_TOL,
};
use crate::register::{DynamicsScheme, InputState, Propagator, WernerParam, Wire};

/// Uniform grid of `n` samples on `[t0, t1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t0: f64,
    pub t1: f64,
    pub n: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t1: f64, n: usize) -> Result<Self> {
        if !(t1 > t0) || n < 2 {
            return Err(Error::invalid(format!("degenerate time grid [{t0}, {t1}] with {n} samples")));
        }
        Ok(Self { t0, t1, n })
    }

    /// Whole time domain of `scheme` with `steps_per_unit` intervals per unit time.
    pub fn for_scheme(scheme: DynamicsScheme, steps_per_unit: usize) -> Self {
        let (t0, t1) = scheme.time_domain();
        let n = ((t1 - t0) * steps_per_unit as f64).round() as usize + 1;
        Self { t0, t1, n: n.max(2) }
    }

    pub fn step(&self) -> f64 {
        (self.t1 - self.t0) / (self.n - 1) as f64
    }

    pub fn point(&self, k: usize) -> f64 {
        if k + 1 == self.n {
            self.t1
        } else {
            self.t0 + k as f64 * self.step()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.point(k)).collect()
    }

    /// Same interval with the step halved.
    pub fn refined(&self) -> Self {
        Self { n: 2 * (self.n - 1) + 1, ..*self }
    }

    fn validate(&self) -> Result<()> {
        Self::new(self.t0, self.t1, self.n).map(|_| ())
    }
}

/// Two-stage search over Bloch angles: coarse grid on `θ ∈ [0, π/2]`,
/// `φ ∈ [0, 2π)` followed by `refine_rounds` halvings around the best cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptConfig {
    pub coarse_theta: usize,
    pub coarse_phi: usize,
    pub refine_rounds: usize,
}

impl Default for OptConfig {
    fn default() -> Self {
        Self { coarse_theta: 13, coarse_phi: 25, refine_rounds: 3 }
    }
}

/// Best point of a Bloch-angle search. Ties keep the earliest candidate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchResult {
    pub theta: f64,
    pub phi: f64,
    pub value: f64,
    pub coarse_value: f64,
    pub evaluations: usize,
}

/// Maximizes `f(θ, φ)` over `θ ∈ [0, θ_max]`, `φ ∈ [0, 2π)`.
pub fn bloch_search<F>(opt: &OptConfig, theta_max: f64, f: F) -> SearchResult
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let nt = opt.coarse_theta.max(2);
    let np = opt.coarse_phi.max(1);
    let mut h_theta = theta_max / (nt - 1) as f64;
    let mut h_phi = 2.0 * PI / np as f64;
    let coarse: Vec<(f64, f64)> = (0..nt)
        .flat_map(|i| (0..np).map(move |j| (i, j)))
        .map(|(i, j)| (i as f64 * h_theta, j as f64 * h_phi))
        .collect();
    let values: Vec<f64> = coarse.par_iter().map(|&(t, p)| f(t, p)).collect();
    let mut best = argmax(&coarse, &values);
    let coarse_value = best.2;
    let mut evaluations = coarse.len();
    for _ in 0..opt.refine_rounds {
        h_theta *= 0.5;
        h_phi *= 0.5;
        let cands: Vec<(f64, f64)> = (-1..=1)
            .flat_map(|a| (-1..=1).map(move |b| (a, b)))
            .filter(|&(a, b)| (a, b) != (0, 0))
            .map(|(a, b)| {
                let t = (best.0 + a as f64 * h_theta).clamp(0.0, theta_max);
                let p = (best.1 + b as f64 * h_phi).rem_euclid(2.0 * PI);
                (t, p)
            })
            .collect();
        let vals: Vec<f64> = cands.par_iter().map(|&(t, p)| f(t, p)).collect();
        evaluations += cands.len();
        let round = argmax(&cands, &vals);
        if round.2 > best.2 {
            best = round;
        }
    }
    SearchResult { theta: best.0, phi: best.1, value: best.2, coarse_value, evaluations }
}

fn argmax(points: &[(f64, f64)], values: &[f64]) -> (f64, f64, f64) {
    let mut best = (points[0].0, points[0].1, values[0]);
    for (&(t, p), &v) in points.iter().zip(values).skip(1) {
        if v > best.2 {
            best = (t, p, v);
        }
    }
    best
}

/// Interval `[start, end]` over which a monotone quantity grew by `gain`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Increment {
    pub start: f64,
    pub end: f64,
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureReport {
    pub value: f64,
    pub p: f64,
    pub scheme: DynamicsScheme,
    pub grid: TimeGrid,
    /// Bloch angles `(θ, φ)` of the first state of the maximizing pair.
    pub optimal_pair: Option<(f64, f64)>,
    pub increments: Vec<Increment>,
    pub diagnostics: BTreeMap<String, f64>,
}

/// Groups consecutive positive per-interval contributions into maximal
/// intervals. Returns the summed contribution and the intervals.
fn collect_increments(times: &[f64], contributions: &[f64]) -> (f64, Vec<Increment>) {
    let mut out: Vec<Increment> = Vec::new();
    let mut open = false;
    for (k, &g) in contributions.iter().enumerate() {
        if g > 0.0 {
            match out.last_mut() {
                Some(last) if open => {
                    last.end = times[k + 1];
                    last.gain += g;
                }
                _ => out.push(Increment { start: times[k], end: times[k + 1], gain: g }),
            }
            open = true;
        } else {
            open = false;
        }
    }
    let total = out.iter().fold(0.0, |acc, i| acc + i.gain);
    (total, out)
}

/// Changes at or below this size are rounding noise of the dense eigensolvers.
pub const INCREMENT_FLOOR: f64 = 1e-12;

fn above_floor(x: f64) -> f64 {
    if x > INCREMENT_FLOOR {
        x
    } else {
        0.0
    }
}

/// Positive parts of successive differences of a sampled curve.
pub fn positive_increments(times: &[f64], values: &[f64]) -> (f64, Vec<Increment>) {
    let diffs: Vec<f64> = values.windows(2).map(|w| above_floor(w[1] - w[0])).collect();
    collect_increments(times, &diffs)
}

/// Reduced dynamical maps of one wire sampled on a time grid.
#[derive(Debug, Clone)]
pub struct MapTrajectory {
    scheme: DynamicsScheme,
    p: WernerParam,
    observed: Wire,
    grid: TimeGrid,
    times: Vec<f64>,
    maps: Vec<Superoperator>,
    /// `Φ_t(X), Φ_t(Y), Φ_t(Z)` for each sample.
    pauli_images: Vec<[CMat; 3]>,
}

impl MapTrajectory {
    pub fn new(prop: &Propagator, p: WernerParam, grid: TimeGrid, observed: Wire) -> Result<Self> {
        grid.validate()?;
        let times = grid.points();
        let maps = times.par_iter().map(|&t| prop.reduced_map(p, t, observed)).collect::<Result<Vec<_>>>()?;
        let paulis = [pauli_x(), pauli_y(), pauli_z()];
        let pauli_images = maps.iter().map(|m| paulis.clone().map(|s| m.apply(&s))).collect();
        Ok(Self { scheme: prop.scheme(), p, observed, grid, times, maps, pauli_images })
    }

    /// Trajectory of the wire carrying the teleported state
    /// (`S` for the SWAP-terminated circuit, `E2` for the original one).
    pub fn output(scheme: DynamicsScheme, p: WernerParam, grid: TimeGrid) -> Result<Self> {
        Self::new(&Propagator::new(scheme), p, grid, scheme.variant.output_wire())
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn maps(&self) -> &[Superoperator] {
        &self.maps
    }

    pub fn observed(&self) -> Wire {
        self.observed
    }

    pub fn p(&self) -> WernerParam {
        self.p
    }

    pub fn distance_curve(&self, psi1: &InputState, psi2: &InputState) -> Result<Vec<f64>> {
        let delta = psi1.density()?.into_mat() - psi2.density()?.into_mat();
        Ok(self.maps.iter().map(|m| 0.5 * trace_norm(&m.apply(&delta))).collect())
    }

    /// Trace distance curve of the antipodal pair with Bloch vector `n(θ, φ)`.
    fn antipodal_curve(&self, theta: f64, phi: f64) -> impl Iterator<Item = f64> + '_ {
        let n = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
        // ρ(n) − ρ(−n) = n·σ, so Φ_t of the difference is linear in the Pauli images.
        self.pauli_images.iter().map(move |[x, y, z]| {
            let a = x * nalgebra::Complex::from(n[0])
                + y * nalgebra::Complex::from(n[1])
                + z * nalgebra::Complex::from(n[2]);
            0.5 * trace_norm(&a)
        })
    }

    fn antipodal_gain(&self, theta: f64, phi: f64) -> f64 {
        let mut prev = None;
        let mut gain = 0.0;
        for d in self.antipodal_curve(theta, phi) {
            if let Some(q) = prev {
                gain += above_floor(d - q);
            }
            prev = Some(d);
        }
        gain
    }

    fn report(&self, value: f64, increments: Vec<Increment>) -> MeasureReport {
        MeasureReport {
            value,
            p: self.p.value(),
            scheme: self.scheme,
            grid: self.grid,
            optimal_pair: None,
            increments,
            diagnostics: BTreeMap::new(),
        }
    }
}

/// Summed positive increments of `D(Φ_t ψ₁, Φ_t ψ₂)` on a precomputed trajectory.
pub fn blp_pair_gain_on(traj: &MapTrajectory, psi1: &InputState, psi2: &InputState) -> Result<MeasureReport> {
    let curve = traj.distance_curve(psi1, psi2)?;
    let (value, increments) = positive_increments(&traj.times, &curve);
    let mut r = traj.report(value, increments);
    r.optimal_pair = Some(psi1.angles());
    r.diagnostics.insert("final_distance".into(), *curve.last().expect("grid has samples"));
    Ok(r)
}

/// BLP gain of one input pair, observing the wire that carries the
/// teleported state for the scheme's circuit variant.
pub fn blp_pair_gain(
    psi1: &InputState,
    psi2: &InputState,
    scheme: DynamicsScheme,
    p: WernerParam,
    grid: TimeGrid,
) -> Result<MeasureReport> {
    blp_pair_gain_on(&MapTrajectory::output(scheme, p, grid)?, psi1, psi2)
}

pub fn blp_measure_on(traj: &MapTrajectory, opt: &OptConfig) -> Result<MeasureReport> {
    let found = bloch_search(opt, PI / 2.0, |t, p| traj.antipodal_gain(t, p));
    let psi = InputState::bloch(found.theta, found.phi);
    let mut r = blp_pair_gain_on(traj, &psi, &psi.antipode())?;
    // Report the summed increments of the pair itself so value == Σ gains.
    r.diagnostics.insert("search_value".into(), found.value);
    r.diagnostics.insert("coarse_value".into(), found.coarse_value);
    r.diagnostics.insert("evaluations".into(), found.evaluations as f64);
    r.optimal_pair = Some((found.theta, found.phi));
    Ok(r)
}

pub fn blp_measure(scheme: DynamicsScheme, p: WernerParam, grid: TimeGrid, opt: &OptConfig) -> Result<MeasureReport> {
    blp_measure_on(&MapTrajectory::output(scheme, p, grid)?, opt)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RhpConfig {
    pub eps: f64,
    pub tol: f64,
    /// Also evaluate at `ε/2` and report the relative difference.
    pub richardson: bool,
}

impl Default for RhpConfig {
    fn default() -> Self {
        Self { eps: 1e-3, tol: PINV_TOL, richardson: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhpSample {
    pub t: f64,
    pub g: f64,
    pub singular: bool,
}

/// `g(t) = (‖(Φ(t+ε)Φ(t)⁻¹ ⊗ id)|φ⁺⟩⟨φ⁺|‖₁ − 1)/ε`, clamped at 0.
pub fn rhp_g_on(prop: &Propagator, p: WernerParam, t: f64, eps: f64, tol: f64, observed: Wire) -> Result<RhpSample> {
    if !(eps > 0.0) {
        return Err(Error::invalid("RHP step must be positive"));
    }
    let scheme = prop.scheme();
    if !scheme.contains(t) || !scheme.contains(t + eps) {
        return Err(Error::invalid(format!("t={t} and t+ε must lie in the time domain")));
    }
    let ahead = prop.reduced_map(p, t + eps, observed)?;
    let now = prop.reduced_map(p, t, observed)?;
    let inv = match regularized_inverse(&now, tol) {
        Ok(inv) => inv,
        Err(Error::SingularMap) => return Ok(RhpSample { t, g: 0.0, singular: true }),
        Err(e) => return Err(e),
    };
    if inv.singular {
        return Ok(RhpSample { t, g: 0.0, singular: true });
    }
    let step = ahead.compose(&inv.map);
    let excess = trace_norm(&choi_state(&step)) - 1.0;
    // Rounding in the inverse grows with the conditioning of Φ(t).
    let g = if excess > INCREMENT_FLOOR * inv.condition.max(1.0) { excess / eps } else { 0.0 };
    Ok(RhpSample { t, g, singular: false })
}

pub fn rhp_g(scheme: DynamicsScheme, p: WernerParam, t: f64, eps: f64, tol: f64) -> Result<f64> {
    Ok(rhp_g_on(&Propagator::new(scheme), p, t, eps, tol, Wire::S)?.g)
}

fn rhp_integral(
    prop: &Propagator,
    p: WernerParam,
    grid: &TimeGrid,
    eps: f64,
    tol: f64,
) -> Result<(Vec<f64>, Vec<RhpSample>)> {
    let (_, end) = prop.scheme().time_domain();
    let times = grid.points();
    let samples = times
        .par_iter()
        // The last samples lean backwards so that t + ε stays inside the domain.
        .map(|&t| rhp_g_on(prop, p, t.min(end - eps), eps, tol, Wire::S).map(|s| RhpSample { t, ..s }))
        .collect::<Result<Vec<_>>>()?;
    Ok((times, samples))
}

fn trapezoid_contributions(times: &[f64], g: &[f64]) -> Vec<f64> {
    times.windows(2).zip(g.windows(2)).map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1])).collect()
}

pub fn rhp_measure_on(prop: &Propagator, p: WernerParam, grid: TimeGrid, cfg: &RhpConfig) -> Result<MeasureReport> {
    grid.validate()?;
    let (times, samples) = rhp_integral(prop, p, &grid, cfg.eps, cfg.tol)?;
    let g: Vec<f64> = samples.iter().map(|s| s.g).collect();
    let (value, increments) = collect_increments(&times, &trapezoid_contributions(&times, &g));
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("eps".into(), cfg.eps);
    diagnostics.insert("pinv_tol".into(), cfg.tol);
    diagnostics.insert("singular_samples".into(), samples.iter().filter(|s| s.singular).count() as f64);
    diagnostics.insert("robustness_lower_bound".into(), value / 2.0);
    if cfg.richardson {
        let (_, half) = rhp_integral(prop, p, &grid, cfg.eps / 2.0, cfg.tol)?;
        let gh: Vec<f64> = half.iter().map(|s| s.g).collect();
        let vh: f64 = trapezoid_contributions(&times, &gh).iter().sum();
        let rel = if value.max(vh) > 0.0 { (value - vh).abs() / value.max(vh) } else { 0.0 };
        diagnostics.insert("value_half_eps".into(), vh);
        diagnostics.insert("richardson_rel_diff".into(), rel);
    }
    Ok(MeasureReport { value, p: p.value(), scheme: prop.scheme(), grid, optimal_pair: None, increments, diagnostics })
}

pub fn rhp_measure(scheme: DynamicsScheme, p: WernerParam, grid: TimeGrid, cfg: &RhpConfig) -> Result<MeasureReport> {
    rhp_measure_on(&Propagator::new(scheme), p, grid, cfg)
}

/// Mutual information of `(Φ_t ⊗ id)|φ⁺⟩⟨φ⁺|` along the trajectory.
pub fn lfs_curve(traj: &MapTrajectory) -> Vec<f64> {
    let layout = RegisterLayout::qubits(2);
    traj.maps
        .par_iter()
        .map(|m| {
            let rho = DensityMatrix::from_trusted(choi_state(m));
            mutual_information(&rho, &layout, &[0]).expect("two-qubit layout")
        })
        .collect()
}

pub fn lfs_measure_on(traj: &MapTrajectory) -> MeasureReport {
    let curve = lfs_curve(traj);
    let (value, increments) = positive_increments(&traj.times, &curve);
    let mut r = traj.report(value, increments);
    r.diagnostics.insert("initial_mutual_information".into(), curve[0]);
    r.diagnostics.insert("final_mutual_information".into(), *curve.last().expect("non-empty"));
    r
}

pub fn lfs_measure(scheme: DynamicsScheme, p: WernerParam, grid: TimeGrid) -> Result<MeasureReport> {
    Ok(lfs_measure_on(&MapTrajectory::new(&Propagator::new(scheme), p, grid, Wire::S)?))
}

/// Smallest Choi eigenvalue over a trajectory (CP check of every sampled map).
pub fn min_choi_eigenvalue(traj: &MapTrajectory) -> f64 {
    traj.maps.iter().map(|m| hermitian_eigenvalues(&choi_state(m))[0]).fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Blp,
    Rhp,
    Lfs,
}

impl Measure {
    pub const ALL: [Measure; 3] = [Measure::Blp, Measure::Rhp, Measure::Lfs];

    pub fn name(self) -> &'static str {
        match self {
            Measure::Blp => "blp",
            Measure::Rhp => "rhp",
            Measure::Lfs => "lfs",
        }
    }
}

/// Settings shared by the three measures.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MeasureSettings {
    pub opt: OptConfig,
    pub rhp: RhpConfig,
}

/// Evaluates one measure on the system `S` (or the scheme's output wire for BLP).
pub fn evaluate(
    measure: Measure,
    prop: &Propagator,
    p: WernerParam,
    grid: TimeGrid,
    settings: &MeasureSettings,
) -> Result<MeasureReport> {
    let observed = prop.scheme().variant.output_wire();
    match measure {
        Measure::Blp => blp_measure_on(&MapTrajectory::new(prop, p, grid, observed)?, &settings.opt),
        Measure::Rhp => rhp_measure_on(prop, p, grid, &settings.rhp),
        Measure::Lfs => Ok(lfs_measure_on(&MapTrajectory::new(prop, p, grid, Wire::S)?)),
    }
}

/// `0, step, 2·step, …, 1` built from integer multiples to avoid drift.
pub fn p_grid(step: f64) -> Vec<f64> {
    let n = (1.0 / step).round() as usize;
    (0..=n).map(|i| i as f64 / n as f64).collect()
}

/// First `p` (in the given order) whose value exceeds `cutoff`.
pub fn first_above(values: &[(f64, f64)], cutoff: f64) -> Option<f64> {
    values.iter().find(|(_, v)| *v > cutoff).map(|(p, _)| *p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::register::{DynamicsScheme, InputState};
    use approx::assert_abs_diff_eq;

    fn wp(p: f64) -> WernerParam {
        WernerParam::new(p).unwrap()
    }

    fn block_grid() -> TimeGrid {
        TimeGrid::for_scheme(DynamicsScheme::BLOCK, 200)
    }

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(0.0, 1.0, 1).is_err());
        assert!(TimeGrid::new(1.0, 1.0, 5).is_err());
        assert_eq!(TimeGrid::for_scheme(DynamicsScheme::BLOCK, 200).n, 201);
        assert_eq!(TimeGrid::for_scheme(DynamicsScheme::GATES, 200).n, 1601);
        let g = TimeGrid::new(0.0, 1.0, 5).unwrap();
        assert_eq!(g.points(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(g.refined().n, 9);
        let bad = TimeGrid { t0: 0.0, t1: 1.0, n: 0 };
        assert!(blp_pair_gain(&InputState::zero(), &InputState::one(), DynamicsScheme::BLOCK, wp(0.5), bad).is_err());
    }

    #[test]
    fn increments_merge_into_ascent_intervals() {
        let t = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        let v = [1.0, 0.5, 0.7, 0.9, 0.8, 1.0];
        let (total, inc) = positive_increments(&t, &v);
        assert_abs_diff_eq!(total, 0.6, epsilon = 1e-15);
        assert_eq!(inc.len(), 2);
        assert_eq!((inc[0].start, inc[0].end), (1.0, 3.0));
        assert_eq!((inc[1].start, inc[1].end), (4.0, 5.0));
    }

    #[test]
    fn antipodal_fast_path_matches_direct_curve() {
        let traj = MapTrajectory::output(DynamicsScheme::BLOCK, wp(0.8), block_grid()).unwrap();
        let psi = InputState::bloch(0.7, 2.3);
        let direct = traj.distance_curve(&psi, &psi.antipode()).unwrap();
        for (a, b) in direct.iter().zip(traj.antipodal_curve(0.7, 2.3)) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn blp_zero_at_small_p() {
        let r = blp_pair_gain(&InputState::zero(), &InputState::one(), DynamicsScheme::BLOCK, wp(0.0), block_grid())
            .unwrap();
        assert!(r.value < 1e-12);
        let r = blp_measure(DynamicsScheme::BLOCK, wp(0.4), block_grid(), &OptConfig::default()).unwrap();
        assert!(r.value < 1e-10, "{}", r.value);
    }

    #[test]
    fn blp_block_at_full_resource_is_positive_for_z_pair() {
        // The intermediate maps entangle S with the register, so even the
        // perfect resource shows a revival of distinguishability.
        let r = blp_pair_gain(&InputState::zero(), &InputState::one(), DynamicsScheme::BLOCK, wp(1.0), block_grid())
            .unwrap();
        assert!(r.value > 0.05);
        assert_abs_diff_eq!(r.diagnostics["final_distance"], 1.0, epsilon = 1e-10);
        let sum: f64 = r.increments.iter().map(|i| i.gain).sum();
        assert_abs_diff_eq!(sum, r.value, epsilon = 1e-12);
    }

    #[test]
    fn blp_on_e2_of_original_circuit_equals_p() {
        let grid = TimeGrid::for_scheme(DynamicsScheme::BBC_GATES, 200);
        let r =
            blp_pair_gain(&InputState::zero(), &InputState::one(), DynamicsScheme::BBC_GATES, wp(0.5), grid).unwrap();
        assert_abs_diff_eq!(r.value, 0.5, epsilon = 1e-9);
    }

    #[test]
    fn blp_gate_by_gate_backflow_in_last_gate() {
        let grid = TimeGrid::for_scheme(DynamicsScheme::GATES, 200);
        let r = blp_measure(DynamicsScheme::GATES, wp(0.0), grid, &OptConfig::default()).unwrap();
        assert!(r.value > 0.05);
        assert_eq!(r.optimal_pair.unwrap().0, 0.0);
        assert!(r.increments.iter().all(|i| i.start >= 7.0 - 1e-12 && i.end <= 8.0));
    }

    #[test]
    fn rhp_g_examples() {
        let prop = Propagator::new(DynamicsScheme::BLOCK);
        let s = rhp_g_on(&prop, wp(0.3), 0.5, 1e-3, PINV_TOL, Wire::S).unwrap();
        assert!(s.g < 1e-8 && !s.singular);
        assert!(rhp_g(DynamicsScheme::BLOCK, wp(0.3), 0.9995, 1e-3, PINV_TOL).is_err());
        assert!(rhp_g(DynamicsScheme::BLOCK, wp(0.3), 0.5, 0.0, PINV_TOL).is_err());
    }

    #[test]
    fn rhp_flags_singular_maps() {
        // At p = 0 and t = 1 the map is the complete depolarizer.
        let prop = Propagator::new(DynamicsScheme::BLOCK);
        let s = rhp_g_on(&prop, wp(0.0), 1.0 - 1e-3, 1e-3, 0.9, Wire::S).unwrap();
        assert!(s.singular);
        assert_eq!(s.g, 0.0);
    }

    #[test]
    fn rhp_zero_where_singular_values_cluster() {
        // Φ_t has nearly coincident singular values here; its inverse must stay accurate.
        let prop = Propagator::new(DynamicsScheme::BLOCK);
        for eps in [1e-3, 1e-4] {
            let s = rhp_g_on(&prop, wp(0.02), 0.905, eps, PINV_TOL, Wire::S).unwrap();
            assert_eq!(s.g, 0.0);
        }
    }

    #[test]
    fn rhp_and_lfs_zero_at_p_040() {
        let r = rhp_measure(DynamicsScheme::BLOCK, wp(0.40), block_grid(), &RhpConfig::default()).unwrap();
        assert!(r.value < 1e-9, "{}", r.value);
        let l = lfs_measure(DynamicsScheme::BLOCK, wp(0.40), block_grid()).unwrap();
        assert!(l.value < 1e-9);
    }

    #[test]
    fn rhp_positive_just_above_onset() {
        let r = rhp_measure(DynamicsScheme::BLOCK, wp(0.45), block_grid(), &RhpConfig::default()).unwrap();
        assert!(r.value > 0.0);
        assert!(r.increments.iter().any(|i| i.gain > 0.0));
        assert_abs_diff_eq!(r.diagnostics["robustness_lower_bound"], r.value / 2.0);
    }

    #[test]
    fn lfs_onset_between_060_and_065() {
        assert!(lfs_measure(DynamicsScheme::BLOCK, wp(0.60), block_grid()).unwrap().value < 1e-10);
        assert!(lfs_measure(DynamicsScheme::BLOCK, wp(0.65), block_grid()).unwrap().value > 0.0);
    }

    #[test]
    fn report_value_equals_sum_of_increments() {
        let prop = Propagator::new(DynamicsScheme::BLOCK);
        let s = MeasureSettings::default();
        for m in Measure::ALL {
            let r = evaluate(m, &prop, wp(0.9), block_grid(), &s).unwrap();
            let sum: f64 = r.increments.iter().map(|i| i.gain).sum();
            assert_abs_diff_eq!(sum, r.value, epsilon = 1e-9);
            assert!(r.value >= 0.0);
        }
    }

    #[test]
    fn p_grid_and_threshold() {
        let g = p_grid(0.01);
        assert_eq!(g.len(), 101);
        assert_eq!(g[41], 0.41);
        let vals = [(0.1, 0.0), (0.2, 1e-6), (0.3, 2e-4)];
        assert_eq!(first_above(&vals, 1e-4), Some(0.3));
        assert_eq!(first_above(&vals, 1.0), None);
    }

    #[test]
    fn bloch_search_finds_smooth_maximum() {
        let target = (0.9_f64, 4.0_f64);
        let f = |t: f64, p: f64| -((t - target.0).powi(2) + (p - target.1).powi(2));
        let r = bloch_search(&OptConfig::default(), PI / 2.0, f);
        assert!((r.theta - target.0).abs() < 0.02 && (r.phi - target.1).abs() < 0.04);
        assert!(r.value >= r.coarse_value);
    }
}
