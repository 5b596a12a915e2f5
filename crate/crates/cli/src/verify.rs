//! Claim checks behind `nmlab verify`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use anyhow::Result;
use nmlab_core::channel::{bell_sandwich_table, distance_after_block1, final_distance, reference_sandwich_table};
use nmlab_core::correlations::{correlation_sample, log_negativity};
use nmlab_core::nonmarkov::{
    blp_measure_on, blp_pair_gain_on, evaluate, first_above, min_choi_eigenvalue, p_grid, MapTrajectory, Measure,
    TimeGrid,
};
use nmlab_core::qmath::{
    choi_state, max_abs_diff, superop_from_action, trace_distance, unvectorize, vectorize, CMat, DensityMatrix,
    RegisterLayout, UnitaryOp, C64,
};
use nmlab_core::register::{
    block_unitaries, circuit_unitary, reduced_map, werner, CircuitVariant, DynamicsScheme, InputState, Propagator,
    WernerParam, Wire,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::figures::measure_sweep;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub check: String,
    pub expected: Value,
    pub measured: Value,
    pub tolerance: f64,
    pub pass: bool,
}

fn check(name: &str, expected: Value, measured: Value, tolerance: f64, pass: bool) -> CheckResult {
    CheckResult { check: name.to_string(), expected, measured, tolerance, pass }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub version: String,
    pub config: String,
    pub checks: Vec<CheckResult>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            writeln!(
                out,
                "[{}] {}: measured {} (expected {}, tol {:e})",
                if c.pass { "PASS" } else { "FAIL" },
                c.check,
                c.measured,
                c.expected,
                c.tolerance
            )
            .unwrap();
        }
        let failed = self.checks.iter().filter(|c| !c.pass).count();
        writeln!(out, "{} checks, {} passed, {} failed", self.checks.len(), self.checks.len() - failed, failed)
            .unwrap();
        out
    }
}

fn wp(p: f64) -> WernerParam {
    WernerParam::new(p).expect("p in [0, 1]")
}

/// Haar-uniform pure qubit state.
pub fn random_state(rng: &mut impl Rng) -> InputState {
    let u: f64 = rng.gen();
    InputState::bloch((1.0 - 2.0 * u).acos(), rng.gen::<f64>() * 2.0 * PI)
}

fn linspace(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

const QUARTERS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// Threshold targets (measure, expected onset).
pub const THRESHOLDS: [(Measure, f64); 3] = [(Measure::Rhp, 0.41), (Measure::Blp, 0.50), (Measure::Lfs, 0.65)];
pub const THRESHOLD_TOL: f64 = 0.02;
/// Cutoff separating genuine growth from eigensolver rounding in the onset scan.
pub const ONSET_CUTOFF: f64 = 1e-8;

fn channel_identity() -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let states: Vec<InputState> = (0..20).map(|_| random_state(&mut rng)).collect();
    let prop = Propagator::new(DynamicsScheme::BLOCK);
    let mut worst: f64 = 0.0;
    for p in QUARTERS {
        let map = prop.reduced_map(wp(p), 1.0, Wire::S)?;
        for s in &states {
            let rho = s.density()?;
            let out = DensityMatrix::new(map.apply(rho.mat()))?;
            let depol = rho.mat().scale(p) + CMat::identity(2, 2).scale((1.0 - p) / 2.0);
            worst = worst.max(trace_distance(&out, &DensityMatrix::new(depol)?)?);
        }
    }
    Ok(check("channel_identity", json!(0.0), json!(worst), 1e-10, worst <= 1e-10))
}

fn fidelity_law() -> Result<CheckResult> {
    let total = circuit_unitary(CircuitVariant::SwapTerminated);
    let mut worst: f64 = 0.0;
    for p in linspace(11) {
        let map = reduced_map(&total, wp(p), Wire::S);
        for alpha in linspace(11) {
            let ket = InputState::alpha(alpha).ket()?;
            let out = map.apply(&(&ket * ket.adjoint()));
            let f = (ket.adjoint() * out * &ket)[(0, 0)].re;
            worst = worst.max((f - (1.0 + p) / 2.0).abs());
        }
    }
    Ok(check("fidelity_law", json!("(1+p)/2"), json!(worst), 1e-10, worst <= 1e-10))
}

fn table1() -> CheckResult {
    let simulated = bell_sandwich_table(&circuit_unitary(CircuitVariant::SwapTerminated));
    let reference = reference_sandwich_table();
    let matched = simulated.iter().zip(reference.iter()).filter(|(a, b)| max_abs_diff(a.3, b.3) <= 1e-12).count();
    check("table1_operators", json!(16), json!(matched), 1e-12, matched == 16)
}

fn closed_form_distances() -> Result<CheckResult> {
    let [u1, _, _] = block_unitaries();
    let total = circuit_unitary(CircuitVariant::SwapTerminated);
    let mut worst: f64 = 0.0;
    for p in linspace(5) {
        let after1 = reduced_map(&u1, wp(p), Wire::S);
        let fin = reduced_map(&total, wp(p), Wire::S);
        for a1 in linspace(6) {
            for a2 in linspace(6) {
                let delta = InputState::alpha(a1).density()?.into_mat() - InputState::alpha(a2).density()?.into_mat();
                let d1 = 0.5 * nmlab_core::qmath::trace_norm(&after1.apply(&delta));
                let df = 0.5 * nmlab_core::qmath::trace_norm(&fin.apply(&delta));
                worst = worst.max((d1 - distance_after_block1(a1, a2)).abs());
                worst = worst.max((df - final_distance(a1, a2, wp(p))).abs());
            }
        }
    }
    Ok(check("closed_form_distances", json!(0.0), json!(worst), 1e-12, worst <= 1e-12))
}

/// `(p, [N_blp, N_rhp, N_lfs])` on the block-dynamics 0.01 grid.
pub fn threshold_sweep(cfg: &RunConfig) -> Result<Vec<(f64, [f64; 3])>> {
    let measures = [Measure::Blp, Measure::Rhp, Measure::Lfs];
    let table = measure_sweep("fig2", DynamicsScheme::BLOCK, &measures, &p_grid(0.01), cfg)?;
    Ok(table.rows.iter().map(|r| (r[0], [r[1], r[2], r[3]])).collect())
}

fn column(sweep: &[(f64, [f64; 3])], m: Measure) -> Vec<(f64, f64)> {
    let k = match m {
        Measure::Blp => 0,
        Measure::Rhp => 1,
        Measure::Lfs => 2,
    };
    sweep.iter().map(|(p, v)| (*p, v[k])).collect()
}

fn threshold_checks(sweep: &[(f64, [f64; 3])], cutoff: f64) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let mut onsets = Vec::new();
    for (m, expected) in THRESHOLDS {
        let col = column(sweep, m);
        let at_cutoff = first_above(&col, cutoff);
        let pass = at_cutoff.is_some_and(|p| (p - expected).abs() <= THRESHOLD_TOL + 1e-9);
        out.push(check(
            &format!("threshold_{}_cutoff_{cutoff:e}", m.name()),
            json!(expected),
            json!(at_cutoff),
            THRESHOLD_TOL,
            pass,
        ));
        let onset = first_above(&col, ONSET_CUTOFF);
        let pass = onset.is_some_and(|p| (p - expected).abs() <= THRESHOLD_TOL + 1e-9);
        out.push(check(
            &format!("onset_{}_cutoff_{ONSET_CUTOFF:e}", m.name()),
            json!(expected),
            json!(onset),
            THRESHOLD_TOL,
            pass,
        ));
        // Once non-Markovian, stays non-Markovian as p grows.
        let up_set = at_cutoff.map_or(true, |p0| col.iter().filter(|(p, _)| *p >= p0).all(|(_, v)| *v > cutoff));
        out.push(check(&format!("up_set_{}", m.name()), json!(true), json!(up_set), cutoff, up_set));
        onsets.push(at_cutoff.unwrap_or(f64::INFINITY));
    }
    let ordered = onsets[0] <= onsets[1] && onsets[1] <= onsets[2];
    out.push(check("threshold_ordering_rhp_blp_lfs", json!(true), json!(onsets), 0.0, ordered));
    out
}

fn entanglement_consistency(sweep: &[(f64, [f64; 3])], cutoff: f64) -> CheckResult {
    let lowest =
        sweep.iter().filter(|(_, v)| v.iter().any(|&x| x > cutoff)).map(|(p, _)| *p).fold(f64::INFINITY, f64::min);
    check("non_markovian_implies_p_above_one_third", json!(">1/3"), json!(lowest), 0.0, lowest > 1.0 / 3.0)
}

fn gate_backflow(cfg: &RunConfig) -> Result<Vec<CheckResult>> {
    let scheme = DynamicsScheme::GATES;
    let traj = MapTrajectory::new(&Propagator::new(scheme), wp(0.0), cfg.grid_for(scheme), Wire::S)?;
    let r = blp_measure_on(&traj, &cfg.optimizer)?;
    let (theta, _) = r.optimal_pair.expect("BLP reports its pair");
    let total: f64 = r.increments.iter().map(|i| i.gain).sum();
    let inside: f64 = r.increments.iter().filter(|i| i.start >= 7.0 && i.end <= 8.0).map(|i| i.gain).sum();
    let fraction = if total > 0.0 { inside / total } else { 0.0 };
    let curve = traj.distance_curve(&InputState::zero(), &InputState::one())?;
    let early =
        traj.times().iter().zip(&curve).filter(|(t, _)| **t <= 5.0).map(|(_, d)| (d - 1.0).abs()).fold(0.0, f64::max);
    Ok(vec![
        check("gates_p0_blp_value", json!(">0.05"), json!(r.value), 0.0, r.value > 0.05),
        check("gates_p0_optimal_pair_is_z", json!(0.0), json!(theta.sin().abs()), 1e-6, theta.sin().abs() <= 1e-6),
        check("gates_p0_increments_in_last_gate", json!(1.0), json!(fraction), 0.0, total > 0.0 && fraction == 1.0),
        check("gates_p0_distance_one_before_t5", json!(0.0), json!(early), 1e-9, early <= 1e-9),
    ])
}

fn bbc_e2_law(cfg: &RunConfig) -> Result<Vec<CheckResult>> {
    let scheme = DynamicsScheme::BBC_GATES;
    let prop = Propagator::new(scheme);
    let grid = cfg.grid_for(scheme);
    let ps: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
    let deviations = ps
        .par_iter()
        .map(|&p| {
            let traj = MapTrajectory::new(&prop, wp(p), grid, Wire::E2)?;
            Ok((blp_pair_gain_on(&traj, &InputState::zero(), &InputState::one())?.value - p).abs())
        })
        .collect::<nmlab_core::Result<Vec<f64>>>()?;
    let worst = deviations.iter().copied().fold(0.0, f64::max);
    let traj = MapTrajectory::new(&prop, wp(0.0), grid, Wire::E2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut largest: f64 = 0.0;
    for _ in 0..10 {
        let (a, b) = (random_state(&mut rng), random_state(&mut rng));
        largest = largest.max(traj.distance_curve(&a, &b)?.into_iter().fold(0.0, f64::max));
    }
    Ok(vec![
        check("bbc_e2_blp_equals_p", json!("p"), json!(worst), 1e-3, worst <= 1e-3),
        check("bbc_e2_p0_distance_zero", json!(0.0), json!(largest), 1e-10, largest <= 1e-10),
    ])
}

fn werner_boundary() -> Result<CheckResult> {
    let layout = RegisterLayout::qubits(2);
    let mut worst: f64 = 0.0;
    let mut pass = true;
    for p in [0.0, 0.2, 1.0 / 3.0] {
        let e = log_negativity(&werner(wp(p)), &layout, &[0])?;
        pass &= e == 0.0;
        worst = worst.max(e);
    }
    for p in [0.34, 0.5, 1.0] {
        let e = log_negativity(&werner(wp(p)), &layout, &[0])?;
        let dev = (e - ((1.0 + 3.0 * p) / 2.0).log2()).abs();
        pass &= e > 0.0 && dev <= 1e-10;
        worst = worst.max(dev);
    }
    Ok(check("werner_log_negativity", json!("max(0, log2((1+3p)/2))"), json!(worst), 1e-10, pass))
}

fn end_of_protocol(cfg: &RunConfig) -> Result<Vec<CheckResult>> {
    let prop = Propagator::new(DynamicsScheme::BLOCK);
    let ccfg = cfg.correlation_config();
    let mut out = Vec::new();
    for p in [0.2, 0.5, 0.8] {
        let s = correlation_sample(&prop.joint_state(&InputState::zero(), wp(p), 1.0)?, 1.0, p, &ccfg)?;
        let pass = s.neg <= 1e-9 && s.discord <= 1e-6 && s.classical >= 1e-3;
        out.push(check(
            &format!("end_correlations_p{p}"),
            json!({"neg": "<=1e-9", "discord": "<=1e-6", "classical": ">=1e-3"}),
            json!({"neg": s.neg, "discord": s.discord, "classical": s.classical}),
            1e-6,
            pass,
        ));
    }
    let s = correlation_sample(&prop.joint_state(&InputState::zero(), wp(1.0), 1.0)?, 1.0, 1.0, &ccfg)?;
    let pass = s.neg <= 1e-6 && s.discord.abs() <= 1e-6 && s.classical.abs() <= 1e-6;
    out.push(check(
        "end_correlations_p1",
        json!(0.0),
        json!({"neg": s.neg, "discord": s.discord, "classical": s.classical}),
        1e-6,
        pass,
    ));
    Ok(out)
}

fn cptp_samples(cfg: &RunConfig) -> Result<CheckResult> {
    let mut worst_eig: f64 = 0.0;
    let mut worst_trace: f64 = 0.0;
    for scheme in [DynamicsScheme::BLOCK, DynamicsScheme::GATES] {
        let prop = Propagator::new(scheme);
        let grid = cfg.grid_for(scheme);
        for p in QUARTERS {
            let traj = MapTrajectory::new(&prop, wp(p), grid, Wire::S)?;
            worst_eig = worst_eig.min(min_choi_eigenvalue(&traj));
            for m in traj.maps() {
                worst_trace = worst_trace.max((choi_state(m).trace().re - 1.0).abs());
                worst_trace = worst_trace.max(m.trace_preservation_error());
            }
        }
    }
    let pass = worst_eig >= -1e-9 && worst_trace <= 1e-9;
    Ok(check("cptp_sampled_maps", json!(0.0), json!({"min_choi_eig": worst_eig, "trace_err": worst_trace}), 1e-9, pass))
}

fn propagator_endpoints() -> Result<CheckResult> {
    let prop = Propagator::new(DynamicsScheme::BLOCK);
    let total = circuit_unitary(CircuitVariant::SwapTerminated);
    let e0 = max_abs_diff(prop.at(0.0)?.mat(), UnitaryOp::identity(8).mat());
    let e1 = max_abs_diff(prop.at(1.0)?.mat(), total.mat());
    let worst = e0.max(e1);
    Ok(check("propagator_endpoints", json!(0.0), json!(worst), 1e-12, worst <= 1e-12))
}

fn superoperator_round_trip() -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for d in [2, 4] {
        let k = CMat::from_fn(d, d, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let action = |x: &CMat| &k * x * k.adjoint();
        let s = superop_from_action(action, d);
        for _ in 0..10 {
            let a = CMat::from_fn(d, d, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let h = &a + a.adjoint();
            worst = worst.max(max_abs_diff(&unvectorize(&vectorize(&h), d), &h));
            worst = worst.max(max_abs_diff(&s.apply(&h), &action(&h)));
        }
    }
    check("superoperator_round_trip", json!(0.0), json!(worst), 1e-12, worst <= 1e-12)
}

fn antipodal_optimality(cfg: &RunConfig) -> Result<CheckResult> {
    let scheme = DynamicsScheme::BLOCK;
    let traj = MapTrajectory::new(&Propagator::new(scheme), wp(0.8), cfg.grid_for(scheme), Wire::S)?;
    let best = blp_measure_on(&traj, &cfg.optimizer)?.value;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut largest: f64 = 0.0;
    for _ in 0..10 {
        let (a, b) = (random_state(&mut rng), random_state(&mut rng));
        largest = largest.max(blp_pair_gain_on(&traj, &a, &b)?.value);
    }
    Ok(check("blp_antipodal_optimality", json!(best), json!(largest), 1e-9, largest <= best + 1e-9))
}

/// Relative change of each measure when the time grid is refined.
pub fn grid_doubling(cfg: &RunConfig) -> Result<Vec<CheckResult>> {
    let scheme = DynamicsScheme::BLOCK;
    let prop = Propagator::new(scheme);
    let grid: TimeGrid = cfg.grid_for(scheme);
    let settings = cfg.measure_settings();
    let mut out = Vec::new();
    for p in [0.5, 0.8, 1.0] {
        for m in Measure::ALL {
            let coarse = evaluate(m, &prop, wp(p), grid, &settings)?.value;
            let fine = evaluate(m, &prop, wp(p), grid.refined(), &settings)?.value;
            let rel = if coarse.max(fine) > 0.0 { (fine - coarse).abs() / coarse.max(fine) } else { 0.0 };
            out.push(check(&format!("grid_doubling_{}_p{p}", m.name()), json!(coarse), json!(fine), 0.02, rel < 0.02));
        }
    }
    Ok(out)
}

fn determinism(cfg: &RunConfig) -> Result<CheckResult> {
    let sub = RunConfig { p_grid: Some(vec![0.45, 0.5, 0.7, 1.0]), ..cfg.clone() };
    let render = |workers: usize| -> Result<String> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
        let t = pool.install(|| crate::figures::run_figure(crate::figures::FigureId::Fig2, &sub))?;
        Ok(t.render(&sub.hash()))
    };
    let same = render(1)? == render(3)?;
    Ok(check("fig2_bytes_independent_of_workers", json!(true), json!(same), 0.0, same))
}

/// Runs every check. The block-dynamics threshold sweep dominates the cost.
pub fn verify_claims(cfg: &RunConfig) -> Result<Report> {
    cfg.validate()?;
    let mut checks = vec![channel_identity()?, fidelity_law()?, table1(), closed_form_distances()?];
    let sweep = threshold_sweep(cfg)?;
    checks.extend(threshold_checks(&sweep, cfg.threshold_cutoff));
    checks.extend(gate_backflow(cfg)?);
    checks.extend(bbc_e2_law(cfg)?);
    checks.push(werner_boundary()?);
    checks.extend(end_of_protocol(cfg)?);
    checks.push(entanglement_consistency(&sweep, cfg.threshold_cutoff));
    checks.push(cptp_samples(cfg)?);
    checks.push(propagator_endpoints()?);
    checks.push(superoperator_round_trip());
    checks.push(antipodal_optimality(cfg)?);
    checks.extend(grid_doubling(cfg)?);
    checks.push(determinism(cfg)?);
    Ok(Report { version: env!("CARGO_PKG_VERSION").into(), config: cfg.hash(), checks })
}
