//! Randomized invariants of the linear-algebra layer and the dynamics.

use nalgebra::DMatrix;
use nmlab_core::correlations::{classical_correlations_search, discord};
use nmlab_core::nonmarkov::{blp_measure_on, blp_pair_gain_on, MapTrajectory, OptConfig, TimeGrid};
use nmlab_core::qmath::{
    choi_state, max_abs_diff, mutual_information, partial_trace, regularized_inverse, superop_from_action,
    trace_distance, unitary_fractional_power, unvectorize, vectorize, CMat, DensityMatrix, HermitianOp, RegisterLayout,
    UnitaryOp, C64, PINV_TOL,
};
use nmlab_core::register::{system_map, DynamicsScheme, InputState, Propagator, WernerParam, Wire};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gaussianish(rng: &mut ChaCha8Rng, d: usize) -> CMat {
    DMatrix::from_fn(d, d, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

fn random_hermitian(seed: u64, d: usize) -> CMat {
    let a = gaussianish(&mut ChaCha8Rng::seed_from_u64(seed), d);
    &a + a.adjoint()
}

fn random_unitary(seed: u64, d: usize) -> UnitaryOp {
    HermitianOp::new(random_hermitian(seed, d)).unwrap().evolve(1.0)
}

/// Random full-rank density matrix `A A† / Tr`.
fn random_density(seed: u64, d: usize) -> DensityMatrix {
    let a = gaussianish(&mut ChaCha8Rng::seed_from_u64(seed), d);
    let m = &a * a.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(m.unscale(tr)).unwrap()
}

/// Eigenvalues of the Hermitian matrix `m`, independent of the library's solver:
/// characteristic roots via the real symmetric embedding [[Re, −Im], [Im, Re]].
fn embedded_eigenvalues(m: &CMat) -> Vec<f64> {
    let d = m.nrows();
    let real = DMatrix::<f64>::from_fn(2 * d, 2 * d, |i, j| {
        let (a, b) = (i % d, j % d);
        match (i < d, j < d) {
            (true, true) | (false, false) => m[(a, b)].re,
            (true, false) => -m[(a, b)].im,
            (false, true) => m[(a, b)].im,
        }
    });
    let mut ev: Vec<f64> = real.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    // every eigenvalue appears twice in the embedding
    ev.into_iter().step_by(2).collect()
}

fn wp(p: f64) -> WernerParam {
    WernerParam::new(p).unwrap()
}

fn state(theta: f64, phi: f64) -> InputState {
    InputState::bloch(theta, phi)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn trace_distance_is_a_bounded_unitarily_invariant_metric(s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>(), su in any::<u64>()) {
        let (a, b, c) = (random_density(s1, 4), random_density(s2, 4), random_density(s3, 4));
        let dab = trace_distance(&a, &b).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&dab));
        prop_assert!(dab <= trace_distance(&a, &c).unwrap() + trace_distance(&c, &b).unwrap() + 1e-12);
        let u = random_unitary(su, 4);
        let ua = DensityMatrix::new(u.conjugate(a.mat())).unwrap();
        let ub = DensityMatrix::new(u.conjugate(b.mat())).unwrap();
        prop_assert!((trace_distance(&ua, &ub).unwrap() - dab).abs() < 1e-12);
        // oracle: half the sum of |eigenvalues| of the difference
        let oracle: f64 = embedded_eigenvalues(&(a.mat() - b.mat())).iter().map(|x| x.abs()).sum::<f64>() / 2.0;
        prop_assert!((dab - oracle).abs() < 1e-12);
    }

    #[test]
    fn superoperator_round_trip(seed in any::<u64>(), d in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k1 = gaussianish(&mut rng, d);
        let k2 = gaussianish(&mut rng, d);
        let action = |x: &CMat| &k1 * x * k1.adjoint() + &k2 * x.transpose() * k2.adjoint();
        let s = superop_from_action(action, d);
        for _ in 0..4 {
            let h = random_hermitian(rng.gen(), d);
            prop_assert!(max_abs_diff(&unvectorize(&vectorize(&h), d), &h) == 0.0);
            prop_assert!(max_abs_diff(&s.apply(&h), &action(&h)) < 1e-12);
        }
    }

    #[test]
    fn partial_trace_inverts_tensor_product(s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>()) {
        let (a, b, c) = (random_density(s1, 2), random_density(s2, 2), random_density(s3, 2));
        let abc = a.tensor(&b).tensor(&c);
        let layout = RegisterLayout::register();
        prop_assert!(max_abs_diff(partial_trace(&abc, &layout, &[0]).unwrap().mat(), a.mat()) < 1e-14);
        prop_assert!(max_abs_diff(partial_trace(&abc, &layout, &[2]).unwrap().mat(), c.mat()) < 1e-14);
        prop_assert!(max_abs_diff(partial_trace(&abc, &layout, &[0, 2]).unwrap().mat(), a.tensor(&c).mat()) < 1e-14);
        // product states carry no mutual information
        prop_assert!(mutual_information(&abc, &layout, &[0]).unwrap().abs() < 1e-10);
    }

    #[test]
    fn fractional_powers_compose_and_are_continuous(seed in any::<u64>(), s in 0.0f64..0.5, t in 0.0f64..0.5, h in 1e-6f64..1e-3) {
        let u = random_unitary(seed, 8);
        let us = unitary_fractional_power(&u, s).unwrap();
        let ut = unitary_fractional_power(&u, t).unwrap();
        let ust = unitary_fractional_power(&u, s + t).unwrap();
        prop_assert!(max_abs_diff(us.compose(&ut).mat(), ust.mat()) < 1e-11);
        let uh = unitary_fractional_power(&u, s + h).unwrap();
        // principal generator has spectral norm ≤ π
        prop_assert!(max_abs_diff(uh.mat(), us.mat()) <= std::f64::consts::PI * h * 1.01);
    }

    #[test]
    fn sampled_system_maps_are_cptp(p in 0.0f64..=1.0, t in 0.0f64..=1.0, tg in 0.0f64..=8.0) {
        for (scheme, time) in [(DynamicsScheme::BLOCK, t), (DynamicsScheme::GATES, tg)] {
            let m = system_map(scheme, wp(p), time).unwrap();
            let choi = choi_state(&m);
            prop_assert!(embedded_eigenvalues(&choi)[0] >= -1e-9);
            prop_assert!((choi.trace().re - 1.0).abs() <= 1e-9);
            prop_assert!(m.trace_preservation_error() <= 1e-9);
        }
    }

    #[test]
    fn regularized_inverse_round_trip(p in 0.05f64..=1.0, t in 0.0f64..0.9) {
        let m = system_map(DynamicsScheme::BLOCK, wp(p), t).unwrap();
        let inv = regularized_inverse(&m, PINV_TOL).unwrap();
        prop_assert!(!inv.singular);
        let id = CMat::identity(4, 4);
        prop_assert!(max_abs_diff(&(m.mat() * inv.map.mat()), &id) < 1e-10);
        prop_assert!(max_abs_diff(&(inv.map.mat() * m.mat()), &id) < 1e-10);
    }

    #[test]
    fn effective_channel_is_depolarizing(p in 0.0f64..=1.0, theta in 0.0f64..=std::f64::consts::PI, phi in 0.0f64..6.28) {
        let rho = state(theta, phi).density().unwrap();
        let out = system_map(DynamicsScheme::BLOCK, wp(p), 1.0).unwrap().apply(rho.mat());
        let expected = rho.mat().scale(p) + CMat::identity(2, 2).scale((1.0 - p) / 2.0);
        prop_assert!(max_abs_diff(&out, &expected) < 1e-12);
    }

    #[test]
    fn correlation_bounds(p in 0.0f64..=1.0, t in 0.0f64..=8.0, theta in 0.0f64..=std::f64::consts::PI) {
        let rho = Propagator::new(DynamicsScheme::GATES).joint_state(&state(theta, 0.4), wp(p), t).unwrap();
        let layout = RegisterLayout::register();
        let opt = OptConfig::default();
        let j = classical_correlations_search(&rho, &layout, &[0], &opt).unwrap();
        let mutual = mutual_information(&rho, &layout, &[0]).unwrap();
        prop_assert!(j.value >= -1e-9);
        prop_assert!(j.value <= mutual + 1e-9);
        prop_assert!(j.value >= j.coarse_value);
        let d = discord(&rho, &layout, &[0], &opt).unwrap();
        prop_assert!(d >= -1e-9);
        prop_assert!((d - (mutual - j.value)).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn antipodal_pairs_dominate_arbitrary_pairs(t1 in 0.0f64..=3.14, f1 in 0.0f64..6.28, t2 in 0.0f64..=3.14, f2 in 0.0f64..6.28) {
        let grid = TimeGrid::for_scheme(DynamicsScheme::BLOCK, 200);
        let traj = MapTrajectory::new(&Propagator::new(DynamicsScheme::BLOCK), wp(0.8), grid, Wire::S).unwrap();
        let best = blp_measure_on(&traj, &OptConfig::default()).unwrap().value;
        let gain = blp_pair_gain_on(&traj, &state(t1, f1), &state(t2, f2)).unwrap().value;
        prop_assert!(gain <= best + 1e-9);
    }
}
