use nalgebra::{DMatrix, Matrix2, Matrix4};
use num_complex::Complex64;
use optonet::analytic::{b1b2_no_feedback, b1b2_with_feedback, AdiabaticParams};
use optonet::entanglement::{extract_two_mode, log_negativity, mode_correlator, mode_log_negativity, TwoModeCovariance};
use optonet::gaussian::{
    add_cascade, build_drift_diffusion, steady_state, DissipatorSet, Ladder, LinearForm, LiouvillianSpec, ModeKind,
    ModeRegistry, QuadraticHamiltonian,
};
use optonet::models::{
    build_chain, build_model1, build_model1_slh, chain_label, chain_mechanical_modes, ChainParams, Model1Params,
};
use optonet::numerics::{eigenvalues, expm, integrate_covariance_ode, max_abs, solve_lyapunov, spectral_abscissa};
use optonet::slh::{series_product, SLHTriple};
use optonet::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| rng.gen_range(-scale..scale))
}

fn random_stable(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let a = random_matrix(rng, n, 1.0);
    let shift = spectral_abscissa(&a).unwrap() + rng.gen_range(0.05..1.0);
    a - DMatrix::identity(n, n) * shift
}

fn min_sym_eig(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigen().eigenvalues.min()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lyapunov_solution_is_symmetric_and_psd(seed in any::<u64>(), n in 2usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_stable(&mut rng, n);
        let b = random_matrix(&mut rng, n, 1.0);
        let q = &b * b.transpose();
        let x = solve_lyapunov(&s, &q).unwrap();
        let scale = 1.0 + max_abs(&x);
        prop_assert!(max_abs(&(&x - x.transpose())) <= 1e-12 * scale);
        prop_assert!(min_sym_eig(&x) >= -1e-10 * scale);
        let residual = &s * &x + &x * s.transpose() + &q;
        prop_assert!(max_abs(&residual) <= 1e-10 * (1.0 + max_abs(&q)) * scale);
    }

    #[test]
    fn expm_is_a_semigroup(seed in any::<u64>(), s in 0.0f64..2.0, t in 0.0f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // entries bounded by 1/4 keep every induced norm of the 4x4 matrix <= 1
        let a = random_matrix(&mut rng, 4, 0.25);
        let lhs = expm(&a, s + t).unwrap();
        let rhs = expm(&a, s).unwrap() * expm(&a, t).unwrap();
        prop_assert!(max_abs(&(lhs - rhs)) < 1e-10);
    }

    #[test]
    fn negativity_is_locally_symplectic_invariant(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = Model1Params { kappa: rng.gen_range(0.01..1.0), feedback: rng.gen_bool(0.5), ..Model1Params::fig2() };
        let st = steady_state(&build_model1(&p).unwrap()).unwrap();
        let tm = extract_two_mode(&st, "b1", "b2").unwrap();
        let before = log_negativity(&tm).unwrap();
        let s = local_symplectic(&mut rng);
        let after = log_negativity(&TwoModeCovariance::from_matrix(&(s * tm.matrix() * s.transpose()))).unwrap();
        prop_assert!((before - after).abs() <= 1e-9, "{} vs {}", before, after);
    }

    #[test]
    fn series_product_is_associative(seed in any::<u64>(), ports in 1usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 3;
        let g: Vec<SLHTriple> = (0..3).map(|_| random_triple(&mut rng, ports, n)).collect();
        let left = series_product(&series_product(&g[2], &g[1]).unwrap(), &g[0]).unwrap();
        let right = series_product(&g[2], &series_product(&g[1], &g[0]).unwrap()).unwrap();
        prop_assert!(max_abs(&(left.scattering() - right.scattering())) < 1e-12);
        for (l, r) in left.coupling().iter().zip(right.coupling()) {
            let diff = l.coeffs().iter().zip(r.coeffs()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            prop_assert!(diff < 1e-12);
        }
        prop_assert!(max_abs(&(left.hamiltonian().matrix() - right.hamiltonian().matrix())) < 1e-12);
    }

    #[test]
    fn generator_is_additive(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let reg = registry3();
        let (h1, h2) = (random_hamiltonian(&mut rng, 3), random_hamiltonian(&mut rng, 3));
        let mut d1 = DissipatorSet::new(3);
        d1.add_decay(0, rng.gen_range(0.1..1.0), rng.gen_range(0.0..2.0)).unwrap();
        d1.add_channel(random_form(&mut rng, 3), 1.0, 0.0).unwrap();
        let mut d2 = DissipatorSet::new(3);
        d2.add_decay(2, rng.gen_range(0.1..1.0), 0.0).unwrap();
        let mut both = d1.clone();
        both.add_decay(2, d2.rates()[(0, 0)].re, 0.0).unwrap();

        let build = |h: &QuadraticHamiltonian, d: &DissipatorSet| {
            build_drift_diffusion(&LiouvillianSpec::new(reg.clone(), h.clone(), d.clone()).unwrap()).unwrap()
        };
        let total = build(&h1.try_add(&h2).unwrap(), &both);
        let a = build(&h1, &d1);
        let b = build(&h2, &d2);
        prop_assert!(max_abs(&(&total.drift - &a.drift - &b.drift)) < 1e-12);
        prop_assert!(max_abs(&(&total.diffusion - &a.diffusion - &b.diffusion)) < 1e-12);
    }
}

fn registry3() -> ModeRegistry {
    ModeRegistry::from_modes([("x", ModeKind::Optical), ("y", ModeKind::Mechanical), ("z", ModeKind::Optical)]).unwrap()
}

fn random_ladder(rng: &mut ChaCha8Rng, n: usize) -> Ladder {
    let m = rng.gen_range(0..n);
    if rng.gen_bool(0.5) {
        Ladder::Annihilate(m)
    } else {
        Ladder::Create(m)
    }
}

fn random_hamiltonian(rng: &mut ChaCha8Rng, n: usize) -> QuadraticHamiltonian {
    let mut h = QuadraticHamiltonian::zero(n);
    for _ in 0..4 {
        let coeff = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        h.add_product(coeff, random_ladder(rng, n), random_ladder(rng, n));
    }
    h
}

fn random_form(rng: &mut ChaCha8Rng, n: usize) -> LinearForm {
    let mut f = LinearForm::zero(n);
    for _ in 0..3 {
        let term = LinearForm::single(n, random_ladder(rng, n), c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        f = f.try_add(&term).unwrap();
    }
    f
}

fn random_unitary(rng: &mut ChaCha8Rng, ports: usize) -> DMatrix<Complex64> {
    if ports == 1 {
        return DMatrix::from_element(1, 1, Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU)));
    }
    let th: f64 = rng.gen_range(0.0..1.57);
    let (p1, p2, p3) = (rng.gen_range(0.0..std::f64::consts::TAU), rng.gen_range(0.0..std::f64::consts::TAU), rng.gen_range(0.0..std::f64::consts::TAU));
    let e = |x: f64| Complex64::from_polar(1.0, x);
    DMatrix::from_row_slice(
        2,
        2,
        &[e(p1) * th.cos(), e(p2) * th.sin(), -e(p3 - p2 + p1) * th.sin(), e(p3) * th.cos()],
    )
}

fn random_triple(rng: &mut ChaCha8Rng, ports: usize, n: usize) -> SLHTriple {
    let s = random_unitary(rng, ports);
    let l = (0..ports).map(|_| random_form(rng, n)).collect();
    SLHTriple::new(s, l, random_hamiltonian(rng, n)).unwrap()
}

/// `R(θ) · diag(e^r, e^-r) · R(φ)` on each mode.
fn local_symplectic(rng: &mut ChaCha8Rng) -> Matrix4<f64> {
    let one = |rng: &mut ChaCha8Rng| {
        let rot = |a: f64| Matrix2::new(a.cos(), -a.sin(), a.sin(), a.cos());
        let r: f64 = rng.gen_range(-1.0..1.0);
        rot(rng.gen_range(0.0..std::f64::consts::TAU)) * Matrix2::new(r.exp(), 0.0, 0.0, (-r).exp()) * rot(rng.gen_range(0.0..std::f64::consts::TAU))
    };
    let mut s = Matrix4::zeros();
    s.fixed_view_mut::<2, 2>(0, 0).copy_from(&one(rng));
    s.fixed_view_mut::<2, 2>(2, 2).copy_from(&one(rng));
    s
}

#[test]
fn product_states_are_separable() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let thermal = |rng: &mut ChaCha8Rng| {
            let s = local_symplectic(rng).fixed_view::<2, 2>(0, 0).into_owned();
            s * s.transpose() * (rng.gen_range(0.0..3.0) + 0.5)
        };
        let tm = TwoModeCovariance { a: thermal(&mut rng), b: thermal(&mut rng), c: Matrix2::zeros() };
        assert_eq!(log_negativity(&tm).unwrap(), 0.0);
    }
}

#[test]
fn slh_composition_equals_direct_construction() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for draw in 0..20 {
        let p = Model1Params {
            g1: rng.gen_range(0.0..0.1),
            g2: rng.gen_range(0.0..0.1),
            kappa: rng.gen_range(0.0..1.0),
            cavity_decay1: rng.gen_range(0.2..3.0),
            cavity_decay2: rng.gen_range(0.2..3.0),
            mech_damping: rng.gen_range(0.001..0.1),
            nbar: rng.gen_range(0.0..5.0),
            feedback: draw % 4 != 3,
        };
        let direct = build_drift_diffusion(&build_model1(&p).unwrap()).unwrap();
        let slh = build_drift_diffusion(&build_model1_slh(&p).unwrap()).unwrap();
        assert!(max_abs(&(&direct.drift - &slh.drift)) < 1e-12, "drift differs at {p:?}");
        assert!(max_abs(&(&direct.diffusion - &slh.diffusion)) < 1e-12, "diffusion differs at {p:?}");
    }
}

#[test]
fn eigenvalues_are_roots_of_the_characteristic_polynomial() {
    // Faddeev-LeVerrier coefficients, evaluated at each reported eigenvalue.
    let dd = build_drift_diffusion(&build_model1(&Model1Params::fig2()).unwrap()).unwrap();
    let s = &dd.drift;
    let n = s.nrows();
    let mut coeffs = vec![1.0];
    let mut m = DMatrix::<f64>::zeros(n, n);
    let id = DMatrix::<f64>::identity(n, n);
    for k in 1..=n {
        m = s * &m + &id * coeffs[k - 1];
        coeffs.push(-(s * &m).trace() / k as f64);
    }
    let eigs = eigenvalues(s).unwrap();
    assert_eq!(eigs.len(), n);
    for lambda in &eigs {
        let value = coeffs.iter().fold(c(0.0, 0.0), |acc, &a| acc * lambda + a);
        let deriv_scale = (1..=n).map(|k| coeffs[k - 1].abs() * lambda.norm().powi((n - k) as i32)).sum::<f64>();
        assert!(value.norm() < 1e-9 * deriv_scale, "|p(λ)| = {} at {lambda}", value.norm());
    }
    let abscissa = spectral_abscissa(s).unwrap();
    assert!(abscissa < 0.0);
    assert!((abscissa - eigs.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)).abs() < 1e-14);
}

#[test]
fn rk4_is_fourth_order() {
    let dd = build_drift_diffusion(&build_model1(&Model1Params::fig2()).unwrap()).unwrap();
    let (s, d) = (&dd.drift, &dd.diffusion);
    let n = s.nrows();
    let v0 = DMatrix::identity(n, n) * 0.5;
    let v_inf = solve_lyapunov(s, d).unwrap();
    let t_end = 8.0;
    let e = expm(s, t_end).unwrap();
    let exact = &v_inf + &e * (&v0 - &v_inf) * e.transpose();
    let gap = |dt: f64| max_abs(&(integrate_covariance_ode(s, d, &v0, t_end, dt).unwrap() - &exact));
    let (g1, g2, g3) = (gap(0.4), gap(0.2), gap(0.1));
    assert!(g1 / g2 >= 8.0 && g2 / g3 >= 8.0, "gaps {g1:e} {g2:e} {g3:e}");
}

#[test]
fn uncoupled_cavities_give_block_diagonal_generator() {
    let p = Model1Params { kappa: 0.0, feedback: false, nbar: 0.3, ..Model1Params::fig2() };
    let spec = build_model1(&p).unwrap();
    let dd = build_drift_diffusion(&spec).unwrap();
    let st = steady_state(&spec).unwrap();
    for i in 0..4 {
        for j in 4..8 {
            for m in [&dd.drift, &dd.diffusion, &st.covariance] {
                assert!(m[(i, j)].abs() <= 1e-12 && m[(j, i)].abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn relabelled_network_gives_permuted_state() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let p = Model1Params {
            g1: rng.gen_range(0.0..0.02),
            g2: rng.gen_range(0.0..0.1),
            kappa: rng.gen_range(0.0..1.0),
            cavity_decay1: rng.gen_range(0.5..2.0),
            cavity_decay2: rng.gen_range(0.5..2.0),
            mech_damping: 0.01,
            nbar: rng.gen_range(0.0..1.0),
            feedback: true,
        };
        let original = steady_state(&build_model1(&p).unwrap()).unwrap();

        // Cavity 2 now occupies the first registry slots and the cascade runs backwards.
        let reg = ModeRegistry::from_modes([
            ("a2", ModeKind::Optical),
            ("b2", ModeKind::Mechanical),
            ("a1", ModeKind::Optical),
            ("b1", ModeKind::Mechanical),
        ])
        .unwrap();
        let mut h = QuadraticHamiltonian::zero(4);
        h.add_product(c(p.g2, 0.0), Ladder::Create(0), Ladder::Annihilate(1));
        h.add_product(c(p.g1, 0.0), Ladder::Annihilate(2), Ladder::Annihilate(3));
        h.add_product(c(p.kappa, 0.0), Ladder::Annihilate(2), Ladder::Create(0));
        let mut d = DissipatorSet::new(4);
        d.add_decay(0, p.cavity_decay2, 0.0).unwrap();
        d.add_decay(1, p.mech_damping, p.nbar).unwrap();
        d.add_decay(2, p.cavity_decay1, 0.0).unwrap();
        d.add_decay(3, p.mech_damping, p.nbar).unwrap();
        let spec = LiouvillianSpec::new(reg, h, d).unwrap();
        let spec = add_cascade(&spec, "a1", "a2", p.cavity_decay1, p.cavity_decay2).unwrap();
        let swapped = steady_state(&spec).unwrap();

        let perm = [4, 5, 6, 7, 0, 1, 2, 3];
        let back = DMatrix::from_fn(8, 8, |i, j| swapped.covariance[(perm[i], perm[j])]);
        assert!(max_abs(&(back - &original.covariance)) < 1e-10);
    }
}

#[test]
fn squeezing_eventually_destabilises_the_network() {
    let base = Model1Params::fig2();
    assert!(steady_state(&build_model1(&base).unwrap()).is_ok());
    let mut boundary = None;
    for k in 1..=400 {
        let g1 = base.g1 * (1.0 + 0.05 * k as f64);
        match steady_state(&build_model1(&Model1Params { g1, ..base }).unwrap()) {
            Err(Error::UnstableDynamics { abscissa }) => {
                assert!(abscissa >= 0.0);
                boundary = Some(g1);
                break;
            }
            Ok(st) => assert!(st.physicality().is_physical()),
            Err(e) => panic!("unexpected error {e}"),
        }
    }
    let g1 = boundary.expect("no instability found while scaling g1");
    println!("stability boundary at g2 = {}: g1 ≈ {g1:.4}", base.g2);
}

#[test]
fn mechanical_entanglement_decreases_with_temperature() {
    for feedback in [false, true] {
        let mut last = f64::INFINITY;
        let mut reached_zero = false;
        for i in 0..=60 {
            let p = Model1Params { nbar: 0.005 * i as f64, feedback, ..Model1Params::fig2() };
            let n = mode_log_negativity(&steady_state(&build_model1(&p).unwrap()).unwrap(), "b1", "b2").unwrap();
            assert!(n <= last + 1e-12);
            last = n;
            reached_zero |= n == 0.0;
        }
        assert!(reached_zero);
    }
}

#[test]
fn chain_parity_selection_rule() {
    for kappa in [0.05, 0.1, 0.5] {
        for n_ports in [2, 4, 7] {
            for feedback in [false, true] {
                let p = ChainParams { n_ports, ..ChainParams::fig8(kappa, feedback) };
                let st = steady_state(&build_chain(&p).unwrap()).unwrap();
                let mech = chain_mechanical_modes(n_ports);
                for (i, x) in mech.iter().enumerate() {
                    for y in &mech[i + 1..] {
                        let same_parity = x.ends_with("_1") == y.ends_with("_1");
                        if same_parity {
                            assert!(mode_log_negativity(&st, x, y).unwrap() <= 1e-10, "{x} {y}");
                        }
                    }
                }
                assert!(mode_log_negativity(&st, &chain_label('b', 1, 1), &chain_label('b', 1, 2)).unwrap() > 0.0);
            }
        }
    }
}

#[test]
fn closed_forms_converge_with_linewidth() {
    for (g1, g2) in [(0.01f64, 0.05f64), (0.02, 0.03)] {
        for kappa in [0.02, 0.1, 0.3] {
            for feedback in [false, true] {
                let gap = |scale: f64| {
                    let gamma = scale * 10.0 * g1.max(g2).max(kappa);
                    let p = Model1Params {
                        g1,
                        g2,
                        kappa,
                        cavity_decay1: gamma,
                        cavity_decay2: gamma,
                        mech_damping: 0.01,
                        nbar: 0.0,
                        feedback,
                    };
                    let full = mode_correlator(&steady_state(&build_model1(&p).unwrap()).unwrap(), "b1", "b2")
                        .unwrap()
                        .norm();
                    let ap = AdiabaticParams { g1, g2, kappa, cavity_decay: gamma, mech_damping: 0.01 };
                    let closed = if feedback { b1b2_with_feedback(&ap) } else { b1b2_no_feedback(&ap) };
                    (closed.unwrap().norm() - full).abs() / full
                };
                let gaps = [gap(1.0), gap(4.0), gap(16.0)];
                assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{g1} {g2} {kappa} {feedback}: {gaps:?}");
            }
        }
    }
}
