use std::f64::consts::PI;

use kicked_qubit::analysis::fit_log_log;
use kicked_qubit::integrator::{rk4_evolve, rk4_propagator, IntegratorConfig};
use kicked_qubit::propagators::{
    degenerate_propagator, free_evolution, kick_antikick_propagator, kick_train_propagator,
    kicked_propagator, no_to_interaction_double, no_to_interaction_single, no_to_schrodinger,
    rectangular_exact, to_interaction_picture,
};
use kicked_qubit::pulse::v_interaction_picture;
use kicked_qubit::su2::{pauli_exponential, probabilities};
use kicked_qubit::{
    Complex, DoubleKickParams, Mat2, PauliVector, Pulse, PulseSequence, QubitState, SystemParams,
};
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        rng_seed: RngSeed::Fixed(0),
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn angle() -> impl Strategy<Value = f64> {
    -2.0 * PI..2.0 * PI
}

fn axis() -> impl Strategy<Value = [f64; 3]> {
    (0.0..PI, 0.0..2.0 * PI).prop_map(|(th, ph)| [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()])
}

fn det_defect(m: &Mat2) -> f64 {
    (m.det().norm() - 1.0).abs()
}

fn is_su2_like(m: &Mat2) -> bool {
    m.unitarity_defect() <= 1e-10 && det_defect(m) <= 1e-10
}

proptest! {
    #![proptest_config(config(512))]

    #[test]
    fn closed_form_propagators_are_unitary(
        alpha in angle(),
        gamma in 0.0..0.1f64,
        beta in 0.0..1.0f64,
        tk in 0.0..500.0f64,
        dt1 in 1e-3..500.0f64,
        ts in 0.0..600.0f64,
    ) {
        let t = tk + dt1;
        let dk = DoubleKickParams::new(tk, tk + ts).unwrap();
        let ms = [
            kicked_propagator(alpha, gamma, tk, t).unwrap(),
            kick_antikick_propagator(alpha, gamma, &dk, dk.t2 + dt1).unwrap(),
            rectangular_exact(alpha, beta, gamma, tk, t),
            no_to_schrodinger(alpha, gamma * t),
            no_to_interaction_single(alpha, beta, gamma * tk),
            no_to_interaction_double(alpha, beta, gamma, &dk),
            free_evolution(gamma * t),
            degenerate_propagator(alpha),
        ];
        for m in &ms {
            prop_assert!(is_su2_like(m), "{m}");
        }
    }

    #[test]
    fn pauli_exponential_unitary_and_additive(a in angle(), b in angle(), n in axis()) {
        let ea = pauli_exponential(a, n).unwrap();
        let eb = pauli_exponential(b, n).unwrap();
        prop_assert!(is_su2_like(&ea));
        prop_assert!((ea * eb).max_diff(&pauli_exponential(a + b, n).unwrap()) < 1e-12);
        prop_assert!((ea * ea.dagger()).max_diff(&Mat2::identity()) < 1e-12);
    }

    #[test]
    fn free_and_degenerate_compose(a in angle(), b in angle()) {
        prop_assert!((free_evolution(a) * free_evolution(b)).max_diff(&free_evolution(a + b)) < 1e-12);
        prop_assert!(
            (degenerate_propagator(a) * degenerate_propagator(b)).max_diff(&degenerate_propagator(a + b)) < 1e-12
        );
    }

    #[test]
    fn probabilities_sum_to_one(a in angle(), n in axis(), th in 0.0..PI, ph in angle()) {
        let u = pauli_exponential(a, n).unwrap();
        let s = QubitState::new(Complex::from((0.5 * th).cos()), Complex::from_polar((0.5 * th).sin(), ph));
        let (p1, p2) = probabilities(&u, &s).unwrap();
        prop_assert!((p1 + p2 - 1.0).abs() < 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&p1) && (0.0..=1.0 + 1e-12).contains(&p2));
    }

    #[test]
    fn pauli_vector_round_trip(c in proptest::array::uniform8(-3.0..3.0f64)) {
        let v = PauliVector::new(
            Complex::new(c[0], c[1]),
            Complex::new(c[2], c[3]),
            Complex::new(c[4], c[5]),
            Complex::new(c[6], c[7]),
        );
        let back = PauliVector::from_mat(&v.to_mat());
        prop_assert!((back - v).max_norm() < 1e-14);
    }

    #[test]
    fn kicked_time_reversal(alpha in angle(), gamma in -0.1..0.1f64, tk in 0.0..500.0f64, d in 1e-3..500.0f64) {
        let t = tk + d;
        let fwd = kicked_propagator(alpha, gamma, tk, t).unwrap();
        let back = kicked_propagator(-alpha, -gamma, t - tk, t).unwrap();
        prop_assert!((back * fwd).max_diff(&Mat2::identity()) < 1e-10);
    }

    #[test]
    fn interaction_frame_keeps_populations(alpha in angle(), gamma in 0.0..0.1f64, tk in 0.0..500.0f64, d in 1e-3..500.0f64) {
        let t = tk + d;
        let u = kicked_propagator(alpha, gamma, tk, t).unwrap();
        let ui = to_interaction_picture(gamma, t, &u);
        prop_assert!((u.m21.norm_sqr() - ui.m21.norm_sqr()).abs() < 1e-12);
        prop_assert!(ui.max_diff(&no_to_interaction_single(alpha, 0.0, gamma * tk)) < 1e-12);
    }

    #[test]
    fn kick_trains_match_closed_forms(alpha in angle(), gamma in 0.0..0.1f64, t1 in 0.0..300.0f64, ts in 1e-3..500.0f64, d in 1e-3..300.0f64) {
        let params = SystemParams::from_gamma(gamma).unwrap();
        let dk = DoubleKickParams::new(t1, t1 + ts).unwrap();
        let t = dk.t2 + d;
        let train = PulseSequence::new(vec![Pulse::kick(alpha, dk.t1), Pulse::kick(-alpha, dk.t2)]);
        let got = kick_train_propagator(&train, &params, 0.0, t).unwrap();
        prop_assert!(got.max_diff(&kick_antikick_propagator(alpha, gamma, &dk, t).unwrap()) < 1e-10);
        let single = PulseSequence::single(Pulse::kick(alpha, t1));
        let got = kick_train_propagator(&single, &params, 0.0, t).unwrap();
        prop_assert!(got.max_diff(&kicked_propagator(alpha, gamma, t1, t).unwrap()) < 1e-10);
    }

    #[test]
    fn pulse_integrals_are_additive(
        alpha in angle(),
        tau in 0.1..20.0f64,
        c in 0.0..100.0f64,
        cuts in proptest::array::uniform3(-50.0..200.0f64),
        rect in any::<bool>(),
    ) {
        let p = if rect { Pulse::rectangular(alpha, tau, c) } else { Pulse::gaussian(alpha, tau, c) };
        let mut x = cuts;
        x.sort_by(f64::total_cmp);
        let whole = p.integral(x[0], x[2]);
        let parts = p.integral(x[0], x[1]) + p.integral(x[1], x[2]);
        prop_assert!((whole - parts).abs() < 1e-12 * alpha.abs().max(1.0));
        prop_assert!(p.integral(x[0], x[2]).abs() <= alpha.abs() * (1.0 + 1e-12));
    }

    #[test]
    fn interaction_coupling_keeps_magnitude(alpha in angle(), tau in 0.1..20.0f64, c in 0.0..100.0f64, t in 0.0..200.0f64, gamma in 0.0..0.5f64) {
        let params = SystemParams::from_gamma(gamma).unwrap();
        let seq = PulseSequence::single(Pulse::gaussian(alpha, tau, c));
        let v = seq.v_of_t(t).unwrap();
        let vi = v_interaction_picture(&params, &seq, t).unwrap();
        prop_assert!((vi.magnitude() - v.abs()).abs() <= 1e-12 * v.abs() + 1e-150);
    }

    #[test]
    fn log_log_fit_recovers_power(k in -4.0..4.0f64, c in 0.1..10.0f64) {
        let x: Vec<f64> = (0..8).map(|i| 1e-3 * 2f64.powi(i)).collect();
        let y: Vec<f64> = x.iter().map(|v| c * v.powf(k)).collect();
        let f = fit_log_log(&x, &y, k).unwrap();
        prop_assert!(f.within(1e-9) && (f.intercept - c.ln()).abs() < 1e-8);
    }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn rk4_conserves_norm_and_is_linear(
        alpha in angle(),
        tau in 0.5..5.0f64,
        c in 10.0..30.0f64,
        gamma in 0.0..0.5f64,
        th in 0.0..PI,
        ph in angle(),
    ) {
        let params = SystemParams::from_gamma(gamma).unwrap();
        let seq = PulseSequence::new(vec![Pulse::gaussian(alpha, tau, c), Pulse::rectangular(-0.5 * alpha, tau, c + 8.0)]);
        let cfg = IntegratorConfig::with_dt(tau / 200.0).sampled(5.0);
        let init = QubitState::new(Complex::from((0.5 * th).cos()), Complex::from_polar((0.5 * th).sin(), ph));
        let ts = rk4_evolve(&seq, &params, &init, 0.0, 50.0, &cfg).unwrap();
        prop_assert!(ts.max_norm_defect() <= 1e-8);
        let u = rk4_propagator(&seq, &params, 0.0, 50.0, &cfg).unwrap();
        let s = ts.final_state().unwrap();
        let us = u.apply(&init);
        prop_assert!((us.a1 - s.a1).norm().max((us.a2 - s.a2).norm()) < 1e-10);
    }
}
