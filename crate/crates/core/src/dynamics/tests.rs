use std::sync::Arc;

use approx::assert_abs_diff_eq;
use proptest::prelude::*;

use super::*;
use crate::basis::Basis;
use crate::config::DeviceConfig;
use crate::pulses::{
    build_schedule, build_transfer_schedule, default_theta_max, reverse_schedule, Method,
    PulseSchedule, DEFAULT_DT,
};
use crate::rng::RngHandle;

fn one_mode() -> DeviceConfig {
    let mut cfg = DeviceConfig::default();
    cfg.cpw.modes_retained = 1;
    cfg
}

fn satd(cfg: &DeviceConfig) -> PulseSchedule<f64> {
    build_transfer_schedule(cfg, Method::Satd, default_theta_max(Method::Satd), DEFAULT_DT).unwrap()
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[test]
fn amplitude_damping_matches_exponential() {
    let cfg = one_mode();
    let t1 = 20e-6;
    let schedule = PulseSchedule::idle(t1, t1 / 4.0);
    let basis = Arc::new(Basis::build(1, 1).unwrap());
    let model = build_hamiltonian(&cfg, &schedule, basis.clone()).unwrap();
    let mut collapse = CollapseSet::lossless(1);
    collapse.amplitude_damping[0] = 1.0 / t1;
    let e = basis.qubit_state(1, 0).unwrap();
    let rho0 = DensityOperator::basis_state(basis, e);
    let out = evolve(&model, &collapse, &rho0, 1e-10).unwrap();
    assert_abs_diff_eq!(out.population(e), (-1.0f64).exp(), epsilon = 1e-6);
}

#[test]
fn pure_dephasing_decays_coherence() {
    let cfg = one_mode();
    let t = 5e-6;
    let schedule = PulseSchedule::idle(t, t / 4.0);
    let basis = Arc::new(Basis::build(1, 1).unwrap());
    let model = build_hamiltonian(&cfg, &schedule, basis.clone()).unwrap();
    let mut collapse = CollapseSet::lossless(1);
    collapse.dephasing[0] = 1.0 / t;
    let g = basis.ground();
    let e = basis.qubit_state(1, 0).unwrap();
    let mut m = nalgebra::DMatrix::from_element(basis.len(), basis.len(), crate::real::cre(0.0));
    for &(i, j) in &[(g, g), (g, e), (e, g), (e, e)] {
        m[(i, j)] = crate::real::cre(0.5);
    }
    let rho0 = DensityOperator::from_matrix(basis, m).unwrap();
    let out = evolve(&model, &collapse, &rho0, 1e-10).unwrap();
    assert_abs_diff_eq!(out.matrix[(g, e)].re, 0.5 * (-1.0f64).exp(), epsilon = 1e-7);
}

#[test]
fn lossless_evolution_stays_pure() {
    let cfg = DeviceConfig::default();
    let res = simulate_transfer(&cfg, &satd(&cfg), false).unwrap();
    assert_abs_diff_eq!(res.state.purity(), 1.0, epsilon = 1e-8);
    assert_abs_diff_eq!(res.pop_emitter + res.pop_receiver + res.pop_other, 1.0, epsilon = 1e-9);
}

#[test]
fn vacuum_rabi_follows_cosine() {
    let g = 3.5e6;
    let times: Vec<f64> = (0..=40).map(|k| k as f64 * 2.5e-9).collect();
    let pts = vacuum_rabi(&DeviceConfig::default(), g, &times, false).unwrap();
    for p in &pts {
        let exact = (std::f64::consts::TAU * g * p.t).cos().powi(2);
        assert_abs_diff_eq!(p.pop_qubit, exact, epsilon = 1e-7);
        assert_abs_diff_eq!(p.pop_qubit + p.pop_mode, 1.0, epsilon = 1e-8);
    }
    let swap = 1.0 / (4.0 * g);
    assert_abs_diff_eq!(swap, 71.43e-9, epsilon = 1e-11);
    let at = vacuum_rabi(&DeviceConfig::default(), g, &[swap], false).unwrap();
    assert!(at[0].pop_mode > 1.0 - 1e-7);
}

#[test]
fn satd_single_mode_is_complete() {
    let cfg = one_mode();
    let res = simulate_transfer(&cfg, &satd(&cfg), false).unwrap();
    assert_abs_diff_eq!(res.pop_receiver, 1.0, epsilon = 1e-6);
}

#[test]
fn stirap_falls_short_of_satd() {
    let cfg = one_mode();
    let s = simulate_transfer(&cfg, &satd(&cfg), false).unwrap();
    let st = build_transfer_schedule(&cfg, Method::Stirap, default_theta_max(Method::Stirap), DEFAULT_DT).unwrap();
    let r = simulate_transfer(&cfg, &st, false).unwrap();
    assert!(r.pop_receiver < s.pop_receiver - 0.1, "{} vs {}", r.pop_receiver, s.pop_receiver);
}

#[test]
fn stirap_is_adiabatic_when_slow() {
    let cfg = one_mode();
    let s = build_schedule(&cfg, Method::Stirap, default_theta_max(Method::Stirap), 1e-9, 3.5e6, 13.5e-6).unwrap();
    let r = simulate_transfer(&cfg, &s, false).unwrap();
    assert!(r.pop_receiver > 0.999, "{}", r.pop_receiver);
}

#[test]
fn empty_schedule_is_identity() {
    let cfg = DeviceConfig::default();
    let res = simulate_transfer(&cfg, &PulseSchedule::idle(0.0, DEFAULT_DT), true).unwrap();
    assert_eq!(res.pop_emitter, 1.0);
}

#[test]
fn sweep_cell_reproduces_single_run() {
    let cfg = one_mode();
    let grid = sweep_transfer::<f64>(&cfg, Method::Satd, &[3.5e6], &[135e-9], false);
    let single = simulate_transfer::<f64>(&cfg, &sweep_schedule(&cfg, Method::Satd, 3.5e6, 135e-9).unwrap(), false).unwrap();
    let cell = grid.cell(0, 0).outcome.as_ref().unwrap();
    assert_eq!(cell.pop_receiver.to_bits(), single.pop_receiver.to_bits());
    assert_eq!(cell.pop_other.to_bits(), single.pop_other.to_bits());
    assert!(!grid.cell(0, 0).saturated);
}

#[test]
fn fast_satd_saturates_the_cap() {
    let cfg = one_mode();
    let grid = sweep_transfer(&cfg, Method::Satd, &[3.5e6], &[50e-9], false);
    assert!(grid.cell(0, 0).saturated);
    let s = sweep_schedule(&cfg, Method::Satd, 3.5e6, 50e-9).unwrap();
    assert!(s.max_coupling() > 4e6);
}

#[test]
fn sweep_csv_has_one_row_per_cell() {
    let cfg = one_mode();
    let grid = sweep_transfer(&cfg, Method::Stirap, &[2e6, 3e6], &[100e-9], false);
    let mut buf = Vec::new();
    grid.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next().unwrap(), "g_hz,T_s,pop_emitter,pop_receiver,pop_other,saturated");
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn reversed_transfer_mirrors_forward() {
    let mut cfg = DeviceConfig::default();
    cfg.l_qubits[1] = cfg.l_qubits[0].clone();
    let s = satd(&cfg);
    let fwd = simulate_transfer(&cfg, &s, false).unwrap();
    let bwd = simulate_transfer(&cfg, &reverse_schedule(&s), false).unwrap();
    assert_abs_diff_eq!(fwd.pop_receiver, bwd.pop_receiver, epsilon = 1e-8);
    assert_abs_diff_eq!(fwd.pop_other, bwd.pop_other, epsilon = 1e-8);
}

#[test]
fn halving_tolerance_stays_within_error_estimate() {
    let cfg = DeviceConfig::default();
    let s = satd(&cfg);
    let a = simulate_transfer_with_tol(&cfg, &s, true, 1e-7).unwrap();
    let b = simulate_transfer_with_tol(&cfg, &s, true, 0.5e-7).unwrap();
    let diff = (a.pop_receiver - b.pop_receiver).abs().max((a.pop_emitter - b.pop_emitter).abs());
    assert!(diff < a.report.error_estimate, "{diff} vs {}", a.report.error_estimate);
}

#[test]
fn lossy_state_is_valid() {
    let cfg = DeviceConfig::default();
    let res = simulate_transfer(&cfg, &satd(&cfg), true).unwrap();
    res.state.validate().unwrap();
    let total = res.pop_emitter + res.pop_receiver + res.pop_other;
    assert!(total <= 1.0 + 1e-9 && total > 0.9);
}

#[test]
fn single_precision_transfer() {
    let cfg = one_mode();
    let s = build_transfer_schedule::<f32>(&cfg, Method::Satd, default_theta_max(Method::Satd), 1e-10).unwrap();
    let res = simulate_transfer(&cfg, &s, false).unwrap();
    assert!((res.pop_receiver - 1.0).abs() < 1e-3, "{}", res.pop_receiver);
}

#[test]
fn idle_channel_is_identity() {
    let cfg = one_mode();
    let ch = extract_channel(&cfg, &PulseSchedule::idle(50e-9, DEFAULT_DT), Subsystem::TwoQubit, false).unwrap();
    let id = CMatrix::identity(16, 16);
    let dev = (ch.superop() - id).iter().fold(0.0f64, |m, z| m.max(z.norm()));
    assert!(dev < 1e-8, "{dev}");
}

#[test]
fn satd_channel_sends_emitter_to_minus_receiver() {
    let cfg = one_mode();
    let ch = extract_channel(&cfg, &satd(&cfg), Subsystem::TwoQubit, false).unwrap();
    // |10⟩ (index 2) lands on -|01⟩ (index 1).
    let out = ch.apply(&{
        let mut m = CMatrix::zeros(4, 4);
        m[(2, 2)] = c(1.0, 0.0);
        m
    });
    assert_abs_diff_eq!(out[(1, 1)].re, 1.0, epsilon = 1e-6);
    assert!(ch.trace_preservation_error() < 1e-8);
    assert!(ch.min_choi_eigenvalue() > -1e-8);
}

#[test]
fn fidelity_two_ways_agree() {
    let cfg = DeviceConfig::default();
    let ch = extract_channel(&cfg, &satd(&cfg), Subsystem::OneQubit, true).unwrap();
    let z = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0)]));
    let exact = ch.average_gate_fidelity(&z);
    let mut rng = RngHandle::new(7).rng();
    let mc = ch.average_fidelity_monte_carlo(&z, 200, &mut rng);
    assert!((exact - mc).abs() < 1e-3, "{exact} vs {mc}");
    assert!(exact > 0.9 && exact < 1.0);
    assert!(ch.leakage[1] > 0.0);
}

#[test]
fn channel_is_linear_on_product_inputs() {
    let cfg = one_mode();
    let s = satd(&cfg);
    let ch = extract_channel(&cfg, &s, Subsystem::TwoQubit, true).unwrap();
    let mut rng = RngHandle::new(11).rng();
    for _ in 0..20 {
        let a = haar_state(2, &mut rng);
        let b = haar_state(2, &mut rng);
        let psi = a.kronecker(&b);
        let rho = &psi * psi.adjoint();
        let direct = propagate_subsystem(&cfg, &s, Subsystem::TwoQubit, true, &rho).unwrap();
        let dev = (ch.apply(&rho) - direct).iter().fold(0.0f64, |m, z| m.max(z.norm()));
        assert!(dev < 1e-8, "{dev}");
    }
}

#[test]
fn one_qubit_channel_needs_no_second_excitation() {
    let cfg = one_mode();
    let r = extract_channel(&cfg, &satd(&cfg), Subsystem::OneQubit, false).unwrap();
    assert_eq!(r.dim(), 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]
    #[test]
    fn lossy_populations_never_exceed_one(g in 1.0e6f64..4.0e6, t in 40e-9f64..150e-9) {
        let cfg = one_mode();
        let s = build_schedule(&cfg, Method::Satd, std::f64::consts::FRAC_PI_2, 1e-9, g, t).unwrap();
        let r = simulate_transfer(&cfg, &s, true).unwrap();
        prop_assert!(r.pop_emitter + r.pop_receiver + r.pop_other <= 1.0 + 1e-9);
        prop_assert!(r.state.validate().is_ok());
    }
}

fn amplitude_damping(gamma: f64) -> QuantumChannel {
    let k0 = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c((1.0 - gamma).sqrt(), 0.0)]);
    let k1 = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(gamma.sqrt(), 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    QuantumChannel::from_kraus(vec![k0, k1]).unwrap()
}

#[test]
fn amplitude_damping_fidelity_matches_closed_form() {
    let g = 0.1;
    let ch = amplitude_damping(g);
    let f_pro = (1.0 + (1.0 - g).sqrt()).powi(2) / 4.0;
    let id = CMatrix::identity(2, 2);
    assert_abs_diff_eq!(ch.process_fidelity(&id), f_pro, epsilon = 1e-12);
    assert_abs_diff_eq!(ch.average_gate_fidelity(&id), (2.0 * f_pro + 1.0) / 3.0, epsilon = 1e-12);
    let mut rng = RngHandle::new(3).rng();
    let mc = ch.average_fidelity_monte_carlo(&id, 201, &mut rng);
    assert_abs_diff_eq!(mc, ch.average_gate_fidelity(&id), epsilon = 2e-3);
}

#[test]
fn non_trace_preserving_kraus_is_rejected() {
    let k = CMatrix::identity(2, 2) * c(0.9, 0.0);
    assert!(QuantumChannel::from_kraus(vec![k]).is_err());
}

#[test]
fn composition_multiplies_kraus_sets() {
    let a = amplitude_damping(0.2);
    let b = amplitude_damping(0.3);
    let ab = a.compose(&b).unwrap();
    let direct = amplitude_damping(1.0 - 0.8 * 0.7);
    let dev = (ab.superop() - direct.superop()).iter().fold(0.0f64, |m, z| m.max(z.norm()));
    assert!(dev < 1e-12);
    assert!(ab.min_choi_eigenvalue() > -1e-12);
}

#[test]
fn haar_states_are_normalised() {
    let mut rng = RngHandle::new(5).rng();
    for d in [2, 4] {
        assert_abs_diff_eq!(haar_state(d, &mut rng).norm(), 1.0, epsilon = 1e-12);
    }
}
