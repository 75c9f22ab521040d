use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use super::*;
use crate::cliffords::{embed, single_qubit_cliffords, GateOp, GateTimes};
use crate::config::DeviceConfig;
use crate::dynamics::{CMatrix, C64};
use crate::pulses::Direction;
use crate::qubits::QubitId;
use crate::rng::RngHandle;

fn random_density(rng: &mut ChaCha8Rng) -> CMatrix {
    let a = CMatrix::from_fn(16, 16, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let m = &a * a.adjoint();
    let t = m.trace();
    m / t
}

#[test]
fn local_application_matches_embedding() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let rho = random_density(&mut rng);
    let u = CMatrix::from_fn(4, 4, |_, _| C64::new(rng.random(), rng.random()));
    for targets in [[0usize, 1], [2, 1], [3, 0]] {
        let full = embed(&u, &targets, 4);
        let got = super::executor::left_apply_for_tests(&rho, &u, &targets);
        assert!((got - &full * &rho).norm() < 1e-12);
    }
}

fn noiseless() -> (NoiseModel, SpamModel) {
    (NoiseModel::ideal(&DeviceConfig::default()), SpamModel::ideal())
}

#[test]
fn noiseless_network_benchmarking_survives() {
    let (noise, spam) = noiseless();
    let data = run_network_benchmarking(&noise, &spam, &[2, 4, 10], 5, 200, RngHandle::new(3)).unwrap();
    data.validate().unwrap();
    for r in &data.records {
        assert_eq!(r.survival, 1.0);
        assert_eq!(r.spectator_l2, 1.0);
    }
    assert_eq!(data.records.len(), 15);
}

#[test]
fn noiseless_two_qubit_rb_survives() {
    let (noise, spam) = noiseless();
    let data = run_two_qubit_rb(&noise, &spam, &[1, 3, 6], 4, 200, RngHandle::new(4), None).unwrap();
    for r in &data.records {
        assert_eq!(r.survival, 1.0);
        assert_eq!(r.spectator_l1, 1.0);
        assert_eq!(r.spectator_l2, 1.0);
    }
}

#[test]
fn odd_nb_length_is_rejected() {
    let (noise, spam) = noiseless();
    assert!(matches!(
        run_network_benchmarking(&noise, &spam, &[2, 3], 1, 10, RngHandle::new(0)),
        Err(crate::Error::OddLength(3))
    ));
}

#[test]
fn datasets_reproduce_bit_for_bit() {
    let cfg = DeviceConfig::default();
    let noise = NoiseModel::from_config(&cfg, ideal_transfer_channel(FRAC_PI_2)).with_transfer_depolarizing(0.01);
    let spam = SpamModel::from_config(&cfg);
    let a = run_network_benchmarking(&noise, &spam, &[2, 8], 6, 500, RngHandle::new(9)).unwrap();
    let b = run_network_benchmarking(&noise, &spam, &[2, 8], 6, 500, RngHandle::new(9)).unwrap();
    assert_eq!(a, b);
    let c = run_network_benchmarking(&noise, &spam, &[2, 8], 6, 500, RngHandle::new(10)).unwrap();
    assert_ne!(a, c);
}

/// Exact NB survival for a random sequence under gate-independent
/// depolarizing transfers: the swaps cancel and a single-qubit RB remains.
#[test]
fn depolarized_nb_survival_matches_closed_form() {
    let cfg = DeviceConfig::default();
    let r = 0.02;
    let noise = NoiseModel::ideal(&cfg).with_transfer_depolarizing(r);
    let spam = SpamModel::ideal();
    let times = GateTimes::default();
    let g = single_qubit_cliffords();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for n in [2usize, 6, 12] {
        let mut ops = Vec::new();
        let mut seq = Vec::new();
        let mut carrier = QubitId::L1;
        let z = g[crate::cliffords::single_qubit_index(&crate::cliffords::rz(std::f64::consts::PI)).unwrap()].clone();
        for _ in 0..n {
            let c = &g[rng.random_range(0..24)];
            ops.extend(c.ops_on(|_| carrier));
            seq.push(c.clone());
            let dir = if carrier == QubitId::L1 { Direction::L1ToL2 } else { Direction::L2ToL1 };
            ops.push(GateOp::transfer(dir, FRAC_PI_2, &times));
            ops.push(GateOp::frame_transfer(dir));
            seq.push(z.clone());
            carrier = carrier.partner();
        }
        ops.extend(crate::cliffords::invert_sequence(&seq).unwrap().ops_on(|_| QubitId::L1));
        let mut ex = Executor::new(&noise, &spam);
        ex.run(&ops, &times).unwrap();
        let probs = ex.probabilities();
        let p_l1_zero: f64 = (0..16).filter(|i| i & 0b0100 == 0).map(|i| probs[i]).sum();
        let expected = 0.5 + 0.5 * (1.0 - 2.0 * r).powi(n as i32);
        assert!((p_l1_zero - expected).abs() < 1e-12, "{n}: {p_l1_zero} vs {expected}");
    }
}

#[test]
fn readout_confusion_sets_expected_counts() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let spam = SpamModel::ideal().with_readout_fidelity(0.959);
    let mut ideal = vec![0.0; 16];
    ideal[0] = 1.0;
    let shots = 200_000;
    let counts = spam_apply(&ideal, &spam, &mut rng, shots);
    assert_eq!(counts.iter().sum::<u64>(), shots);
    let p0 = marginal_zero(&counts, QubitId::L1);
    assert!((p0 - 0.959).abs() < 4.0 * (0.959f64 * 0.041 / shots as f64).sqrt());

    let flat = SpamModel::ideal().with_readout_fidelity(0.5);
    let counts = spam_apply(&ideal, &flat, &mut rng, 160_000);
    for c in counts {
        assert!((c as f64 - 10_000.0).abs() < 500.0);
    }

    let perfect = spam_apply(&ideal, &SpamModel::ideal(), &mut rng, 1000);
    assert_eq!(perfect[0], 1000);
}

fn synthetic(a: f64, p: f64, b: f64, lengths: &[usize]) -> Vec<(f64, f64, f64)> {
    lengths
        .iter()
        .map(|&n| (n as f64, a * p.powi(n as i32) + b, 1e-3))
        .collect()
}

#[test]
fn exact_decay_is_recovered() {
    let fit = fit_points(&synthetic(0.5, 0.98, 0.5, &NB_LENGTHS)).unwrap();
    assert!((fit.p - 0.98).abs() < 1e-6, "{}", fit.p);
    assert!((fit.a - 0.5).abs() < 1e-5 && (fit.b - 0.5).abs() < 1e-5);
    assert!(!fit.constant);
}

#[test]
fn constant_data_pins_p_to_one() {
    let fit = fit_points(&synthetic(0.0, 0.9, 0.8, &NB_LENGTHS)).unwrap();
    assert!(fit.constant);
    assert_eq!(fit.p, 1.0);
    assert_eq!(fit.rate, 0.0);
    assert!((fit.b - 0.8).abs() < 1e-12);
}

#[test]
fn too_few_lengths_is_an_error() {
    assert!(fit_points(&synthetic(0.5, 0.9, 0.5, &[2, 4])).is_err());
}

#[test]
fn shot_noise_fits_are_calibrated() {
    let (a, p, b) = (0.45f64, 0.97f64, 0.5f64);
    let lengths = NB_LENGTHS;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut inside = 0;
    for trial in 0..100 {
        let mut records = Vec::new();
        for &n in &lengths {
            let truth = a * p.powi(n as i32) + b;
            for seed in 0..30 {
                let k = Binomial::new(1000, truth).unwrap().sample(&mut rng);
                let s = k as f64 / 1000.0;
                records.push(RbRecord {
                    length: n,
                    seed,
                    shots: 1000,
                    survival: s,
                    spectator_l1: s,
                    spectator_l2: 1.0,
                });
            }
        }
        let data = RbDataset {
            protocol: Protocol::Nb,
            lengths: lengths.to_vec(),
            records,
        };
        let fit = fit_exponential(&data, Population::Survival).unwrap();
        if (fit.p - p).abs() <= 3.0 * fit.p_err {
            inside += 1;
        }
        let _ = trial;
    }
    assert!(inside >= 95, "{inside}/100");
}

#[test]
fn rate_conventions() {
    let mut fit = fit_points(&synthetic(0.5, 0.976, 0.5, &NB_LENGTHS)).unwrap();
    fit.p = 0.976;
    assert!((eps_from_decay(&fit, Protocol::Nb).unwrap() - 0.012).abs() < 1e-12);
    let reference = DecayFitResult { p: 1.0, ..fit };
    let interleaved = DecayFitResult { p: 0.92, ..fit };
    assert!((interleaved_error(&interleaved, &reference).0 - 0.06).abs() < 1e-12);
    let one = DecayFitResult { p: 1.0, ..fit };
    assert_eq!(eps_from_decay(&one, Protocol::Tqrb).unwrap(), 0.0);
    assert!(eps_from_decay(&fit, Protocol::Interleaved).is_err());
}

#[test]
fn leakage_rate_is_recovered() {
    let cfg = DeviceConfig::default();
    let spam = SpamModel::from_config(&cfg);
    for ell in [0.005, 0.01, 0.02] {
        let noise = NoiseModel::ideal(&cfg).with_leakage(ell, 0.875);
        let data = run_network_benchmarking(&noise, &spam, &LEAKAGE_LENGTHS, 30, 1000, RngHandle::new(21)).unwrap();
        let fit = fit_leakage(&data, Population::SpectatorL2).unwrap();
        println!("{ell} {fit:?}");
        assert!((fit.rate - ell).abs() < 0.15 * ell, "{fit:?}");
    }
}

#[test]
fn zero_leakage_spectator_is_flat() {
    let cfg = DeviceConfig::default();
    let noise = NoiseModel::ideal(&cfg).with_transfer_depolarizing(0.01);
    let spam = SpamModel::from_config(&cfg);
    let data = run_network_benchmarking(&noise, &spam, &NB_LENGTHS, 30, 1000, RngHandle::new(22)).unwrap();
    let fit = fit_leakage(&data, Population::SpectatorL2).unwrap();
    assert!(fit.constant, "{fit:?}");
    assert_eq!(fit.rate, 0.0);
}

#[test]
fn frame_mismatch_is_tracked_in_the_executor() {
    // Noiseless but with distinct l-qubit frequencies and gates delayed
    // to odd times: survival stays at one.
    let cfg = DeviceConfig::default();
    let mut noise = NoiseModel::ideal(&cfg);
    noise.frequencies[2] += 2.0 * std::f64::consts::PI * 3.3e6;
    let data = run_network_benchmarking(&noise, &SpamModel::ideal(), &[2, 6], 5, 100, RngHandle::new(5)).unwrap();
    assert!(data.records.iter().all(|r| r.survival == 1.0));
}

#[test]
fn identity_interleave_matches_reference() {
    let cfg = DeviceConfig::default();
    let noise = NoiseModel::from_config(&cfg, ideal_transfer_channel(FRAC_PI_2));
    let spam = SpamModel::from_config(&cfg);
    let lengths = [1, 2, 4, 8];
    let reference = run_two_qubit_rb(&noise, &spam, &lengths, 10, 1000, RngHandle::new(30), None).unwrap();
    let inter = run_two_qubit_rb(&noise, &spam, &lengths, 10, 1000, RngHandle::new(30), Some(&[])).unwrap();
    assert_eq!(inter.protocol, Protocol::Interleaved);
    let fr = fit_exponential(&reference, Population::Survival).unwrap();
    let fi = fit_exponential(&inter, Population::Survival).unwrap();
    assert!((fr.p - fi.p).abs() <= 2.0 * (fr.p_err.powi(2) + fi.p_err.powi(2)).sqrt() + 1e-12);
}

#[test]
fn csv_has_one_row_per_sequence() {
    let (noise, spam) = noiseless();
    let data = run_network_benchmarking(&noise, &spam, &[2, 4], 3, 10, RngHandle::new(1)).unwrap();
    let mut buf = Vec::new();
    data.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 7);
    assert!(text.starts_with("length,seed,shots,survival,spectator_l1,spectator_l2"));
}

#[test]
fn calibrated_lossless_channel_matches_ideal() {
    let mut cfg = DeviceConfig::default();
    cfg.cpw.modes_retained = 1;
    let ch = transfer_channel_from_dynamics(&cfg, crate::pulses::Method::Satd, false).unwrap();
    let ideal = ideal_transfer_channel(FRAC_PI_2);
    let mut rho = CMatrix::zeros(4, 4);
    // emitter (|0⟩ + |1⟩)/√2, receiver |0⟩
    for i in [0, 2] {
        for j in [0, 2] {
            rho[(i, j)] = C64::new(0.5, 0.0);
        }
    }
    let dev = (ch.apply(&rho) - ideal.apply(&rho)).norm();
    assert!(dev < 1e-5, "{dev}");
}
