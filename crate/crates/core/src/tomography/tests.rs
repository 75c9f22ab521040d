use super::*;
use crate::config::DeviceConfig;

fn ideal() -> (NoiseModel, SpamModel) {
    (NoiseModel::ideal(&DeviceConfig::default()), SpamModel::ideal())
}

fn proj(psi: &DVector<C64>) -> CMatrix {
    psi * psi.adjoint()
}

#[test]
fn ideal_circuits_reach_their_bell_states() {
    for v in BellVariant::ALL {
        let psi = ideal_register_state(&bell_circuit(v, &GateTimes::default()));
        let rho = reduce_to_pair(&proj(&psi), v.pair());
        let f = state_fidelity(&rho, &proj(&canonical_bell(v))).unwrap();
        assert!((f - 1.0).abs() < 1e-9, "{v:?}: {f}");
        if v != BellVariant::LqubitSqrt {
            let l = reduce_to_pair(&proj(&psi), [QubitId::L1, QubitId::L2]);
            assert!((l[(0, 0)].re - 1.0).abs() < 1e-9, "{v:?} leaves the l-qubits excited");
        }
    }
}

#[test]
fn fidelity_arithmetic() {
    let bell = proj(&canonical_bell(BellVariant::DataFull));
    assert!((state_fidelity(&bell, &bell).unwrap() - 1.0).abs() < 1e-12);
    let mixed = CMatrix::identity(4, 4) * C64::new(0.25, 0.0);
    assert!((state_fidelity(&mixed, &bell).unwrap() - 0.25).abs() < 1e-12);
    let noisy = &bell * C64::new(0.9, 0.0) + &mixed * C64::new(0.1, 0.0);
    assert!((state_fidelity(&noisy, &bell).unwrap() - 0.925).abs() < 1e-12);
    assert!(state_fidelity(&CMatrix::identity(2, 2), &bell).is_err());
}

#[test]
fn exact_tomography_of_ground_state() {
    let (noise, spam) = ideal();
    let t = state_tomography(&[], [QubitId::D1, QubitId::D2], &noise, &spam, None, RngHandle::new(0)).unwrap();
    let mut want = CMatrix::zeros(4, 4);
    want[(0, 0)] = C64::new(1.0, 0.0);
    assert!((&t.rho - want).norm() < 1e-10);
    assert_eq!(t.expectations.len(), 15);
}

#[test]
fn exact_tomography_recovers_ideal_bell_states() {
    let (noise, spam) = ideal();
    for v in BellVariant::ALL {
        let r = bell_experiment(v, &noise, &spam, None, RngHandle::new(1), Readout::Raw).unwrap();
        assert!((r.optimized.fidelity - 1.0).abs() < 1e-9, "{v:?}");
    }
}

#[test]
fn shot_limited_bell_fidelity() {
    let (noise, spam) = ideal();
    let r = bell_experiment(BellVariant::DataFull, &noise, &spam, Some(100_000), RngHandle::new(2), Readout::Raw).unwrap();
    assert!(r.optimized.fidelity >= 0.995, "{}", r.optimized.fidelity);
}

#[test]
fn depolarized_bell_matches_closed_form() {
    let bell = proj(&canonical_bell(BellVariant::DataSqrt));
    for lambda in [0.1, 0.3] {
        let rho = &bell * C64::new(1.0 - lambda, 0.0) + CMatrix::identity(4, 4) * C64::new(lambda / 4.0, 0.0);
        let t = tomography_from_state(&rho, [QubitId::D1, QubitId::D2], &SpamModel::ideal(), Some(20_000), RngHandle::new(3)).unwrap();
        let f = state_fidelity(&t.rho, &bell).unwrap();
        assert!((f - (1.0 - 0.75 * lambda)).abs() < 0.01, "{lambda}: {f}");
    }
}

#[test]
fn projection_is_idempotent_and_valid() {
    let bell = proj(&canonical_bell(BellVariant::DataFull));
    let mixed = &bell * C64::new(0.7, 0.0) + CMatrix::identity(4, 4) * C64::new(0.075, 0.0);
    assert!((project_psd(&mixed) - &mixed).norm() < 1e-12);
    // An unphysical estimate becomes a state.
    let mut bad = mixed.clone();
    bad[(0, 0)] -= C64::new(0.3, 0.0);
    bad[(3, 3)] += C64::new(0.3, 0.0);
    bad[(0, 3)] += C64::new(0.4, 0.0);
    bad[(3, 0)] += C64::new(0.4, 0.0);
    let p = project_psd(&bad);
    assert!((p.trace().re - 1.0).abs() < 1e-12);
    assert!(hermitian_eigen(&p).0.iter().all(|&v| v > -1e-12));
}

#[test]
fn phase_optimization_removes_local_z() {
    let psi = canonical_bell(BellVariant::LqubitSqrt);
    let rotated = local_phases(0.7, -1.9) * &psi;
    let r = phase_optimized_fidelity(&proj(&rotated), &psi).unwrap();
    assert!((r.fidelity - 1.0).abs() < 1e-9);
    assert!(state_fidelity(&proj(&rotated), &proj(&psi)).unwrap() < 0.9);
}

#[test]
fn more_shots_improve_fidelity_on_average() {
    let (noise, spam) = ideal();
    let prep = bell_circuit(BellVariant::LqubitSqrt, &GateTimes::default());
    let psi = canonical_bell(BellVariant::LqubitSqrt);
    let mean = |shots: u64| {
        (0..20)
            .map(|k| {
                let t = state_tomography(&prep, [QubitId::L1, QubitId::L2], &noise, &spam, Some(shots), RngHandle::new(100 + k)).unwrap();
                phase_optimized_fidelity(&t.rho, &psi).unwrap().fidelity
            })
            .sum::<f64>()
            / 20.0
    };
    let f = [mean(1_000), mean(10_000), mean(100_000)];
    assert!(f[0] < f[1] && f[1] < f[2], "{f:?}");
}

#[test]
fn too_few_shots_rejected() {
    let (noise, spam) = ideal();
    assert!(state_tomography(&[], [QubitId::D1, QubitId::D2], &noise, &spam, Some(10), RngHandle::new(0)).is_err());
}

#[test]
fn result_serialises_as_pairs() {
    let (noise, spam) = ideal();
    let t = state_tomography(&[], [QubitId::D1, QubitId::D2], &noise, &spam, None, RngHandle::new(0)).unwrap();
    let v: serde_json::Value = serde_json::to_value(&t).unwrap();
    assert_eq!(v["rho"][0][0][0], 1.0);
    let back: TomographyResult = serde_json::from_value(v).unwrap();
    assert!((back.rho - t.rho).norm() < 1e-15);
}

#[test]
fn readout_correction_undoes_known_confusion() {
    let cfg = DeviceConfig::default();
    let noise = NoiseModel::ideal(&cfg);
    let mut spam = SpamModel::from_config(&cfg);
    spam.thermal_population = [0.0; 4];
    let v = BellVariant::LqubitSqrt;
    let raw = bell_experiment(v, &noise, &spam, None, RngHandle::new(3), Readout::Raw).unwrap();
    let fixed = bell_experiment(v, &noise, &spam, None, RngHandle::new(3), Readout::Corrected).unwrap();
    // Correlators shrink by (2f - 1) per qubit under symmetric confusion.
    let shrink = (2.0 * 0.959 - 1.0) * (2.0 * 0.957 - 1.0);
    assert!((raw.optimized.fidelity - (1.0 + 3.0 * shrink) / 4.0).abs() < 1e-6, "{}", raw.optimized.fidelity);
    assert!((fixed.optimized.fidelity - 1.0).abs() < 1e-9, "{}", fixed.optimized.fidelity);
}
