use lcoupler_core::benchmarking::{Executor, NoiseModel, SpamModel};
use lcoupler_core::cliffords::{Axis, GateOp, GateTimes};
use lcoupler_core::dynamics::{simulate_transfer, sweep_transfer};
use lcoupler_core::pulses::{build_transfer_schedule, default_theta_max, Method};
use lcoupler_core::tomography::{bell_experiment, BellVariant, Readout};
use lcoupler_core::{DeviceConfig, PulseSchedule32, QubitId, RngHandle};

#[test]
fn config_survives_a_file_round_trip() {
    let dir = std::env::temp_dir().join(format!("lcoupler-pipeline-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("device.json");
    let cfg = DeviceConfig::default();
    std::fs::write(&path, cfg.to_json_string()).unwrap();
    let back = DeviceConfig::load(&path).unwrap();
    assert_eq!(back.to_json_string(), cfg.to_json_string());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn partial_config_merges_over_defaults() {
    let cfg = DeviceConfig::from_json_str("{\"single_qubit_gate_duration\": 40e-9}").unwrap();
    assert_eq!(cfg.single_qubit_gate_duration, 40e-9);
    assert_eq!(cfg.transfer.total_duration, DeviceConfig::default().transfer.total_duration);
}

#[test]
fn single_precision_schedule_transfers() {
    let mut cfg = DeviceConfig::default();
    cfg.cpw.modes_retained = 1;
    let s: PulseSchedule32 = build_transfer_schedule(&cfg, Method::Satd, default_theta_max(Method::Satd), 1e-10).unwrap();
    let r = simulate_transfer(&cfg, &s, false).unwrap();
    assert!(r.pop_receiver > 0.999, "{}", r.pop_receiver);
}

#[test]
fn sweep_grid_shape() {
    let cfg = DeviceConfig::default();
    let grid = sweep_transfer(&cfg, Method::Stirap, &[2e6, 3e6], &[100e-9, 150e-9, 200e-9], false);
    assert_eq!(grid.cells.len(), 6);
    assert!(grid.cells.iter().all(|c| c.outcome.is_ok()));
    assert_eq!(grid.cell(1, 2).g, 3e6);
    assert_eq!(grid.cell(1, 2).sweep_time, 200e-9);
}

#[test]
fn executed_remote_cnot_flips_the_target() {
    let cfg = DeviceConfig::default();
    let noise = NoiseModel::ideal(&cfg);
    let spam = SpamModel::ideal();
    let times = GateTimes::default();
    for (d1, d2) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        let mut ops = Vec::new();
        if d1 == 1 {
            ops.push(GateOp::sq(QubitId::D1, Axis::X, std::f64::consts::PI, &times));
        }
        if d2 == 1 {
            ops.push(GateOp::sq(QubitId::D2, Axis::X, std::f64::consts::PI, &times));
        }
        ops.push(GateOp::cnot(QubitId::D1, QubitId::D2));
        let mut ex = Executor::new(&noise, &spam);
        ex.run(&ops, &times).unwrap();
        let p = ex.probabilities();
        // Register order D1, L1, L2, D2 with D1 most significant.
        let want = (d1 << 3) | (d2 ^ d1);
        assert!((p[want] - 1.0).abs() < 1e-9, "{d1}{d2}: {p:?}");
    }
}

#[test]
fn noisy_bell_sits_between_mixed_and_pure() {
    let cfg = DeviceConfig::default();
    let channel = lcoupler_core::benchmarking::ideal_transfer_channel(std::f64::consts::FRAC_PI_2);
    let noise = NoiseModel::from_config(&cfg, channel);
    let spam = SpamModel::from_config(&cfg);
    for v in BellVariant::ALL {
        let r = bell_experiment(v, &noise, &spam, Some(4000), RngHandle::new(9), Readout::Corrected).unwrap();
        assert!(r.optimized.fidelity > 0.5 && r.optimized.fidelity < 1.0, "{v:?}: {}", r.optimized.fidelity);
        assert!(r.optimized.fidelity >= r.fidelity - 1e-12);
    }
}
