use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::cliffords::mean_physical_pulses;
use crate::config::{CouplerPair, DeviceConfig};
use crate::dynamics::{extract_channel, CMatrix, QuantumChannel, Subsystem, C64};
use crate::error::{invalid, Result};
use crate::pulses::{build_transfer_schedule, Method, DEFAULT_DT};
use crate::qubits::QubitId;

/// Relaxation times of one qubit for idle decoherence (s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdleParams {
    pub t1: f64,
    pub t2: f64,
}

/// Circuit-level noise. Per-qubit arrays are indexed `[D1, L1, L2, D2]`.
#[derive(Debug, Clone)]
pub struct NoiseModel {
    /// Full transfer on `(emitter, receiver)`, phase-calibrated so the
    /// emitter's `|1⟩` lands on `−|1⟩` of the receiver.
    pub transfer_channel: QuantumChannel,
    /// Half transfer; the ideal unitary when absent.
    pub half_transfer_channel: Option<QuantumChannel>,
    /// Average infidelity of the D1–L1 and L2–D2 CZ gates.
    pub cz_error: [f64; 2],
    /// Average infidelity per physical single-qubit pulse.
    pub single_qubit_error: [f64; 4],
    /// Extra depolarizing infidelity on the receiver after each transfer.
    pub transfer_depolarizing: f64,
    /// Per-transfer relaxation of the idle l-qubit towards `asymptote`.
    pub leakage: f64,
    pub leakage_asymptote: f64,
    pub idle: Option<[IdleParams; 4]>,
    /// Rotating-frame angular frequencies (rad/s).
    pub frequencies: [f64; 4],
}

fn frequencies(cfg: &DeviceConfig) -> [f64; 4] {
    let tau = std::f64::consts::TAU;
    [
        0.0,
        tau * cfg.l_qubits[0].idle_frequency,
        tau * cfg.l_qubits[1].idle_frequency,
        0.0,
    ]
}

impl NoiseModel {
    /// Noiseless gates and an ideal transfer.
    pub fn ideal(cfg: &DeviceConfig) -> Self {
        Self {
            transfer_channel: ideal_transfer_channel(std::f64::consts::FRAC_PI_2),
            half_transfer_channel: None,
            cz_error: [0.0; 2],
            single_qubit_error: [0.0; 4],
            transfer_depolarizing: 0.0,
            leakage: 0.0,
            leakage_asymptote: 1.0,
            idle: None,
            frequencies: frequencies(cfg),
        }
    }

    /// Device noise: the given transfer channel, the configured CZ and
    /// single-qubit errors, and idle relaxation.
    pub fn from_config(cfg: &DeviceConfig, transfer_channel: QuantumChannel) -> Self {
        let cz = |p| cfg.cz(p).map(|g| g.error_per_gate).unwrap_or(0.0);
        let pulses = mean_physical_pulses();
        let (d, l) = (&cfg.data_qubits, &cfg.l_qubits);
        let per_pulse = |e: f64| e / pulses;
        Self {
            transfer_channel,
            half_transfer_channel: None,
            cz_error: [cz(CouplerPair::D1L1), cz(CouplerPair::L2D2)],
            single_qubit_error: [
                per_pulse(d[0].single_clifford_error),
                per_pulse(l[0].single_clifford_error),
                per_pulse(l[1].single_clifford_error),
                per_pulse(d[1].single_clifford_error),
            ],
            transfer_depolarizing: 0.0,
            leakage: 0.0,
            leakage_asymptote: 1.0,
            idle: Some([
                IdleParams { t1: d[0].t1, t2: d[0].t2_ramsey },
                IdleParams { t1: l[0].t1, t2: l[0].t2_ramsey },
                IdleParams { t1: l[1].t1, t2: l[1].t2_ramsey },
                IdleParams { t1: d[1].t1, t2: d[1].t2_ramsey },
            ]),
            frequencies: frequencies(cfg),
        }
    }

    pub fn with_transfer_depolarizing(mut self, infidelity: f64) -> Self {
        self.transfer_depolarizing = infidelity;
        self
    }

    pub fn with_leakage(mut self, rate: f64, asymptote: f64) -> Self {
        self.leakage = rate;
        self.leakage_asymptote = asymptote;
        self
    }

    pub fn without_idle(mut self) -> Self {
        self.idle = None;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let prob = |name: &str, x: f64| {
            if (0.0..=1.0).contains(&x) {
                Ok(())
            } else {
                Err(invalid(name, "probability in [0, 1]"))
            }
        };
        for &e in self.cz_error.iter().chain(&self.single_qubit_error) {
            prob("gate error", e)?;
        }
        prob("transfer_depolarizing", 2.0 * self.transfer_depolarizing)?;
        prob("leakage", self.leakage)?;
        prob("leakage_asymptote", self.leakage_asymptote)?;
        if self.transfer_channel.dim() != 4 {
            return Err(invalid("transfer_channel", "two-qubit channel"));
        }
        if self.transfer_channel.trace_preservation_error() > 1e-8 {
            return Err(invalid("transfer_channel", "trace preserving"));
        }
        Ok(())
    }
}

/// Ideal transfer with mixing angle `theta` as a channel.
pub fn ideal_transfer_channel(theta: f64) -> QuantumChannel {
    let m = crate::frames::ideal_transfer_matrix(theta);
    QuantumChannel::from_unitary(&CMatrix::from_fn(4, 4, |i, j| m[(i, j)]))
}

/// Transfer channel from the waveguide model, with the two single-qubit
/// phases a virtual Z can absorb calibrated to the ideal transfer's.
pub fn transfer_channel_from_dynamics(cfg: &DeviceConfig, method: Method, lossy: bool) -> Result<QuantumChannel> {
    let theta = crate::pulses::default_theta_max::<f64>(method);
    let schedule = build_transfer_schedule(cfg, method, theta, DEFAULT_DT)?;
    let raw = extract_channel(cfg, &schedule, Subsystem::TwoQubit, lossy)?;
    let ideal = crate::frames::ideal_transfer_matrix(theta);
    // Coherence with |00⟩ of each single-excitation input, compared with
    // the ideal image.
    let phase = |input: usize, output: usize| {
        let mut rho = CMatrix::zeros(4, 4);
        rho[(input, 0)] = C64::new(1.0, 0.0);
        let got = raw.apply(&rho)[(output, 0)];
        if got.norm() > 1e-9 {
            ideal[(output, input)].arg() - got.arg()
        } else {
            0.0
        }
    };
    // |10⟩ → |01⟩ fixes the receiver, |01⟩ → |10⟩ the emitter.
    let cr = phase(2, 1);
    let ce = phase(1, 2);
    let fix = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        C64::new(1.0, 0.0),
        C64::from_polar(1.0, cr),
        C64::from_polar(1.0, ce),
        C64::from_polar(1.0, ce + cr),
    ]));
    let mut ch = QuantumChannel::from_unitary(&fix).compose(&raw)?;
    ch.leakage = raw.leakage.clone();
    Ok(ch)
}

/// Readout and preparation errors. Arrays are indexed `[D1, L1, L2, D2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpamModel {
    /// Probability of reading the prepared computational state correctly.
    pub readout_fidelity: [f64; 4],
    /// Excited-state population at circuit start.
    pub thermal_population: [f64; 4],
}

impl SpamModel {
    pub fn ideal() -> Self {
        Self {
            readout_fidelity: [1.0; 4],
            thermal_population: [0.0; 4],
        }
    }

    pub fn from_config(cfg: &DeviceConfig) -> Self {
        let (d, l) = (&cfg.data_qubits, &cfg.l_qubits);
        Self {
            readout_fidelity: [
                d[0].readout_fidelity,
                l[0].readout_fidelity,
                l[1].readout_fidelity,
                d[1].readout_fidelity,
            ],
            thermal_population: [
                d[0].thermal_population,
                l[0].thermal_population,
                l[1].thermal_population,
                d[1].thermal_population,
            ],
        }
    }

    pub fn with_readout_fidelity(mut self, f: f64) -> Self {
        self.readout_fidelity = [f; 4];
        self
    }

    /// Row-stochastic `P(read j | state i)` for one qubit.
    pub fn confusion(&self, q: QubitId) -> [[f64; 2]; 2] {
        let f = self.readout_fidelity[q as usize];
        [[f, 1.0 - f], [1.0 - f, f]]
    }
}

/// Samples `shots` readouts of the 4-qubit register. `distribution` is
/// indexed with D1 as the most significant bit.
pub fn spam_apply<R: Rng + ?Sized>(distribution: &[f64], spam: &SpamModel, rng: &mut R, shots: u64) -> Vec<u64> {
    let n = distribution.len();
    let qubits = n.trailing_zeros() as usize;
    let mut read = distribution.to_vec();
    for (k, q) in QubitId::ALL.iter().take(qubits).enumerate() {
        let m = spam.confusion(*q);
        let bit = 1 << (qubits - 1 - k);
        let mut next = vec![0.0; n];
        for (i, &p) in read.iter().enumerate() {
            let s = (i & bit != 0) as usize;
            next[i & !bit] += p * m[s][0];
            next[i | bit] += p * m[s][1];
        }
        read = next;
    }
    multinomial_counts(&read, shots, rng)
}

/// Multinomial draw as a chain of conditional binomials.
pub fn multinomial_counts<R: Rng + ?Sized>(probs: &[f64], shots: u64, rng: &mut R) -> Vec<u64> {
    let mut left = shots;
    let mut mass = 1.0;
    let mut out = vec![0; probs.len()];
    for (i, &p) in probs.iter().enumerate() {
        if left == 0 {
            break;
        }
        if i + 1 == probs.len() {
            out[i] = left;
            break;
        }
        let q = if mass > 0.0 { (p.max(0.0) / mass).clamp(0.0, 1.0) } else { 0.0 };
        let k = Binomial::new(left, q).expect("valid binomial").sample(rng);
        out[i] = k;
        left -= k;
        mass -= p.max(0.0);
    }
    out
}

/// `P(q reads 0)` from 4-qubit counts.
pub fn marginal_zero(counts: &[u64], q: QubitId) -> f64 {
    let bit = 1 << (3 - q as usize);
    let total: u64 = counts.iter().sum();
    let zero: u64 = counts
        .iter()
        .enumerate()
        .filter(|(i, _)| i & bit == 0)
        .map(|(_, &c)| c)
        .sum();
    zero as f64 / total as f64
}
