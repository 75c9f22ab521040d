use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::sync::OnceLock;

use super::noise::{IdleParams, NoiseModel, SpamModel};
use crate::cliffords::{
    compile_circuit, cz_matrix, op_unitary, transfer_ends, GateKind, GateOp, GateTimes,
};
use crate::dynamics::{pure_dephasing_rate, CMatrix, C64};
use crate::error::Result;
use crate::frames::{apply_virtual_z, handover_phase, transfer_frame, Frame};
use crate::qubits::QubitId;

const N: usize = 4;
const DIM: usize = 1 << N;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn slot(q: QubitId) -> usize {
    q as usize
}

/// Register index bit of qubit slot `q` (D1 most significant).
fn bit(q: usize) -> usize {
    1 << (N - 1 - q)
}

/// `m · rho` with `m` acting on `targets` in order.
fn left_apply(rho: &CMatrix, m: &CMatrix, targets: &[usize]) -> CMatrix {
    let k = targets.len();
    let sub = 1usize << k;
    let mask: usize = targets.iter().map(|&t| bit(t)).sum();
    let spread = |s: usize| -> usize {
        targets
            .iter()
            .enumerate()
            .filter(|(j, _)| (s >> (k - 1 - j)) & 1 == 1)
            .map(|(_, &t)| bit(t))
            .sum()
    };
    let offsets: Vec<usize> = (0..sub).map(spread).collect();
    let mut out = CMatrix::zeros(DIM, DIM);
    let mut v = vec![c(0.0); sub];
    for col in 0..DIM {
        for base in (0..DIM).filter(|i| i & mask == 0) {
            for s in 0..sub {
                v[s] = rho[(base | offsets[s], col)];
            }
            for r in 0..sub {
                let mut acc = c(0.0);
                for s in 0..sub {
                    acc += m[(r, s)] * v[s];
                }
                out[(base | offsets[r], col)] = acc;
            }
        }
    }
    out
}

fn conjugate(rho: &CMatrix, k: &CMatrix, targets: &[usize]) -> CMatrix {
    let a = left_apply(rho, k, targets);
    left_apply(&a.adjoint(), k, targets)
}

fn apply_kraus(rho: &CMatrix, kraus: &[CMatrix], targets: &[usize]) -> CMatrix {
    let mut out = CMatrix::zeros(DIM, DIM);
    for k in kraus {
        out += conjugate(rho, k, targets);
    }
    out
}

fn paulis(n: usize) -> &'static [CMatrix] {
    static ONE: OnceLock<Vec<CMatrix>> = OnceLock::new();
    static TWO: OnceLock<Vec<CMatrix>> = OnceLock::new();
    let build = || {
        let p1 = [
            CMatrix::identity(2, 2),
            CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]),
            CMatrix::from_row_slice(2, 2, &[c(0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), c(0.0)]),
            CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]),
        ];
        if n == 1 {
            p1.to_vec()
        } else {
            p1.iter().flat_map(|a| p1.iter().map(move |b| a.kronecker(b))).collect()
        }
    };
    match n {
        1 => ONE.get_or_init(build),
        _ => TWO.get_or_init(build),
    }
}

/// Depolarizing channel with average infidelity `r` on `targets`.
fn depolarize(rho: &CMatrix, r: f64, targets: &[usize]) -> CMatrix {
    if r <= 0.0 {
        return rho.clone();
    }
    let d = (1usize << targets.len()) as f64;
    let lambda = r * d / (d - 1.0);
    let ps = paulis(targets.len());
    let mut out = rho * c(1.0 - lambda);
    for p in ps {
        out += conjugate(rho, p, targets) * c(lambda / (d * d));
    }
    out
}

fn transitions(rho: &CMatrix, up: f64, down: f64, q: usize) -> CMatrix {
    if up <= 0.0 && down <= 0.0 {
        return rho.clone();
    }
    let mut k0 = CMatrix::zeros(2, 2);
    k0[(0, 0)] = c((1.0 - up).sqrt());
    k0[(1, 1)] = c((1.0 - down).sqrt());
    let mut k1 = CMatrix::zeros(2, 2);
    k1[(0, 1)] = c(down.sqrt());
    let mut k2 = CMatrix::zeros(2, 2);
    k2[(1, 0)] = c(up.sqrt());
    apply_kraus(rho, &[k0, k1, k2], &[q])
}

fn idle(rho: &CMatrix, p: IdleParams, dt: f64, q: usize) -> CMatrix {
    if dt <= 0.0 {
        return rho.clone();
    }
    let gamma = 1.0 - (-dt / p.t1).exp();
    let mut out = transitions(rho, 0.0, gamma, q);
    let keep = (-dt * pure_dephasing_rate(p.t1, p.t2)).exp();
    let b = bit(q);
    for i in 0..DIM {
        for j in 0..DIM {
            if (i ^ j) & b != 0 {
                out[(i, j)] *= keep;
            }
        }
    }
    out
}

/// Density-matrix simulator of the four-qubit register with frame
/// tracking and circuit-level noise.
#[derive(Debug, Clone)]
pub struct Executor<'a> {
    noise: &'a NoiseModel,
    rho: CMatrix,
    frames: [Frame<f64>; 4],
    free: [f64; 4],
    transfer_start: f64,
}

impl<'a> Executor<'a> {
    /// Register prepared in the thermal state of `spam`.
    pub fn new(noise: &'a NoiseModel, spam: &SpamModel) -> Self {
        let mut rho = CMatrix::zeros(DIM, DIM);
        for i in 0..DIM {
            let mut p = 1.0;
            for q in 0..N {
                let th = spam.thermal_population[q];
                p *= if i & bit(q) != 0 { th } else { 1.0 - th };
            }
            rho[(i, i)] = c(p);
        }
        let frames = QubitId::ALL.map(|q| Frame::new(q, noise.frequencies[slot(q)]));
        Self {
            noise,
            rho,
            frames,
            free: [0.0; 4],
            transfer_start: 0.0,
        }
    }

    pub fn state(&self) -> &CMatrix {
        &self.rho
    }

    pub fn frames(&self) -> &[Frame<f64>; 4] {
        &self.frames
    }

    /// Time at which every qubit is free.
    pub fn clock(&self) -> f64 {
        self.free.iter().copied().fold(0.0, f64::max)
    }

    /// Compiles abstract CNOTs and plays the circuit as soon as possible.
    pub fn run(&mut self, ops: &[GateOp], times: &GateTimes) -> Result<()> {
        for op in compile_circuit(ops, times)? {
            op.validate()?;
            self.play(&op);
        }
        Ok(())
    }

    /// Lets every qubit idle up to the common clock.
    pub fn settle(&mut self) {
        let t = self.clock();
        for q in 0..N {
            self.idle_to(q, t);
        }
    }

    /// Computational-basis probabilities after settling.
    pub fn probabilities(&mut self) -> Vec<f64> {
        self.settle();
        (0..DIM).map(|i| self.rho[(i, i)].re.max(0.0)).collect()
    }

    fn idle_to(&mut self, q: usize, t: f64) {
        if let Some(params) = self.noise.idle {
            self.rho = idle(&self.rho, params[q], t - self.free[q], q);
        }
        self.free[q] = self.free[q].max(t);
    }

    fn play(&mut self, op: &GateOp) {
        let targets: Vec<usize> = op.targets.iter().map(|&q| slot(q)).collect();
        let start = targets.iter().map(|&q| self.free[q]).fold(0.0, f64::max);
        if op.duration > 0.0 {
            for &q in &targets {
                self.idle_to(q, start);
            }
        }
        match op.kind {
            GateKind::VirtualZ { angle } => {
                let q = targets[0];
                self.frames[q] = apply_virtual_z(self.frames[q], angle);
            }
            GateKind::SqRot { .. } => {
                let q = targets[0];
                let u = op_unitary(op).expect("rotation");
                let f = self.frames[q];
                let d = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0), C64::from_polar(1.0, f.phase)]));
                let physical = d.adjoint() * u * d;
                self.rho = conjugate(&self.rho, &physical, &[q]);
                self.rho = depolarize(&self.rho, self.noise.single_qubit_error[q], &[q]);
            }
            GateKind::Cz => {
                self.rho = conjugate(&self.rho, &cz_matrix(), &targets);
                let pair = if targets.contains(&slot(QubitId::D1)) { 0 } else { 1 };
                self.rho = depolarize(&self.rho, self.noise.cz_error[pair], &targets);
            }
            GateKind::Transfer { direction, theta_max } => {
                let (e, r) = transfer_ends(direction);
                let (e, r) = (slot(e), slot(r));
                let channel = if (theta_max - FRAC_PI_2).abs() < 1e-12 {
                    Some(&self.noise.transfer_channel)
                } else if (theta_max - FRAC_PI_4).abs() < 1e-12 {
                    self.noise.half_transfer_channel.as_ref()
                } else {
                    None
                };
                self.rho = match channel {
                    Some(ch) => apply_kraus(&self.rho, ch.kraus(), &[e, r]),
                    None => {
                        let m = crate::frames::ideal_transfer_matrix(theta_max);
                        conjugate(&self.rho, &CMatrix::from_fn(4, 4, |i, j| m[(i, j)]), &[e, r])
                    }
                };
                let (we, wr) = (self.noise.frequencies[e], self.noise.frequencies[r]);
                let mismatch = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                    c(1.0),
                    handover_phase(we, wr, start),
                    handover_phase(wr, we, start),
                    c(1.0),
                ]));
                self.rho = conjugate(&self.rho, &mismatch, &[e, r]);
                self.rho = depolarize(&self.rho, self.noise.transfer_depolarizing, &[r]);
                let l = self.noise.leakage;
                let a = self.noise.leakage_asymptote;
                self.rho = transitions(&self.rho, l * (1.0 - a), l * a, e);
                self.transfer_start = start;
            }
            GateKind::FrameTransfer { direction } => {
                let (e, r) = transfer_ends(direction);
                let (e, r) = (slot(e), slot(r));
                let (fe, fr) = transfer_frame(self.frames[e], self.frames[r], self.transfer_start);
                self.frames[e] = fe;
                self.frames[r] = fr;
            }
            GateKind::Cnot => unreachable!("CNOTs are compiled before playing"),
        }
        if op.duration > 0.0 {
            for &q in &targets {
                self.free[q] = start + op.duration;
            }
        }
    }
}

#[cfg(test)]
pub(crate) fn left_apply_for_tests(rho: &CMatrix, m: &CMatrix, targets: &[usize]) -> CMatrix {
    left_apply(rho, m, targets)
}
