use nalgebra::DMatrix;

use super::gate::{Axis, GateKind, GateOp};
use crate::dynamics::{CMatrix, C64};
use crate::frames::ideal_transfer_matrix;
use crate::qubits::QubitId;

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn rx(theta: f64) -> CMatrix {
    let (s, co) = (theta / 2.0).sin_cos();
    CMatrix::from_row_slice(2, 2, &[c(co, 0.0), c(0.0, -s), c(0.0, -s), c(co, 0.0)])
}

pub fn ry(theta: f64) -> CMatrix {
    let (s, co) = (theta / 2.0).sin_cos();
    CMatrix::from_row_slice(2, 2, &[c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)])
}

pub fn rz(theta: f64) -> CMatrix {
    CMatrix::from_row_slice(
        2,
        2,
        &[C64::from_polar(1.0, -theta / 2.0), c(0.0, 0.0), c(0.0, 0.0), C64::from_polar(1.0, theta / 2.0)],
    )
}

pub fn cz_matrix() -> CMatrix {
    let mut m = CMatrix::identity(4, 4);
    m[(3, 3)] = c(-1.0, 0.0);
    m
}

/// CNOT with the first qubit as control.
pub fn cnot_matrix() -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 0)] = c(1.0, 0.0);
    m[(1, 1)] = c(1.0, 0.0);
    m[(2, 3)] = c(1.0, 0.0);
    m[(3, 2)] = c(1.0, 0.0);
    m
}

/// Unitary of a gate on its own targets, in target order; abstract and
/// frame-only ops give `None` (frame updates) or their logical action.
pub fn op_unitary(op: &GateOp) -> Option<CMatrix> {
    match op.kind {
        GateKind::SqRot { axis: Axis::X, angle } => Some(rx(angle)),
        GateKind::SqRot { axis: Axis::Y, angle } => Some(ry(angle)),
        GateKind::VirtualZ { angle } => Some(rz(angle)),
        GateKind::Cz => Some(cz_matrix()),
        GateKind::Cnot => Some(cnot_matrix()),
        GateKind::Transfer { theta_max, .. } => {
            let m = ideal_transfer_matrix(theta_max);
            Some(DMatrix::from_fn(4, 4, |i, j| m[(i, j)]))
        }
        GateKind::FrameTransfer { .. } => None,
    }
}

/// Embeds a `k`-qubit operator acting on `targets` into the register.
pub fn embed(u: &CMatrix, targets: &[usize], n: usize) -> CMatrix {
    let dim = 1usize << n;
    let k = targets.len();
    let bit = |idx: usize, q: usize| (idx >> (n - 1 - q)) & 1;
    let mut out = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut sub_in = 0;
        for &t in targets {
            sub_in = (sub_in << 1) | bit(col, t);
        }
        for sub_out in 0..(1usize << k) {
            let amp = u[(sub_out, sub_in)];
            if amp == c(0.0, 0.0) {
                continue;
            }
            let mut row = col;
            for (j, &t) in targets.iter().enumerate() {
                let b = (sub_out >> (k - 1 - j)) & 1;
                let mask = 1 << (n - 1 - t);
                row = if b == 1 { row | mask } else { row & !mask };
            }
            out[(row, col)] += amp;
        }
    }
    out
}

/// Ideal product of a gate list on `register` (logical frames).
pub fn circuit_unitary(ops: &[GateOp], register: &[QubitId]) -> CMatrix {
    let n = register.len();
    let pos = |q: QubitId| register.iter().position(|&r| r == q).expect("qubit in register");
    let mut u = CMatrix::identity(1 << n, 1 << n);
    for op in ops {
        if let Some(g) = op_unitary(op) {
            let t: Vec<usize> = op.targets.iter().map(|&q| pos(q)).collect();
            u = embed(&g, &t, n) * u;
        }
    }
    u
}

/// `|Tr(A†B)|/d`, one exactly when equal up to global phase.
pub fn phase_overlap(a: &CMatrix, b: &CMatrix) -> f64 {
    (a.adjoint() * b).trace().norm() / a.nrows() as f64
}

/// Max-entry distance after removing the best global phase.
pub fn distance_up_to_phase(a: &CMatrix, b: &CMatrix) -> f64 {
    let tr = (a.adjoint() * b).trace();
    if tr.norm() < 1e-300 {
        return f64::INFINITY;
    }
    let ph = tr / tr.norm();
    (a * ph - b).iter().fold(0.0, |m, z| m.max(z.norm()))
}

pub fn is_unitary(u: &CMatrix, tol: f64) -> bool {
    let d = u.nrows();
    (u.adjoint() * u - CMatrix::identity(d, d))
        .iter()
        .all(|z| z.norm() <= tol)
}

/// Single-qubit Paulis `I, X, Y, Z`.
pub(crate) fn pauli(k: usize) -> CMatrix {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    match k {
        0 => CMatrix::identity(2, 2),
        1 => CMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        2 => CMatrix::from_row_slice(2, 2, &[z, c(0.0, -1.0), c(0.0, 1.0), z]),
        _ => CMatrix::from_row_slice(2, 2, &[o, z, z, c(-1.0, 0.0)]),
    }
}

/// `n`-qubit Pauli string with digit `k_q` (base 4, first qubit most significant).
pub(crate) fn pauli_string(index: usize, n: usize) -> CMatrix {
    let mut m = CMatrix::identity(1, 1);
    for q in 0..n {
        let digit = (index >> (2 * (n - 1 - q))) & 3;
        m = m.kronecker(&pauli(digit));
    }
    m
}
