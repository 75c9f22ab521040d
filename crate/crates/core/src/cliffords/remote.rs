use std::f64::consts::FRAC_PI_2;

use super::gate::{Axis, GateKind, GateOp, GateTimes};
use crate::error::{Error, Result};
use crate::pulses::Direction;
use crate::qubits::QubitId;

/// CNOT between neighbours on one module: `Y(−π/2)` on the target, CZ,
/// `Y(+π/2)` on the target.
pub fn local_cnot(control: QubitId, target: QubitId, times: &GateTimes) -> Result<Vec<GateOp>> {
    Ok(vec![
        GateOp::sq(target, Axis::Y, -FRAC_PI_2, times),
        GateOp::cz(control, target, times)?,
        GateOp::sq(target, Axis::Y, FRAC_PI_2, times),
    ])
}

fn transfer(direction: Direction, times: &GateTimes) -> [GateOp; 2] {
    [
        GateOp::transfer(direction, FRAC_PI_2, times),
        GateOp::frame_transfer(direction),
    ]
}

/// Remote CNOT between the data qubits through the l-qubit pair:
/// copy the control onto its l-qubit, transfer, act on the far data qubit,
/// transfer back and uncompute. The l-qubits must start in `|00⟩`.
pub fn compile_remote_cnot(control: QubitId, target: QubitId, times: &GateTimes) -> Result<Vec<GateOp>> {
    let (out, back) = match (control, target) {
        (QubitId::D1, QubitId::D2) => (Direction::L1ToL2, Direction::L2ToL1),
        (QubitId::D2, QubitId::D1) => (Direction::L2ToL1, Direction::L1ToL2),
        _ => {
            return Err(Error::Usage(format!(
                "remote CNOT needs the two data qubits, got {control} -> {target}"
            )))
        }
    };
    let near = control.module_neighbour();
    let far = target.module_neighbour();
    let mut ops = local_cnot(control, near, times)?;
    ops.extend(transfer(out, times));
    ops.extend(local_cnot(far, target, times)?);
    ops.extend(transfer(back, times));
    ops.extend(local_cnot(control, near, times)?);
    Ok(ops)
}

/// Replaces every abstract CNOT by its local or remote realisation.
pub fn compile_circuit(ops: &[GateOp], times: &GateTimes) -> Result<Vec<GateOp>> {
    let mut out = Vec::with_capacity(ops.len());
    for op in ops {
        if op.kind == GateKind::Cnot {
            let (c, t) = (op.targets[0], op.targets[1]);
            if c.is_l_qubit() || t.is_l_qubit() {
                out.extend(local_cnot(c, t, times)?);
            } else {
                out.extend(compile_remote_cnot(c, t, times)?);
            }
        } else {
            out.push(op.clone());
        }
    }
    Ok(out)
}
