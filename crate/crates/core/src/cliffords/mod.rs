//! Single- and two-qubit Clifford groups and compilation of abstract CNOTs
//! into local CZ gates and state transfers.

mod gate;
mod matrices;
mod remote;
mod single;
mod tableau;
mod two;

use crate::dynamics::CMatrix;
use crate::error::{Error, Result};

pub use gate::{
    circuit_duration, circuit_to_json, schedule_asap, transfer_ends, Axis, GateKind, GateOp,
    GateTimes, TimedOp,
};
pub use matrices::{
    circuit_unitary, cnot_matrix, cz_matrix, distance_up_to_phase, embed, is_unitary, op_unitary,
    phase_overlap, rx, ry, rz,
};
pub use remote::{compile_circuit, compile_remote_cnot, local_cnot};
pub use single::{
    mean_physical_pulses, single_qubit_cliffords, single_qubit_index, single_qubit_inverse,
    single_qubit_product,
};
pub use tableau::Tableau;
pub use two::{
    canonical_single_qubit, cnot_element, distinct_two_qubit_elements, sample_two_qubit_clifford,
    two_qubit_clifford, two_qubit_element, ClassIndex, CLASS_SIZES, TWO_QUBIT_ORDER,
};

/// One group element with a native-gate decomposition. Single-qubit
/// elements are written on D1 and two-qubit elements on `(D1, D2)`.
#[derive(Debug, Clone)]
pub struct CliffordElement {
    pub index: usize,
    pub unitary: CMatrix,
    pub decomposition: Vec<GateOp>,
    pub tableau: Tableau,
}

impl CliffordElement {
    pub fn qubits(&self) -> usize {
        self.tableau.qubits
    }

    /// Decomposition moved onto other qubits.
    pub fn ops_on(&self, map: impl Fn(crate::QubitId) -> crate::QubitId) -> Vec<GateOp> {
        self.decomposition.iter().map(|o| o.retarget(&map)).collect()
    }
}

/// Element inverting the ordered product of `seq` (first element applied
/// first).
pub fn invert_sequence(seq: &[CliffordElement]) -> Result<CliffordElement> {
    let first = seq
        .first()
        .ok_or_else(|| Error::Usage("empty Clifford sequence".into()))?;
    let n = first.qubits();
    if seq.iter().any(|e| e.qubits() != n) {
        return Err(Error::Dimension("mixed single- and two-qubit sequence".into()));
    }
    if n == 1 {
        let mut u = CMatrix::identity(2, 2);
        for e in seq {
            u = &e.unitary * u;
        }
        let idx = single_qubit_index(&u.adjoint())
            .ok_or_else(|| Error::NotInGroup("single-qubit product".into()))?;
        return Ok(single_qubit_cliffords()[idx].clone());
    }
    let mut t = Tableau::identity(2);
    for e in seq {
        t = e.tableau.after(&t);
    }
    let idx = two::two_qubit_lookup(&t.inverse())
        .ok_or_else(|| Error::NotInGroup("two-qubit product".into()))?;
    Ok(two_qubit_clifford(idx))
}
