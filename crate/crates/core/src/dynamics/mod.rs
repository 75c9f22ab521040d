//! Master-equation dynamics of the waveguide-coupled l-qubits.

mod channel;
mod collapse;
mod density;
mod hamiltonian;
mod integrator;
mod master;
mod transfer;

pub use channel::{
    extract_channel, haar_state, propagate_subsystem, CMatrix, QuantumChannel, Subsystem, C64,
};
pub(crate) use channel::hermitian_eigen;
pub use collapse::{pure_dephasing_rate, CollapseSet};
pub use density::DensityOperator;
pub use hamiltonian::{build_hamiltonian, mode_coupling_sign, End, HamiltonianModel};
pub use integrator::StepReport;
pub use master::{
    evolve, evolve_ket, evolve_sampled, evolve_with_report, Evolution, DEFAULT_TOLERANCE,
};
pub use transfer::{
    simulate_transfer, simulate_transfer_with_tol, sweep_schedule, sweep_transfer, vacuum_rabi,
    RabiPoint, SweepCell, SweepGrid, TransferResult,
};

#[cfg(test)]
mod tests;
