//! Simulation of remote state transfer between superconducting qubits
//! through a multimode coplanar waveguide: pulse generation, open-system
//! dynamics, frame bookkeeping, Clifford compilation, network and
//! randomized benchmarking, and Bell-state tomography.

pub mod basis;
pub mod benchmarking;
pub mod cliffords;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod frames;
pub mod pulses;
pub mod qubits;
pub mod real;
pub mod rng;
pub mod tcq;
pub mod tomography;

pub use basis::{Basis, BasisLabel};
pub use config::{CouplerPair, DeviceConfig};
pub use error::{Error, Result};
pub use real::{Cx, Real};
pub use qubits::QubitId;
pub use rng::RngHandle;

pub type PulseSchedule64 = pulses::PulseSchedule<f64>;
pub type PulseSchedule32 = pulses::PulseSchedule<f32>;
pub type HamiltonianModel64 = dynamics::HamiltonianModel<f64>;
pub type HamiltonianModel32 = dynamics::HamiltonianModel<f32>;
pub type DensityOperator64 = dynamics::DensityOperator<f64>;
pub type DensityOperator32 = dynamics::DensityOperator<f32>;
pub type CollapseSet64 = dynamics::CollapseSet<f64>;
pub type CollapseSet32 = dynamics::CollapseSet<f32>;
pub type TransferResult64 = dynamics::TransferResult<f64>;
pub type TransferResult32 = dynamics::TransferResult<f32>;
pub type TcqSetting64 = tcq::TcqSetting<f64>;
pub type TcqSetting32 = tcq::TcqSetting<f32>;
pub type Frame64 = frames::Frame<f64>;
pub type Frame32 = frames::Frame<f32>;
