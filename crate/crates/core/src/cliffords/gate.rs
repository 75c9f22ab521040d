use serde::{Deserialize, Serialize};

use crate::config::{CouplerPair, DeviceConfig};
use crate::error::{Error, Result};
use crate::pulses::Direction;
use crate::qubits::QubitId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GateKind {
    /// Physical rotation about an equatorial axis.
    SqRot { axis: Axis, angle: f64 },
    Cz,
    /// Directional state transfer with final mixing angle `theta_max`.
    Transfer { direction: Direction, theta_max: f64 },
    /// Frame update only.
    VirtualZ { angle: f64 },
    /// Hands the emitter's frame to the receiver after a transfer.
    FrameTransfer { direction: Direction },
    /// Abstract CNOT `[control, target]`, compiled before execution.
    Cnot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateOp {
    #[serde(flatten)]
    pub kind: GateKind,
    pub targets: Vec<QubitId>,
    pub duration: f64,
}

/// Gate durations (s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateTimes {
    pub single_qubit: f64,
    pub cz_d1l1: f64,
    pub cz_l2d2: f64,
    pub transfer: f64,
}

impl Default for GateTimes {
    fn default() -> Self {
        Self::from_config(&DeviceConfig::default())
    }
}

impl GateTimes {
    pub fn from_config(cfg: &DeviceConfig) -> Self {
        let cz = |p| cfg.cz(p).map(|g| g.duration).unwrap_or(0.0);
        Self {
            single_qubit: cfg.single_qubit_gate_duration,
            cz_d1l1: cz(CouplerPair::D1L1),
            cz_l2d2: cz(CouplerPair::L2D2),
            transfer: cfg.transfer.total_duration,
        }
    }
}

pub(crate) fn coupler_of(a: QubitId, b: QubitId) -> Option<CouplerPair> {
    use QubitId::*;
    match (a, b) {
        (D1, L1) | (L1, D1) => Some(CouplerPair::D1L1),
        (L2, D2) | (D2, L2) => Some(CouplerPair::L2D2),
        _ => None,
    }
}

/// `(emitter, receiver)` of a direction.
pub fn transfer_ends(direction: Direction) -> (QubitId, QubitId) {
    match direction {
        Direction::L1ToL2 => (QubitId::L1, QubitId::L2),
        Direction::L2ToL1 => (QubitId::L2, QubitId::L1),
    }
}

impl GateOp {
    pub fn sq(q: QubitId, axis: Axis, angle: f64, times: &GateTimes) -> Self {
        Self {
            kind: GateKind::SqRot { axis, angle },
            targets: vec![q],
            duration: times.single_qubit,
        }
    }

    pub fn virtual_z(q: QubitId, angle: f64) -> Self {
        Self {
            kind: GateKind::VirtualZ { angle },
            targets: vec![q],
            duration: 0.0,
        }
    }

    pub fn cz(a: QubitId, b: QubitId, times: &GateTimes) -> Result<Self> {
        let pair = coupler_of(a, b).ok_or_else(|| {
            Error::Usage(format!("no CZ coupler between {a} and {b}"))
        })?;
        let duration = match pair {
            CouplerPair::D1L1 => times.cz_d1l1,
            CouplerPair::L2D2 => times.cz_l2d2,
        };
        Ok(Self {
            kind: GateKind::Cz,
            targets: vec![a, b],
            duration,
        })
    }

    pub fn transfer(direction: Direction, theta_max: f64, times: &GateTimes) -> Self {
        let (e, r) = transfer_ends(direction);
        Self {
            kind: GateKind::Transfer {
                direction,
                theta_max,
            },
            targets: vec![e, r],
            duration: times.transfer,
        }
    }

    pub fn frame_transfer(direction: Direction) -> Self {
        let (e, r) = transfer_ends(direction);
        Self {
            kind: GateKind::FrameTransfer { direction },
            targets: vec![e, r],
            duration: 0.0,
        }
    }

    pub fn cnot(control: QubitId, target: QubitId) -> Self {
        Self {
            kind: GateKind::Cnot,
            targets: vec![control, target],
            duration: 0.0,
        }
    }

    /// Checks the target invariants of the gate kind.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Usage(m));
        match self.kind {
            GateKind::SqRot { .. } | GateKind::VirtualZ { .. } if self.targets.len() != 1 => {
                bad(format!("{:?} takes one qubit", self.kind))
            }
            GateKind::Cz => match self.targets.as_slice() {
                [a, b] if coupler_of(*a, *b).is_some() => Ok(()),
                t => bad(format!("CZ on {t:?} is not a configured coupler pair")),
            },
            GateKind::Transfer { direction, .. } | GateKind::FrameTransfer { direction } => {
                let (e, r) = transfer_ends(direction);
                if self.targets != [e, r] {
                    bad(format!("transfer targets {:?} are not the l-qubit pair", self.targets))
                } else {
                    Ok(())
                }
            }
            GateKind::Cnot => match self.targets.as_slice() {
                [a, b] if a != b => Ok(()),
                t => bad(format!("CNOT on {t:?}")),
            },
            _ => Ok(()),
        }
    }

    pub fn retarget(&self, f: impl Fn(QubitId) -> QubitId) -> Self {
        Self {
            targets: self.targets.iter().map(|&q| f(q)).collect(),
            ..self.clone()
        }
    }

    pub fn is_physical_rotation(&self) -> bool {
        matches!(self.kind, GateKind::SqRot { .. })
    }
}

/// Gate with its absolute start time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimedOp {
    pub start: f64,
    #[serde(flatten)]
    pub op: GateOp,
}

/// As-soon-as-possible placement respecting per-qubit order.
pub fn schedule_asap(ops: &[GateOp]) -> Vec<TimedOp> {
    let mut free = [0.0f64; 4];
    let idx = |q: QubitId| q as usize;
    ops.iter()
        .map(|op| {
            let start = op
                .targets
                .iter()
                .map(|&q| free[idx(q)])
                .fold(0.0, f64::max);
            for &q in &op.targets {
                free[idx(q)] = start + op.duration;
            }
            TimedOp {
                start,
                op: op.clone(),
            }
        })
        .collect()
}

/// End time of the last gate.
pub fn circuit_duration(ops: &[TimedOp]) -> f64 {
    ops.iter()
        .map(|t| t.start + t.op.duration)
        .fold(0.0, f64::max)
}

/// JSON gate list with absolute start times.
pub fn circuit_to_json(ops: &[TimedOp]) -> String {
    serde_json::to_string_pretty(ops).expect("gate list serialises")
}
