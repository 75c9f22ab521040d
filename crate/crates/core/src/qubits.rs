use std::fmt;

use serde::{Deserialize, Serialize};

/// Physical qubits along the chain `D1 - L1 ~~ L2 - D2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QubitId {
    D1,
    L1,
    L2,
    D2,
}

impl QubitId {
    pub const ALL: [QubitId; 4] = [QubitId::D1, QubitId::L1, QubitId::L2, QubitId::D2];

    pub fn is_l_qubit(self) -> bool {
        matches!(self, QubitId::L1 | QubitId::L2)
    }

    pub fn name(self) -> &'static str {
        match self {
            QubitId::D1 => "D1",
            QubitId::L1 => "L1",
            QubitId::L2 => "L2",
            QubitId::D2 => "D2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|q| q.name().eq_ignore_ascii_case(s))
    }

    /// The other l-qubit, or the other data qubit.
    pub fn partner(self) -> Self {
        match self {
            QubitId::D1 => QubitId::D2,
            QubitId::D2 => QubitId::D1,
            QubitId::L1 => QubitId::L2,
            QubitId::L2 => QubitId::L1,
        }
    }

    /// Local l-qubit of a data qubit's module and vice versa.
    pub fn module_neighbour(self) -> Self {
        match self {
            QubitId::D1 => QubitId::L1,
            QubitId::L1 => QubitId::D1,
            QubitId::L2 => QubitId::D2,
            QubitId::D2 => QubitId::L2,
        }
    }
}

impl fmt::Display for QubitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
