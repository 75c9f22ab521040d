//! Occupation-number basis for the truncated emitter / modes / receiver space.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Occupations per site, ordered `[L1, mode m-k, ..., mode m+k, L2]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BasisLabel {
    pub occupation: Vec<u8>,
}

impl BasisLabel {
    pub fn total(&self) -> usize {
        self.occupation.iter().map(|&n| n as usize).sum()
    }

    pub fn l1(&self) -> u8 {
        self.occupation[0]
    }

    pub fn l2(&self) -> u8 {
        *self.occupation.last().expect("non-empty label")
    }

    /// Total photons in the waveguide modes.
    pub fn mode_excitations(&self) -> usize {
        let n = self.occupation.len();
        self.occupation[1..n - 1].iter().map(|&x| x as usize).sum()
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for n in &self.occupation {
            write!(f, "{n}")?;
        }
        write!(f, "⟩")
    }
}

/// Ordered basis with reverse lookup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Basis {
    labels: Vec<BasisLabel>,
    index: HashMap<BasisLabel, usize>,
    truncation: usize,
    modes: usize,
}

impl Basis {
    /// Ground state first, then by excitation number, then lexicographically
    /// descending by site occupation (so `|100⟩` precedes `|010⟩`).
    pub fn build(truncation: usize, modes_retained: usize) -> Result<Self> {
        if !(1..=2).contains(&truncation) {
            return Err(Error::UnsupportedTruncation(truncation));
        }
        if modes_retained == 0 || modes_retained % 2 == 0 {
            return Err(Error::BasisMismatch(format!(
                "modes_retained must be odd and >= 1, got {modes_retained}"
            )));
        }
        let sites = modes_retained + 2;
        let mut labels = Vec::new();
        let mut occ = vec![0u8; sites];
        enumerate(&mut occ, 0, truncation, &mut labels);
        labels.sort_by(|a, b| a.total().cmp(&b.total()).then_with(|| b.cmp(a)));
        let index = labels.iter().cloned().enumerate().map(|(i, l)| (l, i)).collect();
        Ok(Self {
            labels,
            index,
            truncation,
            modes: modes_retained,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[BasisLabel] {
        &self.labels
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn sites(&self) -> usize {
        self.modes + 2
    }

    pub fn index_of(&self, label: &BasisLabel) -> Option<usize> {
        self.index.get(label).copied()
    }

    /// Index of the state with the two l-qubits in `(l1, l2)` and all modes empty.
    pub fn qubit_state(&self, l1: u8, l2: u8) -> Option<usize> {
        let mut occ = vec![0u8; self.sites()];
        occ[0] = l1;
        occ[self.sites() - 1] = l2;
        self.index_of(&BasisLabel { occupation: occ })
    }

    pub fn ground(&self) -> usize {
        0
    }
}

fn enumerate(occ: &mut Vec<u8>, site: usize, budget: usize, out: &mut Vec<BasisLabel>) {
    if site == occ.len() {
        out.push(BasisLabel {
            occupation: occ.clone(),
        });
        return;
    }
    let is_qubit = site == 0 || site == occ.len() - 1;
    let cap = if is_qubit { budget.min(1) } else { budget };
    for n in 0..=cap {
        occ[site] = n as u8;
        enumerate(occ, site + 1, budget - n, out);
    }
    occ[site] = 0;
}
