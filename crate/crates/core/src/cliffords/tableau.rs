use std::sync::OnceLock;

use super::matrices::pauli_string;
use crate::dynamics::CMatrix;
use crate::error::{Error, Result};

/// Signed action `U P U† = ± P'` on every Hermitian Pauli string, which
/// identifies a Clifford up to global phase.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Tableau {
    pub qubits: usize,
    pub image: Vec<u8>,
    pub sign: Vec<i8>,
}

fn paulis(n: usize) -> &'static [CMatrix] {
    static ONE: OnceLock<Vec<CMatrix>> = OnceLock::new();
    static TWO: OnceLock<Vec<CMatrix>> = OnceLock::new();
    let build = || (0..1usize << (2 * n)).map(|k| pauli_string(k, n)).collect();
    match n {
        1 => ONE.get_or_init(build),
        _ => TWO.get_or_init(build),
    }
}

impl Tableau {
    pub fn identity(qubits: usize) -> Self {
        let m = 1usize << (2 * qubits);
        Self {
            qubits,
            image: (0..m as u8).collect(),
            sign: vec![1; m],
        }
    }

    /// Fails when `u` does not map Paulis to signed Paulis.
    pub fn from_unitary(u: &CMatrix) -> Result<Self> {
        let d = u.nrows();
        let n = match d {
            2 => 1,
            4 => 2,
            _ => return Err(Error::Dimension(format!("{d}x{d} Clifford"))),
        };
        let ps = paulis(n);
        let mut image = Vec::with_capacity(ps.len());
        let mut sign = Vec::with_capacity(ps.len());
        for p in ps {
            let m = u * p * u.adjoint();
            let mut found = None;
            for (k, q) in ps.iter().enumerate() {
                let coef = (q * &m).trace() / d as f64;
                if (coef.norm() - 1.0).abs() < 1e-6 {
                    if coef.im.abs() > 1e-6 {
                        return Err(Error::NotInGroup("non-hermitian Pauli image".into()));
                    }
                    found = Some((k as u8, if coef.re > 0.0 { 1 } else { -1 }));
                    break;
                }
            }
            let (k, s) = found.ok_or_else(|| Error::NotInGroup("Pauli maps outside the Pauli group".into()))?;
            image.push(k);
            sign.push(s);
        }
        Ok(Self {
            qubits: n,
            image,
            sign,
        })
    }

    /// `self` applied after `first`.
    pub fn after(&self, first: &Tableau) -> Tableau {
        let mut image = Vec::with_capacity(first.image.len());
        let mut sign = Vec::with_capacity(first.image.len());
        for k in 0..first.image.len() {
            let mid = first.image[k] as usize;
            image.push(self.image[mid]);
            sign.push(first.sign[k] * self.sign[mid]);
        }
        Tableau {
            qubits: self.qubits,
            image,
            sign,
        }
    }

    pub fn inverse(&self) -> Tableau {
        let mut image = vec![0u8; self.image.len()];
        let mut sign = vec![1i8; self.image.len()];
        for (k, (&im, &s)) in self.image.iter().zip(&self.sign).enumerate() {
            image[im as usize] = k as u8;
            sign[im as usize] = s;
        }
        Tableau {
            qubits: self.qubits,
            image,
            sign,
        }
    }
}
