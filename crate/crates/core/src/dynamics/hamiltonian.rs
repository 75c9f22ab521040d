//! Rotating-frame Hamiltonian of two l-qubits coupled to the retained
//! waveguide modes, in the frame of the target mode. Entries are in Hz.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::basis::Basis;
use crate::config::DeviceConfig;
use crate::error::{Error, Result};
use crate::pulses::PulseSchedule;
use crate::real::{cabs, cre, Cx, Real};

/// End of the waveguide an l-qubit sits at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum End {
    /// L1, coupled at the near end.
    Near,
    /// L2, coupled at the far end.
    Far,
}

/// Sign of the coupling between an end and mode `target + offset`.
///
/// Standing waves alternate parity at the far end, so neighbouring modes
/// couple to L2 with alternating sign; the target mode couples `+/+`.
pub fn mode_coupling_sign(end: End, mode_offset: i64) -> f64 {
    match end {
        End::Near => 1.0,
        End::Far => {
            if mode_offset.rem_euclid(2) == 0 {
                1.0
            } else {
                -1.0
            }
        }
    }
}

/// Real symmetric off-diagonal term stored once per pair `(row > col)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Hop<T> {
    pub row: usize,
    pub col: usize,
    pub amp: T,
}

#[derive(Debug, Clone)]
pub struct HamiltonianModel<T> {
    pub basis: Arc<Basis>,
    /// Offsets `m - m_target` of the retained modes.
    pub mode_offsets: Vec<i64>,
    /// Static diagonal `Σ Δ_m n_m` in Hz.
    pub(crate) static_diag: Vec<T>,
    pub(crate) n_l1: Vec<T>,
    pub(crate) n_l2: Vec<T>,
    pub(crate) hop_l1: Vec<Hop<T>>,
    pub(crate) hop_l2: Vec<Hop<T>>,
    pub schedule: PulseSchedule<T>,
}

/// Controls resolved at one instant.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Drive<T> {
    pub g_l1: T,
    pub g_l2: T,
    pub det_l1: T,
    pub det_l2: T,
}

impl<T: Real> HamiltonianModel<T> {
    pub(crate) fn drive(&self, t: T) -> Drive<T> {
        let s = self.schedule.at(t);
        Drive {
            g_l1: s.g_emitter,
            g_l2: s.g_receiver,
            det_l1: s.detuning_emitter,
            det_l2: s.detuning_receiver,
        }
    }

    /// Diagonal of H(t) in Hz.
    pub(crate) fn diagonal(&self, d: &Drive<T>, out: &mut [T]) {
        for i in 0..out.len() {
            out[i] = self.static_diag[i] + d.det_l1 * self.n_l1[i] + d.det_l2 * self.n_l2[i];
        }
    }

    /// Dense H(t) in Hz.
    pub fn matrix_at(&self, t: T) -> DMatrix<Cx<T>> {
        let n = self.basis.len();
        let d = self.drive(t);
        let mut diag = vec![T::zero(); n];
        self.diagonal(&d, &mut diag);
        let mut h = DMatrix::from_element(n, n, cre(T::zero()));
        for i in 0..n {
            h[(i, i)] = cre(diag[i]);
        }
        for (hops, g) in [(&self.hop_l1, d.g_l1), (&self.hop_l2, d.g_l2)] {
            for hp in hops {
                let v = cre(hp.amp * g);
                h[(hp.row, hp.col)] += v;
                h[(hp.col, hp.row)] += v;
            }
        }
        h
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Builds the model on `basis` (truncation chosen by the caller).
pub fn build_hamiltonian<T: Real>(
    cfg: &DeviceConfig,
    schedule: &PulseSchedule<T>,
    basis: Arc<Basis>,
) -> Result<HamiltonianModel<T>> {
    if basis.modes() != cfg.cpw.modes_retained {
        return Err(Error::BasisMismatch(format!(
            "basis has {} modes, config retains {}",
            basis.modes(),
            cfg.cpw.modes_retained
        )));
    }
    let k = (basis.modes() / 2) as i64;
    let mode_offsets: Vec<i64> = (-k..=k).collect();
    let fsr = T::lit(cfg.cpw.fsr);
    let n = basis.len();
    let sites = basis.sites();

    let mut static_diag = vec![T::zero(); n];
    let mut n_l1 = vec![T::zero(); n];
    let mut n_l2 = vec![T::zero(); n];
    for (i, lab) in basis.labels().iter().enumerate() {
        n_l1[i] = T::lit(lab.l1() as f64);
        n_l2[i] = T::lit(lab.l2() as f64);
        for (j, &off) in mode_offsets.iter().enumerate() {
            static_diag[i] += fsr * T::lit(off as f64) * T::lit(lab.occupation[1 + j] as f64);
        }
    }

    let mut hop_l1 = Vec::new();
    let mut hop_l2 = Vec::new();
    for (end, qsite, hops) in [
        (End::Near, 0usize, &mut hop_l1),
        (End::Far, sites - 1, &mut hop_l2),
    ] {
        for (src, lab) in basis.labels().iter().enumerate() {
            // σ⁺_q a_m: qubit 0 -> 1, mode m loses a photon.
            if lab.occupation[qsite] != 0 {
                continue;
            }
            for (j, &off) in mode_offsets.iter().enumerate() {
                let msite = 1 + j;
                let nm = lab.occupation[msite];
                if nm == 0 {
                    continue;
                }
                let mut occ = lab.occupation.clone();
                occ[qsite] = 1;
                occ[msite] -= 1;
                let target = crate::basis::BasisLabel { occupation: occ };
                if let Some(dst) = basis.index_of(&target) {
                    let amp = T::lit(mode_coupling_sign(end, off) * (nm as f64).sqrt());
                    hops.push(Hop {
                        row: dst,
                        col: src,
                        amp,
                    });
                }
            }
        }
    }

    let model = HamiltonianModel {
        basis,
        mode_offsets,
        static_diag,
        n_l1,
        n_l2,
        hop_l1,
        hop_l2,
        schedule: schedule.clone(),
    };
    check_hermitian(&model)?;
    Ok(model)
}

fn check_hermitian<T: Real>(model: &HamiltonianModel<T>) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x4841_4d49);
    let dur = model.schedule.duration.to_f64_lossy();
    for _ in 0..10 {
        let t = T::lit(rng.random::<f64>() * dur);
        let h = model.matrix_at(t);
        let diff = (&h - h.adjoint()).iter().fold(T::zero(), |m, z| m.max(cabs(*z)));
        let scale = h.iter().fold(T::one(), |m, z| m.max(cabs(*z)));
        if diff > scale * T::lit(1e-12).max(T::eps() * T::lit(16.0)) {
            return Err(Error::BasisMismatch(format!(
                "Hamiltonian not hermitian at t = {t}: deviation {diff}"
            )));
        }
    }
    Ok(())
}
