use std::f64::consts::FRAC_PI_2;
use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::executor::Executor;
use super::noise::{marginal_zero, spam_apply, NoiseModel, SpamModel};
use crate::cliffords::{
    circuit_unitary, invert_sequence, sample_two_qubit_clifford, single_qubit_cliffords,
    single_qubit_index, two_qubit_element, CliffordElement, GateOp, GateTimes,
};
use crate::dynamics::{CMatrix, C64};
use crate::error::{Error, Result};
use crate::pulses::Direction;
use crate::qubits::QubitId;
use crate::rng::RngHandle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Protocol {
    Nb,
    Tqrb,
    Interleaved,
}

/// Which recorded population a fit uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Population {
    Survival,
    SpectatorL1,
    SpectatorL2,
}

/// One random sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RbRecord {
    pub length: usize,
    pub seed: usize,
    pub shots: u64,
    pub survival: f64,
    pub spectator_l1: f64,
    pub spectator_l2: f64,
}

impl RbRecord {
    pub fn get(&self, p: Population) -> f64 {
        match p {
            Population::Survival => self.survival,
            Population::SpectatorL1 => self.spectator_l1,
            Population::SpectatorL2 => self.spectator_l2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbDataset {
    pub protocol: Protocol,
    pub lengths: Vec<usize>,
    pub records: Vec<RbRecord>,
}

impl RbDataset {
    pub fn validate(&self) -> Result<()> {
        if self.protocol == Protocol::Nb {
            if let Some(&n) = self.lengths.iter().find(|&&n| n % 2 == 1) {
                return Err(Error::OddLength(n));
            }
        }
        for r in &self.records {
            for p in [r.survival, r.spectator_l1, r.spectator_l2] {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::InvalidState(format!("probability {p} at length {}", r.length)));
                }
            }
        }
        Ok(())
    }

    /// Records of one length.
    pub fn at(&self, length: usize) -> impl Iterator<Item = &RbRecord> {
        self.records.iter().filter(move |r| r.length == length)
    }

    /// Mean over seeds for each length.
    pub fn means(&self, p: Population) -> Vec<(usize, f64)> {
        self.lengths
            .iter()
            .map(|&n| {
                let v: Vec<f64> = self.at(n).map(|r| r.get(p)).collect();
                (n, v.iter().sum::<f64>() / v.len().max(1) as f64)
            })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "length,seed,shots,survival,spectator_l1,spectator_l2")?;
        for r in &self.records {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                r.length, r.seed, r.shots, r.survival, r.spectator_l1, r.spectator_l2
            )?;
        }
        Ok(())
    }
}

/// Shared run parameters.
#[derive(Debug, Clone, Copy)]
struct Run<'a> {
    noise: &'a NoiseModel,
    spam: &'a SpamModel,
    times: GateTimes,
    shots: u64,
}

impl Run<'_> {
    fn measure<R: Rng>(&self, ops: &[GateOp], rng: &mut R, length: usize, seed: usize, survival: impl Fn(&[u64]) -> f64) -> Result<RbRecord> {
        let mut ex = Executor::new(self.noise, self.spam);
        ex.run(ops, &self.times)?;
        let counts = spam_apply(&ex.probabilities(), self.spam, rng, self.shots);
        Ok(RbRecord {
            length,
            seed,
            shots: self.shots,
            survival: survival(&counts),
            spectator_l1: marginal_zero(&counts, QubitId::L1),
            spectator_l2: marginal_zero(&counts, QubitId::L2),
        })
    }
}

fn run_grid<F>(lengths: &[usize], seeds: usize, rng: RngHandle, task: F) -> Result<Vec<RbRecord>>
where
    F: Fn(usize, usize, RngHandle) -> Result<RbRecord> + Sync,
{
    let jobs: Vec<(usize, usize)> = lengths
        .iter()
        .enumerate()
        .flat_map(|(li, _)| (0..seeds).map(move |s| (li, s)))
        .collect();
    jobs.par_iter()
        .map(|&(li, s)| task(lengths[li], s, rng.split(li as u64).split(s as u64)))
        .collect()
}

fn logical_z() -> CliffordElement {
    let z = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0)]));
    single_qubit_cliffords()[single_qubit_index(&z).expect("Z is Clifford")].clone()
}

/// Network benchmarking: random single-qubit Cliffords on the carrier
/// l-qubit, each followed by a transfer to the other l-qubit, then the
/// inverting Clifford on L1. Survival is `P(L1 reads 0)`.
pub fn run_network_benchmarking(
    noise: &NoiseModel,
    spam: &SpamModel,
    lengths: &[usize],
    seeds_per_length: usize,
    shots: u64,
    rng: RngHandle,
) -> Result<RbDataset> {
    if let Some(&n) = lengths.iter().find(|&&n| n % 2 == 1 || n == 0) {
        return Err(Error::OddLength(n));
    }
    noise.validate()?;
    let run = Run {
        noise,
        spam,
        times: GateTimes::default(),
        shots,
    };
    let z = logical_z();
    let group = single_qubit_cliffords();
    let records = run_grid(lengths, seeds_per_length, rng, |n, seed, h| {
        let mut rng = h.rng();
        let mut ops = Vec::new();
        let mut seq = Vec::with_capacity(2 * n);
        let mut carrier = QubitId::L1;
        for _ in 0..n {
            let c = &group[rng.random_range(0..group.len())];
            ops.extend(c.ops_on(|_| carrier));
            seq.push(c.clone());
            let dir = if carrier == QubitId::L1 { Direction::L1ToL2 } else { Direction::L2ToL1 };
            ops.push(GateOp::transfer(dir, FRAC_PI_2, &run.times));
            ops.push(GateOp::frame_transfer(dir));
            // The transfer acts as a logical Z on the carried state.
            seq.push(z.clone());
            carrier = carrier.partner();
        }
        let inv = invert_sequence(&seq)?;
        ops.extend(inv.ops_on(|_| QubitId::L1));
        run.measure(&ops, &mut rng, n, seed, |c| marginal_zero(c, QubitId::L1))
    })?;
    Ok(RbDataset {
        protocol: Protocol::Nb,
        lengths: lengths.to_vec(),
        records,
    })
}

/// Two-qubit RB on the data qubits with every CNOT realised remotely.
/// With `interleave`, that gate (abstract ops on D1 and D2) follows every
/// random Clifford. Survival is `P(D1 D2 read 00)`.
pub fn run_two_qubit_rb(
    noise: &NoiseModel,
    spam: &SpamModel,
    lengths: &[usize],
    seeds_per_length: usize,
    shots: u64,
    rng: RngHandle,
    interleave: Option<&[GateOp]>,
) -> Result<RbDataset> {
    if lengths.contains(&0) {
        return Err(Error::Usage("sequence lengths must be at least 1".into()));
    }
    noise.validate()?;
    let run = Run {
        noise,
        spam,
        times: GateTimes::default(),
        shots,
    };
    let inserted = match interleave {
        Some(ops) => Some(two_qubit_element(&circuit_unitary(ops, &[QubitId::D1, QubitId::D2]))?),
        None => None,
    };
    let records = run_grid(lengths, seeds_per_length, rng, |n, seed, h| {
        let mut rng = h.rng();
        let mut ops = Vec::new();
        let mut seq = Vec::with_capacity(2 * n);
        for _ in 0..n {
            let c = sample_two_qubit_clifford(&mut rng);
            ops.extend(c.decomposition.iter().cloned());
            seq.push(c);
            if let (Some(il), Some(e)) = (interleave, &inserted) {
                ops.extend(il.iter().cloned());
                seq.push(e.clone());
            }
        }
        let inv = invert_sequence(&seq)?;
        ops.extend(inv.decomposition.iter().cloned());
        run.measure(&ops, &mut rng, n, seed, data_zero)
    })?;
    Ok(RbDataset {
        protocol: if interleave.is_some() { Protocol::Interleaved } else { Protocol::Tqrb },
        lengths: lengths.to_vec(),
        records,
    })
}

/// `P(D1 = 0, D2 = 0)` from register counts.
fn data_zero(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let hit: u64 = counts
        .iter()
        .enumerate()
        .filter(|(i, _)| i & 0b1001 == 0)
        .map(|(_, &c)| c)
        .sum();
    hit as f64 / total as f64
}

/// Default sequence lengths.
pub const NB_LENGTHS: [usize; 7] = [2, 4, 8, 16, 32, 64, 128];
/// NB lengths long enough for the spectator to reach its asymptote.
pub const LEAKAGE_LENGTHS: [usize; 10] = [2, 4, 8, 16, 32, 64, 128, 256, 512, 1024];
pub const TQRB_LENGTHS: [usize; 8] = [1, 2, 4, 8, 16, 24, 32, 48];
pub const DEFAULT_SEEDS: usize = 30;
pub const DEFAULT_SHOTS: u64 = 1000;
