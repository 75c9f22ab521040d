//! Bell-state preparation across the interconnect, two-qubit state
//! tomography by linear inversion, and phase-optimized fidelities.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benchmarking::{Executor, NoiseModel, SpamModel};
use crate::cliffords::{circuit_unitary, Axis, GateOp, GateTimes};
use crate::dynamics::{hermitian_eigen, CMatrix, C64};
use crate::error::{Error, Result};
use crate::pulses::Direction;
use crate::qubits::QubitId;
use crate::rng::RngHandle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BellVariant {
    /// Excite L1 and half-transfer onto L2.
    LqubitSqrt,
    /// Half transfer, then swap each l-qubit into its data qubit.
    DataSqrt,
    /// Entangle D1 with L1, transfer to L2, swap into D2.
    DataFull,
}

impl BellVariant {
    pub const ALL: [BellVariant; 3] = [Self::LqubitSqrt, Self::DataSqrt, Self::DataFull];

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "lqubit_sqrt" => Some(Self::LqubitSqrt),
            "data_sqrt" => Some(Self::DataSqrt),
            "data_full" => Some(Self::DataFull),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::LqubitSqrt => "lqubit_sqrt",
            Self::DataSqrt => "data_sqrt",
            Self::DataFull => "data_full",
        }
    }

    /// Qubits holding the Bell pair.
    pub fn pair(&self) -> [QubitId; 2] {
        match self {
            Self::LqubitSqrt => [QubitId::L1, QubitId::L2],
            _ => [QubitId::D1, QubitId::D2],
        }
    }

    /// Measured fidelity reported for this preparation.
    pub fn reference_fidelity(&self) -> f64 {
        match self {
            Self::LqubitSqrt => 0.950,
            Self::DataSqrt => 0.923,
            Self::DataFull => 0.964,
        }
    }
}

fn swap_into(l: QubitId, d: QubitId) -> [GateOp; 2] {
    [GateOp::cnot(l, d), GateOp::cnot(d, l)]
}

/// Preparation circuit from `|0000⟩`. CNOTs are left abstract.
pub fn bell_circuit(variant: BellVariant, times: &GateTimes) -> Vec<GateOp> {
    let mut ops = Vec::new();
    match variant {
        BellVariant::LqubitSqrt | BellVariant::DataSqrt => {
            ops.push(GateOp::sq(QubitId::L1, Axis::X, PI, times));
            ops.push(GateOp::transfer(Direction::L1ToL2, FRAC_PI_4, times));
            if variant == BellVariant::DataSqrt {
                ops.extend(swap_into(QubitId::L1, QubitId::D1));
                ops.extend(swap_into(QubitId::L2, QubitId::D2));
            }
        }
        BellVariant::DataFull => {
            ops.push(GateOp::sq(QubitId::D1, Axis::Y, FRAC_PI_2, times));
            ops.push(GateOp::cnot(QubitId::D1, QubitId::L1));
            ops.push(GateOp::transfer(Direction::L1ToL2, FRAC_PI_2, times));
            ops.push(GateOp::frame_transfer(Direction::L1ToL2));
            ops.extend(swap_into(QubitId::L2, QubitId::D2));
        }
    }
    ops
}

const REGISTER: [QubitId; 4] = [QubitId::D1, QubitId::L1, QubitId::L2, QubitId::D2];

/// Ideal output of `ops` from `|0000⟩` on the full register.
pub fn ideal_register_state(ops: &[GateOp]) -> DVector<C64> {
    let u = circuit_unitary(ops, &REGISTER);
    u.column(0).into_owned()
}

/// Reduced state of `pair` from a register density matrix.
pub fn reduce_to_pair(rho: &CMatrix, pair: [QubitId; 2]) -> CMatrix {
    let bits = pair.map(|q| 3 - q as usize);
    let sub = |i: usize| (((i >> bits[0]) & 1) << 1) | ((i >> bits[1]) & 1);
    let rest = |i: usize| i & !((1 << bits[0]) | (1 << bits[1]));
    let mut out = CMatrix::zeros(4, 4);
    for i in 0..16 {
        for j in 0..16 {
            if rest(i) == rest(j) {
                out[(sub(i), sub(j))] += rho[(i, j)];
            }
        }
    }
    out
}

/// Ideal two-qubit target of a variant.
pub fn bell_target(variant: BellVariant) -> CMatrix {
    let psi = ideal_register_state(&bell_circuit(variant, &GateTimes::default()));
    reduce_to_pair(&(&psi * psi.adjoint()), variant.pair())
}

/// Canonical Bell states `(|01⟩ − |10⟩)/√2` and `(|00⟩ − |11⟩)/√2`.
pub fn canonical_bell(variant: BellVariant) -> DVector<C64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = DVector::from_element(4, C64::new(0.0, 0.0));
    match variant {
        BellVariant::DataFull => {
            v[0] = C64::new(h, 0.0);
            v[3] = C64::new(-h, 0.0);
        }
        _ => {
            v[1] = C64::new(-h, 0.0);
            v[2] = C64::new(h, 0.0);
        }
    }
    v
}

/// `Tr(ρσ)`, equal to `⟨ψ|ρ|ψ⟩` for a pure `σ = |ψ⟩⟨ψ|`.
pub fn state_fidelity(rho: &CMatrix, sigma: &CMatrix) -> Result<f64> {
    if rho.shape() != sigma.shape() || rho.nrows() != rho.ncols() {
        return Err(Error::Dimension(format!("{:?} against {:?}", rho.shape(), sigma.shape())));
    }
    let purity = (sigma * sigma).trace().re;
    if (purity - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidState(format!("target purity {purity}, expected a pure state")));
    }
    Ok((rho * sigma).trace().re)
}

fn local_phases(alpha: f64, beta: f64) -> CMatrix {
    let a = [C64::new(1.0, 0.0), C64::from_polar(1.0, alpha)];
    let b = [C64::new(1.0, 0.0), C64::from_polar(1.0, beta)];
    CMatrix::from_diagonal(&DVector::from_fn(4, |i, _| a[i >> 1] * b[i & 1]))
}

/// Fidelity maximized over local `Z` phases on both qubits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseOptimizedFidelity {
    pub fidelity: f64,
    pub phases: [f64; 2],
}

pub fn phase_optimized_fidelity(rho: &CMatrix, psi: &DVector<C64>) -> Result<PhaseOptimizedFidelity> {
    if rho.nrows() != 4 || psi.len() != 4 {
        return Err(Error::Dimension("two-qubit state expected".into()));
    }
    let f = |a: f64, b: f64| {
        let v = local_phases(a, b) * psi;
        (v.adjoint() * rho * &v)[(0, 0)].re
    };
    let n = 48;
    let step0 = 2.0 * PI / n as f64;
    let mut best = (f(0.0, 0.0), 0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let (a, b) = (i as f64 * step0, j as f64 * step0);
            let v = f(a, b);
            if v > best.0 {
                best = (v, a, b);
            }
        }
    }
    let mut step = step0;
    while step > 1e-10 {
        let mut improved = false;
        for (da, db) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
            let v = f(best.1 + da, best.2 + db);
            if v > best.0 {
                best = (v, best.1 + da, best.2 + db);
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    let wrap = |x: f64| x.rem_euclid(2.0 * PI);
    Ok(PhaseOptimizedFidelity {
        fidelity: best.0,
        phases: [wrap(best.1), wrap(best.2)],
    })
}

/// Nearest unit-trace PSD matrix in Frobenius norm.
pub fn project_psd(rho: &CMatrix) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(rho);
    let mut sorted = vals.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    // Euclidean projection of the spectrum onto the probability simplex.
    let mut cum = 0.0;
    let mut shift = 0.0;
    for (k, &v) in sorted.iter().enumerate() {
        cum += v;
        let t = (cum - 1.0) / (k + 1) as f64;
        if v - t > 0.0 {
            shift = t;
        }
    }
    let mut out = CMatrix::zeros(rho.nrows(), rho.ncols());
    for (k, &v) in vals.iter().enumerate() {
        let lam = (v - shift).max(0.0);
        if lam > 0.0 {
            let col = vecs.column(k);
            out += col * col.adjoint() * C64::new(lam, 0.0);
        }
    }
    out
}

fn pauli(k: usize) -> CMatrix {
    let (o, z, i) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 1.0));
    match k {
        0 => CMatrix::identity(2, 2),
        1 => CMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        2 => CMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        _ => CMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
    }
}

const LABELS: [char; 4] = ['I', 'X', 'Y', 'Z'];

/// Pre-measurement rotation taking the `axis` eigenbasis to `Z`.
fn basis_rotation(q: QubitId, axis: usize, times: &GateTimes) -> Option<GateOp> {
    match axis {
        1 => Some(GateOp::sq(q, Axis::Y, -FRAC_PI_2, times)),
        2 => Some(GateOp::sq(q, Axis::X, FRAC_PI_2, times)),
        _ => None,
    }
}

fn rotation_matrix(axis: usize) -> CMatrix {
    match axis {
        1 => crate::cliffords::ry(-FRAC_PI_2),
        2 => crate::cliffords::rx(FRAC_PI_2),
        _ => CMatrix::identity(2, 2),
    }
}

/// Reconstruction with the data it came from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TomographyResult {
    pub qubits: [QubitId; 2],
    #[serde(with = "complex_matrix")]
    pub rho: CMatrix,
    /// Pauli expectation values keyed by label, e.g. `"XZ"`.
    pub expectations: Vec<(String, f64)>,
    /// `None` for exact expectation values.
    pub shots_per_setting: Option<u64>,
}

/// Row-major `[re, im]` pairs.
pub mod complex_matrix {
    use super::{CMatrix, C64};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
            .collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMatrix, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        Ok(CMatrix::from_fn(n, m, |i, j| C64::new(rows[i][j][0], rows[i][j][1])))
    }
}

/// Outcome distribution over `|ab⟩` of the pair for each of the nine
/// settings, with readout confusion applied.
fn confuse(p: [f64; 4], spam: &SpamModel, pair: [QubitId; 2]) -> [f64; 4] {
    let (m0, m1) = (spam.confusion(pair[0]), spam.confusion(pair[1]));
    let mut out = [0.0; 4];
    for (i, &pi) in p.iter().enumerate() {
        for (j, o) in out.iter_mut().enumerate() {
            *o += pi * m0[i >> 1][j >> 1] * m1[i & 1][j & 1];
        }
    }
    out
}

fn reconstruct(settings: &[[f64; 4]; 9], pair: [QubitId; 2], shots: Option<u64>) -> TomographyResult {
    // ⟨σa ⊗ σb⟩ and the single-qubit marginals averaged over settings.
    let mut exp = [[0.0f64; 4]; 4];
    let mut seen = [[0usize; 4]; 4];
    for (s, p) in settings.iter().enumerate() {
        let (a, b) = (s / 3 + 1, s % 3 + 1);
        let sign = |k: usize, bit0: bool, bit1: bool| -> f64 {
            let mut v = 1.0;
            if bit0 && (k >> 1) & 1 == 1 {
                v = -v;
            }
            if bit1 && k & 1 == 1 {
                v = -v;
            }
            v
        };
        for (ka, kb, use0, use1) in [(a, b, true, true), (a, 0, true, false), (0, b, false, true)] {
            exp[ka][kb] += (0..4).map(|k| sign(k, use0, use1) * p[k]).sum::<f64>();
            seen[ka][kb] += 1;
        }
    }
    let mut rho = CMatrix::zeros(4, 4);
    let mut expectations = Vec::new();
    for a in 0..4 {
        for b in 0..4 {
            let e = if a == 0 && b == 0 { 1.0 } else { exp[a][b] / seen[a][b].max(1) as f64 };
            if a + b > 0 {
                expectations.push((format!("{}{}", LABELS[a], LABELS[b]), e));
            }
            rho += pauli(a).kronecker(&pauli(b)) * C64::new(e / 4.0, 0.0);
        }
    }
    TomographyResult {
        qubits: pair,
        rho: project_psd(&rho),
        expectations,
        shots_per_setting: shots,
    }
}

fn sample(p: [f64; 4], shots: Option<u64>, rng: &mut impl Rng) -> [f64; 4] {
    match shots {
        None => p,
        Some(n) => {
            let counts = crate::benchmarking::multinomial_counts(&p, n, rng);
            [0, 1, 2, 3].map(|k| counts[k] as f64 / n as f64)
        }
    }
}

/// Tomography of a given two-qubit state, read out with `spam`'s confusion
/// for `pair`.
pub fn tomography_from_state(
    rho: &CMatrix,
    pair: [QubitId; 2],
    spam: &SpamModel,
    shots: Option<u64>,
    rng: RngHandle,
) -> Result<TomographyResult> {
    if rho.nrows() != 4 {
        return Err(Error::Dimension("two-qubit state expected".into()));
    }
    let settings: Vec<[f64; 4]> = (0..9)
        .into_par_iter()
        .map(|s| {
            let u = rotation_matrix(s / 3 + 1).kronecker(&rotation_matrix(s % 3 + 1));
            let r = &u * rho * u.adjoint();
            let p = [r[(0, 0)].re, r[(1, 1)].re, r[(2, 2)].re, r[(3, 3)].re].map(|x| x.max(0.0));
            sample(confuse(p, spam, pair), shots, &mut rng.split(s as u64).rng())
        })
        .collect();
    Ok(reconstruct(&settings.try_into().expect("nine settings"), pair, shots))
}

/// How measured outcome frequencies are treated before reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Readout {
    Raw,
    /// Frequencies multiplied by the inverse of the known confusion matrix.
    Corrected,
}

/// Inverse of the two-qubit confusion applied by `confuse`.
fn unconfuse(p: [f64; 4], spam: &SpamModel, pair: [QubitId; 2]) -> Result<[f64; 4]> {
    let inv = |q: QubitId| -> Result<[[f64; 2]; 2]> {
        let m = spam.confusion(q);
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if det.abs() < 1e-9 {
            return Err(Error::Usage(format!("readout of {q:?} carries no information")));
        }
        Ok([[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]])
    };
    let (m0, m1) = (inv(pair[0])?, inv(pair[1])?);
    let mut out = [0.0; 4];
    for (i, &pi) in p.iter().enumerate() {
        for (j, o) in out.iter_mut().enumerate() {
            *o += pi * m0[i >> 1][j >> 1] * m1[i & 1][j & 1];
        }
    }
    Ok(out)
}

/// Simulates `prep` followed by each of the nine Pauli settings on `pair`.
pub fn state_tomography(
    prep: &[GateOp],
    pair: [QubitId; 2],
    noise: &NoiseModel,
    spam: &SpamModel,
    shots: Option<u64>,
    rng: RngHandle,
) -> Result<TomographyResult> {
    state_tomography_with(prep, pair, noise, spam, shots, rng, Readout::Raw)
}

pub fn state_tomography_with(
    prep: &[GateOp],
    pair: [QubitId; 2],
    noise: &NoiseModel,
    spam: &SpamModel,
    shots: Option<u64>,
    rng: RngHandle,
    readout: Readout,
) -> Result<TomographyResult> {
    if let Some(n) = shots {
        if n < 100 {
            return Err(Error::Usage(format!("{n} shots per setting; at least 100 required")));
        }
    }
    let times = GateTimes::default();
    let bits = pair.map(|q| 3 - q as usize);
    let settings = (0..9)
        .into_par_iter()
        .map(|s| {
            let mut ops = prep.to_vec();
            ops.extend(basis_rotation(pair[0], s / 3 + 1, &times));
            ops.extend(basis_rotation(pair[1], s % 3 + 1, &times));
            let mut ex = Executor::new(noise, spam);
            ex.run(&ops, &times)?;
            let probs = ex.probabilities();
            let mut p = [0.0; 4];
            for (i, &x) in probs.iter().enumerate() {
                p[(((i >> bits[0]) & 1) << 1) | ((i >> bits[1]) & 1)] += x;
            }
            let measured = sample(confuse(p, spam, pair), shots, &mut rng.split(s as u64).rng());
            match readout {
                Readout::Raw => Ok(measured),
                Readout::Corrected => unconfuse(measured, spam, pair),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(reconstruct(&settings.try_into().expect("nine settings"), pair, shots))
}

/// Bell preparation, tomography and fidelities for one variant.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BellReport {
    pub variant: BellVariant,
    pub tomography: TomographyResult,
    /// Against the canonical Bell state.
    pub fidelity: f64,
    /// After optimizing local `Z` phases.
    pub optimized: PhaseOptimizedFidelity,
    pub reference_fidelity: f64,
    pub readout: Readout,
}

pub fn bell_experiment(
    variant: BellVariant,
    noise: &NoiseModel,
    spam: &SpamModel,
    shots: Option<u64>,
    rng: RngHandle,
    readout: Readout,
) -> Result<BellReport> {
    let prep = bell_circuit(variant, &GateTimes::default());
    let tomo = state_tomography_with(&prep, variant.pair(), noise, spam, shots, rng, readout)?;
    let psi = canonical_bell(variant);
    let fidelity = state_fidelity(&tomo.rho, &(&psi * psi.adjoint()))?;
    let optimized = phase_optimized_fidelity(&tomo.rho, &psi)?;
    Ok(BellReport {
        variant,
        tomography: tomo,
        fidelity,
        optimized,
        reference_fidelity: variant.reference_fidelity(),
        readout,
    })
}

#[cfg(test)]
mod tests;
