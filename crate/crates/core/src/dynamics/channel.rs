//! Completely positive maps on the l-qubit computational space, obtained by
//! evolving an operator basis through the full waveguide model.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::density::DensityOperator;
use super::hamiltonian::{build_hamiltonian, HamiltonianModel};
use super::master::{evolve_ket, evolve_operator, DEFAULT_TOLERANCE};
use super::transfer::collapse_for;
use crate::basis::{Basis, BasisLabel};
use crate::config::DeviceConfig;
use crate::error::{Error, Result};
use crate::pulses::{Direction, PulseSchedule};
use crate::real::Real;

pub type C64 = num_complex::Complex<f64>;
pub type CMatrix = DMatrix<C64>;

const TP_TOL: f64 = 1e-8;
const CP_TOL: f64 = 1e-8;

/// Which qubits of the pair the channel acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subsystem {
    /// Emitter in, receiver out.
    OneQubit,
    /// `(L1, L2)` in and out, index `2·l1 + l2`.
    TwoQubit,
}

/// CPTP map stored as a column-stacking superoperator plus a Kraus set.
#[derive(Debug, Clone)]
pub struct QuantumChannel {
    dim: usize,
    superop: CMatrix,
    kraus: Vec<CMatrix>,
    /// Population left in the waveguide for each computational input.
    pub leakage: Vec<f64>,
}

fn zeros(n: usize) -> CMatrix {
    DMatrix::from_element(n, n, C64::new(0.0, 0.0))
}

/// Basis-vector outer product `|i⟩⟨j|`.
fn unit(n: usize, i: usize, j: usize) -> CMatrix {
    let mut m = zeros(n);
    m[(i, j)] = C64::new(1.0, 0.0);
    m
}

fn superop_of(kraus: &[CMatrix]) -> CMatrix {
    let d = kraus[0].nrows();
    let mut s = zeros(d * d);
    for k in kraus {
        s += k.map(|z| z.conj()).kronecker(k);
    }
    s
}

/// Hermitian eigen-decomposition of a complex matrix.
pub(crate) fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

impl QuantumChannel {
    pub fn identity(dim: usize) -> Self {
        Self::from_unitary(&CMatrix::identity(dim, dim))
    }

    pub fn from_unitary(u: &CMatrix) -> Self {
        Self {
            dim: u.nrows(),
            superop: superop_of(std::slice::from_ref(u)),
            kraus: vec![u.clone()],
            leakage: vec![0.0; u.nrows()],
        }
    }

    /// Validates trace preservation and builds the superoperator.
    pub fn from_kraus(kraus: Vec<CMatrix>) -> Result<Self> {
        let d = kraus
            .first()
            .map(|k| k.nrows())
            .ok_or_else(|| Error::Dimension("empty Kraus set".into()))?;
        if kraus.iter().any(|k| k.nrows() != d || k.ncols() != d) {
            return Err(Error::Dimension("Kraus operators of mixed shape".into()));
        }
        let ch = Self {
            dim: d,
            superop: superop_of(&kraus),
            kraus,
            leakage: vec![0.0; d],
        };
        ch.check_trace_preserving()?;
        Ok(ch)
    }

    /// Builds the map from its action on `|i⟩⟨j|`, `images[i][j]`.
    fn from_images(images: &[Vec<CMatrix>], leakage: Vec<f64>) -> Result<Self> {
        let d = images.len();
        let mut choi = zeros(d * d);
        for i in 0..d {
            for j in 0..d {
                let img = &images[i][j];
                for o in 0..d {
                    for p in 0..d {
                        choi[(i * d + o, j * d + p)] = img[(o, p)];
                    }
                }
            }
        }
        let (vals, vecs) = hermitian_eigen(&choi);
        let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -CP_TOL {
            return Err(Error::NotCompletelyPositive {
                min_eigenvalue: min,
                spectrum: vals,
            });
        }
        let mut kraus = Vec::new();
        for (k, &lam) in vals.iter().enumerate() {
            if lam <= CP_TOL * 1e-3 {
                continue;
            }
            let s = lam.sqrt();
            let mut op = zeros(d);
            for i in 0..d {
                for o in 0..d {
                    op[(o, i)] = vecs[(i * d + o, k)] * s;
                }
            }
            kraus.push(op);
        }
        if kraus.is_empty() {
            return Err(Error::NotCompletelyPositive {
                min_eigenvalue: min,
                spectrum: vals,
            });
        }
        let ch = Self {
            dim: d,
            superop: superop_of(&kraus),
            kraus,
            leakage,
        };
        ch.check_trace_preserving()?;
        Ok(ch)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn superop(&self) -> &CMatrix {
        &self.superop
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    /// Choi matrix `J[(i,o),(j,p)] = Λ(|i⟩⟨j|)[o,p]`.
    pub fn choi(&self) -> CMatrix {
        let d = self.dim;
        let mut j = zeros(d * d);
        for a in 0..d {
            for b in 0..d {
                let img = self.apply(&unit(d, a, b));
                for o in 0..d {
                    for p in 0..d {
                        j[(a * d + o, b * d + p)] = img[(o, p)];
                    }
                }
            }
        }
        j
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let mut out = zeros(self.dim);
        for k in &self.kraus {
            out += k * rho * k.adjoint();
        }
        out
    }

    /// `Σ K†K` against the identity.
    pub fn trace_preservation_error(&self) -> f64 {
        let mut acc = zeros(self.dim);
        for k in &self.kraus {
            acc += k.adjoint() * k;
        }
        (acc - CMatrix::identity(self.dim, self.dim))
            .iter()
            .fold(0.0, |m, z| m.max(z.norm()))
    }

    fn check_trace_preserving(&self) -> Result<()> {
        let e = self.trace_preservation_error();
        if e > TP_TOL {
            return Err(Error::InvalidState(format!(
                "channel not trace preserving (deviation {e:e})"
            )));
        }
        Ok(())
    }

    pub fn min_choi_eigenvalue(&self) -> f64 {
        hermitian_eigen(&self.choi())
            .0
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    /// `self` after `first`.
    pub fn compose(&self, first: &QuantumChannel) -> Result<Self> {
        if self.dim != first.dim {
            return Err(Error::Dimension("composing channels of different size".into()));
        }
        let mut kraus = Vec::new();
        for a in &self.kraus {
            for b in &first.kraus {
                kraus.push(a * b);
            }
        }
        let mut ch = Self::from_kraus(kraus)?;
        ch.leakage = first.leakage.clone();
        Ok(ch)
    }

    /// `Tr(S_U† S) / d²`.
    pub fn process_fidelity(&self, target: &CMatrix) -> f64 {
        let su = superop_of(std::slice::from_ref(target));
        let d2 = (self.dim * self.dim) as f64;
        (su.adjoint() * &self.superop).trace().re / d2
    }

    /// `(d F_pro + 1)/(d + 1)`.
    pub fn average_gate_fidelity(&self, target: &CMatrix) -> f64 {
        let d = self.dim as f64;
        (d * self.process_fidelity(target) + 1.0) / (d + 1.0)
    }

    /// Mean of `⟨ψ|U† Λ(ψψ†) U|ψ⟩` over Haar-random pure inputs. On a qubit
    /// the inputs come in randomly rotated tetrahedra; each member is still
    /// Haar distributed.
    pub fn average_fidelity_monte_carlo<R: Rng + ?Sized>(
        &self,
        target: &CMatrix,
        samples: usize,
        rng: &mut R,
    ) -> f64 {
        let d = self.dim;
        let fid = |psi: &DVector<C64>| {
            let rho = psi * psi.adjoint();
            let out = self.apply(&rho);
            let phi = target * psi;
            (phi.adjoint() * out * phi)[(0, 0)].re
        };
        let mut total = 0.0;
        let mut count = 0usize;
        if d == 2 {
            let a = (1.0f64 / 3.0).sqrt();
            let b = (2.0f64 / 3.0).sqrt();
            let tetra: Vec<DVector<C64>> = std::iter::once(DVector::from_vec(vec![
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
            ]))
            .chain((0..3).map(|k| {
                let ph = C64::from_polar(b, std::f64::consts::TAU * k as f64 / 3.0);
                DVector::from_vec(vec![C64::new(a, 0.0), ph])
            }))
            .collect();
            while count + 4 <= samples {
                let v = haar_state(2, rng);
                let u = CMatrix::from_row_slice(2, 2, &[v[0], -v[1].conj(), v[1], v[0].conj()]);
                for t in &tetra {
                    total += fid(&(&u * t));
                }
                count += 4;
            }
        }
        while count < samples {
            total += fid(&haar_state(d, rng));
            count += 1;
        }
        total / samples as f64
    }
}

/// Haar-distributed pure state of dimension `d`.
pub fn haar_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DVector<C64> {
    let v = DVector::from_fn(d, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let n = v.norm();
    v / C64::new(n, 0.0)
}

/// Maps between the subsystem and the full truncated basis.
struct Embedding {
    basis: Arc<Basis>,
    /// Full-basis index of each computational input.
    inputs: Vec<usize>,
    /// For each full label: (output qubit index, environment key).
    split: Vec<(usize, Vec<u8>)>,
    /// Phase exponent per full label: `(n_l1, n_l2)`.
    occupations: Vec<(f64, f64)>,
    dim: usize,
}

impl Embedding {
    fn new(basis: Arc<Basis>, subsystem: Subsystem, direction: Direction) -> Result<Self> {
        let sites = basis.sites();
        let (emitter_site, receiver_site) = match direction {
            Direction::L1ToL2 => (0, sites - 1),
            Direction::L2ToL1 => (sites - 1, 0),
        };
        let (inputs, dim) = match subsystem {
            Subsystem::OneQubit => {
                let mut occ = vec![0u8; sites];
                let g = basis.ground();
                occ[emitter_site] = 1;
                let e = basis
                    .index_of(&BasisLabel { occupation: occ })
                    .expect("single excitation");
                (vec![g, e], 2)
            }
            Subsystem::TwoQubit => {
                if basis.truncation() < 2 {
                    return Err(Error::UnsupportedTruncation(basis.truncation()));
                }
                let idx = |a, b| basis.qubit_state(a, b).expect("qubit state in basis");
                (vec![idx(0, 0), idx(0, 1), idx(1, 0), idx(1, 1)], 4)
            }
        };
        let split = basis
            .labels()
            .iter()
            .map(|l| {
                let occ = &l.occupation;
                match subsystem {
                    Subsystem::OneQubit => {
                        let mut env = occ.clone();
                        env[receiver_site] = 0;
                        (occ[receiver_site] as usize, env)
                    }
                    Subsystem::TwoQubit => {
                        let env = occ[1..sites - 1].to_vec();
                        (2 * occ[0] as usize + occ[sites - 1] as usize, env)
                    }
                }
            })
            .collect();
        let occupations = basis
            .labels()
            .iter()
            .map(|l| (l.l1() as f64, l.l2() as f64))
            .collect();
        Ok(Self {
            basis,
            inputs,
            split,
            occupations,
            dim,
        })
    }

    /// Removes the detuning phase, traces the environment, and returns
    /// the reduced operator with its mode-excited trace.
    fn reduce(&self, full: &CMatrix, phases: (f64, f64)) -> (CMatrix, C64) {
        let n = self.basis.len();
        let ph: Vec<C64> = self
            .occupations
            .iter()
            .map(|&(a, b)| C64::from_polar(1.0, a * phases.0 + b * phases.1))
            .collect();
        let mut groups: HashMap<&[u8], Vec<usize>> = HashMap::new();
        for (i, (_, env)) in self.split.iter().enumerate() {
            groups.entry(env.as_slice()).or_default().push(i);
        }
        let mut out = zeros(self.dim);
        for members in groups.values() {
            for &a in members {
                for &b in members {
                    let v = full[(a, b)] * ph[a] * ph[b].conj();
                    out[(self.split[a].0, self.split[b].0)] += v;
                }
            }
        }
        let mut leak = C64::new(0.0, 0.0);
        for i in 0..n {
            if self.basis.labels()[i].mode_excitations() > 0 {
                leak += full[(i, i)];
            }
        }
        (out, leak)
    }
}

/// `2π ∫ δ dt` for the L1 and L2 detuning columns (trapezoid, exact for
/// the piecewise-linear schedule).
fn detuning_phases<T: Real>(s: &PulseSchedule<T>) -> (f64, f64) {
    let dt = s.dt.to_f64_lossy();
    let mut p = (0.0, 0.0);
    for w in s.samples.windows(2) {
        p.0 += 0.5 * dt * (w[0].detuning_emitter + w[1].detuning_emitter).to_f64_lossy();
        p.1 += 0.5 * dt * (w[0].detuning_receiver + w[1].detuning_receiver).to_f64_lossy();
    }
    let tau = std::f64::consts::TAU;
    (tau * p.0, tau * p.1)
}

fn to_c64<T: Real>(m: &DMatrix<num_complex::Complex<T>>) -> CMatrix {
    m.map(|z| C64::new(z.re.to_f64_lossy(), z.im.to_f64_lossy()))
}

fn subsystem_basis(cfg: &DeviceConfig, subsystem: Subsystem) -> Result<Arc<Basis>> {
    let trunc = match subsystem {
        Subsystem::OneQubit => 1,
        Subsystem::TwoQubit => 2,
    };
    Ok(Arc::new(Basis::build(trunc, cfg.cpw.modes_retained)?))
}

struct Setup<T: Real> {
    model: HamiltonianModel<T>,
    emb: Embedding,
    phases: (f64, f64),
}

fn setup<T: Real>(
    cfg: &DeviceConfig,
    schedule: &PulseSchedule<T>,
    subsystem: Subsystem,
) -> Result<Setup<T>> {
    let basis = subsystem_basis(cfg, subsystem)?;
    let model = build_hamiltonian(cfg, schedule, basis.clone())?;
    let emb = Embedding::new(basis, subsystem, schedule.meta.direction)?;
    Ok(Setup {
        model,
        emb,
        phases: detuning_phases(schedule),
    })
}

/// Evolves every `|i⟩⟨j|` of the subsystem through the waveguide model.
pub fn extract_channel<T: Real>(
    cfg: &DeviceConfig,
    schedule: &PulseSchedule<T>,
    subsystem: Subsystem,
    lossy: bool,
) -> Result<QuantumChannel> {
    let st = setup(cfg, schedule, subsystem)?;
    let d = st.emb.dim;
    let n = st.emb.basis.len();
    let tol = T::lit(DEFAULT_TOLERANCE);
    let collapse = collapse_for::<T>(cfg, lossy);

    let full_images: Vec<Vec<Option<CMatrix>>> = if collapse.is_lossless() {
        let kets = st
            .emb
            .inputs
            .par_iter()
            .map(|&i| {
                let mut psi = DVector::from_element(n, num_complex::Complex::new(T::zero(), T::zero()));
                psi[i] = num_complex::Complex::new(T::one(), T::zero());
                evolve_ket(&st.model, &psi, tol).map(|v| v.map(|z| C64::new(z.re.to_f64_lossy(), z.im.to_f64_lossy())))
            })
            .collect::<Result<Vec<_>>>()?;
        (0..d)
            .map(|i| (0..d).map(|j| Some(&kets[i] * kets[j].adjoint())).collect())
            .collect()
    } else {
        let pairs: Vec<(usize, usize)> = (0..d).flat_map(|i| (i..d).map(move |j| (i, j))).collect();
        let evolved = pairs
            .par_iter()
            .map(|&(i, j)| {
                let mut op = DMatrix::from_element(n, n, num_complex::Complex::new(T::zero(), T::zero()));
                op[(st.emb.inputs[i], st.emb.inputs[j])] = num_complex::Complex::new(T::one(), T::zero());
                evolve_operator(&st.model, &collapse, &op, tol).map(|m| ((i, j), to_c64(&m)))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut grid: Vec<Vec<Option<CMatrix>>> = vec![vec![None; d]; d];
        for ((i, j), m) in evolved {
            if i != j {
                grid[j][i] = Some(m.adjoint());
            }
            grid[i][j] = Some(m);
        }
        grid
    };

    let mut images = vec![vec![zeros(d); d]; d];
    let mut leakage = vec![0.0; d];
    for i in 0..d {
        for j in 0..d {
            let full = full_images[i][j].as_ref().expect("all operator images computed");
            let (red, leak) = st.emb.reduce(full, st.phases);
            images[i][j] = red;
            if i == j {
                leakage[i] = leak.re;
            }
        }
    }
    QuantumChannel::from_images(&images, leakage)
}

/// Embeds `rho_in`, evolves the full model once and reduces the result;
/// the direct counterpart of applying [`extract_channel`]'s map.
pub fn propagate_subsystem<T: Real>(
    cfg: &DeviceConfig,
    schedule: &PulseSchedule<T>,
    subsystem: Subsystem,
    lossy: bool,
    rho_in: &CMatrix,
) -> Result<CMatrix> {
    let st = setup(cfg, schedule, subsystem)?;
    let n = st.emb.basis.len();
    if rho_in.nrows() != st.emb.dim {
        return Err(Error::Dimension(format!(
            "{}-dimensional input for a {}-dimensional subsystem",
            rho_in.nrows(),
            st.emb.dim
        )));
    }
    let mut full = DMatrix::from_element(n, n, num_complex::Complex::new(T::zero(), T::zero()));
    for (a, &i) in st.emb.inputs.iter().enumerate() {
        for (b, &j) in st.emb.inputs.iter().enumerate() {
            let z = rho_in[(a, b)];
            full[(i, j)] = num_complex::Complex::new(T::lit(z.re), T::lit(z.im));
        }
    }
    let rho0 = DensityOperator::from_matrix(st.emb.basis.clone(), full)?;
    let out = super::master::evolve(&st.model, &collapse_for(cfg, lossy), &rho0, T::lit(DEFAULT_TOLERANCE))?;
    Ok(st.emb.reduce(&to_c64(&out.matrix), st.phases).0)
}
