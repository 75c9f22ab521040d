//! Lindblad master equation on the truncated basis.

use nalgebra::{DMatrix, DVector};

use super::collapse::{CollapseSet, Jump};
use super::density::DensityOperator;
use super::hamiltonian::{Drive, HamiltonianModel};
use super::integrator::{integrate, Options, StepReport, System};
use crate::error::{Error, Result};
use crate::real::{cre, cx, Cx, Real};

/// Default relative and absolute tolerance of [`evolve`].
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

struct Lindblad<'a, T: Real> {
    model: &'a HamiltonianModel<T>,
    jumps: Vec<Jump<T>>,
    /// Σ_k diag(L_k† L_k).
    decay: Vec<T>,
    hermitize: bool,
}

impl<'a, T: Real> Lindblad<'a, T> {
    fn new(model: &'a HamiltonianModel<T>, c: &CollapseSet<T>, hermitize: bool) -> Self {
        let jumps = c.jumps(&model.basis);
        let n = model.dim();
        let mut decay = vec![T::zero(); n];
        for j in &jumps {
            for (d, v) in decay.iter_mut().zip(j.ldl()) {
                *d += *v;
            }
        }
        Self {
            model,
            jumps,
            decay,
            hermitize,
        }
    }
}

/// Adds `-i 2π H x` for a row-major `n × cols` block `x`.
fn apply_h_left<T: Real>(
    model: &HamiltonianModel<T>,
    drive: &Drive<T>,
    diag: &[T],
    x: &[Cx<T>],
    cols: usize,
    out: &mut [Cx<T>],
) {
    let mi = cx(T::zero(), -T::two_pi());
    for (i, &d) in diag.iter().enumerate() {
        let f = mi * d;
        for c in 0..cols {
            out[i * cols + c] += f * x[i * cols + c];
        }
    }
    for (hops, g) in [(&model.hop_l1, drive.g_l1), (&model.hop_l2, drive.g_l2)] {
        if g == T::zero() {
            continue;
        }
        for hp in hops {
            let f = mi * (hp.amp * g);
            for c in 0..cols {
                out[hp.row * cols + c] += f * x[hp.col * cols + c];
                out[hp.col * cols + c] += f * x[hp.row * cols + c];
            }
        }
    }
}

impl<T: Real> System<T> for Lindblad<'_, T> {
    fn rhs(&self, t: T, rho: &[Cx<T>], out: &mut [Cx<T>]) {
        let n = self.model.dim();
        let drive = self.model.drive(t);
        let mut diag = vec![T::zero(); n];
        self.model.diagonal(&drive, &mut diag);
        let half = T::lit(0.5);
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = rho[i * n + j] * (-(self.decay[i] + self.decay[j]) * half);
            }
        }
        // -i2π Hρ
        apply_h_left(self.model, &drive, &diag, rho, n, out);
        // +i2π ρH: entries (ρH)[i,j] = Σ_k ρ[i,k] H[k,j].
        let pi = cx(T::zero(), T::two_pi());
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] += pi * rho[i * n + j] * diag[j];
            }
        }
        for (hops, g) in [(&self.model.hop_l1, drive.g_l1), (&self.model.hop_l2, drive.g_l2)] {
            if g == T::zero() {
                continue;
            }
            for hp in hops {
                let f = pi * (hp.amp * g);
                for i in 0..n {
                    out[i * n + hp.col] += f * rho[i * n + hp.row];
                    out[i * n + hp.row] += f * rho[i * n + hp.col];
                }
            }
        }
        for jump in &self.jumps {
            match jump {
                Jump::Lowering { entries, .. } => {
                    for &(d1, s1, a1) in entries {
                        for &(d2, s2, a2) in entries {
                            out[d1 * n + d2] += rho[s1 * n + s2] * (a1 * a2);
                        }
                    }
                }
                Jump::Number { diag: l, .. } => {
                    for i in 0..n {
                        for j in 0..n {
                            out[i * n + j] += rho[i * n + j] * (l[i] * l[j]);
                        }
                    }
                }
            }
        }
    }

    fn project(&self, y: &mut [Cx<T>]) {
        if !self.hermitize {
            return;
        }
        let n = self.model.dim();
        let half = T::lit(0.5);
        for i in 0..n {
            y[i * n + i].im = T::zero();
            for j in (i + 1)..n {
                let a = (y[i * n + j] + y[j * n + i].conj()) * half;
                y[i * n + j] = a;
                y[j * n + i] = a.conj();
            }
        }
    }
}

struct Schrodinger<'a, T: Real> {
    model: &'a HamiltonianModel<T>,
}

impl<T: Real> System<T> for Schrodinger<'_, T> {
    fn rhs(&self, t: T, psi: &[Cx<T>], out: &mut [Cx<T>]) {
        let drive = self.model.drive(t);
        let mut diag = vec![T::zero(); psi.len()];
        self.model.diagonal(&drive, &mut diag);
        out.iter_mut().for_each(|z| *z = cre(T::zero()));
        apply_h_left(self.model, &drive, &diag, psi, 1, out);
    }
}

/// Final state together with the integrator statistics.
#[derive(Debug, Clone)]
pub struct Evolution<T: Real> {
    pub state: DensityOperator<T>,
    pub report: StepReport<T>,
}

fn check_basis<T: Real>(h: &HamiltonianModel<T>, rho0: &DensityOperator<T>) -> Result<()> {
    if rho0.basis.labels() != h.basis.labels() {
        return Err(Error::BasisMismatch(
            "initial state and Hamiltonian use different bases".into(),
        ));
    }
    Ok(())
}

fn to_row_major<T: Real>(m: &DMatrix<Cx<T>>) -> Vec<Cx<T>> {
    let n = m.nrows();
    let mut v = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            v.push(m[(i, j)]);
        }
    }
    v
}

fn from_row_major<T: Real>(n: usize, v: &[Cx<T>]) -> DMatrix<Cx<T>> {
    DMatrix::from_row_slice(n, n, v)
}

fn options<T: Real>(h: &HamiltonianModel<T>, tol: T) -> Options<T> {
    let mut o = Options::with_tol(tol);
    if h.schedule.samples.len() > 2 {
        o.grid = Some(h.schedule.dt);
    }
    o
}

/// Integrates the master equation across the whole schedule of `h`.
pub fn evolve<T: Real>(
    h: &HamiltonianModel<T>,
    c: &CollapseSet<T>,
    rho0: &DensityOperator<T>,
    tol: T,
) -> Result<DensityOperator<T>> {
    evolve_with_report(h, c, rho0, tol).map(|e| e.state)
}

/// [`evolve`] returning integrator statistics and the accumulated local
/// error estimate.
pub fn evolve_with_report<T: Real>(
    h: &HamiltonianModel<T>,
    c: &CollapseSet<T>,
    rho0: &DensityOperator<T>,
    tol: T,
) -> Result<Evolution<T>> {
    check_basis(h, rho0)?;
    rho0.validate()?;
    let (evo, _) = evolve_sampled(h, c, rho0, tol, &[])?;
    evo.state.validate()?;
    Ok(evo)
}

/// Evolves and records the state at each of `times` (sorted, seconds).
pub fn evolve_sampled<T: Real>(
    h: &HamiltonianModel<T>,
    c: &CollapseSet<T>,
    rho0: &DensityOperator<T>,
    tol: T,
    times: &[T],
) -> Result<(Evolution<T>, Vec<DensityOperator<T>>)> {
    check_basis(h, rho0)?;
    let n = h.dim();
    let hermitian = rho0.hermiticity_error() <= T::eps() * T::lit(64.0);
    let sys = Lindblad::new(h, c, hermitian);
    let mut y = to_row_major(&rho0.matrix);
    let mut samples = Vec::with_capacity(times.len());
    let report = integrate(
        &sys,
        T::zero(),
        h.schedule.duration,
        &mut y,
        options(h, tol),
        times,
        |_, _, v| {
            samples.push(DensityOperator {
                matrix: from_row_major(n, v),
                basis: h.basis.clone(),
            })
        },
    )?;
    let state = DensityOperator {
        matrix: from_row_major(n, &y),
        basis: h.basis.clone(),
    };
    Ok((Evolution { state, report }, samples))
}

/// Evolves an arbitrary (possibly non-hermitian) operator under the same
/// generator; used for channel extraction on `|i⟩⟨j|`.
pub(crate) fn evolve_operator<T: Real>(
    h: &HamiltonianModel<T>,
    c: &CollapseSet<T>,
    op: &DMatrix<Cx<T>>,
    tol: T,
) -> Result<DMatrix<Cx<T>>> {
    let n = h.dim();
    let sys = Lindblad::new(h, c, false);
    let mut y = to_row_major(op);
    integrate(&sys, T::zero(), h.schedule.duration, &mut y, options(h, tol), &[], |_, _, _| {})?;
    Ok(from_row_major(n, &y))
}

/// Closed-system evolution of a state vector.
pub fn evolve_ket<T: Real>(
    h: &HamiltonianModel<T>,
    psi0: &DVector<Cx<T>>,
    tol: T,
) -> Result<DVector<Cx<T>>> {
    if psi0.len() != h.dim() {
        return Err(Error::Dimension(format!(
            "state of length {} on a {}-state basis",
            psi0.len(),
            h.dim()
        )));
    }
    let sys = Schrodinger { model: h };
    let mut y: Vec<Cx<T>> = psi0.iter().copied().collect();
    integrate(&sys, T::zero(), h.schedule.duration, &mut y, options(h, tol), &[], |_, _, _| {})?;
    Ok(DVector::from_vec(y))
}
