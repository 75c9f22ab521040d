//! Population transfer between the l-qubits and vacuum Rabi exchange.

use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;

use super::collapse::CollapseSet;
use super::density::DensityOperator;
use super::hamiltonian::build_hamiltonian;
use super::integrator::StepReport;
use super::master::{evolve_sampled, evolve_with_report, DEFAULT_TOLERANCE};
use crate::basis::Basis;
use crate::config::DeviceConfig;
use crate::error::{Error, Result};
use crate::pulses::{
    build_schedule, default_theta_max, ControlSample, Direction, Method, PulseSchedule,
    ScheduleMeta, DEFAULT_DT,
};
use crate::real::Real;

#[derive(Debug, Clone)]
pub struct TransferResult<T: Real> {
    pub pop_emitter: T,
    pub pop_receiver: T,
    /// Population carried by the waveguide modes.
    pub pop_other: T,
    pub state: DensityOperator<T>,
    pub report: StepReport<T>,
}

/// Basis indices of the emitter and receiver single excitations.
pub(crate) fn emitter_receiver(basis: &Basis, direction: Direction) -> (usize, usize) {
    let l1 = basis.qubit_state(1, 0).expect("single excitation in basis");
    let l2 = basis.qubit_state(0, 1).expect("single excitation in basis");
    match direction {
        Direction::L1ToL2 => (l1, l2),
        Direction::L2ToL1 => (l2, l1),
    }
}

pub(crate) fn collapse_for<T: Real>(cfg: &DeviceConfig, lossy: bool) -> CollapseSet<T> {
    if lossy {
        CollapseSet::from_config(cfg)
    } else {
        CollapseSet::lossless(cfg.cpw.modes_retained)
    }
}

/// Runs one transfer with the emitter excited and everything else in vacuum.
///
/// Strong, fast controls can accumulate enough integration error to leave
/// the final state slightly non-positive; those runs are repeated at a
/// tighter tolerance.
pub fn simulate_transfer<T: Real>(
    cfg: &DeviceConfig,
    schedule: &PulseSchedule<T>,
    lossy: bool,
) -> Result<TransferResult<T>> {
    let mut tol = T::lit(DEFAULT_TOLERANCE);
    let mut retries = 2;
    loop {
        match simulate_transfer_with_tol(cfg, schedule, lossy, tol) {
            Err(Error::InvalidState(msg)) if retries > 0 => {
                log::debug!("retrying at tolerance {}: {msg}", tol * T::lit(0.01));
                tol *= T::lit(0.01);
                retries -= 1;
            }
            other => return other,
        }
    }
}

pub fn simulate_transfer_with_tol<T: Real>(
    cfg: &DeviceConfig,
    schedule: &PulseSchedule<T>,
    lossy: bool,
    tol: T,
) -> Result<TransferResult<T>> {
    let basis = Arc::new(Basis::build(1, cfg.cpw.modes_retained)?);
    let model = build_hamiltonian(cfg, schedule, basis.clone())?;
    let (e, r) = emitter_receiver(&basis, schedule.meta.direction);
    let rho0 = DensityOperator::basis_state(basis.clone(), e);
    let evo = evolve_with_report(&model, &collapse_for(cfg, lossy), &rho0, tol)?;
    let pop_other = basis
        .labels()
        .iter()
        .enumerate()
        .filter(|(_, l)| l.mode_excitations() > 0)
        .fold(T::zero(), |acc, (i, _)| acc + evo.state.population(i));
    Ok(TransferResult {
        pop_emitter: evo.state.population(e),
        pop_receiver: evo.state.population(r),
        pop_other,
        state: evo.state,
        report: evo.report,
    })
}

#[derive(Debug, Clone)]
pub struct SweepCell<T: Real> {
    pub g: T,
    pub sweep_time: T,
    /// Some control exceeded the configured coupling cap.
    pub saturated: bool,
    pub outcome: std::result::Result<TransferResult<T>, String>,
}

#[derive(Debug, Clone)]
pub struct SweepGrid<T: Real> {
    pub method: Method,
    pub g_grid: Vec<T>,
    pub t_grid: Vec<T>,
    /// Row-major with `g` as the slow index.
    pub cells: Vec<SweepCell<T>>,
}

impl<T: Real> SweepGrid<T> {
    pub fn cell(&self, gi: usize, ti: usize) -> &SweepCell<T> {
        &self.cells[gi * self.t_grid.len() + ti]
    }

    /// Columns `g_hz,T_s,pop_emitter,pop_receiver,pop_other,saturated`;
    /// failed cells carry NaN populations.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "g_hz,T_s,pop_emitter,pop_receiver,pop_other,saturated")?;
        for c in &self.cells {
            let (e, r, o) = match &c.outcome {
                Ok(res) => (
                    res.pop_emitter.to_f64_lossy(),
                    res.pop_receiver.to_f64_lossy(),
                    res.pop_other.to_f64_lossy(),
                ),
                Err(_) => (f64::NAN, f64::NAN, f64::NAN),
            };
            writeln!(
                w,
                "{},{},{},{},{},{}",
                c.g.to_f64_lossy(),
                c.sweep_time.to_f64_lossy(),
                e,
                r,
                o,
                c.saturated
            )?;
        }
        Ok(())
    }
}

/// Transfer schedule for one sweep cell.
pub fn sweep_schedule<T: Real>(
    cfg: &DeviceConfig,
    method: Method,
    g: T,
    sweep_time: T,
) -> Result<PulseSchedule<T>> {
    build_schedule(
        cfg,
        method,
        default_theta_max(method),
        T::lit(DEFAULT_DT),
        g,
        sweep_time,
    )
}

/// Simulates every `(g, T)` cell in parallel.
pub fn sweep_transfer<T: Real>(
    cfg: &DeviceConfig,
    method: Method,
    g_grid: &[T],
    t_grid: &[T],
    lossy: bool,
) -> SweepGrid<T> {
    let cap = cfg.transfer.coupling_cap.map(T::lit);
    let pairs: Vec<(T, T)> = g_grid
        .iter()
        .flat_map(|&g| t_grid.iter().map(move |&t| (g, t)))
        .collect();
    let cells = pairs
        .into_par_iter()
        .map(|(g, t)| match sweep_schedule(cfg, method, g, t) {
            Ok(s) => {
                let saturated = cap.is_some_and(|c| s.max_coupling() > c);
                SweepCell {
                    g,
                    sweep_time: t,
                    saturated,
                    outcome: simulate_transfer(cfg, &s, lossy).map_err(|e| e.to_string()),
                }
            }
            Err(e) => SweepCell {
                g,
                sweep_time: t,
                saturated: false,
                outcome: Err(e.to_string()),
            },
        })
        .collect();
    SweepGrid {
        method,
        g_grid: g_grid.to_vec(),
        t_grid: t_grid.to_vec(),
        cells,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RabiPoint<T> {
    pub t: T,
    pub pop_qubit: T,
    pub pop_mode: T,
}

/// L1 resonant with the target mode at constant coupling `g`, starting
/// excited; populations sampled at `times` (sorted, seconds).
pub fn vacuum_rabi<T: Real>(
    cfg: &DeviceConfig,
    g: T,
    times: &[T],
    lossy: bool,
) -> Result<Vec<RabiPoint<T>>> {
    let mut cfg = cfg.clone();
    cfg.cpw.modes_retained = 1;
    let end = times.last().copied().unwrap_or(T::zero());
    let sample = ControlSample {
        g_emitter: g,
        ..Default::default()
    };
    let schedule = PulseSchedule {
        dt: if end > T::zero() { end } else { T::one() },
        samples: vec![sample, sample],
        duration: end,
        meta: ScheduleMeta {
            method: Method::Stirap,
            g_max: g,
            sweep_time: end,
            theta_max: T::zero(),
            sweep_start: T::zero(),
            direction: Direction::L1ToL2,
        },
    };
    let basis = Arc::new(Basis::build(1, 1)?);
    let model = build_hamiltonian(&cfg, &schedule, basis.clone())?;
    let q = basis.qubit_state(1, 0).expect("L1 excitation");
    let m = basis
        .labels()
        .iter()
        .position(|l| l.mode_excitations() == 1)
        .expect("photon state");
    let rho0 = DensityOperator::basis_state(basis, q);
    let (_, states) = evolve_sampled(
        &model,
        &collapse_for(&cfg, lossy),
        &rho0,
        T::lit(DEFAULT_TOLERANCE),
        times,
    )?;
    Ok(times
        .iter()
        .zip(states)
        .map(|(&t, s)| RabiPoint {
            t,
            pop_qubit: s.population(q),
            pop_mode: s.population(m),
        })
        .collect())
}
