//! Amplitude damping and pure dephasing on the truncated basis.

use crate::basis::Basis;
use crate::config::DeviceConfig;
use crate::real::Real;

/// A jump operator `L` whose `L†L` is diagonal.
#[derive(Debug, Clone)]
pub(crate) enum Jump<T> {
    /// `sqrt(rate) * a_site` as `(row, col, amplitude)` entries.
    Lowering {
        entries: Vec<(usize, usize, T)>,
        ldl: Vec<T>,
    },
    /// `sqrt(rate) * n_site`, stored as its diagonal.
    Number { diag: Vec<T>, ldl: Vec<T> },
}

impl<T: Real> Jump<T> {
    pub(crate) fn ldl(&self) -> &[T] {
        match self {
            Jump::Lowering { ldl, .. } | Jump::Number { ldl, .. } => ldl,
        }
    }
}

/// Per-site decay and dephasing rates (1/s).
#[derive(Debug, Clone, PartialEq)]
pub struct CollapseSet<T> {
    /// `1/T1` for `[L1, modes..., L2]`.
    pub amplitude_damping: Vec<T>,
    /// `1/T_phi` for `[L1, L2]`.
    pub dephasing: [T; 2],
}

/// `1/T_phi = 1/T2 - 1/(2 T1)`, clamped at zero when `T2 > 2 T1`.
pub fn pure_dephasing_rate(t1: f64, t2: f64) -> f64 {
    let rate = 1.0 / t2 - 0.5 / t1;
    if rate < 0.0 {
        log::warn!("T2 = {t2:e} s exceeds 2*T1 = {:e} s; pure dephasing clamped to 0", 2.0 * t1);
        0.0
    } else {
        rate
    }
}

impl<T: Real> CollapseSet<T> {
    pub fn lossless(modes: usize) -> Self {
        Self {
            amplitude_damping: vec![T::zero(); modes + 2],
            dephasing: [T::zero(); 2],
        }
    }

    /// Idle-point lifetimes of the l-qubits and the retained modes.
    pub fn from_config(cfg: &DeviceConfig) -> Self {
        let mut damping = Vec::with_capacity(cfg.cpw.modes_retained + 2);
        damping.push(T::lit(1.0 / cfg.l_qubits[0].t1));
        for m in cfg.retained_modes() {
            damping.push(T::lit(1.0 / cfg.mode_t1(m)));
        }
        damping.push(T::lit(1.0 / cfg.l_qubits[1].t1));
        let deph = |q: usize| {
            T::lit(pure_dephasing_rate(
                cfg.l_qubits[q].t1,
                cfg.l_qubits[q].t2_ramsey,
            ))
        };
        Self {
            amplitude_damping: damping,
            dephasing: [deph(0), deph(1)],
        }
    }

    pub fn is_lossless(&self) -> bool {
        self.amplitude_damping.iter().all(|r| *r == T::zero())
            && self.dephasing.iter().all(|r| *r == T::zero())
    }

    pub(crate) fn jumps(&self, basis: &Basis) -> Vec<Jump<T>> {
        let n = basis.len();
        let sites = basis.sites();
        let mut out = Vec::new();
        for (site, &rate) in self.amplitude_damping.iter().enumerate() {
            if rate <= T::zero() {
                continue;
            }
            let sr = rate.sqrt();
            let mut entries = Vec::new();
            let mut ldl = vec![T::zero(); n];
            for (src, lab) in basis.labels().iter().enumerate() {
                let k = lab.occupation[site];
                if k == 0 {
                    continue;
                }
                let mut occ = lab.occupation.clone();
                occ[site] -= 1;
                let dst = basis
                    .index_of(&crate::basis::BasisLabel { occupation: occ })
                    .expect("lowering stays inside the truncation");
                let amp = sr * T::lit((k as f64).sqrt());
                entries.push((dst, src, amp));
                ldl[src] = amp * amp;
            }
            out.push(Jump::Lowering { entries, ldl });
        }
        for (q, &rate) in self.dephasing.iter().enumerate() {
            if rate <= T::zero() {
                continue;
            }
            // sqrt(2 γφ) n gives coherence decay e^{-γφ t}.
            let a = (T::lit(2.0) * rate).sqrt();
            let site = if q == 0 { 0 } else { sites - 1 };
            let diag: Vec<T> = basis
                .labels()
                .iter()
                .map(|l| a * T::lit(l.occupation[site] as f64))
                .collect();
            let ldl = diag.iter().map(|&d| d * d).collect();
            out.push(Jump::Number { diag, ldl });
        }
        out
    }
}
