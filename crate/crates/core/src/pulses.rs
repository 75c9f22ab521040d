//! Coupling and detuning schedules for directional state transfer.
//!
//! A transfer has three phases: a linear detuning ramp bringing both
//! l-qubits onto the target mode with couplings off, a coupling sweep at
//! zero detuning, and the mirror ramp back to idle. The sweep follows a
//! mixing angle θ(t): linear for STIRAP, quintic smoothstep for SATD, where
//! derivative corrections cancel diabatic leakage to the bright states.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::config::DeviceConfig;
use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Method {
    Stirap,
    Satd,
    SqrtSatd,
}

impl Method {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "stirap" => Some(Self::Stirap),
            "satd" => Some(Self::Satd),
            "sqrt_satd" | "sqrtsatd" => Some(Self::SqrtSatd),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Stirap => "stirap",
            Self::Satd => "satd",
            Self::SqrtSatd => "sqrt_satd",
        }
    }
}

/// Which l-qubit starts excited.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    L1ToL2,
    L2ToL1,
}

impl Direction {
    pub fn reversed(self) -> Self {
        match self {
            Self::L1ToL2 => Self::L2ToL1,
            Self::L2ToL1 => Self::L1ToL2,
        }
    }
}

/// One time sample. The `*_emitter` columns drive L1 and the `*_receiver`
/// columns drive L2; [`reverse_schedule`] exchanges them.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlSample<T> {
    pub g_emitter: T,
    pub g_receiver: T,
    pub detuning_emitter: T,
    pub detuning_receiver: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleMeta<T> {
    pub method: Method,
    pub g_max: T,
    pub sweep_time: T,
    pub theta_max: T,
    /// Absolute start of the coupling sweep within the schedule.
    pub sweep_start: T,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule<T> {
    pub dt: T,
    pub samples: Vec<ControlSample<T>>,
    pub duration: T,
    pub meta: ScheduleMeta<T>,
}

fn check_domain<T: Real>(t: T, duration: T) -> Result<()> {
    if t < T::zero() || t > duration || !(duration >= T::zero()) {
        return Err(Error::Domain {
            t: t.to_f64_lossy(),
            duration: duration.to_f64_lossy(),
        });
    }
    Ok(())
}

/// Quintic smoothstep `theta_max * (6x^5 - 15x^4 + 10x^3)`, `x = t / T`.
pub fn theta<T: Real>(t: T, duration: T, theta_max: T) -> Result<T> {
    check_domain(t, duration)?;
    let x = t / duration;
    Ok(theta_max * x * x * x * (T::lit(10.0) + x * (T::lit(-15.0) + x * T::lit(6.0))))
}

/// Analytic dθ/dt of the quintic.
pub fn theta_dot<T: Real>(t: T, duration: T, theta_max: T) -> Result<T> {
    check_domain(t, duration)?;
    let x = t / duration;
    let one = T::one();
    Ok(theta_max * T::lit(30.0) * x * x * (one - x) * (one - x) / duration)
}

/// Analytic d²θ/dt² of the quintic; vanishes at both ends and at the midpoint.
pub fn theta_ddot<T: Real>(t: T, duration: T, theta_max: T) -> Result<T> {
    check_domain(t, duration)?;
    let x = t / duration;
    let one = T::one();
    let two = T::lit(2.0);
    Ok(theta_max * T::lit(60.0) * x * (one - x) * (one - two * x) / (duration * duration))
}

/// STIRAP pair `(g sin θ, g cos θ)` with θ = (π/2)(t/T).
pub fn stirap_couplings<T: Real>(t: T, duration: T, g: T) -> Result<(T, T)> {
    check_domain(t, duration)?;
    let th = T::frac_pi_2() * t / duration;
    Ok((g * th.sin(), g * th.cos()))
}

/// SATD pair for a full transfer (θ sweeps to π/2).
pub fn satd_couplings<T: Real>(t: T, duration: T, g: T) -> Result<(T, T)> {
    satd_couplings_to(t, duration, g, T::frac_pi_2())
}

/// SATD pair with an arbitrary final mixing angle.
///
/// `g` is in Hz; the correction denominator uses the angular coupling `2πg`
/// so it is commensurate with θ̇² (rad²/s²).
pub fn satd_couplings_to<T: Real>(t: T, duration: T, g: T, theta_max: T) -> Result<(T, T)> {
    let th = theta(t, duration, theta_max)?;
    let thd = theta_dot(t, duration, theta_max)?;
    let thdd = theta_ddot(t, duration, theta_max)?;
    let g_ang = T::two_pi() * g;
    let corr = thdd / (g_ang * g_ang + thd * thd);
    let (s, c) = (th.sin(), th.cos());
    Ok((g * (s + corr * c), g * (c - corr * s)))
}

fn sweep_couplings<T: Real>(method: Method, t: T, duration: T, g: T, theta_max: T) -> Result<(T, T)> {
    match method {
        Method::Stirap => stirap_couplings(t, duration, g),
        Method::Satd => satd_couplings(t, duration, g),
        Method::SqrtSatd => satd_couplings_to(t, duration, g, theta_max),
    }
}

/// Default control sample spacing (s).
pub const DEFAULT_DT: f64 = 1e-10;

/// Default final mixing angle per method (π/2 full transfer, π/4 square root).
pub fn default_theta_max<T: Real>(method: Method) -> T {
    match method {
        Method::SqrtSatd => T::frac_pi_4(),
        _ => T::frac_pi_2(),
    }
}

/// Full ramp / sweep / ramp schedule from the device configuration.
pub fn build_transfer_schedule<T: Real>(
    cfg: &DeviceConfig,
    method: Method,
    theta_max: T,
    dt: T,
) -> Result<PulseSchedule<T>> {
    build_schedule(
        cfg,
        method,
        theta_max,
        dt,
        T::lit(cfg.transfer.g_max),
        T::lit(cfg.transfer.satd_duration),
    )
}

/// Same as [`build_transfer_schedule`] with the sweep parameters `(g, T)`
/// overridden; the ramps keep their configured length.
pub fn build_schedule<T: Real>(
    cfg: &DeviceConfig,
    method: Method,
    theta_max: T,
    dt: T,
    g: T,
    sweep_time: T,
) -> Result<PulseSchedule<T>> {
    let ramp = T::lit(cfg.transfer.ramp_duration());
    if cfg.transfer.satd_duration > cfg.transfer.total_duration {
        return Err(Error::Schedule(format!(
            "sweep {} s longer than total {} s",
            cfg.transfer.satd_duration, cfg.transfer.total_duration
        )));
    }
    if !(dt > T::zero()) {
        return Err(Error::Schedule("dt must be positive".into()));
    }
    if dt > sweep_time {
        return Err(Error::Schedule(format!(
            "dt {dt} exceeds the sweep time {sweep_time}"
        )));
    }
    let n_ramp = (ramp / dt).round().to_f64_lossy() as usize;
    let n_sweep = (sweep_time / dt).round().to_f64_lossy() as usize;
    let sweep = dt * T::lit(n_sweep as f64);
    let ramp_q = dt * T::lit(n_ramp as f64);
    let [idle_e, idle_r] = cfg.idle_detunings().map(T::lit);

    let n_total = 2 * n_ramp + n_sweep;
    let mut samples = Vec::with_capacity(n_total + 1);
    for k in 0..=n_total {
        let s = if k < n_ramp {
            let frac = T::one() - T::lit(k as f64) / T::lit(n_ramp as f64);
            ControlSample {
                g_emitter: T::zero(),
                g_receiver: T::zero(),
                detuning_emitter: idle_e * frac,
                detuning_receiver: idle_r * frac,
            }
        } else if k <= n_ramp + n_sweep {
            let tau = dt * T::lit((k - n_ramp) as f64);
            let tau = if tau > sweep { sweep } else { tau };
            let (ge, gr) = sweep_couplings(method, tau, sweep, g, theta_max)?;
            ControlSample {
                g_emitter: ge,
                g_receiver: gr,
                detuning_emitter: T::zero(),
                detuning_receiver: T::zero(),
            }
        } else {
            let frac = T::lit((k - n_ramp - n_sweep) as f64) / T::lit(n_ramp as f64);
            ControlSample {
                g_emitter: T::zero(),
                g_receiver: T::zero(),
                detuning_emitter: idle_e * frac,
                detuning_receiver: idle_r * frac,
            }
        };
        samples.push(s);
    }
    Ok(PulseSchedule {
        dt,
        duration: dt * T::lit(n_total as f64),
        samples,
        meta: ScheduleMeta {
            method,
            g_max: g,
            sweep_time: sweep,
            theta_max,
            sweep_start: ramp_q,
            direction: Direction::L1ToL2,
        },
    })
}

/// Exchanges the L1 and L2 control columns, giving the L2 → L1 transfer.
pub fn reverse_schedule<T: Real>(s: &PulseSchedule<T>) -> PulseSchedule<T> {
    let mut out = s.clone();
    for smp in &mut out.samples {
        std::mem::swap(&mut smp.g_emitter, &mut smp.g_receiver);
        std::mem::swap(&mut smp.detuning_emitter, &mut smp.detuning_receiver);
    }
    out.meta.direction = s.meta.direction.reversed();
    out
}

impl<T: Real> PulseSchedule<T> {
    /// All controls zero for `duration` (used for identity-channel checks).
    pub fn idle(duration: T, dt: T) -> Self {
        let n = if duration > T::zero() {
            (duration / dt).round().to_f64_lossy().max(1.0) as usize
        } else {
            0
        };
        Self {
            dt,
            duration: dt * T::lit(n as f64),
            samples: vec![ControlSample::default(); n + 1],
            meta: ScheduleMeta {
                method: Method::Satd,
                g_max: T::zero(),
                sweep_time: T::zero(),
                theta_max: T::zero(),
                sweep_start: T::zero(),
                direction: Direction::L1ToL2,
            },
        }
    }

    pub fn time(&self, k: usize) -> T {
        self.dt * T::lit(k as f64)
    }

    /// Linearly interpolated controls at time `t` (clamped to the schedule).
    pub fn at(&self, t: T) -> ControlSample<T> {
        let n = self.samples.len();
        if n == 1 || t <= T::zero() {
            return self.samples[0];
        }
        let pos = t / self.dt;
        let k = pos.floor().to_f64_lossy() as usize;
        if k + 1 >= n {
            return self.samples[n - 1];
        }
        let w = pos - T::lit(k as f64);
        let a = &self.samples[k];
        let b = &self.samples[k + 1];
        let lerp = |x: T, y: T| x + (y - x) * w;
        ControlSample {
            g_emitter: lerp(a.g_emitter, b.g_emitter),
            g_receiver: lerp(a.g_receiver, b.g_receiver),
            detuning_emitter: lerp(a.detuning_emitter, b.detuning_emitter),
            detuning_receiver: lerp(a.detuning_receiver, b.detuning_receiver),
        }
    }

    /// Largest |g| on either column.
    pub fn max_coupling(&self) -> T {
        self.samples.iter().fold(T::zero(), |m, s| {
            let x = s.g_emitter.abs().max(s.g_receiver.abs());
            if x > m { x } else { m }
        })
    }

    /// Samples `t_s, g_e_hz, g_r_hz, det_e_hz, det_r_hz`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t_s,g_e_hz,g_r_hz,det_e_hz,det_r_hz")?;
        for (k, s) in self.samples.iter().enumerate() {
            writeln!(
                w,
                "{},{},{},{},{}",
                self.time(k),
                s.g_emitter,
                s.g_receiver,
                s.detuning_emitter,
                s.detuning_receiver
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};

    const G: f64 = 3.5e6;
    const T: f64 = 135e-9;

    #[test]
    fn theta_endpoints_and_midpoint() {
        assert_eq!(theta(0.0, T, FRAC_PI_2).unwrap(), 0.0);
        assert!((theta(T, T, FRAC_PI_2).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!((theta(T / 2.0, T, FRAC_PI_2).unwrap() - FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn theta_at_three_tenths() {
        // 6(.3)^5 - 15(.3)^4 + 10(.3)^3 evaluated directly.
        let x: f64 = 0.3;
        let s = 6.0 * x.powi(5) - 15.0 * x.powi(4) + 10.0 * x.powi(3);
        assert!((s - 0.16308).abs() < 1e-12);
        let th = theta(0.3 * T, T, FRAC_PI_2).unwrap();
        assert!((th - FRAC_PI_2 * 0.16308).abs() < 1e-12);
    }

    #[test]
    fn theta_rejects_out_of_domain() {
        assert!(theta(-1e-12, T, FRAC_PI_2).is_err());
        assert!(theta(T * 1.01, T, FRAC_PI_2).is_err());
        assert!(stirap_couplings(2.0 * T, T, G).is_err());
    }

    #[test]
    fn stirap_values() {
        let (e, r) = stirap_couplings(0.0, T, G).unwrap();
        assert_eq!((e, r), (0.0, G));
        let (e, r) = stirap_couplings(T, T, G).unwrap();
        assert!((e - G).abs() < 1e-9 && r.abs() < 1e-9);
        let (e, r) = stirap_couplings(T / 2.0, T, G).unwrap();
        assert!((e - G * FRAC_1_SQRT_2).abs() < 1e-9);
        assert!((r - G * FRAC_1_SQRT_2).abs() < 1e-9);
    }

    #[test]
    fn stirap_norm_identity() {
        for k in 0..=1000 {
            let t = T * k as f64 / 1000.0;
            let (e, r) = stirap_couplings(t, T, G).unwrap();
            assert!(((e * e + r * r) - G * G).abs() / (G * G) < 1e-12);
        }
    }

    #[test]
    fn satd_endpoints_and_midpoint() {
        let (e, r) = satd_couplings(0.0, T, G).unwrap();
        assert!(e.abs() <= 1e-12 * G && (r - G).abs() <= 1e-12 * G);
        let (e, r) = satd_couplings(T, T, G).unwrap();
        assert!((e - G).abs() <= 1e-12 * G && r.abs() <= 1e-12 * G);
        // 120x^3 - 180x^2 + 60x vanishes at x = 1/2.
        let x: f64 = 0.5;
        assert_eq!(120.0 * x.powi(3) - 180.0 * x.powi(2) + 60.0 * x, 0.0);
        for (g, t) in [(1e6, 50e-9), (3.5e6, 135e-9), (4e6, 400e-9)] {
            let (e, r) = satd_couplings(t / 2.0, t, g).unwrap();
            assert!((e - g * FRAC_1_SQRT_2).abs() < 1e-9 * g);
            assert!((r - g * FRAC_1_SQRT_2).abs() < 1e-9 * g);
        }
    }

    /// Central differences of θ as an independent derivative oracle.
    fn fd_derivs(t: f64, h: f64) -> (f64, f64) {
        let f = |x: f64| theta(x, T, FRAC_PI_2).unwrap();
        let d1 = (f(t + h) - f(t - h)) / (2.0 * h);
        let d2 = (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h);
        (d1, d2)
    }

    #[test]
    fn satd_quarter_point_against_finite_differences() {
        let t = 0.25 * T;
        let (d1, d2) = fd_derivs(t, 1e-12);
        let th = theta(t, T, FRAC_PI_2).unwrap();
        let gw = 2.0 * PI * G;
        let corr = d2 / (gw * gw + d1 * d1);
        let oracle = (G * (th.sin() + corr * th.cos()), G * (th.cos() - corr * th.sin()));
        let (e, r) = satd_couplings(t, T, G).unwrap();
        assert!(((e - oracle.0) / oracle.0).abs() < 1e-6);
        assert!(((r - oracle.1) / oracle.1).abs() < 1e-6);
    }

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        for k in 1..1000 {
            let t = T * k as f64 / 1000.0;
            let (d1, _) = fd_derivs(t, 1e-13);
            let (_, d2) = fd_derivs(t, 1e-11);
            let a1 = theta_dot(t, T, FRAC_PI_2).unwrap();
            let a2 = theta_ddot(t, T, FRAC_PI_2).unwrap();
            let s1 = theta_dot(T / 2.0, T, FRAC_PI_2).unwrap();
            let s2 = theta_ddot(0.2 * T, T, FRAC_PI_2).unwrap();
            assert!((a1 - d1).abs() <= 1e-6 * s1, "k={k}");
            assert!((a2 - d2).abs() <= 1e-6 * s2.abs(), "k={k}");
        }
    }

    #[test]
    fn satd_time_reversal_pair() {
        for k in 0..=1000 {
            let t = T * k as f64 / 1000.0;
            let (e, _) = satd_couplings(t, T, G).unwrap();
            let (_, r) = satd_couplings(T - t, T, G).unwrap();
            assert!((e - r).abs() <= 1e-12 * G, "k={k}");
        }
    }

    #[test]
    fn default_schedule_shape() {
        let cfg = DeviceConfig::default();
        let s = build_transfer_schedule(&cfg, Method::Satd, FRAC_PI_2, 0.1e-9).unwrap();
        assert!((s.duration - 206e-9).abs() < 1e-15);
        assert!(((s.samples.len() - 1) as f64 * s.dt - s.duration).abs() < s.dt);
        let start = ((s.meta.sweep_start) / s.dt).round() as usize;
        assert_eq!(s.samples[start].g_emitter, 0.0);
        assert!((s.samples[start].g_receiver - G).abs() < 1e-6);
        assert!((s.samples[0].detuning_emitter - 52e6).abs() < 1.0);
        assert_eq!(s.samples[start].detuning_emitter, 0.0);
        assert!((s.samples.last().unwrap().detuning_receiver - 48e6).abs() < 1.0);
        assert_eq!(s.samples.last().unwrap().g_emitter, 0.0);
    }

    #[test]
    fn sqrt_schedule_ends_half_way() {
        let cfg = DeviceConfig::default();
        let s = build_transfer_schedule(&cfg, Method::SqrtSatd, FRAC_PI_4, 0.1e-9).unwrap();
        let end = ((s.meta.sweep_start + s.meta.sweep_time) / s.dt).round() as usize;
        let last = s.samples[end];
        assert!((last.g_emitter - G * FRAC_1_SQRT_2).abs() < 1e-6);
        assert!((last.g_receiver - G * FRAC_1_SQRT_2).abs() < 1e-6);
        assert_eq!(s.samples[end + 1].g_emitter, 0.0);
    }

    #[test]
    fn oversized_dt_is_rejected() {
        let cfg = DeviceConfig::default();
        assert!(build_transfer_schedule(&cfg, Method::Satd, FRAC_PI_2, 200e-9).is_err());
    }

    #[test]
    fn reverse_is_an_involution() {
        let cfg = DeviceConfig::default();
        let s = build_transfer_schedule(&cfg, Method::Satd, FRAC_PI_2, 0.1e-9).unwrap();
        let r = reverse_schedule(&s);
        for (a, b) in s.samples.iter().zip(&r.samples) {
            assert_eq!(a.g_receiver, b.g_emitter);
        }
        assert_eq!(reverse_schedule(&r), s);
    }

    #[test]
    fn csv_header_and_rows() {
        let cfg = DeviceConfig::default();
        let s = build_transfer_schedule(&cfg, Method::Stirap, FRAC_PI_2, 1e-9).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t_s,g_e_hz,g_r_hz,det_e_hz,det_r_hz"));
        assert_eq!(lines.count(), s.samples.len());
    }

    #[test]
    fn f32_schedule() {
        let th = theta(0.5f32, 1.0, std::f32::consts::FRAC_PI_2).unwrap();
        assert!((th - std::f32::consts::FRAC_PI_4).abs() < 1e-6);
        let (e, r) = satd_couplings(0.5f32, 1.0, 1.0).unwrap();
        assert!((e - r).abs() < 1e-6);
    }
}
