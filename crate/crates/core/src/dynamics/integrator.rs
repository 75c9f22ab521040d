//! Dormand–Prince 5(4) with FSAL, step-size control and continuous output.

use crate::error::{Error, Result};
use crate::real::{cabs, cre, Cx, Real};

const C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A21: f64 = 0.2;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Right-hand side `dy/dt = f(t, y)` writing into the last argument.
pub(crate) trait System<T: Real> {
    fn rhs(&self, t: T, y: &[Cx<T>], dy: &mut [Cx<T>]);
    /// Optional projection after each accepted step.
    fn project(&self, _y: &mut [Cx<T>]) {}
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Options<T> {
    pub rtol: T,
    pub atol: T,
    pub max_steps: usize,
    /// Spacing of derivative kinks in the right-hand side; steps never
    /// straddle a multiple of it.
    pub grid: Option<T>,
}

impl<T: Real> Options<T> {
    /// Tolerance floored at what the scalar type can deliver.
    pub(crate) fn with_tol(tol: T) -> Self {
        let floor = T::eps() * T::lit(100.0);
        let tol = if tol > floor { tol } else { floor };
        Self {
            rtol: tol,
            atol: tol,
            max_steps: 5_000_000,
            grid: None,
        }
    }
}

/// Integration statistics.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepReport<T> {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evaluations: usize,
    /// Sum over accepted steps of the embedded local error (max-norm).
    pub error_estimate: T,
}

fn axpy<T: Real>(out: &mut [Cx<T>], y: &[Cx<T>], h: T, terms: &[(f64, &[Cx<T>])]) {
    for i in 0..out.len() {
        let mut acc = cre(T::zero());
        for (c, k) in terms {
            acc += k[i] * T::lit(*c);
        }
        out[i] = y[i] + acc * h;
    }
}

/// Integrates from `t0` to `t1` in place. `outputs` must be sorted within
/// `[t0, t1]`; `observe` is called at each with the interpolated state.
pub(crate) fn integrate<T: Real, S: System<T>>(
    sys: &S,
    t0: T,
    t1: T,
    y: &mut Vec<Cx<T>>,
    opts: Options<T>,
    outputs: &[T],
    mut observe: impl FnMut(usize, T, &[Cx<T>]),
) -> Result<StepReport<T>> {
    let n = y.len();
    let mut report = StepReport {
        error_estimate: T::zero(),
        ..Default::default()
    };
    let mut next_out = 0;
    while next_out < outputs.len() && outputs[next_out] <= t0 {
        observe(next_out, outputs[next_out], y);
        next_out += 1;
    }
    let span = t1 - t0;
    if !(span > T::zero()) {
        while next_out < outputs.len() {
            observe(next_out, outputs[next_out], y);
            next_out += 1;
        }
        return Ok(report);
    }

    let zero = cre(T::zero());
    let mut k1 = vec![zero; n];
    let mut k2 = vec![zero; n];
    let mut k3 = vec![zero; n];
    let mut k4 = vec![zero; n];
    let mut k5 = vec![zero; n];
    let mut k6 = vec![zero; n];
    let mut k7 = vec![zero; n];
    let mut ytmp = vec![zero; n];
    let mut ynew = vec![zero; n];
    let mut dense = vec![zero; 5 * n];

    sys.rhs(t0, y, &mut k1);
    report.rhs_evaluations += 1;
    let mut h = initial_step(sys, t0, y, &k1, span, &opts, &mut ytmp, &mut k2);
    report.rhs_evaluations += 1;
    let mut t = t0;
    let mut last_rejected = false;

    while t < t1 {
        if report.accepted + report.rejected >= opts.max_steps {
            return Err(Error::StepUnderflow {
                t: t.to_f64_lossy(),
                h: h.to_f64_lossy(),
            });
        }
        let mut stop = t1;
        if let Some(g) = opts.grid {
            let k = ((t - t0) / g + T::lit(1e-3)).floor() + T::one();
            let bp = t0 + g * k;
            if bp < t1 {
                stop = bp;
            }
        }
        let h_wanted = h;
        let clipped = t + h * T::lit(1.01) >= stop;
        if clipped {
            h = stop - t;
        }
        let h_floor = T::eps() * T::lit(16.0) * t.abs().max(span * T::lit(1e-3));
        if h < h_floor {
            return Err(Error::StepUnderflow {
                t: t.to_f64_lossy(),
                h: h.to_f64_lossy(),
            });
        }

        axpy(&mut ytmp, y, h, &[(A21, &k1)]);
        sys.rhs(t + h * T::lit(C[0]), &ytmp, &mut k2);
        axpy(&mut ytmp, y, h, &[(A31, &k1), (A32, &k2)]);
        sys.rhs(t + h * T::lit(C[1]), &ytmp, &mut k3);
        axpy(&mut ytmp, y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        sys.rhs(t + h * T::lit(C[2]), &ytmp, &mut k4);
        axpy(&mut ytmp, y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        sys.rhs(t + h * T::lit(C[3]), &ytmp, &mut k5);
        axpy(
            &mut ytmp,
            y,
            h,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        );
        let t_new = if clipped { stop } else { t + h };
        sys.rhs(t_new, &ytmp, &mut k6);
        axpy(
            &mut ynew,
            y,
            h,
            &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
        );
        sys.rhs(t_new, &ynew, &mut k7);
        report.rhs_evaluations += 6;

        let mut err_sq = T::zero();
        let mut err_max = T::zero();
        for i in 0..n {
            let e = (k1[i] * T::lit(E1)
                + k3[i] * T::lit(E3)
                + k4[i] * T::lit(E4)
                + k5[i] * T::lit(E5)
                + k6[i] * T::lit(E6)
                + k7[i] * T::lit(E7))
                * h;
            let en = cabs(e);
            let sc = opts.atol + opts.rtol * cabs(y[i]).max(cabs(ynew[i]));
            let r = en / sc;
            err_sq += r * r;
            err_max = err_max.max(en);
        }
        let err = (err_sq / T::lit(n as f64)).sqrt();

        if err <= T::one() {
            report.accepted += 1;
            report.error_estimate += err_max;
            if next_out < outputs.len() && outputs[next_out] <= t_new {
                for i in 0..n {
                    let r2 = ynew[i] - y[i];
                    let r3 = k1[i] * h - r2;
                    let r4 = r2 - k7[i] * h - r3;
                    let r5 = (k1[i] * T::lit(D1)
                        + k3[i] * T::lit(D3)
                        + k4[i] * T::lit(D4)
                        + k5[i] * T::lit(D5)
                        + k6[i] * T::lit(D6)
                        + k7[i] * T::lit(D7))
                        * h;
                    dense[i] = y[i];
                    dense[n + i] = r2;
                    dense[2 * n + i] = r3;
                    dense[3 * n + i] = r4;
                    dense[4 * n + i] = r5;
                }
                while next_out < outputs.len() && outputs[next_out] <= t_new {
                    let to = outputs[next_out];
                    let th = (to - t) / h;
                    let th1 = T::one() - th;
                    for i in 0..n {
                        ytmp[i] = dense[i]
                            + (dense[n + i]
                                + (dense[2 * n + i]
                                    + (dense[3 * n + i] + dense[4 * n + i] * th1) * th)
                                    * th1)
                                * th;
                    }
                    sys.project(&mut ytmp);
                    observe(next_out, to, &ytmp);
                    next_out += 1;
                }
            }
            std::mem::swap(y, &mut ynew);
            sys.project(y);
            std::mem::swap(&mut k1, &mut k7);
            t = t_new;
            let mut fac = T::lit(0.9) * err.max(T::lit(1e-10)).powf(T::lit(-0.2));
            fac = fac.min(T::lit(if last_rejected { 1.0 } else { 5.0 }));
            h *= fac.max(T::lit(0.2));
            if clipped && h < h_wanted {
                h = h_wanted;
            }
            last_rejected = false;
        } else {
            report.rejected += 1;
            let fac = (T::lit(0.9) * err.powf(T::lit(-0.2))).max(T::lit(0.1));
            h *= fac;
            last_rejected = true;
        }
    }
    while next_out < outputs.len() {
        observe(next_out, outputs[next_out], y);
        next_out += 1;
    }
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn initial_step<T: Real, S: System<T>>(
    sys: &S,
    t0: T,
    y: &[Cx<T>],
    f0: &[Cx<T>],
    span: T,
    opts: &Options<T>,
    ytmp: &mut [Cx<T>],
    f1: &mut [Cx<T>],
) -> T {
    let n = T::lit(y.len() as f64);
    let mut d0 = T::zero();
    let mut d1 = T::zero();
    for i in 0..y.len() {
        let sc = opts.atol + opts.rtol * cabs(y[i]);
        d0 += (cabs(y[i]) / sc).powi(2);
        d1 += (cabs(f0[i]) / sc).powi(2);
    }
    let d0 = (d0 / n).sqrt();
    let d1 = (d1 / n).sqrt();
    let small = T::lit(1e-5);
    let mut h0 = if d0 < small || d1 < small {
        span * T::lit(1e-6)
    } else {
        T::lit(0.01) * d0 / d1
    };
    h0 = h0.min(span);
    for i in 0..y.len() {
        ytmp[i] = y[i] + f0[i] * h0;
    }
    sys.rhs(t0 + h0, ytmp, f1);
    let mut d2 = T::zero();
    for i in 0..y.len() {
        let sc = opts.atol + opts.rtol * cabs(y[i]);
        d2 += (cabs(f1[i] - f0[i]) / sc).powi(2);
    }
    let d2 = (d2 / n).sqrt() / h0;
    let h1 = if d1.max(d2) <= T::lit(1e-15) {
        (h0 * T::lit(1e-3)).max(T::lit(1e-6) * span)
    } else {
        (T::lit(0.01) / d1.max(d2)).powf(T::lit(0.2))
    };
    (T::lit(100.0) * h0).min(h1).min(span).max(span * T::lit(1e-6))
}
