//! Virtual-Z frame bookkeeping across state transfers.
//!
//! A qubit's physical state in its rotating frame relates to the logical
//! state by `physical = D(φ)† logical` with `D(φ) = diag(1, e^{iφ})`, so a
//! logical gate `U` is played as `D(φ)† U D(φ)` and a virtual `Z(θ)` only
//! advances `φ`.

use nalgebra::Matrix2;

use crate::qubits::QubitId;
use crate::real::{cis, cre, Cx, Real};

/// Frame of one qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame<T> {
    pub qubit: QubitId,
    /// Accumulated virtual-Z phase in `[0, 2π)`.
    pub phase: T,
    /// Frame angular frequency (rad/s).
    pub frequency: T,
}

pub(crate) fn wrap_angle<T: Real>(x: T) -> T {
    let tau = T::two_pi();
    let mut r = x % tau;
    if r < T::zero() {
        r += tau;
    }
    if r >= tau {
        r -= tau;
    }
    r
}

impl<T: Real> Frame<T> {
    pub fn new(qubit: QubitId, frequency: T) -> Self {
        Self {
            qubit,
            phase: T::zero(),
            frequency,
        }
    }

    /// `D(φ)`.
    pub fn phase_matrix(&self) -> Matrix2<Cx<T>> {
        Matrix2::new(
            cre(T::one()),
            cre(T::zero()),
            cre(T::zero()),
            cis(self.phase),
        )
    }

    /// Physical pulse that realises logical `u` in this frame.
    pub fn physical_gate(&self, u: &Matrix2<Cx<T>>) -> Matrix2<Cx<T>> {
        let d = self.phase_matrix();
        d.adjoint() * u * d
    }
}

/// Advances the frame by `angle`; no physical evolution.
pub fn apply_virtual_z<T: Real>(f: Frame<T>, angle: T) -> Frame<T> {
    Frame {
        phase: wrap_angle(f.phase + angle),
        ..f
    }
}

/// Frames after a transfer starting at absolute time `t_transfer`:
/// the receiver takes `φ_e + (ω_e − ω_r) t`, the emitter takes
/// `φ_r + (ω_r − ω_e) t`. Returns `(emitter, receiver)`.
pub fn transfer_frame<T: Real>(emitter: Frame<T>, receiver: Frame<T>, t_transfer: T) -> (Frame<T>, Frame<T>) {
    let dw = emitter.frequency - receiver.frequency;
    let new_receiver = Frame {
        phase: wrap_angle(emitter.phase + dw * t_transfer),
        ..receiver
    };
    let new_emitter = Frame {
        phase: wrap_angle(receiver.phase - dw * t_transfer),
        ..emitter
    };
    (new_emitter, new_receiver)
}

/// Phase `e^{-i(ω_from − ω_to) t}` picked up by an excitation handed from
/// one rotating frame to another at time `t`.
pub fn handover_phase<T: Real>(omega_from: T, omega_to: T, t: T) -> Cx<T> {
    cis(-(omega_from - omega_to) * t)
}

/// Ideal transfer on `(emitter, receiver)` with mixing angle `θ`:
/// `|10⟩ → cosθ|10⟩ − sinθ|01⟩`, `|01⟩ → −sinθ|10⟩ − cosθ|01⟩`,
/// `|00⟩` and `|11⟩` fixed. Row/column index is `2·e + r`.
pub fn ideal_transfer_matrix<T: Real>(theta: T) -> nalgebra::Matrix4<Cx<T>> {
    let (s, c) = theta.sin_cos();
    let z = cre(T::zero());
    let o = cre(T::one());
    nalgebra::Matrix4::new(
        o, z, z, z, //
        z, cre(-c), cre(-s), z, //
        z, cre(-s), cre(c), z, //
        z, z, z, o,
    )
}

/// Lossless circuit-level Ramsey loop on the l-qubit pair: `Y(π/2)` on L1,
/// transfer to L2 at `t0`, idle `gap`, transfer back, `Y(−π/2)` on L1.
/// Returns the probability of reading L1 in `|0⟩`.
pub fn ramsey_round_trip<T: Real>(
    omega: [T; 2],
    t0: T,
    transfer_duration: T,
    gap: T,
    tracking: bool,
) -> T {
    let ry = |a: T| {
        let (s, c) = (a / T::lit(2.0)).sin_cos();
        Matrix2::new(cre(c), cre(-s), cre(s), cre(c))
    };
    let mut f1 = Frame::new(QubitId::L1, omega[0]);
    let mut f2 = Frame::new(QubitId::L2, omega[1]);
    // State over (L1, L2), index 2·l1 + l2, in the physical rotating frames.
    let mut psi = nalgebra::Vector4::new(cre(T::one()), cre(T::zero()), cre(T::zero()), cre(T::zero()));
    let on_l1 = |u: Matrix2<Cx<T>>| {
        let z = cre(T::zero());
        nalgebra::Matrix4::new(
            u[(0, 0)], z, u[(0, 1)], z, //
            z, u[(0, 0)], z, u[(0, 1)], //
            u[(1, 0)], z, u[(1, 1)], z, //
            z, u[(1, 0)], z, u[(1, 1)],
        )
    };
    psi = on_l1(f1.physical_gate(&ry(T::frac_pi_2()))) * psi;

    let handover = |psi: &mut nalgebra::Vector4<Cx<T>>, l1_to_l2: bool, t: T| {
        // Reorder to (emitter, receiver), transfer, then apply the frame
        // mismatch on whichever site now holds each excitation.
        let perm = |v: &nalgebra::Vector4<Cx<T>>| nalgebra::Vector4::new(v[0], v[2], v[1], v[3]);
        let mut v = if l1_to_l2 { *psi } else { perm(psi) };
        v = ideal_transfer_matrix(T::frac_pi_2()) * v;
        let (we, wr) = if l1_to_l2 { (omega[0], omega[1]) } else { (omega[1], omega[0]) };
        v[1] *= handover_phase(we, wr, t);
        v[2] *= handover_phase(wr, we, t);
        *psi = if l1_to_l2 { v } else { perm(&v) };
    };

    handover(&mut psi, true, t0);
    if tracking {
        let (a, b) = transfer_frame(f1, f2, t0);
        f1 = a;
        f2 = b;
    }
    let t1 = t0 + transfer_duration + gap;
    handover(&mut psi, false, t1);
    if tracking {
        f1 = transfer_frame(f2, f1, t1).1;
    }
    psi = on_l1(f1.physical_gate(&ry(-T::frac_pi_2()))) * psi;
    psi[0].norm_sqr() + psi[1].norm_sqr()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{PI, TAU};

    fn frame(phase: f64, w: f64) -> Frame<f64> {
        Frame {
            qubit: QubitId::L1,
            phase,
            frequency: w,
        }
    }

    #[test]
    fn zero_rotation_is_identity() {
        let f = frame(0.3, 1.0);
        assert_eq!(apply_virtual_z(f, 0.0), f);
    }

    #[test]
    fn full_turn_is_identity() {
        let f = frame(0.3, 1.0);
        assert_abs_diff_eq!(apply_virtual_z(f, TAU).phase, 0.3, epsilon = 1e-12);
    }

    #[test]
    fn wraps_past_two_pi() {
        let f = apply_virtual_z(frame(0.3, 1.0), 6.1);
        assert_abs_diff_eq!(f.phase, 0.3 + 6.1 - TAU, epsilon = 1e-12);
        assert_abs_diff_eq!(f.phase, 0.11681, epsilon = 1e-5);
    }

    #[test]
    fn degenerate_frequencies_copy_the_phase() {
        let (_, r) = transfer_frame(frame(1.2, 5.0), frame(0.0, 5.0), 3e-7);
        assert_abs_diff_eq!(r.phase, 1.2, epsilon = 1e-12);
    }

    #[test]
    fn four_megahertz_offset_over_one_transfer() {
        let e = frame(0.0, TAU * 4e6);
        let r = frame(0.0, 0.0);
        let (_, r2) = transfer_frame(e, r, 206e-9);
        assert_abs_diff_eq!(r2.phase, (TAU * 0.824) % TAU, epsilon = 1e-9);
        assert_abs_diff_eq!(r2.phase, 5.17734, epsilon = 1e-5);
    }

    #[test]
    fn opposite_transfers_shift_by_frequency_times_interval() {
        let w1 = TAU * 4.9e9;
        let w2 = TAU * 4.896e9;
        let f1 = Frame { qubit: QubitId::L1, phase: 0.4, frequency: w1 };
        let f2 = Frame { qubit: QubitId::L2, phase: 1.0, frequency: w2 };
        let (t, t2) = (100e-9, 356e-9);
        let (e, r) = transfer_frame(f1, f2, t);
        let (r_back, e_back) = transfer_frame(r, e, t2);
        let expect = wrap_angle(0.4 + (w1 - w2) * (t - t2));
        assert_eq!(r_back.qubit, QubitId::L2);
        assert_abs_diff_eq!(e_back.phase, expect, epsilon = 1e-6);
    }

    #[test]
    fn physical_gate_conjugates_by_frame() {
        let f = frame(PI / 2.0, 0.0);
        let x = Matrix2::new(cre(0.0), cre(1.0), cre(1.0), cre(0.0));
        let p = f.physical_gate(&x);
        // X in a frame rotated by π/2 plays as ±Y.
        assert_abs_diff_eq!(p[(0, 1)].im, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p[(1, 0)].im, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn ideal_transfer_is_unitary_and_signed_swap() {
        for th in [PI / 2.0, PI / 4.0, 0.3] {
            let u = ideal_transfer_matrix(th);
            let dev = (u.adjoint() * u - nalgebra::Matrix4::identity()).norm();
            assert!(dev < 1e-12);
        }
        let u = ideal_transfer_matrix(PI / 2.0);
        assert_abs_diff_eq!(u[(1, 2)].re, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(u[(2, 1)].re, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn ramsey_loop_needs_tracking() {
        let w2 = TAU * 4.833e9;
        let w = [w2 * (1.0 + 1e-3), w2];
        let on = ramsey_round_trip(w, 0.0, 206e-9, 50e-9, true);
        let off = ramsey_round_trip(w, 0.0, 206e-9, 50e-9, false);
        assert!(on > 1.0 - 1e-6, "{on}");
        assert!(1.0 - off > 0.01, "{off}");
    }

    proptest! {
        #[test]
        fn phase_stays_in_range(p in 0.0f64..TAU, a in -100.0f64..100.0) {
            let f = apply_virtual_z(frame(p, 0.0), a);
            prop_assert!(f.phase >= 0.0 && f.phase < TAU);
        }

        #[test]
        fn tracked_loop_is_perfect_for_any_timing(t0 in 0.0f64..5e-6, gap in 0.0f64..1e-6, rel in -1e-2f64..1e-2) {
            let w2 = TAU * 4.8e9;
            let p = ramsey_round_trip([w2 * (1.0 + rel), w2], t0, 206e-9, gap, true);
            prop_assert!(p > 1.0 - 1e-6);
        }
    }
}
