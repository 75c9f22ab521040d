//! Two-mode model of a tunable-coupling qubit.
//!
//! The top and bottom transmons hybridize through an internal coupling `J`.
//! The symmetric (in-phase, lower) eigenmode couples to the waveguide through
//! the *difference* of its electrode amplitudes, so it is dark when the two
//! bare modes are degenerate. This layer is for validation and demos; the
//! dynamics take (detuning, coupling) trajectories directly.

use crate::error::{Error, Result};
use crate::real::Real;

/// Default internal top-bottom coupling. Not reported for the device; chosen
/// so the anti-symmetric mode sits a few hundred MHz above the symmetric one.
pub const DEFAULT_INTERNAL_COUPLING: f64 = 150e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TcqSetting<T> {
    pub top_frequency: T,
    pub bottom_frequency: T,
    pub internal_coupling: T,
    pub bare_cpw_coupling: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TcqModes<T> {
    pub symmetric_frequency: T,
    pub antisymmetric_frequency: T,
    pub effective_coupling: T,
}

impl<T: Real> TcqSetting<T> {
    pub fn new(top: T, bottom: T, internal_coupling: T, bare_cpw_coupling: T) -> Result<Self> {
        if !(internal_coupling > T::zero()) {
            return Err(Error::Invalid {
                field: "internal_coupling".into(),
                constraint: "internal_coupling > 0".into(),
            });
        }
        if bare_cpw_coupling < T::zero() {
            return Err(Error::Invalid {
                field: "bare_cpw_coupling".into(),
                constraint: "bare_cpw_coupling >= 0".into(),
            });
        }
        Ok(Self {
            top_frequency: top,
            bottom_frequency: bottom,
            internal_coupling,
            bare_cpw_coupling,
        })
    }
}

/// Closed-form diagonalization of `[[top, -J], [-J, bottom]]`.
pub fn diagonalize_tcq<T: Real>(s: &TcqSetting<T>) -> TcqModes<T> {
    let two = T::lit(2.0);
    let mean = (s.top_frequency + s.bottom_frequency) / two;
    let half_split = (s.top_frequency - s.bottom_frequency) / two;
    let j = s.internal_coupling;
    let r = (half_split * half_split + j * j).sqrt();
    TcqModes {
        symmetric_frequency: mean - r,
        antisymmetric_frequency: mean + r,
        effective_coupling: s.bare_cpw_coupling * electrode_difference(half_split, j),
    }
}

/// `v_top - v_bottom` for the normalized symmetric eigenvector `(J, δ + R)`.
fn electrode_difference<T: Real>(half_split: T, j: T) -> T {
    let r = (half_split * half_split + j * j).sqrt();
    // δ + R without cancellation for δ < 0.
    let d_plus_r = if half_split >= T::zero() {
        half_split + r
    } else {
        j * j / (r - half_split)
    };
    (j - d_plus_r) / (j * j + d_plus_r * d_plus_r).sqrt()
}

/// Finds the top/bottom asymmetry producing `target_coupling` while shifting
/// the symmetric-mode frequency by `target_detuning` relative to `s0`.
pub fn coupling_to_setting<T: Real>(
    target_detuning: T,
    target_coupling: T,
    s0: &TcqSetting<T>,
) -> Result<TcqSetting<T>> {
    let g = s0.bare_cpw_coupling;
    let j = s0.internal_coupling;
    if target_coupling.abs() >= g && target_coupling != T::zero() {
        return Err(Error::OutOfRange(format!(
            "|coupling| {} must be below the bare coupling {}",
            target_coupling, g
        )));
    }
    let symmetric_target = diagonalize_tcq(s0).symmetric_frequency + target_detuning;

    let half_split = if target_coupling == T::zero() {
        T::zero()
    } else {
        // g_eff(δ) decreases monotonically from +g to -g.
        let f = |d: T| g * electrode_difference(d, j) - target_coupling;
        let (mut lo, mut hi) = (-j, j);
        let mut grow = 0;
        while f(lo) < T::zero() || f(hi) > T::zero() {
            lo *= T::lit(4.0);
            hi *= T::lit(4.0);
            grow += 1;
            if grow > 200 {
                return Err(Error::OutOfRange(format!(
                    "no asymmetry reaches coupling {target_coupling}"
                )));
            }
        }
        for _ in 0..400 {
            let mid = (lo + hi) / T::lit(2.0);
            if mid == lo || mid == hi {
                break;
            }
            if f(mid) > T::zero() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo + hi) / T::lit(2.0)
    };

    let r = (half_split * half_split + j * j).sqrt();
    let mean = symmetric_target + r;
    Ok(TcqSetting {
        top_frequency: mean + half_split,
        bottom_frequency: mean - half_split,
        internal_coupling: j,
        bare_cpw_coupling: g,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Matrix2, SymmetricEigen};
    use proptest::prelude::*;

    fn setting(top: f64, bottom: f64) -> TcqSetting<f64> {
        TcqSetting::new(top, bottom, 150e6, 10e6).unwrap()
    }

    #[test]
    fn degenerate_point_is_dark() {
        let m = diagonalize_tcq(&setting(5.0e9, 5.0e9));
        assert_eq!(m.effective_coupling, 0.0);
        assert!((m.antisymmetric_frequency - m.symmetric_frequency - 300e6).abs() < 1e-3);
    }

    #[test]
    fn matches_numerical_eigensolver() {
        let s = setting(5.05e9, 4.95e9);
        let m = diagonalize_tcq(&s);
        // Independent oracle in GHz to keep the solver well scaled.
        let h = Matrix2::<f64>::new(5.05, -0.15, -0.15, 4.95);
        let eig = SymmetricEigen::new(h);
        let (lo, hi) = if eig.eigenvalues[0] < eig.eigenvalues[1] { (0, 1) } else { (1, 0) };
        let mut v = eig.eigenvectors.column(lo).into_owned();
        if v[0] + v[1] < 0.0 {
            v = -v;
        }
        assert!((m.symmetric_frequency / 1e9 - eig.eigenvalues[lo]).abs() < 1e-12);
        assert!((m.antisymmetric_frequency / 1e9 - eig.eigenvalues[hi]).abs() < 1e-12);
        let g_oracle = 10e6 * (v[0] - v[1]);
        assert!((m.effective_coupling - g_oracle).abs() < 1e-6 * 10e6);
        assert!(m.effective_coupling < 0.0);
    }

    #[test]
    fn zero_target_gives_symmetric_setting() {
        let s0 = setting(5.0e9, 5.0e9);
        let s = coupling_to_setting(0.0, 0.0, &s0).unwrap();
        assert_eq!(s.top_frequency, s.bottom_frequency);
    }

    #[test]
    fn round_trip_at_thirty_percent() {
        let s0 = setting(5.0e9, 5.0e9);
        let s = coupling_to_setting(2e6, 3e6, &s0).unwrap();
        let m = diagonalize_tcq(&s);
        assert!(((m.effective_coupling - 3e6) / 3e6).abs() < 1e-6);
        let sym0 = diagonalize_tcq(&s0).symmetric_frequency;
        assert!(((m.symmetric_frequency - sym0) - 2e6).abs() < 1e-6 * 2e6);
    }

    #[test]
    fn unreachable_coupling_is_an_error() {
        let s0 = setting(5.0e9, 5.0e9);
        assert!(matches!(
            coupling_to_setting(0.0, 20e6, &s0),
            Err(Error::OutOfRange(_))
        ));
    }

    #[test]
    fn round_trip_grid() {
        let s0 = setting(4.93e9, 4.93e9);
        let sym0 = diagonalize_tcq(&s0).symmetric_frequency;
        for i in 0..10 {
            for k in 0..10 {
                let det = -50e6 + 10e6 * i as f64 + 1e6;
                let g = -9e6 + 2e6 * k as f64;
                let m = diagonalize_tcq(&coupling_to_setting(det, g, &s0).unwrap());
                assert!(((m.effective_coupling - g) / g).abs() < 1e-6, "g={g}");
                let d = m.symmetric_frequency - sym0;
                assert!(((d - det) / det).abs() < 1e-6, "det={det}");
            }
        }
    }

    #[test]
    fn f32_round_trip() {
        let s0 = TcqSetting::<f32>::new(5.0, 5.0, 0.15, 0.01).unwrap();
        let s = coupling_to_setting(0.002f32, 0.004, &s0).unwrap();
        let m = diagonalize_tcq(&s);
        assert!((m.effective_coupling - 0.004).abs() < 1e-5);
    }

    proptest! {
        #[test]
        fn coupling_is_odd_in_asymmetry(mean in 4.5e9f64..5.5e9, d in 0.0f64..500e6) {
            let a = diagonalize_tcq(&setting(mean + d, mean - d)).effective_coupling;
            let b = diagonalize_tcq(&setting(mean - d, mean + d)).effective_coupling;
            prop_assert!((a + b).abs() <= 1e-9 * 10e6);
        }
    }
}
