use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::protocols::{Population, Protocol, RbDataset};
use crate::error::{Error, Result};

/// `A·pⁿ + B` with standard errors; `constant` marks data better described
/// by `B` alone, reported as `p = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFitResult {
    pub a: f64,
    pub p: f64,
    pub b: f64,
    pub a_err: f64,
    pub p_err: f64,
    pub b_err: f64,
    /// `1 − p`.
    pub rate: f64,
    /// Square root of the weighted residual sum of squares.
    pub residual_norm: f64,
    pub constant: bool,
}

const SIGMA_FLOOR: f64 = 1e-6;
/// 99th percentile of χ² with two degrees of freedom.
const SIGNIFICANCE: f64 = 9.21;

/// Per-length mean and its standard error over seeds.
pub fn decay_points(data: &RbDataset, pop: Population) -> Vec<(f64, f64, f64)> {
    data.lengths
        .iter()
        .filter_map(|&n| {
            let v: Vec<(f64, u64)> = data.at(n).map(|r| (r.get(pop), r.shots)).collect();
            if v.is_empty() {
                return None;
            }
            let k = v.len() as f64;
            let mean = v.iter().map(|x| x.0).sum::<f64>() / k;
            let sem = if v.len() > 1 {
                (v.iter().map(|x| (x.0 - mean).powi(2)).sum::<f64>() / (k - 1.0) / k).sqrt()
            } else {
                0.0
            };
            let shots = v.iter().map(|x| x.1).sum::<u64>() as f64;
            let shot = if shots > 0.0 {
                (mean * (1.0 - mean) / shots).max(0.0).sqrt()
            } else {
                0.0
            };
            Some((n as f64, mean, sem.max(shot).max(SIGMA_FLOOR)))
        })
        .collect()
}

struct Problem<'a> {
    x: &'a [f64],
    y: &'a [f64],
    w: Vec<f64>,
}

impl Problem<'_> {
    /// Best `(A, B)` for fixed `p` and the weighted residual sum.
    fn linear(&self, p: f64) -> (f64, f64, f64) {
        let (mut sff, mut sf, mut s1, mut sfy, mut sy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for ((&x, &y), &w) in self.x.iter().zip(self.y).zip(&self.w) {
            let f = p.powf(x);
            sff += w * f * f;
            sf += w * f;
            s1 += w;
            sfy += w * f * y;
            sy += w * y;
        }
        let det = sff * s1 - sf * sf;
        let (a, b) = if det.abs() > 1e-14 * sff * s1 {
            ((sfy * s1 - sf * sy) / det, (sff * sy - sf * sfy) / det)
        } else {
            (0.0, sy / s1)
        };
        (a, b, self.chi2(a, p, b))
    }

    fn chi2(&self, a: f64, p: f64, b: f64) -> f64 {
        self.x
            .iter()
            .zip(self.y)
            .zip(&self.w)
            .map(|((&x, &y), &w)| w * (y - a * p.powf(x) - b).powi(2))
            .sum()
    }

    fn residuals(&self, a: f64, p: f64, b: f64) -> Vec<f64> {
        self.x.iter().zip(self.y).map(|(&x, &y)| y - a * p.powf(x) - b).collect()
    }
}

/// Weighted least-squares fit of `A·pⁿ + B` to `(n, y, σ)` points.
pub fn fit_points(points: &[(f64, f64, f64)]) -> Result<DecayFitResult> {
    let mut distinct: Vec<f64> = points.iter().map(|p| p.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::Usage(format!(
            "decay fit needs at least 3 distinct lengths, got {}",
            distinct.len()
        )));
    }
    let x: Vec<f64> = points.iter().map(|p| p.0).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1).collect();
    let w: Vec<f64> = points.iter().map(|p| 1.0 / p.2.max(SIGMA_FLOOR).powi(2)).collect();
    let prob = Problem { x: &x, y: &y, w };

    let sw: f64 = prob.w.iter().sum();
    let ybar = prob.w.iter().zip(&y).map(|(w, y)| w * y).sum::<f64>() / sw;
    let chi2_const = prob.chi2(0.0, 1.0, ybar);
    let constant = |chi2: f64| DecayFitResult {
        a: 0.0,
        p: 1.0,
        b: ybar,
        a_err: 0.0,
        p_err: 0.0,
        b_err: sw.sqrt().recip(),
        rate: 0.0,
        residual_norm: chi2.sqrt(),
        constant: true,
    };

    // Grid in log(1 − p), then golden-section refinement.
    let (lo_exp, hi_exp) = (-7.0, 0.95f64.log10());
    let grid: Vec<f64> = (0..=600)
        .map(|k| 1.0 - 10f64.powf(lo_exp + (hi_exp - lo_exp) * k as f64 / 600.0))
        .collect();
    let scores: Vec<f64> = grid.iter().map(|&p| prob.linear(p).2).collect();
    let best = scores
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("non-empty grid");
    if best == 0 || chi2_const < 1e-24 {
        return Ok(constant(chi2_const));
    }
    let (mut lo, mut hi) = (grid[(best + 1).min(grid.len() - 1)], grid[best - 1]);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut c, mut d) = (hi - phi * (hi - lo), lo + phi * (hi - lo));
    let (mut fc, mut fd) = (prob.linear(c).2, prob.linear(d).2);
    for _ in 0..200 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - phi * (hi - lo);
            fc = prob.linear(c).2;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + phi * (hi - lo);
            fd = prob.linear(d).2;
        }
    }
    let p = 0.5 * (lo + hi);
    let (a, b, chi2) = prob.linear(p);
    if chi2_const - chi2 < SIGNIFICANCE {
        return Ok(constant(chi2_const));
    }

    let mut jtj = Matrix3::<f64>::zeros();
    for (&xi, &wi) in x.iter().zip(&prob.w) {
        let j = Vector3::new(p.powf(xi), a * xi * p.powf(xi - 1.0), 1.0);
        jtj += wi * j * j.transpose();
    }
    let cov = jtj.try_inverse().ok_or_else(|| Error::FitFailed {
        message: "singular normal matrix".into(),
        initial_guess: [prob.linear(grid[best]).0, grid[best], prob.linear(grid[best]).1],
        residuals: prob.residuals(a, p, b),
    })?;
    Ok(DecayFitResult {
        a,
        p,
        b,
        a_err: cov[(0, 0)].max(0.0).sqrt(),
        p_err: cov[(1, 1)].max(0.0).sqrt(),
        b_err: cov[(2, 2)].max(0.0).sqrt(),
        rate: 1.0 - p,
        residual_norm: chi2.sqrt(),
        constant: false,
    })
}

/// Fits the seed-averaged decay of one recorded population.
pub fn fit_exponential(data: &RbDataset, pop: Population) -> Result<DecayFitResult> {
    fit_points(&decay_points(data, pop))
}

/// Spectator decay `A·pⁿ + C`; the leakage rate is `1 − p` and the
/// asymptote is `b`.
pub fn fit_leakage(data: &RbDataset, spectator: Population) -> Result<DecayFitResult> {
    if spectator == Population::Survival {
        return Err(Error::Usage("leakage is fitted on a spectator population".into()));
    }
    fit_exponential(data, spectator)
}

/// Error per transfer (NB) or per Clifford (TQRB) from the decay.
pub fn eps_from_decay(fit: &DecayFitResult, protocol: Protocol) -> Result<f64> {
    match protocol {
        Protocol::Nb => Ok((1.0 - fit.p) / 2.0),
        Protocol::Tqrb => Ok((1.0 - fit.p) * 0.75),
        Protocol::Interleaved => Err(Error::Usage(
            "interleaved error needs the reference decay; use interleaved_error".into(),
        )),
    }
}

/// `(1 − p_int/p_ref)·3/4` with its propagated standard error.
pub fn interleaved_error(interleaved: &DecayFitResult, reference: &DecayFitResult) -> (f64, f64) {
    let ratio = interleaved.p / reference.p;
    let rel = ((interleaved.p_err / interleaved.p).powi(2) + (reference.p_err / reference.p).powi(2)).sqrt();
    (0.75 * (1.0 - ratio), 0.75 * ratio * rel)
}

/// Fit plus the derived rate and the convention used to derive it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateSummary {
    pub protocol: Protocol,
    pub population: Population,
    pub convention: String,
    pub fit: DecayFitResult,
    pub error_rate: f64,
    pub error_rate_err: f64,
}

impl RateSummary {
    pub fn nb(fit: DecayFitResult) -> Self {
        Self {
            protocol: Protocol::Nb,
            population: Population::Survival,
            convention: "(1 - p) / 2".into(),
            error_rate: (1.0 - fit.p) / 2.0,
            error_rate_err: fit.p_err / 2.0,
            fit,
        }
    }

    pub fn tqrb(fit: DecayFitResult) -> Self {
        Self {
            protocol: Protocol::Tqrb,
            population: Population::Survival,
            convention: "(1 - p) * 3 / 4".into(),
            error_rate: 0.75 * (1.0 - fit.p),
            error_rate_err: 0.75 * fit.p_err,
            fit,
        }
    }

    pub fn interleaved(fit: DecayFitResult, reference: &DecayFitResult) -> Self {
        let (e, s) = interleaved_error(&fit, reference);
        Self {
            protocol: Protocol::Interleaved,
            population: Population::Survival,
            convention: "(1 - p_int / p_ref) * 3 / 4".into(),
            error_rate: e,
            error_rate_err: s,
            fit,
        }
    }

    pub fn leakage(protocol: Protocol, spectator: Population, fit: DecayFitResult) -> Self {
        Self {
            protocol,
            population: spectator,
            convention: "1 - p".into(),
            error_rate: fit.rate,
            error_rate_err: fit.p_err,
            fit,
        }
    }
}
