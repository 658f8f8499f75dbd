//! Large-N limits, evaluated in double precision.
//!
//! Finite-N profiles here are floating-point twins of the exact ones in
//! [`crate::positional`] and are used where N is too large for exact tables.

use std::io::{self, Write};
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::positional::Model;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AsymptoticError {
    #[error("θ = {theta} out of range: expected {expected}")]
    ThetaOutOfRange { theta: f64, expected: &'static str },
    #[error("tolerance must be positive")]
    NonPositiveTolerance,
    #[error("k must be at least 1")]
    ZeroK,
    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),
    #[error("unknown figure {0:?} (expected f4, m1 or m2)")]
    UnknownFigure(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticReport {
    pub model: Model,
    pub theta: f64,
    /// Ewens: rejected fraction x = k/N. Mallows θ<1: offset j = N − k.
    /// Mallows θ>1: the fixed number of rejections k.
    pub optimal_parameter: f64,
    pub limit_probability: f64,
    /// Upper bound on the truncation error (Mallows θ>1 only).
    pub series_truncation_error_bound: Option<f64>,
}

fn check_positive(theta: f64) -> Result<(), AsymptoticError> {
    if theta.is_finite() && theta > 0.0 {
        Ok(())
    } else {
        Err(AsymptoticError::ThetaOutOfRange {
            theta,
            expected: "θ > 0",
        })
    }
}

fn check_tol(tol: f64) -> Result<(), AsymptoticError> {
    if tol > 0.0 {
        Ok(())
    } else {
        Err(AsymptoticError::NonPositiveTolerance)
    }
}

/// Ewens: reject a fraction `e^{−1/θ}` and win with probability `1/e`.
pub fn ewens_limit(theta: f64) -> Result<AsymptoticReport, AsymptoticError> {
    check_positive(theta)?;
    Ok(AsymptoticReport {
        model: Model::Ewens,
        theta,
        optimal_parameter: (-1.0 / theta).exp(),
        limit_probability: (-1.0f64).exp(),
        series_truncation_error_bound: None,
    })
}

/// Mallows θ < 1: reject all but the last `j = max(−1/ln θ, 1)` candidates,
/// winning with probability `j·θ^{j−1}·(1−θ)`.
pub fn mallows_sub_limit(theta: f64) -> Result<AsymptoticReport, AsymptoticError> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(AsymptoticError::ThetaOutOfRange {
            theta,
            expected: "0 < θ < 1",
        });
    }
    let j = (-1.0 / theta.ln()).max(1.0);
    Ok(AsymptoticReport {
        model: Model::Mallows,
        theta,
        optimal_parameter: j,
        limit_probability: j * theta.powf(j - 1.0) * (1.0 - theta),
        series_truncation_error_bound: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesValue {
    pub k: usize,
    /// Partial sum; the limit lies in `[value, value + bound]`.
    pub value: f64,
    pub bound: f64,
    pub terms: usize,
}

/// Mallows θ > 1 limit of the strategy rejecting `k` candidates:
/// `(θ−1)·(θ^k−1)/θ^{k+1} · Σ_{i≥k} 1/(θ^i−1)`.
///
/// For `i ≥ k`, `θ^i − 1 ≥ θ^i·(1 − θ^{−k})`, so the tail from index `M` is at
/// most `θ^{−M} / ((1 − θ^{−1})(1 − θ^{−k}))`; summation stops once that tail,
/// times the prefactor, is below `tol`.
pub fn mallows_super_series(
    theta: f64,
    k: usize,
    tol: f64,
) -> Result<SeriesValue, AsymptoticError> {
    if !(theta > 1.0 && theta.is_finite()) {
        return Err(AsymptoticError::ThetaOutOfRange {
            theta,
            expected: "θ > 1",
        });
    }
    if k == 0 {
        return Err(AsymptoticError::ZeroK);
    }
    check_tol(tol)?;
    let ln = theta.ln();
    let kf = k as f64;
    let prefactor = (theta - 1.0) * (kf * ln).exp_m1() / theta.powf(kf + 1.0);
    let tail_scale = 1.0 / ((1.0 - 1.0 / theta) * (1.0 - theta.powf(-kf)));
    let mut sum = 0.0;
    let mut i = k;
    loop {
        let bound = prefactor * theta.powf(-(i as f64)) * tail_scale;
        if bound < tol {
            return Ok(SeriesValue {
                k,
                value: prefactor * sum,
                bound,
                terms: i - k,
            });
        }
        sum += 1.0 / ((i as f64) * ln).exp_m1();
        i += 1;
    }
}

/// Best fixed k for Mallows θ > 1. Every strategy rejecting `k` or more is
/// worth at most `θ^{−k}`, which ends the search.
pub fn mallows_super_optimal_k(theta: f64, tol: f64) -> Result<SeriesValue, AsymptoticError> {
    let mut best = mallows_super_series(theta, 1, tol)?;
    let mut k = 2;
    while theta.powf(-(k as f64)) >= best.value {
        let v = mallows_super_series(theta, k, tol)?;
        if v.value > best.value {
            best = v;
        }
        k += 1;
    }
    Ok(best)
}

/// Mallows θ > 1 limit of accepting the first candidate, `(θ−1)/θ`. The series
/// family above covers `k ≥ 1` only.
pub fn mallows_super_first(theta: f64) -> Result<f64, AsymptoticError> {
    if !(theta > 1.0 && theta.is_finite()) {
        return Err(AsymptoticError::ThetaOutOfRange {
            theta,
            expected: "θ > 1",
        });
    }
    Ok((theta - 1.0) / theta)
}

/// Best limit over every fixed `k ≥ 0`.
pub fn mallows_super_limit(theta: f64, tol: f64) -> Result<AsymptoticReport, AsymptoticError> {
    let best = mallows_super_optimal_k(theta, tol)?;
    let first = mallows_super_first(theta)?;
    let (k, value, bound) = if first > best.value + best.bound {
        (0, first, 0.0)
    } else {
        (best.k, best.value, best.bound)
    };
    Ok(AsymptoticReport {
        model: Model::Mallows,
        theta,
        optimal_parameter: k as f64,
        limit_probability: value,
        series_truncation_error_bound: Some(bound),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GlobalMax {
    pub theta: f64,
    pub k: usize,
    pub probability: f64,
}

const GLOBAL_LO: f64 = 1.0;
const GLOBAL_HI: f64 = 4.0;
const GLOBAL_GRID: usize = 300;

/// Grid scan of `f` on `(GLOBAL_LO, GLOBAL_HI]`, then golden-section search on
/// the bracket around the best grid point until it is narrower than `tol`.
fn maximize<F>(f: F, tol: f64) -> Result<f64, AsymptoticError>
where
    F: Fn(f64) -> Result<f64, AsymptoticError>,
{
    let step = (GLOBAL_HI - GLOBAL_LO) / GLOBAL_GRID as f64;
    let mut best_i = 1;
    let mut best_v = f64::NEG_INFINITY;
    for i in 1..=GLOBAL_GRID {
        let v = f(GLOBAL_LO + step * i as f64)?;
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    let mut lo = GLOBAL_LO + step * (best_i as f64 - 1.0);
    let mut hi = (GLOBAL_LO + step * (best_i as f64 + 1.0)).min(GLOBAL_HI);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1)?;
        }
    }
    Ok((lo + hi) / 2.0)
}

fn series_tol_for(tol: f64) -> f64 {
    (tol * 1e-3).min(1e-10)
}

/// Maximizes the best `k ≥ 1` limit over `θ ∈ (1, 4]`.
pub fn mallows_global_max(tol: f64) -> Result<GlobalMax, AsymptoticError> {
    check_tol(tol)?;
    let series_tol = series_tol_for(tol);
    let theta = maximize(
        |t| mallows_super_optimal_k(t, series_tol).map(|v| v.value),
        tol,
    )?;
    let best = mallows_super_optimal_k(theta, series_tol)?;
    Ok(GlobalMax {
        theta,
        k: best.k,
        probability: best.value,
    })
}

/// Peak of the fixed-k limit as a function of θ on `(1, 4]`.
pub fn mallows_series_peak(k: usize, tol: f64) -> Result<GlobalMax, AsymptoticError> {
    check_tol(tol)?;
    if k == 0 {
        return Err(AsymptoticError::ZeroK);
    }
    let series_tol = series_tol_for(tol);
    let theta = maximize(
        |t| mallows_super_series(t, k, series_tol).map(|v| v.value),
        tol,
    )?;
    Ok(GlobalMax {
        theta,
        k,
        probability: mallows_super_series(theta, k, series_tol)?.value,
    })
}

/// The θ > 1 above which rejecting one candidate beats rejecting two,
/// located by bisection on `(1, 4]` to width `tol`.
pub fn mallows_k1_crossover(tol: f64) -> Result<f64, AsymptoticError> {
    check_tol(tol)?;
    let series_tol = 1e-12;
    let gap = |t: f64| -> Result<f64, AsymptoticError> {
        Ok(mallows_super_series(t, 1, series_tol)?.value
            - mallows_super_series(t, 2, series_tol)?.value)
    };
    let (mut lo, mut hi) = (1.01, GLOBAL_HI);
    while hi - lo > tol {
        let mid = (lo + hi) / 2.0;
        if gap(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((lo + hi) / 2.0)
}

/// Ewens win probabilities for `k = 0..N−1` from
/// `θ·(Σ_{i=k}^{N−1} 1/i)·∏_{j=k}^{N−1} j/(j+θ)`.
pub fn ewens_profile_f64(n: usize, theta: f64) -> Vec<f64> {
    let mut win = vec![0.0; n];
    let mut product = 1.0;
    let mut harmonic = 0.0;
    for k in (1..n).rev() {
        let j = k as f64;
        product *= j / (j + theta);
        harmonic += 1.0 / j;
        win[k] = theta * harmonic * product;
    }
    if n > 0 {
        win[0] = product;
    }
    win
}

/// Mallows win probabilities for `k = 0..N−1` from
/// `θ^{N−k−1}·([k]/[N])·Σ_{i=k}^{N−1} 1/[i]`, rearranged per regime so no
/// power of θ overflows.
pub fn mallows_profile_f64(n: usize, theta: f64) -> Vec<f64> {
    let mut win = vec![0.0; n];
    if n == 0 {
        return win;
    }
    let nf = n as f64;
    if theta == 1.0 {
        let mut tail = 0.0;
        for k in (1..n).rev() {
            tail += 1.0 / k as f64;
            win[k] = k as f64 / nf * tail;
        }
        win[0] = 1.0 / nf;
    } else if theta > 1.0 {
        // 1/[i] = (θ−1)/(θ^i−1); θ^{N−k−1}[k]/[N] = (θ^{−1} − θ^{−k−1})/(1 − θ^{−N})
        let inv = 1.0 / theta;
        let ln = theta.ln();
        let norm = 1.0 - inv.powf(nf);
        let mut tail = 0.0;
        for k in (1..n).rev() {
            tail += (theta - 1.0) / (k as f64 * ln).exp_m1();
            win[k] = (inv - inv.powf(k as f64 + 1.0)) / norm * tail;
        }
        win[0] = (1.0 - inv) / norm;
    } else {
        // 1/[i] = (1−θ)/(1−θ^i); θ^{N−k−1}[k]/[N] = θ^{N−k−1}(1−θ^k)/(1−θ^N)
        let ln = theta.ln();
        // 1 − θ^i, accurate near θ = 1
        let gap = |i: f64| -(i * ln).exp_m1();
        let norm = gap(nf);
        let mut tail = 0.0;
        for k in (1..n).rev() {
            tail += (1.0 - theta) / gap(k as f64);
            win[k] = theta.powf(nf - k as f64 - 1.0) * gap(k as f64) / norm * tail;
        }
        win[0] = theta.powf(nf - 1.0) * (1.0 - theta) / norm;
    }
    win
}

/// Smallest index of the maximum.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// Ewens rejected fraction `e^{−1/θ}`.
    F4,
    /// Mallows θ < 1 limit probability.
    M1,
    /// Mallows θ > 1 series, for a fixed k or the best k.
    M2,
}

impl FromStr for Figure {
    type Err = AsymptoticError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "f4" => Ok(Figure::F4),
            "m1" => Ok(Figure::M1),
            "m2" => Ok(Figure::M2),
            _ => Err(AsymptoticError::UnknownFigure(s.to_string())),
        }
    }
}

/// `steps + 1` evenly spaced points from `min` to `max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Grid {
    pub fn new(min: f64, max: f64, steps: usize) -> Result<Self, AsymptoticError> {
        if !(min.is_finite() && max.is_finite()) {
            return Err(AsymptoticError::InvalidGrid("bounds must be finite"));
        }
        if min > max {
            return Err(AsymptoticError::InvalidGrid("min exceeds max"));
        }
        if steps == 0 && min != max {
            return Err(AsymptoticError::InvalidGrid("steps must be positive"));
        }
        Ok(Grid { min, max, steps })
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.steps).map(move |i| {
            if self.steps == 0 {
                self.min
            } else {
                self.min + (self.max - self.min) * i as f64 / self.steps as f64
            }
        })
    }

    /// Default plotting range for a figure.
    pub fn for_figure(figure: Figure) -> Self {
        match figure {
            Figure::F4 => Grid {
                min: 0.25,
                max: 10.0,
                steps: 39,
            },
            Figure::M1 => Grid {
                min: 0.05,
                max: 0.95,
                steps: 18,
            },
            Figure::M2 => Grid {
                min: 1.05,
                max: 3.0,
                steps: 39,
            },
        }
    }
}

/// Writes `theta,value` rows (`theta,value,k,bound` for M2).
pub fn emit_figure_data(
    figure: Figure,
    grid: &Grid,
    k: Option<usize>,
    tol: f64,
    out: &mut impl Write,
) -> Result<(), FigureError> {
    match figure {
        Figure::F4 => {
            writeln!(out, "theta,value")?;
            for t in grid.points() {
                writeln!(out, "{t},{}", ewens_limit(t)?.optimal_parameter)?;
            }
        }
        Figure::M1 => {
            writeln!(out, "theta,value")?;
            for t in grid.points() {
                writeln!(out, "{t},{}", mallows_sub_limit(t)?.limit_probability)?;
            }
        }
        Figure::M2 => {
            writeln!(out, "theta,value,k,bound")?;
            for t in grid.points() {
                let v = match k {
                    Some(k) => mallows_super_series(t, k, tol)?,
                    None => mallows_super_optimal_k(t, tol)?,
                };
                writeln!(out, "{t},{},{},{}", v.value, v.k, v.bound)?;
            }
        }
    }
    Ok(())
}

#[derive(Debug, Error)]
pub enum FigureError {
    #[error(transparent)]
    Asymptotic(#[from] AsymptoticError),
    #[error(transparent)]
    Io(#[from] io::Error),
}
