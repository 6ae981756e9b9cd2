//! Scaling series for the truncation estimates of a localized basis.
//!
//! Every series records `(parameter, observable)` pairs, a least-squares
//! power-law fit on log-log axes, and where applicable a witness constant
//! `C*`: the smallest constant making the claimed upper bound hold on the
//! sampled points.

mod boundary;
mod marker;
mod truncation;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use boundary::{lemma_decay_trick, prop_far_bd, prop_near_bd, DecayCase, DecayTrickReport};
pub use marker::{
    band_width, commutator_norm_bound, holder_chain, prop_p_x_pl, prop_pl_chern_diff, BandSplit, CommutatorBound,
    HolderChain, PxPlSeries,
};
pub use truncation::{approx_window_width, prop_approx_series, FourTermSplit};

use crate::error::{LabError, Result};

/// Observables at or below this are excluded from fits.
pub const FIT_FLOOR: f64 = 1e-14;

/// Default `delta` of `(1 + delta)`-localization.
pub const DEFAULT_DELTA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub r2: f64,
}

/// Least-squares slope of `ln y` against `ln x` over points with `x > 0` and
/// `y > FIT_FLOOR`, with the coefficient of determination of that line.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > FIT_FLOOR && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let (slope, intercept) = crate::spectral::least_squares_line(&logs)
        .ok_or(LabError::DegenerateFit { usable: logs.len() })?;
    let mean = logs.iter().map(|p| p.1).sum::<f64>() / logs.len() as f64;
    let ss_tot: f64 = logs.iter().map(|p| (p.1 - mean).powi(2)).sum();
    let ss_res: f64 = logs
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).powi(2))
        .sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) };
    Ok(PowerLawFit { exponent: slope, r2 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingSeries {
    pub name: String,
    /// `L`, `a` or `b`.
    pub parameter: String,
    /// Sorted by parameter.
    pub points: Vec<(usize, f64)>,
    /// `None` when fewer than three observables exceed [`FIT_FLOOR`].
    pub fit: Option<PowerLawFit>,
    pub witness: Option<f64>,
}

impl ScalingSeries {
    pub fn new(name: impl Into<String>, parameter: impl Into<String>, mut points: Vec<(usize, f64)>) -> Self {
        points.sort_by_key(|p| p.0);
        let as_f64: Vec<(f64, f64)> = points.iter().map(|(x, y)| (*x as f64, *y)).collect();
        ScalingSeries {
            name: name.into(),
            parameter: parameter.into(),
            fit: fit_power_law(&as_f64).ok(),
            points,
            witness: None,
        }
    }

    pub fn with_witness(mut self, witness: f64) -> Self {
        self.witness = Some(witness);
        self
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.1).collect()
    }

    pub fn exponent(&self) -> Option<f64> {
        self.fit.map(|f| f.exponent)
    }

    pub fn max_value(&self) -> f64 {
        self.points.iter().map(|p| p.1).fold(0.0, f64::max)
    }

    /// All observables at or below `tol`.
    pub fn is_numerically_zero(&self, tol: f64) -> bool {
        self.points.iter().all(|p| p.1.abs() <= tol)
    }

    pub fn is_strictly_decreasing(&self) -> bool {
        self.points.windows(2).all(|w| w[1].1 < w[0].1)
    }

    /// Non-increasing up to `slack` times the largest observable.
    pub fn is_non_increasing(&self, slack: f64) -> bool {
        let tol = slack * self.max_value();
        self.points.windows(2).all(|w| w[1].1 <= w[0].1 + tol)
    }

    pub fn all_finite_nonnegative(&self) -> bool {
        self.points.iter().all(|p| p.1.is_finite() && p.1 >= 0.0)
    }

    pub fn summary(&self) -> SeriesSummary {
        SeriesSummary {
            name: self.name.clone(),
            exponent: self.exponent(),
            r2: self.fit.map(|f| f.r2),
            witness_c: self.witness,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSummary {
    pub name: String,
    pub exponent: Option<f64>,
    pub r2: Option<f64>,
    #[serde(rename = "witness_C")]
    pub witness_c: Option<f64>,
}

/// CSV with columns `series_name, param, value`.
pub fn write_series_csv(path: &Path, series: &[&ScalingSeries]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["series_name", "param", "value"])?;
    for s in series {
        for (x, y) in &s.points {
            w.write_record([s.name.clone(), x.to_string(), format!("{y:.14e}")])?;
        }
    }
    w.flush().map_err(|e| LabError::io(path, e))
}

/// `<t> = sqrt(1 + t^2)`
pub(crate) fn bracket(t: f64) -> f64 {
    (1.0 + t * t).sqrt()
}
