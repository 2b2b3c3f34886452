//! Riesz energies and empirical dimension estimators for point clouds under
//! Euclidean or Korányi distance.

mod boxcount;
mod correlation;
mod energy;
mod proxy;

pub use boxcount::{box_counts, box_dimension, box_dimension_with, BoxCountOptions, KoranyiCover, NetWindow};
pub use correlation::{
    correlation_dimension, correlation_dimension_with, correlation_integral, CorrelationIntegral,
    CorrelationOptions,
};
pub use energy::{mutual_energy, mutual_energy_with, riesz_energy, riesz_energy_with, EnergyOptions, EnergyReport};
pub use proxy::{interior_proxy, positive_measure_proxy, positive_measure_proxy_with, ProxyOptions, ProxyReport};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::EmpiricalMeasure;
use crate::stats::fit_line;

/// Default cap on the cloud size fed to O(N²) kernels.
pub const DEFAULT_MAX_POINTS: usize = 20_000;

/// Rows handled per task in the pairwise kernels.
pub(crate) const ROW_CHUNK: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorMethod {
    Correlation,
    BoxCount,
    GreedyNet,
}

/// Output of a dimension estimator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimate {
    pub value: f64,
    pub stderr: f64,
    /// Smallest and largest radius used in the fit.
    pub fit_range: [f64; 2],
    pub method: EstimatorMethod,
    /// RMS residual of the log-log fit.
    pub residual: f64,
    /// Number of grid radii in the fit.
    pub fit_points: usize,
    /// Number of cloud points the estimate was computed from.
    pub points: usize,
}

/// Ascending geometric grid of radii.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusGrid {
    radii: Vec<f64>,
}

impl RadiusGrid {
    pub const MIN_POINTS: usize = 8;

    pub fn geometric(r_min: f64, r_max: f64, count: usize) -> Result<Self> {
        if !(r_min > 0.0 && r_max > r_min && r_max.is_finite()) {
            return Err(Error::Argument(format!(
                "radius grid needs 0 < r_min < r_max, got [{r_min}, {r_max}]"
            )));
        }
        if count < Self::MIN_POINTS {
            return Err(Error::Argument(format!(
                "radius grid needs at least {} points, got {count}",
                Self::MIN_POINTS
            )));
        }
        let ratio = (r_max / r_min).ln() / (count - 1) as f64;
        let radii = (0..count)
            .map(|k| if k + 1 == count { r_max } else { r_min * (ratio * k as f64).exp() })
            .collect();
        Ok(Self { radii })
    }

    /// `scale · 2^{−k}` for k = `k_max` down to 0.
    pub fn dyadic(scale: f64, k_max: u32) -> Result<Self> {
        Self::geometric(scale * 0.5f64.powi(k_max as i32), scale, k_max as usize + 1)
    }

    /// `count` radii spanning `decades` decades below the cloud's diameter
    /// bound.
    pub fn for_measure(measure: &EmpiricalMeasure, decades: f64, count: usize) -> Result<Self> {
        let r_max = measure.diameter_bound();
        if !(r_max > 0.0) {
            return Err(Error::DegenerateMeasure("cloud has zero diameter".into()));
        }
        Self::geometric(r_max * 10f64.powf(-decades), r_max, count)
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }
}

/// Least-squares slope of `ys` against `xs` over the selected grid indices.
pub(crate) fn slope_estimate(
    method: EstimatorMethod,
    radii: &[f64],
    xs: &[f64],
    ys: &[f64],
    keep: &[usize],
    points: usize,
) -> Result<DimensionEstimate> {
    if keep.len() < 3 {
        return Err(Error::Estimation(format!(
            "only {} usable grid radii after trimming (need 3)",
            keep.len()
        )));
    }
    let x: Vec<f64> = keep.iter().map(|&k| xs[k]).collect();
    let y: Vec<f64> = keep.iter().map(|&k| ys[k]).collect();
    let fit = fit_line(&x, &y, None)?;
    let lo = keep.iter().map(|&k| radii[k]).fold(f64::INFINITY, f64::min);
    let hi = keep.iter().map(|&k| radii[k]).fold(0.0, f64::max);
    Ok(DimensionEstimate {
        value: fit.slope,
        stderr: fit.slope_stderr,
        fit_range: [lo, hi],
        method,
        residual: fit.residual_rms,
        fit_points: keep.len(),
        points,
    })
}
