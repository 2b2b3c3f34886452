//! Decidable stand-ins for "P_V μ has positive H^m measure" and for
//! "contains a ball".

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{correlation_dimension_with, CorrelationOptions, DimensionEstimate, RadiusGrid};
use crate::error::{ensure_dim, Result};
use crate::measure::EmpiricalMeasure;
use crate::stats::fit_line;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProxyOptions {
    /// The correlation dimension must reach m − dim_tolerance.
    pub dim_tolerance: f64,
    /// The cell-mass exponent must reach m − cell_tolerance.
    pub cell_tolerance: f64,
    /// Cell scales are refined while occupied cells hold at least this many
    /// points on average.
    pub min_cell_points: f64,
    /// Mass-weighted quantile of the cell masses whose decay exponent is
    /// tested; 1 would be the densest cell.
    pub cell_quantile: f64,
    /// The coarsest scales (side extent, extent/2, ...) left out of the
    /// exponent fit, where the shape of the support dominates.
    pub coarse_scales: usize,
    /// Fewer points than this is a negative verdict.
    pub min_points: usize,
    pub grid_decades: f64,
    pub grid_count: usize,
}

impl Default for ProxyOptions {
    fn default() -> Self {
        Self {
            dim_tolerance: 0.1,
            cell_tolerance: 0.2,
            min_cell_points: 50.0,
            cell_quantile: 0.5,
            coarse_scales: 2,
            min_points: 200,
            grid_decades: 6.0,
            grid_count: 25,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProxyReport {
    pub positive: bool,
    pub dimension: Option<DimensionEstimate>,
    /// Slope of log(quantile cell mass) against log(cell side).
    pub cell_exponent: Option<f64>,
    /// max over scales of (max cell mass / total) / (side / extent)^m.
    pub max_density_ratio: f64,
    pub scales: Vec<f64>,
    pub max_cell_mass: Vec<f64>,
    pub quantile_cell_mass: Vec<f64>,
    pub reason: Option<String>,
}

impl ProxyReport {
    fn negative(reason: String) -> Self {
        Self {
            positive: false,
            dimension: None,
            cell_exponent: None,
            max_density_ratio: f64::INFINITY,
            scales: vec![],
            max_cell_mass: vec![],
            quantile_cell_mass: vec![],
            reason: Some(reason),
        }
    }
}

pub fn positive_measure_proxy(measure: &EmpiricalMeasure, m: usize) -> Result<ProxyReport> {
    positive_measure_proxy_with(measure, m, &ProxyOptions::default())
}

/// `measure` holds m-dimensional chart coordinates. Positive iff the
/// correlation dimension is ≥ m − dim_tolerance and the typical dyadic cell
/// at side r carries mass O(r^m): the cell mass below which a
/// `cell_quantile` share of the total mass sits must decay with exponent
/// ≥ m − cell_tolerance. The densest cell
/// alone is too strict, since absolutely continuous projections of dusts
/// have unbounded densities.
pub fn positive_measure_proxy_with(measure: &EmpiricalMeasure, m: usize, opts: &ProxyOptions) -> Result<ProxyReport> {
    ensure_dim(m, measure.dim())?;
    if measure.len() < opts.min_points {
        return Ok(ProxyReport::negative(format!(
            "{} points, below the minimum {}",
            measure.len(),
            opts.min_points
        )));
    }
    let target = m as f64 - opts.dim_tolerance;
    let dimension = RadiusGrid::for_measure(measure, opts.grid_decades, opts.grid_count)
        .and_then(|grid| correlation_dimension_with(measure, measure.metric(), &grid, &CorrelationOptions::default()));
    let dimension = match dimension {
        Ok(d) => d,
        Err(e) => return Ok(ProxyReport::negative(format!("correlation dimension failed: {e}"))),
    };

    let (lo, hi) = measure.bounding_box().expect("nonempty");
    let extent = lo.iter().zip(&hi).map(|(a, b)| b - a).fold(0.0, f64::max);
    let total = measure.total_mass();
    let mut scales = Vec::new();
    let mut masses = Vec::new();
    let mut typical = Vec::new();
    let mut side = extent;
    while side > 0.0 && scales.len() < 40 {
        let mut cells: HashMap<Vec<i64>, f64> = HashMap::new();
        for (p, w) in measure.iter_points().zip(measure.weights()) {
            let key = p.iter().zip(&lo).map(|(x, l)| ((x - l) / side).floor() as i64).collect();
            *cells.entry(key).or_insert(0.0) += w;
        }
        if (measure.len() as f64) / (cells.len() as f64) < opts.min_cell_points {
            break;
        }
        scales.push(side);
        let mut sorted: Vec<f64> = cells.into_values().map(|v| v / total).collect();
        sorted.sort_by(f64::total_cmp);
        masses.push(*sorted.last().expect("nonempty"));
        let mut acc = 0.0;
        let q = sorted
            .iter()
            .find(|&&v| {
                acc += v;
                acc >= opts.cell_quantile
            })
            .copied()
            .unwrap_or(masses[masses.len() - 1]);
        typical.push(q);
        side *= 0.5;
    }
    let max_density_ratio = scales
        .iter()
        .zip(&masses)
        .map(|(s, mm)| mm / (s / extent).powi(m as i32))
        .fold(0.0, f64::max);
    let skip = opts.coarse_scales.min(scales.len());
    let cell_exponent = if scales.len() >= skip + 3 {
        let x: Vec<f64> = scales[skip..].iter().map(|s| s.ln()).collect();
        let y: Vec<f64> = typical[skip..].iter().map(|v| v.ln()).collect();
        fit_line(&x, &y, None).ok().map(|f| f.slope)
    } else {
        None
    };
    let mut reason = None;
    let cell_target = m as f64 - opts.cell_tolerance;
    let dim_ok = dimension.value >= target;
    if !dim_ok {
        reason = Some(format!("correlation dimension {:.3} < {target:.3}", dimension.value));
    }
    let cells_ok = match cell_exponent {
        Some(e) if e >= cell_target => true,
        Some(e) => {
            reason.get_or_insert(format!("cell-mass exponent {e:.3} < {cell_target:.3}"));
            false
        }
        None => {
            reason.get_or_insert("too few resolvable cell scales".into());
            false
        }
    };
    Ok(ProxyReport {
        positive: dim_ok && cells_ok,
        dimension: Some(dimension),
        cell_exponent,
        max_density_ratio,
        scales,
        max_cell_mass: masses,
        quantile_cell_mass: typical,
        reason,
    })
}

/// Whether some cloud point `c` has every cell of side `resolution` inside
/// the cube of half-side `eps` around it occupied: a discrete witness that
/// the support contains a neighbourhood of `c`. Returns the first such
/// point index.
pub fn interior_proxy(measure: &EmpiricalMeasure, eps: f64, resolution: f64) -> Option<usize> {
    if !(eps > 0.0 && resolution > 0.0) || measure.is_empty() {
        return None;
    }
    let dim = measure.dim();
    let cell = |p: &[f64]| -> Vec<i64> { p.iter().map(|x| (x / resolution).floor() as i64).collect() };
    let occupied: std::collections::HashSet<Vec<i64>> = measure.iter_points().map(cell).collect();
    let reach = (eps / resolution).floor() as i64;
    let span = (2 * reach + 1) as usize;
    let total = span.pow(dim as u32);
    (0..measure.len()).find(|&i| {
        let home = cell(measure.point(i));
        (0..total).all(|mut code| {
            let probe: Vec<i64> = home
                .iter()
                .map(|h| {
                    let o = (code % span) as i64 - reach;
                    code /= span;
                    h + o
                })
                .collect();
            occupied.contains(&probe)
        })
    })
}
