//! Correlation integral C(r) and the correlation-dimension estimate.

use serde::{Deserialize, Serialize};

use super::{slope_estimate, DimensionEstimate, EstimatorMethod, RadiusGrid, DEFAULT_MAX_POINTS, ROW_CHUNK};
use crate::error::{Error, Result};
use crate::measure::EmpiricalMeasure;
use crate::metric::{with_distance, Distance, MetricTag};
use crate::par::{compensated_sum, map_chunks, CompensatedSum, Execution};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationOptions {
    /// Smallest radii are dropped until C(r) rests on this many pairs.
    pub min_pairs: u64,
    /// Largest radii are dropped until C(r) is at most this fraction.
    pub max_fraction: f64,
    /// Radii outside `[min_radius, max_radius]` are never fitted.
    pub min_radius: f64,
    pub max_radius: f64,
    /// Strided subsample size for the pairwise kernel (`None`: all pairs).
    pub max_points: Option<usize>,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for CorrelationOptions {
    fn default() -> Self {
        Self {
            min_pairs: 100,
            max_fraction: 0.5,
            min_radius: 0.0,
            max_radius: f64::INFINITY,
            max_points: Some(DEFAULT_MAX_POINTS),
            execution: Execution::default(),
        }
    }
}

/// C(r) on a radius grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationIntegral {
    pub radii: Vec<f64>,
    /// Weighted fraction of distinct pairs at distance ≤ r.
    pub fraction: Vec<f64>,
    /// Unweighted number of distinct pairs at distance ≤ r.
    pub pairs: Vec<u64>,
    pub points: usize,
}

/// Computes C(r) for every radius of `grid`.
pub fn correlation_integral(
    measure: &EmpiricalMeasure,
    metric: MetricTag,
    grid: &RadiusGrid,
    opts: &CorrelationOptions,
) -> Result<CorrelationIntegral> {
    metric.check_dim(measure.dim())?;
    if measure.len() < 2 {
        return Err(Error::Estimation("correlation integral needs at least two points".into()));
    }
    if matches!(metric, MetricTag::Euclidean { dim: 1 }) {
        return Ok(sorted_line(measure, grid.radii()));
    }
    let cloud = match opts.max_points {
        Some(k) => measure.subsample(k),
        None => measure.clone(),
    };
    Ok(with_distance!(metric, |d| pairwise(&cloud, d, grid.radii(), opts.execution)))
}

fn pair_mass(weights: &[f64]) -> f64 {
    let total = compensated_sum(weights.iter().copied());
    let squares = compensated_sum(weights.iter().map(|w| w * w));
    0.5 * (total * total - squares)
}

fn pairwise<D: Distance>(cloud: &EmpiricalMeasure, d: D, radii: &[f64], exec: Execution) -> CorrelationIntegral {
    let n = cloud.len();
    let g = radii.len();
    let keys: Vec<f64> = radii.iter().map(|&r| d.radius_key(r)).collect();
    let w = cloud.weights();
    // Bin g collects pairs beyond the largest radius.
    let tiles = map_chunks(exec, n, ROW_CHUNK, |_, rows| {
        let mut mass = vec![CompensatedSum::new(); g + 1];
        let mut count = vec![0u64; g + 1];
        let mut row = vec![0.0; g + 1];
        for i in rows {
            row.iter_mut().for_each(|x| *x = 0.0);
            let a = cloud.point(i);
            for j in i + 1..n {
                let key = d.key(a, cloud.point(j));
                let mut b = g;
                while b > 0 && key <= keys[b - 1] {
                    b -= 1;
                }
                row[b] += w[j];
                count[b] += 1;
            }
            for (m, x) in mass.iter_mut().zip(&row) {
                m.add(w[i] * x);
            }
        }
        (mass, count)
    });
    let mut mass = vec![CompensatedSum::new(); g + 1];
    let mut count = vec![0u64; g + 1];
    for (tm, tc) in tiles {
        for b in 0..=g {
            mass[b].add(tm[b].value());
            count[b] += tc[b];
        }
    }
    let total = pair_mass(w);
    let mut acc = CompensatedSum::new();
    let mut acc_count = 0u64;
    let mut fraction = Vec::with_capacity(g);
    let mut pairs = Vec::with_capacity(g);
    for b in 0..g {
        acc.add(mass[b].value());
        acc_count += count[b];
        fraction.push(if total > 0.0 { acc.value() / total } else { 0.0 });
        pairs.push(acc_count);
    }
    CorrelationIntegral {
        radii: radii.to_vec(),
        fraction,
        pairs,
        points: n,
    }
}

/// Exact pair counts on the line by sorting and two pointers.
fn sorted_line(measure: &EmpiricalMeasure, radii: &[f64]) -> CorrelationIntegral {
    let n = measure.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| measure.point(a)[0].total_cmp(&measure.point(b)[0]));
    let x: Vec<f64> = order.iter().map(|&i| measure.point(i)[0]).collect();
    let w: Vec<f64> = order.iter().map(|&i| measure.weights()[i]).collect();
    // prefix[k] = Σ_{l<k} w_l, compensated.
    let mut prefix = Vec::with_capacity(n + 1);
    let mut acc = CompensatedSum::new();
    prefix.push(0.0);
    for wi in &w {
        acc.add(*wi);
        prefix.push(acc.value());
    }
    let total = pair_mass(&w);
    let mut fraction = Vec::with_capacity(radii.len());
    let mut pairs = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut j = 0usize;
        let mut mass = CompensatedSum::new();
        let mut count = 0u64;
        for i in 0..n {
            j = j.max(i + 1);
            while j < n && x[j] - x[i] <= r {
                j += 1;
            }
            count += (j - i - 1) as u64;
            mass.add(w[i] * (prefix[j] - prefix[i + 1]));
        }
        fraction.push(if total > 0.0 { mass.value() / total } else { 0.0 });
        pairs.push(count);
    }
    CorrelationIntegral {
        radii: radii.to_vec(),
        fraction,
        pairs,
        points: n,
    }
}

/// Correlation dimension with the default trimming rules.
pub fn correlation_dimension(
    measure: &EmpiricalMeasure,
    metric: MetricTag,
    grid: &RadiusGrid,
) -> Result<DimensionEstimate> {
    correlation_dimension_with(measure, metric, grid, &CorrelationOptions::default())
}

/// Slope of log C(r) against log r over the trimmed range.
pub fn correlation_dimension_with(
    measure: &EmpiricalMeasure,
    metric: MetricTag,
    grid: &RadiusGrid,
    opts: &CorrelationOptions,
) -> Result<DimensionEstimate> {
    let c = correlation_integral(measure, metric, grid, opts)?;
    let keep: Vec<usize> = (0..c.radii.len())
        .filter(|&k| {
            c.pairs[k] >= opts.min_pairs
                && c.fraction[k] > 0.0
                && c.fraction[k] <= opts.max_fraction
                && c.radii[k] >= opts.min_radius
                && c.radii[k] <= opts.max_radius
        })
        .collect();
    let xs: Vec<f64> = c.radii.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = c.fraction.iter().map(|f| f.max(f64::MIN_POSITIVE).ln()).collect();
    slope_estimate(EstimatorMethod::Correlation, &c.radii, &xs, &ys, &keep, c.points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use rand::Rng;

    #[test]
    fn line_fast_path_matches_pairwise() {
        let mut rng = RngStream::new(8, 0);
        let pts: Vec<f64> = (0..600).map(|_| rng.random::<f64>()).collect();
        let weights: Vec<f64> = (0..600).map(|_| rng.random::<f64>()).collect();
        let mu = EmpiricalMeasure::new(1, pts, weights, MetricTag::Euclidean { dim: 1 }).unwrap();
        let grid = RadiusGrid::geometric(1e-4, 1.0, 12).unwrap();
        let fast = sorted_line(&mu, grid.radii());
        let slow = pairwise(&mu, crate::metric::Euclidean, grid.radii(), Execution::Sequential);
        assert_eq!(fast.pairs, slow.pairs);
        for (a, b) in fast.fraction.iter().zip(&slow.fraction) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_segment_has_dimension_one() {
        let mut rng = RngStream::new(9, 0);
        let pts: Vec<f64> = (0..20_000).map(|_| rng.random::<f64>()).collect();
        let mu = EmpiricalMeasure::euclidean(1, pts).unwrap();
        let grid = RadiusGrid::geometric(1e-6, 1.0, 25).unwrap();
        let est = correlation_dimension(&mu, mu.metric(), &grid).unwrap();
        assert!((est.value - 1.0).abs() < 0.05, "{est:?}");
    }

    #[test]
    fn atom_is_degenerate() {
        let grid = RadiusGrid::geometric(1e-3, 1.0, 10).unwrap();
        let one = EmpiricalMeasure::euclidean(2, vec![0.5, 0.5]).unwrap();
        assert!(correlation_dimension(&one, one.metric(), &grid).is_err());
        let stacked = EmpiricalMeasure::euclidean(2, [0.5; 200].to_vec()).unwrap();
        assert!(matches!(
            correlation_dimension(&stacked, stacked.metric(), &grid),
            Err(Error::Estimation(_))
        ));
    }

    #[test]
    fn thread_schedule_does_not_change_counts() {
        let mut rng = RngStream::new(10, 0);
        let pts: Vec<f64> = (0..3000).map(|_| rng.random::<f64>()).collect();
        let mu = EmpiricalMeasure::euclidean(3, pts).unwrap();
        let grid = RadiusGrid::geometric(1e-3, 1.5, 16).unwrap();
        let a = pairwise(&mu, crate::metric::Euclidean, grid.radii(), Execution::Sequential);
        let b = pairwise(&mu, crate::metric::Euclidean, grid.radii(), Execution::Parallel);
        assert_eq!(a, b);
    }
}
