//! Box counting: dyadic cells for Euclidean clouds, greedy r-nets for the
//! Korányi gauge.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{slope_estimate, DimensionEstimate, EstimatorMethod, RadiusGrid};
use crate::error::Result;
use crate::heisenberg::koranyi_key;
use crate::measure::EmpiricalMeasure;
use crate::metric::MetricTag;
use crate::par::{map_indexed, Execution};
use crate::symplectic::omega;

/// Counts only net centers inside the ball B(center, radius); the net is
/// still built from the whole cloud, so the window edge sees no boundary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetWindow {
    pub center: Vec<f64>,
    pub radius: f64,
}

/// Cover used for Korányi clouds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KoranyiCover {
    /// Greedy maximal r-separated subsets.
    #[default]
    GreedyNet,
    /// Left translates γ * δ_r([0,1)^{2n+1}) by the grid γ = (r a, r² c).
    HeisenbergBoxes,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxCountOptions {
    /// Radii with fewer occupied boxes are not fitted.
    pub min_boxes: usize,
    /// Radii whose count exceeds this fraction of the (windowed) point count
    /// are not fitted.
    pub max_occupancy: f64,
    pub window: Option<NetWindow>,
    pub koranyi_cover: KoranyiCover,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for BoxCountOptions {
    fn default() -> Self {
        Self {
            min_boxes: 4,
            max_occupancy: 0.05,
            window: None,
            koranyi_cover: KoranyiCover::GreedyNet,
            execution: Execution::default(),
        }
    }
}

/// N(r) for each radius of the grid.
pub fn box_counts(
    points: &EmpiricalMeasure,
    metric: MetricTag,
    grid: &RadiusGrid,
    opts: &BoxCountOptions,
) -> Result<Vec<usize>> {
    metric.check_dim(points.dim())?;
    let radii = grid.radii();
    Ok(map_indexed(opts.execution, radii.len(), |k| match metric {
        MetricTag::Euclidean { .. } => dyadic_count(points, radii[k], opts.window.as_ref()),
        MetricTag::Koranyi { .. } => match opts.koranyi_cover {
            KoranyiCover::GreedyNet => greedy_net(points, radii[k], opts.window.as_ref()),
            KoranyiCover::HeisenbergBoxes => heisenberg_boxes(points, radii[k], opts.window.as_ref()),
        },
    }))
}

fn in_window(metric: MetricTag, p: &[f64], window: Option<&NetWindow>) -> bool {
    window.is_none_or(|w| metric.distance(p, &w.center) <= w.radius)
}

/// Occupied cells ⌊x / r⌋ of the cube lattice anchored at the origin; with
/// a window, only cells whose lower corner lies in it.
fn dyadic_count(points: &EmpiricalMeasure, r: f64, window: Option<&NetWindow>) -> usize {
    let metric = points.metric();
    let cells: HashSet<Vec<i64>> = points
        .iter_points()
        .map(|p| p.iter().map(|x| (x / r).floor() as i64).collect())
        .collect();
    cells
        .iter()
        .filter(|c| {
            let corner: Vec<f64> = c.iter().map(|&k| k as f64 * r).collect();
            in_window(metric, &corner, window)
        })
        .count()
}

/// Occupied Heisenberg boxes γ * δ_r(K), K the unit cube, γ = (r a, r² c)
/// with a ∈ ℤ^{2n}, c ∈ ℤ; with a window, only boxes whose γ lies in it.
fn heisenberg_boxes(points: &EmpiricalMeasure, r: f64, window: Option<&NetWindow>) -> usize {
    let metric = points.metric();
    let zdim = points.dim() - 1;
    let cells: HashSet<Vec<i64>> = points
        .iter_points()
        .map(|p| {
            let scaled: Vec<f64> = p[..zdim].iter().map(|x| x / r).collect();
            let mut key: Vec<i64> = scaled.iter().map(|x| x.floor() as i64).collect();
            let a: Vec<f64> = key.iter().map(|&k| k as f64).collect();
            // t-coordinate of δ_{1/r}(γ⁻¹ p) before removing c
            let s = p[zdim] / (r * r) + 0.5 * omega(&a, &scaled);
            key.push(s.floor() as i64);
            key
        })
        .collect();
    cells
        .iter()
        .filter(|c| {
            let mut anchor: Vec<f64> = c[..zdim].iter().map(|&k| k as f64 * r).collect();
            anchor.push(c[zdim] as f64 * r * r);
            in_window(metric, &anchor, window)
        })
        .count()
}

/// Size of the greedy maximal r-separated subset, scanning points in index
/// order; a spatial hash restricts the search to neighbouring cells.
fn greedy_net(points: &EmpiricalMeasure, r: f64, window: Option<&NetWindow>) -> usize {
    let dim = points.dim();
    let zdim = dim - 1;
    let rz = points
        .iter_points()
        .map(|p| p[..zdim].iter().map(|x| x * x).sum::<f64>())
        .fold(0.0, f64::max)
        .sqrt();
    // |t_p − t_c| ≤ r²/4 + |z_c| r / 2 whenever d(p, c) ≤ r.
    let ht = r * r / 4.0 + rz * r / 2.0;
    let cell = |p: &[f64]| -> Vec<i64> {
        let mut c: Vec<i64> = p[..zdim].iter().map(|x| (x / r).floor() as i64).collect();
        c.push((p[zdim] / ht).floor() as i64);
        c
    };
    let key_r = (r * r) * (r * r);
    let offsets = neighbour_offsets(dim);
    let mut table: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    let mut count = 0;
    let metric = points.metric();
    let mut probe = vec![0i64; dim];
    for (i, p) in points.iter_points().enumerate() {
        let home = cell(p);
        let covered = offsets.iter().any(|off| {
            for k in 0..dim {
                probe[k] = home[k] + off[k];
            }
            table
                .get(&probe)
                .is_some_and(|cs| cs.iter().any(|&c| koranyi_key(p, points.point(c)) <= key_r))
        });
        if !covered {
            table.entry(home).or_default().push(i);
            if in_window(metric, p, window) {
                count += 1;
            }
        }
    }
    count
}

fn neighbour_offsets(dim: usize) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|v| {
                (-1..=1).map(move |o| {
                    let mut w = v.clone();
                    w.push(o);
                    w
                })
            })
            .collect();
    }
    out
}

pub fn box_dimension(points: &EmpiricalMeasure, metric: MetricTag, grid: &RadiusGrid) -> Result<DimensionEstimate> {
    box_dimension_with(points, metric, grid, &BoxCountOptions::default())
}

/// Slope of log N(r) against log(1/r) over the radii that are neither
/// nearly empty nor saturated.
pub fn box_dimension_with(
    points: &EmpiricalMeasure,
    metric: MetricTag,
    grid: &RadiusGrid,
    opts: &BoxCountOptions,
) -> Result<DimensionEstimate> {
    let counts = box_counts(points, metric, grid, opts)?;
    let inside = match &opts.window {
        Some(w) => points.iter_points().filter(|p| in_window(metric, p, Some(w))).count(),
        None => points.len(),
    };
    let cap = opts.max_occupancy * inside as f64;
    let keep: Vec<usize> = (0..counts.len())
        .filter(|&k| counts[k] >= opts.min_boxes && counts[k] as f64 <= cap)
        .collect();
    let radii = grid.radii();
    let xs: Vec<f64> = radii.iter().map(|r| -r.ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|&c| (c.max(1) as f64).ln()).collect();
    let method = match metric {
        MetricTag::Euclidean { .. } => EstimatorMethod::BoxCount,
        MetricTag::Koranyi { .. } => EstimatorMethod::GreedyNet,
    };
    slope_estimate(method, radii, &xs, &ys, &keep, inside)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use rand::Rng;

    #[test]
    fn unit_square_counts_are_powers_of_four() {
        let mut rng = RngStream::new(13, 0);
        let pts: Vec<f64> = (0..200_000).map(|_| rng.random::<f64>()).collect();
        let mu = EmpiricalMeasure::euclidean(2, pts).unwrap();
        let grid = RadiusGrid::dyadic(1.0, 9).unwrap();
        let counts = box_counts(&mu, mu.metric(), &grid, &BoxCountOptions::default()).unwrap();
        assert_eq!(counts[9], 1);
        assert_eq!(counts[6], 64);
        let est = box_dimension(&mu, mu.metric(), &grid).unwrap();
        assert!((est.value - 2.0).abs() < 0.1, "{est:?}");
    }

    #[test]
    fn greedy_net_is_separated_and_covering() {
        let mut rng = RngStream::new(14, 0);
        let pts: Vec<f64> = (0..3000).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mu = EmpiricalMeasure::uniform(3, pts, MetricTag::Koranyi { n: 1 }).unwrap();
        let r = 0.3;
        // brute-force greedy net as the oracle
        let mut centers: Vec<usize> = Vec::new();
        for i in 0..mu.len() {
            if !centers.iter().any(|&c| mu.metric().distance(mu.point(i), mu.point(c)) <= r) {
                centers.push(i);
            }
        }
        assert_eq!(greedy_net(&mu, r, None), centers.len());
    }
}
