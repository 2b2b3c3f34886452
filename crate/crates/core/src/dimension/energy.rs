//! Riesz s-energies I_s(μ) = ∬ d(x, y)^{−s} dμ(y) dμ(x) of point clouds.

use serde::{Deserialize, Serialize};

use super::{DEFAULT_MAX_POINTS, ROW_CHUNK};
use crate::error::{Error, Result};
use crate::measure::EmpiricalMeasure;
use crate::metric::{with_distance, Distance, MetricTag};
use crate::par::{compensated_sum, map_chunks, CompensatedSum, Execution};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyOptions {
    /// Strided subsample size (`None`: every pair).
    pub max_points: Option<usize>,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for EnergyOptions {
    fn default() -> Self {
        Self {
            max_points: Some(DEFAULT_MAX_POINTS),
            execution: Execution::default(),
        }
    }
}

impl EnergyOptions {
    pub fn all_pairs() -> Self {
        Self {
            max_points: None,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    /// Σ_{i≠j} wᵢ wⱼ d(xᵢ, xⱼ)^{−s} over non-coincident pairs.
    pub value: f64,
    /// `value` rescaled by M² / (M² − Σ wᵢ²), M the total mass; unbiased
    /// for I_s(μ) when the points are independent draws from μ/M.
    pub unbiased: f64,
    /// Ordered pairs at distance zero, left out of the sums.
    pub coincident_pairs: u64,
    /// Ordered pairs that entered the sums.
    pub pairs: u64,
    pub points: usize,
}

fn check_exponent(s: f64) -> Result<()> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::Argument(format!("energy exponent must be > 0, got {s}")));
    }
    Ok(())
}

pub fn riesz_energy(measure: &EmpiricalMeasure, s: f64, metric: MetricTag) -> Result<EnergyReport> {
    riesz_energy_with(measure, s, metric, &EnergyOptions::default())
}

/// Distinct-pair energy sum.
pub fn riesz_energy_with(
    measure: &EmpiricalMeasure,
    s: f64,
    metric: MetricTag,
    opts: &EnergyOptions,
) -> Result<EnergyReport> {
    check_exponent(s)?;
    metric.check_dim(measure.dim())?;
    if measure.len() < 2 {
        return Err(Error::Argument("energy needs at least two points".into()));
    }
    let cloud = match opts.max_points {
        Some(k) => measure.subsample(k),
        None => measure.clone(),
    };
    let (half, coincident, pairs) = match metric {
        MetricTag::Euclidean { dim: 1 } => euclidean_self_sum::<1>(&cloud, s, opts.execution),
        MetricTag::Euclidean { dim: 2 } => euclidean_self_sum::<2>(&cloud, s, opts.execution),
        MetricTag::Euclidean { dim: 3 } => euclidean_self_sum::<3>(&cloud, s, opts.execution),
        MetricTag::Euclidean { dim: 4 } => euclidean_self_sum::<4>(&cloud, s, opts.execution),
        _ => with_distance!(metric, |d| self_sum(&cloud, d, s, opts.execution)),
    };
    if pairs == 0 {
        return Err(Error::DegenerateMeasure("all pairs of points coincide".into()));
    }
    let value = 2.0 * half;
    let mass = cloud.total_mass();
    let squares = compensated_sum(cloud.weights().iter().map(|w| w * w));
    let unbiased = value * mass * mass / (mass * mass - squares);
    Ok(EnergyReport {
        value,
        unbiased,
        coincident_pairs: 2 * coincident,
        pairs: 2 * pairs,
        points: cloud.len(),
    })
}

fn self_sum<D: Distance>(cloud: &EmpiricalMeasure, d: D, s: f64, exec: Execution) -> (f64, u64, u64) {
    let n = cloud.len();
    let w = cloud.weights();
    let tiles = map_chunks(exec, n, ROW_CHUNK, |_, rows| {
        let mut acc = CompensatedSum::new();
        let (mut zero, mut used) = (0u64, 0u64);
        for i in rows {
            let a = cloud.point(i);
            let mut row = 0.0;
            for j in i + 1..n {
                let b = cloud.point(j);
                if d.key(a, b) == 0.0 {
                    zero += 1;
                } else {
                    row += w[j] * d.dist_pow(a, b, -s);
                    used += 1;
                }
            }
            acc.add(w[i] * row);
        }
        (acc.value(), zero, used)
    });
    fold_tiles(tiles)
}

/// d^{−s} from the squared distance, with the common exponents spelled out;
/// in one dimension `d2` is passed as |x − y| itself and `linear` is set.
#[inline(always)]
fn inverse_power(d2: f64, s: f64, linear: bool) -> f64 {
    if linear {
        return if s == 0.5 {
            1.0 / d2.sqrt()
        } else if s == 1.0 {
            1.0 / d2
        } else {
            d2.powf(-s)
        };
    }
    if s == 0.5 {
        1.0 / d2.sqrt().sqrt()
    } else if s == 1.0 {
        1.0 / d2.sqrt()
    } else {
        d2.powf(-0.5 * s)
    }
}

const LANES: usize = 4;

/// |a − b| in one dimension, |a − b|² otherwise.
#[inline(always)]
fn gap<const D: usize>(a: &[f64; D], b: &[f64; D]) -> f64 {
    if D == 1 {
        return (a[0] - b[0]).abs();
    }
    let mut d2 = 0.0;
    for k in 0..D {
        let t = a[k] - b[k];
        d2 += t * t;
    }
    d2
}

/// `self_sum` for small fixed Euclidean dimensions: fixed-width points and
/// four independent partial sums per row so the inner loop vectorizes.
/// The summation order depends only on the input, never on scheduling.
fn euclidean_self_sum<const D: usize>(cloud: &EmpiricalMeasure, s: f64, exec: Execution) -> (f64, u64, u64) {
    let pts: Vec<[f64; D]> = cloud
        .iter_points()
        .map(|p| std::array::from_fn(|k| p[k]))
        .collect();
    let w = cloud.weights();
    let n = pts.len();
    let tiles = map_chunks(exec, n, ROW_CHUNK, |_, rows| {
        let mut acc = CompensatedSum::new();
        let mut zero = 0u64;
        for i in rows {
            let a = pts[i];
            let mut lanes = [0.0f64; LANES];
            let rest = &pts[i + 1..];
            let wr = &w[i + 1..];
            let full = rest.len() / LANES * LANES;
            for (block, wb) in rest[..full].chunks_exact(LANES).zip(wr[..full].chunks_exact(LANES)) {
                for l in 0..LANES {
                    let d2 = gap(&a, &block[l]);
                    zero += (d2 == 0.0) as u64;
                    let v = wb[l] * inverse_power(d2, s, D == 1);
                    lanes[l] += if d2 > 0.0 { v } else { 0.0 };
                }
            }
            let mut row = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
            for (b, wj) in rest[full..].iter().zip(&wr[full..]) {
                let d2 = gap(&a, b);
                if d2 == 0.0 {
                    zero += 1;
                } else {
                    row += wj * inverse_power(d2, s, D == 1);
                }
            }
            acc.add(w[i] * row);
        }
        (acc.value(), zero, 0)
    });
    let (v, zero, _) = fold_tiles(tiles);
    let all = (n as u64) * (n as u64 - 1) / 2;
    (v, zero, all - zero)
}

fn fold_tiles(tiles: Vec<(f64, u64, u64)>) -> (f64, u64, u64) {
    let mut acc = CompensatedSum::new();
    let (mut zero, mut used) = (0, 0);
    for (v, z, u) in tiles {
        acc.add(v);
        zero += z;
        used += u;
    }
    (acc.value(), zero, used)
}

pub fn mutual_energy(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, s: f64, metric: MetricTag) -> Result<EnergyReport> {
    mutual_energy_with(mu, nu, s, metric, &EnergyOptions::default())
}

/// Full cross double sum Σᵢ Σⱼ wᵢ vⱼ d(xᵢ, yⱼ)^{−s}; coincident cross pairs
/// are left out and counted.
pub fn mutual_energy_with(
    mu: &EmpiricalMeasure,
    nu: &EmpiricalMeasure,
    s: f64,
    metric: MetricTag,
    opts: &EnergyOptions,
) -> Result<EnergyReport> {
    check_exponent(s)?;
    metric.check_dim(mu.dim())?;
    metric.check_dim(nu.dim())?;
    let (a, b) = match opts.max_points {
        Some(k) => (mu.subsample(k), nu.subsample(k)),
        None => (mu.clone(), nu.clone()),
    };
    let (value, coincident, pairs) =
        with_distance!(metric, |d| cross_sum(&a, &b, d, s, opts.execution));
    Ok(EnergyReport {
        value,
        unbiased: value,
        coincident_pairs: coincident,
        pairs,
        points: a.len() + b.len(),
    })
}

fn cross_sum<D: Distance>(
    mu: &EmpiricalMeasure,
    nu: &EmpiricalMeasure,
    d: D,
    s: f64,
    exec: Execution,
) -> (f64, u64, u64) {
    let wn = nu.weights();
    let tiles = map_chunks(exec, mu.len(), ROW_CHUNK, |_, rows| {
        let mut acc = CompensatedSum::new();
        let (mut zero, mut used) = (0u64, 0u64);
        for i in rows {
            let a = mu.point(i);
            let mut row = 0.0;
            for (j, b) in nu.iter_points().enumerate() {
                if d.key(a, b) == 0.0 {
                    zero += 1;
                } else {
                    row += wn[j] * d.dist_pow(a, b, -s);
                    used += 1;
                }
            }
            acc.add(mu.weights()[i] * row);
        }
        (acc.value(), zero, used)
    });
    fold_tiles(tiles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use rand::Rng;

    #[test]
    fn fixed_dimension_kernel_matches_generic() {
        let mut rng = RngStream::new(31, 0);
        for dim in 1..=4 {
            let mut pts: Vec<f64> = (0..dim * 301).map(|_| rng.random::<f64>()).collect();
            // one duplicated point
            for k in 0..dim {
                pts[dim + k] = pts[k];
            }
            let mu = EmpiricalMeasure::euclidean(dim, pts).unwrap();
            for s in [0.5, 1.0, 0.7] {
                let fast = riesz_energy_with(&mu, s, mu.metric(), &EnergyOptions::all_pairs()).unwrap();
                let (half, zero, used) = self_sum(&mu, crate::metric::Euclidean, s, Execution::Sequential);
                assert!((fast.value / (2.0 * half) - 1.0).abs() < 1e-12, "dim {dim} s {s}");
                assert_eq!(fast.coincident_pairs, 2 * zero);
                assert_eq!(fast.pairs, 2 * used);
            }
        }
    }

    #[test]
    fn two_atoms() {
        let mu = EmpiricalMeasure::euclidean(1, vec![0.0, 1.0]).unwrap();
        let e = riesz_energy(&mu, 1.0, mu.metric()).unwrap();
        assert!((e.value - 0.5).abs() <= 1e-12);
        assert!((e.unbiased - 1.0).abs() <= 1e-12);
        let a = EmpiricalMeasure::euclidean(1, vec![0.0]).unwrap();
        let b = EmpiricalMeasure::euclidean(1, vec![2.0]).unwrap();
        let m = mutual_energy(&a, &b, 1.0, a.metric()).unwrap();
        assert!((m.value - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn coincident_pairs_reported() {
        let mu = EmpiricalMeasure::euclidean(1, vec![0.0, 0.0, 1.0]).unwrap();
        let e = riesz_energy(&mu, 1.0, mu.metric()).unwrap();
        assert_eq!(e.coincident_pairs, 2);
        assert_eq!(e.pairs, 4);
        assert!((e.value - 4.0 / 9.0).abs() < 1e-12);
        let stacked = EmpiricalMeasure::euclidean(1, vec![0.3, 0.3]).unwrap();
        assert!(matches!(
            riesz_energy(&stacked, 1.0, stacked.metric()),
            Err(Error::DegenerateMeasure(_))
        ));
        assert!(riesz_energy(&mu, 0.0, mu.metric()).is_err());
    }

    #[test]
    fn self_mutual_equals_distinct_sum() {
        let mut rng = RngStream::new(11, 0);
        let pts: Vec<f64> = (0..1000).map(|_| rng.random::<f64>()).collect();
        let mu = EmpiricalMeasure::euclidean(2, pts).unwrap();
        let e = riesz_energy(&mu, 0.7, mu.metric()).unwrap();
        let m = mutual_energy(&mu, &mu, 0.7, mu.metric()).unwrap();
        assert!((e.value - m.value).abs() <= 1e-10 * e.value);
        assert!(e.value > 0.0);
    }

    #[test]
    fn energy_scales_exactly() {
        let mut rng = RngStream::new(12, 0);
        let pts: Vec<f64> = (0..400).map(|_| rng.random::<f64>()).collect();
        let mu = EmpiricalMeasure::euclidean(2, pts.clone()).unwrap();
        let big = EmpiricalMeasure::euclidean(2, pts.iter().map(|x| 3.0 * x).collect()).unwrap();
        let s = 1.3;
        let a = riesz_energy(&mu, s, mu.metric()).unwrap().value;
        let b = riesz_energy(&big, s, big.metric()).unwrap().value;
        assert!((b - 3f64.powf(-s) * a).abs() <= 1e-10 * a);
    }
}
