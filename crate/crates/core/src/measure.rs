//! Weighted point clouds standing in for compactly supported measures.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::MetricTag;

/// Finite weighted point cloud; points are stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    dim: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
    metric: MetricTag,
}

impl EmpiricalMeasure {
    pub fn new(dim: usize, points: Vec<f64>, weights: Vec<f64>, metric: MetricTag) -> Result<Self> {
        metric.check_dim(dim)?;
        if points.len() != weights.len() * dim {
            return Err(Error::Argument(format!(
                "{} coordinates do not match {} weights in dimension {dim}",
                points.len(),
                weights.len()
            )));
        }
        if points.iter().any(|x| !x.is_finite()) {
            return Err(Error::Argument("non-finite point coordinates".into()));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::Argument("weights must be finite and ≥ 0".into()));
        }
        Ok(Self {
            dim,
            points,
            weights,
            metric,
        })
    }

    /// Equal weights `1/N`, i.e. a probability measure.
    pub fn uniform(dim: usize, points: Vec<f64>, metric: MetricTag) -> Result<Self> {
        let count = if dim == 0 { 0 } else { points.len() / dim };
        let w = if count == 0 { 0.0 } else { 1.0 / count as f64 };
        Self::new(dim, points, vec![w; count], metric)
    }

    pub fn euclidean(dim: usize, points: Vec<f64>) -> Result<Self> {
        Self::uniform(dim, points, MetricTag::Euclidean { dim })
    }

    /// A measure with no points (e.g. an empty slab).
    pub fn empty(metric: MetricTag) -> Self {
        Self {
            dim: metric.point_dim(),
            points: Vec::new(),
            weights: Vec::new(),
            metric,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn metric(&self) -> MetricTag {
        self.metric
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter_points(&self) -> std::slice::ChunksExact<'_, f64> {
        self.points.chunks_exact(self.dim)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_mass(&self) -> f64 {
        crate::par::compensated_sum(self.weights.iter().copied())
    }

    pub fn with_metric(mut self, metric: MetricTag) -> Result<Self> {
        metric.check_dim(self.dim)?;
        self.metric = metric;
        Ok(self)
    }

    /// Multiplies every weight by `factor`.
    pub fn scaled(mut self, factor: f64) -> Self {
        self.weights.iter_mut().for_each(|w| *w *= factor);
        self
    }

    /// Sub-cloud of the given indices, weights unchanged.
    pub fn select(&self, indices: &[usize]) -> Self {
        let mut points = Vec::with_capacity(indices.len() * self.dim);
        let mut weights = Vec::with_capacity(indices.len());
        for &i in indices {
            points.extend_from_slice(self.point(i));
            weights.push(self.weights[i]);
        }
        Self {
            dim: self.dim,
            points,
            weights,
            metric: self.metric,
        }
    }

    /// Sub-cloud of the points satisfying `keep`, weights unchanged.
    pub fn filter<F: Fn(&[f64]) -> bool>(&self, keep: F) -> Self {
        let idx: Vec<usize> = (0..self.len()).filter(|&i| keep(self.point(i))).collect();
        self.select(&idx)
    }

    /// Evenly strided subsample of at most `max_points` points, reweighted
    /// so the total mass is unchanged. Returns a clone when already small.
    pub fn subsample(&self, max_points: usize) -> Self {
        let n = self.len();
        if n <= max_points || max_points == 0 {
            return self.clone();
        }
        let idx: Vec<usize> = (0..max_points).map(|k| k * n / max_points).collect();
        let sub = self.select(&idx);
        let kept: f64 = sub.total_mass();
        if kept > 0.0 {
            let factor = self.total_mass() / kept;
            sub.scaled(factor)
        } else {
            sub
        }
    }

    /// Coordinate-wise bounding box `(min, max)`.
    pub fn bounding_box(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        if self.is_empty() {
            return None;
        }
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for p in self.iter_points() {
            for k in 0..self.dim {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        Some((lo, hi))
    }

    /// Upper bound on the diameter in this measure's metric: the distance
    /// across the bounding box for Euclidean clouds, twice the largest
    /// gauge norm about the first point for Korányi clouds.
    pub fn diameter_bound(&self) -> f64 {
        match self.metric {
            MetricTag::Euclidean { .. } => self
                .bounding_box()
                .map(|(lo, hi)| crate::metric::squared_distance(&lo, &hi).sqrt())
                .unwrap_or(0.0),
            MetricTag::Koranyi { .. } => {
                if self.is_empty() {
                    return 0.0;
                }
                let c = self.point(0);
                2.0 * self
                    .iter_points()
                    .map(|p| self.metric.distance(p, c))
                    .fold(0.0, f64::max)
            }
        }
    }

    /// Writes one CSV row per point: coordinates, then weight.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = match self.metric {
            MetricTag::Koranyi { n } => (1..=2 * n)
                .map(|i| format!("z_{i}"))
                .chain(std::iter::once("t".to_string()))
                .collect(),
            MetricTag::Euclidean { dim } => (1..=dim).map(|i| format!("x_{i}")).collect(),
        };
        header.push("weight".into());
        w.write_record(&header)?;
        for (p, wt) in self.iter_points().zip(&self.weights) {
            let row: Vec<String> = p
                .iter()
                .chain(std::iter::once(wt))
                .map(|v| v.to_string())
                .collect();
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }
}

/// Image measure `f_#μ`: same weights at the mapped points.
///
/// The output keeps the input metric when the point dimension is
/// unchanged and is Euclidean otherwise.
pub fn pushforward<F>(measure: &EmpiricalMeasure, map: F) -> Result<EmpiricalMeasure>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let mut points = Vec::new();
    let mut out_dim = None;
    for p in measure.iter_points() {
        let q = map(p);
        match out_dim {
            None => out_dim = Some(q.len()),
            Some(d) if d != q.len() => {
                return Err(Error::Argument("map returned points of varying length".into()))
            }
            _ => {}
        }
        points.extend(q);
    }
    let dim = out_dim.unwrap_or(measure.dim);
    let metric = if dim == measure.dim {
        measure.metric
    } else {
        MetricTag::Euclidean { dim }
    };
    EmpiricalMeasure::new(dim, points, measure.weights.clone(), metric)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud() -> EmpiricalMeasure {
        EmpiricalMeasure::new(
            2,
            vec![0.0, 0.0, 1.0, 2.0, -1.0, 0.5],
            vec![0.2, 0.3, 0.5],
            MetricTag::Euclidean { dim: 2 },
        )
        .unwrap()
    }

    #[test]
    fn validation() {
        let m = MetricTag::Euclidean { dim: 2 };
        assert!(EmpiricalMeasure::new(2, vec![0.0; 3], vec![1.0], m).is_err());
        assert!(EmpiricalMeasure::new(2, vec![0.0; 2], vec![-1.0], m).is_err());
        assert!(EmpiricalMeasure::new(3, vec![0.0; 3], vec![1.0], m).is_err());
    }

    #[test]
    fn pushforward_identity_and_mass() {
        let mu = cloud();
        assert_eq!(pushforward(&mu, |p| p.to_vec()).unwrap(), mu);
        let line = pushforward(&mu, |p| vec![p[0] + p[1]]).unwrap();
        assert_eq!(line.dim(), 1);
        assert_eq!(line.total_mass(), mu.total_mass());
    }

    #[test]
    fn subsample_keeps_mass() {
        let pts: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        let mu = EmpiricalMeasure::euclidean(1, pts).unwrap();
        let s = mu.subsample(64);
        assert_eq!(s.len(), 64);
        assert!((s.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        cloud().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x_1,x_2,weight"));
        assert_eq!(lines.next(), Some("0,0,0.2"));
        assert_eq!(text.lines().count(), 4);
    }
}
