//! Distances used by the estimators.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heisenberg::{koranyi_distance_slice, koranyi_key};

/// Which distance a point cloud is measured with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum MetricTag {
    /// Euclidean distance on ℝ^dim.
    Euclidean { dim: usize },
    /// Korányi distance on ℍ^n, points stored as `(z_1..z_{2n}, t)`.
    Koranyi { n: usize },
}

impl MetricTag {
    /// Number of coordinates of a point under this metric.
    pub fn point_dim(&self) -> usize {
        match *self {
            MetricTag::Euclidean { dim } => dim,
            MetricTag::Koranyi { n } => 2 * n + 1,
        }
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        if self.point_dim() != dim || dim == 0 {
            return Err(Error::Argument(format!(
                "metric {self:?} does not apply to {dim}-coordinate points"
            )));
        }
        Ok(())
    }

    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            MetricTag::Euclidean { .. } => Euclidean.dist(a, b),
            MetricTag::Koranyi { .. } => Koranyi.dist(a, b),
        }
    }
}

/// Monomorphized distance kernel for the pairwise loops.
pub(crate) trait Distance: Copy + Send + Sync {
    fn dist(&self, a: &[f64], b: &[f64]) -> f64;

    /// Increasing function of the distance that skips the final roots.
    fn key(&self, a: &[f64], b: &[f64]) -> f64;

    /// The key of a point at distance `r`.
    fn radius_key(&self, r: f64) -> f64;

    /// Distance raised to `p`; Euclidean avoids one square root.
    #[inline]
    fn dist_pow(&self, a: &[f64], b: &[f64], p: f64) -> f64 {
        self.dist(a, b).powf(p)
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Euclidean;

#[derive(Clone, Copy, Debug)]
pub(crate) struct Koranyi;

#[inline]
pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl Distance for Euclidean {
    #[inline]
    fn dist(&self, a: &[f64], b: &[f64]) -> f64 {
        squared_distance(a, b).sqrt()
    }

    #[inline]
    fn key(&self, a: &[f64], b: &[f64]) -> f64 {
        squared_distance(a, b)
    }

    #[inline]
    fn radius_key(&self, r: f64) -> f64 {
        r * r
    }

    #[inline]
    fn dist_pow(&self, a: &[f64], b: &[f64], p: f64) -> f64 {
        let d2 = squared_distance(a, b);
        if p == -1.0 {
            1.0 / d2.sqrt()
        } else if p == -0.5 {
            1.0 / d2.sqrt().sqrt()
        } else {
            d2.powf(p / 2.0)
        }
    }
}

impl Distance for Koranyi {
    #[inline]
    fn dist(&self, a: &[f64], b: &[f64]) -> f64 {
        koranyi_distance_slice(a, b)
    }

    #[inline]
    fn key(&self, a: &[f64], b: &[f64]) -> f64 {
        koranyi_key(a, b)
    }

    #[inline]
    fn radius_key(&self, r: f64) -> f64 {
        (r * r) * (r * r)
    }
}

/// Calls `$body` with `$d` bound to the kernel matching `$tag`.
macro_rules! with_distance {
    ($tag:expr, |$d:ident| $body:expr) => {
        match $tag {
            $crate::metric::MetricTag::Euclidean { .. } => {
                let $d = $crate::metric::Euclidean;
                $body
            }
            $crate::metric::MetricTag::Koranyi { .. } => {
                let $d = $crate::metric::Koranyi;
                $body
            }
        }
    };
}
pub(crate) use with_distance;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_check_dimensions() {
        assert!(MetricTag::Koranyi { n: 1 }.check_dim(3).is_ok());
        assert!(MetricTag::Koranyi { n: 1 }.check_dim(2).is_err());
        assert!(MetricTag::Euclidean { dim: 4 }.check_dim(4).is_ok());
    }

    #[test]
    fn euclidean_powers() {
        let a = [0.0, 0.0];
        let b = [3.0, 4.0];
        assert_eq!(Euclidean.dist(&a, &b), 5.0);
        assert_eq!(Euclidean.dist_pow(&a, &b, -1.0), 0.2);
        assert!((Euclidean.dist_pow(&a, &b, -0.5) - 5f64.powf(-0.5)).abs() < 1e-15);
        assert!((Euclidean.dist_pow(&a, &b, -1.7) - 5f64.powf(-1.7)).abs() < 1e-15);
    }
}
