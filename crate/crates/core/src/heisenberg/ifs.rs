//! Self-similar sets in ℍ^n generated by maps `p ↦ q * δ_r(p)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{koranyi_distance_slice, mul_slice, HeisenbergPoint};
use crate::error::{ensure_dim, Error, Result};
use crate::fractal::{cumulative_probabilities, moran_dimension, pick};
use crate::measure::EmpiricalMeasure;
use crate::metric::MetricTag;

/// `p ↦ translation * δ_ratio(p)`, a similarity of d_ℍ with ratio `ratio`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeisenbergMap {
    pub translation: HeisenbergPoint,
    pub ratio: f64,
}

impl HeisenbergMap {
    pub fn new(translation: HeisenbergPoint, ratio: f64) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::Argument(format!("contraction ratio {ratio} not in (0, 1)")));
        }
        Ok(Self { translation, ratio })
    }

    #[inline]
    pub fn apply_into(&self, p: &[f64], scratch: &mut [f64], out: &mut [f64]) {
        let k = p.len() - 1;
        for i in 0..k {
            scratch[i] = self.ratio * p[i];
        }
        scratch[k] = self.ratio * self.ratio * p[k];
        mul_slice(&self.translation.to_vec(), scratch, out);
    }

    pub fn apply(&self, p: &HeisenbergPoint) -> Result<HeisenbergPoint> {
        ensure_dim(self.translation.n(), p.n())?;
        let row = p.to_vec();
        let mut scratch = vec![0.0; row.len()];
        let mut out = vec![0.0; row.len()];
        self.apply_into(&row, &mut scratch, &mut out);
        HeisenbergPoint::from_slice(&out)
    }
}

/// Closed Korányi ball used as the open-set witness.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugeBall {
    pub center: HeisenbergPoint,
    pub radius: f64,
}

impl GaugeBall {
    pub fn contains(&self, p: &[f64], slack: f64) -> bool {
        koranyi_distance_slice(p, &self.center.to_vec()) <= self.radius + slack
    }
}

/// Heisenberg iterated function system with a gauge-ball witness.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeisenbergIfs {
    maps: Vec<HeisenbergMap>,
    witness: GaugeBall,
}

impl HeisenbergIfs {
    /// Each map sends B(c, R) onto B(f_i(c), r_i R); the system is accepted
    /// when every image ball lies in the witness and the images are
    /// pairwise disjoint. Violations are configuration errors.
    pub fn new(maps: Vec<HeisenbergMap>, witness: GaugeBall) -> Result<Self> {
        if maps.len() < 2 {
            return Err(Error::Config("a Heisenberg IFS needs at least two maps".into()));
        }
        let n = witness.center.n();
        for f in &maps {
            ensure_dim(n, f.translation.n())?;
        }
        if !(witness.radius > 0.0) {
            return Err(Error::Config("witness radius must be > 0".into()));
        }
        let c = witness.center.to_vec();
        let images: Vec<(Vec<f64>, f64)> = maps
            .iter()
            .map(|f| {
                let mut scratch = vec![0.0; c.len()];
                let mut out = vec![0.0; c.len()];
                f.apply_into(&c, &mut scratch, &mut out);
                (out, f.ratio * witness.radius)
            })
            .collect();
        let slack = 1e-12 * (1.0 + witness.radius);
        for (i, (ci, ri)) in images.iter().enumerate() {
            if koranyi_distance_slice(ci, &c) + ri > witness.radius + slack {
                return Err(Error::Config(format!(
                    "map {i} does not send the witness ball into itself"
                )));
            }
        }
        for i in 0..images.len() {
            for j in i + 1..images.len() {
                let d = koranyi_distance_slice(&images[i].0, &images[j].0);
                if d < images[i].1 + images[j].1 - slack {
                    return Err(Error::Config(format!("witness images {i} and {j} overlap")));
                }
            }
        }
        Ok(Self { maps, witness })
    }

    /// Equal-ratio system with translations `(offset_i, 0)`.
    pub fn horizontal(n: usize, ratio: f64, offsets: &[Vec<f64>], witness_radius: f64) -> Result<Self> {
        let maps = offsets
            .iter()
            .map(|z| HeisenbergMap::new(HeisenbergPoint::new(z.clone(), 0.0)?, ratio))
            .collect::<Result<Vec<_>>>()?;
        Self::new(
            maps,
            GaugeBall {
                center: HeisenbergPoint::identity(n),
                radius: witness_radius,
            },
        )
    }

    pub fn maps(&self) -> &[HeisenbergMap] {
        &self.maps
    }

    pub fn witness(&self) -> &GaugeBall {
        &self.witness
    }

    pub fn n(&self) -> usize {
        self.witness.center.n()
    }

    /// Moran root with respect to d_ℍ; log N / log(1/r) for equal ratios.
    pub fn similarity_dimension(&self) -> f64 {
        let ratios: Vec<f64> = self.maps.iter().map(|f| f.ratio).collect();
        moran_dimension(&ratios, (2 * self.n() + 3) as f64)
    }
}

/// Chaos game for a Heisenberg IFS; the returned cloud carries the
/// Korányi metric tag.
pub fn heisenberg_chaos_game<R: Rng + ?Sized>(
    ifs: &HeisenbergIfs,
    count: usize,
    burn_in: usize,
    rng: &mut R,
) -> Result<EmpiricalMeasure> {
    if count == 0 {
        return Err(Error::Argument("chaos game needs count ≥ 1".into()));
    }
    let s = ifs.similarity_dimension();
    let cumulative = cumulative_probabilities(ifs.maps.iter().map(|f| f.ratio.powf(s)));
    let n = ifs.n();
    let d = 2 * n + 1;
    let mut x = ifs.witness.center.to_vec();
    let mut scratch = vec![0.0; d];
    let mut next = vec![0.0; d];
    let mut points = Vec::with_capacity(count * d);
    for k in 0..burn_in + count {
        let i = pick(&cumulative, rng.random::<f64>());
        ifs.maps[i].apply_into(&x, &mut scratch, &mut next);
        std::mem::swap(&mut x, &mut next);
        if k >= burn_in {
            points.extend_from_slice(&x);
        }
    }
    EmpiricalMeasure::uniform(d, points, MetricTag::Koranyi { n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heisenberg::koranyi_distance;
    use crate::rng::RngStream;
    use rand::Rng;

    fn dust() -> HeisenbergIfs {
        HeisenbergIfs::horizontal(1, 1.0 / 3.0, &[vec![0.6, 0.0], vec![0.0, 0.6]], 0.9).unwrap()
    }

    #[test]
    fn maps_contract_by_ratio() {
        let ifs = dust();
        let mut rng = RngStream::new(4, 0);
        for f in ifs.maps() {
            for _ in 0..200 {
                let p = HeisenbergPoint::new(vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)], rng.random_range(-1.0..1.0)).unwrap();
                let q = HeisenbergPoint::new(vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)], rng.random_range(-1.0..1.0)).unwrap();
                let before = koranyi_distance(&p, &q).unwrap();
                let after = koranyi_distance(&f.apply(&p).unwrap(), &f.apply(&q).unwrap()).unwrap();
                assert!((after - f.ratio * before).abs() <= 1e-10 * (1.0 + before));
            }
        }
    }

    #[test]
    fn separation_enforced() {
        assert!(HeisenbergIfs::horizontal(1, 0.5, &[vec![0.1, 0.0], vec![0.0, 0.1]], 1.0).is_err());
        assert!(HeisenbergIfs::horizontal(1, 1.0 / 3.0, &[vec![0.6, 0.0], vec![0.0, 0.6]], 0.5).is_err());
        assert!(matches!(
            HeisenbergIfs::horizontal(1, 0.5, &[vec![0.1, 0.0], vec![0.0, 0.1]], 1.0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn cloud_stays_in_witness() {
        let ifs = dust();
        assert!((ifs.similarity_dimension() - 2f64.ln() / 3f64.ln()).abs() < 1e-12);
        let mu = heisenberg_chaos_game(&ifs, 5000, 100, &mut RngStream::new(5, 0)).unwrap();
        assert_eq!(mu.metric(), MetricTag::Koranyi { n: 1 });
        assert!(mu.iter_points().all(|p| ifs.witness().contains(p, 1e-12)));
        assert!(mu.iter_points().any(|p| p[2].abs() > 1e-3));
    }
}
