//! Slabs around affine slices `V^⊥ + v` and the sliced-mass Riemann sum.
//!
//! A slab is the set of points whose frame coordinates lie in the cube of
//! half-side δ about an anchor; the cube has volume (2δ)^m, which is the
//! normalization applied to the slab weights.

use crate::error::{ensure_dim, Error, Result};
use crate::measure::EmpiricalMeasure;
use crate::par::{map_chunks, Execution};
use crate::symplectic::{Frame, IsotropicSubspace};

const SLAB_CHUNK: usize = 8192;

/// A slab sub-measure with weights already scaled by (2δ)^{−m}.
#[derive(Clone, Debug)]
pub struct Slab {
    pub measure: EmpiricalMeasure,
    pub delta: f64,
    /// Unnormalized mass of the retained points.
    pub raw_mass: f64,
}

impl Slab {
    pub fn is_empty(&self) -> bool {
        self.measure.is_empty()
    }

    /// Normalized slab mass, the estimate of the sliced-measure mass.
    pub fn sliced_mass(&self) -> f64 {
        self.measure.total_mass()
    }
}

/// Points whose first `leading` coordinates project into the δ-cube about
/// `anchor` (frame coordinates).
pub(crate) fn slab(
    cloud: &EmpiricalMeasure,
    frame: &Frame,
    anchor: &[f64],
    delta: f64,
    leading: usize,
) -> Result<Slab> {
    if !(delta > 0.0) {
        return Err(Error::Argument(format!("slab width must be > 0, got {delta}")));
    }
    ensure_dim(frame.ambient(), leading)?;
    ensure_dim(frame.dim(), anchor.len())?;
    let m = frame.dim();
    let chunks = map_chunks(Execution::default(), cloud.len(), SLAB_CHUNK, |_, range| {
        let mut coords = vec![0.0; m];
        range
            .filter(|&i| {
                frame.coordinates_into(&cloud.point(i)[..leading], &mut coords);
                coords.iter().zip(anchor).all(|(c, a)| (c - a).abs() <= delta)
            })
            .collect::<Vec<usize>>()
    });
    let idx: Vec<usize> = chunks.into_iter().flatten().collect();
    let picked = cloud.select(&idx);
    let raw_mass = picked.total_mass();
    Ok(Slab {
        measure: picked.scaled((2.0 * delta).powi(-(m as i32))),
        delta,
        raw_mass,
    })
}

/// Slab of a Euclidean cloud in ℝ^{2n} around `V^⊥ + P_V(anchor)`.
pub fn euclidean_slab(
    cloud: &EmpiricalMeasure,
    v: &IsotropicSubspace,
    anchor: &[f64],
    delta: f64,
) -> Result<Slab> {
    ensure_dim(cloud.dim(), anchor.len())?;
    let coords = v.frame().coordinates(anchor);
    slab(cloud, v.frame(), &coords, delta, cloud.dim())
}

/// Riemann sum Σ_v (2δ)^{−m} μ(slab(v)) h^m over the grid of spacing `h`
/// covering the projected cloud; approximates μ(ℝ^d) when P_V#μ has a
/// density.
pub fn sliced_mass_integral(
    cloud: &EmpiricalMeasure,
    frame: &Frame,
    delta: f64,
    h: f64,
    leading: usize,
) -> Result<f64> {
    if !(delta > 0.0) || !(h > 0.0) {
        return Err(Error::Argument("slab width and grid step must be > 0".into()));
    }
    ensure_dim(frame.ambient(), leading)?;
    if cloud.is_empty() {
        return Ok(0.0);
    }
    let m = frame.dim();
    let mut origin = vec![f64::INFINITY; m];
    let mut coords = vec![0.0; m];
    for p in cloud.iter_points() {
        frame.coordinates_into(&p[..leading], &mut coords);
        for (o, c) in origin.iter_mut().zip(&coords) {
            *o = o.min(*c);
        }
    }
    origin.iter_mut().for_each(|o| *o -= delta);
    // Each point lies in the slabs of every grid node within δ per axis.
    let scale = (h / (2.0 * delta)).powi(m as i32);
    let chunks = map_chunks(Execution::default(), cloud.len(), SLAB_CHUNK, |_, range| {
        let mut coords = vec![0.0; m];
        let mut acc = crate::par::CompensatedSum::new();
        for i in range {
            frame.coordinates_into(&cloud.point(i)[..leading], &mut coords);
            let mut nodes = 1.0;
            for (c, o) in coords.iter().zip(&origin) {
                let hi = ((c + delta - o) / h).floor();
                let lo = ((c - delta - o) / h).ceil();
                nodes *= (hi - lo + 1.0).max(0.0);
            }
            acc.add(cloud.weights()[i] * nodes);
        }
        acc.value()
    });
    Ok(crate::par::compensated_sum(chunks) * scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::IsotropicSubspace;

    fn grid_cloud() -> EmpiricalMeasure {
        let mut pts = Vec::new();
        for i in 0..50 {
            for j in 0..50 {
                pts.extend([i as f64 / 50.0, j as f64 / 50.0]);
            }
        }
        EmpiricalMeasure::euclidean(2, pts).unwrap()
    }

    #[test]
    fn wide_slab_keeps_everything() {
        let cloud = grid_cloud();
        let v = IsotropicSubspace::canonical(1, 1).unwrap();
        let s = euclidean_slab(&cloud, &v, &[0.5, 0.5], 10.0).unwrap();
        assert_eq!(s.measure.len(), cloud.len());
        assert!((s.raw_mass - 1.0).abs() < 1e-12);
        assert!((s.sliced_mass() - 1.0 / 20.0).abs() < 1e-12);
    }

    #[test]
    fn same_fiber_same_slab() {
        let cloud = grid_cloud();
        let v = IsotropicSubspace::canonical(1, 1).unwrap();
        let a = euclidean_slab(&cloud, &v, &[0.31, 0.1], 0.05).unwrap();
        let b = euclidean_slab(&cloud, &v, &[0.31, 0.9], 0.05).unwrap();
        assert_eq!(a.measure, b.measure);
        assert!(euclidean_slab(&cloud, &v, &[0.3, 0.1], 0.0).is_err());
    }

    #[test]
    fn sliced_mass_recovers_total() {
        let cloud = grid_cloud();
        let v = IsotropicSubspace::canonical(1, 1).unwrap();
        let total = sliced_mass_integral(&cloud, v.frame(), 0.04, 0.0137, 2).unwrap();
        assert!((total - 1.0).abs() < 0.05, "{total}");
    }
}
