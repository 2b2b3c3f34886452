//! The Heisenberg group ℍ^n = ℝ^{2n} × ℝ with the law
//! `(z, t) * (w, s) = (z + w, t + s − ½ ω(z, w))`, its Korányi gauge,
//! homogeneous dilations, and the horizontal / vertical projections
//! attached to an isotropic subspace.
//!
//! Clouds store a point as the flat row `(z_1, …, z_{2n}, t)`; the slice
//! functions here operate on that layout.

mod ifs;

pub use ifs::{heisenberg_chaos_game, GaugeBall, HeisenbergIfs, HeisenbergMap};

use serde::{Deserialize, Serialize};

use crate::error::{ensure_dim, Error, Result};
use crate::measure::EmpiricalMeasure;
use crate::metric::MetricTag;
use crate::slicing::{slab, Slab};
use crate::symplectic::{omega, IsotropicSubspace, Point2n};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeisenbergPoint {
    z: Vec<f64>,
    t: f64,
}

impl HeisenbergPoint {
    pub fn new(z: Vec<f64>, t: f64) -> Result<Self> {
        if z.is_empty() || z.len() % 2 != 0 {
            return Err(Error::Argument(format!(
                "horizontal part needs positive even length, got {}",
                z.len()
            )));
        }
        if !t.is_finite() || z.iter().any(|x| !x.is_finite()) {
            return Err(Error::Argument("non-finite Heisenberg point".into()));
        }
        Ok(Self { z, t })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            z: vec![0.0; 2 * n],
            t: 0.0,
        }
    }

    /// Reads the flat row `(z, t)`.
    pub fn from_slice(row: &[f64]) -> Result<Self> {
        let (t, z) = row
            .split_last()
            .ok_or_else(|| Error::Argument("empty Heisenberg row".into()))?;
        Self::new(z.to_vec(), *t)
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.z.clone();
        v.push(self.t);
        v
    }

    pub fn n(&self) -> usize {
        self.z.len() / 2
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn t(&self) -> f64 {
        self.t
    }
}

/// `p * q` on flat rows, written into `out`.
#[inline]
pub fn mul_slice(p: &[f64], q: &[f64], out: &mut [f64]) {
    let d = p.len() - 1;
    let w = omega(&p[..d], &q[..d]);
    for i in 0..d {
        out[i] = p[i] + q[i];
    }
    out[d] = p[d] + q[d] - 0.5 * w;
}

#[inline]
pub fn koranyi_norm_slice(p: &[f64]) -> f64 {
    let d = p.len() - 1;
    let z2: f64 = p[..d].iter().map(|x| x * x).sum();
    let t = p[d];
    (z2 * z2 + 16.0 * t * t).sqrt().sqrt()
}

/// d(p, q)⁴, the Korányi distance without the two square roots.
#[inline]
pub(crate) fn koranyi_key(p: &[f64], q: &[f64]) -> f64 {
    let d = p.len() - 1;
    let (pz, qz) = (&p[..d], &q[..d]);
    let z2: f64 = pz.iter().zip(qz).map(|(a, b)| (a - b) * (a - b)).sum();
    let t = p[d] - q[d] + 0.5 * omega(qz, pz);
    z2 * z2 + 16.0 * t * t
}

/// d(p, q) = ‖q⁻¹ * p‖ on flat rows.
#[inline]
pub fn koranyi_distance_slice(p: &[f64], q: &[f64]) -> f64 {
    let d = p.len() - 1;
    let (pz, qz) = (&p[..d], &q[..d]);
    let z2: f64 = pz.iter().zip(qz).map(|(a, b)| (a - b) * (a - b)).sum();
    let t = p[d] - q[d] + 0.5 * omega(qz, pz);
    (z2 * z2 + 16.0 * t * t).sqrt().sqrt()
}

pub fn mul(p: &HeisenbergPoint, q: &HeisenbergPoint) -> Result<HeisenbergPoint> {
    ensure_dim(p.z.len(), q.z.len())?;
    let z = p.z.iter().zip(&q.z).map(|(a, b)| a + b).collect();
    Ok(HeisenbergPoint {
        z,
        t: p.t + q.t - 0.5 * omega(&p.z, &q.z),
    })
}

/// `p⁻¹ = −p`
pub fn inverse(p: &HeisenbergPoint) -> HeisenbergPoint {
    HeisenbergPoint {
        z: p.z.iter().map(|x| -x).collect(),
        t: -p.t,
    }
}

/// (|z|⁴ + 16 t²)^{1/4}
pub fn koranyi_norm(p: &HeisenbergPoint) -> f64 {
    let z2: f64 = p.z.iter().map(|x| x * x).sum();
    (z2 * z2 + 16.0 * p.t * p.t).sqrt().sqrt()
}

/// ‖q⁻¹ * p‖
pub fn koranyi_distance(p: &HeisenbergPoint, q: &HeisenbergPoint) -> Result<f64> {
    Ok(koranyi_norm(&mul(&inverse(q), p)?))
}

/// δ_r(z, t) = (r z, r² t)
pub fn dilate(r: f64, p: &HeisenbergPoint) -> Result<HeisenbergPoint> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Argument(format!("dilation factor must be > 0, got {r}")));
    }
    Ok(HeisenbergPoint {
        z: p.z.iter().map(|x| r * x).collect(),
        t: r * r * p.t,
    })
}

/// π(z, t) = z
pub fn bundle_projection(p: &HeisenbergPoint) -> Point2n {
    Point2n::new(p.z.clone()).expect("validated horizontal part")
}

/// The horizontal subgroup 𝕍 = V × {0} of an isotropic subspace V.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HorizontalSubgroup {
    base: IsotropicSubspace,
}

impl HorizontalSubgroup {
    pub fn new(base: IsotropicSubspace) -> Self {
        Self { base }
    }

    pub fn base(&self) -> &IsotropicSubspace {
        &self.base
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn m(&self) -> usize {
        self.base.m()
    }

    /// Whether `p` lies in 𝕍 up to `tol`.
    pub fn contains(&self, p: &HeisenbergPoint, tol: f64) -> bool {
        let proj = self.base.frame().project_slice(&p.z);
        p.t.abs() <= tol && proj.iter().zip(&p.z).all(|(a, b)| (a - b).abs() <= tol)
    }

    /// Frame coordinates of P_𝕍(p) in V.
    pub fn coordinates(&self, p: &[f64]) -> Vec<f64> {
        self.base.frame().coordinates(&p[..p.len() - 1])
    }
}

/// P_𝕍(p) = (P_V π(p), 0)
pub fn horizontal_projection(v: &HorizontalSubgroup, p: &HeisenbergPoint) -> Result<HeisenbergPoint> {
    ensure_dim(2 * v.n(), p.z.len())?;
    Ok(HeisenbergPoint {
        z: v.base.frame().project_slice(&p.z),
        t: 0.0,
    })
}

/// P_𝕍⊥(p) = p * P_𝕍(p)⁻¹
pub fn vertical_projection(v: &HorizontalSubgroup, p: &HeisenbergPoint) -> Result<HeisenbergPoint> {
    let h = horizontal_projection(v, p)?;
    mul(p, &inverse(&h))
}

/// The part of `cloud` in the horizontal-projection fiber band around the
/// coset 𝕍⊥ * p: points q whose V-coordinates of P_𝕍(q) are within `delta`
/// (per coordinate) of those of P_𝕍(p). Weights are scaled by (2δ)^{−m}.
pub fn vertical_coset_slab(
    cloud: &EmpiricalMeasure,
    v: &HorizontalSubgroup,
    p: &HeisenbergPoint,
    delta: f64,
) -> Result<Slab> {
    let n = v.n();
    if cloud.metric() != (MetricTag::Koranyi { n }) {
        return Err(Error::Argument(format!(
            "vertical coset slab needs a Korányi cloud over ℍ^{n}"
        )));
    }
    ensure_dim(2 * n, p.z.len())?;
    let anchor = v.base.frame().coordinates(&p.z);
    slab(cloud, v.base.frame(), &anchor, delta, 2 * n)
}
