//! Linear algebra of ℝ^{2n}: the standard symplectic form, orthonormal
//! frames, isotropy and orthogonal projectors.
//!
//! Coordinates are ordered `(x_1..x_n, y_1..y_n)`; the complex structure
//! pairs `x_i` with `y_i = coords[n + i]`.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_dim, Error, Result};

/// Orthonormality / isotropy tolerance used when none is given.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// A point of ℝ^{2n}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point2n {
    coords: Vec<f64>,
}

impl Point2n {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() || coords.len() % 2 != 0 {
            return Err(Error::Argument(format!(
                "point of ℝ^2n needs a positive even length, got {}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Argument("point has non-finite coordinates".into()));
        }
        Ok(Self { coords })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            coords: vec![0.0; 2 * n],
        }
    }

    /// The canonical basis vector `e_{i+1}` of ℝ^{2n} (zero based `i`).
    pub fn basis(n: usize, i: usize) -> Self {
        let mut coords = vec![0.0; 2 * n];
        coords[i] = 1.0;
        Self { coords }
    }

    pub fn n(&self) -> usize {
        self.coords.len() / 2
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn norm(&self) -> f64 {
        norm(&self.coords)
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.coords
    }
}

impl TryFrom<Vec<f64>> for Point2n {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Point2n::new(v)
    }
}

impl From<Point2n> for Vec<f64> {
    fn from(p: Point2n) -> Self {
        p.coords
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// ω(a, b) = Σ_i a_i b_{n+i} − a_{n+i} b_i on raw coordinate slices of
/// equal even length.
#[inline]
pub fn omega(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len() / 2;
    let (ax, ay) = a.split_at(n);
    let (bx, by) = b.split_at(n);
    let mut s = 0.0;
    for i in 0..n {
        s += ax[i] * by[i] - ay[i] * bx[i];
    }
    s
}

/// The standard symplectic form of ℝ^{2n}.
pub fn symplectic_form(x: &Point2n, y: &Point2n) -> Result<f64> {
    ensure_dim(x.coords.len(), y.coords.len())?;
    Ok(omega(&x.coords, &y.coords))
}

/// An ordered orthonormal family in ℝ^d.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    vectors: Vec<Vec<f64>>,
    ambient: usize,
    tolerance: f64,
}

impl Frame {
    /// Wraps vectors that are already orthonormal, checking the invariant.
    pub fn from_orthonormal(vectors: Vec<Vec<f64>>, tolerance: f64) -> Result<Self> {
        let ambient = vectors
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::Argument("frame needs at least one vector".into()))?;
        for v in &vectors {
            ensure_dim(ambient, v.len())?;
        }
        if vectors.len() > ambient {
            return Err(Error::Argument(format!(
                "{} vectors cannot be orthonormal in dimension {ambient}",
                vectors.len()
            )));
        }
        let frame = Self {
            vectors,
            ambient,
            tolerance,
        };
        let defect = frame.orthonormality_defect();
        if defect > tolerance {
            return Err(Error::Argument(format!(
                "frame not orthonormal: defect {defect:.3e} exceeds {tolerance:.3e}"
            )));
        }
        Ok(frame)
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// max_{i,j} |⟨q_i, q_j⟩ − δ_ij|
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.vectors.iter().enumerate() {
            for (j, b) in self.vectors.iter().enumerate().skip(i) {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot(a, b) - target).abs());
            }
        }
        worst
    }

    /// Coordinates `⟨x, q_i⟩` of the projection of `x` in this frame.
    pub fn coordinates(&self, x: &[f64]) -> Vec<f64> {
        self.vectors.iter().map(|q| dot(x, q)).collect()
    }

    /// Writes the frame coordinates of `x` into `out` (length `dim()`).
    #[inline]
    pub fn coordinates_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, q) in out.iter_mut().zip(&self.vectors) {
            *o = dot(x, q);
        }
    }

    /// Σ_i ⟨x, q_i⟩ q_i
    pub fn project_slice(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ambient];
        for q in &self.vectors {
            let c = dot(x, q);
            for (o, qi) in out.iter_mut().zip(q) {
                *o += c * qi;
            }
        }
        out
    }

    /// Point of the span with the given frame coordinates.
    pub fn embed(&self, coords: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ambient];
        for (c, q) in coords.iter().zip(&self.vectors) {
            for (o, qi) in out.iter_mut().zip(q) {
                *o += c * qi;
            }
        }
        out
    }

    /// Orthonormal frame of the orthogonal complement of the span.
    ///
    /// Completes the frame greedily with canonical basis vectors, always
    /// taking the one with the largest residual (lowest index on ties), so
    /// the result is deterministic.
    pub fn orthogonal_complement(&self) -> Option<Frame> {
        let d = self.ambient;
        let k = self.dim();
        if k == d {
            return None;
        }
        let mut basis: Vec<Vec<f64>> = self.vectors.clone();
        let mut out = Vec::with_capacity(d - k);
        let mut used = vec![false; d];
        for _ in 0..(d - k) {
            let mut best: Option<(usize, Vec<f64>, f64)> = None;
            for (i, taken) in used.iter().enumerate() {
                if *taken {
                    continue;
                }
                let mut e = vec![0.0; d];
                e[i] = 1.0;
                let r = residual(&e, &basis);
                let nr = norm(&r);
                if best.as_ref().is_none_or(|(_, _, b)| nr > *b) {
                    best = Some((i, r, nr));
                }
            }
            let (i, r, nr) = best.expect("complement has remaining dimension");
            used[i] = true;
            let q: Vec<f64> = r.iter().map(|x| x / nr).collect();
            basis.push(q.clone());
            out.push(q);
        }
        Some(Frame {
            vectors: out,
            ambient: d,
            tolerance: self.tolerance,
        })
    }
}

/// `v` minus its projection on the orthonormal `basis`, applied twice.
fn residual(v: &[f64], basis: &[Vec<f64>]) -> Vec<f64> {
    let mut r = v.to_vec();
    for _ in 0..2 {
        for q in basis {
            let c = dot(&r, q);
            for (ri, qi) in r.iter_mut().zip(q) {
                *ri -= c * qi;
            }
        }
    }
    r
}

/// Gram–Schmidt with one re-orthogonalization pass.
///
/// Fails with [`Error::RankDeficient`] when a residual norm drops below
/// `tolerance` times the norm of the input vector (or `tolerance` itself for
/// vectors shorter than one).
pub fn orthonormalize(vectors: &[Vec<f64>], tolerance: f64) -> Result<Frame> {
    let d = vectors
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::Argument("orthonormalize needs at least one vector".into()))?;
    if d == 0 {
        return Err(Error::Argument("zero-dimensional vectors".into()));
    }
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
    for (index, v) in vectors.iter().enumerate() {
        ensure_dim(d, v.len())?;
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Argument(format!("vector {index} is not finite")));
        }
        let r = residual(v, &out);
        let pivot = norm(&r);
        let scale = norm(v).max(1.0);
        if pivot <= tolerance * scale || out.len() == d {
            return Err(Error::RankDeficient {
                index,
                pivot,
                tolerance,
            });
        }
        out.push(r.into_iter().map(|x| x / pivot).collect());
    }
    Frame::from_orthonormal(out, tolerance)
}

/// True iff |ω(q_i, q_j)| ≤ `tolerance` for every pair of frame vectors.
pub fn is_isotropic(frame: &Frame, tolerance: f64) -> bool {
    if frame.ambient % 2 != 0 {
        return false;
    }
    let v = &frame.vectors;
    (0..v.len()).all(|i| (i + 1..v.len()).all(|j| omega(&v[i], &v[j]).abs() <= tolerance))
}

/// Orthogonal projection of `x` onto the span of `frame`.
pub fn project(frame: &Frame, x: &Point2n) -> Result<Point2n> {
    ensure_dim(frame.ambient, x.coords.len())?;
    Ok(Point2n {
        coords: frame.project_slice(&x.coords),
    })
}

/// An m-dimensional isotropic subspace of ℝ^{2n}, 1 ≤ m ≤ n.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsotropicSubspace {
    frame: Frame,
    n: usize,
    m: usize,
}

impl IsotropicSubspace {
    pub fn new(frame: Frame) -> Result<Self> {
        if frame.ambient % 2 != 0 {
            return Err(Error::Argument(format!(
                "ambient dimension {} is odd",
                frame.ambient
            )));
        }
        let n = frame.ambient / 2;
        let m = frame.dim();
        if m > n {
            return Err(Error::Argument(format!(
                "isotropic subspaces of ℝ^{} have dimension at most {n}, got {m}",
                2 * n
            )));
        }
        let tol = frame.tolerance;
        if !is_isotropic(&frame, tol) {
            return Err(Error::Argument("frame is not isotropic".into()));
        }
        Ok(Self { frame, n, m })
    }

    /// span{e_1, …, e_m}
    pub fn canonical(n: usize, m: usize) -> Result<Self> {
        if m == 0 || m > n {
            return Err(Error::Argument(format!("need 1 ≤ m ≤ n, got n={n}, m={m}")));
        }
        let vectors = (0..m).map(|i| Point2n::basis(n, i).into_vec()).collect();
        Self::new(Frame::from_orthonormal(vectors, DEFAULT_TOLERANCE)?)
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn project(&self, x: &Point2n) -> Result<Point2n> {
        project(&self.frame, x)
    }

    pub fn orthogonal_complement(&self) -> Frame {
        orthogonal_complement(self)
    }
}

/// Orthonormal frame of V^⊥, of dimension 2n − m.
pub fn orthogonal_complement(v: &IsotropicSubspace) -> Frame {
    v.frame
        .orthogonal_complement()
        .expect("isotropic subspaces are proper (m ≤ n < 2n)")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn e(n: usize, i: usize) -> Vec<f64> {
        Point2n::basis(n, i).into_vec()
    }

    #[test]
    fn canonical_pair() {
        let x = Point2n::basis(2, 0);
        let y = Point2n::basis(2, 2);
        assert_eq!(symplectic_form(&x, &y).unwrap(), 1.0);
        assert_eq!(symplectic_form(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn hand_evaluated_form() {
        let x = Point2n::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let y = Point2n::new(vec![5.0, 6.0, 7.0, 8.0]).unwrap();
        assert_eq!(symplectic_form(&x, &y).unwrap(), -16.0);
    }

    #[test]
    fn form_rejects_mismatch() {
        let x = Point2n::zeros(1);
        let y = Point2n::zeros(2);
        assert!(matches!(
            symplectic_form(&x, &y),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(Point2n::new(vec![1.0, 2.0, 3.0]).is_err());
        assert!(Point2n::new(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn orthonormalize_examples() {
        let f = orthonormalize(&[e(1, 0), e(1, 1)], DEFAULT_TOLERANCE).unwrap();
        assert_eq!(f.vectors(), &[e(1, 0), e(1, 1)]);

        let f = orthonormalize(&[vec![3.0, 0.0]], DEFAULT_TOLERANCE).unwrap();
        assert_eq!(f.vectors(), &[vec![1.0, 0.0]]);

        let err = orthonormalize(&[e(1, 0), e(1, 0)], DEFAULT_TOLERANCE).unwrap_err();
        assert!(matches!(err, Error::RankDeficient { index: 1, .. }));
    }

    #[test]
    fn isotropy_examples() {
        let line = Frame::from_orthonormal(vec![e(2, 0)], DEFAULT_TOLERANCE).unwrap();
        assert!(is_isotropic(&line, DEFAULT_TOLERANCE));

        let bad = Frame::from_orthonormal(vec![e(2, 0), e(2, 2)], DEFAULT_TOLERANCE).unwrap();
        assert!(!is_isotropic(&bad, DEFAULT_TOLERANCE));
        assert!(IsotropicSubspace::new(bad).is_err());

        for n in 1..5 {
            let lag = IsotropicSubspace::canonical(n, n).unwrap();
            assert!(is_isotropic(lag.frame(), DEFAULT_TOLERANCE));
        }
        assert!(IsotropicSubspace::canonical(2, 3).is_err());
    }

    #[test]
    fn projection_fixed_points_and_kernel() {
        let v = IsotropicSubspace::canonical(2, 2).unwrap();
        let inside = Point2n::new(vec![0.3, -1.2, 0.0, 0.0]).unwrap();
        assert_eq!(v.project(&inside).unwrap(), inside);
        let perp = Point2n::new(vec![0.0, 0.0, 2.0, 5.0]).unwrap();
        assert_eq!(v.project(&perp).unwrap(), Point2n::zeros(2));
    }

    #[test]
    fn complement_small_cases() {
        let v = IsotropicSubspace::canonical(1, 1).unwrap();
        let c = v.orthogonal_complement();
        assert_eq!(c.dim(), 1);
        assert_abs_diff_eq!(c.vectors()[0][1].abs(), 1.0);
        for n in 1..4 {
            for m in 1..=n {
                let c = IsotropicSubspace::canonical(n, m)
                    .unwrap()
                    .orthogonal_complement();
                assert_eq!(c.dim(), 2 * n - m);
            }
        }
    }

    fn vec_strategy(len: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-10.0f64..10.0, len)
    }

    fn rotated_frame(n: usize, m: usize, angles: &[f64]) -> IsotropicSubspace {
        // Rotating each (x_i, y_i) plane is unitary, so it maps the
        // canonical isotropic frame to an isotropic frame.
        let vectors = (0..m)
            .map(|i| {
                let mut v = vec![0.0; 2 * n];
                let a = angles[i % angles.len()];
                v[i] = a.cos();
                v[n + i] = a.sin();
                v
            })
            .collect();
        IsotropicSubspace::new(Frame::from_orthonormal(vectors, DEFAULT_TOLERANCE).unwrap())
            .unwrap()
    }

    proptest! {
        #[test]
        fn omega_antisymmetric_bilinear(
            x in vec_strategy(6), y in vec_strategy(6), z in vec_strategy(6),
            a in -3.0f64..3.0, b in -3.0f64..3.0,
        ) {
            let scale = 1.0 + norm(&x) * norm(&y);
            prop_assert!((omega(&x, &y) + omega(&y, &x)).abs() <= 1e-12 * scale);
            let comb: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
            let lhs = omega(&comb, &z);
            let rhs = a * omega(&x, &z) + b * omega(&y, &z);
            prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs().max(rhs.abs()) + norm(&z) * 100.0));
        }

        #[test]
        fn projector_algebra(
            angles in prop::collection::vec(0.0f64..6.3, 3),
            x in vec_strategy(6), y in vec_strategy(6), m in 1usize..=3,
        ) {
            let v = rotated_frame(3, m, &angles);
            let px = v.frame().project_slice(&x);
            let ppx = v.frame().project_slice(&px);
            for (a, b) in px.iter().zip(&ppx) {
                prop_assert!((a - b).abs() <= 1e-10);
            }
            let py = v.frame().project_slice(&y);
            prop_assert!((dot(&px, &y) - dot(&x, &py)).abs() <= 1e-10 * (1.0 + norm(&x) * norm(&y)));
            let comp = v.orthogonal_complement();
            let qx = comp.project_slice(&x);
            let lhs = dot(&px, &px) + dot(&qx, &qx);
            prop_assert!((lhs - dot(&x, &x)).abs() <= 1e-10 * (1.0 + dot(&x, &x)));
            for i in 0..6 {
                prop_assert!((px[i] + qx[i] - x[i]).abs() <= 1e-10 * (1.0 + norm(&x)));
            }
            prop_assert!(norm(&px) <= norm(&x) * (1.0 + 1e-12));
            for q in comp.vectors() {
                for p in v.frame().vectors() {
                    prop_assert!(dot(p, q).abs() <= 1e-10);
                }
            }
        }

        #[test]
        fn isotropy_survives_rebasing(theta in 0.0f64..6.3, phis in prop::collection::vec(0.0f64..6.3, 2)) {
            let v = rotated_frame(2, 2, &phis);
            let (c, s) = (theta.cos(), theta.sin());
            let q = v.frame().vectors();
            let rebased = vec![
                q[0].iter().zip(&q[1]).map(|(a, b)| c * a - s * b).collect::<Vec<_>>(),
                q[0].iter().zip(&q[1]).map(|(a, b)| s * a + c * b).collect::<Vec<_>>(),
            ];
            let f = Frame::from_orthonormal(rebased, DEFAULT_TOLERANCE).unwrap();
            prop_assert!(is_isotropic(&f, DEFAULT_TOLERANCE));
        }
    }
}
