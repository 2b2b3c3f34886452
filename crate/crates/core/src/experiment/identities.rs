//! Randomized check of the exact algebraic identities.

use std::collections::BTreeMap;

use rand::Rng;

use crate::error::Result;
use crate::grassmannian::sample_isotropic_subspace;
use crate::heisenberg::{
    dilate, horizontal_projection, inverse, koranyi_distance, koranyi_norm, mul, vertical_projection,
    HeisenbergPoint, HorizontalSubgroup,
};
use crate::par::{map_chunks, Execution};
use crate::rng::RngStream;
use crate::symplectic::{dot, omega};

const CHUNK: usize = 2048;

fn random_point<R: Rng + ?Sized>(n: usize, rng: &mut R) -> HeisenbergPoint {
    let z = (0..2 * n).map(|_| rng.random_range(-1.0..1.0)).collect();
    HeisenbergPoint::new(z, rng.random_range(-1.0..1.0)).expect("finite point")
}

fn coord_gap(p: &HeisenbergPoint, q: &HeisenbergPoint) -> f64 {
    p.to_vec().iter().zip(q.to_vec()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

fn record(out: &mut BTreeMap<&'static str, f64>, key: &'static str, r: f64) {
    let e = out.entry(key).or_insert(0.0);
    // NaN must surface as a failure, so it wins over any finite value.
    if r.is_nan() || *e < r {
        *e = r;
    }
}

/// Largest residual of each identity over `count` random inputs, with
/// n = 1, 2, 3 cycled over the inputs.
pub fn identity_suite(count: usize, stream: &RngStream) -> Result<BTreeMap<String, f64>> {
    let chunks = map_chunks(Execution::default(), count, CHUNK, |c, range| {
        let mut rng = stream.child(c as u64);
        let mut out = BTreeMap::new();
        for i in range {
            let n = 1 + i % 3;
            let (p, q, g) = (random_point(n, &mut rng), random_point(n, &mut rng), random_point(n, &mut rng));
            let e = HeisenbergPoint::identity(n);
            let r = rng.random_range(0.1..10.0);

            let lhs = mul(&mul(&p, &q)?, &g)?;
            let rhs = mul(&p, &mul(&q, &g)?)?;
            record(&mut out, "group_associativity", coord_gap(&lhs, &rhs));
            record(&mut out, "group_identity", coord_gap(&mul(&p, &e)?, &p).max(coord_gap(&mul(&e, &p)?, &p)));
            let pinv = inverse(&p);
            record(
                &mut out,
                "group_inverse",
                coord_gap(&mul(&p, &pinv)?, &e).max(coord_gap(&mul(&pinv, &p)?, &e)),
            );
            let dpq = dilate(r, &mul(&p, &q)?)?;
            let dp_dq = mul(&dilate(r, &p)?, &dilate(r, &q)?)?;
            record(&mut out, "dilation_automorphism", coord_gap(&dpq, &dp_dq) / (r * r));
            record(
                &mut out,
                "gauge_homogeneity",
                (koranyi_norm(&dilate(r, &p)?) - r * koranyi_norm(&p)).abs() / r,
            );
            record(
                &mut out,
                "gauge_left_invariance",
                (koranyi_distance(&mul(&g, &p)?, &mul(&g, &q)?)? - koranyi_distance(&p, &q)?).abs(),
            );

            let m = 1 + i % n;
            let v = sample_isotropic_subspace(n, m, &mut rng)?;
            let h = HorizontalSubgroup::new(v.clone());
            let split = mul(&vertical_projection(&h, &p)?, &horizontal_projection(&h, &p)?)?;
            record(&mut out, "splitting", coord_gap(&split, &p));
            let hp = horizontal_projection(&h, &p)?;
            record(&mut out, "horizontal_membership", if h.contains(&hp, 1e-12) { 0.0 } else { 1.0 });
            let vp = vertical_projection(&h, &p)?;
            let leak = v
                .frame()
                .vectors()
                .iter()
                .map(|b| dot(b, vp.z()).abs())
                .fold(0.0, f64::max);
            record(&mut out, "vertical_membership", leak);

            let x: Vec<f64> = p.z().to_vec();
            let y: Vec<f64> = q.z().to_vec();
            let w: Vec<f64> = g.z().to_vec();
            let f = v.frame();
            let px = f.project_slice(&x);
            record(
                &mut out,
                "projector_idempotence",
                px.iter().zip(f.project_slice(&px)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max),
            );
            record(
                &mut out,
                "projector_self_adjoint",
                (dot(&px, &y) - dot(&x, &f.project_slice(&y))).abs(),
            );
            record(&mut out, "omega_antisymmetry", (omega(&x, &y) + omega(&y, &x)).abs());
            let (alpha, beta) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let comb: Vec<f64> = x.iter().zip(&y).map(|(a, b)| alpha * a + beta * b).collect();
            record(
                &mut out,
                "omega_bilinearity",
                (omega(&comb, &w) - alpha * omega(&x, &w) - beta * omega(&y, &w)).abs(),
            );
            record(&mut out, "omega_isotropy", {
                let vs = f.vectors();
                let mut worst = 0.0f64;
                for a in vs {
                    for b in vs {
                        worst = worst.max(omega(a, b).abs());
                    }
                }
                worst
            });
        }
        Ok::<_, crate::Error>(out)
    });
    let mut total: BTreeMap<&'static str, f64> = BTreeMap::new();
    for chunk in chunks {
        for (k, v) in chunk? {
            record(&mut total, k, v);
        }
    }
    Ok(total.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn residuals_are_roundoff() {
        let r = identity_suite(3000, &RngStream::new(3, 9)).unwrap();
        assert_eq!(r.len(), 14);
        for (k, v) in &r {
            assert!(*v <= 1e-9, "{k}: {v}");
        }
    }
}
