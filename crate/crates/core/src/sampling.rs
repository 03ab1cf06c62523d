//! Haar rotations, sphere and Grassmannian draws, and a reproducible
//! parallel Monte Carlo driver.
//!
//! Every sample index owns its own ChaCha stream, so results do not depend on
//! how samples are spread over worker threads.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::geometry::{AffineFlat, Rotation, VecN};

/// First stream id of the retry range.
const RETRY_BASE: u64 = 1 << 63;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl SampleStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        SampleStream { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Independent seed for a named sub-computation.
pub fn sub_seed(base: u64, tag: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(base.to_le_bytes());
    h.update(tag.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Haar-distributed element of `O(n)`.
pub fn sample_orthogonal<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<f64> {
    loop {
        let g = gaussian_matrix(rng, n, n);
        let qr = g.qr();
        let r = qr.r();
        if (0..n).any(|i| r[(i, i)].abs() < 1e-12) {
            continue;
        }
        let mut q = qr.q();
        for j in 0..n {
            if r[(j, j)] < 0.0 {
                q.column_mut(j).neg_mut();
            }
        }
        return q;
    }
}

/// Haar-distributed rotation.
pub fn sample_rotation<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Rotation {
    if n == 1 {
        return Rotation::identity(1);
    }
    let mut q = sample_orthogonal(rng, n);
    if q.determinant() < 0.0 {
        q.column_mut(n - 1).neg_mut();
    }
    Rotation::from_matrix_unchecked(q)
}

pub fn sample_sphere<R: Rng + ?Sized>(rng: &mut R, n: usize) -> VecN {
    loop {
        let g = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let ng = g.norm();
        if ng > 1e-12 {
            return g / ng;
        }
    }
}

/// Uniform unit vector of the span of the orthonormal `basis`.
pub fn sample_sphere_in<R: Rng + ?Sized>(rng: &mut R, basis: &[VecN]) -> VecN {
    let w = sample_sphere(rng, basis.len());
    let mut v = VecN::zeros(basis[0].len());
    for (c, b) in w.iter().zip(basis) {
        v.axpy(*c, b, 1.0);
    }
    v
}

/// Uniform `k`-dimensional linear subspace of `R^n`.
pub fn sample_grassmannian<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> AffineFlat {
    assert!(k <= n, "subspace dimension exceeds ambient dimension");
    let q = sample_orthogonal(rng, n);
    AffineFlat::from_frame(&q, k)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_samples: u64,
    pub n_degenerate: u64,
}

impl McEstimate {
    /// A known value without sampling error.
    pub fn exact(value: f64) -> Self {
        McEstimate { mean: value, stderr: 0.0, n_samples: 0, n_degenerate: 0 }
    }

    pub fn variance(&self) -> f64 {
        self.stderr * self.stderr
    }
}

#[derive(Default, Clone, Copy)]
struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn finish(&self, degenerate: u64) -> McEstimate {
        let var = if self.n > 1 { self.m2 / (self.n - 1) as f64 } else { 0.0 };
        McEstimate {
            mean: self.mean,
            stderr: (var / self.n as f64).sqrt(),
            n_samples: self.n,
            n_degenerate: degenerate,
        }
    }
}

/// Means of a vector-valued integrand, one estimate per component.
///
/// Resamplable failures redraw the sample from a reserved stream range; the
/// run aborts if one index exhausts its retries or the total exceeds
/// `degeneracy_cap · n`.
pub fn mc_estimate_vec<F>(n_samples: u64, seed: u64, width: usize, cfg: &Config, integrand: F) -> Result<Vec<McEstimate>>
where
    F: Fn(&mut ChaCha8Rng) -> Result<Vec<f64>> + Sync,
{
    if n_samples < 2 {
        return Err(Error::InvalidInput("at least two samples are required".into()));
    }
    let retries = cfg.max_retries as u64;
    let draw = |i: u64| -> Result<(Vec<f64>, u64)> {
        let mut rng = SampleStream::new(seed, i).rng();
        match integrand(&mut rng) {
            Ok(v) => return Ok((v, 0)),
            Err(e) if e.is_resamplable() => {}
            Err(e) => return Err(e),
        }
        for attempt in 0..retries {
            let mut rng = SampleStream::new(seed, RETRY_BASE.wrapping_add(i * retries + attempt)).rng();
            match integrand(&mut rng) {
                Ok(v) => return Ok((v, attempt + 1)),
                Err(e) if e.is_resamplable() => {}
                Err(e) => return Err(e),
            }
        }
        Err(Error::DegeneracyBudgetExceeded { degenerate: retries + 1, samples: n_samples })
    };
    let results: Vec<Result<(Vec<f64>, u64)>> = (0..n_samples).into_par_iter().map(draw).collect();
    let mut acc = vec![Welford::default(); width];
    let mut degenerate = 0u64;
    for r in results {
        let (vals, d) = r?;
        if vals.len() != width {
            return Err(Error::InvalidInput(format!("integrand returned {} values, expected {width}", vals.len())));
        }
        degenerate += d;
        for (w, v) in acc.iter_mut().zip(vals) {
            w.push(v);
        }
    }
    if degenerate as f64 > cfg.degeneracy_cap * n_samples as f64 {
        return Err(Error::DegeneracyBudgetExceeded { degenerate, samples: n_samples });
    }
    Ok(acc.iter().map(|w| w.finish(degenerate)).collect())
}

/// Scalar version of [`mc_estimate_vec`].
pub fn mc_estimate<F>(n_samples: u64, seed: u64, cfg: &Config, integrand: F) -> Result<McEstimate>
where
    F: Fn(&mut ChaCha8Rng) -> Result<f64> + Sync,
{
    let v = mc_estimate_vec(n_samples, seed, 1, cfg, |rng| integrand(rng).map(|x| vec![x]))?;
    Ok(v[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn so1_is_trivial() {
        let mut rng = SampleStream::new(1, 2).rng();
        assert_eq!(sample_rotation(&mut rng, 1).matrix()[(0, 0)], 1.0);
    }

    #[test]
    fn fixed_stream_is_deterministic() {
        let a = sample_rotation(&mut SampleStream::new(42, 7).rng(), 3);
        let b = sample_rotation(&mut SampleStream::new(42, 7).rng(), 3);
        assert_eq!(a, b);
        let c = sample_rotation(&mut SampleStream::new(42, 8).rng(), 3);
        assert_ne!(a, c);
    }

    #[test]
    fn rotations_are_proper() {
        for i in 0..200 {
            let r = sample_rotation(&mut SampleStream::new(3, i).rng(), 4);
            assert!(r.orthonormality_residual() <= 1e-12);
            assert!((r.matrix().determinant() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn grassmannian_extremes() {
        let mut rng = SampleStream::new(5, 0).rng();
        let full = sample_grassmannian(&mut rng, 3, 3);
        assert_eq!(full.dim(), 3);
        assert!(full.complement().is_empty());
        let zero = sample_grassmannian(&mut rng, 3, 0);
        assert_eq!(zero.complement().len(), 3);
    }

    #[test]
    fn constant_integrand() {
        let e = mc_estimate(100, 1, &Config::default(), |_| Ok(1.0)).unwrap();
        assert_eq!(e.mean, 1.0);
        assert_eq!(e.stderr, 0.0);
    }

    #[test]
    fn always_degenerate_is_an_error() {
        let e = mc_estimate(100, 1, &Config::default(), |_| Err(Error::DegenerateSample("x".into())));
        assert!(matches!(e, Err(Error::DegeneracyBudgetExceeded { .. })));
    }

    #[test]
    fn occasional_degeneracy_is_absorbed() {
        let cfg = Config::default();
        let e = mc_estimate(2000, 9, &cfg, |rng| {
            let u: f64 = rng.random();
            if u < 0.0005 {
                Err(Error::DegenerateSample("rare".into()))
            } else {
                Ok(u)
            }
        })
        .unwrap();
        assert!(e.n_degenerate <= 4);
        assert!((e.mean - 0.5).abs() < 0.03);
    }

    #[test]
    fn sub_seeds_differ_by_tag() {
        assert_ne!(sub_seed(42, "a"), sub_seed(42, "b"));
        assert_eq!(sub_seed(42, "a"), sub_seed(42, "a"));
    }
}
