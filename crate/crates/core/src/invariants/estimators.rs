//! Monte Carlo estimators built on exact Euler characteristics.
//!
//! Every estimator draws from its own seed; callers derive seeds with
//! [`sub_seed`] so that the two sides of an identity never share samples.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{Config, LimitMode};
use crate::error::{Error, Result};
use crate::euler::{
    chi_flat_slice, chi_germ_polytopes, chi_link_section, chi_polytopes_flat, chi_slice_limit, planar_section_mean,
    profile_chi, slice_distance_profile, stabilized_chi_limit, tail_stabilized_chi_limit,
};
use crate::geometry::{AffineFlat, ConicGerm, PolytopeUnion, Rotation, VecN};
use crate::linalg::orthonormal_complement;
use crate::sampling::{
    mc_estimate, mc_estimate_vec, sample_grassmannian, sample_rotation, sample_sphere, sample_sphere_in, sub_seed,
    McEstimate,
};

use super::constants::sigma_to_lambda_loc_matrix;

/// Correlated estimates: means plus a full covariance of the means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorEstimate {
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
    pub n_samples: u64,
    pub n_degenerate: u64,
}

impl VectorEstimate {
    /// Stacks independent scalar estimates.
    pub fn independent(parts: &[McEstimate]) -> Self {
        let m = parts.len();
        let mut cov = vec![vec![0.0; m]; m];
        for (i, p) in parts.iter().enumerate() {
            cov[i][i] = p.variance();
        }
        VectorEstimate {
            mean: parts.iter().map(|p| p.mean).collect(),
            cov,
            n_samples: parts.iter().map(|p| p.n_samples).sum(),
            n_degenerate: parts.iter().map(|p| p.n_degenerate).sum(),
        }
    }

    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    pub fn component(&self, i: usize) -> McEstimate {
        McEstimate {
            mean: self.mean[i],
            stderr: self.cov[i][i].max(0.0).sqrt(),
            n_samples: self.n_samples,
            n_degenerate: self.n_degenerate,
        }
    }

    /// `c + w·mean` with variance `wᵀ C w`.
    pub fn linear(&self, weights: &[f64], constant: f64) -> McEstimate {
        let mean = constant + weights.iter().zip(&self.mean).map(|(w, m)| w * m).sum::<f64>();
        let mut var = 0.0;
        for (i, wi) in weights.iter().enumerate() {
            for (j, wj) in weights.iter().enumerate() {
                var += wi * wj * self.cov[i][j];
            }
        }
        McEstimate { mean, stderr: var.max(0.0).sqrt(), n_samples: self.n_samples, n_degenerate: self.n_degenerate }
    }

    /// `constant + A·mean`, covariance `A C Aᵀ`.
    pub fn transform(&self, a: &[Vec<f64>], constant: &[f64]) -> VectorEstimate {
        let am = DMatrix::from_fn(a.len(), self.len(), |i, j| a[i][j]);
        let c = DMatrix::from_fn(self.len(), self.len(), |i, j| self.cov[i][j]);
        let cov = &am * c * am.transpose();
        VectorEstimate {
            mean: a
                .iter()
                .zip(constant)
                .map(|(row, c0)| c0 + row.iter().zip(&self.mean).map(|(w, m)| w * m).sum::<f64>())
                .collect(),
            cov: (0..a.len()).map(|i| (0..a.len()).map(|j| cov[(i, j)]).collect()).collect(),
            n_samples: self.n_samples,
            n_degenerate: self.n_degenerate,
        }
    }
}

/// `Σ_i w_i a_{p(i)} b_{q(i)}` for independent vectors, first-order variance.
pub fn bilinear(a: &VectorEstimate, b: &VectorEstimate, terms: &[(usize, usize, f64)]) -> McEstimate {
    let mut mean = 0.0;
    let mut ga = vec![0.0; a.len()];
    let mut gb = vec![0.0; b.len()];
    for &(i, j, w) in terms {
        mean += w * a.mean[i] * b.mean[j];
        ga[i] += w * b.mean[j];
        gb[j] += w * a.mean[i];
    }
    let va = a.linear(&ga, 0.0).variance();
    let vb = b.linear(&gb, 0.0).variance();
    McEstimate {
        mean,
        stderr: (va + vb).sqrt(),
        n_samples: a.n_samples + b.n_samples,
        n_degenerate: a.n_degenerate + b.n_degenerate,
    }
}

fn complement_rows(h: &AffineFlat) -> Vec<Vec<f64>> {
    h.complement().iter().map(|c| c.as_slice().to_vec()).collect()
}

/// Limit of `χ(X ∩ (H₀ + δv))` as `δ → 0⁺`.
fn flat_slice_limit(x: &ConicGerm, h0: &AffineFlat, v: &VecN, cfg: &Config) -> Result<i64> {
    match cfg.limit_mode {
        LimitMode::Exact => Ok(chi_flat_slice(x, &h0.translated(v), None, cfg)?.value),
        LimitMode::Ladder => stabilized_chi_limit(
            |d| chi_flat_slice(x, &h0.translated(&(v * d)), Some(1.0), cfg).map(|r| r.value),
            cfg.ladder_rungs,
        ),
    }
}

fn sphere_membership(x: &ConicGerm, v: &VecN) -> f64 {
    if x.contains(v, 1e-12) {
        1.0
    } else {
        0.0
    }
}

/// Slice density `σ_k(X)`, `0 ≤ k ≤ n`.
pub fn sigma_k(x: &ConicGerm, k: usize, n_samples: u64, seed: u64, cfg: &Config) -> Result<McEstimate> {
    let n = x.ambient_dim();
    if k > n {
        return Err(Error::InvalidInput(format!("σ_{k} undefined in dimension {n}")));
    }
    if k == 0 {
        return Ok(McEstimate::exact(1.0));
    }
    if k == n {
        return mc_estimate(n_samples, seed, cfg, |rng| Ok(sphere_membership(x, &sample_sphere(rng, n))));
    }
    mc_estimate(n_samples, seed, cfg, |rng| {
        let h = sample_grassmannian(rng, n, n - k);
        let v = sample_sphere_in(rng, h.complement());
        Ok(flat_slice_limit(x, &h, &v, cfg)? as f64)
    })
}

/// Linear link sum `L_j(X) = E_{H ∈ G_n^j} χ(Lk(X ∩ H))`, with `L_0 = 0` and
/// `L_n = χ(Lk X)`.
pub fn link_sum(x: &ConicGerm, j: usize, n_samples: u64, seed: u64, cfg: &Config) -> Result<McEstimate> {
    let n = x.ambient_dim();
    if j > n {
        return Err(Error::InvalidInput(format!("L_{j} undefined in dimension {n}")));
    }
    // Generic dimension of X ∩ H is d − (n − j); nothing is left at or below 0.
    if j == 0 || x.dim() + j <= n {
        return Ok(McEstimate::exact(0.0));
    }
    if j == n {
        return Ok(McEstimate::exact(chi_link_section(x, &[], None, cfg)?.value as f64));
    }
    mc_estimate(n_samples, seed, cfg, |rng| {
        let h = sample_grassmannian(rng, n, j);
        Ok(chi_link_section(x, &complement_rows(&h), None, cfg)?.value as f64)
    })
}

/// Affine map from link sums `L_0..=L_n` to `Λ^lim_0..=Λ^lim_n`:
/// `Λ_0 = 1 − ½L_n − ½L_{n−1}`, `Λ_k = ½L_{n−k+1} − ½L_{n−k−1}`.
pub fn link_to_lambda(n: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut a = vec![vec![0.0; n + 1]; n + 1];
    let mut c = vec![0.0; n + 1];
    c[0] = 1.0;
    a[0][n] -= 0.5;
    if n >= 1 {
        a[0][n - 1] -= 0.5;
    }
    for k in 1..=n {
        a[k][n - k + 1] += 0.5;
        if n > k {
            a[k][n - k - 1] -= 0.5;
        }
    }
    (a, c)
}

/// `Λ^lim(X)` with its covariance, from the link sums.
pub fn lambda_from_links(links: &[McEstimate]) -> VectorEstimate {
    let n = links.len() - 1;
    let (a, c) = link_to_lambda(n);
    VectorEstimate::independent(links).transform(&a, &c)
}

/// `Θ_d(X)` at the top dimension `d` of `X`.
///
/// Full-dimensional germs use the spherical fraction; otherwise each top cone
/// is sampled in its own span and hits are divided by their multiplicity.
pub fn density(x: &ConicGerm, n_samples: u64, seed: u64, cfg: &Config) -> Result<McEstimate> {
    let n = x.ambient_dim();
    let d = x.dim();
    if d == 0 {
        return Ok(McEstimate::exact(if x.cones().is_empty() { 0.0 } else { 1.0 }));
    }
    if d == n {
        return mc_estimate(n_samples, seed, cfg, |rng| Ok(sphere_membership(x, &sample_sphere(rng, n))));
    }
    let top: Vec<(usize, Vec<VecN>)> = x
        .cones()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.rank() == d)
        .map(|(i, c)| (i, orthonormal_complement(c.complement(), n)))
        .collect();
    mc_estimate(n_samples, seed, cfg, |rng| {
        let mut total = 0.0;
        for (i, basis) in &top {
            let w = sample_sphere_in(rng, basis);
            if !x.cones()[*i].contains(&w, 1e-12) {
                continue;
            }
            let mult = top.iter().filter(|(j, _)| x.cones()[*j].contains(&w, 1e-9)).count();
            total += 1.0 / mult as f64;
        }
        Ok(total)
    })
}

/// Joint slice density `σ(X, Y) = E_{γ,v} lim χ(X ∩ (γY + δv))`.
pub fn sigma_pair(x: &ConicGerm, y: &ConicGerm, n_samples: u64, seed: u64, cfg: &Config) -> Result<McEstimate> {
    let n = x.ambient_dim();
    mc_estimate(n_samples, seed, cfg, |rng| {
        let g = sample_rotation(rng, n);
        let v = sample_sphere(rng, n);
        Ok(chi_slice_limit(x, y, &g, v.as_slice(), cfg)? as f64)
    })
}

/// `σ(X, Y)` through the explicit δ ladder with the unit ball: every rung
/// is evaluated and the finest value is kept once the last two agree.
pub fn sigma_pair_ladder(x: &ConicGerm, y: &ConicGerm, n_samples: u64, seed: u64, cfg: &Config) -> Result<McEstimate> {
    let n = x.ambient_dim();
    mc_estimate(n_samples, seed, cfg, |rng| {
        let g = sample_rotation(rng, n);
        let v = sample_sphere(rng, n);
        let profile = slice_distance_profile(x, y, &g, v.as_slice(), cfg)?;
        Ok(tail_stabilized_chi_limit(|d| profile_chi(&profile, 1.0 / d, cfg), cfg.ladder_rungs)? as f64)
    })
}

/// Joint Euler density `Λ_0(X, Y)`, sampled over `(γ, v, u)`:
/// `lim χ(X ∩ (γY+δv)) − ½χ(Lk(X ∩ γY)) − ½χ(Lk(X ∩ γY ∩ u^⊥))`.
///
/// The second estimate uses weight 1 on the last term.
pub fn lambda0_pair(
    x: &ConicGerm,
    y: &ConicGerm,
    n_samples: u64,
    seed: u64,
    cfg: &Config,
) -> Result<(McEstimate, McEstimate)> {
    let n = x.ambient_dim();
    let de = x.dim() + y.dim();
    let v = mc_estimate_vec(n_samples, seed, 2, cfg, |rng| {
        let g = sample_rotation(rng, n);
        let v = sample_sphere(rng, n);
        let u = sample_sphere(rng, n);
        let s = chi_slice_limit(x, y, &g, v.as_slice(), cfg)? as f64;
        let link = if de > n { chi_link_section(x, &[], Some((y, &g)), cfg)?.value as f64 } else { 0.0 };
        let cut = if de > n + 1 {
            chi_link_section(x, &[u.as_slice().to_vec()], Some((y, &g)), cfg)?.value as f64
        } else {
            0.0
        };
        Ok(vec![s - 0.5 * link - 0.5 * cut, s - 0.5 * link - cut])
    })?;
    Ok((v[0], v[1]))
}

/// `E_u χ(Lk(X ∩ H ∩ u^⊥))`, exact on 2-planes, nested Monte Carlo otherwise.
fn inner_link_mean<R: Rng + ?Sized>(x: &ConicGerm, h: &AffineFlat, rng: &mut R, cfg: &Config) -> Result<f64> {
    if h.dim() == 2 {
        return planar_section_mean(x, h, cfg);
    }
    let n = x.ambient_dim();
    let mut rows = complement_rows(h);
    rows.push(vec![0.0; n]);
    let mut sum = 0.0;
    for _ in 0..cfg.inner_samples {
        let u = sample_sphere(rng, n);
        *rows.last_mut().expect("row") = u.as_slice().to_vec();
        sum += chi_link_section(x, &rows, None, cfg)?.value as f64;
    }
    Ok(sum / cfg.inner_samples as f64)
}

/// `β̄_0(k) = E_{H,v}[lim χ(X ∩ (H+δv)) − ½χ(Lk(X∩H)) − ½E_u χ(Lk(X∩H∩u^⊥))]`
/// over `H ∈ G_n^{n−k}`, `v ∈ S(H^⊥)`, `1 ≤ k ≤ n`.
pub fn beta0_bar(x: &ConicGerm, k: usize, n_samples: u64, seed: u64, cfg: &Config) -> Result<McEstimate> {
    let n = x.ambient_dim();
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!("β̄_0({k}) needs 1 ≤ k ≤ {n}")));
    }
    let d = x.dim();
    mc_estimate(n_samples, seed, cfg, |rng: &mut ChaCha8Rng| {
        let h = sample_grassmannian(rng, n, n - k);
        let v = sample_sphere_in(rng, h.complement());
        let s = flat_slice_limit(x, &h, &v, cfg)? as f64;
        let link = if d > k { chi_link_section(x, &complement_rows(&h), None, cfg)?.value as f64 } else { 0.0 };
        let inner = if d > k + 1 { inner_link_mean(x, &h, rng, cfg)? } else { 0.0 };
        Ok(s - 0.5 * link - 0.5 * inner)
    })
}

/// Pair link sums `M_j = E_{γ, H ∈ G_n^j} χ(Lk(X ∩ γY ∩ H))`, `j = 0..=n`.
pub fn pair_link_sums(x: &ConicGerm, y: &ConicGerm, n_samples: u64, seed: u64, cfg: &Config) -> Result<Vec<McEstimate>> {
    let n = x.ambient_dim();
    let de = x.dim() + y.dim();
    (0..=n)
        .map(|j| {
            if j == 0 || de + j <= 2 * n {
                return Ok(McEstimate::exact(0.0));
            }
            mc_estimate(n_samples, sub_seed(seed, &format!("M/{j}")), cfg, |rng| {
                let g = sample_rotation(rng, n);
                let rows = if j == n { Vec::new() } else { complement_rows(&sample_grassmannian(rng, n, j)) };
                Ok(chi_link_section(x, &rows, Some((y, &g)), cfg)?.value as f64)
            })
        })
        .collect()
}

/// `E_γ χ(X ∩ γP)` for a compact polytope union `P`.
pub fn germ_polytope_mean(x: &ConicGerm, p: &PolytopeUnion, n_samples: u64, seed: u64, cfg: &Config) -> Result<McEstimate> {
    let n = x.ambient_dim();
    mc_estimate(n_samples, seed, cfg, |rng| {
        let g = sample_rotation(rng, n);
        Ok(chi_germ_polytopes(x, p, &g, cfg)?.value as f64)
    })
}

/// `E_{H ∈ G_n^i} χ(P ∩ H)` for `i = 0..=n`; the ends are exact.
pub fn polytope_section_means(p: &PolytopeUnion, n_samples: u64, seed: u64, cfg: &Config) -> Result<Vec<McEstimate>> {
    let n = p.ambient_dim();
    (0..=n)
        .map(|i| {
            if i == 0 {
                let origin = AffineFlat::from_frame(&DMatrix::identity(n, n), 0);
                return Ok(McEstimate::exact(chi_polytopes_flat(p, Some(&origin), cfg)?.value as f64));
            }
            if i == n {
                return Ok(McEstimate::exact(chi_polytopes_flat(p, None, cfg)?.value as f64));
            }
            mc_estimate(n_samples, sub_seed(seed, &format!("section/{i}")), cfg, |rng| {
                let h = sample_grassmannian(rng, n, i);
                Ok(chi_polytopes_flat(p, Some(&h), cfg)?.value as f64)
            })
        })
        .collect()
}

/// The single-germ invariants of one germ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantProfile {
    pub germ: String,
    pub ambient_dim: usize,
    pub dim: usize,
    /// `σ_0..=σ_n`.
    pub sigma: Vec<McEstimate>,
    /// `L_0..=L_n`.
    pub link_sums: Vec<McEstimate>,
    /// `Λ^lim_0..=Λ^lim_n`.
    pub lambda_lim: VectorEstimate,
    /// `Λ^loc_1..=Λ^loc_n`.
    pub lambda_loc: VectorEstimate,
    /// `Θ_d`.
    pub density: McEstimate,
}

impl InvariantProfile {
    pub fn sigma_vector(&self) -> VectorEstimate {
        VectorEstimate::independent(&self.sigma)
    }
}

pub fn invariant_profile(x: &ConicGerm, n_samples: u64, seed: u64, cfg: &Config) -> Result<InvariantProfile> {
    let n = x.ambient_dim();
    let sigma = (0..=n)
        .map(|k| sigma_k(x, k, n_samples, sub_seed(seed, &format!("sigma/{k}")), cfg))
        .collect::<Result<Vec<_>>>()?;
    let link_sums = (0..=n)
        .map(|j| link_sum(x, j, n_samples, sub_seed(seed, &format!("link/{j}")), cfg))
        .collect::<Result<Vec<_>>>()?;
    let lambda_lim = lambda_from_links(&link_sums);
    let lambda_loc = VectorEstimate::independent(&sigma).transform(&sigma_to_lambda_loc_matrix(n), &vec![0.0; n]);
    let density = density(x, n_samples, sub_seed(seed, "density"), cfg)?;
    Ok(InvariantProfile { germ: x.label.clone(), ambient_dim: n, dim: x.dim(), sigma, link_sums, lambda_lim, lambda_loc, density })
}

/// Convenience: a fixed rotation for deterministic checks.
pub fn chi_pair_at(x: &ConicGerm, y: &ConicGerm, g: &Rotation, v: &VecN, cfg: &Config) -> Result<i64> {
    chi_slice_limit(x, y, g, v.as_slice(), cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadrant() -> ConicGerm {
        ConicGerm::from_generators(2, &[vec![vec![1.0, 0.0], vec![0.0, 1.0]]], "Q").unwrap()
    }

    fn half_line() -> ConicGerm {
        ConicGerm::from_generators(1, &[vec![vec![1.0]]], "H").unwrap()
    }

    #[test]
    fn half_line_invariants() {
        let p = invariant_profile(&half_line(), 200, 1, &Config::default()).unwrap();
        assert_eq!(p.link_sums[1].mean, 1.0);
        assert_eq!(p.lambda_lim.mean, vec![0.5, 0.5]);
        assert!((p.sigma[1].mean - 0.5).abs() < 0.12);
    }

    #[test]
    fn lambda_weights_sum_to_one() {
        for n in 1..6 {
            let (a, c) = link_to_lambda(n);
            assert_eq!(c.iter().sum::<f64>(), 1.0);
            // L_0 = 0, so its column is irrelevant.
            for j in 1..=n {
                let col: f64 = a.iter().map(|r| r[j]).sum();
                assert!(col.abs() < 1e-15, "n={n} j={j}");
            }
        }
    }

    #[test]
    fn quadrant_profile() {
        let cfg = Config::default();
        let p = invariant_profile(&quadrant(), 4000, 7, &cfg).unwrap();
        let se = |e: McEstimate| 4.0 * e.stderr + 1e-12;
        assert!((p.sigma[2].mean - 0.25).abs() < se(p.sigma[2]));
        assert!((p.sigma[1].mean - 0.75).abs() < se(p.sigma[1]));
        let l1 = p.lambda_lim.component(1);
        assert!((l1.mean - 0.5).abs() < se(l1));
        assert!((p.density.mean - 0.25).abs() < se(p.density));
    }

    #[test]
    fn ray_density_in_plane() {
        let ray = ConicGerm::from_generators(2, &[vec![vec![1.0, 1.0]]], "R").unwrap();
        let e = density(&ray, 2000, 3, &Config::default()).unwrap();
        assert!((e.mean - 0.5).abs() < 4.0 * e.stderr);
        let line = ConicGerm::from_generators(2, &[vec![vec![1.0, 1.0]], vec![vec![-1.0, -1.0]]], "L").unwrap();
        let e = density(&line, 2000, 3, &Config::default()).unwrap();
        assert!((e.mean - 1.0).abs() < 4.0 * e.stderr);
    }

    #[test]
    fn bilinear_variance_matches_product_rule() {
        let a = VectorEstimate::independent(&[McEstimate { mean: 2.0, stderr: 0.1, n_samples: 10, n_degenerate: 0 }]);
        let b = VectorEstimate::independent(&[McEstimate { mean: 3.0, stderr: 0.2, n_samples: 10, n_degenerate: 0 }]);
        let e = bilinear(&a, &b, &[(0, 0, 1.0)]);
        assert_eq!(e.mean, 6.0);
        assert!((e.variance() - (9.0 * 0.01 + 4.0 * 0.04)).abs() < 1e-12);
    }
}
