//! Volumes of unit spheres and balls, the kinematic coefficients `e(p,q,n)`
//! and the `σ → Λ^loc` transform.

use statrs::function::gamma::gamma;
use std::f64::consts::PI;

/// `s_k = |S^k| = 2π^{(k+1)/2} / Γ((k+1)/2)`.
pub fn sphere_volume(k: usize) -> f64 {
    let h = (k as f64 + 1.0) / 2.0;
    2.0 * PI.powf(h) / gamma(h)
}

/// `b_k = |B^k| = π^{k/2} / Γ(k/2 + 1)`; `b_0 = 1`.
pub fn ball_volume(k: usize) -> f64 {
    let h = k as f64 / 2.0;
    PI.powf(h) / gamma(h + 1.0)
}

/// `e(p,q,n) = s_{p+q−n} s_n / (s_p s_q)`, defined for `p + q ≥ n`.
pub fn kinematic_coefficient(p: usize, q: usize, n: usize) -> Option<f64> {
    let k = (p + q).checked_sub(n)?;
    Some(sphere_volume(k) * sphere_volume(n) / (sphere_volume(p) * sphere_volume(q)))
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Flag coefficient `m_i^j`, `j ≥ i ≥ 1`; `m_i^i = 1`.
pub fn flag_coefficient(i: usize, j: usize) -> f64 {
    assert!(j >= i, "flag coefficient needs j ≥ i");
    if j == i {
        return 1.0;
    }
    let b = ball_volume;
    let first = b(j) / (b(j - i) * b(i)) * binomial(j, i);
    let second = b(j - 1) / (b(j - 1 - i) * b(i)) * binomial(j - 1, i);
    first - second
}

/// `Λ^loc_k = σ_k + Σ_{j>k} m_k^j σ_j` for `k = 1..n`; `sigma` is indexed `0..=n`.
/// Entry `k−1` of the result is `Λ^loc_k`.
pub fn sigma_to_lambda_loc(sigma: &[f64]) -> Vec<f64> {
    let n = sigma.len().saturating_sub(1);
    (1..=n).map(|k| (k..=n).map(|j| flag_coefficient(k, j) * sigma[j]).sum()).collect()
}

/// Row `k−1` holds the weights of `σ_0..=σ_n` in `Λ^loc_k`.
pub fn sigma_to_lambda_loc_matrix(n: usize) -> Vec<Vec<f64>> {
    (1..=n)
        .map(|k| (0..=n).map(|j| if j >= k { flag_coefficient(k, j) } else { 0.0 }).collect())
        .collect()
}
