//! Small dense helpers shared by the geometry and solver modules.

use nalgebra::{DMatrix, DVector};

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `max |QᵀQ − I|` over the columns of `q`.
pub fn orthonormality_residual(q: &DMatrix<f64>) -> f64 {
    let g = q.transpose() * q;
    let mut worst = 0.0f64;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - target).abs());
        }
    }
    worst
}

/// Orthonormal basis of the orthogonal complement of `basis` (assumed orthonormal).
///
/// Greedy Gram–Schmidt over the standard basis, always taking the candidate
/// with the largest residual, with one re-orthogonalization pass.
pub(crate) fn orthonormal_complement(basis: &[DVector<f64>], n: usize) -> Vec<DVector<f64>> {
    let mut frame: Vec<DVector<f64>> = basis.to_vec();
    let mut out = Vec::with_capacity(n.saturating_sub(basis.len()));
    while frame.len() < n {
        let mut best: Option<DVector<f64>> = None;
        let mut best_norm = -1.0;
        for i in 0..n {
            let mut r = DVector::<f64>::zeros(n);
            r[i] = 1.0;
            for _ in 0..2 {
                for q in &frame {
                    let c = q.dot(&r);
                    r.axpy(-c, q, 1.0);
                }
            }
            let nr = r.norm();
            if nr > best_norm {
                best_norm = nr;
                best = Some(r);
            }
        }
        let mut r = best.expect("n > 0");
        r /= best_norm;
        frame.push(r.clone());
        out.push(r);
    }
    out
}

/// Thin SVD summary: left singular vectors with singular values above the
/// relative cutoff, plus the ratio smallest/largest of all singular values.
pub(crate) struct RankInfo {
    pub range: Vec<DVector<f64>>,
    pub min_ratio: f64,
}

pub(crate) fn column_range(m: &DMatrix<f64>, rel_cutoff: f64) -> RankInfo {
    if m.ncols() == 0 || m.nrows() == 0 {
        return RankInfo { range: Vec::new(), min_ratio: 1.0 };
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let s = &svd.singular_values;
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let smin = s.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut range = Vec::new();
    for (i, &sv) in s.iter().enumerate() {
        if smax > 0.0 && sv > rel_cutoff * smax {
            range.push(u.column(i).into_owned());
        }
    }
    let min_ratio = if smax > 0.0 { smin / smax } else { 0.0 };
    RankInfo { range, min_ratio }
}
