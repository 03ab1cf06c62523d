//! Point-to-polyhedron distance as least-distance programming.
//!
//! Equalities are eliminated through an SVD (particular solution plus a
//! null-space basis); the remaining `min ‖z‖ s.t. Gz ≥ h` is solved by the
//! classical reduction to nonnegative least squares.

use nalgebra::{DMatrix, DVector};

use crate::config::Config;
use crate::error::{Error, Result};

use super::ConvexCell;

/// `Some((distance, nearest point))`, or `None` when the polyhedron is empty.
pub(crate) fn distance(cell: &ConvexCell, center: &[f64], cfg: &Config) -> Result<Option<(f64, Vec<f64>)>> {
    let n = cell.dim();
    if cell.const_violation() > cfg.tol_feasible {
        return Ok(None);
    }
    let c = DVector::from_column_slice(center);

    // Affine part {x : Cx = d} = y0 + span(N).
    let ne = cell.n_equalities();
    let (y0, null) = if ne == 0 {
        (DVector::zeros(n), DMatrix::identity(n, n))
    } else {
        let mut cm = DMatrix::<f64>::zeros(ne, n);
        let mut dv = DVector::<f64>::zeros(ne);
        for i in 0..ne {
            let (row, rhs) = cell.equality(i);
            for l in 0..n {
                cm[(i, l)] = row[l];
            }
            dv[i] = rhs;
        }
        let svd = cm.clone().svd(true, true);
        let vt = svd.v_t.as_ref().expect("V requested");
        let s = &svd.singular_values;
        let smax = s.iter().cloned().fold(0.0, f64::max);
        let rank = s.iter().filter(|&&x| x > cfg.rank_cutoff * smax.max(1.0)).count();
        let y0 = svd
            .solve(&dv, cfg.rank_cutoff * smax.max(1.0))
            .map_err(|e| Error::NumericalFailure(e.to_string()))?;
        if (&cm * &y0 - &dv).amax() > cfg.tol_feasible {
            return Ok(None);
        }
        // Full V for the null space: complete the row space of C.
        let row_space: Vec<DVector<f64>> = (0..rank).map(|i| vt.row(i).transpose()).collect();
        let comp = crate::linalg::orthonormal_complement(&row_space, n);
        let mut nm = DMatrix::<f64>::zeros(n, comp.len());
        for (j, v) in comp.iter().enumerate() {
            nm.set_column(j, v);
        }
        (y0, nm)
    };
    let p = null.ncols();

    // x = y0 + N(t + z'), where t = Nᵀ(c − y0) is the free optimum.
    let t = null.transpose() * (&c - &y0);
    let base = &y0 + &null * &t;
    let perp2 = (&base - &c).norm_squared();

    let ni = cell.n_inequalities();
    if ni == 0 {
        return Ok(Some((perp2.sqrt(), base.as_slice().to_vec())));
    }
    // Inequalities aᵀx ≤ b become (−aᵀN) z' ≥ −(b − aᵀ base).
    let mut g = DMatrix::<f64>::zeros(ni, p);
    let mut h = DVector::<f64>::zeros(ni);
    for i in 0..ni {
        let (row, rhs) = cell.inequality(i);
        let a = DVector::from_column_slice(row);
        let an = null.transpose() * &a;
        for j in 0..p {
            g[(i, j)] = -an[j];
        }
        h[i] = -(rhs - a.dot(&base));
    }
    if p == 0 {
        if h.iter().all(|&hi| hi <= cfg.tol_feasible) {
            return Ok(Some((perp2.sqrt(), base.as_slice().to_vec())));
        }
        return Ok(None);
    }
    let Some(z) = least_distance(&g, &h, cfg)? else {
        return Ok(None);
    };
    let x = &base + &null * &z;
    let dist = (perp2 + z.norm_squared()).sqrt();
    Ok(Some((dist, x.as_slice().to_vec())))
}

/// `argmin ‖z‖` subject to `Gz ≥ h`, or `None` if infeasible.
fn least_distance(g: &DMatrix<f64>, h: &DVector<f64>, cfg: &Config) -> Result<Option<DVector<f64>>> {
    let (m, p) = g.shape();
    if h.iter().all(|&x| x <= 0.0) {
        return Ok(Some(DVector::zeros(p)));
    }
    let mut e = DMatrix::<f64>::zeros(p + 1, m);
    for i in 0..m {
        for j in 0..p {
            e[(j, i)] = g[(i, j)];
        }
        e[(p, i)] = h[i];
    }
    let mut f = DVector::<f64>::zeros(p + 1);
    f[p] = 1.0;
    let u = nnls(&e, &f, cfg)?;
    let r = &e * &u - &f;
    if r.norm() <= 1e-12 || r[p].abs() <= 1e-14 {
        return Ok(None);
    }
    let z = DVector::from_iterator(p, (0..p).map(|j| -r[j] / r[p]));
    // Infeasibility also shows up as a residual that cannot reach −1.
    if (g * &z - h).min() < -1e-7 * (1.0 + h.amax()) {
        return Ok(None);
    }
    Ok(Some(z))
}

/// Lawson–Hanson active-set NNLS: `min ‖Ax − b‖` with `x ≥ 0`.
pub(crate) fn nnls(a: &DMatrix<f64>, b: &DVector<f64>, cfg: &Config) -> Result<DVector<f64>> {
    let (_, n) = a.shape();
    let mut x = DVector::<f64>::zeros(n);
    let mut passive = vec![false; n];
    let tol = 1e-12 * a.amax().max(1.0) * b.amax().max(1.0) * (n as f64).max(1.0);
    let cap = cfg.lp_iteration_factor * (3 * n + 10);
    let mut outer = 0usize;
    loop {
        let w = a.transpose() * (b - a * &x);
        let mut best: Option<usize> = None;
        for j in 0..n {
            if !passive[j] && w[j] > tol && best.is_none_or(|k| w[j] > w[k]) {
                best = Some(j);
            }
        }
        let Some(t) = best else { break };
        passive[t] = true;
        loop {
            outer += 1;
            if outer > cap {
                return Err(Error::NumericalFailure("NNLS did not converge".into()));
            }
            let idx: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
            let sub = a.select_columns(&idx);
            let zs = sub
                .svd(true, true)
                .solve(b, 1e-13)
                .map_err(|e| Error::NumericalFailure(e.to_string()))?;
            if zs.iter().all(|&v| v > 0.0) {
                for (k, &j) in idx.iter().enumerate() {
                    x[j] = zs[k];
                }
                break;
            }
            let mut alpha = f64::INFINITY;
            for (k, &j) in idx.iter().enumerate() {
                if zs[k] <= 0.0 {
                    let denom = x[j] - zs[k];
                    if denom > 0.0 {
                        alpha = alpha.min(x[j] / denom);
                    }
                }
            }
            if !alpha.is_finite() {
                alpha = 0.0;
            }
            for (k, &j) in idx.iter().enumerate() {
                x[j] += alpha * (zs[k] - x[j]);
                if x[j] <= 1e-15 {
                    x[j] = 0.0;
                    passive[j] = false;
                }
            }
            if idx.iter().all(|&j| !passive[j]) {
                break;
            }
        }
    }
    Ok(x)
}
