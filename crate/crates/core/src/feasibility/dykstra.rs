//! Dykstra's alternating projections onto the rows of a cell.
//!
//! Independent of the LDP path; used to cross-check distances.

use crate::config::Config;
use crate::error::{Error, Result};
use crate::linalg::dot;

use super::ConvexCell;

/// Euclidean distance from `center` to the (assumed nonempty) linear part of `cell`.
pub fn dykstra_distance(cell: &ConvexCell, center: &[f64], cfg: &Config) -> Result<f64> {
    let n = cell.dim();
    let ni = cell.n_inequalities();
    let ne = cell.n_equalities();
    let sets = ni + ne;
    let mut x = center.to_vec();
    if sets == 0 {
        return Ok(0.0);
    }
    let mut incr = vec![vec![0.0; n]; sets];
    let mut y = vec![0.0; n];
    for _ in 0..cfg.projection_sweep_cap {
        let mut change = 0.0f64;
        for (k, inc) in incr.iter_mut().enumerate() {
            let (a, b, is_eq) = if k < ni {
                let (a, b) = cell.inequality(k);
                (a, b, false)
            } else {
                let (a, b) = cell.equality(k - ni);
                (a, b, true)
            };
            for l in 0..n {
                y[l] = x[l] + inc[l];
            }
            let s = dot(a, &y) - b;
            let step = if is_eq || s > 0.0 { s } else { 0.0 };
            for l in 0..n {
                let nx = y[l] - step * a[l];
                inc[l] = y[l] - nx;
                change = change.max((nx - x[l]).abs());
                x[l] = nx;
            }
        }
        if change <= cfg.tol_dist * 1e-3 && cell.violation(&x) <= cfg.tol_dist {
            let d: f64 = x.iter().zip(center).map(|(p, q)| (p - q) * (p - q)).sum();
            return Ok(d.sqrt());
        }
    }
    Err(Error::NumericalFailure(format!(
        "alternating projections did not converge in {} sweeps",
        cfg.projection_sweep_cap
    )))
}
