//! Dense dictionary simplex for the min–max-violation LP
//!
//! ```text
//! minimize s   subject to  ⟨a_i,x⟩ − s ≤ b_i,  s ≥ −1
//! ```
//!
//! over unit-normalized rows (each equality contributes two rows). With
//! `s = s0 − r`, `s0 = max(−1, max_i −b_i)` and `x = u − w`, the all-slack
//! basis is feasible, so no artificial phase is needed. The optimum is a
//! signed distance-like margin: ≤ 0 for feasible cells, > 0 otherwise.

use std::cell::RefCell;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::linalg::dot;

use super::ConvexCell;

const PIVOT_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    /// Largest normalized violation at `witness` (clamped below at the LP value).
    pub margin: f64,
    pub witness: Vec<f64>,
}

struct Scratch {
    dict: Vec<f64>,
    basis: Vec<usize>,
    nonbasic: Vec<usize>,
    rows: Vec<f64>,
}

thread_local! {
    static SCRATCH: RefCell<Scratch> = const {
        RefCell::new(Scratch { dict: Vec::new(), basis: Vec::new(), nonbasic: Vec::new(), rows: Vec::new() })
    };
}

pub(crate) fn min_max_violation(
    cell: &ConvexCell,
    extra_eq: Option<&[f64]>,
    cfg: &Config,
) -> Result<LpSolution> {
    SCRATCH.with(|s| solve(&mut s.borrow_mut(), cell, extra_eq, cfg))
}

fn solve(sc: &mut Scratch, cell: &ConvexCell, extra_eq: Option<&[f64]>, cfg: &Config) -> Result<LpSolution> {
    let n = cell.dim();
    let stride = n + 1;

    // Gather one-sided rows ⟨a,x⟩ ≤ b.
    sc.rows.clear();
    sc.rows.extend_from_slice(cell.raw_inequalities());
    let push_two_sided = |rows: &mut Vec<f64>, r: &[f64]| {
        rows.extend_from_slice(r);
        rows.extend(r.iter().map(|x| -x));
    };
    for r in cell.raw_equalities().chunks_exact(stride) {
        push_two_sided(&mut sc.rows, r);
    }
    if let Some(r) = extra_eq {
        push_two_sided(&mut sc.rows, r);
    }
    let m = sc.rows.len() / stride;
    let const_violation = cell.const_violation();

    if m == 0 {
        return Ok(LpSolution { margin: const_violation.max(-1.0), witness: vec![0.0; n] });
    }

    let s0 = sc.rows.chunks_exact(stride).fold(-1.0f64, |acc, r| acc.max(-r[n]));

    // Dictionary: basic_i = D[i][0] + Σ_j D[i][j]·nonbasic_j.
    // Columns 1..=2n+1 hold u_0..u_{n−1}, w_0..w_{n−1}, r.
    // Rows 0..m−1 are constraint slacks, row m the cap slack, row m+1 the objective.
    let cols = 2 * n + 2;
    let nrows = m + 2;
    sc.dict.clear();
    sc.dict.resize(nrows * cols, 0.0);
    let d = &mut sc.dict;
    for i in 0..m {
        let r = &sc.rows[i * stride..(i + 1) * stride];
        let row = &mut d[i * cols..(i + 1) * cols];
        row[0] = r[n] + s0;
        for l in 0..n {
            row[1 + l] = -r[l];
            row[1 + n + l] = r[l];
        }
        row[1 + 2 * n] = -1.0;
    }
    {
        let row = &mut d[m * cols..(m + 1) * cols];
        row[0] = s0 + 1.0;
        row[1 + 2 * n] = -1.0;
    }
    d[(m + 1) * cols + 1 + 2 * n] = 1.0;

    // Variable ids: u_l = l, w_l = n + l, r = 2n, slack_i = 2n + 1 + i.
    sc.nonbasic.clear();
    sc.nonbasic.extend(0..=2 * n);
    sc.basis.clear();
    sc.basis.extend((0..=m).map(|i| 2 * n + 1 + i));

    let cap = cfg.lp_iteration_factor * (2 * n + 1 + m + 1);
    let obj = m + 1;
    let mut iterations = 0usize;
    loop {
        // Bland: entering variable with the smallest id among improving columns.
        let mut enter: Option<usize> = None;
        for j in 1..cols {
            if d[obj * cols + j] > PIVOT_EPS {
                match enter {
                    Some(e) if sc.nonbasic[e - 1] < sc.nonbasic[j - 1] => {}
                    _ => enter = Some(j),
                }
            }
        }
        let Some(q) = enter else { break };

        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..=m {
            let a = d[i * cols + q];
            if a < -PIVOT_EPS {
                let ratio = d[i * cols] / -a;
                let better = match leave {
                    None => true,
                    Some(l) => {
                        ratio < best - 1e-15 || (ratio <= best + 1e-15 && sc.basis[i] < sc.basis[l])
                    }
                };
                if better {
                    best = ratio.min(best);
                    leave = Some(i);
                }
            }
        }
        let Some(p) = leave else {
            return Err(Error::NumericalFailure("min-max LP reported unbounded".into()));
        };

        pivot(d, cols, nrows, p, q);
        std::mem::swap(&mut sc.basis[p], &mut sc.nonbasic[q - 1]);

        iterations += 1;
        if iterations > cap {
            return Err(Error::NumericalFailure(format!("LP exceeded {cap} pivots")));
        }
    }

    let mut x = vec![0.0; n];
    for (i, &var) in sc.basis.iter().enumerate() {
        let val = d[i * cols].max(0.0);
        if var < n {
            x[var] += val;
        } else if var < 2 * n {
            x[var - n] -= val;
        }
    }
    let r_opt = d[obj * cols];
    let lp_value = s0 - r_opt;

    let mut margin = const_violation;
    for r in sc.rows.chunks_exact(stride) {
        margin = margin.max(dot(&r[..n], &x) - r[n]);
    }
    // A strictly interior optimum keeps its (negative) LP value.
    if margin < 0.0 {
        margin = margin.max(lp_value);
    }
    Ok(LpSolution { margin, witness: x })
}

fn pivot(d: &mut [f64], cols: usize, nrows: usize, p: usize, q: usize) {
    let a = d[p * cols + q];
    // Solve row p for the entering variable.
    for j in 0..cols {
        if j == q {
            d[p * cols + j] = 1.0 / a;
        } else {
            d[p * cols + j] = -d[p * cols + j] / a;
        }
    }
    let (head, tail) = d.split_at_mut(p * cols);
    let (prow, tail) = tail.split_at_mut(cols);
    for i in 0..nrows {
        if i == p {
            continue;
        }
        let row = if i < p {
            &mut head[i * cols..(i + 1) * cols]
        } else {
            let o = (i - p - 1) * cols;
            &mut tail[o..o + cols]
        };
        let f = row[q];
        if f == 0.0 {
            continue;
        }
        for j in 0..cols {
            if j == q {
                row[j] = f * prow[j];
            } else {
                row[j] += f * prow[j];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interior_margin_is_negative() {
        let mut c = ConvexCell::new(2);
        c.push_inequality(&[1.0, 0.0], 1.0);
        c.push_inequality(&[-1.0, 0.0], 1.0);
        c.push_inequality(&[0.0, 1.0], 1.0);
        c.push_inequality(&[0.0, -1.0], 1.0);
        let s = min_max_violation(&c, None, &Config::default()).unwrap();
        assert!((s.margin + 1.0).abs() < 1e-12, "{}", s.margin);
    }

    #[test]
    fn separated_halfplanes_report_half_gap() {
        let mut c = ConvexCell::new(2);
        c.push_inequality(&[1.0, 1.0], -2.0f64.sqrt());
        c.push_inequality(&[-1.0, -1.0], -2.0f64.sqrt());
        let s = min_max_violation(&c, None, &Config::default()).unwrap();
        assert!((s.margin - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shared_face_stays_feasible() {
        // x ≥ 0 and x ≤ 0 meet in the line x = 0.
        let mut c = ConvexCell::new(2);
        c.push_inequality(&[1.0, 0.0], 0.0);
        c.push_inequality(&[-1.0, 0.0], 0.0);
        c.push_equality(&[1.0, 1.0], 1.0);
        let s = min_max_violation(&c, None, &Config::default()).unwrap();
        assert!(s.margin <= 1e-12);
        assert!((s.witness[1] - 1.0).abs() < 1e-12);
    }
}
