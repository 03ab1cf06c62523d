//! Exact rational phase-one simplex, used as an oracle for the float LP.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::ConvexCell;

/// Ball-free cell with rational data: `A x ≤ b`, `C x = d`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalCell {
    pub dim: usize,
    pub inequalities: Vec<(Vec<BigRational>, BigRational)>,
    pub equalities: Vec<(Vec<BigRational>, BigRational)>,
}

pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

impl RationalCell {
    pub fn new(dim: usize) -> Self {
        RationalCell { dim, inequalities: Vec::new(), equalities: Vec::new() }
    }

    /// Float image of the cell, rows normalized as usual.
    pub fn to_cell(&self) -> ConvexCell {
        let f = |r: &BigRational| -> f64 {
            use num_traits::ToPrimitive;
            r.to_f64().unwrap_or(f64::NAN)
        };
        let mut c = ConvexCell::new(self.dim);
        for (a, b) in &self.inequalities {
            let af: Vec<f64> = a.iter().map(f).collect();
            c.push_inequality(&af, f(b));
        }
        for (a, b) in &self.equalities {
            let af: Vec<f64> = a.iter().map(f).collect();
            c.push_equality(&af, f(b));
        }
        c
    }
}

/// Exact feasibility of a rational cell.
pub fn rational_feasible(cell: &RationalCell) -> bool {
    let n = cell.dim;
    let ni = cell.inequalities.len();
    let ne = cell.equalities.len();
    let m = ni + ne;
    if m == 0 {
        return true;
    }
    // Columns: u (n), w (n), slacks (ni), artificials (m), rhs.
    let nv = 2 * n + ni + m;
    let width = nv + 1;
    let zero = BigRational::zero();
    let mut t: Vec<Vec<BigRational>> = Vec::with_capacity(m + 1);
    let rows = cell.inequalities.iter().map(|r| (r, true)).chain(cell.equalities.iter().map(|r| (r, false)));
    for (i, ((a, b), is_ineq)) in rows.enumerate() {
        let mut row = vec![zero.clone(); width];
        for l in 0..n {
            row[l] = a[l].clone();
            row[n + l] = -a[l].clone();
        }
        if is_ineq {
            row[2 * n + i] = BigRational::one();
        }
        row[nv] = b.clone();
        if b.is_negative() {
            for v in row.iter_mut() {
                *v = -v.clone();
            }
        }
        row[2 * n + ni + i] = BigRational::one();
        t.push(row);
    }
    let mut basis: Vec<usize> = (0..m).map(|i| 2 * n + ni + i).collect();
    // Objective row: reduced costs of minimizing Σ artificials.
    let mut obj = vec![zero.clone(); width];
    for row in &t {
        for j in 0..width {
            if j < 2 * n + ni || j == nv {
                obj[j] += &row[j];
            }
        }
    }
    // obj[j] = Σ_i t[i][j] for non-artificial j; entering if obj[j] > 0.
    loop {
        let enter = (0..2 * n + ni + m).find(|&j| !basis.contains(&j) && obj[j].is_positive());
        let Some(q) = enter else { break };
        let mut leave: Option<(usize, BigRational)> = None;
        for (i, row) in t.iter().enumerate() {
            if row[q].is_positive() {
                let r = &row[nv] / &row[q];
                let take = match &leave {
                    None => true,
                    Some((l, best)) => r < *best || (r == *best && basis[i] < basis[*l]),
                };
                if take {
                    leave = Some((i, r));
                }
            }
        }
        let Some((p, _)) = leave else { break };
        let pv = t[p][q].clone();
        for v in t[p].iter_mut() {
            *v = &*v / &pv;
        }
        let prow = t[p].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != p && !row[q].is_zero() {
                let f = row[q].clone();
                for j in 0..width {
                    row[j] -= &f * &prow[j];
                }
            }
        }
        if !obj[q].is_zero() {
            let f = obj[q].clone();
            for j in 0..width {
                obj[j] -= &f * &prow[j];
            }
        }
        basis[p] = q;
    }
    // Remaining artificial sum equals obj[rhs].
    obj[nv].is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> BigRational {
        ratio(n, 1)
    }

    #[test]
    fn interval_feasibility() {
        let mut c = RationalCell::new(1);
        c.inequalities.push((vec![r(-1)], r(0)));
        c.inequalities.push((vec![r(1)], r(1)));
        assert!(rational_feasible(&c));
        let mut c = RationalCell::new(1);
        c.inequalities.push((vec![r(-1)], r(-1)));
        c.inequalities.push((vec![r(1)], r(0)));
        assert!(!rational_feasible(&c));
    }

    #[test]
    fn equalities_and_touching_constraints() {
        let mut c = RationalCell::new(2);
        c.equalities.push((vec![r(1), r(1)], r(1)));
        c.inequalities.push((vec![r(-1), r(0)], r(0)));
        c.inequalities.push((vec![r(0), r(-1)], r(-1)));
        assert!(rational_feasible(&c));
        c.inequalities.push((vec![r(0), r(1)], ratio(1, 2)));
        assert!(!rational_feasible(&c));
    }
}
