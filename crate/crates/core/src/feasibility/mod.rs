//! Nonemptiness and distance predicates for convex cells.
//!
//! A cell is a conjunction of linear inequalities `⟨a,x⟩ ≤ b`, linear
//! equalities `⟨c,x⟩ = d` and at most one ball constraint. Rows are stored
//! unit-normalized so every margin below is a Euclidean distance.

mod dykstra;
pub mod exact;
mod ldp;
mod simplex;

use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::geometry::{Row, SimplicialCone};
use crate::linalg::{dot, norm};

pub use dykstra::dykstra_distance;
pub use simplex::LpSolution;

/// Rows with a normal shorter than this are treated as constants.
const ZERO_ROW: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Nonempty,
    Empty,
    Degenerate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityVerdict {
    pub status: Status,
    pub witness: Option<Vec<f64>>,
    pub distance: Option<f64>,
    /// Largest normalized constraint violation at the best point found.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

/// Closed convex set in `R^n`; rows are stored flat with stride `n + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexCell {
    dim: usize,
    ineq: Vec<f64>,
    eq: Vec<f64>,
    /// Violation carried by rows whose normal vanished (`0 ≤ b`, `0 = d`);
    /// `-inf` when there are none.
    const_violation: f64,
    ball: Option<Ball>,
}

impl ConvexCell {
    pub fn new(dim: usize) -> Self {
        ConvexCell { dim, ineq: Vec::new(), eq: Vec::new(), const_violation: f64::NEG_INFINITY, ball: None }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Adds `⟨a,x⟩ ≤ b`.
    pub fn push_inequality(&mut self, a: &[f64], b: f64) {
        debug_assert_eq!(a.len(), self.dim);
        let na = norm(a);
        if na <= ZERO_ROW {
            self.const_violation = self.const_violation.max(-b);
            return;
        }
        self.ineq.extend(a.iter().map(|x| x / na));
        self.ineq.push(b / na);
    }

    /// Adds `⟨c,x⟩ = d`.
    pub fn push_equality(&mut self, c: &[f64], d: f64) {
        debug_assert_eq!(c.len(), self.dim);
        let nc = norm(c);
        if nc <= ZERO_ROW {
            self.const_violation = self.const_violation.max(d.abs());
            return;
        }
        self.eq.extend(c.iter().map(|x| x / nc));
        self.eq.push(d / nc);
    }

    pub fn with_ball(mut self, center: Vec<f64>, radius: f64) -> Self {
        self.ball = Some(Ball { center, radius });
        self
    }

    pub fn set_ball(&mut self, ball: Option<Ball>) {
        self.ball = ball;
    }

    pub fn ball(&self) -> Option<&Ball> {
        self.ball.as_ref()
    }

    pub fn from_rows(dim: usize, inequalities: &[Row], equalities: &[Row]) -> Self {
        let mut c = ConvexCell::new(dim);
        for r in inequalities {
            c.push_inequality(r.normal.as_slice(), r.offset);
        }
        for r in equalities {
            c.push_equality(r.normal.as_slice(), r.offset);
        }
        c
    }

    /// Constraints of `x ∈ cone` (the cone is through the origin).
    pub fn from_cone(cone: &SimplicialCone) -> Self {
        let mut c = ConvexCell::new(cone.ambient_dim());
        c.add_cone(cone, None);
        c
    }

    /// Intersects with `cone + shift` (or the cone itself when `shift` is `None`).
    pub fn add_cone(&mut self, cone: &SimplicialCone, shift: Option<&[f64]>) {
        let n = self.dim;
        let dual = cone.dual();
        let mut row = vec![0.0; n];
        for i in 0..cone.rank() {
            for (l, r) in row.iter_mut().enumerate() {
                *r = -dual[(i, l)];
            }
            let b = shift.map_or(0.0, |v| dot(&row, v));
            self.push_inequality(&row, b);
        }
        for c in cone.complement() {
            let d = shift.map_or(0.0, |v| dot(c.as_slice(), v));
            self.push_equality(c.as_slice(), d);
        }
    }

    /// In-place intersection with another cell's linear part.
    pub fn intersect(&mut self, other: &ConvexCell) {
        debug_assert_eq!(self.dim, other.dim);
        self.ineq.extend_from_slice(&other.ineq);
        self.eq.extend_from_slice(&other.eq);
        self.const_violation = self.const_violation.max(other.const_violation);
    }

    pub fn truncate_to(&mut self, mark: CellMark) {
        self.ineq.truncate(mark.0);
        self.eq.truncate(mark.1);
        self.const_violation = mark.2;
    }

    pub fn mark(&self) -> CellMark {
        CellMark(self.ineq.len(), self.eq.len(), self.const_violation)
    }

    pub fn n_inequalities(&self) -> usize {
        self.ineq.len() / (self.dim + 1)
    }

    pub fn n_equalities(&self) -> usize {
        self.eq.len() / (self.dim + 1)
    }

    pub fn inequality(&self, i: usize) -> (&[f64], f64) {
        let s = self.dim + 1;
        (&self.ineq[i * s..i * s + self.dim], self.ineq[i * s + self.dim])
    }

    pub fn equality(&self, i: usize) -> (&[f64], f64) {
        let s = self.dim + 1;
        (&self.eq[i * s..i * s + self.dim], self.eq[i * s + self.dim])
    }

    pub(crate) fn raw_inequalities(&self) -> &[f64] {
        &self.ineq
    }

    pub(crate) fn raw_equalities(&self) -> &[f64] {
        &self.eq
    }

    pub(crate) fn const_violation(&self) -> f64 {
        self.const_violation
    }

    /// Largest normalized violation of the linear constraints at `x`.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let s = self.dim + 1;
        let mut worst = self.const_violation;
        for r in self.ineq.chunks_exact(s) {
            worst = worst.max(dot(&r[..self.dim], x) - r[self.dim]);
        }
        for r in self.eq.chunks_exact(s) {
            worst = worst.max((dot(&r[..self.dim], x) - r[self.dim]).abs());
        }
        worst
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        if self.violation(x) > tol {
            return false;
        }
        match &self.ball {
            Some(b) => {
                let d: f64 = x.iter().zip(&b.center).map(|(p, q)| (p - q) * (p - q)).sum();
                d.sqrt() <= b.radius + tol
            }
            None => true,
        }
    }
}

/// Saved row counts, for cheap backtracking in depth-first searches.
#[derive(Debug, Clone, Copy)]
pub struct CellMark(usize, usize, f64);

pub(crate) fn classify_margin(margin: f64, cfg: &Config) -> Status {
    if margin <= cfg.tol_feasible {
        Status::Nonempty
    } else if margin >= cfg.tol_degenerate {
        Status::Empty
    } else {
        Status::Degenerate
    }
}

/// Phase-one LP verdict for the linear part of `cell` (any ball is ignored).
pub fn polyhedron_nonempty(cell: &ConvexCell, cfg: &Config) -> Result<FeasibilityVerdict> {
    let sol = simplex::min_max_violation(cell, None, cfg)?;
    Ok(FeasibilityVerdict {
        status: classify_margin(sol.margin, cfg),
        witness: Some(sol.witness),
        distance: None,
        margin: sol.margin,
    })
}

/// Distance from `center` to the linear part of `cell`, classified against
/// `radius` when one is given.
pub fn min_norm_distance(
    cell: &ConvexCell,
    center: &[f64],
    radius: Option<f64>,
    cfg: &Config,
) -> Result<FeasibilityVerdict> {
    let (dist, point) = match ldp::distance(cell, center, cfg)? {
        Some(found) => found,
        None => {
            return Ok(FeasibilityVerdict {
                status: Status::Empty,
                witness: None,
                distance: None,
                margin: f64::INFINITY,
            })
        }
    };
    let status = match radius {
        Some(r) if dist <= r * (1.0 - cfg.ball_margin) => Status::Nonempty,
        Some(r) if dist >= r * (1.0 + cfg.ball_margin) => Status::Empty,
        Some(_) => Status::Degenerate,
        None => Status::Nonempty,
    };
    let margin = cell.violation(&point);
    Ok(FeasibilityVerdict { status, witness: Some(point), distance: Some(dist), margin })
}

/// Full verdict for a cell, ball included.
pub fn cell_nonempty(cell: &ConvexCell, cfg: &Config) -> Result<FeasibilityVerdict> {
    let lin = polyhedron_nonempty(cell, cfg)?;
    match (&cell.ball, lin.status) {
        (Some(b), Status::Nonempty) => min_norm_distance(cell, &b.center, Some(b.radius), cfg),
        _ => Ok(lin),
    }
}

/// Does the conic cell (a subset of `anchor`) contain a point other than 0?
///
/// Every nonzero point of the pointed anchor has `1ᵀG⁺x > 0`, so the question
/// is the feasibility of the cell with `1ᵀG⁺x = 1` added.
pub fn cone_cell_has_nonzero_point(
    cell: &ConvexCell,
    anchor: &SimplicialCone,
    cfg: &Config,
) -> Result<bool> {
    let v = cone_cell_nonzero_verdict(cell, anchor.normalizer().as_slice(), anchor.rank(), cfg)?;
    match v.status {
        Status::Nonempty => Ok(true),
        Status::Empty => Ok(false),
        Status::Degenerate => Err(Error::DegenerateSample(format!(
            "nonzero-point margin {:.3e} inside the degeneracy band",
            v.margin
        ))),
    }
}

pub(crate) fn cone_cell_nonzero_verdict(
    cell: &ConvexCell,
    normalizer: &[f64],
    anchor_rank: usize,
    cfg: &Config,
) -> Result<FeasibilityVerdict> {
    if anchor_rank == 0 {
        return Err(Error::InvalidAnchor("anchor cone has no generators".into()));
    }
    nonzero_verdict_with_row(cell, &normalized_row(normalizer, 1.0), cfg)
}

/// `[a/‖a‖, b/‖a‖]`.
pub(crate) fn normalized_row(a: &[f64], b: f64) -> Vec<f64> {
    let na = norm(a);
    let mut row: Vec<f64> = a.iter().map(|x| x / na).collect();
    row.push(b / na);
    row
}

/// LP verdict for `cell ∧ ⟨row, x⟩ = rhs` with a pre-normalized row.
pub(crate) fn nonzero_verdict_with_row(cell: &ConvexCell, row: &[f64], cfg: &Config) -> Result<FeasibilityVerdict> {
    let sol = simplex::min_max_violation(cell, Some(row), cfg)?;
    Ok(FeasibilityVerdict {
        status: classify_margin(sol.margin, cfg),
        witness: Some(sol.witness),
        distance: None,
        margin: sol.margin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::VecN;

    fn cfg() -> Config {
        Config::default()
    }

    #[test]
    fn unit_interval_is_nonempty() {
        let mut c = ConvexCell::new(1);
        c.push_inequality(&[-1.0], 0.0);
        c.push_inequality(&[1.0], 1.0);
        let v = polyhedron_nonempty(&c, &cfg()).unwrap();
        assert_eq!(v.status, Status::Nonempty);
        let w = v.witness.unwrap();
        assert!(w[0] >= -1e-8 && w[0] <= 1.0 + 1e-8);
    }

    #[test]
    fn crossed_bounds_are_empty() {
        let mut c = ConvexCell::new(1);
        c.push_inequality(&[-1.0], -1.0);
        c.push_inequality(&[1.0], 0.0);
        let v = polyhedron_nonempty(&c, &cfg()).unwrap();
        assert_eq!(v.status, Status::Empty);
        assert!((v.margin - 0.5).abs() < 1e-12);
    }

    #[test]
    fn single_point_from_equalities_is_nonempty() {
        let mut c = ConvexCell::new(2);
        c.push_equality(&[1.0, 0.0], 3.0);
        c.push_equality(&[0.0, 1.0], 4.0);
        c.push_inequality(&[1.0, 1.0], 7.0);
        let v = polyhedron_nonempty(&c, &cfg()).unwrap();
        assert_eq!(v.status, Status::Nonempty);
    }

    #[test]
    fn halfplane_distance() {
        let mut c = ConvexCell::new(2);
        c.push_inequality(&[-1.0, 0.0], -2.0);
        let v = min_norm_distance(&c, &[0.0, 0.0], None, &cfg()).unwrap();
        assert!((v.distance.unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn point_distance_is_pythagorean() {
        let mut c = ConvexCell::new(2);
        c.push_equality(&[1.0, 0.0], 3.0);
        c.push_equality(&[0.0, 1.0], 4.0);
        let v = min_norm_distance(&c, &[0.0, 0.0], Some(6.0), &cfg()).unwrap();
        assert!((v.distance.unwrap() - 5.0).abs() < 1e-9);
        assert_eq!(v.status, Status::Nonempty);
        let v = min_norm_distance(&c, &[0.0, 0.0], Some(4.0), &cfg()).unwrap();
        assert_eq!(v.status, Status::Empty);
    }

    #[test]
    fn ray_has_nonzero_point() {
        let ray = SimplicialCone::new(2, vec![VecN::from_column_slice(&[1.0, 0.0])]).unwrap();
        let cell = ConvexCell::from_cone(&ray);
        assert!(cone_cell_has_nonzero_point(&cell, &ray, &cfg()).unwrap());
        let mut cut = cell.clone();
        cut.push_equality(&[1.0, 0.0], 0.0);
        assert!(!cone_cell_has_nonzero_point(&cut, &ray, &cfg()).unwrap());
    }

    #[test]
    fn empty_anchor_is_rejected() {
        let zero = SimplicialCone::new(2, vec![]).unwrap();
        let cell = ConvexCell::from_cone(&zero);
        assert!(matches!(
            cone_cell_has_nonzero_point(&cell, &zero, &cfg()),
            Err(Error::InvalidAnchor(_))
        ));
    }

    #[test]
    fn quadrant_and_lines_through_origin() {
        let q = SimplicialCone::new(
            2,
            vec![VecN::from_column_slice(&[1.0, 0.0]), VecN::from_column_slice(&[0.0, 1.0])],
        )
        .unwrap();
        for step in 0..37 {
            let t = 0.013 + step as f64 * std::f64::consts::PI / 37.0;
            let (s, c) = t.sin_cos();
            let mut cell = ConvexCell::from_cone(&q);
            // the line spanned by (c, s)
            cell.push_equality(&[-s, c], 0.0);
            let expected = (c >= 0.0 && s >= 0.0) || (c <= 0.0 && s <= 0.0);
            assert_eq!(cone_cell_has_nonzero_point(&cell, &q, &cfg()).unwrap(), expected, "angle {t}");
        }
    }

    #[test]
    fn constant_rows_are_respected() {
        let mut c = ConvexCell::new(2);
        c.push_inequality(&[0.0, 0.0], -1.0);
        assert_eq!(polyhedron_nonempty(&c, &cfg()).unwrap().status, Status::Empty);
        let mut c = ConvexCell::new(2);
        c.push_equality(&[0.0, 0.0], 0.0);
        assert_eq!(polyhedron_nonempty(&c, &cfg()).unwrap().status, Status::Nonempty);
    }

    #[test]
    fn ball_cell_verdicts() {
        let mut c = ConvexCell::new(2);
        c.push_inequality(&[-1.0, 0.0], -2.0);
        let inside = c.clone().with_ball(vec![0.0, 0.0], 3.0);
        assert_eq!(cell_nonempty(&inside, &cfg()).unwrap().status, Status::Nonempty);
        let outside = c.with_ball(vec![0.0, 0.0], 1.0);
        assert_eq!(cell_nonempty(&outside, &cfg()).unwrap().status, Status::Empty);
    }
}
