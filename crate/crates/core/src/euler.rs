//! Euler characteristics of finite unions of convex cells.
//!
//! Everything reduces to the valuation identity
//! `χ(∪A_i) = Σ_{S≠∅} (−1)^{|S|+1} χ(A_S)` with `χ(A_S) ∈ {0, 1}`:
//! a nonempty closed convex set is contractible, and so is the spherical
//! trace of a pointed cone other than `{0}`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::config::{Config, LimitMode};
use crate::error::{Error, Result};
use crate::feasibility::{
    min_norm_distance, nonzero_verdict_with_row, normalized_row, polyhedron_nonempty, Ball, ConvexCell,
    FeasibilityVerdict, Status,
};
use crate::geometry::{AffineFlat, ConicGerm, PolytopeUnion, Rotation, SimplicialCone};
use crate::linalg::{dot, norm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum UnionMode {
    /// Each nonempty intersection counts 1 (ball constraint honoured if present).
    CompactUnion,
    /// Cells are cones through 0; each intersection other than `{0}` counts 1.
    Link,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChiResult {
    pub value: i64,
    pub cells_probed: u64,
}

/// Pointed simplicial cone used to normalize nonzero-point tests.
#[derive(Debug, Clone, PartialEq)]
pub struct Anchor {
    row: Vec<f64>,
}

impl Anchor {
    pub fn of(cone: &SimplicialCone) -> Result<Self> {
        if cone.rank() == 0 {
            return Err(Error::InvalidAnchor("anchor cone has no generators".into()));
        }
        Ok(Anchor { row: normalized_row(cone.normalizer().as_slice(), 1.0) })
    }
}

/// A convex cell and, for cones, the simplicial cone containing it.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub cell: ConvexCell,
    pub anchor: Option<Anchor>,
    /// The cell is the single point `{0}` (a cone without generators).
    pub origin_only: bool,
}

impl Piece {
    pub fn plain(cell: ConvexCell) -> Self {
        Piece { cell, anchor: None, origin_only: false }
    }

    /// `γ·cone + shift` (identity and zero shift when omitted).
    pub fn cone(cone: &SimplicialCone, rotation: Option<&Rotation>, shift: Option<&[f64]>) -> Self {
        let moved;
        let c = match rotation {
            Some(r) => {
                moved = cone.rotated(r);
                &moved
            }
            None => cone,
        };
        let mut cell = ConvexCell::new(c.ambient_dim());
        cell.add_cone(c, shift);
        Piece { cell, anchor: Anchor::of(c).ok(), origin_only: c.rank() == 0 }
    }
}

pub fn germ_pieces(x: &ConicGerm, rotation: Option<&Rotation>, shift: Option<&[f64]>) -> Vec<Piece> {
    x.cones().iter().map(|c| Piece::cone(c, rotation, shift)).collect()
}

pub fn flat_piece(h: &AffineFlat) -> Piece {
    let mut cell = ConvexCell::new(h.ambient_dim());
    for r in h.equalities() {
        cell.push_equality(r.normal.as_slice(), r.offset);
    }
    Piece::plain(cell)
}

pub fn polytope_pieces(y: &PolytopeUnion, rotation: Option<&Rotation>) -> Vec<Piece> {
    y.polytopes()
        .iter()
        .map(|p| {
            let mut cell = ConvexCell::new(y.ambient_dim());
            let tr = |v: &crate::geometry::VecN| match rotation {
                Some(r) => r.apply(v),
                None => v.clone(),
            };
            for r in p.inequalities() {
                cell.push_inequality(tr(&r.normal).as_slice(), r.offset);
            }
            for r in p.equalities() {
                cell.push_equality(tr(&r.normal).as_slice(), r.offset);
            }
            Piece::plain(cell)
        })
        .collect()
}

/// Cells whose union's Euler characteristic is wanted.
#[derive(Debug, Clone, PartialEq)]
pub struct CellUnionQuery {
    pub pieces: Vec<Piece>,
    pub mode: UnionMode,
}

struct Probe<'c> {
    cfg: &'c Config,
    mode: UnionMode,
    ball: Option<f64>,
    probes: u64,
}

impl<'c> Probe<'c> {
    fn tick(&mut self) -> Result<()> {
        self.probes += 1;
        if self.probes > self.cfg.subset_budget {
            return Err(Error::BudgetExceeded { budget: self.cfg.subset_budget });
        }
        Ok(())
    }

    fn witness_ok(&self, cell: &ConvexCell, anchor: Option<&[f64]>, w: &[f64]) -> bool {
        let tol = self.cfg.tol_feasible;
        if cell.violation(w) > tol {
            return false;
        }
        if let Some(row) = anchor {
            let n = w.len();
            if (dot(&row[..n], w) - row[n]).abs() > tol {
                return false;
            }
        }
        if let Some(r) = self.effective_ball(cell) {
            if norm(w) > r * (1.0 - self.cfg.ball_margin) {
                return false;
            }
        }
        true
    }

    fn effective_ball(&self, cell: &ConvexCell) -> Option<f64> {
        match cell.ball() {
            Some(b) if b.center.iter().all(|&c| c == 0.0) => Some(b.radius),
            Some(_) => None,
            None => self.ball,
        }
    }

    /// `Some(witness)` if the cell counts, `None` if it does not.
    fn test(&mut self, cell: &ConvexCell, anchor: Option<&[f64]>, hints: [Option<&[f64]>; 2]) -> Result<Option<Vec<f64>>> {
        self.tick()?;
        for w in hints.into_iter().flatten() {
            if self.witness_ok(cell, anchor, w) {
                return Ok(Some(w.to_vec()));
            }
        }
        let verdict = match self.mode {
            UnionMode::Link => {
                let row = anchor.ok_or_else(|| Error::InvalidAnchor("link cell without anchor".into()))?;
                nonzero_verdict_with_row(cell, row, self.cfg)?
            }
            UnionMode::CompactUnion => {
                let lin = polyhedron_nonempty(cell, self.cfg)?;
                match (cell.ball(), self.ball, lin.status) {
                    (Some(b), _, Status::Nonempty) => min_norm_distance(cell, &b.center, Some(b.radius), self.cfg)?,
                    (None, Some(r), Status::Nonempty) => {
                        min_norm_distance(cell, &vec![0.0; cell.dim()], Some(r), self.cfg)?
                    }
                    _ => lin,
                }
            }
        };
        decide(verdict)
    }
}

fn decide(v: FeasibilityVerdict) -> Result<Option<Vec<f64>>> {
    match v.status {
        Status::Nonempty => Ok(Some(v.witness.unwrap_or_default())),
        Status::Empty => Ok(None),
        Status::Degenerate => Err(Error::DegenerateSample(format!(
            "feasibility margin {:.3e} inside the degeneracy band",
            v.margin
        ))),
    }
}

fn check_mode(q: &CellUnionQuery) -> Result<()> {
    if q.mode == UnionMode::Link && q.pieces.iter().any(|p| p.anchor.is_none() && !p.origin_only) {
        return Err(Error::InvalidAnchor("every link cell needs an anchor cone".into()));
    }
    let mut balls = q.pieces.iter().filter_map(|p| p.cell.ball());
    if let Some(first) = balls.next() {
        if balls.any(|b| b != first) {
            return Err(Error::InvalidInput("cells of one query must share their ball constraint".into()));
        }
    }
    Ok(())
}

/// Pruned depth-first inclusion–exclusion over subsets of cells.
pub fn euler_of_union(q: &CellUnionQuery, cfg: &Config) -> Result<ChiResult> {
    check_mode(q)?;
    let mut order: Vec<usize> = (0..q.pieces.len())
        .filter(|&i| !(q.mode == UnionMode::Link && q.pieces[i].origin_only))
        .collect();
    order.sort_by_key(|&i| {
        let c = &q.pieces[i].cell;
        (c.n_inequalities() + c.n_equalities(), i)
    });
    let Some(first) = order.first() else {
        return Ok(ChiResult { value: 0, cells_probed: 0 });
    };
    let mut probe = Probe { cfg, mode: q.mode, ball: None, probes: 0 };
    let mut acc = ConvexCell::new(q.pieces[*first].cell.dim());
    let mut value = 0i64;
    subsets(q, &order, 0, &mut acc, None, None, 1, &mut probe, &mut value)?;
    Ok(ChiResult { value, cells_probed: probe.probes })
}

#[allow(clippy::too_many_arguments)]
fn subsets(
    q: &CellUnionQuery,
    order: &[usize],
    start: usize,
    acc: &mut ConvexCell,
    anchor: Option<&[f64]>,
    witness: Option<&[f64]>,
    sign: i64,
    probe: &mut Probe,
    value: &mut i64,
) -> Result<()> {
    for k in start..order.len() {
        let piece = &q.pieces[order[k]];
        let mark = acc.mark();
        acc.intersect(&piece.cell);
        let ball = acc.ball().cloned();
        if ball.is_none() {
            acc.set_ball(piece.cell.ball().cloned());
        }
        let a = anchor.or(piece.anchor.as_ref().map(|a| a.row.as_slice()));
        if let Some(w) = probe.test(acc, a, [witness, None])? {
            *value += sign;
            subsets(q, order, k + 1, acc, a, Some(&w), -sign, probe, value)?;
        }
        acc.truncate_to(mark);
        acc.set_ball(ball);
    }
    Ok(())
}

/// Unpruned enumeration of all `2^m − 1` subsets; an oracle for small `m`.
pub fn euler_full_lattice(q: &CellUnionQuery, cfg: &Config) -> Result<ChiResult> {
    check_mode(q)?;
    let m = q.pieces.len();
    if m > 20 {
        return Err(Error::BudgetExceeded { budget: 1 << 20 });
    }
    let mut probe = Probe { cfg, mode: q.mode, ball: None, probes: 0 };
    let mut value = 0i64;
    for mask in 1u32..(1u32 << m) {
        let members: Vec<usize> = (0..m).filter(|&i| mask & (1 << i) != 0).collect();
        if q.mode == UnionMode::Link && members.iter().any(|&i| q.pieces[i].origin_only) {
            continue;
        }
        let mut cell = ConvexCell::new(q.pieces[members[0]].cell.dim());
        for &i in &members {
            cell.intersect(&q.pieces[i].cell);
            if cell.ball().is_none() {
                cell.set_ball(q.pieces[i].cell.ball().cloned());
            }
        }
        let anchor = q.pieces[members[0]].anchor.as_ref().map(|a| a.row.as_slice());
        if probe.test(&cell, anchor, [None, None])?.is_some() {
            value += if members.len() % 2 == 1 { 1 } else { -1 };
        }
    }
    Ok(ChiResult { value, cells_probed: probe.probes })
}

/// `χ(∪_{i,j} L_i ∩ R_j ∩ common)` by the product expansion
/// `Σ_{I,J≠∅} (−1)^{|I|+|J|} [L_I ∩ R_J ∩ common counts]`.
///
/// Index sets `J` compatible with a given `I` form a down-closed family that
/// only shrinks as `I` grows, which keeps the enumeration near-linear in the
/// number of nonempty intersections.
pub struct ProductQuery<'a> {
    pub left: &'a [Piece],
    pub right: &'a [Piece],
    pub common: &'a ConvexCell,
    pub mode: UnionMode,
    /// Centered ball radius applied to every cell.
    pub ball: Option<f64>,
}

struct Family {
    entries: Vec<(u64, Vec<f64>)>,
    index: HashMap<u64, usize>,
}

impl Family {
    fn new() -> Self {
        Family { entries: Vec::new(), index: HashMap::new() }
    }

    fn push(&mut self, mask: u64, w: Vec<f64>) {
        self.index.insert(mask, self.entries.len());
        self.entries.push((mask, w));
    }

    fn get(&self, mask: u64) -> Option<&[f64]> {
        self.index.get(&mask).map(|&i| self.entries[i].1.as_slice())
    }
}

struct ProductRun<'a, 'c> {
    q: &'a ProductQuery<'a>,
    left: Vec<usize>,
    right: Vec<usize>,
    probe: Probe<'c>,
    value: i64,
    /// When set, each counted intersection is recorded with its sign and its
    /// distance from the origin.
    distances: Option<Vec<(i64, f64)>>,
}

pub fn euler_of_product(q: &ProductQuery, cfg: &Config) -> Result<ChiResult> {
    let mut run = ProductRun::new(q, cfg)?;
    run.run()?;
    Ok(ChiResult { value: run.value, cells_probed: run.probe.probes })
}

/// Signed distances of all counted intersections of a ball-free compact-mode
/// product query; the Euler characteristic inside a centered ball of radius
/// `R` is `Σ sign·[dist ≤ R]`.
pub fn product_distance_profile(q: &ProductQuery, cfg: &Config) -> Result<Vec<(i64, f64)>> {
    if q.mode != UnionMode::CompactUnion || q.ball.is_some() {
        return Err(Error::InvalidInput("distance profiles need a ball-free compact query".into()));
    }
    let mut run = ProductRun::new(q, cfg)?;
    run.distances = Some(Vec::new());
    run.run()?;
    Ok(run.distances.unwrap_or_default())
}

/// The pairwise cells `L_i ∩ R_j ∩ common` of a product query, for
/// enumeration as a plain union.
pub fn product_pieces(q: &ProductQuery) -> Vec<Piece> {
    let mut out = Vec::with_capacity(q.left.len() * q.right.len());
    for l in q.left {
        for r in q.right {
            let mut cell = q.common.clone();
            cell.intersect(&l.cell);
            cell.intersect(&r.cell);
            if let Some(radius) = q.ball {
                cell.set_ball(Some(Ball { center: vec![0.0; cell.dim()], radius }));
            }
            out.push(Piece {
                cell,
                anchor: l.anchor.clone().or_else(|| r.anchor.clone()),
                origin_only: l.origin_only || r.origin_only,
            });
        }
    }
    out
}

impl<'a, 'c> ProductRun<'a, 'c> {
    fn new(q: &'a ProductQuery<'a>, cfg: &'c Config) -> Result<Self> {
        let keep = |p: &Piece| !(q.mode == UnionMode::Link && p.origin_only);
        let left: Vec<usize> = (0..q.left.len()).filter(|&i| keep(&q.left[i])).collect();
        let right: Vec<usize> = (0..q.right.len()).filter(|&j| keep(&q.right[j])).collect();
        if right.len() > 64 {
            return Err(Error::InvalidInput("at most 64 right-hand cells are supported".into()));
        }
        if q.mode == UnionMode::Link && left.iter().any(|&i| q.left[i].anchor.is_none()) {
            return Err(Error::InvalidAnchor("every left link cell needs an anchor cone".into()));
        }
        Ok(ProductRun { q, left, right, probe: Probe { cfg, mode: q.mode, ball: q.ball, probes: 0 }, value: 0, distances: None })
    }

    fn run(&mut self) -> Result<()> {
        if self.left.is_empty() || self.right.is_empty() {
            return Ok(());
        }
        let mut acc = self.q.common.clone();
        self.over_left(0, &mut acc, 1, None, None)
    }

    fn over_left(
        &mut self,
        start: usize,
        acc: &mut ConvexCell,
        sign: i64,
        parent: Option<&Family>,
        anchor: Option<&'a [f64]>,
    ) -> Result<()> {
        let q = self.q;
        for k in start..self.left.len() {
            let piece = &q.left[self.left[k]];
            let mark = acc.mark();
            acc.intersect(&piece.cell);
            let a = anchor.or(piece.anchor.as_ref().map(|a| a.row.as_slice()));
            let s = -sign;
            let mut fam = Family::new();
            self.over_right(0, acc, 0, None, parent, a, s, &mut fam)?;
            if !fam.entries.is_empty() {
                for (mask, _) in &fam.entries {
                    self.value += if mask.count_ones() % 2 == 1 { -s } else { s };
                }
                self.over_left(k + 1, acc, s, Some(&fam), a)?;
            }
            acc.truncate_to(mark);
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn over_right(
        &mut self,
        start: usize,
        cell: &mut ConvexCell,
        mask: u64,
        jw: Option<&[f64]>,
        parent: Option<&Family>,
        anchor: Option<&[f64]>,
        sign_left: i64,
        fam: &mut Family,
    ) -> Result<()> {
        let q = self.q;
        for t in start..self.right.len() {
            let nm = mask | (1u64 << t);
            let pw = match parent {
                Some(p) => match p.get(nm) {
                    Some(w) => Some(w),
                    None => continue,
                },
                None => None,
            };
            let mark = cell.mark();
            cell.intersect(&q.right[self.right[t]].cell);
            if let Some(w) = self.probe.test(cell, anchor, [pw, jw])? {
                if let Some(d) = self.distances.as_mut() {
                    let v = min_norm_distance(cell, &vec![0.0; cell.dim()], None, self.probe.cfg)?;
                    let s = if nm.count_ones() % 2 == 1 { -sign_left } else { sign_left };
                    d.push((s, v.distance.unwrap_or(f64::INFINITY)));
                }
                fam.push(nm, w.clone());
                self.over_right(t + 1, cell, nm, Some(&w), parent, anchor, sign_left, fam)?;
            }
            cell.truncate_to(mark);
        }
        Ok(())
    }
}

/// `χ(X ∩ (γY + δv) ∩ B(0, radius))`.
pub fn chi_slice(
    x: &ConicGerm,
    y: &ConicGerm,
    rotation: &Rotation,
    v: &[f64],
    delta: f64,
    radius: f64,
    cfg: &Config,
) -> Result<ChiResult> {
    if delta <= 0.0 || radius <= 0.0 {
        return Err(Error::InvalidInput("delta and radius must be positive".into()));
    }
    check_dims(x, y.ambient_dim(), v.len())?;
    let shift: Vec<f64> = v.iter().map(|c| c * delta).collect();
    let left = germ_pieces(x, None, None);
    let right = germ_pieces(y, Some(rotation), Some(&shift));
    let common = ConvexCell::new(x.ambient_dim());
    euler_of_product(
        &ProductQuery { left: &left, right: &right, common: &common, mode: UnionMode::CompactUnion, ball: Some(radius) },
        cfg,
    )
}

/// `lim_{δ→0⁺} χ(X ∩ (γY + δv) ∩ Bⁿ)`.
///
/// By conic scaling the slice at `δ` is the slice at `1` inside the ball of
/// radius `1/δ`; for all small `δ` that ball contains every nonempty
/// intersection, so the limit is the nerve of `X ∩ (γY + v)` without a ball.
pub fn chi_slice_limit(x: &ConicGerm, y: &ConicGerm, rotation: &Rotation, v: &[f64], cfg: &Config) -> Result<i64> {
    check_dims(x, y.ambient_dim(), v.len())?;
    match cfg.limit_mode {
        LimitMode::Exact => {
            let left = germ_pieces(x, None, None);
            let right = germ_pieces(y, Some(rotation), Some(v));
            let common = ConvexCell::new(x.ambient_dim());
            Ok(euler_of_product(
                &ProductQuery { left: &left, right: &right, common: &common, mode: UnionMode::CompactUnion, ball: None },
                cfg,
            )?
            .value)
        }
        LimitMode::Ladder => stabilized_chi_limit(
            |d| chi_slice(x, y, rotation, v, d, 1.0, cfg).map(|r| r.value),
            cfg.ladder_rungs,
        ),
    }
}

/// Signed distance profile of `X ∩ (γY + v)`; see [`product_distance_profile`].
pub fn slice_distance_profile(
    x: &ConicGerm,
    y: &ConicGerm,
    rotation: &Rotation,
    v: &[f64],
    cfg: &Config,
) -> Result<Vec<(i64, f64)>> {
    check_dims(x, y.ambient_dim(), v.len())?;
    let left = germ_pieces(x, None, None);
    let right = germ_pieces(y, Some(rotation), Some(v));
    let common = ConvexCell::new(x.ambient_dim());
    product_distance_profile(
        &ProductQuery { left: &left, right: &right, common: &common, mode: UnionMode::CompactUnion, ball: None },
        cfg,
    )
}

/// Evaluates a distance profile inside the centered ball of radius `r`.
pub fn profile_chi(profile: &[(i64, f64)], r: f64, cfg: &Config) -> Result<i64> {
    let mut v = 0;
    for &(s, d) in profile {
        if (d - r).abs() <= r * cfg.ball_margin {
            return Err(Error::DegenerateSample(format!("intersection at distance {d} on the ball boundary")));
        }
        if d <= r {
            v += s;
        }
    }
    Ok(v)
}

/// `χ(X ∩ H)` for an affine flat `H` (typically `H₀ + v`), nerve semantics
/// unless a centered ball radius is given.
pub fn chi_flat_slice(x: &ConicGerm, h: &AffineFlat, ball: Option<f64>, cfg: &Config) -> Result<ChiResult> {
    if h.ambient_dim() != x.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: x.ambient_dim(), found: h.ambient_dim() });
    }
    let left = germ_pieces(x, None, None);
    let right = [flat_piece(h)];
    let common = ConvexCell::new(x.ambient_dim());
    euler_of_product(&ProductQuery { left: &left, right: &right, common: &common, mode: UnionMode::CompactUnion, ball }, cfg)
}

/// `χ(Lk(X ∩ γY ∩ {⟨c_i,x⟩ = 0}))`; without a partner, `χ(Lk(X ∩ ...))`.
pub fn chi_link_section(
    x: &ConicGerm,
    extra_equalities: &[Vec<f64>],
    partner: Option<(&ConicGerm, &Rotation)>,
    cfg: &Config,
) -> Result<ChiResult> {
    let n = x.ambient_dim();
    let mut common = ConvexCell::new(n);
    for c in extra_equalities {
        if c.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: c.len() });
        }
        common.push_equality(c, 0.0);
    }
    let left = germ_pieces(x, None, None);
    let right = match partner {
        Some((y, r)) => {
            check_dims(x, y.ambient_dim(), r.dim())?;
            germ_pieces(y, Some(r), None)
        }
        None => vec![Piece::plain(ConvexCell::new(n))],
    };
    euler_of_product(&ProductQuery { left: &left, right: &right, common: &common, mode: UnionMode::Link, ball: None }, cfg)
}

/// `χ(X ∩ γP)` for a compact polytope union `P` (no translation).
pub fn chi_germ_polytopes(x: &ConicGerm, p: &PolytopeUnion, rotation: &Rotation, cfg: &Config) -> Result<ChiResult> {
    if p.ambient_dim() != x.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: x.ambient_dim(), found: p.ambient_dim() });
    }
    let left = germ_pieces(x, None, None);
    let right = polytope_pieces(p, Some(rotation));
    let common = ConvexCell::new(x.ambient_dim());
    euler_of_product(&ProductQuery { left: &left, right: &right, common: &common, mode: UnionMode::CompactUnion, ball: None }, cfg)
}

/// `χ(P ∩ H)` for a compact polytope union and a flat through 0 (or `χ(P)`
/// when `h` is `None`).
pub fn chi_polytopes_flat(p: &PolytopeUnion, h: Option<&AffineFlat>, cfg: &Config) -> Result<ChiResult> {
    let left = polytope_pieces(p, None);
    let n = p.ambient_dim();
    let right = match h {
        Some(h) => vec![flat_piece(h)],
        None => vec![Piece::plain(ConvexCell::new(n))],
    };
    let common = ConvexCell::new(n);
    euler_of_product(&ProductQuery { left: &left, right: &right, common: &common, mode: UnionMode::CompactUnion, ball: None }, cfg)
}

fn check_dims(x: &ConicGerm, other: usize, v: usize) -> Result<()> {
    let n = x.ambient_dim();
    if other != n {
        return Err(Error::DimensionMismatch { expected: n, found: other });
    }
    if v != n {
        return Err(Error::DimensionMismatch { expected: n, found: v });
    }
    Ok(())
}

/// Rung `r` of the δ ladder.
pub fn ladder_delta(r: usize) -> f64 {
    0.5 * 0.25f64.powi(r as i32)
}

/// Evaluates on `δ_r = 0.5·4^{−r}` and returns the value at the first pair
/// of consecutive agreeing rungs.
pub fn stabilized_chi_limit<F>(mut evaluator: F, rungs: usize) -> Result<i64>
where
    F: FnMut(f64) -> Result<i64>,
{
    let mut seen = Vec::with_capacity(rungs);
    for r in 0..rungs {
        let v = evaluator(ladder_delta(r))?;
        if seen.last() == Some(&v) {
            return Ok(v);
        }
        seen.push(v);
    }
    Err(Error::Unstable { values: seen })
}

/// Evaluates every rung and returns the finest value, provided the last two
/// rungs agree.
pub fn tail_stabilized_chi_limit<F>(mut evaluator: F, rungs: usize) -> Result<i64>
where
    F: FnMut(f64) -> Result<i64>,
{
    let values = (0..rungs).map(|r| evaluator(ladder_delta(r))).collect::<Result<Vec<_>>>()?;
    match values.as_slice() {
        [.., a, b] if a == b => Ok(*b),
        _ => Err(Error::Unstable { values }),
    }
}

/// `E_u χ(Lk(X ∩ H ∩ u^⊥))` for `u` uniform on the sphere and a 2-plane `H`
/// through 0.
///
/// `u^⊥ ∩ H` is a uniformly random line of `H`, whose two unit points each hit
/// the arcs of `X ∩ H ∩ S¹` with probability `|arcs|/2π`; the mean is
/// `|arcs|/π`. Only full-dimensional cones leave arcs of positive length.
pub fn planar_section_mean(x: &ConicGerm, h: &AffineFlat, cfg: &Config) -> Result<f64> {
    if h.dim() != 2 {
        return Err(Error::InvalidInput("planar section needs a 2-plane".into()));
    }
    let b1 = h.basis()[0].as_slice();
    let b2 = h.basis()[1].as_slice();
    let mut arcs: Vec<(f64, f64)> = Vec::new();
    for cone in x.cones() {
        let mut lower_dim = false;
        for c in cone.complement() {
            let p = (dot(c.as_slice(), b1).powi(2) + dot(c.as_slice(), b2).powi(2)).sqrt();
            if p < cfg.tol_degenerate {
                return Err(Error::DegenerateSample("plane nearly inside a cone span".into()));
            }
            lower_dim = true;
        }
        if lower_dim || cone.rank() == 0 {
            continue;
        }
        let dual = cone.dual();
        let n = cone.ambient_dim();
        let mut rows: Vec<[f64; 2]> = Vec::with_capacity(cone.rank());
        for i in 0..cone.rank() {
            // x ∈ cone ⇔ G⁺x ≥ 0; in plane coordinates the row is −(G⁺_i·b1, G⁺_i·b2)·y ≤ 0.
            let g: Vec<f64> = (0..n).map(|l| dual[(i, l)]).collect();
            let m = [-dot(&g, b1), -dot(&g, b2)];
            let nm = (m[0] * m[0] + m[1] * m[1]).sqrt();
            if nm < cfg.tol_degenerate {
                return Err(Error::DegenerateSample("facet normal nearly orthogonal to the plane".into()));
            }
            rows.push([m[0] / nm, m[1] / nm]);
        }
        if let Some(arc) = planar_arc(&rows, cfg)? {
            arcs.push(arc);
        }
    }
    Ok(union_length(&arcs) / std::f64::consts::PI)
}

/// The arc `{θ : ⟨m_r, (cos θ, sin θ)⟩ ≤ 0 ∀r}` as `(start, length)`, or
/// `None` when it has no interior.
fn planar_arc(rows: &[[f64; 2]], cfg: &Config) -> Result<Option<(f64, f64)>> {
    let feasible = |t: [f64; 2]| rows.iter().map(|m| m[0] * t[0] + m[1] * t[1]).fold(f64::NEG_INFINITY, f64::max);
    let mut cands: Vec<[f64; 2]> = Vec::new();
    for m in rows {
        for t in [[-m[1], m[0]], [m[1], -m[0]]] {
            let f = feasible(t);
            if f <= 1e-12 {
                cands.push(t);
            } else if f < cfg.tol_degenerate {
                return Err(Error::DegenerateSample("arc endpoint inside the degeneracy band".into()));
            }
        }
    }
    let mut best: Option<([f64; 2], [f64; 2], f64)> = None;
    for (i, p) in cands.iter().enumerate() {
        for q in &cands[i + 1..] {
            let ang = (p[0] * q[0] + p[1] * q[1]).clamp(-1.0, 1.0).acos();
            if best.is_none_or(|b| ang > b.2) {
                best = Some((*p, *q, ang));
            }
        }
    }
    let Some((p, q, ang)) = best else { return Ok(None) };
    if ang <= 1e-12 {
        return Ok(None);
    }
    if ang < cfg.tol_degenerate || std::f64::consts::PI - ang < cfg.tol_degenerate {
        return Err(Error::DegenerateSample("arc length inside the degeneracy band".into()));
    }
    let cross = p[0] * q[1] - p[1] * q[0];
    let start = if cross > 0.0 { p } else { q };
    Ok(Some((start[1].atan2(start[0]).rem_euclid(std::f64::consts::TAU), ang)))
}

/// Total length of a union of circular arcs `(start, length)` with `length < 2π`.
fn union_length(arcs: &[(f64, f64)]) -> f64 {
    let tau = std::f64::consts::TAU;
    let mut iv: Vec<(f64, f64)> = Vec::new();
    for &(s, l) in arcs {
        let e = s + l;
        if e > tau {
            iv.push((s, tau));
            iv.push((0.0, e - tau));
        } else {
            iv.push((s, e));
        }
    }
    iv.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut total = 0.0;
    let mut cur: Option<(f64, f64)> = None;
    for (s, e) in iv {
        match cur {
            Some((cs, ce)) if s <= ce => cur = Some((cs, ce.max(e))),
            Some((cs, ce)) => {
                total += ce - cs;
                cur = Some((s, e));
            }
            None => cur = Some((s, e)),
        }
    }
    if let Some((cs, ce)) = cur {
        total += ce - cs;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::VecN;

    fn germ(n: usize, cones: &[&[&[f64]]]) -> ConicGerm {
        let c: Vec<Vec<Vec<f64>>> = cones.iter().map(|g| g.iter().map(|v| v.to_vec()).collect()).collect();
        ConicGerm::from_generators(n, &c, "t").unwrap()
    }

    fn cfg() -> Config {
        Config::default()
    }

    fn plane() -> ConicGerm {
        germ(
            2,
            &[
                &[&[1.0, 0.0], &[0.0, 1.0]],
                &[&[-1.0, 0.0], &[0.0, 1.0]],
                &[&[-1.0, 0.0], &[0.0, -1.0]],
                &[&[1.0, 0.0], &[0.0, -1.0]],
            ],
        )
    }

    fn boxed(lo: [f64; 2], hi: [f64; 2]) -> Piece {
        let mut c = ConvexCell::new(2);
        c.push_inequality(&[1.0, 0.0], hi[0]);
        c.push_inequality(&[-1.0, 0.0], -lo[0]);
        c.push_inequality(&[0.0, 1.0], hi[1]);
        c.push_inequality(&[0.0, -1.0], -lo[1]);
        Piece::plain(c)
    }

    #[test]
    fn disjoint_compact_cells() {
        let q = CellUnionQuery { pieces: vec![boxed([0.0, 0.0], [1.0, 1.0]), boxed([2.0, 0.0], [3.0, 1.0])], mode: UnionMode::CompactUnion };
        assert_eq!(euler_of_union(&q, &cfg()).unwrap().value, 2);
        assert_eq!(euler_full_lattice(&q, &cfg()).unwrap().value, 2);
    }

    #[test]
    fn empty_query_is_zero() {
        let q = CellUnionQuery { pieces: vec![], mode: UnionMode::CompactUnion };
        assert_eq!(euler_of_union(&q, &cfg()).unwrap().value, 0);
    }

    #[test]
    fn plane_link_is_circle() {
        let x = plane();
        let q = CellUnionQuery { pieces: germ_pieces(&x, None, None), mode: UnionMode::Link };
        assert_eq!(euler_of_union(&q, &cfg()).unwrap().value, 0);
        assert_eq!(euler_full_lattice(&q, &cfg()).unwrap().value, 0);
        assert_eq!(chi_link_section(&x, &[], None, &cfg()).unwrap().value, 0);
    }

    #[test]
    fn quadrant_link_is_arc() {
        let x = germ(2, &[&[&[1.0, 0.0], &[0.0, 1.0]]]);
        assert_eq!(chi_link_section(&x, &[], None, &cfg()).unwrap().value, 1);
    }

    #[test]
    fn generic_line_sections() {
        let h = vec![0.3f64.sin(), -0.3f64.cos()];
        let half = germ(2, &[&[&[1.0, 0.0]]]);
        assert_eq!(chi_link_section(&half, std::slice::from_ref(&h), None, &cfg()).unwrap().value, 0);
        assert_eq!(chi_link_section(&plane(), &[h], None, &cfg()).unwrap().value, 2);
    }

    #[test]
    fn transversal_lines_meet_once() {
        let xa = germ(2, &[&[&[1.0, 0.0]], &[&[-1.0, 0.0]]]);
        let ya = germ(2, &[&[&[0.0, 1.0]], &[&[0.0, -1.0]]]);
        let r = Rotation::plane(2, 0, 1, 0.4);
        let v = [0.6, 0.8];
        assert_eq!(chi_slice(&xa, &ya, &r, &v, 0.01, 1.0, &cfg()).unwrap().value, 1);
        assert_eq!(chi_slice_limit(&xa, &ya, &r, &v, &cfg()).unwrap(), 1);
    }

    #[test]
    fn quadrant_against_plane_is_convex() {
        let q = germ(2, &[&[&[1.0, 0.0], &[0.0, 1.0]]]);
        let r = Rotation::plane(2, 0, 1, 1.1);
        let v = [0.28, -0.96];
        assert_eq!(chi_slice(&q, &plane(), &r, &v, 0.01, 1.0, &cfg()).unwrap().value, 1);
        assert_eq!(chi_slice_limit(&q, &plane(), &r, &v, &cfg()).unwrap(), 1);
    }

    #[test]
    fn origin_misses_translates() {
        let o = ConicGerm::new(2, vec![SimplicialCone::new(2, vec![]).unwrap()], "o").unwrap();
        let r = Rotation::plane(2, 0, 1, 0.2);
        assert_eq!(chi_slice(&o, &plane(), &r, &[0.6, 0.8], 0.01, 1.0, &cfg()).unwrap().value, 1);
        let q = germ(2, &[&[&[1.0, 0.0], &[0.0, 1.0]]]);
        assert_eq!(chi_slice(&o, &q, &r, &[0.6, 0.8], 0.01, 1.0, &cfg()).unwrap().value, 0);
    }

    #[test]
    fn ladder_rules() {
        assert_eq!(stabilized_chi_limit(|_| Ok(3), 8).unwrap(), 3);
        let mut calls = 0;
        let v = stabilized_chi_limit(
            |_| {
                calls += 1;
                Ok(if calls == 1 { 2 } else { 1 })
            },
            8,
        )
        .unwrap();
        assert_eq!(v, 1);
        let mut k = 0;
        let err = stabilized_chi_limit(
            |_| {
                k += 1;
                Ok(k)
            },
            4,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Unstable { .. }));
    }

    #[test]
    fn conic_scene_is_rung_independent() {
        let q = germ(2, &[&[&[1.0, 0.0], &[0.0, 1.0]]]);
        let l = germ(2, &[&[&[1.0, 0.0]], &[&[-1.0, 0.0]]]);
        let r = Rotation::plane(2, 0, 1, 2.0);
        let v = [-0.6, 0.8];
        let a = chi_slice(&q, &l, &r, &v, ladder_delta(0), 1.0, &cfg()).unwrap().value;
        let b = chi_slice(&q, &l, &r, &v, ladder_delta(1), 1.0, &cfg()).unwrap().value;
        assert_eq!(a, b);
    }

    #[test]
    fn scale_invariance_of_slices() {
        let q = germ(2, &[&[&[1.0, 0.0], &[0.0, 1.0]]]);
        let l = germ(2, &[&[&[1.0, 0.0]], &[&[-1.0, 0.0]]]);
        let r = Rotation::plane(2, 0, 1, 2.3);
        let v = [0.6, -0.8];
        let base = chi_slice(&q, &l, &r, &v, 0.05, 1.0, &cfg()).unwrap().value;
        for lam in [0.5, 2.0] {
            assert_eq!(chi_slice(&q, &l, &r, &v, 0.05 * lam, lam, &cfg()).unwrap().value, base);
        }
    }

    #[test]
    fn distance_profile_matches_ball_slices() {
        let x = germ(2, &[&[&[1.0, 0.0], &[0.0, 1.0]], &[&[-1.0, 0.2]]]);
        let y = germ(2, &[&[&[1.0, 0.0]], &[&[-1.0, 0.0]], &[&[0.3, 1.0], &[1.0, 0.1]]]);
        for step in 0..20 {
            let th = 0.17 + 0.31 * step as f64;
            let r = Rotation::plane(2, 0, 1, th);
            let v = [(1.3 * th).cos(), (1.3 * th).sin()];
            let prof = slice_distance_profile(&x, &y, &r, &v, &cfg()).unwrap();
            for rung in 0..4 {
                let d = ladder_delta(rung);
                let direct = chi_slice(&x, &y, &r, &v, d, 1.0, &cfg());
                let viaprof = profile_chi(&prof, 1.0 / d, &cfg());
                if let (Ok(a), Ok(b)) = (direct, viaprof) {
                    assert_eq!(a.value, b);
                }
            }
        }
    }

    #[test]
    fn planar_section_of_quadrant_in_r3() {
        // Octant cut by the plane z = 0 is a quarter-disc: mean = (π/2)/π.
        let o = germ(3, &[&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]]);
        let h = AffineFlat::linear_span(3, &[VecN::from_column_slice(&[1.0, 0.0, 0.0]), VecN::from_column_slice(&[0.0, 1.0, 0.2])])
            .unwrap();
        let m = planar_section_mean(&o, &h, &cfg()).unwrap();
        assert!((m - 0.5).abs() < 1e-12, "{m}");
    }

    #[test]
    fn arc_union_wraps() {
        let tau = std::f64::consts::TAU;
        let l = union_length(&[(tau - 0.5, 1.0), (0.25, 0.5), (3.0, 0.1)]);
        assert!((l - 1.35).abs() < 1e-12);
    }
}
