//! Cross-checks of the fast paths: pruned against full-lattice Euler
//! enumeration, float LP verdicts against exact rational feasibility.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::euler::{
    euler_full_lattice, euler_of_product, euler_of_union, flat_piece, germ_pieces, product_pieces, CellUnionQuery,
    Piece, ProductQuery, UnionMode,
};
use crate::feasibility::exact::{rational_feasible, ratio, RationalCell};
use crate::feasibility::{polyhedron_nonempty, Ball, ConvexCell, Status};
use crate::geometry::{ConicGerm, SimplicialCone, VecN};
use crate::sampling::{sample_grassmannian, sample_rotation, sample_sphere, SampleStream};
use crate::scene_io::Scene;

/// Largest number of cells a full-lattice comparison accepts.
pub const MAX_CELLS: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    pub label: String,
    pub pruned: i64,
    pub full: i64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EulerOracleSummary {
    pub queries: u64,
    pub agreed: u64,
    /// Draws skipped because a predicate landed in the degeneracy band.
    pub degenerate: u64,
    /// First few disagreements.
    pub mismatches: Vec<Mismatch>,
}

impl EulerOracleSummary {
    pub fn all_agree(&self) -> bool {
        self.agreed + self.degenerate == self.queries
    }

    fn record(&mut self, label: &str, r: Result<(i64, i64)>) -> Result<()> {
        self.queries += 1;
        match r {
            Ok((a, b)) if a == b => self.agreed += 1,
            Ok((a, b)) => {
                if self.mismatches.len() < 20 {
                    self.mismatches.push(Mismatch { label: label.into(), pruned: a, full: b });
                }
            }
            Err(e) if e.is_resamplable() => self.degenerate += 1,
            Err(e) => return Err(e),
        }
        Ok(())
    }
}

/// `(pruned, full)` Euler characteristics of a union query.
pub fn compare_union(q: &CellUnionQuery, cfg: &Config) -> Result<(i64, i64)> {
    Ok((euler_of_union(q, cfg)?.value, euler_full_lattice(q, cfg)?.value))
}

/// `(product, full)` for a product query, the latter over its pairwise cells.
pub fn compare_product(q: &ProductQuery, cfg: &Config) -> Result<(i64, i64)> {
    let flat = CellUnionQuery { pieces: product_pieces(q), mode: q.mode };
    Ok((euler_of_product(q, cfg)?.value, euler_full_lattice(&flat, cfg)?.value))
}

fn over_budget(cells: usize) -> Result<()> {
    if cells > MAX_CELLS {
        return Err(Error::BudgetExceeded { budget: 1 << MAX_CELLS });
    }
    Ok(())
}

/// Random slices, sections and links of every germ and germ pair of a scene,
/// each computed by both enumerations.
pub fn scene_euler_oracle(scene: &Scene, rounds: u64, seed: u64, cfg: &Config) -> Result<EulerOracleSummary> {
    let germs: Vec<(&String, &ConicGerm)> = scene.germs.iter().collect();
    for (_, x) in &germs {
        for (_, y) in &germs {
            if x.ambient_dim() == y.ambient_dim() {
                over_budget(x.cones().len() * y.cones().len())?;
            }
        }
    }
    let mut out = EulerOracleSummary::default();
    for i in 0..rounds {
        let mut rng = SampleStream::new(seed, i).rng();
        for (xn, x) in &germs {
            let n = x.ambient_dim();
            let left = germ_pieces(x, None, None);
            let k = rng.random_range(0..n);
            let h = sample_grassmannian(&mut rng, n, k);
            let v = sample_sphere(&mut rng, n);
            let right = [flat_piece(&h.translated(&v))];
            let empty = ConvexCell::new(n);
            let q = ProductQuery { left: &left, right: &right, common: &empty, mode: UnionMode::CompactUnion, ball: None };
            out.record(&format!("flat slice of {xn}"), compare_product(&q, cfg))?;

            let k = rng.random_range(1..=n);
            let h = sample_grassmannian(&mut rng, n, k);
            let mut common = ConvexCell::new(n);
            for c in h.complement() {
                common.push_equality(c.as_slice(), 0.0);
            }
            let plain = [Piece::plain(ConvexCell::new(n))];
            let q = ProductQuery { left: &left, right: &plain, common: &common, mode: UnionMode::Link, ball: None };
            out.record(&format!("link section of {xn}"), compare_product(&q, cfg))?;

            for (yn, y) in &germs {
                if y.ambient_dim() != n {
                    continue;
                }
                let g = sample_rotation(&mut rng, n);
                let v = sample_sphere(&mut rng, n);
                let shift: Vec<f64> = v.iter().map(|c| 0.3 * c).collect();
                let right = germ_pieces(y, Some(&g), Some(v.as_slice()));
                let q = ProductQuery { left: &left, right: &right, common: &empty, mode: UnionMode::CompactUnion, ball: None };
                out.record(&format!("slice {xn} ∩ γ{yn}"), compare_product(&q, cfg))?;
                let right = germ_pieces(y, Some(&g), Some(&shift));
                let q =
                    ProductQuery { left: &left, right: &right, common: &empty, mode: UnionMode::CompactUnion, ball: Some(1.0) };
                out.record(&format!("ball slice {xn} ∩ γ{yn}"), compare_product(&q, cfg))?;
                let right = germ_pieces(y, Some(&g), None);
                let q = ProductQuery { left: &left, right: &right, common: &empty, mode: UnionMode::Link, ball: None };
                out.record(&format!("link {xn} ∩ γ{yn}"), compare_product(&q, cfg))?;
            }
        }
    }
    Ok(out)
}

/// Random box-with-cuts cells in `[-1,1]^dim`, optionally under a shared
/// ball, or random simplicial cones in link mode.
pub fn random_union_query(rng: &mut ChaCha8Rng, dim: usize, m: usize) -> CellUnionQuery {
    match rng.random_range(0..3) {
        0 | 1 => {
            let ball = if rng.random_bool(0.5) {
                Some(Ball { center: vec![0.0; dim], radius: rng.random_range(0.5..1.5) })
            } else {
                None
            };
            let pieces = (0..m)
                .map(|_| {
                    let mut cell = ConvexCell::new(dim);
                    let c: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
                    for (l, cl) in c.iter().enumerate() {
                        let w = rng.random_range(0.1..0.8);
                        let mut e = vec![0.0; dim];
                        e[l] = 1.0;
                        cell.push_inequality(&e, cl + w);
                        e[l] = -1.0;
                        cell.push_inequality(&e, -(cl - w));
                    }
                    for _ in 0..rng.random_range(0..3) {
                        let a = sample_sphere(rng, dim);
                        let b = a.iter().zip(&c).map(|(x, y)| x * y).sum::<f64>() + rng.random_range(-0.2..0.6);
                        cell.push_inequality(a.as_slice(), b);
                    }
                    cell.set_ball(ball.clone());
                    Piece::plain(cell)
                })
                .collect();
            CellUnionQuery { pieces, mode: UnionMode::CompactUnion }
        }
        _ => {
            let pieces = (0..m)
                .map(|_| loop {
                    let k = rng.random_range(1..=dim);
                    let gens: Vec<VecN> = (0..k).map(|_| sample_sphere(rng, dim)).collect();
                    if let Ok(c) = SimplicialCone::new(dim, gens) {
                        break Piece::cone(&c, None, None);
                    }
                })
                .collect();
            CellUnionQuery { pieces, mode: UnionMode::Link }
        }
    }
}

/// Pruned against full enumeration on `queries` random unions in `R²`/`R³`
/// with 1 to [`MAX_CELLS`] cells.
pub fn random_euler_oracle(queries: u64, seed: u64, cfg: &Config) -> Result<EulerOracleSummary> {
    let mut out = EulerOracleSummary::default();
    for i in 0..queries {
        let mut rng = SampleStream::new(seed, i).rng();
        let dim = rng.random_range(2..=3);
        let m = rng.random_range(1..=MAX_CELLS);
        let q = random_union_query(&mut rng, dim, m);
        out.record(&format!("random query {i} (R^{dim}, {m} cells)"), compare_union(&q, cfg))?;
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeasibilityOracleSummary {
    pub instances: u64,
    pub agreed: u64,
    /// Float verdicts of DEGENERATE (never counted as agreement).
    pub flagged_degenerate: u64,
    /// Definite float verdicts contradicting the exact one.
    pub disagreed: u64,
}

impl FeasibilityOracleSummary {
    pub fn agreement(&self) -> f64 {
        self.agreed as f64 / self.instances.max(1) as f64
    }
}

/// A random cell with small rational coefficients in dimension 2 to 4.
pub fn random_rational_cell(rng: &mut ChaCha8Rng) -> RationalCell {
    let dim = rng.random_range(2..=4);
    let mut cell = RationalCell::new(dim);
    let q = |rng: &mut ChaCha8Rng| ratio(rng.random_range(-4..=4), rng.random_range(1..=3));
    for _ in 0..rng.random_range(2..=8) {
        let a = (0..dim).map(|_| q(rng)).collect();
        cell.inequalities.push((a, q(rng)));
    }
    if rng.random_bool(0.3) {
        let a = (0..dim).map(|_| q(rng)).collect();
        cell.equalities.push((a, q(rng)));
    }
    cell
}

pub fn feasibility_oracle(instances: u64, seed: u64, cfg: &Config) -> Result<FeasibilityOracleSummary> {
    let mut out = FeasibilityOracleSummary::default();
    for i in 0..instances {
        let mut rng = SampleStream::new(seed, i).rng();
        let cell = random_rational_cell(&mut rng);
        let exact = rational_feasible(&cell);
        out.instances += 1;
        match polyhedron_nonempty(&cell.to_cell(), cfg) {
            Ok(v) => match (v.status, exact) {
                (Status::Nonempty, true) | (Status::Empty, false) => out.agreed += 1,
                (Status::Degenerate, _) => out.flagged_degenerate += 1,
                _ => out.disagreed += 1,
            },
            Err(e) if e.is_resamplable() => out.flagged_degenerate += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}
