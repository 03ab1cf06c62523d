//! Ambient linear algebra types: simplicial cones, conic germs, flats,
//! rotations and polytope unions.

use nalgebra::{DMatrix, DVector};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::linalg::{column_range, orthonormal_complement, orthonormality_residual};

pub type VecN = DVector<f64>;

/// A linear constraint row `⟨a, x⟩ (≤ | =) b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub normal: VecN,
    pub offset: f64,
}

impl Row {
    pub fn new(normal: VecN, offset: f64) -> Self {
        Row { normal, offset }
    }
}

/// Closed cone spanned by linearly independent generators.
///
/// Membership: `x ∈ cone` iff `P·x = x` and `G⁺·x ≥ 0`, where `P` projects
/// onto the span and `G⁺` is the pseudo-inverse of the unit-normalized
/// generator matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplicialCone {
    ambient_dim: usize,
    generators: Vec<VecN>,
    projector: DMatrix<f64>,
    dual: DMatrix<f64>,
    complement: Vec<VecN>,
}

impl SimplicialCone {
    pub fn new(ambient_dim: usize, generators: Vec<VecN>) -> Result<Self> {
        Self::with_cutoff(ambient_dim, generators, Config::default().rank_cutoff)
    }

    pub fn with_cutoff(ambient_dim: usize, generators: Vec<VecN>, cutoff: f64) -> Result<Self> {
        if ambient_dim == 0 {
            return Err(Error::InvalidInput("ambient dimension must be at least 1".into()));
        }
        for g in &generators {
            if g.len() != ambient_dim {
                return Err(Error::DimensionMismatch { expected: ambient_dim, found: g.len() });
            }
            if !g.iter().all(|v| v.is_finite()) {
                return Err(Error::InvalidInput("non-finite generator entry".into()));
            }
        }
        let k = generators.len();
        if k > ambient_dim {
            return Err(Error::RankDeficient { ratio: 0.0 });
        }
        if k == 0 {
            let complement = (0..ambient_dim)
                .map(|i| {
                    let mut e = VecN::zeros(ambient_dim);
                    e[i] = 1.0;
                    e
                })
                .collect();
            return Ok(SimplicialCone {
                ambient_dim,
                generators,
                projector: DMatrix::zeros(ambient_dim, ambient_dim),
                dual: DMatrix::zeros(0, ambient_dim),
                complement,
            });
        }
        let mut g = DMatrix::<f64>::zeros(ambient_dim, k);
        for (j, v) in generators.iter().enumerate() {
            let nv = v.norm();
            if nv == 0.0 {
                return Err(Error::RankDeficient { ratio: 0.0 });
            }
            g.set_column(j, &(v / nv));
        }
        let svd = g.clone().svd(true, true);
        let s = &svd.singular_values;
        let smax = s.iter().cloned().fold(0.0, f64::max);
        let smin = s.iter().cloned().fold(f64::INFINITY, f64::min);
        if smin < cutoff * smax {
            return Err(Error::RankDeficient { ratio: smin / smax });
        }
        let u = svd.u.expect("U requested");
        let vt = svd.v_t.expect("V requested");
        let sinv = DMatrix::from_diagonal(&s.map(|x| 1.0 / x));
        let dual = vt.transpose() * sinv * u.transpose();
        let projector = &u * u.transpose();
        let span: Vec<VecN> = (0..k).map(|i| u.column(i).into_owned()).collect();
        let complement = orthonormal_complement(&span, ambient_dim);
        Ok(SimplicialCone { ambient_dim, generators, projector, dual, complement })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// Number of generators, which is the dimension of the cone.
    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[VecN] {
        &self.generators
    }

    pub fn projector(&self) -> &DMatrix<f64> {
        &self.projector
    }

    /// Rows of `G⁺` (one per generator).
    pub fn dual(&self) -> &DMatrix<f64> {
        &self.dual
    }

    /// Orthonormal basis of the orthogonal complement of the span.
    pub fn complement(&self) -> &[VecN] {
        &self.complement
    }

    pub fn contains(&self, x: &VecN, tol: f64) -> bool {
        let scale = x.norm().max(1.0);
        if self.complement.iter().any(|c| c.dot(x).abs() > tol * scale) {
            return false;
        }
        (0..self.rank()).all(|i| self.dual.row(i).transpose().dot(x) >= -tol * scale)
    }

    /// Inequalities `⟨a,x⟩ ≤ 0` describing the cone inside its span.
    pub fn inequalities(&self) -> Vec<Row> {
        (0..self.rank())
            .map(|i| Row::new(-self.dual.row(i).transpose(), 0.0))
            .collect()
    }

    /// Equalities `⟨c,x⟩ = 0` cutting out the span.
    pub fn equalities(&self) -> Vec<Row> {
        self.complement.iter().map(|c| Row::new(c.clone(), 0.0)).collect()
    }

    /// `1ᵀG⁺`: strictly positive on every nonzero point of the cone.
    pub fn normalizer(&self) -> VecN {
        let mut s = VecN::zeros(self.ambient_dim);
        for i in 0..self.rank() {
            s += self.dual.row(i).transpose();
        }
        s
    }

    /// Image under a rotation; caches are transported rather than recomputed.
    pub fn rotated(&self, r: &Rotation) -> SimplicialCone {
        let m = r.matrix();
        SimplicialCone {
            ambient_dim: self.ambient_dim,
            generators: self.generators.iter().map(|g| m * g).collect(),
            projector: m * &self.projector * m.transpose(),
            dual: &self.dual * m.transpose(),
            complement: self.complement.iter().map(|c| m * c).collect(),
        }
    }
}

/// Germ at the origin represented as a finite union of simplicial cones.
#[derive(Debug, Clone, PartialEq)]
pub struct ConicGerm {
    ambient_dim: usize,
    cones: Vec<SimplicialCone>,
    pub label: String,
}

impl ConicGerm {
    pub fn new(ambient_dim: usize, cones: Vec<SimplicialCone>, label: impl Into<String>) -> Result<Self> {
        if ambient_dim == 0 {
            return Err(Error::InvalidInput("ambient dimension must be at least 1".into()));
        }
        for c in &cones {
            if c.ambient_dim() != ambient_dim {
                return Err(Error::DimensionMismatch { expected: ambient_dim, found: c.ambient_dim() });
            }
        }
        Ok(ConicGerm { ambient_dim, cones, label: label.into() })
    }

    /// Convenience constructor from raw generator lists.
    pub fn from_generators(ambient_dim: usize, cones: &[Vec<Vec<f64>>], label: &str) -> Result<Self> {
        let built = cones
            .iter()
            .map(|gens| {
                SimplicialCone::new(
                    ambient_dim,
                    gens.iter().map(|g| VecN::from_column_slice(g)).collect(),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        ConicGerm::new(ambient_dim, built, label)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn cones(&self) -> &[SimplicialCone] {
        &self.cones
    }

    /// Structural dimension: largest generator count (0 for the empty germ).
    pub fn dim(&self) -> usize {
        self.cones.iter().map(|c| c.rank()).max().unwrap_or(0)
    }

    pub fn contains(&self, x: &VecN, tol: f64) -> bool {
        self.cones.iter().any(|c| c.contains(x, tol))
    }
}

pub fn rotate_germ(r: &Rotation, x: &ConicGerm) -> Result<ConicGerm> {
    if r.dim() != x.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: x.ambient_dim(), found: r.dim() });
    }
    Ok(ConicGerm {
        ambient_dim: x.ambient_dim,
        cones: x.cones.iter().map(|c| c.rotated(r)).collect(),
        label: x.label.clone(),
    })
}

/// Tangent cone at the origin. A conic set is its own tangent cone.
pub fn tangent_cone(x: &ConicGerm) -> ConicGerm {
    x.clone()
}

/// `basepoint + span(basis)` with orthonormal basis and complement.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineFlat {
    basepoint: VecN,
    basis: Vec<VecN>,
    complement: Vec<VecN>,
}

impl AffineFlat {
    /// Flat through the origin spanned by `vectors` (orthonormalized here).
    pub fn linear_span(ambient_dim: usize, vectors: &[VecN]) -> Result<Self> {
        for v in vectors {
            if v.len() != ambient_dim {
                return Err(Error::DimensionMismatch { expected: ambient_dim, found: v.len() });
            }
        }
        let mut m = DMatrix::<f64>::zeros(ambient_dim, vectors.len());
        for (j, v) in vectors.iter().enumerate() {
            m.set_column(j, v);
        }
        let info = column_range(&m, Config::default().rank_cutoff);
        if info.range.len() != vectors.len() {
            return Err(Error::RankDeficient { ratio: info.min_ratio });
        }
        // Keep the orientation of the given vectors where possible.
        let mut basis: Vec<VecN> = Vec::new();
        for v in vectors {
            let mut r = v.clone();
            for _ in 0..2 {
                for q in &basis {
                    let c = q.dot(&r);
                    r.axpy(-c, q, 1.0);
                }
            }
            let nr = r.norm();
            basis.push(r / nr);
        }
        let complement = orthonormal_complement(&basis, ambient_dim);
        Ok(AffineFlat { basepoint: VecN::zeros(ambient_dim), basis, complement })
    }

    /// Builds a flat from an orthonormal frame; the first `dim` columns span it.
    pub fn from_frame(frame: &DMatrix<f64>, dim: usize) -> Self {
        let n = frame.nrows();
        AffineFlat {
            basepoint: VecN::zeros(n),
            basis: (0..dim).map(|i| frame.column(i).into_owned()).collect(),
            complement: (dim..n).map(|i| frame.column(i).into_owned()).collect(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.basepoint.len()
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basepoint(&self) -> &VecN {
        &self.basepoint
    }

    pub fn basis(&self) -> &[VecN] {
        &self.basis
    }

    pub fn complement(&self) -> &[VecN] {
        &self.complement
    }

    pub fn translated(&self, v: &VecN) -> AffineFlat {
        AffineFlat {
            basepoint: &self.basepoint + v,
            basis: self.basis.clone(),
            complement: self.complement.clone(),
        }
    }

    pub fn rotated(&self, r: &Rotation) -> AffineFlat {
        let m = r.matrix();
        AffineFlat {
            basepoint: m * &self.basepoint,
            basis: self.basis.iter().map(|b| m * b).collect(),
            complement: self.complement.iter().map(|c| m * c).collect(),
        }
    }

    /// `⟨c_i, x − basepoint⟩ = 0` for each complement vector.
    pub fn equalities(&self) -> Vec<Row> {
        self.complement
            .iter()
            .map(|c| Row::new(c.clone(), c.dot(&self.basepoint)))
            .collect()
    }

    pub fn orthonormality_residual(&self) -> f64 {
        let n = self.ambient_dim();
        let mut m = DMatrix::<f64>::zeros(n, n);
        for (j, v) in self.basis.iter().chain(&self.complement).enumerate() {
            m.set_column(j, v);
        }
        orthonormality_residual(&m)
    }

    /// The linear part as a union of `2^dim` orthant-like simplicial cones.
    pub fn to_germ(&self, label: &str) -> Result<ConicGerm> {
        let n = self.ambient_dim();
        let k = self.dim();
        let mut cones = Vec::with_capacity(1 << k);
        for signs in 0..(1u32 << k) {
            let gens = self
                .basis
                .iter()
                .enumerate()
                .map(|(i, b)| if signs & (1 << i) != 0 { -b } else { b.clone() })
                .collect();
            cones.push(SimplicialCone::new(n, gens)?);
        }
        ConicGerm::new(n, cones, label)
    }
}

/// Element of `SO(n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rotation {
    matrix: DMatrix<f64>,
}

impl Rotation {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), found: matrix.ncols() });
        }
        let res = orthonormality_residual(&matrix);
        if res > Config::default().orthonormal_residual {
            return Err(Error::InvalidInput(format!("matrix is not orthogonal (residual {res:.3e})")));
        }
        let det = matrix.determinant();
        if (det - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidInput(format!("determinant {det} is not 1")));
        }
        Ok(Rotation { matrix })
    }

    /// Callers guarantee orthogonality and unit determinant.
    pub(crate) fn from_matrix_unchecked(matrix: DMatrix<f64>) -> Self {
        Rotation { matrix }
    }

    pub fn identity(n: usize) -> Self {
        Rotation { matrix: DMatrix::identity(n, n) }
    }

    /// Rotation of the plane spanned by coordinates `i`, `j` by `angle`.
    pub fn plane(n: usize, i: usize, j: usize, angle: f64) -> Self {
        let mut m = DMatrix::identity(n, n);
        let (s, c) = angle.sin_cos();
        m[(i, i)] = c;
        m[(j, j)] = c;
        m[(i, j)] = -s;
        m[(j, i)] = s;
        Rotation { matrix: m }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn apply(&self, v: &VecN) -> VecN {
        &self.matrix * v
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Rotation) -> Rotation {
        Rotation { matrix: &self.matrix * &other.matrix }
    }

    pub fn inverse(&self) -> Rotation {
        Rotation { matrix: self.matrix.transpose() }
    }

    pub fn orthonormality_residual(&self) -> f64 {
        orthonormality_residual(&self.matrix)
    }
}

/// Convex polytope given by vertices, with its facet description cached.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    vertices: Vec<VecN>,
    inequalities: Vec<Row>,
    equalities: Vec<Row>,
}

impl Polytope {
    pub fn from_vertices(ambient_dim: usize, vertices: Vec<VecN>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidInput("polytope needs at least one vertex".into()));
        }
        for v in &vertices {
            if v.len() != ambient_dim {
                return Err(Error::DimensionMismatch { expected: ambient_dim, found: v.len() });
            }
            if !v.iter().all(|x| x.is_finite()) {
                return Err(Error::InvalidInput("non-finite vertex".into()));
            }
        }
        let (inequalities, equalities) = facet_description(ambient_dim, &vertices)?;
        Ok(Polytope { vertices, inequalities, equalities })
    }

    pub fn vertices(&self) -> &[VecN] {
        &self.vertices
    }

    pub fn inequalities(&self) -> &[Row] {
        &self.inequalities
    }

    pub fn equalities(&self) -> &[Row] {
        &self.equalities
    }

    pub fn max_norm(&self) -> f64 {
        self.vertices.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// H-description of `conv(vertices)`: equalities for the affine hull and one
/// inequality per facet, found by testing every affinely independent subset.
fn facet_description(n: usize, vertices: &[VecN]) -> Result<(Vec<Row>, Vec<Row>)> {
    let m = vertices.len();
    let centroid = vertices.iter().fold(VecN::zeros(n), |acc, v| acc + v) / m as f64;
    let mut diffs = DMatrix::<f64>::zeros(n, m);
    for (j, v) in vertices.iter().enumerate() {
        diffs.set_column(j, &(v - &centroid));
    }
    let scale = diffs.iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1.0);
    let info = column_range(&diffs, 1e-9);
    let hull: Vec<VecN> = if diffs.iter().all(|&x| x.abs() <= 1e-12 * scale) {
        Vec::new()
    } else {
        info.range
    };
    let a = hull.len();
    let complement = orthonormal_complement(&hull, n);
    let equalities: Vec<Row> =
        complement.iter().map(|c| Row::new(c.clone(), c.dot(&centroid))).collect();
    let local: Vec<Vec<f64>> = vertices
        .iter()
        .map(|v| hull.iter().map(|b| b.dot(&(v - &centroid))).collect())
        .collect();
    let tol = 1e-9 * scale;
    let mut facets: Vec<(Vec<f64>, f64)> = Vec::new();
    if a == 1 {
        let lo = local.iter().map(|y| y[0]).fold(f64::INFINITY, f64::min);
        let hi = local.iter().map(|y| y[0]).fold(f64::NEG_INFINITY, f64::max);
        facets.push((vec![1.0], hi));
        facets.push((vec![-1.0], -lo));
    } else if a >= 2 {
        let mut idx: Vec<usize> = (0..a).collect();
        loop {
            // hyperplane through the points local[idx[..]]
            let base = &local[idx[0]];
            let mut d = DMatrix::<f64>::zeros(a - 1, a);
            for (r, &i) in idx[1..].iter().enumerate() {
                for c in 0..a {
                    d[(r, c)] = local[i][c] - base[c];
                }
            }
            let info = column_range(&d.transpose(), 1e-9);
            if info.range.len() == a - 1 && info.min_ratio > 1e-9 {
                let normal: Vec<f64> = orthonormal_complement(&info.range, a)[0].iter().cloned().collect();
                let h: f64 = normal.iter().zip(base).map(|(x, y)| x * y).sum();
                let vals: Vec<f64> =
                    local.iter().map(|y| normal.iter().zip(y).map(|(p, q)| p * q).sum::<f64>() - h).collect();
                let above = vals.iter().any(|&v| v > tol);
                let below = vals.iter().any(|&v| v < -tol);
                let oriented = match (above, below) {
                    (false, true) => Some((normal, h)),
                    (true, false) => Some((normal.iter().map(|x| -x).collect(), -h)),
                    _ => None,
                };
                if let Some((nrm, off)) = oriented {
                    let dup = facets.iter().any(|(f, o)| {
                        (o - off).abs() <= tol && f.iter().zip(&nrm).all(|(p, q)| (p - q).abs() <= 1e-9)
                    });
                    if !dup {
                        facets.push((nrm, off));
                    }
                }
            }
            if !next_combination(&mut idx, m) {
                break;
            }
        }
    }
    let inequalities = facets
        .into_iter()
        .map(|(nl, off)| {
            let mut normal = VecN::zeros(n);
            for (c, b) in nl.iter().zip(&hull) {
                normal.axpy(*c, b, 1.0);
            }
            let offset = off + normal.dot(&centroid);
            Row::new(normal, offset)
        })
        .collect();
    Ok((inequalities, equalities))
}

fn next_combination(idx: &mut [usize], m: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < m - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Finite union of polytopes inside `R^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolytopeUnion {
    ambient_dim: usize,
    polytopes: Vec<Polytope>,
}

impl PolytopeUnion {
    pub fn new(ambient_dim: usize, polytopes: Vec<Polytope>) -> Result<Self> {
        for p in &polytopes {
            if let Some(v) = p.vertices.first() {
                if v.len() != ambient_dim {
                    return Err(Error::DimensionMismatch { expected: ambient_dim, found: v.len() });
                }
            }
        }
        Ok(PolytopeUnion { ambient_dim, polytopes })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn polytopes(&self) -> &[Polytope] {
        &self.polytopes
    }

    pub fn max_norm(&self) -> f64 {
        self.polytopes.iter().map(|p| p.max_norm()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> VecN {
        VecN::from_column_slice(xs)
    }

    #[test]
    fn single_generator_cone() {
        let c = SimplicialCone::new(2, vec![v(&[1.0, 0.0])]).unwrap();
        assert!((c.dual()[(0, 0)] - 1.0).abs() < 1e-14);
        assert!(c.dual()[(0, 1)].abs() < 1e-14);
        assert!(c.contains(&v(&[3.0, 0.0]), 1e-10));
        assert!(!c.contains(&v(&[-1.0, 0.0]), 1e-10));
        assert!(!c.contains(&v(&[1.0, 0.1]), 1e-10));
    }

    #[test]
    fn empty_generator_cone_is_origin() {
        let c = SimplicialCone::new(3, vec![]).unwrap();
        assert!(c.contains(&v(&[0.0, 0.0, 0.0]), 1e-12));
        assert!(!c.contains(&v(&[1e-3, 0.0, 0.0]), 1e-12));
        assert_eq!(c.equalities().len(), 3);
    }

    #[test]
    fn collinear_generators_rejected() {
        let err = SimplicialCone::new(2, vec![v(&[1.0, 0.0]), v(&[2.0, 0.0])]).unwrap_err();
        assert!(matches!(err, Error::RankDeficient { .. }));
    }

    #[test]
    fn mismatched_generator_dimension() {
        let err = SimplicialCone::new(2, vec![v(&[1.0, 0.0, 0.0])]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 2, found: 3 }));
    }

    #[test]
    fn quarter_turn_maps_ray_to_ray() {
        let ray = ConicGerm::from_generators(2, &[vec![vec![1.0, 0.0]]], "ray").unwrap();
        let r = Rotation::plane(2, 0, 1, std::f64::consts::FRAC_PI_2);
        let out = rotate_germ(&r, &ray).unwrap();
        assert!(out.contains(&v(&[0.0, 2.0]), 1e-10));
        assert!(!out.contains(&v(&[2.0, 0.0]), 1e-10));
    }

    #[test]
    fn identity_rotation_is_structural_noop() {
        let q = ConicGerm::from_generators(2, &[vec![vec![1.0, 0.0], vec![0.0, 1.0]]], "q").unwrap();
        let out = rotate_germ(&Rotation::identity(2), &q).unwrap();
        assert_eq!(out, q);
        assert_eq!(tangent_cone(&q), q);
    }

    #[test]
    fn flat_expansion_produces_orthant_rays() {
        let flat = AffineFlat::linear_span(2, &[v(&[0.0, 1.0])]).unwrap();
        let germ = flat.to_germ("H").unwrap();
        assert_eq!(germ.cones().len(), 2);
        assert!(germ.contains(&v(&[0.0, 1.0]), 1e-12));
        assert!(germ.contains(&v(&[0.0, -1.0]), 1e-12));
        assert!(!germ.contains(&v(&[1.0, 0.0]), 1e-12));
    }

    #[test]
    fn square_facets() {
        let p = Polytope::from_vertices(
            2,
            vec![v(&[0.0, 0.0]), v(&[1.0, 0.0]), v(&[1.0, 1.0]), v(&[0.0, 1.0])],
        )
        .unwrap();
        assert_eq!(p.inequalities().len(), 4);
        assert!(p.equalities().is_empty());
        let inside = v(&[0.5, 0.5]);
        let outside = v(&[1.5, 0.5]);
        assert!(p.inequalities().iter().all(|r| r.normal.dot(&inside) <= r.offset + 1e-12));
        assert!(p.inequalities().iter().any(|r| r.normal.dot(&outside) > r.offset + 1e-12));
    }

    #[test]
    fn segment_in_plane_has_hull_equality() {
        let p = Polytope::from_vertices(2, vec![v(&[0.0, 1.0]), v(&[1.0, 1.0])]).unwrap();
        assert_eq!(p.equalities().len(), 1);
        assert_eq!(p.inequalities().len(), 2);
        let e = &p.equalities()[0];
        assert!((e.normal.dot(&v(&[0.3, 1.0])) - e.offset).abs() < 1e-12);
    }

    #[test]
    fn tetrahedron_facets() {
        let p = Polytope::from_vertices(
            3,
            vec![v(&[0.0, 0.0, 0.0]), v(&[1.0, 0.0, 0.0]), v(&[0.0, 1.0, 0.0]), v(&[0.0, 0.0, 1.0]), v(&[0.1, 0.1, 0.1])],
        )
        .unwrap();
        assert_eq!(p.inequalities().len(), 4);
    }
}
