//! Scene documents in, reports out.
//!
//! A scene is a JSON object:
//!
//! ```json
//! {"schema_version": "1.0", "ambient_dim": 2,
//!  "germs": {"X": {"cones": [{"generators": [[1,0],[0,1]]}]},
//!            "L": {"type": "flat", "dim": 1, "basis": [[0,1]]}},
//!  "polytope_unions": {"P": {"polytopes": [{"vertices": [[0.1,0.1],[0.5,0.1],[0.5,0.5],[0.1,0.5]]}]}}}
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::{AffineFlat, ConicGerm, Polytope, PolytopeUnion, SimplicialCone, VecN};
use crate::invariants::InvariantProfile;
use crate::sampling::McEstimate;
use crate::verify::VerificationReport;

pub const SCENE_SCHEMA_VERSION: &str = "1.0";
pub const REPORT_SCHEMA_VERSION: &str = "1.0";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeSpec {
    pub generators: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum TypedGerm {
    Flat { dim: usize, basis: Vec<Vec<f64>> },
    FullSpace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GermSpec {
    Cones { cones: Vec<ConeSpec> },
    Typed(TypedGerm),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolytopeSpec {
    pub vertices: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolytopeUnionSpec {
    pub polytopes: Vec<PolytopeSpec>,
}

/// The scene as written, kept for round-trips and fingerprints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneDoc {
    pub schema_version: String,
    pub ambient_dim: usize,
    #[serde(default)]
    pub germs: BTreeMap<String, GermSpec>,
    #[serde(default)]
    pub polytope_unions: BTreeMap<String, PolytopeUnionSpec>,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub metadata: Value,
}

/// A validated scene with geometry built.
#[derive(Debug, Clone)]
pub struct Scene {
    pub doc: SceneDoc,
    pub ambient_dim: usize,
    pub germs: BTreeMap<String, ConicGerm>,
    pub polytope_unions: BTreeMap<String, PolytopeUnion>,
}

impl Scene {
    /// Hex SHA-256 of the canonical JSON form (sorted keys, normalized numbers).
    pub fn fingerprint(&self) -> String {
        let canon = serde_json::to_string(&self.doc).expect("scene documents serialize");
        hex::encode(Sha256::digest(canon.as_bytes()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.doc).expect("scene documents serialize")
    }
}

fn schema(path: &str, message: impl Into<String>) -> Error {
    Error::Schema { path: path.into(), message: message.into() }
}

fn check_version(v: &str, path: &str) -> Result<()> {
    let major = v.split('.').next().unwrap_or("");
    let want = SCENE_SCHEMA_VERSION.split('.').next().unwrap_or("");
    if major != want {
        return Err(schema(path, format!("unsupported schema major version '{v}' (expected {want}.x)")));
    }
    Ok(())
}

fn vector(n: usize, v: &[f64], path: &str) -> Result<VecN> {
    if v.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: v.len() }.at(path));
    }
    if v.iter().any(|c| !c.is_finite()) {
        return Err(schema(path, "non-finite coordinate"));
    }
    Ok(VecN::from_column_slice(v))
}

fn build_germ(n: usize, name: &str, spec: &GermSpec, path: &str) -> Result<ConicGerm> {
    match spec {
        GermSpec::Cones { cones } => {
            if cones.is_empty() {
                return Err(schema(&format!("{path}.cones"), "a germ needs at least one cone"));
            }
            let mut built = Vec::with_capacity(cones.len());
            for (i, c) in cones.iter().enumerate() {
                let cp = format!("{path}.cones[{i}]");
                let gens = c
                    .generators
                    .iter()
                    .enumerate()
                    .map(|(j, g)| vector(n, g, &format!("{cp}.generators[{j}]")))
                    .collect::<Result<Vec<_>>>()?;
                built.push(SimplicialCone::new(n, gens).map_err(|e| e.at(&cp))?);
            }
            ConicGerm::new(n, built, name).map_err(|e| e.at(path))
        }
        GermSpec::Typed(TypedGerm::Flat { dim, basis }) => {
            if basis.len() != *dim {
                return Err(schema(&format!("{path}.basis"), format!("{} basis vectors for a flat of dimension {dim}", basis.len())));
            }
            let vs = basis
                .iter()
                .enumerate()
                .map(|(j, b)| vector(n, b, &format!("{path}.basis[{j}]")))
                .collect::<Result<Vec<_>>>()?;
            if *dim == 0 {
                return ConicGerm::from_generators(n, &[vec![]], name).map_err(|e| e.at(path));
            }
            AffineFlat::linear_span(n, &vs).and_then(|h| h.to_germ(name)).map_err(|e| e.at(path))
        }
        GermSpec::Typed(TypedGerm::FullSpace) => {
            let vs: Vec<VecN> = (0..n).map(|i| VecN::from_fn(n, |r, _| if r == i { 1.0 } else { 0.0 })).collect();
            AffineFlat::linear_span(n, &vs).and_then(|h| h.to_germ(name)).map_err(|e| e.at(path))
        }
    }
}

fn build_union(n: usize, spec: &PolytopeUnionSpec, path: &str) -> Result<PolytopeUnion> {
    if spec.polytopes.is_empty() {
        return Err(schema(&format!("{path}.polytopes"), "a polytope union needs at least one polytope"));
    }
    let mut ps = Vec::with_capacity(spec.polytopes.len());
    for (i, p) in spec.polytopes.iter().enumerate() {
        let pp = format!("{path}.polytopes[{i}]");
        if p.vertices.is_empty() {
            return Err(schema(&format!("{pp}.vertices"), "a polytope needs at least one vertex"));
        }
        let vs = p
            .vertices
            .iter()
            .enumerate()
            .map(|(j, v)| vector(n, v, &format!("{pp}.vertices[{j}]")))
            .collect::<Result<Vec<_>>>()?;
        ps.push(Polytope::from_vertices(n, vs).map_err(|e| e.at(&pp))?);
    }
    PolytopeUnion::new(n, ps).map_err(|e| e.at(path))
}

/// Builds the geometry of a scene document.
pub fn scene_from_doc(doc: SceneDoc) -> Result<Scene> {
    check_version(&doc.schema_version, "schema_version")?;
    let n = doc.ambient_dim;
    if n == 0 {
        return Err(schema("ambient_dim", "must be at least 1"));
    }
    let mut germs = BTreeMap::new();
    for (name, spec) in &doc.germs {
        germs.insert(name.clone(), build_germ(n, name, spec, &format!("germs.{name}"))?);
    }
    let mut unions = BTreeMap::new();
    for (name, spec) in &doc.polytope_unions {
        if doc.germs.contains_key(name) {
            return Err(schema(&format!("polytope_unions.{name}"), "name already used by a germ"));
        }
        unions.insert(name.clone(), build_union(n, spec, &format!("polytope_unions.{name}"))?);
    }
    Ok(Scene { doc, ambient_dim: n, germs, polytope_unions: unions })
}

fn section<T: for<'de> Deserialize<'de>>(v: &Value, path: &str) -> Result<T> {
    serde_json::from_value(v.clone()).map_err(|e| schema(path, e.to_string()))
}

/// Parses and validates a scene; errors carry the JSON path of the offending
/// entry.
pub fn parse_scene(text: &str) -> Result<Scene> {
    let root: Value = serde_json::from_str(text).map_err(|e| schema("$", e.to_string()))?;
    let obj = root.as_object().ok_or_else(|| schema("$", "scene must be a JSON object"))?;
    const KEYS: [&str; 5] = ["schema_version", "ambient_dim", "germs", "polytope_unions", "metadata"];
    if let Some(k) = obj.keys().find(|k| !KEYS.contains(&k.as_str())) {
        return Err(schema(k, "unknown field"));
    }
    let schema_version = match obj.get("schema_version") {
        None => SCENE_SCHEMA_VERSION.to_string(),
        Some(v) => section::<String>(v, "schema_version")?,
    };
    check_version(&schema_version, "schema_version")?;
    let ambient_dim = section::<usize>(obj.get("ambient_dim").ok_or_else(|| schema("ambient_dim", "missing"))?, "ambient_dim")?;
    let mut germs = BTreeMap::new();
    if let Some(g) = obj.get("germs") {
        let g = g.as_object().ok_or_else(|| schema("germs", "expected an object of named germs"))?;
        for (name, v) in g {
            let path = format!("germs.{name}");
            if let Some(cones) = v.get("cones").and_then(Value::as_array) {
                for (i, c) in cones.iter().enumerate() {
                    section::<ConeSpec>(c, &format!("{path}.cones[{i}]"))?;
                }
            }
            germs.insert(name.clone(), section::<GermSpec>(v, &path)?);
        }
    }
    let mut unions = BTreeMap::new();
    if let Some(p) = obj.get("polytope_unions") {
        let p = p.as_object().ok_or_else(|| schema("polytope_unions", "expected an object of named unions"))?;
        for (name, v) in p {
            unions.insert(name.clone(), section::<PolytopeUnionSpec>(v, &format!("polytope_unions.{name}"))?);
        }
    }
    let metadata = obj.get("metadata").cloned().unwrap_or(Value::Null);
    scene_from_doc(SceneDoc { schema_version, ambient_dim, germs, polytope_unions: unions, metadata })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
    Markdown,
}

/// Output of the `invariants` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileReport {
    pub schema_version: String,
    pub scene_fingerprint: String,
    pub seed: u64,
    pub samples: u64,
    pub profile: InvariantProfile,
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn csv_text(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory csv");
    for r in rows {
        w.write_record(&r).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8")
}

fn pm(e: &McEstimate) -> String {
    if e.stderr == 0.0 {
        format!("{:.6}", e.mean)
    } else {
        format!("{:.6} ± {:.6}", e.mean, e.stderr)
    }
}

pub fn emit_report(report: &VerificationReport, format: Format) -> String {
    match format {
        Format::Json => json(report),
        Format::Csv => {
            let header = [
                "law", "case", "inputs", "lhs_mean", "lhs_stderr", "rhs_mean", "rhs_stderr", "delta", "z", "verdict",
                "alt_lhs_mean", "alt_lhs_stderr",
            ];
            let rows = report
                .entries
                .iter()
                .map(|e| {
                    vec![
                        e.law.id().to_string(),
                        e.case.clone(),
                        e.inputs.join("+"),
                        e.lhs.mean.to_string(),
                        e.lhs.stderr.to_string(),
                        e.rhs.mean.to_string(),
                        e.rhs.stderr.to_string(),
                        e.delta.to_string(),
                        e.z.map_or("inf".into(), |z| z.to_string()),
                        e.verdict.to_string(),
                        e.alt_lhs.map_or(String::new(), |a| a.mean.to_string()),
                        e.alt_lhs.map_or(String::new(), |a| a.stderr.to_string()),
                    ]
                })
                .collect();
            csv_text(&header, rows)
        }
        Format::Markdown => {
            let mut s = String::new();
            let _ = writeln!(s, "scene `{}`, seed {}, N = {}\n", report.scene_fingerprint, report.seed, report.samples);
            s.push_str("| law | case | inputs | LHS | RHS | Δ | z | verdict |\n");
            s.push_str("|---|---|---|---|---|---|---|---|\n");
            for e in &report.entries {
                let mut lhs = pm(&e.lhs);
                if let Some(a) = &e.alt_lhs {
                    let _ = write!(lhs, " (alt {})", pm(a));
                }
                let _ = writeln!(
                    s,
                    "| {} | {} | {} | {} | {} | {:+.6} | {} | {} |",
                    e.law,
                    e.case,
                    e.inputs.join(", "),
                    lhs,
                    pm(&e.rhs),
                    e.delta,
                    e.z.map_or("∞".into(), |z| format!("{z:.2}")),
                    e.verdict
                );
            }
            s
        }
    }
}

pub fn parse_report(text: &str) -> Result<VerificationReport> {
    let r: VerificationReport = serde_json::from_str(text).map_err(|e| schema("$", e.to_string()))?;
    check_version(&r.schema_version, "schema_version")?;
    Ok(r)
}

fn profile_rows(p: &InvariantProfile) -> Vec<(String, usize, McEstimate)> {
    let mut rows = Vec::new();
    for (k, e) in p.sigma.iter().enumerate() {
        rows.push(("sigma".to_string(), k, *e));
    }
    for (j, e) in p.link_sums.iter().enumerate() {
        rows.push(("link_sum".to_string(), j, *e));
    }
    for k in 0..p.lambda_lim.len() {
        rows.push(("lambda_lim".to_string(), k, p.lambda_lim.component(k)));
    }
    for k in 0..p.lambda_loc.len() {
        rows.push(("lambda_loc".to_string(), k + 1, p.lambda_loc.component(k)));
    }
    rows.push(("density".to_string(), p.dim, p.density));
    rows
}

pub fn emit_profile(report: &ProfileReport, format: Format) -> String {
    let p = &report.profile;
    match format {
        Format::Json => json(report),
        Format::Csv => {
            let rows = profile_rows(p)
                .into_iter()
                .map(|(q, k, e)| {
                    vec![
                        p.germ.clone(),
                        q,
                        k.to_string(),
                        e.mean.to_string(),
                        e.stderr.to_string(),
                        e.n_samples.to_string(),
                        e.n_degenerate.to_string(),
                    ]
                })
                .collect();
            csv_text(&["germ", "quantity", "index", "mean", "stderr", "n_samples", "n_degenerate"], rows)
        }
        Format::Markdown => {
            let mut s = String::new();
            let _ = writeln!(
                s,
                "germ `{}` (dim {} in R^{}), scene `{}`, seed {}, N = {}\n",
                p.germ, p.dim, p.ambient_dim, report.scene_fingerprint, report.seed, report.samples
            );
            s.push_str("| quantity | index | value |\n|---|---|---|\n");
            for (q, k, e) in profile_rows(p) {
                let _ = writeln!(s, "| {q} | {k} | {} |", pm(&e));
            }
            s
        }
    }
}
