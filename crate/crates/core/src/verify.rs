//! Both sides of each kinematic identity, with a three-way verdict.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::geometry::{AffineFlat, ConicGerm, VecN};
use crate::invariants::{
    beta0_bar, bilinear, germ_polytope_mean, invariant_profile, lambda0_pair, link_to_lambda, pair_link_sums,
    polytope_section_means, sigma_pair, sigma_pair_ladder, InvariantProfile, VectorEstimate,
};
use crate::sampling::{sub_seed, McEstimate};
use crate::scene_io::{Scene, REPORT_SCHEMA_VERSION};

/// Deltas this small count as exact agreement.
const EXACT_EQUALITY: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Law {
    #[serde(rename = "thm3.8")]
    Thm3_8,
    #[serde(rename = "cor3.6")]
    Cor3_6,
    #[serde(rename = "thm3.7")]
    Thm3_7,
    #[serde(rename = "prop4.20")]
    Prop4_20,
    #[serde(rename = "prop4.21")]
    Prop4_21,
    #[serde(rename = "prop6.1")]
    Prop6_1,
    #[serde(rename = "prop7.2")]
    Prop7_2,
    #[serde(rename = "thm8.15")]
    Thm8_15,
    #[serde(rename = "cor-bezout")]
    CorBezout,
    #[serde(rename = "thm8.16")]
    Thm8_16,
    #[serde(rename = "prop9.1")]
    Prop9_1,
    #[serde(rename = "cor9.2")]
    Cor9_2,
    #[serde(rename = "cauchy-crofton")]
    CauchyCrofton,
}

/// What a law consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arity {
    Germ,
    GermPair,
    GermPolytopes,
}

impl Law {
    pub const ALL: [Law; 13] = [
        Law::Thm3_8,
        Law::Cor3_6,
        Law::Thm3_7,
        Law::Prop4_20,
        Law::Prop4_21,
        Law::Prop6_1,
        Law::Prop7_2,
        Law::Thm8_15,
        Law::CorBezout,
        Law::Thm8_16,
        Law::Prop9_1,
        Law::Cor9_2,
        Law::CauchyCrofton,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Law::Thm3_8 => "thm3.8",
            Law::Cor3_6 => "cor3.6",
            Law::Thm3_7 => "thm3.7",
            Law::Prop4_20 => "prop4.20",
            Law::Prop4_21 => "prop4.21",
            Law::Prop6_1 => "prop6.1",
            Law::Prop7_2 => "prop7.2",
            Law::Thm8_15 => "thm8.15",
            Law::CorBezout => "cor-bezout",
            Law::Thm8_16 => "thm8.16",
            Law::Prop9_1 => "prop9.1",
            Law::Cor9_2 => "cor9.2",
            Law::CauchyCrofton => "cauchy-crofton",
        }
    }

    pub fn arity(self) -> Arity {
        match self {
            Law::Thm3_8 | Law::Cor3_6 | Law::Thm3_7 | Law::Prop4_21 | Law::CauchyCrofton => Arity::Germ,
            Law::Prop6_1 => Arity::GermPolytopes,
            _ => Arity::GermPair,
        }
    }

    pub fn valid_ids() -> String {
        Law::ALL.iter().map(|l| l.id()).collect::<Vec<_>>().join(", ")
    }
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Law {
    type Err = Error;

    /// Accepts `thm8.15` as well as `THM_8_15`.
    fn from_str(s: &str) -> Result<Law> {
        let norm = |t: &str| t.to_ascii_lowercase().replace(['_', '.', '-'], "");
        let key = norm(s);
        Law::ALL
            .iter()
            .copied()
            .find(|l| norm(l.id()) == key)
            .ok_or_else(|| Error::InvalidInput(format!("unknown law '{s}'; valid ids: {}", Law::valid_ids())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub law: Law,
    /// Sub-case such as `k=2`; empty when the law has a single case.
    pub case: String,
    pub inputs: Vec<String>,
    pub lhs: McEstimate,
    pub rhs: McEstimate,
    pub delta: f64,
    /// `None` when the difference is nonzero but both sides are exact.
    pub z: Option<f64>,
    pub verdict: Verdict,
    /// Left side under the alternative normalization, where one exists.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alt_lhs: Option<McEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema_version: String,
    pub scene_fingerprint: String,
    pub seed: u64,
    pub samples: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
    pub entries: Vec<ReportEntry>,
}

impl VerificationReport {
    pub fn any_fail(&self) -> bool {
        self.entries.iter().any(|e| e.verdict == Verdict::Fail)
    }

    pub fn count(&self, v: Verdict) -> usize {
        self.entries.iter().filter(|e| e.verdict == v).count()
    }
}

/// `(delta, z, verdict)` for two estimates.
pub fn judge(lhs: &McEstimate, rhs: &McEstimate, cfg: &Config) -> (f64, Option<f64>, Verdict) {
    let delta = lhs.mean - rhs.mean;
    let se = (lhs.variance() + rhs.variance()).sqrt();
    let z = if delta.abs() <= EXACT_EQUALITY {
        Some(0.0)
    } else if se > 0.0 {
        Some(delta.abs() / se)
    } else {
        None
    };
    let zv = z.unwrap_or(f64::INFINITY);
    let close = delta.abs() <= cfg.abs_tol;
    let verdict = if zv <= cfg.z_pass || close {
        Verdict::Pass
    } else if zv > cfg.z_fail {
        Verdict::Fail
    } else {
        Verdict::Inconclusive
    };
    (delta, z, verdict)
}

fn entry(law: Law, case: String, inputs: &[&str], lhs: McEstimate, rhs: McEstimate, cfg: &Config) -> ReportEntry {
    let (delta, z, verdict) = judge(&lhs, &rhs, cfg);
    ReportEntry {
        law,
        case,
        inputs: inputs.iter().map(|s| s.to_string()).collect(),
        lhs,
        rhs,
        delta,
        z,
        verdict,
        alt_lhs: None,
    }
}

/// Coordinate flat of codimension `k`, as a germ.
fn coordinate_flat(n: usize, k: usize) -> Result<ConicGerm> {
    let label = format!("flat{}", n - k);
    if k == n {
        return ConicGerm::from_generators(n, &[vec![]], &label);
    }
    let basis: Vec<VecN> = (0..n - k).map(|i| VecN::from_fn(n, |r, _| if r == i { 1.0 } else { 0.0 })).collect();
    AffineFlat::linear_span(n, &basis)?.to_germ(&label)
}

/// Runs laws on one scene, caching per-germ profiles and pair estimates so
/// that laws sharing an estimator reuse it.
pub struct Verifier<'a> {
    scene: &'a Scene,
    cfg: &'a Config,
    samples: u64,
    seed: u64,
    profiles: HashMap<String, InvariantProfile>,
    pairs: HashMap<(&'static str, String, String), Vec<McEstimate>>,
}

impl<'a> Verifier<'a> {
    pub fn new(scene: &'a Scene, cfg: &'a Config, samples: u64, seed: u64) -> Self {
        Verifier { scene, cfg, samples, seed, profiles: HashMap::new(), pairs: HashMap::new() }
    }

    fn germ(&self, name: &str) -> Result<&'a ConicGerm> {
        self.scene
            .germs
            .get(name)
            .ok_or_else(|| Error::InvalidInput(format!("scene has no germ named '{name}'")))
    }

    pub fn profile(&mut self, name: &str) -> Result<InvariantProfile> {
        if let Some(p) = self.profiles.get(name) {
            return Ok(p.clone());
        }
        let x = self.germ(name)?;
        let p = invariant_profile(x, self.samples, sub_seed(self.seed, &format!("profile/{name}")), self.cfg)?;
        self.profiles.insert(name.to_string(), p.clone());
        Ok(p)
    }

    fn pair(&mut self, est: &'static str, xn: &str, x: &ConicGerm, yn: &str, y: &ConicGerm) -> Result<Vec<McEstimate>> {
        let key = (est, xn.to_string(), yn.to_string());
        if let Some(v) = self.pairs.get(&key) {
            return Ok(v.clone());
        }
        let seed = sub_seed(self.seed, &format!("{est}/{xn}/{yn}"));
        let (n, cfg) = (self.samples, self.cfg);
        let v = match est {
            "sigma_pair" => vec![sigma_pair(x, y, n, seed, cfg)?],
            "sigma_ladder" => vec![sigma_pair_ladder(x, y, n, seed, cfg)?],
            "lambda0_pair" => {
                let (a, b) = lambda0_pair(x, y, n, seed, cfg)?;
                vec![a, b]
            }
            "pair_links" => pair_link_sums(x, y, n, seed, cfg)?,
            _ => unreachable!("unknown pair estimator {est}"),
        };
        self.pairs.insert(key, v.clone());
        Ok(v)
    }

    fn named_pair(&mut self, est: &'static str, xn: &str, yn: &str) -> Result<Vec<McEstimate>> {
        let (x, y) = (self.germ(xn)?, self.germ(yn)?);
        self.pair(est, xn, x, yn, y)
    }

    /// Runs one law on the named inputs.
    pub fn run(&mut self, law: Law, inputs: &[&str]) -> Result<Vec<ReportEntry>> {
        let want = match law.arity() {
            Arity::Germ => 1,
            _ => 2,
        };
        if inputs.len() != want {
            return Err(Error::UnsupportedScene {
                law: law.id().into(),
                reason: format!("needs {want} input(s), got {}", inputs.len()),
            });
        }
        if law.arity() != Arity::Germ && self.scene.ambient_dim < 2 {
            return Err(Error::UnsupportedScene {
                law: law.id().into(),
                reason: "SO(1) is trivial and cannot average over S⁰; two-input laws need n ≥ 2".into(),
            });
        }
        match law.arity() {
            Arity::Germ => self.single(law, inputs[0]),
            Arity::GermPair => {
                let (x, y) = (self.germ(inputs[0])?, self.germ(inputs[1])?);
                if x.ambient_dim() != y.ambient_dim() {
                    return Err(Error::DimensionMismatch { expected: x.ambient_dim(), found: y.ambient_dim() });
                }
                self.pair_law(law, inputs[0], inputs[1])
            }
            Arity::GermPolytopes => self.polytope_law(inputs[0], inputs[1]),
        }
    }

    fn single(&mut self, law: Law, xn: &str) -> Result<Vec<ReportEntry>> {
        let cfg = self.cfg;
        let x = self.germ(xn)?;
        let n = x.ambient_dim();
        let p = self.profile(xn)?;
        let ins = [xn];
        let mut out = Vec::new();
        match law {
            Law::Thm3_8 => {
                for k in 0..=n {
                    let rhs = if k < n {
                        let (a, b) = (p.sigma[k], p.sigma[k + 1]);
                        McEstimate {
                            mean: a.mean - b.mean,
                            stderr: (a.variance() + b.variance()).sqrt(),
                            n_samples: a.n_samples + b.n_samples,
                            n_degenerate: a.n_degenerate + b.n_degenerate,
                        }
                    } else {
                        p.sigma[n]
                    };
                    out.push(entry(law, format!("k={k}"), &ins, p.lambda_lim.component(k), rhs, cfg));
                }
            }
            Law::Cor3_6 => {
                let total = p.lambda_lim.linear(&vec![1.0; n + 1], 0.0);
                out.push(entry(law, String::new(), &ins, total, McEstimate::exact(1.0), cfg));
            }
            Law::Thm3_7 => {
                for k in 1..=n {
                    let seed = sub_seed(self.seed, &format!("beta0/{xn}/{k}"));
                    let lhs = beta0_bar(x, k, self.samples, seed, cfg)?;
                    out.push(entry(law, format!("k={k}"), &ins, lhs, p.lambda_lim.component(k), cfg));
                }
            }
            Law::Prop4_21 => {
                for k in 1..=n {
                    let h = coordinate_flat(n, k)?;
                    let hn = format!("#flat{}", n - k);
                    let lhs = self.pair("sigma_pair", xn, x, &hn, &h)?[0];
                    out.push(entry(law, format!("k={k}"), &ins, lhs, p.sigma[k], cfg));
                }
            }
            Law::CauchyCrofton => {
                let d = p.dim;
                let rhs = if d == 0 { p.sigma[0] } else { p.lambda_loc.component(d - 1) };
                out.push(entry(law, format!("d={d}"), &ins, p.density, rhs, cfg));
            }
            _ => unreachable!("{law} is not a single-germ law"),
        }
        Ok(out)
    }

    fn pair_law(&mut self, law: Law, xn: &str, yn: &str) -> Result<Vec<ReportEntry>> {
        let cfg = self.cfg;
        let n = self.germ(xn)?.ambient_dim();
        let ins = [xn, yn];
        let (px, py) = (self.profile(xn)?, self.profile(yn)?);
        let complementary: Vec<(usize, usize, f64)> = (0..=n).map(|i| (i, n - i, 1.0)).collect();
        let mixed_rhs = || bilinear(&px.lambda_lim, &py.sigma_vector(), &complementary);
        let mut out = Vec::new();
        match law {
            Law::Prop4_20 => {
                let a = self.named_pair("sigma_pair", xn, yn)?[0];
                let b = self.named_pair("sigma_pair", yn, xn)?[0];
                out.push(entry(law, "sigma".into(), &ins, a, b, cfg));
                let a = self.named_pair("lambda0_pair", xn, yn)?[0];
                let b = self.named_pair("lambda0_pair", yn, xn)?[0];
                out.push(entry(law, "lambda0".into(), &ins, a, b, cfg));
            }
            Law::Thm8_15 => {
                let lhs = self.named_pair("sigma_pair", xn, yn)?[0];
                out.push(entry(law, String::new(), &ins, lhs, mixed_rhs(), cfg));
            }
            Law::Prop7_2 => {
                let lhs = self.named_pair("sigma_ladder", xn, yn)?[0];
                out.push(entry(law, String::new(), &ins, lhs, mixed_rhs(), cfg));
            }
            Law::CorBezout => {
                if px.dim + py.dim != n {
                    return Err(Error::UnsupportedScene {
                        law: law.id().into(),
                        reason: format!("dimensions {} + {} differ from {n}", px.dim, py.dim),
                    });
                }
                let lhs = self.named_pair("sigma_pair", xn, yn)?[0];
                let dens = |e: McEstimate| VectorEstimate::independent(&[e]);
                let rhs = bilinear(&dens(px.density), &dens(py.density), &[(0, 0, 1.0)]);
                out.push(entry(law, String::new(), &ins, lhs, rhs, cfg));
            }
            Law::Thm8_16 => {
                let v = self.named_pair("lambda0_pair", xn, yn)?;
                let rhs = bilinear(&px.lambda_lim, &py.lambda_lim, &complementary);
                let mut e = entry(law, String::new(), &ins, v[0], rhs, cfg);
                e.alt_lhs = Some(v[1]);
                out.push(e);
            }
            Law::Prop9_1 | Law::Cor9_2 => {
                let m = self.named_pair("pair_links", xn, yn)?;
                let (a, c) = link_to_lambda(n);
                let lam = VectorEstimate::independent(&m).transform(&a, &c);
                if law == Law::Cor9_2 {
                    let terms: Vec<_> = (0..=n).flat_map(|i| (0..=n - i).map(move |j| (i, j, 1.0))).collect();
                    let rhs = bilinear(&px.lambda_lim, &py.lambda_lim, &terms);
                    out.push(entry(law, String::new(), &ins, lam.component(0), rhs, cfg));
                } else {
                    for k in 1..=n {
                        let terms: Vec<_> = (k..=n).map(|i| (i, k + n - i, 1.0)).collect();
                        let rhs = bilinear(&px.lambda_lim, &py.lambda_lim, &terms);
                        out.push(entry(law, format!("k={k}"), &ins, lam.component(k), rhs, cfg));
                    }
                }
            }
            _ => unreachable!("{law} is not a pair law"),
        }
        Ok(out)
    }

    fn polytope_law(&mut self, xn: &str, pn: &str) -> Result<Vec<ReportEntry>> {
        let law = Law::Prop6_1;
        let cfg = self.cfg;
        let x = self.germ(xn)?;
        let p = self.scene.polytope_unions.get(pn).ok_or_else(|| Error::UnsupportedScene {
            law: law.id().into(),
            reason: format!("scene has no polytope union named '{pn}'"),
        })?;
        if p.ambient_dim() != x.ambient_dim() {
            return Err(Error::DimensionMismatch { expected: x.ambient_dim(), found: p.ambient_dim() });
        }
        if p.max_norm() > 1.0 {
            return Err(Error::UnsupportedScene { law: law.id().into(), reason: format!("'{pn}' leaves the unit ball") });
        }
        let lhs = germ_polytope_mean(x, p, self.samples, sub_seed(self.seed, &format!("polytope/{xn}/{pn}")), cfg)?;
        let sections = polytope_section_means(p, self.samples, sub_seed(self.seed, &format!("sections/{pn}")), cfg)?;
        let px = self.profile(xn)?;
        let n = x.ambient_dim();
        let terms: Vec<_> = (0..=n).map(|i| (i, i, 1.0)).collect();
        let rhs = bilinear(&px.lambda_lim, &VectorEstimate::independent(&sections), &terms);
        Ok(vec![entry(law, String::new(), &[xn, pn], lhs, rhs, cfg)])
    }
}

/// Every law applicable to the scene: single-germ laws per germ, and for
/// `n ≥ 2` pair laws per unordered pair and the polytope law per germ and
/// polytope union.
pub fn applicable(scene: &Scene) -> Vec<(Law, Vec<String>)> {
    let names: Vec<&String> = scene.germs.keys().collect();
    let mut out = Vec::new();
    for x in &names {
        for law in Law::ALL.iter().filter(|l| l.arity() == Arity::Germ) {
            out.push((*law, vec![x.to_string()]));
        }
    }
    if scene.ambient_dim < 2 {
        return out;
    }
    for (i, x) in names.iter().enumerate() {
        for y in &names[i + 1..] {
            let (gx, gy) = (&scene.germs[*x], &scene.germs[*y]);
            if gx.ambient_dim() != gy.ambient_dim() {
                continue;
            }
            for law in Law::ALL.iter().filter(|l| l.arity() == Arity::GermPair) {
                if *law == Law::CorBezout && gx.dim() + gy.dim() != gx.ambient_dim() {
                    continue;
                }
                out.push((*law, vec![x.to_string(), y.to_string()]));
            }
        }
    }
    for x in &names {
        for p in scene.polytope_unions.keys() {
            out.push((Law::Prop6_1, vec![x.to_string(), p.clone()]));
        }
    }
    out
}

/// Runs the given laws and assembles a report.
pub fn verify(scene: &Scene, cfg: &Config, samples: u64, seed: u64, laws: &[(Law, Vec<String>)]) -> Result<VerificationReport> {
    let mut v = Verifier::new(scene, cfg, samples, seed);
    let mut entries = Vec::new();
    for (law, inputs) in laws {
        let ins: Vec<&str> = inputs.iter().map(String::as_str).collect();
        entries.extend(v.run(*law, &ins)?);
    }
    Ok(VerificationReport {
        schema_version: REPORT_SCHEMA_VERSION.into(),
        scene_fingerprint: scene.fingerprint(),
        seed,
        samples,
        wall_time_s: None,
        entries,
    })
}

pub fn verify_all(scene: &Scene, cfg: &Config, samples: u64, seed: u64) -> Result<VerificationReport> {
    if scene.germs.is_empty() {
        return Err(Error::InvalidInput("scene declares no germs".into()));
    }
    verify(scene, cfg, samples, seed, &applicable(scene))
}
