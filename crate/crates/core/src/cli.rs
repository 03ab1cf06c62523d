//! The `kinelab` command line.
//!
//! Exit codes: 0 ok, 1 a verification FAIL (or oracle disagreement),
//! 2 usage or scene error, 3 degeneracy budget, 4 enumeration budget.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{Config, LimitMode};
use crate::error::{Error, Result};
use crate::invariants::invariant_profile;
use crate::oracle::{feasibility_oracle, random_euler_oracle, scene_euler_oracle, EulerOracleSummary, FeasibilityOracleSummary};
use crate::sampling::sub_seed;
use crate::scene_io::{emit_profile, emit_report, parse_scene, Format, ProfileReport, Scene, REPORT_SCHEMA_VERSION};
use crate::verify::{applicable, verify, Law};

#[derive(Debug, Parser)]
#[command(name = "kinelab", version, about = "Local kinematic invariants of conic germs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate σ, Λ^lim, Λ^loc and the density of one germ.
    Invariants {
        #[command(flatten)]
        run: RunArgs,
        /// Germ name; optional when the scene has a single germ.
        #[arg(long)]
        germ: Option<String>,
    },
    /// Evaluate both sides of kinematic identities.
    Verify {
        #[command(flatten)]
        run: RunArgs,
        /// Law id, e.g. thm8.15.
        #[arg(long, conflicts_with = "all")]
        law: Option<String>,
        /// Comma-separated inputs (germs, then a polytope union for prop6.1).
        #[arg(long, value_delimiter = ',')]
        germs: Vec<String>,
        /// Every law applicable to the scene.
        #[arg(long)]
        all: bool,
    },
    /// Compare fast paths against exhaustive or exact ones.
    Oracle {
        #[command(flatten)]
        run: RunArgs,
        /// Float LP verdicts against exact rational feasibility.
        #[arg(long)]
        feasibility: bool,
        /// Random unions of up to 12 cells instead of scene queries.
        #[arg(long)]
        random: bool,
        /// Rounds (scene), queries (random) or instances (feasibility).
        #[arg(long, default_value_t = 500)]
        rounds: u64,
    },
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RunArgs {
    #[arg(long)]
    pub scene: Option<PathBuf>,
    /// Monte Carlo samples per estimate.
    #[arg(long, default_value_t = 20_000, value_parser = clap::value_parser!(u64).range(100..))]
    pub samples: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Worker threads (default: available parallelism).
    #[arg(long, env = "KINELAB_WORKERS", value_parser = clap::value_parser!(u64).range(1..))]
    pub workers: Option<u64>,
    /// Output path, `-` for stdout.
    #[arg(long, default_value = "-")]
    pub out: String,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    #[serde(skip)]
    pub format: Format,
    /// Print the effective configuration and exit.
    #[arg(long)]
    #[serde(skip)]
    pub dump_config: bool,
    /// JSON file with configuration overrides (the `config` object of `--dump-config`).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub abs_tol: Option<f64>,
    #[arg(long)]
    pub z_pass: Option<f64>,
    #[arg(long)]
    pub z_fail: Option<f64>,
    #[arg(long)]
    pub degeneracy_cap: Option<f64>,
    #[arg(long)]
    pub subset_budget: Option<u64>,
    #[arg(long, value_enum)]
    pub limit_mode: Option<LimitMode>,
    /// Record wall time in reports (makes them run-dependent).
    #[arg(long)]
    pub wall_time: bool,
}

impl RunArgs {
    pub fn effective_config(&self) -> Result<Config> {
        let mut cfg = match &self.config {
            Some(p) => {
                let text = read(p)?;
                serde_json::from_str(&text).map_err(|e| Error::Schema { path: p.display().to_string(), message: e.to_string() })?
            }
            None => Config::default(),
        };
        if let Some(v) = self.abs_tol {
            cfg.abs_tol = v;
        }
        if let Some(v) = self.z_pass {
            cfg.z_pass = v;
        }
        if let Some(v) = self.z_fail {
            cfg.z_fail = v;
        }
        if let Some(v) = self.degeneracy_cap {
            cfg.degeneracy_cap = v;
        }
        if let Some(v) = self.subset_budget {
            cfg.subset_budget = v;
        }
        if let Some(v) = self.limit_mode {
            cfg.limit_mode = v;
        }
        Ok(cfg)
    }

    fn workers(&self) -> usize {
        self.workers.map(|w| w as usize).unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }

    fn load_scene(&self) -> Result<Scene> {
        let p = self.scene.as_ref().ok_or_else(|| Error::InvalidInput("--scene is required".into()))?;
        parse_scene(&read(p)?)
    }
}

fn read(p: &Path) -> Result<String> {
    std::fs::read_to_string(p).map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", p.display())))
}

fn write_out(out: &str, text: &str) -> Result<()> {
    if out == "-" {
        print!("{text}");
        Ok(())
    } else {
        std::fs::write(out, text).map_err(|e| Error::InvalidInput(format!("cannot write {out}: {e}")))
    }
}

#[derive(Serialize)]
struct DumpedConfig<'a> {
    command: &'a str,
    #[serde(flatten)]
    run: &'a RunArgs,
    workers_effective: usize,
    format: String,
    config: Config,
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    let (name, run) = match &cli.command {
        Command::Invariants { run, .. } => ("invariants", run),
        Command::Verify { run, .. } => ("verify", run),
        Command::Oracle { run, .. } => ("oracle", run),
    };
    let cfg = run.effective_config()?;
    if run.dump_config {
        let d = DumpedConfig {
            command: name,
            run,
            workers_effective: run.workers(),
            format: format!("{:?}", run.format).to_lowercase(),
            config: cfg,
        };
        println!("{}", serde_json::to_string_pretty(&d).expect("config serializes"));
        return Ok(0);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(run.workers())
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Invariants { run, germ } => cmd_invariants(run, germ.as_deref(), &cfg),
        Command::Verify { run, law, germs, all } => cmd_verify(run, law.as_deref(), germs, *all, &cfg),
        Command::Oracle { run, feasibility, random, rounds } => cmd_oracle(run, *feasibility, *random, *rounds, &cfg),
    })
}

fn cmd_invariants(run: &RunArgs, germ: Option<&str>, cfg: &Config) -> Result<i32> {
    let scene = run.load_scene()?;
    let name = match germ {
        Some(g) => g.to_string(),
        None if scene.germs.len() == 1 => scene.germs.keys().next().cloned().unwrap_or_default(),
        None => return Err(Error::InvalidInput("--germ is required when the scene has several germs".into())),
    };
    let x = scene
        .germs
        .get(&name)
        .ok_or_else(|| Error::InvalidInput(format!("scene has no germ named '{name}'")))?;
    let profile = invariant_profile(x, run.samples, sub_seed(run.seed, &format!("profile/{name}")), cfg)?;
    let report = ProfileReport {
        schema_version: REPORT_SCHEMA_VERSION.into(),
        scene_fingerprint: scene.fingerprint(),
        seed: run.seed,
        samples: run.samples,
        profile,
    };
    write_out(&run.out, &emit_profile(&report, run.format))?;
    Ok(0)
}

fn cmd_verify(run: &RunArgs, law: Option<&str>, germs: &[String], all: bool, cfg: &Config) -> Result<i32> {
    let scene = run.load_scene()?;
    for g in germs {
        if !scene.germs.contains_key(g) && !scene.polytope_unions.contains_key(g) {
            return Err(Error::InvalidInput(format!("scene has no germ or polytope union named '{g}'")));
        }
    }
    let plan: Vec<(Law, Vec<String>)> = match (law, all) {
        (Some(id), _) => {
            let law: Law = id.parse()?;
            if germs.is_empty() {
                let p: Vec<_> = applicable(&scene).into_iter().filter(|(l, _)| *l == law).collect();
                if p.is_empty() {
                    return Err(Error::UnsupportedScene { law: law.id().into(), reason: "no applicable inputs in scene".into() });
                }
                p
            } else {
                vec![(law, germs.to_vec())]
            }
        }
        (None, true) => {
            if scene.germs.is_empty() {
                return Err(Error::InvalidInput("scene declares no germs".into()));
            }
            applicable(&scene).into_iter().filter(|(_, ins)| germs.is_empty() || ins.iter().all(|i| germs.contains(i))).collect()
        }
        (None, false) => {
            return Err(Error::InvalidInput(format!("give --law <id> or --all; valid ids: {}", Law::valid_ids())));
        }
    };
    let start = Instant::now();
    let mut report = verify(&scene, cfg, run.samples, run.seed, &plan)?;
    if run.wall_time {
        report.wall_time_s = Some(start.elapsed().as_secs_f64());
    }
    write_out(&run.out, &emit_report(&report, run.format))?;
    Ok(if report.any_fail() { 1 } else { 0 })
}

#[derive(Serialize)]
struct OracleOutput {
    euler: Option<EulerOracleSummary>,
    feasibility: Option<FeasibilityOracleSummary>,
}

fn oracle_text(o: &OracleOutput, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(o).expect("summaries serialize");
            s.push('\n');
            s
        }
        Format::Csv | Format::Markdown => {
            let mut rows: Vec<[String; 5]> = Vec::new();
            if let Some(e) = &o.euler {
                rows.push([
                    "euler".into(),
                    e.queries.to_string(),
                    e.agreed.to_string(),
                    e.degenerate.to_string(),
                    (e.queries - e.agreed - e.degenerate).to_string(),
                ]);
            }
            if let Some(f) = &o.feasibility {
                rows.push([
                    "feasibility".into(),
                    f.instances.to_string(),
                    f.agreed.to_string(),
                    f.flagged_degenerate.to_string(),
                    f.disagreed.to_string(),
                ]);
            }
            let mut s = String::new();
            if format == Format::Csv {
                s.push_str("check,total,agreed,degenerate,disagreed\n");
                for r in rows {
                    let _ = writeln!(s, "{}", r.join(","));
                }
            } else {
                s.push_str("| check | total | agreed | degenerate | disagreed |\n|---|---|---|---|---|\n");
                for r in rows {
                    let _ = writeln!(s, "| {} |", r.join(" | "));
                }
            }
            s
        }
    }
}

fn cmd_oracle(run: &RunArgs, feasibility: bool, random: bool, rounds: u64, cfg: &Config) -> Result<i32> {
    let mut out = OracleOutput { euler: None, feasibility: None };
    if feasibility {
        out.feasibility = Some(feasibility_oracle(rounds, sub_seed(run.seed, "oracle/feasibility"), cfg)?);
    }
    if random {
        out.euler = Some(random_euler_oracle(rounds, sub_seed(run.seed, "oracle/random"), cfg)?);
    } else if run.scene.is_some() || !feasibility {
        let scene = run.load_scene()?;
        out.euler = Some(scene_euler_oracle(&scene, rounds, sub_seed(run.seed, "oracle/scene"), cfg)?);
    }
    write_out(&run.out, &oracle_text(&out, run.format))?;
    let ok = out.euler.as_ref().is_none_or(|e| e.all_agree()) && out.feasibility.as_ref().is_none_or(|f| f.disagreed == 0);
    Ok(if ok { 0 } else { 1 })
}
