//! Numerical tolerances and run-time knobs, gathered in one record.

use serde::{Deserialize, Serialize};

/// How the `δ → 0⁺` limit of a slice Euler characteristic is realized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum LimitMode {
    /// Ball-free nerve of the rescaled slice; exact for conic inputs.
    #[default]
    Exact,
    /// Ladder `δ_r = 0.5·4^{-r}` with the unit ball, stopping at two equal rungs.
    Ladder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    /// Relative singular-value cutoff for rank decisions.
    pub rank_cutoff: f64,
    /// Maximum entry of `QᵀQ − I` accepted for orthonormal frames.
    pub orthonormal_residual: f64,
    /// LP margins at or below this are feasible.
    pub tol_feasible: f64,
    /// LP margins at or above this are infeasible; in between is degenerate.
    pub tol_degenerate: f64,
    /// Relative band around the ball radius treated as degenerate.
    pub ball_margin: f64,
    /// Target accuracy of point-to-polyhedron distances.
    pub tol_dist: f64,
    /// LP pivot cap is this factor times (variables + constraints).
    pub lp_iteration_factor: usize,
    /// Sweep cap for the alternating-projection cross solver.
    pub projection_sweep_cap: usize,
    /// Maximum number of subsets probed by one Euler query.
    pub subset_budget: u64,
    /// Largest accepted fraction of degenerate draws in one estimate.
    pub degeneracy_cap: f64,
    /// Redraws allowed for one sample index before giving up.
    pub max_retries: u32,
    /// Inner sample count for nested sphere averages.
    pub inner_samples: usize,
    pub limit_mode: LimitMode,
    /// Number of rungs of the δ ladder.
    pub ladder_rungs: usize,
    /// Absolute tolerance of the verdict gate.
    pub abs_tol: f64,
    /// z-score at or below which a law passes.
    pub z_pass: f64,
    /// z-score above which (with the absolute gate) a law fails.
    pub z_fail: f64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            rank_cutoff: 1e-9,
            orthonormal_residual: 1e-12,
            tol_feasible: 1e-9,
            tol_degenerate: 1e-7,
            ball_margin: 1e-7,
            tol_dist: 1e-9,
            lp_iteration_factor: 10,
            projection_sweep_cap: 100_000,
            subset_budget: 1_000_000,
            degeneracy_cap: 0.002,
            max_retries: 16,
            inner_samples: 256,
            limit_mode: LimitMode::Exact,
            ladder_rungs: 8,
            abs_tol: 0.02,
            z_pass: 3.0,
            z_fail: 5.0,
        }
    }
}
