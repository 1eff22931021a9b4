//! Monte Carlo risk estimation, parameter sweeps and phase-diagram grids.
//!
//! Every random draw comes from an indexed stream of the run's [`Seed`]:
//! null trial `i` samples from `("h0-graph", i)`, planted trial `i` from
//! `("h1-graph", i)`, and a randomised detector on those trials uses
//! `("h0-detector", i)` / `("h1-detector", i)`. Verdicts are collected in
//! trial order before counting, so results do not depend on how trials are
//! scheduled across threads.

use std::fmt::Write as _;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detectors::{check_feasible, run_test, DetectOptions, Method};
use crate::error::{param, Result};
use crate::graph::Graph;
use crate::measures::{classify_region, RegimeExponents, RegionLabel};
use crate::model::{sample_er, sample_planted_unchecked, ModelParams};
use crate::seed::Seed;

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Something that maps a graph to a verdict in `{0, 1}`. `trial` is a seed
/// private to this graph, for detectors that need randomness.
pub trait Detector: Sync {
    fn label(&self) -> String;
    fn verdict(&self, g: &Graph, trial: &Seed) -> Result<u8>;
}

/// One of the library tests with its threshold, at fixed model parameters.
#[derive(Debug, Clone)]
pub struct TestDetector {
    pub method: Method,
    pub params: ModelParams,
    pub options: DetectOptions,
}

impl Detector for TestDetector {
    fn label(&self) -> String {
        self.method.name().to_string()
    }

    fn verdict(&self, g: &Graph, trial: &Seed) -> Result<u8> {
        let mut options = self.options.clone();
        if self.method == Method::ScanGreedy {
            options.greedy_seed = *trial;
        }
        Ok(run_test(g, &self.params, self.method, &options)?.verdict)
    }
}

/// Always answers the same.
#[derive(Debug, Clone, Copy)]
pub struct ConstantDetector(pub u8);

impl Detector for ConstantDetector {
    fn label(&self) -> String {
        format!("constant-{}", self.0)
    }

    fn verdict(&self, _: &Graph, _: &Seed) -> Result<u8> {
        Ok(self.0)
    }
}

/// Ignores the graph and answers 1 with probability `rate`.
#[derive(Debug, Clone, Copy)]
pub struct CoinDetector(pub f64);

impl Detector for CoinDetector {
    fn label(&self) -> String {
        format!("coin-{}", self.0)
    }

    fn verdict(&self, _: &Graph, trial: &Seed) -> Result<u8> {
        Ok(trial.stream("coin", 0).gen_bool(self.0) as u8)
    }
}

/// Wilson score interval for `successes` out of `trials` at normal quantile `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (phat + z2 / (2.0 * n)) / denom;
    let half = z / denom * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

fn wilson_half_width(successes: u64, trials: u64) -> f64 {
    let (lo, hi) = wilson_interval(successes, trials, Z_95);
    (hi - lo) / 2.0
}

/// Empirical Type I + Type II risk with 95% Wilson intervals per rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskEstimate {
    pub method: String,
    pub trials: u64,
    pub type1_hat: f64,
    pub type2_hat: f64,
    pub risk_hat: f64,
    /// Sum of the two per-rate half-widths.
    pub ci_half_width: f64,
    pub type1_ci: (f64, f64),
    pub type2_ci: (f64, f64),
    pub seed: Seed,
}

/// Risk of a library test. Validates the parameters and the method's
/// enumeration budget before drawing anything.
pub fn mc_risk(
    method: Method,
    params: &ModelParams,
    trials: u64,
    seed: Seed,
    options: &DetectOptions,
) -> Result<RiskEstimate> {
    params.validate()?;
    check_feasible(params, method, options)?;
    let detector = TestDetector { method, params: *params, options: options.clone() };
    mc_risk_with(&detector, params, trials, seed)
}

/// Risk of an arbitrary detector. Does not require `p > q`, so it can be
/// used to check that nothing beats chance when the hypotheses coincide.
pub fn mc_risk_with(detector: &dyn Detector, params: &ModelParams, trials: u64, seed: Seed) -> Result<RiskEstimate> {
    if trials == 0 {
        return Err(param("trials must be at least 1"));
    }
    let null_hits = count_verdicts(trials, |i| {
        let g = sample_er(params.n, params.q, &mut seed.stream("h0-graph", i))?;
        detector.verdict(&g, &seed.derive("h0-detector", i))
    })?;
    let planted_hits = count_verdicts(trials, |i| {
        let (g, _) = sample_planted_unchecked(params, &mut seed.stream("h1-graph", i))?;
        detector.verdict(&g, &seed.derive("h1-detector", i))
    })?;
    let misses = trials - planted_hits;
    let type1_hat = null_hits as f64 / trials as f64;
    let type2_hat = misses as f64 / trials as f64;
    Ok(RiskEstimate {
        method: detector.label(),
        trials,
        type1_hat,
        type2_hat,
        risk_hat: type1_hat + type2_hat,
        ci_half_width: wilson_half_width(null_hits, trials) + wilson_half_width(misses, trials),
        type1_ci: wilson_interval(null_hits, trials, Z_95),
        type2_ci: wilson_interval(misses, trials, Z_95),
        seed,
    })
}

fn count_verdicts<F>(trials: u64, run: F) -> Result<u64>
where
    F: Fn(u64) -> Result<u8> + Sync + Send,
{
    let verdicts: Vec<u8> = (0..trials).into_par_iter().map(run).collect::<Result<_>>()?;
    Ok(verdicts.iter().map(|&v| v as u64).sum())
}

/// One `(cell, method)` result of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub cell: usize,
    pub params: ModelParams,
    pub method: Method,
    pub estimate: Option<RiskEstimate>,
    pub error: Option<String>,
    /// Seed of this cell, `root.derive("cell", cell)`.
    pub seed: Seed,
    pub scan_cap: u128,
    pub enum_cap: u128,
    pub greedy_restarts: usize,
    /// Seconds spent on this row. Not part of any deterministic output.
    pub wall_time: f64,
}

/// Runs every method on every cell. Cell `i` uses `seed.derive("cell", i)`,
/// so adding cells leaves existing ones untouched. A failing cell is
/// recorded in its row and the sweep carries on.
pub fn sweep(
    grid: &[ModelParams],
    methods: &[Method],
    trials: u64,
    seed: Seed,
    options: &DetectOptions,
) -> Vec<SweepRow> {
    let mut rows = Vec::with_capacity(grid.len() * methods.len());
    for (cell, params) in grid.iter().enumerate() {
        let cell_seed = seed.derive("cell", cell as u64);
        for &method in methods {
            let start = Instant::now();
            let result = mc_risk(method, params, trials, cell_seed, options);
            let (estimate, error) = match result {
                Ok(e) => (Some(e), None),
                Err(e) => (None, Some(e.to_string())),
            };
            rows.push(SweepRow {
                cell,
                params: *params,
                method,
                estimate,
                error,
                seed: cell_seed,
                scan_cap: options.scan_cap,
                enum_cap: options.enum_cap,
                greedy_restarts: options.greedy_restarts,
                wall_time: start.elapsed().as_secs_f64(),
            });
        }
    }
    rows
}

pub const SWEEP_CSV_HEADER: &str = "n,kr,kl,p,q,method,trials,type1,type2,risk,ci,seed,scan_cap,enum_cap,error";

impl SweepRow {
    /// CSV record in [`SWEEP_CSV_HEADER`] order; `with_time` appends the
    /// wall time as a final column.
    pub fn csv_record(&self, with_time: bool) -> String {
        let p = &self.params;
        let mut out = format!("{},{},{},{},{},{},", p.n, p.kr, p.kl, p.p, p.q, self.method.name());
        match &self.estimate {
            Some(e) => write!(out, "{},{},{},{},{}", e.trials, e.type1_hat, e.type2_hat, e.risk_hat, e.ci_half_width),
            None => write!(out, ",,,,"),
        }
        .unwrap();
        let error = self.error.as_deref().unwrap_or("").replace(['"', ','], " ");
        write!(out, ",{},{},{},{}", self.seed.root, self.scan_cap, self.enum_cap, error).unwrap();
        if with_time {
            write!(out, ",{}", self.wall_time).unwrap();
        }
        out
    }
}

/// How `betaL` scales with `betaR` along a phase-diagram slice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// `kL ≍ kR`.
    Balanced,
    /// `kL ≍ kR^{2/3}`.
    Lightly,
    /// `kL ≍ kR^{1/2}`.
    Moderately,
    /// `kL` constant.
    Extremely,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Balanced, Family::Lightly, Family::Moderately, Family::Extremely];

    pub fn name(&self) -> &'static str {
        match self {
            Family::Balanced => "balanced",
            Family::Lightly => "lightly",
            Family::Moderately => "moderately",
            Family::Extremely => "extremely",
        }
    }

    pub fn from_name(s: &str) -> Option<Family> {
        Family::ALL.into_iter().find(|f| f.name() == s)
    }

    pub fn beta_l(&self, beta_r: f64) -> f64 {
        match self {
            Family::Balanced => beta_r,
            Family::Lightly => 2.0 * beta_r / 3.0,
            Family::Moderately => beta_r / 2.0,
            Family::Extremely => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseCell {
    pub beta: f64,
    pub beta_l: f64,
    pub alpha: f64,
    pub label: RegionLabel,
}

/// Classifies every `(beta, alpha)` pair, `beta` outer. Fails on the first
/// pair outside the exponent ranges.
pub fn phase_grid(betas: &[f64], alphas: &[f64], family: Family, tol: f64) -> Result<Vec<PhaseCell>> {
    let mut cells = Vec::with_capacity(betas.len() * alphas.len());
    for &beta in betas {
        for &alpha in alphas {
            let exps = RegimeExponents::new(beta, family.beta_l(beta), alpha)?;
            cells.push(PhaseCell { beta, beta_l: exps.beta_l, alpha, label: classify_region(&exps, tol) });
        }
    }
    Ok(cells)
}

pub const PHASE_CSV_HEADER: &str = "beta,alpha,label,witnesses";

impl PhaseCell {
    /// `beta,alpha,label,witnesses` with witnesses joined by `;`.
    pub fn csv_record(&self) -> String {
        let witnesses: Vec<String> = self.label.witnesses().iter().map(|t| t.to_string()).collect();
        format!("{},{},{},{}", self.beta, self.alpha, self.label.name(), witnesses.join(";"))
    }
}

/// `start, start + step, …` up to `end` inclusive (with a relative slack of
/// `1e-9` steps), each value rounded to 12 decimals so that printed grids
/// read `0.15` rather than `0.15000000000000002`.
pub fn stepped_range(start: f64, end: f64, step: f64) -> Result<Vec<f64>> {
    if !(start.is_finite() && end.is_finite() && step.is_finite()) || step <= 0.0 {
        return Err(param(format!("range needs finite bounds and a positive step, got {start}:{end}:{step}")));
    }
    if end < start {
        return Err(param(format!("range end {end} is below its start {start}")));
    }
    let count = ((end - start) / step + 1e-9).floor() as u64;
    Ok((0..=count).map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12).collect())
}
