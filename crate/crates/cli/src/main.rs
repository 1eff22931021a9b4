//! `pdbs`: sampling, detection, risk estimation, exact oracles, low-degree
//! norms and phase grids for the planted dense bipartite subgraph model.
//!
//! Exit status: 0 success, 2 usage error, 3 enumeration budget exceeded,
//! 4 input parse error, 1 anything else. Diagnostics go to stderr prefixed
//! with `error[E_...]`.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pdbs::detectors::check_feasible;
use pdbs::experiments::{mc_risk, phase_grid, stepped_range, sweep, Family};
use pdbs::measures::{chi2_of, thm1_impossible, DEFAULT_BOUNDARY_TOL};
use pdbs::model::{sample_er, sample_planted};
use pdbs::oracle::{
    bayes_risk_exact, risk_lower_bound, second_moment_bruteforce, second_moment_exact, MAX_ENUMERATED_PAIRS,
};
use pdbs::{low_degree, run_test, Graph, Method, ModelParams, RegimeExponents};
use serde::Serialize;

use config::{FileConfig, Overrides, Settings};
use output::{Emitter, Format};

#[derive(Debug)]
pub struct CliError {
    code: u8,
    tag: &'static str,
    msg: String,
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> CliError {
        CliError { code: 2, tag: "E_USAGE", msg: msg.into() }
    }

    pub fn parse(msg: impl Into<String>) -> CliError {
        CliError { code: 4, tag: "E_PARSE", msg: msg.into() }
    }

    pub fn io(msg: impl Into<String>) -> CliError {
        CliError { code: 1, tag: "E_IO", msg: msg.into() }
    }
}

impl From<pdbs::Error> for CliError {
    fn from(e: pdbs::Error) -> CliError {
        let (code, tag) = match &e {
            pdbs::Error::Param(_) | pdbs::Error::Index { .. } => (2, "E_PARAM"),
            pdbs::Error::BudgetExceeded { .. } => (3, "E_BUDGET"),
            pdbs::Error::Parse { .. } => (4, "E_PARSE"),
            pdbs::Error::Normalization { .. } => (1, "E_NUMERIC"),
        };
        CliError { code, tag, msg: e.to_string() }
    }
}

#[derive(Parser)]
#[command(name = "pdbs", version, about = "Planted dense bipartite subgraph detection experiments")]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Root seed: an integer, 0x-prefixed hex, or `random`.
    #[arg(long, global = true)]
    seed: Option<String>,
    /// TOML file with defaults for seed, threads, caps, greedy_restarts, trials.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output format (each subcommand has its own default).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write results here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Largest scan search space |S| enumerated exactly (env SCAN_CAP).
    #[arg(long, global = true)]
    scan_cap: Option<u128>,
    /// Largest placement / subset enumeration (env ENUM_CAP).
    #[arg(long, global = true)]
    enum_cap: Option<u128>,
    /// Restarts for the local-search scan.
    #[arg(long, global = true)]
    greedy_restarts: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
struct ModelArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    kr: usize,
    #[arg(long)]
    kl: usize,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    q: f64,
}

impl ModelArgs {
    fn params(&self) -> Result<ModelParams, CliError> {
        Ok(ModelParams::new(self.n, self.kr, self.kl, self.p, self.q)?)
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum FamilyArg {
    Balanced,
    Lightly,
    Moderately,
    Extremely,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Family {
        match f {
            FamilyArg::Balanced => Family::Balanced,
            FamilyArg::Lightly => Family::Lightly,
            FamilyArg::Moderately => Family::Moderately,
            FamilyArg::Extremely => Family::Extremely,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sample a graph; the edge list goes to --out, planted sets to stdout.
    Sample {
        #[command(flatten)]
        model: ModelArgs,
        /// Sample from the null G(n, q) instead.
        #[arg(long)]
        null: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run tests on an edge-list file, or on a graph sampled like `sample`.
    Detect {
        /// Comma-separated: scan, scan-greedy, count, degree, lrt.
        #[arg(long, value_delimiter = ',', required = true)]
        method: Vec<String>,
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// Required unless --in is given; must match the file if both are.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        kr: usize,
        #[arg(long)]
        kl: usize,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        null: bool,
    },
    /// Monte Carlo Type I + Type II risk.
    Risk {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        method: Vec<String>,
        #[arg(long)]
        trials: Option<u64>,
    },
    /// Second moment, Bayes risk and its lower bound, impossibility check.
    Oracle {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Degree-D likelihood-ratio norm.
    Lowdeg {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        kr: usize,
        #[arg(long)]
        kl: usize,
        #[arg(long, requires = "q", conflicts_with = "lambda")]
        p: Option<f64>,
        #[arg(long, requires = "p")]
        q: Option<f64>,
        /// Signal strength χ²(p‖q) directly, instead of --p/--q.
        #[arg(long)]
        lambda: Option<f64>,
        /// Degree cap (default kR·kL).
        #[arg(long)]
        d: Option<usize>,
        /// Report every D from 0 up to the cap.
        #[arg(long)]
        curve: bool,
    },
    /// Asymptotic phase labels on a (beta, alpha) grid.
    Phase {
        #[arg(long, value_enum)]
        family: FamilyArg,
        /// start:end:step, inclusive.
        #[arg(long)]
        beta: String,
        /// start:end:step, inclusive.
        #[arg(long)]
        alpha: String,
        #[arg(long, default_value_t = DEFAULT_BOUNDARY_TOL)]
        tol: f64,
    },
    /// Monte Carlo risk over the Cartesian product of parameter lists.
    Sweep {
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        kr: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        kl: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        q: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        method: Vec<String>,
        #[arg(long)]
        trials: Option<u64>,
        /// Append per-row wall time (makes output run-dependent).
        #[arg(long)]
        timing: bool,
    },
}

const DEFAULT_TRIALS: u64 = 100;

fn parse_methods(names: &[String]) -> Result<Vec<Method>, CliError> {
    names
        .iter()
        .map(|s| {
            Method::from_name(s.trim()).ok_or_else(|| {
                let known: Vec<&str> = Method::ALL.iter().map(|m| m.name()).collect();
                CliError::usage(format!("unknown method `{s}` (expected one of {})", known.join(", ")))
            })
        })
        .collect()
}

fn parse_range(flag: &str, text: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| CliError::usage(format!("--{flag}: invalid number `{s}`")));
    match parts.as_slice() {
        [v] => Ok(vec![num(v)?]),
        [a, b, s] => stepped_range(num(a)?, num(b)?, num(s)?).map_err(|e| CliError::usage(format!("--{flag}: {e}"))),
        _ => Err(CliError::usage(format!("--{flag}: expected start:end:step or a single value, got `{text}`"))),
    }
}

fn read_graph(path: &PathBuf) -> Result<Graph, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    Graph::parse_edge_list(&text).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct SampleResult<'a> {
    n: usize,
    edges: usize,
    edge_file: String,
    planted: Option<&'a pdbs::PlantedSets>,
}

#[derive(Serialize)]
pub struct OracleResult {
    chi2: f64,
    second_moment: f64,
    second_moment_bruteforce: Option<f64>,
    lower_bound: f64,
    bayes_risk: Option<f64>,
    tv: Option<f64>,
    skipped: Vec<String>,
    impossible: bool,
    impossibility_conditions: Vec<&'static str>,
}

#[derive(Serialize)]
struct LowdegResult {
    lambda: f64,
    reports: Vec<low_degree::LdlrReport>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let settings = Settings::resolve(
        Overrides {
            seed: cli.seed.clone(),
            threads: cli.threads,
            scan_cap: cli.scan_cap,
            enum_cap: cli.enum_cap,
            greedy_restarts: cli.greedy_restarts,
        },
        file,
    )?;
    if let Some(t) = settings.threads {
        if t == 0 {
            return Err(CliError::usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::io(format!("thread pool: {e}")))?;
    }
    let out = Emitter::new(cli.output.clone(), cli.format);
    let seed = settings.seed();
    let options = settings.detect_options();

    match cli.command {
        Command::Sample { model, null: from_null, out: path } => {
            let params = model.params()?;
            let mut rng = seed.stream("sample", 0);
            let (g, planted) = if from_null {
                (sample_er(params.n, params.q, &mut rng)?, None)
            } else {
                let (g, sets) = sample_planted(&params, &mut rng)?;
                (g, Some(sets))
            };
            std::fs::write(&path, g.to_edge_list())
                .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))?;
            let echo = output::echo("sample", &settings, serde_json::json!({ "model": model, "null": from_null }));
            let result = SampleResult {
                n: g.n(),
                edges: g.edge_count(),
                edge_file: path.display().to_string(),
                planted: planted.as_ref(),
            };
            out.json_only(&echo, &result)
        }
        Command::Detect { method, input, n, kr, kl, p, q, null: from_null } => {
            let methods = parse_methods(&method)?;
            let graph = match &input {
                Some(path) => Some(read_graph(path)?),
                None => None,
            };
            let n = match (&graph, n) {
                (Some(g), Some(n)) if g.n() != n => {
                    return Err(CliError::usage(format!("--n {n} does not match the {} vertices in the input", g.n())))
                }
                (Some(g), _) => g.n(),
                (None, Some(n)) => n,
                (None, None) => return Err(CliError::usage("--n is required without --in")),
            };
            let params = ModelParams::new(n, kr, kl, p, q)?;
            for &m in &methods {
                check_feasible(&params, m, &options)?;
            }
            let g = match graph {
                Some(g) => g,
                None => {
                    let mut rng = seed.stream("sample", 0);
                    if from_null {
                        sample_er(n, q, &mut rng)?
                    } else {
                        sample_planted(&params, &mut rng)?.0
                    }
                }
            };
            let outcomes =
                methods.iter().map(|&m| run_test(&g, &params, m, &options)).collect::<Result<Vec<_>, _>>()?;
            let args = serde_json::json!({
                "methods": methods, "input": input.map(|p| p.display().to_string()),
                "n": n, "kr": kr, "kl": kl, "p": p, "q": q, "null": from_null,
            });
            let echo = output::echo("detect", &settings, args);
            out.emit(Format::Json, &echo, &outcomes, || output::detect_csv(&outcomes))
        }
        Command::Risk { model, method, trials } => {
            let methods = parse_methods(&method)?;
            let params = model.params()?;
            let trials = trials.or(settings.trials).unwrap_or(DEFAULT_TRIALS);
            for &m in &methods {
                check_feasible(&params, m, &options)?;
            }
            let estimates =
                methods.iter().map(|&m| mc_risk(m, &params, trials, seed, &options)).collect::<Result<Vec<_>, _>>()?;
            let args = serde_json::json!({ "model": model, "methods": methods, "trials": trials });
            let echo = output::echo("risk", &settings, args);
            out.emit(Format::Csv, &echo, &estimates, || output::risk_csv(&params, &estimates))
        }
        Command::Oracle { model } => {
            let params = model.params()?;
            let m2 = second_moment_exact(&params)?;
            let mut skipped = Vec::new();
            let brute = match second_moment_bruteforce(&params, settings.enum_cap) {
                Ok(b) => Some(b.value),
                Err(pdbs::Error::BudgetExceeded { required, cap }) => {
                    skipped.push(format!("second_moment_bruteforce: {required} placement pairs exceed cap {cap}"));
                    None
                }
                Err(e) => return Err(e.into()),
            };
            let pairs = params.n * (params.n - 1) / 2;
            let exact = if pairs <= MAX_ENUMERATED_PAIRS {
                Some(bayes_risk_exact(&params, settings.enum_cap)?)
            } else {
                skipped.push(format!(
                    "bayes_risk: {pairs} vertex pairs exceed the {MAX_ENUMERATED_PAIRS}-pair enumeration limit"
                ));
                None
            };
            let verdict = thm1_impossible(&params);
            let result = OracleResult {
                chi2: chi2_of(&params),
                second_moment: m2.value,
                second_moment_bruteforce: brute,
                lower_bound: risk_lower_bound(&m2),
                bayes_risk: exact.map(|e| e.bayes_risk),
                tv: exact.map(|e| e.tv),
                skipped,
                impossible: verdict.impossible,
                impossibility_conditions: verdict.satisfied.iter().map(|c| c.label()).collect(),
            };
            let echo = output::echo("oracle", &settings, serde_json::json!({ "model": model }));
            out.emit(Format::Json, &echo, &result, || output::oracle_csv(&result))
        }
        Command::Lowdeg { n, kr, kl, p, q, lambda, d, curve } => {
            let lambda = match (lambda, p, q) {
                (Some(l), _, _) => l,
                (None, Some(p), Some(q)) => chi2_of(&ModelParams::new(n, kr, kl, p, q)?),
                _ => return Err(CliError::usage("give either --lambda or both --p and --q")),
            };
            let d = d.unwrap_or(kr * kl);
            let mut reports = low_degree::ldlr_curve_for(n, kr, kl, lambda, d, settings.enum_cap)?;
            if !curve {
                reports.drain(..reports.len() - 1);
            }
            let args = serde_json::json!({ "n": n, "kr": kr, "kl": kl, "p": p, "q": q, "lambda": lambda, "d": d, "curve": curve });
            let echo = output::echo("lowdeg", &settings, args);
            let result = LowdegResult { lambda, reports };
            out.emit(Format::Json, &echo, &result, || output::lowdeg_csv(&result.reports))
        }
        Command::Phase { family, beta, alpha, tol } => {
            let fam: Family = family.into();
            let betas = keep_valid("beta", parse_range("beta", &beta)?, |b| {
                RegimeExponents::new(b, fam.beta_l(b), 0.0).is_ok()
            });
            let alphas =
                keep_valid("alpha", parse_range("alpha", &alpha)?, |a| RegimeExponents::new(0.0, 0.0, a).is_ok());
            let cells = phase_grid(&betas, &alphas, fam, tol)?;
            let args = serde_json::json!({ "family": family, "beta": betas, "alpha": alphas, "tol": tol });
            let echo = output::echo("phase", &settings, args);
            out.emit(Format::Csv, &echo, &cells, || output::phase_csv(&cells))
        }
        Command::Sweep { n, kr, kl, p, q, method, trials, timing } => {
            let methods = parse_methods(&method)?;
            let trials = trials.or(settings.trials).unwrap_or(DEFAULT_TRIALS);
            let mut grid = Vec::new();
            for &n in &n {
                for &kr in &kr {
                    for &kl in &kl {
                        for &p in &p {
                            for &q in &q {
                                grid.push(ModelParams::new_unchecked(n, kr, kl, p, q));
                            }
                        }
                    }
                }
            }
            let rows = sweep(&grid, &methods, trials, seed, &options);
            let args = serde_json::json!({ "n": n, "kr": kr, "kl": kl, "p": p, "q": q, "methods": methods, "trials": trials, "timing": timing });
            let echo = output::echo("sweep", &settings, args);
            if timing {
                out.emit(Format::Csv, &echo, &rows, || output::sweep_csv(&rows, true))
            } else {
                let rows: Vec<output::UntimedRow> = rows.iter().map(output::UntimedRow::from).collect();
                out.emit(Format::Csv, &echo, &rows, || output::sweep_csv_untimed(&rows))
            }
        }
    }
}

/// Drops range values outside the valid exponent range, with a warning.
fn keep_valid(flag: &str, values: Vec<f64>, ok: impl Fn(f64) -> bool) -> Vec<f64> {
    let (kept, dropped): (Vec<f64>, Vec<f64>) = values.into_iter().partition(|&v| ok(v));
    if !dropped.is_empty() {
        let list: Vec<String> = dropped.iter().map(|v| v.to_string()).collect();
        eprintln!("warning: --{flag}: dropped out-of-range values {}", list.join(", "));
    }
    kept
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {}", e.tag, e.msg);
            ExitCode::from(e.code)
        }
    }
}
