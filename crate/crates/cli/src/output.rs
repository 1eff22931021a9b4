//! Result writers. JSON output is `{"config": …, "result": …}`; CSV output
//! starts with one `# config=<json>` comment line, then a header row.
//! Floats use Rust's shortest round-trip formatting in both.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

use clap::ValueEnum;
use pdbs::experiments::{PhaseCell, RiskEstimate, SweepRow, PHASE_CSV_HEADER, SWEEP_CSV_HEADER};
use pdbs::low_degree::LdlrReport;
use pdbs::{DetectionOutcome, Method, ModelParams, Seed};
use serde::Serialize;

use crate::config::Settings;
use crate::{CliError, OracleResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Serialize)]
pub struct Echo {
    command: &'static str,
    settings: Settings,
    args: serde_json::Value,
}

pub fn echo(command: &'static str, settings: &Settings, args: serde_json::Value) -> Echo {
    Echo { command, settings: settings.clone(), args }
}

#[derive(Serialize)]
struct Envelope<'a, R: Serialize> {
    config: &'a Echo,
    result: &'a R,
}

pub struct Emitter {
    path: Option<PathBuf>,
    format: Option<Format>,
}

impl Emitter {
    pub fn new(path: Option<PathBuf>, format: Option<Format>) -> Emitter {
        Emitter { path, format }
    }

    fn write(&self, text: &str) -> Result<(), CliError> {
        match &self.path {
            Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(format!("cannot write {}: {e}", p.display()))),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| CliError::io(e.to_string()))
            }
        }
    }

    fn json<R: Serialize>(&self, echo: &Echo, result: &R) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(&Envelope { config: echo, result })
            .map_err(|e| CliError::io(format!("serialising output: {e}")))?;
        text.push('\n');
        self.write(&text)
    }

    /// Writes `result` as JSON, or the CSV body from `csv` under a config
    /// comment line.
    pub fn emit<R: Serialize>(
        &self,
        default: Format,
        echo: &Echo,
        result: &R,
        csv: impl FnOnce() -> String,
    ) -> Result<(), CliError> {
        match self.format.unwrap_or(default) {
            Format::Json => self.json(echo, result),
            Format::Csv => {
                let config =
                    serde_json::to_string(echo).map_err(|e| CliError::io(format!("serialising config: {e}")))?;
                self.write(&format!("# config={config}\n{}", csv()))
            }
        }
    }

    pub fn json_only<R: Serialize>(&self, echo: &Echo, result: &R) -> Result<(), CliError> {
        if self.format == Some(Format::Csv) {
            return Err(CliError::usage("this subcommand only writes JSON"));
        }
        self.json(echo, result)
    }
}

pub fn detect_csv(outcomes: &[DetectionOutcome]) -> String {
    let mut out = String::from("method,statistic,threshold,verdict,exact\n");
    for o in outcomes {
        writeln!(out, "{},{},{},{},{}", o.method.name(), o.statistic, o.threshold, o.verdict, o.exact).unwrap();
    }
    out
}

pub fn risk_csv(params: &ModelParams, estimates: &[RiskEstimate]) -> String {
    let mut out = String::from("n,kr,kl,p,q,method,trials,type1,type2,risk,ci,seed\n");
    for e in estimates {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            params.n,
            params.kr,
            params.kl,
            params.p,
            params.q,
            e.method,
            e.trials,
            e.type1_hat,
            e.type2_hat,
            e.risk_hat,
            e.ci_half_width,
            e.seed.root
        )
        .unwrap();
    }
    out
}

pub fn oracle_csv(r: &OracleResult) -> String {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    format!(
        "chi2,second_moment,second_moment_bruteforce,lower_bound,bayes_risk,tv,impossible\n{},{},{},{},{},{},{}\n",
        r.chi2,
        r.second_moment,
        opt(r.second_moment_bruteforce),
        r.lower_bound,
        opt(r.bayes_risk),
        opt(r.tv),
        r.impossible
    )
}

pub fn lowdeg_csv(reports: &[LdlrReport]) -> String {
    let mut out = String::from("d,norm_sq,terms_enumerated,increment\n");
    for r in reports {
        let inc = r.per_size.last().map(|&(_, v)| v).unwrap_or(0.0);
        writeln!(out, "{},{},{},{}", r.d, r.norm_sq, r.terms_enumerated, inc).unwrap();
    }
    out
}

pub fn phase_csv(cells: &[PhaseCell]) -> String {
    let mut out = format!("{PHASE_CSV_HEADER}\n");
    for c in cells {
        out.push_str(&c.csv_record());
        out.push('\n');
    }
    out
}

pub fn sweep_csv(rows: &[SweepRow], with_time: bool) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    if with_time {
        out.push_str(",wall_time");
    }
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_record(with_time));
        out.push('\n');
    }
    out
}

/// A sweep row without its wall time, for run-independent JSON.
#[derive(Serialize)]
pub struct UntimedRow {
    #[serde(skip)]
    row: SweepRow,
    cell: usize,
    params: ModelParams,
    method: Method,
    estimate: Option<RiskEstimate>,
    error: Option<String>,
    seed: Seed,
    scan_cap: u128,
    enum_cap: u128,
    greedy_restarts: usize,
}

impl From<&SweepRow> for UntimedRow {
    fn from(r: &SweepRow) -> UntimedRow {
        UntimedRow {
            row: r.clone(),
            cell: r.cell,
            params: r.params,
            method: r.method,
            estimate: r.estimate.clone(),
            error: r.error.clone(),
            seed: r.seed,
            scan_cap: r.scan_cap,
            enum_cap: r.enum_cap,
            greedy_restarts: r.greedy_restarts,
        }
    }
}

pub fn sweep_csv_untimed(rows: &[UntimedRow]) -> String {
    let full: Vec<SweepRow> = rows.iter().map(|r| r.row.clone()).collect();
    sweep_csv(&full, false)
}
