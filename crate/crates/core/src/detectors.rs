//! Scan, count and max-degree statistics, their thresholded tests, and the
//! exact likelihood-ratio test.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{for_each_subset, placement_count};
use crate::error::{param, Error, Result};
use crate::graph::{Graph, VertexMask};
use crate::measures::{tau_count, tau_deg, tau_scan};
use crate::model::{sample_planted_sets, ModelParams};
use crate::oracle;
use crate::seed::Seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    ScanExact,
    ScanGreedy,
    Count,
    Degree,
    #[serde(rename = "LRT")]
    Lrt,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::ScanExact, Method::ScanGreedy, Method::Count, Method::Degree, Method::Lrt];

    pub fn name(&self) -> &'static str {
        match self {
            Method::ScanExact => "scan",
            Method::ScanGreedy => "scan-greedy",
            Method::Count => "count",
            Method::Degree => "degree",
            Method::Lrt => "lrt",
        }
    }

    pub fn from_name(s: &str) -> Option<Method> {
        Method::ALL.into_iter().find(|m| m.name() == s)
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Verdict is 1 iff `statistic >= threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionOutcome {
    pub statistic: f64,
    pub threshold: f64,
    pub verdict: u8,
    pub method: Method,
    pub exact: bool,
}

impl DetectionOutcome {
    fn new(statistic: f64, threshold: f64, method: Method) -> DetectionOutcome {
        DetectionOutcome {
            statistic,
            threshold,
            verdict: u8::from(statistic >= threshold),
            method,
            exact: method != Method::ScanGreedy,
        }
    }

    pub fn rejects_null(&self) -> bool {
        self.verdict == 1
    }
}

pub const DEFAULT_SCAN_CAP: u128 = 1_000_000_000;
pub const DEFAULT_ENUM_CAP: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectOptions {
    /// Largest `|S_{kR,kL}|` the exact scan will enumerate.
    pub scan_cap: u128,
    /// Largest placement count for likelihood-ratio work.
    pub enum_cap: u128,
    pub greedy_restarts: usize,
    pub greedy_seed: Seed,
}

impl Default for DetectOptions {
    fn default() -> Self {
        DetectOptions {
            scan_cap: DEFAULT_SCAN_CAP,
            enum_cap: DEFAULT_ENUM_CAP,
            greedy_restarts: 20,
            greedy_seed: Seed::default(),
        }
    }
}

pub fn count_stat(g: &Graph) -> usize {
    g.edge_count()
}

pub fn maxdeg_stat(g: &Graph) -> usize {
    g.max_degree()
}

fn check_sizes(g: &Graph, kr: usize, kl: usize) -> Result<()> {
    if kr + kl > g.n() {
        return Err(param(format!("kR + kL = {} exceeds n = {}", kr + kl, g.n())));
    }
    Ok(())
}

/// `|S_{kR,kL}| = C(n, kR) C(n - kR, kL)`.
pub fn scan_search_size(n: usize, kr: usize, kl: usize) -> u128 {
    placement_count(n, kr, kl)
}

/// Sum of the `t` largest values in `counts`, each at most `max`.
fn top_sum(counts: impl Iterator<Item = usize>, t: usize, hist: &mut [usize]) -> usize {
    hist.iter_mut().for_each(|h| *h = 0);
    for c in counts {
        hist[c] += 1;
    }
    let (mut need, mut sum) = (t, 0);
    for (value, &count) in hist.iter().enumerate().rev() {
        let take = need.min(count);
        sum += take * value;
        need -= take;
        if need == 0 {
            break;
        }
    }
    sum
}

/// Densest `kR × kL` bipartite block, by exhaustive search.
///
/// Only the smaller side is enumerated: once it is fixed, the best partner set
/// is the `max(kR, kL)` outside vertices with the most neighbours in it. The
/// search over first elements of the enumerated side runs in parallel and is
/// reduced by `max`, so the value does not depend on the thread count.
pub fn scan_stat_exact(g: &Graph, kr: usize, kl: usize, cap: u128) -> Result<usize> {
    check_sizes(g, kr, kl)?;
    let required = scan_search_size(g.n(), kr, kl);
    if required > cap {
        return Err(Error::BudgetExceeded { required, cap });
    }
    let (small, large) = (kr.min(kl), kr.max(kl));
    if small == 0 {
        return Ok(0);
    }
    let n = g.n();
    let best = (0..=n - small)
        .into_par_iter()
        .map(|first| {
            let pool: Vec<usize> = (first + 1..n).collect();
            let mut best = 0usize;
            let mut set = vec![first; small];
            let mut hist = vec![0usize; small + 1];
            for_each_subset(&pool, small - 1, |rest| {
                set[1..].copy_from_slice(rest);
                let mask = VertexMask::from_vertices(n, &set);
                let counts = (0..n).filter(|&v| !mask.contains(v)).map(|v| mask.count_in(g.row(v)));
                best = best.max(top_sum(counts, large, &mut hist));
            });
            best
        })
        .max()
        .unwrap_or(0);
    Ok(best)
}

struct LocalSearch<'g> {
    g: &'g Graph,
    in_r: Vec<bool>,
    in_l: Vec<bool>,
    to_r: Vec<usize>,
    to_l: Vec<usize>,
}

impl<'g> LocalSearch<'g> {
    fn new(g: &'g Graph, right: &[usize], left: &[usize]) -> Self {
        let n = g.n();
        let mut s = LocalSearch { g, in_r: vec![false; n], in_l: vec![false; n], to_r: vec![0; n], to_l: vec![0; n] };
        for &r in right {
            s.in_r[r] = true;
        }
        for &l in left {
            s.in_l[l] = true;
        }
        let (mr, ml) = (VertexMask::from_vertices(n, right), VertexMask::from_vertices(n, left));
        for v in 0..n {
            s.to_r[v] = mr.count_in(g.row(v));
            s.to_l[v] = ml.count_in(g.row(v));
        }
        s
    }

    fn block(&self) -> usize {
        (0..self.g.n()).filter(|&v| self.in_r[v]).map(|v| self.to_l[v]).sum()
    }

    fn neighbours(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        let row = self.g.row(v);
        (0..self.g.n()).filter(move |&x| row[x / 64] >> (x % 64) & 1 == 1)
    }

    /// Best single swap on one side: `(gain, out, in)`, lowest indices on ties.
    fn best_swap(&self, right_side: bool) -> Option<(usize, usize, usize)> {
        let (members, weight) = if right_side { (&self.in_r, &self.to_l) } else { (&self.in_l, &self.to_r) };
        let n = self.g.n();
        let out = (0..n).filter(|&v| members[v]).min_by_key(|&v| (weight[v], v))?;
        let inn =
            (0..n).filter(|&v| !self.in_r[v] && !self.in_l[v]).max_by_key(|&v| (weight[v], std::cmp::Reverse(v)))?;
        (weight[inn] > weight[out]).then(|| (weight[inn] - weight[out], out, inn))
    }

    fn apply(&mut self, right_side: bool, out: usize, inn: usize) {
        let outs: Vec<usize> = self.neighbours(out).collect();
        let ins: Vec<usize> = self.neighbours(inn).collect();
        let (members, counts) =
            if right_side { (&mut self.in_r, &mut self.to_r) } else { (&mut self.in_l, &mut self.to_l) };
        members[out] = false;
        members[inn] = true;
        for x in outs {
            counts[x] -= 1;
        }
        for x in ins {
            counts[x] += 1;
        }
    }

    fn climb(&mut self) -> usize {
        loop {
            let r = self.best_swap(true);
            let l = self.best_swap(false);
            match (r, l) {
                (None, None) => return self.block(),
                (Some(a), Some(b)) if b.0 > a.0 => self.apply(false, b.1, b.2),
                (Some(a), _) => self.apply(true, a.1, a.2),
                (None, Some(b)) => self.apply(false, b.1, b.2),
            }
        }
    }
}

/// Randomized local search for the densest block: single-vertex swaps with
/// outside vertices until no swap helps, from `restarts` random starts.
/// Never exceeds [`scan_stat_exact`].
pub fn scan_stat_greedy(g: &Graph, kr: usize, kl: usize, restarts: usize, seed: &Seed) -> Result<usize> {
    check_sizes(g, kr, kl)?;
    if kr == 0 || kl == 0 {
        return Ok(0);
    }
    let best = (0..restarts.max(1))
        .map(|r| {
            let mut rng = seed.stream("greedy-start", r as u64);
            let start = sample_planted_sets(g.n(), kr, kl, &mut rng);
            LocalSearch::new(g, &start.right, &start.left).climb()
        })
        .max()
        .unwrap_or(0);
    Ok(best)
}

/// Exact likelihood-ratio test: verdict 1 iff `L_n(G) >= 1`.
pub fn lrt_exact(g: &Graph, params: &ModelParams, cap: u128) -> Result<DetectionOutcome> {
    let l = oracle::likelihood_ratio(g, params, cap)?;
    Ok(DetectionOutcome::new(l, 1.0, Method::Lrt))
}

/// Statistic, matching threshold, and verdict for one test on one graph.
pub fn run_test(g: &Graph, params: &ModelParams, method: Method, options: &DetectOptions) -> Result<DetectionOutcome> {
    if g.n() != params.n {
        return Err(param(format!("graph has {} vertices but params say n = {}", g.n(), params.n)));
    }
    let outcome = match method {
        Method::ScanExact => {
            let s = scan_stat_exact(g, params.kr, params.kl, options.scan_cap)?;
            DetectionOutcome::new(s as f64, tau_scan(params), method)
        }
        Method::ScanGreedy => {
            let s = scan_stat_greedy(g, params.kr, params.kl, options.greedy_restarts, &options.greedy_seed)?;
            DetectionOutcome::new(s as f64, tau_scan(params), method)
        }
        Method::Count => DetectionOutcome::new(count_stat(g) as f64, tau_count(params), method),
        Method::Degree => DetectionOutcome::new(maxdeg_stat(g) as f64, tau_deg(params), method),
        Method::Lrt => lrt_exact(g, params, options.enum_cap)?,
    };
    Ok(outcome)
}

/// Fails early with `BudgetExceeded` if `method` cannot run at `params`.
pub fn check_feasible(params: &ModelParams, method: Method, options: &DetectOptions) -> Result<()> {
    let cap = match method {
        Method::ScanExact => options.scan_cap,
        Method::Lrt => options.enum_cap,
        _ => return Ok(()),
    };
    let required = placement_count(params.n, params.kr, params.kl);
    if required > cap {
        return Err(Error::BudgetExceeded { required, cap });
    }
    Ok(())
}
