//! Exact statistical quantities for small instances: the likelihood ratio,
//! the second moment of the likelihood ratio under the null (closed form and
//! by placement-pair enumeration), the Bayes risk by enumerating every graph,
//! and the Cauchy–Schwarz lower bound on that risk.
//!
//! A placement is an ordered pair `(R, L)` of disjoint vertex sets with
//! `|R| = kR`, `|L| = kL`. Both hypotheses average over all placements
//! uniformly. Per planted pair the likelihood ratio factor is
//! `(p/q)^A · ((1-p)/(1-q))^(1-A)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{for_each_subset, ln_choose, placement_count, CompensatedSum, LogSumExp};
use crate::error::{param, Error, Result};
use crate::graph::{Graph, VertexMask};
use crate::measures::chi2_of;
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SecondMomentMethod {
    ClosedFormSum,
    BruteForcePlacements,
}

/// `E_H0[L_n²]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondMoment {
    pub value: f64,
    pub method: SecondMomentMethod,
}

/// Bayes risk of the optimal test and the total variation it comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactRisk {
    pub bayes_risk: f64,
    pub tv: f64,
}

pub const DEFAULT_PAIR_CAP: u128 = 100_000_000;
/// Largest pair count `C(n, 2)` for which every graph is enumerated.
pub const MAX_ENUMERATED_PAIRS: usize = 24;

/// Calls `f(right, left)` for every placement, `R` lexicographic first and
/// then `L` lexicographic among the remaining vertices.
pub fn for_each_placement<F: FnMut(&[usize], &[usize])>(n: usize, kr: usize, kl: usize, mut f: F) {
    let all: Vec<usize> = (0..n).collect();
    for_each_subset(&all, kr, |right| {
        let rest: Vec<usize> = (0..n).filter(|v| !right.contains(v)).collect();
        for_each_subset(&rest, kl, |left| f(right, left));
    });
}

/// `ln` of the per-placement likelihood ratio given `e` of the `m` planted
/// pairs present. `-inf` when `p = 1` and a planted pair is missing.
fn ln_block_ratio(e: usize, m: usize, p: f64, q: f64) -> f64 {
    let present = if e == 0 { 0.0 } else { e as f64 * (p / q).ln() };
    let absent = if e == m { 0.0 } else { (m - e) as f64 * ((1.0 - p) / (1.0 - q)).ln() };
    present + absent
}

fn check_placements(params: &ModelParams, cap: u128) -> Result<u128> {
    let required = placement_count(params.n, params.kr, params.kl);
    if required == 0 {
        return Err(param("no placements: kR + kL exceeds n"));
    }
    if required > cap {
        return Err(Error::BudgetExceeded { required, cap });
    }
    Ok(required)
}

/// For each `e`, how many placements have exactly `e` present planted pairs.
pub fn block_edge_histogram(g: &Graph, kr: usize, kl: usize) -> Vec<u128> {
    let n = g.n();
    let m = kr * kl;
    let partial: Vec<Vec<u128>> = (0..n.saturating_sub(kr) + 1)
        .into_par_iter()
        .map(|first| {
            let mut hist = vec![0u128; m + 1];
            if kr == 0 {
                return hist;
            }
            let pool: Vec<usize> = (first + 1..n).collect();
            let mut right = vec![first; kr];
            for_each_subset(&pool, kr - 1, |rest| {
                right[1..].copy_from_slice(rest);
                let mask = VertexMask::from_vertices(n, &right);
                let outside: Vec<usize> = (0..n).filter(|&v| !mask.contains(v)).collect();
                let weight: Vec<usize> = outside.iter().map(|&v| mask.count_in(g.row(v))).collect();
                let idx: Vec<usize> = (0..outside.len()).collect();
                for_each_subset(&idx, kl, |left| {
                    let e: usize = left.iter().map(|&i| weight[i]).sum();
                    hist[e] += 1;
                });
            });
            hist
        })
        .collect();
    partial.into_iter().fold(vec![0u128; m + 1], |mut acc, h| {
        acc.iter_mut().zip(h).for_each(|(a, b)| *a += b);
        acc
    })
}

/// `L_n(G) = P_H1(G) / P_H0(G)`.
pub fn likelihood_ratio(g: &Graph, params: &ModelParams, cap: u128) -> Result<f64> {
    Ok(ln_likelihood_ratio(g, params, cap)?.exp())
}

pub fn ln_likelihood_ratio(g: &Graph, params: &ModelParams, cap: u128) -> Result<f64> {
    if g.n() != params.n {
        return Err(param(format!("graph has {} vertices but params say n = {}", g.n(), params.n)));
    }
    let total = check_placements(params, cap)?;
    let m = params.kr * params.kl;
    let hist = block_edge_histogram(g, params.kr, params.kl);
    let mut acc = LogSumExp::default();
    for (e, &count) in hist.iter().enumerate() {
        if count > 0 {
            acc.add((count as f64).ln() + ln_block_ratio(e, m, params.p, params.q));
        }
    }
    Ok(acc.ln() - (total as f64).ln())
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(param(format!("lambda must be a finite non-negative number, got {lambda}")));
    }
    Ok(())
}

fn check_sizes(n: usize, kr: usize, kl: usize) -> Result<()> {
    if kr == 0 || kl == 0 || kr + kl > n {
        return Err(param(format!("need kR, kL >= 1 and kR + kL <= n (got n={n}, kR={kr}, kL={kl})")));
    }
    Ok(())
}

/// `Σ w·(1+λ)^x` for terms `(ln w, x)` whose weights sum to one. Written as
/// `1 + Σ w·((1+λ)^x − 1)` so that `λ = 0` gives exactly one; switches to
/// log space when the powers would overflow.
fn mixture_moment(terms: &[(f64, u64)], lambda: f64) -> f64 {
    let ln_base = lambda.ln_1p();
    let top = terms.iter().map(|&(_, x)| x).max().unwrap_or(0) as f64 * ln_base;
    if top < 600.0 {
        let mut acc = CompensatedSum::default();
        acc.add(1.0);
        for &(ln_w, x) in terms {
            acc.add(ln_w.exp() * (x as f64 * ln_base).exp_m1());
        }
        acc.value()
    } else {
        let mut acc = LogSumExp::default();
        for &(ln_w, x) in terms {
            acc.add(ln_w + x as f64 * ln_base);
        }
        acc.ln().exp()
    }
}

/// Closed-form `E[(1+λ)^(ab+cd)]` over two independent uniform placements,
/// `a = |R∩R'|`, `b = |L∩L'|`, `c = |R∩L'|`, `d = |L∩R'|`.
///
/// Given the first placement, `R'` is a uniform `kR`-subset of `[n]` taken
/// from the three cells `{R, L, rest}`, so `(a, d)` is bivariate
/// hypergeometric. `L'` is then a uniform `kL`-subset of `[n] \ R'`, whose
/// cells have sizes `kR - a`, `kL - d` and `n - 2kR - kL + a + d`, giving
/// `(c, b)` given `(a, d)`.
pub fn second_moment_for(n: usize, kr: usize, kl: usize, lambda: f64) -> Result<SecondMoment> {
    check_sizes(n, kr, kl)?;
    check_lambda(lambda)?;
    let (n, kr, kl) = (n as i64, kr as i64, kl as i64);
    let rest = n - kr - kl;
    let ln_first = ln_choose(n, kr);
    let ln_second = ln_choose(n - kr, kl);
    let mut terms = Vec::new();
    for a in 0..=kr {
        for d in 0..=(kr - a).min(kl) {
            let ln_ad = ln_choose(kr, a) + ln_choose(kl, d) + ln_choose(rest, kr - a - d) - ln_first;
            if ln_ad == f64::NEG_INFINITY {
                continue;
            }
            let rest2 = n - kr - (kr - a) - (kl - d);
            for c in 0..=(kr - a).min(kl) {
                for b in 0..=(kl - d).min(kl - c) {
                    let ln_cb = ln_choose(kr - a, c) + ln_choose(kl - d, b) + ln_choose(rest2, kl - c - b) - ln_second;
                    if ln_cb == f64::NEG_INFINITY {
                        continue;
                    }
                    terms.push((ln_ad + ln_cb, (a * b + c * d) as u64));
                }
            }
        }
    }
    Ok(SecondMoment { value: mixture_moment(&terms, lambda), method: SecondMomentMethod::ClosedFormSum })
}

pub fn second_moment_exact(params: &ModelParams) -> Result<SecondMoment> {
    second_moment_for(params.n, params.kr, params.kl, chi2_of(params))
}

/// Placements as `(R mask, L mask)` bit pairs; requires `n <= 64`.
pub fn placement_masks(n: usize, kr: usize, kl: usize) -> Result<Vec<(u64, u64)>> {
    if n > 64 {
        return Err(param(format!("placement masks need n <= 64, got {n}")));
    }
    let mut out = Vec::new();
    for_each_placement(n, kr, kl, |r, l| {
        let mask = |s: &[usize]| s.iter().fold(0u64, |m, &v| m | 1 << v);
        out.push((mask(r), mask(l)));
    });
    Ok(out)
}

/// Histogram of `|E(K ∩ K')|` over all ordered placement pairs.
pub fn intersection_histogram(n: usize, kr: usize, kl: usize, cap: u128) -> Result<Vec<u64>> {
    check_sizes(n, kr, kl)?;
    let count = placement_count(n, kr, kl);
    let required = count.saturating_mul(count);
    if required > cap {
        return Err(Error::BudgetExceeded { required, cap });
    }
    let placements = placement_masks(n, kr, kl)?;
    let m = kr * kl;
    let partial: Vec<Vec<u64>> = placements
        .par_iter()
        .map(|&(r, l)| {
            let mut hist = vec![0u64; m + 1];
            for &(r2, l2) in &placements {
                let a = (r & r2).count_ones();
                let b = (l & l2).count_ones();
                let c = (r & l2).count_ones();
                let d = (l & r2).count_ones();
                hist[(a * b + c * d) as usize] += 1;
            }
            hist
        })
        .collect();
    Ok(partial.into_iter().fold(vec![0u64; m + 1], |mut acc, h| {
        acc.iter_mut().zip(h).for_each(|(x, y)| *x += y);
        acc
    }))
}

/// Second moment as the plain average of `(1+λ)^|E(K∩K')|` over all ordered
/// placement pairs.
pub fn second_moment_bruteforce_for(n: usize, kr: usize, kl: usize, lambda: f64, cap: u128) -> Result<SecondMoment> {
    check_lambda(lambda)?;
    let hist = intersection_histogram(n, kr, kl, cap)?;
    let ln_total = (hist.iter().sum::<u64>() as f64).ln();
    let terms: Vec<(f64, u64)> = hist
        .iter()
        .enumerate()
        .filter(|(_, &count)| count > 0)
        .map(|(x, &count)| ((count as f64).ln() - ln_total, x as u64))
        .collect();
    let value = mixture_moment(&terms, lambda);
    Ok(SecondMoment { value, method: SecondMomentMethod::BruteForcePlacements })
}

pub fn second_moment_bruteforce(params: &ModelParams, cap: u128) -> Result<SecondMoment> {
    second_moment_bruteforce_for(params.n, params.kr, params.kl, chi2_of(params), cap)
}

/// `max(0, 1 - ½·sqrt(E[L²] - 1))`.
pub fn risk_lower_bound(m2: &SecondMoment) -> f64 {
    let excess = (m2.value - 1.0).max(0.0);
    (1.0 - 0.5 * excess.sqrt()).max(0.0)
}

/// Bit index of pair `(i, j)`, `i < j`, in row-major pair order.
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// Graph whose edges are the set bits of `mask` in canonical pair order.
pub fn graph_from_mask(n: usize, mask: u64) -> Graph {
    let mut g = Graph::empty(n);
    let mut b = 0;
    for i in 0..n {
        for j in i + 1..n {
            if mask >> b & 1 == 1 {
                g.set_edge(i, j);
            }
            b += 1;
        }
    }
    g
}

fn placement_pair_masks(n: usize, kr: usize, kl: usize) -> Vec<u32> {
    let mut out = Vec::new();
    for_each_placement(n, kr, kl, |r, l| {
        let mut m = 0u32;
        for &i in r {
            for &j in l {
                m |= 1 << pair_index(n, i.min(j), i.max(j));
            }
        }
        out.push(m);
    });
    out
}

pub const NORMALIZATION_LIMIT: f64 = 1e-10;

/// Bayes risk `1 - TV(P_H0, P_H1)` by enumerating all `2^C(n,2)` graphs.
/// Both laws are checked to sum to one within [`NORMALIZATION_LIMIT`].
pub fn bayes_risk_exact(params: &ModelParams, cap: u128) -> Result<ExactRisk> {
    let n = params.n;
    let pairs = n * n.saturating_sub(1) / 2;
    if pairs > MAX_ENUMERATED_PAIRS {
        return Err(Error::BudgetExceeded { required: 1u128 << pairs.min(127), cap: 1u128 << MAX_ENUMERATED_PAIRS });
    }
    let total = check_placements(params, cap)?;
    let (p, q) = (params.p, params.q);
    let m = params.kr * params.kl;
    let ln_ratio: Vec<f64> = (0..=m).map(|e| ln_block_ratio(e, m, p, q)).collect();
    let ln_total = (total as f64).ln();
    let ln_null: Vec<f64> = (0..=pairs)
        .map(|e| {
            let on = if e == 0 { 0.0 } else { e as f64 * q.ln() };
            let off = if e == pairs { 0.0 } else { (pairs - e) as f64 * (1.0 - q).ln() };
            on + off
        })
        .collect();
    let placements = placement_pair_masks(n, params.kr, params.kl);

    let graphs: u64 = 1 << pairs;
    let chunk = 1u64 << pairs.saturating_sub(6);
    let chunks = graphs.div_ceil(chunk);
    let partial: Vec<[CompensatedSum; 3]> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut sums = [CompensatedSum::default(); 3];
            let mut hist = vec![0u32; m + 1];
            for mask in c * chunk..((c + 1) * chunk).min(graphs) {
                let g = mask as u32;
                hist.iter_mut().for_each(|h| *h = 0);
                for &k in &placements {
                    hist[(g & k).count_ones() as usize] += 1;
                }
                let mut lse = LogSumExp::default();
                for (e, &count) in hist.iter().enumerate() {
                    if count > 0 {
                        lse.add((count as f64).ln() + ln_ratio[e]);
                    }
                }
                let ln_p0 = ln_null[g.count_ones() as usize];
                let p0 = ln_p0.exp();
                let p1 = (ln_p0 + lse.ln() - ln_total).exp();
                sums[0].add(p0);
                sums[1].add(p1);
                sums[2].add((p1 - p0).abs());
            }
            sums
        })
        .collect();
    let [s0, s1, sd] = partial
        .into_iter()
        .fold([CompensatedSum::default(); 3], |acc, s| [acc[0].merge(s[0]), acc[1].merge(s[1]), acc[2].merge(s[2])]);
    for s in [s0, s1] {
        let residual = (s.value() - 1.0).abs();
        if residual > NORMALIZATION_LIMIT {
            return Err(Error::Normalization { residual, limit: NORMALIZATION_LIMIT });
        }
    }
    let tv = (0.5 * sd.value()).clamp(0.0, 1.0);
    Ok(ExactRisk { bayes_risk: 1.0 - tv, tv })
}
