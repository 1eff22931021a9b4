//! The degree-D truncated likelihood-ratio norm.
//!
//! Under the null the characters `χ_α(G) = Π_{(i,j)∈α} (G_ij − q)/√(q(1−q))`
//! form an orthonormal basis. The planted expectation of `χ_α` is
//! `λ^{|α|/2} · P[α ⊆ K_{R,L}]` with `λ = χ²(p‖q)`, which vanishes unless `α`
//! is bipartite. The squared norm of the projection of the likelihood ratio
//! onto characters with `|α| ≤ D` is therefore
//! `1 + Σ_{1≤|α|≤D, α bipartite} λ^{|α|} · P[α ⊆ K]²`.
//!
//! `P[α ⊆ K]` sums over the `2^c` ways of assigning each component's two
//! colour classes to the `R` and `L` sides. For a fixed assignment with `R`
//! side `A` and `L` side `B` the event is `A ⊆ R`, `B ⊆ L`, which has
//! `C(n − v, kR − |A|) · C(n − kR − |B|, kL − |B|)` placements. A placement
//! realises exactly one assignment per component, so the events are disjoint.

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{choose, choose_signed, ln_choose, CompensatedSum};
use crate::error::{param, Error, Result};
use crate::graph::Graph;
use crate::measures::chi2_of;
use crate::model::ModelParams;
use crate::oracle::for_each_placement;

/// A set of vertex pairs, stored as sorted `(i, j)` with `i < j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EdgeSubset {
    edges: Vec<(usize, usize)>,
}

impl EdgeSubset {
    /// Normalises orientation and order; rejects loops and repeated pairs.
    pub fn new<I: IntoIterator<Item = (usize, usize)>>(edges: I) -> Result<EdgeSubset> {
        let mut out: Vec<(usize, usize)> = Vec::new();
        for (i, j) in edges {
            if i == j {
                return Err(param(format!("self-loop at vertex {i}")));
            }
            out.push((i.min(j), i.max(j)));
        }
        out.sort_unstable();
        if out.windows(2).any(|w| w[0] == w[1]) {
            return Err(param("repeated pair in edge subset"));
        }
        Ok(EdgeSubset { edges: out })
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Vertices incident to at least one edge, ascending.
    pub fn vertices(&self) -> Vec<usize> {
        let mut vs: Vec<usize> = self.edges.iter().flat_map(|&(i, j)| [i, j]).collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices().len()
    }

    pub fn relabel(&self, perm: &[usize]) -> EdgeSubset {
        EdgeSubset::new(self.edges.iter().map(|&(i, j)| (perm[i], perm[j])))
            .expect("a permutation keeps pairs distinct")
    }
}

/// Proper 2-colouring of every connected component.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BipartiteCert {
    /// `(side0, side1)` per component, each sorted; `side0` holds the
    /// component's smallest vertex. Components ordered by that vertex.
    pub components: Vec<(Vec<usize>, Vec<usize>)>,
}

impl BipartiteCert {
    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    /// Number of orientations putting exactly `a` vertices on the `R` side,
    /// indexed by `a`.
    fn orientation_counts(&self) -> Vec<u128> {
        let total: usize = self.components.iter().map(|(x, y)| x.len() + y.len()).sum();
        let mut ways = vec![0u128; total + 1];
        ways[0] = 1;
        let mut reach = 0;
        for (x, y) in &self.components {
            let mut next = vec![0u128; total + 1];
            for a in 0..=reach {
                if ways[a] > 0 {
                    next[a + x.len()] += ways[a];
                    next[a + y.len()] += ways[a];
                }
            }
            reach += x.len().max(y.len());
            ways = next;
        }
        ways
    }
}

/// BFS 2-colouring; `None` when `alpha` contains an odd cycle.
pub fn is_bipartite(alpha: &EdgeSubset) -> Option<BipartiteCert> {
    let vs = alpha.vertices();
    let pos = |v: usize| vs.binary_search(&v).unwrap();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); vs.len()];
    for &(i, j) in alpha.edges() {
        adj[pos(i)].push(pos(j));
        adj[pos(j)].push(pos(i));
    }
    let mut colour: Vec<Option<u8>> = vec![None; vs.len()];
    let mut components = Vec::new();
    for start in 0..vs.len() {
        if colour[start].is_some() {
            continue;
        }
        colour[start] = Some(0);
        let mut queue = std::collections::VecDeque::from([start]);
        let (mut side0, mut side1) = (Vec::new(), Vec::new());
        while let Some(u) = queue.pop_front() {
            let c = colour[u].unwrap();
            if c == 0 {
                side0.push(vs[u])
            } else {
                side1.push(vs[u])
            }
            for &w in &adj[u] {
                match colour[w] {
                    None => {
                        colour[w] = Some(1 - c);
                        queue.push_back(w);
                    }
                    Some(cw) if cw == c => return None,
                    Some(_) => {}
                }
            }
        }
        side0.sort_unstable();
        side1.sort_unstable();
        components.push((side0, side1));
    }
    Some(BipartiteCert { components })
}

fn check_sizes(n: usize, kr: usize, kl: usize) -> Result<()> {
    if kr == 0 || kl == 0 || kr + kl > n {
        return Err(param(format!("need kR, kL >= 1 and kR + kL <= n (got n={n}, kR={kr}, kL={kl})")));
    }
    Ok(())
}

/// `P[α ⊆ K_{R,L}]` as an exact fraction; `None` if an intermediate does not
/// fit in 128 bits. Non-bipartite `α` gives exactly zero.
pub fn prob_contains_exact(alpha: &EdgeSubset, n: usize, kr: usize, kl: usize) -> Option<Ratio<u128>> {
    let (n64, kr64, kl64) = (n as u64, kr as u64, kl as u64);
    let den = choose(n64, kr64)?.checked_mul(choose(n64 - kr64.min(n64), kl64)?)?;
    if den == 0 {
        return None;
    }
    let Some(cert) = is_bipartite(alpha) else { return Some(Ratio::new(0, 1)) };
    let v = alpha.vertex_count() as i64;
    let (n, kr, kl) = (n as i64, kr as i64, kl as i64);
    let mut num: u128 = 0;
    for (a, &ways) in cert.orientation_counts().iter().enumerate() {
        if ways == 0 {
            continue;
        }
        let (a, b) = (a as i64, v - a as i64);
        let placements = choose_signed(n - v, kr - a)?.checked_mul(choose_signed(n - kr - b, kl - b)?)?;
        num = num.checked_add(ways.checked_mul(placements)?)?;
    }
    Some(Ratio::new(num, den))
}

/// `P[α ⊆ K_{R,L}]` in floating point: the exact fraction when it fits,
/// otherwise the same sum in log space.
pub fn prob_contains(alpha: &EdgeSubset, n: usize, kr: usize, kl: usize) -> f64 {
    if let Some(r) = prob_contains_exact(alpha, n, kr, kl) {
        return *r.numer() as f64 / *r.denom() as f64;
    }
    let Some(cert) = is_bipartite(alpha) else { return 0.0 };
    let v = alpha.vertex_count() as i64;
    let (n, kr, kl) = (n as i64, kr as i64, kl as i64);
    let ln_den = ln_choose(n, kr) + ln_choose(n - kr, kl);
    let mut total = CompensatedSum::default();
    for (a, &ways) in cert.orientation_counts().iter().enumerate() {
        if ways > 0 {
            let (a, b) = (a as i64, v - a as i64);
            let ln_num = ln_choose(n - v, kr - a) + ln_choose(n - kr - b, kl - b);
            total.add(ways as f64 * (ln_num - ln_den).exp());
        }
    }
    total.value()
}

/// Containment probability by checking every placement; the reference the
/// orientation sum is validated against.
pub fn prob_contains_bruteforce(alpha: &EdgeSubset, n: usize, kr: usize, kl: usize) -> Ratio<u128> {
    let (mut hit, mut total) = (0u128, 0u128);
    let mut side = vec![0u8; n];
    for_each_placement(n, kr, kl, |r, l| {
        side.iter_mut().for_each(|s| *s = 0);
        r.iter().for_each(|&v| side[v] = 1);
        l.iter().for_each(|&v| side[v] = 2);
        total += 1;
        if alpha.edges().iter().all(|&(i, j)| side[i] + side[j] == 3) {
            hit += 1;
        }
    });
    Ratio::new(hit, total.max(1))
}

/// Planted mean of `χ_α`: `λ^{|α|/2} · P[α ⊆ K]`.
pub fn fourier_coefficient(alpha: &EdgeSubset, params: &ModelParams) -> f64 {
    coefficient_for(alpha, params.n, params.kr, params.kl, chi2_of(params))
}

fn coefficient_for(alpha: &EdgeSubset, n: usize, kr: usize, kl: usize, lambda: f64) -> f64 {
    if alpha.is_empty() {
        return 1.0;
    }
    let p = prob_contains(alpha, n, kr, kl);
    if p == 0.0 {
        return 0.0;
    }
    lambda.powf(alpha.len() as f64 / 2.0) * p
}

/// `χ_α(G)` for the null edge probability `q`.
pub fn character(alpha: &EdgeSubset, g: &Graph, q: f64) -> f64 {
    let scale = (q * (1.0 - q)).sqrt();
    alpha.edges().iter().map(|&(i, j)| (if g.has_edge(i, j) { 1.0 } else { 0.0 } - q) / scale).product()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdlrReport {
    pub d: usize,
    pub norm_sq: f64,
    /// Bipartite subsets with `1 ≤ |α| ≤ D` that fit in `kR + kL` vertices.
    pub terms_enumerated: u64,
    /// `(|α|, Σ λ^{|α|} P²)` for `|α| = 1..=D`.
    pub per_size: Vec<(usize, f64)>,
}

pub const DEFAULT_LDLR_BUDGET: u128 = 10_000_000;

/// Number of edge subsets with at most `d` edges on `n` vertices.
pub fn projected_subsets(n: usize, d: usize) -> u128 {
    let pairs = (n * n.saturating_sub(1) / 2) as u64;
    (0..=d.min(pairs as usize) as u64)
        .map(|k| choose(pairs, k).unwrap_or(u128::MAX))
        .fold(0u128, |a, b| a.saturating_add(b))
}

fn check_budget(n: usize, d: usize, budget: u128) -> Result<()> {
    let required = projected_subsets(n, d);
    if required > budget {
        return Err(Error::BudgetExceeded { required, cap: budget });
    }
    Ok(())
}

/// Union–find over vertices with parity to the parent, union by size and
/// rollback in stack order.
struct ParityForest {
    parent: Vec<usize>,
    parity: Vec<u8>,
    size: Vec<usize>,
    history: Vec<Option<usize>>,
    incident: Vec<usize>,
    touched: usize,
}

impl ParityForest {
    fn new(n: usize) -> ParityForest {
        ParityForest {
            parent: (0..n).collect(),
            parity: vec![0; n],
            size: vec![1; n],
            history: Vec::new(),
            incident: vec![0; n],
            touched: 0,
        }
    }

    fn find(&self, mut v: usize) -> (usize, u8) {
        let mut par = 0;
        while self.parent[v] != v {
            par ^= self.parity[v];
            v = self.parent[v];
        }
        (v, par)
    }

    /// Adds edge `(i, j)`; returns false (and changes nothing) if it closes
    /// an odd cycle.
    fn push(&mut self, i: usize, j: usize) -> bool {
        let (ri, pi) = self.find(i);
        let (rj, pj) = self.find(j);
        if ri == rj {
            if pi == pj {
                return false;
            }
            self.history.push(None);
        } else {
            let (child, root) = if self.size[ri] < self.size[rj] { (ri, rj) } else { (rj, ri) };
            self.parent[child] = root;
            self.parity[child] = pi ^ pj ^ 1;
            self.size[root] += self.size[child];
            self.history.push(Some(child));
        }
        for v in [i, j] {
            if self.incident[v] == 0 {
                self.touched += 1;
            }
            self.incident[v] += 1;
        }
        true
    }

    fn pop(&mut self, i: usize, j: usize) {
        if let Some(child) = self.history.pop().expect("pop without push") {
            let root = self.parent[child];
            self.size[root] -= self.size[child];
            self.parent[child] = child;
            self.parity[child] = 0;
        }
        for v in [i, j] {
            self.incident[v] -= 1;
            if self.incident[v] == 0 {
                self.touched -= 1;
            }
        }
    }

    /// Colour-class sizes per component of the current edge set.
    fn class_sizes(&self, edges: &[(usize, usize)]) -> Vec<(usize, usize)> {
        let mut roots: Vec<(usize, usize, usize)> = Vec::new();
        let mut seen: Vec<usize> = Vec::with_capacity(2 * edges.len());
        for &(i, j) in edges {
            for v in [i, j] {
                if seen.contains(&v) {
                    continue;
                }
                seen.push(v);
                let (r, par) = self.find(v);
                match roots.iter_mut().find(|e| e.0 == r) {
                    Some(e) => {
                        if par == 0 {
                            e.1 += 1
                        } else {
                            e.2 += 1
                        }
                    }
                    None => roots.push(if par == 0 { (r, 1, 0) } else { (r, 0, 1) }),
                }
            }
        }
        roots.into_iter().map(|(_, a, b)| (a, b)).collect()
    }
}

/// `P[α ⊆ K]` from component class sizes.
fn contains_from_classes(classes: &[(usize, usize)], n: usize, kr: usize, kl: usize) -> f64 {
    let v: usize = classes.iter().map(|&(a, b)| a + b).sum();
    let cert = BipartiteCert { components: classes.iter().map(|&(a, b)| (vec![0; a], vec![0; b])).collect() };
    let (n, kr, kl, v) = (n as i64, kr as i64, kl as i64, v as i64);
    let ln_den = ln_choose(n, kr) + ln_choose(n - kr, kl);
    let mut total = CompensatedSum::default();
    for (a, &ways) in cert.orientation_counts().iter().enumerate() {
        if ways > 0 {
            let (a, b) = (a as i64, v - a as i64);
            let ln_num = ln_choose(n - v, kr - a) + ln_choose(n - kr - b, kl - b);
            total.add(ways as f64 * (ln_num - ln_den).exp());
        }
    }
    total.value()
}

struct Enumeration<'a> {
    n: usize,
    kr: usize,
    kl: usize,
    lambda: f64,
    d: usize,
    pairs: &'a [(usize, usize)],
    forest: ParityForest,
    current: Vec<(usize, usize)>,
    sums: Vec<CompensatedSum>,
    terms: Vec<u64>,
}

impl Enumeration<'_> {
    fn record(&mut self) {
        let size = self.current.len();
        let classes = self.forest.class_sizes(&self.current);
        let p = contains_from_classes(&classes, self.n, self.kr, self.kl);
        self.terms[size] += 1;
        if p > 0.0 {
            self.sums[size].add(self.lambda.powi(size as i32) * p * p);
        }
    }

    /// Tries pair `e` on top of the current set, then extends with later pairs.
    fn visit(&mut self, e: usize) {
        let (i, j) = self.pairs[e];
        if !self.forest.push(i, j) {
            return;
        }
        if self.forest.touched <= self.kr + self.kl {
            self.current.push((i, j));
            self.record();
            if self.current.len() < self.d {
                for next in e + 1..self.pairs.len() {
                    self.visit(next);
                }
            }
            self.current.pop();
        }
        self.forest.pop(i, j);
    }
}

fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

/// Per-size sums and counts for sizes `0..=d` (index 0 unused).
fn enumerate_bipartite(n: usize, kr: usize, kl: usize, lambda: f64, d: usize) -> (Vec<CompensatedSum>, Vec<u64>) {
    let pairs = all_pairs(n);
    let empty = || (vec![CompensatedSum::default(); d + 1], vec![0u64; d + 1]);
    if d == 0 {
        return empty();
    }
    let partial: Vec<(Vec<CompensatedSum>, Vec<u64>)> = (0..pairs.len())
        .into_par_iter()
        .map(|first| {
            let (sums, terms) = empty();
            let mut run = Enumeration {
                n,
                kr,
                kl,
                lambda,
                d,
                pairs: &pairs,
                forest: ParityForest::new(n),
                current: Vec::with_capacity(d),
                sums,
                terms,
            };
            run.visit(first);
            (run.sums, run.terms)
        })
        .collect();
    partial.into_iter().fold(empty(), |(mut sums, mut terms), (s, t)| {
        for k in 0..=d {
            sums[k] = sums[k].merge(s[k]);
            terms[k] += t[k];
        }
        (sums, terms)
    })
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(param(format!("lambda must be a finite non-negative number, got {lambda}")));
    }
    Ok(())
}

/// Reports for `D = 0..=dmax` from one enumeration at `dmax`.
pub fn ldlr_curve_for(
    n: usize,
    kr: usize,
    kl: usize,
    lambda: f64,
    dmax: usize,
    budget: u128,
) -> Result<Vec<LdlrReport>> {
    check_sizes(n, kr, kl)?;
    check_lambda(lambda)?;
    check_budget(n, dmax, budget)?;
    let (sums, terms) = enumerate_bipartite(n, kr, kl, lambda, dmax);
    let mut reports = Vec::with_capacity(dmax + 1);
    let mut norm = CompensatedSum::default();
    norm.add(1.0);
    let mut enumerated = 0;
    let mut per_size = Vec::new();
    for d in 0..=dmax {
        if d > 0 {
            norm = norm.merge(sums[d]);
            enumerated += terms[d];
            per_size.push((d, sums[d].value()));
        }
        reports.push(LdlrReport { d, norm_sq: norm.value(), terms_enumerated: enumerated, per_size: per_size.clone() });
    }
    Ok(reports)
}

pub fn ldlr_norm_sq_for(n: usize, kr: usize, kl: usize, lambda: f64, d: usize, budget: u128) -> Result<LdlrReport> {
    Ok(ldlr_curve_for(n, kr, kl, lambda, d, budget)?.pop().expect("curve has D + 1 entries"))
}

pub fn ldlr_norm_sq(params: &ModelParams, d: usize, budget: u128) -> Result<LdlrReport> {
    ldlr_norm_sq_for(params.n, params.kr, params.kl, chi2_of(params), d, budget)
}

pub fn ldlr_curve(params: &ModelParams, dmax: usize, budget: u128) -> Result<Vec<LdlrReport>> {
    ldlr_curve_for(params.n, params.kr, params.kl, chi2_of(params), dmax, budget)
}

/// The same norm summed over every edge subset with `|α| ≤ d`, bipartite or
/// not, using squared Fourier coefficients; no pruning.
pub fn ldlr_norm_sq_unpruned(n: usize, kr: usize, kl: usize, lambda: f64, d: usize, budget: u128) -> Result<f64> {
    check_sizes(n, kr, kl)?;
    check_lambda(lambda)?;
    check_budget(n, d, budget)?;
    let pairs = all_pairs(n);
    let idx: Vec<usize> = (0..pairs.len()).collect();
    let mut total = CompensatedSum::default();
    total.add(1.0);
    for size in 1..=d.min(pairs.len()) {
        crate::combinatorics::for_each_subset(&idx, size, |chosen| {
            let alpha = EdgeSubset { edges: chosen.iter().map(|&e| pairs[e]).collect() };
            let c = coefficient_for(&alpha, n, kr, kl, lambda);
            total.add(c * c);
        });
    }
    Ok(total.value())
}
