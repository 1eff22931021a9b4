//! The null and planted ensembles and their samplers.
//!
//! Under the null the graph is `G(n, q)`. Under the planted alternative a right
//! set `R` of size `kR` and a disjoint left set `L` of size `kL` are drawn
//! uniformly, every `R`–`L` pair is an edge with probability `p`, and every
//! other pair with probability `q`.

use rand::distributions::{Bernoulli, Distribution};
use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: usize,
    pub kr: usize,
    pub kl: usize,
    pub p: f64,
    pub q: f64,
}

impl ModelParams {
    /// Validated parameters: `kR, kL >= 1`, `kR + kL <= n`, `0 < q < p <= 1`.
    pub fn new(n: usize, kr: usize, kl: usize, p: f64, q: f64) -> Result<ModelParams> {
        let m = ModelParams { n, kr, kl, p, q };
        m.validate()?;
        Ok(m)
    }

    /// Skips validation. Only for experiments that deliberately leave the
    /// model's domain, e.g. `p == q`.
    #[doc(hidden)]
    pub fn new_unchecked(n: usize, kr: usize, kl: usize, p: f64, q: f64) -> ModelParams {
        ModelParams { n, kr, kl, p, q }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kr == 0 || self.kl == 0 {
            return Err(param(format!("kR and kL must be at least 1 (got kR={}, kL={})", self.kr, self.kl)));
        }
        if self.kr + self.kl > self.n {
            return Err(param(format!("kR + kL = {} exceeds n = {}", self.kr + self.kl, self.n)));
        }
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(param(format!("q must lie in (0, 1), got {}", self.q)));
        }
        if !(self.p > self.q && self.p <= 1.0) {
            return Err(param(format!("p must lie in (q, 1], got p={} with q={}", self.p, self.q)));
        }
        Ok(())
    }

    pub fn kmax(&self) -> usize {
        self.kr.max(self.kl)
    }

    pub fn kmin(&self) -> usize {
        self.kr.min(self.kl)
    }

    /// Same model with the roles of the two planted sets exchanged.
    pub fn swapped(&self) -> ModelParams {
        ModelParams { kr: self.kl, kl: self.kr, ..*self }
    }

    /// Planted probability of the independent block used by the union sampler.
    pub fn union_block_probability(&self) -> f64 {
        (self.p - self.q) / (1.0 - self.q)
    }
}

/// The hidden disjoint vertex sets, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantedSets {
    pub right: Vec<usize>,
    pub left: Vec<usize>,
}

impl PlantedSets {
    /// Per-vertex side: 0 outside, 1 in `R`, 2 in `L`.
    pub(crate) fn sides(&self, n: usize) -> Vec<u8> {
        let mut side = vec![0u8; n];
        for &r in &self.right {
            side[r] = 1;
        }
        for &l in &self.left {
            side[l] = 2;
        }
        side
    }

    pub fn is_planted_pair(&self, i: usize, j: usize) -> bool {
        let (r, l) = (&self.right, &self.left);
        (r.binary_search(&i).is_ok() && l.binary_search(&j).is_ok())
            || (r.binary_search(&j).is_ok() && l.binary_search(&i).is_ok())
    }
}

fn check_probability(x: f64, name: &str) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(param(format!("{name} must lie in [0, 1], got {x}")))
    }
}

/// `G(n, q)`: one Bernoulli(q) draw per pair, pairs visited row-major `i < j`.
pub fn sample_er<R: Rng + ?Sized>(n: usize, q: f64, rng: &mut R) -> Result<Graph> {
    if n == 0 {
        return Err(param("n must be at least 1"));
    }
    check_probability(q, "q")?;
    let coin = Bernoulli::new(q).map_err(|e| param(e.to_string()))?;
    let mut g = Graph::empty(n);
    for i in 0..n {
        for j in i + 1..n {
            if coin.sample(rng) {
                g.set_edge(i, j);
            }
        }
    }
    Ok(g)
}

/// Draws `R` uniformly from `kR`-subsets of `0..n`, then `L` uniformly from
/// `kL`-subsets of the complement.
pub fn sample_planted_sets<R: Rng + ?Sized>(n: usize, kr: usize, kl: usize, rng: &mut R) -> PlantedSets {
    let mut right = index::sample(rng, n, kr).into_vec();
    right.sort_unstable();
    let mut in_right = vec![false; n];
    for &r in &right {
        in_right[r] = true;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| !in_right[v]).collect();
    let mut left: Vec<usize> = index::sample(rng, rest.len(), kl).into_iter().map(|i| rest[i]).collect();
    left.sort_unstable();
    PlantedSets { right, left }
}

fn fill_pairs<R: Rng + ?Sized>(g: &mut Graph, side: &[u8], planted: &Bernoulli, background: &Bernoulli, rng: &mut R) {
    let n = g.n();
    for i in 0..n {
        for j in i + 1..n {
            let coin = if side[i] + side[j] == 3 { planted } else { background };
            if coin.sample(rng) {
                g.set_edge(i, j);
            }
        }
    }
}

/// Planted sample: sets first, then one draw per pair in canonical order.
pub fn sample_planted<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> Result<(Graph, PlantedSets)> {
    params.validate()?;
    sample_planted_unchecked(params, rng)
}

/// As [`sample_planted`] without the `p > q` guard.
#[doc(hidden)]
pub fn sample_planted_unchecked<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> Result<(Graph, PlantedSets)> {
    check_probability(params.p, "p")?;
    check_probability(params.q, "q")?;
    let sets = sample_planted_sets(params.n, params.kr, params.kl, rng);
    let side = sets.sides(params.n);
    let planted = Bernoulli::new(params.p).map_err(|e| param(e.to_string()))?;
    let background = Bernoulli::new(params.q).map_err(|e| param(e.to_string()))?;
    let mut g = Graph::empty(params.n);
    fill_pairs(&mut g, &side, &planted, &background, rng);
    Ok((g, sets))
}

/// Union construction: `G(n, q)` overlaid with an independent planted
/// bipartite block whose pairs appear with `p' = (p - q) / (1 - q)`.
/// Same law as [`sample_planted`].
pub fn sample_planted_union<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> Result<(Graph, PlantedSets)> {
    params.validate()?;
    let p_block = params.union_block_probability();
    let sets = sample_planted_sets(params.n, params.kr, params.kl, rng);
    let mut g = sample_er(params.n, params.q, rng)?;
    let block = Bernoulli::new(p_block.clamp(0.0, 1.0)).map_err(|e| param(e.to_string()))?;
    let side = sets.sides(params.n);
    for i in 0..params.n {
        for j in i + 1..params.n {
            if side[i] + side[j] == 3 && block.sample(rng) {
                g.set_edge(i, j);
            }
        }
    }
    Ok((g, sets))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::Seed;

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(5, 2, 2, 0.9, 0.1).is_ok());
        assert!(ModelParams::new(5, 2, 2, 1.0, 0.1).is_ok());
        assert!(ModelParams::new(5, 1, 1, 0.5, 0.5).is_err());
        assert!(ModelParams::new(5, 3, 3, 0.9, 0.1).is_err());
        assert!(ModelParams::new(5, 0, 2, 0.9, 0.1).is_err());
        assert!(ModelParams::new(5, 1, 1, 0.9, 0.0).is_err());
        assert!(ModelParams::new(5, 1, 1, 1.0, 1.0).is_err());
        assert!(ModelParams::new(5, 1, 1, 1.1, 0.5).is_err());
        assert!(ModelParams::new(5, 1, 1, f64::NAN, 0.5).is_err());
    }

    #[test]
    fn er_extremes() {
        let mut rng = Seed::new(1).stream("t", 0);
        assert_eq!(sample_er(3, 0.0, &mut rng).unwrap().edge_count(), 0);
        assert_eq!(sample_er(3, 1.0, &mut rng).unwrap().edge_count(), 3);
        assert!(sample_er(3, 1.5, &mut rng).is_err());
        assert!(sample_er(0, 0.5, &mut rng).is_err());
    }

    #[test]
    fn planted_sets_are_disjoint_and_sized() {
        for t in 0..50 {
            let mut rng = Seed::new(9).stream("sets", t);
            let s = sample_planted_sets(12, 4, 3, &mut rng);
            assert_eq!(s.right.len(), 4);
            assert_eq!(s.left.len(), 3);
            assert!(s.right.iter().all(|r| !s.left.contains(r)));
            assert!(s.right.iter().chain(&s.left).all(|&v| v < 12));
        }
    }

    #[test]
    fn p_one_fills_the_block() {
        let params = ModelParams::new(5, 2, 2, 1.0, 1e-12).unwrap();
        let mut rng = Seed::new(3).stream("t", 0);
        let (g, sets) = sample_planted(&params, &mut rng).unwrap();
        assert_eq!(g.block_edges(&sets.right, &sets.left), 4);
        assert_eq!(g.edge_count(), 4);
        for (i, j) in g.edges() {
            assert!(sets.is_planted_pair(i, j));
        }
    }

    #[test]
    fn union_block_probability_edges() {
        let p = ModelParams::new(10, 2, 2, 1.0, 0.5).unwrap();
        assert_eq!(p.union_block_probability(), 1.0);
        let p = ModelParams::new(10, 2, 2, 0.5 + 1e-12, 0.5).unwrap();
        assert!(p.union_block_probability() < 1e-11);
        let mut rng = Seed::new(4).stream("t", 0);
        let full = ModelParams::new(10, 3, 2, 1.0, 0.5).unwrap();
        let (g, sets) = sample_planted_union(&full, &mut rng).unwrap();
        assert_eq!(g.block_edges(&sets.right, &sets.left), 6);
    }

    #[test]
    fn same_stream_same_graph() {
        let params = ModelParams::new(40, 5, 4, 0.7, 0.2).unwrap();
        let a = sample_planted(&params, &mut Seed::new(11).stream("h1", 5)).unwrap();
        let b = sample_planted(&params, &mut Seed::new(11).stream("h1", 5)).unwrap();
        assert_eq!(a, b);
    }
}
