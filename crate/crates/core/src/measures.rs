//! Closed-form quantities: χ² divergence, γ_n, planted density, the three test
//! thresholds, the impossibility and sufficiency conditions, and the
//! polynomial-scale region classifier.
//!
//! All logarithms are natural.

use std::collections::BTreeSet;
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::model::ModelParams;

/// `(p - q)² / (q (1 - q))`.
pub fn chi2_bernoulli(p: f64, q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(param(format!("chi-square undefined for q = {q}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(param(format!("p must lie in [0, 1], got {p}")));
    }
    Ok((p - q) * (p - q) / (q * (1.0 - q)))
}

/// χ² of the model's `(p, q)`, without validation.
pub fn chi2_of(params: &ModelParams) -> f64 {
    let (p, q) = (params.p, params.q);
    (p - q) * (p - q) / (q * (1.0 - q))
}

/// `γ_n(x, y) = ln(1 + (n / (x y)) · ln 2 / 2)`.
pub fn gamma_n(n: usize, x: usize, y: usize) -> f64 {
    (n as f64 / (x as f64 * y as f64) * std::f64::consts::LN_2 / 2.0).ln_1p()
}

/// Maximal subgraph density of the complete bipartite graph `K_{kR,kL}`.
pub fn max_bipartite_density(kr: u64, kl: u64) -> Ratio<u64> {
    Ratio::new(kr * kl, kr + kl)
}

pub fn tau_scan(params: &ModelParams) -> f64 {
    (params.kr * params.kl) as f64 * (params.p + params.q) / 2.0
}

pub fn tau_count(params: &ModelParams) -> f64 {
    let n = params.n as f64;
    n * (n - 1.0) / 2.0 * params.q + (params.kr * params.kl) as f64 * (params.p - params.q) / 2.0
}

pub fn tau_deg(params: &ModelParams) -> f64 {
    (params.n as f64 - 1.0) * params.q + params.kmax() as f64 * (params.p - params.q) / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ImpossibilityCondition {
    /// `χ² <= n γ_n(kR,kL) / (8 kR kL)`.
    Sparse1,
    /// `χ² <= γ_n(kR,kR)/(2kL) ∨ γ_n(kL,kL)/(2kR)`.
    Dense,
    /// `χ² <= (1/(2kL) ∧ n γ_n(kL,kL)/(8kR²)) ∨ (1/(2kR) ∧ n γ_n(kR,kR)/(8kL²))`.
    Sparse2,
}

impl ImpossibilityCondition {
    pub fn label(&self) -> &'static str {
        match self {
            ImpossibilityCondition::Sparse1 => "sparse1",
            ImpossibilityCondition::Dense => "dense",
            ImpossibilityCondition::Sparse2 => "sparse2",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpossibilityVerdict {
    pub impossible: bool,
    /// Every condition whose inequality holds, whether or not the
    /// combination fires.
    pub satisfied: BTreeSet<ImpossibilityCondition>,
    pub chi2: f64,
    pub bounds: [f64; 3],
}

/// Statistical impossibility: the first condition together with either of
/// the other two.
pub fn thm1_impossible(params: &ModelParams) -> ImpossibilityVerdict {
    let chi2 = chi2_of(params);
    let n = params.n;
    let (kr, kl) = (params.kr, params.kl);
    let (fr, fl, fnn) = (kr as f64, kl as f64, n as f64);

    let bound_a = fnn * gamma_n(n, kr, kl) / (8.0 * fr * fl);
    let bound_b = (gamma_n(n, kr, kr) / (2.0 * fl)).max(gamma_n(n, kl, kl) / (2.0 * fr));
    let bound_c = (1.0 / (2.0 * fl))
        .min(fnn * gamma_n(n, kl, kl) / (8.0 * fr * fr))
        .max((1.0 / (2.0 * fr)).min(fnn * gamma_n(n, kr, kr) / (8.0 * fl * fl)));

    let mut satisfied = BTreeSet::new();
    for (cond, bound) in [
        (ImpossibilityCondition::Sparse1, bound_a),
        (ImpossibilityCondition::Dense, bound_b),
        (ImpossibilityCondition::Sparse2, bound_c),
    ] {
        if chi2 <= bound {
            satisfied.insert(cond);
        }
    }
    let impossible = satisfied.contains(&ImpossibilityCondition::Sparse1)
        && (satisfied.contains(&ImpossibilityCondition::Dense) || satisfied.contains(&ImpossibilityCondition::Sparse2));
    ImpossibilityVerdict { impossible, satisfied, chi2, bounds: [bound_a, bound_b, bound_c] }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TestKind {
    Scan,
    Count,
    Degree,
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TestKind::Scan => "Scan",
            TestKind::Count => "Count",
            TestKind::Degree => "Degree",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SufficiencyReport {
    pub tests: BTreeSet<TestKind>,
    /// Right-hand sides of the three conditions before multiplying by `C`.
    pub scan_rhs: f64,
    pub count_rhs: f64,
    pub degree_rhs: f64,
    /// Advisory notes when the guarantee's hypotheses look violated.
    pub warnings: Vec<String>,
}

/// Tests whose risk-≤-δ condition holds with the hidden constant set to `c`.
pub fn thm2_sufficient(params: &ModelParams, delta: f64, c: f64) -> Result<SufficiencyReport> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(param(format!("delta must lie in (0, 1), got {delta}")));
    }
    if c.is_nan() || c <= 0.0 {
        return Err(param(format!("constant C must be positive, got {c}")));
    }
    let chi2 = chi2_of(params);
    let n = params.n as f64;
    let (kmax, kmin) = (params.kmax() as f64, params.kmin() as f64);
    let krkl = (params.kr * params.kl) as f64;
    let log_delta = (2.0 / delta).ln();

    let scan_rhs = ((n / kmax).ln() + log_delta / kmax) / kmin;
    let count_rhs = n * n / (krkl * krkl) * log_delta;
    let degree_rhs = n / (kmax * kmax) * (n.ln() + log_delta);

    let mut tests = BTreeSet::new();
    for (kind, rhs) in [(TestKind::Scan, scan_rhs), (TestKind::Count, count_rhs), (TestKind::Degree, degree_rhs)] {
        if chi2 > 0.0 && chi2 >= c * rhs {
            tests.insert(kind);
        }
    }

    let mut warnings = Vec::new();
    if params.q >= 0.99 {
        warnings.push(format!("q = {} is not bounded away from 1", params.q));
    }
    if params.p - params.q > params.q {
        warnings.push(format!("p - q = {} exceeds q = {}; |p - q| = O(q) may fail", params.p - params.q, params.q));
    }
    Ok(SufficiencyReport { tests, scan_rhs, count_rhs, degree_rhs, warnings })
}

/// Polynomial-scale exponents: `kR = Θ(n^betaR)`, `kL = Θ(n^betaL)`,
/// `χ² = Θ(n^-alpha)`, with `alpha = 0` the dense regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeExponents {
    pub beta_r: f64,
    pub beta_l: f64,
    pub alpha: f64,
}

impl RegimeExponents {
    pub fn new(beta_r: f64, beta_l: f64, alpha: f64) -> Result<RegimeExponents> {
        let e = RegimeExponents { beta_r, beta_l, alpha };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, b) in [("betaR", self.beta_r), ("betaL", self.beta_l)] {
            if !(0.0..1.0).contains(&b) {
                return Err(param(format!("{name} must lie in [0, 1), got {b}")));
            }
        }
        if !(0.0..=2.0).contains(&self.alpha) {
            return Err(param(format!("alpha must lie in [0, 2], got {}", self.alpha)));
        }
        Ok(())
    }

    /// Count test exponent: `χ² ≫ n² / (kR² kL²)` iff `alpha` is below this.
    pub fn count_exponent(&self) -> f64 {
        2.0 * self.beta_r + 2.0 * self.beta_l - 2.0
    }

    /// Degree test exponent: `χ² ≫ n / kmax²` iff `alpha` is below this.
    pub fn degree_exponent(&self) -> f64 {
        2.0 * self.beta_r.max(self.beta_l) - 1.0
    }

    /// Largest exponent at which an efficient test still succeeds.
    pub fn efficient_exponent(&self) -> f64 {
        self.count_exponent().max(self.degree_exponent())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegionLabel {
    Impossible,
    Hard,
    Easy(BTreeSet<TestKind>),
    Boundary,
}

impl RegionLabel {
    pub fn name(&self) -> &'static str {
        match self {
            RegionLabel::Impossible => "Impossible",
            RegionLabel::Hard => "Hard",
            RegionLabel::Easy(_) => "Easy",
            RegionLabel::Boundary => "Boundary",
        }
    }

    pub fn witnesses(&self) -> Vec<TestKind> {
        match self {
            RegionLabel::Easy(w) => w.iter().copied().collect(),
            _ => Vec::new(),
        }
    }
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegionLabel::Easy(w) => {
                let names: Vec<String> = w.iter().map(|t| t.to_string()).collect();
                write!(f, "Easy{{{}}}", names.join(","))
            }
            other => f.write_str(other.name()),
        }
    }
}

pub const DEFAULT_BOUNDARY_TOL: f64 = 1e-9;

/// Impossible / hard / easy on the polynomial scale.
///
/// Comparisons that decide the label and fall within `tol` give
/// [`RegionLabel::Boundary`]. A positive `betaMin` no larger than `tol` is a
/// sub-polynomial planted side and is also boundary.
pub fn classify_region(exps: &RegimeExponents, tol: f64) -> RegionLabel {
    let beta_min = exps.beta_r.min(exps.beta_l);
    let count_exp = exps.count_exponent();
    let degree_exp = exps.degree_exponent();
    let efficient = exps.efficient_exponent();
    let alpha = exps.alpha;
    let near = |a: f64, b: f64| (a - b).abs() <= tol;

    if beta_min > 0.0 && beta_min <= tol {
        return RegionLabel::Boundary;
    }
    let scan_ok = beta_min > 0.0;

    if alpha <= tol {
        // Dense: only the degree barrier kmax² vs n matters for efficiency and
        // the scan test succeeds whenever the smaller side is polynomial.
        if alpha > 0.0 || near(degree_exp, 0.0) {
            return RegionLabel::Boundary;
        }
        if degree_exp > 0.0 {
            let mut w = BTreeSet::from([TestKind::Degree]);
            if count_exp > tol {
                w.insert(TestKind::Count);
            }
            if scan_ok {
                w.insert(TestKind::Scan);
            }
            return RegionLabel::Easy(w);
        }
        return if scan_ok { RegionLabel::Hard } else { RegionLabel::Impossible };
    }

    if near(alpha, efficient) {
        return RegionLabel::Boundary;
    }
    if alpha < efficient {
        let mut w = BTreeSet::new();
        if alpha < count_exp - tol {
            w.insert(TestKind::Count);
        }
        if alpha < degree_exp - tol {
            w.insert(TestKind::Degree);
        }
        if alpha < beta_min - tol {
            w.insert(TestKind::Scan);
        }
        return RegionLabel::Easy(w);
    }
    if near(alpha, beta_min) {
        return RegionLabel::Boundary;
    }
    if alpha < beta_min {
        RegionLabel::Hard
    } else {
        RegionLabel::Impossible
    }
}
