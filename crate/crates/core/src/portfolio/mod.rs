//! The allocation model: maximize `(E(Σ r̃ᵢ xᵢ) - r_f) / μ_s` over weights on the
//! capped simplex, subject to bounds on portfolio return, variance and skewness
//! and, optionally, rank preference (`x₁ ≥ x₂ ≥ … ≥ xₙ`).

mod aco;

use std::fmt;

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moments::{weighted_sum, TriangularFuzzyNumber};

pub use aco::{solve_aco, AcoOutcome, AcoParams, PheromoneStats, TraceRow};

/// Simplex sum tolerance.
pub const SUM_TOLERANCE: f64 = 1e-9;
/// Slack on the per-asset cap and on rank ordering.
pub const CAP_TOLERANCE: f64 = 1e-12;
pub const MAX_SAMPLE_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct Asset {
    pub name: String,
    pub fuzzy_return: TriangularFuzzyNumber,
    pub semivariance: f64,
}

impl Asset {
    pub fn new(name: impl Into<String>, fuzzy_return: TriangularFuzzyNumber, semivariance: f64) -> Self {
        Asset {
            name: name.into(),
            fuzzy_return,
            semivariance,
        }
    }

    pub fn expected_return(&self) -> f64 {
        self.fuzzy_return.mean()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "value", rename_all = "lowercase")]
pub enum MuSMode {
    /// Weights sorted descending, paired with ranked semivariances.
    Computed,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    AtLeast,
    AtMost,
}

impl Bound {
    fn holds(self, value: f64, bound: f64) -> bool {
        match self {
            Bound::AtLeast => value >= bound,
            Bound::AtMost => value <= bound,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Bound::AtLeast => ">=",
            Bound::AtMost => "<=",
        }
    }
}

/// Direction of each moment constraint. The default treats the variance bound
/// as a risk ceiling; the all-`AtLeast` setting is the literal reading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstraintDirections {
    pub r#return: Bound,
    pub variance: Bound,
    pub skewness: Bound,
}

impl Default for ConstraintDirections {
    fn default() -> Self {
        ConstraintDirections {
            r#return: Bound::AtLeast,
            variance: Bound::AtMost,
            skewness: Bound::AtLeast,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PortfolioParams {
    pub risk_free: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub max_weight: f64,
    pub mu_s: MuSMode,
    pub directions: ConstraintDirections,
    pub rank_preference: bool,
}

impl Default for PortfolioParams {
    fn default() -> Self {
        PortfolioParams {
            risk_free: 0.01,
            alpha: 0.05,
            beta: 0.5,
            gamma: 0.001,
            max_weight: 0.8,
            mu_s: MuSMode::Computed,
            directions: ConstraintDirections::default(),
            rank_preference: true,
        }
    }
}

/// Assets in rank order plus investor parameters.
#[derive(Debug, Clone)]
pub struct PortfolioProblem {
    assets: Vec<Asset>,
    params: PortfolioParams,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Return { value: f64, bound: f64, dir: Bound },
    Variance { value: f64, bound: f64, dir: Bound },
    Skewness { value: f64, bound: f64, dir: Bound },
    SkewnessUndefined,
    WeightCap { asset: usize, weight: f64, cap: f64 },
    NonPositive { asset: usize, weight: f64 },
    RankOrder { asset: usize },
    Sum { total: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Return { value, bound, dir } => {
                write!(f, "return: r_p = {value:.6} violates r_p {} {bound}", dir.symbol())
            }
            Violation::Variance { value, bound, dir } => {
                write!(f, "variance: v_p = {value:.6} violates v_p {} {bound}", dir.symbol())
            }
            Violation::Skewness { value, bound, dir } => {
                write!(f, "skewness: s_p = {value:.6} violates s_p {} {bound}", dir.symbol())
            }
            Violation::SkewnessUndefined => write!(f, "skewness: undefined for a crisp portfolio"),
            Violation::WeightCap { asset, weight, cap } => {
                write!(f, "weight cap: x{} = {weight:.6} exceeds {cap}", asset + 1)
            }
            Violation::NonPositive { asset, weight } => {
                write!(f, "positivity: x{} = {weight} is not positive", asset + 1)
            }
            Violation::RankOrder { asset } => write!(
                f,
                "rank preference: x{} < x{}",
                asset + 1,
                asset + 2
            ),
            Violation::Sum { total } => write!(f, "simplex: weights sum to {total}"),
        }
    }
}

/// A weight vector with its cached metrics and feasibility verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct PortfolioCandidate {
    pub weights: Vec<f64>,
    pub r_p: f64,
    pub v_p: f64,
    pub s_p: Option<f64>,
    pub mu_s: f64,
    pub objective: f64,
    pub violations: Vec<Violation>,
}

impl PortfolioCandidate {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

impl PortfolioProblem {
    pub fn new(assets: Vec<Asset>, params: PortfolioParams) -> Result<Self> {
        if assets.is_empty() {
            return Err(Error::Domain("portfolio needs at least one asset".to_string()));
        }
        let m = params.max_weight;
        if !(m > 0.0 && m <= 1.0) {
            return Err(Error::Domain(format!("weight cap M = {m} must lie in (0, 1]")));
        }
        if let MuSMode::Fixed(v) = params.mu_s {
            if !v.is_finite() {
                return Err(Error::Domain(format!("fixed mu_s {v} is not finite")));
            }
        }
        for a in &assets {
            if a.semivariance.is_nan() || a.semivariance < 0.0 {
                return Err(Error::Domain(format!(
                    "asset `{}` has invalid semivariance {}",
                    a.name, a.semivariance
                )));
            }
        }
        Ok(PortfolioProblem { assets, params })
    }

    pub fn assets(&self) -> &[Asset] {
        &self.assets
    }

    pub fn params(&self) -> &PortfolioParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.assets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assets.is_empty()
    }

    /// `n · M ≥ 1`; otherwise no weight vector can reach the simplex.
    pub fn cap_admits_simplex(&self) -> bool {
        self.assets.len() as f64 * self.params.max_weight >= 1.0 - CAP_TOLERANCE
    }

    /// Weighted mean semivariance. The i-th largest weight is paired with the
    /// i-th ranked asset.
    pub fn mu_s(&self, weights: &[f64]) -> f64 {
        match self.params.mu_s {
            MuSMode::Fixed(v) => v,
            MuSMode::Computed => self.mu_s_computed(weights),
        }
    }

    pub fn mu_s_computed(&self, weights: &[f64]) -> f64 {
        let mut sorted = weights.to_vec();
        sorted.sort_by(|a, b| b.total_cmp(a));
        sorted
            .iter()
            .zip(&self.assets)
            .map(|(x, a)| x * a.semivariance)
            .sum()
    }

    pub fn portfolio_return(&self, weights: &[f64]) -> Result<TriangularFuzzyNumber> {
        weighted_sum(weights.iter().copied().zip(self.assets.iter().map(|a| &a.fuzzy_return)))
    }

    /// Metrics, objective and feasibility for weights on the simplex.
    pub fn evaluate(&self, weights: &[f64]) -> Result<PortfolioCandidate> {
        if weights.len() != self.assets.len() {
            return Err(Error::Domain(format!(
                "expected {} weights, got {}",
                self.assets.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Domain("weights must be finite and non-negative".to_string()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::Domain(format!("weights sum to {total}, not 1")));
        }
        let portfolio = self.portfolio_return(weights)?;
        let mu_s = self.mu_s(weights);
        if mu_s == 0.0 {
            return Err(Error::ObjectiveUndefined);
        }
        let r_p = portfolio.mean();
        let mut candidate = PortfolioCandidate {
            weights: weights.to_vec(),
            r_p,
            v_p: portfolio.variance(),
            s_p: portfolio.skewness().ok(),
            mu_s,
            objective: (r_p - self.params.risk_free) / mu_s,
            violations: Vec::new(),
        };
        candidate.violations = self.check_feasible(&candidate);
        Ok(candidate)
    }

    /// Every violated constraint; empty means feasible.
    pub fn check_feasible(&self, candidate: &PortfolioCandidate) -> Vec<Violation> {
        let p = &self.params;
        let d = &p.directions;
        let mut out = Vec::new();
        let total: f64 = candidate.weights.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            out.push(Violation::Sum { total });
        }
        for (i, &w) in candidate.weights.iter().enumerate() {
            if w.is_nan() || w <= 0.0 {
                out.push(Violation::NonPositive { asset: i, weight: w });
            }
            if w > p.max_weight + CAP_TOLERANCE {
                out.push(Violation::WeightCap {
                    asset: i,
                    weight: w,
                    cap: p.max_weight,
                });
            }
        }
        if p.rank_preference {
            for (i, pair) in candidate.weights.windows(2).enumerate() {
                if pair[0] + CAP_TOLERANCE < pair[1] {
                    out.push(Violation::RankOrder { asset: i });
                }
            }
        }
        if !d.r#return.holds(candidate.r_p, p.alpha) {
            out.push(Violation::Return {
                value: candidate.r_p,
                bound: p.alpha,
                dir: d.r#return,
            });
        }
        if !d.variance.holds(candidate.v_p, p.beta) {
            out.push(Violation::Variance {
                value: candidate.v_p,
                bound: p.beta,
                dir: d.variance,
            });
        }
        match candidate.s_p {
            Some(s) if !d.skewness.holds(s, p.gamma) => out.push(Violation::Skewness {
                value: s,
                bound: p.gamma,
                dir: d.skewness,
            }),
            Some(_) => {}
            None => out.push(Violation::SkewnessUndefined),
        }
        out
    }

    /// Samples feasible weights: exponential variates normalized to the
    /// simplex, sorted when rank preference is on, caps repaired; rejection up
    /// to [`MAX_SAMPLE_ATTEMPTS`] times.
    pub fn random_feasible<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<PortfolioCandidate> {
        if !self.cap_admits_simplex() {
            return Err(Error::Infeasible(format!(
                "{} assets with cap M = {} cannot sum to 1",
                self.assets.len(),
                self.params.max_weight
            )));
        }
        let mut last = Vec::new();
        for _ in 0..MAX_SAMPLE_ATTEMPTS {
            let weights = self.sample_weights(rng);
            let candidate = match self.evaluate(&weights) {
                Ok(c) => c,
                Err(Error::ObjectiveUndefined) => {
                    return Err(Error::Infeasible(
                        "weighted semivariance is zero; objective undefined".to_string(),
                    ))
                }
                Err(e) => return Err(e),
            };
            if candidate.is_feasible() {
                return Ok(candidate);
            }
            last = candidate.violations;
        }
        let report: Vec<String> = last.iter().map(ToString::to_string).collect();
        Err(Error::Infeasible(format!(
            "no feasible sample in {MAX_SAMPLE_ATTEMPTS} attempts; last violations: {}",
            report.join("; ")
        )))
    }

    fn sample_weights<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let n = self.assets.len();
        let mut w: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let total: f64 = w.iter().sum();
        if total > 0.0 {
            w.iter_mut().for_each(|x| *x /= total);
        } else {
            w.iter_mut().for_each(|x| *x = 1.0 / n as f64);
        }
        if self.params.rank_preference {
            w.sort_by(|a, b| b.total_cmp(a));
        }
        repair_caps(&mut w, self.params.max_weight);
        w
    }
}

/// Clips weights above `cap` and hands the excess to unclipped weights in
/// proportion to their size, repeating until nothing exceeds the cap.
/// Preserves the sum and the weight ordering.
pub fn repair_caps(weights: &mut [f64], cap: f64) {
    let mut clipped = vec![false; weights.len()];
    for _ in 0..weights.len() {
        let mut excess = 0.0;
        for (w, c) in weights.iter_mut().zip(&mut clipped) {
            if *w > cap {
                excess += *w - cap;
                *w = cap;
                *c = true;
            }
        }
        if excess <= 0.0 {
            return;
        }
        let free: f64 = weights
            .iter()
            .zip(&clipped)
            .filter(|(_, c)| !**c)
            .map(|(w, _)| *w)
            .sum();
        if free <= 0.0 {
            // everything is at the cap already; spread evenly as a last resort
            let share = excess / weights.len() as f64;
            weights.iter_mut().for_each(|w| *w += share);
            return;
        }
        for (w, c) in weights.iter_mut().zip(&clipped) {
            if !*c {
                *w += excess * *w / free;
            }
        }
    }
}
