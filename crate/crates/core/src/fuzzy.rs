//! Trapezoidal linguistic variables and Mamdani-style inference.
//!
//! Defaults are min for AND, min implication, max aggregation and a centroid
//! defuzzifier evaluated by composite trapezoidal quadrature.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_RESOLUTION: usize = 1001;

/// Below this area the aggregate counts as "nothing fired".
pub const MIN_AREA: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrapezoidalSet {
    pub label: String,
    pub points: [f64; 4],
}

impl TrapezoidalSet {
    pub fn new(label: impl Into<String>, a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let set = TrapezoidalSet {
            label: label.into(),
            points: [a, b, c, d],
        };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        let [a, b, c, d] = self.points;
        if self.points.iter().any(|p| !p.is_finite()) || !(a <= b && b <= c && c <= d) {
            return Err(Error::Domain(format!(
                "set `{}` needs finite a <= b <= c <= d, got ({a}, {b}, {c}, {d})",
                self.label
            )));
        }
        Ok(())
    }

    /// Piecewise-linear degree; exactly 1 on `[b, c]`, 0 outside `[a, d]`.
    pub fn membership(&self, x: f64) -> f64 {
        let [a, b, c, d] = self.points;
        if x < a || x > d {
            0.0
        } else if x >= b && x <= c {
            1.0
        } else if x < b {
            (x - a) / (b - a)
        } else {
            (d - x) / (d - c)
        }
    }

    /// Exact centroid of the full (unclipped) trapezoid.
    pub fn centroid(&self) -> f64 {
        let [a, b, c, d] = self.points;
        // rising triangle, plateau, falling triangle
        let parts = [
            ((b - a) / 2.0, a + 2.0 * (b - a) / 3.0),
            (c - b, (b + c) / 2.0),
            ((d - c) / 2.0, c + (d - c) / 3.0),
        ];
        let area: f64 = parts.iter().map(|p| p.0).sum();
        if area == 0.0 {
            return (b + c) / 2.0;
        }
        parts.iter().map(|p| p.0 * p.1).sum::<f64>() / area
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinguisticVariable {
    pub name: String,
    pub range: [f64; 2],
    pub sets: Vec<TrapezoidalSet>,
}

impl LinguisticVariable {
    pub fn new(name: impl Into<String>, range: [f64; 2], sets: Vec<TrapezoidalSet>) -> Result<Self> {
        let var = LinguisticVariable {
            name: name.into(),
            range,
            sets,
        };
        var.validate()?;
        Ok(var)
    }

    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Domain(format!(
                "variable `{}` has an invalid range [{lo}, {hi}]",
                self.name
            )));
        }
        if self.sets.is_empty() {
            return Err(Error::Domain(format!("variable `{}` has no sets", self.name)));
        }
        for (i, set) in self.sets.iter().enumerate() {
            set.validate()?;
            if set.points.iter().any(|p| *p < lo || *p > hi) {
                return Err(Error::Domain(format!(
                    "set `{}` of `{}` leaves the range [{lo}, {hi}]",
                    set.label, self.name
                )));
            }
            if self.sets[..i].iter().any(|s| s.label == set.label) {
                return Err(Error::Domain(format!(
                    "duplicate label `{}` in `{}`",
                    set.label, self.name
                )));
            }
        }
        Ok(())
    }

    pub fn set_index(&self, label: &str) -> Option<usize> {
        self.sets.iter().position(|s| s.label == label)
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.sets.iter().map(|s| s.label.as_str())
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.range[0] && x <= self.range[1]
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.range[0], self.range[1])
    }

    /// Degrees of `x` in every set, in `sets` order.
    pub fn fuzzify(&self, x: f64) -> Result<Vec<f64>> {
        if !self.contains(x) {
            return Err(Error::OutOfRange {
                variable: self.name.clone(),
                value: x,
                lo: self.range[0],
                hi: self.range[1],
            });
        }
        Ok(self.sets.iter().map(|s| s.membership(x)).collect())
    }

    /// Same as [`fuzzify`](Self::fuzzify), keyed by label.
    pub fn fuzzify_labeled(&self, x: f64) -> Result<Vec<(&str, f64)>> {
        let degrees = self.fuzzify(x)?;
        Ok(self.labels().zip(degrees).collect())
    }

    /// Sub-intervals of the range where no set has positive membership.
    pub fn coverage_gaps(&self, samples: usize) -> Vec<(f64, f64)> {
        let [lo, hi] = self.range;
        let step = (hi - lo) / (samples - 1) as f64;
        let mut gaps = Vec::new();
        let mut open: Option<f64> = None;
        for i in 0..samples {
            let x = lo + step * i as f64;
            let covered = self.sets.iter().any(|s| s.membership(x) > 0.0);
            match (covered, open) {
                (false, None) => open = Some(x),
                (true, Some(start)) => {
                    gaps.push((start, x));
                    open = None;
                }
                _ => {}
            }
        }
        if let Some(start) = open {
            gaps.push((start, hi));
        }
        gaps
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TNorm {
    #[default]
    Min,
    Product,
}

impl TNorm {
    pub fn apply(self, x: f64, y: f64) -> f64 {
        match self {
            TNorm::Min => x.min(y),
            TNorm::Product => x * y,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SNorm {
    #[default]
    Max,
    Probor,
}

impl SNorm {
    pub fn apply(self, x: f64, y: f64) -> f64 {
        match self {
            SNorm::Max => x.max(y),
            SNorm::Probor => x + y - x * y,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InferenceOptions {
    pub and: TNorm,
    pub implication: TNorm,
    pub aggregation: SNorm,
    pub resolution: usize,
    pub clamp_inputs: bool,
}

impl Default for InferenceOptions {
    fn default() -> Self {
        InferenceOptions {
            and: TNorm::Min,
            implication: TNorm::Min,
            aggregation: SNorm::Max,
            resolution: DEFAULT_RESOLUTION,
            clamp_inputs: false,
        }
    }
}

/// Rule mass recorded by rule induction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleProvenance {
    /// Focal element (`{H_P}`, `{H_P,A_P,P_P}`, ...) to combined mass.
    pub masses: Vec<(String, f64)>,
    /// `m_f` on the high-performance singleton.
    pub high_performance: f64,
    /// Set when combination hit total conflict and no evidence survived.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyRule {
    /// One label per input variable, in input order.
    pub antecedent: Vec<String>,
    pub consequent: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<RuleProvenance>,
}

impl FuzzyRule {
    pub fn new(antecedent: Vec<String>, consequent: impl Into<String>) -> Self {
        FuzzyRule {
            antecedent,
            consequent: consequent.into(),
            provenance: None,
        }
    }

    /// `IF pe is Low AND ... THEN Not Favourable  [m_f(H_P)=0.267]`
    pub fn describe(&self, inputs: &[LinguisticVariable]) -> String {
        let clauses: Vec<String> = inputs
            .iter()
            .zip(&self.antecedent)
            .map(|(v, l)| format!("{} is {}", v.name, l))
            .collect();
        let mut line = format!("IF {} THEN {}", clauses.join(" AND "), self.consequent);
        if let Some(p) = &self.provenance {
            line.push_str(&format!("  [m_f(H_P)={:.3}]", p.high_performance));
            if p.degenerate {
                line.push_str(" (total conflict)");
            }
        }
        line
    }
}

#[derive(Debug, Clone)]
struct CompiledRule {
    antecedent: Vec<usize>,
    consequent: usize,
}

/// Input variables, output variable and a rule base with labels resolved.
#[derive(Debug, Clone)]
pub struct InferenceEngine {
    inputs: Vec<LinguisticVariable>,
    output: LinguisticVariable,
    rules: Vec<FuzzyRule>,
    compiled: Vec<CompiledRule>,
    options: InferenceOptions,
}

impl InferenceEngine {
    pub fn new(
        inputs: Vec<LinguisticVariable>,
        output: LinguisticVariable,
        rules: Vec<FuzzyRule>,
        options: InferenceOptions,
    ) -> Result<Self> {
        if rules.is_empty() {
            return Err(Error::Domain("rule base is empty".to_string()));
        }
        if options.resolution < 2 {
            return Err(Error::Domain("grid resolution must be at least 2".to_string()));
        }
        for v in inputs.iter().chain(std::iter::once(&output)) {
            v.validate()?;
        }
        let compiled = rules
            .iter()
            .enumerate()
            .map(|(n, rule)| compile(n, rule, &inputs, &output))
            .collect::<Result<Vec<_>>>()?;
        Ok(InferenceEngine {
            inputs,
            output,
            rules,
            compiled,
            options,
        })
    }

    pub fn inputs(&self) -> &[LinguisticVariable] {
        &self.inputs
    }

    pub fn output(&self) -> &LinguisticVariable {
        &self.output
    }

    pub fn rules(&self) -> &[FuzzyRule] {
        &self.rules
    }

    pub fn options(&self) -> &InferenceOptions {
        &self.options
    }

    /// Firing strength of every rule for one crisp input vector.
    pub fn firing_strengths(&self, crisp: &[f64]) -> Result<Vec<f64>> {
        if crisp.len() != self.inputs.len() {
            return Err(Error::Domain(format!(
                "expected {} inputs, got {}",
                self.inputs.len(),
                crisp.len()
            )));
        }
        let degrees = self
            .inputs
            .iter()
            .zip(crisp)
            .map(|(var, &x)| {
                let x = if self.options.clamp_inputs && x.is_finite() {
                    var.clamp(x)
                } else {
                    x
                };
                var.fuzzify(x)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self
            .compiled
            .iter()
            .map(|rule| {
                rule.antecedent
                    .iter()
                    .enumerate()
                    .map(|(v, &s)| degrees[v][s])
                    .reduce(|x, y| self.options.and.apply(x, y))
                    .unwrap_or(0.0)
            })
            .collect())
    }

    pub fn infer(&self, crisp: &[f64]) -> Result<AggregatedOutput> {
        let strengths = self.firing_strengths(crisp)?;
        Ok(self.aggregate(&strengths))
    }

    /// Clip each consequent at its rule's strength and aggregate.
    pub fn aggregate(&self, strengths: &[f64]) -> AggregatedOutput {
        let activations = self
            .compiled
            .iter()
            .zip(strengths)
            .filter(|(_, &w)| w > 0.0)
            .map(|(rule, &w)| (self.output.sets[rule.consequent].clone(), w))
            .collect();
        AggregatedOutput {
            activations,
            implication: self.options.implication,
            aggregation: self.options.aggregation,
            range: self.output.range,
        }
    }

    /// Centroid of the aggregated output for one input vector.
    pub fn evaluate(&self, crisp: &[f64]) -> Result<f64> {
        let curve = self.infer(crisp)?;
        defuzzify_centroid(&curve, curve.range, self.options.resolution)
    }
}

fn compile(
    n: usize,
    rule: &FuzzyRule,
    inputs: &[LinguisticVariable],
    output: &LinguisticVariable,
) -> Result<CompiledRule> {
    if rule.antecedent.len() != inputs.len() {
        return Err(Error::Domain(format!(
            "rule {n} has {} antecedents, expected {}",
            rule.antecedent.len(),
            inputs.len()
        )));
    }
    let antecedent = inputs
        .iter()
        .zip(&rule.antecedent)
        .map(|(v, label)| {
            v.set_index(label).ok_or_else(|| {
                Error::Domain(format!("rule {n}: `{label}` is not a value of `{}`", v.name))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let consequent = output.set_index(&rule.consequent).ok_or_else(|| {
        Error::Domain(format!(
            "rule {n}: `{}` is not a value of `{}`",
            rule.consequent, output.name
        ))
    })?;
    Ok(CompiledRule {
        antecedent,
        consequent,
    })
}

/// The aggregated output membership function; evaluate it pointwise.
#[derive(Debug, Clone)]
pub struct AggregatedOutput {
    activations: Vec<(TrapezoidalSet, f64)>,
    implication: TNorm,
    aggregation: SNorm,
    range: [f64; 2],
}

impl AggregatedOutput {
    pub fn eval(&self, z: f64) -> f64 {
        self.activations
            .iter()
            .map(|(set, w)| self.implication.apply(*w, set.membership(z)))
            .fold(0.0, |acc, v| self.aggregation.apply(acc, v))
    }

    pub fn range(&self) -> [f64; 2] {
        self.range
    }

    pub fn is_empty(&self) -> bool {
        self.activations.is_empty()
    }

    pub fn sample(&self, resolution: usize) -> Vec<(f64, f64)> {
        grid(self.range, resolution)
            .map(|z| (z, self.eval(z)))
            .collect()
    }
}

fn grid(range: [f64; 2], resolution: usize) -> impl Iterator<Item = f64> {
    let [lo, hi] = range;
    let step = (hi - lo) / (resolution - 1) as f64;
    (0..resolution).map(move |i| if i + 1 == resolution { hi } else { lo + step * i as f64 })
}

/// Anything that can be evaluated as a membership curve.
pub trait MembershipCurve {
    fn degree(&self, z: f64) -> f64;
}

impl MembershipCurve for AggregatedOutput {
    fn degree(&self, z: f64) -> f64 {
        self.eval(z)
    }
}

impl MembershipCurve for TrapezoidalSet {
    fn degree(&self, z: f64) -> f64 {
        self.membership(z)
    }
}

impl<F: Fn(f64) -> f64> MembershipCurve for F {
    fn degree(&self, z: f64) -> f64 {
        self(z)
    }
}

/// `∫ μ(z)·z dz / ∫ μ(z) dz` by composite trapezoidal quadrature on a uniform
/// grid of `resolution` samples over `range`.
pub fn defuzzify_centroid<C: MembershipCurve + ?Sized>(
    curve: &C,
    range: [f64; 2],
    resolution: usize,
) -> Result<f64> {
    if resolution < 2 {
        return Err(Error::Domain("grid resolution must be at least 2".to_string()));
    }
    let step = (range[1] - range[0]) / (resolution - 1) as f64;
    let mut area = 0.0;
    let mut moment = 0.0;
    for (i, z) in grid(range, resolution).enumerate() {
        let mu = curve.degree(z);
        let w = if i == 0 || i + 1 == resolution { 0.5 } else { 1.0 };
        area += w * mu;
        moment += w * mu * z;
    }
    area *= step;
    moment *= step;
    if area <= MIN_AREA {
        return Err(Error::NoRuleFired);
    }
    Ok((moment / area).clamp(range[0], range[1]))
}
