//! Rule-base induction: every antecedent combination gets a consequent chosen
//! by combining the per-factor belief assignments with Dempster's rule.

use std::fmt;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evidence::{Frame, MassFunction};
use crate::fuzzy::{FuzzyRule, LinguisticVariable, RuleProvenance};

pub const HIGH_PERFORMANCE: &str = "H_P";

pub const RULEBASE_FORMAT: &str = "dsfolio.rulebase.v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BpaEntry {
    pub variable: String,
    pub value: String,
    pub hypothesis: String,
    pub belief: f64,
}

/// One `(hypothesis, belief)` per `(variable, linguistic value)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BpaTable {
    pub entries: Vec<BpaEntry>,
}

impl Default for BpaTable {
    fn default() -> Self {
        serde_json::from_str(include_str!("../data/bpa_table.json"))
            .expect("bundled BPA table parses")
    }
}

impl BpaTable {
    pub fn get(&self, variable: &str, value: &str) -> Option<&BpaEntry> {
        self.entries
            .iter()
            .find(|e| e.variable == variable && e.value == value)
    }

    pub fn set_belief(&mut self, variable: &str, value: &str, belief: f64) -> bool {
        match self
            .entries
            .iter_mut()
            .find(|e| e.variable == variable && e.value == value)
        {
            Some(e) => {
                e.belief = belief;
                true
            }
            None => false,
        }
    }

    pub fn remove(&mut self, variable: &str, value: &str) {
        self.entries
            .retain(|e| !(e.variable == variable && e.value == value));
    }

    /// Every cell present exactly once with a known hypothesis and a belief in `[0, 1]`.
    pub fn validate(&self, inputs: &[LinguisticVariable], frame: &Frame) -> Result<()> {
        for var in inputs {
            for label in var.labels() {
                let count = self
                    .entries
                    .iter()
                    .filter(|e| e.variable == var.name && e.value == label)
                    .count();
                match count {
                    0 => {
                        return Err(Error::Config(format!(
                            "bpa: missing cell ({}, {label})",
                            var.name
                        )))
                    }
                    1 => {}
                    _ => {
                        return Err(Error::Config(format!(
                            "bpa: duplicate cell ({}, {label})",
                            var.name
                        )))
                    }
                }
            }
        }
        for (i, e) in self.entries.iter().enumerate() {
            if frame.index_of(&e.hypothesis).is_none() {
                return Err(Error::Config(format!(
                    "bpa[{i}].hypothesis: unknown hypothesis `{}`",
                    e.hypothesis
                )));
            }
            if !e.belief.is_finite() || !(0.0..=1.0).contains(&e.belief) {
                return Err(Error::Config(format!(
                    "bpa[{i}].belief: {} is outside [0, 1]",
                    e.belief
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Favourability {
    #[serde(rename = "Not Favourable")]
    Not,
    #[serde(rename = "Moderately Favourable")]
    Moderately,
    #[serde(rename = "Highly Favourable")]
    Highly,
}

impl Favourability {
    pub const ALL: [Favourability; 3] = [
        Favourability::Not,
        Favourability::Moderately,
        Favourability::Highly,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Favourability::Not => "Not Favourable",
            Favourability::Moderately => "Moderately Favourable",
            Favourability::Highly => "Highly Favourable",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.label() == label)
    }
}

impl fmt::Display for Favourability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Bands on `m_f(H_P)`, stated on two-decimal boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FavourabilityThresholds {
    pub not_max: f64,
    pub moderate_min: f64,
    pub moderate_max: f64,
    pub high_min: f64,
}

impl Default for FavourabilityThresholds {
    fn default() -> Self {
        FavourabilityThresholds {
            not_max: 0.45,
            moderate_min: 0.46,
            moderate_max: 0.75,
            high_min: 0.76,
        }
    }
}

impl FavourabilityThresholds {
    pub fn validate(&self) -> Result<()> {
        let ok = 0.0 <= self.not_max
            && self.not_max < self.moderate_min
            && self.moderate_min <= self.moderate_max
            && self.moderate_max < self.high_min
            && self.high_min <= 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "thresholds: need 0 <= not_max < moderate_min <= moderate_max < high_min <= 1, got {self:?}"
            )))
        }
    }

    /// Rounds half-up to two decimals, then bands. Values still left between
    /// bands (only possible with custom thresholds) fall to the lower band.
    pub fn classify(&self, high_performance: f64) -> Favourability {
        let m = round_half_up_2(high_performance);
        if m >= self.high_min {
            Favourability::Highly
        } else if m >= self.moderate_min {
            Favourability::Moderately
        } else {
            Favourability::Not
        }
    }
}

pub fn round_half_up_2(x: f64) -> f64 {
    // The epsilon absorbs representation error such as 0.455 * 100 = 45.4999...
    (x * 100.0 + 0.5 + 1e-9).floor() / 100.0
}

/// Builds rules from a BPA table over a fixed set of input variables.
#[derive(Debug, Clone)]
pub struct RuleInducer {
    frame: Arc<Frame>,
    inputs: Vec<LinguisticVariable>,
    bpa: BpaTable,
    thresholds: FavourabilityThresholds,
}

impl RuleInducer {
    pub fn new(
        frame: Frame,
        inputs: Vec<LinguisticVariable>,
        bpa: BpaTable,
        thresholds: FavourabilityThresholds,
    ) -> Result<Self> {
        if frame.index_of(HIGH_PERFORMANCE).is_none() {
            return Err(Error::Config(format!(
                "hypotheses: frame must contain `{HIGH_PERFORMANCE}`"
            )));
        }
        thresholds.validate()?;
        bpa.validate(&inputs, &frame)?;
        Ok(RuleInducer {
            frame: Arc::new(frame),
            inputs,
            bpa,
            thresholds,
        })
    }

    pub fn inputs(&self) -> &[LinguisticVariable] {
        &self.inputs
    }

    pub fn frame(&self) -> &Arc<Frame> {
        &self.frame
    }

    /// Single-belief mass function per antecedent clause, in input order.
    pub fn evidence(&self, antecedent: &[&str]) -> Result<Vec<MassFunction>> {
        if antecedent.len() != self.inputs.len() {
            return Err(Error::Domain(format!(
                "antecedent has {} labels, expected {}",
                antecedent.len(),
                self.inputs.len()
            )));
        }
        self.inputs
            .iter()
            .zip(antecedent)
            .map(|(var, label)| {
                if var.set_index(label).is_none() {
                    return Err(Error::Domain(format!(
                        "`{label}` is not a value of `{}`",
                        var.name
                    )));
                }
                let entry = self.bpa.get(&var.name, label).ok_or_else(|| {
                    Error::Config(format!("bpa: missing cell ({}, {label})", var.name))
                })?;
                let target = self.frame.singleton(&entry.hypothesis)?;
                MassFunction::from_single_belief(Arc::clone(&self.frame), target, entry.belief)
            })
            .collect()
    }

    pub fn induce_rule(&self, antecedent: &[&str]) -> Result<FuzzyRule> {
        let evidence = self.evidence(antecedent)?;
        let labels = antecedent.iter().map(|s| s.to_string()).collect();
        let rule = match MassFunction::combine_all(&evidence) {
            Ok(combined) => {
                let high = combined.mass_of(HIGH_PERFORMANCE);
                FuzzyRule {
                    antecedent: labels,
                    consequent: self.thresholds.classify(high).label().to_string(),
                    provenance: Some(RuleProvenance {
                        masses: combined
                            .focal_elements()
                            .map(|(s, m)| (self.frame.format_set(s), m))
                            .collect(),
                        high_performance: high,
                        degenerate: false,
                    }),
                }
            }
            Err(Error::TotalConflict { .. }) => FuzzyRule {
                antecedent: labels,
                consequent: Favourability::Not.label().to_string(),
                provenance: Some(RuleProvenance {
                    masses: Vec::new(),
                    high_performance: 0.0,
                    degenerate: true,
                }),
            },
            Err(e) => return Err(e),
        };
        Ok(rule)
    }

    /// All antecedent combinations, first input outermost, labels in set order.
    pub fn antecedents(&self) -> Vec<Vec<&str>> {
        let mut out: Vec<Vec<&str>> = vec![Vec::new()];
        for var in &self.inputs {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    var.labels().map(move |l| {
                        let mut next = prefix.clone();
                        next.push(l);
                        next
                    })
                })
                .collect();
        }
        out
    }

    pub fn induce_all(&self) -> Result<Vec<FuzzyRule>> {
        self.antecedents()
            .iter()
            .map(|a| self.induce_rule(a))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleBase {
    pub format: String,
    pub inputs: Vec<String>,
    pub output: String,
    pub rules: Vec<FuzzyRule>,
}

impl RuleBase {
    pub fn new(inputs: &[LinguisticVariable], output: &LinguisticVariable, rules: Vec<FuzzyRule>) -> Self {
        RuleBase {
            format: RULEBASE_FORMAT.to_string(),
            inputs: inputs.iter().map(|v| v.name.clone()).collect(),
            output: output.name.clone(),
            rules,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        if self.rules.is_empty() {
            return Err(Error::Domain("refusing to export an empty rule base".to_string()));
        }
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::Json {
            path: "<rulebase>".into(),
            source: e,
        })?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str, origin: &Path) -> Result<Self> {
        let base: RuleBase = serde_json::from_str(text).map_err(|e| Error::Json {
            path: origin.to_path_buf(),
            source: e,
        })?;
        if base.format != RULEBASE_FORMAT {
            return Err(Error::Config(format!(
                "{}: unsupported rule base format `{}`",
                origin.display(),
                base.format
            )));
        }
        if base.rules.is_empty() {
            return Err(Error::Config(format!("{}: rule base is empty", origin.display())));
        }
        Ok(base)
    }

    pub fn export(&self, path: &Path) -> Result<()> {
        let json = self.to_json()?;
        fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn import(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        RuleBase::from_json(&text, path)
    }

    pub fn listing(&self, inputs: &[LinguisticVariable]) -> String {
        let mut out = String::new();
        for rule in &self.rules {
            out.push_str(&rule.describe(inputs));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config;
    use approx::assert_abs_diff_eq;

    fn inducer() -> RuleInducer {
        RuleInducer::new(
            Frame::performance(),
            config::default_inputs(),
            BpaTable::default(),
            FavourabilityThresholds::default(),
        )
        .unwrap()
    }

    #[test]
    fn worked_example_rule() {
        let rule = inducer()
            .induce_rule(&["Low", "Standard", "High", "High"])
            .unwrap();
        assert_eq!(rule.consequent, "Not Favourable");
        let p = rule.provenance.unwrap();
        // exact-rational fold; printed three-decimal figure is 0.267
        assert_abs_diff_eq!(p.high_performance, 0.270_096_463_022_508_06, epsilon = 1e-12);
        assert!(!p.degenerate);
    }

    #[test]
    fn all_high_evidence_antecedent() {
        let rule = inducer()
            .induce_rule(&["Standard", "High", "High", "Low"])
            .unwrap();
        let p = rule.provenance.unwrap();
        assert_abs_diff_eq!(p.high_performance, 1.0 - 0.25 * 0.35 * 0.25 * 0.4, epsilon = 1e-12);
        assert_eq!(rule.consequent, "Highly Favourable");
    }

    #[test]
    fn all_poor_evidence_antecedent() {
        let rule = inducer().induce_rule(&["High", "Low", "Low", "High"]).unwrap();
        assert_eq!(rule.provenance.unwrap().high_performance, 0.0);
        assert_eq!(rule.consequent, "Not Favourable");
    }

    #[test]
    fn eighty_one_rules_in_lexicographic_order() {
        let ind = inducer();
        let rules = ind.induce_all().unwrap();
        assert_eq!(rules.len(), 81);
        assert_eq!(rules[0].antecedent, ["Low", "Low", "Low", "Low"]);
        assert_eq!(rules[1].antecedent, ["Low", "Low", "Low", "Standard"]);
        assert_eq!(rules[80].antecedent, ["High", "High", "High", "High"]);
        let mut seen: Vec<_> = rules.iter().map(|r| r.antecedent.clone()).collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 81);
    }

    #[test]
    fn banding_rounds_to_two_decimals() {
        let t = FavourabilityThresholds::default();
        assert_eq!(t.classify(0.45), Favourability::Not);
        assert_eq!(t.classify(0.454), Favourability::Not);
        assert_eq!(t.classify(0.455), Favourability::Moderately);
        assert_eq!(t.classify(0.75), Favourability::Moderately);
        assert_eq!(t.classify(0.7549), Favourability::Moderately);
        assert_eq!(t.classify(0.755), Favourability::Highly);
        assert_eq!(t.classify(0.0), Favourability::Not);
        assert_eq!(t.classify(1.0), Favourability::Highly);
    }

    #[test]
    fn threshold_validation() {
        let bad = FavourabilityThresholds {
            not_max: 0.5,
            moderate_min: 0.4,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn missing_cell_named() {
        let mut bpa = BpaTable::default();
        bpa.remove("ps", "Standard");
        let err = RuleInducer::new(
            Frame::performance(),
            config::default_inputs(),
            bpa,
            FavourabilityThresholds::default(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("(ps, Standard)"), "{err}");
    }

    #[test]
    fn total_conflict_is_flagged() {
        let mut bpa = BpaTable::default();
        bpa.set_belief("pe", "Low", 1.0);
        bpa.set_belief("pb", "Low", 1.0);
        let ind = RuleInducer::new(
            Frame::performance(),
            config::default_inputs(),
            bpa,
            FavourabilityThresholds::default(),
        )
        .unwrap();
        let rule = ind.induce_rule(&["Low", "Low", "Standard", "Standard"]).unwrap();
        assert_eq!(rule.consequent, "Not Favourable");
        assert!(rule.provenance.unwrap().degenerate);
    }

    #[test]
    fn empty_rule_base_not_exported() {
        let base = RuleBase::new(&config::default_inputs(), &config::default_output(), vec![]);
        assert!(base.to_json().is_err());
    }

    #[test]
    fn rulebase_round_trip() {
        let ind = inducer();
        let base = RuleBase::new(ind.inputs(), &config::default_output(), ind.induce_all().unwrap());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rules.json");
        base.export(&path).unwrap();
        assert_eq!(RuleBase::import(&path).unwrap(), base);
        assert!(RuleBase::import(&dir.path().join("missing.json")).is_err());
    }
}
