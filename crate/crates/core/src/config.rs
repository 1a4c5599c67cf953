//! Run configuration. Every default reproduces the reference run: the
//! four-factor trapezoidal variables, the BPA table, the favourability bands,
//! `r_f = 0.01`, `α = 0.05`, `β = 0.5`, `γ = 0.001`, `M = 0.8`, fixed
//! `μ_s = 0.0016`, top 10 stocks and a 2000-node / 50-ant / 400-iteration /
//! lifetime-20 colony.

use std::fs;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evidence::Frame;
use crate::fuzzy::{InferenceOptions, LinguisticVariable, TrapezoidalSet};
use crate::market::{Factor, ReturnWeighting, SemivarianceDivisor};
use crate::portfolio::{AcoParams, MuSMode, PortfolioParams};
use crate::rules::{BpaTable, Favourability, FavourabilityThresholds};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub factors: Option<PathBuf>,
    pub returns: Option<PathBuf>,
    /// Defaults to `<output_dir>/rulebase.json`.
    pub rulebase: Option<PathBuf>,
    /// Pre-computed asset moments (`rank,stock,return,variance,skewness,semivariance`);
    /// when set, `optimize` and `evaluate` skip the ranking and returns files.
    pub assets: Option<PathBuf>,
    pub output_dir: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Paths {
            factors: None,
            returns: None,
            rulebase: None,
            assets: None,
            output_dir: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct YearSpan {
    pub start: i32,
    pub end: i32,
}

impl YearSpan {
    pub fn range(&self) -> RangeInclusive<i32> {
        self.start..=self.end
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReturnOptions {
    pub semivariance_divisor: SemivarianceDivisor,
    pub weighting: ReturnWeighting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub paths: Paths,
    /// Years whose maxima define the normalization basis (FY 2003-04 .. 2011-12).
    pub training_window: YearSpan,
    /// Year whose factors are ranked (FY 2012-13).
    pub test_year: i32,
    /// Years feeding the fuzzy returns and semivariances (FY 2008-09 .. 2012-13).
    pub returns_window: YearSpan,
    pub hypotheses: Vec<String>,
    pub inputs: Vec<LinguisticVariable>,
    pub output: LinguisticVariable,
    pub bpa: BpaTable,
    pub thresholds: FavourabilityThresholds,
    pub inference: InferenceOptions,
    pub returns: ReturnOptions,
    pub portfolio: PortfolioParams,
    pub top_k: usize,
    pub aco: AcoParams,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            paths: Paths::default(),
            training_window: YearSpan {
                start: 2003,
                end: 2011,
            },
            test_year: 2012,
            returns_window: YearSpan {
                start: 2008,
                end: 2012,
            },
            hypotheses: vec!["H_P".into(), "A_P".into(), "P_P".into()],
            inputs: default_inputs(),
            output: default_output(),
            bpa: BpaTable::default(),
            thresholds: FavourabilityThresholds::default(),
            inference: InferenceOptions::default(),
            returns: ReturnOptions::default(),
            portfolio: PortfolioParams {
                mu_s: MuSMode::Fixed(0.0016),
                ..PortfolioParams::default()
            },
            top_k: 10,
            aco: AcoParams::default(),
        }
    }
}

fn trap(label: &str, p: [f64; 4]) -> TrapezoidalSet {
    TrapezoidalSet::new(label, p[0], p[1], p[2], p[3]).expect("static set is valid")
}

fn input(name: &str, low: [f64; 4], standard: [f64; 4], high: [f64; 4]) -> LinguisticVariable {
    LinguisticVariable::new(
        name,
        [0.0, 10.0],
        vec![trap("Low", low), trap("Standard", standard), trap("High", high)],
    )
    .expect("static variable is valid")
}

/// P/E, P/B, P/S and LTDER on `[0, 10]`.
pub fn default_inputs() -> Vec<LinguisticVariable> {
    vec![
        input("pe", [0.0, 0.0, 1.8, 2.8], [1.7, 3.5, 4.6, 5.8], [5.3, 7.5, 10.0, 10.0]),
        input("pb", [0.0, 0.0, 2.2, 3.5], [2.5, 4.6, 5.6, 7.9], [6.4, 9.6, 10.0, 10.0]),
        input("ps", [0.0, 0.0, 2.4, 3.6], [1.8, 4.4, 5.7, 8.2], [6.4, 8.7, 10.0, 10.0]),
        input("ltder", [0.0, 0.0, 2.3, 3.6], [2.8, 4.6, 5.7, 7.6], [6.124, 8.09, 10.0, 10.0]),
    ]
}

/// Selection on `[0, 1]`.
pub fn default_output() -> LinguisticVariable {
    LinguisticVariable::new(
        "selection",
        [0.0, 1.0],
        vec![
            trap("Not Favourable", [0.0, 0.0, 0.172, 0.448]),
            trap("Moderately Favourable", [0.34, 0.46, 0.57, 0.75]),
            trap("Highly Favourable", [0.64, 0.88, 1.0, 1.0]),
        ],
    )
    .expect("static variable is valid")
}

fn field<T>(path: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Config(m) => Error::Config(format!("{path}: {m}")),
        Error::Domain(m) => Error::Config(format!("{path}: {m}")),
        other => Error::Config(format!("{path}: {other}")),
    })
}

impl RunConfig {
    /// Reads a JSON config; relative paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: RunConfig = serde_json::from_str(&text).map_err(|e| Error::Json {
            path: path.to_path_buf(),
            source: e,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        let paths = &mut self.paths;
        for p in [
            &mut paths.factors,
            &mut paths.returns,
            &mut paths.rulebase,
            &mut paths.assets,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
        fix(&mut paths.output_dir);
    }

    pub fn frame(&self) -> Result<Frame> {
        field("hypotheses", Frame::new(self.hypotheses.iter().cloned()))
    }

    pub fn rulebase_path(&self) -> PathBuf {
        self.paths
            .rulebase
            .clone()
            .unwrap_or_else(|| self.paths.output_dir.join("rulebase.json"))
    }

    pub fn validate(&self) -> Result<()> {
        let frame = self.frame()?;
        if self.inputs.len() != Factor::ALL.len() {
            return Err(Error::Config(format!(
                "inputs: expected {} variables (pe, pb, ps, ltder), got {}",
                Factor::ALL.len(),
                self.inputs.len()
            )));
        }
        for (i, (var, factor)) in self.inputs.iter().zip(Factor::ALL).enumerate() {
            field(&format!("inputs[{i}]"), var.validate())?;
            if var.name != factor.column() {
                return Err(Error::Config(format!(
                    "inputs[{i}].name: expected `{}`, got `{}`",
                    factor.column(),
                    var.name
                )));
            }
        }
        field("output", self.output.validate())?;
        for f in Favourability::ALL {
            if self.output.set_index(f.label()).is_none() {
                return Err(Error::Config(format!(
                    "output.sets: missing `{}`",
                    f.label()
                )));
            }
        }
        field("bpa", self.bpa.validate(&self.inputs, &frame))?;
        field("thresholds", self.thresholds.validate())?;
        if self.inference.resolution < 2 {
            return Err(Error::Config("inference.resolution: must be at least 2".into()));
        }
        for (name, span) in [
            ("training_window", self.training_window),
            ("returns_window", self.returns_window),
        ] {
            if span.start > span.end {
                return Err(Error::Config(format!("{name}: start after end")));
            }
        }
        let p = &self.portfolio;
        if !(p.max_weight > 0.0 && p.max_weight <= 1.0) {
            return Err(Error::Config("portfolio.max_weight: must lie in (0, 1]".into()));
        }
        for (name, v) in [
            ("risk_free", p.risk_free),
            ("alpha", p.alpha),
            ("beta", p.beta),
            ("gamma", p.gamma),
        ] {
            if !v.is_finite() {
                return Err(Error::Config(format!("portfolio.{name}: must be finite")));
            }
        }
        if self.top_k == 0 {
            return Err(Error::Config("top_k: must be at least 1".into()));
        }
        self.aco.validate()
    }
}
