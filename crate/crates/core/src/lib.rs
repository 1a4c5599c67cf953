//! Stock selection with Dempster-Shafer evidence and Mamdani inference, and
//! fuzzy mean-variance-skewness allocation solved by an ant colony.

pub mod config;
pub mod error;
pub mod evidence;
pub mod fuzzy;
pub mod market;
pub mod moments;
pub mod pipeline;
pub mod portfolio;
pub mod rules;

pub use config::RunConfig;
pub use error::{Error, Result};
pub use evidence::{FocalSet, Frame, MassFunction};
pub use fuzzy::{FuzzyRule, InferenceEngine, InferenceOptions, LinguisticVariable, TrapezoidalSet};
pub use market::{Dataset, Factor, StockRecord};
pub use moments::TriangularFuzzyNumber;
pub use portfolio::{
    solve_aco, AcoOutcome, AcoParams, Asset, MuSMode, PortfolioCandidate, PortfolioParams,
    PortfolioProblem, Violation,
};
pub use rules::{BpaTable, Favourability, FavourabilityThresholds, RuleBase, RuleInducer};
