//! End-to-end stages shared by the command-line driver and the tests:
//! induce rules, rank stocks, build and solve the allocation problem, and the
//! CSV files exchanged between stages.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::fuzzy::InferenceEngine;
use crate::market::{fuzzy_return, semivariance, Dataset, Factor};
use crate::moments::TriangularFuzzyNumber;
use crate::portfolio::{Asset, MuSMode, PortfolioCandidate, PortfolioProblem, TraceRow};
use crate::rules::{RuleBase, RuleInducer};

pub fn inducer(cfg: &RunConfig) -> Result<RuleInducer> {
    RuleInducer::new(
        cfg.frame()?,
        cfg.inputs.clone(),
        cfg.bpa.clone(),
        cfg.thresholds,
    )
}

pub fn induce_rulebase(cfg: &RunConfig) -> Result<RuleBase> {
    let rules = inducer(cfg)?.induce_all()?;
    Ok(RuleBase::new(&cfg.inputs, &cfg.output, rules))
}

pub fn engine(cfg: &RunConfig, base: &RuleBase) -> Result<InferenceEngine> {
    let names: Vec<&str> = cfg.inputs.iter().map(|v| v.name.as_str()).collect();
    if base.inputs != names || base.output != cfg.output.name {
        return Err(Error::Config(format!(
            "rule base variables ({} -> {}) do not match the config ({} -> {})",
            base.inputs.join(","),
            base.output,
            names.join(","),
            cfg.output.name
        )));
    }
    InferenceEngine::new(
        cfg.inputs.clone(),
        cfg.output.clone(),
        base.rules.clone(),
        cfg.inference,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankEntry {
    pub rank: usize,
    pub stock: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Exclusion {
    pub stock: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Ranking {
    pub entries: Vec<RankEntry>,
    pub excluded: Vec<Exclusion>,
}

/// Normalized test-year factors for one stock.
pub fn test_inputs(cfg: &RunConfig, data: &Dataset, stock: &str) -> Result<[f64; 4]> {
    let rec = data
        .get(stock)
        .ok_or_else(|| Error::Domain(format!("unknown stock `{stock}`")))?;
    let raw = rec.factors.get(&cfg.test_year).ok_or_else(|| {
        Error::Domain(format!("no factors for test year {}", cfg.test_year))
    })?;
    let basis = rec.normalization_basis(&cfg.training_window.range())?;
    Ok(basis.normalize(*raw))
}

/// Scores every stock; sorted by score descending, ties alphabetical.
pub fn rank_stocks(cfg: &RunConfig, engine: &InferenceEngine, data: &Dataset) -> Ranking {
    let scored: Vec<(String, Result<f64>)> = data
        .stocks
        .keys()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|stock| {
            let score = test_inputs(cfg, data, stock).and_then(|x| engine.evaluate(&x));
            (stock.to_string(), score)
        })
        .collect();
    let mut ranking = Ranking::default();
    let mut ok = Vec::new();
    for (stock, score) in scored {
        match score {
            Ok(s) => ok.push((stock, s)),
            Err(e) => ranking.excluded.push(Exclusion {
                stock,
                reason: e.to_string(),
            }),
        }
    }
    ok.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranking.entries = ok
        .into_iter()
        .enumerate()
        .map(|(i, (stock, score))| RankEntry {
            rank: i + 1,
            stock,
            score,
        })
        .collect();
    ranking
}

pub fn ranking_csv(ranking: &Ranking) -> String {
    let mut out = String::from("rank,stock,score\n");
    for e in &ranking.entries {
        let _ = writeln!(out, "{},{},{:.4}", e.rank, csv_field(&e.stock), e.score);
    }
    out
}

pub fn ranking_report(ranking: &Ranking) -> String {
    let mut out = format!("ranked: {}\nexcluded: {}\n", ranking.entries.len(), ranking.excluded.len());
    for x in &ranking.excluded {
        let _ = writeln!(out, "warning: {} excluded: {}", x.stock, x.reason);
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn read_table(path: &Path, header: &[&str]) -> Result<Vec<(u64, Vec<String>)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let origin = path.display().to_string();
    let perr = |line, message| Error::Parse {
        path: origin.clone(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let found = reader.headers().map_err(|e| perr(1, e.to_string()))?.clone();
    if found.iter().collect::<Vec<_>>() != header {
        return Err(perr(1, format!("expected header `{}`", header.join(","))));
    }
    let mut rows = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| perr(e.position().map(|p| p.line()).unwrap_or(0), e.to_string()))?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        if row.len() != header.len() || row.iter().any(str::is_empty) {
            return Err(perr(line, format!("expected {} non-empty fields", header.len())));
        }
        rows.push((line, row.iter().map(str::to_string).collect()));
    }
    Ok(rows)
}

fn parse_num<T: std::str::FromStr>(path: &Path, line: u64, name: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Parse {
        path: path.display().to_string(),
        line,
        message: format!("invalid `{name}` value `{v}`"),
    })
}

/// Reads `rank,stock,score`, returning stocks in rank order.
pub fn read_ranking(path: &Path) -> Result<Vec<RankEntry>> {
    let mut entries = read_table(path, &["rank", "stock", "score"])?
        .into_iter()
        .map(|(line, f)| {
            Ok(RankEntry {
                rank: parse_num(path, line, "rank", &f[0])?,
                stock: f[1].clone(),
                score: parse_num(path, line, "score", &f[2])?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    entries.sort_by_key(|e| e.rank);
    Ok(entries)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightRow {
    pub rank: usize,
    pub stock: String,
    pub weight: f64,
}

/// Published weights are rounded; sums this close to one are renormalized.
pub const WEIGHT_FILE_TOLERANCE: f64 = 1e-3;

/// Reads `rank,stock,weight` and renormalizes onto the simplex.
pub fn read_weights(path: &Path) -> Result<Vec<WeightRow>> {
    let mut rows = read_table(path, &["rank", "stock", "weight"])?
        .into_iter()
        .map(|(line, f)| {
            let weight: f64 = parse_num(path, line, "weight", &f[2])?;
            if !weight.is_finite() || weight < 0.0 {
                return Err(Error::Parse {
                    path: path.display().to_string(),
                    line,
                    message: format!("weight {weight} must be non-negative"),
                });
            }
            Ok(WeightRow {
                rank: parse_num(path, line, "rank", &f[0])?,
                stock: f[1].clone(),
                weight,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if rows.is_empty() {
        return Err(Error::Config(format!("{}: no weights", path.display())));
    }
    rows.sort_by_key(|r| r.rank);
    let total: f64 = rows.iter().map(|r| r.weight).sum();
    if (total - 1.0).abs() > WEIGHT_FILE_TOLERANCE {
        return Err(Error::Config(format!(
            "{}: weights sum to {total}, expected 1 (±{WEIGHT_FILE_TOLERANCE})",
            path.display()
        )));
    }
    for r in &mut rows {
        r.weight /= total;
    }
    Ok(rows)
}

/// Reads `rank,stock,return,variance,skewness,semivariance` and rebuilds each
/// fuzzy return from its moments.
pub fn read_assets(path: &Path) -> Result<Vec<Asset>> {
    let header = ["rank", "stock", "return", "variance", "skewness", "semivariance"];
    let mut rows = read_table(path, &header)?
        .into_iter()
        .map(|(line, f)| {
            let rank: usize = parse_num(path, line, "rank", &f[0])?;
            let nums: Vec<f64> = (2..6)
                .map(|i| parse_num(path, line, header[i], &f[i]))
                .collect::<Result<_>>()?;
            let tfn = TriangularFuzzyNumber::from_moments(nums[0], nums[1], nums[2]).map_err(|e| {
                Error::Parse {
                    path: path.display().to_string(),
                    line,
                    message: e.to_string(),
                }
            })?;
            Ok((rank, Asset::new(f[1].clone(), tfn, nums[3])))
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|r| r.0);
    Ok(rows.into_iter().map(|r| r.1).collect())
}

/// Fuzzy returns and semivariances for ranked stocks over the returns window.
pub fn build_assets(cfg: &RunConfig, data: &Dataset, ranked: &[String]) -> Result<Vec<Asset>> {
    ranked
        .iter()
        .map(|stock| {
            let rec = data
                .get(stock)
                .ok_or_else(|| Error::Domain(format!("ranked stock `{stock}` has no data")))?;
            let returns = rec.return_series(&cfg.returns_window.range());
            if returns.is_empty() {
                return Err(Error::Domain(format!(
                    "`{stock}` has no returns in {}..={}",
                    cfg.returns_window.start, cfg.returns_window.end
                )));
            }
            Ok(Asset::new(
                stock.clone(),
                fuzzy_return(&returns, cfg.returns.weighting)?,
                semivariance(&returns, cfg.returns.semivariance_divisor)?,
            ))
        })
        .collect()
}

/// Assets for the allocation stage: the configured moments file when given,
/// otherwise the top-k ranked stocks with moments from the returns data.
pub fn allocation_assets(cfg: &RunConfig, ranking_path: &Path) -> Result<Vec<Asset>> {
    if let Some(path) = &cfg.paths.assets {
        let mut assets = read_assets(path)?;
        assets.truncate(cfg.top_k);
        return Ok(assets);
    }
    let ranked: Vec<String> = read_ranking(ranking_path)?
        .into_iter()
        .take(cfg.top_k)
        .map(|e| e.stock)
        .collect();
    let data = load_dataset(cfg)?;
    build_assets(cfg, &data, &ranked)
}

pub fn load_dataset(cfg: &RunConfig) -> Result<Dataset> {
    let factors = cfg
        .paths
        .factors
        .as_ref()
        .ok_or_else(|| Error::Config("paths.factors: not set".into()))?;
    let returns = cfg
        .paths
        .returns
        .as_ref()
        .ok_or_else(|| Error::Config("paths.returns: not set".into()))?;
    Dataset::load(factors, returns)
}

pub fn problem(cfg: &RunConfig, assets: Vec<Asset>) -> Result<PortfolioProblem> {
    PortfolioProblem::new(assets, cfg.portfolio)
}

pub fn allocation_csv(problem: &PortfolioProblem, candidate: &PortfolioCandidate) -> String {
    let mut out = String::from("rank,stock,weight\n");
    for (i, (a, w)) in problem.assets().iter().zip(&candidate.weights).enumerate() {
        let _ = writeln!(out, "{},{},{}", i + 1, csv_field(&a.name), w);
    }
    out
}

pub fn convergence_csv(trace: &[TraceRow]) -> String {
    let mut out = String::from("iteration,best_objective,winner_node,ants_at_winner\n");
    for r in trace {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.iteration, r.best_objective, r.winner_node, r.ants_at_winner
        );
    }
    out
}

/// Metrics block shared by the optimize summary and the evaluate report.
pub fn metrics_report(problem: &PortfolioProblem, candidate: &PortfolioCandidate) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "r_p = {:.6}", candidate.r_p);
    let _ = writeln!(out, "v_p = {:.6}", candidate.v_p);
    match candidate.s_p {
        Some(s) => {
            let _ = writeln!(out, "s_p = {s:.6}");
        }
        None => out.push_str("s_p = undefined\n"),
    }
    let computed = problem.mu_s_computed(&candidate.weights);
    let _ = writeln!(out, "mu_s = {:.6}", candidate.mu_s);
    let _ = writeln!(out, "mu_s_computed = {computed:.6}");
    if let MuSMode::Fixed(v) = problem.params().mu_s {
        let _ = writeln!(out, "mu_s_fixed = {v:.6}");
    }
    let _ = writeln!(out, "objective = {:.6}", candidate.objective);
    if computed > 0.0 {
        let r_f = problem.params().risk_free;
        let _ = writeln!(out, "objective_computed = {:.6}", (candidate.r_p - r_f) / computed);
    }
    if candidate.is_feasible() {
        out.push_str("feasible = true\n");
    } else {
        out.push_str("feasible = false\n");
        for v in &candidate.violations {
            let _ = writeln!(out, "violation: {v}");
        }
    }
    out
}

pub fn ranked_weights(problem: &PortfolioProblem, rows: &[WeightRow]) -> Result<Vec<f64>> {
    if rows.len() != problem.len() {
        return Err(Error::Config(format!(
            "weights file has {} rows, portfolio has {} assets",
            rows.len(),
            problem.len()
        )));
    }
    for (row, asset) in rows.iter().zip(problem.assets()) {
        if row.stock != asset.name {
            return Err(Error::Config(format!(
                "weights row {} names `{}`, expected `{}`",
                row.rank, row.stock, asset.name
            )));
        }
    }
    Ok(rows.iter().map(|r| r.weight).collect())
}

/// Factor columns in input order, for diagnostics.
pub fn factor_columns() -> [&'static str; 4] {
    Factor::ALL.map(Factor::column)
}
