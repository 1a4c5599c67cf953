//! Historical factor and return data: CSV ingestion, per-stock normalization
//! to `[0, 10]`, return statistics and triangular fuzzy returns.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::ops::RangeInclusive;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moments::TriangularFuzzyNumber;

/// Normalized values span `[0, NORMALIZED_MAX]`.
pub const NORMALIZED_MAX: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Factor {
    Pe,
    Pb,
    Ps,
    Ltder,
}

impl Factor {
    pub const ALL: [Factor; 4] = [Factor::Pe, Factor::Pb, Factor::Ps, Factor::Ltder];

    pub fn column(self) -> &'static str {
        match self {
            Factor::Pe => "pe",
            Factor::Pb => "pb",
            Factor::Ps => "ps",
            Factor::Ltder => "ltder",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.column())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StockRecord {
    pub name: String,
    /// Fiscal-year start (2012 = FY 2012-13) to `[pe, pb, ps, ltder]`.
    pub factors: BTreeMap<i32, [f64; 4]>,
    pub returns: BTreeMap<i32, f64>,
}

impl StockRecord {
    pub fn factor_series(&self, factor: Factor, years: &RangeInclusive<i32>) -> Vec<f64> {
        self.factors
            .range(years.clone())
            .map(|(_, v)| v[factor.index()])
            .collect()
    }

    pub fn return_series(&self, years: &RangeInclusive<i32>) -> Vec<f64> {
        self.returns.range(years.clone()).map(|(_, r)| *r).collect()
    }

    /// Per-factor max over the window.
    pub fn normalization_basis(&self, years: &RangeInclusive<i32>) -> Result<NormalizationBasis> {
        let mut max = [f64::NEG_INFINITY; 4];
        let mut any = false;
        for (_, values) in self.factors.range(years.clone()) {
            any = true;
            for (m, v) in max.iter_mut().zip(values) {
                *m = m.max(*v);
            }
        }
        if !any {
            return Err(Error::EmptySeries("no factor data inside the training window"));
        }
        for f in Factor::ALL {
            if max[f.index()] <= 0.0 {
                return Err(Error::Normalization {
                    stock: self.name.clone(),
                    factor: f.to_string(),
                    basis: max[f.index()],
                });
            }
        }
        Ok(NormalizationBasis { max })
    }
}

/// Per-factor training-window maxima for one stock.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationBasis {
    pub max: [f64; 4],
}

impl NormalizationBasis {
    pub fn normalize(&self, values: [f64; 4]) -> [f64; 4] {
        let mut out = [0.0; 4];
        for i in 0..4 {
            out[i] = scale(values[i], self.max[i]);
        }
        out
    }
}

fn scale(value: f64, basis: f64) -> f64 {
    NORMALIZED_MAX * value / basis
}

/// `v -> 10 v / basis` for every value; `basis` must be positive.
pub fn normalize(series: &[f64], basis: f64) -> Result<Vec<f64>> {
    if !(basis.is_finite() && basis > 0.0) {
        return Err(Error::Normalization {
            stock: String::new(),
            factor: String::new(),
            basis,
        });
    }
    Ok(series.iter().map(|v| scale(*v, basis)).collect())
}

/// Two-decimal display rounding for reports.
pub fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SemivarianceDivisor {
    /// Divide by `T`.
    #[default]
    Population,
    /// Divide by `T - 1`.
    Sample,
}

pub fn mean_return(returns: &[f64]) -> Result<f64> {
    if returns.is_empty() {
        return Err(Error::EmptySeries("mean of an empty return series"));
    }
    Ok(returns.iter().sum::<f64>() / returns.len() as f64)
}

/// Below-mean semivariance, `(1/T) Σ min(r - mean, 0)^2` by default.
pub fn semivariance(returns: &[f64], divisor: SemivarianceDivisor) -> Result<f64> {
    let mean = mean_return(returns)?;
    let sum: f64 = returns
        .iter()
        .map(|r| (r - mean).min(0.0).powi(2))
        .sum();
    let n = match divisor {
        SemivarianceDivisor::Population => returns.len(),
        SemivarianceDivisor::Sample if returns.len() > 1 => returns.len() - 1,
        SemivarianceDivisor::Sample => {
            return Err(Error::EmptySeries("sample semivariance needs two returns"))
        }
    };
    Ok(sum / n as f64)
}

/// Semivariance over mean; lower is better.
pub fn sr_ratio(returns: &[f64], divisor: SemivarianceDivisor) -> Result<f64> {
    let mean = mean_return(returns)?;
    if mean.abs() <= 1e-15 {
        return Err(Error::UndefinedRatio);
    }
    Ok(semivariance(returns, divisor)? / mean)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReturnWeighting {
    /// `t_i = i`, newest observation heaviest.
    #[default]
    Positional,
    Uniform,
}

/// `(min r, Σ t_i r_i / Σ t_i, max r)` over returns ordered oldest to newest.
pub fn fuzzy_return(returns: &[f64], weighting: ReturnWeighting) -> Result<TriangularFuzzyNumber> {
    if returns.is_empty() {
        return Err(Error::EmptySeries("fuzzy return of an empty series"));
    }
    let min = returns.iter().copied().fold(f64::INFINITY, f64::min);
    let max = returns.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (num, den) = returns
        .iter()
        .enumerate()
        .fold((0.0, 0.0), |(num, den), (i, r)| {
            let t = match weighting {
                ReturnWeighting::Positional => (i + 1) as f64,
                ReturnWeighting::Uniform => 1.0,
            };
            (num + t * r, den + t)
        });
    // rounding in the weighted mean must not leave [min, max]
    let core = (num / den).clamp(min, max);
    TriangularFuzzyNumber::new(min, core, max)
}

/// Factor and return tables keyed by stock name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    pub stocks: BTreeMap<String, StockRecord>,
}

/// A non-fatal data issue found during ingestion.
#[derive(Debug, Clone, PartialEq)]
pub struct DataWarning {
    pub stock: String,
    pub year: i32,
    pub message: String,
}

impl Dataset {
    pub fn load(factors: &Path, returns: &Path) -> Result<Self> {
        let mut data = Dataset::default();
        let text = fs::read_to_string(factors).map_err(|e| Error::io(factors, e))?;
        data.read_factors(&text, &factors.display().to_string())?;
        let text = fs::read_to_string(returns).map_err(|e| Error::io(returns, e))?;
        data.read_returns(&text, &returns.display().to_string())?;
        Ok(data)
    }

    /// Parses `stock,year,pe,pb,ps,ltder`.
    pub fn read_factors(&mut self, text: &str, origin: &str) -> Result<()> {
        let header = ["stock", "year", "pe", "pb", "ps", "ltder"];
        for (line, fields) in records(text, origin, &header)? {
            let (stock, year) = key(&fields, origin, line)?;
            let mut values = [0.0; 4];
            for (i, v) in values.iter_mut().enumerate() {
                *v = number(&fields[i + 2], header[i + 2], origin, line)?;
            }
            let rec = self.entry(&stock);
            if rec.factors.insert(year, values).is_some() {
                return Err(parse_err(origin, line, format!("duplicate factors for ({stock}, {year})")));
            }
        }
        Ok(())
    }

    /// Parses `stock,year,return`.
    pub fn read_returns(&mut self, text: &str, origin: &str) -> Result<()> {
        for (line, fields) in records(text, origin, &["stock", "year", "return"])? {
            let (stock, year) = key(&fields, origin, line)?;
            let r = number(&fields[2], "return", origin, line)?;
            let rec = self.entry(&stock);
            if rec.returns.insert(year, r).is_some() {
                return Err(parse_err(origin, line, format!("duplicate return for ({stock}, {year})")));
            }
        }
        Ok(())
    }

    fn entry(&mut self, stock: &str) -> &mut StockRecord {
        self.stocks
            .entry(stock.to_string())
            .or_insert_with(|| StockRecord {
                name: stock.to_string(),
                ..Default::default()
            })
    }

    pub fn get(&self, stock: &str) -> Option<&StockRecord> {
        self.stocks.get(stock)
    }

    /// Negative factor values (e.g. P/E of loss-making firms).
    pub fn negative_factor_warnings(&self) -> Vec<DataWarning> {
        let mut out = Vec::new();
        for rec in self.stocks.values() {
            for (year, values) in &rec.factors {
                for f in Factor::ALL {
                    let v = values[f.index()];
                    if v < 0.0 {
                        out.push(DataWarning {
                            stock: rec.name.clone(),
                            year: *year,
                            message: format!("negative {f} value {v}"),
                        });
                    }
                }
            }
        }
        out
    }
}

fn parse_err(origin: &str, line: u64, message: String) -> Error {
    Error::Parse {
        path: origin.to_string(),
        line,
        message,
    }
}

fn records(text: &str, origin: &str, header: &[&str]) -> Result<Vec<(u64, Vec<String>)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let found = reader
        .headers()
        .map_err(|e| parse_err(origin, 1, e.to_string()))?
        .clone();
    if found.iter().collect::<Vec<_>>() != header {
        return Err(parse_err(
            origin,
            1,
            format!("expected header `{}`", header.join(",")),
        ));
    }
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_err(origin, line, e.to_string())
        })?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        if row.len() == 1 && row.get(0) == Some("") {
            continue;
        }
        if row.len() != header.len() {
            return Err(parse_err(
                origin,
                line,
                format!("expected {} fields, found {}", header.len(), row.len()),
            ));
        }
        for (i, field) in row.iter().enumerate() {
            if field.is_empty() {
                return Err(parse_err(origin, line, format!("missing field `{}`", header[i])));
            }
        }
        out.push((line, row.iter().map(str::to_string).collect()));
    }
    Ok(out)
}

fn key(fields: &[String], origin: &str, line: u64) -> Result<(String, i32)> {
    let year = fields[1]
        .parse::<i32>()
        .map_err(|_| parse_err(origin, line, format!("invalid year `{}`", fields[1])))?;
    Ok((fields[0].clone(), year))
}

fn number(field: &str, name: &str, origin: &str, line: u64) -> Result<f64> {
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(parse_err(origin, line, format!("invalid `{name}` value `{field}`"))),
    }
}
