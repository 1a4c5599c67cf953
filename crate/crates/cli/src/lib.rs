//! `dsfolio` command-line driver.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dsfolio::pipeline;
use dsfolio::{solve_aco, Error, RuleBase, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "dsfolio", version, about = "Fuzzy stock ranking and ant-colony portfolio allocation")]
pub struct Cli {
    /// JSON run configuration; built-in defaults when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory, overriding `paths.output_dir`.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// RNG seed for the colony; required by `optimize`.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Clamp out-of-range inputs to the variable range instead of excluding the stock.
    #[arg(long, global = true)]
    pub clamp_inputs: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Induce the rule base; writes rulebase.json and rules.txt.
    Rules,
    /// Score and rank every stock; writes ranking.csv and rank_report.txt.
    Rank,
    /// Allocate the top-ranked stocks; writes allocation.csv, convergence.csv and summary.txt.
    Optimize,
    /// Report metrics and feasibility for a weights file.
    Evaluate {
        #[arg(long, value_name = "PATH")]
        weights: PathBuf,
    },
}

pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_INFEASIBLE: u8 = 2;
pub const EXIT_IO: u8 = 3;

pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Infeasible(_) => EXIT_INFEASIBLE,
        Error::Io { .. } => EXIT_IO,
        _ => EXIT_CONFIG,
    }
}

pub fn load_config(cli: &Cli) -> Result<RunConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => {
            let mut cfg = RunConfig::default();
            cfg.resolve_paths(Path::new("."));
            cfg
        }
    };
    if let Some(out) = &cli.out {
        cfg.paths.output_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.aco.seed = seed;
    }
    if cli.clamp_inputs {
        cfg.inference.clamp_inputs = true;
    }
    Ok(cfg)
}

fn write(path: &Path, contents: &str) -> Result<(), Error> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn cmd_rules(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), Error> {
    let base = pipeline::induce_rulebase(cfg)?;
    let json = base.to_json()?;
    let path = cfg.rulebase_path();
    write(&path, &json)?;
    let listing = base.listing(&cfg.inputs);
    write(&cfg.paths.output_dir.join("rules.txt"), &listing)?;
    let _ = writeln!(out, "{} rules written to {}", base.rules.len(), path.display());
    Ok(())
}

fn cmd_rank(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Error> {
    let base = RuleBase::import(&cfg.rulebase_path())?;
    let engine = pipeline::engine(cfg, &base)?;
    let data = pipeline::load_dataset(cfg)?;
    let ranking = pipeline::rank_stocks(cfg, &engine, &data);
    let mut report = pipeline::ranking_report(&ranking);
    for w in data.negative_factor_warnings() {
        report.push_str(&format!("warning: {} {}: {}\n", w.stock, w.year, w.message));
    }
    let dir = &cfg.paths.output_dir;
    write(&dir.join("ranking.csv"), &pipeline::ranking_csv(&ranking))?;
    write(&dir.join("rank_report.txt"), &report)?;
    for x in &ranking.excluded {
        let _ = writeln!(err, "warning: {} excluded: {}", x.stock, x.reason);
    }
    let _ = writeln!(
        out,
        "{} stocks ranked, {} excluded",
        ranking.entries.len(),
        ranking.excluded.len()
    );
    Ok(())
}

fn cmd_optimize(cfg: &RunConfig, seeded: bool, out: &mut dyn Write) -> Result<(), Error> {
    if !seeded {
        return Err(Error::Config("optimize requires --seed N".into()));
    }
    let dir = &cfg.paths.output_dir;
    let assets = pipeline::allocation_assets(cfg, &dir.join("ranking.csv"))?;
    let problem = pipeline::problem(cfg, assets)?;
    if !problem.cap_admits_simplex() {
        return Err(Error::Infeasible(format!(
            "weight cap: {} assets × M = {} cannot sum to 1",
            problem.len(),
            problem.params().max_weight
        )));
    }
    let outcome = solve_aco(&problem, &cfg.aco)?;
    let mut summary = pipeline::metrics_report(&problem, &outcome.best);
    summary.push_str(&format!("seed = {}\n", cfg.aco.seed));
    write(&dir.join("allocation.csv"), &pipeline::allocation_csv(&problem, &outcome.best))?;
    write(&dir.join("convergence.csv"), &pipeline::convergence_csv(&outcome.trace))?;
    write(&dir.join("summary.txt"), &summary)?;
    let _ = out.write_all(summary.as_bytes());
    Ok(())
}

fn cmd_evaluate(cfg: &RunConfig, weights: &Path, out: &mut dyn Write) -> Result<(), Error> {
    let rows = pipeline::read_weights(weights)?;
    let assets = pipeline::allocation_assets(cfg, &cfg.paths.output_dir.join("ranking.csv"))?;
    let problem = pipeline::problem(cfg, assets)?;
    let w = pipeline::ranked_weights(&problem, &rows)?;
    let candidate = problem.evaluate(&w)?;
    let _ = out.write_all(pipeline::metrics_report(&problem, &candidate).as_bytes());
    Ok(())
}

/// Runs one command, writing progress to `out` and diagnostics to `err`.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Error> {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Rules => cmd_rules(&cfg, out),
        Command::Rank => cmd_rank(&cfg, out, err),
        Command::Optimize => cmd_optimize(&cfg, cli.seed.is_some(), out),
        Command::Evaluate { weights } => cmd_evaluate(&cfg, weights, out),
    }
}

pub fn main_with(cli: Cli) -> ExitCode {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    match run(&cli, &mut stdout.lock(), &mut stderr.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
