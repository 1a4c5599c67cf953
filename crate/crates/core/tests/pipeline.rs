use std::fs;
use std::path::PathBuf;

use dsfolio::market::Dataset;
use dsfolio::pipeline;
use dsfolio::portfolio::{MuSMode, PortfolioProblem};
use dsfolio::{Error, RunConfig};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn synthetic() -> Dataset {
    let mut factors = String::from("stock,year,pe,pb,ps,ltder\n");
    // identical histories; the test year decides
    for stock in ["Beta", "Alpha", "Strong", "Weak"] {
        for year in 2003..=2011 {
            factors.push_str(&format!("{stock},{year},10,10,10,10\n"));
        }
    }
    // Strong fully fires the all-H_P rule, Weak the Low/Low/Low/High rule
    factors.push_str("Beta,2012,4,5,5,5\nAlpha,2012,4,5,5,5\n");
    factors.push_str("Strong,2012,4,10,10,1\n");
    factors.push_str("Weak,2012,0.5,1,1,9\n");
    let mut data = Dataset::default();
    data.read_factors(&factors, "synthetic").unwrap();
    data
}

#[test]
fn ranking_orders_scores_and_breaks_ties_alphabetically() {
    let cfg = RunConfig::default();
    let base = pipeline::induce_rulebase(&cfg).unwrap();
    let engine = pipeline::engine(&cfg, &base).unwrap();
    let ranking = pipeline::rank_stocks(&cfg, &engine, &synthetic());
    let order: Vec<&str> = ranking.entries.iter().map(|e| e.stock.as_str()).collect();
    assert_eq!(order.first(), Some(&"Strong"));
    assert_eq!(order.last(), Some(&"Weak"));
    let alpha = order.iter().position(|s| *s == "Alpha").unwrap();
    assert_eq!(order[alpha + 1], "Beta");
    assert_eq!(ranking.entries[alpha].score, ranking.entries[alpha + 1].score);
    for e in &ranking.entries {
        assert!((0.0..=1.0).contains(&e.score));
    }
    let csv = pipeline::ranking_csv(&ranking);
    assert!(csv.starts_with("rank,stock,score\n1,Strong,"));
}

#[test]
fn out_of_range_test_year_is_excluded_unless_clamped() {
    let mut cfg = RunConfig::default();
    let mut data = synthetic();
    let mut text = String::from("stock,year,pe,pb,ps,ltder\n");
    for year in 2003..=2011 {
        text.push_str(&format!("Over,{year},10,10,10,10\n"));
    }
    text.push_str("Over,2012,4,11,5,5\n");
    data.read_factors(&text, "x").unwrap();
    let base = pipeline::induce_rulebase(&cfg).unwrap();
    let engine = pipeline::engine(&cfg, &base).unwrap();
    let ranking = pipeline::rank_stocks(&cfg, &engine, &data);
    assert_eq!(ranking.excluded.len(), 1);
    assert_eq!(ranking.excluded[0].stock, "Over");
    assert!(pipeline::ranking_report(&ranking).contains("warning: Over excluded"));

    cfg.inference.clamp_inputs = true;
    let engine = pipeline::engine(&cfg, &base).unwrap();
    let ranking = pipeline::rank_stocks(&cfg, &engine, &data);
    assert!(ranking.excluded.is_empty());
    assert_eq!(ranking.entries.len(), 5);
}

#[test]
fn weights_file_validation() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.csv");
    fs::write(&path, "rank,stock,weight\n1,A,0.5\n2,B,0.4\n").unwrap();
    assert!(matches!(pipeline::read_weights(&path), Err(Error::Config(_))));
    fs::write(&path, "rank,stock,weight\n1,A,0.6\n2,B,0.3998\n").unwrap();
    let rows = pipeline::read_weights(&path).unwrap();
    let total: f64 = rows.iter().map(|r| r.weight).sum();
    assert!((total - 1.0).abs() < 1e-15);
    fs::write(&path, "rank,stock,w\n1,A,1\n").unwrap();
    assert!(matches!(pipeline::read_weights(&path), Err(Error::Parse { .. })));
}

#[test]
fn uniform_weights_match_hand_computation() {
    let assets = pipeline::read_assets(&data("reference_assets.csv")).unwrap();
    let cfg = RunConfig::default();
    let problem = PortfolioProblem::new(assets.clone(), cfg.portfolio).unwrap();
    let w = vec![0.1; 10];
    let c = problem.evaluate(&w).unwrap();
    let mean: f64 = assets.iter().map(|a| a.expected_return()).sum::<f64>() / 10.0;
    let semi: f64 = assets.iter().map(|a| a.semivariance).sum::<f64>() / 10.0;
    assert!((c.r_p - mean).abs() < 1e-12);
    assert!((problem.mu_s_computed(&w) - semi).abs() < 1e-12);
    assert_eq!(c.mu_s, 0.0016);
    assert!((c.objective - (mean - 0.01) / 0.0016).abs() < 1e-9);
    // reconstructed triangles reproduce the tabulated moments
    for (a, e) in assets.iter().zip([0.1443, 0.0529, 0.2801]) {
        assert!((a.fuzzy_return.mean() - e).abs() < 1e-12);
    }
}

#[test]
fn objective_is_continuous_on_reference_assets() {
    let assets = pipeline::read_assets(&data("reference_assets.csv")).unwrap();
    let rows = pipeline::read_weights(&data("reference_weights.csv")).unwrap();
    let mut params = RunConfig::default().portfolio;
    for mode in [MuSMode::Fixed(0.0016), MuSMode::Computed] {
        params.mu_s = mode;
        let problem = PortfolioProblem::new(assets.clone(), params).unwrap();
        let w = pipeline::ranked_weights(&problem, &rows).unwrap();
        let base = problem.evaluate(&w).unwrap().objective;
        let mut moved = w.clone();
        moved[0] += 1e-6;
        moved[1] -= 1e-6;
        let shifted = problem.evaluate(&moved).unwrap().objective;
        assert!((shifted - base).abs() < 1e-2, "{mode:?}: {base} -> {shifted}");
    }
}

#[test]
fn assets_from_returns_window() {
    let cfg = RunConfig::load(&data("sample/config.json")).unwrap();
    let data = pipeline::load_dataset(&cfg).unwrap();
    let assets = pipeline::build_assets(&cfg, &data, &["STK01".into(), "STK02".into()]).unwrap();
    assert_eq!(assets.len(), 2);
    for a in &assets {
        let t = a.fuzzy_return;
        assert!(t.a() <= t.b() && t.b() <= t.c());
        assert!(a.semivariance >= 0.0);
    }
    assert!(pipeline::build_assets(&cfg, &data, &["NOPE".into()]).is_err());
}
