#![allow(dead_code)]

use std::sync::Arc;

use dsfolio::evidence::{FocalSet, Frame, MassFunction};
use dsfolio::fuzzy::{InferenceEngine, InferenceOptions, LinguisticVariable, TrapezoidalSet};
use dsfolio::market::{fuzzy_return, normalize, semivariance, ReturnWeighting, SemivarianceDivisor};
use dsfolio::moments::{weighted_sum, TriangularFuzzyNumber};
use dsfolio::portfolio::repair_caps;
use dsfolio::FuzzyRule;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub const CASES: u32 = 1000;

/// `(focal set bits, mass)` pairs.
pub type Parts = Vec<(u16, f64)>;

pub fn frame(n: usize) -> Arc<Frame> {
    Arc::new(Frame::new((0..n).map(|i| format!("h{i}"))).unwrap())
}

/// Mass function over a 3-hypothesis frame with some mass always left on Θ,
/// so pairwise conflict stays below one.
pub fn mass_strategy() -> impl Strategy<Value = Parts> {
    (
        prop::collection::vec((1u16..7, 0.01f64..1.0), 0..4),
        0.05f64..1.0,
    )
        .prop_map(|(mut parts, theta)| {
            parts.push((7, theta));
            let total: f64 = parts.iter().map(|p| p.1).sum();
            parts.into_iter().map(|(s, m)| (s, m / total)).collect()
        })
}

pub fn build(frame: &Arc<Frame>, parts: &[(u16, f64)]) -> MassFunction {
    MassFunction::new(
        Arc::clone(frame),
        parts.iter().map(|&(s, m)| (FocalSet::from_bits(s), m)),
    )
    .unwrap()
}

/// Triangle `(a, b, c)` with `a <= b <= c`, width at least 1e-3.
pub fn triangle_strategy() -> impl Strategy<Value = (f64, f64, f64)> {
    (-1.0f64..1.0, 1e-3f64..1.0, 0.0f64..=1.0).prop_map(|(a, w, p)| (a, a + p * w, a + w))
}

pub fn trapezoid_strategy() -> impl Strategy<Value = [f64; 4]> {
    prop::array::uniform4(0.0f64..10.0).prop_map(|mut p| {
        p.sort_by(f64::total_cmp);
        p
    })
}

pub fn prop_mass_normalization(
    (a, b): (Parts, Parts),
) -> Result<(), TestCaseError> {
    let f = frame(3);
    let (m, _) = build(&f, &a).combine(&build(&f, &b)).unwrap();
    prop_assert!((m.total() - 1.0).abs() <= 1e-9);
    prop_assert_eq!(m.mass(FocalSet::EMPTY), 0.0);
    for (_, v) in m.focal_elements() {
        prop_assert!((0.0..=1.0).contains(&v));
    }
    let (id, k) = MassFunction::vacuous(Arc::clone(&f)).combine(&build(&f, &a)).unwrap();
    prop_assert_eq!(k, 0.0);
    prop_assert!(id.max_abs_diff(&build(&f, &a)) <= 1e-15);
    Ok(())
}

pub fn prop_commutative(
    (a, b): (Parts, Parts),
) -> Result<(), TestCaseError> {
    let f = frame(3);
    let (x, y) = (build(&f, &a), build(&f, &b));
    let (ab, kab) = x.combine(&y).unwrap();
    let (ba, kba) = y.combine(&x).unwrap();
    prop_assert!(ab.max_abs_diff(&ba) <= 1e-12);
    prop_assert!((kab - kba).abs() <= 1e-12);
    // k against the unnormalized mass left off the empty set
    let (raw, k) = x.conjunctive(&y).unwrap();
    prop_assert!((k - (1.0 - raw.values().sum::<f64>())).abs() <= 1e-12);
    Ok(())
}

pub fn prop_associative(
    (a, b, c): (Parts, Parts, Parts),
) -> Result<(), TestCaseError> {
    let f = frame(3);
    let (x, y, z) = (build(&f, &a), build(&f, &b), build(&f, &c));
    let left = x.combine(&y).unwrap().0.combine(&z).unwrap().0;
    let right = x.combine(&y.combine(&z).unwrap().0).unwrap().0;
    prop_assert!(left.max_abs_diff(&right) <= 1e-9);
    Ok(())
}

pub fn prop_same_singleton(beliefs: Vec<f64>) -> Result<(), TestCaseError> {
    let f = frame(3);
    let h = FocalSet::singleton(1);
    let masses: Vec<MassFunction> = beliefs
        .iter()
        .map(|&b| MassFunction::from_single_belief(Arc::clone(&f), h, b).unwrap())
        .collect();
    let combined = MassFunction::combine_all(&masses).unwrap();
    let oracle = 1.0 - beliefs.iter().map(|b| 1.0 - b).product::<f64>();
    prop_assert!((combined.mass(h) - oracle).abs() <= 1e-12);
    Ok(())
}

pub fn prop_fuzzify_range((p, x): ([f64; 4], f64)) -> Result<(), TestCaseError> {
    let set = TrapezoidalSet::new("s", p[0], p[1], p[2], p[3]).unwrap();
    let mu = set.membership(x);
    prop_assert!((0.0..=1.0).contains(&mu));
    if (p[1]..=p[2]).contains(&x) {
        prop_assert_eq!(mu, 1.0);
    }
    if x < p[0] || x > p[3] {
        prop_assert_eq!(mu, 0.0);
    }
    let var = LinguisticVariable::new("v", [0.0, 10.0], vec![set]).unwrap();
    if var.contains(x) {
        for d in var.fuzzify(x).unwrap() {
            prop_assert!((0.0..=1.0).contains(&d));
        }
    } else {
        prop_assert!(var.fuzzify(x).is_err());
    }
    Ok(())
}

pub fn prop_fuzzy_return_ordered(returns: Vec<f64>) -> Result<(), TestCaseError> {
    for w in [ReturnWeighting::Positional, ReturnWeighting::Uniform] {
        let t = fuzzy_return(&returns, w).unwrap();
        prop_assert!(t.a() <= t.b() && t.b() <= t.c());
    }
    Ok(())
}

pub fn prop_triangle_moments((a, b, c): (f64, f64, f64)) -> Result<(), TestCaseError> {
    let t = TriangularFuzzyNumber::new(a, b, c).unwrap();
    prop_assert!(t.variance() >= 0.0);
    prop_assert!(t.mean() >= a - 1e-15 && t.mean() <= c + 1e-15);
    let s = t.skewness().unwrap();
    let mirrored = TriangularFuzzyNumber::new(-c, -b, -a).unwrap();
    prop_assert!((mirrored.skewness().unwrap() + s).abs() <= 1e-9);
    let shifted = t.translate(3.5).unwrap();
    prop_assert!((shifted.skewness().unwrap() - s).abs() <= 1e-9);
    Ok(())
}

pub fn prop_linearity(
    (terms, weights): (Vec<(f64, f64, f64)>, Vec<f64>),
) -> Result<(), TestCaseError> {
    let tris: Vec<TriangularFuzzyNumber> = terms
        .iter()
        .map(|&(a, b, c)| TriangularFuzzyNumber::new(a, b, c).unwrap())
        .collect();
    let sum = weighted_sum(weights.iter().copied().zip(&tris)).unwrap();
    let oracle: f64 = weights.iter().zip(&tris).map(|(w, t)| w * t.mean()).sum();
    prop_assert!((sum.mean() - oracle).abs() <= 1e-12);
    Ok(())
}

pub fn prop_simplex_repair((raw, cap_frac, sorted): (Vec<f64>, f64, bool)) -> Result<(), TestCaseError> {
    let n = raw.len();
    let total: f64 = raw.iter().sum();
    let mut w: Vec<f64> = raw.iter().map(|x| x / total).collect();
    if sorted {
        w.sort_by(|a, b| b.total_cmp(a));
    }
    let cap = 1.0 / n as f64 + cap_frac * (1.0 - 1.0 / n as f64);
    repair_caps(&mut w, cap);
    prop_assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
    for &x in &w {
        prop_assert!(x > 0.0 && x <= cap + 1e-12);
    }
    if sorted {
        prop_assert!(w.windows(2).all(|p| p[0] + 1e-12 >= p[1]));
    }
    Ok(())
}

pub fn prop_semivariance_shift((returns, shift): (Vec<f64>, f64)) -> Result<(), TestCaseError> {
    let d = SemivarianceDivisor::Population;
    let base = semivariance(&returns, d).unwrap();
    let moved: Vec<f64> = returns.iter().map(|r| r + shift).collect();
    prop_assert!((semivariance(&moved, d).unwrap() - base).abs() <= 1e-10);
    let mean = returns.iter().sum::<f64>() / returns.len() as f64;
    let var = returns.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / returns.len() as f64;
    prop_assert!(base <= var + 1e-12);
    Ok(())
}

pub fn prop_normalize_scale((series, lambda): (Vec<f64>, f64)) -> Result<(), TestCaseError> {
    let basis = series.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let out = normalize(&series, basis).unwrap();
    let scaled: Vec<f64> = series.iter().map(|x| x * lambda).collect();
    let out2 = normalize(&scaled, basis * lambda).unwrap();
    for (x, y) in out.iter().zip(&out2) {
        prop_assert!((x - y).abs() <= 1e-9);
        prop_assert!(*x <= 10.0 + 1e-9);
    }
    Ok(())
}

fn two_rule_engine() -> InferenceEngine {
    let input = LinguisticVariable::new(
        "x",
        [0.0, 10.0],
        vec![
            TrapezoidalSet::new("lo", 0.0, 0.0, 3.0, 6.0).unwrap(),
            TrapezoidalSet::new("hi", 4.0, 7.0, 10.0, 10.0).unwrap(),
        ],
    )
    .unwrap();
    let output = LinguisticVariable::new(
        "y",
        [0.0, 1.0],
        vec![
            TrapezoidalSet::new("bad", 0.0, 0.0, 0.2, 0.5).unwrap(),
            TrapezoidalSet::new("good", 0.4, 0.7, 1.0, 1.0).unwrap(),
        ],
    )
    .unwrap();
    InferenceEngine::new(
        vec![input],
        output,
        vec![
            FuzzyRule::new(vec!["lo".into()], "bad"),
            FuzzyRule::new(vec!["hi".into()], "good"),
        ],
        InferenceOptions::default(),
    )
    .unwrap()
}

pub fn prop_infer_monotone(
    (s0, s1, bump, which): (f64, f64, f64, usize),
) -> Result<(), TestCaseError> {
    let engine = two_rule_engine();
    let before = [s0, s1];
    let mut after = before;
    after[which] = (after[which] + bump).min(1.0);
    let (lo, hi) = (engine.aggregate(&before), engine.aggregate(&after));
    for i in 0..=200 {
        let z = i as f64 / 200.0;
        prop_assert!(hi.eval(z) >= lo.eval(z));
    }
    Ok(())
}

pub fn mass_pairs() -> impl Strategy<Value = (Parts, Parts)> {
    (mass_strategy(), mass_strategy())
}

pub fn mass_triples() -> impl Strategy<Value = (Parts, Parts, Parts)> {
    (mass_strategy(), mass_strategy(), mass_strategy())
}

pub fn beliefs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..0.99, 1..8)
}

pub fn membership_cases() -> impl Strategy<Value = ([f64; 4], f64)> {
    (trapezoid_strategy(), -1.0f64..11.0)
}

pub fn return_series() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 1..12)
}

pub fn weighted_terms() -> impl Strategy<Value = (Vec<(f64, f64, f64)>, Vec<f64>)> {
    (1usize..8).prop_flat_map(|n| {
        (
            prop::collection::vec(triangle_strategy(), n),
            prop::collection::vec(0.0f64..1.0, n),
        )
    })
}

pub fn repair_cases() -> impl Strategy<Value = (Vec<f64>, f64, bool)> {
    (prop::collection::vec(1e-3f64..10.0, 1..15), 0.0f64..=1.0, any::<bool>())
}

pub fn shift_cases() -> impl Strategy<Value = (Vec<f64>, f64)> {
    (return_series(), -5.0f64..5.0)
}

pub fn scale_cases() -> impl Strategy<Value = (Vec<f64>, f64)> {
    (prop::collection::vec(0.01f64..100.0, 1..12), 1e-3f64..1e3)
}

pub fn strength_cases() -> impl Strategy<Value = (f64, f64, f64, usize)> {
    (0.0f64..=1.0, 0.0f64..=1.0, 0.0f64..=1.0, 0usize..2)
}
