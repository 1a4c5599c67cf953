//! Dempster-Shafer evidence over a small frame of discernment.
//!
//! Focal elements are bitsets over hypothesis indices, so subset intersection
//! is a single `&`. Frames hold at most [`MAX_HYPOTHESES`] labels.
//!
//! The empty set never carries mass. Some presentations print `m(∅) = 1` in the
//! BPA axioms; that contradicts the sum-to-one condition for any non-trivial
//! assignment, so this module enforces `m(∅) = 0`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub const MAX_HYPOTHESES: usize = 16;

/// Masses must sum to one within this tolerance.
pub const MASS_TOLERANCE: f64 = 1e-9;

/// Combination fails once the conflict reaches `1 - CONFLICT_EPS`.
pub const CONFLICT_EPS: f64 = 1e-12;

/// Subset of a frame, encoded as a bitset over hypothesis indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FocalSet(u16);

impl FocalSet {
    pub const EMPTY: FocalSet = FocalSet(0);

    pub fn from_bits(bits: u16) -> Self {
        FocalSet(bits)
    }

    pub fn singleton(index: usize) -> Self {
        assert!(index < MAX_HYPOTHESES, "hypothesis index out of range");
        FocalSet(1 << index)
    }

    pub fn bits(self) -> u16 {
        self.0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn intersect(self, other: FocalSet) -> FocalSet {
        FocalSet(self.0 & other.0)
    }

    pub fn union(self, other: FocalSet) -> FocalSet {
        FocalSet(self.0 | other.0)
    }

    pub fn contains(self, index: usize) -> bool {
        index < MAX_HYPOTHESES && self.0 & (1 << index) != 0
    }

    pub fn indices(self) -> impl Iterator<Item = usize> {
        (0..MAX_HYPOTHESES).filter(move |&i| self.contains(i))
    }
}

/// Ordered, duplicate-free list of mutually exclusive hypotheses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    hypotheses: Vec<String>,
}

impl Frame {
    pub fn new<I, S>(hypotheses: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let hypotheses: Vec<String> = hypotheses.into_iter().map(Into::into).collect();
        if hypotheses.len() < 2 {
            return Err(Error::Domain(
                "a frame needs at least 2 hypotheses".to_string(),
            ));
        }
        if hypotheses.len() > MAX_HYPOTHESES {
            return Err(Error::Domain(format!(
                "a frame holds at most {MAX_HYPOTHESES} hypotheses, got {}",
                hypotheses.len()
            )));
        }
        for (i, h) in hypotheses.iter().enumerate() {
            if h.is_empty() {
                return Err(Error::Domain("empty hypothesis label".to_string()));
            }
            if hypotheses[..i].contains(h) {
                return Err(Error::Domain(format!("duplicate hypothesis `{h}`")));
            }
        }
        Ok(Frame { hypotheses })
    }

    /// High / average / poor performance.
    pub fn performance() -> Self {
        Frame::new(["H_P", "A_P", "P_P"]).expect("static frame is valid")
    }

    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }

    pub fn hypotheses(&self) -> &[String] {
        &self.hypotheses
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.hypotheses.iter().position(|h| h == label)
    }

    pub fn singleton(&self, label: &str) -> Result<FocalSet> {
        self.index_of(label)
            .map(FocalSet::singleton)
            .ok_or_else(|| Error::Domain(format!("unknown hypothesis `{label}`")))
    }

    /// The full set Θ.
    pub fn theta(&self) -> FocalSet {
        FocalSet(((1u32 << self.len()) - 1) as u16)
    }

    pub fn is_subset(&self, set: FocalSet) -> bool {
        set.0 & !self.theta().0 == 0
    }

    pub fn format_set(&self, set: FocalSet) -> String {
        let labels: Vec<&str> = set.indices().map(|i| self.hypotheses[i].as_str()).collect();
        format!("{{{}}}", labels.join(","))
    }
}

/// A basic probability assignment over the subsets of a frame.
#[derive(Debug, Clone, PartialEq)]
pub struct MassFunction {
    frame: Arc<Frame>,
    masses: BTreeMap<FocalSet, f64>,
}

impl MassFunction {
    /// Validates and builds a mass function. Zero entries are dropped.
    pub fn new(
        frame: Arc<Frame>,
        masses: impl IntoIterator<Item = (FocalSet, f64)>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        let mut total = 0.0;
        for (set, mass) in masses {
            if !mass.is_finite() || !(0.0..=1.0).contains(&mass) {
                return Err(Error::Domain(format!("mass {mass} outside [0, 1]")));
            }
            if !frame.is_subset(set) {
                return Err(Error::Domain(format!(
                    "focal set {:#b} is not a subset of the frame",
                    set.bits()
                )));
            }
            if mass == 0.0 {
                continue;
            }
            if set.is_empty() {
                return Err(Error::Domain(
                    "the empty set cannot carry mass".to_string(),
                ));
            }
            *map.entry(set).or_insert(0.0) += mass;
            total += mass;
        }
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::Domain(format!("masses sum to {total}, not 1")));
        }
        Ok(MassFunction { frame, masses: map })
    }

    /// All belief on Θ: total ignorance.
    pub fn vacuous(frame: Arc<Frame>) -> Self {
        let theta = frame.theta();
        MassFunction {
            frame,
            masses: BTreeMap::from([(theta, 1.0)]),
        }
    }

    /// `belief` on `hypothesis`, the remainder on Θ.
    pub fn from_single_belief(frame: Arc<Frame>, hypothesis: FocalSet, belief: f64) -> Result<Self> {
        if hypothesis.is_empty() {
            return Err(Error::Domain(
                "belief must target a non-empty hypothesis".to_string(),
            ));
        }
        if !belief.is_finite() || !(0.0..=1.0).contains(&belief) {
            return Err(Error::Domain(format!("belief {belief} outside [0, 1]")));
        }
        let theta = frame.theta();
        MassFunction::new(frame, [(hypothesis, belief), (theta, 1.0 - belief)])
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn shared_frame(&self) -> &Arc<Frame> {
        &self.frame
    }

    pub fn mass(&self, set: FocalSet) -> f64 {
        self.masses.get(&set).copied().unwrap_or(0.0)
    }

    /// Mass on the singleton named `label` (0 for unknown labels).
    pub fn mass_of(&self, label: &str) -> f64 {
        self.frame
            .singleton(label)
            .map(|s| self.mass(s))
            .unwrap_or(0.0)
    }

    pub fn mass_on_theta(&self) -> f64 {
        self.mass(self.frame.theta())
    }

    /// Focal elements in ascending bitset order.
    pub fn focal_elements(&self) -> impl Iterator<Item = (FocalSet, f64)> + '_ {
        self.masses.iter().map(|(s, m)| (*s, *m))
    }

    pub fn total(&self) -> f64 {
        self.masses.values().sum()
    }

    /// Dempster's rule. Returns the normalized combination and the conflict `k`.
    pub fn combine(&self, other: &MassFunction) -> Result<(MassFunction, f64)> {
        let (raw, conflict) = self.conjunctive(other)?;
        if conflict >= 1.0 - CONFLICT_EPS {
            return Err(Error::TotalConflict { conflict });
        }
        let norm = 1.0 - conflict;
        let masses = raw
            .into_iter()
            .filter(|(_, m)| *m > 0.0)
            .map(|(s, m)| (s, m / norm))
            .collect();
        Ok((
            MassFunction {
                frame: Arc::clone(&self.frame),
                masses,
            },
            conflict,
        ))
    }

    /// Unnormalized conjunctive combination plus the mass sent to ∅.
    pub fn conjunctive(&self, other: &MassFunction) -> Result<(BTreeMap<FocalSet, f64>, f64)> {
        if self.frame != other.frame {
            return Err(Error::FrameMismatch);
        }
        let mut raw: BTreeMap<FocalSet, f64> = BTreeMap::new();
        let mut conflict = 0.0;
        for (&y, &my) in &self.masses {
            for (&z, &mz) in &other.masses {
                let product = my * mz;
                let x = y.intersect(z);
                if x.is_empty() {
                    conflict += product;
                } else {
                    *raw.entry(x).or_insert(0.0) += product;
                }
            }
        }
        Ok((raw, conflict))
    }

    /// Left fold of [`MassFunction::combine`].
    pub fn combine_all<'a, I>(masses: I) -> Result<MassFunction>
    where
        I: IntoIterator<Item = &'a MassFunction>,
    {
        let mut iter = masses.into_iter();
        let first = iter
            .next()
            .ok_or(Error::EmptySeries("combine_all needs at least one mass function"))?;
        iter.try_fold(first.clone(), |acc, m| acc.combine(m).map(|(c, _)| c))
    }

    pub fn max_abs_diff(&self, other: &MassFunction) -> f64 {
        self.masses
            .keys()
            .chain(other.masses.keys())
            .map(|s| (self.mass(*s) - other.mass(*s)).abs())
            .fold(0.0, f64::max)
    }
}

impl fmt::Display for MassFunction {
    /// One `{H_P}:0.75` line per focal element, ascending bitset order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (set, mass)) in self.masses.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{}:{}", self.frame.format_set(*set), mass)?;
        }
        Ok(())
    }
}
