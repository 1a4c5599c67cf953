//! Triangular fuzzy numbers and their possibilistic moments.
//!
//! For `A = (a, b, c)`:
//!
//! ```text
//! E(A)    = (a + 4b + c) / 6
//! Var(A)  = (a² + b² + c² - ab - bc - ca) / 18
//! Skew(A) = [19(a³ + c³) - 8b³ - 42b(a² + c²) + 12b²(a + c)
//!            - 15(a²c + ac²) + 60abc] / [10√2 (a² + b² + c² - ab - bc - ca)^{3/2}]
//! ```
//!
//! These equal level-set integrals with weight `2γ` over the γ-cuts
//! `[a + (b-a)γ, c - (c-b)γ]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriangularFuzzyNumber {
    a: f64,
    b: f64,
    c: f64,
}

impl TriangularFuzzyNumber {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) || !(a <= b && b <= c) {
            return Err(Error::Domain(format!(
                "triangular number needs finite a <= b <= c, got ({a}, {b}, {c})"
            )));
        }
        Ok(TriangularFuzzyNumber { a, b, c })
    }

    pub fn crisp(x: f64) -> Result<Self> {
        Self::new(x, x, x)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn is_degenerate(&self) -> bool {
        self.a == self.c
    }

    pub fn mean(&self) -> f64 {
        (self.a + 4.0 * self.b + self.c) / 6.0
    }

    // a² + b² + c² - ab - bc - ca, written as half the sum of squared gaps
    fn spread(&self) -> f64 {
        let (ab, bc, ca) = (self.a - self.b, self.b - self.c, self.c - self.a);
        0.5 * (ab * ab + bc * bc + ca * ca)
    }

    pub fn variance(&self) -> f64 {
        self.spread() / 18.0
    }

    /// Fails for degenerate triangles, where the denominator vanishes.
    pub fn skewness(&self) -> Result<f64> {
        if self.is_degenerate() {
            return Err(Error::UndefinedSkewness {
                a: self.a,
                b: self.b,
                c: self.c,
            });
        }
        // The ratio is translation invariant; centring on b keeps the cubic
        // terms from cancelling catastrophically for returns far from zero.
        let (a, b, c) = (self.a - self.b, 0.0, self.c - self.b);
        let num = 19.0 * (a.powi(3) + c.powi(3)) - 8.0 * b * b * b
            - 42.0 * b * (a * a + c * c)
            + 12.0 * b * b * (a + c)
            - 15.0 * (a * a * c + a * c * c)
            + 60.0 * a * b * c;
        let den = 10.0 * std::f64::consts::SQRT_2 * self.spread().sqrt().powi(3);
        Ok(num / den)
    }

    pub fn translate(&self, h: f64) -> Result<Self> {
        Self::new(self.a + h, self.b + h, self.c + h)
    }

    /// Rebuilds the triangle with the given mean, variance and skewness.
    ///
    /// Skewness depends only on the shape `p = (b - a) / (c - a)` and falls
    /// monotonically from `19 / (10√2)` at `p = 0` to its negative at `p = 1`;
    /// the shape is found by bisection, then width and offset follow from the
    /// variance and mean.
    pub fn from_moments(mean: f64, variance: f64, skewness: f64) -> Result<Self> {
        if !(mean.is_finite() && variance.is_finite() && skewness.is_finite()) || variance < 0.0 {
            return Err(Error::Domain(format!(
                "cannot rebuild a triangle from mean {mean}, variance {variance}, skewness {skewness}"
            )));
        }
        if variance == 0.0 {
            return Self::crisp(mean);
        }
        let limit = MAX_SKEWNESS;
        if skewness.abs() > limit + 1e-12 {
            return Err(Error::Domain(format!(
                "skewness {skewness} outside the triangular range ±{limit:.6}"
            )));
        }
        let shape_skew = |p: f64| {
            TriangularFuzzyNumber { a: 0.0, b: p, c: 1.0 }
                .skewness()
                .expect("unit-width triangle")
        };
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if shape_skew(mid) > skewness {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let p = 0.5 * (lo + hi);
        let width = (18.0 * variance / (p * p - p + 1.0)).sqrt();
        let a = mean - width * (4.0 * p + 1.0) / 6.0;
        Self::new(a, a + p * width, a + width)
    }
}

/// Skewness of the right-angled triangle `(0, 0, 1)`.
pub const MAX_SKEWNESS: f64 = 19.0 / (10.0 * std::f64::consts::SQRT_2);

/// `(Σ w a, Σ w b, Σ w c)` for non-negative weights.
pub fn weighted_sum<'a, I>(terms: I) -> Result<TriangularFuzzyNumber>
where
    I: IntoIterator<Item = (f64, &'a TriangularFuzzyNumber)>,
{
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    let mut any = false;
    for (w, t) in terms {
        if !(w.is_finite() && w >= 0.0) {
            return Err(Error::Domain(format!("negative or invalid weight {w}")));
        }
        a += w * t.a;
        b += w * t.b;
        c += w * t.c;
        any = true;
    }
    if !any {
        return Err(Error::EmptySeries("weighted sum of no terms"));
    }
    // keep a <= b <= c under rounding
    let b = b.clamp(a, c.max(a));
    TriangularFuzzyNumber::new(a, b, c.max(b))
}
