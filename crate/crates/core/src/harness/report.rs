use serde::{Deserialize, Serialize};

use super::fit::Exclusion;

/// One evaluation of both sides of an inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalitySample {
    pub t: f64,
    /// Spatial probe for pointwise inequalities.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
}

impl InequalitySample {
    pub fn new(t: f64, lhs: f64, rhs: f64) -> Self {
        Self { t, x: None, lhs, rhs }
    }

    pub fn at(t: f64, x: f64, lhs: f64, rhs: f64) -> Self {
        Self { t, x: Some(x), lhs, rhs }
    }

    /// `lhs / rhs`, with `0 / 0 = 0`.
    pub fn ratio(&self) -> f64 {
        if self.lhs == 0.0 {
            0.0
        } else if self.rhs == 0.0 {
            f64::INFINITY
        } else {
            self.lhs / self.rhs
        }
    }
}

/// What the ratio `lhs / rhs` is held to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RatioBound {
    /// The inequality comes with a constant: `max ratio <= bound + tolerance`.
    Explicit { bound: f64 },
    /// Only existence of a constant is claimed. The empirical constant is the
    /// largest ratio; it must be finite and the positive ratios may spread by
    /// at most `max_spread` (max / min).
    Empirical { max_spread: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub name: String,
    /// The statement being checked, in words.
    pub anchor: String,
    pub samples: Vec<InequalitySample>,
    pub excluded: Vec<Exclusion>,
    pub max_ratio: f64,
    /// Smallest positive ratio, 0 when there is none.
    pub min_positive_ratio: f64,
    pub bound: RatioBound,
    pub tolerance: f64,
    pub pass: bool,
}

impl InequalityReport {
    pub fn new(
        name: &str,
        anchor: &str,
        samples: Vec<InequalitySample>,
        excluded: Vec<Exclusion>,
        bound: RatioBound,
        tolerance: f64,
    ) -> Self {
        let ratios: Vec<f64> = samples.iter().map(InequalitySample::ratio).collect();
        let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
        let min_positive_ratio = ratios.iter().copied().filter(|r| *r > 0.0).fold(f64::INFINITY, f64::min);
        let min_positive_ratio = if min_positive_ratio.is_finite() { min_positive_ratio } else { 0.0 };
        let finite = ratios.iter().all(|r| r.is_finite());
        let pass = finite
            && match bound {
                RatioBound::Explicit { bound } => max_ratio <= bound + tolerance,
                RatioBound::Empirical { max_spread } => {
                    min_positive_ratio == 0.0 || max_ratio <= max_spread * min_positive_ratio * (1.0 + tolerance)
                }
            };
        Self {
            name: name.to_string(),
            anchor: anchor.to_string(),
            samples,
            excluded,
            max_ratio,
            min_positive_ratio,
            bound,
            tolerance,
            pass,
        }
    }

    /// `max / min` of the positive ratios; 1 when there are none.
    pub fn spread(&self) -> f64 {
        if self.min_positive_ratio == 0.0 {
            1.0
        } else {
            self.max_ratio / self.min_positive_ratio
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn explicit_bound_with_tolerance() {
        let s = vec![InequalitySample::new(1.0, 1.0, 2.0), InequalitySample::new(2.0, 2.0, 2.0)];
        let r = InequalityReport::new("t", "a", s.clone(), vec![], RatioBound::Explicit { bound: 1.0 }, 1e-6);
        assert!(r.pass);
        assert_eq!(r.max_ratio, 1.0);
        let r = InequalityReport::new("t", "a", s, vec![], RatioBound::Explicit { bound: 0.9 }, 1e-6);
        assert!(!r.pass);
    }

    #[test]
    fn zero_over_zero_is_zero_and_passes() {
        let s = vec![InequalitySample::new(1.0, 0.0, 0.0); 3];
        let r = InequalityReport::new("t", "a", s, vec![], RatioBound::Empirical { max_spread: 2.0 }, 0.0);
        assert!(r.pass);
        assert_eq!(r.max_ratio, 0.0);
        assert_eq!(r.spread(), 1.0);
    }

    #[test]
    fn empirical_bound_checks_spread_and_finiteness() {
        let s = vec![InequalitySample::new(1.0, 1.0, 1.0), InequalitySample::new(2.0, 3.0, 1.0)];
        let r = InequalityReport::new("t", "a", s, vec![], RatioBound::Empirical { max_spread: 2.0 }, 0.0);
        assert!(!r.pass);
        assert_eq!(r.spread(), 3.0);
        let s = vec![InequalitySample::new(1.0, 1.0, 0.0)];
        let r = InequalityReport::new("t", "a", s, vec![], RatioBound::Empirical { max_spread: 2.0 }, 0.0);
        assert!(!r.pass);
    }
}
