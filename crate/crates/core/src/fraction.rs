//! Intervals, sample grids and partial fractions `r(x) = Σ c_i / (x + b_i)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A positive interval `[lo, hi]` with `0 < lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo < hi) {
            return Err(Error::invalid(format!(
                "interval requires 0 < lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Interval { lo, hi })
    }

    /// The rescaled interval `[eta, 1]`.
    pub fn rescaled(eta: f64) -> Result<Self> {
        Interval::new(eta, 1.0)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }
}

/// Strictly increasing sample points.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleGrid {
    points: Vec<f64>,
}

impl SampleGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("sample grid must not be empty"));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("sample grid contains non-finite points"));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("sample grid must be strictly increasing"));
        }
        Ok(SampleGrid { points })
    }

    /// `count` points equispaced in log scale between the interval endpoints,
    /// both endpoints included exactly.
    pub fn geometric(interval: Interval, count: usize) -> Result<Self> {
        geometric_points(interval.lo, interval.hi, count).map(|points| SampleGrid { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.points[0]
    }

    pub fn max(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    pub fn within(&self, interval: &Interval) -> bool {
        interval.contains(self.min()) && interval.contains(self.max())
    }
}

/// Geometric grid on an interval. Shorthand for [`SampleGrid::geometric`].
pub fn geometric_grid(interval: Interval, count: usize) -> Result<SampleGrid> {
    SampleGrid::geometric(interval, count)
}

pub(crate) fn geometric_points(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if count < 2 {
        return Err(Error::invalid(format!(
            "geometric grid needs at least 2 points, got {count}"
        )));
    }
    if !(lo > 0.0 && lo < hi) {
        return Err(Error::invalid(format!(
            "geometric grid needs 0 < lo < hi, got [{lo}, {hi}]"
        )));
    }
    let ratio = hi / lo;
    let last = (count - 1) as f64;
    let mut points: Vec<f64> = (0..count)
        .map(|k| lo * ratio.powf(k as f64 / last))
        .collect();
    points[0] = lo;
    points[count - 1] = hi;
    Ok(points)
}

/// `r(x) = Σ c_i / (x + b_i)` with positive, distinct shifts `b_i`.
///
/// The actual poles are `-b_i`; only the shifts are stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialFraction {
    poles_b: Vec<f64>,
    residues: Vec<f64>,
}

impl PartialFraction {
    pub fn new(poles_b: Vec<f64>, residues: Vec<f64>) -> Result<Self> {
        if poles_b.len() != residues.len() {
            return Err(Error::InvariantViolation(format!(
                "{} poles but {} residues",
                poles_b.len(),
                residues.len()
            )));
        }
        if let Some(b) = poles_b.iter().find(|b| !(b.is_finite() && **b > 0.0)) {
            return Err(Error::InvariantViolation(format!(
                "pole shift b = {b} must be positive"
            )));
        }
        if let Some(c) = residues.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvariantViolation(format!("non-finite residue {c}")));
        }
        let mut sorted = poles_b.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvariantViolation(
                "pole shifts must be pairwise distinct".into(),
            ));
        }
        Ok(PartialFraction { poles_b, residues })
    }

    pub fn empty() -> Self {
        PartialFraction {
            poles_b: Vec::new(),
            residues: Vec::new(),
        }
    }

    /// Construction for callers that already guarantee the invariants.
    pub(crate) fn from_parts(poles_b: Vec<f64>, residues: Vec<f64>) -> Self {
        debug_assert_eq!(poles_b.len(), residues.len());
        PartialFraction { poles_b, residues }
    }

    pub fn poles_b(&self) -> &[f64] {
        &self.poles_b
    }

    pub fn residues(&self) -> &[f64] {
        &self.residues
    }

    pub fn len(&self) -> usize {
        self.poles_b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poles_b.is_empty()
    }

    /// Evaluate `r(x)`, failing when `x` sits exactly on a pole.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if let Some(&b) = self.poles_b.iter().find(|&&b| x + b == 0.0) {
            return Err(Error::PoleHit { x, b });
        }
        Ok(self.value(x))
    }

    /// Evaluate `r(x)` without the pole check. Any `x > 0` is safe.
    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        self.poles_b
            .iter()
            .zip(&self.residues)
            .map(|(b, c)| c / (x + b))
            .sum()
    }
}

/// Evaluate a partial fraction. Shorthand for [`PartialFraction::eval`].
pub fn pf_eval(pf: &PartialFraction, x: f64) -> Result<f64> {
    pf.eval(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn eval_examples() {
        let pf = PartialFraction::new(vec![1.0], vec![1.0]).unwrap();
        assert_eq!(pf.eval(1.0).unwrap(), 0.5);
        let pf = PartialFraction::new(vec![1.0, 2.0], vec![2.0, -1.0]).unwrap();
        assert_eq!(pf.eval(0.0).unwrap(), 1.5);
        assert_eq!(PartialFraction::empty().eval(7.0).unwrap(), 0.0);
    }

    #[test]
    fn eval_at_pole_is_an_error() {
        let pf = PartialFraction::new(vec![1.0, 2.0], vec![2.0, -1.0]).unwrap();
        assert!(matches!(pf.eval(-2.0), Err(Error::PoleHit { .. })));
    }

    #[test]
    fn invariants_are_checked() {
        assert!(PartialFraction::new(vec![-1.0], vec![1.0]).is_err());
        assert!(PartialFraction::new(vec![1.0, 1.0], vec![1.0, 2.0]).is_err());
        assert!(PartialFraction::new(vec![1.0], vec![]).is_err());
        assert!(Interval::new(0.0, 1.0).is_err());
        assert!(Interval::new(1.0, 0.5).is_err());
    }

    #[test]
    fn geometric_examples() {
        let g = geometric_grid(Interval::new(1e-2, 1.0).unwrap(), 3).unwrap();
        for (p, e) in g.points().iter().zip([0.01, 0.1, 1.0]) {
            assert!(close(*p, e, 1e-14), "{p} vs {e}");
        }
        let g = geometric_grid(Interval::new(1e-6, 1.0).unwrap(), 2).unwrap();
        assert_eq!(g.points(), &[1e-6, 1.0]);
        let g = geometric_grid(Interval::new(1e-4, 1.0).unwrap(), 5).unwrap();
        for (p, e) in g.points().iter().zip([1e-4, 1e-3, 1e-2, 1e-1, 1.0]) {
            assert!(close(*p, e, 1e-14), "{p} vs {e}");
        }
        assert!(geometric_grid(Interval::new(1e-4, 1.0).unwrap(), 1).is_err());
    }

    #[test]
    fn sample_grid_rejects_unsorted() {
        assert!(SampleGrid::new(vec![1.0, 1.0]).is_err());
        assert!(SampleGrid::new(vec![]).is_err());
        assert!(SampleGrid::new(vec![0.5, 1.0]).is_ok());
    }
}
