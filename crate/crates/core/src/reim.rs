//! Greedy selection of poles and interpolation points (offline), and the
//! interpolation operator `Π_n f = Σ c_i / (x + b_i)` with `G_n c = f(x)`
//! (online).
//!
//! The dictionary is the unnormalized family `g_b(x) = 1 / (x + b)`. At step
//! `m` the candidate `b` whose interpolation residual `g_b − Π_{m−1} g_b` has
//! the largest sup-norm over the candidate points is selected, and the point
//! where that residual peaks becomes the next interpolation point.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fraction::{Interval, PartialFraction, SampleGrid};
use crate::numerics::dense::{cauchy_matrix, least_squares, LuFactors};
use crate::numerics::DenseMatrix;
use crate::targets::TargetFunction;

/// Greedy iterations stop once the dictionary is resolved to this level.
pub const EARLY_STOP_ERROR: f64 = 1e-13;
/// Relative rank tolerance of the least-squares alternative.
pub const LSQ_RANK_TOL: f64 = 1e-13;

/// Per-iteration diagnostics of the greedy build.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GreedyTrace {
    /// `max_b ‖g_b − Π_{m−1} g_b‖_∞` over the candidate points, iteration m.
    pub sup_errors: Vec<f64>,
    /// Lebesgue constant of `Π_m` estimated on the candidate points.
    pub lebesgue: Vec<f64>,
}

/// Output of the greedy build: selected shifts and points plus the LU factors
/// of the Cauchy matrix `G_n = (1 / (x_i + b_j))`.
#[derive(Debug, Clone)]
pub struct ReimModel {
    interval: Interval,
    poles_b: Vec<f64>,
    interp_x: Vec<f64>,
    lu: LuFactors,
    trace: GreedyTrace,
}

impl ReimModel {
    /// Reassemble a model from stored shifts and points (e.g. after loading).
    pub fn from_selection(
        interval: Interval,
        poles_b: Vec<f64>,
        interp_x: Vec<f64>,
        trace: GreedyTrace,
    ) -> Result<Self> {
        if poles_b.len() != interp_x.len() {
            return Err(Error::InvariantViolation(format!(
                "{} poles but {} interpolation points",
                poles_b.len(),
                interp_x.len()
            )));
        }
        if poles_b.is_empty() {
            return Err(Error::InvariantViolation("model has no poles".into()));
        }
        // validates b > 0 and distinctness
        PartialFraction::new(poles_b.clone(), vec![0.0; poles_b.len()])?;
        if let Some(x) = interp_x.iter().find(|x| !interval.contains(**x)) {
            return Err(Error::InvariantViolation(format!(
                "interpolation point {x} outside [{}, {}]",
                interval.lo(),
                interval.hi()
            )));
        }
        let mut sorted = interp_x.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvariantViolation(
                "interpolation points must be distinct".into(),
            ));
        }
        let lu = LuFactors::factor(&cauchy_matrix(&poles_b, &interp_x)?)?;
        Ok(ReimModel {
            interval,
            poles_b,
            interp_x,
            lu,
            trace,
        })
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    /// Selected shifts `b_1..b_n` in selection order.
    pub fn poles_b(&self) -> &[f64] {
        &self.poles_b
    }

    /// Selected points `x_1..x_n` in selection order.
    pub fn interp_x(&self) -> &[f64] {
        &self.interp_x
    }

    pub fn trace(&self) -> &GreedyTrace {
        &self.trace
    }

    pub fn len(&self) -> usize {
        self.poles_b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poles_b.is_empty()
    }

    pub fn cauchy_matrix(&self) -> DenseMatrix {
        cauchy_matrix(&self.poles_b, &self.interp_x).expect("model invariants hold")
    }

    /// The model after the first `k` greedy steps. Greedy selections are
    /// nested, so this is exactly what a build with `n = k` returns.
    pub fn prefix(&self, k: usize) -> Result<ReimModel> {
        if k == 0 || k > self.len() {
            return Err(Error::invalid(format!(
                "prefix length {k} outside 1..={}",
                self.len()
            )));
        }
        let trace = GreedyTrace {
            sup_errors: self.trace.sup_errors.iter().take(k).copied().collect(),
            lebesgue: self.trace.lebesgue.iter().take(k).copied().collect(),
        };
        ReimModel::from_selection(
            self.interval,
            self.poles_b[..k].to_vec(),
            self.interp_x[..k].to_vec(),
            trace,
        )
    }

    /// `Π_n f`: residues from `G_n c = (f(x_1), …, f(x_n))`.
    pub fn interpolate(&self, f: impl Fn(f64) -> f64) -> Result<PartialFraction> {
        let data: Vec<f64> = self.interp_x.iter().map(|&x| f(x)).collect();
        self.interpolate_values(&data)
    }

    /// Interpolate given point values `f(x_i)` (selection order).
    pub fn interpolate_values(&self, data: &[f64]) -> Result<PartialFraction> {
        if data.len() != self.len() {
            return Err(Error::invalid(format!(
                "{} point values for a model of size {}",
                data.len(),
                self.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite interpolation data {v}")));
        }
        let residues = self.lu.solve(data);
        if residues.iter().any(|c| !c.is_finite()) {
            return Err(Error::Singular {
                pivot: 0.0,
                column: 0,
            });
        }
        Ok(PartialFraction::from_parts(self.poles_b.clone(), residues))
    }

    /// `Π_n t` for a library target, with domain checks on the model interval.
    pub fn interpolate_target(&self, t: &TargetFunction) -> Result<PartialFraction> {
        t.check_interval(&self.interval)?;
        self.interpolate(|x| t.value(x))
    }

    /// `max_x Σ_i |ψ_i(x)|` over `grid`, with `ψ_i` the cardinal functions
    /// `ψ_i(x_j) = δ_ij`.
    pub fn lebesgue_estimate(&self, grid: &SampleGrid) -> f64 {
        lebesgue_on(&self.poles_b, &self.lu.inverse(), grid.points())
    }
}

fn lebesgue_on(poles_b: &[f64], g_inv: &DenseMatrix, points: &[f64]) -> f64 {
    let n = poles_b.len();
    points
        .par_iter()
        .map(|&x| {
            let phi: Vec<f64> = poles_b.iter().map(|b| 1.0 / (x + b)).collect();
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| phi[j] * g_inv[(j, i)])
                        .sum::<f64>()
                        .abs()
                })
                .sum::<f64>()
        })
        .reduce(|| 0.0, f64::max)
}

/// Lebesgue constant estimate. Shorthand for [`ReimModel::lebesgue_estimate`].
pub fn lebesgue_estimate(model: &ReimModel, grid: &SampleGrid) -> f64 {
    model.lebesgue_estimate(grid)
}

/// Interpolate a target. Shorthand for [`ReimModel::interpolate_target`].
pub fn interpolate(model: &ReimModel, f: &TargetFunction) -> Result<PartialFraction> {
    model.interpolate_target(f)
}

/// `max_{x ∈ grid} |f(x) − r(x)|`.
pub fn sup_error(pf: &PartialFraction, f: &TargetFunction, grid: &SampleGrid) -> f64 {
    sup_error_fn(pf, |x| f.value(x), grid)
}

pub fn sup_error_fn(pf: &PartialFraction, f: impl Fn(f64) -> f64 + Sync, grid: &SampleGrid) -> f64 {
    grid.points()
        .par_iter()
        .map(|&x| (f(x) - pf.value(x)).abs())
        .reduce(|| 0.0, f64::max)
}

/// Residues minimizing `Σ_{X ∈ Σ} |f(X) − Σ c_i / (X + b_i)|²` for fixed shifts.
pub fn least_squares_fit(
    f: impl Fn(f64) -> f64,
    poles_b: &[f64],
    sigma: &SampleGrid,
) -> Result<PartialFraction> {
    if sigma.len() < poles_b.len() {
        return Err(Error::invalid(format!(
            "{} sample points cannot determine {} residues",
            sigma.len(),
            poles_b.len()
        )));
    }
    PartialFraction::new(poles_b.to_vec(), vec![0.0; poles_b.len()])?;
    let pts = sigma.points();
    let a = DenseMatrix::from_fn(pts.len(), poles_b.len(), |k, i| 1.0 / (pts[k] + poles_b[i]));
    let rhs: Vec<f64> = pts.iter().map(|&x| f(x)).collect();
    let residues = least_squares(&a, &rhs, LSQ_RANK_TOL)?;
    Ok(PartialFraction::from_parts(poles_b.to_vec(), residues))
}

/// Greedy build over dictionary shifts `dict` and candidate points `sigma`.
///
/// Ties in either argmax go to the smallest candidate value. Selected
/// candidates are excluded from later steps. Stops early once the greedy
/// dictionary error drops to [`EARLY_STOP_ERROR`].
pub fn reim_build(dict: &SampleGrid, sigma: &SampleGrid, n: usize, interval: Interval) -> Result<ReimModel> {
    if n == 0 {
        return Err(Error::invalid("number of greedy steps must be at least 1"));
    }
    if n > dict.len() || n > sigma.len() {
        return Err(Error::invalid(format!(
            "n = {n} exceeds the candidate counts (|B| = {}, |Σ| = {})",
            dict.len(),
            sigma.len()
        )));
    }
    if !(dict.min() > 0.0) {
        return Err(Error::invalid("dictionary shifts must be positive"));
    }
    if !sigma.within(&interval) {
        return Err(Error::invalid("candidate points must lie in the interval"));
    }

    let shifts = dict.points();
    let points = sigma.points();
    let mut shift_used = vec![false; shifts.len()];
    let mut point_used = vec![false; points.len()];
    let mut poles_b: Vec<f64> = Vec::with_capacity(n);
    let mut interp_x: Vec<f64> = Vec::with_capacity(n);
    let mut lu: Option<LuFactors> = None;
    let mut trace = GreedyTrace::default();

    for _ in 0..n {
        // iterate in ascending b: strict comparison keeps the smallest on ties
        let errors: Vec<f64> = shifts
            .par_iter()
            .enumerate()
            .map(|(j, &b)| {
                if shift_used[j] {
                    f64::NEG_INFINITY
                } else {
                    let coeffs = projection_coefficients(lu.as_ref(), &interp_x, b);
                    points
                        .iter()
                        .map(|&x| residual(x, b, &poles_b, &coeffs).abs())
                        .fold(0.0, f64::max)
                }
            })
            .collect();
        let (best, best_err) = argmax(&errors);
        if best_err <= EARLY_STOP_ERROR {
            break;
        }
        let b = shifts[best];
        let coeffs = projection_coefficients(lu.as_ref(), &interp_x, b);
        let res: Vec<f64> = points
            .par_iter()
            .enumerate()
            .map(|(i, &x)| {
                if point_used[i] {
                    f64::NEG_INFINITY
                } else {
                    residual(x, b, &poles_b, &coeffs).abs()
                }
            })
            .collect();
        let (best_x, _) = argmax(&res);

        shift_used[best] = true;
        point_used[best_x] = true;
        poles_b.push(b);
        interp_x.push(points[best_x]);
        let factors = LuFactors::factor(&cauchy_matrix(&poles_b, &interp_x)?)?;
        trace.sup_errors.push(best_err);
        trace
            .lebesgue
            .push(lebesgue_on(&poles_b, &factors.inverse(), points));
        lu = Some(factors);
    }

    let lu = lu.expect("first greedy step always selects");
    Ok(ReimModel {
        interval,
        poles_b,
        interp_x,
        lu,
        trace,
    })
}

/// Residues of `Π g_b` in the current basis (empty before the first step).
fn projection_coefficients(lu: Option<&LuFactors>, interp_x: &[f64], b: f64) -> Vec<f64> {
    match lu {
        None => Vec::new(),
        Some(lu) => {
            let data: Vec<f64> = interp_x.iter().map(|x| 1.0 / (x + b)).collect();
            lu.solve(&data)
        }
    }
}

#[inline]
fn residual(x: f64, b: f64, poles_b: &[f64], coeffs: &[f64]) -> f64 {
    let proj: f64 = poles_b
        .iter()
        .zip(coeffs)
        .map(|(bl, c)| c / (x + bl))
        .sum();
    1.0 / (x + b) - proj
}

/// First index of the maximum; NaN entries never win.
fn argmax(values: &[f64]) -> (usize, f64) {
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, &v) in values.iter().enumerate() {
        if v > best_val {
            best = i;
            best_val = v;
        }
    }
    (best, best_val)
}

/// Dictionary and candidate-set configuration for a greedy build.
#[derive(Debug, Clone, PartialEq)]
pub struct ReimConfig {
    pub interval: Interval,
    pub dict_lo: f64,
    pub dict_hi: f64,
    pub dict_size: usize,
    pub sigma_size: usize,
    pub n: usize,
}

impl ReimConfig {
    /// Configuration for negative powers and shifted reciprocals on `[eta, 1]`.
    ///
    /// 120 geometric shifts on `[eta/20, 1e4]` and 10⁴ geometric points.
    pub fn rescaled(eta: f64) -> Result<Self> {
        Ok(ReimConfig {
            interval: Interval::rescaled(eta)?,
            dict_lo: eta / 20.0,
            dict_hi: 1e4,
            dict_size: 120,
            sigma_size: 10_000,
            n: 30,
        })
    }

    /// Configuration for `exp(−τx)` and `φ(−τx)` on `[1, 1e6]`.
    pub fn matrix_function() -> Self {
        ReimConfig {
            interval: Interval::new(1.0, 1e6).expect("valid interval"),
            dict_lo: 0.1,
            dict_hi: 1e7,
            dict_size: 300,
            sigma_size: 10_000,
            n: 30,
        }
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn dictionary(&self) -> Result<SampleGrid> {
        SampleGrid::geometric(Interval::new(self.dict_lo, self.dict_hi)?, self.dict_size)
    }

    pub fn candidates(&self) -> Result<SampleGrid> {
        SampleGrid::geometric(self.interval, self.sigma_size)
    }

    pub fn build(&self) -> Result<ReimModel> {
        reim_build(&self.dictionary()?, &self.candidates()?, self.n, self.interval)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_model(n: usize) -> ReimModel {
        let interval = Interval::new(1e-3, 1.0).unwrap();
        let dict = SampleGrid::geometric(Interval::new(1e-4, 10.0).unwrap(), 60).unwrap();
        let sigma = SampleGrid::geometric(interval, 500).unwrap();
        reim_build(&dict, &sigma, n, interval).unwrap()
    }

    #[test]
    fn first_step_picks_smallest_shift_and_left_endpoint() {
        let m = small_model(1);
        assert_eq!(m.poles_b(), &[1e-4]);
        assert_eq!(m.interp_x(), &[1e-3]);
        // e(b_1) = 1/(η + b_1)
        assert!((m.trace().sup_errors[0] - 1.0 / (1e-3 + 1e-4)).abs() < 1e-9);
        assert!((m.trace().lebesgue[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn one_term_model_reproduces_its_element() {
        let m = small_model(1);
        let b = m.poles_b()[0];
        let pf = m.interpolate(|x| 1.0 / (x + b)).unwrap();
        assert!((pf.residues()[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn interpolating_zero_gives_zero() {
        let m = small_model(8);
        let pf = m.interpolate(|_| 0.0).unwrap();
        assert!(pf.residues().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn selected_elements_map_to_unit_vectors() {
        let m = small_model(10);
        for (j, &b) in m.poles_b().iter().enumerate() {
            let pf = m.interpolate(|x| 1.0 / (x + b)).unwrap();
            for (i, c) in pf.residues().iter().enumerate() {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((c - e).abs() < 1e-8, "element {j}, residue {i}: {c}");
            }
        }
    }

    #[test]
    fn rejects_bad_sizes() {
        let interval = Interval::new(1e-3, 1.0).unwrap();
        let dict = SampleGrid::geometric(Interval::new(1e-4, 10.0).unwrap(), 5).unwrap();
        let sigma = SampleGrid::geometric(interval, 50).unwrap();
        assert!(reim_build(&dict, &sigma, 6, interval).is_err());
        assert!(reim_build(&dict, &sigma, 0, interval).is_err());
        let outside = SampleGrid::geometric(Interval::new(1e-4, 1.0).unwrap(), 50).unwrap();
        assert!(reim_build(&dict, &outside, 3, interval).is_err());
    }

    #[test]
    fn early_stop_when_dictionary_is_resolved() {
        // two shifts only: after both are picked the dictionary is exhausted,
        // but with n > |B| rejected; use a dictionary spanned exactly
        let interval = Interval::new(0.5, 1.0).unwrap();
        let dict = SampleGrid::new(vec![1.0, 1.0 + 1e-15 * 4.0]).unwrap();
        let sigma = SampleGrid::geometric(interval, 20).unwrap();
        let m = reim_build(&dict, &sigma, 2, interval).unwrap();
        assert_eq!(m.len(), 1);
    }

    #[test]
    fn prefix_matches_shorter_build() {
        let full = small_model(12);
        let short = small_model(7);
        let prefix = full.prefix(7).unwrap();
        assert_eq!(prefix.poles_b(), short.poles_b());
        assert_eq!(prefix.interp_x(), short.interp_x());
        assert_eq!(prefix.trace(), short.trace());
        assert!(full.prefix(0).is_err());
        assert!(full.prefix(13).is_err());
    }

    #[test]
    fn least_squares_examples() {
        let sigma = SampleGrid::geometric(Interval::new(1e-3, 1.0).unwrap(), 200).unwrap();
        let pf = least_squares_fit(|x| 1.0 / (x + 0.3), &[0.3], &sigma).unwrap();
        assert!((pf.residues()[0] - 1.0).abs() < 1e-10);

        let m = small_model(6);
        let pts = SampleGrid::new({
            let mut p = m.interp_x().to_vec();
            p.sort_by(f64::total_cmp);
            p
        })
        .unwrap();
        let f = |x: f64| x.powf(-0.5);
        let lsq = least_squares_fit(f, m.poles_b(), &pts).unwrap();
        let interp = m.interpolate(f).unwrap();
        for (a, b) in lsq.residues().iter().zip(interp.residues()) {
            assert!((a - b).abs() <= 1e-8 * b.abs().max(1.0), "{a} vs {b}");
        }
        assert!(least_squares_fit(f, m.poles_b(), &SampleGrid::new(vec![0.1, 0.2]).unwrap()).is_err());
    }

    #[test]
    fn lebesgue_of_single_term_is_one() {
        let m = small_model(1);
        let grid = SampleGrid::geometric(m.interval(), 1000).unwrap();
        assert!((m.lebesgue_estimate(&grid) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn sup_error_examples() {
        let grid = SampleGrid::geometric(Interval::new(0.1, 1.0).unwrap(), 10).unwrap();
        let one = sup_error_fn(&PartialFraction::empty(), |_| 1.0, &grid);
        assert_eq!(one, 1.0);
        let m = small_model(1);
        let b = m.poles_b()[0];
        let pf = m.interpolate(|x| 1.0 / (x + b)).unwrap();
        assert!(sup_error_fn(&pf, |x| 1.0 / (x + b), &grid) <= 1e-12);
    }
}
