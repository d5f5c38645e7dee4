//! Orthogonal greedy selection of dictionary shifts in `L²(I)`.
//!
//! Candidates are scored by `|⟨g, f − f_{m−1}⟩| / ‖g‖`, i.e. against the
//! `L²`-normalized dictionary, so an element of the dictionary is recovered in
//! one step. The projection is maintained as a Householder QR of the
//! quadrature-weighted samples `√w_k g_{b_i}(x_k)`; the residual norm read off
//! that factorization is exactly non-increasing in `m`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fraction::{Interval, PartialFraction, SampleGrid};
use crate::numerics::dense::{dot, norm2, IncrementalQr, LuFactors};
use crate::numerics::gram::gram_entry;
use crate::numerics::quadrature::{gauss_legendre_panels, Quadrature};
use crate::numerics::DenseMatrix;
use crate::targets::TargetFunction;

pub const DEFAULT_PANELS: usize = 200;
pub const DEFAULT_ORDER: usize = 16;
/// `|R_mm|` below this fraction of `max |R_jj|` is a degenerate selection.
const DEGENERATE_PIVOT: f64 = 1e-15;

/// Composite Gauss–Legendre rule used for target inner products.
pub fn default_quadrature(interval: Interval) -> Result<Quadrature> {
    gauss_legendre_panels(interval, DEFAULT_PANELS, DEFAULT_ORDER)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RogaResult {
    /// Shifts in selection order.
    pub selected_b: Vec<f64>,
    /// `f_n` with residues in selection order.
    pub expansion: PartialFraction,
    /// `‖f − f_m‖_{L²}` for `m = 1..n`.
    pub l2_errors: Vec<f64>,
    /// `‖f‖_{L²}` under the same quadrature.
    pub f_norm: f64,
}

impl RogaResult {
    /// Residues of `f_m` for `m ≤ n` are not stored; only the final expansion.
    pub fn len(&self) -> usize {
        self.selected_b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected_b.is_empty()
    }
}

/// `‖x^{−s}‖²_{L²(lo, hi)}` in closed form.
pub fn power_neg_norm_sq(s: f64, interval: &Interval) -> f64 {
    let (lo, hi) = (interval.lo(), interval.hi());
    let p = 1.0 - 2.0 * s;
    if p.abs() < 1e-12 {
        (hi / lo).ln()
    } else {
        (hi.powf(p) - lo.powf(p)) / p
    }
}

pub fn roga_run(
    f: &TargetFunction,
    dict: &SampleGrid,
    n: usize,
    interval: Interval,
    quad: &Quadrature,
) -> Result<RogaResult> {
    f.check_interval(&interval)?;
    roga_run_fn(|x| f.value(x), dict, n, interval, quad)
}

pub fn roga_run_fn(
    f: impl Fn(f64) -> f64 + Sync,
    dict: &SampleGrid,
    n: usize,
    interval: Interval,
    quad: &Quadrature,
) -> Result<RogaResult> {
    if n == 0 || n > dict.len() {
        return Err(Error::invalid(format!(
            "ROGA needs 1 <= n <= |B| = {}, got {n}",
            dict.len()
        )));
    }
    if !(dict.min() > 0.0) {
        return Err(Error::invalid("dictionary shifts must be positive"));
    }
    if let Some(x) = quad.nodes().iter().find(|x| !interval.contains(**x)) {
        return Err(Error::invalid(format!("quadrature node {x} outside the interval")));
    }

    let sqrt_w: Vec<f64> = quad.weights().iter().map(|w| w.sqrt()).collect();
    let nodes = quad.nodes();
    let rows = nodes.len();
    let shifts = dict.points();
    let sample = |b: f64| -> Vec<f64> {
        nodes.iter().zip(&sqrt_w).map(|(x, sw)| sw / (x + b)).collect()
    };
    let columns: Vec<Vec<f64>> = shifts.par_iter().map(|&b| sample(b)).collect();
    let inv_norms: Vec<f64> = shifts
        .iter()
        .map(|&b| 1.0 / gram_entry(b, b, &interval).sqrt())
        .collect();
    let target: Vec<f64> = nodes.iter().zip(&sqrt_w).map(|(&x, sw)| sw * f(x)).collect();
    let f_norm = norm2(&target);

    let mut used = vec![false; shifts.len()];
    let mut qr = IncrementalQr::new(rows);
    let mut selected_b = Vec::with_capacity(n);
    let mut l2_errors = Vec::with_capacity(n);
    let mut residual = target.clone();
    let mut max_pivot: f64 = 0.0;
    let mut qt_f = target.clone();

    for _ in 0..n {
        let scores: Vec<f64> = columns
            .par_iter()
            .enumerate()
            .map(|(j, col)| {
                if used[j] {
                    f64::NEG_INFINITY
                } else {
                    dot(col, &residual).abs() * inv_norms[j]
                }
            })
            .collect();
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for (j, &v) in scores.iter().enumerate() {
            if v > best_score {
                best = j;
                best_score = v;
            }
        }
        used[best] = true;
        let pivot = qr.push_column(&columns[best])?.abs();
        max_pivot = max_pivot.max(pivot);
        if !(pivot > DEGENERATE_PIVOT * max_pivot) {
            return Err(Error::RankDeficient {
                column: selected_b.len(),
                value: pivot,
            });
        }
        selected_b.push(shifts[best]);

        let m = qr.cols();
        qt_f.copy_from_slice(&target);
        qr.apply_qt(&mut qt_f);
        let tail = norm2(&qt_f[m..]);
        l2_errors.push(tail);
        residual.copy_from_slice(&qt_f);
        residual[..m].iter_mut().for_each(|v| *v = 0.0);
        qr.apply_q(&mut residual);
    }

    let residues = qr.solve_r(&qt_f[..qr.cols()]);
    if residues.iter().any(|c| !c.is_finite()) {
        return Err(Error::RankDeficient {
            column: 0,
            value: 0.0,
        });
    }
    Ok(RogaResult {
        expansion: PartialFraction::new(selected_b.clone(), residues)?,
        selected_b,
        l2_errors,
        f_norm,
    })
}

/// `L²` projection onto `Span{1/(x + b_i)}` through the closed-form Gram
/// matrix and quadrature moments `⟨f, g_{b_i}⟩`.
pub fn project_l2(
    f: &TargetFunction,
    basis_b: &[f64],
    interval: Interval,
    quad: &Quadrature,
) -> Result<PartialFraction> {
    f.check_interval(&interval)?;
    project_l2_fn(|x| f.value(x), basis_b, interval, quad)
}

pub fn project_l2_fn(
    f: impl Fn(f64) -> f64,
    basis_b: &[f64],
    interval: Interval,
    quad: &Quadrature,
) -> Result<PartialFraction> {
    // validates positivity and distinctness
    PartialFraction::new(basis_b.to_vec(), vec![0.0; basis_b.len()])?;
    let n = basis_b.len();
    if n == 0 {
        return Ok(PartialFraction::empty());
    }
    let gram = DenseMatrix::from_fn(n, n, |i, j| gram_entry(basis_b[i], basis_b[j], &interval));
    let values: Vec<f64> = quad.nodes().iter().map(|&x| f(x)).collect();
    let moments: Vec<f64> = basis_b
        .iter()
        .map(|&b| {
            quad.nodes()
                .iter()
                .zip(quad.weights())
                .zip(&values)
                .map(|((x, w), v)| w * v / (x + b))
                .sum()
        })
        .collect();
    let residues = LuFactors::factor(&gram)?.solve(&moments);
    PartialFraction::new(basis_b.to_vec(), residues)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (Interval, SampleGrid, Quadrature) {
        let interval = Interval::new(1e-6, 1.0).unwrap();
        let dict = SampleGrid::geometric(Interval::new(1e-7, 10.0).unwrap(), 300).unwrap();
        (interval, dict, default_quadrature(interval).unwrap())
    }

    #[test]
    fn recovers_a_dictionary_element_in_one_step() {
        let (interval, dict, quad) = setup();
        let b_star = dict.points()[137];
        let r = roga_run_fn(|x| 1.0 / (x + b_star), &dict, 1, interval, &quad).unwrap();
        assert_eq!(r.selected_b, vec![b_star]);
        assert!(r.l2_errors[0] <= 1e-9 * r.f_norm);
        assert!((r.expansion.residues()[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_target() {
        let (interval, dict, quad) = setup();
        let r = roga_run_fn(|_| 0.0, &dict, 4, interval, &quad).unwrap();
        assert!(r.expansion.residues().iter().all(|&c| c == 0.0));
        assert!(r.l2_errors.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn projection_examples() {
        let (interval, _, quad) = setup();
        let b1 = 0.01;
        let pf = project_l2_fn(|x| 2.0 / (x + b1), &[b1], interval, &quad).unwrap();
        assert!((pf.residues()[0] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn quadrature_norm_matches_closed_form() {
        let (interval, _, quad) = setup();
        for &s in &[0.25, 0.5, 0.75] {
            let q = quad.integrate(|x| x.powf(-2.0 * s));
            let exact = power_neg_norm_sq(s, &interval);
            assert!((q - exact).abs() <= 1e-10 * exact, "s={s}: {q} vs {exact}");
        }
    }

    #[test]
    fn rejects_bad_sizes() {
        let (interval, dict, quad) = setup();
        assert!(roga_run_fn(|x| x, &dict, 0, interval, &quad).is_err());
        assert!(roga_run_fn(|x| x, &dict, 301, interval, &quad).is_err());
    }
}
