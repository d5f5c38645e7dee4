//! Spectral fractional Poisson problems `A^s u = f` with `A` the 5-point
//! Dirichlet Laplacian, solved as `u = Σ c_i (A/Λ + b_i I)^{-1} f / Λ^s`.
//!
//! The greedy model lives on `[η, 1]`, so the operator is rescaled by its upper
//! spectral bound `Λ` and `η ≤ λ_min / Λ` is required.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::fraction::PartialFraction;
use crate::numerics::dense::{dense_sym_eigen, norm2, DenseMatrix};
use crate::numerics::sparse::{ShiftedSolver, SparseOperator};
use crate::reim::ReimModel;
use crate::targets::TargetFunction;

/// CG tolerance of every shifted solve.
pub const SHIFT_SOLVE_TOL: f64 = 1e-12;
/// Default upper spectral bound.
pub const DEFAULT_LAMBDA: f64 = 1e6;
/// Odd modes `j, k ≤ 1999` of the reference expansion, i.e. `j² + k² ≲ 4·10⁶`.
pub const DEFAULT_JK_MAX: usize = 1999;
/// Largest left endpoint used for the rescaled interval.
pub const DEFAULT_ETA: f64 = 1e-6;

/// Uniform grid of `M × M` interior points on the square
/// `(origin, origin + length)²`, indexed lexicographically with `x` fastest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    m: usize,
    h: f64,
    origin: f64,
    length: f64,
}

impl Grid2D {
    /// `M` interior points per direction on `(origin, origin + length)²`.
    pub fn new(origin: f64, length: f64, m: usize) -> Result<Self> {
        if m == 0 || !(length > 0.0) || !origin.is_finite() {
            return Err(Error::invalid(format!(
                "grid needs M >= 1 and positive length, got M = {m}, length = {length}"
            )));
        }
        Ok(Grid2D {
            m,
            h: length / (m + 1) as f64,
            origin,
            length,
        })
    }

    /// Spacing `h` on `(−1, 1)²`: `M = 2/h − 1`.
    pub fn square(h: f64) -> Result<Self> {
        Grid2D::with_spacing(-1.0, 2.0, h)
    }

    /// Spacing `h` on `(0, 1)²`: `M = 1/h − 1`.
    pub fn unit_square(h: f64) -> Result<Self> {
        Grid2D::with_spacing(0.0, 1.0, h)
    }

    /// Grid on `(−1, 1)²` for a convergence-table row labelled `h`.
    ///
    /// The label is the spacing in the reference coordinates of `(0, 1)²`;
    /// the physical spacing on `(−1, 1)²` is `2h`, so `M = 1/h − 1`.
    pub fn table_row(label_h: f64) -> Result<Self> {
        Grid2D::with_spacing(-1.0, 2.0, 2.0 * label_h)
    }

    fn with_spacing(origin: f64, length: f64, h: f64) -> Result<Self> {
        if !(h > 0.0 && h < length) {
            return Err(Error::invalid(format!("mesh size {h} must lie in (0, {length})")));
        }
        let cells = length / h;
        let rounded = cells.round();
        if (cells - rounded).abs() > 1e-9 * cells || rounded < 2.0 {
            return Err(Error::invalid(format!(
                "mesh size {h} does not divide the side length {length}"
            )));
        }
        Grid2D::new(origin, length, rounded as usize - 1)
    }

    /// Interior points per direction.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Physical spacing.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn len(&self) -> usize {
        self.m * self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.m + i
    }

    /// Coordinate of interior index `i` (0-based) along either axis.
    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        self.origin + (i + 1) as f64 * self.h
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.m).map(|i| self.coord(i)).collect()
    }

    /// Sample `g(x, y)` at the interior points.
    pub fn sample(&self, g: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let c = self.coords();
        let mut out = Vec::with_capacity(self.len());
        for &y in &c {
            for &x in &c {
                out.push(g(x, y));
            }
        }
        out
    }

    /// Discrete `L²` norm `h ‖v‖₂`.
    pub fn l2_norm(&self, v: &[f64]) -> f64 {
        self.h * norm2(v)
    }

    /// Smallest eigenvalue `2 (4/h²) sin²(π h / (2 L))` of the 5-point operator.
    pub fn lambda_min(&self) -> f64 {
        let s = (PI * self.h / (2.0 * self.length)).sin();
        8.0 * s * s / (self.h * self.h)
    }
}

/// `[λ_min, Λ]` bounds of the discrete spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralBounds {
    pub lambda_min_lb: f64,
    pub lambda_max_ub: f64,
}

impl SpectralBounds {
    pub fn new(lambda_min_lb: f64, lambda_max_ub: f64) -> Result<Self> {
        if !(lambda_min_lb > 0.0 && lambda_min_lb < lambda_max_ub && lambda_max_ub.is_finite()) {
            return Err(Error::invalid(format!(
                "spectral bounds need 0 < λ_min < Λ, got [{lambda_min_lb}, {lambda_max_ub}]"
            )));
        }
        Ok(SpectralBounds {
            lambda_min_lb,
            lambda_max_ub,
        })
    }

    /// Left endpoint of the rescaled interval: `λ_min / Λ` rounded down to a
    /// power of ten, never above [`DEFAULT_ETA`].
    pub fn eta(&self) -> f64 {
        let ratio = self.lambda_min_lb / self.lambda_max_ub;
        let decade = 10f64.powf(ratio.log10().floor());
        // powf can land a hair above the ratio
        let decade = if decade > ratio { decade / 10.0 } else { decade };
        decade.min(DEFAULT_ETA)
    }
}

/// Bounds for the 5-point operator: `Λ = max(8/h², 10⁶)` unless overridden.
pub fn spectral_bounds(grid: &Grid2D, override_lambda: Option<f64>) -> Result<SpectralBounds> {
    let h = grid.h();
    let upper = override_lambda.unwrap_or_else(|| (8.0 / (h * h)).max(DEFAULT_LAMBDA));
    SpectralBounds::new(grid.lambda_min(), upper)
}

/// 5-point Laplacian with homogeneous Dirichlet conditions eliminated.
pub fn assemble_laplacian_2d(grid: &Grid2D) -> SparseOperator {
    let m = grid.m();
    let inv_h2 = 1.0 / (grid.h() * grid.h());
    let mut triplets = Vec::with_capacity(5 * grid.len());
    for j in 0..m {
        for i in 0..m {
            let row = grid.index(i, j);
            triplets.push((row, row, 4.0 * inv_h2));
            if i > 0 {
                triplets.push((row, grid.index(i - 1, j), -inv_h2));
            }
            if i + 1 < m {
                triplets.push((row, grid.index(i + 1, j), -inv_h2));
            }
            if j > 0 {
                triplets.push((row, grid.index(i, j - 1), -inv_h2));
            }
            if j + 1 < m {
                triplets.push((row, grid.index(i, j + 1), -inv_h2));
            }
        }
    }
    SparseOperator::from_triplets(grid.len(), &triplets, true).expect("stencil is symmetric")
}

pub(crate) fn check_model(bounds: &SpectralBounds, model: &ReimModel) -> Result<()> {
    let ratio = bounds.lambda_min_lb / bounds.lambda_max_ub;
    if model.interval().lo() > ratio {
        return Err(Error::invalid(format!(
            "model interval starts at {} but the rescaled spectrum reaches down to {ratio}",
            model.interval().lo()
        )));
    }
    Ok(())
}

/// `u ≈ A^{-s} f`.
pub fn solve_fractional(
    a: &SparseOperator,
    bounds: &SpectralBounds,
    s: f64,
    f: &[f64],
    model: &ReimModel,
) -> Result<Vec<f64>> {
    Ok(solve_fractional_many(a, bounds, &[s], f, model)?.remove(0))
}

/// `A^{-s} f` for several `s` from one set of shifted solves.
pub fn solve_fractional_many(
    a: &SparseOperator,
    bounds: &SpectralBounds,
    s_list: &[f64],
    f: &[f64],
    model: &ReimModel,
) -> Result<Vec<Vec<f64>>> {
    check_model(bounds, model)?;
    let fractions: Vec<PartialFraction> = s_list
        .iter()
        .map(|&s| model.interpolate_target(&TargetFunction::power_neg(s)?))
        .collect::<Result<_>>()?;
    let scaled = a.scaled(1.0 / bounds.lambda_max_ub);
    let solves = ShiftedSolver::new(&scaled, model.poles_b(), SHIFT_SOLVE_TOL).solve_all(f)?;
    Ok(s_list
        .iter()
        .zip(&fractions)
        .map(|(&s, pf)| {
            let scale = bounds.lambda_max_ub.powf(-s);
            solves
                .combine(pf.residues())
                .into_iter()
                .map(|v| v * scale)
                .collect()
        })
        .collect())
}

/// `V diag(λ^{-s}) Vᵀ f` from a dense eigendecomposition.
pub fn dense_oracle_solve(a: &DenseMatrix, s: f64, f: &[f64]) -> Result<Vec<f64>> {
    if !a.is_square() || a.rows() != f.len() {
        return Err(Error::invalid("dense oracle needs a square matrix matching f"));
    }
    let eig = dense_sym_eigen(a)?;
    if let Some(l) = eig.values.first().filter(|l| !(**l > 0.0)) {
        return Err(Error::invalid(format!(
            "dense oracle needs a positive definite matrix, smallest eigenvalue {l}"
        )));
    }
    Ok(eig.apply_function(f, |l| l.powf(-s)))
}

/// Truncated eigen-expansion of `(−Δ)^{-s} 1` on `(−1, 1)²` at the grid's
/// interior points, over odd `j, k ≤ jk_max`.
pub fn reference_eigen(s: f64, grid: &Grid2D, jk_max: usize) -> Result<Vec<f64>> {
    if jk_max == 0 {
        return Err(Error::invalid("jk_max must be at least 1"));
    }
    if grid.origin() != -1.0 || grid.length() != 2.0 {
        return Err(Error::invalid("reference expansion is defined on (-1, 1)²"));
    }
    let modes: Vec<usize> = (1..=jk_max).step_by(2).collect();
    let coords = grid.coords();
    let m = grid.m();
    // sines[j][p] = sin(j π (x_p + 1) / 2)
    let sines: Vec<Vec<f64>> = modes
        .iter()
        .map(|&j| {
            coords
                .iter()
                .map(|&x| (j as f64 * PI * (x + 1.0) / 2.0).sin())
                .collect()
        })
        .collect();
    let quarter_pi2 = PI * PI / 4.0;
    // t[k][p] = Σ_j C_jk S_j(p), then u[q][p] = Σ_k S_k(q) t[k][p]
    let mut t = vec![vec![0.0; m]; modes.len()];
    for (ki, &k) in modes.iter().enumerate() {
        for (ji, &j) in modes.iter().enumerate() {
            let lambda = ((j * j + k * k) as f64) * quarter_pi2;
            let c = lambda.powf(-s) * 16.0 / ((j * k) as f64 * PI * PI);
            for (tp, sp) in t[ki].iter_mut().zip(&sines[ji]) {
                *tp += c * sp;
            }
        }
    }
    let mut u = vec![0.0; grid.len()];
    for q in 0..m {
        for (ki, tk) in t.iter().enumerate() {
            let sq = sines[ki][q];
            let row = &mut u[q * m..(q + 1) * m];
            for (up, tp) in row.iter_mut().zip(tk) {
                *up += sq * tp;
            }
        }
    }
    Ok(u)
}

/// `log(e_{i+1}/e_i) / log(h_{i+1}/h_i)`.
pub fn convergence_order(e_prev: f64, e_next: f64, h_prev: f64, h_next: f64) -> Result<f64> {
    if h_prev == h_next {
        return Err(Error::invalid("order undefined for equal mesh sizes"));
    }
    Ok((e_next / e_prev).ln() / (h_next / h_prev).ln())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table1Row {
    pub h: f64,
    pub s: f64,
    pub l2_error: f64,
    pub order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceTable {
    pub rows: Vec<Table1Row>,
}

impl ConvergenceTable {
    pub fn get(&self, h: f64, s: f64) -> Option<&Table1Row> {
        self.rows.iter().find(|r| r.h == h && r.s == s)
    }

    /// `h,s,l2_error,order` with 6 significant digits; the first order of each
    /// `s` is empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("h,s,l2_error,order\n");
        for r in &self.rows {
            let order = r.order.map(|o| format!("{o:.5e}")).unwrap_or_default();
            let _ = writeln!(out, "{:.5e},{},{:.5e},{}", r.h, r.s, r.l2_error, order);
        }
        out
    }
}

/// Errors `h‖u_h − u_ref‖₂` against the eigen-expansion reference for `f = 1`,
/// with orders between consecutive rows. `h_list` holds row labels, see
/// [`Grid2D::table_row`].
pub fn run_table1(
    h_list: &[f64],
    s_list: &[f64],
    model: &ReimModel,
    jk_max: usize,
) -> Result<ConvergenceTable> {
    if h_list.is_empty() || s_list.is_empty() {
        return Err(Error::invalid("need at least one mesh size and one s"));
    }
    for w in h_list.windows(2) {
        if w[1] == w[0] {
            return Err(Error::invalid("consecutive mesh sizes are equal; order undefined"));
        }
        if w[1] > w[0] {
            return Err(Error::invalid("mesh sizes must be decreasing"));
        }
    }
    let mut errors = vec![vec![0.0; h_list.len()]; s_list.len()];
    for (hi, &h) in h_list.iter().enumerate() {
        let grid = Grid2D::table_row(h)?;
        let a = assemble_laplacian_2d(&grid);
        let bounds = spectral_bounds(&grid, None)?;
        let f = vec![1.0; grid.len()];
        let solutions = solve_fractional_many(&a, &bounds, s_list, &f, model)?;
        for (si, (&s, u)) in s_list.iter().zip(&solutions).enumerate() {
            let reference = reference_eigen(s, &grid, jk_max)?;
            let diff: Vec<f64> = u.iter().zip(&reference).map(|(a, b)| a - b).collect();
            errors[si][hi] = grid.l2_norm(&diff);
        }
    }
    let mut table = ConvergenceTable::default();
    for (hi, &h) in h_list.iter().enumerate() {
        for (si, &s) in s_list.iter().enumerate() {
            let order = if hi == 0 {
                None
            } else {
                Some(convergence_order(errors[si][hi - 1], errors[si][hi], h_list[hi - 1], h)?)
            };
            table.rows.push(Table1Row {
                h,
                s,
                l2_error: errors[si][hi],
                order,
            });
        }
    }
    Ok(table)
}
