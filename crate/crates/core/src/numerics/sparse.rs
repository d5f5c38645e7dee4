//! CSR operators, unpreconditioned conjugate gradients and batches of shifted
//! solves `(A + b_i I)^{-1} v`.

use rayon::prelude::*;

use super::dense::{dot, norm2, DenseMatrix};
use crate::error::{Error, Result};
use crate::fraction::PartialFraction;

/// Square sparse matrix in compressed sparse row form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    symmetric: bool,
}

impl SparseOperator {
    /// Build from `(row, col, value)` triplets. Duplicates are summed, every
    /// diagonal entry is stored (zero if absent).
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)], symmetric: bool) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, f64)>> = (0..n).map(|i| vec![(i, 0.0)]).collect();
        for &(i, j, v) in triplets {
            if i >= n || j >= n {
                return Err(Error::invalid(format!(
                    "triplet ({i},{j}) outside a {n}x{n} operator"
                )));
            }
            rows[i].push((j, v));
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            let mut last: Option<usize> = None;
            for (j, v) in row {
                if last == Some(j) {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(j);
                    values.push(v);
                    last = Some(j);
                }
            }
            row_ptr.push(col_idx.len());
        }
        let op = SparseOperator {
            n,
            row_ptr,
            col_idx,
            values,
            symmetric,
        };
        if symmetric && !op.is_symmetric_exact() {
            return Err(Error::invalid("operator flagged symmetric is not"));
        }
        Ok(op)
    }

    pub fn from_dense(a: &DenseMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::invalid("sparse operator must be square"));
        }
        let n = a.rows();
        let triplets: Vec<_> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| a[(i, j)] != 0.0)
            .map(|(i, j)| (i, j, a[(i, j)]))
            .collect();
        let symmetric = a.is_symmetric(0.0);
        SparseOperator::from_triplets(n, &triplets, symmetric)
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        SparseOperator {
            n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: diag.to_vec(),
            symmetric: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// `alpha * A`, keeping the pattern.
    pub fn scaled(&self, alpha: f64) -> SparseOperator {
        SparseOperator {
            values: self.values.iter().map(|v| v * alpha).collect(),
            ..self.clone()
        }
    }

    /// The diagonal, if every stored off-diagonal entry is zero.
    pub fn diagonal_entries(&self) -> Option<Vec<f64>> {
        let mut diag = vec![0.0; self.n];
        for (i, d) in diag.iter_mut().enumerate() {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.col_idx[k] == i {
                    *d = self.values[k];
                } else if self.values[k] != 0.0 {
                    return None;
                }
            }
        }
        Some(diag)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()]
            .binary_search(&j)
            .map(|k| self.values[range.start + k])
            .unwrap_or(0.0)
    }

    /// `y = A x`.
    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let range = self.row_ptr[i]..self.row_ptr[i + 1];
            *yi = self.col_idx[range.clone()]
                .iter()
                .zip(&self.values[range])
                .map(|(&j, v)| v * x[j])
                .sum();
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                d[(i, self.col_idx[k])] = self.values[k];
            }
        }
        d
    }

    /// Exact structural and numerical symmetry `A = Aᵀ`.
    pub fn is_symmetric_exact(&self) -> bool {
        (0..self.n).all(|i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).all(|k| {
                let j = self.col_idx[k];
                self.get(j, i) == self.values[k]
            })
        })
    }

    /// Largest absolute row sum, an upper bound for the spectral radius.
    pub fn gershgorin_bound(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                self.values[self.row_ptr[i]..self.row_ptr[i + 1]]
                    .iter()
                    .map(|v| v.abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }
}

/// Multiple of `ε ‖A‖ ‖u‖` accepted as a converged residual.
pub const ROUNDING_FLOOR: f64 = 32.0;

/// Outcome of a converged CG solve.
#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub solution: Vec<f64>,
    pub iterations: usize,
    /// Final true relative residual `‖rhs − (A + shift I) u‖₂ / ‖rhs‖₂`.
    pub residual: f64,
}

/// Conjugate gradients on `(A + shift I) u = rhs`.
///
/// Stops once the true residual satisfies `‖r‖₂ ≤ rel_tol ‖rhs‖₂`, or once it
/// reaches the rounding floor `ROUNDING_FLOOR · ε · ‖A + shift I‖ · ‖u‖₂`
/// below which no residual can be certified. The recurrence residual is
/// re-synchronised with the true one whenever it claims convergence. The
/// iteration cap is `10 N`.
pub fn cg_solve(a: &SparseOperator, shift: f64, rhs: &[f64], rel_tol: f64) -> Result<CgOutcome> {
    let n = a.dim();
    if rhs.len() != n {
        return Err(Error::invalid(format!(
            "rhs has length {}, operator has dimension {n}",
            rhs.len()
        )));
    }
    if !(shift >= 0.0) {
        return Err(Error::invalid(format!("shift must be nonnegative, got {shift}")));
    }
    let rhs_norm = norm2(rhs);
    let mut u = vec![0.0; n];
    if rhs_norm == 0.0 {
        return Ok(CgOutcome {
            solution: u,
            iterations: 0,
            residual: 0.0,
        });
    }
    let requested = rel_tol * rhs_norm;
    let op_norm = a.gershgorin_bound() + shift;
    let floor = |u: &[f64]| ROUNDING_FLOOR * f64::EPSILON * op_norm * norm2(u);
    let cap = 10 * n.max(1);
    let apply = |x: &[f64], y: &mut [f64]| {
        a.matvec_into(x, y);
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi += shift * xi;
        }
    };

    let mut r = rhs.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    let mut iterations = 0;
    loop {
        let target = requested.max(floor(&u));
        if rr.sqrt() <= target {
            // confirm against the true residual
            apply(&u, &mut ap);
            for ((ri, bi), ai) in r.iter_mut().zip(rhs).zip(&ap) {
                *ri = bi - ai;
            }
            rr = dot(&r, &r);
            if rr.sqrt() <= target {
                return Ok(CgOutcome {
                    solution: u,
                    iterations,
                    residual: rr.sqrt() / rhs_norm,
                });
            }
            p.copy_from_slice(&r);
        }
        if iterations >= cap {
            return Err(Error::NonConvergence {
                iterations,
                residual: rr.sqrt() / rhs_norm,
                shift_index: None,
            });
        }
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::NonConvergence {
                iterations,
                residual: rr.sqrt() / rhs_norm,
                shift_index: None,
            });
        }
        let alpha = rr / pap;
        for ((ui, ri), (pi, api)) in u.iter_mut().zip(r.iter_mut()).zip(p.iter().zip(&ap)) {
            *ui += alpha * pi;
            *ri -= alpha * api;
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
        iterations += 1;
    }
}

/// Shifted solves against one operator for a fixed set of shifts `b_i`.
///
/// Solves for different shifts run concurrently; results are always returned
/// and combined in shift-index order.
#[derive(Debug, Clone, Copy)]
pub struct ShiftedSolver<'a> {
    op: &'a SparseOperator,
    shifts: &'a [f64],
    rel_tol: f64,
}

/// Solutions `(A + b_i I)^{-1} v` for every shift.
#[derive(Debug, Clone)]
pub struct ShiftedSolutions {
    pub solutions: Vec<Vec<f64>>,
    pub iterations: Vec<usize>,
}

impl<'a> ShiftedSolver<'a> {
    pub fn new(op: &'a SparseOperator, shifts: &'a [f64], rel_tol: f64) -> Self {
        ShiftedSolver { op, shifts, rel_tol }
    }

    pub fn shifts(&self) -> &[f64] {
        self.shifts
    }

    /// Diagonal operators are solved directly and report zero iterations.
    pub fn solve_all(&self, rhs: &[f64]) -> Result<ShiftedSolutions> {
        if rhs.len() != self.op.dim() {
            return Err(Error::invalid(format!(
                "rhs has length {}, operator has dimension {}",
                rhs.len(),
                self.op.dim()
            )));
        }
        if let Some(diag) = self.op.diagonal_entries() {
            return self.solve_diagonal(&diag, rhs);
        }
        let outcomes: Vec<CgOutcome> = self
            .shifts
            .par_iter()
            .enumerate()
            .map(|(i, &b)| cg_solve(self.op, b, rhs, self.rel_tol).map_err(|e| e.with_shift_index(i)))
            .collect::<Result<_>>()?;
        let iterations = outcomes.iter().map(|o| o.iterations).collect();
        let solutions = outcomes.into_iter().map(|o| o.solution).collect();
        Ok(ShiftedSolutions {
            solutions,
            iterations,
        })
    }

    /// `Σ c_i (A + b_i I)^{-1} rhs` for a fraction whose poles match the solver's.
    pub fn apply(&self, pf: &PartialFraction, rhs: &[f64]) -> Result<Vec<f64>> {
        self.check_poles(pf)?;
        Ok(self.solve_all(rhs)?.combine(pf.residues()))
    }

    fn solve_diagonal(&self, diag: &[f64], rhs: &[f64]) -> Result<ShiftedSolutions> {
        let mut solutions = Vec::with_capacity(self.shifts.len());
        for &b in self.shifts {
            if !(b >= 0.0) {
                return Err(Error::invalid(format!("shift must be nonnegative, got {b}")));
            }
            if let Some(d) = diag.iter().find(|d| !(**d + b > 0.0)) {
                return Err(Error::invalid(format!(
                    "shifted diagonal entry {} is not positive",
                    d + b
                )));
            }
            solutions.push(rhs.iter().zip(diag).map(|(v, d)| v / (d + b)).collect());
        }
        Ok(ShiftedSolutions {
            solutions,
            iterations: vec![0; self.shifts.len()],
        })
    }

    fn check_poles(&self, pf: &PartialFraction) -> Result<()> {
        if pf.poles_b() != self.shifts {
            return Err(Error::invalid(
                "partial fraction poles differ from the solver's shifts",
            ));
        }
        Ok(())
    }
}

impl ShiftedSolutions {
    /// `Σ c_i w_i`, summed in index order.
    pub fn combine(&self, residues: &[f64]) -> Vec<f64> {
        assert_eq!(residues.len(), self.solutions.len(), "residue count mismatch");
        let n = self.solutions.first().map_or(0, Vec::len);
        let mut out = vec![0.0; n];
        for (c, w) in residues.iter().zip(&self.solutions) {
            for (o, wi) in out.iter_mut().zip(w) {
                *o += c * wi;
            }
        }
        out
    }
}
