//! Small dense linear algebra: pivoted LU, Householder least squares and a
//! cyclic Jacobi eigensolver.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Pivots with magnitude at or below this are treated as zero.
pub const PIVOT_THRESHOLD: f64 = 1e-300;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = DenseMatrix::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::invalid(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::invalid("ragged rows"));
        }
        let data = rows.iter().flatten().copied().collect();
        DenseMatrix::from_row_major(rows.len(), cols, data)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        DenseMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "matvec dimension mismatch");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let src = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let scale = self.frobenius_norm().max(f64::MIN_POSITIVE);
        (0..self.rows).all(|i| {
            (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= rel_tol * scale)
        })
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Cauchy matrix with entries `1 / (x_i + b_j)`.
pub fn cauchy_matrix(b: &[f64], x: &[f64]) -> Result<DenseMatrix> {
    if b.len() != x.len() {
        return Err(Error::invalid(format!(
            "cauchy matrix needs equal lengths, got {} shifts and {} points",
            b.len(),
            x.len()
        )));
    }
    let mut g = DenseMatrix::zeros(x.len(), b.len());
    for (i, xi) in x.iter().enumerate() {
        for (j, bj) in b.iter().enumerate() {
            let s = xi + bj;
            if !(s > 0.0) {
                return Err(Error::invalid(format!(
                    "cauchy entry ({i},{j}) has x + b = {s}, must be positive"
                )));
            }
            g[(i, j)] = 1.0 / s;
        }
    }
    Ok(g)
}

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Debug, Clone, PartialEq)]
pub struct LuFactors {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl LuFactors {
    pub fn factor(a: &DenseMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::invalid(format!(
                "LU needs a square matrix, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        let n = a.rows();
        let mut lu = a.as_slice().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|i| (i, lu[i * n + k].abs()))
                .fold((k, -1.0), |best, c| if c.1 > best.1 { c } else { best });
            if !(pivot > PIVOT_THRESHOLD) {
                return Err(Error::Singular { pivot, column: k });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let akk = lu[k * n + k];
            for i in k + 1..n {
                let l = lu[i * n + k] / akk;
                lu[i * n + k] = l;
                if l != 0.0 {
                    for j in k + 1..n {
                        lu[i * n + j] -= l * lu[k * n + j];
                    }
                }
            }
        }
        Ok(LuFactors { n, lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.n;
        assert_eq!(rhs.len(), n, "LU solve dimension mismatch");
        let mut y: Vec<f64> = self.perm.iter().map(|&p| rhs[p]).collect();
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            let s = dot(row, &y[..i]);
            y[i] -= s;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n + i + 1..(i + 1) * n];
            let s = dot(row, &y[i + 1..]);
            y[i] = (y[i] - s) / self.lu[i * n + i];
        }
        y
    }

    /// Explicit inverse, column by column.
    pub fn inverse(&self) -> DenseMatrix {
        let n = self.n;
        let mut inv = DenseMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            for (i, v) in self.solve(&e).into_iter().enumerate() {
                inv[(i, j)] = v;
            }
        }
        inv
    }
}

/// Solve `A x = rhs` by pivoted LU.
pub fn solve_dense(a: &DenseMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    if rhs.len() != a.rows() {
        return Err(Error::invalid(format!(
            "right-hand side has length {}, matrix has {} rows",
            rhs.len(),
            a.rows()
        )));
    }
    Ok(LuFactors::factor(a)?.solve(rhs))
}

/// Householder QR built one column at a time.
///
/// Appending a column never changes the reflectors of earlier columns, so the
/// least-squares residual of nested column sets is available incrementally.
#[derive(Debug, Clone)]
pub struct IncrementalQr {
    rows: usize,
    /// Householder vectors, each of length `rows` (zero above the diagonal).
    reflectors: Vec<Vec<f64>>,
    /// Column-major upper triangle: `r[j]` holds column j, entries `0..=j`.
    r: Vec<Vec<f64>>,
}

impl IncrementalQr {
    pub fn new(rows: usize) -> Self {
        IncrementalQr {
            rows,
            reflectors: Vec::new(),
            r: Vec::new(),
        }
    }

    pub fn cols(&self) -> usize {
        self.r.len()
    }

    /// Apply `Qᵀ` in place.
    pub fn apply_qt(&self, v: &mut [f64]) {
        for (k, h) in self.reflectors.iter().enumerate() {
            apply_reflector(h, k, v);
        }
    }

    /// Apply `Q` in place.
    pub fn apply_q(&self, v: &mut [f64]) {
        for (k, h) in self.reflectors.iter().enumerate().rev() {
            apply_reflector(h, k, v);
        }
    }

    /// Append a column. Returns the new diagonal entry `R_kk`.
    pub fn push_column(&mut self, column: &[f64]) -> Result<f64> {
        assert_eq!(column.len(), self.rows, "column length mismatch");
        let k = self.cols();
        if k >= self.rows {
            return Err(Error::invalid("more columns than rows in QR"));
        }
        let mut v = column.to_vec();
        self.apply_qt(&mut v);
        let tail = norm2(&v[k..]);
        let alpha = if v[k] > 0.0 { -tail } else { tail };
        let mut h = vec![0.0; self.rows];
        h[k..].copy_from_slice(&v[k..]);
        h[k] -= alpha;
        let hn = norm2(&h[k..]);
        if hn > 0.0 {
            h[k..].iter_mut().for_each(|x| *x /= hn);
        }
        let mut col = v[..k].to_vec();
        col.push(alpha);
        self.reflectors.push(h);
        self.r.push(col);
        Ok(alpha)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.r.iter().enumerate().map(|(j, c)| c[j]).collect()
    }

    /// Back substitution `R c = y[..cols]`.
    pub fn solve_r(&self, y: &[f64]) -> Vec<f64> {
        let n = self.cols();
        let mut c = y[..n].to_vec();
        for i in (0..n).rev() {
            let s = c[i] - (i + 1..n).map(|j| self.r[j][i] * c[j]).sum::<f64>();
            c[i] = s / self.r[i][i];
        }
        c
    }
}

#[inline]
fn apply_reflector(h: &[f64], k: usize, v: &mut [f64]) {
    let s = 2.0 * dot(&h[k..], &v[k..]);
    if s != 0.0 {
        for (vi, hi) in v[k..].iter_mut().zip(&h[k..]) {
            *vi -= s * hi;
        }
    }
}

/// Least-squares solution of `min ‖A c − rhs‖₂` by Householder QR.
///
/// Fails with [`Error::RankDeficient`] when some `|R_kk|` drops below
/// `rank_tol · max_j |R_jj|`.
pub fn least_squares(a: &DenseMatrix, rhs: &[f64], rank_tol: f64) -> Result<Vec<f64>> {
    if rhs.len() != a.rows() {
        return Err(Error::invalid("least squares right-hand side length mismatch"));
    }
    if a.cols() > a.rows() {
        return Err(Error::invalid(format!(
            "least squares needs rows >= cols, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let mut qr = IncrementalQr::new(a.rows());
    for j in 0..a.cols() {
        qr.push_column(&a.column(j))?;
    }
    let diag = qr.diagonal();
    let scale = diag.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    if let Some((column, value)) = diag
        .iter()
        .enumerate()
        .find(|(_, d)| !(d.abs() > rank_tol * scale))
    {
        return Err(Error::RankDeficient {
            column,
            value: value.abs(),
        });
    }
    let mut y = rhs.to_vec();
    qr.apply_qt(&mut y);
    Ok(qr.solve_r(&y))
}

/// Symmetric eigendecomposition result; eigenvalues ascending, eigenvectors
/// stored as columns of `vectors`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

/// Cyclic Jacobi eigensolver for small symmetric matrices.
pub fn dense_sym_eigen(a: &DenseMatrix) -> Result<SymmetricEigen> {
    if !a.is_symmetric(1e-12) {
        return Err(Error::invalid("Jacobi eigensolver needs a symmetric matrix"));
    }
    let n = a.rows();
    let mut m = a.clone();
    let mut v = DenseMatrix::identity(n);
    const MAX_SWEEPS: usize = 100;

    // Relative threshold: entries below ε·√|a_pp a_qq| are left alone, which
    // keeps small eigenvalues of graded matrices to high relative accuracy.
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let floor = f64::EPSILON * (m[(p, p)] * m[(q, q)]).abs().sqrt();
                if apq.abs() <= floor.max(f64::MIN_POSITIVE) {
                    continue;
                }
                rotated = true;
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].total_cmp(&m[(j, j)]));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let vectors = DenseMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(SymmetricEigen { values, vectors })
}

impl SymmetricEigen {
    /// `V · diag(g(λ)) · Vᵀ · x`.
    pub fn apply_function(&self, x: &[f64], g: impl Fn(f64) -> f64) -> Vec<f64> {
        let vt_x = self.vectors.transpose().matvec(x);
        let scaled: Vec<f64> = vt_x
            .iter()
            .zip(&self.values)
            .map(|(c, l)| c * g(*l))
            .collect();
        self.vectors.matvec(&scaled)
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        let n = self.values.len();
        let vl = DenseMatrix::from_fn(n, n, |i, j| self.vectors[(i, j)] * self.values[j]);
        vl.matmul(&self.vectors.transpose())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(n: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
        let b = DenseMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let mut a = b.matmul(&b.transpose());
        for i in 0..n {
            a[(i, i)] += n as f64;
        }
        a
    }

    #[test]
    fn cauchy_examples() {
        assert_eq!(cauchy_matrix(&[1.0], &[1.0]).unwrap().as_slice(), &[0.5]);
        let g = cauchy_matrix(&[1.0, 2.0], &[0.0, 1.0]).unwrap();
        assert_eq!(g.as_slice(), &[1.0, 0.5, 0.5, 1.0 / 3.0]);
        assert!(cauchy_matrix(&[1.0, 2.0], &[-1.0, 1.0]).is_err());
        assert!(cauchy_matrix(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn cauchy_transpose_swaps_roles() {
        let b = [0.1, 0.7, 3.0];
        let x = [0.2, 0.5, 2.0];
        let g = cauchy_matrix(&b, &x).unwrap();
        let gt = cauchy_matrix(&x, &b).unwrap();
        assert_eq!(g.transpose(), gt);
    }

    #[test]
    fn solve_examples() {
        let x = solve_dense(&DenseMatrix::identity(3), &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(x, vec![1.0, 2.0, 3.0]);
        let g = cauchy_matrix(&[1.0], &[1.0]).unwrap();
        assert_eq!(solve_dense(&g, &[2.0]).unwrap(), vec![4.0]);

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_spd(5, &mut rng);
        let c0: Vec<f64> = (0..5).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let rhs = a.matvec(&c0);
        let c = solve_dense(&a, &rhs).unwrap();
        for (u, v) in c.iter().zip(&c0) {
            assert!((u - v).abs() <= 1e-10);
        }
    }

    #[test]
    fn singular_matrix_detected() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(
            solve_dense(&a, &[1.0, 1.0]),
            Err(Error::Singular { column: 1, .. })
        ));
        let z = DenseMatrix::zeros(2, 2);
        assert!(matches!(solve_dense(&z, &[1.0, 1.0]), Err(Error::Singular { .. })));
    }

    #[test]
    fn least_squares_matches_normal_equations() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = DenseMatrix::from_fn(40, 4, |_, _| rng.gen_range(-1.0..1.0));
        let rhs: Vec<f64> = (0..40).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let c = least_squares(&a, &rhs, 1e-13).unwrap();
        let at = a.transpose();
        let normal = at.matmul(&a);
        let c2 = solve_dense(&normal, &at.matvec(&rhs)).unwrap();
        for (u, v) in c.iter().zip(&c2) {
            assert!((u - v).abs() < 1e-10);
        }
    }

    #[test]
    fn least_squares_detects_rank_deficiency() {
        let a = DenseMatrix::from_fn(10, 2, |i, _| i as f64 + 1.0);
        assert!(matches!(
            least_squares(&a, &[1.0; 10], 1e-13),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn jacobi_examples() {
        let e = dense_sym_eigen(&DenseMatrix::from_diagonal(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);
        let a = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let e = dense_sym_eigen(&a).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14 && (e.values[1] - 3.0).abs() < 1e-14);
        let ns = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![0.0, 2.0]]).unwrap();
        assert!(dense_sym_eigen(&ns).is_err());
    }

    #[test]
    fn jacobi_reconstructs_random_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let b = DenseMatrix::from_fn(20, 20, |_, _| rng.gen_range(-1.0..1.0));
        let a = DenseMatrix::from_fn(20, 20, |i, j| b[(i, j)] + b[(j, i)]);
        let e = dense_sym_eigen(&a).unwrap();
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        let r = e.reconstruct();
        let diff = DenseMatrix::from_fn(20, 20, |i, j| r[(i, j)] - a[(i, j)]);
        assert!(diff.frobenius_norm() <= 1e-10 * a.frobenius_norm());
        // A V = V Λ
        let av = a.matmul(&e.vectors);
        let vl = DenseMatrix::from_fn(20, 20, |i, j| e.vectors[(i, j)] * e.values[j]);
        let res = DenseMatrix::from_fn(20, 20, |i, j| av[(i, j)] - vl[(i, j)]);
        assert!(res.frobenius_norm() <= 1e-10 * a.frobenius_norm());
    }
}
