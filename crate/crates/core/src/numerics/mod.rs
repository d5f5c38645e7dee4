//! Linear algebra, quadrature and closed-form inner products.

pub mod dense;
pub mod gram;
pub mod quadrature;
pub mod sparse;

pub use dense::{
    cauchy_matrix, dense_sym_eigen, least_squares, solve_dense, DenseMatrix, IncrementalQr,
    LuFactors, SymmetricEigen,
};
pub use gram::gram_entry;
pub use quadrature::{gauss_legendre, gauss_legendre_panels, Quadrature};
pub use sparse::{cg_solve, CgOutcome, ShiftedSolutions, ShiftedSolver, SparseOperator};
