//! Greedy rational approximation with invariant poles.
//!
//! Targets `f` on a positive interval are approximated by partial fractions
//! `Σ c_i / (x + b_i)` whose shifts `b_i` depend only on the greedy model, not
//! on `f`. Applied to a symmetric positive definite operator, every such
//! approximant reduces to the same family of shifted solves `(A + b_i I)^{-1}`.

// `!(x > 0.0)` is deliberate throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fracpde;
pub mod fraction;
pub mod heat;
pub mod io;
pub mod matfun;
pub mod numerics;
pub mod reim;
pub mod roga;
pub mod targets;

pub use error::{Error, Result};
pub use fraction::{geometric_grid, pf_eval, Interval, PartialFraction, SampleGrid};
pub use io::{load_model, save_model, ModelFile};
pub use reim::{
    interpolate, least_squares_fit, lebesgue_estimate, reim_build, sup_error, GreedyTrace,
    ReimConfig, ReimModel,
};
pub use targets::{eval_target, phi, stieltjes_oracle, TargetFunction};
pub use fracpde::{
    assemble_laplacian_2d, dense_oracle_solve, reference_eigen, run_table1, solve_fractional,
    spectral_bounds, Grid2D, SpectralBounds,
};
pub use heat::{adaptive_run, bdf2_coeffs, bdf2_step, euler_step, AdaptiveTrace, Bdf2Coeffs, HeatConfig};
pub use matfun::{apply_matrix_function, shared_pole_family, MatrixFunctionKind};
pub use roga::{project_l2, roga_run, RogaResult};
