mod common;

use std::f64::consts::PI;
use std::sync::OnceLock;

use common::*;
use proptest::prelude::*;
use reim_core::fracpde::{solve_fractional_many, DEFAULT_JK_MAX};
use reim_core::numerics::{dense_sym_eigen, SparseOperator};
use reim_core::{
    assemble_laplacian_2d, dense_oracle_solve, interpolate, reference_eigen, run_table1,
    solve_fractional, spectral_bounds, sup_error, Grid2D, ReimConfig, ReimModel, SampleGrid,
    SpectralBounds, TargetFunction,
};

fn model() -> &'static ReimModel {
    static MODEL: OnceLock<ReimModel> = OnceLock::new();
    MODEL.get_or_init(|| ReimConfig::rescaled(1e-6).unwrap().build().unwrap())
}

fn scalar_sup(s: f64) -> f64 {
    let m = model();
    let t = TargetFunction::power_neg(s).unwrap();
    let pf = interpolate(m, &t).unwrap();
    sup_error(&pf, &t, &SampleGrid::geometric(m.interval(), 20_000).unwrap())
}

#[test]
fn laplacian_is_exactly_symmetric() {
    for m in [1, 2, 5, 17] {
        let a = assemble_laplacian_2d(&Grid2D::new(-1.0, 2.0, m).unwrap());
        assert!(a.is_symmetric_exact());
        assert_eq!(a.dim(), m * m);
    }
}

#[test]
fn smallest_eigenvalue_matches_formula() {
    for m in [3, 7, 15] {
        let grid = Grid2D::new(-1.0, 2.0, m).unwrap();
        let eig = dense_sym_eigen(&assemble_laplacian_2d(&grid).to_dense()).unwrap();
        let formula = grid.lambda_min();
        assert!((eig.values[0] / formula - 1.0).abs() <= 1e-8, "M = {m}");
    }
}

#[test]
fn lower_bound_tends_to_first_continuous_eigenvalue() {
    let grid = Grid2D::square(2f64.powi(-12)).unwrap();
    let b = spectral_bounds(&grid, None).unwrap();
    assert!((b.lambda_min_lb - PI * PI / 2.0).abs() <= 1e-5);
    assert!(b.lambda_min_lb < PI * PI / 2.0);
}

#[test]
fn reference_is_symmetric() {
    let grid = Grid2D::table_row(2f64.powi(-4)).unwrap();
    let u = reference_eigen(0.5, &grid, 199).unwrap();
    let m = grid.m();
    let mut asym = 0.0f64;
    for j in 0..m {
        for i in 0..m {
            let v = u[grid.index(i, j)];
            asym = asym.max((v - u[grid.index(j, i)]).abs());
            asym = asym.max((v - u[grid.index(m - 1 - i, j)]).abs());
        }
    }
    assert!(asym <= 1e-12, "asymmetry {asym}");
}

#[test]
fn reference_truncation_is_converged_at_the_centre() {
    let grid = Grid2D::table_row(2f64.powi(-4)).unwrap();
    let c = grid.index(grid.m() / 2, grid.m() / 2);
    assert_eq!(grid.coord(grid.m() / 2), 0.0);
    let coarse = reference_eigen(0.5, &grid, 999).unwrap()[c];
    let fine = reference_eigen(0.5, &grid, 1999).unwrap()[c];
    assert!((coarse - fine).abs() <= 1e-6);
}

#[test]
fn scaled_identity_is_the_scalar_case() {
    let n = 6;
    let lambda = 1e6;
    let a = SparseOperator::diagonal(&vec![lambda; n]);
    let bounds = SpectralBounds::new(1.0, lambda).unwrap();
    let f: Vec<f64> = (0..n).map(|i| i as f64 - 2.5).collect();
    for s in [0.25, 0.5, 0.9] {
        let u = solve_fractional(&a, &bounds, s, &f, model()).unwrap();
        let pf = interpolate(model(), &TargetFunction::power_neg(s).unwrap()).unwrap();
        let r1 = pf.value(1.0);
        assert!((r1 - 1.0).abs() <= scalar_sup(s));
        for (ui, fi) in u.iter().zip(&f) {
            assert!((ui - r1 * fi / lambda.powf(s)).abs() <= 1e-12 * fi.abs().max(1.0) / lambda.powf(s));
        }
    }
}

#[test]
fn small_laplacian_matches_dense_oracle() {
    let grid = Grid2D::new(-1.0, 2.0, 9).unwrap();
    let a = assemble_laplacian_2d(&grid);
    let bounds = spectral_bounds(&grid, None).unwrap();
    let f = vec![1.0; grid.len()];
    let u = solve_fractional(&a, &bounds, 0.5, &f, model()).unwrap();
    let oracle = dense_oracle_solve(&a.to_dense(), 0.5, &f).unwrap();
    let bound = scalar_sup(0.5) * norm(&f) / bounds.lambda_max_ub.sqrt() + 1e-9 * norm(&f);
    assert!(diff_norm(&u, &oracle) <= bound);
}

#[test]
fn many_powers_agree_with_single_solves() {
    let grid = Grid2D::new(-1.0, 2.0, 7).unwrap();
    let a = assemble_laplacian_2d(&grid);
    let bounds = spectral_bounds(&grid, None).unwrap();
    let f = grid.sample(|x, y| x * x + y);
    let s_list = [0.25, 0.5, 0.75];
    let many = solve_fractional_many(&a, &bounds, &s_list, &f, model()).unwrap();
    for (s, u) in s_list.iter().zip(&many) {
        let single = solve_fractional(&a, &bounds, *s, &f, model()).unwrap();
        assert_eq!(&single, u);
    }
}

#[test]
fn table_entry_for_h_one_sixteenth() {
    let table = run_table1(&[2f64.powi(-4)], &[0.5, 0.95], model(), DEFAULT_JK_MAX).unwrap();
    let e = table.get(2f64.powi(-4), 0.5).unwrap().l2_error;
    assert!((e / 4.8415e-3 - 1.0).abs() <= 0.05, "{e}");
    let e = table.get(2f64.powi(-4), 0.95).unwrap().l2_error;
    assert!((e / 1.2359e-3 - 1.0).abs() <= 0.05, "{e}");
    assert!(table.rows.iter().all(|r| r.order.is_none()));
}

#[test]
fn table_csv_has_header_and_rows() {
    let table = run_table1(&[2f64.powi(-3), 2f64.powi(-4)], &[0.5], model(), 199).unwrap();
    let csv = table.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("h,s,"));
}

#[test]
fn increasing_mesh_list_is_rejected() {
    assert!(run_table1(&[2f64.powi(-4), 2f64.powi(-3)], &[0.5], model(), 99).is_err());
}

#[test]
fn model_must_reach_the_rescaled_spectrum() {
    let short = ReimConfig::rescaled(1e-2).unwrap().with_n(5).build().unwrap();
    let grid = Grid2D::new(-1.0, 2.0, 5).unwrap();
    let a = assemble_laplacian_2d(&grid);
    let bounds = spectral_bounds(&grid, None).unwrap();
    assert!(solve_fractional(&a, &bounds, 0.5, &[1.0; 25], &short).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn error_transfer_bound(seed in 0u64..1_000_000, n in 2usize..40, s in 0.1f64..0.95) {
        let mut r = rng(seed);
        let lambda = 1e6;
        let (a, _) = random_spd(&mut r, n, 1.0, lambda);
        let f = random_vector(&mut r, n);
        let bounds = SpectralBounds::new(1.0, lambda).unwrap();
        let u = solve_fractional(&to_sparse(&a), &bounds, s, &f, model()).unwrap();
        let oracle = dense_oracle_solve(&a, s, &f).unwrap();
        let bound = scalar_sup(s) * norm(&f) / lambda.powf(s) + 1e-9 * norm(&f);
        prop_assert!(diff_norm(&u, &oracle) <= bound, "{} > {}", diff_norm(&u, &oracle), bound);
    }
}
