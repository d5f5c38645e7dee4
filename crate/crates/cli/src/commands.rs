use std::fmt::Write as _;

use anyhow::{bail, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use reim_core::fracpde::{DEFAULT_ETA, DEFAULT_LAMBDA};
use reim_core::heat::ForcingSymbol;
use reim_core::matfun::SharedSolves;
use reim_core::numerics::{dense_sym_eigen, DenseMatrix, SparseOperator};
use reim_core::{
    adaptive_run, run_table1, shared_pole_family, spectral_bounds, sup_error, Error, Grid2D,
    HeatConfig, ModelFile, MatrixFunctionKind, ReimConfig, ReimModel, SampleGrid, SpectralBounds,
    TargetFunction,
};
use serde_json::json;

use crate::args::{ApproxArgs, Common, Family, HeatArgs, MatfunArgs, SweepArgs, Symbol, Table1Args};
use crate::output::{num, OutDir};

/// Points of the geometric grid on which errors are reported.
const REPORT_POINTS: usize = 20_000;

fn configure(mut config: ReimConfig, common: &Common) -> ReimConfig {
    config.n = common.n as usize;
    if let Some(d) = common.dict_size {
        config.dict_size = d as usize;
    }
    if let Some(s) = common.sigma_size {
        config.sigma_size = s as usize;
    }
    config
}

fn rescaled_model(common: &Common, implied_eta: f64) -> Result<ReimModel> {
    let eta = common.eta.unwrap_or(implied_eta);
    Ok(configure(ReimConfig::rescaled(eta)?, common).build()?)
}

fn matfun_model(common: &Common) -> Result<ReimModel> {
    if common.eta.is_some() {
        return Err(Error::InvalidArgument("--eta does not apply on the fixed interval [1, 1e6]".into()).into());
    }
    Ok(configure(ReimConfig::matrix_function(), common).build()?)
}

fn report_grid(model: &ReimModel) -> Result<SampleGrid> {
    Ok(SampleGrid::geometric(model.interval(), REPORT_POINTS)?)
}

fn peak(t: &TargetFunction, grid: &SampleGrid) -> f64 {
    grid.points().iter().map(|&x| t.value(x).abs()).fold(0.0, f64::max)
}

fn same_poles(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}

fn invariant(ok: bool, what: &str) -> Result<()> {
    if !ok {
        return Err(Error::InvariantViolation(what.into()).into());
    }
    Ok(())
}

/// File-name-safe label, e.g. `pow_0.5` or `recip_0.25_0.001`.
fn label(t: &TargetFunction) -> String {
    match *t {
        TargetFunction::PowerNeg { s } => format!("pow_{s}"),
        TargetFunction::ShiftedRecip { s, d } => format!("recip_{s}_{d}"),
        TargetFunction::Precond { k } => format!("precond_{k}"),
        TargetFunction::ExpNeg { tau } => format!("exp_{tau}"),
        TargetFunction::PhiNeg { tau } => format!("phi_{tau}"),
    }
}

pub fn approx(common: &Common, args: &ApproxArgs, out: &mut OutDir) -> Result<()> {
    let model = rescaled_model(common, DEFAULT_ETA)?;
    for t in &args.targets {
        t.check_interval(&model.interval())?;
    }
    let trace = model.trace();
    invariant(
        trace.sup_errors.windows(2).all(|w| w[1] <= w[0]),
        "greedy error trace is not monotone",
    )?;
    let grid = report_grid(&model)?;

    // row m: greedy error of step m, then sup errors of the m-term interpolants
    let rows: Vec<Vec<f64>> = (1..=model.len())
        .into_par_iter()
        .map(|m| -> Result<Vec<f64>> {
            let prefix = model.prefix(m)?;
            let mut row = vec![trace.sup_errors[m - 1]];
            for t in &args.targets {
                row.push(sup_error(&prefix.interpolate_target(t)?, t, &grid));
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let mut csv = String::from("m,greedy_error");
    for t in &args.targets {
        let _ = write!(csv, ",sup_error_{}", label(t));
    }
    csv.push('\n');
    for (i, row) in rows.iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|v| num(*v)).collect();
        let _ = writeln!(csv, "{},{}", i + 1, cells.join(","));
    }
    out.text("errors.csv", &csv)?;

    let mut poles = String::from("i,b,x\n");
    for (i, (b, x)) in model.poles_b().iter().zip(model.interp_x()).enumerate() {
        let _ = writeln!(poles, "{},{b:e},{x:e}", i + 1);
    }
    out.text("poles.csv", &poles)?;

    let mut leb = String::from("m,lebesgue\n");
    for (i, l) in trace.lebesgue.iter().enumerate() {
        let _ = writeln!(leb, "{},{}", i + 1, num(*l));
    }
    out.text("lebesgue.csv", &leb)?;

    out.model("model.json", &ModelFile::from_model(&model, None)?.with_meta("n", model.len()))?;
    for t in &args.targets {
        let pf = model.interpolate_target(t)?;
        let file = ModelFile::from_model(&model, Some(&pf))?
            .with_meta("target", t)
            .with_meta("sup_error", num(sup_error(&pf, t, &grid)));
        out.model(&format!("fraction_{}.json", label(t)), &file)?;
    }
    Ok(())
}

pub fn table1(common: &Common, args: &Table1Args, out: &mut OutDir) -> Result<()> {
    let mut eta = DEFAULT_ETA;
    for &h in &args.h_list {
        eta = eta.min(spectral_bounds(&Grid2D::table_row(h)?, None)?.eta());
    }
    let model = rescaled_model(common, eta)?;
    let table = run_table1(&args.h_list, &args.s_list, &model, args.jk_max)?;
    out.text("table1.csv", &table.to_csv())?;

    let mut wide = String::from("h");
    for s in &args.s_list {
        let _ = write!(wide, ",error_s{s}");
    }
    for s in &args.s_list {
        let _ = write!(wide, ",order_s{s}");
    }
    wide.push('\n');
    for &h in &args.h_list {
        let rows: Vec<_> = args.s_list.iter().filter_map(|&s| table.get(h, s)).collect();
        let _ = write!(wide, "{}", num(h));
        for r in &rows {
            let _ = write!(wide, ",{}", num(r.l2_error));
        }
        for r in &rows {
            let _ = write!(wide, ",{}", r.order.map(num).unwrap_or_default());
        }
        wide.push('\n');
    }
    out.text("table1_wide.csv", &wide)
}

pub fn heat(common: &Common, args: &HeatArgs, out: &mut OutDir) -> Result<()> {
    let mut config = HeatConfig::new(args.s);
    config.h = args.h;
    config.tol = args.tol;
    config.tau0 = args.tau0;
    config.t_final = args.t_final;
    config.symbol = match args.symbol {
        Symbol::Continuous => ForcingSymbol::Continuous,
        Symbol::Discrete => ForcingSymbol::Discrete,
    };
    let eta = spectral_bounds(&Grid2D::unit_square(args.h)?, None)?.eta();
    let model = rescaled_model(common, eta)?;
    let run = adaptive_run(&config, &model)?;
    invariant(run.poles_invariant, "a step fraction left the model's poles")?;
    out.text("heat_trace.csv", &run.trace.to_csv())?;
    let mut summary = run.summary_json(&config);
    summary.push('\n');
    out.text("heat_summary.json", &summary)
}

/// `Q diag(λ) Qᵀ` with log-uniform `λ ∈ [lo, hi]`, both endpoints included.
fn random_spd(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Result<DenseMatrix> {
    let mut sym = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v: f64 = rng.gen_range(-1.0..1.0);
            sym[(i, j)] = v;
            sym[(j, i)] = v;
        }
    }
    let q = dense_sym_eigen(&sym)?.vectors;
    let mut lambdas: Vec<f64> = (0..n).map(|_| lo * (hi / lo).powf(rng.gen_range(0.0..1.0))).collect();
    lambdas[0] = lo;
    lambdas[n - 1] = hi;
    let ql = DenseMatrix::from_fn(n, n, |i, j| q[(i, j)] * lambdas[j]);
    let a = ql.matmul(&q.transpose());
    Ok(DenseMatrix::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)])))
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn matfun(common: &Common, args: &MatfunArgs, out: &mut OutDir) -> Result<()> {
    let model = matfun_model(common)?;
    let interval = model.interval();
    let bounds = SpectralBounds::new(interval.lo(), interval.hi())?;
    let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
    let n = args.dim as usize;
    let a = random_spd(&mut rng, n, interval.lo(), interval.hi())?;
    let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let eig = dense_sym_eigen(&a)?;
    let op = SparseOperator::from_dense(&a)?;
    let shared = SharedSolves::new(&op, &v, &model, &bounds)?;
    let family = shared_pole_family(&model, &args.taus, &[MatrixFunctionKind::Exp, MatrixFunctionKind::Phi])?;
    invariant(
        family.iter().all(|m| same_poles(m.fraction.poles_b(), model.poles_b())),
        "family fractions do not share the model's poles",
    )?;
    let grid = report_grid(&model)?;

    let mut csv = String::from("tau,kind,sup_error,oracle_error,bound\n");
    let mut fractions = Vec::new();
    for m in &family {
        let t = m.kind.target(m.tau)?;
        let u = shared.apply(&m.fraction)?;
        let oracle = eig.apply_function(&v, |l| t.value(l));
        let diff: Vec<f64> = u.iter().zip(&oracle).map(|(a, b)| a - b).collect();
        let sup = sup_error(&m.fraction, &t, &grid);
        // ‖r(L)v − f(L)v‖ ≤ sup|r − f| ‖v‖ up to the shifted-solve tolerance
        let bound = sup + 1e-9;
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            m.tau,
            m.kind.name(),
            num(sup),
            num(l2(&diff) / l2(&v)),
            num(bound)
        );
        fractions.push(json!({ "tau": m.tau, "kind": m.kind.name(), "residues": m.fraction.residues() }));
    }
    out.text("matfun.csv", &csv)?;
    out.json(
        "matfun_fractions.json",
        &json!({
            "interval": [interval.lo(), interval.hi()],
            "dim": n,
            "seed": common.seed,
            "poles": model.poles_b(),
            "shift_solve_iterations": shared.iterations(),
            "fractions": fractions,
        }),
    )
}

pub fn sweep(common: &Common, args: &SweepArgs, out: &mut OutDir) -> Result<()> {
    let model = match args.family {
        Family::Fs | Family::Precond => rescaled_model(common, DEFAULT_ETA)?,
        Family::Expphi => matfun_model(common)?,
    };
    if args.family == Family::Fs && !(args.s > 0.0 && args.s < 1.0) {
        bail!(Error::InvalidArgument(format!("--s must lie in (0, 1), got {}", args.s)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
    let mut samples: Vec<(f64, TargetFunction)> = Vec::new();
    for _ in 0..args.count {
        match args.family {
            Family::Fs => {
                let d = rng.gen_range(1.0..1e3);
                samples.push((d, TargetFunction::shifted_recip(args.s, d / DEFAULT_LAMBDA.powf(args.s))?));
            }
            Family::Precond => {
                let k = rng.gen_range(1e-6..1.0);
                samples.push((k, TargetFunction::precond(k)?));
            }
            Family::Expphi => {
                let tau = rng.gen_range(0.002..1.0);
                samples.push((tau, TargetFunction::exp_neg(tau)?));
                samples.push((tau, TargetFunction::phi_neg(tau)?));
            }
        }
    }
    let grid = report_grid(&model)?;
    let errors: Vec<(f64, f64)> = samples
        .iter()
        .map(|(_, t)| -> Result<(f64, f64)> {
            let e = sup_error(&model.interpolate_target(t)?, t, &grid);
            Ok((e, e / peak(t, &grid)))
        })
        .collect::<Result<_>>()?;

    let (family, param) = match args.family {
        Family::Fs => ("fs", "d"),
        Family::Precond => ("precond", "k"),
        Family::Expphi => ("expphi", "tau"),
    };
    let mut csv = format!("index,target,{param},sup_error,relative_error\n");
    for (i, ((p, t), (e, r))) in samples.iter().zip(&errors).enumerate() {
        let kind = match t {
            TargetFunction::PhiNeg { .. } => "phi",
            TargetFunction::ExpNeg { .. } => "exp",
            _ => family,
        };
        let _ = writeln!(csv, "{i},{kind},{p},{},{}", num(*e), num(*r));
    }
    out.text(&format!("sweep_{family}.csv"), &csv)?;
    let max_of = |f: fn(&(f64, f64)) -> f64| errors.iter().map(f).fold(0.0, f64::max);
    out.json(
        &format!("sweep_{family}_summary.json"),
        &json!({
            "family": family,
            "count": args.count,
            "seed": common.seed,
            "interval": [model.interval().lo(), model.interval().hi()],
            "n": model.len(),
            "max_sup_error": max_of(|e| e.0),
            "max_relative_error": max_of(|e| e.1),
        }),
    )
}
