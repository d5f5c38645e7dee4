//! Fractional heat equation `u_t + A^s u = f` by implicit Euler with a
//! variable-step BDF2 reference solution driving step-size control.
//!
//! Both schemes reduce to shifted solves with the model's poles:
//! Euler interpolates `(x^s + 1/(τΛ^s))^{-1}`, BDF2 interpolates
//! `(x^s + κ₁/Λ^s)^{-1}`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fracpde::{assemble_laplacian_2d, check_model, spectral_bounds, Grid2D, SpectralBounds, SHIFT_SOLVE_TOL};
use crate::fraction::PartialFraction;
use crate::numerics::sparse::{ShiftedSolver, SparseOperator};
use crate::reim::ReimModel;
use crate::targets::TargetFunction;

pub const SAFETY: f64 = 0.8;
pub const MAX_CONSECUTIVE_REJECTIONS: usize = 100;

/// Variable-step BDF2 weights: `v′(t_{m+1}) ≈ κ₁ v_{m+1} + κ₀ v_m + κ₋₁ v_{m−1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bdf2Coeffs {
    pub k1: f64,
    pub k0: f64,
    pub km1: f64,
}

/// Weights for the new step `τm` after the previous step `τm1`.
pub fn bdf2_coeffs(tau_m: f64, tau_m1: f64) -> Result<Bdf2Coeffs> {
    if !(tau_m > 0.0 && tau_m1 > 0.0 && tau_m.is_finite() && tau_m1.is_finite()) {
        return Err(Error::invalid(format!(
            "BDF2 steps must be positive, got {tau_m} and {tau_m1}"
        )));
    }
    let sum = tau_m + tau_m1;
    Ok(Bdf2Coeffs {
        k1: (2.0 * tau_m + tau_m1) / (tau_m * sum),
        k0: -sum / (tau_m1 * tau_m),
        km1: tau_m / (tau_m1 * sum),
    })
}

/// `τ_new = 0.8 τ (tol/err)^{1/2}`; a zero estimate gives `+∞` (callers clamp).
pub fn propose_step(tau: f64, tol: f64, err: f64) -> f64 {
    if err == 0.0 {
        f64::INFINITY
    } else {
        SAFETY * tau * (tol / err).sqrt()
    }
}

/// Interpolant of `(x^s + 1/(τΛ^s))^{-1}` used by the Euler step.
pub fn euler_fraction(bounds: &SpectralBounds, s: f64, tau: f64, model: &ReimModel) -> Result<PartialFraction> {
    if !(tau > 0.0) {
        return Err(Error::invalid(format!("step size must be positive, got {tau}")));
    }
    let d = 1.0 / (tau * bounds.lambda_max_ub.powf(s));
    model.interpolate_target(&TargetFunction::shifted_recip(s, d)?)
}

/// Interpolant of `(x^s + κ₁/Λ^s)^{-1}` used by the BDF2 step.
pub fn bdf2_fraction(bounds: &SpectralBounds, s: f64, coeffs: &Bdf2Coeffs, model: &ReimModel) -> Result<PartialFraction> {
    let d = coeffs.k1 / bounds.lambda_max_ub.powf(s);
    model.interpolate_target(&TargetFunction::shifted_recip(s, d)?)
}

fn apply_rescaled(
    a: &SparseOperator,
    bounds: &SpectralBounds,
    s: f64,
    pf: &PartialFraction,
    rhs: Vec<f64>,
) -> Result<Vec<f64>> {
    let scale = bounds.lambda_max_ub.powf(-s);
    let rhs: Vec<f64> = rhs.into_iter().map(|v| v * scale).collect();
    let scaled = a.scaled(1.0 / bounds.lambda_max_ub);
    ShiftedSolver::new(&scaled, pf.poles_b(), SHIFT_SOLVE_TOL).apply(pf, &rhs)
}

fn check_len(n: usize, vs: &[&[f64]]) -> Result<()> {
    if vs.iter().any(|v| v.len() != n) {
        return Err(Error::invalid(format!("state vectors must have length {n}")));
    }
    Ok(())
}

/// `u^m = Σ c_i (A/Λ + b_i I)^{-1} (u^{m−1}/τ + f^m) / Λ^s`.
#[allow(clippy::too_many_arguments)]
pub fn euler_step(
    a: &SparseOperator,
    bounds: &SpectralBounds,
    s: f64,
    u_prev: &[f64],
    f_m: &[f64],
    tau: f64,
    model: &ReimModel,
) -> Result<Vec<f64>> {
    check_len(a.dim(), &[u_prev, f_m])?;
    let pf = euler_fraction(bounds, s, tau, model)?;
    let rhs = u_prev.iter().zip(f_m).map(|(u, f)| u / tau + f).collect();
    apply_rescaled(a, bounds, s, &pf, rhs)
}

/// `ũ^{m+1} = Σ c̃_i (A/Λ + b_i I)^{-1} (f^{m+1} − κ₀ u^m − κ₋₁ u^{m−1}) / Λ^s`.
#[allow(clippy::too_many_arguments)]
pub fn bdf2_step(
    a: &SparseOperator,
    bounds: &SpectralBounds,
    s: f64,
    u_m: &[f64],
    u_m1: &[f64],
    f_next: &[f64],
    coeffs: &Bdf2Coeffs,
    model: &ReimModel,
) -> Result<Vec<f64>> {
    check_len(a.dim(), &[u_m, u_m1, f_next])?;
    let pf = bdf2_fraction(bounds, s, coeffs, model)?;
    let rhs = f_next
        .iter()
        .zip(u_m.iter().zip(u_m1))
        .map(|(f, (u0, u1))| f - coeffs.k0 * u0 - coeffs.km1 * u1)
        .collect();
    apply_rescaled(a, bounds, s, &pf, rhs)
}

/// Which eigenvalue of the `sin(πx) sin(πy)` mode enters the forcing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ForcingSymbol {
    /// `2π²`, the continuous eigenvalue.
    Continuous,
    /// `2 (4/h²) sin²(πh/2)`, the discrete eigenvalue; isolates temporal error.
    Discrete,
}

/// Manufactured problem on `(0, 1)²` with exact solution
/// `e^{−t/20} cos(2πt) sin(πx) sin(πy)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatConfig {
    pub h: f64,
    pub s: f64,
    pub tol: f64,
    pub tau0: f64,
    pub t_final: f64,
    pub tau_min: f64,
    /// `None` means `T/10`.
    pub tau_max: Option<f64>,
    pub symbol: ForcingSymbol,
}

impl HeatConfig {
    pub fn new(s: f64) -> Self {
        HeatConfig {
            h: 2f64.powi(-5),
            s,
            tol: 1e-4,
            tau0: 1e-3,
            t_final: 1.0,
            tau_min: 1e-8,
            tau_max: None,
            symbol: ForcingSymbol::Continuous,
        }
    }

    fn tau_max(&self) -> f64 {
        self.tau_max.unwrap_or(self.t_final / 10.0)
    }

    fn validate(&self) -> Result<()> {
        let positive = [self.h, self.tol, self.tau0, self.t_final, self.tau_min, self.tau_max()];
        if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::invalid("heat parameters h, tol, tau0, T and the clamps must be positive"));
        }
        if !(self.s > 0.0 && self.s <= 1.0) {
            return Err(Error::invalid(format!("heat equation needs s in (0, 1], got {}", self.s)));
        }
        if self.tau_min > self.tau_max() {
            return Err(Error::invalid("tau_min exceeds tau_max"));
        }
        Ok(())
    }
}

/// `T(t) = e^{−t/20} cos(2πt)`.
pub fn exact_time_factor(t: f64) -> f64 {
    (-t / 20.0).exp() * (2.0 * PI * t).cos()
}

fn exact_time_derivative(t: f64) -> f64 {
    (-t / 20.0).exp() * (-(2.0 * PI * t).cos() / 20.0 - 2.0 * PI * (2.0 * PI * t).sin())
}

/// One attempted step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepRecord {
    /// Time reached if accepted.
    pub t: f64,
    pub tau: f64,
    /// `None` for the bootstrap step, which has no estimate.
    pub err: Option<f64>,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct AdaptiveTrace {
    pub steps: Vec<StepRecord>,
    pub accepted: usize,
    pub rejected: usize,
}

impl AdaptiveTrace {
    fn push(&mut self, rec: StepRecord) {
        if rec.accepted {
            self.accepted += 1;
        } else {
            self.rejected += 1;
        }
        self.steps.push(rec);
    }

    pub fn accepted_steps(&self) -> impl Iterator<Item = &StepRecord> {
        self.steps.iter().filter(|r| r.accepted)
    }

    /// `t,tau,err,accepted` with 6 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,tau,err,accepted\n");
        for r in &self.steps {
            let err = r.err.map(|e| format!("{e:.5e}")).unwrap_or_default();
            let _ = writeln!(out, "{:.5e},{:.5e},{},{}", r.t, r.tau, err, u8::from(r.accepted));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct HeatRun {
    pub trace: AdaptiveTrace,
    pub grid: Grid2D,
    pub final_time: f64,
    pub final_state: Vec<f64>,
    /// `h ‖u_h(T) − u(T)‖₂`.
    pub final_l2_error: f64,
    /// Every fraction used shared the model's poles bit for bit.
    pub poles_invariant: bool,
    /// Number of fractions built (Euler and BDF2).
    pub fractions_built: usize,
}

#[derive(Serialize)]
struct Summary {
    s: f64,
    h: f64,
    tol: f64,
    tau0: f64,
    t_final: f64,
    symbol: ForcingSymbol,
    accepted: usize,
    rejected: usize,
    final_l2_error: f64,
    poles_invariant: bool,
}

impl HeatRun {
    pub fn summary_json(&self, config: &HeatConfig) -> String {
        serde_json::to_string_pretty(&Summary {
            s: config.s,
            h: config.h,
            tol: config.tol,
            tau0: config.tau0,
            t_final: config.t_final,
            symbol: config.symbol,
            accepted: self.trace.accepted,
            rejected: self.trace.rejected,
            final_l2_error: self.final_l2_error,
            poles_invariant: self.poles_invariant,
        })
        .expect("summary serializes")
    }
}

/// Adaptive implicit Euler with BDF2 error estimates.
///
/// The first step is taken at `τ0` and accepted without an estimate, and `τ0`
/// is proposed again for the second. Steps are clamped to
/// `[tau_min, tau_max]` and the last one is shortened to land on `T`.
pub fn adaptive_run(config: &HeatConfig, model: &ReimModel) -> Result<HeatRun> {
    config.validate()?;
    let grid = Grid2D::unit_square(config.h)?;
    let a = assemble_laplacian_2d(&grid);
    let bounds = spectral_bounds(&grid, None)?;
    check_model(&bounds, model)?;
    let s = config.s;
    let mode = grid.sample(|x, y| (PI * x).sin() * (PI * y).sin());
    let mu = match config.symbol {
        ForcingSymbol::Continuous => 2.0 * PI * PI,
        ForcingSymbol::Discrete => grid.lambda_min(),
    };
    let mu_s = mu.powf(s);
    let forcing = |t: f64| -> Vec<f64> {
        let amp = exact_time_derivative(t) + mu_s * exact_time_factor(t);
        mode.iter().map(|v| amp * v).collect()
    };

    let t_end = config.t_final;
    let tau_max = config.tau_max();
    let clamp = |tau: f64| tau.clamp(config.tau_min, tau_max);
    let mut trace = AdaptiveTrace::default();
    let mut poles_invariant = true;
    let mut fractions_built = 0;
    let mut check = |pf: &PartialFraction| {
        fractions_built += 1;
        poles_invariant &= pf
            .poles_b()
            .iter()
            .zip(model.poles_b())
            .all(|(a, b)| a.to_bits() == b.to_bits())
            && pf.len() == model.len();
    };

    let u0: Vec<f64> = mode.clone();
    let tau_first = clamp(config.tau0).min(t_end);
    let t1 = if tau_first >= t_end { t_end } else { tau_first };
    let pf = euler_fraction(&bounds, s, tau_first, model)?;
    check(&pf);
    let u1 = euler_step(&a, &bounds, s, &u0, &forcing(t1), tau_first, model)?;
    trace.push(StepRecord {
        t: t1,
        tau: tau_first,
        err: None,
        accepted: true,
    });

    let mut t = t1;
    let mut u_prev = u0;
    let mut u = u1;
    let mut tau_prev = tau_first;
    let mut proposal = clamp(config.tau0);
    let mut consecutive = 0;
    while t < t_end {
        let mut tau = clamp(proposal);
        let landing = t + tau >= t_end * (1.0 - 1e-14);
        if landing {
            tau = t_end - t;
        }
        let t_next = if landing { t_end } else { t + tau };
        let f_next = forcing(t_next);
        let coeffs = bdf2_coeffs(tau, tau_prev)?;
        check(&euler_fraction(&bounds, s, tau, model)?);
        check(&bdf2_fraction(&bounds, s, &coeffs, model)?);
        let u_euler = euler_step(&a, &bounds, s, &u, &f_next, tau, model)?;
        let u_ref = bdf2_step(&a, &bounds, s, &u, &u_prev, &f_next, &coeffs, model)?;
        let diff: Vec<f64> = u_euler.iter().zip(&u_ref).map(|(a, b)| a - b).collect();
        let err = grid.l2_norm(&diff);
        let accepted = err <= config.tol;
        trace.push(StepRecord {
            t: t_next,
            tau,
            err: Some(err),
            accepted,
        });
        proposal = clamp(propose_step(tau, config.tol, err));
        if accepted {
            consecutive = 0;
            u_prev = std::mem::replace(&mut u, u_euler);
            tau_prev = tau;
            t = t_next;
        } else {
            consecutive += 1;
            if consecutive > MAX_CONSECUTIVE_REJECTIONS {
                return Err(Error::ControllerFailure {
                    rejections: consecutive,
                    t,
                });
            }
        }
    }

    let exact_t = exact_time_factor(t);
    let diff: Vec<f64> = u.iter().zip(&mode).map(|(v, m)| v - exact_t * m).collect();
    Ok(HeatRun {
        final_l2_error: grid.l2_norm(&diff),
        trace,
        grid,
        final_time: t,
        final_state: u,
        poles_invariant,
        fractions_built,
    })
}
