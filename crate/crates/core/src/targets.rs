//! Target functions for the rational interpolants and the Stieltjes-integral
//! oracle for `1 / (x^s + k)`.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fraction::Interval;
use crate::numerics::quadrature::Quadrature;

/// Below this `|z|` the φ function is evaluated from its Taylor series.
pub const PHI_SERIES_THRESHOLD: f64 = 1e-4;

/// Scalar targets.
///
/// `Precond(K)` is `(x^{-1/2} + K x^{1/2})^{-1}` with unit viscosity;
/// `ShiftedRecip(s, d)` is `1 / (x^s + d)` where `d` is already rescaled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetFunction {
    PowerNeg { s: f64 },
    ShiftedRecip { s: f64, d: f64 },
    Precond { k: f64 },
    ExpNeg { tau: f64 },
    PhiNeg { tau: f64 },
}

impl TargetFunction {
    pub fn power_neg(s: f64) -> Result<Self> {
        TargetFunction::PowerNeg { s }.validated()
    }

    pub fn shifted_recip(s: f64, d: f64) -> Result<Self> {
        TargetFunction::ShiftedRecip { s, d }.validated()
    }

    pub fn precond(k: f64) -> Result<Self> {
        TargetFunction::Precond { k }.validated()
    }

    pub fn exp_neg(tau: f64) -> Result<Self> {
        TargetFunction::ExpNeg { tau }.validated()
    }

    pub fn phi_neg(tau: f64) -> Result<Self> {
        TargetFunction::PhiNeg { tau }.validated()
    }

    /// Check parameter ranges.
    pub fn validated(self) -> Result<Self> {
        let ok = match self {
            TargetFunction::PowerNeg { s } => s > 0.0 && s < 1.0,
            // s = 1 is admitted here: the integer-order heat equation reuses
            // the same shifted reciprocal.
            TargetFunction::ShiftedRecip { s, d } => s > 0.0 && s <= 1.0 && d >= 0.0 && d.is_finite(),
            TargetFunction::Precond { k } => k > 0.0 && k.is_finite(),
            TargetFunction::ExpNeg { tau } | TargetFunction::PhiNeg { tau } => {
                tau > 0.0 && tau.is_finite()
            }
        };
        if ok {
            Ok(self)
        } else {
            Err(Error::invalid(format!("target parameters out of range: {self}")))
        }
    }

    fn needs_positive_argument(&self) -> bool {
        matches!(
            self,
            TargetFunction::PowerNeg { .. }
                | TargetFunction::ShiftedRecip { .. }
                | TargetFunction::Precond { .. }
        )
    }

    /// Evaluate with domain checking.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if self.needs_positive_argument() && !(x > 0.0) {
            return Err(Error::invalid(format!("{self} needs x > 0, got {x}")));
        }
        if !x.is_finite() {
            return Err(Error::invalid(format!("non-finite argument {x}")));
        }
        Ok(self.value(x))
    }

    /// Evaluate without domain checks.
    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            TargetFunction::PowerNeg { s } => x.powf(-s),
            TargetFunction::ShiftedRecip { s, d } => 1.0 / (x.powf(s) + d),
            TargetFunction::Precond { k } => {
                let r = x.sqrt();
                r / (1.0 + k * x)
            }
            TargetFunction::ExpNeg { tau } => (-tau * x).exp(),
            TargetFunction::PhiNeg { tau } => phi(-tau * x),
        }
    }

    /// Checks that every point of `interval` is in the domain.
    pub fn check_interval(&self, interval: &Interval) -> Result<()> {
        self.validated()?;
        if self.needs_positive_argument() && !(interval.lo() > 0.0) {
            return Err(Error::invalid(format!("{self} is singular on {interval:?}")));
        }
        Ok(())
    }
}

impl fmt::Display for TargetFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetFunction::PowerNeg { s } => write!(f, "x^(-{s})"),
            TargetFunction::ShiftedRecip { s, d } => write!(f, "1/(x^{s} + {d})"),
            TargetFunction::Precond { k } => write!(f, "1/(x^(-1/2) + {k} x^(1/2))"),
            TargetFunction::ExpNeg { tau } => write!(f, "exp(-{tau} x)"),
            TargetFunction::PhiNeg { tau } => write!(f, "phi(-{tau} x)"),
        }
    }
}

/// `φ(z) = (e^z − 1) / z`, with `φ(0) = 1`.
pub fn phi(z: f64) -> f64 {
    if z.abs() < PHI_SERIES_THRESHOLD {
        // next omitted term z^4/120 is below 1e-18 here
        1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0))
    } else {
        z.exp_m1() / z
    }
}

/// Evaluate a target. Shorthand for [`TargetFunction::eval`].
pub fn eval_target(t: &TargetFunction, x: f64) -> Result<f64> {
    t.eval(x)
}

/// Default point budget of the Stieltjes quadrature over an 80-unit window.
pub const STIELTJES_DEFAULT_POINTS: usize = 2000;
const STIELTJES_ORDER: usize = 20;
/// Tails are cut where the integrand has decayed by `e^{-TAIL_DECAY}`.
const TAIL_DECAY: f64 = 40.0;

/// `1 / (x^s + k)` through its Stieltjes representation
///
/// `(sin πs / π) ∫_0^∞ t^s / ((t^s cos πs + k)² + (t^s sin πs)²) · dt / (x + t)`,
///
/// integrated in `u = ln t` with composite Gauss–Legendre. The `u`-window is
/// centred on the integrand's bulk and extended by `40 / rate` on each side,
/// where `rate` is the exponential decay rate of that tail (`1 − s` or `1 + s`
/// on the left, `s` on the right). `quad_points` fixes the density: that many
/// points per 80 units of `u`. For `k > 0` panel breaks are graded
/// geometrically towards the peak at `u = ln(k)/s`, which sharpens as `s → 1`.
pub fn stieltjes_oracle(s: f64, k: f64, x: f64, quad_points: usize) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::invalid(format!("Stieltjes oracle needs s in (0,1), got {s}")));
    }
    if !(k >= 0.0 && k.is_finite()) {
        return Err(Error::invalid(format!("Stieltjes oracle needs k >= 0, got {k}")));
    }
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::invalid(format!("Stieltjes oracle needs x > 0, got {x}")));
    }
    if quad_points == 0 {
        return Err(Error::invalid("quadrature needs at least one point"));
    }
    let ln_x = x.ln();
    // where t^s = k
    let ln_k = if k > 0.0 { Some(k.ln() / s) } else { None };
    let left_rate = if k > 0.0 { 1.0 + s } else { 1.0 - s };
    let right_rate = s;
    let u_lo = ln_k.map_or(ln_x, |l| l.min(ln_x)) - TAIL_DECAY / left_rate;
    let u_hi = ln_k.map_or(ln_x, |l| l.max(ln_x)) + TAIL_DECAY / right_rate;

    let density = quad_points as f64 / 80.0;
    let mut breaks = vec![u_lo, u_hi];
    if let Some(peak) = ln_k {
        // near s = 1 the integrand peaks at t^s = k with width ~ sin(πs)/s
        let width = (PI * s).sin() / s;
        let mut offset = 0.25 * width;
        while offset < u_hi - u_lo {
            for u in [peak - offset, peak + offset] {
                if u > u_lo && u < u_hi {
                    breaks.push(u);
                }
            }
            offset *= 2.0;
        }
        if peak > u_lo && peak < u_hi {
            breaks.push(peak);
        }
    }
    breaks.sort_by(f64::total_cmp);
    let mut edges = vec![u_lo];
    for w in breaks.windows(2) {
        let panels = ((w[1] - w[0]) * density / STIELTJES_ORDER as f64).ceil().max(1.0) as usize;
        let step = (w[1] - w[0]) / panels as f64;
        for p in 1..panels {
            edges.push(w[0] + step * p as f64);
        }
        edges.push(w[1]);
    }
    let quad = Quadrature::on_edges(&edges, STIELTJES_ORDER)?;

    let (sin_ps, cos_ps) = (PI * s).sin_cos();
    let prefactor = sin_ps / PI;
    let integral = quad.integrate(|u| {
        let ts = (s * u).exp();
        let denom = ts * ts + 2.0 * k * ts * cos_ps + k * k;
        // t / (x + t) written to avoid overflow of e^{-u}
        let weight = 1.0 / (1.0 + x * (-u).exp());
        ts / denom * weight
    });
    Ok(prefactor * integral)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_examples() {
        let p = TargetFunction::power_neg(0.5).unwrap();
        assert!((p.eval(1e-4).unwrap() - 100.0).abs() < 1e-12);
        let phi1 = TargetFunction::phi_neg(1.0).unwrap();
        assert!((phi1.eval(1.0).unwrap() - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert!((phi1.eval(1.0).unwrap() - 0.6321205588).abs() < 1e-10);
        assert_eq!(TargetFunction::precond(1.0).unwrap().eval(1.0).unwrap(), 0.5);
        assert_eq!(TargetFunction::phi_neg(3.0).unwrap().eval(0.0).unwrap(), 1.0);
    }

    #[test]
    fn domain_and_parameter_errors() {
        assert!(TargetFunction::power_neg(0.5).unwrap().eval(0.0).is_err());
        assert!(TargetFunction::power_neg(1.5).is_err());
        assert!(TargetFunction::shifted_recip(0.5, -1.0).is_err());
        assert!(TargetFunction::precond(0.0).is_err());
        assert!(TargetFunction::exp_neg(-1.0).is_err());
        assert!(TargetFunction::exp_neg(1.0).unwrap().eval(-2.0).is_ok());
    }

    #[test]
    fn phi_series_branch_is_accurate() {
        // reference from the series with many terms
        for &z in &[1e-5, -1e-5, 9.9e-5, -9.9e-5, 1e-9, -3e-7] {
            let mut term = 1.0;
            let mut sum = 1.0;
            for n in 2..20 {
                term *= z / n as f64;
                sum += term;
            }
            assert!((phi(z) - sum).abs() <= 1e-15 * sum, "z={z}");
        }
    }

    #[test]
    fn phi_identity() {
        for &tau in &[0.002, 0.1, 1.0] {
            let t = TargetFunction::phi_neg(tau).unwrap();
            for k in 0..50 {
                let tx = 1e-3 * (2e4f64).powf(k as f64 / 49.0);
                let x = tx / tau;
                let lhs = t.value(x) * (-tau * x);
                let rhs = (-tau * x).exp() - 1.0;
                assert!((lhs - rhs).abs() <= 1e-13 * rhs.abs(), "tau={tau} x={x}");
            }
        }
    }

    #[test]
    fn stieltjes_examples() {
        let eta: f64 = 1e-6;
        let v = stieltjes_oracle(0.5, 0.0, eta, STIELTJES_DEFAULT_POINTS).unwrap();
        assert!((v - eta.powf(-0.5)).abs() <= 1e-10 * eta.powf(-0.5));
        let v = stieltjes_oracle(0.5, 1.0, 1.0, STIELTJES_DEFAULT_POINTS).unwrap();
        assert!((v - 0.5).abs() <= 1e-10 * 0.5);
        let exact = 1.0 / (2f64.powf(0.25) + 3.0);
        let v = stieltjes_oracle(0.25, 3.0, 2.0, STIELTJES_DEFAULT_POINTS).unwrap();
        assert!((v - exact).abs() <= 1e-10 * exact);
        assert!(stieltjes_oracle(1.0, 0.0, 1.0, 100).is_err());
        assert!(stieltjes_oracle(0.0, 0.0, 1.0, 100).is_err());
    }
}
