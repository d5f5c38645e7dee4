//! `exp(−τL) v` and `φ(−τL) v` for symmetric positive definite `L` through
//! shared-pole partial fractions `Σ c_i (L + b_i I)^{-1} v`.
//!
//! The model interval must cover the spectrum of `L` directly; no rescaling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fracpde::{SpectralBounds, SHIFT_SOLVE_TOL};
use crate::fraction::PartialFraction;
use crate::numerics::sparse::{ShiftedSolutions, ShiftedSolver, SparseOperator};
use crate::reim::ReimModel;
use crate::targets::TargetFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixFunctionKind {
    Exp,
    Phi,
}

impl MatrixFunctionKind {
    pub fn target(self, tau: f64) -> Result<TargetFunction> {
        match self {
            MatrixFunctionKind::Exp => TargetFunction::exp_neg(tau),
            MatrixFunctionKind::Phi => TargetFunction::phi_neg(tau),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MatrixFunctionKind::Exp => "exp",
            MatrixFunctionKind::Phi => "phi",
        }
    }
}

fn check_cover(model: &ReimModel, bounds: &SpectralBounds) -> Result<()> {
    let i = model.interval();
    if i.lo() > bounds.lambda_min_lb || i.hi() < bounds.lambda_max_ub {
        return Err(Error::invalid(format!(
            "model interval [{}, {}] does not cover the spectrum [{}, {}]",
            i.lo(),
            i.hi(),
            bounds.lambda_min_lb,
            bounds.lambda_max_ub
        )));
    }
    Ok(())
}

pub fn apply_matrix_function(
    l: &SparseOperator,
    kind: MatrixFunctionKind,
    tau: f64,
    v: &[f64],
    model: &ReimModel,
    bounds: &SpectralBounds,
) -> Result<Vec<f64>> {
    check_cover(model, bounds)?;
    let pf = model.interpolate_target(&kind.target(tau)?)?;
    ShiftedSolver::new(l, model.poles_b(), SHIFT_SOLVE_TOL).apply(&pf, v)
}

/// Shifted solves `(L + b_i I)^{-1} v` computed once and reused for any
/// fraction on the model's poles.
#[derive(Debug, Clone)]
pub struct SharedSolves {
    poles_b: Vec<f64>,
    solves: ShiftedSolutions,
}

impl SharedSolves {
    pub fn new(l: &SparseOperator, v: &[f64], model: &ReimModel, bounds: &SpectralBounds) -> Result<Self> {
        check_cover(model, bounds)?;
        let solves = ShiftedSolver::new(l, model.poles_b(), SHIFT_SOLVE_TOL).solve_all(v)?;
        Ok(SharedSolves {
            poles_b: model.poles_b().to_vec(),
            solves,
        })
    }

    pub fn apply(&self, pf: &PartialFraction) -> Result<Vec<f64>> {
        if pf.poles_b() != self.poles_b.as_slice() {
            return Err(Error::invalid("fraction poles differ from the shared solves"));
        }
        Ok(self.solves.combine(pf.residues()))
    }

    pub fn iterations(&self) -> &[usize] {
        &self.solves.iterations
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyMember {
    pub kind: MatrixFunctionKind,
    pub tau: f64,
    pub fraction: PartialFraction,
}

/// One fraction per `(τ, kind)`, ordered by `τ` as given and then by kind.
pub fn shared_pole_family(
    model: &ReimModel,
    tau_list: &[f64],
    kinds: &[MatrixFunctionKind],
) -> Result<Vec<FamilyMember>> {
    let mut out = Vec::with_capacity(tau_list.len() * kinds.len());
    for &tau in tau_list {
        for &kind in kinds {
            out.push(FamilyMember {
                kind,
                tau,
                fraction: model.interpolate_target(&kind.target(tau)?)?,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reim::ReimConfig;

    #[test]
    fn family_shapes() {
        let model = ReimConfig::matrix_function().with_n(10).build().unwrap();
        let kinds = [MatrixFunctionKind::Exp, MatrixFunctionKind::Phi];
        let fam = shared_pole_family(&model, &[0.002, 1.0], &kinds).unwrap();
        assert_eq!(fam.len(), 4);
        for m in &fam {
            assert_eq!(m.fraction.poles_b(), model.poles_b());
        }
        assert!(shared_pole_family(&model, &[], &kinds).unwrap().is_empty());
    }

    #[test]
    fn spectrum_must_be_covered() {
        let model = ReimConfig::matrix_function().with_n(5).build().unwrap();
        let l = SparseOperator::diagonal(&[0.5, 2.0]);
        let bounds = SpectralBounds::new(0.5, 2.0).unwrap();
        let r = apply_matrix_function(&l, MatrixFunctionKind::Exp, 0.1, &[1.0, 1.0], &model, &bounds);
        assert!(r.is_err());
    }
}
