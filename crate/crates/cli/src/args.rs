use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use reim_core::TargetFunction;

#[derive(Debug, Parser)]
#[command(name = "reim", version, about = "Greedy rational approximation with invariant poles")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Left endpoint of the rescaled interval [eta, 1]. Defaults to 1e-6 for
    /// `approx` and `sweep`, and to the value implied by the grid otherwise.
    #[arg(long, global = true, value_parser = positive_f64)]
    pub eta: Option<f64>,
    /// Number of greedy steps.
    #[arg(long, global = true, default_value_t = 30, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    /// Number of dictionary shifts.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub dict_size: Option<u64>,
    /// Number of candidate points.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub sigma_size: Option<u64>,
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; defaults to one per core.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a greedy model and interpolate targets on [eta, 1].
    Approx(ApproxArgs),
    /// Convergence table for the fractional Poisson problem on (-1, 1)².
    Table1(Table1Args),
    /// Adaptive time stepping for the fractional heat equation.
    Heat(HeatArgs),
    /// exp(-τL)v and φ(-τL)v on a seeded random SPD matrix.
    Matfun(MatfunArgs),
    /// Maximum error over a seeded family of targets.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct ApproxArgs {
    /// pow:S, recip:S:D, precond:K, exp:TAU or phi:TAU. Repeatable.
    #[arg(long = "target", value_parser = parse_target, default_value = "pow:0.5")]
    pub targets: Vec<TargetFunction>,
}

#[derive(Debug, Args)]
pub struct Table1Args {
    /// Row labels, strictly decreasing. Accepts `2^-4` or decimals.
    #[arg(long, value_delimiter = ',', value_parser = parse_real, default_value = "2^-4,2^-5,2^-6")]
    pub h_list: Vec<f64>,
    #[arg(long, value_delimiter = ',', value_parser = parse_real, default_value = "0.25,0.5,0.75,0.95")]
    pub s_list: Vec<f64>,
    /// Largest odd mode index in the reference expansion.
    #[arg(long, default_value_t = reim_core::fracpde::DEFAULT_JK_MAX)]
    pub jk_max: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Symbol {
    Continuous,
    Discrete,
}

#[derive(Debug, Args)]
pub struct HeatArgs {
    #[arg(long, default_value_t = 0.5)]
    pub s: f64,
    #[arg(long, default_value_t = 1e-4, value_parser = positive_f64)]
    pub tol: f64,
    #[arg(long, default_value_t = 1e-3, value_parser = positive_f64)]
    pub tau0: f64,
    #[arg(long = "T", default_value_t = 1.0, value_parser = positive_f64)]
    pub t_final: f64,
    /// Mesh size on (0, 1)².
    #[arg(long, default_value = "2^-5", value_parser = parse_real)]
    pub h: f64,
    #[arg(long, value_enum, default_value_t = Symbol::Continuous)]
    pub symbol: Symbol,
}

#[derive(Debug, Args)]
pub struct MatfunArgs {
    /// Step sizes. Repeatable.
    #[arg(long = "tau", value_parser = positive_f64, default_values_t = [0.002, 0.01, 0.1, 1.0])]
    pub taus: Vec<f64>,
    /// Dimension of the random test matrix.
    #[arg(long, default_value_t = 30, value_parser = clap::value_parser!(u64).range(2..))]
    pub dim: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    /// 1/(x^s + d/Λ^s) with d uniform in [1, 1e3].
    Fs,
    /// (x^{-1/2} + K x^{1/2})^{-1} with K uniform in [1e-6, 1].
    Precond,
    /// exp(-τx) and φ(-τx) on [1, 1e6] with τ uniform in [0.002, 1].
    Expphi,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(1..))]
    pub count: u64,
    /// Fractional power for the `fs` family.
    #[arg(long, default_value_t = 0.5)]
    pub s: f64,
}

pub fn positive_f64(text: &str) -> Result<f64, String> {
    let v = parse_real(text)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("expected a positive number, got {text}"))
    }
}

/// Decimal, or `B^E` for a power.
pub fn parse_real(text: &str) -> Result<f64, String> {
    let text = text.trim();
    let v = match text.split_once('^') {
        Some((base, exp)) => {
            let base: f64 = base.parse().map_err(|_| format!("bad base in {text}"))?;
            let exp: i32 = exp.parse().map_err(|_| format!("bad exponent in {text}"))?;
            base.powi(exp)
        }
        None => text.parse().map_err(|_| format!("not a number: {text}"))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("not a finite number: {text}"))
    }
}

pub fn parse_target(text: &str) -> Result<TargetFunction, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let num = |i: usize| -> Result<f64, String> {
        parts.get(i).ok_or_else(|| format!("missing parameter in {text}")).and_then(|p| parse_real(p))
    };
    let arity = |k: usize| -> Result<(), String> {
        if parts.len() == k + 1 {
            Ok(())
        } else {
            Err(format!("{} takes {k} parameter(s): {text}", parts[0]))
        }
    };
    let target = match parts[0] {
        "pow" => arity(1).and_then(|_| num(1)).map(TargetFunction::power_neg)?,
        "recip" => arity(2).and_then(|_| Ok(TargetFunction::shifted_recip(num(1)?, num(2)?)))?,
        "precond" => arity(1).and_then(|_| num(1)).map(TargetFunction::precond)?,
        "exp" => arity(1).and_then(|_| num(1)).map(TargetFunction::exp_neg)?,
        "phi" => arity(1).and_then(|_| num(1)).map(TargetFunction::phi_neg)?,
        other => return Err(format!("unknown target kind {other:?}; use pow, recip, precond, exp or phi")),
    };
    target.map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals() {
        assert_eq!(parse_real("2^-4").unwrap(), 0.0625);
        assert_eq!(parse_real(" 1e-3 ").unwrap(), 1e-3);
        assert!(parse_real("2^x").is_err());
        assert!(parse_real("inf").is_err());
        assert!(positive_f64("0").is_err());
    }

    #[test]
    fn targets() {
        assert_eq!(parse_target("pow:0.5").unwrap(), TargetFunction::PowerNeg { s: 0.5 });
        assert_eq!(
            parse_target("recip:0.25:1e-3").unwrap(),
            TargetFunction::ShiftedRecip { s: 0.25, d: 1e-3 }
        );
        assert!(parse_target("pow").is_err());
        assert!(parse_target("pow:0.5:1").is_err());
        assert!(parse_target("pow:1.5").is_err());
        assert!(parse_target("sin:1").is_err());
    }
}
