//! Built-in horizons and models, and the compact text specs that name them.
//!
//! Model specs: `stable:α`, `bm:σ,γ`, `cl:c,λ,μ[,σ]` (exponential(μ) jumps).
//! Horizon specs: `paper-sec7` (alias `worked-example`), `exp:q`, `erlang:k,rate`, `file:PATH` (a CSV
//! of exponential terms).

use crate::error::{Error, Result};
use crate::levy::LevyModel;
use crate::me::{from_exp_terms, ExpTermList, MeDist};
use crate::scalar::{lit, Real};

/// Worked three-phase example: eigenvalues of `T` are `−1` and `−1 ± 4i`,
/// and `t = −T·1 = (0, 1, 1)`.
pub fn worked_example<R: Real>() -> MeDist<R> {
    let r = |v: f64| lit::<R>(v);
    MeDist::new(
        vec![r(-8.0 / 9.0), r(-34.0 / 9.0), r(17.0 / 3.0)],
        vec![
            vec![r(0.0), r(-17.0), r(17.0)],
            vec![r(3.0), r(2.0), r(-6.0)],
            vec![r(2.0), r(2.0), r(-5.0)],
        ],
        vec![r(0.0), r(1.0), r(1.0)],
    )
    .expect("built-in horizon is valid")
}

/// Cramér–Lundberg reference: premium 3, unit-rate exponential(1) claims,
/// no Gaussian part, so `ψ(1) = 2.5`.
pub fn reference_cl<R: Real>() -> LevyModel<R> {
    let jumps = MeDist::exponential(R::one()).expect("unit rate");
    LevyModel::cramer_lundberg(lit(3.0), R::one(), jumps, R::zero()).expect("valid model")
}

fn parse_err(location: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        location: location.to_string(),
        message: message.into(),
    }
}

fn numbers(location: &str, body: &str, min: usize, max: usize) -> Result<Vec<f64>> {
    let xs = body
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| parse_err(location, format!("'{s}': {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if xs.len() < min || xs.len() > max {
        return Err(parse_err(
            location,
            format!("expected {min} to {max} numbers, found {}", xs.len()),
        ));
    }
    Ok(xs)
}

/// Parses a model spec.
pub fn parse_model(spec: &str) -> Result<LevyModel<f64>> {
    let loc = "model";
    let (kind, body) = spec
        .split_once(':')
        .ok_or_else(|| parse_err(loc, format!("'{spec}' has no ':'")))?;
    match kind {
        "stable" => LevyModel::stable(numbers(loc, body, 1, 1)?[0]),
        "bm" => {
            let v = numbers(loc, body, 2, 2)?;
            LevyModel::brownian(v[0], v[1])
        }
        "cl" => {
            let v = numbers(loc, body, 3, 4)?;
            let jumps = MeDist::exponential(v[2])?;
            LevyModel::cramer_lundberg(v[0], v[1], jumps, v.get(3).copied().unwrap_or(0.0))
        }
        other => Err(parse_err(loc, format!("unknown family '{other}'"))),
    }
}

/// Parses a horizon spec.
pub fn parse_horizon(spec: &str) -> Result<MeDist<f64>> {
    let loc = "horizon";
    if spec == "paper-sec7" || spec == "worked-example" {
        return Ok(worked_example());
    }
    let (kind, body) = spec
        .split_once(':')
        .ok_or_else(|| parse_err(loc, format!("unknown built-in '{spec}'")))?;
    match kind {
        "exp" => MeDist::exponential(numbers(loc, body, 1, 1)?[0]),
        "erlang" => {
            let v = numbers(loc, body, 2, 2)?;
            if v[0] < 1.0 || v[0].fract() != 0.0 {
                return Err(parse_err(loc, "Erlang shape must be a positive integer"));
            }
            MeDist::erlang(v[0] as usize, v[1])
        }
        "file" => from_exp_terms(&ExpTermList::from_csv_path(body)?),
        other => Err(parse_err(loc, format!("unknown horizon kind '{other}'"))),
    }
}
