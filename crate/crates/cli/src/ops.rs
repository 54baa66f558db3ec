//! Registry of operations reachable from `levyme curve`.

use std::collections::BTreeMap;

use levyme::fluct;
use levyme::mc::{Barrier, BarrierSpec, Estimate, Exit, Reflection, Simulator};
use levyme::{Error, Result, ScaleEval64};

pub type Params = BTreeMap<String, f64>;

type Eval = fn(&ScaleEval64, f64, &Params) -> Result<Vec<f64>>;
type McEval = fn(&Simulator, &ScaleEval64, &[f64], &Params) -> Result<Vec<Estimate>>;

pub struct Op {
    pub name: &'static str,
    /// Name of the grid argument.
    pub arg: &'static str,
    pub about: &'static str,
    /// Extra parameters with defaults; `NaN` marks an optional parameter.
    pub params: &'static [(&'static str, f64)],
    pub columns: fn(usize) -> Vec<String>,
    pub eval: Eval,
    pub mc: Option<McEval>,
}

fn value_column(_: usize) -> Vec<String> {
    vec!["value".into()]
}

fn vector_columns(p: usize) -> Vec<String> {
    (0..p).map(|i| format!("v{i}")).collect()
}

fn matrix_columns(p: usize) -> Vec<String> {
    (0..p)
        .flat_map(|i| (0..p).map(move |j| format!("m{i}{j}")))
        .collect()
}

fn density_columns(_: usize) -> Vec<String> {
    vec!["density".into(), "atom".into()]
}

fn entries(m: &levyme::Matrix64) -> Vec<f64> {
    m.real_rows().into_iter().flatten().collect()
}

fn param(p: &Params, name: &str) -> Result<f64> {
    p.get(name)
        .copied()
        .filter(|v| !v.is_nan())
        .ok_or_else(|| Error::InvalidParameter(format!("missing parameter '{name}'")))
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn simulate(sim: &Simulator, ev: &ScaleEval64, spec: &BarrierSpec) -> Result<levyme::mc::Simulation> {
    sim.simulate_paths(ev.horizon()?, spec)
}

fn two_sided_y(x: f64, p: &Params) -> Result<f64> {
    match p.get("y").copied().filter(|v| !v.is_nan()) {
        Some(y) => Ok(y),
        None => Ok(param(p, "span")? - x),
    }
}

fn mc_up(sim: &Simulator, ev: &ScaleEval64, grid: &[f64], _: &Params) -> Result<Vec<Estimate>> {
    let s = simulate(sim, ev, &BarrierSpec::default())?;
    Ok(grid.iter().map(|x| s.estimate(|p| indicator(p.sup > *x))).collect())
}

fn mc_two_sided(sim: &Simulator, ev: &ScaleEval64, grid: &[f64], p: &Params) -> Result<Vec<Estimate>> {
    let exits = grid
        .iter()
        .map(|x| {
            Ok(Barrier {
                upper: *x,
                lower: -two_sided_y(*x, p)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let s = simulate(sim, ev, &BarrierSpec { exits, reflections: vec![] })?;
    Ok((0..grid.len())
        .map(|k| s.estimate(|p| indicator(p.exits[k] == Exit::Up)))
        .collect())
}

fn mc_reflected(sim: &Simulator, ev: &ScaleEval64, grid: &[f64], p: &Params) -> Result<Vec<Estimate>> {
    let a = param(p, "a")?;
    let theta = param(p, "theta")?;
    let reflections = grid.iter().map(|x| Reflection { start: *x, level: a }).collect();
    let s = simulate(sim, ev, &BarrierSpec { exits: vec![], reflections })?;
    Ok((0..grid.len())
        .map(|k| s.estimate(|p| p.reflected[k].map_or(0.0, |r| (-theta * r).exp())))
        .collect())
}

fn down_estimates(s: &levyme::mc::Simulation, grid: &[f64], theta: f64) -> Vec<Estimate> {
    (0..grid.len())
        .map(|k| {
            s.estimate(|p| match p.exits[k] {
                Exit::Down(v) => (theta * (grid[k] + v)).exp(),
                _ => 0.0,
            })
        })
        .collect()
}

fn mc_down_two(sim: &Simulator, ev: &ScaleEval64, grid: &[f64], p: &Params) -> Result<Vec<Estimate>> {
    let a = param(p, "a")?;
    let exits = grid.iter().map(|x| Barrier { upper: a - x, lower: -x }).collect();
    let s = simulate(sim, ev, &BarrierSpec { exits, reflections: vec![] })?;
    Ok(down_estimates(&s, grid, param(p, "theta")?))
}

fn mc_down_one(sim: &Simulator, ev: &ScaleEval64, grid: &[f64], p: &Params) -> Result<Vec<Estimate>> {
    let exits = grid
        .iter()
        .map(|x| Barrier {
            upper: f64::INFINITY,
            lower: -x,
        })
        .collect();
    let s = simulate(sim, ev, &BarrierSpec { exits, reflections: vec![] })?;
    Ok(down_estimates(&s, grid, param(p, "theta")?))
}

fn mc_inf_cdf(sim: &Simulator, ev: &ScaleEval64, grid: &[f64], _: &Params) -> Result<Vec<Estimate>> {
    let s = simulate(sim, ev, &BarrierSpec::default())?;
    Ok(grid.iter().map(|y| s.estimate(|p| indicator(-p.inf <= *y))).collect())
}

fn mc_option(sim: &Simulator, ev: &ScaleEval64, grid: &[f64], p: &Params) -> Result<Vec<Estimate>> {
    let beta = param(p, "beta")?;
    let s = simulate(sim, ev, &BarrierSpec::default())?;
    Ok(grid
        .iter()
        .map(|u| {
            s.estimate(|p| {
                u.exp() * ((-u).exp() - p.inf.exp()).max(0.0) * (beta * (p.terminal - p.inf)).exp()
            })
        })
        .collect())
}

fn mc_ruin(sim: &Simulator, ev: &ScaleEval64, grid: &[f64], _: &Params) -> Result<Vec<Estimate>> {
    grid.iter().map(|x| sim.observation_ruin(ev.horizon()?, *x)).collect()
}

pub static REGISTRY: &[Op] = &[
    Op {
        name: "p-up",
        arg: "x",
        about: "P(τ_x⁺ < T)",
        params: &[],
        columns: value_column,
        eval: |ev, x, _| Ok(vec![fluct::p_up_before_horizon(ev, x)?]),
        mc: Some(mc_up),
    },
    Op {
        name: "sup-density",
        arg: "x",
        about: "density of the supremum at T",
        params: &[],
        columns: value_column,
        eval: |ev, x, _| Ok(vec![fluct::sup_density(ev, x)?]),
        mc: None,
    },
    Op {
        name: "p-two-sided-up",
        arg: "x",
        about: "P(τ_x⁺ < τ₋ᵧ⁻ ∧ T), with y fixed or y = span − x",
        params: &[("y", f64::NAN), ("span", 1.0)],
        columns: value_column,
        eval: |ev, x, p| Ok(vec![fluct::p_two_sided_up(ev, x, two_sided_y(x, p)?)?]),
        mc: Some(mc_two_sided),
    },
    Op {
        name: "reflected-passage",
        arg: "x",
        about: "E_x(e^{−θR}; η_a < T) for the process reflected at its infimum",
        params: &[("a", 1.0), ("theta", 0.0)],
        columns: value_column,
        eval: |ev, x, p| Ok(vec![fluct::reflected_passage(ev, x, param(p, "a")?, param(p, "theta")?)?]),
        mc: Some(mc_reflected),
    },
    Op {
        name: "down-exit-two-sided",
        arg: "x",
        about: "E_x(e^{θX}; τ₀⁻ < τ_a⁺ ∧ T)",
        params: &[("a", 1.0), ("theta", 0.0)],
        columns: value_column,
        eval: |ev, x, p| {
            Ok(vec![fluct::down_exit_two_sided(ev, x, param(p, "a")?, param(p, "theta")?)?])
        },
        mc: Some(mc_down_two),
    },
    Op {
        name: "down-exit-one-sided",
        arg: "x",
        about: "E_x(e^{θX}; τ₀⁻ < T)",
        params: &[("theta", 0.0)],
        columns: value_column,
        eval: |ev, x, p| Ok(vec![fluct::down_exit_one_sided(ev, x, param(p, "theta")?)?]),
        mc: Some(mc_down_one),
    },
    Op {
        name: "two-barrier-density",
        arg: "x",
        about: "density of X_T on {T < τ₋ₐ⁻ ∧ τ_b⁺}",
        params: &[("a", 1.0), ("b", 1.0)],
        columns: value_column,
        eval: |ev, x, p| Ok(vec![fluct::two_barrier_density(ev, param(p, "a")?, param(p, "b")?, x)?]),
        mc: None,
    },
    Op {
        name: "two-barrier-occupation",
        arg: "x",
        about: "expected occupation density before T ∧ τ₋ₐ⁻ ∧ τ_b⁺",
        params: &[("a", 1.0), ("b", 1.0)],
        columns: value_column,
        eval: |ev, x, p| {
            Ok(vec![fluct::two_barrier_occupation(ev, param(p, "a")?, param(p, "b")?, x)?])
        },
        mc: None,
    },
    Op {
        name: "wh-sup-factor",
        arg: "x",
        about: "row vector α(−T)⁻¹e^{−Φx}",
        params: &[],
        columns: vector_columns,
        eval: |ev, x, _| fluct::wh_sup_factor(ev, x),
        mc: None,
    },
    Op {
        name: "wh-inf-factor",
        arg: "x",
        about: "row vector α(Φ⁻¹W(x) − ∫₀ˣW)",
        params: &[],
        columns: vector_columns,
        eval: |ev, x, _| fluct::wh_inf_factor_cdf(ev, x),
        mc: None,
    },
    Op {
        name: "wh-joint-density",
        arg: "x",
        about: "joint density of (sup, sup − X_T) at (x, y) and the atom at y = 0",
        params: &[("y", 0.5)],
        columns: density_columns,
        eval: |ev, x, p| {
            let d = fluct::wh_joint_density(ev, x, param(p, "y")?)?;
            Ok(vec![d.density, d.atom])
        },
        mc: None,
    },
    Op {
        name: "wh-bivariate-transform",
        arg: "u",
        about: "E e^{−u·sup − v(sup − X_T)}",
        params: &[("v", 1.0)],
        columns: value_column,
        eval: |ev, u, p| Ok(vec![fluct::wh_bivariate_transform(ev, u, param(p, "v")?)?]),
        mc: None,
    },
    Op {
        name: "inf-cdf",
        arg: "y",
        about: "P(−X̲_T ≤ y)",
        params: &[],
        columns: value_column,
        eval: |ev, y, _| Ok(vec![fluct::inf_cdf(ev, y)?]),
        mc: Some(mc_inf_cdf),
    },
    Op {
        name: "wh-inf-density",
        arg: "y",
        about: "density of −X̲_T for y > 0",
        params: &[],
        columns: value_column,
        eval: |ev, y, _| Ok(vec![fluct::inf_density(ev, y)?]),
        mc: None,
    },
    Op {
        name: "inf-atom",
        arg: "x",
        about: "P(X̲_T = 0), constant in the grid argument",
        params: &[],
        columns: value_column,
        eval: |ev, _, _| Ok(vec![fluct::inf_atom(ev)?]),
        mc: None,
    },
    Op {
        name: "option-price",
        arg: "u",
        about: "e^u E((e^{−u} − e^{X̲_T})⁺ e^{β(X_T − X̲_T)})",
        params: &[("beta", 0.0)],
        columns: value_column,
        eval: |ev, u, p| Ok(vec![fluct::option_price(ev, u, param(p, "beta")?)?]),
        mc: Some(mc_option),
    },
    Op {
        name: "ph-observation-ruin",
        arg: "x",
        about: "P(τ_x⁺ < τ̂₀) with ruin checked at phase-type renewal epochs (the horizon)",
        params: &[],
        columns: value_column,
        eval: |ev, x, _| Ok(vec![fluct::ph_observation_ruin(ev, x)?]),
        mc: Some(mc_ruin),
    },
    Op {
        name: "scale-w",
        arg: "x",
        about: "entries of W₋T(x)",
        params: &[],
        columns: matrix_columns,
        eval: |ev, x, _| Ok(entries(&ev.w_matrix(x)?)),
        mc: None,
    },
    Op {
        name: "scale-w-prime",
        arg: "x",
        about: "entries of W′₋T(x)",
        params: &[],
        columns: matrix_columns,
        eval: |ev, x, _| Ok(entries(&ev.w_prime_matrix(x)?)),
        mc: None,
    },
    Op {
        name: "scale-w-integral",
        arg: "x",
        about: "entries of ∫₀ˣ W₋T",
        params: &[],
        columns: matrix_columns,
        eval: |ev, x, _| Ok(entries(&ev.w_integral_matrix(x)?)),
        mc: None,
    },
    Op {
        name: "scale-z",
        arg: "x",
        about: "entries of Z₋T(θ, x)",
        params: &[("theta", 0.0)],
        columns: matrix_columns,
        eval: |ev, x, p| Ok(entries(&ev.z_matrix(param(p, "theta")?, x)?.value)),
        mc: None,
    },
];

pub fn find(name: &str) -> Result<&'static Op> {
    REGISTRY
        .iter()
        .find(|op| op.name == name)
        .ok_or_else(|| Error::UnknownOperation(name.to_string()))
}

/// Defaults overlaid with user values; unknown names are rejected.
pub fn resolve_params(op: &Op, given: &Params) -> Result<Params> {
    let mut out: Params = op.params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    for (k, v) in given {
        if !out.contains_key(k) {
            return Err(Error::Parse {
                location: format!("param {k}"),
                message: format!("'{}' takes no parameter '{k}'", op.name),
            });
        }
        out.insert(k.clone(), *v);
    }
    Ok(out)
}

/// One line per operation, for `--help`.
pub fn listing() -> String {
    let mut s = String::from("Operations:\n");
    for op in REGISTRY {
        let params: Vec<String> = op
            .params
            .iter()
            .map(|(k, v)| if v.is_nan() { k.to_string() } else { format!("{k}={v}") })
            .collect();
        let mc = if op.mc.is_some() { " [mc]" } else { "" };
        s.push_str(&format!(
            "  {:<24} ({}{}{}){mc}  {}\n",
            op.name,
            op.arg,
            if params.is_empty() { "" } else { "; " },
            params.join(", "),
            op.about
        ));
    }
    s
}
