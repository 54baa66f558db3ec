//! Cross-checks of the identities against independent evaluations and
//! simulation, shared by the CLI and the acceptance tests.
//!
//! Functions here return raw discrepancies or comparison tables; callers
//! decide the pass thresholds.

use serde::Serialize;

use crate::error::Result;
use crate::fluct;
use crate::levy::LevyModel;
use crate::linalg::{eigenvalues, expm, Matrix};
use crate::mc::{Barrier, BarrierSpec, Estimate, Exit, SimConfig, Simulator};
use crate::me::MeDist;
use crate::quadrature::{adaptive, QuadOptions};
use crate::scalar::re;
use crate::scale::{w_matrix_series_oracle, ScaleEval};

/// `Φ(−T)` for the worked example with `ψ(θ) = θ^{1.5}`, to the two decimals
/// it is usually quoted with.
pub const WORKED_EXAMPLE_PHI: [[f64; 3]; 3] = [
    [1.13, 9.79, -10.46],
    [-1.49, 1.64, 0.74],
    [-0.99, 0.42, 1.49],
];

/// Levels used by the simulation curves.
pub fn curve_levels() -> Vec<f64> {
    (1..=10).map(|k| k as f64 / 10.0).collect()
}

/// Largest entrywise distance between two matrices' real parts.
pub fn max_entry_diff(m: &Matrix<f64>, reference: &[[f64; 3]; 3]) -> f64 {
    let mut worst = 0.0f64;
    for (i, row) in reference.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            worst = worst.max((m.re(i, j) - v).abs());
        }
    }
    worst
}

/// Largest real part of `Φ(λ)` over the eigenvalues `λ` of `−T`.
fn growth_rate(ev: &ScaleEval<f64>) -> Result<f64> {
    let mut g = 0.0f64;
    for l in ev.eigenvalues() {
        g = g.max(ev.model().phi(*l)?.re);
    }
    Ok(g)
}

/// Spectral radius of `T`.
pub fn spectral_radius(m: &Matrix<f64>) -> Result<f64> {
    Ok(eigenvalues(m)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Transform point to the right of every growth rate: `Φ(ρ) + 2` with `ρ`
/// the spectral radius of `T`.
pub fn transform_point(ev: &ScaleEval<f64>) -> Result<f64> {
    let rho = spectral_radius(ev.neg_generator())?;
    Ok(ev.model().phi(re(rho))?.re + 2.0)
}

/// `max |∫₀^L e^{−θx} W₋T(x) dx − (ψ(θ)I + T)⁻¹|` with `L` chosen so the
/// neglected tail is below `1e-12` relative.
pub fn transform_discrepancy(ev: &ScaleEval<f64>, theta: f64) -> Result<f64> {
    let decay = theta - growth_rate(ev)?;
    let end = (36.0 / decay).max(1.0);
    let opts = QuadOptions {
        abs_tol: 1e-11,
        rel_tol: 1e-11,
        ..QuadOptions::default()
    };
    // y = s² absorbs the x^{α−1} behavior at the origin
    let f = |s: f64| -> Result<Matrix<f64>> {
        let x = s * s;
        let m = ev.lift(|k| {
            let p = k.phi()?;
            Ok(k.w_normalized(x)? * ((p - theta) * x).exp() * (2.0 * s))
        })?;
        Ok(m)
    };
    let mut total = adaptive(f, 0.0, 1.0, opts)?;
    if end > 1.0 {
        let g = |x: f64| -> Result<Matrix<f64>> {
            ev.lift(|k| {
                let p = k.phi()?;
                Ok(k.w_normalized(x)? * ((p - theta) * x).exp())
            })
        };
        total = &total + &adaptive(g, 1.0, end, opts)?;
    }
    Ok(total.max_abs_diff(&ev.resolvent(theta)?))
}

/// `max |W₋T(x) − series(x)|` over `xs`, with the convolution series on a
/// grid of step `h`.
pub fn series_discrepancy(ev: &ScaleEval<f64>, xs: &[f64], h: f64) -> Result<f64> {
    let mut worst = 0.0f64;
    for &x in xs {
        let closed = ev.w_matrix(x)?;
        let series = w_matrix_series_oracle(ev, x, h)?;
        worst = worst.max(closed.max_abs_diff(&series));
    }
    Ok(worst)
}

/// Total mass of the joint law of `(X̄_T, X̄_T − X_T)` by quadrature of the
/// joint density plus the atom, minus `α·l`.
///
/// The density factorizes in `x` and `y`, so the double integral is the
/// product of one-dimensional quadratures over `[0, ∞)`.
pub fn wh_mass_discrepancy(ev: &ScaleEval<f64>) -> Result<f64> {
    let h = ev.horizon()?;
    let opts = QuadOptions {
        abs_tol: 1e-9,
        rel_tol: 1e-9,
        ..QuadOptions::default()
    };
    let phi = ev.phi_matrix()?.clone();
    // x = u/(1 − u)
    let outer = adaptive(
        |u: f64| -> Result<Matrix<f64>> {
            if u >= 1.0 {
                return Ok(Matrix::zeros(ev.dim()));
            }
            let x = u / (1.0 - u);
            Ok(expm(&phi.scale_re(-x)).scale_re(1.0 / (1.0 - u).powi(2)))
        },
        0.0,
        1.0,
        opts,
    )?;
    // y = (u/(1 − u))², bounded for both the y^{α−2} head and the y^{−α} tail
    let inner = adaptive(
        |u: f64| -> Result<Matrix<f64>> {
            if u <= 0.0 || u >= 1.0 {
                return Ok(Matrix::zeros(ev.dim()));
            }
            let r = u / (1.0 - u);
            let jac = 2.0 * r / (1.0 - u).powi(2);
            Ok(ev.wh_kernel_matrix(r * r)?.scale_re(jac))
        },
        0.0,
        1.0,
        opts,
    )?;
    let with_atom = inner.shift(re(ev.drift_constant()));
    let m = &outer * &with_atom;
    let mass = m.bilinear(h.alpha(), h.exit()).re;
    let al: f64 = h.alpha().iter().zip(h.l()).map(|(a, b)| a * b).sum();
    Ok((mass - al).abs())
}

/// One point of a formula-versus-simulation curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub arg: f64,
    pub formula: f64,
    pub estimate: f64,
    pub se: f64,
}

impl CurvePoint {
    fn new(arg: f64, formula: f64, e: Estimate) -> Self {
        Self {
            arg,
            formula,
            estimate: e.value,
            se: e.se,
        }
    }

    pub fn within(&self, k: f64) -> bool {
        (self.formula - self.estimate).abs() <= k * self.se + 1e-12
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Curve {
    pub name: String,
    pub points: Vec<CurvePoint>,
}

impl Curve {
    /// Number of points within `k` standard errors.
    pub fn hits(&self, k: f64) -> usize {
        self.points.iter().filter(|p| p.within(k)).count()
    }
}

/// The three simulation curves over the levels of [`curve_levels`]:
/// `P(τ_x⁺ < T)`, `P(τ_x⁺ < τ_{x−1}⁻ ∧ T)` and the mass of `−X̲_T` on
/// bins of width 0.1 over `[0, 1]`.
pub fn passage_curves(ev: &ScaleEval<f64>, config: SimConfig) -> Result<Vec<Curve>> {
    let levels = curve_levels();
    let spec = BarrierSpec {
        exits: levels
            .iter()
            .map(|x| Barrier {
                upper: *x,
                lower: -(1.0 - x),
            })
            .collect(),
        reflections: Vec::new(),
    };
    let sim = Simulator::new(ev.model().clone(), config)?.simulate_paths(ev.horizon()?, &spec)?;

    let mut up = Vec::new();
    let mut two = Vec::new();
    let mut bins = Vec::new();
    for (k, &x) in levels.iter().enumerate() {
        let e = sim.estimate(|p| (p.sup > x) as u8 as f64);
        up.push(CurvePoint::new(x, fluct::p_up_before_horizon(ev, x)?, e));
        let e = sim.estimate(|p| (p.exits[k] == Exit::Up) as u8 as f64);
        two.push(CurvePoint::new(x, fluct::p_two_sided_up(ev, x, 1.0 - x)?, e));
        let lo = x - 0.1;
        let e = sim.estimate(|p| (-p.inf >= lo && -p.inf < x) as u8 as f64);
        // the first bin also holds the atom at zero
        let below = if k == 0 { 0.0 } else { fluct::inf_cdf(ev, lo)? };
        bins.push(CurvePoint::new(x, fluct::inf_cdf(ev, x)? - below, e));
    }
    Ok(vec![
        Curve {
            name: "up_crossing".into(),
            points: up,
        },
        Curve {
            name: "two_sided_up".into(),
            points: two,
        },
        Curve {
            name: "infimum_bins".into(),
            points: bins,
        },
    ])
}

/// Option prices from the identity and from one simulation of
/// `e^u (e^{−u} − e^{X̲_T})⁺ e^{β(X_T − X̲_T)}`, for each `(u, β)`.
pub fn option_comparison(
    ev: &ScaleEval<f64>,
    points: &[(f64, f64)],
    config: SimConfig,
) -> Result<Vec<CurvePoint>> {
    let sim = Simulator::new(ev.model().clone(), config)?
        .simulate_paths(ev.horizon()?, &BarrierSpec::default())?;
    points
        .iter()
        .map(|&(u, beta)| {
            let formula = fluct::option_price(ev, u, beta)?;
            let e = sim.estimate(|p| {
                let payoff = ((-u).exp() - p.inf.exp()).max(0.0);
                u.exp() * payoff * (beta * (p.terminal - p.inf)).exp()
            });
            Ok(CurvePoint::new(beta, formula, e))
        })
        .collect()
}

/// Entrywise comparison of `−Φ(−T)` with the phase-tracked simulation
/// estimate; returns the largest `|difference| / se`.
pub fn phase_generator_score(ev: &ScaleEval<f64>, config: SimConfig) -> Result<f64> {
    let est = Simulator::new(ev.model().clone(), config)?.phase_tracked(ev.horizon()?)?;
    let phi = ev.phi_matrix()?;
    let mut worst = 0.0f64;
    for (i, row) in est.generator.iter().enumerate() {
        for (j, g) in row.iter().enumerate() {
            let d = (g + phi.re(i, j)).abs();
            let se = est.se[i][j].max(1e-12);
            worst = worst.max(d / se);
        }
    }
    Ok(worst)
}

/// Sub-intensity defect of `−Φ(−T)`: the largest negative off-diagonal
/// magnitude or positive row sum (0 when the property holds exactly).
pub fn sub_intensity_defect(phi: &Matrix<f64>) -> f64 {
    let n = phi.dim();
    let mut worst = 0.0f64;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            let g = -phi.re(i, j);
            row += g;
            if i != j {
                worst = worst.max(-g);
            }
        }
        worst = worst.max(row);
    }
    worst
}

/// Context for `model` at `horizon`.
pub fn context(model: LevyModel<f64>, horizon: MeDist<f64>) -> Result<ScaleEval<f64>> {
    ScaleEval::new(model, horizon)
}
