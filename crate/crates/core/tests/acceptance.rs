//! Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned
//! below. Run with `cargo test -p levyme --test acceptance`.

mod common;

use std::time::{Duration, Instant};

use common::*;
use levyme::linalg::{matfn, matfn_with, AnalyticFn, Domain, Method};
use levyme::mc::{BarrierSpec, SimConfig, Simulator};
use levyme::validation::{passage_curves, series_discrepancy};
use levyme::{fixtures, fluct, Cx, LevyModel64, Matrix64, MeDist64, ScaleEval64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criterion 1: entrywise distance to the two-decimal reference matrix.
const GOLDEN_TOL: f64 = 0.01;
/// Criterion 1: `‖ψ(Φ(−T)) + T‖∞`.
const RESIDUAL_TOL: f64 = 1e-7;
/// Criterion 2.
const SPECTRUM_TOL: f64 = 1e-9;
/// Criterion 3: standard errors, and points inside the band per curve of ten.
const Z_BAND: f64 = 3.0;
const CURVE_HITS: usize = 9;
/// Criterion 4.
const TRANSFORM_TOL: f64 = 1e-6;
/// Criterion 5.
const SERIES_TOL: f64 = 1e-4;
const SERIES_STEP: f64 = 1e-3;
/// Criterion 6.
const SCALAR_TOL: f64 = 1e-10;
const SCALAR_DRAWS: usize = 50;
/// Criterion 7.
const CALCULUS_TOL: f64 = 1e-9;
const CALCULUS_MATRICES: usize = 100;
/// Criterion 8.
const SUB_INTENSITY_TOL: f64 = 1e-9;
const PH_HORIZONS: usize = 10;
/// Criterion 9.
const MASS_TOL: f64 = 1e-4;
/// Criterion 10.
const OPTION_PATHS: usize = 100_000;
const CLASSICAL_TOL: f64 = 1e-8;

/// Reference `Φ(−T)` for `ψ(θ) = θ^{3/2}`, two decimals.
const REFERENCE_PHI: [[f64; 3]; 3] = [[1.13, 9.79, -10.46], [-1.49, 1.64, 0.74], [-0.99, 0.42, 1.49]];

fn reference_alpha() -> Vec<f64> {
    vec![-8.0 / 9.0, -34.0 / 9.0, 17.0 / 3.0]
}

fn reference_t() -> Mat {
    vec![vec![0.0, -17.0, 17.0], vec![3.0, 2.0, -6.0], vec![2.0, 2.0, -5.0]]
}

fn reference_horizon() -> MeDist64 {
    MeDist64::new(reference_alpha(), reference_t(), vec![0.0, 1.0, 1.0]).unwrap()
}

type Outcome = Result<(bool, String), String>;

fn families() -> [(Family, LevyModel64); 3] {
    [
        (Family::Stable { alpha: 1.5 }, LevyModel64::stable(1.5).unwrap()),
        (Family::Bm { sigma: 1.0, gamma: 0.5 }, LevyModel64::brownian(1.0, 0.5).unwrap()),
        (
            Family::Cl { c: 3.0, lambda: 1.0, mu: 1.0 },
            fixtures::reference_cl(),
        ),
    ]
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn real(m: &Matrix64) -> Mat {
    m.real_rows()
}

fn golden_matrix() -> Outcome {
    let ev = ScaleEval64::new(LevyModel64::stable(1.5).unwrap(), reference_horizon()).map_err(err)?;
    let phi = real(ev.phi_matrix().map_err(err)?);
    let golden = REFERENCE_PHI.iter().map(|r| r.to_vec()).collect::<Mat>();
    let dist = max_diff(&phi, &golden);
    // ψ(Φ) = Φ·Φ^{1/2}
    let psi = mat_mul(&phi, &sqrtm(&phi));
    let residual = max_abs(&mat_add(&psi, &reference_t(), 1.0));
    Ok((
        dist <= GOLDEN_TOL && residual <= RESIDUAL_TOL,
        format!("max entry distance {dist:.2e} (tol {GOLDEN_TOL}), residual {residual:.2e} (tol {RESIDUAL_TOL:e})"),
    ))
}

fn spectrum() -> Outcome {
    let t = reference_t();
    let trace = t[0][0] + t[1][1] + t[2][2];
    let minors = (0..3)
        .map(|k| {
            let (i, j) = ((k + 1) % 3, (k + 2) % 3);
            t[i][i] * t[j][j] - t[i][j] * t[j][i]
        })
        .sum::<f64>();
    // (z + 1)((z + 1)² + 16) = z³ + 3z² + 19z + 17
    let coeff_err = [(-trace, 3.0), (minors, 19.0), (-det(&t), 17.0)]
        .iter()
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let ev = ScaleEval64::new(LevyModel64::stable(1.5).unwrap(), reference_horizon()).map_err(err)?;
    let want = [Cx::new(1.0, 0.0), Cx::new(1.0, 4.0), Cx::new(1.0, -4.0)];
    let dist = want
        .iter()
        .map(|w| ev.eigenvalues().iter().map(|l| (l - w).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    Ok((
        coeff_err <= SPECTRUM_TOL && dist <= SPECTRUM_TOL && ev.eigenvalues().len() == 3,
        format!("characteristic polynomial error {coeff_err:.1e}, eigenvalue distance {dist:.1e} (tol {SPECTRUM_TOL:e})"),
    ))
}

fn mc_curves() -> Outcome {
    let ev = ScaleEval64::new(LevyModel64::stable(1.5).unwrap(), reference_horizon()).map_err(err)?;
    let mut config = SimConfig::default();
    assert_eq!((config.paths, config.step), (3000, 1e-3));
    let mut notes = Vec::new();
    for attempt in 0..2 {
        let curves = passage_curves(&ev, config).map_err(err)?;
        let hits: Vec<(String, usize)> = curves.iter().map(|c| (c.name.clone(), c.hits(Z_BAND))).collect();
        let ok = hits.iter().all(|(_, h)| *h >= CURVE_HITS);
        notes.push(format!(
            "h = {}: {}",
            config.step,
            hits.iter().map(|(n, h)| format!("{n} {h}/10")).collect::<Vec<_>>().join(", ")
        ));
        if ok || attempt == 1 {
            return Ok((ok, format!("{} (need ≥ {CURVE_HITS}/10 each within {Z_BAND} SE)", notes.join("; "))));
        }
        config.step /= 2.0;
    }
    unreachable!()
}

fn transform_oracle() -> Outcome {
    let rule = gauss_legendre(20);
    let t = reference_t();
    let rho = 17f64.sqrt();
    let mut worst = 0.0f64;
    let mut notes = Vec::new();
    for (fam, model) in families() {
        let ev = ScaleEval64::new(model, reference_horizon()).map_err(err)?;
        let theta = Scalar::new(fam, rho).phi() + 2.0;
        let w = |x: f64| -> Mat {
            let m = real(&ev.w_matrix(x).unwrap());
            mat_add(&zeros(3), &m, (-theta * x).exp())
        };
        let head = integrate_mat(|s| mat_add(&zeros(3), &w(s * s), 2.0 * s), 0.0, 1.0, 4, &rule);
        let end = 20.0;
        let tail = integrate_mat(w, 1.0, end, 38, &rule);
        // the integrand at L bounds the neglected tail once divided by the decay rate
        let neglected = max_abs(&w(end)) / 2.0;
        let total = mat_add(&head, &tail, 1.0);
        let resolvent = mat_inv(&mat_add(&t, &identity(3), fam.psi(theta)));
        let d = max_diff(&total, &resolvent).max(neglected);
        worst = worst.max(d);
        notes.push(format!("{fam:?}: {d:.1e}"));
    }
    Ok((worst <= TRANSFORM_TOL, format!("{} (tol {TRANSFORM_TOL:e})", notes.join(", "))))
}

fn series_oracle() -> Outcome {
    let mut worst = 0.0f64;
    for (_, model) in families() {
        let ev = ScaleEval64::new(model, reference_horizon()).map_err(err)?;
        worst = worst.max(series_discrepancy(&ev, &[0.25, 0.5, 1.0], SERIES_STEP).map_err(err)?);
    }
    Ok((worst <= SERIES_TOL, format!("max |closed form − series| {worst:.2e} (tol {SERIES_TOL:e})")))
}

struct Draw {
    fam: Family,
    model: LevyModel64,
    q: f64,
}

fn random_draw(rng: &mut ChaCha8Rng) -> Draw {
    let q = rng.random_range(0.3..3.0);
    match rng.random_range(0..3) {
        0 => {
            let alpha = rng.random_range(1.2..1.9);
            Draw { fam: Family::Stable { alpha }, model: LevyModel64::stable(alpha).unwrap(), q }
        }
        1 => {
            let (sigma, gamma) = (rng.random_range(0.5..1.5), rng.random_range(-0.5..0.5));
            Draw { fam: Family::Bm { sigma, gamma }, model: LevyModel64::brownian(sigma, gamma).unwrap(), q }
        }
        _ => {
            let (c, lambda, mu) = (rng.random_range(1.5..4.0), rng.random_range(0.5..2.0), rng.random_range(0.5..2.0));
            let model = LevyModel64::cramer_lundberg(c, lambda, MeDist64::exponential(mu).unwrap(), 0.0).unwrap();
            Draw { fam: Family::Cl { c, lambda, mu }, model, q }
        }
    }
}

/// Every identity with an exponential horizon against its scalar formula;
/// returns the worst relative error and where it occurred.
fn scalar_reduction_draw(d: &Draw, rng: &mut ChaCha8Rng) -> Result<(f64, String), String> {
    let ev = ScaleEval64::new(d.model.clone(), MeDist64::exponential(d.q).unwrap()).map_err(err)?;
    let s = Scalar::new(d.fam, d.q);
    let (q, phi) = (d.q, s.phi());
    let psi = |t: f64| d.fam.psi(t);
    let x = rng.random_range(0.1..1.5);
    let y = rng.random_range(0.1..1.5);
    let a = x + rng.random_range(0.2..1.0);
    let mut theta = rng.random_range(0.0..1.5);
    if (theta - phi).abs() < 0.2 {
        theta = phi + 0.3;
    }
    let (u, v) = (rng.random_range(0.0..1.0), rng.random_range(0.2..2.0));
    let beta = rng.random_range(0.0..0.5) * phi;
    let (ba, bb) = (rng.random_range(0.3..1.5), rng.random_range(0.3..1.5));
    let level = rng.random_range(-0.9 * ba..0.9 * bb);
    let e = |m: levyme::Result<f64>| m.map_err(err);

    let two_barrier = s.w(ba) * s.w(bb - level) / s.w(ba + bb) - s.w(-level);
    let joint = fluct::wh_joint_density(&ev, x, y).map_err(err)?;
    let mut checks: Vec<(&str, f64, f64)> = vec![
        ("p_up_before_horizon", e(fluct::p_up_before_horizon(&ev, x))?, (-phi * x).exp()),
        ("sup_density", e(fluct::sup_density(&ev, x))?, phi * (-phi * x).exp()),
        ("p_two_sided_up", e(fluct::p_two_sided_up(&ev, x, y))?, s.w(y) / s.w(x + y)),
        ("reflected_passage", e(fluct::reflected_passage(&ev, x, a, theta))?, s.z(theta, x) / s.z(theta, a)),
        (
            "down_exit_two_sided",
            e(fluct::down_exit_two_sided(&ev, x, a, theta))?,
            s.z(theta, x) - s.w(x) * s.z(theta, a) / s.w(a),
        ),
        (
            "down_exit_one_sided",
            e(fluct::down_exit_one_sided(&ev, x, theta))?,
            s.z(theta, x) - s.w(x) * (psi(theta) - q) / (theta - phi),
        ),
        ("two_barrier_density", e(fluct::two_barrier_density(&ev, ba, bb, level))?, q * two_barrier),
        ("two_barrier_occupation", e(fluct::two_barrier_occupation(&ev, ba, bb, level))?, two_barrier),
        ("wh_sup_factor", fluct::wh_sup_factor(&ev, x).map_err(err)?[0], (-phi * x).exp() / q),
        ("wh_inf_factor_cdf", fluct::wh_inf_factor_cdf(&ev, y).map_err(err)?[0], s.w(y) / phi - s.w_int(y)),
        ("inf_cdf", e(fluct::inf_cdf(&ev, y))?, q * (s.w(y) / phi - s.w_int(y))),
        ("inf_density", e(fluct::inf_density(&ev, y))?, q / phi * (s.w_prime(y) - phi * s.w(y))),
        ("inf_atom", e(fluct::inf_atom(&ev))?, q * d.fam.w_zero() / phi),
        ("wh_joint_density", joint.density, q * (-phi * x).exp() * (s.w_prime(y) - phi * s.w(y))),
        ("wh_joint_density atom", joint.atom, q * (-phi * x).exp() * d.fam.w_zero()),
        (
            "wh_bivariate_transform",
            e(fluct::wh_bivariate_transform(&ev, u, v))?,
            q * (v - phi) / ((u + phi) * (psi(v) - q)),
        ),
        (
            "option_price",
            e(fluct::option_price(&ev, u, beta))?,
            phi / (phi - beta) * s.z(0.0, u) + q * (phi - 1.0) / ((phi - beta) * (psi(1.0) - q)) * s.z(1.0, u),
        ),
        ("ph_observation_ruin", e(fluct::ph_observation_ruin(&ev, x))?, poissonian_observation_ruin(d.fam, q, x)),
        ("w_matrix", ev.w_matrix(x).map_err(err)?.re(0, 0), s.w(x)),
        ("w_prime_matrix", ev.w_prime_matrix(x).map_err(err)?.re(0, 0), s.w_prime(x)),
        ("w_integral_matrix", ev.w_integral_matrix(x).map_err(err)?.re(0, 0), s.w_int(x)),
        ("z_matrix", ev.z_matrix(theta, x).map_err(err)?.value.re(0, 0), s.z(theta, x)),
    ];
    // the matrix forms also clamp probabilities into [0, 1]
    for c in checks.iter_mut() {
        if c.0.starts_with("p_") || c.0 == "inf_cdf" {
            c.2 = c.2.clamp(0.0, 1.0);
        }
    }
    let mut worst = (0.0f64, String::new());
    for (name, got, want) in checks {
        let rel = (got - want).abs() / want.abs().max(1.0);
        if !(rel <= worst.0) {
            worst = (rel, format!("{name} ({:?}, q = {q:.3}): {got} vs {want}", d.fam));
        }
    }
    Ok(worst)
}

fn scalar_reduction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = (0.0f64, String::new());
    for _ in 0..SCALAR_DRAWS {
        let d = random_draw(&mut rng);
        let w = scalar_reduction_draw(&d, &mut rng)?;
        if !(w.0 <= worst.0) {
            worst = w;
        }
    }
    Ok((
        worst.0 <= SCALAR_TOL,
        format!("{SCALAR_DRAWS} draws, worst relative error {:.1e} at {} (tol {SCALAR_TOL:e})", worst.0, worst.1),
    ))
}

/// Diagonalizable real matrix `V D V⁻¹` with a known simple spectrum in the
/// right half-plane, together with `V` and the block-diagonal `D`.
struct TestMatrix {
    v: Mat,
    blocks: Vec<(f64, f64)>,
}

impl TestMatrix {
    fn random(rng: &mut ChaCha8Rng) -> Self {
        let n = rng.random_range(2..=5);
        let mut blocks: Vec<(f64, f64)> = Vec::new();
        let mut size = 0;
        while size < n {
            let complex = size + 2 <= n && rng.random_bool(0.5);
            let fresh = loop {
                let cand: (f64, f64) = (rng.random_range(0.3..3.0), if complex { rng.random_range(0.5..3.0) } else { 0.0 });
                let far = blocks
                    .iter()
                    .all(|b| ((b.0 - cand.0).powi(2) + (b.1.abs() - cand.1.abs()).powi(2)).sqrt() > 0.3);
                if far {
                    break cand;
                }
            };
            blocks.push(fresh);
            size += if complex { 2 } else { 1 };
        }
        let v = (0..n)
            .map(|i| (0..n).map(|j| rng.random_range(-0.5..0.5) + if i == j { 2.0 } else { 0.0 }).collect())
            .collect();
        Self { v, blocks }
    }

    fn dim(&self) -> usize {
        self.v.len()
    }

    fn eigenvalues(&self) -> Vec<Cx<f64>> {
        self.blocks
            .iter()
            .flat_map(|&(a, b)| {
                if b == 0.0 {
                    vec![Cx::new(a, 0.0)]
                } else {
                    vec![Cx::new(a, b), Cx::new(a, -b)]
                }
            })
            .collect()
    }

    /// `V f(D) V⁻¹` with `f(a ± bi) = u ± vi` acting on `[[a, b], [−b, a]]`
    /// as `[[u, v], [−v, u]]`.
    fn apply(&self, f: impl Fn(Cx<f64>) -> Cx<f64>) -> Mat {
        let n = self.dim();
        let mut d = zeros(n);
        let mut k = 0;
        for &(a, b) in &self.blocks {
            let w = f(Cx::new(a, b));
            if b == 0.0 {
                d[k][k] = w.re;
                k += 1;
            } else {
                d[k][k] = w.re;
                d[k + 1][k + 1] = w.re;
                d[k][k + 1] = w.im;
                d[k + 1][k] = -w.im;
                k += 2;
            }
        }
        mat_mul(&mat_mul(&self.v, &d), &mat_inv(&self.v))
    }
}

fn calculus() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = (0.0f64, String::new());
    let mut note = |v: f64, what: &str| {
        if !(v <= worst.0) {
            worst = (v, what.to_string());
        }
    };
    for _ in 0..CALCULUS_MATRICES {
        let tm = TestMatrix::random(&mut rng);
        let a_real = tm.apply(|z| z);
        let a = Matrix64::from_real_rows(&a_real).map_err(err)?;
        let scale = max_abs(&a_real);
        let funcs: [(&str, AnalyticFn<f64>, fn(Cx<f64>) -> Cx<f64>); 3] = [
            ("exp", AnalyticFn::exp(), |z| z.exp()),
            ("sqrt", AnalyticFn::powf(0.5), |z| z.sqrt()),
            ("log", AnalyticFn::new(Domain::CutPlane, |z: Cx<f64>| z.ln()), |z| z.ln()),
        ];
        for (name, f, scalar) in &funcs {
            let fa = matfn(&a, f).map_err(err)?;
            let size = fa.max_abs().max(1.0);
            // conjugate-realness
            note(fa.max_imag() / size, &format!("{name} imaginary residue"));
            let fr = real(&fa);
            // commutation
            let comm = max_diff(&mat_mul(&fr, &a_real), &mat_mul(&a_real, &fr));
            note(comm / (size * scale), &format!("{name} commutator"));
            // eigenvalue mapping: exact V f(D) V⁻¹, trace and determinant
            note(max_diff(&fr, &tm.apply(scalar)) / size, &format!("{name} vs V f(D) V⁻¹"));
            let images: Vec<Cx<f64>> = tm.eigenvalues().into_iter().map(scalar).collect();
            let tr: Cx<f64> = images.iter().sum();
            let dt: Cx<f64> = images.iter().product();
            let trace: f64 = (0..tm.dim()).map(|i| fr[i][i]).sum();
            note((tr - trace).norm() / size / tm.dim() as f64, &format!("{name} trace"));
            note((dt - det(&fr)).norm() / dt.norm().max(1.0), &format!("{name} determinant"));
            // dual evaluators
            let spectral = matfn_with(&a, f, Method::Spectral).map_err(err)?;
            let contour = matfn_with(&a, f, Method::Contour).map_err(err)?;
            note(spectral.max_abs_diff(&contour) / size, &format!("{name} spectral vs contour"));
        }
        // composition
        let root = matfn(&a, &AnalyticFn::powf(0.5)).map_err(err)?;
        note((&(&root * &root) - &a).max_abs() / scale, "sqrt squared");
        let log = matfn(&a, &AnalyticFn::new(Domain::CutPlane, |z: Cx<f64>| z.ln())).map_err(err)?;
        let back = matfn(&log, &AnalyticFn::exp()).map_err(err)?;
        note((&back - &a).max_abs() / scale, "exp of log");
    }
    Ok((
        worst.0 <= CALCULUS_TOL,
        format!("{CALCULUS_MATRICES} matrices, worst relative defect {:.1e} ({}) (tol {CALCULUS_TOL:e})", worst.0, worst.1),
    ))
}

fn random_ph(rng: &mut ChaCha8Rng) -> MeDist64 {
    let p = rng.random_range(1..=4);
    let mut alpha: Vec<f64> = (0..p).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = alpha.iter().sum();
    alpha.iter_mut().for_each(|a| *a /= total);
    let mut gen = zeros(p);
    let mut exit = vec![0.0; p];
    for i in 0..p {
        exit[i] = rng.random_range(0.1..2.0);
        let mut out = exit[i];
        for j in 0..p {
            if i != j {
                gen[i][j] = rng.random_range(0.0..2.0);
                out += gen[i][j];
            }
        }
        gen[i][i] = -out;
    }
    MeDist64::new(alpha, gen, exit).unwrap()
}

/// Worst violation of: off-diagonals of `−Φ` nonnegative, row sums nonpositive.
fn sub_intensity_violation(phi: &Mat) -> f64 {
    let mut worst = 0.0f64;
    for (i, row) in phi.iter().enumerate() {
        let g: Vec<f64> = row.iter().map(|v| -v).collect();
        for (j, v) in g.iter().enumerate() {
            if i != j {
                worst = worst.max(-v);
            }
        }
        worst = worst.max(g.iter().sum::<f64>());
    }
    worst
}

fn sub_intensity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let models = [
        LevyModel64::stable(1.5).unwrap(),
        LevyModel64::brownian(1.0, 0.2).unwrap(),
        fixtures::reference_cl(),
    ];
    let mut worst = 0.0f64;
    for _ in 0..PH_HORIZONS {
        let h = random_ph(&mut rng);
        for m in &models {
            let ev = ScaleEval64::new(m.clone(), h.clone()).map_err(err)?;
            worst = worst.max(sub_intensity_violation(&real(ev.phi_matrix().map_err(err)?)));
        }
    }
    let horizon = MeDist64::erlang(2, 3.0).unwrap();
    let ev = ScaleEval64::new(LevyModel64::brownian(1.0, 0.0).unwrap(), horizon.clone()).map_err(err)?;
    let est = Simulator::new(ev.model().clone(), SimConfig::default())
        .map_err(err)?
        .phase_tracked(&horizon)
        .map_err(err)?;
    let phi = real(ev.phi_matrix().map_err(err)?);
    let mut z = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            let d = (est.generator[i][j] + phi[i][j]).abs();
            z = z.max(if est.se[i][j] > 0.0 { d / est.se[i][j] } else if d < 1e-12 { 0.0 } else { f64::INFINITY });
        }
    }
    Ok((
        worst <= SUB_INTENSITY_TOL && z <= Z_BAND,
        format!(
            "{PH_HORIZONS} horizons × 3 models, worst violation {worst:.1e} (tol {SUB_INTENSITY_TOL:e}); \
             phase-tracked generator worst |z| {z:.2} over {} passages (tol {Z_BAND})",
            est.passages
        ),
    ))
}

fn wh_mass() -> Outcome {
    let rule = gauss_legendre(20);
    let t = reference_t();
    let exit = vec![0.0, 1.0, 1.0];
    let alpha = reference_alpha();
    let l: Vec<f64> = mat_inv(&t.iter().map(|r| r.iter().map(|v| -v).collect()).collect())
        .iter()
        .map(|r| r.iter().zip(&exit).map(|(a, b)| a * b).sum())
        .collect();
    let target: f64 = alpha.iter().zip(&l).map(|(a, b)| a * b).sum();
    let mut notes = Vec::new();
    let mut worst = 0.0f64;
    let cases = [
        ("stable 1.5", LevyModel64::stable(1.5).unwrap(), 0.0),
        ("compound Poisson", fixtures::reference_cl(), 1.0 / 3.0),
    ];
    for (name, model, c) in cases {
        let ev = ScaleEval64::new(model, reference_horizon()).map_err(err)?;
        // y = r², r = u/(1 − u)
        let k = integrate_mat(
            |u| {
                let r = u / (1.0 - u);
                let jac = 2.0 * r / (1.0 - u).powi(2);
                mat_add(&zeros(3), &real(&ev.wh_kernel_matrix(r * r).unwrap()), jac)
            },
            0.0,
            1.0,
            64,
            &rule,
        );
        // ∫₀^∞ e^{−Φx} dx = Φ⁻¹
        let phi_inv = mat_inv(&real(ev.phi_matrix().map_err(err)?));
        let with_atom = mat_add(&k, &identity(3), c);
        let mass = bilinear(&alpha, &mat_mul(&phi_inv, &with_atom), &exit);
        let d = (mass - target).abs();
        worst = worst.max(d);
        notes.push(format!("{name}: mass {mass:.8} vs α·l {target:.8}"));
    }
    Ok((worst <= MASS_TOL, format!("{} (tol {MASS_TOL:e})", notes.join(", "))))
}

fn option_price() -> Outcome {
    let config = SimConfig {
        paths: OPTION_PATHS,
        ..SimConfig::default()
    };
    let points = [(0.5, 0.0), (0.5, 0.3)];
    let mut zs = Vec::new();
    for (name, model) in [("stable 1.5", LevyModel64::stable(1.5).unwrap()), ("compound Poisson", fixtures::reference_cl())] {
        let ev = ScaleEval64::new(model.clone(), reference_horizon()).map_err(err)?;
        let sim = Simulator::new(model, config)
            .map_err(err)?
            .simulate_paths(&reference_horizon(), &BarrierSpec::default())
            .map_err(err)?;
        for (u, beta) in points {
            let formula = fluct::option_price(&ev, u, beta).map_err(err)?;
            let est = sim.estimate(|p| u.exp() * ((-u).exp() - p.inf.exp()).max(0.0) * (beta * (p.terminal - p.inf)).exp());
            zs.push((format!("{name} (u, β) = ({u}, {beta})"), (formula - est.value) / est.se));
        }
    }
    let mut classical = 0.0f64;
    for (fam, model) in families() {
        for q in [0.5, 2.0] {
            let ev = ScaleEval64::new(model.clone(), MeDist64::exponential(q).unwrap()).map_err(err)?;
            let s = Scalar::new(fam, q);
            let phi = s.phi();
            for u in [0.0, 0.5, 1.0] {
                let want = s.z(0.0, u) - q / phi * (phi - 1.0) / (q - fam.psi(1.0)) * s.z(1.0, u);
                let got = fluct::option_price(&ev, u, 0.0).map_err(err)?;
                classical = classical.max((got - want).abs() / want.abs().max(1.0));
            }
        }
    }
    let worst_z = zs.iter().map(|z| z.1.abs()).fold(0.0, f64::max);
    Ok((
        worst_z <= Z_BAND && classical <= CLASSICAL_TOL,
        format!(
            "{}; {OPTION_PATHS} paths (tol {Z_BAND} SE); classical display error {classical:.1e} (tol {CLASSICAL_TOL:e})",
            zs.iter().map(|(n, z)| format!("{n}: z = {z:.2}")).collect::<Vec<_>>().join(", ")
        ),
    ))
}

fn main() {
    let criteria: [(u32, &str, Duration, fn() -> Outcome); 10] = [
        (1, "golden matrix", Duration::from_secs(1), golden_matrix),
        (2, "generator spectrum", Duration::from_secs(1), spectrum),
        (3, "simulation curves", Duration::from_secs(300), mc_curves),
        (4, "transform oracle", Duration::from_secs(30), transform_oracle),
        (5, "series oracle", Duration::from_secs(120), series_oracle),
        (6, "scalar reduction", Duration::from_secs(10), scalar_reduction),
        (7, "matrix calculus", Duration::from_secs(30), calculus),
        (8, "sub-intensity property", Duration::from_secs(180), sub_intensity),
        (9, "Wiener-Hopf mass", Duration::from_secs(60), wh_mass),
        (10, "option price", Duration::from_secs(300), option_price),
    ];
    let mut failed = 0;
    for (n, name, limit, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let (ok, detail) = match outcome {
            Ok((ok, d)) => (ok && took <= limit, d),
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {n:>2} {name}: {} | {detail} | {:.2}s (limit {}s)",
            if ok { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!("acceptance: {}/10 passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
