//! Independent scalar formulas and small numerical helpers shared by the
//! integration tests. Nothing here calls into the library's numerics.
#![allow(dead_code)]

use statrs::function::gamma::{gamma_lr, ln_gamma};

/// A spectrally negative family with an explicit Laplace exponent.
#[derive(Clone, Copy, Debug)]
pub enum Family {
    Stable { alpha: f64 },
    /// `ψ(θ) = σ²θ²/2 + γθ`.
    Bm { sigma: f64, gamma: f64 },
    /// `ψ(θ) = cθ − λθ/(μ + θ)`.
    Cl { c: f64, lambda: f64, mu: f64 },
}

impl Family {
    pub fn psi(&self, t: f64) -> f64 {
        match *self {
            Family::Stable { alpha } => t.powf(alpha),
            Family::Bm { sigma, gamma } => 0.5 * sigma * sigma * t * t + gamma * t,
            Family::Cl { c, lambda, mu } => c * t - lambda * t / (mu + t),
        }
    }

    fn psi_prime(&self, t: f64) -> f64 {
        match *self {
            Family::Stable { alpha } => alpha * t.powf(alpha - 1.0),
            Family::Bm { sigma, gamma } => sigma * sigma * t + gamma,
            Family::Cl { c, lambda, mu } => c - lambda * mu / (mu + t).powi(2),
        }
    }

    /// `W(0)`.
    pub fn w_zero(&self) -> f64 {
        match *self {
            Family::Cl { c, .. } => 1.0 / c,
            _ => 0.0,
        }
    }
}

/// Roots of `a z² + b z + c`, real and distinct.
fn quadratic(a: f64, b: f64, c: f64) -> [f64; 2] {
    let d = (b * b - 4.0 * a * c).sqrt();
    let big = -0.5 * (b + b.signum() * d);
    let (r1, r2) = (big / a, c / big);
    if r1 > r2 {
        [r1, r2]
    } else {
        [r2, r1]
    }
}

/// `∫₀ˣ e^{dy} dy`.
fn exp_integral(d: f64, x: f64) -> f64 {
    if (d * x).abs() < 1e-8 {
        x * (1.0 + 0.5 * d * x)
    } else {
        (d * x).exp_m1() / d
    }
}

/// The `q`-scale function of a family and everything built from it.
#[derive(Clone, Copy, Debug)]
pub struct Scalar {
    pub family: Family,
    pub q: f64,
}

impl Scalar {
    pub fn new(family: Family, q: f64) -> Self {
        Self { family, q }
    }

    /// `ψ(θ) = q` roots with weights `1/ψ′`, for the rational families.
    fn terms(&self) -> Option<[(f64, f64); 2]> {
        let roots = match self.family {
            Family::Stable { .. } => return None,
            Family::Bm { sigma, gamma } => quadratic(0.5 * sigma * sigma, gamma, -self.q),
            Family::Cl { c, lambda, mu } => quadratic(c, c * mu - self.q - lambda, -self.q * mu),
        };
        Some(roots.map(|r| (r, 1.0 / self.family.psi_prime(r))))
    }

    pub fn phi(&self) -> f64 {
        match self.family {
            Family::Stable { alpha } => self.q.powf(1.0 / alpha),
            _ => self.terms().unwrap()[0].0,
        }
    }

    /// `Σ_k q^k x^{α(k+1)+shift} / Γ(α(k+1)+shift+1)`.
    fn ml(&self, alpha: f64, x: f64, shift: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        let mut sum = 0.0;
        for k in 0..400 {
            let a = alpha * (k as f64 + 1.0) + shift;
            let lt = k as f64 * self.q.ln() + a * x.ln() - ln_gamma(a + 1.0);
            let t = if self.q == 0.0 && k > 0 { 0.0 } else { lt.exp() };
            sum += t;
            if k > 5 && t < 1e-18 * sum {
                break;
            }
        }
        sum
    }

    pub fn w(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        match self.family {
            Family::Stable { alpha } => self.ml(alpha, x, -1.0),
            _ => self.terms().unwrap().iter().map(|(r, c)| c * (r * x).exp()).sum(),
        }
    }

    pub fn w_prime(&self, x: f64) -> f64 {
        match self.family {
            Family::Stable { alpha } => self.ml(alpha, x, -2.0),
            _ => self.terms().unwrap().iter().map(|(r, c)| c * r * (r * x).exp()).sum(),
        }
    }

    /// `∫₀ˣ W`.
    pub fn w_int(&self, x: f64) -> f64 {
        match self.family {
            Family::Stable { alpha } => self.ml(alpha, x, 0.0),
            _ => self.terms().unwrap().iter().map(|(r, c)| c * exp_integral(*r, x)).sum(),
        }
    }

    /// `∫₀ˣ e^{−θy} W(y) dy`.
    pub fn w_disc_int(&self, theta: f64, x: f64) -> f64 {
        match self.family {
            Family::Stable { alpha } => {
                if x == 0.0 {
                    return 0.0;
                }
                let mut sum = 0.0;
                for k in 0..400 {
                    let a = alpha * (k as f64 + 1.0);
                    let mut inner = 0.0;
                    let mut coef = 1.0;
                    for m in 0..400 {
                        if m > 0 {
                            coef *= -theta * x / m as f64;
                        }
                        let t = coef / (a + m as f64);
                        inner += t;
                        if m as f64 > theta * x + 5.0 && t.abs() < 1e-18 {
                            break;
                        }
                    }
                    let lt = k as f64 * self.q.ln() + a * x.ln() - ln_gamma(a);
                    let scale = if self.q == 0.0 && k > 0 { 0.0 } else { lt.exp() };
                    let t = scale * inner;
                    sum += t;
                    if k > 5 && scale < 1e-18 * sum.abs().max(1e-300) {
                        break;
                    }
                }
                sum
            }
            _ => self
                .terms()
                .unwrap()
                .iter()
                .map(|(r, c)| c * exp_integral(r - theta, x))
                .sum(),
        }
    }

    /// `Z(θ, x) = e^{θx}(1 + (q − ψ(θ)) ∫₀ˣ e^{−θy} W(y) dy)`.
    pub fn z(&self, theta: f64, x: f64) -> f64 {
        (theta * x).exp() * (1.0 + (self.q - self.family.psi(theta)) * self.w_disc_int(theta, x))
    }
}

/// Observation-ruin probability with exponential(`q`) gaps:
/// `e^{−Φ(q)x} / (1 − q ∫₀ˣ W⁽⁰⁾(y) e^{−Φ(q)y} dy)`.
pub fn poissonian_observation_ruin(family: Family, q: f64, x: f64) -> f64 {
    let phi = Scalar::new(family, q).phi();
    let zero = Scalar::new(family, 0.0);
    let integral = match family {
        Family::Stable { alpha } => gamma_lr(alpha, phi * x) / phi.powf(alpha),
        _ => zero.w_disc_int(phi, x),
    };
    (-phi * x).exp() / (1.0 - q * integral)
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Composite Gauss–Legendre over `panels` equal panels of `[a, b]`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize, rule: &[(f64, f64)]) -> f64 {
    let h = (b - a) / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (x, w) in rule {
            acc += f(mid + 0.5 * h * x) * (0.5 * h * w);
        }
    }
    acc
}

/// [`integrate`] for matrix-valued integrands.
pub fn integrate_mat(f: impl Fn(f64) -> Mat, a: f64, b: f64, panels: usize, rule: &[(f64, f64)]) -> Mat {
    let h = (b - a) / panels as f64;
    let mut acc: Option<Mat> = None;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (x, w) in rule {
            let v = f(mid + 0.5 * h * x);
            acc = Some(match acc {
                None => mat_add(&zeros(v.len()), &v, 0.5 * h * w),
                Some(m) => mat_add(&m, &v, 0.5 * h * w),
            });
        }
    }
    acc.expect("at least one node")
}

/// Dense real matrix helpers.
pub type Mat = Vec<Vec<f64>>;

pub fn zeros(n: usize) -> Mat {
    vec![vec![0.0; n]; n]
}

pub fn identity(n: usize) -> Mat {
    (0..n).map(|i| (0..n).map(|j| (i == j) as u8 as f64).collect()).collect()
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

pub fn mat_add(a: &Mat, b: &Mat, s: f64) -> Mat {
    a.iter()
        .zip(b)
        .map(|(r, q)| r.iter().zip(q).map(|(x, y)| x + s * y).collect())
        .collect()
}

/// Gauss–Jordan inverse with partial pivoting.
pub fn mat_inv(a: &Mat) -> Mat {
    let n = a.len();
    let mut m: Mat = a.clone();
    let mut inv = identity(n);
    for c in 0..n {
        let p = (c..n).max_by(|i, j| m[*i][c].abs().total_cmp(&m[*j][c].abs())).unwrap();
        m.swap(c, p);
        inv.swap(c, p);
        let d = m[c][c];
        assert!(d.abs() > 1e-300, "singular");
        for j in 0..n {
            m[c][j] /= d;
            inv[c][j] /= d;
        }
        for r in 0..n {
            if r != c {
                let f = m[r][c];
                for j in 0..n {
                    m[r][j] -= f * m[c][j];
                    inv[r][j] -= f * inv[c][j];
                }
            }
        }
    }
    inv
}

pub fn det(a: &Mat) -> f64 {
    let n = a.len();
    let mut m = a.clone();
    let mut d = 1.0;
    for c in 0..n {
        let p = (c..n).max_by(|i, j| m[*i][c].abs().total_cmp(&m[*j][c].abs())).unwrap();
        if p != c {
            m.swap(c, p);
            d = -d;
        }
        d *= m[c][c];
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for j in c..n {
                m[r][j] -= f * m[c][j];
            }
        }
    }
    d
}

pub fn max_diff(a: &Mat, b: &Mat) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(r, q)| r.iter().zip(q).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &Mat) -> f64 {
    a.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// `α M v`.
pub fn bilinear(alpha: &[f64], m: &Mat, v: &[f64]) -> f64 {
    alpha
        .iter()
        .enumerate()
        .map(|(i, a)| a * m[i].iter().zip(v).map(|(x, y)| x * y).sum::<f64>())
        .sum()
}

/// Principal square root by the Denman–Beavers iteration.
pub fn sqrtm(a: &Mat) -> Mat {
    let n = a.len();
    let (mut y, mut z) = (a.clone(), identity(n));
    for _ in 0..100 {
        let yi = mat_inv(&y);
        let zi = mat_inv(&z);
        let y1: Mat = mat_add(&y, &zi, 1.0).iter().map(|r| r.iter().map(|x| 0.5 * x).collect()).collect();
        let z1: Mat = mat_add(&z, &yi, 1.0).iter().map(|r| r.iter().map(|x| 0.5 * x).collect()).collect();
        let done = max_diff(&y1, &y) < 1e-15 * max_abs(&y1);
        y = y1;
        z = z1;
        if done {
            break;
        }
    }
    y
}

/// Relative-or-absolute closeness.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}
