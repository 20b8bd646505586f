//! Periods of exp(f), f = a_{m−1}z^{m−1} + … + a₁z, over the ray chains
//! σ_k = γ_k − γ₀ (γ_k the ray from 0 at angle θ_k), and their
//! stationary-phase closed form Π exp(f(β))·(2π/((m−1)a_{m−1}))^{(m−2)/2}.

pub mod quad;
pub mod spoly;
pub mod symbolic;

use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::BigRational;
use rand::Rng;

use crate::field::{resultant_trace, Frac, Matrix, RationalFunction, ScalarTower};
use quad::{integrate, QuadError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PeriodsError {
    #[error("need m >= 3, i.e. at least the coefficients a1, a2 (got m = {0})")]
    Order(usize),
    #[error("leading coefficient a_(m-1) must be nonzero")]
    ZeroLeading,
    #[error("coefficients must be finite")]
    NonFinite,
    #[error("degenerate critical points: {0}")]
    DegenerateCritical(String),
    #[error("tolerance must be positive")]
    BadTolerance,
    #[error("quadrature: {0}")]
    Quad(#[from] QuadError),
    #[error("{0}")]
    Unsupported(String),
}

type Result<T> = std::result::Result<T, PeriodsError>;

#[derive(Clone, Debug, PartialEq)]
pub struct ExpPolynomial {
    /// a₁,…,a_{m−1}
    coeffs: Vec<Complex64>,
}

impl ExpPolynomial {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(PeriodsError::Order(coeffs.len() + 1));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(PeriodsError::NonFinite);
        }
        if coeffs.last().unwrap().norm() == 0.0 {
            return Err(PeriodsError::ZeroLeading);
        }
        Ok(ExpPolynomial { coeffs })
    }

    pub fn m(&self) -> usize {
        self.coeffs.len() + 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn leading(&self) -> Complex64 {
        *self.coeffs.last().unwrap()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, a| (acc + a) * z)
    }

    /// f′ = Σ c_k z^k with c_k = (k+1)a_{k+1}.
    pub fn derivative_coeffs(&self) -> Vec<Complex64> {
        self.coeffs.iter().enumerate().map(|(k, a)| a * (k as f64 + 1.0)).collect()
    }
}

fn horner(c: &[Complex64], z: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, a| acc * z + a)
}

fn poly_derivative(c: &[Complex64]) -> Vec<Complex64> {
    c.iter().enumerate().skip(1).map(|(k, a)| a * k as f64).collect()
}

/// Directions θ_k = (−arg a_{m−1} + (2k+1)π)/(m−1), k = 0..m−2, along which
/// a_{m−1}z^{m−1} is real and negative.
pub fn rays(f: &ExpPolynomial) -> Vec<f64> {
    let m = f.m() as f64;
    let arg = f.leading().arg();
    (0..f.m() - 1).map(|k| (-arg + (2.0 * k as f64 + 1.0) * PI) / (m - 1.0)).collect()
}

/// Roots of Σ c_k z^k by Aberth–Ehrlich iteration, polished by Newton.
fn poly_roots(c: &[Complex64]) -> Vec<Complex64> {
    let n = c.len() - 1;
    if n == 1 {
        return vec![-c[0] / c[1]];
    }
    let lead = c[n];
    let monic: Vec<Complex64> = c.iter().map(|x| x / lead).collect();
    let dc = poly_derivative(&monic);
    let radius = 1.0 + monic[..n].iter().map(|x| x.norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n).map(|j| Complex64::from_polar(0.5 * radius, 2.0 * PI * j as f64 / n as f64 + 0.4)).collect();
    for _ in 0..1000 {
        let mut worst: f64 = 0.0;
        for j in 0..n {
            let p = horner(&monic, z[j]);
            let dp = horner(&dc, z[j]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let s: Complex64 = (0..n).filter(|&k| k != j).map(|k| (z[j] - z[k]).inv()).sum();
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            if w.is_finite() {
                z[j] -= w;
                worst = worst.max(w.norm() / (1.0 + z[j].norm()));
            }
        }
        if worst < 1e-16 {
            break;
        }
    }
    for r in z.iter_mut() {
        for _ in 0..3 {
            let dp = horner(&dc, *r);
            if dp.norm() > 0.0 {
                let step = horner(&monic, *r) / dp;
                if step.is_finite() {
                    *r -= step;
                }
            }
        }
    }
    z
}

/// The zeros β of f′, checked to be simple.
pub fn critical_points(f: &ExpPolynomial) -> Result<Vec<Complex64>> {
    let c = f.derivative_coeffs();
    let roots = poly_roots(&c);
    let size = 1.0 + roots.iter().map(|r| r.norm()).fold(0.0, f64::max);
    for (i, r) in roots.iter().enumerate() {
        let scale: f64 = c.iter().enumerate().map(|(k, ck)| ck.norm() * r.norm().powi(k as i32)).sum();
        if horner(&c, *r).norm() > 1e-9 * scale {
            return Err(PeriodsError::DegenerateCritical(format!("no certified root near {r}")));
        }
        for s in &roots[i + 1..] {
            if (r - s).norm() <= 1e-6 * size {
                return Err(PeriodsError::DegenerateCritical(format!("f' has a repeated root near {r}")));
            }
        }
    }
    Ok(roots)
}

pub fn critical_values(f: &ExpPolynomial) -> Result<Vec<Complex64>> {
    Ok(critical_points(f)?.into_iter().map(|b| f.eval(b)).collect())
}

/// (2π/((m−1)a_{m−1}))^{(m−2)/2} on the principal branch.
pub fn gaussian_factor(f: &ExpPolynomial) -> Complex64 {
    let m = f.m() as f64;
    let base = Complex64::new(2.0 * PI, 0.0) / (f.leading() * (m - 1.0));
    (base.ln() * ((m - 2.0) / 2.0)).exp()
}

pub fn stationary_phase_value(f: &ExpPolynomial) -> Result<Complex64> {
    let sum: Complex64 = critical_values(f)?.into_iter().sum();
    Ok(sum.exp() * gaussian_factor(f))
}

/// Σ_{f′(β)=0} f(β) exactly, as a trace on Q(i)[z]/(f′); the coefficients are
/// taken as the exact binary rationals of their f64 values.
pub fn critical_sum_exact(f: &ExpPolynomial) -> std::result::Result<Complex64, crate::field::FieldError> {
    let t = ScalarTower::new("z", &[], &[], Some(("i", "-1")))?;
    let nv = t.nvars();
    let exact = |x: f64| Frac::constant(nv, BigRational::from_float(x).expect("finite"));
    let z = RationalFunction::fiber_var(&t);
    let mut poly = RationalFunction::zero(&t);
    for (k, a) in f.coeffs().iter().enumerate() {
        let c = RationalFunction::from_parts(&t, exact(a.re), exact(a.im));
        poly = &poly + &(&c * &z.pow(k as i32 + 1));
    }
    let tr = resultant_trace(&poly.derivative(0), &poly)?;
    let num = |fr: &Frac| fr.constant_value().map(|c| num_traits::ToPrimitive::to_f64(&c).unwrap_or(f64::NAN)).unwrap_or(f64::NAN);
    Ok(Complex64::new(num(tr.p()), num(tr.q())))
}

/// Radius beyond which both rays of any chain contribute at most `tail` to an
/// entry: for r ≥ r₀ = max(1, 2Σ_{k<m−1}|a_k|/|a_{m−1}|) one has
/// Re f ≤ −|a_{m−1}|r^{m−1}/2 on every ray, and the integrand is bounded by
/// r^{m−2}exp(−|a_{m−1}|r^{m−1}/2).
fn truncation_radius(f: &ExpPolynomial, tail: f64) -> f64 {
    let a = f.leading().norm();
    let lower: f64 = f.coeffs()[..f.m() - 2].iter().map(|c| c.norm()).sum();
    let r0 = (2.0 * lower / a).max(1.0);
    let e = (f.m() - 1) as f64;
    let need = (2.0 / a) * (2.0 / (e * a * tail)).ln().max(0.0);
    r0.max(need.powf(1.0 / e))
}

fn tail_bound(f: &ExpPolynomial, r: f64) -> f64 {
    let a = f.leading().norm();
    let e = (f.m() - 1) as f64;
    2.0 / (e * a) * (-a * r.powf(e) / 2.0).exp()
}

/// ∫_{σ_k} exp(f) z^p dz with its error estimate (quadrature + both tails).
pub fn chain_integral(f: &ExpPolynomial, k: usize, p: u32, tol: f64) -> Result<(Complex64, f64)> {
    if !(tol > 0.0) {
        return Err(PeriodsError::BadTolerance);
    }
    let th = rays(f);
    let (ek, e0) = (Complex64::from_polar(1.0, th[k]), Complex64::from_polar(1.0, th[0]));
    let g = |r: f64| {
        let (zk, z0) = (ek * r, e0 * r);
        (f.eval(zk)).exp() * zk.powu(p) * ek - (f.eval(z0)).exp() * z0.powu(p) * e0
    };
    let target = |v: f64| 0.5 * tol * v.min(1.0);
    let mut tail = 1e-17;
    for _ in 0..8 {
        let r = truncation_radius(f, tail);
        let res = integrate(&g, 0.0, r, &target, 200_000)?;
        let tb = 2.0 * tail_bound(f, r);
        if tb <= 0.1 * target(res.value.norm()) || tail < 1e-300 {
            return Ok((res.value, res.error + tb));
        }
        tail = 0.01 * target(res.value.norm());
    }
    Err(PeriodsError::Unsupported("truncation radius did not settle".into()))
}

#[derive(Clone, Debug)]
pub struct PeriodResult {
    pub m: usize,
    pub tol: f64,
    /// P_{ij} = ∫_{σ_i} exp(f) z^{j−1} dz, i, j = 1..m−2.
    pub matrix: Vec<Vec<Complex64>>,
    pub errors: Vec<Vec<f64>>,
    pub det: Complex64,
    pub critical_values: Vec<Complex64>,
    pub closed_form: Complex64,
    pub ratio: Complex64,
}

pub fn period_matrix(f: &ExpPolynomial, tol: f64) -> Result<(Vec<Vec<Complex64>>, Vec<Vec<f64>>)> {
    let n = f.m() - 2;
    let cells: Vec<Result<(Complex64, f64)>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..n * n).map(|idx| s.spawn(move || chain_integral(f, idx / n + 1, (idx % n) as u32, tol))).collect();
        handles.into_iter().map(|h| h.join().expect("quadrature thread panicked")).collect()
    });
    let mut p = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    let mut e = vec![vec![0.0; n]; n];
    for (idx, c) in cells.into_iter().enumerate() {
        let (v, err) = c?;
        p[idx / n][idx % n] = v;
        e[idx / n][idx % n] = err;
    }
    Ok((p, e))
}

pub fn complex_det(p: &[Vec<Complex64>]) -> Complex64 {
    Matrix::from_rows(p.to_vec()).det()
}

pub fn periods(f: &ExpPolynomial, tol: f64) -> Result<PeriodResult> {
    let critical_values = critical_values(f)?;
    let (matrix, errors) = period_matrix(f, tol)?;
    let det = complex_det(&matrix);
    let closed_form = critical_values.iter().sum::<Complex64>().exp() * gaussian_factor(f);
    Ok(PeriodResult { m: f.m(), tol, matrix, errors, det, critical_values, closed_form, ratio: det / closed_form })
}

/// det P as the multiple integral ∫_{σ₁×…×σ_{m−2}} exp(Σf(z_i))Π_{i<j}(z_j−z_i)
/// evaluated directly: a straight line for m = 3, nested quadrature for m = 4.
pub fn direct_determinant(f: &ExpPolynomial, tol: f64) -> Result<Complex64> {
    let th = rays(f);
    let dir = |k: usize| Complex64::from_polar(1.0, th[k]);
    let target = |v: f64| tol * v.min(1.0);
    match f.m() {
        3 => {
            // σ₁ = γ₁ − γ₀ is the full line through 0 in direction θ₁ = θ₀ + π
            let e1 = dir(1);
            let r = truncation_radius(f, 1e-3 * tol * 1e-12);
            let g = |s: f64| (f.eval(e1 * s)).exp() * e1;
            Ok(integrate(&g, -r, r, &target, 200_000)?.value)
        }
        4 => {
            let r = truncation_radius(f, 1e-3 * tol * 1e-12);
            let (e0, e1, e2) = (dir(0), dir(1), dir(2));
            let inner = |z1: Complex64| -> std::result::Result<Complex64, QuadError> {
                let g = |r2: f64| {
                    let (za, zb) = (e2 * r2, e0 * r2);
                    (f.eval(za)).exp() * (za - z1) * e2 - (f.eval(zb)).exp() * (zb - z1) * e0
                };
                Ok(integrate(&g, 0.0, r, &|v| 0.01 * tol * v.min(1.0), 200_000)?.value)
            };
            let failure = std::cell::RefCell::new(None);
            let outer = |r1: f64| {
                let (za, zb) = (e1 * r1, e0 * r1);
                let term = |z: Complex64, e: Complex64| match inner(z) {
                    Ok(v) => (f.eval(z)).exp() * v * e,
                    Err(err) => {
                        failure.borrow_mut().get_or_insert(err);
                        Complex64::new(0.0, 0.0)
                    }
                };
                term(za, e1) - term(zb, e0)
            };
            let v = integrate(&outer, 0.0, r, &target, 200_000)?.value;
            if let Some(err) = failure.into_inner() {
                return Err(err.into());
            }
            Ok(v)
        }
        m => Err(PeriodsError::Unsupported(format!("direct multiple integral implemented for m = 3, 4 only (m = {m})"))),
    }
}

/// A random nearby f with arg a_{m−1} kept inside (−π/5, π/5) around the real
/// axis, so the principal branch of the Gaussian factor moves continuously.
pub fn perturb(f: &ExpPolynomial, rng: &mut impl Rng) -> ExpPolynomial {
    let m = f.m();
    let mut c: Vec<Complex64> = f.coeffs()[..m - 2]
        .iter()
        .map(|a| a + Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)))
        .collect();
    let modulus = f.leading().norm() * rng.gen_range(0.8..1.25);
    c.push(Complex64::from_polar(modulus, rng.gen_range(-PI / 5.0..PI / 5.0)));
    ExpPolynomial::new(c).expect("nonzero leading coefficient")
}

#[derive(Clone, Debug)]
pub struct Constancy {
    pub draws: Vec<(ExpPolynomial, Complex64)>,
    /// max_i |q_i − q₀| / |q₀|
    pub max_relative_deviation: f64,
}

pub fn ratio_constancy(f: &ExpPolynomial, draws: usize, tol: f64, rng: &mut impl Rng) -> Result<Constancy> {
    let mut out = Vec::with_capacity(draws);
    for _ in 0..draws {
        let g = perturb(f, rng);
        let q = periods(&g, tol)?.ratio;
        out.push((g, q));
    }
    let q0 = out.first().map(|d| d.1).unwrap_or(Complex64::new(1.0, 0.0));
    let dev = out.iter().map(|(_, q)| (q - q0).norm() / q0.norm()).fold(0.0, f64::max);
    Ok(Constancy { draws: out, max_relative_deviation: dev })
}

/// Continued-fraction reconstruction p/q with q ≤ max_den, accepted when it
/// reproduces x to 1e−6·max(|x|, 1). Advisory only.
pub fn rational_guess(x: f64, max_den: i64) -> Option<(i64, i64)> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1, mut k0, mut k1) = (0i64, 1i64, 1i64, 0i64);
    let mut r = x;
    for _ in 0..40 {
        let a = r.floor();
        if a.abs() > 1e12 {
            break;
        }
        let a = a as i64;
        let (h2, k2) = (a * h1 + h0, a * k1 + k0);
        if k2 > max_den {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if ((h1 as f64 / k1 as f64) - x).abs() <= 1e-6 * x.abs().max(1.0) {
            return Some((h1, k1));
        }
        let frac = r - a as f64;
        if frac.abs() < 1e-15 {
            break;
        }
        r = 1.0 / frac;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn ray_angles() {
        let f = ExpPolynomial::new(vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let r = rays(&f);
        assert!((r[0] - PI / 2.0).abs() < 1e-15 && (r[1] - 3.0 * PI / 2.0).abs() < 1e-15);
        let g = ExpPolynomial::new(vec![c(0.3, 1.0), c(-2.0, 0.5), c(0.7, -1.1)]).unwrap();
        for th in rays(&g) {
            assert!((g.leading() * Complex64::from_polar(1.0, 3.0 * th)).re < 0.0);
        }
    }

    #[test]
    fn gaussian_line() {
        // f = −z²: the chain is the real line traversed in one direction
        let f = ExpPolynomial::new(vec![c(0.0, 0.0), c(-1.0, 0.0)]).unwrap();
        let (v, err) = chain_integral(&f, 1, 0, 1e-12).unwrap();
        assert!((v.norm() - PI.sqrt()).abs() < 1e-11, "{v}");
        assert!(err < 1e-11);
    }

    #[test]
    fn degenerate_cubic() {
        let f = ExpPolynomial::new(vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(matches!(critical_points(&f), Err(PeriodsError::DegenerateCritical(_))));
    }

    #[test]
    fn single_critical_value() {
        let f = ExpPolynomial::new(vec![c(3.0, 1.0), c(2.0, -1.0)]).unwrap();
        let v = critical_values(&f).unwrap();
        let want = -(f.coeffs()[0] * f.coeffs()[0]) / (f.coeffs()[1] * 4.0);
        assert!((v[0] - want).norm() < 1e-14);
    }

    #[test]
    fn continued_fractions() {
        assert_eq!(rational_guess(0.75, 64), Some((3, 4)));
        assert_eq!(rational_guess(-2.0 / 3.0, 64), Some((-2, 3)));
        assert_eq!(rational_guess(PI, 64), None);
        assert_eq!(rational_guess(1e-17, 64), Some((0, 1)));
    }
}
