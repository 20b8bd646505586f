//! The coefficient tower: rational functions in the fiber coordinate, the base
//! variables and symbolic parameters, optionally adjoined a square root `w`.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::frac::Frac;
use super::poly::Poly;
use super::FieldError;

/// Variable layout: index 0 is the fiber coordinate, then the base variables
/// (which carry differentials), then parameters (constants of the base field
/// without differentials).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScalarTower {
    fiber: String,
    base_vars: Vec<String>,
    params: Vec<String>,
    ext: Option<(String, Poly)>,
}

impl ScalarTower {
    pub fn new(
        fiber: &str,
        base_vars: &[&str],
        params: &[&str],
        ext: Option<(&str, &str)>,
    ) -> Result<Arc<Self>, FieldError> {
        let mut t = ScalarTower {
            fiber: fiber.to_string(),
            base_vars: base_vars.iter().map(|s| s.to_string()).collect(),
            params: params.iter().map(|s| s.to_string()).collect(),
            ext: None,
        };
        let mut seen = std::collections::HashSet::new();
        for n in std::iter::once(&t.fiber).chain(&t.base_vars).chain(&t.params) {
            if !is_ident(n) {
                return Err(FieldError::Malformed(format!("bad variable name `{n}`")));
            }
            if !seen.insert(n.clone()) {
                return Err(FieldError::Malformed(format!("duplicate variable `{n}`")));
            }
        }
        if let Some((gen, square)) = ext {
            if seen.contains(gen) || !is_ident(gen) {
                return Err(FieldError::Malformed(format!("bad extension generator `{gen}`")));
            }
            let plain = Arc::new(t.clone());
            let s = super::parse::parse_scalar(&plain, square)?;
            let s = s.as_frac().ok_or_else(|| FieldError::Malformed("square involves generator".into()))?;
            if !s.is_polynomial() || s.is_zero() {
                return Err(FieldError::Malformed("extension square must be a nonzero polynomial".into()));
            }
            if s.uses_var(0) {
                return Err(FieldError::Malformed("extension square must not involve the fiber".into()));
            }
            let p = s.num().scale(&s.den().constant_value().unwrap().recip());
            t.ext = Some((gen.to_string(), p));
        }
        Ok(Arc::new(t))
    }

    pub fn nvars(&self) -> usize {
        1 + self.base_vars.len() + self.params.len()
    }

    pub fn fiber(&self) -> &str {
        &self.fiber
    }

    pub fn base_vars(&self) -> &[String] {
        &self.base_vars
    }

    pub fn params(&self) -> &[String] {
        &self.params
    }

    pub fn nbase(&self) -> usize {
        self.base_vars.len()
    }

    /// Variable index of base variable `i`.
    pub fn base_index(&self, i: usize) -> usize {
        1 + i
    }

    pub fn param_index(&self, i: usize) -> usize {
        1 + self.base_vars.len() + i
    }

    pub fn ext(&self) -> Option<(&str, &Poly)> {
        self.ext.as_ref().map(|(g, s)| (g.as_str(), s))
    }

    pub fn ext_square(&self) -> Option<Frac> {
        self.ext.as_ref().map(|(_, s)| Frac::from_poly(s.clone()))
    }

    /// All variable names in index order.
    pub fn names(&self) -> Vec<String> {
        let mut v = vec![self.fiber.clone()];
        v.extend(self.base_vars.iter().cloned());
        v.extend(self.params.iter().cloned());
        v
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.names().iter().position(|n| n == name)
    }

    pub fn base_position(&self, name: &str) -> Option<usize> {
        self.base_vars.iter().position(|n| n == name)
    }
}

fn is_ident(s: &str) -> bool {
    let mut c = s.chars();
    matches!(c.next(), Some(ch) if ch.is_ascii_alphabetic() || ch == '_')
        && c.all(|ch| ch.is_ascii_alphanumeric() || ch == '_')
}

/// An element `p + q·w` of the tower; `q = 0` when there is no extension.
#[derive(Clone)]
pub struct RationalFunction {
    tower: Arc<ScalarTower>,
    p: Frac,
    q: Frac,
}

impl PartialEq for RationalFunction {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.q == other.q
    }
}

impl Eq for RationalFunction {}

impl fmt::Debug for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = self.tower.names();
        if self.q.is_zero() {
            return write!(f, "{}", self.p.format_with(&names));
        }
        let gen = self.tower.ext().map(|(g, _)| g).unwrap_or("w");
        let qs = self.q.format_with(&names);
        let qpart = if self.q.is_one() { gen.to_string() } else { format!("({qs})*{gen}") };
        if self.p.is_zero() {
            write!(f, "{qpart}")
        } else {
            write!(f, "{} + {qpart}", self.p.format_with(&names))
        }
    }
}

impl RationalFunction {
    pub fn from_frac(tower: &Arc<ScalarTower>, p: Frac) -> Self {
        let n = tower.nvars();
        debug_assert_eq!(p.nvars(), n);
        RationalFunction { tower: tower.clone(), p, q: Frac::zero(n) }
    }

    pub fn from_parts(tower: &Arc<ScalarTower>, p: Frac, q: Frac) -> Self {
        assert!(q.is_zero() || tower.ext.is_some(), "w-part without extension");
        RationalFunction { tower: tower.clone(), p, q }
    }

    pub fn zero(tower: &Arc<ScalarTower>) -> Self {
        Self::from_frac(tower, Frac::zero(tower.nvars()))
    }

    pub fn one(tower: &Arc<ScalarTower>) -> Self {
        Self::from_frac(tower, Frac::one(tower.nvars()))
    }

    pub fn from_int(tower: &Arc<ScalarTower>, c: i64) -> Self {
        Self::from_frac(tower, Frac::from_int(tower.nvars(), c))
    }

    pub fn from_rational(tower: &Arc<ScalarTower>, c: BigRational) -> Self {
        Self::from_frac(tower, Frac::constant(tower.nvars(), c))
    }

    pub fn var(tower: &Arc<ScalarTower>, i: usize) -> Self {
        Self::from_frac(tower, Frac::var(tower.nvars(), i))
    }

    pub fn fiber_var(tower: &Arc<ScalarTower>) -> Self {
        Self::var(tower, 0)
    }

    pub fn named(tower: &Arc<ScalarTower>, name: &str) -> Self {
        let i = tower.var_index(name).unwrap_or_else(|| panic!("unknown variable {name}"));
        Self::var(tower, i)
    }

    /// The extension generator `w`.
    pub fn gen(tower: &Arc<ScalarTower>) -> Self {
        assert!(tower.ext.is_some(), "tower has no extension");
        let n = tower.nvars();
        RationalFunction { tower: tower.clone(), p: Frac::zero(n), q: Frac::one(n) }
    }

    pub fn tower(&self) -> &Arc<ScalarTower> {
        &self.tower
    }

    pub fn p(&self) -> &Frac {
        &self.p
    }

    pub fn q(&self) -> &Frac {
        &self.q
    }

    pub fn is_zero(&self) -> bool {
        self.p.is_zero() && self.q.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.p.is_one() && self.q.is_zero()
    }

    pub fn as_frac(&self) -> Option<&Frac> {
        if self.q.is_zero() {
            Some(&self.p)
        } else {
            None
        }
    }

    pub fn constant_value(&self) -> Option<BigRational> {
        self.as_frac().and_then(|f| f.constant_value())
    }

    pub fn uses_var(&self, v: usize) -> bool {
        self.p.uses_var(v) || self.q.uses_var(v)
    }

    pub fn is_fiber_free(&self) -> bool {
        !self.uses_var(0)
    }

    /// Multiplicative inverse via the conjugate `(p − qw)/(p² − q²s)`.
    pub fn inv(&self) -> Result<Self, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        if self.q.is_zero() {
            return Ok(Self::from_frac(&self.tower, self.p.inv()));
        }
        let s = self.tower.ext_square().unwrap();
        let norm = &(&self.p * &self.p) - &(&(&self.q * &self.q) * &s);
        if norm.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        let ni = norm.inv();
        Ok(RationalFunction { tower: self.tower.clone(), p: &self.p * &ni, q: -&(&self.q * &ni) })
    }

    pub fn conj(&self) -> Self {
        RationalFunction { tower: self.tower.clone(), p: self.p.clone(), q: -&self.q }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        RationalFunction { tower: self.tower.clone(), p: self.p.scale(c), q: self.q.scale(c) }
    }

    pub fn pow(&self, k: i32) -> Self {
        let base = if k < 0 { self.inv().expect("negative power of zero") } else { self.clone() };
        let mut acc = Self::one(&self.tower);
        for _ in 0..k.unsigned_abs() {
            acc = &acc * &base;
        }
        acc
    }

    /// Partial derivative; `∂w = w·∂s/(2s)`.
    pub fn derivative(&self, v: usize) -> Self {
        let dp = self.p.derivative(v);
        let mut dq = self.q.derivative(v);
        if !self.q.is_zero() {
            let s = self.tower.ext_square().unwrap();
            if s.uses_var(v) {
                let ds = s.derivative(v);
                let two_s = s.scale(&BigRational::from_integer(2.into()));
                dq = &dq + &(&self.q * &(&ds / &two_s));
            }
        }
        RationalFunction { tower: self.tower.clone(), p: dp, q: dq }
    }

    /// Substitute a rational value for a variable of the w-free parts.
    pub fn eval_var(&self, v: usize, value: &BigRational) -> Result<Self, FieldError> {
        let p = self.p.eval_var(v, value).ok_or(FieldError::PoleAtPoint)?;
        let q = self.q.eval_var(v, value).ok_or(FieldError::PoleAtPoint)?;
        Ok(RationalFunction { tower: self.tower.clone(), p, q })
    }

    /// Substitute a w-free element for variable `v` (w must not depend on `v`).
    pub fn substitute(&self, v: usize, value: &Frac) -> Self {
        RationalFunction {
            tower: self.tower.clone(),
            p: substitute_frac(&self.p, v, value),
            q: substitute_frac(&self.q, v, value),
        }
    }

    /// Move into another tower via a variable index map (old index → new index).
    pub fn transfer(&self, target: &Arc<ScalarTower>, map: &[usize]) -> Self {
        let n = target.nvars();
        let p = self.p.remap(n, map);
        let q = self.q.remap(n, map);
        assert!(q.is_zero() || target.ext.is_some(), "transfer drops the extension");
        RationalFunction { tower: target.clone(), p, q }
    }

    /// Reinterpret the element in a tower with the same variable layout.
    pub fn retower(&self, target: &Arc<ScalarTower>) -> Self {
        assert_eq!(target.nvars(), self.tower.nvars());
        RationalFunction { tower: target.clone(), p: self.p.clone(), q: self.q.clone() }
    }

    /// Split into a single fraction in the fiber variable: numerator and
    /// denominator as polynomials in z with fiber-free coefficients.
    pub fn fiber_num_den(&self) -> (Vec<Self>, Vec<Self>) {
        let t = &self.tower;
        let coeffs = |p: &Poly| -> Vec<Self> {
            p.to_univariate(0).into_iter().map(|c| Self::from_frac(t, Frac::from_poly(c))).collect()
        };
        if self.q.is_zero() {
            return (coeffs(self.p.num()), coeffs(self.p.den()));
        }
        // p = a/b, q = c/d  →  (a d + c b w) / (b d)
        let (a, b, c, d) = (self.p.num(), self.p.den(), self.q.num(), self.q.den());
        let ad = coeffs(&(a * d));
        let cb = coeffs(&(c * b));
        let w = Self::gen(t);
        let len = ad.len().max(cb.len());
        let num: Vec<Self> = (0..len)
            .map(|i| {
                let x = ad.get(i).cloned().unwrap_or_else(|| Self::zero(t));
                let y = cb.get(i).map(|y| y * &w).unwrap_or_else(|| Self::zero(t));
                &x + &y
            })
            .collect();
        (num, coeffs(&(b * d)))
    }
}

/// Substitute `value` for variable `v` in a fraction.
pub fn substitute_frac(f: &Frac, v: usize, value: &Frac) -> Frac {
    if !f.uses_var(v) {
        return f.clone();
    }
    let sub = |p: &Poly| -> Frac {
        let cs = p.to_univariate(v);
        let mut acc = Frac::zero(p.nvars());
        for c in cs.iter().rev() {
            acc = &(&acc * value) + &Frac::from_poly(c.clone());
        }
        acc
    };
    &sub(f.num()) / &sub(f.den())
}

/// Evaluate a fraction at images of all of its variables (`images[i]` for
/// variable i), e.g. to move between towers.
pub fn compose_frac(f: &Frac, images: &[Frac]) -> Frac {
    let n = images.first().map(|x| x.nvars()).expect("no images");
    let eval = |p: &Poly| -> Frac {
        let mut powers: Vec<Vec<Frac>> = images.iter().map(|x| vec![Frac::one(x.nvars()), x.clone()]).collect();
        let mut acc = Frac::zero(n);
        for (e, c) in p.terms() {
            let mut t = Frac::constant(n, c.clone());
            for (v, &k) in e.iter().enumerate() {
                let k = k as usize;
                if k == 0 {
                    continue;
                }
                while powers[v].len() <= k {
                    let next = &powers[v][powers[v].len() - 1] * &images[v];
                    powers[v].push(next);
                }
                t = &t * &powers[v][k];
            }
            acc = &acc + &t;
        }
        acc
    };
    &eval(f.num()) / &eval(f.den())
}

impl<'a> Add<&'a RationalFunction> for &'a RationalFunction {
    type Output = RationalFunction;
    fn add(self, rhs: &RationalFunction) -> RationalFunction {
        RationalFunction { tower: self.tower.clone(), p: &self.p + &rhs.p, q: &self.q + &rhs.q }
    }
}

impl<'a> Sub<&'a RationalFunction> for &'a RationalFunction {
    type Output = RationalFunction;
    fn sub(self, rhs: &RationalFunction) -> RationalFunction {
        RationalFunction { tower: self.tower.clone(), p: &self.p - &rhs.p, q: &self.q - &rhs.q }
    }
}

impl<'a> Mul<&'a RationalFunction> for &'a RationalFunction {
    type Output = RationalFunction;
    fn mul(self, rhs: &RationalFunction) -> RationalFunction {
        if self.q.is_zero() && rhs.q.is_zero() {
            return RationalFunction::from_frac(&self.tower, &self.p * &rhs.p);
        }
        let s = self.tower.ext_square().unwrap();
        let p = &(&self.p * &rhs.p) + &(&(&self.q * &rhs.q) * &s);
        let q = &(&self.p * &rhs.q) + &(&self.q * &rhs.p);
        RationalFunction { tower: self.tower.clone(), p, q }
    }
}

impl<'a> Div<&'a RationalFunction> for &'a RationalFunction {
    type Output = RationalFunction;
    fn div(self, rhs: &RationalFunction) -> RationalFunction {
        self * &rhs.inv().expect("division by zero")
    }
}

impl Neg for &RationalFunction {
    type Output = RationalFunction;
    fn neg(self) -> RationalFunction {
        RationalFunction { tower: self.tower.clone(), p: -&self.p, q: -&self.q }
    }
}

impl Neg for RationalFunction {
    type Output = RationalFunction;
    fn neg(self) -> RationalFunction {
        -&self
    }
}

/// Minimal field interface shared by the exact and floating scalar types so
/// that matrices and univariate polynomials can be written once.
pub trait Field: Clone + PartialEq + fmt::Debug {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn int_like(&self, c: i64) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn inv(&self) -> Option<Self>;
    fn div(&self, o: &Self) -> Option<Self> {
        o.inv().map(|i| self.mul(&i))
    }
}

impl Field for RationalFunction {
    fn zero_like(&self) -> Self {
        Self::zero(&self.tower)
    }
    fn one_like(&self) -> Self {
        Self::one(&self.tower)
    }
    fn int_like(&self, c: i64) -> Self {
        Self::from_int(&self.tower, c)
    }
    fn is_zero(&self) -> bool {
        RationalFunction::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Option<Self> {
        RationalFunction::inv(self).ok()
    }
}

impl Field for BigRational {
    fn zero_like(&self) -> Self {
        BigRational::zero()
    }
    fn one_like(&self) -> Self {
        BigRational::one()
    }
    fn int_like(&self, c: i64) -> Self {
        BigRational::from_integer(c.into())
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Option<Self> {
        if Zero::is_zero(self) {
            None
        } else {
            Some(self.recip())
        }
    }
}

impl Field for num_complex::Complex64 {
    fn zero_like(&self) -> Self {
        num_complex::Complex64::new(0.0, 0.0)
    }
    fn one_like(&self) -> Self {
        num_complex::Complex64::new(1.0, 0.0)
    }
    fn int_like(&self, c: i64) -> Self {
        num_complex::Complex64::new(c as f64, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.norm() == 0.0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Option<Self> {
        if self.norm() == 0.0 {
            None
        } else {
            Some(1.0 / self)
        }
    }
}
