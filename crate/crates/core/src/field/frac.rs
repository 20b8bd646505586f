//! Reduced fractions of multivariate polynomials.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::poly::{gcd, Poly};

/// `num / den` with `gcd(num, den) = 1` and `den` monic.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Frac {
    num: Poly,
    den: Poly,
}

impl Frac {
    pub fn new(num: Poly, den: Poly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return Frac::zero(num.nvars());
        }
        let g = gcd(&num, &den);
        let (n, d) = if g.is_one() {
            (num, den)
        } else {
            (num.div_exact(&g).unwrap(), den.div_exact(&g).unwrap())
        };
        Self::normalized(n, d)
    }

    fn normalized(num: Poly, den: Poly) -> Self {
        let lc = den.leading_coeff();
        if lc.is_one() {
            Frac { num, den }
        } else {
            let inv = lc.recip();
            Frac { num: num.scale(&inv), den: den.scale(&inv) }
        }
    }

    pub fn zero(nvars: usize) -> Self {
        Frac { num: Poly::zero(nvars), den: Poly::one(nvars) }
    }

    pub fn one(nvars: usize) -> Self {
        Frac { num: Poly::one(nvars), den: Poly::one(nvars) }
    }

    pub fn from_poly(p: Poly) -> Self {
        let n = p.nvars();
        Frac { num: p, den: Poly::one(n) }
    }

    pub fn constant(nvars: usize, c: BigRational) -> Self {
        Self::from_poly(Poly::constant(nvars, c))
    }

    pub fn from_int(nvars: usize, c: i64) -> Self {
        Self::from_poly(Poly::from_int(nvars, c))
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        Self::from_poly(Poly::var(nvars, i))
    }

    pub fn nvars(&self) -> usize {
        self.num.nvars()
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_constant()
    }

    pub fn constant_value(&self) -> Option<BigRational> {
        if self.den.is_constant() {
            self.num.constant_value()
        } else {
            None
        }
    }

    pub fn uses_var(&self, v: usize) -> bool {
        self.num.uses_var(v) || self.den.uses_var(v)
    }

    pub fn inv(&self) -> Frac {
        assert!(!self.is_zero(), "inverse of zero");
        Self::normalized(self.den.clone(), self.num.clone())
    }

    pub fn scale(&self, c: &BigRational) -> Frac {
        if c.is_zero() {
            return Frac::zero(self.nvars());
        }
        Frac { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn pow(&self, k: i32) -> Frac {
        let p = Frac { num: self.num.pow(k.unsigned_abs()), den: self.den.pow(k.unsigned_abs()) };
        let p = Self::normalized(p.num, p.den);
        if k < 0 {
            p.inv()
        } else {
            p
        }
    }

    pub fn derivative(&self, v: usize) -> Frac {
        if !self.uses_var(v) {
            return Frac::zero(self.nvars());
        }
        if self.den.is_constant() {
            return Frac { num: self.num.derivative(v), den: self.den.clone() };
        }
        // (n/d)' = (n' d - n d') / d^2, cancelling the common d first
        let dn = self.num.derivative(v);
        let dd = self.den.derivative(v);
        let top = &(&dn * &self.den) - &(&self.num * &dd);
        Frac::new(top, &self.den * &self.den)
    }

    pub fn eval_var(&self, v: usize, value: &BigRational) -> Option<Frac> {
        let d = self.den.eval_var(v, value);
        if d.is_zero() {
            return None;
        }
        Some(Frac::new(self.num.eval_var(v, value), d))
    }

    pub fn eval(&self, point: &[BigRational]) -> Option<BigRational> {
        let d = self.den.eval(point);
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval(point) / d)
    }

    pub fn remap(&self, new_nvars: usize, map: &[usize]) -> Frac {
        Frac { num: self.num.remap(new_nvars, map), den: self.den.remap(new_nvars, map) }
    }

    pub fn format_with(&self, names: &[String]) -> String {
        if self.den.is_one() {
            return self.num.format_with(names);
        }
        let wrap = |p: &Poly| {
            let s = p.format_with(names);
            if p.num_terms() > 1 {
                format!("({s})")
            } else {
                s
            }
        };
        format!("{}/{}", wrap(&self.num), wrap(&self.den))
    }
}

impl<'a> Add<&'a Frac> for &'a Frac {
    type Output = Frac;
    fn add(self, rhs: &Frac) -> Frac {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        if self.den == rhs.den {
            return Frac::new(&self.num + &rhs.num, self.den.clone());
        }
        let g = gcd(&self.den, &rhs.den);
        if g.is_one() {
            let n = &(&self.num * &rhs.den) + &(&rhs.num * &self.den);
            return Frac::new(n, &self.den * &rhs.den);
        }
        let d1 = self.den.div_exact(&g).unwrap();
        let d2 = rhs.den.div_exact(&g).unwrap();
        let n = &(&self.num * &d2) + &(&rhs.num * &d1);
        Frac::new(n, &(&d1 * &d2) * &g)
    }
}

impl<'a> Sub<&'a Frac> for &'a Frac {
    type Output = Frac;
    fn sub(self, rhs: &Frac) -> Frac {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a Frac> for &'a Frac {
    type Output = Frac;
    fn mul(self, rhs: &Frac) -> Frac {
        if self.is_zero() || rhs.is_zero() {
            return Frac::zero(self.nvars());
        }
        let g1 = gcd(&self.num, &rhs.den);
        let g2 = gcd(&rhs.num, &self.den);
        let n1 = self.num.div_exact(&g1).unwrap();
        let d2 = rhs.den.div_exact(&g1).unwrap();
        let n2 = rhs.num.div_exact(&g2).unwrap();
        let d1 = self.den.div_exact(&g2).unwrap();
        Frac::normalized(&n1 * &n2, &d1 * &d2)
    }
}

impl<'a> Div<&'a Frac> for &'a Frac {
    type Output = Frac;
    fn div(self, rhs: &Frac) -> Frac {
        self * &rhs.inv()
    }
}

impl Neg for &Frac {
    type Output = Frac;
    fn neg(self) -> Frac {
        Frac { num: -&self.num, den: self.den.clone() }
    }
}

impl Neg for Frac {
    type Output = Frac;
    fn neg(self) -> Frac {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cancels_and_normalizes() {
        let n = 2;
        let x = Poly::var(n, 0);
        let y = Poly::var(n, 1);
        let num = &(&x * &x) - &(&y * &y);
        let den = (&x - &y).scale(&BigRational::from_integer(2.into()));
        let f = Frac::new(num, den);
        assert!(f.is_polynomial());
        let half = BigRational::new(1.into(), 2.into());
        assert_eq!(f.num(), &(&x + &y).scale(&half));
    }

    #[test]
    fn derivative_quotient_rule() {
        let n = 1;
        let x = Frac::var(n, 0);
        let f = x.inv();
        let df = f.derivative(0);
        assert_eq!(df, -&x.pow(-2));
    }
}
