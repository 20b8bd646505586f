//! Laurent expansions in the fiber coordinate and traces over root sets.

use std::fmt;

use num_rational::BigRational;

use super::tower::RationalFunction;
use super::upoly::{self, UPoly};
use super::FieldError;

/// A point of P¹ over Q.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Point {
    Finite(BigRational),
    Infinity,
}

impl Point {
    pub fn int(c: i64) -> Self {
        Point::Finite(BigRational::from_integer(c.into()))
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Finite(c) => write!(f, "{c}"),
            Point::Infinity => write!(f, "infinity"),
        }
    }
}

/// Truncated Laurent series Σ c_k·y^k for k in [valuation, order], where y is
/// z − c at a finite point and 1/z at infinity.
#[derive(Clone, Debug)]
pub struct Laurent {
    pub valuation: i32,
    pub order: i32,
    pub coeffs: Vec<RationalFunction>,
    zero: RationalFunction,
}

impl Laurent {
    pub fn coeff(&self, k: i32) -> &RationalFunction {
        assert!(k <= self.order, "coefficient {k} beyond truncation order {}", self.order);
        if k < self.valuation {
            return &self.zero;
        }
        self.coeffs.get((k - self.valuation) as usize).unwrap_or(&self.zero)
    }

    /// Order of the leading nonzero term (None if zero through `order`).
    pub fn leading_order(&self) -> Option<i32> {
        self.coeffs.iter().position(|c| !c.is_zero()).map(|i| self.valuation + i as i32)
    }
}

fn to_upoly(v: Vec<RationalFunction>) -> UPoly<RationalFunction> {
    upoly::trim(v)
}

fn low_order(p: &[RationalFunction]) -> usize {
    p.iter().position(|c| !c.is_zero()).unwrap_or(0)
}

/// Expand `f` at `point` with all coefficients up to `order`.
pub fn laurent_expand(f: &RationalFunction, point: &Point, order: i32) -> Result<Laurent, FieldError> {
    let zero = RationalFunction::zero(f.tower());
    let (num, den) = f.fiber_num_den();
    let num = to_upoly(num);
    let den = to_upoly(den);
    if num.is_empty() {
        return Ok(Laurent { valuation: order + 1, order, coeffs: Vec::new(), zero });
    }
    let (n, d, shift) = match point {
        Point::Finite(c) => {
            let c = RationalFunction::from_rational(f.tower(), c.clone());
            (upoly::taylor_shift(&num, &c), upoly::taylor_shift(&den, &c), 0i32)
        }
        Point::Infinity => {
            let dn = num.len() as i32 - 1;
            let dd = den.len() as i32 - 1;
            let mut rn = num.clone();
            rn.reverse();
            let mut rd = den.clone();
            rd.reverse();
            (rn, rd, dd - dn)
        }
    };
    let vn = low_order(&n);
    let vd = low_order(&d);
    let valuation = vn as i32 - vd as i32 + shift;
    let terms = order - valuation + 1;
    let coeffs = if terms <= 0 {
        Vec::new()
    } else {
        upoly::series_div(&n[vn..], &d[vd..], terms as usize, &zero)
    };
    Ok(Laurent { valuation, order, coeffs, zero })
}

/// Residue of the scalar differential `f·dz` at `point`.
pub fn residue_dz(f: &RationalFunction, point: &Point) -> Result<RationalFunction, FieldError> {
    match point {
        Point::Finite(_) => Ok(laurent_expand(f, point, -1)?.coeff(-1).clone()),
        // dz = −du/u², so the u⁻¹ coefficient of f(1/u)(−1/u²) is −c₁
        Point::Infinity => Ok(-laurent_expand(f, point, 1)?.coeff(1)),
    }
}

/// Exact pole order of `f` at `point` (0 when regular; negative = zero order).
pub fn pole_order(f: &RationalFunction, point: &Point) -> i32 {
    if f.is_zero() {
        return 0;
    }
    let (num, den) = f.fiber_num_den();
    let (num, den) = (to_upoly(num), to_upoly(den));
    let val = match point {
        Point::Finite(c) => {
            let c = RationalFunction::from_rational(f.tower(), c.clone());
            low_order(&upoly::taylor_shift(&num, &c)) as i32 - low_order(&upoly::taylor_shift(&den, &c)) as i32
        }
        Point::Infinity => den.len() as i32 - num.len() as i32,
    };
    -val
}

/// Coefficients in z of a fiber-polynomial element (its z-denominator must be z-free).
pub fn fiber_poly_coeffs(g: &RationalFunction) -> Result<UPoly<RationalFunction>, FieldError> {
    let (num, den) = g.fiber_num_den();
    let den = to_upoly(den);
    if den.len() != 1 {
        return Err(FieldError::Malformed(format!("`{g}` is not a polynomial in the fiber variable")));
    }
    let inv = den[0].inv().map_err(|_| FieldError::DivisionByZero)?;
    Ok(to_upoly(num.iter().map(|c| c * &inv).collect()))
}

/// Σ h(β) over the roots β of the squarefree polynomial G, computed as the
/// trace of multiplication by h on K[z]/(G): reduce h mod G, then pair its
/// coefficients with the power sums of the roots.
pub fn resultant_trace(g: &RationalFunction, h: &RationalFunction) -> Result<RationalFunction, FieldError> {
    let gc = fiber_poly_coeffs(g)?;
    trace_mod(&gc, h)
}

pub fn trace_mod(g: &[RationalFunction], h: &RationalFunction) -> Result<RationalFunction, FieldError> {
    let g = upoly::monic(g);
    let n = match upoly::deg(&g) {
        None | Some(0) => return Ok(RationalFunction::zero(h.tower())),
        Some(n) => n,
    };
    let one = RationalFunction::one(h.tower());
    let dg = upoly::derivative(&g);
    if upoly::deg(&upoly::gcd(&g, &dg)) != Some(0) {
        return Err(FieldError::DegenerateDivisor);
    }
    let (num, den) = h.fiber_num_den();
    let (num, den) = (to_upoly(num), to_upoly(den));
    let (gg, s, _) = upoly::ext_gcd(&den, &g, &one);
    if upoly::deg(&gg) != Some(0) {
        return Err(FieldError::PoleOnDivisor);
    }
    let hr = upoly::rem(&upoly::mul(&num, &s), &g);
    // Newton's identities for the monic G = z^n + c_{n−1}z^{n−1} + … + c₀
    let c = |i: usize| g[i].clone();
    let mut p: Vec<RationalFunction> = vec![RationalFunction::from_int(h.tower(), n as i64)];
    for k in 1..n {
        let mut acc = c(n - k).scale(&BigRational::from_integer((k as i64).into()));
        for j in 1..k {
            acc = &acc + &(&c(n - j) * &p[k - j]);
        }
        p.push(-acc);
    }
    let mut tr = RationalFunction::zero(h.tower());
    for (k, coef) in hr.iter().enumerate() {
        if !coef.is_zero() {
            tr = &tr + &(coef * &p[k]);
        }
    }
    Ok(tr)
}

/// Convenience for tests and builders: a point's coordinate as a tower element.
pub fn point_value(tower: &std::sync::Arc<super::tower::ScalarTower>, p: &Point) -> Option<RationalFunction> {
    match p {
        Point::Finite(c) => Some(RationalFunction::from_rational(tower, c.clone())),
        Point::Infinity => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::parse::parse_scalar;
    use crate::field::tower::ScalarTower;

    #[test]
    fn expansion_examples() {
        let t = ScalarTower::new("z", &["u"], &[], None).unwrap();
        let f = parse_scalar(&t, "1/(z*(z-1))").unwrap();
        let l = laurent_expand(&f, &Point::int(0), 1).unwrap();
        for k in -1..=1 {
            assert_eq!(l.coeff(k), &RationalFunction::from_int(&t, -1));
        }
        let z = parse_scalar(&t, "z").unwrap();
        let l = laurent_expand(&z, &Point::Infinity, 0).unwrap();
        assert_eq!(l.valuation, -1);
        assert!(l.coeff(-1).is_one());
        assert!(l.coeff(0).is_zero());
        let g = parse_scalar(&t, "1/(z-1)").unwrap();
        assert_eq!(laurent_expand(&g, &Point::int(0), 0).unwrap().coeff(0), &RationalFunction::from_int(&t, -1));
    }

    #[test]
    fn trace_examples() {
        let t = ScalarTower::new("z", &["u"], &[], None).unwrap();
        let s = |e: &str| parse_scalar(&t, e).unwrap();
        assert_eq!(resultant_trace(&s("z-7"), &s("z^2")).unwrap(), s("49"));
        assert_eq!(resultant_trace(&s("z^2-u"), &s("z^2")).unwrap(), s("2*u"));
        assert_eq!(resultant_trace(&s("2-z"), &s("z")).unwrap(), s("2"));
        assert!(matches!(resultant_trace(&s("(z-1)^2"), &s("z")), Err(FieldError::DegenerateDivisor)));
        assert!(matches!(resultant_trace(&s("z-1"), &s("1/(z-1)")), Err(FieldError::PoleOnDivisor)));
    }

    #[test]
    fn residue_at_infinity() {
        let t = ScalarTower::new("z", &[], &[], None).unwrap();
        let f = parse_scalar(&t, "1/z").unwrap();
        assert_eq!(residue_dz(&f, &Point::Infinity).unwrap(), RationalFunction::from_int(&t, -1));
        assert_eq!(pole_order(&RationalFunction::one(&t), &Point::Infinity), -0);
        assert_eq!(pole_order(&parse_scalar(&t, "z^3/(z-1)").unwrap(), &Point::Infinity), 2);
        assert_eq!(pole_order(&parse_scalar(&t, "1/(z-1)^2").unwrap(), &Point::int(1)), 2);
    }
}
