//! Canonical forms in Ω¹_K / (Q-span of dlog K^×).
//!
//! For every recognized polar factor p of a closed base form ω the residue of
//! ω along p is computed; its rational part (the constant term, when the
//! residue is a polynomial in the parameters) is removed by subtracting a
//! multiple of dlog p. Two forms are congruent iff the remainders agree.

use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{exterior_d, AbsoluteForm1};
use crate::field::frac::Frac;
use crate::field::poly::{gcd, Poly};
use crate::field::tower::substitute_frac;
use crate::field::{upoly, RationalFunction, ScalarTower};

/// Auxiliary multivariate factors a scenario declares as recognized
/// (monomials and the extension square are always recognized).
#[derive(Clone, Debug, Default)]
pub struct FactorHints {
    pub aux: Vec<Poly>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DlogError {
    #[error("not a class: the form is not closed")]
    NotClosed,
    #[error("not a base form: {0}")]
    NotBaseForm(String),
    #[error("cannot certify: {0}")]
    CannotCertify(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct BaseFormClass {
    representative: AbsoluteForm1,
    log_part: Vec<(Poly, BigRational)>,
}

impl BaseFormClass {
    pub fn representative(&self) -> &AbsoluteForm1 {
        &self.representative
    }

    pub fn log_part(&self) -> &[(Poly, BigRational)] {
        &self.log_part
    }

    pub fn is_zero(&self) -> bool {
        self.representative.is_zero()
    }

    /// Same class: representatives agree.
    pub fn same_class(&self, other: &BaseFormClass) -> bool {
        self.representative == other.representative
    }

    fn log_strings(&self) -> Vec<(String, String)> {
        let names = self.representative.tower().names();
        let mut v: Vec<(String, String)> =
            self.log_part.iter().map(|(p, c)| (p.format_with(&names), c.to_string())).collect();
        v.sort();
        v
    }
}

impl fmt::Display for BaseFormClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let logs: Vec<String> = self.log_strings().into_iter().map(|(p, c)| format!("({c})*dlog({p})")).collect();
        write!(f, "{}", self.representative.display())?;
        if !logs.is_empty() {
            write!(f, " mod [{}]", logs.join(", "))?;
        }
        Ok(())
    }
}

fn certify(msg: impl Into<String>) -> DlogError {
    DlogError::CannotCertify(msg.into())
}

/// Reduce a closed base 1-form to its canonical representative.
pub fn dlog_reduce(omega: &AbsoluteForm1, hints: &FactorHints) -> Result<BaseFormClass, DlogError> {
    let tower = omega.tower().clone();
    if omega.rank() != 1 {
        return Err(DlogError::NotBaseForm("matrix-valued form".into()));
    }
    let coeffs = omega.scalar_coeffs();
    if !coeffs[0].is_zero() {
        return Err(DlogError::NotBaseForm("nonzero dz component".into()));
    }
    if coeffs.iter().any(|c| !c.is_fiber_free()) {
        return Err(DlogError::NotBaseForm("coefficients depend on the fiber coordinate".into()));
    }
    if !exterior_d(omega).is_zero() {
        return Err(DlogError::NotClosed);
    }
    if coeffs.iter().any(|c| !c.q().is_zero()) {
        return Err(certify("coefficient involves the extension generator"));
    }
    let mut c: Vec<Frac> = coeffs[1..].iter().map(|x| x.p().clone()).collect();
    let factors = polar_factors(&tower, &c, hints)?;
    let mut log_part = Vec::new();
    for p in factors {
        let pi = rational_residue(&tower, &c, &p)?;
        if pi.is_zero() {
            continue;
        }
        let pf = Frac::from_poly(p.clone());
        let pinv = pf.inv();
        for (i, ci) in c.iter_mut().enumerate() {
            let dp = pf.derivative(tower.base_index(i));
            if !dp.is_zero() {
                *ci = &*ci - &(&dp * &pinv).scale(&pi);
            }
        }
        log_part.push((p, pi));
    }
    let mut all = vec![RationalFunction::zero(&tower)];
    all.extend(c.into_iter().map(|f| RationalFunction::from_frac(&tower, f)));
    Ok(BaseFormClass { representative: AbsoluteForm1::scalar(&tower, &all), log_part })
}

fn base_vars_of(tower: &ScalarTower, p: &Poly) -> Vec<usize> {
    (0..tower.nbase()).map(|i| tower.base_index(i)).filter(|&v| p.uses_var(v)).collect()
}

fn uses_params(tower: &ScalarTower, p: &Poly) -> bool {
    (0..tower.params().len()).any(|i| p.uses_var(tower.param_index(i)))
}

/// Candidate irreducible polar divisors, monic and deduplicated.
fn polar_factors(tower: &Arc<ScalarTower>, c: &[Frac], hints: &FactorHints) -> Result<Vec<Poly>, DlogError> {
    let n = tower.nvars();
    let mut aux: Vec<Poly> = hints.aux.iter().map(|p| p.monic()).collect();
    if let Some((_, s)) = tower.ext() {
        if s.num_terms() > 1 {
            aux.push(s.monic());
        }
    }
    let mut out: Vec<Poly> = Vec::new();
    let push = |p: Poly, out: &mut Vec<Poly>| {
        let p = p.monic();
        if !out.contains(&p) {
            out.push(p);
        }
    };
    for f in c {
        let den = f.den();
        if den.is_constant() {
            continue;
        }
        let mono = den.min_exps();
        for i in 0..tower.nbase() {
            let v = tower.base_index(i);
            if mono[v] > 0 {
                push(Poly::var(n, v), &mut out);
            }
        }
        let mut rest = den.div_monomial(&mono);
        for a in &aux {
            if a.is_constant() {
                continue;
            }
            let mut hit = false;
            while let Some(q) = rest.div_exact(a) {
                rest = q;
                hit = true;
            }
            if hit {
                push(a.clone(), &mut out);
            }
        }
        let vars = base_vars_of(tower, &rest);
        if vars.is_empty() {
            continue;
        }
        if vars.len() > 1 || uses_params(tower, &rest) {
            let names = tower.names();
            return Err(certify(format!("unrecognized denominator factor `{}`", rest.format_with(&names))));
        }
        for p in univariate_factors(&rest, vars[0])? {
            push(p, &mut out);
        }
    }
    Ok(out)
}

fn to_q_upoly(p: &Poly, v: usize) -> Vec<BigRational> {
    let cs = p.to_univariate(v);
    cs.iter().map(|c| c.constant_value().expect("univariate")).collect()
}

fn from_q_upoly(n: usize, v: usize, cs: &[BigRational]) -> Poly {
    let coeffs: Vec<Poly> = cs.iter().map(|c| Poly::constant(n, c.clone())).collect();
    Poly::from_univariate(n, v, &coeffs)
}

/// Linear factors from rational roots, plus the remaining squarefree cofactor.
fn univariate_factors(p: &Poly, v: usize) -> Result<Vec<Poly>, DlogError> {
    let n = p.nvars();
    let d = p.derivative(v);
    let sqf = p.div_exact(&gcd(p, &d)).expect("gcd divides");
    let mut rest = to_q_upoly(&sqf, v);
    let mut out = Vec::new();
    for r in upoly::rational_roots(&rest).ok_or_else(|| certify("coefficient too large for root search"))? {
        let lin = vec![-r.clone(), BigRational::one()];
        rest = upoly::divrem(&rest, &lin).0;
        out.push(from_q_upoly(n, v, &lin));
    }
    if upoly::deg(&rest).unwrap_or(0) >= 1 {
        out.push(from_q_upoly(n, v, &rest));
    }
    Ok(out)
}

/// Rational part of the residue of ω along the irreducible candidate `p`.
fn rational_residue(tower: &Arc<ScalarTower>, c: &[Frac], p: &Poly) -> Result<BigRational, DlogError> {
    let names = tower.names();
    let vars = base_vars_of(tower, p);
    let x = *vars
        .iter()
        .find(|&&v| p.degree_in(v) == 1)
        .or_else(|| vars.first())
        .ok_or_else(|| certify("polar factor without base variables"))?;
    let i = (0..tower.nbase()).find(|&i| tower.base_index(i) == x).unwrap();
    let cx = &c[i];
    let mut k = 0u32;
    let mut den = cx.den().clone();
    while let Some(q) = den.div_exact(p) {
        den = q;
        k += 1;
    }
    if k == 0 {
        return Ok(BigRational::zero());
    }
    let pf = Frac::from_poly(p.clone());
    let rho = if p.degree_in(x) == 1 {
        // p = p1·x + p0; residue = (1/(k−1)!)·∂^{k−1}(c_x p^k / p1^k) at x = −p0/p1
        let pcoef = p.to_univariate(x);
        let p1 = Frac::from_poly(pcoef[1].clone());
        let p0 = Frac::from_poly(pcoef[0].clone());
        let x0 = -&(&p0 / &p1);
        let mut h = &(cx * &pf.pow(k as i32)) / &p1.pow(k as i32);
        let mut fact = BigRational::one();
        for j in 1..k {
            h = h.derivative(x);
            fact *= BigRational::from_integer(j.into());
        }
        substitute_frac(&h, x, &x0).scale(&fact.recip())
    } else {
        if k > 1 {
            return Err(certify(format!("higher-order pole along nonlinear factor `{}`", p.format_with(&names))));
        }
        residue_mod(tower, cx, p, x)?
    };
    if (0..tower.nbase()).any(|j| rho.uses_var(tower.base_index(j))) {
        return Err(certify(format!("residue along `{}` is not constant", p.format_with(&names))));
    }
    match rho.constant_value() {
        Some(v) => Ok(v),
        None if rho.den().is_constant() => {
            Ok(rho.num().constant_term() / rho.den().constant_value().unwrap())
        }
        None => Err(certify(format!("residue along `{}` is not polynomial in the parameters", p.format_with(&names)))),
    }
}

/// Simple-pole residue N/(Q·∂p) reduced modulo p in the variable x.
fn residue_mod(tower: &Arc<ScalarTower>, cx: &Frac, p: &Poly, x: usize) -> Result<Frac, DlogError> {
    let names = tower.names();
    let q = cx.den().div_exact(p).unwrap();
    let dp = p.derivative(x);
    let to_up = |poly: &Poly| -> Vec<RationalFunction> {
        poly.to_univariate(x).into_iter().map(|c| RationalFunction::from_frac(tower, Frac::from_poly(c))).collect()
    };
    let pu = to_up(p);
    let den = upoly::rem(&upoly::mul(&to_up(&q), &to_up(&dp)), &pu);
    let one = RationalFunction::one(tower);
    let (g, s, _) = upoly::ext_gcd(&den, &pu, &one);
    if upoly::deg(&g) != Some(0) {
        return Err(certify(format!("factor `{}` is not squarefree against its cofactor", p.format_with(&names))));
    }
    let r = upoly::rem(&upoly::mul(&to_up(cx.num()), &s), &pu);
    match upoly::deg(&r) {
        None => Ok(Frac::zero(tower.nvars())),
        Some(0) => Ok(r[0].p().clone()),
        Some(_) => Err(certify(format!("residue along `{}` is not constant", p.format_with(&names)))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::parse_form;

    fn tower() -> Arc<ScalarTower> {
        ScalarTower::new("z", &["t"], &[], None).unwrap()
    }

    fn class(t: &Arc<ScalarTower>, s: &str) -> Result<BaseFormClass, DlogError> {
        let f = parse_form(t, s).unwrap();
        dlog_reduce(&AbsoluteForm1::scalar(t, &f), &FactorHints::default())
    }

    #[test]
    fn examples() {
        let t = tower();
        let c = class(&t, "dt/t").unwrap();
        assert!(c.is_zero());
        assert_eq!(c.log_part().len(), 1);
        assert_eq!(c.log_part()[0].1, BigRational::one());
        assert!(class(&t, "(1/2)*dt/(t-1)").unwrap().is_zero());
        let c = class(&t, "dt/t^2").unwrap();
        assert!(!c.is_zero());
        assert_eq!(c.representative(), &AbsoluteForm1::scalar(&t, &parse_form(&t, "dt/t^2").unwrap()));
    }

    #[test]
    fn irreducible_quadratic_and_double_pole() {
        let t = tower();
        assert!(class(&t, "3*2*t*dt/(t^2+1)").unwrap().is_zero());
        // d(1/(t-2)) + 5 dlog(t-2)
        let c = class(&t, "-dt/(t-2)^2 + 5*dt/(t-2)").unwrap();
        assert!(!c.is_zero());
        assert_eq!(c.log_part()[0].1, BigRational::from_integer(5.into()));
    }

    #[test]
    fn parameters_and_monomials() {
        let t = ScalarTower::new("z", &["a", "b"], &["alpha", "beta"], None).unwrap();
        let c = class(&t, "-2*alpha*da/a - 2*beta*db/b").unwrap();
        assert!(!c.is_zero());
        let c = class(&t, "(3 - 2*alpha)*da/a - (2/5)*db/b").unwrap();
        assert!(!c.is_zero());
        let d = class(&t, "-2*alpha*da/a").unwrap();
        assert!(c.same_class(&d));
        assert!(class(&t, "da*b/(a*b) + db/b").unwrap().is_zero());
    }

    #[test]
    fn refusals() {
        let t = ScalarTower::new("z", &["a", "b"], &[], None).unwrap();
        assert_eq!(class(&t, "b*da").unwrap_err(), DlogError::NotClosed);
        assert!(matches!(class(&t, "(da + db)/(a+b+1)"), Err(DlogError::CannotCertify(_))));
    }
}
