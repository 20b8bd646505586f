//! Right-hand side of the determinant formula: a global section s = F(z)dz of
//! ω(D), the pushforward of det(E,∇) along its divisor, and the local
//! residue-trace corrections res Tr(dg g⁻¹ ∧ A) at the points of D.
//!
//! The section s itself serves as local generator at every x ∈ D, so it is
//! congruent to the local generators by construction; the default
//! generators dz/(z−α)^m and z^{m−2}dz enter only through unit adjustments.

use std::sync::Arc;

use num_rational::BigRational;
use num_traits::Zero;
use serde_json::json;

use crate::connection::{Admissibility, ConnectionSpec};
use crate::derham::{h1_basis, DerhamError};
use crate::field::series::{fiber_poly_coeffs, laurent_expand, pole_order, Point};
use crate::field::upoly;
use crate::field::{resultant_trace, FieldError, RationalFunction, ScalarTower};
use crate::forms::{dlog_reduce, residue, wedge, AbsoluteForm1, Mat, BaseFormClass, DlogError, FactorHints, FormError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EpsilonError {
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("infinity must belong to the divisor")]
    InfinityNotInDivisor,
    #[error("the zero divisor of the global section is not reduced")]
    DegenerateSection,
    #[error("leading matrix g is singular as a function")]
    SingularG,
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Dlog(#[from] DlogError),
    #[error(transparent)]
    Derham(#[from] DerhamError),
}

/// s = F(z)dz with its divisor off D: zeros are the roots of `zeros`, poles
/// are listed explicitly (only perturbed sections have any).
#[derive(Clone, Debug)]
pub struct GlobalSection {
    f: RationalFunction,
    zeros: RationalFunction,
    poles: Vec<(BigRational, u32)>,
    units: Vec<(Point, RationalFunction)>,
}

impl GlobalSection {
    pub fn f(&self) -> &RationalFunction {
        &self.f
    }

    pub fn s(&self) -> AbsoluteForm1 {
        let t = self.f.tower();
        let mut c = vec![RationalFunction::zero(t); t.nbase() + 1];
        c[0] = self.f.clone();
        AbsoluteForm1::scalar(t, &c)
    }

    /// Polynomial whose roots are the zeros of s.
    pub fn g(&self) -> &RationalFunction {
        &self.zeros
    }

    pub fn poles(&self) -> &[(BigRational, u32)] {
        &self.poles
    }

    /// Per point x ∈ D, the unit s/s_x against the default generator s_x.
    pub fn units(&self) -> &[(Point, RationalFunction)] {
        &self.units
    }
}

fn z_minus(t: &Arc<ScalarTower>, c: &BigRational) -> RationalFunction {
    &RationalFunction::fiber_var(t) - &RationalFunction::from_rational(t, c.clone())
}

/// Coefficient of the default local generator dz_loc/z_loc^m: (z−α)^{−m}, or
/// −z^{m−2} at ∞ where u = 1/z and du/u^m = −z^{m−2}dz.
pub fn default_generator(t: &Arc<ScalarTower>, p: &Point, m: u32) -> RationalFunction {
    match p {
        Point::Finite(c) => z_minus(t, c).pow(-(m as i32)),
        Point::Infinity => -&RationalFunction::fiber_var(t).pow(m as i32 - 2),
    }
}

fn finite_part(spec: &ConnectionSpec) -> Vec<(BigRational, u32)> {
    spec.divisor()
        .iter()
        .filter_map(|(p, m)| match p {
            Point::Finite(c) => Some((c.clone(), *m)),
            Point::Infinity => None,
        })
        .collect()
}

/// Π (z−α)^{m_α} over the finite part of D.
fn divisor_poly(spec: &ConnectionSpec) -> RationalFunction {
    let t = spec.tower();
    finite_part(spec).iter().fold(RationalFunction::one(t), |acc, (c, m)| &acc * &z_minus(t, c).pow(*m as i32))
}

fn is_squarefree(g: &RationalFunction) -> Result<bool, FieldError> {
    let c = fiber_poly_coeffs(g)?;
    if upoly::deg(&c).unwrap_or(0) == 0 {
        return Ok(true);
    }
    Ok(upoly::deg(&upoly::gcd(&c, &upoly::derivative(&c))) == Some(0))
}

fn with_units(spec: &ConnectionSpec, f: RationalFunction, zeros: RationalFunction, poles: Vec<(BigRational, u32)>) -> GlobalSection {
    let t = spec.tower();
    let units = spec
        .divisor()
        .iter()
        .map(|(p, m)| (p.clone(), &f * &default_generator(t, p, *m).inv().expect("nonzero generator")))
        .collect();
    GlobalSection { f, zeros, poles, units }
}

/// s = Σ_α dz/(z−α)^{m_α} − z^{m_∞−2}dz for m_∞ ≥ 2. For m_∞ = 1 the last
/// term is replaced by −λ·dz/(z−α₀) with α₀ the first point of multiplicity
/// ≥ 2 (else the first point) and λ = ±1 chosen so that s generates at ∞
/// and at α₀.
pub fn build_global_section(spec: &ConnectionSpec) -> Result<GlobalSection, EpsilonError> {
    let t = spec.tower();
    let m_inf = spec.mult(&Point::Infinity);
    if m_inf == 0 {
        return Err(EpsilonError::InfinityNotInDivisor);
    }
    let fin = finite_part(spec);
    let mut f = RationalFunction::zero(t);
    for (c, m) in &fin {
        f = &f + &z_minus(t, c).pow(-(*m as i32));
    }
    if m_inf >= 2 {
        f = &f - &RationalFunction::fiber_var(t).pow(m_inf as i32 - 2);
    } else {
        let simple = fin.iter().filter(|(_, m)| *m == 1).count();
        let (a0, lambda) = match fin.iter().find(|(_, m)| *m >= 2) {
            Some((c, _)) => (c.clone(), if simple == 1 { -1 } else { 1 }),
            None => match fin.first() {
                Some((c, _)) => (c.clone(), -1),
                None => return Err(EpsilonError::Precondition("D = (∞) has no global generator".into())),
            },
        };
        f = &f - &z_minus(t, &a0).pow(-1).scale(&BigRational::from_integer(lambda.into()));
    }
    let g = &f * &divisor_poly(spec);
    if !is_squarefree(&g)? {
        return Err(EpsilonError::DegenerateSection);
    }
    Ok(with_units(spec, f, g, Vec::new()))
}

/// Another section congruent to `section` modulo D:
/// s' = s + c·Π(z−α)^{m_α}/(z−β)^N dz with N = Σm_α + 2 and β ∉ D.
/// Used to retry when (s) is not reduced, and to test independence of s.
pub fn perturbed_section(spec: &ConnectionSpec, section: &GlobalSection, c: &BigRational, beta: &BigRational) -> Result<GlobalSection, EpsilonError> {
    let t = spec.tower();
    let clash = spec.divisor().iter().any(|(p, _)| *p == Point::Finite(beta.clone())) || section.poles.iter().any(|(b, _)| b == beta);
    if clash || c.is_zero() {
        return Err(EpsilonError::Precondition("β must lie off D and c must be nonzero".into()));
    }
    let pd = divisor_poly(spec);
    let n: u32 = finite_part(spec).iter().map(|(_, m)| m).sum::<u32>() + 2;
    let q = z_minus(t, beta).pow(n as i32);
    let extra = (&pd * &q.inv()?).scale(c);
    let f = section.f() + &extra;
    let old = section.poles.iter().fold(RationalFunction::one(t), |acc, (b, k)| &acc * &z_minus(t, b).pow(*k as i32));
    let zeros = &(section.g() * &q) + &(&(&pd * &pd) * &old).scale(c);
    if !is_squarefree(&zeros)? {
        return Err(EpsilonError::DegenerateSection);
    }
    let mut poles = section.poles.clone();
    poles.push((beta.clone(), n));
    Ok(with_units(spec, f, zeros, poles))
}

/// Value at a constant point of a function regular there.
fn value_at_point(h: &RationalFunction, b: &BigRational) -> Result<RationalFunction, FieldError> {
    let l = laurent_expand(h, &Point::Finite(b.clone()), 0)?;
    if l.leading_order().map_or(false, |v| v < 0) {
        return Err(FieldError::PoleOnDivisor);
    }
    Ok(l.coeff(0).clone())
}

/// f_*((s)·detform): restrict the scalar form p dz + Σ q_τ dτ to the divisor
/// of s. On G(β, τ) = 0 one has dβ = −(∂_τG/∂_zG)dτ, and the sum over roots is
/// a resultant trace; poles of s enter with negative multiplicity.
pub fn divisor_pushforward(section: &GlobalSection, detform: &AbsoluteForm1) -> Result<AbsoluteForm1, EpsilonError> {
    if detform.rank() != 1 {
        return Err(EpsilonError::Precondition("detform must be scalar".into()));
    }
    let t = detform.tower().clone();
    let coeffs = detform.scalar_coeffs();
    let g = section.g();
    let gz = g.derivative(0);
    let mut out = vec![RationalFunction::zero(&t)];
    for tau in 0..t.nbase() {
        let q = &coeffs[tau + 1];
        let gt = g.derivative(t.base_index(tau));
        let h = if gt.is_zero() || coeffs[0].is_zero() { q.clone() } else { q - &(&(&coeffs[0] * &gt) * &gz.inv()?) };
        let mut acc = resultant_trace(g, &h)?;
        for (b, n) in section.poles() {
            // β is constant, so only q contributes at the pole
            let v = value_at_point(q, b)?;
            acc = &acc - &v.scale(&BigRational::from_integer((*n as i64).into()));
        }
        out.push(acc);
    }
    Ok(AbsoluteForm1::scalar(&t, &out))
}

enum Factor<'a> {
    Plain(&'a Mat),
    Inverse(&'a Mat),
}

fn mat_valuation(m: &Mat, x: &Point) -> Option<i32> {
    m.entries().filter(|e| !e.is_zero()).map(|e| -pole_order(e, x)).min()
}

/// Coefficients y^v … y^{v+n−1} of the entrywise expansion of m at x.
fn mat_series(m: &Mat, x: &Point, v: i32, n: usize) -> Result<Vec<Mat>, FieldError> {
    let exps = m.entries().map(|e| laurent_expand(e, x, v + n as i32 - 1)).collect::<Result<Vec<_>, _>>()?;
    let c = m.cols();
    Ok((0..n).map(|k| Mat::from_fn(m.rows(), c, |i, j| exps[i * c + j].coeff(v + k as i32).clone())).collect())
}

/// res_x of Tr(F₁F₂⋯) dz computed from truncated local expansions; None if an
/// inverse factor has a singular leading coefficient.
fn residue_trace_product(factors: &[Factor], x: &Point) -> Result<Option<RationalFunction>, FieldError> {
    let t = match &factors[0] {
        Factor::Plain(m) | Factor::Inverse(m) => m.get(0, 0).tower().clone(),
    };
    let zero = RationalFunction::zero(&t);
    let mut vals = Vec::new();
    for f in factors {
        match f {
            Factor::Plain(m) => match mat_valuation(m, x) {
                Some(v) => vals.push(v),
                None => return Ok(Some(zero)),
            },
            Factor::Inverse(m) => vals.push(-mat_valuation(m, x).ok_or(FieldError::DivisionByZero)?),
        }
    }
    // y = z − c has res = coeff of y⁻¹; y = 1/z has dz = −dy/y², res = −coeff of y¹
    let target = if matches!(x, Point::Infinity) { 1 } else { -1 };
    let total: i32 = vals.iter().sum();
    if total > target {
        return Ok(Some(zero));
    }
    let n = (target - total + 1) as usize;
    let mut acc: Option<Vec<Mat>> = None;
    for (f, &v) in factors.iter().zip(&vals) {
        let s = match f {
            Factor::Plain(m) => mat_series(m, x, v, n)?,
            Factor::Inverse(m) => {
                let ms = mat_series(m, x, -v, n)?;
                let Some(n0) = ms[0].inverse() else { return Ok(None) };
                let mut inv: Vec<Mat> = vec![n0.clone()];
                for k in 1..n {
                    let mut sum = ms[k].mul(&inv[0]);
                    for j in 1..k {
                        sum = sum.add(&ms[k - j].mul(&inv[j]));
                    }
                    inv.push(n0.mul(&sum).neg());
                }
                inv
            }
        };
        acc = Some(match acc {
            None => s,
            Some(a) => (0..n)
                .map(|k| {
                    let mut c = a[0].mul(&s[k]);
                    for j in 1..=k {
                        c = c.add(&a[j].mul(&s[k - j]));
                    }
                    c
                })
                .collect(),
        });
    }
    let c = acc.expect("at least one factor")[n - 1].trace();
    Ok(Some(if target == 1 { -c } else { c }))
}

fn mat_d(m: &Mat, v: usize) -> Mat {
    m.map(|e| e.derivative(v))
}

/// res_x Tr(dg g⁻¹ ∧ A) for A = g·f dz + (base part). With f scalar,
/// dg g⁻¹ = dA_z A_z⁻¹ − dlog f, and the dz∧dτ coefficient of the trace is
/// Tr(∂_zA_z A_z⁻¹ A_τ) − Tr ∂_τA_z − (f_z Tr A_τ − f_τ Tr A_z)/f; each piece
/// is a residue of local expansions, so the section's zeros never enter.
fn correction_for(spec: &ConnectionSpec, f: &RationalFunction, x: &Point, base_only: bool) -> Result<AbsoluteForm1, EpsilonError> {
    let t = spec.tower();
    let az = spec.a().fiber();
    let daz = mat_d(az, 0);
    let fm = Mat::from_rows(vec![vec![f.clone()]]);
    let fz = Mat::from_rows(vec![vec![f.derivative(0)]]);
    let tr_z = Mat::from_rows(vec![vec![az.trace()]]);
    let mut out = vec![RationalFunction::zero(t)];
    for (tau, a_tau) in spec.a().base().iter().enumerate() {
        let v = t.base_index(tau);
        let mut c = residue_trace_product(&[Factor::Plain(&daz), Factor::Inverse(az), Factor::Plain(a_tau)], x)?
            .ok_or(EpsilonError::SingularG)?;
        let tr_tau = Mat::from_rows(vec![vec![a_tau.trace()]]);
        c = &c - &residue_trace_product(&[Factor::Plain(&fz), Factor::Inverse(&fm), Factor::Plain(&tr_tau)], x)?.expect("scalar");
        if !base_only {
            c = &c - &residue_trace_product(&[Factor::Plain(&mat_d(az, v))], x)?.expect("no inverse");
            let ft = Mat::from_rows(vec![vec![f.derivative(v)]]);
            c = &c + &residue_trace_product(&[Factor::Plain(&ft), Factor::Inverse(&fm), Factor::Plain(&tr_z)], x)?.expect("scalar");
        }
        out.push(c);
    }
    Ok(AbsoluteForm1::scalar(t, &out))
}

/// Correction at x against the default generator s_x.
pub fn local_correction(spec: &ConnectionSpec, x: &Point) -> Result<AbsoluteForm1, EpsilonError> {
    let m = spec.mult(x);
    correction_for(spec, &default_generator(spec.tower(), x, m), x, false)
}

/// The same residue with only the base part η/z^{m−1} of A; agrees with
/// [`local_correction`] because the default generators are closed.
pub fn local_correction_base(spec: &ConnectionSpec, x: &Point) -> Result<AbsoluteForm1, EpsilonError> {
    let m = spec.mult(x);
    correction_for(spec, &default_generator(spec.tower(), x, m), x, true)
}

/// −res_x(du/u ∧ Tr A) for the unit u = s/s_x: switching the local generator
/// from s_x to s changes dg g⁻¹ by −du/u.
pub fn unit_adjustment(spec: &ConnectionSpec, section: &GlobalSection, x: &Point) -> Result<AbsoluteForm1, EpsilonError> {
    let u = section
        .units()
        .iter()
        .find(|(p, _)| p == x)
        .map(|(_, u)| u.clone())
        .ok_or_else(|| EpsilonError::Precondition(format!("{x} is not in the divisor")))?;
    let dlu = AbsoluteForm1::dlog(&u);
    Ok(residue(&wedge(&dlu, &spec.a().trace())?, x)?.neg())
}

/// Correction at x with s itself as local generator.
pub fn section_correction(spec: &ConnectionSpec, section: &GlobalSection, x: &Point) -> Result<AbsoluteForm1, EpsilonError> {
    correction_for(spec, section.f(), x, false)
}

fn check_pre(spec: &ConnectionSpec) -> Result<(), EpsilonError> {
    if let Admissibility::NotAdmissible { point, reason } = spec.check_admissible() {
        return Err(EpsilonError::Precondition(format!("not admissible at {point}: {reason}")));
    }
    if !spec.is_integrable() {
        return Err(EpsilonError::Precondition("connection is not integrable".into()));
    }
    Ok(())
}

/// The unreduced form f_*((s)·det(E,∇)) − Σ_x res_x Tr(dg g⁻¹ ∧ A), together
/// with the per-point corrections.
pub fn rhs_form(spec: &ConnectionSpec, section: &GlobalSection) -> Result<(AbsoluteForm1, Vec<(Point, AbsoluteForm1)>), EpsilonError> {
    check_pre(spec)?;
    let tr = spec.a().trace();
    // boundary check: deg E = 0 forces the residues of Tr A_z to sum to zero
    let total = spec.divisor().iter().try_fold(RationalFunction::zero(spec.tower()), |acc, (p, _)| {
        crate::field::series::residue_dz(&tr.fiber().get(0, 0).clone(), p).map(|r| &acc + &r)
    })?;
    if !total.is_zero() {
        return Err(EpsilonError::Precondition(format!("residues of Tr A sum to {total}, not 0")));
    }
    let mut form = divisor_pushforward(section, &tr)?;
    let mut per_point = Vec::new();
    for (p, _) in spec.divisor() {
        let c = section_correction(spec, section, p)?;
        form = form.sub(&c);
        per_point.push((p.clone(), c));
    }
    Ok((form, per_point))
}

/// The class {c₁(ω(D)), ∇} in Ω¹_K/dlog(K^×)⊗Q.
pub fn rhs_conjecture(spec: &ConnectionSpec, hints: &FactorHints) -> Result<BaseFormClass, EpsilonError> {
    let section = build_global_section(spec)?;
    Ok(dlog_reduce(&rhs_form(spec, &section)?.0, hints)?)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    Verified,
    Refuted { lhs: String, rhs: String },
    CannotCertify(String),
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Verified => "verified",
            Verdict::Refuted { .. } => "refuted",
            Verdict::CannotCertify(_) => "cannot_certify",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConjectureReport {
    /// class of det H^* (the negated trace of GM on H¹)
    pub lhs: Result<BaseFormClass, String>,
    pub rhs: Result<BaseFormClass, String>,
    pub sum: Result<BaseFormClass, String>,
    pub verdict: Verdict,
    pub per_point: Vec<(Point, AbsoluteForm1)>,
    pub section_g: RationalFunction,
}

fn show(c: &Result<BaseFormClass, String>) -> String {
    match c {
        Ok(c) => c.to_string(),
        Err(e) => format!("<{e}>"),
    }
}

impl ConjectureReport {
    pub fn to_json(&self) -> serde_json::Value {
        let pts: Vec<serde_json::Value> =
            self.per_point.iter().map(|(p, c)| json!({ "point": p.to_string(), "correction": c.display() })).collect();
        let mut v = json!({
            "lhs": show(&self.lhs),
            "rhs": show(&self.rhs),
            "sum": show(&self.sum),
            "verdict": self.verdict.label(),
            "per_point_corrections": pts,
            "section_G": self.section_g.to_string(),
        });
        if let Verdict::CannotCertify(r) = &self.verdict {
            v["reason"] = json!(r);
        }
        v
    }
}

/// det H^* + {c₁(ω(D)),∇} ≡ 0 in Ω¹_K/dlog(K^×)⊗Q, with a caller-chosen
/// global section.
pub fn verify_with_section(spec: &ConnectionSpec, section: &GlobalSection, hints: &FactorHints) -> Result<ConjectureReport, EpsilonError> {
    check_pre(spec)?;
    let pres = h1_basis(spec)?;
    let lhs_form = pres.gm_trace()?.neg();
    let (rhs_form, per_point) = rhs_form(spec, section)?;
    let reduce = |f: &AbsoluteForm1| dlog_reduce(f, hints).map_err(|e| e.to_string());
    let lhs = reduce(&lhs_form);
    let rhs = reduce(&rhs_form);
    let sum = reduce(&lhs_form.add(&rhs_form));
    let verdict = match &sum {
        Ok(s) if s.is_zero() => Verdict::Verified,
        Ok(_) => Verdict::Refuted { lhs: show(&lhs), rhs: show(&rhs) },
        Err(e) => Verdict::CannotCertify(e.clone()),
    };
    Ok(ConjectureReport { lhs, rhs, sum, verdict, per_point, section_g: section.g().clone() })
}

pub fn verify_conjecture(spec: &ConnectionSpec, hints: &FactorHints) -> Result<ConjectureReport, EpsilonError> {
    let section = build_global_section(spec)?;
    verify_with_section(spec, &section, hints)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{parse_form, parse_scalar};

    fn spec(t: &Arc<ScalarTower>, s: &str) -> ConnectionSpec {
        ConnectionSpec::new(AbsoluteForm1::scalar(t, &parse_form(t, s).unwrap()), None).unwrap()
    }

    fn fourier_tower() -> Arc<ScalarTower> {
        ScalarTower::new("z", &["t"], &[], None).unwrap()
    }

    #[test]
    fn section_for_one_simple_point() {
        let t = fourier_tower();
        let s = spec(&t, "dz/(3*(z-1)) + dz/t - z*dt/t^2");
        let sec = build_global_section(&s).unwrap();
        assert_eq!(sec.g(), &parse_scalar(&t, "2 - z").unwrap());
        assert!(sec.poles().is_empty());
    }

    #[test]
    fn pushforward_at_constant_point() {
        let t = fourier_tower();
        let s = spec(&t, "dz/(3*(z-1)) + dz/t - z*dt/t^2");
        let sec = build_global_section(&s).unwrap();
        let form = AbsoluteForm1::scalar(&t, &parse_form(&t, "z^2*dz + (z^3 + t)*dt").unwrap());
        let got = divisor_pushforward(&sec, &form).unwrap();
        assert_eq!(got, AbsoluteForm1::scalar(&t, &parse_form(&t, "(8 + t)*dt").unwrap()));
    }

    #[test]
    fn rank_one_fourier_verified() {
        let t = fourier_tower();
        let s = spec(&t, "dz/(3*(z-1)) - 2*dz/(z+2)^2 + dz/t - z*dt/t^2");
        let rep = verify_conjecture(&s, &FactorHints::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::Verified, "{:?}", rep.to_json());
    }

    #[test]
    fn corrections_agree() {
        let t = fourier_tower();
        let s = spec(&t, "dz/(3*(z-1)) - 2*dz/(z+2)^2 + dz/t - z*dt/t^2");
        let sec = build_global_section(&s).unwrap();
        for (p, _) in s.divisor() {
            let full = local_correction(&s, p).unwrap();
            assert_eq!(full, local_correction_base(&s, p).unwrap());
            let adj = unit_adjustment(&s, &sec, p).unwrap();
            assert_eq!(full.add(&adj), section_correction(&s, &sec, p).unwrap());
        }
    }
}
