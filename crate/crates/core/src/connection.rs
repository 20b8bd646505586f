//! Connections ∇ = d + A on the trivial bundle O^r over P¹_K: validation,
//! pole divisors, local data, gauge changes and pullbacks.

use std::sync::Arc;

use num_rational::BigRational;

use crate::field::series::{laurent_expand, pole_order, Point};
use crate::field::tower::compose_frac;
use crate::field::upoly::{self, UPoly};
use crate::field::{Field, FieldError, Frac, Matrix, RationalFunction, ScalarTower};
use crate::forms::{is_integrable, AbsoluteForm1, FormError, Mat};

pub type Divisor = Vec<(Point, u32)>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConnectionError {
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("pole outside the divisor: {0}")]
    PoleOffDivisor(String),
    #[error("unsupported point: {0}")]
    UnsupportedPoint(String),
    #[error("invalid divisor: {0}")]
    BadDivisor(String),
    #[error("singular gauge matrix")]
    SingularGauge,
    #[error("substitution not expressible over the target tower: {0}")]
    NotExpressible(String),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Admissibility {
    Admissible,
    NotAdmissible { point: Point, reason: String },
}

impl Admissibility {
    pub fn is_admissible(&self) -> bool {
        matches!(self, Admissibility::Admissible)
    }
}

/// The decomposition A = g·s_x + η near x, with s_x = dz_loc/z_loc^m.
#[derive(Clone, Debug)]
pub struct LocalData {
    pub point: Point,
    pub mult: u32,
    pub g: Mat,
    pub eta: Vec<Mat>,
}

#[derive(Clone, Debug)]
pub struct ConnectionSpec {
    a: AbsoluteForm1,
    divisor: Divisor,
}

impl ConnectionSpec {
    /// Validate `a` against `divisor` (the minimal divisor when `None`).
    pub fn new(a: AbsoluteForm1, divisor: Option<Divisor>) -> Result<Self, ConnectionError> {
        let divisor = match divisor {
            Some(d) => d,
            None => minimal_divisor(&a)?,
        };
        for (i, (p, m)) in divisor.iter().enumerate() {
            if *m == 0 {
                return Err(ConnectionError::BadDivisor(format!("multiplicity 0 at {p}")));
            }
            if divisor[..i].iter().any(|(q, _)| q == p) {
                return Err(ConnectionError::BadDivisor(format!("repeated point {p}")));
            }
        }
        let spec = ConnectionSpec { a, divisor };
        spec.check_poles()?;
        Ok(spec)
    }

    pub fn tower(&self) -> &Arc<ScalarTower> {
        self.a.tower()
    }

    pub fn rank(&self) -> usize {
        self.a.rank()
    }

    pub fn a(&self) -> &AbsoluteForm1 {
        &self.a
    }

    pub fn divisor(&self) -> &Divisor {
        &self.divisor
    }

    pub fn degree(&self) -> u32 {
        self.divisor.iter().map(|(_, m)| m).sum()
    }

    pub fn mult(&self, p: &Point) -> u32 {
        self.divisor.iter().find(|(q, _)| q == p).map_or(0, |(_, m)| *m)
    }

    fn check_poles(&self) -> Result<(), ConnectionError> {
        let finite: Vec<BigRational> = self
            .divisor
            .iter()
            .filter_map(|(p, _)| match p {
                Point::Finite(c) => Some(c.clone()),
                Point::Infinity => None,
            })
            .collect();
        let m_inf = self.mult(&Point::Infinity) as i32;
        let parts = std::iter::once((true, self.a.fiber())).chain(self.a.base().iter().map(|m| (false, m)));
        for (is_fiber, m) in parts {
            for f in m.entries() {
                if f.is_zero() {
                    continue;
                }
                let (_, den) = f.fiber_num_den();
                let mut den = upoly::trim(den);
                for c in &finite {
                    let lin = vec![RationalFunction::from_rational(f.tower(), -c.clone()), RationalFunction::one(f.tower())];
                    loop {
                        let (q, r) = upoly::divrem(&den, &lin);
                        if !r.is_empty() {
                            break;
                        }
                        den = q;
                    }
                }
                if upoly::deg(&den).unwrap_or(0) > 0 {
                    return Err(ConnectionError::PoleOffDivisor(format!("coefficient `{f}`")));
                }
                let at_inf = pole_order(f, &Point::Infinity) + if is_fiber { 2 } else { 0 };
                if at_inf > m_inf.max(0) && (is_fiber || m_inf == 0) {
                    return Err(ConnectionError::PoleOffDivisor(format!("coefficient `{f}` at infinity")));
                }
            }
        }
        for (p, mult) in &self.divisor {
            for f in self.a.fiber().entries() {
                if fiber_pole_order(f, p) > *mult as i32 {
                    return Err(ConnectionError::BadDivisor(format!("fiber part has a pole deeper than {mult} at {p}")));
                }
            }
        }
        Ok(())
    }

    /// Local data at a point of D with the default generator.
    pub fn local_data(&self, p: &Point) -> LocalData {
        let m = self.mult(p);
        let t = self.tower();
        let z = RationalFunction::fiber_var(t);
        let factor = match p {
            Point::Finite(c) => (&z - &RationalFunction::from_rational(t, c.clone())).pow(m as i32),
            // dz = −du/u² and s = du/u^m, so g = −A_z z^{2−m}
            Point::Infinity => -z.pow(2 - m as i32),
        };
        LocalData { point: p.clone(), mult: m, g: self.a.fiber().scale(&factor), eta: self.a.base().to_vec() }
    }

    pub fn is_integrable(&self) -> bool {
        is_integrable(&self.a)
    }

    /// Whether every commutator [η_τ, g] of the base parts with the leading
    /// matrix is regular at p. Holds at each point of D when ∇ is integrable
    /// and admissible.
    pub fn commutators_regular(&self, p: &Point) -> bool {
        let ld = self.local_data(p);
        ld.eta.iter().all(|eta| {
            let c = eta.mul(&ld.g).sub(&ld.g.mul(eta));
            let regular = c.entries().all(|f| f.is_zero() || pole_order(f, p) <= 0);
            regular
        })
    }

    pub fn check_admissible(&self) -> Admissibility {
        for (p, m) in &self.divisor {
            for b in self.a.base() {
                if b.entries().any(|f| pole_order(f, p) > *m as i32 - 1) {
                    return Admissibility::NotAdmissible { point: p.clone(), reason: "base-part pole too deep".into() };
                }
            }
            let ld = self.local_data(p);
            let g0 = match value_at(&ld.g, p) {
                Ok(v) => v,
                Err(_) => {
                    return Admissibility::NotAdmissible { point: p.clone(), reason: "leading matrix not regular".into() }
                }
            };
            if Field::is_zero(&g0.det()) {
                return Admissibility::NotAdmissible { point: p.clone(), reason: "leading matrix g not invertible".into() };
            }
        }
        Admissibility::Admissible
    }
}

/// Pole order of the differential f·dz at p.
pub fn fiber_pole_order(f: &RationalFunction, p: &Point) -> i32 {
    if f.is_zero() {
        return i32::MIN;
    }
    pole_order(f, p) + if *p == Point::Infinity { 2 } else { 0 }
}

/// Value at p of a matrix regular at p.
pub fn value_at(m: &Mat, p: &Point) -> Result<Mat, FieldError> {
    m.try_map(|f| {
        let l = laurent_expand(f, p, 0)?;
        if l.valuation < 0 && l.leading_order().map_or(false, |k| k < 0) {
            return Err(FieldError::PoleAtPoint);
        }
        Ok(l.coeff(0).clone())
    })
}

/// For each pole of the fiber part its exact order; finite points ascending,
/// then infinity.
pub fn minimal_divisor(a: &AbsoluteForm1) -> Result<Divisor, ConnectionError> {
    let mut points: Vec<BigRational> = Vec::new();
    for f in a.fiber().entries() {
        if f.is_zero() {
            continue;
        }
        let (_, den) = f.fiber_num_den();
        let den: UPoly<RationalFunction> = upoly::monic(&den);
        if den.len() <= 1 {
            continue;
        }
        let q: Option<Vec<BigRational>> = den.iter().map(|c| c.constant_value()).collect();
        let q = q.ok_or_else(|| ConnectionError::UnsupportedPoint(format!("pole of `{f}` is not a rational point")))?;
        let roots = upoly::rational_roots(&q).ok_or_else(|| ConnectionError::UnsupportedPoint("coefficients too large".into()))?;
        let mut rest = q.clone();
        for r in &roots {
            let lin = vec![-r.clone(), BigRational::from_integer(1.into())];
            loop {
                let (qq, rr) = upoly::divrem(&rest, &lin);
                if !rr.is_empty() {
                    break;
                }
                rest = qq;
            }
            if !points.contains(r) {
                points.push(r.clone());
            }
        }
        if upoly::deg(&rest).unwrap_or(0) > 0 {
            return Err(ConnectionError::UnsupportedPoint(format!("pole of `{f}` is not a rational point")));
        }
    }
    points.sort();
    let mut out: Divisor = Vec::new();
    for c in points {
        let p = Point::Finite(c);
        let m = a.fiber().entries().map(|f| fiber_pole_order(f, &p)).max().unwrap_or(0);
        if m > 0 {
            out.push((p, m as u32));
        }
    }
    let m = a.fiber().entries().map(|f| fiber_pole_order(f, &Point::Infinity)).max().unwrap_or(0);
    if m > 0 {
        out.push((Point::Infinity, m as u32));
    }
    Ok(out)
}

/// A′ = M⁻¹AM + M⁻¹dM, the matrix of ∇ in the basis e′ = Me; the divisor is
/// recomputed as the minimal one.
pub fn gauge_transform(spec: &ConnectionSpec, m: &Mat) -> Result<ConnectionSpec, ConnectionError> {
    let a = gauge_form(spec.a(), m)?;
    ConnectionSpec::new(a, None)
}

pub fn gauge_form(a: &AbsoluteForm1, m: &Mat) -> Result<AbsoluteForm1, ConnectionError> {
    let minv = m.inverse().ok_or(ConnectionError::SingularGauge)?;
    let dm = AbsoluteForm1::d_of(m, a.tower());
    Ok(a.left_mul(&minv).right_mul(m).add(&dm.left_mul(&minv)))
}

/// Substitute every variable of the source tower by an element of `target`
/// (`images[i]` for variable i; all images w-free) and pull the form back,
/// expanding d(image) in the target's differentials.
pub fn pull_form(a: &AbsoluteForm1, target: &Arc<ScalarTower>, images: &[RationalFunction]) -> Result<AbsoluteForm1, ConnectionError> {
    let src = a.tower();
    if images.len() != src.nvars() {
        return Err(ConnectionError::NotExpressible(format!("expected {} images", src.nvars())));
    }
    if src.ext().is_some() {
        return Err(ConnectionError::NotExpressible("source tower carries an extension".into()));
    }
    let fr: Vec<Frac> = images
        .iter()
        .map(|x| x.as_frac().cloned().ok_or_else(|| ConnectionError::NotExpressible(format!("image `{x}` involves the generator"))))
        .collect::<Result<_, _>>()?;
    let r = a.rank();
    let sub = |m: &Mat| m.map(|f| RationalFunction::from_frac(target, compose_frac(f.p(), &fr)));
    let old_parts: Vec<Mat> = std::iter::once(a.fiber()).chain(a.base()).map(sub).collect();
    // source slot k (0 = fiber, k ≥ 1 = base k−1) ↔ source variable k
    let slot_var = |k: usize| if k == 0 { 0 } else { src.base_index(k - 1) };
    let target_slots = 1 + target.nbase();
    let target_var = |k: usize| if k == 0 { 0 } else { target.base_index(k - 1) };
    let zero = Matrix::zeros_like(r, r, &RationalFunction::zero(target));
    let mut parts = vec![zero; target_slots];
    for (k, om) in old_parts.iter().enumerate() {
        if om.is_zero() {
            continue;
        }
        let img = &images[slot_var(k)];
        for (s, part) in parts.iter_mut().enumerate() {
            let d = img.derivative(target_var(s));
            if !d.is_zero() {
                *part = part.add(&om.scale(&d));
            }
        }
    }
    // parameters must map to constants of the target (no differentials)
    for i in 0..src.params().len() {
        let img = &images[src.param_index(i)];
        if (0..target_slots).any(|s| img.uses_var(target_var(s))) {
            return Err(ConnectionError::NotExpressible(format!("parameter image `{img}` is not constant")));
        }
    }
    let fiber = parts.remove(0);
    Ok(AbsoluteForm1::new(target, fiber, parts)?)
}

pub fn pullback(spec: &ConnectionSpec, target: &Arc<ScalarTower>, images: &[RationalFunction]) -> Result<ConnectionSpec, ConnectionError> {
    ConnectionSpec::new(pull_form(spec.a(), target, images)?, None)
}

/// Identity images for moving a form between towers with matching names;
/// `overrides` replace the images of selected source variables.
pub fn images_by_name(src: &ScalarTower, target: &Arc<ScalarTower>, overrides: &[(&str, RationalFunction)]) -> Result<Vec<RationalFunction>, ConnectionError> {
    src.names()
        .iter()
        .map(|n| {
            if let Some((_, v)) = overrides.iter().find(|(k, _)| k == n) {
                return Ok(v.clone());
            }
            target
                .var_index(n)
                .map(|i| RationalFunction::var(target, i))
                .ok_or_else(|| ConnectionError::NotExpressible(format!("no image for `{n}`")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{parse_form, parse_scalar};
    use crate::forms::identity;

    fn t() -> Arc<ScalarTower> {
        ScalarTower::new("z", &["t", "a"], &["alpha"], None).unwrap()
    }

    fn form(t: &Arc<ScalarTower>, s: &str) -> AbsoluteForm1 {
        AbsoluteForm1::scalar(t, &parse_form(t, s).unwrap())
    }

    #[test]
    fn divisors() {
        let t = t();
        assert_eq!(minimal_divisor(&form(&t, "dz/(z-1) + dz/t")).unwrap(), vec![(Point::int(1), 1), (Point::Infinity, 2)]);
        assert_eq!(minimal_divisor(&form(&t, "alpha*dz/z + a*dz + z*da")).unwrap(), vec![(Point::int(0), 1), (Point::Infinity, 2)]);
        assert!(minimal_divisor(&form(&t, "da/a")).unwrap().is_empty());
        assert!(matches!(minimal_divisor(&form(&t, "dz/(z^2-2)")), Err(ConnectionError::UnsupportedPoint(_))));
    }

    #[test]
    fn integrability_and_admissibility() {
        let t = t();
        let spec = ConnectionSpec::new(form(&t, "alpha*dz/z + a*dz + z*da"), None).unwrap();
        assert!(spec.is_integrable());
        assert!(spec.check_admissible().is_admissible());
        assert!(spec.divisor().iter().all(|(p, _)| spec.commutators_regular(p)));
        assert!(!ConnectionSpec::new(form(&t, "z*dt"), Some(vec![(Point::Infinity, 2)])).unwrap().is_integrable());
    }

    #[test]
    fn gauges() {
        let t = t();
        let spec = ConnectionSpec::new(form(&t, "alpha*dz/z + a*dz + z*da"), None).unwrap();
        let same = gauge_transform(&spec, &identity(&t, 1)).unwrap();
        assert_eq!(same.a(), spec.a());
        let c = parse_scalar(&t, "3*t*a").unwrap();
        let scaled = gauge_transform(&spec, &identity(&t, 1).scale(&c)).unwrap();
        assert_eq!(scaled.a(), &spec.a().add(&AbsoluteForm1::dlog(&c)));
    }

    #[test]
    fn pullback_dlog() {
        let src = ScalarTower::new("v", &["a"], &[], None).unwrap();
        let dst = ScalarTower::new("z", &["a"], &[], None).unwrap();
        let a = form(&src, "dv/v");
        let images = images_by_name(&src, &dst, &[("v", parse_scalar(&dst, "z^-2").unwrap())]).unwrap();
        assert_eq!(pull_form(&a, &dst, &images).unwrap(), form(&dst, "-2*dz/z"));
    }
}
