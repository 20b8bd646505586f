//! H¹ of the relative de Rham complex as coker(∇_{X/S} : H⁰(E) → H⁰(E⊗ω(D))),
//! with a terminating pole-reduction rewrite system and the Gauss–Manin matrix.
//!
//! Elements are vectors v (standing for v·dz) with poles only on D. Excess
//! poles are removed by subtracting ∇_{X/S}(h·y) for h = (z−x)^{−k} or z^k and a
//! constant vector y solving a leading-block system. What remains lives in
//! the span of the monomials dz/(z−α)^i (i ≤ m_α) and z^k dz (k ≤ m_∞−2); one
//! monomial per rank index is then eliminated using the relations ∇(e_j).

use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;

use crate::connection::{fiber_pole_order, Admissibility, ConnectionSpec};
use crate::field::series::{laurent_expand, Point};
use crate::field::upoly;
use crate::field::{FieldError, Matrix, RationalFunction, ScalarTower};
use crate::forms::{dlog_reduce, zero_mat, AbsoluteForm1, BaseFormClass, DlogError, FactorHints, Mat};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DerhamError {
    #[error("not admissible at {point}: {reason}")]
    NotAdmissible { point: Point, reason: String },
    #[error("empty divisor is not supported")]
    EmptyDivisor,
    #[error("infinity must belong to the divisor")]
    InfinityNotInDivisor,
    #[error("connection has {0} flat global sections")]
    FlatSections(usize),
    #[error("pole outside the divisor: {0}")]
    PoleOffDivisor(String),
    #[error("resonant leading block at {point} (shift {shift})")]
    Resonance { point: Point, shift: u32 },
    #[error("no eliminable monomial: {0}")]
    NoElimination(String),
    #[error("dimension check failed: {got} != {expected}")]
    Dimension { got: usize, expected: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Dlog(#[from] DlogError),
}

/// A monomial differential: dz/(z−c)^i or z^k·dz.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Monomial {
    Pole(BigRational, u32),
    Power(u32),
}

impl Monomial {
    pub fn value(&self, tower: &Arc<ScalarTower>) -> RationalFunction {
        let z = RationalFunction::fiber_var(tower);
        match self {
            Monomial::Pole(c, i) => (&z - &RationalFunction::from_rational(tower, c.clone())).pow(-(*i as i32)),
            Monomial::Power(k) => z.pow(*k as i32),
        }
    }

    pub fn display(&self, fiber: &str) -> String {
        match self {
            Monomial::Pole(c, 1) if c == &BigRational::from_integer(0.into()) => format!("d{fiber}/{fiber}"),
            Monomial::Pole(c, i) if c == &BigRational::from_integer(0.into()) => format!("d{fiber}/{fiber}^{i}"),
            Monomial::Pole(c, 1) => format!("d{fiber}/({fiber}-{c})"),
            Monomial::Pole(c, i) => format!("d{fiber}/({fiber}-{c})^{i}"),
            Monomial::Power(0) => format!("d{fiber}"),
            Monomial::Power(1) => format!("{fiber}*d{fiber}"),
            Monomial::Power(k) => format!("{fiber}^{k}*d{fiber}"),
        }
    }
}

/// Optional overrides of the default elimination and basis order.
#[derive(Clone, Debug, Default)]
pub struct BasisChoice {
    pub eliminate: Option<Monomial>,
    pub order: Option<Vec<Monomial>>,
}

#[derive(Clone, Debug)]
pub struct DeRhamPresentation {
    spec: ConnectionSpec,
    monomials: Vec<Monomial>,
    eliminated: Monomial,
    basis: Vec<(Monomial, usize)>,
    /// leading Laurent coefficient of A_z at each divisor point
    lead: Vec<Mat>,
    /// coordinates of ∇(e_j) on all monomial slots
    relations: Vec<Vec<RationalFunction>>,
    block_inv: Mat,
}

impl fmt::Display for DeRhamPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fib = self.spec.tower().fiber().to_string();
        let items: Vec<String> = self.basis.iter().map(|(m, i)| format!("e{}*{}", i + 1, m.display(&fib))).collect();
        write!(f, "[{}]", items.join(", "))
    }
}

fn lead_index(p: &Point, n: i32) -> i32 {
    match p {
        Point::Finite(_) => -n,
        Point::Infinity => 2 - n,
    }
}

/// dim ker(v ↦ A_z v) on constant vectors.
pub fn h0_flat_sections(spec: &ConnectionSpec) -> Result<usize, DerhamError> {
    let (monos, _) = monomials_of(spec)?;
    let r = spec.rank();
    let rel = relation_coords(spec, &monos)?;
    let m = Matrix::from_fn(rel[0].len(), r, |i, j| rel[j][i].clone());
    Ok(r - m.rank())
}

fn monomials_of(spec: &ConnectionSpec) -> Result<(Vec<Monomial>, u32), DerhamError> {
    if spec.divisor().is_empty() {
        return Err(DerhamError::EmptyDivisor);
    }
    let m_inf = spec.mult(&Point::Infinity);
    if m_inf == 0 {
        return Err(DerhamError::InfinityNotInDivisor);
    }
    let mut monos = Vec::new();
    for (p, m) in spec.divisor() {
        if let Point::Finite(c) = p {
            for i in 1..=*m {
                monos.push(Monomial::Pole(c.clone(), i));
            }
        }
    }
    for k in 0..m_inf.saturating_sub(1) {
        monos.push(Monomial::Power(k));
    }
    Ok((monos, m_inf))
}

/// Partial-fraction coordinates of a vector whose poles are bounded by D.
fn coords_on(spec: &ConnectionSpec, monos: &[Monomial], v: &[RationalFunction]) -> Result<Vec<RationalFunction>, DerhamError> {
    let r = spec.rank();
    let t = spec.tower();
    let mut out = vec![RationalFunction::zero(t); monos.len() * r];
    for (i, f) in v.iter().enumerate() {
        if f.is_zero() {
            continue;
        }
        let (num, den) = f.fiber_num_den();
        let (poly, _) = upoly::divrem(&num, &den);
        let mut cache: Option<(BigRational, crate::field::Laurent)> = None;
        for (k, m) in monos.iter().enumerate() {
            let val = match m {
                Monomial::Power(e) => poly.get(*e as usize).cloned().unwrap_or_else(|| RationalFunction::zero(t)),
                Monomial::Pole(c, ord) => {
                    if cache.as_ref().map_or(true, |(cc, _)| cc != c) {
                        let l = laurent_expand(f, &Point::Finite(c.clone()), -1)?;
                        cache = Some((c.clone(), l));
                    }
                    cache.as_ref().unwrap().1.coeff(-(*ord as i32)).clone()
                }
            };
            out[k * r + i] = val;
        }
        if poly.len() > monos.iter().filter(|m| matches!(m, Monomial::Power(_))).count() {
            return Err(DerhamError::PoleOffDivisor(format!("polynomial part of `{f}` too large")));
        }
    }
    Ok(out)
}

fn relation_coords(spec: &ConnectionSpec, monos: &[Monomial]) -> Result<Vec<Vec<RationalFunction>>, DerhamError> {
    let r = spec.rank();
    (0..r).map(|j| coords_on(spec, monos, &spec.a().fiber().column(j))).collect()
}

/// Basis of H¹ with the default elimination rule.
pub fn h1_basis(spec: &ConnectionSpec) -> Result<DeRhamPresentation, DerhamError> {
    h1_basis_with(spec, &BasisChoice::default())
}

pub fn h1_basis_with(spec: &ConnectionSpec, choice: &BasisChoice) -> Result<DeRhamPresentation, DerhamError> {
    if let Admissibility::NotAdmissible { point, reason } = spec.check_admissible() {
        return Err(DerhamError::NotAdmissible { point, reason });
    }
    let (monos, m_inf) = monomials_of(spec)?;
    let r = spec.rank();
    let t = spec.tower();
    let relations = relation_coords(spec, &monos)?;
    let rel_mat = Matrix::from_fn(relations[0].len(), r, |i, j| relations[j][i].clone());
    let flat = r - rel_mat.rank();
    if flat > 0 {
        return Err(DerhamError::FlatSections(flat));
    }
    let block = |m: &Monomial| -> Option<Mat> {
        let k = monos.iter().position(|x| x == m)?;
        let b = Matrix::from_fn(r, r, |i, j| relations[j][k * r + i].clone());
        b.inverse()
    };
    let eliminated = match &choice.eliminate {
        Some(m) => m.clone(),
        None if m_inf >= 2 => Monomial::Power(m_inf - 2),
        None => monos
            .iter()
            .find(|m| matches!(m, Monomial::Pole(_, 1)) && block(m).is_some())
            .cloned()
            .ok_or_else(|| DerhamError::NoElimination("no residue block is invertible".into()))?,
    };
    let block_inv = block(&eliminated)
        .ok_or_else(|| DerhamError::NoElimination(format!("block of {} is singular", eliminated.display(t.fiber()))))?;
    let kept: Vec<Monomial> = match &choice.order {
        Some(order) => {
            let mut want: Vec<Monomial> = monos.iter().filter(|m| **m != eliminated).cloned().collect();
            if order.len() != want.len() || !order.iter().all(|m| want.contains(m)) {
                return Err(DerhamError::NoElimination("basis order does not match the monomials".into()));
            }
            want.clone_from(order);
            want
        }
        None => monos.iter().filter(|m| **m != eliminated).cloned().collect(),
    };
    let basis: Vec<(Monomial, usize)> = kept.iter().flat_map(|m| (0..r).map(move |i| (m.clone(), i))).collect();
    let expected = r * (spec.degree() as usize - 2);
    if basis.len() != expected {
        return Err(DerhamError::Dimension { got: basis.len(), expected });
    }
    let lead = spec
        .divisor()
        .iter()
        .map(|(p, m)| {
            let k = lead_index(p, *m as i32);
            spec.a().fiber().try_map(|f| Ok::<_, FieldError>(laurent_expand(f, p, k)?.coeff(k).clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DeRhamPresentation { spec: spec.clone(), monomials: monos, eliminated, basis, lead, relations, block_inv })
}

impl DeRhamPresentation {
    pub fn spec(&self) -> &ConnectionSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[(Monomial, usize)] {
        &self.basis
    }

    pub fn eliminated(&self) -> &Monomial {
        &self.eliminated
    }

    /// The vector standing for basis element j.
    pub fn basis_vector(&self, j: usize) -> Vec<RationalFunction> {
        let t = self.spec.tower();
        let (m, i) = &self.basis[j];
        let mut v = vec![RationalFunction::zero(t); self.spec.rank()];
        v[*i] = m.value(t);
        v
    }

    /// ∇_{X/S}(h) = (h′ + A_z h)·dz for a vector function h.
    pub fn nabla(&self, h: &[RationalFunction]) -> Vec<RationalFunction> {
        let ah = self.spec.a().fiber().mul_vec(h);
        ah.iter().zip(h).map(|(x, y)| x + &y.derivative(0)).collect()
    }

    fn check_domain(&self, v: &[RationalFunction]) -> Result<(), DerhamError> {
        let t = self.spec.tower();
        for f in v {
            if f.is_zero() {
                continue;
            }
            let (_, den) = f.fiber_num_den();
            let mut den = upoly::trim(den);
            for (p, _) in self.spec.divisor() {
                if let Point::Finite(c) = p {
                    let lin = vec![RationalFunction::from_rational(t, -c.clone()), RationalFunction::one(t)];
                    loop {
                        let (q, r) = upoly::divrem(&den, &lin);
                        if !r.is_empty() {
                            break;
                        }
                        den = q;
                    }
                }
            }
            if upoly::deg(&den).unwrap_or(0) > 0 {
                return Err(DerhamError::PoleOffDivisor(format!("`{f}`")));
            }
        }
        Ok(())
    }

    /// Remove all poles deeper than D; deepest first, ties by divisor order.
    pub fn reduce_poles(&self, v: &[RationalFunction]) -> Result<Vec<RationalFunction>, DerhamError> {
        self.check_domain(v)?;
        let t = self.spec.tower().clone();
        let r = self.spec.rank();
        let z = RationalFunction::fiber_var(&t);
        let mut v = v.to_vec();
        loop {
            let mut best: Option<(i32, usize)> = None;
            for (idx, (p, m)) in self.spec.divisor().iter().enumerate() {
                let n = v.iter().map(|f| fiber_pole_order(f, p)).max().unwrap_or(i32::MIN);
                if n > *m as i32 && best.map_or(true, |(bn, _)| n > bn) {
                    best = Some((n, idx));
                }
            }
            let Some((n, idx)) = best else { return Ok(v) };
            let (p, m) = &self.spec.divisor()[idx];
            let k = (n - *m as i32) as u32;
            let li = lead_index(p, n);
            let c: Vec<RationalFunction> = v
                .iter()
                .map(|f| Ok::<_, FieldError>(laurent_expand(f, p, li)?.coeff(li).clone()))
                .collect::<Result<_, _>>()?;
            let shift = RationalFunction::from_int(&t, k as i64);
            let mut l = self.lead[idx].clone();
            if *m == 1 {
                let id = Matrix::identity_like(r, &shift);
                l = match p {
                    Point::Finite(_) => l.sub(&id.scale(&shift)),
                    Point::Infinity => l.add(&id.scale(&shift)),
                };
            }
            let rhs = Matrix::from_fn(r, 1, |i, _| c[i].clone());
            let y = l.solve(&rhs).ok_or(DerhamError::Resonance { point: p.clone(), shift: k })?.column(0);
            let h = match p {
                Point::Finite(a) => (&z - &RationalFunction::from_rational(&t, a.clone())).pow(-(k as i32)),
                Point::Infinity => z.pow(k as i32),
            };
            let hy: Vec<RationalFunction> = y.iter().map(|yi| &h * yi).collect();
            let corr = self.nabla(&hy);
            v = v.iter().zip(&corr).map(|(a, b)| a - b).collect();
        }
    }

    /// Coordinates of the class of v·dz in the basis.
    pub fn reduce(&self, v: &[RationalFunction]) -> Result<Vec<RationalFunction>, DerhamError> {
        let r = self.spec.rank();
        let reduced = self.reduce_poles(v)?;
        let mut x = coords_on(&self.spec, &self.monomials, &reduced)?;
        let k = self.monomials.iter().position(|m| *m == self.eliminated).unwrap();
        let xe: Vec<RationalFunction> = (0..r).map(|i| x[k * r + i].clone()).collect();
        let y = self.block_inv.mul_vec(&xe);
        for (j, yj) in y.iter().enumerate() {
            if yj.is_zero() {
                continue;
            }
            for (s, rel) in self.relations[j].iter().enumerate() {
                if !rel.is_zero() {
                    x[s] = &x[s] - &(yj * rel);
                }
            }
        }
        Ok(self
            .basis
            .iter()
            .map(|(m, i)| {
                let k = self.monomials.iter().position(|x| x == m).unwrap();
                x[k * r + i].clone()
            })
            .collect())
    }

    /// The GM connection matrix: column j holds the coordinates of
    /// Σ_τ reduce(C_τ·b_j)⊗dτ for the basis vector b_j.
    pub fn gauss_manin_matrix(&self) -> Result<AbsoluteForm1, DerhamError> {
        let t = self.spec.tower();
        let n = self.dim();
        let nb = t.nbase();
        let mut parts: Vec<Mat> = vec![Matrix::zeros_like(n, n, &RationalFunction::zero(t)); nb];
        for j in 0..n {
            let b = self.basis_vector(j);
            for (tau, part) in parts.iter_mut().enumerate() {
                let c = self.spec.a().base_part(tau);
                let mut v = c.mul_vec(&b);
                let vi = t.base_index(tau);
                for (x, bi) in v.iter_mut().zip(&b) {
                    *x = &*x + &bi.derivative(vi);
                }
                if v.iter().all(|x| x.is_zero()) {
                    continue;
                }
                let col = self.reduce(&v)?;
                for (i, val) in col.into_iter().enumerate() {
                    part.set(i, j, val);
                }
            }
        }
        let fiber = Matrix::zeros_like(n, n, &RationalFunction::zero(t));
        AbsoluteForm1::new(t, fiber, parts).map_err(|e| DerhamError::NoElimination(e.to_string()))
    }

    /// Tr of the GM matrix: the determinant connection on det H¹.
    pub fn gm_trace(&self) -> Result<AbsoluteForm1, DerhamError> {
        let t = self.spec.tower();
        if self.dim() == 0 {
            return Ok(AbsoluteForm1::zero(t, 1));
        }
        Ok(self.gauss_manin_matrix()?.trace())
    }

    /// Class of det H¹ (the trace of GM).
    pub fn h1_determinant(&self, hints: &FactorHints) -> Result<BaseFormClass, DerhamError> {
        Ok(dlog_reduce(&self.gm_trace()?, hints)?)
    }

    /// Class of det H^*: H¹ sits in odd degree, so this is the class of −Tr GM.
    pub fn gm_determinant(&self, hints: &FactorHints) -> Result<BaseFormClass, DerhamError> {
        Ok(dlog_reduce(&self.gm_trace()?.neg(), hints)?)
    }
}

/// Empty r×r zero matrix helper used by callers building expected matrices.
pub fn zero_matrix(tower: &Arc<ScalarTower>, r: usize) -> Mat {
    zero_mat(tower, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{parse_form, parse_scalar};

    fn spec(t: &Arc<ScalarTower>, s: &str) -> ConnectionSpec {
        ConnectionSpec::new(AbsoluteForm1::scalar(t, &parse_form(t, s).unwrap()), None).unwrap()
    }

    #[test]
    fn l1_determinant() {
        let t = ScalarTower::new("z", &["a"], &["alpha"], None).unwrap();
        let s = spec(&t, "alpha*dz/z + a*dz + z*da");
        assert_eq!(h0_flat_sections(&s).unwrap(), 0);
        let p = h1_basis(&s).unwrap();
        assert_eq!(p.dim(), 1);
        assert_eq!(p.gm_trace().unwrap(), AbsoluteForm1::scalar(&t, &parse_form(&t, "-alpha*da/a").unwrap()));
    }

    #[test]
    fn empty_basis() {
        let t = ScalarTower::new("z", &["a"], &[], None).unwrap();
        let s = spec(&t, "a*dz + z*da");
        let p = h1_basis(&s).unwrap();
        assert_eq!(p.dim(), 0);
        assert!(p.gm_trace().unwrap().is_zero());
    }

    #[test]
    fn reduce_relations_vanish() {
        let t = ScalarTower::new("z", &["t"], &[], None).unwrap();
        let s = spec(&t, "(3/(z-1) + 1/t)*dz - z*dt/t^2");
        let p = h1_basis(&s).unwrap();
        assert_eq!(p.dim(), 1);
        for h in ["z^3", "1/(z-1)^2", "t/(z-1) + z"] {
            let h = vec![parse_scalar(&t, h).unwrap()];
            assert!(p.reduce(&p.nabla(&h)).unwrap().iter().all(|c| c.is_zero()));
        }
        let b = p.basis_vector(0);
        assert!(p.reduce(&b).unwrap()[0].is_one());
        assert!(matches!(p.reduce(&[parse_scalar(&t, "1/(z-2)").unwrap()]), Err(DerhamError::PoleOffDivisor(_))));
    }
}
