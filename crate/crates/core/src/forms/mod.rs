//! Matrix-valued absolute differential forms on P¹ × Spec K.
//!
//! A 1-form is `A_z dz + Σ C_i dτ_i`; a 2-form is
//! `Σ F_i dz∧dτ_i + Σ_{i<j} H_ij dτ_i∧dτ_j`. Base variables are indexed by
//! their position in the tower.

mod dlog;

use std::collections::BTreeMap;
use std::sync::Arc;

pub use dlog::{dlog_reduce, BaseFormClass, DlogError, FactorHints};

use crate::field::series::{residue_dz, Point};
use crate::field::{FieldError, Matrix, RationalFunction, ScalarTower};

pub type Mat = Matrix<RationalFunction>;

#[derive(Clone, Debug, PartialEq)]
pub struct AbsoluteForm1 {
    tower: Arc<ScalarTower>,
    fiber: Mat,
    base: Vec<Mat>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AbsoluteForm2 {
    tower: Arc<ScalarTower>,
    dz_base: Vec<Mat>,
    base_base: BTreeMap<(usize, usize), Mat>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FormError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

pub fn zero_mat(tower: &Arc<ScalarTower>, r: usize) -> Mat {
    Matrix::zeros_like(r, r, &RationalFunction::zero(tower))
}

pub fn identity(tower: &Arc<ScalarTower>, r: usize) -> Mat {
    Matrix::identity_like(r, &RationalFunction::zero(tower))
}

pub fn scalar_mat(x: RationalFunction) -> Mat {
    Matrix::from_rows(vec![vec![x]])
}

fn mat_derivative(m: &Mat, v: usize) -> Mat {
    m.map(|x| x.derivative(v))
}

impl AbsoluteForm1 {
    pub fn zero(tower: &Arc<ScalarTower>, r: usize) -> Self {
        AbsoluteForm1 { tower: tower.clone(), fiber: zero_mat(tower, r), base: vec![zero_mat(tower, r); tower.nbase()] }
    }

    pub fn new(tower: &Arc<ScalarTower>, fiber: Mat, base: Vec<Mat>) -> Result<Self, FormError> {
        let r = fiber.rows();
        if !fiber.is_square() || r == 0 {
            return Err(FormError::Shape("fiber part must be square and nonempty".into()));
        }
        if base.len() != tower.nbase() {
            return Err(FormError::Shape(format!("expected {} base parts, got {}", tower.nbase(), base.len())));
        }
        if base.iter().any(|m| m.rows() != r || m.cols() != r) {
            return Err(FormError::Shape("base parts must match the fiber shape".into()));
        }
        Ok(AbsoluteForm1 { tower: tower.clone(), fiber, base })
    }

    /// Rank-1 form from coefficients on (dz, dτ₀, dτ₁, …).
    pub fn scalar(tower: &Arc<ScalarTower>, coeffs: &[RationalFunction]) -> Self {
        assert_eq!(coeffs.len(), tower.nbase() + 1);
        AbsoluteForm1 {
            tower: tower.clone(),
            fiber: scalar_mat(coeffs[0].clone()),
            base: coeffs[1..].iter().map(|c| scalar_mat(c.clone())).collect(),
        }
    }

    /// Assemble an r×r form from entrywise scalar forms.
    pub fn from_entries(tower: &Arc<ScalarTower>, entries: &[Vec<Vec<RationalFunction>>]) -> Result<Self, FormError> {
        let r = entries.len();
        if r == 0 || entries.iter().any(|row| row.len() != r) {
            return Err(FormError::Shape("connection matrix must be square and nonempty".into()));
        }
        let part = |k: usize| Matrix::from_fn(r, r, |i, j| entries[i][j][k].clone());
        Ok(AbsoluteForm1 { tower: tower.clone(), fiber: part(0), base: (1..=tower.nbase()).map(part).collect() })
    }

    /// d of a matrix-valued function.
    pub fn d_of(m: &Mat, tower: &Arc<ScalarTower>) -> Self {
        AbsoluteForm1 {
            tower: tower.clone(),
            fiber: mat_derivative(m, 0),
            base: (0..tower.nbase()).map(|i| mat_derivative(m, tower.base_index(i))).collect(),
        }
    }

    /// dlog of a scalar.
    pub fn dlog(f: &RationalFunction) -> Self {
        let inv = f.inv().expect("dlog of zero");
        let d = Self::d_of(&scalar_mat(f.clone()), f.tower());
        d.map(|m| m.scale(&inv))
    }

    pub fn tower(&self) -> &Arc<ScalarTower> {
        &self.tower
    }

    pub fn rank(&self) -> usize {
        self.fiber.rows()
    }

    pub fn fiber(&self) -> &Mat {
        &self.fiber
    }

    pub fn base(&self) -> &[Mat] {
        &self.base
    }

    pub fn base_part(&self, i: usize) -> &Mat {
        &self.base[i]
    }

    /// Coefficients on (dz, dτ₀, …) of a rank-1 form.
    pub fn scalar_coeffs(&self) -> Vec<RationalFunction> {
        assert_eq!(self.rank(), 1, "not a scalar form");
        std::iter::once(&self.fiber).chain(&self.base).map(|m| m.get(0, 0).clone()).collect()
    }

    pub fn entry(&self, i: usize, j: usize) -> AbsoluteForm1 {
        AbsoluteForm1 {
            tower: self.tower.clone(),
            fiber: scalar_mat(self.fiber.get(i, j).clone()),
            base: self.base.iter().map(|m| scalar_mat(m.get(i, j).clone())).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(&Mat) -> Mat) -> Self {
        AbsoluteForm1 { tower: self.tower.clone(), fiber: f(&self.fiber), base: self.base.iter().map(f).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.fiber.is_zero() && self.base.iter().all(|m| m.is_zero())
    }

    pub fn add(&self, o: &Self) -> Self {
        AbsoluteForm1 {
            tower: self.tower.clone(),
            fiber: self.fiber.add(&o.fiber),
            base: self.base.iter().zip(&o.base).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        self.map(|m| m.neg())
    }

    pub fn scale(&self, c: &RationalFunction) -> Self {
        self.map(|m| m.scale(c))
    }

    pub fn left_mul(&self, m: &Mat) -> Self {
        self.map(|x| m.mul(x))
    }

    pub fn right_mul(&self, m: &Mat) -> Self {
        self.map(|x| x.mul(m))
    }

    pub fn trace(&self) -> Self {
        self.map(|m| scalar_mat(m.trace()))
    }

    pub fn without_fiber(&self) -> Self {
        AbsoluteForm1 { tower: self.tower.clone(), fiber: zero_mat(&self.tower, self.rank()), base: self.base.clone() }
    }

    pub fn fiber_only(&self) -> Self {
        AbsoluteForm1 { tower: self.tower.clone(), fiber: self.fiber.clone(), base: vec![zero_mat(&self.tower, self.rank()); self.base.len()] }
    }

    pub fn is_fiber_free(&self) -> bool {
        std::iter::once(&self.fiber).chain(&self.base).all(|m| m.entries().all(|x| x.is_fiber_free()))
    }

    /// Restrict to a fiber value (z ↦ c); the dz component is dropped.
    pub fn at_fiber_value(&self, c: &num_rational::BigRational) -> Result<Self, FieldError> {
        let r = self.rank();
        let base = self
            .base
            .iter()
            .map(|m| m.try_map(|x| x.eval_var(0, c)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(AbsoluteForm1 { tower: self.tower.clone(), fiber: zero_mat(&self.tower, r), base })
    }

    /// Canonical text: `coeff*dz + coeff*dτ…` for rank 1, a bracketed matrix of
    /// such entries otherwise.
    pub fn display(&self) -> String {
        let r = self.rank();
        if r == 1 {
            return self.display_entry(0, 0);
        }
        let rows: Vec<String> = (0..r)
            .map(|i| format!("[{}]", (0..r).map(|j| self.display_entry(i, j)).collect::<Vec<_>>().join(", ")))
            .collect();
        format!("[{}]", rows.join(", "))
    }

    fn display_entry(&self, i: usize, j: usize) -> String {
        let mut names = vec![format!("d{}", self.tower.fiber())];
        names.extend(self.tower.base_vars().iter().map(|n| format!("d{n}")));
        let parts: Vec<String> = std::iter::once(&self.fiber)
            .chain(&self.base)
            .zip(&names)
            .filter(|(m, _)| !m.get(i, j).is_zero())
            .map(|(m, n)| format!("({})*{}", m.get(i, j), n))
            .collect();
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

impl AbsoluteForm2 {
    pub fn zero(tower: &Arc<ScalarTower>, r: usize) -> Self {
        AbsoluteForm2 { tower: tower.clone(), dz_base: vec![zero_mat(tower, r); tower.nbase()], base_base: BTreeMap::new() }
    }

    /// Scalar 2-form `f dz∧dτ_i`.
    pub fn dz_wedge(tower: &Arc<ScalarTower>, i: usize, f: RationalFunction) -> Self {
        let mut w = Self::zero(tower, 1);
        w.dz_base[i] = scalar_mat(f);
        w
    }

    pub fn dz_base(&self) -> &[Mat] {
        &self.dz_base
    }

    pub fn base_base(&self, i: usize, j: usize) -> Option<&Mat> {
        self.base_base.get(&(i, j))
    }

    pub fn is_zero(&self) -> bool {
        self.dz_base.iter().all(|m| m.is_zero()) && self.base_base.values().all(|m| m.is_zero())
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut base_base = self.base_base.clone();
        for (k, m) in &o.base_base {
            let v = match base_base.get(k) {
                Some(x) => x.add(m),
                None => m.clone(),
            };
            base_base.insert(*k, v);
        }
        base_base.retain(|_, m| !m.is_zero());
        AbsoluteForm2 {
            tower: self.tower.clone(),
            dz_base: self.dz_base.iter().zip(&o.dz_base).map(|(a, b)| a.add(b)).collect(),
            base_base,
        }
    }

    pub fn trace(&self) -> Self {
        AbsoluteForm2 {
            tower: self.tower.clone(),
            dz_base: self.dz_base.iter().map(|m| scalar_mat(m.trace())).collect(),
            base_base: self.base_base.iter().map(|(k, m)| (*k, scalar_mat(m.trace()))).collect(),
        }
    }
}

/// a∧b with matrix multiplication of coefficients.
pub fn wedge(a: &AbsoluteForm1, b: &AbsoluteForm1) -> Result<AbsoluteForm2, FormError> {
    if a.rank() != b.rank() {
        return Err(FormError::Shape(format!("rank {} vs {}", a.rank(), b.rank())));
    }
    let n = a.base.len();
    let dz_base = (0..n).map(|i| a.fiber.mul(&b.base[i]).sub(&a.base[i].mul(&b.fiber))).collect();
    let mut base_base = BTreeMap::new();
    for i in 0..n {
        for j in i + 1..n {
            let m = a.base[i].mul(&b.base[j]).sub(&a.base[j].mul(&b.base[i]));
            if !m.is_zero() {
                base_base.insert((i, j), m);
            }
        }
    }
    Ok(AbsoluteForm2 { tower: a.tower.clone(), dz_base, base_base })
}

/// Exterior derivative of a 1-form.
pub fn exterior_d(a: &AbsoluteForm1) -> AbsoluteForm2 {
    let t = &a.tower;
    let n = a.base.len();
    let dz_base = (0..n).map(|i| mat_derivative(&a.base[i], 0).sub(&mat_derivative(&a.fiber, t.base_index(i)))).collect();
    let mut base_base = BTreeMap::new();
    for i in 0..n {
        for j in i + 1..n {
            let m = mat_derivative(&a.base[j], t.base_index(i)).sub(&mat_derivative(&a.base[i], t.base_index(j)));
            if !m.is_zero() {
                base_base.insert((i, j), m);
            }
        }
    }
    AbsoluteForm2 { tower: t.clone(), dz_base, base_base }
}

/// Residue along `z = point`: Σ_i res(F_i dz)·dτ_i, a form with zero fiber part.
pub fn residue(w: &AbsoluteForm2, point: &Point) -> Result<AbsoluteForm1, FormError> {
    let r = w.dz_base.first().map_or(1, |m| m.rows());
    let base = w
        .dz_base
        .iter()
        .map(|m| m.try_map(|x| residue_dz(x, point)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(AbsoluteForm1 { tower: w.tower.clone(), fiber: zero_mat(&w.tower, r), base })
}

/// True iff dA + A∧A = 0.
pub fn is_integrable(a: &AbsoluteForm1) -> bool {
    exterior_d(a).add(&wedge(a, a).expect("same rank")).is_zero()
}

/// Scalar base form Σ c_i dτ_i from a rank-1 form, dropping nothing; helper for
/// building forms in tests and scenarios.
pub fn base_form(tower: &Arc<ScalarTower>, coeffs: &[RationalFunction]) -> AbsoluteForm1 {
    let mut all = vec![RationalFunction::zero(tower)];
    all.extend_from_slice(coeffs);
    AbsoluteForm1::scalar(tower, &all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{parse_form, parse_scalar};

    fn tower() -> Arc<ScalarTower> {
        ScalarTower::new("z", &["t", "a"], &["c"], None).unwrap()
    }

    fn f1(t: &Arc<ScalarTower>, s: &str) -> AbsoluteForm1 {
        AbsoluteForm1::scalar(t, &parse_form(t, s).unwrap())
    }

    #[test]
    fn wedge_examples() {
        let t = tower();
        let w = wedge(&f1(&t, "dz/z"), &f1(&t, "dt")).unwrap();
        assert_eq!(w, AbsoluteForm2::dz_wedge(&t, 0, parse_scalar(&t, "1/z").unwrap()));
        let a = f1(&t, "z*t*dz + a*dt - dz/t + da");
        assert!(wedge(&a, &a).unwrap().is_zero());
    }

    #[test]
    fn d_examples() {
        let t = tower();
        assert_eq!(exterior_d(&f1(&t, "t*dz")), AbsoluteForm2::dz_wedge(&t, 0, parse_scalar(&t, "-1").unwrap()));
        assert!(exterior_d(&f1(&t, "(dz - dt)/(z-t)")).is_zero());
        assert_eq!(exterior_d(&f1(&t, "z*dt/t^2")), AbsoluteForm2::dz_wedge(&t, 0, parse_scalar(&t, "1/t^2").unwrap()));
    }

    #[test]
    fn residue_examples() {
        let t = tower();
        let w = AbsoluteForm2::dz_wedge(&t, 0, parse_scalar(&t, "1/z").unwrap());
        assert_eq!(residue(&w, &Point::int(0)).unwrap(), f1(&t, "dt"));
        let w = AbsoluteForm2::dz_wedge(&t, 1, parse_scalar(&t, "t/z^2").unwrap());
        assert!(residue(&w, &Point::int(0)).unwrap().is_zero());
    }

    #[test]
    fn integrability() {
        let t = tower();
        assert!(is_integrable(&f1(&t, "c*dz/z + a*dz + z*da")));
        assert!(!is_integrable(&f1(&t, "z*dt")));
    }
}
