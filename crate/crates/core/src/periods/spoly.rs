//! Sparse multivariate polynomials with coefficients in any [`Field`]; used
//! for the symmetric-function and change-of-variables computations, where the
//! coefficients live in Q or in Q(a₁,…,a_{m−1}).

use std::collections::BTreeMap;

use crate::field::Field;

#[derive(Clone, Debug, PartialEq)]
pub struct SPoly<T: Field> {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, T>,
    zero: T,
}

impl<T: Field> SPoly<T> {
    pub fn zero(nvars: usize, proto: &T) -> Self {
        SPoly { nvars, terms: BTreeMap::new(), zero: proto.zero_like() }
    }

    pub fn constant(nvars: usize, c: T) -> Self {
        let mut p = Self::zero(nvars, &c);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn var(nvars: usize, i: usize, proto: &T) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars, proto);
        p.add_term(e, proto.one_like());
        p
    }

    pub fn monomial(exps: Vec<u32>, c: T) -> Self {
        let mut p = Self::zero(exps.len(), &c);
        p.add_term(exps, c);
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn proto(&self) -> &T {
        &self.zero
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &T)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, exps: &[u32]) -> T {
        self.terms.get(exps).cloned().unwrap_or_else(|| self.zero.clone())
    }

    pub fn add_term(&mut self, exps: Vec<u32>, c: T) {
        assert_eq!(exps.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&exps) {
            Some(v) => {
                let s = v.add(&c);
                if s.is_zero() {
                    self.terms.remove(&exps);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(exps, c);
            }
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(e.clone(), c.clone());
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        self.map_coeffs(|c| c.neg())
    }

    pub fn scale(&self, k: &T) -> Self {
        self.map_coeffs(|c| c.mul(k))
    }

    fn map_coeffs(&self, f: impl Fn(&T) -> T) -> Self {
        let mut r = Self::zero(self.nvars, &self.zero);
        for (e, c) in &self.terms {
            r.add_term(e.clone(), f(c));
        }
        r
    }

    /// The same polynomial with coefficients mapped into another field.
    pub fn convert<U: Field>(&self, proto: &U, f: impl Fn(&T) -> U) -> SPoly<U> {
        let mut r = SPoly::zero(self.nvars, proto);
        for (e, c) in &self.terms {
            r.add_term(e.clone(), f(c));
        }
        r
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut r = Self::zero(self.nvars, &self.zero);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                r.add_term(e, c1.mul(c2));
            }
        }
        r
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut r = Self::constant(self.nvars, self.zero.one_like());
        for _ in 0..k {
            r = r.mul(self);
        }
        r
    }

    pub fn derivative(&self, v: usize) -> Self {
        let mut r = Self::zero(self.nvars, &self.zero);
        for (e, c) in &self.terms {
            if e[v] > 0 {
                let mut e2 = e.clone();
                e2[v] -= 1;
                r.add_term(e2, c.mul(&c.int_like(e[v] as i64)));
            }
        }
        r
    }

    /// Substitute `images[i]` for variable i (all images share one arity).
    pub fn compose(&self, images: &[SPoly<T>]) -> SPoly<T> {
        assert_eq!(images.len(), self.nvars);
        let n = images.first().map_or(0, |p| p.nvars);
        let mut cache: Vec<Vec<SPoly<T>>> = images.iter().map(|p| vec![SPoly::constant(n, self.zero.one_like()), p.clone()]).collect();
        let mut r = SPoly::zero(n, &self.zero);
        for (e, c) in &self.terms {
            let mut t = SPoly::constant(n, c.clone());
            for (i, &k) in e.iter().enumerate() {
                while cache[i].len() <= k as usize {
                    let next = cache[i].last().unwrap().mul(&images[i]);
                    cache[i].push(next);
                }
                if k > 0 {
                    t = t.mul(&cache[i][k as usize]);
                }
            }
            r = r.add(&t);
        }
        r
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    /// max Σ w_i e_i over the terms.
    pub fn weighted_degree(&self, w: &[u32]) -> u32 {
        self.terms.keys().map(|e| e.iter().zip(w).map(|(a, b)| a * b).sum()).max().unwrap_or(0)
    }

    pub fn homogeneous_part(&self, d: u32) -> Self {
        let mut r = Self::zero(self.nvars, &self.zero);
        for (e, c) in &self.terms {
            if e.iter().sum::<u32>() == d {
                r.add_term(e.clone(), c.clone());
            }
        }
        r
    }

    pub fn uses_var(&self, v: usize) -> bool {
        self.terms.keys().any(|e| e[v] > 0)
    }

    /// Same polynomial in a larger ring: variable i goes to `map[i]`.
    pub fn remap(&self, nvars: usize, map: &[usize]) -> Self {
        let mut r = Self::zero(nvars, &self.zero);
        for (e, c) in &self.terms {
            let mut e2 = vec![0; nvars];
            for (i, &k) in e.iter().enumerate() {
                e2[map[i]] += k;
            }
            r.add_term(e2, c.clone());
        }
        r
    }

    pub fn format_with(&self, names: &[String], coeff: impl Fn(&T) -> String) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .rev()
            .map(|(e, c)| {
                let mono: Vec<String> = e
                    .iter()
                    .enumerate()
                    .filter(|(_, &k)| k > 0)
                    .map(|(i, &k)| if k == 1 { names[i].clone() } else { format!("{}^{k}", names[i]) })
                    .collect();
                if mono.is_empty() {
                    format!("({})", coeff(c))
                } else {
                    format!("({})*{}", coeff(c), mono.join("*"))
                }
            })
            .collect();
        parts.join(" + ")
    }
}

/// Determinant by Laplace expansion along the first row; for the small
/// polynomial matrices of the symmetric-function checks.
pub fn det<T: Field>(m: &[Vec<SPoly<T>>]) -> SPoly<T> {
    let n = m.len();
    let proto = m[0][0].proto().clone();
    let nv = m[0][0].nvars();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = SPoly::zero(nv, &proto);
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<SPoly<T>>> = m[1..].iter().map(|row| row.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, x)| x.clone()).collect()).collect();
        let term = m[0][j].mul(&det(&minor));
        acc = if j % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn arithmetic_and_compose() {
        let x = SPoly::var(2, 0, &q(0));
        let y = SPoly::var(2, 1, &q(0));
        let s = x.add(&y);
        let sq = s.pow(2);
        assert_eq!(sq.coeff(&[1, 1]), q(2));
        assert!(s.sub(&s).is_zero());
        // (x+y)² with x ↦ y, y ↦ x + 1
        let c = sq.compose(&[y.clone(), x.add(&SPoly::constant(2, q(1)))]);
        assert_eq!(c, x.add(&y).add(&SPoly::constant(2, q(1))).pow(2));
        assert_eq!(sq.derivative(0), s.scale(&q(2)));
        let m = vec![vec![x.clone(), y.clone()], vec![y.clone(), x.clone()]];
        assert_eq!(det(&m), x.pow(2).sub(&y.pow(2)));
    }
}
