//! Sparse distributed multivariate polynomials over Q.
//!
//! Monomials are exponent vectors of a fixed length `nvars`; terms are kept in a
//! `BTreeMap` so the leading term (lexicographic, variable 0 most significant)
//! is always the last entry. Variable 0 is reserved for the fiber coordinate.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use smallvec::SmallVec;

pub type Exps = SmallVec<[u16; 8]>;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Exps, BigRational>,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (0..self.nvars).map(|i| format!("x{i}")).collect();
        write!(f, "{}", self.format_with(&names))
    }
}

fn zero_exps(n: usize) -> Exps {
    SmallVec::from_elem(0, n)
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, BigRational::one())
    }

    pub fn constant(nvars: usize, c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(zero_exps(nvars), c);
        }
        Poly { nvars, terms }
    }

    pub fn from_int(nvars: usize, c: i64) -> Self {
        Self::constant(nvars, BigRational::from_integer(c.into()))
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = zero_exps(nvars);
        e[i] = 1;
        Self::monomial(nvars, e, BigRational::one())
    }

    pub fn monomial(nvars: usize, exps: Exps, c: BigRational) -> Self {
        debug_assert_eq!(exps.len(), nvars);
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exps, c);
        }
        Poly { nvars, terms }
    }

    pub fn from_terms(nvars: usize, it: impl IntoIterator<Item = (Exps, BigRational)>) -> Self {
        let mut p = Poly::zero(nvars);
        for (e, c) in it {
            p.add_term(e, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Exps, &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        match self.terms.len() {
            0 => true,
            1 => self.terms.keys().next().unwrap().iter().all(|&e| e == 0),
            _ => false,
        }
    }

    pub fn is_one(&self) -> bool {
        self.is_constant() && self.constant_value().map_or(false, |c| c.is_one())
    }

    /// The value if the polynomial is constant.
    pub fn constant_value(&self) -> Option<BigRational> {
        if !self.is_constant() {
            return None;
        }
        Some(self.terms.values().next().cloned().unwrap_or_else(BigRational::zero))
    }

    /// Coefficient of the constant monomial.
    pub fn constant_term(&self) -> BigRational {
        self.terms.get(&zero_exps(self.nvars)).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn add_term(&mut self, e: Exps, c: BigRational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn leading(&self) -> Option<(&Exps, &BigRational)> {
        self.terms.iter().next_back()
    }

    pub fn leading_coeff(&self) -> BigRational {
        self.leading().map(|(_, c)| c.clone()).unwrap_or_else(BigRational::zero)
    }

    pub fn scale(&self, c: &BigRational) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, x)| (e.clone(), x * c)).collect(),
        }
    }

    /// Divide by the leading coefficient; zero stays zero.
    pub fn monic(&self) -> Poly {
        match self.leading() {
            None => self.clone(),
            Some((_, c)) if c.is_one() => self.clone(),
            Some((_, c)) => self.scale(&c.recip()),
        }
    }

    pub fn mul_monomial(&self, e: &Exps, c: &BigRational) -> Poly {
        let mut terms = BTreeMap::new();
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        for (te, tc) in &self.terms {
            let ne: Exps = te.iter().zip(e.iter()).map(|(a, b)| a + b).collect();
            terms.insert(ne, tc * c);
        }
        Poly { nvars: self.nvars, terms }
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut result = Poly::one(self.nvars);
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                result = &result * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        result
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.keys().map(|e| e[var] as u32).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().map(|&x| x as u32).sum()).max().unwrap_or(0)
    }

    pub fn uses_var(&self, var: usize) -> bool {
        self.terms.keys().any(|e| e[var] > 0)
    }

    pub fn vars_used(&self) -> Vec<usize> {
        (0..self.nvars).filter(|&v| self.uses_var(v)).collect()
    }

    /// Componentwise minimum exponent over all terms.
    pub fn min_exps(&self) -> Exps {
        let mut it = self.terms.keys();
        let mut m = match it.next() {
            Some(e) => e.clone(),
            None => return zero_exps(self.nvars),
        };
        for e in it {
            for (a, b) in m.iter_mut().zip(e.iter()) {
                *a = (*a).min(*b);
            }
        }
        m
    }

    pub fn div_monomial(&self, e: &Exps) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(te, c)| (te.iter().zip(e.iter()).map(|(a, b)| a - b).collect(), c.clone()))
                .collect(),
        }
    }

    pub fn derivative(&self, var: usize) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[var] > 0 {
                let mut ne = e.clone();
                ne[var] -= 1;
                out.add_term(ne, c * BigRational::from_integer(BigInt::from(e[var])));
            }
        }
        out
    }

    /// Coefficients with respect to `var`: entry k is the coefficient of var^k
    /// (as a polynomial not involving `var`).
    pub fn to_univariate(&self, var: usize) -> Vec<Poly> {
        let deg = self.degree_in(var) as usize;
        let mut out = vec![Poly::zero(self.nvars); if self.is_zero() { 0 } else { deg + 1 }];
        for (e, c) in &self.terms {
            let k = e[var] as usize;
            let mut ne = e.clone();
            ne[var] = 0;
            out[k].terms.insert(ne, c.clone());
        }
        out
    }

    pub fn from_univariate(nvars: usize, var: usize, coeffs: &[Poly]) -> Poly {
        let mut out = Poly::zero(nvars);
        for (k, c) in coeffs.iter().enumerate() {
            for (e, x) in &c.terms {
                let mut ne = e.clone();
                ne[var] += k as u16;
                out.add_term(ne, x.clone());
            }
        }
        out
    }

    /// Evaluate every variable at a rational point.
    pub fn eval(&self, point: &[BigRational]) -> BigRational {
        let mut acc = BigRational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    t *= num_traits::pow(point[i].clone(), k as usize);
                }
            }
            acc += t;
        }
        acc
    }

    /// Substitute a rational value for one variable.
    pub fn eval_var(&self, var: usize, value: &BigRational) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            let mut ne = e.clone();
            let k = ne[var];
            ne[var] = 0;
            out.add_term(ne, c * num_traits::pow(value.clone(), k as usize));
        }
        out
    }

    /// Least common multiple of coefficient denominators over gcd of numerators.
    pub fn rational_content(&self) -> BigRational {
        let mut num = BigInt::zero();
        let mut den = BigInt::one();
        for c in self.terms.values() {
            num = num.gcd(c.numer());
            den = den.lcm(c.denom());
        }
        if num.is_zero() {
            return BigRational::one();
        }
        BigRational::new(num, den)
    }

    /// Exact division. Returns `None` when `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        assert!(!d.is_zero(), "division by zero polynomial");
        if self.is_zero() {
            return Some(Poly::zero(self.nvars));
        }
        if d.is_constant() {
            return Some(self.scale(&d.constant_value().unwrap().recip()));
        }
        // bound the quotient's exponents so non-exact inputs terminate quickly
        let bound: Vec<i32> = (0..self.nvars)
            .map(|v| self.degree_in(v) as i32 - d.degree_in(v) as i32)
            .collect();
        if bound.iter().any(|&b| b < 0) {
            return None;
        }
        let (dle, dlc) = d.leading().map(|(e, c)| (e.clone(), c.clone())).unwrap();
        let dlc_inv = dlc.recip();
        let mut r = self.clone();
        let mut q = Poly::zero(self.nvars);
        while let Some((le, lc)) = r.leading() {
            let mut e = Exps::with_capacity(self.nvars);
            for i in 0..self.nvars {
                if le[i] < dle[i] || (le[i] - dle[i]) as i32 > bound[i] {
                    return None;
                }
                e.push(le[i] - dle[i]);
            }
            let c = lc * &dlc_inv;
            r = &r - &d.mul_monomial(&e, &c);
            q.add_term(e, c);
        }
        Some(q)
    }

    pub fn format_with(&self, names: &[String]) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut s = String::new();
        for (i, (e, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if i == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(v, &k)| if k == 1 { names[v].clone() } else { format!("{}^{}", names[v], k) })
                .collect();
            if mono.is_empty() {
                s.push_str(&a.to_string());
            } else {
                if !a.is_one() {
                    s.push_str(&a.to_string());
                    s.push('*');
                }
                s.push_str(&mono.join("*"));
            }
        }
        s
    }

    /// Change the variable layout: `map[i]` is the new index of old variable i.
    pub fn remap(&self, new_nvars: usize, map: &[usize]) -> Poly {
        let mut out = Poly::zero(new_nvars);
        for (e, c) in &self.terms {
            let mut ne = zero_exps(new_nvars);
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    ne[map[i]] += k;
                }
            }
            out.add_term(ne, c.clone());
        }
        out
    }
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let (big, small) = if self.terms.len() >= rhs.terms.len() { (self, rhs) } else { (rhs, self) };
        let mut out = big.clone();
        for (e, c) in &small.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let e: Exps = e1.iter().zip(e2.iter()).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly { nvars: self.nvars, terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect() }
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

// ---------------------------------------------------------------------------
// gcd

/// Monic greatest common divisor over Q. `gcd(0, 0) = 0`.
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    let n = a.nvars;
    if a.is_constant() || b.is_constant() {
        return Poly::one(n);
    }
    let ma = a.min_exps();
    let mb = b.min_exps();
    let mg: Exps = ma.iter().zip(mb.iter()).map(|(x, y)| *x.min(y)).collect();
    let a1 = a.div_monomial(&ma);
    let b1 = b.div_monomial(&mb);
    let g = gcd_no_monomial(&a1, &b1);
    g.mul_monomial(&mg, &BigRational::one()).monic()
}

fn gcd_no_monomial(a: &Poly, b: &Poly) -> Poly {
    let n = a.nvars;
    if a.is_constant() || b.is_constant() || a.num_terms() == 1 || b.num_terms() == 1 {
        return Poly::one(n);
    }
    if a.num_terms() <= b.num_terms() {
        if b.div_exact(a).is_some() {
            return a.monic();
        }
    } else if a.div_exact(b).is_some() {
        return b.monic();
    }
    let ua = a.vars_used();
    let ub = b.vars_used();
    // a variable present in only one argument: the gcd divides every coefficient
    for &v in &ua {
        if !ub.contains(&v) {
            let mut g = b.clone();
            for c in a.to_univariate(v) {
                if c.is_zero() {
                    continue;
                }
                g = gcd(&g, &c);
                if g.is_constant() {
                    return Poly::one(n);
                }
            }
            return g.monic();
        }
    }
    for &v in &ub {
        if !ua.contains(&v) {
            return gcd_no_monomial(b, a);
        }
    }
    if surely_coprime(a, b) {
        return Poly::one(n);
    }
    if let Some(h) = heuristic_gcd(a, b) {
        return h.monic();
    }
    let v = ua[0];
    let ca = a.to_univariate(v);
    let cb = b.to_univariate(v);
    let cont_a = content(&ca);
    let cont_b = content(&cb);
    let c = gcd(&cont_a, &cont_b);
    let pa: Vec<Poly> = ca.iter().map(|x| x.div_exact(&cont_a).expect("content divides")).collect();
    let pb: Vec<Poly> = cb.iter().map(|x| x.div_exact(&cont_b).expect("content divides")).collect();
    let g = prs(pa, pb);
    let g = Poly::from_univariate(n, v, &g);
    (&c * &g).monic()
}

/// Univariate gcd over Q on dense coefficient vectors (constant term first).
fn q_gcd(mut a: Vec<BigRational>, mut b: Vec<BigRational>) -> usize {
    let trim = |p: &mut Vec<BigRational>| {
        while p.last().map_or(false, |c| c.is_zero()) {
            p.pop();
        }
    };
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let lb = b.last().unwrap().clone();
        while a.len() >= b.len() && !a.is_empty() {
            let f = a.last().unwrap() / &lb;
            let shift = a.len() - b.len();
            for (i, c) in b.iter().enumerate() {
                a[i + shift] -= &f * c;
            }
            a.pop();
            trim(&mut a);
        }
        // keep coefficients small
        if let Some(l) = a.last().cloned() {
            a.iter_mut().for_each(|c| *c /= &l);
        }
        std::mem::swap(&mut a, &mut b);
    }
    a.len().saturating_sub(1)
}

/// Sufficient test for gcd(a, b) = 1. Specialising every other variable at a
/// point r where lc_v(a)(r) ≠ 0 gives deg_v gcd(a, b) ≤ deg_v gcd(a(r), b(r)),
/// so a constant univariate gcd in each variable proves coprimality. A
/// `false` answer is inconclusive.
fn surely_coprime(a: &Poly, b: &Poly) -> bool {
    const POINTS: [i64; 11] = [3, -5, 7, 11, -13, 17, 19, -23, 29, 31, -37];
    let ua = a.vars_used();
    let ub = b.vars_used();
    'vars: for &v in ua.iter().filter(|v| ub.contains(v)) {
        for attempt in 0..3 {
            let point: Vec<BigRational> = (0..a.nvars)
                .map(|i| BigRational::from_integer(POINTS[(i * 3 + attempt * 5 + v) % POINTS.len()].into()))
                .collect();
            let lc = a.to_univariate(v).pop().expect("v is used");
            if lc.eval(&point).is_zero() {
                continue;
            }
            let spec = |p: &Poly| p.to_univariate(v).iter().map(|c| c.eval(&point)).collect::<Vec<_>>();
            if q_gcd(spec(a), spec(b)) == 0 {
                continue 'vars;
            }
        }
        return false;
    }
    true
}

fn max_norm(p: &Poly) -> BigInt {
    p.terms.values().map(|c| c.numer().abs()).max().unwrap_or_default()
}

/// Integer primitive part with positive leading coefficient.
fn z_primitive(p: &Poly) -> Poly {
    let c = p.rational_content();
    let q = p.scale(&c.recip());
    if q.leading_coeff().is_negative() {
        -&q
    } else {
        q
    }
}

/// Symmetric ξ-adic expansion of an integer polynomial in the remaining
/// variables into a polynomial in `v`.
fn xi_interpolate(mut h: Poly, v: usize, xi: &BigInt) -> Poly {
    let n = h.nvars;
    let half = xi / 2;
    let mut out = Poly::zero(n);
    let mut k: u16 = 0;
    while !h.is_zero() {
        let mut digit = Poly::zero(n);
        for (e, c) in &h.terms {
            let mut r = c.numer().mod_floor(xi);
            if r > half {
                r -= xi;
            }
            if !r.is_zero() {
                digit.add_term(e.clone(), BigRational::from_integer(r));
            }
        }
        let mut shifted = Poly::zero(n);
        for (e, c) in &digit.terms {
            let mut ne = e.clone();
            ne[v] = k;
            shifted.add_term(ne, c.clone());
        }
        out = &out + &shifted;
        h = (&h - &digit).scale(&BigRational::from_integer(xi.clone()).recip());
        k += 1;
    }
    out
}

/// Heuristic gcd of integer polynomials (content included) by evaluation at
/// a large integer ξ and ξ-adic reconstruction. With ξ ≥ 2·min(‖f‖, ‖g‖) + 2
/// a candidate that divides both inputs is the gcd, so the exact division is
/// the whole correctness check.
fn heu_rec(f: &Poly, g: &Poly, vars: &[usize]) -> Option<Poly> {
    let n = f.nvars;
    let cf = f.rational_content().numer().gcd(g.rational_content().numer());
    let Some((&v, rest)) = vars.split_first() else {
        return Some(Poly::constant(n, BigRational::from_integer(cf)));
    };
    let (f, g) = (z_primitive(f), z_primitive(g));
    let (fnorm, gnorm) = (max_norm(&f), max_norm(&g));
    let floor = BigInt::from(2) * fnorm.clone().min(gnorm.clone()) + BigInt::from(2);
    let b: BigInt = &floor + BigInt::from(27);
    let lc = |p: &Poly| p.leading_coeff().numer().abs().max(BigInt::one());
    let alt = BigInt::from(2) * (&fnorm / lc(&f)).min(&gnorm / lc(&g)) + 2;
    let mut xi = b.clone().min(BigInt::from(99) * b.sqrt()).max(alt).max(floor);
    for _ in 0..6 {
        let x = BigRational::from_integer(xi.clone());
        let (ff, gg) = (f.eval_var(v, &x), g.eval_var(v, &x));
        if !ff.is_zero() && !gg.is_zero() {
            if let Some(img) = heu_rec(&ff, &gg, rest) {
                let h = z_primitive(&xi_interpolate(img, v, &xi));
                if !h.is_zero() && f.div_exact(&h).is_some() && g.div_exact(&h).is_some() {
                    return Some(h.scale(&BigRational::from_integer(cf)));
                }
            }
        }
        xi = BigInt::from(73794) * &xi * xi.sqrt().sqrt() / BigInt::from(27011);
    }
    None
}

fn heuristic_gcd(a: &Poly, b: &Poly) -> Option<Poly> {
    let mut vars = a.vars_used();
    for v in b.vars_used() {
        if !vars.contains(&v) {
            vars.push(v);
        }
    }
    heu_rec(&z_primitive(a), &z_primitive(b), &vars)
}

fn content(coeffs: &[Poly]) -> Poly {
    let n = coeffs[0].nvars;
    let mut g = Poly::zero(n);
    for c in coeffs {
        if c.is_zero() {
            continue;
        }
        g = gcd(&g, c);
        if g.is_constant() {
            return Poly::one(n);
        }
    }
    if g.is_zero() {
        Poly::one(n)
    } else {
        g
    }
}

fn udeg(p: &[Poly]) -> usize {
    p.len() - 1
}

fn utrim(mut p: Vec<Poly>) -> Vec<Poly> {
    while p.len() > 1 && p.last().unwrap().is_zero() {
        p.pop();
    }
    p
}

fn uprimitive(p: Vec<Poly>) -> Vec<Poly> {
    let c = content(&p);
    let mut out: Vec<Poly> = p.iter().map(|x| x.div_exact(&c).expect("content divides")).collect();
    let lc = out.last().unwrap().leading_coeff();
    if !lc.is_zero() && !lc.is_one() {
        let inv = lc.recip();
        out = out.iter().map(|x| x.scale(&inv)).collect();
    }
    out
}

fn prem(f: &[Poly], g: &[Poly]) -> Vec<Poly> {
    let dg = udeg(g);
    let lcg = g.last().unwrap();
    let mut r: Vec<Poly> = f.to_vec();
    while r.len() > dg && !(r.len() == 1 && r[0].is_zero()) {
        let dr = udeg(&r);
        if dr < dg {
            break;
        }
        let lcr = r.last().unwrap().clone();
        let shift = dr - dg;
        let mut nr: Vec<Poly> = r.iter().map(|c| c * lcg).collect();
        for (i, gc) in g.iter().enumerate() {
            let t = gc * &lcr;
            nr[i + shift] = &nr[i + shift] - &t;
        }
        nr.pop();
        r = utrim(nr);
        if r.iter().all(|c| c.is_zero()) {
            return vec![Poly::zero(f[0].nvars)];
        }
    }
    r
}

fn prs(a: Vec<Poly>, b: Vec<Poly>) -> Vec<Poly> {
    let (mut f, mut g) = if udeg(&a) >= udeg(&b) { (a, b) } else { (b, a) };
    let n = f[0].nvars;
    loop {
        if udeg(&g) == 0 {
            return vec![Poly::one(n)];
        }
        let r = prem(&f, &g);
        if r.iter().all(|c| c.is_zero()) {
            return uprimitive(g);
        }
        let r = uprimitive(r);
        f = g;
        g = r;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(n: usize, i: usize) -> Poly {
        Poly::var(n, i)
    }
    fn c(n: usize, v: i64) -> Poly {
        Poly::from_int(n, v)
    }

    #[test]
    fn gcd_univariate() {
        let t = x(1, 0);
        let a = &(&t * &t) - &c(1, 1);
        let b = &t - &c(1, 1);
        assert_eq!(gcd(&a, &b), b);
    }

    #[test]
    fn gcd_multivariate_common_factor() {
        let n = 3;
        let (a, b, z) = (x(n, 1), x(n, 2), x(n, 0));
        let common = &(&a * &b) + &(&z * &c(n, 3));
        let f1 = &common * &(&a + &c(n, 2));
        let f2 = &common * &(&(&z * &z) - &b);
        assert_eq!(gcd(&f1, &f2), common.monic());
    }

    #[test]
    fn div_exact_rejects_non_multiple() {
        let n = 2;
        let p = &x(n, 0) + &x(n, 1);
        let q = &x(n, 0) - &x(n, 1);
        assert!(p.div_exact(&q).is_none());
        let prod = &p * &q;
        assert_eq!(prod.div_exact(&q).unwrap(), p);
    }

    #[test]
    fn gcd_three_variables() {
        let v = |i| x(3, i);
        let d0 = &(&c(3, 1) + &(&v(0) * &v(1))) - &(&(&v(2) * &v(0)) * &v(0)).scale(&rat(2, 1));
        let d1 = &(&(&c(3, 2) - &v(0)) - &(&v(1) * &v(2))) + &(&(&v(0) * &v(0)) * &v(1)).scale(&rat(4, 1));
        let n0 = &(&(&c(3, 3) - &v(0).scale(&rat(2, 1))) + &(&(&v(0) * &v(0)) * &v(1))) + &v(2);
        let a = &(&n0 * &d1) * &d0;
        let b = &(&d1 * &d1) * &(&v(1) + &c(3, 5));
        assert_eq!(gcd(&a, &b), d1.monic());
        assert!(gcd(&(&n0 * &d0), &d1).is_one());
    }

    #[test]
    fn gcd_with_monomials() {
        let n = 2;
        let a = &x(n, 0).pow(3) * &x(n, 1);
        let b = &(&x(n, 0) * &x(n, 0)) + &x(n, 0);
        assert_eq!(gcd(&a, &b), x(n, 0));
    }
}
