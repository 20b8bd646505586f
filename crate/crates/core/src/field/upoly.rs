//! Dense univariate polynomials over any [`Field`]; coefficient `i` multiplies x^i.
//! The zero polynomial is the empty vector.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::tower::Field;

pub type UPoly<T> = Vec<T>;

pub fn trim<T: Field>(mut p: UPoly<T>) -> UPoly<T> {
    while p.last().map_or(false, |c| Field::is_zero(c)) {
        p.pop();
    }
    p
}

/// Degree; `None` for the zero polynomial.
pub fn deg<T: Field>(p: &[T]) -> Option<usize> {
    p.iter().rposition(|c| !Field::is_zero(c))
}

pub fn add<T: Field>(a: &[T], b: &[T]) -> UPoly<T> {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| match (a.get(i), b.get(i)) {
            (Some(x), Some(y)) => x.add(y),
            (Some(x), None) => x.clone(),
            (None, Some(y)) => y.clone(),
            _ => unreachable!(),
        })
        .collect();
    trim(out)
}

pub fn neg<T: Field>(a: &[T]) -> UPoly<T> {
    a.iter().map(|c| c.neg()).collect()
}

pub fn sub<T: Field>(a: &[T], b: &[T]) -> UPoly<T> {
    add(a, &neg(b))
}

pub fn mul<T: Field>(a: &[T], b: &[T]) -> UPoly<T> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![a[0].zero_like(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if Field::is_zero(x) {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].add(&x.mul(y));
        }
    }
    trim(out)
}

pub fn scale<T: Field>(a: &[T], c: &T) -> UPoly<T> {
    trim(a.iter().map(|x| x.mul(c)).collect())
}

/// Quotient and remainder; panics on division by zero.
pub fn divrem<T: Field>(a: &[T], b: &[T]) -> (UPoly<T>, UPoly<T>) {
    let b = trim(b.to_vec());
    let db = deg(&b).expect("polynomial division by zero");
    let lead_inv = b[db].inv().unwrap();
    let mut r = trim(a.to_vec());
    if r.len() <= db {
        return (Vec::new(), r);
    }
    let mut q = vec![b[0].zero_like(); r.len() - db];
    while let Some(dr) = deg(&r) {
        if dr < db {
            break;
        }
        let c = r[dr].mul(&lead_inv);
        let shift = dr - db;
        for (i, bc) in b.iter().enumerate() {
            r[i + shift] = r[i + shift].sub(&c.mul(bc));
        }
        q[shift] = c;
        r = trim(r);
    }
    (trim(q), r)
}

pub fn rem<T: Field>(a: &[T], b: &[T]) -> UPoly<T> {
    divrem(a, b).1
}

pub fn monic<T: Field>(a: &[T]) -> UPoly<T> {
    match deg(a) {
        None => Vec::new(),
        Some(d) => scale(a, &a[d].inv().unwrap()),
    }
}

pub fn gcd<T: Field>(a: &[T], b: &[T]) -> UPoly<T> {
    let mut x = trim(a.to_vec());
    let mut y = trim(b.to_vec());
    while !y.is_empty() {
        let r = rem(&x, &y);
        x = y;
        y = r;
    }
    monic(&x)
}

/// Extended Euclid: returns (g, s, t) with s·a + t·b = g monic.
pub fn ext_gcd<T: Field>(a: &[T], b: &[T], one: &T) -> (UPoly<T>, UPoly<T>, UPoly<T>) {
    let (mut r0, mut r1) = (trim(a.to_vec()), trim(b.to_vec()));
    let (mut s0, mut s1) = (vec![one.clone()], Vec::new());
    let (mut t0, mut t1) = (Vec::new(), vec![one.clone()]);
    while !r1.is_empty() {
        let (q, r) = divrem(&r0, &r1);
        let s2 = sub(&s0, &mul(&q, &s1));
        let t2 = sub(&t0, &mul(&q, &t1));
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s2;
        t0 = t1;
        t1 = t2;
    }
    match deg(&r0) {
        None => (r0, s0, t0),
        Some(d) => {
            let li = r0[d].inv().unwrap();
            (scale(&r0, &li), scale(&s0, &li), scale(&t0, &li))
        }
    }
}

pub fn derivative<T: Field>(a: &[T]) -> UPoly<T> {
    trim(a.iter().enumerate().skip(1).map(|(i, c)| c.mul(&c.int_like(i as i64))).collect())
}

pub fn eval<T: Field>(a: &[T], x: &T) -> Option<T> {
    let mut it = a.iter().rev();
    let mut acc = it.next()?.clone();
    for c in it {
        acc = acc.mul(x).add(c);
    }
    Some(acc)
}

/// Coefficients of a(c + y) as a polynomial in y.
pub fn taylor_shift<T: Field>(a: &[T], c: &T) -> UPoly<T> {
    let mut acc: UPoly<T> = Vec::new();
    if a.is_empty() {
        return acc;
    }
    let lin = vec![c.clone(), c.one_like()];
    for coef in a.iter().rev() {
        acc = add(&mul(&acc, &lin), &[coef.clone()]);
    }
    acc
}

/// Power-series quotient a/b to `n` terms; needs b(0) invertible.
pub fn series_div<T: Field>(a: &[T], b: &[T], n: usize, zero: &T) -> Vec<T> {
    let b0inv = b[0].inv().expect("series denominator vanishes at 0");
    let mut out: Vec<T> = Vec::with_capacity(n);
    for k in 0..n {
        let mut acc = a.get(k).cloned().unwrap_or_else(|| zero.clone());
        for j in 1..=k.min(b.len().saturating_sub(1)) {
            acc = acc.sub(&b[j].mul(&out[k - j]));
        }
        out.push(acc.mul(&b0inv));
    }
    out
}

/// Positive divisors of |n|; `None` when |n| exceeds 10¹².
fn divisors(n: &BigInt) -> Option<Vec<BigInt>> {
    let n = n.abs();
    let limit = n.to_u64().filter(|&x| x <= 1_000_000_000_000)?;
    let mut out = Vec::new();
    let mut i = 1u64;
    while i * i <= limit {
        if limit % i == 0 {
            out.push(BigInt::from(i));
            if i * i != limit {
                out.push(BigInt::from(limit / i));
            }
        }
        i += 1;
    }
    Some(out)
}

/// All rational roots of a polynomial over Q (rational root theorem).
pub fn rational_roots(p: &[BigRational]) -> Option<Vec<BigRational>> {
    let p = trim(p.to_vec());
    if p.len() < 2 {
        return Some(Vec::new());
    }
    let den_lcm = p.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = p.iter().map(|c| (c * BigRational::from_integer(den_lcm.clone())).to_integer()).collect();
    let mut roots = Vec::new();
    let low = ints.iter().position(|c| !c.is_zero()).unwrap();
    if low > 0 {
        roots.push(BigRational::zero());
    }
    let a0 = &ints[low];
    let an = ints.last().unwrap();
    for num in divisors(a0)? {
        for den in divisors(an)? {
            for sign in [1, -1] {
                let r = BigRational::new(&num * sign, den.clone());
                if !roots.contains(&r) && eval(&p, &r).map_or(false, |v| Zero::is_zero(&v)) {
                    roots.push(r);
                }
            }
        }
    }
    Some(roots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn q(v: &[i64]) -> UPoly<BigRational> {
        v.iter().map(|&x| BigRational::from_integer(x.into())).collect()
    }

    #[test]
    fn divrem_roundtrip() {
        let a = q(&[1, 2, 3, 4]);
        let b = q(&[1, 1]);
        let (qq, r) = divrem(&a, &b);
        assert_eq!(add(&mul(&qq, &b), &r), a);
    }

    #[test]
    fn ext_gcd_bezout() {
        let a = q(&[-1, 0, 1]);
        let b = q(&[2, 1]);
        let one = BigRational::from_integer(1.into());
        let (g, s, t) = ext_gcd(&a, &b, &one);
        assert_eq!(g, q(&[1]));
        assert_eq!(add(&mul(&s, &a), &mul(&t, &b)), g);
    }

    #[test]
    fn shift() {
        // (1 + y)^2
        assert_eq!(taylor_shift(&q(&[0, 0, 1]), &BigRational::from_integer(1.into())), q(&[1, 2, 1]));
    }
}
