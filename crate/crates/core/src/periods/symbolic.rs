//! Exact side of the stationary-phase evaluation: symmetric-function
//! coordinates on the space of effective divisors of degree m−2, the critical
//! point of F(s) = Σ f(z_i), and the triangular change of variables that
//! turns F − F(b) into a quadratic form.

use std::sync::Arc;

use num_rational::BigRational;
use num_traits::Zero;

use super::spoly::{det, SPoly};
use crate::field::{resultant_trace, Field, FieldError, Matrix, RationalFunction, ScalarTower};

pub type QPoly = SPoly<BigRational>;
pub type APoly = SPoly<RationalFunction>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SymbolicError {
    #[error("need m >= 3, got {0}")]
    Order(usize),
    #[error("not in scope: {0}")]
    NotInScope(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

fn q(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

/// Q(a₁,…,a_{m−1}) with fiber coordinate z.
pub fn coefficient_tower(m: usize) -> Arc<ScalarTower> {
    let names: Vec<String> = (1..m).map(|k| format!("a{k}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    ScalarTower::new("z", &refs, &[], None).expect("valid names")
}

fn a_var(t: &Arc<ScalarTower>, k: usize) -> RationalFunction {
    RationalFunction::named(t, &format!("a{k}"))
}

/// e_k(z₁,…,z_n).
pub fn elementary(n: usize, k: usize) -> QPoly {
    let mut acc = QPoly::zero(n, &q(0));
    let mut idx: Vec<usize> = (0..k).collect();
    if k == 0 {
        return QPoly::constant(n, q(1));
    }
    if k > n {
        return acc;
    }
    loop {
        let mut e = vec![0; n];
        for &i in &idx {
            e[i] = 1;
        }
        acc.add_term(e, q(1));
        // next k-subset in lexicographic order
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return acc;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// p₁,…,p_n as polynomials in s₁,…,s_n (Newton's identities).
pub fn newton_power_sums(n: usize) -> Vec<QPoly> {
    let s = |i: usize| QPoly::var(n, i - 1, &q(0));
    let mut p: Vec<QPoly> = Vec::with_capacity(n);
    for k in 1..=n {
        let sign = |e: usize| if e % 2 == 0 { q(1) } else { q(-1) };
        let mut acc = s(k).scale(&(sign(k - 1) * q(k as i64)));
        for i in 1..k {
            acc = acc.add(&s(i).mul(&p[k - i - 1]).scale(&sign(i - 1)));
        }
        p.push(acc);
    }
    p
}

pub struct SymmetricBridge {
    pub m: usize,
    /// p_k(s₁,…,s_{m−1}), k = 1..m−1.
    pub power_sums: Vec<QPoly>,
    /// F(s₁,…,s_{m−2}) = Σ a_k p_k with s_{m−1} = 0.
    pub f_on_b: APoly,
    /// det(∂s_i/∂z_j) for i, j ≤ m−2.
    pub jacobian: QPoly,
    /// Π_{i<j}(z_j − z_i).
    pub vandermonde: QPoly,
    /// J = sign·V; the sign is (−1)^{n(n−1)/2} for the row order s₁,…,s_n.
    pub jacobian_sign: i64,
    pub newton_ok: bool,
    pub jacobian_ok: bool,
}

pub fn symmetric_bridge(m: usize) -> Result<SymmetricBridge, SymbolicError> {
    if m < 3 {
        return Err(SymbolicError::Order(m));
    }
    let (n, big) = (m - 2, m - 1);
    let power_sums = newton_power_sums(big);

    // Newton: substitute s_i = e_i(z₁..z_{m−1}) and compare with Σ z_j^k
    let es: Vec<QPoly> = (1..=big).map(|i| elementary(big, i)).collect();
    let newton_ok = power_sums.iter().enumerate().all(|(k, p)| {
        let direct = (0..big).fold(QPoly::zero(big, &q(0)), |acc, j| acc.add(&QPoly::var(big, j, &q(0)).pow(k as u32 + 1)));
        p.compose(&es) == direct
    });

    let t = coefficient_tower(m);
    let zero = RationalFunction::zero(&t);
    let mut images: Vec<QPoly> = (0..n).map(|i| QPoly::var(n, i, &q(0))).collect();
    images.push(QPoly::zero(n, &q(0)));
    let mut f_on_b = APoly::zero(n, &zero);
    for (k, p) in power_sums.iter().enumerate() {
        let restricted = p.compose(&images).convert(&zero, |c| RationalFunction::from_rational(&t, c.clone()));
        f_on_b = f_on_b.add(&restricted.scale(&a_var(&t, k + 1)));
    }

    let es: Vec<QPoly> = (1..=n).map(|i| elementary(n, i)).collect();
    let jm: Vec<Vec<QPoly>> = es.iter().map(|s| (0..n).map(|j| s.derivative(j)).collect()).collect();
    let jacobian = det(&jm);
    let mut vandermonde = QPoly::constant(n, q(1));
    for i in 0..n {
        for j in i + 1..n {
            vandermonde = vandermonde.mul(&QPoly::var(n, j, &q(0)).sub(&QPoly::var(n, i, &q(0))));
        }
    }
    let jacobian_sign = if (n * (n - 1) / 2) % 2 == 0 { 1 } else { -1 };
    let jacobian_ok = jacobian == vandermonde.scale(&q(jacobian_sign));
    Ok(SymmetricBridge { m, power_sums, f_on_b, jacobian, vandermonde, jacobian_sign, newton_ok, jacobian_ok })
}

/// The divisor of f′ in s-coordinates: b_k = e_k(roots of f′)
/// = (−1)^k (m−1−k) a_{m−1−k} / ((m−1) a_{m−1}).
pub fn critical_point(m: usize) -> Vec<RationalFunction> {
    let t = coefficient_tower(m);
    let lead = a_var(&t, m - 1).scale(&q(m as i64 - 1));
    let lead_inv = lead.inv().expect("nonzero");
    (1..=m - 2)
        .map(|k| {
            let c = a_var(&t, m - 1 - k).scale(&q((m - 1 - k) as i64 * if k % 2 == 0 { 1 } else { -1 }));
            &c * &lead_inv
        })
        .collect()
}

/// (F(b), G) with F(b + t) = F(b) + G(t).
pub fn shift_to_critical(f: &APoly, b: &[RationalFunction]) -> (RationalFunction, APoly) {
    let n = f.nvars();
    let proto = f.proto().clone();
    let images: Vec<APoly> = (0..n).map(|i| APoly::var(n, i, &proto).add(&APoly::constant(n, b[i].clone()))).collect();
    let shifted = f.compose(&images);
    let c = shifted.coeff(&vec![0; n]);
    let g = shifted.sub(&APoly::constant(n, c.clone()));
    (c, g)
}

/// Σ_{f′(β)=0} f(β) computed without roots, as a trace on Q(a)[z]/(f′).
pub fn critical_sum_symbolic(m: usize) -> Result<RationalFunction, FieldError> {
    let t = coefficient_tower(m);
    let z = RationalFunction::fiber_var(&t);
    let mut f = RationalFunction::zero(&t);
    for k in 1..m {
        f = &f + &(&a_var(&t, k) * &z.pow(k as i32));
    }
    resultant_trace(&f.derivative(0), &f)
}

#[derive(Clone, Debug)]
pub struct TriangularChange {
    /// B_j(t₁,…,t_{j−1}), j = 1..n; t′_j = t_j + B_j.
    pub b: Vec<APoly>,
    pub q: APoly,
}

impl TriangularChange {
    pub fn substitution(&self) -> Vec<APoly> {
        let n = self.q.nvars();
        let proto = self.q.proto().clone();
        (0..n).map(|j| APoly::var(n, j, &proto).add(&self.b[j])).collect()
    }

    /// ∂t′_j/∂t_k is 0 for k > j and 1 for k = j.
    pub fn is_unipotent(&self) -> bool {
        let sub = self.substitution();
        sub.iter().enumerate().all(|(j, p)| {
            (j..sub.len()).all(|k| {
                let d = p.derivative(k);
                if k == j {
                    d == APoly::constant(p.nvars(), p.proto().one_like())
                } else {
                    d.is_zero()
                }
            })
        })
    }

    pub fn reproduces(&self, g: &APoly) -> bool {
        self.q.compose(&self.substitution()) == *g
    }
}

fn monomials_upto(nvars: usize, used: usize, degree: u32, max_weight: u32) -> Vec<Vec<u32>> {
    // exponent vectors supported on the first `used` variables, total degree
    // `degree`, weight Σ (i+1)e_i ≤ max_weight
    let mut out = Vec::new();
    fn rec(i: usize, used: usize, left: u32, weight: u32, max_w: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == used {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let w = i as u32 + 1;
        let mut k = 0;
        while k <= left && weight + k * w <= max_w {
            cur[i] = k;
            rec(i + 1, used, left - k, weight + k * w, max_w, cur, out);
            k += 1;
        }
        cur[i] = 0;
    }
    let mut cur = vec![0; nvars];
    rec(0, used, degree, 0, max_weight, &mut cur, &mut out);
    out
}

/// Particular solution of a (possibly rectangular) linear system, or None.
fn solve_linear<T: Field>(mut rows: Vec<Vec<T>>, mut rhs: Vec<T>, ncols: usize) -> Option<Vec<T>> {
    let proto = rhs.first()?.clone();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        rhs.swap(r, p);
        let inv = rows[r][c].inv()?;
        for x in rows[r].iter_mut() {
            *x = x.mul(&inv);
        }
        rhs[r] = rhs[r].mul(&inv);
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                for k in 0..ncols {
                    let v = rows[i][k].sub(&f.mul(&rows[r][k]));
                    rows[i][k] = v;
                }
                rhs[i] = rhs[i].sub(&f.mul(&rhs[r]));
            }
        }
        pivots.push(c);
        r += 1;
    }
    if rhs[r..].iter().any(|x| !x.is_zero()) {
        return None;
    }
    let mut sol = vec![proto.zero_like(); ncols];
    for (i, &c) in pivots.iter().enumerate() {
        sol[c] = rhs[i].clone();
    }
    Some(sol)
}

/// Find t′_j = t_j + B_j(t₁,…,t_{j−1}) with G(t) = Q(t′), Q the quadratic part
/// of G. The B_j are solved degree by degree: at degree d the unknown pieces
/// of degree d−1 enter only through ∇Q·B, a linear system over Q(a).
pub fn triangular_change_of_variables(g: &APoly, m: usize) -> Result<TriangularChange, SymbolicError> {
    let n = g.nvars();
    if n != m - 2 {
        return Err(SymbolicError::NotInScope(format!("expected {} variables, got {n}", m - 2)));
    }
    let proto = g.proto().clone();
    if g.terms().any(|(e, _)| e.iter().sum::<u32>() < 2) {
        return Err(SymbolicError::NotInScope("G has constant or linear terms".into()));
    }
    let weights: Vec<u32> = (1..=n as u32).collect();
    if g.weighted_degree(&weights) > m as u32 - 1 {
        return Err(SymbolicError::NotInScope(format!("weighted degree exceeds {}", m - 1)));
    }
    for i in 1..=n {
        let j = m - 1 - i;
        if j < 1 || j > n {
            continue;
        }
        let mut e = vec![0; n];
        e[i - 1] += 1;
        e[j - 1] += 1;
        if g.coeff(&e).is_zero() {
            return Err(SymbolicError::NotInScope(format!("coefficient of t{i}*t{j} vanishes")));
        }
    }
    let qf = g.homogeneous_part(2);
    let grads: Vec<APoly> = (0..n).map(|j| qf.derivative(j)).collect();
    let mut b: Vec<APoly> = (0..n).map(|_| APoly::zero(n, &proto)).collect();
    for d in 3..=(2 * n as u32).max(g.total_degree()) {
        let change = TriangularChange { b: b.clone(), q: qf.clone() };
        let residual = g.homogeneous_part(d).sub(&qf.compose(&change.substitution()).homogeneous_part(d));
        if residual.is_zero() {
            continue;
        }
        let mut unknowns: Vec<(usize, Vec<u32>)> = Vec::new();
        for j in 0..n {
            for mono in monomials_upto(n, j, d - 1, j as u32 + 1) {
                unknowns.push((j, mono));
            }
        }
        let contribs: Vec<APoly> = unknowns.iter().map(|(j, e)| grads[*j].mul(&APoly::monomial(e.clone(), proto.one_like()))).collect();
        let mut keys: Vec<Vec<u32>> = residual.terms().map(|(e, _)| e.clone()).collect();
        for c in &contribs {
            keys.extend(c.terms().map(|(e, _)| e.clone()));
        }
        keys.sort();
        keys.dedup();
        let rows: Vec<Vec<RationalFunction>> = keys.iter().map(|k| contribs.iter().map(|c| c.coeff(k)).collect()).collect();
        let rhs: Vec<RationalFunction> = keys.iter().map(|k| residual.coeff(k)).collect();
        let sol = solve_linear(rows, rhs, unknowns.len())
            .ok_or_else(|| SymbolicError::NotInScope(format!("no triangular substitution absorbs the degree-{d} terms")))?;
        for ((j, e), c) in unknowns.into_iter().zip(sol) {
            b[j].add_term(e, c);
        }
    }
    let change = TriangularChange { b, q: qf };
    if !change.reproduces(g) {
        return Err(SymbolicError::NotInScope("substitution does not reproduce G".into()));
    }
    Ok(change)
}

/// det Hess(Q) / ((m−1)a_{m−1})^{m−2}, if it is a rational constant.
pub fn hessian_ratio(qf: &APoly, m: usize) -> Option<BigRational> {
    let n = qf.nvars();
    let t = qf.proto().tower().clone();
    let zero = vec![0; n];
    let h = Matrix::from_fn(n, n, |i, j| qf.derivative(i).derivative(j).coeff(&zero));
    let scale = a_var(&t, m - 1).scale(&q(m as i64 - 1)).pow(n as i32);
    (&h.det() * &scale.inv().ok()?).constant_value().filter(|c| !Zero::is_zero(c))
}

/// Everything exact about f = a_{m−1}z^{m−1} + … + a₁z with symbolic a_k.
pub struct StationaryPhaseSymbolic {
    pub bridge: SymmetricBridge,
    pub b: Vec<RationalFunction>,
    pub f_at_b: RationalFunction,
    pub critical_sum: RationalFunction,
    pub g: APoly,
    pub change: TriangularChange,
    pub hessian_ratio: Option<BigRational>,
}

impl StationaryPhaseSymbolic {
    pub fn all_checks_pass(&self) -> bool {
        self.bridge.newton_ok
            && self.bridge.jacobian_ok
            && self.f_at_b == self.critical_sum
            && self.change.is_unipotent()
            && self.change.reproduces(&self.g)
            && self.hessian_ratio.is_some()
    }
}

pub fn stationary_phase_symbolic(m: usize) -> Result<StationaryPhaseSymbolic, SymbolicError> {
    let bridge = symmetric_bridge(m)?;
    let b = critical_point(m);
    let (f_at_b, g) = shift_to_critical(&bridge.f_on_b, &b);
    if g.terms().any(|(e, _)| e.iter().sum::<u32>() == 1) {
        return Err(SymbolicError::NotInScope("b is not a critical point of F".into()));
    }
    let critical_sum = critical_sum_symbolic(m)?;
    let change = triangular_change_of_variables(&g, m)?;
    let hessian_ratio = hessian_ratio(&change.q, m);
    Ok(StationaryPhaseSymbolic { bridge, b, f_at_b, critical_sum, g, change, hessian_ratio })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn newton_m4() {
        let p = newton_power_sums(3);
        let s = |i| QPoly::var(3, i, &q(0));
        assert_eq!(p[1], s(0).pow(2).sub(&s(1).scale(&q(2))));
        let p3 = s(0).pow(3).sub(&s(0).mul(&s(1)).scale(&q(3))).add(&s(2).scale(&q(3)));
        assert_eq!(p[2], p3);
    }

    #[test]
    fn jacobian_m4() {
        let br = symmetric_bridge(4).unwrap();
        let z = |i| QPoly::var(2, i, &q(0));
        // ds₁∧ds₂ = (z₁ − z₂) dz₁∧dz₂
        assert_eq!(br.jacobian, z(0).sub(&z(1)));
        assert_eq!(br.vandermonde, z(1).sub(&z(0)));
        assert!(br.jacobian_ok && br.newton_ok);
    }

    #[test]
    fn quadratic_g_needs_no_change() {
        let sp = stationary_phase_symbolic(3).unwrap();
        assert!(sp.change.b[0].is_zero());
        assert_eq!(sp.change.q, sp.g);
        assert!(sp.all_checks_pass());
    }

    #[test]
    fn m4_one_substitution() {
        let sp = stationary_phase_symbolic(4).unwrap();
        assert!(sp.change.b[0].is_zero());
        assert!(!sp.change.b[1].is_zero());
        assert!(!sp.change.b[1].uses_var(1));
        assert!(sp.all_checks_pass());
    }
}
