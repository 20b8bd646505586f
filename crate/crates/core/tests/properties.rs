use std::sync::Arc;

use gmdet_core::connection::{gauge_form, gauge_transform, ConnectionSpec};
use gmdet_core::derham::h1_basis;
use gmdet_core::epsilon::{
    build_global_section, local_correction, local_correction_base, perturbed_section, rhs_form, verify_conjecture, Verdict,
};
use gmdet_core::field::series::pole_order;
use gmdet_core::field::{Matrix, Point, RationalFunction, ScalarTower};
use gmdet_core::forms::{
    dlog_reduce, exterior_d, is_integrable, residue, scalar_mat, AbsoluteForm1, AbsoluteForm2, FactorHints, Mat,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn tower() -> Arc<ScalarTower> {
    ScalarTower::new("z", &["t", "u"], &[], None).unwrap()
}

fn ext_tower() -> Arc<ScalarTower> {
    ScalarTower::new("z", &["t"], &[], Some(("w", "t^2 + 1"))).unwrap()
}

fn qq(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Σ c_{ijk} z^i t^j u^k from a flat coefficient list.
fn poly(t: &Arc<ScalarTower>, cs: &[i64]) -> RationalFunction {
    let names = t.names();
    let vars: Vec<RationalFunction> = (0..names.len().min(3)).map(|i| RationalFunction::var(t, i)).collect();
    let mut out = RationalFunction::zero(t);
    for (k, c) in cs.iter().enumerate() {
        let mut m = RationalFunction::from_int(t, *c);
        let e = [k % 3, (k / 3) % 2, k / 6];
        for (v, &d) in e.iter().enumerate() {
            if v < vars.len() {
                m = &m * &vars[v].pow(d as i32);
            }
        }
        out = &out + &m;
    }
    out
}

fn coeffs() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-4i64..=4, 1..8)
}

fn nonzero_coeffs() -> impl Strategy<Value = Vec<i64>> {
    coeffs().prop_filter("nonzero", |c| c.iter().any(|x| *x != 0))
}

fn ratfun() -> impl Strategy<Value = (Vec<i64>, Vec<i64>)> {
    (coeffs(), nonzero_coeffs())
}

fn build(t: &Arc<ScalarTower>, (n, d): &(Vec<i64>, Vec<i64>)) -> RationalFunction {
    &poly(t, n) * &poly(t, d).inv().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn field_axioms(a in ratfun(), b in ratfun(), c in ratfun()) {
        let t = tower();
        let (a, b, c) = (build(&t, &a), build(&t, &b), build(&t, &c));
        prop_assert_eq!(&(&a + &b) - &b, a.clone());
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        if !b.is_zero() {
            prop_assert_eq!(&(&a * &b.inv().unwrap()) * &b, a.clone());
        }
        for v in 0..3 {
            prop_assert_eq!((&a * &b).derivative(v), &(&a.derivative(v) * &b) + &(&a * &b.derivative(v)));
        }
    }

    #[test]
    fn quadratic_extension(a in ratfun(), b in ratfun()) {
        let t = ext_tower();
        let w = RationalFunction::gen(&t);
        let x = &build(&t, &a) + &(&build(&t, &b) * &w);
        prop_assert_eq!(&w * &w, &(&RationalFunction::named(&t, "t") * &RationalFunction::named(&t, "t")) + &RationalFunction::one(&t));
        if !x.is_zero() {
            prop_assert!((&x * &x.inv().unwrap()).is_one());
            // x·conj(x) is the norm, which lies in the base field
            prop_assert!((&x * &x.conj()).q().is_zero());
        }
    }

    #[test]
    fn pole_orders_add(a in ratfun(), b in ratfun(), p in -3i64..=3) {
        let t = tower();
        let (a, b) = (build(&t, &a), build(&t, &b));
        prop_assume!(!a.is_zero() && !b.is_zero());
        for pt in [Point::int(p), Point::Infinity] {
            prop_assert_eq!(pole_order(&(&a * &b), &pt), pole_order(&a, &pt) + pole_order(&b, &pt));
        }
    }

    #[test]
    fn d_squared_vanishes(entries in prop::collection::vec(ratfun(), 4)) {
        let t = tower();
        let m: Mat = Matrix::from_fn(2, 2, |i, j| build(&t, &entries[2 * i + j]));
        prop_assert!(exterior_d(&AbsoluteForm1::d_of(&m, &t)).is_zero());
    }

    #[test]
    fn residue_theorem(nums in prop::collection::vec(coeffs(), 2), pts in prop::collection::btree_set(-5i64..=5, 1..4), mults in prop::collection::vec(1i32..=3, 3)) {
        let t = tower();
        let z = RationalFunction::fiber_var(&t);
        let mut den = RationalFunction::one(&t);
        for (k, p) in pts.iter().enumerate() {
            den = &den * &(&z - &RationalFunction::from_int(&t, *p)).pow(mults[k]);
        }
        let mut w = AbsoluteForm2::zero(&t, 1);
        for (i, n) in nums.iter().enumerate() {
            w = w.add(&AbsoluteForm2::dz_wedge(&t, i, &poly(&t, n) * &den.inv().unwrap()));
        }
        let mut total = residue(&w, &Point::Infinity).unwrap();
        for p in &pts {
            total = total.add(&residue(&w, &Point::int(*p)).unwrap());
        }
        prop_assert!(total.is_zero(), "{}", total.display());
    }

    #[test]
    fn residue_anticommutes_with_d(n in coeffs(), p in -3i64..=3, k in 1i32..=3) {
        let t = tower();
        let z = RationalFunction::fiber_var(&t);
        let f = &poly(&t, &n) * &(&z - &RationalFunction::from_int(&t, p)).pow(-k);
        let a = AbsoluteForm1::scalar(&t, &[f.clone(), &f * &RationalFunction::named(&t, "u"), f.clone()]);
        // res(F dz) as a function of the base, then res(dA) = −d_base res(A_z)
        let r = residue(&AbsoluteForm2::dz_wedge(&t, 0, f), &Point::int(p)).unwrap().scalar_coeffs()[1].clone();
        let dr = AbsoluteForm1::d_of(&scalar_mat(r), &t);
        prop_assert!(residue(&exterior_d(&a), &Point::int(p)).unwrap().add(&dr).is_zero());
    }
}

/// ψ = Σ_k c_k dz/(z − p_k)^{m_k} + dz/t − z dt/t², a rank-one Fourier-type connection.
#[derive(Debug, Clone)]
struct RankOne {
    poles: Vec<(i64, i64, u32)>,
}

fn rank_one() -> impl Strategy<Value = RankOne> {
    prop::collection::btree_map(-4i64..=4, ((-5i64..=5).prop_filter("nonzero", |c| *c != 0), 1u32..=3), 1..=3)
        .prop_map(|m| RankOne { poles: m.into_iter().map(|(p, (c, k))| (p, c, k)).collect() })
}

impl RankOne {
    fn spec(&self, t: &Arc<ScalarTower>) -> ConnectionSpec {
        let z = RationalFunction::fiber_var(t);
        let tv = RationalFunction::named(t, "t");
        let mut psi = tv.inv().unwrap();
        for (p, c, k) in &self.poles {
            let lin = &z - &RationalFunction::from_int(t, *p);
            psi = &psi + &lin.pow(-(*k as i32)).scale(&qq(*c, 3));
        }
        let dt = -&(&z * &tv.pow(-2));
        ConnectionSpec::new(AbsoluteForm1::scalar(t, &[psi, dt]), None).unwrap()
    }
}

fn fourier_tower() -> Arc<ScalarTower> {
    ScalarTower::new("z", &["t"], &[], None).unwrap()
}

fn same_class(a: &AbsoluteForm1, b: &AbsoluteForm1) -> bool {
    dlog_reduce(&a.sub(b), &FactorHints::default()).map(|c| c.is_zero()).unwrap_or(false)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rank_one_structure(inst in rank_one()) {
        let t = fourier_tower();
        let spec = inst.spec(&t);
        prop_assert!(spec.is_integrable());
        prop_assert!(spec.check_admissible().is_admissible());
        let pres = h1_basis(&spec).unwrap();
        prop_assert_eq!(pres.dim(), spec.degree() as usize - 2);
        prop_assert!(exterior_d(&pres.gm_trace().unwrap()).is_zero());
        for (p, _) in spec.divisor() {
            prop_assert!(spec.commutators_regular(p));
            prop_assert_eq!(local_correction(&spec, p).unwrap(), local_correction_base(&spec, p).unwrap());
        }
        prop_assert_eq!(verify_conjecture(&spec, &FactorHints::default()).unwrap().verdict, Verdict::Verified);
    }

    #[test]
    fn reduce_kills_the_image_of_nabla(inst in rank_one(), n in coeffs(), c in -3i64..=3) {
        let t = fourier_tower();
        let spec = inst.spec(&t);
        let pres = h1_basis(&spec).unwrap();
        let z = RationalFunction::fiber_var(&t);
        let (p, _, k) = inst.poles[0];
        // poles of h stay one below the divisor, the domain of ∇ in the filtered complex
        let h = &poly(&t, &n) + &(&z - &RationalFunction::from_int(&t, p)).pow(1 - k as i32).scale(&qq(c, 1));
        let r = pres.reduce(&pres.nabla(&[h])).unwrap();
        prop_assert!(r.iter().all(|x| x.is_zero()));
        for j in 0..pres.dim() {
            let coords = pres.reduce(&pres.basis_vector(j)).unwrap();
            let unit = coords.iter().enumerate().all(|(i, x)| if i == j { x.is_one() } else { x.is_zero() });
            prop_assert!(unit);
        }
    }

    #[test]
    fn rhs_independent_of_section(inst in rank_one(), c in (-4i64..=4).prop_filter("nonzero", |c| *c != 0), beta in 5i64..=9) {
        let t = fourier_tower();
        let spec = inst.spec(&t);
        let s = build_global_section(&spec).unwrap();
        let Ok(s2) = perturbed_section(&spec, &s, &qq(c, 2), &qq(beta, 1)) else { return Ok(()) };
        prop_assert!(same_class(&rhs_form(&spec, &s).unwrap().0, &rhs_form(&spec, &s2).unwrap().0));
    }

    #[test]
    fn z_free_gauge_invariance(inst in rank_one(), c0 in 1i64..=3, c1 in -2i64..=2) {
        let t = fourier_tower();
        let spec = inst.spec(&t);
        let g = &RationalFunction::from_int(&t, c0) + &(&RationalFunction::named(&t, "t") * &RationalFunction::from_int(&t, c1));
        let m: Mat = Matrix::from_rows(vec![vec![g]]);
        let gauged = gauge_transform(&spec, &m).unwrap();
        let lhs = h1_basis(&spec).unwrap().gm_trace().unwrap();
        let lhs2 = h1_basis(&gauged).unwrap().gm_trace().unwrap();
        prop_assert!(same_class(&lhs, &lhs2));
        let rhs = rhs_form(&spec, &build_global_section(&spec).unwrap()).unwrap().0;
        let rhs2 = rhs_form(&gauged, &build_global_section(&gauged).unwrap()).unwrap().0;
        prop_assert!(same_class(&rhs, &rhs2));
    }

    #[test]
    fn gauge_preserves_integrability(inst in rank_one(), e in prop::collection::vec(-2i64..=2, 4)) {
        let t = fourier_tower();
        let spec = inst.spec(&t);
        let z = RationalFunction::fiber_var(&t);
        let tv = RationalFunction::named(&t, "t");
        let a2 = spec.a().map(|m| Matrix::from_fn(2, 2, |i, j| if i == j { m.get(0, 0).clone() } else { RationalFunction::zero(&t) }));
        let m: Mat = Matrix::from_rows(vec![
            vec![RationalFunction::one(&t), &RationalFunction::from_int(&t, e[0]) + &(&z * &RationalFunction::from_int(&t, e[1]))],
            vec![RationalFunction::zero(&t), &RationalFunction::from_int(&t, e[2].abs() + 1) + &(&tv * &RationalFunction::from_int(&t, e[3]))],
        ]);
        prop_assume!(!m.det().is_zero());
        prop_assert!(is_integrable(&a2));
        prop_assert!(is_integrable(&gauge_form(&a2, &m).unwrap()));
    }
}
