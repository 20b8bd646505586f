//! Acceptance criteria 1–8. Runs as a plain binary (no libtest harness) so the
//! per-criterion PASS/FAIL lines always reach the output; exits nonzero if any
//! criterion fails or exceeds its time budget.

use std::sync::Arc;
use std::time::{Duration, Instant};

use gmdet_cli::fourier::{fourier_tower, random_instance, run_instance, FourierInstance, Regime};
use gmdet_cli::golden;
use gmdet_cli::kloosterman::pipeline;
use gmdet_cli::report::{Outcome, ScenarioReport};
use gmdet_core::connection::{gauge_transform, ConnectionSpec};
use gmdet_core::derham::h1_basis;
use gmdet_core::epsilon::{
    build_global_section, local_correction, local_correction_base, perturbed_section, rhs_form, Verdict,
};
use gmdet_core::field::{parse_form, parse_scalar, Matrix, Point, RationalFunction, ScalarTower};
use gmdet_core::forms::{dlog_reduce, exterior_d, residue, AbsoluteForm1, AbsoluteForm2, FactorHints, Mat};
use gmdet_core::periods::symbolic::stationary_phase_symbolic;
use gmdet_core::periods::{
    critical_sum_exact, critical_values, direct_determinant, periods, ratio_constancy, ExpPolynomial,
};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

const SEED: u64 = 0x6d64_6574;

// time budgets
const BUDGET_FOURIER: Duration = Duration::from_secs(10);
const BUDGET_RANK_ONE: Duration = Duration::from_secs(1);
const BUDGET_KLOOSTERMAN: Duration = Duration::from_secs(30);
const BUDGET_INDEPENDENCE: Duration = Duration::from_secs(20);
const BUDGET_STRUCTURAL: Duration = Duration::from_secs(60);
const BUDGET_PERIODS_M3: Duration = Duration::from_secs(10);
const BUDGET_PERIODS_M45: Duration = Duration::from_secs(120);
const BUDGET_SYMBOLIC: Duration = Duration::from_secs(30);

// numeric tolerances
const M3_QUAD_TOL: f64 = 1e-10;
const M3_REL_ERR: f64 = 1e-8;
const M45_QUAD_TOL: f64 = 1e-10;
const RATIO_CONSTANCY: f64 = 1e-6;
const DIRECT_QUAD_TOL: f64 = 1e-8;
const DIRECT_REL_ERR: f64 = 1e-5;
const CRITICAL_SUM_REL_ERR: f64 = 1e-12;

// instance sizes
const FOURIER_PER_REGIME: usize = 20;
const MAX_H1_DIM: usize = 9;
const INDEPENDENCE_INSTANCES: usize = 10;
const UNIT_RESCALINGS: usize = 5;
const STRUCTURAL_PER_REGIME: usize = 8;
const RANDOM_TWO_FORMS: usize = 50;
const RATIO_DRAWS: usize = 5;

struct Outcome_ {
    ok: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Outcome_ {
    Outcome_ { ok: true, detail: detail.into() }
}

fn fail(detail: impl Into<String>) -> Outcome_ {
    Outcome_ { ok: false, detail: detail.into() }
}

const REGIMES: [Regime; 3] = [Regime::AtMostOne, Regime::Two, Regime::AtLeastThree];

fn instances(rng: &mut ChaCha8Rng, per_regime: usize, max_dim: usize) -> Vec<FourierInstance> {
    let mut out = Vec::new();
    for regime in REGIMES {
        for i in 0..per_regime {
            out.push(random_instance(rng, regime, 1 + i % 3, max_dim));
        }
    }
    out
}

// 1. Fourier closed forms
fn fourier_closed_forms() -> Outcome_ {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let all = instances(&mut rng, FOURIER_PER_REGIME, MAX_H1_DIM);
    for (k, inst) in all.iter().enumerate() {
        let rep = run_instance(ScenarioReport::new("fourier", json!(null)), inst);
        if rep.body["closed_form_match"] != json!(true) || rep.outcome != Outcome::Verified {
            return fail(format!("instance {k} ({:?}, r = {}): {}", inst.regime(), inst.rank, rep.to_json(false)));
        }
    }
    pass(format!("{} instances, closed form exact and verified", all.len()))
}

// 2. rank-one building blocks and their product
fn rank_one_blocks() -> Outcome_ {
    let t = ScalarTower::new("t", &["a", "b"], &["alpha", "beta"], None).unwrap();
    let hints = FactorHints::default();
    let det = |src: &str| {
        let a = AbsoluteForm1::scalar(&t, &parse_form(&t, src).unwrap());
        let pres = h1_basis(&ConnectionSpec::new(a, None).unwrap()).unwrap();
        (pres.gm_trace().unwrap(), pres.h1_determinant(&hints).unwrap())
    };
    let class = |src: &str| dlog_reduce(&AbsoluteForm1::scalar(&t, &parse_form(&t, src).unwrap()), &hints).unwrap();
    let (tr1, d1) = det("alpha*dt/t + a*dt + t*da");
    let (tr2, d2) = det("beta*dt/t + b*dt + t*db");
    let prod = dlog_reduce(&tr1.add(&tr2), &hints).unwrap();
    let checks = [
        ("det H1(L1)", d1.same_class(&class("-alpha*da/a"))),
        ("det H1(L2)", d2.same_class(&class("-beta*db/b"))),
        ("det H2(L1 x L2)", prod.same_class(&class("-alpha*da/a - beta*db/b"))),
    ];
    match checks.iter().find(|c| !c.1) {
        Some((name, _)) => fail(format!("{name} mismatch: {d1}, {d2}, {prod}")),
        None => pass(format!("det H1(L1) = {d1}, det H1(L2) = {d2}, product = {prod}")),
    }
}

// 3. Kloosterman end to end
fn kloosterman() -> Outcome_ {
    let out = match pipeline(&BigRational::new(1.into(), 3.into()), &BigRational::new(1.into(), 5.into())) {
        Ok(o) => o,
        Err(e) => return fail(e),
    };
    if let Some(c) = out.checks.iter().find(|c| !c.ok) {
        return fail(format!("check `{}` failed: {}", c.name, c.detail));
    }
    if out.verdict != Some(Verdict::Verified) {
        return fail(format!("verdict {:?}", out.verdict));
    }
    if let Err(e) = reconcile_displays() {
        return fail(e);
    }
    pass(format!(
        "{} exact checks; final class {}; printed A_new/g0/g_inf reconciled (theta shift in [1][1])",
        out.checks.len(),
        out.body["final_class"].as_str().unwrap_or("?")
    ))
}

/// The commonly quoted A_new carries (α+β+2)θ in entry [1][1], which breaks
/// Tr A_new = Tr A + dlog det M; the computed matrix has (α+β+1)θ. The
/// printed g₀, g_∞ and local correction inherit that shift. Confirm each
/// printed value differs from the computed one by exactly the shift and that
/// the shift is invisible modulo dlog.
fn reconcile_displays() -> Result<(), String> {
    let t = ScalarTower::new("z", &["a", "b"], &["alpha", "beta"], Some(("w", "a*b"))).unwrap();
    let form = |s: &str| AbsoluteForm1::scalar(&t, &parse_form(&t, s).unwrap());
    let scalar = |s: &str| parse_scalar(&t, s).unwrap();
    let hints = FactorHints::default();
    let theta = form("da/a + db/b - 2*dz/z");

    let printed = form("(alpha + beta + 2)*(da/a + db/b - 2*dz/z) - (w/z)*(da/a + db/b - 2*dz/z) - (alpha + 1)*da/a - beta*db/b");
    let computed = form(golden::entry(golden::KLOOSTERMAN_A_NEW, 1, 1).unwrap());
    if printed.sub(&computed) != theta {
        return Err(format!("A_new[1][1]: printed − computed = {}", printed.sub(&computed).display()));
    }
    let tr_printed = form("(alpha + beta + 2)*(da/a + db/b - 2*dz/z) - 2*(alpha + 1)*da/a - 2*beta*db/b");
    let tr_class = form("(beta - alpha)*da/a + (alpha - beta)*db/b - 2*(alpha + beta)*dz/z");
    let tr_computed = form("(alpha + beta + 1)*(da/a + db/b - 2*dz/z) - 2*(alpha + 1)*da/a - 2*beta*db/b");
    let base = |f: &AbsoluteForm1| dlog_reduce(&f.without_fiber(), &hints).unwrap();
    if !base(&tr_printed).same_class(&base(&tr_class)) || !base(&tr_computed).same_class(&base(&tr_class)) {
        return Err("Tr A_new classes disagree".into());
    }

    let g0_printed = scalar("2*w - 2*(alpha + beta + 2)*z");
    let g0_computed = scalar(golden::entry(golden::KLOOSTERMAN_G0, 1, 1).unwrap());
    if &g0_printed - &g0_computed != scalar("-2*z") {
        return Err(format!("g0[1][1]: printed {g0_printed}, computed {g0_computed}"));
    }
    // printed with respect to dz/z, computed with respect to dlog(1/z) = −dz/z
    let printed_inf: Mat = Matrix::from_rows(vec![
        vec![scalar("0"), scalar("4*beta*(alpha + 1)")],
        vec![scalar("-1"), scalar("-2*(alpha + beta + 2)")],
    ]);
    for i in 0..2 {
        for j in 0..2 {
            let c = scalar(golden::entry(golden::KLOOSTERMAN_G_INF, i, j).unwrap());
            let shift = if (i, j) == (1, 1) { scalar("-2") } else { scalar("0") };
            if &(printed_inf.get(i, j) + &c) != &shift {
                return Err(format!("g_inf[{i}][{j}]: printed {}, computed {c}", printed_inf.get(i, j)));
            }
        }
    }
    let corr_printed = form("(alpha + beta + 2)*(da/a + db/b)");
    let corr_computed = form("(alpha + beta + 1)*(da/a + db/b)");
    let want = form("(alpha + beta)*(da/a + db/b)");
    for c in [&corr_printed, &corr_computed] {
        if !dlog_reduce(c, &hints).unwrap().same_class(&dlog_reduce(&want, &hints).unwrap()) {
            return Err(format!("correction {} not ≡ (alpha + beta)(da/a + db/b)", c.display()));
        }
    }
    Ok(())
}

fn small_rational(rng: &mut ChaCha8Rng, h: i64) -> BigRational {
    BigRational::new(BigInt::from(rng.gen_range(-h..=h)), BigInt::from(rng.gen_range(1..=3)))
}

/// A random invertible matrix over Q[t] of degree ≤ 1.
fn z_free_gauge(rng: &mut ChaCha8Rng, t: &Arc<ScalarTower>, r: usize) -> Mat {
    let tv = RationalFunction::named(t, "t");
    loop {
        let m: Mat = Matrix::from_fn(r, r, |_, _| {
            let c0 = RationalFunction::from_int(t, rng.gen_range(-2..=2));
            let c1 = RationalFunction::from_int(t, rng.gen_range(-1..=1));
            &c0 + &(&c1 * &tv)
        });
        if !m.det().is_zero() {
            return m;
        }
    }
}

/// Whether two forms agree in Ω¹_K/dlog(K^×)⊗Q. The sides need not be
/// reducible on their own (residues along irreducible factors may be
/// non-rational), so the difference is reduced.
fn same_class(a: &AbsoluteForm1, b: &AbsoluteForm1) -> Result<bool, String> {
    dlog_reduce(&a.sub(b), &FactorHints::default()).map(|c| c.is_zero()).map_err(|e| e.to_string())
}

// 4. independence of the section and gauge invariance
fn choice_independence() -> Outcome_ {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 4);
    let t = fourier_tower();
    let mut rescalings = 0;
    for k in 0..INDEPENDENCE_INSTANCES {
        let inst = random_instance(&mut rng, REGIMES[k % 3], 1 + k % 3, 6);
        let spec = inst.spec(&t);
        let section = build_global_section(&spec).unwrap();
        let rhs = rhs_form(&spec, &section).unwrap().0;
        let mut done = 0;
        let mut attempts = 0;
        while done < UNIT_RESCALINGS && attempts < 50 {
            attempts += 1;
            let c = small_rational(&mut rng, 4);
            let beta = small_rational(&mut rng, 9);
            let Ok(other) = perturbed_section(&spec, &section, &c, &beta) else { continue };
            let rhs2 = rhs_form(&spec, &other).unwrap().0;
            if same_class(&rhs2, &rhs) != Ok(true) {
                return fail(format!("instance {k}: rhs changed for c = {c}, β = {beta}: {}", rhs2.sub(&rhs).display()));
            }
            done += 1;
        }
        if done < UNIT_RESCALINGS {
            return fail(format!("instance {k}: only {done} admissible rescalings found"));
        }
        rescalings += done;

        let m = z_free_gauge(&mut rng, &t, inst.rank);
        let gauged = gauge_transform(&spec, &m).unwrap();
        let lhs = h1_basis(&spec).unwrap().gm_trace().unwrap();
        let lhs2 = h1_basis(&gauged).unwrap().gm_trace().unwrap();
        let rhs2 = rhs_form(&gauged, &build_global_section(&gauged).unwrap()).unwrap().0;
        if same_class(&lhs2, &lhs) != Ok(true) || same_class(&rhs2, &rhs) != Ok(true) {
            return fail(format!("instance {k}: gauge changed a side: {} / {}", lhs2.sub(&lhs).display(), rhs2.sub(&rhs).display()));
        }
    }
    pass(format!("{INDEPENDENCE_INSTANCES} instances, {rescalings} rescalings, {INDEPENDENCE_INSTANCES} gauges"))
}

/// f·dz∧dτ with f having poles of order ≤ 3 at up to three rational points.
fn random_two_form(rng: &mut ChaCha8Rng, t: &Arc<ScalarTower>) -> (AbsoluteForm2, Vec<Point>) {
    let z = RationalFunction::fiber_var(t);
    let params: Vec<RationalFunction> = ["t", "u"].iter().map(|n| RationalFunction::named(t, n)).collect();
    let mut w = AbsoluteForm2::zero(t, 1);
    let mut pts: Vec<BigRational> = Vec::new();
    for _ in 0..rng.gen_range(1..=3) {
        let c = small_rational(rng, 5);
        if !pts.contains(&c) {
            pts.push(c);
        }
    }
    for (i, _) in params.iter().enumerate() {
        let mut num = RationalFunction::zero(t);
        for k in 0..=rng.gen_range(0..=5) {
            let c = &(&RationalFunction::from_int(t, rng.gen_range(-3..=3)) + &(&params[0] * &RationalFunction::from_int(t, rng.gen_range(-2..=2))))
                + &(&params[1] * &RationalFunction::from_int(t, rng.gen_range(-1..=1)));
            num = &num + &(&c * &z.pow(k));
        }
        let mut den = RationalFunction::one(t);
        for p in &pts {
            den = &den * &(&z - &RationalFunction::from_rational(t, p.clone())).pow(rng.gen_range(1..=3));
        }
        w = w.add(&AbsoluteForm2::dz_wedge(t, i, &num * &den.inv().unwrap()));
    }
    let mut points: Vec<Point> = pts.into_iter().map(Point::Finite).collect();
    points.push(Point::Infinity);
    (w, points)
}

// 5. structural invariants
fn structural() -> Outcome_ {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 5);
    let t = fourier_tower();
    let mut specs: Vec<ConnectionSpec> = Vec::new();
    for inst in instances(&mut rng, STRUCTURAL_PER_REGIME, MAX_H1_DIM) {
        let spec = inst.spec(&t);
        let m = z_free_gauge(&mut rng, &t, inst.rank);
        specs.push(gauge_transform(&spec, &m).unwrap());
        specs.push(spec);
    }
    let mut poles = 0;
    for (k, spec) in specs.iter().enumerate() {
        if !spec.check_admissible().is_admissible() {
            continue;
        }
        let pres = h1_basis(spec).unwrap();
        let want = spec.rank() * (spec.degree() as usize - 2);
        if pres.dim() != want {
            return fail(format!("spec {k}: dim H1 = {} but r(deg D - 2) = {want}", pres.dim()));
        }
        for (p, _) in spec.divisor() {
            poles += 1;
            if !spec.commutators_regular(p) {
                return fail(format!("spec {k}: [eta, g] not regular at {p}"));
            }
            if local_correction(spec, p).unwrap() != local_correction_base(spec, p).unwrap() {
                return fail(format!("spec {k}: full and base-only corrections differ at {p}"));
            }
        }
        if !exterior_d(&AbsoluteForm1::d_of(spec.a().fiber(), &t)).is_zero() {
            return fail(format!("spec {k}: d∘d ≠ 0"));
        }
        if !exterior_d(&pres.gm_trace().unwrap()).is_zero() {
            return fail(format!("spec {k}: Tr GM not closed"));
        }
    }
    let t2 = ScalarTower::new("z", &["t", "u"], &[], None).unwrap();
    for k in 0..RANDOM_TWO_FORMS {
        let (w, points) = random_two_form(&mut rng, &t2);
        let mut total = AbsoluteForm1::zero(&t2, 1);
        for p in &points {
            total = total.add(&residue(&w, p).unwrap());
        }
        if !total.is_zero() {
            return fail(format!("2-form {k}: residues sum to {}", total.display()));
        }
    }
    pass(format!("{} connections, {poles} poles, {RANDOM_TWO_FORMS} random 2-forms", specs.len()))
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

// 6. periods at m = 3 against the Gaussian integral
fn periods_m3() -> Outcome_ {
    let sets = [
        [c(0.0, 0.0), c(1.0, 0.0)],
        [c(1.0, 0.0), c(2.0, 0.0)],
        [c(2.0, -1.0), c(3.0, 1.0)],
        [c(-3.0, 2.0), c(5.0, 0.0)],
        [c(0.0, 4.0), c(-2.0, 1.0)],
    ];
    let mut worst: f64 = 0.0;
    for s in sets {
        let f = ExpPolynomial::new(s.to_vec()).unwrap();
        let res = match periods(&f, M3_QUAD_TOL) {
            Ok(r) => r,
            Err(e) => return fail(format!("{s:?}: {e}")),
        };
        let (a1, a2) = (s[0], s[1]);
        let oracle = (-a1 * a1 / (a2 * 4.0)).exp().norm() * (std::f64::consts::PI / a2.norm()).sqrt();
        let err = (res.det.norm() - oracle).abs() / oracle;
        worst = worst.max(err);
        if err > M3_REL_ERR {
            return fail(format!("{s:?}: |det P| = {} vs oracle {oracle}", res.det.norm()));
        }
    }
    pass(format!("5 coefficient sets, worst relative error {worst:.1e}"))
}

// 7. ratio constancy at m = 4, 5 and the direct determinant at m = 4
fn periods_m45() -> Outcome_ {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 7);
    let bases = [vec![c(0.3, 0.0), c(-0.2, 0.1), c(1.0, 0.0)], vec![c(0.5, 0.0), c(0.0, 0.0), c(0.0, -0.3), c(1.0, 0.0)]];
    let mut devs = Vec::new();
    for b in &bases {
        let f = ExpPolynomial::new(b.clone()).unwrap();
        match ratio_constancy(&f, RATIO_DRAWS, M45_QUAD_TOL, &mut rng) {
            Ok(k) if k.max_relative_deviation <= RATIO_CONSTANCY => devs.push(k.max_relative_deviation),
            Ok(k) => return fail(format!("m = {}: ratio deviates by {:.2e}", f.m(), k.max_relative_deviation)),
            Err(e) => return fail(format!("m = {}: {e}", f.m())),
        }
    }
    let f = ExpPolynomial::new(bases[0].clone()).unwrap();
    let det = periods(&f, M45_QUAD_TOL).unwrap().det;
    let direct = match direct_determinant(&f, DIRECT_QUAD_TOL) {
        Ok(d) => d,
        Err(e) => return fail(format!("direct quadrature: {e}")),
    };
    let err = rel(direct, det);
    if err > DIRECT_REL_ERR {
        return fail(format!("direct {direct} vs determinant {det}"));
    }
    pass(format!("ratio deviation m=4 {:.1e}, m=5 {:.1e}; direct vs det {err:.1e}", devs[0], devs[1]))
}

// 8. symbolic identities behind the stationary-phase closed form
fn symbolic() -> Outcome_ {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 8);
    let mut ratios = Vec::new();
    for m in 3..=5 {
        let s = match stationary_phase_symbolic(m) {
            Ok(s) => s,
            Err(e) => return fail(format!("m = {m}: {e}")),
        };
        if !s.all_checks_pass() {
            return fail(format!(
                "m = {m}: newton {} jacobian {} critical sum {} unipotent {} reproduces {} hessian {:?}",
                s.bridge.newton_ok,
                s.bridge.jacobian_ok,
                s.f_at_b == s.critical_sum,
                s.change.is_unipotent(),
                s.change.reproduces(&s.g),
                s.hessian_ratio
            ));
        }
        match &s.hessian_ratio {
            Some(r) if !r.is_zero() => ratios.push(format!("m={m}: {r}")),
            r => return fail(format!("m = {m}: Hessian ratio {r:?}")),
        }
        for _ in 0..3 {
            let coeffs: Vec<Complex64> = (0..m - 1).map(|_| c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))).collect();
            let f = ExpPolynomial::new(coeffs).unwrap();
            let numeric: Complex64 = critical_values(&f).unwrap().into_iter().sum();
            let exact = critical_sum_exact(&f).unwrap();
            let scale = critical_values(&f).unwrap().iter().map(|v| v.norm()).sum::<f64>().max(1.0);
            if (numeric - exact).norm() / scale > CRITICAL_SUM_REL_ERR {
                return fail(format!("m = {m}: Σf(β) numeric {numeric} vs exact {exact}"));
            }
        }
    }
    pass(format!("m = 3..5 exact; Hessian ratios {}", ratios.join(", ")))
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Outcome_); 8] = [
        ("Fourier closed forms", BUDGET_FOURIER, fourier_closed_forms),
        ("rank-one building blocks", BUDGET_RANK_ONE, rank_one_blocks),
        ("Kloosterman end to end", BUDGET_KLOOSTERMAN, kloosterman),
        ("choice independence", BUDGET_INDEPENDENCE, choice_independence),
        ("structural invariants", BUDGET_STRUCTURAL, structural),
        ("periods m=3", BUDGET_PERIODS_M3, periods_m3),
        ("periods m=4,5", BUDGET_PERIODS_M45, periods_m45),
        ("symbolic stationary phase", BUDGET_SYMBOLIC, symbolic),
    ];
    let mut failed = 0;
    for (n, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let took = start.elapsed();
        let ok = out.ok && took <= *budget;
        if !ok {
            failed += 1;
        }
        let over = if took > *budget { " OVER BUDGET" } else { "" };
        println!(
            "criterion {} {:<28} {}  {:>7.2}s / {:>4}s{over}  {}",
            n + 1,
            name,
            if ok { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            budget.as_secs(),
            out.detail
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all 8 criteria passed");
}
