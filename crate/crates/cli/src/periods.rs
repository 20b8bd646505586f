//! `periods`: the period matrix of exp(f) on the ray chains, its
//! stationary-phase closed form, ratio constancy over random draws, and the
//! exact symmetric-function checks.

use gmdet_core::periods::symbolic::stationary_phase_symbolic;
use gmdet_core::periods::{
    critical_sum_exact, direct_determinant, periods, ratio_constancy, rational_guess, rays, ExpPolynomial, PeriodResult, PeriodsError,
};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::report::{Outcome, ScenarioReport};

pub const CONSTANCY_TOL: f64 = 1e-6;
pub const DIRECT_TOL: f64 = 1e-5;
pub const CRITICAL_SUM_TOL: f64 = 1e-12;
/// Largest m for which the symbolic checks run.
pub const SYMBOLIC_MAX_M: usize = 6;

/// Parse `re`, `re+im*i`, `re-imi`, `im*i`, `i`, `-i`.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("bad complex literal `{s}` (expected re+im*i)");
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i') else {
        return t.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    let body = body.strip_suffix('*').unwrap_or(body);
    // split at the last sign that is not an exponent sign or the leading sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len()).rev().find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        x => x.parse::<f64>().map_err(|_| bad())?,
    };
    let re = re.parse::<f64>().map_err(|_| bad())?;
    Ok(Complex64::new(re, im))
}

pub fn parse_coeffs(list: &str) -> Result<Vec<Complex64>, String> {
    list.split(',').map(parse_complex).collect()
}

fn cjson(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

fn guess(x: f64) -> Value {
    match rational_guess(x, 64) {
        Some((p, q)) => json!(format!("likely rational {p}/{q}")),
        None => Value::Null,
    }
}

pub struct PeriodsArgs {
    pub coeffs: Vec<Complex64>,
    pub tol: f64,
    pub draws: usize,
    pub seed: u64,
}

fn outcome_of(e: &PeriodsError) -> Outcome {
    match e {
        PeriodsError::Quad(q) => Outcome::CannotCertify(q.to_string()),
        other => Outcome::InputError(other.to_string()),
    }
}

pub fn cmd_periods(args: &PeriodsArgs) -> ScenarioReport {
    let inputs = json!({
        "coeffs": args.coeffs.iter().map(|c| cjson(*c)).collect::<Vec<_>>(),
        "tol": args.tol, "draws": args.draws, "seed": args.seed,
    });
    let mut report = ScenarioReport::new("periods", inputs);
    if !(args.tol > 0.0) {
        return report.fail_input(PeriodsError::BadTolerance);
    }
    let f = match ExpPolynomial::new(args.coeffs.clone()) {
        Ok(f) => f,
        Err(e) => return report.fail_input(e),
    };
    let res: PeriodResult = match report.timed("period_matrix", || periods(&f, args.tol)) {
        Ok(r) => r,
        Err(e) => {
            report.outcome = outcome_of(&e);
            return report;
        }
    };
    let mut ok = true;
    let mut body = json!({
        "m": res.m,
        "rays": rays(&f),
        "critical_values": res.critical_values.iter().map(|c| cjson(*c)).collect::<Vec<_>>(),
        "period_matrix": res.matrix.iter().map(|r| r.iter().map(|c| cjson(*c)).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "entry_errors": res.errors,
        "det": cjson(res.det),
        "closed_form": cjson(res.closed_form),
        "ratio": cjson(res.ratio),
        "ratio_guess": { "re": guess(res.ratio.re), "im": guess(res.ratio.im) },
    });
    let errors_ok = res.errors.iter().flatten().all(|&e| e <= args.tol);
    body["entry_errors_below_tol"] = json!(errors_ok);
    ok &= errors_ok;

    // Σ f(β): roots versus the exact trace on Q(i)[z]/(f′)
    let numeric: Complex64 = res.critical_values.iter().sum();
    match critical_sum_exact(&f) {
        Ok(exact) => {
            let diff = (exact - numeric).norm() / exact.norm().max(1.0);
            let pass = diff <= CRITICAL_SUM_TOL;
            ok &= pass;
            body["critical_sum"] = json!({ "numeric": cjson(numeric), "exact": cjson(exact), "relative_difference": diff, "pass": pass });
        }
        Err(e) => {
            ok = false;
            body["critical_sum"] = json!({ "error": e.to_string() });
        }
    }

    if f.m() <= 4 {
        match report.timed("direct_determinant", || direct_determinant(&f, args.tol)) {
            Ok(d) => {
                let rel = (d - res.det).norm() / res.det.norm();
                let pass = rel <= DIRECT_TOL;
                ok &= pass;
                body["direct_determinant"] = json!({ "value": cjson(d), "relative_difference": rel, "pass": pass });
            }
            Err(e) => body["direct_determinant"] = json!({ "error": e.to_string() }),
        }
    }

    if args.draws > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        match report.timed("constancy", || ratio_constancy(&f, args.draws, args.tol, &mut rng)) {
            Ok(c) => {
                let pass = c.max_relative_deviation <= CONSTANCY_TOL;
                ok &= pass;
                body["constancy"] = json!({
                    "draws": c.draws.iter().map(|(g, q)| json!({
                        "coeffs": g.coeffs().iter().map(|x| cjson(*x)).collect::<Vec<_>>(),
                        "ratio": cjson(*q),
                    })).collect::<Vec<_>>(),
                    "max_relative_deviation": c.max_relative_deviation,
                    "tolerance": CONSTANCY_TOL,
                    "pass": pass,
                });
            }
            Err(e) => {
                report.outcome = outcome_of(&e);
                report.body = body;
                return report;
            }
        }
    }

    if f.m() <= SYMBOLIC_MAX_M {
        match report.timed("symbolic", || stationary_phase_symbolic(f.m())) {
            Ok(sp) => {
                let pass = sp.all_checks_pass();
                ok &= pass;
                let names: Vec<String> = (1..=f.m() - 2).map(|i| format!("t{i}")).collect();
                let show = |p: &gmdet_core::periods::symbolic::APoly| p.format_with(&names, |c| c.to_string());
                body["symbolic"] = json!({
                    "newton_identities": sp.bridge.newton_ok,
                    "jacobian_vandermonde": sp.bridge.jacobian_ok,
                    "jacobian_sign": sp.bridge.jacobian_sign,
                    "critical_point_value_matches_trace": sp.f_at_b == sp.critical_sum,
                    "G": show(&sp.g),
                    "Q": show(&sp.change.q),
                    "substitutions": sp.change.b.iter().map(show).collect::<Vec<_>>(),
                    "unit_jacobian": sp.change.is_unipotent(),
                    "hessian_ratio": sp.hessian_ratio.as_ref().map(|r| r.to_string()),
                    "pass": pass,
                });
            }
            Err(e) => {
                ok = false;
                body["symbolic"] = json!({ "error": e.to_string() });
            }
        }
    }

    report.outcome = if ok { Outcome::Verified } else { Outcome::Refuted };
    report.body = body;
    report
}

/// Plain-text summary of a periods report.
pub fn table(report: &ScenarioReport) -> String {
    let b = &report.body;
    let c = |v: &Value| format!("{:+.12e} {:+.12e}i", v["re"].as_f64().unwrap_or(f64::NAN), v["im"].as_f64().unwrap_or(f64::NAN));
    let mut out = String::new();
    if let Some(rows) = b["period_matrix"].as_array() {
        out.push_str(&format!("m = {}\n", b["m"]));
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row.as_array().unwrap().iter().enumerate() {
                out.push_str(&format!("P[{}][{}] = {}   (err {:.1e})\n", i + 1, j + 1, c(v), b["entry_errors"][i][j].as_f64().unwrap_or(f64::NAN)));
            }
        }
        out.push_str(&format!("det P       = {}\n", c(&b["det"])));
        out.push_str(&format!("closed form = {}\n", c(&b["closed_form"])));
        out.push_str(&format!("ratio q     = {}\n", c(&b["ratio"])));
        if let Some(d) = b["constancy"]["max_relative_deviation"].as_f64() {
            out.push_str(&format!("max relative deviation of q over draws = {d:.2e}\n"));
        }
    }
    out.push_str(&format!("outcome: {}\n", report.outcome.label()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("1.5").unwrap(), Complex64::new(1.5, 0.0));
        assert_eq!(parse_complex("0.3+1.2*i").unwrap(), Complex64::new(0.3, 1.2));
        assert_eq!(parse_complex("0.3-1.2i").unwrap(), Complex64::new(0.3, -1.2));
        assert_eq!(parse_complex("-i").unwrap(), Complex64::new(0.0, -1.0));
        assert_eq!(parse_complex("2*i").unwrap(), Complex64::new(0.0, 2.0));
        assert_eq!(parse_complex("1e-3+2e+1i").unwrap(), Complex64::new(1e-3, 20.0));
        assert!(parse_complex("x").is_err());
    }

    #[test]
    fn quadratic_phase_rejects_zero_leading() {
        let r = cmd_periods(&PeriodsArgs { coeffs: vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)], tol: 1e-8, draws: 0, seed: 0 });
        assert_eq!(r.outcome.exit_code(), 1);
    }
}
