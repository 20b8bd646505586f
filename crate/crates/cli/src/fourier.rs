//! The Fourier-transform family ∇ = Ψ + dz/t − z·dt/t² with
//! Ψ = Σ_α Σ_i g^α_i dz/(z−α)^i + (g^∞_2 + … + g^∞_{m∞} z^{m∞−2}) dz,
//! its closed-form Gauss–Manin determinant, and random instances.

use std::sync::Arc;

use gmdet_core::connection::ConnectionSpec;
use gmdet_core::derham::h1_basis;
use gmdet_core::epsilon::verify_with_section;
use gmdet_core::epsilon::build_global_section;
use gmdet_core::field::{Matrix, RationalFunction, ScalarTower};
use gmdet_core::forms::{AbsoluteForm1, FactorHints, Mat};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;
use serde::Deserialize;
use serde_json::json;

use crate::report::{Outcome, ScenarioReport};

pub type QMat = Matrix<BigRational>;

/// Pole order regime of Ψ at ∞.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    AtMostOne,
    Two,
    AtLeastThree,
}

#[derive(Clone, Debug)]
pub struct FourierInstance {
    pub rank: usize,
    /// (α, [g^α_1, …, g^α_{m_α}])
    pub poles: Vec<(BigRational, Vec<QMat>)>,
    /// [g^∞_2, …, g^∞_{m∞}]; empty when Ψ has at most a simple pole at ∞
    pub infinity: Vec<QMat>,
}

fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn lift(t: &Arc<ScalarTower>, m: &QMat) -> Mat {
    Matrix::from_fn(m.rows(), m.cols(), |i, j| RationalFunction::from_rational(t, m.get(i, j).clone()))
}

pub fn fourier_tower() -> Arc<ScalarTower> {
    ScalarTower::new("z", &["t"], &[], None).expect("valid tower")
}

impl FourierInstance {
    pub fn regime(&self) -> Regime {
        match self.infinity.len() {
            0 => Regime::AtMostOne,
            1 => Regime::Two,
            _ => Regime::AtLeastThree,
        }
    }

    pub fn m_infinity(&self) -> usize {
        self.infinity.len() + 1
    }

    pub fn connection(&self, t: &Arc<ScalarTower>) -> AbsoluteForm1 {
        let r = self.rank;
        let z = RationalFunction::fiber_var(t);
        let tv = RationalFunction::named(t, "t");
        let zero = RationalFunction::zero(t);
        let mut psi = Matrix::zeros_like(r, r, &zero);
        for (a, gs) in &self.poles {
            let lin = &z - &RationalFunction::from_rational(t, a.clone());
            for (i, g) in gs.iter().enumerate() {
                psi = psi.add(&lift(t, g).scale(&lin.pow(-(i as i32 + 1))));
            }
        }
        for (k, g) in self.infinity.iter().enumerate() {
            psi = psi.add(&lift(t, g).scale(&z.pow(k as i32)));
        }
        let id = Matrix::identity_like(r, &zero);
        let fiber = psi.add(&id.scale(&tv.inv().expect("t ≠ 0")));
        let dt = id.scale(&-&(&z * &tv.pow(-2)));
        AbsoluteForm1::new(t, fiber, vec![dt]).expect("shapes agree")
    }

    pub fn spec(&self, t: &Arc<ScalarTower>) -> ConnectionSpec {
        ConnectionSpec::new(self.connection(t), None).expect("poles of Ψ lie on D")
    }

    /// The closed form of Tr ∇_GM: Σ r·m_α·α·dt/t² − Tr Σ g^α_1·dt/t when Ψ
    /// has at most a simple pole at ∞; otherwise with the nonlinear
    /// (g^∞_2 + t⁻¹)⁻¹ or (g^∞_{m∞})⁻¹ corrections. For m∞ = 3 the matrix
    /// g^∞_{m∞−1} = g^∞_2 sits next to the kernel's t⁻¹ and is shifted by it.
    pub fn closed_form(&self, t: &Arc<ScalarTower>) -> AbsoluteForm1 {
        let r = self.rank;
        let zero = RationalFunction::zero(t);
        let tv = RationalFunction::named(t, "t");
        let tinv = tv.inv().expect("t ≠ 0");
        let id = Matrix::identity_like(r, &zero);
        let mut lin = BigRational::zero();
        for (a, gs) in &self.poles {
            lin += a * q((r * gs.len()) as i64);
        }
        let lin = RationalFunction::from_rational(t, lin);
        let t2 = tv.pow(-2);
        let coeff = match self.regime() {
            Regime::AtMostOne => {
                let g1 = self.poles.iter().fold(BigRational::zero(), |acc, (_, gs)| acc + gs[0].trace());
                &(&lin * &t2) - &(&RationalFunction::from_rational(t, g1) * &tinv)
            }
            Regime::Two => {
                let h = lift(t, &self.infinity[0]).add(&id.scale(&tinv)).inverse().expect("invertible over Q(t)");
                let mut s = zero.clone();
                for (_, gs) in &self.poles {
                    s = &s + &h.mul(&lift(t, &gs[0])).trace();
                }
                &(&lin - &s) * &t2
            }
            Regime::AtLeastThree => {
                let m = self.infinity.len();
                let top = lift(t, &self.infinity[m - 1]).inverse().expect("leading g^∞ invertible");
                let mut next = lift(t, &self.infinity[m - 2]);
                if m == 2 {
                    next = next.add(&id.scale(&tinv));
                }
                &(&lin - &top.mul(&next).trace()) * &t2
            }
        };
        AbsoluteForm1::scalar(t, &[zero, coeff])
    }
}

fn rand_mat(rng: &mut impl Rng, r: usize, invertible: bool) -> QMat {
    loop {
        let m = Matrix::from_fn(r, r, |_, _| q(rng.gen_range(-3..=3)));
        if !invertible || !m.det().is_zero() {
            return m;
        }
    }
}

/// A random admissible instance; `max_dim` caps r·Σm_α to bound the size of H¹.
pub fn random_instance(rng: &mut impl Rng, regime: Regime, rank: usize, max_dim: usize) -> FourierInstance {
    let mut pts: Vec<BigRational> = Vec::new();
    let npoles = rng.gen_range(1..=3usize);
    let mut poles = Vec::new();
    let mut budget = (max_dim / rank).max(1);
    for _ in 0..npoles {
        if budget == 0 {
            break;
        }
        let a = loop {
            let a = BigRational::new(BigInt::from(rng.gen_range(-6..=6)), BigInt::from(rng.gen_range(1..=2)));
            if !pts.contains(&a) {
                break a;
            }
        };
        pts.push(a.clone());
        let m = rng.gen_range(1..=3usize).min(budget);
        budget -= m;
        let gs: Vec<QMat> = (1..=m).map(|i| rand_mat(rng, rank, i == m)).collect();
        poles.push((a, gs));
    }
    let infinity = match regime {
        Regime::AtMostOne => Vec::new(),
        Regime::Two => vec![rand_mat(rng, rank, false)],
        Regime::AtLeastThree => {
            let m = rng.gen_range(3..=4usize);
            (2..=m).map(|k| rand_mat(rng, rank, k == m)).collect()
        }
    };
    FourierInstance { rank, poles, infinity }
}

fn mat_json(m: &QMat) -> serde_json::Value {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| m.get(i, j).to_string()).collect::<Vec<_>>()).collect()
}

impl FourierInstance {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "rank": self.rank,
            "poles": self.poles.iter().map(|(a, gs)| json!({"point": a.to_string(), "g": gs.iter().map(mat_json).collect::<Vec<_>>()})).collect::<Vec<_>>(),
            "infinity": self.infinity.iter().map(mat_json).collect::<Vec<_>>(),
        })
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PsiFile {
    rank: usize,
    poles: Vec<PsiPole>,
    #[serde(default)]
    infinity: Vec<Vec<Vec<String>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PsiPole {
    point: String,
    g: Vec<Vec<Vec<String>>>,
}

fn parse_q(s: &str, field: &str) -> Result<BigRational, String> {
    s.trim().parse::<BigRational>().map_err(|_| format!("{field}: `{s}` is not a rational number"))
}

fn parse_mat(m: &[Vec<String>], r: usize, field: &str) -> Result<QMat, String> {
    if m.len() != r || m.iter().any(|row| row.len() != r) {
        return Err(format!("{field}: expected a {r}x{r} matrix"));
    }
    let rows = m
        .iter()
        .enumerate()
        .map(|(i, row)| row.iter().enumerate().map(|(j, s)| parse_q(s, &format!("{field}[{i}][{j}]"))).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Matrix::from_rows(rows))
}

impl FourierInstance {
    pub fn from_json(text: &str) -> Result<Self, String> {
        let f: PsiFile = serde_json::from_str(text).map_err(|e| format!("schema: {e}"))?;
        if f.rank == 0 {
            return Err("rank: must be positive".into());
        }
        let mut poles = Vec::new();
        for (k, p) in f.poles.iter().enumerate() {
            let a = parse_q(&p.point, &format!("poles[{k}].point"))?;
            if poles.iter().any(|(b, _): &(BigRational, Vec<QMat>)| *b == a) {
                return Err(format!("poles[{k}].point: repeated point"));
            }
            if p.g.is_empty() {
                return Err(format!("poles[{k}].g: at least one matrix required"));
            }
            let gs = p.g.iter().enumerate().map(|(i, m)| parse_mat(m, f.rank, &format!("poles[{k}].g[{i}]"))).collect::<Result<Vec<_>, _>>()?;
            poles.push((a, gs));
        }
        let infinity = f.infinity.iter().enumerate().map(|(i, m)| parse_mat(m, f.rank, &format!("infinity[{i}]"))).collect::<Result<Vec<_>, _>>()?;
        Ok(FourierInstance { rank: f.rank, poles, infinity })
    }

    /// Leading matrices that must be invertible (g^α_{m_α}, and g^∞_{m∞} when m∞ ≥ 3).
    pub fn admissibility_error(&self) -> Option<String> {
        for (a, gs) in &self.poles {
            if gs.last().unwrap().det().is_zero() {
                return Some(format!("not_admissible: g^{a}_{} is singular", gs.len()));
            }
        }
        if self.regime() == Regime::AtLeastThree && self.infinity.last().unwrap().det().is_zero() {
            return Some("not_admissible: leading g at infinity is singular".into());
        }
        None
    }
}

pub fn cmd_fourier(text: &str) -> ScenarioReport {
    let report = ScenarioReport::new("fourier", serde_json::from_str(text).unwrap_or(serde_json::Value::Null));
    let inst = match FourierInstance::from_json(text) {
        Ok(i) => i,
        Err(e) => return report.fail_input(e),
    };
    run_instance(report, &inst)
}

pub fn run_instance(mut report: ScenarioReport, inst: &FourierInstance) -> ScenarioReport {
    if let Some(e) = inst.admissibility_error() {
        return report.fail_input(e);
    }
    let t = fourier_tower();
    let spec = inst.spec(&t);
    let hints = FactorHints::default();
    let pres = match report.timed("h1_basis", || h1_basis(&spec)) {
        Ok(p) => p,
        Err(e) => return report.fail_input(e),
    };
    let lhs = match report.timed("gauss_manin", || pres.gm_trace()) {
        Ok(tr) => tr.neg(),
        Err(e) => return report.fail_input(e),
    };
    let closed = inst.closed_form(&t);
    let closed_match = lhs == closed;
    let section = match build_global_section(&spec) {
        Ok(s) => s,
        Err(e) => return report.fail_input(e),
    };
    let rep = match report.timed("verify", || verify_with_section(&spec, &section, &hints)) {
        Ok(r) => r,
        Err(e) => return report.fail_input(e),
    };
    report.outcome = if closed_match { Outcome::from(&rep.verdict) } else { Outcome::Refuted };
    let mut body = rep.to_json();
    body["h1_dim"] = json!(pres.dim());
    body["gm_determinant_form"] = json!(lhs.display());
    body["closed_form"] = json!(closed.display());
    body["closed_form_match"] = json!(closed_match);
    report.body = body;
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn one_pole_rank_one() {
        let inst = FourierInstance { rank: 1, poles: vec![(BigRational::one(), vec![Matrix::from_rows(vec![vec![q(3)]])])], infinity: vec![] };
        let t = fourier_tower();
        let expected = AbsoluteForm1::scalar(&t, &gmdet_core::field::parse_form(&t, "dt/t^2 - 3*dt/t").unwrap());
        assert_eq!(inst.closed_form(&t), expected);
        let rep = run_instance(ScenarioReport::new("fourier", json!(null)), &inst);
        assert_eq!(rep.outcome, Outcome::Verified, "{}", rep.to_json(false));
    }
}
