//! Expected matrices stored as text, one entry per line: `i j: expression`.

use std::sync::Arc;

use gmdet_core::field::{parse_form, parse_scalar, FieldError, RationalFunction, ScalarTower};
use gmdet_core::forms::{AbsoluteForm1, Mat};

pub const KLOOSTERMAN_STAGE1: &str = include_str!("../golden/kloosterman_stage1.txt");
pub const KLOOSTERMAN_A_NEW: &str = include_str!("../golden/kloosterman_a_new.txt");
pub const KLOOSTERMAN_G0: &str = include_str!("../golden/kloosterman_g0.txt");
pub const KLOOSTERMAN_G_INF: &str = include_str!("../golden/kloosterman_g_inf.txt");
pub const KLOOSTERMAN_ETA0: &str = include_str!("../golden/kloosterman_eta0.txt");

fn entries(text: &str) -> Vec<(usize, usize, &str)> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            let (idx, expr) = l.split_once(':').expect("golden line has `i j: expr`");
            let mut it = idx.split_whitespace().map(|x| x.parse::<usize>().expect("index"));
            (it.next().unwrap(), it.next().unwrap(), expr.trim())
        })
        .collect()
}

/// The expression stored for entry (i, j).
pub fn entry(text: &str, i: usize, j: usize) -> Option<&str> {
    entries(text).into_iter().find(|e| e.0 == i && e.1 == j).map(|e| e.2)
}

/// One line per mismatching entry; empty when everything agrees.
pub type Diff = Vec<String>;

pub fn diff_forms(tower: &Arc<ScalarTower>, text: &str, got: &AbsoluteForm1) -> Result<Diff, FieldError> {
    let mut out = Vec::new();
    for (i, j, expr) in entries(text) {
        let want = parse_form(tower, expr)?;
        let have = got.entry(i, j);
        if have.scalar_coeffs() != want {
            let want_form = AbsoluteForm1::scalar(tower, &want);
            out.push(format!("[{i}][{j}] expected {} got {}", want_form.display(), have.display()));
        }
    }
    Ok(out)
}

pub fn diff_scalars(tower: &Arc<ScalarTower>, text: &str, got: &Mat) -> Result<Diff, FieldError> {
    let mut out = Vec::new();
    for (i, j, expr) in entries(text) {
        let want: RationalFunction = parse_scalar(tower, expr)?;
        let have = got.get(i, j);
        if *have != want {
            out.push(format!("[{i}][{j}] expected {want} got {have}"));
        }
    }
    Ok(out)
}
