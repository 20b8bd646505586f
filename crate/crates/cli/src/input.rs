//! JSON ingestion of connection specs.
//!
//! ```text
//! { "fiber": "z",                       // optional, default "z"
//!   "base_vars": ["t"],
//!   "params": ["alpha"],                // optional symbolic constants
//!   "extension": {"gen": "w", "square": "a*b"},   // optional
//!   "rank": 1,
//!   "matrix": [["alpha*dz/z + a*dz + z*da"]],
//!   "divisor": [{"point": "0", "mult": 1}, {"point": "infinity", "mult": 2}] }  // optional
//! ```

use gmdet_core::connection::{ConnectionSpec, Divisor};
use gmdet_core::field::{parse_form, parse_scalar, Point, ScalarTower};
use gmdet_core::forms::AbsoluteForm1;
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    #[serde(default = "default_fiber")]
    pub fiber: String,
    pub base_vars: Vec<String>,
    #[serde(default)]
    pub params: Vec<String>,
    pub extension: Option<Extension>,
    pub rank: usize,
    pub matrix: Vec<Vec<String>>,
    pub divisor: Option<Vec<DivisorEntry>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Extension {
    pub gen: String,
    pub square: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DivisorEntry {
    pub point: String,
    pub mult: u32,
}

fn default_fiber() -> String {
    "z".into()
}

#[derive(Debug, thiserror::Error)]
pub enum InputError {
    #[error("schema: {0}")]
    Schema(#[from] serde_json::Error),
    #[error("{field}: {msg}")]
    Field { field: String, msg: String },
}

fn field_err(field: impl Into<String>, msg: impl ToString) -> InputError {
    InputError::Field { field: field.into(), msg: msg.to_string() }
}

impl SpecFile {
    pub fn parse(text: &str) -> Result<Self, InputError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn build(&self) -> Result<ConnectionSpec, InputError> {
        let base: Vec<&str> = self.base_vars.iter().map(String::as_str).collect();
        let params: Vec<&str> = self.params.iter().map(String::as_str).collect();
        let ext = self.extension.as_ref().map(|e| (e.gen.as_str(), e.square.as_str()));
        let tower = ScalarTower::new(&self.fiber, &base, &params, ext).map_err(|e| field_err("tower", e))?;
        let r = self.rank;
        if r == 0 || self.matrix.len() != r || self.matrix.iter().any(|row| row.len() != r) {
            return Err(field_err("matrix", format!("expected a {r}x{r} array")));
        }
        let entries = self
            .matrix
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, s)| parse_form(&tower, s).map_err(|e| field_err(format!("matrix[{i}][{j}]"), e)))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        let a = AbsoluteForm1::from_entries(&tower, &entries).map_err(|e| field_err("matrix", e))?;
        let divisor = match &self.divisor {
            None => None,
            Some(list) => {
                let mut d: Divisor = Vec::new();
                for (k, e) in list.iter().enumerate() {
                    let p = if e.point.trim() == "infinity" {
                        Point::Infinity
                    } else {
                        let v = parse_scalar(&tower, &e.point).map_err(|err| field_err(format!("divisor[{k}].point"), err))?;
                        Point::Finite(v.constant_value().ok_or_else(|| field_err(format!("divisor[{k}].point"), "not a rational constant"))?)
                    };
                    d.push((p, e.mult));
                }
                Some(d)
            }
        };
        ConnectionSpec::new(a, divisor).map_err(|e| field_err("spec", e))
    }
}

pub fn load_spec(text: &str) -> Result<ConnectionSpec, InputError> {
    SpecFile::parse(text)?.build()
}
