//! JSON filter files.
//!
//! ```json
//! {
//!   "name": "haar",
//!   "torus_dim": 1,
//!   "d": 1,
//!   "N": 2,
//!   "coeffs": [
//!     { "k": 0, "matrix": [[[0.7071067811865476, 0.0]]] },
//!     { "k": 1, "matrix": [[[0.7071067811865476, 0.0]]] }
//!   ],
//!   "harmonic": [
//!     { "name": "one", "coeffs": [{ "k": 0, "matrix": [[[1.0, 0.0]]] }] }
//!   ]
//! }
//! ```
//!
//! Each matrix is a `d×d` array of `[re, im]` pairs.

use std::collections::BTreeSet;

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use transop::{CMat, Filter64, MatTrigPoly64};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coefficient {
    pub k: i64,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedHarmonic {
    pub name: String,
    pub coeffs: Vec<Coefficient>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterFile {
    pub name: String,
    pub torus_dim: u32,
    pub d: usize,
    #[serde(rename = "N")]
    pub n: u64,
    pub coeffs: Vec<Coefficient>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub harmonic: Vec<NamedHarmonic>,
}

impl FilterFile {
    /// Parse and check the structural invariants.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let file: FilterFile =
            serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        file.check()?;
        Ok(file)
    }

    pub fn read(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Parse(msg) => CliError::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Pretty JSON with one coefficient per line.
    pub fn to_json(&self) -> String {
        let text = |v: &str| serde_json::to_string(v).expect("serializable");
        let list = |cs: &[Coefficient], indent: &str| {
            let lines: Vec<String> = cs
                .iter()
                .map(|c| format!("{indent}  {}", serde_json::to_string(c).expect("serializable")))
                .collect();
            format!("[\n{}\n{indent}]", lines.join(",\n"))
        };
        let mut s = format!(
            "{{\n  \"name\": {},\n  \"torus_dim\": {},\n  \"d\": {},\n  \"N\": {},\n  \"coeffs\": {}",
            text(&self.name),
            self.torus_dim,
            self.d,
            self.n,
            list(&self.coeffs, "  ")
        );
        if !self.harmonic.is_empty() {
            let hs: Vec<String> = self
                .harmonic
                .iter()
                .map(|h| {
                    format!(
                        "    {{\n      \"name\": {},\n      \"coeffs\": {}\n    }}",
                        text(&h.name),
                        list(&h.coeffs, "      ")
                    )
                })
                .collect();
            s += &format!(",\n  \"harmonic\": [\n{}\n  ]", hs.join(",\n"));
        }
        s += "\n}\n";
        s
    }

    fn check(&self) -> Result<(), CliError> {
        if self.torus_dim != 1 {
            return Err(CliError::Parse(format!(
                "field `torus_dim`: only 1 is supported, got {}",
                self.torus_dim
            )));
        }
        if self.d == 0 {
            return Err(CliError::Parse("field `d`: must be positive".into()));
        }
        if self.n < 2 {
            return Err(CliError::Parse(format!("field `N`: must be at least 2, got {}", self.n)));
        }
        if self.coeffs.is_empty() {
            return Err(CliError::Parse("field `coeffs`: at least one coefficient required".into()));
        }
        check_coeffs(&self.coeffs, self.d, "coeffs")?;
        let mut names = BTreeSet::new();
        for (i, h) in self.harmonic.iter().enumerate() {
            if !names.insert(h.name.as_str()) {
                return Err(CliError::Parse(format!(
                    "field `harmonic[{i}].name`: duplicate name {:?}",
                    h.name
                )));
            }
            check_coeffs(&h.coeffs, self.d, &format!("harmonic[{i}].coeffs"))?;
        }
        Ok(())
    }

    pub fn filter(&self) -> Result<Filter64, CliError> {
        Filter64::new(poly_from(&self.coeffs, self.d), self.n)
            .map_err(|e| CliError::Parse(format!("field `coeffs`: {e}")))
    }

    /// Named harmonic candidate; `identity` always resolves to the constant `I`.
    pub fn harmonic(&self, name: &str) -> Result<MatTrigPoly64, CliError> {
        if let Some(h) = self.harmonic.iter().find(|h| h.name == name) {
            return Ok(poly_from(&h.coeffs, self.d));
        }
        if name == "identity" {
            return Ok(MatTrigPoly64::identity(self.d));
        }
        let known: Vec<&str> = self.harmonic.iter().map(|h| h.name.as_str()).collect();
        Err(CliError::Usage(format!(
            "no harmonic named {name:?} (available: identity{}{})",
            if known.is_empty() { "" } else { ", " },
            known.join(", ")
        )))
    }

    pub fn from_filter(name: &str, m: &Filter64, harmonic: Vec<(String, MatTrigPoly64)>) -> Self {
        FilterFile {
            name: name.into(),
            torus_dim: 1,
            d: m.dim(),
            n: m.dilation(),
            coeffs: coeffs_of(m.poly()),
            harmonic: harmonic
                .into_iter()
                .map(|(name, p)| NamedHarmonic {
                    name,
                    coeffs: coeffs_of(&p),
                })
                .collect(),
        }
    }
}

fn check_coeffs(coeffs: &[Coefficient], d: usize, field: &str) -> Result<(), CliError> {
    let mut seen = BTreeSet::new();
    for (i, c) in coeffs.iter().enumerate() {
        if !seen.insert(c.k) {
            return Err(CliError::Parse(format!("field `{field}[{i}].k`: duplicate index {}", c.k)));
        }
        if c.matrix.len() != d {
            return Err(CliError::Parse(format!(
                "field `{field}[{i}].matrix`: expected {d} rows, found {}",
                c.matrix.len()
            )));
        }
        for (r, row) in c.matrix.iter().enumerate() {
            if row.len() != d {
                return Err(CliError::Parse(format!(
                    "field `{field}[{i}].matrix[{r}]`: expected {d} entries, found {}",
                    row.len()
                )));
            }
            if row.iter().flatten().any(|v| !v.is_finite()) {
                return Err(CliError::Parse(format!(
                    "field `{field}[{i}].matrix[{r}]`: non-finite entry"
                )));
            }
        }
    }
    Ok(())
}

fn poly_from(coeffs: &[Coefficient], d: usize) -> MatTrigPoly64 {
    let terms = coeffs.iter().map(|c| {
        (c.k, CMat::from_fn(d, d, |a, b| {
            let [re, im] = c.matrix[a][b];
            Complex::new(re, im)
        }))
    });
    MatTrigPoly64::from_terms(d, d, terms).expect("shapes checked")
}

pub fn coeffs_of(p: &MatTrigPoly64) -> Vec<Coefficient> {
    p.terms()
        .filter(|(_, c)| c.iter().any(|z| z.re != 0.0 || z.im != 0.0))
        .map(|(k, c)| Coefficient {
            k,
            matrix: crate::report::matrix_pairs(c),
        })
        .collect()
}
