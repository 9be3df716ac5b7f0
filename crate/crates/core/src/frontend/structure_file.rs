//! JSON structure files.
//!
//! ```json
//! {
//!   "carrier": ["0", "1/2", "1"],
//!   "leq": [["0", "1/2"], ["1/2", "1"]],
//!   "neg_op": [2, 2, 0],
//!   "N": {"0": ["1"], "1/2": ["1"], "1": ["0", "1/2", "1"]}
//! }
//! ```
//!
//! `leq` pairs may use labels or indices. Instead of `leq`, explicit `meet`
//! and `join` index tables may be given. A missing `imp` is computed as the
//! residuum; a missing `N` means the saturated family.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fidel::{builtin, FidelError, FidelStructure};
use crate::lattice::{
    lattice_from_order, order_from_pairs, residuum_from_order, validate_algebra, Algebra, AlgebraError, AlgebraTables,
    ValidationReport,
};

#[derive(Debug, Error)]
pub enum StructureFileError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: line {line}, column {column}: {message}")]
    Json {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: unknown element `{label}` in {field}")]
    UnknownLabel {
        path: String,
        field: &'static str,
        label: String,
    },
    #[error("{path}: {source}")]
    Algebra { path: String, source: AlgebraError },
    #[error("{path}: {source}")]
    Family { path: String, source: FidelError },
    #[error("{path}: needs either `leq` or both `meet` and `join`")]
    NoOrder { path: String },
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(untagged)]
pub enum ElementRef {
    Index(usize),
    Label(String),
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct StructureFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub carrier: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leq: Option<Vec<(ElementRef, ElementRef)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meet: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub join: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub imp: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub neg_op: Option<Vec<usize>>,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub family: Option<BTreeMap<String, Vec<String>>>,
}

/// A parsed file, before the tables are required to form an algebra.
pub struct LoadedFile {
    pub path: String,
    pub file: StructureFile,
}

impl LoadedFile {
    pub fn parse(path: &str, text: &str) -> Result<Self, StructureFileError> {
        let file = serde_json::from_str(text).map_err(|e| StructureFileError::Json {
            path: path.to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        Ok(LoadedFile {
            path: path.to_string(),
            file,
        })
    }

    fn resolve(&self, field: &'static str, r: &ElementRef) -> Result<usize, StructureFileError> {
        let unknown = |label: String| StructureFileError::UnknownLabel {
            path: self.path.clone(),
            field,
            label,
        };
        match r {
            ElementRef::Index(i) if *i < self.file.carrier.len() => Ok(*i),
            ElementRef::Index(i) => Err(unknown(i.to_string())),
            ElementRef::Label(l) => self
                .file
                .carrier
                .iter()
                .position(|c| c == l)
                .ok_or_else(|| unknown(l.clone())),
        }
    }

    /// The candidate tables, with order, lattice operations and residuum
    /// filled in from whatever the file provides.
    pub fn tables(&self) -> Result<AlgebraTables, StructureFileError> {
        let alg_err = |source| StructureFileError::Algebra {
            path: self.path.clone(),
            source,
        };
        let f = &self.file;
        let n = f.carrier.len();
        let (leq, meet, join) = match (&f.leq, &f.meet, &f.join) {
            (Some(pairs), _, _) => {
                let pairs = pairs
                    .iter()
                    .map(|(a, b)| Ok((self.resolve("leq", a)?, self.resolve("leq", b)?)))
                    .collect::<Result<Vec<_>, _>>()?;
                let leq = order_from_pairs(n, &pairs).map_err(alg_err)?;
                let (meet, join) = match (&f.meet, &f.join) {
                    (Some(m), Some(j)) => (m.clone(), j.clone()),
                    _ => lattice_from_order(&leq).map_err(alg_err)?,
                };
                (Some(leq), meet, join)
            }
            (None, Some(m), Some(j)) => (None, m.clone(), j.clone()),
            _ => {
                return Err(StructureFileError::NoOrder {
                    path: self.path.clone(),
                })
            }
        };
        let imp = match &f.imp {
            Some(imp) => imp.clone(),
            None => {
                let order = match &leq {
                    Some(l) => l.clone(),
                    None => order_from_meet(&meet),
                };
                residuum_from_order(&order, &meet).map_err(alg_err)?
            }
        };
        Ok(AlgebraTables {
            carrier: f.carrier.clone(),
            leq,
            meet,
            join,
            imp,
            neg_op: f.neg_op.clone(),
        })
    }

    /// Law violations of the candidate tables, without rejecting them.
    pub fn check_algebra(&self) -> Result<ValidationReport, StructureFileError> {
        let tables = self.tables()?;
        validate_algebra(&tables).map_err(|source| StructureFileError::Algebra {
            path: self.path.clone(),
            source,
        })
    }

    pub fn algebra(&self) -> Result<Arc<Algebra>, StructureFileError> {
        let tables = self.tables()?;
        Algebra::from_tables(tables)
            .map(Arc::new)
            .map_err(|source| StructureFileError::Algebra {
                path: self.path.clone(),
                source,
            })
    }

    /// The structure; it may still violate the Fidel conditions.
    pub fn structure(&self) -> Result<FidelStructure, StructureFileError> {
        let algebra = self.algebra()?;
        match &self.file.family {
            None => Ok(FidelStructure::saturate(algebra)),
            Some(map) => {
                let owned: Vec<(&str, Vec<&str>)> = map
                    .iter()
                    .map(|(x, ys)| (x.as_str(), ys.iter().map(String::as_str).collect()))
                    .collect();
                let borrowed: Vec<(&str, &[&str])> = owned.iter().map(|(x, ys)| (*x, ys.as_slice())).collect();
                FidelStructure::from_labels(algebra, &borrowed).map_err(|source| StructureFileError::Family {
                    path: self.path.clone(),
                    source,
                })
            }
        }
    }
}

fn order_from_meet(meet: &[Vec<usize>]) -> Vec<Vec<bool>> {
    let n = meet.len();
    (0..n)
        .map(|a| (0..n).map(|b| meet.get(a).and_then(|r| r.get(b)) == Some(&a)).collect())
        .collect()
}

/// Reads a structure file, or a built-in structure by name when no such file exists.
pub fn load_file(path: &str) -> Result<LoadedFile, StructureFileError> {
    if !Path::new(path).exists() {
        if let Some(s) = builtin::by_name(path) {
            return Ok(LoadedFile {
                path: path.to_string(),
                file: to_file(&s),
            });
        }
    }
    let text = std::fs::read_to_string(path).map_err(|source| StructureFileError::Io {
        path: path.to_string(),
        source,
    })?;
    LoadedFile::parse(path, &text)
}

pub fn load_structure(path: &str) -> Result<FidelStructure, StructureFileError> {
    load_file(path)?.structure()
}

/// The file form of a structure, with explicit tables and family.
pub fn to_file(s: &FidelStructure) -> StructureFile {
    let alg = s.algebra();
    let t = alg.to_tables();
    let mut pairs = Vec::new();
    for a in alg.elements() {
        for b in alg.elements() {
            if a != b && alg.leq(a, b) {
                pairs.push((
                    ElementRef::Label(alg.label(a).into()),
                    ElementRef::Label(alg.label(b).into()),
                ));
            }
        }
    }
    let family = alg
        .elements()
        .map(|x| {
            (
                alg.label(x).to_string(),
                alg.set_of(s.negations(x))
                    .into_iter()
                    .map(|y| alg.label(y).to_string())
                    .collect(),
            )
        })
        .collect();
    StructureFile {
        name: None,
        carrier: t.carrier,
        leq: Some(pairs),
        meet: None,
        join: None,
        imp: None,
        neg_op: t.neg_op,
        family: Some(family),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_saturates() {
        let f = LoadedFile::parse(
            "t.json",
            r#"{"carrier": ["0", "1/2", "1"], "leq": [["0", "1/2"], ["1/2", "1"]]}"#,
        )
        .unwrap();
        let s = f.structure().unwrap();
        assert_eq!(s.to_string(), builtin::m3().to_string());
    }

    #[test]
    fn explicit_tables_and_indices() {
        let text =
            r#"{"carrier": ["0", "1"], "meet": [[0,0],[0,1]], "join": [[0,1],[1,1]], "N": {"0": ["1"], "1": ["0"]}}"#;
        let s = LoadedFile::parse("t.json", text).unwrap().structure().unwrap();
        assert_eq!(s.to_string(), builtin::classical2().to_string());
        let idx = LoadedFile::parse("t.json", r#"{"carrier": ["a", "b"], "leq": [[0, 1]]}"#).unwrap();
        assert!(idx.algebra().is_ok());
    }

    #[test]
    fn errors_name_the_file() {
        let e = LoadedFile::parse("bad.json", "{\"carrier\": [").err().unwrap();
        assert!(e.to_string().starts_with("bad.json: line 1"));
        let f = LoadedFile::parse("x.json", r#"{"carrier": ["0", "1"], "leq": [["0", "2"]]}"#).unwrap();
        assert!(matches!(f.algebra(), Err(StructureFileError::UnknownLabel { .. })));
    }

    #[test]
    fn round_trip_through_file_form() {
        for name in ["m3", "h3star", "chain4", "boolean4", "classical2"] {
            let s = builtin::by_name(name).unwrap();
            let text = serde_json::to_string(&to_file(&s)).unwrap();
            let back = LoadedFile::parse(name, &text).unwrap().structure().unwrap();
            assert_eq!(back.to_string(), s.to_string(), "{name}");
            assert_eq!(back.algebra().to_tables().neg_op, s.algebra().to_tables().neg_op);
        }
    }
}
