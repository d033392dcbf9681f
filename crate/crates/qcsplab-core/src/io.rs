//! External file formats.
//!
//! Structure files are JSON objects: `domain` is an array of element names,
//! `relations` an array of `{name, arity, dnf}` where `dnf` is an array of
//! disjuncts, each disjunct an array of atoms `{"v": i, "eq_v": j}` or
//! `{"v": i, "eq_c": name}`. Extensions are never serialized; they are
//! derived from the dnf. An optional `families` array carries entries
//! `{name, kind, alpha, beta}` with the blocks listing element names, and
//! an optional `idempotent_core` flag marks constant-expanded structures.
//!
//! Algebra files are `{domain, operations}` with each operation `{name,
//! arity, table}`, the table an array of output element names in
//! lexicographic input order. Universe files are arrays of tuples of
//! element names.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dnf::{extension_to_dnf, DnfAtom, DnfError, DnfFormula};
use crate::forge::{CutPair, FamilyKind, FamilySpec, ForgeError};
use crate::model::{Algebra, Domain, ModelError, Operation, Relation, Structure, Tuple};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown element name {0:?}")]
    UnknownElement(String),
    #[error("relation {relation}: atom must carry exactly one of eq_v / eq_c")]
    AmbiguousAtom { relation: String },
    #[error("relation {relation:?}: {source}")]
    BadDnf { relation: String, source: DnfError },
    #[error("relation {relation:?} has an empty extension and no dnf to serialize")]
    UnencodableRelation { relation: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Forge(#[from] ForgeError),
    #[error("tuple {index} has length {got}, expected {expected}")]
    TupleLength {
        index: usize,
        got: usize,
        expected: usize,
    },
}

#[derive(Debug, Serialize, Deserialize)]
struct StructureFile {
    domain: Vec<String>,
    relations: Vec<RelationFile>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    families: Vec<FamilyFile>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    idempotent_core: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct RelationFile {
    name: String,
    arity: usize,
    dnf: Vec<Vec<AtomFile>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct AtomFile {
    v: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    eq_v: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eq_c: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct FamilyFile {
    name: String,
    kind: String,
    alpha: Vec<String>,
    beta: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct AlgebraFile {
    domain: Vec<String>,
    operations: Vec<OperationFile>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct OperationFile {
    pub name: String,
    pub arity: usize,
    pub table: Vec<String>,
}

fn lookup(d: &Domain, name: &str) -> Result<usize, IoError> {
    d.index_of(name)
        .ok_or_else(|| IoError::UnknownElement(name.to_string()))
}

pub fn parse_structure(text: &str) -> Result<Structure, IoError> {
    let file: StructureFile = serde_json::from_str(text)?;
    let domain = Domain::new(file.domain)?;
    let mut relations = Vec::new();
    for r in file.relations {
        let mut disjuncts = Vec::new();
        for disjunct in r.dnf {
            let mut atoms = Vec::new();
            for atom in disjunct {
                let parsed = match (atom.eq_v, atom.eq_c) {
                    (Some(j), None) => DnfAtom::VarEqVar(atom.v, j),
                    (None, Some(name)) => DnfAtom::VarEqConst(atom.v, lookup(&domain, &name)?),
                    _ => {
                        return Err(IoError::AmbiguousAtom {
                            relation: r.name.clone(),
                        })
                    }
                };
                atoms.push(parsed);
            }
            disjuncts.push(atoms);
        }
        let dnf = DnfFormula::new(r.arity, disjuncts).map_err(|source| IoError::BadDnf {
            relation: r.name.clone(),
            source,
        })?;
        relations.push(Relation::from_dnf(r.name, dnf, &domain));
    }
    let mut families = Vec::new();
    for f in &file.families {
        let kind = match f.kind.as_str() {
            "sigma" => FamilyKind::Sigma,
            "tau" => FamilyKind::Tau,
            other => {
                return Err(IoError::Forge(ForgeError::InvalidCut(format!(
                    "family {:?} has unknown kind {other:?}",
                    f.name
                ))))
            }
        };
        let read = |names: &[String]| -> Result<BTreeSet<usize>, IoError> {
            names.iter().map(|n| lookup(&domain, n)).collect()
        };
        let cut = CutPair::new(read(&f.alpha)?, read(&f.beta)?, &domain)?;
        families.push(FamilySpec {
            name: f.name.clone(),
            kind,
            cut,
        });
    }
    Ok(Structure::new(domain, relations)?
        .with_families(families)
        .with_idempotent_core(file.idempotent_core))
}

pub fn structure_to_json(s: &Structure) -> Result<String, IoError> {
    let mut relations = Vec::new();
    for r in &s.relations {
        let dnf = match &r.dnf {
            Some(dnf) => dnf.clone(),
            None => extension_to_dnf(r).map_err(|_| IoError::UnencodableRelation {
                relation: r.name.clone(),
            })?,
        };
        let disjuncts = dnf
            .disjuncts()
            .iter()
            .map(|disjunct| {
                disjunct
                    .iter()
                    .map(|atom| match *atom {
                        DnfAtom::VarEqVar(i, j) => AtomFile {
                            v: i,
                            eq_v: Some(j),
                            eq_c: None,
                        },
                        DnfAtom::VarEqConst(i, c) => AtomFile {
                            v: i,
                            eq_v: None,
                            eq_c: Some(s.domain.name(c).to_string()),
                        },
                    })
                    .collect()
            })
            .collect();
        relations.push(RelationFile {
            name: r.name.clone(),
            arity: r.arity,
            dnf: disjuncts,
        });
    }
    let families = s
        .families
        .iter()
        .map(|f| FamilyFile {
            name: f.name.clone(),
            kind: match f.kind {
                FamilyKind::Sigma => "sigma".to_string(),
                FamilyKind::Tau => "tau".to_string(),
            },
            alpha: f
                .cut
                .alpha()
                .iter()
                .map(|&e| s.domain.name(e).to_string())
                .collect(),
            beta: f
                .cut
                .beta()
                .iter()
                .map(|&e| s.domain.name(e).to_string())
                .collect(),
        })
        .collect();
    let file = StructureFile {
        domain: s.domain.element_names().to_vec(),
        relations,
        families,
        idempotent_core: s.idempotent_core,
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

pub fn parse_algebra(text: &str) -> Result<Algebra, IoError> {
    let file: AlgebraFile = serde_json::from_str(text)?;
    let domain = Domain::new(file.domain)?;
    let mut operations = Vec::new();
    for op in file.operations {
        let table = op
            .table
            .iter()
            .map(|name| lookup(&domain, name))
            .collect::<Result<Vec<_>, _>>()?;
        operations.push(Operation::from_table(
            op.name,
            op.arity,
            domain.size(),
            table,
        )?);
    }
    Ok(Algebra::new(domain, operations)?)
}

pub fn algebra_to_json(a: &Algebra) -> Result<String, IoError> {
    let file = AlgebraFile {
        domain: a.domain().element_names().to_vec(),
        operations: a
            .operations()
            .iter()
            .map(|op| operation_file(op, a.domain()))
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

pub fn operation_file(op: &Operation, d: &Domain) -> OperationFile {
    OperationFile {
        name: op.name().to_string(),
        arity: op.arity(),
        table: op.table().iter().map(|&e| d.name(e).to_string()).collect(),
    }
}

/// Universe files: a JSON array of tuples of element names, all of length
/// `m`.
pub fn parse_universe(text: &str, d: &Domain, m: usize) -> Result<BTreeSet<Tuple>, IoError> {
    let rows: Vec<Vec<String>> = serde_json::from_str(text)?;
    let mut tuples = BTreeSet::new();
    for (index, row) in rows.iter().enumerate() {
        if row.len() != m {
            return Err(IoError::TupleLength {
                index,
                got: row.len(),
                expected: m,
            });
        }
        let entries = row
            .iter()
            .map(|name| lookup(d, name))
            .collect::<Result<Vec<_>, _>>()?;
        tuples.insert(Tuple::new(entries));
    }
    Ok(tuples)
}
