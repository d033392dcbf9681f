//! Shared data model: domains, tuples, relations, operations, algebras and
//! structures. Everything else in the crate builds on these types.
//!
//! Domain elements are named strings in files and on the command line, but
//! dense integer indices everywhere in memory. The order of names in the
//! input fixes the index order.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::dnf::DnfFormula;
use crate::forge::FamilySpec;

/// Index of a domain element.
pub type Element = usize;

/// Name of the built-in binary equality relation, available in every
/// structure without being declared.
pub const EQ_RELATION: &str = "eq";

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("domain must contain at least one element")]
    EmptyDomain,
    #[error("domain element name {0:?} is empty or duplicated")]
    BadElementName(String),
    #[error("tuple {tuple} has length {len}, expected {expected}")]
    TupleLength {
        tuple: String,
        len: usize,
        expected: usize,
    },
    #[error("tuple entry {entry} out of range for domain of size {size}")]
    EntryOutOfRange { entry: Element, size: usize },
    #[error("relation arity must be at least 1")]
    ZeroArity,
    #[error("operation table has {got} entries, expected {expected}")]
    TableSize { got: usize, expected: usize },
    #[error("operation output {output} out of range for domain of size {size}")]
    OutputOutOfRange { output: Element, size: usize },
    #[error("{name} applied to {got} arguments, expected {expected}")]
    ArgumentCount {
        name: String,
        got: usize,
        expected: usize,
    },
    #[error("argument tuples to {name} have unequal lengths")]
    MixedArgumentLengths { name: String },
    #[error("operation {name} lives on a domain of size {op}, not {expected}")]
    DomainSizeMismatch {
        name: String,
        op: usize,
        expected: usize,
    },
    #[error("unknown relation {0:?}")]
    UnknownRelation(String),
    #[error("relation name {0:?} is reserved for the built-in equality")]
    ReservedRelation(String),
    #[error("duplicate relation name {0:?}")]
    DuplicateRelation(String),
}

// ---------------------------------------------------------------------------
// Domain

/// A finite domain: an ordered list of distinct element names. The position
/// of a name is its element index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Domain {
    elements: Vec<String>,
}

impl Domain {
    pub fn new(elements: Vec<String>) -> Result<Self, ModelError> {
        if elements.is_empty() {
            return Err(ModelError::EmptyDomain);
        }
        let mut seen = BTreeSet::new();
        for name in &elements {
            if name.is_empty() || !seen.insert(name.clone()) {
                return Err(ModelError::BadElementName(name.clone()));
            }
        }
        Ok(Domain { elements })
    }

    /// Domain with elements named "0", "1", ..., `n-1`.
    pub fn indexed(n: usize) -> Self {
        Domain::new((0..n).map(|i| i.to_string()).collect()).expect("n >= 1")
    }

    pub fn size(&self) -> usize {
        self.elements.len()
    }

    pub fn element_names(&self) -> &[String] {
        &self.elements
    }

    pub fn name(&self, e: Element) -> &str {
        &self.elements[e]
    }

    pub fn index_of(&self, name: &str) -> Option<Element> {
        self.elements.iter().position(|n| n == name)
    }

    pub fn elements(&self) -> impl Iterator<Item = Element> {
        0..self.elements.len()
    }

    /// All length-`m` tuples over the domain in lexicographic order.
    pub fn tuples(&self, m: usize) -> TupleIter {
        TupleIter::new(self.size(), m)
    }

    /// Number of length-`m` tuples, saturating at `u128::MAX`.
    pub fn tuple_count(&self, m: usize) -> u128 {
        let n = self.size() as u128;
        let mut count: u128 = 1;
        for _ in 0..m {
            count = count.saturating_mul(n);
        }
        count
    }
}

/// Lexicographic odometer over all tuples of a fixed length.
#[derive(Debug, Clone)]
pub struct TupleIter {
    size: usize,
    next: Option<Vec<Element>>,
}

impl TupleIter {
    pub fn new(size: usize, len: usize) -> Self {
        let next = if size == 0 { None } else { Some(vec![0; len]) };
        TupleIter { size, next }
    }
}

impl Iterator for TupleIter {
    type Item = Tuple;

    fn next(&mut self) -> Option<Tuple> {
        let current = self.next.clone()?;
        // advance the odometer
        let mut bumped = false;
        if let Some(entries) = self.next.as_mut() {
            for i in (0..entries.len()).rev() {
                if entries[i] + 1 < self.size {
                    entries[i] += 1;
                    entries[i + 1..].fill(0);
                    bumped = true;
                    break;
                }
            }
        }
        if !bumped {
            self.next = None;
        }
        Some(Tuple::new(current))
    }
}

// ---------------------------------------------------------------------------
// Tuple

/// A fixed-length sequence of domain element indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tuple(Vec<Element>);

impl Tuple {
    pub fn new(entries: Vec<Element>) -> Self {
        Tuple(entries)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> Element {
        self.0[i]
    }

    pub fn entries(&self) -> &[Element] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<Element> {
        self.0
    }

    /// Render with element names from `d`, e.g. `(a,b,a)`.
    pub fn display(&self, d: &Domain) -> String {
        let names: Vec<&str> = self.0.iter().map(|&e| d.name(e)).collect();
        format!("({})", names.join(","))
    }
}

impl From<Vec<Element>> for Tuple {
    fn from(entries: Vec<Element>) -> Self {
        Tuple(entries)
    }
}

impl From<&[Element]> for Tuple {
    fn from(entries: &[Element]) -> Self {
        Tuple(entries.to_vec())
    }
}

impl fmt::Display for Tuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|e| e.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

// ---------------------------------------------------------------------------
// Relation

/// A named relation: an extension (the semantic ground truth) plus an
/// optional DNF certificate describing the same set of tuples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    pub name: String,
    pub arity: usize,
    pub extension: BTreeSet<Tuple>,
    pub dnf: Option<DnfFormula>,
}

impl Relation {
    pub fn new(
        name: impl Into<String>,
        arity: usize,
        extension: BTreeSet<Tuple>,
    ) -> Result<Self, ModelError> {
        if arity == 0 {
            return Err(ModelError::ZeroArity);
        }
        for t in &extension {
            if t.len() != arity {
                return Err(ModelError::TupleLength {
                    tuple: t.to_string(),
                    len: t.len(),
                    expected: arity,
                });
            }
        }
        Ok(Relation {
            name: name.into(),
            arity,
            extension,
            dnf: None,
        })
    }

    /// Attach a DNF certificate. Consistency with the extension is checked
    /// by [`validate_structure`], not here.
    pub fn with_dnf(mut self, dnf: DnfFormula) -> Self {
        self.dnf = Some(dnf);
        self
    }

    /// Build a relation from a DNF formula by expanding it over the domain.
    pub fn from_dnf(name: impl Into<String>, dnf: DnfFormula, d: &Domain) -> Self {
        let extension = dnf.expand(d);
        Relation {
            name: name.into(),
            arity: dnf.arity(),
            extension,
            dnf: Some(dnf),
        }
    }

    pub fn contains(&self, t: &Tuple) -> bool {
        self.extension.contains(t)
    }

    /// The built-in equality relation over domain `d`.
    pub fn equality(d: &Domain) -> Self {
        let extension = d.elements().map(|e| Tuple::new(vec![e, e])).collect();
        Relation {
            name: EQ_RELATION.to_string(),
            arity: 2,
            extension,
            dnf: None,
        }
    }
}

// ---------------------------------------------------------------------------
// Operation

/// A total finite operation on a domain, stored as a flat table indexed by
/// the argument tuple in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Operation {
    name: String,
    arity: usize,
    domain_size: usize,
    table: Vec<Element>,
}

impl Operation {
    pub fn from_table(
        name: impl Into<String>,
        arity: usize,
        domain_size: usize,
        table: Vec<Element>,
    ) -> Result<Self, ModelError> {
        let expected = domain_size
            .checked_pow(arity as u32)
            .ok_or(ModelError::TableSize {
                got: table.len(),
                expected: usize::MAX,
            })?;
        if table.len() != expected {
            return Err(ModelError::TableSize {
                got: table.len(),
                expected,
            });
        }
        for &out in &table {
            if out >= domain_size {
                return Err(ModelError::OutputOutOfRange {
                    output: out,
                    size: domain_size,
                });
            }
        }
        Ok(Operation {
            name: name.into(),
            arity,
            domain_size,
            table,
        })
    }

    pub fn from_fn(
        name: impl Into<String>,
        arity: usize,
        domain_size: usize,
        f: impl Fn(&[Element]) -> Element,
    ) -> Result<Self, ModelError> {
        let mut table = Vec::with_capacity(domain_size.pow(arity as u32));
        for t in TupleIter::new(domain_size, arity) {
            table.push(f(t.entries()));
        }
        Operation::from_table(name, arity, domain_size, table)
    }

    /// The `coord`-th projection of the given arity.
    pub fn projection(domain_size: usize, arity: usize, coord: usize) -> Self {
        assert!(coord < arity);
        Operation::from_fn(format!("pr{arity}_{coord}"), arity, domain_size, |args| {
            args[coord]
        })
        .expect("projection outputs are in range")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn domain_size(&self) -> usize {
        self.domain_size
    }

    pub fn table(&self) -> &[Element] {
        &self.table
    }

    /// Apply to one argument per coordinate. `args.len()` must equal the
    /// arity and every entry must be below the domain size.
    pub fn apply(&self, args: &[Element]) -> Element {
        debug_assert_eq!(args.len(), self.arity);
        let mut idx = 0;
        for &a in args {
            debug_assert!(a < self.domain_size);
            idx = idx * self.domain_size + a;
        }
        self.table[idx]
    }

    pub fn is_idempotent(&self) -> bool {
        let args = vec![0; self.arity];
        (0..self.domain_size).all(|a| {
            let mut args = args.clone();
            args.fill(a);
            self.apply(&args) == a
        })
    }
}

// ---------------------------------------------------------------------------
// Algebra

/// A set of operations over a common domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Algebra {
    domain: Domain,
    operations: Vec<Operation>,
}

impl Algebra {
    pub fn new(domain: Domain, operations: Vec<Operation>) -> Result<Self, ModelError> {
        for op in &operations {
            if op.domain_size() != domain.size() {
                return Err(ModelError::DomainSizeMismatch {
                    name: op.name().to_string(),
                    op: op.domain_size(),
                    expected: domain.size(),
                });
            }
        }
        Ok(Algebra { domain, operations })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn operations(&self) -> &[Operation] {
        &self.operations
    }

    pub fn is_idempotent(&self) -> bool {
        self.operations.iter().all(Operation::is_idempotent)
    }
}

// ---------------------------------------------------------------------------
// Structure

/// A relational structure: a domain plus named relations, with optional
/// parameterized relation families standing in for an infinite signature.
///
/// `idempotent_core` marks structures that are considered expanded with all
/// constants: polymorphism checks then also require the built-in equality
/// and every singleton unary relation to be preserved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Structure {
    pub domain: Domain,
    pub relations: Vec<Relation>,
    pub families: Vec<FamilySpec>,
    pub idempotent_core: bool,
}

impl Structure {
    pub fn new(domain: Domain, relations: Vec<Relation>) -> Result<Self, ModelError> {
        let mut names = BTreeSet::new();
        for r in &relations {
            if r.name == EQ_RELATION {
                return Err(ModelError::ReservedRelation(r.name.clone()));
            }
            if !names.insert(r.name.clone()) {
                return Err(ModelError::DuplicateRelation(r.name.clone()));
            }
            for t in &r.extension {
                for &e in t.entries() {
                    if e >= domain.size() {
                        return Err(ModelError::EntryOutOfRange {
                            entry: e,
                            size: domain.size(),
                        });
                    }
                }
            }
        }
        Ok(Structure {
            domain,
            relations,
            families: Vec::new(),
            idempotent_core: false,
        })
    }

    pub fn with_families(mut self, families: Vec<FamilySpec>) -> Self {
        self.families = families;
        self
    }

    pub fn with_idempotent_core(mut self, flag: bool) -> Self {
        self.idempotent_core = flag;
        self
    }

    pub fn relation(&self, name: &str) -> Option<&Relation> {
        self.relations.iter().find(|r| r.name == name)
    }

    pub fn relation_names(&self) -> impl Iterator<Item = &str> {
        self.relations.iter().map(|r| r.name.as_str())
    }

    pub fn family(&self, name: &str) -> Option<&FamilySpec> {
        self.families.iter().find(|f| f.name == name)
    }
}

/// Collect every invariant violation in `s`. An empty list means the
/// structure is well formed. Violations are data, not faults.
pub fn validate_structure(s: &Structure) -> Vec<String> {
    let mut violations = Vec::new();
    let n = s.domain.size();

    if s.domain.element_names().is_empty() {
        violations.push("domain has no elements".to_string());
    }
    let mut seen = BTreeSet::new();
    for name in s.domain.element_names() {
        if name.is_empty() {
            violations.push("domain element with empty name".to_string());
        }
        if !seen.insert(name) {
            violations.push(format!("duplicate domain element name {name:?}"));
        }
    }

    let mut rel_names = BTreeSet::new();
    for r in &s.relations {
        if r.name == EQ_RELATION {
            violations.push(format!("relation name {:?} is reserved", r.name));
        }
        if !rel_names.insert(&r.name) {
            violations.push(format!("duplicate relation name {:?}", r.name));
        }
        if r.arity == 0 {
            violations.push(format!("relation {:?} has arity 0", r.name));
        }
        for t in &r.extension {
            if t.len() != r.arity {
                violations.push(format!(
                    "relation {:?}: tuple {} has length {}, arity is {}",
                    r.name,
                    t,
                    t.len(),
                    r.arity
                ));
            }
            for &e in t.entries() {
                if e >= n {
                    violations.push(format!(
                        "relation {:?}: tuple {} entry {} outside domain of size {}",
                        r.name, t, e, n
                    ));
                }
            }
        }
        if let Some(dnf) = &r.dnf {
            if dnf.arity() != r.arity {
                violations.push(format!(
                    "relation {:?}: dnf arity {} does not match relation arity {}",
                    r.name,
                    dnf.arity(),
                    r.arity
                ));
            } else {
                let expanded = dnf.expand(&s.domain);
                if expanded != r.extension {
                    violations.push(format!(
                        "relation {:?}: dnf expands to {} tuples but extension has {}",
                        r.name,
                        expanded.len(),
                        r.extension.len()
                    ));
                }
            }
        }
    }

    for fam in &s.families {
        for problem in fam.cut.check_against(&s.domain) {
            violations.push(format!("family {:?}: {problem}", fam.name));
        }
    }

    violations
}

/// Componentwise action of an operation on equal-length tuples:
/// `result[i] = f(args[0][i], ..., args[k-1][i])`.
pub fn apply_operation(f: &Operation, args: &[Tuple]) -> Result<Tuple, ModelError> {
    if args.len() != f.arity() {
        return Err(ModelError::ArgumentCount {
            name: f.name().to_string(),
            got: args.len(),
            expected: f.arity(),
        });
    }
    let m = args.first().map_or(0, Tuple::len);
    if args.iter().any(|t| t.len() != m) {
        return Err(ModelError::MixedArgumentLengths {
            name: f.name().to_string(),
        });
    }
    let mut out = Vec::with_capacity(m);
    let mut column = vec![0; args.len()];
    for i in 0..m {
        for (j, t) in args.iter().enumerate() {
            column[j] = t.get(i);
        }
        out.push(f.apply(&column));
    }
    Ok(Tuple::new(out))
}

/// Restrict a structure to the named relations. Families and flags carry
/// over unchanged.
pub fn structure_reduct(s: &Structure, names: &BTreeSet<String>) -> Result<Structure, ModelError> {
    for name in names {
        if s.relation(name).is_none() {
            return Err(ModelError::UnknownRelation(name.clone()));
        }
    }
    let relations = s
        .relations
        .iter()
        .filter(|r| names.contains(&r.name))
        .cloned()
        .collect();
    Ok(Structure {
        domain: s.domain.clone(),
        relations,
        families: s.families.clone(),
        idempotent_core: s.idempotent_core,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dnf::parse_dnf;

    fn meet() -> Operation {
        Operation::from_fn("meet", 2, 2, |a| a[0].min(a[1])).unwrap()
    }

    fn majority() -> Operation {
        Operation::from_fn("maj", 3, 2, |a| {
            if a[0] == a[1] || a[0] == a[2] {
                a[0]
            } else {
                a[1]
            }
        })
        .unwrap()
    }

    #[test]
    fn domain_rejects_duplicates_and_empty() {
        assert!(Domain::new(vec![]).is_err());
        assert!(Domain::new(vec!["a".into(), "a".into()]).is_err());
        assert!(Domain::new(vec!["a".into(), "".into()]).is_err());
        assert_eq!(Domain::indexed(3).size(), 3);
        assert_eq!(Domain::indexed(3).index_of("2"), Some(2));
    }

    #[test]
    fn tuple_iter_is_lexicographic_and_complete() {
        let d = Domain::indexed(3);
        let all: Vec<Tuple> = d.tuples(2).collect();
        assert_eq!(all.len(), 9);
        assert_eq!(all[0], Tuple::new(vec![0, 0]));
        assert_eq!(all[1], Tuple::new(vec![0, 1]));
        assert_eq!(all[8], Tuple::new(vec![2, 2]));
        let zero_len: Vec<Tuple> = d.tuples(0).collect();
        assert_eq!(zero_len, vec![Tuple::new(vec![])]);
    }

    #[test]
    fn apply_meet_componentwise() {
        // binary meet on {0,1}, args (0,1),(1,1) -> (0,1)
        let f = meet();
        let out = apply_operation(&f, &[Tuple::new(vec![0, 1]), Tuple::new(vec![1, 1])]).unwrap();
        assert_eq!(out, Tuple::new(vec![0, 1]));
    }

    #[test]
    fn apply_idempotent_on_equal_args_is_identity() {
        let f = majority();
        assert!(f.is_idempotent());
        let t = Tuple::new(vec![0, 1, 1, 0]);
        let out = apply_operation(&f, &[t.clone(), t.clone(), t.clone()]).unwrap();
        assert_eq!(out, t);
    }

    #[test]
    fn apply_majority_componentwise() {
        // majority on {0,1}, args (0,1),(0,1),(1,0) -> (0,1)
        let f = majority();
        // oracle: evaluate the table coordinate by coordinate
        let args = [
            Tuple::new(vec![0, 1]),
            Tuple::new(vec![0, 1]),
            Tuple::new(vec![1, 0]),
        ];
        let mut expected = Vec::new();
        for i in 0..2 {
            expected.push(f.apply(&[args[0].get(i), args[1].get(i), args[2].get(i)]));
        }
        assert_eq!(expected, vec![0, 1]);
        assert_eq!(apply_operation(&f, &args).unwrap(), Tuple::new(expected));
    }

    #[test]
    fn apply_rejects_bad_argument_shapes() {
        let f = meet();
        let err = apply_operation(&f, &[Tuple::new(vec![0, 1])]);
        assert!(matches!(err, Err(ModelError::ArgumentCount { .. })));
        let err = apply_operation(&f, &[Tuple::new(vec![0, 1]), Tuple::new(vec![0, 1, 1])]);
        assert!(matches!(err, Err(ModelError::MixedArgumentLengths { .. })));
    }

    #[test]
    fn apply_commutes_with_projection() {
        // projecting the image to coordinate i equals f on the i-th entries
        let d = Domain::indexed(2);
        let f = majority();
        let tuples: Vec<Tuple> = d.tuples(3).collect();
        for a in &tuples {
            for b in &tuples {
                for c in &tuples {
                    let image = apply_operation(&f, &[a.clone(), b.clone(), c.clone()]).unwrap();
                    for i in 0..3 {
                        assert_eq!(image.get(i), f.apply(&[a.get(i), b.get(i), c.get(i)]));
                    }
                }
            }
        }
    }

    #[test]
    fn validate_accepts_well_formed_structure() {
        let d = Domain::indexed(3);
        let r = Relation::new("r", 2, d.tuples(2).collect()).unwrap();
        let s = Structure::new(d, vec![r]).unwrap();
        assert!(validate_structure(&s).is_empty());
    }

    #[test]
    fn validate_reports_arity_mismatch() {
        let d = Domain::indexed(3);
        let mut r = Relation::new("r", 3, BTreeSet::new()).unwrap();
        r.extension.insert(Tuple::new(vec![0, 1]));
        let s = Structure {
            domain: d,
            relations: vec![r],
            families: Vec::new(),
            idempotent_core: false,
        };
        let violations = validate_structure(&s);
        assert_eq!(violations.len(), 1);
        assert!(violations[0].contains("length 2"));
    }

    #[test]
    fn validate_reports_dnf_mismatch() {
        let d = Domain::indexed(2);
        let dnf = parse_dnf("x0=x1", 2, &d).unwrap();
        // brute-force oracle: expansion of x0=x1 over {0,1}
        let expected: BTreeSet<Tuple> = d.tuples(2).filter(|t| t.get(0) == t.get(1)).collect();
        assert_eq!(dnf.expand(&d), expected);
        // now attach the dnf to a deliberately different extension
        let r = Relation::new("r", 2, d.tuples(2).collect())
            .unwrap()
            .with_dnf(dnf);
        let s = Structure {
            domain: d,
            relations: vec![r],
            families: Vec::new(),
            idempotent_core: false,
        };
        let violations = validate_structure(&s);
        assert_eq!(violations.len(), 1);
        assert!(violations[0].contains("dnf"));
    }

    #[test]
    fn reduct_examples() {
        let d = Domain::indexed(2);
        let r1 = Relation::new("tau_1", 1, BTreeSet::from([Tuple::new(vec![0])])).unwrap();
        let r2 = Relation::new("tau_2", 1, BTreeSet::from([Tuple::new(vec![1])])).unwrap();
        let s = Structure::new(d, vec![r1, r2]).unwrap();

        let all: BTreeSet<String> = s.relation_names().map(String::from).collect();
        assert_eq!(structure_reduct(&s, &all).unwrap(), s);

        let empty = structure_reduct(&s, &BTreeSet::new()).unwrap();
        assert!(empty.relations.is_empty());
        assert_eq!(empty.domain, s.domain);

        let one = structure_reduct(&s, &BTreeSet::from(["tau_1".to_string()])).unwrap();
        assert_eq!(one.relations.len(), 1);
        assert_eq!(one.relations[0].name, "tau_1");

        assert!(matches!(
            structure_reduct(&s, &BTreeSet::from(["nope".to_string()])),
            Err(ModelError::UnknownRelation(_))
        ));
    }

    #[test]
    fn reduct_is_idempotent_and_monotone() {
        let d = Domain::indexed(2);
        let rels: Vec<Relation> = (0..3)
            .map(|i| {
                Relation::new(format!("r{i}"), 1, BTreeSet::from([Tuple::new(vec![0])])).unwrap()
            })
            .collect();
        let s = Structure::new(d, rels).unwrap();
        let big: BTreeSet<String> = ["r0", "r1", "r2"].iter().map(|s| s.to_string()).collect();
        let small: BTreeSet<String> = ["r1"].iter().map(|s| s.to_string()).collect();
        let via_big = structure_reduct(&structure_reduct(&s, &big).unwrap(), &small).unwrap();
        let direct = structure_reduct(&s, &small).unwrap();
        assert_eq!(via_big, direct);
        let twice = structure_reduct(&direct, &small).unwrap();
        assert_eq!(twice, direct);
    }

    #[test]
    fn structure_rejects_reserved_and_duplicate_names() {
        let d = Domain::indexed(2);
        let eq = Relation::new(EQ_RELATION, 2, BTreeSet::new()).unwrap();
        assert!(matches!(
            Structure::new(d.clone(), vec![eq]),
            Err(ModelError::ReservedRelation(_))
        ));
        let r1 = Relation::new("r", 1, BTreeSet::new()).unwrap();
        let r2 = Relation::new("r", 1, BTreeSet::new()).unwrap();
        assert!(matches!(
            Structure::new(d, vec![r1, r2]),
            Err(ModelError::DuplicateRelation(_))
        ));
    }
}
