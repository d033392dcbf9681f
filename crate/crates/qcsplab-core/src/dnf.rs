//! Quantifier-free equality formulas in disjunctive normal form, the
//! encoding this crate commits to for relations.
//!
//! Grammar, whitespace insignificant:
//!
//! ```text
//! formula  := disjunct ('|' disjunct)*
//! disjunct := atom ('&' atom)*
//! atom     := 'x' INT '=' ('x' INT | CONSTNAME)
//! ```
//!
//! Atoms are positive: `x0=x1` or `x0=a`. Negated atoms are not part of the
//! grammar and are rejected with a position. Positional variables `x0, x1,
//! ...` refer to the coordinates of the relation being defined; a token of
//! the form `x<digits>` is always read as a variable, so constants whose
//! names look like that are shadowed.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::model::{Domain, Element, Relation, Tuple};

/// One positive equality atom over positional variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DnfAtom {
    /// Coordinate `i` equals coordinate `j`.
    VarEqVar(usize, usize),
    /// Coordinate `i` equals the domain element.
    VarEqConst(usize, Element),
}

/// A nonempty disjunction of nonempty conjunctions of equality atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DnfFormula {
    arity: usize,
    disjuncts: Vec<Vec<DnfAtom>>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DnfError {
    #[error("syntax error at byte {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unknown constant {name:?} at byte {pos}")]
    UnknownConstant { pos: usize, name: String },
    #[error("variable x{index} out of range for arity {arity}")]
    VarOutOfRange { index: usize, arity: usize },
    #[error("a DNF formula needs at least one disjunct")]
    NoDisjuncts,
    #[error("disjunct {0} has no atoms")]
    EmptyDisjunct(usize),
    #[error("an empty relation has no disjunctive listing")]
    EmptyExtension,
    #[error("tuple length {got} does not match formula arity {arity}")]
    ArityMismatch { got: usize, arity: usize },
}

impl DnfFormula {
    pub fn new(arity: usize, disjuncts: Vec<Vec<DnfAtom>>) -> Result<Self, DnfError> {
        if disjuncts.is_empty() {
            return Err(DnfError::NoDisjuncts);
        }
        for (i, disjunct) in disjuncts.iter().enumerate() {
            if disjunct.is_empty() {
                return Err(DnfError::EmptyDisjunct(i));
            }
            for atom in disjunct {
                let bad = match *atom {
                    DnfAtom::VarEqVar(a, b) => a.max(b) >= arity,
                    DnfAtom::VarEqConst(a, _) => a >= arity,
                };
                if bad {
                    let index = match *atom {
                        DnfAtom::VarEqVar(a, b) => a.max(b),
                        DnfAtom::VarEqConst(a, _) => a,
                    };
                    return Err(DnfError::VarOutOfRange { index, arity });
                }
            }
        }
        Ok(DnfFormula { arity, disjuncts })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn disjuncts(&self) -> &[Vec<DnfAtom>] {
        &self.disjuncts
    }

    /// Total atom count.
    pub fn size(&self) -> usize {
        self.disjuncts.iter().map(Vec::len).sum()
    }

    /// True iff some disjunct has every atom satisfied by `t`.
    pub fn eval(&self, t: &Tuple) -> Result<bool, DnfError> {
        if t.len() != self.arity {
            return Err(DnfError::ArityMismatch {
                got: t.len(),
                arity: self.arity,
            });
        }
        Ok(self.disjuncts.iter().any(|disjunct| {
            disjunct.iter().all(|atom| match *atom {
                DnfAtom::VarEqVar(i, j) => t.get(i) == t.get(j),
                DnfAtom::VarEqConst(i, c) => t.get(i) == c,
            })
        }))
    }

    /// The set of all tuples satisfying the formula. Works disjunct by
    /// disjunct: coordinates equated by atoms are merged, pinned
    /// coordinates are fixed, and only the free coordinate classes are
    /// enumerated, which is far below the n^arity sweep for the gadget
    /// formulas with their long constant disjuncts.
    pub fn expand(&self, d: &Domain) -> BTreeSet<Tuple> {
        let n = d.size();
        let mut out = BTreeSet::new();
        for disjunct in &self.disjuncts {
            let mut parent: Vec<usize> = (0..self.arity).collect();
            fn root(parent: &mut [usize], mut x: usize) -> usize {
                while parent[x] != x {
                    parent[x] = parent[parent[x]];
                    x = parent[x];
                }
                x
            }
            for atom in disjunct {
                if let DnfAtom::VarEqVar(i, j) = *atom {
                    let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                    parent[a] = b;
                }
            }
            let mut pinned: Vec<Option<Element>> = vec![None; self.arity];
            let mut consistent = true;
            for atom in disjunct {
                if let DnfAtom::VarEqConst(i, c) = *atom {
                    let r = root(&mut parent, i);
                    match pinned[r] {
                        None => pinned[r] = Some(c),
                        Some(existing) if existing != c => {
                            consistent = false;
                            break;
                        }
                        Some(_) => {}
                    }
                }
            }
            if !consistent {
                continue;
            }
            let roots: Vec<usize> = (0..self.arity).map(|x| root(&mut parent, x)).collect();
            // map each unpinned class to a slot in the enumeration odometer
            let mut free_slot: Vec<Option<usize>> = vec![None; self.arity];
            let mut free_count = 0;
            for &r in &roots {
                if pinned[r].is_none() && free_slot[r].is_none() {
                    free_slot[r] = Some(free_count);
                    free_count += 1;
                }
            }
            let mut choice = vec![0 as Element; free_count];
            loop {
                let tuple: Vec<Element> = roots
                    .iter()
                    .map(|&r| pinned[r].unwrap_or_else(|| choice[free_slot[r].expect("unpinned")]))
                    .collect();
                out.insert(Tuple::new(tuple));
                let mut done = true;
                for slot in (0..choice.len()).rev() {
                    if choice[slot] + 1 < n {
                        choice[slot] += 1;
                        choice[slot + 1..].fill(0);
                        done = false;
                        break;
                    }
                }
                if done {
                    break;
                }
            }
        }
        out
    }

    /// Canonical text form; `parse_dnf` of the output reproduces the
    /// formula.
    pub fn to_text(&self, d: &Domain) -> String {
        let disjuncts: Vec<String> = self
            .disjuncts
            .iter()
            .map(|disjunct| {
                let atoms: Vec<String> = disjunct
                    .iter()
                    .map(|atom| match *atom {
                        DnfAtom::VarEqVar(i, j) => format!("x{i}=x{j}"),
                        DnfAtom::VarEqConst(i, c) => format!("x{i}={}", d.name(c)),
                    })
                    .collect();
                atoms.join(" & ")
            })
            .collect();
        disjuncts.join(" | ")
    }
}

/// Parse the DNF grammar against a declared arity and domain.
pub fn parse_dnf(text: &str, arity: usize, d: &Domain) -> Result<DnfFormula, DnfError> {
    let bytes = text.as_bytes();
    let mut pos = 0;
    let mut disjuncts: Vec<Vec<DnfAtom>> = Vec::new();
    let mut current: Vec<DnfAtom> = Vec::new();

    fn skip_ws(bytes: &[u8], pos: &mut usize) {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
    }

    fn read_uint(bytes: &[u8], pos: &mut usize) -> Option<usize> {
        let start = *pos;
        while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
            *pos += 1;
        }
        if *pos == start {
            return None;
        }
        std::str::from_utf8(&bytes[start..*pos])
            .ok()
            .and_then(|s| s.parse().ok())
    }

    // a variable token is 'x' immediately followed by at least one digit
    fn try_read_var(bytes: &[u8], pos: &mut usize) -> Option<usize> {
        if bytes.get(*pos) == Some(&b'x') {
            let mut probe = *pos + 1;
            if let Some(idx) = read_uint(bytes, &mut probe) {
                *pos = probe;
                return Some(idx);
            }
        }
        None
    }

    fn read_const_name(bytes: &[u8], pos: &mut usize) -> String {
        let start = *pos;
        while *pos < bytes.len() {
            let b = bytes[*pos];
            if b.is_ascii_whitespace() || matches!(b, b'&' | b'|' | b'=' | b'!') {
                break;
            }
            *pos += 1;
        }
        String::from_utf8_lossy(&bytes[start..*pos]).into_owned()
    }

    loop {
        skip_ws(bytes, &mut pos);
        let var_pos = pos;
        let Some(index) = try_read_var(bytes, &mut pos) else {
            return Err(DnfError::Syntax {
                pos: var_pos,
                message: "expected a variable of the form x<digits>".to_string(),
            });
        };
        if index >= arity {
            return Err(DnfError::VarOutOfRange { index, arity });
        }
        skip_ws(bytes, &mut pos);
        if bytes.get(pos) != Some(&b'=') {
            let message = if bytes.get(pos) == Some(&b'!') {
                "negated atoms are not part of the DNF grammar".to_string()
            } else {
                "expected '='".to_string()
            };
            return Err(DnfError::Syntax { pos, message });
        }
        pos += 1;
        skip_ws(bytes, &mut pos);
        let rhs_pos = pos;
        if let Some(j) = try_read_var(bytes, &mut pos) {
            if j >= arity {
                return Err(DnfError::VarOutOfRange { index: j, arity });
            }
            current.push(DnfAtom::VarEqVar(index, j));
        } else {
            let name = read_const_name(bytes, &mut pos);
            if name.is_empty() {
                return Err(DnfError::Syntax {
                    pos: rhs_pos,
                    message: "expected a variable or constant".to_string(),
                });
            }
            let Some(c) = d.index_of(&name) else {
                return Err(DnfError::UnknownConstant { pos: rhs_pos, name });
            };
            current.push(DnfAtom::VarEqConst(index, c));
        }
        skip_ws(bytes, &mut pos);
        match bytes.get(pos) {
            None => break,
            Some(b'&') => {
                pos += 1;
            }
            Some(b'|') => {
                pos += 1;
                disjuncts.push(std::mem::take(&mut current));
            }
            Some(_) => {
                return Err(DnfError::Syntax {
                    pos,
                    message: "expected '&', '|' or end of input".to_string(),
                });
            }
        }
    }
    disjuncts.push(current);
    DnfFormula::new(arity, disjuncts)
}

/// Free-function form of [`DnfFormula::eval`].
pub fn eval_dnf(f: &DnfFormula, t: &Tuple) -> Result<bool, DnfError> {
    f.eval(t)
}

/// Free-function form of [`DnfFormula::expand`].
pub fn dnf_to_extension(f: &DnfFormula, d: &Domain) -> BTreeSet<Tuple> {
    f.expand(d)
}

/// The canonical certificate for a nonempty relation: one disjunct per
/// tuple, each a full conjunction of constant atoms. Expanding the result
/// reproduces the extension exactly.
pub fn extension_to_dnf(r: &Relation) -> Result<DnfFormula, DnfError> {
    if r.extension.is_empty() {
        return Err(DnfError::EmptyExtension);
    }
    let disjuncts = r
        .extension
        .iter()
        .map(|t| {
            t.entries()
                .iter()
                .enumerate()
                .map(|(i, &c)| DnfAtom::VarEqConst(i, c))
                .collect()
        })
        .collect();
    DnfFormula::new(r.arity, disjuncts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn named(names: &[&str]) -> Domain {
        Domain::new(names.iter().map(|s| s.to_string()).collect()).unwrap()
    }

    #[test]
    fn parse_two_disjuncts() {
        let d = named(&["a1", "a2", "a3"]);
        let f = parse_dnf("x0=x1 & x0=a1 | x2=a2", 3, &d).unwrap();
        assert_eq!(f.disjuncts().len(), 2);
        assert_eq!(
            f.disjuncts()[0],
            vec![DnfAtom::VarEqVar(0, 1), DnfAtom::VarEqConst(0, 0)]
        );
        assert_eq!(f.disjuncts()[1], vec![DnfAtom::VarEqConst(2, 1)]);
        assert_eq!(f.size(), 3);
    }

    #[test]
    fn parse_rejects_out_of_range_variable() {
        let d = named(&["a"]);
        let err = parse_dnf("x0=x1", 1, &d).unwrap_err();
        assert_eq!(err, DnfError::VarOutOfRange { index: 1, arity: 1 });
    }

    #[test]
    fn parse_rejects_negated_atoms() {
        // disequality is expressible only through extensions, never in DNF text
        let d = named(&["a1", "a2"]);
        let err = parse_dnf("x0!=x1 & x0=a1", 2, &d).unwrap_err();
        match err {
            DnfError::Syntax { pos, message } => {
                assert_eq!(pos, 2);
                assert!(message.contains("negated"));
            }
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn parse_reports_unknown_constant() {
        let d = named(&["a1"]);
        let err = parse_dnf("x0=b9", 1, &d).unwrap_err();
        assert!(matches!(err, DnfError::UnknownConstant { name, .. } if name == "b9"));
    }

    #[test]
    fn parse_then_print_is_a_fixpoint() {
        let d = named(&["a1", "a2", "a3"]);
        let f = parse_dnf("  x0 = x1&x0=a1 |x2= a2 ", 3, &d).unwrap();
        let printed = f.to_text(&d);
        assert_eq!(printed, "x0=x1 & x0=a1 | x2=a2");
        let reparsed = parse_dnf(&printed, 3, &d).unwrap();
        assert_eq!(reparsed, f);
        assert_eq!(reparsed.to_text(&d), printed);
    }

    #[test]
    fn eval_reflexive_and_not() {
        let d = Domain::indexed(2);
        let f = parse_dnf("x0=x1", 2, &d).unwrap();
        assert!(f.eval(&Tuple::new(vec![1, 1])).unwrap());
        assert!(!f.eval(&Tuple::new(vec![0, 1])).unwrap());
        assert!(matches!(
            f.eval(&Tuple::new(vec![0])),
            Err(DnfError::ArityMismatch { .. })
        ));
    }

    #[test]
    fn expand_tautology() {
        let d = Domain::indexed(3);
        let f = parse_dnf("x0=x0", 1, &d).unwrap();
        let ext = f.expand(&d);
        assert_eq!(ext.len(), 3);
    }

    /// Brute-force oracle for the two-block union: every pair from
    /// alpha x alpha or beta x beta.
    fn union_of_squares(pairs: bool, d: &Domain) -> BTreeSet<Tuple> {
        let alpha = [0usize, 1];
        let beta = [1usize, 2];
        let width = if pairs { 2 } else { 3 };
        d.tuples(width)
            .filter(|t| {
                let in_all = |block: &[usize]| t.entries().iter().all(|e| block.contains(e));
                in_all(&alpha) || in_all(&beta)
            })
            .collect()
    }

    #[test]
    fn expand_two_block_union_counts() {
        let d = Domain::indexed(3);
        // rho over alpha={0,1}, beta={1,2}: 4 + 4 - 1 = 7 tuples
        let rho = parse_dnf(
            "x0=0 & x1=0 | x0=0 & x1=1 | x0=1 & x1=0 | x0=1 & x1=1 \
             | x0=1 & x1=2 | x0=2 & x1=1 | x0=2 & x1=2",
            2,
            &d,
        )
        .unwrap();
        let oracle = union_of_squares(true, &d);
        assert_eq!(oracle.len(), 7);
        assert_eq!(rho.expand(&d), oracle);

        // the ternary analogue has 8 + 8 - 1 = 15 tuples and the all-alpha
        // triple (0,0,1) satisfies it
        let oracle3 = union_of_squares(false, &d);
        assert_eq!(oracle3.len(), 15);
        assert!(oracle3.contains(&Tuple::new(vec![0, 0, 1])));
    }

    #[test]
    fn extension_to_dnf_roundtrip_and_errors() {
        let d = Domain::indexed(2);
        let singleton = Relation::new("r", 2, BTreeSet::from([Tuple::new(vec![0, 1])])).unwrap();
        let f = extension_to_dnf(&singleton).unwrap();
        assert_eq!(f.disjuncts().len(), 1);
        assert_eq!(
            f.disjuncts()[0],
            vec![DnfAtom::VarEqConst(0, 0), DnfAtom::VarEqConst(1, 1)]
        );
        assert_eq!(f.expand(&d), singleton.extension);

        let empty = Relation::new("e", 2, BTreeSet::new()).unwrap();
        assert_eq!(
            extension_to_dnf(&empty).unwrap_err(),
            DnfError::EmptyExtension
        );
    }

    #[test]
    fn adding_a_disjunct_never_shrinks_the_extension() {
        let d = Domain::indexed(3);
        let f = parse_dnf("x0=x1", 2, &d).unwrap();
        let g = parse_dnf("x0=x1 | x0=0", 2, &d).unwrap();
        assert!(f.expand(&d).is_subset(&g.expand(&d)));
    }
}
