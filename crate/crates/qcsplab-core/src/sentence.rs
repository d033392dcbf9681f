//! Prenex positive-Horn sentences: a quantifier prefix over named variables
//! and a conjunction of relation atoms whose arguments are variables or
//! domain constants.
//!
//! Text form, one token per quantifier:
//!
//! ```text
//! A x1 E y1 : tau_1(x1,x1,y1) & eq(y1,1)
//! ```
//!
//! `A` quantifies universally, `E` existentially; a colon separates the
//! prefix from the `&`-joined atoms. Constants are bare domain element
//! names. Equality atoms use the built-in binary relation `eq`. When an
//! atom argument matches both a quantified variable and a domain element
//! name, the variable wins.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::model::{Domain, Element, Structure, EQ_RELATION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Quantifier {
    Forall,
    Exists,
}

impl fmt::Display for Quantifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantifier::Forall => write!(f, "A"),
            Quantifier::Exists => write!(f, "E"),
        }
    }
}

/// An atom argument: a prefix variable or a domain constant.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Arg {
    Var(String),
    Const(Element),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub relation: String,
    pub args: Vec<Arg>,
}

impl Atom {
    pub fn new(relation: impl Into<String>, args: Vec<Arg>) -> Self {
        Atom {
            relation: relation.into(),
            args,
        }
    }

    pub fn is_equality(&self) -> bool {
        self.relation == EQ_RELATION
    }

    pub fn mentions(&self, var: &str) -> bool {
        self.args
            .iter()
            .any(|a| matches!(a, Arg::Var(v) if v == var))
    }
}

/// A prenex positive-Horn sentence. The body may be empty only as the
/// result of simplification; the parser requires at least one atom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PHSentence {
    pub prefix: Vec<(Quantifier, String)>,
    pub body: Vec<Atom>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SentenceError {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("missing ':' between prefix and body")]
    MissingColon,
    #[error("variable {0:?} quantified more than once")]
    DuplicateVariable(String),
    #[error("argument {0:?} is neither a quantified variable nor a domain element")]
    UnknownSymbol(String),
    #[error("sentence body has no atoms")]
    EmptyBody,
}

impl PHSentence {
    pub fn new(prefix: Vec<(Quantifier, String)>, body: Vec<Atom>) -> Self {
        PHSentence { prefix, body }
    }

    pub fn parse(text: &str, d: &Domain) -> Result<Self, SentenceError> {
        let Some((prefix_text, body_text)) = text.split_once(':') else {
            return Err(SentenceError::MissingColon);
        };

        let mut prefix = Vec::new();
        let mut vars = BTreeSet::new();
        let tokens: Vec<&str> = prefix_text.split_whitespace().collect();
        if !tokens.len().is_multiple_of(2) {
            return Err(SentenceError::Syntax(
                "prefix must be a sequence of 'A <var>' / 'E <var>' pairs".to_string(),
            ));
        }
        for pair in tokens.chunks(2) {
            let q = match pair[0] {
                "A" => Quantifier::Forall,
                "E" => Quantifier::Exists,
                other => {
                    return Err(SentenceError::Syntax(format!(
                        "expected quantifier 'A' or 'E', found {other:?}"
                    )))
                }
            };
            let var = pair[1].to_string();
            if !vars.insert(var.clone()) {
                return Err(SentenceError::DuplicateVariable(var));
            }
            prefix.push((q, var));
        }

        let mut body = Vec::new();
        for atom_text in body_text.split('&') {
            let atom_text = atom_text.trim();
            if atom_text.is_empty() {
                return Err(SentenceError::Syntax("empty atom".to_string()));
            }
            let Some(open) = atom_text.find('(') else {
                return Err(SentenceError::Syntax(format!(
                    "atom {atom_text:?} is missing its argument list"
                )));
            };
            if !atom_text.ends_with(')') {
                return Err(SentenceError::Syntax(format!(
                    "atom {atom_text:?} is missing ')'"
                )));
            }
            let relation = atom_text[..open].trim().to_string();
            if relation.is_empty() {
                return Err(SentenceError::Syntax(
                    "atom with empty relation name".to_string(),
                ));
            }
            let args_text = &atom_text[open + 1..atom_text.len() - 1];
            let mut args = Vec::new();
            for raw in args_text.split(',') {
                let token = raw.trim();
                if token.is_empty() {
                    return Err(SentenceError::Syntax(format!(
                        "empty argument in atom {atom_text:?}"
                    )));
                }
                if vars.contains(token) {
                    args.push(Arg::Var(token.to_string()));
                } else if let Some(e) = d.index_of(token) {
                    args.push(Arg::Const(e));
                } else {
                    return Err(SentenceError::UnknownSymbol(token.to_string()));
                }
            }
            body.push(Atom::new(relation, args));
        }
        if body.is_empty() {
            return Err(SentenceError::EmptyBody);
        }
        Ok(PHSentence { prefix, body })
    }

    pub fn to_text(&self, d: &Domain) -> String {
        let mut out = String::new();
        for (q, v) in &self.prefix {
            out.push_str(&format!("{q} {v} "));
        }
        out.push(':');
        let atoms: Vec<String> = self
            .body
            .iter()
            .map(|atom| {
                let args: Vec<String> = atom
                    .args
                    .iter()
                    .map(|a| match a {
                        Arg::Var(v) => v.clone(),
                        Arg::Const(e) => d.name(*e).to_string(),
                    })
                    .collect();
                format!("{}({})", atom.relation, args.join(","))
            })
            .collect();
        if !atoms.is_empty() {
            out.push(' ');
            out.push_str(&atoms.join(" & "));
        }
        out
    }

    /// Every invariant violation: variables quantified once, body variables
    /// all quantified, atom arities matching the structure's relations (the
    /// built-in equality is binary).
    pub fn validate(&self, s: &Structure) -> Vec<String> {
        let mut violations = Vec::new();
        let mut vars = BTreeSet::new();
        for (_, v) in &self.prefix {
            if !vars.insert(v.clone()) {
                violations.push(format!("variable {v:?} quantified more than once"));
            }
        }
        for atom in &self.body {
            for arg in &atom.args {
                match arg {
                    Arg::Var(v) if !vars.contains(v) => {
                        violations.push(format!("body variable {v:?} is not quantified"));
                    }
                    Arg::Const(e) if *e >= s.domain.size() => {
                        violations.push(format!("constant index {e} outside the domain"));
                    }
                    _ => {}
                }
            }
            let expected = if atom.is_equality() {
                Some(2)
            } else {
                s.relation(&atom.relation).map(|r| r.arity)
            };
            match expected {
                None => violations.push(format!("unknown relation {:?}", atom.relation)),
                Some(a) if a != atom.args.len() => violations.push(format!(
                    "atom {}: {} arguments, relation has arity {}",
                    atom.relation,
                    atom.args.len(),
                    a
                )),
                _ => {}
            }
        }
        violations
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.prefix.iter().map(|(_, v)| v.as_str())
    }

    pub fn quantifier_of(&self, var: &str) -> Option<Quantifier> {
        self.prefix.iter().find(|(_, v)| v == var).map(|(q, _)| *q)
    }

    pub fn is_existential(&self) -> bool {
        self.prefix.iter().all(|(q, _)| *q == Quantifier::Exists)
    }

    /// For a prefix of shape `A^a E^b` (either block possibly empty),
    /// return the block sizes.
    pub fn pi2_blocks(&self) -> Option<(usize, usize)> {
        let mut universals = 0;
        let mut existentials = 0;
        for (q, _) in &self.prefix {
            match q {
                Quantifier::Forall if existentials == 0 => universals += 1,
                Quantifier::Forall => return None,
                Quantifier::Exists => existentials += 1,
            }
        }
        Some((universals, existentials))
    }

    /// Replace bound variables by constants and drop them from the prefix.
    pub fn substitute(&self, bindings: &BTreeMap<String, Element>) -> PHSentence {
        let prefix = self
            .prefix
            .iter()
            .filter(|(_, v)| !bindings.contains_key(v))
            .cloned()
            .collect();
        let body = self
            .body
            .iter()
            .map(|atom| {
                let args = atom
                    .args
                    .iter()
                    .map(|arg| match arg {
                        Arg::Var(v) => match bindings.get(v) {
                            Some(&e) => Arg::Const(e),
                            None => arg.clone(),
                        },
                        Arg::Const(_) => arg.clone(),
                    })
                    .collect();
                Atom::new(atom.relation.clone(), args)
            })
            .collect();
        PHSentence { prefix, body }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Relation;

    fn domain() -> Domain {
        Domain::indexed(3)
    }

    fn structure() -> Structure {
        let d = domain();
        let tau = Relation::new("tau_1", 3, d.tuples(3).collect()).unwrap();
        Structure::new(d, vec![tau]).unwrap()
    }

    #[test]
    fn parse_and_print_roundtrip() {
        let d = domain();
        let text = "A x1 E y1 : tau_1(x1,x1,y1) & eq(y1,1)";
        let s = PHSentence::parse(text, &d).unwrap();
        assert_eq!(s.prefix.len(), 2);
        assert_eq!(s.prefix[0], (Quantifier::Forall, "x1".to_string()));
        assert_eq!(s.body.len(), 2);
        assert_eq!(s.body[1].args[1], Arg::Const(1));
        assert_eq!(s.to_text(&d), text);
    }

    #[test]
    fn parse_empty_prefix_ground_sentence() {
        let d = domain();
        let s = PHSentence::parse(": tau_1(0,1,2)", &d).unwrap();
        assert!(s.prefix.is_empty());
        assert_eq!(
            s.body[0].args,
            vec![Arg::Const(0), Arg::Const(1), Arg::Const(2)]
        );
    }

    #[test]
    fn parse_errors() {
        let d = domain();
        assert_eq!(
            PHSentence::parse("A x1 tau_1(x1,x1,x1)", &d).unwrap_err(),
            SentenceError::MissingColon
        );
        assert_eq!(
            PHSentence::parse("A x1 A x1 : tau_1(x1,x1,x1)", &d).unwrap_err(),
            SentenceError::DuplicateVariable("x1".to_string())
        );
        assert_eq!(
            PHSentence::parse("A x1 : tau_1(x1,zz,x1)", &d).unwrap_err(),
            SentenceError::UnknownSymbol("zz".to_string())
        );
        assert!(matches!(
            PHSentence::parse("Q x1 : tau_1(x1,x1,x1)", &d),
            Err(SentenceError::Syntax(_))
        ));
        assert!(matches!(
            PHSentence::parse("A x1 :   ", &d),
            Err(SentenceError::Syntax(_)) | Err(SentenceError::EmptyBody)
        ));
    }

    #[test]
    fn validate_catches_arity_and_scope_problems() {
        let s = structure();
        let d = &s.domain;
        let good = PHSentence::parse("A x : tau_1(x,x,x)", d).unwrap();
        assert!(good.validate(&s).is_empty());

        let bad_arity = PHSentence::parse("A x : tau_1(x,x)", d).unwrap();
        assert_eq!(bad_arity.validate(&s).len(), 1);

        let mut unquantified = good.clone();
        unquantified.body[0].args[0] = Arg::Var("free".to_string());
        assert_eq!(unquantified.validate(&s).len(), 1);

        let unknown = PHSentence::parse("A x : sigma_9(x,x)", d).unwrap();
        assert_eq!(unknown.validate(&s).len(), 1);
    }

    #[test]
    fn pi2_blocks_detection() {
        let d = domain();
        let pi2 = PHSentence::parse("A x A y E z : tau_1(x,y,z)", &d).unwrap();
        assert_eq!(pi2.pi2_blocks(), Some((2, 1)));
        let pure_exists = PHSentence::parse("E z : tau_1(z,z,z)", &d).unwrap();
        assert_eq!(pure_exists.pi2_blocks(), Some((0, 1)));
        assert!(pure_exists.is_existential());
        let pi3 = PHSentence::parse("A x E z A y : tau_1(x,y,z)", &d).unwrap();
        assert_eq!(pi3.pi2_blocks(), None);
    }

    #[test]
    fn substitution_grounds_variables() {
        let d = domain();
        let s = PHSentence::parse("A x E y : tau_1(x,y,y)", &d).unwrap();
        let sub = s.substitute(&BTreeMap::from([("y".to_string(), 2)]));
        assert_eq!(sub.prefix.len(), 1);
        assert_eq!(
            sub.body[0].args,
            vec![Arg::Var("x".to_string()), Arg::Const(2), Arg::Const(2)]
        );
        // variable shadowing: a variable named like a constant stays a variable
        let shadow = PHSentence::parse("A 1 : tau_1(1,1,1)", &d).unwrap();
        assert_eq!(shadow.body[0].args[0], Arg::Var("1".to_string()));
    }
}
