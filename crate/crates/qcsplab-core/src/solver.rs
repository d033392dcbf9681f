//! Sentence semantics and decision procedures: game-semantics evaluation
//! with memoization, backtracking CSP solving with forward checking, the
//! generating-set restriction of the universal block for one-alternation
//! sentences, and the constant-elimination procedure that decides sentences
//! over a tau family by instantiating every existential variable inside the
//! cut intersection.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::forge::{self, CutPair};
use crate::model::{Domain, Element, Structure, Tuple};
use crate::sentence::{Arg, Atom, PHSentence, Quantifier};

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("unknown relation {0:?}")]
    UnknownRelation(String),
    #[error("atom {relation} has {got} arguments, relation arity is {expected}")]
    ArityMismatch {
        relation: String,
        got: usize,
        expected: usize,
    },
    #[error("variable {0:?} appears in the body but not in the prefix")]
    UnquantifiedVariable(String),
    #[error("constant index {index} outside domain of size {size}")]
    ConstantOutOfRange { index: Element, size: usize },
    #[error("evaluation needs {required} assignments, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u64 },
    #[error("the prefix is not purely existential")]
    NotExistential,
    #[error("the prefix is not one universal block followed by one existential block")]
    NotPi2,
    #[error("universe tuple has length {got}, the universal block has {expected} variables")]
    UniverseTupleLength { got: usize, expected: usize },
    #[error("atom {0:?} is neither equality nor a tau relation")]
    NonTauAtom(String),
    #[error("the cut blocks do not intersect")]
    EmptyIntersection,
    #[error(transparent)]
    Forge(#[from] Box<crate::forge::ForgeError>),
}

#[derive(Debug, Clone, Copy)]
pub struct EvalOptions {
    pub budget: u64,
    /// Extract leading universal values witnessing a rejection. Costs a
    /// handful of re-evaluations, so bulk sweeps switch it off.
    pub universal_witness: bool,
    /// Record a universal-tuple -> existential-assignment table for
    /// accepted one-alternation sentences.
    pub pi2_strategy: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            budget: 10_000_000,
            universal_witness: true,
            pi2_strategy: false,
        }
    }
}

/// Responses of the existential player per universal tuple.
pub type Pi2Strategy = BTreeMap<Tuple, BTreeMap<String, Element>>;

/// Evaluation outcome. A rejected sentence carries values for its leading
/// universal block under which the rest of the sentence is already false;
/// substituting them back reproduces the verdict.
#[derive(Debug, Clone)]
pub struct EvalTrace {
    pub verdict: bool,
    pub universal_witness: Option<Vec<(String, Element)>>,
    pub pi2_strategy: Option<Pi2Strategy>,
}

// ---------------------------------------------------------------------------
// compiled sentences

enum RelKind<'a> {
    Eq,
    Ext(&'a BTreeSet<Tuple>),
}

enum CArg {
    Var(usize),
    Const(Element),
}

struct CAtom<'a> {
    rel: RelKind<'a>,
    args: Vec<CArg>,
}

impl CAtom<'_> {
    fn holds(&self, assignment: &[Element]) -> bool {
        let value = |arg: &CArg| match arg {
            CArg::Var(i) => assignment[*i],
            CArg::Const(c) => *c,
        };
        match &self.rel {
            RelKind::Eq => value(&self.args[0]) == value(&self.args[1]),
            RelKind::Ext(ext) => {
                let t = Tuple::new(self.args.iter().map(value).collect());
                ext.contains(&t)
            }
        }
    }

    fn var_positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.args.iter().filter_map(|a| match a {
            CArg::Var(i) => Some(*i),
            CArg::Const(_) => None,
        })
    }
}

struct Compiled<'a> {
    domain_size: usize,
    prefix: Vec<(Quantifier, String)>,
    atoms: Vec<CAtom<'a>>,
    /// `ready[p]` indexes atoms whose variables all sit before prefix
    /// position `p` and whose last variable is at position `p - 1`;
    /// `ready[0]` holds the ground atoms.
    ready: Vec<Vec<usize>>,
    /// `relevant[p]`: assigned positions that still occur in atoms with an
    /// unassigned variable, the memo key at depth `p`.
    relevant: Vec<Vec<usize>>,
}

fn compile<'a>(phi: &PHSentence, s: &'a Structure) -> Result<Compiled<'a>, SolveError> {
    let var_index: BTreeMap<&str, usize> = phi
        .prefix
        .iter()
        .enumerate()
        .map(|(i, (_, v))| (v.as_str(), i))
        .collect();
    let mut atoms = Vec::new();
    for atom in &phi.body {
        let (rel, expected) = if atom.is_equality() {
            (RelKind::Eq, 2)
        } else {
            let r = s
                .relation(&atom.relation)
                .ok_or_else(|| SolveError::UnknownRelation(atom.relation.clone()))?;
            (RelKind::Ext(&r.extension), r.arity)
        };
        if atom.args.len() != expected {
            return Err(SolveError::ArityMismatch {
                relation: atom.relation.clone(),
                got: atom.args.len(),
                expected,
            });
        }
        let mut args = Vec::with_capacity(atom.args.len());
        for arg in &atom.args {
            match arg {
                Arg::Var(v) => {
                    let i = var_index
                        .get(v.as_str())
                        .ok_or_else(|| SolveError::UnquantifiedVariable(v.clone()))?;
                    args.push(CArg::Var(*i));
                }
                Arg::Const(c) => {
                    if *c >= s.domain.size() {
                        return Err(SolveError::ConstantOutOfRange {
                            index: *c,
                            size: s.domain.size(),
                        });
                    }
                    args.push(CArg::Const(*c));
                }
            }
        }
        atoms.push(CAtom { rel, args });
    }

    let vars = phi.prefix.len();
    let mut ready: Vec<Vec<usize>> = vec![Vec::new(); vars + 1];
    for (i, atom) in atoms.iter().enumerate() {
        let level = atom.var_positions().map(|p| p + 1).max().unwrap_or(0);
        ready[level].push(i);
    }
    let mut relevant: Vec<Vec<usize>> = vec![Vec::new(); vars + 1];
    for (p, slot) in relevant.iter_mut().enumerate() {
        let mut set = BTreeSet::new();
        for atom in &atoms {
            let positions: Vec<usize> = atom.var_positions().collect();
            if positions.iter().any(|&q| q >= p) {
                set.extend(positions.iter().filter(|&&q| q < p));
            }
        }
        *slot = set.into_iter().collect();
    }

    Ok(Compiled {
        domain_size: s.domain.size(),
        prefix: phi.prefix.clone(),
        atoms,
        ready,
        relevant,
    })
}

fn required_assignments(domain_size: usize, vars: usize) -> u128 {
    let mut required: u128 = 1;
    for _ in 0..vars {
        required = required.saturating_mul(domain_size as u128);
    }
    required
}

struct Evaluator<'a> {
    c: &'a Compiled<'a>,
    assignment: Vec<Element>,
    memo: HashMap<(usize, Vec<Element>), bool>,
}

impl Evaluator<'_> {
    fn run(&mut self, depth: usize) -> bool {
        for &a in &self.c.ready[depth] {
            if !self.c.atoms[a].holds(&self.assignment) {
                return false;
            }
        }
        if depth == self.c.prefix.len() {
            return true;
        }
        let key_values: Vec<Element> = self.c.relevant[depth]
            .iter()
            .map(|&p| self.assignment[p])
            .collect();
        if let Some(&hit) = self.memo.get(&(depth, key_values.clone())) {
            return hit;
        }
        let quantifier = self.c.prefix[depth].0;
        let mut verdict = quantifier == Quantifier::Forall;
        for value in 0..self.c.domain_size {
            self.assignment[depth] = value;
            let sub = self.run(depth + 1);
            match quantifier {
                Quantifier::Forall if !sub => {
                    verdict = false;
                    break;
                }
                Quantifier::Exists if sub => {
                    verdict = true;
                    break;
                }
                _ => {}
            }
        }
        self.memo.insert((depth, key_values), verdict);
        verdict
    }
}

/// Standard game semantics: a universal variable is a conjunction over the
/// domain, an existential one a disjunction, the body a conjunction of
/// atoms. Memoized on the prefix position and the assigned variables still
/// visible to unassigned atoms.
pub fn evaluate_qcsp(
    phi: &PHSentence,
    s: &Structure,
    opts: &EvalOptions,
) -> Result<EvalTrace, SolveError> {
    let compiled = compile(phi, s)?;
    let required = required_assignments(compiled.domain_size, compiled.prefix.len());
    if required > opts.budget as u128 {
        return Err(SolveError::BudgetExceeded {
            required,
            budget: opts.budget,
        });
    }
    let mut ev = Evaluator {
        c: &compiled,
        assignment: vec![0; compiled.prefix.len()],
        memo: HashMap::new(),
    };
    let verdict = ev.run(0);

    let universal_witness = if verdict || !opts.universal_witness {
        None
    } else {
        Some(extract_leading_witness(phi, s)?)
    };

    let pi2_strategy = if verdict && opts.pi2_strategy {
        pi2_strategy_table(phi, s)?
    } else {
        None
    };

    Ok(EvalTrace {
        verdict,
        universal_witness,
        pi2_strategy,
    })
}

/// Values for the leading universal block under which the remaining
/// sentence stays false, chosen least-first.
fn extract_leading_witness(
    phi: &PHSentence,
    s: &Structure,
) -> Result<Vec<(String, Element)>, SolveError> {
    let mut witness = Vec::new();
    let mut current = phi.clone();
    while let Some((Quantifier::Forall, var)) = current.prefix.first() {
        let var = var.clone();
        let mut found = None;
        for value in 0..s.domain.size() {
            let bound = current.substitute(&BTreeMap::from([(var.clone(), value)]));
            let compiled = compile(&bound, s)?;
            let mut ev = Evaluator {
                c: &compiled,
                assignment: vec![0; compiled.prefix.len()],
                memo: HashMap::new(),
            };
            if !ev.run(0) {
                found = Some((value, bound));
                break;
            }
        }
        let (value, bound) = found.expect("a false conjunction has a false branch");
        witness.push((var, value));
        current = bound;
    }
    Ok(witness)
}

/// Substitute a rejection witness back into the sentence and re-evaluate;
/// the result must still be false for a sound witness.
pub fn replay_universal_witness(
    phi: &PHSentence,
    s: &Structure,
    witness: &[(String, Element)],
    opts: &EvalOptions,
) -> Result<bool, SolveError> {
    let bindings: BTreeMap<String, Element> = witness.iter().cloned().collect();
    let bound = phi.substitute(&bindings);
    let replay_opts = EvalOptions {
        universal_witness: false,
        pi2_strategy: false,
        ..*opts
    };
    Ok(evaluate_qcsp(&bound, s, &replay_opts)?.verdict)
}

fn pi2_strategy_table(phi: &PHSentence, s: &Structure) -> Result<Option<Pi2Strategy>, SolveError> {
    let Some((universals, _)) = phi.pi2_blocks() else {
        return Ok(None);
    };
    let names: Vec<String> = phi
        .prefix
        .iter()
        .take(universals)
        .map(|(_, v)| v.clone())
        .collect();
    let mut table = BTreeMap::new();
    for u in s.domain.tuples(universals) {
        let bindings: BTreeMap<String, Element> = names
            .iter()
            .cloned()
            .zip(u.entries().iter().copied())
            .collect();
        let bound = phi.substitute(&bindings);
        let assignment = solve_csp(&bound, s)?
            .expect("a true one-alternation sentence answers every universal tuple");
        table.insert(u, assignment);
    }
    Ok(Some(table))
}

// ---------------------------------------------------------------------------
// CSP solving

/// Backtracking search with forward checking for purely existential
/// sentences. Variables are assigned in prefix order, values least-first,
/// so the reported assignment is the lexicographically least one.
pub fn solve_csp(
    phi: &PHSentence,
    s: &Structure,
) -> Result<Option<BTreeMap<String, Element>>, SolveError> {
    if !phi.is_existential() {
        return Err(SolveError::NotExistential);
    }
    let compiled = compile(phi, s)?;
    let n = compiled.domain_size;
    let vars = compiled.prefix.len();

    // ground atoms admit no choices at all
    for &a in &compiled.ready[0] {
        if !compiled.atoms[a].holds(&vec![0; vars]) {
            return Ok(None);
        }
    }

    // atoms indexed by every variable they mention
    let mut touching: Vec<Vec<usize>> = vec![Vec::new(); vars];
    for (i, atom) in compiled.atoms.iter().enumerate() {
        let mut seen = BTreeSet::new();
        for p in atom.var_positions() {
            if seen.insert(p) {
                touching[p].push(i);
            }
        }
    }

    struct Search<'a> {
        c: &'a Compiled<'a>,
        touching: &'a [Vec<usize>],
        assignment: Vec<Element>,
        domains: Vec<Vec<bool>>,
    }

    impl Search<'_> {
        /// Check atoms fully assigned at `depth`, then shrink the candidate
        /// sets of later variables against atoms with one unassigned spot.
        fn consistent(&mut self, depth: usize) -> Option<Vec<(usize, Element)>> {
            for &a in &self.touching[depth] {
                let atom = &self.c.atoms[a];
                let unassigned: Vec<usize> = atom.var_positions().filter(|&p| p > depth).collect();
                if unassigned.is_empty() && !atom.holds(&self.assignment) {
                    return None;
                }
            }
            let mut pruned = Vec::new();
            for &a in &self.touching[depth] {
                let atom = &self.c.atoms[a];
                let mut unassigned: Vec<usize> =
                    atom.var_positions().filter(|&p| p > depth).collect();
                unassigned.sort_unstable();
                unassigned.dedup();
                if let [lone] = unassigned[..] {
                    for value in 0..self.domains[lone].len() {
                        if !self.domains[lone][value] {
                            continue;
                        }
                        self.assignment[lone] = value;
                        if !atom.holds(&self.assignment) {
                            self.domains[lone][value] = false;
                            pruned.push((lone, value));
                        }
                    }
                    if self.domains[lone].iter().all(|&alive| !alive) {
                        for &(p, v) in &pruned {
                            self.domains[p][v] = true;
                        }
                        return None;
                    }
                }
            }
            Some(pruned)
        }

        fn search(&mut self, depth: usize) -> bool {
            if depth == self.c.prefix.len() {
                return true;
            }
            for value in 0..self.domains[depth].len() {
                if !self.domains[depth][value] {
                    continue;
                }
                self.assignment[depth] = value;
                if let Some(pruned) = self.consistent(depth) {
                    if self.search(depth + 1) {
                        return true;
                    }
                    for (p, v) in pruned {
                        self.domains[p][v] = true;
                    }
                }
            }
            false
        }
    }

    let mut search = Search {
        c: &compiled,
        touching: &touching,
        assignment: vec![0; vars],
        domains: vec![vec![true; n]; vars],
    };
    if search.search(0) {
        let assignment = compiled
            .prefix
            .iter()
            .enumerate()
            .map(|(i, (_, v))| (v.clone(), search.assignment[i]))
            .collect();
        Ok(Some(assignment))
    } else {
        Ok(None)
    }
}

// ---------------------------------------------------------------------------
// restricted universal block

/// Evaluate a one-alternation sentence with the universal block ranging
/// over `universe` instead of all of A^m. With the full power as universe
/// this coincides with the unrestricted evaluation; shrinking the universe
/// can only flip the verdict toward true.
pub fn evaluate_pi2_restricted(
    phi: &PHSentence,
    s: &Structure,
    universe: &BTreeSet<Tuple>,
) -> Result<bool, SolveError> {
    let Some((universals, _)) = phi.pi2_blocks() else {
        return Err(SolveError::NotPi2);
    };
    let names: Vec<String> = phi
        .prefix
        .iter()
        .take(universals)
        .map(|(_, v)| v.clone())
        .collect();
    for u in universe {
        if u.len() != universals {
            return Err(SolveError::UniverseTupleLength {
                got: u.len(),
                expected: universals,
            });
        }
        let bindings: BTreeMap<String, Element> = names
            .iter()
            .cloned()
            .zip(u.entries().iter().copied())
            .collect();
        let bound = phi.substitute(&bindings);
        if solve_csp(&bound, s)?.is_none() {
            return Ok(false);
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// constant elimination

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Preprocessed {
    False,
    Sentence(PHSentence),
}

enum EqShape {
    VarConst(String, Element),
    VarVar(String, String),
    ConstConst(Element, Element),
}

fn eq_shape(atom: &Atom) -> Option<EqShape> {
    if !atom.is_equality() || atom.args.len() != 2 {
        return None;
    }
    Some(match (&atom.args[0], &atom.args[1]) {
        (Arg::Var(v), Arg::Const(c)) => EqShape::VarConst(v.clone(), *c),
        (Arg::Const(c), Arg::Var(v)) => EqShape::VarConst(v.clone(), *c),
        (Arg::Var(v), Arg::Var(w)) => EqShape::VarVar(v.clone(), w.clone()),
        (Arg::Const(c), Arg::Const(d)) => EqShape::ConstConst(*c, *d),
    })
}

/// Eliminate variable-constant equality atoms. Applied exhaustively, first
/// match wins each round:
///
/// 1. `v = a` with `v` universal: the sentence is false.
/// 2. `v = a` and `v = a'` for distinct constants, `v` existential: false.
/// 3. `v` existential occurring only in equalities with one constant: drop
///    the variable with its atoms.
/// 4. `v` existential with `v = a` and further occurrences: substitute `a`
///    for `v` everywhere and drop the equality.
///
/// Ground equalities produced along the way are decided on the spot. The
/// output contains no variable-constant equality atoms; equalities between
/// two variables are left alone.
pub fn preprocess_constants(phi: &PHSentence) -> Preprocessed {
    let mut current = phi.clone();
    'outer: loop {
        // decide ground equalities
        for (i, atom) in current.body.iter().enumerate() {
            if let Some(EqShape::ConstConst(c, d)) = eq_shape(atom) {
                if c != d {
                    return Preprocessed::False;
                }
                current.body.remove(i);
                continue 'outer;
            }
        }
        // rule 1
        for atom in &current.body {
            if let Some(EqShape::VarConst(v, _)) = eq_shape(atom) {
                if current.quantifier_of(&v) == Some(Quantifier::Forall) {
                    return Preprocessed::False;
                }
            }
        }
        // rule 2
        let mut pinned: BTreeMap<String, Element> = BTreeMap::new();
        for atom in &current.body {
            if let Some(EqShape::VarConst(v, c)) = eq_shape(atom) {
                if let Some(&previous) = pinned.get(&v) {
                    if previous != c {
                        return Preprocessed::False;
                    }
                } else {
                    pinned.insert(v, c);
                }
            }
        }
        // rules 3 and 4, on the first pinned variable
        if let Some((v, c)) = pinned.into_iter().next() {
            let only_equalities = current.body.iter().all(|atom| {
                !atom.mentions(&v)
                    || matches!(eq_shape(atom), Some(EqShape::VarConst(ref w, _)) if *w == v)
            });
            if only_equalities {
                current.prefix.retain(|(_, name)| *name != v);
                current.body.retain(|atom| !atom.mentions(&v));
            } else {
                current.prefix.retain(|(_, name)| *name != v);
                current.body.retain(
                    |atom| !matches!(eq_shape(atom), Some(EqShape::VarConst(ref w, _)) if *w == v),
                );
                current = current.substitute(&BTreeMap::from([(v, c)]));
            }
            continue 'outer;
        }
        return Preprocessed::Sentence(current);
    }
}

/// Eliminate equalities between two variables: the later variable is
/// identified with the earlier one when it is existential, and a later
/// universal variable forced equal to anything makes the sentence false on
/// domains with more than one element.
pub fn eliminate_var_var_equalities(phi: &PHSentence, domain_size: usize) -> Preprocessed {
    let mut current = phi.clone();
    'outer: loop {
        for (i, atom) in current.body.iter().enumerate() {
            if let Some(EqShape::VarVar(v, w)) = eq_shape(atom) {
                if v == w {
                    current.body.remove(i);
                    continue 'outer;
                }
                let pos = |name: &str| {
                    current
                        .prefix
                        .iter()
                        .position(|(_, x)| x == name)
                        .expect("validated sentences quantify every body variable")
                };
                let (earlier, later) = if pos(&v) < pos(&w) { (v, w) } else { (w, v) };
                if current.quantifier_of(&later) == Some(Quantifier::Forall) {
                    if domain_size > 1 {
                        return Preprocessed::False;
                    }
                    current.body.remove(i);
                    continue 'outer;
                }
                // identify: rewrite every occurrence of the later variable
                current.body.remove(i);
                current.prefix.retain(|(_, name)| *name != later);
                for atom in &mut current.body {
                    for arg in &mut atom.args {
                        if matches!(arg, Arg::Var(x) if *x == later) {
                            *arg = Arg::Var(earlier.clone());
                        }
                    }
                }
                continue 'outer;
            }
        }
        return Preprocessed::Sentence(current);
    }
}

/// Decide a sentence whose atoms are equalities and members of the tau
/// family seeded by `cut`: eliminate constants, identify equated variables,
/// instantiate every existential variable to the least element of the cut
/// intersection, and check the remaining purely universal sentence by
/// enumeration.
pub fn decide_tau_qcsp(
    phi: &PHSentence,
    cut: &CutPair,
    d: &Domain,
    opts: &EvalOptions,
) -> Result<bool, SolveError> {
    let pivot = *cut
        .intersection()
        .iter()
        .next()
        .ok_or(SolveError::EmptyIntersection)?;

    // collect the tau indices in play
    let mut needed: BTreeSet<usize> = BTreeSet::new();
    for atom in &phi.body {
        if atom.is_equality() {
            continue;
        }
        match tau_index(&atom.relation) {
            Some(k) => {
                needed.insert(k);
            }
            None => return Err(SolveError::NonTauAtom(atom.relation.clone())),
        }
    }

    let simplified = match preprocess_constants(phi) {
        Preprocessed::False => return Ok(false),
        Preprocessed::Sentence(s) => s,
    };
    let simplified = match eliminate_var_var_equalities(&simplified, d.size()) {
        Preprocessed::False => return Ok(false),
        Preprocessed::Sentence(s) => s,
    };

    let bindings: BTreeMap<String, Element> = simplified
        .prefix
        .iter()
        .filter(|(q, _)| *q == Quantifier::Exists)
        .map(|(_, v)| (v.clone(), pivot))
        .collect();
    let universal = simplified.substitute(&bindings);

    // materialize the tau relations actually mentioned
    let mut relations = Vec::new();
    for &k in &needed {
        let r = forge::build_tau(cut, d, k, opts.budget).map_err(Box::new)?;
        relations.push(r);
    }
    let structure = Structure::new(d.clone(), relations).expect("tau names are distinct");

    let trace = evaluate_qcsp(
        &universal,
        &structure,
        &EvalOptions {
            budget: opts.budget,
            universal_witness: false,
            pi2_strategy: false,
        },
    )?;
    Ok(trace.verdict)
}

/// Parse names of the form `tau_<k>` with k at least 1.
fn tau_index(name: &str) -> Option<usize> {
    let suffix = name.strip_prefix("tau_")?;
    let k: usize = suffix.parse().ok()?;
    (k >= 1).then_some(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forge::{build_rho, build_rho_prime, build_tau};
    use crate::model::Relation;

    fn cut_domain() -> (Domain, CutPair) {
        let d = Domain::indexed(3);
        let cut = CutPair::new(BTreeSet::from([0, 1]), BTreeSet::from([1, 2]), &d).unwrap();
        (d, cut)
    }

    fn rho_structure() -> (Structure, Domain) {
        let (d, cut) = cut_domain();
        let rho = build_rho(&cut, &d);
        let rho_prime = build_rho_prime(&cut, &d);
        let mut tau_1 = build_tau(&cut, &d, 1, 1 << 20).unwrap();
        tau_1.name = "tau_1".to_string();
        let s = Structure::new(d.clone(), vec![rho, rho_prime, tau_1]).unwrap();
        (s, d)
    }

    #[test]
    fn forall_exists_rho_diagonal() {
        let (s, d) = rho_structure();
        let phi = PHSentence::parse("A x E y : rho(x,y)", &d).unwrap();
        let trace = evaluate_qcsp(&phi, &s, &EvalOptions::default()).unwrap();
        assert!(trace.verdict);
        assert!(trace.universal_witness.is_none());
    }

    #[test]
    fn forall_forall_rho_fails_with_least_witness() {
        let (s, d) = rho_structure();
        let phi = PHSentence::parse("A x A y : rho(x,y)", &d).unwrap();
        let trace = evaluate_qcsp(&phi, &s, &EvalOptions::default()).unwrap();
        assert!(!trace.verdict);
        let witness = trace.universal_witness.unwrap();
        assert_eq!(witness, vec![("x".to_string(), 0), ("y".to_string(), 2)]);
        // replaying the witness keeps the sentence false
        assert!(!replay_universal_witness(&phi, &s, &witness, &EvalOptions::default()).unwrap());
    }

    #[test]
    fn diagonal_tau_is_universally_true() {
        let (s, d) = rho_structure();
        let phi = PHSentence::parse("A x : tau_1(x,x,x)", &d).unwrap();
        assert!(
            evaluate_qcsp(&phi, &s, &EvalOptions::default())
                .unwrap()
                .verdict
        );
    }

    #[test]
    fn budget_guard_trips() {
        let (s, d) = rho_structure();
        let phi = PHSentence::parse("A x A y A z : tau_1(x,y,z)", &d).unwrap();
        let opts = EvalOptions {
            budget: 10,
            ..EvalOptions::default()
        };
        let err = evaluate_qcsp(&phi, &s, &opts).unwrap_err();
        assert!(matches!(
            err,
            SolveError::BudgetExceeded { required: 27, .. }
        ));
    }

    #[test]
    fn unknown_relation_is_an_error() {
        let (s, d) = rho_structure();
        let phi = PHSentence::parse("A x : zeta(x,x)", &d).unwrap();
        assert!(matches!(
            evaluate_qcsp(&phi, &s, &EvalOptions::default()),
            Err(SolveError::UnknownRelation(_))
        ));
    }

    #[test]
    fn csp_finds_least_assignment() {
        let (s, d) = rho_structure();
        let phi = PHSentence::parse("E x E y : rho(x,y)", &d).unwrap();
        let assignment = solve_csp(&phi, &s).unwrap().unwrap();
        assert_eq!(assignment["x"], 0);
        assert_eq!(assignment["y"], 0);
        let universal = PHSentence::parse("A x : rho(x,x)", &d).unwrap();
        assert!(matches!(
            solve_csp(&universal, &s),
            Err(SolveError::NotExistential)
        ));
    }

    #[test]
    fn csp_detects_clashing_constants() {
        let (s, d) = rho_structure();
        let phi = PHSentence::parse("E x : eq(x,0) & eq(x,1)", &d).unwrap();
        assert!(solve_csp(&phi, &s).unwrap().is_none());
    }

    #[test]
    fn pi2_restriction_with_full_universe_matches_plain_evaluation() {
        let (s, d) = rho_structure();
        for text in [
            "A x A y E z : rho(x,z) & rho(y,z)",
            "A x E y : rho(x,y) & rho(y,x)",
            "A x A y : rho(x,y)",
        ] {
            let phi = PHSentence::parse(text, &d).unwrap();
            let m = phi.pi2_blocks().unwrap().0;
            let full: BTreeSet<Tuple> = d.tuples(m).collect();
            let restricted = evaluate_pi2_restricted(&phi, &s, &full).unwrap();
            let plain = evaluate_qcsp(&phi, &s, &EvalOptions::default())
                .unwrap()
                .verdict;
            assert_eq!(restricted, plain, "{text}");
        }
    }

    #[test]
    fn pi2_restriction_edges() {
        let (s, d) = rho_structure();
        let phi = PHSentence::parse("A x A y : rho(x,y)", &d).unwrap();
        // the empty universe is an empty conjunction
        assert!(evaluate_pi2_restricted(&phi, &s, &BTreeSet::new()).unwrap());
        let wrong = BTreeSet::from([Tuple::new(vec![0])]);
        assert!(matches!(
            evaluate_pi2_restricted(&phi, &s, &wrong),
            Err(SolveError::UniverseTupleLength { .. })
        ));
        let pi3 = PHSentence::parse("A x E y A z : rho(x,y)", &d).unwrap();
        assert!(matches!(
            evaluate_pi2_restricted(&pi3, &s, &BTreeSet::new()),
            Err(SolveError::NotPi2)
        ));
    }

    #[test]
    fn pi2_strategy_table_is_recorded() {
        let (s, d) = rho_structure();
        let phi = PHSentence::parse("A x E y : rho(x,y)", &d).unwrap();
        let opts = EvalOptions {
            budget: 1 << 20,
            pi2_strategy: true,
            ..EvalOptions::default()
        };
        let trace = evaluate_qcsp(&phi, &s, &opts).unwrap();
        let table = trace.pi2_strategy.unwrap();
        assert_eq!(table.len(), 3);
        for (u, response) in &table {
            let y = response["y"];
            let pair = Tuple::new(vec![u.get(0), y]);
            assert!(s.relation("rho").unwrap().contains(&pair));
        }
    }

    #[test]
    fn preprocessing_rules_fire_in_order() {
        let d = Domain::indexed(3);
        // universal pinned variable
        let phi = PHSentence::parse("A x : eq(x,0) & tau_1(x,x,x)", &d).unwrap();
        assert_eq!(preprocess_constants(&phi), Preprocessed::False);
        // clashing constants on an existential variable
        let phi = PHSentence::parse("E x : eq(x,0) & eq(x,1)", &d).unwrap();
        assert_eq!(preprocess_constants(&phi), Preprocessed::False);
        // lone equality variable disappears
        let phi = PHSentence::parse("E x E y : eq(x,1) & tau_1(y,y,y)", &d).unwrap();
        match preprocess_constants(&phi) {
            Preprocessed::Sentence(out) => {
                assert_eq!(out.prefix.len(), 1);
                assert_eq!(out.body.len(), 1);
                assert_eq!(out.body[0].relation, "tau_1");
            }
            other => panic!("unexpected {other:?}"),
        }
        // substitution grounds the relation atom
        let phi = PHSentence::parse("E x E y : eq(x,1) & tau_1(x,y,y)", &d).unwrap();
        match preprocess_constants(&phi) {
            Preprocessed::Sentence(out) => {
                assert_eq!(out.prefix.len(), 1);
                assert_eq!(out.body.len(), 1);
                assert_eq!(out.body[0].args[0], Arg::Const(1));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn var_var_elimination_identifies_or_rejects() {
        let d = Domain::indexed(2);
        let phi = PHSentence::parse("A x E y : eq(x,y) & tau_1(x,y,y)", &d).unwrap();
        match eliminate_var_var_equalities(&phi, 2) {
            Preprocessed::Sentence(out) => {
                assert_eq!(out.prefix.len(), 1);
                assert!(out.body.iter().all(|a| !a.is_equality()));
            }
            other => panic!("unexpected {other:?}"),
        }
        // a later universal variable cannot be pinned
        let phi = PHSentence::parse("E y A x : eq(x,y)", &d).unwrap();
        assert_eq!(eliminate_var_var_equalities(&phi, 2), Preprocessed::False);
        // reflexive equalities evaporate
        let phi = PHSentence::parse("A x : eq(x,x)", &d).unwrap();
        match eliminate_var_var_equalities(&phi, 2) {
            Preprocessed::Sentence(out) => assert!(out.body.is_empty()),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn decide_tau_examples() {
        let (d, cut) = cut_domain();
        let opts = EvalOptions::default();
        // instantiating y inside the intersection answers every x
        let phi = PHSentence::parse("A x E y : tau_1(x,x,y)", &d).unwrap();
        assert!(decide_tau_qcsp(&phi, &cut, &d, &opts).unwrap());
        // the all-universal triple fails on a mixed tuple
        let phi = PHSentence::parse("A x A y A z : tau_1(x,y,z)", &d).unwrap();
        assert!(!decide_tau_qcsp(&phi, &cut, &d, &opts).unwrap());
        // preprocessing rejects a pinned universal before instantiation
        let phi = PHSentence::parse("A x E y : eq(x,0) & tau_1(x,y,y)", &d).unwrap();
        assert!(!decide_tau_qcsp(&phi, &cut, &d, &opts).unwrap());
        // non-tau relation atoms are refused
        let phi = PHSentence::parse("A x : rho(x,x)", &d).unwrap();
        assert!(matches!(
            decide_tau_qcsp(&phi, &cut, &d, &opts),
            Err(SolveError::NonTauAtom(_))
        ));
    }

    #[test]
    fn decide_tau_agrees_with_evaluation_on_spot_checks() {
        let (d, cut) = cut_domain();
        let tau_1 = build_tau(&cut, &d, 1, 1 << 20).unwrap();
        let s = Structure::new(d.clone(), vec![tau_1]).unwrap();
        let opts = EvalOptions::default();
        for text in [
            "A x E y : tau_1(x,x,y)",
            "A x A y A z : tau_1(x,y,z)",
            "E x E y : tau_1(x,y,x)",
            "A x E y : tau_1(x,y,y) & eq(y,1)",
            "A x E y : eq(x,y) & tau_1(x,y,y)",
        ] {
            let phi = PHSentence::parse(text, &d).unwrap();
            let direct = evaluate_qcsp(&phi, &s, &opts).unwrap().verdict;
            let decided = decide_tau_qcsp(&phi, &cut, &d, &opts).unwrap();
            assert_eq!(direct, decided, "{text}");
        }
    }

    #[test]
    fn memoized_evaluation_matches_on_structures_with_equality() {
        let d = Domain::indexed(2);
        let le = Relation::new(
            "le",
            2,
            BTreeSet::from([
                Tuple::new(vec![0, 0]),
                Tuple::new(vec![0, 1]),
                Tuple::new(vec![1, 1]),
            ]),
        )
        .unwrap();
        let s = Structure::new(d.clone(), vec![le]).unwrap();
        let phi = PHSentence::parse("A x E y A z E w : le(x,y) & le(z,w) & le(x,w)", &d).unwrap();
        assert!(
            evaluate_qcsp(&phi, &s, &EvalOptions::default())
                .unwrap()
                .verdict
        );
        let phi = PHSentence::parse("A x E y : le(y,x) & le(x,y) & eq(x,y)", &d).unwrap();
        assert!(
            evaluate_qcsp(&phi, &s, &EvalOptions::default())
                .unwrap()
                .verdict
        );
    }
}
