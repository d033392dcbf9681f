//! Gadget constructions and reductions: the two-block relations rho and
//! rho', their k-fold disjunctions sigma_k and tau_k, the definability of
//! tau_k from sigma_k conjunctions, the compiler from monotone
//! not-all-equal satisfiability into universally quantified tau sentences,
//! and the canonical sentences over product structures used for the
//! truncated-signature experiments.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::dnf::{DnfAtom, DnfFormula};
use crate::model::{Domain, Element, Relation, Structure, Tuple};
use crate::sentence::{Arg, Atom, PHSentence, Quantifier};
use crate::solver::{self, EvalOptions, SolveError};

#[derive(Debug, Error)]
pub enum ForgeError {
    #[error("invalid cut: {0}")]
    InvalidCut(String),
    #[error("materializing the extension needs {required} tuples, budget is {budget}")]
    ExtensionBudget {
        required: u128,
        budget: u64,
        dnf: DnfFormula,
    },
    #[error("construction needs {required} steps, budget is {budget}")]
    Budget { required: u128, budget: u64 },
    #[error("line {line}: {message}")]
    NaeSyntax { line: usize, message: String },
    #[error("clause variable {name:?} is not declared")]
    UnknownNaeVariable { name: String },
    #[error("an instance without clauses has nothing to reduce")]
    EmptyInstance,
    #[error("the reduction needs both cut differences nonempty, {side} is empty")]
    CutNotSplit { side: String },
    #[error("adversaries must be nonempty sets of tuples")]
    EmptyAdversary,
    #[error("adversary tuple has length {got}, expected {expected}")]
    AdversaryTupleLength { got: usize, expected: usize },
    #[error("degenerate adversary set: constants {first} and {second} coincide")]
    DegenerateAdversary { first: String, second: String },
    #[error("structure has no family named {0:?}")]
    UnknownFamily(String),
    #[error(transparent)]
    Solve(#[from] Box<SolveError>),
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
}

// ---------------------------------------------------------------------------
// cut pairs

/// Two strict subsets of the domain covering it. Strictness already forces
/// both differences to be nonempty; the intersection may or may not be.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutPair {
    alpha: BTreeSet<Element>,
    beta: BTreeSet<Element>,
}

impl CutPair {
    pub fn new(
        alpha: BTreeSet<Element>,
        beta: BTreeSet<Element>,
        d: &Domain,
    ) -> Result<Self, ForgeError> {
        let cut = CutPair { alpha, beta };
        match cut.check_against(d).into_iter().next() {
            None => Ok(cut),
            Some(problem) => Err(ForgeError::InvalidCut(problem)),
        }
    }

    /// Every way the pair fails to be a cut of `d`, as data.
    pub fn check_against(&self, d: &Domain) -> Vec<String> {
        let mut problems = Vec::new();
        let n = d.size();
        for (name, block) in [("alpha", &self.alpha), ("beta", &self.beta)] {
            if block.is_empty() {
                problems.push(format!("{name} is empty"));
            }
            if block.len() >= n {
                problems.push(format!("{name} is not a strict subset"));
            }
            for &e in block {
                if e >= n {
                    problems.push(format!("{name} mentions element {e} outside the domain"));
                }
            }
        }
        if self.alpha.union(&self.beta).count() < n {
            problems.push("the blocks do not cover the domain".to_string());
        }
        problems
    }

    pub fn alpha(&self) -> &BTreeSet<Element> {
        &self.alpha
    }

    pub fn beta(&self) -> &BTreeSet<Element> {
        &self.beta
    }

    pub fn intersects(&self) -> bool {
        !self.intersection().is_empty()
    }

    pub fn intersection(&self) -> BTreeSet<Element> {
        self.alpha.intersection(&self.beta).copied().collect()
    }

    pub fn alpha_minus_beta(&self) -> BTreeSet<Element> {
        self.alpha.difference(&self.beta).copied().collect()
    }

    pub fn beta_minus_alpha(&self) -> BTreeSet<Element> {
        self.beta.difference(&self.alpha).copied().collect()
    }

    /// Parse `a,b:c,d` where the halves list element names.
    pub fn parse(text: &str, d: &Domain) -> Result<Self, ForgeError> {
        let Some((alpha_text, beta_text)) = text.split_once(':') else {
            return Err(ForgeError::InvalidCut(
                "expected 'names:names' separated by a colon".to_string(),
            ));
        };
        let read = |part: &str| -> Result<BTreeSet<Element>, ForgeError> {
            part.split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(|name| {
                    d.index_of(name)
                        .ok_or_else(|| ForgeError::InvalidCut(format!("unknown element {name:?}")))
                })
                .collect()
        };
        CutPair::new(read(alpha_text)?, read(beta_text)?, d)
    }

    pub fn to_text(&self, d: &Domain) -> String {
        let side = |block: &BTreeSet<Element>| {
            block
                .iter()
                .map(|&e| d.name(e).to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        format!("{}:{}", side(&self.alpha), side(&self.beta))
    }

    /// All ordered cut pairs over `d`, lexicographic by block contents.
    pub fn enumerate_all(d: &Domain) -> Vec<CutPair> {
        let n = d.size();
        let mut cuts = Vec::new();
        for alpha_mask in 1u32..(1 << n) {
            for beta_mask in 1u32..(1 << n) {
                if alpha_mask | beta_mask != (1 << n) - 1 {
                    continue;
                }
                if alpha_mask == (1 << n) - 1 || beta_mask == (1 << n) - 1 {
                    continue;
                }
                let block = |mask: u32| (0..n).filter(|&e| mask & (1 << e) != 0).collect();
                cuts.push(CutPair {
                    alpha: block(alpha_mask),
                    beta: block(beta_mask),
                });
            }
        }
        cuts
    }
}

// ---------------------------------------------------------------------------
// relation families

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Sigma,
    Tau,
}

/// A parameterized relation family, the finite stand-in for an infinite
/// signature: instantiating at k yields `<name>_<k>` of arity 2k (sigma)
/// or 3k (tau).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilySpec {
    pub name: String,
    pub kind: FamilyKind,
    pub cut: CutPair,
}

impl FamilySpec {
    pub fn instantiate(&self, d: &Domain, k: usize, budget: u64) -> Result<Relation, ForgeError> {
        let mut r = match self.kind {
            FamilyKind::Sigma => build_sigma(&self.cut, d, k, budget)?,
            FamilyKind::Tau => build_tau(&self.cut, d, k, budget)?,
        };
        r.name = format!("{}_{}", self.name, k);
        Ok(r)
    }
}

// ---------------------------------------------------------------------------
// gadget relations

fn block_product_dnf(blocks: &[&BTreeSet<Element>], width: usize, copies: usize) -> DnfFormula {
    // one disjunct of constant atoms per point of each block power, copy i
    // living on coordinates [width*i, width*(i+1))
    let mut disjuncts = Vec::new();
    for copy in 0..copies {
        let offset = width * copy;
        for block in blocks {
            let members: Vec<Element> = block.iter().copied().collect();
            let mut selection = vec![0usize; width];
            loop {
                let disjunct: Vec<DnfAtom> = (0..width)
                    .map(|q| DnfAtom::VarEqConst(offset + q, members[selection[q]]))
                    .collect();
                disjuncts.push(disjunct);
                let mut done = true;
                for slot in (0..width).rev() {
                    if selection[slot] + 1 < members.len() {
                        selection[slot] += 1;
                        selection[slot + 1..].fill(0);
                        done = false;
                        break;
                    }
                }
                if done {
                    break;
                }
            }
        }
    }
    DnfFormula::new(width * copies, disjuncts).expect("blocks are nonempty")
}

/// The binary union of block squares: alpha x alpha together with
/// beta x beta, with its constant-atom DNF.
pub fn build_rho(cut: &CutPair, d: &Domain) -> Relation {
    let dnf = block_product_dnf(&[&cut.alpha, &cut.beta], 2, 1);
    Relation::from_dnf("rho", dnf, d)
}

/// The ternary analogue: alpha^3 union beta^3.
pub fn build_rho_prime(cut: &CutPair, d: &Domain) -> Relation {
    let dnf = block_product_dnf(&[&cut.alpha, &cut.beta], 3, 1);
    Relation::from_dnf("rho_prime", dnf, d)
}

/// DNF of sigma_k: k shifted copies of the rho disjuncts, linear in k.
pub fn sigma_dnf(cut: &CutPair, k: usize) -> DnfFormula {
    block_product_dnf(&[&cut.alpha, &cut.beta], 2, k)
}

/// DNF of tau_k: k shifted copies of the rho' disjuncts, linear in k.
pub fn tau_dnf(cut: &CutPair, k: usize) -> DnfFormula {
    block_product_dnf(&[&cut.alpha, &cut.beta], 3, k)
}

fn build_family_member(
    name: String,
    dnf: DnfFormula,
    d: &Domain,
    budget: u64,
) -> Result<Relation, ForgeError> {
    let required = d.tuple_count(dnf.arity());
    if required > budget as u128 {
        return Err(ForgeError::ExtensionBudget {
            required,
            budget,
            dnf,
        });
    }
    Ok(Relation::from_dnf(name, dnf, d))
}

/// sigma_k of arity 2k: some coordinate pair lands in rho. The DNF always
/// exists; the extension is materialized only within budget.
pub fn build_sigma(
    cut: &CutPair,
    d: &Domain,
    k: usize,
    budget: u64,
) -> Result<Relation, ForgeError> {
    build_family_member(format!("sigma_{k}"), sigma_dnf(cut, k), d, budget)
}

/// tau_k of arity 3k: some coordinate triple lands in rho'.
pub fn build_tau(cut: &CutPair, d: &Domain, k: usize, budget: u64) -> Result<Relation, ForgeError> {
    build_family_member(format!("tau_{k}"), tau_dnf(cut, k), d, budget)
}

/// The relation defined by conjoining, over every way of choosing two of
/// each coordinate triple, the sigma_k instance on the chosen pairs.
/// Extensionally this reproduces tau_k; the comparison is the point.
pub fn tau_via_sigma_conjunction(
    cut: &CutPair,
    d: &Domain,
    k: usize,
    budget: u64,
) -> Result<Relation, ForgeError> {
    let arity = 3 * k;
    let sweep = d.tuple_count(arity);
    let instances = 3u128.saturating_pow(k as u32);
    let required = sweep.saturating_mul(instances);
    if required > budget as u128 {
        return Err(ForgeError::Budget { required, budget });
    }
    let rho = build_rho(cut, d);

    // choice c per triple: 0 picks (x,y), 1 picks (y,z), 2 picks (x,z)
    let mut choices: Vec<Vec<usize>> = Vec::new();
    let mut current = vec![0usize; k];
    loop {
        choices.push(current.clone());
        let mut done = true;
        for slot in (0..k).rev() {
            if current[slot] + 1 < 3 {
                current[slot] += 1;
                current[slot + 1..].fill(0);
                done = false;
                break;
            }
        }
        if done {
            break;
        }
    }

    let extension = d
        .tuples(arity)
        .filter(|t| {
            choices.iter().all(|choice| {
                (0..k).any(|i| {
                    let (p, q) = match choice[i] {
                        0 => (3 * i, 3 * i + 1),
                        1 => (3 * i + 1, 3 * i + 2),
                        _ => (3 * i, 3 * i + 2),
                    };
                    rho.contains(&Tuple::new(vec![t.get(p), t.get(q)]))
                })
            })
        })
        .collect();
    Ok(Relation::new(
        format!("tau_{k}_via_sigma"),
        arity,
        extension,
    )?)
}

// ---------------------------------------------------------------------------
// not-all-equal satisfiability

/// A monotone instance: positive clauses of exactly three variables,
/// repetition allowed both within a clause and across clauses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NaeInstance {
    vars: Vec<String>,
    clauses: Vec<[String; 3]>,
}

impl NaeInstance {
    pub fn new(vars: Vec<String>, clauses: Vec<[String; 3]>) -> Result<Self, ForgeError> {
        let declared: BTreeSet<&String> = vars.iter().collect();
        for clause in &clauses {
            for v in clause {
                if !declared.contains(v) {
                    return Err(ForgeError::UnknownNaeVariable { name: v.clone() });
                }
            }
        }
        Ok(NaeInstance { vars, clauses })
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn clauses(&self) -> &[[String; 3]] {
        &self.clauses
    }
}

/// One clause per line, three whitespace-separated variable names; `#`
/// starts a comment. Variables are declared by first appearance.
pub fn parse_naesat(text: &str) -> Result<NaeInstance, ForgeError> {
    let mut vars: Vec<String> = Vec::new();
    let mut clauses = Vec::new();
    for (i, raw_line) in text.lines().enumerate() {
        let line = match raw_line.find('#') {
            Some(cut) => &raw_line[..cut],
            None => raw_line,
        };
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        if tokens.len() != 3 {
            return Err(ForgeError::NaeSyntax {
                line: i + 1,
                message: format!("expected three variables, found {}", tokens.len()),
            });
        }
        for t in &tokens {
            if !vars.iter().any(|v| v == t) {
                vars.push(t.to_string());
            }
        }
        clauses.push([
            tokens[0].to_string(),
            tokens[1].to_string(),
            tokens[2].to_string(),
        ]);
    }
    Ok(NaeInstance { vars, clauses })
}

/// Brute-force satisfiability: some 0/1 assignment leaves every clause
/// non-constant.
pub fn brute_naesat(inst: &NaeInstance) -> bool {
    let m = inst.vars.len();
    assert!(m < 64, "brute force is for desk-sized instances");
    let index: BTreeMap<&String, usize> =
        inst.vars.iter().enumerate().map(|(i, v)| (v, i)).collect();
    (0u64..(1 << m)).any(|mask| {
        inst.clauses.iter().all(|clause| {
            let bits: Vec<bool> = clause.iter().map(|v| mask & (1 << index[v]) != 0).collect();
            !(bits[0] == bits[1] && bits[1] == bits[2])
        })
    })
}

/// Compile an instance into a universally quantified tau_k sentence over a
/// structure holding tau_k, where k is the clause count and the i-th
/// coordinate triple carries the i-th clause. The instance is satisfiable
/// exactly when the sentence is false.
pub fn reduce_naesat_to_qcsp(
    inst: &NaeInstance,
    cut: &CutPair,
    d: &Domain,
    budget: u64,
) -> Result<(PHSentence, Structure), ForgeError> {
    if cut.alpha_minus_beta().is_empty() {
        return Err(ForgeError::CutNotSplit {
            side: "alpha minus beta".to_string(),
        });
    }
    if cut.beta_minus_alpha().is_empty() {
        return Err(ForgeError::CutNotSplit {
            side: "beta minus alpha".to_string(),
        });
    }
    let k = inst.clauses.len();
    if k == 0 {
        return Err(ForgeError::EmptyInstance);
    }
    let tau = build_tau(cut, d, k, budget)?;
    let prefix: Vec<(Quantifier, String)> = inst
        .vars
        .iter()
        .map(|v| (Quantifier::Forall, v.clone()))
        .collect();
    let args: Vec<Arg> = inst
        .clauses
        .iter()
        .flat_map(|clause| clause.iter().map(|v| Arg::Var(v.clone())))
        .collect();
    let body = vec![Atom::new(tau.name.clone(), args)];
    let sentence = PHSentence::new(prefix, body);
    let structure = Structure::new(d.clone(), vec![tau])?;
    Ok((sentence, structure))
}

// ---------------------------------------------------------------------------
// canonical sentences over product structures

/// A set of same-length adversaries restricting universal play.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdversarySet {
    m: usize,
    adversaries: Vec<BTreeSet<Tuple>>,
}

impl AdversarySet {
    pub fn new(m: usize, adversaries: Vec<BTreeSet<Tuple>>) -> Result<Self, ForgeError> {
        for adversary in &adversaries {
            if adversary.is_empty() {
                return Err(ForgeError::EmptyAdversary);
            }
            for t in adversary {
                if t.len() != m {
                    return Err(ForgeError::AdversaryTupleLength {
                        got: t.len(),
                        expected: m,
                    });
                }
            }
        }
        Ok(AdversarySet { m, adversaries })
    }

    /// The single unrestricted adversary A^m.
    pub fn full(d: &Domain, m: usize) -> Self {
        AdversarySet {
            m,
            adversaries: vec![d.tuples(m).collect()],
        }
    }

    /// The single adversary of tuples with at most k switches.
    pub fn switches(d: &Domain, m: usize, k: usize) -> Self {
        AdversarySet {
            m,
            adversaries: vec![crate::powers::switch_tuples(d, m, k)],
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn adversaries(&self) -> &[BTreeSet<Tuple>] {
        &self.adversaries
    }
}

/// The canonical sentence of a structure against an adversary set, plus
/// the shape data the construction pins down.
#[derive(Debug, Clone)]
pub struct CanonicalBuild {
    pub sentence: PHSentence,
    pub universal_vars: Vec<String>,
    pub existential_vars: Vec<String>,
    pub factor_count: usize,
    pub product_size: usize,
    pub atom_count: usize,
}

/// Grid maps compatible with one adversary: assignments [n] x [m] -> A
/// whose every column selection lands in the adversary.
fn consistent_maps(d: &Domain, m: usize, adversary: &BTreeSet<Tuple>) -> Vec<Vec<Element>> {
    let n = d.size();
    let mut maps = Vec::new();
    // a map is a table indexed by (row, column) as row * m + column
    for candidate in d.tuples(n * m) {
        let table = candidate.entries();
        let ok = d.tuples(m).all(|rows| {
            let picked: Vec<Element> = (0..m).map(|j| table[rows.get(j) * m + j]).collect();
            adversary.contains(&Tuple::new(picked))
        });
        if ok {
            maps.push(table.to_vec());
        }
    }
    maps
}

/// Build the canonical sentence: one variable per element of the product of
/// the constant-expanded copies of the structure, one atom per product
/// relation tuple, with the grid constants promoted to outermost universal
/// variables and everything else existential.
pub fn build_canonical_sentence(
    s: &Structure,
    omega: &AdversarySet,
    budget: u64,
) -> Result<CanonicalBuild, ForgeError> {
    let d = &s.domain;
    let n = d.size();
    let m = omega.m;

    // the map enumeration itself sweeps n^(n*m) grids against n^m columns
    let map_sweep = d
        .tuple_count(n * m)
        .saturating_mul(d.tuple_count(m))
        .saturating_mul(omega.adversaries.len() as u128);
    if map_sweep > budget as u128 {
        return Err(ForgeError::Budget {
            required: map_sweep,
            budget,
        });
    }

    let mut factors: Vec<Vec<Element>> = Vec::new();
    for adversary in &omega.adversaries {
        factors.extend(consistent_maps(d, m, adversary));
    }
    let f = factors.len();

    let product_size = {
        let mut size: u128 = 1;
        for _ in 0..f {
            size = size.saturating_mul(n as u128);
        }
        size
    };
    if product_size > budget as u128 {
        return Err(ForgeError::Budget {
            required: product_size,
            budget,
        });
    }
    let product_size = product_size as usize;

    let mut atom_total: u128 = 0;
    for r in &s.relations {
        let mut per_relation: u128 = 1;
        for _ in 0..f {
            per_relation = per_relation.saturating_mul(r.extension.len() as u128);
        }
        atom_total = atom_total.saturating_add(per_relation);
    }
    if atom_total > budget as u128 {
        return Err(ForgeError::Budget {
            required: atom_total,
            budget,
        });
    }

    // rank of a product element, coordinates most significant first
    let rank = |coords: &[Element]| -> usize { coords.iter().fold(0, |acc, &e| acc * n + e) };
    let element_name = |coords: &[Element]| -> String {
        let digits: Vec<String> = coords.iter().map(|e| e.to_string()).collect();
        format!("x{}", digits.join("_"))
    };

    // constants c_(i,j) in (i, j) lexicographic order
    let mut constant_rank: BTreeMap<usize, String> = BTreeMap::new();
    let mut universal_vars = Vec::new();
    for i in 0..n {
        for j in 0..m {
            let coords: Vec<Element> = factors.iter().map(|mu| mu[i * m + j]).collect();
            let r = rank(&coords);
            let name = format!("w_{}_{}", i + 1, j + 1);
            if let Some(existing) = constant_rank.get(&r) {
                return Err(ForgeError::DegenerateAdversary {
                    first: existing.clone(),
                    second: name,
                });
            }
            constant_rank.insert(r, name.clone());
            universal_vars.push(name);
        }
    }

    // variable per product element, lexicographic on coordinate vectors
    let mut var_names: Vec<String> = Vec::with_capacity(product_size);
    let mut existential_vars = Vec::new();
    if f == 0 {
        // the empty product has a single element
        let name = match constant_rank.get(&0) {
            Some(w) => w.clone(),
            None => {
                let name = "x".to_string();
                existential_vars.push(name.clone());
                name
            }
        };
        var_names.push(name);
    } else {
        for coords in crate::model::TupleIter::new(n, f) {
            let r = rank(coords.entries());
            match constant_rank.get(&r) {
                Some(w) => var_names.push(w.clone()),
                None => {
                    let name = element_name(coords.entries());
                    existential_vars.push(name.clone());
                    var_names.push(name);
                }
            }
        }
    }

    let mut prefix: Vec<(Quantifier, String)> = universal_vars
        .iter()
        .map(|w| (Quantifier::Forall, w.clone()))
        .collect();
    prefix.extend(
        existential_vars
            .iter()
            .map(|x| (Quantifier::Exists, x.clone())),
    );

    // one atom per tuple of each product relation: pick one member row per
    // factor, coordinate q of the product tuple reads column q across rows
    let mut body = Vec::new();
    for r in &s.relations {
        let rows: Vec<&Tuple> = r.extension.iter().collect();
        if rows.is_empty() {
            continue;
        }
        let mut selection = vec![0usize; f];
        loop {
            let args: Vec<Arg> = (0..r.arity)
                .map(|q| {
                    let coords: Vec<Element> = selection.iter().map(|&p| rows[p].get(q)).collect();
                    Arg::Var(var_names[rank(&coords)].clone())
                })
                .collect();
            body.push(Atom::new(r.name.clone(), args));
            let mut done = true;
            for slot in (0..f).rev() {
                if selection[slot] + 1 < rows.len() {
                    selection[slot] += 1;
                    selection[slot + 1..].fill(0);
                    done = false;
                    break;
                }
            }
            if done {
                break;
            }
        }
    }

    let atom_count = body.len();
    Ok(CanonicalBuild {
        sentence: PHSentence::new(prefix, body),
        universal_vars,
        existential_vars,
        factor_count: f,
        product_size,
        atom_count,
    })
}

// ---------------------------------------------------------------------------
// truncated-signature probe

#[derive(Debug, Clone, Serialize)]
pub struct CompactnessRow {
    pub k: usize,
    pub verdict: bool,
    pub atom_count: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessRow {
    /// Universal assignment, rendered variable = element name.
    pub universal: Vec<(String, String)>,
    /// Least existential response at the deepest truncation, if any.
    pub witness: Option<Vec<(String, String)>>,
    /// Whether that response also answers every shallower truncation.
    pub recurs: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompactnessReport {
    pub rows: Vec<CompactnessRow>,
    /// Truth at the deepest truncation implies truth at every truncation.
    pub forward_monotone: bool,
    /// Some single existential response per universal assignment answers
    /// every truncation; absent when the deepest truncation is false.
    pub witness_stable: Option<bool>,
    pub witness_table: Vec<WitnessRow>,
}

/// Evaluate the canonical sentence of each truncation `{family_1, ...,
/// family_K}` and record whether one existential response per universal
/// assignment survives across all of them.
pub fn reduct_compactness_probe(
    s: &Structure,
    family_name: &str,
    omega: &AdversarySet,
    k_max: usize,
    budget: u64,
) -> Result<CompactnessReport, ForgeError> {
    let family = s
        .family(family_name)
        .ok_or_else(|| ForgeError::UnknownFamily(family_name.to_string()))?
        .clone();
    let d = s.domain.clone();
    probe_truncations(s, omega, k_max, budget, |k| {
        family.instantiate(&d, k, budget)
    })
}

/// The probe over any indexed family of relations; the public entry point
/// instantiates a declared family, tests may pass arbitrary generators.
pub fn probe_truncations(
    s: &Structure,
    omega: &AdversarySet,
    k_max: usize,
    budget: u64,
    instantiate: impl Fn(usize) -> Result<Relation, ForgeError>,
) -> Result<CompactnessReport, ForgeError> {
    let mut rows = Vec::new();
    let mut builds = Vec::new();
    let mut structures = Vec::new();
    for k in 1..=k_max {
        let mut relations = s.relations.clone();
        for i in 1..=k {
            relations.push(instantiate(i)?);
        }
        let truncated = Structure::new(s.domain.clone(), relations)?;
        let build = build_canonical_sentence(&truncated, omega, budget)?;
        let trace = solver::evaluate_qcsp(
            &build.sentence,
            &truncated,
            &EvalOptions {
                budget,
                universal_witness: false,
                pi2_strategy: false,
            },
        )
        .map_err(Box::new)?;
        rows.push(CompactnessRow {
            k,
            verdict: trace.verdict,
            atom_count: build.atom_count,
        });
        builds.push(build);
        structures.push(truncated);
    }

    let deepest_true = rows.last().map(|r| r.verdict).unwrap_or(true);
    let forward_monotone = !deepest_true || rows.iter().all(|r| r.verdict);

    let mut witness_table = Vec::new();
    let mut all_recur = true;
    if let (Some(deep_build), Some(deep_structure)) = (builds.last(), structures.last()) {
        let universals = deep_build.universal_vars.clone();
        for u in s.domain.tuples(universals.len()) {
            let bindings: BTreeMap<String, Element> = universals
                .iter()
                .cloned()
                .zip(u.entries().iter().copied())
                .collect();
            let bound = deep_build.sentence.substitute(&bindings);
            let witness = if deepest_true {
                solver::solve_csp(&bound, deep_structure).map_err(Box::new)?
            } else {
                None
            };
            let recurs = match &witness {
                None => false,
                Some(assignment) => {
                    // the same response must satisfy every truncation
                    (0..builds.len()).all(|idx| {
                        let mut full = bindings.clone();
                        full.extend(assignment.iter().map(|(k, v)| (k.clone(), *v)));
                        let ground = builds[idx].sentence.substitute(&full);
                        ground_body_holds(&ground, &structures[idx])
                    })
                }
            };
            all_recur &= recurs;
            witness_table.push(WitnessRow {
                universal: universals
                    .iter()
                    .zip(u.entries())
                    .map(|(w, &e)| (w.clone(), s.domain.name(e).to_string()))
                    .collect(),
                witness: witness.map(|assignment| {
                    assignment
                        .into_iter()
                        .map(|(v, e)| (v, s.domain.name(e).to_string()))
                        .collect()
                }),
                recurs,
            });
        }
    }

    Ok(CompactnessReport {
        rows,
        forward_monotone,
        witness_stable: deepest_true.then_some(all_recur),
        witness_table,
    })
}

fn ground_body_holds(ground: &PHSentence, s: &Structure) -> bool {
    debug_assert!(ground.prefix.is_empty());
    ground.body.iter().all(|atom| {
        let values: Vec<Element> = atom
            .args
            .iter()
            .map(|arg| match arg {
                Arg::Const(e) => *e,
                Arg::Var(_) => unreachable!("fully substituted sentence"),
            })
            .collect();
        if atom.is_equality() {
            values[0] == values[1]
        } else {
            s.relation(&atom.relation)
                .map(|r| r.contains(&Tuple::new(values)))
                .unwrap_or(false)
        }
    })
}
