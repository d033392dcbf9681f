//! Exhaustive verification sweeps. Each suite returns a serializable
//! payload listing instance counts, agreements and any counterexample
//! verbatim; payloads are deterministic for a given parameter set.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use qcsplab_core::model::EQ_RELATION;
use qcsplab_core::powers::{generate_subpower, growth_profile, min_generating_size};
use qcsplab_core::{
    brute_naesat, build_nu_operation, build_tau, check_nu_identities, decide_tau_qcsp,
    evaluate_qcsp, nu_preserves_pigeonhole, reduce_naesat_to_qcsp, tau_via_sigma_conjunction,
    Algebra, Arg, Atom, CutPair, Domain, EvalOptions, NaeInstance, Operation, PHSentence,
    Quantifier, Structure, Tuple,
};

use crate::error::CliError;

fn eval_options(budget: u64) -> EvalOptions {
    EvalOptions {
        budget,
        universal_witness: false,
        pi2_strategy: false,
    }
}

/// Per-cut sweep outcome: checks, agreements, counterexamples.
type SweepResult<C> = Result<(u64, u64, Vec<C>), CliError>;

fn pool(jobs: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Usage(format!("cannot build worker pool: {e}")))
}

// ---------------------------------------------------------------------------
// verify-theorem3: reduction equivalence

#[derive(Debug, Clone, Serialize)]
pub struct Theorem3Params {
    pub domain_sizes: Vec<usize>,
    pub cut: Option<String>,
    pub max_vars: usize,
    pub max_clauses: usize,
    pub seed: u64,
}

#[derive(Debug, Serialize)]
pub struct Theorem3Payload {
    pub params: Theorem3Params,
    pub cut_pairs: u64,
    pub instances_per_cut: u64,
    pub checks: u64,
    pub agreements: u64,
    pub counterexamples: Vec<Theorem3Counterexample>,
}

#[derive(Debug, Serialize)]
pub struct Theorem3Counterexample {
    pub domain_size: usize,
    pub cut: String,
    pub clauses: Vec<[String; 3]>,
    pub naesat: bool,
    pub qcsp: bool,
}

/// Every monotone instance with up to `max_vars` variables and up to
/// `max_clauses` clauses (ordered, repetition allowed), against every cut
/// pair over the requested domain sizes: the instance is satisfiable iff
/// the compiled sentence is false.
pub fn theorem3_suite(
    params: &Theorem3Params,
    budget: u64,
    jobs: usize,
) -> Result<Theorem3Payload, CliError> {
    let instances = enumerate_nae_instances(params.max_vars, params.max_clauses);
    let mut work: Vec<(usize, CutPair, Domain)> = Vec::new();
    for &n in &params.domain_sizes {
        let d = Domain::indexed(n);
        match &params.cut {
            Some(text) => {
                if let Ok(cut) = CutPair::parse(text, &d) {
                    work.push((n, cut, d));
                }
            }
            None => {
                for cut in CutPair::enumerate_all(&d) {
                    work.push((n, cut, d.clone()));
                }
            }
        }
    }
    if work.is_empty() {
        return Err(CliError::Usage(
            "no cut pairs match the requested domain sizes".to_string(),
        ));
    }

    let opts = eval_options(budget);
    let results: Vec<SweepResult<Theorem3Counterexample>> = pool(jobs)?.install(|| {
        work.par_iter()
            .map(|(n, cut, d)| {
                let mut checks = 0;
                let mut agreements = 0;
                let mut bad = Vec::new();
                for inst in &instances {
                    let (sentence, structure) = reduce_naesat_to_qcsp(inst, cut, d, budget)?;
                    let qcsp = evaluate_qcsp(&sentence, &structure, &opts)?.verdict;
                    let naesat = brute_naesat(inst);
                    checks += 1;
                    if naesat == !qcsp {
                        agreements += 1;
                    } else {
                        bad.push(Theorem3Counterexample {
                            domain_size: *n,
                            cut: cut.to_text(d),
                            clauses: inst.clauses().to_vec(),
                            naesat,
                            qcsp,
                        });
                    }
                }
                Ok((checks, agreements, bad))
            })
            .collect()
    });

    let mut checks = 0;
    let mut agreements = 0;
    let mut counterexamples = Vec::new();
    for r in results {
        let (c, a, bad) = r?;
        checks += c;
        agreements += a;
        counterexamples.extend(bad);
    }
    Ok(Theorem3Payload {
        params: params.clone(),
        cut_pairs: work.len() as u64,
        instances_per_cut: instances.len() as u64,
        checks,
        agreements,
        counterexamples,
    })
}

/// All instances over v in 1..=max_vars variables with 1..=max_clauses
/// ordered clauses drawn from the v^3 variable triples.
fn enumerate_nae_instances(max_vars: usize, max_clauses: usize) -> Vec<NaeInstance> {
    let mut out = Vec::new();
    for v in 1..=max_vars {
        let vars: Vec<String> = (0..v).map(|i| format!("p{i}")).collect();
        let mut triples = Vec::new();
        for a in 0..v {
            for b in 0..v {
                for c in 0..v {
                    triples.push([vars[a].clone(), vars[b].clone(), vars[c].clone()]);
                }
            }
        }
        for count in 1..=max_clauses {
            let mut selection = vec![0usize; count];
            loop {
                let clauses: Vec<[String; 3]> =
                    selection.iter().map(|&i| triples[i].clone()).collect();
                out.push(
                    NaeInstance::new(vars.clone(), clauses).expect("clauses use declared vars"),
                );
                let mut done = true;
                for slot in (0..count).rev() {
                    if selection[slot] + 1 < triples.len() {
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
    out
}

// ---------------------------------------------------------------------------
// verify-prop1: instantiation procedure

#[derive(Debug, Clone, Serialize)]
pub struct Prop1Params {
    pub n: usize,
    pub max_vars: usize,
    pub seed: u64,
}

#[derive(Debug, Serialize)]
pub struct Prop1Payload {
    pub params: Prop1Params,
    pub cuts: u64,
    pub sentences_per_cut: u64,
    pub checks: u64,
    pub agreements: u64,
    pub counterexamples: Vec<Prop1Counterexample>,
}

#[derive(Debug, Serialize)]
pub struct Prop1Counterexample {
    pub cut: String,
    pub sentence: String,
    pub evaluated: bool,
    pub decided: bool,
}

/// The sweep family over {tau_1, tau_2} and the constants:
///
/// - every single tau_1 atom with arguments drawn from variables and all
///   constants, under every quantifier pattern, up to `max_vars` variables;
/// - every single tau_2 atom with variable arguments, same prefixes;
/// - every single tau_2 atom over variables and constants for up to two
///   variables;
/// - every tau_1 atom with variable arguments extended by the equality
///   add-ons exercising each elimination rule: one pinned variable, two
///   clashing pins, a variable pinned twice identically, equality-only
///   bodies, and a variable-variable equality;
/// - conjunctions of two tau atoms sharing variables, up to two variables.
pub fn prop1_suite(
    params: &Prop1Params,
    budget: u64,
    jobs: usize,
) -> Result<Prop1Payload, CliError> {
    let d = Domain::indexed(params.n);
    let cuts: Vec<CutPair> = CutPair::enumerate_all(&d)
        .into_iter()
        .filter(CutPair::intersects)
        .collect();
    let opts = eval_options(budget);

    let results: Vec<SweepResult<Prop1Counterexample>> = pool(jobs)?.install(|| {
        cuts.par_iter()
            .map(|cut| {
                let tau_1 = build_tau(cut, &d, 1, budget)?;
                let tau_2 = build_tau(cut, &d, 2, budget)?;
                let structure = Structure::new(d.clone(), vec![tau_1, tau_2]).expect("fresh names");
                let mut checks = 0;
                let mut agreements = 0;
                let mut bad = Vec::new();
                let mut run = |phi: &PHSentence| -> Result<(), CliError> {
                    let evaluated = evaluate_qcsp(phi, &structure, &opts)?.verdict;
                    let decided = decide_tau_qcsp(phi, cut, &d, &opts)?;
                    checks += 1;
                    if evaluated == decided {
                        agreements += 1;
                    } else {
                        bad.push(Prop1Counterexample {
                            cut: cut.to_text(&d),
                            sentence: phi.to_text(&d),
                            evaluated,
                            decided,
                        });
                    }
                    Ok(())
                };
                for phi in prop1_sentences(&d, params.max_vars) {
                    run(&phi)?;
                }
                Ok((checks, agreements, bad))
            })
            .collect()
    });

    let mut checks = 0;
    let mut agreements = 0;
    let mut counterexamples = Vec::new();
    let mut per_cut = 0;
    for r in results {
        let (c, a, bad) = r?;
        checks += c;
        agreements += a;
        per_cut = c;
        counterexamples.extend(bad);
    }
    Ok(Prop1Payload {
        params: params.clone(),
        cuts: cuts.len() as u64,
        sentences_per_cut: per_cut,
        checks,
        agreements,
        counterexamples,
    })
}

fn quantifier_patterns(vars: usize) -> Vec<Vec<Quantifier>> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << vars) {
        out.push(
            (0..vars)
                .map(|i| {
                    if mask & (1 << i) != 0 {
                        Quantifier::Forall
                    } else {
                        Quantifier::Exists
                    }
                })
                .collect(),
        );
    }
    out
}

fn arg_choices(vars: usize, constants: usize) -> Vec<Arg> {
    let mut out: Vec<Arg> = (0..vars).map(|i| Arg::Var(format!("v{i}"))).collect();
    out.extend((0..constants).map(Arg::Const));
    out
}

fn atoms_over(name: &str, choices: &[Arg], arity: usize) -> Vec<Atom> {
    let mut out = Vec::new();
    let mut selection = vec![0usize; arity];
    loop {
        out.push(Atom::new(
            name,
            selection.iter().map(|&i| choices[i].clone()).collect(),
        ));
        let mut done = true;
        for slot in (0..arity).rev() {
            if selection[slot] + 1 < choices.len() {
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
    out
}

fn with_prefixes(vars: usize, bodies: Vec<Vec<Atom>>, out: &mut Vec<PHSentence>) {
    for pattern in quantifier_patterns(vars) {
        let prefix: Vec<(Quantifier, String)> = pattern
            .iter()
            .enumerate()
            .map(|(i, q)| (*q, format!("v{i}")))
            .collect();
        for body in &bodies {
            out.push(PHSentence::new(prefix.clone(), body.clone()));
        }
    }
}

fn prop1_sentences(d: &Domain, max_vars: usize) -> Vec<PHSentence> {
    let n = d.size();
    let mut out = Vec::new();

    // part A: one tau_1 atom over variables and constants
    for v in 0..=max_vars {
        let bodies: Vec<Vec<Atom>> = atoms_over("tau_1", &arg_choices(v, n), 3)
            .into_iter()
            .map(|a| vec![a])
            .collect();
        with_prefixes(v, bodies, &mut out);
    }
    // part B: one tau_2 atom over variables only
    for v in 1..=max_vars {
        let bodies: Vec<Vec<Atom>> = atoms_over("tau_2", &arg_choices(v, 0), 6)
            .into_iter()
            .map(|a| vec![a])
            .collect();
        with_prefixes(v, bodies, &mut out);
    }
    // part C: one tau_2 atom over variables and constants, few variables
    for v in 0..=max_vars.min(2) {
        let bodies: Vec<Vec<Atom>> = atoms_over("tau_2", &arg_choices(v, n), 6)
            .into_iter()
            .map(|a| vec![a])
            .collect();
        with_prefixes(v, bodies, &mut out);
    }
    // part D: equality add-ons around a variable-only tau_1 atom
    for v in 1..=max_vars.min(2) {
        let var0 = Arg::Var("v0".to_string());
        let last = Arg::Var(format!("v{}", v - 1));
        let mut bodies: Vec<Vec<Atom>> = Vec::new();
        for tau_atom in atoms_over("tau_1", &arg_choices(v, 0), 3) {
            // one pin, every constant
            for c in 0..n {
                bodies.push(vec![
                    tau_atom.clone(),
                    Atom::new(EQ_RELATION, vec![var0.clone(), Arg::Const(c)]),
                ]);
            }
            // two clashing pins and a duplicate pin
            bodies.push(vec![
                tau_atom.clone(),
                Atom::new(EQ_RELATION, vec![var0.clone(), Arg::Const(0)]),
                Atom::new(EQ_RELATION, vec![var0.clone(), Arg::Const(n - 1)]),
            ]);
            bodies.push(vec![
                tau_atom.clone(),
                Atom::new(EQ_RELATION, vec![var0.clone(), Arg::Const(0)]),
                Atom::new(EQ_RELATION, vec![Arg::Const(0), var0.clone()]),
            ]);
            // a variable-variable equality
            bodies.push(vec![
                tau_atom.clone(),
                Atom::new(EQ_RELATION, vec![var0.clone(), last.clone()]),
            ]);
        }
        // equality-only bodies: the variable never meets a relation atom
        bodies.push(vec![Atom::new(
            EQ_RELATION,
            vec![var0.clone(), Arg::Const(0)],
        )]);
        bodies.push(vec![
            Atom::new(EQ_RELATION, vec![var0.clone(), Arg::Const(0)]),
            Atom::new(EQ_RELATION, vec![var0.clone(), Arg::Const(n - 1)]),
        ]);
        if v >= 2 {
            bodies.push(vec![Atom::new(
                EQ_RELATION,
                vec![var0.clone(), last.clone()],
            )]);
        }
        with_prefixes(v, bodies, &mut out);
    }
    // part E: conjunctions of two tau atoms sharing variables
    for v in 1..=max_vars.min(2) {
        let tau_1_atoms = atoms_over("tau_1", &arg_choices(v, 0), 3);
        let mut bodies: Vec<Vec<Atom>> = Vec::new();
        for (i, a) in tau_1_atoms.iter().enumerate() {
            for b in &tau_1_atoms[i..] {
                bodies.push(vec![a.clone(), b.clone()]);
            }
        }
        if v == 2 {
            for a in &tau_1_atoms {
                for b in atoms_over("tau_2", &arg_choices(v, 0), 6) {
                    bodies.push(vec![a.clone(), b]);
                }
            }
        }
        with_prefixes(v, bodies, &mut out);
    }
    out
}

// ---------------------------------------------------------------------------
// verify-prop2: near-unanimity construction

#[derive(Debug, Clone, Serialize)]
pub struct Prop2Params {
    pub n: usize,
    pub max_i: usize,
    pub seed: u64,
}

#[derive(Debug, Serialize)]
pub struct Prop2Payload {
    pub params: Prop2Params,
    pub arity: usize,
    pub cuts: u64,
    pub identity_checks: u64,
    pub preservation_checks: u64,
    pub failures: Vec<String>,
}

/// For every intersecting cut the near-unanimity operation of arity
/// 3*max_i+1 must satisfy its identities and preserve tau_i for each
/// i <= max_i, established through the pigeonhole-restricted check.
pub fn prop2_suite(params: &Prop2Params, budget: u64) -> Result<Prop2Payload, CliError> {
    let d = Domain::indexed(params.n);
    let arity = 3 * params.max_i + 1;
    let cuts: Vec<CutPair> = CutPair::enumerate_all(&d)
        .into_iter()
        .filter(CutPair::intersects)
        .collect();
    let mut identity_checks = 0;
    let mut preservation_checks = 0;
    let mut failures = Vec::new();
    for cut in &cuts {
        let fallback = *cut.intersection().iter().next().expect("intersecting cut");
        let nu = build_nu_operation(&d, cut, arity)?;
        identity_checks += 1;
        if !check_nu_identities(&nu) {
            failures.push(format!("identities fail on cut {}", cut.to_text(&d)));
            continue;
        }
        for i in 1..=params.max_i {
            let tau = build_tau(cut, &d, i, budget)?;
            preservation_checks += 1;
            let outcome = nu_preserves_pigeonhole(&nu, fallback, &tau)?;
            if !outcome.is_preserved() {
                failures.push(format!(
                    "tau_{i} not preserved on cut {}: witness {:?}",
                    cut.to_text(&d),
                    outcome.witness()
                ));
            }
        }
    }
    Ok(Prop2Payload {
        params: params.clone(),
        arity,
        cuts: cuts.len() as u64,
        identity_checks,
        preservation_checks,
        failures,
    })
}

// ---------------------------------------------------------------------------
// tau definability

#[derive(Debug, Clone, Serialize)]
pub struct TaudefParams {
    pub max_n: usize,
    pub max_k: usize,
    pub seed: u64,
}

#[derive(Debug, Serialize)]
pub struct TaudefPayload {
    pub params: TaudefParams,
    pub comparisons: u64,
    pub mismatches: Vec<String>,
}

/// tau_k must equal the conjunction of its sigma_k instances extensionally,
/// for every cut over every domain size up to max_n.
pub fn taudef_suite(
    params: &TaudefParams,
    budget: u64,
    jobs: usize,
) -> Result<TaudefPayload, CliError> {
    let mut work = Vec::new();
    for n in 2..=params.max_n {
        let d = Domain::indexed(n);
        for cut in CutPair::enumerate_all(&d) {
            work.push((d.clone(), cut));
        }
    }
    let results: Vec<Result<(u64, Vec<String>), CliError>> = pool(jobs)?.install(|| {
        work.par_iter()
            .map(|(d, cut)| {
                let mut comparisons = 0;
                let mut mismatches = Vec::new();
                for k in 1..=params.max_k {
                    let direct = build_tau(cut, d, k, budget)?;
                    let via = tau_via_sigma_conjunction(cut, d, k, budget)?;
                    comparisons += 1;
                    if direct.extension != via.extension {
                        mismatches.push(format!(
                            "n={} cut={} k={k}: |tau|={} |conjunction|={}",
                            d.size(),
                            cut.to_text(d),
                            direct.extension.len(),
                            via.extension.len()
                        ));
                    }
                }
                Ok((comparisons, mismatches))
            })
            .collect()
    });
    let mut comparisons = 0;
    let mut mismatches = Vec::new();
    for r in results {
        let (c, m) = r?;
        comparisons += c;
        mismatches.extend(m);
    }
    Ok(TaudefPayload {
        params: params.clone(),
        comparisons,
        mismatches,
    })
}

// ---------------------------------------------------------------------------
// powers sanity

#[derive(Debug, Clone, Serialize)]
pub struct PowersSanityParams {
    pub max_m: usize,
    pub seed: u64,
}

#[derive(Debug, Serialize)]
pub struct PowersSanityPayload {
    pub params: PowersSanityParams,
    pub algebras: Vec<PowersSanityRow>,
    pub mismatches: u64,
}

#[derive(Debug, Serialize)]
pub struct PowersSanityRow {
    pub algebra: String,
    pub f: Vec<usize>,
    pub oracle: Vec<usize>,
    pub hint: qcsplab_core::ClassificationHint,
}

/// Exact minimal generating sizes against the naive subset-order oracle on
/// the two-element meet semilattice and the projections-only algebra.
pub fn powers_sanity_suite(
    params: &PowersSanityParams,
    budget: u64,
) -> Result<PowersSanityPayload, CliError> {
    let meet = Algebra::new(
        Domain::indexed(2),
        vec![Operation::from_fn("meet", 2, 2, |a| a[0].min(a[1])).expect("total table")],
    )
    .expect("shared domain");
    let projections = Algebra::new(
        Domain::indexed(2),
        vec![
            Operation::projection(2, 2, 0),
            Operation::projection(2, 2, 1),
        ],
    )
    .expect("shared domain");

    let mut rows = Vec::new();
    let mut mismatches = 0;
    for alg in [meet, projections] {
        let mut f = Vec::new();
        let mut oracle = Vec::new();
        for m in 1..=params.max_m {
            f.push(min_generating_size(&alg, m, budget)?);
            oracle.push(naive_min_generating(&alg, m));
        }
        if f != oracle {
            mismatches += 1;
        }
        let profile = growth_profile(&alg, params.max_m, 1, budget);
        rows.push(PowersSanityRow {
            algebra: profile.algebra,
            f,
            oracle,
            hint: profile.hint,
        });
    }
    Ok(PowersSanityPayload {
        params: params.clone(),
        algebras: rows,
        mismatches,
    })
}

/// Subsets in size order, closure-test each. Deliberately naive and
/// independent of the production search.
fn naive_min_generating(alg: &Algebra, m: usize) -> usize {
    let all: Vec<Tuple> = alg.domain().tuples(m).collect();
    let full: BTreeSet<Tuple> = all.iter().cloned().collect();
    for size in 1..=all.len() {
        let mut indices: Vec<usize> = (0..size).collect();
        loop {
            let seeds: BTreeSet<Tuple> = indices.iter().map(|&i| all[i].clone()).collect();
            if generate_subpower(alg, &seeds, m).expect("seeds in A^m") == full {
                return size;
            }
            let mut advanced = false;
            for i in (0..size).rev() {
                if indices[i] < all.len() - size + i {
                    indices[i] += 1;
                    for j in i + 1..size {
                        indices[j] = indices[j - 1] + 1;
                    }
                    advanced = true;
                    break;
                }
            }
            if !advanced {
                break;
            }
        }
    }
    all.len()
}
