//! Subcommand dispatch: load inputs, call the library, shape the report
//! payload, and print a short human summary to stdout.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde_json::json;

use qcsplab_core::io::{operation_file, parse_algebra, parse_structure, parse_universe};
use qcsplab_core::powers::{min_generating_size, test_collapsibility, test_switchability};
use qcsplab_core::{
    build_canonical_sentence, build_rho, build_rho_prime, build_sigma, build_tau, collapse_tuples,
    decide_tau_qcsp, enumerate_polymorphisms, evaluate_pi2_restricted, evaluate_qcsp, parse_naesat,
    reduce_naesat_to_qcsp, reduct_compactness_probe, switch_tuples, tau_via_sigma_conjunction,
    AdversarySet, Algebra, ClassificationHint, CutPair, Domain, EvalOptions, EvalTrace, PHSentence,
    Structure,
};

use crate::cli::{Cli, Command, EmitKind, GadgetKind, PowersMode, SolveMode};
use crate::error::CliError;
use crate::report::DigestBuilder;
use crate::suites::{
    powers_sanity_suite, prop1_suite, prop2_suite, taudef_suite, theorem3_suite,
    PowersSanityParams, Prop1Params, Prop2Params, TaudefParams, Theorem3Params,
};

pub struct Outcome {
    pub command: &'static str,
    pub digest: String,
    pub exit: i32,
    pub payload: serde_json::Value,
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.display().to_string(),
        source,
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Write {
        path: path.display().to_string(),
        source,
    })
}

fn load_structure(path: &Path, digest: &mut DigestBuilder) -> Result<Structure, CliError> {
    let text = read_file(path)?;
    digest.text("structure", &text);
    Ok(parse_structure(&text)?)
}

fn load_algebra(path: &Path, digest: &mut DigestBuilder) -> Result<Algebra, CliError> {
    let text = read_file(path)?;
    digest.text("algebra", &text);
    Ok(parse_algebra(&text)?)
}

fn load_sentence(
    path: &Path,
    d: &Domain,
    digest: &mut DigestBuilder,
) -> Result<PHSentence, CliError> {
    let text = read_file(path)?;
    digest.text("instance", &text);
    Ok(PHSentence::parse(text.trim(), d)?)
}

/// Domain from an explicit comma-separated list, or the sorted names
/// occurring in the cut text.
fn domain_for_cut(domain: &Option<String>, cut_text: &str) -> Result<Domain, CliError> {
    let names: Vec<String> = match domain {
        Some(list) => list.split(',').map(|s| s.trim().to_string()).collect(),
        None => {
            let mut set = BTreeSet::new();
            for part in cut_text.split([':', ',']) {
                let part = part.trim();
                if !part.is_empty() {
                    set.insert(part.to_string());
                }
            }
            set.into_iter().collect()
        }
    };
    Domain::new(names).map_err(CliError::Model)
}

fn adversary_from_spec(spec: &str, d: &Domain, m: usize) -> Result<AdversarySet, CliError> {
    if spec == "full" {
        return Ok(AdversarySet::full(d, m));
    }
    if let Some(k) = spec.strip_prefix("switch:") {
        let k: usize = k
            .parse()
            .map_err(|_| CliError::Usage(format!("bad adversary spec {spec:?}")))?;
        return Ok(AdversarySet::switches(d, m, k));
    }
    Err(CliError::Usage(format!(
        "adversary must be 'full' or 'switch:<k>', got {spec:?}"
    )))
}

fn witness_json(trace: &EvalTrace, d: &Domain) -> serde_json::Value {
    match &trace.universal_witness {
        None => serde_json::Value::Null,
        Some(w) => json!(w
            .iter()
            .map(|(var, e)| json!({"var": var, "value": d.name(*e)}))
            .collect::<Vec<_>>()),
    }
}

fn strategy_json(trace: &EvalTrace, d: &Domain) -> serde_json::Value {
    match &trace.pi2_strategy {
        None => serde_json::Value::Null,
        Some(table) => json!(table
            .iter()
            .map(|(u, response)| {
                json!({
                    "universal": u.entries().iter().map(|&e| d.name(e)).collect::<Vec<_>>(),
                    "response": response
                        .iter()
                        .map(|(var, e)| (var.clone(), d.name(*e).to_string()))
                        .collect::<BTreeMap<String, String>>(),
                })
            })
            .collect::<Vec<_>>()),
    }
}

pub fn dispatch(cli: &Cli) -> Result<Outcome, CliError> {
    let budget = cli.budget;
    let opts = EvalOptions {
        budget,
        ..EvalOptions::default()
    };
    match &cli.command {
        Command::Solve {
            structure,
            instance,
            mode,
            universe,
            trace,
        } => {
            let mut digest = DigestBuilder::new();
            let s = load_structure(structure, &mut digest)?;
            let phi = load_sentence(instance, &s.domain, &mut digest)?;
            digest.text("mode", &format!("{mode:?}"));
            let violations = phi.validate(&s);
            if !violations.is_empty() {
                return Err(CliError::Usage(format!(
                    "instance does not fit the structure: {}",
                    violations.join("; ")
                )));
            }
            match mode {
                SolveMode::Full => {
                    let trace_out = evaluate_qcsp(
                        &phi,
                        &s,
                        &EvalOptions {
                            budget,
                            universal_witness: *trace,
                            pi2_strategy: *trace,
                        },
                    )?;
                    println!("{}", trace_out.verdict);
                    let payload = json!({
                        "verdict": trace_out.verdict,
                        "mode": "full",
                        "universal_witness": if *trace { witness_json(&trace_out, &s.domain) } else { serde_json::Value::Null },
                        "pi2_strategy": if *trace { strategy_json(&trace_out, &s.domain) } else { serde_json::Value::Null },
                    });
                    Ok(Outcome {
                        command: "solve",
                        digest: digest.finish(),
                        exit: if trace_out.verdict { 0 } else { 1 },
                        payload,
                    })
                }
                SolveMode::Pi2 => {
                    let Some((m, _)) = phi.pi2_blocks() else {
                        return Err(CliError::Usage(
                            "pi2 mode needs a universal block followed by an existential block"
                                .to_string(),
                        ));
                    };
                    let universe_set = match universe.as_deref() {
                        None | Some("full") => s.domain.tuples(m).collect(),
                        Some(spec) => {
                            digest.text("universe", spec);
                            if let Some(k) = spec.strip_prefix("switch:") {
                                let k = k.parse().map_err(|_| {
                                    CliError::Usage(format!("bad universe {spec:?}"))
                                })?;
                                switch_tuples(&s.domain, m, k)
                            } else if let Some(k) = spec.strip_prefix("collapse:") {
                                let k = k.parse().map_err(|_| {
                                    CliError::Usage(format!("bad universe {spec:?}"))
                                })?;
                                collapse_tuples(&s.domain, m, k)?
                            } else if let Some(path) = spec.strip_prefix("file:") {
                                let text = read_file(Path::new(path))?;
                                digest.text("universe_file", &text);
                                parse_universe(&text, &s.domain, m)?
                            } else {
                                return Err(CliError::Usage(format!(
                                    "universe must be switch:<k>, collapse:<k> or file:<path>, got {spec:?}"
                                )));
                            }
                        }
                    };
                    let verdict = evaluate_pi2_restricted(&phi, &s, &universe_set)?;
                    println!("{verdict}");
                    let payload = json!({
                        "verdict": verdict,
                        "mode": "pi2",
                        "universe_size": universe_set.len(),
                        "universal_block": m,
                    });
                    Ok(Outcome {
                        command: "solve",
                        digest: digest.finish(),
                        exit: if verdict { 0 } else { 1 },
                        payload,
                    })
                }
            }
        }

        Command::DecideTau {
            alpha,
            beta,
            domain,
            instance,
        } => {
            let mut digest = DigestBuilder::new();
            let cut_text = format!("{alpha}:{beta}");
            digest.text("cut", &cut_text);
            let d = domain_for_cut(domain, &cut_text)?;
            let cut = CutPair::parse(&cut_text, &d)?;
            let phi = load_sentence(instance, &d, &mut digest)?;
            let verdict = decide_tau_qcsp(&phi, &cut, &d, &opts)?;
            println!("{verdict}");
            let pivot = cut
                .intersection()
                .iter()
                .next()
                .map(|&e| d.name(e).to_string());
            let payload = json!({
                "verdict": verdict,
                "cut": cut.to_text(&d),
                "pivot": pivot,
            });
            Ok(Outcome {
                command: "decide-tau",
                digest: digest.finish(),
                exit: if verdict { 0 } else { 1 },
                payload,
            })
        }

        Command::Pol {
            structure,
            arity,
            idempotent,
        } => {
            let mut digest = DigestBuilder::new();
            let s = load_structure(structure, &mut digest)?;
            digest.text("arity", &arity.to_string());
            digest.text("idempotent", &idempotent.to_string());
            let ops = enumerate_polymorphisms(&s, *arity, *idempotent, budget)?;
            println!(
                "{} polymorphism(s) of arity {arity}{}",
                ops.len(),
                if *idempotent {
                    " (idempotent only)"
                } else {
                    ""
                }
            );
            let include_tables = ops.len() <= 512;
            let payload = json!({
                "count": ops.len(),
                "arity": arity,
                "idempotent_only": idempotent,
                "operations": if include_tables {
                    json!(ops.iter().map(|op| operation_file(op, &s.domain)).collect::<Vec<_>>())
                } else {
                    serde_json::Value::Null
                },
                "operations_omitted": !include_tables,
            });
            Ok(Outcome {
                command: "pol",
                digest: digest.finish(),
                exit: 0,
                payload,
            })
        }

        Command::Powers {
            algebra,
            max_m,
            mode,
            k,
        } => {
            let mut digest = DigestBuilder::new();
            let alg = load_algebra(algebra, &mut digest)?;
            digest.text("max_m", &max_m.to_string());
            digest.text("mode", &format!("{mode:?}"));
            digest.text("k", &k.to_string());
            let mut rows = Vec::new();
            let mut exact: Vec<(usize, usize)> = Vec::new();
            for m in 1..=*max_m {
                let mut row = serde_json::Map::new();
                row.insert("m".to_string(), json!(m));
                match mode {
                    PowersMode::Exact => {
                        let f = min_generating_size(&alg, m, budget).ok();
                        if let Some(f) = f {
                            exact.push((m, f));
                        }
                        row.insert("f".to_string(), json!(f));
                    }
                    PowersMode::Collapse => {
                        let mut verdicts = BTreeMap::new();
                        for kk in 0..=(*k).min(m) {
                            verdicts.insert(
                                kk.to_string(),
                                test_collapsibility(&alg, m, kk, budget).ok(),
                            );
                        }
                        row.insert("collapse".to_string(), json!(verdicts));
                    }
                    PowersMode::Switch => {
                        let mut verdicts = BTreeMap::new();
                        for kk in 0..=(*k).min(m) {
                            verdicts.insert(
                                kk.to_string(),
                                test_switchability(&alg, m, kk, budget).ok(),
                            );
                        }
                        row.insert("switch".to_string(), json!(verdicts));
                    }
                }
                rows.push(serde_json::Value::Object(row));
            }
            let hint = if *mode == PowersMode::Exact {
                let profile = qcsplab_core::powers::growth_profile(&alg, *max_m, 0, budget);
                profile.hint
            } else {
                ClassificationHint::Inconclusive
            };
            let algebra_name = alg
                .operations()
                .iter()
                .map(|o| o.name().to_string())
                .collect::<Vec<_>>()
                .join(",");
            for (m, f) in &exact {
                println!("f({m}) = {f}");
            }
            let payload = json!({
                "algebra": algebra_name,
                "rows": rows,
                "hint": hint,
            });
            Ok(Outcome {
                command: "powers",
                digest: digest.finish(),
                exit: 0,
                payload,
            })
        }

        Command::Gadget {
            cut,
            kind,
            k,
            emit,
            domain,
        } => {
            let mut digest = DigestBuilder::new();
            digest.text("cut", cut);
            digest.text("kind", &format!("{kind:?}"));
            digest.text("k", &k.to_string());
            let d = domain_for_cut(domain, cut)?;
            let pair = CutPair::parse(cut, &d)?;
            let (relation, dnf_only) = match kind {
                GadgetKind::Rho => (Some(build_rho(&pair, &d)), None),
                GadgetKind::RhoPrime => (Some(build_rho_prime(&pair, &d)), None),
                GadgetKind::Sigma => match build_sigma(&pair, &d, *k, budget) {
                    Ok(r) => (Some(r), None),
                    Err(qcsplab_core::forge::ForgeError::ExtensionBudget { dnf, .. })
                        if *emit == EmitKind::Dnf =>
                    {
                        (None, Some(dnf))
                    }
                    Err(e) => return Err(e.into()),
                },
                GadgetKind::Tau => match build_tau(&pair, &d, *k, budget) {
                    Ok(r) => (Some(r), None),
                    Err(qcsplab_core::forge::ForgeError::ExtensionBudget { dnf, .. })
                        if *emit == EmitKind::Dnf =>
                    {
                        (None, Some(dnf))
                    }
                    Err(e) => return Err(e.into()),
                },
            };
            let dnf = relation.as_ref().and_then(|r| r.dnf.clone()).or(dnf_only);
            let dnf = dnf.expect("gadgets always carry a dnf");
            let extension_size = relation.as_ref().map(|r| r.extension.len());
            // a closed pipe downstream of a long listing is not an error
            use std::io::Write as _;
            let stdout = std::io::stdout();
            let mut sink = stdout.lock();
            match emit {
                EmitKind::Dnf => {
                    let _ = writeln!(sink, "{}", dnf.to_text(&d));
                }
                EmitKind::Extension => {
                    let r = relation
                        .as_ref()
                        .expect("extension emission needs the extension");
                    for t in &r.extension {
                        if writeln!(sink, "{}", t.display(&d)).is_err() {
                            break;
                        }
                    }
                }
            }
            drop(sink);
            let payload = json!({
                "kind": format!("{kind:?}"),
                "k": k,
                "arity": dnf.arity(),
                "dnf": dnf.to_text(&d),
                "dnf_disjuncts": dnf.disjuncts().len(),
                "dnf_size": dnf.size(),
                "extension_size": extension_size,
            });
            Ok(Outcome {
                command: "gadget",
                digest: digest.finish(),
                exit: 0,
                payload,
            })
        }

        Command::ReduceNaesat {
            instance,
            cut,
            domain,
            out,
        } => {
            let mut digest = DigestBuilder::new();
            let text = read_file(instance)?;
            digest.text("instance", &text);
            digest.text("cut", cut);
            let inst = parse_naesat(&text)?;
            let d = domain_for_cut(domain, cut)?;
            let pair = CutPair::parse(cut, &d)?;
            let (sentence, structure) = reduce_naesat_to_qcsp(&inst, &pair, &d, budget)?;
            let sentence_text = sentence.to_text(&d);
            let structure_json = qcsplab_core::io::structure_to_json(&structure)?;
            let structure_path = match out {
                Some(out) => {
                    write_file(out, &format!("{sentence_text}\n"))?;
                    let sibling = sibling_with_suffix(out, "structure.json");
                    write_file(&sibling, &structure_json)?;
                    println!("wrote {} and {}", out.display(), sibling.display());
                    Some(sibling.display().to_string())
                }
                None => {
                    println!("{sentence_text}");
                    None
                }
            };
            let payload = json!({
                "vars": inst.vars(),
                "clauses": inst.clauses().len(),
                "tau_arity": 3 * inst.clauses().len(),
                "sentence": sentence_text,
                "structure_path": structure_path,
            });
            Ok(Outcome {
                command: "reduce-naesat",
                digest: digest.finish(),
                exit: 0,
                payload,
            })
        }

        Command::CheckTauDef { cut, k, domain } => {
            let mut digest = DigestBuilder::new();
            digest.text("cut", cut);
            digest.text("k", &k.to_string());
            let d = domain_for_cut(domain, cut)?;
            let pair = CutPair::parse(cut, &d)?;
            let tau = build_tau(&pair, &d, *k, budget)?;
            let via = tau_via_sigma_conjunction(&pair, &d, *k, budget)?;
            let equal = tau.extension == via.extension;
            println!(
                "tau_{k} {} its sigma-conjunction definition ({} vs {} tuples)",
                if equal { "matches" } else { "DIFFERS FROM" },
                tau.extension.len(),
                via.extension.len()
            );
            let payload = json!({
                "equal": equal,
                "k": k,
                "tau_size": tau.extension.len(),
                "conjunction_size": via.extension.len(),
                "sigma_instances": 3usize.pow(*k as u32),
            });
            Ok(Outcome {
                command: "check-tau-def",
                digest: digest.finish(),
                exit: if equal { 0 } else { 1 },
                payload,
            })
        }

        Command::Canonical {
            structure,
            m,
            adversary,
            out,
        } => {
            let mut digest = DigestBuilder::new();
            let s = load_structure(structure, &mut digest)?;
            digest.text("m", &m.to_string());
            digest.text("adversary", adversary);
            let omega = adversary_from_spec(adversary, &s.domain, *m)?;
            let build = build_canonical_sentence(&s, &omega, budget)?;
            let text = build.sentence.to_text(&s.domain);
            if let Some(out) = out {
                write_file(out, &format!("{text}\n"))?;
                println!("wrote {}", out.display());
            }
            println!(
                "product of {} factors, {} elements; {} universal, {} existential, {} atoms",
                build.factor_count,
                build.product_size,
                build.universal_vars.len(),
                build.existential_vars.len(),
                build.atom_count
            );
            let payload = json!({
                "m": m,
                "adversary": adversary,
                "factor_count": build.factor_count,
                "product_size": build.product_size,
                "universal_count": build.universal_vars.len(),
                "existential_count": build.existential_vars.len(),
                "atom_count": build.atom_count,
                "sentence": if build.atom_count <= 4096 { json!(text) } else { serde_json::Value::Null },
            });
            Ok(Outcome {
                command: "canonical",
                digest: digest.finish(),
                exit: 0,
                payload,
            })
        }

        Command::Compactness {
            structure,
            family,
            k_max,
            m,
            adversary,
        } => {
            let mut digest = DigestBuilder::new();
            let s = load_structure(structure, &mut digest)?;
            digest.text("family", family);
            digest.text("k_max", &k_max.to_string());
            digest.text("m", &m.to_string());
            digest.text("adversary", adversary);
            let omega = adversary_from_spec(adversary, &s.domain, *m)?;
            let report = reduct_compactness_probe(&s, family, &omega, *k_max, budget)?;
            for row in &report.rows {
                println!("k={}: {}", row.k, row.verdict);
            }
            println!(
                "forward monotone: {}; witness stable: {:?}",
                report.forward_monotone, report.witness_stable
            );
            let payload = serde_json::to_value(&report).expect("reports serialize");
            Ok(Outcome {
                command: "compactness",
                digest: digest.finish(),
                exit: 0,
                payload,
            })
        }

        Command::VerifyTheorem3 {
            cut,
            domain_sizes,
            max_vars,
            max_clauses,
        } => {
            let sizes: Vec<usize> = domain_sizes
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse()
                        .map_err(|_| CliError::Usage(format!("bad domain size {t:?}")))
                })
                .collect::<Result<_, _>>()?;
            let params = Theorem3Params {
                domain_sizes: sizes,
                cut: cut.clone(),
                max_vars: *max_vars,
                max_clauses: *max_clauses,
                seed: cli.seed,
            };
            let mut digest = DigestBuilder::new();
            digest.text("params", &serde_json::to_string(&params).expect("params"));
            let payload = theorem3_suite(&params, budget, cli.jobs)?;
            println!(
                "theorem3: {} checks, {} agreements, {} counterexamples",
                payload.checks,
                payload.agreements,
                payload.counterexamples.len()
            );
            let exit = if payload.counterexamples.is_empty() {
                0
            } else {
                1
            };
            Ok(Outcome {
                command: "verify-theorem3",
                digest: digest.finish(),
                exit,
                payload: serde_json::to_value(&payload).expect("payloads serialize"),
            })
        }

        Command::VerifyProp1 { n, max_vars } => {
            let params = Prop1Params {
                n: *n,
                max_vars: *max_vars,
                seed: cli.seed,
            };
            let mut digest = DigestBuilder::new();
            digest.text("params", &serde_json::to_string(&params).expect("params"));
            let payload = prop1_suite(&params, budget, cli.jobs)?;
            println!(
                "prop1: {} checks, {} agreements, {} counterexamples",
                payload.checks,
                payload.agreements,
                payload.counterexamples.len()
            );
            let exit = if payload.counterexamples.is_empty() {
                0
            } else {
                1
            };
            Ok(Outcome {
                command: "verify-prop1",
                digest: digest.finish(),
                exit,
                payload: serde_json::to_value(&payload).expect("payloads serialize"),
            })
        }

        Command::VerifyProp2 { n, max_i } => {
            let params = Prop2Params {
                n: *n,
                max_i: *max_i,
                seed: cli.seed,
            };
            let mut digest = DigestBuilder::new();
            digest.text("params", &serde_json::to_string(&params).expect("params"));
            let payload = prop2_suite(&params, budget)?;
            println!(
                "prop2: {} identity checks, {} preservation checks, {} failures",
                payload.identity_checks,
                payload.preservation_checks,
                payload.failures.len()
            );
            let exit = if payload.failures.is_empty() { 0 } else { 1 };
            Ok(Outcome {
                command: "verify-prop2",
                digest: digest.finish(),
                exit,
                payload: serde_json::to_value(&payload).expect("payloads serialize"),
            })
        }

        Command::VerifyTaudef { max_n, max_k } => {
            let params = TaudefParams {
                max_n: *max_n,
                max_k: *max_k,
                seed: cli.seed,
            };
            let mut digest = DigestBuilder::new();
            digest.text("params", &serde_json::to_string(&params).expect("params"));
            let payload = taudef_suite(&params, budget, cli.jobs)?;
            println!(
                "taudef: {} comparisons, {} mismatches",
                payload.comparisons,
                payload.mismatches.len()
            );
            let exit = if payload.mismatches.is_empty() { 0 } else { 1 };
            Ok(Outcome {
                command: "verify-taudef",
                digest: digest.finish(),
                exit,
                payload: serde_json::to_value(&payload).expect("payloads serialize"),
            })
        }

        Command::VerifyPowersSanity { max_m } => {
            let params = PowersSanityParams {
                max_m: *max_m,
                seed: cli.seed,
            };
            let mut digest = DigestBuilder::new();
            digest.text("params", &serde_json::to_string(&params).expect("params"));
            let payload = powers_sanity_suite(&params, budget)?;
            println!("powers-sanity: {} mismatches", payload.mismatches);
            let exit = if payload.mismatches == 0 { 0 } else { 1 };
            Ok(Outcome {
                command: "verify-powers-sanity",
                digest: digest.finish(),
                exit,
                payload: serde_json::to_value(&payload).expect("payloads serialize"),
            })
        }
    }
}

/// `q.txt` becomes `q.structure.json` next to it.
fn sibling_with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".to_string());
    path.with_file_name(format!("{stem}.{suffix}"))
}
