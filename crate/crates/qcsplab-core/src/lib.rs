//! A finite-domain constraint-language laboratory: DNF-encoded relations,
//! polymorphism clones, generating sets of algebra powers, quantified
//! sentence evaluation, and the gadget constructions tying not-all-equal
//! satisfiability to universally quantified tau sentences.

pub mod clone;
pub mod dnf;
pub mod forge;
pub mod io;
pub mod model;
pub mod powers;
pub mod rng;
pub mod sentence;
pub mod solver;

pub use clone::{
    build_nu_operation, check_nu_identities, enumerate_polymorphisms, is_polymorphism,
    nu_preserves_pigeonhole, preserves, Preservation, PreservationWitness,
};
pub use dnf::{dnf_to_extension, eval_dnf, extension_to_dnf, parse_dnf, DnfAtom, DnfFormula};
pub use forge::{
    brute_naesat, build_canonical_sentence, build_rho, build_rho_prime, build_sigma, build_tau,
    parse_naesat, reduce_naesat_to_qcsp, reduct_compactness_probe, tau_via_sigma_conjunction,
    AdversarySet, CutPair, FamilyKind, FamilySpec, NaeInstance,
};
pub use model::{
    apply_operation, structure_reduct, validate_structure, Algebra, Domain, Element, Operation,
    Relation, Structure, Tuple,
};
pub use powers::{
    collapse_tuples, generate_subpower, growth_profile, min_generating_size, switch_count,
    switch_tuples, test_collapsibility, test_switchability, ClassificationHint, GrowthProfile,
};
pub use sentence::{Arg, Atom, PHSentence, Quantifier};
pub use solver::{
    decide_tau_qcsp, eliminate_var_var_equalities, evaluate_pi2_restricted, evaluate_qcsp,
    preprocess_constants, replay_universal_witness, solve_csp, EvalOptions, EvalTrace,
    Preprocessed,
};
