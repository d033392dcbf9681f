//! Round-trip and agreement properties for the DNF codec and the file
//! formats, driven by proptest.

use std::collections::BTreeSet;

use proptest::prelude::*;

use qcsplab_core::io::{parse_structure, structure_to_json};
use qcsplab_core::{
    dnf_to_extension, extension_to_dnf, parse_dnf, DnfAtom, DnfFormula, Domain, Relation,
    Structure, Tuple,
};

fn arb_relation() -> impl Strategy<Value = (usize, usize, BTreeSet<Vec<usize>>)> {
    // domain size 1..=4, arity 1..=4, nonempty extension
    (1usize..=4, 1usize..=4).prop_flat_map(|(n, arity)| {
        let tuples =
            proptest::collection::btree_set(proptest::collection::vec(0..n, arity), 1..=12);
        (Just(n), Just(arity), tuples)
    })
}

/// Formulas mixing coordinate equalities and pinned coordinates, the shapes
/// the disjunct-completion expansion has to merge and detect as
/// contradictory.
fn arb_formula() -> impl Strategy<Value = (usize, DnfFormula)> {
    (1usize..=4, 1usize..=4).prop_flat_map(|(n, arity)| {
        let atom = (0..arity, prop_oneof![(0..arity).prop_map(Ok), (0..n).prop_map(Err)])
            .prop_map(|(i, other)| match other {
                Ok(j) => DnfAtom::VarEqVar(i, j),
                Err(c) => DnfAtom::VarEqConst(i, c),
            });
        let disjunct = proptest::collection::vec(atom, 1..=4);
        let disjuncts = proptest::collection::vec(disjunct, 1..=4);
        (
            Just(n),
            disjuncts.prop_map(move |d| DnfFormula::new(arity, d).expect("atoms in range")),
        )
    })
}

proptest! {
    #[test]
    fn expansion_matches_the_definitional_sweep((n, f) in arb_formula()) {
        // the disjunct-completion expansion against filtering every tuple
        // through the evaluator
        let d = Domain::indexed(n);
        let by_sweep: BTreeSet<Tuple> = d
            .tuples(f.arity())
            .filter(|t| f.eval(t).unwrap())
            .collect();
        prop_assert_eq!(f.expand(&d), by_sweep);
    }

    #[test]
    fn canonical_dnf_reproduces_the_extension((n, arity, raw) in arb_relation()) {
        let d = Domain::indexed(n);
        let extension: BTreeSet<Tuple> = raw.into_iter().map(Tuple::new).collect();
        let r = Relation::new("r", arity, extension.clone()).unwrap();
        let dnf = extension_to_dnf(&r).unwrap();
        prop_assert_eq!(dnf.disjuncts().len(), extension.len());
        prop_assert_eq!(dnf_to_extension(&dnf, &d), extension);
    }

    #[test]
    fn eval_agrees_with_expanded_membership((n, arity, raw) in arb_relation()) {
        let d = Domain::indexed(n);
        let extension: BTreeSet<Tuple> = raw.into_iter().map(Tuple::new).collect();
        let r = Relation::new("r", arity, extension).unwrap();
        let dnf = extension_to_dnf(&r).unwrap();
        let expanded = dnf_to_extension(&dnf, &d);
        for t in d.tuples(arity) {
            prop_assert_eq!(dnf.eval(&t).unwrap(), expanded.contains(&t));
        }
    }

    #[test]
    fn printed_formulas_reparse_identically((n, arity, raw) in arb_relation()) {
        let d = Domain::indexed(n);
        let extension: BTreeSet<Tuple> = raw.into_iter().map(Tuple::new).collect();
        let r = Relation::new("r", arity, extension).unwrap();
        let dnf = extension_to_dnf(&r).unwrap();
        let text = dnf.to_text(&d);
        let reparsed = parse_dnf(&text, arity, &d).unwrap();
        prop_assert_eq!(&reparsed, &dnf);
        prop_assert_eq!(reparsed.to_text(&d), text);
    }

    #[test]
    fn structure_files_roundtrip((n, arity, raw) in arb_relation()) {
        let d = Domain::indexed(n);
        let extension: BTreeSet<Tuple> = raw.into_iter().map(Tuple::new).collect();
        let r = Relation::new("r", arity, extension).unwrap();
        // serialization derives the canonical dnf, so attach it up front to
        // compare field for field
        let r = Relation::from_dnf("r", extension_to_dnf(&r).unwrap(), &d);
        let s = Structure::new(d, vec![r]).unwrap();
        let text = structure_to_json(&s).unwrap();
        let back = parse_structure(&text).unwrap();
        prop_assert_eq!(back, s);
    }
}
