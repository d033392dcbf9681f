//! Shared fixtures for the benchmarks.

use std::collections::BTreeSet;

use qcsplab_core::{Algebra, CutPair, Domain, Operation, PHSentence, Relation, Structure};

pub fn standard_cut() -> (Domain, CutPair) {
    let d = Domain::indexed(3);
    let cut = CutPair::new(BTreeSet::from([0, 1]), BTreeSet::from([1, 2]), &d).expect("valid cut");
    (d, cut)
}

pub fn meet_algebra(n: usize) -> Algebra {
    let d = Domain::indexed(n);
    let meet = Operation::from_fn("meet", 2, n, |a| a[0].min(a[1])).expect("total");
    Algebra::new(d, vec![meet]).expect("shared domain")
}

pub fn tau_structure() -> (Structure, PHSentence) {
    let (d, cut) = standard_cut();
    let tau_2 = qcsplab_core::build_tau(&cut, &d, 2, 1 << 24).expect("in budget");
    let s = Structure::new(d.clone(), vec![tau_2]).expect("structure");
    let phi = PHSentence::parse("A x A y E z : tau_2(x,y,z,z,y,x)", &d).expect("parses");
    (s, phi)
}

pub fn dense_relation(n: usize, arity: usize) -> Relation {
    let d = Domain::indexed(n);
    let extension = d
        .tuples(arity)
        .filter(|t| t.entries().iter().sum::<usize>() % 3 != 0)
        .collect();
    Relation::new("dense", arity, extension).expect("relation")
}
