//! Generating sets of algebra powers: subpower closure, exact minimal
//! generating size f(m), collapse and switch tuple sets, and growth
//! profiling with a curve-comparison classification hint.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::rc::Rc;

use serde::Serialize;
use thiserror::Error;

use crate::model::{Algebra, Domain, Element, Tuple};

#[derive(Debug, Error)]
pub enum PowersError {
    #[error("seed tuple {tuple} has length {len}, expected {expected}")]
    SeedLength {
        tuple: String,
        len: usize,
        expected: usize,
    },
    #[error("k={k} must satisfy 0 <= k <= m={m}")]
    InvalidK { k: usize, m: usize },
    #[error("A^{m} has {required} tuples, budget is {budget}")]
    SpaceExceeded {
        m: usize,
        required: u128,
        budget: u64,
    },
    #[error("f({m}) search ran out of budget; {lower} <= f({m}) <= {upper}")]
    BudgetExceeded {
        m: usize,
        lower: usize,
        upper: usize,
    },
}

/// Least superset of `seeds` closed under the componentwise action of every
/// operation, computed by saturation; the final round that adds nothing is
/// the fixpoint verification.
pub fn generate_subpower(
    alg: &Algebra,
    seeds: &BTreeSet<Tuple>,
    m: usize,
) -> Result<BTreeSet<Tuple>, PowersError> {
    for t in seeds {
        if t.len() != m {
            return Err(PowersError::SeedLength {
                tuple: t.to_string(),
                len: t.len(),
                expected: m,
            });
        }
    }
    let mut member: BTreeSet<Tuple> = seeds.clone();
    let mut all: Vec<Tuple> = member.iter().cloned().collect();
    let mut processed = 0;

    while processed < all.len() {
        let len = all.len();
        for op in alg.operations() {
            let k = op.arity();
            if k == 0 {
                continue;
            }
            // every ordered selection touching at least one fresh tuple
            let mut selection = vec![0usize; k];
            let mut column = vec![0 as Element; k];
            loop {
                if selection.iter().any(|&i| i >= processed) {
                    let mut image = Vec::with_capacity(m);
                    for coord in 0..m {
                        for (slot, &idx) in selection.iter().enumerate() {
                            column[slot] = all[idx].get(coord);
                        }
                        image.push(op.apply(&column));
                    }
                    let image = Tuple::new(image);
                    if member.insert(image.clone()) {
                        all.push(image);
                    }
                }
                let mut done = true;
                for slot in (0..k).rev() {
                    if selection[slot] + 1 < len {
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
        processed = len;
    }
    Ok(member)
}

/// Exact minimal size of a generating set of A^m, by iterative deepening on
/// the subset size. Inside one size level a seed already generated by the
/// chosen prefix is skipped: a set containing it would generate with one
/// seed fewer, and smaller levels are already exhausted. Closures are
/// memoized across levels; the budget counts closure computations.
pub fn min_generating_size(alg: &Algebra, m: usize, budget: u64) -> Result<usize, PowersError> {
    let full: Vec<Tuple> = alg.domain().tuples(m).collect();
    let full_set: BTreeSet<Tuple> = full.iter().cloned().collect();
    let mut memo: HashMap<Vec<Tuple>, Rc<BTreeSet<Tuple>>> = HashMap::new();
    let mut spent: u64 = 0;

    struct Ctx<'a> {
        alg: &'a Algebra,
        m: usize,
        full: &'a [Tuple],
        full_set: &'a BTreeSet<Tuple>,
        memo: &'a mut HashMap<Vec<Tuple>, Rc<BTreeSet<Tuple>>>,
        spent: &'a mut u64,
        budget: u64,
    }

    impl Ctx<'_> {
        fn closure(&mut self, seeds: &[Tuple]) -> Result<Rc<BTreeSet<Tuple>>, ()> {
            let key = seeds.to_vec();
            if let Some(hit) = self.memo.get(&key) {
                return Ok(Rc::clone(hit));
            }
            if *self.spent >= self.budget {
                return Err(());
            }
            *self.spent += 1;
            let set: BTreeSet<Tuple> = seeds.iter().cloned().collect();
            let closed = generate_subpower(self.alg, &set, self.m).expect("seeds come from A^m");
            let rc = Rc::new(closed);
            self.memo.insert(key, Rc::clone(&rc));
            Ok(rc)
        }

        fn dfs(&mut self, size: usize, chosen: &mut Vec<Tuple>, start: usize) -> Result<bool, ()> {
            let closed = self.closure(chosen)?;
            if *closed == *self.full_set {
                // only relevant when size is reached exactly; a smaller
                // generating set would have been found at a lower level
                return Ok(chosen.len() == size);
            }
            if chosen.len() == size {
                return Ok(false);
            }
            let remaining = size - chosen.len();
            for i in start..self.full.len() {
                if self.full.len() - i < remaining {
                    break;
                }
                if closed.contains(&self.full[i]) {
                    continue; // redundant seed
                }
                chosen.push(self.full[i].clone());
                let hit = self.dfs(size, chosen, i + 1)?;
                chosen.pop();
                if hit {
                    return Ok(true);
                }
            }
            Ok(false)
        }
    }

    let mut ctx = Ctx {
        alg,
        m,
        full: &full,
        full_set: &full_set,
        memo: &mut memo,
        spent: &mut spent,
        budget,
    };

    for size in 1..=full.len() {
        match ctx.dfs(size, &mut Vec::new(), 0) {
            Ok(true) => return Ok(size),
            Ok(false) => {}
            Err(()) => {
                return Err(PowersError::BudgetExceeded {
                    m,
                    lower: size,
                    upper: full.len(),
                })
            }
        }
    }
    Ok(full.len())
}

/// Tuples of A^m in which some value occupies at least m-k positions.
pub fn collapse_tuples(d: &Domain, m: usize, k: usize) -> Result<BTreeSet<Tuple>, PowersError> {
    if k > m {
        return Err(PowersError::InvalidK { k, m });
    }
    let threshold = m - k;
    Ok(d.tuples(m)
        .filter(|t| {
            d.elements()
                .any(|v| t.entries().iter().filter(|&&e| e == v).count() >= threshold)
        })
        .collect())
}

/// Number of positions where the tuple changes value relative to its
/// predecessor.
pub fn switch_count(t: &Tuple) -> usize {
    t.entries().windows(2).filter(|w| w[0] != w[1]).count()
}

/// Tuples of A^m with at most k switches.
pub fn switch_tuples(d: &Domain, m: usize, k: usize) -> BTreeSet<Tuple> {
    d.tuples(m).filter(|t| switch_count(t) <= k).collect()
}

/// Does the collapse seed set generate all of A^m?
pub fn test_collapsibility(
    alg: &Algebra,
    m: usize,
    k: usize,
    budget: u64,
) -> Result<bool, PowersError> {
    let required = alg.domain().tuple_count(m);
    if required > budget as u128 {
        return Err(PowersError::SpaceExceeded {
            m,
            required,
            budget,
        });
    }
    let seeds = collapse_tuples(alg.domain(), m, k)?;
    let closed = generate_subpower(alg, &seeds, m)?;
    Ok(closed.len() as u128 == required)
}

/// Does the switch seed set generate all of A^m?
pub fn test_switchability(
    alg: &Algebra,
    m: usize,
    k: usize,
    budget: u64,
) -> Result<bool, PowersError> {
    let required = alg.domain().tuple_count(m);
    if required > budget as u128 {
        return Err(PowersError::SpaceExceeded {
            m,
            required,
            budget,
        });
    }
    let seeds = switch_tuples(alg.domain(), m, k);
    let closed = generate_subpower(alg, &seeds, m)?;
    Ok(closed.len() as u128 == required)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassificationHint {
    ConsistentWithPgp,
    ConsistentWithEgp,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthRow {
    pub m: usize,
    /// Exact minimal generating size, absent when the search ran out of
    /// budget.
    pub f: Option<usize>,
    pub collapse: BTreeMap<usize, Option<bool>>,
    pub switch: BTreeMap<usize, Option<bool>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthProfile {
    pub algebra: String,
    pub rows: Vec<GrowthRow>,
    pub hint: ClassificationHint,
}

/// Profile f(m) together with per-(m,k) collapse and switch verdicts.
/// Partial profiles are fine: entries the budget could not settle stay
/// empty and the hint falls back to inconclusive when fewer than three
/// exact values exist.
pub fn growth_profile(alg: &Algebra, m_max: usize, k_max: usize, budget: u64) -> GrowthProfile {
    let mut rows = Vec::new();
    for m in 1..=m_max {
        let f = min_generating_size(alg, m, budget).ok();
        let mut collapse = BTreeMap::new();
        let mut switch = BTreeMap::new();
        for k in 0..=k_max.min(m) {
            collapse.insert(k, test_collapsibility(alg, m, k, budget).ok());
            switch.insert(k, test_switchability(alg, m, k, budget).ok());
        }
        rows.push(GrowthRow {
            m,
            f,
            collapse,
            switch,
        });
    }
    let hint = classification_hint(&rows);
    let algebra = alg
        .operations()
        .iter()
        .map(|o| o.name().to_string())
        .collect::<Vec<_>>()
        .join(",");
    GrowthProfile {
        algebra,
        rows,
        hint,
    }
}

/// Heuristic curve comparison. A power law c*m^d is fitted through the
/// first and last exact points and accepted when it tracks the middle
/// points within 15 percent; failing that, a geometric curve c*b^m gets the
/// same chance. This is a consistency hint, never a classification: any
/// finite profile is compatible with both behaviours.
fn classification_hint(rows: &[GrowthRow]) -> ClassificationHint {
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.f.map(|f| (r.m as f64, f as f64)))
        .collect();
    if points.len() < 3 {
        return ClassificationHint::Inconclusive;
    }
    let (m0, f0) = points[0];
    let (m1, f1) = *points.last().expect("nonempty");
    let tolerance = 0.15;

    let power_exponent = (f1 / f0).ln() / (m1 / m0).ln();
    let power_fits = points.iter().all(|&(m, f)| {
        let predicted = f0 * (m / m0).powf(power_exponent);
        (predicted - f).abs() <= tolerance * f
    });
    if power_fits {
        return ClassificationHint::ConsistentWithPgp;
    }

    let ratio = (f1 / f0).powf(1.0 / (m1 - m0));
    let geometric_fits = points.iter().all(|&(m, f)| {
        let predicted = f0 * ratio.powf(m - m0);
        (predicted - f).abs() <= tolerance * f
    });
    if geometric_fits && ratio > 1.0 {
        return ClassificationHint::ConsistentWithEgp;
    }
    ClassificationHint::Inconclusive
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Operation;

    fn meet_algebra() -> Algebra {
        let d = Domain::indexed(2);
        let meet = Operation::from_fn("meet", 2, 2, |a| a[0].min(a[1])).unwrap();
        Algebra::new(d, vec![meet]).unwrap()
    }

    fn projection_algebra() -> Algebra {
        let d = Domain::indexed(2);
        let ops = vec![
            Operation::projection(2, 2, 0),
            Operation::projection(2, 2, 1),
        ];
        Algebra::new(d, ops).unwrap()
    }

    fn tuples(entries: &[&[Element]]) -> BTreeSet<Tuple> {
        entries.iter().map(|e| Tuple::new(e.to_vec())).collect()
    }

    #[test]
    fn closure_of_everything_is_everything() {
        let alg = meet_algebra();
        let all: BTreeSet<Tuple> = alg.domain().tuples(2).collect();
        assert_eq!(generate_subpower(&alg, &all, 2).unwrap(), all);
    }

    #[test]
    fn meet_closure_traces() {
        let alg = meet_algebra();
        // (0,1) and (1,0) meet to (0,0); (1,1) completes the square
        let seeds = tuples(&[&[0, 1], &[1, 0], &[1, 1]]);
        let closed = generate_subpower(&alg, &seeds, 2).unwrap();
        assert_eq!(closed.len(), 4);
        // without (1,1) the closure stalls at three tuples
        let seeds = tuples(&[&[0, 1], &[1, 0]]);
        let closed = generate_subpower(&alg, &seeds, 2).unwrap();
        assert_eq!(closed, tuples(&[&[0, 1], &[1, 0], &[0, 0]]));
    }

    #[test]
    fn closure_rejects_wrong_seed_length() {
        let alg = meet_algebra();
        let seeds = tuples(&[&[0, 1, 0]]);
        assert!(matches!(
            generate_subpower(&alg, &seeds, 2),
            Err(PowersError::SeedLength { .. })
        ));
    }

    #[test]
    fn closure_is_a_closure_operator() {
        // extensive, monotone, idempotent on all seed sets over A^2
        let alg = meet_algebra();
        let all: Vec<Tuple> = alg.domain().tuples(2).collect();
        let subsets: Vec<BTreeSet<Tuple>> = (0u32..16)
            .map(|mask| {
                all.iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, t)| t.clone())
                    .collect()
            })
            .collect();
        for a in &subsets {
            let ca = generate_subpower(&alg, a, 2).unwrap();
            assert!(a.is_subset(&ca));
            let cca = generate_subpower(&alg, &ca, 2).unwrap();
            assert_eq!(ca, cca);
            for b in &subsets {
                if a.is_subset(b) {
                    let cb = generate_subpower(&alg, b, 2).unwrap();
                    assert!(ca.is_subset(&cb));
                }
            }
        }
    }

    fn next_combination(indices: &mut [usize], n: usize) -> bool {
        let k = indices.len();
        for i in (0..k).rev() {
            if indices[i] < n - k + i {
                indices[i] += 1;
                for j in i + 1..k {
                    indices[j] = indices[j - 1] + 1;
                }
                return true;
            }
        }
        false
    }

    /// Independent oracle: subsets in size order, closure-test each. Kept
    /// deliberately naive.
    fn naive_min_generating(alg: &Algebra, m: usize) -> usize {
        let all: Vec<Tuple> = alg.domain().tuples(m).collect();
        let full: BTreeSet<Tuple> = all.iter().cloned().collect();
        for size in 1..=all.len() {
            let mut indices: Vec<usize> = (0..size).collect();
            loop {
                let seeds: BTreeSet<Tuple> = indices.iter().map(|&i| all[i].clone()).collect();
                if generate_subpower(alg, &seeds, m).unwrap() == full {
                    return size;
                }
                if !next_combination(&mut indices, all.len()) {
                    break;
                }
            }
        }
        all.len()
    }

    #[test]
    fn minimal_generating_sizes_match_the_naive_oracle() {
        let alg = meet_algebra();
        // f(1)=2: no single element generates {0,1} under idempotent meet
        assert_eq!(naive_min_generating(&alg, 1), 2);
        assert_eq!(min_generating_size(&alg, 1, 10_000).unwrap(), 2);
        // f(2)=3, confirmed by exhausting all 2-subsets
        assert_eq!(naive_min_generating(&alg, 2), 3);
        assert_eq!(min_generating_size(&alg, 2, 10_000).unwrap(), 3);
    }

    #[test]
    fn budget_exhaustion_reports_bounds() {
        let alg = meet_algebra();
        let err = min_generating_size(&alg, 2, 1).unwrap_err();
        match err {
            PowersError::BudgetExceeded { m, lower, upper } => {
                assert_eq!(m, 2);
                assert_eq!(lower, 1);
                assert_eq!(upper, 4);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn collapse_tuple_examples() {
        let d2 = Domain::indexed(2);
        // every binary triple repeats a value
        assert_eq!(collapse_tuples(&d2, 3, 1).unwrap().len(), 8);
        // k=0 leaves the constant tuples
        let constants = collapse_tuples(&d2, 3, 0).unwrap();
        assert_eq!(constants, tuples(&[&[0, 0, 0], &[1, 1, 1]]));

        let d3 = Domain::indexed(3);
        // oracle: 27 triples minus the 6 with three distinct values
        let rainbow = d3
            .tuples(3)
            .filter(|t| {
                let e = t.entries();
                e[0] != e[1] && e[0] != e[2] && e[1] != e[2]
            })
            .count();
        assert_eq!(rainbow, 6);
        assert_eq!(collapse_tuples(&d3, 3, 1).unwrap().len(), 27 - rainbow);
        assert!(matches!(
            collapse_tuples(&d3, 2, 5),
            Err(PowersError::InvalidK { .. })
        ));
    }

    #[test]
    fn switch_counting_and_census() {
        assert_eq!(switch_count(&Tuple::new(vec![0, 0, 1, 1, 0])), 2);
        let d2 = Domain::indexed(2);
        let s = switch_tuples(&d2, 3, 1);
        assert_eq!(
            s,
            tuples(&[
                &[0, 0, 0],
                &[1, 1, 1],
                &[0, 0, 1],
                &[0, 1, 1],
                &[1, 0, 0],
                &[1, 1, 0],
            ])
        );
        assert_eq!(s.len(), 6);
    }

    fn binomial(n: usize, k: usize) -> u128 {
        if k > n {
            return 0;
        }
        let mut acc: u128 = 1;
        for i in 0..k {
            acc = acc * (n - i) as u128 / (i + 1) as u128;
        }
        acc
    }

    #[test]
    fn switch_census_matches_closed_formula() {
        // |switch_tuples(n,m,k)| = sum_j C(m-1,j) * n * (n-1)^j
        for n in 1..=4usize {
            let d = Domain::indexed(n);
            for m in 1..=6usize {
                for k in 0..m {
                    let expected: u128 = (0..=k.min(m - 1))
                        .map(|j| binomial(m - 1, j) * n as u128 * ((n - 1) as u128).pow(j as u32))
                        .sum();
                    assert_eq!(
                        switch_tuples(&d, m, k).len() as u128,
                        expected,
                        "n={n} m={m} k={k}"
                    );
                }
            }
        }
    }

    #[test]
    fn trivial_and_degenerate_seed_sets() {
        let alg = meet_algebra();
        // k = m seeds everything
        assert!(test_collapsibility(&alg, 3, 3, 1_000_000).unwrap());
        assert!(test_switchability(&alg, 3, 2, 1_000_000).unwrap());
        // projections generate nothing beyond the constants
        let proj = projection_algebra();
        assert!(!test_collapsibility(&proj, 2, 0, 1_000_000).unwrap());
    }

    #[test]
    fn switchability_is_monotone_in_k() {
        let alg = meet_algebra();
        let mut last = false;
        for k in 0..=2 {
            let now = test_switchability(&alg, 3, k, 1_000_000).unwrap();
            assert!(now || !last, "switchability lost when k grew");
            last = now;
        }
    }

    #[test]
    fn collapse_and_switch_sets_contain_constants() {
        let d = Domain::indexed(3);
        for m in 1..=3 {
            for k in 0..m {
                let collapse = collapse_tuples(&d, m, k).unwrap();
                let switch = switch_tuples(&d, m, k);
                for v in d.elements() {
                    let constant = Tuple::new(vec![v; m]);
                    assert!(collapse.contains(&constant));
                    assert!(switch.contains(&constant));
                }
            }
        }
    }

    #[test]
    fn growth_profiles_match_expected_curves() {
        // meet semilattice grows linearly, bare projections double
        let profile = growth_profile(&meet_algebra(), 3, 1, 1_000_000);
        let fs: Vec<Option<usize>> = profile.rows.iter().map(|r| r.f).collect();
        assert_eq!(fs, vec![Some(2), Some(3), Some(4)]);
        assert_eq!(profile.hint, ClassificationHint::ConsistentWithPgp);

        let profile = growth_profile(&projection_algebra(), 3, 1, 1_000_000);
        let fs: Vec<Option<usize>> = profile.rows.iter().map(|r| r.f).collect();
        assert_eq!(fs, vec![Some(2), Some(4), Some(8)]);
        assert_eq!(profile.hint, ClassificationHint::ConsistentWithEgp);

        let empty = growth_profile(&meet_algebra(), 0, 1, 1_000_000);
        assert!(empty.rows.is_empty());
        assert_eq!(empty.hint, ClassificationHint::Inconclusive);
    }

    #[test]
    fn f_is_monotone_on_computed_profiles() {
        for alg in [meet_algebra(), projection_algebra()] {
            let profile = growth_profile(&alg, 3, 0, 1_000_000);
            let fs: Vec<usize> = profile.rows.iter().filter_map(|r| r.f).collect();
            for pair in fs.windows(2) {
                assert!(pair[0] <= pair[1]);
            }
        }
    }
}
