//! Polymorphism machinery: preservation checks, arity-sliced enumeration of
//! polymorphism clones, and near-unanimity operations with a constant
//! fallback.

use thiserror::Error;

use crate::forge::CutPair;
use crate::model::{apply_operation, Domain, Element, Operation, Relation, Structure, Tuple};

#[derive(Debug, Error)]
pub enum CloneError {
    #[error(
        "operation {op} has domain size {op_size} but relation {rel} mentions element {entry}"
    )]
    DomainMismatch {
        op: String,
        op_size: usize,
        rel: String,
        entry: Element,
    },
    #[error("enumeration needs {required} tables, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u64 },
    #[error("near-unanimity operations need arity at least 3, got {0}")]
    ArityTooSmall(usize),
    #[error("the cut blocks do not intersect, no fallback element exists")]
    EmptyIntersection,
    #[error("operation {0} is not a near-unanimity table with a constant fallback")]
    NotNuShaped(String),
    #[error("pigeonhole check needs operation arity {op_arity} above relation arity {rel_arity}")]
    PigeonholeInapplicable { op_arity: usize, rel_arity: usize },
    #[error("witness realization search exceeded {0} nodes")]
    RealizationBudget(u64),
}

/// A failed preservation check, replayable through [`apply_operation`]:
/// every argument tuple is in the relation, the image is not.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreservationWitness {
    pub operation: String,
    pub relation: String,
    pub args: Vec<Tuple>,
    pub image: Tuple,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Preservation {
    Preserved,
    Violated(PreservationWitness),
}

impl Preservation {
    pub fn is_preserved(&self) -> bool {
        matches!(self, Preservation::Preserved)
    }

    pub fn witness(&self) -> Option<&PreservationWitness> {
        match self {
            Preservation::Preserved => None,
            Preservation::Violated(w) => Some(w),
        }
    }
}

fn check_domains(f: &Operation, r: &Relation) -> Result<(), CloneError> {
    for t in &r.extension {
        for &e in t.entries() {
            if e >= f.domain_size() {
                return Err(CloneError::DomainMismatch {
                    op: f.name().to_string(),
                    op_size: f.domain_size(),
                    rel: r.name.clone(),
                    entry: e,
                });
            }
        }
    }
    Ok(())
}

/// Does the componentwise action of `f` map every choice of argument tuples
/// from `r` back into `r`? Iterates over all |extension|^arity ordered
/// selections; on failure the offending selection is returned.
pub fn preserves(f: &Operation, r: &Relation) -> Result<Preservation, CloneError> {
    check_domains(f, r)?;
    let ext: Vec<&Tuple> = r.extension.iter().collect();
    if ext.is_empty() {
        return Ok(Preservation::Preserved);
    }
    let k = f.arity();
    let m = r.arity;
    let mut selection = vec![0usize; k];
    let mut column = vec![0 as Element; k];
    loop {
        let mut image = Vec::with_capacity(m);
        for coord in 0..m {
            for (slot, &idx) in selection.iter().enumerate() {
                column[slot] = ext[idx].get(coord);
            }
            image.push(f.apply(&column));
        }
        let image = Tuple::new(image);
        if !r.extension.contains(&image) {
            let args = selection.iter().map(|&i| ext[i].clone()).collect();
            return Ok(Preservation::Violated(PreservationWitness {
                operation: f.name().to_string(),
                relation: r.name.clone(),
                args,
                image,
            }));
        }
        // advance the selection odometer
        let mut done = true;
        for slot in (0..k).rev() {
            if selection[slot] + 1 < ext.len() {
                selection[slot] += 1;
                selection[slot + 1..].fill(0);
                done = false;
                break;
            }
        }
        if done {
            return Ok(Preservation::Preserved);
        }
    }
}

/// Membership of `f` in the polymorphism clone of `s`: `f` must preserve
/// every relation. For structures flagged as idempotent cores the built-in
/// equality and all singleton constant relations count as well; equality is
/// preserved by every operation, and preserving each singleton is exactly
/// idempotency.
pub fn is_polymorphism(f: &Operation, s: &Structure) -> Result<bool, CloneError> {
    if s.idempotent_core && !f.is_idempotent() {
        return Ok(false);
    }
    for r in &s.relations {
        if !preserves(f, r)?.is_preserved() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Exactly the polymorphisms of `s` with the given arity, in lexicographic
/// table order. The number of candidate tables (all of them for a free
/// search, one per off-diagonal input when `idempotent_only`) must fit the
/// budget.
pub fn enumerate_polymorphisms(
    s: &Structure,
    arity: usize,
    idempotent_only: bool,
    budget: u64,
) -> Result<Vec<Operation>, CloneError> {
    let n = s.domain.size();
    let table_len = n
        .checked_pow(arity as u32)
        .ok_or(CloneError::BudgetExceeded {
            required: u128::MAX,
            budget,
        })?;

    // positions whose output is forced to the diagonal value
    let mut forced: Vec<Option<Element>> = vec![None; table_len];
    if idempotent_only {
        for a in 0..n {
            let mut idx = 0;
            for _ in 0..arity {
                idx = idx * n + a;
            }
            forced[idx] = Some(a);
        }
    }
    let free_positions: Vec<usize> = (0..table_len).filter(|&i| forced[i].is_none()).collect();

    let mut required: u128 = 1;
    for _ in 0..free_positions.len() {
        required = required.saturating_mul(n as u128);
    }
    if required > budget as u128 {
        return Err(CloneError::BudgetExceeded { required, budget });
    }

    let mut found = Vec::new();
    let mut table: Vec<Element> = (0..table_len).map(|i| forced[i].unwrap_or(0)).collect();
    loop {
        let candidate =
            Operation::from_table(format!("pol_{}", found.len()), arity, n, table.clone())
                .expect("enumerated tables are well formed");
        if is_polymorphism(&candidate, s)? {
            found.push(candidate);
        }
        // next table in lexicographic order over the free positions
        let mut done = true;
        for pos_idx in (0..free_positions.len()).rev() {
            let pos = free_positions[pos_idx];
            if table[pos] + 1 < n {
                table[pos] += 1;
                for &later in &free_positions[pos_idx + 1..] {
                    table[later] = 0;
                }
                done = false;
                break;
            }
        }
        if done {
            break;
        }
    }
    Ok(found)
}

/// The near-unanimity operation seeded by a cut: inputs where some value
/// occurs in all but at most one position map to that value, every other
/// input maps to the least element of the cut intersection.
pub fn build_nu_operation(
    d: &Domain,
    cut: &CutPair,
    arity: usize,
) -> Result<Operation, CloneError> {
    if arity < 3 {
        return Err(CloneError::ArityTooSmall(arity));
    }
    let fallback = *cut
        .intersection()
        .iter()
        .next()
        .ok_or(CloneError::EmptyIntersection)?;
    let n = d.size();
    let op = Operation::from_fn(format!("nu{arity}"), arity, n, |args| {
        near_unanimous_value(args).unwrap_or(fallback)
    })
    .expect("outputs are domain elements");
    Ok(op)
}

/// The value occurring in at least `len - 1` positions, if any. Unique for
/// arities >= 3.
fn near_unanimous_value(args: &[Element]) -> Option<Element> {
    for &candidate in args.iter().take(2) {
        let agreement = args.iter().filter(|&&a| a == candidate).count();
        if agreement + 1 >= args.len() {
            return Some(candidate);
        }
    }
    None
}

/// Check all near-unanimity identities f(y,x,...,x) = ... = f(x,...,x,y) = x.
/// The arity must be at least 3.
pub fn check_nu_identities(f: &Operation) -> bool {
    assert!(f.arity() >= 3, "near-unanimity identities need arity >= 3");
    let n = f.domain_size();
    for x in 0..n {
        for y in 0..n {
            for pos in 0..f.arity() {
                let mut args = vec![x; f.arity()];
                args[pos] = y;
                if f.apply(&args) != x {
                    return false;
                }
            }
        }
    }
    true
}

/// Preservation of `r` by a near-unanimity-with-fallback operation, decided
/// without touching the |extension|^arity selection space.
///
/// Any selection of argument tuples agrees with a single member row on every
/// column where the operation acts by near-unanimity, because the columns
/// can pin down fewer rows than the arity provides; the image is therefore
/// that row with some columns overwritten by the fallback element. The check
/// enumerates those candidate images directly and, for candidates outside
/// the relation, searches for argument rows realizing them, confirming each
/// hit by replay.
pub fn nu_preserves_pigeonhole(
    f: &Operation,
    fallback: Element,
    r: &Relation,
) -> Result<Preservation, CloneError> {
    check_domains(f, r)?;
    if f.arity() < 3 {
        return Err(CloneError::ArityTooSmall(f.arity()));
    }
    if f.arity() <= r.arity {
        return Err(CloneError::PigeonholeInapplicable {
            op_arity: f.arity(),
            rel_arity: r.arity,
        });
    }
    verify_nu_shape(f, fallback)?;
    if r.extension.is_empty() {
        return Ok(Preservation::Preserved);
    }

    let ext: Vec<&Tuple> = r.extension.iter().collect();
    let arity = r.arity;
    for base in &ext {
        // masking a column already holding the fallback changes nothing
        let maskable: Vec<usize> = (0..arity).filter(|&j| base.get(j) != fallback).collect();
        for mask in 1u32..(1 << maskable.len()) {
            let cols: Vec<usize> = maskable
                .iter()
                .enumerate()
                .filter(|(bit, _)| mask & (1 << *bit) != 0)
                .map(|(_, &j)| j)
                .collect();
            let mut image = base.entries().to_vec();
            for &j in &cols {
                image[j] = fallback;
            }
            let image = Tuple::new(image);
            if r.extension.contains(&image) {
                continue;
            }
            if let Some(args) = realize_masked_image(f, fallback, &ext, base, &cols, &image)? {
                return Ok(Preservation::Violated(PreservationWitness {
                    operation: f.name().to_string(),
                    relation: r.name.clone(),
                    args,
                    image,
                }));
            }
        }
    }
    Ok(Preservation::Preserved)
}

fn verify_nu_shape(f: &Operation, fallback: Element) -> Result<(), CloneError> {
    let n = f.domain_size();
    for t in crate::model::TupleIter::new(n, f.arity()) {
        let expected = near_unanimous_value(t.entries()).unwrap_or(fallback);
        if f.apply(t.entries()) != expected {
            return Err(CloneError::NotNuShaped(f.name().to_string()));
        }
    }
    Ok(())
}

/// Search for argument rows from `ext` whose componentwise image under the
/// near-unanimity operation is exactly `base` with `cols` overwritten by
/// the fallback. Rows are mostly copies of `base` plus deviant rows chosen
/// so that every masked column loses its near-unanimity and no unmasked
/// column does; each complete choice is confirmed by replay.
fn realize_masked_image(
    f: &Operation,
    fallback: Element,
    ext: &[&Tuple],
    base: &Tuple,
    cols: &[usize],
    target: &Tuple,
) -> Result<Option<Vec<Tuple>>, CloneError> {
    const NODE_BUDGET: u64 = 1_000_000;
    let nu_arity = f.arity();
    // rows deviating from the base, indexed by masked column
    let deviants: Vec<usize> = (0..ext.len()).filter(|&i| ext[i] != base).collect();
    let per_col: Vec<Vec<usize>> = cols
        .iter()
        .map(|&j| {
            deviants
                .iter()
                .copied()
                .filter(|&i| ext[i].get(j) != base.get(j))
                .collect()
        })
        .collect();
    if per_col.iter().any(Vec::is_empty) {
        return Ok(None);
    }

    struct Search<'a> {
        f: &'a Operation,
        fallback: Element,
        ext: &'a [&'a Tuple],
        base: &'a Tuple,
        cols: &'a [usize],
        per_col: &'a [Vec<usize>],
        target: &'a Tuple,
        nu_arity: usize,
        nodes: u64,
    }

    impl Search<'_> {
        // need[c]: masked column c still wants this many deviations;
        // stray[j]: an unmasked column j already spent its single allowance
        fn dfs(
            &mut self,
            need: &mut Vec<u8>,
            stray: &mut Vec<bool>,
            chosen: &mut Vec<usize>,
        ) -> Result<Option<Vec<Tuple>>, CloneError> {
            self.nodes += 1;
            if self.nodes > NODE_BUDGET {
                return Err(CloneError::RealizationBudget(NODE_BUDGET));
            }
            let Some(col) = (0..self.cols.len()).find(|&c| need[c] > 0) else {
                // all masked columns are busted; pad with the base and replay
                let mut rows: Vec<Tuple> = chosen.iter().map(|&i| self.ext[i].clone()).collect();
                rows.resize(self.nu_arity, self.base.clone());
                let image = apply_operation(self.f, &rows).expect("rows share a length");
                if &image == self.target {
                    return Ok(Some(rows));
                }
                return Ok(None);
            };
            if chosen.len() == self.nu_arity {
                return Ok(None);
            }
            for &row in &self.per_col[col] {
                // an unmasked column whose base value must win by
                // near-unanimity tolerates exactly one deviant row; columns
                // already holding the fallback are free, replay settles them
                let mut strays = Vec::new();
                let mut feasible = true;
                let row_entries = self.ext[row].entries().iter();
                for (j, (&rv, &bv)) in row_entries.zip(self.base.entries()).enumerate() {
                    if self.cols.contains(&j) || rv == bv || bv == self.fallback {
                        continue;
                    }
                    if stray[j] {
                        feasible = false;
                        break;
                    }
                    strays.push(j);
                }
                if !feasible {
                    continue;
                }
                for &j in &strays {
                    stray[j] = true;
                }
                let mut undo = Vec::new();
                for (c, &j) in self.cols.iter().enumerate() {
                    if self.ext[row].get(j) != self.base.get(j) && need[c] > 0 {
                        need[c] -= 1;
                        undo.push(c);
                    }
                }
                chosen.push(row);
                let hit = self.dfs(need, stray, chosen)?;
                chosen.pop();
                for c in undo {
                    need[c] += 1;
                }
                for &j in &strays {
                    stray[j] = false;
                }
                if hit.is_some() {
                    return Ok(hit);
                }
            }
            Ok(None)
        }
    }

    let mut search = Search {
        f,
        fallback,
        ext,
        base,
        cols,
        per_col: &per_col,
        target,
        nu_arity,
        nodes: 0,
    };
    let mut need = vec![2u8; cols.len()];
    let mut stray = vec![false; base.len()];
    let mut chosen = Vec::new();
    search.dfs(&mut need, &mut stray, &mut chosen)
}
