//! Enumeration of small prealgebras and modal models.
//!
//! Brute-forcing every operation table is hopeless even at four elements,
//! so enumeration is structured: a model is assembled from a *backbone*
//! prealgebra (a quotient Boolean algebra with chosen representatives, or
//! a Boolean algebra ordered by a filter), a truth ultrafilter, and all
//! admissible choices for the box table and the identity diagonal.  The
//! quantifier functional is taken canonically as an iterated meet.  Every
//! candidate still passes full validation before it is reported, so the
//! output contains only genuine models — just not every table-level
//! variant of them.

use std::collections::{BTreeMap, BTreeSet};

use crate::calculus::System;
use crate::models::{
    decode_table, is_boolean_algebra, validate_modal_model, ModalModel, ModelError,
};
use crate::prealgebra::{filters, validate_prealgebra, PreAlgebra};

/// Hard cap on the universe size; beyond this the structured search space
/// itself becomes unmanageable.
pub const MAX_ENUM_UNIVERSE: usize = 4;

/// Validation arity used while sifting candidates.  Above two elements the
/// arity-2 definable closure runs into its work budget on essentially
/// every candidate, so paying for the attempt on thousands of them is
/// pure waste.
pub fn enum_validation_arity(n: usize) -> usize {
    if n <= 2 {
        2
    } else {
        1
    }
}

/// Optional filters narrowing which models [`enumerate_models`] reports.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Constraints {
    /// Keep only models with at least two necessary propositions.
    pub nec_at_least_two: bool,
    /// Keep only models whose tables are not literally a Boolean algebra.
    pub non_boolean: bool,
    /// Enumerate models with an empty set of necessary propositions
    /// instead of normal ones.
    pub non_normal: bool,
}

// --------------------------------------------------------------- backbones

/// All functions from `0..len` into `0..k`, as an odometer.
struct Tuples {
    cur: Vec<usize>,
    k: usize,
    done: bool,
}

impl Tuples {
    fn new(len: usize, k: usize) -> Tuples {
        Tuples {
            cur: vec![0; len],
            k,
            done: k == 0,
        }
    }
}

impl Iterator for Tuples {
    type Item = Vec<usize>;
    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.cur.clone();
        let mut i = 0;
        loop {
            if i == self.cur.len() {
                self.done = true;
                break;
            }
            self.cur[i] += 1;
            if self.cur[i] < self.k {
                break;
            }
            self.cur[i] = 0;
            i += 1;
        }
        Some(out)
    }
}

/// Mixed-radix odometer: one choice out of `options[i]` per position.
fn product<T: Clone>(options: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for opts in options {
        let mut next = Vec::with_capacity(out.len() * opts.len());
        for prefix in &out {
            for o in opts {
                let mut row = prefix.clone();
                row.push(o.clone());
                next.push(row);
            }
        }
        out = next;
    }
    out
}

/// Quotient backbones: surjections onto the Boolean algebra of `bits`
/// masks, with every class represented by a chosen element.  Operations
/// act on classes and return the representative of the result.
fn quotient_backbones(n: usize) -> Vec<PreAlgebra> {
    let mut out = Vec::new();
    for bits in 1..=2u32 {
        let q = 1usize << bits;
        if q > n {
            break;
        }
        let full = q - 1;
        for middle in Tuples::new(n.saturating_sub(2), q) {
            let mut cls = vec![0usize; n];
            cls[n - 1] = full;
            for (i, &c) in middle.iter().enumerate() {
                cls[i + 1] = c;
            }
            let mut members: Vec<Vec<usize>> = vec![Vec::new(); q];
            for a in 0..n {
                members[cls[a]].push(a);
            }
            if members.iter().any(|m| m.is_empty()) {
                continue;
            }
            for reps in product(&members) {
                let rep = |c: usize| reps[c];
                let mut p = PreAlgebra {
                    n,
                    bot: 0,
                    top: n - 1,
                    neg: vec![0; n],
                    or_: vec![vec![0; n]; n],
                    and_: vec![vec![0; n]; n],
                    imp: vec![vec![0; n]; n],
                    leq: vec![vec![false; n]; n],
                };
                for a in 0..n {
                    p.neg[a] = rep(full ^ cls[a]);
                    for b in 0..n {
                        p.or_[a][b] = rep(cls[a] | cls[b]);
                        p.and_[a][b] = rep(cls[a] & cls[b]);
                        p.imp[a][b] = rep((full ^ cls[a]) | cls[b]);
                        p.leq[a][b] = cls[a] & cls[b] == cls[a];
                    }
                }
                out.push(p);
            }
        }
    }
    out
}

/// Boolean backbones: genuine Boolean-algebra tables, preordered by a
/// principal filter `{x : c <= x}`.  With `c` below the top this yields
/// Boolean models whose necessity filter is strictly larger than `{top}`.
fn boolean_backbones(n: usize) -> Vec<PreAlgebra> {
    let mut out = Vec::new();
    for bits in 1..=2u32 {
        if 1usize << bits != n {
            continue;
        }
        let base = PreAlgebra::boolean(bits);
        for c in 1..n {
            let mut p = base.clone();
            for a in 0..n {
                for b in 0..n {
                    p.leq[a][b] = c & p.imp[a][b] == c;
                }
            }
            out.push(p);
        }
    }
    out
}

fn backbones(n: usize) -> Vec<PreAlgebra> {
    let mut out = quotient_backbones(n);
    for p in boolean_backbones(n) {
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out.retain(|p| validate_prealgebra(p).ok);
    out
}

/// Every prealgebra reachable by the structured search, universes of size
/// 2 up to `n_max`.
pub fn enumerate_prealgebras(n_max: usize) -> Result<Vec<PreAlgebra>, ModelError> {
    if n_max > MAX_ENUM_UNIVERSE {
        return Err(ModelError::Budget(format!(
            "enumeration supports universes up to {MAX_ENUM_UNIVERSE}, requested {n_max}"
        )));
    }
    let mut out = Vec::new();
    for n in 2..=n_max.max(1) {
        out.extend(backbones(n));
    }
    Ok(out)
}

// ------------------------------------------------------------------ models

/// Canonical quantifier table: the value of `forall` on a function is the
/// iterated meet of its values.
fn meet_forall(p: &PreAlgebra) -> Vec<usize> {
    let n = p.n;
    (0..n.pow(n as u32))
        .map(|idx| {
            let t = decode_table(idx, n, n);
            t.iter().fold(p.top, |acc, &x| p.and_[acc][x])
        })
        .collect()
}

fn assemble(
    p: &PreAlgebra,
    true_set: &BTreeSet<usize>,
    nec_set: &BTreeSet<usize>,
    box_: Vec<usize>,
    id_diag: &[usize],
) -> ModalModel {
    let n = p.n;
    let mut id_ = vec![vec![p.bot; n]; n];
    for a in 0..n {
        id_[a][a] = id_diag[a];
    }
    ModalModel {
        n,
        true_set: true_set.clone(),
        nec_set: nec_set.clone(),
        bot: p.bot,
        top: p.top,
        neg: p.neg.clone(),
        box_,
        or_: p.or_.clone(),
        and_: p.and_.clone(),
        imp: p.imp.clone(),
        id_,
        forall_tab: meet_forall(p),
        gamma: BTreeMap::from([("bot".into(), p.bot), ("top".into(), p.top)]),
    }
}

/// Cheap rejection tests before full validation: the strict-implication
/// inequality and the system clauses kill most bad box tables.
fn box_plausible(p: &PreAlgebra, box_: &[usize], system: System) -> bool {
    let n = p.n;
    for a in 0..n {
        if !p.leq[box_[a]][a] {
            return false;
        }
        if system >= System::S4 && !p.leq[box_[a]][box_[box_[a]]] {
            return false;
        }
        if system == System::S5 {
            let nb = p.neg[box_[a]];
            if !p.leq[nb][box_[nb]] {
                return false;
            }
        }
        for b in 0..n {
            let strict = box_[p.imp[a][b]];
            if !p.leq[strict][p.imp[box_[a]][box_[b]]]
                || !p.leq[strict][box_[p.imp[box_[a]][box_[b]]]]
            {
                return false;
            }
        }
    }
    true
}

/// Structured enumeration of valid models with universes of size 2 up to
/// `n_max`, canonical in `bot = 0` and `top = n - 1`.  With `dedupe` set,
/// models that differ only by a permutation of the universe are reported
/// once.
pub fn enumerate_models(
    n_max: usize,
    system: System,
    constraints: Constraints,
    dedupe: bool,
) -> Result<Vec<ModalModel>, ModelError> {
    if n_max > MAX_ENUM_UNIVERSE {
        return Err(ModelError::Budget(format!(
            "enumeration supports universes up to {MAX_ENUM_UNIVERSE}, requested {n_max}"
        )));
    }
    let mut out: Vec<ModalModel> = Vec::new();
    for n in 2..=n_max.max(1) {
        for p in backbones(n) {
            let fl = match filters(&p) {
                Ok(fl) => fl,
                Err(_) => continue,
            };
            for true_set in &fl.ultra {
                let nec_set: BTreeSet<usize> = if constraints.non_normal {
                    BTreeSet::new()
                } else {
                    (0..n).filter(|&a| p.equiv(a, p.top)).collect()
                };
                if !constraints.non_normal && !nec_set.iter().all(|a| true_set.contains(a)) {
                    continue;
                }
                // candidate box values per argument
                let box_options: Vec<Vec<usize>> = (0..n)
                    .map(|a| {
                        (0..n)
                            .filter(|&v| {
                                true_set.contains(&v) == nec_set.contains(&a)
                                    && (constraints.non_normal || p.leq[v][a])
                            })
                            .collect()
                    })
                    .collect();
                if box_options.iter().any(|o| o.is_empty()) {
                    continue;
                }
                // constant diagonals only: letting every diagonal cell vary
                // independently multiplies the candidate count without
                // changing which behaviours are witnessed
                let diag_choices: Vec<Vec<usize>> = if constraints.non_normal {
                    vec![vec![p.top; n]]
                } else {
                    nec_set.iter().map(|&d| vec![d; n]).collect()
                };
                for box_ in product(&box_options) {
                    if !constraints.non_normal && !box_plausible(&p, &box_, system) {
                        continue;
                    }
                    for diag in &diag_choices {
                        let m = assemble(&p, true_set, &nec_set, box_.clone(), diag);
                        if constraints.nec_at_least_two && m.nec_set.len() < 2 {
                            continue;
                        }
                        if constraints.non_boolean && is_boolean_algebra(&m) {
                            continue;
                        }
                        let report = validate_modal_model(&m, system, enum_validation_arity(n));
                        if report.ok && report.non_normal == constraints.non_normal {
                            out.push(m);
                        }
                    }
                }
            }
        }
    }
    if dedupe {
        out = dedupe_isomorphic(out);
    }
    Ok(out)
}

// ------------------------------------------------------------ isomorphism

fn permutations(elems: &[usize]) -> Vec<Vec<usize>> {
    if elems.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, &e) in elems.iter().enumerate() {
        let mut rest = elems.to_vec();
        rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, e);
            out.push(tail);
        }
    }
    out
}

/// The image of a model under a permutation of its universe.
pub fn permute_model(m: &ModalModel, perm: &[usize]) -> ModalModel {
    let n = m.n;
    let mut out = m.clone();
    out.bot = perm[m.bot];
    out.top = perm[m.top];
    out.true_set = m.true_set.iter().map(|&a| perm[a]).collect();
    out.nec_set = m.nec_set.iter().map(|&a| perm[a]).collect();
    for a in 0..n {
        out.neg[perm[a]] = perm[m.neg[a]];
        out.box_[perm[a]] = perm[m.box_[a]];
        for b in 0..n {
            out.or_[perm[a]][perm[b]] = perm[m.or_[a][b]];
            out.and_[perm[a]][perm[b]] = perm[m.and_[a][b]];
            out.imp[perm[a]][perm[b]] = perm[m.imp[a][b]];
            out.id_[perm[a]][perm[b]] = perm[m.id_[a][b]];
        }
    }
    for idx in 0..m.forall_tab.len() {
        let t = decode_table(idx, n, n);
        let mut tp = vec![0; n];
        for a in 0..n {
            tp[perm[a]] = perm[t[a]];
        }
        out.forall_tab[m.forall_index(&tp)] = perm[m.forall_tab[idx]];
    }
    for v in out.gamma.values_mut() {
        *v = perm[*v];
    }
    out
}

fn dedupe_isomorphic(models: Vec<ModalModel>) -> Vec<ModalModel> {
    let mut kept: Vec<ModalModel> = Vec::new();
    'outer: for m in models {
        // enumeration fixes bot and top, so any isomorphism between two
        // reported models of the same size fixes them as well
        let middle: Vec<usize> = (0..m.n).filter(|&a| a != m.bot && a != m.top).collect();
        for perm_mid in permutations(&middle) {
            let mut perm: Vec<usize> = (0..m.n).collect();
            for (i, &a) in middle.iter().enumerate() {
                perm[a] = perm_mid[i];
            }
            let image = permute_model(&m, &perm);
            if kept.contains(&image) {
                continue 'outer;
            }
        }
        kept.push(m);
    }
    kept
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::collapse_diagnostics;

    #[test]
    fn classical_model_is_enumerated() {
        let found = enumerate_models(2, System::S3, Constraints::default(), false).unwrap();
        assert!(found.contains(&ModalModel::classical()));
    }

    #[test]
    fn all_enumerated_models_validate() {
        for system in [System::S3, System::S4, System::S5] {
            let found = enumerate_models(3, system, Constraints::default(), false).unwrap();
            assert!(!found.is_empty());
            for m in &found {
                assert!(validate_modal_model(m, system, enum_validation_arity(m.n)).ok);
                assert!(m.is_normal());
            }
        }
    }

    #[test]
    fn finds_a_collapse_countermodel() {
        let constraints = Constraints {
            nec_at_least_two: true,
            ..Constraints::default()
        };
        let found = enumerate_models(4, System::S3, constraints, true).unwrap();
        assert!(!found.is_empty());
        for m in &found {
            assert!(m.nec_set.len() >= 2);
            let d = collapse_diagnostics(m).unwrap();
            assert!(!d.collapse_axiom);
            assert!(d.all_equivalent);
        }
    }

    #[test]
    fn boolean_backbone_with_wide_necessity_exists() {
        let constraints = Constraints {
            nec_at_least_two: true,
            ..Constraints::default()
        };
        let found = enumerate_models(4, System::S5, constraints, true).unwrap();
        assert!(found.iter().any(is_boolean_algebra));
    }

    #[test]
    fn non_normal_models_are_enumerable() {
        let constraints = Constraints {
            non_normal: true,
            ..Constraints::default()
        };
        let found = enumerate_models(3, System::S3, constraints, true).unwrap();
        assert!(!found.is_empty());
        for m in &found {
            assert!(m.nec_set.is_empty());
            let report = validate_modal_model(m, System::S3, enum_validation_arity(m.n));
            assert!(report.ok && report.non_normal);
        }
    }

    #[test]
    fn dedupe_collapses_permuted_copies() {
        let all = enumerate_models(4, System::S5, Constraints::default(), false).unwrap();
        let deduped = enumerate_models(4, System::S5, Constraints::default(), true).unwrap();
        assert!(deduped.len() <= all.len());
        assert!(!deduped.is_empty());
        // a permuted copy of a reported model is never reported twice
        for m in &deduped {
            let middle: Vec<usize> = (0..m.n).filter(|&a| a != m.bot && a != m.top).collect();
            for perm_mid in permutations(&middle) {
                let mut perm: Vec<usize> = (0..m.n).collect();
                for (i, &a) in middle.iter().enumerate() {
                    perm[a] = perm_mid[i];
                }
                if perm.iter().enumerate().all(|(i, &v)| i == v) {
                    continue;
                }
                let image = permute_model(m, &perm);
                assert!(image == *m || !deduped.contains(&image));
            }
        }
    }

    #[test]
    fn prealgebra_enumeration_is_validated() {
        let found = enumerate_prealgebras(4).unwrap();
        assert!(found.len() > 4);
        for p in &found {
            assert!(validate_prealgebra(p).ok);
        }
        assert!(enumerate_prealgebras(5).is_err());
    }
}
