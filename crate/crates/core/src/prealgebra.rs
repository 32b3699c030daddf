//! Finite Boolean prealgebras and SCI-style identity models.
//!
//! A Boolean prealgebra carries a preorder `leq` whose symmetrization is a
//! congruence and whose quotient is a Boolean algebra.  An [`SciModel`]
//! replaces the preorder by a truth set and a binary identity operation.
//! The two presentations convert into each other exactly, with filters of
//! the preorder corresponding to admissible truth sets.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Finite Boolean prealgebra on universe `0..n`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PreAlgebra {
    pub n: usize,
    pub bot: usize,
    pub top: usize,
    pub neg: Vec<usize>,
    pub or_: Vec<Vec<usize>>,
    pub and_: Vec<Vec<usize>>,
    pub imp: Vec<Vec<usize>>,
    pub leq: Vec<Vec<bool>>,
}

/// SCI-style model: truth set plus identity operation, no preorder.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SciModel {
    pub n: usize,
    pub true_set: BTreeSet<usize>,
    pub bot: usize,
    pub top: usize,
    pub neg: Vec<usize>,
    pub or_: Vec<Vec<usize>>,
    pub and_: Vec<Vec<usize>>,
    pub imp: Vec<Vec<usize>>,
    pub id_: Vec<Vec<usize>>,
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("{0}")]
    Invalid(String),
    #[error("universe too large: {n} > {max}")]
    TooLarge { n: usize, max: usize },
    #[error("index {index} out of range for universe of size {n}")]
    OutOfRange { index: usize, n: usize },
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub ok: bool,
    pub violated: Option<String>,
}

impl Report {
    pub fn ok() -> Report {
        Report {
            ok: true,
            violated: None,
        }
    }
    pub fn fail(msg: impl Into<String>) -> Report {
        Report {
            ok: false,
            violated: Some(msg.into()),
        }
    }
}

impl PreAlgebra {
    pub fn equiv(&self, a: usize, b: usize) -> bool {
        self.leq[a][b] && self.leq[b][a]
    }

    /// The two-element classical algebra, the smallest valid instance.
    pub fn classical() -> PreAlgebra {
        PreAlgebra {
            n: 2,
            bot: 0,
            top: 1,
            neg: vec![1, 0],
            or_: vec![vec![0, 1], vec![1, 1]],
            and_: vec![vec![0, 0], vec![0, 1]],
            imp: vec![vec![1, 1], vec![0, 1]],
            leq: vec![vec![true, true], vec![false, true]],
        }
    }

    /// The Boolean algebra on bitmasks of `bits` atoms (`n = 2^bits`), with
    /// `leq` the lattice order.
    pub fn boolean(bits: u32) -> PreAlgebra {
        let n = 1usize << bits;
        let mask = n - 1;
        let mut p = PreAlgebra {
            n,
            bot: 0,
            top: mask,
            neg: (0..n).map(|a| !a & mask).collect(),
            or_: vec![vec![0; n]; n],
            and_: vec![vec![0; n]; n],
            imp: vec![vec![0; n]; n],
            leq: vec![vec![false; n]; n],
        };
        for a in 0..n {
            for b in 0..n {
                p.or_[a][b] = a | b;
                p.and_[a][b] = a & b;
                p.imp[a][b] = (!a & mask) | b;
                p.leq[a][b] = a & b == a;
            }
        }
        p
    }
}

fn check_tables(p: &PreAlgebra) -> Result<(), String> {
    let n = p.n;
    if n == 0 {
        return Err("empty universe".into());
    }
    if p.bot >= n || p.top >= n {
        return Err("bot/top out of range".into());
    }
    if p.neg.len() != n || p.neg.iter().any(|&v| v >= n) {
        return Err("neg table malformed".into());
    }
    for (name, t) in [("or", &p.or_), ("and", &p.and_), ("imp", &p.imp)] {
        if t.len() != n || t.iter().any(|row| row.len() != n || row.iter().any(|&v| v >= n)) {
            return Err(format!("{name} table malformed"));
        }
    }
    if p.leq.len() != n || p.leq.iter().any(|row| row.len() != n) {
        return Err("leq table malformed".into());
    }
    Ok(())
}

/// Checks preorder axioms, congruence of the symmetrization, and Boolean
/// identities on the quotient.
pub fn validate_prealgebra(p: &PreAlgebra) -> Report {
    if let Err(msg) = check_tables(p) {
        return Report::fail(msg);
    }
    let n = p.n;
    for a in 0..n {
        if !p.leq[a][a] {
            return Report::fail(format!("leq not reflexive at {a}"));
        }
    }
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if p.leq[a][b] && p.leq[b][c] && !p.leq[a][c] {
                    return Report::fail(format!("leq not transitive at ({a},{b},{c})"));
                }
            }
        }
    }
    // congruence of the symmetrization
    for a in 0..n {
        for a2 in 0..n {
            if !p.equiv(a, a2) {
                continue;
            }
            if !p.equiv(p.neg[a], p.neg[a2]) {
                return Report::fail(format!("~ not congruent at ({a},{a2})"));
            }
            for b in 0..n {
                for b2 in 0..n {
                    if !p.equiv(b, b2) {
                        continue;
                    }
                    for (name, t) in [("or", &p.or_), ("and", &p.and_), ("imp", &p.imp)] {
                        if !p.equiv(t[a][b], t[a2][b2]) {
                            return Report::fail(format!(
                                "{name} not congruent at ({a},{b})~({a2},{b2})"
                            ));
                        }
                    }
                }
            }
        }
    }
    // order must be determined by meet, tying leq to the operations
    for a in 0..n {
        for b in 0..n {
            if p.leq[a][b] != p.equiv(p.and_[a][b], a) {
                return Report::fail(format!("leq({a},{b}) disagrees with a & b ~ a"));
            }
        }
    }
    // Boolean identities up to the symmetrization: since the quotient's
    // order is inherited, these make the quotient a Boolean algebra
    let eq = |x: usize, y: usize| p.equiv(x, y);
    for a in 0..n {
        if !eq(p.or_[a][p.neg[a]], p.top) {
            return Report::fail(format!("a | ~a != top at {a}"));
        }
        if !eq(p.and_[a][p.neg[a]], p.bot) {
            return Report::fail(format!("a & ~a != bot at {a}"));
        }
        if !eq(p.or_[a][p.bot], a) || !eq(p.and_[a][p.top], a) {
            return Report::fail(format!("bound laws fail at {a}"));
        }
        for b in 0..n {
            if !eq(p.or_[a][b], p.or_[b][a]) || !eq(p.and_[a][b], p.and_[b][a]) {
                return Report::fail(format!("commutativity fails at ({a},{b})"));
            }
            if !eq(p.imp[a][b], p.or_[p.neg[a]][b]) {
                return Report::fail(format!("imp(a,b) != ~a | b at ({a},{b})"));
            }
            for c in 0..n {
                if !eq(p.or_[a][p.or_[b][c]], p.or_[p.or_[a][b]][c])
                    || !eq(p.and_[a][p.and_[b][c]], p.and_[p.and_[a][b]][c])
                {
                    return Report::fail(format!("associativity fails at ({a},{b},{c})"));
                }
                if !eq(p.and_[a][p.or_[b][c]], p.or_[p.and_[a][b]][p.and_[a][c]])
                    || !eq(p.or_[a][p.and_[b][c]], p.and_[p.or_[a][b]][p.or_[a][c]])
                {
                    return Report::fail(format!("distributivity fails at ({a},{b},{c})"));
                }
            }
        }
    }
    Report::ok()
}

/// Filter enumeration result.
#[derive(Clone, Debug, Serialize)]
pub struct Filters {
    pub all: Vec<BTreeSet<usize>>,
    pub ultra: Vec<BTreeSet<usize>>,
    pub smallest: BTreeSet<usize>,
}

const MAX_SUBSET_UNIVERSE: usize = 16;

fn is_filter(p: &PreAlgebra, s: &BTreeSet<usize>) -> bool {
    if s.is_empty() || s.contains(&p.bot) {
        return false;
    }
    for &a in s {
        for b in 0..p.n {
            if p.leq[a][b] && !s.contains(&b) {
                return false;
            }
        }
        for &b in s {
            if !s.contains(&p.and_[a][b]) {
                return false;
            }
        }
    }
    true
}

/// Enumerates all filters (upward-closed, meet-closed, bot-free subsets),
/// the maximal ones, and their intersection.  Verifies the three
/// characterizations of the smallest filter agree.
pub fn filters(p: &PreAlgebra) -> Result<Filters, AlgebraError> {
    if p.n > MAX_SUBSET_UNIVERSE {
        return Err(AlgebraError::TooLarge {
            n: p.n,
            max: MAX_SUBSET_UNIVERSE,
        });
    }
    let mut all: Vec<BTreeSet<usize>> = Vec::new();
    for mask in 1u32..(1u32 << p.n) {
        let s: BTreeSet<usize> = (0..p.n).filter(|&i| mask >> i & 1 == 1).collect();
        if is_filter(p, &s) {
            all.push(s);
        }
    }
    if all.is_empty() {
        return Err(AlgebraError::Invalid("no filters exist".into()));
    }
    let ultra: Vec<BTreeSet<usize>> = all
        .iter()
        .filter(|f| !all.iter().any(|g| f.len() < g.len() && f.is_subset(g)))
        .cloned()
        .collect();
    let mut smallest = all[0].clone();
    for f in &all[1..] {
        smallest = smallest.intersection(f).cloned().collect();
    }
    // characterization by the top class
    let top_class: BTreeSet<usize> = (0..p.n).filter(|&a| p.equiv(a, p.top)).collect();
    if smallest != top_class {
        return Err(AlgebraError::Invalid(format!(
            "smallest filter {smallest:?} differs from top class {top_class:?}"
        )));
    }
    // characterization by internalizing the order
    for a in 0..p.n {
        for b in 0..p.n {
            if p.leq[a][b] != smallest.contains(&p.imp[a][b]) {
                return Err(AlgebraError::Invalid(format!(
                    "smallest filter fails to internalize leq at ({a},{b})"
                )));
            }
        }
    }
    // the intersection of ultrafilters alone also gives the smallest filter
    let mut meet_ultra = ultra[0].clone();
    for f in &ultra[1..] {
        meet_ultra = meet_ultra.intersection(f).cloned().collect();
    }
    if meet_ultra != smallest {
        return Err(AlgebraError::Invalid(
            "ultrafilter intersection differs from filter intersection".into(),
        ));
    }
    Ok(Filters {
        all,
        ultra,
        smallest,
    })
}

/// True iff `f` equals the intersection of all maximal filters extending it.
pub fn filter_meet_of_ultrafilters(
    p: &PreAlgebra,
    f: &BTreeSet<usize>,
) -> Result<bool, AlgebraError> {
    if !is_filter(p, f) {
        return Err(AlgebraError::Invalid(format!("{f:?} is not a filter")));
    }
    let fs = filters(p)?;
    let extending: Vec<&BTreeSet<usize>> = fs.ultra.iter().filter(|u| f.is_subset(u)).collect();
    if extending.is_empty() {
        return Ok(false);
    }
    let mut meet = extending[0].clone();
    for u in &extending[1..] {
        meet = meet.intersection(u).cloned().collect();
    }
    Ok(meet == *f)
}

/// Truth conditions of an SCI model over its operations.
pub fn validate_sci(s: &SciModel) -> Report {
    let n = s.n;
    let t = |a: usize| s.true_set.contains(&a);
    if t(s.bot) || !t(s.top) {
        return Report::fail("bot/top truth condition fails");
    }
    for a in 0..n {
        if t(s.neg[a]) != !t(a) {
            return Report::fail(format!("negation truth condition fails at {a}"));
        }
        for b in 0..n {
            if t(s.imp[a][b]) != (!t(a) || t(b)) {
                return Report::fail(format!("implication truth condition fails at ({a},{b})"));
            }
            if t(s.and_[a][b]) != (t(a) && t(b)) {
                return Report::fail(format!("conjunction truth condition fails at ({a},{b})"));
            }
            if t(s.or_[a][b]) != (t(a) || t(b)) {
                return Report::fail(format!("disjunction truth condition fails at ({a},{b})"));
            }
            if t(s.id_[a][b]) != (a == b) {
                return Report::fail(format!("identity truth condition fails at ({a},{b})"));
            }
        }
    }
    Report::ok()
}

/// Builds an SCI model from a prealgebra and a chosen maximal filter as the
/// truth set; identity defaults to `top`/`bot` on the diagonal test.
pub fn sci_from_prealgebra(
    p: &PreAlgebra,
    ultra_index: usize,
    id_table: Option<Vec<Vec<usize>>>,
) -> Result<SciModel, AlgebraError> {
    let fs = filters(p)?;
    let true_set = fs
        .ultra
        .get(ultra_index)
        .ok_or_else(|| AlgebraError::OutOfRange {
            index: ultra_index,
            n: fs.ultra.len(),
        })?
        .clone();
    let id_ = match id_table {
        Some(tab) => {
            if tab.len() != p.n || tab.iter().any(|r| r.len() != p.n) {
                return Err(AlgebraError::Invalid("id table malformed".into()));
            }
            for a in 0..p.n {
                for b in 0..p.n {
                    if true_set.contains(&tab[a][b]) != (a == b) {
                        return Err(AlgebraError::Invalid(format!(
                            "id({a},{b}) violates the identity truth condition"
                        )));
                    }
                }
            }
            tab
        }
        // The default table has to remember the preorder, not just the
        // diagonal: for equivalent a != b it stores a & ~b, a value that no
        // truth set respecting the equivalence can contain but that every
        // truth set separating a from b does contain.  This pins the
        // admissible truth sets down to the ultrafilters of the preorder,
        // which is what makes the reverse construction land back on `p`.
        None => (0..p.n)
            .map(|a| {
                (0..p.n)
                    .map(|b| {
                        if a == b {
                            p.top
                        } else if p.equiv(a, b) {
                            p.and_[a][p.neg[b]]
                        } else {
                            p.bot
                        }
                    })
                    .collect()
            })
            .collect(),
    };
    let s = SciModel {
        n: p.n,
        true_set,
        bot: p.bot,
        top: p.top,
        neg: p.neg.clone(),
        or_: p.or_.clone(),
        and_: p.and_.clone(),
        imp: p.imp.clone(),
        id_,
    };
    let r = validate_sci(&s);
    if !r.ok {
        return Err(AlgebraError::Invalid(r.violated.unwrap_or_default()));
    }
    Ok(s)
}

/// Recovers the prealgebra: `F` is the intersection of all truth sets that
/// make the operations an SCI model, and `leq` internalizes membership of
/// implications in `F`.
pub fn prealgebra_from_sci(s: &SciModel) -> Result<(PreAlgebra, BTreeSet<usize>), AlgebraError> {
    if s.n > MAX_SUBSET_UNIVERSE {
        return Err(AlgebraError::TooLarge {
            n: s.n,
            max: MAX_SUBSET_UNIVERSE,
        });
    }
    let mut admissible: Vec<BTreeSet<usize>> = Vec::new();
    for mask in 1u32..(1u32 << s.n) {
        let t: BTreeSet<usize> = (0..s.n).filter(|&i| mask >> i & 1 == 1).collect();
        let candidate = SciModel {
            true_set: t.clone(),
            ..s.clone()
        };
        if validate_sci(&candidate).ok {
            admissible.push(t);
        }
    }
    if admissible.is_empty() {
        return Err(AlgebraError::Invalid(
            "no admissible truth set (input is not an SCI model)".into(),
        ));
    }
    let mut f = admissible[0].clone();
    for t in &admissible[1..] {
        f = f.intersection(t).cloned().collect();
    }
    let leq: Vec<Vec<bool>> = (0..s.n)
        .map(|a| (0..s.n).map(|b| f.contains(&s.imp[a][b])).collect())
        .collect();
    let p = PreAlgebra {
        n: s.n,
        bot: s.bot,
        top: s.top,
        neg: s.neg.clone(),
        or_: s.or_.clone(),
        and_: s.and_.clone(),
        imp: s.imp.clone(),
        leq,
    };
    let r = validate_prealgebra(&p);
    if !r.ok {
        return Err(AlgebraError::Invalid(format!(
            "recovered structure invalid: {}",
            r.violated.unwrap_or_default()
        )));
    }
    // every admissible truth set must be a maximal filter, and F the
    // smallest filter
    let fs = filters(&p)?;
    for t in &admissible {
        if !fs.ultra.contains(t) {
            return Err(AlgebraError::Invalid(format!(
                "admissible truth set {t:?} is not a maximal filter"
            )));
        }
    }
    if fs.smallest != f {
        return Err(AlgebraError::Invalid(
            "intersection of truth sets is not the smallest filter".into(),
        ));
    }
    Ok((p, f))
}

/// The simplified recovery: order by implication membership in TRUE itself.
/// The result is a prealgebra whose quotient is the two-element algebra.
pub fn prealgebra_from_sci_simple(s: &SciModel) -> Result<PreAlgebra, AlgebraError> {
    let leq: Vec<Vec<bool>> = (0..s.n)
        .map(|a| {
            (0..s.n)
                .map(|b| s.true_set.contains(&s.imp[a][b]))
                .collect()
        })
        .collect();
    let p = PreAlgebra {
        n: s.n,
        bot: s.bot,
        top: s.top,
        neg: s.neg.clone(),
        or_: s.or_.clone(),
        and_: s.and_.clone(),
        imp: s.imp.clone(),
        leq,
    };
    let r = validate_prealgebra(&p);
    if !r.ok {
        return Err(AlgebraError::Invalid(r.violated.unwrap_or_default()));
    }
    Ok(p)
}

// --------------------------------------------------------------- serde

#[derive(Serialize, Deserialize)]
struct PreAlgebraRepr {
    n: usize,
    bot: usize,
    top: usize,
    neg: Vec<usize>,
    and: Vec<Vec<usize>>,
    or: Vec<Vec<usize>>,
    imp: Vec<Vec<usize>>,
    leq: Vec<Vec<u8>>,
}

impl Serialize for PreAlgebra {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PreAlgebraRepr {
            n: self.n,
            bot: self.bot,
            top: self.top,
            neg: self.neg.clone(),
            and: self.and_.clone(),
            or: self.or_.clone(),
            imp: self.imp.clone(),
            leq: self
                .leq
                .iter()
                .map(|row| row.iter().map(|&b| b as u8).collect())
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PreAlgebra {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = PreAlgebraRepr::deserialize(d)?;
        Ok(PreAlgebra {
            n: r.n,
            bot: r.bot,
            top: r.top,
            neg: r.neg,
            and_: r.and,
            or_: r.or,
            imp: r.imp,
            leq: r
                .leq
                .into_iter()
                .map(|row| row.into_iter().map(|b| b != 0).collect())
                .collect(),
        })
    }
}

#[derive(Serialize, Deserialize)]
struct SciModelRepr {
    n: usize,
    bot: usize,
    top: usize,
    neg: Vec<usize>,
    and: Vec<Vec<usize>>,
    or: Vec<Vec<usize>>,
    imp: Vec<Vec<usize>>,
    #[serde(rename = "true")]
    true_set: Vec<usize>,
    id: Vec<Vec<usize>>,
}

impl Serialize for SciModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        SciModelRepr {
            n: self.n,
            bot: self.bot,
            top: self.top,
            neg: self.neg.clone(),
            and: self.and_.clone(),
            or: self.or_.clone(),
            imp: self.imp.clone(),
            true_set: self.true_set.iter().cloned().collect(),
            id: self.id_.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SciModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = SciModelRepr::deserialize(d)?;
        Ok(SciModel {
            n: r.n,
            bot: r.bot,
            top: r.top,
            neg: r.neg,
            and_: r.and,
            or_: r.or,
            imp: r.imp,
            true_set: r.true_set.into_iter().collect(),
            id_: r.id,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classical_algebra_validates() {
        assert!(validate_prealgebra(&PreAlgebra::classical()).ok);
        assert!(validate_prealgebra(&PreAlgebra::boolean(2)).ok);
        assert!(validate_prealgebra(&PreAlgebra::boolean(3)).ok);
    }

    #[test]
    fn broken_transitivity_reported() {
        let mut p = PreAlgebra::boolean(2);
        // 0 <= 1 and 1 <= 3 hold; cut 0 <= 3
        p.leq[0][3] = false;
        let r = validate_prealgebra(&p);
        assert!(!r.ok);
        assert!(r.violated.unwrap().contains("transitive"));
    }

    /// Doubles every element of the classical algebra: 4 elements whose
    /// quotient is the 2-element Boolean algebra.
    fn doubled() -> PreAlgebra {
        // pairs (v, copy): elements 0,1 are the two bot copies; 2,3 top
        let cls = |x: usize| x / 2; // class: 0 or 1
        let rep = |c: usize| c * 2; // representative of class
        let n = 4;
        let mut p = PreAlgebra {
            n,
            bot: 0,
            top: 2,
            neg: vec![0; n],
            or_: vec![vec![0; n]; n],
            and_: vec![vec![0; n]; n],
            imp: vec![vec![0; n]; n],
            leq: vec![vec![false; n]; n],
        };
        let c2 = PreAlgebra::classical();
        for a in 0..n {
            p.neg[a] = rep(c2.neg[cls(a)]);
            for b in 0..n {
                p.or_[a][b] = rep(c2.or_[cls(a)][cls(b)]);
                p.and_[a][b] = rep(c2.and_[cls(a)][cls(b)]);
                p.imp[a][b] = rep(c2.imp[cls(a)][cls(b)]);
                p.leq[a][b] = c2.leq[cls(a)][cls(b)];
            }
        }
        p
    }

    #[test]
    fn doubled_quotient_validates() {
        assert!(validate_prealgebra(&doubled()).ok);
    }

    #[test]
    fn filters_of_small_algebras() {
        let f2 = filters(&PreAlgebra::classical()).unwrap();
        assert_eq!(f2.ultra, vec![BTreeSet::from([1])]);
        assert_eq!(f2.smallest, BTreeSet::from([1]));

        let f4 = filters(&PreAlgebra::boolean(2)).unwrap();
        assert_eq!(f4.ultra.len(), 2);
        assert_eq!(f4.smallest, BTreeSet::from([3]));
        assert_eq!(f4.all.len(), 3); // {3}, {1,3}, {2,3}
    }

    #[test]
    fn doubled_smallest_filter_has_size_two() {
        let f = filters(&doubled()).unwrap();
        assert_eq!(f.smallest, BTreeSet::from([2, 3]));
        assert_eq!(f.ultra, vec![BTreeSet::from([2, 3])]);
    }

    #[test]
    fn meet_of_ultrafilters_property() {
        for p in [PreAlgebra::classical(), PreAlgebra::boolean(2), doubled()] {
            let fs = filters(&p).unwrap();
            for f in &fs.all {
                assert_eq!(filter_meet_of_ultrafilters(&p, f), Ok(true));
            }
        }
    }

    #[test]
    fn sci_from_classical() {
        let s = sci_from_prealgebra(&PreAlgebra::classical(), 0, None).unwrap();
        assert_eq!(s.true_set, BTreeSet::from([1]));
        assert!(validate_sci(&s).ok);
    }

    #[test]
    fn sci_two_ultrafilters_differ() {
        let p = PreAlgebra::boolean(2);
        let a = sci_from_prealgebra(&p, 0, None).unwrap();
        let b = sci_from_prealgebra(&p, 1, None).unwrap();
        assert_ne!(a.true_set, b.true_set);
    }

    #[test]
    fn bad_id_table_rejected() {
        let p = PreAlgebra::classical();
        // id(0,1) lands in the truth set
        let tab = vec![vec![1, 1], vec![0, 1]];
        assert!(sci_from_prealgebra(&p, 0, Some(tab)).is_err());
    }

    #[test]
    fn round_trip_exact() {
        for p in [PreAlgebra::classical(), PreAlgebra::boolean(2), doubled()] {
            let fs = filters(&p).unwrap();
            for u in 0..fs.ultra.len() {
                let s = sci_from_prealgebra(&p, u, None).unwrap();
                let (p2, f) = prealgebra_from_sci(&s).unwrap();
                assert_eq!(p2, p);
                assert_eq!(f, fs.smallest);
            }
        }
    }

    #[test]
    fn simple_recovery_two_element_quotient() {
        let p = PreAlgebra::boolean(2);
        let s = sci_from_prealgebra(&p, 0, None).unwrap();
        let simple = prealgebra_from_sci_simple(&s).unwrap();
        // quotient classes: count distinct equivalence classes
        let mut classes = 0;
        let mut seen = vec![false; simple.n];
        for a in 0..simple.n {
            if seen[a] {
                continue;
            }
            classes += 1;
            for b in 0..simple.n {
                if simple.equiv(a, b) {
                    seen[b] = true;
                }
            }
        }
        assert_eq!(classes, 2);
    }

    #[test]
    fn lattice_order_refines_preorder() {
        // doubled() read as Boolean algebra on classes: check a <= b in the
        // bitmask algebra implies leq in boolean(2) trivially; the
        // interesting case is a prealgebra that is itself a Boolean algebra
        // with a coarser preorder: boolean(2) with leq from NEC = whole top
        // half is exercised in the models module; here assert lattice order
        // implies leq on the stock algebras.
        for p in [PreAlgebra::classical(), PreAlgebra::boolean(2)] {
            for a in 0..p.n {
                for b in 0..p.n {
                    if p.and_[a][b] == a {
                        assert!(p.leq[a][b]);
                    }
                }
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let p = PreAlgebra::boolean(2);
        let js = serde_json::to_string(&p).unwrap();
        assert!(js.contains("\"leq\""));
        let back: PreAlgebra = serde_json::from_str(&js).unwrap();
        assert_eq!(back, p);
        let s = sci_from_prealgebra(&p, 0, None).unwrap();
        let js = serde_json::to_string(&s).unwrap();
        assert!(js.contains("\"true\""));
        let back: SciModel = serde_json::from_str(&js).unwrap();
        assert_eq!(back, s);
    }
}
