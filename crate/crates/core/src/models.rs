//! Finite modal models with propositional quantifiers and identity.
//!
//! A [`ModalModel`] carries a truth set, a set of necessary propositions,
//! operation tables for the connectives, a total table for the quantifier
//! functional over all `n^n` unary functions, and an interpretation of
//! constants.  Validation checks the truth conditions outright and the
//! order-theoretic conditions against the definable-function closure up to
//! a configurable free-variable arity.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calculus::{check_instance, AxiomSet, System};
use crate::prealgebra::{validate_prealgebra, PreAlgebra};
use crate::sample::Sampler;
use crate::subst::{apply, Substitution};
use crate::syntax::{Formula, Fragment, Var};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("unknown constant `{0}`")]
    UnknownConstant(String),
    #[error("{0}")]
    Malformed(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("operation requires a normal model (NEC is empty)")]
    NonNormal,
}

/// Finite model on universe `0..n`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ModalModel {
    pub n: usize,
    pub true_set: BTreeSet<usize>,
    pub nec_set: BTreeSet<usize>,
    pub bot: usize,
    pub top: usize,
    pub neg: Vec<usize>,
    pub box_: Vec<usize>,
    pub or_: Vec<Vec<usize>>,
    pub and_: Vec<Vec<usize>>,
    pub imp: Vec<Vec<usize>>,
    pub id_: Vec<Vec<usize>>,
    /// Value of the quantifier functional for every unary function,
    /// indexed by [`ModalModel::forall_index`].
    pub forall_tab: Vec<usize>,
    /// Interpretation of constants by name (`bot` and `top` mandatory).
    pub gamma: BTreeMap<String, usize>,
}

impl ModalModel {
    /// The canonical two-element model: classical tables, `TRUE = NEC =
    /// {1}`, the quantifier as a meet.
    pub fn classical() -> ModalModel {
        let p = PreAlgebra::classical();
        let mut forall_tab = vec![0; 4];
        for t0 in 0..2 {
            for t1 in 0..2 {
                forall_tab[t0 + 2 * t1] = t0 & t1;
            }
        }
        ModalModel {
            n: 2,
            true_set: BTreeSet::from([1]),
            nec_set: BTreeSet::from([1]),
            bot: 0,
            top: 1,
            neg: p.neg,
            box_: vec![0, 1],
            or_: p.or_,
            and_: p.and_,
            imp: p.imp,
            id_: vec![vec![1, 0], vec![0, 1]],
            forall_tab,
            gamma: BTreeMap::from([("bot".into(), 0), ("top".into(), 1)]),
        }
    }

    /// Four-element model with two copies of each classical value.  Its
    /// quotient is the two-element algebra, `TRUE = NEC = {2, 3}`, so the
    /// two necessary propositions witness failure of the collapse
    /// equivalences.  Valid for all three systems.
    pub fn doubled_classical() -> ModalModel {
        let n = 4;
        let cls = |x: usize| x / 2;
        let rep = |c: usize| c * 2;
        let c2 = PreAlgebra::classical();
        let mut m = ModalModel {
            n,
            true_set: BTreeSet::from([2, 3]),
            nec_set: BTreeSet::from([2, 3]),
            bot: 0,
            top: 2,
            neg: vec![0; n],
            box_: vec![0; n],
            or_: vec![vec![0; n]; n],
            and_: vec![vec![0; n]; n],
            imp: vec![vec![0; n]; n],
            id_: vec![vec![0; n]; n],
            forall_tab: Vec::new(),
            gamma: BTreeMap::from([("bot".into(), 0), ("top".into(), 2)]),
        };
        for a in 0..n {
            m.neg[a] = rep(c2.neg[cls(a)]);
            m.box_[a] = if m.nec_set.contains(&a) { 2 } else { 0 };
            for b in 0..n {
                m.or_[a][b] = rep(c2.or_[cls(a)][cls(b)]);
                m.and_[a][b] = rep(c2.and_[cls(a)][cls(b)]);
                m.imp[a][b] = rep(c2.imp[cls(a)][cls(b)]);
                m.id_[a][b] = if a == b { 2 } else { 0 };
            }
        }
        m.forall_tab = (0..n.pow(n as u32))
            .map(|idx| {
                let t = decode_table(idx, n, n);
                if t.iter().all(|v| m.true_set.contains(v)) {
                    2
                } else {
                    0
                }
            })
            .collect();
        m
    }

    pub fn is_normal(&self) -> bool {
        !self.nec_set.is_empty()
    }

    /// The induced preorder: `a <= b` iff `imp(a,b)` is necessary.
    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.nec_set.contains(&self.imp[a][b])
    }

    pub fn equiv(&self, a: usize, b: usize) -> bool {
        self.leq(a, b) && self.leq(b, a)
    }

    /// Index of a unary table in `forall_tab`.
    pub fn forall_index(&self, t: &[usize]) -> usize {
        let mut idx = 0;
        for &v in t.iter().rev() {
            idx = idx * self.n + v;
        }
        idx
    }

    pub fn forall_of(&self, t: &[usize]) -> usize {
        self.forall_tab[self.forall_index(t)]
    }

    /// The underlying prealgebra with the induced preorder.
    pub fn reduct(&self) -> Result<PreAlgebra, ModelError> {
        if !self.is_normal() {
            return Err(ModelError::NonNormal);
        }
        Ok(PreAlgebra {
            n: self.n,
            bot: self.bot,
            top: self.top,
            neg: self.neg.clone(),
            or_: self.or_.clone(),
            and_: self.and_.clone(),
            imp: self.imp.clone(),
            leq: (0..self.n)
                .map(|a| (0..self.n).map(|b| self.leq(a, b)).collect())
                .collect(),
        })
    }
}

pub(crate) fn decode_table(mut idx: usize, len: usize, n: usize) -> Vec<usize> {
    let mut t = vec![0; len];
    for slot in t.iter_mut() {
        *slot = idx % n;
        idx /= n;
    }
    t
}

// ------------------------------------------------------------ assignments

/// Total assignment of elements to variables; unmentioned variables get the
/// model's bottom element.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Assignment {
    map: BTreeMap<Var, usize>,
}

impl Serialize for Assignment {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let repr: BTreeMap<String, usize> =
            self.map.iter().map(|(x, &a)| (x.to_string(), a)).collect();
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Assignment {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let repr = BTreeMap::<String, usize>::deserialize(d)?;
        let mut map = BTreeMap::new();
        for (key, a) in repr {
            let x = Var::parse(&key)
                .ok_or_else(|| D::Error::custom(format!("bad variable `{key}`")))?;
            map.insert(x, a);
        }
        Ok(Assignment { map })
    }
}

impl Assignment {
    pub fn new() -> Assignment {
        Assignment::default()
    }

    pub fn bind(mut self, x: Var, a: usize) -> Assignment {
        self.map.insert(x, a);
        self
    }

    pub fn get(&self, m: &ModalModel, x: Var) -> usize {
        self.map.get(&x).copied().unwrap_or(m.bot)
    }

    /// The updated assignment mapping `x` to `a` and all other variables as
    /// before.
    pub fn update(&self, x: Var, a: usize) -> Assignment {
        self.clone().bind(x, a)
    }

    /// Variables with an explicit binding.
    pub fn vars(&self) -> Vec<Var> {
        self.map.keys().copied().collect()
    }
}

/// Denotation of a formula under an assignment.
pub fn eval(m: &ModalModel, g: &Assignment, f: &Formula) -> Result<usize, ModelError> {
    Ok(match f {
        Formula::Var(x) => g.get(m, *x),
        Formula::Const(c) => *m
            .gamma
            .get(c.key())
            .ok_or_else(|| ModelError::UnknownConstant(c.to_string()))?,
        Formula::Neg(a) => m.neg[eval(m, g, a)?],
        Formula::Nec(a) => m.box_[eval(m, g, a)?],
        Formula::Or(a, b) => m.or_[eval(m, g, a)?][eval(m, g, b)?],
        Formula::And(a, b) => m.and_[eval(m, g, a)?][eval(m, g, b)?],
        Formula::Imp(a, b) => m.imp[eval(m, g, a)?][eval(m, g, b)?],
        Formula::Id(a, b) => m.id_[eval(m, g, a)?][eval(m, g, b)?],
        Formula::Forall(x, body) => {
            let mut section = Vec::with_capacity(m.n);
            for z in 0..m.n {
                section.push(eval(m, &g.update(*x, z), body)?);
            }
            m.forall_of(&section)
        }
    })
}

pub fn satisfies(m: &ModalModel, g: &Assignment, f: &Formula) -> Result<bool, ModelError> {
    Ok(m.true_set.contains(&eval(m, g, f)?))
}

/// Finite consequence approximation: true iff every listed normal
/// interpretation satisfying all hypotheses satisfies `f`.
pub fn consequence_over(
    models: &[(ModalModel, Assignment)],
    hyps: &[Formula],
    f: &Formula,
) -> Result<bool, ModelError> {
    for (m, g) in models {
        if !m.is_normal() {
            return Err(ModelError::NonNormal);
        }
        let mut all = true;
        for h in hyps {
            if !satisfies(m, g, h)? {
                all = false;
                break;
            }
        }
        if all && !satisfies(m, g, f)? {
            return Ok(false);
        }
    }
    Ok(true)
}

// --------------------------------------------------------- definable sets

/// Function tables closed under projections, constants, pointwise
/// operations and quantifier binding, stratified by arity.  Each table is
/// tagged with the bitmasks of argument positions witnessed as free
/// variables; only tables with the argument actually free count as
/// definable in the strict sense.
#[derive(Clone, Debug)]
pub struct DefinableSet {
    pub n: usize,
    pub arity_bound: usize,
    /// `tables[k]` maps an arity-`k` table (length `n^k`) to its witnessed
    /// free-position masks.
    tables: Vec<BTreeMap<Vec<usize>, BTreeSet<u32>>>,
    /// Elements denotable by formulas without free variables.
    pub sentence: BTreeSet<usize>,
}

impl DefinableSet {
    /// Unary functions definable with the bound variable free.
    pub fn unary(&self) -> Vec<Vec<usize>> {
        self.tables[1]
            .iter()
            .filter(|(_, masks)| masks.contains(&1))
            .map(|(t, _)| t.clone())
            .collect()
    }

    pub fn count(&self, arity: usize) -> usize {
        self.tables[arity].len()
    }
}

const CLOSURE_CAP: usize = 100_000;
const WORK_CAP: usize = 20_000_000;
const TABLE_COUNT_BUDGET: u128 = 100_000;

fn pointwise1(op: &[usize], t: &[usize]) -> Vec<usize> {
    t.iter().map(|&v| op[v]).collect()
}

fn pointwise2(op: &[Vec<usize>], a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().zip(b).map(|(&x, &y)| op[x][y]).collect()
}

/// Drops bit `j` from a free-position mask after binding that argument.
fn drop_bit(mask: u32, j: usize) -> u32 {
    ((mask >> (j + 1)) << j) | (mask & ((1 << j) - 1))
}

struct Closer {
    total: usize,
    work: usize,
}

impl Closer {
    fn spend(&mut self, amount: usize) -> Result<(), ModelError> {
        self.work += amount;
        if self.work > WORK_CAP {
            return Err(ModelError::Budget("definable closure work limit".into()));
        }
        Ok(())
    }

    fn add(
        &mut self,
        sets: &mut [BTreeMap<Vec<usize>, BTreeSet<u32>>],
        k: usize,
        t: Vec<usize>,
        mask: u32,
    ) -> Result<bool, ModelError> {
        let masks = sets[k].entry(t).or_default();
        if masks.insert(mask) {
            self.total += 1;
            if self.total > CLOSURE_CAP {
                return Err(ModelError::Budget(format!(
                    "definable closure exceeds {CLOSURE_CAP} entries"
                )));
            }
            return Ok(true);
        }
        Ok(false)
    }
}

fn close_tables(
    m: &ModalModel,
    arity: usize,
    consts: &BTreeSet<usize>,
) -> Result<Vec<BTreeMap<Vec<usize>, BTreeSet<u32>>>, ModelError> {
    let n = m.n;
    let mut sets: Vec<BTreeMap<Vec<usize>, BTreeSet<u32>>> = vec![BTreeMap::new(); arity + 1];
    let mut cl = Closer { total: 0, work: 0 };
    // per-arity worklists mirroring `sets`; `paired` and `bound` mark how
    // far each list has been processed, so every pair and every binding is
    // handled exactly once across the outer rounds
    let mut items: Vec<Vec<(Vec<usize>, u32)>> = vec![Vec::new(); arity + 1];
    let mut paired = vec![0usize; arity + 1];
    let mut bound_upto = vec![0usize; arity + 1];
    for k in 0..=arity {
        let len = n.pow(k as u32);
        for &c in consts {
            if cl.add(&mut sets, k, vec![c; len], 0)? {
                items[k].push((vec![c; len], 0));
            }
        }
        for i in 0..k {
            let stride = n.pow(i as u32);
            let proj: Vec<usize> = (0..len).map(|idx| idx / stride % n).collect();
            if cl.add(&mut sets, k, proj.clone(), 1 << i)? {
                items[k].push((proj, 1 << i));
            }
        }
    }
    loop {
        let mut changed = false;
        // pointwise closure within each arity
        for k in 0..=arity {
            let len = n.pow(k as u32);
            while paired[k] < items[k].len() {
                let i = paired[k];
                let (ti, mi) = items[k][i].clone();
                cl.spend(len * 2)?;
                for op in [&m.neg, &m.box_] {
                    let t = pointwise1(op, &ti);
                    if cl.add(&mut sets, k, t.clone(), mi)? {
                        items[k].push((t, mi));
                    }
                }
                cl.spend((i + 1) * len * 8)?;
                for j in 0..=i {
                    let (tj, mj) = items[k][j].clone();
                    for op in [&m.and_, &m.or_, &m.imp, &m.id_] {
                        for (a, b) in [(&ti, &tj), (&tj, &ti)] {
                            let t = pointwise2(op, a, b);
                            if cl.add(&mut sets, k, t.clone(), mi | mj)? {
                                items[k].push((t, mi | mj));
                            }
                        }
                    }
                }
                paired[k] += 1;
                changed = true;
            }
        }
        // quantifier binding from arity k+1 down to k
        for k in 0..arity {
            let len = n.pow(k as u32);
            while bound_upto[k + 1] < items[k + 1].len() {
                let (t, mask) = items[k + 1][bound_upto[k + 1]].clone();
                bound_upto[k + 1] += 1;
                for j in 0..=k {
                    if mask & (1 << j) == 0 {
                        continue;
                    }
                    cl.spend(len * n)?;
                    let lo = n.pow(j as u32);
                    let mut bound = vec![0; len];
                    for (idx, slot) in bound.iter_mut().enumerate() {
                        let low = idx % lo;
                        let high = idx / lo;
                        let section: Vec<usize> =
                            (0..n).map(|z| t[low + lo * (z + n * high)]).collect();
                        *slot = m.forall_of(&section);
                    }
                    if cl.add(&mut sets, k, bound.clone(), drop_bit(mask, j))? {
                        items[k].push((bound.clone(), drop_bit(mask, j)));
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return Ok(sets);
        }
    }
}

/// Computes the closure at the requested arity bound, degrading to smaller
/// bounds when the requested one exceeds the work budget (saturating
/// models can reach every table at arity 2).  The returned `arity_bound`
/// is the bound actually verified.
pub fn closure_within_budget(m: &ModalModel, k: usize) -> Result<DefinableSet, ModelError> {
    let mut last = None;
    for kk in (1..=k).rev() {
        match definable_closure(m, kk) {
            Ok(d) => return Ok(d),
            Err(ModelError::Budget(e)) => last = Some(ModelError::Budget(e)),
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap_or_else(|| ModelError::Malformed("arity bound must be at least 1".into())))
}

/// Least set of function tables closed under the definability rules, up to
/// free-variable arity `k`.
pub fn definable_closure(m: &ModalModel, k: usize) -> Result<DefinableSet, ModelError> {
    if k == 0 {
        return Err(ModelError::Malformed("arity bound must be at least 1".into()));
    }
    let domain = (m.n as u128).checked_pow(k as u32);
    let count = domain.and_then(|d| (m.n as u128).checked_pow(d.min(u32::MAX as u128) as u32));
    if count.map_or(true, |c| c > TABLE_COUNT_BUDGET) {
        return Err(ModelError::Budget(format!(
            "n={} with arity bound {k} admits too many function tables",
            m.n
        )));
    }
    // parameters may take any value, so the full hierarchy seeds constants
    // with every element; the sentence hierarchy only with Gamma values
    let all: BTreeSet<usize> = (0..m.n).collect();
    let tables = close_tables(m, k, &all)?;
    let gamma_elems: BTreeSet<usize> = m.gamma.values().copied().collect();
    let closed = close_tables(m, k, &gamma_elems)?;
    let sentence = closed[0].keys().map(|t| t[0]).collect();
    Ok(DefinableSet {
        n: m.n,
        arity_bound: k,
        tables,
        sentence,
    })
}

// -------------------------------------------------------------- validation

#[derive(Clone, Debug, Serialize)]
pub struct ModelReport {
    pub ok: bool,
    pub non_normal: bool,
    /// Conditions over definable functions were verified for functions
    /// definable with at most this many free variables.
    pub arity_bound: usize,
    pub violations: Vec<String>,
}

fn shape_errors(m: &ModalModel) -> Option<String> {
    let n = m.n;
    if n == 0 {
        return Some("empty universe".into());
    }
    if m.bot >= n || m.top >= n {
        return Some("bot/top out of range".into());
    }
    for (name, t) in [("neg", &m.neg), ("box", &m.box_)] {
        if t.len() != n || t.iter().any(|&v| v >= n) {
            return Some(format!("{name} table malformed"));
        }
    }
    for (name, t) in [("or", &m.or_), ("and", &m.and_), ("imp", &m.imp), ("id", &m.id_)] {
        if t.len() != n || t.iter().any(|r| r.len() != n || r.iter().any(|&v| v >= n)) {
            return Some(format!("{name} table malformed"));
        }
    }
    if m.forall_tab.len() != n.pow(n as u32) || m.forall_tab.iter().any(|&v| v >= n) {
        return Some("forall table must cover all unary functions".into());
    }
    if m.true_set.iter().any(|&v| v >= n) || m.nec_set.iter().any(|&v| v >= n) {
        return Some("true/nec set out of range".into());
    }
    if m.gamma.get("bot") != Some(&m.bot) || m.gamma.get("top") != Some(&m.top) {
        return Some("gamma must map bot and top to the distinguished elements".into());
    }
    if m.gamma.values().any(|&v| v >= n) {
        return Some("gamma value out of range".into());
    }
    None
}

/// Full validation for the given system.  Quantified conditions range over
/// the definable closure with arity bound `k`.
pub fn validate_modal_model(m: &ModalModel, system: System, k: usize) -> ModelReport {
    let mut v: Vec<String> = Vec::new();
    if let Some(msg) = shape_errors(m) {
        return ModelReport {
            ok: false,
            non_normal: !m.is_normal(),
            arity_bound: k,
            violations: vec![msg],
        };
    }
    let n = m.n;
    let t = |a: usize| m.true_set.contains(&a);
    let nec = |a: usize| m.nec_set.contains(&a);

    // truth conditions, checked in all models
    if t(m.bot) {
        v.push("bot is true".into());
    }
    if !t(m.top) {
        v.push("top is not true".into());
    }
    for a in 0..n {
        if t(m.neg[a]) != !t(a) {
            v.push(format!("negation truth condition fails at {a}"));
        }
        if t(m.box_[a]) != nec(a) {
            v.push(format!("box truth condition fails at {a}"));
        }
        for b in 0..n {
            if t(m.imp[a][b]) != (!t(a) || t(b)) {
                v.push(format!("implication truth condition fails at ({a},{b})"));
            }
            if t(m.and_[a][b]) != (t(a) && t(b)) {
                v.push(format!("conjunction truth condition fails at ({a},{b})"));
            }
            if t(m.or_[a][b]) != (t(a) || t(b)) {
                v.push(format!("disjunction truth condition fails at ({a},{b})"));
            }
            if t(m.id_[a][b]) != (a == b) {
                v.push(format!("identity truth condition fails at ({a},{b})"));
            }
        }
    }
    let def = match closure_within_budget(m, k) {
        Ok(d) => d,
        Err(e) => {
            v.push(format!("definable closure unavailable: {e}"));
            return ModelReport {
                ok: false,
                non_normal: !m.is_normal(),
                arity_bound: 0,
                violations: v,
            };
        }
    };
    let k = def.arity_bound;
    let unary = def.unary();
    for tab in &unary {
        if tab.iter().all(|&x| t(x)) && !t(m.forall_of(tab)) {
            v.push(format!("forall truth condition fails at {tab:?}"));
        }
    }
    if !m.is_normal() {
        // the order-theoretic conditions are vacuous without NEC
        let ok = v.is_empty();
        return ModelReport {
            ok,
            non_normal: true,
            arity_bound: k,
            violations: v,
        };
    }

    // reduct must be a Boolean prealgebra
    let p = m.reduct().expect("normal model has a reduct");
    let pr = validate_prealgebra(&p);
    if !pr.ok {
        v.push(format!(
            "induced reduct is not a prealgebra: {}",
            pr.violated.unwrap_or_default()
        ));
    }
    // NEC is a filter inside TRUE
    for &a in &m.nec_set {
        if !t(a) {
            v.push(format!("necessary proposition {a} is not true"));
        }
        for b in 0..n {
            if m.leq(a, b) && !nec(b) {
                v.push(format!("NEC not upward closed at ({a},{b})"));
            }
        }
        for &b in &m.nec_set {
            if !nec(m.and_[a][b]) {
                v.push(format!("NEC not meet closed at ({a},{b})"));
            }
        }
    }
    // elementwise order conditions
    for a in 0..n {
        if !m.leq(m.top, m.id_[a][a]) {
            v.push(format!("top <= id(a,a) fails at {a}"));
        }
        if !m.leq(m.box_[a], a) {
            v.push(format!("box(a) <= a fails at {a}"));
        }
        for b in 0..n {
            if !m.leq(m.id_[a][b], m.imp[a][b]) {
                v.push(format!("id <= imp fails at ({a},{b})"));
            }
            let k_lhs = m.box_[m.imp[a][b]];
            if !m.leq(k_lhs, m.imp[m.box_[a]][m.box_[b]]) {
                v.push(format!("K inequality fails at ({a},{b})"));
            }
            if !m.leq(k_lhs, m.box_[m.imp[m.box_[a]][m.box_[b]]]) {
                v.push(format!("strict K inequality fails at ({a},{b})"));
            }
        }
    }
    // conditions over definable unary functions
    for tab in &unary {
        for a in 0..n {
            if !m.leq(m.forall_of(tab), tab[a]) {
                v.push(format!("forall(t) <= t(a) fails for {tab:?} at {a}"));
            }
            for b in 0..n {
                if !m.leq(m.id_[a][b], m.id_[tab[a]][tab[b]]) {
                    v.push(format!("identity congruence fails for {tab:?} at ({a},{b})"));
                }
            }
        }
        let boxed = pointwise1(&m.box_, tab);
        if !m.equiv(m.box_[m.forall_of(tab)], m.forall_of(&boxed)) {
            v.push(format!("box(forall t) ~ forall(box t) fails for {tab:?}"));
        }
        if tab.iter().all(|&x| nec(x)) && !nec(m.forall_of(tab)) {
            v.push(format!("forall(t) in NEC fails for {tab:?}"));
        }
    }
    for t1 in &unary {
        for t2 in &unary {
            let idt = pointwise2(&m.id_, t1, t2);
            if !m.leq(
                m.forall_of(&idt),
                m.id_[m.forall_of(t1)][m.forall_of(t2)],
            ) {
                v.push(format!("quantified identity fails for {t1:?}, {t2:?}"));
            }
            let impt = pointwise2(&m.imp, t1, t2);
            if !m.leq(
                m.forall_of(&impt),
                m.imp[m.forall_of(t1)][m.forall_of(t2)],
            ) {
                v.push(format!("quantified distribution fails for {t1:?}, {t2:?}"));
            }
        }
        for &b in &def.sentence {
            let vac: Vec<usize> = t1.iter().map(|&x| m.imp[b][x]).collect();
            if !m.leq(m.forall_of(&vac), m.imp[b][m.forall_of(t1)]) {
                v.push(format!("vacuous-antecedent condition fails for {t1:?}, b={b}"));
            }
        }
    }
    // redundancy cross-checks: the K inequality follows from the strict one
    // plus box(a) <= a, and the NEC condition from the exchange law
    for a in 0..n {
        for b in 0..n {
            let strict = m.box_[m.imp[a][b]];
            if m.leq(strict, m.box_[m.imp[m.box_[a]][m.box_[b]]])
                && m.leq(m.box_[m.imp[m.box_[a]][m.box_[b]]], m.imp[m.box_[a]][m.box_[b]])
                && !m.leq(strict, m.imp[m.box_[a]][m.box_[b]])
            {
                v.push(format!("derived K inequality broken at ({a},{b})"));
            }
        }
    }
    for tab in &unary {
        let boxed = pointwise1(&m.box_, tab);
        if tab.iter().all(|&x| nec(x))
            && !(t(m.forall_of(&boxed)) && t(m.box_[m.forall_of(tab)]))
        {
            v.push(format!("derived NEC condition broken for {tab:?}"));
        }
    }
    // system clauses
    if system >= System::S4 {
        for a in 0..n {
            if !m.leq(m.box_[a], m.box_[m.box_[a]]) {
                v.push(format!("S4 clause fails at {a}"));
            }
        }
    }
    if system == System::S5 {
        for a in 0..n {
            let nb = m.neg[m.box_[a]];
            if !m.leq(nb, m.box_[nb]) {
                v.push(format!("S5 clause fails at {a}"));
            }
        }
    }
    let ok = v.is_empty();
    ModelReport {
        ok,
        non_normal: false,
        arity_bound: k,
        violations: v,
    }
}

// ------------------------------------------------------ collapse diagnosis

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CollapseReport {
    pub boolean_algebra: bool,
    pub collapse_axiom: bool,
    pub leq_antisymmetric: bool,
    pub strict_equals_identity: bool,
    /// The four equivalent collapse conditions agree on this model.
    pub all_equivalent: bool,
}

pub(crate) fn is_boolean_algebra(m: &ModalModel) -> bool {
    let n = m.n;
    for a in 0..n {
        if m.or_[a][m.neg[a]] != m.top || m.and_[a][m.neg[a]] != m.bot {
            return false;
        }
        if m.or_[a][m.bot] != a || m.and_[a][m.top] != a {
            return false;
        }
        for b in 0..n {
            if m.or_[a][b] != m.or_[b][a] || m.and_[a][b] != m.and_[b][a] {
                return false;
            }
            if m.or_[a][m.and_[a][b]] != a || m.and_[a][m.or_[a][b]] != a {
                return false;
            }
            if m.imp[a][b] != m.or_[m.neg[a]][b] {
                return false;
            }
            for c in 0..n {
                if m.and_[a][m.or_[b][c]] != m.or_[m.and_[a][b]][m.and_[a][c]]
                    || m.or_[a][m.and_[b][c]] != m.and_[m.or_[a][b]][m.or_[a][c]]
                {
                    return false;
                }
            }
        }
    }
    true
}

pub fn collapse_diagnostics(m: &ModalModel) -> Result<CollapseReport, ModelError> {
    if !m.is_normal() {
        return Err(ModelError::NonNormal);
    }
    let boolean_algebra = is_boolean_algebra(m);
    let collapse_axiom = m.nec_set.len() == 1;
    let mut leq_antisymmetric = true;
    let mut strict_equals_identity = true;
    for a in 0..m.n {
        for b in 0..m.n {
            let both = m.leq(a, b) && m.leq(b, a);
            if both && a != b {
                leq_antisymmetric = false;
            }
            if both != (a == b) {
                strict_equals_identity = false;
            }
        }
    }
    let one = boolean_algebra && collapse_axiom;
    let two = boolean_algebra && m.nec_set == BTreeSet::from([m.top]);
    let all_equivalent =
        one == two && two == leq_antisymmetric && leq_antisymmetric == strict_equals_identity;
    Ok(CollapseReport {
        boolean_algebra,
        collapse_axiom,
        leq_antisymmetric,
        strict_equals_identity,
        all_equivalent,
    })
}

// ----------------------------------------------------- simple-model checks

#[derive(Clone, Debug, Serialize)]
pub struct AdmissibleReport {
    pub ok: bool,
    pub samples: usize,
    pub violations: Vec<String>,
}

/// Checks the simple-model contract on a validated model: structural
/// properties on sampled inputs, the truth conditions, and admissibility of
/// sampled reduced-set axiom instances.
pub fn check_admissible_simple(
    m: &ModalModel,
    depth: u32,
    samples: usize,
    seed: u64,
) -> Result<AdmissibleReport, ModelError> {
    let mut v: Vec<String> = Vec::new();
    let n = m.n;
    let t = |a: usize| m.true_set.contains(&a);
    let nec = |a: usize| m.nec_set.contains(&a);
    let mut rng = Sampler::new(seed);
    let def = closure_within_budget(m, 2)?;
    let unary = def.unary();

    // truth conditions: the propositional ones mirror validation checks
    if t(m.bot) || !t(m.top) {
        v.push("bot/top truth condition fails".into());
    }
    for a in 0..n {
        if t(m.neg[a]) != !t(a) || t(m.box_[a]) != nec(a) {
            v.push(format!("unary truth condition fails at {a}"));
        }
        for b in 0..n {
            if t(m.imp[a][b]) != (!t(a) || t(b))
                || t(m.and_[a][b]) != (t(a) && t(b))
                || t(m.or_[a][b]) != (t(a) || t(b))
                || t(m.id_[a][b]) != (a == b)
            {
                v.push(format!("binary truth condition fails at ({a},{b})"));
            }
            // if imp(a,b) is necessary, so is imp(box a, box b)
            if nec(m.imp[a][b]) && !nec(m.imp[m.box_[a]][m.box_[b]]) {
                v.push(format!("boxed implication condition fails at ({a},{b})"));
            }
        }
    }
    for tab in &unary {
        let fv = m.forall_of(tab);
        if t(fv) != tab.iter().all(|&x| t(x)) {
            v.push(format!("quantifier truth condition fails for {tab:?}"));
        }
        if nec(fv) && !tab.iter().all(|&x| nec(x)) {
            v.push(format!("quantifier necessity condition fails for {tab:?}"));
        }
    }

    let mut total = 0usize;
    let random_assignment = |rng: &mut Sampler, nvars: u32| {
        let mut g = Assignment::new();
        for i in 0..nvars {
            g = g.bind(Var(i), rng.below(n));
        }
        g
    };
    // Coincidence: assignments agreeing on the free variables agree on the
    // formula
    for _ in 0..samples / 3 {
        total += 1;
        let f = rng.formula(depth, 3, Fragment::Full);
        let g = random_assignment(&mut rng, 6);
        let mut g2 = random_assignment(&mut rng, 6);
        for x in f.fvar() {
            g2 = g2.bind(x, g.get(m, x));
        }
        if eval(m, &g, &f)? != eval(m, &g2, &f)? {
            v.push(format!("coincidence fails for {}", f.render()));
        }
    }
    // Substitution: evaluating the substituted formula matches evaluating
    // under the composed assignment
    for _ in 0..samples / 3 {
        total += 1;
        let f = rng.formula(depth, 3, Fragment::Full);
        let mut sigma = Substitution::identity();
        for i in 0..3 {
            sigma.bind_var(Var(i), rng.formula(2, 3, Fragment::Full));
        }
        let g = random_assignment(&mut rng, 3);
        let mut gs = Assignment::new();
        for i in 0..6 {
            gs = gs.bind(Var(i), eval(m, &g, &sigma.var_image(Var(i)))?);
        }
        if eval(m, &g, &apply(&f, &sigma))? != eval(m, &gs, &f)? {
            v.push(format!("substitution property fails for {}", f.render()));
        }
    }
    // admissibility: sampled reduced-set axiom instances land in NEC
    for _ in 0..samples / 3 {
        total += 1;
        let inst = rng.instance(AxiomSet::Minus, System::S3);
        let f = check_instance(&inst, AxiomSet::Minus, System::S3)
            .map_err(|e| ModelError::Malformed(format!("sampled instance invalid: {e}")))?;
        if f.depth() > depth + 4 {
            continue;
        }
        let g = random_assignment(&mut rng, 6);
        if !nec(eval(m, &g, &f)?) {
            v.push(format!("axiom instance escapes NEC: {}", f.render()));
        }
    }
    let ok = v.is_empty();
    Ok(AdmissibleReport {
        ok,
        samples: total,
        violations: v,
    })
}

// ------------------------------------------------------------------ serde

#[derive(Serialize, Deserialize)]
struct ModalModelRepr {
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
    nec: Vec<usize>,
    #[serde(rename = "box")]
    box_: Vec<usize>,
    forall: BTreeMap<String, usize>,
    gamma: BTreeMap<String, usize>,
}

impl Serialize for ModalModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut forall = BTreeMap::new();
        for (idx, &val) in self.forall_tab.iter().enumerate() {
            let key = decode_table(idx, self.n, self.n)
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(",");
            forall.insert(key, val);
        }
        ModalModelRepr {
            n: self.n,
            bot: self.bot,
            top: self.top,
            neg: self.neg.clone(),
            and: self.and_.clone(),
            or: self.or_.clone(),
            imp: self.imp.clone(),
            true_set: self.true_set.iter().copied().collect(),
            id: self.id_.clone(),
            nec: self.nec_set.iter().copied().collect(),
            box_: self.box_.clone(),
            forall,
            gamma: self.gamma.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ModalModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let r = ModalModelRepr::deserialize(d)?;
        let n = r.n;
        if n == 0 || n > 8 {
            return Err(D::Error::custom("universe size must be between 1 and 8"));
        }
        let mut forall_tab = vec![usize::MAX; n.pow(n as u32)];
        for (key, val) in &r.forall /* "0,1" style vector keys */ {
            let mut table = Vec::with_capacity(n);
            for part in key.split(',') {
                table.push(
                    part.trim()
                        .parse::<usize>()
                        .map_err(|_| D::Error::custom(format!("bad forall key `{key}`")))?,
                );
            }
            if table.len() != n || table.iter().any(|&x| x >= n) {
                return Err(D::Error::custom(format!("bad forall key `{key}`")));
            }
            let mut idx = 0;
            for &x in table.iter().rev() {
                idx = idx * n + x;
            }
            forall_tab[idx] = *val;
        }
        if forall_tab.contains(&usize::MAX) {
            return Err(D::Error::custom(
                "forall table must cover all unary functions",
            ));
        }
        Ok(ModalModel {
            n,
            true_set: r.true_set.into_iter().collect(),
            nec_set: r.nec.into_iter().collect(),
            bot: r.bot,
            top: r.top,
            neg: r.neg,
            box_: r.box_,
            or_: r.or,
            and_: r.and,
            imp: r.imp,
            id_: r.id,
            forall_tab,
            gamma: r.gamma,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    #[test]
    fn classical_validates_all_systems() {
        let m = ModalModel::classical();
        for sys in [System::S3, System::S4, System::S5] {
            let r = validate_modal_model(&m, sys, 2);
            assert!(r.ok, "{:?}: {:?}", sys, r.violations);
        }
    }

    #[test]
    fn doubled_validates_and_defeats_collapse() {
        let m = ModalModel::doubled_classical();
        let r = validate_modal_model(&m, System::S5, 2);
        assert!(r.ok, "{:?}", r.violations);
        let c = collapse_diagnostics(&m).unwrap();
        assert!(!c.boolean_algebra);
        assert!(!c.collapse_axiom);
        assert!(!c.leq_antisymmetric);
        assert!(!c.strict_equals_identity);
        assert!(c.all_equivalent);
    }

    #[test]
    fn classical_collapse_all_true() {
        let c = collapse_diagnostics(&ModalModel::classical()).unwrap();
        assert!(c.boolean_algebra && c.collapse_axiom);
        assert!(c.leq_antisymmetric && c.strict_equals_identity);
        assert!(c.all_equivalent);
    }

    #[test]
    fn broken_truth_conditions_reported() {
        let mut m = ModalModel::classical();
        m.true_set.insert(0);
        let r = validate_modal_model(&m, System::S3, 1);
        assert!(!r.ok);
        assert!(r.violations.iter().any(|s| s.contains("bot is true")));

        let mut m = ModalModel::classical();
        m.id_[0][1] = 1;
        let r = validate_modal_model(&m, System::S3, 1);
        assert!(!r.ok);
        assert!(r.violations.iter().any(|s| s.contains("identity truth")));
    }

    #[test]
    fn eval_basics() {
        let m = ModalModel::classical();
        let g = Assignment::new();
        let f = parse("top -> bot").unwrap();
        assert_eq!(eval(&m, &g, &f).unwrap(), 0);
        let f = parse("forall x0. x0 == x0").unwrap();
        assert_eq!(eval(&m, &g, &f).unwrap(), 1);
        let f = parse("[]x0 -> x0").unwrap();
        for a in 0..2 {
            assert!(satisfies(&m, &Assignment::new().bind(Var(0), a), &f).unwrap());
        }
    }

    #[test]
    fn unknown_constant_rejected() {
        let m = ModalModel::classical();
        let f = parse("#undefined").unwrap();
        assert!(matches!(
            eval(&m, &Assignment::new(), &f),
            Err(ModelError::UnknownConstant(_))
        ));
    }

    #[test]
    fn closure_of_classical_contains_all_unaries() {
        let m = ModalModel::classical();
        let def = definable_closure(&m, 1).unwrap();
        // identity, negation and both constants are definable
        assert_eq!(def.unary().len(), 4);
        assert_eq!(def.sentence, BTreeSet::from([0, 1]));
    }

    #[test]
    fn consequence_over_collapse_formula() {
        let phi = parse("([]x0 & []x1) -> (x0 == x1)").unwrap();
        let canonical = vec![(ModalModel::classical(), Assignment::new())];
        assert!(consequence_over(&canonical, &[], &phi).unwrap());
        let counter = vec![(
            ModalModel::doubled_classical(),
            Assignment::new().bind(Var(0), 2).bind(Var(1), 3),
        )];
        assert!(!consequence_over(&counter, &[], &phi).unwrap());
    }

    #[test]
    fn admissible_simple_positive_and_negative() {
        let m = ModalModel::classical();
        let r = check_admissible_simple(&m, 3, 120, 7).unwrap();
        assert!(r.ok, "{:?}", r.violations);

        // corrupt the model: move box(top) out of NEC's reach
        let mut bad = ModalModel::doubled_classical();
        bad.box_[2] = 3;
        bad.box_[3] = 3;
        bad.nec_set = BTreeSet::from([2]);
        let r = check_admissible_simple(&bad, 3, 120, 7).unwrap();
        assert!(!r.ok);
    }

    #[test]
    fn json_round_trip() {
        for m in [ModalModel::classical(), ModalModel::doubled_classical()] {
            let js = serde_json::to_string(&m).unwrap();
            assert!(js.contains("\"forall\""));
            let back: ModalModel = serde_json::from_str(&js).unwrap();
            assert_eq!(back, m);
        }
    }

    #[test]
    fn substitution_lemma_on_models() {
        let m = ModalModel::doubled_classical();
        let mut rng = Sampler::new(11);
        for _ in 0..80 {
            let f = rng.formula(3, 3, Fragment::Full);
            let mut sigma = Substitution::identity();
            sigma.bind_var(Var(0), rng.formula(2, 2, Fragment::Full));
            sigma.bind_var(Var(1), rng.formula(2, 2, Fragment::Full));
            let g = Assignment::new().bind(Var(0), 1).bind(Var(1), 3).bind(Var(2), 2);
            let mut gs = Assignment::new();
            for i in 0..4 {
                gs = gs.bind(Var(i), eval(&m, &g, &sigma.var_image(Var(i))).unwrap());
            }
            assert_eq!(
                eval(&m, &g, &apply(&f, &sigma)).unwrap(),
                eval(&m, &gs, &f).unwrap(),
                "formula {}",
                f.render()
            );
        }
    }
}
