//! Relational semantics: frames with a distinguished set of normal worlds,
//! a preorder of accessibility, and a fixed range of propositions for the
//! quantifiers.
//!
//! Worlds are indexed `0..worlds.len()` and sets of worlds are bitmasks.
//! A frame carries its system kind: plain preorders, preorders with every
//! world normal, or equivalence relations.  Satisfaction evaluates a whole
//! extension (the set of worlds where a formula holds) in one pass, with
//! the quantifier ranging over the frame's propositions and the identity
//! connective comparing extensions inside the accessible cone.

use std::collections::{BTreeMap, BTreeSet};

use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::calculus::System;
use crate::models::{Assignment, ModalModel, ModelError};
use crate::prealgebra::filters;
use crate::syntax::{Const, Formula, Var};

/// Upper bound on the number of worlds, so world sets fit in a bitmask.
pub const MAX_WORLDS: usize = 16;

/// Universe-size cap for [`world_to_model`]: the produced model stores a
/// total quantifier table of size `n^n`.
pub const MAX_WORLD_MODEL: usize = 4;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KripkeFrame {
    pub worlds: Vec<String>,
    /// Indices of the normal worlds.
    pub normal: BTreeSet<usize>,
    /// `rel[w]` is the bitmask of worlds accessible from `w`.
    pub rel: Vec<u32>,
    /// Propositions available to the quantifier, as world bitmasks.
    pub props: Vec<u32>,
    pub kind: System,
}

impl KripkeFrame {
    pub fn full_mask(&self) -> u32 {
        if self.worlds.len() == 32 {
            u32::MAX
        } else {
            (1u32 << self.worlds.len()) - 1
        }
    }
}

/// Maps variables (and named constants) to indices into a frame's
/// proposition list.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KValuation {
    pub vars: BTreeMap<Var, usize>,
    pub consts: BTreeMap<String, usize>,
}

// ---------------------------------------------------------------- validity

#[derive(Clone, Debug, Serialize)]
pub struct FrameReport {
    pub ok: bool,
    pub violations: Vec<String>,
}

pub fn validate_frame(fr: &KripkeFrame) -> FrameReport {
    let mut v: Vec<String> = Vec::new();
    let w = fr.worlds.len();
    if w == 0 || w > MAX_WORLDS {
        return FrameReport {
            ok: false,
            violations: vec![format!("frame must have between 1 and {MAX_WORLDS} worlds")],
        };
    }
    let full = fr.full_mask();
    if fr.worlds.iter().collect::<BTreeSet<_>>().len() != w {
        v.push("world names must be distinct".into());
    }
    if fr.rel.len() != w || fr.rel.iter().any(|&r| r & !full != 0) {
        v.push("accessibility table malformed".into());
        return FrameReport { ok: false, violations: v };
    }
    if fr.normal.iter().any(|&x| x >= w) || fr.props.iter().any(|&p| p & !full != 0) {
        v.push("world index out of range".into());
        return FrameReport { ok: false, violations: v };
    }
    for a in 0..w {
        if fr.rel[a] & (1 << a) == 0 {
            v.push(format!("accessibility is not reflexive at {}", fr.worlds[a]));
        }
        for b in 0..w {
            if fr.rel[a] & (1 << b) != 0 && fr.rel[b] & !fr.rel[a] != 0 {
                v.push(format!(
                    "accessibility is not transitive at {} -> {}",
                    fr.worlds[a], fr.worlds[b]
                ));
            }
        }
        if !fr.normal.contains(&a) && fr.rel[a] != 1 << a {
            v.push(format!(
                "non-normal world {} must access exactly itself",
                fr.worlds[a]
            ));
        }
    }
    if fr.kind >= System::S4 && fr.normal.len() != w {
        v.push("every world must be normal for this kind".into());
    }
    if fr.kind == System::S5 {
        for a in 0..w {
            for b in 0..w {
                if (fr.rel[a] >> b) & 1 != (fr.rel[b] >> a) & 1 {
                    v.push(format!(
                        "accessibility is not symmetric between {} and {}",
                        fr.worlds[a], fr.worlds[b]
                    ));
                }
            }
        }
    }
    // the proposition range must support every connective
    let set: BTreeSet<u32> = fr.props.iter().copied().collect();
    if !set.contains(&0) || !set.contains(&full) {
        v.push("propositions must include the empty and the full set".into());
    }
    for &p in &set {
        if !set.contains(&(full & !p)) {
            v.push(format!("propositions not closed under complement at {p:#b}"));
        }
        if !set.contains(&box_mask(fr, p)) {
            v.push(format!("propositions not closed under necessitation at {p:#b}"));
        }
        for &q in &set {
            if !set.contains(&(p & q)) || !set.contains(&(p | q)) {
                v.push(format!(
                    "propositions not closed under meet/join at {p:#b}, {q:#b}"
                ));
            }
            if !set.contains(&id_mask(fr, p, q)) {
                v.push(format!(
                    "propositions not closed under identity at {p:#b}, {q:#b}"
                ));
            }
        }
    }
    let ok = v.is_empty();
    FrameReport { ok, violations: v }
}

fn box_mask(fr: &KripkeFrame, p: u32) -> u32 {
    let mut out = 0;
    for &a in &fr.normal {
        if fr.rel[a] & !p == 0 {
            out |= 1 << a;
        }
    }
    out
}

fn id_mask(fr: &KripkeFrame, p: u32, q: u32) -> u32 {
    let mut out = 0;
    for a in 0..fr.worlds.len() {
        if fr.rel[a] & p == fr.rel[a] & q {
            out |= 1 << a;
        }
    }
    out
}

// ------------------------------------------------------------ satisfaction

fn ext(
    fr: &KripkeFrame,
    env: &mut BTreeMap<Var, u32>,
    consts: &BTreeMap<String, usize>,
    f: &Formula,
) -> Result<u32, ModelError> {
    let full = fr.full_mask();
    Ok(match f {
        // unassigned variables default to the empty proposition, mirroring
        // the algebraic assignments
        Formula::Var(x) => env.get(x).copied().unwrap_or(0),
        Formula::Const(Const::Bot) => 0,
        Formula::Const(Const::Top) => full,
        Formula::Const(Const::Named(name)) => {
            let i = consts
                .get(name)
                .ok_or_else(|| ModelError::UnknownConstant(name.clone()))?;
            *fr.props
                .get(*i)
                .ok_or_else(|| ModelError::Malformed(format!("proposition index {i} out of range")))?
        }
        Formula::Neg(a) => full & !ext(fr, env, consts, a)?,
        Formula::Nec(a) => box_mask(fr, ext(fr, env, consts, a)?),
        Formula::Or(a, b) => ext(fr, env, consts, a)? | ext(fr, env, consts, b)?,
        Formula::And(a, b) => ext(fr, env, consts, a)? & ext(fr, env, consts, b)?,
        Formula::Imp(a, b) => (full & !ext(fr, env, consts, a)?) | ext(fr, env, consts, b)?,
        Formula::Id(a, b) => id_mask(fr, ext(fr, env, consts, a)?, ext(fr, env, consts, b)?),
        Formula::Forall(x, body) => {
            let saved = env.get(x).copied();
            let mut out = full;
            for &p in &fr.props {
                env.insert(*x, p);
                out &= ext(fr, env, consts, body)?;
            }
            match saved {
                Some(p) => env.insert(*x, p),
                None => env.remove(x),
            };
            out
        }
    })
}

/// The set of worlds where `f` holds under `g`, as a bitmask.
pub fn extension(fr: &KripkeFrame, g: &KValuation, f: &Formula) -> Result<u32, ModelError> {
    let mut env: BTreeMap<Var, u32> = BTreeMap::new();
    for (x, &i) in &g.vars {
        let p = fr
            .props
            .get(i)
            .ok_or_else(|| ModelError::Malformed(format!("proposition index {i} out of range")))?;
        env.insert(*x, *p);
    }
    ext(fr, &mut env, &g.consts, f)
}

/// Truth of `f` at a single world.
pub fn ksat(fr: &KripkeFrame, g: &KValuation, world: usize, f: &Formula) -> Result<bool, ModelError> {
    if world >= fr.worlds.len() {
        return Err(ModelError::Malformed(format!("world index {world} out of range")));
    }
    Ok(extension(fr, g, f)? & (1 << world) != 0)
}

// -------------------------------------------------- world into model

/// A model distilled from one world of a frame, with the book-keeping
/// needed to compare evaluations on both sides.
#[derive(Clone, Debug)]
pub struct WorldModel {
    pub model: ModalModel,
    /// For each element, the subset of the world's cone it stands for.
    pub elements: Vec<u32>,
    /// The valuation's variables transported into the model.
    pub assignment: Assignment,
}

/// Builds the algebra of propositions visible from `world`: elements are
/// the intersections of the frame's propositions with the accessible cone,
/// the connectives act on those sets, and two formulas denote the same
/// element exactly when the world satisfies their identity.
pub fn world_to_model(
    fr: &KripkeFrame,
    g: &KValuation,
    world: usize,
) -> Result<WorldModel, ModelError> {
    let w = fr.worlds.len();
    if world >= w {
        return Err(ModelError::Malformed(format!("world index {world} out of range")));
    }
    let cone = fr.rel[world];
    let elements: Vec<u32> = fr
        .props
        .iter()
        .map(|&p| p & cone)
        .collect::<BTreeSet<u32>>()
        .into_iter()
        .collect();
    let n = elements.len();
    if n > MAX_WORLD_MODEL {
        return Err(ModelError::Budget(format!(
            "world sees {n} distinct propositions, more than the supported {MAX_WORLD_MODEL}"
        )));
    }
    let index = |mask: u32| -> Result<usize, ModelError> {
        elements.binary_search(&mask).map_err(|_| {
            ModelError::Malformed("frame propositions are not closed under the connectives".into())
        })
    };
    if elements.first() != Some(&0) || elements.last() != Some(&cone) {
        return Err(ModelError::Malformed(
            "frame propositions must include the empty and the full set".into(),
        ));
    }
    let restricted = KripkeFrame {
        worlds: fr.worlds.clone(),
        normal: fr.normal.clone(),
        rel: fr.rel.clone(),
        props: Vec::new(),
        kind: fr.kind,
    };
    let mut neg = vec![0; n];
    let mut box_ = vec![0; n];
    let mut or_ = vec![vec![0; n]; n];
    let mut and_ = vec![vec![0; n]; n];
    let mut imp = vec![vec![0; n]; n];
    let mut id_ = vec![vec![0; n]; n];
    for a in 0..n {
        neg[a] = index(cone & !elements[a])?;
        box_[a] = index(cone & box_mask(&restricted, elements[a]))?;
        for b in 0..n {
            or_[a][b] = index(elements[a] | elements[b])?;
            and_[a][b] = index(elements[a] & elements[b])?;
            imp[a][b] = index((cone & !elements[a]) | elements[b])?;
            id_[a][b] = index(cone & id_mask(&restricted, elements[a], elements[b]))?;
        }
    }
    let true_set: BTreeSet<usize> = (0..n)
        .filter(|&a| elements[a] & (1 << world) != 0)
        .collect();
    let nec_set: BTreeSet<usize> = if fr.normal.contains(&world) {
        BTreeSet::from([n - 1])
    } else {
        BTreeSet::new()
    };
    // the quantifier takes the meet of a function's values; on functions
    // that arise as instance sections this is exactly the intersection of
    // the instances
    let mut forall_tab = vec![0; n.pow(n as u32)];
    for (idx, slot) in forall_tab.iter_mut().enumerate() {
        let mut rest = idx;
        let mut acc = cone;
        for _ in 0..n {
            acc &= elements[rest % n];
            rest /= n;
        }
        *slot = index(acc)?;
    }
    let mut gamma = BTreeMap::from([("bot".to_string(), 0), ("top".to_string(), n - 1)]);
    for (name, &i) in &g.consts {
        let p = fr
            .props
            .get(i)
            .ok_or_else(|| ModelError::Malformed(format!("proposition index {i} out of range")))?;
        gamma.insert(name.clone(), index(p & cone)?);
    }
    let mut assignment = Assignment::new();
    for (x, &i) in &g.vars {
        let p = fr
            .props
            .get(i)
            .ok_or_else(|| ModelError::Malformed(format!("proposition index {i} out of range")))?;
        assignment = assignment.bind(*x, index(p & cone)?);
    }
    Ok(WorldModel {
        model: ModalModel {
            n,
            true_set,
            nec_set,
            bot: 0,
            top: n - 1,
            neg,
            box_,
            or_,
            and_,
            imp,
            id_,
            forall_tab,
            gamma,
        },
        elements,
        assignment,
    })
}

// -------------------------------------------------- model into frame

/// A frame distilled from a model: worlds are the ultrafilters of the
/// reduct, accessibility follows the necessity trace, and each element
/// turns into the proposition of ultrafilters containing it.
#[derive(Clone, Debug)]
pub struct CanonicalFrame {
    pub frame: KripkeFrame,
    /// Index of the world corresponding to the model's truth set.
    pub world_of_true: usize,
    /// Proposition index of each model element.
    pub prop_of: Vec<usize>,
}

impl CanonicalFrame {
    /// Transports an algebraic assignment into a frame valuation.
    pub fn valuation_for(&self, m: &ModalModel, g: &Assignment) -> KValuation {
        let mut out = KValuation::default();
        for x in g.vars() {
            out.vars.insert(x, self.prop_of[g.get(m, x)]);
        }
        for (name, &e) in &m.gamma {
            if name != "bot" && name != "top" {
                out.consts.insert(name.clone(), self.prop_of[e]);
            }
        }
        out
    }
}

/// Only preorders whose box iterates (so S4 and S5 models) admit the
/// ultrafilter frame.
pub fn model_to_kripke(m: &ModalModel, system: System) -> Result<CanonicalFrame, ModelError> {
    if system < System::S4 {
        return Err(ModelError::Malformed(
            "the ultrafilter frame requires an S4 or S5 model".into(),
        ));
    }
    if !m.is_normal() {
        return Err(ModelError::NonNormal);
    }
    let p = m.reduct()?;
    let fl = filters(&p).map_err(|e| ModelError::Malformed(e.to_string()))?;
    let ultra = fl.ultra;
    let w = ultra.len();
    if w == 0 || w > MAX_WORLDS {
        return Err(ModelError::Budget(format!(
            "reduct has {w} ultrafilters, supported range is 1..={MAX_WORLDS}"
        )));
    }
    let world_of_true = ultra
        .iter()
        .position(|t| *t == m.true_set)
        .ok_or_else(|| ModelError::Malformed("truth set is not an ultrafilter".into()))?;
    let nec_t: Vec<BTreeSet<usize>> = ultra
        .iter()
        .map(|t| (0..m.n).filter(|&a| t.contains(&m.box_[a])).collect())
        .collect();
    let mut rel = vec![0u32; w];
    for i in 0..w {
        for (j, t) in ultra.iter().enumerate() {
            if nec_t[i].is_subset(t) {
                rel[i] |= 1 << j;
            }
        }
    }
    // sanity of the construction on a valid model
    for i in 0..w {
        if !m.nec_set.is_subset(&nec_t[i]) || !nec_t[i].is_subset(&ultra[i]) {
            return Err(ModelError::Malformed(
                "necessity trace escapes its ultrafilter; the model is not valid".into(),
            ));
        }
        let mut meet: BTreeSet<usize> = (0..m.n).collect();
        for (j, t) in ultra.iter().enumerate() {
            if rel[i] & (1 << j) != 0 {
                meet = meet.intersection(t).copied().collect();
            }
        }
        if meet != nec_t[i] {
            return Err(ModelError::Malformed(
                "necessity trace is not the meet of its successors; the model is not valid".into(),
            ));
        }
    }
    let mut props: Vec<u32> = Vec::new();
    let mut prop_of = vec![0usize; m.n];
    for a in 0..m.n {
        let mut mask = 0u32;
        for (j, t) in ultra.iter().enumerate() {
            if t.contains(&a) {
                mask |= 1 << j;
            }
        }
        prop_of[a] = match props.iter().position(|&p| p == mask) {
            Some(i) => i,
            None => {
                props.push(mask);
                props.len() - 1
            }
        };
    }
    let frame = KripkeFrame {
        worlds: (0..w).map(|i| format!("u{i}")).collect(),
        normal: (0..w).collect(),
        rel,
        props,
        kind: system,
    };
    let report = validate_frame(&frame);
    if !report.ok {
        return Err(ModelError::Malformed(format!(
            "ultrafilter frame is not valid: {}",
            report.violations.join("; ")
        )));
    }
    Ok(CanonicalFrame {
        frame,
        world_of_true,
        prop_of,
    })
}

// --------------------------------------------------------- frame inventory

/// All frames with up to `w_max` worlds of the given kind, propositions
/// fixed to the full powerset.
pub fn enumerate_frames(w_max: usize, kind: System) -> Result<Vec<KripkeFrame>, ModelError> {
    if w_max > 4 {
        return Err(ModelError::Budget(format!(
            "frame enumeration supports up to 4 worlds, requested {w_max}"
        )));
    }
    let mut out = Vec::new();
    for w in 1..=w_max.max(1) {
        let full = (1u32 << w) - 1;
        let props: Vec<u32> = (0..=full).collect();
        let offdiag: Vec<(usize, usize)> = (0..w)
            .flat_map(|a| (0..w).filter(move |&b| b != a).map(move |b| (a, b)))
            .collect();
        'rels: for bits in 0u32..1 << offdiag.len() {
            let mut rel: Vec<u32> = (0..w).map(|a| 1 << a).collect();
            for (i, &(a, b)) in offdiag.iter().enumerate() {
                if bits & (1 << i) != 0 {
                    rel[a] |= 1 << b;
                }
            }
            for a in 0..w {
                for b in 0..w {
                    if rel[a] & (1 << b) != 0 && rel[b] & !rel[a] != 0 {
                        continue 'rels;
                    }
                    if kind == System::S5 && (rel[a] >> b) & 1 != (rel[b] >> a) & 1 {
                        continue 'rels;
                    }
                }
            }
            let normals: Vec<BTreeSet<usize>> = if kind >= System::S4 {
                vec![(0..w).collect()]
            } else {
                (0..=full)
                    .filter(|nm| {
                        (0..w).all(|a| nm & (1 << a) != 0 || rel[a] == 1 << a)
                    })
                    .map(|nm| (0..w).filter(|&a| nm & (1 << a) != 0).collect())
                    .collect()
            };
            for normal in normals {
                out.push(KripkeFrame {
                    worlds: (0..w).map(|i| format!("w{i}")).collect(),
                    normal,
                    rel: rel.clone(),
                    props: props.clone(),
                    kind,
                });
            }
        }
    }
    Ok(out)
}

// ------------------------------------------------------------ conservativity

/// Result of searching small frames for a countermodel.
#[derive(Clone, Debug)]
pub struct ProbeOutcome {
    pub frames_checked: usize,
    /// A frame, world and valuation falsifying the formula, if any were
    /// found within the bound.
    pub countermodel: Option<(KripkeFrame, usize, KValuation)>,
}

/// Searches every frame with up to `w_max` worlds (powerset propositions)
/// and every valuation of the formula's free variables for a falsifying
/// world.  No countermodel within the bound is evidence, not proof, of
/// theoremhood.
pub fn probe(f: &Formula, system: System, w_max: usize) -> Result<ProbeOutcome, ModelError> {
    let vars: Vec<Var> = f.fvar().into_iter().collect();
    if vars.len() > 3 {
        return Err(ModelError::Budget(format!(
            "probe supports up to 3 free variables, got {}",
            vars.len()
        )));
    }
    let frames = enumerate_frames(w_max, system)?;
    let mut checked = 0;
    for fr in frames {
        let np = fr.props.len();
        let combos = np.pow(vars.len() as u32);
        for c in 0..combos {
            let mut g = KValuation::default();
            let mut rest = c;
            for &x in &vars {
                g.vars.insert(x, rest % np);
                rest /= np;
            }
            checked += 1;
            let e = extension(&fr, &g, f)?;
            // theoremhood is judged at normal worlds; a non-normal world
            // refutes every boxed formula by construction
            if let Some(&world) = fr.normal.iter().find(|&&wi| e & (1 << wi) == 0) {
                return Ok(ProbeOutcome {
                    frames_checked: checked,
                    countermodel: Some((fr, world, g)),
                });
            }
        }
    }
    Ok(ProbeOutcome {
        frames_checked: checked,
        countermodel: None,
    })
}

// ------------------------------------------------------------------- serde

#[derive(Serialize, Deserialize)]
struct FrameRepr {
    worlds: Vec<String>,
    normal: Vec<String>,
    rel: Vec<(String, String)>,
    props: Vec<Vec<String>>,
    kind: System,
}

impl Serialize for KripkeFrame {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let name = |i: usize| self.worlds[i].clone();
        let set = |mask: u32| -> Vec<String> {
            (0..self.worlds.len())
                .filter(|&i| mask & (1 << i) != 0)
                .map(name)
                .collect()
        };
        FrameRepr {
            worlds: self.worlds.clone(),
            normal: self.normal.iter().map(|&i| name(i)).collect(),
            rel: (0..self.worlds.len())
                .flat_map(|a| {
                    (0..self.worlds.len())
                        .filter(move |&b| self.rel[a] & (1 << b) != 0)
                        .map(move |b| (a, b))
                })
                .map(|(a, b)| (name(a), name(b)))
                .collect(),
            props: self.props.iter().map(|&p| set(p)).collect(),
            kind: self.kind,
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for KripkeFrame {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let repr = FrameRepr::deserialize(de)?;
        let w = repr.worlds.len();
        if w == 0 || w > MAX_WORLDS {
            return Err(D::Error::custom(format!(
                "frame must have between 1 and {MAX_WORLDS} worlds"
            )));
        }
        let index: BTreeMap<&str, usize> = repr
            .worlds
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        if index.len() != w {
            return Err(D::Error::custom("world names must be distinct"));
        }
        let look = |n: &str| -> Result<usize, D::Error> {
            index
                .get(n)
                .copied()
                .ok_or_else(|| D::Error::custom(format!("unknown world `{n}`")))
        };
        let mut rel = vec![0u32; w];
        for (a, b) in &repr.rel {
            rel[look(a)?] |= 1 << look(b)?;
        }
        let mut normal = BTreeSet::new();
        for n in &repr.normal {
            normal.insert(look(n)?);
        }
        let mut props = Vec::with_capacity(repr.props.len());
        for p in &repr.props {
            let mut mask = 0u32;
            for n in p {
                mask |= 1 << look(n)?;
            }
            props.push(mask);
        }
        Ok(KripkeFrame {
            worlds: repr.worlds,
            normal,
            rel,
            props,
            kind: repr.kind,
        })
    }
}

impl Serialize for KValuation {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let mut map: BTreeMap<String, usize> = BTreeMap::new();
        for (x, &i) in &self.vars {
            map.insert(x.to_string(), i);
        }
        for (name, &i) in &self.consts {
            map.insert(format!("#{name}"), i);
        }
        map.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for KValuation {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let map: BTreeMap<String, usize> = BTreeMap::deserialize(de)?;
        let mut out = KValuation::default();
        for (key, i) in map {
            if let Some(name) = key.strip_prefix('#') {
                out.consts.insert(name.to_string(), i);
            } else if let Some(x) = Var::parse(&key) {
                out.vars.insert(x, i);
            } else {
                return Err(D::Error::custom(format!(
                    "key `{key}` is neither a variable nor a #constant"
                )));
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{eval, satisfies, validate_modal_model};
    use crate::sample::Sampler;
    use crate::syntax::{parse, Fragment};

    /// Two worlds, only the first normal, both accessing themselves only.
    fn split_frame() -> KripkeFrame {
        KripkeFrame {
            worlds: vec!["a".into(), "b".into()],
            normal: BTreeSet::from([0]),
            rel: vec![0b01, 0b10],
            props: (0..4).collect(),
            kind: System::S3,
        }
    }

    /// Three totally connected worlds, everything normal.
    fn cluster_frame(kind: System) -> KripkeFrame {
        KripkeFrame {
            worlds: vec!["a".into(), "b".into(), "c".into()],
            normal: BTreeSet::from([0, 1, 2]),
            rel: vec![0b111; 3],
            props: (0..8).collect(),
            kind,
        }
    }

    #[test]
    fn validation_accepts_and_rejects() {
        assert!(validate_frame(&split_frame()).ok);
        assert!(validate_frame(&cluster_frame(System::S5)).ok);
        let mut bad = cluster_frame(System::S5);
        bad.rel[1] = 0b011;
        assert!(!validate_frame(&bad).ok);
        let mut sparse = split_frame();
        sparse.props = vec![0, 3, 1];
        let rep = validate_frame(&sparse);
        assert!(rep.violations.iter().any(|v| v.contains("complement")));
        let mut lazy = split_frame();
        lazy.normal = BTreeSet::new();
        assert!(validate_frame(&lazy).ok);
    }

    #[test]
    fn satisfaction_basics() {
        let fr = split_frame();
        let mut g = KValuation::default();
        g.vars.insert(Var(0), 1); // {a}
        let f = parse("[]x0 -> x0").unwrap();
        assert_eq!(extension(&fr, &g, &f).unwrap(), 0b11);
        // the non-normal world refutes every necessity
        let f = parse("[]top").unwrap();
        assert_eq!(extension(&fr, &g, &f).unwrap(), 0b01);
        // named constants resolve through the valuation
        let f = parse("[]#everything").unwrap();
        g.consts.insert("everything".into(), 3);
        assert_eq!(extension(&fr, &g, &f).unwrap(), 0b01);
        // quantifier ranges over the proposition set
        let f = parse("forall x1. ([]x1 -> x1)").unwrap();
        assert_eq!(extension(&fr, &g, &f).unwrap(), 0b11);
        let f = parse("forall x1. x1").unwrap();
        assert_eq!(extension(&fr, &g, &f).unwrap(), 0);
    }

    #[test]
    fn identity_refines_strict_equivalence() {
        let mut sm = Sampler::new(0x1dc4);
        for fr in [split_frame(), cluster_frame(System::S4)] {
            let normal_mask: u32 = fr.normal.iter().map(|&a| 1 << a).sum();
            for _ in 0..40 {
                let a = sm.formula(3, 2, Fragment::Modal);
                let b = sm.formula(3, 2, Fragment::Modal);
                for c in 0..fr.props.len().pow(2) {
                    let mut g = KValuation::default();
                    g.vars.insert(Var(0), c % fr.props.len());
                    g.vars.insert(Var(1), c / fr.props.len());
                    let refine = Formula::Imp(
                        Box::new(Formula::Id(Box::new(a.clone()), Box::new(b.clone()))),
                        Box::new(Formula::Nec(Box::new(Formula::And(
                            Box::new(Formula::Imp(Box::new(a.clone()), Box::new(b.clone()))),
                            Box::new(Formula::Imp(Box::new(b.clone()), Box::new(a.clone()))),
                        )))),
                    );
                    let e = extension(&fr, &g, &refine).unwrap();
                    assert_eq!(e & normal_mask, normal_mask);
                }
            }
        }
    }

    #[test]
    fn probe_distinguishes_systems() {
        let f = parse("[]x0 -> x0").unwrap();
        for system in [System::S3, System::S4, System::S5] {
            assert!(probe(&f, system, 3).unwrap().countermodel.is_none());
        }
        let four = parse("[]x0 -> [][]x0").unwrap();
        let hit = probe(&four, System::S3, 2).unwrap();
        let (fr, world, g) = hit.countermodel.expect("expected a countermodel");
        assert!(!ksat(&fr, &g, world, &four).unwrap());
        assert!(probe(&four, System::S4, 3).unwrap().countermodel.is_none());
        let five = parse("~[]x0 -> []~[]x0").unwrap();
        assert!(probe(&five, System::S4, 2).unwrap().countermodel.is_some());
        assert!(probe(&five, System::S5, 3).unwrap().countermodel.is_none());
    }

    #[test]
    fn world_models_agree_with_satisfaction() {
        let mut sm = Sampler::new(0x77aa);
        for fr in [split_frame(), cluster_frame(System::S5)] {
            for world in 0..fr.worlds.len() {
                let mut g = KValuation::default();
                g.vars.insert(Var(0), 1);
                g.vars.insert(Var(1), fr.props.len() - 1);
                let wm = match world_to_model(&fr, &g, world) {
                    Ok(wm) => wm,
                    Err(ModelError::Budget(_)) => continue,
                    Err(e) => panic!("{e}"),
                };
                let report = validate_modal_model(&wm.model, fr.kind, 2);
                assert!(report.ok, "{:?}", report.violations);
                assert_eq!(wm.model.is_normal(), fr.normal.contains(&world));
                for _ in 0..150 {
                    let f = sm.formula(4, 2, Fragment::Full);
                    let algebraic = satisfies(&wm.model, &wm.assignment, &f).unwrap();
                    let relational = ksat(&fr, &g, world, &f).unwrap();
                    assert_eq!(algebraic, relational, "disagree on {}", f.render());
                }
            }
        }
    }

    #[test]
    fn world_model_collapses() {
        let fr = cluster_frame(System::S5);
        let g = KValuation::default();
        let wm = world_to_model(&fr, &g, 0);
        // eight distinct propositions in the cone: over budget by design
        assert!(matches!(wm, Err(ModelError::Budget(_))));
        let fr = split_frame();
        let wm = world_to_model(&fr, &g, 0).unwrap();
        assert_eq!(wm.model.nec_set.len(), 1);
    }

    #[test]
    fn canonical_frame_round_trip() {
        let mut sm = Sampler::new(0x9b1);
        for m in [ModalModel::classical(), ModalModel::doubled_classical()] {
            let cf = model_to_kripke(&m, System::S5).unwrap();
            assert!(validate_frame(&cf.frame).ok);
            let g = Assignment::new().bind(Var(0), m.top).bind(Var(1), m.bot);
            let kg = cf.valuation_for(&m, &g);
            for _ in 0..200 {
                let f = sm.formula(4, 2, Fragment::Modal);
                let e = eval(&m, &g, &f).unwrap();
                for (wi, t) in filters(&m.reduct().unwrap()).unwrap().ultra.iter().enumerate() {
                    assert_eq!(
                        ksat(&cf.frame, &kg, wi, &f).unwrap(),
                        t.contains(&e),
                        "disagree on {} at world {wi}",
                        f.render()
                    );
                }
                assert_eq!(
                    ksat(&cf.frame, &kg, cf.world_of_true, &f).unwrap(),
                    satisfies(&m, &g, &f).unwrap()
                );
            }
        }
    }

    #[test]
    fn s3_model_is_rejected_by_canonical_frame() {
        let m = ModalModel::classical();
        assert!(model_to_kripke(&m, System::S3).is_err());
    }

    #[test]
    fn frame_serde_round_trip() {
        for fr in [split_frame(), cluster_frame(System::S4)] {
            let json = serde_json::to_string(&fr).unwrap();
            let back: KripkeFrame = serde_json::from_str(&json).unwrap();
            assert_eq!(fr, back);
        }
        let mut g = KValuation::default();
        g.vars.insert(Var(2), 1);
        g.consts.insert("c".into(), 0);
        let json = serde_json::to_string(&g).unwrap();
        assert_eq!(json, r##"{"#c":0,"x2":1}"##);
        let back: KValuation = serde_json::from_str(&json).unwrap();
        assert_eq!(g, back);
    }
}
