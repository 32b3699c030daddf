//! Hilbert-style proof calculus with witnessed axiom instances.
//!
//! Axiom schemes (`Scheme`) carry the witnesses needed to rebuild the axiom
//! formula, so checking an instance is deterministic reconstruction plus
//! side conditions.  Derivations are line sequences justified by hypothesis
//! reference, axiom instance, axiom necessitation (AN), or modus ponens.
//! There is no general necessitation rule: AN applies to axioms only.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::subst::{alpha_eq, subst_var};
use crate::syntax::{Const, Formula, Var};

/// Which Lewis system a derivation lives in.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum System {
    S3,
    S4,
    S5,
}

impl System {
    pub fn index(self) -> u8 {
        match self {
            System::S3 => 3,
            System::S4 => 4,
            System::S5 => 5,
        }
    }
}

impl TryFrom<u8> for System {
    type Error = String;
    fn try_from(v: u8) -> Result<Self, String> {
        match v {
            3 => Ok(System::S3),
            4 => Ok(System::S4),
            5 => Ok(System::S5),
            _ => Err(format!("system must be 3, 4 or 5, got {v}")),
        }
    }
}

impl From<System> for u8 {
    fn from(s: System) -> u8 {
        s.index()
    }
}

/// Full axiom set, or the reduced set dropping quantified-identity
/// congruence over `forall` and the Barcan scheme.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum AxiomSet {
    #[serde(rename = "full")]
    Full,
    #[serde(rename = "minus")]
    Minus,
}

/// Witnessed axiom scheme instance.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Scheme {
    /// Propositional tautology or substitution instance thereof.
    Taut { formula: Formula },
    /// `[]f -> f`
    T { phi: Formula },
    /// `[](f -> g) -> ([]f -> []g)`
    K { phi: Formula, psi: Formula },
    /// `[](f -> g) -> []([]f -> []g)`
    K4 { phi: Formula, psi: Formula },
    /// `f == g` for alpha-equivalent `f`, `g`
    Alpha { lhs: Formula, rhs: Formula },
    /// `(f == g) -> (f -> g)`
    IdImp { lhs: Formula, rhs: Formula },
    /// `(g == g') -> (t[x:=g] == t[x:=g'])`, `x` free in `t`
    IdCong {
        template: Formula,
        var: Var,
        lhs: Formula,
        rhs: Formula,
    },
    /// `(forall x. f == g) -> ((forall x. f) == (forall x. g))`
    IdForall { var: Var, lhs: Formula, rhs: Formula },
    /// `(forall x. f) -> f[x:=w]`
    Inst {
        var: Var,
        body: Formula,
        witness: Formula,
    },
    /// `(forall x. f -> g) -> ((forall x. f) -> (forall x. g))`
    Distr { var: Var, lhs: Formula, rhs: Formula },
    /// `(forall x. f -> g) -> (f -> forall x. g)`, `x` not free in `f`
    Vac { var: Var, lhs: Formula, rhs: Formula },
    /// `[](forall x. f) -> forall x. []f`
    Cbf { var: Var, body: Formula },
    /// `(forall x. []f) -> [](forall x. f)`
    Barcan { var: Var, body: Formula },
    /// `[]f -> [][]f` (systems 4 and 5)
    Four { phi: Formula },
    /// `~[]f -> []~[]f` (system 5)
    Five { phi: Formula },
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Taut { .. } => "taut",
            Scheme::T { .. } => "t",
            Scheme::K { .. } => "k",
            Scheme::K4 { .. } => "k4",
            Scheme::Alpha { .. } => "alpha",
            Scheme::IdImp { .. } => "id-imp",
            Scheme::IdCong { .. } => "id-cong",
            Scheme::IdForall { .. } => "id-forall",
            Scheme::Inst { .. } => "inst",
            Scheme::Distr { .. } => "distr",
            Scheme::Vac { .. } => "vac",
            Scheme::Cbf { .. } => "cbf",
            Scheme::Barcan { .. } => "barcan",
            Scheme::Four { .. } => "four",
            Scheme::Five { .. } => "five",
        }
    }

    /// True when this scheme is one of the four core modal schemes shared by
    /// plain S3 (tautologies, T, K, strict K4).
    pub fn is_s3_core(&self) -> bool {
        matches!(
            self,
            Scheme::Taut { .. } | Scheme::T { .. } | Scheme::K { .. } | Scheme::K4 { .. }
        )
    }
}

/// A scheme instance together with its universal-closure prefix: with
/// `foralls = [x, y]` the axiom is `forall x. forall y. <scheme>`, each
/// wrap requiring the variable free at that point.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AxiomInstance {
    pub scheme: Scheme,
    pub foralls: Vec<Var>,
}

impl AxiomInstance {
    pub fn plain(scheme: Scheme) -> AxiomInstance {
        AxiomInstance {
            scheme,
            foralls: Vec::new(),
        }
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum CalculusError {
    #[error("tautology check limit exceeded: {atoms} atoms > {max}")]
    TooManyAtoms { atoms: usize, max: usize },
    #[error("not a tautology instance: {0}")]
    NotTaut(String),
    #[error("scheme {scheme} is not available in this axiom set / system")]
    SchemeUnavailable { scheme: &'static str },
    #[error("side condition violated for scheme {scheme}: {msg}")]
    SideCondition { scheme: &'static str, msg: String },
    #[error("closure variable {var} is not free in the formula being closed")]
    ClosureNotFree { var: Var },
    #[error("line {index}: {msg}")]
    BadLine { index: usize, msg: String },
    #[error("derivation has no lines")]
    Empty,
    #[error("{0}")]
    Transform(String),
}

/// Default atom budget for tautology checking.
pub const DEFAULT_MAX_TAUT_ATOMS: usize = 24;

/// Decides whether `f` is a propositional tautology after abstracting each
/// maximal subformula whose head is not a Boolean connective (variables,
/// constants, `[]`, `==`, `forall`) to an atom; identical subtrees share an
/// atom.  Note that `bot`/`top` are abstracted too, so this predicate is
/// deliberately conservative about constants.
pub fn taut_instance(f: &Formula, max_atoms: usize) -> Result<bool, CalculusError> {
    let mut atoms: HashMap<&Formula, usize> = HashMap::new();
    let mut order: Vec<&Formula> = Vec::new();
    collect_atoms(f, &mut atoms, &mut order);
    let k = order.len();
    if k > max_atoms {
        return Err(CalculusError::TooManyAtoms {
            atoms: k,
            max: max_atoms,
        });
    }
    for mask in 0u64..(1u64 << k) {
        if !eval_bool(f, &atoms, mask) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn collect_atoms<'a>(
    f: &'a Formula,
    atoms: &mut HashMap<&'a Formula, usize>,
    order: &mut Vec<&'a Formula>,
) {
    match f {
        Formula::Neg(a) => collect_atoms(a, atoms, order),
        Formula::Or(a, b) | Formula::And(a, b) | Formula::Imp(a, b) => {
            collect_atoms(a, atoms, order);
            collect_atoms(b, atoms, order);
        }
        _ => {
            if !atoms.contains_key(f) {
                atoms.insert(f, order.len());
                order.push(f);
            }
        }
    }
}

fn eval_bool(f: &Formula, atoms: &HashMap<&Formula, usize>, mask: u64) -> bool {
    match f {
        Formula::Neg(a) => !eval_bool(a, atoms, mask),
        Formula::Or(a, b) => eval_bool(a, atoms, mask) || eval_bool(b, atoms, mask),
        Formula::And(a, b) => eval_bool(a, atoms, mask) && eval_bool(b, atoms, mask),
        Formula::Imp(a, b) => !eval_bool(a, atoms, mask) || eval_bool(b, atoms, mask),
        _ => mask >> atoms[f] & 1 == 1,
    }
}

fn nec(f: Formula) -> Formula {
    Formula::Nec(Box::new(f))
}
fn imp(a: Formula, b: Formula) -> Formula {
    Formula::Imp(Box::new(a), Box::new(b))
}
fn fid(a: Formula, b: Formula) -> Formula {
    Formula::Id(Box::new(a), Box::new(b))
}

fn require_free(scheme: &'static str, x: Var, f: &Formula, role: &str) -> Result<(), CalculusError> {
    if f.fvar().contains(&x) {
        Ok(())
    } else {
        Err(CalculusError::SideCondition {
            scheme,
            msg: format!("{x} must be free in {role} `{f}`"),
        })
    }
}

fn require_not_free(
    scheme: &'static str,
    x: Var,
    f: &Formula,
    role: &str,
) -> Result<(), CalculusError> {
    if !f.fvar().contains(&x) {
        Ok(())
    } else {
        Err(CalculusError::SideCondition {
            scheme,
            msg: format!("{x} must not be free in {role} `{f}`"),
        })
    }
}

fn forall_wf(scheme: &'static str, x: Var, body: Formula) -> Result<Formula, CalculusError> {
    Formula::forall(x, body).map_err(|_| CalculusError::SideCondition {
        scheme,
        msg: format!("forall {x} would bind no free occurrence"),
    })
}

/// Checks availability and side conditions, and reconstructs the axiom
/// formula (including the universal-closure prefix).
pub fn check_instance(
    inst: &AxiomInstance,
    set: AxiomSet,
    system: System,
) -> Result<Formula, CalculusError> {
    let s = &inst.scheme;
    let available = match s {
        Scheme::IdForall { .. } | Scheme::Barcan { .. } => set == AxiomSet::Full,
        Scheme::Four { .. } => system >= System::S4,
        Scheme::Five { .. } => system == System::S5,
        _ => true,
    };
    if !available {
        return Err(CalculusError::SchemeUnavailable { scheme: s.name() });
    }
    let core = match s {
        Scheme::Taut { formula } => {
            if !taut_instance(formula, DEFAULT_MAX_TAUT_ATOMS)? {
                return Err(CalculusError::NotTaut(formula.render()));
            }
            formula.clone()
        }
        Scheme::T { phi } => imp(nec(phi.clone()), phi.clone()),
        Scheme::K { phi, psi } => imp(
            nec(imp(phi.clone(), psi.clone())),
            imp(nec(phi.clone()), nec(psi.clone())),
        ),
        Scheme::K4 { phi, psi } => imp(
            nec(imp(phi.clone(), psi.clone())),
            nec(imp(nec(phi.clone()), nec(psi.clone()))),
        ),
        Scheme::Alpha { lhs, rhs } => {
            if !alpha_eq(lhs, rhs) {
                return Err(CalculusError::SideCondition {
                    scheme: "alpha",
                    msg: format!("`{lhs}` and `{rhs}` are not alpha-equivalent"),
                });
            }
            fid(lhs.clone(), rhs.clone())
        }
        Scheme::IdImp { lhs, rhs } => imp(
            fid(lhs.clone(), rhs.clone()),
            imp(lhs.clone(), rhs.clone()),
        ),
        Scheme::IdCong {
            template,
            var,
            lhs,
            rhs,
        } => {
            require_free("id-cong", *var, template, "the template")?;
            imp(
                fid(lhs.clone(), rhs.clone()),
                fid(
                    subst_var(template, *var, lhs.clone()),
                    subst_var(template, *var, rhs.clone()),
                ),
            )
        }
        Scheme::IdForall { var, lhs, rhs } => {
            require_free("id-forall", *var, lhs, "the left formula")?;
            require_free("id-forall", *var, rhs, "the right formula")?;
            imp(
                forall_wf("id-forall", *var, fid(lhs.clone(), rhs.clone()))?,
                fid(
                    forall_wf("id-forall", *var, lhs.clone())?,
                    forall_wf("id-forall", *var, rhs.clone())?,
                ),
            )
        }
        Scheme::Inst { var, body, witness } => {
            require_free("inst", *var, body, "the body")?;
            imp(
                forall_wf("inst", *var, body.clone())?,
                subst_var(body, *var, witness.clone()),
            )
        }
        Scheme::Distr { var, lhs, rhs } => {
            require_free("distr", *var, lhs, "the antecedent")?;
            require_free("distr", *var, rhs, "the consequent")?;
            imp(
                forall_wf("distr", *var, imp(lhs.clone(), rhs.clone()))?,
                imp(
                    forall_wf("distr", *var, lhs.clone())?,
                    forall_wf("distr", *var, rhs.clone())?,
                ),
            )
        }
        Scheme::Vac { var, lhs, rhs } => {
            require_not_free("vac", *var, lhs, "the antecedent")?;
            require_free("vac", *var, rhs, "the consequent")?;
            imp(
                forall_wf("vac", *var, imp(lhs.clone(), rhs.clone()))?,
                imp(lhs.clone(), forall_wf("vac", *var, rhs.clone())?),
            )
        }
        Scheme::Cbf { var, body } => {
            require_free("cbf", *var, body, "the body")?;
            imp(
                nec(forall_wf("cbf", *var, body.clone())?),
                forall_wf("cbf", *var, nec(body.clone()))?,
            )
        }
        Scheme::Barcan { var, body } => {
            require_free("barcan", *var, body, "the body")?;
            imp(
                forall_wf("barcan", *var, nec(body.clone()))?,
                nec(forall_wf("barcan", *var, body.clone())?),
            )
        }
        Scheme::Four { phi } => imp(nec(phi.clone()), nec(nec(phi.clone()))),
        Scheme::Five { phi } => imp(
            Formula::Neg(Box::new(nec(phi.clone()))),
            nec(Formula::Neg(Box::new(nec(phi.clone())))),
        ),
    };
    // Universal closure: innermost variable listed last.
    let mut out = core;
    for x in inst.foralls.iter().rev() {
        out = Formula::forall(*x, out).map_err(|_| CalculusError::ClosureNotFree { var: *x })?;
    }
    Ok(out)
}

// ----------------------------------------------------------- derivations

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Justification {
    Hyp(usize),
    Axiom(AxiomInstance),
    An(AxiomInstance),
    Mp(usize, usize),
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Line {
    pub formula: Formula,
    pub just: Justification,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Derivation {
    pub system: System,
    pub axiom_set: AxiomSet,
    pub hypotheses: Vec<Formula>,
    pub lines: Vec<Line>,
}

impl Derivation {
    pub fn new(system: System, axiom_set: AxiomSet, hypotheses: Vec<Formula>) -> Derivation {
        Derivation {
            system,
            axiom_set,
            hypotheses,
            lines: Vec::new(),
        }
    }

    pub fn conclusion(&self) -> Option<&Formula> {
        self.lines.last().map(|l| &l.formula)
    }

    /// Greatest variable index anywhere in the derivation (formulas,
    /// hypotheses, and instance witnesses), or -1.
    pub fn max_var_index(&self) -> i64 {
        fn see(max: &mut i64, f: &Formula) {
            if let Some(m) = f.max_var_index() {
                *max = (*max).max(m as i64);
            }
        }
        let mut max: i64 = -1;
        for h in &self.hypotheses {
            see(&mut max, h);
        }
        for line in &self.lines {
            see(&mut max, &line.formula);
            let inst = match &line.just {
                Justification::Axiom(i) | Justification::An(i) => i,
                _ => continue,
            };
            for v in &inst.foralls {
                max = max.max(v.0 as i64);
            }
            for w in scheme_formulas(&inst.scheme) {
                see(&mut max, w);
            }
            if let Some(v) = scheme_var(&inst.scheme) {
                max = max.max(v.0 as i64);
            }
        }
        max
    }

    /// True when every axiom used is one of the four S3 core schemes with no
    /// closure prefix: the derivation is a plain-S3 derivation.
    pub fn is_s3_core(&self) -> bool {
        self.lines.iter().all(|l| match &l.just {
            Justification::Axiom(i) | Justification::An(i) => {
                i.scheme.is_s3_core() && i.foralls.is_empty()
            }
            _ => true,
        })
    }
}

fn scheme_formulas(s: &Scheme) -> Vec<&Formula> {
    match s {
        Scheme::Taut { formula } => vec![formula],
        Scheme::T { phi } | Scheme::Four { phi } | Scheme::Five { phi } => vec![phi],
        Scheme::K { phi, psi } | Scheme::K4 { phi, psi } => vec![phi, psi],
        Scheme::Alpha { lhs, rhs }
        | Scheme::IdImp { lhs, rhs }
        | Scheme::IdForall { lhs, rhs, .. }
        | Scheme::Distr { lhs, rhs, .. }
        | Scheme::Vac { lhs, rhs, .. } => vec![lhs, rhs],
        Scheme::IdCong {
            template, lhs, rhs, ..
        } => vec![template, lhs, rhs],
        Scheme::Inst { body, witness, .. } => vec![body, witness],
        Scheme::Cbf { body, .. } | Scheme::Barcan { body, .. } => vec![body],
    }
}

fn scheme_var(s: &Scheme) -> Option<Var> {
    match s {
        Scheme::IdCong { var, .. }
        | Scheme::IdForall { var, .. }
        | Scheme::Inst { var, .. }
        | Scheme::Distr { var, .. }
        | Scheme::Vac { var, .. }
        | Scheme::Cbf { var, .. }
        | Scheme::Barcan { var, .. } => Some(*var),
        _ => None,
    }
}

/// Per-line check result.
#[derive(Clone, Debug, Serialize)]
pub struct LineFailure {
    pub index: usize,
    pub reason: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub ok: bool,
    pub failures: Vec<LineFailure>,
}

impl CheckReport {
    pub fn first_failure(&self) -> Option<&LineFailure> {
        self.failures.first()
    }
}

/// Checks every line of a derivation; collects all failures.
pub fn check_derivation(d: &Derivation) -> CheckReport {
    let mut failures = Vec::new();
    if d.lines.is_empty() {
        failures.push(LineFailure {
            index: 0,
            reason: "derivation has no lines".into(),
        });
    }
    for (i, line) in d.lines.iter().enumerate() {
        if let Err(msg) = check_line(d, i, line) {
            failures.push(LineFailure {
                index: i,
                reason: msg,
            });
        }
    }
    CheckReport {
        ok: failures.is_empty(),
        failures,
    }
}

fn check_line(d: &Derivation, i: usize, line: &Line) -> Result<(), String> {
    match &line.just {
        Justification::Hyp(j) => {
            let h = d
                .hypotheses
                .get(*j)
                .ok_or_else(|| format!("hypothesis index {j} out of range"))?;
            if *h != line.formula {
                return Err(format!(
                    "formula `{}` differs from hypothesis {j} `{h}`",
                    line.formula
                ));
            }
            Ok(())
        }
        Justification::Axiom(inst) => {
            let f = check_instance(inst, d.axiom_set, d.system).map_err(|e| e.to_string())?;
            if f != line.formula {
                return Err(format!(
                    "axiom instance reconstructs `{f}`, line says `{}`",
                    line.formula
                ));
            }
            Ok(())
        }
        Justification::An(inst) => {
            let f = check_instance(inst, d.axiom_set, d.system).map_err(|e| e.to_string())?;
            let expected = nec(f);
            if expected != line.formula {
                return Err(format!(
                    "AN reconstructs `{expected}`, line says `{}`",
                    line.formula
                ));
            }
            Ok(())
        }
        Justification::Mp(j, k) => {
            if *j >= i || *k >= i {
                return Err(format!("MP premises {j},{k} must precede line {i}"));
            }
            let minor = &d.lines[*j].formula;
            let major = &d.lines[*k].formula;
            match major {
                Formula::Imp(a, b) if **a == *minor && **b == line.formula => Ok(()),
                _ => Err(format!(
                    "MP premises do not match: line {k} is `{major}`, expected `{minor} -> {}`",
                    line.formula
                )),
            }
        }
    }
}

// ---------------------------------------------------------- recognition

/// Best-effort inverse of `check_instance`: finds some axiom instance whose
/// reconstruction is syntactically `f`.  Witness-checking via
/// `check_instance` remains the primary interface.
pub fn recognize_axiom(f: &Formula, set: AxiomSet, system: System) -> Option<AxiomInstance> {
    // Try every split of the leading forall prefix as closure (*).
    let mut prefix: Vec<Var> = Vec::new();
    let mut cur = f;
    loop {
        if let Some(scheme) = match_schemes(cur, set, system) {
            let inst = AxiomInstance {
                scheme,
                foralls: prefix.clone(),
            };
            if check_instance(&inst, set, system).as_ref() == Ok(f) {
                return Some(inst);
            }
        }
        match cur {
            Formula::Forall(x, body) => {
                prefix.push(*x);
                cur = body;
            }
            _ => return None,
        }
    }
}

fn match_schemes(f: &Formula, set: AxiomSet, system: System) -> Option<Scheme> {
    let candidates = candidate_schemes(f);
    candidates
        .into_iter()
        .find(|s| check_instance(&AxiomInstance::plain(s.clone()), set, system).as_ref() == Ok(f))
}

fn candidate_schemes(f: &Formula) -> Vec<Scheme> {
    let mut out = Vec::new();
    if taut_instance(f, DEFAULT_MAX_TAUT_ATOMS) == Ok(true) {
        out.push(Scheme::Taut { formula: f.clone() });
    }
    if let Formula::Id(a, b) = f {
        if alpha_eq(a, b) {
            out.push(Scheme::Alpha {
                lhs: (**a).clone(),
                rhs: (**b).clone(),
            });
        }
    }
    let Formula::Imp(lhs, rhs) = f else {
        return out;
    };
    // t: []f -> f
    if let Formula::Nec(inner) = &**lhs {
        if **inner == **rhs {
            out.push(Scheme::T {
                phi: (**rhs).clone(),
            });
        }
        // four: []f -> [][]f
        if let Formula::Nec(r1) = &**rhs {
            if let Formula::Nec(r2) = &**r1 {
                if **r2 == **inner {
                    out.push(Scheme::Four {
                        phi: (**inner).clone(),
                    });
                }
            }
        }
        // k / k4
        if let Formula::Imp(p, q) = &**inner {
            match &**rhs {
                Formula::Imp(bp, bq) => {
                    if let (Formula::Nec(p2), Formula::Nec(q2)) = (&**bp, &**bq) {
                        if **p2 == **p && **q2 == **q {
                            out.push(Scheme::K {
                                phi: (**p).clone(),
                                psi: (**q).clone(),
                            });
                        }
                    }
                }
                Formula::Nec(boxed) => {
                    if let Formula::Imp(bp, bq) = &**boxed {
                        if let (Formula::Nec(p2), Formula::Nec(q2)) = (&**bp, &**bq) {
                            if **p2 == **p && **q2 == **q {
                                out.push(Scheme::K4 {
                                    phi: (**p).clone(),
                                    psi: (**q).clone(),
                                });
                            }
                        }
                    }
                }
                _ => {}
            }
        }
    }
    // five: ~[]f -> []~[]f
    if let (Formula::Neg(nl), Formula::Nec(nr)) = (&**lhs, &**rhs) {
        if let (Formula::Nec(p), Formula::Neg(q)) = (&**nl, &**nr) {
            if let Formula::Nec(p2) = &**q {
                if **p2 == **p {
                    out.push(Scheme::Five { phi: (**p).clone() });
                }
            }
        }
    }
    // id-imp: (f == g) -> (f -> g)
    if let (Formula::Id(a, b), Formula::Imp(a2, b2)) = (&**lhs, &**rhs) {
        if a == a2 && b == b2 {
            out.push(Scheme::IdImp {
                lhs: (**a).clone(),
                rhs: (**b).clone(),
            });
        }
    }
    // id-cong: (g == g') -> (l == r)
    if let (Formula::Id(a, b), Formula::Id(l, r)) = (&**lhs, &**rhs) {
        out.extend(id_cong_candidates(f, a, b, l, r));
    }
    // Quantified schemes.
    if let Formula::Forall(x, body) = &**lhs {
        // id-forall
        if let Formula::Id(p, q) = &**body {
            if let Formula::Id(fl, fr) = &**rhs {
                if let (Formula::Forall(x2, p2), Formula::Forall(x3, q2)) = (&**fl, &**fr) {
                    if x2 == x && x3 == x && p2 == p && q2 == q {
                        out.push(Scheme::IdForall {
                            var: *x,
                            lhs: (**p).clone(),
                            rhs: (**q).clone(),
                        });
                    }
                }
            }
        }
        if let Formula::Imp(p, q) = &**body {
            // distr
            if let Formula::Imp(fl, fr) = &**rhs {
                if let (Formula::Forall(x2, p2), Formula::Forall(x3, q2)) = (&**fl, &**fr) {
                    if x2 == x && x3 == x && p2 == p && q2 == q {
                        out.push(Scheme::Distr {
                            var: *x,
                            lhs: (**p).clone(),
                            rhs: (**q).clone(),
                        });
                    }
                }
                // vac
                if **fl == **p {
                    if let Formula::Forall(x3, q2) = &**fr {
                        if x3 == x && q2 == q {
                            out.push(Scheme::Vac {
                                var: *x,
                                lhs: (**p).clone(),
                                rhs: (**q).clone(),
                            });
                        }
                    }
                }
            }
        }
        // barcan
        if let Formula::Nec(p) = &**body {
            if let Formula::Nec(fr) = &**rhs {
                if let Formula::Forall(x2, p2) = &**fr {
                    if x2 == x && p2 == p {
                        out.push(Scheme::Barcan {
                            var: *x,
                            body: (**p).clone(),
                        });
                    }
                }
            }
        }
        // inst: (forall x. body) -> body[x := w]
        for w in inst_witness_candidates(*x, body, rhs) {
            out.push(Scheme::Inst {
                var: *x,
                body: (**body).clone(),
                witness: w,
            });
        }
    }
    // cbf
    if let Formula::Nec(nl) = &**lhs {
        if let Formula::Forall(x, p) = &**nl {
            if let Formula::Forall(x2, np) = &**rhs {
                if let Formula::Nec(p2) = &**np {
                    if x2 == x && p2 == p {
                        out.push(Scheme::Cbf {
                            var: *x,
                            body: (**p).clone(),
                        });
                    }
                }
            }
        }
    }
    out
}

/// Structural walk of `body` against `rhs` collecting the subtrees of `rhs`
/// aligned with free occurrences of `x` in `body`; binders are matched
/// positionally.  Returns candidate witnesses.
fn inst_witness_candidates(x: Var, body: &Formula, rhs: &Formula) -> Vec<Formula> {
    fn walk(
        x: Var,
        shadowed: bool,
        l: &Formula,
        r: &Formula,
        stack: &mut Vec<(Var, Var)>,
        found: &mut Vec<Formula>,
    ) -> bool {
        match (l, r) {
            (Formula::Var(u), _) if *u == x && !shadowed => {
                found.push(r.clone());
                true
            }
            (Formula::Var(u), Formula::Var(v)) => vars_correspond(*u, *v, stack),
            (Formula::Const(c), Formula::Const(d)) => c == d,
            (Formula::Neg(a), Formula::Neg(b)) | (Formula::Nec(a), Formula::Nec(b)) => {
                walk(x, shadowed, a, b, stack, found)
            }
            (Formula::Or(a1, b1), Formula::Or(a2, b2))
            | (Formula::And(a1, b1), Formula::And(a2, b2))
            | (Formula::Imp(a1, b1), Formula::Imp(a2, b2))
            | (Formula::Id(a1, b1), Formula::Id(a2, b2)) => {
                walk(x, shadowed, a1, a2, stack, found) && walk(x, shadowed, b1, b2, stack, found)
            }
            (Formula::Forall(u, a), Formula::Forall(v, b)) => {
                stack.push((*u, *v));
                let sh = shadowed || *u == x;
                let ok = walk(x, sh, a, b, stack, found);
                stack.pop();
                ok
            }
            _ => false,
        }
    }
    let mut found = Vec::new();
    let mut stack = Vec::new();
    if !walk(x, false, body, rhs, &mut stack, &mut found) || found.is_empty() {
        return Vec::new();
    }
    let first = found[0].clone();
    if found.iter().all(|f| *f == first) {
        vec![first]
    } else {
        Vec::new()
    }
}

fn vars_correspond(u: Var, v: Var, stack: &[(Var, Var)]) -> bool {
    for (a, b) in stack.iter().rev() {
        if *a == u {
            return *b == v;
        }
        if *b == v {
            return false;
        }
    }
    u == v
}

fn id_cong_candidates(
    whole: &Formula,
    a: &Formula,
    b: &Formula,
    l: &Formula,
    r: &Formula,
) -> Vec<Scheme> {
    let fresh = Var(whole.max_var_index().map_or(0, |m| m + 1));
    let mut out = Vec::new();
    if a != b {
        // Abstract exactly the aligned positions carrying (a, b).
        fn skel(
            a: &Formula,
            b: &Formula,
            x: Var,
            l: &Formula,
            r: &Formula,
            stack: &mut Vec<(Var, Var)>,
        ) -> Option<Formula> {
            if l == a && r == b {
                return Some(Formula::Var(x));
            }
            match (l, r) {
                (Formula::Var(u), Formula::Var(v)) => {
                    vars_correspond(*u, *v, stack).then(|| l.clone())
                }
                (Formula::Const(c), Formula::Const(d)) => (c == d).then(|| l.clone()),
                (Formula::Neg(p), Formula::Neg(q)) => {
                    Some(Formula::Neg(Box::new(skel(a, b, x, p, q, stack)?)))
                }
                (Formula::Nec(p), Formula::Nec(q)) => {
                    Some(Formula::Nec(Box::new(skel(a, b, x, p, q, stack)?)))
                }
                (Formula::Or(p1, q1), Formula::Or(p2, q2)) => Some(Formula::Or(
                    Box::new(skel(a, b, x, p1, p2, stack)?),
                    Box::new(skel(a, b, x, q1, q2, stack)?),
                )),
                (Formula::And(p1, q1), Formula::And(p2, q2)) => Some(Formula::And(
                    Box::new(skel(a, b, x, p1, p2, stack)?),
                    Box::new(skel(a, b, x, q1, q2, stack)?),
                )),
                (Formula::Imp(p1, q1), Formula::Imp(p2, q2)) => Some(Formula::Imp(
                    Box::new(skel(a, b, x, p1, p2, stack)?),
                    Box::new(skel(a, b, x, q1, q2, stack)?),
                )),
                (Formula::Id(p1, q1), Formula::Id(p2, q2)) => Some(Formula::Id(
                    Box::new(skel(a, b, x, p1, p2, stack)?),
                    Box::new(skel(a, b, x, q1, q2, stack)?),
                )),
                (Formula::Forall(u, p), Formula::Forall(v, q)) => {
                    stack.push((*u, *v));
                    let s = skel(a, b, x, p, q, stack);
                    stack.pop();
                    Some(Formula::Forall(*u, Box::new(s?)))
                }
                _ => None,
            }
        }
        let mut stack = Vec::new();
        if let Some(t) = skel(a, b, fresh, l, r, &mut stack) {
            out.push(Scheme::IdCong {
                template: t,
                var: fresh,
                lhs: a.clone(),
                rhs: b.clone(),
            });
        }
    } else {
        // a == b, so l == r; try abstracting all occurrences of a, then each
        // single occurrence.
        let mut templates = Vec::new();
        templates.push(replace_occurrences(l, a, fresh, None));
        let occ = count_occurrences(l, a);
        for k in 0..occ.min(16) {
            templates.push(replace_occurrences(l, a, fresh, Some(k)));
        }
        for t in templates {
            if t.fvar().contains(&fresh) {
                out.push(Scheme::IdCong {
                    template: t,
                    var: fresh,
                    lhs: a.clone(),
                    rhs: b.clone(),
                });
            }
        }
    }
    out
}

fn count_occurrences(f: &Formula, target: &Formula) -> usize {
    if f == target {
        return 1;
    }
    match f {
        Formula::Var(_) | Formula::Const(_) => 0,
        Formula::Neg(a) | Formula::Nec(a) | Formula::Forall(_, a) => count_occurrences(a, target),
        Formula::Or(a, b) | Formula::And(a, b) | Formula::Imp(a, b) | Formula::Id(a, b) => {
            count_occurrences(a, target) + count_occurrences(b, target)
        }
    }
}

/// Replaces occurrences of `target` by `x`: all of them when `which` is
/// `None`, otherwise only the `which`-th in preorder.
fn replace_occurrences(f: &Formula, target: &Formula, x: Var, which: Option<usize>) -> Formula {
    fn go(f: &Formula, target: &Formula, x: Var, which: Option<usize>, seen: &mut usize) -> Formula {
        if f == target {
            let idx = *seen;
            *seen += 1;
            if which.is_none() || which == Some(idx) {
                return Formula::Var(x);
            }
            return f.clone();
        }
        match f {
            Formula::Var(_) | Formula::Const(_) => f.clone(),
            Formula::Neg(a) => Formula::Neg(Box::new(go(a, target, x, which, seen))),
            Formula::Nec(a) => Formula::Nec(Box::new(go(a, target, x, which, seen))),
            Formula::Or(a, b) => Formula::Or(
                Box::new(go(a, target, x, which, seen)),
                Box::new(go(b, target, x, which, seen)),
            ),
            Formula::And(a, b) => Formula::And(
                Box::new(go(a, target, x, which, seen)),
                Box::new(go(b, target, x, which, seen)),
            ),
            Formula::Imp(a, b) => Formula::Imp(
                Box::new(go(a, target, x, which, seen)),
                Box::new(go(b, target, x, which, seen)),
            ),
            Formula::Id(a, b) => Formula::Id(
                Box::new(go(a, target, x, which, seen)),
                Box::new(go(b, target, x, which, seen)),
            ),
            Formula::Forall(v, a) => {
                Formula::Forall(*v, Box::new(go(a, target, x, which, seen)))
            }
        }
    }
    let mut seen = 0;
    go(f, target, x, which, &mut seen)
}

// --------------------------------------------------------------- serde

#[derive(Serialize, Deserialize)]
struct InstanceRepr {
    scheme: String,
    witnesses: std::collections::BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    foralls: Vec<String>,
}

impl Serialize for AxiomInstance {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut w = std::collections::BTreeMap::new();
        let mut put = |k: &str, f: &Formula| {
            w.insert(k.to_string(), f.render());
        };
        match &self.scheme {
            Scheme::Taut { formula } => put("formula", formula),
            Scheme::T { phi } | Scheme::Four { phi } | Scheme::Five { phi } => put("phi", phi),
            Scheme::K { phi, psi } | Scheme::K4 { phi, psi } => {
                put("phi", phi);
                put("psi", psi);
            }
            Scheme::Alpha { lhs, rhs } | Scheme::IdImp { lhs, rhs } => {
                put("lhs", lhs);
                put("rhs", rhs);
            }
            Scheme::IdCong {
                template,
                lhs,
                rhs,
                ..
            } => {
                put("template", template);
                put("lhs", lhs);
                put("rhs", rhs);
            }
            Scheme::IdForall { lhs, rhs, .. }
            | Scheme::Distr { lhs, rhs, .. }
            | Scheme::Vac { lhs, rhs, .. } => {
                put("lhs", lhs);
                put("rhs", rhs);
            }
            Scheme::Inst { body, witness, .. } => {
                put("body", body);
                put("witness", witness);
            }
            Scheme::Cbf { body, .. } | Scheme::Barcan { body, .. } => put("body", body),
        }
        if let Some(v) = scheme_var(&self.scheme) {
            w.insert("var".into(), v.to_string());
        }
        InstanceRepr {
            scheme: self.scheme.name().into(),
            witnesses: w,
            foralls: self.foralls.iter().map(|v| v.to_string()).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for AxiomInstance {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let repr = InstanceRepr::deserialize(d)?;
        let wf = |k: &str| -> Result<Formula, D::Error> {
            let s = repr
                .witnesses
                .get(k)
                .ok_or_else(|| D::Error::custom(format!("missing witness `{k}`")))?;
            crate::syntax::parse(s).map_err(D::Error::custom)
        };
        let wv = |k: &str| -> Result<Var, D::Error> {
            let s = repr
                .witnesses
                .get(k)
                .ok_or_else(|| D::Error::custom(format!("missing witness `{k}`")))?;
            Var::parse(s).ok_or_else(|| D::Error::custom(format!("bad variable `{s}`")))
        };
        let scheme = match repr.scheme.as_str() {
            "taut" => Scheme::Taut { formula: wf("formula")? },
            "t" => Scheme::T { phi: wf("phi")? },
            "k" => Scheme::K {
                phi: wf("phi")?,
                psi: wf("psi")?,
            },
            "k4" => Scheme::K4 {
                phi: wf("phi")?,
                psi: wf("psi")?,
            },
            "alpha" => Scheme::Alpha {
                lhs: wf("lhs")?,
                rhs: wf("rhs")?,
            },
            "id-imp" => Scheme::IdImp {
                lhs: wf("lhs")?,
                rhs: wf("rhs")?,
            },
            "id-cong" => Scheme::IdCong {
                template: wf("template")?,
                var: wv("var")?,
                lhs: wf("lhs")?,
                rhs: wf("rhs")?,
            },
            "id-forall" => Scheme::IdForall {
                var: wv("var")?,
                lhs: wf("lhs")?,
                rhs: wf("rhs")?,
            },
            "inst" => Scheme::Inst {
                var: wv("var")?,
                body: wf("body")?,
                witness: wf("witness")?,
            },
            "distr" => Scheme::Distr {
                var: wv("var")?,
                lhs: wf("lhs")?,
                rhs: wf("rhs")?,
            },
            "vac" => Scheme::Vac {
                var: wv("var")?,
                lhs: wf("lhs")?,
                rhs: wf("rhs")?,
            },
            "cbf" => Scheme::Cbf {
                var: wv("var")?,
                body: wf("body")?,
            },
            "barcan" => Scheme::Barcan {
                var: wv("var")?,
                body: wf("body")?,
            },
            "four" => Scheme::Four { phi: wf("phi")? },
            "five" => Scheme::Five { phi: wf("phi")? },
            other => return Err(D::Error::custom(format!("unknown scheme `{other}`"))),
        };
        let mut foralls = Vec::new();
        for s in &repr.foralls {
            foralls
                .push(Var::parse(s).ok_or_else(|| D::Error::custom(format!("bad variable `{s}`")))?);
        }
        Ok(AxiomInstance { scheme, foralls })
    }
}

/// A formula `f == g` expanded to strict equivalence `[](f->g) & [](g->f)`,
/// applied recursively.
pub fn expand_identity(f: &Formula) -> Formula {
    match f {
        Formula::Var(_) | Formula::Const(_) => f.clone(),
        Formula::Neg(a) => Formula::Neg(Box::new(expand_identity(a))),
        Formula::Nec(a) => Formula::Nec(Box::new(expand_identity(a))),
        Formula::Or(a, b) => Formula::Or(Box::new(expand_identity(a)), Box::new(expand_identity(b))),
        Formula::And(a, b) => {
            Formula::And(Box::new(expand_identity(a)), Box::new(expand_identity(b)))
        }
        Formula::Imp(a, b) => {
            Formula::Imp(Box::new(expand_identity(a)), Box::new(expand_identity(b)))
        }
        Formula::Id(a, b) => {
            let a = expand_identity(a);
            let b = expand_identity(b);
            Formula::And(
                Box::new(nec(imp(a.clone(), b.clone()))),
                Box::new(nec(imp(b, a))),
            )
        }
        Formula::Forall(x, a) => Formula::Forall(*x, Box::new(expand_identity(a))),
    }
}

/// Marker for valid constants usable in substitution keys.
pub fn constant(name: &str) -> Const {
    match name {
        "bot" => Const::Bot,
        "top" => Const::Top,
        other => Const::Named(other.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn p(s: &str) -> Formula {
        parse(s).unwrap()
    }

    #[test]
    fn taut_abstracts_modal_subformulas() {
        assert_eq!(taut_instance(&p("[]x0 -> []x0"), 24), Ok(true));
        assert_eq!(taut_instance(&p("[]x0 -> x0"), 24), Ok(false));
        assert_eq!(
            taut_instance(&p("(x0 == x1) | ~(x0 == x1)"), 24),
            Ok(true)
        );
        // bot is abstracted, so this is not recognised as a tautology
        assert_eq!(taut_instance(&p("bot -> x0"), 24), Ok(false));
    }

    #[test]
    fn taut_shares_atoms_between_identical_subtrees() {
        // [](x0 & x1) appears twice and must get the same atom
        assert_eq!(
            taut_instance(&p("[](x0 & x1) -> ([](x0 & x1) | x2)"), 24),
            Ok(true)
        );
    }

    #[test]
    fn taut_atom_budget() {
        let mut s = String::from("x0");
        for i in 1..30 {
            s = format!("{s} | x{i}");
        }
        assert!(matches!(
            taut_instance(&p(&s), 24),
            Err(CalculusError::TooManyAtoms { .. })
        ));
    }

    #[test]
    fn instance_reconstruction() {
        let inst = AxiomInstance::plain(Scheme::K {
            phi: p("x0"),
            psi: p("x1"),
        });
        let f = check_instance(&inst, AxiomSet::Full, System::S3).unwrap();
        assert_eq!(f, p("[](x0 -> x1) -> ([]x0 -> []x1)"));
    }

    #[test]
    fn closure_prefix_wraps_outside_in() {
        let inst = AxiomInstance {
            scheme: Scheme::T { phi: p("x0 & x1") },
            foralls: vec![Var(0), Var(1)],
        };
        let f = check_instance(&inst, AxiomSet::Full, System::S3).unwrap();
        assert_eq!(f, p("forall x0. forall x1. [](x0 & x1) -> (x0 & x1)"));
    }

    #[test]
    fn closure_requires_free_variable() {
        let inst = AxiomInstance {
            scheme: Scheme::T { phi: p("x0") },
            foralls: vec![Var(5)],
        };
        assert!(matches!(
            check_instance(&inst, AxiomSet::Full, System::S3),
            Err(CalculusError::ClosureNotFree { .. })
        ));
    }

    #[test]
    fn availability_by_set_and_system() {
        let barcan = AxiomInstance::plain(Scheme::Barcan {
            var: Var(0),
            body: p("x0"),
        });
        assert!(check_instance(&barcan, AxiomSet::Full, System::S3).is_ok());
        assert!(matches!(
            check_instance(&barcan, AxiomSet::Minus, System::S3),
            Err(CalculusError::SchemeUnavailable { .. })
        ));
        let four = AxiomInstance::plain(Scheme::Four { phi: p("x0") });
        assert!(check_instance(&four, AxiomSet::Full, System::S3).is_err());
        assert!(check_instance(&four, AxiomSet::Full, System::S4).is_ok());
        let five = AxiomInstance::plain(Scheme::Five { phi: p("x0") });
        assert!(check_instance(&five, AxiomSet::Full, System::S4).is_err());
        assert_eq!(
            check_instance(&five, AxiomSet::Full, System::S5).unwrap(),
            p("~[]x0 -> []~[]x0")
        );
    }

    #[test]
    fn id_cong_substitutes_both_sides() {
        let inst = AxiomInstance::plain(Scheme::IdCong {
            template: p("[]x0 & x1"),
            var: Var(0),
            lhs: p("x2"),
            rhs: p("~~x2"),
        });
        let f = check_instance(&inst, AxiomSet::Full, System::S3).unwrap();
        assert_eq!(f, p("(x2 == ~~x2) -> (([]x2 & x1) == ([]~~x2 & x1))"));
    }

    #[test]
    fn vac_side_condition() {
        let bad = AxiomInstance::plain(Scheme::Vac {
            var: Var(0),
            lhs: p("x0"),
            rhs: p("x0 & x1"),
        });
        assert!(check_instance(&bad, AxiomSet::Full, System::S3).is_err());
        let good = AxiomInstance::plain(Scheme::Vac {
            var: Var(0),
            lhs: p("x1"),
            rhs: p("x0 & x1"),
        });
        assert_eq!(
            check_instance(&good, AxiomSet::Full, System::S3).unwrap(),
            p("(forall x0. x1 -> (x0 & x1)) -> (x1 -> (forall x0. x0 & x1))")
        );
    }

    #[test]
    fn inst_renames_captured_binders() {
        // body contains forall x1, witness mentions x1
        let inst = AxiomInstance::plain(Scheme::Inst {
            var: Var(0),
            body: p("forall x1. x0 | x1"),
            witness: p("x1"),
        });
        let f = check_instance(&inst, AxiomSet::Full, System::S3).unwrap();
        assert_eq!(f, p("(forall x0. forall x1. x0 | x1) -> (forall x2. x1 | x2)"));
    }

    #[test]
    fn check_small_derivation() {
        let phi = p("x0");
        let mut d = Derivation::new(System::S3, AxiomSet::Full, vec![p("[]x0")]);
        d.lines.push(Line {
            formula: p("[]x0"),
            just: Justification::Hyp(0),
        });
        d.lines.push(Line {
            formula: p("[]x0 -> x0"),
            just: Justification::Axiom(AxiomInstance::plain(Scheme::T { phi })),
        });
        d.lines.push(Line {
            formula: p("x0"),
            just: Justification::Mp(0, 1),
        });
        let report = check_derivation(&d);
        assert!(report.ok, "{:?}", report.failures);
        assert_eq!(d.conclusion(), Some(&p("x0")));
    }

    #[test]
    fn an_requires_box_of_axiom() {
        let mut d = Derivation::new(System::S3, AxiomSet::Full, vec![]);
        d.lines.push(Line {
            formula: p("[]([]x0 -> x0)"),
            just: Justification::An(AxiomInstance::plain(Scheme::T { phi: p("x0") })),
        });
        assert!(check_derivation(&d).ok);
        d.lines[0].formula = p("[]x0 -> x0");
        assert!(!check_derivation(&d).ok);
    }

    #[test]
    fn mp_premises_must_precede() {
        let mut d = Derivation::new(System::S3, AxiomSet::Full, vec![p("x0"), p("x0 -> x1")]);
        d.lines.push(Line {
            formula: p("x1"),
            just: Justification::Mp(1, 2),
        });
        let r = check_derivation(&d);
        assert!(!r.ok);
        assert!(r.first_failure().unwrap().reason.contains("precede"));
    }

    #[test]
    fn recognizes_core_schemes() {
        for (src, name) in [
            ("[]x0 -> x0", "t"),
            ("[](x0 -> x1) -> ([]x0 -> []x1)", "k"),
            ("[](x0 -> x1) -> []([]x0 -> []x1)", "k4"),
            ("x0 | ~x0", "taut"),
            ("(x0 == x1) -> (x0 -> x1)", "id-imp"),
            ("[](forall x0. x0 & x1) -> (forall x0. [](x0 & x1))", "cbf"),
            (
                "(forall x0. x0 -> x1 & x0) -> ((forall x0. x0) -> (forall x0. x1 & x0))",
                "distr",
            ),
            ("(forall x0. x1 -> x0) -> (x1 -> (forall x0. x0))", "vac"),
        ] {
            let f = p(src);
            let inst = recognize_axiom(&f, AxiomSet::Full, System::S5)
                .unwrap_or_else(|| panic!("failed to recognize `{src}`"));
            assert_eq!(inst.scheme.name(), name, "{src}");
            assert_eq!(
                check_instance(&inst, AxiomSet::Full, System::S5).unwrap(),
                f
            );
        }
    }

    #[test]
    fn recognizes_closed_axiom() {
        let f = p("forall x0. []x0 -> x0");
        let inst = recognize_axiom(&f, AxiomSet::Full, System::S3).unwrap();
        assert_eq!(inst.foralls, vec![Var(0)]);
        assert_eq!(inst.scheme.name(), "t");
    }

    #[test]
    fn recognizes_inst_with_renaming() {
        // the instantiation axiom from `inst_renames_captured_binders`
        let f = p("(forall x0. forall x1. x0 | x1) -> (forall x2. x1 | x2)");
        let inst = recognize_axiom(&f, AxiomSet::Full, System::S3).unwrap();
        assert_eq!(inst.scheme.name(), "inst");
        assert_eq!(check_instance(&inst, AxiomSet::Full, System::S3).unwrap(), f);
    }

    #[test]
    fn recognizes_id_cong() {
        let inst = AxiomInstance::plain(Scheme::IdCong {
            template: p("[]x0 & x1"),
            var: Var(0),
            lhs: p("x2"),
            rhs: p("~~x2"),
        });
        let f = check_instance(&inst, AxiomSet::Full, System::S3).unwrap();
        let got = recognize_axiom(&f, AxiomSet::Full, System::S3).unwrap();
        assert_eq!(got.scheme.name(), "id-cong");
        assert_eq!(check_instance(&got, AxiomSet::Full, System::S3).unwrap(), f);
        // identical sides: (x2 == x2) -> ((x2 & x1) == (x2 & x1))
        let inst2 = AxiomInstance::plain(Scheme::IdCong {
            template: p("x0 & x1"),
            var: Var(0),
            lhs: p("x2"),
            rhs: p("x2"),
        });
        let f2 = check_instance(&inst2, AxiomSet::Full, System::S3).unwrap();
        let got2 = recognize_axiom(&f2, AxiomSet::Full, System::S3).unwrap();
        assert_eq!(check_instance(&got2, AxiomSet::Full, System::S3).unwrap(), f2);
    }

    #[test]
    fn instance_json_round_trip() {
        let inst = AxiomInstance {
            scheme: Scheme::Inst {
                var: Var(0),
                body: p("x0 | x1"),
                witness: p("[]x1"),
            },
            foralls: vec![Var(1)],
        };
        let js = serde_json::to_string(&inst).unwrap();
        assert!(js.contains("\"scheme\":\"inst\""));
        let back: AxiomInstance = serde_json::from_str(&js).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn derivation_json_round_trip() {
        let mut d = Derivation::new(System::S4, AxiomSet::Minus, vec![p("x0")]);
        d.lines.push(Line {
            formula: p("x0"),
            just: Justification::Hyp(0),
        });
        d.lines.push(Line {
            formula: p("[]x0 -> [][]x0"),
            just: Justification::Axiom(AxiomInstance::plain(Scheme::Four { phi: p("x0") })),
        });
        let js = serde_json::to_string(&d).unwrap();
        assert!(js.contains("\"system\":4"));
        assert!(js.contains("\"axiom_set\":\"minus\""));
        let back: Derivation = serde_json::from_str(&js).unwrap();
        assert_eq!(back, d);
        assert!(check_derivation(&back).ok);
    }

    #[test]
    fn expand_identity_strict_equivalence() {
        assert_eq!(
            expand_identity(&p("x0 == x1")),
            p("[](x0 -> x1) & [](x1 -> x0)")
        );
    }
}
