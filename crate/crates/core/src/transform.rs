//! Derivation-to-derivation transformers.
//!
//! Each transformer consumes a checked derivation and emits a new one that
//! again passes [`check_derivation`], so the metatheorems they implement are
//! machine-checked on every use rather than trusted.

use crate::calculus::{
    check_derivation, check_instance, AxiomInstance, CalculusError, Derivation,
    Justification, Line, Scheme, System,
};
use crate::subst::{alpha_eq, subst_const};
use crate::syntax::{Const, Formula, Var};

type Result<T> = std::result::Result<T, CalculusError>;

fn err(msg: impl Into<String>) -> CalculusError {
    CalculusError::Transform(msg.into())
}

fn imp(a: Formula, b: Formula) -> Formula {
    Formula::Imp(Box::new(a), Box::new(b))
}
fn nec(a: Formula) -> Formula {
    Formula::Nec(Box::new(a))
}
fn fid(a: Formula, b: Formula) -> Formula {
    Formula::Id(Box::new(a), Box::new(b))
}

pub(crate) fn push(d: &mut Derivation, formula: Formula, just: Justification) -> usize {
    d.lines.push(Line { formula, just });
    d.lines.len() - 1
}

pub(crate) fn push_taut(d: &mut Derivation, formula: Formula) -> usize {
    let inst = AxiomInstance::plain(Scheme::Taut {
        formula: formula.clone(),
    });
    push(d, formula, Justification::Axiom(inst))
}

/// Extends `d` from a line proving `from` to a line proving `target`, going
/// through `from == target` (alpha) and `(from == target) -> (from ->
/// target)`.  No-op when the formulas already coincide.
pub(crate) fn bridge_alpha(d: &mut Derivation, from_idx: usize, target: Formula) -> Result<usize> {
    let from = d.lines[from_idx].formula.clone();
    if from == target {
        return Ok(from_idx);
    }
    if !alpha_eq(&from, &target) {
        return Err(err(format!(
            "cannot bridge `{from}` to `{target}`: not alpha-equivalent"
        )));
    }
    let id = push(
        d,
        fid(from.clone(), target.clone()),
        Justification::Axiom(AxiomInstance::plain(Scheme::Alpha {
            lhs: from.clone(),
            rhs: target.clone(),
        })),
    );
    let ii = push(
        d,
        imp(
            fid(from.clone(), target.clone()),
            imp(from.clone(), target.clone()),
        ),
        Justification::Axiom(AxiomInstance::plain(Scheme::IdImp {
            lhs: from.clone(),
            rhs: target.clone(),
        })),
    );
    let step = push(d, imp(from, target.clone()), Justification::Mp(id, ii));
    Ok(push(d, target, Justification::Mp(from_idx, step)))
}

fn require_valid(d: &Derivation) -> Result<()> {
    let report = check_derivation(d);
    match report.first_failure() {
        None => Ok(()),
        Some(f) => Err(err(format!(
            "input derivation is invalid at line {}: {}",
            f.index, f.reason
        ))),
    }
}

/// Deduction transformer: from a derivation of `chi` using hypothesis `phi`,
/// builds a derivation of `phi -> chi` without it.  Adds only tautology
/// instances and MP steps.
pub fn deduction(d: &Derivation, phi: &Formula) -> Result<Derivation> {
    require_valid(d)?;
    let hyp_index = d
        .hypotheses
        .iter()
        .position(|h| h == phi)
        .ok_or_else(|| err(format!("`{phi}` is not among the hypotheses")))?;
    let mut new_hyps = d.hypotheses.clone();
    new_hyps.remove(hyp_index);
    let mut out = Derivation::new(d.system, d.axiom_set, new_hyps);
    // map[i] = index in `out` of the line proving phi -> chi_i
    let mut map: Vec<usize> = Vec::with_capacity(d.lines.len());
    for line in &d.lines {
        let chi = line.formula.clone();
        let goal = imp(phi.clone(), chi.clone());
        let idx = match &line.just {
            Justification::Hyp(j) if *j == hyp_index => push_taut(&mut out, goal),
            Justification::Hyp(j) => {
                let j2 = if *j < hyp_index { *j } else { *j - 1 };
                let base = push(&mut out, chi.clone(), Justification::Hyp(j2));
                let weaken = push_taut(&mut out, imp(chi, goal.clone()));
                push(&mut out, goal, Justification::Mp(base, weaken))
            }
            Justification::Axiom(inst) => {
                let base = push(&mut out, chi.clone(), Justification::Axiom(inst.clone()));
                let weaken = push_taut(&mut out, imp(chi, goal.clone()));
                push(&mut out, goal, Justification::Mp(base, weaken))
            }
            Justification::An(inst) => {
                let base = push(&mut out, chi.clone(), Justification::An(inst.clone()));
                let weaken = push_taut(&mut out, imp(chi, goal.clone()));
                push(&mut out, goal, Justification::Mp(base, weaken))
            }
            Justification::Mp(a, b) => {
                // have phi -> chi_a and phi -> (chi_a -> chi); distribute
                let chi_a = d.lines[*a].formula.clone();
                let distribute = push_taut(
                    &mut out,
                    imp(
                        imp(phi.clone(), imp(chi_a.clone(), chi.clone())),
                        imp(imp(phi.clone(), chi_a.clone()), goal.clone()),
                    ),
                );
                let step = push(
                    &mut out,
                    imp(imp(phi.clone(), chi_a), goal.clone()),
                    Justification::Mp(map[*b], distribute),
                );
                push(&mut out, goal, Justification::Mp(map[*a], step))
            }
        };
        map.push(idx);
    }
    Ok(out)
}

/// Generalization transformer: from a derivation of `chi` with `x` free in
/// `chi` but in no hypothesis, builds a derivation of `forall x. chi`.
pub fn generalize(d: &Derivation, x: Var) -> Result<Derivation> {
    require_valid(d)?;
    for h in &d.hypotheses {
        if h.fvar().contains(&x) {
            return Err(err(format!("{x} is free in hypothesis `{h}`")));
        }
    }
    let conclusion = d.conclusion().ok_or(CalculusError::Empty)?.clone();
    if !conclusion.fvar().contains(&x) {
        return Err(err(format!("{x} is not free in the conclusion `{conclusion}`")));
    }
    // Keep the original lines verbatim (same indices), then append the
    // generalized lines, memoizing per original line.
    let mut out = d.clone();
    let mut memo: Vec<Option<usize>> = vec![None; d.lines.len()];
    let last = d.lines.len() - 1;
    gen_line(&mut out, d, x, last, &mut memo)?;
    Ok(out)
}

fn gen_line(
    out: &mut Derivation,
    d: &Derivation,
    x: Var,
    i: usize,
    memo: &mut Vec<Option<usize>>,
) -> Result<usize> {
    if let Some(idx) = memo[i] {
        return Ok(idx);
    }
    let chi = d.lines[i].formula.clone();
    debug_assert!(chi.fvar().contains(&x));
    let goal = Formula::forall(x, chi.clone()).map_err(|e| err(e.to_string()))?;
    let idx = match &d.lines[i].just {
        Justification::Hyp(_) => {
            return Err(err(format!(
                "{x} is free in a hypothesis line, cannot generalize"
            )))
        }
        Justification::Axiom(inst) => {
            let mut inst2 = inst.clone();
            inst2.foralls.insert(0, x);
            push(out, goal, Justification::Axiom(inst2))
        }
        Justification::An(inst) => {
            // chi = []A; derive [](forall x. A), then descend with the
            // converse-Barcan axiom.
            let a = check_instance(inst, d.axiom_set, d.system).map_err(|e| err(e.to_string()))?;
            let mut inst2 = inst.clone();
            inst2.foralls.insert(0, x);
            let closed = Formula::forall(x, a.clone()).map_err(|e| err(e.to_string()))?;
            let an = push(out, nec(closed.clone()), Justification::An(inst2));
            let cbf = push(
                out,
                imp(nec(closed), goal.clone()),
                Justification::Axiom(AxiomInstance::plain(Scheme::Cbf { var: x, body: a })),
            );
            push(out, goal, Justification::Mp(an, cbf))
        }
        Justification::Mp(a, b) => {
            let chi_a = d.lines[*a].formula.clone();
            let gb = gen_line(out, d, x, *b, memo)?;
            if chi_a.fvar().contains(&x) {
                let ga = gen_line(out, d, x, *a, memo)?;
                let fa = Formula::forall(x, chi_a.clone()).map_err(|e| err(e.to_string()))?;
                let distr = push(
                    out,
                    imp(
                        Formula::forall(x, imp(chi_a.clone(), chi.clone()))
                            .map_err(|e| err(e.to_string()))?,
                        imp(fa.clone(), goal.clone()),
                    ),
                    Justification::Axiom(AxiomInstance::plain(Scheme::Distr {
                        var: x,
                        lhs: chi_a,
                        rhs: chi,
                    })),
                );
                let step = push(out, imp(fa, goal.clone()), Justification::Mp(gb, distr));
                push(out, goal, Justification::Mp(ga, step))
            } else {
                let vac = push(
                    out,
                    imp(
                        Formula::forall(x, imp(chi_a.clone(), chi.clone()))
                            .map_err(|e| err(e.to_string()))?,
                        imp(chi_a.clone(), goal.clone()),
                    ),
                    Justification::Axiom(AxiomInstance::plain(Scheme::Vac {
                        var: x,
                        lhs: chi_a.clone(),
                        rhs: chi,
                    })),
                );
                let step = push(out, imp(chi_a, goal.clone()), Justification::Mp(gb, vac));
                // the ungeneral premise is the original line, still present
                push(out, goal, Justification::Mp(*a, step))
            }
        }
    };
    memo[i] = Some(idx);
    Ok(idx)
}

/// Necessitation transformer, available from system 4 upward: from a
/// hypothesis-free derivation of `chi`, builds one of `[]chi`.
pub fn necessitate(d: &Derivation) -> Result<Derivation> {
    require_valid(d)?;
    if d.system < System::S4 {
        return Err(err("necessitation is not available in system 3"));
    }
    if !d.hypotheses.is_empty() {
        return Err(err("necessitation requires an empty hypothesis list"));
    }
    let mut out = d.clone();
    let mut memo: Vec<Option<usize>> = vec![None; d.lines.len()];
    let last = d.lines.len().checked_sub(1).ok_or(CalculusError::Empty)?;
    nec_line(&mut out, d, last, &mut memo)?;
    Ok(out)
}

fn nec_line(
    out: &mut Derivation,
    d: &Derivation,
    i: usize,
    memo: &mut Vec<Option<usize>>,
) -> Result<usize> {
    if let Some(idx) = memo[i] {
        return Ok(idx);
    }
    let chi = d.lines[i].formula.clone();
    let goal = nec(chi.clone());
    let idx = match &d.lines[i].just {
        Justification::Hyp(_) => return Err(err("unexpected hypothesis line")),
        Justification::Axiom(inst) => push(out, goal, Justification::An(inst.clone())),
        Justification::An(_) => {
            // chi = []A for an axiom A; []A -> [][]A
            let four = push(
                out,
                imp(chi.clone(), goal.clone()),
                Justification::Axiom(AxiomInstance::plain(Scheme::Four {
                    phi: match &chi {
                        Formula::Nec(a) => (**a).clone(),
                        _ => return Err(err("AN line is not boxed")),
                    },
                })),
            );
            push(out, goal, Justification::Mp(i, four))
        }
        Justification::Mp(a, b) => {
            let na = nec_line(out, d, *a, memo)?;
            let nb = nec_line(out, d, *b, memo)?;
            let chi_a = d.lines[*a].formula.clone();
            let k = push(
                out,
                imp(
                    nec(imp(chi_a.clone(), chi.clone())),
                    imp(nec(chi_a.clone()), goal.clone()),
                ),
                Justification::Axiom(AxiomInstance::plain(Scheme::K {
                    phi: chi_a.clone(),
                    psi: chi,
                })),
            );
            let step = push(out, imp(nec(chi_a), goal.clone()), Justification::Mp(nb, k));
            push(out, goal, Justification::Mp(na, step))
        }
    };
    memo[i] = Some(idx);
    Ok(idx)
}

fn map_scheme(s: &Scheme, c: &Const, y: Var) -> Scheme {
    let m = |f: &Formula| subst_const(f, c.clone(), Formula::Var(y));
    match s {
        Scheme::Taut { formula } => Scheme::Taut { formula: m(formula) },
        Scheme::T { phi } => Scheme::T { phi: m(phi) },
        Scheme::K { phi, psi } => Scheme::K {
            phi: m(phi),
            psi: m(psi),
        },
        Scheme::K4 { phi, psi } => Scheme::K4 {
            phi: m(phi),
            psi: m(psi),
        },
        Scheme::Alpha { lhs, rhs } => Scheme::Alpha {
            lhs: m(lhs),
            rhs: m(rhs),
        },
        Scheme::IdImp { lhs, rhs } => Scheme::IdImp {
            lhs: m(lhs),
            rhs: m(rhs),
        },
        Scheme::IdCong {
            template,
            var,
            lhs,
            rhs,
        } => Scheme::IdCong {
            template: m(template),
            var: *var,
            lhs: m(lhs),
            rhs: m(rhs),
        },
        Scheme::IdForall { var, lhs, rhs } => Scheme::IdForall {
            var: *var,
            lhs: m(lhs),
            rhs: m(rhs),
        },
        Scheme::Inst { var, body, witness } => Scheme::Inst {
            var: *var,
            body: m(body),
            witness: m(witness),
        },
        Scheme::Distr { var, lhs, rhs } => Scheme::Distr {
            var: *var,
            lhs: m(lhs),
            rhs: m(rhs),
        },
        Scheme::Vac { var, lhs, rhs } => Scheme::Vac {
            var: *var,
            lhs: m(lhs),
            rhs: m(rhs),
        },
        Scheme::Cbf { var, body } => Scheme::Cbf {
            var: *var,
            body: m(body),
        },
        Scheme::Barcan { var, body } => Scheme::Barcan {
            var: *var,
            body: m(body),
        },
        Scheme::Four { phi } => Scheme::Four { phi: m(phi) },
        Scheme::Five { phi } => Scheme::Five { phi: m(phi) },
    }
}

/// Constant elimination: substitutes the fresh variable `y` for the constant
/// `c` in every line.  `y` must exceed every variable index in `d`, and `c`
/// must not occur in the hypotheses (those stay untouched; hypothesis lines
/// are re-normalized through an identity bridge where bound-variable names
/// shift).
pub fn eliminate_constant(d: &Derivation, c: &Const, y: Var) -> Result<Derivation> {
    require_valid(d)?;
    if d.max_var_index() >= y.0 as i64 {
        return Err(err(format!(
            "{y} must be greater than every variable in the derivation"
        )));
    }
    for h in &d.hypotheses {
        if h.con().contains(c) {
            return Err(err(format!("constant {c} occurs in hypothesis `{h}`")));
        }
    }
    let subst = |f: &Formula| subst_const(f, c.clone(), Formula::Var(y));
    let mut out = Derivation::new(d.system, d.axiom_set, d.hypotheses.clone());
    let mut map: Vec<usize> = Vec::with_capacity(d.lines.len());
    for line in &d.lines {
        let target = subst(&line.formula);
        let idx = match &line.just {
            Justification::Hyp(j) => {
                // c is absent here, but substitution still alpha-normalizes
                let base = push(
                    &mut out,
                    d.hypotheses[*j].clone(),
                    Justification::Hyp(*j),
                );
                bridge_alpha(&mut out, base, target)?
            }
            Justification::Axiom(inst) => {
                let inst2 = AxiomInstance {
                    scheme: map_scheme(&inst.scheme, c, y),
                    foralls: inst.foralls.clone(),
                };
                let rebuilt = check_instance(&inst2, d.axiom_set, d.system)
                    .map_err(|e| err(format!("substituted axiom no longer checks: {e}")))?;
                let base = push(&mut out, rebuilt, Justification::Axiom(inst2));
                bridge_alpha(&mut out, base, target)?
            }
            Justification::An(inst) => {
                let inst2 = AxiomInstance {
                    scheme: map_scheme(&inst.scheme, c, y),
                    foralls: inst.foralls.clone(),
                };
                let rebuilt = check_instance(&inst2, d.axiom_set, d.system)
                    .map_err(|e| err(format!("substituted axiom no longer checks: {e}")))?;
                let base = push(&mut out, nec(rebuilt), Justification::An(inst2));
                bridge_alpha(&mut out, base, target)?
            }
            Justification::Mp(a, b) => {
                // substitution distributes over ->, so the premises line up
                push(&mut out, target, Justification::Mp(map[*a], map[*b]))
            }
        };
        map.push(idx);
    }
    Ok(out)
}

/// From a derivation of `phi[x := c]` with `c` occurring nowhere in the
/// hypotheses, produces a derivation of `forall x. phi` (with `phi` read off
/// by replacing `c` with `x`).  Composition of constant elimination with a
/// fresh variable, generalization over it, and a final renaming bridge.
pub fn generalize_constant(d: &Derivation, c: &Const, x: Var) -> Result<Derivation> {
    let conclusion = d.conclusion().ok_or(CalculusError::Empty)?.clone();
    if !conclusion.con().contains(c) {
        return Err(err(format!(
            "constant {c} does not occur in the conclusion `{conclusion}`"
        )));
    }
    if conclusion.fvar().contains(&x) {
        return Err(err(format!(
            "{x} is already free in the conclusion `{conclusion}`"
        )));
    }
    let y = Var((d.max_var_index().max(x.0 as i64) + 1) as u32);
    let eliminated = eliminate_constant(d, c, y)?;
    let mut out = generalize(&eliminated, y)?;
    let body = subst_const(&conclusion, c.clone(), Formula::Var(x));
    let target = Formula::forall(x, body).map_err(|e| err(e.to_string()))?;
    let last = out.lines.len() - 1;
    bridge_alpha(&mut out, last, target)?;
    Ok(out)
}
