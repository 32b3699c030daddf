//! Derivation generators: concrete proof recipes emitted as checkable
//! derivations.
//!
//! [`rigidity`] derives `(f == g) -> [](f == g)` in system 3, showing
//! identity statements are necessary.  [`strict_identity_library`] derives,
//! using only the four core S3 schemes, the six congruence theorems that
//! make strict equivalence `[](a -> b) & [](b -> a)` behave like an
//! identity connective.

use crate::calculus::{
    expand_identity, AxiomInstance, AxiomSet, CalculusError, Derivation, Justification, Scheme,
    System,
};
use crate::subst::alpha_eq;
use crate::syntax::{Formula, Var};
use crate::transform::{deduction, push, push_taut};

type Result<T> = std::result::Result<T, CalculusError>;

fn err(msg: impl Into<String>) -> CalculusError {
    CalculusError::Transform(msg.into())
}

fn imp(a: Formula, b: Formula) -> Formula {
    Formula::Imp(Box::new(a), Box::new(b))
}
fn and(a: Formula, b: Formula) -> Formula {
    Formula::And(Box::new(a), Box::new(b))
}
fn neg(a: Formula) -> Formula {
    Formula::Neg(Box::new(a))
}
fn nec(a: Formula) -> Formula {
    Formula::Nec(Box::new(a))
}
fn fid(a: Formula, b: Formula) -> Formula {
    Formula::Id(Box::new(a), Box::new(b))
}

fn push_axiom(d: &mut Derivation, scheme: Scheme) -> Result<usize> {
    let inst = AxiomInstance::plain(scheme);
    let f = crate::calculus::check_instance(&inst, d.axiom_set, d.system)?;
    Ok(push(d, f, Justification::Axiom(inst)))
}

/// Chains two implication lines `p -> q` and `q -> r` into `p -> r` with a
/// transitivity tautology.
fn chain_imp(d: &mut Derivation, pq: usize, qr: usize) -> Result<usize> {
    let (p, q) = match &d.lines[pq].formula {
        Formula::Imp(a, b) => ((**a).clone(), (**b).clone()),
        f => return Err(err(format!("`{f}` is not an implication"))),
    };
    let r = match &d.lines[qr].formula {
        Formula::Imp(a, b) if **a == q => (**b).clone(),
        f => return Err(err(format!("`{f}` does not continue `{q}`"))),
    };
    let t = push_taut(
        d,
        imp(
            imp(p.clone(), q.clone()),
            imp(imp(q, r.clone()), imp(p.clone(), r.clone())),
        ),
    );
    let s = push(
        d,
        d.lines[t].formula.consequent(),
        Justification::Mp(pq, t),
    );
    Ok(push(d, imp(p, r), Justification::Mp(qr, s)))
}

impl Formula {
    fn consequent(&self) -> Formula {
        match self {
            Formula::Imp(_, b) => (**b).clone(),
            _ => unreachable!("consequent of a non-implication"),
        }
    }
}

/// Derives `(f == g) -> [](f == g)` (system 3, full axiom set): identity
/// statements hold necessarily.
pub fn rigidity(phi: &Formula, psi: &Formula) -> Result<Derivation> {
    let mut d = Derivation::new(System::S3, AxiomSet::Full, vec![]);
    let fresh = Var(phi
        .max_var_index()
        .max(psi.max_var_index())
        .map_or(0, |m| m + 1));
    // (f == g) -> ((f == f) == (f == g)), congruence in  f == _
    let c1 = push_axiom(
        &mut d,
        Scheme::IdCong {
            template: fid(phi.clone(), Formula::Var(fresh)),
            var: fresh,
            lhs: phi.clone(),
            rhs: psi.clone(),
        },
    )?;
    let (antecedent, ff, fg) = match &d.lines[c1].formula {
        Formula::Imp(a, b) => match &**b {
            Formula::Id(l, r) => ((**a).clone(), (**l).clone(), (**r).clone()),
            _ => unreachable!(),
        },
        _ => unreachable!(),
    };
    // ((f == f) == (f == g)) -> ([](f == f) == [](f == g))
    let c2 = push_axiom(
        &mut d,
        Scheme::IdCong {
            template: nec(Formula::Var(fresh)),
            var: fresh,
            lhs: ff.clone(),
            rhs: fg.clone(),
        },
    )?;
    let c3 = chain_imp(&mut d, c1, c2)?;
    // ([](f==f) == [](f==g)) -> ([](f==f) -> [](f==g))
    let c4 = push_axiom(
        &mut d,
        Scheme::IdImp {
            lhs: nec(ff.clone()),
            rhs: nec(fg.clone()),
        },
    )?;
    let c5 = chain_imp(&mut d, c3, c4)?;
    // [](f == f) outright, by necessitation of the alpha axiom
    let alpha = AxiomInstance::plain(Scheme::Alpha {
        lhs: match &ff {
            Formula::Id(l, _) => (**l).clone(),
            _ => unreachable!(),
        },
        rhs: match &ff {
            Formula::Id(_, r) => (**r).clone(),
            _ => unreachable!(),
        },
    });
    let boxed = push(&mut d, nec(ff.clone()), Justification::An(alpha));
    // permute: from p -> (u -> v) and u conclude p -> v
    let perm = push_taut(
        &mut d,
        imp(
            imp(antecedent.clone(), imp(nec(ff.clone()), nec(fg.clone()))),
            imp(nec(ff.clone()), imp(antecedent.clone(), nec(fg.clone()))),
        ),
    );
    let swapped = push(
        &mut d,
        imp(nec(ff), imp(antecedent.clone(), nec(fg.clone()))),
        Justification::Mp(c5, perm),
    );
    let end = push(
        &mut d,
        imp(antecedent.clone(), nec(fg.clone())),
        Justification::Mp(boxed, swapped),
    );
    // the congruence may have renormalized bound variables inside f == g;
    // route back to the verbatim conclusion where needed
    let target = imp(fid(phi.clone(), psi.clone()), nec(fid(phi.clone(), psi.clone())));
    if d.lines[end].formula != target {
        let boxed_fg = nec(fg);
        let wanted = nec(fid(phi.clone(), psi.clone()));
        if !alpha_eq(&boxed_fg, &wanted) {
            return Err(err("renormalized conclusion is not alpha-equivalent"));
        }
        let id = push_axiom(
            &mut d,
            Scheme::Alpha {
                lhs: boxed_fg.clone(),
                rhs: wanted.clone(),
            },
        )?;
        let ii = push_axiom(
            &mut d,
            Scheme::IdImp {
                lhs: boxed_fg.clone(),
                rhs: wanted.clone(),
            },
        )?;
        let step = push(
            &mut d,
            imp(boxed_fg, wanted),
            Justification::Mp(id, ii),
        );
        chain_imp(&mut d, end, step)?;
    }
    Ok(d)
}

/// Strict equivalence of `a` and `b`: `[](a -> b) & [](b -> a)`.
pub fn strict_equiv(a: &Formula, b: &Formula) -> Formula {
    and(
        nec(imp(a.clone(), b.clone())),
        nec(imp(b.clone(), a.clone())),
    )
}

/// From boxed premise lines `[]a1, ..., []ak` and the tautology
/// `a1 -> (a2 -> ... -> (ak -> b))`, derives `[]b` by necessitating the
/// tautology and distributing with K.
fn box_chain(d: &mut Derivation, premises: &[usize], taut: Formula) -> Result<usize> {
    let mut cur = push(
        d,
        nec(taut.clone()),
        Justification::An(AxiomInstance::plain(Scheme::Taut { formula: taut.clone() })),
    );
    let mut rest = taut;
    for &p in premises {
        let (a, b) = match &rest {
            Formula::Imp(a, b) => ((**a).clone(), (**b).clone()),
            f => return Err(err(format!("tautology `{f}` too short for premises"))),
        };
        let k = push_axiom(
            d,
            Scheme::K {
                phi: a.clone(),
                psi: b.clone(),
            },
        )?;
        let step = push(
            d,
            imp(nec(a), nec(b.clone())),
            Justification::Mp(cur, k),
        );
        cur = push(d, nec(b.clone()), Justification::Mp(p, step));
        rest = b;
    }
    Ok(cur)
}

/// Conjoins two lines with a tautology: from `a` and `b` derive `a & b`.
fn conjoin(d: &mut Derivation, ia: usize, ib: usize) -> usize {
    let a = d.lines[ia].formula.clone();
    let b = d.lines[ib].formula.clone();
    let t = push_taut(d, imp(a.clone(), imp(b.clone(), and(a.clone(), b.clone()))));
    let s = push(d, imp(b.clone(), and(a.clone(), b.clone())), Justification::Mp(ia, t));
    push(d, and(a, b), Justification::Mp(ib, s))
}

/// Extracts a conjunct reachable by tautology from the hypothesis line.
fn extract(d: &mut Derivation, hyp_line: usize, part: Formula) -> usize {
    let whole = d.lines[hyp_line].formula.clone();
    let t = push_taut(d, imp(whole, part.clone()));
    push(d, part, Justification::Mp(hyp_line, t))
}

struct StrictPair {
    fwd: Formula, // a -> b
    bwd: Formula, // b -> a
}

fn pair(a: &Formula, b: &Formula) -> StrictPair {
    StrictPair {
        fwd: imp(a.clone(), b.clone()),
        bwd: imp(b.clone(), a.clone()),
    }
}

/// The six congruence theorems of strict equivalence, each returned as a
/// validated system-3 derivation using only the four core schemes
/// (tautologies, T, K, strict K4) with MP and AN.  Writing `E(a,b)` for
/// `[](a->b) & [](b->a)`, the theorems are
///
/// 1. `E(f,g) -> E(~f,~g)`
/// 2. `E(f,g) & E(f',g') -> E(f->f', g->g')`
/// 3. `E(f,g) & E(f',g') -> E(f&f', g&g')`
/// 4. `E(f,g) & E(f',g') -> E(f|f', g|g')`
/// 5. `E(f,g) & E(f',g') -> E(E(f,f'), E(g,g'))`
/// 6. `E(f,g) -> E([]f,[]g)`
///
/// Identity connectives in the inputs are macro-expanded to strict
/// equivalence first.
pub fn strict_identity_library(
    phi: &Formula,
    psi: &Formula,
    phi2: &Formula,
    psi2: &Formula,
) -> Result<Vec<Derivation>> {
    let f = expand_identity(phi);
    let g = expand_identity(psi);
    let f2 = expand_identity(phi2);
    let g2 = expand_identity(psi2);
    let mut out = Vec::with_capacity(6);
    out.push(unary_congruence(&f, &g, |a| neg(a.clone()), true)?);
    out.push(binary_congruence(&f, &g, &f2, &g2, |a, b| imp(a, b))?);
    out.push(binary_congruence(&f, &g, &f2, &g2, |a, b| and(a, b))?);
    out.push(binary_congruence(&f, &g, &f2, &g2, |a, b| {
        Formula::Or(Box::new(a), Box::new(b))
    })?);
    out.push(strict_equiv_congruence(&f, &g, &f2, &g2)?);
    out.push(box_congruence(&f, &g)?);
    Ok(out)
}

/// `E(f,g) -> E(o(f), o(g))` for a Boolean connective `o`; `flip` picks the
/// direction of the underlying implication (true for negation).
fn unary_congruence(
    f: &Formula,
    g: &Formula,
    op: impl Fn(&Formula) -> Formula,
    flip: bool,
) -> Result<Derivation> {
    let hyp = strict_equiv(f, g);
    let mut d = Derivation::new(System::S3, AxiomSet::Full, vec![hyp.clone()]);
    let h = push(&mut d, hyp.clone(), Justification::Hyp(0));
    let p = pair(f, g);
    let fwd = extract(&mut d, h, nec(p.fwd.clone()));
    let bwd = extract(&mut d, h, nec(p.bwd.clone()));
    let of = op(f);
    let og = op(g);
    let goal = pair(&of, &og);
    let (src_fwd, src_bwd) = if flip { (bwd, fwd) } else { (fwd, bwd) };
    let src_fwd_f = d.lines[src_fwd].formula.clone();
    let src_bwd_f = d.lines[src_bwd].formula.clone();
    let unbox = |f: &Formula| match f {
        Formula::Nec(a) => (**a).clone(),
        _ => unreachable!(),
    };
    let bf = box_chain(
        &mut d,
        &[src_fwd],
        imp(unbox(&src_fwd_f), goal.fwd.clone()),
    )?;
    let bb = box_chain(
        &mut d,
        &[src_bwd],
        imp(unbox(&src_bwd_f), goal.bwd.clone()),
    )?;
    conjoin(&mut d, bf, bb);
    deduction(&d, &hyp)
}

/// `E(f,g) & E(f',g') -> E(o(f,f'), o(g,g'))` for a binary Boolean
/// connective `o`.
fn binary_congruence(
    f: &Formula,
    g: &Formula,
    f2: &Formula,
    g2: &Formula,
    op: impl Fn(Formula, Formula) -> Formula,
) -> Result<Derivation> {
    let hyp = and(strict_equiv(f, g), strict_equiv(f2, g2));
    let mut d = Derivation::new(System::S3, AxiomSet::Full, vec![hyp.clone()]);
    let h = push(&mut d, hyp.clone(), Justification::Hyp(0));
    let p1 = pair(f, g);
    let p2 = pair(f2, g2);
    let fwd1 = extract(&mut d, h, nec(p1.fwd.clone()));
    let bwd1 = extract(&mut d, h, nec(p1.bwd.clone()));
    let fwd2 = extract(&mut d, h, nec(p2.fwd.clone()));
    let bwd2 = extract(&mut d, h, nec(p2.bwd.clone()));
    let left = op(f.clone(), f2.clone());
    let right = op(g.clone(), g2.clone());
    let goal = pair(&left, &right);
    let bf = box_chain(
        &mut d,
        &[fwd1, bwd1, fwd2, bwd2],
        imp(
            p1.fwd.clone(),
            imp(
                p1.bwd.clone(),
                imp(p2.fwd.clone(), imp(p2.bwd.clone(), goal.fwd.clone())),
            ),
        ),
    )?;
    let bb = box_chain(
        &mut d,
        &[fwd1, bwd1, fwd2, bwd2],
        imp(
            p1.fwd.clone(),
            imp(
                p1.bwd.clone(),
                imp(p2.fwd.clone(), imp(p2.bwd.clone(), goal.bwd.clone())),
            ),
        ),
    )?;
    conjoin(&mut d, bf, bb);
    deduction(&d, &hyp)
}

/// `E(f,g) & E(f',g') -> E(E(f,f'), E(g,g'))`: congruence for strict
/// equivalence itself, which needs the strict K4 scheme to push a box
/// inside a box.
fn strict_equiv_congruence(
    f: &Formula,
    g: &Formula,
    f2: &Formula,
    g2: &Formula,
) -> Result<Derivation> {
    let hyp = and(strict_equiv(f, g), strict_equiv(f2, g2));
    let mut d = Derivation::new(System::S3, AxiomSet::Full, vec![hyp.clone()]);
    let h = push(&mut d, hyp.clone(), Justification::Hyp(0));
    let p1 = pair(f, g);
    let p2 = pair(f2, g2);
    let fwd1 = extract(&mut d, h, nec(p1.fwd.clone()));
    let bwd1 = extract(&mut d, h, nec(p1.bwd.clone()));
    let fwd2 = extract(&mut d, h, nec(p2.fwd.clone()));
    let bwd2 = extract(&mut d, h, nec(p2.bwd.clone()));
    // the four component implications between the inner pairs
    let lf = pair(f, f2); // f -> f', f' -> f
    let rg = pair(g, g2);
    // []( (f->f') -> (g->g') ) from [](g->f), [](f'->g')
    let boxed_imp = |d: &mut Derivation,
                         from: Formula,
                         to: Formula,
                         prem1: usize,
                         prem1_f: Formula,
                         prem2: usize,
                         prem2_f: Formula|
     -> Result<usize> {
        let c = box_chain(
            d,
            &[prem1, prem2],
            imp(prem1_f, imp(prem2_f, imp(from.clone(), to.clone()))),
        )?;
        // strict K4: [](a -> b) -> []([]a -> []b)
        let k4 = push_axiom(
            d,
            Scheme::K4 {
                phi: from.clone(),
                psi: to.clone(),
            },
        )?;
        Ok(push(
            d,
            nec(imp(nec(from), nec(to))),
            Justification::Mp(c, k4),
        ))
    };
    // [](  [](f->f') -> [](g->g') )
    let d1 = boxed_imp(
        &mut d,
        lf.fwd.clone(),
        rg.fwd.clone(),
        bwd1,
        p1.bwd.clone(),
        fwd2,
        p2.fwd.clone(),
    )?;
    // [](  [](f'->f) -> [](g'->g) )
    let d2 = boxed_imp(
        &mut d,
        lf.bwd.clone(),
        rg.bwd.clone(),
        bwd2,
        p2.bwd.clone(),
        fwd1,
        p1.fwd.clone(),
    )?;
    // reverse direction
    let d3 = boxed_imp(
        &mut d,
        rg.fwd.clone(),
        lf.fwd.clone(),
        fwd1,
        p1.fwd.clone(),
        bwd2,
        p2.bwd.clone(),
    )?;
    let d4 = boxed_imp(
        &mut d,
        rg.bwd.clone(),
        lf.bwd.clone(),
        fwd2,
        p2.fwd.clone(),
        bwd1,
        p1.bwd.clone(),
    )?;
    // combine: E(f,f') -> E(g,g') under a box, in both directions
    let e_left = strict_equiv(f, f2);
    let e_right = strict_equiv(g, g2);
    let a1 = imp(nec(lf.fwd.clone()), nec(rg.fwd.clone()));
    let a2 = imp(nec(lf.bwd.clone()), nec(rg.bwd.clone()));
    let fwd_goal = box_chain(
        &mut d,
        &[d1, d2],
        imp(
            a1.clone(),
            imp(a2.clone(), imp(e_left.clone(), e_right.clone())),
        ),
    )?;
    let b1 = imp(nec(rg.fwd.clone()), nec(lf.fwd.clone()));
    let b2 = imp(nec(rg.bwd.clone()), nec(lf.bwd.clone()));
    let bwd_goal = box_chain(
        &mut d,
        &[d3, d4],
        imp(b1, imp(b2, imp(e_right, e_left))),
    )?;
    conjoin(&mut d, fwd_goal, bwd_goal);
    deduction(&d, &hyp)
}

/// `E(f,g) -> E([]f,[]g)` using the strict K4 scheme directly.
fn box_congruence(f: &Formula, g: &Formula) -> Result<Derivation> {
    let hyp = strict_equiv(f, g);
    let mut d = Derivation::new(System::S3, AxiomSet::Full, vec![hyp.clone()]);
    let h = push(&mut d, hyp.clone(), Justification::Hyp(0));
    let p = pair(f, g);
    let fwd = extract(&mut d, h, nec(p.fwd.clone()));
    let bwd = extract(&mut d, h, nec(p.bwd.clone()));
    let k4f = push_axiom(
        &mut d,
        Scheme::K4 {
            phi: f.clone(),
            psi: g.clone(),
        },
    )?;
    let boxed_fwd = push(
        &mut d,
        nec(imp(nec(f.clone()), nec(g.clone()))),
        Justification::Mp(fwd, k4f),
    );
    let k4b = push_axiom(
        &mut d,
        Scheme::K4 {
            phi: g.clone(),
            psi: f.clone(),
        },
    )?;
    let boxed_bwd = push(
        &mut d,
        nec(imp(nec(g.clone()), nec(f.clone()))),
        Justification::Mp(bwd, k4b),
    );
    conjoin(&mut d, boxed_fwd, boxed_bwd);
    deduction(&d, &hyp)
}
