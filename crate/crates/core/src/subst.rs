//! Capture-free substitution with a deterministic bound-variable policy.
//!
//! A substitution maps variables *and constants* to formulas (constants may
//! be rebound; unmapped symbols stay fixed).  Applying a substitution to
//! `forall x. f` always renames the binder to the *forced* variable: the
//! least variable strictly greater than every variable free in the image of
//! any free variable or constant of `forall x. f`.  When that set is empty
//! the forced variable is `x0`.  The rule never captures and makes
//! application constant on alpha-classes, so alpha-equivalence is decided by
//! comparing empty-substitution normal forms.

use std::collections::BTreeMap;

use crate::syntax::{Const, Formula, SyntaxError, Var};

/// A finite map from variables and constants to formulas.
#[derive(Clone, Default, PartialEq, Eq, Debug)]
pub struct Substitution {
    vars: BTreeMap<Var, Formula>,
    consts: BTreeMap<Const, Formula>,
}

impl Substitution {
    /// The empty substitution (identity up to binder renaming).
    pub fn identity() -> Substitution {
        Substitution::default()
    }

    /// Single-variable substitution `[x := f]`.
    pub fn single(x: Var, f: Formula) -> Substitution {
        let mut s = Substitution::default();
        s.bind_var(x, f);
        s
    }

    /// Single-constant substitution `[c := f]`.
    pub fn single_const(c: Const, f: Formula) -> Substitution {
        let mut s = Substitution::default();
        s.bind_const(c, f);
        s
    }

    pub fn bind_var(&mut self, x: Var, f: Formula) -> &mut Self {
        self.vars.insert(x, f);
        self
    }

    pub fn bind_const(&mut self, c: Const, f: Formula) -> &mut Self {
        self.consts.insert(c, f);
        self
    }

    pub fn var_image(&self, x: Var) -> Formula {
        self.vars.get(&x).cloned().unwrap_or(Formula::Var(x))
    }

    pub fn const_image(&self, c: &Const) -> Formula {
        self.consts
            .get(c)
            .cloned()
            .unwrap_or(Formula::Const(c.clone()))
    }

    pub fn var_bindings(&self) -> impl Iterator<Item = (&Var, &Formula)> {
        self.vars.iter()
    }

    pub fn const_bindings(&self) -> impl Iterator<Item = (&Const, &Formula)> {
        self.consts.iter()
    }

    /// The forced binder for `forall x. body` under `self`: least variable
    /// greater than every variable free in the image of a free variable or
    /// constant of the quantified formula (`x0` when there are none).
    fn forced_var(&self, quantified: &Formula) -> Var {
        let mut max: i64 = -1;
        for v in quantified.fvar() {
            for w in self.var_image(v).fvar() {
                max = max.max(w.0 as i64);
            }
        }
        for c in quantified.con() {
            for w in self.const_image(&c).fvar() {
                max = max.max(w.0 as i64);
            }
        }
        Var((max + 1) as u32)
    }
}

/// Applies a substitution.  Errors only on internal ill-formedness, which
/// cannot arise for well-formed inputs.
pub fn apply(f: &Formula, s: &Substitution) -> Formula {
    match f {
        Formula::Var(v) => s.var_image(*v),
        Formula::Const(c) => s.const_image(c),
        Formula::Neg(a) => Formula::Neg(Box::new(apply(a, s))),
        Formula::Nec(a) => Formula::Nec(Box::new(apply(a, s))),
        Formula::Or(a, b) => Formula::Or(Box::new(apply(a, s)), Box::new(apply(b, s))),
        Formula::And(a, b) => Formula::And(Box::new(apply(a, s)), Box::new(apply(b, s))),
        Formula::Imp(a, b) => Formula::Imp(Box::new(apply(a, s)), Box::new(apply(b, s))),
        Formula::Id(a, b) => Formula::Id(Box::new(apply(a, s)), Box::new(apply(b, s))),
        Formula::Forall(x, body) => {
            let y = s.forced_var(f);
            let mut inner = s.clone();
            inner.bind_var(*x, Formula::Var(y));
            let new_body = apply(body, &inner);
            debug_assert!(new_body.fvar().contains(&y));
            Formula::Forall(y, Box::new(new_body))
        }
    }
}

/// Convenience for `f[x := g]`.
pub fn subst_var(f: &Formula, x: Var, g: Formula) -> Formula {
    apply(f, &Substitution::single(x, g))
}

/// Convenience for `f[c := g]`.
pub fn subst_const(f: &Formula, c: Const, g: Formula) -> Formula {
    apply(f, &Substitution::single_const(c, g))
}

/// Alpha-normal form: application of the empty substitution, which renames
/// every binder to its forced variable.
pub fn alpha_normal(f: &Formula) -> Formula {
    apply(f, &Substitution::identity())
}

/// Alpha-equivalence, decided via normal forms.
pub fn alpha_eq(a: &Formula, b: &Formula) -> bool {
    a == b || alpha_normal(a) == alpha_normal(b)
}

/// Composition: `apply(f, compose(s1, s2))` agrees with
/// `apply(apply(f, s1), s2)` (syntactically on quantifier-free formulas).
pub fn compose(s1: &Substitution, s2: &Substitution) -> Substitution {
    let mut out = Substitution::default();
    for (x, f) in &s1.vars {
        out.bind_var(*x, apply(f, s2));
    }
    for (x, f) in &s2.vars {
        if !s1.vars.contains_key(x) {
            out.bind_var(*x, f.clone());
        }
    }
    for (c, f) in &s1.consts {
        out.bind_const(c.clone(), apply(f, s2));
    }
    for (c, f) in &s2.consts {
        if !s1.consts.contains_key(c) {
            out.bind_const(c.clone(), f.clone());
        }
    }
    out
}

/// `SyntaxError` is re-exported here because substitution preserves
/// well-formedness and callers often mix the two modules.
pub type Error = SyntaxError;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{self, bot, id, imp, or, parse, var, Var};

    fn p(s: &str) -> Formula {
        parse(s).unwrap()
    }

    #[test]
    fn plain_replacement() {
        let f = p("x0 -> x1");
        assert_eq!(subst_var(&f, Var(0), p("~x2")), p("~x2 -> x1"));
    }

    #[test]
    fn forced_variable_avoids_capture() {
        // forall x0. x0 == x1, with x1 := x2: binder forced past x2.
        let f = p("forall x0. x0 == x1");
        let got = subst_var(&f, Var(1), var(2));
        assert_eq!(got, p("forall x3. x3 == x2"));
    }

    #[test]
    fn forced_variable_empty_support() {
        // No free variables or constant images with free variables: binder
        // becomes x0.
        let f = Formula::forall(Var(5), id(var(5), bot())).unwrap();
        assert_eq!(alpha_normal(&f), p("forall x0. x0 == bot"));
    }

    #[test]
    fn capture_attempt_is_renamed() {
        // forall x1. x0 == x1 with x0 := x1 must not capture.
        let f = p("forall x1. x0 == x1");
        let got = subst_var(&f, Var(0), var(1));
        assert_eq!(got, p("forall x2. x1 == x2"));
    }

    #[test]
    fn alpha_eq_of_renamed_binders() {
        let a = p("forall x0. x0 | x2");
        let b = p("forall x1. x1 | x2");
        assert!(alpha_eq(&a, &b));
        assert!(!alpha_eq(&a, &p("forall x1. x1 | x3")));
    }

    #[test]
    fn alpha_normal_idempotent() {
        let f = p("forall x4. (forall x2. x2 & x4) | x4");
        let n = alpha_normal(&f);
        assert_eq!(alpha_normal(&n), n);
        assert!(alpha_eq(&f, &n));
    }

    #[test]
    fn sentences_get_canonical_binders() {
        let f = p("forall x7. x7 -> bot");
        assert_eq!(alpha_normal(&f), p("forall x0. x0 -> bot"));
    }

    #[test]
    fn constants_can_be_rebound() {
        let f = p("#c & x0");
        assert_eq!(
            subst_const(&f, syntax::Const::Named("c".into()), p("~x1")),
            p("~x1 & x0")
        );
    }

    #[test]
    fn compose_on_quantifier_free() {
        let s1 = Substitution::single(Var(0), p("x1 & x2"));
        let mut s2 = Substitution::single(Var(1), p("~x0"));
        s2.bind_var(Var(2), bot());
        let f = p("x0 | x1");
        assert_eq!(
            apply(&apply(&f, &s1), &s2),
            apply(&f, &compose(&s1, &s2))
        );
    }

    #[test]
    fn compose_on_quantified() {
        let s1 = Substitution::single(Var(1), var(2));
        let s2 = Substitution::single(Var(2), p("x3 -> x3"));
        let f = p("forall x0. x0 == x1");
        assert_eq!(
            apply(&apply(&f, &s1), &s2),
            apply(&f, &compose(&s1, &s2))
        );
    }

    #[test]
    fn substitution_is_alpha_stable() {
        let a = p("forall x0. x0 | x5");
        let b = p("forall x3. x3 | x5");
        let s = Substitution::single(Var(5), imp(var(1), var(1)));
        assert_eq!(apply(&a, &s), apply(&b, &s));
        let _ = or(bot(), bot());
    }
}
