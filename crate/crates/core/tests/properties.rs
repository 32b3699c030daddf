//! Cross-module property tests: grammar round-trips, substitution laws,
//! recognizer/checker agreement, and semantic lemmas on sampled inputs.

use nfk_core::calculus::{
    check_derivation, check_instance, recognize_axiom, AxiomSet, System,
};
use nfk_core::models::{eval, satisfies, Assignment, ModalModel};
use nfk_core::sample::Sampler;
use nfk_core::subst::{alpha_eq, alpha_normal, apply, compose, Substitution};
use nfk_core::syntax::{analyze, parse, Formula, Fragment, Var};
use proptest::prelude::*;

fn sampled_formulas(seed: u64, count: usize, depth: u32, frag: Fragment) -> Vec<Formula> {
    let mut s = Sampler::new(seed);
    (0..count).map(|_| s.formula(depth, 4, frag)).collect()
}

#[test]
fn parse_render_round_trip_bulk() {
    // >= 10^4 random ASTs across all fragments
    let mut total = 0;
    for seed in 0..40u64 {
        for frag in [Fragment::Prop, Fragment::Modal, Fragment::Full] {
            for f in sampled_formulas(seed, 90, 5, frag) {
                let text = f.render();
                let back = parse(&text).unwrap_or_else(|e| panic!("{text}: {e}"));
                assert_eq!(back, f, "round trip through `{text}`");
                total += 1;
            }
        }
    }
    assert!(total >= 10_000);
}

#[test]
fn free_variables_of_a_quantifier_drop_the_binder() {
    let mut s = Sampler::new(11);
    for _ in 0..2_000 {
        let x = Var(s.below(4) as u32);
        let body = s.formula_with(4, 4, Fragment::Full, x);
        let whole = Formula::Forall(x, Box::new(body.clone()));
        let mut expect = body.fvar();
        expect.remove(&x);
        assert_eq!(whole.fvar(), expect);
        assert!(whole.var().is_superset(&whole.fvar()));
    }
}

#[test]
fn quantifier_rank_is_stable_under_rank_zero_substitution() {
    let mut s = Sampler::new(12);
    for _ in 0..2_000 {
        let f = s.formula(4, 3, Fragment::Full);
        let image = s.formula(3, 3, Fragment::Prop);
        let g = apply(&f, &Substitution::single(Var(0), image));
        assert_eq!(analyze(&g).qrank, analyze(&f).qrank, "{}", f.render());
    }
}

#[test]
fn identity_substitution_is_alpha_invisible() {
    let mut s = Sampler::new(13);
    let eps = Substitution::identity();
    for _ in 0..2_000 {
        let f = s.formula(5, 4, Fragment::Full);
        let norm = apply(&f, &eps);
        assert!(alpha_eq(&f, &norm), "{}", f.render());
        // normalization is idempotent, so alpha_eq is reflexive/transitive here
        assert_eq!(alpha_normal(&norm), norm);
    }
}

#[test]
fn alpha_equivalence_is_a_congruence() {
    let mut s = Sampler::new(14);
    for _ in 0..1_000 {
        let x = Var(s.below(3) as u32);
        let body = s.formula_with(3, 3, Fragment::Full, x);
        let a = Formula::Forall(x, Box::new(body.clone()));
        // rename the binder to a fresh variable by normalizing
        let b = alpha_normal(&a);
        assert!(alpha_eq(&a, &b));
        let ctx = s.formula(2, 3, Fragment::Full);
        let in_a = Formula::And(Box::new(ctx.clone()), Box::new(a));
        let in_b = Formula::And(Box::new(ctx), Box::new(b));
        assert!(alpha_eq(&in_a, &in_b));
    }
}

#[test]
fn composed_substitution_matches_two_step_application() {
    let mut s = Sampler::new(15);
    for _ in 0..2_000 {
        let f = s.formula(4, 3, Fragment::Full);
        let mut s1 = Substitution::identity();
        let mut s2 = Substitution::identity();
        for i in 0..3u32 {
            if s.below(2) == 0 {
                s1.bind_var(Var(i), s.formula(2, 3, Fragment::Full));
            }
            if s.below(2) == 0 {
                s2.bind_var(Var(i), s.formula(2, 3, Fragment::Full));
            }
        }
        let two_step = apply(&apply(&f, &s1), &s2);
        let one_step = apply(&f, &compose(&s1, &s2));
        assert_eq!(two_step, one_step, "{}", f.render());
    }
}

#[test]
fn recognized_axioms_check_and_checked_instances_recognize() {
    for system in [System::S3, System::S4, System::S5] {
        for set in [AxiomSet::Full, AxiomSet::Minus] {
            let mut s = Sampler::new(16 + system as u64);
            for _ in 0..400 {
                let inst = s.instance(set, system);
                let f = check_instance(&inst, set, system)
                    .unwrap_or_else(|e| panic!("sampled instance must check: {e}"));
                let again = recognize_axiom(&f, set, system)
                    .unwrap_or_else(|| panic!("recognizer missed `{}`", f.render()));
                let g = check_instance(&again, set, system).unwrap();
                assert_eq!(g, f, "recognizer must reproduce the same formula");
            }
        }
    }
}

#[test]
fn sampled_derivations_check_and_survive_reserialization() {
    let mut s = Sampler::new(17);
    for system in [System::S3, System::S4, System::S5] {
        for _ in 0..40 {
            let hyps = vec![s.formula(3, 3, Fragment::Full)];
            let d = s.derivation(AxiomSet::Full, system, &hyps, 12);
            let report = check_derivation(&d);
            assert!(report.ok, "{:?}", report.failures);
            let text = serde_json::to_string(&d).unwrap();
            let back: nfk_core::calculus::Derivation = serde_json::from_str(&text).unwrap();
            assert!(check_derivation(&back).ok);
        }
    }
}

#[test]
fn sampled_tautologies_hold_in_the_two_element_model() {
    let m = ModalModel::classical();
    let mut s = Sampler::new(18);
    for _ in 0..800 {
        let f = s.tautology(4, 3, Fragment::Prop);
        for bits in 0..8usize {
            let mut g = Assignment::new();
            for i in 0..3 {
                g = g.bind(Var(i), (bits >> i) & 1);
            }
            assert!(
                satisfies(&m, &g, &f).unwrap(),
                "{} under bits {bits}",
                f.render()
            );
        }
    }
}

#[test]
fn coincidence_on_sampled_models_and_assignments() {
    // assignments agreeing on the free variables give the same value
    let models = [ModalModel::classical(), ModalModel::doubled_classical()];
    let mut s = Sampler::new(19);
    for _ in 0..2_500 {
        let m = &models[s.below(2)];
        let f = s.formula(4, 3, Fragment::Full);
        let mut g1 = Assignment::new();
        let mut g2 = Assignment::new();
        for i in 0..3u32 {
            let v = Var(i);
            let a = s.below(m.n);
            if f.fvar().contains(&v) {
                g1 = g1.bind(v, a);
                g2 = g2.bind(v, a);
            } else {
                g1 = g1.bind(v, s.below(m.n));
                g2 = g2.bind(v, s.below(m.n));
            }
        }
        assert_eq!(eval(m, &g1, &f).unwrap(), eval(m, &g2, &f).unwrap());
    }
}

#[test]
fn substitution_commutes_with_evaluation() {
    // eval(m, g, phi[sigma]) = eval(m, g-after-sigma, phi)
    let models = [ModalModel::classical(), ModalModel::doubled_classical()];
    let mut s = Sampler::new(20);
    for _ in 0..2_500 {
        let m = &models[s.below(2)];
        let f = s.formula(3, 3, Fragment::Full);
        let mut sigma = Substitution::identity();
        for i in 0..3u32 {
            if s.below(2) == 0 {
                sigma.bind_var(Var(i), s.formula(2, 3, Fragment::Full));
            }
        }
        let mut g = Assignment::new();
        for i in 0..3u32 {
            g = g.bind(Var(i), s.below(m.n));
        }
        let mut g_sigma = Assignment::new();
        for i in 0..3u32 {
            let v = Var(i);
            g_sigma = g_sigma.bind(v, eval(m, &g, &sigma.var_image(v)).unwrap());
        }
        let lhs = eval(m, &g, &apply(&f, &sigma)).unwrap();
        let rhs = eval(m, &g_sigma, &f).unwrap();
        assert_eq!(lhs, rhs, "{} under {:?}", f.render(), sigma);
    }
}

#[test]
fn identity_refines_strict_equivalence_on_models() {
    // whenever phi == psi holds, so does [](phi -> psi) & [](psi -> phi)
    let models = [ModalModel::classical(), ModalModel::doubled_classical()];
    let mut s = Sampler::new(21);
    for _ in 0..2_500 {
        let m = &models[s.below(2)];
        let phi = s.formula(3, 2, Fragment::Full);
        let psi = s.formula(3, 2, Fragment::Full);
        let mut g = Assignment::new();
        for i in 0..2u32 {
            g = g.bind(Var(i), s.below(m.n));
        }
        let id = Formula::Id(Box::new(phi.clone()), Box::new(psi.clone()));
        if satisfies(m, &g, &id).unwrap() {
            let se = nfk_core::generate::strict_equiv(&phi, &psi);
            assert!(satisfies(m, &g, &se).unwrap(), "{}", id.render());
        }
    }
}

#[test]
fn axiom_instances_are_necessary_in_sampled_models() {
    let models = [ModalModel::classical(), ModalModel::doubled_classical()];
    for system in [System::S3, System::S4, System::S5] {
        let mut s = Sampler::new(22 + system as u64);
        for _ in 0..600 {
            let inst = s.instance(AxiomSet::Full, system);
            let f = check_instance(&inst, AxiomSet::Full, system).unwrap();
            for m in &models {
                if (system == System::S4 || system == System::S5) && m.n > 2 {
                    // the doubled model is S3-only; its box is not idempotent
                    continue;
                }
                let mut g = Assignment::new();
                for v in f.fvar() {
                    g = g.bind(v, s.below(m.n));
                }
                let value = eval(m, &g, &f).unwrap();
                assert!(
                    m.nec_set.contains(&value),
                    "axiom `{}` left NEC in a {}-element model",
                    f.render(),
                    m.n
                );
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn render_of_sampled_formula_reparses(seed in any::<u64>(), depth in 1u32..6) {
        let mut s = Sampler::new(seed);
        let f = s.formula(depth, 5, Fragment::Full);
        prop_assert_eq!(parse(&f.render()).unwrap(), f);
    }

    #[test]
    fn alpha_normalization_is_idempotent(seed in any::<u64>()) {
        let mut s = Sampler::new(seed);
        let f = s.formula(5, 4, Fragment::Full);
        let once = alpha_normal(&f);
        prop_assert_eq!(alpha_normal(&once), once.clone());
        prop_assert!(alpha_eq(&f, &once));
    }

    #[test]
    fn analysis_serializes(seed in any::<u64>()) {
        let mut s = Sampler::new(seed);
        let f = s.formula(4, 4, Fragment::Full);
        let a = analyze(&f);
        let v: serde_json::Value = serde_json::to_value(&a).unwrap();
        prop_assert_eq!(v["rendered"].as_str().unwrap(), f.render());
    }
}
