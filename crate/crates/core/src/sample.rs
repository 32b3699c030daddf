//! Seeded random generation of formulas, axiom instances, and valid
//! derivations, used by property tests and the CLI's self-check paths.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::calculus::{
    check_instance, AxiomInstance, AxiomSet, Derivation, Justification, Line, Scheme, System,
};
use crate::subst::alpha_normal;
use crate::syntax::{Const, Formula, Fragment, Var};

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Sampler {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Uniform draw from `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n.max(1))
    }

    /// Random formula of the given fragment with variables drawn from
    /// `x0..x<nvars>` and node depth bounded by `depth`.
    pub fn formula(&mut self, depth: u32, nvars: u32, frag: Fragment) -> Formula {
        let nvars = nvars.max(1);
        if depth == 0 {
            return match self.rng.gen_range(0..6) {
                0 => Formula::Const(Const::Bot),
                1 => Formula::Const(Const::Top),
                _ => Formula::Var(Var(self.rng.gen_range(0..nvars))),
            };
        }
        let top = match frag {
            Fragment::Prop => 4,
            Fragment::Modal => 5,
            Fragment::Full => 7,
        };
        match self.rng.gen_range(0..=top) {
            0 => self.formula(0, nvars, frag),
            1 => Formula::Neg(Box::new(self.formula(depth - 1, nvars, frag))),
            2 => Formula::Or(
                Box::new(self.formula(depth - 1, nvars, frag)),
                Box::new(self.formula(depth - 1, nvars, frag)),
            ),
            3 => Formula::And(
                Box::new(self.formula(depth - 1, nvars, frag)),
                Box::new(self.formula(depth - 1, nvars, frag)),
            ),
            4 => Formula::Imp(
                Box::new(self.formula(depth - 1, nvars, frag)),
                Box::new(self.formula(depth - 1, nvars, frag)),
            ),
            5 => Formula::Nec(Box::new(self.formula(depth - 1, nvars, frag))),
            6 => Formula::Id(
                Box::new(self.formula(depth - 1, nvars, frag)),
                Box::new(self.formula(depth - 1, nvars, frag)),
            ),
            _ => {
                let body = self.formula(depth - 1, nvars, frag);
                let free: Vec<Var> = body.fvar().into_iter().collect();
                if free.is_empty() {
                    body
                } else {
                    let x = free[self.rng.gen_range(0..free.len())];
                    Formula::forall(x, body).expect("chosen variable is free")
                }
            }
        }
    }

    /// Random formula guaranteed to have `x` free: `x` is disjoined in when
    /// the draw happens to omit it.
    pub fn formula_with(&mut self, depth: u32, nvars: u32, frag: Fragment, x: Var) -> Formula {
        let f = self.formula(depth, nvars, frag);
        if f.fvar().contains(&x) {
            f
        } else {
            Formula::Or(Box::new(Formula::Var(x)), Box::new(f))
        }
    }

    /// Random formula guaranteed to avoid `x` free, by drawing from
    /// variables below `x`.
    pub fn formula_without(&mut self, depth: u32, frag: Fragment, x: Var) -> Formula {
        if x.0 == 0 {
            return Formula::Const(Const::Top);
        }
        self.formula(depth, x.0, frag)
    }

    /// Random tautology: one of a fixed family of propositional shapes
    /// instantiated with random formulas.
    pub fn tautology(&mut self, depth: u32, nvars: u32, frag: Fragment) -> Formula {
        let p = self.formula(depth, nvars, frag);
        let q = self.formula(depth, nvars, frag);
        let r = self.formula(depth, nvars, frag);
        let imp = |a: &Formula, b: &Formula| {
            Formula::Imp(Box::new(a.clone()), Box::new(b.clone()))
        };
        match self.rng.gen_range(0..8) {
            0 => imp(&p, &p),
            1 => imp(&p, &imp(&q, &p)),
            2 => imp(
                &imp(&p, &imp(&q, &r)),
                &imp(&imp(&p, &q), &imp(&p, &r)),
            ),
            3 => Formula::Or(Box::new(p.clone()), Box::new(Formula::Neg(Box::new(p)))),
            4 => imp(&Formula::And(Box::new(p.clone()), Box::new(q)), &p),
            5 => imp(
                &p,
                &imp(&q, &Formula::And(Box::new(p.clone()), Box::new(q.clone()))),
            ),
            6 => imp(&Formula::Neg(Box::new(Formula::Neg(Box::new(p.clone())))), &p),
            _ => imp(&imp(&p, &q), &imp(&imp(&q, &r), &imp(&p, &r))),
        }
    }

    /// Random valid axiom instance for the given axiom set and system, with
    /// an occasional universal-closure prefix.
    pub fn instance(&mut self, set: AxiomSet, system: System) -> AxiomInstance {
        let depth = 2;
        let nvars = 3;
        // quantified-scheme witnesses use a variable above the drawing range
        let x = Var(nvars);
        let frag = Fragment::Full;
        let mut choices: Vec<u32> = (0..13).collect();
        if set == AxiomSet::Full {
            choices.push(13); // id-forall
            choices.push(14); // barcan
        }
        if system >= System::S4 {
            choices.push(15);
        }
        if system == System::S5 {
            choices.push(16);
        }
        let scheme = match choices[self.rng.gen_range(0..choices.len())] {
            0 => Scheme::Taut {
                formula: self.tautology(depth, nvars, frag),
            },
            1 => Scheme::T {
                phi: self.formula(depth, nvars, frag),
            },
            2 => Scheme::K {
                phi: self.formula(depth, nvars, frag),
                psi: self.formula(depth, nvars, frag),
            },
            3 => Scheme::K4 {
                phi: self.formula(depth, nvars, frag),
                psi: self.formula(depth, nvars, frag),
            },
            4 => {
                let lhs = self.formula(depth, nvars, frag);
                let rhs = if self.rng.gen_bool(0.5) {
                    alpha_normal(&lhs)
                } else {
                    lhs.clone()
                };
                Scheme::Alpha { lhs, rhs }
            }
            5 => Scheme::IdImp {
                lhs: self.formula(depth, nvars, frag),
                rhs: self.formula(depth, nvars, frag),
            },
            6 => Scheme::IdCong {
                template: self.formula_with(depth, nvars, frag, x),
                var: x,
                lhs: self.formula(depth, nvars, frag),
                rhs: self.formula(depth, nvars, frag),
            },
            7 => Scheme::Inst {
                var: x,
                body: self.formula_with(depth, nvars, frag, x),
                witness: self.formula(depth, nvars, frag),
            },
            8 => Scheme::Distr {
                var: x,
                lhs: self.formula_with(depth, nvars, frag, x),
                rhs: self.formula_with(depth, nvars, frag, x),
            },
            9 => Scheme::Vac {
                var: x,
                lhs: self.formula_without(depth, frag, x),
                rhs: self.formula_with(depth, nvars, frag, x),
            },
            10 | 11 => Scheme::Cbf {
                var: x,
                body: self.formula_with(depth, nvars, frag, x),
            },
            12 => Scheme::Taut {
                formula: self.tautology(1, nvars, Fragment::Prop),
            },
            13 => Scheme::IdForall {
                var: x,
                lhs: self.formula_with(depth, nvars, frag, x),
                rhs: self.formula_with(depth, nvars, frag, x),
            },
            14 => Scheme::Barcan {
                var: x,
                body: self.formula_with(depth, nvars, frag, x),
            },
            15 => Scheme::Four {
                phi: self.formula(depth, nvars, frag),
            },
            _ => Scheme::Five {
                phi: self.formula(depth, nvars, frag),
            },
        };
        let mut inst = AxiomInstance::plain(scheme);
        // optional universal closure over a variable free in the core
        if self.rng.gen_bool(0.3) {
            if let Ok(core) = check_instance(&inst, set, system) {
                let free: Vec<Var> = core.fvar().into_iter().collect();
                if !free.is_empty() {
                    inst.foralls.push(free[self.rng.gen_range(0..free.len())]);
                }
            }
        }
        inst
    }

    /// Random valid derivation: hypothesis lines from `hyps`, random axiom
    /// and AN lines, weakening tautologies, and MP steps wherever an
    /// implication line has a matching antecedent line.
    pub fn derivation(
        &mut self,
        set: AxiomSet,
        system: System,
        hyps: &[Formula],
        steps: usize,
    ) -> Derivation {
        let mut d = Derivation::new(system, set, hyps.to_vec());
        for j in 0..hyps.len() {
            d.lines.push(Line {
                formula: hyps[j].clone(),
                just: Justification::Hyp(j),
            });
        }
        while d.lines.len() < hyps.len() + steps {
            match self.rng.gen_range(0..4) {
                0 | 1 => {
                    // fresh axiom or AN line
                    let inst = self.instance(set, system);
                    if let Ok(f) = check_instance(&inst, set, system) {
                        if self.rng.gen_bool(0.25) {
                            d.lines.push(Line {
                                formula: Formula::Nec(Box::new(f)),
                                just: Justification::An(inst),
                            });
                        } else {
                            d.lines.push(Line {
                                formula: f,
                                just: Justification::Axiom(inst),
                            });
                        }
                    }
                }
                2 => {
                    // weaken a random line into an implication via a
                    // tautology, enabling later MP
                    if d.lines.is_empty() {
                        continue;
                    }
                    let i = self.rng.gen_range(0..d.lines.len());
                    let chi = d.lines[i].formula.clone();
                    let extra = self.formula(2, 3, Fragment::Full);
                    let taut = Formula::Imp(
                        Box::new(chi.clone()),
                        Box::new(Formula::Imp(Box::new(extra.clone()), Box::new(chi.clone()))),
                    );
                    let t = d.lines.len();
                    d.lines.push(Line {
                        formula: taut,
                        just: Justification::Axiom(AxiomInstance::plain(Scheme::Taut {
                            formula: Formula::Imp(
                                Box::new(chi.clone()),
                                Box::new(Formula::Imp(Box::new(extra.clone()), Box::new(chi.clone()))),
                            ),
                        })),
                    });
                    d.lines.push(Line {
                        formula: Formula::Imp(Box::new(extra), Box::new(chi)),
                        just: Justification::Mp(i, t),
                    });
                }
                _ => {
                    // find an MP-ready pair
                    let mut pairs = Vec::new();
                    for (k, line) in d.lines.iter().enumerate() {
                        if let Formula::Imp(a, b) = &line.formula {
                            for (j, other) in d.lines.iter().enumerate().take(k.max(1)) {
                                if j != k && other.formula == **a {
                                    pairs.push((j, k, (**b).clone()));
                                }
                            }
                        }
                    }
                    if let Some((j, k, b)) = pairs
                        .get(self.rng.gen_range(0..pairs.len().max(1)))
                        .cloned()
                    {
                        d.lines.push(Line {
                            formula: b,
                            just: Justification::Mp(j, k),
                        });
                    }
                }
            }
        }
        d
    }
}
