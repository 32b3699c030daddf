//! Python bindings.  Structured values (derivations, models, frames,
//! reports) cross the boundary as JSON strings in the same shapes the CLI
//! reads and writes; formulas cross as concrete syntax.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use nfk_core::calculus::{self, AxiomSet, Derivation, System};
use nfk_core::enumerate;
use nfk_core::kripke::{self, KValuation, KripkeFrame};
use nfk_core::models::{self, Assignment, ModalModel};
use nfk_core::prealgebra::{self, PreAlgebra, SciModel};
use nfk_core::subst;
use nfk_core::syntax::{self, Formula, Var};
use nfk_core::transform;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_formula(src: &str) -> PyResult<Formula> {
    syntax::parse(src).map_err(err)
}

fn parse_var(src: &str) -> PyResult<Var> {
    Var::parse(src).ok_or_else(|| err(format!("not a variable: `{src}`")))
}

fn parse_system(m: u8) -> PyResult<System> {
    match m {
        3 => Ok(System::S3),
        4 => Ok(System::S4),
        5 => Ok(System::S5),
        _ => Err(err("system must be 3, 4 or 5")),
    }
}

fn from_json<T: serde::de::DeserializeOwned>(src: &str) -> PyResult<T> {
    serde_json::from_str(src).map_err(err)
}

fn to_json<T: serde::Serialize>(v: &T) -> PyResult<String> {
    serde_json::to_string(v).map_err(err)
}

/// Parse a formula and return its analysis (rendered form, variables,
/// constants, quantifier rank, depth, fragment) as JSON.
#[pyfunction]
fn analyze(formula: &str) -> PyResult<String> {
    to_json(&syntax::analyze(&parse_formula(formula)?))
}

/// Canonical rendering of a parsed formula.
#[pyfunction]
fn render(formula: &str) -> PyResult<String> {
    Ok(parse_formula(formula)?.render())
}

/// Alpha-equivalence of two formulas.
#[pyfunction]
fn alpha_eq(a: &str, b: &str) -> PyResult<bool> {
    Ok(subst::alpha_eq(&parse_formula(a)?, &parse_formula(b)?))
}

/// `formula[var := image]` with the capture-free renaming rule.
#[pyfunction]
fn substitute(formula: &str, var: &str, image: &str) -> PyResult<String> {
    let f = parse_formula(formula)?;
    let x = parse_var(var)?;
    let g = parse_formula(image)?;
    Ok(subst::apply(&f, &subst::Substitution::single(x, g)).render())
}

/// Check a derivation (JSON) and return the report as JSON.
#[pyfunction]
fn check_derivation(derivation: &str) -> PyResult<String> {
    let d: Derivation = from_json(derivation)?;
    to_json(&calculus::check_derivation(&d))
}

/// Try to recognize a formula as an axiom instance; returns the instance
/// as JSON, or None.
#[pyfunction]
#[pyo3(signature = (formula, system=3, minus=false))]
fn recognize_axiom(formula: &str, system: u8, minus: bool) -> PyResult<Option<String>> {
    let f = parse_formula(formula)?;
    let set = if minus { AxiomSet::Minus } else { AxiomSet::Full };
    match calculus::recognize_axiom(&f, set, parse_system(system)?) {
        Some(inst) => Ok(Some(to_json(&inst)?)),
        None => Ok(None),
    }
}

/// Derivation of `(phi == psi) -> [](phi == psi)` as JSON.
#[pyfunction]
fn rigidity(phi: &str, psi: &str) -> PyResult<String> {
    let d = nfk_core::generate::rigidity(&parse_formula(phi)?, &parse_formula(psi)?)
        .map_err(err)?;
    to_json(&d)
}

/// The six strict-equivalence congruence derivations as a JSON list.
#[pyfunction]
fn congruence_library(phi: &str, psi: &str, phi2: &str, psi2: &str) -> PyResult<String> {
    let lib = nfk_core::generate::strict_identity_library(
        &parse_formula(phi)?,
        &parse_formula(psi)?,
        &parse_formula(phi2)?,
        &parse_formula(psi2)?,
    )
    .map_err(err)?;
    to_json(&lib)
}

/// Deduction theorem: discharge the hypothesis `phi` of a derivation.
#[pyfunction]
fn deduction(derivation: &str, phi: &str) -> PyResult<String> {
    let d: Derivation = from_json(derivation)?;
    to_json(&transform::deduction(&d, &parse_formula(phi)?).map_err(err)?)
}

/// Generalization over a variable free in the conclusion.
#[pyfunction]
fn generalize(derivation: &str, var: &str) -> PyResult<String> {
    let d: Derivation = from_json(derivation)?;
    to_json(&transform::generalize(&d, parse_var(var)?).map_err(err)?)
}

/// Necessitation (systems 4 and 5 only).
#[pyfunction]
fn necessitate(derivation: &str) -> PyResult<String> {
    let d: Derivation = from_json(derivation)?;
    to_json(&transform::necessitate(&d).map_err(err)?)
}

/// Replace a named constant by a fresh variable throughout a derivation.
#[pyfunction]
fn eliminate_constant(derivation: &str, name: &str, var: &str) -> PyResult<String> {
    let d: Derivation = from_json(derivation)?;
    let c = calculus::constant(name);
    to_json(&transform::eliminate_constant(&d, &c, parse_var(var)?).map_err(err)?)
}

fn parse_assignment(m: &ModalModel, valuation: Option<&str>) -> PyResult<Assignment> {
    match valuation {
        None => Ok(Assignment::new()),
        Some(src) => {
            let map: std::collections::BTreeMap<String, usize> = from_json(src)?;
            let mut g = Assignment::new();
            for (k, v) in map {
                if v >= m.n {
                    return Err(err(format!("element {v} out of range")));
                }
                g = g.bind(parse_var(&k)?, v);
            }
            Ok(g)
        }
    }
}

/// Validate a model (JSON) against a system; returns the report as JSON.
#[pyfunction]
#[pyo3(signature = (model, system=3, arity=2))]
fn validate_model(model: &str, system: u8, arity: usize) -> PyResult<String> {
    let m: ModalModel = from_json(model)?;
    to_json(&models::validate_modal_model(&m, parse_system(system)?, arity))
}

/// Evaluate a formula in a model under a `{"x0": element, ...}` valuation;
/// returns the element index.
#[pyfunction]
#[pyo3(signature = (model, formula, valuation=None))]
fn eval_formula(model: &str, formula: &str, valuation: Option<&str>) -> PyResult<usize> {
    let m: ModalModel = from_json(model)?;
    let g = parse_assignment(&m, valuation)?;
    models::eval(&m, &g, &parse_formula(formula)?).map_err(err)
}

/// Collapse diagnostics of a normal model as JSON.
#[pyfunction]
fn collapse(model: &str) -> PyResult<String> {
    let m: ModalModel = from_json(model)?;
    to_json(&models::collapse_diagnostics(&m).map_err(err)?)
}

/// Admissibility of sampled reduced-set axiom instances, as JSON.
#[pyfunction]
#[pyo3(signature = (model, depth=3, samples=500, seed=0))]
fn check_admissible(model: &str, depth: u32, samples: usize, seed: u64) -> PyResult<String> {
    let m: ModalModel = from_json(model)?;
    to_json(&models::check_admissible_simple(&m, depth, samples, seed).map_err(err)?)
}

/// Enumerate valid models up to size `nmax`; returns a JSON list.
#[pyfunction]
#[pyo3(signature = (nmax=3, system=3, nec2=false, non_normal=false, dedupe=false))]
fn enumerate_models(
    nmax: usize,
    system: u8,
    nec2: bool,
    non_normal: bool,
    dedupe: bool,
) -> PyResult<String> {
    let constraints = enumerate::Constraints {
        nec_at_least_two: nec2,
        non_boolean: false,
        non_normal,
    };
    let out = enumerate::enumerate_models(nmax, parse_system(system)?, constraints, dedupe)
        .map_err(err)?;
    to_json(&out)
}

/// Validate a prealgebra (JSON); returns the report as JSON.
#[pyfunction]
fn validate_prealgebra(prealgebra: &str) -> PyResult<String> {
    let p: PreAlgebra = from_json(prealgebra)?;
    to_json(&prealgebra::validate_prealgebra(&p))
}

/// All filters, the ultrafilters and the smallest filter, as JSON.
#[pyfunction]
fn filters(prealgebra: &str) -> PyResult<String> {
    let p: PreAlgebra = from_json(prealgebra)?;
    to_json(&prealgebra::filters(&p).map_err(err)?)
}

/// Build the SCI model over a chosen ultrafilter, as JSON.
#[pyfunction]
#[pyo3(signature = (prealgebra, ultra=0))]
fn sci_from_prealgebra(prealgebra: &str, ultra: usize) -> PyResult<String> {
    let p: PreAlgebra = from_json(prealgebra)?;
    to_json(&prealgebra::sci_from_prealgebra(&p, ultra, None).map_err(err)?)
}

/// Recover the prealgebra and its smallest filter from an SCI model;
/// returns `[prealgebra, filter]` as JSON.
#[pyfunction]
fn prealgebra_from_sci(sci: &str) -> PyResult<String> {
    let s: SciModel = from_json(sci)?;
    to_json(&prealgebra::prealgebra_from_sci(&s).map_err(err)?)
}

fn parse_valuation(src: Option<&str>) -> PyResult<KValuation> {
    match src {
        None => Ok(KValuation::default()),
        Some(text) => from_json(text),
    }
}

/// Validate a frame (JSON); returns the report as JSON.
#[pyfunction]
fn validate_frame(frame: &str) -> PyResult<String> {
    let fr: KripkeFrame = from_json(frame)?;
    to_json(&kripke::validate_frame(&fr))
}

/// Worlds (by name) where a formula holds under a valuation, as JSON.
#[pyfunction]
#[pyo3(signature = (frame, formula, valuation=None))]
fn satisfying_worlds(frame: &str, formula: &str, valuation: Option<&str>) -> PyResult<String> {
    let fr: KripkeFrame = from_json(frame)?;
    let val = parse_valuation(valuation)?;
    let f = parse_formula(formula)?;
    let mut worlds = Vec::new();
    for w in 0..fr.worlds.len() {
        if kripke::ksat(&fr, &val, w, &f).map_err(err)? {
            worlds.push(fr.worlds[w].clone());
        }
    }
    to_json(&worlds)
}

/// Search all frames with at most `wmax` worlds for a normal-world
/// countermodel; returns the probe outcome as JSON.
#[pyfunction]
#[pyo3(signature = (formula, system=3, wmax=3))]
fn probe(formula: &str, system: u8, wmax: usize) -> PyResult<String> {
    let out = kripke::probe(&parse_formula(formula)?, parse_system(system)?, wmax)
        .map_err(err)?;
    let (frame, world, valuation) = match out.countermodel {
        Some((fr, w, v)) => (Some(fr), Some(w), Some(v)),
        None => (None, None, None),
    };
    to_json(&serde_json::json!({
        "frames_checked": out.frames_checked,
        "frame": frame,
        "world": world,
        "valuation": valuation,
    }))
}

#[pymodule]
fn nfk(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(render, m)?)?;
    m.add_function(wrap_pyfunction!(alpha_eq, m)?)?;
    m.add_function(wrap_pyfunction!(substitute, m)?)?;
    m.add_function(wrap_pyfunction!(check_derivation, m)?)?;
    m.add_function(wrap_pyfunction!(recognize_axiom, m)?)?;
    m.add_function(wrap_pyfunction!(rigidity, m)?)?;
    m.add_function(wrap_pyfunction!(congruence_library, m)?)?;
    m.add_function(wrap_pyfunction!(deduction, m)?)?;
    m.add_function(wrap_pyfunction!(generalize, m)?)?;
    m.add_function(wrap_pyfunction!(necessitate, m)?)?;
    m.add_function(wrap_pyfunction!(eliminate_constant, m)?)?;
    m.add_function(wrap_pyfunction!(validate_model, m)?)?;
    m.add_function(wrap_pyfunction!(eval_formula, m)?)?;
    m.add_function(wrap_pyfunction!(collapse, m)?)?;
    m.add_function(wrap_pyfunction!(check_admissible, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_models, m)?)?;
    m.add_function(wrap_pyfunction!(validate_prealgebra, m)?)?;
    m.add_function(wrap_pyfunction!(filters, m)?)?;
    m.add_function(wrap_pyfunction!(sci_from_prealgebra, m)?)?;
    m.add_function(wrap_pyfunction!(prealgebra_from_sci, m)?)?;
    m.add_function(wrap_pyfunction!(validate_frame, m)?)?;
    m.add_function(wrap_pyfunction!(satisfying_worlds, m)?)?;
    m.add_function(wrap_pyfunction!(probe, m)?)?;
    Ok(())
}
