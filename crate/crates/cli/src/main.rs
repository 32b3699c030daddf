//! Batch front end for the nfk library.
//!
//! Every subcommand reads plain files (or `-` for stdin) and writes
//! line-delimited JSON records tagged with a `kind` field; `--format
//! human` renders the same records readably.  Exit codes: 0 for success
//! or a passing report, 1 for a failing report, 2 for usage errors and
//! malformed inputs.

use std::fs;
use std::io::Read;
use std::process::ExitCode;
use std::sync::mpsc;
use std::thread;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use nfk_core::calculus::{check_derivation, constant, AxiomSet, Derivation, System};
use nfk_core::enumerate::{enumerate_models, Constraints};
use nfk_core::generate::{rigidity, strict_identity_library};
use nfk_core::kripke::{
    extension, ksat, model_to_kripke, probe, validate_frame, world_to_model, KValuation,
    KripkeFrame,
};
use nfk_core::models::{
    check_admissible_simple, collapse_diagnostics, eval, validate_modal_model, Assignment,
    ModalModel,
};
use nfk_core::prealgebra::{
    filters, prealgebra_from_sci, sci_from_prealgebra, validate_prealgebra, validate_sci,
    PreAlgebra, SciModel,
};
use nfk_core::sample::Sampler;
use nfk_core::syntax::{analyze, parse, Fragment, Var};
use nfk_core::transform::{deduction, eliminate_constant, generalize, necessitate};

#[derive(Parser)]
#[command(name = "nfk", about = "Modal systems S3-S5 with propositional quantifiers and identity")]
struct Cli {
    /// Lewis system: 3, 4 or 5
    #[arg(long, global = true, default_value_t = 3)]
    system: u8,

    /// Axiom set
    #[arg(long, global = true, value_enum, default_value_t = AxiomsArg::Full)]
    axioms: AxiomsArg,

    /// Largest universe / frame size for enumeration and searches
    #[arg(long, global = true, default_value_t = 3)]
    nmax: usize,

    /// Formula depth for sampling
    #[arg(long, global = true, default_value_t = 3)]
    depth: u32,

    /// Free-variable arity bound for definable-function checks
    #[arg(long, global = true, default_value_t = 2)]
    arity: usize,

    /// Sample count for randomized checks
    #[arg(long, global = true, default_value_t = 500)]
    samples: usize,

    /// Random seed
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,

    /// Collapse permutation-isomorphic models during enumeration
    #[arg(long, global = true)]
    dedupe: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AxiomsArg {
    Full,
    Minus,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Human,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Parse formulas (one per line) and report their analysis
    Parse { input: String },
    /// Check a derivation file
    Check { input: String },
    /// Rewrite a derivation
    Transform {
        #[command(subcommand)]
        op: TransformOp,
    },
    /// Emit library derivations
    Generate {
        #[command(subcommand)]
        what: GenerateOp,
    },
    /// Algebraic models
    Model {
        #[command(subcommand)]
        op: ModelOp,
    },
    /// Boolean prealgebras and SCI-models
    Prealg {
        #[command(subcommand)]
        op: PrealgOp,
    },
    /// Relational frames
    Kripke {
        #[command(subcommand)]
        op: KripkeOp,
    },
}

#[derive(Subcommand)]
enum TransformOp {
    /// Discharge a hypothesis into an implication
    Deduction {
        input: String,
        /// Hypothesis index to discharge; defaults to the last one
        #[arg(long)]
        hyp: Option<usize>,
    },
    /// Prefix the conclusion with a quantifier
    Generalize {
        input: String,
        #[arg(long)]
        var: String,
    },
    /// Prefix the conclusion with necessity (S4/S5)
    Necessitate { input: String },
    /// Replace a constant by a fresh variable throughout
    Elimconst {
        input: String,
        #[arg(long)]
        constant: String,
        #[arg(long)]
        var: String,
    },
}

#[derive(Subcommand)]
enum GenerateOp {
    /// Derivation of the rigidity theorem for a pair of formulas
    Rigidity { phi: String, psi: String },
    /// The six strict-identity congruence derivations
    T740 {
        phi: String,
        psi: String,
        phi2: Option<String>,
        psi2: Option<String>,
    },
}

#[derive(Subcommand)]
enum ModelOp {
    Validate { input: String },
    /// Evaluate a formula, optionally under an assignment file
    Eval {
        input: String,
        formula: String,
        valuation: Option<String>,
    },
    /// Collapse diagnostics
    Collapse { input: String },
    /// Simple-model admissibility check
    Admissible { input: String },
    /// Stream valid models up to --nmax
    Enumerate {
        /// Keep only models with at least two necessary propositions
        #[arg(long)]
        nec2: bool,
        /// Keep only models that are not literally Boolean algebras
        #[arg(long)]
        non_boolean: bool,
        /// Enumerate non-normal models instead
        #[arg(long)]
        non_normal: bool,
    },
}

#[derive(Subcommand)]
enum PrealgOp {
    Validate { input: String },
    /// All filters, ultrafilters and the smallest filter
    Filters { input: String },
    /// Extend to an SCI-model over a chosen ultrafilter
    ToSci {
        input: String,
        #[arg(long, default_value_t = 0)]
        ultra: usize,
    },
    /// Recover the prealgebra underlying an SCI-model
    FromSci { input: String },
}

#[derive(Subcommand)]
enum KripkeOp {
    Validate { input: String },
    /// Evaluate a formula over a frame
    Sat {
        input: String,
        formula: String,
        valuation: Option<String>,
        /// Restrict the answer to one world
        #[arg(long)]
        world: Option<String>,
    },
    /// Distill the model seen from one world
    ToModel {
        input: String,
        #[arg(long)]
        world: String,
        valuation: Option<String>,
    },
    /// Build the ultrafilter frame of a model (S4/S5)
    FromModel { input: String },
    /// Compare a world/model pair on sampled formulas
    Agree { input: String },
    /// Search small frames for a countermodel
    Conserve { formula: String },
}

// ------------------------------------------------------------------ output

struct Out {
    format: FormatArg,
}

impl Out {
    fn emit(&self, kind: &str, value: Value) {
        let mut record = json!({ "kind": kind });
        if let (Value::Object(rec), Value::Object(body)) = (&mut record, value) {
            for (k, v) in body {
                rec.insert(k, v);
            }
        }
        let text = match self.format {
            FormatArg::Json => format!("{record}\n"),
            FormatArg::Human => {
                let mut buf = format!("{kind}:\n");
                for line in serde_json::to_string_pretty(&record).unwrap().lines() {
                    buf.push_str("  ");
                    buf.push_str(line);
                    buf.push('\n');
                }
                buf
            }
        };
        use std::io::Write;
        // a closed pipe (e.g. `| head`) is not an error worth reporting
        if std::io::stdout().write_all(text.as_bytes()).is_err() {
            std::process::exit(0);
        }
    }

    fn emit_ser<T: Serialize>(&self, kind: &str, value: &T) {
        self.emit(kind, serde_json::to_value(value).unwrap());
    }
}

// ------------------------------------------------------------------- input

fn read_input(path: &str) -> Result<String> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .context("reading stdin")?;
        Ok(buf)
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {path}"))
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &str) -> Result<T> {
    serde_json::from_str(&read_input(path)?).with_context(|| format!("parsing {path}"))
}

/// Structured output records carry their payload under a named field;
/// accept either such a record or the bare payload, so every emitted
/// record can be fed back in.
fn read_wrapped<T: serde::de::DeserializeOwned>(path: &str, field: &str) -> Result<T> {
    let text = read_input(path)?;
    let value: Value = serde_json::from_str(&text).with_context(|| format!("parsing {path}"))?;
    let body = value.get(field).cloned().unwrap_or(value);
    serde_json::from_value(body).with_context(|| format!("parsing {path}"))
}

fn read_derivation(path: &str) -> Result<Derivation> {
    read_wrapped(path, "derivation")
}

fn read_model(path: &str) -> Result<ModalModel> {
    read_wrapped(path, "model")
}

fn parse_system(raw: u8) -> Result<System> {
    Ok(match raw {
        3 => System::S3,
        4 => System::S4,
        5 => System::S5,
        other => bail!("unknown system {other}, expected 3, 4 or 5"),
    })
}

fn parse_var(raw: &str) -> Result<Var> {
    Var::parse(raw).ok_or_else(|| anyhow!("`{raw}` is not a variable (expected x0, x1, ...)"))
}

fn parse_formula(raw: &str) -> Result<nfk_core::syntax::Formula> {
    parse(raw).map_err(|e| anyhow!("parsing `{raw}`: {e}"))
}

/// Runs a search under the optional `NFK_BUDGET_MS` wall-clock cap.
fn with_budget<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> Result<T> {
    let Ok(raw) = std::env::var("NFK_BUDGET_MS") else {
        return Ok(f());
    };
    let ms: u64 = raw
        .parse()
        .map_err(|_| anyhow!("NFK_BUDGET_MS must be an integer, got `{raw}`"))?;
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        let _ = tx.send(f());
    });
    rx.recv_timeout(Duration::from_millis(ms))
        .map_err(|_| anyhow!("search exceeded the NFK_BUDGET_MS cap of {ms} ms"))
}

// --------------------------------------------------------------- dispatch

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = Out { format: cli.format };
    match run(&cli, &out) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli, out: &Out) -> Result<bool> {
    let system = parse_system(cli.system)?;
    let axioms = match cli.axioms {
        AxiomsArg::Full => AxiomSet::Full,
        AxiomsArg::Minus => AxiomSet::Minus,
    };
    match &cli.command {
        Command::Parse { input } => {
            let text = read_input(input)?;
            for line in text.lines() {
                let stripped = line.trim();
                if stripped.is_empty() || stripped.starts_with('#') {
                    continue;
                }
                let f = parse_formula(stripped)?;
                out.emit_ser("parse", &analyze(&f));
            }
            Ok(true)
        }
        Command::Check { input } => {
            let d = read_derivation(input)?;
            let report = check_derivation(&d);
            out.emit_ser("check", &report);
            Ok(report.ok)
        }
        Command::Transform { op } => {
            let d = match op {
                TransformOp::Deduction { input, hyp } => {
                    let d = read_derivation(input)?;
                    let i = hyp.unwrap_or(d.hypotheses.len().saturating_sub(1));
                    let phi = d
                        .hypotheses
                        .get(i)
                        .ok_or_else(|| anyhow!("no hypothesis at index {i}"))?
                        .clone();
                    deduction(&d, &phi)?
                }
                TransformOp::Generalize { input, var } => {
                    generalize(&read_derivation(input)?, parse_var(var)?)?
                }
                TransformOp::Necessitate { input } => necessitate(&read_derivation(input)?)?,
                TransformOp::Elimconst {
                    input,
                    constant: name,
                    var,
                } => eliminate_constant(&read_derivation(input)?, &constant(name), parse_var(var)?)?,
            };
            out.emit("derivation", json!({ "derivation": d }));
            Ok(true)
        }
        Command::Generate { what } => {
            let mut ds = match what {
                GenerateOp::Rigidity { phi, psi } => {
                    vec![rigidity(&parse_formula(phi)?, &parse_formula(psi)?)?]
                }
                GenerateOp::T740 {
                    phi,
                    psi,
                    phi2,
                    psi2,
                } => {
                    let f = parse_formula(phi)?;
                    let g = parse_formula(psi)?;
                    let f2 = match phi2 {
                        Some(s) => parse_formula(s)?,
                        None => f.clone(),
                    };
                    let g2 = match psi2 {
                        Some(s) => parse_formula(s)?,
                        None => g.clone(),
                    };
                    strict_identity_library(&f, &g, &f2, &g2)?
                }
            };
            // The library proofs use only S3 schemes, so they stay valid when
            // retagged for a stronger system.
            for d in &mut ds {
                d.system = system;
                out.emit("derivation", json!({ "derivation": d }));
            }
            Ok(true)
        }
        Command::Model { op } => run_model(cli, out, op, system, axioms),
        Command::Prealg { op } => run_prealg(out, op),
        Command::Kripke { op } => run_kripke(cli, out, op, system),
    }
}

fn run_model(
    cli: &Cli,
    out: &Out,
    op: &ModelOp,
    system: System,
    _axioms: AxiomSet,
) -> Result<bool> {
    match op {
        ModelOp::Validate { input } => {
            let m: ModalModel = read_model(input)?;
            let arity = cli.arity;
            let report = with_budget(move || validate_modal_model(&m, system, arity))?;
            out.emit_ser("model-report", &report);
            Ok(report.ok)
        }
        ModelOp::Eval {
            input,
            formula,
            valuation,
        } => {
            let m: ModalModel = read_model(input)?;
            let f = parse_formula(formula)?;
            let g: Assignment = match valuation {
                Some(path) => read_json(path)?,
                None => Assignment::new(),
            };
            let value = eval(&m, &g, &f)?;
            out.emit(
                "eval",
                json!({
                    "formula": f,
                    "value": value,
                    "true": m.true_set.contains(&value),
                    "nec": m.nec_set.contains(&value),
                }),
            );
            Ok(true)
        }
        ModelOp::Collapse { input } => {
            let m: ModalModel = read_model(input)?;
            let report = collapse_diagnostics(&m)?;
            out.emit_ser("collapse", &report);
            Ok(report.boolean_algebra && report.collapse_axiom)
        }
        ModelOp::Admissible { input } => {
            let m: ModalModel = read_model(input)?;
            let (depth, samples, seed) = (cli.depth, cli.samples, cli.seed);
            let report = with_budget(move || check_admissible_simple(&m, depth, samples, seed))??;
            out.emit_ser("admissible", &report);
            Ok(report.ok)
        }
        ModelOp::Enumerate {
            nec2,
            non_boolean,
            non_normal,
        } => {
            let constraints = Constraints {
                nec_at_least_two: *nec2,
                non_boolean: *non_boolean,
                non_normal: *non_normal,
            };
            let (nmax, dedupe) = (cli.nmax, cli.dedupe);
            let found = with_budget(move || enumerate_models(nmax, system, constraints, dedupe))??;
            let count = found.len();
            for m in &found {
                out.emit("model", json!({ "model": m }));
            }
            out.emit("enumerate", json!({ "count": count }));
            Ok(true)
        }
    }
}

fn run_prealg(out: &Out, op: &PrealgOp) -> Result<bool> {
    match op {
        PrealgOp::Validate { input } => {
            let p: PreAlgebra = read_wrapped(input, "prealgebra")?;
            let report = validate_prealgebra(&p);
            out.emit_ser("prealg-report", &report);
            Ok(report.ok)
        }
        PrealgOp::Filters { input } => {
            let p: PreAlgebra = read_wrapped(input, "prealgebra")?;
            let fl = filters(&p)?;
            out.emit(
                "filters",
                json!({
                    "all": fl.all,
                    "ultra": fl.ultra,
                    "smallest": fl.smallest,
                }),
            );
            Ok(true)
        }
        PrealgOp::ToSci { input, ultra } => {
            let p: PreAlgebra = read_wrapped(input, "prealgebra")?;
            let s = sci_from_prealgebra(&p, *ultra, None)?;
            out.emit("sci", json!({ "sci": s }));
            Ok(true)
        }
        PrealgOp::FromSci { input } => {
            let s: SciModel = read_wrapped(input, "sci")?;
            let report = validate_sci(&s);
            if !report.ok {
                out.emit_ser("sci-report", &report);
                return Ok(false);
            }
            let (p, smallest) = prealgebra_from_sci(&s)?;
            out.emit(
                "prealg",
                json!({ "prealgebra": p, "smallest": smallest }),
            );
            Ok(true)
        }
    }
}

fn run_kripke(cli: &Cli, out: &Out, op: &KripkeOp, system: System) -> Result<bool> {
    match op {
        KripkeOp::Validate { input } => {
            let fr: KripkeFrame = read_wrapped(input, "frame")?;
            let report = validate_frame(&fr);
            out.emit_ser("frame-report", &report);
            Ok(report.ok)
        }
        KripkeOp::Sat {
            input,
            formula,
            valuation,
            world,
        } => {
            let fr: KripkeFrame = read_wrapped(input, "frame")?;
            let f = parse_formula(formula)?;
            let g: KValuation = match valuation {
                Some(path) => read_json(path)?,
                None => KValuation::default(),
            };
            match world {
                Some(name) => {
                    let wi = world_index(&fr, name)?;
                    let holds = ksat(&fr, &g, wi, &f)?;
                    out.emit("sat", json!({ "formula": f, "world": name, "holds": holds }));
                }
                None => {
                    let e = extension(&fr, &g, &f)?;
                    let holding: Vec<&String> = (0..fr.worlds.len())
                        .filter(|&i| e & (1 << i) != 0)
                        .map(|i| &fr.worlds[i])
                        .collect();
                    out.emit("sat", json!({ "formula": f, "worlds": holding }));
                }
            }
            Ok(true)
        }
        KripkeOp::ToModel {
            input,
            world,
            valuation,
        } => {
            let fr: KripkeFrame = read_wrapped(input, "frame")?;
            let g: KValuation = match valuation {
                Some(path) => read_json(path)?,
                None => KValuation::default(),
            };
            let wi = world_index(&fr, world)?;
            let wm = world_to_model(&fr, &g, wi)?;
            out.emit(
                "pair",
                json!({
                    "frame": fr,
                    "valuation": g,
                    "world": world,
                    "model": wm.model,
                    "assignment": wm.assignment,
                }),
            );
            Ok(true)
        }
        KripkeOp::FromModel { input } => {
            let m: ModalModel = read_model(input)?;
            let cf = model_to_kripke(&m, system)?;
            out.emit(
                "frame",
                json!({
                    "frame": cf.frame,
                    "world_of_true": cf.frame.worlds[cf.world_of_true],
                    "prop_of": cf.prop_of,
                }),
            );
            Ok(true)
        }
        KripkeOp::Agree { input } => {
            let pair: Value = read_json(input)?;
            let field = |name: &str| {
                pair.get(name)
                    .cloned()
                    .ok_or_else(|| anyhow!("pair file is missing `{name}`"))
            };
            let fr: KripkeFrame = serde_json::from_value(field("frame")?)?;
            let g: KValuation = serde_json::from_value(field("valuation")?)?;
            let m: ModalModel = serde_json::from_value(field("model")?)?;
            let assignment: Assignment = serde_json::from_value(field("assignment")?)?;
            let world: String = serde_json::from_value(field("world")?)?;
            let wi = world_index(&fr, &world)?;
            let (depth, samples, seed) = (cli.depth, cli.samples, cli.seed);
            let discrepancies = with_budget(move || -> Result<Vec<String>> {
                let mut sampler = Sampler::new(seed);
                let mut bad = Vec::new();
                for _ in 0..samples {
                    let f = sampler.formula(depth, 2, Fragment::Full);
                    let algebraic = m.true_set.contains(&eval(&m, &assignment, &f)?);
                    let relational = ksat(&fr, &g, wi, &f)?;
                    if algebraic != relational {
                        bad.push(f.render());
                    }
                }
                Ok(bad)
            })??;
            let sampled = cli.samples;
            out.emit(
                "agree",
                json!({ "samples": sampled, "discrepancies": discrepancies }),
            );
            Ok(discrepancies.is_empty())
        }
        KripkeOp::Conserve { formula } => {
            let f = parse_formula(formula)?;
            let nmax = cli.nmax;
            let outcome = with_budget(move || probe(&f, system, nmax))??;
            let countermodel = outcome.countermodel.map(|(fr, world, g)| {
                json!({
                    "frame": fr.clone(),
                    "world": fr.worlds[world],
                    "valuation": g,
                })
            });
            out.emit(
                "probe",
                json!({
                    "frames_checked": outcome.frames_checked,
                    "countermodel": countermodel,
                }),
            );
            Ok(true)
        }
    }
}

fn world_index(fr: &KripkeFrame, name: &str) -> Result<usize> {
    fr.worlds
        .iter()
        .position(|w| w == name)
        .ok_or_else(|| anyhow!("unknown world `{name}`"))
}
