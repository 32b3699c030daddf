#!/usr/bin/env python3
"""Smoke test for the nfk Python bindings.

Builds (or reuses) the compiled extension from crates/py, stages it next to
this script as ``nfk.so``, and pushes a handful of round trips through every
corner of the API: parsing, proof generation and checking, the transformers,
model enumeration and validation, the prealgebra/SCI round trip, and the
Kripke probe.  Exits non-zero on the first failed check.
"""

import json
import os
import shutil
import subprocess
import sys

HERE = os.path.dirname(os.path.abspath(__file__))
ROOT = os.path.dirname(HERE)


def stage_extension():
    """Make sure python/nfk.so exists and is importable."""
    candidates = [
        os.path.join(ROOT, "target", "debug", "libnfk.so"),
        os.path.join(ROOT, "target", "release", "libnfk.so"),
    ]
    src = next((c for c in candidates if os.path.exists(c)), None)
    if src is None:
        subprocess.run(
            ["cargo", "build", "-p", "nfk-py"], cwd=ROOT, check=True
        )
        src = candidates[0]
    dst = os.path.join(HERE, "nfk.so")
    if not os.path.exists(dst) or os.path.getmtime(src) > os.path.getmtime(dst):
        shutil.copy2(src, dst)
    sys.path.insert(0, HERE)


def check(label, cond):
    status = "ok" if cond else "FAIL"
    print(f"{status:4}  {label}")
    if not cond:
        sys.exit(1)


def main():
    stage_extension()
    import nfk

    # --- syntax -----------------------------------------------------------
    a = json.loads(nfk.analyze("forall x0. []x0 -> x0"))
    check(
        "analyze reports rank and fragment",
        a["qrank"] == 1 and a["fragment"] == "full" and a["fvar"] == [],
    )
    rendered = nfk.render("~(x0 == x1)")
    check("render round-trips through analyze", json.loads(nfk.analyze(rendered))["rendered"] == rendered)
    check("alpha_eq identifies renamed binders", nfk.alpha_eq("forall x0. x0", "forall x1. x1"))
    sub = nfk.substitute("x0 | []x1", "x0", "~x2")
    check("substitute rewrites free occurrences", json.loads(nfk.analyze(sub))["fvar"] == ["x1", "x2"])

    # --- calculus ---------------------------------------------------------
    d = nfk.rigidity("x0 & x1", "[]x2")
    report = json.loads(nfk.check_derivation(d))
    check("rigidity derivation checks", report["ok"])
    lines = json.loads(d)["lines"]
    check(
        "rigidity concludes the transfer implication",
        json.loads(nfk.analyze(lines[-1]["formula"]))["qrank"] == 0,
    )
    lib = json.loads(nfk.congruence_library("x0", "x1", "x2", "x3"))
    check(
        "congruence library checks end to end",
        len(lib) == 6
        and all(json.loads(nfk.check_derivation(json.dumps(e)))["ok"] for e in lib),
    )
    check(
        "recognize_axiom classifies a T instance",
        nfk.recognize_axiom("[](x0 -> x1) -> (x0 -> x1)") is not None,
    )

    # transformers: deduction discharges a hypothesis, necessitation needs S4+
    hypd = json.dumps({
        "system": 4, "axiom_set": "full", "hypotheses": ["x0"],
        "lines": [{"formula": "x0", "just": {"hyp": 0}}],
    })
    ded = json.loads(nfk.deduction(hypd, "x0"))
    check(
        "deduction discharges the hypothesis",
        ded["hypotheses"] == []
        and ded["lines"][-1]["formula"] == "x0 -> x0"
        and json.loads(nfk.check_derivation(json.dumps(ded)))["ok"],
    )
    s4 = json.loads(nfk.rigidity("x0", "x1"))
    s4["system"] = 4
    nec = json.loads(nfk.necessitate(json.dumps(s4)))
    check(
        "necessitation in S4 keeps the proof valid",
        nec["lines"][-1]["formula"].startswith("[]")
        and json.loads(nfk.check_derivation(json.dumps(nec)))["ok"],
    )

    # --- models -----------------------------------------------------------
    models = json.loads(nfk.enumerate_models(3, 3, True, False, True))
    check("enumeration finds three-element models", len(models) > 0)
    m = json.dumps(models[0])
    check("enumerated model validates", json.loads(nfk.validate_model(m, 3, 2))["ok"])
    col = json.loads(nfk.collapse(m))
    check("collapse diagnostics cover the axiom", "collapse_axiom" in col)
    check("admissibility sampler accepts the model", json.loads(nfk.check_admissible(m, 3, 200, 7))["ok"])
    v = nfk.eval_formula(m, "x0 == x0", None)
    check("identity self-applied is necessary", v in models[0]["nec"])

    # --- prealgebras ------------------------------------------------------
    p = {
        "n": 2, "bot": 0, "top": 1,
        "neg": [1, 0],
        "and": [[0, 0], [0, 1]],
        "or": [[0, 1], [1, 1]],
        "imp": [[1, 1], [0, 1]],
        "leq": [[1, 1], [0, 1]],
    }
    pj = json.dumps(p)
    check("two-element prealgebra validates", json.loads(nfk.validate_prealgebra(pj))["ok"])
    fil = json.loads(nfk.filters(pj))
    check("its only ultrafilter is {top}", fil["ultra"] == [[1]])
    sci = nfk.sci_from_prealgebra(pj, 0)
    back, filt = json.loads(nfk.prealgebra_from_sci(sci))
    check("SCI round trip restores the prealgebra", back == p and filt == [1])

    # --- kripke -----------------------------------------------------------
    probe3 = json.loads(nfk.probe("[]x0 -> [][]x0", 3, 2))
    probe4 = json.loads(nfk.probe("[]x0 -> [][]x0", 4, 3))
    check("probe refutes 4 in S3", probe3["frame"] is not None)
    check("probe confirms 4 in S4", probe4["frame"] is None)
    fr = json.dumps(probe3["frame"])
    check("countermodel frame validates", json.loads(nfk.validate_frame(fr))["ok"])
    worlds = json.loads(nfk.satisfying_worlds(fr, "[]x0 -> [][]x0", json.dumps(probe3["valuation"])))
    check("countermodel world really refutes", probe3["world"] not in worlds)

    print("all checks passed")


if __name__ == "__main__":
    main()
