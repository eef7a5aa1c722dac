"""Command-line front end: run scenario files and list what they can use.

Usage::

    lietower run <scenario.yaml> [--out report.json] [--seed N] [--samples N]
    lietower list

Exit status is 0 when every command passes, 1 when any command fails or
errors, and 2 for schema or I/O problems.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from .algebroid import Algebroid, verify_anchor_homomorphism, verify_leibniz
from .calculus import AlgebroidForm, exterior_derivative
from .checks import CheckReport, Sampling, merge_reports, random_polynomial, sup_norm
from .constructions import harmonic_oscillator_N, jacobi_residual, nijenhuis_torsion
from .dynamics import (Semispray, admissibility_residual, homogeneity_check, integrate,
                       make_semispray, tower_semispray)
from .expr import parse
from .fields import VectorField, coordinate_field
from .jets import PDESystem1, contact_on_graph_residual, involutivity_check, prolong_bracket_check
from .scenario import Scenario, SchemaError, list_constructors, load_scenario
from .tower import (AlgebroidTower, CoherenceError, ProjectiveSystem, Thread, alpha_compatibility,
                    h0_membership, limit_bracket, limit_section, validate_thread, verify_system)

__all__ = ["main", "run_scenario", "report_text", "strip_timing", "EXIT_PASS", "EXIT_FAIL",
           "EXIT_SCHEMA"]

EXIT_PASS, EXIT_FAIL, EXIT_SCHEMA = 0, 1, 2
WORST = 5


def _number(spec, key, default=...):
    """A float, or an expression string in the constant ``pi``."""
    value = spec.get(key, (int, float, str), default=default)
    if isinstance(value, str):
        try:
            return _eval_const(value)
        except Exception as err:
            raise spec.error(f"not a number: {err}", key) from None
    return float(value)


def _eval_const(text: str) -> float:
    from .expr import evaluate

    return float(evaluate(parse(text, ("pi",)), {"pi": math.pi}))


def _vector(spec, key, default=...):
    value = spec.get(key, list, default=default)
    if value is default:
        return value
    try:
        return np.array([_eval_const(v) if isinstance(v, str) else float(v) for v in value])
    except Exception as err:
        raise spec.error(f"not a numeric vector: {err}", key) from None


def _obj(spec, objs, key, kind):
    from .scenario import _ref

    return _ref(spec, objs, key, kind)


# ---------------------------------------------------------------------------
# operations: each returns (checks, consistency checks, details)


def _op_axioms(cmd, scen, rng):
    A = _obj(cmd.spec, scen.objects, "algebroid", Algebroid)
    n_sets = cmd.spec.get("sections", int, default=3)
    pts = scen.sampling.points(A.base_dim, salt=cmd.index)
    names = A.chart.names
    parts = []
    for _ in range(n_sets):
        s1, s2, s3 = (A.section([random_polynomial(names, rng) for _ in range(A.fiber_dim)])
                      for _ in range(3))
        g = random_polynomial(names, rng)
        parts += [verify_anchor_homomorphism(A, s1, s2, pts, cmd.tol),
                  verify_leibniz(A, s1, s2, g, pts, cmd.tol),
                  jacobi_residual(A, s1, s2, s3, pts, cmd.tol)]
    by_name = {}
    for r in parts:
        by_name.setdefault(r.name, []).append(r)
    return [merge_reports(k, v, cmd.tol) for k, v in by_name.items()], [], {}


def _op_d_squared(cmd, scen, rng):
    A = _obj(cmd.spec, scen.objects, "algebroid", Algebroid)
    count = cmd.spec.get("forms", int, default=20)
    pts = scen.sampling.points(A.base_dim, salt=cmd.index)
    names = A.chart.names
    res = np.zeros(len(pts))
    for k in range(count):
        if k % 2 == 0:
            omega = AlgebroidForm.scalar(A, random_polynomial(names, rng))
        else:
            omega = AlgebroidForm(A, 1, [random_polynomial(names, rng) for _ in range(A.fiber_dim)])
        dd = exterior_derivative(A, exterior_derivative(A, omega))
        if dd.indices:
            res = np.maximum(res, sup_norm(dd.evaluate(pts)))
    return [CheckReport("d squared", pts, res, cmd.tol)], [], {"forms": count}


def _op_verify_system(cmd, scen, rng):
    T = _obj(cmd.spec, scen.objects, "tower", AlgebroidTower)
    pairs = cmd.spec.get("pairs", int, default=3)
    morph = cmd.spec.get("morphisms", bool, default=False)
    faults = cmd.spec.get("scale_morphism", list, default=None)
    if faults is not None:
        if len(faults) != 2:
            raise cmd.spec.error("expected [level, factor]", "scale_morphism")
        T = T.scaled_morphism(faults[0], float(faults[1]))
    rep = verify_system(T, scen.sampling, cmd.tol, pairs=pairs, morphisms=morph)
    checks = [CheckReport(f"{e.kind} ({e.lower},{e.upper})", e.report.points, e.report.residuals,
                          e.report.tol) for e in rep.entries]
    return checks, [], {"levels": list(T.labels)}


def _op_alpha(cmd, scen, rng):
    T = _obj(cmd.spec, scen.objects, "tower", AlgebroidTower)
    return [alpha_compatibility(T, scen.sampling, cmd.tol)], [], {}


def _op_torsion(cmd, scen, rng):
    level = cmd.spec.get("level", int)
    N = harmonic_oscillator_N(level)
    pts = scen.sampling.points(N.chart.dim, salt=cmd.index)
    n = N.chart.dim
    res = np.zeros(len(pts))
    for a in range(n):
        for b in range(a + 1, n):
            T = nijenhuis_torsion(N, coordinate_field(N.chart, a), coordinate_field(N.chart, b))
            res = np.maximum(res, sup_norm(T(pts)))
    return [CheckReport("nijenhuis torsion", pts, res, cmd.tol)], [], {"level": level}


def _op_integrate(cmd, scen, rng):
    S = _obj(cmd.spec, scen.objects, "spray", Semispray)
    x0, e0 = _vector(cmd.spec, "x0"), _vector(cmd.spec, "e0")
    t_end, step = _number(cmd.spec, "t_end"), _number(cmd.spec, "step")
    curve = integrate(S, x0, e0, t_end, step)
    checks = []
    adm_tol = _number(cmd.spec, "admissibility_tol", default=10.0 * step ** 2)
    if len(curve) >= 3:
        checks.append(admissibility_residual(S.algebroid, curve, adm_tol))
    xb, xf = _vector(cmd.spec, "expect_base", None), _vector(cmd.spec, "expect_fiber", None)
    if xb is not None or xf is not None:
        got = np.concatenate([curve.base[-1] if xb is not None else [], curve.fiber[-1] if xf is not None else []])
        want = np.concatenate([xb if xb is not None else [], xf if xf is not None else []])
        checks.append(CheckReport("endpoint", np.array([[t_end]]), np.array([np.max(np.abs(got - want))]), cmd.tol))
    details = {"nodes": len(curve), "end_base": curve.base[-1].tolist(), "end_fiber": curve.fiber[-1].tolist()}
    return checks, [], details


def _op_homogeneity(cmd, scen, rng):
    S = _obj(cmd.spec, scen.objects, "spray", Semispray)
    lambdas = [float(v) for v in _vector(cmd.spec, "lambdas")]
    pts = scen.sampling.points(S.chart.dim, salt=cmd.index)
    return [homogeneity_check(S, lambdas, pts, cmd.tol)], [], {"lambdas": lambdas}


def _op_tower_spray(cmd, scen, rng):
    T = _obj(cmd.spec, scen.objects, "tower", AlgebroidTower)
    xi = cmd.spec.get("xi", (list, str), default="zero")
    if xi == "zero":
        xi = [["0"] * A.fiber_dim for A in T.algebroids]
    if not isinstance(xi, list) or len(xi) != len(T.algebroids):
        raise cmd.spec.error("one acceleration list per level (or 'zero')", "xi")
    sprays = [make_semispray(A, [str(v) for v in x]) for A, x in zip(T.algebroids, xi)]
    coh_tol = _number(cmd.spec, "coherence_tol", default=1e-8)
    try:
        L = tower_semispray(T, sprays, scen.sampling, cmd.tol)
    except ValueError as err:
        rep = getattr(err, "report", None)
        if rep is None:
            raise
        return [rep], [], {"rejected": str(err)}
    checks = [CheckReport(f"spray compatibility ({i},{j})", r.points, r.residuals, r.tol)
              for (i, j), r in L.report.items()]
    if "x_top" in cmd.spec.data:
        curves = L.integrate(_vector(cmd.spec, "x_top"), _vector(cmd.spec, "e_top"),
                             _number(cmd.spec, "t_end"), _number(cmd.spec, "step"))
        res = L.coherence_residual(curves)
        checks.append(CheckReport("curve coherence", np.zeros((1, 1)), np.array([res]), coh_tol))
    return checks, [], {}


def _op_integrability(cmd, scen, rng):
    S = _obj(cmd.spec, scen.objects, "system", PDESystem1)
    pts = scen.sampling.points(3, salt=cmd.index)
    rep = involutivity_check(S, pts, cmd.tol)
    agree_tol = _number(cmd.spec, "agreement_tol", default=1e-12)
    agree = CheckReport("agreement with integrability expression", np.zeros((1, 1)),
                        np.array([max(rep.extra["agreement"], rep.extra["transverse"])]), agree_tol)
    return [rep], [agree], {}


def _field_ref(spec, objs, key):
    return _obj(spec, objs, key, VectorField)


def _op_prolong_bracket(cmd, scen, rng):
    V, W = _field_ref(cmd.spec, scen.objects, "first"), _field_ref(cmd.spec, scen.objects, "second")
    n = cmd.spec.get("order", int)
    from .jets import JetChart

    pts = scen.sampling.points(JetChart(n).dim, salt=cmd.index)
    return [prolong_bracket_check(V, W, n, pts, cmd.tol)], [], {"order": n}


def _op_contact(cmd, scen, rng):
    u = str(cmd.spec.get("u", (str, int, float)))
    n = cmd.spec.get("order", int)
    pts = scen.sampling.points(2, salt=cmd.index)
    return [contact_on_graph_residual(u, n, pts, cmd.tol)], [], {"order": n}


def _op_limit_bracket(cmd, scen, rng):
    T = _obj(cmd.spec, scen.objects, "tower", AlgebroidTower)
    fam = []
    raws = {key: cmd.spec.get(key, list) for key in ("first", "second")}
    for key, raw in raws.items():
        if len(raw) != len(T.algebroids):
            raise cmd.spec.error("one section per level", key)
        try:
            fam.append(limit_section(T, [[str(c) for c in s] for s in raw], scen.sampling, cmd.tol))
        except CoherenceError as err:
            return [err.report], [], {"rejected": str(err)}
    lb = limit_bracket(T, fam[0], fam[1])
    details = {"bracket": [[str(c) for c in s.components] for s in lb.sections]}
    return [CheckReport("bracket coherence", np.zeros((1, 1)), np.array([lb.max_residual]), cmd.tol)], [], details


def _op_h0(cmd, scen, rng):
    h = [np.array(m, dtype=float) for m in cmd.spec.get("h", list)]
    lam = [np.array(m, dtype=float) for m in cmd.spec.get("lam", list, default=[])]
    ok = h0_membership(h, lam)
    worst = 0.0
    for k in range(len(h)):
        comp = None
        for j in range(k + 1, len(h)):
            comp = lam[k] if comp is None else comp @ lam[j - 1]
            worst = max(worst, float(np.max(np.abs(comp @ h[j] - h[k] @ comp))))
    return [CheckReport("h0 membership", np.zeros((1, 1)), np.array([0.0 if ok else max(worst, 1.0)]), 0.0)], [], {}


def _op_thread(cmd, scen, rng):
    sys_ = _obj(cmd.spec, scen.objects, "system", ProjectiveSystem)
    pts = [np.array(p, dtype=float) for p in cmd.spec.get("points", list)]
    thread = Thread(tuple(pts))
    ok = validate_thread(sys_, thread, cmd.tol)
    worst = 0.0
    for b in range(len(pts)):
        for a in range(b):
            img = sys_.composite(sys_.labels[a], sys_.labels[b])(pts[b])
            worst = max(worst, float(np.max(np.abs(img - pts[a]))))
    return [CheckReport("thread", np.zeros((1, 1)), np.array([worst]), cmd.tol)], [], {"valid": ok}


OPS = {
    "alpha_compatibility": _op_alpha,
    "axioms": _op_axioms,
    "contact_on_graph": _op_contact,
    "d_squared": _op_d_squared,
    "h0_membership": _op_h0,
    "homogeneity": _op_homogeneity,
    "integrability": _op_integrability,
    "integrate": _op_integrate,
    "limit_bracket": _op_limit_bracket,
    "prolong_bracket": _op_prolong_bracket,
    "torsion": _op_torsion,
    "tower_spray": _op_tower_spray,
    "validate_thread": _op_thread,
    "verify_system": _op_verify_system,
}


# ---------------------------------------------------------------------------
# running and reporting


def _check_json(r: CheckReport) -> dict:
    return {"name": r.name, "passed": r.passed, "max_residual": r.max_residual, "tol": r.tol,
            "worst": [{"point": p, "residual": v} for p, v in r.worst(WORST)]}


def run_scenario(scen: Scenario) -> dict:
    """Execute every command in order and return the report document.

    Commands whose arguments are malformed raise :class:`SchemaError`;
    any other exception marks that command as an error and the run goes on.
    """
    start = time.perf_counter()
    results = []
    for cmd in scen.commands:
        t0 = time.perf_counter()
        rng = np.random.default_rng(scen.seed + 1000 * (cmd.index + 1))
        entry = {"index": cmd.index, "op": cmd.op, "expect": cmd.expect}
        try:
            checks, consistency, details = OPS[cmd.op](cmd, scen, rng)
            cmd.spec.finish()
        except SchemaError:
            raise
        except Exception as err:
            entry.update(status="error", verdict="error", error=f"{type(err).__name__}: {err}",
                         max_residual=None, checks=[], details={})
        else:
            verdict = "pass" if all(c.passed for c in checks) else "fail"
            consistent = all(c.passed for c in consistency)
            status = "pass" if verdict == cmd.expect and consistent else "fail"
            entry.update(status=status, verdict=verdict,
                         max_residual=max((c.max_residual for c in checks), default=0.0),
                         checks=[_check_json(c) for c in checks + consistency],
                         details=details)
        entry["elapsed_s"] = time.perf_counter() - t0
        results.append(entry)
    counts = {s: sum(1 for r in results if r["status"] == s) for s in ("pass", "fail", "error")}
    return {
        "scenario": scen.name,
        "seed": scen.seed,
        "sampling": {"count": scen.sampling.count, "low": scen.sampling.low, "high": scen.sampling.high},
        "tolerance": scen.tolerance,
        "commands": results,
        "summary": dict(counts, status="pass" if counts["fail"] + counts["error"] == 0 else "fail"),
        "elapsed_s": time.perf_counter() - start,
    }


def strip_timing(report: dict) -> dict:
    """Copy of a report without wall-clock fields (for reproducibility checks)."""
    if isinstance(report, dict):
        return {k: strip_timing(v) for k, v in report.items() if k != "elapsed_s"}
    if isinstance(report, list):
        return [strip_timing(v) for v in report]
    return report


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2) + "\n"


def report_text(report: dict) -> str:
    lines = [f"scenario {report['scenario']} (seed {report['seed']}, "
             f"{report['sampling']['count']} samples)"]
    for r in report["commands"]:
        head = f"[{r['index']}] {r['op']}: {r['status']}"
        if r["status"] == "error":
            lines.append(f"{head} ({r['error']})")
            continue
        tail = "" if r["expect"] == "pass" else f", expected {r['expect']}"
        lines.append(f"{head} (verdict {r['verdict']}{tail}, max residual {r['max_residual']!r})")
        for c in r["checks"]:
            lines.append(f"    {c['name']}: {'pass' if c['passed'] else 'FAIL'} "
                         f"max {c['max_residual']!r} tol {c['tol']!r}")
    s = report["summary"]
    lines.append(f"summary: {s['status']} ({s['pass']} pass, {s['fail']} fail, {s['error']} error)")
    return "\n".join(lines) + "\n"


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lietower", description="Run algebroid and tower checks from scenario files.")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scenario file")
    run.add_argument("scenario", help="path to a YAML scenario")
    run.add_argument("--out", help="write the JSON report here (text goes next to it as .txt)")
    run.add_argument("--seed", type=int, help="override the scenario seed")
    run.add_argument("--samples", type=int, help="override the sample count")
    sub.add_parser("list", help="list constructors and operations")
    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "list":
        print("\n".join(list_constructors()))
        return EXIT_PASS
    try:
        scen = load_scenario(args.scenario, seed=args.seed, samples=args.samples)
        report = run_scenario(scen)
    except SchemaError as err:
        print(f"schema error: {err}", file=sys.stderr)
        return EXIT_SCHEMA
    text = report_text(report)
    sys.stdout.write(text)
    if args.out:
        out = Path(args.out)
        try:
            out.parent.mkdir(parents=True, exist_ok=True)
            out.write_text(report_json(report))
            out.with_suffix(".txt").write_text(text)
        except OSError as err:
            print(f"cannot write report: {err.strerror}", file=sys.stderr)
            return EXIT_SCHEMA
    return EXIT_PASS if report["summary"]["status"] == "pass" else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
