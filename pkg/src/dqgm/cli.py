"""``dqgm``: run one command on a scenario file and emit a JSON report.

Exit status is 0 on success, 2 when the window budget runs out before the
slice dimension stabilizes, and 1 on errors or failed verifications.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from .algebra import LEFT, Element, check_nondegenerate
from .functionals import UnitNotFound, WindowTooSmall, convolve, dual_unit
from .linalg import NotInSpan, SingularSystem
from .rules import RuleError, _index_json, _sort_key
from .scalars import scalar_to_json
from .scenario import ParseError, Scenario, ValidationError, load_scenario
from .slicing import (
    ALMOST_PERIODIC,
    BudgetExceeded,
    ReconstructionMismatch,
    factor,
    infer_character,
    is_almost_periodic,
    random_element,
    slice_multiplier,
    slice_space_dimension,
)
from .verify import verify_fusion, verify_left_invariance, verify_mhopf_axioms

COMMANDS = (
    "verify-axioms",
    "verify-invariance",
    "convolve",
    "dual-unit",
    "slice",
    "slice-dim",
    "factor",
    "almost-periodic",
    "check-nondegenerate",
)

EXIT_OK, EXIT_ERROR, EXIT_BUDGET = 0, 1, 2

REPORT_KEYS = ("command", "scalar_mode", "verdict", "dimension", "history", "factors", "details", "errors", "timing")

DEFAULTS = {"window_budget": 6, "patience": 2, "tolerance": 1e-9, "seed": 0, "level": 0}


def _blocks_json(get_block, indices) -> list:
    out = []
    for idx in sorted(indices, key=_sort_key):
        m = get_block(idx)
        out.append({"index": _index_json(idx), "block": [[scalar_to_json(x) for x in row] for row in m]})
    return out


def _element_json(e: Element) -> list:
    return _blocks_json(e.block, e.support)


def _multiplier_json(m, window) -> dict:
    alg = m.algebra
    finite = alg.index_model.finite
    out = {
        "window": window.label,
        "window_relative": not finite,
        "table": _blocks_json(m.block, window.indices),
    }
    return out


def _factor_json(x, window, infer: bool) -> dict:
    out = _multiplier_json(x, window)
    if infer and not x.algebra.index_model.finite:
        rule = infer_character(x, window.indices)
        if rule is not None:
            coeff = x.block(0)[0, 0] if 0 in window.indices else None
            out["inferred_rule"] = {"coefficient": scalar_to_json(coeff), "rule": rule.to_json()}
            out["window_relative"] = False
    return out


def _history_json(report) -> list:
    return [{"b_window": b, "a_window": a, "dimension": d} for b, a, d in report.history]


def _window_history(*windows) -> list:
    return [{"level": w.level, "window": w.label} for w in windows]


def _resolve_tensor(scenario: Scenario):
    p = scenario.params
    if "tensor" in p:
        return scenario.get(p["tensor"], "tensor")
    if "target" in p:
        from .models import coproduct_of_multiplier

        return coproduct_of_multiplier(scenario.model, scenario.get(p["target"], "multiplier"))
    raise ValidationError("params must name a 'tensor' or a 'target' multiplier")


def _factorization_json(fac, report) -> list:
    b_win = fac.x[0].algebra.window(fac.level) if fac.x else None
    a_win = fac.y[0].algebra.window(fac.level) if fac.y else None
    rank1 = len(fac.x) == 1
    return [
        {"k": k, "x": _factor_json(xk, b_win, rank1), "y": _factor_json(yk, a_win, rank1)}
        for k, (xk, yk) in enumerate(zip(fac.x, fac.y))
    ]


def _reconstruction_json(fac) -> dict:
    return {
        "pairs_checked": fac.pairs_checked,
        "probe_b": [_index_json(i) for i in fac.probe_b],
        "probe_a": [_index_json(i) for i in fac.probe_a],
        "max_relative_error": fac.max_error,
        "double_centralizer_pairs": fac.centralizer_pairs,
    }


def run(command: str, scenario: Scenario, options: dict | None = None) -> tuple[dict, int]:
    """Execute ``command``; returns ``(report, exit_status)``."""
    opts = dict(DEFAULTS)
    opts.update({k: v for k, v in scenario.params.items() if k in DEFAULTS})
    opts.update({k: v for k, v in (options or {}).items() if v is not None})
    report = {key: None for key in REPORT_KEYS}
    report.update(command=command, scalar_mode=scenario.scalar_mode, history=[], factors=[], errors=[])
    start = time.perf_counter()
    try:
        status = _dispatch(command, scenario, opts, report)
    except (
        ValidationError,
        NotInSpan,
        SingularSystem,
        ReconstructionMismatch,
        UnitNotFound,
        WindowTooSmall,
        RuleError,
        ValueError,
        ArithmeticError,
    ) as exc:
        report["verdict"] = "error"
        report["errors"].append({"type": type(exc).__name__, "message": str(exc)})
        status = EXIT_ERROR
    if opts.get("timing"):
        report["timing"] = {"seconds": round(time.perf_counter() - start, 3)}
    return report, status


def _dispatch(command, scenario, opts, report) -> int:
    dqg = scenario.model
    alg = dqg.algebra
    level = int(opts["level"])
    tol = float(opts["tolerance"])
    rng = np.random.default_rng(int(opts["seed"]))
    p = scenario.params

    if command == "verify-axioms":
        win = alg.window(level)
        r = verify_mhopf_axioms(dqg, level, True, p.get("max_triples"), rng, tol)
        fus = verify_fusion(dqg, win.indices, max(tol, 1e-9))
        report["history"] = _window_history(win)
        report["details"] = {"axioms": r.to_json(), "fusion": fus.to_json()}
        ok = r.passed and fus.passed
        report["verdict"] = "pass" if ok else "fail"
        return EXIT_OK if ok else EXIT_ERROR

    if command == "verify-invariance":
        win = alg.window(level)
        if "element" in p:
            elements = [scenario.get(p["element"], "element")]
        else:
            elements = [random_element(alg, win.indices, rng) for _ in range(int(p.get("random", 10)))]
        rtol = float(p.get("invariance_tolerance", 1e-8))
        reports = [verify_left_invariance(dqg, a, win.indices, rtol) for a in elements]
        worst = max(r.max_deviation for r in reports)
        ok = all(r.passed for r in reports)
        report["history"] = _window_history(win)
        report["details"] = {
            "elements": len(elements),
            "max_deviation": worst,
            "exact": reports[0].exact,
            "fusion": verify_fusion(dqg, win.indices).to_json(),
        }
        report["verdict"] = "pass" if ok else "fail"
        return EXIT_OK if ok else EXIT_ERROR

    if command == "convolve":
        names = p.get("functionals")
        if not isinstance(names, list) or len(names) != 2:
            raise ValidationError("convolve needs params.functionals = [name1, name2]")
        xi1, xi2 = (scenario.get(n, "functional") for n in names)
        out = convolve(xi1, xi2, dqg)
        report["details"] = {"representative": _element_json(out.representative), "side": LEFT}
        report["verdict"] = "ok"
        return EXIT_OK

    if command == "dual-unit":
        u = dual_unit(dqg, level)
        report["history"] = _window_history(alg.window(level))
        report["details"] = {"representative": _element_json(u.representative), "side": LEFT}
        report["verdict"] = "ok"
        return EXIT_OK

    if command == "slice":
        Y = _resolve_tensor(scenario)
        if "functional" not in p:
            raise ValidationError("slice needs params.functional")
        xi = scenario.get(p["functional"], "functional")
        m = slice_multiplier(Y, xi)
        win = Y.left.window(level)
        report["history"] = _window_history(win)
        report["details"] = {"slice": _multiplier_json(m, win)}
        report["verdict"] = "ok"
        return EXIT_OK

    if command == "check-nondegenerate":
        win = alg.window(level)
        ok = check_nondegenerate(alg, win.indices)
        report["history"] = _window_history(win)
        report["verdict"] = "pass" if ok else "fail"
        return EXIT_OK if ok else EXIT_ERROR

    budget, patience = int(opts["window_budget"]), int(opts["patience"])

    if command == "almost-periodic":
        if "target" not in p:
            raise ValidationError("almost-periodic needs params.target")
        x = scenario.get(p["target"], "multiplier")
        res = is_almost_periodic(x, dqg, patience, budget, tol, rng=rng)
        report["history"] = _history_json(res.slices)
        report["verdict"] = res.verdict
        report["dimension"] = res.dimension
        report["details"] = {"note": res.slices.note}
        if res.verdict == ALMOST_PERIODIC:
            report["factors"] = _factorization_json(res.factorization, res.slices)
            report["details"]["reconstruction"] = _reconstruction_json(res.factorization)
            return EXIT_OK
        return EXIT_BUDGET

    if command in ("slice-dim", "factor"):
        Y = _resolve_tensor(scenario)
        try:
            sr = slice_space_dimension(Y, dqg, patience, budget, tol)
        except BudgetExceeded as exc:
            report["history"] = _history_json(exc.report)
            report["verdict"] = "budget_exceeded"
            report["details"] = {"note": exc.report.note}
            report["errors"].append({"type": "BudgetExceeded", "message": str(exc)})
            return EXIT_BUDGET
        report["history"] = _history_json(sr)
        report["dimension"] = sr.final_dimension
        report["verdict"] = "stabilized"
        report["details"] = {"note": sr.note}
        if command == "factor":
            fac = factor(Y, dqg, sr, rng=rng)
            report["factors"] = _factorization_json(fac, sr)
            report["details"]["reconstruction"] = _reconstruction_json(fac)
            report["verdict"] = "factored"
        return EXIT_OK

    raise ValidationError(f"unknown command {command!r}")


def _dump(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dqgm", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--scenario", required=True, help="scenario JSON file")
    parser.add_argument("--window-budget", type=int, default=None, help="max number of windows (default 6)")
    parser.add_argument("--patience", type=int, default=None, help="equal dimensions needed after the first (default 2)")
    parser.add_argument("--tolerance", type=float, default=None, help="float rank tolerance (default 1e-9)")
    parser.add_argument("--seed", type=int, default=None, help="seed for randomized checks (default 0)")
    parser.add_argument("--level", type=int, default=None, help="window level for single-window commands")
    parser.add_argument("--out", default=None, help="write the report here instead of stdout")
    parser.add_argument("--timing", action="store_true", help="include wall time (breaks byte-identical reports)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        scenario = load_scenario(args.scenario)
    except (OSError, ParseError, ValidationError) as exc:
        report = {key: None for key in REPORT_KEYS}
        report.update(
            command=args.command,
            verdict="error",
            history=[],
            factors=[],
            errors=[{"type": type(exc).__name__, "message": str(exc)}],
        )
        status = EXIT_ERROR
    else:
        options = {
            "window_budget": args.window_budget,
            "patience": args.patience,
            "tolerance": args.tolerance,
            "seed": args.seed,
            "level": args.level,
            "timing": args.timing or None,
        }
        report, status = run(args.command, scenario, options)
    text = _dump(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
