"""Command line front end.

    ldicert check    --problem P --candidate C     falsify, then certify
    ldicert falsify  --problem P --candidate C
    ldicert certify  --problem P --candidate C
    ldicert mvt      --problem P [--out Q]         build the Jacobian-bound candidate, save, check it
    ldicert tighten  --problem P --family F        bisect between two candidates

Exit codes: 0 certified, 1 falsified, 2 inconclusive or not falsified,
3 usage or input error. The JSON report goes to ``--report`` or stdout.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .certify import Certified, Inconclusive, certify
from .construct import mvt_build, tighten
from .errors import LdiError, LooseEndpointNotCertified
from .problem import load, with_candidate
from .search import Falsified, NotFalsified, SearchConfig, falsify

EXIT_CODES = {"certified": 0, "falsified": 1, "inconclusive": 2, "not_falsified": 2}
USAGE_ERROR = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _positive_float(text):
    value = float(text)
    if not value > 0.0 or not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ldicert", description="Falsify or certify a candidate polytopic LDI.")
    parser.add_argument("--version", action="version", version=f"ldicert {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("--problem", required=True, help="problem file (JSON)")
    common.add_argument("--report", help="write the JSON report here instead of stdout")
    common.add_argument("--eps", type=_positive_float, default=1e-6, help="certification tolerance")
    common.add_argument("--starts", type=int, default=1000, help="random starts of the falsifier")
    common.add_argument("--grid", type=int, default=11, help="grid points per dimension")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--max-boxes", type=int, default=200000)
    common.add_argument("--max-depth", type=int, default=60)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--norm", choices=("state", "full"), default="state",
                        help="normalisation of the separating direction")

    for name, text in (("check", "falsify, then certify"),
                       ("falsify", "search for a verified counterexample"),
                       ("certify", "branch-and-bound epsilon certification")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--candidate", required=True)

    p = sub.add_parser("mvt", parents=[common], help="build the Jacobian-bound candidate")
    p.add_argument("--candidate", default="mvt_generated", help="name for the generated candidate")
    p.add_argument("--out", help="where to write the extended problem file")

    p = sub.add_parser("tighten", parents=[common], help="bisect along a candidate family")
    p.add_argument("--family", required=True)
    p.add_argument("--t-tol", type=_positive_float, default=1e-2)
    return parser


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer, np.bool_)):
        return obj.item()
    return obj


def outcome_label(outcome) -> str:
    if isinstance(outcome, Certified):
        return "certified"
    if isinstance(outcome, Falsified):
        return "falsified"
    if isinstance(outcome, NotFalsified):
        return "not_falsified"
    if isinstance(outcome, Inconclusive):
        return "inconclusive"
    raise TypeError(f"not an outcome: {outcome!r}")


def _report(outcome, args, stats=None, **extra) -> dict:
    label = outcome_label(outcome)
    merged = {"grid_points": 0, "random_starts": 0, "boxes_processed": 0, "max_depth": 0, "wall_ms": 0.0}
    for part in stats or [outcome.stats]:
        for key, val in part.items():
            # each stage leaves the other's counters at zero
            merged[key] = merged.get(key, 0) + val
    rep = {
        "outcome": label,
        "value": outcome.value,
        "epsilon": args.eps,
        "stats": merged,
        "config_echo": {k: v for k, v in vars(args).items()},
        "tool_version": __version__,
    }
    if isinstance(outcome, Falsified):
        rep["witness"] = outcome.witness.to_dict()
    if isinstance(outcome, Inconclusive):
        rep["reason"] = outcome.reason
        rep["boxes_remaining"] = outcome.boxes_remaining
    if isinstance(outcome, NotFalsified) and outcome.unverified:
        rep["unverified_point"] = outcome.best_point
    rep.update(extra)
    return rep


def _search_config(args) -> SearchConfig:
    return SearchConfig(grid_per_dim=args.grid, random_starts=args.starts, seed=args.seed,
                        norm=args.norm, threads=args.threads)


def _certify(problem, cand, args):
    return certify(problem.system, problem.region, cand, args.eps, max_boxes=args.max_boxes,
                   max_depth=args.max_depth, threads=args.threads)


def _check(problem, cand, args):
    first = falsify(problem.system, problem.region, cand, _search_config(args))
    if isinstance(first, Falsified):
        return _report(first, args)
    second = _certify(problem, cand, args)
    return _report(second, args, stats=[first.stats, second.stats])


def run_check(problem, args):
    return _check(problem, problem.candidate(args.candidate), args)


def run_falsify(problem, args):
    cand = problem.candidate(args.candidate)
    return _report(falsify(problem.system, problem.region, cand, _search_config(args)), args)


def run_certify(problem, args):
    return _report(_certify(problem, problem.candidate(args.candidate), args), args)


def run_mvt(problem, args):
    built = mvt_build(problem.system, problem.region)
    doc = with_candidate(problem, args.candidate, built.vertices)
    out = Path(args.out) if args.out else Path(args.problem).with_name(Path(args.problem).stem + "_mvt.json")
    out.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    rep = _check(problem, built.vertices, args)
    rep["mvt"] = {
        "out": str(out),
        "candidate": args.candidate,
        "n_vertices": built.n_vertices,
        "entry_lo": built.entry_intervals[0],
        "entry_hi": built.entry_intervals[1],
        "varying_entries": built.varying_entries,
    }
    return rep


def run_tighten(problem, args):
    family = problem.family(args.family)
    try:
        res = tighten(problem.system, problem.region, family, t_tol=args.t_tol, epsilon=args.eps,
                      search_config=_search_config(args), max_boxes=args.max_boxes,
                      max_depth=args.max_depth, threads=args.threads)
    except LooseEndpointNotCertified as exc:
        if exc.outcome is None:
            raise
        return _report(exc.outcome, args, tighten={"error": str(exc)})
    block = {
        "t_star": res.t_star,
        "t_hi": res.t_hi,
        "history": [{"t": t, "outcome": label} for t, label in res.history],
        "flagged": res.flagged,
        "inconclusive_probes": res.inconclusive_probes,
        "certified_candidate": family.candidate(res.t_star).stacked,
    }
    if res.t_hi is not None:
        block["rejected_outcome"] = outcome_label(res.outcome_hi)
        block["rejected_candidate"] = family.candidate(res.t_hi).stacked
        if isinstance(res.outcome_hi, Falsified):
            block["rejected_witness"] = res.outcome_hi.witness.to_dict()
    return _report(res.outcome, args, tighten=block)


COMMANDS = {
    "check": run_check,
    "falsify": run_falsify,
    "certify": run_certify,
    "mvt": run_mvt,
    "tighten": run_tighten,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        problem = load(args.problem)
        rep = COMMANDS[args.command](problem, args)
    except (LdiError, ValueError, OSError) as exc:
        print(f"ldicert: error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    text = json.dumps(_jsonable(rep), indent=2)
    if args.report:
        try:
            Path(args.report).write_text(text + "\n", encoding="utf-8")
        except OSError as exc:
            print(f"ldicert: error: cannot write report: {exc}", file=sys.stderr)
            return USAGE_ERROR
    else:
        print(text)
    return EXIT_CODES[rep["outcome"]]


if __name__ == "__main__":
    sys.exit(main())
