"""Command-line front end.

Every subcommand is a thin shim over one library call; the CLI adds parsing
and formatting only.  Output is a stream of records rendered as CSV (default),
an aligned markdown table, or JSON lines; the default format can be set with
the ``BMDLIMITS_FORMAT`` environment variable.

Exit codes: 0 success; 1 domain or infeasibility errors (and a failing
reproduction manifest); 2 usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Sequence

from .errors import DomainError
from .feasibility import load_turnout, passive_feasibility_join, summarize
from .minimax import (
    DEFAULT_SUPPORT_SIZE,
    FixedZeta,
    GridZeta,
    MinimaxQuery,
    min_training_sample,
    table_lower_bounds,
)
from .parallel import (
    BudgetedTestQuery,
    OracleBoundQuery,
    detection_prob_iid,
    min_electorate_for_budget,
    min_tests_iid,
    oracle_min_samples,
)
from .passive import PassiveDesign, min_contest_size, table_passive
from .repro import PUBLISHED_TRAINING_BOUNDS_MILLIONS, build_manifest, manifest_passes
from .simulate import load_scenario, run_parallel_sim, run_passive_sim
from .transactions import PRESETS, load_space

FORMATS = ("csv", "markdown", "json-lines")


def _format_value(v) -> str:
    if isinstance(v, float):
        return f"{v:.10g}"
    if v is None:
        return ""
    return str(v)


def emit(rows: Sequence[dict], fmt: str, out=None) -> None:
    """Render records in the chosen format; all rows share the first row's keys."""
    out = out or sys.stdout
    if not rows:
        return
    keys = list(rows[0].keys())
    if fmt == "json-lines":
        for row in rows:
            out.write(json.dumps(row) + "\n")
        return
    cells = [[_format_value(row.get(k)) for k in keys] for row in rows]
    if fmt == "csv":
        out.write(",".join(keys) + "\n")
        for row in cells:
            out.write(",".join(row) + "\n")
        return
    if fmt == "markdown":
        widths = [
            max(len(k), *(len(r[i]) for r in cells)) for i, k in enumerate(keys)
        ]
        out.write("| " + " | ".join(k.ljust(w) for k, w in zip(keys, widths)) + " |\n")
        out.write("|" + "|".join("-" * (w + 2) for w in widths) + "|\n")
        for row in cells:
            out.write("| " + " | ".join(c.ljust(w) for c, w in zip(row, widths)) + " |\n")
        return
    raise DomainError(f"unknown format {fmt!r}")


def _csv_floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x != ""]
    except ValueError:
        raise DomainError(f"expected comma-separated numbers, got {text!r}")


# -- subcommand handlers -----------------------------------------------------


def _cmd_passive(args) -> list[dict]:
    margins = _csv_floats(args.margin)
    detect_rates = _csv_floats(args.detect_rate)
    base_rates = _csv_floats(args.base_rate)
    if len(margins) == len(detect_rates) == len(base_rates) == 1:
        design = PassiveDesign(margins[0], detect_rates[0], base_rates[0], args.fp, args.fn)
        sol = min_contest_size(design, args.convention)
        return [
            {
                "margin": margins[0],
                "detect_rate": detect_rates[0],
                "base_rate": base_rates[0],
                "contest_size": sol.contest_size,
                "alarm_threshold": sol.alarm_threshold,
                "achieved_fp": sol.achieved_fp,
                "achieved_fn": sol.achieved_fn,
                "convention": sol.convention,
            }
        ]
    if args.fp != args.fn:
        raise DomainError("grid mode uses one shared budget; pass equal --fp/--fn")
    return table_passive(args.fp, margins, detect_rates, base_rates, args.convention)


def _cmd_parallel(args) -> list[dict]:
    if args.tests_per_day is not None:
        if args.capacity is None or args.altered_fraction is None:
            raise DomainError("--tests-per-day needs --capacity and --altered-fraction")
        q = BudgetedTestQuery(
            args.tests_per_day, args.capacity, args.altered_fraction, args.confidence
        )
        res = min_electorate_for_budget(q, args.sampling, args.rounding)
        return [res.__dict__.copy()]
    if args.p is None:
        raise DomainError("need either --p or --tests-per-day")
    if args.tests is not None:
        return [
            {
                "p": args.p,
                "tests": args.tests,
                "detection": detection_prob_iid(args.p, args.tests),
            }
        ]
    t = min_tests_iid(args.p, args.confidence)
    return [
        {
            "p": args.p,
            "confidence": args.confidence,
            "min_tests": t,
            "achieved_detection": detection_prob_iid(args.p, t),
        }
    ]


def _cmd_oracle(args) -> list[dict]:
    q = OracleBoundQuery(args.population, args.flawed, args.confidence)
    n = oracle_min_samples(q)
    return [
        {
            "population": args.population,
            "flawed": args.flawed,
            "confidence": args.confidence,
            "min_samples": n,
        }
    ]


def _zeta_strategy(args):
    if args.zeta is not None:
        return FixedZeta(args.zeta)
    if args.zeta_grid:
        return GridZeta()
    return FixedZeta()


def _cmd_minimax(args) -> list[dict]:
    if args.altered_fraction is not None:
        T = None if args.test_limit in (None, 0) else args.test_limit
        q = MinimaxQuery(
            r=args.altered_fraction,
            alpha=1.0 - args.confidence,
            T=T,
            S=args.support_size,
            beta=args.beta,
            zeta=_zeta_strategy(args),
        )
        report = min_training_sample(q)
        return [
            {
                "confidence": args.confidence,
                "test_limit": T,
                "altered_fraction": args.altered_fraction,
                "min_training_n": report.min_training_n,
                "bound_millions": report.min_training_n / 1e6,
                "threshold": report.threshold,
                "zeta": report.zeta_used,
                "beta": report.beta_used,
            }
        ]
    rows = table_lower_bounds(S=args.support_size, zeta=_zeta_strategy(args))
    for row in rows:
        key = (row["test_limit"], row["confidence"], row["altered_fraction"])
        published = PUBLISHED_TRAINING_BOUNDS_MILLIONS.get(key)
        row["published_millions"] = published
        row["ratio_to_published"] = (
            row["bound_millions"] / published if published else None
        )
    return rows


def _cmd_cardinality(args) -> list[dict]:
    if args.space:
        space = load_space(args.space)
        name = args.space
    else:
        space = PRESETS[args.preset]()
        name = args.preset
    return [{"space": name, "cardinality": space.cardinality}]


def _cmd_simulate(args) -> list[dict]:
    kind, scenario = load_scenario(args.scenario)
    if args.seed is not None:
        scenario = type(scenario)(
            **{**scenario.__dict__, "seed": args.seed}
        )
    run = run_passive_sim if kind == "passive" else run_parallel_sim
    report = run(scenario, workers=args.workers)
    return [json.loads(report.to_json())]


def _cmd_feasibility(args) -> list[dict]:
    records = load_turnout(args.data)
    thresholds = args.threshold or [43_000]
    summary = summarize(records, thresholds)
    rows = [
        {
            "metric": "jurisdictions",
            "value": summary.count,
        },
        {"metric": "median_turnout", "value": summary.median_turnout},
    ]
    for t, frac in summary.fraction_below.items():
        rows.append({"metric": f"fraction_below_{t}", "value": frac})
    rows.append(
        {
            "metric": f"states_where_majority_below_{thresholds[0]}",
            "value": summary.states_where_majority_below,
        }
    )
    if args.margin is not None:
        design = PassiveDesign(
            args.margin, args.detect_rate, args.base_rate, args.fp, args.fn
        )
        join = passive_feasibility_join(records, design)
        rows.append(
            {"metric": "required_contest_size", "value": join.required_contest_size}
        )
        rows.append({"metric": "fraction_infeasible", "value": join.fraction_infeasible})
        rows.append(
            {
                "metric": "states_where_majority_infeasible",
                "value": join.states_where_majority_infeasible,
            }
        )
    return rows


def _cmd_repro(args) -> tuple[list[dict], int]:
    manifest = build_manifest()
    rows = [r.to_record() for r in manifest]
    return rows, 0 if manifest_passes(manifest) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bmdlimits",
        description="Statistical limits of testing ballot-marking devices",
    )
    parser.add_argument(
        "--format",
        choices=FORMATS,
        default=os.environ.get("BMDLIMITS_FORMAT", "csv"),
        help="output format (default: csv, or $BMDLIMITS_FORMAT)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("passive", help="minimum contest size for spoilage monitoring")
    p.add_argument("--margin", required=True, help="margin(s), comma-separated")
    p.add_argument("--detect-rate", required=True, help="detection rate(s)")
    p.add_argument("--base-rate", required=True, help="benign spoil rate(s)")
    p.add_argument("--fp", type=float, default=0.05)
    p.add_argument("--fn", type=float, default=0.05)
    p.add_argument("--convention", choices=("published", "strict"), default="published")

    p = sub.add_parser("parallel", help="test counts and electorate sizes")
    p.add_argument("--p", type=float, help="per-test detection probability")
    p.add_argument("--tests", type=int, help="evaluate detection at this test count")
    p.add_argument("--confidence", type=float, default=0.95)
    p.add_argument("--tests-per-day", type=int, help="per-machine daily test budget")
    p.add_argument("--capacity", type=int, help="per-machine daily transaction capacity")
    p.add_argument("--altered-fraction", type=float)
    p.add_argument(
        "--sampling",
        choices=("with_replacement", "without_replacement"),
        default="with_replacement",
    )
    p.add_argument("--rounding", choices=("half_up", "floor", "ceil"), default="half_up")

    p = sub.add_parser("oracle", help="printout sample size for an error oracle")
    p.add_argument("--population", type=int, required=True)
    p.add_argument("--flawed", type=int, required=True)
    p.add_argument("--confidence", type=float, default=0.95)

    p = sub.add_parser("minimax", help="training-sample lower bounds")
    p.add_argument("--confidence", type=float, default=0.95)
    p.add_argument("--test-limit", type=int, help="test budget; omit or 0 for unbounded")
    p.add_argument("--altered-fraction", type=float, help="single-cell mode")
    p.add_argument("--support-size", type=int, default=DEFAULT_SUPPORT_SIZE)
    p.add_argument("--beta", type=float, help="estimation-failure budget split")
    p.add_argument("--zeta", type=float, help="fixed slack value in (0, 1]")
    p.add_argument("--zeta-grid", action="store_true", help="maximize over a slack grid")

    p = sub.add_parser("cardinality", help="transaction-space size")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--preset", choices=sorted(PRESETS))
    g.add_argument("--space", help="JSON space definition file")

    p = sub.add_parser("simulate", help="run a Monte Carlo scenario file")
    p.add_argument("--scenario", required=True, help="JSON scenario file")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, help="override the scenario seed")

    p = sub.add_parser("feasibility", help="turnout data vs monitoring requirements")
    p.add_argument("--data", required=True, help="CSV: state,jurisdiction,turnout")
    p.add_argument("--margin", type=float)
    p.add_argument("--detect-rate", type=float, default=0.07)
    p.add_argument("--base-rate", type=float, default=0.005)
    p.add_argument("--fp", type=float, default=0.05)
    p.add_argument("--fn", type=float, default=0.05)
    p.add_argument(
        "--threshold", type=int, action="append", help="turnout threshold (repeatable)"
    )

    sub.add_parser("repro", help="regression manifest against published values")
    return parser


_HANDLERS = {
    "passive": _cmd_passive,
    "parallel": _cmd_parallel,
    "oracle": _cmd_oracle,
    "minimax": _cmd_minimax,
    "cardinality": _cmd_cardinality,
    "simulate": _cmd_simulate,
    "feasibility": _cmd_feasibility,
}


def run(argv: Sequence[str] | None = None, out=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "repro":
            rows, code = _cmd_repro(args)
        else:
            rows = _HANDLERS[args.command](args)
            code = 0
        emit(rows, args.format, out)
        return code
    except (DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    raise SystemExit(run())
