"""Command-line surface: ``simulate``, ``verify`` and ``curve``.

All reports are pure functions of their arguments (including the seed),
so identical invocations produce byte-identical output. Exit codes:
0 success, 1 usage error, 2 verification failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction
from typing import List, Optional, Tuple

from .adversary import AttackKind
from .analysis import (
    build_report,
    closed_form_session_detection,
    correlation_table,
    session_detection,
)
from .protocol import Variant
from .verify import format_correction_tables, run_checks

_PROTOCOLS = {v.value: v for v in Variant}
_ATTACKS = {k.value: k for k in AttackKind}
_CURVE_ATTACKS = ("delta", "delta-hpre", "delta-random-h", "delayed", "source")


class _Parser(argparse.ArgumentParser):
    # Usage problems exit with code 1; argparse's default of 2 is reserved
    # for verification failures.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="swapqkd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser(
        "simulate",
        help="exact and sampled statistics for one protocol/attack pairing",
    )
    sim.add_argument("--protocol", choices=sorted(_PROTOCOLS), required=True)
    sim.add_argument("--attack", choices=[k.value for k in AttackKind], default="none")
    sim.add_argument("--rounds", type=int, default=1, metavar="N",
                     help="rounds compared per session (default 1)")
    sim.add_argument("--trials", type=int, default=0, metavar="T",
                     help="Monte Carlo sessions; 0 = exact only (default)")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--format", choices=("json", "csv", "table"), default="table")
    sim.add_argument("--compare-fraction", type=float, default=1.0, metavar="F",
                     help="fraction of rounds the parties compare (default 1.0)")
    sim.add_argument("--alice-prepares-both", action="store_true",
                     help="Alice prepares both pairs and sends two qubits to Bob")
    sim.add_argument("--plot", metavar="PATH",
                     help="also render the correlation tables to an image file")

    ver = sub.add_parser("verify", help="run every exact identity check")
    ver.add_argument("--inject-phase-flip", action="store_true", help=argparse.SUPPRESS)

    cur = sub.add_parser(
        "curve", help="detection probability versus compared rounds (hardened protocol)"
    )
    cur.add_argument("--attack", choices=_CURVE_ATTACKS, required=True)
    cur.add_argument("--n-max", type=int, default=16, metavar="N")
    cur.add_argument("--format", choices=("json", "csv", "table"), default="table")
    cur.add_argument("--plot", metavar="PATH",
                     help="also render the curve to an image file")
    return parser


def _frac(x: Optional[Fraction]):
    return None if x is None else float(x)


def _frac_str(x: Optional[Fraction]):
    return None if x is None else str(x)


def _simulate_document(args) -> dict:
    variant = _PROTOCOLS[args.protocol]
    attack = _ATTACKS[args.attack]
    report = build_report(
        variant,
        attack,
        n=args.rounds,
        trials=args.trials,
        seed=args.seed,
        alice_prepares_both=args.alice_prepares_both,
        compare_fraction=args.compare_fraction,
    )
    tables = correlation_table(variant, attack, args.alice_prepares_both)
    table_entries = []
    for (pauli, flag), joint in sorted(
        tables.items(), key=lambda kv: (kv[0][0].value, bool(kv[0][1]))
    ):
        table_entries.append(
            {
                "alice_pauli": pauli.name,
                "hadamard": flag,
                "joint": [[float(cell) for cell in row] for row in joint],
            }
        )
    mc = None
    if report.monte_carlo is not None:
        m = report.monte_carlo
        mc = {
            "trials": m.trials,
            "rounds_total": m.rounds_total,
            "detection_rate": m.detection_rate,
            "detection_std_error": m.detection_std_error,
            "detection_within_4_std_errors": report.mc_within_tolerance,
            "agreement_rate": m.agreement_rate,
            "agreement_std_error": m.agreement_std_error,
            "seed": m.seed,
        }
    return {
        "run": {
            "command": "simulate",
            "protocol": args.protocol,
            "attack": args.attack,
            "rounds": args.rounds,
            "trials": args.trials,
            "seed": args.seed,
            "compare_fraction": args.compare_fraction,
            "alice_prepares_both": args.alice_prepares_both,
        },
        "exact": {
            "per_round_detection": _frac(report.per_round_detection),
            "per_round_detection_exact": _frac_str(report.per_round_detection),
            "eve_agreement": _frac(report.eve_agreement),
            "eve_agreement_exact": _frac_str(report.eve_agreement),
            "detection_given_hadamard": _frac(report.detection_given_h),
            "detection_given_no_hadamard": _frac(report.detection_given_no_h),
            "session_detection": _frac(report.p_detect_session),
            "session_detection_exact": _frac_str(report.p_detect_session),
            "closed_form_session_detection": report.closed_form_reference,
            "branch_count": report.branch_count,
        },
        "monte_carlo": mc,
        "correlation_tables": table_entries,
    }


def _curve_document(args) -> dict:
    attack = _ATTACKS[args.attack]
    rows = []
    for n in range(1, args.n_max + 1):
        rows.append(
            {
                "n": n,
                "exact": float(session_detection(Variant.MODIFIED, attack, n)),
                "closed_form": closed_form_session_detection(Variant.MODIFIED, attack, n),
            }
        )
    return {
        "run": {"command": "curve", "protocol": "modified", "attack": args.attack,
                "n_max": args.n_max},
        "rows": rows,
    }


def _flatten(value, prefix: str = "") -> List[Tuple[str, object]]:
    if isinstance(value, dict):
        rows: List[Tuple[str, object]] = []
        for k, v in value.items():
            rows.extend(_flatten(v, f"{prefix}.{k}" if prefix else str(k)))
        return rows
    if isinstance(value, list):
        rows = []
        for i, v in enumerate(value):
            rows.extend(_flatten(v, f"{prefix}.{i}"))
        return rows
    return [(prefix, value)]


def _emit(doc: dict, fmt: str, table_printer) -> None:
    if fmt == "json":
        sys.stdout.write(json.dumps(doc, indent=2) + "\n")
    elif fmt == "csv":
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(("key", "value"))
        for key, value in _flatten(doc):
            writer.writerow((key, json.dumps(value)))
    else:
        table_printer(doc)


def _fmt_opt(x, digits: int = 10) -> str:
    if x is None:
        return "-"
    if isinstance(x, bool):
        return "yes" if x else "no"
    if isinstance(x, float):
        return f"{x:.{digits}g}"
    return str(x)


def _print_simulate_table(doc: dict) -> None:
    run = doc["run"]
    layout = "Alice prepares both pairs" if run["alice_prepares_both"] else "pair exchange"
    print(f"protocol: {run['protocol']}   attack: {run['attack']}   layout: {layout}")
    ex = doc["exact"]
    print(f"exact statistics ({ex['branch_count']} enumerated branches):")
    print(f"  per-round detection       {_fmt_opt(ex['per_round_detection_exact'])}"
          f" ({_fmt_opt(ex['per_round_detection'])})")
    print(f"  detection given H         {_fmt_opt(ex['detection_given_hadamard'])}")
    print(f"  detection given no H      {_fmt_opt(ex['detection_given_no_hadamard'])}")
    print(f"  eve-bob key agreement     {_fmt_opt(ex['eve_agreement_exact'])}"
          f" ({_fmt_opt(ex['eve_agreement'])})")
    print(f"  session detection (n={run['rounds']})  {_fmt_opt(ex['session_detection'])}")
    print(f"  closed-form reference     {_fmt_opt(ex['closed_form_session_detection'])}")
    mc = doc["monte_carlo"]
    if mc is not None:
        print(f"monte carlo ({mc['trials']} sessions, seed {mc['seed']}):")
        print(f"  detection rate            {_fmt_opt(mc['detection_rate'])}"
              f" +- {_fmt_opt(mc['detection_std_error'], 3)}"
              f" (within 4 s.e. of exact: {_fmt_opt(mc['detection_within_4_std_errors'])})")
        print(f"  agreement rate            {_fmt_opt(mc['agreement_rate'])}"
              + ("" if mc["agreement_std_error"] is None
                 else f" +- {_fmt_opt(mc['agreement_std_error'], 3)}"))
    outcomes = ("Phi+", "Phi-", "Psi+", "Psi-")
    print("correlation tables, rows Alice / columns Bob:")
    for entry in doc["correlation_tables"]:
        flag = entry["hadamard"]
        sub = "" if flag is None else f", H {'on' if flag else 'off'}"
        print(f"  secret Pauli {entry['alice_pauli']}{sub}:")
        for name, row in zip(outcomes, entry["joint"]):
            cells = " ".join(f"{c:6.4f}" for c in row)
            print(f"    {name:5s} {cells}")


def _print_curve_table(doc: dict) -> None:
    run = doc["run"]
    print(f"detection curve: modified protocol vs {run['attack']}")
    print(f"{'n':>4s} {'exact':>14s} {'closed form':>14s}")
    for row in doc["rows"]:
        print(f"{row['n']:4d} {row['exact']:14.10f} {row['closed_form']:14.10f}")


def _cmd_simulate(args) -> int:
    if args.rounds < 1:
        print("swapqkd: error: --rounds must be >= 1", file=sys.stderr)
        return 1
    if args.trials < 0:
        print("swapqkd: error: --trials must be >= 0", file=sys.stderr)
        return 1
    if not 0.0 < args.compare_fraction <= 1.0:
        print("swapqkd: error: --compare-fraction must be in (0, 1]", file=sys.stderr)
        return 1
    try:
        doc = _simulate_document(args)
    except ValueError as exc:
        print(f"swapqkd: error: {exc}", file=sys.stderr)
        return 1
    _emit(doc, args.format, _print_simulate_table)
    if args.plot:
        from .figures import save_correlation_heatmap

        title = f"{args.protocol} protocol vs {args.attack}"
        save_correlation_heatmap(doc["correlation_tables"], args.plot, title)
        print(f"figure written to {args.plot}", file=sys.stderr)
    return 0


def _cmd_curve(args) -> int:
    if args.n_max < 1:
        print("swapqkd: error: --n-max must be >= 1", file=sys.stderr)
        return 1
    doc = _curve_document(args)
    _emit(doc, args.format, _print_curve_table)
    if args.plot:
        from .figures import save_detection_curve

        save_detection_curve(
            doc["rows"], args.plot, f"modified protocol vs {args.attack}"
        )
        print(f"figure written to {args.plot}", file=sys.stderr)
    return 0


def _cmd_verify(args) -> int:
    results = run_checks(corrupt_circuit=args.inject_phase_flip)
    width = max(len(r.name) for r in results)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status}  {r.name:<{width}s}  {r.detail}")
    print()
    print(format_correction_tables())
    failed = [r for r in results if not r.passed]
    print()
    print(f"{len(results)} checks: {len(results) - len(failed)} passed, {len(failed)} failed")
    return 2 if failed else 0


def main(argv: Optional[List[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "simulate":
        return _cmd_simulate(args)
    if args.command == "curve":
        return _cmd_curve(args)
    return _cmd_verify(args)


if __name__ == "__main__":
    sys.exit(main())
