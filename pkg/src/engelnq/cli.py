"""Command-line front end.

Exit status: 0 on success, 1 on usage or input errors, 2 when a verified
property fails (a nonzero Engel instance, a prime outside the expected set,
a table row that differs from the published one).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from . import __version__
from .exactalg import prime_support, smith_normal_form
from .freelie import TruncationSpec, derived_ideal_breakdown, derived_ideal_upper_bound
from .io import ParseError, format_matrix, parse_presentation, read_matrix

log = logging.getLogger("engelnq")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def resolve_threads(flag: Optional[int]) -> int:
    if flag is not None:
        if flag < 1:
            raise UsageError("--threads must be positive")
        return flag
    env = os.environ.get("ENGELNQ_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise UsageError(f"ENGELNQ_THREADS must be an integer, got {env!r}") from None
        if n >= 1:
            return n
    return os.cpu_count() or 1


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [_jsonable(v) for v in items]
    if isinstance(obj, bool) or obj is None or isinstance(obj, (str, float)):
        return obj
    if isinstance(obj, int):
        # big integers travel as decimal strings
        return obj if abs(obj) < 2**53 else str(obj)
    return str(obj)


# ---------------------------------------------------------------------------
# subcommands; each returns (result dict, input bytes for hashing, status)


def cmd_build(args):
    from .nqcore import build, ideal_class, max_a_entries

    data = Path(args.presentation).read_bytes()
    pres = parse_presentation(data.decode())
    A = build(pres)
    result = {
        "ring": pres.ring.name,
        "generators": list(pres.generators),
        "dimension": A.dimension,
        "class": A.lie_class,
        "dimension_by_weight": {w: len(A.indices_of_weight(w)) for w in range(1, A.lie_class + 1)},
        "integral": A.is_integral if A.ring.name == "QQ" else None,
        "max_a_entries": max_a_entries(A),
    }
    if args.ideal:
        result["ideal_class"] = {args.ideal: ideal_class(A, args.ideal)}
    if args.dump_table:
        Path(args.dump_table).write_text(A.export_table())
    return result, data, 0


def cmd_engel_primes(args):
    from .engelgen import ExperimentCase, case_algebra, exceptional_primes, relation_rows

    try:
        case = ExperimentCase.parse(args.case)
    except ValueError as exc:
        raise UsageError(f"bad --case: {exc}") from None
    A = case_algebra(case)
    rep = exceptional_primes(case, algebra=A)
    if args.dump_matrix:
        mat = relation_rows(A, case.target)
        Path(args.dump_matrix).write_text(format_matrix(mat.rows, mat.num_columns))
    result = {
        "case": list(case.target),
        "algebra_dimension": rep.algebra_dimension,
        "columns": rep.columns,
        "rows": rep.rows,
        "instances": rep.instances,
        "zero_rows": rep.zero_rows,
        "rank": rep.rank,
        "full_rank": rep.full_rank,
        "nonunit_divisors": [str(d) for d in rep.elementary_divisors],
        "primes": list(rep.primes),
        "expected_primes": list(rep.expected_primes) if rep.expected_primes else None,
        "discrepancy": rep.discrepancy,
    }
    status = 2 if rep.discrepancy or not rep.full_rank else 0
    return result, f"engel-primes {case.name}".encode(), status


def cmd_gfp_table(args):
    from .engelgen import EXPECTED_TABLE, TABLE_CONFIGS, gfp_table_run

    default = args.m is None and args.cap_x is None
    trunc = None
    if args.cap_x is not None:
        trunc = TruncationSpec(cap_x=args.cap_x, cap_a=1)
    try:
        run = gfp_table_run(args.p, args.m, trunc, args.mode)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    expected = EXPECTED_TABLE.get(args.p) if default and args.p in TABLE_CONFIGS else None
    result = {
        "p": run.p,
        "m": run.m,
        "cap_x": run.trunc.cap_x,
        "mode": run.mode,
        "class_L": run.row.class_L,
        "class_Id_x": run.row.class_Id_x,
        "max_a": run.row.max_a,
        "dimension": run.dimension,
        "max_dx": run.max_dx,
        "boundary_clear": run.boundary_clear,
        "expected": list(expected) if expected else None,
        "matches_expected": (tuple(run.row) == tuple(expected)) if expected else None,
    }
    status = 2 if expected and tuple(run.row) != tuple(expected) else 0
    key = f"gfp-table p={run.p} m={run.m} cap_x={run.trunc.cap_x} mode={run.mode}"
    return result, key.encode(), status


def cmd_count_bound(args):
    total = derived_ideal_upper_bound(args.m, args.cap_x)
    breakdown = derived_ideal_breakdown(args.m, args.cap_x)
    result = {
        "m": args.m,
        "cap_x": args.cap_x,
        "bound": total,
        "generators": args.m,
        "by_multidegree": {",".join(map(str, md)): n for md, n in breakdown.items()},
    }
    return result, f"count-bound m={args.m} cap_x={args.cap_x}".encode(), 0


def cmd_wreath3(args):
    from . import wreath3

    if args.action == "verify":
        try:
            rep = wreath3.verify_engel_cases(args.max_index, args.weight_cap, workers=args.threads)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        lcs = wreath3.lcs_witness(args.max_index - 1, args.max_index)
        result = {
            "max_index": args.max_index,
            "weight_cap": args.weight_cap,
            "monomials": rep.monomials,
            "instances": {"case1": rep.case1, "case2": rep.case2, "case3": rep.case3, "total": rep.instances},
            "failures": [list(map(str, f)) for f in rep.failures[:20]],
            "failure_count": len(rep.failures),
            "passed": rep.ok,
            "ideal_a1_class_exceeds": args.max_index - 1,
            "lcs_witness": str(lcs),
        }
        return result, f"wreath3 verify {args.max_index} {args.weight_cap}".encode(), 0 if rep.ok else 2
    max_index = args.max_index if args.max_index is not None else args.k + 1
    try:
        w = wreath3.id_a1_nonnilpotence_witness(args.k, max_index)
        lcs = wreath3.lcs_witness(args.k, max_index)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    result = {
        "k": args.k,
        "witness": str(w),
        "bracket_indices": list(w.monomials[0][2]),
        "nonzero": not w.is_zero(),
        "lcs_witness": str(lcs),
    }
    return result, f"wreath3 witness {args.k} {max_index}".encode(), 0 if w else 2


def cmd_snf(args):
    data = Path(args.matrix).read_bytes()
    rows, ncols = read_matrix(data.decode(), is_text=True)
    snf = smith_normal_form(rows, ncols)
    result = {
        "rows": len(rows),
        "columns": ncols,
        "rank": snf.rank,
        "elementary_divisors": [str(d) for d in snf.elementary_divisors],
        "primes": prime_support(snf),
    }
    return result, data, 0


# ---------------------------------------------------------------------------


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("human", "structured"), default="human")
    common.add_argument("--output", "-o", help="write the report here instead of stdout")
    common.add_argument("--threads", type=int, default=None, help="worker count (default: $ENGELNQ_THREADS or all cores)")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = _Parser(prog="engelnq", description="Graded nilpotent quotients and 5-Engel relations.")
    parser.add_argument("--version", action="version", version=f"engelnq {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("build", parents=[common], help="build an algebra from a presentation file")
    p.add_argument("presentation")
    p.add_argument("--ideal", help="also report the class of the ideal generated by this generator")
    p.add_argument("--dump-table", help="write the structure table to this file")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("engel-primes", parents=[common], help="exceptional primes of a relation matrix")
    p.add_argument("--case", required=True, help="target multidegree, e.g. 6,1,1")
    p.add_argument("--dump-matrix", help="write the relation matrix to this file")
    p.set_defaults(func=cmd_engel_primes)

    p = sub.add_parser("gfp-table", parents=[common], help="class statistics of the 5-Engel algebra over GF(p)")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--m", type=int, default=None, help="number of a-generators")
    p.add_argument("--cap-x", type=int, default=None)
    p.add_argument("--mode", choices=("direct", "multilinear_plus_power"), default=None)
    p.set_defaults(func=cmd_gfp_table)

    p = sub.add_parser("count-bound", parents=[common], help="Hall-word upper bound on the dimension")
    p.add_argument("--m", type=int, default=6)
    p.add_argument("--cap-x", type=int, default=4)
    p.set_defaults(func=cmd_count_bound)

    p = sub.add_parser("wreath3", help="the characteristic-3 counterexample")
    w = p.add_subparsers(dest="action", required=True, parser_class=_Parser)
    v = w.add_parser("verify", parents=[common])
    v.add_argument("--max-index", type=int, default=6)
    v.add_argument("--weight-cap", type=int, default=6)
    k = w.add_parser("witness", parents=[common])
    k.add_argument("--k", type=int, required=True)
    k.add_argument("--max-index", type=int, default=None)
    p.set_defaults(func=cmd_wreath3)

    p = sub.add_parser("snf", parents=[common], help="Smith normal form of a matrix dump")
    p.add_argument("matrix")
    p.set_defaults(func=cmd_snf)
    return parser


def render_human(report: dict) -> str:
    lines = [f"engelnq {report['version']} {report['command']}"]

    def walk(obj, indent):
        for key, val in obj.items():
            if isinstance(val, dict) and len(val) > 8:
                lines.append(f"{'  ' * indent}{key}: ({len(val)} entries)")
                for k2, v2 in val.items():
                    lines.append(f"{'  ' * (indent + 1)}{k2}: {v2}")
            elif isinstance(val, dict):
                lines.append(f"{'  ' * indent}{key}:")
                walk(val, indent + 1)
            elif isinstance(val, list):
                lines.append(f"{'  ' * indent}{key}: {', '.join(map(str, val)) if val else '-'}")
            else:
                lines.append(f"{'  ' * indent}{key}: {val}")

    walk(report["result"], 1)
    lines.append(f"  elapsed: {report['timestamp']['elapsed_seconds']}s")
    return "\n".join(lines) + "\n"


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s"
    )
    t0 = time.perf_counter()
    try:
        args.threads = resolve_threads(args.threads)
        result, input_bytes, status = args.func(args)
    except (UsageError, ParseError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"engelnq: error: {exc}", file=sys.stderr)
        return 1
    command = args.command + (f" {args.action}" if getattr(args, "action", None) else "")
    report = {
        "tool": "engelnq",
        "version": __version__,
        "command": command,
        "input_sha256": _sha256(input_bytes),
        "status": status,
        "result": _jsonable(result),
        "timestamp": {
            "utc": datetime.now(timezone.utc).isoformat(timespec="seconds"),
            "elapsed_seconds": round(time.perf_counter() - t0, 3),
        },
    }
    text = json.dumps(report, indent=2, sort_keys=True) + "\n" if args.format == "structured" else render_human(report)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
