"""heron-descent command line.

Exit codes: 0 theorem confirmed, 2 hypothesis rejected, 3 theorem violation,
64 usage error. Reports go to stdout, logging to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import code_version
from .errors import InvalidArgument
from .family import Rejection, scan, validate
from .homspace import DescentPair, HomogeneousSpace, locally_solvable_generic, locally_solvable_rules
from .padic import INF
from .quadfield import class_number
from .selmer import DescentReport, compute_selmer, conclude

log = logging.getLogger("heron_descent")

EXIT_OK, EXIT_REJECTED, EXIT_VIOLATION, EXIT_USAGE = 0, 2, 3, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def render_json(data) -> str:
    return json.dumps(data, sort_keys=True, indent=1)


class ReportCache:
    """Append-only JSON-lines cache keyed by (p, code version, bounds)."""

    def __init__(self, path: str | os.PathLike | None):
        self.path = Path(path) if path else None

    @staticmethod
    def key(p: int, bounds: tuple[int, int, int]) -> dict:
        return {"p": p, "code": code_version(), "bounds": list(bounds)}

    def get(self, p: int, bounds) -> DescentReport | None:
        if not self.path or not self.path.exists():
            return None
        want = self.key(p, bounds)
        found = None
        with self.path.open() as fh:
            for line in fh:
                try:
                    entry = json.loads(line)
                except json.JSONDecodeError:
                    log.warning("skipping corrupt cache line")
                    continue
                if entry.get("key") == want:
                    found = entry["report"]
        return DescentReport.from_dict(found) if found else None

    def put(self, report: DescentReport, bounds) -> None:
        if not self.path:
            return
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with self.path.open("a") as fh:
            fh.write(json.dumps({"key": self.key(report.p, bounds), "report": report.to_dict()}, sort_keys=True) + "\n")


def _bounds(args) -> tuple[int, int, int]:
    return args.curve_bound, args.space_bound, args.sanity_bound


def _conclude_p(p: int, bounds) -> DescentReport:
    return conclude(validate(p), *bounds)


def reports_for(ps, args) -> list[DescentReport]:
    cache = ReportCache(args.cache)
    bounds = _bounds(args)
    out = {p: cache.get(p, bounds) for p in ps}
    todo = [p for p, r in out.items() if r is None]
    if todo:
        log.info("computing %d report(s): %s", len(todo), todo)
        if args.jobs > 1 and len(todo) > 1:
            with ProcessPoolExecutor(args.jobs) as pool:
                fresh = list(pool.map(_conclude_p, todo, [bounds] * len(todo)))
        else:
            fresh = [_conclude_p(p, bounds) for p in todo]
        for r in fresh:  # single writer
            cache.put(r, bounds)
            out[r.p] = r
    return [out[p] for p in ps]


def _int_arg(text: str, name: str, minimum: int = 2) -> int:
    try:
        n = int(text)
    except ValueError:
        raise UsageError(f"{name} must be an integer, got {text!r}")
    if n < minimum:
        raise UsageError(f"{name} must be >= {minimum}")
    return n


def _sha_label(dim) -> str:
    return "trivial" if dim == 0 else ("(Z/2Z)" if dim == 1 else f"(Z/2Z)^{dim}") if dim is not None else "?"


def _md_table(reports) -> str:
    lines = ["| p | Rank of E_p | 2-Selmer rank of E_p | Sha(E_p/Q)[2] |", "|---|---|---|---|"]
    for r in reports:
        lines.append(f"| {r.p} | {r.rank} | {r.selmer_rank} | {_sha_label(r.sha2_dim)} |")
    return "\n".join(lines)


def table_rows(reports) -> list[dict]:
    return [{"p": r.p, "rank": r.rank, "selmer_rank": r.selmer_rank, "sha2_dim": r.sha2_dim,
             "sha2": _sha_label(r.sha2_dim), "status": r.status} for r in reports]


# ---------------------------------------------------------------- commands


def cmd_verify(args) -> int:
    p = _int_arg(args.p, "p")
    res = validate(p)
    if isinstance(res, Rejection):
        out = {"p": p, "rejected": res.reason.value}
        print(render_json(out) if args.format == "json" else f"p = {p} rejected: {res.reason.value}")
        return EXIT_REJECTED
    (report,) = reports_for([p], args)
    if args.format == "json":
        print(render_json(report.to_dict()))
    else:
        print(_md_table([report]))
        print(f"\nstatus: {report.status}")
        print("Selmer group: " + ", ".join(report.selmer_members))
    return EXIT_OK if report.confirmed else EXIT_VIOLATION


def cmd_scan(args) -> int:
    lo, hi = _int_arg(args.lo, "lo"), _int_arg(args.hi, "hi")
    if lo > hi:
        raise UsageError("lo must be <= hi")
    pairs = scan(lo, hi)
    if args.format == "json":
        print(render_json([{"p": fp.p, "q": fp.q} for fp in pairs]))
    else:
        print("\n".join(f"{fp.p} {fp.q}" for fp in pairs))
    return EXIT_OK


def _validated(text):
    p = _int_arg(text, "p")
    res = validate(p)
    if isinstance(res, Rejection):
        print(render_json({"p": p, "rejected": res.reason.value}))
        return None
    return res


def cmd_selmer(args) -> int:
    pair = _validated(args.p)
    if pair is None:
        return EXIT_REJECTED
    sel = compute_selmer(pair, args.sanity_bound)
    members = sorted(m.label() for m in sorted(sel.members))
    if args.format == "json":
        print(render_json({"p": pair.p, "q": pair.q, "selmer_rank": sel.rank, "selmer_members": members}))
    else:
        print(f"Sel_2 for p = {pair.p}: order {len(members)}, 2-Selmer rank {sel.rank}")
        print(", ".join(members))
    return EXIT_OK


def _parse_place(text: str, pair):
    if text in ("inf", "oo", "infinity"):
        return INF
    if text == "p":
        return pair.p
    if text == "q":
        return pair.q
    from .arith import is_prime

    l = _int_arg(text, "place")
    if not is_prime(l):
        raise UsageError(f"place {l} is not prime")
    return l


def cmd_local(args) -> int:
    pair = _validated(args.p)
    if pair is None:
        return EXIT_REJECTED
    try:
        dp = DescentPair.parse(args.b1, args.b2, pair)
    except InvalidArgument as exc:
        raise UsageError(str(exc))
    place = _parse_place(args.place, pair)
    space = HomogeneousSpace.of(dp, pair)
    gen = locally_solvable_generic(space, place)
    rule = locally_solvable_rules(space, place)
    out = {"p": pair.p, "pair": dp.label(), "place": str(place), "verdict": gen.verdict,
           "generic": gen.to_dict(), "rules": rule.to_dict() if rule else "not-covered"}
    if args.format == "json":
        print(render_json(out))
    else:
        print(f"{dp.label()} at {place}: {gen.verdict}")
        print(f"  generic: {json.dumps(gen.evidence)}")
        print(f"  rules:   {json.dumps(out['rules'] if rule is None else rule.evidence)}")
    return EXIT_OK


def cmd_classno(args) -> int:
    d = _int_arg(args.d, "d")
    try:
        cert = class_number(d)
    except InvalidArgument as exc:
        raise UsageError(str(exc))
    if args.format == "json":
        print(render_json(cert.to_dict()))
    else:
        print(f"h(Q(sqrt {d})) = {cert.h}, narrow {cert.h_narrow}, N(eps) = {cert.fundamental_unit_norm}")
    return EXIT_OK


def cmd_table(args) -> int:
    max_p = _int_arg(args.max_p, "max_p")
    ps = [fp.p for fp in scan(2, max_p)]
    reports = reports_for(ps, args)
    if args.format == "json":
        print(render_json(table_rows(reports)))
    else:
        print(_md_table(reports))
    return EXIT_OK if all(r.confirmed for r in reports) else EXIT_VIOLATION


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("json", "md"), default=argparse.SUPPRESS)
    common.add_argument("--cache", default=argparse.SUPPRESS, help="JSONL cache path (env HERON_CACHE)")
    common.add_argument("--curve-bound", type=int, default=argparse.SUPPRESS)
    common.add_argument("--space-bound", type=int, default=argparse.SUPPRESS)
    common.add_argument("--sanity-bound", type=int, default=argparse.SUPPRESS)
    common.add_argument("--jobs", type=int, default=argparse.SUPPRESS)
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)

    parser = _Parser(prog="heron-descent", parents=[common], description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("verify", parents=[common], help="full descent for one p")
    s.add_argument("p")
    s.set_defaults(func=cmd_verify)
    s = sub.add_parser("scan", parents=[common], help="family primes in [lo, hi]")
    s.add_argument("lo")
    s.add_argument("hi")
    s.set_defaults(func=cmd_scan)
    s = sub.add_parser("selmer", parents=[common], help="2-Selmer group for one p")
    s.add_argument("p")
    s.set_defaults(func=cmd_selmer)
    s = sub.add_parser("local", parents=[common], help="local solvability of one space at one place")
    s.add_argument("p")
    s.add_argument("b1")
    s.add_argument("b2")
    s.add_argument("--place", required=True)
    s.set_defaults(func=cmd_local)
    s = sub.add_parser("classno", parents=[common], help="class number of Q(sqrt d)")
    s.add_argument("d")
    s.set_defaults(func=cmd_classno)
    s = sub.add_parser("table", parents=[common], help="rank / Selmer / Sha[2] table up to max_p")
    s.add_argument("max_p")
    s.set_defaults(func=cmd_table)
    return parser


_DEFAULTS = {"format": "md", "cache": None, "curve_bound": 1000, "space_bound": 10**4,
             "sanity_bound": 100, "jobs": 1, "verbose": False}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for k, v in _DEFAULTS.items():
        if not hasattr(args, k):
            setattr(args, k, v)
    if args.cache is None:
        args.cache = os.environ.get("HERON_CACHE")
    logging.basicConfig(stream=sys.stderr, level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if min(args.curve_bound, args.space_bound, args.sanity_bound, args.jobs) < 1:
        print("heron-descent: bounds and --jobs must be positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"heron-descent: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
