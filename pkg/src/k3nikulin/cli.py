"""Command-line entry point.

Exit codes: 0 success, 1 input/output problems, 2 domain errors (the JSON
error object names the offending place), 3 a failed isogeny identity.
"""

from __future__ import annotations

import argparse
import json
import logging
import random
import sys
from fractions import Fraction
from pathlib import Path

from .errors import DomainError
from .families import FamilySpec, build_family, genericity_problems, glue_report, paper_tables
from .lattice import IntLattice, discriminant_form, isotropic_reductions, standard_lattice
from .search import admissible_d_search, degeneration_report, torsion_bound_filter
from .surface import (
    TwoTorsionSurface,
    quotient_configuration_crosscheck,
    quotient_surface,
    random_surface,
    surface_report,
    verify_isogeny,
)

log = logging.getLogger("k3nikulin")

EXIT_IO, EXIT_DOMAIN, EXIT_IDENTITY = 1, 2, 3


class InputError(Exception):
    pass


def _load_json(path: str):
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
        return json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _load_surface(path: str) -> TwoTorsionSurface:
    data = _load_json(path)
    if not isinstance(data, dict) or "a" not in data or "b" not in data:
        raise InputError(f"{path}: expected an object with keys 'a' and 'b'")
    try:
        return TwoTorsionSurface.from_json(data)
    except DomainError:
        raise
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise InputError(f"{path}: bad coefficient: {exc}") from exc


# Subcommands. Each returns (payload, exit_code).


def cmd_classify(args) -> tuple[dict, int]:
    if args.random:
        rng = random.Random(args.seed)
        for _ in range(1000):
            s = random_surface(rng)
            if s is None:
                continue
            try:
                return surface_report(s, args.mw_rank).to_json(), 0
            except DomainError:
                continue
        raise InputError("no classifiable random surface in 1000 draws")
    if not args.file:
        raise InputError("classify needs a surface file or --random")
    return surface_report(_load_surface(args.file), args.mw_rank).to_json(), 0


def cmd_quotient(args) -> tuple[dict, int]:
    s = _load_surface(args.file)
    y = quotient_surface(s)
    return {
        "x": surface_report(s, args.mw_rank).to_json(),
        "y": surface_report(y, args.mw_rank).to_json(),
        "crosscheck": quotient_configuration_crosscheck(s),
    }, 0


def cmd_lattice(args) -> tuple[dict, int]:
    if args.standard:
        kind, _, param = args.standard.partition(":")
        try:
            lat = standard_lattice(kind, int(param) if param else None)
        except (KeyError, ValueError) as exc:
            raise InputError(f"unknown standard lattice {args.standard!r}") from exc
    elif args.file:
        data = _load_json(args.file)
        gram = data["gram"] if isinstance(data, dict) else data
        try:
            lat = IntLattice(tuple(tuple(int(x) for x in row) for row in gram))
        except (TypeError, ValueError) as exc:
            raise InputError(f"{args.file}: expected an integer Gram matrix") from exc
    else:
        raise InputError("lattice needs a Gram file or --standard KIND[:PARAM]")
    if args.scale != 1:
        from .lattice import rescale

        lat = rescale(lat, args.scale)
    form = discriminant_form(lat)
    out = {
        "rank": lat.rank,
        "det": lat.det,
        "even": lat.is_even,
        "discriminant_form": form.to_json(),
        "group": form.group_name(),
    }
    if args.reductions:
        out["isotropic_reductions"] = [
            {"group_name": r.group_name(), **r.to_json()} for r in isotropic_reductions(form)
        ]
    return out, 0


def cmd_theorem_search(args) -> tuple[dict, int]:
    if args.mw_rank:
        # The determinant equations of the battery hold only without sections of infinite order.
        raise InputError("theorem-search is defined for --mw-rank 0 only")
    result = admissible_d_search()
    if args.torsion_filter:
        result.torsion_filter = torsion_bound_filter(baseline=set(result.admissible))
    out = result.to_json()
    out["mw_rank_assumed"] = 0
    if args.degenerations:
        out["degenerations"] = {str(d): degeneration_report(d, result) for d in sorted(result.admissible)}
    return out, 0


def cmd_isogeny_check(args) -> tuple[dict, int]:
    s = _load_surface(args.file)
    try:
        t0s = [Fraction(t) for t in args.t0]
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"bad --t0 value: {exc}") from exc
    checks = [verify_isogeny(s, t) for t in t0s]
    ok = all(c["ok"] for c in checks)
    if not any(c["points"] for c in checks):
        log.warning("no rational points found on the requested fibers; only the kernel was checked")
    return {"surface": s.to_json(), "checks": checks, "ok": ok}, 0 if ok else EXIT_IDENTITY


def cmd_family(args) -> tuple[dict, int]:
    if args.kind == "Xd":
        spec = FamilySpec.xd(args.index, args.P or (1, 1, 0, 1))
    else:
        spec = FamilySpec.xprime(args.index, *(args.params or (0, 1, 1)))
    x = build_family(spec)
    out = {
        "family": spec.label(),
        "genericity_problems": genericity_problems(spec),
        "x": surface_report(x, args.mw_rank).to_json(),
        "y": surface_report(quotient_surface(x), args.mw_rank).to_json(),
        "crosscheck": quotient_configuration_crosscheck(x),
    }
    if spec.family == "XPrime" or 1 <= spec.index <= 6:
        out["gamma"] = glue_report(spec).to_json()
    return out, 0


def cmd_paper_tables(args) -> tuple[dict, int]:
    return paper_tables(), 0


COMMANDS = {
    "classify": cmd_classify,
    "quotient": cmd_quotient,
    "lattice": cmd_lattice,
    "theorem-search": cmd_theorem_search,
    "isogeny-check": cmd_isogeny_check,
    "family": cmd_family,
    "paper-tables": cmd_paper_tables,
}


# Text rendering.


def _flatten(obj, prefix: str = "") -> list[tuple[str, str]]:
    if isinstance(obj, dict):
        rows = []
        for k in sorted(obj):
            rows.extend(_flatten(obj[k], f"{prefix}.{k}" if prefix else str(k)))
        return rows
    if isinstance(obj, list) and any(isinstance(x, (dict, list)) for x in obj):
        rows = []
        for i, x in enumerate(obj):
            rows.extend(_flatten(x, f"{prefix}[{i}]"))
        return rows
    if isinstance(obj, list):
        return [(prefix, ", ".join(str(x) for x in obj))]
    return [(prefix, "null" if obj is None else str(obj))]


def _table(header: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(str(r[i])) for r in [header, *rows]) for i in range(len(header))]
    lines = ["  ".join(str(c).ljust(w) for c, w in zip(header, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(str(c).ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows]
    return "\n".join(lines)


def _render_paper_tables(data: dict) -> str:
    ft = data["fiber_table"]
    cols = ft["columns"]
    parts = [_table(["place", *cols], [[name, *(row[c] for c in cols)] for name, row in ft["rows"].items()])]
    det = data["determinants"]
    parts.append(_table(
        ["surface", "configuration", "picard", "torsion", "det NS"],
        [[r["surface"], r["configuration"], r["picard"], r["torsion"], r["det_ns"]] for r in det],
    ))
    parts.append(_table(
        ["surface", "Gamma^2", "order", "in dual", "Gamma.sigma", "det NS"],
        [[g["surface"], g["gamma_norm"], g["gamma_order"], g["in_dual"], g["gamma_dot_sigma"], g["det_ns"]]
         for g in data["gamma"]],
    ))
    parts.append(_table(
        ["d", "start", "candidates", "compatible"],
        [[o["d"], o["start"], "; ".join(o["candidates"]), "; ".join(o["compatible"])] for o in data["overlattice"]],
    ))
    rest = {k: data[k] for k in ("delta", "genericity", "notes")}
    parts.append(_table(["key", "value"], [list(r) for r in _flatten(rest)]))
    return "\n\n".join(parts)


def render(command: str, payload: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(payload, sort_keys=True, indent=2)
    if command == "paper-tables" and "fiber_table" in payload:
        return _render_paper_tables(payload)
    return _table(["key", "value"], [list(r) for r in _flatten(payload)])


# Argument parsing.


def _common(defaults: bool) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    kw = {} if defaults else {"default": argparse.SUPPRESS}
    p.add_argument("--format", choices=("json", "text"), **({"default": "json"} if defaults else kw))
    p.add_argument("--mw-rank", type=int, **({"default": 0} if defaults else kw),
                   help="assumed Mordell-Weil rank (default 0)")
    p.add_argument("--seed", type=int, **({"default": 0} if defaults else kw),
                   help="seed for random surfaces")
    p.add_argument("-v", "--verbose", action="store_true", **({} if defaults else kw))
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="k3nikulin",
        description="Fibers, quotients and lattices of K3 surfaces y^2 = x(x^2 + a x + b).",
        parents=[_common(True)],
    )
    sub = parser.add_subparsers(dest="command", required=True)
    common = [_common(False)]

    p = sub.add_parser("classify", parents=common, help="singular fibers and lattice invariants")
    p.add_argument("file", nargs="?", help='surface JSON {"a": [...], "b": [...]}, or - for stdin')
    p.add_argument("--random", action="store_true", help="classify a random surface drawn with --seed")

    p = sub.add_parser("quotient", parents=common, help="the quotient by translation by (0, 0)")
    p.add_argument("file")

    p = sub.add_parser("lattice", parents=common, help="determinant and discriminant form of a Gram matrix")
    p.add_argument("file", nargs="?", help="JSON integer Gram matrix, or {\"gram\": ...}")
    p.add_argument("--standard", help="named lattice such as A:2, D:4, E8, U, Md:5, Nikulin")
    p.add_argument("--scale", type=int, default=1, help="multiply the form by this integer")
    p.add_argument("--reductions", action="store_true", help="list the isotropic reductions")

    p = sub.add_parser("theorem-search", parents=common, help="admissible d from the fiber-configuration search")
    p.add_argument("--torsion-filter", action="store_true", help="also re-run with torsion of order 8 and 16")
    p.add_argument("--degenerations", action="store_true", help="add the confluence chains for each d")

    p = sub.add_parser("isogeny-check", parents=common, help="verify phi_hat o phi = [2] on fibers")
    p.add_argument("file")
    p.add_argument("--t0", nargs="+", required=True, help="rational parameters of smooth fibers")

    p = sub.add_parser("family", parents=common, help="X(d, P) or X'_n with its quotient")
    p.add_argument("kind", choices=("Xd", "XPrime"))
    p.add_argument("index", type=int, help="d for Xd, n for XPrime")
    p.add_argument("--P", nargs=4, metavar="C", help="cubic P, ascending coefficients (Xd)")
    p.add_argument("--params", nargs=3, metavar="A", help="a1 a2 a3 (XPrime)")

    sub.add_parser("paper-tables", parents=common, help="regenerate the family tables for P = t^3 + t + 1")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.mw_rank < 0:
            raise InputError("--mw-rank must be non-negative")
        payload, code = COMMANDS[args.command](args)
    except DomainError as exc:
        print(json.dumps(exc.to_json(), sort_keys=True, indent=2))
        return EXIT_DOMAIN
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(render(args.command, payload, args.format))
    return code


if __name__ == "__main__":
    sys.exit(main())
