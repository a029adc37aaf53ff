"""Command-line front end.

Exit codes: 0 success / all properties pass, 1 property violation,
2 usage or configuration error.

When both a file and a flag give the same input, the file wins:
``--class-file`` overrides ``--class``/``--ample``, and a JSON path given to
``--lattice`` is read as a lattice config.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from .errors import GonlatError
from .invariants import MU_MODES, dm_min, full_report, mu, phi
from .lattice import Lattice, is_two_divisible, load_lattice, polarize, pullback
from .verification import SuiteConfig, rows_to_csv, rows_to_json, run_suite, survey


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _int_list(flag: str, text: str) -> list[int]:
    if not text or any(c.isspace() for c in text):
        raise UsageError(f"{flag}: expected comma-separated integers without spaces, got {text!r}")
    try:
        return [int(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"{flag}: expected comma-separated integers, got {text!r}") from None


def _vector(flag: str, text: str, L: Lattice) -> list[int]:
    v = _int_list(flag, text)
    if len(v) != L.rank:
        raise UsageError(f"{flag}: expected {L.rank} integers for this lattice, got {len(v)}")
    return v


def _box(text: str, L: Lattice) -> int | tuple[int, ...]:
    v = _int_list("--box", text)
    if len(v) == 1:
        return v[0]
    if len(v) != L.rank:
        raise UsageError(f"--box: give one bound or {L.rank} bounds, got {len(v)}")
    return tuple(v)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gonlat", description="Gonality invariants on Enriques/K3 lattices.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, fmt=("text", "json")):
        sp.add_argument("--lattice", default="enriques_num",
                        help="preset name or path to a JSON lattice config")
        sp.add_argument("--format", choices=fmt, default="text")

    def klass(sp):
        sp.add_argument("--class", dest="klass", help="class coordinates, e.g. 2,3,0,0")
        sp.add_argument("--ample", help="reference ample class (default e+f)")
        sp.add_argument("--class-file", help="JSON with 'class' and optional 'ample'")
        sp.add_argument("--mu-mode", choices=MU_MODES, default="kl1_full")

    sp = sub.add_parser("invariants", help="full invariant report for one class")
    common(sp)
    klass(sp)
    sp.add_argument("--no-dm", action="store_true", help="skip the Clifford divisor search")

    sp = sub.add_parser("witness", help="minimizing classes with their pairings")
    common(sp)
    klass(sp)
    sp.add_argument("--mu-cap", type=int, help="search mu up to this value")
    sp.add_argument("--dm-cap", type=int, help="Clifford divisor search cap")

    sp = sub.add_parser("lattice", help="Gram matrix, signature, two-divisibility")
    common(sp)

    for name in ("verify", "survey"):
        sp = sub.add_parser(name, help=f"{name} over seeded sample classes")
        common(sp, ("text", "json", "csv") if name == "survey" else ("text", "json"))
        sp.add_argument("--mu-mode", choices=MU_MODES, default="kl1_full")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--count", type=int, default=500)
        sp.add_argument("--norm-cap", type=int, default=60)
        sp.add_argument("--box", help="one bound or one bound per coordinate")
        sp.add_argument("--ample", help="reference ample class (default e+f)")
        if name == "verify":
            sp.add_argument("--dm-norm-cap", type=int,
                            help="only run the Clifford divisor check for C^2 up to this")
    return p


def _polarized(args, L: Lattice):
    klass, ample = args.klass, args.ample
    if args.class_file:
        try:
            with open(args.class_file, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"--class-file: {exc}") from None
        if "class" not in data:
            raise UsageError("--class-file: missing 'class'")
        klass = ",".join(str(x) for x in data["class"])
        if data.get("ample") is not None:
            ample = ",".join(str(x) for x in data["ample"])
    if klass is None:
        raise UsageError("--class is required")
    C = _vector("--class", klass, L)
    h = _vector("--ample", ample, L) if ample else None
    try:
        return polarize(L, C, h)
    except GonlatError as exc:
        raise UsageError(f"--class: {exc}") from None


def _text(d: dict) -> str:
    width = max(len(k) for k in d)
    return "\n".join(f"{k:<{width}}  {v}" for k, v in d.items())


def _cmd_invariants(args, L, out):
    C = _polarized(args, L)
    rep = full_report(C, args.mu_mode, with_dm=not args.no_dm)
    d = rep.to_json()
    out.write(json.dumps(d) + "\n" if args.format == "json" else _text(d) + "\n")
    return 0


def _cmd_witness(args, L, out):
    C = _polarized(args, L)
    ph, F = phi(C)
    d = {"phi": {"value": ph, "witness": list(F.coords), "pairing": F.dot(C.vector)}}
    cap = args.mu_cap if args.mu_cap is not None else None
    from .invariants import hodge_floor
    floor = hodge_floor(4, C.self_int) - 2
    m = mu(C, args.mu_mode, max(cap if cap is not None else floor, floor))
    d["mu"] = {"value": m.to_json(),
               "witness": list(m.witness.coords) if m.witness is not None else None,
               "pairing": m.witness.dot(C.vector) if m.witness is not None else None}
    if C.lattice == load_lattice("enriques_num"):
        E = pullback(F)
        d["k3_elliptic"] = {"witness": list(E.coords), "pairing": E.dot(pullback(C.vector))}
        dm = dm_min(C, args.dm_cap if args.dm_cap is not None else 2 * ph - 2)
        if dm is not None:
            d["clifford_divisor"] = {"value": dm.value, "witness": list(dm.witness.coords),
                                     "square": dm.square,
                                     "pairing": dm.witness.dot(pullback(C.vector))}
    out.write(json.dumps(d) + "\n" if args.format == "json" else _text(d) + "\n")
    return 0


def _cmd_lattice(args, L, out):
    d = {"name": L.name, "rank": L.rank, "gram": [list(r) for r in L.gram],
         "signature": list(L.signature), "determinant": L.determinant,
         "even": L.is_even, "two_divisible": is_two_divisible(L)}
    if args.format == "json":
        out.write(json.dumps(d) + "\n")
    else:
        rows = "\n".join("  " + " ".join(f"{x:3d}" for x in r) for r in L.gram)
        rest = {k: v for k, v in d.items() if k != "gram"}
        out.write(_text(rest) + "\ngram\n" + rows + "\n")
    return 0


def _suite_config(args, L) -> SuiteConfig:
    kw = dict(lattice=L, sample_count=args.count, norm_cap=args.norm_cap,
              rng_seed=args.seed, mu_mode=args.mu_mode)
    if args.box:
        kw["box"] = _box(args.box, L)
    elif L.rank != 10:
        kw["box"] = 3
    if args.ample:
        kw["ample_ref"] = tuple(_vector("--ample", args.ample, L))
    if getattr(args, "dm_norm_cap", None) is not None:
        kw["dm_norm_cap"] = args.dm_norm_cap
    return SuiteConfig(**kw)


def _cmd_verify(args, L, out):
    rep = run_suite(_suite_config(args, L))
    if args.format == "json":
        out.write(json.dumps(rep.to_json()) + "\n")
    else:
        out.write(f"generator {rep.generator} seed {args.seed} classes {rep.classes}\n")
        for name, c in rep.counts.items():
            status = "PASS" if c["fail"] == 0 else "FAIL"
            out.write(f"{status} {name}: {c['pass']} pass, {c['fail']} fail\n")
        for v in rep.violations:
            out.write(f"violation {v.prop} class {list(v.coords)} oracle {v.oracle}\n")
    return rep.exit_code


def _cmd_survey(args, L, out):
    rows = survey(_suite_config(args, L))
    if args.format == "csv":
        out.write(rows_to_csv(rows))
    elif args.format == "json":
        out.write(rows_to_json(rows) + "\n")
    else:
        for r in rows:
            out.write(f"{r['coords']} C2={r['self_int']} phi={r['phi']} mu={r['mu']} "
                      f"gengon={r['gengon']} {'/'.join(r['achiever'])} "
                      f"k3_gon={r['k3_gonality']}\n")
    return 0


COMMANDS = {"invariants": _cmd_invariants, "witness": _cmd_witness, "lattice": _cmd_lattice,
            "verify": _cmd_verify, "survey": _cmd_survey}


def parse_and_run(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        err.write(f"gonlat: error: {exc}\n")
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        try:
            L = load_lattice(args.lattice)
        except GonlatError as exc:
            raise UsageError(f"--lattice: {exc}") from None
        return COMMANDS[args.command](args, L, out)
    except UsageError as exc:
        err.write(f"gonlat: error: {exc}\n")
        return 2
    except GonlatError as exc:
        err.write(f"gonlat: error: {type(exc).__name__}: {exc}\n")
        return 2


def main() -> None:
    sys.exit(parse_and_run())


if __name__ == "__main__":
    main()
