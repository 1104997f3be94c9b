"""Command-line front end over the library modules.

Subcommands: ``correlators`` (psi-class tables), ``order`` (Koszul order
of a named operator), ``verify`` (vanishing verdicts for a z-series and
the theorem cross-check), ``hodge`` (multicomplex verdicts, homotopy
transfer, gauge condition, induced family on homology), ``catalog``
(built-in algebras).

Rationals always print as ``p/q`` in lowest terms, and the same
invocation produces byte-identical output.  Exit codes: 0 on success —
including negative verdicts such as "fails", which are answers, not
errors; 2 on bad flags; 3 on unreadable or malformed input; 4 on input
that parses but violates a declared invariant; 5 when the theorem
cross-check finds a discrepancy between two routes that are proved to
agree (a bug signal).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from itertools import combinations_with_replacement

from .algebra import (
    ConstraintViolation,
    DimensionMismatch,
    PreconditionViolation,
)
from .catalog import entries as catalog_entries
from .catalog import get as catalog_get
from .catalog import names as catalog_names
from .correlators import (
    CorrelatorCache,
    genus0,
    genus0_keys,
    genus1,
    genus1_keys,
    sorted_tuples_with_sum,
)
from .givental import (
    CorrelatorFamily,
    GiventalSeries,
    stabilizes_genus0,
    stabilizes_genus01,
    theorem_crosscheck,
)
from .hodge import (
    DegreeMismatch,
    GaugeViolation,
    gauge_check,
    gauge_from_dict,
    hodge_vanishing_check,
    induced_cohft,
    is_comm_bv_infty,
    is_multicomplex,
    is_wheeled_comm_bv_infty,
    retract_from_dict,
    transfer_sum,
    validate_retract,
)
from .koszul import min_order
from .serialize import ParseError, load_algebra, operator_to_dict


class UsageError(Exception):
    """A flag value that none of the inputs can satisfy (exit 2)."""


# ---------------------------------------------------------------------------
# shared plumbing


def _load_algebra_arg(value: str):
    """An algebra file path, or the name of a catalog entry."""
    if os.path.exists(value):
        return load_algebra(value)
    if value in catalog_names():
        entry = catalog_get(value)
        return entry.algebra, dict(entry.operators)
    if os.sep in value or value.endswith(".json"):
        raise ParseError(f"no such file: {value}")
    raise UsageError(
        f"{value!r} is neither a file nor a catalog algebra "
        f"(catalog: {', '.join(catalog_names())})")


def _named_ops(ops: dict, csv: str, what: str):
    out = []
    for name in csv.split(","):
        name = name.strip()
        if name not in ops:
            raise UsageError(
                f"no operator named {name!r} for {what} "
                f"(available: {', '.join(sorted(ops)) or 'none'})")
        out.append(ops[name])
    return out


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1)


def _cache_path(args) -> str | None:
    return os.environ.get("GIVENTAL_CACHE") or args.cache


# ---------------------------------------------------------------------------
# correlators


def cmd_correlators(args) -> tuple[int, str]:
    if args.genus not in (0, 1):
        raise UsageError("--genus must be 0 or 1")
    path = _cache_path(args)
    cache = None
    if path:
        if os.path.exists(path):
            try:
                cache = CorrelatorCache.load(path)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}: {exc}") from exc
        else:
            cache = CorrelatorCache()
    rows = []
    if args.genus == 0:
        for n in range(3, args.n_max + 1):
            for d in genus0_keys(n):
                v = genus0(d)
                if v:
                    rows.append((0, tuple(sorted(d, reverse=True)), v))
    else:
        for n in range(1, args.n_max + 1):
            for d in genus1_keys(n):
                v = genus1(d, cache)
                if v:
                    rows.append((1, tuple(sorted(d, reverse=True)), v))
    rows.sort(key=lambda r: (len(r[1]), r[1]))
    if path:
        cache.save(path)
    if args.format == "json":
        lines = [json.dumps({"genus": g, "d": list(d), "value": str(v)},
                            sort_keys=True)
                 for g, d, v in rows]
        return 0, "\n".join(lines)
    return 0, "\n".join(f"{g}; {','.join(map(str, d))}; {v}" for g, d, v in rows)


# ---------------------------------------------------------------------------
# order


def cmd_order(args) -> tuple[int, str]:
    A, ops = _load_algebra_arg(args.algebra)
    (D,) = _named_ops(ops, args.operator, "--operator")
    rep = min_order(A, D, args.l_max, name=args.operator)
    if args.format == "json":
        return 0, _dump({
            "operator": args.operator,
            "l_max": rep.l_max,
            "minimal_order": rep.minimal_order,
            "witnesses": {str(m): list(t) for m, t in sorted(rep.witnesses.items())},
        })
    lines = []
    if rep.minimal_order is None:
        lines.append(f"operator {args.operator}: exceeds {rep.l_max}")
    else:
        lines.append(f"operator {args.operator}: minimal order {rep.minimal_order}")
    for m in sorted(rep.witnesses):
        t = rep.witnesses[m]
        lines.append(f"  bracket_{m + 1} nonzero at ({','.join(map(str, t))})")
    return 0, "\n".join(lines)


# ---------------------------------------------------------------------------
# verify


def _render_verdict(verdict) -> list[str]:
    lines = []
    for item in verdict.to_json():
        if item["status"] == "stabilizes":
            lines.append(f"l={item['l']}: stabilizes")
        else:
            lines.append(f"l={item['l']}: fails "
                         f"{json.dumps(item['witness'], sort_keys=True)}")
    return lines


def cmd_verify(args) -> tuple[int, str]:
    A, ops = _load_algebra_arg(args.algebra)
    series = GiventalSeries(tuple(_named_ops(ops, args.series, "--series")))
    floor = 3 if args.mode == "genus0" else 1
    if args.n_max < floor:
        raise UsageError(f"--n-max must be at least {floor} for {args.mode}")
    if args.mode == "genus0":
        verdict = stabilizes_genus0(A, series, args.n_max)
        report = None
    elif args.mode == "genus01":
        verdict = stabilizes_genus01(A, series, args.n_max)
        report = None
    else:
        verdict = stabilizes_genus01(A, series, args.n_max)
        report = theorem_crosscheck(A, series, args.n_max)
    code = 5 if report is not None and not report.ok else 0
    if args.format == "json":
        payload: dict = {"verdict": verdict.to_json()}
        if report is not None:
            payload["crosscheck"] = report.to_dict()
        return code, _dump(payload)
    lines = _render_verdict(verdict)
    if report is not None:
        for entry in report.entries:
            lines.append(
                "crosscheck l={l}: f_vanishes={f_vanishes} order_le_l={order_le_l} "
                "g_vanishes={g_vanishes} trace_ok={trace_ok}".format(**entry))
        for d in report.discrepancies:
            lines.append(f"DISCREPANCY l={d['l']} {d['rule']}: {d['detail']}")
        if report.ok:
            lines.append("crosscheck: no discrepancies")
    return code, "\n".join(lines)


# ---------------------------------------------------------------------------
# hodge


def _induced_table(fam, n_max: int):
    dim = fam.algebra.dim
    g0_rows = []
    for n in range(1, n_max + 1):
        for d0 in range(0, max(n - 1, 1)):
            for s in range(0, max(n - 1 - d0, 1)):
                for d in sorted_tuples_with_sum(n, s):
                    for t in combinations_with_replacement(range(dim), n):
                        val = fam.g0_value(d0, d, t)
                        for k in sorted(val):
                            g0_rows.append({
                                "d0": d0, "d": list(d), "t": list(t),
                                "k": k, "value": str(val[k]),
                            })
    g1_rows = []
    for n in range(1, n_max + 1):
        for s in range(0, n + 1):
            for d in sorted_tuples_with_sum(n, s):
                for t in combinations_with_replacement(range(dim), n):
                    v = fam.g1_value(d, t)
                    if v:
                        g1_rows.append({"d": list(d), "t": list(t), "value": str(v)})
    return {
        "degrees": list(fam.algebra.space.degrees),
        "g0": g0_rows,
        "g1": g1_rows,
    }


def cmd_hodge(args) -> tuple[int, str]:
    A, named = _load_algebra_arg(args.algebra)
    ops = tuple(_named_ops(named, args.ops, "--ops"))
    report: dict = {}
    mc = is_multicomplex(ops)
    report["multicomplex"] = {"ok": mc.ok}
    if not mc.ok:
        n, S = mc.witness
        report["multicomplex"]["witness_n"] = n
        report["multicomplex"]["witness"] = operator_to_dict(S)
    report["comm_bv_infty"] = is_comm_bv_infty(A, ops)
    report["wheeled_comm_bv_infty"] = is_wheeled_comm_bv_infty(A, ops)

    retract = None
    if args.retract:
        retract = retract_from_dict(_load_json(args.retract), A.dim)
        valid = validate_retract(retract, ops[0])
        report["retract_valid"] = valid
        transfers = {}
        for n in range(1, args.n_max + 1):
            T = transfer_sum(ops, retract, n)
            transfers[str(n)] = {"zero": T.is_zero(), **operator_to_dict(T)}
        report["transfer"] = transfers
        if valid:
            hv = hodge_vanishing_check(ops, retract, args.n_max)
            report["hodge_vanishing"] = {"ok": hv.ok}
            if not hv.ok:
                report["hodge_vanishing"]["first_nonzero_n"] = hv.witness[0]

    gauge = None
    if args.gauge:
        gauge = gauge_from_dict(_load_json(args.gauge), A.dim)
        gc = gauge_check(ops, gauge)
        report["gauge"] = {"ok": gc.ok}
        if not gc.ok:
            report["gauge"]["first_bad_power"] = gc.witness[0]

    if args.induced:
        if retract is None or gauge is None:
            raise UsageError("--induced needs both --retract and --gauge")
        fam = induced_cohft(A, ops, gauge, retract, args.n_max)
        report["induced"] = _induced_table(fam, args.n_max)

    if args.format == "json":
        return 0, _dump(report)
    lines = []
    mcr = report["multicomplex"]
    lines.append("multicomplex: " + ("ok" if mcr["ok"]
                                     else f"fails at n={mcr['witness_n']}"))
    lines.append(f"comm-bv-infinity: {report['comm_bv_infty']}")
    lines.append(f"wheeled: {report['wheeled_comm_bv_infty']}")
    if "retract_valid" in report:
        lines.append(f"retract valid: {report['retract_valid']}")
        for n, T in sorted(report["transfer"].items(), key=lambda kv: int(kv[0])):
            lines.append(f"transfer z^{n}: " + ("0" if T["zero"] else "nonzero"))
        if "hodge_vanishing" in report:
            hvr = report["hodge_vanishing"]
            lines.append("hodge vanishing: " +
                         ("ok" if hvr["ok"]
                          else f"first nonzero at n={hvr['first_nonzero_n']}"))
    if "gauge" in report:
        gr = report["gauge"]
        lines.append("gauge: " + ("ok" if gr["ok"]
                                  else f"differs at z^{gr['first_bad_power']}"))
    if "induced" in report:
        tab = report["induced"]
        lines.append(f"induced family on H, degrees {tuple(tab['degrees'])}:")
        for row in tab["g0"]:
            lines.append("g0; {d0}; {d}; {t}; {k}; {value}".format(
                d0=row["d0"], d=",".join(map(str, row["d"])),
                t=",".join(map(str, row["t"])), k=row["k"], value=row["value"]))
        for row in tab["g1"]:
            lines.append("g1; {d}; {t}; {value}".format(
                d=",".join(map(str, row["d"])),
                t=",".join(map(str, row["t"])), value=row["value"]))
    return 0, "\n".join(lines)


# ---------------------------------------------------------------------------
# catalog


def cmd_catalog(args) -> tuple[int, str]:
    if args.format == "json":
        return 0, _dump([{
            "name": e.name,
            "dim": e.algebra.dim,
            "degrees": list(e.algebra.space.degrees),
            "operators": sorted(e.operators),
            "summary": e.summary,
        } for e in catalog_entries()])
    lines = []
    for e in catalog_entries():
        ops = ", ".join(sorted(e.operators)) or "-"
        degs = ",".join(map(str, e.algebra.space.degrees))
        lines.append(f"{e.name}: dim {e.algebra.dim}, degrees ({degs}); "
                     f"operators: {ops}")
        lines.append(f"    {e.summary}")
    return 0, "\n".join(lines)


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="cohft",
        description="exact-rational correlator and operator-hierarchy workbench")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, cache=False, seed=False):
        sp.add_argument("--format", choices=("text", "json"), default="text")
        if cache:
            sp.add_argument("--cache", default=None,
                            help="correlator cache file (GIVENTAL_CACHE overrides)")
        if seed:
            sp.add_argument("--seed", type=int, default=0,
                            help="seed echoed into reports for reproducibility")

    sp = sub.add_parser("correlators", help="psi-class correlator table")
    sp.add_argument("--genus", type=int, required=True)
    sp.add_argument("--n-max", type=int, required=True)
    common(sp, cache=True)
    sp.set_defaults(func=cmd_correlators)

    sp = sub.add_parser("order", help="Koszul order of a named operator")
    sp.add_argument("--algebra", required=True,
                    help="algebra file or catalog name")
    sp.add_argument("--operator", required=True)
    sp.add_argument("--l-max", type=int, default=6)
    common(sp)
    sp.set_defaults(func=cmd_order)

    sp = sub.add_parser("verify", help="vanishing verdicts for a z-series")
    sp.add_argument("--algebra", required=True)
    sp.add_argument("--series", required=True,
                    help="comma-separated operator names, levels 1,2,...")
    sp.add_argument("--n-max", type=int, default=6)
    sp.add_argument("--mode", choices=("genus0", "genus01", "crosscheck"),
                    default="crosscheck")
    common(sp, seed=True)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("hodge", help="multicomplex, transfer and gauge checks")
    sp.add_argument("--algebra", required=True)
    sp.add_argument("--ops", required=True,
                    help="comma-separated operator names D_1,D_2,...")
    sp.add_argument("--retract", default=None, help="retract JSON file")
    sp.add_argument("--gauge", default=None, help="gauge series JSON file")
    sp.add_argument("--n-max", type=int, default=4)
    sp.add_argument("--induced", action="store_true",
                    help="emit the induced family on homology")
    common(sp)
    sp.set_defaults(func=cmd_hodge)

    sp = sub.add_parser("catalog", help="list built-in algebras")
    common(sp)
    sp.set_defaults(func=cmd_catalog)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        code, out = args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ConstraintViolation, DimensionMismatch, DegreeMismatch,
            GaugeViolation, PreconditionViolation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except ValueError as exc:
        # e.g. a cache file whose stored values contradict the closed formula
        print(f"error: {exc}", file=sys.stderr)
        return 4
    if out:
        print(out)
    return code


if __name__ == "__main__":
    sys.exit(main())
