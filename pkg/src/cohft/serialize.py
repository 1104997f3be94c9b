r"""JSON wire format for algebras, operators and rationals.

Rationals travel as strings ``"p"`` or ``"p/q"`` in lowest terms with a
positive denominator; anything else (``"2/4"``, ``"1/-2"``, ``"1/0"``,
``"+3"``, ``"007"``, floats) is rejected.  An algebra file looks like::

    {
      "dim": 3,
      "degrees": [0, 0, 0],
      "mult": [[0, 0, 0, "1"], [0, 1, 1, "1"], ...],   # sparse (i, j, k, coeff)
      "operators": {
        "d_dx": {"degree": 0, "matrix": [["0", "1", "0"], ...]}
      }
    }

``mult`` lists only the nonzero structure constants; duplicate (i, j, k)
entries are rejected.  Operator matrices are dense, row-major, square and
validated against the degree pattern.
"""

from __future__ import annotations

import json
import re
from fractions import Fraction
from math import gcd

from .algebra import GradedAlgebra, GradedVectorSpace, LinOp, check_linop, make_algebra


class ParseError(ValueError):
    """Malformed input file or rational literal."""


_RATIONAL_RE = re.compile(r"^-?(0|[1-9][0-9]*)(/([1-9][0-9]*))?$")


def parse_rational(s) -> Fraction:
    """Parse a canonical ``"p"`` or ``"p/q"`` string.

    >>> parse_rational("-7/3")
    Fraction(-7, 3)
    >>> parse_rational("2/4")
    Traceback (most recent call last):
        ...
    cohft.serialize.ParseError: rational '2/4' is not in lowest terms
    """
    if not isinstance(s, str):
        raise ParseError(f"rational must be a string, got {type(s).__name__}")
    m = _RATIONAL_RE.match(s)
    if not m:
        raise ParseError(f"malformed rational {s!r} (want 'p' or 'p/q', q > 0)")
    if "/" in s:
        p, q = s.split("/")
        if gcd(int(p), int(q)) != 1:
            raise ParseError(f"rational {s!r} is not in lowest terms")
        if p in ("0", "-0"):
            raise ParseError(f"rational {s!r} is not in lowest terms")
    return Fraction(s)


def format_rational(x: Fraction) -> str:
    """Inverse of parse_rational; Fraction's str() is already canonical."""
    return str(Fraction(x))


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ParseError(msg)


def algebra_from_dict(data: dict) -> tuple[GradedAlgebra, dict[str, LinOp]]:
    """Build a validated algebra and its named operators from parsed JSON.

    Raises :class:`ParseError` for schema problems; constraint failures
    from :func:`~cohft.algebra.make_algebra` propagate unchanged.
    """
    _require(isinstance(data, dict), "top level must be an object")
    _require("dim" in data and "degrees" in data and "mult" in data,
             "need 'dim', 'degrees' and 'mult'")
    dim = data["dim"]
    _require(isinstance(dim, int) and dim >= 1, "'dim' must be a positive integer")
    degrees = data["degrees"]
    _require(isinstance(degrees, list) and len(degrees) == dim
             and all(isinstance(d, int) for d in degrees),
             "'degrees' must be a list of dim integers")
    space = GradedVectorSpace(tuple(degrees))

    c = [[[Fraction(0)] * dim for _ in range(dim)] for _ in range(dim)]
    seen = set()
    _require(isinstance(data["mult"], list), "'mult' must be a list")
    for entry in data["mult"]:
        _require(isinstance(entry, list) and len(entry) == 4,
                 f"mult entry {entry!r} must be [i, j, k, coeff]")
        i, j, k, coeff = entry
        _require(all(isinstance(x, int) and 0 <= x < dim for x in (i, j, k)),
                 f"mult entry {entry!r} has indices outside 0..{dim - 1}")
        _require((i, j, k) not in seen, f"duplicate mult entry for {(i, j, k)}")
        seen.add((i, j, k))
        c[i][j][k] = parse_rational(coeff)
    A = make_algebra(space, c)

    ops: dict[str, LinOp] = {}
    named = data.get("operators", {})
    _require(isinstance(named, dict), "'operators' must be an object")
    for name, obj in named.items():
        ops[name] = operator_from_dict(obj, space)
    return A, ops


def operator_from_dict(obj: dict, space: GradedVectorSpace | None = None,
                       rows: int | None = None, cols: int | None = None):
    """Parse one ``{"degree": .., "matrix": ..}`` object.

    With ``space`` given, the matrix must be square of the right size and
    is validated as a LinOp.  With explicit ``rows``/``cols`` the matrix
    may be rectangular (retract maps) and is returned as a plain tuple of
    tuples together with its degree.
    """
    _require(isinstance(obj, dict) and "degree" in obj and "matrix" in obj,
             "operator needs 'degree' and 'matrix'")
    _require(isinstance(obj["degree"], int), "'degree' must be an integer")
    matrix = obj["matrix"]
    _require(isinstance(matrix, list) and all(isinstance(r, list) for r in matrix),
             "'matrix' must be a list of rows")
    parsed = tuple(tuple(parse_rational(x) for x in row) for row in matrix)
    if space is not None:
        _require(len(parsed) == space.dim and all(len(r) == space.dim for r in parsed),
                 f"operator matrix must be {space.dim}x{space.dim}")
        op = LinOp(parsed, obj["degree"])
        check_linop(space, op)
        return op
    _require(len(parsed) == rows and all(len(r) == cols for r in parsed),
             f"matrix must be {rows}x{cols}")
    return parsed, obj["degree"]


def algebra_to_dict(A: GradedAlgebra, operators: dict[str, LinOp] | None = None) -> dict:
    """Serialize an algebra (and optional operators) to the wire format."""
    dim = A.dim
    mult = []
    for i in range(dim):
        for j in range(dim):
            for k in range(dim):
                if A.c[i][j][k]:
                    mult.append([i, j, k, format_rational(A.c[i][j][k])])
    out: dict = {"dim": dim, "degrees": list(A.degrees), "mult": mult}
    if operators:
        out["operators"] = {
            name: operator_to_dict(op) for name, op in sorted(operators.items())
        }
    return out


def operator_to_dict(op: LinOp) -> dict:
    return {
        "degree": op.degree,
        "matrix": [[format_rational(x) for x in row] for row in op.matrix],
    }


def load_algebra(path) -> tuple[GradedAlgebra, dict[str, LinOp]]:
    """Read and validate an algebra file; ParseError on malformed JSON."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in {path}: {exc}") from exc
    return algebra_from_dict(data)


def dump_algebra(path, A: GradedAlgebra, operators: dict[str, LinOp] | None = None) -> None:
    with open(path, "w") as fh:
        json.dump(algebra_to_dict(A, operators), fh, indent=1, sort_keys=True)
        fh.write("\n")
