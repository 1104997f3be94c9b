"""Koszul bracket hierarchy, operator order, and trace compatibility.

For a linear operator D on a graded commutative algebra, the bracket
hierarchy starts at ``<f>_1 = D(f)`` and measures, level by level, how far
D is from being a derivation-like operator of bounded order: D has order
at most l exactly when the (l+1)-ary bracket vanishes identically.  The
brackets can be computed either by the defining recursion (:func:`bracket`)
or by a closed subset-sum formula (:func:`bracket_explicit`); both are kept
and compared because every sign convention in this package was fixed by
requiring them to agree on odd operators.

On top of the order filtration sit the trace conditions: an operator of
order at most l automatically satisfies ``str(<f_1,...,f_l> . (-)) = 0``
(:func:`trace_order_drop_check`), and for l >= 3 the sharper condition
``str(<f_1,...,f_{l-1}> . (-)) = 0`` (:func:`strong_compat_check`) singles
out the operators whose order effectively drops once a trace is present.

Truncation is a genuine source of order: d/dx is a derivation of C[x]
but *not* of C[x]/(x^k), because Leibniz fails on products that the
quotient kills (on C[x]/(x^3), ``<x, x^2> = D(x.x^2) - D(x).x^2 -
x.D(x^2) = -3x^2``).  The Euler operator ``x d/dx`` preserves x-degree,
so it stays a derivation after truncation:

>>> from fractions import Fraction
>>> from .algebra import GradedVectorSpace, make_algebra, linop
>>> sp = GradedVectorSpace((0, 0, 0))
>>> c = [[[0]*3 for _ in range(3)] for _ in range(3)]
>>> for i in range(3):
...     for j in range(3):
...         if i + j < 3:
...             c[i][j][i+j] = 1
>>> A = make_algebra(sp, c)
>>> euler = linop(sp, {(1, 1): 1, (2, 2): 2}, 0)   # x^j -> j x^j
>>> min_order(A, euler, 4).minimal_order
1
>>> ddx = linop(sp, {(0, 1): 1, (1, 2): 2}, 0)     # x -> 1, x^2 -> 2x
>>> min_order(A, ddx, 4).minimal_order
3
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement
from math import comb
from typing import NamedTuple, Sequence

from .algebra import (
    GradedAlgebra,
    LinOp,
    PreconditionViolation,
    apply_sparse,
    commutator,
    degree_of,
    homogeneous_components,
    mult_op,
    multiply,
    str_mult_vec,
    supertrace,
    unshuffle_sign,
    vec_add,
    vec_scale,
)

ZERO = Fraction(0)


class Check(NamedTuple):
    """Outcome of a basis-tuple identity check.

    ``witness`` is the first failing tuple in lexicographic order, or None
    when the check passed.  Truth value follows ``ok``.
    """

    ok: bool
    witness: tuple | None = None

    def __bool__(self) -> bool:
        return self.ok


# ---------------------------------------------------------------------------
# the bracket hierarchy


def _parity_of(space, v) -> int:
    d = degree_of(space, v)
    return 0 if d is None else d % 2


def _bracket_hom(A: GradedAlgebra, D: LinOp, fs: list) -> tuple:
    """Defining recursion on a list of homogeneous vectors."""
    if len(fs) == 1:
        return D.apply(fs[0])
    head, fl, fl1 = fs[:-2], fs[-2], fs[-1]
    t1 = _bracket_hom(A, D, head + [multiply(A, fl, fl1)])
    t2 = multiply(A, _bracket_hom(A, D, head + [fl]), fl1)
    t3 = multiply(A, fl, _bracket_hom(A, D, head + [fl1]))
    # moving f_l out to the left past D and f_1..f_{l-1}
    swap = _parity_of(A.space, fl) * (
        (D.degree + sum(_parity_of(A.space, f) for f in head)) % 2
    )
    out = vec_add(t1, vec_scale(-1, t2))
    return vec_add(out, vec_scale(1 if swap else -1, t3))


def bracket(A: GradedAlgebra, D: LinOp, fs: Sequence[Sequence[Fraction]]) -> tuple:
    """The n-ary Koszul bracket ``<f_1,...,f_n>_n^D``, by the recursion.

    Arguments may be inhomogeneous; they are split into homogeneous pieces
    first, since the signs depend on parities.
    """
    if not fs:
        raise PreconditionViolation("bracket needs at least one argument")
    parts = [homogeneous_components(A.space, f) for f in fs]
    total = A.space.zero_vector()
    stack = [[]]
    for p in parts:
        stack = [combo + [v] for combo in stack for _, v in p]
    for combo in stack:
        total = vec_add(total, _bracket_hom(A, D, combo))
    return total


def _bracket_explicit_hom(A: GradedAlgebra, D: LinOp, fs: list) -> tuple:
    l = len(fs)
    parities = tuple(_parity_of(A.space, f) for f in fs)
    total = A.space.zero_vector()
    for mask in range(1, 1 << l):
        ipos = tuple(p for p in range(l) if mask >> p & 1)
        jpos = tuple(p for p in range(l) if not mask >> p & 1)
        sign = unshuffle_sign(parities, ipos)
        if (l - len(ipos)) % 2:
            sign = -sign
        fI = fs[ipos[0]]
        for p in ipos[1:]:
            fI = multiply(A, fI, fs[p])
        term = D.apply(fI)
        for p in jpos:
            term = multiply(A, term, fs[p])
        total = vec_add(total, vec_scale(sign, term))
    return total


def bracket_explicit(A: GradedAlgebra, D: LinOp, fs: Sequence[Sequence[Fraction]]) -> tuple:
    """Same bracket as :func:`bracket`, via the subset-sum formula.

    ``<f_1,...,f_l> = sum over nonempty I of (-1)^(l-|I|) eps(I,J) D(f_I) f_J``
    where eps(I,J) is the Koszul sign of pulling the I-block to the front.
    """
    if not fs:
        raise PreconditionViolation("bracket needs at least one argument")
    parts = [homogeneous_components(A.space, f) for f in fs]
    total = A.space.zero_vector()
    stack = [[]]
    for p in parts:
        stack = [combo + [v] for combo in stack for _, v in p]
    for combo in stack:
        total = vec_add(total, _bracket_explicit_hom(A, D, combo))
    return total


def bracket_basis(A: GradedAlgebra, D: LinOp, idx: Sequence[int]) -> dict[int, Fraction]:
    """Sparse value of the bracket on a tuple of basis elements.

    This is the workhorse used by all exhaustive checks; it evaluates the
    subset-sum formula with cached basis products.
    """
    l = len(idx)
    if l == 0:
        raise PreconditionViolation("bracket needs at least one argument")
    parities = tuple(A.space.parity(i) for i in idx)
    total: dict[int, Fraction] = {}
    for mask in range(1, 1 << l):
        ipos = tuple(p for p in range(l) if mask >> p & 1)
        sign = unshuffle_sign(parities, ipos)
        if (l - len(ipos)) % 2:
            sign = -sign
        dfi = apply_sparse(D, A.basis_product(tuple(idx[p] for p in ipos)))
        if not dfi:
            continue
        jpos = tuple(p for p in range(l) if not mask >> p & 1)
        term = dfi
        if jpos:
            term = A.sparse_mult(term, A.basis_product(tuple(idx[p] for p in jpos)))
        for k, x in term.items():
            s = total.get(k, ZERO) + sign * x
            if s:
                total[k] = s
            elif k in total:
                del total[k]
    return total


# ---------------------------------------------------------------------------
# order of an operator


@dataclass
class OrderReport:
    """Result of an exhaustive order search.

    ``minimal_order`` is the smallest m with the (m+1)-ary bracket
    identically zero on basis tuples, or None when every level up to
    ``l_max`` had a nonzero bracket.  ``witnesses[m]`` is the first
    (lexicographically, over non-decreasing tuples) basis tuple with
    ``bracket_{m+1}`` nonzero, recorded for every level m below the
    minimum.  Order 0 means the operator itself is zero.
    """

    name: str
    minimal_order: int | None
    l_max: int
    witnesses: dict[int, tuple[int, ...]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "minimal_order": (
                "exceeds L_max" if self.minimal_order is None else self.minimal_order
            ),
            "l_max": self.l_max,
            "witnesses": {str(m): list(t) for m, t in sorted(self.witnesses.items())},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "OrderReport":
        m = data["minimal_order"]
        return cls(
            name=data.get("name", ""),
            minimal_order=None if m == "exceeds L_max" else int(m),
            l_max=int(data["l_max"]),
            witnesses={int(k): tuple(v) for k, v in data.get("witnesses", {}).items()},
        )


def min_order(A: GradedAlgebra, D: LinOp, l_max: int, name: str = "") -> OrderReport:
    """Smallest m <= l_max with the (m+1)-ary bracket identically zero.

    The bracket is graded symmetric, so only non-decreasing basis tuples
    are enumerated.
    """
    if l_max < 0:
        raise PreconditionViolation("l_max must be >= 0")
    witnesses: dict[int, tuple[int, ...]] = {}
    for m in range(l_max + 1):
        found = None
        for t in combinations_with_replacement(range(A.dim), m + 1):
            if bracket_basis(A, D, t):
                found = t
                break
        if found is None:
            return OrderReport(name, m, l_max, witnesses)
        witnesses[m] = found
    return OrderReport(name, None, l_max, witnesses)


def product_identity_check(A: GradedAlgebra, D: LinOp, l: int, n: int) -> Check:
    """Order-l product expansion on all basis tuples of length n.

    For an operator of order at most l and n >= l+1,
    ``D(f_1...f_n) = sum over 1 <= |I| <= l of
    (-1)^(l-|I|) C(n-1-|I|, l-|I|) eps(I,J) D(f_I) f_J``.
    """
    if n < l + 1:
        raise PreconditionViolation(f"need n >= l+1, got l={l}, n={n}")
    for t in combinations_with_replacement(range(A.dim), n):
        parities = tuple(A.space.parity(i) for i in t)
        lhs = apply_sparse(D, A.basis_product(t))
        rhs: dict[int, Fraction] = {}
        for mask in range(1, 1 << n):
            ipos = tuple(p for p in range(n) if mask >> p & 1)
            r = len(ipos)
            if r > l:
                continue
            coeff = comb(n - 1 - r, l - r) * unshuffle_sign(parities, ipos)
            if (l - r) % 2:
                coeff = -coeff
            dfi = apply_sparse(D, A.basis_product(tuple(t[p] for p in ipos)))
            if not dfi:
                continue
            jpos = tuple(p for p in range(n) if not mask >> p & 1)
            term = dfi
            if jpos:
                term = A.sparse_mult(term, A.basis_product(tuple(t[p] for p in jpos)))
            for k, x in term.items():
                s = rhs.get(k, ZERO) + coeff * x
                if s:
                    rhs[k] = s
                elif k in rhs:
                    del rhs[k]
        if lhs != rhs:
            return Check(False, t)
    return Check(True, None)


def bering_check(A: GradedAlgebra, D1: LinOp, D2: LinOp, n: int) -> Check:
    """Bracket of a commutator versus nested brackets, on basis n-tuples.

    ``<f_1,...,f_n>^[D1,D2] = sum over nonempty I of eps(I,J) (
    <<f_I>^D2, f_J>^D1 - (-1)^(|D1||D2|) <<f_I>^D1, f_J>^D2 )``,
    where the inner bracket fills the first slot of the outer one.
    """
    if n < 1:
        raise PreconditionViolation("need n >= 1")
    comm = commutator(D1, D2)
    sgn12 = -1 if (D1.degree % 2 and D2.degree % 2) else 1
    for t in combinations_with_replacement(range(A.dim), n):
        parities = tuple(A.space.parity(i) for i in t)
        lhs = bracket_basis(A, comm, t)
        rhs = A.space.zero_vector()
        for mask in range(1, 1 << n):
            ipos = tuple(p for p in range(n) if mask >> p & 1)
            jpos = tuple(p for p in range(n) if not mask >> p & 1)
            eps = unshuffle_sign(parities, ipos)
            args_i = [A.space.basis_vector(t[p]) for p in ipos]
            args_j = [A.space.basis_vector(t[p]) for p in jpos]
            inner2 = bracket(A, D2, args_i)
            term = bracket(A, D1, [inner2] + args_j)
            rhs = vec_add(rhs, vec_scale(eps, term))
            inner1 = bracket(A, D1, args_i)
            term = bracket(A, D2, [inner1] + args_j)
            rhs = vec_add(rhs, vec_scale(-sgn12 * eps, term))
        if any(lhs.get(k, ZERO) != rhs[k] for k in range(A.dim)):
            return Check(False, t)
    return Check(True, None)


# ---------------------------------------------------------------------------
# trace conditions


def trace_order_drop_check(A: GradedAlgebra, D: LinOp, l: int) -> Check:
    """``str(<f_1,...,f_l>^D . (-)) = 0`` on all basis l-tuples.

    Guaranteed by the order filtration whenever D has order at most l;
    callers interested in the theorem should verify the order separately.
    """
    if l < 1:
        raise PreconditionViolation("need l >= 1")
    for t in combinations_with_replacement(range(A.dim), l):
        if str_mult_vec(A, bracket_basis(A, D, t)) != 0:
            return Check(False, t)
    return Check(True, None)


def _traced_product_zero(A: GradedAlgebra, D: LinOp, r: int) -> tuple | None:
    """First (t, j) with ``str(<e_t>_r^D e_j . (-)) != 0``, else None."""
    for t in combinations_with_replacement(range(A.dim), r):
        v = bracket_basis(A, D, t)
        if not v:
            continue
        for j in range(A.dim):
            w = A.sparse_mult(v, {j: Fraction(1)})
            if str_mult_vec(A, w) != 0:
                return t + (j,)
    return None


def strong_compat_check(A: GradedAlgebra, D: LinOp, l: int) -> Check:
    """Strong trace compatibility at order l (defined for l >= 3 only).

    Primary condition: ``str(<f_1,...,f_{l-1}>^D . (-)) = 0`` on all basis
    tuples.  When it holds and the operator really has order at most l,
    two further identities are theorems, and we recompute them here as a
    consistency cross-check on the whole sign apparatus:
    ``str(<f_1,...,f_l> f_{l+1} . (-)) = 0`` and
    ``str(<f_1,...,f_{l-1}> f_l . (-)) = 0``.
    """
    if l < 3:
        raise PreconditionViolation(f"strong compatibility needs l >= 3, got {l}")
    for t in combinations_with_replacement(range(A.dim), l - 1):
        if str_mult_vec(A, bracket_basis(A, D, t)) != 0:
            return Check(False, t)
    if min_order(A, D, l).minimal_order is not None:
        bad = _traced_product_zero(A, D, l)
        if bad is not None:
            raise AssertionError(
                f"derived trace identity failed at order {l} on tuple {bad}"
            )
        bad = _traced_product_zero(A, D, l - 1)
        if bad is not None:
            raise AssertionError(
                f"derived strong-compatibility product identity failed on tuple {bad}"
            )
    return Check(True, None)


def lie_subalgebra_check(A: GradedAlgebra, D1: LinOp, k: int, D2: LinOp, l: int) -> Check:
    """Strong compatibility of [D1, D2] at order k + l - 1.

    Callers supply operators already known to be strongly compatible of
    orders at most k and l (both >= 3); the commutator then stays in the
    strongly compatible family one filtration step below k + l.
    """
    return strong_compat_check(A, commutator(D1, D2), k + l - 1)


def getzler_check(A: GradedAlgebra, D: LinOp) -> Check:
    """``(1/12) str(D(f) . (-)) = str(D(f . (-)))`` for all f.

    Both sides are linear in f, so basis vectors suffice; the witness is
    the failing basis index.
    """
    twelfth = Fraction(1, 12)
    for j in range(A.dim):
        lhs = twelfth * str_mult_vec(A, apply_sparse(D, {j: Fraction(1)}))
        rhs = supertrace(A.space, D.compose(mult_op(A, A.space.basis_vector(j))))
        if lhs != rhs:
            return Check(False, (j,))
    return Check(True, None)


def comm_compat_check(
    A: GradedAlgebra, D2: LinOp, Dl: LinOp | None = None, l: int | None = None
) -> Check:
    """Strong compatibility of commutators built from an odd order-2 operator.

    Hypotheses, all verified here (PreconditionViolation names the first
    one that fails): D2 is odd, of order at most 2, and satisfies the
    1/12 trace relation; the optional Dl is odd, of order at most l >= 3,
    and strongly compatible.  The conclusion checked is that [D2, Dl]
    (or [D2, D2] when Dl is omitted) is strongly compatible at order
    l + 1 (respectively 3).
    """
    if D2.degree % 2 == 0:
        raise PreconditionViolation("D2 must have odd degree")
    if min_order(A, D2, 2).minimal_order is None:
        raise PreconditionViolation("D2 must have order at most 2")
    if not getzler_check(A, D2):
        raise PreconditionViolation("D2 must satisfy the 1/12 trace relation")
    if Dl is None or Dl == D2:
        return strong_compat_check(A, commutator(D2, D2), 3)
    if l is None:
        raise PreconditionViolation("an order bound l is required with a second operator")
    if l < 3:
        raise PreconditionViolation("need l >= 3 for the second operator")
    if Dl.degree % 2 == 0:
        raise PreconditionViolation("Dl must have odd degree")
    if min_order(A, Dl, l).minimal_order is None:
        raise PreconditionViolation(f"Dl must have order at most {l}")
    if not strong_compat_check(A, Dl, l):
        raise PreconditionViolation("Dl must be strongly compatible")
    return strong_compat_check(A, commutator(D2, Dl), l + 1)
