"""Chain multicomplexes, homotopy transfer, and the gauge route to homology.

A z-series of operators D(z) = D_1 + D_2 z + ... with D(z)^2 = 0 and
degree(D_l) = 2l - 3 is a chain multicomplex; when the level-l component
also has Koszul order at most l the structure is the one singled out by
the genus-0 theorem (:func:`is_comm_bv_infty`), and with the trace
conditions on top, by the genus-0-and-1 theorem
(:func:`is_wheeled_comm_bv_infty`).  Across a deformation retract onto
homology the higher components transfer by alternating composition sums
(:func:`transfer_sum`); their vanishing (:func:`hodge_vanishing_check`)
is the degeneration condition under which the transferred structure has
no higher operators left.  The constructive criterion checked here is
gauge triviality: the whole series is a z-conjugate of its own
differential, exp(-A(z)) D_1 exp(A(z)) = D(z) (:func:`gauge_check`), and
in that case exponentiating the A-series action on the trivial theory
and pushing through the retract yields the induced correlator family on
homology (:func:`induced_cohft`).

Everything in this module is plain matrix algebra over Fraction; the
retract maps p and i are rectangular, so they are kept as raw matrices
(column j = image of e_j, same layout as :class:`~cohft.algebra.LinOp`).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial

from .algebra import (
    DimensionMismatch,
    GradedAlgebra,
    GradedVectorSpace,
    LinOp,
    MultiLinearMap,
    PreconditionViolation,
    make_algebra,
    mult_op,
    zero_op,
)
from .givental import (
    CorrelatorFamily,
    GiventalSeries,
    group_action_exp,
    infinitesimal_action,
)
from .koszul import Check, getzler_check, min_order, strong_compat_check
from .serialize import (
    ParseError,
    format_rational,
    operator_from_dict,
    operator_to_dict,
)

ZERO = Fraction(0)
ONE = Fraction(1)

__all__ = [
    "DegreeMismatch",
    "GaugeViolation",
    "DeformationRetract",
    "GaugeSeries",
    "is_multicomplex",
    "is_comm_bv_infty",
    "is_wheeled_comm_bv_infty",
    "validate_retract",
    "transfer_sum",
    "hodge_vanishing_check",
    "gauge_check",
    "induced_cohft",
    "homology_retract",
    "retract_from_dict",
    "retract_to_dict",
    "gauge_from_dict",
    "gauge_to_dict",
]


class DegreeMismatch(ValueError):
    """An operator's degree label breaks the 2l - 3 pattern of the series."""


class GaugeViolation(ValueError):
    """Data declared to satisfy the gauge condition fails its re-check."""


# ---------------------------------------------------------------------------
# rectangular matrix helpers (tuples of tuples of Fraction)


def _mat(rows, nrows: int | None = None, ncols: int | None = None):
    rows = tuple(tuple(Fraction(x) for x in row) for row in rows)
    if nrows is not None and len(rows) != nrows:
        raise DimensionMismatch(f"expected {nrows} rows, got {len(rows)}")
    width = ncols if ncols is not None else (len(rows[0]) if rows else 0)
    if any(len(row) != width for row in rows):
        raise DimensionMismatch("ragged matrix")
    return rows


def _matmul(a, b, ncols: int | None = None):
    # ncols is only needed when b has no rows (H = 0 retracts), where the
    # output width cannot be inferred.
    rows_a, rows_b = len(a), len(b)
    cols_b = len(b[0]) if rows_b else (ncols or 0)
    out = []
    for i in range(rows_a):
        ai = a[i]
        out.append(tuple(
            sum((ai[k] * b[k][j] for k in range(rows_b) if ai[k] and b[k][j]),
                ZERO)
            for j in range(cols_b)
        ))
    return tuple(out)


def _mat_add(a, b):
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def _mat_scale(a, c):
    return tuple(tuple(c * x for x in row) for row in a)


def _mat_iszero(a) -> bool:
    return all(not x for row in a for x in row)


def _mat_eq(a, b) -> bool:
    return len(a) == len(b) and all(ra == rb for ra, rb in zip(a, b))


def _ident(n):
    return tuple(tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n))


def _zero_mat(r, c):
    return ((ZERO,) * c,) * r


# ---------------------------------------------------------------------------
# types


@dataclass(frozen=True)
class DeformationRetract:
    """Projection/inclusion pair with a contracting homotopy.

    ``p`` maps the ambient space V onto H and ``i`` embeds H back, with
    p o i = id_H; ``h`` witnesses i o p - id_V = D_1 h + h D_1.  No side
    conditions (h i = 0, p h = 0, h^2 = 0) are imposed — the transfer
    sums are well defined without them.  ``p`` and ``i`` are rectangular
    raw matrices, ``h`` a square LinOp on V whose degree should cancel
    D_1's (+1 for the differential convention used by the series types).
    """

    p: tuple
    i: tuple
    h: LinOp

    def __post_init__(self):
        dv = self.h.dim
        p = _mat(self.p, ncols=dv)
        dh = len(p)
        i = _mat(self.i, nrows=dv, ncols=dh)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "i", i)

    @property
    def dim_v(self) -> int:
        return self.h.dim

    @property
    def dim_h(self) -> int:
        return len(self.p)

    def i_column(self, q: int) -> tuple[Fraction, ...]:
        return tuple(self.i[r][q] for r in range(self.dim_v))

    @classmethod
    def identity(cls, dim: int) -> "DeformationRetract":
        """V = H with nothing to contract."""
        return cls(_ident(dim), _ident(dim), zero_op(dim, 1))


@dataclass(frozen=True)
class GaugeSeries:
    """The conjugating series A(z) = A_1 z + A_2 z^2 + ... (no z^0 term).

    Components may be any operators of one shared dimension; the series
    starts at z^1, so its exponentiated action never needs the z^0
    special case.  An empty component tuple is the zero series.
    """

    ops: tuple[LinOp, ...]

    def __post_init__(self):
        ops = tuple(self.ops)
        if len({op.dim for op in ops}) > 1:
            raise DimensionMismatch("series components must share one dimension")
        object.__setattr__(self, "ops", ops)

    @property
    def L(self) -> int:
        return len(self.ops)

    def component(self, l: int) -> LinOp:
        if not 1 <= l <= self.L:
            raise PreconditionViolation(f"no component at level {l}")
        return self.ops[l - 1]


# ---------------------------------------------------------------------------
# structure checks


def _supercommutator(a: LinOp, b: LinOp):
    s = -1 if (a.parity and b.parity) else 1
    return _mat_add(_matmul(a.matrix, b.matrix),
                    _mat_scale(_matmul(b.matrix, a.matrix), -s))


def is_multicomplex(ops, L: int | None = None) -> Check:
    """Do the relations sum(D_i D_j, i+j = n) = 0 hold for 2 <= n <= L+1?

    ``ops`` is the 1-based list (D_1, ..., D_K); operators beyond the
    list are zero.  With the default ``L`` every relation that can be
    nonzero is checked (n up to 2K); an explicit ``L`` cuts the sweep at
    n = L+1 as a truncation.  The witness on failure is ``(n, S)`` with S
    the offending sum as a LinOp.  Each relation is computed both as the
    plain product sum and as the supercommutator sum (1/2) sum [D_i, D_j]
    — all components are odd, so the two must agree, and a disagreement
    would mean the degree labels are lying.

    Raises :class:`DegreeMismatch` unless degree(D_l) = 2l - 3 for all l.
    """
    ops = tuple(ops)
    for l, D in enumerate(ops, start=1):
        if D.degree != 2 * l - 3:
            raise DegreeMismatch(
                f"component {l} has degree {D.degree}, expected {2 * l - 3}")
    if len({D.dim for D in ops}) > 1:
        raise DimensionMismatch("series components must share one dimension")
    K = len(ops)
    if K == 0:
        return Check(True, None)
    top = (L + 1) if L is not None else 2 * K
    dim = ops[0].dim
    for n in range(2, top + 1):
        S = _zero_mat(dim, dim)
        Scomm = _zero_mat(dim, dim)
        for a in range(max(1, n - K), min(K, n - 1) + 1):
            b = n - a
            S = _mat_add(S, _matmul(ops[a - 1].matrix, ops[b - 1].matrix))
            Scomm = _mat_add(Scomm, _supercommutator(ops[a - 1], ops[b - 1]))
        assert _mat_eq(Scomm, _mat_scale(S, 2)), \
            f"commutator form disagrees with the product form at n = {n}"
        if not _mat_iszero(S):
            return Check(False, (n, LinOp(S, 2 * n - 6)))
    return Check(True, None)


def is_comm_bv_infty(A: GradedAlgebra, ops) -> bool:
    """Multicomplex whose level-l component has Koszul order at most l.

    Total: a degree-pattern violation makes this False rather than a
    raise (`is_multicomplex` alone reports it as an error).
    """
    try:
        mc = is_multicomplex(ops)
    except DegreeMismatch:
        return False
    if not mc:
        return False
    for l, D in enumerate(ops, start=1):
        if min_order(A, D, l).minimal_order is None:
            return False
    return True


def is_wheeled_comm_bv_infty(A: GradedAlgebra, ops) -> bool:
    """`is_comm_bv_infty` plus the trace conditions.

    The level-2 component must satisfy the 1/12 relation on every basis
    element and each level k >= 3 must be strongly compatible with the
    supertrace.  Order is checked first so the strong-compatibility
    cross-derivations run only on operators they are theorems for.
    """
    ops = tuple(ops)
    if not is_comm_bv_infty(A, ops):
        return False
    if len(ops) >= 2 and not getzler_check(A, ops[1]):
        return False
    for k in range(3, len(ops) + 1):
        if not strong_compat_check(A, ops[k - 1], k):
            return False
    return True


# ---------------------------------------------------------------------------
# deformation retracts and transfer


def validate_retract(r: DeformationRetract, D1: LinOp) -> bool:
    """p i = id_H and i p - id_V = D_1 h + h D_1, as matrix identities."""
    if D1.dim != r.dim_v:
        raise DimensionMismatch("differential dimension differs from retract")
    if not _mat_eq(_matmul(r.p, r.i, r.dim_h), _ident(r.dim_h)):
        return False
    lhs = _mat_add(_matmul(r.i, r.p, r.dim_v),
                   _mat_scale(_ident(r.dim_v), -1))
    rhs = _mat_add(_matmul(D1.matrix, r.h.matrix),
                   _matmul(r.h.matrix, D1.matrix))
    return _mat_eq(lhs, rhs)


def _compositions(n: int):
    """All ordered tuples of positive integers summing to n (2^(n-1))."""
    if n == 0:
        yield ()
        return
    for first in range(1, n + 1):
        for rest in _compositions(n - first):
            yield (first,) + rest


def transfer_sum(ops, r: DeformationRetract, n: int) -> LinOp:
    """The transferred z^n operator on H.

    sum over compositions l_1 + ... + l_k - k = n with all l_i >= 2 of
    (-1)^(k-1) p D_{l_1} h D_{l_2} h ... h D_{l_k} i — one term per
    composition of n, so 2^(n-1) terms.  Operators beyond the given list
    are zero.  The result carries degree 2n - 1, matching the degree
    pattern of a level-(n+1) series component.
    """
    if n < 1:
        raise PreconditionViolation("transfer index must be >= 1")
    ops = tuple(ops)
    acc = _zero_mat(r.dim_h, r.dim_h)
    for comp in _compositions(n):
        ls = [c + 1 for c in comp]
        if any(l > len(ops) for l in ls):
            continue
        cur = _matmul(ops[ls[-1] - 1].matrix, r.i)
        for l in reversed(ls[:-1]):
            cur = _matmul(ops[l - 1].matrix, _matmul(r.h.matrix, cur))
        term = _matmul(r.p, cur)
        acc = _mat_add(acc, term if len(ls) % 2 else _mat_scale(term, -1))
    return LinOp(acc, 2 * n - 1)


def hodge_vanishing_check(ops, r: DeformationRetract, N: int) -> Check:
    """Do all transferred operators vanish up to z^N?

    Requires the retract to validate against D_1 = ops[0]; the witness on
    failure is ``(n,)`` for the first nonzero transfer sum.
    """
    ops = tuple(ops)
    if not ops:
        raise PreconditionViolation("need at least the differential D_1")
    if not validate_retract(r, ops[0]):
        raise PreconditionViolation("retract does not validate against D_1")
    for n in range(1, N + 1):
        if not transfer_sum(ops, r, n).is_zero():
            return Check(False, (n,))
    return Check(True, None)


def homology_retract(D1: LinOp) -> DeformationRetract:
    """A deformation retract of (V, D_1) onto a homology basis.

    Gaussian elimination over the rationals: picks pivot pairs
    (x, D_1 x), uses them to split V into im(h-part) + im(D_1-part) +
    complement, and returns p, i, h with p i = id, i p - id = D_1 h +
    h D_1, p D_1 = 0 and D_1 i = 0.  Requires D_1^2 = 0.
    """
    dim = D1.dim
    if not D1.compose(D1).is_zero():
        raise PreconditionViolation("differential does not square to zero")
    # column-reduce D_1: find independent image vectors D_1(x_k)
    cols = [list(D1.column(j)) for j in range(dim)]
    sources: list[list[Fraction]] = [
        [ONE if r == j else ZERO for r in range(dim)] for j in range(dim)
    ]
    pivots: list[tuple[int, list[Fraction], list[Fraction]]] = []
    for j in range(dim):
        col, src = cols[j], sources[j]
        for prow, pcol, psrc in pivots:
            f = col[prow]
            if f:
                for rr in range(dim):
                    col[rr] -= f * pcol[rr]
                    src[rr] -= f * psrc[rr]
        row = next((r for r in range(dim) if col[r]), None)
        if row is None:
            continue
        inv = ONE / col[row]
        col[:] = [x * inv for x in col]
        src[:] = [x * inv for x in src]
        pivots.append((row, col, src))
    # basis of V adapted to the splitting: exact part b_k = D_1(s_k),
    # anti-exact part s_k, and a homology complement.
    span = ([list(c) for _r, c, _s in pivots]
            + [list(s) for _r, _c, s in pivots])
    hom_basis: list[list[Fraction]] = []

    def reduce_against(vec, basis):
        v = list(vec)
        for b in basis:
            lead = next((r for r in range(dim) if b[r]), None)
            if lead is not None and v[lead]:
                f = v[lead] / b[lead]
                for rr in range(dim):
                    v[rr] -= f * b[rr]
        return v

    # make span triangular so reduce_against is a genuine membership test
    tri: list[list[Fraction]] = []
    for v in span:
        w = reduce_against(v, tri)
        lead = next((r for r in range(dim) if w[r]), None)
        if lead is not None:
            tri.append([x / w[lead] for x in w])
    for j in range(dim):
        cand = [ONE if r == j else ZERO for r in range(dim)]
        w = reduce_against(cand, tri)
        lead = next((r for r in range(dim) if w[r]), None)
        if lead is None:
            continue
        w = [x / w[lead] for x in w]
        hom_basis.append(w)
        tri.append(w)
    # assemble the basis-change matrix: columns = exact, anti-exact, homology
    change_cols = ([list(c) for _r, c, _s in pivots]
                   + [list(s) for _r, _c, s in pivots]
                   + hom_basis)
    T = tuple(tuple(change_cols[j][r] for j in range(dim)) for r in range(dim))
    Tinv = _invert(T)
    k = len(pivots)
    hdim = dim - 2 * k
    # in the adapted basis: D_1(s_m) = b_m exactly, D_1(b_m) = 0,
    # D_1(homology) may still have an exact component — kill it by
    # correcting homology representatives to honest cycles.
    for idx in range(hdim):
        v = [change_cols[2 * k + idx][r] for r in range(dim)]
        img = [sum((D1.matrix[r][j] * v[j] for j in range(dim) if v[j]), ZERO)
               for r in range(dim)]
        coords = [sum((Tinv[a][r] * img[r] for r in range(dim) if img[r]), ZERO)
                  for a in range(dim)]
        assert all(not coords[a] for a in range(k, dim)), \
            "cycle correction left a non-exact differential"
        for m in range(k):
            if coords[m]:
                for r in range(dim):
                    v[r] -= coords[m] * change_cols[k + m][r]
        change_cols[2 * k + idx] = v
    T = tuple(tuple(change_cols[j][r] for j in range(dim)) for r in range(dim))
    Tinv = _invert(T)
    i_mat = tuple(tuple(T[r][2 * k + q] for q in range(hdim)) for r in range(dim))
    p_mat = tuple(tuple(Tinv[2 * k + q][r] for r in range(dim)) for q in range(hdim))
    h_mat = [[ZERO] * dim for _ in range(dim)]
    # h sends the exact basis vector b_m back to -s_m, so that
    # D_1 h + h D_1 = -1 on the acyclic summand and 0 on homology.
    for m in range(k):
        for r in range(dim):
            if change_cols[k + m][r]:
                for c in range(dim):
                    if Tinv[m][c]:
                        h_mat[r][c] -= change_cols[k + m][r] * Tinv[m][c]
    ret = DeformationRetract(p_mat, i_mat,
                             LinOp(tuple(map(tuple, h_mat)), -D1.degree))
    assert validate_retract(ret, D1), "constructed retract fails its invariants"
    assert _mat_iszero(_matmul(ret.p, D1.matrix)), "p is not a chain map"
    assert _mat_iszero(_matmul(D1.matrix, ret.i)), "i is not a chain map"
    return ret


def _invert(M):
    n = len(M)
    a = [list(row) + [ONE if r == c else ZERO for c in range(n)]
         for r, row in enumerate(M)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col]), None)
        if piv is None:
            raise DimensionMismatch("matrix is singular")
        a[col], a[piv] = a[piv], a[col]
        inv = ONE / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return tuple(tuple(row[n:]) for row in a)


# ---------------------------------------------------------------------------
# the gauge condition


def gauge_check(ops, A: GaugeSeries, L: int | None = None) -> Check:
    """Does exp(-A(z)) D_1 exp(A(z)) agree with D(z) through z^(L-1)?

    The conjugation is expanded per z-power: the z^m coefficient of
    exp(ad_{-A(z)})(D_1) is a finite sum of nested commutators because
    A(z) has no z^0 term, so no nilpotency of the components is needed.
    With the default ``L`` the provided components are compared; a larger
    ``L`` additionally demands that the conjugation produces nothing
    beyond the list.  The witness on failure is ``(m,)`` for the first
    differing z-power.
    """
    ops = tuple(ops)
    if not ops:
        raise PreconditionViolation("need at least the differential D_1")
    if L is None:
        L = len(ops)
    dim = ops[0].dim
    x = {l: A.ops[l - 1].matrix for l in range(1, A.L + 1)
         if l <= L - 1 and not A.ops[l - 1].is_zero()}
    # T_k = ad_{-A}^k(D_1) truncated at z^(L-1); total = sum T_k / k!
    cur = {0: ops[0].matrix}
    total = {0: ops[0].matrix}
    for k in range(1, L):
        nxt: dict[int, tuple] = {}
        for a, Ma in x.items():
            for b, Mb in cur.items():
                m = a + b
                if m > L - 1:
                    continue
                term = _mat_add(_matmul(Mb, Ma), _mat_scale(_matmul(Ma, Mb), -1))
                nxt[m] = _mat_add(nxt[m], term) if m in nxt else term
        cur = {m: M for m, M in nxt.items() if not _mat_iszero(M)}
        if not cur:
            break
        inv = Fraction(1, factorial(k))
        for m, M in cur.items():
            scaled = _mat_scale(M, inv)
            total[m] = _mat_add(total[m], scaled) if m in total else scaled
    for m in range(L):
        want = ops[m].matrix if m < len(ops) else _zero_mat(dim, dim)
        got = total.get(m, _zero_mat(dim, dim))
        if not _mat_eq(got, want):
            return Check(False, (m,))
    return Check(True, None)


# ---------------------------------------------------------------------------
# the induced family on homology


def _homology_space(A: GradedAlgebra, r: DeformationRetract) -> GradedVectorSpace:
    degs = []
    for q in range(r.dim_h):
        deg = None
        for row in range(r.dim_v):
            if r.i[row][q]:
                d = A.space.degrees[row]
                if deg is None:
                    deg = d
                elif d != deg:
                    raise DimensionMismatch(
                        f"inclusion column {q} mixes degrees {deg} and {d}")
        if deg is None:
            raise DimensionMismatch(f"inclusion column {q} is zero")
        degs.append(deg)
    return GradedVectorSpace(tuple(degs))


def _homology_algebra(A: GradedAlgebra, r: DeformationRetract) -> GradedAlgebra:
    """The transferred product p(i(x) i(y)) as a graded algebra on H.

    `make_algebra` re-validates commutativity and associativity, so a
    retract whose transferred product is not honestly associative is
    rejected rather than silently accepted.
    """
    space = _homology_space(A, r)
    hdim = r.dim_h
    cols = [r.i_column(q) for q in range(hdim)]
    c = [[[ZERO] * hdim for _ in range(hdim)] for _ in range(hdim)]
    for q in range(hdim):
        left = mult_op(A, cols[q])
        for s in range(hdim):
            prod = left.apply(cols[s])
            for k in range(hdim):
                c[q][s][k] = sum(
                    (r.p[k][j] * prod[j] for j in range(r.dim_v) if prod[j]),
                    ZERO)
    return make_algebra(space, c)


def induced_cohft(A: GradedAlgebra, ops, Agauge: GaugeSeries,
                  r: DeformationRetract, n_max: int) -> CorrelatorFamily:
    """The correlator family induced on homology by a gauge-trivial series.

    Re-checks the gauge condition (GaugeViolation on failure), then
    exponentiates the action of A(z) on the trivial theory of ``A`` and
    pushes every entry through the retract: genus-0 entries become
    p o entry o i^(x n), genus-1 entries entry o i^(x n).  The family is
    returned over the transferred product algebra on H.

    The z^l gauge component acts at series level l+1; the exposed action
    is (-1)^l times the raw z-series action, so the series handed to the
    exponential alternates signs to compensate.  Each restricted entry is
    additionally checked to be annihilated by the level-1 action of D_1 —
    that is the quantized gauge relation that makes the restriction to
    homology well defined — and an entry failing it raises
    :class:`GaugeViolation`, which for gauge-true input means the series
    does not preserve the trivial theory (the order/trace conditions of
    the two main theorems fail for some component).
    """
    ops = tuple(ops)
    gc = gauge_check(ops, Agauge)
    if not gc:
        raise GaugeViolation(
            f"gauge condition fails at z^{gc.witness[0]}")
    dim = A.dim
    if ops[0].dim != dim or r.dim_v != dim:
        raise DimensionMismatch("operator and retract dimensions must match")
    H = _homology_algebra(A, r)
    signed = [op if l % 2 else op.scale(-1)
              for l, op in enumerate(Agauge.ops, start=1)]
    series = GiventalSeries((zero_op(dim, 0),) + tuple(signed))
    C = CorrelatorFamily.tft(A, n_max + 1)
    E = group_action_exp(C, series, n_max)
    closed = infinitesimal_action(E, ops[0], 1)
    cols = [r.i_column(q) for q in range(r.dim_h)]

    def g0_rule(n, d0, dc):
        M = E.g0_map(n, d0, dc)
        K = closed.g0_map(n, d0, dc)

        def rule(t):
            vecs = [cols[q] for q in t]
            leak = K.evaluate_vectors(vecs)
            for k in range(r.dim_h):
                if sum((r.p[k][j] * leak[j] for j in range(dim) if leak[j]),
                       ZERO):
                    raise GaugeViolation(
                        "induced genus-0 entry is not closed for the "
                        f"differential at {(n, d0, dc)}")
            dense = M.evaluate_vectors(vecs)
            out = {}
            for k in range(r.dim_h):
                v = sum((r.p[k][j] * dense[j] for j in range(dim) if dense[j]),
                        ZERO)
                if v:
                    out[k] = v
            return out

        return MultiLinearMap(n, r.dim_h, rule=rule)

    def g1_rule(n, dc):
        M = E.g1_map(n, dc)
        K = closed.g1_map(n, dc)

        def rule(t):
            vecs = [cols[q] for q in t]
            if K.evaluate_vectors(vecs):
                raise GaugeViolation(
                    "induced genus-1 entry is not closed for the "
                    f"differential at {(n, dc)}")
            return M.evaluate_vectors(vecs)

        return MultiLinearMap(n, r.dim_h, scalar=True, rule=rule)

    return CorrelatorFamily(H, n_max, g0_rule, g1_rule)


# ---------------------------------------------------------------------------
# wire format


def retract_from_dict(data: dict, dim_v: int) -> DeformationRetract:
    """Parse ``{"p": op, "i": op, "h": op}`` with the shared operator format.

    ``p`` and ``i`` are rectangular (H rows/columns inferred from p), so
    their degree fields are carried but only ``h``'s matters.
    """
    if not isinstance(data, dict) or not {"p", "i", "h"} <= set(data):
        raise ParseError("retract needs 'p', 'i' and 'h'")
    pm = data["p"].get("matrix") if isinstance(data["p"], dict) else None
    if not isinstance(pm, list):
        raise ParseError("retract 'p' must be an operator object")
    dim_h = len(pm)
    p, _ = operator_from_dict(data["p"], rows=dim_h, cols=dim_v)
    i, _ = operator_from_dict(data["i"], rows=dim_v, cols=dim_h)
    hmat, hdeg = operator_from_dict(data["h"], rows=dim_v, cols=dim_v)
    return DeformationRetract(p, i, LinOp(hmat, hdeg))


def retract_to_dict(r: DeformationRetract) -> dict:
    def as_op(m, deg):
        return {
            "degree": deg,
            "matrix": [[format_rational(x) for x in row] for row in m],
        }

    return {
        "p": as_op(r.p, 0),
        "i": as_op(r.i, 0),
        "h": operator_to_dict(r.h),
    }


def gauge_from_dict(data: dict, dim: int) -> GaugeSeries:
    """Parse ``{"components": [op, op, ...]}`` as A_1, A_2, ..."""
    if not isinstance(data, dict) or "components" not in data:
        raise ParseError("gauge series needs 'components'")
    comps = data["components"]
    if not isinstance(comps, list):
        raise ParseError("'components' must be a list of operators")
    ops = []
    for obj in comps:
        m, deg = operator_from_dict(obj, rows=dim, cols=dim)
        ops.append(LinOp(m, deg))
    return GaugeSeries(tuple(ops))


def gauge_to_dict(A: GaugeSeries) -> dict:
    return {"components": [operator_to_dict(op) for op in A.ops]}
