r"""Exact-rational graded commutative algebras and their linear operators.

Everything in this package runs over the rationals: scalars are
``fractions.Fraction``, vectors are tuples of Fractions, and a finite
dimensional graded commutative associative algebra is described by its
structure constants ``c[i][j][k]`` with

    e_i . e_j = sum_k c[i][j][k] e_k .

``make_algebra`` checks the three defining constraints (degree
compatibility, graded commutativity, associativity) exhaustively and
reports the first offending basis triple.

Linear operators (``LinOp``) are dense rational matrices tagged with a
degree; column ``j`` is the image of ``e_j``.  The Koszul sign rule is
used throughout: the sign of a permutation of homogeneous elements picks
up ``(-1)^{|x||y|}`` for every transposed pair, with parity = degree
mod 2.  The helpers ``sort_sign`` and ``unshuffle_sign`` implement the
two sign computations every higher formula in this package reduces to.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

ZERO = Fraction(0)
ONE = Fraction(1)


class ConstraintViolation(ValueError):
    """An algebra constraint failed; carries which one and a witness triple."""

    def __init__(self, kind: str, witness, message: str = ""):
        self.kind = kind          # "degree" | "commutativity" | "associativity"
        self.witness = witness    # first failing (i, j) or (i, j, k), lex order
        super().__init__(message or f"{kind} constraint fails at {witness}")


class PreconditionViolation(ValueError):
    """An operation was called outside its documented domain."""


class DimensionMismatch(ValueError):
    """Matrix/vector shapes or degrees do not line up."""


# ---------------------------------------------------------------------------
# spaces and vectors


@dataclass(frozen=True)
class GradedVectorSpace:
    """A finite dimensional graded vector space: just a tuple of degrees.

    >>> V = GradedVectorSpace((0, 1, 1, 2))
    >>> V.dim, V.parity(3)
    (4, 0)
    """

    degrees: tuple[int, ...]

    def __post_init__(self):
        if len(self.degrees) < 1:
            raise DimensionMismatch("need dim >= 1")
        object.__setattr__(self, "degrees", tuple(int(d) for d in self.degrees))
        object.__setattr__(self, "_parities", tuple(d % 2 for d in self.degrees))

    @property
    def dim(self) -> int:
        return len(self.degrees)

    def parity(self, i: int) -> int:
        return self.degrees[i] % 2

    @property
    def parities(self) -> tuple[int, ...]:
        return self._parities

    def basis_vector(self, i: int) -> tuple[Fraction, ...]:
        return tuple(ONE if j == i else ZERO for j in range(self.dim))

    def zero_vector(self) -> tuple[Fraction, ...]:
        return (ZERO,) * self.dim


def vec(entries: Iterable) -> tuple[Fraction, ...]:
    return tuple(Fraction(x) for x in entries)


def vec_add(u: Sequence[Fraction], v: Sequence[Fraction]) -> tuple[Fraction, ...]:
    return tuple(a + b for a, b in zip(u, v))


def vec_scale(s, u: Sequence[Fraction]) -> tuple[Fraction, ...]:
    s = Fraction(s)
    return tuple(s * a for a in u)


def vec_is_zero(u: Sequence[Fraction]) -> bool:
    return all(a == 0 for a in u)


def homogeneous_components(space: GradedVectorSpace, u: Sequence[Fraction]):
    """Split a vector into (degree, vector) pieces, sorted by degree.

    Zero vectors yield nothing.
    """
    by_degree: dict[int, list[Fraction]] = {}
    for i, a in enumerate(u):
        if a != 0:
            comp = by_degree.setdefault(space.degrees[i], [ZERO] * space.dim)
            comp[i] = a
    return [(d, tuple(c)) for d, c in sorted(by_degree.items())]


def degree_of(space: GradedVectorSpace, u: Sequence[Fraction]) -> int | None:
    """Degree of a homogeneous vector, None for 0, error if mixed."""
    comps = homogeneous_components(space, u)
    if not comps:
        return None
    if len(comps) > 1:
        raise PreconditionViolation(f"vector is not homogeneous: degrees {[d for d, _ in comps]}")
    return comps[0][0]


# ---------------------------------------------------------------------------
# Koszul signs


def sort_sign(parities: Sequence[int], idx: Sequence[int]) -> tuple[tuple[int, ...], int]:
    """Stable-sort a basis-index tuple, returning (sorted tuple, Koszul sign).

    The sign is ``(-1)^k`` where ``k`` counts inversions between pairs of
    odd-parity elements; ``parities[j]`` is the parity of basis index ``j``.

    >>> sort_sign((0, 1, 1), (2, 1))   # swap two odd elements
    ((1, 2), -1)
    >>> sort_sign((0, 1, 1), (2, 0))   # moving past an even element is free
    ((0, 2), 1)
    """
    sign = 1
    for a in range(len(idx)):
        for b in range(a + 1, len(idx)):
            if idx[a] > idx[b] and parities[idx[a]] and parities[idx[b]]:
                sign = -sign
    return tuple(sorted(idx)), sign


def unshuffle_sign(parities: Sequence[int], positions: Sequence[int]) -> int:
    """Koszul sign for pulling the sub-tuple at ``positions`` to the front.

    ``parities[q]`` is the parity of the object sitting in slot ``q``;
    ``positions`` is a strictly increasing tuple of slots (the set I).  The
    sign accounts for each I-element moving left past every earlier
    J-element, odd past odd.

    >>> unshuffle_sign((1, 1, 1), (1,))    # slot 1 moves past slot 0
    -1
    >>> unshuffle_sign((0, 1, 1), (2,))    # slot 2 moves past odd slot 1
    -1
    >>> unshuffle_sign((1, 1), (0, 1))     # already in front
    1
    """
    inI = [False] * len(parities)
    for p in positions:
        inI[p] = True
    sign = 1
    for q, is_i in enumerate(inI):
        if is_i and parities[q]:
            for p in range(q):
                if not inI[p] and parities[p]:
                    sign = -sign
    return sign


# ---------------------------------------------------------------------------
# linear operators


@dataclass(frozen=True)
class LinOp:
    """A degree-homogeneous linear operator as a dense rational matrix.

    ``matrix[i][j]`` is the coefficient of ``e_i`` in the image of ``e_j``
    (column j = image of e_j).  The degree label is part of the data: the
    same matrix with a different degree is a different operator.
    """

    matrix: tuple[tuple[Fraction, ...], ...]
    degree: int

    def __post_init__(self):
        object.__setattr__(
            self, "matrix", tuple(tuple(Fraction(x) for x in row) for row in self.matrix)
        )
        n = len(self.matrix)
        if any(len(row) != n for row in self.matrix):
            raise DimensionMismatch("operator matrix must be square")

    @property
    def dim(self) -> int:
        return len(self.matrix)

    @property
    def parity(self) -> int:
        return self.degree % 2

    def apply(self, u: Sequence[Fraction]) -> tuple[Fraction, ...]:
        m = self.matrix
        return tuple(
            sum((m[i][j] * u[j] for j in range(self.dim) if u[j]), ZERO)
            for i in range(self.dim)
        )

    def column(self, j: int) -> tuple[Fraction, ...]:
        return tuple(self.matrix[i][j] for i in range(self.dim))

    def compose(self, other: "LinOp") -> "LinOp":
        """self o other (apply ``other`` first)."""
        if self.dim != other.dim:
            raise DimensionMismatch("operator dimensions differ")
        a, b, n = self.matrix, other.matrix, self.dim
        rows = []
        for i in range(n):
            ai = a[i]
            rows.append(tuple(
                sum((ai[k] * b[k][j] for k in range(n) if ai[k] and b[k][j]), ZERO)
                for j in range(n)
            ))
        return LinOp(tuple(rows), self.degree + other.degree)

    def add(self, other: "LinOp") -> "LinOp":
        if self.degree != other.degree:
            raise DimensionMismatch("cannot add operators of different degree")
        return LinOp(
            tuple(tuple(a + b for a, b in zip(ra, rb))
                  for ra, rb in zip(self.matrix, other.matrix)),
            self.degree,
        )

    def scale(self, s) -> "LinOp":
        s = Fraction(s)
        return LinOp(tuple(tuple(s * x for x in row) for row in self.matrix), self.degree)

    def is_zero(self) -> bool:
        return all(x == 0 for row in self.matrix for x in row)

    def sparse_columns(self) -> tuple[dict[int, Fraction], ...]:
        """Column j as {row: entry}, nonzero entries only; built lazily."""
        cols = getattr(self, "_cols", None)
        if cols is None:
            n = self.dim
            cols = tuple(
                {i: self.matrix[i][j] for i in range(n) if self.matrix[i][j]}
                for j in range(n)
            )
            object.__setattr__(self, "_cols", cols)
        return cols


def apply_sparse(op: LinOp, v: dict[int, Fraction]) -> dict[int, Fraction]:
    """Apply an operator to a sparse vector, returning a sparse vector."""
    cols = op.sparse_columns()
    out: dict[int, Fraction] = {}
    for j, x in v.items():
        for i, m in cols[j].items():
            s = out.get(i, ZERO) + m * x
            if s:
                out[i] = s
            elif i in out:
                del out[i]
    return out


def zero_op(dim: int, degree: int = 0) -> LinOp:
    return LinOp(tuple((ZERO,) * dim for _ in range(dim)), degree)


def identity_op(dim: int) -> LinOp:
    return LinOp(tuple(tuple(ONE if i == j else ZERO for j in range(dim))
                       for i in range(dim)), 0)


def check_linop(space: GradedVectorSpace, op: LinOp) -> None:
    """Enforce the degree pattern: matrix[i][j] = 0 unless deg_i = deg_j + degree."""
    if op.dim != space.dim:
        raise DimensionMismatch(f"operator dim {op.dim} != space dim {space.dim}")
    for i in range(space.dim):
        for j in range(space.dim):
            if op.matrix[i][j] != 0 and space.degrees[i] != space.degrees[j] + op.degree:
                raise ConstraintViolation(
                    "degree", (i, j),
                    f"entry ({i},{j}) nonzero but deg {space.degrees[i]} != "
                    f"{space.degrees[j]} + {op.degree}")


def linop(space: GradedVectorSpace, entries, degree: int) -> LinOp:
    """Build and validate a LinOp from a matrix or a ``{(i, j): value}`` dict.

    A dict entry ``(i, j) -> v`` puts ``v`` in row i, column j: the image
    of ``e_j`` gains ``v * e_i``.
    """
    if isinstance(entries, dict):
        n = space.dim
        m = [[ZERO] * n for _ in range(n)]
        for (i, j), x in entries.items():
            m[i][j] = Fraction(x)
        entries = m
    op = LinOp(tuple(tuple(Fraction(x) for x in row) for row in entries), degree)
    check_linop(space, op)
    return op


def commutator(a: LinOp, b: LinOp) -> LinOp:
    """Supercommutator [a, b] = ab - (-1)^{|a||b|} ba."""
    ab = a.compose(b)
    ba = b.compose(a)
    if a.parity and b.parity:
        return ab.add(ba.scale(1))  # sign -(-1) = +1
    return ab.add(ba.scale(-1))


def supertrace(space: GradedVectorSpace, op: LinOp) -> Fraction:
    """str(M) = sum_b (-1)^{deg b} M[b][b]; zero whenever degree(M) != 0."""
    if op.degree != 0:
        return ZERO
    total = ZERO
    for b in range(space.dim):
        x = op.matrix[b][b]
        if x:
            total += -x if space.parity(b) else x
    return total


def random_linop(space: GradedVectorSpace, degree: int, rng: random.Random,
                 bound: int = 3, density: float = 1.0) -> LinOp:
    """A random operator respecting the degree pattern, entries in [-bound, bound].

    Deterministic given the rng state; used by the randomized check suites.
    """
    n = space.dim
    rows = [[ZERO] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if space.degrees[i] == space.degrees[j] + degree:
                if density >= 1.0 or rng.random() < density:
                    rows[i][j] = Fraction(rng.randint(-bound, bound))
    return LinOp(tuple(tuple(r) for r in rows), degree)


def available_degrees(space: GradedVectorSpace) -> list[int]:
    """Operator degrees with a nonzero allowed entry pattern, sorted."""
    return sorted({di - dj for di in space.degrees for dj in space.degrees})


# ---------------------------------------------------------------------------
# algebras


class GradedAlgebra:
    """A validated graded commutative associative algebra.

    Construct through :func:`make_algebra`.  Instances are immutable by
    convention and cache basis-product tables, so they are safe to share.
    """

    def __init__(self, space: GradedVectorSpace, c):
        self.space = space
        n = space.dim
        self.c = tuple(
            tuple(tuple(Fraction(c[i][j][k]) for k in range(n)) for j in range(n))
            for i in range(n)
        )
        # sparse pair table: (i, j) -> {k: coeff}
        pairs: dict[tuple[int, int], dict[int, Fraction]] = {}
        for i in range(n):
            for j in range(n):
                row = {k: self.c[i][j][k] for k in range(n) if self.c[i][j][k]}
                if row:
                    pairs[(i, j)] = row
        self._pairs = pairs
        self._products: dict[tuple[int, ...], dict[int, Fraction]] = {
            (i,): {i: ONE} for i in range(n)
        }
        self._str_mult: list[Fraction] | None = None
        self._integral = all(
            x.denominator == 1 for i in range(n) for j in range(n) for x in self.c[i][j]
        )

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def degrees(self) -> tuple[int, ...]:
        return self.space.degrees

    def pair_product(self, i: int, j: int) -> dict[int, Fraction]:
        return self._pairs.get((i, j), {})

    def sparse_mult(self, u: dict[int, Fraction], v: dict[int, Fraction]) -> dict[int, Fraction]:
        out: dict[int, Fraction] = {}
        for i, a in u.items():
            for j, b in v.items():
                row = self._pairs.get((i, j))
                if row:
                    ab = a * b
                    for k, ck in row.items():
                        s = out.get(k, ZERO) + ab * ck
                        if s:
                            out[k] = s
                        elif k in out:
                            del out[k]
        return out

    def basis_product_sorted(self, key: tuple[int, ...]) -> dict[int, Fraction]:
        """Product e_{k_1} ... e_{k_r} for a sorted index tuple, cached."""
        got = self._products.get(key)
        if got is not None:
            return got
        head = self.basis_product_sorted(key[:-1])
        out = self.sparse_mult(head, {key[-1]: ONE})
        self._products[key] = out
        return out

    def basis_product(self, idx: Sequence[int]) -> dict[int, Fraction]:
        """Signed product of basis elements in the given order.

        Empty tuples are rejected: the algebras here are not assumed unital
        anywhere the formulas need an empty product.
        """
        if not idx:
            raise PreconditionViolation("empty basis product")
        key = tuple(idx)
        for a, b in zip(key, key[1:]):
            if a > b:
                break
        else:
            return self.basis_product_sorted(key)
        key, sign = sort_sign(self.space.parities, key)
        prod = self.basis_product_sorted(key)
        if sign == 1:
            return prod
        return {k: -v for k, v in prod.items()}

    def str_mult(self, k: int) -> Fraction:
        """Cached supertrace of left multiplication by e_k."""
        if self._str_mult is None:
            vals = []
            for b in range(self.dim):
                total = ZERO
                for a in range(self.dim):
                    x = self.c[b][a][a]
                    if x:
                        total += -x if self.space.parity(a) else x
                vals.append(total)
            self._str_mult = vals
        return self._str_mult[k]


def make_algebra(space: GradedVectorSpace, mult) -> GradedAlgebra:
    """Validate structure constants and build a :class:`GradedAlgebra`.

    ``mult`` is indexable as ``mult[i][j][k]``.  Raises
    :class:`ConstraintViolation` with kind ``"degree"``,
    ``"commutativity"`` or ``"associativity"`` and the first failing basis
    tuple in lexicographic order.
    """
    n = space.dim
    deg = space.degrees
    c = [[[Fraction(mult[i][j][k]) for k in range(n)] for j in range(n)] for i in range(n)]

    for i in range(n):
        for j in range(n):
            for k in range(n):
                if c[i][j][k] != 0 and deg[k] != deg[i] + deg[j]:
                    raise ConstraintViolation("degree", (i, j, k))
    for i in range(n):
        for j in range(n):
            sign = -1 if (deg[i] % 2 and deg[j] % 2) else 1
            for k in range(n):
                if c[i][j][k] != sign * c[j][i][k]:
                    raise ConstraintViolation("commutativity", (i, j, k))
    A = GradedAlgebra(space, c)
    for i in range(n):
        for j in range(n):
            for k in range(n):
                left = A.sparse_mult(A.pair_product(i, j), {k: ONE})
                right = A.sparse_mult({i: ONE}, A.pair_product(j, k))
                if left != right:
                    raise ConstraintViolation("associativity", (i, j, k))
    return A


def multiply(A: GradedAlgebra, f: Sequence[Fraction], g: Sequence[Fraction]) -> tuple[Fraction, ...]:
    """The algebra product of two vectors."""
    u = {i: Fraction(x) for i, x in enumerate(f) if x}
    v = {j: Fraction(x) for j, x in enumerate(g) if x}
    out = A.sparse_mult(u, v)
    return tuple(out.get(k, ZERO) for k in range(A.dim))


def product_list(A: GradedAlgebra, vectors: Sequence[Sequence[Fraction]]) -> tuple[Fraction, ...]:
    """Left-to-right product of a nonempty list of vectors."""
    if not vectors:
        raise PreconditionViolation("empty product")
    acc = tuple(Fraction(x) for x in vectors[0])
    for v in vectors[1:]:
        acc = multiply(A, acc, v)
    return acc


def mult_op(A: GradedAlgebra, f: Sequence[Fraction]) -> LinOp:
    """Left multiplication by a homogeneous vector f, as a LinOp of degree deg f.

    The zero vector yields the zero operator of degree 0.
    """
    d = degree_of(A.space, f)
    cols = [multiply(A, f, A.space.basis_vector(j)) for j in range(A.dim)]
    matrix = tuple(tuple(cols[j][i] for j in range(A.dim)) for i in range(A.dim))
    return LinOp(matrix, 0 if d is None else d)


def mult_matrix(A: GradedAlgebra, f: Sequence[Fraction]) -> tuple[tuple[Fraction, ...], ...]:
    """Left-multiplication matrix for an arbitrary (possibly mixed) vector."""
    cols = [multiply(A, f, A.space.basis_vector(j)) for j in range(A.dim)]
    return tuple(tuple(cols[j][i] for j in range(A.dim)) for i in range(A.dim))


def str_mult_vec(A: GradedAlgebra, v: Sequence[Fraction] | dict[int, Fraction]) -> Fraction:
    """str(v . (-)) for a vector v, via the cached basis supertraces."""
    if isinstance(v, dict):
        return sum((x * A.str_mult(k) for k, x in v.items() if x), ZERO)
    return sum((x * A.str_mult(k) for k, x in enumerate(v) if x), ZERO)


# ---------------------------------------------------------------------------
# multilinear maps


class MultiLinearMap:
    """An n-linear map on basis tuples, vector valued or scalar valued.

    Values are stored (or computed on demand through ``rule``) per basis
    index tuple: a sparse ``{k: coeff}`` dict for vector-valued maps, a
    Fraction for scalar-valued ones.  Lazy rules are memoized, so equality
    checks and sweeps pay for each tuple once.
    """

    def __init__(self, arity: int, dim: int, scalar: bool = False,
                 values: dict | None = None,
                 rule: Callable[[tuple[int, ...]], object] | None = None):
        self.arity = arity
        self.dim = dim
        self.scalar = scalar
        self._values: dict[tuple[int, ...], object] = dict(values) if values else {}
        self._rule = rule

    def value(self, idx: tuple[int, ...]):
        """Value on a basis tuple: Fraction (scalar) or sparse dict (vector)."""
        idx = tuple(idx)
        if len(idx) != self.arity:
            raise DimensionMismatch(f"expected {self.arity} indices, got {len(idx)}")
        if idx in self._values:
            return self._values[idx]
        if self._rule is None:
            return ZERO if self.scalar else {}
        val = self._rule(idx)
        if not self.scalar:
            val = {k: v for k, v in val.items() if v}
        self._values[idx] = val
        return val

    def tuples(self):
        return itertools.product(range(self.dim), repeat=self.arity)

    def is_zero(self) -> bool:
        return self.first_nonzero() is None

    def first_nonzero(self) -> tuple[int, ...] | None:
        """First basis tuple (lex order) with nonzero value, or None."""
        for idx in self.tuples():
            v = self.value(idx)
            if (v != 0 if self.scalar else bool(v)):
                return idx
        return None

    def equals(self, other: "MultiLinearMap") -> bool:
        return self.first_difference(other) is None

    def first_difference(self, other: "MultiLinearMap") -> tuple[int, ...] | None:
        if (self.arity, self.dim, self.scalar) != (other.arity, other.dim, other.scalar):
            raise DimensionMismatch("cannot compare maps of different shape")
        for idx in self.tuples():
            if self.value(idx) != other.value(idx):
                return idx
        return None

    def evaluate_vectors(self, vectors: Sequence[Sequence[Fraction]]):
        """Multilinear extension to arbitrary vectors.

        Returns a dense vector tuple (vector-valued) or a Fraction.
        No Koszul signs enter here: signs belong to formulas that reorder
        arguments, not to plain multilinear evaluation.
        """
        if len(vectors) != self.arity:
            raise DimensionMismatch("wrong number of arguments")
        supports = [[(i, Fraction(x)) for i, x in enumerate(v) if x] for v in vectors]
        if self.scalar:
            total = ZERO
            for combo in itertools.product(*supports):
                coeff = ONE
                for _, x in combo:
                    coeff *= x
                total += coeff * self.value(tuple(i for i, _ in combo))
            return total
        acc: dict[int, Fraction] = {}
        for combo in itertools.product(*supports):
            coeff = ONE
            for _, x in combo:
                coeff *= x
            for k, v in self.value(tuple(i for i, _ in combo)).items():
                s = acc.get(k, ZERO) + coeff * v
                if s:
                    acc[k] = s
                elif k in acc:
                    del acc[k]
        return tuple(acc.get(k, ZERO) for k in range(self.dim))

    def scaled(self, s) -> "MultiLinearMap":
        s = Fraction(s)
        if self.scalar:
            return MultiLinearMap(self.arity, self.dim, True,
                                  rule=lambda idx: s * self.value(idx))
        return MultiLinearMap(self.arity, self.dim, False,
                              rule=lambda idx: {k: s * v for k, v in self.value(idx).items()})

    def plus(self, other: "MultiLinearMap") -> "MultiLinearMap":
        if (self.arity, self.dim, self.scalar) != (other.arity, other.dim, other.scalar):
            raise DimensionMismatch("cannot add maps of different shape")
        if self.scalar:
            return MultiLinearMap(self.arity, self.dim, True,
                                  rule=lambda idx: self.value(idx) + other.value(idx))

        def rule(idx):
            out = dict(self.value(idx))
            for k, v in other.value(idx).items():
                s = out.get(k, ZERO) + v
                if s:
                    out[k] = s
                elif k in out:
                    del out[k]
            return out
        return MultiLinearMap(self.arity, self.dim, False, rule=rule)


def product_map(A: GradedAlgebra, arity: int) -> MultiLinearMap:
    """The n-fold multiplication map mu_n as a MultiLinearMap."""
    return MultiLinearMap(arity, A.dim, False, rule=lambda idx: dict(A.basis_product(idx)))
