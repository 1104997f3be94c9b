"""Built-in graded algebras and named operators on them.

Every entry is validated through :func:`~cohft.algebra.make_algebra` when
the module is imported, so a catalog that loads at all is a catalog of
honest graded commutative associative algebras.  Operator orders quoted
in the summaries are measured, not assumed; truncation genuinely raises
the order of naive differential operators (d/dx is *not* a derivation of
C[x]/(x^k), see :mod:`cohft.koszul`), which is why the derivation-flavored
entries are built from the Euler operator x d/dx instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .algebra import GradedAlgebra, GradedVectorSpace, LinOp, linop, make_algebra

__all__ = [
    "CatalogEntry",
    "names",
    "get",
    "entries",
    "trunc_poly",
    "exterior",
    "tensor_product",
]


def trunc_poly(k: int) -> GradedAlgebra:
    """C[x]/(x^k) with basis 1, x, ..., x^(k-1), all in degree 0."""
    if not 2 <= k <= 8:
        raise ValueError("truncation order must be between 2 and 8")
    sp = GradedVectorSpace((0,) * k)
    c = [[[0] * k for _ in range(k)] for _ in range(k)]
    for i in range(k):
        for j in range(k):
            if i + j < k:
                c[i][j][i + j] = 1
    return make_algebra(sp, c)


def exterior(m: int) -> GradedAlgebra:
    """Exterior algebra on m odd generators, basis indexed by bitmask.

    Basis element s corresponds to the wedge of the generators whose bits
    are set, in increasing order; its degree is the popcount.  The product
    sign counts the generator transpositions needed to merge two sorted
    words.
    """
    if not 1 <= m <= 3:
        raise ValueError("need between 1 and 3 generators")
    dim = 1 << m
    sp = GradedVectorSpace(tuple(bin(s).count("1") for s in range(dim)))
    c = [[[0] * dim for _ in range(dim)] for _ in range(dim)]
    for s in range(dim):
        for t in range(dim):
            if s & t:
                continue
            sign = 1
            for a in range(m):
                if not (s >> a) & 1:
                    continue
                for b in range(m):
                    if (t >> b) & 1 and a > b:
                        sign = -sign
            c[s][t][s | t] = sign
    return make_algebra(sp, c)


def tensor_product(A: GradedAlgebra, B: GradedAlgebra) -> GradedAlgebra:
    """Graded tensor product, basis (i, j) -> i * dim(B) + j.

    The product carries the usual sign ``(-1)^{|b||a'|}`` for moving the
    first B-factor past the second A-factor.
    """
    nA, nB = A.dim, B.dim
    dim = nA * nB
    degrees = tuple(A.space.degrees[i] + B.space.degrees[j]
                    for i in range(nA) for j in range(nB))
    sp = GradedVectorSpace(degrees)
    c = [[[0] * dim for _ in range(dim)] for _ in range(dim)]
    for i in range(nA):
        for j in range(nB):
            bj = B.space.degrees[j]
            for k in range(nA):
                sgn = -1 if (bj % 2 and A.space.degrees[k] % 2) else 1
                for p in range(nA):
                    if not A.c[i][k][p]:
                        continue
                    for l in range(nB):
                        for q in range(nB):
                            if B.c[j][l][q]:
                                c[i * nB + j][k * nB + l][p * nB + q] = (
                                    sgn * A.c[i][k][p] * B.c[j][l][q])
    return make_algebra(sp, c)


def _odd_dual() -> GradedAlgebra:
    # basis 1, theta with theta^2 = 0 and |theta| = -1
    sp = GradedVectorSpace((0, -1))
    c = [[[0, 0], [0, 0]], [[0, 0], [0, 0]]]
    c[0][0][0] = 1
    c[0][1][1] = 1
    c[1][0][1] = 1
    return make_algebra(sp, c)


@dataclass
class CatalogEntry:
    name: str
    algebra: GradedAlgebra
    operators: dict[str, LinOp] = field(default_factory=dict)
    summary: str = ""


def _euler_diag(A: GradedAlgebra, power: int) -> LinOp:
    # (x d/dx)^power on a truncated polynomial algebra: x^j -> j^power x^j
    return linop(A.space, {(j, j): j ** power for j in range(1, A.dim)}, 0)


def _build() -> dict[str, CatalogEntry]:
    cat: dict[str, CatalogEntry] = {}

    def add(name, algebra, operators, summary):
        cat[name] = CatalogEntry(name, algebra, operators, summary)

    for k in range(2, 9):
        A = trunc_poly(k)
        ops: dict[str, LinOp] = {}
        if k <= 6:
            ops["euler"] = _euler_diag(A, 1)
        if k == 3:
            ops["d2_dx2"] = linop(A.space, {(0, 2): 2}, 0)
        if k == 4:
            ops["d_dx"] = linop(
                A.space, {(j - 1, j): j for j in range(1, 4)}, 0)
            ops["getzler2"] = linop(
                A.space, {(1, 1): -2, (2, 1): 1, (2, 2): -1, (3, 3): 3}, 0)
            ops["x_mult"] = linop(
                A.space, {(j + 1, j): 1 for j in range(3)}, 0)
            ops["identity"] = linop(
                A.space, {(j, j): 1 for j in range(4)}, 0)
        if k == 5:
            ops["euler_sq"] = _euler_diag(A, 2)
            ops["euler_cube"] = _euler_diag(A, 3)
        if k == 6:
            ops["d2_dx2"] = linop(
                A.space, {(j - 2, j): j * (j - 1) for j in range(2, 6)}, 0)
        add(f"trunc_poly_{k}", A, ops,
            f"C[x]/(x^{k}), dim {k}, all degrees 0")

    E1, E2, E3 = exterior(1), exterior(2), exterior(3)
    add("exterior_1", E1,
        {"d_theta": linop(E1.space, {(0, 1): 1}, -1)},
        "exterior algebra on one generator, dim 2, degrees 0/1")
    add("exterior_2", E2,
        {
            "d_theta1": linop(E2.space, {(0, 1): 1, (2, 3): 1}, -1),
            "d_theta2": linop(E2.space, {(0, 2): 1, (1, 3): -1}, -1),
            "bv_laplacian": linop(E2.space, {(0, 3): 1}, -2),
            "theta1_mult": linop(E2.space, {(1, 0): 1, (3, 2): 1}, 1),
            "skew_contraction": linop(E2.space, {(0, 1): 1, (1, 3): 1}, -1),
        },
        "exterior algebra on two generators, dim 4, degrees 0..2")
    add("exterior_3", E3,
        {"d_theta1": linop(
            E3.space,
            {(0, 1): 1, (2, 3): 1, (4, 5): 1, (6, 7): 1}, -1)},
        "exterior algebra on three generators, dim 8, degrees 0..3")

    P2, P3 = trunc_poly(2), trunc_poly(3)
    EP2 = tensor_product(E1, P2)
    add("ext1_poly2", EP2,
        {"x_dtheta": linop(EP2.space, {(1, 2): 1}, -1)},
        "exterior(1) (x) C[x]/(x^2), dim 4, degrees 0,0,1,1")

    EP3 = tensor_product(E1, P3)
    add("ext1_poly3", EP3,
        {
            # basis order: 1, x, x^2, th, th x, th x^2
            "d_theta": linop(
                EP3.space, {(0, 3): 1, (1, 4): 1, (2, 5): 1}, -1),
            "theta_euler": linop(EP3.space, {(4, 1): 1, (5, 2): 2}, 1),
            "weighted_contraction": linop(
                EP3.space, {(0, 3): -1, (2, 5): 1}, -1),
            "partial_contraction": linop(EP3.space, {(0, 3): 1}, -1),
        },
        "exterior(1) (x) C[x]/(x^3), dim 6, degrees 0,0,0,1,1,1")

    add("ext2_poly2", tensor_product(E2, P2), {},
        "exterior(2) (x) C[x]/(x^2), dim 8, degrees 0..2")

    OD = _odd_dual()
    add("odd_dual", OD,
        {"d_theta": linop(OD.space, {(0, 1): 1}, 1)},
        "dual numbers on an odd generator of degree -1, dim 2")

    return cat


_CATALOG = _build()


def names() -> list[str]:
    return sorted(_CATALOG)


def get(name: str) -> CatalogEntry:
    try:
        return _CATALOG[name]
    except KeyError:
        raise KeyError(
            f"no catalog algebra named {name!r}; available: {', '.join(names())}"
        ) from None


def entries() -> list[CatalogEntry]:
    return [_CATALOG[n] for n in names()]
