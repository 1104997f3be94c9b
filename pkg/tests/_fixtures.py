"""Shared constructed fixtures for the test suite.

Everything here is built from catalog algebras plus hand-picked operators
whose properties (orders, gauge relations, homology dimensions) are frozen
into the tests that use them.
"""

from cohft.algebra import commutator, linop
from cohft.catalog import get
from cohft.hodge import GaugeSeries


def ext2_poly2_gauge():
    """A two-level multicomplex on exterior(2) (x) C[x]/(x^2) with an exact
    two-term gauge.

    Basis order: 1, x, th1, th1 x, th2, th2 x, th1 th2, th1 th2 x.
    D1 = x d/dth1 (a derivation, order 1, square zero); A1 sends x to
    th1 th2 + th1 th2 x; D2 = [D1, A1] has order 2 and [D2, A1] = 0, so
    exp(-A1) conjugation truncates after the first commutator.
    """
    A = get("ext2_poly2").algebra
    D1 = linop(A.space, {(1, 2): 1, (5, 6): 1}, -1)
    A1 = linop(A.space, {(6, 1): 1, (7, 1): 1}, 2)
    D2 = commutator(D1, A1)
    return A, D1, A1, D2


def exterior_2_gauge():
    """Gauge fixture on the acyclic exterior(2): D1 = d/dth1, A1: 1 -> th1 th2."""
    E = get("exterior_2")
    A = E.algebra
    D1 = E.operators["d_theta1"]
    A1 = linop(A.space, {(3, 0): 1}, 2)
    D2 = commutator(D1, A1)
    return A, D1, A1, D2


def acyclic_summand():
    """exterior(1) (x) C[x]/(x^2) with D1 = x d/dth: homology is spanned by
    1 and th x, a copy of exterior(1)."""
    E = get("ext1_poly2")
    return E.algebra, E.operators["x_dtheta"]


def clifford_pair():
    """(d/dth1, th1-mult) on exterior(2): their anticommutator is the
    identity, so (D1, D2) is NOT a multicomplex (fails at n = 3)."""
    E = get("exterior_2")
    return E.algebra, E.operators["d_theta1"], E.operators["theta1_mult"]


def gauge_series(*ops):
    return GaugeSeries(tuple(ops))
